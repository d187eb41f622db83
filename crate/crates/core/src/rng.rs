//! Seeded randomness.
//!
//! A [`RngContract`] names one stream: `(master seed, label, trial)`. The key of
//! the ChaCha stream is the SHA-256 digest of those three fields, so the same
//! contract always yields the same bytes and trials can run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngContract {
    pub seed: u64,
    pub label: String,
    pub trial: u64,
}

impl RngContract {
    pub fn new(seed: u64, label: impl Into<String>, trial: u64) -> Self {
        RngContract {
            seed,
            label: label.into(),
            trial,
        }
    }

    /// Same seed and trial, nested label `"<label>/<sub>"`.
    pub fn child(&self, sub: &str) -> RngContract {
        RngContract {
            seed: self.seed,
            label: format!("{}/{}", self.label, sub),
            trial: self.trial,
        }
    }

    pub fn with_trial(&self, trial: u64) -> RngContract {
        RngContract {
            seed: self.seed,
            label: self.label.clone(),
            trial,
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(self.trial.to_le_bytes());
        hasher.update((self.label.len() as u64).to_le_bytes());
        hasher.update(self.label.as_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        key
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }

    /// Per-agent stream: same key, ChaCha stream id = `agent`.
    pub fn agent_rng(&self, agent: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(agent + 1);
        rng
    }
}
