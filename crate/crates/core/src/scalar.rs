//! Numeric backends.
//!
//! Every mechanism and oracle is generic over [`Scalar`]. Two backends exist:
//! [`Exact`] (rationals over `i128`) for instances with rational supports, and
//! `f64` for continuous distributions.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};

/// Exact rational value.
pub type Exact = Ratio<i128>;

/// Absolute tolerance for budget-balance and IR checks on the float path.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Which numeric backend a document or experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    #[default]
    Exact,
    Float,
}

impl fmt::Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericMode::Exact => f.write_str("exact"),
            NumericMode::Float => f.write_str("float"),
        }
    }
}

pub trait Scalar:
    Copy
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Sum
{
    const MODE: NumericMode;

    fn from_int(n: i64) -> Self;

    fn from_frac(num: i64, den: i64) -> Self;

    /// Converts a float draw. The exact backend rejects it: exact instances
    /// must come from rational supports.
    fn from_f64(x: f64) -> Result<Self>;

    fn to_f64(&self) -> f64;

    /// Parses `"3"`, `"-1.25"` or `"1/3"`.
    fn parse_str(s: &str) -> Result<Self>;

    fn render(&self) -> String;

    /// Zero within the backend's tolerance: exact equality on the exact path,
    /// `|x| <= 1e-9` on the float path.
    fn near_zero(&self) -> bool;

    /// `self >= other` up to the backend's tolerance.
    fn ge_tol(&self, other: &Self) -> bool {
        if Self::MODE == NumericMode::Exact {
            self >= other
        } else {
            (*other - *self).to_f64() <= FLOAT_TOLERANCE
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn positive_part(self) -> Self {
        self.max_of(Self::zero())
    }
}

impl Scalar for f64 {
    const MODE: NumericMode = NumericMode::Float;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_frac(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(MarketError::InvalidInput(format!("non-finite value {x}")))
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| bad_number(s))?;
            let d: f64 = d.trim().parse().map_err(|_| bad_number(s))?;
            if d == 0.0 {
                return Err(bad_number(s));
            }
            return Ok(n / d);
        }
        s.parse::<f64>()
            .map_err(|_| bad_number(s))
            .and_then(Self::from_f64)
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn near_zero(&self) -> bool {
        self.abs() <= FLOAT_TOLERANCE
    }
}

impl Scalar for Exact {
    const MODE: NumericMode = NumericMode::Exact;

    fn from_int(n: i64) -> Self {
        Ratio::from_integer(n as i128)
    }

    fn from_frac(num: i64, den: i64) -> Self {
        Ratio::new(num as i128, den as i128)
    }

    fn from_f64(x: f64) -> Result<Self> {
        Err(MarketError::Unsupported(format!(
            "continuous draw {x} on the exact numeric path"
        )))
    }

    fn to_f64(&self) -> f64 {
        // Denominators stay far below 2^100 in practice, so the two casts
        // lose at most a couple of ulps.
        *self.numer() as f64 / *self.denom() as f64
    }

    fn parse_str(s: &str) -> Result<Self> {
        parse_exact(s.trim()).ok_or_else(|| bad_number(s))
    }

    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn near_zero(&self) -> bool {
        self.is_zero()
    }
}

fn bad_number(s: &str) -> MarketError {
    MarketError::InvalidInput(format!("cannot parse number {s:?}"))
}

fn parse_exact(s: &str) -> Option<Exact> {
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_exact(n.trim())?;
        let d = parse_exact(d.trim())?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i128 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    let denom = 10i128.checked_pow(frac_part.len() as u32)?;
    let value = Ratio::new(numer, denom);
    Some(if neg { -value } else { value })
}

/// Absolute value helper that works for both backends.
pub fn abs<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        -x
    } else {
        x
    }
}
