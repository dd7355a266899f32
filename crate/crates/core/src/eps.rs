//! Exact accuracy parameter `ε ∈ (0, 1]`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Eps(Ratio<u64>);

impl Eps {
    pub const ONE: Eps = Eps(Ratio::new_raw(1, 1));

    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 || numer == 0 || numer > denom {
            return Err(Error::BadEps(format!("{numer}/{denom} is outside (0, 1]")));
        }
        Ok(Eps(Ratio::new(numer, denom)))
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0.to_f64().expect("finite ratio")
    }

    /// `m / ε` when it is an integer.
    pub fn machines_over(self, m: usize) -> Option<usize> {
        let q = Ratio::from_integer(m as u64) / self.0;
        q.is_integer().then(|| q.to_integer() as usize)
    }

    /// `ε · x` exactly.
    pub fn times(self, x: usize) -> Ratio<u64> {
        self.0 * Ratio::from_integer(x as u64)
    }
}

impl Default for Eps {
    fn default() -> Self {
        Eps::ONE
    }
}

impl fmt::Display for Eps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Accepts `1`, `1/2`, or a finite decimal such as `0.25`.
impl FromStr for Eps {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadEps(format!("cannot read `{s}`"));
        let s = s.trim();
        let (numer, denom) = if let Some((a, b)) = s.split_once('/') {
            (
                a.trim().parse::<u64>().map_err(|_| bad())?,
                b.trim().parse::<u64>().map_err(|_| bad())?,
            )
        } else if let Some((int, frac)) = s.split_once('.') {
            if frac.len() > 18 || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let int: u64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            let denom = 10u64.pow(frac.len() as u32);
            let frac: u64 = if frac.is_empty() {
                0
            } else {
                frac.parse().map_err(|_| bad())?
            };
            (int * denom + frac, denom)
        } else {
            (s.parse::<u64>().map_err(|_| bad())?, 1)
        };
        if denom.is_zero() {
            return Err(bad());
        }
        Eps::new(numer, denom).map_err(|_| bad())
    }
}
