//! Numeric parameters of the approximation scheme and its analysis.
//!
//! All logarithms are base 2. `n` is the job count of the (padded) instance.

use num_rational::Ratio;

use crate::eps::Eps;

pub fn log2(n: usize) -> f64 {
    (n as f64).log2()
}

/// `ρ = ⌈log(log n / ε)⌉`, clamped to at least 1 so every interval longer
/// than one slot has at least two children.
pub fn rho(n: usize, eps: Eps) -> u32 {
    let x = log2(n.max(2)) / eps.as_f64();
    let r = (x.log2() - 1e-9).ceil();
    if r < 1.0 {
        1
    } else {
        r as u32
    }
}

/// `log n / log(log n / ε) + 1`; infinite when the denominator is not positive.
pub fn level_count_bound(n: usize, eps: Eps) -> f64 {
    let denom = (log2(n) / eps.as_f64()).log2();
    if denom > 0.0 {
        log2(n) / denom + 1.0
    } else {
        f64::INFINITY
    }
}

/// `⌈log log n⌉`, computed exactly as the least `c ≥ 0` with `2^(2^c) ≥ n`.
pub fn ceil_log_log(n: usize) -> u32 {
    let mut c = 0u32;
    while c < 6 && (1u128 << (1u32 << c)) < n as u128 {
        c += 1;
    }
    c
}

/// Which chain-length threshold stops the guessing loop of the level
/// assignment: `ε|I| / (m · 2^⌈log log n⌉)` or `ε|I| / 2^⌈log log n⌉`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ChainThreshold {
    #[default]
    PerMachine,
    Plain,
}

pub fn chain_threshold(
    len: usize,
    m: usize,
    n: usize,
    eps: Eps,
    mode: ChainThreshold,
) -> Ratio<u64> {
    let scale = 1u64 << ceil_log_log(n);
    let divisor = match mode {
        ChainThreshold::PerMachine => m as u64 * scale,
        ChainThreshold::Plain => scale,
    };
    eps.times(len) / Ratio::from_integer(divisor)
}

/// Guess budget `k = (m log n / ε)^(m/ε + 1)`.
pub fn prescribed_k(m: usize, n: usize, eps: Eps) -> f64 {
    let e = eps.as_f64();
    (m as f64 * log2(n) / e).powf(m as f64 / e + 1.0)
}

/// `(log n / ε)^(m/ε + 1)`, the factor by which a recursion shrinks
/// interval lengths in the analysis.
pub fn lambda_divisor(m: usize, n: usize, eps: Eps) -> f64 {
    let e = eps.as_f64();
    (log2(n) / e).powf(m as f64 / e + 1.0)
}

/// Recursion cap `⌈(ε/m) log n⌉ + 1`.
pub fn default_depth_max(n: usize, m: usize, eps: Eps) -> usize {
    let d = (eps.as_f64() / m as f64 * log2(n.max(1)) - 1e-9)
        .ceil()
        .max(0.0) as usize;
    d + 1
}

/// `r_max = ⌈ε (log n / log log n + 1) / m⌉`; `None` when `log log n ≤ 0`.
pub fn r_max(n: usize, m: usize, eps: Eps) -> Option<usize> {
    let ll = log2(n).log2();
    (ll > 0.0).then(|| ((eps.as_f64() * (log2(n) / ll + 1.0)) / m as f64 - 1e-9).ceil() as usize)
}

/// `2 m ε |Ī| / log n`.
pub fn degenerate_bound(m: usize, eps: Eps, interval_len: usize, n: usize) -> f64 {
    2.0 * m as f64 * eps.as_f64() * interval_len as f64 / log2(n)
}

/// `|Î| ε / (m log n)`.
pub fn idle_slot_bound(meta_len: usize, m: usize, eps: Eps, n: usize) -> f64 {
    meta_len as f64 * eps.as_f64() / (m as f64 * log2(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_values() {
        assert_eq!(rho(16, Eps::ONE), 2);
        assert_eq!(rho(8, Eps::ONE), 2);
        assert_eq!(rho(2, Eps::ONE), 1);
        assert_eq!(rho(256, Eps::ONE), 3);
        assert_eq!(rho(16, Eps::new(1, 2).unwrap()), 3);
    }

    #[test]
    fn loglog() {
        assert_eq!(ceil_log_log(2), 0);
        assert_eq!(ceil_log_log(4), 1);
        assert_eq!(ceil_log_log(5), 2);
        assert_eq!(ceil_log_log(16), 2);
        assert_eq!(ceil_log_log(17), 3);
    }

    #[test]
    fn level_bound_at_16() {
        assert!((level_count_bound(16, Eps::ONE) - 3.0).abs() < 1e-12);
        assert!(level_count_bound(2, Eps::ONE).is_infinite());
    }

    #[test]
    fn thresholds() {
        // ε|I| / (m 2^⌈log log n⌉) = 16 / (2 · 4) = 2
        assert_eq!(
            chain_threshold(16, 2, 16, Eps::ONE, ChainThreshold::PerMachine),
            Ratio::from_integer(2)
        );
        assert_eq!(
            chain_threshold(16, 2, 16, Eps::ONE, ChainThreshold::Plain),
            Ratio::from_integer(4)
        );
    }

    #[test]
    fn depth_caps() {
        assert_eq!(default_depth_max(16, 2, Eps::ONE), 3);
        assert_eq!(default_depth_max(16, 4, Eps::ONE), 2);
        assert_eq!(r_max(16, 1, Eps::ONE), Some(3));
        assert_eq!(r_max(2, 1, Eps::ONE), None);
    }
}
