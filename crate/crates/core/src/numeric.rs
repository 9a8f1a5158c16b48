//! Small numeric helpers shared by the table and certificate code.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Natural logarithm of a big integer, accurate to a few ulps.
///
/// Returns `-inf` for zero.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        if let Some(v) = x.to_f64() {
            if v.is_finite() {
                return v.ln();
            }
        }
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 leading bits fit in u64") as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Floor of the square root of `n`, exact.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Relative excess of `lhs` over `rhs`: positive when `lhs > rhs`.
pub(crate) fn relative_excess(lhs: f64, rhs: f64) -> f64 {
    let scale = rhs.abs().max(f64::MIN_POSITIVE);
    (lhs - rhs) / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn isqrt_matches_definition() {
        for n in 0..10_000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n, "n = {n}");
        }
        assert_eq!(isqrt(u64::MAX), u32::MAX as u64);
    }

    #[test]
    fn ln_of_huge_powers() {
        let x = BigUint::one() << 5000u32;
        let expected = 5000.0 * std::f64::consts::LN_2;
        assert!((ln_big(&x) - expected).abs() / expected < 1e-14);
        assert_eq!(ln_big(&BigUint::from(1u32)), 0.0);
        assert!((ln_big(&BigUint::from(10u32)) - 10f64.ln()).abs() < 1e-15);
    }
}
