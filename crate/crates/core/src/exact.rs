//! Exact distribution of the maximal 1-spacing of `n` uniform points:
//!
//! ```text
//! P(M ≤ a) = 1 − Σ_{j=1}^{n+1} (−1)^{j−1} C(n+1, j) max{0, 1 − j a}^n
//! ```
//!
//! The sum alternates and its terms can exceed the result by hundreds of
//! orders of magnitude when `a` is close to `1/(n+1)`. It is first evaluated
//! in floating point (log-space terms, compensated summation) together with a
//! bound on the accumulated rounding error. When that bound is too large the
//! sum is recomputed exactly: every `f64` is a dyadic rational `m / 2^s`, so
//! the whole expression reduces to integer arithmetic over `2^{s n}`.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::numeric::{ldexp, CompensatedSum};

/// Largest sample size accepted by [`exact_max_spacing_cdf_r1`].
pub const EXACT_R1_MAX_N: u64 = 5000;

/// Absolute error budget for the floating-point route.
const FLOAT_ERROR_BUDGET: f64 = 1e-13;

/// `P(M_{1,n} ≤ a)` for the maximal 1-spacing (boundary spacings included)
/// of `n` i.i.d. uniform points on `[0, 1]`.
pub fn exact_max_spacing_cdf_r1(n: u64, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("exact CDF needs n >= 1"));
    }
    if n > EXACT_R1_MAX_N {
        return Err(Error::ExactUnstable {
            n,
            limit: EXACT_R1_MAX_N,
        });
    }
    if a.is_nan() || a < 0.0 {
        return Err(domain(format!("exact CDF needs 0 <= a <= 1, got {a}")));
    }
    if a >= 1.0 {
        return Ok(1.0);
    }
    // (n+1) spacings summing to 1 cannot all be below 1/(n+1)
    if a * (n + 1) as f64 <= 1.0 && exact_sum_is_zero_region(n, a) {
        return Ok(0.0);
    }
    match float_route(n, a) {
        Some(v) => Ok(v),
        None => Ok(exact_route(n, a)),
    }
}

/// `a <= 1/(n+1)` decided exactly: `a (n+1) <= 1` in rationals.
fn exact_sum_is_zero_region(n: u64, a: f64) -> bool {
    let (m, s) = dyadic(a);
    // a (n+1) <= 1  <=>  m (n+1) <= 2^s
    let lhs = BigUint::from(m) * BigUint::from(n + 1);
    lhs <= (BigUint::from(1u32) << s)
}

/// Returns `None` when the rounding-error bound exceeds the budget.
fn float_route(n: u64, a: f64) -> Option<f64> {
    let nf = n as f64;
    let mut sum = CompensatedSum::new();
    let mut magnitude = 0.0;
    let mut err = 0.0;
    for j in 1..=(n + 1) {
        let base = -(j as f64) * a;
        if base <= -1.0 {
            break;
        }
        let log_binom = crate::numeric::ln_binomial(n + 1, j);
        let log_pow = nf * base.ln_1p();
        let lt = log_binom + log_pow;
        if lt > 700.0 {
            return None;
        }
        let t = lt.exp();
        sum.add(if j % 2 == 1 { t } else { -t });
        magnitude += t;
        // relative error of exp(lt) is about eps * |lt components|
        err += t * (log_binom.abs() + log_pow.abs() + 4.0);
    }
    let err = 16.0 * f64::EPSILON * err + f64::EPSILON * magnitude;
    if err > FLOAT_ERROR_BUDGET {
        return None;
    }
    Some((1.0 - sum.value()).clamp(0.0, 1.0))
}

/// Writes a positive finite `a` as `m / 2^s` with `m` odd (or `m = 0`).
fn dyadic(a: f64) -> (u64, u64) {
    debug_assert!(a > 0.0 && a.is_finite());
    let bits = a.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    while m % 2 == 0 && m != 0 {
        m /= 2;
        e += 1;
    }
    if e >= 0 {
        // a >= 1 is handled by the caller; keep the representation valid anyway
        (m << e, 0)
    } else {
        (m, (-e) as u64)
    }
}

fn exact_route(n: u64, a: f64) -> f64 {
    let (m, s) = dyadic(a);
    let denom_pow = BigUint::from(1u32) << s; // 2^s
    let m_big = BigUint::from(m);
    let n_exp = u32::try_from(n).expect("n bounded by EXACT_R1_MAX_N");

    let mut acc = BigInt::zero();
    let mut binom = BigUint::from(1u32);
    for j in 1..=(n + 1) {
        binom = binom * BigUint::from(n + 2 - j) / BigUint::from(j);
        let jm = &m_big * BigUint::from(j);
        if jm >= denom_pow {
            break;
        }
        let base = &denom_pow - jm;
        let term = BigInt::from_biguint(Sign::Plus, &binom * base.pow(n_exp));
        if j % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    // P = (2^{s n} - acc) / 2^{s n}
    let total_shift = s * n;
    let numer = (BigInt::from(1u32) << total_shift) - acc;
    if numer.sign() != Sign::Plus {
        return 0.0;
    }
    let numer = numer.magnitude();
    let bits = numer.bits();
    let shift = bits.saturating_sub(64);
    let top = (numer >> shift).to_u64().expect("at most 64 bits remain");
    let value = ldexp(top as f64, shift as i64 - total_shift as i64);
    value.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_values() {
        assert!((exact_max_spacing_cdf_r1(1, 0.75).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(exact_max_spacing_cdf_r1(1, 0.5).unwrap(), 0.0);
        assert_eq!(exact_max_spacing_cdf_r1(3, 1.0).unwrap(), 1.0);
        assert_eq!(exact_max_spacing_cdf_r1(3, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn n1_is_linear_on_upper_half() {
        for &a in &[0.55, 0.6, 0.8, 0.95] {
            let v = exact_max_spacing_cdf_r1(1, a).unwrap();
            assert!((v - (2.0 * a - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(exact_max_spacing_cdf_r1(0, 0.5).is_err());
        assert!(exact_max_spacing_cdf_r1(5, -0.1).is_err());
        assert!(exact_max_spacing_cdf_r1(5, f64::NAN).is_err());
        assert!(matches!(
            exact_max_spacing_cdf_r1(EXACT_R1_MAX_N + 1, 0.01),
            Err(Error::ExactUnstable { .. })
        ));
    }

    #[test]
    fn dyadic_decomposition_is_exact() {
        for &a in &[0.5, 0.3, 1e-3, 0.999_999, 5e-320] {
            let (m, s) = dyadic(a);
            assert_eq!(ldexp(m as f64, -(s as i64)), a);
        }
    }

    #[test]
    fn routes_agree_where_both_apply() {
        for &(n, a) in &[(10u64, 0.3), (20, 0.25), (50, 0.1)] {
            let exact = exact_route(n, a);
            if let Some(f) = float_route(n, a) {
                assert!((exact - f).abs() < 1e-13, "n={n} a={a}: {exact} vs {f}");
            }
        }
    }

    #[test]
    fn near_threshold_tail_is_tiny_and_positive() {
        // just above 1/(n+1): terms are astronomically large, result tiny
        let n = 200;
        let a = 1.05 / (n as f64 + 1.0);
        let v = exact_max_spacing_cdf_r1(n, a).unwrap();
        assert!(v > 0.0 && v < 1e-30, "{v}");
    }
}
