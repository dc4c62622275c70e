//! Approximations of `P(n M ≤ x)` for the maximal r-spacing of a uniform
//! sample, where `M` includes the two boundary spacings.
//!
//! * classical Gumbel limit centred at `b_n^(r) = ln n + (r-1) ln ln n - ln Γ(r)`;
//! * the Γ(r,1)-tail approximation `exp(-n f_r(x))`;
//! * the Gumbel form with an `x`-dependent shift `b_{n,x}^(r)`, the root of
//!   `b - ln n - ln Σ_{i=1}^r (b+x)^{i-1}/Γ(i) = 0`. Its quantiles coincide
//!   with those of the gamma-tail approximation.
//!
//! Logarithms are natural throughout.

use crate::error::{domain, Error, Result};
use crate::estimate::{CdfEstimate, Method};
use crate::numeric::{ln_gamma_int, CompensatedSum};
use crate::roots::{bisect, Tolerance};
use crate::spacings::gamma_tail_unchecked;

/// Residual tolerance of [`solve_corrected_shift`].
pub const SHIFT_RESIDUAL_TOL: f64 = 1e-12;
const SHIFT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftVariant {
    Classic,
    Corrected { x: f64 },
}

/// A centring constant for `n M - b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelShift {
    pub n: f64,
    pub r: u32,
    pub b: f64,
    pub variant: ShiftVariant,
}

impl GumbelShift {
    /// The spacing-scale quantile `(b + x) / n` this shift encodes.
    pub fn quantile_at(&self, x: f64) -> f64 {
        (self.b + x) / self.n
    }
}

fn check_n(n: f64) -> Result<()> {
    if !(n >= 3.0) || !n.is_finite() {
        return Err(domain(format!(
            "need n >= 3 so that ln ln n is defined, got {n}"
        )));
    }
    Ok(())
}

fn check_r(r: u32) -> Result<()> {
    if r == 0 {
        return Err(domain("spacing order r must be >= 1"));
    }
    Ok(())
}

/// `b_n^(r) = ln n + (r-1) ln ln n - ln Γ(r)`.
pub fn gumbel_b(n: f64, r: u32) -> Result<f64> {
    check_n(n)?;
    check_r(r)?;
    let ln_n = n.ln();
    Ok(ln_n + f64::from(r - 1) * ln_n.ln() - ln_gamma_int(r))
}

/// Classical Gumbel approximation `exp(-exp(-(x_scaled - b_n^(r))))`.
pub fn cdf_gumbel_classic(n: f64, r: u32, x_scaled: f64) -> Result<f64> {
    let b = gumbel_b(n, r)?;
    Ok((-(-(x_scaled - b)).exp()).exp())
}

/// Gamma-tail approximation `exp(-n f_r(x_scaled))`.
pub fn cdf_gamma_approx(n: f64, r: u32, x_scaled: f64) -> Result<f64> {
    check_r(r)?;
    if !(n > 0.0) {
        return Err(domain(format!("sample size must be positive, got {n}")));
    }
    if !(x_scaled >= 0.0) {
        return Err(domain(format!(
            "scaled argument must be >= 0, got {x_scaled}"
        )));
    }
    Ok((-n * gamma_tail_unchecked(r, x_scaled)).exp())
}

/// `ln Σ_{i=1}^r u^{i-1}/Γ(i)` for `u >= 0`, i.e. `u + ln f_r(u)`.
fn ln_partial_exp_sum(r: u32, u: f64) -> f64 {
    if r == 1 {
        return 0.0;
    }
    if u <= 0.0 {
        return 0.0;
    }
    // Scaled by the largest term to stay finite for large u and r.
    let mut log_terms = Vec::with_capacity(r as usize);
    let mut lt = 0.0;
    log_terms.push(lt);
    let ln_u = u.ln();
    for i in 1..r {
        lt += ln_u - f64::from(i).ln();
        log_terms.push(lt);
    }
    let m = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: CompensatedSum = log_terms.iter().map(|&t| (t - m).exp()).collect();
    m + s.value().ln()
}

/// Residual of the shift equation at `b`.
fn shift_residual(ln_n: f64, r: u32, x: f64, b: f64) -> f64 {
    b - ln_n - ln_partial_exp_sum(r, b + x)
}

/// Solves for the corrected shift `b_{n,x}^(r)`.
///
/// Fixed-point iteration `b <- ln n + ln Σ (b+x)^{i-1}/Γ(i)` from
/// `b_n^(r)`, undamped until the residual grows, then damped by 1/2; falls
/// back to bisection if 200 iterations do not reach the tolerance.
pub fn solve_corrected_shift(n: f64, r: u32, x: f64) -> Result<GumbelShift> {
    check_n(n)?;
    check_r(r)?;
    if !x.is_finite() {
        return Err(domain(format!("shift argument must be finite, got {x}")));
    }
    let ln_n = n.ln();
    let shift = |b| GumbelShift {
        n,
        r,
        b,
        variant: ShiftVariant::Corrected { x },
    };
    if r == 1 {
        return Ok(shift(ln_n));
    }

    let map = |b: f64| ln_n + ln_partial_exp_sum(r, (b + x).max(0.0));
    let mut b = gumbel_b(n, r)?.max(-x);
    let mut damping = 1.0;
    let mut prev_res = f64::INFINITY;
    for _ in 0..SHIFT_MAX_ITER {
        let res = shift_residual(ln_n, r, x, b);
        if res.abs() < SHIFT_RESIDUAL_TOL {
            return Ok(shift(b));
        }
        if res.abs() >= prev_res {
            damping = 0.5;
        }
        prev_res = res.abs();
        let next = map(b);
        b = (1.0 - damping) * b + damping * next;
        if b + x < 0.0 {
            break;
        }
    }

    // Bisection on b + x >= 0, where the residual is increasing overall.
    let lo = -x;
    let res_lo = shift_residual(ln_n, r, x, lo);
    if res_lo >= 0.0 {
        return Err(Error::Bracket(format!(
            "shift equation has no root with b + x >= 0 (n = {n}, r = {r}, x = {x})"
        )));
    }
    let mut hi = (gumbel_b(n, r)? + x.abs() + 1.0).max(lo + 1.0);
    while shift_residual(ln_n, r, x, hi) <= 0.0 {
        hi = lo + 2.0 * (hi - lo);
        if !hi.is_finite() {
            return Err(Error::Bracket(
                "shift equation residual never turns positive".into(),
            ));
        }
    }
    let tol = Tolerance {
        xtol: 0.0,
        rtol: f64::EPSILON,
        ftol: SHIFT_RESIDUAL_TOL * 0.5,
        max_iter: 400,
    };
    let b = bisect(|b| shift_residual(ln_n, r, x, b), lo, hi, tol)?;
    let res = shift_residual(ln_n, r, x, b);
    if res.abs() >= SHIFT_RESIDUAL_TOL {
        return Err(Error::NoConvergence(format!(
            "shift residual {res:e} above tolerance at b = {b}"
        )));
    }
    Ok(shift(b))
}

/// Gumbel reduced variate `x_p = -ln(-ln p)`.
pub fn gumbel_reduced(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("probability must be in (0, 1), got {p}")));
    }
    Ok(-(-p.ln()).ln())
}

/// Spacing-scale quantile of the classical Gumbel approximation.
pub fn quantile_gumbel_classic(n: f64, r: u32, p: f64) -> Result<f64> {
    Ok((gumbel_b(n, r)? + gumbel_reduced(p)?) / n)
}

/// Spacing-scale quantile `(b_{n,x_p} + x_p) / n` of the corrected-shift form.
pub fn quantile_corrected_shift(n: f64, r: u32, p: f64) -> Result<f64> {
    let x = gumbel_reduced(p)?;
    Ok(solve_corrected_shift(n, r, x)?.quantile_at(x))
}

fn scale_hint(n: f64, r: u32) -> f64 {
    let ln_n = n.max(3.0).ln();
    (ln_n + f64::from(r - 1) * ln_n.ln().max(0.0)).max(1.0) / n
}

/// Gamma-tail approximation as a CDF of the spacing `M`.
pub fn gamma_approx_estimate(n: f64, r: u32) -> Result<CdfEstimate> {
    cdf_gamma_approx(n, r, 0.0)?;
    CdfEstimate::new(
        Method::GammaTail,
        move |s: f64| {
            if s <= 0.0 {
                0.0
            } else {
                (-n * gamma_tail_unchecked(r, n * s)).exp()
            }
        },
        scale_hint(n, r),
    )
}

/// Classical Gumbel approximation as a CDF of the spacing `M`.
pub fn gumbel_classic_estimate(n: f64, r: u32) -> Result<CdfEstimate> {
    let b = gumbel_b(n, r)?;
    CdfEstimate::new(
        Method::GumbelClassic,
        move |s: f64| (-(-(n * s - b)).exp()).exp(),
        scale_hint(n, r),
    )
}

/// Corrected-shift Gumbel form as a CDF of `M`. At `u = n s` the reduced
/// variate solving `b_{n,x} + x = u` is explicit: `x = u - ln n - ln Σ(u)`.
pub fn gumbel_corrected_estimate(n: f64, r: u32) -> Result<CdfEstimate> {
    check_n(n)?;
    check_r(r)?;
    let ln_n = n.ln();
    CdfEstimate::new(
        Method::GumbelCorrected,
        move |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let u = n * s;
            let x = u - ln_n - ln_partial_exp_sum(r, u);
            (-(-x).exp()).exp()
        },
        scale_hint(n, r),
    )
}

/// Exact r = 1 CDF as an estimate.
pub fn exact_r1_estimate(n: u64) -> Result<CdfEstimate> {
    crate::exact::exact_max_spacing_cdf_r1(n, 0.5)?;
    CdfEstimate::new(
        Method::ExactR1,
        move |a: f64| {
            if a <= 0.0 {
                0.0
            } else {
                crate::exact::exact_max_spacing_cdf_r1(n, a.min(1.0)).unwrap_or(f64::NAN)
            }
        },
        ((n as f64).ln().max(1.0) / n as f64).min(0.5),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gumbel_b_values() {
        // ln 1e4 = 9.210340371976184; + 4 ln(9.2103...) - ln 24 = 14.913593767...
        assert!((gumbel_b(1e4, 1).unwrap() - 9.210_340_371_976_184).abs() < 1e-12);
        assert!((gumbel_b(1e4, 5).unwrap() - 14.913_593_767_099_623).abs() < 1e-12);
        let ee = std::f64::consts::E.exp();
        assert!((gumbel_b(ee, 2).unwrap() - (std::f64::consts::E + 1.0)).abs() < 1e-12);
        assert!(gumbel_b(2.5, 1).is_err());
        assert!(gumbel_b(10.0, 0).is_err());
    }

    #[test]
    fn gumbel_classic_median_and_mode() {
        let b = gumbel_b(1e4, 1).unwrap();
        let x = b + gumbel_reduced(0.5).unwrap();
        assert!((gumbel_reduced(0.5).unwrap() - 0.366_512_920_581_664_3).abs() < 1e-12);
        assert!((cdf_gumbel_classic(1e4, 1, x).unwrap() - 0.5).abs() < 1e-14);
        assert!((cdf_gumbel_classic(1e4, 1, b).unwrap() - (-1f64).exp()).abs() < 1e-15);
        let q = quantile_gumbel_classic(1e4, 1, 0.5).unwrap();
        assert!((q * 1e3 - 0.9577).abs() < 5e-5, "{q}");
    }

    #[test]
    fn gamma_approx_reference_points() {
        let u = (1e4f64 / 2f64.ln()).ln();
        assert!((cdf_gamma_approx(1e4, 1, u).unwrap() - 0.5).abs() < 1e-12);
        assert!((u / 1e4 * 1e3 - 0.957_685_329_255_784_6).abs() < 1e-12);
        assert!((cdf_gamma_approx(1e4, 5, 18.245).unwrap() - 0.5).abs() < 5e-3);
        for &(n, r) in &[(10.0, 1), (1e4, 5), (3.0, 2)] {
            assert!(
                (cdf_gamma_approx(n, r, 0.0).unwrap() - (-n).exp()).abs() < 1e-300f64.max(1e-16)
            );
        }
        assert!(cdf_gamma_approx(1e4, 1, -1.0).is_err());
    }

    #[test]
    fn gumbel_and_gamma_coincide_for_r1() {
        for i in 0..200 {
            let u = 2.0 + 0.1 * i as f64;
            let a = cdf_gumbel_classic(1e4, 1, u).unwrap();
            let b = cdf_gamma_approx(1e4, 1, u).unwrap();
            assert!((a - b).abs() < 1e-12, "u={u}: {a} vs {b}");
        }
    }

    #[test]
    fn corrected_shift_r1_is_log_n() {
        for &x in &[-1.0, 0.0, 0.36651, 2.97] {
            let s = solve_corrected_shift(1e4, 1, x).unwrap();
            assert_eq!(s.b, 1e4f64.ln());
        }
    }

    #[test]
    fn corrected_shift_table_values() {
        let x = gumbel_reduced(0.5).unwrap();
        let s = solve_corrected_shift(1e4, 5, x).unwrap();
        assert!((s.b - 17.879).abs() < 1e-3, "{}", s.b);
        assert!(shift_residual(1e4f64.ln(), 5, x, s.b).abs() < SHIFT_RESIDUAL_TOL);
        assert!((s.quantile_at(x) * 1e3 - 1.8245).abs() < 5e-5);

        let x = gumbel_reduced(0.95).unwrap();
        assert!((x - 2.9702).abs() < 1e-4);
        let q = solve_corrected_shift(1e4, 5, x).unwrap().quantile_at(x);
        assert!((q * 1e3 - 2.1462).abs() < 5e-5, "{q}");
    }

    #[test]
    fn corrected_shift_small_n_and_extreme_levels() {
        for &n in &[3.0, 10.0, 1e12] {
            for &r in &[2, 5, 50] {
                for &p in &[1e-6, 0.05, 0.5, 0.999_999] {
                    let x = gumbel_reduced(p).unwrap();
                    match solve_corrected_shift(n, r, x) {
                        Ok(s) => {
                            let res = shift_residual(n.ln(), r, x, s.b);
                            assert!(res.abs() < SHIFT_RESIDUAL_TOL, "n={n} r={r} p={p}");
                        }
                        Err(Error::Bracket(_)) => {
                            // only possible when x <= -ln n
                            assert!(x <= -n.ln(), "n={n} r={r} p={p}");
                        }
                        Err(e) => panic!("{e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn estimates_are_monotone_and_consistent() {
        let g = gamma_approx_estimate(1e4, 5).unwrap();
        let c = gumbel_corrected_estimate(1e4, 5).unwrap();
        let (lo, hi) = g.support_hint();
        let mut prev = 0.0;
        for i in 0..=200 {
            let s = lo + (hi - lo) * i as f64 / 200.0;
            let v = g.eval(s);
            assert!(v >= prev && (0.0..=1.0).contains(&v));
            prev = v;
            assert!((v - c.eval(s)).abs() < 1e-12);
        }
    }
}
