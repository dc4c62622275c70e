//! Bracketing root finders for monotone scalar functions.
//!
//! Every caller in this crate inverts a monotone function (a CDF, a fixed-point
//! residual), so only bracketing methods are provided: they cannot leave the
//! bracket and never return a silently wrong root.

use crate::error::{Error, Result};

/// Stopping rule shared by the root finders.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Absolute tolerance on the argument.
    pub xtol: f64,
    /// Relative tolerance on the argument.
    pub rtol: f64,
    /// Stop as soon as `|f(x)| <= ftol`.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            xtol: 0.0,
            rtol: 4.0 * f64::EPSILON,
            ftol: 0.0,
            max_iter: 500,
        }
    }
}

impl Tolerance {
    fn width(&self, x: f64) -> f64 {
        self.xtol + self.rtol * x.abs()
    }
}

/// Plain bisection. `f(a)` and `f(b)` must have opposite signs (or be zero).
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Bracket(format!(
            "f({a}) = {fa} and f({b}) = {fb} do not change sign"
        )));
    }
    for _ in 0..tol.max_iter {
        let m = 0.5 * (a + b);
        if m == a || m == b || (b - a).abs() <= tol.width(m) {
            return Ok(m);
        }
        let fm = f(m);
        if fm.abs() <= tol.ftol || fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Brent's method (inverse quadratic interpolation safeguarded by bisection).
pub fn brent<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Bracket(format!(
            "f({a}) = {fa} and f({b}) = {fb} do not change sign"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.width(b);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() <= tol.ftol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::NoConvergence(format!(
        "Brent iteration exceeded {} steps near x = {b}",
        tol.max_iter
    )))
}

/// Grows `[lo, hi]` geometrically until a nondecreasing `g` satisfies
/// `g(lo) < target <= g(hi)`. `lo` and `hi` must be positive.
pub fn grow_bracket<F>(mut g: F, target: f64, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Bracket(format!("bad initial bracket [{lo}, {hi}]")));
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        if g(lo) < target {
            break;
        }
        hi = lo;
        lo *= 0.5;
    }
    for _ in 0..200 {
        if g(hi) >= target {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if g(lo) < target && g(hi) >= target {
        Ok((lo, hi))
    } else {
        Err(Error::Bracket(format!(
            "could not bracket level {target}: g({lo}) = {}, g({hi}) = {}",
            g(lo),
            g(hi)
        )))
    }
}
