//! Spacings of order statistics and the Γ(r, 1) tail.
//!
//! For sorted points `X_1 <= ... <= X_n` in `[A, B]` the r-spacings are
//! `X_{i+r} - X_i`. Two index conventions are in use:
//!
//! * [`Boundary::WithEnds`] pads the sample with `X_0 = A` and `X_{n+1} = B`,
//!   giving the `n - r + 2` spacings `X_r - A, ..., B - X_{n-r+1}`. The
//!   interval is r-fold covered by segments of length `l` iff the largest of
//!   them is below `l`.
//! * [`Boundary::Interior`] keeps only the `n - r` spacings between sample
//!   points. The extremal-type limit laws are stated for this convention.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Which r-spacings are formed from a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    WithEnds,
    Interior,
}

impl Boundary {
    /// Number of r-spacings produced from `n` points.
    pub fn count(self, n: u64, r: u32) -> u64 {
        let r = u64::from(r);
        match self {
            Boundary::WithEnds => (n + 2).saturating_sub(r),
            Boundary::Interior => n.saturating_sub(r),
        }
    }
}

/// "The k-th maximal r-spacing among n points."
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacingQuery {
    pub n: u64,
    pub r: u32,
    pub k: u64,
}

impl SpacingQuery {
    pub fn new(n: u64, r: u32, k: u64) -> Result<Self> {
        if r == 0 || u64::from(r) > n {
            return Err(Error::InvalidQuery(format!(
                "need 1 <= r <= n, got n = {n}, r = {r}"
            )));
        }
        let kmax = n - u64::from(r) + 2;
        if k == 0 || k > kmax {
            return Err(Error::InvalidQuery(format!(
                "need 1 <= k <= n - r + 2 = {kmax}, got k = {k}"
            )));
        }
        Ok(SpacingQuery { n, r, k })
    }

    /// The maximal r-spacing (`k = 1`).
    pub fn max(n: u64, r: u32) -> Result<Self> {
        Self::new(n, r, 1)
    }

    /// Checks that the query can be answered under `boundary`.
    pub fn check_boundary(&self, boundary: Boundary) -> Result<()> {
        let count = boundary.count(self.n, self.r);
        if self.k > count {
            return Err(Error::InvalidQuery(format!(
                "k = {} exceeds the {count} {boundary:?} spacings of n = {}, r = {}",
                self.k, self.n, self.r
            )));
        }
        Ok(())
    }
}

/// The survival function `f_r = 1 - G_r` of the Γ(r, 1) law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaTail {
    r: u32,
}

impl GammaTail {
    pub fn new(r: u32) -> Result<Self> {
        if r == 0 {
            return Err(domain("gamma tail needs r >= 1"));
        }
        Ok(GammaTail { r })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `f_r(x)`; `x` must be nonnegative.
    pub fn eval(&self, x: f64) -> f64 {
        gamma_tail_unchecked(self.r, x)
    }
}

/// `f_r(x) = e^{-x} Σ_{i=1}^{r} x^{i-1} / Γ(i)`.
pub fn gamma_tail(r: u32, x: f64) -> Result<f64> {
    if r == 0 {
        return Err(domain("gamma tail needs r >= 1"));
    }
    if !(x >= 0.0) {
        return Err(domain(format!("gamma tail needs x >= 0, got {x}")));
    }
    Ok(gamma_tail_unchecked(r, x))
}

pub(crate) fn gamma_tail_unchecked(r: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if r == 1 {
        return (-x).exp();
    }
    // Terms follow t_i = t_{i-1} x / (i-1) from t_1 = 1. The running sum is
    // rescaled whenever it grows large; the scale is kept as a logarithm.
    const BIG: f64 = 1e280;
    let mut log_scale = 0.0;
    let mut term = 1.0;
    let mut sum = crate::numeric::CompensatedSum::new();
    sum.add(1.0);
    for i in 1..r {
        term *= x / f64::from(i);
        sum.add(term);
        if term > BIG {
            let v = sum.value();
            sum = crate::numeric::CompensatedSum::new();
            sum.add(v / BIG);
            term /= BIG;
            log_scale += BIG.ln();
        }
    }
    let s = sum.value();
    ((-x) + log_scale + s.ln()).exp().min(1.0)
}

/// `x` with `f_r(x) = t`, for `t` in `(0, 1)`.
pub fn gamma_tail_inverse(r: u32, t: f64) -> Result<f64> {
    if r == 0 {
        return Err(domain("gamma tail needs r >= 1"));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(domain(format!(
            "gamma tail level must be in (0, 1), got {t}"
        )));
    }
    if r == 1 {
        return Ok(-t.ln());
    }
    let ln_t = t.ln();
    let mut hi = f64::from(r);
    while gamma_tail_unchecked(r, hi) > t {
        hi *= 2.0;
    }
    let tol = crate::roots::Tolerance {
        xtol: 0.0,
        rtol: 4.0 * f64::EPSILON,
        ftol: 0.0,
        max_iter: 500,
    };
    crate::roots::brent(|x| gamma_tail_unchecked(r, x).ln() - ln_t, 0.0, hi, tol)
}

/// All r-spacings of sorted `points` on `[lo, hi]`.
pub fn spacing_vector(
    points: &[f64],
    r: u32,
    boundary: Boundary,
    support: (f64, f64),
) -> Result<Vec<f64>> {
    check_points(points, r, boundary, support)?;
    let r = r as usize;
    let (lo, hi) = support;
    let n = points.len();
    let at = |i: usize| -> f64 {
        // index into the padded sample X_0 = lo, X_1..X_n, X_{n+1} = hi
        if i == 0 {
            lo
        } else if i == n + 1 {
            hi
        } else {
            points[i - 1]
        }
    };
    let out = match boundary {
        Boundary::WithEnds => (0..=(n + 1 - r)).map(|i| at(i + r) - at(i)).collect(),
        Boundary::Interior => (1..=(n - r)).map(|i| at(i + r) - at(i)).collect(),
    };
    Ok(out)
}

fn check_points(points: &[f64], r: u32, boundary: Boundary, support: (f64, f64)) -> Result<()> {
    if r == 0 {
        return Err(domain("spacing order r must be >= 1"));
    }
    if points.len() < r as usize {
        return Err(Error::InvalidQuery(format!(
            "need at least r = {r} points, got {}",
            points.len()
        )));
    }
    if let Some(i) = points.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(Error::Unsorted { index: i + 1 });
    }
    if boundary == Boundary::WithEnds {
        let (lo, hi) = support;
        if !(lo < hi) {
            return Err(domain(format!("empty support [{lo}, {hi}]")));
        }
        if let (Some(&first), Some(&last)) = (points.first(), points.last()) {
            if first < lo || last > hi {
                return Err(domain(format!(
                    "points [{first}, {last}] fall outside the support [{lo}, {hi}]"
                )));
            }
        }
    }
    Ok(())
}

/// The k-th largest r-spacing of sorted `points` without materializing the
/// spacing vector. Returns `None` when fewer than `k` spacings exist.
pub fn kth_max_spacing(
    points: &[f64],
    r: u32,
    k: usize,
    boundary: Boundary,
    support: (f64, f64),
) -> Option<f64> {
    let r = r as usize;
    let n = points.len();
    if k == 0 || r == 0 || n < r {
        return None;
    }
    let (lo, hi) = support;
    let at = |i: usize| -> f64 {
        if i == 0 {
            lo
        } else if i == n + 1 {
            hi
        } else {
            points[i - 1]
        }
    };
    let range = match boundary {
        Boundary::WithEnds => 0..(n + 2 - r),
        Boundary::Interior => 1..(n + 1 - r),
    };
    if range.len() < k {
        return None;
    }
    if k == 1 {
        return range.map(|i| at(i + r) - at(i)).reduce(f64::max);
    }
    // `top` holds the k largest values seen so far in ascending order.
    let mut top: Vec<f64> = Vec::with_capacity(k);
    for i in range {
        let s = at(i + r) - at(i);
        if top.len() < k {
            let pos = top.partition_point(|&v| v < s);
            top.insert(pos, s);
        } else if s > top[0] {
            top.remove(0);
            let pos = top.partition_point(|&v| v < s);
            top.insert(pos, s);
        }
    }
    Some(top[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn gamma_tail_trivial_values() {
        assert_eq!(gamma_tail(1, 0.0).unwrap(), 1.0);
        assert_eq!(gamma_tail(7, 0.0).unwrap(), 1.0);
        assert!((gamma_tail(1, 2f64.ln()).unwrap() - 0.5).abs() < 1e-16);
    }

    #[test]
    fn gamma_tail_inverse_round_trips() {
        for r in [1, 2, 5, 50] {
            for t in [1e-12, 1e-5, 0.3, 0.999] {
                let x = gamma_tail_inverse(r, t).unwrap();
                let back = gamma_tail(r, x).unwrap();
                assert!((back / t - 1.0).abs() < 1e-10, "r={r} t={t}: {back}");
            }
        }
        assert!(gamma_tail_inverse(2, 0.0).is_err());
        assert!(gamma_tail_inverse(2, 1.0).is_err());
    }

    #[test]
    fn gamma_tail_r5_reference() {
        // e^{-x}(1 + x + x²/2 + x³/6 + x⁴/24) at x = 18.245, evaluated in
        // 50-digit arithmetic
        let v = gamma_tail(5, 18.245).unwrap();
        assert!((v - 6.93e-5).abs() < 1e-7, "{v}");
        assert!((v / 6.931_770_998_736_376e-5 - 1.0).abs() < 1e-13, "{v}");
    }

    #[test]
    fn gamma_tail_domain_errors() {
        assert!(gamma_tail(0, 1.0).is_err());
        assert!(gamma_tail(1, -1e-300).is_err());
        assert!(gamma_tail(3, f64::NAN).is_err());
        assert!(GammaTail::new(0).is_err());
    }

    #[test]
    fn gamma_tail_large_arguments_do_not_overflow() {
        // r = 400 at x = 1000: terms reach ~1e800 before rescaling
        // reference Q(400, 1000) = 5.27002392112626e-104 (50-digit arithmetic)
        let v = gamma_tail(400, 1000.0).unwrap();
        assert!((v / 5.270_023_921_126_26e-104 - 1.0).abs() < 1e-11, "{v}");
        assert_eq!(gamma_tail(3, f64::INFINITY).unwrap(), 0.0);
        // large r, small x stays ~1
        assert!((gamma_tail(200, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spacing_vector_examples() {
        let pts = [0.2, 0.5, 0.9];
        let s = spacing_vector(&pts, 1, Boundary::WithEnds, (0.0, 1.0)).unwrap();
        assert!(close(&s, &[0.2, 0.3, 0.4, 0.1]));
        let s = spacing_vector(&pts, 2, Boundary::WithEnds, (0.0, 1.0)).unwrap();
        assert!(close(&s, &[0.5, 0.7, 0.5]));
        let s = spacing_vector(&pts, 2, Boundary::Interior, (0.0, 1.0)).unwrap();
        assert!(close(&s, &[0.7]));
    }

    #[test]
    fn spacing_vector_degenerate_n_equals_r() {
        let pts = [0.3, 0.6];
        let s = spacing_vector(&pts, 2, Boundary::WithEnds, (0.0, 1.0)).unwrap();
        assert!(close(&s, &[0.6, 0.7]));
        let s = spacing_vector(&pts, 2, Boundary::Interior, (0.0, 1.0)).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn spacing_vector_errors() {
        assert!(matches!(
            spacing_vector(&[0.5, 0.2], 1, Boundary::WithEnds, (0.0, 1.0)),
            Err(Error::Unsorted { index: 1 })
        ));
        assert!(spacing_vector(&[0.5], 2, Boundary::WithEnds, (0.0, 1.0)).is_err());
        assert!(spacing_vector(&[1.5], 1, Boundary::WithEnds, (0.0, 1.0)).is_err());
    }

    #[test]
    fn kth_max_agrees_with_sorted_vector() {
        let pts = [0.05, 0.11, 0.2, 0.47, 0.5, 0.62, 0.9, 0.93];
        for boundary in [Boundary::WithEnds, Boundary::Interior] {
            for r in 1..=3 {
                let mut s = spacing_vector(&pts, r, boundary, (0.0, 1.0)).unwrap();
                s.sort_by(|a, b| b.total_cmp(a));
                for k in 1..=s.len() {
                    let got = kth_max_spacing(&pts, r, k, boundary, (0.0, 1.0)).unwrap();
                    assert_eq!(got, s[k - 1]);
                }
                assert!(kth_max_spacing(&pts, r, s.len() + 1, boundary, (0.0, 1.0)).is_none());
            }
        }
    }

    #[test]
    fn query_validation() {
        assert!(SpacingQuery::new(10, 1, 1).is_ok());
        assert!(SpacingQuery::new(10, 11, 1).is_err());
        assert!(SpacingQuery::new(10, 0, 1).is_err());
        assert!(SpacingQuery::new(10, 3, 9).is_ok());
        assert!(SpacingQuery::new(10, 3, 10).is_err());
        let q = SpacingQuery::new(10, 3, 9).unwrap();
        assert!(q.check_boundary(Boundary::WithEnds).is_ok());
        assert!(q.check_boundary(Boundary::Interior).is_err());
    }
}
