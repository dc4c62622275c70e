//! Numerical integration on bounded intervals.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum QuadratureRule {
    GaussLegendreComposite { order: usize, panels: usize },
    AdaptiveSimpson { rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    #[serde(flatten)]
    pub rule: QuadratureRule,
    #[serde(default = "yes")]
    pub breakpoint_splitting: bool,
}

fn yes() -> bool {
    true
}

impl Default for QuadratureSpec {
    /// Composite Gauss–Legendre, order 32 on 64 panels, split at breakpoints.
    fn default() -> Self {
        QuadratureSpec {
            rule: QuadratureRule::GaussLegendreComposite {
                order: 32,
                panels: 64,
            },
            breakpoint_splitting: true,
        }
    }
}

impl QuadratureSpec {
    pub fn adaptive_simpson(rel_tol: f64) -> Self {
        QuadratureSpec {
            rule: QuadratureRule::AdaptiveSimpson { rel_tol },
            breakpoint_splitting: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.rule {
            QuadratureRule::GaussLegendreComposite { order, panels } => {
                if order < 4 {
                    return Err(Error::Config(format!(
                        "Gauss-Legendre order must be >= 4, got {order}"
                    )));
                }
                if panels == 0 {
                    return Err(Error::Config("need at least one panel".into()));
                }
            }
            QuadratureRule::AdaptiveSimpson { rel_tol } => {
                if !(rel_tol > 0.0 && rel_tol <= 1e-4) {
                    return Err(Error::Config(format!(
                        "adaptive Simpson tolerance must be in (0, 1e-4], got {rel_tol}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `∫_a^b f`, split at the `breakpoints` lying inside `(a, b)` when enabled.
    pub fn integrate(
        &self,
        f: impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        breakpoints: &[f64],
    ) -> Result<f64> {
        self.validate()?;
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(Error::Domain(format!(
                "integration needs finite a <= b, got [{a}, {b}]"
            )));
        }
        let mut edges = vec![a];
        if self.breakpoint_splitting {
            let mut inner: Vec<f64> = breakpoints
                .iter()
                .cloned()
                .filter(|&t| t > a && t < b)
                .collect();
            inner.sort_by(f64::total_cmp);
            inner.dedup();
            edges.extend(inner);
        }
        edges.push(b);
        let mut total = CompensatedSum::new();
        for w in edges.windows(2) {
            let v = match self.rule {
                QuadratureRule::GaussLegendreComposite { order, panels } => {
                    gauss_legendre_composite(&f, w[0], w[1], order, panels)
                }
                QuadratureRule::AdaptiveSimpson { rel_tol } => {
                    adaptive_simpson(&f, w[0], w[1], rel_tol)?
                }
            };
            total.add(v);
        }
        Ok(total.value())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

type NodesWeights = (Vec<f64>, Vec<f64>);

fn cached_rule(order: usize) -> NodesWeights {
    static RULES: OnceLock<std::sync::Mutex<std::collections::HashMap<usize, NodesWeights>>> =
        OnceLock::new();
    let map = RULES.get_or_init(Default::default);
    let mut guard = map.lock().expect("quadrature cache poisoned");
    guard
        .entry(order)
        .or_insert_with(|| gauss_legendre(order))
        .clone()
}

/// Gauss–Legendre rule of the given order on each of `panels` equal panels.
pub fn gauss_legendre_composite(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    order: usize,
    panels: usize,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let (nodes, weights) = cached_rule(order);
    let h = (b - a) / panels as f64;
    let mut total = CompensatedSum::new();
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            s += w * f(mid + 0.5 * h * x);
        }
        total.add(0.5 * h * s);
    }
    total.value()
}

/// Gauss–Legendre rule on `[0, 1]` with the given number of nodes, for
/// integration in the probability domain.
pub fn unit_interval_rule(order: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = cached_rule(order);
    nodes
        .iter()
        .zip(&weights)
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

const SIMPSON_MAX_DEPTH: u32 = 50;

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // a coarse pass fixes the absolute scale of the tolerance
    let scale = gauss_legendre_composite(f, a, b, 8, 8).abs();
    let abs_tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if diff.abs() <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    if depth == 0 {
        return Err(Error::NoConvergence(format!(
            "adaptive Simpson did not converge on [{a}, {b}]"
        )));
    }
    Ok(
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights() {
        for n in [1usize, 2, 5, 32, 128] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        // order 4 integrates degree 7 exactly
        let v = gauss_legendre_composite(&|x: f64| x.powi(7) + 3.0 * x * x, 0.0, 2.0, 4, 1);
        assert!((v - (32.0 + 8.0)).abs() < 1e-12);
    }

    #[test]
    fn default_rule_on_smooth_and_kinked_integrands() {
        let q = QuadratureSpec::default();
        let v = q.integrate(|x: f64| x.exp(), 0.0, 1.0, &[]).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        let v = q
            .integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3])
            .unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-15);
    }

    #[test]
    fn adaptive_simpson_matches() {
        let q = QuadratureSpec::adaptive_simpson(1e-10);
        let v = q
            .integrate(|x: f64| (-30.0 * x).exp(), 0.0, 1.0, &[])
            .unwrap();
        let exact = (1.0 - (-30f64).exp()) / 30.0;
        assert!(((v - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = QuadratureSpec {
            rule: QuadratureRule::GaussLegendreComposite {
                order: 3,
                panels: 4,
            },
            breakpoint_splitting: true,
        };
        assert!(bad.validate().is_err());
        assert!(QuadratureSpec::adaptive_simpson(1e-3).validate().is_err());
        assert!(QuadratureSpec::adaptive_simpson(0.0).validate().is_err());
    }

    #[test]
    fn unit_rule_integrates_on_unit_interval() {
        let s: f64 = unit_interval_rule(128).iter().map(|(u, w)| w * u * u).sum();
        assert!((s - 1.0 / 3.0).abs() < 1e-14);
    }
}
