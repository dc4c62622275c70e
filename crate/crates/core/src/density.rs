//! Location densities on a bounded interval `[A, B]`.
//!
//! Models are validated on construction and immutable afterwards. They can be
//! read from JSON of the form `{"kind": "...", ...}`:
//!
//! ```json
//! {"kind": "uniform", "a": 0.0, "b": 1.0}
//! {"kind": "step", "breakpoints": [0.0, 0.5, 1.0], "heights": [0.5, 1.5]}
//! {"kind": "truncated_normal", "mean": 0.5, "sd": 1.0, "a": 0.0, "b": 1.0}
//! {"kind": "trapezoidal", "kappa": 0.25}
//! {"kind": "triangle"}
//! ```
//!
//! The trapezoidal family lives on `[0, 1]`: its density rises linearly on
//! `[0, κ]`, is flat on `[κ, 1-κ]` and falls linearly to 0 at 1. `κ = 0` is the
//! uniform density and `κ = 1/2` the symmetric triangle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{std_normal_cdf, std_normal_pdf, std_normal_sf};

/// Tolerance on the total mass of a step density.
pub const MASS_TOL: f64 = 1e-10;
/// Tolerance of numerically inverted quantiles, relative to the scale of
/// the support and of the root itself.
pub const QUANTILE_TOL: f64 = 1e-12;

/// Declarative form of a [`DensityModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform {
        #[serde(default)]
        a: f64,
        #[serde(default = "one")]
        b: f64,
    },
    Step {
        breakpoints: Vec<f64>,
        heights: Vec<f64>,
    },
    TruncatedNormal {
        mean: f64,
        sd: f64,
        #[serde(default)]
        a: f64,
        #[serde(default = "one")]
        b: f64,
    },
    Trapezoidal {
        kappa: f64,
    },
    Triangle,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Uniform {
        a: f64,
        b: f64,
    },
    Step {
        breakpoints: Vec<f64>,
        heights: Vec<f64>,
        // cumulative mass at each breakpoint
        cum: Vec<f64>,
    },
    TruncatedNormal {
        mean: f64,
        sd: f64,
        a: f64,
        b: f64,
        // Φ and 1-Φ at the standardized endpoints
        cdf_a: f64,
        sf_b: f64,
        mass: f64,
    },
    Trapezoidal {
        kappa: f64,
    },
}

/// A validated location density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensitySpec", into = "DensitySpec")]
pub struct DensityModel {
    kind: Kind,
}

/// Extremal type of the upper tail of a density, with its index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalType {
    WeibullIndex(f64),
    GumbelTail,
    FrechetIndex(f64),
    Unclassified,
}

/// `b_n = G(1/n)`, `a_n = G(1/(n e)) - G(1/n)` with `G` the inverse survival
/// function, and the right endpoint `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormingConstants {
    pub a_n: f64,
    pub b_n: f64,
    pub upper: f64,
}

impl NormingConstants {
    /// `B - b_n`, the Weibull-type scale.
    pub fn gap(&self) -> f64 {
        self.upper - self.b_n
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidModel(msg.into())
}

impl DensityModel {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(invalid(format!(
                "uniform support needs a < b, got [{a}, {b}]"
            )));
        }
        Ok(DensityModel {
            kind: Kind::Uniform { a, b },
        })
    }

    pub fn unit_uniform() -> Self {
        DensityModel {
            kind: Kind::Uniform { a: 0.0, b: 1.0 },
        }
    }

    /// Piecewise-constant density: `heights[i]` on `[breakpoints[i], breakpoints[i+1])`.
    pub fn step(breakpoints: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || heights.len() + 1 != breakpoints.len() {
            return Err(invalid(format!(
                "step density needs m+1 breakpoints for m heights, got {} and {}",
                breakpoints.len(),
                heights.len()
            )));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) {
            return Err(invalid("step breakpoints must be finite"));
        }
        if let Some(w) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "step breakpoints must be strictly increasing (index {w})"
            )));
        }
        if let Some(i) = heights.iter().position(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(invalid(format!(
                "step height {i} must be positive, got {}",
                heights[i]
            )));
        }
        let mut cum = Vec::with_capacity(breakpoints.len());
        cum.push(0.0);
        let mut mass = crate::numeric::CompensatedSum::new();
        for (i, c) in heights.iter().enumerate() {
            mass.add(c * (breakpoints[i + 1] - breakpoints[i]));
            cum.push(mass.value());
        }
        let total = mass.value();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(invalid(format!(
                "step density has total mass {total}, expected 1"
            )));
        }
        let last = cum.len() - 1;
        cum[last] = 1.0;
        Ok(DensityModel {
            kind: Kind::Step {
                breakpoints,
                heights,
                cum,
            },
        })
    }

    /// Step density with `heights[i]` on equal-length pieces of `[0, 1]`.
    pub fn step_equal(heights: Vec<f64>) -> Result<Self> {
        let m = heights.len();
        let breakpoints = (0..=m).map(|i| i as f64 / m as f64).collect();
        Self::step(breakpoints, heights)
    }

    /// Normal(mean, sd²) conditioned on `[a, b]`.
    pub fn truncated_normal(mean: f64, sd: f64, a: f64, b: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(invalid(format!("truncated normal needs sd > 0, got {sd}")));
        }
        if !(mean.is_finite() && a.is_finite() && b.is_finite() && a < b) {
            return Err(invalid(format!(
                "truncated normal needs finite mean and a < b, got mean {mean} on [{a}, {b}]"
            )));
        }
        let za = (a - mean) / sd;
        let zb = (b - mean) / sd;
        let cdf_a = std_normal_cdf(za);
        let sf_b = std_normal_sf(zb);
        // mass computed from the side where it does not cancel
        let mass = if za > 0.0 {
            std_normal_sf(za) - sf_b
        } else {
            std_normal_cdf(zb) - cdf_a
        };
        if !(mass > 0.0) {
            return Err(invalid("truncation interval carries no normal mass"));
        }
        Ok(DensityModel {
            kind: Kind::TruncatedNormal {
                mean,
                sd,
                a,
                b,
                cdf_a,
                sf_b,
                mass,
            },
        })
    }

    /// Trapezoidal density on `[0, 1]`; `κ = 0` gives the uniform density.
    pub fn trapezoidal(kappa: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&kappa) {
            return Err(invalid(format!(
                "trapezoidal kappa must lie in [0, 1/2], got {kappa}"
            )));
        }
        if kappa == 0.0 {
            return Ok(Self::unit_uniform());
        }
        Ok(DensityModel {
            kind: Kind::Trapezoidal { kappa },
        })
    }

    pub fn triangle() -> Self {
        DensityModel {
            kind: Kind::Trapezoidal { kappa: 0.5 },
        }
    }

    pub fn spec(&self) -> DensitySpec {
        self.clone().into()
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, Kind::Uniform { .. })
    }

    pub fn is_step(&self) -> bool {
        matches!(self.kind, Kind::Step { .. })
    }

    /// `κ` of a trapezoidal model.
    pub fn trapezoid_kappa(&self) -> Option<f64> {
        match self.kind {
            Kind::Trapezoidal { kappa } => Some(kappa),
            _ => None,
        }
    }

    /// Short human-readable name.
    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Uniform { a, b } => format!("uniform[{a},{b}]"),
            Kind::Step { heights, .. } => format!("step({} pieces)", heights.len()),
            Kind::TruncatedNormal { mean, sd, a, b, .. } => {
                format!("truncated-normal(mean={mean},sd={sd})[{a},{b}]")
            }
            Kind::Trapezoidal { kappa } if *kappa == 0.5 => "triangle".to_string(),
            Kind::Trapezoidal { kappa } => format!("trapezoidal(kappa={kappa})"),
        }
    }

    /// `(A, B)`.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Uniform { a, b } | Kind::TruncatedNormal { a, b, .. } => (*a, *b),
            Kind::Step { breakpoints, .. } => (breakpoints[0], breakpoints[breakpoints.len() - 1]),
            Kind::Trapezoidal { .. } => (0.0, 1.0),
        }
    }

    pub fn width(&self) -> f64 {
        let (a, b) = self.support();
        b - a
    }

    /// Points inside `(A, B)` where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Uniform { .. } | Kind::TruncatedNormal { .. } => Vec::new(),
            Kind::Step { breakpoints, .. } => breakpoints[1..breakpoints.len() - 1].to_vec(),
            Kind::Trapezoidal { kappa } if *kappa == 0.5 => vec![0.5],
            Kind::Trapezoidal { kappa } => vec![*kappa, 1.0 - kappa],
        }
    }

    /// Step pieces `(left, right, height)`; a uniform density is one piece.
    pub fn step_pieces(&self) -> Option<Vec<(f64, f64, f64)>> {
        match &self.kind {
            Kind::Uniform { a, b } => Some(vec![(*a, *b, 1.0 / (b - a))]),
            Kind::Step {
                breakpoints,
                heights,
                ..
            } => Some(
                heights
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| (breakpoints[i], breakpoints[i + 1], c))
                    .collect(),
            ),
            _ => None,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) {
            return 0.0;
        }
        match &self.kind {
            Kind::Uniform { a, b } => 1.0 / (b - a),
            Kind::Step {
                breakpoints,
                heights,
                ..
            } => heights[piece_index(breakpoints, x)],
            Kind::TruncatedNormal { mean, sd, mass, .. } => {
                std_normal_pdf((x - mean) / sd) / (sd * mass)
            }
            Kind::Trapezoidal { kappa } => {
                let k = *kappa;
                if x < k {
                    x / (k * (1.0 - k))
                } else if x <= 1.0 - k {
                    1.0 / (1.0 - k)
                } else {
                    (1.0 - x) / (k * (1.0 - k))
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match &self.kind {
            Kind::Uniform { a, b } => (x - a) / (b - a),
            Kind::Step {
                breakpoints,
                heights,
                cum,
            } => {
                let i = piece_index(breakpoints, x);
                (cum[i] + heights[i] * (x - breakpoints[i])).min(1.0)
            }
            Kind::TruncatedNormal {
                mean,
                sd,
                cdf_a,
                sf_b,
                mass,
                ..
            } => {
                let z = (x - mean) / sd;
                if z > 0.0 {
                    1.0 - (std_normal_sf(z) - sf_b) / mass
                } else {
                    (std_normal_cdf(z) - cdf_a) / mass
                }
                .clamp(0.0, 1.0)
            }
            Kind::Trapezoidal { kappa } => 1.0 - trapezoid_sf(*kappa, x),
        }
    }

    /// Survival function `1 - F(x)`, accurate near the right endpoint.
    pub fn sf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        match &self.kind {
            Kind::Uniform { a, b } => (b - x) / (b - a),
            Kind::Step {
                breakpoints,
                heights,
                cum,
            } => {
                let i = piece_index(breakpoints, x);
                ((1.0 - cum[i + 1]) + heights[i] * (breakpoints[i + 1] - x)).max(0.0)
            }
            Kind::TruncatedNormal {
                mean,
                sd,
                cdf_a,
                sf_b,
                mass,
                ..
            } => {
                let z = (x - mean) / sd;
                if z > 0.0 {
                    (std_normal_sf(z) - sf_b) / mass
                } else {
                    1.0 - (std_normal_cdf(z) - cdf_a) / mass
                }
                .clamp(0.0, 1.0)
            }
            Kind::Trapezoidal { kappa } => trapezoid_sf(*kappa, x),
        }
    }

    /// Inverse CDF for `p` in `[0, 1]`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "quantile level must be in [0, 1], got {p}"
            )));
        }
        Ok(self.quantile_unchecked(p))
    }

    /// Inverse survival function `G(u) = F^{-1}(1 - u)`, accurate for small `u`.
    pub fn inverse_sf(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!(
                "survival level must be in [0, 1], got {u}"
            )));
        }
        let (lo, hi) = self.support();
        if u == 0.0 {
            return Ok(hi);
        }
        if u == 1.0 {
            return Ok(lo);
        }
        Ok(match &self.kind {
            Kind::Uniform { a, b } => b - u * (b - a),
            Kind::Trapezoidal { kappa } => 1.0 - trapezoid_quantile(*kappa, u),
            Kind::Step { .. } => self.quantile_unchecked(1.0 - u),
            Kind::TruncatedNormal { .. } => {
                invert_monotone(|x| u - self.sf(x), |x| self.pdf(x), lo, hi)
            }
        })
    }

    /// [`DensityModel::quantile`] without the range check; `p` is clamped.
    pub fn quantile_unchecked(&self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(p > 0.0) {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        match &self.kind {
            Kind::Uniform { a, b } => a + p * (b - a),
            Kind::Step {
                breakpoints,
                heights,
                cum,
            } => {
                let i = match cum.binary_search_by(|c| c.total_cmp(&p)) {
                    Ok(i) => return breakpoints[i],
                    Err(i) => (i - 1).min(heights.len() - 1),
                };
                (breakpoints[i] + (p - cum[i]) / heights[i])
                    .clamp(breakpoints[i], breakpoints[i + 1])
            }
            Kind::TruncatedNormal { .. } => {
                invert_monotone(|x| self.cdf(x) - p, |x| self.pdf(x), lo, hi)
            }
            Kind::Trapezoidal { kappa } => trapezoid_quantile(*kappa, p),
        }
    }

    /// Essential infimum of the density on its support.
    pub fn p_min(&self) -> f64 {
        match &self.kind {
            Kind::Uniform { a, b } => 1.0 / (b - a),
            Kind::Step { heights, .. } => heights.iter().cloned().fold(f64::INFINITY, f64::min),
            // unimodal: the minimum sits at an endpoint
            Kind::TruncatedNormal { a, b, .. } => self.pdf(*a).min(self.pdf(*b)),
            Kind::Trapezoidal { .. } => 0.0,
        }
    }

    /// Whether `p(A + x) = p(B - x)`.
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            Kind::Uniform { .. } | Kind::Trapezoidal { .. } => true,
            Kind::TruncatedNormal { mean, a, b, .. } => {
                ((mean - a) - (b - mean)).abs() <= 1e-12 * (b - a)
            }
            Kind::Step {
                breakpoints,
                heights,
                ..
            } => {
                let (a, b) = (breakpoints[0], breakpoints[breakpoints.len() - 1]);
                let tol = 1e-12 * (b - a);
                let m = breakpoints.len();
                (0..m).all(|i| ((breakpoints[i] - a) - (b - breakpoints[m - 1 - i])).abs() <= tol)
                    && (0..heights.len()).all(|i| {
                        (heights[i] - heights[heights.len() - 1 - i]).abs() <= 1e-12 * heights[i]
                    })
            }
        }
    }

    /// Extremal type of the upper tail. Densities bounded away from 0 at the
    /// right endpoint have Weibull index 1; the trapezoid vanishes linearly
    /// there, giving index 2.
    pub fn classify_extremal_type(&self) -> ExtremalType {
        match &self.kind {
            Kind::Trapezoidal { .. } => ExtremalType::WeibullIndex(2.0),
            _ if self.p_min() > 0.0 => ExtremalType::WeibullIndex(1.0),
            _ => ExtremalType::Unclassified,
        }
    }

    /// Norming constants at sample size `n`.
    pub fn norming_constants(&self, n: f64) -> Result<NormingConstants> {
        if !(n >= 2.0) {
            return Err(Error::Domain(format!(
                "norming constants need n >= 2, got {n}"
            )));
        }
        let b_n = self.inverse_sf(1.0 / n)?;
        let a_n = self.inverse_sf(1.0 / (n * std::f64::consts::E))? - b_n;
        Ok(NormingConstants {
            a_n,
            b_n,
            upper: self.support().1,
        })
    }
}

/// Index `i` with `breakpoints[i] <= x < breakpoints[i+1]`, clamped to the last piece.
fn piece_index(breakpoints: &[f64], x: f64) -> usize {
    let pieces = breakpoints.len() - 1;
    breakpoints[1..pieces].partition_point(|&t| t <= x)
}

fn trapezoid_sf(k: f64, x: f64) -> f64 {
    let norm = k * (1.0 - k);
    if x <= 0.0 {
        1.0
    } else if x < k {
        1.0 - x * x / (2.0 * norm)
    } else if x <= 1.0 - k {
        (1.0 - k - x) / (1.0 - k) + k / (2.0 * (1.0 - k))
    } else if x < 1.0 {
        (1.0 - x) * (1.0 - x) / (2.0 * norm)
    } else {
        0.0
    }
}

/// Quantile of the trapezoid; by symmetry `1 - quantile(u)` inverts the survival.
fn trapezoid_quantile(k: f64, p: f64) -> f64 {
    let norm = k * (1.0 - k);
    let tri = k / (2.0 * (1.0 - k));
    if p <= tri {
        (2.0 * norm * p).sqrt()
    } else if p <= 1.0 - tri {
        k + (p - tri) * (1.0 - k)
    } else {
        1.0 - (2.0 * norm * (1.0 - p)).sqrt()
    }
}

/// Root of the increasing `g` on `[lo, hi]` by Newton steps that fall back to
/// bisection whenever they leave the current bracket.
fn invert_monotone(g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut x = 0.5 * (lo + hi);
    let width = hi - lo;
    let tol = move |x: f64| {
        (QUANTILE_TOL * width.min(x.abs()))
            .max(4.0 * f64::EPSILON * x.abs())
            .max(f64::MIN_POSITIVE)
    };
    for _ in 0..200 {
        let v = g(x);
        if v == 0.0 {
            return x;
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= tol(x) {
            break;
        }
        let d = dg(x);
        let newton = x - v / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 0.25 * tol(x) {
            return next;
        }
        x = next;
    }
    0.5 * (lo + hi)
}

impl TryFrom<DensitySpec> for DensityModel {
    type Error = Error;

    fn try_from(spec: DensitySpec) -> Result<Self> {
        match spec {
            DensitySpec::Uniform { a, b } => DensityModel::uniform(a, b),
            DensitySpec::Step {
                breakpoints,
                heights,
            } => DensityModel::step(breakpoints, heights),
            DensitySpec::TruncatedNormal { mean, sd, a, b } => {
                DensityModel::truncated_normal(mean, sd, a, b)
            }
            DensitySpec::Trapezoidal { kappa } => DensityModel::trapezoidal(kappa),
            DensitySpec::Triangle => Ok(DensityModel::triangle()),
        }
    }
}

impl From<DensityModel> for DensitySpec {
    fn from(model: DensityModel) -> Self {
        match model.kind {
            Kind::Uniform { a, b } => DensitySpec::Uniform { a, b },
            Kind::Step {
                breakpoints,
                heights,
                ..
            } => DensitySpec::Step {
                breakpoints,
                heights,
            },
            Kind::TruncatedNormal { mean, sd, a, b, .. } => {
                DensitySpec::TruncatedNormal { mean, sd, a, b }
            }
            Kind::Trapezoidal { kappa } => DensitySpec::Trapezoidal { kappa },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn models() -> Vec<DensityModel> {
        vec![
            DensityModel::unit_uniform(),
            DensityModel::uniform(-2.0, 3.0).unwrap(),
            DensityModel::step_equal(vec![2.0 / 3.0, 4.0 / 3.0]).unwrap(),
            DensityModel::step(vec![0.0, 0.2, 0.7, 1.0], vec![0.5, 1.2, 1.0]).unwrap(),
            DensityModel::truncated_normal(0.5, 1.0, 0.0, 1.0).unwrap(),
            DensityModel::truncated_normal(0.5, 0.25, 0.0, 1.0).unwrap(),
            DensityModel::truncated_normal(3.0, 0.5, 0.0, 1.0).unwrap(),
            DensityModel::trapezoidal(0.2).unwrap(),
            DensityModel::triangle(),
        ]
    }

    #[test]
    fn spec_examples() {
        assert_eq!(DensityModel::unit_uniform().cdf(0.3), 0.3);
        let t = DensityModel::triangle();
        for &x in &[0.0, 0.1, 0.25, 0.5] {
            assert!((t.pdf(x) - 4.0 * x).abs() < 1e-15);
        }
        // φ(0)/(Φ(1/2)-Φ(-1/2)) = 1.0418289771969533 (mpmath)
        let tn = DensityModel::truncated_normal(0.5, 1.0, 0.0, 1.0).unwrap();
        assert!((tn.pdf(0.5) - 1.041_828_977_196_953_3).abs() < 1e-14);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(DensityModel::truncated_normal(0.5, 0.0, 0.0, 1.0).is_err());
        assert!(DensityModel::truncated_normal(0.5, -1.0, 0.0, 1.0).is_err());
        assert!(DensityModel::trapezoidal(0.6).is_err());
        assert!(DensityModel::trapezoidal(-0.1).is_err());
        assert!(DensityModel::step(vec![0.0, 0.6, 0.5, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(DensityModel::step(vec![0.0, 0.5, 1.0], vec![1.0, -1.0]).is_err());
        assert!(DensityModel::step(vec![0.0, 0.5, 1.0], vec![1.0, 1.2]).is_err());
        assert!(DensityModel::uniform(1.0, 1.0).is_err());
    }

    #[test]
    fn degenerate_trapezoids() {
        assert!(DensityModel::trapezoidal(0.0).unwrap().is_uniform());
        assert_eq!(
            DensityModel::trapezoidal(0.5).unwrap(),
            DensityModel::triangle()
        );
    }

    #[test]
    fn mass_by_midpoint_rule() {
        for m in models() {
            let (a, b) = m.support();
            let k = 200_000;
            let h = (b - a) / k as f64;
            let s: f64 = (0..k).map(|i| m.pdf(a + (i as f64 + 0.5) * h)).sum::<f64>() * h;
            assert!((s - 1.0).abs() < 1e-8, "{}: {s}", m.label());
        }
    }

    #[test]
    fn cdf_quantile_round_trip() {
        for m in models() {
            let (a, b) = m.support();
            let mut prev = 0.0;
            for i in 1..=100 {
                let x = a + (b - a) * i as f64 / 101.0;
                let p = m.cdf(x);
                assert!(p >= prev);
                prev = p;
                let back = m.quantile(p).unwrap();
                assert!(
                    (back - x).abs() < 1e-9,
                    "{}: {x} -> {p} -> {back}",
                    m.label()
                );
                assert!((m.sf(x) - (1.0 - p)).abs() < 1e-13);
                let g = m.inverse_sf(m.sf(x)).unwrap();
                assert!((g - x).abs() < 1e-9, "{}: {x} -> {g}", m.label());
            }
        }
    }

    #[test]
    fn single_piece_step_is_uniform() {
        let s = DensityModel::step(vec![0.0, 1.0], vec![1.0]).unwrap();
        let u = DensityModel::unit_uniform();
        for i in 0..=50 {
            let x = i as f64 / 50.0;
            assert!((s.pdf(x) - u.pdf(x)).abs() < 1e-12);
            assert!((s.cdf(x) - u.cdf(x)).abs() < 1e-12);
            assert!((s.quantile(x).unwrap() - u.quantile(x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn metadata() {
        let tn = DensityModel::truncated_normal(0.5, 1.0, 0.0, 1.0).unwrap();
        assert!((tn.p_min() - tn.pdf(0.0)).abs() < 1e-15);
        assert!(tn.is_symmetric());
        assert!(!DensityModel::truncated_normal(0.4, 1.0, 0.0, 1.0)
            .unwrap()
            .is_symmetric());
        assert!(DensityModel::step_equal(vec![0.75, 1.5, 0.75])
            .unwrap()
            .is_symmetric());
        assert!(!DensityModel::step_equal(vec![0.5, 1.5])
            .unwrap()
            .is_symmetric());
        assert_eq!(DensityModel::triangle().p_min(), 0.0);
        assert_eq!(
            DensityModel::trapezoidal(0.2).unwrap().breakpoints(),
            vec![0.2, 0.8]
        );
        assert_eq!(
            DensityModel::triangle().classify_extremal_type(),
            ExtremalType::WeibullIndex(2.0)
        );
        assert_eq!(
            DensityModel::unit_uniform().classify_extremal_type(),
            ExtremalType::WeibullIndex(1.0)
        );
        assert_eq!(
            DensityModel::trapezoidal(0.0)
                .unwrap()
                .classify_extremal_type(),
            ExtremalType::WeibullIndex(1.0)
        );
        assert_eq!(tn.classify_extremal_type(), ExtremalType::WeibullIndex(1.0));
    }

    #[test]
    fn norming_constants_uniform_and_triangle() {
        let c = DensityModel::unit_uniform()
            .norming_constants(100.0)
            .unwrap();
        assert!((c.b_n - 0.99).abs() < 1e-15);
        let e = std::f64::consts::E;
        assert!((c.a_n - 0.01 * (1.0 - 1.0 / e)).abs() < 1e-15);
        // survival of the triangle near 1 is 2(1-x)^2, so B - b_n = (1/(2n))^(1/2)
        for &n in &[100.0, 1e4, 1e8] {
            let c = DensityModel::triangle().norming_constants(n).unwrap();
            assert!((c.gap() - (0.5 / n).sqrt()).abs() < 1e-12 * (0.5 / n).sqrt().max(1e-6));
        }
        let tn = DensityModel::truncated_normal(0.5, 1.0, 0.0, 1.0).unwrap();
        let g4 = tn.norming_constants(1e4).unwrap().gap();
        let g5 = tn.norming_constants(1e5).unwrap().gap();
        assert!(g4 > 0.0 && g5 < g4);
        // bounded density at B: gap ≈ 1/(n p(B))
        assert!((g4 * 1e4 * tn.pdf(1.0) - 1.0).abs() < 1e-3);
        assert!(tn.norming_constants(1.5).is_err());
    }

    #[test]
    fn json_round_trip() {
        for m in models() {
            let s = serde_json::to_string(&m).unwrap();
            let back: DensityModel = serde_json::from_str(&s).unwrap();
            assert_eq!(back, m, "{s}");
        }
        let t: DensityModel = serde_json::from_str(r#"{"kind": "triangle"}"#).unwrap();
        assert_eq!(t, DensityModel::triangle());
        let u: DensityModel = serde_json::from_str(r#"{"kind": "uniform"}"#).unwrap();
        assert_eq!(u, DensityModel::unit_uniform());
        assert!(
            serde_json::from_str::<DensityModel>(r#"{"kind": "trapezoidal", "kappa": 2}"#).is_err()
        );
        assert!(serde_json::from_str::<DensityModel>(r#"{"kind": "cauchy"}"#).is_err());
    }
}
