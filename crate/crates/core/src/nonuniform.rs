//! Approximations of `P(n M < x)` for the maximal r-spacing (boundary
//! spacings included) of a sample from a non-uniform density `p` on `[A, B]`:
//!
//! * step densities: `exp(-n Σ θ_i f(c_i x))`, `θ_i` the mass of piece `i`;
//! * the Gumbel limit of the step case, driven by the smallest height;
//! * general densities bounded away from 0: `exp(-n ∫ f(x p(u)) p(u) du)`;
//! * for `r = 1`: `exp(-n ∫ e^{-x p(u)} p(u) du)`.
//!
//! `f` is a per-window exceedance function. [`TailFamily::Asymptotic`] uses
//! the Γ(r, 1) tail `f_r`. [`TailFamily::Calibrated`] uses
//! `-ln F_n(y) / n`, where `F_n` is the simulated CDF of `n M` for a uniform
//! sample of the same size. The calibrated family carries the finite-`n`
//! correction that `f_r` lacks and is markedly more accurate for `r > 1`.

use std::sync::Arc;

use crate::density::DensityModel;
use crate::ecdf::Ecdf;
use crate::error::{Error, Result};
use crate::estimate::{CdfEstimate, Method};
use crate::quadrature::QuadratureSpec;
use crate::simulation::{simulate_kth_max_rspacing, SimulationSpec};
use crate::spacings::{gamma_tail_unchecked, Boundary, SpacingQuery};
use crate::stream::Runner;
use crate::uniform::gumbel_b;

/// Step pieces with `n θ_i` below this trigger a warning.
pub const MIN_POINTS_PER_PIECE: f64 = 10.0;

/// Simulated distribution of `n M` for `n` uniform points on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformCalibration {
    n: u64,
    r: u32,
    // sorted n * M
    scaled: Vec<f64>,
}

impl UniformCalibration {
    /// Runs `replicates` uniform simulations of size `n`.
    pub fn simulate(
        n: u64,
        r: u32,
        replicates: usize,
        master_seed: u64,
        runner: &Runner,
    ) -> Result<Self> {
        let spec = SimulationSpec::new(
            SpacingQuery::max(n, r)?,
            DensityModel::unit_uniform(),
            Boundary::WithEnds,
            replicates,
            master_seed,
        )?;
        let values = simulate_kth_max_rspacing(&spec, runner)?;
        Ok(Self::from_sorted_spacings(n, r, &values))
    }

    /// From sorted replicate spacings on the unit scale.
    pub fn from_sorted_spacings(n: u64, r: u32, spacings: &[f64]) -> Self {
        let nf = n as f64;
        UniformCalibration {
            n,
            r,
            scaled: spacings.iter().map(|s| s * nf).collect(),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn replicates(&self) -> usize {
        self.scaled.len()
    }

    pub fn ecdf(&self) -> Ecdf {
        Ecdf::from_sorted(self.scaled.clone()).expect("calibration values are sorted and non-empty")
    }

    /// Continuous version of the ECDF of `n M`: linear between order
    /// statistics placed at plotting positions `(i + 1/2)/R`, 0 below the
    /// smallest and 1 above the largest.
    pub fn cdf(&self, y: f64) -> f64 {
        let v = &self.scaled;
        let r = v.len() as f64;
        if y < v[0] {
            return 0.0;
        }
        if y >= v[v.len() - 1] {
            return 1.0;
        }
        let i = v.partition_point(|&t| t <= y) - 1;
        let (x0, x1) = (v[i], v[i + 1]);
        let (p0, p1) = ((i as f64 + 0.5) / r, (i as f64 + 1.5) / r);
        if x1 == x0 {
            p1
        } else {
            p0 + (p1 - p0) * (y - x0) / (x1 - x0)
        }
    }
}

/// The per-window exceedance function `f` of the approximations.
#[derive(Debug, Clone)]
pub enum TailFamily {
    Asymptotic { r: u32 },
    Calibrated(Arc<UniformCalibration>),
}

impl TailFamily {
    pub fn asymptotic(r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::Domain("spacing order r must be >= 1".into()));
        }
        Ok(TailFamily::Asymptotic { r })
    }

    pub fn r(&self) -> u32 {
        match self {
            TailFamily::Asymptotic { r } => *r,
            TailFamily::Calibrated(c) => c.r,
        }
    }

    /// Returns an error if the family cannot be used at sample size `n`.
    fn check_n(&self, n: f64) -> Result<()> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain(format!(
                "sample size must be positive, got {n}"
            )));
        }
        if let TailFamily::Calibrated(c) = self {
            if c.n as f64 != n {
                return Err(Error::InvalidQuery(format!(
                    "calibration was simulated at n = {}, not n = {n}",
                    c.n
                )));
            }
        }
        Ok(())
    }

    /// `n f(y)`; `+∞` where the calibrated CDF vanishes.
    fn n_times(&self, n: f64, y: f64) -> f64 {
        match self {
            TailFamily::Asymptotic { r } => n * gamma_tail_unchecked(*r, y.max(0.0)),
            TailFamily::Calibrated(c) => -c.cdf(y).ln(),
        }
    }
}

/// Masses and heights of a step density.
#[derive(Debug, Clone, PartialEq)]
pub struct StepApproxPartition {
    pub thetas: Vec<f64>,
    pub heights: Vec<f64>,
    /// `floor(n θ_i)`, the expected number of points per piece.
    pub counts: Vec<u64>,
}

impl StepApproxPartition {
    pub fn new(model: &DensityModel, n: f64) -> Result<Self> {
        let pieces = model.step_pieces().ok_or_else(|| {
            Error::InvalidModel(format!("{} is not a step density", model.label()))
        })?;
        let thetas: Vec<f64> = pieces.iter().map(|(a, b, c)| c * (b - a)).collect();
        let heights = pieces.iter().map(|p| p.2).collect();
        let counts = thetas.iter().map(|t| (n * t).floor() as u64).collect();
        Ok(StepApproxPartition {
            thetas,
            heights,
            counts,
        })
    }

    pub fn c_min(&self) -> f64 {
        self.heights.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Total mass of the pieces at the minimal height.
    pub fn theta_star(&self) -> f64 {
        let c_min = self.c_min();
        self.heights
            .iter()
            .zip(&self.thetas)
            .filter(|(c, _)| (**c - c_min).abs() <= 1e-12 * c_min)
            .map(|(_, t)| t)
            .sum()
    }

    fn warn_if_sparse(&self, n: f64) {
        if let Some(t) = self.thetas.iter().find(|&&t| n * t < MIN_POINTS_PER_PIECE) {
            log::warn!(
                "step piece with mass {t} receives about {:.1} points; the approximation assumes many",
                n * t
            );
        }
    }
}

/// `exp(-n Σ θ_i f_r(c_i x))` for a step (or uniform) density.
pub fn cdf_step_mixture(model: &DensityModel, n: f64, r: u32, x_scaled: f64) -> Result<f64> {
    cdf_step_mixture_with(model, n, &TailFamily::asymptotic(r)?, x_scaled)
}

pub fn cdf_step_mixture_with(
    model: &DensityModel,
    n: f64,
    family: &TailFamily,
    x_scaled: f64,
) -> Result<f64> {
    family.check_n(n)?;
    let part = StepApproxPartition::new(model, n)?;
    part.warn_if_sparse(n);
    Ok(step_mixture_eval(&part, n, family, x_scaled))
}

fn step_mixture_eval(part: &StepApproxPartition, n: f64, family: &TailFamily, x: f64) -> f64 {
    let e: f64 = part
        .thetas
        .iter()
        .zip(&part.heights)
        .map(|(t, c)| t * family.n_times(n, c * x))
        .sum();
    (-e).exp()
}

/// Gumbel limit of the step case on the spacing scale:
/// `exp(-exp(-(n c_min s - b_n^(r) - ln θ*)))`.
pub fn cdf_step_gumbel_limit(model: &DensityModel, n: f64, r: u32, s: f64) -> Result<f64> {
    let part = StepApproxPartition::new(model, n)?;
    let b = gumbel_b(n, r)?;
    let t = n * part.c_min() * s - b - part.theta_star().ln();
    Ok((-(-t).exp()).exp())
}

fn check_applicable(model: &DensityModel) -> Result<()> {
    if !(model.p_min() > 0.0) {
        return Err(Error::NotApplicable(format!(
            "{} is not bounded away from 0 on its support; the density-integral \
             approximation does not apply, use the limit-process estimator instead",
            model.label()
        )));
    }
    Ok(())
}

/// `∫_A^B n f(x p(u)) p(u) du` with no applicability check.
pub fn density_integral_exponent(
    model: &DensityModel,
    n: f64,
    family: &TailFamily,
    x_scaled: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    family.check_n(n)?;
    let (a, b) = model.support();
    quad.integrate(
        |u| {
            let p = model.pdf(u);
            if p == 0.0 {
                0.0
            } else {
                family.n_times(n, x_scaled * p) * p
            }
        },
        a,
        b,
        &model.breakpoints(),
    )
}

/// `exp(-n ∫ f_r(x p(u)) p(u) du)`; refuses densities with `p_min = 0`.
pub fn cdf_density_integral(
    model: &DensityModel,
    n: f64,
    r: u32,
    x_scaled: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    cdf_density_integral_with(model, n, &TailFamily::asymptotic(r)?, x_scaled, quad)
}

pub fn cdf_density_integral_with(
    model: &DensityModel,
    n: f64,
    family: &TailFamily,
    x_scaled: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_applicable(model)?;
    Ok((-density_integral_exponent(model, n, family, x_scaled, quad)?).exp())
}

/// `exp(-n ∫ e^{-x p(u)} p(u) du)`, the `r = 1` form.
pub fn cdf_barbe_r1(
    model: &DensityModel,
    n: f64,
    x_scaled: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_applicable(model)?;
    Ok((-barbe_exponent(model, n, x_scaled, quad)?).exp())
}

fn barbe_exponent(model: &DensityModel, n: f64, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Domain(format!(
            "sample size must be positive, got {n}"
        )));
    }
    let (a, b) = model.support();
    quad.integrate(
        |u| {
            let p = model.pdf(u);
            n * (-x * p).exp() * p
        },
        a,
        b,
        &model.breakpoints(),
    )
}

fn scale_hint(model: &DensityModel, n: f64, r: u32) -> f64 {
    let ln_n = n.max(3.0).ln();
    let p = model.p_min().max(1e-3 / model.width());
    (ln_n + f64::from(r - 1) * ln_n.ln().max(0.0)).max(1.0) / (n * p)
}

/// Step-mixture approximation as a CDF of `M`.
pub fn step_mixture_estimate(
    model: &DensityModel,
    n: f64,
    family: TailFamily,
) -> Result<CdfEstimate> {
    family.check_n(n)?;
    let part = StepApproxPartition::new(model, n)?;
    part.warn_if_sparse(n);
    let hint = scale_hint(model, n, family.r());
    CdfEstimate::new(
        Method::StepMixture,
        move |s: f64| {
            if s <= 0.0 {
                0.0
            } else {
                step_mixture_eval(&part, n, &family, n * s)
            }
        },
        hint,
    )
}

/// Gumbel limit of the step case as a CDF of `M`.
pub fn step_gumbel_estimate(model: &DensityModel, n: f64, r: u32) -> Result<CdfEstimate> {
    let part = StepApproxPartition::new(model, n)?;
    let b = gumbel_b(n, r)?;
    let c_min = part.c_min();
    let ln_theta = part.theta_star().ln();
    CdfEstimate::new(
        Method::StepGumbel,
        move |s: f64| (-(-(n * c_min * s - b - ln_theta)).exp()).exp(),
        scale_hint(model, n, r),
    )
}

/// Density-integral approximation as a CDF of `M`. With `force`, densities
/// with `p_min = 0` are evaluated anyway.
pub fn density_integral_estimate(
    model: &DensityModel,
    n: f64,
    family: TailFamily,
    quad: QuadratureSpec,
    force: bool,
) -> Result<CdfEstimate> {
    if !force {
        check_applicable(model)?;
    }
    family.check_n(n)?;
    quad.validate()?;
    let m = model.clone();
    let hint = scale_hint(model, n, family.r());
    let calibration = match &family {
        TailFamily::Calibrated(c) => Some((Arc::clone(c), m.clone(), quad)),
        TailFamily::Asymptotic { .. } => None,
    };
    let est = CdfEstimate::new(
        Method::DensityIntegral,
        move |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            density_integral_exponent(&m, n, &family, n * s, &quad).map_or(f64::NAN, |e| (-e).exp())
        },
        hint,
    )?;
    Ok(match calibration {
        Some((c, m, quad)) => {
            let value = est.as_fn();
            est.with_stderr(move |s: f64| calibrated_stderr_bound(&c, &m, &quad, n * s, value(s)))
        }
        None => est,
    })
}

/// Conservative standard error of the calibrated approximation. The log of
/// the CDF is a `p`-weighted average of `ln F_n`; treating the calibration
/// errors at different arguments as fully correlated bounds its standard
/// error by the average of the pointwise ones, `sqrt((1 - F) / (F R))`.
fn calibrated_stderr_bound(
    c: &UniformCalibration,
    model: &DensityModel,
    quad: &QuadratureSpec,
    x: f64,
    value: f64,
) -> f64 {
    if !(value > 0.0) || x <= 0.0 {
        return 0.0;
    }
    let reps = c.replicates() as f64;
    let (a, b) = model.support();
    let ln_se = quad
        .integrate(
            |u| {
                let p = model.pdf(u);
                let f = c.cdf(x * p);
                if p == 0.0 || f >= 1.0 {
                    0.0
                } else {
                    ((1.0 - f) / (f * reps)).sqrt() * p
                }
            },
            a,
            b,
            &model.breakpoints(),
        )
        .unwrap_or(f64::INFINITY);
    value * ln_se
}

/// The `r = 1` exponential-integral form as a CDF of `M`.
pub fn barbe_estimate(
    model: &DensityModel,
    n: f64,
    quad: QuadratureSpec,
    force: bool,
) -> Result<CdfEstimate> {
    if !force {
        check_applicable(model)?;
    }
    quad.validate()?;
    let m = model.clone();
    CdfEstimate::new(
        Method::Barbe,
        move |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            barbe_exponent(&m, n, n * s, &quad).map_or(f64::NAN, |e| (-e).exp())
        },
        scale_hint(model, n, 1),
    )
}
