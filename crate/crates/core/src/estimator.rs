//! Builds a [`CdfEstimate`] of `M_k` for any density and method.

use serde::{Deserialize, Serialize};

use crate::density::{DensityModel, ExtremalType};
use crate::ecdf::Ecdf;
use crate::error::{Error, Result};
use crate::estimate::{CdfEstimate, Method};
use crate::limit::SymmetricLimit;
use crate::nonuniform::{
    barbe_estimate, density_integral_estimate, step_gumbel_estimate, step_mixture_estimate,
    TailFamily,
};
use crate::quadrature::QuadratureSpec;
use crate::simulation::{simulate_kth_max_rspacing, SimulationSpec};
use crate::spacings::{Boundary, SpacingQuery};
use crate::stream::Runner;
use crate::uniform::{
    exact_r1_estimate, gamma_approx_estimate, gumbel_classic_estimate, gumbel_corrected_estimate,
};

/// What to estimate and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorRequest {
    pub model: DensityModel,
    pub n: u64,
    pub r: u32,
    pub k: u64,
    /// `None` picks [`default_method`].
    pub method: Option<Method>,
    /// Spacing convention of the Monte Carlo method.
    pub boundary: Boundary,
    pub replicates: usize,
    pub seed: u64,
    pub quadrature: QuadratureSpec,
}

impl EstimatorRequest {
    pub fn new(model: DensityModel, n: u64, r: u32, k: u64) -> Self {
        EstimatorRequest {
            model,
            n,
            r,
            k,
            method: None,
            boundary: Boundary::WithEnds,
            replicates: 10_000,
            seed: 0,
            quadrature: QuadratureSpec::default(),
        }
    }

    pub fn method(&self) -> Method {
        self.method
            .unwrap_or_else(|| default_method(&self.model, self.k))
    }
}

fn symmetric_weibull(model: &DensityModel) -> bool {
    model.is_symmetric()
        && matches!(model.classify_extremal_type(), ExtremalType::WeibullIndex(a) if a > 1.0)
}

/// For `k = 1`: gamma tail on uniform densities, step mixture on step
/// densities, the limit process where the density vanishes at a symmetric
/// Weibull-type end, the density integral otherwise. For `k > 1`: the limit
/// process where it applies, else Monte Carlo.
pub fn default_method(model: &DensityModel, k: u64) -> Method {
    if k > 1 {
        return if symmetric_weibull(model) {
            Method::LimitProcess
        } else {
            Method::MonteCarlo
        };
    }
    if model.is_uniform() {
        Method::GammaTail
    } else if model.is_step() {
        Method::StepMixture
    } else if !(model.p_min() > 0.0) && symmetric_weibull(model) {
        Method::LimitProcess
    } else {
        Method::DensityIntegral
    }
}

/// `P(M <= x)` for a uniform density of width `w` from the unit-interval
/// estimate.
fn rescaled(unit: CdfEstimate, w: f64) -> CdfEstimate {
    if w == 1.0 {
        return unit;
    }
    let (lo, hi) = unit.support_hint();
    let method = unit.method();
    CdfEstimate::with_support(method, move |x| unit.eval(x / w), (lo * w, hi * w))
}

pub fn build_estimate(req: &EstimatorRequest, runner: &Runner) -> Result<CdfEstimate> {
    let query = SpacingQuery::new(req.n, req.r, req.k)?;
    let method = req.method();
    let model = &req.model;
    let n = req.n as f64;
    let r = req.r;
    if req.k > 1 && !matches!(method, Method::LimitProcess | Method::MonteCarlo) {
        return Err(Error::NotApplicable(format!(
            "method {method} only answers k = 1; use limit-process or monte-carlo"
        )));
    }
    let uniform_only = || {
        if model.is_uniform() {
            Ok(model.width())
        } else {
            Err(Error::NotApplicable(format!(
                "method {method} needs a uniform density, got {}",
                model.label()
            )))
        }
    };
    match method {
        Method::ExactR1 => {
            let w = uniform_only()?;
            if r != 1 {
                return Err(Error::NotApplicable(
                    "the exact formula is r = 1 only".into(),
                ));
            }
            Ok(rescaled(exact_r1_estimate(req.n)?, w))
        }
        Method::GammaTail => Ok(rescaled(gamma_approx_estimate(n, r)?, uniform_only()?)),
        Method::GumbelClassic => Ok(rescaled(gumbel_classic_estimate(n, r)?, uniform_only()?)),
        Method::GumbelCorrected => Ok(rescaled(gumbel_corrected_estimate(n, r)?, uniform_only()?)),
        Method::StepMixture => step_mixture_estimate(model, n, TailFamily::asymptotic(r)?),
        Method::StepGumbel => step_gumbel_estimate(model, n, r),
        Method::DensityIntegral => {
            density_integral_estimate(model, n, TailFamily::asymptotic(r)?, req.quadrature, false)
        }
        Method::Barbe => {
            if r != 1 {
                return Err(Error::NotApplicable(
                    "the exponential-integral form is r = 1 only".into(),
                ));
            }
            barbe_estimate(model, n, req.quadrature, false)
        }
        Method::LimitProcess => Ok(SymmetricLimit::build(
            model,
            req.n,
            r,
            req.k as usize,
            req.replicates,
            req.seed,
            runner,
        )?
        .to_estimate()),
        Method::MonteCarlo => {
            let spec =
                SimulationSpec::new(query, model.clone(), req.boundary, req.replicates, req.seed)?;
            let ecdf = Ecdf::from_sorted(simulate_kth_max_rspacing(&spec, runner)?)?;
            Ok(ecdf.to_estimate(Method::MonteCarlo))
        }
    }
}
