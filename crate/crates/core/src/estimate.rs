//! A CDF of a maximal spacing, evaluated on the spacing scale, with the tag of
//! the method that produced it.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::roots::{brent, grow_bracket, Tolerance};

/// Which estimator produced a CDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactR1,
    GammaTail,
    GumbelClassic,
    GumbelCorrected,
    StepMixture,
    StepGumbel,
    DensityIntegral,
    Barbe,
    LimitProcess,
    MonteCarlo,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::ExactR1,
        Method::GammaTail,
        Method::GumbelClassic,
        Method::GumbelCorrected,
        Method::StepMixture,
        Method::StepGumbel,
        Method::DensityIntegral,
        Method::Barbe,
        Method::LimitProcess,
        Method::MonteCarlo,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::ExactR1 => "exact-r1",
            Method::GammaTail => "gamma-tail",
            Method::GumbelClassic => "gumbel-classic",
            Method::GumbelCorrected => "gumbel-corrected",
            Method::StepMixture => "step-mixture",
            Method::StepGumbel => "step-gumbel",
            Method::DensityIntegral => "density-integral",
            Method::Barbe => "barbe",
            Method::LimitProcess => "limit-process",
            Method::MonteCarlo => "monte-carlo",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::LimitProcess | Method::MonteCarlo)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| {
                let tags: Vec<&str> = Method::ALL.iter().map(|m| m.tag()).collect();
                Error::Config(format!(
                    "unknown method '{s}'; expected one of {}",
                    tags.join(", ")
                ))
            })
    }
}

pub type CdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Probability levels that bound the support hint.
pub const SUPPORT_LOW: f64 = 1e-3;
pub const SUPPORT_HIGH: f64 = 0.999;

/// Absolute tolerance (in probability) of [`quantile`].
pub const QUANTILE_PROB_TOL: f64 = 1e-10;

#[derive(Clone)]
pub struct CdfEstimate {
    method: Method,
    eval: CdfFn,
    support: (f64, f64),
    stderr: Option<CdfFn>,
}

impl fmt::Debug for CdfEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CdfEstimate")
            .field("method", &self.method)
            .field("support", &self.support)
            .field("stochastic", &self.stderr.is_some())
            .finish()
    }
}

impl CdfEstimate {
    /// Wraps a nondecreasing `eval`. `scale` is a rough magnitude of the
    /// distribution (e.g. a typical quantile); the support hint is located
    /// from there by geometric search.
    pub fn new<F>(method: Method, eval: F, scale: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(domain(format!(
                "support scale must be positive, got {scale}"
            )));
        }
        let eval: CdfFn = Arc::new(eval);
        let support = locate_support(&*eval, scale)?;
        Ok(CdfEstimate {
            method,
            eval,
            support,
            stderr: None,
        })
    }

    /// As [`CdfEstimate::new`] with a known support hint.
    pub fn with_support<F>(method: Method, eval: F, support: (f64, f64)) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CdfEstimate {
            method,
            eval: Arc::new(eval),
            support,
            stderr: None,
        }
    }

    pub fn with_stderr<F>(mut self, stderr: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.stderr = Some(Arc::new(stderr));
        self
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn stderr(&self, x: f64) -> Option<f64> {
        self.stderr.as_ref().map(|s| s(x))
    }

    pub fn support_hint(&self) -> (f64, f64) {
        self.support
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        quantile(self, p)
    }

    pub fn as_fn(&self) -> CdfFn {
        Arc::clone(&self.eval)
    }
}

fn locate_support(eval: &dyn Fn(f64) -> f64, scale: f64) -> Result<(f64, f64)> {
    let mut lo = scale;
    while eval(lo) > SUPPORT_LOW {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::Bracket(format!(
                "CDF stays above {SUPPORT_LOW} down to 0 (scale {scale})"
            )));
        }
    }
    let mut hi = scale;
    while eval(hi) < SUPPORT_HIGH {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Bracket(format!(
                "CDF never reaches {SUPPORT_HIGH} (scale {scale})"
            )));
        }
    }
    Ok((lo, hi))
}

/// Inverts `estimate` at `p` by Brent's method on a geometrically grown
/// bracket, to `|eval(q) - p| < 1e-10` (or to the jump location of a step
/// function).
pub fn quantile(estimate: &CdfEstimate, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("quantile level must be in (0, 1), got {p}")));
    }
    let (lo, hi) = estimate.support_hint();
    let lo = if lo > 0.0 { lo } else { hi * 1e-6 };
    let eval = |x: f64| estimate.eval(x);
    let (a, b) = grow_bracket(eval, p, lo, hi.max(lo * 2.0))?;
    let tol = Tolerance {
        xtol: 0.0,
        rtol: 2.0 * f64::EPSILON,
        ftol: QUANTILE_PROB_TOL * 0.5,
        max_iter: 1000,
    };
    brent(|x| estimate.eval(x) - p, a, b, tol)
}

/// Probability half-width of the difference quotient used for quantile
/// standard errors.
pub const SLOPE_HALF_WIDTH: f64 = 0.02;

/// Standard error of a quantile of a stochastic estimate: the CDF standard
/// error at the quantile divided by a difference-quotient density estimate.
/// `None` for deterministic estimates.
pub fn quantile_stderr(estimate: &CdfEstimate, p: f64) -> Result<Option<f64>> {
    let q = quantile(estimate, p)?;
    let Some(se) = estimate.stderr(q) else {
        return Ok(None);
    };
    let (lo, hi) = slope_levels(p);
    let slope = (quantile(estimate, hi)? - quantile(estimate, lo)?) / (hi - lo);
    Ok(Some(se * slope))
}

/// Levels `p ± h` kept inside `(0, 1)`.
pub(crate) fn slope_levels(p: f64) -> (f64, f64) {
    let h = SLOPE_HALF_WIDTH.min(0.5 * p).min(0.5 * (1.0 - p));
    (p - h, p + h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_tags_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
            assert_eq!(
                serde_json::to_string(&m).unwrap(),
                format!("\"{}\"", m.tag())
            );
        }
        assert!("gamma".parse::<Method>().is_err());
    }

    fn exponential() -> CdfEstimate {
        CdfEstimate::new(
            Method::GammaTail,
            |x: f64| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() },
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn support_hint_brackets_mass() {
        let e = exponential();
        let (lo, hi) = e.support_hint();
        assert!(e.eval(lo) <= SUPPORT_LOW, "{lo}");
        assert!(e.eval(hi) >= SUPPORT_HIGH, "{hi}");
    }

    #[test]
    fn quantile_round_trip() {
        let e = exponential();
        for &q0 in &[1e-3, 0.1, 0.7, 2.0, 9.0] {
            let q = e.quantile(e.eval(q0)).unwrap();
            assert!((q - q0).abs() < 1e-9 * q0.max(1.0), "{q0} -> {q}");
        }
        let q = e.quantile(0.5).unwrap();
        assert!((q - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn quantile_rejects_levels_outside_unit_interval() {
        let e = exponential();
        for p in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(e.quantile(p).is_err());
        }
    }

    #[test]
    fn tiny_scale_distribution() {
        let e = CdfEstimate::new(
            Method::GammaTail,
            |x: f64| {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-x * 1e6).exp()
                }
            },
            1.0,
        )
        .unwrap();
        let q = e.quantile(0.5).unwrap();
        assert!((q - 2f64.ln() * 1e-6).abs() < 1e-15);
    }
}
