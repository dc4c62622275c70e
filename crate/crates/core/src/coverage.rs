//! Sequencing coverage planning.
//!
//! A genome of `N` bases is normalized to `[0, 1]`. Reads start at i.i.d.
//! locations drawn from a location density; two reads can be assembled when
//! they overlap by at least `I` bases, so each read contributes an effective
//! segment of length `l = (L - I)/N`. The genome is r-fold covered iff the
//! maximal r-spacing of the start points is below `l`.
//!
//! Random read lengths come in two couplings:
//!
//! * [`LengthCoupling::PerRead`]: every read draws its own length. Under the
//!   Poisson approximation behind all the estimators here, the number of reads
//!   over a point is Poisson with mean `n E[l] p(t)`, so the coverage
//!   probability depends on the lengths only through `E[l]`.
//! * [`LengthCoupling::Shared`]: one length `Y` shared by all reads;
//!   `P(M < Y) = ∫ P(M < s) dF_Y(s)`, integrated over the probability domain
//!   with 128 Gauss–Legendre nodes.

use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::ecdf::Ecdf;
use crate::error::{Error, Result};
use crate::estimate::Method;
use crate::limit::{
    half_sample_scale, LengthDistribution, LimitLawEstimate, LimitLawSpec, LimitType,
    MIN_TRUNCATION,
};
use crate::nonuniform::{cdf_barbe_r1, cdf_density_integral, StepApproxPartition};
use crate::quadrature::QuadratureSpec;
use crate::simulation::{simulate_kth_max_rspacing, SimulationSpec};
use crate::spacings::{gamma_tail_unchecked, Boundary, SpacingQuery};
use crate::stream::Runner;

/// Largest read count tried by [`required_reads`].
pub const MAX_READS: u64 = 1 << 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadLength {
    Fixed {
        length: f64,
    },
    /// Normal read length, truncated to `(I, N)` and renormalized.
    Normal {
        mean: f64,
        sd: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthCoupling {
    #[default]
    PerRead,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadModel {
    pub genome_length: f64,
    pub overlap: f64,
    pub read: ReadLength,
    #[serde(default)]
    pub coupling: LengthCoupling,
}

impl ReadModel {
    pub fn fixed(genome_length: f64, overlap: f64, length: f64) -> Self {
        ReadModel {
            genome_length,
            overlap,
            read: ReadLength::Fixed { length },
            coupling: LengthCoupling::PerRead,
        }
    }

    pub fn normal(
        genome_length: f64,
        overlap: f64,
        mean: f64,
        sd: f64,
        coupling: LengthCoupling,
    ) -> Self {
        ReadModel {
            genome_length,
            overlap,
            read: ReadLength::Normal { mean, sd },
            coupling,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, i) = (self.genome_length, self.overlap);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Config(format!(
                "genome length must be positive, got {n}"
            )));
        }
        if !(i >= 0.0 && i.is_finite()) {
            return Err(Error::Config(format!("overlap must be >= 0, got {i}")));
        }
        match self.read {
            ReadLength::Fixed { length } => {
                if !(length > i && length < n) {
                    return Err(Error::Config(format!(
                        "read length must satisfy overlap < L < genome length, got L = {length}"
                    )));
                }
            }
            ReadLength::Normal { .. } => {
                self.length_distribution_bp()?;
            }
        }
        Ok(())
    }

    /// Read-length density in base pairs, truncated to `(I, N)`.
    fn length_distribution_bp(&self) -> Result<Option<DensityModel>> {
        match self.read {
            ReadLength::Fixed { .. } => Ok(None),
            ReadLength::Normal { mean, sd } => Ok(Some(
                DensityModel::truncated_normal(mean, sd, self.overlap, self.genome_length)
                    .map_err(|e| Error::Config(format!("read length distribution: {e}")))?,
            )),
        }
    }

    /// Distribution of the effective segment length `(L - I)/N`.
    pub fn segment_distribution(&self) -> Result<LengthDistribution> {
        self.validate()?;
        let (n, i) = (self.genome_length, self.overlap);
        match self.length_distribution_bp()? {
            None => match self.read {
                ReadLength::Fixed { length } => LengthDistribution::fixed((length - i) / n),
                ReadLength::Normal { .. } => unreachable!("normal lengths have a density"),
            },
            Some(bp) => {
                let (lo, hi) = bp.support();
                // an affine image of a truncated normal is a truncated normal
                let ReadLength::Normal { mean, sd } = self.read else {
                    unreachable!("only normal lengths have a density")
                };
                let y = DensityModel::truncated_normal(
                    (mean - i) / n,
                    sd / n,
                    (lo - i) / n,
                    (hi - i) / n,
                )?;
                LengthDistribution::distributed(y)
            }
        }
    }

    /// `E[L]` in base pairs (of the truncated distribution).
    pub fn mean_length(&self) -> Result<f64> {
        let seg = self.segment_distribution()?;
        Ok(seg.mean() * self.genome_length + self.overlap)
    }
}

/// Everything needed to answer "how many reads?".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePlan {
    #[serde(flatten)]
    pub reads: ReadModel,
    pub r: u32,
    pub target_prob: f64,
    pub location_density: DensityModel,
    /// `None` selects by location density.
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_replicates() -> usize {
    crate::limit::DEFAULT_REPLICATES
}

impl CoveragePlan {
    pub fn new(reads: ReadModel, r: u32, target_prob: f64, location_density: DensityModel) -> Self {
        CoveragePlan {
            reads,
            r,
            target_prob,
            location_density,
            method: None,
            replicates: default_replicates(),
            seed: 0,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = Some(method);
        self
    }

    /// Uniform: gamma tail; step and truncated normal: density integral;
    /// trapezoids: limit process.
    pub fn resolved_method(&self) -> Method {
        self.method.unwrap_or_else(|| {
            let m = &self.location_density;
            if m.is_uniform() {
                Method::GammaTail
            } else if m.trapezoid_kappa().is_some() {
                Method::LimitProcess
            } else {
                Method::DensityIntegral
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.reads.validate()?;
        if self.r == 0 {
            return Err(Error::Config("coverage order r must be >= 1".into()));
        }
        if !(self.target_prob > 0.0 && self.target_prob < 1.0) {
            return Err(Error::Config(format!(
                "target probability must be in (0, 1), got {}",
                self.target_prob
            )));
        }
        let model = &self.location_density;
        match self.resolved_method() {
            Method::GammaTail | Method::GumbelClassic | Method::GumbelCorrected
                if !model.is_uniform() =>
            {
                Err(Error::NotApplicable(format!(
                    "uniform approximation used with {}",
                    model.label()
                )))
            }
            Method::StepMixture | Method::StepGumbel if model.step_pieces().is_none() => Err(
                Error::NotApplicable(format!("step approximation used with {}", model.label())),
            ),
            Method::DensityIntegral | Method::Barbe if !(model.p_min() > 0.0) => {
                Err(Error::NotApplicable(format!(
                    "{} vanishes on its support; use the limit-process method",
                    model.label()
                )))
            }
            Method::Barbe if self.r != 1 => Err(Error::NotApplicable(
                "the exponential-integral form is r = 1 only".into(),
            )),
            Method::ExactR1 if !(self.r == 1 && model == &DensityModel::unit_uniform()) => {
                Err(Error::NotApplicable(
                    "the exact formula covers r = 1 on the unit uniform density only".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Result of [`required_reads`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadRequirement {
    pub n_min: u64,
    /// `n_min E[L] / N` rounded to the nearest integer.
    pub fold: u64,
    pub fold_exact: f64,
    pub prob_at_n_min: f64,
}

enum Engine {
    Gamma { width: f64 },
    GumbelClassic { width: f64 },
    StepMixture { part: StepApproxPartition },
    StepGumbel,
    DensityIntegral { quad: QuadratureSpec },
    Barbe { quad: QuadratureSpec },
    Exact,
    Limit { limit: LimitLawEstimate },
    MonteCarlo,
}

/// A plan with its estimator prepared once (limit-process simulations are
/// reused across read counts).
pub struct CoverageEvaluator {
    plan: CoveragePlan,
    engine: Engine,
    segment: LengthDistribution,
    k: usize,
    runner: Runner,
}

impl CoverageEvaluator {
    /// `k` is the number of uncovered regions tolerated plus one (`k = 1`:
    /// full coverage).
    pub fn new(plan: &CoveragePlan, k: usize, runner: &Runner) -> Result<Self> {
        plan.validate()?;
        if k == 0 {
            return Err(Error::Domain("k must be >= 1".into()));
        }
        let method = plan.resolved_method();
        let model = &plan.location_density;
        let quad = QuadratureSpec::default();
        if k > 1 && !matches!(method, Method::LimitProcess | Method::MonteCarlo) {
            return Err(Error::NotApplicable(format!(
                "method {method} only answers k = 1; use limit-process or monte-carlo"
            )));
        }
        let engine = match method {
            Method::GammaTail | Method::GumbelCorrected => Engine::Gamma {
                width: model.width(),
            },
            Method::GumbelClassic => Engine::GumbelClassic {
                width: model.width(),
            },
            Method::StepMixture => Engine::StepMixture {
                part: StepApproxPartition::new(model, 1.0)?,
            },
            Method::StepGumbel => Engine::StepGumbel,
            Method::DensityIntegral => Engine::DensityIntegral { quad },
            Method::Barbe => Engine::Barbe { quad },
            Method::ExactR1 => Engine::Exact,
            Method::LimitProcess => {
                let a = match model.classify_extremal_type() {
                    crate::density::ExtremalType::WeibullIndex(a) if a > 1.0 && model.is_symmetric() => a,
                    t => {
                        return Err(Error::NotApplicable(format!(
                            "limit process needs a symmetric density with Weibull index above 1, {} has {t:?}",
                            model.label()
                        )))
                    }
                };
                let spec = LimitLawSpec {
                    law: LimitType::Weibull { a },
                    k,
                    r: plan.r,
                    truncation: MIN_TRUNCATION,
                    replicates: plan.replicates,
                    master_seed: plan.seed,
                };
                Engine::Limit {
                    limit: LimitLawEstimate::build(&spec, runner)?,
                }
            }
            Method::MonteCarlo => Engine::MonteCarlo,
        };
        Ok(CoverageEvaluator {
            plan: plan.clone(),
            engine,
            segment: plan.reads.segment_distribution()?,
            k,
            runner: *runner,
        })
    }

    /// `P(M_k < s)` for `n` reads and a fixed segment length `s`.
    fn prob_at(&self, n: u64, s: f64, mc: Option<&Ecdf>) -> Result<f64> {
        let r = self.plan.r;
        if n < u64::from(r) {
            return Ok(0.0);
        }
        let nf = n as f64;
        let model = &self.plan.location_density;
        Ok(match &self.engine {
            Engine::Gamma { width } => (-nf * gamma_tail_unchecked(r, nf * s / width)).exp(),
            Engine::GumbelClassic { width } => {
                crate::uniform::cdf_gumbel_classic(nf.max(3.0), r, nf * s / width)?
            }
            Engine::StepMixture { part } => {
                let e: f64 = part
                    .thetas
                    .iter()
                    .zip(&part.heights)
                    .map(|(t, c)| t * gamma_tail_unchecked(r, c * nf * s))
                    .sum();
                (-nf * e).exp()
            }
            Engine::StepGumbel => {
                crate::nonuniform::cdf_step_gumbel_limit(model, nf.max(3.0), r, s)?
            }
            Engine::DensityIntegral { quad } => cdf_density_integral(model, nf, r, nf * s, quad)?,
            Engine::Barbe { quad } => cdf_barbe_r1(model, nf, nf * s, quad)?,
            Engine::Exact => crate::exact::exact_max_spacing_cdf_r1(n, s.min(1.0))?,
            Engine::Limit { limit } => {
                let scale = half_sample_scale(model, n)?;
                limit.two_sided(s / scale).0
            }
            Engine::MonteCarlo => mc.expect("monte carlo sample prepared").eval(s),
        })
    }

    fn monte_carlo(&self, n: u64) -> Result<Option<Ecdf>> {
        if !matches!(self.engine, Engine::MonteCarlo) || n < u64::from(self.plan.r) {
            return Ok(None);
        }
        let spec = SimulationSpec::new(
            SpacingQuery::new(n, self.plan.r, self.k as u64)?,
            self.plan.location_density.clone(),
            Boundary::WithEnds,
            self.plan.replicates,
            self.plan.seed,
        )?;
        Ok(Some(Ecdf::from_sorted(simulate_kth_max_rspacing(
            &spec,
            &self.runner,
        )?)?))
    }

    /// Probability of fewer than `k` regions lacking r-fold coverage.
    pub fn probability(&self, n: u64) -> Result<f64> {
        let mc = self.monte_carlo(n)?;
        let mc = mc.as_ref();
        match (&self.segment, self.plan.reads.coupling) {
            (LengthDistribution::Fixed { value }, _) => self.prob_at(n, *value, mc),
            (seg, LengthCoupling::PerRead) => self.prob_at(n, seg.mean(), mc),
            (seg, LengthCoupling::Shared) => {
                let mut err = None;
                let v = seg.expect(|s| {
                    self.prob_at(n, s, mc).unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        f64::NAN
                    })
                });
                match err {
                    Some(e) => Err(e),
                    None => Ok(v),
                }
            }
        }
    }

    /// Smallest `n` reaching the target probability.
    pub fn required_reads(&self) -> Result<ReadRequirement> {
        let target = self.plan.target_prob;
        let r = u64::from(self.plan.r);
        let p_lo = self.probability(r)?;
        let n_min = if p_lo >= target {
            r
        } else {
            let mut lo = r;
            let mut hi = (2 * r).max(2);
            loop {
                if self.probability(hi)? >= target {
                    break;
                }
                lo = hi;
                hi = hi
                    .checked_mul(2)
                    .filter(|&h| h <= MAX_READS)
                    .ok_or_else(|| {
                        Error::NoConvergence(format!(
                            "target {target} not reached with {MAX_READS} reads"
                        ))
                    })?;
            }
            // invariant: P(lo) < target <= P(hi)
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if self.probability(mid)? >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let mean_len = self.plan.reads.mean_length()?;
        let fold_exact = n_min as f64 * mean_len / self.plan.reads.genome_length;
        Ok(ReadRequirement {
            n_min,
            fold: fold_exact.round() as u64,
            fold_exact,
            prob_at_n_min: self.probability(n_min)?,
        })
    }
}

/// Probability of full r-fold coverage with `n` reads.
pub fn coverage_probability(plan: &CoveragePlan, n: u64, runner: &Runner) -> Result<f64> {
    CoverageEvaluator::new(plan, 1, runner)?.probability(n)
}

/// Smallest read count reaching `plan.target_prob`, and the fold coverage.
pub fn required_reads(plan: &CoveragePlan, runner: &Runner) -> Result<ReadRequirement> {
    CoverageEvaluator::new(plan, 1, runner)?.required_reads()
}

/// Probability of fewer than `k` regions without r-fold coverage.
pub fn uncovered_regions_probability(
    plan: &CoveragePlan,
    n: u64,
    k: usize,
    runner: &Runner,
) -> Result<f64> {
    CoverageEvaluator::new(plan, k, runner)?.probability(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HUMAN: f64 = 3.2e9;

    fn uniform_plan(length: f64, r: u32) -> CoveragePlan {
        CoveragePlan::new(
            ReadModel::fixed(HUMAN, 50.0, length),
            r,
            0.95,
            DensityModel::unit_uniform(),
        )
    }

    #[test]
    fn reference_fold_values() {
        let runner = Runner::default();
        assert_eq!(
            required_reads(&uniform_plan(100.0, 1), &runner)
                .unwrap()
                .fold,
            48
        );
        assert_eq!(
            required_reads(&uniform_plan(300.0, 5), &runner)
                .unwrap()
                .fold,
            41
        );
    }

    #[test]
    fn minimality() {
        let runner = Runner::default();
        let plan = uniform_plan(200.0, 2);
        let req = required_reads(&plan, &runner).unwrap();
        assert!(coverage_probability(&plan, req.n_min, &runner).unwrap() >= 0.95);
        assert!(coverage_probability(&plan, req.n_min - 1, &runner).unwrap() < 0.95);
        assert_eq!(
            req.prob_at_n_min,
            coverage_probability(&plan, req.n_min, &runner).unwrap()
        );
    }

    #[test]
    fn degenerate_random_equals_fixed() {
        let runner = Runner::default();
        let fixed = uniform_plan(300.0, 1);
        for coupling in [LengthCoupling::PerRead, LengthCoupling::Shared] {
            let mut random = fixed.clone();
            random.reads = ReadModel::normal(HUMAN, 50.0, 300.0, 1e-9, coupling);
            for &n in &[2e8 as u64, 3e8 as u64, 4e8 as u64] {
                let a = coverage_probability(&fixed, n, &runner).unwrap();
                let b = coverage_probability(&random, n, &runner).unwrap();
                assert!((a - b).abs() < 1e-9, "{coupling:?} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn monotone_in_n_l_i_and_r() {
        let runner = Runner::default();
        let base = uniform_plan(200.0, 2);
        let mut prev = 0.0;
        let mut n = 1u64 << 27;
        while n <= 1 << 33 {
            let p = coverage_probability(&base, n, &runner).unwrap();
            assert!(p >= prev);
            prev = p;
            n *= 2;
        }
        assert!(prev > 0.999_999);
        let n = 6e8 as u64;
        let p = |plan: &CoveragePlan| coverage_probability(plan, n, &runner).unwrap();
        let longer = uniform_plan(250.0, 2);
        let mut more_overlap = base.clone();
        more_overlap.reads.overlap = 80.0;
        let higher_r = uniform_plan(200.0, 3);
        assert!(p(&longer) >= p(&base));
        assert!(p(&more_overlap) <= p(&base));
        assert!(p(&higher_r) <= p(&base));
    }

    #[test]
    fn method_selection_and_mismatch() {
        let tn = DensityModel::truncated_normal(0.5, 1.0, 0.0, 1.0).unwrap();
        let plan = CoveragePlan::new(ReadModel::fixed(HUMAN, 50.0, 100.0), 1, 0.95, tn.clone());
        assert_eq!(plan.resolved_method(), Method::DensityIntegral);
        assert!(plan
            .clone()
            .with_method(Method::GammaTail)
            .validate()
            .is_err());
        let tri = CoveragePlan::new(
            ReadModel::fixed(HUMAN, 50.0, 100.0),
            1,
            0.95,
            DensityModel::triangle(),
        );
        assert_eq!(tri.resolved_method(), Method::LimitProcess);
        assert!(tri
            .clone()
            .with_method(Method::DensityIntegral)
            .validate()
            .is_err());
        assert!(ReadModel::fixed(HUMAN, 50.0, 40.0).validate().is_err());
        assert!(
            uncovered_regions_probability(&uniform_plan(100.0, 1), 100, 2, &Runner::default())
                .is_err()
        );
    }

    #[test]
    fn plan_json_round_trip() {
        let json = r#"{
            "genome_length": 3.2e9,
            "overlap": 50,
            "read": {"normal": {"mean": 300, "sd": 50}},
            "r": 1,
            "target_prob": 0.95,
            "location_density": {"kind": "uniform"},
            "method": "gamma-tail"
        }"#;
        let plan: CoveragePlan = serde_json::from_str(json).unwrap();
        assert_eq!(plan.reads.coupling, LengthCoupling::PerRead);
        assert_eq!(plan.method, Some(Method::GammaTail));
        let back: CoveragePlan =
            serde_json::from_str(&serde_json::to_string(&plan).unwrap()).unwrap();
        assert_eq!(back, plan);
    }
}
