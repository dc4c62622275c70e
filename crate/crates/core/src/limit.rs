//! Monte Carlo evaluation of the extremal-type limit laws of the k-th maximal
//! r-spacing.
//!
//! With `E_1, E_2, ...` i.i.d. unit exponentials and `S_m = E_1 + ... + E_m`,
//! the limit law is that of the k-th largest term over `j = 1, 2, ...` of
//!
//! * Gumbel: `Σ_{l=1}^r E_{j+l-1} / (j+l-1)`;
//! * Fréchet(a): `S_j^{-1/a} - S_{j+r}^{-1/a}`;
//! * Weibull(a): `S_{j+r}^{1/a} - S_j^{1/a}`.
//!
//! The index set is truncated at `J`. Each replicate uses its own stream.

use serde::{Deserialize, Serialize};

use crate::density::{DensityModel, ExtremalType};
use crate::ecdf::Ecdf;
use crate::error::{Error, Result};
use crate::estimate::{CdfEstimate, Method};
use crate::quadrature::unit_interval_rule;
use crate::stream::Runner;

/// Lower bound of the default truncation index.
pub const MIN_TRUNCATION: usize = 10_000;
/// Default replicate count for table reproduction.
pub const DEFAULT_REPLICATES: usize = 100_000;
/// Gauss–Legendre nodes for integrating over a random threshold.
pub const THRESHOLD_NODES: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LimitType {
    Gumbel,
    Frechet { a: f64 },
    Weibull { a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitLawSpec {
    #[serde(flatten)]
    pub law: LimitType,
    pub k: usize,
    pub r: u32,
    pub truncation: usize,
    pub replicates: usize,
    pub master_seed: u64,
}

/// `max(10^4, ceil(20 r / x_min))`.
pub fn default_truncation(r: u32, x_min: f64) -> usize {
    let by_x = if x_min > 0.0 {
        (20.0 * f64::from(r) / x_min).ceil()
    } else {
        f64::INFINITY
    };
    if by_x.is_finite() {
        MIN_TRUNCATION.max(by_x as usize)
    } else {
        MIN_TRUNCATION
    }
}

impl LimitLawSpec {
    /// Spec with the default truncation for evaluation points `>= x_min`.
    pub fn new(
        law: LimitType,
        k: usize,
        r: u32,
        x_min: f64,
        replicates: usize,
        master_seed: u64,
    ) -> Result<Self> {
        let spec = LimitLawSpec {
            law,
            k,
            r,
            truncation: default_truncation(r, x_min),
            replicates,
            master_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.k == 0 {
            return Err(Error::Config("limit law needs k >= 1 and r >= 1".into()));
        }
        if self.truncation < self.k {
            return Err(Error::Config(format!(
                "truncation {} leaves fewer than k = {} terms",
                self.truncation, self.k
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Config(
                "limit law needs at least one replicate".into(),
            ));
        }
        match self.law {
            LimitType::Gumbel => {}
            LimitType::Frechet { a } if a > 0.0 && a.is_finite() => {}
            LimitType::Weibull { a } if a > 1.0 && a.is_finite() => {}
            LimitType::Frechet { a } => {
                return Err(Error::Config(format!(
                    "Fréchet index must be positive, got {a}"
                )))
            }
            LimitType::Weibull { a } => {
                return Err(Error::Config(format!(
                    "Weibull index must exceed 1, got {a}"
                )))
            }
        }
        Ok(())
    }

    /// Union bound on `P(some term beyond J exceeds x)`.
    pub fn tail_omission_bound(&self, x: f64) -> f64 {
        let j = self.truncation as f64;
        let r = f64::from(self.r);
        match self.law {
            // Σ_l E/(j+l-1) <= (r E_max)/(J+1); sum of e^{-x (J+1)/r}-type tails
            LimitType::Gumbel => {
                let rate = x * (j + 1.0) / r;
                r * (-rate).exp() / (1.0 - (-x / r).exp()).max(f64::MIN_POSITIVE)
            }
            // a term beyond J is at most (r/a) S_J^{-1/a-1}; S_J concentrates at J
            LimitType::Frechet { a } => {
                let term = r / a * (0.5 * j).powf(-1.0 / a - 1.0);
                if term < x {
                    (-(j / 8.0)).exp()
                } else {
                    1.0
                }
            }
            LimitType::Weibull { a } => {
                let term = 2.0 * r / a * (0.5 * j).powf(1.0 / a - 1.0);
                if term < x {
                    (-(j / 8.0)).exp()
                } else {
                    1.0
                }
            }
        }
    }
}

/// Per-replicate scratch buffers.
#[derive(Debug, Default)]
pub struct LimitScratch {
    exps: Vec<f64>,
    terms: Vec<f64>,
}

/// The `k` largest terms of one replicate, in descending order.
pub fn sample_top_terms<R: rand::Rng + ?Sized>(
    spec: &LimitLawSpec,
    rng: &mut R,
    scratch: &mut LimitScratch,
) -> Vec<f64> {
    let r = spec.r as usize;
    let jmax = spec.truncation;
    let e = &mut scratch.exps;
    e.clear();
    // e[m] = E_{m+1}
    e.extend((0..jmax + r).map(|_| rng.sample::<f64, _>(rand_distr::Exp1)));
    let t = &mut scratch.terms;
    t.clear();
    match spec.law {
        LimitType::Gumbel => {
            t.extend((1..=jmax).map(|j| {
                (1..=r)
                    .map(|l| {
                        let m = j + l - 1;
                        e[m - 1] / m as f64
                    })
                    .sum::<f64>()
            }));
        }
        LimitType::Frechet { a } | LimitType::Weibull { a } => {
            // partial sums s[m] = S_m, s[0] = 0
            let mut s = Vec::with_capacity(jmax + r + 1);
            s.push(0.0);
            let mut acc = 0.0;
            for &x in e.iter() {
                acc += x;
                s.push(acc);
            }
            match spec.law {
                LimitType::Frechet { .. } => {
                    let p = -1.0 / a;
                    t.extend((1..=jmax).map(|j| s[j].powf(p) - s[j + r].powf(p)));
                }
                _ => {
                    let p = 1.0 / a;
                    t.extend((1..=jmax).map(|j| s[j + r].powf(p) - s[j].powf(p)));
                }
            }
        }
    }
    let k = spec.k;
    let len = t.len();
    t.select_nth_unstable_by(len - k, f64::total_cmp);
    let mut top = t[len - k..].to_vec();
    top.sort_unstable_by(|a, b| b.total_cmp(a));
    top
}

/// The k-th largest term of one replicate.
pub fn sample_limit_statistic<R: rand::Rng + ?Sized>(spec: &LimitLawSpec, rng: &mut R) -> f64 {
    let top = sample_top_terms(spec, rng, &mut LimitScratch::default());
    top[spec.k - 1]
}

/// Replicate ECDFs of the 1st, ..., k-th largest term.
#[derive(Debug, Clone)]
pub struct LimitLawEstimate {
    spec: LimitLawSpec,
    ranks: Vec<Ecdf>,
}

impl LimitLawEstimate {
    pub fn build(spec: &LimitLawSpec, runner: &Runner) -> Result<Self> {
        spec.validate()?;
        let rows = runner.map_replicates(
            spec.master_seed,
            spec.replicates,
            LimitScratch::default,
            |_, rng, scratch| sample_top_terms(spec, rng, scratch),
        )?;
        let ranks = (0..spec.k)
            .map(|i| Ecdf::new(rows.iter().map(|row| row[i]).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(LimitLawEstimate { spec: *spec, ranks })
    }

    pub fn spec(&self) -> &LimitLawSpec {
        &self.spec
    }

    /// ECDF of the `rank`-th largest term (1-based).
    pub fn rank(&self, rank: usize) -> Option<&Ecdf> {
        rank.checked_sub(1).and_then(|i| self.ranks.get(i))
    }

    /// `H_k(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.ranks[self.spec.k - 1].eval(x)
    }

    pub fn stderr(&self, x: f64) -> f64 {
        self.ranks[self.spec.k - 1].stderr(x)
    }

    /// `H_k` as a [`CdfEstimate`].
    pub fn to_estimate(&self) -> CdfEstimate {
        self.ranks[self.spec.k - 1].to_estimate(Method::LimitProcess)
    }

    /// Distribution of the exceedance count `N(x)` (terms above `x`),
    /// `P(N = i)` for `i < k`. Uses `P(N <= i) = H_{i+1}(x)`.
    fn count_pmf(&self, x: f64) -> Vec<f64> {
        let mut prev = 0.0;
        self.ranks
            .iter()
            .map(|e| {
                let c = e.eval(x);
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    /// `P(N_1 + N_2 < k)` for two independent copies of the exceedance count
    /// at `x`, with its delta-method standard error. For `k = 1` this is
    /// `H_1(x)^2`.
    pub fn two_sided(&self, x: f64) -> (f64, f64) {
        let q = self.count_pmf(x);
        let k = q.len();
        let cum: Vec<f64> = q
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let value: f64 = (0..k).map(|i| q[i] * cum[k - 1 - i]).sum();
        // ∂/∂q_i = 2 P(N <= k-1-i) under the multinomial model
        let g: Vec<f64> = (0..k).map(|i| 2.0 * cum[k - 1 - i]).collect();
        let m1: f64 = (0..k).map(|i| g[i] * q[i]).sum();
        let m2: f64 = (0..k).map(|i| g[i] * g[i] * q[i]).sum();
        let var = ((m2 - m1 * m1) / self.spec.replicates as f64).max(0.0);
        (value, var.sqrt())
    }

    /// Smallest `y` with `two_sided(y) >= p`, searched over replicate values.
    pub fn two_sided_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "quantile level must be in (0, 1), got {p}"
            )));
        }
        if self.spec.k == 1 {
            // H^2 = p  <=>  H = sqrt(p)
            return Ok(self.ranks[0].quantiles(&[p.sqrt()])?[0]);
        }
        let vals = self.ranks[self.spec.k - 1].values();
        let mut lo = 0usize;
        let mut hi = vals.len() - 1;
        if self.two_sided(vals[hi]).0 < p {
            return Err(Error::Bracket(format!(
                "level {p} beyond the simulated range"
            )));
        }
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.two_sided(vals[mid]).0 >= p {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(vals[lo])
    }
}

/// `H_k(x)` with its standard error, built from scratch.
pub fn cdf_limit_law(spec: &LimitLawSpec, x: f64, runner: &Runner) -> Result<(f64, f64)> {
    if x <= 0.0 {
        spec.validate()?;
        return Ok((0.0, 0.0));
    }
    let est = LimitLawEstimate::build(spec, runner)?;
    Ok((est.cdf(x), est.stderr(x)))
}

/// The two-sided limit law of a symmetric density, rescaled to spacings.
#[derive(Debug, Clone)]
pub struct SymmetricLimit {
    estimate: LimitLawEstimate,
    /// Spacing-scale norming: `M / scale` converges.
    scale: f64,
}

/// Weibull scale for half a sample of a symmetric density:
/// each half holds about `m = floor(n/2)` points from the folded density,
/// whose survival is twice the original, so `B - b_m = B - G(1/(2m))`.
pub fn half_sample_scale(model: &DensityModel, n: u64) -> Result<f64> {
    let m = n / 2;
    if m < 1 {
        return Err(Error::Domain(format!(
            "need n >= 2 for half-sample norming, got {n}"
        )));
    }
    let (_, upper) = model.support();
    Ok(upper - model.inverse_sf(1.0 / (2.0 * m as f64))?)
}

impl SymmetricLimit {
    /// Validates `model` and simulates the Weibull limit of its index.
    pub fn build(
        model: &DensityModel,
        n: u64,
        r: u32,
        k: usize,
        replicates: usize,
        master_seed: u64,
        runner: &Runner,
    ) -> Result<Self> {
        if !model.is_symmetric() {
            return Err(Error::NotApplicable(format!(
                "{} is not symmetric",
                model.label()
            )));
        }
        let a = match model.classify_extremal_type() {
            ExtremalType::WeibullIndex(a) if a > 1.0 => a,
            ExtremalType::WeibullIndex(a) => {
                return Err(Error::NotApplicable(format!(
                    "{} has Weibull index {a}; the limit law needs an index above 1",
                    model.label()
                )))
            }
            other => {
                return Err(Error::NotApplicable(format!(
                    "{} has extremal type {other:?}; only Weibull tails are supported here",
                    model.label()
                )))
            }
        };
        let scale = half_sample_scale(model, n)?;
        let spec = LimitLawSpec {
            law: LimitType::Weibull { a },
            k,
            r,
            truncation: MIN_TRUNCATION,
            replicates,
            master_seed,
        };
        Ok(SymmetricLimit {
            estimate: LimitLawEstimate::build(&spec, runner)?,
            scale,
        })
    }

    /// From an existing estimate and spacing scale.
    pub fn from_parts(estimate: LimitLawEstimate, scale: f64) -> Self {
        SymmetricLimit { estimate, scale }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn limit(&self) -> &LimitLawEstimate {
        &self.estimate
    }

    /// `P(M_k <= l)` and its standard error.
    pub fn cdf(&self, l: f64) -> (f64, f64) {
        self.estimate.two_sided(l / self.scale)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.scale * self.estimate.two_sided_quantile(p)?)
    }

    pub fn to_estimate(&self) -> CdfEstimate {
        let a = self.clone();
        let b = self.clone();
        let vals = self
            .estimate
            .rank(self.estimate.spec.k)
            .expect("rank k exists")
            .values();
        let support = (vals[0] * self.scale, vals[vals.len() - 1] * self.scale);
        CdfEstimate::with_support(Method::LimitProcess, move |l| a.cdf(l).0, support)
            .with_stderr(move |l| b.cdf(l).1)
    }
}

/// `P(M_{k,n}^{(r)} <= l)` for a symmetric density.
pub fn cdf_symmetric_density(
    model: &DensityModel,
    n: u64,
    r: u32,
    k: usize,
    l: f64,
    replicates: usize,
    master_seed: u64,
    runner: &Runner,
) -> Result<(f64, f64)> {
    Ok(SymmetricLimit::build(model, n, r, k, replicates, master_seed, runner)?.cdf(l))
}

/// Trapezoidal closed form: the two-sided Weibull(2) law at
/// `l sqrt(n) / sqrt(2 κ (1-κ))`. `weibull2` must be a Weibull(2) estimate.
pub fn cdf_trapezoidal_closed_form(
    kappa: f64,
    n: f64,
    l: f64,
    weibull2: &LimitLawEstimate,
) -> Result<(f64, f64)> {
    if !(kappa > 0.0 && kappa <= 0.5) {
        return Err(Error::Domain(format!(
            "closed form needs kappa in (0, 1/2], got {kappa}; use the uniform path for kappa = 0"
        )));
    }
    if weibull2.spec.law != (LimitType::Weibull { a: 2.0 }) {
        return Err(Error::Config(
            "closed form needs a Weibull(2) limit estimate".into(),
        ));
    }
    Ok(weibull2.two_sided(l * n.sqrt() / (2.0 * kappa * (1.0 - kappa)).sqrt()))
}

/// Distribution of a positive random threshold, given by its quantile function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LengthDistribution {
    Fixed { value: f64 },
    Distributed { density: DensityModel },
}

impl LengthDistribution {
    pub fn fixed(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain(format!(
                "threshold must be positive, got {value}"
            )));
        }
        Ok(LengthDistribution::Fixed { value })
    }

    pub fn distributed(density: DensityModel) -> Result<Self> {
        if density.support().0 < 0.0 {
            return Err(Error::Domain(format!(
                "threshold distribution {} puts mass below 0",
                density.label()
            )));
        }
        Ok(LengthDistribution::Distributed { density })
    }

    pub fn quantile(&self, q: f64) -> f64 {
        match self {
            LengthDistribution::Fixed { value } => *value,
            LengthDistribution::Distributed { density } => density.quantile_unchecked(q),
        }
    }

    /// `E[Y]` by quadrature in the probability domain.
    pub fn mean(&self) -> f64 {
        match self {
            LengthDistribution::Fixed { value } => *value,
            LengthDistribution::Distributed { .. } => self.expect(|y| y),
        }
    }

    /// `E[g(Y)] = ∫_0^1 g(F^{-1}(q)) dq` with 128 Gauss–Legendre nodes.
    pub fn expect(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        match self {
            LengthDistribution::Fixed { value } => g(*value),
            LengthDistribution::Distributed { .. } => unit_interval_rule(THRESHOLD_NODES)
                .iter()
                .map(|&(q, w)| w * g(self.quantile(q)))
                .sum(),
        }
    }
}

/// `P(N(x) <= k) ≈ ∫ H_{k+1}(x y) dF_Y(y)`: at most `k` spacings exceed the
/// random threshold `x Y`.
pub fn cdf_uncovered_count(
    estimate: &LimitLawEstimate,
    threshold: &LengthDistribution,
    x: f64,
    k: usize,
) -> Result<f64> {
    let h = estimate.rank(k + 1).ok_or_else(|| {
        Error::Config(format!(
            "limit estimate tracks {} ranks, need {}",
            estimate.spec.k,
            k + 1
        ))
    })?;
    Ok(threshold.expect(|y| h.eval(x * y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::replicate_rng;

    fn spec(
        law: LimitType,
        k: usize,
        r: u32,
        truncation: usize,
        replicates: usize,
    ) -> LimitLawSpec {
        LimitLawSpec {
            law,
            k,
            r,
            truncation,
            replicates,
            master_seed: 42,
        }
    }

    #[test]
    fn validation_and_truncation() {
        assert!(spec(LimitType::Weibull { a: 1.0 }, 1, 1, 100, 10)
            .validate()
            .is_err());
        assert!(spec(LimitType::Frechet { a: 0.0 }, 1, 1, 100, 10)
            .validate()
            .is_err());
        assert!(spec(LimitType::Gumbel, 0, 1, 100, 10).validate().is_err());
        assert!(spec(LimitType::Gumbel, 5, 1, 4, 10).validate().is_err());
        assert_eq!(default_truncation(1, 0.5), 10_000);
        assert_eq!(default_truncation(5, 0.001), 100_000);
        let s = spec(LimitType::Gumbel, 1, 1, 10_000, 10);
        assert!(s.tail_omission_bound(2f64.ln()) < 1e-4);
        let w = spec(LimitType::Weibull { a: 2.0 }, 1, 5, 10_000, 10);
        assert!(w.tail_omission_bound(0.5) < 1e-4);
    }

    #[test]
    fn weibull_index_one_gives_exponential_terms() {
        // with a = 1 the terms are E_{j+1}; checked directly on the stream
        let s = LimitLawSpec {
            law: LimitType::Weibull { a: 1.0 },
            k: 1,
            r: 1,
            truncation: 50,
            replicates: 1,
            master_seed: 0,
        };
        let mut rng = replicate_rng(3, 0);
        let top = sample_top_terms(&s, &mut rng, &mut LimitScratch::default());
        let mut rng = replicate_rng(3, 0);
        let e: Vec<f64> = (0..51)
            .map(|_| rng.sample::<f64, _>(rand_distr::Exp1))
            .collect();
        let expect = e[1..].iter().cloned().fold(f64::MIN, f64::max);
        assert!((top[0] - expect).abs() < 1e-12);
    }

    use rand::Rng;

    #[test]
    fn zero_and_monotone_in_k() {
        let runner = Runner::default();
        let est =
            LimitLawEstimate::build(&spec(LimitType::Gumbel, 3, 2, 2000, 2000), &runner).unwrap();
        assert_eq!(est.rank(1).unwrap().eval(0.0), 0.0);
        for &x in &[0.2, 0.5, 1.0, 2.0] {
            let h: Vec<f64> = (1..=3).map(|i| est.rank(i).unwrap().eval(x)).collect();
            assert!(h[0] <= h[1] && h[1] <= h[2], "{h:?}");
        }
        assert_eq!(
            cdf_limit_law(&spec(LimitType::Gumbel, 1, 1, 100, 10), 0.0, &runner)
                .unwrap()
                .0,
            0.0
        );
    }

    #[test]
    fn two_sided_k1_is_square() {
        let est = LimitLawEstimate::build(
            &spec(LimitType::Weibull { a: 2.0 }, 1, 1, 2000, 3000),
            &Runner::default(),
        )
        .unwrap();
        for &x in &[0.5, 0.8, 1.1] {
            let h = est.cdf(x);
            let (v, se) = est.two_sided(x);
            assert!((v - h * h).abs() < 1e-15);
            assert!((se - 2.0 * h * est.stderr(x)).abs() < 1e-12);
        }
        let q = est.two_sided_quantile(0.5).unwrap();
        assert!((est.two_sided(q).0 - 0.5).abs() < 0.01);
    }

    #[test]
    fn two_sided_convolution_k2() {
        let est = LimitLawEstimate::build(
            &spec(LimitType::Gumbel, 2, 1, 2000, 2000),
            &Runner::default(),
        )
        .unwrap();
        let x = 1.0;
        let h1 = est.rank(1).unwrap().eval(x);
        let h2 = est.rank(2).unwrap().eval(x);
        // P(N1 + N2 <= 1) = P(0,0) + 2 P(0) P(1)
        let expect = h1 * h1 + 2.0 * h1 * (h2 - h1);
        assert!((est.two_sided(x).0 - expect).abs() < 1e-15);
    }

    #[test]
    fn threshold_integration() {
        let est = LimitLawEstimate::build(
            &spec(LimitType::Gumbel, 1, 1, 1000, 1000),
            &Runner::default(),
        )
        .unwrap();
        let fixed = LengthDistribution::fixed(1.3).unwrap();
        assert_eq!(
            cdf_uncovered_count(&est, &fixed, 0.7, 0).unwrap(),
            est.cdf(0.7 * 1.3)
        );
        let unit =
            LengthDistribution::distributed(DensityModel::uniform(1.0, 1.0 + 1e-12).unwrap())
                .unwrap();
        assert!((cdf_uncovered_count(&est, &unit, 0.7, 0).unwrap() - est.cdf(0.7)).abs() < 2e-3);
        let tn = LengthDistribution::distributed(
            DensityModel::truncated_normal(1.0, 0.2, 0.5, 1.5).unwrap(),
        )
        .unwrap();
        let v = cdf_uncovered_count(&est, &tn, 0.7, 0).unwrap();
        assert!(v >= est.cdf(0.7 * 0.5) - 1e-12 && v <= est.cdf(0.7 * 1.5) + 1e-12);
        assert!((tn.mean() - 1.0).abs() < 1e-10);
        assert!(cdf_uncovered_count(&est, &tn, 0.7, 1).is_err());
    }

    #[test]
    fn symmetric_requires_weibull_above_one() {
        let r = Runner::default();
        let u = DensityModel::unit_uniform();
        assert!(SymmetricLimit::build(&u, 1000, 1, 1, 100, 0, &r).is_err());
        let skew = DensityModel::step_equal(vec![0.5, 1.5]).unwrap();
        assert!(SymmetricLimit::build(&skew, 1000, 1, 1, 100, 0, &r).is_err());
    }

    #[test]
    fn trapezoid_scale_matches_closed_form() {
        for &kappa in &[0.1, 0.3, 0.5] {
            let m = DensityModel::trapezoidal(kappa).unwrap();
            let n = 10_000u64;
            let c = half_sample_scale(&m, n).unwrap();
            let closed = (2.0 * kappa * (1.0 - kappa) / n as f64).sqrt();
            assert!(
                ((c - closed) / closed).abs() < 1e-9,
                "kappa={kappa}: {c} vs {closed}"
            );
        }
    }
}
