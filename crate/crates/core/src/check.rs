//! Self-check suite: the invariants the estimators must satisfy, each
//! evaluated against an independent oracle.

use rand::Rng;
use serde::Serialize;

use crate::density::DensityModel;
use crate::ecdf::Ecdf;
use crate::error::Result;
use crate::exact::exact_max_spacing_cdf_r1;
use crate::limit::{LimitLawEstimate, LimitLawSpec, LimitType};
use crate::quadrature::QuadratureSpec;
use crate::simulation::{check_association_inequality, simulate_kth_max_rspacing, SimulationSpec};
use crate::spacings::{gamma_tail, Boundary, SpacingQuery};
use crate::stream::{replicate_rng, Runner};
use crate::uniform::{gamma_approx_estimate, quantile_corrected_shift};

/// `(r, n, x)` triples of the association check.
pub const ASSOCIATION_CASES: [(u32, usize, f64); 3] = [(2, 5, 2.0), (3, 10, 3.0), (5, 8, 6.0)];
/// Sample sizes of the exact-formula check.
pub const EXACT_SIZES: [u64; 3] = [5, 10, 50];
/// 95% Kolmogorov–Smirnov constant: the band is `KS_95 / sqrt(R)`.
pub const KS_95: f64 = 1.63;

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub seed: u64,
    pub replicates: usize,
    pub runner: Runner,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            seed: 0,
            replicates: 100_000,
            runner: Runner::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub seed: u64,
    pub replicates: usize,
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
}

fn item(name: impl Into<String>, pass: bool, detail: String) -> CheckItem {
    CheckItem {
        name: name.into(),
        detail,
        pass,
    }
}

pub fn run_check(opts: &CheckOptions) -> Result<CheckReport> {
    let mut items = Vec::new();
    for (i, &(r, n, x)) in ASSOCIATION_CASES.iter().enumerate() {
        let c = check_association_inequality(
            n,
            r,
            x,
            opts.replicates,
            opts.seed.wrapping_add(i as u64),
            &opts.runner,
        )?;
        items.push(item(
            format!("association r={r} n={n} x={x}"),
            c.pass,
            format!("lhs {:.6} ± {:.2e}, rhs {:.6}", c.lhs, c.lhs_stderr, c.rhs),
        ));
    }
    for &n in &EXACT_SIZES {
        let (d, band) = exact_vs_simulation(
            n,
            opts.replicates,
            opts.seed.wrapping_add(100 + n),
            &opts.runner,
        )?;
        items.push(item(
            format!("exact r=1 vs simulation n={n}"),
            d < band,
            format!("KS distance {d:.5}, band {band:.5}"),
        ));
    }
    let tele = telescoping_max_error(10_000, opts.seed);
    items.push(item(
        "telescoped limit terms",
        tele < 1e-12,
        format!("max relative difference {tele:.2e}"),
    ));
    let shift = shift_equivalence_max_error(20, opts.seed)?;
    items.push(item(
        "corrected shift vs gamma-tail quantile",
        shift < 1e-9,
        format!("max relative difference {shift:.2e} over 20 triples"),
    ));
    let tail = gamma_tail_quadrature_error()?;
    items.push(item(
        "gamma tail vs quadrature",
        tail < 1e-10,
        format!("max relative difference {tail:.2e}"),
    ));
    let spec = LimitLawSpec {
        law: LimitType::Gumbel,
        k: 1,
        r: 1,
        truncation: crate::limit::MIN_TRUNCATION,
        replicates: opts.replicates,
        master_seed: opts.seed.wrapping_add(200),
    };
    let est = LimitLawEstimate::build(&spec, &opts.runner)?;
    let x = std::f64::consts::LN_2;
    let (value, se) = (est.cdf(x), est.stderr(x));
    let exact = half_power_product();
    items.push(item(
        "Gumbel limit at ln 2",
        (value - exact).abs() <= 3.0 * se,
        format!("simulated {value:.5} ± {se:.1e}, product {exact:.6}"),
    ));
    Ok(CheckReport {
        seed: opts.seed,
        replicates: opts.replicates,
        items,
    })
}

/// KS distance of the simulated maximal spacing from the exact CDF, and the
/// 95% band.
pub fn exact_vs_simulation(
    n: u64,
    replicates: usize,
    seed: u64,
    runner: &Runner,
) -> Result<(f64, f64)> {
    let spec = SimulationSpec::new(
        SpacingQuery::max(n, 1)?,
        DensityModel::unit_uniform(),
        Boundary::WithEnds,
        replicates,
        seed,
    )?;
    let ecdf = Ecdf::from_sorted(simulate_kth_max_rspacing(&spec, runner)?)?;
    let d = ecdf.ks_distance(|a| exact_max_spacing_cdf_r1(n, a).unwrap_or(f64::NAN));
    Ok((d, KS_95 / (replicates as f64).sqrt()))
}

/// `Π_{j>=1} (1 - 2^{-j})`, the Gumbel `r = 1` limit CDF at `ln 2`.
pub fn half_power_product() -> f64 {
    (1..=60).map(|j| 1.0 - 0.5f64.powi(j)).product()
}

/// Largest relative gap between the literal window sums of the Fréchet and
/// Weibull limit terms and their telescoped forms, over `draws` exponential
/// sequences.
pub fn telescoping_max_error(draws: usize, seed: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..draws {
        let mut rng = replicate_rng(seed, i as u64);
        let r = rng.random_range(1..=6usize);
        let a = [0.5, 1.0, 2.0, 3.0][i % 4];
        let j = rng.random_range(1..=50usize);
        let mut s = vec![0.0];
        for _ in 0..j + r {
            let e: f64 = rng.sample(rand_distr::Exp1);
            s.push(s[s.len() - 1] + e);
        }
        for (p, sign) in [(-1.0 / a, -1.0), (1.0 / a, 1.0)] {
            let literal: f64 = (1..=r)
                .map(|l| sign * (s[j + l].powf(p) - s[j + l - 1].powf(p)))
                .sum();
            let telescoped = sign * (s[j + r].powf(p) - s[j].powf(p));
            let scale = s[j].powf(p).abs().max(s[j + r].powf(p).abs());
            worst = worst.max((literal - telescoped).abs() / scale);
        }
    }
    worst
}

/// Largest relative gap between the corrected-shift quantile and the
/// inverted gamma-tail CDF over `count` random `(n, r, p)`.
pub fn shift_equivalence_max_error(count: usize, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut rng = replicate_rng(seed, u64::MAX);
    for _ in 0..count {
        let n = 10f64.powf(rng.random_range(1.0..7.0)).round();
        let r = rng.random_range(1..=20u32);
        let p = rng.random_range(0.01..0.99);
        let shifted = quantile_corrected_shift(n, r, p)?;
        let inverted = gamma_approx_estimate(n, r)?.quantile(p)?;
        worst = worst.max((shifted / inverted - 1.0).abs());
    }
    Ok(worst)
}

/// Largest relative gap between the closed-form gamma tail and quadrature
/// of the Γ(r, 1) density.
pub fn gamma_tail_quadrature_error() -> Result<f64> {
    let quad = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for r in [1u32, 2, 5, 10] {
        let ln_norm = crate::numeric::ln_gamma_int(r);
        for x in [0.1, 1.0, 5.0, 10.0, 25.0] {
            let upper = x + 60.0 + 4.0 * f64::from(r);
            let tail = quad.integrate(
                |t: f64| (f64::from(r - 1) * t.ln() - t - ln_norm).exp(),
                x,
                upper,
                &[],
            )?;
            worst = worst.max((gamma_tail(r, x)? / tail - 1.0).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_parts_pass() {
        assert!(telescoping_max_error(2000, 1) < 1e-12);
        assert!(shift_equivalence_max_error(20, 1).unwrap() < 1e-9);
        assert!(gamma_tail_quadrature_error().unwrap() < 1e-10);
        assert!((half_power_product() - 0.288_788_095_086_602).abs() < 1e-14);
    }

    #[test]
    fn small_run_reports_every_item() {
        let opts = CheckOptions {
            replicates: 2000,
            ..CheckOptions::default()
        };
        let report = run_check(&opts).unwrap();
        assert_eq!(report.items.len(), 3 + 3 + 4);
        assert!(report.passed(), "{report:#?}");
    }
}
