//! Brute-force Monte Carlo: sample locations, sort, take the k-th maximal
//! r-spacing.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::ecdf::{binomial_stderr, Ecdf};
use crate::error::{Error, Result};
use crate::spacings::{
    gamma_tail_inverse, gamma_tail_unchecked, kth_max_spacing, Boundary, SpacingQuery,
};
use crate::stream::Runner;

/// Smallest replicate count accepted by [`SimulationSpec::validate`].
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub query: SpacingQuery,
    pub model: DensityModel,
    pub boundary: Boundary,
    pub replicates: usize,
    pub master_seed: u64,
}

impl SimulationSpec {
    pub fn new(
        query: SpacingQuery,
        model: DensityModel,
        boundary: Boundary,
        replicates: usize,
        master_seed: u64,
    ) -> Result<Self> {
        let spec = SimulationSpec {
            query,
            model,
            boundary,
            replicates,
            master_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::Config(format!(
                "simulation needs at least {MIN_REPLICATES} replicates, got {}",
                self.replicates
            )));
        }
        SpacingQuery::new(self.query.n, self.query.r, self.query.k)?;
        self.query.check_boundary(self.boundary)?;
        usize::try_from(self.query.n).map_err(|_| {
            Error::InvalidQuery(format!("n = {} does not fit in memory", self.query.n))
        })?;
        Ok(())
    }
}

/// Draws `n` sorted locations from `model` into `buf` by the quantile transform.
pub fn sample_sorted_locations<R: Rng + ?Sized>(
    model: &DensityModel,
    n: usize,
    rng: &mut R,
    buf: &mut Vec<f64>,
) {
    buf.clear();
    buf.extend((0..n).map(|_| model.quantile_unchecked(rng.random::<f64>())));
    buf.sort_unstable_by(f64::total_cmp);
}

/// Sorted replicate values of the k-th maximal r-spacing (on the location
/// scale, not multiplied by `n`).
pub fn simulate_kth_max_rspacing(spec: &SimulationSpec, runner: &Runner) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.query.n as usize;
    let r = spec.query.r;
    let k = spec.query.k as usize;
    let support = spec.model.support();
    runner.sorted_replicates(
        spec.master_seed,
        spec.replicates,
        || Vec::with_capacity(n),
        |_, rng, buf| {
            sample_sorted_locations(&spec.model, n, rng, buf);
            kth_max_spacing(buf, r, k, spec.boundary, support)
                .expect("query validated against boundary")
        },
    )
}

/// As [`simulate_kth_max_rspacing`], wrapped in an [`Ecdf`].
pub fn simulate_ecdf(spec: &SimulationSpec, runner: &Runner) -> Result<Ecdf> {
    Ecdf::from_sorted(simulate_kth_max_rspacing(spec, runner)?)
}

/// Sorted replicates of `max(X_1, ..., X_n) / n` for i.i.d. `Gamma(r, 1)`
/// variables, i.e. the maximum r-spacing under exact independence. Each
/// replicate is one inversion: `f_r(x) = 1 - V^{1/n}`.
pub fn simulate_gamma_max(
    n: u64,
    r: u32,
    replicates: usize,
    seed: u64,
    runner: &Runner,
) -> Result<Vec<f64>> {
    if n == 0 || r == 0 {
        return Err(Error::Domain(
            "gamma maximum needs n >= 1 and r >= 1".into(),
        ));
    }
    if replicates < MIN_REPLICATES {
        return Err(Error::Config(format!(
            "simulation needs at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    let nf = n as f64;
    let values = runner.map_replicates(
        seed,
        replicates,
        || (),
        |_, rng, _| {
            // open interval so the tail level stays in (0, 1)
            let v: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let t = -(v.ln() / nf).exp_m1();
            gamma_tail_inverse(r, t.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)).map(|x| x / nf)
        },
    )?;
    let mut values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    values.sort_unstable_by(f64::total_cmp);
    Ok(values)
}

/// Outcome of [`check_association_inequality`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssociationCheck {
    /// Monte Carlo `P(S_1 < x, ..., S_n < x)`.
    pub lhs: f64,
    pub lhs_stderr: f64,
    /// `G_r(x)^n`, exact.
    pub rhs: f64,
    pub pass: bool,
}

/// Checks that the overlapping gamma windows `S_j = E_j + ... + E_{j+r-1}`
/// of i.i.d. unit exponentials are positively associated:
/// `P(all S_j < x) >= Π P(S_j < x)`. Passes if `lhs >= rhs - 3 stderr`.
pub fn check_association_inequality(
    n: usize,
    r: u32,
    x: f64,
    replicates: usize,
    seed: u64,
    runner: &Runner,
) -> Result<AssociationCheck> {
    if n == 0 || r == 0 {
        return Err(Error::Domain(
            "association check needs n >= 1 and r >= 1".into(),
        ));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "window threshold must be positive, got {x}"
        )));
    }
    if replicates == 0 {
        return Err(Error::Config("association check needs replicates".into()));
    }
    let r_us = r as usize;
    let hits = runner.map_replicates(
        seed,
        replicates,
        || Vec::with_capacity(n + r_us),
        |_, rng, e: &mut Vec<f64>| {
            e.clear();
            e.extend((0..n + r_us - 1).map(|_| rng.sample::<f64, _>(Exp1)));
            let mut window: f64 = e[..r_us].iter().sum();
            if window >= x {
                return false;
            }
            for j in 1..n {
                // recompute rather than slide to avoid drift
                window = e[j..j + r_us].iter().sum();
                if window >= x {
                    return false;
                }
            }
            true
        },
    )?;
    let count = hits.iter().filter(|&&h| h).count();
    let lhs = count as f64 / replicates as f64;
    let lhs_stderr = binomial_stderr(lhs, replicates);
    let rhs = (1.0 - gamma_tail_unchecked(r, x)).powi(n as i32);
    Ok(AssociationCheck {
        lhs,
        lhs_stderr,
        rhs,
        pass: lhs >= rhs - 3.0 * lhs_stderr,
    })
}
