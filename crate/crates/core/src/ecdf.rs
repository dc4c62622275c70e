//! Empirical distribution functions of Monte Carlo replicates.

use std::io::Write;

use crate::error::{Error, Result};
use crate::estimate::{CdfEstimate, Method};

/// ECDF over sorted replicate values.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    values: Vec<f64>,
}

impl Ecdf {
    /// Sorts `values`; NaNs are rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("ECDF values must not be NaN".into()));
        }
        values.sort_unstable_by(f64::total_cmp);
        Self::from_sorted(values)
    }

    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("ECDF needs at least one value".into()));
        }
        check_sorted(&values)?;
        Ok(Ecdf { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Fraction of values `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    /// Binomial standard error `sqrt(p(1-p)/R)` at `x`.
    pub fn stderr(&self, x: f64) -> f64 {
        binomial_stderr(self.eval(x), self.values.len())
    }

    pub fn quantiles(&self, probs: &[f64]) -> Result<Vec<f64>> {
        empirical_quantiles(&self.values, probs)
    }

    /// Standard error of the type-7 `p`-quantile: `sqrt(p(1-p)/R)` times a
    /// difference-quotient estimate of the quantile function's slope.
    pub fn quantile_stderr(&self, p: f64) -> Result<f64> {
        let (lo, hi) = crate::estimate::slope_levels(p);
        let q = self.quantiles(&[lo, hi])?;
        Ok(binomial_stderr(p, self.values.len()) * (q[1] - q[0]) / (hi - lo))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Kolmogorov–Smirnov distance to a continuous CDF.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let r = self.values.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in self.values.iter().enumerate() {
            let f = cdf(x);
            d = d.max((i as f64 + 1.0) / r - f).max(f - i as f64 / r);
        }
        d
    }

    /// The ECDF as a [`CdfEstimate`] carrying its standard error.
    pub fn to_estimate(&self, method: Method) -> CdfEstimate {
        let lo = self.values[0];
        let hi = self.values[self.values.len() - 1];
        let a = self.clone();
        let b = self.clone();
        CdfEstimate::with_support(method, move |x| a.eval(x), (lo, hi))
            .with_stderr(move |x| b.stderr(x))
    }

    /// Writes `x,cdf,stderr` at each distinct value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "cdf", "stderr"]).map_err(csv_err)?;
        let r = self.values.len();
        for (i, &x) in self.values.iter().enumerate() {
            if i + 1 < r && self.values[i + 1] == x {
                continue;
            }
            let p = (i + 1) as f64 / r as f64;
            w.write_record([sci(x), sci(p), sci(binomial_stderr(p, r))])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Scientific notation with 6 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.5e}")
}

pub fn binomial_stderr(p: f64, replicates: usize) -> f64 {
    (p * (1.0 - p) / replicates as f64).sqrt()
}

fn check_sorted(values: &[f64]) -> Result<()> {
    match values.windows(2).position(|w| w[0] > w[1]) {
        Some(i) => Err(Error::Unsorted { index: i + 1 }),
        None => Ok(()),
    }
}

/// Type-7 quantiles (linear interpolation between order statistics at
/// position `(R-1) p`) of sorted `values`.
pub fn empirical_quantiles(values: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Domain(
            "empirical quantiles of an empty sample".into(),
        ));
    }
    check_sorted(values)?;
    probs
        .iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!(
                    "quantile level must be in [0, 1], got {p}"
                )));
            }
            let h = (values.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(values.len() - 1);
            Ok(values[lo] + (h - lo as f64) * (values[hi] - values[lo]))
        })
        .collect()
}
