//! Regeneration of the reference quantile tables, the read-count table and
//! the CDF comparison series.
//!
//! Quantile tables report the maximal r-spacing `M` on its natural scale; the
//! `multiplier` column gives the power of ten the published layout divides by
//! (`1e-3` at `n = 10^4`, `1e-4` at `n = 10^5`, `1e-2` for the triangle).

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::coverage::{required_reads, CoveragePlan, LengthCoupling, ReadModel};
use crate::density::DensityModel;
use crate::ecdf::{sci, Ecdf};
use crate::error::{Error, Result};
use crate::estimate::{quantile_stderr, CdfEstimate, Method};
use crate::limit::SymmetricLimit;
use crate::nonuniform::{
    barbe_estimate, density_integral_estimate, TailFamily, UniformCalibration,
};
use crate::quadrature::QuadratureSpec;
use crate::simulation::{simulate_gamma_max, simulate_kth_max_rspacing, SimulationSpec};
use crate::spacings::{Boundary, SpacingQuery};
use crate::stream::Runner;
use crate::uniform::{gamma_approx_estimate, gumbel_classic_estimate, quantile_gumbel_classic};

/// Quantile levels of the spacing tables.
pub const LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];
/// Spacing orders of the spacing tables.
pub const TABLE_ORDERS: [u32; 2] = [1, 5];
/// Spacing orders of the read-count table.
pub const COVERAGE_ORDERS: [u32; 5] = [1, 2, 5, 10, 50];

pub const GENOME_LENGTH: f64 = 3.2e9;
pub const OVERLAP: f64 = 50.0;
pub const TARGET_PROB: f64 = 0.95;

/// Replicate counts and seeding for the stochastic rows.
#[derive(Debug, Clone)]
pub struct TableOptions {
    pub seed: u64,
    /// Direct simulation of the spacings.
    pub simulation_replicates: usize,
    /// Uniform calibration of the non-uniform approximation.
    pub calibration_replicates: usize,
    /// Limit-process replicates.
    pub limit_replicates: usize,
    pub runner: Runner,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            seed: 0,
            simulation_replicates: 6000,
            calibration_replicates: 10_000,
            limit_replicates: 100_000,
            runner: Runner::default(),
        }
    }
}

impl TableOptions {
    /// Uses `replicates` for every stochastic row.
    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.simulation_replicates = replicates;
        self.calibration_replicates = replicates;
        self.limit_replicates = replicates;
        self
    }

    /// Independent seed per (table, row, r), stable across runs.
    fn seed_for(&self, table: u8, row: &str, r: u32) -> u64 {
        // FNV-1a over the cell identity, mixed with the master seed
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let bytes = [table]
            .into_iter()
            .chain(row.bytes())
            .chain(r.to_le_bytes());
        for b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^ self.seed.rotate_left(17)
    }
}

/// One cell of a regenerated table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    pub table: u8,
    /// Row label (estimator for spacing tables, location density for the
    /// read-count table).
    pub row: String,
    /// Column label: read length for the read-count table.
    pub column: Option<String>,
    pub r: u32,
    pub level: Option<f64>,
    pub method: Method,
    /// Quantile of `M`, or fold coverage. `None` where the estimator does
    /// not apply.
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    /// `false` when the value was computed outside the estimator's domain
    /// of validity, or not at all.
    pub applicable: bool,
    pub multiplier: f64,
    /// Minimal read count, for the read-count table.
    pub reads: Option<u64>,
}

impl TableCell {
    fn quantile(
        table: u8,
        row: &str,
        r: u32,
        level: f64,
        method: Method,
        value: f64,
        stderr: Option<f64>,
        multiplier: f64,
    ) -> Self {
        TableCell {
            table,
            row: row.to_string(),
            column: None,
            r,
            level: Some(level),
            method,
            value: Some(value),
            stderr,
            applicable: true,
            multiplier,
            reads: None,
        }
    }
}

/// Cells of table `which` (1 to 5).
pub fn run_table(which: u8, opts: &TableOptions) -> Result<Vec<TableCell>> {
    match which {
        1 => uniform_table(1, 10_000, 1e-3, opts),
        2 => uniform_table(2, 100_000, 1e-4, opts),
        3 => truncated_normal_table(opts),
        4 => triangle_table(opts),
        5 => coverage_table(opts),
        _ => Err(Error::Config(format!(
            "no table {which}; tables are numbered 1 to 5"
        ))),
    }
}

fn simulated_rows(
    table: u8,
    row: &str,
    model: &DensityModel,
    n: u64,
    r: u32,
    boundary: Boundary,
    multiplier: f64,
    opts: &TableOptions,
) -> Result<Vec<TableCell>> {
    let spec = SimulationSpec::new(
        SpacingQuery::max(n, r)?,
        model.clone(),
        boundary,
        opts.simulation_replicates,
        opts.seed_for(table, row, r),
    )?;
    let ecdf = Ecdf::from_sorted(simulate_kth_max_rspacing(&spec, &opts.runner)?)?;
    ecdf_rows(table, row, r, &ecdf, multiplier)
}

fn ecdf_rows(table: u8, row: &str, r: u32, ecdf: &Ecdf, multiplier: f64) -> Result<Vec<TableCell>> {
    let qs = ecdf.quantiles(&LEVELS)?;
    LEVELS
        .iter()
        .zip(qs)
        .map(|(&p, q)| {
            let se = ecdf.quantile_stderr(p)?;
            Ok(TableCell::quantile(
                table,
                row,
                r,
                p,
                Method::MonteCarlo,
                q,
                Some(se),
                multiplier,
            ))
        })
        .collect()
}

fn estimate_rows(
    table: u8,
    row: &str,
    r: u32,
    est: &CdfEstimate,
    multiplier: f64,
) -> Result<Vec<TableCell>> {
    LEVELS
        .iter()
        .map(|&p| {
            let q = est.quantile(p)?;
            let se = quantile_stderr(est, p)?;
            Ok(TableCell::quantile(
                table,
                row,
                r,
                p,
                est.method(),
                q,
                se,
                multiplier,
            ))
        })
        .collect()
}

fn uniform_table(
    table: u8,
    n: u64,
    multiplier: f64,
    opts: &TableOptions,
) -> Result<Vec<TableCell>> {
    let nf = n as f64;
    let uniform = DensityModel::unit_uniform();
    let mut cells = Vec::new();
    for r in TABLE_ORDERS {
        cells.extend(simulated_rows(
            table,
            "simulation",
            &uniform,
            n,
            r,
            Boundary::WithEnds,
            multiplier,
            opts,
        )?);
        let gamma_max = simulate_gamma_max(
            n,
            r,
            opts.simulation_replicates,
            opts.seed_for(table, "gamma-maximum", r),
            &opts.runner,
        )?;
        cells.extend(ecdf_rows(
            table,
            "gamma-maximum",
            r,
            &Ecdf::from_sorted(gamma_max)?,
            multiplier,
        )?);
        cells.extend(estimate_rows(
            table,
            "gamma-tail",
            r,
            &gamma_approx_estimate(nf, r)?,
            multiplier,
        )?);
        for &p in &LEVELS {
            let q = quantile_gumbel_classic(nf, r, p)?;
            cells.push(TableCell::quantile(
                table,
                "gumbel-classic",
                r,
                p,
                Method::GumbelClassic,
                q,
                None,
                multiplier,
            ));
        }
    }
    Ok(cells)
}

/// The truncated normal location model of the third table.
pub fn table3_model() -> DensityModel {
    DensityModel::truncated_normal(0.5, 1.0, 0.0, 1.0).expect("valid truncated normal")
}

fn truncated_normal_table(opts: &TableOptions) -> Result<Vec<TableCell>> {
    let table = 3;
    let n = 10_000;
    let nf = n as f64;
    let multiplier = 1e-3;
    let model = table3_model();
    let quad = QuadratureSpec::default();
    let mut cells = Vec::new();
    for r in TABLE_ORDERS {
        cells.extend(simulated_rows(
            table,
            "simulation",
            &model,
            n,
            r,
            Boundary::WithEnds,
            multiplier,
            opts,
        )?);
        let calibration = UniformCalibration::simulate(
            n,
            r,
            opts.calibration_replicates,
            opts.seed_for(table, "calibrated-integral", r),
            &opts.runner,
        )?;
        let calibrated = density_integral_estimate(
            &model,
            nf,
            TailFamily::Calibrated(Arc::new(calibration)),
            quad,
            false,
        )?;
        cells.extend(estimate_rows(
            table,
            "calibrated-integral",
            r,
            &calibrated,
            multiplier,
        )?);
        let asymptotic =
            density_integral_estimate(&model, nf, TailFamily::asymptotic(r)?, quad, false)?;
        cells.extend(estimate_rows(
            table,
            "density-integral",
            r,
            &asymptotic,
            multiplier,
        )?);
    }
    Ok(cells)
}

fn triangle_table(opts: &TableOptions) -> Result<Vec<TableCell>> {
    let table = 4;
    let n = 10_000;
    let multiplier = 1e-2;
    let model = DensityModel::triangle();
    let mut cells = Vec::new();
    for r in TABLE_ORDERS {
        cells.extend(simulated_rows(
            table,
            "simulation",
            &model,
            n,
            r,
            Boundary::Interior,
            multiplier,
            opts,
        )?);
        let limit = SymmetricLimit::build(
            &model,
            n,
            r,
            1,
            opts.limit_replicates,
            opts.seed_for(table, "symmetric-limit", r),
            &opts.runner,
        )?;
        cells.extend(estimate_rows(
            table,
            "symmetric-limit",
            r,
            &limit.to_estimate(),
            multiplier,
        )?);
        // the exponential-integral form exists only for r = 1, and the
        // triangle violates its positivity requirement anyway
        if r == 1 {
            let forced = barbe_estimate(&model, n as f64, QuadratureSpec::default(), true)?;
            let mut rows = estimate_rows(table, "barbe", r, &forced, multiplier)?;
            rows.iter_mut().for_each(|c| c.applicable = false);
            cells.extend(rows);
        } else {
            cells.extend(LEVELS.iter().map(|&p| TableCell {
                value: None,
                applicable: false,
                ..TableCell::quantile(table, "barbe", r, p, Method::Barbe, 0.0, None, multiplier)
            }));
        }
    }
    Ok(cells)
}

/// Location models of the read-count table, with their row labels.
pub fn coverage_models() -> Vec<(String, DensityModel)> {
    vec![
        ("uniform".into(), DensityModel::unit_uniform()),
        (
            "truncated-normal-sd1".into(),
            DensityModel::truncated_normal(0.5, 1.0, 0.0, 1.0).expect("valid truncated normal"),
        ),
        (
            "truncated-normal-sd0.25".into(),
            DensityModel::truncated_normal(0.5, 0.25, 0.0, 1.0).expect("valid truncated normal"),
        ),
    ]
}

/// Read models of the read-count table, with their column labels.
pub fn coverage_read_models() -> Vec<(String, ReadModel)> {
    let mut cols: Vec<(String, ReadModel)> = [100.0, 200.0, 300.0]
        .into_iter()
        .map(|l| {
            (
                format!("L={l}"),
                ReadModel::fixed(GENOME_LENGTH, OVERLAP, l),
            )
        })
        .collect();
    cols.push((
        "L~N(300;50)".into(),
        ReadModel::normal(GENOME_LENGTH, OVERLAP, 300.0, 50.0, LengthCoupling::PerRead),
    ));
    cols
}

fn coverage_table(opts: &TableOptions) -> Result<Vec<TableCell>> {
    let mut cells = Vec::new();
    for (row, model) in coverage_models() {
        for r in COVERAGE_ORDERS {
            for (column, reads) in coverage_read_models() {
                let plan = CoveragePlan::new(reads, r, TARGET_PROB, model.clone());
                let method = plan.resolved_method();
                let req = required_reads(&plan, &opts.runner)?;
                cells.push(TableCell {
                    table: 5,
                    row: row.clone(),
                    column: Some(column),
                    r,
                    level: None,
                    method,
                    value: Some(req.fold as f64),
                    stderr: None,
                    applicable: true,
                    multiplier: 1.0,
                    reads: Some(req.n_min),
                });
            }
        }
    }
    Ok(cells)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn opt_sci(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

/// Writes cells as CSV with a header row. Folds and read counts are
/// written as integers, everything else in 6-digit scientific notation.
pub fn write_cells_csv<W: Write>(cells: &[TableCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "table",
        "row",
        "column",
        "r",
        "level",
        "method",
        "value",
        "stderr",
        "applicable",
        "multiplier",
        "reads",
    ])
    .map_err(csv_err)?;
    for c in cells {
        let value = match (c.table, c.value) {
            (5, Some(v)) => format!("{v:.0}"),
            (_, v) => opt_sci(v),
        };
        w.write_record([
            c.table.to_string(),
            c.row.clone(),
            c.column.clone().unwrap_or_default(),
            c.r.to_string(),
            c.level.map(|l| l.to_string()).unwrap_or_default(),
            c.method.tag().to_string(),
            value,
            opt_sci(c.stderr),
            c.applicable.to_string(),
            sci(c.multiplier),
            c.reads.map(|n| n.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One point of a CDF comparison series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub figure: u8,
    /// Sample size of the panel.
    pub n: u64,
    pub r: u32,
    pub series: String,
    pub method: Method,
    pub x: f64,
    pub cdf: f64,
    pub stderr: Option<f64>,
}

/// Grid points per series.
pub const SERIES_POINTS: usize = 101;

fn push_series(
    out: &mut Vec<SeriesPoint>,
    figure: u8,
    n: u64,
    r: u32,
    series: &str,
    est: &CdfEstimate,
    grid: &[f64],
) {
    out.extend(grid.iter().map(|&x| SeriesPoint {
        figure,
        n,
        r,
        series: series.to_string(),
        method: est.method(),
        x,
        cdf: est.eval(x),
        stderr: est.stderr(x),
    }));
}

fn grid_between(lo: f64, hi: f64) -> Vec<f64> {
    (0..SERIES_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (SERIES_POINTS - 1) as f64)
        .collect()
}

/// CDF series of figure `which`: 1 compares the uniform simulation with the
/// gamma-tail and classic Gumbel approximations at `r = 5`, `n = 10^4, 10^5`;
/// 2 compares the triangle simulation with the symmetric limit and the
/// exponential-integral form at `r = 1`, `n = 10^4`.
pub fn run_figure(which: u8, opts: &TableOptions) -> Result<Vec<SeriesPoint>> {
    let mut out = Vec::new();
    match which {
        1 => {
            let r = 5;
            for n in [10_000u64, 100_000] {
                let spec = SimulationSpec::new(
                    SpacingQuery::max(n, r)?,
                    DensityModel::unit_uniform(),
                    Boundary::WithEnds,
                    opts.simulation_replicates,
                    opts.seed_for(10 + which, "simulation", n as u32),
                )?;
                let ecdf = Ecdf::from_sorted(simulate_kth_max_rspacing(&spec, &opts.runner)?)?;
                let gamma = gamma_approx_estimate(n as f64, r)?;
                let gumbel = gumbel_classic_estimate(n as f64, r)?;
                let lo = gumbel.quantile(0.001)?.min(gamma.quantile(0.001)?);
                let hi = gumbel.quantile(0.999)?.max(gamma.quantile(0.999)?);
                let grid = grid_between(lo, hi);
                push_series(
                    &mut out,
                    which,
                    n,
                    r,
                    "simulation",
                    &ecdf.to_estimate(Method::MonteCarlo),
                    &grid,
                );
                push_series(&mut out, which, n, r, "gamma-tail", &gamma, &grid);
                push_series(&mut out, which, n, r, "gumbel-classic", &gumbel, &grid);
            }
        }
        2 => {
            let (n, r) = (10_000u64, 1);
            let model = DensityModel::triangle();
            let spec = SimulationSpec::new(
                SpacingQuery::max(n, r)?,
                model.clone(),
                Boundary::Interior,
                opts.simulation_replicates,
                opts.seed_for(10 + which, "simulation", r),
            )?;
            let ecdf = Ecdf::from_sorted(simulate_kth_max_rspacing(&spec, &opts.runner)?)?;
            let limit = SymmetricLimit::build(
                &model,
                n,
                r,
                1,
                opts.limit_replicates,
                opts.seed_for(10 + which, "symmetric-limit", r),
                &opts.runner,
            )?
            .to_estimate();
            let barbe = barbe_estimate(&model, n as f64, QuadratureSpec::default(), true)?;
            let grid = grid_between(0.0, 1.25 * barbe.quantile(0.95)?);
            push_series(
                &mut out,
                which,
                n,
                r,
                "simulation",
                &ecdf.to_estimate(Method::MonteCarlo),
                &grid,
            );
            push_series(&mut out, which, n, r, "symmetric-limit", &limit, &grid);
            push_series(&mut out, which, n, r, "barbe", &barbe, &grid);
        }
        _ => {
            return Err(Error::Config(format!(
                "no figure {which}; figures are numbered 1 and 2"
            )))
        }
    }
    Ok(out)
}

pub fn write_series_csv<W: Write>(points: &[SeriesPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["figure", "n", "r", "series", "method", "x", "cdf", "stderr"])
        .map_err(csv_err)?;
    for p in points {
        w.write_record([
            p.figure.to_string(),
            p.n.to_string(),
            p.r.to_string(),
            p.series.clone(),
            p.method.tag().to_string(),
            sci(p.x),
            sci(p.cdf),
            opt_sci(p.stderr),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
