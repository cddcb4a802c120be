//! The convergence-study harness: the experiment grid, deterministic
//! per-cell seeding, the evaluation-budget guard, and slope fitting for
//! the resulting log2-error curves.

use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use medianqmc::estimator::{replicate_means, EstimateResult, EstimatorConfig};
use medianqmc::netgen::{DirectionNumbers, GeneratingMatrixSet, RandomizationScheme, SchemeKind};
use medianqmc::rng::SeedTree;
use medianqmc::testfns::ProductTestFunction;
use rayon::prelude::*;

/// Labels a result row. `Std` is not a randomization of its own: it is the
/// plain mean over the very replicates `Rls` reduces by median, so the two
/// always share a compute cell. Variant order gives the canonical row
/// order CRD < RLS < STD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentScheme {
    Crd,
    Rls,
    Std,
}

impl ExperimentScheme {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentScheme::Crd => "CRD",
            ExperimentScheme::Rls => "RLS",
            ExperimentScheme::Std => "STD",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().to_ascii_uppercase().as_str() {
            "CRD" => Ok(ExperimentScheme::Crd),
            "RLS" => Ok(ExperimentScheme::Rls),
            "STD" => Ok(ExperimentScheme::Std),
            other => bail!("unknown scheme {other:?} (expected CRD, RLS or STD)"),
        }
    }

    /// Replicate-sharing group. RLS and STD hash to the same group so they
    /// draw identical replicates; CRD gets its own stream.
    fn group(self) -> u64 {
        match self {
            ExperimentScheme::Rls | ExperimentScheme::Std => 0,
            ExperimentScheme::Crd => 1,
        }
    }
}

pub const DEFAULT_MASTER_SEED: u64 = 1;

/// Default cap on total coordinate evaluations, as a refuse-don't-surprise
/// guard: the reduced default grid costs ~2e8, the full grid ~3.3e10 and
/// must be let through explicitly with --budget.
pub const DEFAULT_BUDGET: u128 = 10_000_000_000;

/// The study grid. Defaults reproduce the reduced convergence study; the
/// extended cells (s = 1000 or m ≥ 13) stay excluded until
/// `include_extended` is set.
#[derive(Clone, Debug)]
pub struct ExperimentGrid {
    pub s_list: Vec<u32>,
    pub gamma_list: Vec<f64>,
    pub alpha_list: Vec<u32>,
    pub m_min: u32,
    pub m_max: u32,
    pub r: u32,
    pub schemes: Vec<ExperimentScheme>,
    pub master_seed: u64,
    /// Known mean of the test integrand; abs_error is measured against it.
    pub reference_mean: f64,
    pub budget: u128,
    pub include_extended: bool,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        ExperimentGrid {
            s_list: vec![10, 100, 1000],
            gamma_list: vec![2.0, 3.0, 4.0],
            alpha_list: vec![0, 1],
            m_min: 1,
            m_max: 16,
            r: 10,
            schemes: vec![
                ExperimentScheme::Crd,
                ExperimentScheme::Rls,
                ExperimentScheme::Std,
            ],
            master_seed: DEFAULT_MASTER_SEED,
            reference_mean: 1.0,
            budget: DEFAULT_BUDGET,
            include_extended: false,
        }
    }
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.s_list.is_empty(), "empty dimension list");
        ensure!(!self.gamma_list.is_empty(), "empty gamma list");
        ensure!(!self.alpha_list.is_empty(), "empty alpha list");
        ensure!(!self.schemes.is_empty(), "empty scheme list");
        ensure!(self.s_list.iter().all(|&s| s >= 1), "dimensions are 1-based");
        ensure!(
            self.gamma_list.iter().all(|&g| g.is_finite() && g >= 0.0),
            "gamma must be finite and nonnegative"
        );
        ensure!(
            self.alpha_list.iter().all(|&a| a <= 1),
            "smoothness alpha must be 0 or 1"
        );
        ensure!(
            self.m_min >= 1 && self.m_min <= self.m_max && self.m_max <= 32,
            "need 1 <= m_min <= m_max <= 32, have {}..{}",
            self.m_min,
            self.m_max
        );
        ensure!(self.r >= 1, "r must be at least 1");
        ensure!(self.budget >= 1, "budget must be positive");
        Ok(())
    }

    /// Cells with s = 1000 or m >= 13 belong to the multi-hour extended
    /// grid and are skipped unless explicitly included.
    fn is_extended(&self, s: u32, m: u32) -> bool {
        s >= 1000 || m >= 13
    }

    fn replicates(&self) -> u64 {
        2 * self.r as u64 - 1
    }
}

/// One line of the study: a single reduced estimate and its error against
/// the known mean. `seed` is the cell seed actually used (shared between
/// the RLS and STD rows of a cell).
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scheme: ExperimentScheme,
    pub s: u32,
    pub gamma: f64,
    pub alpha: u32,
    pub m: u32,
    pub r: u32,
    pub seed: u64,
    pub estimate: f64,
    pub abs_error: f64,
}

/// Canonical row order: scheme (CRD < RLS < STD), then s, gamma, alpha, m.
pub fn canonical_sort(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.s.cmp(&b.s))
            .then(a.gamma.total_cmp(&b.gamma))
            .then(a.alpha.cmp(&b.alpha))
            .then(a.m.cmp(&b.m))
    });
}

/// The seed of one compute cell, derived by keyed hashing so cells are
/// independent of grid iteration order and of which other cells run.
pub fn cell_seed(master_seed: u64, group: u64, s: u32, gamma: f64, alpha: u32, m: u32) -> u64 {
    SeedTree::new(master_seed)
        .child(group)
        .child(s as u64)
        .child(gamma.to_bits())
        .child(alpha as u64)
        .child(m as u64)
        .key()
}

/// A unit of work: one (group, s, gamma, alpha, m) combination. A single
/// matrix-group cell can emit both the RLS and the STD row.
#[derive(Clone, Copy, Debug)]
struct ComputeCell {
    group: u64,
    s: u32,
    gamma: f64,
    alpha: u32,
    m: u32,
    emit_rls: bool,
    emit_std: bool,
}

impl ComputeCell {
    fn cost(&self, replicates: u64) -> u128 {
        replicates as u128 * (1u128 << self.m) * self.s as u128
    }
}

fn compute_cells(grid: &ExperimentGrid) -> Vec<ComputeCell> {
    let want_rls = grid.schemes.contains(&ExperimentScheme::Rls);
    let want_std = grid.schemes.contains(&ExperimentScheme::Std);
    let want_crd = grid.schemes.contains(&ExperimentScheme::Crd);
    let mut cells = Vec::new();
    for &s in &grid.s_list {
        for &gamma in &grid.gamma_list {
            for &alpha in &grid.alpha_list {
                for m in grid.m_min..=grid.m_max {
                    if !grid.include_extended && grid.is_extended(s, m) {
                        continue;
                    }
                    if want_rls || want_std {
                        cells.push(ComputeCell {
                            group: ExperimentScheme::Rls.group(),
                            s,
                            gamma,
                            alpha,
                            m,
                            emit_rls: want_rls,
                            emit_std: want_std,
                        });
                    }
                    if want_crd {
                        cells.push(ComputeCell {
                            group: ExperimentScheme::Crd.group(),
                            s,
                            gamma,
                            alpha,
                            m,
                            emit_rls: false,
                            emit_std: false,
                        });
                    }
                }
            }
        }
    }
    cells
}

/// The replicate means behind one cell, kept only on request (debug
/// output; lets tests confirm RLS and STD reduce the same values).
#[derive(Clone, Debug)]
pub struct ReplicateRecord {
    pub group_label: &'static str,
    pub s: u32,
    pub gamma: f64,
    pub alpha: u32,
    pub m: u32,
    pub seed: u64,
    pub values: Vec<f64>,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub cells: usize,
    pub cost: u128,
    pub replicates: Vec<ReplicateRecord>,
}

fn run_cell(
    cell: &ComputeCell,
    grid: &ExperimentGrid,
    table: &DirectionNumbers,
    keep_replicates: bool,
) -> Result<(Vec<ResultRow>, Option<ReplicateRecord>)> {
    let seed = cell_seed(grid.master_seed, cell.group, cell.s, cell.gamma, cell.alpha, cell.m);
    let scheme = if cell.group == 0 {
        let base = GeneratingMatrixSet::sobol(cell.s, cell.m, table)
            .with_context(|| format!("building the base net for s={} m={}", cell.s, cell.m))?;
        RandomizationScheme::Rls(Arc::new(base))
    } else {
        RandomizationScheme::Crd
    };
    let config = EstimatorConfig {
        scheme,
        s: cell.s,
        m: cell.m,
        r: grid.r,
        master_seed: seed,
    };
    let f = ProductTestFunction::new(cell.s, cell.gamma, cell.alpha);
    let values = replicate_means(&|x: &[f64]| f.eval(x), &config)?;
    let eval_count = config.eval_count();

    let row = |label: ExperimentScheme, est: &EstimateResult| ResultRow {
        scheme: label,
        s: cell.s,
        gamma: cell.gamma,
        alpha: cell.alpha,
        m: cell.m,
        r: grid.r,
        seed,
        estimate: est.value,
        abs_error: (est.value - grid.reference_mean).abs(),
    };

    let mut rows = Vec::with_capacity(2);
    if cell.group == 0 {
        if cell.emit_rls {
            let est = EstimateResult::median_of(values.clone(), SchemeKind::Rls, eval_count);
            rows.push(row(ExperimentScheme::Rls, &est));
        }
        if cell.emit_std {
            let est = EstimateResult::mean_of(values.clone(), SchemeKind::Rls, eval_count);
            rows.push(row(ExperimentScheme::Std, &est));
        }
    } else {
        let est = EstimateResult::median_of(values.clone(), SchemeKind::Crd, eval_count);
        rows.push(row(ExperimentScheme::Crd, &est));
    }

    let record = keep_replicates.then_some(ReplicateRecord {
        group_label: if cell.group == 0 { "RLS/STD" } else { "CRD" },
        s: cell.s,
        gamma: cell.gamma,
        alpha: cell.alpha,
        m: cell.m,
        seed,
        values,
    });
    Ok((rows, record))
}

/// Total coordinate evaluations the grid would perform. Shared RLS/STD
/// cells are counted once — they are one computation.
pub fn grid_cost(grid: &ExperimentGrid) -> u128 {
    let reps = grid.replicates();
    compute_cells(grid).iter().map(|c| c.cost(reps)).sum()
}

/// Runs the grid and returns canonically ordered rows. Refuses grids whose
/// computed cost exceeds the budget instead of silently churning for
/// hours. `threads` bounds the rayon pool; `None` uses the default pool.
pub fn run_experiment(grid: &ExperimentGrid, threads: Option<usize>) -> Result<Vec<ResultRow>> {
    Ok(run_experiment_detailed(grid, threads, false)?.rows)
}

pub fn run_experiment_detailed(
    grid: &ExperimentGrid,
    threads: Option<usize>,
    keep_replicates: bool,
) -> Result<ExperimentOutput> {
    grid.validate()?;
    let table = crate::dirnums::direction_numbers()?;
    let cells = compute_cells(grid);
    let reps = grid.replicates();
    let cost: u128 = cells.iter().map(|c| c.cost(reps)).sum();
    if cost > grid.budget {
        bail!(
            "grid needs {cost} coordinate evaluations but the budget is {}; \
             raise --budget or shrink the grid",
            grid.budget
        );
    }

    let run_all = || -> Result<Vec<(Vec<ResultRow>, Option<ReplicateRecord>)>> {
        cells
            .par_iter()
            .map(|cell| run_cell(cell, grid, table, keep_replicates))
            .collect()
    };
    let outputs = match threads {
        Some(n) => {
            ensure!(n >= 1, "thread count must be positive");
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building the thread pool")?
                .install(run_all)?
        }
        None => run_all()?,
    };

    let mut rows = Vec::new();
    let mut replicates = Vec::new();
    for (cell_rows, record) in outputs {
        rows.extend(cell_rows);
        replicates.extend(record);
    }
    canonical_sort(&mut rows);
    replicates.sort_by(|a, b| {
        a.group_label
            .cmp(b.group_label)
            .then(a.s.cmp(&b.s))
            .then(a.gamma.total_cmp(&b.gamma))
            .then(a.alpha.cmp(&b.alpha))
            .then(a.m.cmp(&b.m))
    });
    Ok(ExperimentOutput {
        rows,
        cells: cells.len(),
        cost,
        replicates,
    })
}

/// One estimate outside the grid machinery, seeded exactly as the matching
/// grid cell would be, so `estimate` and `experiment` agree digit-for-digit.
/// Returns the row and the replicate means it was reduced from.
pub fn estimate_cell(
    scheme: ExperimentScheme,
    s: u32,
    gamma: f64,
    alpha: u32,
    m: u32,
    r: u32,
    master_seed: u64,
) -> Result<(ResultRow, Vec<f64>)> {
    let mut grid = ExperimentGrid {
        s_list: vec![s],
        gamma_list: vec![gamma],
        alpha_list: vec![alpha],
        m_min: m,
        m_max: m,
        r,
        schemes: vec![scheme],
        master_seed,
        include_extended: true,
        ..ExperimentGrid::default()
    };
    grid.budget = grid_cost(&grid).max(1);
    let output = run_experiment_detailed(&grid, None, true)?;
    let row = output.rows.into_iter().next().expect("one cell, one row");
    let values = output.replicates.into_iter().next().expect("one record").values;
    Ok((row, values))
}

#[derive(Clone, Copy, Debug)]
pub struct SlopeFit {
    pub slope: f64,
    pub points_used: usize,
    pub zeros_excluded: usize,
}

/// Least-squares slope of log2(abs_error) against m over rows with
/// m in [m_lo, m_hi]. Zero errors have no logarithm and are excluded
/// (reported in `zeros_excluded`); fewer than 3 usable points is an error,
/// not a fit.
pub fn fit_slope(rows: &[ResultRow], m_lo: u32, m_hi: u32) -> Result<SlopeFit> {
    ensure!(m_lo <= m_hi, "empty m range {m_lo}..{m_hi}");
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut zeros = 0usize;
    for row in rows {
        if row.m < m_lo || row.m > m_hi {
            continue;
        }
        if row.abs_error == 0.0 {
            zeros += 1;
            continue;
        }
        points.push((row.m as f64, row.abs_error.log2()));
    }
    if points.len() < 3 {
        bail!(
            "slope fit needs at least 3 points with nonzero error in m={m_lo}..={m_hi}, \
             have {} ({zeros} zero-error points excluded)",
            points.len()
        );
    }
    let n = points.len() as f64;
    let mean_x: f64 = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y: f64 = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    ensure!(sxx > 0.0, "slope fit needs at least two distinct m values");
    Ok(SlopeFit {
        slope: sxy / sxx,
        points_used: points.len(),
        zeros_excluded: zeros,
    })
}
