use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use medianqmc_cli::experiment::{
    fit_slope, run_experiment_detailed, ExperimentGrid, ExperimentScheme, ResultRow,
    DEFAULT_MASTER_SEED,
};
use medianqmc_cli::{bound, config, dirnums, emit, verify};

#[derive(Parser)]
#[command(
    name = "medianqmc",
    version,
    about = "Median-of-means quasi-Monte Carlo integration on randomized digital nets",
    after_help = "Direction numbers: the Joe-Kuo table is embedded; set MEDIANQMC_DIRNUMS \
                  to a file in the same format to override it."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print one randomized net as CSV (columns i,j,code_hex,x_float)
    Points {
        /// Number of dimensions
        #[arg(long, default_value_t = 2)]
        s: u32,
        /// log2 of the number of points
        #[arg(long, default_value_t = 4)]
        m: u32,
        /// rls | crd | shift-only | base (base = the unrandomized net)
        #[arg(long, default_value = "rls")]
        scheme: String,
        #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
        seed: u64,
        /// Write to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One median-of-means estimate of the product test integrand
    Estimate {
        /// CRD | RLS | STD (STD = plain mean over the RLS replicates)
        #[arg(long, default_value = "RLS")]
        scheme: String,
        #[arg(long, default_value_t = 10)]
        s: u32,
        /// Weight decay of the integrand: j-th coordinate weight j^-gamma
        #[arg(long, default_value_t = 3.0)]
        gamma: f64,
        /// Integrand smoothness: 0 or 1
        #[arg(long, default_value_t = 0)]
        alpha: u32,
        /// log2 of points per replicate
        #[arg(long, default_value_t = 8)]
        m: u32,
        /// Median fan-in parameter; 2r-1 replicates are run
        #[arg(long, default_value_t = 10)]
        r: u32,
        #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
        seed: u64,
        /// Also print each replicate mean
        #[arg(long)]
        replicates: bool,
    },
    /// Run the convergence-study grid; rows go to --out-csv or stdout
    Experiment(Box<ExperimentArgs>),
    /// Squared-error certificates and dimension-independence diagnostics
    Bound(Box<BoundArgs>),
    /// Self-check suites; exit status reflects the verdict
    Verify {
        /// small = exhaustive checks at tiny precision; full adds Monte Carlo
        #[arg(long, default_value = "small")]
        tier: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat TOML config; flags given here override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for the whole grid
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of CRD,RLS,STD
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Comma-separated dimension list
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<u32>>,
    /// Comma-separated weight-decay list
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Comma-separated smoothness list (values 0 or 1)
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<u32>>,
    #[arg(long)]
    m_min: Option<u32>,
    #[arg(long)]
    m_max: Option<u32>,
    /// Median fan-in parameter; 2r-1 replicates per cell
    #[arg(long)]
    r: Option<u32>,
    /// Write result rows here instead of stdout
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Directory for per-(gamma,alpha,s) SVG charts and gnuplot .dat files
    #[arg(long)]
    out_svg: Option<PathBuf>,
    /// Include the extended cells (s = 1000 or m >= 13); the full default
    /// grid then costs ~3.3e10 coordinate evaluations and needs --budget
    #[arg(long)]
    full: bool,
    /// Rayon thread count (default: one per core)
    #[arg(long)]
    threads: Option<usize>,
    /// Coordinate-evaluation cap; grids costing more are refused
    #[arg(long)]
    budget: Option<u64>,
    /// Debug: write every cell's raw replicate means to this CSV
    #[arg(long)]
    emit_replicates: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// rls | crd | shift-only
    #[arg(long, default_value = "rls")]
    scheme: String,
    #[arg(long, default_value_t = 10)]
    s: u32,
    /// Power-law weight decay: gamma_u = prod j^-gamma
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    alpha: u32,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Net quality order of the scheme (RLS is order 1)
    #[arg(long, default_value_t = 1)]
    d: u32,
    /// Interpolation knob in (0,1]; default 1/2
    #[arg(long)]
    theta: Option<f64>,
    /// Second interpolation knob in (0,1); default 1/2
    #[arg(long)]
    theta_prime: Option<f64>,
    #[arg(long, default_value_t = 1)]
    m_min: u32,
    #[arg(long, default_value_t = 16)]
    m_max: u32,
    /// Median fan-in parameter; the bound fails with probability 2^-r
    #[arg(long, default_value_t = 10)]
    r: u32,
    /// Variation norm the certificate scales with
    #[arg(long, default_value_t = 1.0)]
    f_norm: f64,
    /// Use the Niederreiter t-value bound (+1) as per-coordinate offsets
    /// instead of idealized zero offsets
    #[arg(long)]
    niederreiter_t: bool,
    /// Force a certificate branch: crd | large-d | small-d
    #[arg(long)]
    kind: Option<String>,
    /// Also write the per-m rows as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Points {
            s,
            m,
            scheme,
            seed,
            out,
        } => {
            let csv = emit::points_csv(&scheme, s, m, seed)?;
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(())
        }
        Command::Estimate {
            scheme,
            s,
            gamma,
            alpha,
            m,
            r,
            seed,
            replicates,
        } => cmd_estimate(&scheme, s, gamma, alpha, m, r, seed, replicates),
        Command::Experiment(args) => cmd_experiment(*args),
        Command::Bound(args) => cmd_bound(&args),
        Command::Verify { tier, seed } => cmd_verify(&tier, seed),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    scheme: &str,
    s: u32,
    gamma: f64,
    alpha: u32,
    m: u32,
    r: u32,
    seed: u64,
    replicates: bool,
) -> Result<()> {
    let scheme = ExperimentScheme::parse(scheme)?;
    let (row, values) = medianqmc_cli::experiment::estimate_cell(scheme, s, gamma, alpha, m, r, seed)?;
    println!("scheme    {}", row.scheme.label());
    println!("cell      s={s} gamma={gamma} alpha={alpha} m={m} r={r} (2r-1 = {} replicates)", values.len());
    println!("seed      master {seed}, cell {}", row.seed);
    println!("estimate  {:.16e}", row.estimate);
    println!("abs_error {:.16e} (known mean 1)", row.abs_error);
    if replicates {
        for (i, v) in values.iter().enumerate() {
            println!("replicate {i:>3} {v:.16e}");
        }
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let file_layer = match &args.config {
        Some(path) => config::load_config(path)?,
        None => Default::default(),
    };
    let schemes = args
        .schemes
        .map(|names| {
            names
                .iter()
                .map(|n| ExperimentScheme::parse(n))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let flag_layer = config::GridOverrides {
        master_seed: args.seed,
        s_list: args.s,
        gamma_list: args.gamma,
        alpha_list: args.alpha,
        m_min: args.m_min,
        m_max: args.m_max,
        r: args.r,
        schemes,
        budget: args.budget.map(u128::from),
        include_extended: args.full.then_some(true),
        threads: args.threads,
        out_csv: args.out_csv,
        out_svg: args.out_svg,
    };
    let merged = flag_layer.over(file_layer);
    let mut grid = ExperimentGrid::default();
    merged.apply(&mut grid);

    let output = run_experiment_detailed(&grid, merged.threads, args.emit_replicates.is_some())?;
    eprintln!(
        "{} rows from {} cells, {} coordinate evaluations, master seed {}",
        output.rows.len(),
        output.cells,
        output.cost,
        grid.master_seed
    );

    match &merged.out_csv {
        Some(path) => {
            emit::emit_csv(&output.rows, path)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{}", emit::format_csv(&output.rows)?),
    }
    if let Some(dir) = &merged.out_svg {
        let written = emit::emit_plots(&output.rows, dir)?;
        eprintln!("wrote {} plot files under {}", written.len(), dir.display());
    }
    if let Some(path) = &args.emit_replicates {
        std::fs::write(path, emit::format_replicates_csv(&output.replicates)?)
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote raw replicates to {}", path.display());
    }
    print_slopes(&output.rows);
    Ok(())
}

/// Fitted log2-error slope per curve, on stderr: the study's headline
/// numbers without leaving the terminal.
fn print_slopes(rows: &[ResultRow]) {
    let mut curves: Vec<(ExperimentScheme, u32, f64, u32)> = rows
        .iter()
        .map(|row| (row.scheme, row.s, row.gamma, row.alpha))
        .collect();
    curves.dedup();
    eprintln!("slopes (least squares of log2 abs_error on m):");
    for (scheme, s, gamma, alpha) in curves {
        let curve: Vec<ResultRow> = rows
            .iter()
            .filter(|row| {
                row.scheme == scheme && row.s == s && row.gamma == gamma && row.alpha == alpha
            })
            .cloned()
            .collect();
        let m_lo = curve.iter().map(|r| r.m).min().unwrap_or(1);
        let m_hi = curve.iter().map(|r| r.m).max().unwrap_or(1);
        match fit_slope(&curve, m_lo, m_hi) {
            Ok(fit) => {
                let zeros = if fit.zeros_excluded > 0 {
                    format!(" ({} zero-error rows excluded)", fit.zeros_excluded)
                } else {
                    String::new()
                };
                eprintln!(
                    "  {} s={s} gamma={gamma} alpha={alpha}: {:+.3} over m={m_lo}..{m_hi}, \
                     {} points{zeros}",
                    scheme.label(),
                    fit.slope,
                    fit.points_used,
                );
            }
            Err(err) => eprintln!(
                "  {} s={s} gamma={gamma} alpha={alpha}: no fit ({err})",
                scheme.label()
            ),
        }
    }
}

fn cmd_bound(args: &BoundArgs) -> Result<()> {
    let request = bound::BoundRequest {
        scheme: bound::parse_scheme_kind(&args.scheme)?,
        s: args.s,
        gamma: args.gamma,
        alpha: args.alpha,
        lambda: args.lambda,
        d: args.d,
        theta: args.theta,
        theta_prime: args.theta_prime,
        m_min: args.m_min,
        m_max: args.m_max,
        r: args.r,
        f_norm: args.f_norm,
        niederreiter_t: args.niederreiter_t,
        kind_override: args.kind.as_deref().map(bound::parse_kind).transpose()?,
    };
    let report = bound::evaluate_bounds(&request)?;
    print!("{}", bound::bound_text(&request, &report));
    if let Some(path) = &args.csv {
        std::fs::write(path, bound::bound_csv(&request, &report))
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_verify(tier: &str, seed: u64) -> Result<()> {
    let tier = verify::Tier::parse(tier)?;
    // Fail fast (and loudly) if a direction-number override is unusable.
    dirnums::direction_numbers()?;
    let report = verify::run_verify(tier, seed)?;
    for check in &report.checks {
        let verdict = if check.passed { "PASS" } else { "FAIL" };
        println!("{verdict}  {:<28} {}", check.name, check.detail);
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        println!("{failed} of {} checks failed", report.checks.len());
        std::process::exit(1);
    }
    println!("all {} checks passed (seed {seed})", report.checks.len());
    Ok(())
}
