//! Harness tests: CSV round-trip, determinism and thread invariance,
//! replicate sharing between the median and mean reductions, slope
//! fitting, plot emission, config layering, the budget guard, and smoke
//! tests of the installed binary.

use std::collections::HashSet;
use std::process::Command;

use medianqmc::estimator::EstimateResult;
use medianqmc::netgen::{randomize_with_precision, RandomizationScheme, SchemeKind};
use medianqmc::rng::SeedTree;
use medianqmc::walsh::{s_sign, verify_error_decomposition, z_indicator, FiniteSpectrum, WalshIndex};
use medianqmc_cli::config::{parse_config, GridOverrides};
use medianqmc_cli::emit::{
    emit_csv, emit_plots, format_csv, format_replicates_csv, parse_csv, points_csv, CSV_HEADER,
    POINTS_CSV_HEADER,
};
use medianqmc_cli::experiment::{
    cell_seed, estimate_cell, fit_slope, run_experiment, run_experiment_detailed, ExperimentGrid,
    ExperimentScheme, ResultRow,
};
use proptest::prelude::*;

fn small_grid() -> ExperimentGrid {
    ExperimentGrid {
        s_list: vec![5],
        gamma_list: vec![2.0],
        alpha_list: vec![0],
        m_min: 4,
        m_max: 6,
        r: 3,
        ..ExperimentGrid::default()
    }
}

fn row(scheme: ExperimentScheme, m: u32, abs_error: f64) -> ResultRow {
    ResultRow {
        scheme,
        s: 10,
        gamma: 3.0,
        alpha: 0,
        m,
        r: 10,
        seed: 42,
        estimate: 1.0 + abs_error,
        abs_error,
    }
}

// ---- CSV ----------------------------------------------------------------

proptest! {
    // 17 significant digits make the text form lossless: parsing what we
    // emitted returns the rows bit for bit.
    #[test]
    fn csv_round_trip_is_exact(
        rows in proptest::collection::vec(
            (
                prop_oneof![
                    Just(ExperimentScheme::Crd),
                    Just(ExperimentScheme::Rls),
                    Just(ExperimentScheme::Std)
                ],
                1u32..2000,
                any::<f64>().prop_filter("finite", |g| g.is_finite()),
                0u32..=1,
                1u32..=20,
                (1u32..=20, any::<u64>()),
                any::<f64>().prop_filter("finite", |e| e.is_finite()),
                any::<f64>().prop_filter("finite nonneg", |e| e.is_finite() && *e >= 0.0),
            )
                .prop_map(|(scheme, s, gamma, alpha, m, (r, seed), estimate, abs_error)| {
                    ResultRow { scheme, s, gamma, alpha, m, r, seed, estimate, abs_error }
                }),
            1..40,
        )
    ) {
        let text = format_csv(&rows).unwrap();
        let parsed = parse_csv(&text).unwrap();
        prop_assert_eq!(parsed, rows);
    }
}

#[test]
fn csv_has_exact_header_and_one_line_per_row() {
    let rows = vec![
        row(ExperimentScheme::Crd, 4, 1e-3),
        row(ExperimentScheme::Rls, 4, 1e-4),
        row(ExperimentScheme::Std, 4, 2e-4),
    ];
    let text = format_csv(&rows).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines[0], "scheme,s,gamma,alpha,m,r,seed,estimate,abs_error");
    assert!(lines[1].starts_with("CRD,10,3,0,4,10,42,"));
}

#[test]
fn empty_rows_error_and_no_file() {
    assert!(format_csv(&[]).is_err());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    assert!(emit_csv(&[], &path).is_err());
    assert!(!path.exists(), "a failed emit must not leave a file behind");
    assert!(emit_plots(&[], dir.path()).is_err());
}

#[test]
fn csv_parser_rejects_malformed_input() {
    assert!(parse_csv("nonsense\n").is_err());
    let bad_field = format!("{CSV_HEADER}\nRLS,10,3,0,4,10,42,1.0\n");
    assert!(parse_csv(&bad_field).is_err(), "8 fields must be rejected");
    let bad_number = format!("{CSV_HEADER}\nRLS,ten,3,0,4,10,42,1.0,0.0\n");
    assert!(parse_csv(&bad_number).is_err());
}

// ---- determinism ---------------------------------------------------------

#[test]
fn rows_are_deterministic_and_thread_invariant() {
    let grid = small_grid();
    let a = run_experiment(&grid, Some(1)).unwrap();
    let b = run_experiment(&grid, Some(4)).unwrap();
    let c = run_experiment(&grid, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    // canonical order: scheme groups contiguous, m ascending inside
    assert_eq!(a.len(), 9);
    assert!(a[..3].iter().all(|r| r.scheme == ExperimentScheme::Crd));
    assert!(a[3..6].iter().all(|r| r.scheme == ExperimentScheme::Rls));
    assert!(a[6..].iter().all(|r| r.scheme == ExperimentScheme::Std));
    assert!(a.windows(2).all(|w| w[0].scheme != w[1].scheme || w[0].m < w[1].m));
}

#[test]
fn row_count_is_schemes_times_grid_cells() {
    let grid = ExperimentGrid {
        s_list: vec![3, 5],
        gamma_list: vec![2.0, 4.0],
        alpha_list: vec![0, 1],
        m_min: 3,
        m_max: 5,
        r: 2,
        ..ExperimentGrid::default()
    };
    let rows = run_experiment(&grid, None).unwrap();
    assert_eq!(rows.len(), 3 * 2 * 2 * 2 * 3);
}

#[test]
fn extended_cells_are_excluded_by_default() {
    let mut grid = ExperimentGrid {
        s_list: vec![10, 1000],
        gamma_list: vec![3.0],
        alpha_list: vec![0],
        m_min: 11,
        m_max: 14,
        r: 1,
        schemes: vec![ExperimentScheme::Rls],
        ..ExperimentGrid::default()
    };
    let rows = run_experiment(&grid, None).unwrap();
    // s = 1000 drops entirely; m in {13, 14} drops for s = 10
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.s == 10 && r.m <= 12));
    grid.include_extended = true;
    grid.budget = u128::MAX;
    let all = run_experiment(&grid, None).unwrap();
    assert_eq!(all.len(), 8);
}

#[test]
fn budget_guard_refuses_with_computed_cost() {
    let mut grid = small_grid();
    grid.budget = 10;
    let err = run_experiment(&grid, None).unwrap_err().to_string();
    assert!(err.contains("coordinate evaluations"), "{err}");
    assert!(err.contains("budget"), "{err}");
    // the real cost appears so the user can size --budget; two compute
    // cells (matrix group + CRD) per m
    let cost: u128 = 2 * (2 * 3 - 1) * (16 + 32 + 64) * 5;
    assert!(err.contains(&cost.to_string()), "{err}");
}

#[test]
fn cell_seeds_differ_across_cells_and_masters() {
    let mut seen = HashSet::new();
    for master in [1u64, 2] {
        for group in [0u64, 1] {
            for s in [10u32, 100] {
                for m in [4u32, 5] {
                    assert!(seen.insert(cell_seed(master, group, s, 3.0, 0, m)));
                }
            }
        }
    }
    assert!(seen.insert(cell_seed(1, 0, 10, 2.0, 0, 4)), "gamma must enter the seed");
    assert!(seen.insert(cell_seed(1, 0, 10, 3.0, 1, 4)), "alpha must enter the seed");
}

// ---- replicate sharing ---------------------------------------------------

#[test]
fn std_reduces_the_same_replicates_rls_does() {
    let grid = ExperimentGrid {
        s_list: vec![6],
        gamma_list: vec![3.0],
        alpha_list: vec![0],
        m_min: 5,
        m_max: 5,
        r: 4,
        schemes: vec![ExperimentScheme::Rls, ExperimentScheme::Std],
        ..ExperimentGrid::default()
    };
    let output = run_experiment_detailed(&grid, None, true).unwrap();
    assert_eq!(output.rows.len(), 2);
    assert_eq!(output.replicates.len(), 1, "one shared computation");
    let record = &output.replicates[0];
    assert_eq!(record.group_label, "RLS/STD");
    assert_eq!(record.values.len(), 7);

    let rls = &output.rows[0];
    let std = &output.rows[1];
    assert_eq!(rls.scheme, ExperimentScheme::Rls);
    assert_eq!(std.scheme, ExperimentScheme::Std);
    assert_eq!(rls.seed, std.seed, "shared cell, shared seed");
    let median = EstimateResult::median_of(record.values.clone(), SchemeKind::Rls, 0).value;
    let mean = EstimateResult::mean_of(record.values.clone(), SchemeKind::Rls, 0).value;
    assert_eq!(rls.estimate, median);
    assert_eq!(std.estimate, mean);

    // the single-cell entry point sees exactly the same numbers
    let (row, values) = estimate_cell(ExperimentScheme::Rls, 6, 3.0, 0, 5, 4, grid.master_seed)
        .unwrap();
    assert_eq!(row.estimate, rls.estimate);
    assert_eq!(values, record.values);
    let csv = format_replicates_csv(&output.replicates).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.starts_with("group,s,gamma,alpha,m,seed,replicate,value\n"));
}

// ---- slope fitting ---------------------------------------------------------

#[test]
fn slope_recovers_an_exact_line() {
    let rows: Vec<ResultRow> = (4..=10)
        .map(|m| row(ExperimentScheme::Rls, m, (-(2.0 * m as f64)).exp2()))
        .collect();
    let fit = fit_slope(&rows, 4, 10).unwrap();
    assert!((fit.slope + 2.0).abs() <= 1e-9, "slope {}", fit.slope);
    assert_eq!(fit.points_used, 7);
    assert_eq!(fit.zeros_excluded, 0);
}

#[test]
fn slope_tolerates_small_perturbations() {
    // +-2% multiplicative noise moves log2 by at most ~0.03
    let noise = [1.02, 0.98, 1.01, 0.99, 1.02, 0.98, 1.0];
    let rows: Vec<ResultRow> = (4..=10)
        .map(|m| {
            row(
                ExperimentScheme::Rls,
                m,
                noise[(m - 4) as usize] * (-(1.5 * m as f64)).exp2(),
            )
        })
        .collect();
    let fit = fit_slope(&rows, 4, 10).unwrap();
    assert!((fit.slope + 1.5).abs() <= 0.05, "slope {}", fit.slope);
}

#[test]
fn slope_of_constant_errors_is_zero() {
    let rows: Vec<ResultRow> = (4..=8).map(|m| row(ExperimentScheme::Rls, m, 0.125)).collect();
    let fit = fit_slope(&rows, 4, 8).unwrap();
    assert_eq!(fit.slope, 0.0);
}

#[test]
fn slope_excludes_zero_errors_and_reports_them() {
    let mut rows: Vec<ResultRow> = (4..=8)
        .map(|m| row(ExperimentScheme::Rls, m, (-(m as f64)).exp2()))
        .collect();
    rows.push(row(ExperimentScheme::Rls, 9, 0.0));
    let fit = fit_slope(&rows, 4, 9).unwrap();
    assert_eq!(fit.zeros_excluded, 1);
    assert_eq!(fit.points_used, 5);
    assert!((fit.slope + 1.0).abs() <= 1e-9);
}

#[test]
fn slope_needs_three_usable_points() {
    let rows = vec![
        row(ExperimentScheme::Rls, 4, 0.5),
        row(ExperimentScheme::Rls, 5, 0.25),
        row(ExperimentScheme::Rls, 6, 0.0),
    ];
    let err = fit_slope(&rows, 4, 6).unwrap_err().to_string();
    assert!(err.contains("3 points"), "{err}");
    assert!(err.contains("zero-error"), "{err}");
}

// ---- plots -----------------------------------------------------------------

/// Minimal XML well-formedness scan: prolog allowed, every tag closed and
/// properly nested, attribute quotes balanced, one root element.
fn assert_well_formed_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0usize;
    let mut rest = text;
    while let Some(start) = rest.find('<') {
        let after = &rest[start + 1..];
        let end = after.find('>').unwrap_or_else(|| panic!("unclosed tag near {after:.40?}"));
        let tag = &after[..end];
        assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced quotes in <{tag}>");
        if let Some(name) = tag.strip_prefix('/') {
            let open = stack.pop().unwrap_or_else(|| panic!("stray closing tag </{name}>"));
            assert_eq!(open, name.trim(), "mismatched closing tag");
        } else if !tag.starts_with('?') && !tag.starts_with('!') {
            let name: String = tag
                .chars()
                .take_while(|c| !c.is_whitespace() && *c != '/')
                .collect();
            assert!(!name.is_empty(), "empty tag name");
            if !tag.ends_with('/') {
                if stack.is_empty() {
                    roots += 1;
                }
                stack.push(name);
            } else if stack.is_empty() {
                roots += 1;
            }
        }
        rest = &after[end + 1..];
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    assert_eq!(roots, 1, "exactly one root element");
}

#[test]
fn plots_are_one_well_formed_svg_and_dat_per_group() {
    let grid = ExperimentGrid {
        s_list: vec![4, 8],
        gamma_list: vec![2.0],
        alpha_list: vec![0],
        m_min: 3,
        m_max: 7,
        r: 2,
        ..ExperimentGrid::default()
    };
    let rows = run_experiment(&grid, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_plots(&rows, dir.path()).unwrap();
    // two (gamma, alpha, s) groups, an svg and a dat each
    assert_eq!(written.len(), 4);
    for s in [4u32, 8] {
        let svg_path = dir.path().join(format!("convergence_s{s}_gamma2_alpha0.svg"));
        let svg = std::fs::read_to_string(&svg_path).unwrap();
        assert_well_formed_xml(&svg);
        assert_eq!(svg.matches("<polyline").count(), 3, "one polyline per scheme");
        assert!(svg.contains(">m</text>"), "x axis label");
        assert!(svg.contains("log2 |error|"), "y axis label");
        for label in ["CRD", "RLS", "STD"] {
            assert!(svg.contains(&format!(">{label}</text>")), "legend entry {label}");
        }
        let dat = std::fs::read_to_string(dir.path().join(format!("convergence_s{s}_gamma2_alpha0.dat")))
            .unwrap();
        assert!(dat.contains("# index 0: scheme CRD"));
        assert!(dat.contains("# index 2: scheme STD"));
        assert!(dat.contains("\n\n\n"), "gnuplot index blocks need double blank separators");
        let data_lines = dat.lines().filter(|l| !l.is_empty() && !l.starts_with('#')).count();
        assert_eq!(data_lines, 15, "5 m values x 3 schemes");
    }
}

#[test]
fn svg_survives_zero_error_rows() {
    let mut rows = vec![
        row(ExperimentScheme::Rls, 4, 1e-3),
        row(ExperimentScheme::Rls, 5, 0.0),
        row(ExperimentScheme::Rls, 6, 1e-4),
    ];
    rows.iter_mut().for_each(|r| r.estimate = 1.0);
    let dir = tempfile::tempdir().unwrap();
    emit_plots(&rows, dir.path()).unwrap();
    let svg =
        std::fs::read_to_string(dir.path().join("convergence_s10_gamma3_alpha0.svg")).unwrap();
    assert_well_formed_xml(&svg);
    assert_eq!(svg.matches("<circle").count(), 2, "zero-error points have no log2 image");
}

// ---- points ----------------------------------------------------------------

#[test]
fn points_csv_shape_and_base_net() {
    let csv = points_csv("base", 2, 3, 0).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], POINTS_CSV_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 8);
    assert_eq!(lines[1], "0,0,0000000000000000,0.0000000000000000e0");
    // randomized schemes reproduce under the same seed
    assert_eq!(points_csv("rls", 3, 4, 9).unwrap(), points_csv("rls", 3, 4, 9).unwrap());
    assert_ne!(points_csv("rls", 3, 4, 9).unwrap(), points_csv("rls", 3, 4, 10).unwrap());
    assert!(points_csv("sobol", 2, 3, 0).is_err());
}

// ---- config ----------------------------------------------------------------

#[test]
fn config_parses_every_key() {
    let text = r#"
seed = 7
s = [10, 100]
gamma = [2, 3.5]
alpha = [0, 1]
m_min = 2
m_max = 9
r = 4
schemes = ["rls", "STD"]
budget = 123456
full = true
threads = 3
out_csv = "rows.csv"
out_svg = "plots"
"#;
    let parsed = parse_config(text).unwrap();
    assert_eq!(parsed.master_seed, Some(7));
    assert_eq!(parsed.s_list.as_deref(), Some(&[10, 100][..]));
    assert_eq!(parsed.gamma_list.as_deref(), Some(&[2.0, 3.5][..]));
    assert_eq!(parsed.alpha_list.as_deref(), Some(&[0, 1][..]));
    assert_eq!((parsed.m_min, parsed.m_max, parsed.r), (Some(2), Some(9), Some(4)));
    assert_eq!(
        parsed.schemes.as_deref(),
        Some(&[ExperimentScheme::Rls, ExperimentScheme::Std][..])
    );
    assert_eq!(parsed.budget, Some(123456));
    assert_eq!(parsed.include_extended, Some(true));
    assert_eq!(parsed.threads, Some(3));
    assert_eq!(parsed.out_csv.as_deref().unwrap().to_str(), Some("rows.csv"));

    let mut grid = ExperimentGrid::default();
    parsed.apply(&mut grid);
    assert_eq!(grid.master_seed, 7);
    assert_eq!(grid.m_max, 9);
    assert!(grid.include_extended);
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    assert!(parse_config("mmax = 3").unwrap_err().to_string().contains("unknown config key"));
    assert!(parse_config("s = []").is_err());
    assert!(parse_config("seed = -1").is_err());
    assert!(parse_config("schemes = [1]").is_err());
    assert!(parse_config("not toml at all [").is_err());
}

#[test]
fn flags_override_file_values() {
    let file = parse_config("seed = 1\nm_max = 9\nr = 4").unwrap();
    let flags = GridOverrides {
        m_max: Some(6),
        ..GridOverrides::default()
    };
    let merged = flags.over(file);
    assert_eq!(merged.m_max, Some(6), "flag wins");
    assert_eq!(merged.master_seed, Some(1), "file fills the gaps");
    assert_eq!(merged.r, Some(4));
}

// ---- mutation canary --------------------------------------------------------

/// The decomposition check must be sensitive to a sign flip in S: with the
/// shift sign negated, the aliasing sum no longer matches the observed
/// error on at least one seeded net/spectrum pair (it matches on all of
/// them when the sign is correct).
#[test]
fn decomposition_check_catches_a_flipped_shift_sign() {
    let tol = (-40f64).exp2();
    let mut flip_detected = false;
    for seed in 0..20u64 {
        let case = SeedTree::new(seed);
        let mut rng = case.child(0).rng();
        let terms: Vec<(WalshIndex, f64)> = (1u64..8)
            .map(|k| (WalshIndex::new(vec![k]), 2.0 * rng.next_f64() - 1.0))
            .collect();
        let spectrum = FiniteSpectrum::new(terms);
        let net = randomize_with_precision(&RandomizationScheme::Crd, 1, 2, 3, &case.child(1))
            .unwrap();
        assert!(verify_error_decomposition(&spectrum, &net) <= tol);

        // recompute the aliasing sum with the sign deliberately negated
        let shifts = vec![net.shift(0)];
        let mut lhs = 0.0;
        for i in 0..net.num_points() {
            lhs += spectrum.eval_codes(&[net.code(i, 0)]);
        }
        lhs = lhs / net.num_points() as f64 - spectrum.coeff_zero();
        let mut flipped = 0.0;
        for (idx, c) in spectrum.terms() {
            if z_indicator(idx, &net) {
                flipped += c * f64::from(-s_sign(idx, &shifts));
            }
        }
        if (lhs - flipped).abs() > tol {
            flip_detected = true;
        }
    }
    assert!(flip_detected, "a sign flip in S must break the decomposition somewhere");
}

// ---- binary ------------------------------------------------------------------

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_medianqmc"))
}

#[test]
fn binary_points_prints_csv() {
    let out = bin().args(["points", "--s", "2", "--m", "2", "--scheme", "base"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(POINTS_CSV_HEADER));
    assert_eq!(text.lines().count(), 1 + 2 * 4);
}

#[test]
fn binary_estimate_prints_replicates() {
    let out = bin()
        .args(["estimate", "--s", "4", "--m", "5", "--r", "3", "--replicates"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("estimate  "));
    assert_eq!(text.lines().filter(|l| l.starts_with("replicate ")).count(), 5);
}

#[test]
fn binary_experiment_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = |csv: &str, threads: &str| {
        vec![
            "experiment".into(),
            "--s".into(),
            "5".into(),
            "--gamma".into(),
            "2".into(),
            "--alpha".into(),
            "0".into(),
            "--m-min".into(),
            "4".into(),
            "--m-max".into(),
            "6".into(),
            "--r".into(),
            "2".into(),
            "--threads".into(),
            threads.to_string(),
            "--out-csv".into(),
            dir.path().join(csv).to_str().unwrap().to_string(),
        ]
    };
    assert!(bin().args(args("a.csv", "1")).output().unwrap().status.success());
    assert!(bin().args(args("b.csv", "4")).output().unwrap().status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "identical bytes regardless of thread count");
}

#[test]
fn binary_experiment_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.toml");
    std::fs::write(&config, "s = [5]\ngamma = [2]\nalpha = [0]\nm_min = 4\nm_max = 9\nr = 2\n")
        .unwrap();
    let out = bin()
        .args(["experiment", "--config", config.to_str().unwrap(), "--m-max", "5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    // m-max flag overrides the file: m in {4, 5} for 3 schemes
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.m <= 5));
}

#[test]
fn binary_experiment_refuses_over_budget() {
    let out = bin()
        .args(["experiment", "--s", "10", "--m-min", "4", "--m-max", "6", "--budget", "10"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("budget"), "{err}");
}

#[test]
fn binary_verify_small_passes_and_is_deterministic() {
    let run = || {
        let out = bin().args(["verify", "--tier", "small", "--seed", "3"]).output().unwrap();
        (out.status.success(), String::from_utf8(out.stdout).unwrap())
    };
    let (ok_a, text_a) = run();
    let (ok_b, text_b) = run();
    assert!(ok_a && ok_b);
    assert_eq!(text_a, text_b);
    assert!(text_a.lines().filter(|l| l.starts_with("PASS")).count() >= 8);
    assert!(!text_a.contains("FAIL"));
}

#[test]
fn binary_bound_reports_certificates() {
    let out = bin()
        .args(["bound", "--scheme", "rls", "--alpha", "1", "--m-min", "4", "--m-max", "8"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("certificate kind: small-d"), "{text}");
    assert!(text.contains("dimension independence: phi"), "{text}");

    // CRD has no order-d certificate
    let out = bin()
        .args(["bound", "--scheme", "crd", "--kind", "small-d"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("completely random design"), "{err}");
}

#[test]
fn binary_bound_csv_round_trips_kind_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("bounds.csv");
    let out = bin()
        .args([
            "bound",
            "--scheme",
            "crd",
            "--alpha",
            "0",
            "--m-min",
            "2",
            "--m-max",
            "4",
            "--csv",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("kind,scheme,s,gamma"));
    assert!(lines[1].starts_with("crd,CRD,10,3,"));
}

#[test]
fn binary_honors_direction_number_override() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("dirs.txt");
    // a one-entry table in the published format supports s <= 2
    std::fs::write(&table, "d       s       a       m_i\n2       1       0       1\n").unwrap();
    let out = bin()
        .env("MEDIANQMC_DIRNUMS", &table)
        .args(["points", "--s", "2", "--m", "2", "--scheme", "base"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let broken = dir.path().join("broken.txt");
    std::fs::write(&broken, "not a table\n").unwrap();
    let out = bin()
        .env("MEDIANQMC_DIRNUMS", &broken)
        .args(["points", "--s", "2", "--m", "2", "--scheme", "base"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("MEDIANQMC_DIRNUMS"), "{err}");
}
