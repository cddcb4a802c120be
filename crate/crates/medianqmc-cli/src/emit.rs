//! Output side of the harness: result CSV (with an exact round-trip
//! parser), per-group SVG charts, gnuplot data files, and the point-dump
//! CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use medianqmc::gf2::BitVectorE;
use medianqmc::netgen::{
    code_to_unit, randomize, GeneratingMatrixSet, PointStream, RandomizationScheme, RandomizedNet,
};
use medianqmc::rng::SeedTree;

use crate::experiment::{ExperimentScheme, ReplicateRecord, ResultRow};

pub const CSV_HEADER: &str = "scheme,s,gamma,alpha,m,r,seed,estimate,abs_error";

/// 17 significant digits: enough for f64 round-trips, so
/// parse_csv(format_csv(rows)) == rows exactly.
fn push_row(out: &mut String, row: &ResultRow) {
    writeln!(
        out,
        "{},{},{},{},{},{},{},{:.16e},{:.16e}",
        row.scheme.label(),
        row.s,
        row.gamma,
        row.alpha,
        row.m,
        row.r,
        row.seed,
        row.estimate,
        row.abs_error
    )
    .expect("writing to a String cannot fail");
}

pub fn format_csv(rows: &[ResultRow]) -> Result<String> {
    ensure!(!rows.is_empty(), "no rows to emit");
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        push_row(&mut out, row);
    }
    Ok(out)
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let text = format_csv(rows)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    ensure!(
        header == CSV_HEADER,
        "unexpected header {header:?}, want {CSV_HEADER:?}"
    );
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        ensure!(
            fields.len() == 9,
            "line {}: expected 9 fields, found {}",
            i + 2,
            fields.len()
        );
        let context = |what: &'static str| move || format!("line {}: bad {what}", i + 2);
        rows.push(ResultRow {
            scheme: ExperimentScheme::parse(fields[0])?,
            s: fields[1].parse().with_context(context("s"))?,
            gamma: fields[2].parse().with_context(context("gamma"))?,
            alpha: fields[3].parse().with_context(context("alpha"))?,
            m: fields[4].parse().with_context(context("m"))?,
            r: fields[5].parse().with_context(context("r"))?,
            seed: fields[6].parse().with_context(context("seed"))?,
            estimate: fields[7].parse().with_context(context("estimate"))?,
            abs_error: fields[8].parse().with_context(context("abs_error"))?,
        });
    }
    Ok(rows)
}

/// Debug CSV of the raw replicate means behind each cell.
pub fn format_replicates_csv(records: &[ReplicateRecord]) -> Result<String> {
    ensure!(!records.is_empty(), "no replicate records to emit");
    let mut out = String::from("group,s,gamma,alpha,m,seed,replicate,value\n");
    for rec in records {
        for (i, v) in rec.values.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{:.16e}",
                rec.group_label, rec.s, rec.gamma, rec.alpha, rec.m, rec.seed, i, v
            )
            .expect("writing to a String cannot fail");
        }
    }
    Ok(out)
}

fn scheme_color(scheme: ExperimentScheme) -> &'static str {
    match scheme {
        ExperimentScheme::Crd => "#d62728",
        ExperimentScheme::Rls => "#1f77b4",
        ExperimentScheme::Std => "#2ca02c",
    }
}

/// log2 |error| per scheme, zero errors dropped (no logarithm to plot).
type Series = BTreeMap<ExperimentScheme, Vec<(f64, f64)>>;

fn group_series(rows: &[&ResultRow]) -> Series {
    let mut series: Series = BTreeMap::new();
    for row in rows {
        // Entry even when every error is zero: the scheme still gets its
        // (empty) polyline and legend slot.
        let points = series.entry(row.scheme).or_default();
        if row.abs_error > 0.0 {
            points.push((row.m as f64, row.abs_error.log2()));
        }
    }
    series
}

fn render_svg(caption: &str, rows: &[&ResultRow]) -> String {
    const WIDTH: u32 = 720;
    const HEIGHT: u32 = 500;
    const LEFT: f64 = 80.0;
    const TOP: f64 = 50.0;
    const PLOT_W: f64 = 480.0;
    const PLOT_H: f64 = 380.0;

    let series = group_series(rows);
    let m_lo = rows.iter().map(|r| r.m).min().expect("nonempty group") as f64;
    let m_hi = rows.iter().map(|r| r.m).max().expect("nonempty group") as f64;
    let (x0, x1) = if m_lo == m_hi { (m_lo - 1.0, m_hi + 1.0) } else { (m_lo, m_hi) };
    let ys: Vec<f64> = series.values().flatten().map(|p| p.1).collect();
    let (y0, y1) = match (ys.iter().cloned().reduce(f64::min), ys.iter().cloned().reduce(f64::max))
    {
        (Some(lo), Some(hi)) => (lo.floor() - 1.0, hi.ceil() + 1.0),
        _ => (-1.0, 1.0),
    };
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * PLOT_W;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * PLOT_H;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"13\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">{caption}</text>",
        LEFT + PLOT_W / 2.0
    );

    // Axes.
    let _ = writeln!(
        svg,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         fill=\"none\" stroke=\"black\"/>"
    );
    let x_step = (((x1 - x0) / 12.0).ceil() as u32).max(1);
    let mut m = x0.ceil() as i64;
    while m as f64 <= x1 {
        let x = px(m as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            TOP + PLOT_H,
            TOP + PLOT_H + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{m}</text>",
            TOP + PLOT_H + 20.0
        );
        m += x_step as i64;
    }
    let y_step = (((y1 - y0) / 8.0).ceil()).max(1.0);
    let mut y = (y0 / y_step).ceil() * y_step;
    while y <= y1 {
        let yp = py(y);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{yp:.2}\" x2=\"{LEFT}\" y2=\"{yp:.2}\" stroke=\"black\"/>",
            LEFT - 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y}</text>",
            LEFT - 9.0,
            yp + 4.0
        );
        y += y_step;
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">m</text>",
        LEFT + PLOT_W / 2.0,
        TOP + PLOT_H + 45.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"22\" y=\"{0}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 22 {0})\">log2 |error|</text>",
        TOP + PLOT_H / 2.0
    );

    // One polyline per scheme present in the group, plus point markers.
    for (scheme, points) in &series {
        let color = scheme_color(*scheme);
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        );
        for &(x, y) in points {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>",
                px(x),
                py(y)
            );
        }
    }

    // Legend.
    let legend_x = LEFT + PLOT_W + 20.0;
    for (i, scheme) in series.keys().enumerate() {
        let y = TOP + 20.0 + 22.0 * i as f64;
        let color = scheme_color(*scheme);
        let _ = writeln!(
            svg,
            "<line x1=\"{legend_x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>",
            legend_x + 26.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            legend_x + 32.0,
            y + 4.0,
            scheme.label()
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn render_dat(caption: &str, rows: &[&ResultRow]) -> String {
    let mut by_scheme: BTreeMap<ExperimentScheme, Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        by_scheme.entry(row.scheme).or_default().push(row);
    }
    let mut out = String::new();
    let _ = writeln!(out, "# {caption}");
    let _ = writeln!(out, "# columns: m abs_error estimate");
    let _ = writeln!(
        out,
        "# one gnuplot index block per scheme; e.g. plot 'file.dat' index 1 using 1:2"
    );
    for (i, (scheme, rows)) in by_scheme.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# index {i}: scheme {}", scheme.label());
        for row in rows {
            let _ = writeln!(out, "{} {:.16e} {:.16e}", row.m, row.abs_error, row.estimate);
        }
    }
    out
}

/// One SVG chart and one gnuplot data file per (gamma, alpha, s) group,
/// named convergence_s{s}_gamma{g}_alpha{a}.{svg,dat}. Returns the paths
/// written.
pub fn emit_plots(rows: &[ResultRow], dir: &Path) -> Result<Vec<PathBuf>> {
    ensure!(!rows.is_empty(), "no rows to plot");
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut groups: BTreeMap<(u64, u32, u32), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.gamma.to_bits(), row.alpha, row.s))
            .or_default()
            .push(row);
    }
    let mut written = Vec::new();
    for ((_, alpha, s), group) in &groups {
        let gamma = group[0].gamma;
        let caption = format!("s={s}, gamma={gamma}, alpha={alpha}");
        let base = format!("convergence_s{s}_gamma{gamma}_alpha{alpha}");
        let svg_path = dir.join(format!("{base}.svg"));
        std::fs::write(&svg_path, render_svg(&caption, group))
            .with_context(|| format!("writing {}", svg_path.display()))?;
        written.push(svg_path);
        let dat_path = dir.join(format!("{base}.dat"));
        std::fs::write(&dat_path, render_dat(&caption, group))
            .with_context(|| format!("writing {}", dat_path.display()))?;
        written.push(dat_path);
    }
    Ok(written)
}

pub const POINTS_CSV_HEADER: &str = "i,j,code_hex,x_float";

/// One net's points as CSV, one line per (point, coordinate): the 64-digit
/// fixed-point code and its float image. `seed` matches what replicate 0
/// of an estimate with the same master seed would use. Scheme "base" is
/// the unrandomized (unshifted) construction.
pub fn points_csv(scheme: &str, s: u32, m: u32, seed: u64) -> Result<String> {
    ensure!(s >= 1, "dimension must be at least 1");
    ensure!((1..=20).contains(&m), "need 1 <= m <= 20 for a point dump");
    let table = crate::dirnums::direction_numbers()?;
    let net = match scheme.trim().to_ascii_lowercase().as_str() {
        "base" => {
            let base = GeneratingMatrixSet::sobol(s, m, table)?;
            let matrices = (0..s).map(|j| base.matrix(j).padded(64)).collect();
            let shifts = vec![BitVectorE::zero(64); s as usize];
            RandomizedNet::from_parts(matrices, shifts, m)
        }
        name => {
            let scheme = match name {
                "rls" => {
                    RandomizationScheme::Rls(Arc::new(GeneratingMatrixSet::sobol(s, m, table)?))
                }
                "shift-only" => {
                    RandomizationScheme::ShiftOnly(Arc::new(GeneratingMatrixSet::sobol(
                        s, m, table,
                    )?))
                }
                "crd" => RandomizationScheme::Crd,
                other => bail!(
                    "unknown scheme {other:?} (expected rls, crd, shift-only or base)"
                ),
            };
            randomize(&scheme, s, m, &SeedTree::new(seed).child(0))?
        }
    };
    let mut out = String::from(POINTS_CSV_HEADER);
    out.push('\n');
    let mut stream = PointStream::new(&net);
    while let Some((i, row)) = stream.advance() {
        for (j, &code) in row.iter().enumerate() {
            let _ = writeln!(out, "{i},{j},{code:016x},{:.16e}", code_to_unit(code));
        }
    }
    Ok(out)
}
