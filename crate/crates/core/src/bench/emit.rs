use std::fmt::Write as _;
use std::io::{Read, Write};

use super::report::BenchReport;
use crate::error::{LowRankError, Result};
use crate::solver::TraceRecord;

const CSV_HEADER: [&str; 6] = [
    "solver",
    "instance",
    "iter",
    "elapsed_seconds",
    "objective",
    "relative_distance",
];

/// 17 significant digits: enough to round-trip any `f64`.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes every trace record of the successful cells as CSV, sorted by
/// (solver, instance, iter). A missing relative distance is an empty field.
pub fn emit_csv<W: Write>(report: &BenchReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for cell in &report.cells {
        let Ok(trace) = &cell.outcome else { continue };
        let mut records: Vec<&TraceRecord> = trace.records.iter().collect();
        records.sort_by_key(|r| r.iteration);
        for r in records {
            w.write_record([
                cell.solver.clone(),
                cell.instance.to_string(),
                r.iteration.to_string(),
                real(r.elapsed_seconds),
                real(r.objective),
                r.relative_distance.map(real).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One parsed CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub solver: String,
    pub instance: usize,
    pub record: TraceRecord,
}

/// Reads back the output of [`emit_csv`].
pub fn parse_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(LowRankError::Parse {
            offset: 0,
            message: "unexpected CSV header".into(),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let offset = rec.position().map_or(0, |p| p.byte() as usize);
        let bad = |what: &str| LowRankError::Parse {
            offset,
            message: format!("invalid {what}"),
        };
        let float = |i: usize, what: &str| rec[i].parse::<f64>().map_err(|_| bad(what));
        rows.push(CsvRow {
            solver: rec[0].to_string(),
            instance: rec[1].parse().map_err(|_| bad("instance"))?,
            record: TraceRecord {
                iteration: rec[2].parse().map_err(|_| bad("iter"))?,
                elapsed_seconds: float(3, "elapsed_seconds")?,
                objective: float(4, "objective")?,
                relative_distance: if rec[5].is_empty() {
                    None
                } else {
                    Some(float(5, "relative_distance")?)
                },
            },
        });
    }
    Ok(rows)
}

const PALETTE: [&str; 9] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
    "#7f7f7f",
];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

/// Integer decades covering `[lo, hi]` (log₁₀ values), at least one wide.
fn decades(lo: f64, hi: f64) -> (i32, i32) {
    let a = lo.floor() as i32;
    let b = (hi.ceil() as i32).max(a + 1);
    (a, b)
}

/// Line chart of the averaged curves: log₁₀ seconds against log₁₀
/// relative distance, one polyline and legend entry per solver.
pub fn emit_plot<W: Write>(report: &BenchReport, mut out: W) -> Result<()> {
    if report.curves.is_empty() {
        return crate::error::invalid("no successful runs to plot");
    }
    let points: Vec<Vec<(f64, f64)>> = report
        .curves
        .iter()
        .map(|c| {
            c.times
                .iter()
                .zip(&c.mean_relative_distance)
                .filter(|(t, d)| **t > 0.0 && **d > 0.0 && d.is_finite())
                .map(|(t, d)| (t.log10(), d.log10()))
                .collect()
        })
        .collect();
    let all = || points.iter().flatten();
    let (x_lo, x_hi) = decades(
        all().map(|p| p.0).fold(f64::INFINITY, f64::min).min(0.0),
        all()
            .map(|p| p.0)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(-1.0),
    );
    let (y_lo, y_hi) = decades(
        all().map(|p| p.1).fold(f64::INFINITY, f64::min).min(-1.0),
        all()
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0),
    );
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo as f64) / (x_hi - x_lo) as f64 * plot_w;
    let sy = |y: f64| TOP + (y_hi as f64 - y) / (y_hi - y_lo) as f64 * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(s, r#"<g class="x-ticks">"#);
    for d in x_lo..=x_hi {
        let x = sx(d as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="y-ticks">"#);
    for d in y_lo..=y_hi {
        let y = sy(d as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time (s)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">relative distance</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (i, (curve, pts)) in report.curves.iter().zip(&points).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-solver="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            curve.solver,
            coords.join(" ")
        );
        let ly = TOP + 15.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            curve.solver
        );
    }
    s.push_str("</svg>\n");
    out.write_all(s.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::SyntheticSpec;

    fn empty_report() -> BenchReport {
        BenchReport {
            spec: SyntheticSpec::completion(20, 2, 3.0),
            cells: Vec::new(),
            curves: Vec::new(),
            realized_oversampling: Vec::new(),
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        emit_csv(&empty_report(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "solver,instance,iter,elapsed_seconds,objective,relative_distance\n"
        );
    }

    #[test]
    fn plot_needs_a_curve() {
        assert!(emit_plot(&empty_report(), Vec::new()).is_err());
    }

    #[test]
    fn decade_ticks_increase() {
        assert_eq!(decades(-3.2, -0.4), (-4, 0));
        assert_eq!(decades(2.0, 2.0), (2, 3));
    }
}
