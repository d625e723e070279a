//! Minimal SVG 1.1 line plots of sweep CSVs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use super::records::{
    median, ConcentrationRecord, TrialRecord, CONCENTRATION_HEADER, TRIAL_HEADER,
};
use crate::error::{Error, Result};

/// Every file name `emit_plots` can produce.
pub const PLOT_FILES: [&str; 3] = [
    "error_vs_k.svg",
    "exact_rate_vs_k.svg",
    "delta_scaled_vs_n.svg",
];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

struct Figure<'a> {
    title: &'a str,
    x_label: &'a str,
    y_label: &'a str,
    series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = if lo == 0.0 { 0.5 } else { 0.1 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn render(fig: &Figure) -> String {
    let pts = || fig.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = padded_range(pts().map(|p| p.0));
    let (y0, y1) = padded_range(pts().map(|p| p.1));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(fig.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{b:.2}" x2="{px:.2}" y2="{b2:.2}" stroke="black"/><text x="{px:.2}" y="{t:.2}" text-anchor="middle">{}</text>"#,
            tick_label(xv),
            b = TOP + plot_h,
            b2 = TOP + plot_h + 5.0,
            t = TOP + plot_h + 18.0
        );
        let _ = writeln!(
            out,
            r#"<line x1="{l:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{t:.2}" y="{ty:.2}" text-anchor="end">{}</text>"#,
            tick_label(yv),
            l = LEFT - 5.0,
            t = LEFT - 8.0,
            ty = py + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(fig.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{y}" text-anchor="middle" transform="rotate(-90 18 {y})">{}</text>"#,
        escape(fig.y_label),
        y = TOP + plot_h / 2.0
    );
    for (i, s) in fig.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if coords.len() > 1 {
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                coords.join(" ")
            );
        }
        for &(x, y) in &s.points {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn read_rows<T: DeserializeOwned>(rdr: &mut csv::Reader<std::fs::File>) -> Result<Vec<T>> {
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let row: T = rec.map_err(|e| Error::Parse {
            location: format!("row {}", i + 1),
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            location: "row 1".into(),
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}

/// Groups rows by `key` in first-seen order.
fn group_by<T, K: PartialEq + Clone>(rows: &[T], key: impl Fn(&T) -> K) -> Vec<(K, Vec<&T>)> {
    let mut groups: Vec<(K, Vec<&T>)> = Vec::new();
    for r in rows {
        let k = key(r);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(r),
            None => groups.push((k, vec![r])),
        }
    }
    groups
}

fn trial_series(
    rows: &[TrialRecord],
    value: impl Fn(&[&TrialRecord]) -> Option<f64>,
) -> Vec<Series> {
    let multi_point = group_by(rows, |r| {
        (r.n, r.p.to_bits(), r.q.to_bits(), r.sigma.to_bits())
    })
    .len()
        > 1;
    group_by(rows, |r| {
        (r.kind, r.n, r.p.to_bits(), r.q.to_bits(), r.sigma.to_bits())
    })
    .into_iter()
    .map(|((kind, n, p, q, sigma), rows)| {
        let label = if multi_point {
            format!(
                "{kind} n={n} p={} q={} s={}",
                f64::from_bits(p),
                f64::from_bits(q),
                f64::from_bits(sigma)
            )
        } else {
            kind.to_string()
        };
        let mut by_k = group_by(&rows, |r| r.k);
        by_k.sort_by_key(|(k, _)| *k);
        let points = by_k
            .into_iter()
            .filter_map(|(k, rs)| {
                let rs: Vec<&TrialRecord> = rs.into_iter().copied().collect();
                value(&rs).filter(|v| v.is_finite()).map(|v| (k as f64, v))
            })
            .collect();
        Series { label, points }
    })
    .collect()
}

fn write_svg(path: &Path, fig: &Figure) -> Result<()> {
    std::fs::write(path, render(fig)).map_err(|e| Error::io(path, e))
}

/// Reads a sweep CSV and writes its plots into `out_dir`, returning the
/// paths written. Classification sweeps give median error rate and exact
/// recovery frequency against `k`; concentration sweeps give the median of
/// `delta * sqrt(n max(p, q))` against `n`.
pub fn emit_plots(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let file = std::fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse {
            location: "header".into(),
            message: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header.is_empty() {
        return Err(Error::Parse {
            location: "header".into(),
            message: "empty file".into(),
        });
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    if header == TRIAL_HEADER {
        let rows: Vec<TrialRecord> = read_rows(&mut rdr)?;
        let ok: Vec<TrialRecord> = rows.into_iter().filter(|r| r.failure.is_empty()).collect();
        let figures = [
            (
                PLOT_FILES[0],
                Figure {
                    title: "Median error rate",
                    x_label: "convolutions k",
                    y_label: "error rate",
                    series: trial_series(&ok, |rs| {
                        Some(median(rs.iter().filter_map(|r| r.error_rate)))
                    }),
                },
            ),
            (
                PLOT_FILES[1],
                Figure {
                    title: "Exact recovery frequency",
                    x_label: "convolutions k",
                    y_label: "fraction exact",
                    series: trial_series(&ok, |rs| {
                        let flags: Vec<bool> = rs.iter().filter_map(|r| r.exact).collect();
                        (!flags.is_empty()).then(|| {
                            flags.iter().filter(|&&e| e).count() as f64 / flags.len() as f64
                        })
                    }),
                },
            ),
        ];
        for (name, fig) in figures {
            let path = out_dir.join(name);
            write_svg(&path, &fig)?;
            written.push(path);
        }
    } else if header == CONCENTRATION_HEADER {
        let rows: Vec<ConcentrationRecord> = read_rows(&mut rdr)?;
        let ok: Vec<ConcentrationRecord> =
            rows.into_iter().filter(|r| r.failure.is_empty()).collect();
        let series = group_by(&ok, |r| (r.kind, r.p.to_bits(), r.q.to_bits()))
            .into_iter()
            .map(|((kind, p, q), rs)| {
                let (p, q) = (f64::from_bits(p), f64::from_bits(q));
                let mut by_n = group_by(&rs, |r| r.n);
                by_n.sort_by_key(|(n, _)| *n);
                let points = by_n
                    .into_iter()
                    .filter_map(|(n, rs)| {
                        let scale = (n as f64 * p.max(q)).sqrt();
                        let m = median(rs.iter().filter_map(|r| r.delta).map(|d| d * scale));
                        m.is_finite().then_some((n as f64, m))
                    })
                    .collect();
                Series {
                    label: format!("{kind} p={p} q={q}"),
                    points,
                }
            })
            .collect();
        let path = out_dir.join(PLOT_FILES[2]);
        write_svg(
            &path,
            &Figure {
                title: "Scaled deviation norm",
                x_label: "n",
                y_label: "median delta * sqrt(np)",
                series,
            },
        )?;
        written.push(path);
    } else {
        return Err(Error::Parse {
            location: "header".into(),
            message: format!("unrecognized columns: {header}"),
        });
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn empty_csv_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "empty.csv", "");
        assert!(emit_plots(&path, dir.path()).is_err());
        let path = write(dir.path(), "header.csv", &format!("{TRIAL_HEADER}\n"));
        assert!(emit_plots(&path, dir.path()).is_err());
    }

    #[test]
    fn malformed_row_named() {
        let dir = tempfile::tempdir().unwrap();
        let good =
            "partial_sweep,0,10,0.5,0.1,1,0.66,corrected_unnormalized,0,1,0.1,false,1,,,,,,1.0";
        let bad =
            "partial_sweep,1,ten,0.5,0.1,1,0.66,corrected_unnormalized,0,1,0.1,false,1,,,,,,1.0";
        let path = write(
            dir.path(),
            "bad.csv",
            &format!("{TRIAL_HEADER}\n{good}\n{bad}\n"),
        );
        let err = emit_plots(&path, dir.path()).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn single_row_single_point() {
        let dir = tempfile::tempdir().unwrap();
        let row =
            "partial_sweep,0,10,0.5,0.1,1,0.66,corrected_unnormalized,0,1,0.1,false,1,,,,,,1.0";
        let path = write(dir.path(), "one.csv", &format!("{TRIAL_HEADER}\n{row}\n"));
        let files = emit_plots(&path, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let svg = std::fs::read_to_string(&files[0]).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains(r#"version="1.1""#));
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn unknown_schema_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "x.csv", "a,b\n1,2\n");
        assert!(emit_plots(&path, dir.path()).is_err());
    }

    #[test]
    fn labels_escaped() {
        assert_eq!(escape("a<b&c"), "a&lt;b&amp;c");
        assert_eq!(tick_label(0.5), "0.5");
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(2.5e-5), "2.5e-5");
    }
}
