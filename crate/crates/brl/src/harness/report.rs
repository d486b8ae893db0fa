//! Standalone SVG 1.1 charts from result CSVs.
//!
//! Loss logs (`step,...`) become line charts, one SVG per metric column;
//! several input files are treated as seeds and drawn as a mean line
//! with a min–max band. Evaluation CSVs (`episode,...`) become bar
//! charts with one bar per input file and min–max whiskers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::csvio::{parse_csv, CsvDoc};
use crate::error::{Error, Result};

pub const PLOT_WIDTH: f64 = 640.0;
pub const PLOT_HEIGHT: f64 = 400.0;
pub const MARGIN_LEFT: f64 = 60.0;
pub const MARGIN_RIGHT: f64 = 20.0;
pub const MARGIN_TOP: f64 = 20.0;
pub const MARGIN_BOTTOM: f64 = 40.0;

/// Linear data→pixel mapping shared by the emitter and its tests.
#[derive(Debug, Clone, Copy)]
pub struct PlotGeometry {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl PlotGeometry {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        let (xmin, xmax) = pad_if_flat(xmin, xmax);
        let (ymin, ymax) = pad_if_flat(ymin, ymax);
        Self {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    pub fn map_x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.xmin) / (self.xmax - self.xmin)
            * (PLOT_WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    pub fn map_y(&self, v: f64) -> f64 {
        PLOT_HEIGHT
            - MARGIN_BOTTOM
            - (v - self.ymin) / (self.ymax - self.ymin)
                * (PLOT_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn pad_if_flat(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, lo + 1.0)
    }
}

pub fn fmt_coord(v: f64) -> String {
    format!("{v:.3}")
}

/// Renders the inputs into one SVG per metric. With a single metric the
/// file lands exactly at `out`; otherwise a `_metric` suffix is added.
/// Returns the written paths.
pub fn emit_report(inputs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    if inputs.is_empty() {
        return Err(Error::Usage("report needs at least one CSV input".to_string()));
    }
    let docs: Vec<(PathBuf, CsvDoc)> = inputs
        .iter()
        .map(|p| parse_csv(p).map(|d| (p.clone(), d)))
        .collect::<Result<_>>()?;

    let header = &docs[0].1.header;
    for (path, doc) in &docs {
        if &doc.header != header {
            return Err(Error::Config(format!(
                "{}: header {:?} does not match {:?}",
                path.display(),
                doc.header,
                header
            )));
        }
        if doc.rows.is_empty() {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 2,
                what: "no data rows".to_string(),
            });
        }
        for key in ["env", "reward"] {
            let first = docs[0].1.meta.get(key);
            let this = doc.meta.get(key);
            if let (Some(a), Some(b)) = (first, this) {
                if a != b {
                    return Err(Error::Config(format!(
                        "refusing to aggregate: {} has {key}={b}, expected {a}",
                        path.display()
                    )));
                }
            }
        }
    }
    if header.len() < 2 {
        return Err(Error::Config("CSV needs at least one metric column".to_string()));
    }

    let metrics: Vec<usize> = (1..header.len())
        .filter(|col| {
            docs.iter()
                .any(|(_, d)| d.rows.iter().any(|r| r[*col].is_some()))
        })
        .collect();
    if metrics.is_empty() {
        return Err(Error::Config("no metric column has any values".to_string()));
    }

    let mut written = Vec::new();
    for &col in &metrics {
        let svg = match header[0].as_str() {
            "step" => line_chart(&docs, col)?,
            "episode" => bar_chart(&docs, col)?,
            other => {
                return Err(Error::Config(format!(
                    "unsupported CSV kind: first column '{other}' (expected step or episode)"
                )))
            }
        };
        let path = if metrics.len() == 1 {
            out.to_path_buf()
        } else {
            suffixed(out, &header[col])
        };
        std::fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}

fn suffixed(out: &Path, metric: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("svg");
    out.with_file_name(format!("{stem}_{metric}.{ext}"))
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{PLOT_WIDTH}\" height=\"{PLOT_HEIGHT}\" \
         viewBox=\"0 0 {PLOT_WIDTH} {PLOT_HEIGHT}\">\n"
    );
    let _ = write!(
        s,
        "<text x=\"{}\" y=\"14\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
        MARGIN_LEFT,
        xml_escape(title)
    );
    s
}

fn axes(s: &mut String, geom: &PlotGeometry) {
    let x0 = MARGIN_LEFT;
    let x1 = PLOT_WIDTH - MARGIN_RIGHT;
    let y0 = PLOT_HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = write!(
        s,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"#333\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"#333\"/>\n"
    );
    let _ = write!(
        s,
        "<text x=\"{x0}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        y0 + 16.0,
        fmt_coord(geom.xmin)
    );
    let _ = write!(
        s,
        "<text x=\"{x1}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        y0 + 16.0,
        fmt_coord(geom.xmax)
    );
    let _ = write!(
        s,
        "<text x=\"{}\" y=\"{y0}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        x0 - 6.0,
        fmt_coord(geom.ymin)
    );
    let _ = write!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        x0 - 6.0,
        y1 + 4.0,
        fmt_coord(geom.ymax)
    );
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn line_chart(docs: &[(PathBuf, CsvDoc)], col: usize) -> Result<String> {
    // All seed files must share the same step column.
    let steps: Vec<f64> = docs[0]
        .1
        .rows
        .iter()
        .map(|r| r[0].ok_or_else(|| Error::Config("missing step value".to_string())))
        .collect::<Result<_>>()?;
    for (path, doc) in docs.iter().skip(1) {
        let other: Vec<f64> = doc.rows.iter().filter_map(|r| r[0]).collect();
        if other != steps {
            return Err(Error::Config(format!(
                "{}: step column differs across seed files",
                path.display()
            )));
        }
    }

    let series: Vec<Vec<f64>> = docs
        .iter()
        .map(|(path, doc)| {
            doc.rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    r[col].ok_or_else(|| Error::Parse {
                        path: path.display().to_string(),
                        line: i + 2,
                        what: "missing metric value".to_string(),
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let n = steps.len();
    let mut mean = vec![0.0; n];
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for s in &series {
        for i in 0..n {
            mean[i] += s[i];
            lo[i] = lo[i].min(s[i]);
            hi[i] = hi[i].max(s[i]);
        }
    }
    for m in mean.iter_mut() {
        *m /= series.len() as f64;
    }

    let geom = PlotGeometry::new(
        steps[0],
        steps[n - 1],
        lo.iter().cloned().fold(f64::INFINITY, f64::min),
        hi.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );

    let metric = &docs[0].1.header[col];
    let mut s = svg_open(metric);
    axes(&mut s, &geom);
    if series.len() > 1 {
        // Band: upper edge left→right, then lower edge right→left.
        let mut pts = String::new();
        for i in 0..n {
            let _ = write!(
                pts,
                "{},{} ",
                fmt_coord(geom.map_x(steps[i])),
                fmt_coord(geom.map_y(hi[i]))
            );
        }
        for i in (0..n).rev() {
            let _ = write!(
                pts,
                "{},{} ",
                fmt_coord(geom.map_x(steps[i])),
                fmt_coord(geom.map_y(lo[i]))
            );
        }
        let _ = write!(
            s,
            "<polygon points=\"{}\" fill=\"#aec7e8\" opacity=\"0.6\"/>\n",
            pts.trim_end()
        );
    }
    let mut pts = String::new();
    for i in 0..n {
        let _ = write!(
            pts,
            "{},{} ",
            fmt_coord(geom.map_x(steps[i])),
            fmt_coord(geom.map_y(mean[i]))
        );
    }
    let _ = write!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
        pts.trim_end()
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn bar_chart(docs: &[(PathBuf, CsvDoc)], col: usize) -> Result<String> {
    struct Bar {
        label: String,
        mean: f64,
        lo: f64,
        hi: f64,
    }
    let mut bars = Vec::new();
    for (path, doc) in docs {
        let values: Vec<f64> = doc.rows.iter().filter_map(|r| r[col]).collect();
        if values.is_empty() {
            continue;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let label = doc
            .meta
            .get("method")
            .or_else(|| doc.meta.get("algo"))
            .cloned()
            .unwrap_or_else(|| {
                path.file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("run")
                    .to_string()
            });
        bars.push(Bar {
            label,
            mean,
            lo: values.iter().cloned().fold(f64::INFINITY, f64::min),
            hi: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    if bars.is_empty() {
        return Err(Error::Config("no values to chart".to_string()));
    }

    let ymin = bars.iter().map(|b| b.lo).fold(0.0f64, f64::min);
    let ymax = bars.iter().map(|b| b.hi).fold(0.0f64, f64::max);
    let geom = PlotGeometry::new(0.0, bars.len() as f64, ymin, ymax);

    let metric = &docs[0].1.header[col];
    let mut s = svg_open(metric);
    axes(&mut s, &geom);
    let zero_y = geom.map_y(0.0);
    for (i, bar) in bars.iter().enumerate() {
        let x0 = geom.map_x(i as f64 + 0.2);
        let x1 = geom.map_x(i as f64 + 0.8);
        let y = geom.map_y(bar.mean);
        let (top, height) = if bar.mean >= 0.0 {
            (y, zero_y - y)
        } else {
            (zero_y, y - zero_y)
        };
        let _ = write!(
            s,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#1f77b4\" opacity=\"0.8\"/>\n",
            fmt_coord(x0),
            fmt_coord(top),
            fmt_coord(x1 - x0),
            fmt_coord(height.max(0.0))
        );
        let cx = geom.map_x(i as f64 + 0.5);
        let _ = write!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\"/>\n",
            fmt_coord(cx),
            fmt_coord(geom.map_y(bar.lo)),
            fmt_coord(cx),
            fmt_coord(geom.map_y(bar.hi))
        );
        let _ = write!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            fmt_coord(cx),
            PLOT_HEIGHT - MARGIN_BOTTOM + 16.0,
            xml_escape(&bar.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
