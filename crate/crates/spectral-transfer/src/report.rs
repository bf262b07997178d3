//! Report bundles: a structured summary, CSV tables, verdicts and an optional SVG scatter.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Shortest round-trip decimal form, so tables reproduce the computed values exactly.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    /// Per-point reference slope: the point must satisfy y ≤ slope·x.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scatter {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<ScatterPoint>,
    /// Slope of the drawn reference line.
    pub line_slope: f64,
}

impl Scatter {
    /// Points strictly above their own reference y = slope·x (with the certification slack).
    pub fn points_above(&self) -> usize {
        self.points.iter().filter(|p| !crate::transfer::certified(p.y, p.slope * p.x)).count()
    }

    pub fn to_svg(&self) -> String {
        let (w, h, pad) = (640.0, 480.0, 60.0);
        let xmax = self.points.iter().map(|p| p.x).fold(0.0, f64::max).max(1e-300) * 1.05;
        let ymax = self
            .points
            .iter()
            .map(|p| p.y)
            .fold(self.line_slope * xmax, f64::max)
            .max(1e-300)
            * 1.05;
        let sx = |x: f64| pad + x / xmax * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - y / ymax * (h - 2.0 * pad);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#, w / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<line x1="{pad}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{pad}" y1="{}" x2="{pad}" y2="{pad}" stroke="black"/>"#,
            h - pad,
            w - pad,
            h - pad,
            h - pad
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#, w / 2.0, h - 20.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="18" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            h / 2.0,
            h / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{xmax:.3e}</text>"#, sx(xmax), h - pad + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{ymax:.3e}</text>"#, pad - 4.0, pad + 4.0);
        let (x_end, y_end) = if self.line_slope * xmax <= ymax { (xmax, self.line_slope * xmax) } else { (ymax / self.line_slope, ymax) };
        let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="red" stroke-dasharray="6 4"/>"#, sx(0.0), sy(0.0), sx(x_end), sy(y_end));
        for p in &self.points {
            let colour = if crate::transfer::certified(p.y, p.slope * p.x) { "steelblue" } else { "crimson" };
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, sx(p.x), sy(p.y));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Everything an experiment produces; the verdicts decide the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub experiment: String,
    pub summary: Value,
    pub verdicts: Vec<(String, bool)>,
    pub tables: Vec<Table>,
    pub scatter: Option<Scatter>,
}

impl ReportBundle {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.to_string(), summary: json!({}), verdicts: Vec::new(), tables: Vec::new(), scatter: None }
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool) {
        self.verdicts.push((name.into(), pass));
    }

    pub fn certified(&self) -> bool {
        self.verdicts.iter().all(|v| v.1)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// The summary document written to summary.txt.
    pub fn summary_text(&self) -> Result<String> {
        let failures: Vec<&str> = self.verdicts.iter().filter(|v| !v.1).map(|v| v.0.as_str()).collect();
        let rows: serde_json::Map<String, Value> = self.tables.iter().map(|t| (t.name.clone(), json!(t.rows.len()))).collect();
        let doc = json!({
            "experiment": self.experiment,
            "certified": self.certified(),
            "verdicts": self.verdicts.len(),
            "failures": failures,
            "table_rows": rows,
            "scatter_points_above_reference": self.scatter.as_ref().map(|s| s.points_above()),
            "details": self.summary,
        });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }
}

/// Write summary.txt, one CSV per table and scatter.svg (when asked and present).
pub fn emit_reports(bundle: &ReportBundle, out_dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let summary = out_dir.join("summary.txt");
    std::fs::write(&summary, bundle.summary_text()?).map_err(|e| Error::io(&summary, e))?;
    written.push(summary);
    for t in &bundle.tables {
        let path = out_dir.join(&t.name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(&path, io),
            other => Error::Config(format!("{}: {other:?}", path.display())),
        })?;
        w.write_record(&t.header)?;
        for r in &t.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    if svg {
        if let Some(s) = &bundle.scatter {
            let path = out_dir.join("scatter.svg");
            std::fs::write(&path, s.to_svg()).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}
