//! Result tables and their CSV, JSON and SVG renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fpmr_core::C64;
use serde::{Deserialize, Serialize};

use crate::config::{Format, OutputConfig};
use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Named columns of equal length; the first column is the abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
}

impl Table {
    /// Abscissa plus real and imaginary parts of a complex series.
    pub fn complex(name: &str, axis_name: &str, axis: Vec<f64>, values: &[C64]) -> Self {
        Self {
            name: name.into(),
            columns: vec![
                Column {
                    name: axis_name.into(),
                    values: axis,
                },
                Column {
                    name: "re".into(),
                    values: values.iter().map(|v| v.re).collect(),
                },
                Column {
                    name: "im".into(),
                    values: values.iter().map(|v| v.im).collect(),
                },
            ],
        }
    }

    pub fn with_column(mut self, name: &str, values: Vec<f64>) -> Self {
        self.columns.push(Column {
            name: name.into(),
            values,
        });
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    /// Complex series from the `re` and `im` columns.
    pub fn complex_values(&self) -> Option<Vec<C64>> {
        let re = self.column("re")?;
        let im = self.column("im")?;
        Some(re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect())
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Error> {
    fs::write(path, contents).map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// CSV with one header row. Numbers use the shortest representation that
/// parses back to the same double.
pub fn to_csv(table: &Table) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Output {
        path: PathBuf::from(&table.name),
        source: std::io::Error::other(e),
    };
    w.write_record(table.columns.iter().map(|c| c.name.as_str())).map_err(io)?;
    for r in 0..table.rows() {
        w.write_record(table.columns.iter().map(|c| format!("{}", c.values[r]))).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| io(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_json(table: &Table) -> String {
    serde_json::to_string_pretty(table).expect("tables serialise")
}

pub fn from_json(text: &str) -> serde_json::Result<Table> {
    serde_json::from_str(text)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line plot of every non-abscissa column against the first one.
pub fn to_svg(table: &Table) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 48.0;
    const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let x = table.columns.first().map(|c| c.values.as_slice()).unwrap_or(&[]);
    let finite = |v: &[f64]| v.iter().copied().filter(|a| a.is_finite()).collect::<Vec<_>>();
    let bounds = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() && hi > lo {
            (lo, hi)
        } else if lo.is_finite() {
            (lo - 0.5, lo + 0.5)
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1) = bounds(&finite(x));
    let ys: Vec<f64> = table.columns.iter().skip(1).flat_map(|c| finite(&c.values)).collect();
    let (y0, y1) = bounds(&ys);
    let px = |v: f64| M + (v - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |v: f64| H - M - (v - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(&table.name));
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    for (k, c) in table.columns.iter().skip(1).enumerate() {
        let pts: Vec<String> = x
            .iter()
            .zip(&c.values)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1" points="{}"><title>{}</title></polyline>"#,
            COLOURS[k % COLOURS.len()],
            pts.join(" "),
            escape(&c.name)
        );
    }
    if let Some(c) = table.columns.first() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{} [{:.4e}, {:.4e}]</text>"#,
            W / 2.0,
            H - 12.0,
            escape(&c.name),
            x0,
            x1
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes every table in every requested format, plus SVG plots when asked.
/// File names are `<table>.<ext>`; returns the paths in write order.
pub fn emit_outputs(tables: &[Table], out: &OutputConfig) -> Result<Vec<PathBuf>, Error> {
    fs::create_dir_all(&out.directory).map_err(|source| Error::Output {
        path: out.directory.clone(),
        source,
    })?;
    let mut written = Vec::new();
    for t in tables {
        for f in &out.formats {
            let (ext, body) = match f {
                Format::Csv => ("csv", to_csv(t)?),
                Format::Json => ("json", to_json(t)),
            };
            let path = out.directory.join(format!("{}.{ext}", t.name));
            write_file(&path, body.as_bytes())?;
            written.push(path);
        }
        if out.plot {
            let path = out.directory.join(format!("{}.svg", t.name));
            write_file(&path, to_svg(t).as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}
