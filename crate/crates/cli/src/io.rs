//! Field files.
//!
//! CSV: a one-line header, then `index,x,y,re,im` rows for the inside
//! nodes in lattice order. Undefined values are written as `NaN`.
//!
//! ```text
//! index,x,y,re,im
//! 8257,-0.9921875,-0.1171875,-0.99218,-0.11718
//! ```
//!
//! JSON: `{"header": {role, kind, n, extents, columns}, "nodes": [[index, x, y, re, im], ...]}`
//! with `null` for undefined values.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use quasiextremal::fields::grid::DomainGrid;
use quasiextremal::fields::MappingField;
use quasiextremal::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::specs::domain_name;

/// `(index, x, y, re, im)` with `None` for undefined values.
type NodeRow = (usize, f64, f64, Option<f64>, Option<f64>);

const COLUMNS: [&str; 5] = ["index", "x", "y", "re", "im"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub role: String,
    pub kind: String,
    pub n: usize,
    /// `[x_min, x_max, y_min, y_max]`.
    pub extents: [f64; 4],
    #[serde(default)]
    pub columns: Vec<String>,
}

impl FieldHeader {
    pub fn new(role: &str, grid: &DomainGrid) -> Self {
        let (x0, x1, y0, y1) = grid.kind().bounds();
        FieldHeader {
            role: role.into(),
            kind: domain_name(&grid.kind()).into(),
            n: grid.n(),
            extents: [x0, x1, y0, y1],
            columns: COLUMNS.iter().map(|c| c.to_string()).collect(),
        }
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn opt(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Write inside-node values as CSV and JSON next to each other.
pub fn write_field(
    dir: &Path,
    stem: &str,
    role: &str,
    grid: &DomainGrid,
    values: &[Complex64],
) -> CliResult<Vec<String>> {
    let header = FieldHeader::new(role, grid);
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut out = create(&csv_path)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(COLUMNS).map_err(|e| CliError::io(&csv_path, e))?;
        for &k in grid.nodes() {
            let p = grid.point(k);
            let v = values[k];
            w.serialize((k, p.re, p.im, v.re, v.im))
                .map_err(|e| CliError::io(&csv_path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&csv_path, e))?;
    }
    out.flush().map_err(|e| CliError::io(&csv_path, e))?;

    #[derive(Serialize)]
    struct Doc<'a> {
        header: &'a FieldHeader,
        nodes: Vec<NodeRow>,
    }
    let nodes = grid
        .nodes()
        .iter()
        .map(|&k| {
            let p = grid.point(k);
            (k, p.re, p.im, opt(values[k].re), opt(values[k].im))
        })
        .collect();
    let json_path = dir.join(format!("{stem}.json"));
    write_json(&json_path, &Doc { header: &header, nodes })?;
    Ok(vec![csv_path.display().to_string(), json_path.display().to_string()])
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::io(path, e))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(path, e))
}

/// A plain CSV table with a header row.
pub fn write_table<R: Serialize>(path: &Path, columns: &[&str], rows: impl IntoIterator<Item = R>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(columns).map_err(|e| CliError::io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Read a mapping field written by [`write_field`] onto `grid`; the format
/// follows the file extension. CSV files carry no grid metadata, so their
/// node indices are taken relative to `grid`; JSON headers must match it.
pub fn read_field(path: &Path, grid: &Arc<DomainGrid>) -> CliResult<MappingField> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rows = if path.extension().is_some_and(|e| e == "json") {
        #[derive(Deserialize)]
        struct Doc {
            header: FieldHeader,
            nodes: Vec<NodeRow>,
        }
        let doc: Doc = serde_json::from_str(&text).map_err(|e| CliError::io(path, e))?;
        let want = FieldHeader::new(&doc.header.role, grid);
        if (&doc.header.kind, doc.header.n, doc.header.extents) != (&want.kind, want.n, want.extents) {
            return Err(CliError::io(
                path,
                format!(
                    "field is on a {} grid of size {} with extents {:?}, the run uses {} of size {} with extents {:?}",
                    doc.header.kind, doc.header.n, doc.header.extents, want.kind, want.n, want.extents
                ),
            ));
        }
        doc.nodes
            .into_iter()
            .map(|(k, _, _, re, im)| (k, re.unwrap_or(f64::NAN), im.unwrap_or(f64::NAN)))
            .collect::<Vec<_>>()
    } else {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for rec in r.deserialize::<(usize, f64, f64, f64, f64)>() {
            let (k, _, _, re, im) = rec.map_err(|e| CliError::io(path, e))?;
            rows.push((k, re, im));
        }
        rows
    };
    let mut seen = vec![false; grid.len()];
    let mut values = vec![Complex64::new(f64::NAN, f64::NAN); grid.len()];
    for (k, re, im) in rows {
        if k >= grid.len() || !grid.is_inside(k) || seen[k] {
            return Err(CliError::io(
                path,
                format!("node index {k} is not an unused inside node of the run grid"),
            ));
        }
        seen[k] = true;
        values[k] = Complex64::new(re, im);
    }
    let missing = grid.nodes().iter().filter(|&&k| !seen[k]).count();
    if missing > 0 {
        return Err(CliError::io(
            path,
            format!("{missing} inside node(s) of the run grid have no value"),
        ));
    }
    MappingField::from_values(grid.clone(), values).map_err(|e| CliError::io(path, e))
}
