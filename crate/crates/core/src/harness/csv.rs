//! CSV output of run reports and the matching readers.
//!
//! Numbers are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::run::RunReport;
use crate::{Error, Result};

pub const ERRORS_FILE: &str = "errors.csv";
pub const BANDWIDTHS_FILE: &str = "bandwidths.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";

pub fn snapshot_file(method: &str) -> String {
    format!("snapshots_{method}.csv")
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

macro_rules! put {
    ($w:expr, $path:expr, $($arg:tt)*) => {
        writeln!($w, $($arg)*).map_err(|e| Error::io($path, e))?
    };
}

/// Writes all report files into `dir` (created if missing) and returns
/// their paths in a fixed order.
pub fn export_csv(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    for snaps in &report.snapshots {
        let path = dir.join(snapshot_file(snaps.method.name()));
        let mut w = create(&path)?;
        put!(w, &path, "t,x,u");
        for f in &snaps.fields {
            let t = num(f.time);
            for (i, u) in f.values.iter().enumerate() {
                put!(w, &path, "{t},{},{}", num(f.grid.center(i)), num(*u));
            }
        }
        finish(w, &path)?;
        written.push(path);
    }

    let path = dir.join(ERRORS_FILE);
    let mut w = create(&path)?;
    let mut header = String::from("t");
    for (a, b) in &report.pairs {
        header.push_str(&format!(",L1_{a}_{b},L2_{a}_{b}"));
    }
    put!(w, &path, "{header}");
    for row in &report.errors {
        let mut line = num(row.time);
        for (l1, l2) in &row.values {
            line.push(',');
            line.push_str(&num(*l1));
            line.push(',');
            line.push_str(&num(*l2));
        }
        put!(w, &path, "{line}");
    }
    finish(w, &path)?;
    written.push(path);

    let path = dir.join(BANDWIDTHS_FILE);
    let mut w = create(&path)?;
    put!(w, &path, "t,epsilon,h1,h2,curvature_norm,iterations,method");
    for (t, r) in &report.bandwidths {
        put!(
            w,
            &path,
            "{},{},{},{},{},{},{}",
            num(*t),
            num(r.epsilon),
            num(r.h1),
            num(r.h2),
            num(r.curvature_norm),
            r.iterations,
            r.method.name()
        );
    }
    finish(w, &path)?;
    written.push(path);

    let path = dir.join(DIAGNOSTICS_FILE);
    let mut w = create(&path)?;
    put!(w, &path, "method,initial_mass,final_mass,initial_max,final_max,plateau_width,in_attracting_set,excess");
    for d in &report.diagnostics {
        let first = |v: &[f64]| v.first().copied().map(num).unwrap_or_default();
        let last = |v: &[f64]| v.last().copied().map(num).unwrap_or_default();
        let (inside, excess) = match &d.attracting {
            Some(a) => (a.in_set.to_string(), num(a.excess)),
            None => (String::new(), String::new()),
        };
        put!(
            w,
            &path,
            "{},{},{},{},{},{},{},{}",
            d.method.name(),
            first(&d.mass),
            last(&d.mass),
            first(&d.max),
            last(&d.max),
            d.plateau_width.map(|p| p.to_string()).unwrap_or_default(),
            inside,
            excess
        );
    }
    finish(w, &path)?;
    written.push(path);
    Ok(written)
}

/// One time block of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBlock {
    pub time: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_row(path: &Path, line_no: usize, line: &str, width: usize) -> Result<Vec<f64>> {
    let cells: Vec<&str> = line.split(',').collect();
    if cells.len() != width {
        return Err(Error::Csv {
            path: path.into(),
            reason: format!("line {line_no}: expected {width} columns, got {}", cells.len()),
        });
    }
    cells
        .iter()
        .map(|c| {
            c.trim().parse::<f64>().map_err(|_| Error::Csv {
                path: path.into(),
                reason: format!("line {line_no}: '{c}' is not a number"),
            })
        })
        .collect()
}

pub fn import_snapshots(path: &Path) -> Result<Vec<SnapshotBlock>> {
    let text = read(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "t,x,u")) => {}
        _ => return Err(Error::Csv { path: path.into(), reason: "missing 't,x,u' header".into() }),
    }
    let mut out: Vec<SnapshotBlock> = Vec::new();
    for (no, line) in lines {
        let v = parse_row(path, no + 1, line, 3)?;
        match out.last_mut() {
            Some(b) if b.time.to_bits() == v[0].to_bits() => {
                b.x.push(v[1]);
                b.u.push(v[2]);
            }
            _ => out.push(SnapshotBlock { time: v[0], x: vec![v[1]], u: vec![v[2]] }),
        }
    }
    Ok(out)
}

/// Header and numeric rows of an errors file.
pub fn import_errors(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = read(path)?;
    let mut lines = text.lines().enumerate();
    let header: Vec<String> = match lines.next() {
        Some((_, h)) if h.starts_with('t') => h.split(',').map(str::to_owned).collect(),
        _ => return Err(Error::Csv { path: path.into(), reason: "missing header".into() }),
    };
    let rows = lines.map(|(no, l)| parse_row(path, no + 1, l, header.len())).collect::<Result<_>>()?;
    Ok((header, rows))
}

/// Sample positions from the first column of a text file; a non-numeric
/// first line is taken as a header.
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let cell = line.split(',').next().unwrap_or("").trim();
        if cell.is_empty() || cell.starts_with('#') {
            continue;
        }
        match cell.parse::<f64>() {
            Ok(x) => out.push(x),
            Err(_) if no == 0 => {}
            Err(_) => {
                return Err(Error::Csv { path: path.into(), reason: format!("line {}: '{cell}' is not a number", no + 1) })
            }
        }
    }
    Ok(out)
}
