//! Trajectory files: CSV or JSON-lines, each with a `.meta.json` sidecar.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back yields bit-identical values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PhaseState, Trajectory, TrajectoryMeta};
use crate::diagnostics::DiagnosticsSample;
use crate::error::{Error, Result};
use crate::linalg::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(Format::Csv),
            Some("jsonl") => Ok(Format::Jsonl),
            _ => Err(Error::Format(format!("{}: expected a .csv or .jsonl trajectory", path.display()))),
        }
    }
}

const DIAGNOSTIC_COLUMNS: [&str; 8] = ["h", "h_dot", "gamma0", "gamma1", "w", "a_residual", "d_term", "eq_residual"];

/// `traj.csv` → `traj.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn csv_header(dim: usize, diagnostics: bool) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((0..dim).map(|i| format!("u_{i}")));
    cols.extend((0..dim).map(|i| format!("v_{i}")));
    cols.push("running_l2_velocity".into());
    if diagnostics {
        cols.extend(DIAGNOSTIC_COLUMNS.iter().map(|c| c.to_string()));
    }
    cols.join(",")
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |x| x.to_string())
}

pub fn write_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    writeln!(w, "{}", csv_header(traj.meta.dim, traj.diagnostics.is_some()))?;
    for (i, s) in traj.samples.iter().enumerate() {
        let mut row = vec![s.t.to_string()];
        row.extend(s.u.iter().map(f64::to_string));
        row.extend(s.v.iter().map(f64::to_string));
        row.push(traj.running_l2_velocity[i].to_string());
        if let Some(d) = &traj.diagnostics {
            let d = &d[i];
            row.extend([
                d.h.to_string(),
                d.h_dot.to_string(),
                opt(d.gamma0),
                opt(d.gamma1),
                d.w.to_string(),
                d.a_residual.to_string(),
                d.d_term.to_string(),
                d.eq_residual.to_string(),
            ]);
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R, meta: TrajectoryMeta) -> Result<Trajectory> {
    let mut lines = terminated_lines(r, true);
    let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))??;
    let n = meta.dim;
    let diagnostics = if header == csv_header(n, true) {
        true
    } else if header == csv_header(n, false) {
        false
    } else {
        return Err(Error::Format(format!("CSV header does not match a {n}-dimensional trajectory")));
    };
    let width = 2 * n + 2 + if diagnostics { DIAGNOSTIC_COLUMNS.len() } else { 0 };

    let mut samples = Vec::new();
    let mut l2 = Vec::new();
    let mut diag = Vec::new();
    for (k, line) in lines.enumerate() {
        let row = k + 1;
        let line = line?;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(Error::Format(format!("row {row}: expected {width} columns, found {}", cells.len())));
        }
        let num = |j: usize| -> Result<f64> {
            cells[j]
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("row {row}: column {j} is not a number: {:?}", cells[j])))
        };
        let maybe = |j: usize| -> Result<Option<f64>> { if cells[j].is_empty() { Ok(None) } else { num(j).map(Some) } };
        let t = num(0)?;
        let u = Vector::new((1..=n).map(num).collect::<Result<_>>()?);
        let v = Vector::new((n + 1..=2 * n).map(num).collect::<Result<_>>()?);
        samples.push(PhaseState { t, u, v });
        l2.push(num(2 * n + 1)?);
        if diagnostics {
            let b = 2 * n + 2;
            diag.push(DiagnosticsSample {
                t,
                h: num(b)?,
                h_dot: num(b + 1)?,
                gamma0: maybe(b + 2)?,
                gamma1: maybe(b + 3)?,
                w: num(b + 4)?,
                a_residual: num(b + 5)?,
                d_term: num(b + 6)?,
                eq_residual: num(b + 7)?,
            });
        }
    }
    finish(samples, l2, diagnostics.then_some(diag), meta)
}

/// Lines of a file whose every line, including the last, ends in `\n`; an
/// unterminated final line means the file was cut mid-row.
fn terminated_lines<R: BufRead>(mut r: R, header: bool) -> impl Iterator<Item = Result<String>> {
    let mut row = usize::from(!header);
    std::iter::from_fn(move || {
        let mut buf = String::new();
        match r.read_line(&mut buf) {
            Ok(0) => None,
            Ok(_) => {
                let line = row;
                row += 1;
                Some(match buf.strip_suffix('\n') {
                    Some(l) => Ok(l.to_string()),
                    None if header && line == 0 => Err(Error::Format("header line is not terminated".into())),
                    None => Err(Error::Format(format!("row {line}: incomplete, file truncated mid-row"))),
                })
            }
            Err(e) => Some(Err(e.into())),
        }
    })
}

fn finish(
    samples: Vec<PhaseState>,
    running_l2_velocity: Vec<f64>,
    diagnostics: Option<Vec<DiagnosticsSample>>,
    meta: TrajectoryMeta,
) -> Result<Trajectory> {
    if samples.len() != meta.samples {
        return Err(Error::Format(format!(
            "expected {} rows, found {}: file truncated after row {}",
            meta.samples,
            samples.len(),
            samples.len()
        )));
    }
    let traj = Trajectory { samples, running_l2_velocity, diagnostics, meta };
    traj.validate()?;
    Ok(traj)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    t: f64,
    u: Vector,
    v: Vector,
    running_l2_velocity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diagnostics: Option<DiagnosticsSample>,
}

pub fn write_jsonl<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    for (i, s) in traj.samples.iter().enumerate() {
        let row = JsonRow {
            t: s.t,
            u: s.u.clone(),
            v: s.v.clone(),
            running_l2_velocity: traj.running_l2_velocity[i],
            diagnostics: traj.diagnostics.as_ref().map(|d| d[i].clone()),
        };
        serde_json::to_writer(&mut w, &row)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R, meta: TrajectoryMeta) -> Result<Trajectory> {
    let mut samples = Vec::new();
    let mut l2 = Vec::new();
    let mut diag = Vec::new();
    let mut with_diag = None;
    for (k, line) in terminated_lines(r, false).enumerate() {
        let row = k + 1;
        let parsed: JsonRow =
            serde_json::from_str(&line?).map_err(|e| Error::Format(format!("row {row}: {e}")))?;
        if parsed.u.dim() != meta.dim || parsed.v.dim() != meta.dim {
            return Err(Error::Format(format!("row {row}: state dimension differs from {}", meta.dim)));
        }
        let has = parsed.diagnostics.is_some();
        if *with_diag.get_or_insert(has) != has {
            return Err(Error::Format(format!("row {row}: diagnostics present on some rows only")));
        }
        samples.push(PhaseState { t: parsed.t, u: parsed.u, v: parsed.v });
        l2.push(parsed.running_l2_velocity);
        diag.extend(parsed.diagnostics);
    }
    finish(samples, l2, with_diag.unwrap_or(false).then_some(diag), meta)
}

/// Writes the trajectory and its metadata sidecar.
pub fn save(traj: &Trajectory, path: &Path) -> Result<()> {
    let format = Format::from_path(path)?;
    let file = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_csv(traj, file)?,
        Format::Jsonl => write_jsonl(traj, file)?,
    }
    let mut meta = serde_json::to_string_pretty(&traj.meta)?;
    meta.push('\n');
    std::fs::write(sidecar_path(path), meta)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Trajectory> {
    let format = Format::from_path(path)?;
    let meta_path = sidecar_path(path);
    let meta: TrajectoryMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path).map_err(|e| {
        Error::Format(format!("{}: cannot read metadata sidecar: {e}", meta_path.display()))
    })?)?;
    let reader = BufReader::new(File::open(path)?);
    match format {
        Format::Csv => read_csv(reader, meta),
        Format::Jsonl => read_jsonl(reader, meta),
    }
}
