//! CSV snapshots of macroscopic fields and raw coefficients.

use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::{Field, Mesh};
use crate::state::MacroState;

/// Cell centres with their macroscopic states.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroSnapshot {
    pub centers: Vec<Vec<f64>>,
    pub states: Vec<MacroState>,
}

impl MacroSnapshot {
    pub fn from_field(mesh: &Mesh, field: &Field) -> Self {
        MacroSnapshot::from_states(mesh, field.macro_states())
    }

    pub fn from_states(mesh: &Mesh, states: Vec<MacroState>) -> Self {
        MacroSnapshot {
            centers: (0..mesh.len()).map(|i| mesh.center(i)).collect(),
            states,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Snapshot {
            path: path.to_path_buf(),
            reason: format!("{other:?}"),
        },
    }
}

fn header(n: usize, d: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=n).map(|j| format!("x_{j}")).collect();
    h.push("rho".into());
    h.extend((1..=d).map(|j| format!("u_{j}")));
    h.push("theta".into());
    h.extend((1..=d).map(|j| format!("q_{j}")));
    h
}

/// One row per cell: centre, `rho`, `u`, `theta`, `q`. Values are written
/// in shortest round-trip form, so loading reproduces them bitwise.
pub fn write_snapshot(path: &Path, snap: &MacroSnapshot) -> Result<()> {
    let n = snap.centers.first().map_or(0, Vec::len);
    let d = snap.states.first().map_or(0, |s| s.u.len());
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header(n, d)).map_err(|e| csv_err(path, e))?;
    let mut row = Vec::with_capacity(n + 2 * d + 2);
    for (x, s) in snap.centers.iter().zip(&snap.states) {
        row.clear();
        row.extend(x.iter().map(f64::to_string));
        row.push(s.rho.to_string());
        row.extend(s.u.iter().map(f64::to_string));
        row.push(s.theta.to_string());
        row.extend(s.q.iter().map(f64::to_string));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<MacroSnapshot> {
    let bad = |reason: String| Error::Snapshot {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let cols: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let n = cols.iter().take_while(|c| c.starts_with("x_")).count();
    let d = cols.iter().filter(|c| c.starts_with("u_")).count();
    if cols != header(n, d) {
        return Err(bad(format!("unexpected header {cols:?}")));
    }
    let mut snap = MacroSnapshot {
        centers: Vec::new(),
        states: Vec::new(),
    };
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
        if v.len() != cols.len() {
            return Err(bad(format!("row {} has {} fields", line + 1, v.len())));
        }
        snap.centers.push(v[..n].to_vec());
        snap.states.push(MacroState {
            rho: v[n],
            u: v[n + 1..n + 1 + d].to_vec(),
            theta: v[n + 1 + d],
            q: v[n + 2 + d..].to_vec(),
            heat_flux_complete: true,
        });
    }
    Ok(snap)
}

/// One row per cell: frame velocity, frame temperature, then all
/// coefficients in storage order.
pub fn write_coefficients(path: &Path, field: &Field) -> Result<()> {
    let first = &field.cells[0];
    let d = first.dim();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut h: Vec<String> = (1..=d).map(|j| format!("u_{j}")).collect();
    h.push("theta".into());
    let map = first.map();
    for i in 0..first.coeffs().len() {
        let a = map.components(i);
        let name = a.iter().map(u16::to_string).collect::<Vec<_>>().join("_");
        h.push(format!("f_{name}"));
    }
    w.write_record(&h).map_err(|e| csv_err(path, e))?;
    for s in &field.cells {
        let mut row: Vec<String> = s.u().iter().map(f64::to_string).collect();
        row.push(s.theta().to_string());
        row.extend(s.coeffs().iter().map(f64::to_string));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
