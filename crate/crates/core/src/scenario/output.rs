//! Run directories: one CSV per slice, an atom list, the check table and the
//! canonical scenario text. Floats are written in shortest round-trip
//! exponent form so identical runs produce identical bytes.

use std::fs;
use std::path::Path;

use super::{CheckResult, RunOutcome, Scenario};
use crate::bv::{detect_jumps, Jump, SampledBV, DEFAULT_JUMP_THRESHOLD};
use crate::error::{DropletError, Result};
use crate::field::FieldSlice;

const SLICE_HEADER: &str = "x,p_or_u,V,q_density";
const ATOM_HEADER: &str = "tau_or_t,location,mass";
const CHECK_HEADER: &str = "check,value,tolerance,passed";

fn slice_file(k: usize) -> String {
    format!("slice_{k:03}.csv")
}

pub fn write_run(dir: &Path, outcome: &RunOutcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut atoms = String::from(ATOM_HEADER);
    atoms.push('\n');
    for (k, s) in outcome.slices.iter().enumerate() {
        let mut text = String::from(SLICE_HEADER);
        text.push('\n');
        let g = s.grid();
        let (u, v, q) = (s.velocity.values(), s.cumulative.values(), s.measure.density.values());
        for i in 0..g.len() {
            text.push_str(&format!("{:e},{:e},{:e},{:e}\n", g[i], u[i], v[i], q[i]));
        }
        fs::write(dir.join(slice_file(k)), text)?;
        for a in &s.measure.atoms {
            atoms.push_str(&format!("{:e},{:e},{:e}\n", s.time, a.location, a.mass));
        }
    }
    fs::write(dir.join("atoms.csv"), atoms)?;
    let mut checks = String::from(CHECK_HEADER);
    checks.push('\n');
    for c in &outcome.checks {
        checks.push_str(&format!("{},{:e},{:e},{}\n", c.name, c.value, c.tolerance, c.passed));
    }
    fs::write(dir.join("diagnostics.csv"), checks)?;
    fs::write(dir.join("manifest.toml"), outcome.scenario.to_canonical())?;
    Ok(())
}

/// A run read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredRun {
    pub scenario: Scenario,
    pub slices: Vec<FieldSlice>,
    pub checks: Vec<CheckResult>,
}

fn read_rows(path: &Path, header: &str, width: usize) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path)
        .map_err(|e| DropletError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(DropletError::invalid(format!("{}: expected header `{header}`", path.display())));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let row: Vec<String> = l.split(',').map(str::to_string).collect();
            if row.len() != width {
                return Err(DropletError::invalid(format!(
                    "{}: line {} has {} fields",
                    path.display(),
                    i + 2,
                    row.len()
                )));
            }
            Ok(row)
        })
        .collect()
}

fn num(path: &Path, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| DropletError::invalid(format!("{}: bad number `{s}`", path.display())))
}

/// Rebuild a slice from node values. Jumps of `V` come from the atom list;
/// jumps of `p` are re-detected and moved onto an atom in the same cells.
fn rebuild(time: f64, rows: &[[f64; 3]], atoms: &[(f64, f64)]) -> Result<FieldSlice> {
    let grid: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let u = SampledBV::new(grid.clone(), rows.iter().map(|r| r[1]).collect())?;
    let v_vals: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let cell_of = |x: f64| grid.partition_point(|&g| g <= x).saturating_sub(1).min(grid.len() - 2);
    let v_jumps = atoms
        .iter()
        .map(|&(loc, _)| {
            let i = cell_of(loc);
            Jump {
                location: loc,
                left: v_vals[i],
                right: v_vals[i + 1],
                first_cell: i,
                last_cell: i,
            }
        })
        .collect();
    let cumulative = SampledBV::new(grid.clone(), v_vals.clone())?.with_jumps(v_jumps)?;
    let mut velocity = detect_jumps(&u, DEFAULT_JUMP_THRESHOLD)?;
    for j in velocity.jumps_mut() {
        let (a, b) = (grid[j.first_cell], grid[j.last_cell + 1]);
        if let Some(&(loc, _)) = atoms.iter().find(|(x, _)| *x >= a && *x <= b) {
            j.location = loc;
        }
    }
    Ok(FieldSlice::assemble(time, velocity, cumulative))
}

pub fn read_run(dir: &Path) -> Result<StoredRun> {
    let manifest = dir.join("manifest.toml");
    let text = fs::read_to_string(&manifest)
        .map_err(|e| DropletError::Io(format!("{}: {e}", manifest.display())))?;
    let scenario = Scenario::parse(&text)?;

    let atom_path = dir.join("atoms.csv");
    let mut atoms: Vec<(f64, f64, f64)> = Vec::new();
    for r in read_rows(&atom_path, ATOM_HEADER, 3)? {
        atoms.push((num(&atom_path, &r[0])?, num(&atom_path, &r[1])?, num(&atom_path, &r[2])?));
    }

    let mut slices = Vec::with_capacity(scenario.slices.len());
    for (k, &t) in scenario.slices.iter().enumerate() {
        let path = dir.join(slice_file(k));
        let mut rows = Vec::new();
        for r in read_rows(&path, SLICE_HEADER, 4)? {
            rows.push([num(&path, &r[0])?, num(&path, &r[1])?, num(&path, &r[2])?]);
        }
        let here: Vec<(f64, f64)> = atoms
            .iter()
            .filter(|a| a.0 == t)
            .map(|a| (a.1, a.2))
            .collect();
        slices.push(rebuild(t, &rows, &here)?);
    }

    let check_path = dir.join("diagnostics.csv");
    let mut checks = Vec::new();
    for r in read_rows(&check_path, CHECK_HEADER, 4)? {
        checks.push(CheckResult {
            name: r[0].clone(),
            value: num(&check_path, &r[1])?,
            tolerance: num(&check_path, &r[2])?,
            passed: r[3] == "true",
        });
    }
    Ok(StoredRun {
        scenario,
        slices,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{run_scenario, RunOptions};
    use super::*;

    const SRC: &str = r#"
name = "shock"
solver = "hopf-lax"
data.u0 = { kind = "constant", value = 0.0 }
data.v0 = { kind = "constant", value = 0.0 }
data.u_boundary = { kind = "constant", value = 1.0 }
data.v_boundary = { kind = "constant", value = 1.0 }
grid.x_max = 2.0
grid.cells = 80
time.horizon = 1.0
time.slices = [0.5, 1.0]
"#;

    #[test]
    fn round_trip_and_stable_bytes() {
        let sc = Scenario::parse(SRC).unwrap();
        let out = run_scenario(&sc, &RunOptions::default()).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_run(a.path(), &out).unwrap();
        write_run(b.path(), &out).unwrap();
        for f in ["slice_000.csv", "slice_001.csv", "atoms.csv", "diagnostics.csv", "manifest.toml"] {
            assert_eq!(
                fs::read(a.path().join(f)).unwrap(),
                fs::read(b.path().join(f)).unwrap(),
                "{f}"
            );
        }
        let back = read_run(a.path()).unwrap();
        assert_eq!(back.slices.len(), 2);
        for (s, r) in out.slices.iter().zip(&back.slices) {
            assert_eq!(s.velocity.values(), r.velocity.values());
            assert_eq!(s.cumulative.values(), r.cumulative.values());
            assert_eq!(s.measure.atoms.len(), r.measure.atoms.len());
        }
    }

    #[test]
    fn missing_manifest_is_io_error() {
        let d = tempfile::tempdir().unwrap();
        assert!(matches!(read_run(d.path()), Err(DropletError::Io(_))));
    }
}
