//! Deterministic text writers: the energy time series, CSV snapshots and
//! legacy VTK structured points.
//!
//! Floats are printed in the shortest decimal form that parses back to the
//! same bits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chns_core::{CellField, DiagnosticsRecord, FaceField, GridSpec, SchemeState};

use crate::config::SnapshotFormat;

pub const ENERGY_HEADER: &str = "step,t,mass,energy_original,energy_modified,R,xi,kappa0,gamma,max_div";

/// Shortest round-trip decimal.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `energy.csv`, one row per level.
pub struct EnergyWriter {
    out: BufWriter<File>,
}

impl EnergyWriter {
    pub fn create(path: &Path) -> io::Result<Self> {
        let mut out = create(path)?;
        writeln!(out, "{ENERGY_HEADER}")?;
        Ok(Self { out })
    }

    pub fn row(&mut self, d: &DiagnosticsRecord) -> io::Result<()> {
        let vals = [d.t, d.mass, d.energy_original, d.energy_modified, d.r, d.xi, d.kappa0, d.gamma, d.max_div];
        let cols: Vec<String> = vals.iter().map(|v| num(*v)).collect();
        writeln!(self.out, "{},{}", d.step, cols.join(","))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// `x,y,value` rows, row-major (x fastest), at cell centers.
pub fn write_cell_csv(path: &Path, g: &GridSpec, c: &CellField) -> io::Result<()> {
    write_points(path, c.nx(), c.ny(), |i, j| {
        let (x, y) = g.cell_center(i, j);
        (x, y, c.get(i, j))
    })
}

/// `x,y,value` rows at the native face locations of one velocity component.
pub fn write_face_csv(path: &Path, g: &GridSpec, f: &FaceField, vertical_faces: bool) -> io::Result<()> {
    write_points(path, f.ni(), f.nj(), |i, j| {
        let (x, y) = if vertical_faces { g.u_face(i, j) } else { g.v_face(i, j) };
        (x, y, f.get(i, j))
    })
}

fn write_points(path: &Path, ni: usize, nj: usize, at: impl Fn(usize, usize) -> (f64, f64, f64)) -> io::Result<()> {
    let mut out = create(path)?;
    writeln!(out, "x,y,value")?;
    for j in 0..nj {
        for i in 0..ni {
            let (x, y, v) = at(i, j);
            writeln!(out, "{},{},{}", num(x), num(y), num(v))?;
        }
    }
    out.flush()
}

/// Cell-averaged velocity, `x,y,u,v` rows.
pub fn write_cell_velocity_csv(path: &Path, g: &GridSpec, s: &SchemeState) -> io::Result<()> {
    let (uc, vc) = s.vel.cell_averaged(g);
    let mut out = create(path)?;
    writeln!(out, "x,y,u,v")?;
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let (x, y) = g.cell_center(i, j);
            writeln!(out, "{},{},{},{}", num(x), num(y), num(uc.get(i, j)), num(vc.get(i, j)))?;
        }
    }
    out.flush()
}

/// Legacy VTK structured points: cell scalars `phi`, `mu`, `p` and the
/// cell-averaged velocity.
pub fn write_vtk(path: &Path, g: &GridSpec, s: &SchemeState, step: usize) -> io::Result<()> {
    let mut out = create(path)?;
    let (nx, ny) = (g.nx(), g.ny());
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "chns step {step} t {}", num(s.t))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {} {} 1", nx + 1, ny + 1)?;
    writeln!(out, "ORIGIN {} {} 0", num(g.x0()), num(g.y0()))?;
    writeln!(out, "SPACING {} {} 1", num(g.hx()), num(g.hy()))?;
    writeln!(out, "CELL_DATA {}", nx * ny)?;
    for (name, c) in [("phi", &s.phi), ("mu", &s.mu), ("p", &s.p)] {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in c.data() {
            writeln!(out, "{}", num(*v))?;
        }
    }
    let (uc, vc) = s.vel.cell_averaged(g);
    writeln!(out, "VECTORS velocity double")?;
    for (u, v) in uc.data().iter().zip(vc.data()) {
        writeln!(out, "{} {} 0", num(*u), num(*v))?;
    }
    out.flush()
}

/// Writes the snapshot files of one level and returns their paths.
pub fn write_snapshot(
    dir: &Path,
    g: &GridSpec,
    s: &SchemeState,
    step: usize,
    format: SnapshotFormat,
    cell_velocity: bool,
) -> io::Result<Vec<PathBuf>> {
    let file = |stem: &str, ext: &str| dir.join(format!("{stem}_{step:06}.{ext}"));
    let mut written = vec![];
    match format {
        SnapshotFormat::Csv => {
            for (stem, c) in [("phi", &s.phi), ("p", &s.p)] {
                let path = file(stem, "csv");
                write_cell_csv(&path, g, c)?;
                written.push(path);
            }
            let (pu, pv) = (file("u", "csv"), file("v", "csv"));
            write_face_csv(&pu, g, &s.vel.u, true)?;
            write_face_csv(&pv, g, &s.vel.v, false)?;
            written.extend([pu, pv]);
            if cell_velocity {
                let path = file("vel", "csv");
                write_cell_velocity_csv(&path, g, s)?;
                written.push(path);
            }
        }
        SnapshotFormat::Vtk => {
            let path = file("state", "vtk");
            write_vtk(&path, g, s, step)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1e21, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(1.0), "1.0");
    }

    #[test]
    fn cell_csv_is_row_major() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(3, 2, 0.0, 0.0, 3.0, 2.0).unwrap();
        let c = CellField::from_index_fn(&g, |i, j| (10 * j + i) as f64);
        let path = dir.path().join("c.csv");
        write_cell_csv(&path, &g, &c).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines[1], "0.5,0.5,0.0");
        assert_eq!(lines[2], "1.5,0.5,1.0");
        assert_eq!(lines[4], "0.5,1.5,10.0");
        assert_eq!(lines.len(), 7);
    }
}
