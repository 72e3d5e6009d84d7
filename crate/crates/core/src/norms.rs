//! Discrete inner products and norms (midpoint quadrature).
//!
//! Cell values carry weight `hx*hy`. Interior faces carry weight `hx*hy`,
//! boundary normal faces half of that. The velocity gradient seminorm is the
//! one induced by [`lap_face_dirichlet`], i.e. `|grad w|^2 = -<lap w, w>`.

use crate::grid::{CellField, FaceField, GridSpec, VelocityField};
use crate::ops::{grad_cell_to_face, lap_cell_neumann, lap_face_dirichlet};

pub fn integrate_cell(g: &GridSpec, c: &CellField) -> f64 {
    c.data().iter().sum::<f64>() * g.cell_area()
}

pub fn inner_cell(g: &GridSpec, a: &CellField, b: &CellField) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum::<f64>() * g.cell_area()
}

fn inner_component(a: &FaceField, b: &FaceField, u_layout: bool) -> f64 {
    let (ni, nj) = (a.ni(), a.nj());
    let mut s = 0.0;
    for j in 0..nj {
        for i in 0..ni {
            let on_wall = if u_layout {
                i == 0 || i == ni - 1
            } else {
                j == 0 || j == nj - 1
            };
            let wgt = if on_wall { 0.5 } else { 1.0 };
            s += wgt * a.get(i, j) * b.get(i, j);
        }
    }
    s
}

pub fn inner_face(g: &GridSpec, a: &VelocityField, b: &VelocityField) -> f64 {
    (inner_component(&a.u, &b.u, true) + inner_component(&a.v, &b.v, false)) * g.cell_area()
}

pub fn l2_cell(g: &GridSpec, c: &CellField) -> f64 {
    inner_cell(g, c, c).sqrt()
}

pub fn l2_face(g: &GridSpec, w: &VelocityField) -> f64 {
    inner_face(g, w, w).max(0.0).sqrt()
}

pub fn linf_cell(c: &CellField) -> f64 {
    c.max_abs()
}

pub fn linf_face(w: &VelocityField) -> f64 {
    w.max_abs()
}

/// `|grad_h c|` for a Neumann cell scalar.
pub fn h1_seminorm_cell(g: &GridSpec, c: &CellField) -> f64 {
    l2_face(g, &grad_cell_to_face(g, c))
}

/// Squared velocity gradient seminorm from explicit difference quotients.
pub fn grad_sq_face(g: &GridSpec, w: &VelocityField) -> f64 {
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let mut s = 0.0;
    // u: differences along x between faces i and i+1 (wall faces are zero)
    for j in 0..ny {
        for i in 0..nx {
            let d = (w.u.get(i + 1, j) - w.u.get(i, j)) / hx;
            s += d * d;
        }
        // u: differences along y between rows j and j+1
        if j + 1 < ny {
            for i in 1..nx {
                let d = (w.u.get(i, j + 1) - w.u.get(i, j)) / hy;
                s += d * d;
            }
        }
    }
    // u: wall-adjacent half edges, reflected ghost gives difference 2u/hy
    for i in 1..nx {
        for j in [0, ny - 1] {
            let d = 2.0 * w.u.get(i, j) / hy;
            s += 0.5 * d * d;
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let d = (w.v.get(i, j + 1) - w.v.get(i, j)) / hy;
            s += d * d;
        }
    }
    for j in 1..ny {
        for i in 0..nx - 1 {
            let d = (w.v.get(i + 1, j) - w.v.get(i, j)) / hx;
            s += d * d;
        }
        for i in [0, nx - 1] {
            let d = 2.0 * w.v.get(i, j) / hx;
            s += 0.5 * d * d;
        }
    }
    s * g.cell_area()
}

pub fn h1_seminorm_face(g: &GridSpec, w: &VelocityField) -> f64 {
    grad_sq_face(g, w).sqrt()
}

/// Full discrete H1 norm of a cell scalar.
pub fn h1_norm_cell(g: &GridSpec, c: &CellField) -> f64 {
    let l2 = l2_cell(g, c);
    let semi = h1_seminorm_cell(g, c);
    (l2 * l2 + semi * semi).sqrt()
}

/// Full discrete H2 norm of a cell scalar (adds the Neumann Laplacian).
pub fn h2_norm_cell(g: &GridSpec, c: &CellField) -> f64 {
    let h1 = h1_norm_cell(g, c);
    let lap = l2_cell(g, &lap_cell_neumann(g, c));
    (h1 * h1 + lap * lap).sqrt()
}

/// Full discrete H1 norm of a velocity field.
pub fn h1_norm_face(g: &GridSpec, w: &VelocityField) -> f64 {
    let l2 = l2_face(g, w);
    (l2 * l2 + grad_sq_face(g, w)).sqrt()
}

/// Full discrete H2 norm of a velocity field (adds the no-slip Laplacian).
pub fn h2_norm_face(g: &GridSpec, w: &VelocityField) -> f64 {
    let h1 = h1_norm_face(g, w);
    let lap = l2_face(g, &lap_face_dirichlet(g, w));
    (h1 * h1 + lap * lap).sqrt()
}
