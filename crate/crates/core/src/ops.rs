//! Discrete differential operators on the MAC grid.
//!
//! Cell scalars obey homogeneous Neumann conditions (ghost cell equals the
//! adjacent interior cell), velocities obey no-slip. Normal velocity
//! components sit on the wall and are zero; tangential components use a
//! reflected ghost (`ghost = -interior`) so the wall-interpolated value is zero.
//!
//! Every operator returns a fresh field and writes zero to boundary normal faces.

use crate::grid::{CellField, GridSpec, VelocityField};

/// Centered gradient of a cell scalar onto the faces.
pub fn grad_cell_to_face(g: &GridSpec, c: &CellField) -> VelocityField {
    debug_assert!(c.matches(g));
    let (nx, ny) = (g.nx(), g.ny());
    let (ihx, ihy) = (1.0 / g.hx(), 1.0 / g.hy());
    let mut w = VelocityField::zeros(g);
    for j in 0..ny {
        for i in 1..nx {
            w.u.set(i, j, (c.get(i, j) - c.get(i - 1, j)) * ihx);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            w.v.set(i, j, (c.get(i, j) - c.get(i, j - 1)) * ihy);
        }
    }
    w
}

/// Per-cell flux difference of a face field.
pub fn div_face_to_cell(g: &GridSpec, w: &VelocityField) -> CellField {
    debug_assert!(w.matches(g));
    let (ihx, ihy) = (1.0 / g.hx(), 1.0 / g.hy());
    CellField::from_index_fn(g, |i, j| {
        (w.u.get(i + 1, j) - w.u.get(i, j)) * ihx + (w.v.get(i, j + 1) - w.v.get(i, j)) * ihy
    })
}

/// Five-point Laplacian with mirrored ghosts (zero normal derivative).
pub fn lap_cell_neumann(g: &GridSpec, c: &CellField) -> CellField {
    debug_assert!(c.matches(g));
    let (nx, ny) = (g.nx(), g.ny());
    let (ihx2, ihy2) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
    CellField::from_index_fn(g, |i, j| {
        let cc = c.get(i, j);
        let w = if i > 0 { c.get(i - 1, j) } else { cc };
        let e = if i + 1 < nx { c.get(i + 1, j) } else { cc };
        let s = if j > 0 { c.get(i, j - 1) } else { cc };
        let n = if j + 1 < ny { c.get(i, j + 1) } else { cc };
        (w - 2.0 * cc + e) * ihx2 + (s - 2.0 * cc + n) * ihy2
    })
}

/// Five-point vector Laplacian with no-slip walls.
pub fn lap_face_dirichlet(g: &GridSpec, w: &VelocityField) -> VelocityField {
    debug_assert!(w.matches(g));
    let (nx, ny) = (g.nx(), g.ny());
    let (ihx2, ihy2) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
    let mut out = VelocityField::zeros(g);
    for j in 0..ny {
        for i in 1..nx {
            let c = w.u.get(i, j);
            let s = if j > 0 { w.u.get(i, j - 1) } else { -c };
            let n = if j + 1 < ny { w.u.get(i, j + 1) } else { -c };
            let val = (w.u.get(i - 1, j) - 2.0 * c + w.u.get(i + 1, j)) * ihx2
                + (s - 2.0 * c + n) * ihy2;
            out.u.set(i, j, val);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let c = w.v.get(i, j);
            let west = if i > 0 { w.v.get(i - 1, j) } else { -c };
            let east = if i + 1 < nx { w.v.get(i + 1, j) } else { -c };
            let val = (west - 2.0 * c + east) * ihx2
                + (w.v.get(i, j - 1) - 2.0 * c + w.v.get(i, j + 1)) * ihy2;
            out.v.set(i, j, val);
        }
    }
    out
}

/// Conservative transport term `div(u * phi)` with `phi` averaged to faces.
pub fn advect_conservative(g: &GridSpec, u: &VelocityField, phi: &CellField) -> CellField {
    debug_assert!(u.matches(g) && phi.matches(g));
    let (nx, ny) = (g.nx(), g.ny());
    let mut flux = VelocityField::zeros(g);
    for j in 0..ny {
        for i in 1..nx {
            let avg = 0.5 * (phi.get(i - 1, j) + phi.get(i, j));
            flux.u.set(i, j, u.u.get(i, j) * avg);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let avg = 0.5 * (phi.get(i, j - 1) + phi.get(i, j));
            flux.v.set(i, j, u.v.get(i, j) * avg);
        }
    }
    div_face_to_cell(g, &flux)
}

/// Advective form `u . grad u` evaluated on each face.
///
/// The advected component is differenced centrally (reflected ghosts at the
/// walls); the cross component is the four-point average around the face.
pub fn convect(g: &GridSpec, w: &VelocityField) -> VelocityField {
    debug_assert!(w.matches(g));
    let (nx, ny) = (g.nx(), g.ny());
    let (i2hx, i2hy) = (0.5 / g.hx(), 0.5 / g.hy());
    let mut out = VelocityField::zeros(g);
    for j in 0..ny {
        for i in 1..nx {
            let c = w.u.get(i, j);
            let dudx = (w.u.get(i + 1, j) - w.u.get(i - 1, j)) * i2hx;
            let s = if j > 0 { w.u.get(i, j - 1) } else { -c };
            let n = if j + 1 < ny { w.u.get(i, j + 1) } else { -c };
            let dudy = (n - s) * i2hy;
            let vbar = 0.25
                * (w.v.get(i - 1, j) + w.v.get(i, j) + w.v.get(i - 1, j + 1) + w.v.get(i, j + 1));
            out.u.set(i, j, c * dudx + vbar * dudy);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let c = w.v.get(i, j);
            let dvdy = (w.v.get(i, j + 1) - w.v.get(i, j - 1)) * i2hy;
            let west = if i > 0 { w.v.get(i - 1, j) } else { -c };
            let east = if i + 1 < nx { w.v.get(i + 1, j) } else { -c };
            let dvdx = (east - west) * i2hx;
            let ubar = 0.25
                * (w.u.get(i, j - 1) + w.u.get(i + 1, j - 1) + w.u.get(i, j) + w.u.get(i + 1, j));
            out.v.set(i, j, ubar * dvdx + c * dvdy);
        }
    }
    out
}

/// Capillary force `phi * grad(mu)` on faces, `phi` averaged to the face.
pub fn phi_grad_mu(g: &GridSpec, phi: &CellField, mu: &CellField) -> VelocityField {
    debug_assert!(phi.matches(g) && mu.matches(g));
    let mut w = grad_cell_to_face(g, mu);
    let (nx, ny) = (g.nx(), g.ny());
    for j in 0..ny {
        for i in 1..nx {
            let avg = 0.5 * (phi.get(i - 1, j) + phi.get(i, j));
            let k = w.u.idx(i, j);
            w.u.data_mut()[k] *= avg;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let avg = 0.5 * (phi.get(i, j - 1) + phi.get(i, j));
            let k = w.v.idx(i, j);
            w.v.data_mut()[k] *= avg;
        }
    }
    w
}

/// Cell scalar averaged to faces (boundary faces take the adjacent cell value).
pub fn cell_to_face_average(g: &GridSpec, c: &CellField) -> VelocityField {
    let (nx, ny) = (g.nx(), g.ny());
    let mut w = VelocityField::zeros(g);
    for j in 0..ny {
        for i in 1..nx {
            w.u.set(i, j, 0.5 * (c.get(i - 1, j) + c.get(i, j)));
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            w.v.set(i, j, 0.5 * (c.get(i, j - 1) + c.get(i, j)));
        }
    }
    w
}
