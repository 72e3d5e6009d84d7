use std::f64::consts::PI;

use chns_core::ops::*;
use chns_core::{CellField, GridSpec, VelocityField};

use super::*;

fn rate(e: &[f64]) -> f64 {
    let k = e.len();
    (e[k - 2] / e[k - 1]).log2()
}

fn interior_max(g: &GridSpec, w: &VelocityField, z: &VelocityField) -> f64 {
    max_diff(&pack_vel(g, w), &pack_vel(g, z))
}

/// Max-norm truncation errors of every operator on 16, 32 and 64 cells, and
/// the observed rate at the finest pair.
pub fn study() -> Vec<(&'static str, Vec<f64>, f64)> {
    let sizes = [16usize, 32, 64];
    let mut lap_c = vec![];
    let mut lap_f = vec![];
    let mut grad = vec![];
    let mut div = vec![];
    let mut adv = vec![];
    let mut conv = vec![];
    let mut cap = vec![];
    for &n in &sizes {
        let g = GridSpec::unit_square(n).unwrap();
        let c = CellField::from_fn(&g, |x, y| (PI * x).cos() * (PI * y).cos());
        let exact = c.scaled(-2.0 * PI * PI);
        lap_c.push(max_diff(lap_cell_neumann(&g, &c).data(), exact.data()));

        // solenoidal, no-slip, with vanishing tangential curvature at the walls
        let vel = |x: f64, y: f64| {
            (
                (PI * x).sin().powi(2) * (2.0 * PI * y).sin(),
                -(2.0 * PI * x).sin() * (PI * y).sin().powi(2),
            )
        };
        let w = VelocityField::from_fn(&g, vel);
        let lap_exact = VelocityField::from_fn(&g, |x, y| {
            let (sx, cx) = ((PI * x).sin(), (PI * x).cos());
            let (sy, cy) = ((PI * y).sin(), (PI * y).cos());
            let s2x = 2.0 * PI * PI * (cx * cx - sx * sx);
            let s2y = 2.0 * PI * PI * (cy * cy - sy * sy);
            (
                s2x * (2.0 * PI * y).sin() - 4.0 * PI * PI * sx * sx * (2.0 * PI * y).sin(),
                4.0 * PI * PI * (2.0 * PI * x).sin() * sy * sy - (2.0 * PI * x).sin() * s2y,
            )
        });
        lap_f.push(interior_max(&g, &lap_face_dirichlet(&g, &w), &lap_exact));

        let grad_exact = VelocityField::from_fn(&g, |x, y| {
            (
                -PI * (PI * x).sin() * (PI * y).cos(),
                -PI * (PI * x).cos() * (PI * y).sin(),
            )
        });
        grad.push(interior_max(&g, &grad_cell_to_face(&g, &c), &grad_exact));

        let f = VelocityField::from_fn(&g, |x, y| ((PI * x).sin() * y, x * (PI * y).sin()));
        let div_exact = CellField::from_fn(&g, |x, y| PI * (PI * x).cos() * y + PI * x * (PI * y).cos());
        div.push(max_diff(div_face_to_cell(&g, &f).data(), div_exact.data()));

        // w is solenoidal, so div(w phi) = w . grad phi
        let adv_exact = CellField::from_fn(&g, |x, y| {
            let (u, v) = vel(x, y);
            -PI * u * (PI * x).sin() * (PI * y).cos() - PI * v * (PI * x).cos() * (PI * y).sin()
        });
        adv.push(max_diff(advect_conservative(&g, &w, &c).data(), adv_exact.data()));

        let conv_exact = VelocityField::from_fn(&g, |x, y| {
            let (u, v) = vel(x, y);
            let ux = PI * (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
            let uy = 2.0 * PI * (PI * x).sin().powi(2) * (2.0 * PI * y).cos();
            let vx = -2.0 * PI * (2.0 * PI * x).cos() * (PI * y).sin().powi(2);
            let vy = -PI * (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
            (u * ux + v * uy, u * vx + v * vy)
        });
        conv.push(interior_max(&g, &convect(&g, &w), &conv_exact));

        let mu = CellField::from_fn(&g, |x, y| x * x * (PI * y).cos());
        let cap_exact = VelocityField::from_fn(&g, |x, y| {
            let phi = (PI * x).cos() * (PI * y).cos();
            (phi * 2.0 * x * (PI * y).cos(), -phi * PI * x * x * (PI * y).sin())
        });
        cap.push(interior_max(&g, &phi_grad_mu(&g, &c, &mu), &cap_exact));
    }
    [
        ("cell laplacian", lap_c),
        ("face laplacian", lap_f),
        ("gradient", grad),
        ("divergence", div),
        ("transport", adv),
        ("convection", conv),
        ("capillary force", cap),
    ]
    .into_iter()
    .map(|(name, e)| {
        let r = rate(&e);
        (name, e, r)
    })
    .collect()
}
