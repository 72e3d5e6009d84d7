//! Dense monolithic reference for one step of either scheme, and a bisection
//! reference for the relaxation parameter.

use chns_core::norms::{inner_cell, inner_face};
use chns_core::ops::{advect_conservative, convect, grad_cell_to_face, lap_cell_neumann, phi_grad_mu};
use chns_core::physics::{f_prime, gamma_of, sav_q};
use chns_core::scheme::StepReport;
use chns_core::{CellField, GridSpec, PhysParams, SchemeState, VelocityField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::*;

pub fn oracle_params() -> PhysParams {
    PhysParams {
        beta: 0.5,
        delta0: 0.3,
        theta: 0.8,
        ..PhysParams::new(2e-2, 0.3, 5e-2, 0.2)
    }
}

pub fn random_state(g: &GridSpec, p: &PhysParams, rng: &mut ChaCha8Rng, t: f64) -> SchemeState {
    let phi = random_cell(g, rng, -1.0, 1.0);
    let mut pr = random_cell(g, rng, -1.0, 1.0);
    pr.remove_mean();
    let q = sav_q(g, &phi, p).unwrap();
    SchemeState {
        mu: random_cell(g, rng, -2.0, 2.0),
        vel: random_vel(g, rng, 0.5),
        p: pr,
        r: q * rng.gen_range(0.8..1.2),
        xi: 1.0,
        t,
        phi,
    }
}

/// Result of the dense coupled solve of one step.
pub struct Oracle {
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
    pub xi: f64,
    pub vel: Vec<f64>,
    pub p: Vec<f64>,
}

/// Assembles every unknown of one step, `[phi, mu, u_hat, xi]`, into a single
/// dense linear system built from the discrete model equations, then runs the
/// correction as a bordered Stokes solve. `prev = None` is backward Euler,
/// `Some` is BDF2 with extrapolated explicit terms.
pub fn monolithic(g: &GridSpec, p: &PhysParams, tau: f64, cur: &SchemeState, prev: Option<&SchemeState>) -> Oracle {
    let (n, nf) = (g.num_cells(), n_faces(g));
    let ext_c = |a: &CellField, b: Option<&CellField>| match b {
        Some(b) => CellField::lin_comb(2.0, a, -1.0, b),
        None => a.clone(),
    };
    let phi_s = ext_c(&cur.phi, prev.map(|s| &s.phi));
    let mu_s = ext_c(&cur.mu, prev.map(|s| &s.mu));
    let p_s = ext_c(&cur.p, prev.map(|s| &s.p));
    let u_s = match prev {
        Some(s) => VelocityField::lin_comb(2.0, &cur.vel, -1.0, &s.vel),
        None => cur.vel.clone(),
    };
    // sigma: weight of the implicit terms; history: the known part of the
    // time derivative; alpha: velocity mass coefficient
    let (sigma, alpha) = match prev {
        Some(_) => (2.0 * tau / 3.0, 1.5 / tau),
        None => (tau, 1.0 / tau),
    };
    let (phi_hist, r_hist, u_rhs) = match prev {
        Some(s) => (
            CellField::lin_comb(4.0 / 3.0, &cur.phi, -1.0 / 3.0, &s.phi),
            (4.0 * cur.r - s.r) / 3.0,
            VelocityField::lin_comb(2.0 / tau, &cur.vel, -0.5 / tau, &s.vel),
        ),
        None => (cur.phi.clone(), cur.r, cur.vel.scaled(1.0 / tau)),
    };

    let q = sav_q(g, &phi_s, p).unwrap();
    let gamma = gamma_of(g, &p_s, p.theta);
    let fp = f_prime(&phi_s, p);
    let d = advect_conservative(g, &u_s, &phi_s);
    let g_p = grad_cell_to_face(g, &p_s).scaled(gamma);
    let mut c = phi_grad_mu(g, &phi_s, &mu_s);
    c += &convect(g, &u_s);
    c += &g_p;

    let lap_c = |x: &[f64]| lap_cell_neumann(g, &cell(g, x)).into_data();
    let id = |x: &[f64]| x.to_vec();
    let (o_phi, o_mu, o_u, o_xi) = (0, n, 2 * n, 2 * n + nf);
    let mut a = Dense::zeros(o_xi + 1);
    let mut b = vec![0.0; o_xi + 1];

    // phi - sigma*M*lap(mu) + sigma*xi*d = history
    a.put_map(o_phi, o_phi, n, 1.0, id);
    a.put_map(o_phi, o_mu, n, -sigma * p.m, lap_c);
    for k in 0..n {
        *a.at(o_phi + k, o_xi) = sigma * d.data()[k];
        b[o_phi + k] = phi_hist.data()[k];
    }
    // mu + lambda*lap(phi) - lambda*beta*phi - xi*lambda*F' = 0
    a.put_map(o_mu, o_mu, n, 1.0, id);
    a.put_map(o_mu, o_phi, n, p.lambda, lap_c);
    a.put_map(o_mu, o_phi, n, -p.lambda * p.beta, id);
    for k in 0..n {
        *a.at(o_mu + k, o_xi) = -p.lambda * fp.data()[k];
    }
    // alpha*u - nu*lap(u) + xi*c = history
    a.put_map(o_u, o_u, nf, alpha, id);
    a.put_map(o_u, o_u, nf, -p.nu, lap_f_map(g));
    let cp = pack_vel(g, &c);
    let up = pack_vel(g, &u_rhs);
    for k in 0..nf {
        *a.at(o_u + k, o_xi) = cp[k];
        b[o_u + k] = up[k];
    }
    // q*xi - sigma/(2 lambda q) [lambda (F', (phi - history)/sigma) + (mu, d) + (c, u)] = R history
    let kk = sigma / (2.0 * p.lambda * q);
    *a.at(o_xi, o_xi) = q;
    let mut e = CellField::zeros(g);
    for k in 0..n {
        e.data_mut()[k] = 1.0;
        *a.at(o_xi, o_phi + k) = -kk * p.lambda / sigma * inner_cell(g, &fp, &e);
        *a.at(o_xi, o_mu + k) = -kk * inner_cell(g, &d, &e);
        e.data_mut()[k] = 0.0;
    }
    let mut ef = vec![0.0; nf];
    for k in 0..nf {
        ef[k] = 1.0;
        *a.at(o_xi, o_u + k) = -kk * inner_face(g, &c, &unpack_vel(g, &ef));
        ef[k] = 0.0;
    }
    b[o_xi] = r_hist - kk * p.lambda / sigma * inner_cell(g, &fp, &phi_hist);

    let x = a.solve(&b);
    let uhat = unpack_vel(g, &x[o_u..o_xi]);
    let (vel, pr) = stokes_oracle(g, alpha, p.nu, &uhat, &g_p);
    Oracle {
        phi: x[o_phi..o_mu].to_vec(),
        mu: x[o_mu..o_u].to_vec(),
        xi: x[o_xi],
        vel,
        p: pr,
    }
}

pub fn check(o: &Oracle, g: &GridSpec, s: &SchemeState, r: &StepReport) {
    let scale = |v: &[f64]| v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    assert!(max_diff(s.phi.data(), &o.phi) <= 1e-10 * scale(&o.phi));
    assert!(max_diff(s.mu.data(), &o.mu) <= 1e-10 * scale(&o.mu));
    assert!(max_diff(&pack_vel(g, &s.vel), &o.vel) <= 1e-10 * scale(&o.vel));
    assert!(max_diff(s.p.data(), &o.p) <= 1e-10 * scale(&o.p));
    assert!((r.xi - o.xi).abs() <= 1e-10 * o.xi.abs().max(1.0));
    assert!((s.xi - o.xi).abs() <= 1e-10 * o.xi.abs().max(1.0));
}

/// Smallest `k` in `[0, 1]` with `(s + k (r_hat - s))^2 - r_hat^2 <= budget`.
pub fn kappa_bisect(r_hat: f64, s: f64, budget: f64) -> f64 {
    let g = |k: f64| (s + k * (r_hat - s)).powi(2) - r_hat * r_hat - budget;
    if g(0.0) <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
