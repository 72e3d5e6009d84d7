//! Model parameters, the double-well potential, SAV bookkeeping and the
//! mass/energy functionals.

use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec, VelocityField};
use crate::norms::{grad_sq_face, h1_seminorm_cell, inner_cell, integrate_cell, l2_face};
use crate::ops::grad_cell_to_face;

/// Lower bound on `E1(phi) + delta0` before any square root is taken.
pub const ENERGY_FLOOR: f64 = 1e-12;

/// Physical and algorithmic scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    /// Mobility `M`.
    pub m: f64,
    /// Mixing energy density `lambda`.
    pub lambda: f64,
    /// Kinematic viscosity `nu`.
    pub nu: f64,
    /// Interface width `eps`.
    pub eps: f64,
    /// Stabilization `beta`.
    pub beta: f64,
    /// SAV shift `delta0`.
    pub delta0: f64,
    /// Scale of the explicit pressure increment.
    pub theta: f64,
    /// Relaxation budget.
    pub eta: f64,
}

impl PhysParams {
    /// `beta = delta0 = 0`, `theta = 1`, `eta = 0.99`.
    pub fn new(m: f64, lambda: f64, nu: f64, eps: f64) -> Self {
        Self {
            m,
            lambda,
            nu,
            eps,
            beta: 0.0,
            delta0: 0.0,
            theta: 1.0,
            eta: 0.99,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("M", self.m, self.m > 0.0),
            ("lambda", self.lambda, self.lambda > 0.0),
            ("nu", self.nu, self.nu > 0.0),
            ("eps", self.eps, self.eps > 0.0),
            ("beta", self.beta, self.beta >= 0.0),
            ("delta0", self.delta0, self.delta0 >= 0.0),
            ("theta", self.theta, self.theta > 0.0),
            ("eta", self.eta, self.eta > 0.0 && self.eta <= 1.0),
        ];
        for (name, value, ok) in checks {
            if !(ok && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {value}")));
            }
        }
        Ok(())
    }
}

/// One time level of the discrete solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState {
    pub phi: CellField,
    pub mu: CellField,
    pub vel: VelocityField,
    pub p: CellField,
    pub r: f64,
    pub xi: f64,
    pub t: f64,
}

impl SchemeState {
    /// Builds a consistent initial level: `mu = -lambda*lap(phi) + lambda*G'(phi)`,
    /// zero pressure, `R = sqrt(E1 + delta0)` and `xi = 1`.
    pub fn initial(g: &GridSpec, phi: CellField, vel: VelocityField, params: &PhysParams) -> Result<Self> {
        let mu = initial_mu(g, &phi, params);
        let r = sav_init(g, &phi, params)?;
        Ok(Self {
            mu,
            vel,
            p: CellField::zeros(g),
            r,
            xi: 1.0,
            t: 0.0,
            phi,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite()
            && self.mu.is_finite()
            && self.vel.is_finite()
            && self.p.is_finite()
            && self.r.is_finite()
            && self.xi.is_finite()
    }
}

/// Per-step record written to the time-series output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub energy_original: f64,
    pub energy_modified: f64,
    pub r: f64,
    pub xi: f64,
    pub kappa0: f64,
    pub gamma: f64,
    pub max_div: f64,
}

/// `G'(phi) = (phi^3 - phi) / eps^2`.
pub fn g_prime(phi: &CellField, params: &PhysParams) -> CellField {
    let ie2 = 1.0 / (params.eps * params.eps);
    phi.map(|v| (v * v * v - v) * ie2)
}

/// `F'(phi) = G'(phi) - beta*phi`.
pub fn f_prime(phi: &CellField, params: &PhysParams) -> CellField {
    let ie2 = 1.0 / (params.eps * params.eps);
    let beta = params.beta;
    phi.map(|v| (v * v * v - v) * ie2 - beta * v)
}

/// `int G(phi)` with `G(phi) = (1 - phi^2)^2 / (4 eps^2)`.
pub fn bulk_energy(g: &GridSpec, phi: &CellField, params: &PhysParams) -> f64 {
    let c = 0.25 / (params.eps * params.eps);
    integrate_cell(g, &phi.map(|v| c * (1.0 - v * v).powi(2)))
}

/// `E1(phi) = int F(phi)`, `F(phi) = G(phi) - beta/2 phi^2`.
pub fn e1(g: &GridSpec, phi: &CellField, params: &PhysParams) -> f64 {
    let c = 0.25 / (params.eps * params.eps);
    let hb = 0.5 * params.beta;
    integrate_cell(g, &phi.map(|v| c * (1.0 - v * v).powi(2) - hb * v * v))
}

/// `sqrt(E1(phi) + delta0)`, guarded by [`ENERGY_FLOOR`].
pub fn sav_q(g: &GridSpec, phi: &CellField, params: &PhysParams) -> Result<f64> {
    let value = e1(g, phi, params) + params.delta0;
    if !value.is_finite() {
        return Err(Error::NonFinite("E1(phi)"));
    }
    if value < ENERGY_FLOOR {
        return Err(Error::EnergyFloor {
            value,
            floor: ENERGY_FLOOR,
        });
    }
    Ok(value.sqrt())
}

/// Initial SAV value `R(0) = sqrt(E1(phi0) + delta0)`.
pub fn sav_init(g: &GridSpec, phi0: &CellField, params: &PhysParams) -> Result<f64> {
    sav_q(g, phi0, params)
}

/// `theta / (|grad_h p| + 1)` with the discrete L2 face norm.
pub fn gamma_of(g: &GridSpec, p: &CellField, theta: f64) -> f64 {
    theta / (l2_face(g, &grad_cell_to_face(g, p)) + 1.0)
}

/// Chemical potential consistent with a given phase field.
pub fn initial_mu(g: &GridSpec, phi: &CellField, params: &PhysParams) -> CellField {
    let mut mu = crate::ops::lap_cell_neumann(g, phi).scaled(-params.lambda);
    mu.axpy(params.lambda, &g_prime(phi, params));
    mu
}

pub fn mass(g: &GridSpec, phi: &CellField) -> f64 {
    integrate_cell(g, phi)
}

fn kinetic(g: &GridSpec, vel: &VelocityField) -> f64 {
    let n = l2_face(g, vel);
    0.5 * n * n
}

/// `1/2|u|^2 + lambda/2 |grad phi|^2 + lambda int G(phi)`.
pub fn energy_original(g: &GridSpec, state: &SchemeState, params: &PhysParams) -> f64 {
    let gp = h1_seminorm_cell(g, &state.phi);
    kinetic(g, &state.vel) + 0.5 * params.lambda * gp * gp + params.lambda * bulk_energy(g, &state.phi, params)
}

/// `1/2|u|^2 + lambda/2 |grad phi|^2 + lambda*beta/2 |phi|^2 + lambda R^2`.
pub fn energy_modified_1(g: &GridSpec, state: &SchemeState, params: &PhysParams) -> f64 {
    energy_modified_1_with_r(g, state, params, state.r)
}

/// [`energy_modified_1`] with the SAV value replaced by `r`.
pub fn energy_modified_1_with_r(g: &GridSpec, state: &SchemeState, params: &PhysParams, r: f64) -> f64 {
    let gp = h1_seminorm_cell(g, &state.phi);
    let lb = params.lambda * params.beta;
    kinetic(g, &state.vel)
        + 0.5 * params.lambda * gp * gp
        + 0.5 * lb * inner_cell(g, &state.phi, &state.phi)
        + params.lambda * r * r
}

/// BDF2 modified energy of the level `state` preceded by `prev`:
/// each quadratic term is averaged with its value at `2*state - prev`,
/// plus `nu*tau/6 |grad u|^2`.
pub fn energy_modified_2(
    g: &GridSpec,
    state: &SchemeState,
    prev: &SchemeState,
    params: &PhysParams,
    tau: f64,
) -> f64 {
    energy_modified_2_with_r(g, state, prev, params, tau, state.r)
}

/// [`energy_modified_2`] with the current SAV value replaced by `r`.
pub fn energy_modified_2_with_r(
    g: &GridSpec,
    state: &SchemeState,
    prev: &SchemeState,
    params: &PhysParams,
    tau: f64,
    r: f64,
) -> f64 {
    let lam = params.lambda;
    let u_star = VelocityField::lin_comb(2.0, &state.vel, -1.0, &prev.vel);
    let phi_star = CellField::lin_comb(2.0, &state.phi, -1.0, &prev.phi);
    let r_star = 2.0 * r - prev.r;
    let sq = |x: f64| x * x;
    let kin = 0.25 * (sq(l2_face(g, &state.vel)) + sq(l2_face(g, &u_star)));
    let grad = 0.25 * lam * (sq(h1_seminorm_cell(g, &state.phi)) + sq(h1_seminorm_cell(g, &phi_star)));
    let bulk = 0.25
        * lam
        * params.beta
        * (inner_cell(g, &state.phi, &state.phi) + inner_cell(g, &phi_star, &phi_star));
    let sav = 0.5 * lam * (r * r + r_star * r_star);
    kin + grad + bulk + sav + params.nu * tau / 6.0 * grad_sq_face(g, &state.vel)
}
