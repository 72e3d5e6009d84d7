//! The first-order (backward Euler) splitting scheme.

use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec, VelocityField};
use crate::norms::{grad_sq_face, h1_seminorm_cell, inner_cell, l2_face};
use crate::ops::{advect_conservative, convect, div_face_to_cell, grad_cell_to_face, lap_cell_neumann, phi_grad_mu};
use crate::physics::{energy_modified_1, energy_modified_1_with_r, f_prime, gamma_of, mass, sav_q, PhysParams, SchemeState};
use crate::solvers::{ChBlockOp, CorrectionOp, VelocityHelmholtzOp};

use super::{pair, relax, xi_from, Forcing, SchemeOptions, SplitPieces, StepReport, XiSolution};

/// Explicit quantities shared by the split solves and the `xi` equation.
#[derive(Debug, Clone)]
pub(crate) struct ExplicitTerms {
    /// `F'` of the explicit phase field.
    pub fp: CellField,
    /// `div(u phi)` of the explicit fields.
    pub d: CellField,
    /// `phi grad mu + u.grad u + gamma grad p`, the full `xi`-multiplied
    /// momentum term.
    pub c: VelocityField,
    /// `gamma grad p`, right-hand side of the correction.
    pub g_p: VelocityField,
    pub gamma: f64,
    pub q: f64,
}

impl ExplicitTerms {
    pub(crate) fn new(
        g: &GridSpec,
        params: &PhysParams,
        phi: &CellField,
        mu: &CellField,
        u: &VelocityField,
        p: &CellField,
        gamma: f64,
    ) -> Result<Self> {
        let q = sav_q(g, phi, params)?;
        let g_p = grad_cell_to_face(g, p).scaled(gamma);
        let mut c = phi_grad_mu(g, phi, mu);
        c += &convect(g, u);
        c += &g_p;
        Ok(Self {
            fp: f_prime(phi, params),
            d: advect_conservative(g, u, phi),
            c,
            g_p,
            gamma,
            q,
        })
    }
}

/// Pre-factorized first-order stepper for one `(grid, tau)`.
#[derive(Debug)]
pub struct FirstOrder {
    grid: GridSpec,
    params: PhysParams,
    tau: f64,
    opts: SchemeOptions,
    ch: ChBlockOp,
    vel: VelocityHelmholtzOp,
    corr: CorrectionOp,
}

impl FirstOrder {
    pub fn new(grid: &GridSpec, params: &PhysParams, tau: f64, opts: SchemeOptions) -> Result<Self> {
        params.validate()?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau = {tau}")));
        }
        Ok(Self {
            grid: *grid,
            params: *params,
            tau,
            opts,
            ch: ChBlockOp::new(grid, params.m * tau, params.lambda, params.beta)?,
            vel: VelocityHelmholtzOp::new(grid, 1.0 / tau, params.nu)?,
            corr: CorrectionOp::new(opts.correction, grid, 1.0 / tau, params.nu)?,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn params(&self) -> &PhysParams {
        &self.params
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn explicit(&self, state: &SchemeState) -> Result<ExplicitTerms> {
        let gamma = gamma_of(&self.grid, &state.p, self.params.theta);
        ExplicitTerms::new(&self.grid, &self.params, &state.phi, &state.mu, &state.vel, &state.p, gamma)
    }

    /// Solves the four `xi`-split systems.
    pub fn step1_split(&self, state: &SchemeState, forcing: &dyn Forcing) -> Result<SplitPieces> {
        let ex = self.explicit(state)?;
        let f_phi = forcing.phi_source(&self.grid, state.t + self.tau);
        self.split(state, &ex, f_phi.as_ref(), forcing)
    }

    fn split(
        &self,
        state: &SchemeState,
        ex: &ExplicitTerms,
        f_phi: Option<&CellField>,
        forcing: &dyn Forcing,
    ) -> Result<SplitPieces> {
        let g = &self.grid;
        let tau = self.tau;
        let mut r1_0 = state.phi.clone();
        if let Some(f) = f_phi {
            r1_0.axpy(tau, f);
        }
        let r2_0 = CellField::zeros(g);
        let r1_1 = ex.d.scaled(-tau);
        let r2_1 = ex.fp.scaled(self.params.lambda);
        let mut ch = self.ch.solve_many(&[(&r1_0, &r2_0), (&r1_1, &r2_1)])?;
        let (phi1, mu1) = ch.pop().unwrap();
        let (phi0, mu0) = ch.pop().unwrap();

        let mut rhs0 = state.vel.scaled(1.0 / tau);
        if let Some(f) = forcing.momentum(g, state.t + tau, &state.phi) {
            rhs0 += &f;
        }
        let rhs1 = ex.c.scaled(-1.0);
        let mut uh = self.vel.solve_many(&[&rhs0, &rhs1])?;
        let uhat1 = uh.pop().unwrap();
        let uhat0 = uh.pop().unwrap();
        Ok(SplitPieces {
            phi0,
            mu0,
            phi1,
            mu1,
            uhat0,
            uhat1,
        })
    }

    /// Assembles and solves `A*xi = B`.
    pub fn solve_xi(&self, state: &SchemeState, pieces: &SplitPieces) -> Result<XiSolution> {
        let ex = self.explicit(state)?;
        self.xi(state, &ex, pieces)
    }

    fn xi(&self, state: &SchemeState, ex: &ExplicitTerms, pc: &SplitPieces) -> Result<XiSolution> {
        let g = &self.grid;
        let lam = self.params.lambda;
        let tau = self.tau;
        let k = 1.0 / (2.0 * lam * ex.q);
        let a = ex.q
            - k * (lam * inner_cell(g, &ex.fp, &pc.phi1)
                + tau * inner_cell(g, &pc.mu1, &ex.d)
                + tau * pair(g, &ex.c, &pc.uhat1));
        let b = state.r
            + k * (lam * inner_cell(g, &ex.fp, &(&pc.phi0 - &state.phi))
                + tau * inner_cell(g, &pc.mu0, &ex.d)
                + tau * pair(g, &ex.c, &pc.uhat0));
        xi_from(a, b, ex.q)
    }

    /// `A` from the energy identity of the `xi`-multiplied pieces; equals the
    /// directly assembled value up to round-off and is manifestly positive.
    pub fn a_identity(&self, q: f64, pc: &SplitPieces) -> f64 {
        let g = &self.grid;
        let p = &self.params;
        let gp = h1_seminorm_cell(g, &pc.phi1);
        let gm = h1_seminorm_cell(g, &pc.mu1);
        let u1 = l2_face(g, &pc.uhat1);
        q + (p.lambda * gp * gp
            + p.lambda * p.beta * inner_cell(g, &pc.phi1, &pc.phi1)
            + p.m * self.tau * gm * gm
            + u1 * u1
            + p.nu * self.tau * grad_sq_face(g, &pc.uhat1))
            / (2.0 * p.lambda * q)
    }

    /// Velocity-pressure correction with right-hand side `gamma * grad p^n`.
    pub fn correction(&self, uhat: &VelocityField, p_n: &CellField, gamma: f64) -> Result<(VelocityField, CellField)> {
        let rhs = grad_cell_to_face(&self.grid, p_n).scaled(gamma);
        self.corr.solve(uhat, &rhs)
    }

    pub fn advance(&self, state: &SchemeState, forcing: &dyn Forcing) -> Result<(SchemeState, StepReport)> {
        let g = &self.grid;
        let p = &self.params;
        let tau = self.tau;
        let t_next = state.t + tau;
        let ex = self.explicit(state)?;
        let f_phi = forcing.phi_source(g, t_next);
        let pieces = self.split(state, &ex, f_phi.as_ref(), forcing)?;
        let xs = self.xi(state, &ex, &pieces)?;
        let (phi, mu, uhat) = pieces.assemble(xs.xi);
        let (vel, p_next) = self.corr.solve(&uhat, &ex.g_p)?;
        let (r, kappa0) = if self.opts.relax {
            relax(g, xs.r_hat, &phi, &mu, p, tau)?
        } else {
            (xs.r_hat, 1.0)
        };
        let next = SchemeState {
            phi,
            mu,
            vel,
            p: p_next,
            r,
            xi: xs.xi,
            t: t_next,
        };
        if !next.is_finite() {
            return Err(Error::NonFinite("first-order step"));
        }

        // phase-field residual of the assembled step
        let mut res = CellField::lin_comb(1.0 / tau, &next.phi, -1.0 / tau, &state.phi);
        let scale = res.max_abs();
        res.axpy(xs.xi, &ex.d);
        let lap_mu = lap_cell_neumann(g, &next.mu).scaled(p.m);
        res.axpy(-1.0, &lap_mu);
        if let Some(f) = &f_phi {
            res.axpy(-1.0, f);
        }
        let phi_residual = res.max_abs() / scale.max(lap_mu.max_abs()).max(f64::MIN_POSITIVE);

        let gm = h1_seminorm_cell(g, &next.mu);
        let bound = -p.m * tau * gm * gm
            - 0.5 * p.nu * tau * (grad_sq_face(g, &uhat) + grad_sq_face(g, &next.vel));
        let report = StepReport {
            step: 0,
            t: t_next,
            first_order: true,
            xi: xs.xi,
            r_hat: xs.r_hat,
            r,
            kappa0,
            a: xs.a,
            b: xs.b,
            a_identity: self.a_identity(xs.q, &pieces),
            q: xs.q,
            gamma: ex.gamma,
            max_div: div_face_to_cell(g, &next.vel).max_abs(),
            mass_before: mass(g, &state.phi),
            mass_after: mass(g, &next.phi),
            energy_before: energy_modified_1(g, state, p),
            energy_hat: energy_modified_1_with_r(g, &next, p, xs.r_hat),
            energy_after: energy_modified_1(g, &next, p),
            dissipation_bound: bound,
            phi_residual,
        };
        Ok((next, report))
    }
}
