//! The BDF2 splitting scheme. Explicit terms use the linear extrapolation
//! `w* = 2w^n - w^{n-1}`; the first step is taken with the first-order scheme.

use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec, VelocityField};
use crate::norms::{grad_sq_face, h1_seminorm_cell, inner_cell, l2_face};
use crate::ops::{div_face_to_cell, lap_cell_neumann};
use crate::physics::{energy_modified_2, energy_modified_2_with_r, gamma_of, mass, PhysParams, SchemeState};
use crate::solvers::{ChBlockOp, CorrectionOp, VelocityHelmholtzOp};

use super::first_order::ExplicitTerms;
use super::{pair, relax, xi_from, Forcing, GammaStar, SchemeOptions, SplitPieces, StepReport, XiSolution};

/// Two consecutive levels, `current.t - previous.t = tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelState {
    pub current: SchemeState,
    pub previous: SchemeState,
}

/// Extrapolated fields `2w^n - w^{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub phi: CellField,
    pub mu: CellField,
    pub vel: VelocityField,
    pub p: CellField,
}

pub fn extrapolate(two: &TwoLevelState) -> Extrapolated {
    let (c, p) = (&two.current, &two.previous);
    Extrapolated {
        phi: CellField::lin_comb(2.0, &c.phi, -1.0, &p.phi),
        mu: CellField::lin_comb(2.0, &c.mu, -1.0, &p.mu),
        vel: VelocityField::lin_comb(2.0, &c.vel, -1.0, &p.vel),
        p: CellField::lin_comb(2.0, &c.p, -1.0, &p.p),
    }
}

/// Pre-factorized BDF2 stepper for one `(grid, tau)`.
#[derive(Debug)]
pub struct SecondOrder {
    grid: GridSpec,
    params: PhysParams,
    tau: f64,
    opts: SchemeOptions,
    ch: ChBlockOp,
    vel: VelocityHelmholtzOp,
    corr: CorrectionOp,
}

impl SecondOrder {
    pub fn new(grid: &GridSpec, params: &PhysParams, tau: f64, opts: SchemeOptions) -> Result<Self> {
        params.validate()?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau = {tau}")));
        }
        let alpha = 1.5 / tau;
        Ok(Self {
            grid: *grid,
            params: *params,
            tau,
            opts,
            ch: ChBlockOp::new(grid, 2.0 * params.m * tau / 3.0, params.lambda, params.beta)?,
            vel: VelocityHelmholtzOp::new(grid, alpha, params.nu)?,
            corr: CorrectionOp::new(opts.correction, grid, alpha, params.nu)?,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// The explicit pressure weight for the configured [`GammaStar`] mode.
    pub fn gamma_star(&self, two: &TwoLevelState, star: &Extrapolated) -> f64 {
        let theta = self.params.theta;
        match self.opts.gamma_star {
            GammaStar::ExtrapolatedPressure => gamma_of(&self.grid, &star.p, theta),
            GammaStar::ExtrapolatedGamma => {
                2.0 * gamma_of(&self.grid, &two.current.p, theta)
                    - gamma_of(&self.grid, &two.previous.p, theta)
            }
        }
    }

    fn explicit(&self, two: &TwoLevelState) -> Result<ExplicitTerms> {
        let star = extrapolate(two);
        let gamma = self.gamma_star(two, &star);
        ExplicitTerms::new(&self.grid, &self.params, &star.phi, &star.mu, &star.vel, &star.p, gamma)
    }

    pub fn step1_split(&self, two: &TwoLevelState, forcing: &dyn Forcing) -> Result<SplitPieces> {
        let ex = self.explicit(two)?;
        let t_next = two.current.t + self.tau;
        let f_phi = forcing.phi_source(&self.grid, t_next);
        self.split(two, &ex, f_phi.as_ref(), forcing)
    }

    fn split(
        &self,
        two: &TwoLevelState,
        ex: &ExplicitTerms,
        f_phi: Option<&CellField>,
        forcing: &dyn Forcing,
    ) -> Result<SplitPieces> {
        let g = &self.grid;
        let tau = self.tau;
        let (cur, prev) = (&two.current, &two.previous);
        let mut r1_0 = CellField::lin_comb(4.0 / 3.0, &cur.phi, -1.0 / 3.0, &prev.phi);
        if let Some(f) = f_phi {
            r1_0.axpy(2.0 * tau / 3.0, f);
        }
        let r2_0 = CellField::zeros(g);
        let r1_1 = ex.d.scaled(-2.0 * tau / 3.0);
        let r2_1 = ex.fp.scaled(self.params.lambda);
        let mut ch = self.ch.solve_many(&[(&r1_0, &r2_0), (&r1_1, &r2_1)])?;
        let (phi1, mu1) = ch.pop().unwrap();
        let (phi0, mu0) = ch.pop().unwrap();

        let mut rhs0 = VelocityField::lin_comb(2.0 / tau, &cur.vel, -0.5 / tau, &prev.vel);
        let phi_star = CellField::lin_comb(2.0, &cur.phi, -1.0, &prev.phi);
        if let Some(f) = forcing.momentum(g, cur.t + tau, &phi_star) {
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

    pub fn solve_xi(&self, two: &TwoLevelState, pieces: &SplitPieces) -> Result<XiSolution> {
        let ex = self.explicit(two)?;
        self.xi(two, &ex, pieces)
    }

    fn xi(&self, two: &TwoLevelState, ex: &ExplicitTerms, pc: &SplitPieces) -> Result<XiSolution> {
        let g = &self.grid;
        let lam = self.params.lambda;
        let tau = self.tau;
        let (cur, prev) = (&two.current, &two.previous);
        let k = (2.0 * tau / 3.0) / (2.0 * lam * ex.q);
        let dphi1 = pc.phi1.scaled(1.5 / tau);
        let a = ex.q
            - k * (lam * inner_cell(g, &ex.fp, &dphi1)
                + inner_cell(g, &pc.mu1, &ex.d)
                + pair(g, &ex.c, &pc.uhat1));
        let mut dphi0 = pc.phi0.scaled(3.0);
        dphi0.axpy(-4.0, &cur.phi);
        dphi0.axpy(1.0, &prev.phi);
        dphi0.scale(0.5 / tau);
        let b = (4.0 * cur.r - prev.r) / 3.0
            + k * (lam * inner_cell(g, &ex.fp, &dphi0)
                + inner_cell(g, &pc.mu0, &ex.d)
                + pair(g, &ex.c, &pc.uhat0));
        xi_from(a, b, ex.q)
    }

    /// `A` from the energy identity of the `xi`-multiplied pieces.
    pub fn a_identity(&self, q: f64, pc: &SplitPieces) -> f64 {
        let g = &self.grid;
        let p = &self.params;
        let alpha = 1.5 / self.tau;
        let gp = h1_seminorm_cell(g, &pc.phi1);
        let gm = h1_seminorm_cell(g, &pc.mu1);
        let u1 = l2_face(g, &pc.uhat1);
        let k = (2.0 * self.tau / 3.0) / (2.0 * p.lambda * q);
        q + k
            * (p.m * gm * gm
                + alpha * p.lambda * (gp * gp + p.beta * inner_cell(g, &pc.phi1, &pc.phi1))
                + alpha * u1 * u1
                + p.nu * grad_sq_face(g, &pc.uhat1))
    }

    pub fn advance2(&self, two: &TwoLevelState, forcing: &dyn Forcing) -> Result<(TwoLevelState, StepReport)> {
        let g = &self.grid;
        let p = &self.params;
        let tau = self.tau;
        let (cur, prev) = (&two.current, &two.previous);
        let t_next = cur.t + tau;
        let ex = self.explicit(two)?;
        let f_phi = forcing.phi_source(g, t_next);
        let pieces = self.split(two, &ex, f_phi.as_ref(), forcing)?;
        let xs = self.xi(two, &ex, &pieces)?;
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
            return Err(Error::NonFinite("second-order step"));
        }

        let mut res = next.phi.scaled(1.5 / tau);
        res.axpy(-2.0 / tau, &cur.phi);
        res.axpy(0.5 / tau, &prev.phi);
        let scale = res.max_abs();
        res.axpy(xs.xi, &ex.d);
        let lap_mu = lap_cell_neumann(g, &next.mu).scaled(p.m);
        res.axpy(-1.0, &lap_mu);
        if let Some(f) = &f_phi {
            res.axpy(-1.0, f);
        }
        let phi_residual = res.max_abs() / scale.max(lap_mu.max_abs()).max(f64::MIN_POSITIVE);

        let gm = h1_seminorm_cell(g, &next.mu);
        let w = &next.vel - &uhat;
        let bound = -p.m * tau * gm * gm - p.nu * tau / 6.0 * (grad_sq_face(g, &w) + grad_sq_face(g, &uhat));
        let report = StepReport {
            step: 0,
            t: t_next,
            first_order: false,
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
            mass_before: mass(g, &cur.phi),
            mass_after: mass(g, &next.phi),
            energy_before: energy_modified_2(g, cur, prev, p, tau),
            energy_hat: energy_modified_2_with_r(g, &next, cur, p, tau, xs.r_hat),
            energy_after: energy_modified_2(g, &next, cur, p, tau),
            dissipation_bound: bound,
            phi_residual,
        };
        Ok((
            TwoLevelState {
                current: next,
                previous: cur.clone(),
            },
            report,
        ))
    }
}
