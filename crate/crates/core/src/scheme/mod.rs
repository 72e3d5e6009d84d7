//! Time stepping: the first-order and BDF2 splitting schemes.
//!
//! Every step solves two constant-coefficient problems per field (one
//! independent of the scalar `xi`, one multiplied by it), recovers `xi` from a
//! scalar linear equation, runs the velocity-pressure correction and finally
//! relaxes the auxiliary variable.

pub mod first_order;
pub mod relax;
pub mod second_order;

use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec, VelocityField};
use crate::norms::inner_face;
use crate::ops::div_face_to_cell;
use crate::physics::{
    energy_modified_1, energy_modified_2, energy_original, mass, DiagnosticsRecord, PhysParams,
    SchemeState,
};
use crate::solvers::CorrectionBackend;

pub use first_order::FirstOrder;
pub use relax::{kappa0, relax};
pub use second_order::{extrapolate, Extrapolated, SecondOrder, TwoLevelState};

/// External terms added to the `xi`-independent right-hand sides.
pub trait Forcing {
    /// Phase-field source at `t`.
    fn phi_source(&self, _g: &GridSpec, _t: f64) -> Option<CellField> {
        None
    }
    /// Momentum force at the new time `t_next`, given the explicit phase field
    /// used by the step (`phi^n`, or the extrapolant for BDF2).
    fn momentum(&self, _g: &GridSpec, _t_next: f64, _phi_explicit: &CellField) -> Option<VelocityField> {
        None
    }
    /// Whether the forcing injects energy, which voids the dissipation law.
    fn is_active(&self) -> bool {
        true
    }
}

/// No external forcing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unforced;

impl Forcing for Unforced {
    fn is_active(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemeKind {
    #[default]
    FirstOrder,
    SecondOrder,
}

/// How the BDF2 scheme forms the explicit pressure weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaStar {
    /// `theta / (|grad p*| + 1)` with `p* = 2p^n - p^{n-1}`.
    #[default]
    ExtrapolatedPressure,
    /// `2 gamma^n - gamma^{n-1}`.
    ExtrapolatedGamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeOptions {
    pub gamma_star: GammaStar,
    pub correction: CorrectionBackend,
    pub relax: bool,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            gamma_star: GammaStar::default(),
            correction: CorrectionBackend::default(),
            relax: true,
        }
    }
}

/// The `xi`-free and `xi`-multiplied pieces of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPieces {
    pub phi0: CellField,
    pub mu0: CellField,
    pub phi1: CellField,
    pub mu1: CellField,
    pub uhat0: VelocityField,
    pub uhat1: VelocityField,
}

impl SplitPieces {
    /// `(phi0 + xi*phi1, mu0 + xi*mu1, uhat0 + xi*uhat1)`.
    pub fn assemble(&self, xi: f64) -> (CellField, CellField, VelocityField) {
        (
            CellField::lin_comb(1.0, &self.phi0, xi, &self.phi1),
            CellField::lin_comb(1.0, &self.mu0, xi, &self.mu1),
            VelocityField::lin_comb(1.0, &self.uhat0, xi, &self.uhat1),
        )
    }
}

/// Solution of the scalar equation `A*xi = B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiSolution {
    pub xi: f64,
    pub r_hat: f64,
    pub a: f64,
    pub b: f64,
    /// `sqrt(E1 + delta0)` of the explicit phase field.
    pub q: f64,
}

pub(crate) fn xi_from(a: f64, b: f64, q: f64) -> Result<XiSolution> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("scalar coefficients A, B"));
    }
    if a <= 0.0 {
        return Err(Error::NonPositiveA(a));
    }
    let xi = b / a;
    Ok(XiSolution {
        xi,
        r_hat: xi * q,
        a,
        b,
        q,
    })
}

/// Everything measured during one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Index of the level produced by this step.
    pub step: usize,
    pub t: f64,
    /// True when the step was taken with the first-order scheme.
    pub first_order: bool,
    pub xi: f64,
    pub r_hat: f64,
    pub r: f64,
    pub kappa0: f64,
    pub a: f64,
    pub b: f64,
    /// `A` recomputed from the energy identity of the split pieces.
    pub a_identity: f64,
    pub q: f64,
    pub gamma: f64,
    pub max_div: f64,
    pub mass_before: f64,
    pub mass_after: f64,
    /// Modified energy of the incoming level.
    pub energy_before: f64,
    /// Modified energy of the new level with the unrelaxed `R`.
    pub energy_hat: f64,
    /// Modified energy of the new level with the relaxed `R`.
    pub energy_after: f64,
    /// Right-hand side of the dissipation inequality (non-positive).
    pub dissipation_bound: f64,
    /// Max-norm residual of the assembled phase-field equation.
    pub phi_residual: f64,
}

impl StepReport {
    /// Slack allowed in the energy inequality.
    pub fn energy_slack(&self) -> f64 {
        1e-9 * self.energy_before.abs().max(self.energy_hat.abs()).max(f64::MIN_POSITIVE)
    }

    /// `E_hat^{n+1} - E^n - bound`, non-positive up to round-off when the law holds.
    pub fn energy_excess(&self) -> f64 {
        self.energy_hat - self.energy_before - self.dissipation_bound
    }

    pub fn energy_law_holds(&self) -> bool {
        self.energy_excess() <= self.energy_slack()
    }

    pub fn relaxed_energy_non_increasing(&self) -> bool {
        self.energy_after - self.energy_before <= self.energy_slack()
    }
}

/// Orchestrates a run of either scheme and keeps the needed history.
#[derive(Debug)]
pub struct Simulation {
    grid: GridSpec,
    params: PhysParams,
    tau: f64,
    kind: SchemeKind,
    first: FirstOrder,
    second: Option<SecondOrder>,
    current: SchemeState,
    previous: Option<SchemeState>,
    step: usize,
    last_report: Option<StepReport>,
}

impl Simulation {
    pub fn new(
        grid: &GridSpec,
        params: &PhysParams,
        tau: f64,
        kind: SchemeKind,
        opts: SchemeOptions,
        initial: SchemeState,
    ) -> Result<Self> {
        let first = FirstOrder::new(grid, params, tau, opts)?;
        let second = match kind {
            SchemeKind::FirstOrder => None,
            SchemeKind::SecondOrder => Some(SecondOrder::new(grid, params, tau, opts)?),
        };
        Ok(Self {
            grid: *grid,
            params: *params,
            tau,
            kind,
            first,
            second,
            current: initial,
            previous: None,
            step: 0,
            last_report: None,
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
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }
    pub fn step_index(&self) -> usize {
        self.step
    }
    pub fn state(&self) -> &SchemeState {
        &self.current
    }
    pub fn previous(&self) -> Option<&SchemeState> {
        self.previous.as_ref()
    }

    pub fn step(&mut self, forcing: &dyn Forcing) -> Result<StepReport> {
        let (next, mut report) = match (&self.second, &self.previous) {
            (Some(so), Some(prev)) => {
                let two = TwoLevelState {
                    current: self.current.clone(),
                    previous: prev.clone(),
                };
                let (two, report) = so.advance2(&two, forcing)?;
                (two.current, report)
            }
            _ => self.first.advance(&self.current, forcing)?,
        };
        self.step += 1;
        report.step = self.step;
        let prev = std::mem::replace(&mut self.current, next);
        self.previous = Some(prev);
        self.last_report = Some(report);
        Ok(report)
    }

    /// Modified energy reported for the current level: the BDF2 functional
    /// once two levels exist, the first-order one otherwise.
    pub fn energy_modified(&self) -> f64 {
        match (self.kind, &self.previous) {
            (SchemeKind::SecondOrder, Some(prev)) => {
                energy_modified_2(&self.grid, &self.current, prev, &self.params, self.tau)
            }
            _ => energy_modified_1(&self.grid, &self.current, &self.params),
        }
    }

    pub fn diagnostics(&self) -> DiagnosticsRecord {
        let s = &self.current;
        let (kappa0, gamma) = match &self.last_report {
            Some(r) => (r.kappa0, r.gamma),
            None => (0.0, crate::physics::gamma_of(&self.grid, &s.p, self.params.theta)),
        };
        DiagnosticsRecord {
            step: self.step,
            t: s.t,
            mass: mass(&self.grid, &s.phi),
            energy_original: energy_original(&self.grid, s, &self.params),
            energy_modified: self.energy_modified(),
            r: s.r,
            xi: s.xi,
            kappa0,
            gamma,
            max_div: div_face_to_cell(&self.grid, &s.vel).max_abs(),
        }
    }
}

/// `<c, w>` over faces, used for every momentum pairing in the `xi` equation.
pub(crate) fn pair(g: &GridSpec, c: &VelocityField, w: &VelocityField) -> f64 {
    inner_face(g, c, w)
}
