//! Manufactured solutions on the unit square and the convergence-study driver.
//!
//! The exact fields are
//!
//! ```text
//! phi = sin t cos(pi x) cos(pi y)
//! u   = cos t (sin^2(pi x) sin(2 pi y), -sin(2 pi x) sin^2(pi y))
//! p   = sin t cos(pi x) sin(pi y)
//! ```
//!
//! and the sources are their closed-form residuals in the continuous system.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec, VelocityField};
use crate::norms::{h1_norm_cell, h1_norm_face, h2_norm_face, l2_cell, linf_face};
use crate::physics::{PhysParams, SchemeState};
use crate::scheme::{Forcing, SchemeKind, SchemeOptions, Simulation};

/// Parameters of the standard study: `M = 1e-3, lambda = 1, nu = 1e-2,
/// eps = 9e-2, beta = delta0 = 0`.
pub fn standard_params() -> PhysParams {
    PhysParams::new(1e-3, 1.0, 1e-2, 9e-2)
}

/// Final time of the standard study.
pub const STANDARD_T_END: f64 = 0.2;

/// Closed-form exact solution and its derivatives.
#[derive(Debug, Clone, Copy)]
pub struct ExactSolution {
    pub params: PhysParams,
}

struct Trig {
    sx: f64,
    cx: f64,
    sy: f64,
    cy: f64,
    s2x: f64,
    c2x: f64,
    s2y: f64,
    c2y: f64,
}

impl Trig {
    fn at(x: f64, y: f64) -> Self {
        let (sx, cx) = (PI * x).sin_cos();
        let (sy, cy) = (PI * y).sin_cos();
        let (s2x, c2x) = (2.0 * PI * x).sin_cos();
        let (s2y, c2y) = (2.0 * PI * y).sin_cos();
        Self {
            sx,
            cx,
            sy,
            cy,
            s2x,
            c2x,
            s2y,
            c2y,
        }
    }
}

impl ExactSolution {
    pub fn new(params: PhysParams) -> Self {
        Self { params }
    }

    pub fn phi(&self, x: f64, y: f64, t: f64) -> f64 {
        t.sin() * (PI * x).cos() * (PI * y).cos()
    }

    pub fn phi_t(&self, x: f64, y: f64, t: f64) -> f64 {
        t.cos() * (PI * x).cos() * (PI * y).cos()
    }

    pub fn grad_phi(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let k = Trig::at(x, y);
        let s = t.sin();
        (-PI * s * k.sx * k.cy, -PI * s * k.cx * k.sy)
    }

    pub fn lap_phi(&self, x: f64, y: f64, t: f64) -> f64 {
        -2.0 * PI * PI * self.phi(x, y, t)
    }

    /// `mu = -lambda lap(phi) + lambda G'(phi)`.
    pub fn mu(&self, x: f64, y: f64, t: f64) -> f64 {
        let lam = self.params.lambda;
        let ie2 = 1.0 / (self.params.eps * self.params.eps);
        let f = self.phi(x, y, t);
        2.0 * PI * PI * lam * f + lam * (f * f * f - f) * ie2
    }

    pub fn grad_mu(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let lam = self.params.lambda;
        let ie2 = 1.0 / (self.params.eps * self.params.eps);
        let f = self.phi(x, y, t);
        let w = 2.0 * PI * PI * lam + lam * (3.0 * f * f - 1.0) * ie2;
        let (gx, gy) = self.grad_phi(x, y, t);
        (w * gx, w * gy)
    }

    pub fn lap_mu(&self, x: f64, y: f64, t: f64) -> f64 {
        let lam = self.params.lambda;
        let ie2 = 1.0 / (self.params.eps * self.params.eps);
        let f = self.phi(x, y, t);
        let (gx, gy) = self.grad_phi(x, y, t);
        let g2 = gx * gx + gy * gy;
        let pi2 = PI * PI;
        -4.0 * pi2 * pi2 * lam * f + lam * ie2 * (-6.0 * pi2 * f * f * f + 6.0 * f * g2 + 2.0 * pi2 * f)
    }

    pub fn vel(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let k = Trig::at(x, y);
        let c = t.cos();
        (c * k.sx * k.sx * k.s2y, -c * k.s2x * k.sy * k.sy)
    }

    /// Stream function with `u = (d/dy, -d/dx) psi`.
    pub fn stream(&self, x: f64, y: f64, t: f64) -> f64 {
        let k = Trig::at(x, y);
        t.cos() * k.sx * k.sx * k.sy * k.sy / PI
    }

    pub fn p(&self, x: f64, y: f64, t: f64) -> f64 {
        t.sin() * (PI * x).cos() * (PI * y).sin()
    }

    pub fn grad_p(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let k = Trig::at(x, y);
        let s = t.sin();
        (-PI * s * k.sx * k.sy, PI * s * k.cx * k.cy)
    }

    /// `f_phi = phi_t + u.grad(phi) - M lap(mu)` (u is solenoidal).
    pub fn source_phi(&self, x: f64, y: f64, t: f64) -> f64 {
        let (u, v) = self.vel(x, y, t);
        let (gx, gy) = self.grad_phi(x, y, t);
        self.phi_t(x, y, t) + u * gx + v * gy - self.params.m * self.lap_mu(x, y, t)
    }

    /// `f_u = u_t + u.grad(u) - nu lap(u) + grad(p) + phi grad(mu)`.
    pub fn source_u(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let k = Trig::at(x, y);
        let (s, c) = t.sin_cos();
        let pi2 = PI * PI;
        let u1 = k.sx * k.sx * k.s2y;
        let u2 = -k.s2x * k.sy * k.sy;
        let d1x = PI * k.s2x * k.s2y;
        let d1y = 2.0 * PI * k.sx * k.sx * k.c2y;
        let d2x = -2.0 * PI * k.c2x * k.sy * k.sy;
        let d2y = -PI * k.s2x * k.s2y;
        let lap1 = 2.0 * pi2 * k.c2x * k.s2y - 4.0 * pi2 * k.sx * k.sx * k.s2y;
        let lap2 = 4.0 * pi2 * k.s2x * k.sy * k.sy - 2.0 * pi2 * k.s2x * k.c2y;
        let nu = self.params.nu;
        let (px, py) = self.grad_p(x, y, t);
        let f = self.phi(x, y, t);
        let (mx, my) = self.grad_mu(x, y, t);
        (
            -s * u1 + c * c * (u1 * d1x + u2 * d1y) - nu * c * lap1 + px + f * mx,
            -s * u2 + c * c * (u1 * d2x + u2 * d2y) - nu * c * lap2 + py + f * my,
        )
    }

    /// `sqrt(E1(phi(t)) + delta0)` from the closed-form integral over the
    /// unit square.
    pub fn r_exact(&self, t: f64) -> f64 {
        (self.e1_exact(t) + self.params.delta0).sqrt()
    }

    /// `int (1 - phi^2)^2 / (4 eps^2) - beta/2 phi^2` over the unit square.
    pub fn e1_exact(&self, t: f64) -> f64 {
        let s2 = t.sin().powi(2);
        let eps = self.params.eps;
        (1.0 - 0.5 * s2 + 9.0 / 64.0 * s2 * s2) / (4.0 * eps * eps) - 0.125 * self.params.beta * s2
    }

    pub fn sample_phi(&self, g: &GridSpec, t: f64) -> CellField {
        CellField::from_fn(g, |x, y| self.phi(x, y, t))
    }

    pub fn sample_mu(&self, g: &GridSpec, t: f64) -> CellField {
        CellField::from_fn(g, |x, y| self.mu(x, y, t))
    }

    /// Pressure samples shifted to zero discrete mean.
    pub fn sample_p(&self, g: &GridSpec, t: f64) -> CellField {
        let mut p = CellField::from_fn(g, |x, y| self.p(x, y, t));
        p.remove_mean();
        p
    }

    pub fn sample_vel(&self, g: &GridSpec, t: f64) -> VelocityField {
        VelocityField::from_fn(g, |x, y| self.vel(x, y, t))
    }

    /// Discrete curl of the stream function sampled at the nodes; exactly
    /// solenoidal for the discrete divergence.
    pub fn solenoidal_vel(&self, g: &GridSpec, t: f64) -> VelocityField {
        let (nx, ny) = (g.nx(), g.ny());
        let psi = |i: usize, j: usize| {
            let (x, y) = g.node(i, j);
            self.stream(x, y, t)
        };
        let mut w = VelocityField::zeros(g);
        for j in 0..ny {
            for i in 1..nx {
                w.u.set(i, j, (psi(i, j + 1) - psi(i, j)) / g.hy());
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                w.v.set(i, j, -(psi(i + 1, j) - psi(i, j)) / g.hx());
            }
        }
        w
    }

    /// Initial level: exact phase field, discrete chemical potential,
    /// solenoidal velocity and zero pressure.
    pub fn initial_state(&self, g: &GridSpec) -> Result<SchemeState> {
        let mut s = SchemeState::initial(g, self.sample_phi(g, 0.0), self.solenoidal_vel(g, 0.0), &self.params)?;
        s.p = self.sample_p(g, 0.0);
        Ok(s)
    }
}

/// Source terms of an [`ExactSolution`] as scheme forcing.
#[derive(Debug, Clone, Copy)]
pub struct MmsForcing {
    pub exact: ExactSolution,
}

impl Forcing for MmsForcing {
    fn phi_source(&self, g: &GridSpec, t: f64) -> Option<CellField> {
        Some(CellField::from_fn(g, |x, y| self.exact.source_phi(x, y, t)))
    }
    fn momentum(&self, g: &GridSpec, t_next: f64, _phi: &CellField) -> Option<VelocityField> {
        Some(VelocityField::from_fn(g, |x, y| self.exact.source_u(x, y, t_next)))
    }
}

pub const NORM_COUNT: usize = 8;

/// Column names of the error norms, in table order.
pub const NORM_NAMES: [&str; NORM_COUNT] = [
    "phi_linf_l2",
    "phi_linf_h1",
    "u_linf_h1",
    "u_l2_h2",
    "u_linf_linf",
    "p_linf_l2",
    "p_l2_h1",
    "r_linf",
];

/// Grid resolution tied to the time step so the spatial error stays below
/// the temporal one: `h = sqrt(tau/2)` for the first-order scheme and
/// `h = tau/2` for BDF2.
pub fn coupled_cells(kind: SchemeKind, tau: f64) -> usize {
    let h = match kind {
        SchemeKind::FirstOrder => (0.5 * tau).sqrt(),
        SchemeKind::SecondOrder => 0.5 * tau,
    };
    ((1.0 / h).round() as usize).max(2)
}

/// Number of steps to reach `t_end`.
pub fn step_count(t_end: f64, tau: f64) -> usize {
    if t_end <= 0.0 {
        return 0;
    }
    (t_end / tau - 1e-9).ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub tau: f64,
    pub h: f64,
    pub cells: usize,
    pub steps: usize,
    pub errors: [f64; NORM_COUNT],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    /// Observed order between row `k - 1` and row `k` for every norm.
    pub fn rates(&self, k: usize) -> Option<[f64; NORM_COUNT]> {
        if k == 0 || k >= self.rows.len() {
            return None;
        }
        let (a, b) = (&self.rows[k - 1], &self.rows[k]);
        let lt = (a.tau / b.tau).ln();
        let mut out = [0.0; NORM_COUNT];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (a.errors[i] / b.errors[i]).ln() / lt;
        }
        Some(out)
    }

    /// Rates at the finest refinement pair.
    pub fn finest_rates(&self) -> Option<[f64; NORM_COUNT]> {
        self.rates(self.rows.len().checked_sub(1)?)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("tau,h");
        for n in NORM_NAMES {
            write!(s, ",{n}").unwrap();
        }
        for n in NORM_NAMES {
            write!(s, ",rate_{n}").unwrap();
        }
        s.push('\n');
        for (k, row) in self.rows.iter().enumerate() {
            write!(s, "{},{}", row.tau, row.h).unwrap();
            for e in row.errors {
                write!(s, ",{e}").unwrap();
            }
            match self.rates(k) {
                Some(r) => r.iter().for_each(|v| write!(s, ",{v}").unwrap()),
                None => s.push_str(&",".repeat(NORM_COUNT)),
            }
            s.push('\n');
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{:>10} {:>6} {:>6}", "tau", "N", "steps");
        for n in NORM_NAMES {
            write!(s, " {n:>12} {:>5}", "rate").unwrap();
        }
        s.push('\n');
        for (k, row) in self.rows.iter().enumerate() {
            write!(s, "{:>10.3e} {:>6} {:>6}", row.tau, row.cells, row.steps).unwrap();
            let rates = self.rates(k);
            for i in 0..NORM_COUNT {
                write!(s, " {:>12.4e}", row.errors[i]).unwrap();
                match rates {
                    Some(r) => write!(s, " {:>5.2}", r[i]).unwrap(),
                    None => write!(s, " {:>5}", "-").unwrap(),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Runs one level on an `n x n` grid and returns its error row.
pub fn run_level(
    kind: SchemeKind,
    tau: f64,
    n: usize,
    params: &PhysParams,
    t_end: f64,
    opts: SchemeOptions,
) -> Result<ErrorRow> {
    let g = GridSpec::unit_square(n)?;
    let exact = ExactSolution::new(*params);
    let forcing = MmsForcing { exact };
    let steps = step_count(t_end, tau);
    let mut sim = Simulation::new(&g, params, tau, kind, opts, exact.initial_state(&g)?)?;

    let mut acc = NormAccumulator::default();
    acc.observe(&g, &exact, sim.state(), false, tau);
    for _ in 0..steps {
        sim.step(&forcing)?;
        acc.observe(&g, &exact, sim.state(), true, tau);
    }
    Ok(ErrorRow {
        tau,
        h: g.hx(),
        cells: n,
        steps,
        errors: acc.finish(),
    })
}

#[derive(Debug, Default)]
struct NormAccumulator {
    max: [f64; NORM_COUNT],
    sum_sq: [f64; NORM_COUNT],
}

impl NormAccumulator {
    fn observe(&mut self, g: &GridSpec, exact: &ExactSolution, s: &SchemeState, in_sum: bool, tau: f64) {
        let t = s.t;
        let e_phi = &s.phi - &exact.sample_phi(g, t);
        let e_u = &s.vel - &exact.sample_vel(g, t);
        let e_p = &s.p - &exact.sample_p(g, t);
        let e = [
            l2_cell(g, &e_phi),
            h1_norm_cell(g, &e_phi),
            h1_norm_face(g, &e_u),
            h2_norm_face(g, &e_u),
            linf_face(&e_u),
            l2_cell(g, &e_p),
            h1_norm_cell(g, &e_p),
            (s.r - exact.r_exact(t)).abs(),
        ];
        for i in 0..NORM_COUNT {
            self.max[i] = self.max[i].max(e[i]);
            if in_sum {
                self.sum_sq[i] += tau * e[i] * e[i];
            }
        }
    }

    fn finish(&self) -> [f64; NORM_COUNT] {
        let mut out = self.max;
        // the two time-integrated columns
        out[3] = self.sum_sq[3].sqrt();
        out[6] = self.sum_sq[6].sqrt();
        out
    }
}

/// Runs every level (grid tied to `tau` by [`coupled_cells`]) and collects
/// the error table. Levels are distributed over up to `threads` workers.
pub fn run_convergence(
    kind: SchemeKind,
    taus: &[f64],
    params: &PhysParams,
    t_end: f64,
    opts: SchemeOptions,
    threads: usize,
) -> Result<ErrorTable> {
    if taus.is_empty() {
        return Err(Error::InvalidParameter("no time-step levels".into()));
    }
    let threads = threads.clamp(1, taus.len());
    let mut rows: Vec<Option<Result<ErrorRow>>> = (0..taus.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..threads)
            .map(|w| (w..taus.len()).step_by(threads).collect())
            .collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|idx| {
                scope.spawn(move || {
                    idx.into_iter()
                        .map(|k| {
                            let tau = taus[k];
                            (k, run_level(kind, tau, coupled_cells(kind, tau), params, t_end, opts))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("convergence worker panicked") {
                rows[k] = Some(r);
            }
        }
    });
    let rows = rows
        .into_iter()
        .map(|r| r.expect("every level is assigned"))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorTable { rows })
}
