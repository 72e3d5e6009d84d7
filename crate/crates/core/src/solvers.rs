//! Construct-once, solve-many direct solvers for the constant-coefficient
//! systems of the splitting schemes.
//!
//! Each operator is assembled over the MAC unknowns and factorized with a
//! sparse LU once; every subsequent solve is a pair of triangular sweeps plus
//! a residual check (and iterative refinement when needed).

use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec, VelocityField};
use crate::ops::{div_face_to_cell, grad_cell_to_face, lap_face_dirichlet};

/// Relative residual every solve must reach.
pub const SOLVE_TOL: f64 = 1e-10;
/// Max-norm bound on the discrete divergence after a Stokes correction.
pub const DIV_TOL: f64 = 1e-8;

const REFINE_TARGET: f64 = 1e-12;
const MAX_REFINE: usize = 3;

/// Sparse LU with a retained copy of the matrix for residual checks.
pub(crate) struct DirectSolver {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for DirectSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectSolver")
            .field("n", &self.n)
            .field("nnz", &self.vals.len())
            .finish()
    }
}

impl DirectSolver {
    /// Duplicated `(row, col)` entries are summed.
    pub(crate) fn new(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            debug_assert!(r < n && c < n);
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for k in 0..n {
            row_ptr[k + 1] += row_ptr[k];
        }
        let col_idx: Vec<usize> = merged.iter().map(|e| e.1).collect();
        let vals: Vec<f64> = merged.iter().map(|e| e.2).collect();

        let triplets: Vec<Triplet<usize, usize, f64>> = merged
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::SingularSystem(format!("sparse LU failed: {e:?}")))?;
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            vals,
            lu,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    /// Fills `out[k] = b_k - A x_k` and returns the worst relative residual.
    fn residuals(&self, x: &[Vec<f64>], b: &[Vec<f64>], norms: &[f64], out: &mut [Vec<f64>]) -> f64 {
        for ((xk, bk), rk) in x.iter().zip(b).zip(out.iter_mut()) {
            for (r, slot) in rk.iter_mut().enumerate() {
                let mut s = 0.0;
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    s += self.vals[k] * xk[self.col_idx[k]];
                }
                *slot = bk[r] - s;
            }
        }
        worst_relative(out, norms)
    }

    /// Solves `A x_k = b_k` for every right-hand side.
    pub(crate) fn solve_many(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let k = rhs.len();
        if k == 0 {
            return Ok(Vec::new());
        }
        for b in rhs {
            if b.len() != self.n {
                return Err(Error::ShapeMismatch {
                    expected: self.n,
                    got: b.len(),
                });
            }
            if !b.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("linear solve right-hand side"));
            }
        }
        let mut x = Mat::<f64>::from_fn(self.n, k, |i, j| rhs[j][i]);
        self.lu.solve_in_place(x.as_mut());
        let mut sol: Vec<Vec<f64>> = (0..k).map(|j| x.col_as_slice(j).to_vec()).collect();

        let norms: Vec<f64> = rhs.iter().map(|b| euclid(b)).collect();
        let mut res: Vec<Vec<f64>> = vec![vec![0.0; self.n]; k];
        let mut worst = self.residuals(&sol, rhs, &norms, &mut res);
        let mut last = f64::INFINITY;
        // stop at round-off level or once refinement stalls
        for _ in 0..MAX_REFINE {
            if worst <= REFINE_TARGET || worst > 0.5 * last {
                break;
            }
            last = worst;
            let mut corr = Mat::<f64>::from_fn(self.n, k, |i, j| res[j][i]);
            self.lu.solve_in_place(corr.as_mut());
            for (j, s) in sol.iter_mut().enumerate() {
                for (xi, ci) in s.iter_mut().zip(corr.col_as_slice(j)) {
                    *xi += ci;
                }
            }
            worst = self.residuals(&sol, rhs, &norms, &mut res);
        }
        if !(worst <= SOLVE_TOL) {
            return Err(Error::NonConvergence {
                residual: worst,
                tolerance: SOLVE_TOL,
            });
        }
        Ok(sol)
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn worst_relative(res: &[Vec<f64>], norms: &[f64]) -> f64 {
    res.iter()
        .zip(norms)
        .map(|(r, &nb)| {
            let nr = euclid(r);
            if nb > 0.0 {
                nr / nb
            } else if nr == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Numbering of interior (non-wall) face unknowns.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FaceDofs {
    nx: usize,
    ny: usize,
}

impl FaceDofs {
    pub(crate) fn new(g: &GridSpec) -> Self {
        Self {
            nx: g.nx(),
            ny: g.ny(),
        }
    }
    pub(crate) fn n_u(&self) -> usize {
        (self.nx - 1) * self.ny
    }
    pub(crate) fn n_v(&self) -> usize {
        self.nx * (self.ny - 1)
    }
    /// Vertical face `(i, j)`, `1 <= i < nx`.
    pub(crate) fn u(&self, i: usize, j: usize) -> usize {
        (i - 1) + (self.nx - 1) * j
    }
    /// Horizontal face `(i, j)`, `1 <= j < ny`.
    pub(crate) fn v(&self, i: usize, j: usize) -> usize {
        i + self.nx * (j - 1)
    }

    pub(crate) fn gather_u(&self, w: &VelocityField) -> Vec<f64> {
        let mut out = vec![0.0; self.n_u()];
        for j in 0..self.ny {
            for i in 1..self.nx {
                out[self.u(i, j)] = w.u.get(i, j);
            }
        }
        out
    }
    pub(crate) fn gather_v(&self, w: &VelocityField) -> Vec<f64> {
        let mut out = vec![0.0; self.n_v()];
        for j in 1..self.ny {
            for i in 0..self.nx {
                out[self.v(i, j)] = w.v.get(i, j);
            }
        }
        out
    }
    pub(crate) fn scatter(&self, g: &GridSpec, xu: &[f64], xv: &[f64]) -> VelocityField {
        let mut w = VelocityField::zeros(g);
        for j in 0..self.ny {
            for i in 1..self.nx {
                w.u.set(i, j, xu[self.u(i, j)]);
            }
        }
        for j in 1..self.ny {
            for i in 0..self.nx {
                w.v.set(i, j, xv[self.v(i, j)]);
            }
        }
        w
    }
}

/// Appends `coef * lap_cell_neumann` acting on the block starting at `off`.
fn push_neumann_laplacian(
    e: &mut Vec<(usize, usize, f64)>,
    g: &GridSpec,
    row_off: usize,
    col_off: usize,
    coef: f64,
) {
    let (nx, ny) = (g.nx(), g.ny());
    let (cx, cy) = (coef / (g.hx() * g.hx()), coef / (g.hy() * g.hy()));
    for j in 0..ny {
        for i in 0..nx {
            let r = row_off + i + nx * j;
            let mut diag = 0.0;
            if i > 0 {
                e.push((r, col_off + (i - 1) + nx * j, cx));
                diag -= cx;
            }
            if i + 1 < nx {
                e.push((r, col_off + (i + 1) + nx * j, cx));
                diag -= cx;
            }
            if j > 0 {
                e.push((r, col_off + i + nx * (j - 1), cy));
                diag -= cy;
            }
            if j + 1 < ny {
                e.push((r, col_off + i + nx * (j + 1), cy));
                diag -= cy;
            }
            e.push((r, col_off + i + nx * j, diag));
        }
    }
}

/// Appends `alpha*I - nu*lap_face_dirichlet` restricted to x-velocity unknowns.
fn push_velocity_helmholtz_u(
    e: &mut Vec<(usize, usize, f64)>,
    g: &GridSpec,
    d: &FaceDofs,
    off: usize,
    alpha: f64,
    nu: f64,
) {
    let (nx, ny) = (g.nx(), g.ny());
    let (cx, cy) = (nu / (g.hx() * g.hx()), nu / (g.hy() * g.hy()));
    for j in 0..ny {
        for i in 1..nx {
            let r = off + d.u(i, j);
            // x: wall faces are fixed at zero
            let mut diag = alpha + 2.0 * cx;
            if i > 1 {
                e.push((r, off + d.u(i - 1, j), -cx));
            }
            if i + 1 < nx {
                e.push((r, off + d.u(i + 1, j), -cx));
            }
            // y: reflected ghost at the walls adds another cy to the diagonal
            diag += 2.0 * cy;
            if j > 0 {
                e.push((r, off + d.u(i, j - 1), -cy));
            } else {
                diag += cy;
            }
            if j + 1 < ny {
                e.push((r, off + d.u(i, j + 1), -cy));
            } else {
                diag += cy;
            }
            e.push((r, r, diag));
        }
    }
}

fn push_velocity_helmholtz_v(
    e: &mut Vec<(usize, usize, f64)>,
    g: &GridSpec,
    d: &FaceDofs,
    off: usize,
    alpha: f64,
    nu: f64,
) {
    let (nx, ny) = (g.nx(), g.ny());
    let (cx, cy) = (nu / (g.hx() * g.hx()), nu / (g.hy() * g.hy()));
    for j in 1..ny {
        for i in 0..nx {
            let r = off + d.v(i, j);
            let mut diag = alpha + 2.0 * cy;
            if j > 1 {
                e.push((r, off + d.v(i, j - 1), -cy));
            }
            if j + 1 < ny {
                e.push((r, off + d.v(i, j + 1), -cy));
            }
            diag += 2.0 * cx;
            if i > 0 {
                e.push((r, off + d.v(i - 1, j), -cx));
            } else {
                diag += cx;
            }
            if i + 1 < nx {
                e.push((r, off + d.v(i + 1, j), -cx));
            } else {
                diag += cx;
            }
            e.push((r, r, diag));
        }
    }
}

/// `alpha*I - kappa*lap_cell_neumann`.
///
/// With `alpha == 0` the operator is singular on constants; the solver then
/// requires a zero-mean right-hand side and returns the zero-mean solution.
#[derive(Debug)]
pub struct CellHelmholtzOp {
    grid: GridSpec,
    alpha: f64,
    kappa: f64,
    solver: Option<DirectSolver>,
}

impl CellHelmholtzOp {
    pub fn new(grid: &GridSpec, alpha: f64, kappa: f64) -> Result<Self> {
        if !(alpha >= 0.0 && kappa >= 0.0 && alpha.is_finite() && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cell Helmholtz needs alpha, kappa >= 0 (got {alpha}, {kappa})"
            )));
        }
        if alpha == 0.0 && kappa == 0.0 {
            return Err(Error::SingularSystem(
                "cell Helmholtz with alpha = kappa = 0".into(),
            ));
        }
        let solver = if kappa == 0.0 {
            None
        } else {
            let n = grid.num_cells();
            let mut e = Vec::with_capacity(5 * n);
            push_neumann_laplacian(&mut e, grid, 0, 0, -kappa);
            if alpha > 0.0 {
                for k in 0..n {
                    e.push((k, k, alpha));
                }
            } else {
                // pin cell 0; the dropped equation is implied by compatibility
                e.retain(|&(r, _, _)| r != 0);
                e.push((0, 0, 1.0));
            }
            Some(DirectSolver::new(n, e)?)
        };
        Ok(Self {
            grid: *grid,
            alpha,
            kappa,
            solver,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn solve(&self, rhs: &CellField) -> Result<CellField> {
        if !rhs.matches(&self.grid) {
            return Err(Error::ShapeMismatch {
                expected: self.grid.num_cells(),
                got: rhs.len(),
            });
        }
        let Some(solver) = &self.solver else {
            return Ok(rhs.scaled(1.0 / self.alpha));
        };
        if self.alpha > 0.0 {
            let x = solver.solve_many(&[rhs.data().to_vec()])?.remove(0);
            return CellField::from_vec(&self.grid, x);
        }
        let mean = rhs.mean();
        let rms = euclid(rhs.data()) / (rhs.len() as f64).sqrt();
        if mean.abs() > 1e-10 * rms {
            return Err(Error::IncompatibleRhs { mean, norm: rms });
        }
        let mut b = rhs.data().to_vec();
        b.iter_mut().for_each(|v| *v -= mean);
        b[0] = 0.0;
        let x = solver.solve_many(&[b])?.remove(0);
        let mut out = CellField::from_vec(&self.grid, x)?;
        out.remove_mean();
        Ok(out)
    }
}

/// The coupled Cahn-Hilliard block
///
/// ```text
/// phi - m_tau * lap(mu)                     = r1
/// mu  + lambda * lap(phi) - lambda*beta*phi = r2
/// ```
///
/// with homogeneous Neumann conditions on both fields.
#[derive(Debug)]
pub struct ChBlockOp {
    grid: GridSpec,
    m_tau: f64,
    lambda: f64,
    beta: f64,
    solver: DirectSolver,
}

impl ChBlockOp {
    pub fn new(grid: &GridSpec, m_tau: f64, lambda: f64, beta: f64) -> Result<Self> {
        if !(m_tau > 0.0 && lambda > 0.0 && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "CH block needs m_tau > 0, lambda > 0, beta >= 0 (got {m_tau}, {lambda}, {beta})"
            )));
        }
        let n = grid.num_cells();
        let mut e = Vec::with_capacity(12 * n);
        for k in 0..n {
            e.push((k, k, 1.0));
            e.push((n + k, n + k, 1.0));
            e.push((n + k, k, -lambda * beta));
        }
        push_neumann_laplacian(&mut e, grid, 0, n, -m_tau);
        push_neumann_laplacian(&mut e, grid, n, 0, lambda);
        Ok(Self {
            grid: *grid,
            m_tau,
            lambda,
            beta,
            solver: DirectSolver::new(2 * n, e)?,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn m_tau(&self) -> f64 {
        self.m_tau
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn solve(&self, r1: &CellField, r2: &CellField) -> Result<(CellField, CellField)> {
        Ok(self.solve_many(&[(r1, r2)])?.remove(0))
    }

    /// Solves several right-hand sides against the same factorization.
    pub fn solve_many(&self, rhs: &[(&CellField, &CellField)]) -> Result<Vec<(CellField, CellField)>> {
        let n = self.grid.num_cells();
        let mut b = Vec::with_capacity(rhs.len());
        for (r1, r2) in rhs {
            if !(r1.matches(&self.grid) && r2.matches(&self.grid)) {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    got: r1.len().max(r2.len()),
                });
            }
            let mut v = Vec::with_capacity(2 * n);
            v.extend_from_slice(r1.data());
            v.extend_from_slice(r2.data());
            b.push(v);
        }
        self.solver
            .solve_many(&b)?
            .into_iter()
            .map(|mut x| {
                let mu = x.split_off(n);
                Ok((
                    CellField::from_vec(&self.grid, x)?,
                    CellField::from_vec(&self.grid, mu)?,
                ))
            })
            .collect()
    }
}

/// `alpha*I - nu*lap_face_dirichlet`, one factorization per velocity component.
#[derive(Debug)]
pub struct VelocityHelmholtzOp {
    grid: GridSpec,
    alpha: f64,
    nu: f64,
    dofs: FaceDofs,
    solver_u: DirectSolver,
    solver_v: DirectSolver,
}

impl VelocityHelmholtzOp {
    pub fn new(grid: &GridSpec, alpha: f64, nu: f64) -> Result<Self> {
        if !(alpha > 0.0 && nu >= 0.0 && alpha.is_finite() && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "velocity Helmholtz needs alpha > 0, nu >= 0 (got {alpha}, {nu})"
            )));
        }
        let dofs = FaceDofs::new(grid);
        let mut eu = Vec::with_capacity(5 * dofs.n_u());
        push_velocity_helmholtz_u(&mut eu, grid, &dofs, 0, alpha, nu);
        let mut ev = Vec::with_capacity(5 * dofs.n_v());
        push_velocity_helmholtz_v(&mut ev, grid, &dofs, 0, alpha, nu);
        Ok(Self {
            grid: *grid,
            alpha,
            nu,
            dofs,
            solver_u: DirectSolver::new(dofs.n_u(), eu)?,
            solver_v: DirectSolver::new(dofs.n_v(), ev)?,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn solve(&self, rhs: &VelocityField) -> Result<VelocityField> {
        Ok(self.solve_many(&[rhs])?.remove(0))
    }

    /// Boundary-face values of the right-hand sides are ignored.
    pub fn solve_many(&self, rhs: &[&VelocityField]) -> Result<Vec<VelocityField>> {
        for r in rhs {
            if !r.matches(&self.grid) {
                return Err(Error::ShapeMismatch {
                    expected: self.dofs.n_u() + self.dofs.n_v(),
                    got: r.u.len() + r.v.len(),
                });
            }
        }
        let bu: Vec<Vec<f64>> = rhs.iter().map(|r| self.dofs.gather_u(r)).collect();
        let bv: Vec<Vec<f64>> = rhs.iter().map(|r| self.dofs.gather_v(r)).collect();
        let xu = self.solver_u.solve_many(&bu)?;
        let xv = self.solver_v.solve_many(&bv)?;
        Ok(xu
            .iter()
            .zip(&xv)
            .map(|(a, b)| self.dofs.scatter(&self.grid, a, b))
            .collect())
    }
}

/// Monolithic generalized Stokes correction
///
/// ```text
/// alpha*(u - uhat) - nu*lap(u - uhat) + grad p = g
/// div u = 0,   u = 0 on the walls,   mean(p) = 0
/// ```
///
/// solved for the increment `w = u - uhat` and `p` in one saddle-point
/// factorization. The pressure gauge is fixed by pinning one cell and
/// shifting to zero mean afterwards.
#[derive(Debug)]
pub struct StokesCorrectionOp {
    grid: GridSpec,
    alpha: f64,
    nu: f64,
    dofs: FaceDofs,
    solver: DirectSolver,
}

impl StokesCorrectionOp {
    pub fn new(grid: &GridSpec, alpha: f64, nu: f64) -> Result<Self> {
        if !(alpha > 0.0 && nu >= 0.0 && alpha.is_finite() && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Stokes correction needs alpha > 0, nu >= 0 (got {alpha}, {nu})"
            )));
        }
        let (nx, ny) = (grid.nx(), grid.ny());
        let dofs = FaceDofs::new(grid);
        let (nu_dofs, nv_dofs) = (dofs.n_u(), dofs.n_v());
        let p_off = nu_dofs + nv_dofs;
        let n = p_off + grid.num_cells();
        let (ihx, ihy) = (1.0 / grid.hx(), 1.0 / grid.hy());
        let mut e = Vec::with_capacity(9 * n);
        push_velocity_helmholtz_u(&mut e, grid, &dofs, 0, alpha, nu);
        push_velocity_helmholtz_v(&mut e, grid, &dofs, nu_dofs, alpha, nu);
        let cell = |i: usize, j: usize| p_off + i + nx * j;
        for j in 0..ny {
            for i in 1..nx {
                let r = dofs.u(i, j);
                e.push((r, cell(i, j), ihx));
                e.push((r, cell(i - 1, j), -ihx));
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let r = nu_dofs + dofs.v(i, j);
                e.push((r, cell(i, j), ihy));
                e.push((r, cell(i, j - 1), -ihy));
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                let r = cell(i, j);
                if i == 0 && j == 0 {
                    e.push((r, r, 1.0));
                    continue;
                }
                if i + 1 < nx {
                    e.push((r, dofs.u(i + 1, j), ihx));
                }
                if i > 0 {
                    e.push((r, dofs.u(i, j), -ihx));
                }
                if j + 1 < ny {
                    e.push((r, nu_dofs + dofs.v(i, j + 1), ihy));
                }
                if j > 0 {
                    e.push((r, nu_dofs + dofs.v(i, j), -ihy));
                }
            }
        }
        Ok(Self {
            grid: *grid,
            alpha,
            nu,
            dofs,
            solver: DirectSolver::new(n, e)?,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Returns the corrected velocity and the zero-mean pressure.
    pub fn solve(&self, uhat: &VelocityField, g: &VelocityField) -> Result<(VelocityField, CellField)> {
        if !(uhat.matches(&self.grid) && g.matches(&self.grid)) {
            return Err(Error::ShapeMismatch {
                expected: self.solver.dim(),
                got: uhat.u.len() + uhat.v.len(),
            });
        }
        let d = &self.dofs;
        let div_hat = div_face_to_cell(&self.grid, uhat);
        let mut b = Vec::with_capacity(self.solver.dim());
        b.extend(d.gather_u(g));
        b.extend(d.gather_v(g));
        b.extend(div_hat.data().iter().map(|v| -v));
        b[d.n_u() + d.n_v()] = 0.0;
        let x = self.solver.solve_many(&[b])?.remove(0);
        let (xu, rest) = x.split_at(d.n_u());
        let (xv, xp) = rest.split_at(d.n_v());
        let w = d.scatter(&self.grid, xu, xv);
        let mut u = uhat + &w;
        // uhat may carry stray wall values; the walls are no-slip
        zero_wall_normals(&self.grid, &mut u);
        let mut p = CellField::from_vec(&self.grid, xp.to_vec())?;
        p.remove_mean();
        let max_div = div_face_to_cell(&self.grid, &u).max_abs();
        if !(max_div <= DIV_TOL) {
            return Err(Error::NonConvergence {
                residual: max_div,
                tolerance: DIV_TOL,
            });
        }
        Ok((u, p))
    }
}

pub(crate) fn zero_wall_normals(g: &GridSpec, w: &mut VelocityField) {
    let (nx, ny) = (g.nx(), g.ny());
    for j in 0..ny {
        w.u.set(0, j, 0.0);
        w.u.set(nx, j, 0.0);
    }
    for i in 0..nx {
        w.v.set(i, 0, 0.0);
        w.v.set(i, ny, 0.0);
    }
}

/// Pressure-Poisson variant of the correction step.
///
/// Takes the divergence of the momentum correction assuming `div lap u = 0`,
/// solves the Neumann Poisson problem
/// `-lap p = -div g - alpha*div(uhat) + nu*div(lap uhat)` and then updates the
/// velocity with one Helmholtz solve per component. Cheaper than the
/// monolithic solve but the result is only approximately divergence-free
/// near the walls.
#[derive(Debug)]
pub struct PressurePoissonCorrectionOp {
    grid: GridSpec,
    alpha: f64,
    nu: f64,
    poisson: CellHelmholtzOp,
    helmholtz: VelocityHelmholtzOp,
}

impl PressurePoissonCorrectionOp {
    pub fn new(grid: &GridSpec, alpha: f64, nu: f64) -> Result<Self> {
        Ok(Self {
            grid: *grid,
            alpha,
            nu,
            poisson: CellHelmholtzOp::new(grid, 0.0, 1.0)?,
            helmholtz: VelocityHelmholtzOp::new(grid, alpha, nu)?,
        })
    }

    pub fn solve(&self, uhat: &VelocityField, g: &VelocityField) -> Result<(VelocityField, CellField)> {
        let grid = &self.grid;
        let mut rhs = div_face_to_cell(grid, g).scaled(-1.0);
        rhs.axpy(-self.alpha, &div_face_to_cell(grid, uhat));
        rhs.axpy(self.nu, &div_face_to_cell(grid, &lap_face_dirichlet(grid, uhat)));
        // discrete compatibility holds up to round-off; project it out
        rhs.remove_mean();
        let p = self.poisson.solve(&rhs)?;
        let mut forcing = g.clone();
        forcing.axpy(-1.0, &grad_cell_to_face(grid, &p));
        let w = self.helmholtz.solve(&forcing)?;
        let mut u = uhat + &w;
        zero_wall_normals(grid, &mut u);
        Ok((u, p))
    }
}

/// Which algorithm performs the velocity-pressure correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionBackend {
    #[default]
    Monolithic,
    PressurePoisson,
}

/// A built correction operator of either backend.
#[derive(Debug)]
pub enum CorrectionOp {
    Monolithic(StokesCorrectionOp),
    PressurePoisson(PressurePoissonCorrectionOp),
}

impl CorrectionOp {
    pub fn new(backend: CorrectionBackend, grid: &GridSpec, alpha: f64, nu: f64) -> Result<Self> {
        Ok(match backend {
            CorrectionBackend::Monolithic => Self::Monolithic(StokesCorrectionOp::new(grid, alpha, nu)?),
            CorrectionBackend::PressurePoisson => {
                Self::PressurePoisson(PressurePoissonCorrectionOp::new(grid, alpha, nu)?)
            }
        })
    }

    pub fn solve(&self, uhat: &VelocityField, g: &VelocityField) -> Result<(VelocityField, CellField)> {
        match self {
            Self::Monolithic(op) => op.solve(uhat, g),
            Self::PressurePoisson(op) => op.solve(uhat, g),
        }
    }
}
