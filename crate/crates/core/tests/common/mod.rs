//! Dense linear algebra and packing helpers shared by the oracle tests.
#![allow(dead_code)]

pub mod oracle;
pub mod truncation;

use chns_core::ops::{div_face_to_cell, grad_cell_to_face, lap_face_dirichlet};
use chns_core::{CellField, GridSpec, VelocityField};
use rand::Rng;

/// Row-major dense matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }
    pub fn at(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.a[r * self.n + c]
    }

    /// Copies the `rows x cols` block of a linear map into position
    /// `(r0, c0)`, scaled by `s`. The map is probed column by column.
    pub fn put_map(&mut self, r0: usize, c0: usize, cols: usize, s: f64, f: impl Fn(&[f64]) -> Vec<f64>) {
        let mut e = vec![0.0; cols];
        for c in 0..cols {
            e[c] = 1.0;
            let col = f(&e);
            e[c] = 0.0;
            for (r, v) in col.iter().enumerate() {
                *self.at(r0 + r, c0 + c) += s * v;
            }
        }
    }

    /// Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut a = self.a.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap();
            assert!(a[piv * n + k].abs() > 1e-300, "dense oracle matrix is singular");
            if piv != k {
                for c in 0..n {
                    a.swap(k * n + c, piv * n + c);
                }
                x.swap(k, piv);
            }
            for i in k + 1..n {
                let m = a[i * n + k] / a[k * n + k];
                if m == 0.0 {
                    continue;
                }
                for c in k..n {
                    a[i * n + c] -= m * a[k * n + c];
                }
                x[i] -= m * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..n {
                s -= a[k * n + c] * x[c];
            }
            x[k] = s / a[k * n + k];
        }
        x
    }
}

/// Interior face count (wall-normal faces excluded).
pub fn n_faces(g: &GridSpec) -> usize {
    (g.nx() - 1) * g.ny() + g.nx() * (g.ny() - 1)
}

/// Interior faces of `w`: u faces `i = 1..nx`, then v faces `j = 1..ny`.
pub fn pack_vel(g: &GridSpec, w: &VelocityField) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_faces(g));
    for j in 0..g.ny() {
        for i in 1..g.nx() {
            out.push(w.u.get(i, j));
        }
    }
    for j in 1..g.ny() {
        for i in 0..g.nx() {
            out.push(w.v.get(i, j));
        }
    }
    out
}

pub fn unpack_vel(g: &GridSpec, x: &[f64]) -> VelocityField {
    let mut w = VelocityField::zeros(g);
    let mut it = x.iter();
    for j in 0..g.ny() {
        for i in 1..g.nx() {
            w.u.set(i, j, *it.next().unwrap());
        }
    }
    for j in 1..g.ny() {
        for i in 0..g.nx() {
            w.v.set(i, j, *it.next().unwrap());
        }
    }
    w
}

pub fn cell(g: &GridSpec, x: &[f64]) -> CellField {
    CellField::from_vec(g, x.to_vec()).unwrap()
}

/// Random interior velocity with zero wall-normal faces.
pub fn random_vel(g: &GridSpec, rng: &mut impl Rng, amp: f64) -> VelocityField {
    let x: Vec<f64> = (0..n_faces(g)).map(|_| rng.gen_range(-amp..amp)).collect();
    unpack_vel(g, &x)
}

pub fn random_cell(g: &GridSpec, rng: &mut impl Rng, lo: f64, hi: f64) -> CellField {
    CellField::from_index_fn(g, |_, _| rng.gen_range(lo..hi))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// The no-slip face Laplacian on packed interior faces.
pub fn lap_f_map(g: &GridSpec) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |x| pack_vel(g, &lap_face_dirichlet(g, &unpack_vel(g, x)))
}

/// Dense generalized Stokes oracle with a mean-zero pressure multiplier:
/// `[A G 0; D 0 e; 0 e^T 0]`.
pub fn stokes_oracle(g: &GridSpec, alpha: f64, nu: f64, uhat: &VelocityField, rhs: &VelocityField) -> (Vec<f64>, Vec<f64>) {
    let (nf, nc) = (n_faces(g), g.num_cells());
    let mut a = Dense::zeros(nf + nc + 1);
    a.put_map(0, 0, nf, alpha, |x| x.to_vec());
    a.put_map(0, 0, nf, -nu, lap_f_map(g));
    a.put_map(0, nf, nc, 1.0, |x| pack_vel(g, &grad_cell_to_face(g, &cell(g, x))));
    a.put_map(nf, 0, nf, 1.0, |x| div_face_to_cell(g, &unpack_vel(g, x)).into_data());
    for k in 0..nc {
        *a.at(nf + k, nf + nc) = 1.0;
        *a.at(nf + nc, nf + k) = 1.0;
    }
    let ah = {
        let mut m = Dense::zeros(nf);
        m.put_map(0, 0, nf, alpha, |x| x.to_vec());
        m.put_map(0, 0, nf, -nu, lap_f_map(g));
        m
    };
    let uh = pack_vel(g, uhat);
    let mut b: Vec<f64> = pack_vel(g, rhs);
    for (r, bi) in b.iter_mut().enumerate() {
        *bi += (0..nf).map(|c| ah.a[r * nf + c] * uh[c]).sum::<f64>();
    }
    b.extend(std::iter::repeat(0.0).take(nc + 1));
    let x = a.solve(&b);
    (x[..nf].to_vec(), x[nf..nf + nc].to_vec())
}
