mod common;

use chns_core::grid::{CellField, GridSpec, VelocityField};
use chns_core::norms::{grad_sq_face, inner_cell, inner_face};
use chns_core::ops::*;
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(nx: usize, ny: usize, seed: u64) -> (GridSpec, ChaCha8Rng) {
    let g = GridSpec::new(nx, ny, -0.3, 0.2, 0.7 + 0.1 * nx as f64, 0.5 + 0.13 * ny as f64).unwrap();
    (g, ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_is_minus_adjoint_of_divergence(nx in 2usize..9, ny in 2usize..9, seed: u64) {
        let (g, mut rng) = setup(nx, ny, seed);
        let c = random_cell(&g, &mut rng, -1.0, 1.0);
        let w = random_vel(&g, &mut rng, 1.0);
        let lhs = inner_face(&g, &grad_cell_to_face(&g, &c), &w);
        let rhs = -inner_cell(&g, &c, &div_face_to_cell(&g, &w));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn divergence_of_gradient_is_the_neumann_laplacian(nx in 2usize..9, ny in 2usize..9, seed: u64) {
        let (g, mut rng) = setup(nx, ny, seed);
        let c = random_cell(&g, &mut rng, -1.0, 1.0);
        let a = div_face_to_cell(&g, &grad_cell_to_face(&g, &c));
        let b = lap_cell_neumann(&g, &c);
        prop_assert!(max_diff(a.data(), b.data()) <= 1e-12 * b.max_abs().max(1.0));
    }

    #[test]
    fn laplacians_are_symmetric(nx in 2usize..9, ny in 2usize..9, seed: u64) {
        let (g, mut rng) = setup(nx, ny, seed);
        let (a, b) = (random_cell(&g, &mut rng, -1.0, 1.0), random_cell(&g, &mut rng, -1.0, 1.0));
        let l = inner_cell(&g, &lap_cell_neumann(&g, &a), &b);
        let r = inner_cell(&g, &a, &lap_cell_neumann(&g, &b));
        prop_assert!((l - r).abs() <= 1e-11 * (1.0 + l.abs()));

        let (w, z) = (random_vel(&g, &mut rng, 1.0), random_vel(&g, &mut rng, 1.0));
        let l = inner_face(&g, &lap_face_dirichlet(&g, &w), &z);
        let r = inner_face(&g, &w, &lap_face_dirichlet(&g, &z));
        prop_assert!((l - r).abs() <= 1e-11 * (1.0 + l.abs()));
    }

    #[test]
    fn velocity_seminorm_is_the_laplacian_energy(nx in 2usize..9, ny in 2usize..9, seed: u64) {
        let (g, mut rng) = setup(nx, ny, seed);
        let w = random_vel(&g, &mut rng, 1.0);
        let a = grad_sq_face(&g, &w);
        let b = -inner_face(&g, &lap_face_dirichlet(&g, &w), &w);
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-11 * (1.0 + a));
    }

    #[test]
    fn transport_conserves_mass_and_pairs_with_capillary_force(nx in 2usize..9, ny in 2usize..9, seed: u64) {
        let (g, mut rng) = setup(nx, ny, seed);
        let u = random_vel(&g, &mut rng, 1.0);
        let phi = random_cell(&g, &mut rng, -1.0, 1.0);
        let mu = random_cell(&g, &mut rng, -3.0, 3.0);
        let d = advect_conservative(&g, &u, &phi);
        prop_assert!(d.data().iter().sum::<f64>().abs() <= 1e-11 * (1.0 + d.max_abs()));
        // the zero-energy-contribution pair cancels discretely
        let a = inner_cell(&g, &mu, &d);
        let b = inner_face(&g, &u, &phi_grad_mu(&g, &phi, &mu));
        prop_assert!((a + b).abs() <= 1e-11 * (1.0 + a.abs()));
    }
}

#[test]
fn neumann_laplacian_matches_hand_stencil_on_a_3x3_grid() {
    // corner cell keeps two neighbours, the centre keeps four
    let g = GridSpec::new(3, 3, 0.0, 0.0, 3.0, 1.5).unwrap();
    let c = CellField::from_vec(&g, (0..9).map(|k| (k * k) as f64).collect()).unwrap();
    let l = lap_cell_neumann(&g, &c);
    let (ix2, iy2) = (1.0, 4.0);
    // (0,0)=0, east (1,0)=1, north (0,1)=9
    assert!((l.get(0, 0) - ((1.0 - 0.0) * ix2 + (9.0 - 0.0) * iy2)).abs() < 1e-12);
    // centre (1,1)=16: west 9, east 25, south 1, north 49
    let centre = (9.0 - 32.0 + 25.0) * ix2 + (1.0 - 32.0 + 49.0) * iy2;
    assert!((l.get(1, 1) - centre).abs() < 1e-12);
}

#[test]
fn dirichlet_laplacian_uses_reflected_tangential_ghosts() {
    let g = GridSpec::unit_square(3).unwrap();
    let mut w = VelocityField::zeros(&g);
    w.u.set(1, 0, 1.0);
    let l = lap_face_dirichlet(&g, &w);
    let h2 = 9.0;
    // x: 0 - 2 + 0; y: ghost -1 - 2 + 0
    assert!((l.u.get(1, 0) - (-2.0 - 3.0) * h2).abs() < 1e-12);
    assert!((l.u.get(1, 1) - h2).abs() < 1e-12);
    assert!((l.u.get(2, 0) - h2).abs() < 1e-12);
    assert_eq!(l.max_abs_boundary_normal(), 0.0);
}

#[test]
fn truncation_errors_are_second_order() {
    for (name, e, r) in truncation::study() {
        assert!((r - 2.0).abs() <= 0.2, "{name}: errors {e:?}, rate {r}");
    }
}
