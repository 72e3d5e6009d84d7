use chns_core::mms::*;
use chns_core::ops::div_face_to_cell;
use chns_core::scheme::{SchemeKind, SchemeOptions};
use chns_core::GridSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-3;

/// Fourth-order central first derivative.
fn d1(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    (f(x - 2.0 * H) - 8.0 * f(x - H) + 8.0 * f(x + H) - f(x + 2.0 * H)) / (12.0 * H)
}

/// Fourth-order central second derivative.
fn d2(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    (-f(x - 2.0 * H) + 16.0 * f(x - H) - 30.0 * f(x) + 16.0 * f(x + H) - f(x + 2.0 * H)) / (12.0 * H * H)
}

#[test]
fn sources_match_finite_difference_residuals() {
    let ex = ExactSolution::new(standard_params());
    let p = ex.params;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let x = rng.gen_range(0.05..0.95);
        let y = rng.gen_range(0.05..0.95);
        let t = rng.gen_range(0.02..0.4);

        // phi_t + div(u phi) - M lap(mu)
        let flux_x = |s: f64| ex.vel(s, y, t).0 * ex.phi(s, y, t);
        let flux_y = |s: f64| ex.vel(x, s, t).1 * ex.phi(x, s, t);
        let lap_mu = d2(|s| ex.mu(s, y, t), x) + d2(|s| ex.mu(x, s, t), y);
        let want = d1(|s| ex.phi(x, y, s), t) + d1(flux_x, x) + d1(flux_y, y) - p.m * lap_mu;
        let got = ex.source_phi(x, y, t);
        assert!((got - want).abs() <= 1e-6 * got.abs().max(1.0), "phi source {got} vs {want}");

        // u_t + (u.grad)u - nu lap u + grad p + phi grad mu, per component
        let (u, v) = ex.vel(x, y, t);
        let phi = ex.phi(x, y, t);
        let comp = |k: usize| {
            let c = move |x: f64, y: f64, t: f64| {
                let w = ex.vel(x, y, t);
                if k == 0 {
                    w.0
                } else {
                    w.1
                }
            };
            let ct = d1(|s| c(x, y, s), t);
            let cx = d1(|s| c(s, y, t), x);
            let cy = d1(|s| c(x, s, t), y);
            let lap = d2(|s| c(s, y, t), x) + d2(|s| c(x, s, t), y);
            let dp = if k == 0 {
                d1(|s| ex.p(s, y, t), x)
            } else {
                d1(|s| ex.p(x, s, t), y)
            };
            let dmu = if k == 0 {
                d1(|s| ex.mu(s, y, t), x)
            } else {
                d1(|s| ex.mu(x, s, t), y)
            };
            ct + u * cx + v * cy - p.nu * lap + dp + phi * dmu
        };
        let (fx, fy) = ex.source_u(x, y, t);
        let scale = fx.abs().max(fy.abs()).max(1.0);
        assert!((fx - comp(0)).abs() <= 1e-6 * scale, "u source {fx} vs {}", comp(0));
        assert!((fy - comp(1)).abs() <= 1e-6 * scale, "v source {fy} vs {}", comp(1));
    }
}

#[test]
fn closed_form_bulk_energy_matches_quadrature() {
    let mut params = standard_params();
    params.beta = 3.0;
    let ex = ExactSolution::new(params);
    // midpoint rule is exact for the low trigonometric degree of the
    // integrand; 200 points per direction is far beyond that degree
    let n = 200;
    for t in [0.0, 0.1, 0.7, 1.3] {
        let mut sum = 0.0;
        for j in 0..n {
            for i in 0..n {
                let x = (i as f64 + 0.5) / n as f64;
                let y = (j as f64 + 0.5) / n as f64;
                let f = ex.phi(x, y, t);
                sum += (1.0 - f * f).powi(2) / (4.0 * params.eps * params.eps) - 0.5 * params.beta * f * f;
            }
        }
        let quad = sum / (n * n) as f64;
        let e = ex.e1_exact(t);
        assert!((quad - e).abs() <= 1e-12 * e.abs(), "t = {t}: {quad} vs {e}");
    }
}

#[test]
fn zero_final_time_reports_initialization_errors_only() {
    let params = standard_params();
    let row = run_level(SchemeKind::FirstOrder, 1.0 / 32.0, 8, &params, 0.0, SchemeOptions::default()).unwrap();
    assert_eq!(row.steps, 0);
    // phi and p vanish at t = 0 and are sampled exactly, so only the
    // stream-function velocity carries an error; the time-summed column is empty
    assert_eq!(row.errors[0], 0.0);
    assert_eq!(row.errors[5], 0.0);
    assert_eq!(row.errors[3], 0.0);
    assert!(row.errors[7] < 1e-12);
    assert!(row.errors[2] > 0.0 && row.errors[2] < 0.5);
}

#[test]
fn initial_state_is_discretely_solenoidal() {
    let ex = ExactSolution::new(standard_params());
    for n in [5, 16, 33] {
        let g = GridSpec::unit_square(n).unwrap();
        let s = ex.initial_state(&g).unwrap();
        assert!(div_face_to_cell(&g, &s.vel).max_abs() < 1e-12);
        assert!(s.p.mean().abs() < 1e-14);
        assert_eq!(s.xi, 1.0);
    }
}

#[test]
fn coarse_second_order_study_converges() {
    let params = standard_params();
    let t = run_convergence(
        SchemeKind::SecondOrder,
        &[1.0 / 10.0, 1.0 / 20.0],
        &params,
        STANDARD_T_END,
        SchemeOptions::default(),
        2,
    )
    .unwrap();
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.rows[1].cells, 40);
    assert_eq!(t.rows[1].steps, 4);
    let r = t.finest_rates().unwrap();
    assert!(r[0] > 1.5, "phi rate {}", r[0]);

    let csv = t.to_csv();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 2 + 2 * NORM_COUNT);
    assert_eq!(&header[..3], &["tau", "h", "phi_linf_l2"]);
    assert_eq!(header.last(), Some(&"rate_r_linf"));
    assert_eq!(csv.lines().count(), 3);
    assert!(t.to_text().lines().count() == 3);
}

#[test]
fn empty_level_list_is_rejected() {
    let err = run_convergence(
        SchemeKind::FirstOrder,
        &[],
        &standard_params(),
        STANDARD_T_END,
        SchemeOptions::default(),
        1,
    );
    assert!(err.is_err());
}
