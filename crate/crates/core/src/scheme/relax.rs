//! Relaxation of the auxiliary variable toward `sqrt(E1(phi) + delta0)`.

use crate::error::Result;
use crate::grid::{CellField, GridSpec};
use crate::norms::h1_seminorm_cell;
use crate::physics::{sav_q, PhysParams};

/// Smallest `kappa` in `[0, 1]` such that `R(kappa) = s + kappa*(r_hat - s)`
/// satisfies `R(kappa)^2 - r_hat^2 <= budget`.
///
/// `s` is `sqrt(E1 + delta0)` at the new level and `budget` is
/// `tau*eta*M*|grad mu|^2`.
pub fn kappa0(r_hat: f64, s: f64, budget: f64) -> f64 {
    let a = (r_hat - s) * (r_hat - s);
    let b = 2.0 * s * (r_hat - s);
    let c = s * s - r_hat * r_hat - budget;
    if c <= 0.0 {
        return 0.0;
    }
    // c > 0 forces |r_hat| < s, hence a > 0 and b < 0; take the smaller
    // root in the cancellation-free form.
    debug_assert!(a > 0.0 && b < 0.0);
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let k = 2.0 * c / (-b + disc.sqrt());
    k.clamp(0.0, 1.0)
}

/// Returns the relaxed `R` and `kappa0`.
pub fn relax(
    g: &GridSpec,
    r_hat: f64,
    phi_next: &CellField,
    mu_next: &CellField,
    params: &PhysParams,
    tau: f64,
) -> Result<(f64, f64)> {
    let s = sav_q(g, phi_next, params)?;
    let gm = h1_seminorm_cell(g, mu_next);
    let budget = tau * params.eta * params.m * gm * gm;
    let k = kappa0(r_hat, s, budget);
    Ok((k * r_hat + (1.0 - k) * s, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consistent_sav_needs_no_relaxation() {
        assert_eq!(kappa0(1.3, 1.3, 0.2), 0.0);
        assert_eq!(kappa0(1.3, 1.3, 0.0), 0.0);
    }

    #[test]
    fn overshooting_sav_is_pulled_back_fully() {
        // r_hat > s gives c < 0: the true energy level is feasible
        assert_eq!(kappa0(2.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn undershoot_without_budget_keeps_r_hat() {
        let k = kappa0(0.5, 1.0, 0.0);
        assert!((k - 1.0).abs() < 1e-15);
    }

    #[test]
    fn root_sits_on_constraint_boundary() {
        let (r_hat, s, budget) = (0.8, 1.0, 0.1);
        let k = kappa0(r_hat, s, budget);
        let r = s + k * (r_hat - s);
        assert!(k > 0.0 && k < 1.0);
        assert!((r * r - r_hat * r_hat - budget).abs() < 1e-14);
    }
}
