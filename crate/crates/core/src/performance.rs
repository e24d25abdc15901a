//! Prescribed performance bounds on squared distance errors.
//!
//! Each edge carries an exponential performance function `rho(t)` and two
//! positive scalars `b_bar`, `b_underbar` such that the squared distance error
//! `eta = |q_i - q_j|^2 - d^2` must stay inside `(-b_underbar rho(t), b_bar rho(t))`.
//! The bounds are picked at `t = 0` from the measured distance errors, the agents'
//! safety and sensing radii, and the robustness constants.

use serde::{Deserialize, Serialize};

use crate::error::{ContainmentViolation, FormationError, Result};

/// Inputs closer than this to either end of the open interval are treated as outside it.
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// Threshold used when the rigidity margin is not configured: large enough
/// that the check is reported without ever failing.
pub const PERMISSIVE_VARTHETA: f64 = 1e6;

/// `rho(t) = (rho0 - rho_inf) exp(-decay t) + rho_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceFunction {
    pub rho0: f64,
    pub rho_inf: f64,
    pub decay: f64,
}

impl PerformanceFunction {
    pub fn new(rho0: f64, rho_inf: f64, decay: f64) -> Result<Self> {
        if !(rho0 > rho_inf && rho_inf > 0.0) {
            return Err(FormationError::Config(format!(
                "performance function needs rho0 > rho_inf > 0, got rho0={rho0}, rho_inf={rho_inf}"
            )));
        }
        if !(decay > 0.0 && decay.is_finite()) {
            return Err(FormationError::Config(format!(
                "decay rate must be positive, got {decay}"
            )));
        }
        Ok(Self {
            rho0,
            rho_inf,
            decay,
        })
    }

    pub fn rho(&self, t: f64) -> f64 {
        (self.rho0 - self.rho_inf) * (-self.decay * t).exp() + self.rho_inf
    }

    pub fn rho_dot(&self, t: f64) -> f64 {
        -self.decay * (self.rho0 - self.rho_inf) * (-self.decay * t).exp()
    }
}

/// `r_si + r_sj`.
pub fn safety_distance(r_si: f64, r_sj: f64) -> f64 {
    r_si + r_sj
}

/// `min(r_ci + r_sj, r_cj + r_si)`: the largest center distance at which
/// agents `i` and `j` still sense each other.
pub fn connectivity_distance(r_ci: f64, r_si: f64, r_cj: f64, r_sj: f64) -> f64 {
    (r_ci + r_sj).min(r_cj + r_si)
}

/// Geometric limits and robustness constants of one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGeometry {
    pub d: f64,
    pub r_s: f64,
    pub r_c: f64,
    pub mu_bar: f64,
    pub mu_underbar: f64,
}

impl EdgeGeometry {
    pub fn validate(&self, edge: usize) -> Result<()> {
        let bad = |reason: String| Err(FormationError::InvalidGeometry { edge, reason });
        if !(self.d > 0.0) {
            return bad(format!("desired distance must be positive, got {}", self.d));
        }
        if !(self.r_s < self.d) {
            return bad(format!("d={} <= r_sij={}", self.d, self.r_s));
        }
        if !(self.d < self.r_c) {
            return bad(format!("d={} >= r_cij={}", self.d, self.r_c));
        }
        if !(self.mu_bar > 0.0 && self.mu_bar <= self.r_c - self.d) {
            return bad(format!(
                "mu_bar={} must lie in (0, r_cij - d = {}]",
                self.mu_bar,
                self.r_c - self.d
            ));
        }
        if !(self.mu_underbar > 0.0 && self.mu_underbar <= self.d - self.r_s) {
            return bad(format!(
                "mu_underbar={} must lie in (0, d - r_sij = {}]",
                self.mu_underbar,
                self.d - self.r_s
            ));
        }
        Ok(())
    }
}

/// Upper and lower distance-error bounds at `t = 0`, from the initial error `e0`.
///
/// Returns `(e0_bar, e0_underbar)` with `-e0_underbar < e0 < e0_bar`.
pub fn select_initial_bounds(e0: f64, geom: &EdgeGeometry, mu: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0) {
        return Err(FormationError::Config(format!(
            "mu must be positive, got {mu}"
        )));
    }
    if !(e0 > -geom.d) {
        return Err(FormationError::InvalidGeometry {
            edge: usize::MAX,
            reason: format!("initial error {e0} <= -d = {}: agents overlap", -geom.d),
        });
    }
    let widened = e0.abs() + mu;
    let (upper, lower) = if e0 >= 0.0 {
        (
            widened.min(geom.r_c - geom.d),
            widened.min(geom.mu_underbar),
        )
    } else {
        (widened.min(geom.mu_bar), widened.min(geom.d - geom.r_s))
    };
    if !(-lower < e0 && e0 < upper) {
        let reason = if e0 >= 0.0 {
            format!(
                "initial error {e0} already at or beyond the connectivity limit {}",
                geom.r_c - geom.d
            )
        } else {
            format!(
                "initial error {e0} already at or beyond the collision limit {}",
                geom.r_s - geom.d
            )
        };
        return Err(FormationError::InvalidGeometry {
            edge: usize::MAX,
            reason,
        });
    }
    Ok((upper, lower))
}

/// Converts distance-error bounds at `t = 0` into `(b_bar, b_underbar)`.
pub fn bounds_to_b(d: f64, rho0: f64, e0_bar: f64, e0_underbar: f64) -> Result<(f64, f64)> {
    if !(rho0 > 0.0) {
        return Err(FormationError::Config(format!(
            "rho0 must be positive, got {rho0}"
        )));
    }
    if e0_underbar > d {
        return Err(FormationError::Config(format!(
            "lower bound {e0_underbar} exceeds the desired distance {d}"
        )));
    }
    let b_bar = (e0_bar * e0_bar + 2.0 * d * e0_bar) / rho0;
    let b_underbar = (2.0 * d * e0_underbar - e0_underbar * e0_underbar) / rho0;
    Ok((b_bar, b_underbar))
}

/// Everything the controller and the monitor need to know about one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSpec {
    pub d: f64,
    pub r_s: f64,
    pub r_c: f64,
    pub mu_bar: f64,
    pub mu_underbar: f64,
    pub perf: PerformanceFunction,
    pub b_bar: f64,
    pub b_underbar: f64,
    pub e0_bar: f64,
    pub e0_underbar: f64,
}

impl EdgeSpec {
    /// Validates the geometry, selects the initial bounds from `e0` and converts
    /// them to `b_bar`, `b_underbar`.
    pub fn build(
        edge: usize,
        geom: EdgeGeometry,
        perf: PerformanceFunction,
        e0: f64,
        mu: f64,
    ) -> Result<Self> {
        geom.validate(edge)?;
        let (e0_bar, e0_underbar) =
            select_initial_bounds(e0, &geom, mu).map_err(|err| match err {
                FormationError::InvalidGeometry { reason, .. } => {
                    FormationError::InvalidGeometry { edge, reason }
                }
                other => other,
            })?;
        let (b_bar, b_underbar) = bounds_to_b(geom.d, perf.rho0, e0_bar, e0_underbar)?;
        Ok(Self {
            d: geom.d,
            r_s: geom.r_s,
            r_c: geom.r_c,
            mu_bar: geom.mu_bar,
            mu_underbar: geom.mu_underbar,
            perf,
            b_bar,
            b_underbar,
            e0_bar,
            e0_underbar,
        })
    }

    pub fn rho(&self, t: f64) -> f64 {
        self.perf.rho(t)
    }

    /// `(b_underbar rho(t), b_bar rho(t))`: the squared-error envelope is
    /// `(-first, second)`.
    pub fn eta_bounds_at(&self, t: f64) -> (f64, f64) {
        let rho = self.rho(t);
        (self.b_underbar * rho, self.b_bar * rho)
    }
}

/// Distance-error envelope `(e_bar(t), e_underbar(t))`; the error must stay in
/// `(-e_underbar(t), e_bar(t))`.
pub fn e_bounds_at(spec: &EdgeSpec, t: f64) -> Result<(f64, f64)> {
    let rho = spec.rho(t);
    let d2 = spec.d * spec.d;
    let under_arg = d2 - spec.b_underbar * rho;
    if under_arg < 0.0 {
        return Err(FormationError::Config(format!(
            "b_underbar * rho = {} exceeds d^2 = {d2}",
            spec.b_underbar * rho
        )));
    }
    let upper = -spec.d + (d2 + spec.b_bar * rho).sqrt();
    let lower = spec.d - under_arg.sqrt();
    Ok((upper, lower))
}

pub fn modulated_error(eta: f64, rho_t: f64) -> f64 {
    eta / rho_t
}

fn check_inside(eta_hat: f64, b_bar: f64, b_underbar: f64) -> Result<(), ContainmentViolation> {
    if eta_hat > -b_underbar + BOUNDARY_GUARD && eta_hat < b_bar - BOUNDARY_GUARD {
        Ok(())
    } else {
        Err(ContainmentViolation {
            edge: None,
            eta_hat,
            lower: -b_underbar,
            upper: b_bar,
        })
    }
}

/// Logarithmic error transformation, mapping `(-b_underbar, b_bar)` onto the real line.
pub fn transform(eta_hat: f64, b_bar: f64, b_underbar: f64) -> Result<f64, ContainmentViolation> {
    check_inside(eta_hat, b_bar, b_underbar)?;
    // ln((b_bar eta_hat + b_bar b_underbar) / (b_bar b_underbar - b_underbar eta_hat)) / 2,
    // split so that it stays accurate around zero
    Ok(0.5 * ((eta_hat / b_underbar).ln_1p() - (-eta_hat / b_bar).ln_1p()))
}

pub fn transform_inverse(sigma: f64, b_bar: f64, b_underbar: f64) -> f64 {
    if sigma <= 0.0 {
        let r = (2.0 * sigma).exp();
        b_bar * b_underbar * (2.0 * sigma).exp_m1() / (b_bar + b_underbar * r)
    } else {
        let s = (-2.0 * sigma).exp();
        -b_bar * b_underbar * (-2.0 * sigma).exp_m1() / (b_bar * s + b_underbar)
    }
}

/// Chain-rule factor of the transformed error dynamics:
/// `(1 / rho) [1 / (eta_hat + b_underbar) - 1 / (eta_hat - b_bar)]`.
pub fn xi(
    eta_hat: f64,
    rho_t: f64,
    b_bar: f64,
    b_underbar: f64,
) -> Result<f64, ContainmentViolation> {
    check_inside(eta_hat, b_bar, b_underbar)?;
    Ok((1.0 / (eta_hat + b_underbar) - 1.0 / (eta_hat - b_bar)) / rho_t)
}

/// Outcome of comparing `sum_k max(e0_underbar_k, e0_bar_k)` with the rigidity margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidityMarginCheck {
    pub sum: f64,
    pub threshold: f64,
    /// The initial errors lie in the set that keeps the actual framework
    /// infinitesimally rigid for the given threshold.
    pub within: bool,
}

pub fn omega_i_check(specs: &[EdgeSpec], vartheta_bar: f64) -> RigidityMarginCheck {
    let sum = specs
        .iter()
        .map(|s| s.e0_underbar.abs().max(s.e0_bar.abs()))
        .sum::<f64>();
    RigidityMarginCheck {
        sum,
        threshold: vartheta_bar,
        within: sum <= vartheta_bar,
    }
}
