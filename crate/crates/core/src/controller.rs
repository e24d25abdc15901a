//! Formation control laws.
//!
//! * [`ppc_control`]: prescribed-performance acquisition, `u = -R^T xi K sigma`.
//! * [`agent_control`]: the same law evaluated by one agent from relative measurements.
//! * [`maneuver_control`]: acquisition plus `n v_d(t)` injected at the leader.
//! * [`conventional_control`] and [`robust_conventional_control`]: gradient baselines.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{ContainmentViolation, FormationError, Result};
use crate::performance::{modulated_error, transform, xi, EdgeSpec};
use crate::rigidity::{rigidity_matrix, Framework};
use crate::signal::VelocityCommand;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerVariant {
    Ppc,
    PpcManeuver,
    Conventional,
    RobustConventional,
}

impl ControllerVariant {
    pub const ALL: [ControllerVariant; 4] = [
        ControllerVariant::Ppc,
        ControllerVariant::PpcManeuver,
        ControllerVariant::Conventional,
        ControllerVariant::RobustConventional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerVariant::Ppc => "ppc",
            ControllerVariant::PpcManeuver => "ppc_maneuver",
            ControllerVariant::Conventional => "conventional",
            ControllerVariant::RobustConventional => "robust_conventional",
        }
    }

    /// Laws built on the error transformation; they are undefined outside the bounds.
    pub fn is_prescribed(self) -> bool {
        matches!(
            self,
            ControllerVariant::Ppc | ControllerVariant::PpcManeuver
        )
    }
}

impl std::str::FromStr for ControllerVariant {
    type Err = FormationError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| FormationError::Config(format!("unknown controller variant `{s}`")))
    }
}

impl std::fmt::Display for ControllerVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of the gradient baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct ConventionalParams {
    pub k: f64,
    pub epsilon: f64,
    pub theta: f64,
    /// Per-edge estimator weights `w_ij`.
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub variant: ControllerVariant,
    /// Per-edge gains `k_ij`.
    pub gains: Vec<f64>,
    pub leader: Option<usize>,
    pub velocity: Option<VelocityCommand>,
    pub conventional: Option<ConventionalParams>,
    /// Initial disturbance-bound estimate, one entry per stacked coordinate.
    pub dhat0: Option<DVector<f64>>,
}

impl ControllerConfig {
    pub fn ppc(gains: Vec<f64>) -> Self {
        Self {
            variant: ControllerVariant::Ppc,
            gains,
            leader: None,
            velocity: None,
            conventional: None,
            dhat0: None,
        }
    }

    pub fn validate(&self, n: usize, dim: usize, edge_count: usize) -> Result<()> {
        let cfg = |msg: String| Err(FormationError::Config(msg));
        if self.variant.is_prescribed() {
            if self.gains.len() != edge_count {
                return cfg(format!(
                    "expected {edge_count} gains, got {}",
                    self.gains.len()
                ));
            }
            if let Some(k) = self.gains.iter().position(|&g| !(g > 0.0)) {
                return cfg(format!("gain on edge {k} must be positive"));
            }
        }
        match (self.variant, self.leader) {
            (ControllerVariant::PpcManeuver, None) => {
                return cfg("ppc_maneuver requires a leader".into())
            }
            (ControllerVariant::PpcManeuver, Some(l)) if l >= n => {
                return cfg(format!("leader {l} is not an agent (n = {n})"))
            }
            (ControllerVariant::PpcManeuver, Some(_)) => match &self.velocity {
                None => return cfg("ppc_maneuver requires a velocity command".into()),
                Some(v) if v.dim() != dim => {
                    return cfg(format!(
                        "velocity command has {} axes, expected {dim}",
                        v.dim()
                    ))
                }
                _ => {}
            },
            (_, Some(_)) => {
                return cfg(format!(
                    "leader is only meaningful for ppc_maneuver, not {}",
                    self.variant
                ))
            }
            (_, None) => {}
        }
        if matches!(
            self.variant,
            ControllerVariant::Conventional | ControllerVariant::RobustConventional
        ) {
            let Some(p) = &self.conventional else {
                return cfg(format!("{} requires conventional parameters", self.variant));
            };
            if !(p.k > 0.0) {
                return cfg("conventional gain k must be positive".into());
            }
            if self.variant == ControllerVariant::RobustConventional {
                if !(p.epsilon > 0.0 && p.theta > 0.0) {
                    return cfg("epsilon and theta must be positive".into());
                }
                if p.w.len() != edge_count || p.w.iter().any(|&w| !(w > 0.0)) {
                    return cfg(format!("expected {edge_count} positive estimator weights"));
                }
                if let Some(d0) = &self.dhat0 {
                    if d0.len() != n * dim || d0.iter().any(|&x| !(x >= 0.0)) {
                        return cfg(format!("dhat0 must hold {} nonnegative entries", n * dim));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-edge scalar `k_ij xi_ij sigma_ij` evaluated at squared error `eta`.
fn edge_weight(spec: &EdgeSpec, gain: f64, eta: f64, t: f64) -> Result<f64, ContainmentViolation> {
    let rho = spec.rho(t);
    let eta_hat = modulated_error(eta, rho);
    let sigma = transform(eta_hat, spec.b_bar, spec.b_underbar)?;
    let factor = xi(eta_hat, rho, spec.b_bar, spec.b_underbar)?;
    Ok(gain * factor * sigma)
}

fn check_lengths(fw: &Framework, specs: &[EdgeSpec], gains: &[f64]) {
    let l = fw.graph().edge_count();
    assert_eq!(specs.len(), l, "one EdgeSpec per edge");
    assert_eq!(gains.len(), l, "one gain per edge");
}

/// Stacked `xi K sigma` in edge order.
/// `||z||^2 - d^2`, formed as `e (e + 2d)` so that it vanishes exactly with `e`.
fn squared_error(z: &DVector<f64>, d: f64) -> f64 {
    let e = z.norm() - d;
    e * (e + 2.0 * d)
}

pub fn edge_weights(
    fw: &Framework,
    specs: &[EdgeSpec],
    gains: &[f64],
    t: f64,
) -> Result<DVector<f64>, ContainmentViolation> {
    check_lengths(fw, specs, gains);
    let mut w = DVector::zeros(specs.len());
    for (k, (spec, &gain)) in specs.iter().zip(gains).enumerate() {
        let eta = squared_error(&fw.relative(k), spec.d);
        w[k] = edge_weight(spec, gain, eta, t).map_err(|v| v.on_edge(k))?;
    }
    Ok(w)
}

/// `u = -R^T xi K sigma`.
pub fn ppc_control(
    fw: &Framework,
    specs: &[EdgeSpec],
    gains: &[f64],
    t: f64,
) -> Result<DVector<f64>, ContainmentViolation> {
    let w = edge_weights(fw, specs, gains, t)?;
    Ok(-rigidity_matrix(fw).tr_mul(&w))
}

/// What agent `i` senses about one neighbor: the edge it shares and
/// `q_i - q_j` expressed in the agent's own frame.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborMeasurement {
    pub edge: usize,
    pub relative: DVector<f64>,
}

/// Relative positions of `i`'s neighbors in the global frame.
pub fn neighbor_measurements(fw: &Framework, i: usize) -> Vec<NeighborMeasurement> {
    fw.graph()
        .incident(i)
        .map(|(edge, j)| NeighborMeasurement {
            edge,
            relative: fw.difference(i, j),
        })
        .collect()
}

/// `u_i = -sum_j k_ij xi_ij sigma_ij (q_i - q_j)`, computed from relative
/// measurements only. The output is in whatever frame the measurements are in.
pub fn agent_control(
    neighbors: &[NeighborMeasurement],
    specs: &[EdgeSpec],
    gains: &[f64],
    t: f64,
) -> Result<DVector<f64>, ContainmentViolation> {
    let dim = neighbors.first().map_or(0, |nb| nb.relative.len());
    let mut u = DVector::zeros(dim);
    for nb in neighbors {
        let spec = &specs[nb.edge];
        let eta = squared_error(&nb.relative, spec.d);
        let w = edge_weight(spec, gains[nb.edge], eta, t).map_err(|v| v.on_edge(nb.edge))?;
        u.axpy(-w, &nb.relative, 1.0);
    }
    Ok(u)
}

/// Every agent's [`agent_control`], stacked.
pub fn stacked_agent_control(
    fw: &Framework,
    specs: &[EdgeSpec],
    gains: &[f64],
    t: f64,
) -> Result<DVector<f64>, ContainmentViolation> {
    check_lengths(fw, specs, gains);
    let m = fw.dim();
    let mut u = DVector::zeros(m * fw.agent_count());
    for i in 0..fw.agent_count() {
        let ui = agent_control(&neighbor_measurements(fw, i), specs, gains, t)?;
        if !ui.is_empty() {
            u.rows_mut(i * m, m).copy_from(&ui);
        }
    }
    Ok(u)
}

/// `u_m = -R^T xi K sigma + n M_L v_d(t)`.
pub fn maneuver_control(
    fw: &Framework,
    specs: &[EdgeSpec],
    gains: &[f64],
    leader: usize,
    v_d: &VelocityCommand,
    t: f64,
) -> Result<DVector<f64>> {
    let n = fw.agent_count();
    let m = fw.dim();
    if leader >= n {
        return Err(FormationError::Config(format!(
            "leader {leader} is not an agent (n = {n})"
        )));
    }
    if v_d.dim() != m {
        return Err(FormationError::Config(format!(
            "velocity command has {} axes, expected {m}",
            v_d.dim()
        )));
    }
    let mut u = ppc_control(fw, specs, gains, t)?;
    let mut block = u.rows_mut(leader * m, m);
    block += v_d.eval(t) * n as f64;
    Ok(u)
}

/// Squared distance errors `|q_i - q_j|^2 - d_ij^2` in edge order.
pub fn squared_errors(fw: &Framework, d: &[f64]) -> DVector<f64> {
    DVector::from_iterator(
        d.len(),
        d.iter()
            .enumerate()
            .map(|(k, &dk)| squared_error(&fw.relative(k), dk)),
    )
}

/// `u = -k R^T eta`.
pub fn conventional_control(fw: &Framework, d: &[f64], k: f64) -> DVector<f64> {
    -(rigidity_matrix(fw).tr_mul(&squared_errors(fw, d)) * k)
}

/// Per stacked coordinate estimator weight: the mean `w_ij` over the owning
/// agent's incident edges, repeated across its axes.
fn coordinate_weights(fw: &Framework, w: &[f64]) -> DVector<f64> {
    let m = fw.dim();
    let mut out = DVector::zeros(m * fw.agent_count());
    for i in 0..fw.agent_count() {
        let (sum, count) = fw
            .graph()
            .incident(i)
            .fold((0.0, 0usize), |(s, c), (k, _)| (s + w[k], c + 1));
        let wi = if count == 0 { 0.0 } else { sum / count as f64 };
        out.rows_mut(i * m, m).fill(wi);
    }
    out
}

/// Control and estimator rate of the robust baseline:
/// `u = -k R^T eta - D tanh(D k R^T eta / epsilon)`,
/// `dD/dt = W |k R^T eta| - theta D`, with `D` acting componentwise.
pub fn robust_conventional_rates(
    fw: &Framework,
    d: &[f64],
    params: &ConventionalParams,
    dhat: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let nominal = rigidity_matrix(fw).tr_mul(&squared_errors(fw, d)) * params.k;
    let weights = coordinate_weights(fw, &params.w);
    let u = DVector::from_iterator(
        nominal.len(),
        nominal
            .iter()
            .zip(dhat.iter())
            .map(|(&g, &dh)| -g - dh * (dh * g / params.epsilon).tanh()),
    );
    let rate = DVector::from_iterator(
        nominal.len(),
        nominal
            .iter()
            .zip(dhat.iter())
            .zip(weights.iter())
            .map(|((&g, &dh), &w)| w * g.abs() - params.theta * dh),
    );
    (u, rate)
}

/// Robust baseline control, with the estimate advanced by one explicit step of length `dt`.
pub fn robust_conventional_control(
    fw: &Framework,
    d: &[f64],
    params: &ConventionalParams,
    dhat: &DVector<f64>,
    dt: f64,
) -> (DVector<f64>, DVector<f64>) {
    let (u, rate) = robust_conventional_rates(fw, d, params, dhat);
    let next = dhat + rate * dt;
    (u, next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::performance::{EdgeGeometry, PerformanceFunction};
    use crate::rigidity::RigidGraph;

    fn triangle(points: &[[f64; 2]; 3]) -> Framework {
        let g = RigidGraph::new(3, vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        let pts: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
        Framework::from_points(g, &pts).unwrap()
    }

    fn specs_for(fw: &Framework, d: &[f64]) -> Vec<EdgeSpec> {
        let pf = PerformanceFunction::new(1.0, 0.03, 0.6).unwrap();
        d.iter()
            .enumerate()
            .map(|(k, &dk)| {
                let geom = EdgeGeometry {
                    d: dk,
                    r_s: 0.1,
                    r_c: 5.0,
                    mu_bar: 0.3,
                    mu_underbar: 0.3,
                };
                EdgeSpec::build(k, geom, pf, fw.edge_length(k) - dk, 0.12).unwrap()
            })
            .collect()
    }

    #[test]
    fn zero_error_gives_zero_input() {
        let fw = triangle(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let d = fw.edge_lengths();
        let specs = specs_for(&fw, &d);
        let u = ppc_control(&fw, &specs, &[0.3; 3], 0.0).unwrap();
        assert!(u.amax() == 0.0);
        let ui = agent_control(&neighbor_measurements(&fw, 1), &specs, &[0.3; 3], 0.0).unwrap();
        assert!(ui.amax() == 0.0);
        assert!(conventional_control(&fw, &d, 1.0).amax() == 0.0);
    }

    #[test]
    fn maneuver_leader_injection() {
        let fw = triangle(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let d = fw.edge_lengths();
        let specs = specs_for(&fw, &d);
        let v = VelocityCommand::constant(&[1.0, 0.0]);
        let u = maneuver_control(&fw, &specs, &[0.3; 3], 2, &v, 0.0).unwrap();
        assert_eq!(u.as_slice(), &[0.0, 0.0, 0.0, 0.0, 3.0, 0.0]);
        assert!(maneuver_control(&fw, &specs, &[0.3; 3], 3, &v, 0.0).is_err());
        assert!(maneuver_control(
            &fw,
            &specs,
            &[0.3; 3],
            0,
            &VelocityCommand::constant(&[1.0]),
            0.0
        )
        .is_err());
    }

    #[test]
    fn stretched_edge_moves_only_its_endpoints() {
        let fw = triangle(&[[0.0, 0.0], [1.2, 0.0], [0.0, 1.0]]);
        // only edge (0,1) is off its desired length
        let d = [1.0, 1.0, fw.edge_length(2)];
        let u = conventional_control(&fw, &d, 0.5);
        assert!(u[4].abs() < 1e-15 && u[5].abs() < 1e-15);
        assert!((u[0] + u[2]).abs() < 1e-15 && (u[1] + u[3]).abs() < 1e-15);
        assert!(u[0] > 0.0, "stretched edge pulls agent 0 toward agent 1");
    }

    #[test]
    fn containment_error_names_edge() {
        let fw = triangle(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let d = fw.edge_lengths();
        let specs = specs_for(&fw, &d);
        let far = triangle(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0]]);
        let err = ppc_control(&far, &specs, &[0.3; 3], 0.0).unwrap_err();
        assert_eq!(err.edge, Some(1));
    }

    #[test]
    fn robust_fixed_point_and_integrator() {
        let fw = triangle(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let d = fw.edge_lengths();
        let params = ConventionalParams {
            k: 0.3,
            epsilon: 0.01,
            theta: 0.01,
            w: vec![1.5; 3],
        };
        let (u, next) = robust_conventional_control(&fw, &d, &params, &DVector::zeros(6), 1e-3);
        assert!(u.amax() == 0.0 && next.amax() == 0.0);

        // theta = 0 and a frozen framework: each coordinate grows at w |k R^T eta|
        let d = [0.9, 1.0, 2f64.sqrt()];
        let params = ConventionalParams {
            k: 0.3,
            epsilon: 0.01,
            theta: 0.0,
            w: vec![1.5; 3],
        };
        let rate = (rigidity_matrix(&fw).tr_mul(&squared_errors(&fw, &d)) * 0.3).abs() * 1.5;
        let mut dhat = DVector::zeros(6);
        for _ in 0..100 {
            dhat = robust_conventional_control(&fw, &d, &params, &dhat, 0.01).1;
        }
        assert!((dhat - rate).amax() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ControllerConfig::ppc(vec![0.1; 3]);
        assert!(cfg.validate(3, 2, 3).is_ok());
        cfg.gains[1] = 0.0;
        assert!(cfg.validate(3, 2, 3).is_err());
        let mut cfg = ControllerConfig::ppc(vec![0.1; 3]);
        cfg.variant = ControllerVariant::PpcManeuver;
        assert!(cfg.validate(3, 2, 3).is_err());
        cfg.leader = Some(1);
        cfg.velocity = Some(VelocityCommand::constant(&[1.0, 0.0]));
        assert!(cfg.validate(3, 2, 3).is_ok());
        cfg.variant = ControllerVariant::Ppc;
        assert!(cfg.validate(3, 2, 3).is_err());
        let mut cfg = ControllerConfig::ppc(vec![0.1; 3]);
        cfg.variant = ControllerVariant::RobustConventional;
        assert!(cfg.validate(3, 2, 3).is_err());
        cfg.conventional = Some(ConventionalParams {
            k: 0.3,
            epsilon: 0.01,
            theta: 0.01,
            w: vec![1.5; 3],
        });
        assert!(cfg.validate(3, 2, 3).is_ok());
        assert_eq!(
            "robust_conventional".parse::<ControllerVariant>().unwrap(),
            ControllerVariant::RobustConventional
        );
        assert!("pid".parse::<ControllerVariant>().is_err());
    }
}
