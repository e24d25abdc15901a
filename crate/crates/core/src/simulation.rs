//! Disturbed single-integrator plant `q_dot = u(q, t) + delta(t)`, fixed-step
//! integration and constraint monitoring.

use std::fmt;
use std::io::{self, Write};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::controller::{
    conventional_control, maneuver_control, ppc_control, robust_conventional_rates,
    ControllerConfig, ControllerVariant,
};
use crate::error::{ContainmentViolation, FormationError, Result};
use crate::performance::{e_bounds_at, EdgeSpec};
use crate::rigidity::{pair_distance, Framework, RigidGraph};
use crate::signal::DisturbanceSignal;

/// Per-edge distance errors `e = |q_i - q_j| - d` and squared errors
/// `eta = |q_i - q_j|^2 - d^2`.
pub fn distance_errors(fw: &Framework, d: &[f64]) -> (Vec<f64>, Vec<f64>) {
    d.iter()
        .enumerate()
        .map(|(k, &dk)| {
            let e = fw.edge_length(k) - dk;
            (e, e * (e + 2.0 * dk))
        })
        .unzip()
}

fn centroid_of(q: &DVector<f64>, n: usize, dim: usize) -> DVector<f64> {
    let mut c = DVector::zeros(dim);
    for i in 0..n {
        c += q.rows(i * dim, dim);
    }
    c / n as f64
}

/// Mean agent position.
pub fn centroid(fw: &Framework) -> DVector<f64> {
    centroid_of(fw.positions(), fw.agent_count(), fw.dim())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeClass {
    /// Every pairwise distance matches the desired realization.
    Correct,
    /// Edge lengths match but the shape is a different (flipped) realization.
    Ambiguous,
    Unformed,
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeClass::Correct => "correct",
            ShapeClass::Ambiguous => "ambiguous",
            ShapeClass::Unformed => "unformed",
        })
    }
}

/// Default relative tolerance for [`classify_shape`].
pub const DEFAULT_SHAPE_TOL: f64 = 0.02;

/// Compares `fw` with the realized desired shape by pairwise distances,
/// each allowed to differ by `tol_rel` times the desired distance.
pub fn classify_shape(fw: &Framework, desired: &Framework, tol_rel: f64) -> Result<ShapeClass> {
    let n = fw.agent_count();
    if n != desired.agent_count() || fw.dim() != desired.dim() {
        return Err(FormationError::IncompatibleFrameworks(format!(
            "cannot compare {n} agents in {}-D with {} agents in {}-D",
            fw.dim(),
            desired.agent_count(),
            desired.dim()
        )));
    }
    let matches = |i: usize, j: usize| {
        let want = desired.difference(i, j).norm();
        (fw.difference(i, j).norm() - want).abs() <= tol_rel * want
    };
    let congruent = (0..n).all(|i| (i + 1..n).all(|j| matches(i, j)));
    if congruent {
        return Ok(ShapeClass::Correct);
    }
    if desired.graph().edges().iter().all(|&(i, j)| matches(i, j)) {
        Ok(ShapeClass::Ambiguous)
    } else {
        Ok(ShapeClass::Unformed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

/// One fixed step of `x_dot = f(t, x)`. Stage times are passed to `f`.
pub fn integrate_step<E, F>(
    integrator: Integrator,
    mut f: F,
    t: f64,
    x: &DVector<f64>,
    dt: f64,
) -> Result<DVector<f64>, E>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>, E>,
{
    match integrator {
        Integrator::Euler => Ok(x + f(t, x)? * dt),
        Integrator::Rk4 => {
            let half = 0.5 * dt;
            let k1 = f(t, x)?;
            let k2 = f(t + half, &(x + &k1 * half))?;
            let k3 = f(t + half, &(x + &k2 * half))?;
            let k4 = f(t + dt, &(x + &k3 * dt))?;
            Ok(x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "default_stride")]
    pub log_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_stride() -> usize {
    1
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            duration: 10.0,
            integrator: Integrator::Rk4,
            log_stride: 1,
            seed: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(FormationError::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return Err(FormationError::Config(format!(
                "duration {} must be at least dt {}",
                self.duration, self.dt
            )));
        }
        if self.log_stride == 0 {
            return Err(FormationError::Config(
                "log_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

/// A containment breach inside an integration step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaltDiagnostic {
    /// Start time of the step in which the breach occurred.
    pub time: f64,
    pub edge: Option<usize>,
    pub eta_hat: f64,
    pub lower: f64,
    pub upper: f64,
}

impl HaltDiagnostic {
    fn new(time: f64, v: ContainmentViolation) -> Self {
        Self {
            time,
            edge: v.edge,
            eta_hat: v.eta_hat,
            lower: v.lower,
            upper: v.upper,
        }
    }
}

impl fmt::Display for HaltDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "halted at t={:.4}: ", self.time)?;
        if let Some(k) = self.edge {
            write!(f, "edge {k} ")?;
        }
        write!(
            f,
            "modulated error {:.6} left ({:.6}, {:.6})",
            self.eta_hat, self.lower, self.upper
        )
    }
}

/// The closed loop: graph, per-edge specs, controller and disturbance.
///
/// State layout is `q` (length `m n`), followed by the disturbance-bound
/// estimate (another `m n`) for the robust baseline.
#[derive(Debug, Clone)]
pub struct Plant {
    graph: RigidGraph,
    dim: usize,
    specs: Vec<EdgeSpec>,
    controller: ControllerConfig,
    disturbance: DisturbanceSignal,
}

impl Plant {
    pub fn new(
        graph: RigidGraph,
        dim: usize,
        specs: Vec<EdgeSpec>,
        controller: ControllerConfig,
        disturbance: DisturbanceSignal,
    ) -> Result<Self> {
        if specs.len() != graph.edge_count() {
            return Err(FormationError::Config(format!(
                "expected {} edge specs, got {}",
                graph.edge_count(),
                specs.len()
            )));
        }
        controller.validate(graph.vertex_count(), dim, graph.edge_count())?;
        Ok(Self {
            graph,
            dim,
            specs,
            controller,
            disturbance,
        })
    }

    pub fn graph(&self) -> &RigidGraph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn specs(&self) -> &[EdgeSpec] {
        &self.specs
    }

    pub fn controller(&self) -> &ControllerConfig {
        &self.controller
    }

    pub fn disturbance(&self) -> &DisturbanceSignal {
        &self.disturbance
    }

    fn coords(&self) -> usize {
        self.dim * self.graph.vertex_count()
    }

    fn has_estimator(&self) -> bool {
        self.controller.variant == ControllerVariant::RobustConventional
    }

    fn desired(&self) -> Vec<f64> {
        self.specs.iter().map(|s| s.d).collect()
    }

    /// Initial full state for agent positions `q0`.
    pub fn initial_state(&self, q0: &DVector<f64>) -> DVector<f64> {
        if !self.has_estimator() {
            return q0.clone();
        }
        let mut x = DVector::zeros(2 * self.coords());
        x.rows_mut(0, self.coords()).copy_from(q0);
        if let Some(d0) = &self.controller.dhat0 {
            x.rows_mut(self.coords(), self.coords()).copy_from(d0);
        }
        x
    }

    fn framework(&self, state: &DVector<f64>) -> Framework {
        let q = state.rows(0, self.coords()).into_owned();
        Framework::new(self.graph.clone(), self.dim, q).expect("plant state matches its graph")
    }

    /// Control input and estimator rate (empty unless the robust baseline is active).
    pub fn control(
        &self,
        t: f64,
        state: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>), ContainmentViolation> {
        let fw = self.framework(state);
        let gains = &self.controller.gains;
        let none = DVector::zeros(0);
        match self.controller.variant {
            ControllerVariant::Ppc => Ok((ppc_control(&fw, &self.specs, gains, t)?, none)),
            ControllerVariant::PpcManeuver => {
                let leader = self.controller.leader.expect("validated");
                let v_d = self.controller.velocity.as_ref().expect("validated");
                match maneuver_control(&fw, &self.specs, gains, leader, v_d, t) {
                    Ok(u) => Ok((u, none)),
                    Err(FormationError::Containment(v)) => Err(v),
                    Err(other) => unreachable!("validated maneuver config failed: {other}"),
                }
            }
            ControllerVariant::Conventional => {
                let k = self.controller.conventional.as_ref().expect("validated").k;
                Ok((conventional_control(&fw, &self.desired(), k), none))
            }
            ControllerVariant::RobustConventional => {
                let params = self.controller.conventional.as_ref().expect("validated");
                let dhat = state.rows(self.coords(), self.coords()).into_owned();
                Ok(robust_conventional_rates(
                    &fw,
                    &self.desired(),
                    params,
                    &dhat,
                ))
            }
        }
    }

    /// Time derivative of the full state.
    pub fn derivative(
        &self,
        t: f64,
        state: &DVector<f64>,
    ) -> Result<DVector<f64>, ContainmentViolation> {
        let (u, rate) = self.control(t, state)?;
        let qdot = u + self
            .disturbance
            .eval(t, self.graph.vertex_count(), self.dim);
        if rate.is_empty() {
            return Ok(qdot);
        }
        let mut out = DVector::zeros(state.len());
        out.rows_mut(0, self.coords()).copy_from(&qdot);
        out.rows_mut(self.coords(), self.coords()).copy_from(&rate);
        Ok(out)
    }

    /// Advances the full state by one step; a breach at any stage halts.
    pub fn step(
        &self,
        state: &DVector<f64>,
        t: f64,
        dt: f64,
        integrator: Integrator,
    ) -> Result<DVector<f64>, HaltDiagnostic> {
        integrate_step(integrator, |s, x| self.derivative(s, x), t, state, dt)
            .map_err(|v| HaltDiagnostic::new(t, v))
    }
}

/// Constraint flags. Sticky in a trace: once raised they stay raised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Flags {
    pub ppb_violation: bool,
    pub collision: bool,
    pub disconnection: bool,
}

impl Flags {
    pub fn any(&self) -> bool {
        self.ppb_violation || self.collision || self.disconnection
    }

    fn merge(self, other: Flags) -> Flags {
        Flags {
            ppb_violation: self.ppb_violation || other.ppb_violation,
            collision: self.collision || other.collision,
            disconnection: self.disconnection || other.disconnection,
        }
    }
}

/// Time series of one run, one entry per logged step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub n: usize,
    pub dim: usize,
    pub edges: Vec<(usize, usize)>,
    pub times: Vec<f64>,
    pub positions: Vec<DVector<f64>>,
    pub errors: Vec<Vec<f64>>,
    pub sq_errors: Vec<Vec<f64>>,
    /// `-e_underbar(t)` per edge.
    pub lower: Vec<Vec<f64>>,
    /// `e_bar(t)` per edge.
    pub upper: Vec<Vec<f64>>,
    pub controls: Vec<DVector<f64>>,
    pub centroids: Vec<DVector<f64>>,
    /// Largest `eta / (b_bar rho)` or `-eta / (b_underbar rho)` over edges;
    /// below 1 means inside the envelope.
    pub bound_ratio: Vec<f64>,
    /// `|q_c(t) - q_c(0) - integral of v_d|_inf`, for maneuvering runs.
    pub centroid_error: Option<Vec<f64>>,
    pub flags: Vec<Flags>,
    pub halt: Option<HaltDiagnostic>,
}

impl SimulationTrace {
    fn new(n: usize, dim: usize, edges: Vec<(usize, usize)>, track_centroid: bool) -> Self {
        Self {
            n,
            dim,
            edges,
            times: Vec::new(),
            positions: Vec::new(),
            errors: Vec::new(),
            sq_errors: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            controls: Vec::new(),
            centroids: Vec::new(),
            bound_ratio: Vec::new(),
            centroid_error: track_centroid.then(Vec::new),
            flags: Vec::new(),
            halt: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Flags at the end of the run; a halted run counts as a bound violation.
    pub fn final_flags(&self) -> Flags {
        let mut f = self.flags.last().copied().unwrap_or_default();
        f.ppb_violation |= self.halt.is_some();
        f
    }

    pub fn final_error_norm(&self) -> f64 {
        self.errors
            .last()
            .map_or(f64::NAN, |e| e.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    pub fn max_bound_ratio(&self) -> f64 {
        self.bound_ratio.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_centroid_error(&self) -> Option<f64> {
        self.centroid_error
            .as_ref()
            .map(|c| c.iter().copied().fold(0.0, f64::max))
    }

    pub fn final_positions(&self) -> Option<&DVector<f64>> {
        self.positions.last()
    }

    /// CSV with a header row; one row per logged step.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let axis = ["x", "y", "z"];
        let l = self.edges.len();
        let mut header = vec!["t".to_string()];
        for i in 0..self.n {
            header.extend(axis[..self.dim].iter().map(|a| format!("q[{i}].{a}")));
        }
        for name in ["e", "eta", "e_lo", "e_hi"] {
            header.extend((0..l).map(|k| format!("{name}[{k}]")));
        }
        for i in 0..self.n {
            header.extend(axis[..self.dim].iter().map(|a| format!("u[{i}].{a}")));
        }
        header.extend(axis[..self.dim].iter().map(|a| format!("qc.{a}")));
        header.extend(["ppb_violation", "collision", "disconnection"].map(String::from));
        w.write_record(&header)?;

        for r in 0..self.len() {
            let mut row: Vec<String> = Vec::with_capacity(header.len());
            row.push(self.times[r].to_string());
            row.extend(self.positions[r].iter().map(f64::to_string));
            for series in [&self.errors, &self.sq_errors, &self.lower, &self.upper] {
                row.extend(series[r].iter().map(f64::to_string));
            }
            row.extend(self.controls[r].iter().map(f64::to_string));
            row.extend(self.centroids[r].iter().map(f64::to_string));
            let f = self.flags[r];
            row.extend(
                [f.ppb_violation, f.collision, f.disconnection].map(|b| u8::from(b).to_string()),
            );
            w.write_record(&row)?;
        }
        w.flush()
    }
}

struct Monitor<'a> {
    plant: &'a Plant,
    q0_centroid: DVector<f64>,
    sticky: Flags,
}

impl Monitor<'_> {
    fn record(
        &mut self,
        trace: &mut SimulationTrace,
        t: f64,
        state: &DVector<f64>,
        u: DVector<f64>,
    ) {
        let plant = self.plant;
        let (n, m) = (plant.graph.vertex_count(), plant.dim);
        let q = state.rows(0, n * m).into_owned();
        let l = plant.specs.len();
        let (mut e, mut eta, mut lo, mut hi) = (
            Vec::with_capacity(l),
            Vec::with_capacity(l),
            Vec::with_capacity(l),
            Vec::with_capacity(l),
        );
        let mut flags = Flags::default();
        let mut ratio = 0.0f64;
        for (k, (spec, &(i, j))) in plant.specs.iter().zip(plant.graph.edges()).enumerate() {
            let dist = pair_distance(&q, m, i, j);
            let ek = dist - spec.d;
            let etak = ek * (ek + 2.0 * spec.d);
            let (upper, lower) =
                e_bounds_at(spec, t).unwrap_or_else(|err| panic!("edge {k}: {err}"));
            if !(-lower < ek && ek < upper) {
                flags.ppb_violation = true;
            }
            if dist <= spec.r_s {
                flags.collision = true;
            }
            if dist >= spec.r_c {
                flags.disconnection = true;
            }
            let (eta_lo, eta_hi) = spec.eta_bounds_at(t);
            ratio = ratio.max(if etak >= 0.0 {
                etak / eta_hi
            } else {
                -etak / eta_lo
            });
            e.push(ek);
            eta.push(etak);
            lo.push(-lower);
            hi.push(upper);
        }
        self.sticky = self.sticky.merge(flags);

        let qc = centroid_of(&q, n, m);
        if let Some(track) = trace.centroid_error.as_mut() {
            let v_d = plant
                .controller
                .velocity
                .as_ref()
                .expect("tracked only with a velocity command");
            let err = (&qc - &self.q0_centroid - v_d.integral(t)).amax();
            track.push(err);
        }
        trace.times.push(t);
        trace.positions.push(q);
        trace.errors.push(e);
        trace.sq_errors.push(eta);
        trace.lower.push(lo);
        trace.upper.push(hi);
        trace.controls.push(u);
        trace.centroids.push(qc);
        trace.bound_ratio.push(ratio);
        trace.flags.push(self.sticky);
    }
}

/// Integrates from `q0` over `[0, cfg.duration]`, logging every `cfg.log_stride` steps
/// and always the last one. A containment breach stops the run and is
/// reported in [`SimulationTrace::halt`].
pub fn simulate(plant: &Plant, q0: &DVector<f64>, cfg: &SimConfig) -> Result<SimulationTrace> {
    cfg.validate()?;
    let (n, m) = (plant.graph.vertex_count(), plant.dim);
    if q0.len() != n * m {
        return Err(FormationError::InvalidFramework(format!(
            "initial state has {} coordinates, expected {}",
            q0.len(),
            n * m
        )));
    }
    let track_centroid = plant.controller.variant == ControllerVariant::PpcManeuver;
    let mut trace = SimulationTrace::new(n, m, plant.graph.edges().to_vec(), track_centroid);
    let mut monitor = Monitor {
        plant,
        q0_centroid: centroid_of(q0, n, m),
        sticky: Flags::default(),
    };

    let steps = cfg.step_count();
    let mut state = plant.initial_state(q0);
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        if k % cfg.log_stride == 0 || k == steps {
            match plant.control(t, &state) {
                Ok((u, _)) => monitor.record(&mut trace, t, &state, u),
                Err(v) => {
                    let nan = DVector::from_element(n * m, f64::NAN);
                    monitor.sticky.ppb_violation = true;
                    monitor.record(&mut trace, t, &state, nan);
                    trace.halt = Some(HaltDiagnostic::new(t, v));
                    break;
                }
            }
        }
        if k == steps {
            break;
        }
        match plant.step(&state, t, cfg.dt, cfg.integrator) {
            Ok(next) => state = next,
            Err(diag) => {
                trace.halt = Some(diag);
                if let Some(last) = trace.flags.last_mut() {
                    last.ppb_violation = true;
                }
                break;
            }
        }
    }
    Ok(trace)
}
