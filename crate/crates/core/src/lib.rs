//! Distance-based formation control with prescribed transient and steady-state performance.
//!
//! The crate is organized bottom-up:
//! - [`rigidity`]: graphs, frameworks, incidence and rigidity matrices, rank tests;
//! - [`performance`]: performance functions, initial-bound selection and the error transform;
//! - [`controller`]: the prescribed-performance law, its maneuvering extension and the
//!   gradient baselines;
//! - [`simulation`]: the closed loop, fixed-step integration and run monitoring;
//! - [`scenario`] and [`batch`]: JSON scenario files, built-in experiments and batch runs.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod controller;
pub mod error;
pub mod performance;
pub mod rigidity;
pub mod scenario;
pub mod signal;
pub mod simulation;

pub use batch::{run_batch, run_prepared, BatchReport, RunOutcome, ScenarioSummary};
pub use controller::{
    agent_control, conventional_control, maneuver_control, ppc_control,
    robust_conventional_control, ControllerConfig, ControllerVariant, ConventionalParams,
};
pub use error::{ContainmentViolation, FormationError, Result};
pub use performance::{EdgeGeometry, EdgeSpec, PerformanceFunction, RigidityMarginCheck};
pub use rigidity::{Framework, RigidGraph};
pub use scenario::{
    builtin, builtins, load_scenario, Overrides, PreparedScenario, Scenario, ScenarioError,
};
pub use signal::{DisturbanceSignal, SinusoidTerm, VelocityCommand};
pub use simulation::{
    classify_shape, simulate, Flags, HaltDiagnostic, Integrator, Plant, ShapeClass, SimConfig,
    SimulationTrace,
};
