use thiserror::Error;

/// A modulated squared distance error left the open interval `(-b_underbar, b_bar)`.
///
/// This is the runtime signal that a prescribed performance bound was breached.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("containment violated{}: modulated error {eta_hat} outside ({lower}, {upper})", edge_label(*.edge))]
pub struct ContainmentViolation {
    /// Edge index in stored edge order, when known.
    pub edge: Option<usize>,
    pub eta_hat: f64,
    pub lower: f64,
    pub upper: f64,
}

fn edge_label(edge: Option<usize>) -> String {
    edge.map(|k| format!(" on edge {k}")).unwrap_or_default()
}

impl ContainmentViolation {
    pub fn on_edge(mut self, edge: usize) -> Self {
        self.edge = Some(edge);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormationError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid framework: {0}")]
    InvalidFramework(String),
    #[error("incompatible frameworks: {0}")]
    IncompatibleFrameworks(String),
    #[error("invalid geometry on edge {edge}: {reason}")]
    InvalidGeometry { edge: usize, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Containment(#[from] ContainmentViolation),
}

pub type Result<T, E = FormationError> = std::result::Result<T, E>;
