//! Sum-of-sinusoids signals used for disturbances and centroid velocity commands.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wave {
    Sin,
    Cos,
}

/// One term `amp * sin(omega t)` or `amp * cos(omega t)`; `omega` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidTerm {
    pub amp: f64,
    pub omega: f64,
    pub kind: Wave,
}

impl SinusoidTerm {
    pub fn sin(amp: f64, omega: f64) -> Self {
        Self {
            amp,
            omega,
            kind: Wave::Sin,
        }
    }

    pub fn cos(amp: f64, omega: f64) -> Self {
        Self {
            amp,
            omega,
            kind: Wave::Cos,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            Wave::Sin => self.amp * (self.omega * t).sin(),
            Wave::Cos => self.amp * (self.omega * t).cos(),
        }
    }

    /// Closed-form integral over `[0, t]`.
    pub fn integral(&self, t: f64) -> f64 {
        if self.omega == 0.0 {
            return match self.kind {
                Wave::Sin => 0.0,
                Wave::Cos => self.amp * t,
            };
        }
        match self.kind {
            Wave::Sin => self.amp * (1.0 - (self.omega * t).cos()) / self.omega,
            Wave::Cos => self.amp * (self.omega * t).sin() / self.omega,
        }
    }
}

/// A scalar signal: the sum of its terms.
pub type Channel = Vec<SinusoidTerm>;

fn eval_channel(channel: &[SinusoidTerm], t: f64) -> f64 {
    channel.iter().map(|term| term.eval(t)).sum()
}

fn bound_channel(channel: &[SinusoidTerm]) -> f64 {
    channel.iter().map(|term| term.amp.abs()).sum()
}

/// External disturbance `delta_i(t)`: one channel per agent per axis, times a global scale.
///
/// Agents missing from `agents` (or axes missing from an agent) are undisturbed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSignal {
    #[serde(default = "unit_scale")]
    pub scale: f64,
    #[serde(default)]
    pub agents: Vec<Vec<Channel>>,
}

fn unit_scale() -> f64 {
    1.0
}

impl Default for DisturbanceSignal {
    fn default() -> Self {
        Self::zero()
    }
}

impl DisturbanceSignal {
    pub fn zero() -> Self {
        Self {
            scale: 1.0,
            agents: Vec::new(),
        }
    }

    pub fn new(agents: Vec<Vec<Channel>>) -> Self {
        Self { scale: 1.0, agents }
    }

    pub fn scaled(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0 || self.agents.iter().flatten().all(|c| c.is_empty())
    }

    /// Stacked disturbance for `n` agents in dimension `dim`.
    pub fn eval(&self, t: f64, n: usize, dim: usize) -> DVector<f64> {
        let mut out = DVector::zeros(n * dim);
        if self.scale == 0.0 {
            return out;
        }
        for (i, axes) in self.agents.iter().enumerate().take(n) {
            for (a, channel) in axes.iter().enumerate().take(dim) {
                out[i * dim + a] = self.scale * eval_channel(channel, t);
            }
        }
        out
    }

    /// Upper bound on `|delta_i,a(t)|` over all agents, axes and times.
    pub fn bound(&self) -> f64 {
        self.agents
            .iter()
            .flatten()
            .map(|c| self.scale.abs() * bound_channel(c))
            .fold(0.0, f64::max)
    }
}

/// Desired centroid velocity `v_d(t)`, one channel per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub axes: Vec<Channel>,
}

impl VelocityCommand {
    pub fn new(axes: Vec<Channel>) -> Self {
        Self { axes }
    }

    pub fn constant(v: &[f64]) -> Self {
        Self {
            axes: v.iter().map(|&c| vec![SinusoidTerm::cos(c, 0.0)]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.axes.len(),
            self.axes.iter().map(|c| eval_channel(c, t)),
        )
    }

    /// `integral_0^t v_d(s) ds`, in closed form.
    pub fn integral(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.axes.len(),
            self.axes
                .iter()
                .map(|c| c.iter().map(|term| term.integral(t)).sum()),
        )
    }
}
