use std::fmt;
use std::str::FromStr;

/// Kind of update taken at an outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    /// Frank-Wolfe step towards the LMO vertex.
    Fw,
    /// Pairwise weight transfer between two active atoms.
    Pairwise,
    /// Pairwise step that drove the away atom's weight to zero.
    Drop,
    /// No step: the solve stopped at this iterate.
    Stop,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Fw => "fw",
            StepKind::Pairwise => "pairwise",
            StepKind::Drop => "drop",
            StepKind::Stop => "stop",
        }
    }

    /// Whether a step rule was invoked for this record.
    pub fn is_step(self) -> bool {
        !matches!(self, StepKind::Stop)
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fw" => Ok(StepKind::Fw),
            "pairwise" => Ok(StepKind::Pairwise),
            "drop" => Ok(StepKind::Drop),
            "stop" => Ok(StepKind::Stop),
            other => Err(format!("unknown step kind `{other}`")),
        }
    }
}

/// One outer iteration of a solve.
///
/// `primal` and `fw_gap` are measured at `x_t`, before the step; `gamma`
/// and `inner_iters` describe the step taken from `x_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub t: usize,
    pub primal: f64,
    pub fw_gap: f64,
    pub gamma: f64,
    pub inner_iters: usize,
    pub elapsed_s: f64,
    pub step_kind: StepKind,
}
