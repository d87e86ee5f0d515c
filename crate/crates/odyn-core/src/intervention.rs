//! Types shared by the unbudgeted and budgeted optimizers.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// +1 for minimization, -1 for maximization: multiplying objectives by
    /// this turns both problems into minimization.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        }
    }
}

/// The allowed resistance interval `[ℓ, u]` with `0 < ℓ ≤ u ≤ 1`.
#[derive(Debug, Clone, Copy)]
pub struct BoxBounds {
    lower: f64,
    upper: f64,
}

impl BoxBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower <= upper && upper <= 1.0) {
            return Err(Error::invalid(format!(
                "resistance bounds must satisfy 0 < lower <= upper <= 1, got [{lower}, {upper}]"
            )));
        }
        Ok(BoxBounds { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

/// Convergence record of the gradient phase of the unbudgeted solver.
#[derive(Debug, Clone, Copy)]
pub struct SolverTrace {
    pub iterations: usize,
    pub final_pg_norm: f64,
    /// False when the iteration budget ran out before the gradient tolerance
    /// was met. The endpoint search still runs in that case, so the plan is
    /// usable either way.
    pub converged: bool,
}

/// A resistance assignment chosen by one of the optimizers.
#[derive(Debug, Clone)]
pub struct InterventionPlan {
    pub direction: Direction,
    /// Nodes whose resistance the optimizer may have changed; ascending.
    pub target_set: Vec<usize>,
    /// The full resistance vector after the intervention (untargeted nodes
    /// keep their original value).
    pub alpha_assigned: Vec<f64>,
    /// Achieved total equilibrium opinion.
    pub objective: f64,
    /// Total equilibrium opinion with no intervention.
    pub baseline_objective: f64,
    /// Present for the gradient-based solver only.
    pub solver_trace: Option<SolverTrace>,
}
