use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and safeguards shared by every Newton/descent driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Target sup-norm of the residual at interior nodes.
    pub abs_tol: f64,
    pub max_newton_iters: usize,
    /// Smallest step fraction tried by the backtracking line search.
    pub damping_min: f64,
    /// Relative residual required of every linear solve.
    pub linsolve_tol: f64,
    /// Magnitude cap applied during descent steps only.
    pub clamp_bound: f64,
    /// Iteration cap for the preconditioned descent phase.
    pub max_descent_iters: usize,
    /// Residual sup-norm at which descent hands over to Newton.
    pub descent_handoff: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_newton_iters: 40,
            damping_min: 1.0 / 64.0,
            linsolve_tol: 1e-10,
            clamp_bound: 10.0,
            max_descent_iters: 400,
            descent_handoff: 1e-2,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.abs_tol > 0.0) {
            return bad("abs_tol must be positive");
        }
        if self.max_newton_iters == 0 {
            return bad("max_newton_iters must be at least 1");
        }
        if !(self.damping_min > 0.0 && self.damping_min <= 1.0) {
            return bad("damping_min must lie in (0, 1]");
        }
        if !(self.linsolve_tol > 0.0) {
            return bad("linsolve_tol must be positive");
        }
        if !(self.clamp_bound > 0.0) {
            return bad("clamp_bound must be positive");
        }
        if !(self.descent_handoff > 0.0) {
            return bad("descent_handoff must be positive");
        }
        Ok(())
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}
