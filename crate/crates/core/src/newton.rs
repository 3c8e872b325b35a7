//! Damped Newton iteration shared by the 1D and 2D solvers.

use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};

/// One line of the JSONL convergence log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonStep {
    pub iter: usize,
    pub residual_sup: f64,
    pub damping: f64,
}

/// How the preconditioned descent phase ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentReport {
    pub iterations: usize,
    /// Interior residual sup-norm handed to Newton.
    pub residual_sup: f64,
    /// Whether the last accepted step was clipped by `clamp_bound`.
    pub clamp_active: bool,
}

/// A converged field together with its Newton history.
#[derive(Debug, Clone)]
pub struct Solution<F> {
    pub field: F,
    pub log: Vec<NewtonStep>,
    /// `None` for solvers that go straight to Newton.
    pub descent: Option<DescentReport>,
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn merit(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>()
}

/// Drive `residual(u)` to zero in the sup norm.
///
/// `step(u, r)` must return the Newton correction `d` solving `J(u) d = -r`.
/// Each correction is halved until the squared residual norm decreases;
/// falling below `damping_min` aborts with [`Error::NewtonDiverged`].
pub(crate) fn damped_newton(
    mut u: Vec<f64>,
    cfg: &SolverConfig,
    residual: impl Fn(&[f64]) -> Vec<f64>,
    mut step: impl FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
) -> Result<(Vec<f64>, Vec<NewtonStep>)> {
    let mut r = residual(&u);
    let mut log = vec![NewtonStep {
        iter: 0,
        residual_sup: sup(&r),
        damping: 0.0,
    }];
    for iter in 1..=cfg.max_newton_iters {
        if sup(&r) <= cfg.abs_tol {
            return Ok((u, log));
        }
        let d = step(&u, &r)?;
        let m0 = merit(&r);
        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + damping * b).collect();
            let rt = residual(&trial);
            if rt.iter().all(|v| v.is_finite()) && merit(&rt) < m0 {
                u = trial;
                r = rt;
                break;
            }
            damping *= 0.5;
            if damping < cfg.damping_min {
                return Err(Error::NewtonDiverged {
                    iterations: iter,
                    residual: sup(&r),
                });
            }
        }
        log.push(NewtonStep {
            iter,
            residual_sup: sup(&r),
            damping,
        });
    }
    if sup(&r) <= cfg.abs_tol {
        Ok((u, log))
    } else {
        Err(Error::NewtonDiverged {
            iterations: cfg.max_newton_iters,
            residual: sup(&r),
        })
    }
}
