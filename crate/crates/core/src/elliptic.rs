//! Solver for `D Δu + a(x) u - b u^3 = 0` on a rectangle with Dirichlet data.
//!
//! Both 2D problems in the crate have this form. The discrete energy
//!
//! `E(u) = Σ_edges D/2 |δu/h|^2 A + Σ_interior (-a u^2/2 + b u^4/4) A`
//!
//! (with `A = h1 h2`) has gradient `-A r(u)` at interior nodes, where `r` is
//! the five-point residual. That makes the descent phase a true energy
//! descent and gives an exact discrete energy identity at critical points.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::linalg::{BandLdl, SymBand};
use crate::newton::{damped_newton, sup, DescentReport, NewtonStep};

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
/// Step lengths below this end the descent phase early.
const MIN_STEP: f64 = 1e-10;
const MAX_REFINEMENTS: usize = 3;

#[derive(Debug, Clone)]
pub(crate) struct Semilinear {
    pub grid: Grid2D,
    pub diffusion: f64,
    /// `a(x)` at every node, in grid order.
    pub linear: Vec<f64>,
    pub cubic: f64,
    /// Dirichlet values; only boundary entries are read.
    pub boundary: Vec<f64>,
}

impl Semilinear {
    fn n_int(&self) -> (usize, usize) {
        (self.grid.n1() - 2, self.grid.n2() - 2)
    }

    /// Copy the Dirichlet data onto the boundary nodes of `u`.
    pub fn impose_boundary(&self, u: &mut [f64]) {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                if self.grid.is_boundary(i1, i2) {
                    let k = self.grid.index(i1, i2);
                    u[k] = self.boundary[k];
                }
            }
        }
    }

    /// Interior: `D Δu + a u - b u^3`; boundary: `u - g`.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (n1, n2) = (g.n1(), g.n2());
        let (c1, c2) = (self.diffusion / g.h1().powi(2), self.diffusion / g.h2().powi(2));
        let mut r = vec![0.0; u.len()];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let k = i1 * n2 + i2;
                if g.is_boundary(i1, i2) {
                    r[k] = u[k] - self.boundary[k];
                    continue;
                }
                let lap = c1 * (u[k + n2] - 2.0 * u[k] + u[k - n2]) + c2 * (u[k + 1] - 2.0 * u[k] + u[k - 1]);
                r[k] = lap + self.linear[k] * u[k] - self.cubic * u[k].powi(3);
            }
        }
        r
    }

    /// Sup norm of the residual over interior nodes.
    pub fn interior_residual_sup(&self, u: &[f64]) -> f64 {
        let r = self.residual(u);
        let g = &self.grid;
        let mut m = 0.0_f64;
        for i1 in 1..g.n1() - 1 {
            for i2 in 1..g.n2() - 1 {
                m = m.max(r[g.index(i1, i2)].abs());
            }
        }
        m
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        let g = &self.grid;
        let (n1, n2) = (g.n1(), g.n2());
        let area = g.h1() * g.h2();
        let (c1, c2) = (
            0.5 * self.diffusion / g.h1().powi(2),
            0.5 * self.diffusion / g.h2().powi(2),
        );
        let mut grad = 0.0;
        let mut pot = 0.0;
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let k = i1 * n2 + i2;
                if i1 + 1 < n1 {
                    grad += c1 * (u[k + n2] - u[k]).powi(2);
                }
                if i2 + 1 < n2 {
                    grad += c2 * (u[k + 1] - u[k]).powi(2);
                }
                if !g.is_boundary(i1, i2) {
                    let v = u[k] * u[k];
                    pot += -0.5 * self.linear[k] * v + 0.25 * self.cubic * v * v;
                }
            }
        }
        area * (grad + pot)
    }

    /// Assemble `-D Δ_h + diag(shift)` on interior unknowns.
    fn assemble(&self, shift: impl Fn(usize) -> f64) -> SymBand {
        let g = &self.grid;
        let (m1, m2) = self.n_int();
        let (c1, c2) = (self.diffusion / g.h1().powi(2), self.diffusion / g.h2().powi(2));
        let mut a = SymBand::zeros(m1 * m2, m2);
        for j1 in 0..m1 {
            for j2 in 0..m2 {
                let k = j1 * m2 + j2;
                let node = g.index(j1 + 1, j2 + 1);
                a.add(k, k, 2.0 * (c1 + c2) + shift(node));
                if j2 > 0 {
                    a.add(k, k - 1, -c2);
                }
                if j1 > 0 {
                    a.add(k, k - m2, -c1);
                }
            }
        }
        a
    }

    /// `(-D Δ_h + diag(shift)) x` for interior vectors with zero boundary.
    fn apply(&self, shift: &[f64], x: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (m1, m2) = self.n_int();
        let (c1, c2) = (self.diffusion / g.h1().powi(2), self.diffusion / g.h2().powi(2));
        let mut y = vec![0.0; x.len()];
        for j1 in 0..m1 {
            for j2 in 0..m2 {
                let k = j1 * m2 + j2;
                let mut v = (2.0 * (c1 + c2) + shift[k]) * x[k];
                if j2 > 0 {
                    v -= c2 * x[k - 1];
                }
                if j2 + 1 < m2 {
                    v -= c2 * x[k + 1];
                }
                if j1 > 0 {
                    v -= c1 * x[k - m2];
                }
                if j1 + 1 < m1 {
                    v -= c1 * x[k + m2];
                }
                y[k] = v;
            }
        }
        y
    }

    fn gather(&self, full: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (m1, m2) = self.n_int();
        let mut out = Vec::with_capacity(m1 * m2);
        for j1 in 0..m1 {
            let start = g.index(j1 + 1, 1);
            out.extend_from_slice(&full[start..start + m2]);
        }
        out
    }

    fn scatter(&self, interior: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (m1, m2) = self.n_int();
        let mut full = vec![0.0; g.len()];
        for j1 in 0..m1 {
            let start = g.index(j1 + 1, 1);
            full[start..start + m2].copy_from_slice(&interior[j1 * m2..(j1 + 1) * m2]);
        }
        full
    }

    /// Newton-matrix shift `-a + 3 b u^2` at interior unknowns.
    fn newton_shift(&self, u: &[f64]) -> Vec<f64> {
        let interior_u = self.gather(u);
        let interior_a = self.gather(&self.linear);
        interior_u
            .iter()
            .zip(&interior_a)
            .map(|(v, a)| -a + 3.0 * self.cubic * v * v)
            .collect()
    }

    fn factor_newton(&self, u: &[f64]) -> Result<(BandLdl, Vec<f64>)> {
        let shift = self.newton_shift(u);
        let m2 = self.n_int().1;
        let a = self.assemble(|node| {
            let (i1, i2) = (node / self.grid.n2(), node % self.grid.n2());
            shift[(i1 - 1) * m2 + (i2 - 1)]
        });
        Ok((a.factor()?, shift))
    }

    /// Number of negative eigenvalues of the Newton matrix
    /// `-D Δ_h - a + 3 b u^2` at `u` (0 means a strict local minimum of the
    /// discrete energy).
    pub fn inertia(&self, u: &[f64]) -> Result<usize> {
        Ok(self.factor_newton(u)?.0.negative_pivots())
    }

    /// Preconditioned steepest descent on the discrete energy with an Armijo
    /// backtracking line search. Iterates are clamped to `±clamp_bound`.
    /// Stops once the interior residual drops below `cfg.descent_handoff`,
    /// after `cfg.max_descent_iters` steps, or when the line search stalls.
    pub fn descend(&self, u: &mut Vec<f64>, cfg: &SolverConfig, precond_shift: f64) -> Result<DescentReport> {
        self.impose_boundary(u);
        let ldl = self.assemble(|_| precond_shift).factor()?;
        let area = self.grid.h1() * self.grid.h2();
        let bound = cfg.clamp_bound;
        let mut energy = self.energy(u);
        let mut alpha: f64 = 1.0;
        let mut clamp_active = false;
        let mut iterations = 0;
        let mut res = self.interior_residual_sup(u);
        while iterations < cfg.max_descent_iters && res >= cfg.descent_handoff {
            let r = self.gather(&self.residual(u));
            let d = ldl.solve(&r);
            let slope = area * r.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
            let d = self.scatter(&d);
            let accepted = loop {
                let mut clamped = false;
                let trial: Vec<f64> = u
                    .iter()
                    .zip(&d)
                    .map(|(a, b)| {
                        let v = a + alpha * b;
                        if v.abs() > bound {
                            clamped = true;
                            v.signum() * bound
                        } else {
                            v
                        }
                    })
                    .collect();
                let e = self.energy(&trial);
                if e.is_finite() && e <= energy - ARMIJO * alpha * slope {
                    clamp_active = clamped;
                    energy = e;
                    *u = trial;
                    break true;
                }
                alpha *= 0.5;
                if alpha < MIN_STEP {
                    break false;
                }
            };
            if !accepted {
                break;
            }
            iterations += 1;
            alpha = (2.0 * alpha).min(1.0);
            res = self.interior_residual_sup(u);
        }
        Ok(DescentReport {
            iterations,
            residual_sup: res,
            clamp_active,
        })
    }

    /// Damped Newton with a band `L D L^T` solve per step. Each linear solve
    /// is checked against `cfg.linsolve_tol` (relative) and refined if needed.
    pub fn newton(&self, u: Vec<f64>, cfg: &SolverConfig) -> Result<(Vec<f64>, Vec<NewtonStep>)> {
        let mut u = u;
        self.impose_boundary(&mut u);
        damped_newton(
            u,
            cfg,
            |v| self.residual(v),
            |v, r| {
                let (ldl, shift) = self.factor_newton(v)?;
                // Boundary rows already hold u - g = 0, so the boundary
                // correction is zero and only interior unknowns move.
                let rhs = self.gather(r);
                let mut d = ldl.solve(&rhs);
                let norm = sup(&rhs).max(f64::MIN_POSITIVE);
                for _ in 0..=MAX_REFINEMENTS {
                    let ad = self.apply(&shift, &d);
                    let defect: Vec<f64> = rhs.iter().zip(&ad).map(|(b, x)| b - x).collect();
                    if sup(&defect) <= cfg.linsolve_tol * norm {
                        return Ok(self.scatter(&d));
                    }
                    let corr = ldl.solve(&defect);
                    d.iter_mut().zip(&corr).for_each(|(a, c)| *a += c);
                }
                Err(Error::Linalg(format!(
                    "linear solve did not reach relative residual {:e}",
                    cfg.linsolve_tol
                )))
            },
        )
    }
}
