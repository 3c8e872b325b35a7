//! The odd connecting solution of `Δy - x1 y - 2 y^3 = 0`.
//!
//! The solve lives on the upper half `x2 >= 0` of a truncated rectangle;
//! oddness in `x2` is built in by pinning the axis row to zero.

use serde::Serialize;

use crate::config::SolverConfig;
use crate::elliptic::Semilinear;
use crate::error::{Error, Result};
use crate::grid::{Field1D, Field2D, Grid2D};
use crate::newton::Solution;
use crate::ode::{solve_hastings_mcleod, HMProblem};
use crate::special::{airy_ai, heteroclinic};

pub const DEFAULT_X1: (f64, f64) = (-12.0, 6.0);
pub const DEFAULT_X2MAX: f64 = 16.0;
pub const DEFAULT_N1: usize = 361;
pub const DEFAULT_N2: usize = 321;

/// Nodes closer than this to the left edge are left out of the profile and
/// monotonicity measurements, where the closed-form edge data is only
/// asymptotically correct.
pub const LEFT_MARGIN: f64 = 1.0;

/// Tolerance band for the sign of one-sided difference quotients.
pub const MONOTONE_TOL: f64 = 1e-10;

/// Number of `t2` samples in a rescaled profile.
pub const PROFILE_SAMPLES: usize = 161;

#[derive(Debug, Clone)]
pub struct ConnectProblem {
    grid: Grid2D,
    h_ref: Field1D,
    config: SolverConfig,
}

impl ConnectProblem {
    pub fn new(grid: Grid2D, h_ref: Field1D, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if grid.axis2().a() != 0.0 {
            return Err(Error::InvalidGrid("the x2 axis must start at 0".into()));
        }
        let (a1, h1) = (grid.axis1(), h_ref.grid());
        if a1.a() < h1.a() - 1e-12 || a1.b() > h1.b() + 1e-12 {
            return Err(Error::InvalidGrid(format!(
                "x1 range [{}, {}] is not covered by the Hastings-McLeod grid [{}, {}]",
                a1.a(),
                a1.b(),
                h1.a(),
                h1.b()
            )));
        }
        Ok(Self { grid, h_ref, config })
    }

    /// Pair `grid` with a Hastings-McLeod solution computed at the same x1
    /// spacing, on `[x1min, b]` with `b >= max(x1max, 8)` landing on a node.
    ///
    /// Matching the spacing makes `h` the exact x2-independent solution of
    /// the discrete 2D problem, so the ordering `y <= h` can be checked to
    /// solver tolerance instead of to discretization error.
    pub fn with_matched_h(grid: Grid2D, config: SolverConfig) -> Result<Self> {
        let a1 = grid.axis1();
        let h = a1.spacing();
        let extra = ((crate::ode::DEFAULT_B.max(a1.b()) - a1.b()) / h).ceil() as usize;
        let axis = crate::grid::Grid1D::new(a1.a(), a1.b() + extra as f64 * h, a1.n() + extra)?;
        let hm = HMProblem::new(axis, config)?;
        let h_ref = solve_hastings_mcleod(&hm, None)?.field;
        Self::new(grid, h_ref, config)
    }

    /// The default rectangle and spacing.
    pub fn default_problem(config: SolverConfig) -> Result<Self> {
        let grid = Grid2D::new(DEFAULT_X1.0, DEFAULT_X1.1, 0.0, DEFAULT_X2MAX, DEFAULT_N1, DEFAULT_N2)?;
        Self::with_matched_h(grid, config)
    }

    /// Same problem on another grid, with `h` recomputed at its spacing.
    pub fn with_grid(&self, grid: Grid2D) -> Result<Self> {
        Self::with_matched_h(grid, self.config)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn h_ref(&self) -> &Field1D {
        &self.h_ref
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// `h(x1)`, linearly interpolated from the reference solution.
    pub fn h_at(&self, x1: f64) -> f64 {
        self.h_ref.interp(x1).expect("x1 range checked at construction")
    }

    /// Left-edge value: the deep-negative-x1 tanh profile, capped by `h`.
    pub fn left_edge_value(&self, x2: f64) -> f64 {
        let x1 = self.grid.axis1().a();
        let depth = (-x1).max(0.0);
        let profile = (depth / 2.0).sqrt() * (x2 * depth.sqrt() / 2f64.sqrt()).tanh();
        profile.min(self.h_at(x1))
    }

    fn semilinear(&self) -> Semilinear {
        let g = self.grid;
        let linear = (0..g.len()).map(|k| -g.coords(k / g.n2(), k % g.n2()).0).collect();
        Semilinear {
            grid: g,
            diffusion: 1.0,
            linear,
            cubic: 2.0,
            boundary: assemble_bc(self).into_values(),
        }
    }

    /// Descent preconditioner shift `max(0, max(-x1))`.
    fn precond_shift(&self) -> f64 {
        (-self.grid.axis1().a()).max(0.0)
    }
}

/// Dirichlet data on the four edges; interior entries are zero.
///
/// Bottom (axis) is 0, top is `h(x1)`, right is 0 and left is the tanh
/// profile. The top edge takes precedence at the two upper corners.
pub fn assemble_bc(prob: &ConnectProblem) -> Field2D {
    let g = prob.grid;
    let (n1, n2) = (g.n1(), g.n2());
    let mut f = Field2D::zeros(g);
    for i2 in 0..n2 {
        let x2 = g.axis2().x(i2);
        f.set(0, i2, prob.left_edge_value(x2));
        f.set(n1 - 1, i2, 0.0);
    }
    for i1 in 0..n1 {
        f.set(i1, 0, 0.0);
        f.set(i1, n2 - 1, prob.h_at(g.axis1().x(i1)));
    }
    f
}

/// Interior: `Δy - x1 y - 2 y^3`; boundary: `y - g`.
pub fn residual_p2(y: &Field2D, prob: &ConnectProblem) -> Result<Field2D> {
    if y.grid() != &prob.grid {
        return Err(Error::GridMismatch);
    }
    Field2D::new(prob.grid, prob.semilinear().residual(y.values()))
}

/// `h(x1) tanh(x2 / sqrt 2)` with the boundary data imposed.
pub fn initial_guess(prob: &ConnectProblem) -> Field2D {
    let g = prob.grid;
    let mut f = Field2D::from_fn(g, |x1, x2| prob.h_at(x1) * heteroclinic(x2));
    prob.semilinear().impose_boundary(f.values_mut());
    f
}

/// Energy descent with preconditioner `-Δ + max(-x1)`, then damped Newton.
///
/// The converged field is checked for `0 <= y <= h + 5 abs_tol` and for the
/// monotonicity signs; a violation is reported as [`Error::NonPhysical`].
pub fn solve_connecting(prob: &ConnectProblem, init: Option<&Field2D>) -> Result<Solution<Field2D>> {
    let sl = prob.semilinear();
    let mut u = match init {
        Some(f) if f.grid() != &prob.grid => return Err(Error::GridMismatch),
        Some(f) => f.values().to_vec(),
        None => initial_guess(prob).into_values(),
    };
    let descent = sl.descend(&mut u, &prob.config, prob.precond_shift())?;
    let (values, log) = sl.newton(u, &prob.config)?;
    let field = Field2D::new(prob.grid, values)?;
    check_ordering(&field, prob)?;
    let mono = monotonicity(&field, 0.0);
    if mono.x1_violations + mono.x2_violations > 0 {
        return Err(Error::NonPhysical(format!(
            "{} nodes increase in x1 and {} nodes decrease in x2",
            mono.x1_violations, mono.x2_violations
        )));
    }
    Ok(Solution {
        field,
        log,
        descent: Some(descent),
    })
}

/// Negative eigenvalues of the linearization `-Δ_h + x1 + 6 y^2` at `y`.
pub fn negative_directions(y: &Field2D, prob: &ConnectProblem) -> Result<usize> {
    if y.grid() != &prob.grid {
        return Err(Error::GridMismatch);
    }
    prob.semilinear().inertia(y.values())
}

fn check_ordering(y: &Field2D, prob: &ConnectProblem) -> Result<()> {
    let excess = ordering_excess(y, prob);
    let tol = 5.0 * prob.config.abs_tol;
    if excess > tol {
        return Err(Error::NonPhysical(format!("y exceeds h(x1) by {excess:e}")));
    }
    if let Some(v) = y.values().iter().find(|v| **v < 0.0) {
        return Err(Error::NonPhysical(format!("negative value {v:e} in the upper half")));
    }
    Ok(())
}

/// `max (y(x1, x2) - h(x1))` over all nodes.
pub fn ordering_excess(y: &Field2D, prob: &ConnectProblem) -> f64 {
    let g = y.grid();
    let mut worst = f64::NEG_INFINITY;
    for i1 in 0..g.n1() {
        let h = prob.h_at(g.axis1().x(i1));
        for i2 in 0..g.n2() {
            worst = worst.max(y.get(i1, i2) - h);
        }
    }
    worst
}

/// Number of interior nodes at which a forward difference quotient has the
/// wrong sign, beyond [`MONOTONE_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonotoneCount {
    pub nodes: usize,
    pub x1_violations: usize,
    pub x2_violations: usize,
}

/// Count `y_x1 >= tol` and `y_x2 <= -tol` at interior nodes with
/// `x1 >= x1min + margin`.
pub fn monotonicity(y: &Field2D, margin: f64) -> MonotoneCount {
    let g = y.grid();
    let (h1, h2) = (g.h1(), g.h2());
    let x1_start = g.axis1().a() + margin - 1e-12;
    let mut count = MonotoneCount {
        nodes: 0,
        x1_violations: 0,
        x2_violations: 0,
    };
    for i1 in 1..g.n1() - 1 {
        if g.axis1().x(i1) < x1_start {
            continue;
        }
        for i2 in 1..g.n2() - 1 {
            count.nodes += 1;
            let v = y.get(i1, i2);
            if (y.get(i1 + 1, i2) - v) / h1 >= MONOTONE_TOL {
                count.x1_violations += 1;
            }
            if (y.get(i1, i2 + 1) - v) / h2 <= -MONOTONE_TOL {
                count.x2_violations += 1;
            }
        }
    }
    count
}

/// `max |y(x1, x2max - h2) - h(x1)|` over columns with `x1 >= x1min + margin`.
pub fn top_edge_gap(y: &Field2D, prob: &ConnectProblem, margin: f64) -> f64 {
    let g = y.grid();
    let row = g.n2() - 2;
    (0..g.n1())
        .filter(|&i1| g.axis1().x(i1) >= g.axis1().a() + margin - 1e-12)
        .map(|i1| (y.get(i1, row) - prob.h_at(g.axis1().x(i1))).abs())
        .fold(0.0, f64::max)
}

/// Jump between the second-order one-sided `x2` derivatives at the axis,
/// with the lower side taken from the odd extension. Zero for any field
/// that vanishes on the axis.
pub fn odd_extension_jump(y: &Field2D) -> f64 {
    let g = y.grid();
    let h = g.h2();
    (0..g.n1())
        .map(|i1| {
            let (y0, y1, y2) = (y.get(i1, 0), y.get(i1, 1), y.get(i1, 2));
            let above = (-3.0 * y0 + 4.0 * y1 - y2) / (2.0 * h);
            let below = (3.0 * y0 - 4.0 * (-y1) + (-y2)) / (2.0 * h);
            (above - below).abs()
        })
        .fold(0.0, f64::max)
}

/// `max_{x1 >= s0} |y| - h(s0)`. Nonpositive (up to solver tolerance) since
/// `|y| < h(x1) <= h(s0)` there.
pub fn half_plane_excess(y: &Field2D, prob: &ConnectProblem, s0: f64) -> f64 {
    let g = y.grid();
    let mut m = 0.0_f64;
    for i1 in 0..g.n1() {
        if g.axis1().x(i1) >= s0 {
            for i2 in 0..g.n2() {
                m = m.max(y.get(i1, i2).abs());
            }
        }
    }
    m - prob.h_at(s0)
}

/// Largest `y / Ai(x1)` over `x1 ∈ [3, x1max - 1]`, and whether it sits on
/// the top row.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AiryRatio {
    pub ratio: f64,
    pub x1: f64,
    pub x2: f64,
    pub on_top_edge: bool,
}

pub fn airy_ratio(y: &Field2D) -> Result<AiryRatio> {
    let g = y.grid();
    let hi = g.axis1().b() - 1.0;
    if hi < 3.0 {
        return Err(Error::InvalidGrid("the Airy ratio needs x1max >= 4".into()));
    }
    let mut best = AiryRatio {
        ratio: f64::NEG_INFINITY,
        x1: f64::NAN,
        x2: f64::NAN,
        on_top_edge: false,
    };
    for i1 in 0..g.n1() {
        let x1 = g.axis1().x(i1);
        if !(3.0 - 1e-12..=hi + 1e-12).contains(&x1) {
            continue;
        }
        let ai = airy_ai(x1);
        for i2 in 0..g.n2() {
            let r = y.get(i1, i2) / ai;
            if r > best.ratio {
                best = AiryRatio {
                    ratio: r,
                    x1,
                    x2: g.axis2().x(i2),
                    on_top_edge: i2 == g.n2() - 1,
                };
            }
        }
    }
    Ok(best)
}

/// Outcome of the exponential-decay check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayCheck {
    /// `max |y| e^{(2/3) x1^{3/2}}` over nodes with `x1 >= 1`.
    pub m: f64,
    /// Column where the maximum is attained (NaN when `m = 0`).
    pub argmax_x1: f64,
    pub pass: bool,
}

pub fn check_decay(y: &Field2D) -> Result<DecayCheck> {
    let g = y.grid();
    if g.axis1().b() < 4.0 {
        return Err(Error::InvalidGrid("the decay check needs x1max >= 4".into()));
    }
    let mut m = 0.0;
    let mut argmax = f64::NAN;
    for i1 in 0..g.n1() {
        let x1 = g.axis1().x(i1);
        if x1 < 1.0 - 1e-12 {
            continue;
        }
        let weight = (2.0 / 3.0 * x1.powf(1.5)).exp();
        for i2 in 0..g.n2() {
            let v = y.get(i1, i2).abs() * weight;
            if v > m {
                m = v;
                argmax = x1;
            }
        }
    }
    let pass = m == 0.0 || (1.0 - 1e-12..=2.0 + 1e-12).contains(&argmax);
    Ok(DecayCheck {
        m,
        argmax_x1: argmax,
        pass,
    })
}

/// `ỹ(t2) = sqrt 2 (-x1)^{-1/2} y(x1, x2_offset + t2 (-x1)^{-1/2})` at a
/// fixed `x1 < 0`, sampled on a uniform `t2` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledProfile {
    pub x1_level: f64,
    pub x2_offset: f64,
    pub t2_samples: Vec<f64>,
    pub values: Vec<f64>,
}

impl RescaledProfile {
    /// `sup |ỹ - tanh(t2 / sqrt 2)|`.
    pub fn heteroclinic_gap(&self) -> f64 {
        self.t2_samples
            .iter()
            .zip(&self.values)
            .map(|(t, v)| (v - heteroclinic(*t)).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn rescale_to_allen_cahn(y: &Field2D, x1_level: f64, x2_offset: f64, t2_window: f64) -> Result<RescaledProfile> {
    if !(x1_level < 0.0) {
        return Err(Error::InvalidConfig(format!(
            "x1_level must be negative, got {x1_level}"
        )));
    }
    if !(t2_window > 0.0) {
        return Err(Error::InvalidConfig("t2_window must be positive".into()));
    }
    let stretch = (-x1_level).sqrt();
    let n = PROFILE_SAMPLES;
    let t2_samples: Vec<f64> = (0..n)
        .map(|i| -t2_window + 2.0 * t2_window * i as f64 / (n - 1) as f64)
        .collect();
    let values = t2_samples
        .iter()
        .map(|t| Ok(2f64.sqrt() / stretch * y.sample_odd(x1_level, x2_offset + t / stretch)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RescaledProfile {
        x1_level,
        x2_offset,
        t2_samples,
        values,
    })
}

/// Observed convergence order `log2(e1 / e2)` from three solutions whose
/// grids are successive doublings.
pub fn self_convergence_order(coarse: &Field2D, mid: &Field2D, fine: &Field2D) -> Result<(f64, f64, f64)> {
    let e1 = mid.max_diff_on_coarse(coarse)?;
    let e2 = fine.max_diff_on_coarse(mid)?;
    Ok(((e1 / e2).log2(), e1, e2))
}

/// The default rectangle with spacing `0.05 * 2^k`.
pub fn default_grid_coarsened(k: u32) -> Result<Grid2D> {
    let f = 1usize << k;
    Grid2D::new(
        DEFAULT_X1.0,
        DEFAULT_X1.1,
        0.0,
        DEFAULT_X2MAX,
        (DEFAULT_N1 - 1) / f + 1,
        (DEFAULT_N2 - 1) / f + 1,
    )
}
