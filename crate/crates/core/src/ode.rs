//! The Hastings-McLeod solution of `y'' = x y + 2 y^3`.
//!
//! The boundary-value solve truncates the real line to `[a, b]` with
//! Dirichlet data `sqrt(|a|/2)` on the left and `Ai(b)` on the right, then
//! runs damped Newton with a tridiagonal Jacobian. The shooting oracle
//! integrates backward from Airy data and is used to cross-check it.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::{second_derivative_1d, Field1D, Grid1D};
use crate::linalg::solve_tridiagonal;
use crate::newton::{damped_newton, Solution};
use crate::special::{airy_ai, airy_pair};

pub const DEFAULT_A: f64 = -12.0;
pub const DEFAULT_B: f64 = 8.0;
pub const DEFAULT_N: usize = 2001;

/// Magnitude at which a shooting trajectory is declared blown up.
pub const BLOW_UP_LEVEL: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct HMProblem {
    grid: Grid1D,
    left_bc: f64,
    right_bc: f64,
    config: SolverConfig,
}

impl HMProblem {
    pub fn new(grid: Grid1D, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if grid.a() >= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "left end must be negative, got {}",
                grid.a()
            )));
        }
        // Ai has its first zero near -2.34; the right end must sit where Ai > 0.
        if grid.b() <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "right end must be positive, got {}",
                grid.b()
            )));
        }
        let right_bc = airy_ai(grid.b());
        if right_bc <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "Ai underflows at the right end {}",
                grid.b()
            )));
        }
        Ok(Self {
            grid,
            left_bc: (grid.a().abs() / 2.0).sqrt(),
            right_bc,
            config,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn left_bc(&self) -> f64 {
        self.left_bc
    }

    pub fn right_bc(&self) -> f64 {
        self.right_bc
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// The same problem with `2n - 1` nodes.
    pub fn refined(&self) -> Self {
        Self {
            grid: self.grid.refined(),
            ..self.clone()
        }
    }
}

impl Default for HMProblem {
    fn default() -> Self {
        let grid = Grid1D::new(DEFAULT_A, DEFAULT_B, DEFAULT_N).expect("default grid is valid");
        Self::new(grid, SolverConfig::default()).expect("default problem is valid")
    }
}

fn residual_values(grid: &Grid1D, y: &[f64], left_bc: f64, right_bc: f64) -> Vec<f64> {
    let n = grid.n();
    let inv_h2 = 1.0 / grid.spacing().powi(2);
    let mut r = vec![0.0; n];
    r[0] = y[0] - left_bc;
    r[n - 1] = y[n - 1] - right_bc;
    for i in 1..n - 1 {
        let x = grid.x(i);
        r[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) * inv_h2 - x * y[i] - 2.0 * y[i].powi(3);
    }
    r
}

/// `y'' - x y - 2 y^3` at interior nodes, `y - bc` at the two ends.
pub fn residual_hm(y: &Field1D, prob: &HMProblem) -> Result<Field1D> {
    if y.grid() != &prob.grid {
        return Err(Error::GridMismatch);
    }
    Field1D::new(
        prob.grid,
        residual_values(&prob.grid, y.values(), prob.left_bc, prob.right_bc),
    )
}

/// `max(sqrt((-x)^+/2), Ai(x))`, smoothed by a 5-point moving average,
/// with the boundary data imposed at both ends.
pub fn initial_guess(prob: &HMProblem) -> Field1D {
    let g = prob.grid;
    let splice: Vec<f64> = g
        .nodes()
        .map(|x| (x.min(0.0).abs() / 2.0).sqrt().max(airy_ai(x)))
        .collect();
    let n = splice.len();
    let mut smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(n - 1);
            splice[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    smooth[0] = prob.left_bc;
    smooth[n - 1] = prob.right_bc;
    Field1D::new(g, smooth).expect("splice is finite")
}

/// Damped Newton on the truncated boundary-value problem.
///
/// The converged field must be positive and strictly decreasing; anything
/// else means Newton found a different Painleve II solution and is reported
/// as [`Error::NonPhysical`].
pub fn solve_hastings_mcleod(prob: &HMProblem, init: Option<&Field1D>) -> Result<Solution<Field1D>> {
    let g = prob.grid;
    let start = match init {
        Some(f) if f.grid() != &g => return Err(Error::GridMismatch),
        Some(f) => {
            let mut v = f.values().to_vec();
            v[0] = prob.left_bc;
            v[g.n() - 1] = prob.right_bc;
            v
        }
        None => initial_guess(prob).into_values(),
    };
    let (lb, rb) = (prob.left_bc, prob.right_bc);
    let inv_h2 = 1.0 / g.spacing().powi(2);
    let (values, log) = damped_newton(
        start,
        &prob.config,
        |y| residual_values(&g, y, lb, rb),
        |y, r| {
            let n = y.len();
            let mut lower = vec![inv_h2; n];
            let mut upper = vec![inv_h2; n];
            let mut diag: Vec<f64> = (0..n).map(|i| -2.0 * inv_h2 - g.x(i) - 6.0 * y[i] * y[i]).collect();
            for i in [0, n - 1] {
                lower[i] = 0.0;
                upper[i] = 0.0;
                diag[i] = 1.0;
            }
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            solve_tridiagonal(&lower, &diag, &upper, &rhs)
        },
    )?;
    let field = Field1D::new(g, values)?;
    check_hastings_mcleod_shape(&field)?;
    Ok(Solution {
        field,
        log,
        descent: None,
    })
}

/// Positivity and strict monotonicity of a computed Hastings-McLeod profile.
pub fn check_hastings_mcleod_shape(h: &Field1D) -> Result<()> {
    let v = h.values();
    if let Some(i) = v.iter().position(|&y| y <= 0.0) {
        return Err(Error::NonPhysical(format!(
            "h({:.4}) = {:e} is not positive",
            h.grid().x(i),
            v[i]
        )));
    }
    if let Some(i) = v.windows(2).position(|w| w[1] >= w[0]) {
        return Err(Error::NonPhysical(format!(
            "h is not strictly decreasing near x = {:.4}",
            h.grid().x(i)
        )));
    }
    Ok(())
}

/// Result of a backward shooting run.
#[derive(Debug, Clone)]
pub enum ShootOutcome {
    /// The trajectory stayed bounded down to `x_end`; the field lives on
    /// `[x_end, x_start]`.
    Completed(Field1D),
    /// `|y|` exceeded [`BLOW_UP_LEVEL`] at `x`.
    BlowUp { x: f64 },
}

impl ShootOutcome {
    pub fn completed(self) -> Option<Field1D> {
        match self {
            ShootOutcome::Completed(f) => Some(f),
            ShootOutcome::BlowUp { .. } => None,
        }
    }
}

/// Integrate `y'' = x y + 2 y^3` backward from `y = k Ai`, `y' = k Ai'` at
/// `x_start` with classical RK4 at step `1e-3`.
pub fn shoot_hm_oracle(k: f64, x_start: f64, x_end: f64) -> Result<ShootOutcome> {
    shoot_with_step(k, x_start, x_end, 1e-3)
}

pub fn shoot_with_step(k: f64, x_start: f64, x_end: f64, max_step: f64) -> Result<ShootOutcome> {
    if x_start < 5.0 {
        return Err(Error::InvalidConfig(format!(
            "shooting must start in the Airy regime x >= 5, got {x_start}"
        )));
    }
    if !(x_end < x_start) || !(max_step > 0.0) {
        return Err(Error::InvalidConfig("need x_end < x_start and a positive step".into()));
    }
    let steps = ((x_start - x_end) / max_step).ceil() as usize;
    let grid = Grid1D::new(x_end, x_start, steps + 1)?;
    let h = -grid.spacing();
    let rhs = |x: f64, y: f64, p: f64| (p, x * y + 2.0 * y * y * y);

    let (ai, aip) = airy_pair(x_start);
    let (mut y, mut p) = (k * ai, k * aip);
    let mut values = vec![0.0; steps + 1];
    values[steps] = y;
    for s in (0..steps).rev() {
        let x = grid.x(s + 1);
        let (k1y, k1p) = rhs(x, y, p);
        let (k2y, k2p) = rhs(x + 0.5 * h, y + 0.5 * h * k1y, p + 0.5 * h * k1p);
        let (k3y, k3p) = rhs(x + 0.5 * h, y + 0.5 * h * k2y, p + 0.5 * h * k2p);
        let (k4y, k4p) = rhs(x + h, y + h * k3y, p + h * k3p);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if !y.is_finite() || y.abs() > BLOW_UP_LEVEL {
            return Ok(ShootOutcome::BlowUp { x: grid.x(s) });
        }
        values[s] = y;
    }
    Ok(ShootOutcome::Completed(Field1D::new(grid, values)?))
}

/// How a shooting trajectory left the Hastings-McLeod branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Departure {
    /// Blew up to `+inf` (k too large).
    Above(f64),
    /// Crossed zero and started oscillating (k too small).
    Below(f64),
    /// Stayed positive and bounded all the way to `x_end`.
    None,
}

/// Classify the trajectory started from `k Ai` by the first sign of
/// departure from the Hastings-McLeod branch.
pub fn classify_shot(k: f64, x_start: f64, x_end: f64) -> Result<Departure> {
    Ok(match shoot_hm_oracle(k, x_start, x_end)? {
        ShootOutcome::BlowUp { x } => Departure::Above(x),
        ShootOutcome::Completed(f) => {
            let g = *f.grid();
            match (0..g.n()).rev().find(|&i| f.values()[i] < 0.0) {
                Some(i) => Departure::Below(g.x(i)),
                None => Departure::None,
            }
        }
    })
}

/// Bisect on `k` between a trajectory that departs below and one that
/// blows up. Returns the final bracket `(k_below, k_above)`; bisection
/// stops early once a midpoint stays on the branch down to `x_end`.
pub fn bisect_connection(
    mut k_below: f64,
    mut k_above: f64,
    x_start: f64,
    x_end: f64,
    iters: usize,
) -> Result<(f64, f64)> {
    if !matches!(classify_shot(k_below, x_start, x_end)?, Departure::Below(_))
        || !matches!(classify_shot(k_above, x_start, x_end)?, Departure::Above(_))
    {
        return Err(Error::InvalidConfig(
            "initial k values do not bracket the connection".into(),
        ));
    }
    for _ in 0..iters {
        let mid = 0.5 * (k_below + k_above);
        match classify_shot(mid, x_start, x_end)? {
            Departure::Above(_) => k_above = mid,
            Departure::Below(_) => k_below = mid,
            Departure::None => break,
        }
    }
    Ok((k_below, k_above))
}

/// Second difference of the field (interior nodes), exposed for diagnostics.
pub fn curvature(h: &Field1D) -> Field1D {
    second_derivative_1d(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::sync::OnceLock;

    fn default_solution() -> &'static Field1D {
        static H: OnceLock<Field1D> = OnceLock::new();
        H.get_or_init(|| solve_hastings_mcleod(&HMProblem::default(), None).unwrap().field)
    }

    #[test]
    fn zero_is_a_solution_with_zero_data() {
        let g = Grid1D::new(-3.0, 2.0, 51).unwrap();
        let mut prob = HMProblem::new(g, SolverConfig::default()).unwrap();
        prob.left_bc = 0.0;
        prob.right_bc = 0.0;
        let r = residual_hm(&Field1D::zeros(g), &prob).unwrap();
        assert_eq!(r.sup_norm(), 0.0);
    }

    #[test]
    fn residual_on_branch_of_minima_is_its_curvature() {
        // On y = sqrt(-x/2) the terms -x y - 2 y^3 cancel, leaving y''
        // = -(1/(4 sqrt 2)) (-x)^{-3/2}.
        let g = Grid1D::new(-10.0, -1.0, 901).unwrap();
        let prob = HMProblem {
            grid: g,
            left_bc: 5f64.sqrt(),
            right_bc: 0.5f64.sqrt(),
            config: SolverConfig::default(),
        };
        let y = Field1D::from_fn(g, |x| (-x / 2.0).sqrt());
        let r = residual_hm(&y, &prob).unwrap();
        for i in 1..g.n() - 1 {
            let x = g.x(i);
            let exact = -1.0 / (4.0 * 2f64.sqrt()) * (-x).powf(-1.5);
            assert!((r.values()[i] - exact).abs() < 1e-4 * exact.abs() + 1e-9);
        }
        assert!(r.values()[0].abs() < 1e-15);
    }

    #[test]
    fn residual_rejects_foreign_grid() {
        let prob = HMProblem::default();
        let other = Field1D::zeros(Grid1D::new(-12.0, 8.0, 11).unwrap());
        assert!(matches!(residual_hm(&other, &prob), Err(Error::GridMismatch)));
    }

    #[test]
    fn problem_validation() {
        let cfg = SolverConfig::default();
        assert!(HMProblem::new(Grid1D::new(1.0, 8.0, 10).unwrap(), cfg).is_err());
        assert!(HMProblem::new(Grid1D::new(-8.0, -1.0, 10).unwrap(), cfg).is_err());
        let p = HMProblem::default();
        assert_relative_eq!(p.left_bc(), 6f64.sqrt());
        assert_relative_eq!(p.right_bc(), airy_ai(8.0));
    }

    #[test]
    fn converged_solution_matches_both_asymptotic_regimes() {
        let h = default_solution();
        let g = h.grid();
        let ratio_right = h.interp(6.0).unwrap() / airy_ai(6.0);
        assert!((ratio_right - 1.0).abs() < 1e-2, "h/Ai at 6: {ratio_right}");
        let ratio_left = h.interp(-8.0).unwrap() / 4f64.sqrt();
        assert!((ratio_left - 1.0).abs() < 1e-2, "h/branch at -8: {ratio_left}");
        assert_eq!(h.values()[0], 6f64.sqrt());
        assert_eq!(h.values()[g.n() - 1], airy_ai(8.0));
        check_hastings_mcleod_shape(h).unwrap();
    }

    #[test]
    fn converged_residual_meets_tolerance() {
        let prob = HMProblem::default();
        let r = residual_hm(default_solution(), &prob).unwrap();
        assert!(r.sup_norm() <= prob.config().abs_tol);
    }

    #[test]
    fn bvp_and_shooting_agree_at_origin() {
        let h0 = default_solution().interp(0.0).unwrap();
        let shot = shoot_hm_oracle(1.0, 8.0, -6.0).unwrap().completed().unwrap();
        let s0 = shot.interp(0.0).unwrap();
        assert!((h0 - s0).abs() < 1e-6, "{h0} vs {s0}");
    }

    #[test]
    fn bvp_and_shooting_agree_on_negative_half_line() {
        let h = default_solution();
        let shot = shoot_hm_oracle(1.0, 8.0, -6.0).unwrap().completed().unwrap();
        let g = h.grid();
        let worst = (0..g.n())
            .map(|i| g.x(i))
            .filter(|x| (-6.0..=0.0).contains(x))
            .map(|x| (h.interp(x).unwrap() - shot.interp(x).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-4, "sup gap {worst:e}");
    }

    /// Four-point Lagrange interpolation at the midpoint of cell `i`.
    fn cubic_midpoint(v: &[f64], i: usize) -> f64 {
        let n = v.len();
        if i == 0 {
            return (5.0 * v[0] + 15.0 * v[1] - 5.0 * v[2] + v[3]) / 16.0;
        }
        if i + 2 >= n {
            return (5.0 * v[n - 1] + 15.0 * v[n - 2] - 5.0 * v[n - 3] + v[n - 4]) / 16.0;
        }
        (-v[i - 1] + 9.0 * v[i] + 9.0 * v[i + 1] - v[i + 2]) / 16.0
    }

    fn doubled_grid_residual(n: usize) -> f64 {
        let prob = HMProblem::new(Grid1D::new(-12.0, 8.0, n).unwrap(), SolverConfig::default()).unwrap();
        let h = solve_hastings_mcleod(&prob, None).unwrap().field;
        let fine_prob = prob.refined();
        let v = h.values();
        let fine: Vec<f64> = (0..fine_prob.grid().n())
            .map(|j| if j % 2 == 0 { v[j / 2] } else { cubic_midpoint(v, j / 2) })
            .collect();
        let f = Field1D::new(*fine_prob.grid(), fine).unwrap();
        residual_hm(&f, &fine_prob).unwrap().sup_norm()
    }

    #[test]
    fn doubled_grid_residual_is_second_order() {
        // Re-evaluating on the doubled grid exposes the O(h^2) discretization
        // error, so the residual shrinks by about 4 per refinement rather
        // than staying at the Newton tolerance.
        let r1 = doubled_grid_residual(501);
        let r2 = doubled_grid_residual(1001);
        assert!(r1 / r2 > 3.5 && r1 / r2 < 4.5, "{r1:e} / {r2:e}");
    }

    #[test]
    fn shooting_with_zero_amplitude_stays_zero() {
        let f = shoot_hm_oracle(0.0, 6.0, -2.0).unwrap().completed().unwrap();
        assert_eq!(f.sup_norm(), 0.0);
    }

    #[test]
    fn shooting_brackets_the_connection() {
        assert!(matches!(classify_shot(1.1, 8.0, -6.0).unwrap(), Departure::Above(x) if x > -6.0));
        assert!(matches!(classify_shot(0.9, 8.0, -6.0).unwrap(), Departure::Below(x) if x > -6.0));
        // Shooting to -12 every k departs one way or the other, so the
        // bracket closes onto the Airy amplitude of the connection.
        let (lo, hi) = bisect_connection(0.9, 1.1, 8.0, -12.0, 40).unwrap();
        assert!(hi - lo < 1e-9, "bracket [{lo}, {hi}]");
        assert!((0.5 * (lo + hi) - 1.0).abs() < 1e-6, "bracket [{lo}, {hi}]");
    }

    #[test]
    fn shooting_rejects_bad_start() {
        assert!(shoot_hm_oracle(1.0, 3.0, -1.0).is_err());
        assert!(shoot_hm_oracle(1.0, 6.0, 7.0).is_err());
    }

    #[test]
    fn solution_sits_below_branch_plus_one_and_decreases() {
        let h = default_solution();
        let g = h.grid();
        for (i, &v) in h.values().iter().enumerate() {
            let x = g.x(i);
            assert!(v > 0.0 && v < (x.min(0.0).abs() / 2.0).sqrt() + 1.0);
        }
        // One-sided differences are negative at every interior node.
        assert!(h.values().windows(2).all(|w| w[1] - w[0] < 0.0));
    }

    #[test]
    fn curvature_sign_changes_once_where_h_crosses_the_branch() {
        // -x h - 2 h^3 = h (-x - 2 h^2): sign changes where h^2 = -x/2.
        let h = default_solution();
        let g = h.grid();
        let signs: Vec<bool> = (1..g.n() - 1)
            .filter(|&i| g.x(i) <= 0.0)
            .map(|i| {
                let (x, v) = (g.x(i), h.values()[i]);
                -x * v - 2.0 * v.powi(3) > 0.0
            })
            .collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn self_convergence_is_second_order() {
        let coarse_prob = HMProblem::new(Grid1D::new(-12.0, 8.0, 501).unwrap(), SolverConfig::default()).unwrap();
        let mid_prob = coarse_prob.refined();
        let fine_prob = mid_prob.refined();
        let coarse = solve_hastings_mcleod(&coarse_prob, None).unwrap().field;
        let mid = solve_hastings_mcleod(&mid_prob, None).unwrap().field;
        let fine = solve_hastings_mcleod(&fine_prob, None).unwrap().field;
        let d1 = (0..coarse.grid().n())
            .map(|i| (coarse.values()[i] - mid.values()[2 * i]).abs())
            .fold(0.0, f64::max);
        let d2 = (0..mid.grid().n())
            .map(|i| (mid.values()[i] - fine.values()[2 * i]).abs())
            .fold(0.0, f64::max);
        assert!(d1 / d2 >= 3.5, "ratio {}", d1 / d2);
    }

    #[test]
    fn rejects_negative_initial_guess_result() {
        // Newton started from -h converges to -h, which is not Hastings-McLeod.
        let prob = HMProblem::new(Grid1D::new(-6.0, 6.0, 241).unwrap(), SolverConfig::default()).unwrap();
        let mut init = initial_guess(&prob);
        for v in init.values_mut().iter_mut() {
            *v = -*v;
        }
        match solve_hastings_mcleod(&prob, Some(&init)) {
            Err(Error::NonPhysical(_)) | Err(Error::NewtonDiverged { .. }) => {}
            other => panic!("expected a failure, got {other:?}"),
        }
    }
}
