//! Odd minimizers of the Ginzburg-Landau energy
//!
//! `E(u) = ∫ ε/2 |∇u|^2 - μ(x) u^2 / (2ε) + u^4 / (4ε)`, `μ = e^{-|x|^2} - χ`,
//!
//! and the blow-up rescaling that zooms into their transition layer at
//! `(ρ, 0)`.
//!
//! Fields live on the upper half `[-L, L] x [0, L]` with zero Dirichlet data
//! on every edge (the axis row realizes oddness in `x2`). Energies and
//! integrals are doubled to account for the reflected lower half.

use serde::Serialize;

use crate::config::SolverConfig;
use crate::elliptic::Semilinear;
use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::newton::Solution;
use crate::special::{mu, GLParams};

pub const DEFAULT_CHI: f64 = 0.5;
pub const DEFAULT_HALF_WIDTH: f64 = 2.5;
pub const DEFAULT_EPSILONS: [f64; 3] = [0.1, 0.05, 0.025];

/// Grid nodes per layer width `ε^{2/3} (-μ1)^{-1/3}`.
pub const NODES_PER_LAYER: f64 = 8.0;

/// Shift `c` of the descent preconditioner `-ε^2 Δ + c`.
const PRECOND_SHIFT: f64 = 1.0;

/// Distance from the circle and the axis, in units of `ε^{2/3}`, beyond
/// which the Thomas-Fermi gap is measured.
pub const TF_LAYER_FACTOR: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct GLProblem {
    params: GLParams,
    grid: Grid2D,
    config: SolverConfig,
}

impl GLProblem {
    /// Default square `[-2.5, 2.5] x [0, 2.5]` at the layer-resolving
    /// spacing.
    pub fn new(params: GLParams, config: SolverConfig) -> Result<Self> {
        let grid = layer_resolving_grid(&params, DEFAULT_HALF_WIDTH)?;
        Self::with_grid(params, grid, config)
    }

    /// The descent clamp in `config` is replaced by `2 sqrt(1 - χ) + 1`.
    pub fn with_grid(params: GLParams, grid: Grid2D, config: SolverConfig) -> Result<Self> {
        let config = SolverConfig {
            clamp_bound: 2.0 * (1.0 - params.chi()).sqrt() + 1.0,
            ..config
        };
        config.validate()?;
        let (a1, a2) = (grid.axis1(), grid.axis2());
        let l = a2.b();
        if a2.a() != 0.0 || (a1.a() + l).abs() > 1e-12 || (a1.b() - l).abs() > 1e-12 {
            return Err(Error::InvalidGrid(format!(
                "expected [-L, L] x [0, L], got [{}, {}] x [{}, {}]",
                a1.a(),
                a1.b(),
                a2.a(),
                a2.b()
            )));
        }
        if l <= params.rho() + 1.0 {
            return Err(Error::InvalidGrid(format!(
                "half-width {l} must exceed rho + 1 = {}",
                params.rho() + 1.0
            )));
        }
        if a1.n() % 2 == 0 {
            return Err(Error::InvalidGrid(
                "n1 must be odd so the grid is symmetric in x1".into(),
            ));
        }
        Ok(Self { params, grid, config })
    }

    pub fn params(&self) -> &GLParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn semilinear(&self) -> Semilinear {
        let g = self.grid;
        let linear = (0..g.len())
            .map(|k| {
                let (x1, x2) = g.coords(k / g.n2(), k % g.n2());
                mu(&self.params, x1, x2)
            })
            .collect();
        Semilinear {
            grid: g,
            diffusion: self.params.epsilon().powi(2),
            linear,
            cubic: 1.0,
            boundary: vec![0.0; g.len()],
        }
    }
}

/// Layer width `ε^{2/3} (-μ1)^{-1/3}` of the Painleve region.
pub fn layer_width(params: &GLParams) -> f64 {
    params.epsilon().powf(2.0 / 3.0) / (-params.mu1()).cbrt()
}

/// `[-L, L] x [0, L]` with equal spacings of at most
/// `layer_width / NODES_PER_LAYER`.
pub fn layer_resolving_grid(params: &GLParams, half_width: f64) -> Result<Grid2D> {
    let h = layer_width(params) / NODES_PER_LAYER;
    let cells = (half_width / h).ceil() as usize;
    Grid2D::new(-half_width, half_width, 0.0, half_width, 2 * cells + 1, cells + 1)
}

/// Energy of `u` (upper half, doubled for the reflection). Gradients are
/// differences across grid edges, evaluated at edge midpoints.
pub fn gl_energy(u: &Field2D, prob: &GLProblem) -> Result<f64> {
    if u.grid() != &prob.grid {
        return Err(Error::GridMismatch);
    }
    Ok(2.0 * prob.semilinear().energy(u.values()) / prob.params.epsilon())
}

/// `-2 Σ u^4 / (4ε) A`, the value the energy takes at a critical point.
pub fn quartic_energy(u: &Field2D, prob: &GLProblem) -> f64 {
    let g = u.grid();
    let area = g.h1() * g.h2();
    -2.0 * u.values().iter().map(|v| v.powi(4)).sum::<f64>() * area / (4.0 * prob.params.epsilon())
}

/// `|E(u) - quartic_energy(u)| / |E(u)|`.
pub fn energy_identity_gap(u: &Field2D, prob: &GLProblem) -> Result<f64> {
    let e = gl_energy(u, prob)?;
    Ok((e - quartic_energy(u, prob)).abs() / e.abs())
}

/// Interior residual `ε^2 Δu + μ u - u^3`, sup norm.
pub fn gl_residual_sup(u: &Field2D, prob: &GLProblem) -> Result<f64> {
    if u.grid() != &prob.grid {
        return Err(Error::GridMismatch);
    }
    Ok(prob.semilinear().interior_residual_sup(u.values()))
}

/// `sqrt(μ^+) tanh(x2 / ε)`, clamped to the descent bound.
pub fn initial_guess(prob: &GLProblem) -> Field2D {
    let (eps, bound) = (prob.params.epsilon(), prob.config.clamp_bound);
    let mut f = Field2D::from_fn(prob.grid, |x1, x2| {
        let tf = mu(&prob.params, x1, x2).max(0.0).sqrt();
        (tf * (x2 / eps).tanh()).min(bound)
    });
    prob.semilinear().impose_boundary(f.values_mut());
    f
}

/// `max |u(x1, x2) - u(-x1, x2)|`.
pub fn x1_asymmetry(u: &Field2D) -> f64 {
    let g = u.grid();
    let n1 = g.n1();
    let mut worst = 0.0_f64;
    for i1 in 0..n1 / 2 {
        for i2 in 0..g.n2() {
            worst = worst.max((u.get(i1, i2) - u.get(n1 - 1 - i1, i2)).abs());
        }
    }
    worst
}

/// Descent on the energy, then Newton on `ε^2 Δu + μ u - u^3 = 0`.
///
/// Post-checks: `u > 0` at interior nodes, x1-reflection symmetry within
/// `5 abs_tol`, and `max |u| < clamp_bound / 2`.
pub fn minimize_odd(prob: &GLProblem, init: Option<&Field2D>) -> Result<Solution<Field2D>> {
    let sl = prob.semilinear();
    let mut u = match init {
        Some(f) if f.grid() != &prob.grid => return Err(Error::GridMismatch),
        Some(f) => f.values().to_vec(),
        None => initial_guess(prob).into_values(),
    };
    let descent = sl.descend(&mut u, &prob.config, PRECOND_SHIFT)?;
    let (values, log) = sl.newton(u, &prob.config)?;
    let field = Field2D::new(prob.grid, values)?;
    check_minimizer(&field, prob)?;
    Ok(Solution {
        field,
        log,
        descent: Some(descent),
    })
}

fn check_minimizer(u: &Field2D, prob: &GLProblem) -> Result<()> {
    let g = u.grid();
    for i1 in 1..g.n1() - 1 {
        for i2 in 1..g.n2() - 1 {
            let v = u.get(i1, i2);
            if v <= 0.0 {
                let (x1, x2) = g.coords(i1, i2);
                return Err(Error::NonPhysical(format!(
                    "u({x1:.4}, {x2:.4}) = {v:e} is not positive"
                )));
            }
        }
    }
    let asym = x1_asymmetry(u);
    if asym > 5.0 * prob.config.abs_tol {
        return Err(Error::NonPhysical(format!("x1-reflection asymmetry {asym:e}")));
    }
    let top = u.sup_norm();
    if top >= prob.config.clamp_bound / 2.0 {
        return Err(Error::NonPhysical(format!(
            "max |u| = {top} reaches half the clamp bound {}",
            prob.config.clamp_bound
        )));
    }
    Ok(())
}

/// Negative eigenvalues of the discrete Hessian at `u` (0 at a strict local
/// minimizer).
pub fn negative_directions(u: &Field2D, prob: &GLProblem) -> Result<usize> {
    if u.grid() != &prob.grid {
        return Err(Error::GridMismatch);
    }
    prob.semilinear().inertia(u.values())
}

/// Solve for each ε in turn, starting each solve from the bilinear
/// interpolant of the previous minimizer.
pub fn minimize_continuation(
    chi: f64,
    epsilons: &[f64],
    config: SolverConfig,
) -> Result<Vec<(GLProblem, Solution<Field2D>)>> {
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("epsilon list must be strictly decreasing".into()));
    }
    let mut out: Vec<(GLProblem, Solution<Field2D>)> = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let prob = GLProblem::new(GLParams::new(eps, chi)?, config)?;
        let init = match out.last() {
            Some((_, prev)) => Some(Field2D::new(
                prob.grid,
                (0..prob.grid.len())
                    .map(|k| {
                        let (x1, x2) = prob.grid.coords(k / prob.grid.n2(), k % prob.grid.n2());
                        prev.field.sample(x1, x2)
                    })
                    .collect::<Result<Vec<f64>>>()?,
            )?),
            None => None,
        };
        let sol = minimize_odd(&prob, init.as_ref())?;
        out.push((prob, sol));
    }
    Ok(out)
}

/// Rectangle in the rescaled variable `s` and its sampling resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupWindow {
    pub s1min: f64,
    pub s1max: f64,
    pub s2min: f64,
    pub s2max: f64,
    pub m1: usize,
    pub m2: usize,
}

impl Default for BlowupWindow {
    fn default() -> Self {
        Self {
            s1min: -3.0,
            s1max: 3.0,
            s2min: -3.0,
            s2max: 3.0,
            m1: 121,
            m2: 121,
        }
    }
}

impl BlowupWindow {
    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.s1min, self.s1max, self.s2min, self.s2max, self.m1, self.m2)
    }
}

/// `x = (ρ, 0) + ε^{2/3} s / (-μ1)^{1/3}`.
pub fn blowup_point(params: &GLParams, s1: f64, s2: f64) -> (f64, f64) {
    let lam = layer_width(params);
    (params.rho() + lam * s1, lam * s2)
}

/// `w(s) = 2^{-1/2} (-μ1 ε)^{-1/3} u((ρ, 0) + ε^{2/3} s / (-μ1)^{1/3})` on the
/// window grid, with `u` extended oddly to `x2 < 0`.
pub fn blowup_rescale(u: &Field2D, prob: &GLProblem, win: &BlowupWindow) -> Result<Field2D> {
    if u.grid() != &prob.grid {
        return Err(Error::GridMismatch);
    }
    let p = &prob.params;
    let scale = 1.0 / (2f64.sqrt() * (-p.mu1() * p.epsilon()).cbrt());
    let wg = win.grid()?;
    let values = (0..wg.len())
        .map(|k| {
            let (s1, s2) = wg.coords(k / wg.n2(), k % wg.n2());
            let (x1, x2) = blowup_point(p, s1, s2);
            Ok(scale * u.sample_odd(x1, x2)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Field2D::new(wg, values)
}

/// `sup |w - y|` over the window, with `y` sampled from its odd extension.
pub fn blowup_discrepancy(w: &Field2D, y: &Field2D) -> Result<f64> {
    let g = w.grid();
    let mut worst = 0.0_f64;
    for i1 in 0..g.n1() {
        for i2 in 0..g.n2() {
            let (s1, s2) = g.coords(i1, i2);
            worst = worst.max((w.get(i1, i2) - y.sample_odd(s1, s2)?).abs());
        }
    }
    Ok(worst)
}

/// Largest `| |u| - sqrt(μ) |` inside the disc, away from the circle and
/// the axis by `δ = factor ε^{2/3}`, and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TfGap {
    pub gap: f64,
    pub x1: f64,
    pub x2: f64,
    pub delta: f64,
}

/// Thomas-Fermi gap at the default `δ = 3 ε^{2/3}`; `None` when no node
/// lies in the measurement region.
pub fn thomas_fermi_gap(u: &Field2D, prob: &GLProblem) -> Option<TfGap> {
    thomas_fermi_gap_with(u, prob, TF_LAYER_FACTOR)
}

pub fn thomas_fermi_gap_with(u: &Field2D, prob: &GLProblem, factor: f64) -> Option<TfGap> {
    let g = u.grid();
    let p = &prob.params;
    let delta = factor * p.epsilon().powf(2.0 / 3.0);
    let mut best: Option<TfGap> = None;
    for i1 in 0..g.n1() {
        for i2 in 0..g.n2() {
            let (x1, x2) = g.coords(i1, i2);
            if x1.hypot(x2) > p.rho() - delta || x2 < delta {
                continue;
            }
            let gap = (u.get(i1, i2).abs() - mu(p, x1, x2).max(0.0).sqrt()).abs();
            if best.is_none_or(|b| gap > b.gap) {
                best = Some(TfGap { gap, x1, x2, delta });
            }
        }
    }
    best
}

/// Smallest `K` with `|u| <= K (sqrt(μ^+) + ε^{1/3})` at every node.
pub fn min_k_bound(u: &Field2D, prob: &GLProblem) -> f64 {
    let g = u.grid();
    let p = &prob.params;
    let floor = p.epsilon().cbrt();
    let mut k = 0.0_f64;
    for i1 in 0..g.n1() {
        for i2 in 0..g.n2() {
            let (x1, x2) = g.coords(i1, i2);
            k = k.max(u.get(i1, i2).abs() / (mu(p, x1, x2).max(0.0).sqrt() + floor));
        }
    }
    k
}

/// Summary line written per ε.
#[derive(Debug, Clone, Serialize)]
pub struct GLSummary {
    pub epsilon: f64,
    pub chi: f64,
    pub energy: f64,
    pub energy_identity_gap: f64,
    pub tf_gap: Option<f64>,
    #[serde(rename = "min_K_bound")]
    pub min_k_bound: f64,
}

pub fn summarize(u: &Field2D, prob: &GLProblem) -> Result<GLSummary> {
    Ok(GLSummary {
        epsilon: prob.params.epsilon(),
        chi: prob.params.chi(),
        energy: gl_energy(u, prob)?,
        energy_identity_gap: energy_identity_gap(u, prob)?,
        tf_gap: thomas_fermi_gap(u, prob).map(|t| t.gap),
        min_k_bound: min_k_bound(u, prob),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn params(eps: f64) -> GLParams {
        GLParams::new(eps, DEFAULT_CHI).unwrap()
    }

    fn solved() -> &'static (GLProblem, Field2D) {
        static S: OnceLock<(GLProblem, Field2D)> = OnceLock::new();
        S.get_or_init(|| {
            let p = GLProblem::new(params(0.1), SolverConfig::default()).unwrap();
            let u = minimize_odd(&p, None).unwrap().field;
            (p, u)
        })
    }

    #[test]
    fn grid_resolves_the_layer() {
        for (eps, n1) in [(0.1, 177), (0.05, 279), (0.025, 443)] {
            let g = layer_resolving_grid(&params(eps), 2.5).unwrap();
            assert_eq!(g.n1(), n1);
            assert_eq!(g.n2(), n1.div_ceil(2));
            assert!(g.h1() <= layer_width(&params(eps)) / 8.0 + 1e-15);
            assert!((g.h1() - g.h2()).abs() < 1e-14);
        }
    }

    #[test]
    fn problem_validation() {
        let cfg = SolverConfig::default();
        let small = Grid2D::new(-1.5, 1.5, 0.0, 1.5, 31, 16).unwrap();
        assert!(GLProblem::with_grid(params(0.1), small, cfg).is_err());
        let skew = Grid2D::new(-2.5, 2.0, 0.0, 2.5, 31, 16).unwrap();
        assert!(GLProblem::with_grid(params(0.1), skew, cfg).is_err());
        let even = Grid2D::new(-2.5, 2.5, 0.0, 2.5, 30, 16).unwrap();
        assert!(GLProblem::with_grid(params(0.1), even, cfg).is_err());
        let p = GLProblem::new(params(0.1), cfg).unwrap();
        assert!((p.config().clamp_bound - (2.0 * 0.5f64.sqrt() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let p = GLProblem::new(params(0.1), SolverConfig::default()).unwrap();
        assert_eq!(gl_energy(&Field2D::zeros(*p.grid()), &p).unwrap(), 0.0);
    }

    #[test]
    fn small_bump_below_the_well_has_negative_energy() {
        // ψ = μ^+ tanh(x2/ε) satisfies ψ^2 < 2μ inside the disc and vanishes
        // outside. Its energy is positive at ε = 0.1 and turns negative as ε
        // shrinks, once the potential term (order 1/ε) dominates.
        let energy_at = |eps: f64| {
            let p = GLProblem::new(params(eps), SolverConfig::default()).unwrap();
            let psi = Field2D::from_fn(*p.grid(), |x1, x2| mu(p.params(), x1, x2).max(0.0) * (x2 / eps).tanh());
            gl_energy(&psi, &p).unwrap()
        };
        assert!(energy_at(0.1) > 0.0);
        assert!(energy_at(0.025) < 0.0);
    }

    fn bump(x1: f64, x2: f64) -> f64 {
        x2 * (-(x1 * x1 + (x2 - 0.6).powi(2)) / 0.2).exp()
    }

    fn bump_gradient_sq(x1: f64, x2: f64) -> f64 {
        let e = (-(x1 * x1 + (x2 - 0.6).powi(2)) / 0.2).exp();
        let d1 = x2 * e * (-2.0 * x1 / 0.2);
        let d2 = e + x2 * e * (-2.0 * (x2 - 0.6) / 0.2);
        d1 * d1 + d2 * d2
    }

    /// Energy of the bump by a fine midpoint rule on analytic integrands.
    fn bump_energy_reference(p: &GLProblem) -> f64 {
        let eps = p.params().epsilon();
        let (n1, n2) = (2000, 1000);
        let (hx, hy) = (5.0 / n1 as f64, 2.5 / n2 as f64);
        let mut acc = 0.0;
        for i in 0..n1 {
            for j in 0..n2 {
                let (x1, x2) = (-2.5 + (i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy);
                let u = bump(x1, x2);
                acc += eps / 2.0 * bump_gradient_sq(x1, x2) - mu(p.params(), x1, x2) * u * u / (2.0 * eps)
                    + u.powi(4) / (4.0 * eps);
            }
        }
        2.0 * acc * hx * hy
    }

    #[test]
    fn energy_quadrature_is_second_order() {
        let cfg = SolverConfig::default();
        let coarse =
            GLProblem::with_grid(params(0.1), Grid2D::new(-2.5, 2.5, 0.0, 2.5, 101, 51).unwrap(), cfg).unwrap();
        let fine = GLProblem::with_grid(params(0.1), Grid2D::new(-2.5, 2.5, 0.0, 2.5, 201, 101).unwrap(), cfg).unwrap();
        let reference = bump_energy_reference(&coarse);
        let err = |p: &GLProblem| (gl_energy(&Field2D::from_fn(*p.grid(), bump), p).unwrap() - reference).abs();
        let (e1, e2) = (err(&coarse), err(&fine));
        assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5, "{e1:e} {e2:e}");
    }

    #[test]
    fn minimizer_at_coarsest_epsilon() {
        let (p, u) = solved();
        assert!(gl_residual_sup(u, p).unwrap() <= p.config().abs_tol);
        let e = gl_energy(u, p).unwrap();
        assert!(e < 0.0);
        assert!(energy_identity_gap(u, p).unwrap() <= 1e-3);
        assert!(x1_asymmetry(u) <= 5.0 * p.config().abs_tol);
        assert!(u.sup_norm() < p.config().clamp_bound / 2.0);
        assert!(min_k_bound(u, p) <= 2.0);
        assert_eq!(negative_directions(u, p).unwrap(), 0);
    }

    #[test]
    fn rescaled_minimizer_vanishes_on_axis_and_is_odd() {
        let (p, u) = solved();
        let win = BlowupWindow {
            m1: 13,
            m2: 13,
            ..BlowupWindow::default()
        };
        let w = blowup_rescale(u, p, &win).unwrap();
        let g = w.grid();
        let mid = g.n2() / 2;
        for i1 in 0..g.n1() {
            assert_eq!(w.get(i1, mid), 0.0);
            for i2 in 0..g.n2() {
                assert_eq!(w.get(i1, i2), -w.get(i1, g.n2() - 1 - i2));
            }
        }
        let far = BlowupWindow { s1max: 30.0, ..win };
        assert!(matches!(blowup_rescale(u, p, &far), Err(Error::OutOfDomain(..))));
    }

    #[test]
    fn thomas_fermi_gap_of_the_limit_itself_is_zero() {
        let p = GLProblem::new(params(0.025), SolverConfig::default()).unwrap();
        let tf = Field2D::from_fn(*p.grid(), |x1, x2| mu(p.params(), x1, x2).max(0.0).sqrt());
        let gap = thomas_fermi_gap(&tf, &p).unwrap();
        assert_eq!(gap.gap, 0.0);
        // At ε = 0.1 the region |x| <= ρ - δ, x2 >= δ is empty.
        let (p1, u1) = solved();
        assert!(thomas_fermi_gap(u1, p1).is_none());
    }

    #[test]
    fn thomas_fermi_gap_peaks_next_to_the_axis_layer() {
        // With δ = ε^{2/3} the region is nonempty at ε = 0.1; the worst node
        // is on the first row above δ.
        let (p, u) = solved();
        let gap = thomas_fermi_gap_with(u, p, 1.0).unwrap();
        assert!(
            gap.x2 >= gap.delta && gap.x2 < gap.delta + p.grid().h2() + 1e-12,
            "{gap:?}"
        );
    }

    #[test]
    fn continuation_rejects_increasing_list() {
        assert!(minimize_continuation(0.5, &[0.05, 0.1], SolverConfig::default()).is_err());
    }
}
