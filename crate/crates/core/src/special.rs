//! Airy function, the Allen-Cahn heteroclinic and the radial weight of the
//! Ginzburg-Landau energy.
//!
//! `Ai` is evaluated on three branches, with `zeta = (2/3)|x|^{3/2}`:
//!
//! | range          | method                                          |
//! |----------------|-------------------------------------------------|
//! | `x < -7`       | oscillatory asymptotic expansion                |
//! | `-7 <= x < 8`  | Maclaurin series in double-double arithmetic    |
//! | `x >= 8`       | exponential asymptotic expansion                |
//!
//! The series terms reach `e^zeta` while the result is of order `e^-zeta`
//! on the positive axis, so plain `f64` summation would lose about
//! `2 zeta / ln 10` digits; the doubled precision absorbs that loss.

use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{Error, Result};

/// Gamma(1/3).
pub const GAMMA_ONE_THIRD: f64 = 2.678_938_534_707_747_6;
/// Gamma(2/3).
pub const GAMMA_TWO_THIRDS: f64 = 1.354_117_939_426_400_4;

/// `Ai(0) = 3^{-2/3} / Gamma(2/3)`.
pub const AI_ZERO: f64 = 0.355_028_053_887_817_24;
/// `Ai'(0) = -3^{-1/3} / Gamma(1/3)`.
pub const AI_PRIME_ZERO: f64 = -0.258_819_403_792_806_8;

/// Lower end of the Maclaurin branch.
pub const SERIES_MIN: f64 = -10.0;
/// Series/asymptotic switch on the positive axis.
pub const X_SWITCH: f64 = 8.0;

pub fn airy_ai(x: f64) -> f64 {
    airy_pair(x).0
}

pub fn airy_ai_prime(x: f64) -> f64 {
    airy_pair(x).1
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_pair(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x < SERIES_MIN {
        oscillatory_asymptotic(-x)
    } else if x < X_SWITCH {
        maclaurin(x)
    } else {
        exponential_asymptotic(x)
    }
}

/// Double-double number `hi + lo`, used to keep the alternating Maclaurin
/// sums accurate where their terms exceed the result by many orders.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Self::new(s, (a - (s - bb)) + (b - bb))
    }

    fn quick(a: f64, b: f64) -> Self {
        let s = a + b;
        Self::new(s, b - (s - a))
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        let t = Self::two_sum(self.lo, o.lo);
        let u = Self::quick(s.hi, s.lo + t.hi);
        Self::quick(u.hi, u.lo + t.lo)
    }

    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        Self::quick(p, e)
    }

    fn scale(self, k: f64) -> Self {
        self.mul(Self::from(k))
    }

    fn div(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let r = self.add(Self::from(q1).scale(-d));
        let q2 = r.hi / d;
        Self::quick(q1, q2)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

const AI_ZERO_DD: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
const AI_PRIME_ZERO_DD: Dd = Dd::new(-0.2588194037928068, 2.522243111610832e-17);

pub(crate) fn maclaurin(x: f64) -> (f64, f64) {
    // Ai = Ai(0) f(x) + Ai'(0) g(x) with
    //   f = sum 3^k (1/3)_k x^{3k} / (3k)!,  g = sum 3^k (2/3)_k x^{3k+1} / (3k+1)!
    let xd = Dd::from(x);
    let x3 = xd.mul(xd).mul(xd);
    let (mut f, mut g) = (Dd::from(1.0), xd);
    let (mut df, mut dg) = (Dd::from(0.0), Dd::from(1.0));
    // Derivative terms: d/dx x^{3k} = 3k x^{3k-1}, carried without dividing by x.
    let (mut tf, mut tg) = (Dd::from(1.0), xd);
    let mut tdf = xd.mul(xd); // x^2 / 2 after the first update below
    let mut tdg = x3; // x^3 / 3 after the first update below
    for k in 1..120 {
        let kf = k as f64;
        tf = tf.mul(x3).div((3.0 * kf - 1.0) * (3.0 * kf));
        tg = tg.mul(x3).div((3.0 * kf) * (3.0 * kf + 1.0));
        // f' term: x^{3k-1} / (3k-1)! * 3^k (1/3)_k ... equals 3k tf / x.
        if k == 1 {
            tdf = tdf.div(2.0);
            tdg = tdg.div(3.0);
        } else {
            tdf = tdf.mul(x3).div((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            tdg = tdg.mul(x3).div((3.0 * kf - 2.0) * (3.0 * kf));
        }
        f = f.add(tf);
        g = g.add(tg);
        df = df.add(tdf);
        dg = dg.add(tdg);
        let size = tf.hi.abs() + tg.hi.abs() + tdf.hi.abs() + tdg.hi.abs();
        if size < 1e-34 * (f.hi.abs() + g.hi.abs() + 1.0) {
            break;
        }
    }
    let ai = AI_ZERO_DD.mul(f).add(AI_PRIME_ZERO_DD.mul(g));
    let aip = AI_ZERO_DD.mul(df).add(AI_PRIME_ZERO_DD.mul(dg));
    (ai.to_f64(), aip.to_f64())
}

/// `e^z K_nu(z)` via the trapezoid rule on `int_0^inf e^{-z(cosh t - 1)} cosh(nu t) dt`.
/// The integrand is analytic in a strip, so the rule converges geometrically.
#[cfg(test)]
fn scaled_bessel_k(nu: f64, z: f64) -> f64 {
    let step = 0.05;
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let t = k as f64 * step;
        let w = (-z * (t.cosh() - 1.0)).exp();
        let term = w * (nu * t).cosh();
        sum += term;
        if w < 1e-20 {
            break;
        }
        k += 1;
    }
    sum * step
}

/// Independent route through `Ai = sqrt(x/3)/pi K_{1/3}(zeta)`, used to cross-check the series.
#[cfg(test)]
pub(crate) fn bessel_quadrature(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let decay = (-zeta).exp();
    let ai = (x / 3.0).sqrt() / PI * scaled_bessel_k(1.0 / 3.0, zeta) * decay;
    let aip = -x / (PI * 3f64.sqrt()) * scaled_bessel_k(2.0 / 3.0, zeta) * decay;
    (ai, aip)
}

/// Coefficients `u_k` and `v_k` of the Airy asymptotic expansions.
fn asymptotic_coefficients(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..count {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

/// Sum `sum_k sign(k) c_k / zeta^k`, truncated at the smallest term.
fn truncated_sum(coeffs: &[f64], zeta: f64, select: impl Fn(usize) -> Option<f64>) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for (k, c) in coeffs.iter().enumerate() {
        let Some(sign) = select(k) else { continue };
        let term = sign * c / zeta.powi(k as i32);
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

pub(crate) fn exponential_asymptotic(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = asymptotic_coefficients(40);
    let alt = |k: usize| Some(if k.is_multiple_of(2) { 1.0 } else { -1.0 });
    let su = truncated_sum(&u, zeta, alt);
    let sv = truncated_sum(&v, zeta, alt);
    let pref = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.powf(0.25);
    (pref / q * su, -pref * q * sv)
}

/// Ai(-z), Ai'(-z) for large positive `z`.
pub(crate) fn oscillatory_asymptotic(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let (u, v) = asymptotic_coefficients(40);
    // Even and odd parts carry alternating signs (-1)^k over k = 2j and 2j+1.
    let even = |k: usize| {
        k.is_multiple_of(2)
            .then(|| if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 })
    };
    let odd = |k: usize| (k % 2 == 1).then(|| if ((k - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 });
    let (pu, qu) = (truncated_sum(&u, zeta, even), truncated_sum(&u, zeta, odd));
    let (pv, qv) = (truncated_sum(&v, zeta, even), truncated_sum(&v, zeta, odd));
    let phase = zeta + PI / 4.0;
    let (s, c) = phase.sin_cos();
    let q = z.powf(0.25);
    let ai = (s * pu - c * qu) / (PI.sqrt() * q);
    let aip = -q / PI.sqrt() * (c * pv + s * qv);
    (ai, aip)
}

/// The Allen-Cahn heteroclinic `tanh(x / sqrt 2)`, solving `u'' = u^3 - u`.
pub fn heteroclinic(x: f64) -> f64 {
    (x * FRAC_1_SQRT_2).tanh()
}

/// Parameters of the Ginzburg-Landau problem with weight `mu(x) = exp(-|x|^2) - chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GLParams {
    epsilon: f64,
    chi: f64,
    rho: f64,
    mu1: f64,
}

impl GLParams {
    pub fn new(epsilon: f64, chi: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(chi > 0.0 && chi < 1.0) {
            return Err(Error::InvalidConfig(format!("chi must lie in (0, 1), got {chi}")));
        }
        let rho = (1.0 / chi).ln().sqrt();
        Ok(Self {
            epsilon,
            chi,
            rho,
            mu1: -2.0 * rho * chi,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// Radius of the circle where `mu` vanishes.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `mu_rad'(rho)`, always negative.
    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.chi)
    }
}

pub fn mu_rad(params: &GLParams, r: f64) -> f64 {
    (-r * r).exp() - params.chi
}

pub fn mu(params: &GLParams, x1: f64, x2: f64) -> f64 {
    mu_rad(params, x1.hypot(x2))
}

pub fn mu_rad_prime(_params: &GLParams, r: f64) -> f64 {
    -2.0 * r * (-r * r).exp()
}

/// `sqrt(max(mu, 0))`, the Thomas-Fermi profile.
pub fn thomas_fermi(params: &GLParams, x1: f64, x2: f64) -> f64 {
    mu(params, x1, x2).max(0.0).sqrt()
}

/// `sqrt(2) * atanh(1/2)`: the point where the heteroclinic equals one half.
pub fn heteroclinic_half_point() -> f64 {
    SQRT_2 * 0.5f64.atanh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Reference values (x, Ai(x), Ai'(x)) from an independent double
    /// precision implementation (Cephes).
    const REFERENCE: &[(f64, f64, f64)] = &[
        (-15.0, 2.78217490870829032e-01, 2.72374204308641510e-01),
        (-12.0, -6.65551750543726395e-02, 1.02311045336797068e+00),
        (-10.0, 4.02412384864419548e-02, 9.96265044132790489e-01),
        (-8.0, -5.27050503563864306e-02, 9.35560938198306435e-01),
        (-7.5, 3.21775716380647892e-01, 3.18809506698554235e-01),
        (-7.0, 1.84280835250506203e-01, -7.71008168410125649e-01),
        (-6.5, -2.38020301997115713e-01, -6.74952492513202329e-01),
        (-5.0, 3.50761009024114223e-01, 3.27192818554443599e-01),
        (-3.0, -3.78814293677658065e-01, 3.14583769216598974e-01),
        (-1.0, 5.35560883292352186e-01, -1.01605671166451750e-02),
        (0.0, 3.55028053887817219e-01, -2.58819403792806824e-01),
        (0.5, 2.31693606480833425e-01, -2.24910532664683999e-01),
        (1.0, 1.35292416312881469e-01, -1.59147441296793285e-01),
        (2.0, 3.49241304232743577e-02, -5.30903844336538810e-02),
        (2.5, 1.57259233804704843e-02, -2.62508810359032285e-02),
        (3.0, 6.59113935746071661e-03, -1.19129767059513135e-02),
        (4.0, 9.51563851204802386e-04, -1.95864095020417987e-03),
        (5.0, 1.08344428136074327e-04, -2.47413890868462317e-04),
        (6.0, 9.94769436025289729e-06, -2.47652003970349724e-05),
        (7.0, 7.49212886399715705e-07, -2.00815089473878940e-06),
        (7.5, 1.91725606751342979e-07, -5.31271395972054160e-07),
        (8.0, 4.69220761609922362e-08, -1.34143929790678436e-07),
        (10.0, 1.10475325528986537e-10, -3.52063367673891181e-10),
        (12.0, 1.39318468887536302e-13, -4.85473655498531698e-13),
        (15.0, 2.16496252073799364e-18, -8.42056795401777693e-18),
    ];

    #[test]
    fn ten_digits_on_positive_axis_and_1e8_on_negative() {
        for &(x, ai, aip) in REFERENCE {
            let (a, ap) = airy_pair(x);
            if x >= 0.0 {
                assert_relative_eq!(a, ai, max_relative = 1e-10);
                assert_relative_eq!(ap, aip, max_relative = 1e-10);
            } else {
                assert!((a - ai).abs() < 1e-8, "Ai({x}) = {a}, want {ai}");
                assert!((ap - aip).abs() < 1e-8, "Ai'({x}) = {ap}, want {aip}");
            }
        }
    }

    #[test]
    fn closed_form_values_at_origin() {
        let ai0 = 3f64.powf(-2.0 / 3.0) / statrs::function::gamma::gamma(2.0 / 3.0);
        let aip0 = -(3f64.powf(-1.0 / 3.0)) / statrs::function::gamma::gamma(1.0 / 3.0);
        assert_relative_eq!(airy_ai(0.0), ai0, max_relative = 1e-14);
        assert_relative_eq!(airy_ai_prime(0.0), aip0, max_relative = 1e-14);
        assert_relative_eq!(airy_ai(0.0), 0.355028053887817, max_relative = 1e-14);
        assert_relative_eq!(
            GAMMA_ONE_THIRD,
            statrs::function::gamma::gamma(1.0 / 3.0),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            GAMMA_TWO_THIRDS,
            statrs::function::gamma::gamma(2.0 / 3.0),
            max_relative = 1e-14
        );
        assert_relative_eq!(AI_ZERO, 3f64.powf(-2.0 / 3.0) / GAMMA_TWO_THIRDS, max_relative = 1e-15);
        assert_relative_eq!(
            AI_PRIME_ZERO,
            -(3f64.powf(-1.0 / 3.0)) / GAMMA_ONE_THIRD,
            max_relative = 1e-15
        );
    }

    #[test]
    fn leading_asymptotic_term_at_ten() {
        let x: f64 = 10.0;
        let lead = (-(2.0 / 3.0) * x.powf(1.5)).exp() / (2.0 * PI.sqrt() * x.powf(0.25));
        assert!((airy_ai(x) / lead - 1.0).abs() < 1e-2);
    }

    #[test]
    fn branches_agree_around_switch_points() {
        for x in [7.0, 7.5, 8.0, 8.5, 9.0] {
            let (a, b) = (maclaurin(x), exponential_asymptotic(x));
            assert_relative_eq!(a.0, b.0, max_relative = 1e-9);
            assert_relative_eq!(a.1, b.1, max_relative = 1e-9);
        }
        for x in [-10.5, -10.0, -9.5] {
            let (a, b) = (maclaurin(x), oscillatory_asymptotic(-x));
            assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn second_difference_across_a_branch_switch_stays_small() {
        // A value jump d at the switch shows up as d / h^2 in the stencil.
        for x in [SERIES_MIN, X_SWITCH] {
            let d2 = extrapolated_second_difference(airy_ai, x, 1e-3);
            let res = (d2 - x * airy_ai(x)).abs();
            assert!(res <= 1e-8, "x = {x}: residual {res:e}");
        }
    }

    #[test]
    fn series_matches_bessel_quadrature() {
        for x in [0.5, 2.0, 3.3, 5.0, 6.0, 7.9] {
            let (a, b) = (maclaurin(x), bessel_quadrature(x));
            assert_relative_eq!(a.0, b.0, max_relative = 1e-12);
            assert_relative_eq!(a.1, b.1, max_relative = 1e-12);
        }
    }

    #[test]
    fn underflows_quietly() {
        assert_eq!(airy_ai(200.0), 0.0);
        assert!(airy_ai(60.0) >= 0.0);
    }

    /// Second difference at spacing `h`, Richardson-combined with spacing
    /// `2h` to cancel the `h^2 f''''/12` stencil error.
    fn extrapolated_second_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let d = |s: f64| (f(x + s) - 2.0 * f(x) + f(x - s)) / (s * s);
        (4.0 * d(h) - d(2.0 * h)) / 3.0
    }

    #[test]
    fn satisfies_the_airy_equation() {
        for x in [-10.0, -5.0, 0.0, 2.0, 5.0] {
            let d2 = extrapolated_second_difference(airy_ai, x, 1e-3);
            let res = (d2 - x * airy_ai(x)).abs();
            assert!(res <= 1e-8, "x = {x}: residual {res:e}");
        }
    }

    #[test]
    fn plain_stencil_error_is_the_predicted_truncation_term() {
        // (Ai)'''' = 2 Ai' + x^2 Ai, so the 3-point residual is h^2/12 of that.
        let h = 1e-3;
        for x in [-10.0, -5.0, 0.0] {
            let d2 = (airy_ai(x + h) - 2.0 * airy_ai(x) + airy_ai(x - h)) / (h * h);
            let res = d2 - x * airy_ai(x);
            let predicted = h * h / 12.0 * (2.0 * airy_ai_prime(x) + x * x * airy_ai(x));
            assert!((res - predicted).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn heteroclinic_values_and_equation() {
        assert_eq!(heteroclinic(0.0), 0.0);
        assert!((heteroclinic(40.0) - 1.0).abs() < 1e-15);
        assert_relative_eq!(heteroclinic(heteroclinic_half_point()), 0.5, max_relative = 1e-15);
        for x in [-3.0, -1.0, 0.0, 0.7, 2.5] {
            let d2 = extrapolated_second_difference(heteroclinic, x, 1e-3);
            let eta = heteroclinic(x);
            assert!((d2 - (eta.powi(3) - eta)).abs() <= 1e-8);
        }
    }

    #[test]
    fn gl_params_derived_constants() {
        let p = GLParams::new(0.1, 0.5).unwrap();
        assert_relative_eq!(p.rho(), 2f64.ln().sqrt(), max_relative = 1e-15);
        assert_relative_eq!(p.mu1(), -p.rho(), max_relative = 1e-15);
        assert!(mu(&p, p.rho(), 0.0).abs() < 1e-15);
        assert_relative_eq!(mu(&p, 0.0, 0.0), 0.5);
        assert_relative_eq!(mu_rad_prime(&p, p.rho()), p.mu1(), max_relative = 1e-14);
        assert!(GLParams::new(0.1, 1.0).is_err());
        assert!(GLParams::new(0.0, 0.5).is_err());
    }

    #[test]
    fn mu_rad_strictly_decreasing() {
        let p = GLParams::new(0.1, 0.3).unwrap();
        let samples: Vec<f64> = (1..200).map(|i| mu_rad(&p, i as f64 * 0.02)).collect();
        assert!(samples.windows(2).all(|w| w[1] < w[0]));
        assert!((1..200).all(|i| mu_rad_prime(&p, i as f64 * 0.02) < 0.0));
        assert_eq!(mu_rad(&p, 0.7), mu_rad(&p, -0.7));
    }

    proptest::proptest! {
        #[test]
        fn mu_is_radial(r in 0.0f64..3.0, theta in 0.0f64..6.3, phi in 0.0f64..6.3) {
            let p = GLParams::new(0.05, 0.5).unwrap();
            let a = mu(&p, r * theta.cos(), r * theta.sin());
            let b = mu(&p, r * phi.cos(), r * phi.sin());
            proptest::prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
