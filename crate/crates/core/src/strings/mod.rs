//! Four-point Veneziano amplitudes at every place.
//!
//! The kinematics enter through `a = -1 - s/2`, `b = -1 - t/2`,
//! `c = -1 - u/2` with `a + b + c = 1`. The real amplitude is available in
//! its Γ form and in its ζ-ratio form; the p-adic amplitude is
//! `g_p²·Γ_p(a)Γ_p(b)Γ_p(c)` with the local gamma factor
//! `Γ_p(a) = (1 - p^(a-1)) / (1 - p^(-a))`.

mod special;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{primes_up_to, Prime};
use crate::error::{Error, Result};

pub use special::{gamma, is_nonpositive_integer, rgamma, zeta};

const SUM_TOLERANCE: f64 = 1e-12;
const POLE_EPS: f64 = 1e-14;
/// Relative error at which a partial Euler product counts as converged.
pub const CONVERGED_BELOW: f64 = 1e-3;

/// Kinematic variables `(a, b, c)` with `a + b + c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MandelstamTriple {
    a: Complex64,
    b: Complex64,
    c: Complex64,
}

impl MandelstamTriple {
    /// `c` is derived as `1 - a - b`.
    pub fn new(a: Complex64, b: Complex64) -> Self {
        MandelstamTriple { a, b, c: 1.0 - a - b }
    }

    /// All three given explicitly; rejected unless they sum to 1.
    pub fn from_abc(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        if (a + b + c - 1.0).norm() > SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("a + b + c = {} is not 1", a + b + c)));
        }
        Ok(MandelstamTriple { a, b, c })
    }

    /// From the Mandelstam invariants `s` and `t`; `u = -8 - s - t`.
    pub fn from_mandelstam(s: Complex64, t: Complex64) -> Self {
        MandelstamTriple::new(-1.0 - s / 2.0, -1.0 - t / 2.0)
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn s(&self) -> Complex64 {
        -2.0 * (self.a + 1.0)
    }

    pub fn t(&self) -> Complex64 {
        -2.0 * (self.b + 1.0)
    }

    pub fn u(&self) -> Complex64 {
        -2.0 * (self.c + 1.0)
    }

    pub fn args(&self) -> [Complex64; 3] {
        [self.a, self.b, self.c]
    }

    /// The six orderings of `(a, b, c)`.
    pub fn permutations(&self) -> [MandelstamTriple; 6] {
        let (a, b, c) = (self.a, self.b, self.c);
        [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
            .map(|(a, b, c)| MandelstamTriple { a, b, c })
    }
}

fn real_power(base: f64, exponent: Complex64) -> Complex64 {
    Complex64::new(base, 0.0).powc(exponent)
}

/// The local gamma factor `Γ_p(a) = (1 - p^(a-1)) / (1 - p^(-a))`.
pub fn gamma_p(p: Prime, a: Complex64) -> Result<Complex64> {
    let pf = p.get() as f64;
    let den = 1.0 - real_power(pf, -a);
    if den.norm() < POLE_EPS {
        return Err(Error::PoleArgument(format!("Γ_{p} at {a}")));
    }
    Ok((1.0 - real_power(pf, a - 1.0)) / den)
}

/// `g_p²·Γ_p(a)·Γ_p(b)·Γ_p(c)`.
pub fn amplitude_p(p: Prime, m: &MandelstamTriple, g_p: Complex64) -> Result<Complex64> {
    let mut acc = g_p * g_p;
    for x in m.args() {
        acc *= gamma_p(p, x)?;
    }
    Ok(acc)
}

fn check_beta_region(a: Complex64, b: Complex64) -> Result<()> {
    if a.re <= 0.0 || b.re <= 0.0 || (a + b).re >= 1.0 {
        return Err(Error::OutOfConvergenceRegion(format!(
            "need Re a > 0, Re b > 0, Re(a + b) < 1; got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

/// `Σ_{k ≥ 1} r^k = r / (1 - r)`.
fn geometric_tail(r: Complex64) -> Complex64 {
    r / (1.0 - r)
}

/// `∫_{Q_p} |x|_p^(a-1)·|1-x|_p^(b-1) dx` by decomposing Q_p into regions
/// where both norms are constant.
///
/// * `|x| = p^(-k)`, `k ≥ 1`: integrand `p^(-k(a-1))`, measure `p^(-k)(1 - 1/p)`.
/// * `|x| = p^k`, `k ≥ 1`: `|1-x| = |x|`, measure `p^k(1 - 1/p)`.
/// * `|x| = 1`, `x ≢ 0, 1 (mod p)`: integrand 1, measure `(p-2)/p`.
/// * `|1-x| = p^(-k)`, `k ≥ 1`: mirror image of the first family with `b`.
///
/// Each family is a geometric series summed in closed form.
pub fn beta_series_oracle(p: Prime, a: Complex64, b: Complex64) -> Result<Complex64> {
    check_beta_region(a, b)?;
    let pf = p.get() as f64;
    let shell = 1.0 - 1.0 / pf;
    let inner_x = geometric_tail(real_power(pf, -a));
    let inner_1mx = geometric_tail(real_power(pf, -b));
    let outer = geometric_tail(real_power(pf, a + b - 1.0));
    let units = (pf - 2.0) / pf;
    Ok(units + shell * (inner_x + inner_1mx + outer))
}

/// The same integral with every shell added one at a time, innermost first,
/// until the terms drop below `1e-17` relative to the running total.
pub fn beta_shell_sum(p: Prime, a: Complex64, b: Complex64) -> Result<Complex64> {
    check_beta_region(a, b)?;
    let pf = p.get() as f64;
    let shell = 1.0 - 1.0 / pf;
    let mut total = Complex64::new((pf - 2.0) / pf, 0.0);
    let families = [-a, -b, a + b - 1.0];
    for exponent in families {
        let mut k = 1i32;
        loop {
            let term = shell * real_power(pf, exponent * k as f64);
            total += term;
            if term.norm() <= 1e-17 * total.norm().max(1.0) || k > 100_000 {
                break;
            }
            k += 1;
        }
    }
    Ok(total)
}

/// Which expression evaluates the real amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VenezianoForm {
    /// `B(a, b) + B(b, c) + B(c, a)` with `B(x, y) = Γ(x)Γ(y)/Γ(x + y)`.
    Gamma,
    /// `ζ(1-a)/ζ(a) · ζ(1-b)/ζ(b) · ζ(1-c)/ζ(c)`.
    Zeta,
}

fn euler_beta(x: Complex64, y: Complex64) -> Result<Complex64> {
    Ok(gamma(x)? * gamma(y)? * rgamma(x + y))
}

fn zeta_ratio(x: Complex64) -> Result<Complex64> {
    if (x - 1.0).norm() < POLE_EPS {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let den = zeta(x)?;
    if den.norm() < POLE_EPS {
        return Err(Error::PoleArgument(format!("ζ({x}) = 0 in a denominator")));
    }
    Ok(zeta(1.0 - x)? / den)
}

/// The crossing-symmetric real amplitude `A_∞` with coupling `g`.
pub fn veneziano_real(m: &MandelstamTriple, g: Complex64, form: VenezianoForm) -> Result<Complex64> {
    let [a, b, c] = m.args();
    let body = match form {
        VenezianoForm::Gamma => euler_beta(a, b)? + euler_beta(b, c)? + euler_beta(c, a)?,
        VenezianoForm::Zeta => {
            let mut ratios = [zeta_ratio(a)?, zeta_ratio(b)?, zeta_ratio(c)?];
            ratios.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            ratios[0] * ratios[1] * ratios[2]
        }
    };
    Ok(g * g * body)
}

/// One row of the Euler-product convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductRow {
    pub p_max: u64,
    pub partial: Complex64,
    pub target: Complex64,
    pub rel_error: f64,
}

/// Outcome of [`adelic_product_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdelicProductReport {
    pub a: Complex64,
    /// Rows at `P = 10, 100, …` and at `P_max`.
    pub rows: Vec<ProductRow>,
    /// Whether the relative error decreased at every prime.
    pub monotone: bool,
    /// Whether the last relative error is below [`CONVERGED_BELOW`].
    pub converged: bool,
    /// `A_∞ · Π_{x ∈ {a,b,c}} ζ(x)/ζ(1-x)`, which should be 1.
    pub regularized_identity: Complex64,
    pub identity_error: f64,
}

/// Partial products of `Π_p Γ_p(a)` against `ζ(a)/ζ(1-a)`.
///
/// For `Re a > 1` the factors `(1 - p^(-a))^(-1)` form the convergent Euler
/// product of `ζ(a)`, while `Π_p (1 - p^(a-1))` diverges; the latter is
/// replaced by its ζ-regularized value `1/ζ(1-a)`. The row at `P` therefore
/// holds `Π_{p ≤ P} (1 - p^(-a))^(-1) / ζ(1-a)`.
pub fn euler_partial_products(a: Complex64, p_max: u64) -> Result<(Vec<ProductRow>, bool)> {
    if a.re <= 1.0 {
        return Err(Error::OutOfConvergenceRegion(format!(
            "the Euler product needs Re a > 1, got {a}"
        )));
    }
    let primes = primes_up_to(p_max);
    if primes.is_empty() {
        return Err(Error::InvalidArgument(format!("no primes up to {p_max}")));
    }
    let inv_den = 1.0 / zeta(1.0 - a)?;
    let target = zeta(a)? * inv_den;
    let factors: Vec<Complex64> = primes
        .par_iter()
        .map(|&p| 1.0 / (1.0 - real_power(p as f64, -a)))
        .collect();
    let mut checkpoints: Vec<u64> = std::iter::successors(Some(10u64), |c| c.checked_mul(10))
        .take_while(|&c| c < p_max)
        .collect();
    checkpoints.push(p_max);
    let mut pending = checkpoints.into_iter().peekable();
    let error_of = |z: Complex64| (z - target).norm() / target.norm();
    let mut rows = Vec::new();
    let mut acc = inv_den;
    let mut last_error = f64::INFINITY;
    let mut monotone = true;
    for (&p, f) in primes.iter().zip(&factors) {
        while let Some(cp) = pending.next_if(|&cp| cp < p) {
            rows.push(ProductRow { p_max: cp, partial: acc, target, rel_error: error_of(acc) });
        }
        acc *= f;
        let rel_error = error_of(acc);
        monotone &= rel_error <= last_error;
        last_error = rel_error;
    }
    for cp in pending {
        rows.push(ProductRow { p_max: cp, partial: acc, target, rel_error: error_of(acc) });
    }
    Ok((rows, monotone))
}

/// `ZetaForm(A_∞)·Π_{x ∈ {a,b,c}} ζ(x)/ζ(1-x)` with `g = g_p = 1`.
pub fn regularized_identity(m: &MandelstamTriple) -> Result<Complex64> {
    let mut acc = veneziano_real(m, Complex64::new(1.0, 0.0), VenezianoForm::Zeta)?;
    for x in m.args() {
        let den = zeta(1.0 - x)?;
        if den.norm() < POLE_EPS {
            return Err(Error::PoleArgument(format!("ζ(1 - {x}) = 0 in a denominator")));
        }
        acc *= zeta(x)? / den;
    }
    Ok(acc)
}

/// Both halves of the adelic product check for the triple `m`: the Euler
/// product table at `a` and the regularized identity.
pub fn adelic_product_check(m: &MandelstamTriple, p_max: u64) -> Result<AdelicProductReport> {
    let (rows, monotone) = euler_partial_products(m.a(), p_max)?;
    let converged = rows.last().is_some_and(|r| r.rel_error <= CONVERGED_BELOW);
    let regularized_identity = regularized_identity(m)?;
    Ok(AdelicProductReport {
        a: m.a(),
        rows,
        monotone,
        converged,
        regularized_identity,
        identity_error: (regularized_identity - 1.0).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn gamma_p_examples() {
        assert!(close(gamma_p(p(2), c(2.0, 0.0)).unwrap(), c(-4.0 / 3.0, 0.0), 1e-15));
        assert!(matches!(gamma_p(p(3), c(0.0, 0.0)), Err(Error::PoleArgument(_))));
        let period = 2.0 * std::f64::consts::PI / 3f64.ln();
        assert!(matches!(gamma_p(p(3), c(0.0, period)), Err(Error::PoleArgument(_))));
    }

    #[test]
    fn amplitude_p_examples() {
        let m = MandelstamTriple::new(c(2.0, 0.0), c(2.0, 0.0));
        assert_eq!(m.c(), c(-3.0, 0.0));
        let v = amplitude_p(p(2), &m, c(1.0, 0.0)).unwrap();
        assert!(close(v, c(-5.0 / 21.0, 0.0), 1e-14));
        assert_eq!(amplitude_p(p(2), &m, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));

        let third = MandelstamTriple::new(c(1.0 / 3.0, 0.0), c(1.0 / 3.0, 0.0));
        for pr in [2u64, 3, 5, 7] {
            let g = gamma_p(p(pr), c(1.0 / 3.0, 0.0)).unwrap();
            let v = amplitude_p(p(pr), &third, c(1.0, 0.0)).unwrap();
            assert!(close(v, g * g * g, 1e-14));
            let oracle = beta_series_oracle(p(pr), c(1.0 / 3.0, 0.0), c(1.0 / 3.0, 0.0)).unwrap();
            assert!(close(oracle, v, 1e-12));
        }
    }

    #[test]
    fn mandelstam_conventions() {
        let m = MandelstamTriple::from_mandelstam(c(-4.0, 0.0), c(2.0, 1.0));
        assert!(close(m.s() + m.t() + m.u(), c(-8.0, 0.0), 1e-14));
        assert!(close(m.a() + m.b() + m.c(), c(1.0, 0.0), 1e-14));
        assert!(MandelstamTriple::from_abc(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn oracle_grid_matches_closed_form() {
        for pr in [2u64, 3, 5, 7] {
            for i in 0..5 {
                for j in 0..5 {
                    let a = c(0.08 + 0.08 * i as f64, -0.6 + 0.3 * j as f64);
                    let b = c(0.05 + 0.07 * j as f64, 0.4 - 0.2 * i as f64);
                    let m = MandelstamTriple::new(a, b);
                    let closed = amplitude_p(p(pr), &m, c(1.0, 0.0)).unwrap();
                    let oracle = beta_series_oracle(p(pr), a, b).unwrap();
                    let shells = beta_shell_sum(p(pr), a, b).unwrap();
                    assert!(close(oracle, closed, 1e-9), "p={pr} a={a} b={b}");
                    assert!(close(shells, oracle, 1e-9));
                    assert!(close(beta_series_oracle(p(pr), b, a).unwrap(), oracle, 1e-14));
                }
            }
        }
        assert!(matches!(beta_series_oracle(p(3), c(0.7, 0.0), c(0.5, 0.0)), Err(Error::OutOfConvergenceRegion(_))));
    }

    #[test]
    fn real_forms_agree() {
        for (a, b) in [(c(1.0 / 3.0, 0.0), c(1.0 / 3.0, 0.0)), (c(2.0, 0.0), c(-0.5, 0.0)), (c(0.3, 0.7), c(-1.2, 0.1))] {
            let m = MandelstamTriple::new(a, b);
            let g = veneziano_real(&m, c(1.0, 0.0), VenezianoForm::Gamma).unwrap();
            let z = veneziano_real(&m, c(1.0, 0.0), VenezianoForm::Zeta).unwrap();
            assert!(close(g, z, 1e-8), "{a} {b}: {g} vs {z}");
            for perm in m.permutations() {
                let gp = veneziano_real(&perm, c(1.0, 0.0), VenezianoForm::Gamma).unwrap();
                assert!(close(gp, g, 1e-10));
                assert_eq!(veneziano_real(&perm, c(1.0, 0.0), VenezianoForm::Zeta).unwrap(), z);
            }
        }
        let pole = MandelstamTriple::new(c(-1.0, 0.0), c(0.5, 0.0));
        assert!(matches!(veneziano_real(&pole, c(1.0, 0.0), VenezianoForm::Gamma), Err(Error::PoleArgument(_))));
    }

    #[test]
    fn euler_product_at_two() {
        let m = MandelstamTriple::new(c(2.0, 0.0), c(-0.5, 0.0));
        let report = adelic_product_check(&m, 100_000).unwrap();
        assert!(report.monotone);
        assert!(report.converged);
        let last = report.rows.last().unwrap();
        assert_eq!(last.p_max, 100_000);
        assert!(last.rel_error <= 1e-3);
        let expected_target = c(std::f64::consts::PI.powi(2) / 6.0 * -12.0, 0.0);
        assert!(close(last.target, expected_target, 1e-13));
        let labels: Vec<u64> = report.rows.iter().map(|r| r.p_max).collect();
        assert_eq!(labels, vec![10, 100, 1000, 10_000, 100_000]);
        assert!(report.rows.windows(2).all(|w| w[1].rel_error < w[0].rel_error));
        assert!(report.identity_error < 1e-8);

        let tiny = adelic_product_check(&m, 2).unwrap();
        assert_eq!(tiny.rows.len(), 1);
        assert_eq!(tiny.rows[0].p_max, 2);
        assert!(!tiny.converged);

        let strip = MandelstamTriple::new(c(0.5, 0.0), c(0.2, 0.0));
        assert!(matches!(adelic_product_check(&strip, 100), Err(Error::OutOfConvergenceRegion(_))));
    }

    #[test]
    fn regularized_identity_at_third() {
        let m = MandelstamTriple::new(c(1.0 / 3.0, 0.0), c(1.0 / 3.0, 0.0));
        assert!((regularized_identity(&m).unwrap() - 1.0).norm() < 1e-8);
    }

    proptest! {
        #[test]
        fn local_gamma_reflection(re in -5.0f64..5.0, im in -5.0f64..5.0, pr in prop_oneof![Just(2u64), Just(3), Just(5), Just(7), Just(11)]) {
            let a = c(re, im);
            let left = gamma_p(p(pr), a);
            let right = gamma_p(p(pr), 1.0 - a);
            if let (Ok(l), Ok(r)) = (left, right) {
                prop_assert!((l * r - 1.0).norm() < 1e-12 * (l.norm() * r.norm()).max(1.0));
            }
        }

        #[test]
        fn real_forms_agree_randomly(are in -3.0f64..3.0, aim in -1.0f64..1.0, bre in -3.0f64..3.0, bim in -1.0f64..1.0) {
            let m = MandelstamTriple::new(c(are, aim), c(bre, bim));
            prop_assume!(m.args().iter().all(|x| (x - x.re.round()).norm() > 0.05));
            let g = veneziano_real(&m, c(1.0, 0.0), VenezianoForm::Gamma).unwrap();
            let z = veneziano_real(&m, c(1.0, 0.0), VenezianoForm::Zeta).unwrap();
            prop_assert!(close(g, z, 1e-8), "{} vs {}", g, z);
        }
    }
}
