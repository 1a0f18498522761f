use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{checked_pow, chunked_sum, to_usize};
use crate::arith::{cis_fraction, lattice_modulus, lattice_residue, mul_mod, rational_to_f64, Prime};
use crate::characters::{chi_inf_rational, chi_p, lambda_inf, lambda_p, EighthRoot, Place, UnitPhase};
use crate::error::{Error, Result};
use crate::padic::PAdicRational;

/// `λ · sqrt(modulus_sq) · phase`, with every factor exact.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussValue {
    pub lambda: EighthRoot,
    pub modulus_sq: BigRational,
    pub phase: UnitPhase,
}

impl GaussValue {
    pub fn modulus(&self) -> f64 {
        rational_to_f64(&self.modulus_sq).sqrt()
    }

    pub fn to_complex(&self) -> Complex64 {
        self.lambda.to_complex() * self.phase.to_complex() * self.modulus()
    }
}

/// `∫ χ_v(αx² + βx) dx = λ_v(α)·|2α|_v^(-1/2)·χ_v(-β²/(4α))`.
pub fn gauss_integral(v: Place, alpha: &BigRational, beta: &BigRational) -> Result<GaussValue> {
    if alpha.is_zero() {
        return Err(Error::ZeroQuadraticCoefficient);
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let shift = -(beta * beta) / (alpha * BigRational::from_integer(BigInt::from(4)));
    match v {
        Place::Finite(p) => {
            let a = PAdicRational::new(p, alpha.clone());
            let two_a = PAdicRational::new(p, alpha * &two);
            Ok(GaussValue {
                lambda: lambda_p(&a)?,
                modulus_sq: two_a.norm().recip(),
                phase: chi_p(&PAdicRational::new(p, shift)),
            })
        }
        Place::Infinity => Ok(GaussValue {
            lambda: lambda_inf(alpha.is_positive()),
            modulus_sq: (alpha.abs() * two).recip(),
            phase: chi_inf_rational(&shift),
        }),
    }
}

fn ceil_half(a: i64) -> i64 {
    -(-a).div_euclid(2)
}

fn val(q: &BigRational, p: Prime) -> Option<i64> {
    crate::arith::rational_valuation(q, p)
}

/// Regularized oracle `∫_{|x|_p ≤ p^R} χ_p(αx² + βx) dx`, summed over
/// cosets of `p^L·Z_p` with exact lattice phases.
pub fn gauss_ball_sum(p: Prime, alpha: &BigRational, beta: &BigRational, radius: i64, level: i64) -> Result<Complex64> {
    if radius + level < 0 {
        return Err(Error::InvalidArgument("need R + L >= 0".into()));
    }
    let side = checked_pow(p, (radius + level) as u32)?;
    let mut e = 0i64;
    if let Some(va) = val(alpha, p) {
        e = e.max(2 * radius - va);
    }
    if let Some(vb) = val(beta, p) {
        e = e.max(radius - vb);
    }
    let modulus = lattice_modulus(p, e as u32)?;
    let a = lattice_residue(alpha, p, e - 2 * radius, e as u32)?;
    let b = lattice_residue(beta, p, e - radius, e as u32)?;
    let sum = chunked_sum(to_usize(side), |c| {
        let c = c as u128 % modulus;
        let c2 = mul_mod(c, c, modulus);
        let num = (mul_mod(a, c2, modulus) + mul_mod(b, c, modulus)) % modulus;
        cis_fraction(num, modulus)
    });
    Ok(sum * rational_to_f64(&p.pow_rational(-level)))
}

/// Radius and level past which the ball sum equals the Gauss integral.
pub(crate) fn gauss_window(p: Prime, alpha: &BigRational, beta: &BigRational) -> Result<(i64, i64)> {
    let va = val(alpha, p).ok_or(Error::ZeroQuadraticCoefficient)?;
    let v2 = if p.is_odd() { 0 } else { 1 };
    let mut radius = 0i64;
    if let Some(vb) = val(beta, p) {
        radius = radius.max(-(vb - v2 - va));
    }
    radius = radius.max(ceil_half(va + 2 * v2) + 1);
    let mut level = (radius - va - v2).max(ceil_half(-va)).max(-radius);
    if let Some(vb) = val(beta, p) {
        level = level.max(-vb);
    }
    Ok((radius, level))
}

/// The ball sum on the automatically chosen window, with that radius.
pub fn gauss_regularized(p: Prime, alpha: &BigRational, beta: &BigRational) -> Result<(Complex64, i64)> {
    let (radius, level) = gauss_window(p, alpha, beta)?;
    Ok((gauss_ball_sum(p, alpha, beta, radius, level)?, radius))
}

const DAMPING_STEPS: usize = 8;
const MAX_NODES: f64 = 6.0e7;

/// `∫ χ_∞(αx² + βx)·exp(-εx²) dx` by composite Simpson on `[-X, X]`.
fn damped_fresnel(alpha: f64, beta: f64, eps: f64) -> Result<Complex64> {
    let half_width = (46.0 / eps).sqrt();
    let max_freq = 2.0 * alpha.abs() * half_width + beta.abs();
    let h_target = 0.05 / (std::f64::consts::TAU * max_freq);
    let raw = (2.0 * half_width / h_target).ceil();
    if raw > MAX_NODES {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs {raw:e} nodes; coefficients too large"
        )));
    }
    let n = (raw as usize).max(2).next_multiple_of(2);
    let h = 2.0 * half_width / n as f64;
    let f = |i: usize| {
        let x = -half_width + h * i as f64;
        let phase = -std::f64::consts::TAU * (alpha * x * x + beta * x);
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        Complex64::from_polar(w * (-eps * x * x).exp(), phase)
    };
    Ok(chunked_sum(n + 1, f) * (h / 3.0))
}

/// Real Gauss integral as the `ε → 0` limit of Gaussian-damped quadratures,
/// extrapolated by Neville's scheme over `ε = |α|·2^(-k)`.
pub fn real_gauss_quadrature(alpha: f64, beta: f64) -> Result<Complex64> {
    if alpha == 0.0 {
        return Err(Error::ZeroQuadraticCoefficient);
    }
    let mut xs = Vec::with_capacity(DAMPING_STEPS);
    let mut ys = Vec::with_capacity(DAMPING_STEPS);
    for k in 1..=DAMPING_STEPS {
        let eps = alpha.abs() * 0.5f64.powi(k as i32);
        xs.push(eps);
        ys.push(damped_fresnel(alpha, beta, eps)?);
    }
    // Neville tableau evaluated at ε = 0
    let n = xs.len();
    let mut t = ys.clone();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            t[i] = (t[i + 1] * xi - t[i] * xj) / (xi - xj);
        }
    }
    Ok(t[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn closed_form_examples() {
        let g = gauss_integral(Place::Finite(p(5)), &q(1, 1), &q(0, 1)).unwrap();
        assert!(close(g.to_complex(), Complex64::new(1.0, 0.0), 1e-15));
        let g = gauss_integral(Place::Finite(p(2)), &q(1, 1), &q(0, 1)).unwrap();
        assert!(close(g.to_complex(), Complex64::new(1.0, 1.0), 1e-15));
        let g = gauss_integral(Place::Infinity, &q(1, 1), &q(0, 1)).unwrap();
        assert!(close(g.to_complex(), Complex64::new(0.5, -0.5), 1e-15));
        assert_eq!(
            gauss_integral(Place::Infinity, &q(0, 1), &q(1, 1)),
            Err(Error::ZeroQuadraticCoefficient)
        );
    }

    #[test]
    fn oracle_examples() {
        let (v, _) = gauss_regularized(p(5), &q(1, 1), &q(0, 1)).unwrap();
        assert!(close(v, Complex64::new(1.0, 0.0), 1e-12));
        let (v, _) = gauss_regularized(p(2), &q(1, 1), &q(0, 1)).unwrap();
        assert!(close(v, Complex64::new(1.0, 1.0), 1e-12));
        let r = real_gauss_quadrature(1.0, 0.0).unwrap();
        assert!(close(r, Complex64::new(0.5, -0.5), 1e-6), "{r}");
    }

    /// `λ_p(a) = |2a|^(1/2) · ∫ χ_p(a x²) dx`, read off the ball-sum oracle.
    fn lambda_from_oracle(pr: Prime, a: &BigRational) -> Complex64 {
        let (v, _) = gauss_regularized(pr, a, &q(0, 1)).unwrap();
        let two_a = PAdicRational::new(pr, a * BigInt::from(2));
        v * rational_to_f64(&two_a.norm()).sqrt()
    }

    #[test]
    fn lambda_matches_gauss_sums() {
        assert!(close(lambda_from_oracle(p(5), &q(10, 1)), Complex64::new(-1.0, 0.0), 1e-12));
        assert!(close(lambda_from_oracle(p(3), &q(3, 1)), Complex64::new(0.0, 1.0), 1e-12));
        for pr in [2u64, 3, 5, 7, 11, 13] {
            let pr = p(pr);
            for num in [1i64, -1, 2, 3, 5, 6, 7, -7, 10, 12, 15, 20, 21, 24, 28, 44, -44, 50] {
                for den in [1i64, 2, 3, 4, 5, 9, 8] {
                    let a = q(num, den);
                    let closed = lambda_p(&PAdicRational::new(pr, a.clone())).unwrap().to_complex();
                    let oracle = lambda_from_oracle(pr, &a);
                    assert!(close(closed, oracle, 1e-9), "p={pr} a={a}: {closed} vs {oracle}");
                }
            }
        }
    }

    #[test]
    fn real_quadrature_matches_closed_form() {
        for (a, b) in [(1.0, 0.0), (-1.0, 0.0), (0.5, 0.3), (-2.0, 1.0), (1.5, -0.7)] {
            let closed = gauss_integral(
                Place::Infinity,
                &crate::arith::f64_to_rational(a).unwrap(),
                &crate::arith::f64_to_rational(b).unwrap(),
            )
            .unwrap()
            .to_complex();
            let numeric = real_gauss_quadrature(a, b).unwrap();
            assert!(close(closed, numeric, 1e-6), "a={a} b={b}: {closed} vs {numeric}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn ball_sums_stabilize_to_closed_form(
            idx in 0usize..4,
            an in 1i64..40, ad in 1i64..40, av in -2i64..3, aneg in any::<bool>(),
            bn in -40i64..40, bd in 1i64..40, bv in -2i64..3,
        ) {
            let pr = p([2u64, 3, 5, 7][idx]);
            let alpha = q(if aneg { -an } else { an }, ad) * pr.pow_rational(av);
            let beta = q(bn, bd) * pr.pow_rational(bv);
            let (radius, level) = gauss_window(pr, &alpha, &beta).unwrap();
            prop_assume!(checked_pow(pr, (radius + level + 2) as u32).is_ok());
            let closed = gauss_integral(Place::Finite(pr), &alpha, &beta).unwrap().to_complex();
            let at_r = gauss_ball_sum(pr, &alpha, &beta, radius, level).unwrap();
            let at_r1 = gauss_ball_sum(pr, &alpha, &beta, radius + 1, level + 1).unwrap();
            prop_assert!(close(at_r, closed, 1e-9), "p={} a={} b={}: {} vs {}", pr, alpha, beta, at_r, closed);
            prop_assert!(close(at_r1, closed, 1e-9));
        }
    }
}
