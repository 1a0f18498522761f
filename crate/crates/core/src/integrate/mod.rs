//! Integration over Q_p^d with Haar measure normalized by `μ(Z_p^d) = 1`.
//!
//! [`ball_sum_integrate`] is the brute-force oracle: it sums an integrand over
//! coset representatives of `p^L·Z_p^d` inside the ball `|x| ≤ p^R`. Closed
//! forms ([`character_ball_integral`], [`gauss_integral`]) are checked
//! against it.

mod gauss;
mod step;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{rational_to_f64, Prime};
use crate::error::{Error, Result};
use crate::padic::{PAdicRational, Valuation};

pub use gauss::{
    gauss_ball_sum, gauss_integral, gauss_regularized, real_gauss_quadrature, GaussValue,
};
pub use step::StepFunction;
pub(crate) use gauss::gauss_window;

/// Largest number of cosets any brute-force sum will visit.
pub const MAX_CELLS: u64 = 1 << 24;

const CHUNK: usize = 4096;

/// The window `|x|_p ≤ p^R` summed over cosets of `p^L·Z_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallSpec {
    pub p: Prime,
    pub radius: i64,
    pub level: i64,
}

impl BallSpec {
    pub fn new(p: Prime, radius: i64, level: i64) -> Result<Self> {
        if radius + level < 0 {
            return Err(Error::InvalidArgument(format!(
                "ball radius {radius} and level {level} need R + L >= 0"
            )));
        }
        Ok(BallSpec { p, radius, level })
    }

    /// Cosets per coordinate, `p^(R+L)`.
    pub fn side(&self) -> Result<u64> {
        checked_pow(self.p, (self.radius + self.level) as u32)
    }
}

/// A complex-valued function on Q_p^d that can be sampled at rational points.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[BigRational]) -> Complex64;
}

/// Adapter turning a closure into an [`Integrand`].
pub struct FnIntegrand<F> {
    d: usize,
    f: F,
}

impl<F> FnIntegrand<F>
where
    F: Fn(&[BigRational]) -> Complex64 + Sync,
{
    pub fn new(d: usize, f: F) -> Self {
        FnIntegrand { d, f }
    }
}

impl<F> Integrand for FnIntegrand<F>
where
    F: Fn(&[BigRational]) -> Complex64 + Sync,
{
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[BigRational]) -> Complex64 {
        (self.f)(x)
    }
}

pub(crate) fn checked_pow(p: Prime, k: u32) -> Result<u64> {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc
            .checked_mul(p.get())
            .filter(|&a| a <= MAX_CELLS)
            .ok_or_else(|| Error::InvalidArgument(format!("{p}^{k} cosets exceed the cell budget")))?;
    }
    Ok(acc)
}

pub(crate) fn cell_count(side: u64, d: usize) -> Result<u64> {
    let mut total: u64 = 1;
    for _ in 0..d {
        total = total
            .checked_mul(side)
            .filter(|&t| t <= MAX_CELLS)
            .ok_or_else(|| Error::InvalidArgument(format!("{side}^{d} cosets exceed the cell budget")))?;
    }
    Ok(total)
}

/// Deterministic parallel sum: fixed chunks summed in parallel, partial sums
/// combined sequentially in index order.
pub(crate) fn chunked_sum<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let lo = k * CHUNK;
            let hi = (lo + CHUNK).min(n);
            (lo..hi).map(&f).fold(Complex64::new(0.0, 0.0), |a, b| a + b)
        })
        .collect();
    partials.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

pub(crate) fn decode_index(mut index: u64, side: u64, d: usize, out: &mut [u64]) {
    for slot in out.iter_mut().take(d).rev() {
        *slot = index % side;
        index /= side;
    }
}

/// `p^(-L·d) · Σ f(rep)` over the coset representatives `c·p^(-R)`,
/// `c ∈ [0, p^(R+L))^d`.
pub fn ball_sum_integrate(f: &dyn Integrand, ball: &BallSpec) -> Result<Complex64> {
    let d = f.dim();
    let p = ball.p;
    let side = ball.side()?;
    let total = cell_count(side, d)?;
    let scale = p.pow_rational(-ball.radius);
    let rep = |index: u64| -> Vec<BigRational> {
        let mut digits = vec![0u64; d];
        decode_index(index, side, d, &mut digits);
        digits
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)) * &scale)
            .collect()
    };
    probe_refinement(f, ball, total, &rep)?;
    let sum = chunked_sum(total as usize, |i| f.eval(&rep(i as u64)));
    let measure = rational_to_f64(&p.pow_rational(-ball.level * d as i64));
    Ok(sum * measure)
}

/// Spot check that `f` is constant on a handful of cosets.
fn probe_refinement(
    f: &dyn Integrand,
    ball: &BallSpec,
    total: u64,
    rep: &dyn Fn(u64) -> Vec<BigRational>,
) -> Result<()> {
    let shift = ball.p.pow_rational(ball.level);
    let far = &shift * BigRational::from_integer(BigInt::from(ball.p.get() - 1));
    let probes = total.min(8);
    for k in 0..probes {
        let index = k * total / probes;
        let x = rep(index);
        let base = f.eval(&x);
        for delta in [&shift, &far] {
            let y: Vec<BigRational> = x.iter().map(|xi| xi + delta).collect();
            let diff = (f.eval(&y) - base).norm();
            if diff > 1e-12 * base.norm().max(1.0) {
                return Err(Error::RefinementTooCoarse { level: ball.level, difference: diff });
            }
        }
    }
    Ok(())
}

/// `∫_{|x|_p ≤ p^R} χ_p(a·x) dx`: `p^R` when `|a|_p ≤ p^(-R)`, else 0.
pub fn character_ball_integral(p: Prime, a: &BigRational, radius: i64) -> Complex64 {
    let x = PAdicRational::new(p, a.clone());
    let inside = match x.valuation() {
        Valuation::Infinity => true,
        Valuation::Finite(v) => v >= radius,
    };
    if inside {
        Complex64::new(rational_to_f64(&p.pow_rational(radius)), 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

pub(crate) fn to_usize(x: u64) -> usize {
    x.to_usize().expect("cell index fits usize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::chi_p;

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
    fn ball_sum_examples() {
        let omega = FnIntegrand::new(1, |x: &[BigRational]| {
            let v = PAdicRational::new(p(3), x[0].clone());
            Complex64::new(f64::from(crate::characters::omega(&v)), 0.0)
        });
        let r = ball_sum_integrate(&omega, &BallSpec::new(p(3), 0, 0).unwrap()).unwrap();
        assert!(close(r, Complex64::new(1.0, 0.0), 1e-15));

        let units = FnIntegrand::new(1, |x: &[BigRational]| {
            let v = PAdicRational::new(p(3), x[0].clone());
            let on = v.valuation() == Valuation::Finite(0);
            Complex64::new(if on { 1.0 } else { 0.0 }, 0.0)
        });
        let r = ball_sum_integrate(&units, &BallSpec::new(p(3), 0, 1).unwrap()).unwrap();
        assert!(close(r, Complex64::new(2.0 / 3.0, 0.0), 1e-15));

        let ch = FnIntegrand::new(1, |x: &[BigRational]| {
            chi_p(&PAdicRational::new(p(3), &x[0] / BigInt::from(3))).to_complex()
        });
        let r = ball_sum_integrate(&ch, &BallSpec::new(p(3), 1, 1).unwrap()).unwrap();
        assert!(close(r, Complex64::new(0.0, 0.0), 1e-12));
    }

    #[test]
    fn coarse_refinement_is_reported() {
        let ch = FnIntegrand::new(1, |x: &[BigRational]| {
            chi_p(&PAdicRational::new(p(3), &x[0] / BigInt::from(9))).to_complex()
        });
        let r = ball_sum_integrate(&ch, &BallSpec::new(p(3), 1, 1).unwrap());
        assert!(matches!(r, Err(Error::RefinementTooCoarse { level: 1, .. })));
    }

    #[test]
    fn character_ball_examples() {
        assert_eq!(character_ball_integral(p(3), &q(1, 1), 0), Complex64::new(1.0, 0.0));
        assert_eq!(character_ball_integral(p(3), &q(1, 3), 1), Complex64::new(0.0, 0.0));
        assert_eq!(character_ball_integral(p(5), &q(25, 1), 2), Complex64::new(25.0, 0.0));
    }

    #[test]
    fn character_ball_matches_oracle() {
        for pr in [2u64, 3, 5, 7] {
            let pr = p(pr);
            for va in -3i64..=3 {
                let a = pr.pow_rational(va) * q(1, 1) + pr.pow_rational(va + 1);
                for radius in -2i64..=4 {
                    let level = (-va).max(-radius);
                    let ball = BallSpec::new(pr, radius, level).unwrap();
                    let a2 = a.clone();
                    let f = FnIntegrand::new(1, move |x: &[BigRational]| {
                        chi_p(&PAdicRational::new(pr, &a2 * &x[0])).to_complex()
                    });
                    let oracle = ball_sum_integrate(&f, &ball).unwrap();
                    let closed = character_ball_integral(pr, &a, radius);
                    assert!(close(oracle, closed, 1e-9), "p={pr} v={va} R={radius}: {oracle} vs {closed}");
                }
            }
        }
    }

    #[test]
    fn chunked_sum_is_independent_of_threads() {
        let f = |i: usize| Complex64::new((i as f64).sin(), (i as f64 * 0.5).cos());
        let a = chunked_sum(100_000, f);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| chunked_sum(100_000, f));
        assert_eq!(a, b);
    }
}
