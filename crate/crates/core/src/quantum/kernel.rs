use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use super::model::{ModelCoefficients, QuadraticModel};
use crate::arith::{rational_valuation, Prime};
use crate::characters::{chi_p, lambda_p, Place};
use crate::error::{Error, Result};
use crate::integrate::{BallSpec, StepFunction};
use crate::padic::PAdicRational;

const STABILITY: f64 = 1e-9;
const EIGEN_TOLERANCE: f64 = 1e-9;
const MAX_WINDOW_GROWTH: i64 = 8;

fn ceil_half(a: i64) -> i64 {
    -(-a).div_euclid(2)
}

/// `f(x)·χ_p(a·x² + b·x)` on a grid fine enough to hold the product exactly.
fn chirp(f: &StepFunction, a: &BigRational, b: &BigRational) -> Result<StepFunction> {
    let p = f.prime();
    let v2 = i64::from(p.get() == 2);
    let mut n = f.level();
    if let Some(va) = rational_valuation(a, p) {
        n = n.max(f.support_exponent() - va - v2).max(ceil_half(-va));
    }
    if let Some(vb) = rational_valuation(b, p) {
        n = n.max(-vb);
    }
    let g = f.regrid(f.support_exponent(), n)?;
    let values: Vec<Complex64> = (0..g.values().len())
        .map(|i| {
            let z = g.values()[i];
            if z.is_zero() {
                return z;
            }
            let x = &g.rep(i)[0];
            let phase = chi_p(&PAdicRational::new(p, a * x * x + b * x));
            z * phase.to_complex()
        })
        .collect();
    StepFunction::new(p, 1, g.support_exponent(), g.level(), values)
}

/// `x ↦ f(c·x)` for `c ≠ 0`.
fn dilate(f: &StepFunction, c: &BigRational) -> Result<StepFunction> {
    let p = f.prime();
    let vc = rational_valuation(c, p).ok_or(Error::DegenerateTime)?;
    StepFunction::from_fn(p, 1, f.support_exponent() + vc, f.level() - vc, |x| {
        f.eval(&[c * &x[0]])
    })
}

/// `f` cut down (or padded) to `|x|_p ≤ p^R`, on level at least `level`.
fn window(f: &StepFunction, radius: i64, level: i64) -> Result<StepFunction> {
    let n = level.max(f.level()).max(-radius);
    if f.support_exponent() <= radius {
        f.regrid(radius, n)
    } else {
        StepFunction::from_fn(f.prime(), 1, radius, n, |x| f.eval(x))
    }
}

/// `∫ K_t(x, y)·ψ(y) dy` for `|x|, |y| ≤ p^R`, with the kernel factored as
/// chirp, Fourier transform, dilation and chirp. The result keeps its natural
/// grid, cut down to the window when it reaches beyond it. Without a radius
/// nothing is cut.
fn evolve_window(
    p: Prime,
    model: &QuadraticModel,
    t: &BigRational,
    psi: &StepFunction,
    radius: Option<i64>,
) -> Result<StepFunction> {
    let reach = radius.unwrap_or_else(|| psi.support_exponent()).max(psi.support_exponent()).max(0);
    let coeffs = match model.coefficients_on(Place::Finite(p), t, reach)? {
        ModelCoefficients::Rational { coeffs, .. } => coeffs,
        ModelCoefficients::Real(_) => unreachable!("finite places give rational coefficients"),
    };
    if coeffs.b.is_zero() {
        return Err(Error::DegenerateTime);
    }
    let source = match radius {
        Some(r) if psi.support_exponent() > r => window(psi, r, psi.level())?,
        _ => psi.clone(),
    };
    let g = chirp(&source, &-&coeffs.c, &-&coeffs.e)?;
    let transformed = dilate(&g.fourier()?, &-&coeffs.b)?;
    let h = chirp(&transformed, &-&coeffs.a, &-&coeffs.d)?;
    let b = PAdicRational::new(p, coeffs.b.clone());
    let lambda = lambda_p(&PAdicRational::new(p, -&coeffs.b / BigRational::from_integer(2.into())))?;
    let modulus = crate::arith::rational_to_f64(&b.norm()).sqrt();
    let constant = chi_p(&PAdicRational::new(p, -coeffs.f.clone()));
    let factor = lambda.to_complex() * modulus * constant.to_complex();
    let out = h.scale(factor);
    match radius {
        Some(r) if out.support_exponent() > r => window(&out, r, out.level()),
        _ => Ok(out),
    }
}

/// Largest pointwise difference, visiting the cells of both grids instead of
/// padding both onto a common one.
fn max_change(a: &StepFunction, b: &StepFunction) -> f64 {
    let one_way = |f: &StepFunction, g: &StepFunction| {
        (0..f.values().len())
            .map(|i| (f.values()[i] - g.eval(&f.rep(i))).norm())
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// `(U(t)ψ)(x) = ∫ K_t(x, y)·ψ(y) dy` at a finite place.
///
/// Both `x` and `y` range over `|·|_p ≤ p^R` with `R = ball.radius`; the
/// result is sampled at least as finely as `ball.level`. The windowed result
/// is compared with the limit of repeatedly doubling the window, which for
/// compactly supported `ψ` is the uncut integral; any change above `1e-9` is
/// reported as [`Error::NotStabilized`].
pub fn kernel_apply(
    v: Place,
    model: &QuadraticModel,
    t: &BigRational,
    psi: &StepFunction,
    ball: &BallSpec,
) -> Result<StepFunction> {
    let p = match v {
        Place::Finite(p) => p,
        Place::Infinity => {
            return Err(Error::PlaceMismatch("kernel application needs a finite place".into()))
        }
    };
    if psi.prime() != p || ball.p != p {
        return Err(Error::PrimeMismatch { left: p.get(), right: psi.prime().get() });
    }
    if psi.dim() != 1 {
        return Err(Error::InvalidStepFunction(format!(
            "wave functions live on Q_p, got dimension {}",
            psi.dim()
        )));
    }
    let first = window(&evolve_window(p, model, t, psi, Some(ball.radius))?, ball.radius, ball.level)?;
    let second = evolve_window(p, model, t, psi, None)?;
    let change = max_change(&first, &second);
    if change > STABILITY {
        return Err(Error::NotStabilized { max_change: change });
    }
    Ok(first)
}

/// Result of [`eigen_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenOutcome {
    Pass,
    Fail { residual: f64 },
}

/// Checks `U(t)ψ = χ_p(E·t)·ψ` on every coset.
///
/// The integration window starts at the support of `ψ` and grows until the
/// kernel application stabilizes.
pub fn eigen_check(
    v: Place,
    model: &QuadraticModel,
    t: &BigRational,
    psi: &StepFunction,
    energy: &BigRational,
) -> Result<EigenOutcome> {
    if psi.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let p = match v {
        Place::Finite(p) => p,
        Place::Infinity => {
            return Err(Error::PlaceMismatch("eigenfunction checks need a finite place".into()))
        }
    };
    let start = psi.support_exponent();
    let mut last = Error::NotStabilized { max_change: f64::INFINITY };
    for radius in start..=start + MAX_WINDOW_GROWTH {
        let ball = BallSpec::new(p, radius, psi.level().max(-radius))?;
        match kernel_apply(v, model, t, psi, &ball) {
            Ok(evolved) => {
                let phase = chi_p(&PAdicRational::new(p, energy * t)).to_complex();
                let residual = evolved.max_abs_diff(&psi.scale(phase))?;
                return Ok(if residual <= EIGEN_TOLERANCE {
                    EigenOutcome::Pass
                } else {
                    EigenOutcome::Fail { residual }
                });
            }
            Err(e @ Error::NotStabilized { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}
