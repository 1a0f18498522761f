use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{vp_nonzero, PAdicExpansion, PAdicRational, PrecisionContext, Valuation};
use crate::arith::{residue_mod_pk, Prime};
use crate::error::{Error, Result};

/// Elementary p-adic series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Exp,
    Log1p,
    Sin,
    Cos,
}

/// An integrand for [`definite_integral`]: either a polynomial given by its
/// coefficients `f_0, f_1, …` or one of the elementary series.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerSeries {
    Polynomial(Vec<BigRational>),
    Exp,
    Sin,
    Cos,
    Log1p,
}

const MAX_TERMS: u64 = 1 << 20;
const MAX_EXTRA_PRECISION: i64 = 512;

fn floor_log(p: Prime, n: u64) -> i64 {
    let mut k = 0;
    let mut acc = p.get();
    while acc <= n {
        k += 1;
        acc = match acc.checked_mul(p.get()) {
            Some(a) => a,
            None => break,
        };
    }
    k
}

fn exp_type_min_valuation(p: Prime) -> i64 {
    if p.is_odd() {
        1
    } else {
        2
    }
}

/// Checks the convergence domain and returns `v(x)` (`None` for zero).
fn domain(kind: SeriesKind, x: &PAdicRational) -> Result<Option<i64>> {
    let p = x.prime();
    let v = match x.valuation() {
        Valuation::Infinity => return Ok(None),
        Valuation::Finite(v) => v,
    };
    let need = match kind {
        SeriesKind::Log1p => 1,
        _ => exp_type_min_valuation(p),
    };
    if v < need {
        let name = match kind {
            SeriesKind::Exp => "exp",
            SeriesKind::Log1p => "log1p",
            SeriesKind::Sin => "sin",
            SeriesKind::Cos => "cos",
        };
        return Err(Error::OutOfConvergenceDomain(format!(
            "{name} needs v_{p}(x) >= {need}, got {v}"
        )));
    }
    Ok(Some(v))
}

/// Partial sum congruent to the series value modulo `p^t`.
///
/// Every term is p-integral inside the domain, and the per-kind bound is a
/// nondecreasing lower estimate for the valuation of all later terms.
fn series_abs(kind: SeriesKind, x: &BigRational, v: i64, p: Prime, t: i64) -> Result<BigRational> {
    let pm1 = p.get() as i64 - 1;
    let fact_bound = |n: u64| -> i64 {
        let n = n as i64;
        n * v - (n - 1).max(0) / pm1
    };
    let mut sum = BigRational::zero();
    match kind {
        SeriesKind::Exp | SeriesKind::Sin | SeriesKind::Cos => {
            // term_n = x^n / n!
            let mut term = BigRational::one();
            let mut n = 0u64;
            loop {
                if n > 0 && fact_bound(n) >= t {
                    break;
                }
                let contrib = match kind {
                    SeriesKind::Exp => Some(term.clone()),
                    SeriesKind::Sin if n % 2 == 1 => {
                        Some(if (n / 2) % 2 == 0 { term.clone() } else { -term.clone() })
                    }
                    SeriesKind::Cos if n % 2 == 0 => {
                        Some(if (n / 2) % 2 == 0 { term.clone() } else { -term.clone() })
                    }
                    _ => None,
                };
                if let Some(c) = contrib {
                    sum += c;
                }
                n += 1;
                if n > MAX_TERMS {
                    return Err(Error::PrecisionExhausted { digits: t as u32 });
                }
                term = term * x / BigRational::from_integer(BigInt::from(n));
            }
        }
        SeriesKind::Log1p => {
            let mut power = x.clone();
            let mut n = 1u64;
            while n as i64 * v - floor_log(p, n) < t {
                let c = &power / BigRational::from_integer(BigInt::from(n));
                if n % 2 == 1 {
                    sum += c;
                } else {
                    sum -= c;
                }
                n += 1;
                if n > MAX_TERMS {
                    return Err(Error::PrecisionExhausted { digits: t as u32 });
                }
                power *= x;
            }
        }
    }
    Ok(sum)
}

/// Raises the absolute precision `t` until the computed value carries
/// `N` significant digits past its leading exponent.
fn stabilize<F>(p: Prime, ctx: PrecisionContext, first_t: i64, compute: F) -> Result<PAdicExpansion>
where
    F: Fn(i64) -> Result<BigRational>,
{
    let n = ctx.digits() as i64;
    let mut t = first_t.max(n);
    let cap = t + MAX_EXTRA_PRECISION + 4 * n;
    loop {
        let s = compute(t)?;
        let next = if s.is_zero() {
            t + n
        } else {
            let w = vp_nonzero(&s, p);
            if w < t && w + n <= t {
                return Ok(PAdicExpansion::from_rational(&PAdicRational::new(p, s), ctx));
            }
            if w < t {
                w + n
            } else {
                t + n
            }
        };
        if next > cap {
            return Err(Error::PrecisionExhausted { digits: ctx.digits() });
        }
        t = next;
    }
}

/// `exp`, `log(1+x)`, `sin` or `cos` of a p-adic number, to `N` digits.
pub fn series_eval(kind: SeriesKind, x: &PAdicRational, ctx: PrecisionContext) -> Result<PAdicExpansion> {
    let p = x.prime();
    let Some(v) = domain(kind, x)? else {
        return Ok(match kind {
            SeriesKind::Exp | SeriesKind::Cos => PAdicRational::one(p).expansion(ctx),
            SeriesKind::Sin | SeriesKind::Log1p => PAdicExpansion::zero(p),
        });
    };
    let lead = match kind {
        SeriesKind::Exp | SeriesKind::Cos => 0,
        SeriesKind::Sin | SeriesKind::Log1p => v,
    };
    stabilize(p, ctx, lead + ctx.digits() as i64, |t| series_abs(kind, x.value(), v, p, t))
}

/// `∫_a^b f(x) dx` as the difference of the termwise antiderivative at the
/// end points.
pub fn definite_integral(
    f: &PowerSeries,
    a: &PAdicRational,
    b: &PAdicRational,
    ctx: PrecisionContext,
) -> Result<PAdicExpansion> {
    let p = a.prime();
    if b.prime() != p {
        return Err(Error::PrimeMismatch { left: p.get(), right: b.prime().get() });
    }
    let kind = match f {
        PowerSeries::Polynomial(coeffs) => {
            let mut total = BigRational::zero();
            let mut pa = a.value().clone();
            let mut pb = b.value().clone();
            for (n, c) in coeffs.iter().enumerate() {
                let k = BigRational::from_integer(BigInt::from(n + 1));
                total += c / k * (&pb - &pa);
                pa *= a.value();
                pb *= b.value();
            }
            return Ok(PAdicRational::new(p, total).expansion(ctx));
        }
        PowerSeries::Exp => SeriesKind::Exp,
        PowerSeries::Sin => SeriesKind::Cos,
        PowerSeries::Cos => SeriesKind::Sin,
        PowerSeries::Log1p => SeriesKind::Log1p,
    };
    let va = domain(kind, a)?;
    let vb = domain(kind, b)?;
    // F(x) = exp(x), -cos(x), sin(x), or (1+x)·log(1+x) - x
    let antiderivative = |x: &BigRational, v: Option<i64>, t: i64| -> Result<BigRational> {
        let Some(v) = v else {
            return Ok(match kind {
                SeriesKind::Exp => BigRational::one(),
                SeriesKind::Cos => -BigRational::one(),
                _ => BigRational::zero(),
            });
        };
        let s = series_abs(kind, x, v, p, t)?;
        Ok(match kind {
            SeriesKind::Exp | SeriesKind::Sin => s,
            SeriesKind::Cos => -s,
            SeriesKind::Log1p => (BigRational::one() + x) * s - x,
        })
    };
    let lead = va.unwrap_or(i64::MAX).min(vb.unwrap_or(i64::MAX)).min(0);
    stabilize(p, ctx, lead + ctx.digits() as i64, |t| {
        Ok(antiderivative(b.value(), vb, t)? - antiderivative(a.value(), va, t)?)
    })
}

/// `Σ_{n≥0} P(n)·n!·x^n` for integer polynomial coefficients and `|x|_p ≤ 1`.
pub fn factorial_series_sum(
    poly: &[BigInt],
    x: &PAdicRational,
    ctx: PrecisionContext,
) -> Result<PAdicExpansion> {
    let p = x.prime();
    if !x.is_integral() {
        return Err(Error::OutOfConvergenceDomain(format!(
            "factorial series needs |x|_{p} <= 1"
        )));
    }
    if poly.iter().all(Zero::is_zero) {
        return Ok(PAdicExpansion::zero(p));
    }
    let vx = x.valuation().finite().unwrap_or(i64::MAX / 4);
    stabilize(p, ctx, ctx.digits() as i64, |t| {
        let tu = u32::try_from(t).map_err(|_| Error::PrecisionExhausted { digits: ctx.digits() })?;
        let modulus = p.pow(tu);
        let xr = residue_mod_pk(x.value(), p, tu)?;
        let mut term = BigInt::one(); // n!·x^n mod p^t
        let mut sum = BigInt::zero();
        let mut v_fact = 0i64;
        let mut n = 0u64;
        loop {
            let bound = v_fact.saturating_add(vx.saturating_mul(n as i64));
            if bound >= t || term.is_zero() {
                break;
            }
            let nb = BigInt::from(n);
            let mut pn = BigInt::zero();
            for c in poly.iter().rev() {
                pn = pn * &nb + c;
            }
            sum = (sum + pn * &term).mod_floor(&modulus);
            n += 1;
            if n > MAX_TERMS {
                return Err(Error::PrecisionExhausted { digits: ctx.digits() });
            }
            term = (term * BigInt::from(n) * &xr).mod_floor(&modulus);
            let (k, _) = crate::arith::split_valuation(&BigInt::from(n), p);
            v_fact += k;
        }
        Ok(BigRational::from_integer(sum))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn ctx(n: u32) -> PrecisionContext {
        PrecisionContext::new(n).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn exp_of_five() {
        let x = PAdicRational::from_integer(p(5), 5);
        let e = series_eval(SeriesKind::Exp, &x, ctx(3)).unwrap();
        assert_eq!(e.m, 0);
        assert_eq!(e.digits(), &[1, 1, 3]);
        // independent oracle: 1 + 5 + 25/2 reduced mod 125
        let inv2 = crate::arith::mod_inverse(&BigInt::from(2), &BigInt::from(125)).unwrap();
        let oracle = (BigInt::from(6) + BigInt::from(25) * inv2).mod_floor(&BigInt::from(125));
        assert_eq!(oracle, BigInt::from(81));
        assert!(e.agrees_mod(&q(81, 1), 3));
    }

    #[test]
    fn trivial_arguments() {
        let e = series_eval(SeriesKind::Exp, &PAdicRational::zero(p(5)), ctx(4)).unwrap();
        assert_eq!(e.to_rational(), q(1, 1));
        let s = series_eval(SeriesKind::Sin, &PAdicRational::zero(p(7)), ctx(4)).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn domain_errors() {
        let x = PAdicRational::from_integer(p(5), 1);
        assert!(matches!(series_eval(SeriesKind::Exp, &x, ctx(4)), Err(Error::OutOfConvergenceDomain(_))));
        let x = PAdicRational::from_integer(p(2), 2);
        assert!(matches!(series_eval(SeriesKind::Cos, &x, ctx(4)), Err(Error::OutOfConvergenceDomain(_))));
        assert!(series_eval(SeriesKind::Log1p, &x, ctx(4)).is_ok());
        assert!(series_eval(SeriesKind::Exp, &PAdicRational::from_integer(p(2), 4), ctx(4)).is_ok());
    }

    #[test]
    fn sin_cos_pythagoras() {
        let pr = p(3);
        let x = PAdicRational::from_parts(pr, 3, 7).unwrap();
        let s = series_eval(SeriesKind::Sin, &x, ctx(12)).unwrap().to_rational();
        let c = series_eval(SeriesKind::Cos, &x, ctx(12)).unwrap().to_rational();
        let one = PAdicExpansion::from_rational(&PAdicRational::one(pr), ctx(12));
        assert!(one.agrees_mod(&(&s * &s + &c * &c), 12));
    }

    #[test]
    fn integral_examples() {
        let poly = PowerSeries::Polynomial(vec![q(0, 1), q(1, 1)]);
        let r = definite_integral(&poly, &PAdicRational::zero(p(3)), &PAdicRational::one(p(3)), ctx(8)).unwrap();
        assert!(r.agrees_with(&q(1, 2)));

        let poly = PowerSeries::Polynomial(vec![q(1, 1)]);
        let a = PAdicRational::from_integer(p(7), 2);
        let b = PAdicRational::from_integer(p(7), 5);
        let r = definite_integral(&poly, &a, &b, ctx(8)).unwrap();
        assert_eq!(r.to_rational(), q(3, 1));

        let a = PAdicRational::zero(p(5));
        let b = PAdicRational::from_integer(p(5), 5);
        let r = definite_integral(&PowerSeries::Exp, &a, &b, ctx(3)).unwrap();
        assert!(r.agrees_mod(&q(80, 1), 3));
        let e = series_eval(SeriesKind::Exp, &b, ctx(3)).unwrap();
        assert!(r.agrees_mod(&(e.to_rational() - q(1, 1)), 3));
    }

    #[test]
    fn integral_of_log_matches_termwise_sum() {
        let pr = p(3);
        let a = PAdicRational::from_integer(pr, 3);
        let b = PAdicRational::from_integer(pr, 9);
        let r = definite_integral(&PowerSeries::Log1p, &a, &b, ctx(6)).unwrap();
        // Σ_{n≥1} (-1)^{n+1} (b^{n+1} - a^{n+1}) / (n(n+1))
        let mut direct = BigRational::zero();
        for n in 1..200i64 {
            let num = BigInt::from(9).pow((n + 1) as u32) - BigInt::from(3).pow((n + 1) as u32);
            let t = BigRational::new(num, BigInt::from(n * (n + 1)));
            if n % 2 == 1 {
                direct += t;
            } else {
                direct -= t;
            }
        }
        assert!(r.agrees_with(&direct));
    }

    #[test]
    fn telescoping_factorial_series() {
        for (pr, n) in [(5u64, 4u32), (2, 6), (3, 10), (7, 5)] {
            let x = PAdicRational::one(p(pr));
            let r = factorial_series_sum(&[BigInt::zero(), BigInt::one()], &x, ctx(n)).unwrap();
            assert!(r.agrees_mod(&q(-1, 1), n as i64), "p={pr}");
        }
        let r = factorial_series_sum(&[BigInt::zero()], &PAdicRational::from_integer(p(5), 3), ctx(4)).unwrap();
        assert!(r.is_zero());
        assert!(matches!(
            factorial_series_sum(&[BigInt::one()], &PAdicRational::from_parts(p(5), 1, 5).unwrap(), ctx(4)),
            Err(Error::OutOfConvergenceDomain(_))
        ));
    }

    proptest! {
        #[test]
        fn log_inverts_exp(n in -10_000i64..10_000, d in 1i64..10_000, idx in 0usize..5, digits in 1u32..14) {
            let pr = p([2u64, 3, 5, 7, 11][idx]);
            let need = exp_type_min_valuation(pr);
            let x = PAdicRational::new(pr, q(n, d) * pr.pow_rational(need));
            prop_assume!(x.valuation() >= Valuation::Finite(need));
            let c = ctx(digits);
            let e = series_eval(SeriesKind::Exp, &x, c).unwrap();
            let y = PAdicRational::new(pr, e.to_rational() - q(1, 1));
            let l = series_eval(SeriesKind::Log1p, &y, c).unwrap();
            prop_assert!(l.agrees_mod(x.value(), digits as i64));
        }
    }
}
