//! Additive and multiplicative characters on Q_p and ℝ, the Legendre symbol
//! and the Gauss-integral multiplier λ_v.
//!
//! Every λ_v value is an eighth root of unity, so it is carried exactly as an
//! [`EighthRoot`]. For p = 2 and odd valuation the sign `(-1)^(x_1 + x_2)`
//! reads the digits of the unit part `x_0 + x_1·2 + x_2·4 + …` of the
//! argument; the Gauss ball-sum tests in `integrate` confirm that reading.

use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{cis_fraction, rational_to_f64, residue_mod_pk, Prime};
use crate::error::{Error, Result};
use crate::padic::{PAdicRational, Valuation};

/// `exp(2πi·q)` stored exactly as `q mod 1` in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnitPhase(BigRational);

impl UnitPhase {
    pub fn new(q: BigRational) -> Self {
        let f = &q - q.floor();
        UnitPhase(f)
    }

    pub fn from_fraction(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(UnitPhase::new(BigRational::new(num.into(), den.into())))
    }

    pub fn zero() -> Self {
        UnitPhase(BigRational::zero())
    }

    /// The representative in `[0, 1)`.
    pub fn fraction(&self) -> &BigRational {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        let (n, d) = (self.0.numer(), self.0.denom());
        match (n.to_u128(), d.to_u128()) {
            (Some(n), Some(d)) if d < (1u128 << 100) => cis_fraction(n, d),
            _ => {
                let mut t = rational_to_f64(&self.0);
                if t > 0.5 {
                    t -= 1.0;
                }
                Complex64::from_polar(1.0, std::f64::consts::TAU * t)
            }
        }
    }

    pub fn pow(&self, k: &BigInt) -> Self {
        UnitPhase::new(&self.0 * BigRational::from_integer(k.clone()))
    }
}

impl Mul for &UnitPhase {
    type Output = UnitPhase;
    fn mul(self, rhs: &UnitPhase) -> UnitPhase {
        UnitPhase::new(&self.0 + &rhs.0)
    }
}

impl Mul for UnitPhase {
    type Output = UnitPhase;
    fn mul(self, rhs: UnitPhase) -> UnitPhase {
        &self * &rhs
    }
}

impl UnitPhase {
    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        UnitPhase::new(-&self.0)
    }
}

impl fmt::Display for UnitPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e^(2πi·{})", self.0)
    }
}

/// `exp(2πi·k/8)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EighthRoot(u8);

impl EighthRoot {
    pub const ONE: EighthRoot = EighthRoot(0);
    pub const I: EighthRoot = EighthRoot(2);
    pub const MINUS_ONE: EighthRoot = EighthRoot(4);
    pub const MINUS_I: EighthRoot = EighthRoot(6);

    pub fn new(k: i64) -> Self {
        EighthRoot(k.rem_euclid(8) as u8)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Self {
        EighthRoot::new(-(self.0 as i64))
    }

    pub fn as_phase(self) -> UnitPhase {
        UnitPhase(BigRational::new(BigInt::from(self.0), BigInt::from(8)))
    }

    pub fn to_complex(self) -> Complex64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(h, h),
            2 => Complex64::new(0.0, 1.0),
            3 => Complex64::new(-h, h),
            4 => Complex64::new(-1.0, 0.0),
            5 => Complex64::new(-h, -h),
            6 => Complex64::new(0.0, -1.0),
            _ => Complex64::new(h, -h),
        }
    }
}

impl Mul for EighthRoot {
    type Output = EighthRoot;
    fn mul(self, rhs: EighthRoot) -> EighthRoot {
        EighthRoot::new(self.0 as i64 + rhs.0 as i64)
    }
}

impl Neg for EighthRoot {
    type Output = EighthRoot;
    fn neg(self) -> EighthRoot {
        self * EighthRoot::MINUS_ONE
    }
}

/// A completion of Q: the real place or a finite prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Infinity,
    Finite(Prime),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "oo" | "∞" => Ok(Place::Infinity),
            other => {
                let n: u64 = other.parse().map_err(|_| Error::Parse(format!("bad place {other:?}")))?;
                Ok(Place::Finite(Prime::new(n)?))
            }
        }
    }
}

/// Argument of a place-dependent function.
#[derive(Debug, Clone, PartialEq)]
pub enum PlaceArg {
    PAdic(PAdicRational),
    Rational(BigRational),
    Real(f64),
}

/// Value of [`chi`]: exact where the argument is rational.
#[derive(Debug, Clone, PartialEq)]
pub enum CharValue {
    Phase(UnitPhase),
    Complex(Complex64),
}

impl CharValue {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            CharValue::Phase(u) => u.to_complex(),
            CharValue::Complex(z) => *z,
        }
    }
}

fn finite_arg(p: Prime, x: &PlaceArg) -> Result<PAdicRational> {
    match x {
        PlaceArg::PAdic(a) if a.prime() == p => Ok(a.clone()),
        PlaceArg::PAdic(a) => Err(Error::PlaceMismatch(format!(
            "Q_{} value at place {p}",
            a.prime()
        ))),
        PlaceArg::Rational(q) => Ok(PAdicRational::new(p, q.clone())),
        PlaceArg::Real(_) => Err(Error::PlaceMismatch(format!("real number at place {p}"))),
    }
}

/// `χ_p(x) = exp(2πi{x}_p)`.
pub fn chi_p(x: &PAdicRational) -> UnitPhase {
    UnitPhase(x.frac_part())
}

/// `χ_∞(x) = exp(-2πix)` for rational `x`, exactly.
pub fn chi_inf_rational(x: &BigRational) -> UnitPhase {
    UnitPhase::new(-x)
}

/// `χ_∞(x) = exp(-2πix)` for a floating-point `x`.
pub fn chi_inf(x: f64) -> Complex64 {
    let t = x - x.round();
    Complex64::from_polar(1.0, -std::f64::consts::TAU * t)
}

/// The additive character at place `v`.
pub fn chi(v: Place, x: &PlaceArg) -> Result<CharValue> {
    match v {
        Place::Finite(p) => Ok(CharValue::Phase(chi_p(&finite_arg(p, x)?))),
        Place::Infinity => match x {
            PlaceArg::PAdic(a) => Err(Error::PlaceMismatch(format!(
                "Q_{} value at the real place",
                a.prime()
            ))),
            PlaceArg::Rational(q) => Ok(CharValue::Phase(chi_inf_rational(q))),
            PlaceArg::Real(r) => Ok(CharValue::Complex(chi_inf(*r))),
        },
    }
}

/// `π_s(x) = |x|_p^s`; exact for non-negative integer `s`.
pub fn pi_s(p: Prime, x: &PAdicRational, s: Complex64) -> Result<Complex64> {
    if x.prime() != p {
        return Err(Error::PrimeMismatch { left: p.get(), right: x.prime().get() });
    }
    let v = match x.valuation() {
        Valuation::Infinity => return Err(Error::ZeroArgument),
        Valuation::Finite(v) => v,
    };
    if s.im == 0.0 && s.re >= 0.0 && s.re.fract() == 0.0 && s.re <= u32::MAX as f64 {
        let n = s.re as u32;
        let norm = x.norm();
        let value = BigRational::new(num_traits::pow(norm.numer().clone(), n as usize), num_traits::pow(norm.denom().clone(), n as usize));
        return Ok(Complex64::new(rational_to_f64(&value), 0.0));
    }
    let ln_norm = -(v as f64) * (p.get() as f64).ln();
    Ok((s * ln_norm).exp())
}

/// `Ω(|x|_p)`: 1 on Z_p, 0 elsewhere.
pub fn omega(x: &PAdicRational) -> u8 {
    u8::from(x.is_integral())
}

/// Legendre symbol `(a/p)` by Euler's criterion.
pub fn legendre(a: &BigInt, p: Prime) -> Result<i8> {
    if !p.is_odd() {
        return Err(Error::EvenPrime);
    }
    let pb = p.big();
    let r = a.mod_floor(&pb);
    if r.is_zero() {
        return Ok(0);
    }
    let e = r.modpow(&((&pb - 1u32) / 2u32), &pb);
    Ok(if e.is_one() { 1 } else { -1 })
}

/// `λ_v(x)` for `x != 0`.
pub fn lambda(v: Place, x: &PlaceArg) -> Result<EighthRoot> {
    match v {
        Place::Finite(p) => lambda_p(&finite_arg(p, x)?),
        Place::Infinity => {
            let positive = match x {
                PlaceArg::PAdic(a) => {
                    return Err(Error::PlaceMismatch(format!(
                        "Q_{} value at the real place",
                        a.prime()
                    )))
                }
                PlaceArg::Rational(q) if q.is_zero() => return Err(Error::ZeroArgument),
                PlaceArg::Rational(q) => q.is_positive(),
                PlaceArg::Real(r) if *r == 0.0 || !r.is_finite() => {
                    return Err(Error::ZeroArgument)
                }
                PlaceArg::Real(r) => *r > 0.0,
            };
            Ok(lambda_inf(positive))
        }
    }
}

/// `λ_∞(x) = exp(-iπ/4 · sign x)`.
pub fn lambda_inf(positive: bool) -> EighthRoot {
    if positive {
        EighthRoot::new(-1)
    } else {
        EighthRoot::new(1)
    }
}

/// `λ_p(x)` for a nonzero p-adic `x`.
pub fn lambda_p(x: &PAdicRational) -> Result<EighthRoot> {
    let p = x.prime();
    let m = match x.valuation() {
        Valuation::Infinity => return Err(Error::ZeroArgument),
        Valuation::Finite(m) => m,
    };
    let unit = x.unit_part();
    let odd_m = m.rem_euclid(2) == 1;
    if p.is_odd() {
        if !odd_m {
            return Ok(EighthRoot::ONE);
        }
        let x0 = residue_mod_pk(&unit, p, 1)?;
        let sign = legendre(&x0, p)?;
        let base = if sign == 1 { EighthRoot::ONE } else { EighthRoot::MINUS_ONE };
        if p.get() % 4 == 1 {
            Ok(base)
        } else {
            Ok(base * EighthRoot::I)
        }
    } else {
        let r = residue_mod_pk(&unit, p, 3)?.to_u8().expect("residue below 8");
        let x1 = (r >> 1) & 1;
        let x2 = (r >> 2) & 1;
        let mut root = if x1 == 0 { EighthRoot::new(1) } else { EighthRoot::new(-1) };
        if odd_m && (x1 + x2) % 2 == 1 {
            root = -root;
        }
        Ok(root)
    }
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

    fn pa(pr: u64, n: i64, d: i64) -> PAdicRational {
        PAdicRational::new(p(pr), q(n, d))
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn chi_examples() {
        let c = chi(Place::Finite(p(2)), &PlaceArg::PAdic(pa(2, 1, 2))).unwrap();
        assert_eq!(c, CharValue::Phase(UnitPhase::from_fraction(1, 2).unwrap()));
        assert_eq!(c.to_complex(), Complex64::new(-1.0, 0.0));
        let c = chi(Place::Finite(p(3)), &PlaceArg::PAdic(pa(3, 5, 9))).unwrap();
        assert_eq!(c, CharValue::Phase(UnitPhase::from_fraction(5, 9).unwrap()));
        for pr in [2u64, 3, 5, 7, 101] {
            for n in -20..20 {
                let c = chi(Place::Finite(p(pr)), &PlaceArg::Rational(q(n, 1))).unwrap();
                assert_eq!(c.to_complex(), Complex64::new(1.0, 0.0));
            }
        }
        let c = chi(Place::Infinity, &PlaceArg::Rational(q(1, 4))).unwrap();
        assert_eq!(c.to_complex(), Complex64::new(0.0, -1.0));
        assert!(close(chi_inf(0.25), Complex64::new(0.0, -1.0), 1e-15));
    }

    #[test]
    fn chi_place_mismatch() {
        assert!(matches!(
            chi(Place::Finite(p(3)), &PlaceArg::PAdic(pa(5, 1, 1))),
            Err(Error::PlaceMismatch(_))
        ));
        assert!(matches!(
            chi(Place::Infinity, &PlaceArg::PAdic(pa(5, 1, 1))),
            Err(Error::PlaceMismatch(_))
        ));
        assert!(matches!(chi(Place::Finite(p(3)), &PlaceArg::Real(0.5)), Err(Error::PlaceMismatch(_))));
    }

    #[test]
    fn pi_s_examples() {
        let v = pi_s(p(3), &pa(3, 1, 9), Complex64::new(2.0, 0.0)).unwrap();
        assert_eq!(v, Complex64::new(81.0, 0.0));
        let v = pi_s(p(5), &pa(5, 7, 1), Complex64::new(0.0, 1.0)).unwrap();
        assert!(close(v, Complex64::new(1.0, 0.0), 1e-15));
        let v = pi_s(p(2), &pa(2, 8, 1), Complex64::new(0.5, 0.0)).unwrap();
        assert!(close(v, Complex64::new(2f64.powf(-1.5), 0.0), 1e-15));
        assert_eq!(pi_s(p(2), &pa(2, 0, 1), Complex64::new(1.0, 0.0)), Err(Error::ZeroArgument));
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(&pa(2, 3, 1)), 1);
        assert_eq!(omega(&pa(2, 1, 2)), 0);
        assert_eq!(omega(&pa(7, 0, 1)), 1);
    }

    #[test]
    fn legendre_examples_and_exhaustive() {
        assert_eq!(legendre(&BigInt::from(2), p(7)), Ok(1));
        assert_eq!(legendre(&BigInt::from(3), p(7)), Ok(-1));
        assert_eq!(legendre(&BigInt::from(14), p(7)), Ok(0));
        assert_eq!(legendre(&BigInt::from(3), p(2)), Err(Error::EvenPrime));
        for pr in crate::arith::primes_up_to(100).into_iter().filter(|&x| x > 2) {
            let squares: Vec<u64> = (1..pr).map(|y| y * y % pr).collect();
            for a in 0..pr {
                let expect = if a == 0 {
                    0
                } else if squares.contains(&a) {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre(&BigInt::from(a), p(pr)).unwrap(), expect, "a={a} p={pr}");
            }
        }
    }

    #[test]
    fn lambda_examples() {
        for pr in [3u64, 5, 7, 11, 13, 97] {
            assert_eq!(lambda(Place::Finite(p(pr)), &PlaceArg::Rational(q(1, 1))), Ok(EighthRoot::ONE));
        }
        assert_eq!(lambda_p(&pa(5, 10, 1)), Ok(EighthRoot::MINUS_ONE));
        assert_eq!(lambda_p(&pa(3, 3, 1)), Ok(EighthRoot::I));
        assert!(close(lambda_p(&pa(2, 1, 1)).unwrap().to_complex(), Complex64::new(1.0, 1.0) / 2f64.sqrt(), 1e-15));
        assert_eq!(lambda(Place::Infinity, &PlaceArg::Real(1.0)).unwrap(), EighthRoot::new(-1));
        assert_eq!(lambda_p(&pa(5, 0, 1)), Err(Error::ZeroArgument));
    }

    fn nonzero_rational() -> impl Strategy<Value = BigRational> {
        (1i64..5000, 1i64..5000, any::<bool>()).prop_map(|(n, d, neg)| q(if neg { -n } else { n }, d))
    }

    const PLACES: [u64; 6] = [0, 2, 3, 5, 7, 13];

    fn lam(v: u64, x: &BigRational) -> EighthRoot {
        if v == 0 {
            lambda(Place::Infinity, &PlaceArg::Rational(x.clone())).unwrap()
        } else {
            lambda_p(&PAdicRational::new(p(v), x.clone())).unwrap()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn lambda_identities(x in nonzero_rational(), y in nonzero_rational(), a in nonzero_rational(), idx in 0usize..6) {
            let v = PLACES[idx];
            let lx = lam(v, &x);
            prop_assert_eq!(lam(v, &(&a * &a * &x)), lx);
            prop_assert_eq!(lx * lam(v, &-&x), EighthRoot::ONE);
            let s = &x + &y;
            if !s.is_zero() {
                let r = x.recip() + y.recip();
                prop_assert_eq!(lx * lam(v, &y), lam(v, &s) * lam(v, &r));
                let lhs = lx.to_complex() * lam(v, &y).to_complex();
                let rhs = lam(v, &s).to_complex() * lam(v, &r).to_complex();
                prop_assert!(close(lhs, rhs, 1e-12));
            }
            prop_assert!((lx.to_complex().norm() - 1.0).abs() < 1e-15);
        }

        #[test]
        fn chi_is_additive(x in nonzero_rational(), y in nonzero_rational(), idx in 0usize..6) {
            let v = PLACES[idx];
            if v == 0 {
                prop_assert_eq!(chi_inf_rational(&(&x + &y)), &chi_inf_rational(&x) * &chi_inf_rational(&y));
            } else {
                let pr = p(v);
                let s = chi_p(&PAdicRational::new(pr, &x + &y));
                let prod = &chi_p(&PAdicRational::new(pr, x)) * &chi_p(&PAdicRational::new(pr, y));
                prop_assert_eq!(s, prod);
            }
        }

        #[test]
        fn pi_s_is_multiplicative(x in nonzero_rational(), y in nonzero_rational(), idx in 1usize..6, re in -2.0f64..2.0, im in -3.0f64..3.0) {
            let pr = p(PLACES[idx]);
            let s = Complex64::new(re, im);
            let a = PAdicRational::new(pr, x);
            let b = PAdicRational::new(pr, y);
            let lhs = pi_s(pr, &a.mul(&b).unwrap(), s).unwrap();
            let rhs = pi_s(pr, &a, s).unwrap() * pi_s(pr, &b, s).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        }

        #[test]
        fn omega_is_locally_constant(x in nonzero_rational(), z in -10_000i64..10_000, zd in 1i64..100, idx in 1usize..6) {
            let pr = p(PLACES[idx]);
            let (_, unit) = crate::arith::split_valuation(&BigInt::from(zd), pr);
            let z = BigRational::new(z.into(), unit);
            let a = PAdicRational::new(pr, x.clone());
            let b = PAdicRational::new(pr, x + z);
            prop_assert_eq!(omega(&a), omega(&b));
        }
    }
}
