//! Exact p-adic numbers backed by rationals.
//!
//! A [`PAdicRational`] is an element of Q ⊂ Q_p tagged with its prime. Norms,
//! valuations and fractional parts are computed exactly; the digit expansion
//! ([`PAdicExpansion`]) is a derived view truncated to a [`PrecisionContext`].
//! Series (exp, log, sin, cos, factorial series) and antiderivative integrals
//! are the only operations that truncate.

mod expansion;
mod series;
mod sqrt;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{rational_valuation, residue_mod_pk, Prime};
use crate::error::{Error, Result};

pub use expansion::PAdicExpansion;
pub use series::{
    definite_integral, factorial_series_sum, series_eval, PowerSeries, SeriesKind,
};
pub use sqrt::{hensel_sqrt, SquareRoot};

/// Default number of retained digits.
pub const DEFAULT_PRECISION: u32 = 16;

/// Number of digits kept by truncating operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionContext {
    digits: u32,
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        if digits == 0 {
            return Err(Error::InvalidArgument("precision must be at least one digit".into()));
        }
        Ok(PrecisionContext { digits })
    }

    pub fn digits(self) -> u32 {
        self.digits
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { digits: DEFAULT_PRECISION }
    }
}

/// `v_p(x)`; zero carries the `Infinity` marker, which orders above every
/// finite valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => write!(f, "inf"),
        }
    }
}

/// A rational number viewed in Q_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdicRational {
    p: Prime,
    value: BigRational,
}

/// Field operation selector for [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Neg,
    Inv,
}

impl PAdicRational {
    pub fn new(p: Prime, value: BigRational) -> Self {
        PAdicRational { p, value }
    }

    pub fn from_parts(p: Prime, num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(PAdicRational::new(p, BigRational::new(num.into(), den)))
    }

    pub fn from_integer(p: Prime, n: impl Into<BigInt>) -> Self {
        PAdicRational::new(p, BigRational::from_integer(n.into()))
    }

    pub fn zero(p: Prime) -> Self {
        PAdicRational::new(p, BigRational::zero())
    }

    pub fn one(p: Prime) -> Self {
        PAdicRational::new(p, BigRational::one())
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn into_value(self) -> BigRational {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn valuation(&self) -> Valuation {
        match rational_valuation(&self.value, self.p) {
            Some(v) => Valuation::Finite(v),
            None => Valuation::Infinity,
        }
    }

    /// `|x|_p = p^(-v)`, zero for zero.
    pub fn norm(&self) -> BigRational {
        match self.valuation() {
            Valuation::Finite(v) => self.p.pow_rational(-v),
            Valuation::Infinity => BigRational::zero(),
        }
    }

    /// `(v_p(x), |x|_p)`.
    pub fn valuation_and_norm(&self) -> (Valuation, BigRational) {
        (self.valuation(), self.norm())
    }

    /// True when `|x|_p <= 1`.
    pub fn is_integral(&self) -> bool {
        self.valuation() >= Valuation::Finite(0)
    }

    /// The unit part `x / p^v`; zero maps to zero.
    pub fn unit_part(&self) -> BigRational {
        match self.valuation() {
            Valuation::Finite(v) => &self.value * self.p.pow_rational(-v),
            Valuation::Infinity => BigRational::zero(),
        }
    }

    /// `{x}_p`: the rational `r = c / p^k` in `[0, 1)` with `x - r ∈ Z_p`.
    pub fn frac_part(&self) -> BigRational {
        frac_part_of(&self.value, self.p)
    }

    fn same_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch { left: self.p.get(), right: other.p.get() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(PAdicRational::new(self.p, &self.value + &other.value))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(PAdicRational::new(self.p, &self.value - &other.value))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(PAdicRational::new(self.p, &self.value * &other.value))
    }

    pub fn neg(&self) -> Self {
        PAdicRational::new(self.p, -&self.value)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(PAdicRational::new(self.p, self.value.recip()))
    }

    /// Canonical digit expansion truncated to `ctx` digits.
    pub fn expansion(&self, ctx: PrecisionContext) -> PAdicExpansion {
        PAdicExpansion::from_rational(self, ctx)
    }

    /// The linear order on Q_p: smaller norm first, then the first differing
    /// digit of the canonical expansions. Exact equality short-circuits.
    pub fn order_compare(&self, other: &Self, ctx: PrecisionContext) -> Result<Ordering> {
        self.same_prime(other)?;
        if self.value == other.value {
            return Ok(Ordering::Equal);
        }
        let (vx, vy) = (self.valuation(), other.valuation());
        if vx != vy {
            // larger valuation means smaller norm
            return Ok(vy.cmp(&vx));
        }
        let ex = self.expansion(ctx);
        let ey = other.expansion(ctx);
        for (a, b) in ex.digits().iter().zip(ey.digits()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                decided => return Ok(decided),
            }
        }
        Err(Error::PrecisionExhausted { digits: ctx.digits() })
    }
}

impl fmt::Display for PAdicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (in Q_{})", self.value, self.p)
    }
}

/// Field operation dispatcher; `y` is ignored for the unary operations.
pub fn arith(op: ArithOp, x: &PAdicRational, y: &PAdicRational) -> Result<PAdicRational> {
    match op {
        ArithOp::Add => x.add(y),
        ArithOp::Mul => x.mul(y),
        ArithOp::Neg => Ok(x.neg()),
        ArithOp::Inv => x.inv(),
    }
}

/// `{q}_p` for a bare rational.
pub fn frac_part_of(q: &BigRational, p: Prime) -> BigRational {
    if q.is_zero() {
        return BigRational::zero();
    }
    let (k, _) = crate::arith::split_valuation(q.denom(), p);
    if k == 0 {
        return BigRational::zero();
    }
    // x·p^k is a p-adic integer; its residue mod p^k gives the principal part.
    let scaled = q * p.pow_rational(k);
    let c = residue_mod_pk(&scaled, p, k as u32).expect("p^k·x is p-integral");
    BigRational::new(c, p.pow(k as u32))
}

/// `v_p` of a rational that is known to be nonzero.
pub(crate) fn vp_nonzero(q: &BigRational, p: Prime) -> i64 {
    rational_valuation(q, p).expect("nonzero rational")
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

    fn x(pr: u64, n: i64, d: i64) -> PAdicRational {
        PAdicRational::new(p(pr), q(n, d))
    }

    #[test]
    fn valuation_and_norm_examples() {
        assert_eq!(x(3, 18, 1).valuation_and_norm(), (Valuation::Finite(2), q(1, 9)));
        assert_eq!(x(5, 6, 5).valuation_and_norm(), (Valuation::Finite(-1), q(5, 1)));
        assert_eq!(x(7, 0, 1).valuation_and_norm(), (Valuation::Infinity, q(0, 1)));
    }

    #[test]
    fn frac_part_examples() {
        assert_eq!(x(2, 1, 2).frac_part(), q(1, 2));
        assert_eq!(x(3, 5, 9).frac_part(), q(5, 9));
        assert_eq!(x(3, -1, 9).frac_part(), q(8, 9));
        assert_eq!(x(3, 7, 1).frac_part(), q(0, 1));
        assert_eq!(x(5, 0, 1).frac_part(), q(0, 1));
        // 7/10 at p = 5: 7/10 - r must lie in Z_5
        let r = x(5, 7, 10).frac_part();
        let diff = PAdicRational::new(p(5), q(7, 10) - &r);
        assert!(diff.is_integral());
        assert!(r >= q(0, 1) && r < q(1, 1));
    }

    #[test]
    fn arith_examples() {
        let s = arith(ArithOp::Add, &x(3, 1, 3), &x(3, 2, 3)).unwrap();
        assert_eq!(s.value(), &q(1, 1));
        assert_eq!(s.valuation(), Valuation::Finite(0));

        let m = arith(ArithOp::Mul, &x(5, 5, 1), &x(5, 1, 25)).unwrap();
        assert_eq!(m.value(), &q(1, 5));
        assert_eq!(m.norm(), q(5, 1));

        // equal norms, strictly smaller sum
        let a = x(3, 1, 3);
        let b = x(3, -1 + 27, 3);
        let s = a.add(&b).unwrap();
        assert_eq!(s.value(), &q(9, 1));
        assert_eq!(s.norm(), q(1, 9));
        assert!(s.norm() < a.norm().max(b.norm()));
    }

    #[test]
    fn arith_errors() {
        assert_eq!(x(3, 0, 1).inv(), Err(Error::DivisionByZero));
        assert_eq!(
            x(3, 1, 1).add(&x(5, 1, 1)),
            Err(Error::PrimeMismatch { left: 3, right: 5 })
        );
        assert_eq!(PAdicRational::from_parts(p(3), 1, 0), Err(Error::DivisionByZero));
    }

    #[test]
    fn order_examples() {
        let ctx = PrecisionContext::default();
        assert_eq!(x(5, 5, 1).order_compare(&x(5, 1, 1), ctx), Ok(Ordering::Less));
        assert_eq!(x(5, 2, 1).order_compare(&x(5, 7, 1), ctx), Ok(Ordering::Less));
        assert_eq!(x(3, 4, 1).order_compare(&x(3, 4, 1), ctx), Ok(Ordering::Equal));
        assert_eq!(x(3, 0, 1).order_compare(&x(3, 1, 81), ctx), Ok(Ordering::Less));
    }

    #[test]
    fn order_reports_exhausted_precision() {
        let ctx = PrecisionContext::new(3).unwrap();
        // 1 and 1 + 3^5 share their first three digits
        assert_eq!(
            x(3, 1, 1).order_compare(&x(3, 1 + 243, 1), ctx),
            Err(Error::PrecisionExhausted { digits: 3 })
        );
    }

    #[test]
    fn order_is_total_on_samples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let ctx = PrecisionContext::new(64).unwrap();
        for &pr in &[2u64, 3, 5, 7] {
            let mut sample: Vec<PAdicRational> = Vec::new();
            while sample.len() < 20 {
                let cand = x(pr, rng.gen_range(-500..500), rng.gen_range(1..300));
                if !sample.contains(&cand) {
                    sample.push(cand);
                }
            }
            for a in &sample {
                for b in &sample {
                    let ab = a.order_compare(b, ctx).unwrap();
                    let ba = b.order_compare(a, ctx).unwrap();
                    assert_eq!(ab, ba.reverse());
                    assert_eq!(ab == Ordering::Equal, a == b);
                    for c in &sample {
                        if ab == Ordering::Less && b.order_compare(c, ctx).unwrap() == Ordering::Less {
                            assert_eq!(a.order_compare(c, ctx).unwrap(), Ordering::Less);
                        }
                    }
                }
            }
        }
    }

    fn rational_strategy() -> impl Strategy<Value = BigRational> {
        (-100_000i64..100_000, 1i64..100_000).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ultrametric_inequality(a in rational_strategy(), b in rational_strategy(), idx in 0usize..5) {
            let pr = p([2u64, 3, 5, 7, 11][idx]);
            let xa = PAdicRational::new(pr, a);
            let xb = PAdicRational::new(pr, b);
            let s = xa.add(&xb).unwrap();
            let bound = xa.norm().max(xb.norm());
            prop_assert!(s.norm() <= bound);
            if xa.norm() != xb.norm() {
                prop_assert_eq!(s.norm(), bound);
            }
        }

        #[test]
        fn norm_is_multiplicative(a in rational_strategy(), b in rational_strategy(), idx in 0usize..5) {
            let pr = p([2u64, 3, 5, 7, 11][idx]);
            let xa = PAdicRational::new(pr, a);
            let xb = PAdicRational::new(pr, b);
            prop_assert_eq!(xa.mul(&xb).unwrap().norm(), xa.norm() * xb.norm());
        }

        #[test]
        fn frac_part_is_principal(a in rational_strategy(), idx in 0usize..5) {
            let pr = p([2u64, 3, 5, 7, 11][idx]);
            let xa = PAdicRational::new(pr, a.clone());
            let r = xa.frac_part();
            prop_assert!(r >= q(0, 1) && r < q(1, 1));
            prop_assert!(PAdicRational::new(pr, a - &r).is_integral());
            let (k, rest) = crate::arith::split_valuation(r.denom(), pr);
            prop_assert!(rest == BigInt::one() && k >= 0);
        }
    }
}
