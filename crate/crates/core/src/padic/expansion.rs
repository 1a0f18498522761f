use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{PAdicRational, PrecisionContext, Valuation};
use crate::arith::{residue_mod_pk, Prime};

/// `x = p^m · (d_0 + d_1 p + … + d_{N-1} p^{N-1}) + O(p^{m+N})`.
///
/// `d_0 != 0` unless the value is zero, in which case `digits` is empty and
/// `m` is 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicExpansion {
    pub p: Prime,
    pub m: i64,
    pub digits: Vec<u32>,
}

impl PAdicExpansion {
    pub fn zero(p: Prime) -> Self {
        PAdicExpansion { p, m: 0, digits: Vec::new() }
    }

    pub fn from_rational(x: &PAdicRational, ctx: PrecisionContext) -> Self {
        let p = x.prime();
        let m = match x.valuation() {
            Valuation::Finite(v) => v,
            Valuation::Infinity => return PAdicExpansion::zero(p),
        };
        let unit = x.unit_part();
        let residue = residue_mod_pk(&unit, p, ctx.digits()).expect("unit part is p-integral");
        PAdicExpansion::from_residue(p, m, residue, ctx.digits())
    }

    /// Expansion of `p^m · r` where `r` is an integer residue modulo `p^n`.
    pub(crate) fn from_residue(p: Prime, m: i64, residue: BigInt, n: u32) -> Self {
        let pb = p.big();
        let mut rest = residue;
        let mut digits = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let d = &rest % &pb;
            digits.push(d.to_u32().expect("digit below p"));
            rest /= &pb;
        }
        PAdicExpansion { p, m, digits }
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn precision(&self) -> u32 {
        self.digits.len() as u32
    }

    /// The truncated value as an exact rational.
    pub fn to_rational(&self) -> BigRational {
        let pb = self.p.big();
        let mut acc = BigInt::zero();
        for &d in self.digits.iter().rev() {
            acc = acc * &pb + BigInt::from(d);
        }
        BigRational::from_integer(acc) * self.p.pow_rational(self.m)
    }

    pub fn to_padic(&self) -> PAdicRational {
        PAdicRational::new(self.p, self.to_rational())
    }

    /// True when `x` and this expansion agree modulo `p^(m+N)`.
    pub fn agrees_with(&self, x: &BigRational) -> bool {
        let diff = x - self.to_rational();
        if diff.is_zero() {
            return true;
        }
        if self.is_zero() {
            return false;
        }
        let v = super::vp_nonzero(&diff, self.p);
        v >= self.m + self.digits.len() as i64
    }

    /// True when the two values agree modulo `p^k`.
    pub fn agrees_mod(&self, x: &BigRational, k: i64) -> bool {
        let diff = x - self.to_rational();
        diff.is_zero() || super::vp_nonzero(&diff, self.p) >= k
    }
}
