use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::{PAdicExpansion, PAdicRational, PrecisionContext, Valuation};
use crate::arith::{mod_inverse, residue_mod_pk, Prime};
use crate::error::{Error, Result};

/// Result of [`hensel_sqrt`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SquareRoot {
    Root(PAdicExpansion),
    NotASquare,
}

fn pow_mod(base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc
}

/// Tonelli-Shanks for an odd prime; `None` when `a` is a non-residue.
fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let (a, p) = (a as u128 % p as u128, p as u128);
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p) as u64);
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2u128;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = t2 * t2 % p;
            i += 1;
        }
        let b = pow_mod(c, 1u128 << (m - i - 1), p);
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    Some(r as u64)
}

/// Square root in Q_p via Hensel lifting.
///
/// Returns `y` with `y² ≡ x (mod p^(v+N))`. Of the two roots `±y`, the one
/// whose unit part has the smaller residue in `[0, p^N)` is reported.
pub fn hensel_sqrt(x: &PAdicRational, ctx: PrecisionContext) -> Result<SquareRoot> {
    let p = x.prime();
    let v = match x.valuation() {
        Valuation::Finite(v) => v,
        Valuation::Infinity => return Err(Error::ZeroArgument),
    };
    if v % 2 != 0 {
        return Ok(SquareRoot::NotASquare);
    }
    let n = ctx.digits();
    let unit = x.unit_part();
    let root = if p.is_odd() {
        lift_odd(&unit, p, n)?
    } else {
        lift_two(&unit, n)?
    };
    let Some(root) = root else {
        return Ok(SquareRoot::NotASquare);
    };
    let modulus = p.pow(n);
    let other = (&modulus - &root).mod_floor(&modulus);
    let chosen = root.min(other);
    Ok(SquareRoot::Root(PAdicExpansion::from_residue(p, v / 2, chosen, n)))
}

fn lift_odd(unit: &num_rational::BigRational, p: Prime, n: u32) -> Result<Option<BigInt>> {
    let r0 = residue_mod_pk(unit, p, 1)?.to_u64().expect("residue below p");
    let Some(y0) = sqrt_mod_prime(r0, p.get()) else {
        return Ok(None);
    };
    let target = residue_mod_pk(unit, p, n)?;
    let mut y = BigInt::from(y0);
    let mut k = 1u32;
    while k < n {
        k = (2 * k).min(n);
        let modulus = p.pow(k);
        let f = (&y * &y - &target).mod_floor(&modulus);
        let df = mod_inverse(&(BigInt::from(2) * &y), &modulus).expect("2y is a unit");
        y = (&y - f * df).mod_floor(&modulus);
    }
    Ok(Some(y.mod_floor(&p.pow(n))))
}

fn lift_two(unit: &num_rational::BigRational, n: u32) -> Result<Option<BigInt>> {
    let two = Prime::new(2).expect("2 is prime");
    let top = n + 1;
    let target = residue_mod_pk(unit, two, top.max(3))?;
    if (&target % 8u32) != BigInt::one() {
        return Ok(None);
    }
    // invariant: y² ≡ u (mod 2^k)
    let mut y = BigInt::one();
    let mut k = 3u32;
    while k < top {
        let modulus = two.pow(k + 1);
        let diff = (&y * &y - &target).mod_floor(&modulus);
        if diff != BigInt::from(0) {
            y += two.pow(k - 1);
        }
        k += 1;
    }
    Ok(Some(y.mod_floor(&two.pow(n))))
}
