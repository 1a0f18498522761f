//! Integer and rational helpers shared by every module: primes, p-adic
//! valuations of big integers, residues modulo prime powers, and the small
//! fixed-width lattice arithmetic used by the coset-sum inner loops.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rational prime, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(value: u64) -> Result<Self> {
        if is_prime_u64(value) {
            Ok(Prime(value))
        } else {
            Err(Error::NotPrime(value))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    pub fn is_odd(self) -> bool {
        self.0 != 2
    }

    /// `p^exp` as a big integer.
    pub fn pow(self, exp: u32) -> BigInt {
        num_traits::pow(self.big(), exp as usize)
    }

    /// `p^exp` as an exact rational; negative exponents allowed.
    pub fn pow_rational(self, exp: i64) -> BigRational {
        let magnitude = self.pow(exp.unsigned_abs() as u32);
        if exp >= 0 {
            BigRational::from_integer(magnitude)
        } else {
            BigRational::new(BigInt::one(), magnitude)
        }
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(value: u64) -> Result<Self> {
        Prime::new(value)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases cover all of u64.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod_u64(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization of a 64-bit integer, primes ascending.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    if n < 2 {
        return out;
    }
    let mut rest = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut stack = vec![rest];
    let mut found: Vec<u64> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            found.push(m);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    found.sort_unstable();
    for q in found {
        match out.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    out
}

/// Distinct primes dividing a nonzero big integer.
pub fn prime_divisors(n: &BigInt) -> Result<Vec<Prime>> {
    let m = n
        .abs()
        .to_u64()
        .ok_or_else(|| Error::FactorizationTooLarge(n.to_string()))?;
    Ok(factor_u64(m)
        .into_iter()
        .map(|(p, _)| Prime(p))
        .collect())
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Splits a nonzero integer as `p^v · rest` with `p ∤ rest`.
pub fn split_valuation(n: &BigInt, p: Prime) -> (i64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = p.big();
    let mut v = 0;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        rest = q;
        v += 1;
    }
    (v, rest)
}

/// `v_p(q)`, or `None` for zero.
pub fn rational_valuation(q: &BigRational, p: Prime) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let (a, _) = split_valuation(q.numer(), p);
    let (b, _) = split_valuation(q.denom(), p);
    Some(a - b)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Residue of a p-integral rational modulo `p^k`, in `[0, p^k)`.
pub fn residue_mod_pk(q: &BigRational, p: Prime, k: u32) -> Result<BigInt> {
    let modulus = p.pow(k);
    if k == 0 {
        return Ok(BigInt::zero());
    }
    let inv = mod_inverse(q.denom(), &modulus).ok_or_else(|| {
        Error::InvalidArgument(format!("{q} is not a {p}-adic integer"))
    })?;
    Ok((q.numer() * inv).mod_floor(&modulus))
}

/// `p^k` as u128 when it stays within the 62-bit lattice range.
pub(crate) fn lattice_modulus(p: Prime, k: u32) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc *= p.get() as u128;
        if acc > (1u128 << 62) {
            return Err(Error::LatticeOverflow(format!("{p}^{k}")));
        }
    }
    Ok(acc)
}

/// `(p^scale · q) mod p^exp` for a rational with `v_p(q) + scale >= 0`.
pub(crate) fn lattice_residue(q: &BigRational, p: Prime, scale: i64, exp: u32) -> Result<u128> {
    if q.is_zero() || exp == 0 {
        return Ok(0);
    }
    let scaled = q * p.pow_rational(scale);
    let r = residue_mod_pk(&scaled, p, exp)?;
    Ok(r.to_u128().expect("residue below a 62-bit modulus"))
}

pub(crate) fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    (a % m) * (b % m) % m
}

/// `exp(2πi · num/den)` with the angle folded into `(-1/2, 1/2]` first.
pub fn cis_fraction(num: u128, den: u128) -> Complex64 {
    let r = num % den;
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * r == den {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * r == den {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * r == 3 * den {
        return Complex64::new(0.0, -1.0);
    }
    let signed = if 2 * r > den {
        -((den - r) as f64)
    } else {
        r as f64
    };
    let angle = std::f64::consts::TAU * signed / den as f64;
    let (s, c) = angle.sin_cos();
    Complex64::new(c, s)
}

/// Parses `"a/b"`, `"a"`, or a decimal such as `"-0.25"` / `"1.5e-3"` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let ten = BigInt::from(10);
    let shift = exponent - frac_part.len() as i32 - 1;
    let mut q = BigRational::from_integer(digits);
    let scale = BigRational::from_integer(num_traits::pow(ten, shift.unsigned_abs() as usize));
    if shift >= 0 {
        q *= scale;
    } else {
        q /= scale;
    }
    Ok(if negative { -q } else { q })
}

/// Formats a rational as `"num/den"`, always with an explicit denominator.
pub fn rational_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Nearest f64 to a rational, robust to huge numerators and denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = q.numer().bits() as i64 - q.denom().bits() as i64;
    let two = BigInt::from(2);
    let target = 60i64 - shift;
    let scaled = if target >= 0 {
        q.numer() * num_traits::pow(two, target as usize) / q.denom()
    } else {
        q.numer() / (q.denom() * num_traits::pow(two, (-target) as usize))
    };
    let mantissa = scaled.to_f64().unwrap_or(0.0);
    mantissa * 2f64.powi(-(target as i32))
}

/// Exact rational for a finite f64.
pub fn f64_to_rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("{x} is not finite")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_small_and_large() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(primes, primes_up_to(59));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(!is_prime_u64(3_215_031_751));
        assert_eq!(Prime::new(1), Err(Error::NotPrime(1)));
    }

    #[test]
    fn factorization_round_trip() {
        for n in [1u64, 2, 12, 360, 999_983 * 1_000_003, 600_851_475_143] {
            let f = factor_u64(n);
            let back: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n.max(1));
            assert!(f.iter().all(|&(p, _)| is_prime_u64(p)));
        }
    }

    #[test]
    fn residues_and_valuations() {
        let p = Prime::new(3).unwrap();
        let q = BigRational::new((-1).into(), 2.into());
        // -1/2 ≡ 4 (mod 9) since 2·4 = 8 ≡ -1
        assert_eq!(residue_mod_pk(&q, p, 2).unwrap(), BigInt::from(4));
        let x = BigRational::new(18.into(), 5.into());
        assert_eq!(rational_valuation(&x, p), Some(2));
        assert_eq!(rational_valuation(&BigRational::zero(), p), None);
    }

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_rational("18/1").unwrap(), BigRational::from_integer(18.into()));
        assert_eq!(
            parse_rational("-0.5").unwrap(),
            BigRational::new((-1).into(), 2.into())
        );
        assert_eq!(
            parse_rational("1.25e-2").unwrap(),
            BigRational::new(1.into(), 80.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(rational_string(&parse_rational("6/-4").unwrap()), "-3/2");
    }

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(cis_fraction(1, 4), Complex64::new(0.0, 1.0));
        assert_eq!(cis_fraction(3, 6), Complex64::new(-1.0, 0.0));
        let z = cis_fraction(1, 3);
        assert!((z - Complex64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn rational_to_float_handles_huge_parts() {
        let big: BigInt = num_traits::pow(BigInt::from(10), 400);
        let q = BigRational::new(-(big.clone() + BigInt::from(1)), big * BigInt::from(2));
        assert_eq!(rational_to_f64(&q), -0.5);
    }
}
