//! Adeles as a real component, finitely many stored p-adic components and a
//! tail.
//!
//! The tail is a single rational `t`: every component outside the stored set
//! `S` equals `t`. An integer tail requires `t ∈ Z_p` for `p ∉ S`; a unit
//! tail requires `|t|_p = 1` for `p ∉ S`. With this convention sums and
//! products stay exact and the characters and norms become finite products.

mod functions;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{prime_divisors, rational_to_f64, split_valuation, Prime};
use crate::characters::{chi_inf, chi_inf_rational, chi_p, CharValue, UnitPhase};
use crate::error::{Error, Result};
use crate::padic::PAdicRational;

pub use functions::{adelic_fourier, AdelicState, ElementaryFunction, RealFactor, StateTerm};

/// Contract on the components outside the stored set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    Integer,
    Unit,
}

/// The archimedean component: exact when it came from rational input.
#[derive(Debug, Clone, PartialEq)]
pub enum RealPart {
    Exact(BigRational),
    Approx(f64),
}

impl RealPart {
    pub fn to_f64(&self) -> f64 {
        match self {
            RealPart::Exact(q) => rational_to_f64(q),
            RealPart::Approx(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RealPart::Exact(q) => q.is_zero(),
            RealPart::Approx(x) => *x == 0.0,
        }
    }

    fn combine(
        &self,
        other: &RealPart,
        exact: impl Fn(&BigRational, &BigRational) -> BigRational,
        approx: impl Fn(f64, f64) -> f64,
    ) -> RealPart {
        match (self, other) {
            (RealPart::Exact(a), RealPart::Exact(b)) => RealPart::Exact(exact(a, b)),
            _ => RealPart::Approx(approx(self.to_f64(), other.to_f64())),
        }
    }
}

/// An element of the adele ring.
#[derive(Debug, Clone)]
pub struct Adele {
    real: RealPart,
    finite: BTreeMap<Prime, BigRational>,
    tail: Tail,
    tail_value: BigRational,
}

/// Field selector for [`adele_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdeleOp {
    Add,
    Mul,
}

/// True when every prime factor of `n` lies in `s`.
fn supported_by(n: &BigInt, s: &BTreeMap<Prime, BigRational>) -> bool {
    let mut rest = n.abs();
    for p in s.keys() {
        if rest.is_one() {
            break;
        }
        rest = split_valuation(&rest, *p).1;
    }
    rest.is_one()
}

impl Adele {
    pub fn new(
        real: RealPart,
        finite: BTreeMap<Prime, BigRational>,
        tail: Tail,
        tail_value: BigRational,
    ) -> Result<Self> {
        if let RealPart::Approx(x) = real {
            if !x.is_finite() {
                return Err(Error::InvalidArgument("real component must be finite".into()));
            }
        }
        if !supported_by(tail_value.denom(), &finite) {
            return Err(Error::InvalidArgument(format!(
                "tail value {tail_value} is not integral outside the stored primes"
            )));
        }
        if tail == Tail::Unit && (tail_value.is_zero() || !supported_by(tail_value.numer(), &finite)) {
            return Err(Error::NotAnIdele(format!(
                "tail value {tail_value} is not a unit outside the stored primes"
            )));
        }
        Ok(Adele { real, finite, tail, tail_value })
    }

    /// The zero adele.
    pub fn zero() -> Self {
        Adele {
            real: RealPart::Exact(BigRational::zero()),
            finite: BTreeMap::new(),
            tail: Tail::Integer,
            tail_value: BigRational::zero(),
        }
    }

    pub fn real(&self) -> &RealPart {
        &self.real
    }

    pub fn finite(&self) -> &BTreeMap<Prime, BigRational> {
        &self.finite
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn tail_value(&self) -> &BigRational {
        &self.tail_value
    }

    /// The stored set `S`.
    pub fn support(&self) -> BTreeSet<Prime> {
        self.finite.keys().copied().collect()
    }

    /// Component at `p`, falling back to the tail value.
    pub fn component(&self, p: Prime) -> PAdicRational {
        PAdicRational::new(p, self.finite.get(&p).unwrap_or(&self.tail_value).clone())
    }

    /// Marks the adele as an idele after checking the unit-tail contract.
    pub fn to_idele(&self) -> Result<Self> {
        if self.real.is_zero() {
            return Err(Error::NotAnIdele("real component is zero".into()));
        }
        if let Some((p, _)) = self.finite.iter().find(|(_, v)| v.is_zero()) {
            return Err(Error::NotAnIdele(format!("component at {p} is zero")));
        }
        Adele::new(self.real.clone(), self.finite.clone(), Tail::Unit, self.tail_value.clone())
    }

    pub fn is_idele(&self) -> bool {
        self.tail == Tail::Unit
    }
}

impl PartialEq for Adele {
    /// Componentwise equality over the union of stored primes, plus equal
    /// tails.
    fn eq(&self, other: &Self) -> bool {
        if self.real != other.real || self.tail != other.tail || self.tail_value != other.tail_value {
            return false;
        }
        let primes: BTreeSet<Prime> = self.finite.keys().chain(other.finite.keys()).copied().collect();
        primes.into_iter().all(|p| self.component(p) == other.component(p))
    }
}

impl fmt::Display for Adele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.real {
            RealPart::Exact(q) => write!(f, "(∞: {q}")?,
            RealPart::Approx(x) => write!(f, "(∞: {x}")?,
        }
        for (p, v) in &self.finite {
            write!(f, ", {p}: {v}")?;
        }
        let kind = match self.tail {
            Tail::Integer => "integer",
            Tail::Unit => "unit",
        };
        write!(f, "; {kind} tail {})", self.tail_value)
    }
}

/// The diagonal embedding of a rational number.
pub fn embed_principal(q: &BigRational) -> Result<Adele> {
    let mut finite = BTreeMap::new();
    if !q.is_zero() {
        for n in [q.numer(), q.denom()] {
            for p in prime_divisors(n)? {
                finite.insert(p, q.clone());
            }
        }
    }
    Ok(Adele {
        real: RealPart::Exact(q.clone()),
        finite,
        tail: Tail::Integer,
        tail_value: q.clone(),
    })
}

/// Componentwise sum or product.
pub fn adele_arith(op: AdeleOp, x: &Adele, y: &Adele) -> Adele {
    let f = |a: &BigRational, b: &BigRational| match op {
        AdeleOp::Add => a + b,
        AdeleOp::Mul => a * b,
    };
    let primes: BTreeSet<Prime> = x.finite.keys().chain(y.finite.keys()).copied().collect();
    let finite = primes
        .into_iter()
        .map(|p| (p, f(x.component(p).value(), y.component(p).value())))
        .collect();
    let real = x.real.combine(
        &y.real,
        |a, b| f(a, b),
        |a, b| match op {
            AdeleOp::Add => a + b,
            AdeleOp::Mul => a * b,
        },
    );
    let tail = if op == AdeleOp::Mul && x.tail == Tail::Unit && y.tail == Tail::Unit {
        Tail::Unit
    } else {
        Tail::Integer
    };
    Adele { real, finite, tail, tail_value: f(&x.tail_value, &y.tail_value) }
}

/// `χ(x) = χ_∞(x_∞)·Π_{p∈S} χ_p(x_p)`; exact when the real part is exact.
pub fn adelic_char(x: &Adele) -> CharValue {
    let mut phase = UnitPhase::zero();
    for (p, v) in &x.finite {
        phase = &phase * &chi_p(&PAdicRational::new(*p, v.clone()));
    }
    match &x.real {
        RealPart::Exact(q) => CharValue::Phase(&phase * &chi_inf_rational(q)),
        RealPart::Approx(r) => CharValue::Complex(phase.to_complex() * chi_inf(*r)),
    }
}

/// `|x_∞|·Π_{p∈S} |x_p|_p` as an exact rational, for ideles with an exact
/// real part.
pub fn idele_norm_exact(x: &Adele) -> Result<Option<BigRational>> {
    let x = x.to_idele()?;
    let RealPart::Exact(r) = &x.real else {
        return Ok(None);
    };
    let mut acc = r.abs();
    for (p, v) in &x.finite {
        acc *= PAdicRational::new(*p, v.clone()).norm();
    }
    Ok(Some(acc))
}

/// `|x|^s = |x_∞|^s·Π_{p∈S} |x_p|_p^s`.
pub fn adelic_norm(x: &Adele, s: Complex64) -> Result<Complex64> {
    let x = x.to_idele()?;
    if idele_norm_exact(&x)?.is_some_and(|n| n.is_one()) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut ln = x.real.to_f64().abs().ln();
    for (p, v) in &x.finite {
        let vp = PAdicRational::new(*p, v.clone()).valuation().finite().expect("nonzero component");
        ln -= vp as f64 * (p.get() as f64).ln();
    }
    Ok((s * ln).exp())
}
