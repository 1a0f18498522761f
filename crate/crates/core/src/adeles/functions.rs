use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;

use super::Adele;
use crate::arith::Prime;
use crate::error::{Error, Result};
use crate::integrate::StepFunction;

/// A Schwartz function on ℝ from the Hermite catalog,
/// `Σ_n c_n·h_n(x)` with `h_n(x) ∝ H_n(√(2π)·x)·exp(-πx²)` normalized in
/// `L²(ℝ)`. Under `f̃(y) = ∫ f(x)·exp(-2πixy) dx` each `h_n` picks up the
/// factor `(-i)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFactor {
    coeffs: Vec<Complex64>,
}

fn minus_i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

impl RealFactor {
    pub fn from_coeffs(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        RealFactor { coeffs }
    }

    pub fn zero() -> Self {
        RealFactor { coeffs: Vec::new() }
    }

    pub fn hermite(n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        RealFactor { coeffs }
    }

    /// `exp(-πx²)`, which is `2^(-1/4)·h_0`.
    pub fn gaussian() -> Self {
        RealFactor { coeffs: vec![Complex64::new(2f64.powf(-0.25), 0.0)] }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        RealFactor::from_coeffs(self.coeffs.iter().map(|z| z * c).collect())
    }

    /// Parses `"zero"`, `"gaussian"`, `"hermite:n"`, or a `+`-separated sum
    /// of such terms, each optionally prefixed by `c*` or `(re,im)*`.
    pub fn parse(text: &str) -> Result<Self> {
        let unsupported = || Error::UnsupportedRealFactor(text.to_string());
        let mut acc: Vec<Complex64> = Vec::new();
        for term in text.split('+') {
            let term = term.trim();
            let (coef, basis) = match term.rsplit_once('*') {
                Some((c, b)) => (parse_coefficient(c.trim()).ok_or_else(unsupported)?, b.trim()),
                None => (Complex64::new(1.0, 0.0), term),
            };
            let piece = if basis == "zero" {
                RealFactor::zero()
            } else if basis == "gaussian" {
                RealFactor::gaussian()
            } else if let Some(n) = basis.strip_prefix("hermite:") {
                let n: usize = n.trim().parse().map_err(|_| unsupported())?;
                if n > 512 {
                    return Err(unsupported());
                }
                RealFactor::hermite(n)
            } else {
                return Err(unsupported());
            };
            for (k, c) in piece.coeffs.iter().enumerate() {
                if acc.len() <= k {
                    acc.resize(k + 1, Complex64::new(0.0, 0.0));
                }
                acc[k] += c * coef;
            }
        }
        Ok(RealFactor::from_coeffs(acc))
    }

    /// `Σ c_n h_n(x)` by the three-term recurrence of normalized Hermite
    /// functions.
    pub fn eval(&self, x: f64) -> Complex64 {
        if self.coeffs.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let u = (2.0 * std::f64::consts::PI).sqrt() * x;
        let mut prev = 0.0;
        let mut cur = 2f64.powf(0.25) * (-std::f64::consts::PI * x * x).exp();
        let mut acc = self.coeffs[0] * cur;
        for n in 0..self.coeffs.len() - 1 {
            let nf = n as f64;
            let next = (2.0 / (nf + 1.0)).sqrt() * u * cur - (nf / (nf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            acc += self.coeffs[n + 1] * cur;
        }
        acc
    }

    pub fn fourier(&self) -> Self {
        RealFactor::from_coeffs(self.coeffs.iter().enumerate().map(|(n, c)| c * minus_i_pow(n)).collect())
    }

    /// `∫ conj(f)·g dx`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }
}

fn parse_coefficient(s: &str) -> Option<Complex64> {
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let (re, im) = inner.split_once(',')?;
        return Some(Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?));
    }
    Some(Complex64::new(s.parse().ok()?, 0.0))
}

impl fmt::Display for RealFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(usize, &Complex64)> =
            self.coeffs.iter().enumerate().filter(|(_, c)| **c != Complex64::new(0.0, 0.0)).collect();
        if terms.is_empty() {
            return write!(f, "zero");
        }
        for (i, (n, c)) in terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if **c == Complex64::new(1.0, 0.0) {
                write!(f, "hermite:{n}")?;
            } else {
                write!(f, "({:?},{:?})*hermite:{n}", c.re, c.im)?;
            }
        }
        Ok(())
    }
}

/// `φ(x) = φ_∞(x_∞)·Π_{p∈S} φ_p(x_p)·Π_{p∉S} Ω(|x_p|_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryFunction {
    real: RealFactor,
    finite: BTreeMap<Prime, StepFunction>,
}

impl ElementaryFunction {
    pub fn new(real: RealFactor, finite: BTreeMap<Prime, StepFunction>) -> Result<Self> {
        for (p, f) in &finite {
            if f.prime() != *p {
                return Err(Error::PrimeMismatch { left: p.get(), right: f.prime().get() });
            }
            if f.dim() != 1 {
                return Err(Error::InvalidStepFunction(format!(
                    "adelic factors are one-dimensional, got d = {}",
                    f.dim()
                )));
            }
        }
        Ok(ElementaryFunction { real, finite })
    }

    /// The real factor with Ω at every finite place.
    pub fn pure_real(real: RealFactor) -> Self {
        ElementaryFunction { real, finite: BTreeMap::new() }
    }

    pub fn real(&self) -> &RealFactor {
        &self.real
    }

    pub fn finite(&self) -> &BTreeMap<Prime, StepFunction> {
        &self.finite
    }

    /// The factor at `p`, Ω when not stored.
    pub fn factor(&self, p: Prime) -> StepFunction {
        self.finite.get(&p).cloned().unwrap_or_else(|| StepFunction::omega(p, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.real.is_zero() || self.finite.values().any(StepFunction::is_zero)
    }

    pub fn eval(&self, x: &Adele) -> Complex64 {
        let mut acc = self.real.eval(x.real().to_f64());
        let primes: BTreeSet<Prime> = self.finite.keys().chain(x.finite().keys()).copied().collect();
        for p in primes {
            let xp: Vec<BigRational> = vec![x.component(p).into_value()];
            acc *= self.factor(p).eval(&xp);
        }
        acc
    }

    /// Factorized Fourier transform.
    pub fn fourier(&self) -> Result<Self> {
        let finite = self
            .finite
            .iter()
            .map(|(p, f)| Ok((*p, f.fourier()?)))
            .collect::<Result<_>>()?;
        Ok(ElementaryFunction { real: self.real.fourier(), finite })
    }

    /// `∫_A conj(f)·g` as a product of local integrals.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        let mut acc = self.real.inner(&other.real);
        let primes: BTreeSet<Prime> = self.finite.keys().chain(other.finite.keys()).copied().collect();
        for p in primes {
            acc *= self.factor(p).inner_product(&other.factor(p))?;
        }
        Ok(acc)
    }
}

/// Adelic Fourier transform of an elementary function.
pub fn adelic_fourier(f: &ElementaryFunction) -> Result<ElementaryFunction> {
    f.fourier()
}

/// One summand `C·φ` of an adelic state; `label` names the eigenfunction
/// indices and is carried through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTerm {
    pub coefficient: Complex64,
    pub function: ElementaryFunction,
    pub label: Option<String>,
}

/// A finite superposition of elementary functions.
#[derive(Debug, Clone, PartialEq)]
pub struct AdelicState {
    pub terms: Vec<StateTerm>,
}

impl AdelicState {
    pub fn new(terms: Vec<StateTerm>) -> Self {
        AdelicState { terms }
    }

    /// `‖Ψ‖²` from the full Gram matrix of the terms.
    pub fn norm_sq(&self) -> Result<f64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &self.terms {
                acc += a.coefficient.conj() * b.coefficient * a.function.inner_product(&b.function)?;
            }
        }
        Ok(acc.re)
    }

    /// `Σ |C|²`, the norm when the terms are orthonormal.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> Result<bool> {
        Ok((self.norm_sq()? - 1.0).abs() <= tol)
    }

    pub fn fourier(&self) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(StateTerm { coefficient: t.coefficient, function: t.function.fourier()?, label: t.label.clone() })
            })
            .collect::<Result<_>>()?;
        Ok(AdelicState { terms })
    }

    pub fn eval(&self, x: &Adele) -> Complex64 {
        self.terms.iter().map(|t| t.coefficient * t.function.eval(x)).sum()
    }
}
