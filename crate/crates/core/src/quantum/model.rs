use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::arith::{rational_to_f64, rational_valuation, Prime};
use crate::characters::{chi_inf, chi_inf_rational, chi_p, lambda_inf, lambda_p, CharValue, EighthRoot, Place};
use crate::error::{Error, Result};
use crate::integrate::gauss_integral;
use crate::padic::{series_eval, PAdicRational, PrecisionContext, SeriesKind};

/// Which Lagrangian a [`QuadraticModel`] describes.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// `L = ẋ²/2`.
    Free,
    /// `L = ẋ²/2 - a·x`.
    ConstantField { a: BigRational },
    /// `L = ẋ²/2 - ω²x²/2`.
    Oscillator { omega: BigRational },
}

/// A quadratic Lagrangian together with a display name.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub name: String,
    pub kind: ModelKind,
}

/// `S̄(x″, x′) = A·x″² + B·x″x′ + C·x′² + D·x″ + E·x′ + F` at fixed `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCoefficients {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
    pub e: BigRational,
    pub f: BigRational,
}

impl ActionCoefficients {
    pub fn action(&self, x2: &BigRational, x1: &BigRational) -> BigRational {
        &self.a * x2 * x2 + &self.b * x2 * x1 + &self.c * x1 * x1 + &self.d * x2 + &self.e * x1 + &self.f
    }
}

/// Classical action coefficients at one place.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelCoefficients {
    /// Rational coefficients. `exact` is false when they are truncated
    /// p-adic series values.
    Rational { coeffs: ActionCoefficients, exact: bool },
    /// Floating-point coefficients `[A, B, C, D, E, F]` at the real place.
    Real([f64; 6]),
}

impl ModelCoefficients {
    fn mixed(&self) -> f64 {
        match self {
            ModelCoefficients::Rational { coeffs, .. } => rational_to_f64(&coeffs.b),
            ModelCoefficients::Real(c) => c[1],
        }
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn free_coefficients(t: &BigRational) -> ActionCoefficients {
    let half_inv = (t * rat(2, 1)).recip();
    ActionCoefficients {
        a: half_inv.clone(),
        b: -t.recip(),
        c: half_inv,
        d: BigRational::zero(),
        e: BigRational::zero(),
        f: BigRational::zero(),
    }
}

impl QuadraticModel {
    pub fn free() -> Self {
        QuadraticModel { name: "free".into(), kind: ModelKind::Free }
    }

    pub fn constant_field(a: BigRational) -> Self {
        QuadraticModel { name: "constantField".into(), kind: ModelKind::ConstantField { a } }
    }

    pub fn oscillator(omega: BigRational) -> Self {
        QuadraticModel { name: "oscillator".into(), kind: ModelKind::Oscillator { omega } }
    }

    /// Any model by name: `free`, `constantField`, `oscillator`, or one of
    /// the [`minisuperspace_model`] presets. `parameter` is the field
    /// strength, frequency or cosmological constant.
    pub fn from_name(name: &str, parameter: &BigRational) -> Result<Self> {
        match name {
            "free" => Ok(QuadraticModel::free()),
            "constantField" => Ok(QuadraticModel::constant_field(parameter.clone())),
            "oscillator" => Ok(QuadraticModel::oscillator(parameter.clone())),
            other => minisuperspace_model(other, parameter),
        }
    }

    /// Coefficients of `S̄` for the elapsed time `T` at place `v`.
    pub fn coefficients(&self, v: Place, t: &BigRational) -> Result<ModelCoefficients> {
        self.coefficients_on(v, t, 0)
    }

    /// As [`QuadraticModel::coefficients`], with truncated series kept
    /// accurate enough that `χ_p(S̄)` is exact for `|x″|, |x′| ≤ p^window`.
    pub fn coefficients_on(&self, v: Place, t: &BigRational, window: i64) -> Result<ModelCoefficients> {
        if t.is_zero() {
            return Err(Error::DegenerateTime);
        }
        match &self.kind {
            ModelKind::Free => Ok(ModelCoefficients::Rational { coeffs: free_coefficients(t), exact: true }),
            ModelKind::ConstantField { a } => {
                let mut coeffs = free_coefficients(t);
                let linear = -(a * t) / rat(2, 1);
                coeffs.d = linear.clone();
                coeffs.e = linear;
                coeffs.f = -(a * a * t * t * t) / rat(24, 1);
                Ok(ModelCoefficients::Rational { coeffs, exact: true })
            }
            ModelKind::Oscillator { omega } if omega.is_zero() => {
                Ok(ModelCoefficients::Rational { coeffs: free_coefficients(t), exact: true })
            }
            ModelKind::Oscillator { omega } => match v {
                Place::Infinity => real_oscillator(rational_to_f64(omega), rational_to_f64(t)),
                Place::Finite(p) => padic_oscillator(p, omega, t, window),
            },
        }
    }
}

fn real_oscillator(omega: f64, t: f64) -> Result<ModelCoefficients> {
    let (s, c) = (omega * t).sin_cos();
    if s.abs() < 1e-12 {
        return Err(Error::DegenerateTime);
    }
    let a = omega * c / (2.0 * s);
    Ok(ModelCoefficients::Real([a, -omega / s, a, 0.0, 0.0, 0.0]))
}

fn padic_oscillator(p: Prime, omega: &BigRational, t: &BigRational, window: i64) -> Result<ModelCoefficients> {
    if p.get() == 2 {
        return Err(Error::OutOfDomain("the oscillator needs an odd prime".into()));
    }
    let wt = omega * t;
    let vwt = rational_valuation(&wt, p).expect("nonzero");
    if vwt < 1 {
        return Err(Error::OutOfDomain(format!("|ωT|_{p} must be at most 1/{p}, got v = {vwt}")));
    }
    let vt = rational_valuation(t, p).expect("nonzero");
    let digits = 20 + vt.unsigned_abs() + 2 * window.max(0) as u64 + vwt as u64;
    let ctx = PrecisionContext::new(digits as u32)?;
    let x = PAdicRational::new(p, wt);
    let sin = series_eval(SeriesKind::Sin, &x, ctx)?.to_rational();
    let cos = series_eval(SeriesKind::Cos, &x, ctx)?.to_rational();
    let a = omega * &cos / (&sin * rat(2, 1));
    let coeffs = ActionCoefficients {
        a: a.clone(),
        b: -(omega / &sin),
        c: a,
        d: BigRational::zero(),
        e: BigRational::zero(),
        f: BigRational::zero(),
    };
    Ok(ModelCoefficients::Rational { coeffs, exact: false })
}

/// Minisuperspace presets with one coordinate in the gauge `N = 1`.
///
/// * `freeScaleFactor`: `U = 0`.
/// * `constantField`: `U(q) = a·q` with `a = parameter`.
/// * `deSitter4D`: `U(q) = Λ·q` with `Λ = parameter`.
pub fn minisuperspace_model(name: &str, parameter: &BigRational) -> Result<QuadraticModel> {
    let kind = match name {
        "freeScaleFactor" => ModelKind::Free,
        "constantField" | "deSitter4D" => ModelKind::ConstantField { a: parameter.clone() },
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    Ok(QuadraticModel { name: name.to_string(), kind })
}

/// `|K| = p^(half_exponent/2)` at a finite place or a real number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulus {
    PPower { p: Prime, half_exponent: i64 },
    Real(f64),
}

impl Modulus {
    pub fn to_f64(&self) -> f64 {
        match *self {
            Modulus::PPower { p, half_exponent } => (p.get() as f64).powf(half_exponent as f64 / 2.0),
            Modulus::Real(r) => r,
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::PPower { p, half_exponent } if half_exponent % 2 == 0 => {
                write!(f, "{p}^{}", half_exponent / 2)
            }
            Modulus::PPower { p, half_exponent } => write!(f, "{p}^({half_exponent}/2)"),
            Modulus::Real(r) => write!(f, "{r}"),
        }
    }
}

/// `K_v = λ_v(-B/2)·|B|_v^(1/2)·χ_v(-S̄)`, kept in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorValue {
    pub place: Place,
    pub lambda: EighthRoot,
    pub modulus: Modulus,
    pub phase: CharValue,
    pub exact: bool,
}

impl PropagatorValue {
    pub fn value(&self) -> Complex64 {
        self.lambda.to_complex() * self.modulus.to_f64() * self.phase.to_complex()
    }
}

fn window_of(p: Prime, xs: &[&BigRational]) -> i64 {
    xs.iter().filter_map(|x| rational_valuation(x, p)).map(|v| -v).max().unwrap_or(0).max(0)
}

/// The propagator `K_v(x″, t″; x′, t′)` of a quadratic model.
pub fn propagator(
    v: Place,
    model: &QuadraticModel,
    x2: &BigRational,
    t2: &BigRational,
    x1: &BigRational,
    t1: &BigRational,
) -> Result<PropagatorValue> {
    let t = t2 - t1;
    let window = match v {
        Place::Finite(p) => window_of(p, &[x2, x1]),
        Place::Infinity => 0,
    };
    let coeffs = model.coefficients_on(v, &t, window)?;
    if coeffs.mixed() == 0.0 {
        return Err(Error::DegenerateTime);
    }
    match (v, coeffs) {
        (Place::Finite(p), ModelCoefficients::Rational { coeffs, exact }) => {
            let b = PAdicRational::new(p, coeffs.b.clone());
            let vb = rational_valuation(&coeffs.b, p).ok_or(Error::DegenerateTime)?;
            let half = -&coeffs.b / rat(2, 1);
            Ok(PropagatorValue {
                place: v,
                lambda: lambda_p(&PAdicRational::new(p, half))?,
                modulus: Modulus::PPower { p, half_exponent: -vb },
                phase: CharValue::Phase(chi_p(&PAdicRational::new(p, -coeffs.action(x2, x1)))),
                exact: exact && !b.is_zero(),
            })
        }
        (Place::Infinity, ModelCoefficients::Rational { coeffs, exact }) => Ok(PropagatorValue {
            place: v,
            lambda: lambda_inf((-&coeffs.b).is_positive()),
            modulus: Modulus::Real(rational_to_f64(&coeffs.b.abs()).sqrt()),
            phase: CharValue::Phase(chi_inf_rational(&-coeffs.action(x2, x1))),
            exact,
        }),
        (_, ModelCoefficients::Real(c)) => {
            let (y2, y1) = (rational_to_f64(x2), rational_to_f64(x1));
            let s = c[0] * y2 * y2 + c[1] * y2 * y1 + c[2] * y1 * y1 + c[3] * y2 + c[4] * y1 + c[5];
            Ok(PropagatorValue {
                place: v,
                lambda: lambda_inf(-c[1] > 0.0),
                modulus: Modulus::Real(c[1].abs().sqrt()),
                phase: CharValue::Complex(chi_inf(-s)),
                exact: false,
            })
        }
    }
}

/// `∫ K(x″, s+t; y, t)·K(y, t; x′, 0) dy` evaluated in closed form with
/// the Gauss integral, for models with rational action coefficients.
pub fn compose_propagators(
    v: Place,
    model: &QuadraticModel,
    x2: &BigRational,
    t_late: &BigRational,
    t_early: &BigRational,
    x1: &BigRational,
) -> Result<PropagatorValue> {
    if (t_late + t_early).is_zero() {
        return Err(Error::DegenerateTime);
    }
    let rational = |t: &BigRational| match model.coefficients(v, t)? {
        ModelCoefficients::Rational { coeffs, exact: true } => Ok(coeffs),
        _ => Err(Error::OutOfDomain(format!("{} has no exact action coefficients", model.name))),
    };
    let k1 = rational(t_late)?;
    let k2 = rational(t_early)?;
    let alpha = -(&k1.c + &k2.a);
    let beta = -(&k1.b * x2 + &k1.e + &k2.b * x1 + &k2.d);
    let rest = &k1.a * x2 * x2 + &k1.d * x2 + &k1.f + &k2.c * x1 * x1 + &k2.e * x1 + &k2.f;
    let g = gauss_integral(v, &alpha, &beta)?;
    let (lambda, modulus, phase) = match v {
        Place::Finite(p) => {
            let lam = |b: &BigRational| lambda_p(&PAdicRational::new(p, -b / rat(2, 1)));
            let val = |b: &BigRational| rational_valuation(b, p).ok_or(Error::DegenerateTime);
            let half_exponent = -val(&k1.b)? - val(&k2.b)? + val(&g.modulus_sq)?;
            let phase = chi_p(&PAdicRational::new(p, -rest + g.phase.fraction()));
            (lam(&k1.b)? * lam(&k2.b)? * g.lambda, Modulus::PPower { p, half_exponent }, phase)
        }
        Place::Infinity => {
            let lam = |b: &BigRational| lambda_inf((-b).is_positive());
            let modulus_sq = k1.b.abs() * k2.b.abs() * &g.modulus_sq;
            let phase = chi_inf_rational(&(-rest - g.phase.fraction()));
            (lam(&k1.b) * lam(&k2.b) * g.lambda, Modulus::Real(rational_to_f64(&modulus_sq).sqrt()), phase)
        }
    };
    Ok(PropagatorValue { place: v, lambda, modulus, phase: CharValue::Phase(phase), exact: true })
}
