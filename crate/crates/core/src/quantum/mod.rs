//! p-adic quantum mechanics with `h = 1`.
//!
//! Wave functions are [`StepFunction`]s on Q_p. The Weyl operators act as
//!
//! * `Q(α)ψ(x) = χ_p(αx)·ψ(x)`
//! * `K(β)ψ(x) = ψ(x + β)`
//! * `W(q, k) = χ_p(-qk/2)·K(q)·Q(k)`
//!
//! With these definitions `Q(α)K(β) = χ_p(-αβ)·K(β)Q(α)`.
//! [`commutation_check`] measures the phase on every coset and reports whether
//! it equals `χ_p(αβ)` or `χ_p(-αβ)`.

mod kernel;
mod model;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::characters::{chi_p, UnitPhase};
use crate::error::{Error, Result};
use crate::integrate::StepFunction;
use crate::padic::{PAdicRational, Valuation};
use crate::arith::Prime;

pub use kernel::{eigen_check, kernel_apply, EigenOutcome};
pub use model::{
    compose_propagators, minisuperspace_model, propagator, ActionCoefficients, ModelCoefficients, ModelKind, Modulus,
    PropagatorValue, QuadraticModel,
};

const PHASE_TOLERANCE: f64 = 1e-9;

/// A point `z = (q, k)` of the phase space Q_p × Q_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePoint {
    q: PAdicRational,
    k: PAdicRational,
}

impl PhasePoint {
    pub fn new(q: PAdicRational, k: PAdicRational) -> Result<Self> {
        if q.prime() != k.prime() {
            return Err(Error::PrimeMismatch { left: q.prime().get(), right: k.prime().get() });
        }
        Ok(PhasePoint { q, k })
    }

    pub fn from_rationals(p: Prime, q: BigRational, k: BigRational) -> Self {
        PhasePoint { q: PAdicRational::new(p, q), k: PAdicRational::new(p, k) }
    }

    pub fn origin(p: Prime) -> Self {
        PhasePoint { q: PAdicRational::zero(p), k: PAdicRational::zero(p) }
    }

    pub fn q(&self) -> &PAdicRational {
        &self.q
    }

    pub fn k(&self) -> &PAdicRational {
        &self.k
    }

    pub fn prime(&self) -> Prime {
        self.q.prime()
    }

    pub fn neg(&self) -> Self {
        PhasePoint { q: self.q.neg(), k: self.k.neg() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        PhasePoint::new(self.q.add(&other.q)?, self.k.add(&other.k)?)
    }

    /// `B(z, z′) = -k·q′ + q·k′`.
    pub fn symplectic(&self, other: &Self) -> Result<PAdicRational> {
        self.k.mul(&other.q)?.neg().add(&self.q.mul(&other.k)?)
    }
}

/// An element `(z, α)` of the Heisenberg–Weyl group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HWGroupElement {
    pub z: PhasePoint,
    pub alpha: PAdicRational,
}

impl HWGroupElement {
    pub fn new(z: PhasePoint, alpha: PAdicRational) -> Result<Self> {
        if z.prime() != alpha.prime() {
            return Err(Error::PrimeMismatch { left: z.prime().get(), right: alpha.prime().get() });
        }
        Ok(HWGroupElement { z, alpha })
    }

    pub fn identity(p: Prime) -> Self {
        HWGroupElement { z: PhasePoint::origin(p), alpha: PAdicRational::zero(p) }
    }

    pub fn inverse(&self) -> Self {
        HWGroupElement { z: self.z.neg(), alpha: self.alpha.neg() }
    }
}

/// `(z, α)·(z′, α′) = (z + z′, α + α′ + B(z, z′)/2)`.
pub fn hw_group_product(g1: &HWGroupElement, g2: &HWGroupElement) -> Result<HWGroupElement> {
    let p = g1.z.prime();
    let half = PAdicRational::new(p, BigRational::new(1.into(), 2.into()));
    let correction = g1.z.symplectic(&g2.z)?.mul(&half)?;
    HWGroupElement::new(g1.z.add(&g2.z)?, g1.alpha.add(&g2.alpha)?.add(&correction)?)
}

/// One of the Weyl operators.
#[derive(Debug, Clone, PartialEq)]
pub enum WeylOp {
    /// `Q(α)`: multiplication by `χ_p(αx)`.
    Q(PAdicRational),
    /// `K(β)`: translation by `β`.
    K(PAdicRational),
    /// `W(z)`.
    W(PhasePoint),
}

impl WeylOp {
    fn prime(&self) -> Prime {
        match self {
            WeylOp::Q(a) | WeylOp::K(a) => a.prime(),
            WeylOp::W(z) => z.prime(),
        }
    }
}

fn check_wave(psi: &StepFunction, p: Prime) -> Result<()> {
    if psi.prime() != p {
        return Err(Error::PrimeMismatch { left: psi.prime().get(), right: p.get() });
    }
    if psi.dim() != 1 {
        return Err(Error::InvalidStepFunction(format!(
            "wave functions live on Q_p, got dimension {}",
            psi.dim()
        )));
    }
    Ok(())
}

/// The phase `χ_p(-qk/2)` in `W(q, k)`.
///
/// At `p = 2` with `v_2(qk) ≤ 0` the value depends on `qk` modulo `2·Z_2`
/// rather than modulo `Z_2`, so it is refused.
fn weyl_prefactor(z: &PhasePoint) -> Result<UnitPhase> {
    let p = z.prime();
    let qk = z.q.mul(&z.k)?;
    if p.get() == 2 {
        if let Valuation::Finite(v) = qk.valuation() {
            if v <= 0 {
                return Err(Error::HalfIntegerObstruction(qk.to_string()));
            }
        }
    }
    let half = BigRational::new((-1).into(), 2.into());
    Ok(chi_p(&PAdicRational::new(p, qk.value() * half)))
}

/// Applies `Q(α)`, `K(β)` or `W(z)` to a wave function.
pub fn weyl_apply(op: &WeylOp, psi: &StepFunction) -> Result<StepFunction> {
    check_wave(psi, op.prime())?;
    match op {
        WeylOp::Q(alpha) => psi.multiply_char(std::slice::from_ref(alpha.value())),
        WeylOp::K(beta) => psi.translate(std::slice::from_ref(beta.value())),
        WeylOp::W(z) => {
            let phase = weyl_prefactor(z)?;
            let inner = psi.multiply_char(std::slice::from_ref(z.k.value()))?;
            let shifted = inner.translate(std::slice::from_ref(z.q.value()))?;
            Ok(shifted.scale(phase.to_complex()))
        }
    }
}

/// Which candidate phase the measured commutator matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutationSign {
    /// `χ_p(αβ)`.
    Plus,
    /// `χ_p(-αβ)`.
    Minus,
    /// `χ_p(αβ) = χ_p(-αβ)`, so the two cannot be told apart.
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commutation {
    pub phase: UnitPhase,
    pub sign: CommutationSign,
}

/// Measures the constant `φ` with `Q(α)K(β)ψ = φ·K(β)Q(α)ψ` on every coset.
pub fn commutation_check(
    alpha: &PAdicRational,
    beta: &PAdicRational,
    psi: &StepFunction,
) -> Result<Commutation> {
    let p = alpha.prime();
    if beta.prime() != p {
        return Err(Error::PrimeMismatch { left: p.get(), right: beta.prime().get() });
    }
    check_wave(psi, p)?;
    if psi.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let qk = weyl_apply(&WeylOp::Q(alpha.clone()), &weyl_apply(&WeylOp::K(beta.clone()), psi)?)?;
    let kq = weyl_apply(&WeylOp::K(beta.clone()), &weyl_apply(&WeylOp::Q(alpha.clone()), psi)?)?;
    let (a, b) = qk.common_grid(&kq)?;
    let (pivot, scale) = b
        .values()
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.norm()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if scale == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let phi = a.values()[pivot] / b.values()[pivot];
    let consistent = a
        .values()
        .iter()
        .zip(b.values())
        .all(|(x, y)| (x - phi * y).norm() <= PHASE_TOLERANCE * scale.max(1.0));
    if !consistent {
        return Err(Error::NotProportional);
    }
    let ab = alpha.mul(beta)?;
    let plus = chi_p(&ab);
    let minus = chi_p(&ab.neg());
    let near = |u: &UnitPhase| (u.to_complex() - phi).norm() <= PHASE_TOLERANCE;
    match (near(&plus), near(&minus)) {
        (true, true) => Ok(Commutation { phase: plus, sign: CommutationSign::Both }),
        (true, false) => Ok(Commutation { phase: plus, sign: CommutationSign::Plus }),
        (false, true) => Ok(Commutation { phase: minus, sign: CommutationSign::Minus }),
        (false, false) => Err(Error::NotProportional),
    }
}

fn is_unit_phase(z: Complex64) -> bool {
    (z.norm() - 1.0).abs() <= PHASE_TOLERANCE
}

/// The constant `c` with `a = c·b` on every coset, if there is one.
pub fn proportionality(a: &StepFunction, b: &StepFunction) -> Result<Option<Complex64>> {
    let (a, b) = a.common_grid(b)?;
    let pivot = b
        .values()
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let scale = b.values()[pivot].norm();
    if scale == 0.0 {
        return Ok(a.is_zero().then(Complex64::one));
    }
    let c = a.values()[pivot] / b.values()[pivot];
    let ok = a
        .values()
        .iter()
        .zip(b.values())
        .all(|(x, y)| (x - c * y).norm() <= PHASE_TOLERANCE * scale.max(1.0));
    Ok(ok.then_some(c))
}

/// Whether `a = e^{iθ}·b` for some constant unit phase.
pub fn equal_up_to_phase(a: &StepFunction, b: &StepFunction) -> Result<bool> {
    Ok(proportionality(a, b)?.is_some_and(|c| is_unit_phase(c) || (a.is_zero() && b.is_zero())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::StepFunction;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn pr(pp: Prime, n: i64, d: i64) -> PAdicRational {
        PAdicRational::new(pp, BigRational::new(n.into(), d.into()))
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn translation_by_zero_is_identity() {
        let psi = StepFunction::from_fn(p(3), 1, 1, 1, |x| Complex64::new(x[0].numer().to_string().len() as f64, 0.5)).unwrap();
        let out = weyl_apply(&WeylOp::K(pr(p(3), 0, 1)), &psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn qk_on_vacuum_at_minus_third() {
        let three = p(3);
        let omega = StepFunction::omega(three, 1);
        let k = weyl_apply(&WeylOp::K(pr(three, 1, 3)), &omega).unwrap();
        let qk = weyl_apply(&WeylOp::Q(pr(three, 1, 3)), &k).unwrap();
        let value = qk.eval(&[q(-1, 3)]);
        let expected = UnitPhase::new(q(8, 9)).to_complex();
        assert!((value - expected).norm() < 1e-12, "{value} vs {expected}");
    }

    #[test]
    fn weyl_inverse_pair_is_identity() {
        for pp in [3u64, 5, 7] {
            let pp = p(pp);
            let psi = StepFunction::from_fn(pp, 1, 1, 1, |x| {
                let s = crate::arith::rational_to_f64(&x[0]);
                Complex64::new(s.cos() + 0.3, s * 0.2)
            })
            .unwrap();
            let z = PhasePoint::new(pr(pp, 2, pp.get() as i64), pr(pp, 1, 3)).unwrap();
            let there = weyl_apply(&WeylOp::W(z.clone()), &psi).unwrap();
            let back = weyl_apply(&WeylOp::W(z.neg()), &there).unwrap();
            assert!(back.max_abs_diff(&psi).unwrap() < 1e-12);
            assert!(equal_up_to_phase(&back, &psi).unwrap());
        }
    }

    #[test]
    fn half_integer_obstruction_at_two() {
        let two = p(2);
        let omega = StepFunction::omega(two, 1);
        let z = PhasePoint::new(pr(two, 1, 1), pr(two, 1, 1)).unwrap();
        assert!(matches!(weyl_apply(&WeylOp::W(z), &omega), Err(Error::HalfIntegerObstruction(_))));
        let z = PhasePoint::new(pr(two, 2, 1), pr(two, 1, 1)).unwrap();
        assert!(weyl_apply(&WeylOp::W(z), &omega).is_ok());
    }

    #[test]
    fn prime_mismatch_is_reported() {
        let omega = StepFunction::omega(p(3), 1);
        assert!(matches!(
            weyl_apply(&WeylOp::Q(pr(p(5), 1, 5)), &omega),
            Err(Error::PrimeMismatch { .. })
        ));
        assert!(PhasePoint::new(pr(p(3), 1, 1), pr(p(5), 1, 1)).is_err());
    }

    #[test]
    fn commutation_examples() {
        let three = p(3);
        let omega = StepFunction::omega(three, 1);
        let c = commutation_check(&pr(three, 0, 1), &pr(three, 1, 3), &omega).unwrap();
        assert!(c.phase.is_trivial());
        assert_eq!(c.sign, CommutationSign::Both);

        let c = commutation_check(&pr(three, 1, 3), &pr(three, 1, 3), &omega).unwrap();
        assert_eq!(c.phase, UnitPhase::new(q(8, 9)));
        assert_eq!(c.sign, CommutationSign::Minus);

        let c = commutation_check(&pr(three, 9, 1), &pr(three, 1, 3), &omega).unwrap();
        assert!(c.phase.is_trivial());

        let zero = StepFunction::zero(three, 1, 0, 0).unwrap();
        assert_eq!(commutation_check(&pr(three, 1, 3), &pr(three, 1, 3), &zero), Err(Error::ZeroFunction));
    }

    #[test]
    fn commutation_phase_matches_pointwise_oracle() {
        let three = p(3);
        let psi = StepFunction::from_fn(three, 1, 1, 2, |x| {
            let s = crate::arith::rational_to_f64(&x[0]);
            Complex64::new(1.0 + s, -s * s)
        })
        .unwrap();
        let (a, b) = (q(2, 9), q(5, 3));
        let c = commutation_check(&pr(three, 2, 9), &pr(three, 5, 3), &psi).unwrap();
        for xi in -20i64..20 {
            let x = q(xi, 9);
            let y = &x + &b;
            let val = psi.eval(std::slice::from_ref(&y));
            if val.norm() == 0.0 {
                continue;
            }
            let lhs = chi_p(&PAdicRational::new(three, &a * &x)).to_complex() * val;
            let rhs = chi_p(&PAdicRational::new(three, &a * &y)).to_complex() * val;
            assert!((lhs - c.phase.to_complex() * rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn hw_product_examples() {
        let five = p(5);
        let g1 = HWGroupElement::new(PhasePoint::new(pr(five, 1, 1), pr(five, 0, 1)).unwrap(), pr(five, 0, 1)).unwrap();
        let g2 = HWGroupElement::new(PhasePoint::new(pr(five, 0, 1), pr(five, 1, 1)).unwrap(), pr(five, 0, 1)).unwrap();
        let g = hw_group_product(&g1, &g2).unwrap();
        assert_eq!(g.z.q().value(), &q(1, 1));
        assert_eq!(g.z.k().value(), &q(1, 1));
        assert_eq!(g.alpha.value(), &q(1, 2));

        let h = HWGroupElement::new(PhasePoint::new(pr(five, 3, 5), pr(five, -7, 2)).unwrap(), pr(five, 1, 3)).unwrap();
        assert_eq!(hw_group_product(&h, &h.inverse()).unwrap(), HWGroupElement::identity(five));

        let other = HWGroupElement::identity(p(7));
        assert!(matches!(hw_group_product(&h, &other), Err(Error::PrimeMismatch { .. })));
    }

    fn element(pp: Prime) -> impl Strategy<Value = HWGroupElement> {
        let r = || (-30i64..30, 1i64..20).prop_map(|(n, d)| (n, d));
        (r(), r(), r()).prop_map(move |(a, b, c)| {
            HWGroupElement::new(
                PhasePoint::new(pr(pp, a.0, a.1), pr(pp, b.0, b.1)).unwrap(),
                pr(pp, c.0, c.1),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn hw_product_is_associative(a in element(p(3)), b in element(p(3)), c in element(p(3))) {
            let left = hw_group_product(&hw_group_product(&a, &b).unwrap(), &c).unwrap();
            let right = hw_group_product(&a, &hw_group_product(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn commutation_phase_is_constant(
            an in -12i64..12, ak in 0u32..3, bn in -12i64..12, bk in 0u32..3,
            vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5),
        ) {
            let five = p(5);
            let psi = StepFunction::new(five, 1, 1, 0, vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
            prop_assume!(!psi.is_zero());
            let alpha = pr(five, an, 5i64.pow(ak));
            let beta = pr(five, bn, 5i64.pow(bk));
            let c = commutation_check(&alpha, &beta, &psi).unwrap();
            let expected = chi_p(&alpha.mul(&beta).unwrap().neg());
            prop_assert_eq!(c.phase, expected);
        }
    }
}
