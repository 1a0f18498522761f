//! The p-adic Moyal star product
//!
//! `(f ∗ g)(x) = ∫∫ χ_p(-(x·k + x·k') + ½·k_i k'_j θ^ij) f̃(k) g̃(k') dk dk'`
//!
//! on step functions of `d ≥ 2` variables, summed over all index pairs
//! `(i, j)`. Integrating out `k'` turns the double sum into
//!
//! `(f ∗ g)(x) = Σ_t f_t(x)·g(x - t)`,
//!
//! where `t = ½·θᵀk` runs over the distinct shifts modulo the level of `g`
//! and `f_t` is the inverse transform of `f̃` restricted to the `k` producing
//! shift `t`. Every sum is finite.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::arith::{residue_mod_pk, Prime};
use crate::characters::{chi_p, UnitPhase};
use crate::error::{Error, Result};
use crate::integrate::StepFunction;
use crate::padic::PAdicRational;

const AGREEMENT_TOLERANCE: f64 = 1e-9;

/// An antisymmetric `d × d` matrix of noncommutativity parameters `θ^ij`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaMatrix {
    p: Prime,
    d: usize,
    entries: Vec<BigRational>,
}

impl ThetaMatrix {
    /// From a row-major `d × d` array.
    pub fn new(p: Prime, d: usize, entries: Vec<BigRational>) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if entries.len() != d * d {
            return Err(Error::InvalidArgument(format!(
                "theta needs {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        for i in 0..d {
            for j in 0..d {
                if entries[i * d + j] != -entries[j * d + i].clone() {
                    return Err(Error::InvalidArgument(format!(
                        "theta is not antisymmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(ThetaMatrix { p, d, entries })
    }

    pub fn zero(p: Prime, d: usize) -> Result<Self> {
        ThetaMatrix::new(p, d, vec![BigRational::zero(); d * d])
    }

    /// The `d = 2` matrix with `θ^12 = theta`.
    pub fn planar(p: Prime, theta: BigRational) -> Self {
        let entries = vec![BigRational::zero(), theta.clone(), -theta, BigRational::zero()];
        ThetaMatrix { p, d: 2, entries }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.d + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// Smallest p-adic valuation among the entries, `None` for `θ = 0`.
    pub fn min_valuation(&self) -> Option<i64> {
        self.entries
            .iter()
            .filter_map(|q| PAdicRational::new(self.p, q.clone()).valuation().finite())
            .min()
    }
}

fn check_inputs(f: &StepFunction, g: &StepFunction, theta: &ThetaMatrix) -> Result<()> {
    for h in [f, g] {
        if h.dim() < 2 {
            return Err(Error::DimensionTooSmall(h.dim()));
        }
        if h.prime() != theta.p {
            return Err(Error::PrimeMismatch { left: h.prime().get(), right: theta.p.get() });
        }
        if h.dim() != theta.d {
            return Err(Error::InvalidStepFunction(format!(
                "function has dimension {}, theta has {}",
                h.dim(),
                theta.d
            )));
        }
    }
    Ok(())
}

/// `f ∗ g` for the noncommutativity matrix `theta`.
///
/// When every phase `½·k θ k'` over the Fourier supports lies in `Z_p` the
/// result is the pointwise product, returned as [`StepFunction::mul`] gives
/// it. Otherwise p = 2 is rejected with
/// [`Error::HalfIntegerObstruction`].
pub fn star_product(f: &StepFunction, g: &StepFunction, theta: &ThetaMatrix) -> Result<StepFunction> {
    check_inputs(f, g, theta)?;
    let p = theta.p;
    let Some(v_theta) = theta.min_valuation() else {
        return f.mul(g);
    };
    let v_half = if p.get() == 2 { v_theta - 1 } else { v_theta };
    let (n_f, n_g) = (f.level(), g.level());
    if n_f + n_g <= v_half {
        return f.mul(g);
    }
    if p.get() == 2 {
        let worst = theta.entries.iter().find(|q| {
            PAdicRational::new(p, (*q).clone()).valuation().finite() == Some(v_theta)
        });
        return Err(Error::HalfIntegerObstruction(
            worst.map(|q| q.to_string()).unwrap_or_default(),
        ));
    }

    let d = theta.d;
    let half: Vec<BigRational> =
        theta.entries.iter().map(|q| q / BigRational::from_integer(BigInt::from(2))).collect();
    let k_level = f.support_exponent().max(n_g - v_half);
    let spectrum = f.fourier()?.regrid(n_f, k_level)?;
    let shift_exp = n_f - v_half;
    let key_digits = (shift_exp + n_g) as u32;
    let shift_scale = p.pow_rational(shift_exp);
    let inv_scale = p.pow_rational(-shift_exp);

    let mut classes: BTreeMap<Vec<BigInt>, Vec<usize>> = BTreeMap::new();
    for (i, z) in spectrum.values().iter().enumerate() {
        if z.is_zero() {
            continue;
        }
        let k = spectrum.rep(i);
        let key = (0..d)
            .map(|j| {
                let t: BigRational = (0..d).map(|a| &k[a] * &half[a * d + j]).sum();
                residue_mod_pk(&(t * &shift_scale), p, key_digits)
            })
            .collect::<Result<Vec<_>>>()?;
        classes.entry(key).or_default().push(i);
    }
    if classes.is_empty() {
        return f.mul(g);
    }

    let classes: Vec<(Vec<BigInt>, Vec<usize>)> = classes.into_iter().collect();
    let terms = classes
        .par_iter()
        .map(|(key, cells)| -> Result<StepFunction> {
            let mut masked = vec![Complex64::zero(); spectrum.values().len()];
            for &i in cells {
                masked[i] = spectrum.values()[i];
            }
            let piece = StepFunction::new(p, d, n_f, k_level, masked)?.fourier()?.reflect();
            let shift: Vec<BigRational> = key
                .iter()
                .map(|r| -BigRational::from_integer(r.clone()) * &inv_scale)
                .collect();
            piece.mul(&g.translate(&shift)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut terms = terms.into_iter();
    let first = terms.next().expect("at least one class");
    terms.try_fold(first, |acc, t| acc.add(&t))
}

/// Measures the exponentiated commutator of the coordinates `x_1` and `x_2`.
///
/// Both orderings of `(χ_p(αx_1)·w) ∗ (χ_p(βx_2)·w)` are compared, cell by
/// cell, with the star product of the unwindowed plane waves,
/// `χ_p((α, β)·x ± ½αβθ^12)`. On the cells where both agree the ratio of the
/// two orderings must be `χ_p(αβθ^12)`, which is returned.
pub fn commutator_check(
    alpha: &PAdicRational,
    beta: &PAdicRational,
    theta: &ThetaMatrix,
    window: &StepFunction,
) -> Result<UnitPhase> {
    let p = theta.p;
    for x in [alpha, beta] {
        if x.prime() != p {
            return Err(Error::PrimeMismatch { left: x.prime().get(), right: p.get() });
        }
    }
    check_inputs(window, window, theta)?;
    let d = theta.d;
    let mut a = vec![BigRational::zero(); d];
    let mut b = vec![BigRational::zero(); d];
    a[0] = alpha.value().clone();
    b[1] = beta.value().clone();
    let f = window.multiply_char(&a)?;
    let g = window.multiply_char(&b)?;
    let (fg, gf) = star_product(&f, &g, theta)?.common_grid(&star_product(&g, &f, theta)?)?;

    let ab_theta = alpha.value() * beta.value() * theta.entry(0, 1);
    let half = &ab_theta / BigRational::from_integer(BigInt::from(2));
    let expected = chi_p(&PAdicRational::new(p, ab_theta));
    let expected_z = expected.to_complex();
    let mut agreeing = 0usize;
    for i in 0..fg.values().len() {
        let x = fg.rep(i);
        let wave = &a[0] * &x[0] + &b[1] * &x[1];
        let forward = chi_p(&PAdicRational::new(p, &wave + &half)).to_complex();
        let backward = chi_p(&PAdicRational::new(p, &wave - &half)).to_complex();
        let (u, w) = (fg.values()[i], gf.values()[i]);
        if (u - forward).norm() > AGREEMENT_TOLERANCE || (w - backward).norm() > AGREEMENT_TOLERANCE {
            continue;
        }
        agreeing += 1;
        if (u / w - expected_z).norm() > AGREEMENT_TOLERANCE {
            return Err(Error::NotProportional);
        }
    }
    if agreeing == 0 {
        return Err(Error::WindowTooSmall);
    }
    Ok(expected)
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

    fn pr(prime: Prime, n: i64, d: i64) -> PAdicRational {
        PAdicRational::new(prime, q(n, d))
    }

    fn omega2(prime: Prime) -> StepFunction {
        StepFunction::omega(prime, 2)
    }

    #[test]
    fn zero_theta_is_pointwise() {
        let f = StepFunction::from_fn(p(3), 2, 1, 0, |x| {
            Complex64::new(x[0].numer().to_string().len() as f64, 1.0)
        })
        .unwrap();
        let g = StepFunction::ball_indicator(p(3), 2, 0);
        let theta = ThetaMatrix::zero(p(3), 2).unwrap();
        assert_eq!(star_product(&f, &g, &theta).unwrap(), f.mul(&g).unwrap());
    }

    #[test]
    fn vacuum_is_fixed_for_integral_theta() {
        for (prime, t) in [(3, q(1, 1)), (5, q(2, 7)), (3, q(3, 1))] {
            let theta = ThetaMatrix::planar(p(prime), t);
            let w = omega2(p(prime));
            assert_eq!(star_product(&w, &w, &theta).unwrap(), w);
        }
    }

    #[test]
    fn large_theta_changes_the_vacuum() {
        let w = omega2(p(3));
        let star = star_product(&w, &w, &ThetaMatrix::planar(p(3), q(1, 3))).unwrap();
        let diff = star.max_abs_diff(&w).unwrap();
        assert!(diff > 0.1, "{diff}");
        let probe = [q(0, 1), q(0, 1)];
        assert!((star.eval(&probe) - w.eval(&probe)).norm() > 0.1);
    }

    #[test]
    fn large_theta_vacuum_by_direct_double_sum() {
        let prime = p(3);
        let theta = q(1, 3);
        let star = star_product(&omega2(prime), &omega2(prime), &ThetaMatrix::planar(prime, theta.clone())).unwrap();
        let ks: Vec<[BigRational; 2]> = (0..9).map(|i| [q(i / 3, 1), q(i % 3, 1)]).collect();
        let xs: Vec<[BigRational; 2]> = (0..9).map(|i| [q(i / 3, 3), q(i % 3, 3)]).collect();
        for x in &xs {
            let mut sum = Complex64::zero();
            for k in &ks {
                for kk in &ks {
                    let phase = -(&x[0] * (&k[0] + &kk[0]) + &x[1] * (&k[1] + &kk[1]))
                        + (&k[0] * &kk[1] - &k[1] * &kk[0]) * &theta / q(2, 1);
                    sum += chi_p(&PAdicRational::new(prime, phase)).to_complex();
                }
            }
            let expected = sum / 81.0;
            assert!((star.eval(x) - expected).norm() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn dimension_and_parity_errors() {
        assert!(matches!(ThetaMatrix::zero(p(3), 1), Err(Error::DimensionTooSmall(1))));
        let theta = ThetaMatrix::planar(p(3), q(1, 3));
        let line = StepFunction::omega(p(3), 1);
        assert!(matches!(star_product(&line, &line, &theta), Err(Error::DimensionTooSmall(1))));
        let two = p(2);
        let w = omega2(two);
        assert!(matches!(
            star_product(&w, &w, &ThetaMatrix::planar(two, q(1, 1))),
            Err(Error::HalfIntegerObstruction(_))
        ));
        assert_eq!(star_product(&w, &w, &ThetaMatrix::planar(two, q(2, 1))).unwrap(), w);
        let bad = ThetaMatrix::new(p(3), 2, vec![q(0, 1), q(1, 1), q(1, 1), q(0, 1)]);
        assert!(matches!(bad, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn commutator_phase() {
        let five = p(5);
        let window = StepFunction::ball_indicator(five, 2, 1);
        let phase =
            commutator_check(&pr(five, 1, 1), &pr(five, 1, 1), &ThetaMatrix::planar(five, q(1, 5)), &window)
                .unwrap();
        assert_eq!(phase, UnitPhase::from_fraction(1, 5).unwrap());
        let phase = commutator_check(&pr(five, 1, 1), &pr(five, 1, 1), &ThetaMatrix::zero(five, 2).unwrap(), &window)
            .unwrap();
        assert!(phase.is_trivial());
        let phase =
            commutator_check(&pr(five, 1, 1), &pr(five, 1, 1), &ThetaMatrix::planar(five, q(3, 1)), &window)
                .unwrap();
        assert!(phase.is_trivial());
        let phase =
            commutator_check(&pr(five, 2, 5), &pr(five, 3, 1), &ThetaMatrix::planar(five, q(1, 5)), &window);
        assert!(matches!(phase, Err(Error::WindowTooSmall)));
        let wide = StepFunction::ball_indicator(five, 2, 2);
        let phase =
            commutator_check(&pr(five, 2, 5), &pr(five, 3, 1), &ThetaMatrix::planar(five, q(1, 5)), &wide)
                .unwrap();
        assert_eq!(phase, UnitPhase::from_fraction(6, 25).unwrap());
    }

    #[test]
    fn commutator_window_too_small() {
        let five = p(5);
        let window = StepFunction::omega(five, 2);
        let r = commutator_check(&pr(five, 1, 1), &pr(five, 1, 1), &ThetaMatrix::planar(five, q(1, 25)), &window);
        assert!(matches!(r, Err(Error::WindowTooSmall)), "{r:?}");
    }

    fn step(prime: u64, m: i64, n: i64, values: Vec<(i8, i8)>) -> StepFunction {
        let vals = values.into_iter().map(|(a, b)| Complex64::new(a as f64, b as f64)).collect();
        StepFunction::new(p(prime), 2, m, n, vals).unwrap()
    }

    fn arb_step(prime: u64) -> impl Strategy<Value = StepFunction> {
        prop_oneof![Just((0i64, 0i64)), Just((1, 0)), Just((0, 1)), Just((1, -1)), Just((-1, 1))]
            .prop_flat_map(move |(m, n)| {
                let cells = (prime.pow((m + n) as u32)).pow(2) as usize;
                proptest::collection::vec((-3i8..=3, -3i8..=3), cells)
                    .prop_map(move |v| step(prime, m, n, v))
            })
    }

    fn arb_theta(prime: u64) -> impl Strategy<Value = ThetaMatrix> {
        (-4i64..=4, -1i64..=1)
            .prop_map(move |(num, v)| ThetaMatrix::planar(p(prime), q(num, 1) * p(prime).pow_rational(v)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn degeneracy(f in arb_step(3), g in arb_step(3)) {
            let theta = ThetaMatrix::zero(p(3), 2).unwrap();
            prop_assert_eq!(star_product(&f, &g, &theta).unwrap(), f.mul(&g).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn associativity(f in arb_step(3), g in arb_step(3), h in arb_step(3), theta in arb_theta(3)) {
            let left = star_product(&star_product(&f, &g, &theta).unwrap(), &h, &theta).unwrap();
            let right = star_product(&f, &star_product(&g, &h, &theta).unwrap(), &theta).unwrap();
            prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-9);
        }

        #[test]
        fn linearity(f in arb_step(3), f2 in arb_step(3), g in arb_step(3), theta in arb_theta(3), c in -3i8..=3) {
            let c = Complex64::new(c as f64, 1.0);
            let sum = f.scale(c).add(&f2).unwrap();
            let left = star_product(&sum, &g, &theta).unwrap();
            let right = star_product(&f, &g, &theta).unwrap().scale(c).add(&star_product(&f2, &g, &theta).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
            let left = star_product(&g, &sum, &theta).unwrap();
            let right = star_product(&g, &f, &theta).unwrap().scale(c).add(&star_product(&g, &f2, &theta).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
        }

        #[test]
        fn triviality_band(f in arb_step(5), g in arb_step(5), num in -6i64..=6, v in 0i64..=2) {
            prop_assume!(f.level() <= 0 && g.level() <= 0);
            let theta = ThetaMatrix::planar(p(5), q(num, 1) * p(5).pow_rational(v));
            prop_assert_eq!(star_product(&f, &g, &theta).unwrap(), f.mul(&g).unwrap());
        }
    }
}
