use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{cell_count, checked_pow, decode_index, to_usize, Integrand};
use crate::arith::{cis_fraction, lattice_residue, rational_to_f64, residue_mod_pk, Prime};
use crate::error::{Error, Result};
use crate::padic::{PAdicRational, Valuation};

/// A locally constant, compactly supported function on Q_p^d.
///
/// Supported in `|x_i|_p ≤ p^M` and constant on cosets of `p^N·Z_p^d`. The
/// coset with digit vector `c ∈ [0, p^(M+N))^d` has representative
/// `c·p^(-M)`; values are stored row-major with the first coordinate most
/// significant, which is the lexicographic order of the representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    p: Prime,
    d: usize,
    m: i64,
    n: i64,
    values: Vec<Complex64>,
}

fn grid_side(p: Prime, m: i64, n: i64) -> Result<u64> {
    if m + n < 0 {
        return Err(Error::InvalidStepFunction(format!(
            "support exponent {m} and level {n} need M + N >= 0"
        )));
    }
    checked_pow(p, (m + n) as u32)
}

impl StepFunction {
    pub fn new(p: Prime, d: usize, m: i64, n: i64, values: Vec<Complex64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidStepFunction("dimension must be at least 1".into()));
        }
        let side = grid_side(p, m, n)?;
        let cells = cell_count(side, d)?;
        if values.len() as u64 != cells {
            return Err(Error::InvalidStepFunction(format!(
                "expected {cells} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidStepFunction("values must be finite".into()));
        }
        Ok(StepFunction { p, d, m, n, values })
    }

    pub fn zero(p: Prime, d: usize, m: i64, n: i64) -> Result<Self> {
        let cells = cell_count(grid_side(p, m, n)?, d)?;
        StepFunction::new(p, d, m, n, vec![Complex64::new(0.0, 0.0); to_usize(cells)])
    }

    /// Indicator of the ball `|x|_p ≤ p^r` in every coordinate.
    pub fn ball_indicator(p: Prime, d: usize, r: i64) -> Self {
        StepFunction { p, d, m: r, n: -r, values: vec![Complex64::new(1.0, 0.0)] }
    }

    /// `Ω(|x|_p)`, the indicator of `Z_p^d`.
    pub fn omega(p: Prime, d: usize) -> Self {
        StepFunction::ball_indicator(p, d, 0)
    }

    /// Samples `f` at every coset representative.
    pub fn from_fn<F>(p: Prime, d: usize, m: i64, n: i64, f: F) -> Result<Self>
    where
        F: Fn(&[BigRational]) -> Complex64 + Sync,
    {
        let shell = StepFunction::zero(p, d, m, n)?;
        let values = (0..shell.values.len())
            .into_par_iter()
            .map(|i| f(&shell.rep(i)))
            .collect();
        StepFunction::new(p, d, m, n, values)
    }

    /// Builds a function from `(point, value)` pairs; unlisted cosets are 0.
    pub fn from_entries(
        p: Prime,
        d: usize,
        m: i64,
        n: i64,
        entries: &[(Vec<BigRational>, Complex64)],
    ) -> Result<Self> {
        let mut f = StepFunction::zero(p, d, m, n)?;
        let mut seen = vec![false; f.values.len()];
        for (x, z) in entries {
            if x.len() != d {
                return Err(Error::InvalidStepFunction(format!(
                    "representative has {} coordinates, expected {d}",
                    x.len()
                )));
            }
            let idx = f.coset_index(x).ok_or_else(|| {
                Error::InvalidStepFunction("representative outside the support ball".into())
            })?;
            if seen[idx] && f.values[idx] != *z {
                return Err(Error::InvalidStepFunction("conflicting values for one coset".into()));
            }
            seen[idx] = true;
            f.values[idx] = *z;
        }
        StepFunction::new(p, d, m, n, f.values)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn support_exponent(&self) -> i64 {
        self.m
    }

    pub fn level(&self) -> i64 {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Cosets per coordinate, `p^(M+N)`.
    pub fn side(&self) -> u64 {
        grid_side(self.p, self.m, self.n).expect("validated at construction")
    }

    /// Digit vector of a flat index.
    pub fn digits_of(&self, index: usize) -> Vec<u64> {
        let mut c = vec![0u64; self.d];
        decode_index(index as u64, self.side(), self.d, &mut c);
        c
    }

    /// Coset representative `c·p^(-M)` of a flat index.
    pub fn rep(&self, index: usize) -> Vec<BigRational> {
        let scale = self.p.pow_rational(-self.m);
        self.digits_of(index)
            .into_iter()
            .map(|c| BigRational::from_integer(BigInt::from(c)) * &scale)
            .collect()
    }

    /// Flat index of the coset containing `x`, or `None` outside the support.
    pub fn coset_index(&self, x: &[BigRational]) -> Option<usize> {
        let k = (self.m + self.n) as u32;
        let side = self.side();
        let mut index: u64 = 0;
        for xi in x {
            let inside = match PAdicRational::new(self.p, xi.clone()).valuation() {
                Valuation::Infinity => true,
                Valuation::Finite(v) => v >= -self.m,
            };
            if !inside {
                return None;
            }
            let scaled = xi * self.p.pow_rational(self.m);
            let c = residue_mod_pk(&scaled, self.p, k).ok()?.to_u64()?;
            index = index * side + c;
        }
        Some(to_usize(index))
    }

    pub fn eval(&self, x: &[BigRational]) -> Complex64 {
        match self.coset_index(x) {
            Some(i) => self.values[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    /// Rebuilds on a new grid, with `new[c'] = old[maps[i][c'_i] ...]` and
    /// zero wherever some axis maps outside the old support.
    fn gather(&self, m2: i64, n2: i64, maps: &[Vec<Option<u64>>]) -> Result<Self> {
        let side2 = grid_side(self.p, m2, n2)?;
        let cells = cell_count(side2, self.d)?;
        let side = self.side();
        let d = self.d;
        let values = (0..to_usize(cells))
            .into_par_iter()
            .map(|i| {
                let mut rest = i as u64;
                let mut stride = 1u64;
                let mut old = 0u64;
                for axis in (0..d).rev() {
                    let c = rest % side2;
                    rest /= side2;
                    match maps[axis][c as usize] {
                        Some(o) => old += o * stride,
                        None => return Complex64::new(0.0, 0.0),
                    }
                    stride *= side;
                }
                self.values[to_usize(old)]
            })
            .collect();
        StepFunction::new(self.p, d, m2, n2, values)
    }

    /// The same function on a larger support ball and finer level.
    pub fn regrid(&self, m2: i64, n2: i64) -> Result<Self> {
        if m2 < self.m || n2 < self.n {
            return Err(Error::InvalidStepFunction(format!(
                "cannot regrid ({}, {}) to coarser ({m2}, {n2})",
                self.m, self.n
            )));
        }
        if m2 == self.m && n2 == self.n {
            return Ok(self.clone());
        }
        let side2 = grid_side(self.p, m2, n2)?;
        let side = self.side();
        let shift = checked_pow(self.p, (m2 - self.m) as u32)?;
        let map: Vec<Option<u64>> = (0..side2)
            .map(|c| (c % shift == 0).then(|| (c / shift) % side))
            .collect();
        self.gather(m2, n2, &vec![map; self.d])
    }

    /// Both functions regridded onto the smallest grid holding each.
    pub fn common_grid(&self, other: &Self) -> Result<(Self, Self)> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch { left: self.p.get(), right: other.p.get() });
        }
        if self.d != other.d {
            return Err(Error::InvalidStepFunction(format!(
                "dimension mismatch: {} vs {}",
                self.d, other.d
            )));
        }
        let m = self.m.max(other.m);
        let n = self.n.max(other.n);
        Ok((self.regrid(m, n)?, other.regrid(m, n)?))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        let (a, b) = self.common_grid(other)?;
        let values = a.values.iter().zip(&b.values).map(|(x, y)| op(*x, *y)).collect();
        StepFunction::new(a.p, a.d, a.m, a.n, values)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x * y)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let values = self.values.iter().map(|z| z * c).collect();
        StepFunction { values, ..self.clone() }
    }

    pub fn conj(&self) -> Self {
        let values = self.values.iter().map(|z| z.conj()).collect();
        StepFunction { values, ..self.clone() }
    }

    /// Haar measure of one coset, `p^(-N·d)`.
    pub fn cell_measure(&self) -> f64 {
        rational_to_f64(&self.p.pow_rational(-self.n * self.d as i64))
    }

    /// `∫ f(x) dx` over Q_p^d.
    pub fn integral(&self) -> Complex64 {
        super::chunked_sum(self.values.len(), |i| self.values[i]) * self.cell_measure()
    }

    /// `∫ conj(f)·g`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        let (a, b) = self.common_grid(other)?;
        let s = super::chunked_sum(a.values.len(), |i| a.values[i].conj() * b.values[i]);
        Ok(s * a.cell_measure())
    }

    /// `∫ |f|²`.
    pub fn norm_sq(&self) -> f64 {
        super::chunked_sum(self.values.len(), |i| Complex64::new(self.values[i].norm_sqr(), 0.0)).re
            * self.cell_measure()
    }

    /// Largest pointwise difference after bringing both to a common grid.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let (a, b) = self.common_grid(other)?;
        Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }

    /// `f̃(y) = ∫ f(x)·χ_p(x·y) dx`. Support exponent and level swap.
    pub fn fourier(&self) -> Result<Self> {
        let side = to_usize(self.side());
        let d = self.d;
        let mut data = self.values.clone();
        if side > 1 {
            let fft = FftPlanner::<f64>::new().plan_fft_inverse(side);
            let mut line = vec![Complex64::new(0.0, 0.0); side];
            for axis in 0..d {
                let stride = side.pow((d - 1 - axis) as u32);
                for start in 0..data.len() {
                    if (start / stride) % side != 0 {
                        continue;
                    }
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + k * stride];
                    }
                    fft.process(&mut line);
                    for (k, z) in line.iter().enumerate() {
                        data[start + k * stride] = *z;
                    }
                }
            }
        }
        let scale = self.cell_measure();
        for z in data.iter_mut() {
            *z *= scale;
        }
        StepFunction::new(self.p, d, self.n, self.m, data)
    }

    /// `x ↦ f(-x)`.
    pub fn reflect(&self) -> Self {
        let side = self.side();
        let map: Vec<Option<u64>> = (0..side).map(|c| Some((side - c) % side)).collect();
        self.gather(self.m, self.n, &vec![map; self.d]).expect("same grid")
    }

    /// `x ↦ f(x + b)`.
    pub fn translate(&self, b: &[BigRational]) -> Result<Self> {
        self.check_vector(b)?;
        let mut m2 = self.m;
        for bi in b {
            if let Valuation::Finite(v) = PAdicRational::new(self.p, bi.clone()).valuation() {
                m2 = m2.max(-v);
            }
        }
        let side2 = grid_side(self.p, m2, self.n)?;
        let step = self.p.pow_rational(-m2);
        let one_axis = StepFunction { d: 1, values: Vec::new(), ..self.clone() };
        let maps = b
            .iter()
            .map(|bi| {
                (0..side2)
                    .map(|c| {
                        let y = BigRational::from_integer(BigInt::from(c)) * &step + bi;
                        one_axis.coset_index(std::slice::from_ref(&y)).map(|i| i as u64)
                    })
                    .collect()
            })
            .collect::<Vec<Vec<Option<u64>>>>();
        self.gather(m2, self.n, &maps)
    }

    /// `x ↦ f(x)·χ_p(b·x)`.
    pub fn multiply_char(&self, b: &[BigRational]) -> Result<Self> {
        self.check_vector(b)?;
        let vals: Vec<Option<i64>> = b
            .iter()
            .map(|bi| PAdicRational::new(self.p, bi.clone()).valuation().finite())
            .collect();
        let mut n2 = self.n;
        for v in vals.iter().flatten() {
            n2 = n2.max(-v);
        }
        let g = self.regrid(self.m, n2)?;
        let side = g.side();
        let tables: Vec<Vec<Complex64>> = b
            .iter()
            .zip(&vals)
            .map(|(bi, v)| -> Result<Vec<Complex64>> {
                let Some(v) = v else {
                    return Ok(vec![Complex64::new(1.0, 0.0); side as usize]);
                };
                let e = (g.m - v).max(0);
                let modulus = crate::arith::lattice_modulus(g.p, e as u32)?;
                let bb = lattice_residue(bi, g.p, e - g.m, e as u32)?;
                Ok((0..side as u128).map(|c| cis_fraction(crate::arith::mul_mod(bb, c, modulus), modulus)).collect())
            })
            .collect::<Result<_>>()?;
        let d = g.d;
        let values = g
            .values
            .par_iter()
            .enumerate()
            .map(|(i, z)| {
                let mut rest = i as u64;
                let mut w = *z;
                for axis in (0..d).rev() {
                    w *= tables[axis][(rest % side) as usize];
                    rest /= side;
                }
                w
            })
            .collect();
        StepFunction::new(g.p, d, g.m, g.n, values)
    }

    fn check_vector(&self, b: &[BigRational]) -> Result<()> {
        if b.len() != self.d {
            return Err(Error::InvalidStepFunction(format!(
                "vector has {} coordinates, expected {}",
                b.len(),
                self.d
            )));
        }
        Ok(())
    }

    /// Nonzero cosets as `(representative, value)` pairs, in index order.
    pub fn entries(&self) -> Vec<(Vec<BigRational>, Complex64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, z)| !z.is_zero())
            .map(|(i, z)| (self.rep(i), *z))
            .collect()
    }

    /// Smallest grid on which the function is still represented exactly.
    pub fn compact(&self) -> Self {
        let mut best = self.clone();
        loop {
            let mut improved = false;
            for (dm, dn) in [(-1, 0), (0, -1)] {
                let (m2, n2) = (best.m + dm, best.n + dn);
                if m2 + n2 < 0 {
                    continue;
                }
                if let Some(c) = best.coarsen(m2, n2) {
                    best = c;
                    improved = true;
                }
            }
            if !improved {
                return best;
            }
        }
    }

    fn coarsen(&self, m2: i64, n2: i64) -> Option<Self> {
        let candidate = StepFunction::from_fn(self.p, self.d, m2, n2, |x| self.eval(x)).ok()?;
        let back = candidate.regrid(self.m, self.n).ok()?;
        (back.values == self.values).then_some(candidate)
    }
}

impl Integrand for StepFunction {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[BigRational]) -> Complex64 {
        StepFunction::eval(self, x)
    }
}
