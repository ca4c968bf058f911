//! Zeroth-order operators on the circle in the Fourier basis `e^{ikθ}`.
//!
//! An operator is stored by its diagonals: each [`Term`] places a
//! [`MultiplierExpansion`] on the `shift`-th diagonal, so that
//! `A e^{inθ} = Σ_terms mult(n) e^{i(n+shift)θ}`. A finite [`Smoothing`] block
//! carries content that has no symbol.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{cone, creal, czero, uniform_stream, Cplx, Real};

/// Finitely supported Fourier series `Σ_k c_k e^{ikθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries<T: Real> {
    coeffs: BTreeMap<i64, Cplx<T>>,
}

impl<T: Real> Default for FourierSeries<T> {
    fn default() -> Self {
        Self { coeffs: BTreeMap::new() }
    }
}

impl<T: Real> FourierSeries<T> {
    pub fn new(coeffs: BTreeMap<i64, Cplx<T>>) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Self { coeffs }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, Cplx<T>)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in pairs {
            *coeffs.entry(k).or_insert_with(czero) += c;
        }
        Self::new(coeffs)
    }

    pub fn constant(c: T) -> Self {
        Self::from_pairs([(0, creal(c))])
    }

    /// `a0 + Σ (a_k cos kθ + b_k sin kθ)` from `(k, a_k, b_k)` triples.
    pub fn real_trig(a0: T, modes: &[(i64, T, T)]) -> Self {
        let half = T::lit(0.5);
        let mut pairs = vec![(0, creal(a0))];
        for &(k, a, b) in modes {
            assert!(k > 0, "trigonometric modes use k >= 1");
            // a cos + b sin = (a - ib)/2 e^{ikθ} + (a + ib)/2 e^{-ikθ}
            pairs.push((k, Cplx::new(a * half, -b * half)));
            pairs.push((-k, Cplx::new(a * half, b * half)));
        }
        Self::from_pairs(pairs)
    }

    pub fn coeff(&self, k: i64) -> Cplx<T> {
        self.coeffs.get(&k).copied().unwrap_or_else(czero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Cplx<T>)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn max_frequency(&self) -> i64 {
        self.coeffs.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    /// `c(-k) = conj(c(k))` for every `k`, within `tol`.
    pub fn is_real_valued(&self, tol: T) -> bool {
        self.coeffs
            .iter()
            .all(|(&k, &c)| (self.coeff(-k) - c.conj()).norm() <= tol)
    }

    pub fn eval(&self, theta: T) -> Cplx<T> {
        self.iter().fold(czero(), |acc, (k, c)| {
            let phase = theta * T::from_i64_lossy(k);
            acc + c * Cplx::new(phase.cos(), phase.sin())
        })
    }

    /// Fourier coefficients of `exp(self)`, by sampling on a uniform grid.
    ///
    /// Coefficients below `1e-18` of the largest one are dropped.
    pub fn exp(&self) -> Self {
        let kmax = self.max_frequency().max(1) as usize;
        let samples = (16 * kmax).next_power_of_two().max(256);
        let keep = (samples / 4) as i64;
        let two_pi = T::PI() + T::PI();
        let values: Vec<Cplx<T>> = (0..samples)
            .map(|j| {
                let theta = two_pi * T::from_usize_lossy(j) / T::from_usize_lossy(samples);
                self.eval(theta).exp()
            })
            .collect();
        let inv = T::one() / T::from_usize_lossy(samples);
        let mut out: BTreeMap<i64, Cplx<T>> = BTreeMap::new();
        for k in -keep..=keep {
            let mut acc = czero::<T>();
            for (j, &v) in values.iter().enumerate() {
                let idx = ((k * j as i64).rem_euclid(samples as i64)) as usize;
                let phase = -two_pi * T::from_usize_lossy(idx) / T::from_usize_lossy(samples);
                acc += v * Cplx::new(phase.cos(), phase.sin());
            }
            out.insert(k, acc * inv);
        }
        let largest = out.values().fold(T::zero(), |a, c| a.max(c.norm()));
        let floor = largest * T::lit(1e-18);
        Self::new(out.into_iter().filter(|(_, c)| c.norm() > floor).collect())
    }
}

/// Values of one diagonal as a function of the column mode `n`:
/// `Σ_j c_j^± |n|^{-j}` on the two rays, with finitely many overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierExpansion<T: Real> {
    plus: Vec<Cplx<T>>,
    minus: Vec<Cplx<T>>,
    exceptional: BTreeMap<i64, Cplx<T>>,
}

impl<T: Real> MultiplierExpansion<T> {
    /// The exceptional set must contain `k = 0`.
    pub fn new(plus: Vec<Cplx<T>>, minus: Vec<Cplx<T>>, exceptional: BTreeMap<i64, Cplx<T>>) -> Result<Self> {
        if !exceptional.contains_key(&0) {
            return Err(Error::Spec("multiplier exceptional set must contain k = 0".into()));
        }
        Ok(Self { plus, minus, exceptional })
    }

    pub fn constant(c: Cplx<T>) -> Self {
        Self {
            plus: vec![c],
            minus: vec![c],
            exceptional: BTreeMap::from([(0, c)]),
        }
    }

    /// `|k|^{-power}` on both rays, zero at `k = 0`.
    pub fn inverse_power(power: usize, c: Cplx<T>) -> Self {
        let mut coeffs = vec![czero(); power + 1];
        coeffs[power] = c;
        Self {
            plus: coeffs.clone(),
            minus: coeffs,
            exceptional: BTreeMap::from([(0, czero())]),
        }
    }

    /// `c / (1 + |k|)`, expanded as `c Σ_{j≥1} (-1)^{j-1} |k|^{-j}` to `order` terms
    /// with exact values stored for `|k| <= exact_below`.
    pub fn reciprocal_shifted(c: Cplx<T>, order: usize, exact_below: i64) -> Self {
        let mut coeffs = vec![czero(); order + 1];
        for (j, slot) in coeffs.iter_mut().enumerate().skip(1) {
            let sign = if j % 2 == 1 { T::one() } else { -T::one() };
            *slot = c * sign;
        }
        let mut exceptional = BTreeMap::new();
        for k in -exact_below..=exact_below {
            exceptional.insert(k, c / (T::one() + T::from_i64_lossy(k.abs())));
        }
        Self { plus: coeffs.clone(), minus: coeffs, exceptional }
    }

    pub fn plus(&self) -> &[Cplx<T>] {
        &self.plus
    }

    pub fn minus(&self) -> &[Cplx<T>] {
        &self.minus
    }

    pub fn exceptional(&self) -> &BTreeMap<i64, Cplx<T>> {
        &self.exceptional
    }

    pub fn eval(&self, k: i64) -> Cplx<T> {
        if let Some(&v) = self.exceptional.get(&k) {
            return v;
        }
        let coeffs = if k > 0 { &self.plus } else { &self.minus };
        let inv = T::one() / T::from_i64_lossy(k.abs());
        // Horner in 1/|k|
        coeffs.iter().rev().fold(czero(), |acc, &c| acc * inv + c)
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        Self {
            plus: self.plus.iter().map(|&c| c * s).collect(),
            minus: self.minus.iter().map(|&c| c * s).collect(),
            exceptional: self.exceptional.iter().map(|(&k, &c)| (k, c * s)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.plus.iter().chain(&self.minus).chain(self.exceptional.values()).all(|c| c.is_zero())
    }
}

/// One diagonal of a circle operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Term<T: Real> {
    pub shift: i64,
    pub mult: MultiplierExpansion<T>,
}

/// Seeded pseudo-random smoothing block with Gaussian envelope
/// `amplitude · exp(-(m² + n²)/width²)` on `|m|, |n| <= support`.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothing<T: Real> {
    pub seed: u64,
    pub amplitude: T,
    pub width: T,
    pub support: usize,
    /// Overall complex factor, 1 for freshly generated blocks.
    pub scale: Cplx<T>,
    entries: Array2<Cplx<T>>,
}

impl<T: Real> Smoothing<T> {
    pub fn generate(seed: u64, amplitude: T, width: T, support: usize, scale: Cplx<T>) -> Self {
        let dim = 2 * support + 1;
        let mut uniform = uniform_stream::<T>(seed);
        let s = support as i64;
        let mut entries = Array2::zeros((dim, dim));
        for m in -s..=s {
            for n in -s..=s {
                let re = uniform();
                let im = uniform();
                let r2 = T::from_i64_lossy(m * m + n * n);
                let env = amplitude * (-(r2 / (width * width))).exp();
                entries[[(m + s) as usize, (n + s) as usize]] = Cplx::new(re, im) * env * scale;
            }
        }
        Self { seed, amplitude, width, support, scale, entries }
    }

    pub fn entry(&self, m: i64, n: i64) -> Cplx<T> {
        let s = self.support as i64;
        if m.abs() > s || n.abs() > s {
            return czero();
        }
        self.entries[[(m + s) as usize, (n + s) as usize]]
    }

    fn rescaled(&self, factor: Cplx<T>) -> Self {
        Self {
            seed: self.seed,
            amplitude: self.amplitude,
            width: self.width,
            support: self.support,
            scale: self.scale * factor,
            entries: self.entries.mapv(|z| z * factor),
        }
    }
}

/// Zeroth-order operator on the circle: finitely many diagonals plus an
/// optional smoothing block. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleOperator<T: Real> {
    terms: Vec<Term<T>>,
    smoothing: Option<Smoothing<T>>,
}

impl<T: Real> Default for CircleOperator<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> CircleOperator<T> {
    pub fn new(terms: Vec<Term<T>>, smoothing: Option<Smoothing<T>>) -> Self {
        Self { terms, smoothing }
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new(), smoothing: None }
    }

    pub fn identity() -> Self {
        Self::scalar(cone())
    }

    pub fn scalar(c: Cplx<T>) -> Self {
        Self::single(0, MultiplierExpansion::constant(c))
    }

    pub fn single(shift: i64, mult: MultiplierExpansion<T>) -> Self {
        Self { terms: vec![Term { shift, mult }], smoothing: None }
    }

    /// `c · e^{ijθ}`: maps `e^{inθ}` to `c e^{i(n+j)θ}`.
    pub fn shift(j: i64, c: Cplx<T>) -> Self {
        Self::single(j, MultiplierExpansion::constant(c))
    }

    /// Diagonal operator with the given multiplier.
    pub fn diagonal(mult: MultiplierExpansion<T>) -> Self {
        Self::single(0, mult)
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn smoothing(&self) -> Option<&Smoothing<T>> {
        self.smoothing.as_ref()
    }

    /// Largest `|shift|` among the diagonals.
    pub fn bandwidth(&self) -> usize {
        self.terms.iter().map(|t| t.shift.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Largest `|m - n|` with a possibly nonzero entry, smoothing included.
    pub fn reach(&self) -> usize {
        let smooth = self.smoothing.as_ref().map_or(0, |s| 2 * s.support);
        self.bandwidth().max(smooth)
    }

    pub fn entry(&self, m: i64, n: i64) -> Cplx<T> {
        let mut acc = czero::<T>();
        for term in &self.terms {
            if term.shift == m - n {
                acc += term.mult.eval(n);
            }
        }
        if let Some(s) = &self.smoothing {
            acc += s.entry(m, n);
        }
        acc
    }

    /// Dense `P_n A P_n` on modes `-n..=n`.
    pub fn truncate(&self, n: usize) -> CMatrix<T> {
        let dim = 2 * n + 1;
        let ni = n as i64;
        let mut m = Array2::zeros((dim, dim));
        for term in &self.terms {
            for col in -ni..=ni {
                let row = col + term.shift;
                if row.abs() > ni {
                    continue;
                }
                m[[(row + ni) as usize, (col + ni) as usize]] += term.mult.eval(col);
            }
        }
        if let Some(s) = &self.smoothing {
            let reach = (s.support.min(n)) as i64;
            for row in -reach..=reach {
                for col in -reach..=reach {
                    m[[(row + ni) as usize, (col + ni) as usize]] += s.entry(row, col);
                }
            }
        }
        m
    }

    /// The `k`-th Fourier component: entries on the diagonal `m - n = k`.
    pub fn fourier_component(&self, k: i64) -> Self {
        let terms = self.terms.iter().filter(|t| t.shift == k).cloned().collect::<Vec<_>>();
        let smoothing_part = self.smoothing.as_ref().and_then(|s| {
            let sup = s.support as i64;
            let mut exceptional = BTreeMap::new();
            for n in -sup..=sup {
                let v = s.entry(n + k, n);
                if !v.is_zero() {
                    exceptional.insert(n, v);
                }
            }
            exceptional.entry(0).or_insert_with(czero);
            if exceptional.values().all(|v| v.is_zero()) {
                None
            } else {
                Some(Term {
                    shift: k,
                    mult: MultiplierExpansion { plus: vec![], minus: vec![], exceptional },
                })
            }
        });
        let mut terms = terms;
        terms.extend(smoothing_part);
        Self { terms, smoothing: None }
    }

    pub fn scale(&self, c: Cplx<T>) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term { shift: t.shift, mult: t.mult.scale(c) })
                .collect(),
            smoothing: self.smoothing.as_ref().map(|s| s.rescaled(c)),
        }
    }

    /// `self + other`; at most one summand may carry a smoothing block.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let smoothing = match (&self.smoothing, &other.smoothing) {
            (Some(_), Some(_)) => {
                return Err(Error::Combine("both summands carry a smoothing block".into()))
            }
            (Some(s), None) | (None, Some(s)) => Some(s.clone()),
            (None, None) => None,
        };
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { terms, smoothing })
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> Self {
        let mut out = self.scale(-cone::<T>());
        out.terms.insert(0, Term { shift: 0, mult: MultiplierExpansion::constant(cone()) });
        out
    }

    pub fn with_smoothing(&self, smoothing: Smoothing<T>) -> Result<Self> {
        self.add(&Self { terms: vec![], smoothing: Some(smoothing) })
    }
}

/// Multiplication by `f`: `(M_f)_{m,n} = f̂(m - n)`.
pub fn mk_multiplication<T: Real>(fhat: &FourierSeries<T>) -> CircleOperator<T> {
    CircleOperator::new(
        fhat.iter()
            .map(|(k, c)| Term { shift: k, mult: MultiplierExpansion::constant(c) })
            .collect(),
        None,
    )
}

/// Pure smoothing operator (no diagonals).
pub fn mk_smoothing<T: Real>(seed: u64, amplitude: T, width: T, support: usize) -> CircleOperator<T> {
    assert!(amplitude >= T::zero() && width > T::zero());
    CircleOperator::new(vec![], Some(Smoothing::generate(seed, amplitude, width, support, cone())))
}

/// Seeded operator with one term per shift in `-bandwidth..=bandwidth`.
///
/// Each ray carries independent complex coefficients `c_j`, `j <= order`,
/// uniform in the box of half-side `amplitude · 2^{-j}`; the value at `k = 0`
/// is the `+` ray's constant.
pub fn random_banded<T: Real>(seed: u64, bandwidth: usize, order: usize, amplitude: T) -> CircleOperator<T> {
    let mut uniform = uniform_stream::<T>(seed);
    let b = bandwidth as i64;
    let mut terms = Vec::with_capacity(2 * bandwidth + 1);
    for shift in -b..=b {
        let ray = |uniform: &mut dyn FnMut() -> T| -> Vec<Cplx<T>> {
            (0..=order)
                .map(|j| {
                    let a = amplitude * T::lit(0.5f64.powi(j as i32));
                    Cplx::new(uniform() * a, uniform() * a)
                })
                .collect()
        };
        let plus = ray(&mut uniform);
        let minus = ray(&mut uniform);
        let zero = plus[0];
        terms.push(Term { shift, mult: MultiplierExpansion { plus, minus, exceptional: BTreeMap::from([(0, zero)]) } });
    }
    CircleOperator::new(terms, None)
}

/// `I + random_banded(..)`.
pub fn near_identity<T: Real>(seed: u64, bandwidth: usize, order: usize, amplitude: T) -> CircleOperator<T> {
    CircleOperator::identity()
        .add(&random_banded(seed, bandwidth, order, amplitude))
        .expect("no smoothing blocks")
}

pub fn entry<T: Real>(a: &CircleOperator<T>, m: i64, n: i64) -> Cplx<T> {
    a.entry(m, n)
}

pub fn truncate<T: Real>(a: &CircleOperator<T>, n: usize) -> CMatrix<T> {
    a.truncate(n)
}

pub fn fourier_component<T: Real>(a: &CircleOperator<T>, k: i64) -> CircleOperator<T> {
    a.fourier_component(k)
}

/// Largest singular value of `P_n A P_n`.
pub fn op_norm_estimate<T: Real>(a: &CircleOperator<T>, n: usize) -> T {
    linalg::spectral_norm(&a.truncate(n))
}

/// `max(0, j₁, j₁+j₂, …, j₁+⋯+j_r)`.
pub fn sigma_of_j(j: &[i64]) -> i64 {
    let mut partial = 0i64;
    let mut best = 0i64;
    for &step in j {
        partial += step;
        best = best.max(partial);
    }
    best
}

/// Right-hand side of the Fourier-block trace identity for `tr (P_n A P_n)^r`.
///
/// Sums, over step vectors `j` with zero total, the diagonal of the product of
/// Fourier components along every mode whose orbit stays inside the window.
/// On the positive ray the constraint is `k + σ(j) <= n`; the reflection
/// `θ -> -θ` maps the negative ray onto the positive one with `j -> -j`, so the
/// mode `-k` is kept when `k + σ(-j) <= n`.
pub fn decomposition_trace<T: Real>(a: &CircleOperator<T>, r: usize, n: usize) -> Result<Cplx<T>> {
    assert!(r >= 1);
    let band = a.reach();
    if band * r > n {
        return Err(Error::EdgeAmbiguity { bandwidth: band, r, n });
    }
    let w = band as i64;
    let ni = n as i64;
    let mut total = czero::<T>();
    let mut steps = vec![-w; r];
    loop {
        if steps.iter().sum::<i64>() == 0 {
            let up = sigma_of_j(&steps);
            let negated: Vec<i64> = steps.iter().map(|s| -s).collect();
            let down = sigma_of_j(&negated);
            let orbit = |start: i64| -> Cplx<T> {
                let mut pos = start;
                let mut prod = cone::<T>();
                for &step in &steps {
                    let next = pos + step;
                    prod *= a.entry(next, pos);
                    if prod.is_zero() {
                        break;
                    }
                    pos = next;
                }
                prod
            };
            // π₀ is one-dimensional; the k = 0 orbit obeys both constraints
            if up.max(down) <= ni {
                total += orbit(0);
            }
            for k in 1..=ni {
                if k + up <= ni {
                    total += orbit(k);
                }
                if k + down <= ni {
                    total += orbit(-k);
                }
            }
        }
        // odometer over [-w, w]^r
        let mut idx = 0;
        loop {
            if idx == r {
                return Ok(total);
            }
            if steps[idx] < w {
                steps[idx] += 1;
                break;
            }
            steps[idx] = -w;
            idx += 1;
        }
    }
}

/// How `Q^z` acts on the constant mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroMode {
    /// `Q^z 1 = 0`.
    #[default]
    Annihilate,
    /// `Q^z 1 = 1`: the regularizer `Q + Π₀`, positive and with the same symbol.
    Identity,
}

/// The circle regularizer `c·|D|`: `Q^z e^{ikθ} = (c|k|)^z e^{ikθ}` for `k ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZollRegularizer<T: Real> {
    pub scale: T,
    pub zero_mode: ZeroMode,
}

impl<T: Real> Default for ZollRegularizer<T> {
    fn default() -> Self {
        Self { scale: T::one(), zero_mode: ZeroMode::Annihilate }
    }
}

impl<T: Real> ZollRegularizer<T> {
    pub fn new(scale: T) -> Self {
        assert!(scale > T::zero(), "regularizer scale must be positive");
        Self { scale, zero_mode: ZeroMode::Annihilate }
    }

    pub fn with_zero_mode(self, zero_mode: ZeroMode) -> Self {
        Self { zero_mode, ..self }
    }

    /// Eigenvalue of `Q^z` on `e^{ikθ}`.
    pub fn power_weight(&self, k: i64, z: Cplx<T>) -> Cplx<T> {
        if k == 0 {
            return match self.zero_mode {
                ZeroMode::Annihilate => czero(),
                ZeroMode::Identity => cone(),
            };
        }
        let lg = (self.scale * T::from_i64_lossy(k.abs())).ln();
        (z * lg).exp()
    }

    /// Eigenvalue of `log Q` on `e^{ikθ}` (zero on constants).
    pub fn log_eigenvalue(&self, k: i64) -> T {
        if k == 0 {
            T::zero()
        } else {
            (self.scale * T::from_i64_lossy(k.abs())).ln()
        }
    }

    /// Truncation of `log Q` on modes `-n..=n`.
    pub fn log_matrix(&self, n: usize) -> CMatrix<T> {
        let ni = n as i64;
        let diag: Vec<Cplx<T>> = (-ni..=ni).map(|k| creal(self.log_eigenvalue(k))).collect();
        Array2::from_diag(&ndarray::Array1::from(diag))
    }
}

/// Finite composition of circle operators, truncated exactly: intermediate
/// modes are padded by the total reach before cropping.
#[derive(Debug, Clone)]
pub struct OperatorProduct<'a, T: Real> {
    factors: Vec<&'a CircleOperator<T>>,
}

impl<'a, T: Real> OperatorProduct<'a, T> {
    pub fn new(factors: Vec<&'a CircleOperator<T>>) -> Self {
        assert!(!factors.is_empty());
        Self { factors }
    }
}

/// Anything that yields `P_n X P_n` for the operator `X` it stands for.
pub trait Truncatable<T: Real> {
    fn truncation(&self, n: usize) -> CMatrix<T>;
}

impl<T: Real> Truncatable<T> for CircleOperator<T> {
    fn truncation(&self, n: usize) -> CMatrix<T> {
        self.truncate(n)
    }
}

impl<T: Real> Truncatable<T> for OperatorProduct<'_, T> {
    fn truncation(&self, n: usize) -> CMatrix<T> {
        if self.factors.len() == 1 {
            return self.factors[0].truncate(n);
        }
        let pad: usize = self
            .factors
            .iter()
            .map(|f| {
                let smooth = f.smoothing().map_or(0, |s| s.support.saturating_sub(n));
                f.bandwidth().max(smooth)
            })
            .sum();
        let outer = n + pad;
        let mut acc = self.factors[0].truncate(outer);
        for f in &self.factors[1..] {
            acc = acc.dot(&f.truncate(outer));
        }
        linalg::crop(&acc, n)
    }
}

impl<T: Real, F: Fn(usize) -> CMatrix<T>> Truncatable<T> for F {
    fn truncation(&self, n: usize) -> CMatrix<T> {
        self(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn multiplication_by_one_is_identity() {
        let id = mk_multiplication(&FourierSeries::<f64>::constant(1.0));
        assert_eq!(id.truncate(2), linalg::identity::<f64>(5));
        assert_eq!(id.entry(5, 5), c(1.0));
    }

    #[test]
    fn cosine_multiplier_terms() {
        let f = FourierSeries::real_trig(1.0, &[(1, 0.3, 0.0)]);
        let m = mk_multiplication(&f);
        let mut shifts: Vec<(i64, Complex64)> = m.terms().iter().map(|t| (t.shift, t.mult.eval(7))).collect();
        shifts.sort_by_key(|t| t.0);
        assert_eq!(shifts.len(), 3);
        assert!((shifts[0].1 - c(0.15)).norm() < 1e-16);
        assert!((shifts[1].1 - c(1.0)).norm() < 1e-16);
        assert!((shifts[2].1 - c(0.15)).norm() < 1e-16);
        assert!(f.is_real_valued(0.0));
    }

    #[test]
    fn pure_shift_entries() {
        let s = mk_multiplication(&FourierSeries::from_pairs([(1, c(1.0))]));
        assert_eq!(s.entry(3, 2), c(1.0));
        assert_eq!(s.entry(2, 3), c(0.0));
        let t = s.truncate(1);
        let mut expected = Array2::zeros((3, 3));
        expected[[1, 0]] = c(1.0);
        expected[[2, 1]] = c(1.0);
        assert_eq!(t, expected);
    }

    #[test]
    fn multiplier_expansion_value() {
        let op = CircleOperator::diagonal(MultiplierExpansion::inverse_power(1, c(1.0)));
        assert_eq!(op.entry(4, 4), c(0.25));
        assert_eq!(op.entry(-4, -4), c(0.25));
        assert_eq!(op.entry(0, 0), c(0.0));
    }

    #[test]
    fn reciprocal_shifted_matches_closed_form() {
        let m = MultiplierExpansion::reciprocal_shifted(c(1.0), 24, 40);
        for k in [-100i64, -41, -3, 0, 5, 41, 60, 500] {
            let exact = 1.0 / (1.0 + k.abs() as f64);
            assert!((m.eval(k) - c(exact)).norm() < 1e-15 * 1e3, "k = {k}");
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_of_j(&[0, 0]), 0);
        assert_eq!(sigma_of_j(&[2, -2]), 2);
        assert_eq!(sigma_of_j(&[-1, 3, -2]), 2);
    }

    #[test]
    fn zero_amplitude_smoothing_is_zero() {
        let s = mk_smoothing::<f64>(7, 0.0, 4.0, 5);
        assert!(s.truncate(6).iter().all(|z| z.is_zero()));
    }

    #[test]
    fn smoothing_is_deterministic() {
        let a = mk_smoothing::<f64>(42, 1e-2, 4.0, 20);
        let b = mk_smoothing::<f64>(42, 1e-2, 4.0, 20);
        assert_eq!(a, b);
        let other = mk_smoothing::<f64>(43, 1e-2, 4.0, 20);
        assert_ne!(a, other);
    }

    #[test]
    fn component_of_single_term() {
        let op = CircleOperator::single(2, MultiplierExpansion::inverse_power(1, c(0.5)));
        assert_eq!(op.fourier_component(2), op);
        let zero = op.fourier_component(1);
        assert!(zero.truncate(4).iter().all(|z| z.is_zero()));
    }

    #[test]
    fn component_of_multiplication() {
        let f = FourierSeries::real_trig(0.2, &[(1, 0.6, 0.0), (2, 0.0, 0.1)]);
        let m = mk_multiplication(&f);
        for k in -2..=2 {
            let comp = m.fourier_component(k);
            assert_eq!(comp.terms().len(), 1);
            assert_eq!(comp.entry(10 + k, 10), f.coeff(k));
        }
    }

    #[test]
    fn norm_of_shift_and_identity() {
        assert!((op_norm_estimate(&CircleOperator::<f64>::identity(), 4) - 1.0).abs() < 1e-12);
        let s = CircleOperator::shift(1, Complex64::new(0.0, 0.7));
        assert!((op_norm_estimate(&s, 3) - 0.7).abs() < 1e-10);
    }

    #[test]
    fn decomposition_rejects_edge() {
        let s = CircleOperator::<f64>::shift(3, c(1.0));
        assert!(matches!(decomposition_trace(&s, 2, 5), Err(Error::EdgeAmbiguity { .. })));
    }

    #[test]
    fn decomposition_r1_is_plain_trace() {
        let a = CircleOperator::diagonal(MultiplierExpansion::inverse_power(1, c(1.0)))
            .add(&CircleOperator::shift(1, c(0.3)))
            .unwrap();
        let lhs = decomposition_trace(&a, 1, 9).unwrap();
        let rhs = linalg::trace(&a.truncate(9));
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn product_truncation_is_exact() {
        let a = CircleOperator::shift(2, c(0.5)).add(&CircleOperator::identity()).unwrap();
        let b = CircleOperator::shift(-1, c(0.25))
            .add(&CircleOperator::diagonal(MultiplierExpansion::inverse_power(1, c(1.0))))
            .unwrap();
        let prod = OperatorProduct::new(vec![&a, &b]);
        let n = 6;
        let t = prod.truncation(n);
        for m in -(n as i64)..=n as i64 {
            for k in -(n as i64)..=n as i64 {
                let exact: Complex64 = (-20..=20).map(|l| a.entry(m, l) * b.entry(l, k)).sum();
                assert!((linalg::mode_entry(&t, m, k) - exact).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn exp_of_cosine_series() {
        // exp(x cos θ) has coefficients I_k(x); I_0(0.6) = 1.0920453744...
        let l = FourierSeries::<f64>::real_trig(0.0, &[(1, 0.6, 0.0)]);
        let f = l.exp();
        assert!((f.coeff(0).re - 1.092_045_364_317_339_4).abs() < 1e-14);
        assert!(f.is_real_valued(1e-15));
    }
}
