//! Tail models of diagonal sequences and finite parts of the Dirichlet
//! series `Σ_k d(k) k^z`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{cone, creal, czero, Cplx, Real};
use crate::zeta::special::zeta_tail;

/// `d(k)` for `k = 1..=N`, where `d(k)` aggregates the `±k` diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSequence<T: Real> {
    values: Vec<Cplx<T>>,
    pub source: String,
}

impl<T: Real> DiagonalSequence<T> {
    pub fn new(values: Vec<Cplx<T>>, source: impl Into<String>) -> Self {
        assert!(values.iter().all(|v| v.re.is_finite() && v.im.is_finite()), "non-finite diagonal value");
        Self { values, source: source.into() }
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> Cplx<T>, source: impl Into<String>) -> Self {
        Self::new((1..=len).map(f).collect(), source)
    }

    /// Diagonal pairs `M[k,k] + M[-k,-k]` of a mode matrix up to `kmax`.
    pub fn from_matrix(m: &linalg::CMatrix<T>, kmax: usize, source: impl Into<String>) -> Self {
        Self::new(linalg::diagonal_pairs(m, kmax), source)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `d(k)`, 1-based.
    pub fn get(&self, k: usize) -> Cplx<T> {
        self.values[k - 1]
    }

    pub fn values(&self) -> &[Cplx<T>] {
        &self.values
    }

    pub fn linear_combination(&self, a: Cplx<T>, other: &Self, b: Cplx<T>) -> Self {
        assert_eq!(self.len(), other.len());
        Self::new(
            self.values.iter().zip(&other.values).map(|(&x, &y)| x * a + y * b).collect(),
            format!("lincomb({}, {})", self.source, other.source),
        )
    }
}

/// `model(k) = Σ_j c_j k^{-j}` fitted on a window of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailModel<T: Real> {
    /// `c[j]` multiplies `k^{-j}`; orders below `min_order` are pinned to zero.
    pub c: Vec<Cplx<T>>,
    pub fit_window: (usize, usize),
    /// Max `|d(k) - model(k)|` over the window.
    pub residual: T,
    pub condition_estimate: T,
}

impl<T: Real> TailModel<T> {
    pub fn eval(&self, k: usize) -> Cplx<T> {
        let inv = T::one() / T::from_usize_lossy(k);
        self.c.iter().rev().fold(czero(), |acc, &c| acc * inv + c)
    }

    pub fn coefficient(&self, j: usize) -> Cplx<T> {
        self.c.get(j).copied().unwrap_or_else(czero)
    }

    pub fn order(&self) -> usize {
        self.c.len().saturating_sub(1)
    }
}

/// Least-squares fit of `d(k) ≈ Σ_{j=min_order}^{order} c_j k^{-j}` over `window`.
pub fn fit_tail_orders<T: Real>(
    d: &DiagonalSequence<T>,
    min_order: usize,
    order: usize,
    window: (usize, usize),
) -> Result<TailModel<T>> {
    let (lo, hi) = window;
    if lo == 0 || hi > d.len() || hi < lo {
        return Err(Error::Window(format!("window {lo}..={hi} outside 1..={}", d.len())));
    }
    if min_order > order {
        return Err(Error::Window(format!("min order {min_order} exceeds order {order}")));
    }
    let unknowns = order - min_order + 1;
    if hi - lo < unknowns + 2 {
        return Err(Error::Window(format!(
            "window {lo}..={hi} too narrow for {unknowns} coefficients"
        )));
    }
    // Fit d(k) = x^{min_order} Σ_i a_i u^i with x = lo/k and u the affine
    // image of x on [-1, 1]; the centred basis stays well conditioned where
    // raw powers of 1/k are nearly collinear.
    let scale = T::from_usize_lossy(lo);
    let x_lo = scale / T::from_usize_lossy(hi);
    let mid = (T::one() + x_lo) * T::lit(0.5);
    let half = (T::one() - x_lo) * T::lit(0.5);
    let rows = hi - lo + 1;
    let design = Array2::from_shape_fn((rows, unknowns), |(i, j)| {
        let x = scale / T::from_usize_lossy(lo + i);
        x.powi(min_order as i32) * ((x - mid) / half).powi(j as i32)
    });
    let obs: Vec<Cplx<T>> = (lo..=hi).map(|k| d.get(k)).collect();
    let ls = linalg::least_squares(&design, &obs)?;
    // ((x - mid)/half)^i = Σ_l C(i,l) x^l (-mid)^{i-l} / half^i
    let mut in_x = vec![czero::<T>(); unknowns];
    for (i, &a) in ls.coefficients.iter().enumerate() {
        let mut binom = T::one();
        let inv = T::one() / half.powi(i as i32);
        for (l, slot) in in_x.iter_mut().enumerate().take(i + 1) {
            if l > 0 {
                binom = binom * T::from_usize_lossy(i + 1 - l) / T::from_usize_lossy(l);
            }
            *slot += a * (binom * (-mid).powi((i - l) as i32) * inv);
        }
    }
    // x^j = lo^j k^{-j}
    let mut c = vec![czero(); order + 1];
    for (l, v) in in_x.into_iter().enumerate() {
        let j = l + min_order;
        c[j] = v * scale.powi(j as i32);
    }
    Ok(TailModel {
        c,
        fit_window: window,
        residual: ls.residual_max,
        condition_estimate: ls.condition_estimate,
    })
}

/// Least-squares fit of `d(k) ≈ Σ_{j<=order} c_j k^{-j}` over `window`.
pub fn fit_tail<T: Real>(d: &DiagonalSequence<T>, order: usize, window: (usize, usize)) -> Result<TailModel<T>> {
    if window.1 < window.0 + order + 3 {
        return Err(Error::Window(format!(
            "window {}..={} needs width >= order + 3 = {}",
            window.0,
            window.1,
            order + 3
        )));
    }
    fit_tail_orders(d, 0, order, window)
}

/// Finite part and residue at `z = 0` of the continuation of `Σ_k d(k) k^z`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePartResult<T: Real> {
    pub finite_part: Cplx<T>,
    /// Laurent residue at `z = 0`; equals `-c₁`.
    pub pole_residue: Cplx<T>,
    /// Max deviation of the tail model over its fit window.
    pub tail_residual: T,
    /// Estimate of `Σ_{k>K} |d(k) - model(k)|`.
    pub truncation_bound: T,
    pub split: usize,
}

fn dropped_tail_bound<T: Real>(d: &DiagonalSequence<T>, model: &TailModel<T>, split: usize) -> T {
    let known: T = (split + 1..=d.len()).map(|k| (d.get(k) - model.eval(k)).norm()).sum();
    // beyond the data the deviation is O(k^{-(J+1)}), anchored at the window end
    let j1 = model.order() + 1;
    let end = model.fit_window.1.max(split).max(d.len());
    let anchor = T::from_usize_lossy(model.fit_window.1);
    let amplitude = model.residual * anchor.powi(j1 as i32);
    let tail = amplitude * T::from_usize_lossy(end).powi(-(j1 as i32 - 1)) / T::from_usize_lossy(j1 - 1).max(T::one());
    known + tail
}

/// `fp_{z=0} Σ_k d(k) k^z`
/// `= Σ_{k<=K}(d(k) - model(k)) + c₀ζ(0) + c₁γ + Σ_{j>=2} c_j ζ(j)`,
/// with Laurent residue `-c₁` (from `c₁ζ(1-z) = -c₁/z + c₁γ + O(z)`).
///
/// Evaluated as `Σ_{k<=K} d(k) + Σ_j c_j ζ_K(j)` with the tails
/// `ζ_K(j) = Σ_{k>K} k^{-j}` (finite part at `j = 1`), so the model is never
/// evaluated at small `k` where high-order coefficients would cancel.
pub fn finite_part_dirichlet<T: Real>(
    d: &DiagonalSequence<T>,
    model: &TailModel<T>,
    split: usize,
) -> Result<FinitePartResult<T>> {
    if split > d.len() {
        return Err(Error::Window(format!("split {split} beyond sequence length {}", d.len())));
    }
    let mut head = czero::<T>();
    for k in 1..=split {
        head += d.get(k);
    }
    let mut channels = czero::<T>();
    for (j, &c) in model.c.iter().enumerate() {
        if c.norm().is_zero() {
            continue;
        }
        channels += c * zeta_tail(creal(T::from_usize_lossy(j)), split)?;
    }
    Ok(FinitePartResult {
        finite_part: head + channels,
        pole_residue: -model.coefficient(1),
        tail_residual: model.residual,
        truncation_bound: dropped_tail_bound(d, model, split),
        split,
    })
}

/// Continuation of `Σ_k d(k) k^z` to complex `z`:
/// `Σ_{k<=K}(d(k) - model(k)) k^z + Σ_j c_j ζ(j - z)`, evaluated as
/// `Σ_{k<=K} d(k) k^z + Σ_j c_j ζ_K(j - z)`.
pub fn dirichlet_continuation<T: Real>(
    d: &DiagonalSequence<T>,
    model: &TailModel<T>,
    split: usize,
    z: Cplx<T>,
) -> Result<Cplx<T>> {
    if split > d.len() {
        return Err(Error::Window(format!("split {split} beyond sequence length {}", d.len())));
    }
    let mut head = czero::<T>();
    for k in 1..=split {
        let w = (z * T::from_usize_lossy(k).ln()).exp();
        head += d.get(k) * w;
    }
    let mut tail = czero::<T>();
    for (j, &c) in model.c.iter().enumerate() {
        if c.norm().is_zero() {
            continue;
        }
        let arg = creal::<T>(T::from_usize_lossy(j)) - z;
        if (arg - cone::<T>()).norm() <= T::epsilon() {
            return Err(Error::OnPole(format!("z = {}{:+}i", z.re, z.im)));
        }
        tail += c * zeta_tail(arg, split)?;
    }
    Ok(head + tail)
}
