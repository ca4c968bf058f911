//! Operator logarithm on truncations and the zeta-regularized `log det`
//! `w_Q(B) = fp_{z=0} tr (log B) Q^z`.

use crate::circle::{Truncatable, ZeroMode, ZollRegularizer};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{creal, czero, Cplx, Real};
use crate::zeta::finite_part::{
    dirichlet_continuation, finite_part_dirichlet, fit_tail, DiagonalSequence, FinitePartResult, TailModel,
};

/// Norm ceiling for the logarithm series.
pub const LOG_SERIES_MAX_NORM: f64 = 0.95;

/// Outcome of a truncated-matrix logarithm.
#[derive(Debug, Clone)]
pub struct MatrixLog<T: Real> {
    pub log: CMatrix<T>,
    /// Positive scalar `s` with `log M = log(s) I + log(M/s)`.
    pub rescale: T,
    /// Upper bound on the spectral norm of `I - M/s`.
    pub series_norm: T,
    pub terms: usize,
}

/// `log M = log(s)·I - Σ_{r>=1} (I - M/s)^r / r`.
///
/// `s` is `1` or the mean diagonal value, whichever gives the smaller
/// `‖I - M/s‖₂`; the series is summed until the remainder bound
/// `ρ^{R+1}/((R+1)(1-ρ))` drops below `tol`.
pub fn matrix_log_dense<T: Real>(m: &CMatrix<T>, tol: T) -> Result<MatrixLog<T>> {
    let dim = m.nrows();
    let id = linalg::identity::<T>(dim);
    let mean = (linalg::trace(m) / T::from_usize_lossy(dim)).re;
    let mut candidates = vec![T::one()];
    if mean > T::zero() && (mean - T::one()).abs() > T::lit(1e-12) {
        candidates.push(mean);
    }
    let mut best: Option<(T, T, CMatrix<T>)> = None;
    for s in candidates {
        let x = &id - &m.mapv(|v| v / s);
        let rho = linalg::spectral_norm_bound(&x);
        if best.as_ref().is_none_or(|(_, r, _)| rho < *r) {
            best = Some((s, rho, x));
        }
    }
    let (s, rho, x) = best.expect("at least one candidate");
    if rho > T::lit(LOG_SERIES_MAX_NORM) {
        return Err(Error::LogSeriesDiverges {
            norm: rho.to_f64_lossy(),
            limit: LOG_SERIES_MAX_NORM,
        });
    }
    let mut terms = 1usize;
    if rho > T::zero() {
        loop {
            let next = T::from_usize_lossy(terms + 1);
            let bound = rho.powi((terms + 1) as i32) / (next * (T::one() - rho));
            if bound < tol || terms >= 5000 {
                break;
            }
            terms += 1;
        }
    }
    let mut coeffs = vec![czero::<T>(); terms + 1];
    for (r, slot) in coeffs.iter_mut().enumerate().skip(1) {
        *slot = creal(-T::one() / T::from_usize_lossy(r));
    }
    let mut log = linalg::matrix_polynomial(&x, &coeffs);
    let ls = s.ln();
    if ls != T::zero() {
        for i in 0..dim {
            log[[i, i]] += creal(ls);
        }
    }
    Ok(MatrixLog { log, rescale: s, series_norm: rho, terms })
}

/// Logarithm of the `n_outer` truncation of `B`.
pub fn matrix_log<T: Real, B: Truncatable<T> + ?Sized>(b: &B, n_outer: usize, tol: T) -> Result<CMatrix<T>> {
    Ok(matrix_log_dense(&b.truncation(n_outer), tol)?.log)
}

/// Truncation and tail-fit parameters shared by the zeta-side computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaParams<T: Real> {
    /// Outer truncation half-width `N`.
    pub n_outer: usize,
    /// Inner window `K = N/2` used for diagonal extraction.
    pub n_inner: usize,
    /// Tail expansion order `J`.
    pub tail_order: usize,
    /// Fit window `[lo, hi]`; defaults to `[K/2, K]`.
    pub window: (usize, usize),
    pub log_tol: T,
}

impl<T: Real> ZetaParams<T> {
    pub fn with_outer(n_outer: usize) -> Self {
        let n_inner = n_outer / 2;
        Self {
            n_outer,
            n_inner,
            tail_order: 4,
            window: (n_inner / 2, n_inner),
            log_tol: T::lit(1e-14),
        }
    }

    /// Same ratios at twice the outer truncation.
    pub fn doubled(&self) -> Self {
        let mut p = Self::with_outer(2 * self.n_outer);
        p.tail_order = self.tail_order;
        p.log_tol = self.log_tol;
        p
    }
}

impl<T: Real> Default for ZetaParams<T> {
    fn default() -> Self {
        Self::with_outer(200)
    }
}

/// Fits the diagonal pairs of a mode matrix and returns the sequence and model.
pub fn diagonal_tail<T: Real>(
    m: &CMatrix<T>,
    params: &ZetaParams<T>,
    source: &str,
) -> Result<(DiagonalSequence<T>, TailModel<T>)> {
    let d = DiagonalSequence::from_matrix(m, params.n_inner, source);
    let model = fit_tail(&d, params.tail_order, params.window)?;
    Ok((d, model))
}

/// `fp_{z=0} tr(X Q^z)` for a mode matrix `X`, with the regularizer's scale
/// and zero-mode convention applied.
pub fn regularized_trace<T: Real>(
    x: &CMatrix<T>,
    q: &ZollRegularizer<T>,
    params: &ZetaParams<T>,
    source: &str,
) -> Result<FinitePartResult<T>> {
    let (d, model) = diagonal_tail(x, params, source)?;
    let mut fp = finite_part_dirichlet(&d, &model, params.n_inner)?;
    // (c k)^z = c^z k^z shifts the finite part by residue · log c
    fp.finite_part += fp.pole_residue * q.scale.ln();
    if q.zero_mode == ZeroMode::Identity {
        fp.finite_part += linalg::mode_entry(x, 0, 0);
    }
    Ok(fp)
}

/// `w_Q(B)` from an already computed `log B` truncation.
pub fn w_q_from_log<T: Real>(
    log_b: &CMatrix<T>,
    q: &ZollRegularizer<T>,
    params: &ZetaParams<T>,
) -> Result<FinitePartResult<T>> {
    regularized_trace(log_b, q, params, "log B")
}

/// `w_Q(B) = fp_{z=0} tr (log B) Q^z`.
pub fn w_q<T: Real, B: Truncatable<T> + ?Sized>(
    b: &B,
    q: &ZollRegularizer<T>,
    params: &ZetaParams<T>,
) -> Result<FinitePartResult<T>> {
    let log_b = matrix_log(b, params.n_outer, params.log_tol)?;
    w_q_from_log(&log_b, q, params)
}

/// Continuation of `tr(X Q^z)` to complex `z` from the diagonal of `X`.
pub fn regularized_trace_at<T: Real>(
    x: &CMatrix<T>,
    q: &ZollRegularizer<T>,
    params: &ZetaParams<T>,
    z: Cplx<T>,
) -> Result<Cplx<T>> {
    let (d, model) = diagonal_tail(x, params, "X")?;
    let value = dirichlet_continuation(&d, &model, params.n_inner, z)?;
    let scaled = value * (z * q.scale.ln()).exp();
    Ok(scaled + q.power_weight(0, z) * linalg::mode_entry(x, 0, 0))
}

/// `a_r(z) = tr A^r Q^z`, continued from the fitted diagonal of `(P_N A P_N)^r`.
///
/// At `z = 0` the finite part is returned.
pub fn zeta_trace_function<T: Real, A: Truncatable<T> + ?Sized>(
    a: &A,
    r: usize,
    z: Cplx<T>,
    params: &ZetaParams<T>,
) -> Result<Cplx<T>> {
    assert!(r >= 1);
    let ar = linalg::power(&a.truncation(params.n_outer), r);
    if z.norm().is_zero() {
        return Ok(regularized_trace(&ar, &ZollRegularizer::default(), params, "A^r")?.finite_part);
    }
    regularized_trace_at(&ar, &ZollRegularizer::default(), params, z)
}

/// Exact `tr (P_n A P_n)^r Q^z` with the constant mode weighted by zero.
pub fn truncated_qz_trace<T: Real, A: Truncatable<T> + ?Sized>(a: &A, r: usize, n: usize, z: Cplx<T>) -> Cplx<T> {
    assert!(r >= 1);
    let ar = linalg::power(&a.truncation(n), r);
    let q = ZollRegularizer::<T>::default();
    let ni = n as i64;
    let mut acc = czero::<T>();
    for k in 1..=ni {
        let w = q.power_weight(k, z);
        acc += (linalg::mode_entry(&ar, k, k) + linalg::mode_entry(&ar, -k, -k)) * w;
    }
    acc
}
