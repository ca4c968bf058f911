//! Residues, the determinant cocycle, the multiplicative anomaly and the
//! variational quantity `σ_Q` for operators on the circle.
//!
//! Every experiment returns an [`ExperimentReport`] comparing two sides that
//! are computed by separate pipelines; nothing here asserts agreement.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::circle::{CircleOperator, OperatorProduct, Truncatable, ZollRegularizer};
use crate::detfit::{szego_constant, SzegoParams};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{creal, czero, Cplx, Real};
use crate::zeta::{
    dirichlet_continuation, fit_tail_orders, matrix_log, regularized_trace, w_q, w_q_from_log, DiagonalSequence,
    ZetaParams,
};

/// Absolute noise level assumed for a single `w_Q` evaluation.
pub const W_Q_NOISE: f64 = 1e-10;

/// Floor for the relative-error denominator.
pub const REL_ERROR_FLOOR: f64 = 1e-12;

/// Two independently computed sides of an identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport<T: Real> {
    pub experiment: String,
    pub lhs: Cplx<T>,
    pub rhs: Cplx<T>,
    pub abs_error: T,
    pub rel_error: T,
    pub diagnostics: BTreeMap<String, T>,
    /// Conditions that make the comparison suspect (empty when clean).
    pub flags: Vec<String>,
}

impl<T: Real> ExperimentReport<T> {
    pub fn new(experiment: impl Into<String>, lhs: Cplx<T>, rhs: Cplx<T>) -> Self {
        let abs_error = (lhs - rhs).norm();
        let denom = lhs.norm().max(rhs.norm()).max(T::lit(REL_ERROR_FLOOR));
        Self {
            experiment: experiment.into(),
            lhs,
            rhs,
            abs_error,
            rel_error: abs_error / denom,
            diagnostics: BTreeMap::new(),
            flags: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: T) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn diagnostic(&self, key: &str) -> Option<T> {
        self.diagnostics.get(key).copied()
    }

    /// `lhs - rhs`.
    pub fn difference(&self) -> Cplx<T> {
        self.lhs - self.rhs
    }
}

/// Tail-fit settings for [`residue_from_tails`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueParams<T: Real> {
    /// Diagonal pairs are read on `1..=n_inner`.
    pub n_inner: usize,
    pub order: usize,
    pub window: (usize, usize),
    /// Accept a nonzero `k⁰` coefficient (zeroth-order input).
    pub allow_order_zero: bool,
    /// `|c₀| / max|d|` above this is "not decaying".
    pub decay_tol: T,
}

impl<T: Real> ResidueParams<T> {
    pub fn from_zeta(p: &ZetaParams<T>) -> Self {
        Self {
            n_inner: p.n_inner,
            order: p.tail_order,
            window: p.window,
            allow_order_zero: false,
            decay_tol: T::lit(1e-6),
        }
    }

    pub fn allowing_order_zero(self) -> Self {
        Self { allow_order_zero: true, ..self }
    }
}

/// Parameters shared by the anomaly experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyParams<T: Real> {
    pub zeta: ZetaParams<T>,
    pub szego: SzegoParams,
    /// Base finite-difference step for `σ_Q`; `h, h/2, h/4` are used.
    pub step: T,
}

impl<T: Real> Default for AnomalyParams<T> {
    fn default() -> Self {
        Self { zeta: ZetaParams::default(), szego: SzegoParams::default(), step: T::lit(1e-3) }
    }
}

impl<T: Real> AnomalyParams<T> {
    pub fn residue(&self) -> ResidueParams<T> {
        ResidueParams::from_zeta(&self.zeta)
    }

    /// Same parameters at twice the outer truncation.
    pub fn doubled(&self) -> Self {
        Self { zeta: self.zeta.doubled(), ..self.clone() }
    }
}

/// Residue of a fitted diagonal sequence: `Res_{z=0} Σ d(k) k^z = -c₁`.
pub fn residue_from_sequence<T: Real>(d: &DiagonalSequence<T>, params: &ResidueParams<T>) -> Result<Cplx<T>> {
    let full = fit_tail_orders(d, 0, params.order, params.window)?;
    if !params.allow_order_zero {
        let (lo, hi) = params.window;
        let scale = (lo..=hi).map(|k| d.get(k).norm()).fold(T::zero(), T::max);
        let c0 = full.coefficient(0).norm();
        // the absolute floor admits sequences that vanish to roundoff
        if c0 > params.decay_tol * scale + T::epsilon() * T::lit(16.0) {
            return Err(Error::NotDecaying { c0: c0.to_f64_lossy() });
        }
        // refit without the constant channel so c₁ is not polluted by it
        let decaying = fit_tail_orders(d, 1, params.order, params.window)?;
        return Ok(-decaying.coefficient(1));
    }
    Ok(-full.coefficient(1))
}

/// `res(C)` read off the diagonal pairs `C_{k,k} + C_{-k,-k}` of a mode matrix.
///
/// Sign: the Laurent residue of `tr(C Q^z)` at `z = 0`, so `res(1/|k|) = -2`.
pub fn residue_from_tails<T: Real>(c: &CMatrix<T>, params: &ResidueParams<T>) -> Result<Cplx<T>> {
    let d = DiagonalSequence::from_matrix(c, params.n_inner, "C");
    residue_from_sequence(&d, params)
}

/// `[X, log Q]` on modes `-n..=n`: entry `(m, k)` picks up `log|k| - log|m|`.
pub fn commutator_with_log_q<T: Real>(x: &CMatrix<T>, q: &ZollRegularizer<T>) -> CMatrix<T> {
    let n = linalg::half_width(x) as i64;
    let mut out = x.clone();
    for ((i, j), v) in out.indexed_iter_mut() {
        let m = i as i64 - n;
        let k = j as i64 - n;
        *v *= creal(q.log_eigenvalue(k) - q.log_eigenvalue(m));
    }
    out
}

/// `w_Q(AB) - w_Q(BA)` against `res(log A · [log B, log Q])`.
pub fn cocycle_compare<T: Real>(
    a: &CircleOperator<T>,
    b: &CircleOperator<T>,
    q: &ZollRegularizer<T>,
    params: &AnomalyParams<T>,
) -> Result<ExperimentReport<T>> {
    let zp = &params.zeta;
    let ab = w_q(&OperatorProduct::new(vec![a, b]), q, zp)?;
    let ba = w_q(&OperatorProduct::new(vec![b, a]), q, zp)?;
    let log_a = matrix_log(a, zp.n_outer, zp.log_tol)?;
    let log_b = matrix_log(b, zp.n_outer, zp.log_tol)?;
    let integrand = log_a.dot(&commutator_with_log_q(&log_b, q));
    let rhs = residue_from_tails(&integrand, &params.residue())?;
    Ok(ExperimentReport::new("cocycle", ab.finite_part - ba.finite_part, rhs)
        .with("n_outer", T::from_usize_lossy(zp.n_outer))
        .with("n_inner", T::from_usize_lossy(zp.n_inner))
        .with("tail_residual_ab", ab.tail_residual)
        .with("tail_residual_ba", ba.tail_residual)
        .with("truncation_bound", ab.truncation_bound + ba.truncation_bound))
}

/// `κ_Q(A, B) = w_Q(AB) - w_Q(A) - w_Q(B)`.
pub fn kappa<T: Real>(
    a: &CircleOperator<T>,
    b: &CircleOperator<T>,
    q: &ZollRegularizer<T>,
    params: &AnomalyParams<T>,
) -> Result<Cplx<T>> {
    let zp = &params.zeta;
    let ab = w_q(&OperatorProduct::new(vec![a, b]), q, zp)?.finite_part;
    Ok(ab - w_q(a, q, zp)?.finite_part - w_q(b, q, zp)?.finite_part)
}

/// Functionals whose locality [`locality_probe`] tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalityFunctional {
    /// `b(A) - w_Q(A)`: Szegő constant minus zeta determinant.
    SzegoMinusZeta,
    /// `w_Q(AB) - w_Q(BA)`.
    Cocycle,
    /// `κ_Q(A, B)`.
    Kappa,
}

impl LocalityFunctional {
    pub fn tag(self) -> &'static str {
        match self {
            Self::SzegoMinusZeta => "szego_minus_zeta",
            Self::Cocycle => "cocycle",
            Self::Kappa => "kappa",
        }
    }
}

impl FromStr for LocalityFunctional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "szego_minus_zeta" => Ok(Self::SzegoMinusZeta),
            "cocycle" => Ok(Self::Cocycle),
            "kappa" => Ok(Self::Kappa),
            other => Err(Error::Spec(format!("unknown locality functional `{other}`"))),
        }
    }
}

struct Evaluation<T: Real> {
    value: Cplx<T>,
    /// Individual ingredients, reported to show they do move.
    parts: Vec<(&'static str, Cplx<T>)>,
}

fn evaluate_functional<T: Real>(
    f: LocalityFunctional,
    a: &CircleOperator<T>,
    b: Option<&CircleOperator<T>>,
    q: &ZollRegularizer<T>,
    params: &AnomalyParams<T>,
) -> Result<Evaluation<T>> {
    let zp = &params.zeta;
    let need_b = || b.ok_or_else(|| Error::Spec(format!("functional `{}` needs a second operator", f.tag())));
    match f {
        LocalityFunctional::SzegoMinusZeta => {
            let szego = szego_constant(a, &params.szego)?;
            let zeta = w_q(a, q, zp)?.finite_part;
            Ok(Evaluation { value: szego - zeta, parts: vec![("szego", szego), ("zeta", zeta)] })
        }
        LocalityFunctional::Cocycle => {
            let b = need_b()?;
            let ab = w_q(&OperatorProduct::new(vec![a, b]), q, zp)?.finite_part;
            let ba = w_q(&OperatorProduct::new(vec![b, a]), q, zp)?.finite_part;
            Ok(Evaluation { value: ab - ba, parts: vec![("w_ab", ab), ("w_ba", ba)] })
        }
        LocalityFunctional::Kappa => {
            let b = need_b()?;
            let ab = w_q(&OperatorProduct::new(vec![a, b]), q, zp)?.finite_part;
            let wa = w_q(a, q, zp)?.finite_part;
            let wb = w_q(b, q, zp)?.finite_part;
            Ok(Evaluation { value: ab - wa - wb, parts: vec![("w_ab", ab), ("w_a", wa)] })
        }
    }
}

/// Evaluates `F` at `(A, B)` (lhs) and `(A + S, B)` (rhs).
///
/// `S` must be pure smoothing. Diagnostics `moved_<part>` record how far each
/// ingredient of `F` shifts under the perturbation.
pub fn locality_probe<T: Real>(
    f: LocalityFunctional,
    a: &CircleOperator<T>,
    b: Option<&CircleOperator<T>>,
    s: &CircleOperator<T>,
    q: &ZollRegularizer<T>,
    params: &AnomalyParams<T>,
) -> Result<ExperimentReport<T>> {
    if !s.terms().is_empty() {
        return Err(Error::Combine("locality perturbation must be pure smoothing".into()));
    }
    let base = evaluate_functional(f, a, b, q, params)?;
    let perturbed_op = a.add(s)?;
    let perturbed = evaluate_functional(f, &perturbed_op, b, q, params)?;
    let mut report = ExperimentReport::new(format!("locality/{}", f.tag()), base.value, perturbed.value)
        .with("n_outer", T::from_usize_lossy(params.zeta.n_outer));
    for ((name, before), (_, after)) in base.parts.iter().zip(&perturbed.parts) {
        report.diagnostics.insert(format!("moved_{name}"), (*after - *before).norm());
    }
    Ok(report)
}

fn symmetric_fp<T: Real>(g: impl Fn(Cplx<T>) -> Result<Cplx<T>>, eps: T) -> Result<Cplx<T>> {
    let at = |e: T| -> Result<Cplx<T>> { Ok((g(creal(e))? + g(creal(-e))?) * T::lit(0.5)) };
    // even in ε: error O(ε²), removed by one Richardson step
    let coarse = at(eps)?;
    let fine = at(eps * T::lit(0.5))?;
    Ok((fine * T::lit(4.0) - coarse) / T::lit(3.0))
}

/// `w_{cQ}(B) - w_Q(B)` against `log c · res(log B)`.
///
/// The lhs is the value at `z = 0` of `fp tr(log B)((cQ)^z - Q^z)`,
/// obtained by symmetric evaluation at `z = ±ε` of the continued Dirichlet
/// series; the rhs refits the diagonal of `log B` for its residue.
pub fn regularizer_shift<T: Real, B: Truncatable<T> + ?Sized>(
    b: &B,
    c: T,
    params: &AnomalyParams<T>,
) -> Result<ExperimentReport<T>> {
    if c <= T::zero() {
        return Err(Error::NotPositive(format!("regularizer scale {c}")));
    }
    let zp = &params.zeta;
    let log_b = matrix_log(b, zp.n_outer, zp.log_tol)?;
    let d = DiagonalSequence::from_matrix(&log_b, zp.n_inner, "log B");
    let model = fit_tail_orders(&d, 0, zp.tail_order, zp.window)?;
    let ln_c = c.ln();
    let difference = |z: Cplx<T>| -> Result<Cplx<T>> {
        let shift = (z * ln_c).exp() - T::one();
        Ok(shift * dirichlet_continuation(&d, &model, zp.n_inner, z)?)
    };
    let lhs = if ln_c == T::zero() { czero() } else { symmetric_fp(difference, T::lit(1e-2))? };
    let residue = residue_from_tails(&log_b, &params.residue().allowing_order_zero())?;
    Ok(ExperimentReport::new("regshift", lhs, residue * ln_c)
        .with("scale", c)
        .with("n_outer", T::from_usize_lossy(zp.n_outer))
        .with("tail_residual", model.residual)
        .with("residue_re", residue.re)
        .with("residue_im", residue.im))
}

/// `σ_Q(A, δA) = δw_Q(A) - ½ fp tr(δA A⁻¹ + A⁻¹ δA) Q^z`.
///
/// Reported as lhs = `δw_Q(A)` (central differences at `h, h/2, h/4`,
/// Richardson-extrapolated) and rhs = the trace term, so `σ_Q` is
/// [`ExperimentReport::difference`]. The report is flagged when the
/// differences do not converge quadratically.
pub fn sigma_variation<T: Real>(
    a: &CircleOperator<T>,
    da: &CircleOperator<T>,
    q: &ZollRegularizer<T>,
    params: &AnomalyParams<T>,
) -> Result<ExperimentReport<T>> {
    let zp = &params.zeta;
    let h0 = params.step;
    let steps = [h0, h0 * T::lit(0.5), h0 * T::lit(0.25)];
    let mut central = Vec::with_capacity(3);
    for &h in &steps {
        let plus = a.add(&da.scale(creal(h)))?;
        let minus = a.add(&da.scale(creal(-h)))?;
        let wp = w_q(&plus, q, zp)?.finite_part;
        let wm = w_q(&minus, q, zp)?.finite_part;
        central.push((wp - wm) / (h * T::lit(2.0)));
    }
    let r1 = (central[1] * T::lit(4.0) - central[0]) / T::lit(3.0);
    let r2 = (central[2] * T::lit(4.0) - central[1]) / T::lit(3.0);
    let d01 = (central[0] - central[1]).norm();
    let d12 = (central[1] - central[2]).norm();
    // w_Q carries ~1e-10 absolute noise from the tail fit; below that the
    // differences cannot show their h² structure
    let floor = T::lit(2.0 * W_Q_NOISE) / steps[2];
    let ratio = if d12 > T::zero() { d01 / d12 } else { T::infinity() };
    let quadratic = (d01 <= floor && d12 <= floor) || (ratio > T::lit(3.0) && ratio < T::lit(5.0));

    let a_trunc = a.truncation(zp.n_outer);
    let da_trunc = da.truncation(zp.n_outer);
    let inv = linalg::inverse(&a_trunc)?;
    let sym = da_trunc.dot(&inv) + inv.dot(&da_trunc);
    let trace_term = regularized_trace(&sym, q, zp, "dA A^-1 + A^-1 dA")?;
    let rhs = trace_term.finite_part * T::lit(0.5);

    let mut report = ExperimentReport::new("sigma", r2, rhs)
        .with("difference_floor", floor)
        .with("n_outer", T::from_usize_lossy(zp.n_outer))
        .with("step", h0)
        .with("richardson_spread", (r1 - r2).norm())
        .with("difference_ratio", ratio)
        .with("tail_residual", trace_term.tail_residual);
    if !quadratic {
        report.flags.push(format!("central differences not quadratic (ratio {ratio})"));
    }
    Ok(report)
}

/// Convenience: `w_Q` of an operator's logarithm already on hand.
pub fn w_q_of_log<T: Real>(log_b: &CMatrix<T>, q: &ZollRegularizer<T>, params: &AnomalyParams<T>) -> Result<Cplx<T>> {
    Ok(w_q_from_log(log_b, q, &params.zeta)?.finite_part)
}
