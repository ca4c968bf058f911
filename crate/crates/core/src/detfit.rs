//! Truncated determinants, asymptotic fits in `n`, and the Szegő-regularized
//! constant `b` of `log det P_n B P_n ~ b + Σ b_k n^k + b₀ log n`.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::circle::{mk_multiplication, FourierSeries, Truncatable};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{creal, Cplx, Real};

pub use crate::linalg::trace_power;

/// `log det M`, see [`linalg::Lu::logdet`] for the branch policy.
pub fn logdet<T: Real>(m: &CMatrix<T>) -> Result<Cplx<T>> {
    linalg::logdet(m)
}

/// Least-squares fit of `Σ_e c_e n^e (+ c_log log n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticFit<T: Real> {
    /// Sorted descending, all `<= 1`.
    pub exponents: Vec<i32>,
    pub has_log: bool,
    pub coefficients: BTreeMap<i32, Cplx<T>>,
    pub log_coefficient: Cplx<T>,
    pub residual_norm: T,
    pub condition_estimate: T,
    pub samples: usize,
}

impl<T: Real> AsymptoticFit<T> {
    pub fn coefficient(&self, exponent: i32) -> Cplx<T> {
        self.coefficients.get(&exponent).copied().unwrap_or_else(|| creal(T::zero()))
    }

    /// The constant term `b`.
    pub fn constant(&self) -> Cplx<T> {
        self.coefficient(0)
    }

    pub fn eval(&self, n: T) -> Cplx<T> {
        let mut acc = self.log_coefficient * n.ln();
        for (&e, &c) in &self.coefficients {
            acc += c * n.powi(e);
        }
        acc
    }
}

/// Fits `samples` in the monomial/log basis.
pub fn fit_asymptotics<T: Real>(
    samples: &[(T, Cplx<T>)],
    exponents: &[i32],
    has_log: bool,
) -> Result<AsymptoticFit<T>> {
    let mut exps: Vec<i32> = exponents.to_vec();
    exps.sort_unstable_by(|a, b| b.cmp(a));
    exps.dedup();
    if exps.iter().any(|&e| e > 1) {
        return Err(Error::Window("exponents must be <= 1".into()));
    }
    let unknowns = exps.len() + usize::from(has_log);
    if samples.len() < unknowns + 2 {
        return Err(Error::Window(format!(
            "{} samples for {unknowns} coefficients (need {} or more)",
            samples.len(),
            unknowns + 2
        )));
    }
    if samples.windows(2).any(|w| !(w[0].0 < w[1].0)) || samples[0].0 <= T::zero() {
        return Err(Error::Window("sample abscissae must be positive and strictly increasing".into()));
    }
    let design = Array2::from_shape_fn((samples.len(), unknowns), |(i, j)| {
        let n = samples[i].0;
        if j < exps.len() {
            n.powi(exps[j])
        } else {
            n.ln()
        }
    });
    let obs: Vec<Cplx<T>> = samples.iter().map(|s| s.1).collect();
    let ls = linalg::least_squares(&design, &obs)?;
    let coefficients = exps.iter().copied().zip(ls.coefficients.iter().copied()).collect();
    let log_coefficient = if has_log { ls.coefficients[exps.len()] } else { creal(T::zero()) };
    Ok(AsymptoticFit {
        exponents: exps,
        has_log,
        coefficients,
        log_coefficient,
        residual_norm: ls.residual_norm,
        condition_estimate: ls.condition_estimate,
        samples: samples.len(),
    })
}

/// `(n, log det P_n B P_n)` for each `n`.
pub fn logdet_samples<T: Real, B: Truncatable<T> + ?Sized>(b: &B, ns: &[usize]) -> Result<Vec<(usize, Cplx<T>)>> {
    ns.iter().map(|&n| Ok((n, logdet(&b.truncation(n))?))).collect()
}

/// Window and model depth for [`szego_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SzegoParams {
    pub n_min: usize,
    pub n_max: usize,
    /// Number of negative powers `n^{-1} … n^{-depth}`.
    pub depth: usize,
    pub stride: usize,
}

impl SzegoParams {
    pub fn new(n_min: usize, n_max: usize, depth: usize) -> Self {
        Self { n_min, n_max, depth, stride: 1 }
    }

    pub fn sample_points(&self) -> Vec<usize> {
        (self.n_min..=self.n_max).step_by(self.stride.max(1)).collect()
    }

    pub fn exponents(&self) -> Vec<i32> {
        let mut e = vec![1, 0];
        e.extend((1..=self.depth as i32).map(|j| -j));
        e
    }
}

impl Default for SzegoParams {
    /// Window `[n_max/2, n_max]` with `n_max = 200`, depth 3, every fifth `n`.
    fn default() -> Self {
        Self { n_min: 100, n_max: 200, depth: 3, stride: 5 }
    }
}

/// Fit of `log det P_n B P_n` with exponents `{1, 0, -1, …, -depth}` and `log n`.
pub fn szego_fit<T: Real, B: Truncatable<T> + ?Sized>(b: &B, params: &SzegoParams) -> Result<AsymptoticFit<T>> {
    if params.depth < 1 {
        return Err(Error::Window("depth must be >= 1".into()));
    }
    if params.n_min == 0 || params.n_max <= params.n_min {
        return Err(Error::Window(format!("empty range {}..={}", params.n_min, params.n_max)));
    }
    let samples = logdet_samples(b, &params.sample_points())?;
    let samples: Vec<(T, Cplx<T>)> = samples.into_iter().map(|(n, v)| (T::from_usize_lossy(n), v)).collect();
    fit_asymptotics(&samples, &params.exponents(), true)
}

/// Constant term `b` of the large-`n` expansion of `log det P_n B P_n`.
pub fn szego_constant<T: Real, B: Truncatable<T> + ?Sized>(b: &B, params: &SzegoParams) -> Result<Cplx<T>> {
    Ok(szego_fit(b, params)?.constant())
}

/// `Σ_{k>=1} k l̂(k) l̂(-k)`.
pub fn szego_pair_sum<T: Real>(log_f: &FourierSeries<T>) -> Cplx<T> {
    log_f
        .iter()
        .filter(|(k, _)| *k > 0)
        .fold(creal(T::zero()), |acc, (k, c)| acc + c * log_f.coeff(-k) * T::from_i64_lossy(k))
}

/// `|log det P_n M_f P_n - (2n+1) l̂(0) - Σ_{k>=1} k l̂(k) l̂(-k)|` with `l = log f`.
pub fn szego_residual<T: Real>(log_f: &FourierSeries<T>, n: usize) -> Result<T> {
    let tol = T::lit(1e-14) * log_f.iter().fold(T::one(), |a, (_, c)| a.max(c.norm()));
    if !log_f.is_real_valued(tol) {
        return Err(Error::NotPositive("log f is not real-valued, so f is not a positive function".into()));
    }
    let mf = mk_multiplication(&log_f.exp());
    let ld = logdet(&mf.truncate(n))?;
    let dim = T::from_usize_lossy(2 * n + 1);
    Ok((ld - log_f.coeff(0) * dim - szego_pair_sum(log_f)).norm())
}

/// CSV table `n,re,im`.
pub fn samples_csv<T: Real>(samples: &[(usize, Cplx<T>)]) -> String {
    let mut out = String::from("n,re,im\n");
    for (n, v) in samples {
        out.push_str(&format!("{n},{:e},{:e}\n", v.re.to_f64_lossy(), v.im.to_f64_lossy()));
    }
    out
}
