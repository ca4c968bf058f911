//! Homogeneous symbols on the cosphere bundle of the flat 2-torus.
//!
//! A symbol is stored by its restriction to `|ξ| = 1`, sampled on a uniform
//! grid over `(x₁, x₂, ω)` with `ξ = ρ(cos ω, sin ω)`, together with its
//! homogeneity degree `r` and a log coefficient `μ`: the represented function
//! is `ρ^r F(x, ω) + μ log ρ`. Derivatives in `x` and `ω` are spectral.
//!
//! Poisson sign: `{f, g} = Σ_i ∂_{ξ_i} f ∂_{x_i} g - ∂_{x_i} f ∂_{ξ_i} g`.

use std::sync::Arc;

use ndarray::{Array3, Axis, Zip};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{uniform_stream, Real};

/// Smallest grid edge accepted.
pub const MIN_GRID: usize = 16;

/// One trigonometric mode `cos·cos(θ) + sin·sin(θ)`, `θ = k₁x₁ + k₂x₂ + k_ω ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigMode<T: Real> {
    pub kx1: i64,
    pub kx2: i64,
    pub kw: i64,
    pub cos: T,
    pub sin: T,
}

/// Sampled homogeneous symbol `ρ^degree F(x, ω) + log_coeff · log ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol2D<T: Real> {
    /// `F` on the grid, indexed `[x₁, x₂, ω]`.
    values: Array3<T>,
    degree: i32,
    log_coeff: T,
}

fn check_grid(n: usize, n_omega: usize) -> Result<()> {
    for (name, m) in [("N", n), ("N_omega", n_omega)] {
        if m < MIN_GRID || !m.is_power_of_two() {
            return Err(Error::GridMismatch(format!("{name} = {m} must be a power of two >= {MIN_GRID}")));
        }
    }
    Ok(())
}

fn grid_angle<T: Real>(i: usize, m: usize) -> T {
    T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(m)
}

impl<T: Real> Symbol2D<T> {
    /// Samples `F(x₁, x₂, ω)` on an `n × n × n_omega` grid.
    pub fn from_fn(
        n: usize,
        n_omega: usize,
        degree: i32,
        log_coeff: T,
        f: impl Fn(T, T, T) -> T,
    ) -> Result<Self> {
        check_grid(n, n_omega)?;
        if log_coeff != T::zero() && degree != 0 {
            return Err(Error::Degree { expected: "0 for a log-type symbol".into(), found: degree });
        }
        let values = Array3::from_shape_fn((n, n, n_omega), |(i, j, l)| {
            f(grid_angle(i, n), grid_angle(j, n), grid_angle(l, n_omega))
        });
        Ok(Self { values, degree, log_coeff })
    }

    /// Finite trigonometric polynomial in `(x₁, x₂, ω)`, sampled exactly by
    /// an inverse FFT of its coefficients (modes beyond the grid alias).
    pub fn from_trig(n: usize, n_omega: usize, modes: &[TrigMode<T>], degree: i32, log_coeff: T) -> Result<Self> {
        check_grid(n, n_omega)?;
        if log_coeff != T::zero() && degree != 0 {
            return Err(Error::Degree { expected: "0 for a log-type symbol".into(), found: degree });
        }
        let wrap = |k: i64, m: usize| k.rem_euclid(m as i64) as usize;
        let mut spectrum = Array3::from_elem((n, n, n_omega), Complex::new(T::zero(), T::zero()));
        for m in modes {
            // cos·cos θ + sin·sin θ = Re((cos - i sin) e^{iθ})
            spectrum[[wrap(m.kx1, n), wrap(m.kx2, n), wrap(m.kw, n_omega)]] += Complex::new(m.cos, -m.sin);
        }
        for axis in 0..3 {
            let len = spectrum.len_of(Axis(axis));
            let plan = FftPlanner::new().plan_fft_inverse(len);
            let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
            for mut lane in spectrum.lanes_mut(Axis(axis)) {
                for (b, v) in buf.iter_mut().zip(lane.iter()) {
                    *b = *v;
                }
                plan.process(&mut buf);
                for (v, b) in lane.iter_mut().zip(&buf) {
                    *v = *b;
                }
            }
        }
        Ok(Self { values: spectrum.mapv(|c| c.re), degree, log_coeff })
    }

    pub fn constant(n: usize, n_omega: usize, degree: i32, c: T) -> Result<Self> {
        Self::from_fn(n, n_omega, degree, T::zero(), |_, _, _| c)
    }

    /// `F + μ log|ξ|` with `F` of degree 0.
    pub fn log_type(f: &Self, mu: T) -> Result<Self> {
        if f.degree != 0 {
            return Err(Error::Degree { expected: "0".into(), found: f.degree });
        }
        Ok(Self { values: f.values.clone(), degree: 0, log_coeff: f.log_coeff + mu })
    }

    pub fn values(&self) -> &Array3<T> {
        &self.values
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn log_coeff(&self) -> T {
        self.log_coeff
    }

    /// `(N, N_ω)`.
    pub fn grid(&self) -> (usize, usize) {
        let (n, _, nw) = self.values.dim();
        (n, nw)
    }

    fn conformable(&self, other: &Self) -> Result<()> {
        if self.values.dim() != other.values.dim() {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.values.dim(), other.values.dim())));
        }
        Ok(())
    }

    fn same_degree(&self, other: &Self) -> Result<()> {
        self.conformable(other)?;
        if self.degree != other.degree {
            return Err(Error::Degree { expected: self.degree.to_string(), found: other.degree });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_degree(other)?;
        Ok(Self {
            values: &self.values + &other.values,
            degree: self.degree,
            log_coeff: self.log_coeff + other.log_coeff,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_degree(other)?;
        Ok(Self {
            values: &self.values - &other.values,
            degree: self.degree,
            log_coeff: self.log_coeff - other.log_coeff,
        })
    }

    pub fn scale(&self, c: T) -> Self {
        Self { values: self.values.mapv(|v| v * c), degree: self.degree, log_coeff: self.log_coeff * c }
    }

    /// Pointwise product; degrees add. Log-type factors are rejected: the
    /// product `G · μ log|ξ|` has an `x`-dependent log coefficient.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.conformable(other)?;
        if self.log_coeff != T::zero() || other.log_coeff != T::zero() {
            return Err(Error::LogProduct);
        }
        Ok(Self { values: &self.values * &other.values, degree: self.degree + other.degree, log_coeff: T::zero() })
    }

    /// `f(F)` pointwise on a degree-0 symbol without log term.
    pub fn map_degree_zero(&self, f: impl Fn(T) -> T) -> Result<Self> {
        if self.degree != 0 || self.log_coeff != T::zero() {
            return Err(Error::Degree { expected: "0 without log term".into(), found: self.degree });
        }
        Ok(Self { values: self.values.mapv(f), degree: 0, log_coeff: T::zero() })
    }

    /// `log a` for a strictly positive degree-0 symbol.
    pub fn ln(&self) -> Result<Self> {
        let min = self.values.iter().copied().fold(T::infinity(), T::min);
        if !(min > T::zero()) {
            return Err(Error::NotPositive(format!("symbol minimum {min}")));
        }
        self.map_degree_zero(|v| v.ln())
    }

    /// `1/a`, degree `-r`.
    pub fn recip(&self) -> Result<Self> {
        if self.log_coeff != T::zero() {
            return Err(Error::LogProduct);
        }
        if self.values.iter().any(|v| v.is_zero()) {
            return Err(Error::NotPositive("symbol vanishes on the grid".into()));
        }
        Ok(Self { values: self.values.mapv(|v| T::one() / v), degree: -self.degree, log_coeff: T::zero() })
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Max pointwise `|F - G|` (degrees and log terms must match).
    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.max_abs() + (self.log_coeff - other.log_coeff).abs())
    }
}

/// Seeded trigonometric modes with `|k₁|, |k₂|, |k_ω| <= max_mode` and
/// coefficients uniform in `±amplitude · 2^{-(|k₁|+|k₂|+|k_ω|)}`.
pub fn random_trig_modes<T: Real>(seed: u64, max_mode: i64, amplitude: T) -> Vec<TrigMode<T>> {
    let mut uniform = uniform_stream::<T>(seed);
    let mut modes = Vec::new();
    for kx1 in -max_mode..=max_mode {
        for kx2 in -max_mode..=max_mode {
            for kw in -max_mode..=max_mode {
                let a = amplitude * T::lit(0.5f64.powi((kx1.abs() + kx2.abs() + kw.abs()) as i32));
                modes.push(TrigMode { kx1, kx2, kw, cos: uniform() * a, sin: uniform() * a });
            }
        }
    }
    modes
}

struct Spectral<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    len: usize,
}

impl<T: Real> Spectral<T> {
    fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len), len }
    }

    /// Trigonometric-interpolant derivative of one periodic line (Nyquist mode dropped).
    fn differentiate(&self, line: &mut [Complex<T>]) {
        self.forward.process(line);
        let n = self.len;
        let norm = T::from_usize_lossy(n);
        for (i, c) in line.iter_mut().enumerate() {
            let k = if i < n / 2 {
                i as i64
            } else if i == n / 2 {
                0
            } else {
                i as i64 - n as i64
            };
            *c = Complex::new(-c.im, c.re) * (T::from_i64_lossy(k) / norm);
        }
        self.inverse.process(line);
    }
}

fn derivative<T: Real>(values: &Array3<T>, axis: usize) -> Array3<T> {
    let len = values.len_of(Axis(axis));
    let plan = Spectral::<T>::new(len);
    let mut out = values.clone();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
    for mut lane in out.lanes_mut(Axis(axis)) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = Complex::new(*v, T::zero());
        }
        plan.differentiate(&mut buf);
        for (v, b) in lane.iter_mut().zip(&buf) {
            *v = b.re;
        }
    }
    out
}

/// `(∂_{x₁}, ∂_{x₂}, ∂_{ξ₁}, ∂_{ξ₂})` of a symbol on `|ξ| = 1`.
struct Gradient<T: Real> {
    dx1: Array3<T>,
    dx2: Array3<T>,
    dxi1: Array3<T>,
    dxi2: Array3<T>,
}

fn gradient<T: Real>(f: &Symbol2D<T>) -> Gradient<T> {
    let (_, nw) = f.grid();
    let dx1 = derivative(&f.values, 0);
    let dx2 = derivative(&f.values, 1);
    let dw = derivative(&f.values, 2);
    let r = T::from_i64_lossy(f.degree as i64);
    let mut dxi1 = Array3::zeros(f.values.dim());
    let mut dxi2 = Array3::zeros(f.values.dim());
    // ∂_ρ(ρ^r F + μ log ρ) = rF + μ at ρ = 1
    Zip::indexed(&mut dxi1)
        .and(&mut dxi2)
        .and(&f.values)
        .and(&dw)
        .for_each(|(_, _, l), a, b, &v, &fw| {
            let (s, c) = grid_angle::<T>(l, nw).sin_cos();
            let radial = r * v + f.log_coeff;
            *a = c * radial - s * fw;
            *b = s * radial + c * fw;
        });
    Gradient { dx1, dx2, dxi1, dxi2 }
}

/// Poisson bracket; degree `r_f + r_g - 1`, no log term.
///
/// Evaluated as `(Σ ∂_ξ f ∂_x g) - (Σ ∂_x f ∂_ξ g)` so that `{g, f}` is the
/// exact negation of `{f, g}`.
pub fn poisson<T: Real>(f: &Symbol2D<T>, g: &Symbol2D<T>) -> Result<Symbol2D<T>> {
    f.conformable(g)?;
    let gf = gradient(f);
    let gg = gradient(g);
    let mut minus = Array3::zeros(f.values.dim());
    Zip::from(&mut minus)
        .and(&gf.dx1)
        .and(&gf.dx2)
        .and(&gg.dxi1)
        .and(&gg.dxi2)
        .for_each(|m, &fx1, &fx2, &gxi1, &gxi2| *m = fx1 * gxi1 + fx2 * gxi2);
    let mut out = Array3::zeros(f.values.dim());
    Zip::from(&mut out)
        .and(&gf.dxi1)
        .and(&gf.dxi2)
        .and(&gg.dx1)
        .and(&gg.dx2)
        .and(&minus)
        .for_each(|o, &fxi1, &fxi2, &gx1, &gx2, &m| {
            *o = (fxi1 * gx1 + fxi2 * gx2) - m;
        });
    Ok(Symbol2D { values: out, degree: f.degree + g.degree - 1, log_coeff: T::zero() })
}

/// `product(f, g)`.
pub fn product<T: Real>(f: &Symbol2D<T>, g: &Symbol2D<T>) -> Result<Symbol2D<T>> {
    f.product(g)
}

/// `(2π)^{-2} ∫_{T² × S¹} f dx dω = 2π · mean(F)` for a degree `-2` symbol.
pub fn residue2d<T: Real>(f: &Symbol2D<T>) -> Result<T> {
    if f.degree != -2 {
        return Err(Error::Degree { expected: "-2".into(), found: f.degree });
    }
    let mean = f.values.iter().copied().sum::<T>() / T::from_usize_lossy(f.values.len());
    Ok(T::TAU() * mean)
}

/// Max pointwise residuals of the two bracket identities used to reduce `T₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals<T: Real> {
    /// `{{b, log q}, log b} - {b, {log q, log b}}`.
    pub nested: T,
    /// `b⁻¹{{b, log q}, log a} + {log a, {log b, log q}} - {log b, log q}{log b, log a}`.
    pub reciprocal: T,
    pub n: usize,
    pub n_omega: usize,
}

impl<T: Real> IdentityResiduals<T> {
    pub fn max(&self) -> T {
        self.nested.max(self.reciprocal)
    }
}

/// Pointwise residuals of the bracket identities for positive degree-0
/// `a`, `b` and log-type `q`.
pub fn identity_suite<T: Real>(b: &Symbol2D<T>, a: &Symbol2D<T>, log_q: &Symbol2D<T>) -> Result<IdentityResiduals<T>> {
    for (name, s) in [("a", a), ("b", b)] {
        if s.degree != 0 {
            return Err(Error::Degree { expected: format!("0 for {name}"), found: s.degree });
        }
    }
    let log_a = a.ln()?;
    let log_b = b.ln()?;
    let b_lq = poisson(b, log_q)?;
    let nested = poisson(&b_lq, &log_b)?.distance(&poisson(b, &poisson(log_q, &log_b)?)?)?;

    let lhs = b.recip()?.product(&poisson(&b_lq, &log_a)?)?;
    let lb_lq = poisson(&log_b, log_q)?;
    let rhs = poisson(&log_a, &lb_lq)?
        .scale(-T::one())
        .add(&lb_lq.product(&poisson(&log_b, &log_a)?)?)?;
    let reciprocal = lhs.distance(&rhs)?;
    let (n, n_omega) = a.grid();
    Ok(IdentityResiduals { nested, reciprocal, n, n_omega })
}

/// `(1/6) res(δ log a {log a, {log a, log q}})`.
pub fn sigma_formula_d2<T: Real>(log_a: &Symbol2D<T>, dlog_a: &Symbol2D<T>, log_q: &Symbol2D<T>) -> Result<T> {
    let inner = poisson(log_a, &poisson(log_a, log_q)?)?;
    Ok(residue2d(&dlog_a.product(&inner)?)? / T::lit(6.0))
}

/// `(1/12) res({log a, log b}{log(a/b), log q})`, the symmetrized anomaly.
pub fn sym_anomaly_d2<T: Real>(log_a: &Symbol2D<T>, log_b: &Symbol2D<T>, log_q: &Symbol2D<T>) -> Result<T> {
    let ab = poisson(log_a, log_b)?;
    let ratio = poisson(&log_a.sub(log_b)?, log_q)?;
    Ok(residue2d(&ab.product(&ratio)?)? / T::lit(12.0))
}

/// Residues that vanish in the `d = 2` anomaly computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanishingResiduals<T: Real> {
    /// `res(log a {log a, X}) - ½ res({log² a, X})`, `X = {log b, log q}`.
    pub leibniz_gap: T,
    /// `res({log² a, X})`.
    pub bracket_residue: T,
    /// `res(log a {log a, X})`.
    pub second_term: T,
    /// `res(log a (Y - Y))`, `Y = {log b, {log b, log q}}`; zero by construction.
    pub g_second_derivative: T,
}

impl<T: Real> VanishingResiduals<T> {
    pub fn max(&self) -> T {
        self.leibniz_gap
            .abs()
            .max(self.bracket_residue.abs())
            .max(self.second_term.abs())
            .max(self.g_second_derivative.abs())
    }
}

pub fn vanishing_checks<T: Real>(
    log_a: &Symbol2D<T>,
    log_b: &Symbol2D<T>,
    log_q: &Symbol2D<T>,
) -> Result<VanishingResiduals<T>> {
    let x = poisson(log_b, log_q)?;
    let second_term = residue2d(&log_a.product(&poisson(log_a, &x)?)?)?;
    let log_a_sq = log_a.product(log_a)?;
    let bracket_residue = residue2d(&poisson(&log_a_sq, &x)?)?;
    let y = poisson(log_b, &x)?;
    let g_second_derivative = residue2d(&log_a.product(&y.sub(&y)?)?)?;
    Ok(VanishingResiduals {
        leibniz_gap: second_term - bracket_residue / T::lit(2.0),
        bracket_residue,
        second_term,
        g_second_derivative,
    })
}
