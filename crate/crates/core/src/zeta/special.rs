//! Riemann zeta, `C(s) = ζ(s) - 1/(s-1)`, Bernoulli numbers and complex gamma.
//!
//! ζ is evaluated by Euler–Maclaurin summation for `Re s >= -3` and by the
//! functional equation below that.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cone, creal, exprel, Cplx, Real};

/// Supported domain: `|Im s| <= 50`, `-20 <= Re s <= 30`.
pub const ZETA_IM_MAX: f64 = 50.0;
pub const ZETA_RE_MIN: f64 = -20.0;
pub const ZETA_RE_MAX: f64 = 30.0;

const MAX_CORRECTIONS: usize = 60;
const REFLECT_BELOW: f64 = -3.0;

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 1..=n {
        let prev = row[k - 1].clone();
        row.push(prev * BigInt::from(n + 1 - k) / BigInt::from(k));
    }
    row
}

/// Modern Bernoulli numbers `B_0 ..= B_{2·MAX_CORRECTIONS}` with `B_1 = -1/2`.
fn modern_table() -> &'static [BigRational] {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let top = 2 * MAX_CORRECTIONS + 2;
        let mut b: Vec<BigRational> = Vec::with_capacity(top + 1);
        b.push(BigRational::one());
        for n in 1..=top {
            // Σ_{k=0}^{n} C(n+1, k) B_k = 0
            let row = binomial_row(n + 1);
            let mut acc = BigRational::zero();
            for (k, bk) in b.iter().enumerate() {
                acc += BigRational::from_integer(row[k].clone()) * bk;
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(n + 1)));
        }
        b
    })
}

/// Modern-convention Bernoulli number `B_n` (`B_1 = -1/2`), exact.
pub fn bernoulli_modern(n: usize) -> BigRational {
    let table = modern_table();
    if n < table.len() {
        return table[n].clone();
    }
    if n % 2 == 1 {
        return BigRational::zero();
    }
    // Beyond the cached range: extend on the fly.
    let mut b = table.to_vec();
    for m in b.len()..=n {
        let row = binomial_row(m + 1);
        let mut acc = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += BigRational::from_integer(row[k].clone()) * bk;
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b[n].clone()
}

/// The `p`-th Bernoulli number in the positive convention
/// `B₁ = 1/6, B₂ = 1/30, B₃ = 1/42, …`, i.e. `|B_{2p}|` in modern indexing.
pub fn bernoulli(p: usize) -> BigRational {
    assert!(p >= 1, "bernoulli index starts at 1");
    bernoulli_modern(2 * p).abs()
}

/// `B_{2p} / (2p)!` (modern sign) as `f64`, for `p = 1..=MAX_CORRECTIONS`.
fn em_coefficients() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut fact = BigInt::one();
        let mut out = vec![0.0];
        for p in 1..=MAX_CORRECTIONS {
            fact *= BigInt::from((2 * p - 1) * (2 * p));
            let q = bernoulli_modern(2 * p) / BigRational::from_integer(fact.clone());
            out.push(q.to_f64().unwrap_or(0.0));
        }
        out
    })
}

fn check_range<T: Real>(s: Cplx<T>) -> Result<()> {
    let re = s.re.to_f64_lossy();
    let im = s.im.to_f64_lossy();
    if !(ZETA_RE_MIN..=ZETA_RE_MAX).contains(&re) || im.abs() > ZETA_IM_MAX {
        return Err(Error::OutOfRange(format!("s = {re}{im:+}i")));
    }
    Ok(())
}

/// `m^{-s}/2 + Σ_p B_{2p}/(2p)! (s)_{2p-1} m^{-s-2p+1}`, the Euler–Maclaurin
/// correction at cut `m`, summed until the terms stop contributing.
fn em_corrections<T: Real>(s: Cplx<T>, m: T) -> Cplx<T> {
    let m_pow = (-s * m.ln()).exp(); // m^{-s}
    let mut acc = m_pow * T::lit(0.5);
    let coeffs = em_coefficients();
    // rising factorial s (s+1) ... (s+2p-2), times m^{-s-2p+1}
    let mut rising = s;
    let mut power = m_pow / m;
    let eps = T::epsilon() * T::lit(0.25);
    let mut previous = T::infinity();
    for (p, &coeff) in coeffs.iter().enumerate().skip(1) {
        if p > 1 {
            let a = T::from_usize_lossy(2 * p - 3);
            let b = T::from_usize_lossy(2 * p - 2);
            rising = rising * (s + a) * (s + b);
            power /= m * m;
        }
        let term = rising * power * T::lit(coeff);
        // asymptotic series: stop before the terms start growing
        if term.norm() > previous {
            break;
        }
        previous = term.norm();
        acc += term;
        if term.norm() <= eps * acc.norm() {
            break;
        }
    }
    acc
}

/// Euler–Maclaurin pieces at cut `m`: `Σ_{k<m} k^{-s}` plus the corrections.
/// ζ(s) adds `m^{1-s}/(s-1)` to this.
fn em_partial<T: Real>(s: Cplx<T>) -> (Cplx<T>, T) {
    // Fewer explicit terms for Re s < 0 limit cancellation against m^{1-s}/(s-1).
    let base = if s.re < T::zero() { 5 } else { 10 };
    let cut = base + (s.im.abs().to_f64_lossy() / 2.0).ceil() as usize;
    let m = T::from_usize_lossy(cut);
    let mut acc = Cplx::new(T::zero(), T::zero());
    for k in 1..cut {
        acc += (-s * T::from_usize_lossy(k).ln()).exp();
    }
    (acc + em_corrections(s, m), m.ln())
}

/// Tail `ζ(s) - Σ_{k<=m} k^{-s}`, continued in `s`.
///
/// At `s = 1` the finite part `γ - H_m` is returned. Large `m` uses the
/// Euler–Maclaurin expansion at `m + 1` directly, which avoids cancelling the
/// head against ζ(s).
pub fn zeta_tail<T: Real>(s: Cplx<T>, m: usize) -> Result<Cplx<T>> {
    check_range(s)?;
    let one = cone::<T>();
    let at_pole = (s - one).norm().is_zero();
    let cut = m + 1;
    if (cut as f64) < 10.0 + s.norm().to_f64_lossy() {
        let head: Cplx<T> = (1..=m).map(|k| (-s * T::from_usize_lossy(k).ln()).exp()).sum();
        let full = if at_pole { c_function(s)? } else { riemann_zeta(s)? };
        return Ok(full - head);
    }
    let mm = T::from_usize_lossy(cut);
    let ln_m = mm.ln();
    let pole_part = if at_pole { creal(-ln_m) } else { ((one - s) * ln_m).exp() / (s - one) };
    Ok(pole_part + em_corrections(s, mm))
}

/// Complex gamma by the Lanczos approximation (`g = 7`, nine terms).
pub fn gamma<T: Real>(z: Cplx<T>) -> Cplx<T> {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let pi = T::PI();
    if z.re < T::lit(0.5) {
        // Γ(z) Γ(1-z) = π / sin(πz)
        return Cplx::new(pi, T::zero()) / ((z * pi).sin() * gamma(cone::<T>() - z));
    }
    let z = z - T::one();
    let mut x = creal(T::lit(COEF[0]));
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        x += creal(T::lit(c)) / (z + T::from_usize_lossy(i));
    }
    let t = z + T::lit(G + 0.5);
    let two_pi = pi + pi;
    x * two_pi.sqrt() * (t.ln() * (z + T::lit(0.5))).exp() * (-t).exp()
}

/// `ζ(s) = 2^s π^{s-1} sin(πs/2) Γ(1-s) ζ(1-s)` applied from the right half.
fn zeta_reflected<T: Real>(s: Cplx<T>) -> Result<Cplx<T>> {
    let pi = T::PI();
    let one = cone::<T>();
    let two = T::lit(2.0);
    let factor = (s * two.ln()).exp() * ((s - one) * pi.ln()).exp() * (s * pi / two).sin() * gamma(one - s);
    Ok(factor * riemann_zeta(one - s)?)
}

/// Riemann zeta for `s ≠ 1` in the documented range.
pub fn riemann_zeta<T: Real>(s: Cplx<T>) -> Result<Cplx<T>> {
    check_range(s)?;
    let one = cone::<T>();
    if (s - one).norm().is_zero() {
        return Err(Error::ZetaPole);
    }
    if s.re.to_f64_lossy() < REFLECT_BELOW {
        return zeta_reflected(s);
    }
    let (partial, ln_m) = em_partial(s);
    let pole_part = ((one - s) * ln_m).exp() / (s - one);
    Ok(partial + pole_part)
}

/// `C(s) = ζ(s) - 1/(s-1)`, entire; `C(1) = γ`.
pub fn c_function<T: Real>(s: Cplx<T>) -> Result<Cplx<T>> {
    check_range(s)?;
    let one = cone::<T>();
    if s.re.to_f64_lossy() < REFLECT_BELOW {
        return Ok(zeta_reflected(s)? - one / (s - one));
    }
    let (partial, ln_m) = em_partial(s);
    // (m^{1-s} - 1)/(s - 1) = -ln m · exprel((1-s) ln m)
    Ok(partial - exprel((one - s) * ln_m) * ln_m)
}

/// Euler's constant, `C(1)`.
pub fn euler_gamma<T: Real>() -> T {
    c_function(cone::<T>()).expect("C(1) in range").re
}
