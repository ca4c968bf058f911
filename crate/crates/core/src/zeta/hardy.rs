//! Asymptotic form of the power sum `Σ_{k=1}^m k^s`.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::scalar::{cone, exprel, Cplx, Real};
use crate::zeta::special::{bernoulli, c_function};

pub const MAX_HARDY_DEPTH: usize = 6;

/// `ζ(-s) + m^{s+1}/(s+1) + m^s/2 + Σ_{p=1}^{depth} (-1)^{p+1} B_p/(2p)! · s(s-1)⋯(s-2p+2) · m^{s-2p+1}`
/// with positive-convention `B_p`.
///
/// The first two terms are combined as `C(-s) + (m^{s+1} - 1)/(s+1)`, which is
/// regular at `s = -1` (giving `γ + log m`).
pub fn hardy_partial_sum<T: Real>(s: Cplx<T>, m: u64, depth: usize) -> Result<Cplx<T>> {
    if depth > MAX_HARDY_DEPTH {
        return Err(Error::OutOfRange(format!("depth {depth} > {MAX_HARDY_DEPTH}")));
    }
    if m == 0 {
        return Err(Error::OutOfRange("m must be positive".into()));
    }
    let one = cone::<T>();
    let mm = T::lit(m as f64);
    let ln_m = mm.ln();
    let m_pow_s = (s * ln_m).exp();
    let mut acc = c_function(-s)? + exprel((s + one) * ln_m) * ln_m + m_pow_s * T::lit(0.5);
    // falling factorial s(s-1)...(s-2p+2) and m^{s-2p+1}
    let mut falling = s;
    let mut power = m_pow_s / mm;
    let mut factorial = 2.0_f64;
    for p in 1..=depth {
        if p > 1 {
            let a = T::from_usize_lossy(2 * p - 3);
            let b = T::from_usize_lossy(2 * p - 2);
            falling = falling * (s - a) * (s - b);
            power /= mm * mm;
            factorial *= ((2 * p - 1) * (2 * p)) as f64;
        }
        let bp = bernoulli(p).to_f64().unwrap_or(0.0);
        let sign = if p % 2 == 1 { 1.0 } else { -1.0 };
        acc += falling * power * T::lit(sign * bp / factorial);
    }
    Ok(acc)
}
