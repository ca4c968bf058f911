use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use zdet::circle::{mk_multiplication, near_identity, CircleOperator, FourierSeries, MultiplierExpansion};
use zdet::zeta::{
    bernoulli, c_function, euler_gamma, finite_part_dirichlet, fit_tail, hardy_partial_sum, matrix_log,
    matrix_log_dense, riemann_zeta, truncated_qz_trace, w_q, w_q_from_log, zeta_trace_function, DiagonalSequence,
    ZetaParams,
};
use zdet::{linalg, Complex64, Error, Matrix, ZollRegularizer};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const APERY: f64 = 1.202_056_903_159_594_3;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Akiyama–Tanigawa: `B_n` with `B_1 = +1/2`.
fn akiyama_tanigawa(n: usize) -> BigRational {
    let mut a: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(BigRational::new(1.into(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            a[j - 1] = BigRational::from_integer(BigInt::from(j)) * (&a[j - 1] - &a[j]);
        }
    }
    a[0].clone()
}

/// Compensated sum.
fn kahan(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let y = t - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    sum
}

/// Γ by upward recurrence to `Re z >= 20` and Stirling's series there.
fn gamma_oracle(z: Complex64) -> Complex64 {
    let mut shift = c(1.0);
    let mut w = z;
    while w.re < 20.0 {
        shift *= w;
        w += 1.0;
    }
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    let ln = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * std::f64::consts::PI).ln() + series;
    ln.exp() / shift
}

#[test]
fn bernoulli_matches_akiyama_tanigawa() {
    assert_eq!(bernoulli(1), BigRational::new(1.into(), 6.into()));
    assert_eq!(bernoulli(2), BigRational::new(1.into(), 30.into()));
    assert_eq!(bernoulli(3), BigRational::new(1.into(), 42.into()));
    for p in 1..=15 {
        assert_eq!(bernoulli(p), akiyama_tanigawa(2 * p).abs(), "p = {p}");
    }
}

#[test]
fn zeta_examples() {
    let pi = std::f64::consts::PI;
    assert!((riemann_zeta(c(0.0)).unwrap() - c(-0.5)).norm() < 1e-14);
    assert!((riemann_zeta(c(2.0)).unwrap() - c(pi * pi / 6.0)).norm() < 1e-12 * pi * pi / 6.0);
    assert!((riemann_zeta(c(-1.0)).unwrap() - c(-1.0 / 12.0)).norm() < 1e-12 / 12.0);
    assert!((riemann_zeta(c(3.0)).unwrap() - c(APERY)).norm() < 1e-12 * APERY);
    assert!((riemann_zeta(c(4.0)).unwrap() - c(pi.powi(4) / 90.0)).norm() < 1e-12);
    assert!((riemann_zeta(c(-3.0)).unwrap() - c(1.0 / 120.0)).norm() < 1e-12 / 120.0);
    assert!(matches!(riemann_zeta(c(1.0)), Err(Error::ZetaPole)));
    assert!(matches!(riemann_zeta(Complex64::new(0.5, 60.0)), Err(Error::OutOfRange(_))));
}

#[test]
fn c_function_examples() {
    let pi = std::f64::consts::PI;
    assert!((c_function(c(1.0)).unwrap() - c(EULER_GAMMA)).norm() < 1e-10);
    assert!((euler_gamma::<f64>() - EULER_GAMMA).abs() < 1e-14);
    assert!((c_function(c(0.0)).unwrap() - c(0.5)).norm() < 1e-14);
    assert!((c_function(c(2.0)).unwrap() - c(pi * pi / 6.0 - 1.0)).norm() < 1e-12);
    // symmetric limit ζ(1±ε) ∓ 1/ε cancels the linear Stieltjes term
    let eps = 1e-3;
    let lim = 0.5 * ((riemann_zeta(c(1.0 + eps)).unwrap() - 1.0 / eps) + (riemann_zeta(c(1.0 - eps)).unwrap() + 1.0 / eps));
    assert!((c_function(c(1.0)).unwrap() - lim).norm() < 1e-8);
}

#[test]
fn hardy_trivial_and_exact_cases() {
    for m in [1u64, 9, 1234] {
        assert_eq!(hardy_partial_sum(c(0.0), m, 0).unwrap().re.round(), m as f64);
        assert!((hardy_partial_sum(c(0.0), m, 4).unwrap() - c(m as f64)).norm() < 1e-9 * m as f64);
    }
    assert!((hardy_partial_sum(c(1.0), 100, 1).unwrap() - c(5050.0)).norm() < 1e-9);
    assert!(hardy_partial_sum(c(1.0), 10, 7).is_err());
}

#[test]
fn hardy_matches_faulhaber_sums() {
    for s in 0u32..=6 {
        let depth = (s as usize + 2) / 2;
        let mut exact = BigInt::zero();
        for m in 1..=10_000u64 {
            exact += BigInt::from(m).pow(s);
            if m <= 100 || m % 97 == 0 || m == 10_000 {
                let want = exact.to_f64().unwrap();
                let got = hardy_partial_sum(c(s as f64), m, depth).unwrap();
                assert!((got - c(want)).norm() <= 1e-9 * want, "s {s} m {m}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn hardy_matches_brute_force_for_negative_powers() {
    let m = 10_000u64;
    for s in [-0.5f64, -1.5] {
        let brute = kahan((1..=m).rev().map(|k| (k as f64).powf(s)));
        let got = hardy_partial_sum(c(s), m, 3).unwrap();
        assert!((got - c(brute)).norm() <= 1e-12, "s {s}: {got} vs {brute}");
    }
    // the pole at s = -1 is removed: harmonic numbers
    let brute = kahan((1..=m).rev().map(|k| 1.0 / k as f64));
    assert!((hardy_partial_sum(c(-1.0), m, 3).unwrap() - c(brute)).norm() <= 1e-12);
}

#[test]
fn fit_tail_examples() {
    let d = DiagonalSequence::from_fn(80, |k| c(1.0 / k as f64 + 2.0 / (k as f64).powi(3)), "synthetic");
    let model = fit_tail(&d, 4, (20, 80)).unwrap();
    assert!((model.coefficient(1) - c(1.0)).norm() < 1e-10);
    assert!((model.coefficient(3) - c(2.0)).norm() < 1e-10);
    assert!(model.coefficient(0).norm() < 1e-10);

    let log_f = FourierSeries::real_trig(0.2, &[(1, 0.6, 0.0)]);
    let m = mk_multiplication(&log_f).truncate(60);
    let d = DiagonalSequence::from_matrix(&m, 60, "M_log f");
    let model = fit_tail(&d, 3, (30, 60)).unwrap();
    assert!((model.coefficient(0) - c(0.4)).norm() < 1e-12);
    assert!(matches!(fit_tail(&d, 4, (50, 55)), Err(Error::Window(_))));
}

#[test]
fn finite_part_channels() {
    let check = |f: fn(f64) -> f64, fp: f64, residue: f64| {
        let d = DiagonalSequence::from_fn(100, |k| c(f(k as f64)), "synthetic");
        let model = fit_tail(&d, 4, (50, 100)).unwrap();
        let r = finite_part_dirichlet(&d, &model, 100).unwrap();
        // a constant tail counts -(K + 1/2) times, so fit noise in c₀ is amplified by K
        assert!((r.finite_part - c(fp)).norm() < 1e-8, "{} vs {fp}", r.finite_part);
        assert!((r.pole_residue - c(residue)).norm() < 1e-9);
    };
    check(|_| 3.0, -1.5, 0.0);
    check(|k| 1.0 / (k * k), std::f64::consts::PI.powi(2) / 6.0, 0.0);
    // ζ(1 - z) = -1/z + γ + O(z): Laurent residue -1
    check(|k| 1.0 / k, EULER_GAMMA, -1.0);
    check(|k| 2.0 / (k * k * k) - 0.5 / k, 2.0 * APERY - 0.5 * EULER_GAMMA, 0.5);
}

#[test]
fn finite_part_is_linear_and_split_invariant() {
    let f = |k: usize| {
        let x = k as f64;
        Complex64::new(0.3 + 1.0 / x - 0.7 / (x * x) + (-x).exp(), 0.2 / (x * x * x))
    };
    let g = |k: usize| c(1.0 / (1.0 + k as f64));
    let d = DiagonalSequence::from_fn(120, f, "f");
    let e = DiagonalSequence::from_fn(120, g, "g");
    let window = (60, 120);
    let fp = |d: &DiagonalSequence<f64>, split| finite_part_dirichlet(d, &fit_tail(d, 5, window).unwrap(), split).unwrap();
    let base = fp(&d, 80).finite_part;
    for split in [60, 100] {
        assert!((fp(&d, split).finite_part - base).norm() <= 1e-9);
    }
    let (a, b) = (Complex64::new(0.5, -1.0), c(2.0));
    let combo = d.linear_combination(a, &e, b);
    let lhs = fp(&combo, 80).finite_part;
    let rhs = a * base + b * fp(&e, 80).finite_part;
    assert!((lhs - rhs).norm() <= 1e-8);
}

#[test]
fn matrix_log_examples() {
    let id = linalg::identity::<f64>(9);
    assert_eq!(matrix_log_dense(&id, 1e-14).unwrap().log, Matrix::zeros((9, 9)));
    let s = 0.3;
    let scaled = id.mapv(|z| z * (1.0 + s));
    let log = matrix_log_dense(&scaled, 1e-14).unwrap().log;
    assert!(linalg::max_abs(&(&log - &id.mapv(|z| z * (1.0f64 + s).ln()))) < 1e-14);
    let far = CircleOperator::<f64>::shift(1, c(1.0)).add(&CircleOperator::identity()).unwrap();
    assert!(matches!(matrix_log(&far.scale(c(3.0)), 10, 1e-14), Err(Error::LogSeriesDiverges { .. })));
}

#[test]
fn matrix_log_of_multiplication_is_multiplication_by_log() {
    let log_f = FourierSeries::real_trig(0.2, &[(1, 0.6, 0.0)]);
    let log = matrix_log(&mk_multiplication(&log_f.exp()), 300, 1e-14).unwrap();
    let central = linalg::crop(&log, 150);
    let oracle = mk_multiplication(&log_f).truncate(150);
    assert!(linalg::max_abs(&(&central - &oracle)) < 1e-8);
}

#[test]
fn w_q_examples() {
    let params = ZetaParams::with_outer(120);
    let q = ZollRegularizer::default();
    assert!(w_q(&CircleOperator::<f64>::identity(), &q, &params).unwrap().finite_part.norm() < 1e-14);
    let s = 0.15f64;
    let exp_s = CircleOperator::scalar(c(s.exp()));
    assert!((w_q(&exp_s, &q, &params).unwrap().finite_part - c(-s)).norm() < 1e-9);
    let log_f = FourierSeries::real_trig(0.2, &[(1, 0.6, 0.0)]);
    let w = w_q(&mk_multiplication(&log_f.exp()), &q, &ZetaParams::default()).unwrap();
    assert!((w.finite_part - c(-0.2)).norm() < 1e-6, "{}", w.finite_part);
    assert!(w.pole_residue.norm() < 1e-6);
}

#[test]
fn scaled_regularizer_shifts_by_residue() {
    let params = ZetaParams::with_outer(160);
    let b = near_identity::<f64>(5, 1, 3, 0.15);
    let log_b = matrix_log(&b, params.n_outer, params.log_tol).unwrap();
    let base = w_q_from_log(&log_b, &ZollRegularizer::default(), &params).unwrap();
    assert!(base.pole_residue.norm() > 1e-3, "residue should be nonzero for this operator");
    for scale in [0.5, 2.0, 7.0] {
        let shifted = w_q_from_log(&log_b, &ZollRegularizer::new(scale), &params).unwrap();
        let gap = shifted.finite_part - base.finite_part - base.pole_residue * f64::ln(scale);
        assert!(gap.norm() < 1e-6, "scale {scale}: {gap}");
    }
}

fn inverse_k() -> CircleOperator<f64> {
    CircleOperator::diagonal(MultiplierExpansion::inverse_power(1, c(1.0)))
}

/// Order −2 operator with three diagonals and distinct rays.
fn decaying_operator() -> CircleOperator<f64> {
    let diag = |a: f64, b: f64, e: f64| {
        MultiplierExpansion::new(vec![c(0.0), c(0.0), c(a), c(b)], vec![c(0.0), c(0.0), c(b), c(a)], [(0, c(e))].into())
            .unwrap()
    };
    CircleOperator::single(-1, diag(0.4, -0.3, 0.2))
        .add(&CircleOperator::diagonal(diag(1.0, 0.5, 0.7)))
        .unwrap()
        .add(&CircleOperator::single(1, diag(-0.6, 0.25, 0.1)))
        .unwrap()
}

#[test]
fn zeta_trace_function_examples() {
    let params = ZetaParams::default();
    let a = inverse_k();
    let at = zeta_trace_function(&a, 1, c(-2.0), &params).unwrap();
    assert!((at - c(2.0 * APERY)).norm() < 1e-8);
    let z = 1e-7;
    let probe = zeta_trace_function(&a, 1, c(z), &params).unwrap() * z;
    assert!((probe - c(-2.0)).norm() < 1e-6, "{probe}");

    let k = 0.7;
    let constant = CircleOperator::scalar(c(k));
    assert!((zeta_trace_function(&constant, 2, c(0.0), &params).unwrap() - c(-k * k)).norm() < 1e-9);
}

#[test]
fn truncated_trace_examples() {
    let a = CircleOperator::diagonal(MultiplierExpansion::new(vec![c(1.0)], vec![c(1.0)], [(0, c(0.0))].into()).unwrap());
    for z in [-1.5, 0.5] {
        let want = 2.0 * (1..=12).map(|k| (k as f64).powf(z)).sum::<f64>();
        assert!((truncated_qz_trace(&a, 1, 12, c(z)) - c(want)).norm() < 1e-12);
    }
    let b = decaying_operator();
    let t = b.truncate(9);
    let no_zero = linalg::trace_power(&t, 3) - linalg::power(&t, 3)[[9, 9]];
    assert!((truncated_qz_trace(&b, 3, 9, c(0.0)) - no_zero).norm() < 1e-14);
}

#[test]
fn truncated_trace_converges_to_continuation() {
    let b = decaying_operator();
    let z = c(-2.0);
    let target = zeta_trace_function(&b, 1, z, &ZetaParams::default()).unwrap();
    let mut prev = f64::INFINITY;
    for n in [100, 200, 400] {
        let err = (truncated_qz_trace(&b, 1, n, z) - target).norm();
        assert!(err < prev);
        prev = err;
    }
    assert!(prev < 1e-8, "{prev}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn zeta_functional_equation(re in -5.0f64..5.0, im in 0.5f64..20.0) {
        let s = Complex64::new(re, im);
        let pi = std::f64::consts::PI;
        let one = c(1.0);
        let factor = (s * 2f64.ln()).exp() * ((s - one) * pi.ln()).exp() * (s * pi / 2.0).sin() * gamma_oracle(one - s);
        let lhs = riemann_zeta(s).unwrap();
        let rhs = factor * riemann_zeta(one - s).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm(), "s = {}: {} vs {}", s, lhs, rhs);
    }
}
