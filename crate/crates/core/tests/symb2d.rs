use std::f64::consts::TAU;

use proptest::prelude::*;
use zdet::symb2d::{
    identity_suite, poisson, product, random_trig_modes, residue2d, sigma_formula_d2, sym_anomaly_d2,
    vanishing_checks, Symbol2D, TrigMode,
};
use zdet::Error;

fn trig(n: usize, modes: &[TrigMode<f64>], degree: i32, mu: f64) -> Symbol2D<f64> {
    Symbol2D::from_trig(n, n, modes, degree, mu).unwrap()
}

fn eval_modes(modes: &[TrigMode<f64>], x1: f64, x2: f64, w: f64) -> f64 {
    modes
        .iter()
        .map(|m| {
            let t = m.kx1 as f64 * x1 + m.kx2 as f64 * x2 + m.kw as f64 * w;
            m.cos * t.cos() + m.sin * t.sin()
        })
        .sum()
}

/// Homogeneous extension `|ξ|^r F(x, arg ξ) + μ log|ξ|` in Cartesian coordinates.
struct Extension {
    modes: Vec<TrigMode<f64>>,
    degree: i32,
    mu: f64,
}

impl Extension {
    fn at(&self, p: [f64; 4]) -> f64 {
        let rho = p[2].hypot(p[3]);
        let w = p[3].atan2(p[2]);
        rho.powi(self.degree) * eval_modes(&self.modes, p[0], p[1], w) + self.mu * rho.ln()
    }

    /// Fourth-order central difference along coordinate `i`.
    fn partial(&self, p: [f64; 4], i: usize) -> f64 {
        let h = 1e-3;
        let shifted = |t: f64| {
            let mut q = p;
            q[i] += t;
            self.at(q)
        };
        (-shifted(2.0 * h) + 8.0 * shifted(h) - 8.0 * shifted(-h) + shifted(-2.0 * h)) / (12.0 * h)
    }
}

/// `Σ ∂_ξ f ∂_x g - ∂_x f ∂_ξ g` by finite differences.
fn bracket_oracle(f: &Extension, g: &Extension, p: [f64; 4]) -> f64 {
    (0..2).map(|i| f.partial(p, i + 2) * g.partial(p, i) - f.partial(p, i) * g.partial(p, i + 2)).sum()
}

/// Positive degree-0 symbols `exp(la)`, `exp(lb)` and `log q = F + log|ξ|`.
fn inputs(n: usize, seed: u64) -> (Symbol2D<f64>, Symbol2D<f64>, Symbol2D<f64>) {
    let la = trig(n, &random_trig_modes(seed, 3, 0.6), 0, 0.0);
    let lb = trig(n, &random_trig_modes(seed + 1, 3, 0.6), 0, 0.0);
    let f = trig(n, &random_trig_modes(seed + 2, 3, 0.6), 0, 0.0);
    (
        la.map_degree_zero(f64::exp).unwrap(),
        lb.map_degree_zero(f64::exp).unwrap(),
        Symbol2D::log_type(&f, 1.0).unwrap(),
    )
}

fn logs(n: usize, seed: u64) -> (Symbol2D<f64>, Symbol2D<f64>, Symbol2D<f64>) {
    let (a, b, q) = inputs(n, seed);
    (a.ln().unwrap(), b.ln().unwrap(), q)
}

#[test]
fn bracket_matches_finite_differences() {
    let n = 32;
    for (seed, (df, dg, mu)) in [(0, 0, 1.0), (-1, 0, 0.0), (0, -1, 0.0), (1, -2, 0.0)].into_iter().enumerate() {
        let fm = random_trig_modes(10 + seed as u64, 2, 0.7);
        let gm = random_trig_modes(20 + seed as u64, 2, 0.7);
        let f = Extension { modes: fm.clone(), degree: df, mu: 0.0 };
        let g = Extension { modes: gm.clone(), degree: dg, mu };
        let bracket = poisson(&trig(n, &fm, df, 0.0), &trig(n, &gm, dg, mu)).unwrap();
        assert_eq!(bracket.degree(), df + dg - 1);
        for (i, j, l) in [(0, 0, 0), (3, 7, 11), (17, 5, 29), (31, 30, 16), (9, 22, 4)] {
            let (x1, x2, w) = (TAU * i as f64 / n as f64, TAU * j as f64 / n as f64, TAU * l as f64 / n as f64);
            let want = bracket_oracle(&f, &g, [x1, x2, w.cos(), w.sin()]);
            let got = bracket.values()[[i, j, l]];
            assert!((got - want).abs() < 1e-8, "case {seed} at ({i},{j},{l}): {got} vs {want}");
        }
    }
}

#[test]
fn bracket_trivial_cases() {
    let n = 32;
    let f = trig(n, &random_trig_modes(1, 2, 0.5), -1, 0.0);
    assert_eq!(poisson(&f, &f).unwrap().max_abs(), 0.0);
    let fiber_only = |seed| {
        let modes: Vec<_> = random_trig_modes(seed, 3, 1.0).into_iter().filter(|m| m.kx1 == 0 && m.kx2 == 0).collect();
        trig(n, &modes, 0, 0.0)
    };
    assert!(poisson(&fiber_only(2), &fiber_only(3)).unwrap().max_abs() < 1e-13);
    let other = Symbol2D::constant(16, 16, 0, 1.0).unwrap();
    assert!(matches!(poisson(&f, &other), Err(Error::GridMismatch(_))));
}

#[test]
fn product_examples() {
    let n = 16;
    let f = trig(n, &random_trig_modes(4, 2, 0.5), -1, 0.0);
    let g = trig(n, &random_trig_modes(5, 2, 0.5), -1, 0.0);
    let one = Symbol2D::constant(n, n, 0, 1.0).unwrap();
    assert_eq!(product(&f, &one).unwrap(), f);
    let fg = product(&f, &g).unwrap();
    assert_eq!(fg.degree(), -2);
    assert_eq!(fg, product(&g, &f).unwrap());
    let q = Symbol2D::log_type(&one, 1.0).unwrap();
    assert!(matches!(product(&q, &q), Err(Error::LogProduct)));
}

#[test]
fn residue_examples() {
    let n = 32;
    let one = Symbol2D::constant(n, n, -2, 1.0).unwrap();
    assert!((residue2d(&one).unwrap() - TAU).abs() < 1e-14);
    let smooth = trig(n, &random_trig_modes(6, 2, 0.5), 0, 0.0).map_degree_zero(f64::exp).unwrap();
    let sine = Symbol2D::from_fn(n, n, -2, 0.0, |x1: f64, _, _| x1.sin()).unwrap();
    // sin x₁ times an x₁-independent factor has zero x₁-mean
    let x1_free = Symbol2D::from_fn(n, n, 0, 0.0, |_, x2: f64, w: f64| (x2 - w).cos().exp()).unwrap();
    assert!(residue2d(&product(&sine, &x1_free).unwrap()).unwrap().abs() < 1e-14);
    assert!(matches!(residue2d(&smooth), Err(Error::Degree { .. })));
    for seed in 0..3 {
        let g = trig(64, &random_trig_modes(30 + seed, 3, 0.8), 0, 0.0);
        let h = trig(64, &random_trig_modes(40 + seed, 3, 0.8), -1, 0.0);
        assert!(residue2d(&poisson(&g, &h).unwrap()).unwrap().abs() <= 1e-9);
    }
}

#[test]
fn leibniz_and_jacobi() {
    let n = 64;
    let (f, g, h) = (
        trig(n, &random_trig_modes(51, 3, 0.6), 0, 0.0),
        trig(n, &random_trig_modes(52, 3, 0.6), 0, 0.0),
        trig(n, &random_trig_modes(53, 3, 0.6), -1, 0.0),
    );
    let lhs = poisson(&f, &product(&g, &h).unwrap()).unwrap();
    let rhs = product(&poisson(&f, &g).unwrap(), &h).unwrap().add(&product(&g, &poisson(&f, &h).unwrap()).unwrap()).unwrap();
    assert!(lhs.distance(&rhs).unwrap() <= 1e-9);

    let q = Symbol2D::log_type(&trig(n, &random_trig_modes(54, 3, 0.6), 0, 0.0), 1.0).unwrap();
    let cyc = |a: &Symbol2D<f64>, b: &Symbol2D<f64>, c: &Symbol2D<f64>| poisson(a, &poisson(b, c).unwrap()).unwrap();
    let jacobi = cyc(&f, &g, &q).add(&cyc(&g, &q, &f)).unwrap().add(&cyc(&q, &f, &g)).unwrap();
    assert!(jacobi.max_abs() <= 1e-8, "{}", jacobi.max_abs());
}

#[test]
fn identity_suite_trivial_and_positive() {
    let n = 16;
    let a = Symbol2D::constant(n, n, 0, 2.0).unwrap();
    let b = Symbol2D::constant(n, n, 0, 0.5).unwrap();
    let q = Symbol2D::log_type(&trig(n, &random_trig_modes(1, 2, 0.5), 0, 0.0), 1.0).unwrap();
    let r = identity_suite(&b, &a, &q).unwrap();
    assert!(r.max() < 1e-14);
    let negative = Symbol2D::constant(n, n, 0, -1.0).unwrap();
    assert!(matches!(identity_suite(&negative, &a, &q), Err(Error::NotPositive(_))));
}

#[test]
fn identity_suite_converges_spectrally() {
    for seed in [1, 2] {
        let (a, b, q) = inputs(32, seed);
        let coarse = identity_suite(&b, &a, &q).unwrap().max();
        let (a, b, q) = inputs(64, seed);
        let fine = identity_suite(&b, &a, &q).unwrap().max();
        assert!(fine <= 1e-9, "seed {seed}: {fine}");
        assert!(fine * 100.0 <= coarse, "seed {seed}: {coarse} -> {fine}");
    }
}

#[test]
fn sigma_formula_trivial_cases() {
    let n = 32;
    let (la, lb, q) = logs(n, 3);
    let zero = Symbol2D::constant(n, n, 0, 0.0).unwrap();
    assert_eq!(sigma_formula_d2(&la, &zero, &q).unwrap(), 0.0);
    let constant = Symbol2D::constant(n, n, 0, 0.7).unwrap();
    assert!(sigma_formula_d2(&constant, &lb, &q).unwrap().abs() < 1e-14);
    let fiber = |seed| {
        let modes: Vec<_> = random_trig_modes(seed, 2, 0.5).into_iter().filter(|m| m.kx1 == 0 && m.kx2 == 0).collect();
        trig(n, &modes, 0, 0.0)
    };
    let fq = Symbol2D::log_type(&fiber(8), 1.0).unwrap();
    assert!(sigma_formula_d2(&fiber(7), &lb, &fq).unwrap().abs() < 1e-13);
}

#[test]
fn sym_anomaly_symmetry() {
    let n = 32;
    let (la, lb, q) = logs(n, 5);
    assert_eq!(sym_anomaly_d2(&la, &lb, &q).unwrap(), sym_anomaly_d2(&lb, &la, &q).unwrap());
    assert!(sym_anomaly_d2(&la, &la, &q).unwrap().abs() <= 1e-12);
    let constant = Symbol2D::constant(n, n, 0, 0.3).unwrap();
    assert!(sym_anomaly_d2(&la, &constant, &q).unwrap().abs() <= 1e-12);
}

#[test]
fn vanishing_checks_examples() {
    let n = 32;
    let fiber = |seed| {
        let modes: Vec<_> = random_trig_modes(seed, 2, 0.5).into_iter().filter(|m| m.kx1 == 0 && m.kx2 == 0).collect();
        trig(n, &modes, 0, 0.0)
    };
    let q = Symbol2D::log_type(&fiber(3), 1.0).unwrap();
    assert!(vanishing_checks(&fiber(1), &fiber(2), &q).unwrap().max() < 1e-13);

    let mut coarse = f64::INFINITY;
    for n in [32, 64] {
        let (la, lb, q) = logs(n, 9);
        let r = vanishing_checks(&la, &lb, &q).unwrap();
        assert_eq!(r.g_second_derivative, 0.0);
        if n == 64 {
            assert!(r.leibniz_gap.abs() <= 1e-9 && r.bracket_residue.abs() <= 1e-9, "{r:?}");
        }
        assert!(r.max() <= coarse.max(1e-12), "{n}: {r:?} after {coarse}");
        coarse = r.max();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bracket_is_bilinear_and_antisymmetric(s1 in 0u64..500, s2 in 0u64..500, s3 in 0u64..500, k in -2.0f64..2.0) {
        let n = 16;
        let f = trig(n, &random_trig_modes(s1, 2, 0.5), 0, 0.0);
        let g = trig(n, &random_trig_modes(s2, 2, 0.5), -1, 0.0);
        let h = trig(n, &random_trig_modes(s3, 2, 0.5), -1, 0.0);
        let fg = poisson(&f, &g).unwrap();
        prop_assert_eq!(poisson(&g, &f).unwrap(), fg.scale(-1.0));
        let lhs = poisson(&f, &g.add(&h.scale(k)).unwrap()).unwrap();
        let rhs = fg.add(&poisson(&f, &h).unwrap().scale(k)).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-12);
    }
}
