//! The named experiments. Each returns an [`Outcome`]; none writes files.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use zdet::anomaly::{cocycle_compare, regularizer_shift, sigma_variation};
use zdet::circle::{decomposition_trace, random_banded, OperatorProduct, Truncatable, ZeroMode};
use zdet::detfit::{fit_asymptotics, logdet, szego_pair_sum};
use zdet::spec::{experiment_json, finite_part_json, fit_json, identity_json, vanishing_json, OperatorSpec, SymbolSpec};
use zdet::symb2d::{identity_suite, poisson, residue2d, sym_anomaly_d2, vanishing_checks, MIN_GRID};
use zdet::zeta::{hardy_partial_sum, truncated_qz_trace, w_q, zeta_trace_function};
use zdet::{
    linalg, AnomalyParams, AsymptoticFit, CircleOperator, Complex64, ExperimentReport, FinitePartResult, SzegoParams,
    ZetaParams, ZollRegularizer,
};

use crate::cache::{self, Cache};
use crate::config::{Context, ExperimentKind, ResolvedOperator};
use crate::error::CliError;
use crate::pool;
use crate::report::{num, pair, Check, Outcome, Table};

type Res<T> = Result<T, CliError>;

/// Everything an experiment may read.
pub struct Env<'a> {
    pub ctx: &'a Context,
    pub cache: &'a Cache,
    pub threads: usize,
    pub operators: &'a BTreeMap<String, ResolvedOperator>,
    pub symbols: &'a BTreeMap<String, SymbolSpec>,
    pub config_hash: &'a str,
}

impl Env<'_> {
    fn operator(&self, name: &str) -> Res<&ResolvedOperator> {
        self.operators
            .get(name)
            .ok_or_else(|| CliError::field(&self.ctx.origin, &format!("operators.{name}"), "required operator is missing"))
    }

    fn symbol(&self, name: &str) -> Res<&SymbolSpec> {
        self.symbols
            .get(name)
            .ok_or_else(|| CliError::field(&self.ctx.origin, &format!("symbols.{name}"), "required symbol is missing"))
    }

    fn tolerance(&self, default: f64) -> Res<f64> {
        self.ctx.positive(self.ctx.params().tolerance.unwrap_or(default), "tolerance")
    }

    fn anomaly_params(&self) -> Res<AnomalyParams> {
        let step = self.ctx.params().step.unwrap_or(1e-3);
        Ok(AnomalyParams { zeta: self.ctx.zeta_params()?, szego: self.ctx.szego_params()?, step: self.ctx.positive(step, "step")? })
    }
}

pub fn run(kind: ExperimentKind, env: &Env<'_>) -> Res<Outcome> {
    match kind {
        ExperimentKind::Szego => szego(env),
        ExperimentKind::Zeta => zeta(env),
        ExperimentKind::Compare => compare(env),
        ExperimentKind::Anomaly => anomaly(env),
        ExperimentKind::Cocycle => cocycle(env),
        ExperimentKind::Regshift => regshift(env),
        ExperimentKind::HardySelftest => hardy_selftest(env),
        ExperimentKind::Symb2dVerify => symb2d_verify(env),
        ExperimentKind::DecompCheck => decomp_check(env),
    }
}

fn cplx(v: &[f64]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn logdets(env: &Env<'_>, op: &ResolvedOperator, ns: &[usize]) -> Res<Vec<Complex64>> {
    pool::map(env.threads, ns, |&n| {
        let key = cache::key(&[&op.canonical, &n.to_string(), "logdet"]);
        let v = env.cache.get_or_compute(&key, || {
            let z = logdet(&op.op.truncate(n))?;
            Ok::<_, zdet::Error>(vec![z.re, z.im])
        })?;
        Ok(cplx(&v))
    })
}

fn szego_fit(env: &Env<'_>, op: &ResolvedOperator, ns: &[usize], depth: usize) -> Res<(Vec<Complex64>, AsymptoticFit)> {
    let values = logdets(env, op, ns)?;
    let samples: Vec<(f64, Complex64)> = ns.iter().map(|&n| n as f64).zip(values.iter().copied()).collect();
    let exponents = SzegoParams { n_min: 1, n_max: 2, depth, stride: 1 }.exponents();
    Ok((values, fit_asymptotics(&samples, &exponents, true)?))
}

fn szego_constant(env: &Env<'_>, op: &ResolvedOperator, p: &SzegoParams) -> Res<Complex64> {
    Ok(szego_fit(env, op, &p.sample_points(), p.depth)?.1.constant())
}

fn finite_part_from(v: &[f64]) -> FinitePartResult {
    FinitePartResult {
        finite_part: cplx(&v[0..2]),
        pole_residue: cplx(&v[2..4]),
        tail_residual: v[4],
        truncation_bound: v[5],
        split: v[6] as usize,
    }
}

/// `w_Q(B)` keyed by the operator text, the zeta parameters and the regularizer.
fn w_q_cached<B: Truncatable<f64> + ?Sized>(
    env: &Env<'_>,
    canonical: &str,
    b: &B,
    q: &ZollRegularizer,
    zp: &ZetaParams,
) -> Res<FinitePartResult> {
    let key = cache::key(&[canonical, &format!("{zp:?}"), &format!("{q:?}"), "w_q"]);
    let v = env.cache.get_or_compute(&key, || {
        let r = w_q(b, q, zp)?;
        Ok::<_, zdet::Error>(vec![
            r.finite_part.re,
            r.finite_part.im,
            r.pole_residue.re,
            r.pole_residue.im,
            r.tail_residual,
            r.truncation_bound,
            r.split as f64,
        ])
    })?;
    Ok(finite_part_from(&v))
}

fn w_of(env: &Env<'_>, op: &ResolvedOperator, q: &ZollRegularizer, zp: &ZetaParams) -> Res<Complex64> {
    Ok(w_q_cached(env, &op.canonical, &op.op, q, zp)?.finite_part)
}

/// Predicted `w_Q(M_f) = -l̂(0)`, plus `l̂(0)` when the constant mode is kept.
fn predicted_w(op: &ResolvedOperator, q: &ZollRegularizer) -> Option<Complex64> {
    let l0 = op.log_symbol.as_ref()?.coeff(0);
    Some(if q.zero_mode == ZeroMode::Identity { Complex64::new(0.0, 0.0) } else { -l0 })
}

fn perturbed(op: &ResolvedOperator, s: &ResolvedOperator) -> Res<ResolvedOperator> {
    let sum = op.op.add(&s.op)?;
    Ok(ResolvedOperator { canonical: OperatorSpec::from_operator(&sum).to_canonical_json(), op: sum, log_symbol: None })
}

fn szego(env: &Env<'_>) -> Res<Outcome> {
    let op = env.operator("A")?;
    let sp = env.ctx.szego_params()?;
    let ns = env.ctx.n_grid(Some(sp.sample_points()))?;
    let tol = env.tolerance(1e-8)?;
    let (values, fit) = szego_fit(env, op, &ns, sp.depth)?;
    let mut out = Outcome::default();
    let mut payload = json!({
        "ns": ns,
        "fit": fit_json(&fit),
        "constant": pair(fit.constant()),
        "slope": pair(fit.coefficient(1)),
    });
    let mut table = Table::new("logdet", &["n", "logdet_re", "logdet_im", "residual"]);
    if let Some(l) = &op.log_symbol {
        let l0 = l.coeff(0);
        let b = szego_pair_sum(l);
        let residuals: Vec<f64> =
            ns.iter().zip(&values).map(|(&n, &v)| (v - l0 * (2 * n + 1) as f64 - b).norm()).collect();
        for ((&n, v), r) in ns.iter().zip(&values).zip(&residuals) {
            table.push(vec![n.to_string(), num(v.re), num(v.im), num(*r)]);
        }
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let decay = decays_faster_than(&ns, &residuals, 6);
        payload["expected_constant"] = json!(pair(b));
        payload["expected_slope"] = json!(pair(l0));
        payload["max_residual"] = json!(max_residual);
        payload["decay_n6"] = json!(decay);
        out.checks.push(Check::at_most("max_residual", max_residual, tol));
        out.checks.push(Check::holds("residual_decays_faster_than_n^-6", decay));
        out.checks.push(Check::at_most("constant_error", (fit.constant() - b).norm(), tol));
    } else {
        for (&n, v) in ns.iter().zip(&values) {
            table.push(vec![n.to_string(), num(v.re), num(v.im), String::new()]);
        }
    }
    out.payload = payload;
    out.tables.push(table);
    Ok(out)
}

/// `r(n) <= r(n₀)(n₀/n)^p` on the grid, or below the roundoff floor of `log det`.
fn decays_faster_than(ns: &[usize], residuals: &[f64], p: i32) -> bool {
    let (n0, r0) = (ns[0] as f64, residuals[0]);
    ns.iter().zip(residuals).all(|(&n, &r)| {
        let floor = 1e3 * f64::EPSILON * (2 * n + 1) as f64;
        r <= (r0 * (n0 / n as f64).powi(p)).max(floor)
    })
}

fn zeta(env: &Env<'_>) -> Res<Outcome> {
    let op = env.operator("A")?;
    let zp = env.ctx.zeta_params()?;
    let q = env.ctx.regularizer()?;
    let p = env.ctx.params();
    let mut out = Outcome::default();
    if let Some(r) = p.r {
        if r == 0 {
            return Err(CliError::field(&env.ctx.origin, "params.r", "power must be >= 1"));
        }
        let [zr, zi] = env.ctx.require(p.z, "z")?;
        let z = Complex64::new(zr, zi);
        let ns = if p.ns.is_some() || p.n_range.is_some() { env.ctx.n_grid(None)? } else { Vec::new() };
        let tol = env.tolerance(1e-8)?;
        let value = zeta_trace_function(&op.op, r, z, &zp)?;
        let traces = pool::map(env.threads, &ns, |&n| Ok::<_, CliError>(truncated_qz_trace(&op.op, r, n, z)))?;
        let mut table = Table::new("limit", &["n", "trace_re", "trace_im", "abs_error"]);
        for (&n, t) in ns.iter().zip(&traces) {
            table.push(vec![n.to_string(), num(t.re), num(t.im), num((t - value).norm())]);
        }
        let errors: Vec<f64> = traces.iter().map(|t| (t - value).norm()).collect();
        out.payload = json!({
            "r": r,
            "z": [zr, zi],
            "value": pair(value),
            "z_times_value": pair(z * value),
            "ns": ns,
            "abs_errors": errors,
        });
        if let Some(&last) = errors.last() {
            out.checks.push(Check::at_most("limit_abs_error", last, tol));
        }
        out.tables.push(table);
        return Ok(out);
    }
    let tol = env.tolerance(1e-6)?;
    let fp = w_q_cached(env, &op.canonical, &op.op, &q, &zp)?;
    let mut payload = json!({
        "w_q": finite_part_json(&fp),
        "n_outer": zp.n_outer,
        "zero_mode": format!("{:?}", q.zero_mode).to_lowercase(),
        "regularizer_scale": q.scale,
    });
    if let Some(expected) = predicted_w(op, &q) {
        let err = (fp.finite_part - expected).norm();
        payload["expected"] = json!(pair(expected));
        payload["abs_error"] = json!(err);
        out.checks.push(Check::at_most("w_q_abs_error", err, tol));
    }
    out.payload = payload;
    Ok(out)
}

fn compare(env: &Env<'_>) -> Res<Outcome> {
    let op = env.operator("A")?;
    let sp = env.ctx.szego_params()?;
    let zp = env.ctx.zeta_params()?;
    let q = env.ctx.regularizer()?;
    let tol = env.tolerance(1e-5)?;
    let b = szego_constant(env, op, &sp)?;
    let w = w_of(env, op, &q, &zp)?;
    let mut out = Outcome::default();
    let mut payload = json!({
        "szego": pair(b),
        "zeta": pair(w),
        "difference": pair(b - w),
        "zero_mode": format!("{:?}", q.zero_mode).to_lowercase(),
    });
    if let (Some(l), Some(ew)) = (&op.log_symbol, predicted_w(op, &q)) {
        payload["expected_szego"] = json!(pair(szego_pair_sum(l)));
        payload["expected_zeta"] = json!(pair(ew));
    }
    if let Some(s) = env.operators.get("S") {
        if !s.op.terms().is_empty() {
            return Err(zdet::Error::Combine("locality perturbation must be pure smoothing".into()).into());
        }
        let moved = perturbed(op, s)?;
        let b2 = szego_constant(env, &moved, &sp)?;
        let w2 = w_of(env, &moved, &q, &zp)?;
        let change = ((b2 - w2) - (b - w)).norm();
        payload["perturbed"] = json!({
            "szego": pair(b2),
            "zeta": pair(w2),
            "difference": pair(b2 - w2),
            "moved_szego": (b2 - b).norm(),
            "moved_zeta": (w2 - w).norm(),
            "difference_change": change,
        });
        out.checks.push(Check::at_most("difference_change", change, tol));
        if let Some(min) = env.ctx.params().min_move {
            out.checks.push(Check::holds("szego_moves", (b2 - b).norm() > min));
            out.checks.push(Check::holds("zeta_moves", (w2 - w).norm() > min));
        }
    }
    out.payload = payload;
    Ok(out)
}

fn kappa_at(env: &Env<'_>, a: &ResolvedOperator, b: &ResolvedOperator, q: &ZollRegularizer, zp: &ZetaParams) -> Res<Complex64> {
    let product = OperatorProduct::new(vec![&a.op, &b.op]);
    let key = format!("product[{},{}]", a.canonical, b.canonical);
    let ab = w_q_cached(env, &key, &product, q, zp)?.finite_part;
    Ok(ab - w_of(env, a, q, zp)? - w_of(env, b, q, zp)?)
}

fn report_checks(out: &mut Outcome, name: &str, r: &ExperimentReport) {
    out.flags.extend(r.flags.iter().map(|f| format!("{name}: {f}")));
}

fn anomaly(env: &Env<'_>) -> Res<Outcome> {
    let a = env.operator("A")?;
    let b = env.operator("B")?;
    let q = env.ctx.regularizer()?;
    let ap = env.anomaly_params()?;
    let tol = env.tolerance(1e-5)?;
    let mut out = Outcome::default();
    let kappa = kappa_at(env, a, b, &q, &ap.zeta)?;
    let mut payload = json!({ "kappa": pair(kappa), "n_outer": ap.zeta.n_outer });
    if env.ctx.params().doubling.unwrap_or(false) {
        let fine = kappa_at(env, a, b, &q, &ap.zeta.doubled())?;
        let drift = (fine - kappa).norm();
        payload["kappa_doubled"] = json!(pair(fine));
        payload["kappa_drift"] = json!(drift);
        out.checks.push(Check::at_most("kappa_drift", drift, tol));
    }
    if let Some(da) = env.operators.get("dA") {
        let r = sigma_variation(&a.op, &da.op, &q, &ap)?;
        let sigma = r.difference();
        payload["sigma"] = json!({ "value": pair(sigma), "report": experiment_json(&r, env.config_hash) });
        out.checks.push(Check::at_most("sigma_abs", sigma.norm(), tol));
        report_checks(&mut out, "sigma", &r);
    }
    out.payload = payload;
    Ok(out)
}

fn cocycle(env: &Env<'_>) -> Res<Outcome> {
    let a = env.operator("A")?;
    let b = env.operator("B")?;
    let q = env.ctx.regularizer()?;
    let ap = env.anomaly_params()?;
    let tol = env.tolerance(1e-3)?;
    let mut out = Outcome::default();
    let coarse = cocycle_compare(&a.op, &b.op, &q, &ap)?;
    report_checks(&mut out, "cocycle", &coarse);
    let mut payload = json!({ "coarse": experiment_json(&coarse, env.config_hash) });
    out.checks.push(Check::at_most("rel_error", coarse.rel_error, tol));
    if env.ctx.params().doubling.unwrap_or(true) {
        let fine = cocycle_compare(&a.op, &b.op, &q, &ap.doubled())?;
        report_checks(&mut out, "cocycle_doubled", &fine);
        // relative errors far below the tolerance are noise; their ratio is not drift
        let floor = tol * 1e-2;
        let drift = fine.rel_error.max(floor) / coarse.rel_error.max(floor);
        payload["fine"] = json!(experiment_json(&fine, env.config_hash));
        payload["drift_ratio"] = json!(drift);
        out.checks.push(Check::at_most("rel_error_doubled", fine.rel_error, tol));
        out.checks.push(Check::at_most("drift_ratio", drift, 2.0));
    }
    out.payload = payload;
    Ok(out)
}

fn regshift(env: &Env<'_>) -> Res<Outcome> {
    let b = env.operator("B")?;
    let c = env.ctx.positive(env.ctx.params().scale.unwrap_or(2.0), "scale")?;
    let ap = env.anomaly_params()?;
    let tol = env.tolerance(1e-6)?;
    let r = regularizer_shift(&b.op, c, &ap)?;
    let mut out = Outcome { payload: json!({ "report": experiment_json(&r, env.config_hash) }), ..Outcome::default() };
    report_checks(&mut out, "regshift", &r);
    out.checks.push(Check::at_most("abs_error", r.abs_error, tol));
    Ok(out)
}

/// Largest `m` for which `Σ_{k<=m} k^6` is exact in `u128`.
const HARDY_M_LIMIT: u64 = 100_000;

fn kahan(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

fn hardy_selftest(env: &Env<'_>) -> Res<Outcome> {
    let p = env.ctx.params();
    let powers = p.powers.clone().unwrap_or_else(|| (0..=6).collect());
    let brute = p.brute_powers.clone().unwrap_or_else(|| vec![-0.5, -1.5]);
    let m_max = p.m_max.unwrap_or(10_000);
    let tol = env.tolerance(1e-9)?;
    let brute_tol = env.ctx.positive(p.brute_tolerance.unwrap_or(1e-12), "brute_tolerance")?;
    if m_max == 0 || m_max > HARDY_M_LIMIT {
        return Err(CliError::field(&env.ctx.origin, "params.m_max", format!("must lie in 1..={HARDY_M_LIMIT}")));
    }
    if let Some(&s) = powers.iter().find(|&&s| s > 6) {
        return Err(CliError::field(&env.ctx.origin, "params.powers", format!("power {s} exceeds 6")));
    }
    let sampled = |m: u64| m <= 10 || m.is_multiple_of(1000) || m == m_max;
    let per_power = pool::map(env.threads, &powers, |&s| {
        let depth = (s as usize + 2) / 2;
        let mut exact: u128 = 0;
        let mut worst = 0.0f64;
        let mut rows = Vec::new();
        for m in 1..=m_max {
            exact += (m as u128).pow(s);
            let want = exact as f64;
            let got = hardy_partial_sum(Complex64::new(s as f64, 0.0), m, depth)?;
            let rel = (got - want).norm() / want;
            worst = worst.max(rel);
            if sampled(m) {
                rows.push(vec![s.to_string(), m.to_string(), exact.to_string(), num(got.re), num(rel)]);
            }
        }
        Ok::<_, CliError>((worst, rows))
    })?;
    let mut out = Outcome::default();
    let mut table = Table::new("faulhaber", &["s", "m", "exact", "formula", "rel_error"]);
    let mut worst = BTreeMap::new();
    for (&s, (w, rows)) in powers.iter().zip(per_power) {
        worst.insert(s.to_string(), w);
        out.checks.push(Check::at_most(format!("faulhaber_s{s}"), w, tol));
        for r in rows {
            table.push(r);
        }
    }
    let mut brute_table = Table::new("brute", &["s", "m", "brute", "formula", "abs_error"]);
    let mut brute_errors = BTreeMap::new();
    for &s in &brute {
        let sum = kahan((1..=m_max).rev().map(|k| (k as f64).powf(s)));
        let got = hardy_partial_sum(Complex64::new(s, 0.0), m_max, 3)?;
        let err = (got - sum).norm();
        brute_errors.insert(num(s), err);
        out.checks.push(Check::at_most(format!("brute_s{s}"), err, brute_tol));
        brute_table.push(vec![num(s), m_max.to_string(), num(sum), num(got.re), num(err)]);
    }
    out.payload = json!({
        "m_max": m_max,
        "max_rel_error": worst,
        "brute_abs_error": brute_errors,
    });
    out.tables.push(table);
    out.tables.push(brute_table);
    Ok(out)
}

fn symb2d_verify(env: &Env<'_>) -> Res<Outcome> {
    let la_spec = env.symbol("log_a")?;
    let lb_spec = env.symbol("log_b")?;
    let lq_spec = env.symbol("log_q")?;
    let ns = env.ctx.n_grid(Some(vec![32, 64, 128]))?;
    if let Some(n) = ns.iter().find(|n| !n.is_power_of_two() || **n < MIN_GRID) {
        return Err(CliError::field(&env.ctx.origin, "params.ns", format!("symbol grid {n} must be a power of two >= {MIN_GRID}")));
    }
    let tol = env.tolerance(1e-9)?;
    let lb_lower = SymbolSpec { degree: lb_spec.degree - 1, ..lb_spec.clone() };
    let rows = pool::map(env.threads, &ns, |&n| {
        let la = la_spec.build(n, n)?;
        let lb = lb_spec.build(n, n)?;
        let q = lq_spec.build(n, n)?;
        let a = la.map_degree_zero(f64::exp)?;
        let b = lb.map_degree_zero(f64::exp)?;
        let identity = identity_suite(&b, &a, &q)?;
        let vanishing = vanishing_checks(&la, &lb, &q)?;
        let bracket_residue = residue2d(&poisson(&la, &lb_lower.build(n, n)?)?)?;
        let anomaly = sym_anomaly_d2(&la, &lb, &q)?;
        let swapped = sym_anomaly_d2(&lb, &la, &q)?;
        let same = sym_anomaly_d2(&la, &la, &q)?;
        Ok::<_, CliError>((identity, vanishing, bracket_residue, anomaly, swapped, same))
    })?;
    let mut out = Outcome::default();
    let mut table = Table::new(
        "symb2d",
        &["n", "identity_nested", "identity_reciprocal", "vanishing_max", "bracket_residue", "sym_anomaly", "swap_gap", "self_anomaly"],
    );
    let mut grids = Vec::new();
    let mut previous: Option<f64> = None;
    for (i, (&n, (id, van, res, an, sw, same))) in ns.iter().zip(&rows).enumerate() {
        table.push(vec![
            n.to_string(),
            num(id.nested),
            num(id.reciprocal),
            num(van.max()),
            num(*res),
            num(*an),
            num(an - sw),
            num(*same),
        ]);
        grids.push(json!({
            "n": n,
            "identity": identity_json(id),
            "vanishing": vanishing_json(van),
            "bracket_residue": res,
            "sym_anomaly": an,
            "sym_anomaly_swapped": sw,
            "self_anomaly": same,
        }));
        out.checks.push(Check::holds(format!("swap_exact_n{n}"), an.to_bits() == sw.to_bits()));
        out.checks.push(Check::at_most(format!("self_anomaly_n{n}"), same.abs(), 1e-12));
        // the coarsest grid only anchors the ladder
        if i > 0 {
            out.checks.push(Check::at_most(format!("identity_n{n}"), id.max(), tol));
            out.checks.push(Check::at_most(format!("vanishing_n{n}"), van.max(), tol));
            out.checks.push(Check::at_most(format!("bracket_residue_n{n}"), res.abs(), tol));
        }
        if let Some(prev) = previous {
            // spectral convergence stops at the roundoff floor, which grows like ε N²
            let floor = 100.0 * f64::EPSILON * (n * n) as f64;
            out.checks.push(Check::at_most(format!("refinement_n{n}"), id.max(), (prev / 100.0).max(floor)));
        }
        previous = Some(id.max());
    }
    out.payload = json!({ "grids": grids });
    out.tables.push(table);
    Ok(out)
}

fn decomp_check(env: &Env<'_>) -> Res<Outcome> {
    let p = env.ctx.params();
    let seeds = p.seeds.clone().unwrap_or_else(|| (0..10).collect());
    let bandwidth = p.bandwidth.unwrap_or(3);
    let order = p.order.unwrap_or(3);
    let amplitude = p.amplitude.unwrap_or(0.6);
    let r_max = p.r_max.unwrap_or(3);
    let n = p.n.unwrap_or(30);
    let tol = env.tolerance(1e-12)?;
    if seeds.is_empty() || r_max == 0 {
        return Err(CliError::field(&env.ctx.origin, "params", "need at least one seed and r_max >= 1"));
    }
    let rows = pool::map(env.threads, &seeds, |&seed| {
        let op: CircleOperator = random_banded(seed, bandwidth, order, amplitude);
        let dense = op.truncate(n);
        (1..=r_max)
            .map(|r| Ok::<_, CliError>((seed, r, decomposition_trace(&op, r, n)?, linalg::trace_power(&dense, r))))
            .collect::<Res<Vec<_>>>()
    })?;
    let mut out = Outcome::default();
    let mut table = Table::new("decomposition", &["seed", "r", "lhs_re", "lhs_im", "dense_re", "dense_im", "abs_error"]);
    let mut worst = 0.0f64;
    for (seed, r, lhs, rhs) in rows.into_iter().flatten() {
        let err = (lhs - rhs).norm();
        worst = worst.max(err);
        table.push(vec![seed.to_string(), r.to_string(), num(lhs.re), num(lhs.im), num(rhs.re), num(rhs.im), num(err)]);
    }
    out.checks.push(Check::at_most("max_abs_error", worst, tol));
    out.payload = json!({ "n": n, "seeds": seeds, "r_max": r_max, "max_abs_error": worst });
    out.tables.push(table);
    Ok(out)
}

/// Payload-independent description of a numeric failure.
pub fn error_body(e: &CliError) -> Value {
    let kind = match e {
        CliError::Numeric(inner) => format!("{inner:?}").split(['(', ' ', '{']).next().unwrap_or("Numeric").to_string(),
        _ => "Other".into(),
    };
    json!({ "error": { "kind": kind, "message": e.to_string() } })
}
