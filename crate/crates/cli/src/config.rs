//! Experiment configuration files.
//!
//! A config is one JSON object. Operator and symbol references resolve
//! relative to the directory holding the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zdet::circle::{mk_multiplication, mk_smoothing, near_identity, random_banded, ZeroMode};
use zdet::spec::{FourierSpec, OperatorSpec, SymbolSpec, SCHEMA};
use zdet::symb2d::random_trig_modes;
use zdet::{CircleOperator, FourierSeries, SzegoParams, ZetaParams, ZollRegularizer};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Szego,
    Zeta,
    Compare,
    Anomaly,
    Cocycle,
    Regshift,
    HardySelftest,
    Symb2dVerify,
    DecompCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Szego => "szego",
            Self::Zeta => "zeta",
            Self::Compare => "compare",
            Self::Anomaly => "anomaly",
            Self::Cocycle => "cocycle",
            Self::Regshift => "regshift",
            Self::HardySelftest => "hardy-selftest",
            Self::Symb2dVerify => "symb2d-verify",
            Self::DecompCheck => "decomp-check",
        }
    }
}

/// Where an operator comes from. Generated operators take the run seed when
/// `seed` is omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorRef {
    Path(PathBuf),
    Inline(OperatorSpec),
    /// `M_f` with `f = exp(l)` for the given Fourier series `l`.
    ExpOf(FourierSpec),
    Multiplication(FourierSpec),
    NearIdentity(Generated),
    RandomBanded(Generated),
    Smoothing(SmoothingGen),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generated {
    #[serde(default)]
    pub seed: Option<u64>,
    pub bandwidth: usize,
    pub order: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingGen {
    #[serde(default)]
    pub seed: Option<u64>,
    pub amplitude: f64,
    pub width: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolRef {
    Path(PathBuf),
    Inline(SymbolSpec),
    Random(RandomSymbol),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSymbol {
    #[serde(default)]
    pub seed: Option<u64>,
    pub max_mode: i64,
    pub amplitude: f64,
    #[serde(default)]
    pub degree: i32,
    #[serde(default)]
    pub log_coeff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NRange {
    pub start: usize,
    pub end: usize,
    #[serde(default = "one")]
    pub step: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SzegoCfg {
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub depth: Option<usize>,
    pub stride: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZetaCfg {
    pub n_outer: Option<usize>,
    pub n_inner: Option<usize>,
    pub tail_order: Option<usize>,
    pub window: Option<[usize; 2]>,
    pub log_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroModeCfg {
    #[default]
    Annihilate,
    Identity,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerCfg {
    pub scale: Option<f64>,
    #[serde(default)]
    pub zero_mode: ZeroModeCfg,
}

/// Numeric parameters; each experiment reads the subset it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub ns: Option<Vec<usize>>,
    pub n_range: Option<NRange>,
    pub szego: Option<SzegoCfg>,
    pub zeta: Option<ZetaCfg>,
    pub regularizer: Option<RegularizerCfg>,
    /// Evaluation point `[re, im]` of the continued trace.
    pub z: Option<[f64; 2]>,
    /// Power `r` in `tr A^r Q^z`.
    pub r: Option<usize>,
    /// Regularizer scale `c` in `w_{cQ} - w_Q`.
    pub scale: Option<f64>,
    pub tolerance: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub bandwidth: Option<usize>,
    pub order: Option<usize>,
    pub amplitude: Option<f64>,
    pub r_max: Option<usize>,
    pub n: Option<usize>,
    pub powers: Option<Vec<u32>>,
    pub brute_powers: Option<Vec<f64>>,
    pub m_max: Option<u64>,
    pub step: Option<f64>,
    pub doubling: Option<bool>,
    /// Smallest acceptable shift of each ingredient under a perturbation.
    pub min_move: Option<f64>,
    pub brute_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub operators: BTreeMap<String, OperatorRef>,
    #[serde(default)]
    pub symbols: BTreeMap<String, SymbolRef>,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses config text; errors carry the field path and line/column.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let mut message = inner.to_string();
            if let Some(i) = message.rfind(" at line ") {
                message.truncate(i);
            }
            CliError::Config {
                origin: origin.to_string(),
                line: inner.line(),
                column: inner.column(),
                field: if path == "." { String::new() } else { path },
                message,
            }
        })?;
        if let Some(schema) = &cfg.schema {
            if schema != SCHEMA {
                return Err(CliError::field(origin, "schema", format!("expected `{SCHEMA}`, found `{schema}`")));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Canonical JSON used for hashing; key order is fixed by the types.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// An operator with the data needed to key caches and predict values.
#[derive(Debug, Clone)]
pub struct ResolvedOperator {
    pub op: CircleOperator,
    /// Canonical JSON of the built operator.
    pub canonical: String,
    /// `log f` when the operator is `M_f` built by `exp_of`.
    pub log_symbol: Option<FourierSeries>,
}

/// Validated view of a config for one run.
pub struct Context {
    pub config: ExperimentConfig,
    pub origin: String,
    pub base_dir: PathBuf,
    pub seed: u64,
}

impl Context {
    pub fn new(config: ExperimentConfig, origin: &str, base_dir: PathBuf, seed_override: Option<u64>) -> Self {
        let seed = seed_override.or(config.seed).unwrap_or(0);
        let mut config = config;
        config.seed = Some(seed);
        Self { config, origin: origin.to_string(), base_dir, seed }
    }

    fn err(&self, field: &str, message: impl Into<String>) -> CliError {
        CliError::field(&self.origin, field, message)
    }

    pub fn params(&self) -> &Params {
        &self.config.params
    }

    fn read_referenced(&self, field: &str, path: &Path) -> Result<String, CliError> {
        let full = self.base_dir.join(path);
        fs::read_to_string(&full).map_err(|e| self.err(field, format!("cannot read {}: {e}", full.display())))
    }

    pub fn operator(&self, name: &str) -> Result<ResolvedOperator, CliError> {
        self.optional_operator(name)?
            .ok_or_else(|| self.err(&format!("operators.{name}"), "required operator is missing"))
    }

    pub fn optional_operator(&self, name: &str) -> Result<Option<ResolvedOperator>, CliError> {
        let field = format!("operators.{name}");
        let Some(r) = self.config.operators.get(name) else { return Ok(None) };
        let bad = |e: zdet::Error| self.err(&field, e.to_string());
        let mut log_symbol = None;
        let op = match r {
            OperatorRef::Path(p) => OperatorSpec::parse(&self.read_referenced(&field, p)?).and_then(|s| s.build()).map_err(bad)?,
            OperatorRef::Inline(spec) => spec.build().map_err(bad)?,
            OperatorRef::ExpOf(l) => {
                let l = l.build();
                let op = mk_multiplication(&l.exp());
                log_symbol = Some(l);
                op
            }
            OperatorRef::Multiplication(f) => mk_multiplication(&f.build()),
            OperatorRef::NearIdentity(g) => {
                near_identity(g.seed.unwrap_or(self.seed), g.bandwidth, g.order, g.amplitude)
            }
            OperatorRef::RandomBanded(g) => {
                random_banded(g.seed.unwrap_or(self.seed), g.bandwidth, g.order, g.amplitude)
            }
            OperatorRef::Smoothing(s) => {
                if !(s.amplitude >= 0.0 && s.width > 0.0) {
                    return Err(self.err(&field, "smoothing needs amplitude >= 0 and width > 0"));
                }
                mk_smoothing(s.seed.unwrap_or(self.seed), s.amplitude, s.width, s.support)
            }
        };
        let canonical = OperatorSpec::from_operator(&op).to_canonical_json();
        Ok(Some(ResolvedOperator { op, canonical, log_symbol }))
    }

    pub fn symbol(&self, name: &str) -> Result<SymbolSpec, CliError> {
        let field = format!("symbols.{name}");
        let r = self.config.symbols.get(name).ok_or_else(|| self.err(&field, "required symbol is missing"))?;
        match r {
            SymbolRef::Path(p) => SymbolSpec::parse(&self.read_referenced(&field, p)?).map_err(|e| self.err(&field, e.to_string())),
            SymbolRef::Inline(s) => Ok(s.clone()),
            SymbolRef::Random(r) => {
                let modes = random_trig_modes(r.seed.unwrap_or(self.seed), r.max_mode, r.amplitude);
                let modes = modes
                    .into_iter()
                    .map(|m| zdet::spec::ModeSpec { kx1: m.kx1, kx2: m.kx2, kw: m.kw, cos: m.cos, sin: m.sin })
                    .collect();
                Ok(SymbolSpec { modes, degree: r.degree, log_coeff: r.log_coeff })
            }
        }
    }

    /// The n grid from `ns` or `n_range`; nonempty and strictly increasing.
    pub fn n_grid(&self, default: Option<Vec<usize>>) -> Result<Vec<usize>, CliError> {
        let p = self.params();
        let grid = match (&p.ns, &p.n_range) {
            (Some(_), Some(_)) => return Err(self.err("params", "give either `ns` or `n_range`, not both")),
            (Some(ns), None) => ns.clone(),
            (None, Some(r)) => {
                if r.step == 0 {
                    return Err(self.err("params.n_range.step", "step must be positive"));
                }
                (r.start..=r.end).step_by(r.step).collect()
            }
            (None, None) => default.ok_or_else(|| self.err("params.ns", "an n grid is required"))?,
        };
        if grid.is_empty() {
            return Err(self.err("params.ns", "n range is empty"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(self.err("params.ns", "n range must be strictly increasing"));
        }
        Ok(grid)
    }

    pub fn szego_params(&self) -> Result<SzegoParams, CliError> {
        let d = SzegoParams::default();
        let c = self.params().szego.clone().unwrap_or_default();
        let p = SzegoParams {
            n_min: c.n_min.unwrap_or(d.n_min),
            n_max: c.n_max.unwrap_or(d.n_max),
            depth: c.depth.unwrap_or(d.depth),
            stride: c.stride.unwrap_or(d.stride),
        };
        if p.n_min == 0 || p.n_max <= p.n_min || p.stride == 0 {
            return Err(self.err("params.szego", format!("empty sample range {}..={}", p.n_min, p.n_max)));
        }
        Ok(p)
    }

    pub fn zeta_params(&self) -> Result<ZetaParams, CliError> {
        let c = self.params().zeta.clone().unwrap_or_default();
        let mut p = ZetaParams::with_outer(c.n_outer.unwrap_or(ZetaParams::default().n_outer));
        if let Some(k) = c.n_inner {
            p.n_inner = k;
            p.window = (k / 2, k);
        }
        if let Some(j) = c.tail_order {
            p.tail_order = j;
        }
        if let Some([lo, hi]) = c.window {
            p.window = (lo, hi);
        }
        if let Some(t) = c.log_tol {
            p.log_tol = t;
        }
        if p.n_inner == 0 || p.n_inner > p.n_outer || p.window.0 == 0 || p.window.0 >= p.window.1 || p.window.1 > p.n_inner {
            return Err(self.err(
                "params.zeta",
                format!("need 0 < lo < hi <= n_inner <= n_outer (window {:?}, n_inner {})", p.window, p.n_inner),
            ));
        }
        Ok(p)
    }

    pub fn regularizer(&self) -> Result<ZollRegularizer, CliError> {
        let c = self.params().regularizer.clone().unwrap_or_default();
        let scale = c.scale.unwrap_or(1.0);
        if !(scale > 0.0) {
            return Err(self.err("params.regularizer.scale", "scale must be positive"));
        }
        let mode = match c.zero_mode {
            ZeroModeCfg::Annihilate => ZeroMode::Annihilate,
            ZeroModeCfg::Identity => ZeroMode::Identity,
        };
        Ok(ZollRegularizer::new(scale).with_zero_mode(mode))
    }

    pub fn require<T: Copy>(&self, value: Option<T>, field: &str) -> Result<T, CliError> {
        value.ok_or_else(|| self.err(&format!("params.{field}"), "required parameter is missing"))
    }

    pub fn positive(&self, value: f64, field: &str) -> Result<f64, CliError> {
        if value > 0.0 {
            Ok(value)
        } else {
            Err(self.err(&format!("params.{field}"), format!("must be positive, got {value}")))
        }
    }
}
