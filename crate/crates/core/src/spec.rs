//! JSON interchange: operator and symbol specifications, and report records.
//!
//! Complex numbers are `[re, im]` pairs. Serialization is canonical: parsing a
//! canonical document and re-serializing it reproduces it byte for byte.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::anomaly::ExperimentReport;
use crate::circle::{CircleOperator, FourierSeries, MultiplierExpansion, Smoothing, Term};
use crate::detfit::AsymptoticFit;
use crate::error::{Error, Result};
use crate::symb2d::{IdentityResiduals, Symbol2D, TrigMode, VanishingResiduals};
use crate::zeta::FinitePartResult;

/// Version tag carried by every emitted document.
pub const SCHEMA: &str = "zdet/1";

pub type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Integer-keyed map serialized as a JSON object whose keys are decimal
/// strings in numeric order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeMap(pub BTreeMap<i64, Pair>);

impl Serialize for ModeMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(&k.to_string(), v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for ModeMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, Pair>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for (k, v) in raw {
            let key: i64 = k.trim().parse().map_err(|_| serde::de::Error::custom(format!("mode key `{k}` is not an integer")))?;
            if out.insert(key, v).is_some() {
                return Err(serde::de::Error::custom(format!("duplicate mode key {key}")));
            }
        }
        Ok(Self(out))
    }
}

/// One diagonal: `{"shift", "plus", "minus", "exceptional"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub shift: i64,
    pub plus: Vec<Pair>,
    pub minus: Vec<Pair>,
    pub exceptional: ModeMap,
}

/// Seeded smoothing block; `scale` defaults to `[1, 0]` and is omitted then.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingSpec {
    pub seed: u64,
    pub amplitude: f64,
    pub width: f64,
    pub support: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Pair>,
}

/// `{"terms": [...], "smoothing": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<SmoothingSpec>,
}

impl OperatorSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(format!("operator spec: {e}")))
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("operator spec serializes")
    }

    pub fn build(&self) -> Result<CircleOperator<f64>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let exceptional = t.exceptional.0.iter().map(|(&k, &v)| (k, unpair(v))).collect();
            let mult = MultiplierExpansion::new(
                t.plus.iter().copied().map(unpair).collect(),
                t.minus.iter().copied().map(unpair).collect(),
                exceptional,
            )?;
            terms.push(Term { shift: t.shift, mult });
        }
        let smoothing = match &self.smoothing {
            None => None,
            Some(s) => {
                if !(s.amplitude >= 0.0) || !(s.width > 0.0) {
                    return Err(Error::Spec(format!(
                        "smoothing needs amplitude >= 0 and width > 0 (got {}, {})",
                        s.amplitude, s.width
                    )));
                }
                let scale = s.scale.map_or(Complex64::new(1.0, 0.0), unpair);
                Some(Smoothing::generate(s.seed, s.amplitude, s.width, s.support, scale))
            }
        };
        Ok(CircleOperator::new(terms, smoothing))
    }

    pub fn from_operator(op: &CircleOperator<f64>) -> Self {
        let terms = op
            .terms()
            .iter()
            .map(|t| TermSpec {
                shift: t.shift,
                plus: t.mult.plus().iter().copied().map(pair).collect(),
                minus: t.mult.minus().iter().copied().map(pair).collect(),
                exceptional: ModeMap(t.mult.exceptional().iter().map(|(&k, &v)| (k, pair(v))).collect()),
            })
            .collect();
        let smoothing = op.smoothing().map(|s| SmoothingSpec {
            seed: s.seed,
            amplitude: s.amplitude,
            width: s.width,
            support: s.support,
            scale: (s.scale != Complex64::new(1.0, 0.0)).then(|| pair(s.scale)),
        });
        Self { terms, smoothing }
    }
}

/// `{"coeffs": {"k": [re, im], ...}}`: a finitely supported Fourier series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSpec {
    pub coeffs: ModeMap,
}

impl FourierSpec {
    pub fn build(&self) -> FourierSeries<f64> {
        FourierSeries::from_pairs(self.coeffs.0.iter().map(|(&k, &v)| (k, unpair(v))))
    }

    pub fn from_series(f: &FourierSeries<f64>) -> Self {
        Self { coeffs: ModeMap(f.iter().map(|(k, v)| (k, pair(v))).collect()) }
    }
}

/// `{"kx1", "kx2", "kw", "cos", "sin"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub kx1: i64,
    pub kx2: i64,
    pub kw: i64,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// `{"modes": [...], "degree": r, "log_coeff": μ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub modes: Vec<ModeSpec>,
    #[serde(default)]
    pub degree: i32,
    #[serde(default)]
    pub log_coeff: f64,
}

impl SymbolSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(format!("symbol spec: {e}")))
    }

    pub fn modes(&self) -> Vec<TrigMode<f64>> {
        self.modes
            .iter()
            .map(|m| TrigMode { kx1: m.kx1, kx2: m.kx2, kw: m.kw, cos: m.cos, sin: m.sin })
            .collect()
    }

    pub fn build(&self, n: usize, n_omega: usize) -> Result<Symbol2D<f64>> {
        Symbol2D::from_trig(n, n_omega, &self.modes(), self.degree, self.log_coeff)
    }
}

pub fn finite_part_json(r: &FinitePartResult<f64>) -> Value {
    json!({
        "schema": SCHEMA,
        "finite_part": pair(r.finite_part),
        "pole_residue": pair(r.pole_residue),
        "tail_residual": r.tail_residual,
        "truncation_bound": r.truncation_bound,
        "split_K": r.split,
    })
}

pub fn fit_json(fit: &AsymptoticFit<f64>) -> Value {
    let coefficients: Map<String, Value> =
        fit.coefficients.iter().map(|(e, c)| (e.to_string(), json!(pair(*c)))).collect();
    json!({
        "schema": SCHEMA,
        "coefficients": coefficients,
        "log_coefficient": if fit.has_log { json!(pair(fit.log_coefficient)) } else { Value::Null },
        "residual": fit.residual_norm,
        "condition_estimate": fit.condition_estimate,
        "samples": fit.samples,
    })
}

pub fn experiment_json(r: &ExperimentReport<f64>, inputs_hash: &str) -> Value {
    json!({
        "schema": SCHEMA,
        "experiment": r.experiment,
        "inputs_hash": inputs_hash,
        "lhs": pair(r.lhs),
        "rhs": pair(r.rhs),
        "abs_error": r.abs_error,
        "rel_error": r.rel_error,
        "diagnostics": r.diagnostics,
        "flags": r.flags,
    })
}

pub fn identity_json(r: &IdentityResiduals<f64>) -> Value {
    json!({ "nested": r.nested, "reciprocal": r.reciprocal, "n": r.n, "n_omega": r.n_omega })
}

pub fn vanishing_json(r: &VanishingResiduals<f64>) -> Value {
    json!({
        "leibniz_gap": r.leibniz_gap,
        "bracket_residue": r.bracket_residue,
        "second_term": r.second_term,
        "g_second_derivative": r.g_second_derivative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{"terms":[{"shift":-1,"plus":[[0.5,0.0],[0.1,-0.2]],"minus":[[0.5,0.0]],"exceptional":{"-3":[1.0,0.0],"0":[0.5,0.0],"12":[0.25,0.0]}}],"smoothing":{"seed":7,"amplitude":0.01,"width":4.0,"support":20}}"#;

    #[test]
    fn canonical_round_trip() {
        let spec = OperatorSpec::parse(SAMPLE).unwrap();
        assert_eq!(spec.to_canonical_json(), SAMPLE);
        let again = OperatorSpec::from_operator(&spec.build().unwrap());
        assert_eq!(again, spec);
    }

    #[test]
    fn rejects_missing_zero_mode_and_bad_keys() {
        let no_zero = r#"{"terms":[{"shift":0,"plus":[],"minus":[],"exceptional":{}}]}"#;
        assert!(OperatorSpec::parse(no_zero).unwrap().build().is_err());
        let bad_key = r#"{"terms":[{"shift":0,"plus":[],"minus":[],"exceptional":{"x":[1,0]}}]}"#;
        assert!(OperatorSpec::parse(bad_key).is_err());
        assert!(OperatorSpec::parse(r#"{"terms":[],"extra":1}"#).is_err());
    }

    #[test]
    fn symbol_spec_builds() {
        let s = SymbolSpec::parse(r#"{"modes":[{"kx1":1,"kx2":0,"kw":0,"cos":0.0,"sin":1.0}],"degree":0,"log_coeff":1.0}"#)
            .unwrap();
        let sym = s.build(16, 16).unwrap();
        assert_eq!(sym.log_coeff(), 1.0);
        assert!((sym.values()[[4, 0, 0]] - 1.0).abs() < 1e-15);
    }
}
