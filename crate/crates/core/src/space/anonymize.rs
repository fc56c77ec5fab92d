//! Name and scale anonymization of a search space.
//!
//! Parameters are renamed `param1..paramN` in declaration order. FLOAT
//! domains become `[0, 1]`, INTEGER `[a, b]` becomes `[0, b - a]`, and
//! ORDINAL/CATEGORICAL choices become the integers `0..K`. The codec maps
//! configurations in both directions.

use std::collections::BTreeMap;

use super::{Condition, Configuration, Parameter, ParameterDomain, SearchSpace, SpaceError, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnonymizeError {
    #[error("parameter '{0}' is not known to the codec")]
    UnknownName(String),
    #[error("value {value} of '{name}' does not fit the codec")]
    BadValue { name: String, value: Value },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Per-parameter value transform, stored in terms of the original domain.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamTransform {
    /// `u = (v - low) / (high - low)`.
    Affine { low: f64, high: f64 },
    /// `u = v - low`.
    Shift { low: i64, high: i64 },
    /// `u = index of v among choices`.
    Index { choices: Vec<Value> },
}

impl ParamTransform {
    fn forward(&self, v: &Value) -> Option<Value> {
        match self {
            ParamTransform::Affine { low, high } => {
                let x = v.as_f64()?;
                Some(Value::Float(((x - low) / (high - low)).clamp(0.0, 1.0)))
            }
            ParamTransform::Shift { low, high } => {
                let x = v.as_i64()?;
                (x >= *low && x <= *high).then(|| Value::Int(x - low))
            }
            ParamTransform::Index { choices } => {
                choices.iter().position(|c| c == v).map(|i| Value::Int(i as i64))
            }
        }
    }

    fn inverse(&self, u: &Value) -> Option<Value> {
        match self {
            ParamTransform::Affine { low, high } => {
                let x = u.as_f64().filter(|x| (0.0..=1.0).contains(x))?;
                Some(Value::Float((low + x * (high - low)).clamp(*low, *high)))
            }
            ParamTransform::Shift { low, high } => {
                let x = u.as_i64().filter(|x| *x >= 0 && *x <= high - low)?;
                Some(Value::Int(low + x))
            }
            ParamTransform::Index { choices } => {
                let i = usize::try_from(u.as_i64()?).ok()?;
                choices.get(i).cloned()
            }
        }
    }
}

/// Bidirectional name map plus per-parameter transforms.
#[derive(Clone, Debug, PartialEq)]
pub struct AnonymizationCodec {
    /// Real name to anonymous name.
    pub name_map: BTreeMap<String, String>,
    /// Anonymous name to real name.
    pub reverse_map: BTreeMap<String, String>,
    /// Keyed by real name.
    pub scale_map: BTreeMap<String, ParamTransform>,
}

impl AnonymizationCodec {
    /// Maps a configuration of the original space into the anonymized one.
    pub fn forward(&self, config: &Configuration) -> Result<Configuration, AnonymizeError> {
        let mut out = Configuration::new();
        for (name, v) in config.iter() {
            let anon = self
                .name_map
                .get(name)
                .ok_or_else(|| AnonymizeError::UnknownName(name.to_owned()))?;
            let u = self.scale_map[name]
                .forward(v)
                .ok_or_else(|| AnonymizeError::BadValue {
                    name: name.to_owned(),
                    value: v.clone(),
                })?;
            out.insert(anon, u);
        }
        Ok(out)
    }

    /// Maps an anonymized configuration back to original names and scales.
    pub fn inverse(&self, config: &Configuration) -> Result<Configuration, AnonymizeError> {
        let mut out = Configuration::new();
        for (anon, u) in config.iter() {
            let name = self
                .reverse_map
                .get(anon)
                .ok_or_else(|| AnonymizeError::UnknownName(anon.to_owned()))?;
            let v = self.scale_map[name]
                .inverse(u)
                .ok_or_else(|| AnonymizeError::BadValue {
                    name: anon.to_owned(),
                    value: u.clone(),
                })?;
            out.insert(name, v);
        }
        Ok(out)
    }
}

/// Builds the anonymized space and its codec.
pub fn anonymize(space: &SearchSpace) -> (SearchSpace, AnonymizationCodec) {
    let mut name_map = BTreeMap::new();
    let mut reverse_map = BTreeMap::new();
    let mut scale_map = BTreeMap::new();
    let mut params = Vec::with_capacity(space.len());
    for (i, p) in space.parameters().iter().enumerate() {
        let anon = format!("param{}", i + 1);
        let (transform, domain) = match &p.domain {
            ParameterDomain::Float { low, high } => (
                ParamTransform::Affine { low: *low, high: *high },
                ParameterDomain::Float { low: 0.0, high: 1.0 },
            ),
            ParameterDomain::Integer { low, high } => (
                ParamTransform::Shift { low: *low, high: *high },
                ParameterDomain::Integer { low: 0, high: high - low },
            ),
            ParameterDomain::Ordinal { choices } => (
                ParamTransform::Index { choices: choices.clone() },
                ParameterDomain::Ordinal {
                    choices: (0..choices.len() as i64).map(Value::Int).collect(),
                },
            ),
            ParameterDomain::Categorical { choices } => (
                ParamTransform::Index { choices: choices.clone() },
                ParameterDomain::Categorical {
                    choices: (0..choices.len() as i64).map(Value::Int).collect(),
                },
            ),
        };
        let default = p.default.as_ref().and_then(|d| transform.forward(d));
        params.push(Parameter {
            name: anon.clone(),
            domain,
            default,
        });
        name_map.insert(p.name.clone(), anon.clone());
        reverse_map.insert(anon, p.name.clone());
        scale_map.insert(p.name.clone(), transform);
    }
    let conditions = space
        .conditions()
        .iter()
        .map(|c| Condition {
            kind: c.kind,
            parent: name_map[&c.parent].clone(),
            child: name_map[&c.child].clone(),
            value: scale_map[&c.parent]
                .forward(&c.value)
                .unwrap_or_else(|| c.value.clone()),
        })
        .collect();
    let anon_space = SearchSpace::new(params, conditions)
        .expect("anonymization preserves space validity");
    (
        anon_space,
        AnonymizationCodec {
            name_map,
            reverse_map,
            scale_map,
        },
    )
}

/// Inverts the codec on an anonymized configuration.
pub fn deanonymize(
    codec: &AnonymizationCodec,
    config: &Configuration,
) -> Result<Configuration, AnonymizeError> {
    codec.inverse(config)
}
