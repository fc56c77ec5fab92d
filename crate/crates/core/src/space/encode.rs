//! Numeric encodings of configurations.
//!
//! Two encodings exist. The *unit vector* maps FLOAT affinely to `[0, 1]`,
//! INTEGER to cell midpoints `(2i+1)/(2m)`, ORDINAL to `i/(K-1)` and
//! CATEGORICAL to a one-hot block. The *feature vector* used by surrogates
//! is identical except that each CATEGORICAL parameter occupies a single
//! coordinate holding its raw choice index. Inactive parameters are imputed
//! with [`Parameter::impute_value`](super::Parameter::impute_value).

use super::{Configuration, Parameter, ParameterDomain, SearchSpace, SpaceError, Value};

/// How a surrogate should treat one feature coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    /// Coordinate in `[0, 1]`.
    Continuous,
    /// Raw choice index in `0..n`.
    Categorical(usize),
}

fn unit_of_int(v: i64, low: i64, high: i64) -> f64 {
    let m = (high - low + 1) as f64;
    let i = (v - low) as f64;
    (2.0 * i + 1.0) / (2.0 * m)
}

fn int_of_unit(u: f64, low: i64, high: i64) -> i64 {
    let m = high - low + 1;
    let cell = (u.clamp(0.0, 1.0) * m as f64).floor() as i64;
    low + cell.clamp(0, m - 1)
}

fn unit_of_rank(i: usize, k: usize) -> f64 {
    if k <= 1 {
        0.0
    } else {
        i as f64 / (k - 1) as f64
    }
}

fn rank_of_unit(u: f64, k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        ((u.clamp(0.0, 1.0) * (k - 1) as f64).round() as usize).min(k - 1)
    }
}

/// Scalar encoding of a numeric or ordinal value in `[0, 1]`.
fn scalar_unit(p: &Parameter, v: &Value) -> f64 {
    match &p.domain {
        ParameterDomain::Float { low, high } => {
            (v.as_f64().unwrap_or(*low) - low) / (high - low)
        }
        ParameterDomain::Integer { low, high } => {
            unit_of_int(v.as_i64().unwrap_or(*low).clamp(*low, *high), *low, *high)
        }
        ParameterDomain::Ordinal { choices } => {
            unit_of_rank(p.domain.choice_index(v).unwrap_or(0), choices.len())
        }
        ParameterDomain::Categorical { .. } => unreachable!("categorical has no scalar encoding"),
    }
}

fn scalar_decode(p: &Parameter, u: f64) -> Value {
    match &p.domain {
        ParameterDomain::Float { low, high } => {
            Value::Float((low + u.clamp(0.0, 1.0) * (high - low)).clamp(*low, *high))
        }
        ParameterDomain::Integer { low, high } => Value::Int(int_of_unit(u, *low, *high)),
        ParameterDomain::Ordinal { choices } => choices[rank_of_unit(u, choices.len())].clone(),
        ParameterDomain::Categorical { .. } => unreachable!("categorical has no scalar encoding"),
    }
}

impl SearchSpace {
    /// Scalar `[0, 1]` coordinate of a non-categorical parameter's value.
    pub fn param_to_unit(&self, index: usize, value: &Value) -> f64 {
        scalar_unit(&self.parameters()[index], value)
    }

    /// Inverse of [`SearchSpace::param_to_unit`].
    pub fn param_from_unit(&self, index: usize, u: f64) -> Value {
        scalar_decode(&self.parameters()[index], u)
    }

    /// Length of [`SearchSpace::to_unit_vector`] output.
    pub fn unit_dim(&self) -> usize {
        self.parameters()
            .iter()
            .map(|p| match &p.domain {
                ParameterDomain::Categorical { choices } => choices.len(),
                _ => 1,
            })
            .sum()
    }

    pub fn to_unit_vector(&self, config: &Configuration) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.unit_dim());
        for p in self.parameters() {
            let imputed;
            let v = match config.get(&p.name) {
                Some(v) => v,
                None => {
                    imputed = p.impute_value();
                    &imputed
                }
            };
            match &p.domain {
                ParameterDomain::Categorical { choices } => {
                    let idx = p.domain.choice_index(v).unwrap_or(0);
                    out.extend((0..choices.len()).map(|i| if i == idx { 1.0 } else { 0.0 }));
                }
                _ => out.push(scalar_unit(p, v)),
            }
        }
        out
    }

    /// Decodes a unit vector; inactive parameters are dropped.
    pub fn from_unit_vector(&self, vector: &[f64]) -> Result<Configuration, SpaceError> {
        if vector.len() != self.unit_dim() {
            return Err(SpaceError::DimensionMismatch {
                expected: self.unit_dim(),
                got: vector.len(),
            });
        }
        let mut full = Configuration::new();
        let mut at = 0;
        for p in self.parameters() {
            match &p.domain {
                ParameterDomain::Categorical { choices } => {
                    let block = &vector[at..at + choices.len()];
                    let idx = block
                        .iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| {
                            if x > best.1 {
                                (i, x)
                            } else {
                                best
                            }
                        })
                        .0;
                    full.insert(&p.name, choices[idx].clone());
                    at += choices.len();
                }
                _ => {
                    full.insert(&p.name, scalar_decode(p, vector[at]));
                    at += 1;
                }
            }
        }
        Ok(self.deactivate(&full))
    }

    pub fn feature_kinds(&self) -> Vec<FeatureKind> {
        self.parameters()
            .iter()
            .map(|p| match &p.domain {
                ParameterDomain::Categorical { choices } => FeatureKind::Categorical(choices.len()),
                _ => FeatureKind::Continuous,
            })
            .collect()
    }

    /// One coordinate per parameter; categorical coordinates carry the raw
    /// choice index.
    pub fn to_features(&self, config: &Configuration) -> Vec<f64> {
        self.parameters()
            .iter()
            .map(|p| {
                let imputed;
                let v = match config.get(&p.name) {
                    Some(v) => v,
                    None => {
                        imputed = p.impute_value();
                        &imputed
                    }
                };
                match &p.domain {
                    ParameterDomain::Categorical { .. } => {
                        p.domain.choice_index(v).unwrap_or(0) as f64
                    }
                    _ => scalar_unit(p, v),
                }
            })
            .collect()
    }

    pub fn from_features(&self, features: &[f64]) -> Result<Configuration, SpaceError> {
        if features.len() != self.len() {
            return Err(SpaceError::DimensionMismatch {
                expected: self.len(),
                got: features.len(),
            });
        }
        let mut full = Configuration::new();
        for (p, &x) in self.parameters().iter().zip(features) {
            let v = match &p.domain {
                ParameterDomain::Categorical { choices } => {
                    let i = (x.round().max(0.0) as usize).min(choices.len() - 1);
                    choices[i].clone()
                }
                _ => scalar_decode(p, x),
            };
            full.insert(&p.name, v);
        }
        Ok(self.deactivate(&full))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::tests::example_space;
    use crate::space::Parameter;

    #[test]
    fn float_affine_endpoints() {
        let s = SearchSpace::new(vec![Parameter::float("x", -5.0, 10.0)], vec![]).unwrap();
        let c = Configuration::new().with("x", 10.0);
        assert_eq!(s.to_unit_vector(&c), vec![1.0]);
        let c = Configuration::new().with("x", 2.5);
        assert_eq!(s.to_unit_vector(&c), vec![0.5]);
    }

    #[test]
    fn categorical_one_hot() {
        let s = SearchSpace::new(
            vec![Parameter::categorical("c", vec!["a1".into(), "a2".into(), "a3".into()])],
            vec![],
        )
        .unwrap();
        let c = Configuration::new().with("c", "a2");
        assert_eq!(s.to_unit_vector(&c), vec![0.0, 1.0, 0.0]);
        assert_eq!(s.to_features(&c), vec![1.0]);
    }

    #[test]
    fn integer_cell_midpoints() {
        let s = SearchSpace::new(vec![Parameter::integer("i", 0, 3)], vec![]).unwrap();
        let enc: Vec<f64> = (0..4)
            .map(|v| s.to_unit_vector(&Configuration::new().with("i", v as i64))[0])
            .collect();
        assert_eq!(enc, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn decode_dimension_mismatch() {
        let s = example_space();
        assert!(matches!(
            s.from_unit_vector(&[0.5; 2]),
            Err(SpaceError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn round_trip_on_random_samples() {
        let s = example_space();
        for c in s.sample_random(11, 1000) {
            let back = s.from_unit_vector(&s.to_unit_vector(&c)).unwrap();
            assert_eq!(back.len(), c.len());
            for (name, v) in c.iter() {
                let w = back.get(name).unwrap();
                match (v, w) {
                    (Value::Float(a), _) => assert!((a - w.as_f64().unwrap()).abs() <= 1e-12),
                    _ => assert_eq!(v, w),
                }
            }
            let back = s.from_features(&s.to_features(&c)).unwrap();
            assert_eq!(back.len(), c.len());
        }
    }
}
