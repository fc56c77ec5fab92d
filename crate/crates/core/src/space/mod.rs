//! Search spaces and configurations.
//!
//! A [`SearchSpace`] is an ordered list of typed parameters plus equality
//! conditions that activate child parameters. A [`Configuration`] assigns a
//! value to every *active* parameter and to nothing else.

mod anonymize;
mod encode;
mod tdl;

pub use anonymize::{anonymize, deanonymize, AnonymizationCodec, AnonymizeError, ParamTransform};
pub use encode::FeatureKind;
pub use tdl::{
    parse_tdl, parse_tdl_bytes, AdvisorType, ParallelStrategy, TaskSpec, TaskType, TdlError,
};

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rng::{rng_from_seed, Rng};

/// A parameter value as it appears on the wire.
///
/// Integers and floats compare numerically, so `Int(1) == Float(1.0)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            Value::Str(_) => None,
        }
    }

    /// Integer view; floats are accepted only when integral.
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            Value::Float(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Some(*f as i64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Str(_), _) | (_, Value::Str(_)) => false,
            (Value::Int(a), Value::Int(b)) => a == b,
            (a, b) => a.as_f64() == b.as_f64(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_owned())
    }
}

/// The domain of a parameter, which also fixes its kind.
#[derive(Clone, Debug, PartialEq)]
pub enum ParameterDomain {
    Float { low: f64, high: f64 },
    Integer { low: i64, high: i64 },
    Ordinal { choices: Vec<Value> },
    Categorical { choices: Vec<Value> },
}

impl ParameterDomain {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ParameterDomain::Float { .. } => "float",
            ParameterDomain::Integer { .. } => "int",
            ParameterDomain::Ordinal { .. } => "ord",
            ParameterDomain::Categorical { .. } => "cat",
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            ParameterDomain::Float { .. } | ParameterDomain::Integer { .. }
        )
    }

    pub fn contains(&self, value: &Value) -> bool {
        match self {
            ParameterDomain::Float { low, high } => value
                .as_f64()
                .is_some_and(|v| v.is_finite() && v >= *low && v <= *high),
            ParameterDomain::Integer { low, high } => {
                value.as_i64().is_some_and(|v| v >= *low && v <= *high)
            }
            ParameterDomain::Ordinal { choices } | ParameterDomain::Categorical { choices } => {
                choices.contains(value)
            }
        }
    }

    /// Index of a value among the choices of a discrete domain.
    pub fn choice_index(&self, value: &Value) -> Option<usize> {
        match self {
            ParameterDomain::Ordinal { choices } | ParameterDomain::Categorical { choices } => {
                choices.iter().position(|c| c == value)
            }
            _ => None,
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            ParameterDomain::Float { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(format!("bad bounds [{low}, {high}]"));
                }
            }
            ParameterDomain::Integer { low, high } => {
                if low >= high {
                    return Err(format!("bad bounds [{low}, {high}]"));
                }
            }
            ParameterDomain::Ordinal { choices } | ParameterDomain::Categorical { choices } => {
                if choices.is_empty() {
                    return Err("empty choice list".into());
                }
                for (i, c) in choices.iter().enumerate() {
                    if let Value::Float(f) = c {
                        if !f.is_finite() {
                            return Err("non-finite choice".into());
                        }
                    }
                    if choices[..i].contains(c) {
                        return Err(format!("duplicate choice {c}"));
                    }
                }
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut Rng) -> Value {
        match self {
            ParameterDomain::Float { low, high } => Value::Float(rng.random_range(*low..=*high)),
            ParameterDomain::Integer { low, high } => Value::Int(rng.random_range(*low..=*high)),
            ParameterDomain::Ordinal { choices } | ParameterDomain::Categorical { choices } => {
                choices[rng.random_range(0..choices.len())].clone()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub domain: ParameterDomain,
    pub default: Option<Value>,
}

impl Parameter {
    pub fn float(name: &str, low: f64, high: f64) -> Self {
        Self {
            name: name.to_owned(),
            domain: ParameterDomain::Float { low, high },
            default: None,
        }
    }

    pub fn integer(name: &str, low: i64, high: i64) -> Self {
        Self {
            name: name.to_owned(),
            domain: ParameterDomain::Integer { low, high },
            default: None,
        }
    }

    pub fn ordinal(name: &str, choices: Vec<Value>) -> Self {
        Self {
            name: name.to_owned(),
            domain: ParameterDomain::Ordinal { choices },
            default: None,
        }
    }

    pub fn categorical(name: &str, choices: Vec<Value>) -> Self {
        Self {
            name: name.to_owned(),
            domain: ParameterDomain::Categorical { choices },
            default: None,
        }
    }

    pub fn with_default(mut self, default: impl Into<Value>) -> Self {
        self.default = Some(default.into());
        self
    }

    /// Value used where a fixed-length vector needs an inactive parameter:
    /// the default, else the lower bound or first choice.
    pub fn impute_value(&self) -> Value {
        if let Some(d) = &self.default {
            return d.clone();
        }
        match &self.domain {
            ParameterDomain::Float { low, .. } => Value::Float(*low),
            ParameterDomain::Integer { low, .. } => Value::Int(*low),
            ParameterDomain::Ordinal { choices } | ParameterDomain::Categorical { choices } => {
                choices[0].clone()
            }
        }
    }

    /// Representative value for the initial design: default, else the
    /// middle of the domain.
    pub fn central_value(&self) -> Value {
        if let Some(d) = &self.default {
            return d.clone();
        }
        match &self.domain {
            ParameterDomain::Float { low, high } => Value::Float(0.5 * (low + high)),
            ParameterDomain::Integer { low, high } => Value::Int(low + (high - low) / 2),
            ParameterDomain::Ordinal { choices } => choices[(choices.len() - 1) / 2].clone(),
            ParameterDomain::Categorical { choices } => choices[0].clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionKind {
    Equal,
}

/// `child` is active only when `parent` is active and equals `value`.
#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    pub kind: ConditionKind,
    pub parent: String,
    pub child: String,
    pub value: Value,
}

impl Condition {
    pub fn equal(parent: &str, child: &str, value: impl Into<Value>) -> Self {
        Self {
            kind: ConditionKind::Equal,
            parent: parent.to_owned(),
            child: child.to_owned(),
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("no parameters")]
    NoParameters,
    #[error("duplicate parameter name '{0}'")]
    DuplicateName(String),
    #[error("parameter '{name}': {reason}")]
    BadDomain { name: String, reason: String },
    #[error("parameter '{0}': default outside the domain")]
    BadDefault(String),
    #[error("self-condition on '{0}'")]
    SelfCondition(String),
    #[error("condition references unknown parameter '{0}'")]
    DanglingCondition(String),
    #[error("condition value {value} is not in the domain of '{parent}'")]
    BadConditionValue { parent: String, value: Value },
    #[error("condition cycle involving '{0}'")]
    ConditionCycle(String),
    #[error("vector has length {got}, space expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpace {
    parameters: Vec<Parameter>,
    conditions: Vec<Condition>,
    /// Parameter indices with every parent ahead of its children.
    order: Vec<usize>,
    /// Per parameter, the conditions that gate it as (parent index, value).
    gates: Vec<Vec<(usize, Value)>>,
}

impl SearchSpace {
    pub fn new(parameters: Vec<Parameter>, conditions: Vec<Condition>) -> Result<Self, SpaceError> {
        if parameters.is_empty() {
            return Err(SpaceError::NoParameters);
        }
        let mut index = BTreeMap::new();
        for (i, p) in parameters.iter().enumerate() {
            if index.insert(p.name.clone(), i).is_some() {
                return Err(SpaceError::DuplicateName(p.name.clone()));
            }
            p.domain.validate().map_err(|reason| SpaceError::BadDomain {
                name: p.name.clone(),
                reason,
            })?;
            if let Some(d) = &p.default {
                if !p.domain.contains(d) {
                    return Err(SpaceError::BadDefault(p.name.clone()));
                }
            }
        }
        let mut gates = vec![Vec::new(); parameters.len()];
        for c in &conditions {
            if c.parent == c.child {
                return Err(SpaceError::SelfCondition(c.child.clone()));
            }
            let parent = *index
                .get(&c.parent)
                .ok_or_else(|| SpaceError::DanglingCondition(c.parent.clone()))?;
            let child = *index
                .get(&c.child)
                .ok_or_else(|| SpaceError::DanglingCondition(c.child.clone()))?;
            if !parameters[parent].domain.contains(&c.value) {
                return Err(SpaceError::BadConditionValue {
                    parent: c.parent.clone(),
                    value: c.value.clone(),
                });
            }
            gates[child].push((parent, c.value.clone()));
        }
        let order = topological_order(&parameters, &gates)?;
        Ok(Self {
            parameters,
            conditions,
            order,
            gates,
        })
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn len(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }

    pub fn has_conditions(&self) -> bool {
        !self.conditions.is_empty()
    }

    pub fn all_numeric(&self) -> bool {
        self.parameters.iter().all(|p| p.domain.is_numeric())
    }

    pub fn parameter(&self, name: &str) -> Option<&Parameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p.name == name)
    }

    /// Activity of every parameter given (possibly partial) assignments.
    /// Unassigned parents make their children inactive.
    pub fn active_mask(&self, config: &Configuration) -> Vec<bool> {
        let mut active = vec![false; self.parameters.len()];
        for &i in &self.order {
            active[i] = self.gates[i].iter().all(|(parent, value)| {
                active[*parent]
                    && config
                        .get(&self.parameters[*parent].name)
                        .is_some_and(|v| v == value)
            });
        }
        active
    }

    /// Checks every configuration invariant and reports all violations.
    pub fn validate_config(&self, config: &Configuration) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        for name in config.names() {
            if self.index_of(name).is_none() {
                violations.push(Violation::Unknown(name.to_owned()));
            }
        }
        let active = self.active_mask(config);
        for (p, is_active) in self.parameters.iter().zip(active) {
            match (config.get(&p.name), is_active) {
                (None, true) => violations.push(Violation::Missing(p.name.clone())),
                (Some(_), false) => violations.push(Violation::Inactive(p.name.clone())),
                (Some(v), true) if !p.domain.contains(v) => {
                    violations.push(Violation::OutOfBounds(p.name.clone(), v.clone()))
                }
                _ => {}
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    pub fn is_valid(&self, config: &Configuration) -> bool {
        self.validate_config(config).is_ok()
    }

    /// Draws `n` configurations uniformly at random, deterministic in `seed`.
    pub fn sample_random(&self, seed: u64, n: usize) -> Vec<Configuration> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| self.sample_with(&mut rng)).collect()
    }

    pub fn sample_with(&self, rng: &mut Rng) -> Configuration {
        self.repair(&Configuration::default(), rng)
    }

    /// Produces a valid configuration that keeps every in-domain value of
    /// `partial` whose parameter ends up active, samples missing active
    /// parameters and drops inactive ones.
    pub fn repair(&self, partial: &Configuration, rng: &mut Rng) -> Configuration {
        let mut out = Configuration::default();
        for &i in &self.order {
            let p = &self.parameters[i];
            let active = self.gates[i].iter().all(|(parent, value)| {
                out.get(&self.parameters[*parent].name)
                    .is_some_and(|v| v == value)
            });
            if !active {
                continue;
            }
            let v = match partial.get(&p.name) {
                Some(v) if p.domain.contains(v) => canonical(&p.domain, v),
                _ => p.domain.sample(rng),
            };
            out.insert(&p.name, v);
        }
        out
    }

    /// The configuration made of every parameter's default (or central)
    /// value, restricted to active parameters.
    pub fn default_configuration(&self) -> Configuration {
        let mut out = Configuration::default();
        for &i in &self.order {
            let p = &self.parameters[i];
            let active = self.gates[i].iter().all(|(parent, value)| {
                out.get(&self.parameters[*parent].name)
                    .is_some_and(|v| v == value)
            });
            if active {
                out.insert(&p.name, p.central_value());
            }
        }
        out
    }

    /// Drops assignments of parameters that are inactive under `config`.
    pub fn deactivate(&self, config: &Configuration) -> Configuration {
        let active = self.active_mask(config);
        let mut out = Configuration::default();
        for (p, a) in self.parameters.iter().zip(active) {
            if a {
                if let Some(v) = config.get(&p.name) {
                    out.insert(&p.name, v.clone());
                }
            }
        }
        out
    }
}

/// Normalizes the numeric representation of a value for its domain.
fn canonical(domain: &ParameterDomain, v: &Value) -> Value {
    match domain {
        ParameterDomain::Float { .. } => Value::Float(v.as_f64().unwrap_or(f64::NAN)),
        ParameterDomain::Integer { .. } => Value::Int(v.as_i64().unwrap_or_default()),
        ParameterDomain::Ordinal { choices } | ParameterDomain::Categorical { choices } => choices
            .iter()
            .find(|c| *c == v)
            .cloned()
            .unwrap_or_else(|| v.clone()),
    }
}

fn topological_order(
    parameters: &[Parameter],
    gates: &[Vec<(usize, Value)>],
) -> Result<Vec<usize>, SpaceError> {
    // Kahn's algorithm, preferring declaration order among ready nodes.
    let n = parameters.len();
    let mut indegree: Vec<usize> = gates.iter().map(|g| g.len()).collect();
    let mut children = vec![Vec::new(); n];
    for (child, g) in gates.iter().enumerate() {
        for (parent, _) in g {
            children[*parent].push(child);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|i| !order.contains(i)).unwrap_or(0);
        return Err(SpaceError::ConditionCycle(parameters[stuck].name.clone()));
    }
    Ok(order)
}

/// A violated configuration invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Missing(String),
    Inactive(String),
    OutOfBounds(String, Value),
    Unknown(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Missing(n) => write!(f, "{n} required (active)"),
            Violation::Inactive(n) => write!(f, "{n} assigned but inactive"),
            Violation::OutOfBounds(n, v) => write!(f, "{n}={v} out of bounds"),
            Violation::Unknown(n) => write!(f, "{n} is not a parameter of the space"),
        }
    }
}

/// Assignments of active parameters, keyed by name in sorted order so the
/// serialized form is canonical.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(BTreeMap<String, Value>);

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: &str, value: impl Into<Value>) {
        self.0.insert(name.to_owned(), value.into());
    }

    pub fn remove(&mut self, name: &str) -> Option<Value> {
        self.0.remove(name)
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.insert(name, value);
        self
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, Value)> for Configuration {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}
