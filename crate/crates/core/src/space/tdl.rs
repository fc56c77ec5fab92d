//! Task description language.
//!
//! A task is described by a JSON object:
//!
//! ```json
//! {
//!   "parameter": {
//!     "x1": {"type": "float", "default": 0, "bound": [-5, 10]},
//!     "x3": {"type": "cat", "default": "a1", "choice": ["a1", "a2", "a3"]}
//!   },
//!   "condition": {
//!     "cdn1": {"type": "equal", "parent": "x3", "child": "x1", "value": "a3"}
//!   },
//!   "number_of_trials": 200,
//!   "time_budget": 10800,
//!   "task_type": "soc",
//!   "parallel_strategy": "async",
//!   "worker_num": 10,
//!   "use_history": true
//! }
//! ```
//!
//! Only `parameter` is required. Optional extension keys are
//! `num_objectives`, `num_constraints`, `ref_point`, `advisor_type`
//! (`"auto"` or `"random"`), `random_seed` and `early_stop`
//! (`{"rule": "median" | "mean", "min_history": n}`). Any other top-level
//! key is rejected.
//!
//! For convenience the parser also accepts a leading `name =` assignment and
//! the literals `True`, `False` and `None`, so a Python-style dict literal
//! can be pasted as-is.

use serde_json::{json, Map, Value as Json};

use super::{Condition, ConditionKind, Parameter, ParameterDomain, SearchSpace, SpaceError, Value};
use crate::extrapolation::{EarlyStopConfig, EarlyStopRule};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TdlError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Semantic(String),
}

impl From<SpaceError> for TdlError {
    fn from(e: SpaceError) -> Self {
        TdlError::Semantic(e.to_string())
    }
}

fn semantic(msg: impl Into<String>) -> TdlError {
    TdlError::Semantic(msg.into())
}

/// Single/multi-objective × unconstrained/constrained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskType {
    So,
    Soc,
    Mo,
    Moc,
}

impl TaskType {
    pub fn tag(self) -> &'static str {
        match self {
            TaskType::So => "so",
            TaskType::Soc => "soc",
            TaskType::Mo => "mo",
            TaskType::Moc => "moc",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "so" => TaskType::So,
            "soc" => TaskType::Soc,
            "mo" => TaskType::Mo,
            "moc" => TaskType::Moc,
            _ => return None,
        })
    }

    pub fn multi_objective(self) -> bool {
        matches!(self, TaskType::Mo | TaskType::Moc)
    }

    pub fn constrained(self) -> bool {
        matches!(self, TaskType::Soc | TaskType::Moc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParallelStrategy {
    Sync,
    Async,
}

impl ParallelStrategy {
    pub fn tag(self) -> &'static str {
        match self {
            ParallelStrategy::Sync => "sync",
            ParallelStrategy::Async => "async",
        }
    }
}

/// Which suggestion algorithm family the task uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AdvisorType {
    /// Automatic algorithm selection.
    #[default]
    Auto,
    /// Uniform random search.
    Random,
}

impl AdvisorType {
    pub fn tag(self) -> &'static str {
        match self {
            AdvisorType::Auto => "auto",
            AdvisorType::Random => "random",
        }
    }
}

/// A fully validated optimization task.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskSpec {
    pub space: SearchSpace,
    pub number_of_trials: usize,
    /// Wall-clock budget in seconds; `None` means unlimited.
    pub time_budget: Option<f64>,
    pub task_type: TaskType,
    pub parallel_strategy: ParallelStrategy,
    pub worker_num: usize,
    pub use_history: bool,
    pub num_objectives: usize,
    pub num_constraints: usize,
    pub ref_point: Option<Vec<f64>>,
    pub advisor_type: AdvisorType,
    pub random_seed: Option<u64>,
    pub early_stop: EarlyStopConfig,
}

pub const DEFAULT_NUMBER_OF_TRIALS: usize = 100;

impl TaskSpec {
    /// A sequential single-objective task over `space` with defaults for
    /// everything else.
    pub fn new(space: SearchSpace) -> Self {
        Self {
            space,
            number_of_trials: DEFAULT_NUMBER_OF_TRIALS,
            time_budget: None,
            task_type: TaskType::So,
            parallel_strategy: ParallelStrategy::Async,
            worker_num: 1,
            use_history: false,
            num_objectives: 1,
            num_constraints: 0,
            ref_point: None,
            advisor_type: AdvisorType::Auto,
            random_seed: None,
            early_stop: EarlyStopConfig::default(),
        }
    }

    /// Sets the objective/constraint counts and derives the task type.
    pub fn with_objectives(mut self, p: usize, q: usize) -> Self {
        self.num_objectives = p;
        self.num_constraints = q;
        self.task_type = match (p > 1, q > 0) {
            (false, false) => TaskType::So,
            (false, true) => TaskType::Soc,
            (true, false) => TaskType::Mo,
            (true, true) => TaskType::Moc,
        };
        self
    }

    pub fn with_trials(mut self, n: usize) -> Self {
        self.number_of_trials = n;
        self
    }

    pub fn with_ref_point(mut self, r: Vec<f64>) -> Self {
        self.ref_point = Some(r);
        self
    }

    pub fn validate(&self) -> Result<(), TdlError> {
        let (p, q) = (self.num_objectives, self.num_constraints);
        if p == 0 {
            return Err(semantic("num_objectives must be at least 1"));
        }
        if self.number_of_trials == 0 {
            return Err(semantic("number_of_trials must be positive"));
        }
        if self.worker_num == 0 {
            return Err(semantic("worker_num must be positive"));
        }
        if let Some(b) = self.time_budget {
            if !(b > 0.0) {
                return Err(semantic("time_budget must be positive"));
            }
        }
        if self.task_type.multi_objective() != (p > 1) {
            return Err(semantic(format!(
                "task_type '{}' inconsistent with {p} objectives",
                self.task_type.tag()
            )));
        }
        if self.task_type.constrained() != (q > 0) {
            return Err(semantic(format!(
                "task_type '{}' inconsistent with {q} constraints",
                self.task_type.tag()
            )));
        }
        if let Some(r) = &self.ref_point {
            if r.len() != p {
                return Err(semantic(format!(
                    "ref_point has length {}, expected {p}",
                    r.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(semantic("ref_point must be finite"));
            }
        }
        Ok(())
    }

    /// Serializes back to the JSON task description.
    pub fn to_tdl(&self) -> Json {
        let mut params = Map::new();
        for p in self.space.parameters() {
            let mut entry = Map::new();
            entry.insert("type".into(), json!(p.domain.kind_name()));
            if let Some(d) = &p.default {
                entry.insert("default".into(), value_to_json(d));
            }
            match &p.domain {
                ParameterDomain::Float { low, high } => {
                    entry.insert("bound".into(), json!([low, high]));
                }
                ParameterDomain::Integer { low, high } => {
                    entry.insert("bound".into(), json!([low, high]));
                }
                ParameterDomain::Ordinal { choices } | ParameterDomain::Categorical { choices } => {
                    entry.insert(
                        "choice".into(),
                        Json::Array(choices.iter().map(value_to_json).collect()),
                    );
                }
            }
            params.insert(p.name.clone(), Json::Object(entry));
        }
        let mut conds = Map::new();
        for (i, c) in self.space.conditions().iter().enumerate() {
            conds.insert(
                format!("cdn{}", i + 1),
                json!({"type": "equal", "parent": c.parent, "child": c.child, "value": value_to_json(&c.value)}),
            );
        }
        let mut root = Map::new();
        root.insert("parameter".into(), Json::Object(params));
        if !conds.is_empty() {
            root.insert("condition".into(), Json::Object(conds));
        }
        root.insert("number_of_trials".into(), json!(self.number_of_trials));
        if let Some(b) = self.time_budget {
            root.insert("time_budget".into(), json!(b));
        }
        root.insert("task_type".into(), json!(self.task_type.tag()));
        root.insert(
            "parallel_strategy".into(),
            json!(self.parallel_strategy.tag()),
        );
        root.insert("worker_num".into(), json!(self.worker_num));
        root.insert("use_history".into(), json!(self.use_history));
        root.insert("num_objectives".into(), json!(self.num_objectives));
        root.insert("num_constraints".into(), json!(self.num_constraints));
        if let Some(r) = &self.ref_point {
            root.insert("ref_point".into(), json!(r));
        }
        root.insert("advisor_type".into(), json!(self.advisor_type.tag()));
        if let Some(s) = self.random_seed {
            root.insert("random_seed".into(), json!(s));
        }
        root.insert(
            "early_stop".into(),
            json!({"rule": self.early_stop.rule.tag(), "min_history": self.early_stop.min_history}),
        );
        Json::Object(root)
    }
}

fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Int(i) => json!(i),
        Value::Float(f) => json!(f),
        Value::Str(s) => json!(s),
    }
}

fn json_to_value(v: &Json, what: &str) -> Result<Value, TdlError> {
    match v {
        Json::String(s) => Ok(Value::Str(s.clone())),
        Json::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Value::Int(i))
            } else {
                n.as_f64()
                    .filter(|f| f.is_finite())
                    .map(Value::Float)
                    .ok_or_else(|| semantic(format!("{what}: unsupported number")))
            }
        }
        Json::Bool(b) => Ok(Value::Str(b.to_string())),
        _ => Err(semantic(format!("{what}: expected a string or number"))),
    }
}

const TOP_LEVEL_KEYS: &[&str] = &[
    "parameter",
    "condition",
    "number_of_trials",
    "time_budget",
    "task_type",
    "parallel_strategy",
    "worker_num",
    "use_history",
    "num_objectives",
    "num_constraints",
    "ref_point",
    "advisor_type",
    "random_seed",
    "early_stop",
];

/// Parses raw bytes; non-UTF-8 input is a syntax error.
pub fn parse_tdl_bytes(bytes: &[u8]) -> Result<TaskSpec, TdlError> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse_tdl(s),
        Err(e) => Err(TdlError::Syntax {
            line: 1,
            column: e.valid_up_to() + 1,
            message: "invalid UTF-8".into(),
        }),
    }
}

/// Parses and validates a task description.
pub fn parse_tdl(text: &str) -> Result<TaskSpec, TdlError> {
    let normalized = normalize_literals(text);
    let root: Json = serde_json::from_str(&normalized).map_err(|e| TdlError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = root
        .as_object()
        .ok_or_else(|| semantic("task description must be an object"))?;
    for key in obj.keys() {
        if !TOP_LEVEL_KEYS.contains(&key.as_str()) {
            return Err(semantic(format!("unknown key '{key}'")));
        }
    }

    let params_json = obj
        .get("parameter")
        .ok_or_else(|| semantic("missing 'parameter' block"))?
        .as_object()
        .ok_or_else(|| semantic("'parameter' must be an object"))?;
    if params_json.is_empty() {
        return Err(semantic("no parameters"));
    }
    let mut parameters = Vec::with_capacity(params_json.len());
    for (name, entry) in params_json {
        parameters.push(parse_parameter(name, entry)?);
    }

    let mut conditions = Vec::new();
    if let Some(c) = obj.get("condition") {
        let c = c
            .as_object()
            .ok_or_else(|| semantic("'condition' must be an object"))?;
        for (name, entry) in c {
            conditions.push(parse_condition(name, entry)?);
        }
    }
    let space = SearchSpace::new(parameters, conditions)?;

    let task_type = match obj.get("task_type") {
        None => TaskType::So,
        Some(v) => {
            let tag = v
                .as_str()
                .ok_or_else(|| semantic("task_type must be a string"))?;
            TaskType::from_tag(tag)
                .ok_or_else(|| semantic(format!("unknown task_type '{tag}'")))?
        }
    };
    let parallel_strategy = match obj.get("parallel_strategy").map(|v| v.as_str()) {
        None => ParallelStrategy::Async,
        Some(Some("sync")) => ParallelStrategy::Sync,
        Some(Some("async")) => ParallelStrategy::Async,
        Some(_) => return Err(semantic("parallel_strategy must be \"sync\" or \"async\"")),
    };
    let advisor_type = match obj.get("advisor_type").map(|v| v.as_str()) {
        None => AdvisorType::Auto,
        Some(Some("auto")) => AdvisorType::Auto,
        Some(Some("random")) => AdvisorType::Random,
        Some(_) => return Err(semantic("advisor_type must be \"auto\" or \"random\"")),
    };

    let number_of_trials = opt_count(obj, "number_of_trials")?.unwrap_or(DEFAULT_NUMBER_OF_TRIALS);
    let worker_num = opt_count(obj, "worker_num")?.unwrap_or(1);
    let time_budget = match obj.get("time_budget") {
        None | Some(Json::Null) => None,
        Some(v) => Some(
            v.as_f64()
                .ok_or_else(|| semantic("time_budget must be a number"))?,
        ),
    };
    let use_history = match obj.get("use_history") {
        None => false,
        Some(Json::Bool(b)) => *b,
        Some(_) => return Err(semantic("use_history must be a boolean")),
    };
    let num_objectives = opt_count(obj, "num_objectives")?
        .unwrap_or(if task_type.multi_objective() { 2 } else { 1 });
    let num_constraints = opt_count(obj, "num_constraints")?
        .unwrap_or(if task_type.constrained() { 1 } else { 0 });
    let ref_point = match obj.get("ref_point") {
        None | Some(Json::Null) => None,
        Some(Json::Array(a)) => Some(
            a.iter()
                .map(|v| v.as_f64().ok_or_else(|| semantic("ref_point entries must be numbers")))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Some(_) => return Err(semantic("ref_point must be an array")),
    };
    let random_seed = match obj.get("random_seed") {
        None | Some(Json::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| semantic("random_seed must be a non-negative integer"))?,
        ),
    };
    let early_stop = match obj.get("early_stop") {
        None | Some(Json::Null) => EarlyStopConfig::default(),
        Some(Json::Object(m)) => {
            let mut cfg = EarlyStopConfig::default();
            for (k, v) in m {
                match (k.as_str(), v) {
                    ("rule", Json::String(s)) if s == "median" => cfg.rule = EarlyStopRule::Median,
                    ("rule", Json::String(s)) if s == "mean" => cfg.rule = EarlyStopRule::Mean,
                    ("min_history", v) if v.as_u64().is_some() => {
                        cfg.min_history = v.as_u64().unwrap_or_default() as usize
                    }
                    _ => return Err(semantic(format!("bad early_stop entry '{k}'"))),
                }
            }
            cfg
        }
        Some(_) => return Err(semantic("early_stop must be an object")),
    };

    let spec = TaskSpec {
        space,
        number_of_trials,
        time_budget,
        task_type,
        parallel_strategy,
        worker_num,
        use_history,
        num_objectives,
        num_constraints,
        ref_point,
        advisor_type,
        random_seed,
        early_stop,
    };
    spec.validate()?;
    Ok(spec)
}

fn opt_count(obj: &Map<String, Json>, key: &str) -> Result<Option<usize>, TdlError> {
    match obj.get(key) {
        None | Some(Json::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .and_then(|n| usize::try_from(n).ok())
            .map(Some)
            .ok_or_else(|| semantic(format!("{key} must be a non-negative integer"))),
    }
}

fn parse_parameter(name: &str, entry: &Json) -> Result<Parameter, TdlError> {
    let e = entry
        .as_object()
        .ok_or_else(|| semantic(format!("parameter '{name}' must be an object")))?;
    for key in e.keys() {
        if !["type", "bound", "choice", "default"].contains(&key.as_str()) {
            return Err(semantic(format!("parameter '{name}': unknown key '{key}'")));
        }
    }
    let tag = e
        .get("type")
        .and_then(Json::as_str)
        .ok_or_else(|| semantic(format!("parameter '{name}': missing type")))?;
    let bound = |what: &str| -> Result<(f64, f64), TdlError> {
        let b = e
            .get("bound")
            .and_then(Json::as_array)
            .filter(|a| a.len() == 2)
            .ok_or_else(|| semantic(format!("parameter '{name}': {what} needs a two-element bound")))?;
        match (b[0].as_f64(), b[1].as_f64()) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(semantic(format!("parameter '{name}': bad bounds"))),
        }
    };
    let choices = || -> Result<Vec<Value>, TdlError> {
        let c = e
            .get("choice")
            .and_then(Json::as_array)
            .ok_or_else(|| semantic(format!("parameter '{name}': missing choice list")))?;
        c.iter()
            .map(|v| json_to_value(v, &format!("parameter '{name}' choice")))
            .collect()
    };
    let domain = match tag {
        "float" => {
            let (low, high) = bound("float")?;
            if !(low < high) {
                return Err(semantic(format!("parameter '{name}': bad bounds [{low}, {high}]")));
            }
            ParameterDomain::Float { low, high }
        }
        "int" => {
            let (low, high) = bound("int")?;
            let as_int = |x: f64| (x.fract() == 0.0 && x.abs() < 9.0e15).then_some(x as i64);
            match (as_int(low), as_int(high)) {
                (Some(l), Some(h)) if l < h => ParameterDomain::Integer { low: l, high: h },
                _ => {
                    return Err(semantic(format!(
                        "parameter '{name}': bad bounds [{low}, {high}]"
                    )))
                }
            }
        }
        "cat" => ParameterDomain::Categorical { choices: choices()? },
        "ord" => ParameterDomain::Ordinal { choices: choices()? },
        other => {
            return Err(semantic(format!(
                "parameter '{name}': unknown type tag '{other}'"
            )))
        }
    };
    let default = match e.get("default") {
        None | Some(Json::Null) => None,
        Some(v) => Some(json_to_value(v, &format!("parameter '{name}' default"))?),
    };
    Ok(Parameter {
        name: name.to_owned(),
        domain,
        default,
    })
}

fn parse_condition(name: &str, entry: &Json) -> Result<Condition, TdlError> {
    let e = entry
        .as_object()
        .ok_or_else(|| semantic(format!("condition '{name}' must be an object")))?;
    for key in e.keys() {
        if !["type", "parent", "child", "value"].contains(&key.as_str()) {
            return Err(semantic(format!("condition '{name}': unknown key '{key}'")));
        }
    }
    match e.get("type").and_then(Json::as_str) {
        Some("equal") => {}
        Some(other) => {
            return Err(semantic(format!(
                "condition '{name}': unknown type tag '{other}'"
            )))
        }
        None => return Err(semantic(format!("condition '{name}': missing type"))),
    }
    let field = |k: &str| {
        e.get(k)
            .and_then(Json::as_str)
            .map(str::to_owned)
            .ok_or_else(|| semantic(format!("condition '{name}': missing {k}")))
    };
    let value = e
        .get("value")
        .ok_or_else(|| semantic(format!("condition '{name}': missing value")))?;
    Ok(Condition {
        kind: ConditionKind::Equal,
        parent: field("parent")?,
        child: field("child")?,
        value: json_to_value(value, &format!("condition '{name}' value"))?,
    })
}

/// Rewrites Python literals outside strings and blanks a leading
/// `identifier =` assignment. Replacements keep byte offsets unchanged so
/// reported positions match the input.
fn normalize_literals(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let bytes = text.as_bytes();
    let mut i = 0;

    // Leading assignment.
    let start = bytes.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(bytes.len());
    let mut j = start;
    while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
        j += 1;
    }
    if j > start && !bytes[start].is_ascii_digit() {
        let mut k = j;
        while k < bytes.len() && bytes[k].is_ascii_whitespace() {
            k += 1;
        }
        if k < bytes.len() && bytes[k] == b'=' && bytes.get(k + 1) != Some(&b'=') {
            out.push_str(&text[..start]);
            out.extend(std::iter::repeat_n(' ', k + 1 - start));
            i = k + 1;
        }
    }

    let mut in_string = false;
    let mut escaped = false;
    while i < bytes.len() {
        let b = bytes[i];
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
        } else if b == b'"' {
            in_string = true;
        } else if b.is_ascii_alphabetic() {
            let mut end = i;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            let word = &text[i..end];
            let replaced = match word {
                "True" => "true",
                "False" => "false",
                "None" => "null",
                w => w,
            };
            out.push_str(replaced);
            i = end;
            continue;
        }
        // Copy one full UTF-8 character.
        let ch_len = text[i..].chars().next().map_or(1, char::len_utf8);
        out.push_str(&text[i..i + ch_len]);
        i += ch_len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_normalization_keeps_strings() {
        let s = normalize_literals(r#"cfg = {"a": True, "b": "True", "c": None}"#);
        assert_eq!(s, r#"      {"a": true, "b": "True", "c": null}"#);
    }

    #[test]
    fn empty_parameter_block() {
        assert_eq!(
            parse_tdl(r#"{"parameter": {}}"#),
            Err(TdlError::Semantic("no parameters".into()))
        );
    }

    #[test]
    fn self_condition() {
        let err = parse_tdl(
            r#"{"parameter": {"a": {"type": "float", "bound": [0, 1]}},
                "condition": {"c": {"type": "equal", "parent": "a", "child": "a", "value": 0.5}}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("self-condition"), "{err}");
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_tdl("{\n  \"parameter\": [1,\n}").unwrap_err();
        match err {
            TdlError::Syntax { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn semantic_errors() {
        let cases = [
            (r#"{"parameter": {"a": {"type": "bogus"}}}"#, "unknown type tag"),
            (r#"{"parameter": {"a": {"type": "float", "bound": [1, 0]}}}"#, "bad bounds"),
            (r#"{"parameter": {"a": {"type": "float", "bound": [0, 1]}}, "typo": 1}"#, "unknown key"),
            (
                r#"{"parameter": {"a": {"type": "float", "bound": [0, 1]}},
                    "condition": {"c": {"type": "equal", "parent": "zz", "child": "a", "value": 1}}}"#,
                "unknown parameter",
            ),
            (
                r#"{"parameter": {"a": {"type": "cat", "choice": ["x", "y"]},
                                  "b": {"type": "cat", "choice": ["x", "y"]}},
                    "condition": {"c1": {"type": "equal", "parent": "a", "child": "b", "value": "x"},
                                  "c2": {"type": "equal", "parent": "b", "child": "a", "value": "x"}}}"#,
                "cycle",
            ),
            (r#"{"parameter": {"a": {"type": "float", "bound": [0, 1]}}, "task_type": "mo", "num_objectives": 1}"#, "inconsistent"),
        ];
        for (text, needle) in cases {
            match parse_tdl(text) {
                Err(TdlError::Semantic(m)) => assert!(m.contains(needle), "{m} !~ {needle}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn defaults_for_optional_fields() {
        let spec = parse_tdl(r#"{"parameter": {"a": {"type": "float", "bound": [0, 1]}}}"#).unwrap();
        assert_eq!(spec.number_of_trials, DEFAULT_NUMBER_OF_TRIALS);
        assert_eq!(spec.worker_num, 1);
        assert_eq!(spec.task_type, TaskType::So);
        assert_eq!((spec.num_objectives, spec.num_constraints), (1, 0));
        assert_eq!(spec.time_budget, None);
    }

    #[test]
    fn to_tdl_round_trip() {
        let spec = parse_tdl(
            r#"{"parameter": {"x": {"type": "float", "bound": [-1, 2.5], "default": 0.5},
                              "k": {"type": "int", "bound": [1, 9]},
                              "c": {"type": "cat", "choice": ["u", "v"]}},
                "condition": {"q": {"type": "equal", "parent": "c", "child": "k", "value": "v"}},
                "task_type": "moc", "num_objectives": 3, "num_constraints": 2,
                "ref_point": [1, 2, 3], "random_seed": 9, "early_stop": {"rule": "mean", "min_history": 3}}"#,
        )
        .unwrap();
        let again = parse_tdl(&spec.to_tdl().to_string()).unwrap();
        assert_eq!(spec, again);
    }
}
