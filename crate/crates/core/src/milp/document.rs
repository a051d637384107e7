//! Structured model documents (JSON).
//!
//! Numbers may be JSON numbers or strings. Strings accept decimals, `p/q`
//! fractions and `inf`. Everything is parsed exactly: the JSON layer keeps
//! number literals verbatim, so `0.1` is the rational 1/10.
//!
//! ```json
//! {
//!   "name": "knap", "sense": "max",
//!   "variables": [{"name": "x1", "kind": "binary"}, ...],
//!   "objective": {"terms": [{"var": "x1", "coef": 3}], "constant": 0},
//!   "constraints": [{"name": "cap", "terms": [...], "sense": "<=", "rhs": 7}]
//! }
//! ```

use std::collections::HashMap;
use std::fmt;

use malachite_base::num::basic::traits::{One, Zero};
use serde_json::{Map, Value};

use super::{
    validate, Constraint, LinExpr, MilpModel, ObjectiveSense, PartitionHint, Sense, VarId, VarKind,
    Variable,
};
use crate::num::{parse_number, Number, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    DuplicateVariable,
    UndeclaredVariable,
    NonFiniteBound,
    NonLinear,
    UnknownField,
    MissingField,
    InvalidValue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Field path such as `constraints[2].terms[0].var`, or `line L column C`
    /// for syntax errors.
    pub location: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(kind: ParseErrorKind, location: &str, message: impl Into<String>) -> ParseError {
    ParseError { kind, location: location.to_string(), message: message.into() }
}

const NONLINEAR_KEYS: &[&str] = &["vars", "power", "exponent", "quadratic", "quad", "product", "degree"];

type Result<T> = std::result::Result<T, ParseError>;

pub fn parse_model(text: &str) -> Result<MilpModel> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        err(
            ParseErrorKind::Syntax,
            &format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let obj = as_object(&root, "$")?;
    check_fields(obj, "$", &["name", "sense", "variables", "objective", "constraints"])?;

    let name = match obj.get("name") {
        Some(v) => as_str(v, "name")?.to_string(),
        None => "model".to_string(),
    };
    let sense = match obj.get("sense") {
        None => ObjectiveSense::Min,
        Some(v) => match as_str(v, "sense")? {
            "min" | "minimize" => ObjectiveSense::Min,
            "max" | "maximize" => ObjectiveSense::Max,
            other => return Err(err(ParseErrorKind::InvalidValue, "sense", format!("unknown sense {other:?}"))),
        },
    };

    let mut variables = Vec::new();
    let mut index: HashMap<String, VarId> = HashMap::new();
    let vars = obj
        .get("variables")
        .ok_or_else(|| err(ParseErrorKind::MissingField, "$", "missing field \"variables\""))?;
    for (i, v) in as_array(vars, "variables")?.iter().enumerate() {
        let path = format!("variables[{i}]");
        let var = parse_variable(v, &path)?;
        if index.insert(var.name.clone(), VarId(variables.len())).is_some() {
            return Err(err(
                ParseErrorKind::DuplicateVariable,
                &format!("{path}.name"),
                format!("duplicate variable name {:?}", var.name),
            ));
        }
        variables.push(var);
    }

    let mut objective = match obj.get("objective") {
        Some(v) => parse_expr(v, "objective", &index, &["terms", "constant"])?,
        None => LinExpr::zero(),
    };
    if sense == ObjectiveSense::Max {
        objective = objective.negated();
    }

    let mut constraints = Vec::new();
    if let Some(cs) = obj.get("constraints") {
        for (i, c) in as_array(cs, "constraints")?.iter().enumerate() {
            constraints.push(parse_constraint(c, &format!("constraints[{i}]"), &index)?);
        }
    }

    let model = MilpModel { name, source_sense: sense, variables, objective, constraints };
    if let Some(d) = validate(&model).into_iter().next() {
        return Err(err(ParseErrorKind::InvalidValue, &d.subject, d.message));
    }
    Ok(model)
}

fn parse_variable(v: &Value, path: &str) -> Result<Variable> {
    let obj = as_object(v, path)?;
    check_fields(obj, path, &["name", "kind", "lb", "ub", "partition"])?;
    let name = as_str(required(obj, "name", path)?, &format!("{path}.name"))?.to_string();
    if name.contains('*') || name.contains('^') {
        return Err(err(
            ParseErrorKind::NonLinear,
            &format!("{path}.name"),
            format!("variable name {name:?} looks like a product or power; only linear models are accepted"),
        ));
    }
    let kind = match as_str(required(obj, "kind", path)?, &format!("{path}.kind"))? {
        "binary" => VarKind::Binary,
        "integer" => VarKind::Integer,
        "continuous" => VarKind::Continuous,
        other => {
            return Err(err(ParseErrorKind::InvalidValue, &format!("{path}.kind"), format!("unknown kind {other:?}")))
        }
    };
    let bound = |key: &str, default: Option<Rational>| -> Result<Rational> {
        let loc = format!("{path}.{key}");
        match obj.get(key) {
            None => default.ok_or_else(|| {
                err(ParseErrorKind::NonFiniteBound, &loc, format!("non-finite bound: variable {name:?} has no {key}"))
            }),
            Some(v) => match parse_num(v, &loc)? {
                Number::Finite(r) => Ok(r),
                _ => Err(err(
                    ParseErrorKind::NonFiniteBound,
                    &loc,
                    format!("non-finite bound on variable {name:?}"),
                )),
            },
        }
    };
    let (lb, ub) = match kind {
        VarKind::Binary => (bound("lb", Some(Rational::ZERO))?, bound("ub", Some(Rational::ONE))?),
        _ => (bound("lb", Some(Rational::ZERO))?, bound("ub", None)?),
    };
    let partition = match obj.get("partition") {
        None | Some(Value::Null) => None,
        Some(v) => match as_str(v, &format!("{path}.partition"))? {
            "master" => Some(PartitionHint::Master),
            "sub" => Some(PartitionHint::Sub),
            other => {
                return Err(err(
                    ParseErrorKind::InvalidValue,
                    &format!("{path}.partition"),
                    format!("unknown partition {other:?}"),
                ))
            }
        },
    };
    Ok(Variable { name, kind, lb, ub, partition })
}

fn parse_constraint(v: &Value, path: &str, index: &HashMap<String, VarId>) -> Result<Constraint> {
    let obj = as_object(v, path)?;
    check_fields(obj, path, &["name", "terms", "sense", "rhs", "weight", "constant"])?;
    let name = as_str(required(obj, "name", path)?, &format!("{path}.name"))?.to_string();
    let lhs = parse_expr(v, path, index, &[])?;
    let sense = match as_str(required(obj, "sense", path)?, &format!("{path}.sense"))? {
        "<=" | "≤" => Sense::Le,
        "=" | "==" => Sense::Eq,
        ">=" | "≥" => Sense::Ge,
        other => {
            return Err(err(ParseErrorKind::InvalidValue, &format!("{path}.sense"), format!("unknown sense {other:?}")))
        }
    };
    let rhs = finite(required(obj, "rhs", path)?, &format!("{path}.rhs"))?;
    let weight = match obj.get("weight") {
        None | Some(Value::Null) => None,
        Some(w) => {
            let loc = format!("{path}.weight");
            let w = finite(w, &loc)?;
            if w <= Rational::ZERO {
                return Err(err(ParseErrorKind::InvalidValue, &loc, "weight must be positive"));
            }
            Some(w)
        }
    };
    let mut c = Constraint { name, lhs, sense, rhs, weight };
    c.canonicalize();
    Ok(c)
}

/// Parses `{terms, constant}`. For constraints the same object also carries
/// the other constraint fields, which the caller has already checked.
fn parse_expr(v: &Value, path: &str, index: &HashMap<String, VarId>, allowed: &[&str]) -> Result<LinExpr> {
    let obj = as_object(v, path)?;
    for key in NONLINEAR_KEYS {
        if obj.contains_key(*key) {
            return Err(nonlinear(&format!("{path}.{key}")));
        }
    }
    if !allowed.is_empty() {
        check_fields(obj, path, allowed)?;
    }
    let mut terms = Vec::new();
    if let Some(ts) = obj.get("terms") {
        for (i, t) in as_array(ts, &format!("{path}.terms"))?.iter().enumerate() {
            let tpath = format!("{path}.terms[{i}]");
            let tobj = as_object(t, &tpath)?;
            for key in NONLINEAR_KEYS {
                if tobj.contains_key(*key) {
                    return Err(nonlinear(&format!("{tpath}.{key}")));
                }
            }
            check_fields(tobj, &tpath, &["var", "coef"])?;
            let var_value = required(tobj, "var", &tpath)?;
            if var_value.is_array() {
                return Err(nonlinear(&format!("{tpath}.var")));
            }
            let var_name = as_str(var_value, &format!("{tpath}.var"))?;
            if var_name.contains('*') || var_name.contains('^') {
                return Err(nonlinear(&format!("{tpath}.var")));
            }
            let id = *index.get(var_name).ok_or_else(|| {
                err(
                    ParseErrorKind::UndeclaredVariable,
                    &format!("{tpath}.var"),
                    format!("term references undeclared variable {var_name:?}"),
                )
            })?;
            let coef = match tobj.get("coef") {
                Some(c) => finite(c, &format!("{tpath}.coef"))?,
                None => Rational::ONE,
            };
            terms.push((id, coef));
        }
    }
    let constant = match obj.get("constant") {
        Some(c) => finite(c, &format!("{path}.constant"))?,
        None => Rational::ZERO,
    };
    Ok(LinExpr::new(terms, constant))
}

fn nonlinear(location: &str) -> ParseError {
    err(
        ParseErrorKind::NonLinear,
        location,
        "nonlinear expression: only linear terms {var, coef} are accepted",
    )
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| err(ParseErrorKind::MissingField, path, format!("missing field {key:?}")))
}

fn check_fields(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(err(ParseErrorKind::UnknownField, &format!("{path}.{k}"), format!("unknown field {k:?}"))),
        None => Ok(()),
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| err(ParseErrorKind::InvalidValue, path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| err(ParseErrorKind::InvalidValue, path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| err(ParseErrorKind::InvalidValue, path, "expected a string"))
}

fn parse_num(v: &Value, path: &str) -> Result<Number> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(err(ParseErrorKind::InvalidValue, path, "expected a number")),
    };
    parse_number(&text).ok_or_else(|| err(ParseErrorKind::InvalidValue, path, format!("invalid number {text:?}")))
}

fn finite(v: &Value, path: &str) -> Result<Rational> {
    match parse_num(v, path)? {
        Number::Finite(r) => Ok(r),
        _ => Err(err(ParseErrorKind::InvalidValue, path, "expected a finite number")),
    }
}

/// Writes a model as a document. Rationals are written as exact strings
/// and max models get their objective un-negated, so that parsing the
/// result reproduces the model.
pub fn serialize_model(model: &MilpModel) -> String {
    let num = |r: &Rational| Value::String(r.to_string());
    let terms = |e: &LinExpr| {
        Value::Array(
            e.terms
                .iter()
                .map(|(v, c)| {
                    let mut t = Map::new();
                    t.insert("var".into(), Value::String(model.variables[v.0].name.clone()));
                    t.insert("coef".into(), num(c));
                    Value::Object(t)
                })
                .collect(),
        )
    };

    let mut root = Map::new();
    root.insert("name".into(), Value::String(model.name.clone()));
    root.insert(
        "sense".into(),
        Value::String(match model.source_sense {
            ObjectiveSense::Min => "min".into(),
            ObjectiveSense::Max => "max".into(),
        }),
    );
    let vars = model
        .variables
        .iter()
        .map(|v| {
            let mut o = Map::new();
            o.insert("name".into(), Value::String(v.name.clone()));
            o.insert("kind".into(), Value::String(v.kind.as_str().into()));
            o.insert("lb".into(), num(&v.lb));
            o.insert("ub".into(), num(&v.ub));
            if let Some(h) = v.partition {
                let h = match h {
                    PartitionHint::Master => "master",
                    PartitionHint::Sub => "sub",
                };
                o.insert("partition".into(), Value::String(h.into()));
            }
            Value::Object(o)
        })
        .collect();
    root.insert("variables".into(), Value::Array(vars));

    let objective = match model.source_sense {
        ObjectiveSense::Min => model.objective.clone(),
        ObjectiveSense::Max => model.objective.negated(),
    };
    let mut o = Map::new();
    o.insert("terms".into(), terms(&objective));
    o.insert("constant".into(), num(&objective.constant));
    root.insert("objective".into(), Value::Object(o));

    let cons = model
        .constraints
        .iter()
        .map(|c| {
            let mut o = Map::new();
            o.insert("name".into(), Value::String(c.name.clone()));
            o.insert("terms".into(), terms(&c.lhs));
            o.insert("sense".into(), Value::String(c.sense.as_str().into()));
            o.insert("rhs".into(), num(&(&c.rhs - &c.lhs.constant)));
            if let Some(w) = &c.weight {
                o.insert("weight".into(), num(w));
            }
            Value::Object(o)
        })
        .collect();
    root.insert("constraints".into(), Value::Array(cons));

    let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("model serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, ratio};

    const KNAPSACK: &str = r#"{
        "name": "knap", "sense": "max",
        "variables": [
            {"name": "x1", "kind": "binary"}, {"name": "x2", "kind": "binary"},
            {"name": "x3", "kind": "binary"}, {"name": "x4", "kind": "binary"}
        ],
        "objective": {"terms": [{"var": "x1", "coef": 5}, {"var": "x2", "coef": 4},
                                {"var": "x3", "coef": 3}, {"var": "x4", "coef": 2}]},
        "constraints": [{"name": "cap", "sense": "<=", "rhs": "7",
            "terms": [{"var": "x1", "coef": 4}, {"var": "x2", "coef": 3},
                      {"var": "x3", "coef": 2}, {"var": "x4", "coef": 1}]}]
    }"#;

    fn kind_of(text: &str) -> ParseErrorKind {
        parse_model(text).unwrap_err().kind
    }

    #[test]
    fn knapsack_document() {
        let m = parse_model(KNAPSACK).unwrap();
        assert_eq!(m.num_vars(), 4);
        assert_eq!(m.constraints.len(), 1);
        assert_eq!(m.source_sense, ObjectiveSense::Max);
        assert_eq!(m.objective.coef(VarId(0)), Some(&rat(-5)));
    }

    #[test]
    fn infinite_integer_bound_is_rejected() {
        let doc = r#"{"variables": [{"name": "n", "kind": "integer", "lb": 0, "ub": "inf"}]}"#;
        let e = parse_model(doc).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NonFiniteBound);
        assert!(e.to_string().contains("non-finite bound"));
        assert_eq!(e.location, "variables[0].ub");
    }

    #[test]
    fn missing_continuous_bound_is_rejected() {
        let doc = r#"{"variables": [{"name": "w", "kind": "continuous"}]}"#;
        assert_eq!(kind_of(doc), ParseErrorKind::NonFiniteBound);
    }

    #[test]
    fn error_classes() {
        let dup = r#"{"variables": [{"name": "a", "kind": "binary"}, {"name": "a", "kind": "binary"}]}"#;
        assert_eq!(kind_of(dup), ParseErrorKind::DuplicateVariable);
        let undeclared = r#"{"variables": [], "objective": {"terms": [{"var": "q", "coef": 1}]}}"#;
        assert_eq!(kind_of(undeclared), ParseErrorKind::UndeclaredVariable);
        let unknown = r#"{"variables": [], "colour": "red"}"#;
        assert_eq!(kind_of(unknown), ParseErrorKind::UnknownField);
        let syntax = "{\n\"variables\": [,]}";
        let e = parse_model(syntax).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        assert!(e.location.starts_with("line 2"));
    }

    #[test]
    fn nonlinear_syntax_is_rejected() {
        let base = |term: &str| {
            format!(
                r#"{{"variables": [{{"name": "a", "kind": "binary"}}, {{"name": "b", "kind": "binary"}}],
                   "objective": {{"terms": [{term}]}}}}"#
            )
        };
        for term in [
            r#"{"vars": ["a", "b"], "coef": 1}"#,
            r#"{"var": ["a", "b"], "coef": 1}"#,
            r#"{"var": "a*b", "coef": 1}"#,
            r#"{"var": "a", "coef": 1, "power": 2}"#,
        ] {
            assert_eq!(kind_of(&base(term)), ParseErrorKind::NonLinear, "{term}");
        }
        let quad = r#"{"variables": [{"name": "a", "kind": "binary"}],
                       "objective": {"terms": [], "quadratic": [{"i": "a", "j": "a", "coef": 1}]}}"#;
        assert_eq!(kind_of(quad), ParseErrorKind::NonLinear);
    }

    #[test]
    fn duplicate_terms_and_constants_are_canonicalized() {
        let doc = r#"{"variables": [{"name": "a", "kind": "binary"}, {"name": "b", "kind": "binary"}],
            "constraints": [{"name": "c", "sense": "<=", "rhs": 3, "constant": "1/2",
                "terms": [{"var": "b", "coef": 1}, {"var": "a", "coef": 2}, {"var": "b", "coef": "0.5"}]}]}"#;
        let m = parse_model(doc).unwrap();
        let c = &m.constraints[0];
        assert_eq!(c.lhs.terms, vec![(VarId(0), rat(2)), (VarId(1), ratio(3, 2))]);
        assert_eq!(c.lhs.constant, rat(0));
        assert_eq!(c.rhs, ratio(5, 2));
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn decimal_literals_are_exact() {
        let doc = r#"{"variables": [{"name": "w", "kind": "continuous", "lb": 0.1, "ub": 2.5e1}]}"#;
        let m = parse_model(doc).unwrap();
        assert_eq!(m.variables[0].lb, ratio(1, 10));
        assert_eq!(m.variables[0].ub, rat(25));
    }

    #[test]
    fn weights_must_be_positive() {
        let doc = r#"{"variables": [{"name": "a", "kind": "binary"}],
            "constraints": [{"name": "c", "sense": "=", "rhs": 1, "weight": 0,
                "terms": [{"var": "a", "coef": 1}]}]}"#;
        assert_eq!(kind_of(doc), ParseErrorKind::InvalidValue);
    }

    #[test]
    fn round_trip() {
        let m = parse_model(KNAPSACK).unwrap();
        let again = parse_model(&serialize_model(&m)).unwrap();
        assert_eq!(m, again);
    }
}
