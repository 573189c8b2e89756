//! JSON-lines trace files: one object per step, variables as keys.

use serde_json::{Map, Value};

use super::{RuntimeError, StepRecord, TraceStep};
use crate::logic::text::parse_rat;
use crate::logic::{fmt_rat, Rat, Sort, Valuation};
use crate::spec::LtlTSpec;

/// One step of input: environment values and, optionally, external z values.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceInput {
    pub x: Valuation,
    pub z: Option<Valuation>,
}

fn number(v: &Value) -> Option<Rat> {
    match v {
        Value::Number(n) => parse_rat(&n.to_string()),
        Value::String(s) => parse_rat(s),
        _ => None,
    }
}

fn json_number(r: &Rat) -> Value {
    match (r.is_integer(), i64::try_from(r.to_integer())) {
        (true, Ok(n)) => Value::from(n),
        _ => Value::from(fmt_rat(r)),
    }
}

fn rows(text: &str) -> Result<Vec<(usize, Map<String, Value>)>, RuntimeError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |msg: String| RuntimeError::Input { step: out.len(), msg: format!("line {}: {msg}", i + 1) };
        match serde_json::from_str::<Value>(line) {
            Ok(Value::Object(m)) => out.push((i + 1, m)),
            Ok(_) => return Err(bad("expected a JSON object".into())),
            Err(e) => return Err(bad(e.to_string())),
        }
    }
    Ok(out)
}

fn take(
    row: &Map<String, Value>,
    vars: &[(String, Sort)],
    line: usize,
    step: usize,
    required: bool,
) -> Result<Valuation, RuntimeError> {
    let mut v = Valuation::new();
    for (name, sort) in vars {
        let Some(raw) = row.get(name) else {
            if required {
                return Err(RuntimeError::Input {
                    step,
                    msg: format!("line {line}: `{name}` is missing"),
                });
            }
            continue;
        };
        let value = number(raw)
            .filter(|r| *sort == Sort::Real || r.is_integer())
            .ok_or_else(|| RuntimeError::Input {
                step,
                msg: format!("line {line}: `{name}` is not a valid {sort} value"),
            })?;
        v.insert(name.clone(), value);
    }
    Ok(v)
}

/// Inputs of a trace; z values are read from top-level keys or a nested
/// `"z"` object.
pub fn parse_trace(text: &str, spec: &LtlTSpec, z_vars: &[(String, Sort)]) -> Result<Vec<TraceInput>, RuntimeError> {
    let mut out = Vec::new();
    for (step, (line, row)) in rows(text)?.into_iter().enumerate() {
        let x = take(&row, &spec.env_vars, line, step, true)?;
        let z_row = match row.get("z") {
            Some(Value::Object(m)) => m.clone(),
            _ => row.clone(),
        };
        let z = take(&z_row, z_vars, line, step, false)?;
        out.push(TraceInput {
            x,
            z: if z.is_empty() { None } else { Some(z) },
        });
    }
    Ok(out)
}

/// Input/output pairs of a recorded trace for checking.
pub fn parse_steps(text: &str, spec: &LtlTSpec) -> Result<Vec<TraceStep>, RuntimeError> {
    rows(text)?
        .into_iter()
        .enumerate()
        .map(|(step, (line, row))| {
            Ok(TraceStep {
                v_x: take(&row, &spec.env_vars, line, step, true)?,
                v_y: take(&row, &spec.sys_vars, line, step, true)?,
                choice: None,
            })
        })
        .collect()
}

/// `{"x":..,"z":..,"y":..}` for one record, inputs first.
pub fn record_line(r: &StepRecord) -> String {
    let mut m = Map::new();
    for v in [&r.v_x, &r.v_z, &r.v_y] {
        for (k, val) in v.iter() {
            m.insert(k.to_string(), json_number(val));
        }
    }
    Value::Object(m).to_string()
}
