//! WebAssembly entry points for the demo page in `www/`. Each export takes
//! and returns JSON text; the plain functions are usable natively.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use serde_json::{json, Value};
use tsynth::abstraction::{booleanize, BooleanSpec};
use tsynth::bench::RUNNING_EXAMPLE;
use tsynth::game::{synthesize, MealyMachine, Synthesis};
use tsynth::logic::text::parse_rat;
use tsynth::logic::{fmt_rat, rat, Rat, Sort, Valuation};
use tsynth::provider::{AdaptiveDescription, StaticProvider, SynthesisMode};
use tsynth::runtime::{check_trace, init_controller, Provider, TheoryController, TraceStep};
use tsynth::spec::parse_spec;
use wasm_bindgen::prelude::*;

fn realize(text: &str) -> Result<(Arc<BooleanSpec>, MealyMachine), String> {
    let spec = parse_spec(text).map_err(|e| e.to_string())?;
    let b = Arc::new(booleanize(&spec).map_err(|e| e.to_string())?);
    match synthesize(&b).map_err(|e| e.to_string())? {
        Synthesis::Realizable(m) => Ok((b, m)),
        Synthesis::Unrealizable(w) => Err(format!("unrealizable, witness {}", w.join(" "))),
    }
}

fn value(r: &Rat) -> Value {
    Value::from(fmt_rat(r))
}

/// Every Skolem function of a one-input specification sampled on
/// `[lo, hi]`: integers for int inputs, quarter points for real ones.
pub fn skolem_curves_json(spec_text: &str, lo: i32, hi: i32) -> Result<String, String> {
    let (b, _) = realize(spec_text)?;
    let [(x, sort)] = b.spec.env_vars.as_slice() else {
        return Err("curves need exactly one input variable".into());
    };
    let [(y, _)] = b.spec.sys_vars.as_slice() else {
        return Err("curves need exactly one output variable".into());
    };
    let step = match sort {
        Sort::Int => 1,
        Sort::Real => 4,
    };
    let xs: Vec<Rat> = (lo * step..=hi * step)
        .map(|q| Rat::new(q.into(), step.into()))
        .collect();
    let p = StaticProvider::new(b.clone(), None, SynthesisMode::Lazy).map_err(|e| e.to_string())?;
    let mut letters = Vec::new();
    for (l, e) in b.table.entries.iter().enumerate() {
        let mut choices = Vec::new();
        for c in &e.reaction {
            let h = p.entry(l, c).map_err(|err| err.to_string())?;
            let mut points = Vec::new();
            for v in &xs {
                let vx = Valuation::new().with(x.clone(), v.clone());
                if e.region.eval(&vx).map_err(|err| err.to_string())? {
                    let out = h.function.eval(&vx).map_err(|err| err.to_string())?;
                    points.push(json!([value(v), value(out.get(y).map_err(|err| err.to_string())?)]));
                }
            }
            choices.push(json!({
                "choice": c.bitstring(),
                "index": c.index(),
                "cube": c.cube(),
                "function": h.function.to_string(),
                "points": points,
            }));
        }
        letters.push(json!({"letter": e.letter, "region": e.region.to_string(), "choices": choices}));
    }
    let literals: Vec<String> = b.spec.literals.iter().map(|l| l.to_string()).collect();
    Ok(json!({"input": x, "output": y, "literals": literals, "letters": letters}).to_string())
}

thread_local! {
    static CLOSEST: RefCell<HashMap<Sort, TheoryController>> = RefCell::new(HashMap::new());
}

fn closest_controller(sort: Sort) -> Result<TheoryController, String> {
    let (b, m) = realize(&format!("env x:{sort}; sys y:{sort}; G(y > x)"))?;
    let mut entry = json!({"letter": "*", "choice": "*", "closest": "z"});
    if sort == Sort::Real {
        entry["epsilon"] = "1/100".into();
    }
    let gamma = json!({
        "z": [{"name": "z", "sort": sort.to_string(), "binding": "external"}],
        "constraints": [entry],
    });
    let g = AdaptiveDescription::from_json(&gamma, &b).map_err(|e| e.to_string())?;
    let p = StaticProvider::new(b.clone(), Some(g), SynthesisMode::Eager).map_err(|e| e.to_string())?;
    init_controller(b, m, Provider::Static(Arc::new(p))).map_err(|e| e.to_string())
}

/// Output of `G(y > x)` closest to the target `z`; reals allow a slack of
/// 1/100.
pub fn closest_json(theory: &str, x: &str, z: &str) -> Result<String, String> {
    let sort: Sort = theory.parse()?;
    let parse = |s: &str| {
        parse_rat(s)
            .filter(|r| sort == Sort::Real || r.is_integer())
            .ok_or_else(|| format!("`{s}` is not a valid {sort} value"))
    };
    let (vx, vz) = (parse(x)?, parse(z)?);
    CLOSEST.with(|cell| {
        let mut map = cell.borrow_mut();
        if !map.contains_key(&sort) {
            map.insert(sort, closest_controller(sort)?);
        }
        let ctl = map.get_mut(&sort).expect("inserted above");
        ctl.reset();
        let r = ctl
            .step(
                &Valuation::new().with("x", vx.clone()),
                Some(&Valuation::new().with("z", vz.clone())),
            )
            .map_err(|e| e.to_string())?;
        let y = r.v_y.get("y").map_err(|e| e.to_string())?.clone();
        let feasible = vz > vx;
        Ok(json!({
            "y": value(&y),
            "feasible": feasible,
            "distance": value(&(if y > vz { &y - &vz } else { &vz - &y })),
        })
        .to_string())
    })
}

/// The running example driven by comma- or space-separated integer inputs,
/// with the per-step controller state and a trace check.
pub fn running_trace_json(inputs: &str) -> Result<String, String> {
    let (b, m) = realize(RUNNING_EXAMPLE)?;
    let p = StaticProvider::new(b.clone(), None, SynthesisMode::Lazy).map_err(|e| e.to_string())?;
    let mut ctl = init_controller(b.clone(), m, Provider::Static(Arc::new(p))).map_err(|e| e.to_string())?;
    let mut steps = Vec::new();
    let mut checked = Vec::new();
    for tok in inputs.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let x: i64 = tok.parse().map_err(|_| format!("`{tok}` is not an integer"))?;
        let from = ctl.state().to_string();
        let r = ctl.step(&Valuation::new().with("x", rat(x)), None).map_err(|e| e.to_string())?;
        let e = &b.table.entries[b.table.letter_index(&r.letter).expect("known letter")];
        steps.push(json!({
            "x": x,
            "letter": r.letter,
            "region": e.region.to_string(),
            "from": from,
            "to": ctl.state(),
            "choice": r.choice.bitstring(),
            "index": r.choice.index(),
            "cube": r.choice.cube(),
            "y": value(r.v_y.get("y").map_err(|err| err.to_string())?),
        }));
        checked.push(TraceStep::from(&r));
    }
    let report = check_trace(&b.spec, &checked);
    Ok(json!({"steps": steps, "check": report.to_json(), "summary": report.summary()}).to_string())
}

#[wasm_bindgen]
pub fn skolem_curves(spec_text: &str, lo: i32, hi: i32) -> Result<String, JsValue> {
    skolem_curves_json(spec_text, lo, hi).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn closest(theory: &str, x: &str, z: &str) -> Result<String, JsValue> {
    closest_json(theory, x, z).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn running_trace(inputs: &str) -> Result<String, JsValue> {
    running_trace_json(inputs).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn running_example() -> String {
    RUNNING_EXAMPLE.to_string()
}
