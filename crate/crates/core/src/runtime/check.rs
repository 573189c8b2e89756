//! Bounded trace monitor.

use std::fmt;

use super::StepRecord;
use crate::abstraction::Choice;
use crate::logic::Valuation;
use crate::spec::{classify_fragment, Fragment, LtlNode, LtlTSpec};

/// One observed step; `choice` is the cube the controller claimed, if known.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub v_x: Valuation,
    pub v_y: Valuation,
    pub choice: Option<Choice>,
}

impl From<&StepRecord> for TraceStep {
    fn from(r: &StepRecord) -> Self {
        TraceStep {
            v_x: r.v_x.clone(),
            v_y: r.v_y.clone(),
            choice: Some(r.choice.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Literal `literal` evaluated differently from the claimed choice.
    LiteralMismatch { literal: usize, claimed: bool },
    /// A conjunct of the property fails at this step.
    Safety { conjunct: String },
    Unevaluable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::LiteralMismatch { literal, claimed } => {
                write!(f, "step {}: literal s{literal} claimed {claimed} but evaluates to {}", self.index, !claimed)
            }
            ViolationKind::Safety { conjunct } => write!(f, "step {}: property violated: {conjunct}", self.index),
            ViolationKind::Unevaluable(msg) => write!(f, "step {}: {msg}", self.index),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub steps: usize,
    /// False when the property is outside the monitored fragment.
    pub safety_checked: bool,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} steps, {} violations{}\n",
            self.steps,
            self.violations.len(),
            if self.safety_checked { "" } else { " (literal agreement only)" }
        );
        for v in &self.violations {
            out.push_str(&format!("{v}\n"));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vs: Vec<serde_json::Value> = self
            .violations
            .iter()
            .map(|v| {
                let kind = match v.kind {
                    ViolationKind::LiteralMismatch { .. } => "literal",
                    ViolationKind::Safety { .. } => "safety",
                    ViolationKind::Unevaluable(_) => "unevaluable",
                };
                serde_json::json!({"index": v.index, "kind": kind, "message": v.to_string()})
            })
            .collect();
        serde_json::json!({"steps": self.steps, "safety_checked": self.safety_checked, "violations": vs})
    }
}

fn exists_next(b: &LtlNode, now: &[bool]) -> bool {
    let xs = b.next_literals();
    (0u64..1 << xs.len()).any(|mask| {
        let mut next = now.to_vec();
        for (j, &i) in xs.iter().enumerate() {
            next[i] = mask >> j & 1 == 1;
        }
        b.eval_step(now, &next)
    })
}

/// Literal agreement per step and, for the G/X fragment, bounded
/// satisfaction: `G` bodies at every step, other conjuncts at step 0, `X`
/// obligations against the following step. At the last step it suffices
/// that some next valuation would discharge them.
pub fn check_trace(spec: &LtlTSpec, steps: &[TraceStep]) -> CheckReport {
    let mut violations = Vec::new();
    let mut values: Vec<Option<Vec<bool>>> = Vec::new();
    for (i, s) in steps.iter().enumerate() {
        match spec.literal_values(&s.v_x.union(&s.v_y)) {
            Ok(vals) => {
                if let Some(c) = &s.choice {
                    for (l, &v) in vals.iter().enumerate() {
                        if c.bits().get(l) != Some(&v) {
                            violations.push(Violation {
                                index: i,
                                kind: ViolationKind::LiteralMismatch {
                                    literal: l,
                                    claimed: !v,
                                },
                            });
                        }
                    }
                }
                values.push(Some(vals));
            }
            Err(e) => {
                violations.push(Violation {
                    index: i,
                    kind: ViolationKind::Unevaluable(e.to_string()),
                });
                values.push(None);
            }
        }
    }

    let safety_checked = classify_fragment(&spec.property) == Fragment::GXSafety;
    if safety_checked {
        let conjuncts: Vec<&LtlNode> = match &spec.property {
            LtlNode::And(ps) => ps.iter().collect(),
            other => vec![other],
        };
        let lit = |i: usize| format!("({})", spec.literals[i]);
        for (i, now) in values.iter().enumerate() {
            let Some(now) = now else { continue };
            let next = values.get(i + 1);
            for c in &conjuncts {
                let (body, here) = match c {
                    LtlNode::Globally(body) => (body.as_ref(), true),
                    other => (*other, i == 0),
                };
                if !here {
                    continue;
                }
                let ok = match next {
                    Some(Some(n)) => body.eval_step(now, n),
                    Some(None) => true,
                    None => exists_next(body, now),
                };
                if !ok {
                    violations.push(Violation {
                        index: i,
                        kind: ViolationKind::Safety {
                            conjunct: c.render(&lit),
                        },
                    });
                }
            }
        }
    }
    violations.sort_by_key(|v| v.index);
    CheckReport {
        steps: steps.len(),
        safety_checked,
        violations,
    }
}
