//! C99 rendering of integer Skolem functions.

use std::fmt::Write;

use super::{ProviderError, StaticProvider};
use crate::arith::{SkolemFunction, SkolemTree};
use crate::logic::{Formula, LinearTerm, Rat, Rel};

fn c_term(t: &LinearTerm) -> String {
    if t.is_integral() {
        return t.to_string();
    }
    let l = Rat::from_integer(t.denominator_lcm());
    format!("({}) / {}", t.scale(&l), l)
}

fn c_guard(f: &Formula) -> String {
    match f {
        Formula::True => "1".into(),
        Formula::False => "0".into(),
        Formula::Atom(a) => match a.rel() {
            Rel::Dvd(k) => format!("({}) % {k} == 0", a.term()),
            Rel::Eq => a.to_string().replacen(" = ", " == ", 1),
            _ => a.to_string(),
        },
        Formula::Not(g) => format!("!({})", c_guard(g)),
        Formula::And(gs) => gs.iter().map(|g| format!("({})", c_guard(g))).collect::<Vec<_>>().join(" && "),
        Formula::Or(gs) => gs.iter().map(|g| format!("({})", c_guard(g))).collect::<Vec<_>>().join(" || "),
        Formula::Exists(..) | Formula::Forall(..) => unreachable!("guards are quantifier-free"),
    }
}

fn body(t: &SkolemTree, var: &str, depth: usize, out: &mut String) {
    let pad = "    ".repeat(depth);
    match t {
        SkolemTree::Leaf(leaf) => {
            let _ = writeln!(out, "{pad}return {};", c_term(&leaf[var]));
        }
        SkolemTree::Node {
            guard,
            then,
            otherwise,
        } => {
            match then.as_ref() {
                SkolemTree::Leaf(leaf) => {
                    let _ = writeln!(out, "{pad}if ({}) return {};", c_guard(guard), c_term(&leaf[var]));
                }
                nested => {
                    let _ = writeln!(out, "{pad}if ({}) {{", c_guard(guard));
                    body(nested, var, depth + 1, out);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
            body(otherwise, var, depth, out);
        }
    }
}

/// One `int64_t <name>_<var>(...)` function per output, parameters in input order.
pub fn emit_source(f: &SkolemFunction, name: &str) -> Result<String, ProviderError> {
    if !f.is_int() {
        return Err(ProviderError::RealNotEmittable(name.to_string()));
    }
    let params = if f.inputs.is_empty() {
        "void".to_string()
    } else {
        f.inputs.iter().map(|(v, _)| format!("int64_t {v}")).collect::<Vec<_>>().join(", ")
    };
    let mut out = String::new();
    for (y, _) in &f.outputs {
        let _ = writeln!(out, "int64_t {name}_{y}({params}) {{");
        body(&f.tree, y, 1, &mut out);
        out.push_str("}\n");
    }
    Ok(out)
}

/// A translation unit with every synthesized function of a provider, named
/// `<prefix>_<letter>_c<index>_<var>`.
pub fn emit_provider_source(p: &StaticProvider, prefix: &str) -> Result<String, ProviderError> {
    let mut out = String::from("#include <stdint.h>\n\n");
    for ((k, c), e) in p.entries() {
        let name = format!("{prefix}_{}_c{}", p.bspec().table.entries[k].letter, c.index());
        out.push_str(&emit_source(&e.function, &name)?);
        out.push('\n');
    }
    Ok(out)
}
