use super::*;
use crate::abstraction::booleanize;
use crate::logic::{rat, Rat, Sort};
use crate::spec::parse_spec;
use num_traits::Signed;

const RUNNING: &str = "env x:int; sys y:int; G((x < 2 -> X(y > 1)) && (x >= 2 -> y <= x))";

fn running() -> Arc<BooleanSpec> {
    Arc::new(booleanize(&parse_spec(RUNNING).unwrap()).unwrap())
}

fn letter(b: &BooleanSpec, region: &str) -> usize {
    b.table.entries.iter().position(|e| e.region.to_string() == region).unwrap()
}

fn bits(s: &str) -> Choice {
    Choice::parse_bits(s).unwrap()
}

fn y_of(v: &Valuation) -> Rat {
    v.get("y").unwrap().clone()
}

fn x(n: i64) -> Valuation {
    Valuation::from_ints([("x", n)])
}

fn gamma(b: &BooleanSpec, doc: serde_json::Value) -> AdaptiveDescription {
    AdaptiveDescription::from_json(&doc, b).unwrap()
}

#[test]
fn basic_functions_of_the_running_example() {
    let b = running();
    let p = StaticProvider::new(b.clone(), None, SynthesisMode::Lazy).unwrap();
    let big = letter(&b, "x >= 2");
    let one = letter(&b, "x = 1");
    let c4 = Choice::from_index(4, 3);
    let c1 = Choice::from_index(1, 3);
    for n in 2..60 {
        assert_eq!(y_of(&p.provide(&x(n), &Valuation::new(), big, &c4).unwrap()), rat(2));
    }
    assert_eq!(y_of(&p.provide(&x(1), &Valuation::new(), one, &c1).unwrap()), rat(2));
    for (k, c) in [(big, &c4), (one, &c1)] {
        let h = &p.entry(k, c).unwrap().function;
        assert!(verify_contract(&b, k, c, h).unwrap());
    }
}

#[test]
fn basic_formula_shape_and_guard() {
    let b = running();
    let big = letter(&b, "x >= 2");
    let f = build_basic_formula(&b, big, &bits("011")).unwrap();
    assert_eq!(
        f.to_string(),
        "(forall x:int. (exists y:int. (x <= 1 || (x >= 2 && y >= 2 && y <= x))))"
    );
    assert!(matches!(
        build_basic_formula(&b, big, &bits("111")),
        Err(ProviderError::ChoiceNotInReaction { .. })
    ));
}

#[test]
fn greatest_y_adaptive_function_returns_x() {
    let b = running();
    let big = letter(&b, "x >= 2");
    let g = gamma(
        &b,
        serde_json::json!({"constraints": [{
            "letter": b.table.entries[big].letter, "choice": "011",
            "constraint": "forall w:int. (w > 1 && w <= x) -> w <= y"
        }]}),
    );
    let p = StaticProvider::new(b.clone(), Some(g), SynthesisMode::Lazy).unwrap();
    let c4 = bits("011");
    for n in 2..=100 {
        assert_eq!(y_of(&p.provide(&x(n), &Valuation::new(), big, &c4).unwrap()), rat(n));
    }
    assert!(p.entry(big, &c4).unwrap().adaptive);
    let one = letter(&b, "x = 1");
    assert!(!p.entry(one, &bits("110")).unwrap().adaptive);
}

#[test]
fn bounded_successor_is_adaptive_invalid() {
    let b = Arc::new(booleanize(&parse_spec("env x:int; sys y:int; G(y > x)").unwrap()).unwrap());
    let g = gamma(&b, serde_json::json!({"constraints": [{"letter": "*", "choice": "*", "constraint": "y < 100"}]}));
    let err = StaticProvider::new(b, Some(g), SynthesisMode::Eager).unwrap_err();
    assert!(matches!(err, ProviderError::AdaptiveInvalid { .. }), "{err}");
}

#[test]
fn least_successor_via_minimality() {
    let b = Arc::new(booleanize(&parse_spec("env x:int; sys y:int; G(y > x)").unwrap()).unwrap());
    let g = gamma(
        &b,
        serde_json::json!({"constraints": [{"letter": "*", "choice": "*", "constraint": "forall w:int. w > x -> w >= y"}]}),
    );
    let p = StaticProvider::new(b, Some(g), SynthesisMode::Lazy).unwrap();
    for n in -30..30 {
        assert_eq!(y_of(&p.provide(&x(n), &Valuation::new(), 0, &bits("1")).unwrap()), rat(n + 1));
    }
}

fn closest(sort: &str, eps: Option<&str>) -> StaticProvider {
    let text = format!("env x:{sort}; sys y:{sort}; G(y > x)");
    let b = Arc::new(booleanize(&parse_spec(&text).unwrap()).unwrap());
    let mut entry = serde_json::json!({"letter": "*", "choice": "*", "closest": "z"});
    if let Some(e) = eps {
        entry["epsilon"] = e.into();
    }
    let g = gamma(
        &b,
        serde_json::json!({"z": [{"name": "z", "sort": sort, "binding": "external"}], "constraints": [entry]}),
    );
    StaticProvider::new(b, Some(g), SynthesisMode::Eager).unwrap()
}

#[test]
fn closest_element_over_integers() {
    let p = closest("int", None);
    let at = |xv: i64, zv: i64| {
        let out = p.provide(&x(xv), &Valuation::from_ints([("z", zv)]), 0, &bits("1")).unwrap();
        y_of(&out)
    };
    assert_eq!(at(3, 10), rat(10));
    assert_eq!(at(12, 10), rat(13));
    for xv in -12..12 {
        for zv in -12..12 {
            let y = at(xv, zv);
            let best = (xv + 1..xv + 40).min_by_key(|w| (w - zv).abs()).unwrap();
            assert_eq!((y.clone() - rat(zv)).abs(), rat((best - zv).abs()), "x={xv} z={zv}");
            assert!(y > rat(xv));
        }
    }
}

#[test]
fn closest_element_over_reals_is_epsilon_bounded() {
    let p = closest("real", Some("1/100"));
    let eps = Rat::new(1.into(), 100.into());
    for (xv, zv) in [(3, 10), (12, 10), (0, 0), (-4, 7), (5, 5)] {
        let out = p.provide(&x(xv), &Valuation::from_ints([("z", zv)]), 0, &bits("1")).unwrap();
        let y = y_of(&out);
        assert!(y > rat(xv));
        // infimum of |w - z| over w > x
        let inf = if zv > xv { rat(0) } else { rat(xv - zv) };
        assert!((y - rat(zv)).abs() <= inf + eps.clone(), "x={xv} z={zv}");
    }
    let text = "env x:real; sys y:real; G(y > x)";
    let b = booleanize(&parse_spec(text).unwrap()).unwrap();
    let psi = characteristic_choice(&bits("1"), &b.spec);
    assert_eq!(build_closest_constraint(&psi, "y", "z", Sort::Real, None), Err(ProviderError::MissingEpsilon));
}

#[test]
fn dynamic_provider_models() {
    let b = running();
    let c4 = bits("011");
    let y4 = y_of(&provide_dynamic(&b.spec, &x(4), &c4).unwrap());
    assert!([rat(2), rat(3), rat(4)].contains(&y4));
    assert_eq!(y_of(&provide_dynamic(&b.spec, &x(2), &c4).unwrap()), rat(2));
    assert!(matches!(
        provide_dynamic(&b.spec, &x(4), &bits("111")),
        Err(ProviderError::InfeasibleChoice { .. })
    ));
}

#[test]
fn randomized_dynamic_provider_is_seed_stable_and_sound() {
    let b = running();
    let c4 = bits("011");
    let run = |seed| {
        let mut d = DynamicProvider::randomized(b.spec.clone(), seed, 0.5);
        (0..60).map(|_| y_of(&d.provide(&x(4), &c4).unwrap())).collect::<Vec<_>>()
    };
    let a = run(9);
    assert_eq!(a, run(9));
    assert!(a.iter().any(|y| *y != rat(2)));
    assert!(a.iter().all(|y| *y >= rat(2) && *y <= rat(4)));
}

#[test]
fn artifact_round_trip_and_tamper_detection() {
    let b = running();
    let p = StaticProvider::new(b.clone(), None, SynthesisMode::Eager).unwrap();
    let j = p.to_json();
    let q = StaticProvider::from_json(&j, b.clone()).unwrap();
    assert_eq!(q.to_json(), j);
    let mut bad = j.clone();
    let fs = bad["functions"].as_array_mut().unwrap();
    let i = fs.iter().position(|f| f["choice"] == "011").unwrap();
    fs[i]["function"]["tree"] = serde_json::json!({"outputs": {"y": "0"}});
    assert!(matches!(StaticProvider::from_json(&bad, b), Err(ProviderError::Artifact(_))));
}

#[test]
fn c_rendering() {
    let b = running();
    let p = StaticProvider::new(b.clone(), None, SynthesisMode::Lazy).unwrap();
    let big = letter(&b, "x >= 2");
    let h = p.entry(big, &bits("011")).unwrap().function.clone();
    let src = emit_source(&h, "h").unwrap();
    assert_eq!(src, "int64_t h_y(int64_t x) {\n    if (x >= 2) return 2;\n    return 0;\n}\n");
    let konst = synthesize_skolem(&crate::logic::text::parse_formula("exists y:int. y = 5", &Default::default()).unwrap())
        .unwrap();
    assert_eq!(emit_source(&konst, "k").unwrap(), "int64_t k_y(void) {\n    return 5;\n}\n");
    let real = synthesize_skolem(
        &crate::logic::text::parse_formula("forall x:real. exists y:real. y > x", &Default::default()).unwrap(),
    )
    .unwrap();
    assert!(matches!(emit_source(&real, "r"), Err(ProviderError::RealNotEmittable(_))));
}

fn c_compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| {
        std::process::Command::new(c)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
    })
}

#[test]
fn emitted_c_agrees_with_tree_evaluation() {
    let Some(cc) = c_compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let b = Arc::new(
        booleanize(&parse_spec("env x:int; sys y:int; G((x < 2 -> X(y > 1)) && (x >= 2 -> y <= x) && (3 | x -> y = x + 1 || y < x - 4))").unwrap())
            .unwrap(),
    );
    let p = StaticProvider::new(b.clone(), None, SynthesisMode::Eager).unwrap();
    let mut src = emit_provider_source(&p, "h").unwrap();
    src.push_str("#include <stdio.h>\nint main(void) {\n    for (int64_t x = -100; x <= 100; x++) {\n");
    let entries = p.entries();
    for ((k, c), _) in &entries {
        let name = format!("h_{}_c{}_y", b.table.entries[*k].letter, c.index());
        src.push_str(&format!("        printf(\"%lld\\n\", (long long){name}(x));\n"));
    }
    src.push_str("    }\n    return 0;\n}\n");
    let dir = std::env::temp_dir().join(format!("tsynth-c-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("h.c"), &src).unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-O1", "-o"])
        .arg(dir.join("h"))
        .arg(dir.join("h.c"))
        .status()
        .unwrap();
    assert!(status.success(), "{src}");
    let out = std::process::Command::new(dir.join("h")).output().unwrap();
    let got: Vec<i64> = String::from_utf8(out.stdout).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    let mut want = Vec::new();
    for n in -100..=100 {
        for (_, e) in &entries {
            let y = y_of(&e.function.eval(&x(n)).unwrap());
            want.push(i64::try_from(y.to_integer()).unwrap());
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(got, want);
}
