use serde_json::Value;
use tsynth::logic::text::parse_rat;
use tsynth::logic::Rat;
use tsynth_web::{closest_json, running_trace_json, skolem_curves_json};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn running_trace_matches_the_golden_outputs() {
    let v = parse(running_trace_json("4, 4, 1, 0, 2").unwrap());
    let ys: Vec<&str> = v["steps"].as_array().unwrap().iter().map(|s| s["y"].as_str().unwrap()).collect();
    assert_eq!(ys, ["2", "2", "2", "2", "2"]);
    assert_eq!(v["steps"][0]["index"], 4);
    assert_eq!(v["steps"][0]["from"], "q0");
    assert_eq!(v["check"]["violations"].as_array().unwrap().len(), 0);
    assert!(running_trace_json("4 x").is_err());
}

#[test]
fn closest_sliders() {
    let v = parse(closest_json("int", "3", "10").unwrap());
    assert_eq!((v["y"].as_str(), v["feasible"].as_bool()), (Some("10"), Some(true)));
    let v = parse(closest_json("int", "12", "10").unwrap());
    assert_eq!(v["y"], "13");
    let v = parse(closest_json("real", "5/2", "1").unwrap());
    let y = parse_rat(v["y"].as_str().unwrap()).unwrap();
    let x = Rat::new(5.into(), 2.into());
    assert!(y > x && y <= x + Rat::new(1.into(), 100.into()), "{y}");
    assert!(closest_json("int", "1.5", "0").is_err());
    assert!(closest_json("complex", "1", "0").is_err());
}

#[test]
fn curves_cover_every_reaction() {
    let v = parse(skolem_curves_json(tsynth::bench::RUNNING_EXAMPLE, -5, 5).unwrap());
    let letters = v["letters"].as_array().unwrap();
    assert_eq!(letters.len(), 3);
    let points: usize = letters
        .iter()
        .flat_map(|l| l["choices"].as_array().unwrap())
        .map(|c| c["points"].as_array().unwrap().len())
        .sum();
    // x <= 0 has 3 choices over 6 points, x = 1 has 2, x >= 2 has 3 over 4
    assert_eq!(points, 3 * 6 + 2 + 3 * 4);
    assert!(skolem_curves_json("env x:int; sys y:int; G(y > x && y <= x)", 0, 1).is_err());
}
