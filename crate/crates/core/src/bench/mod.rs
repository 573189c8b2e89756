//! Benchmark specifications and the static-versus-dynamic harness.

use std::fmt::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abstraction::BooleanSpec;
use crate::game::MealyMachine;
use crate::logic::{rat, Rat, Sort, Valuation};
use crate::provider::{DynamicProvider, StaticProvider};
use crate::runtime::{init_controller, Provider, ProviderKind, RuntimeError, StepRecord, TraceInput};

pub const RUNNING_EXAMPLE: &str = "env x:int;\nsys y:int;\nG((x < 2 -> X(y > 1)) && (x >= 2 -> y <= x))\n";

/// Golden inputs of the running example.
pub const GOLDEN_INPUTS: [i64; 5] = [4, 4, 1, 0, 2];

/// Syn(2,k): one input, one output, `k` literals for `k` in 3..=6; `k = 3`
/// is the running example.
pub fn syn_template(k: usize, sort: Sort) -> String {
    assert!((3..=6).contains(&k), "k must be in 3..=6");
    let extra = ["(x >= 2 -> y < x + 4)", "(x < 2 -> y > x - 7)", "(y <= x -> y <= 2*x - 2)"];
    let mut body = vec!["(x < 2 -> X(y > 1))", "(x >= 2 -> y <= x)"];
    body.extend(&extra[..k - 3]);
    format!("env x:{sort};\nsys y:{sort};\nG({})\n", body.join(" && "))
}

/// Random inputs for every environment variable: integers in
/// `[-range, range]`, reals on a quarter grid.
pub fn random_inputs(b: &BooleanSpec, steps: usize, range: i64, seed: u64) -> Vec<TraceInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..steps)
        .map(|_| TraceInput {
            x: b.spec
                .env_vars
                .iter()
                .map(|(v, s)| {
                    let value = match s {
                        Sort::Int => rat(rng.gen_range(-range..=range)),
                        Sort::Real => Rat::new(rng.gen_range(-4 * range..=4 * range).into(), 4.into()),
                    };
                    (v.clone(), value)
                })
                .collect(),
            z: None,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentStats {
    pub mean_us: f64,
    pub p50_us: f64,
    pub p95_us: f64,
}

fn stats(ns: &mut [u64]) -> ComponentStats {
    if ns.is_empty() {
        return ComponentStats {
            mean_us: 0.0,
            p50_us: 0.0,
            p95_us: 0.0,
        };
    }
    ns.sort_unstable();
    let pick = |q: f64| ns[((ns.len() - 1) as f64 * q).round() as usize] as f64 / 1000.0;
    ComponentStats {
        mean_us: ns.iter().sum::<u64>() as f64 / ns.len() as f64 / 1000.0,
        p50_us: pick(0.5),
        p95_us: pick(0.95),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub provider_kind: ProviderKind,
    pub steps: usize,
    pub repeats: usize,
    pub seed: u64,
    pub partition: ComponentStats,
    pub machine: ComponentStats,
    pub provider: ComponentStats,
    /// Mean whole-step time.
    pub step_mean_us: f64,
    /// Share of steps whose outputs differ from the reference trace.
    pub divergence_pct: f64,
}

impl BenchReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} provider: {} steps x {} repeats, seed {}",
            self.provider_kind.name(),
            self.steps,
            self.repeats,
            self.seed
        );
        for (name, s) in [("partitioner", &self.partition), ("machine", &self.machine), ("provider", &self.provider)] {
            let _ = writeln!(
                out,
                "  {name:<12} mean {:>10.3} us  p50 {:>10.3} us  p95 {:>10.3} us",
                s.mean_us, s.p50_us, s.p95_us
            );
        }
        let _ = writeln!(out, "  step mean {:.3} us, divergence {:.2}%", self.step_mean_us, self.divergence_pct);
        out
    }
}

/// One CSV row per step and repeat, timing the provider call.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub step: usize,
    pub component: &'static str,
    pub micros: f64,
    pub provider_kind: ProviderKind,
    pub seed: u64,
    pub diverged: bool,
}

pub const CSV_HEADER: &str = "step,component,micros,provider_kind,seed,diverged";

impl CsvRow {
    pub fn line(&self) -> String {
        format!(
            "{},{},{:.3},{},{},{}",
            self.step,
            self.component,
            self.micros,
            self.provider_kind.name(),
            self.seed,
            u8::from(self.diverged)
        )
    }
}

fn outputs(records: &[StepRecord]) -> Vec<Valuation> {
    records.iter().map(|r| r.v_y.clone()).collect()
}

/// Run `repeats` times from the initial state and compare each run's
/// outputs with `reference`.
pub fn bench_provider(
    bspec: Arc<BooleanSpec>,
    machine: &MealyMachine,
    mut make: impl FnMut(usize) -> Provider,
    inputs: &[TraceInput],
    repeats: usize,
    seed: u64,
    reference: Option<&[Valuation]>,
) -> Result<(BenchReport, Vec<CsvRow>, Vec<Valuation>), RuntimeError> {
    let mut part = Vec::new();
    let mut mach = Vec::new();
    let mut prov = Vec::new();
    let mut rows = Vec::new();
    let mut diverged = 0usize;
    let mut first = None;
    let mut kind = ProviderKind::Static;
    for r in 0..repeats.max(1) {
        let provider = make(r);
        kind = provider.kind();
        let mut ctl = init_controller(bspec.clone(), machine.clone(), provider)?;
        let recs = ctl.run_trace(inputs)?;
        let outs = outputs(&recs);
        let refs = reference.or(first.as_deref()).unwrap_or(&outs);
        for (i, rec) in recs.iter().enumerate() {
            let d = refs.get(i) != Some(&rec.v_y);
            diverged += usize::from(d);
            part.push(rec.timings.partition_ns);
            mach.push(rec.timings.machine_ns);
            prov.push(rec.timings.provide_ns);
            rows.push(CsvRow {
                step: i,
                component: "provider",
                micros: rec.timings.provide_ns as f64 / 1000.0,
                provider_kind: kind,
                seed,
                diverged: d,
            });
        }
        if first.is_none() {
            first = Some(outs);
        }
    }
    let total_steps = part.len();
    let step_mean_us = if total_steps == 0 {
        0.0
    } else {
        (part.iter().sum::<u64>() + mach.iter().sum::<u64>() + prov.iter().sum::<u64>()) as f64
            / total_steps as f64
            / 1000.0
    };
    let report = BenchReport {
        provider_kind: kind,
        steps: inputs.len(),
        repeats: repeats.max(1),
        seed,
        partition: stats(&mut part),
        machine: stats(&mut mach),
        provider: stats(&mut prov),
        step_mean_us,
        divergence_pct: if total_steps == 0 {
            0.0
        } else {
            100.0 * diverged as f64 / total_steps as f64
        },
    };
    Ok((report, rows, first.unwrap_or_default()))
}

/// Static against dynamic on identical inputs; divergence of both is
/// measured against the first static run. `rate > 0` randomizes the
/// dynamic provider with seed `seed + repeat`.
pub fn bench_compare(
    provider: Arc<StaticProvider>,
    machine: &MealyMachine,
    inputs: &[TraceInput],
    repeats: usize,
    seed: u64,
    rate: f64,
) -> Result<(BenchReport, BenchReport, Vec<CsvRow>), RuntimeError> {
    let bspec = Arc::new(provider.bspec().clone());
    let (stat, mut rows, reference) = bench_provider(
        bspec.clone(),
        machine,
        |_| Provider::Static(provider.clone()),
        inputs,
        repeats,
        seed,
        None,
    )?;
    let spec = bspec.spec.clone();
    let (dyn_report, dyn_rows, _) = bench_provider(
        bspec,
        machine,
        |r| {
            Provider::Dynamic(if rate > 0.0 {
                DynamicProvider::randomized(spec.clone(), seed.wrapping_add(r as u64), rate)
            } else {
                DynamicProvider::deterministic(spec.clone())
            })
        },
        inputs,
        repeats,
        seed,
        Some(&reference),
    )?;
    rows.extend(dyn_rows);
    Ok((stat, dyn_report, rows))
}
