//! The combined controller: partitioner, Boolean machine and provider.

mod check;
mod trace;

use std::sync::Arc;

use thiserror::Error;

use crate::abstraction::{BooleanSpec, Choice};
use crate::game::MealyMachine;
use crate::logic::{LogicError, Sort, Valuation};
use crate::partition::{compile_partitioner, CompiledPartitioner, PartitionError};
use crate::provider::{DynamicProvider, ProviderError, StaticProvider, ZBinding, ZVar};

pub use check::{check_trace, CheckReport, TraceStep, Violation, ViolationKind};
pub use trace::{parse_steps, parse_trace, record_line, TraceInput};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("partitioner: {0}")]
    Partition(#[from] PartitionError),
    #[error("provider: {0}")]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("components disagree: {0}")]
    SchemaMismatch(String),
    #[error("step {step}: {msg}")]
    Input { step: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProviderKind {
    Static,
    Dynamic,
    Adaptive,
}

impl ProviderKind {
    pub fn name(self) -> &'static str {
        match self {
            ProviderKind::Static => "static",
            ProviderKind::Dynamic => "dynamic",
            ProviderKind::Adaptive => "adaptive",
        }
    }
}

pub enum Provider {
    Static(Arc<StaticProvider>),
    Dynamic(DynamicProvider),
}

impl Provider {
    pub fn kind(&self) -> ProviderKind {
        match self {
            Provider::Static(p) if p.gamma().is_some() => ProviderKind::Adaptive,
            Provider::Static(_) => ProviderKind::Static,
            Provider::Dynamic(_) => ProviderKind::Dynamic,
        }
    }
}

/// Per-component wall time of one step, in nanoseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepTimings {
    pub partition_ns: u64,
    pub machine_ns: u64,
    pub provide_ns: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub index: usize,
    pub v_x: Valuation,
    pub letter: String,
    pub choice: Choice,
    pub v_y: Valuation,
    pub v_z: Valuation,
    pub timings: StepTimings,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    pub steps: u64,
    pub partition_ns: u64,
    pub machine_ns: u64,
    pub provide_ns: u64,
}

#[cfg(not(target_arch = "wasm32"))]
mod clock {
    pub struct Stamp(std::time::Instant);
    pub fn now() -> Stamp {
        Stamp(std::time::Instant::now())
    }
    impl Stamp {
        pub fn ns(&self) -> u64 {
            self.0.elapsed().as_nanos() as u64
        }
    }
}

#[cfg(target_arch = "wasm32")]
mod clock {
    pub struct Stamp;
    pub fn now() -> Stamp {
        Stamp
    }
    impl Stamp {
        pub fn ns(&self) -> u64 {
            0
        }
    }
}

/// A running controller; single-threaded, one instance per trace.
pub struct TheoryController {
    bspec: Arc<BooleanSpec>,
    partitioner: CompiledPartitioner,
    machine: MealyMachine,
    provider: Provider,
    z_vars: Vec<ZVar>,
    q: usize,
    z_state: Valuation,
    index: usize,
    metrics: Metrics,
}

/// Controller at the machine's initial state.
pub fn init_controller(
    bspec: Arc<BooleanSpec>,
    machine: MealyMachine,
    provider: Provider,
) -> Result<TheoryController, RuntimeError> {
    if machine.letters != bspec.table.letters() {
        return Err(RuntimeError::SchemaMismatch(format!(
            "machine letters {:?} vs table letters {:?}",
            machine.letters,
            bspec.table.letters()
        )));
    }
    if machine.props != bspec.props() {
        return Err(RuntimeError::SchemaMismatch("machine propositions differ from the table".into()));
    }
    for (k, c) in machine.emitted() {
        if !bspec.table.entries[k].reaction.contains(&c) {
            return Err(RuntimeError::SchemaMismatch(format!(
                "machine emits {c} for {} outside its reaction",
                bspec.table.entries[k].letter
            )));
        }
    }
    let z_vars = match &provider {
        Provider::Static(p) => {
            if p.bspec() != bspec.as_ref() {
                return Err(RuntimeError::SchemaMismatch("provider was built for another table".into()));
            }
            p.gamma().map(|g| g.z_vars.clone()).unwrap_or_default()
        }
        Provider::Dynamic(d) => {
            if d.spec() != &bspec.spec {
                return Err(RuntimeError::SchemaMismatch("provider was built for another specification".into()));
            }
            Vec::new()
        }
    };
    let mut ctl = TheoryController {
        partitioner: compile_partitioner(&bspec.table),
        bspec,
        machine,
        provider,
        z_vars,
        q: 0,
        z_state: Valuation::new(),
        index: 0,
        metrics: Metrics::default(),
    };
    ctl.reset();
    Ok(ctl)
}

impl TheoryController {
    /// Back to the initial state with fresh z values and metrics.
    pub fn reset(&mut self) {
        self.q = self.machine.initial;
        self.index = 0;
        self.metrics = Metrics::default();
        self.z_state = self.z_vars.iter().map(|z| (z.name.clone(), z.default.clone())).collect();
    }

    pub fn state(&self) -> &str {
        &self.machine.states[self.q]
    }

    pub fn metrics(&self) -> Metrics {
        self.metrics
    }

    pub fn provider_kind(&self) -> ProviderKind {
        self.provider.kind()
    }

    pub fn bspec(&self) -> &BooleanSpec {
        &self.bspec
    }

    /// Names of z variables that must be fed on every step.
    pub fn external_z(&self) -> Vec<(String, Sort)> {
        self.z_vars
            .iter()
            .filter(|z| z.binding == ZBinding::External)
            .map(|z| (z.name.clone(), z.sort))
            .collect()
    }

    pub fn step(&mut self, v_x: &Valuation, external_z: Option<&Valuation>) -> Result<StepRecord, RuntimeError> {
        let index = self.index;
        let bad = |msg: String| RuntimeError::Input { step: index, msg };
        for (v, _) in &self.bspec.spec.env_vars {
            if !v_x.contains(v) {
                return Err(bad(format!("input `{v}` is missing")));
            }
        }
        let mut v_z = Valuation::new();
        for z in &self.z_vars {
            let value = match &z.binding {
                ZBinding::External => external_z
                    .and_then(|e| e.get_opt(&z.name))
                    .ok_or_else(|| bad(format!("external value for `{}` is missing", z.name)))?,
                _ => self.z_state.get(&z.name)?,
            };
            v_z.insert(z.name.clone(), value.clone());
        }

        let t = clock::now();
        let letter = self.partitioner.partition(v_x)?;
        let partition_ns = t.ns();

        let t = clock::now();
        let (next, choice) = self.machine.step(self.q, letter);
        let choice = choice.clone();
        let machine_ns = t.ns();

        let t = clock::now();
        let v_y = match &mut self.provider {
            Provider::Static(p) => p.provide(v_x, &v_z, letter, &choice)?,
            Provider::Dynamic(d) => d.provide(v_x, &choice)?,
        };
        let provide_ns = t.ns();

        self.q = next;
        for z in &self.z_vars {
            match &z.binding {
                ZBinding::PrevInput(v) => self.z_state.insert(z.name.clone(), v_x.get(v)?.clone()),
                ZBinding::PrevOutput(v) => self.z_state.insert(z.name.clone(), v_y.get(v)?.clone()),
                ZBinding::External => {}
            }
        }
        self.index += 1;
        self.metrics.steps += 1;
        self.metrics.partition_ns += partition_ns;
        self.metrics.machine_ns += machine_ns;
        self.metrics.provide_ns += provide_ns;
        Ok(StepRecord {
            index,
            v_x: v_x.clone(),
            letter: self.bspec.table.entries[letter].letter.clone(),
            choice,
            v_y,
            v_z,
            timings: StepTimings {
                partition_ns,
                machine_ns,
                provide_ns,
            },
        })
    }

    pub fn run_trace(&mut self, inputs: &[TraceInput]) -> Result<Vec<StepRecord>, RuntimeError> {
        inputs.iter().map(|i| self.step(&i.x, i.z.as_ref())).collect()
    }
}
