use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use tsynth::abstraction::{booleanize, BooleanSpec};
use tsynth::bench::{bench_compare, random_inputs, CSV_HEADER};
use tsynth::game::{synthesize, MealyMachine, Synthesis};
use tsynth::logic::Sort;
use tsynth::provider::{emit_provider_source, AdaptiveDescription, DynamicProvider, ProviderError, StaticProvider, SynthesisMode};
use tsynth::runtime::{check_trace, init_controller, parse_steps, parse_trace, record_line, Provider, TraceStep};
use tsynth::spec::{parse_spec_as, LtlTSpec};

#[derive(Parser)]
#[command(name = "tsynth", version, about = "Reactive synthesis modulo linear arithmetic")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theory {
    Int,
    Real,
}

impl From<Theory> for Sort {
    fn from(t: Theory) -> Sort {
        match t {
            Theory::Int => Sort::Int,
            Theory::Real => Sort::Real,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Static,
    Dynamic,
    Adaptive,
}

#[derive(Subcommand)]
enum Cmd {
    /// Specification to reaction table and Boolean specification.
    Abstract {
        spec: PathBuf,
        #[arg(long, value_enum)]
        theory: Option<Theory>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Boolean specification to Mealy machine, or validate an imported one.
    Synth {
        bspec: PathBuf,
        #[arg(long)]
        import: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Skolem functions for every pair the machine can emit.
    Skolem {
        bspec: PathBuf,
        machine: PathBuf,
        #[arg(long)]
        gamma: Option<PathBuf>,
        /// Every pair of every reaction, not only the emitted ones.
        #[arg(long)]
        eager: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// C99 source of a provider artifact.
    EmitC {
        bspec: PathBuf,
        provider: PathBuf,
        #[arg(long, default_value = "h")]
        name: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Execute an input trace and check the result.
    Run {
        bspec: PathBuf,
        machine: PathBuf,
        inputs: PathBuf,
        #[arg(long, value_enum, default_value = "static")]
        provider: Kind,
        /// Provider artifact; missing pairs are synthesized on demand.
        #[arg(long)]
        skolem: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<PathBuf>,
        /// Randomize the dynamic provider with this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0.05)]
        rate: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Static against dynamic provider timings and divergence.
    Bench {
        spec: PathBuf,
        #[arg(long, value_enum)]
        theory: Option<Theory>,
        /// Input trace; random inputs when absent.
        #[arg(long)]
        inputs: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturbation rate of the randomized dynamic provider; 0 keeps it deterministic.
        #[arg(long, default_value_t = 0.05)]
        rate: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check an input/output trace against a specification.
    Check {
        spec: PathBuf,
        trace: PathBuf,
        #[arg(long, value_enum)]
        theory: Option<Theory>,
        /// Print the violation list as JSON.
        #[arg(long)]
        json: bool,
    },
}

/// Domain errors exit with 1, everything else with 2.
enum Failure {
    Domain(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_json(path: &Path) -> anyhow::Result<serde_json::Value> {
    serde_json::from_str(&read(path)?).with_context(|| format!("{} is not valid JSON", path.display()))
}

fn write(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn load_bspec(path: &Path) -> anyhow::Result<Arc<BooleanSpec>> {
    let b = BooleanSpec::from_json(&read_json(path)?).context("Boolean specification artifact")?;
    Ok(Arc::new(b))
}

/// A specification file, or the one embedded in a Boolean artifact.
fn load_spec(path: &Path, theory: Option<Theory>) -> anyhow::Result<LtlTSpec> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        let b = BooleanSpec::from_json(&serde_json::from_str(&text)?).context("Boolean specification artifact")?;
        return Ok(b.spec);
    }
    parse_spec_as(&text, theory.map(Sort::from)).with_context(|| format!("specification {}", path.display()))
}

fn load_machine(path: &Path, b: &BooleanSpec) -> anyhow::Result<MealyMachine> {
    MealyMachine::from_json(&read_json(path)?, b).context("controller artifact")
}

fn load_gamma(path: &Path, b: &BooleanSpec) -> anyhow::Result<AdaptiveDescription> {
    AdaptiveDescription::from_json(&read_json(path)?, b).context("adaptive description")
}

fn provider_failure(e: ProviderError) -> Failure {
    match e {
        ProviderError::AdaptiveInvalid { .. } => Failure::Domain(anyhow!("provider: {e}")),
        other => anyhow!("provider: {other}").into(),
    }
}

fn realize(b: &BooleanSpec) -> Result<MealyMachine, Failure> {
    match synthesize(b).context("game")? {
        Synthesis::Realizable(m) => Ok(m),
        Synthesis::Unrealizable(w) => Err(Failure::Domain(anyhow!("unrealizable; environment wins with letters {}", w.join(" ")))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Abstract { spec, theory, out } => {
            let s = load_spec(&spec, theory)?;
            let b = booleanize(&s).context("abstraction")?;
            write(out.as_deref(), &pretty(&b.to_json()))?;
            eprintln!("{} literals, {} letters", b.num_props(), b.table.entries.len());
        }
        Cmd::Synth { bspec, import, out } => {
            let b = load_bspec(&bspec)?;
            let m = match import {
                Some(p) => load_machine(&p, &b)?,
                None => realize(&b)?,
            };
            write(out.as_deref(), &pretty(&m.to_json()))?;
            eprintln!("realizable: {} states", m.states.len());
        }
        Cmd::Skolem {
            bspec,
            machine,
            gamma,
            eager,
            out,
        } => {
            let b = load_bspec(&bspec)?;
            let m = load_machine(&machine, &b)?;
            let g = gamma.map(|p| load_gamma(&p, &b)).transpose()?;
            let mode = if eager { SynthesisMode::Eager } else { SynthesisMode::Lazy };
            let p = StaticProvider::new(b.clone(), g, mode).map_err(provider_failure)?;
            p.prepare(&m.emitted()).map_err(provider_failure)?;
            write(out.as_deref(), &pretty(&p.to_json()))?;
            eprintln!("{} functions", p.entries().len());
        }
        Cmd::EmitC {
            bspec,
            provider,
            name,
            out,
        } => {
            let b = load_bspec(&bspec)?;
            let p = StaticProvider::from_json(&read_json(&provider)?, b).map_err(provider_failure)?;
            let src = emit_provider_source(&p, &name).map_err(provider_failure)?;
            write(out.as_deref(), &src)?;
        }
        Cmd::Run {
            bspec,
            machine,
            inputs,
            provider,
            skolem,
            gamma,
            seed,
            rate,
            out,
        } => {
            let b = load_bspec(&bspec)?;
            let m = load_machine(&machine, &b)?;
            let prov = match provider {
                Kind::Dynamic => Provider::Dynamic(match seed {
                    Some(s) => DynamicProvider::randomized(b.spec.clone(), s, rate),
                    None => DynamicProvider::deterministic(b.spec.clone()),
                }),
                Kind::Static | Kind::Adaptive => {
                    let p = match (&skolem, &gamma) {
                        (Some(path), None) => {
                            StaticProvider::from_json(&read_json(path)?, b.clone()).map_err(provider_failure)?
                        }
                        (None, g) => {
                            let g = g.as_ref().map(|p| load_gamma(p, &b)).transpose()?;
                            StaticProvider::new(b.clone(), g, SynthesisMode::Lazy).map_err(provider_failure)?
                        }
                        (Some(_), Some(_)) => {
                            return Err(anyhow!("--gamma is already recorded in the --skolem artifact").into())
                        }
                    };
                    if provider == Kind::Adaptive && p.gamma().is_none() {
                        return Err(anyhow!("--provider adaptive needs --gamma or an adaptive --skolem artifact").into());
                    }
                    p.prepare(&m.emitted()).map_err(provider_failure)?;
                    Provider::Static(Arc::new(p))
                }
            };
            let mut ctl = init_controller(b.clone(), m, prov).context("controller")?;
                        let trace = parse_trace(&read(&inputs)?, &b.spec, &ctl.external_z()).context("input trace")?;
            let recs = ctl.run_trace(&trace).context("run")?;
            let text: String = recs.iter().map(|r| record_line(r) + "\n").collect();
            write(out.as_deref(), &text)?;
            let steps: Vec<TraceStep> = recs.iter().map(TraceStep::from).collect();
            let report = check_trace(&b.spec, &steps);
            eprint!("{}", report.summary());
            if !report.is_ok() {
                return Err(Failure::Domain(anyhow!("trace check failed")));
            }
        }
        Cmd::Bench {
            spec,
            theory,
            inputs,
            steps,
            repeats,
            seed,
            rate,
            csv,
        } => {
            let s = load_spec(&spec, theory)?;
            let b = Arc::new(booleanize(&s).context("abstraction")?);
            let m = realize(&b)?;
            let p = StaticProvider::new(b.clone(), None, SynthesisMode::Lazy).map_err(provider_failure)?;
            p.prepare(&m.emitted()).map_err(provider_failure)?;
            let trace = match inputs {
                Some(path) => parse_trace(&read(&path)?, &b.spec, &[]).context("input trace")?,
                None => random_inputs(&b, steps, 10, seed),
            };
            let (stat, dynamic, rows) = bench_compare(Arc::new(p), &m, &trace, repeats, seed, rate).context("bench")?;
            print!("{}{}", stat.render(), dynamic.render());
            let ratio = dynamic.step_mean_us / stat.step_mean_us.max(1e-9);
            println!("static is {ratio:.1}x faster per step");
            if let Some(path) = csv {
                let mut text = format!("{CSV_HEADER}\n");
                for r in &rows {
                    text.push_str(&r.line());
                    text.push('\n');
                }
                write(Some(&path), &text)?;
            }
        }
        Cmd::Check {
            spec,
            trace,
            theory,
            json,
        } => {
            let s = load_spec(&spec, theory)?;
            let steps = parse_steps(&read(&trace)?, &s).context("trace")?;
            let report = check_trace(&s, &steps);
            if json {
                print!("{}", pretty(&report.to_json()));
            } else {
                print!("{}", report.summary());
            }
            if !report.is_ok() {
                return Err(Failure::Domain(anyhow!("trace check failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
