//! Per-step model search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ProviderError;
use crate::abstraction::{characteristic_choice, Choice};
use crate::arith::find_model;
use crate::logic::{rat, Rat, Sort, Valuation};
use crate::spec::LtlTSpec;

/// Least-witness model of `f_c[x̄ ← v_x]` over the outputs.
pub fn provide_dynamic(spec: &LtlTSpec, v_x: &Valuation, c: &Choice) -> Result<Valuation, ProviderError> {
    let f = characteristic_choice(c, spec).substitute(v_x);
    find_model(&f, &spec.sys_names())?.ok_or_else(|| ProviderError::InfeasibleChoice {
        input: v_x.to_string(),
        choice: c.to_string(),
    })
}

/// Dynamic provider; the randomized mode perturbs the least witness inside
/// the cell with a seeded generator, emulating solver nondeterminism.
#[derive(Clone, Debug)]
pub struct DynamicProvider {
    spec: LtlTSpec,
    random: Option<(ChaCha8Rng, f64)>,
}

impl DynamicProvider {
    pub fn deterministic(spec: LtlTSpec) -> Self {
        DynamicProvider { spec, random: None }
    }

    /// Each step is perturbed with probability `rate`.
    pub fn randomized(spec: LtlTSpec, seed: u64, rate: f64) -> Self {
        DynamicProvider {
            spec,
            random: Some((ChaCha8Rng::seed_from_u64(seed), rate)),
        }
    }

    pub fn spec(&self) -> &LtlTSpec {
        &self.spec
    }

    pub fn provide(&mut self, v_x: &Valuation, c: &Choice) -> Result<Valuation, ProviderError> {
        let base = provide_dynamic(&self.spec, v_x, c)?;
        let Some((rng, rate)) = &mut self.random else {
            return Ok(base);
        };
        if !rng.gen_bool(*rate) || self.spec.sys_vars.is_empty() {
            return Ok(base);
        }
        let (y, sort) = &self.spec.sys_vars[rng.gen_range(0..self.spec.sys_vars.len())];
        let deltas: Vec<Rat> = match sort {
            Sort::Int => [-2, -1, 1, 2].into_iter().map(rat).collect(),
            Sort::Real => [-1, 1]
                .into_iter()
                .flat_map(|k| [rat(k), Rat::new(k.into(), 2.into())])
                .collect(),
        };
        let fc = characteristic_choice(c, &self.spec);
        let start = rng.gen_range(0..deltas.len());
        for i in 0..deltas.len() {
            let d = &deltas[(start + i) % deltas.len()];
            let mut cand = base.clone();
            cand.insert(y.clone(), base.get(y)? + d);
            if fc.eval(&v_x.union(&cand))? {
                return Ok(cand);
            }
        }
        Ok(base)
    }
}
