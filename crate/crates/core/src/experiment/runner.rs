//! Batch execution of an experiment over seeds and sweep points.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::protocol::{
    conditional_key_distribution, run_protocol, AbortReason, CheckReport, Knowledge,
    ProtocolConfig, ProtocolOutcome, Verdict,
};

use super::report::ExperimentReport;
use super::spec::{ExperimentSpec, SpecError};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `run_index` of configuration `config_index`:
/// `s(s(s(seed_base) ^ config_index) ^ run_index)` where `s` is one
/// SplitMix64 step. Neighbouring indices land on unrelated streams.
pub fn derive_seed(seed_base: u64, config_index: usize, run_index: usize) -> u64 {
    let h = splitmix64(seed_base);
    let h = splitmix64(h ^ config_index as u64);
    splitmix64(h ^ run_index as u64)
}

/// Secrecy scan of one accepted run over every party subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSecrecy {
    /// Lowest per-position min-entropy over subsets lacking both full groups.
    pub proper_min: f64,
    /// Highest per-position min-entropy over subsets holding a full group.
    pub full_group_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_index: usize,
    pub run_index: usize,
    pub seed: u64,
    /// `None` when the run panicked.
    pub verdict: Option<Verdict>,
    pub abort_reason: Option<AbortReason>,
    pub checks: Vec<CheckReport>,
    pub key_length: usize,
    /// Accepted key positions disturbed by an attack that disagree.
    pub undetected_key_errors: usize,
    pub key_agreement_violated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secrecy: Option<RunSecrecy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub panic: Option<String>,
}

impl RunRecord {
    pub fn accepted(&self) -> bool {
        self.verdict.is_some_and(|v| v.is_accept())
    }

    fn from_outcome(
        config_index: usize,
        run_index: usize,
        seed: u64,
        outcome: &ProtocolOutcome,
        secrecy: bool,
    ) -> Self {
        Self {
            config_index,
            run_index,
            seed,
            verdict: Some(outcome.verdict),
            abort_reason: outcome.abort_reason,
            checks: outcome.checks.clone(),
            key_length: outcome.final_key().len(),
            undetected_key_errors: outcome.undetected_key_errors(),
            key_agreement_violated: outcome.key_agreement_violated(),
            secrecy: (secrecy && outcome.accepted()).then(|| scan_secrecy(outcome)),
            panic: None,
        }
    }

    fn panicked(config_index: usize, run_index: usize, seed: u64, message: String) -> Self {
        Self {
            config_index,
            run_index,
            seed,
            verdict: None,
            abort_reason: None,
            checks: Vec::new(),
            key_length: 0,
            undetected_key_errors: 0,
            key_agreement_violated: false,
            secrecy: None,
            panic: Some(message),
        }
    }
}

fn scan_secrecy(outcome: &ProtocolOutcome) -> RunSecrecy {
    let (m, n) = (outcome.m, outcome.n);
    let mut proper_min = f64::INFINITY;
    let mut full_group_max = f64::NEG_INFINITY;
    for knowledge in Knowledge::all_subsets(m, n) {
        let report =
            conditional_key_distribution(outcome, &knowledge).expect("accepted run, known parties");
        if knowledge.has_all_alices(m) || knowledge.has_all_bobs(n) {
            full_group_max = full_group_max.max(report.max());
        } else {
            proper_min = proper_min.min(report.min());
        }
    }
    RunSecrecy {
        proper_min,
        full_group_max,
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    match payload.downcast::<String>() {
        Ok(s) => *s,
        Err(payload) => match payload.downcast::<&'static str>() {
            Ok(s) => s.to_string(),
            Err(_) => "non-string panic payload".to_string(),
        },
    }
}

/// Execution knobs that do not change results.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses one per available core.
    pub jobs: usize,
}

/// Runs every configuration of `spec` `num_runs` times.
pub fn run_experiment(
    spec: &ExperimentSpec,
    options: RunOptions,
) -> Result<ExperimentReport, SpecError> {
    run_experiment_with(spec, options, run_protocol)
}

/// As [`run_experiment`], with a custom protocol implementation. Each call
/// receives the configuration with its derived `rng_seed` filled in. Panics
/// are caught and recorded against the run.
pub fn run_experiment_with<F>(
    spec: &ExperimentSpec,
    options: RunOptions,
    run: F,
) -> Result<ExperimentReport, SpecError>
where
    F: Fn(&ProtocolConfig) -> Result<ProtocolOutcome, ConfigError> + Sync,
{
    if spec.num_runs == 0 {
        return Err(SpecError::NoRuns);
    }
    let configurations = spec.configurations()?;
    let tasks: Vec<(usize, usize)> = (0..configurations.len())
        .flat_map(|c| (0..spec.num_runs).map(move |r| (c, r)))
        .collect();

    let execute = |&(c, r): &(usize, usize)| -> RunRecord {
        let seed = derive_seed(spec.seed_base, c, r);
        let mut config = configurations[c].config.clone();
        config.rng_seed = seed;
        match catch_unwind(AssertUnwindSafe(|| run(&config))) {
            Ok(Ok(outcome)) => RunRecord::from_outcome(c, r, seed, &outcome, spec.secrecy),
            Ok(Err(e)) => RunRecord::panicked(c, r, seed, format!("configuration rejected: {e}")),
            Err(payload) => RunRecord::panicked(c, r, seed, panic_message(payload)),
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .expect("thread pool");
    let records: Vec<RunRecord> = pool.install(|| tasks.par_iter().map(execute).collect());
    Ok(ExperimentReport::aggregate(spec, &configurations, records))
}
