//! Aggregated experiment results and their table / JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::parties::PartyId;
use crate::protocol::{CheckStage, ProtocolConfig};

use super::runner::RunRecord;
use super::spec::{Configuration, ExperimentSpec, SweptValue};
use super::stats::{mean_interval, wilson_interval, Z95};

/// Bumped whenever the JSON layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub party: PartyId,
    pub stage: CheckStage,
    /// Runs that reached this check.
    pub runs: usize,
    pub mean_error_rate: f64,
    pub error_rate_ci: [f64; 2],
    pub pooled_usable: usize,
    pub pooled_errors: usize,
}

impl CheckSummary {
    /// Errors over usable samples across all runs.
    pub fn pooled_error_rate(&self) -> f64 {
        if self.pooled_usable == 0 {
            0.0
        } else {
            self.pooled_errors as f64 / self.pooled_usable as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecrecySummary {
    pub runs: usize,
    pub proper_min: f64,
    pub full_group_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub index: usize,
    pub swept: Vec<SweptValue>,
    pub config: ProtocolConfig,
    pub runs: usize,
    pub accepted: usize,
    pub accept_rate: f64,
    pub accept_ci: [f64; 2],
    pub checks: Vec<CheckSummary>,
    /// Mean over accepted runs; `None` when nothing was accepted.
    pub mean_key_length: Option<f64>,
    /// Accepted runs carrying attack-induced key errors, and their total.
    pub runs_with_key_errors: usize,
    pub undetected_key_errors: usize,
    pub key_agreement_violations: usize,
    pub panics: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secrecy: Option<SecrecySummary>,
}

impl ConfigSummary {
    pub fn label(&self) -> String {
        if self.swept.is_empty() {
            "base".to_string()
        } else {
            self.swept
                .iter()
                .map(|s| format!("{}={}", s.path, s.value))
                .collect::<Vec<_>>()
                .join(" ")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub seed_base: u64,
    pub num_runs: usize,
    /// Set when any accepted run's reconstructions disagree or any run panicked.
    pub correctness_failure: bool,
    pub configurations: Vec<ConfigSummary>,
    pub runs: Vec<RunRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum ReportFormat {
    /// Human-readable tables.
    #[default]
    Table,
    /// Pretty-printed JSON.
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write report to {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed report: {0}")]
    Parse(#[from] serde_json::Error),
}

impl ExperimentReport {
    pub fn aggregate(
        spec: &ExperimentSpec,
        configurations: &[Configuration],
        mut runs: Vec<RunRecord>,
    ) -> Self {
        runs.sort_by_key(|r| (r.config_index, r.run_index));
        let summaries: Vec<ConfigSummary> = configurations
            .iter()
            .map(|c| summarize(c, runs.iter().filter(|r| r.config_index == c.index)))
            .collect();
        let correctness_failure = summaries
            .iter()
            .any(|s| s.key_agreement_violations > 0 || s.panics > 0);
        Self {
            schema_version: SCHEMA_VERSION,
            seed_base: spec.seed_base,
            num_runs: spec.num_runs,
            correctness_failure,
            configurations: summaries,
            runs,
        }
    }

    pub fn key_agreement_violations(&self) -> usize {
        self.configurations
            .iter()
            .map(|c| c.key_agreement_violations)
            .sum()
    }

    pub fn panics(&self) -> usize {
        self.configurations.iter().map(|c| c.panics).sum()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        if self.correctness_failure {
            let rule = "!".repeat(72);
            let _ = writeln!(out, "{rule}");
            let _ = writeln!(
                out,
                "CORRECTNESS FAILURE: {} accepted run(s) with disagreeing keys, {} panicked run(s)",
                self.key_agreement_violations(),
                self.panics()
            );
            let _ = writeln!(out, "{rule}");
        }
        let _ = writeln!(
            out,
            "seed_base {}  runs per configuration {}",
            self.seed_base, self.num_runs
        );
        let _ = writeln!(out);

        let mut rows = vec![[
            "config",
            "swept",
            "runs",
            "accepted",
            "accept rate",
            "95% CI",
            "mean key",
            "key errors/runs",
            "violations",
            "panics",
        ]
        .map(String::from)
        .to_vec()];
        for c in &self.configurations {
            rows.push(vec![
                c.index.to_string(),
                c.label(),
                c.runs.to_string(),
                c.accepted.to_string(),
                format!("{:.4}", c.accept_rate),
                format!("[{:.4}, {:.4}]", c.accept_ci[0], c.accept_ci[1]),
                c.mean_key_length.map_or("-".into(), |k| format!("{k:.2}")),
                format!("{}/{}", c.undetected_key_errors, c.runs_with_key_errors),
                c.key_agreement_violations.to_string(),
                c.panics.to_string(),
            ]);
        }
        push_table(&mut out, &rows);

        let _ = writeln!(out);
        let mut rows = vec![[
            "config",
            "party",
            "stage",
            "runs",
            "mean error",
            "95% CI",
            "pooled errors/usable",
        ]
        .map(String::from)
        .to_vec()];
        for c in &self.configurations {
            for check in &c.checks {
                rows.push(vec![
                    c.index.to_string(),
                    check.party.to_string(),
                    format!("{:?}", check.stage).to_lowercase(),
                    check.runs.to_string(),
                    format!("{:.4}", check.mean_error_rate),
                    format!(
                        "[{:.4}, {:.4}]",
                        check.error_rate_ci[0], check.error_rate_ci[1]
                    ),
                    format!("{}/{}", check.pooled_errors, check.pooled_usable),
                ]);
            }
        }
        push_table(&mut out, &rows);

        if self.configurations.iter().any(|c| c.secrecy.is_some()) {
            let _ = writeln!(out);
            let mut rows = vec![[
                "config",
                "scanned runs",
                "min H (proper subsets)",
                "max H (full groups)",
            ]
            .map(String::from)
            .to_vec()];
            for c in &self.configurations {
                if let Some(s) = &c.secrecy {
                    rows.push(vec![
                        c.index.to_string(),
                        s.runs.to_string(),
                        format!("{:.4}", s.proper_min),
                        format!("{:.4}", s.full_group_max),
                    ]);
                }
            }
            push_table(&mut out, &rows);
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Table => self.to_table(),
            ReportFormat::Json => self.to_json(),
        }
    }

    /// Writes the rendered report to `path`, or stdout when `None`.
    pub fn emit(&self, format: ReportFormat, path: Option<&Path>) -> Result<(), ReportError> {
        let text = self.render(format);
        match path {
            Some(path) => std::fs::write(path, text).map_err(|source| ReportError::Write {
                path: path.display().to_string(),
                source,
            }),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|source| ReportError::Write {
                    path: "stdout".into(),
                    source,
                }),
        }
    }
}

fn summarize<'a>(
    configuration: &Configuration,
    runs: impl Iterator<Item = &'a RunRecord>,
) -> ConfigSummary {
    let runs: Vec<&RunRecord> = runs.collect();
    let accepted: Vec<&&RunRecord> = runs.iter().filter(|r| r.accepted()).collect();

    let mut per_check: BTreeMap<(PartyId, CheckStage), (Vec<f64>, usize, usize)> = BTreeMap::new();
    for check in runs.iter().flat_map(|r| &r.checks) {
        let entry = per_check.entry((check.party, check.stage)).or_default();
        entry.0.push(check.error_rate());
        entry.1 += check.usable;
        entry.2 += check.errors;
    }
    let checks = per_check
        .into_iter()
        .map(|((party, stage), (rates, usable, errors))| {
            let (mean, ci) =
                mean_interval(&rates, Z95).expect("at least one run reached the check");
            CheckSummary {
                party,
                stage,
                runs: rates.len(),
                mean_error_rate: mean,
                error_rate_ci: ci,
                pooled_usable: usable,
                pooled_errors: errors,
            }
        })
        .collect();

    let scanned: Vec<_> = runs.iter().filter_map(|r| r.secrecy.as_ref()).collect();
    let secrecy = (!scanned.is_empty()).then(|| SecrecySummary {
        runs: scanned.len(),
        proper_min: scanned
            .iter()
            .map(|s| s.proper_min)
            .fold(f64::INFINITY, f64::min),
        full_group_max: scanned
            .iter()
            .map(|s| s.full_group_max)
            .fold(f64::NEG_INFINITY, f64::max),
    });

    let keys: Vec<f64> = accepted.iter().map(|r| r.key_length as f64).collect();
    ConfigSummary {
        index: configuration.index,
        swept: configuration.swept.clone(),
        config: configuration.config.clone(),
        runs: runs.len(),
        accepted: accepted.len(),
        accept_rate: if runs.is_empty() {
            0.0
        } else {
            accepted.len() as f64 / runs.len() as f64
        },
        accept_ci: wilson_interval(accepted.len(), runs.len(), Z95),
        checks,
        mean_key_length: mean_interval(&keys, Z95).map(|(mean, _)| mean),
        runs_with_key_errors: runs.iter().filter(|r| r.undetected_key_errors > 0).count(),
        undetected_key_errors: runs.iter().map(|r| r.undetected_key_errors).sum(),
        key_agreement_violations: runs.iter().filter(|r| r.key_agreement_violated).count(),
        panics: runs.iter().filter(|r| r.panic.is_some()).count(),
        secrecy,
    }
}

fn push_table(out: &mut String, rows: &[Vec<String>]) {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|i| {
            rows.iter()
                .filter_map(|r| r.get(i))
                .map(|c| c.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
}
