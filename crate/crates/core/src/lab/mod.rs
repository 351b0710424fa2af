//! Desk-scale property checks: seeded random trials and bounded searches
//! over small programs.

pub mod duplication;
pub mod gen;
pub mod templates;
pub mod loops;
pub mod lowering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

/// Node budget of every bounded search.
pub const NODE_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub trial: u64,
    pub instance: Value,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: u64,
    pub failures: Vec<Failure>,
    /// Trials whose hypothesis never materialised.
    pub vacuous: u64,
    /// Trials cut short by the node budget.
    pub budget_exhausted: u64,
    pub verdict: Verdict,
}

impl CheckReport {
    pub fn new(name: &str) -> Self {
        CheckReport { name: name.to_string(), trials: 0, failures: Vec::new(), vacuous: 0, budget_exhausted: 0, verdict: Verdict::Pass }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn record(&mut self, seed: u64, trial: u64, outcome: Outcome) {
        self.trials += 1;
        match outcome {
            Outcome::Pass => {}
            Outcome::Vacuous => self.vacuous += 1,
            Outcome::Budget => self.budget_exhausted += 1,
            Outcome::Fail { instance, reason } => {
                self.failures.push(Failure { seed, trial, instance, reason });
                self.verdict = Verdict::Fail;
            }
        }
    }

    /// Folds `other` into `self`.
    pub fn absorb(&mut self, other: CheckReport) {
        self.trials += other.trials;
        self.vacuous += other.vacuous;
        self.budget_exhausted += other.budget_exhausted;
        self.failures.extend(other.failures);
        if other.verdict == Verdict::Fail {
            self.verdict = Verdict::Fail;
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} trials, {} failures, {} vacuous, {} budget-limited: {}",
            self.name,
            self.trials,
            self.failures.len(),
            self.vacuous,
            self.budget_exhausted,
            if self.passed() { "pass" } else { "FAIL" }
        )
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Pass,
    Vacuous,
    Budget,
    Fail { instance: Value, reason: String },
}

impl Outcome {
    pub fn fail(instance: Value, reason: impl Into<String>) -> Self {
        Outcome::Fail { instance, reason: reason.into() }
    }
}

/// Generator state of one trial; independent of execution order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent trials in parallel; failures are listed in trial order.
pub fn run_trials<F>(name: &str, trials: u64, seed: u64, f: F) -> CheckReport
where
    F: Fn(&mut ChaCha8Rng) -> Outcome + Sync,
{
    let outcomes: Vec<Outcome> = (0..trials).into_par_iter().map(|t| f(&mut trial_rng(seed, t))).collect();
    let mut report = CheckReport::new(name);
    for (t, o) in outcomes.into_iter().enumerate() {
        report.record(seed, t as u64, o);
    }
    report
}

/// Re-runs one trial of a failing report.
pub fn replay_trial<F>(seed: u64, trial: u64, f: F) -> Outcome
where
    F: Fn(&mut ChaCha8Rng) -> Outcome,
{
    f(&mut trial_rng(seed, trial))
}
