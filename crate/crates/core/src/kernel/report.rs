use serde::{Deserialize, Serialize};

use super::KernelError;

/// Counterexamples kept per report, beyond the first one of each condition;
/// the full count lives in `stats.failures`.
pub const MAX_COUNTEREXAMPLES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Which condition was violated, e.g. `c0.5` or `lemma.composition`.
    pub condition: String,
    /// Canonical encodings of the inputs.
    pub inputs: Vec<String>,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckStats {
    /// Total violations, including those not kept as counterexamples.
    pub failures: u64,
    /// Cases whose verdict needed an enumeration that exceeded its cap.
    pub skipped: u64,
    /// Cases excluded because they need data beyond the window's length bound.
    pub out_of_window: u64,
    /// The quantified domain was sampled rather than enumerated in full.
    pub truncated: bool,
}

/// Outcome of one named check over a fragment.
///
/// `status` is `fail` iff at least one violation was found, `skipped` iff
/// none was found but some case could not be decided within budget, and
/// `pass` otherwise. Domain sampling is reported in `stats.truncated`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub status: Status,
    pub counterexamples: Vec<Counterexample>,
    pub cases: u64,
    pub stats: CheckStats,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    /// The reports folded into one under `name`.
    pub fn combine(name: impl Into<String>, parts: impl IntoIterator<Item = CheckReport>) -> CheckReport {
        let mut t = Tally::new();
        for r in parts {
            t.merge_report(r);
        }
        t.finish(name)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Whether some counterexample cites `condition` (prefix match).
    pub fn cites(&self, condition: &str) -> bool {
        self.counterexamples.iter().any(|c| c.condition.starts_with(condition))
    }
}

/// Accumulator for a check. Tallies from independent parts of a domain are
/// merged in a fixed order, so reports do not depend on scheduling.
#[derive(Clone, Debug, Default)]
pub struct Tally {
    cases: u64,
    stats: CheckStats,
    counterexamples: Vec<Counterexample>,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn case(&mut self) {
        self.cases += 1;
    }

    pub fn skip(&mut self) {
        self.stats.skipped += 1;
    }

    pub fn out_of_window(&mut self) {
        self.stats.out_of_window += 1;
    }

    pub fn truncated(&mut self) {
        self.stats.truncated = true;
    }

    pub fn mark_truncated(&mut self, truncated: bool) {
        self.stats.truncated |= truncated;
    }

    pub fn fail(
        &mut self,
        condition: impl Into<String>,
        inputs: Vec<String>,
        expected: impl Into<String>,
        actual: impl Into<String>,
    ) {
        self.stats.failures += 1;
        self.keep(Counterexample {
            condition: condition.into(),
            inputs,
            expected: expected.into(),
            actual: actual.into(),
        });
    }

    fn keep(&mut self, c: Counterexample) {
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES
            || self.counterexamples.iter().all(|k| k.condition != c.condition)
        {
            self.counterexamples.push(c);
        }
    }

    /// Counts a case and records a failure unless `ok`.
    pub fn expect(
        &mut self,
        ok: bool,
        condition: &str,
        inputs: impl FnOnce() -> Vec<String>,
        expected: impl FnOnce() -> String,
        actual: impl FnOnce() -> String,
    ) {
        self.case();
        if !ok {
            self.fail(condition, inputs(), expected(), actual());
        }
    }

    /// Unwraps an operation result. Out-of-window results are counted as
    /// such, unsupported operations make the case undecidable, and any other
    /// error is a violation of `condition` (the operation should be defined).
    pub fn absorb<T>(
        &mut self,
        r: Result<T, KernelError>,
        condition: &str,
        inputs: impl FnOnce() -> Vec<String>,
    ) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(KernelError::OutOfWindow { .. }) => {
                self.out_of_window();
                None
            }
            Err(KernelError::Unsupported(_)) => {
                self.skip();
                None
            }
            Err(e) => {
                self.case();
                self.fail(condition, inputs(), "defined", e.to_string());
                None
            }
        }
    }

    pub fn failures(&self) -> u64 {
        self.stats.failures
    }

    pub fn merge(&mut self, other: Tally) {
        self.cases += other.cases;
        self.stats.failures += other.stats.failures;
        self.stats.skipped += other.stats.skipped;
        self.stats.out_of_window += other.stats.out_of_window;
        self.stats.truncated |= other.stats.truncated;
        for c in other.counterexamples {
            self.keep(c);
        }
    }

    /// Folds a finished report back in.
    pub fn merge_report(&mut self, r: CheckReport) {
        self.merge(Tally { cases: r.cases, stats: r.stats, counterexamples: r.counterexamples });
    }

    pub fn merge_all(parts: impl IntoIterator<Item = Tally>) -> Tally {
        let mut acc = Tally::new();
        for t in parts {
            acc.merge(t);
        }
        acc
    }

    pub fn finish(self, name: impl Into<String>) -> CheckReport {
        let status = if self.stats.failures > 0 {
            Status::Fail
        } else if self.stats.skipped > 0 {
            Status::Skipped
        } else {
            Status::Pass
        };
        CheckReport {
            name: name.into(),
            status,
            counterexamples: self.counterexamples,
            cases: self.cases,
            stats: self.stats,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_counterexamples() {
        let mut t = Tally::new();
        t.case();
        assert_eq!(t.clone().finish("x").status, Status::Pass);
        t.skip();
        assert_eq!(t.clone().finish("x").status, Status::Skipped);
        t.fail("c", vec![], "a", "b");
        let r = t.finish("x");
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.counterexamples.len(), 1);
    }

    #[test]
    fn counterexamples_are_capped_but_counted() {
        let mut t = Tally::new();
        for _ in 0..(MAX_COUNTEREXAMPLES + 5) {
            t.fail("c", vec![], "", "");
        }
        t.fail("late", vec![], "", "");
        let r = t.finish("x");
        assert_eq!(r.counterexamples.len(), MAX_COUNTEREXAMPLES + 1);
        assert_eq!(r.stats.failures, (MAX_COUNTEREXAMPLES + 6) as u64);
        assert!(r.cites("late"));
    }
}
