//! Verdicts and numeric witnesses produced by every check.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Undetermined => "undetermined",
        })
    }
}

/// One labeled vector of a witness, e.g. `("p", [1.0, 0.0])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub label: String,
    pub values: Vec<f64>,
}

/// The inputs achieving the worst margin of a check, in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Witness {
    pub entries: Vec<WitnessEntry>,
}

impl Witness {
    pub fn new() -> Self {
        Witness::default()
    }

    pub fn with(mut self, label: impl Into<String>, values: impl Into<Vec<f64>>) -> Self {
        self.push(label, values);
        self
    }

    pub fn push(&mut self, label: impl Into<String>, values: impl Into<Vec<f64>>) {
        self.entries.push(WitnessEntry {
            label: label.into(),
            values: values.into(),
        });
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.values.as_slice())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Outcome of one checked condition.
///
/// `worst_margin` is the largest violation amount observed, in the units of the
/// condition (for an inequality `lhs <= rhs` it is `max(lhs - rhs)`, for an
/// identity it is `max |lhs - rhs|`). Non-positive values mean every sample held
/// with slack. The verdict is `Fail` exactly when the witness exceeds `tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub condition: String,
    pub verdict: Verdict,
    pub samples: usize,
    pub worst_margin: f64,
    pub tolerance: f64,
    pub witness: Witness,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn undetermined(condition: impl Into<String>, note: impl Into<String>) -> Self {
        ValidationReport {
            condition: condition.into(),
            verdict: Verdict::Undetermined,
            samples: 0,
            worst_margin: 0.0,
            tolerance: 0.0,
            witness: Witness::new(),
            notes: vec![note.into()],
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {:<12} samples={:<8} margin={:<12.4e} tol={:.1e}",
            self.condition, self.verdict, self.samples, self.worst_margin, self.tolerance
        )
    }
}

/// Running reduction that keeps the first sample attaining the worst margin.
///
/// A later sample replaces the current witness only when it is worse by more
/// than a relative `1e-12`, so exact witnesses placed ahead of random samples
/// are not displaced by rounding noise.
pub(crate) struct WorstTracker {
    condition: String,
    tolerance: f64,
    samples: usize,
    worst: f64,
    witness: Witness,
    violated: bool,
}

impl WorstTracker {
    pub(crate) fn new(condition: impl Into<String>, tolerance: f64) -> Self {
        WorstTracker {
            condition: condition.into(),
            tolerance,
            samples: 0,
            worst: f64::NEG_INFINITY,
            witness: Witness::new(),
            violated: false,
        }
    }

    /// Records one sample. `violated` decides the verdict for this sample;
    /// `margin` orders samples for witness selection.
    pub(crate) fn observe_with(
        &mut self,
        margin: f64,
        violated: bool,
        witness: impl FnOnce() -> Witness,
    ) {
        self.samples += 1;
        let margin = if margin.is_nan() {
            f64::INFINITY
        } else {
            margin
        };
        let better = if self.worst == f64::NEG_INFINITY {
            true
        } else {
            margin > self.worst + 1e-12 * self.worst.abs().max(1.0)
        };
        // Once a violation is on record only a violating sample may replace it.
        let replace = (violated && !self.violated) || (violated == self.violated && better);
        if replace {
            self.worst = margin;
            self.witness = witness();
        }
        self.violated |= violated;
    }

    /// Records one sample, violated when `margin > tolerance`.
    pub(crate) fn observe(&mut self, margin: f64, witness: impl FnOnce() -> Witness) {
        let violated = margin.is_nan() || margin > self.tolerance;
        self.observe_with(margin, violated, witness);
    }

    /// Records one sample against its own (scale-dependent) tolerance.
    pub(crate) fn observe_scaled(
        &mut self,
        margin: f64,
        tolerance: f64,
        witness: impl FnOnce() -> Witness,
    ) {
        let violated = margin.is_nan() || margin > tolerance;
        self.observe_with(margin, violated, witness);
    }

    pub(crate) fn finish(self) -> ValidationReport {
        let verdict = if self.samples == 0 {
            Verdict::Undetermined
        } else if self.violated {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        ValidationReport {
            condition: self.condition,
            verdict,
            samples: self.samples,
            worst_margin: if self.samples == 0 { 0.0 } else { self.worst },
            tolerance: self.tolerance,
            witness: self.witness,
            notes: Vec::new(),
        }
    }
}
