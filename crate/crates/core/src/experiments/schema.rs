//! Column contracts of the CSV files that downstream renderers read.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsvKind {
    /// `sweep.csv`, `similarity.csv`, `bp.csv`
    Sweep,
    /// `trace.csv`
    Trace,
    /// `accuracy.csv`
    Accuracy,
}

impl CsvKind {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            CsvKind::Sweep => &["n", "point_estimate", "std_error", "n_x", "n_theta", "seed"],
            CsvKind::Trace => &["step", "risk", "grad_inf_norm"],
            CsvKind::Accuracy => &["model", "train_accuracy", "test_accuracy"],
        }
    }

    pub fn header(self) -> String {
        self.columns().join(",")
    }
}

/// Checks that the header of `text` carries every column of `kind`; the
/// error lists the missing and unexpected columns.
pub fn validate_csv(kind: CsvKind, text: &str) -> Result<()> {
    let header: Vec<&str> = text.lines().next().unwrap_or("").split(',').map(str::trim).collect();
    let missing: Vec<&str> = kind.columns().iter().copied().filter(|c| !header.contains(c)).collect();
    if missing.is_empty() {
        return Ok(());
    }
    let extra: Vec<&str> = header
        .iter()
        .copied()
        .filter(|c| !c.is_empty() && !kind.columns().contains(c))
        .collect();
    Err(Error::Validation(format!("{kind:?} csv missing {missing:?}, unexpected {extra:?}")))
}
