//! Score aggregation and report rendering.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Per-example scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleScore {
    pub id: String,
    pub em: u8,
    pub f1: f64,
}

/// Aggregated metrics over a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n: usize,
    pub em_mean: f64,
    pub f1_mean: f64,
    pub per_example: Vec<ExampleScore>,
}

/// Mean in [0,1] to a percentage with one decimal, rounding half up.
pub fn percent_one_decimal(mean: f64) -> f64 {
    (mean * 1000.0 + 0.5).floor() / 10.0
}

pub fn aggregate(per_example: Vec<ExampleScore>) -> Result<Report> {
    if per_example.is_empty() {
        return Err(Error::EmptyResults);
    }
    let n = per_example.len();
    let em_mean = per_example.iter().map(|s| s.em as f64).sum::<f64>() / n as f64;
    let f1_mean = per_example.iter().map(|s| s.f1).sum::<f64>() / n as f64;
    Ok(Report {
        n,
        em_mean,
        f1_mean,
        per_example,
    })
}

impl Report {
    pub fn em_percent(&self) -> f64 {
        percent_one_decimal(self.em_mean)
    }

    pub fn f1_percent(&self) -> f64 {
        percent_one_decimal(self.f1_mean)
    }

    /// Aligned text table with the aggregate row.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<10} {:>8} {:>8}\n", "examples", "f1", "em"));
        out.push_str(&format!(
            "{:<10} {:>8.1} {:>8.1}\n",
            self.n,
            self.f1_percent(),
            self.em_percent()
        ));
        out
    }

    /// Machine-readable table: one row per example plus an aggregate row.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from("id\tem\tf1\n");
        for score in &self.per_example {
            out.push_str(&format!("{}\t{}\t{:.6}\n", score.id, score.em, score.f1));
        }
        out.push_str(&format!(
            "__aggregate__\t{:.1}\t{:.1}\n",
            self.em_percent(),
            self.f1_percent()
        ));
        out
    }
}
