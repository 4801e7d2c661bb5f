//! Report types shared by every estimator.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

impl Verdict {
    pub fn from_pass(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::ReportOnly => "report-only",
        }
    }

    /// Only an explicit failure counts against the exit status.
    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::Fail)
    }
}

/// One estimated quantity, usually one value of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub n: Option<usize>,
    pub label: Option<String>,
    pub value: f64,
    pub se: f64,
    pub ensemble: usize,
}

impl ReportEntry {
    pub fn new(n: Option<usize>, label: impl Into<Option<String>>, value: f64, se: f64, ensemble: usize) -> Self {
        ReportEntry {
            n,
            label: label.into(),
            value,
            se,
            ensemble,
        }
    }

    /// Deterministic quantity: no standard error, ensemble of one.
    pub fn exact(label: &str, value: f64) -> Self {
        ReportEntry::new(None, Some(label.to_string()), value, 0.0, 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub key: String,
    pub entries: Vec<ReportEntry>,
    pub verdict: Verdict,
    pub seed: u64,
    pub config_hash: u64,
}

/// JSON-lines row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub key: String,
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    pub value: Option<f64>,
    pub se: Option<f64>,
    pub ensemble: usize,
    pub verdict: Verdict,
    pub config_hash: String,
    pub seed: u64,
}

impl EstimateReport {
    pub fn new(key: impl Into<String>, entries: Vec<ReportEntry>, verdict: Verdict, seed: u64) -> Self {
        EstimateReport {
            key: key.into(),
            entries,
            verdict,
            seed,
            config_hash: 0,
        }
    }

    pub fn passed(&self) -> bool {
        !self.verdict.is_failure()
    }

    pub fn with_hash(mut self, hash: u64) -> Self {
        self.config_hash = hash;
        self
    }

    pub fn entry(&self, label: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.label.as_deref() == Some(label))
    }

    pub fn entry_for_n(&self, n: usize) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.n == Some(n))
    }

    /// One record per entry; an empty report still yields one row so the
    /// verdict is visible. Non-finite numbers are written as null.
    pub fn records(&self) -> Vec<Record> {
        let hash = format!("{:016x}", self.config_hash);
        let finite = |x: f64| x.is_finite().then_some(x);
        if self.entries.is_empty() {
            return vec![Record {
                key: self.key.clone(),
                n: None,
                label: None,
                value: None,
                se: None,
                ensemble: 0,
                verdict: self.verdict,
                config_hash: hash,
                seed: self.seed,
            }];
        }
        self.entries
            .iter()
            .map(|e| Record {
                key: self.key.clone(),
                n: e.n,
                label: e.label.clone(),
                value: finite(e.value),
                se: finite(e.se),
                ensemble: e.ensemble,
                verdict: self.verdict,
                config_hash: hash.clone(),
                seed: self.seed,
            })
            .collect()
    }

    pub fn to_json_lines(&self) -> String {
        self.records()
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }
}

/// Fixed-width summary table, one line per report.
pub fn summary_table(reports: &[EstimateReport]) -> String {
    let width = reports.iter().map(|r| r.key.len()).max().unwrap_or(3).max(3);
    let mut out = format!("{:<width$}  {:>7}  {:<11}  {}\n", "key", "entries", "verdict", "headline");
    for r in reports {
        let headline = r
            .entries
            .last()
            .map(|e| {
                let tag = match (&e.label, e.n) {
                    (Some(l), _) => l.clone(),
                    (None, Some(n)) => format!("n={n}"),
                    (None, None) => String::new(),
                };
                format!("{tag} {:.6e} (se {:.2e})", e.value, e.se)
            })
            .unwrap_or_default();
        out.push_str(&format!(
            "{:<width$}  {:>7}  {:<11}  {}\n",
            r.key,
            r.entries.len(),
            r.verdict.as_str(),
            headline.trim()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_carry_metadata() {
        let r = EstimateReport::new(
            "k",
            vec![
                ReportEntry::new(Some(4), None, 1.5, 0.1, 32),
                ReportEntry::exact("x", f64::INFINITY),
            ],
            Verdict::Pass,
            9,
        )
        .with_hash(0xabc);
        let lines = r.to_json_lines();
        let rows: Vec<Record> = lines.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].config_hash, "0000000000000abc");
        assert_eq!(rows[0].n, Some(4));
        assert_eq!(rows[1].value, None);
        assert!(lines.contains("\"verdict\":\"pass\""));
    }

    #[test]
    fn empty_report_still_emits_a_row() {
        let r = EstimateReport::new("empty", vec![], Verdict::ReportOnly, 0);
        let rows = r.records();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].verdict, Verdict::ReportOnly);
        assert!(r.to_json_lines().contains("report-only"));
        assert!(r.passed());
    }
}
