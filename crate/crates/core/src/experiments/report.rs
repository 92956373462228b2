use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One estimated inequality or identity `lhs ≤ rhs` (or `lhs ≈ rhs`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseResult {
    pub name: String,
    pub lhs: f64,
    #[serde(rename = "lhsSE")]
    pub lhs_se: f64,
    pub rhs: f64,
    #[serde(rename = "rhsSE")]
    pub rhs_se: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    #[serde(rename = "marginSE")]
    pub margin_se: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    /// Auxiliary quantities (distances, bound factors, closed forms).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl CaseResult {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            lhs: 0.0,
            lhs_se: 0.0,
            rhs: 0.0,
            rhs_se: 0.0,
            margin: 0.0,
            margin_se: 0.0,
            verdict: Verdict::Inconclusive,
            flags: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn detail(&mut self, key: &str, value: f64) {
        self.details.insert(key.into(), value);
    }

    /// One-sided test of `lhs ≤ rhs`: inconclusive when the margin's standard
    /// error exceeds a tenth of the larger side, else pass iff `margin ≥ −3 SE`.
    pub fn one_sided(&mut self, paths: usize) {
        self.margin = self.rhs - self.lhs;
        let scale = self.lhs.abs().max(self.rhs.abs());
        self.verdict = if paths < super::MIN_VERDICT_PATHS {
            self.flags.push("tooFewPaths".into());
            Verdict::Inconclusive
        } else if !self.margin_se.is_finite() || self.margin_se > 0.1 * scale {
            Verdict::Inconclusive
        } else if self.margin >= -3.0 * self.margin_se {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }

    /// Two-sided test of `lhs = rhs`: pass iff `|margin| ≤ 3 SE`.
    pub fn two_sided(&mut self, paths: usize) {
        self.margin = self.rhs - self.lhs;
        self.verdict = if paths < super::MIN_VERDICT_PATHS {
            self.flags.push("tooFewPaths".into());
            Verdict::Inconclusive
        } else if !self.margin_se.is_finite() {
            Verdict::Inconclusive
        } else if self.margin.abs() <= 3.0 * self.margin_se {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }

    /// Downgrades a pass to a fail.
    pub fn fail_with(&mut self, flag: &str) {
        self.flags.push(flag.into());
        self.verdict = Verdict::Fail;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentReport {
    pub experiment: String,
    pub algebra_label: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// Ricci lower bound used in the bounds, when relevant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    pub cases: Vec<CaseResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
    /// Seconds since the Unix epoch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, algebra_label: &str, config: &ExperimentConfig) -> Self {
        Self {
            experiment: experiment.into(),
            algebra_label: algebra_label.into(),
            config_hash: config.hash(),
            config: config.clone(),
            k: None,
            cases: Vec::new(),
            runtime_seconds: None,
            timestamp: None,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.cases.iter().filter(|c| c.verdict == v).count()
    }

    /// 0 if every case passes, 2 on any failure, 3 on inconclusive cases without failures.
    pub fn exit_code(&self) -> i32 {
        if self.count(Verdict::Fail) > 0 {
            2
        } else if self.count(Verdict::Inconclusive) > 0 {
            3
        } else {
            0
        }
    }

    pub fn case(&self, name: &str) -> Option<&CaseResult> {
        self.cases.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON without the run time and timestamp, identical across reruns.
    pub fn reproducible_json(&self) -> String {
        let mut r = self.clone();
        r.runtime_seconds = None;
        r.timestamp = None;
        r.to_json()
    }

    /// One row per case; the config hash is the first column.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("configHash,experiment,name,lhs,lhsSE,rhs,rhsSE,margin,marginSE,verdict,flags\n");
        for c in &self.cases {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                self.config_hash,
                self.experiment,
                c.name,
                c.lhs,
                c.lhs_se,
                c.rhs,
                c.rhs_se,
                c.margin,
                c.margin_se,
                c.verdict,
                c.flags.join(";")
            );
        }
        out
    }

    /// `name verdict lhs rhs margin SE` lines.
    pub fn summary_lines(&self) -> Vec<String> {
        self.cases
            .iter()
            .map(|c| {
                format!(
                    "{:<12} {:<40} lhs={:.6e} rhs={:.6e} margin={:.3e} se={:.3e}{}",
                    c.verdict.to_string(),
                    c.name,
                    c.lhs,
                    c.rhs,
                    c.margin,
                    c.margin_se,
                    if c.flags.is_empty() {
                        String::new()
                    } else {
                        format!(" [{}]", c.flags.join(","))
                    }
                )
            })
            .collect()
    }
}

/// Mean and standard error of the mean.
pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let mut c = CaseResult::new("a");
        c.lhs = 1.0;
        c.rhs = 0.99;
        c.margin_se = 0.005;
        c.one_sided(2000);
        assert_eq!(c.verdict, Verdict::Pass);
        c.rhs = 0.9;
        c.one_sided(2000);
        assert_eq!(c.verdict, Verdict::Fail);
        c.margin_se = 0.5;
        c.one_sided(2000);
        assert_eq!(c.verdict, Verdict::Inconclusive);
        c.margin_se = 0.0;
        c.rhs = 1.0;
        c.one_sided(10);
        assert_eq!(c.verdict, Verdict::Inconclusive);

        let mut z = CaseResult::new("zero");
        z.one_sided(2000);
        assert_eq!(z.verdict, Verdict::Pass);
        z.lhs = 0.01;
        z.margin_se = 0.004;
        z.two_sided(2000);
        assert_eq!(z.verdict, Verdict::Pass);
        z.margin_se = 0.003;
        z.two_sided(2000);
        assert_eq!(z.verdict, Verdict::Fail);
    }

    #[test]
    fn exit_codes_and_csv() {
        let cfg = ExperimentConfig::default();
        let mut r = ExperimentReport::new("moments", "x", &cfg);
        let mut c = CaseResult::new("a");
        c.verdict = Verdict::Pass;
        r.cases.push(c.clone());
        assert_eq!(r.exit_code(), 0);
        c.verdict = Verdict::Inconclusive;
        r.cases.push(c.clone());
        assert_eq!(r.exit_code(), 3);
        c.verdict = Verdict::Fail;
        r.cases.push(c);
        assert_eq!(r.exit_code(), 2);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(1).unwrap().starts_with(&r.config_hash));
        r.runtime_seconds = Some(1.5);
        r.timestamp = Some(7);
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(!r.reproducible_json().contains("runtimeSeconds"));
    }

    #[test]
    fn standard_error() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
