use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::SweepConfig;
use super::fit::{fit_rate, METRIC_FLOOR};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub metric: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
}

/// A metric whose every value is below this is exact up to rounding; its slope
/// is noise and the fit passes.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

/// A fitted rate against its prediction. Passing means
/// `slope <= predicted + tolerance`; a metric that reaches the floor before
/// three levels have been fitted, or stays below [`ROUNDOFF_FLOOR`], converged
/// faster than any rate and passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub metric: String,
    pub slope: Option<f64>,
    pub stderr: Option<f64>,
    pub points_used: usize,
    pub floor_reached: bool,
    pub predicted: f64,
    pub provenance: String,
    pub tolerance: f64,
    pub pass: bool,
}

/// A scalar compared against a limit: passes when `value < limit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            pass: value < limit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NoOp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config_echo: SweepConfig,
    pub rows: Vec<Row>,
    pub fits: Vec<Fit>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
}

/// Fits one metric's rows; `rows` must be sorted by `N`.
pub fn fit_metric(
    metric: &str,
    rows: &[(usize, f64)],
    predicted: f64,
    tolerance: f64,
    provenance: &str,
) -> Fit {
    let roundoff = !rows.is_empty() && rows.iter().all(|r| r.1 <= ROUNDOFF_FLOOR);
    let (slope, stderr, points_used, floor_reached, pass) = match fit_rate(rows) {
        Ok(f) => (
            Some(f.slope),
            Some(f.stderr),
            f.points_used,
            f.floor_reached || roundoff,
            roundoff || f.slope <= predicted + tolerance,
        ),
        Err(_) => {
            let used = rows.iter().take_while(|r| r.1 > METRIC_FLOOR).count();
            let floor = used < rows.len();
            (None, None, used, floor, floor)
        }
    };
    Fit {
        metric: metric.into(),
        slope,
        stderr,
        points_used,
        floor_reached,
        predicted,
        provenance: provenance.into(),
        tolerance,
        pass,
    }
}

impl ConvergenceReport {
    pub fn new(
        config_echo: SweepConfig,
        mut rows: Vec<Row>,
        fits: Vec<Fit>,
        checks: Vec<Check>,
    ) -> Self {
        rows.sort_by(|a, b| a.metric.cmp(&b.metric).then(a.n.cmp(&b.n)));
        let verdict = if rows.is_empty() && fits.is_empty() && checks.is_empty() {
            Verdict::NoOp
        } else if fits.iter().all(|f| f.pass) && checks.iter().all(|c| c.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            config_echo,
            rows,
            fits,
            checks,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn fit(&self, metric: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.metric == metric)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Rows of one metric in `N` order.
    pub fn series(&self, metric: &str) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| (r.n, r.value))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,N,value\n");
        for r in &self.rows {
            writeln!(out, "{},{},{:.16e}", r.metric, r.n, r.value).expect("string write");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per fit and check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for f in &self.fits {
            let slope = f
                .slope
                .map(|s| format!("{s:+.3} ± {:.3}", f.stderr.unwrap_or(0.0)))
                .unwrap_or_else(|| "floor".into());
            writeln!(
                out,
                "{} {}: slope {slope} (predicted {:+.3}, tolerance {:.2})",
                if f.pass { "PASS" } else { "FAIL" },
                f.metric,
                f.predicted,
                f.tolerance
            )
            .expect("string write");
        }
        for c in &self.checks {
            writeln!(
                out,
                "{} {}: {:.3e} < {:.3e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.limit
            )
            .expect("string write");
        }
        out
    }
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir`, creating it if needed.
pub fn emit_report(
    report: &ConvergenceReport,
    dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    std::fs::write(&csv, report.to_csv()).map_err(Error::Io)?;
    std::fs::write(&json, report.to_json()).map_err(Error::Io)?;
    Ok((csv, json))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Experiment;

    fn rows(f: impl Fn(f64) -> f64) -> Vec<(usize, f64)> {
        [32usize, 64, 128, 256]
            .iter()
            .map(|&n| (n, f(n as f64)))
            .collect()
    }

    #[test]
    fn empty_report_is_no_op() {
        let r = ConvergenceReport::new(SweepConfig::new(Experiment::Trace), vec![], vec![], vec![]);
        assert_eq!(r.verdict, Verdict::NoOp);
        assert_eq!(r.to_csv(), "metric,N,value\n");
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["verdict"], "no-op");
        assert_eq!(v["rows"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn fits_and_floor() {
        let f = fit_metric("a", &rows(|n| n.powi(-2)), -2.0, 0.3, "");
        assert!(f.pass && (f.slope.unwrap() + 2.0).abs() < 1e-12);
        let f = fit_metric("a", &rows(|n| n.powi(-1)), -2.0, 0.3, "");
        assert!(!f.pass);
        let f = fit_metric("a", &rows(|_| 0.0), -2.0, 0.3, "");
        assert!(f.pass && f.floor_reached && f.slope.is_none());
        let f = fit_metric("a", &rows(|n| 1e-13 * n), -2.0, 0.3, "");
        assert!(f.pass && f.floor_reached && f.slope.unwrap() > 0.0);
    }

    #[test]
    fn rows_are_sorted_and_formatted() {
        let rs = vec![
            Row {
                metric: "b".into(),
                n: 64,
                value: 0.5,
            },
            Row {
                metric: "a".into(),
                n: 64,
                value: 1.0 / 3.0,
            },
            Row {
                metric: "a".into(),
                n: 32,
                value: 1.0,
            },
        ];
        let r = ConvergenceReport::new(SweepConfig::new(Experiment::Trace), rs, vec![], vec![]);
        assert_eq!(
            r.to_csv(),
            "metric,N,value\na,32,1.0000000000000000e0\na,64,3.3333333333333331e-1\nb,64,5.0000000000000000e-1\n"
        );
        assert_eq!(r.series("a"), vec![(32, 1.0), (64, 1.0 / 3.0)]);
    }
}
