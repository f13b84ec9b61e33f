use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autoencoder::HistoryRecord;
use crate::error::{Error, Result};
use crate::evaluation::metrics::LatentMetrics;
use crate::evaluation::ranking::{rank_methods, Direction};

/// MSE is `rec_error / (n·D)` so values compare across sample sizes.
/// Method name used for [`crate::baselines::identity_baseline`] rows.
pub const BASELINE_METHOD: &str = "baseline";

pub const REPORT_HEADER: &str =
    "method,dataset,group,seed,max_corr,dcor,mse_per_entry,unmatched_max_corr";

/// One evaluated (method, dataset, seed) triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub dataset: String,
    /// Rows in the same group are replications of one experiment, e.g.
    /// `image-linear-d5`.
    pub group: String,
    pub seed: u64,
    pub max_corr: Option<f64>,
    pub dcor: f64,
    pub mse: Option<f64>,
    pub unmatched_max_corr: Option<f64>,
}

impl ReportRow {
    pub fn new(method: &str, dataset: &str, group: &str, seed: u64, m: &LatentMetrics) -> Self {
        Self {
            method: method.into(),
            dataset: dataset.into(),
            group: group.into(),
            seed,
            max_corr: m.max_corr,
            dcor: m.dcor,
            mse: m.mse,
            unmatched_max_corr: m.unmatched_max_corr,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn check_field(name: &str, context: &str) -> Result<()> {
    if name.is_empty() || name.contains([',', '\n', '\r', '"']) {
        return Err(Error::Config(format!("{context} {name:?} cannot be written to a CSV report")));
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut s = String::from(REPORT_HEADER);
        s.push('\n');
        for r in &self.rows {
            check_field(&r.method, "method")?;
            check_field(&r.dataset, "dataset")?;
            check_field(&r.group, "group")?;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.method,
                r.dataset,
                r.group,
                r.seed,
                opt(r.max_corr),
                r.dcor,
                opt(r.mse),
                opt(r.unmatched_max_corr)
            );
        }
        Ok(s)
    }

    pub fn from_csv(text: &str, context: &str) -> Result<Self> {
        let parse_err = |line: usize, reason: String| Error::Parse {
            context: format!("{context}:{line}"),
            reason,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == REPORT_HEADER => {}
            Some((i, h)) => return Err(parse_err(i + 1, format!("unexpected header {h:?}"))),
            None => return Err(parse_err(1, "empty report".into())),
        }
        let num = |line: usize, field: &str| -> Result<f64> {
            field
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("{field:?}: {e}")))
        };
        let opt_num = |line: usize, field: &str| -> Result<Option<f64>> {
            if field.trim().is_empty() {
                Ok(None)
            } else {
                num(line, field).map(Some)
            }
        };
        let mut rows = Vec::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(parse_err(i + 1, format!("expected 8 fields, found {}", f.len())));
            }
            rows.push(ReportRow {
                method: f[0].trim().into(),
                dataset: f[1].trim().into(),
                group: f[2].trim().into(),
                seed: f[3]
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(i + 1, format!("seed {:?}: {e}", f[3])))?,
                max_corr: opt_num(i + 1, f[4])?,
                dcor: num(i + 1, f[5])?,
                mse: opt_num(i + 1, f[6])?,
                unmatched_max_corr: opt_num(i + 1, f[7])?,
            });
        }
        Ok(Self { rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    pub fn merge(reports: impl IntoIterator<Item = EvalReport>) -> Self {
        Self {
            rows: reports.into_iter().flat_map(|r| r.rows).collect(),
        }
    }

    pub fn methods(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        self.rows
            .iter()
            .filter(|r| seen.insert(r.method.clone()))
            .map(|r| r.method.clone())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub runs: usize,
    pub mean_max_corr: Option<f64>,
    pub mean_dcor: f64,
    pub mean_mse: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub replications: usize,
    pub methods: BTreeMap<String, MethodSummary>,
    /// Present when every method reports a correlation on every replication.
    pub rank_max_corr: Option<BTreeMap<String, f64>>,
    pub rank_dcor: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mse_normalization: String,
    pub groups: BTreeMap<String, GroupSummary>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_opt(v: &[Option<f64>]) -> Option<f64> {
    v.iter().copied().collect::<Option<Vec<f64>>>().map(|x| mean(&x))
}

/// Aggregates a report per group. Seeds of one method on one dataset are
/// averaged before ranking, so each dataset counts as one replication.
/// `required` lists methods that must be present in every group.
pub fn summarize(report: &EvalReport, required: &[String]) -> Result<Summary> {
    if report.rows.is_empty() {
        return Err(Error::Config("report has no rows".into()));
    }
    let mut by_group: BTreeMap<&str, Vec<&ReportRow>> = BTreeMap::new();
    for r in &report.rows {
        by_group.entry(r.group.as_str()).or_default().push(r);
    }
    let mut groups = BTreeMap::new();
    for (group, rows) in by_group {
        let mut methods: Vec<String> = Vec::new();
        for r in &rows {
            if !methods.contains(&r.method) {
                methods.push(r.method.clone());
            }
        }
        for m in required {
            if !methods.contains(m) {
                return Err(Error::Config(format!("method {m} has no results in group {group}")));
            }
        }
        // (dataset, method) -> rows over seeds
        let mut cells: BTreeMap<(&str, &str), Vec<&ReportRow>> = BTreeMap::new();
        for r in &rows {
            cells.entry((r.dataset.as_str(), r.method.as_str())).or_default().push(r);
        }
        let mut corr: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        let mut dcor: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        let mut corr_complete = true;
        for ((dataset, method), cell) in &cells {
            let d: Vec<f64> = cell.iter().map(|r| r.dcor).collect();
            dcor.entry(dataset.to_string()).or_default().insert(method.to_string(), mean(&d));
            match mean_opt(&cell.iter().map(|r| r.max_corr).collect::<Vec<_>>()) {
                Some(c) => {
                    corr.entry(dataset.to_string()).or_default().insert(method.to_string(), c);
                }
                None => corr_complete = false,
            }
        }
        let rank_dcor = rank_methods(&dcor, &methods, Direction::LowerIsBetter)
            .map_err(|e| Error::Config(format!("group {group}: {e}")))?;
        let rank_max_corr = if corr_complete {
            Some(
                rank_methods(&corr, &methods, Direction::HigherIsBetter)
                    .map_err(|e| Error::Config(format!("group {group}: {e}")))?,
            )
        } else {
            None
        };
        let summaries = methods
            .iter()
            .map(|m| {
                let mine: Vec<&&ReportRow> = rows.iter().filter(|r| &r.method == m).collect();
                let s = MethodSummary {
                    runs: mine.len(),
                    mean_max_corr: mean_opt(&mine.iter().map(|r| r.max_corr).collect::<Vec<_>>()),
                    mean_dcor: mean(&mine.iter().map(|r| r.dcor).collect::<Vec<_>>()),
                    mean_mse: mean_opt(&mine.iter().map(|r| r.mse).collect::<Vec<_>>()),
                };
                (m.clone(), s)
            })
            .collect();
        groups.insert(
            group.to_string(),
            GroupSummary {
                replications: dcor.len(),
                methods: summaries,
                rank_max_corr,
                rank_dcor,
            },
        );
    }
    Ok(Summary {
        mse_normalization: "rec_error / (n * D)".into(),
        groups,
    })
}

impl Summary {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Plain-text tables, one per group.
    pub fn render_tables(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        let mut out = String::new();
        for (group, g) in &self.groups {
            let _ = writeln!(out, "== {group} ({} replications)", g.replications);
            let _ = writeln!(
                out,
                "{:<16} {:>9} {:>9} {:>9} {:>11} {:>9}",
                "method", "max_corr", "dcor", "mse", "rank_corr", "rank_dcor"
            );
            for (m, s) in &g.methods {
                let _ = writeln!(
                    out,
                    "{:<16} {:>9} {:>9} {:>9} {:>11} {:>9}",
                    m,
                    cell(s.mean_max_corr),
                    cell(Some(s.mean_dcor)),
                    cell(s.mean_mse),
                    cell(g.rank_max_corr.as_ref().map(|r| r[m])),
                    cell(Some(g.rank_dcor[m])),
                );
            }
            out.push('\n');
        }
        if self.groups.values().any(|g| g.methods.contains_key(BASELINE_METHOD)) {
            out.push_str("baseline: first d standardized observation columns taken as the recovered sources\n");
        }
        out
    }
}

/// Long-format training curves: `run,iteration,metric,value`.
pub fn training_curves_csv(runs: &[(&str, &[HistoryRecord])]) -> String {
    let mut s = String::from("run,iteration,metric,value\n");
    for (run, history) in runs {
        for h in *history {
            let mut put = |metric: &str, v: f64| {
                let _ = writeln!(s, "{run},{},{metric},{v}", h.iteration);
            };
            put("cost", h.cost);
            put("indep", h.indep);
            put("rec", h.rec);
            put("val_cost", h.val_cost);
            if let Some(c) = h.val_maxcorr {
                put("val_max_corr", c);
            }
            put("val_dcor", h.val_dcor);
            put("val_mse", h.val_mse);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, dataset: &str, seed: u64, c: Option<f64>, d: f64) -> ReportRow {
        ReportRow {
            method: method.into(),
            dataset: dataset.into(),
            group: "g".into(),
            seed,
            max_corr: c,
            dcor: d,
            mse: None,
            unmatched_max_corr: c,
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = EvalReport {
            rows: vec![
                row("cw", "d0", 1, Some(0.1 + 0.2), 1e-17),
                row("fastica", "d0", 0, None, 0.5),
            ],
        };
        let back = EvalReport::from_csv(&r.to_csv().unwrap(), "t").unwrap();
        assert_eq!(back, r);
        assert!(EvalReport::from_csv("a,b\n", "t").is_err());
    }

    #[test]
    fn rejects_unwritable_names() {
        let r = EvalReport {
            rows: vec![row("a,b", "d", 0, None, 0.0)],
        };
        assert!(r.to_csv().is_err());
    }

    #[test]
    fn summary_averages_seeds_then_ranks() {
        let r = EvalReport {
            rows: vec![
                row("a", "d0", 0, Some(0.9), 0.1),
                row("a", "d0", 1, Some(0.5), 0.3),
                row("b", "d0", 0, Some(0.8), 0.1),
                row("a", "d1", 0, Some(0.2), 0.5),
                row("b", "d1", 0, Some(0.3), 0.4),
            ],
        };
        let s = summarize(&r, &[]).unwrap();
        let g = &s.groups["g"];
        assert_eq!(g.replications, 2);
        // d0: a=0.7 < b=0.8 ; d1: a < b
        let rc = g.rank_max_corr.as_ref().unwrap();
        assert_eq!((rc["a"], rc["b"]), (2.0, 1.0));
        // d0 dcor: a=0.2, b=0.1 ; d1: a=0.5, b=0.4
        assert_eq!((g.rank_dcor["a"], g.rank_dcor["b"]), (2.0, 1.0));
        assert_eq!(g.methods["a"].runs, 3);
        assert!(summarize(&r, &["c".to_string()]).is_err());
        assert!(s.render_tables().contains("== g"));
    }

    #[test]
    fn missing_replication_is_an_error() {
        let r = EvalReport {
            rows: vec![
                row("a", "d0", 0, Some(0.9), 0.1),
                row("b", "d0", 0, Some(0.8), 0.1),
                row("a", "d1", 0, Some(0.2), 0.5),
            ],
        };
        let msg = summarize(&r, &[]).unwrap_err().to_string();
        assert!(msg.contains("b") && msg.contains("d1"), "{msg}");
    }
}
