use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

/// 1-based ranks with tied values sharing the average of their positions.
pub fn average_ranks(values: &[f64], direction: Direction) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let o = values[a].total_cmp(&values[b]);
        match direction {
            Direction::LowerIsBetter => o,
            Direction::HigherIsBetter => o.reverse(),
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end (0-based) share rank mean(start+1..=end)
        let shared = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = shared;
        }
        start = end;
    }
    ranks
}

/// Mean rank of each method over replications. `scores` maps replication →
/// method → metric value; every method must appear in every replication.
pub fn rank_methods(
    scores: &BTreeMap<String, BTreeMap<String, f64>>,
    methods: &[String],
    direction: Direction,
) -> Result<BTreeMap<String, f64>> {
    if methods.is_empty() {
        return Err(Error::Config("no methods to rank".into()));
    }
    if scores.is_empty() {
        return Err(Error::Config("no replications to rank over".into()));
    }
    let mut totals = vec![0.0; methods.len()];
    for (replication, row) in scores {
        let values = methods
            .iter()
            .map(|m| match row.get(m) {
                Some(v) if v.is_finite() => Ok(*v),
                Some(v) => Err(Error::Config(format!(
                    "method {m} has non-finite value {v} on replication {replication}"
                ))),
                None => Err(Error::Config(format!(
                    "method {m} has no result on replication {replication}"
                ))),
            })
            .collect::<Result<Vec<f64>>>()?;
        for (t, r) in totals.iter_mut().zip(average_ranks(&values, direction)) {
            *t += r;
        }
    }
    let n = scores.len() as f64;
    Ok(methods
        .iter()
        .cloned()
        .zip(totals.into_iter().map(|t| t / n))
        .collect())
}
