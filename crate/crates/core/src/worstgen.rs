//! The factorial worst-case family and its benchmark.
//!
//! ```text
//! V_l = ?[rec Z. ?[Z].Z] ... ?[rec Z. ?[Z].Z] X          (l inputs)
//! T_k = rec X. ?[rec Y_{k-1}. V_{k-1}] ... ?[rec Y_0. V_0] X
//! ```
//!
//! Every `T_k` is coinductively equal to `rec X. ?[X].X`, so `T_k <= T_{k+1}`
//! holds, yet the inductive proof of it visits factorially many distinct
//! assumption sets.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inductive::{derive_with, CheckError, CheckReport, DeriveOptions};
use crate::memo::{check_memo_with, MemoOptions};
use crate::oracle::check_oracle;
use crate::syntax::{size, SessionType};

pub fn gen_v(l: usize) -> SessionType {
    (0..l).rev().fold(SessionType::var("X"), |cont, j| {
        let z = format!("Z{j}");
        let fixed = SessionType::rec(&z, SessionType::input(vec![SessionType::var(&z)], SessionType::var(&z)));
        SessionType::input(vec![fixed], cont)
    })
}

/// `T_k`, for `k >= 1`.
pub fn gen_tk(k: usize) -> SessionType {
    assert!(k >= 1, "T_k is defined for k >= 1");
    let chain = (0..k).fold(SessionType::var("X"), |cont, i| {
        let payload = SessionType::rec(&format!("Y{i}"), gen_v(i));
        SessionType::input(vec![payload], cont)
    });
    SessionType::rec("X", chain)
}

/// `size(T_k)` in closed form.
pub fn tk_size(k: usize) -> usize {
    2 + 3 * k + 5 * k * (k - 1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Inductive,
    Memo,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Inductive, Algorithm::Memo, Algorithm::Oracle];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Inductive => "inductive",
            Algorithm::Memo => "memo",
            Algorithm::Oracle => "oracle",
        }
    }

    /// Runs this algorithm on `t <= u`. The oracle ignores `step_limit`.
    pub fn check(
        self,
        t: &SessionType,
        u: &SessionType,
        step_limit: u64,
    ) -> Result<CheckReport, CheckError> {
        match self {
            Algorithm::Inductive => derive_with(
                t,
                u,
                &DeriveOptions {
                    step_limit,
                    ..DeriveOptions::default()
                },
            ),
            Algorithm::Memo => check_memo_with(
                t,
                u,
                &MemoOptions {
                    step_limit,
                    ..MemoOptions::default()
                },
            ),
            Algorithm::Oracle => check_oracle(t, u),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inductive" => Ok(Algorithm::Inductive),
            "memo" => Ok(Algorithm::Memo),
            "oracle" => Ok(Algorithm::Oracle),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// A count, or why there is none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "MeasureRepr", try_from = "MeasureRepr")]
pub enum Measure {
    Count(u64),
    Truncated,
    NotRun,
}

impl Measure {
    pub fn count(self) -> Option<u64> {
        match self {
            Measure::Count(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Count(n) => write!(f, "{n}"),
            Measure::Truncated => f.write_str("truncated"),
            Measure::NotRun => f.write_str("-"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MeasureRepr {
    Count(u64),
    Marker(String),
}

impl From<Measure> for MeasureRepr {
    fn from(m: Measure) -> Self {
        match m {
            Measure::Count(n) => MeasureRepr::Count(n),
            Measure::Truncated => MeasureRepr::Marker("truncated".into()),
            Measure::NotRun => MeasureRepr::Marker("not-run".into()),
        }
    }
}

impl TryFrom<MeasureRepr> for Measure {
    type Error = String;

    fn try_from(r: MeasureRepr) -> Result<Self, Self::Error> {
        match r {
            MeasureRepr::Count(n) => Ok(Measure::Count(n)),
            MeasureRepr::Marker(s) if s == "truncated" => Ok(Measure::Truncated),
            MeasureRepr::Marker(s) if s == "not-run" => Ok(Measure::NotRun),
            MeasureRepr::Marker(s) => Err(format!("unknown measure marker `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub k: usize,
    /// `size(T_k) + size(T_{k+1})`
    pub size_sum: usize,
    pub inductive_nodes: Measure,
    pub memo_nodes: Measure,
    pub oracle_pairs: Measure,
    pub inductive_secs: f64,
    pub memo_secs: f64,
    pub oracle_secs: f64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("k_max must be at least 1")]
    EmptyRange,
    #[error("{algorithm} refuted T_{k} <= T_{}", k + 1)]
    Refuted { k: usize, algorithm: Algorithm },
    #[error("{algorithm} failed on k = {k}: {source}")]
    Check {
        k: usize,
        algorithm: Algorithm,
        #[source]
        source: CheckError,
    },
}

/// Checks `T_k <= T_{k+1}` for `k = 1..=k_max` with each selected algorithm.
/// A run that hits `step_limit` is recorded as truncated; a refutation is an
/// error, since every pair in the family is related.
pub fn bench(
    k_max: usize,
    algorithms: &[Algorithm],
    step_limit: u64,
) -> Result<Vec<BenchRow>, BenchError> {
    if k_max == 0 {
        return Err(BenchError::EmptyRange);
    }
    (1..=k_max).map(|k| bench_row(k, algorithms, step_limit)).collect()
}

pub fn bench_row(
    k: usize,
    algorithms: &[Algorithm],
    step_limit: u64,
) -> Result<BenchRow, BenchError> {
    let (t, u) = (gen_tk(k), gen_tk(k + 1));
    let mut row = BenchRow {
        k,
        size_sum: size(&t) + size(&u),
        inductive_nodes: Measure::NotRun,
        memo_nodes: Measure::NotRun,
        oracle_pairs: Measure::NotRun,
        inductive_secs: 0.0,
        memo_secs: 0.0,
        oracle_secs: 0.0,
    };
    for &algorithm in algorithms {
        let (measure, elapsed) = match algorithm.check(&t, &u, step_limit) {
            Ok(report) if report.verdict.holds() => {
                (Measure::Count(report.nodes_expanded), report.elapsed)
            }
            Ok(_) => return Err(BenchError::Refuted { k, algorithm }),
            Err(CheckError::StepLimit { .. }) => (Measure::Truncated, Duration::ZERO),
            Err(source) => {
                return Err(BenchError::Check {
                    k,
                    algorithm,
                    source,
                })
            }
        };
        let secs = elapsed.as_secs_f64();
        match algorithm {
            Algorithm::Inductive => (row.inductive_nodes, row.inductive_secs) = (measure, secs),
            Algorithm::Memo => (row.memo_nodes, row.memo_secs) = (measure, secs),
            Algorithm::Oracle => (row.oracle_pairs, row.oracle_secs) = (measure, secs),
        }
    }
    Ok(row)
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3} {:>8} {:>14} {:>12} {:>12} {:>10} {:>10} {:>10}",
        "k", "size_sum", "inductive", "memo", "oracle", "ind_s", "memo_s", "oracle_s"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>3} {:>8} {:>14} {:>12} {:>12} {:>10.4} {:>10.4} {:>10.4}",
            r.k,
            r.size_sum,
            r.inductive_nodes.to_string(),
            r.memo_nodes.to_string(),
            r.oracle_pairs.to_string(),
            r.inductive_secs,
            r.memo_secs,
            r.oracle_secs
        );
    }
    out
}

/// One JSON object per line.
pub fn to_records(rows: &[BenchRow]) -> String {
    rows.iter()
        .map(|r| serde_json::to_string(r).expect("bench rows serialize") + "\n")
        .collect()
}

pub fn parse_records(text: &str) -> Result<Vec<BenchRow>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_equal, validate_closed};
    use crate::textio::{parse, print};

    #[test]
    fn v_family() {
        assert_eq!(gen_v(0), SessionType::var("X"));
        assert!(alpha_equal(&gen_v(1), &parse("?[rec Z. ?[Z].Z].X").unwrap()));
        for l in 0..=10 {
            assert_eq!(size(&gen_v(l)), 5 * l + 1);
        }
    }

    #[test]
    fn t_family() {
        assert!(alpha_equal(&gen_tk(1), &parse("rec X. ?[rec Y0. X].X").unwrap()));
        assert_eq!(
            print(&gen_tk(2)),
            "rec X. ?[rec Y1. ?[rec Z0. ?[Z0].Z0].X].?[rec Y0. X].X"
        );
        for k in 1..=10 {
            validate_closed(&gen_tk(k)).unwrap();
        }
    }

    #[test]
    fn measure_serialization() {
        let row = BenchRow {
            k: 3,
            size_sum: 70,
            inductive_nodes: Measure::Count(12),
            memo_nodes: Measure::Truncated,
            oracle_pairs: Measure::NotRun,
            inductive_secs: 0.25,
            memo_secs: 0.0,
            oracle_secs: 1e-6,
        };
        let text = to_records(std::slice::from_ref(&row));
        assert!(text.contains(r#""memo_nodes":"truncated""#));
        assert!(text.contains(r#""oracle_pairs":"not-run""#));
        assert_eq!(parse_records(&text).unwrap(), vec![row]);
        assert!(parse_records(r#"{"k":1,"size_sum":2,"inductive_nodes":"bogus","memo_nodes":1,"oracle_pairs":1,"inductive_secs":0,"memo_secs":0,"oracle_secs":0}"#).is_err());
    }

    #[test]
    fn smallest_bench_row() {
        let rows = bench(1, &Algorithm::ALL, 1_000_000).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].size_sum, tk_size(1) + tk_size(2));
        assert!(rows[0].inductive_nodes.count().unwrap() >= 1);
        assert!(rows[0].memo_nodes.count().unwrap() >= 1);
        assert!(rows[0].oracle_pairs.count().unwrap() >= 1);
    }

    #[test]
    fn truncation_is_recorded() {
        let rows = bench(2, &[Algorithm::Inductive], 5).unwrap();
        assert!(rows.iter().all(|r| r.inductive_nodes == Measure::Truncated));
        assert!(matches!(bench(0, &Algorithm::ALL, 5), Err(BenchError::EmptyRange)));
    }
}
