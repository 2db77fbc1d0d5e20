//! Coinductive subtyping by type simulation.
//!
//! A type simulation relates unfolded heads pairwise: `end` with `end`,
//! inputs covariantly, outputs with contravariant payloads, branches when the
//! left labels are among the right ones, selections the other way round. The
//! checker explores the pairs reachable from `(t, u)` and assumes a pair
//! holds once it has been visited, which realizes the greatest fixed point.
//! The explored set is memoized on bare pairs, so it stays within
//! `|Sub(t)| * |Sub(u)|`.
//!
//! This module works directly on [`SessionType`] values and shares no code
//! with the inductive checkers beyond the syntax layer.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use crate::inductive::{validate_pair, CheckError, CheckReport, Verdict};
use crate::subterms::{unfold, SubtermError};
use crate::syntax::{alpha_canonical, Label, SessionType};

/// Explored pairs of alpha-canonical, unfolded closed types.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairSet {
    pairs: BTreeSet<(SessionType, SessionType)>,
}

impl PairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, t: &SessionType, u: &SessionType) -> bool {
        self.pairs
            .contains(&(alpha_canonical(t), alpha_canonical(u)))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(SessionType, SessionType)> {
        self.pairs.iter()
    }

    fn insert(&mut self, pair: (SessionType, SessionType)) -> bool {
        self.pairs.insert(pair)
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub holds: bool,
    /// Pairs explored before the answer was known. When `holds` is true this
    /// is a type simulation containing the input pair.
    pub explored: PairSet,
}

#[derive(Default)]
struct Heads {
    cache: HashMap<SessionType, SessionType>,
}

impl Heads {
    /// Canonical form of the unfolded type.
    fn head(&mut self, t: &SessionType) -> Result<SessionType, SubtermError> {
        if let Some(h) = self.cache.get(t) {
            return Ok(h.clone());
        }
        let h = alpha_canonical(&unfold(t)?);
        self.cache.insert(t.clone(), h.clone());
        Ok(h)
    }
}

fn lookup<'a>(alts: &'a [(Label, SessionType)], l: &Label) -> Option<&'a SessionType> {
    alts.iter().find(|(m, _)| m == l).map(|(_, t)| t)
}

/// Successor pairs a simulation must also contain, or `None` when the heads
/// are incompatible.
fn successors(t: &SessionType, u: &SessionType) -> Option<Vec<(SessionType, SessionType)>> {
    use SessionType as S;
    match (t, u) {
        (S::End, S::End) => Some(Vec::new()),
        (S::Input(ts, v), S::Input(us, w)) if ts.len() == us.len() => Some(
            ts.iter()
                .zip(us)
                .map(|(a, b)| (a.clone(), b.clone()))
                .chain([(v.as_ref().clone(), w.as_ref().clone())])
                .collect(),
        ),
        (S::Output(ts, v), S::Output(us, w)) if ts.len() == us.len() => Some(
            ts.iter()
                .zip(us)
                .map(|(a, b)| (b.clone(), a.clone()))
                .chain([(v.as_ref().clone(), w.as_ref().clone())])
                .collect(),
        ),
        (S::Branch(a), S::Branch(b)) => a
            .iter()
            .map(|(l, s)| lookup(b, l).map(|r| (s.clone(), r.clone())))
            .collect(),
        (S::Select(a), S::Select(b)) => b
            .iter()
            .map(|(l, r)| lookup(a, l).map(|s| (s.clone(), r.clone())))
            .collect(),
        _ => None,
    }
}

/// Searches for a type simulation containing `(t, u)`.
pub fn simulation(t: &SessionType, u: &SessionType) -> Result<Simulation, CheckError> {
    validate_pair(t, u)?;
    let mut heads = Heads::default();
    let mut explored = PairSet::default();
    let mut work = vec![(heads.head(t)?, heads.head(u)?)];
    while let Some(pair) = work.pop() {
        if explored.pairs.contains(&pair) {
            continue;
        }
        let next = successors(&pair.0, &pair.1);
        explored.insert(pair);
        match next {
            None => {
                return Ok(Simulation {
                    holds: false,
                    explored,
                })
            }
            Some(next) => {
                for (a, b) in next.into_iter().rev() {
                    work.push((heads.head(&a)?, heads.head(&b)?));
                }
            }
        }
    }
    Ok(Simulation {
        holds: true,
        explored,
    })
}

pub fn simulates(t: &SessionType, u: &SessionType) -> Result<bool, CheckError> {
    Ok(simulation(t, u)?.holds)
}

/// Mutual simulation.
pub fn coinductive_equal(t: &SessionType, u: &SessionType) -> Result<bool, CheckError> {
    Ok(simulates(t, u)? && simulates(u, t)?)
}

/// The oracle as a [`CheckReport`]; `nodes_expanded` counts explored pairs.
pub fn check_oracle(t: &SessionType, u: &SessionType) -> Result<CheckReport, CheckError> {
    let start = Instant::now();
    let sim = simulation(t, u)?;
    Ok(CheckReport {
        verdict: if sim.holds {
            Verdict::Subtype
        } else {
            Verdict::NotSubtype
        },
        nodes_expanded: sim.explored.len() as u64,
        memo_hits: 0,
        max_context: 0,
        max_depth: 0,
        elapsed: start.elapsed(),
        derivation: None,
    })
}
