//! The memoized variant: a depth-first search over the proof DAG that keeps
//! the set of visited judgements and assumes any revisited judgement proved.
//!
//! The visited set is keyed on whole judgements, assumption set included,
//! exactly as the algorithm stores them.

use std::collections::{BTreeSet, HashSet};
use std::rc::Rc;
use std::time::Instant;

use crate::graph::{Shape, TypeGraph, TypeId};
use crate::inductive::{
    alt_labels_subset, find_alt, sigma_contains, sigma_insert, validate_pair, CheckError,
    CheckReport, Claim, ClaimId, Context, Judgement, SigmaIds, Verdict, Visit, DEFAULT_STEP_LIMIT,
};
use crate::stack::on_big_stack;
use crate::syntax::SessionType;

/// The threaded state: visited judgements, or failure.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoState {
    pub visited: BTreeSet<Judgement>,
    pub failed: bool,
}

impl MemoState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn failed() -> Self {
        MemoState {
            visited: BTreeSet::new(),
            failed: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MemoOptions {
    pub step_limit: u64,
    /// When false, visited judgements are still recorded but never cause an
    /// early return, which degenerates to the unmemoized search.
    pub use_memo: bool,
}

impl Default for MemoOptions {
    fn default() -> Self {
        MemoOptions {
            step_limit: DEFAULT_STEP_LIMIT,
            use_memo: true,
        }
    }
}

type Key = (SigmaIds, ClaimId);

struct Search<'a, 'o> {
    graph: &'a TypeGraph,
    opts: &'a MemoOptions,
    visited: HashSet<Key>,
    failed: bool,
    steps: u64,
    hits: u64,
    max_context: usize,
    max_depth: usize,
    observer: Option<&'o mut (dyn FnMut(&Visit<'_>) + Send)>,
}

struct LimitHit;

impl Search<'_, '_> {
    fn subtype(&mut self, sigma: &SigmaIds, t: TypeId, u: TypeId, depth: usize) -> Result<(), LimitHit> {
        if self.failed {
            return Ok(());
        }
        let key: Key = (sigma.clone(), (t, u));
        if self.visited.contains(&key) && self.opts.use_memo {
            self.hits += 1;
            return Ok(());
        }
        self.visited.insert(key);
        self.steps += 1;
        if self.steps > self.opts.step_limit {
            return Err(LimitHit);
        }
        self.max_context = self.max_context.max(sigma.len());
        self.max_depth = self.max_depth.max(depth);
        if let Some(obs) = self.observer.as_mut() {
            obs(&Visit {
                graph: self.graph,
                sigma,
                goal: (t, u),
                depth,
            });
        }

        let g = self.graph;
        if sigma_contains(sigma, (t, u)) {
            return Ok(());
        }
        match (g.shape(t), g.shape(u)) {
            (Shape::End, Shape::End) => Ok(()),
            (Shape::Rec(next), _) => {
                self.subtype(&sigma_insert(sigma, (t, u)), *next, u, depth + 1)
            }
            (_, Shape::Rec(next)) => {
                self.subtype(&sigma_insert(sigma, (t, u)), t, *next, depth + 1)
            }
            (Shape::Input(ts, v), Shape::Input(us, w)) if ts.len() == us.len() => {
                for (&ti, &ui) in ts.iter().zip(us) {
                    self.subtype(sigma, ti, ui, depth + 1)?;
                }
                self.subtype(sigma, *v, *w, depth + 1)
            }
            (Shape::Output(ts, v), Shape::Output(us, w)) if ts.len() == us.len() => {
                for (&ti, &ui) in ts.iter().zip(us) {
                    self.subtype(sigma, ui, ti, depth + 1)?;
                }
                self.subtype(sigma, *v, *w, depth + 1)
            }
            (Shape::Branch(a), Shape::Branch(b)) if alt_labels_subset(a, b) => {
                for (l, ti) in a {
                    let ui = find_alt(b, l).expect("checked inclusion");
                    self.subtype(sigma, *ti, ui, depth + 1)?;
                }
                Ok(())
            }
            (Shape::Select(a), Shape::Select(b)) if alt_labels_subset(b, a) => {
                for (l, ui) in b {
                    let ti = find_alt(a, l).expect("checked inclusion");
                    self.subtype(sigma, ti, *ui, depth + 1)?;
                }
                Ok(())
            }
            _ => {
                self.failed = true;
                Ok(())
            }
        }
    }
}

fn sigma_ids(g: &TypeGraph, sigma: &Context) -> SigmaIds {
    let mut v: Vec<ClaimId> = sigma
        .iter()
        .map(|c| {
            (
                g.lookup(c.lhs()).expect("context types are interned"),
                g.lookup(c.rhs()).expect("context types are interned"),
            )
        })
        .collect();
    v.sort_unstable();
    v.dedup();
    v.into()
}

fn judgement_of(g: &TypeGraph, (sigma, (t, u)): &Key) -> Judgement {
    Judgement::new(
        sigma
            .iter()
            .map(|&(a, b)| Claim::new(g.ty(a), g.ty(b)))
            .collect(),
        Claim::new(g.ty(*t), g.ty(*u)),
    )
}

/// One call of the memoized procedure, threading `delta` through.
///
/// A failed `delta` is returned unchanged. The step limit applies to new
/// insertions into the visited set.
pub fn subtype_memo(
    delta: MemoState,
    sigma: &Context,
    t: &SessionType,
    u: &SessionType,
) -> Result<MemoState, CheckError> {
    if delta.failed {
        return Ok(MemoState::failed());
    }
    validate_pair(t, u)?;
    let mut graph = TypeGraph::new();
    let mut types: Vec<&SessionType> = vec![t, u];
    for c in sigma.iter() {
        types.extend([c.lhs(), c.rhs()]);
    }
    for j in &delta.visited {
        types.extend([j.goal.lhs(), j.goal.rhs()]);
        for c in j.sigma.iter() {
            types.extend([c.lhs(), c.rhs()]);
        }
    }
    for ty in types {
        validate_pair(ty, ty)?;
        graph.add(ty)?;
    }
    let graph = &graph;
    let opts = MemoOptions::default();
    let opts = &opts;
    on_big_stack(move || {
        let visited = delta
            .visited
            .iter()
            .map(|j| {
                let goal = (
                    graph.lookup(j.goal.lhs()).expect("interned"),
                    graph.lookup(j.goal.rhs()).expect("interned"),
                );
                (sigma_ids(graph, &j.sigma), goal)
            })
            .collect();
        let mut search = Search {
            graph,
            opts,
            visited,
            failed: false,
            steps: 0,
            hits: 0,
            max_context: 0,
            max_depth: 0,
            observer: None,
        };
        let root = (graph.lookup(t).expect("interned"), graph.lookup(u).expect("interned"));
        search
            .subtype(&sigma_ids(graph, sigma), root.0, root.1, 1)
            .map_err(|LimitHit| CheckError::StepLimit {
                limit: opts.step_limit,
            })?;
        if search.failed {
            return Ok(MemoState::failed());
        }
        Ok(MemoState {
            visited: search.visited.iter().map(|k| judgement_of(graph, k)).collect(),
            failed: false,
        })
    })
}

/// Runs the memoized procedure from an empty visited set and context.
/// `nodes_expanded` is the final visited-set size.
pub fn check_memo(t: &SessionType, u: &SessionType) -> Result<CheckReport, CheckError> {
    check_memo_with(t, u, &MemoOptions::default())
}

pub fn check_memo_with(
    t: &SessionType,
    u: &SessionType,
    opts: &MemoOptions,
) -> Result<CheckReport, CheckError> {
    run(t, u, opts, None)
}

/// Like [`check_memo_with`], reporting every judgement inserted into the
/// visited set.
pub fn check_memo_observed(
    t: &SessionType,
    u: &SessionType,
    opts: &MemoOptions,
    observer: &mut (dyn FnMut(&Visit<'_>) + Send),
) -> Result<CheckReport, CheckError> {
    run(t, u, opts, Some(observer))
}

fn run(
    t: &SessionType,
    u: &SessionType,
    opts: &MemoOptions,
    observer: Option<&mut (dyn FnMut(&Visit<'_>) + Send)>,
) -> Result<CheckReport, CheckError> {
    validate_pair(t, u)?;
    let start = Instant::now();
    let mut graph = TypeGraph::new();
    let root = (graph.add(t)?, graph.add(u)?);
    let graph = &graph;
    on_big_stack(move || {
        let mut search = Search {
            graph,
            opts,
            visited: HashSet::new(),
            failed: false,
            steps: 0,
            hits: 0,
            max_context: 0,
            max_depth: 0,
            observer,
        };
        search
            .subtype(&Rc::from(Vec::new()), root.0, root.1, 1)
            .map_err(|LimitHit| CheckError::StepLimit {
                limit: opts.step_limit,
            })?;
        let nodes_expanded = if opts.use_memo {
            search.visited.len() as u64
        } else {
            search.steps
        };
        Ok(CheckReport {
            verdict: if search.failed {
                Verdict::NotSubtype
            } else {
                Verdict::Subtype
            },
            nodes_expanded,
            memo_hits: search.hits,
            max_context: search.max_context,
            max_depth: search.max_depth,
            elapsed: start.elapsed(),
            derivation: None,
        })
    })
}

/// Whether `visited <= 2^(s^2) * s^2` for `s = |Sub(T, U)|`, computed exactly.
pub fn within_visited_bound(visited: u64, sub_pair_len: usize) -> bool {
    let s2 = (sub_pair_len as u128) * (sub_pair_len as u128);
    if s2 >= 64 {
        // 2^(s^2) alone already exceeds every u64.
        return true;
    }
    (visited as u128) <= (1u128 << s2) * s2
}
