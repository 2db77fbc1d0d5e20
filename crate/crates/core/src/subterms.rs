//! Top-down and bottom-up subterm sets, and unfolding of `rec` heads.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::syntax::{alpha_canonical, size, substitute, SessionType};
use crate::textio::print;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubtermError {
    #[error("unfolding did not reach a non-rec head after {steps} steps (non-contractive input?)")]
    UnfoldDiverged { steps: usize },
    #[error("subterm closure exceeded {cap} insertions")]
    IterationCap { cap: usize },
    #[error("type has a free variable `{0}`")]
    Open(String),
}

/// A finite set of types up to alpha-equivalence, iterated in order of the
/// printed canonical form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeSet {
    items: BTreeMap<String, SessionType>,
}

impl TypeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` if no alpha-equal element was present.
    pub fn insert(&mut self, t: &SessionType) -> bool {
        let c = alpha_canonical(t);
        let key = print(&c);
        if self.items.contains_key(&key) {
            return false;
        }
        self.items.insert(key, c);
        true
    }

    pub fn contains(&self, t: &SessionType) -> bool {
        self.items.contains_key(&print(&alpha_canonical(t)))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Canonical representatives.
    pub fn iter(&self) -> impl Iterator<Item = &SessionType> {
        self.items.values()
    }

    /// Printed canonical representatives, sorted.
    pub fn printed(&self) -> impl Iterator<Item = &str> {
        self.items.keys().map(String::as_str)
    }

    pub fn is_subset(&self, other: &TypeSet) -> bool {
        self.items.keys().all(|k| other.items.contains_key(k))
    }

    pub fn union(mut self, other: &TypeSet) -> TypeSet {
        for (k, v) in &other.items {
            self.items.entry(k.clone()).or_insert_with(|| v.clone());
        }
        self
    }
}

impl<'a> FromIterator<&'a SessionType> for TypeSet {
    fn from_iter<I: IntoIterator<Item = &'a SessionType>>(iter: I) -> Self {
        let mut set = TypeSet::new();
        for t in iter {
            set.insert(t);
        }
        set
    }
}

/// One unfolding step `rec X. B  ->  B[rec X. B / X]`; other heads are
/// returned unchanged.
pub fn unfold_once(t: &SessionType) -> SessionType {
    match t {
        SessionType::Rec(x, body) => substitute(body, x, t),
        _ => t.clone(),
    }
}

/// Unfolds until the head is not `rec`. The step budget is `size(t)`, which a
/// contractive type never exhausts.
pub fn unfold(t: &SessionType) -> Result<SessionType, SubtermError> {
    let budget = size(t);
    let mut cur = t.clone();
    for _ in 0..=budget {
        if !cur.is_rec() {
            return Ok(cur);
        }
        cur = unfold_once(&cur);
    }
    Err(SubtermError::UnfoldDiverged { steps: budget })
}

/// Bottom-up subterms, by structural recursion. The `rec` case substitutes
/// the whole recursive type into every bottom-up subterm of its body.
pub fn sub_bottom_up(t: &SessionType) -> TypeSet {
    let mut out = TypeSet::new();
    out.insert(t);
    match t {
        SessionType::End | SessionType::Var(_) => {}
        SessionType::Rec(x, body) => {
            for s in sub_bottom_up(body).iter() {
                out.insert(&substitute(s, x, t));
            }
        }
        SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
            for child in ps.iter().chain(std::iter::once(k.as_ref())) {
                out = out.union(&sub_bottom_up(child));
            }
        }
        SessionType::Select(alts) | SessionType::Branch(alts) => {
            for (_, a) in alts {
                out = out.union(&sub_bottom_up(a));
            }
        }
    }
    out
}

/// Top-down subterms: the least set containing `t` that is closed under
/// one-step unfolding of `rec` members and under taking children of
/// constructor members.
pub fn sub_top_down(t: &SessionType) -> Result<TypeSet, SubtermError> {
    let cap = 4 * size(t);
    let mut set = TypeSet::new();
    let mut work = vec![t.clone()];
    let mut inserted = 0usize;
    while let Some(s) = work.pop() {
        if !set.insert(&s) {
            continue;
        }
        inserted += 1;
        if inserted > cap {
            return Err(SubtermError::IterationCap { cap });
        }
        match &s {
            SessionType::End => {}
            SessionType::Var(x) => return Err(SubtermError::Open(x.to_string())),
            SessionType::Rec(..) => work.push(unfold_once(&s)),
            SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
                work.push(k.as_ref().clone());
                work.extend(ps.iter().rev().cloned());
            }
            SessionType::Select(alts) | SessionType::Branch(alts) => {
                work.extend(alts.iter().rev().map(|(_, a)| a.clone()));
            }
        }
    }
    Ok(set)
}

pub fn sub_pair(t: &SessionType, u: &SessionType) -> Result<TypeSet, SubtermError> {
    Ok(sub_top_down(t)?.union(&sub_top_down(u)?))
}
