//! Seeded random generation of contractive session types for property tests
//! and differential checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::subterms::unfold_once;
use crate::syntax::{size, Ident, Label, SessionType};

const BINDERS: [&str; 4] = ["X", "Y", "Z", "W"];
const LABELS: [&str; 3] = ["a", "b", "c"];

/// A binder in scope during generation. `guarded` records whether a message
/// or choice constructor sits between the binder and the current position.
#[derive(Clone)]
struct Scope {
    name: Ident,
    guarded: bool,
}

pub struct TypeGen {
    rng: ChaCha8Rng,
    max_size: usize,
}

impl TypeGen {
    pub fn new(seed: u64, max_size: usize) -> Self {
        assert!(max_size >= 1);
        TypeGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_size,
        }
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// A closed contractive type with `size <= max_size`.
    pub fn closed(&mut self) -> SessionType {
        let budget = self.rng.gen_range(1..=self.max_size);
        self.gen(budget, &[], &[])
    }

    /// A contractive type of `size <= max_size` that may mention the given
    /// free variables.
    pub fn open(&mut self, free: &[Ident]) -> SessionType {
        let budget = self.rng.gen_range(1..=self.max_size);
        self.gen(budget, &[], free)
    }

    /// A closed pair, biased towards pairs that are related by subtyping.
    pub fn pair(&mut self) -> (SessionType, SessionType) {
        let t = self.closed();
        match self.rng.gen_range(0..4) {
            0 => (t, self.closed()),
            1 => {
                let u = self.mutate_bounded(&t);
                (t, u)
            }
            2 => {
                let u = self.mutate_bounded(&t);
                (u, t)
            }
            _ => (t.clone(), t),
        }
    }

    fn mutate_bounded(&mut self, t: &SessionType) -> SessionType {
        for _ in 0..8 {
            let u = self.mutate(t);
            if size(&u) <= self.max_size {
                return u;
            }
        }
        t.clone()
    }

    fn leaf(&mut self, scope: &[Scope], free: &[Ident]) -> SessionType {
        // Only the innermost binding of a name is visible.
        let mut usable: Vec<&Ident> = Vec::new();
        for (i, s) in scope.iter().enumerate() {
            let shadowed = scope[i + 1..].iter().any(|later| later.name == s.name);
            if s.guarded && !shadowed {
                usable.push(&s.name);
            }
        }
        for f in free {
            if !scope.iter().any(|s| &s.name == f) {
                usable.push(f);
            }
        }
        if usable.is_empty() || self.rng.gen_bool(0.3) {
            SessionType::End
        } else {
            SessionType::Var((*usable.choose(&mut self.rng).unwrap()).clone())
        }
    }

    /// Splits `total` into `parts` positive shares.
    fn split(&mut self, total: usize, parts: usize) -> Vec<usize> {
        let mut shares = vec![1; parts];
        for _ in 0..total - parts {
            let i = self.rng.gen_range(0..parts);
            shares[i] += 1;
        }
        shares
    }

    fn gen(&mut self, budget: usize, scope: &[Scope], free: &[Ident]) -> SessionType {
        if budget <= 1 || self.rng.gen_bool(0.15) {
            return self.leaf(scope, free);
        }
        let guarded: Vec<Scope> = scope
            .iter()
            .map(|s| Scope {
                name: s.name.clone(),
                guarded: true,
            })
            .collect();
        match self.rng.gen_range(0..6) {
            0 | 1 => {
                let name = Ident::new(*BINDERS.choose(&mut self.rng).unwrap()).unwrap();
                let mut inner = scope.to_vec();
                inner.push(Scope {
                    name: name.clone(),
                    guarded: false,
                });
                SessionType::Rec(name, Box::new(self.gen(budget - 1, &inner, free)))
            }
            2 | 3 if budget >= 3 => {
                let max_payloads = (budget - 2).min(2);
                let n = self.rng.gen_range(1..=max_payloads);
                let shares = self.split(budget - 1, n + 1);
                let payloads = shares[..n]
                    .iter()
                    .map(|&s| self.gen(s, &guarded, free))
                    .collect();
                let cont = Box::new(self.gen(shares[n], &guarded, free));
                if self.rng.gen_bool(0.5) {
                    SessionType::Input(payloads, cont)
                } else {
                    SessionType::Output(payloads, cont)
                }
            }
            _ => {
                let max_alts = (budget - 1).min(LABELS.len());
                let m = self.rng.gen_range(1..=max_alts);
                let mut labels: Vec<&str> = LABELS.to_vec();
                labels.shuffle(&mut self.rng);
                let shares = self.split(budget - 1, m);
                let alts = labels[..m]
                    .iter()
                    .zip(shares)
                    .map(|(l, s)| (Label::new(*l).unwrap(), self.gen(s, &guarded, free)))
                    .collect();
                if self.rng.gen_bool(0.5) {
                    SessionType::Select(alts)
                } else {
                    SessionType::Branch(alts)
                }
            }
        }
    }

    /// Small local edits: widen a branch, narrow a selection, unfold a
    /// recursion, or replace a leaf. The result is contractive, and closed
    /// when `t` is.
    pub fn mutate(&mut self, t: &SessionType) -> SessionType {
        self.mutate_in(t, &[])
    }

    fn mutate_in(&mut self, t: &SessionType, scope: &[Scope]) -> SessionType {
        let hit = self.rng.gen_bool(0.2);
        let guarded: Vec<Scope> = scope
            .iter()
            .map(|s| Scope {
                name: s.name.clone(),
                guarded: true,
            })
            .collect();
        match t {
            SessionType::End | SessionType::Var(_) => {
                if hit {
                    self.leaf(scope, &[])
                } else {
                    t.clone()
                }
            }
            SessionType::Rec(x, body) => {
                if hit && scope.is_empty() {
                    return unfold_once(t);
                }
                let mut inner = scope.to_vec();
                inner.push(Scope {
                    name: x.clone(),
                    guarded: false,
                });
                SessionType::Rec(x.clone(), Box::new(self.mutate_in(body, &inner)))
            }
            SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
                let ps = ps.iter().map(|p| self.mutate_in(p, &guarded)).collect();
                let k = Box::new(self.mutate_in(k, &guarded));
                if matches!(t, SessionType::Input(..)) {
                    SessionType::Input(ps, k)
                } else {
                    SessionType::Output(ps, k)
                }
            }
            SessionType::Select(alts) | SessionType::Branch(alts) => {
                let mut alts: Vec<(Label, SessionType)> = alts
                    .iter()
                    .map(|(l, a)| (l.clone(), self.mutate_in(a, &guarded)))
                    .collect();
                let is_select = matches!(t, SessionType::Select(..));
                if hit {
                    if is_select && alts.len() > 1 {
                        let i = self.rng.gen_range(0..alts.len());
                        alts.remove(i);
                    } else if !is_select {
                        let unused = LABELS
                            .iter()
                            .find(|l| !alts.iter().any(|(m, _)| m.as_str() == **l));
                        if let Some(l) = unused {
                            let extra = self.gen(3, &guarded, &[]);
                            alts.push((Label::new(*l).unwrap(), extra));
                        }
                    }
                }
                if is_select {
                    SessionType::Select(alts)
                } else {
                    SessionType::Branch(alts)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{free_vars, validate, validate_closed};

    #[test]
    fn closed_types_are_valid_and_bounded() {
        let mut g = TypeGen::new(7, 40);
        for _ in 0..500 {
            let t = g.closed();
            assert!(size(&t) <= 40);
            validate_closed(&t).unwrap();
        }
    }

    #[test]
    fn open_types_only_mention_given_variables() {
        let x = Ident::new("X").unwrap();
        let mut g = TypeGen::new(11, 20);
        for _ in 0..300 {
            let t = g.open(std::slice::from_ref(&x));
            validate(&t).unwrap();
            assert!(free_vars(&t).iter().all(|v| *v == x));
        }
    }

    #[test]
    fn pairs_are_valid() {
        let mut g = TypeGen::new(3, 25);
        for _ in 0..500 {
            let (t, u) = g.pair();
            validate_closed(&t).unwrap();
            validate_closed(&u).unwrap();
            assert!(size(&t) <= 25 && size(&u) <= 25);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a: Vec<_> = (0..20).map({
            let mut g = TypeGen::new(5, 30);
            move |_| g.closed()
        }).collect();
        let b: Vec<_> = (0..20).map({
            let mut g = TypeGen::new(5, 30);
            move |_| g.closed()
        }).collect();
        assert_eq!(a, b);
    }
}
