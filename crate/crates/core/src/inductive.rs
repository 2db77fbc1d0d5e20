//! Gay and Hole's algorithmic subtyping: bottom-up construction of a proof
//! tree for `{} |- T <= U` under the rules
//!
//! ```text
//! AS-Assump   T <= U in S                          ==> S |- T <= U
//! AS-End                                           ==> S |- end <= end
//! AS-RecL     S, rec X.T <= U |- T[rec X.T/X] <= U ==> S |- rec X.T <= U
//! AS-RecR     S, T <= rec X.U |- T <= U[rec X.U/X] ==> S |- T <= rec X.U
//! AS-In       S |- Ti <= Ui,  S |- V <= W          ==> S |- ?[T~].V <= ?[U~].W
//! AS-Out      S |- Ui <= Ti,  S |- V <= W          ==> S |- ![T~].V <= ![U~].W
//! AS-Bra      S |- Si <= Ti for each lhs label     ==> S |- &{..m} <= &{..n}, m <= n
//! AS-Sel      S |- Si <= Ti for each rhs label     ==> S |- +{..n} <= +{..m}, m <= n
//! ```
//!
//! `AS-Assump` has the highest priority and `AS-RecL` beats `AS-RecR`. The
//! remaining rules apply to disjoint judgements, so the search never
//! backtracks: a failed premise refutes the root.

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::graph::{Shape, TypeGraph, TypeId};
use crate::stack::on_big_stack;
use crate::subterms::{unfold_once, SubtermError};
use crate::syntax::{alpha_canonical, validate_closed, Label, SessionType, ValidationError};

/// Default bound on expanded judgements.
pub const DEFAULT_STEP_LIMIT: u64 = 100_000_000;

/// An ordered pair `lhs <= rhs` of closed types in alpha-canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Claim {
    lhs: SessionType,
    rhs: SessionType,
}

impl Claim {
    /// Canonicalizes both sides.
    pub fn new(lhs: &SessionType, rhs: &SessionType) -> Self {
        Claim {
            lhs: alpha_canonical(lhs),
            rhs: alpha_canonical(rhs),
        }
    }

    fn from_graph(g: &TypeGraph, (l, r): ClaimId) -> Self {
        Claim {
            lhs: g.ty(l).clone(),
            rhs: g.ty(r).clone(),
        }
    }

    pub fn lhs(&self) -> &SessionType {
        &self.lhs
    }

    pub fn rhs(&self) -> &SessionType {
        &self.rhs
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <= {}", self.lhs, self.rhs)
    }
}

/// The assumption set of a judgement.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    claims: BTreeSet<Claim>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, claim: Claim) -> Self {
        self.claims.insert(claim);
        self
    }

    pub fn insert(&mut self, claim: Claim) -> bool {
        self.claims.insert(claim)
    }

    pub fn contains(&self, claim: &Claim) -> bool {
        self.claims.contains(claim)
    }

    pub fn len(&self) -> usize {
        self.claims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.claims.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter()
    }
}

impl FromIterator<Claim> for Context {
    fn from_iter<I: IntoIterator<Item = Claim>>(iter: I) -> Self {
        Context {
            claims: iter.into_iter().collect(),
        }
    }
}

/// `sigma |- goal`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Judgement {
    pub sigma: Context,
    pub goal: Claim,
}

impl Judgement {
    pub fn new(sigma: Context, goal: Claim) -> Self {
        Judgement { sigma, goal }
    }

    pub fn root(t: &SessionType, u: &SessionType) -> Self {
        Judgement::new(Context::new(), Claim::new(t, u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleName {
    Assump,
    End,
    RecL,
    RecR,
    In,
    Out,
    Bra,
    Sel,
}

impl RuleName {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleName::Assump => "AS-Assump",
            RuleName::End => "AS-End",
            RuleName::RecL => "AS-RecL",
            RuleName::RecR => "AS-RecR",
            RuleName::In => "AS-In",
            RuleName::Out => "AS-Out",
            RuleName::Bra => "AS-Bra",
            RuleName::Sel => "AS-Sel",
        }
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which unfolding rule wins when both sides are `rec`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RecPriority {
    #[default]
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationNode {
    pub judgement: Judgement,
    pub rule: RuleName,
    pub children: Vec<DerivationNode>,
}

impl DerivationNode {
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(DerivationNode::node_count).sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Subtype,
    NotSubtype,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Subtype
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Subtype => "subtype",
            Verdict::NotSubtype => "not-subtype",
        })
    }
}

/// Outcome of one check, shared by all three algorithms.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub verdict: Verdict,
    /// Judgements expanded (inductive), visited-set size (memo), or explored
    /// pairs (oracle).
    pub nodes_expanded: u64,
    pub memo_hits: u64,
    pub max_context: usize,
    /// Longest root-to-node path, counted in nodes.
    pub max_depth: usize,
    pub elapsed: Duration,
    pub derivation: Option<DerivationNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("{side} type is invalid: {source}")]
    Invalid {
        side: Side,
        #[source]
        source: ValidationError,
    },
    #[error("step limit of {limit} exceeded")]
    StepLimit { limit: u64 },
    #[error(transparent)]
    Subterms(#[from] SubtermError),
}

pub(crate) fn validate_pair(t: &SessionType, u: &SessionType) -> Result<(), CheckError> {
    validate_closed(t).map_err(|source| CheckError::Invalid {
        side: Side::Left,
        source,
    })?;
    validate_closed(u).map_err(|source| CheckError::Invalid {
        side: Side::Right,
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{rule} does not apply to this judgement")]
pub struct NotApplicable {
    pub rule: RuleName,
}

fn labels_subset(small: &[(Label, SessionType)], big: &[(Label, SessionType)]) -> bool {
    small.iter().all(|(l, _)| big.iter().any(|(m, _)| m == l))
}

fn alt<'a>(alts: &'a [(Label, SessionType)], l: &Label) -> Option<&'a SessionType> {
    alts.iter().find(|(m, _)| m == l).map(|(_, t)| t)
}

/// The rule the algorithm applies to `j`, or `None` when no rule matches and
/// the judgement is refuted.
pub fn select_rule(j: &Judgement) -> Option<RuleName> {
    select_rule_with(j, RecPriority::Left)
}

pub fn select_rule_with(j: &Judgement, priority: RecPriority) -> Option<RuleName> {
    use SessionType as S;
    if j.sigma.contains(&j.goal) {
        return Some(RuleName::Assump);
    }
    let (t, u) = (j.goal.lhs(), j.goal.rhs());
    match (priority, t.is_rec(), u.is_rec()) {
        (RecPriority::Left, true, _) | (RecPriority::Right, true, false) => {
            return Some(RuleName::RecL)
        }
        (_, _, true) => return Some(RuleName::RecR),
        _ => {}
    }
    match (t, u) {
        (S::End, S::End) => Some(RuleName::End),
        (S::Input(..), S::Input(..)) => Some(RuleName::In),
        (S::Output(..), S::Output(..)) => Some(RuleName::Out),
        (S::Branch(a), S::Branch(b)) if labels_subset(a, b) => Some(RuleName::Bra),
        (S::Select(a), S::Select(b)) if labels_subset(b, a) => Some(RuleName::Sel),
        _ => None,
    }
}

/// Premises that `rule` generates from `j`, in the order the algorithm
/// discharges them.
pub fn premises(j: &Judgement, rule: RuleName) -> Result<Vec<Judgement>, NotApplicable> {
    use SessionType as S;
    let na = Err(NotApplicable { rule });
    let (t, u) = (j.goal.lhs(), j.goal.rhs());
    let same = |claims: Vec<Claim>| {
        claims
            .into_iter()
            .map(|c| Judgement::new(j.sigma.clone(), c))
            .collect()
    };
    Ok(match (rule, t, u) {
        (RuleName::Assump, _, _) if j.sigma.contains(&j.goal) => Vec::new(),
        (RuleName::End, S::End, S::End) => Vec::new(),
        (RuleName::RecL, S::Rec(..), _) => vec![Judgement::new(
            j.sigma.clone().with(j.goal.clone()),
            Claim::new(&unfold_once(t), u),
        )],
        (RuleName::RecR, _, S::Rec(..)) => vec![Judgement::new(
            j.sigma.clone().with(j.goal.clone()),
            Claim::new(t, &unfold_once(u)),
        )],
        (RuleName::In, S::Input(ts, v), S::Input(us, w)) if ts.len() == us.len() => {
            let mut cs: Vec<Claim> = ts.iter().zip(us).map(|(a, b)| Claim::new(a, b)).collect();
            cs.push(Claim::new(v, w));
            same(cs)
        }
        (RuleName::Out, S::Output(ts, v), S::Output(us, w)) if ts.len() == us.len() => {
            let mut cs: Vec<Claim> = ts.iter().zip(us).map(|(a, b)| Claim::new(b, a)).collect();
            cs.push(Claim::new(v, w));
            same(cs)
        }
        (RuleName::Bra, S::Branch(a), S::Branch(b)) => {
            let mut cs = Vec::new();
            for (l, s) in a {
                let Some(t) = alt(b, l) else { return na };
                cs.push(Claim::new(s, t));
            }
            same(cs)
        }
        (RuleName::Sel, S::Select(a), S::Select(b)) => {
            let mut cs = Vec::new();
            for (l, t) in b {
                let Some(s) = alt(a, l) else { return na };
                cs.push(Claim::new(s, t));
            }
            same(cs)
        }
        _ => return na,
    })
}

/// A claim over interned types.
pub type ClaimId = (TypeId, TypeId);

/// A context over interned types: sorted, deduplicated.
pub(crate) type SigmaIds = Rc<[ClaimId]>;

pub(crate) fn sigma_contains(sigma: &[ClaimId], c: ClaimId) -> bool {
    sigma.binary_search(&c).is_ok()
}

pub(crate) fn sigma_insert(sigma: &SigmaIds, c: ClaimId) -> SigmaIds {
    match sigma.binary_search(&c) {
        Ok(_) => sigma.clone(),
        Err(pos) => {
            let mut v = Vec::with_capacity(sigma.len() + 1);
            v.extend_from_slice(&sigma[..pos]);
            v.push(c);
            v.extend_from_slice(&sigma[pos..]);
            v.into()
        }
    }
}

pub(crate) fn find_alt(alts: &[(Label, TypeId)], l: &Label) -> Option<TypeId> {
    alts.binary_search_by(|(m, _)| m.cmp(l))
        .ok()
        .map(|i| alts[i].1)
}

pub(crate) fn alt_labels_subset(small: &[(Label, TypeId)], big: &[(Label, TypeId)]) -> bool {
    small.iter().all(|(l, _)| find_alt(big, l).is_some())
}

/// What an observer sees for each expanded judgement.
pub struct Visit<'a> {
    pub graph: &'a TypeGraph,
    pub sigma: &'a [ClaimId],
    pub goal: ClaimId,
    /// 1 at the root.
    pub depth: usize,
}

impl Visit<'_> {
    pub fn judgement(&self) -> Judgement {
        Judgement::new(
            self.sigma.iter().map(|&c| Claim::from_graph(self.graph, c)).collect(),
            Claim::from_graph(self.graph, self.goal),
        )
    }
}

pub type Observer<'o> = &'o mut (dyn FnMut(&Visit<'_>) + Send);

#[derive(Debug, Clone)]
pub struct DeriveOptions {
    pub step_limit: u64,
    pub capture_tree: bool,
    pub rec_priority: RecPriority,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions {
            step_limit: DEFAULT_STEP_LIMIT,
            capture_tree: false,
            rec_priority: RecPriority::Left,
        }
    }
}

enum Stop {
    Refuted,
    StepLimit,
}

struct IdNode {
    sigma: SigmaIds,
    goal: ClaimId,
    rule: RuleName,
    children: Vec<IdNode>,
}

struct Engine<'a, 'o> {
    graph: &'a TypeGraph,
    opts: &'a DeriveOptions,
    nodes: u64,
    max_context: usize,
    max_depth: usize,
    observer: Option<Observer<'o>>,
}

impl Engine<'_, '_> {
    fn select(&self, sigma: &[ClaimId], (t, u): ClaimId) -> Option<RuleName> {
        if sigma_contains(sigma, (t, u)) {
            return Some(RuleName::Assump);
        }
        let (ts, us) = (self.graph.shape(t), self.graph.shape(u));
        let (rl, rr) = (matches!(ts, Shape::Rec(_)), matches!(us, Shape::Rec(_)));
        match (self.opts.rec_priority, rl, rr) {
            (RecPriority::Left, true, _) | (RecPriority::Right, true, false) => {
                return Some(RuleName::RecL)
            }
            (_, _, true) => return Some(RuleName::RecR),
            _ => {}
        }
        match (ts, us) {
            (Shape::End, Shape::End) => Some(RuleName::End),
            (Shape::Input(..), Shape::Input(..)) => Some(RuleName::In),
            (Shape::Output(..), Shape::Output(..)) => Some(RuleName::Out),
            (Shape::Branch(a), Shape::Branch(b)) if alt_labels_subset(a, b) => Some(RuleName::Bra),
            (Shape::Select(a), Shape::Select(b)) if alt_labels_subset(b, a) => Some(RuleName::Sel),
            _ => None,
        }
    }

    fn expand(
        &mut self,
        sigma: &SigmaIds,
        goal: ClaimId,
        depth: usize,
    ) -> Result<Option<IdNode>, Stop> {
        self.nodes += 1;
        if self.nodes > self.opts.step_limit {
            return Err(Stop::StepLimit);
        }
        self.max_context = self.max_context.max(sigma.len());
        self.max_depth = self.max_depth.max(depth);
        if let Some(obs) = self.observer.as_mut() {
            obs(&Visit {
                graph: self.graph,
                sigma,
                goal,
                depth,
            });
        }

        let rule = self.select(sigma, goal).ok_or(Stop::Refuted)?;
        let g = self.graph;
        let (t, u) = goal;
        let mut children = Vec::new();
        let mut premise = |this: &mut Self, s: &SigmaIds, c: ClaimId| -> Result<(), Stop> {
            if let Some(node) = this.expand(s, c, depth + 1)? {
                children.push(node);
            }
            Ok(())
        };
        match rule {
            RuleName::Assump | RuleName::End => {}
            RuleName::RecL => {
                let Shape::Rec(next) = g.shape(t) else { unreachable!() };
                premise(self, &sigma_insert(sigma, goal), (*next, u))?;
            }
            RuleName::RecR => {
                let Shape::Rec(next) = g.shape(u) else { unreachable!() };
                premise(self, &sigma_insert(sigma, goal), (t, *next))?;
            }
            RuleName::In | RuleName::Out => {
                let (Shape::Input(ts, v) | Shape::Output(ts, v), Shape::Input(us, w) | Shape::Output(us, w)) =
                    (g.shape(t), g.shape(u))
                else {
                    unreachable!()
                };
                if ts.len() != us.len() {
                    return Err(Stop::Refuted);
                }
                for (&a, &b) in ts.iter().zip(us) {
                    let c = if rule == RuleName::In { (a, b) } else { (b, a) };
                    premise(self, sigma, c)?;
                }
                premise(self, sigma, (*v, *w))?;
            }
            RuleName::Bra => {
                let (Shape::Branch(a), Shape::Branch(b)) = (g.shape(t), g.shape(u)) else {
                    unreachable!()
                };
                for (l, s) in a {
                    let r = find_alt(b, l).expect("label inclusion checked by select");
                    premise(self, sigma, (*s, r))?;
                }
            }
            RuleName::Sel => {
                let (Shape::Select(a), Shape::Select(b)) = (g.shape(t), g.shape(u)) else {
                    unreachable!()
                };
                for (l, r) in b {
                    let s = find_alt(a, l).expect("label inclusion checked by select");
                    premise(self, sigma, (s, *r))?;
                }
            }
        }
        Ok(self.opts.capture_tree.then(|| IdNode {
            sigma: sigma.clone(),
            goal,
            rule,
            children,
        }))
    }
}

fn to_derivation(g: &TypeGraph, node: IdNode) -> DerivationNode {
    let judgement = Judgement::new(
        node.sigma.iter().map(|&c| Claim::from_graph(g, c)).collect(),
        Claim::from_graph(g, node.goal),
    );
    DerivationNode {
        judgement,
        rule: node.rule,
        children: node
            .children
            .into_iter()
            .map(|c| to_derivation(g, c))
            .collect(),
    }
}

/// Runs the inductive algorithm on `t <= u` with the default step limit.
pub fn derive(
    t: &SessionType,
    u: &SessionType,
    capture_tree: bool,
) -> Result<CheckReport, CheckError> {
    let opts = DeriveOptions {
        capture_tree,
        ..DeriveOptions::default()
    };
    derive_with(t, u, &opts)
}

pub fn derive_with(
    t: &SessionType,
    u: &SessionType,
    opts: &DeriveOptions,
) -> Result<CheckReport, CheckError> {
    run(t, u, opts, None)
}

/// Like [`derive_with`], calling `observer` on every expanded judgement in
/// depth-first order.
pub fn derive_observed(
    t: &SessionType,
    u: &SessionType,
    opts: &DeriveOptions,
    observer: Observer<'_>,
) -> Result<CheckReport, CheckError> {
    run(t, u, opts, Some(observer))
}

fn run(
    t: &SessionType,
    u: &SessionType,
    opts: &DeriveOptions,
    observer: Option<Observer<'_>>,
) -> Result<CheckReport, CheckError> {
    validate_pair(t, u)?;
    let start = Instant::now();
    let mut graph = TypeGraph::new();
    let root = (graph.add(t)?, graph.add(u)?);
    let graph = &graph;
    on_big_stack(move || {
        let mut engine = Engine {
            graph,
            opts,
            nodes: 0,
            max_context: 0,
            max_depth: 0,
            observer,
        };
        let outcome = engine.expand(&Rc::from(Vec::new()), root, 1);
        let (verdict, derivation) = match outcome {
            Ok(tree) => (Verdict::Subtype, tree.map(|n| to_derivation(graph, n))),
            Err(Stop::Refuted) => (Verdict::NotSubtype, None),
            Err(Stop::StepLimit) => {
                return Err(CheckError::StepLimit {
                    limit: opts.step_limit,
                })
            }
        };
        Ok(CheckReport {
            verdict,
            nodes_expanded: engine.nodes,
            memo_hits: 0,
            max_context: engine.max_context,
            max_depth: engine.max_depth,
            elapsed: start.elapsed(),
            derivation,
        })
    })
}

/// For every root-to-leaf path, the sequence of `(|sigma|, nd(lhs))` pairs.
pub fn path_measures(d: &DerivationNode) -> Vec<Vec<(usize, usize)>> {
    fn walk(d: &DerivationNode, prefix: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        prefix.push((
            d.judgement.sigma.len(),
            crate::syntax::nesting_depth(d.judgement.goal.lhs()),
        ));
        if d.children.is_empty() {
            out.push(prefix.clone());
        }
        for c in &d.children {
            walk(c, prefix, out);
        }
        prefix.pop();
    }
    let mut out = Vec::new();
    walk(d, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::parse;

    fn p(s: &str) -> SessionType {
        parse(s).unwrap()
    }

    fn j(t: &str, u: &str) -> Judgement {
        Judgement::root(&p(t), &p(u))
    }

    #[test]
    fn rule_selection() {
        assert_eq!(select_rule(&j("end", "end")), Some(RuleName::End));
        let goal = Claim::new(&p("rec X. ?[end].X"), &p("end"));
        let hit = Judgement::new(Context::new().with(goal.clone()), goal);
        assert_eq!(select_rule(&hit), Some(RuleName::Assump));
        let s = "rec X. ?[end].X";
        assert_eq!(select_rule(&j(s, s)), Some(RuleName::RecL));
        assert_eq!(
            select_rule_with(&j(s, s), RecPriority::Right),
            Some(RuleName::RecR)
        );
        assert_eq!(select_rule(&j("end", s)), Some(RuleName::RecR));
        assert_eq!(select_rule(&j("end", "?[end].end")), None);
        assert_eq!(select_rule(&j("&{a: end}", "&{a: end, b: end}")), Some(RuleName::Bra));
        assert_eq!(select_rule(&j("&{a: end, b: end}", "&{a: end}")), None);
        assert_eq!(select_rule(&j("+{a: end, b: end}", "+{a: end}")), Some(RuleName::Sel));
        assert_eq!(select_rule(&j("+{a: end}", "+{b: end}")), None);
    }

    #[test]
    fn input_premises_are_covariant() {
        let got = premises(&j("?[end].end", "?[end].end"), RuleName::In).unwrap();
        assert_eq!(got, vec![j("end", "end"), j("end", "end")]);
    }

    #[test]
    fn output_payloads_are_contravariant() {
        let got = premises(
            &j("![+{a: end, b: end}].end", "![+{a: end}].end"),
            RuleName::Out,
        )
        .unwrap();
        assert_eq!(got[0], j("+{a: end}", "+{a: end, b: end}"));
        assert_eq!(got[1], j("end", "end"));
    }

    #[test]
    fn rec_left_premise_extends_context() {
        let root = j("rec X. ?[end].X", "end");
        let got = premises(&root, RuleName::RecL).unwrap();
        let sigma = Context::new().with(root.goal.clone());
        assert_eq!(
            got,
            vec![Judgement::new(sigma, Claim::new(&p("?[end].rec X. ?[end].X"), &p("end")))]
        );
    }

    #[test]
    fn arity_mismatch_is_not_applicable() {
        let e = premises(&j("?[end, end].end", "?[end].end"), RuleName::In).unwrap_err();
        assert_eq!(e.rule, RuleName::In);
        let r = derive(&p("?[end, end].end"), &p("?[end].end"), false).unwrap();
        assert_eq!(r.verdict, Verdict::NotSubtype);
    }

    #[test]
    fn derive_examples() {
        let r = derive(&p("end"), &p("end"), false).unwrap();
        assert_eq!((r.verdict, r.nodes_expanded), (Verdict::Subtype, 1));
        let r = derive(&p("&{a: end}"), &p("&{a: end, b: end}"), false).unwrap();
        assert_eq!(r.verdict, Verdict::Subtype);
        let r = derive(&p("end"), &p("?[end].end"), false).unwrap();
        assert_eq!(r.verdict, Verdict::NotSubtype);
        assert!(r.derivation.is_none());
    }

    #[test]
    fn stream_against_its_unfolding() {
        // AS-RecL, then AS-In with an AS-End payload and an AS-RecR step on
        // the continuation, closed by AS-Assump after one more round.
        let r = derive(&p("rec X. ?[end].X"), &p("?[end].rec X. ?[end].X"), true).unwrap();
        assert_eq!(r.verdict, Verdict::Subtype);
        let d = r.derivation.unwrap();
        assert_eq!(d.rule, RuleName::RecL);
        assert_eq!(d.children[0].rule, RuleName::In);
        assert_eq!(d.node_count() as u64, r.nodes_expanded);
        let mut leaves = Vec::new();
        fn collect(d: &DerivationNode, out: &mut Vec<RuleName>) {
            if d.children.is_empty() {
                out.push(d.rule);
            }
            d.children.iter().for_each(|c| collect(c, out));
        }
        collect(&d, &mut leaves);
        assert!(leaves.iter().all(|r| matches!(r, RuleName::Assump | RuleName::End)));
        assert!(leaves.contains(&RuleName::Assump));
    }

    #[test]
    fn captured_children_match_premises() {
        let r = derive(
            &p("rec X. &{a: ?[X].end, b: end}"),
            &p("rec Y. &{a: ?[rec Z. &{a: ?[Z].end, b: end, c: end}].end, b: end, c: Y}"),
            true,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Subtype);
        fn check(d: &DerivationNode) {
            assert_eq!(select_rule(&d.judgement), Some(d.rule));
            let want = premises(&d.judgement, d.rule).unwrap();
            let got: Vec<_> = d.children.iter().map(|c| c.judgement.clone()).collect();
            assert_eq!(got, want);
            d.children.iter().for_each(check);
        }
        check(r.derivation.as_ref().unwrap());
    }

    #[test]
    fn measures_on_a_single_node() {
        let r = derive(&p("end"), &p("end"), true).unwrap();
        assert_eq!(path_measures(&r.derivation.unwrap()), vec![vec![(0, 1)]]);
    }

    #[test]
    fn measures_strictly_progress() {
        let s = p("rec X. ?[end].X");
        let d = derive(&s, &s, true).unwrap().derivation.unwrap();
        for path in path_measures(&d) {
            for w in path.windows(2) {
                let ((c0, n0), (c1, n1)) = (w[0], w[1]);
                assert!(c1 > c0 || (c1 == c0 && n1 < n0), "{path:?}");
            }
        }
    }

    #[test]
    fn step_limit_is_an_error() {
        let s = p("rec X. ?[end].X");
        let opts = DeriveOptions {
            step_limit: 2,
            ..DeriveOptions::default()
        };
        assert_eq!(
            derive_with(&s, &s, &opts).unwrap_err(),
            CheckError::StepLimit { limit: 2 }
        );
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let e = derive(&p("rec X. X"), &p("end"), false).unwrap_err();
        assert!(matches!(e, CheckError::Invalid { side: Side::Left, .. }));
        let e = derive(&p("end"), &p("?[Y].end"), false).unwrap_err();
        assert!(matches!(e, CheckError::Invalid { side: Side::Right, .. }));
    }

    #[test]
    fn observer_sees_every_expansion() {
        let s = p("rec X. ?[end].X");
        let mut seen = 0u64;
        let mut obs = |_: &Visit<'_>| seen += 1;
        let r = derive_observed(&s, &s, &DeriveOptions::default(), &mut obs).unwrap();
        assert_eq!(seen, r.nodes_expanded);
    }
}
