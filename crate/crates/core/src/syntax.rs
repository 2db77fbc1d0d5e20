//! The session-type AST: structural metrics, free variables, capture-avoiding
//! substitution and alpha-canonical forms.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Words that the text grammar reserves and that therefore cannot name a
/// recursion variable.
pub const KEYWORDS: [&str; 2] = ["end", "rec"];

/// Prefix used for binders introduced by [`alpha_canonical`].
pub const CANONICAL_PREFIX: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("identifier is empty")]
    Empty,
    #[error("`{0}` is not of the form [A-Za-z_][A-Za-z0-9_]*")]
    BadLexeme(String),
    #[error("`{0}` is a reserved keyword")]
    Keyword(String),
}

fn check_lexeme(name: &str) -> Result<(), NameError> {
    let mut chars = name.chars();
    match chars.next() {
        None => return Err(NameError::Empty),
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        Some(_) => return Err(NameError::BadLexeme(name.to_string())),
    }
    if chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(())
    } else {
        Err(NameError::BadLexeme(name.to_string()))
    }
}

/// A recursion variable name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ident(String);

impl Ident {
    pub fn new(name: impl Into<String>) -> Result<Self, NameError> {
        let name = name.into();
        check_lexeme(&name)?;
        if KEYWORDS.contains(&name.as_str()) {
            return Err(NameError::Keyword(name));
        }
        Ok(Ident(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn generated(name: String) -> Self {
        debug_assert!(check_lexeme(&name).is_ok());
        Ident(name)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A choice label. Labels share the identifier lexeme but may coincide with
/// keywords, since their position in the grammar is unambiguous.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Self, NameError> {
        let name = name.into();
        check_lexeme(&name)?;
        Ok(Label(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A binary session type with equi-recursive `rec` binders.
///
/// Derived equality is structural identity. Use [`alpha_equal`] to compare
/// up to renaming of bound variables and reordering of choice labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SessionType {
    End,
    Var(Ident),
    Rec(Ident, Box<SessionType>),
    /// `?[T1, ..., Tn].S`
    Input(Vec<SessionType>, Box<SessionType>),
    /// `![T1, ..., Tn].S`
    Output(Vec<SessionType>, Box<SessionType>),
    /// `+{l1: T1, ..., ln: Tn}`
    Select(Vec<(Label, SessionType)>),
    /// `&{l1: T1, ..., ln: Tn}`
    Branch(Vec<(Label, SessionType)>),
}

/// Shorthand constructors. These panic on malformed names and are meant for
/// building fixed terms in code; parse text with [`crate::textio::parse`].
impl SessionType {
    pub fn var(name: &str) -> Self {
        SessionType::Var(Ident::new(name).expect("valid identifier"))
    }

    pub fn rec(binder: &str, body: SessionType) -> Self {
        SessionType::Rec(Ident::new(binder).expect("valid identifier"), Box::new(body))
    }

    pub fn input(payloads: Vec<SessionType>, cont: SessionType) -> Self {
        SessionType::Input(payloads, Box::new(cont))
    }

    pub fn output(payloads: Vec<SessionType>, cont: SessionType) -> Self {
        SessionType::Output(payloads, Box::new(cont))
    }

    pub fn select(alts: Vec<(&str, SessionType)>) -> Self {
        SessionType::Select(labelled(alts))
    }

    pub fn branch(alts: Vec<(&str, SessionType)>) -> Self {
        SessionType::Branch(labelled(alts))
    }

    pub fn is_rec(&self) -> bool {
        matches!(self, SessionType::Rec(..))
    }
}

fn labelled(alts: Vec<(&str, SessionType)>) -> Vec<(Label, SessionType)> {
    alts.into_iter()
        .map(|(l, t)| (Label::new(l).expect("valid label"), t))
        .collect()
}

impl fmt::Display for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::textio::print(self))
    }
}

/// Node count: leaves count 1, every binder or constructor adds 1 to the sum
/// of its children (payloads, continuation and alternatives alike).
pub fn size(t: &SessionType) -> usize {
    match t {
        SessionType::End | SessionType::Var(_) => 1,
        SessionType::Rec(_, body) => 1 + size(body),
        SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
            1 + ps.iter().map(size).sum::<usize>() + size(k)
        }
        SessionType::Select(alts) | SessionType::Branch(alts) => {
            1 + alts.iter().map(|(_, t)| size(t)).sum::<usize>()
        }
    }
}

/// Nesting depth, the decreasing component of the inductive checker's
/// termination measure.
pub fn nesting_depth(t: &SessionType) -> usize {
    match t {
        SessionType::End | SessionType::Var(_) => 1,
        SessionType::Rec(_, body) => nesting_depth(body) + 1,
        SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
            ps.iter()
                .map(nesting_depth)
                .chain(std::iter::once(nesting_depth(k)))
                .max()
                .unwrap_or(0)
                + 1
        }
        SessionType::Select(alts) | SessionType::Branch(alts) => {
            alts.iter().map(|(_, t)| nesting_depth(t)).max().unwrap_or(0) + 1
        }
    }
}

pub fn free_vars(t: &SessionType) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free<'a>(t: &'a SessionType, bound: &mut Vec<&'a Ident>, out: &mut BTreeSet<Ident>) {
    match t {
        SessionType::End => {}
        SessionType::Var(x) => {
            if !bound.contains(&x) {
                out.insert(x.clone());
            }
        }
        SessionType::Rec(x, body) => {
            bound.push(x);
            collect_free(body, bound, out);
            bound.pop();
        }
        SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
            for p in ps {
                collect_free(p, bound, out);
            }
            collect_free(k, bound, out);
        }
        SessionType::Select(alts) | SessionType::Branch(alts) => {
            for (_, a) in alts {
                collect_free(a, bound, out);
            }
        }
    }
}

fn occurs_free(t: &SessionType, x: &Ident) -> bool {
    match t {
        SessionType::End => false,
        SessionType::Var(y) => y == x,
        SessionType::Rec(y, body) => y != x && occurs_free(body, x),
        SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
            ps.iter().any(|p| occurs_free(p, x)) || occurs_free(k, x)
        }
        SessionType::Select(alts) | SessionType::Branch(alts) => {
            alts.iter().any(|(_, a)| occurs_free(a, x))
        }
    }
}

/// Picks `base_1`, `base_2`, ... until the name is not in `avoid`.
fn fresh_ident(base: &Ident, avoid: &BTreeSet<Ident>) -> Ident {
    (1..)
        .map(|n| Ident::generated(format!("{}_{}", base.as_str(), n)))
        .find(|cand| !avoid.contains(cand))
        .expect("unbounded supply of names")
}

/// Capture-avoiding substitution `t[q/x]`.
///
/// A binder `Y` that occurs free in `q` is renamed to a fresh `Y_n` before the
/// substitution descends under it. Substitution stops at a binder for `x`.
pub fn substitute(t: &SessionType, x: &Ident, q: &SessionType) -> SessionType {
    let fv_q = free_vars(q);
    subst(t, x, q, &fv_q)
}

fn subst(t: &SessionType, x: &Ident, q: &SessionType, fv_q: &BTreeSet<Ident>) -> SessionType {
    if !occurs_free(t, x) {
        return t.clone();
    }
    match t {
        SessionType::End => SessionType::End,
        SessionType::Var(y) => {
            if y == x {
                q.clone()
            } else {
                t.clone()
            }
        }
        SessionType::Rec(y, body) => {
            // y != x here, otherwise x would not occur free.
            if fv_q.contains(y) {
                let mut avoid = fv_q.clone();
                avoid.extend(free_vars(body));
                avoid.insert(x.clone());
                let fresh = fresh_ident(y, &avoid);
                let renamed = substitute(body, y, &SessionType::Var(fresh.clone()));
                SessionType::Rec(fresh, Box::new(subst(&renamed, x, q, fv_q)))
            } else {
                SessionType::Rec(y.clone(), Box::new(subst(body, x, q, fv_q)))
            }
        }
        SessionType::Input(ps, k) => SessionType::Input(
            ps.iter().map(|p| subst(p, x, q, fv_q)).collect(),
            Box::new(subst(k, x, q, fv_q)),
        ),
        SessionType::Output(ps, k) => SessionType::Output(
            ps.iter().map(|p| subst(p, x, q, fv_q)).collect(),
            Box::new(subst(k, x, q, fv_q)),
        ),
        SessionType::Select(alts) => SessionType::Select(
            alts.iter()
                .map(|(l, a)| (l.clone(), subst(a, x, q, fv_q)))
                .collect(),
        ),
        SessionType::Branch(alts) => SessionType::Branch(
            alts.iter()
                .map(|(l, a)| (l.clone(), subst(a, x, q, fv_q)))
                .collect(),
        ),
    }
}

/// Canonical representative of the alpha-equivalence class of `t`.
///
/// Choice alternatives are sorted by label, then binders are renamed to
/// `_0`, `_1`, ... in leftmost-outermost order. Counter values whose name is
/// already a free variable of `t` are skipped. Free variables keep their names.
pub fn alpha_canonical(t: &SessionType) -> SessionType {
    let free = free_vars(t);
    let mut canon = Canonicalizer {
        free,
        next: 0,
        env: Vec::new(),
    };
    canon.walk(t)
}

struct Canonicalizer {
    free: BTreeSet<Ident>,
    next: usize,
    env: Vec<(Ident, Ident)>,
}

impl Canonicalizer {
    fn fresh(&mut self) -> Ident {
        loop {
            let cand = Ident::generated(format!("{}{}", CANONICAL_PREFIX, self.next));
            self.next += 1;
            if !self.free.contains(&cand) {
                return cand;
            }
        }
    }

    fn walk(&mut self, t: &SessionType) -> SessionType {
        match t {
            SessionType::End => SessionType::End,
            SessionType::Var(x) => match self.env.iter().rev().find(|(from, _)| from == x) {
                Some((_, to)) => SessionType::Var(to.clone()),
                None => SessionType::Var(x.clone()),
            },
            SessionType::Rec(x, body) => {
                let name = self.fresh();
                self.env.push((x.clone(), name.clone()));
                let body = self.walk(body);
                self.env.pop();
                SessionType::Rec(name, Box::new(body))
            }
            SessionType::Input(ps, k) => {
                let ps = ps.iter().map(|p| self.walk(p)).collect();
                SessionType::Input(ps, Box::new(self.walk(k)))
            }
            SessionType::Output(ps, k) => {
                let ps = ps.iter().map(|p| self.walk(p)).collect();
                SessionType::Output(ps, Box::new(self.walk(k)))
            }
            SessionType::Select(alts) => SessionType::Select(self.walk_alts(alts)),
            SessionType::Branch(alts) => SessionType::Branch(self.walk_alts(alts)),
        }
    }

    fn walk_alts(&mut self, alts: &[(Label, SessionType)]) -> Vec<(Label, SessionType)> {
        let mut sorted: Vec<&(Label, SessionType)> = alts.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        sorted
            .into_iter()
            .map(|(l, a)| (l.clone(), self.walk(a)))
            .collect()
    }
}

pub fn alpha_equal(t: &SessionType, u: &SessionType) -> bool {
    alpha_canonical(t) == alpha_canonical(u)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonContractive { binder: Ident },
    DuplicateLabel { label: Label },
    EmptyPayloads,
    EmptyAlternatives,
    FreeVariable { name: Ident },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonContractive { binder } => write!(
                f,
                "non-contractive: `{binder}` occurs without an input, output, select or branch above it"
            ),
            Violation::DuplicateLabel { label } => write!(f, "duplicate label `{label}`"),
            Violation::EmptyPayloads => f.write_str("message with no payloads"),
            Violation::EmptyAlternatives => f.write_str("choice with no alternatives"),
            Violation::FreeVariable { name } => write!(f, "unbound variable `{name}`"),
        }
    }
}

/// The first invariant violation found in a preorder walk, with the path from
/// the root to the offending node (e.g. `$.rec.in.payload[0]`).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{violation} at {path}")]
pub struct ValidationError {
    pub violation: Violation,
    pub path: String,
}

/// Checks the structural invariants: contractivity, nonempty payload and
/// alternative lists, distinct labels. Free variables are allowed.
pub fn validate(t: &SessionType) -> Result<(), ValidationError> {
    let mut path = String::from("$");
    check_node(t, &mut path)
}

/// [`validate`] plus closedness, for entry points that take whole types.
pub fn validate_closed(t: &SessionType) -> Result<(), ValidationError> {
    validate(t)?;
    let mut path = String::from("$");
    check_closed(t, &mut Vec::new(), &mut path)
}

fn with_segment<R>(path: &mut String, seg: &str, f: impl FnOnce(&mut String) -> R) -> R {
    let len = path.len();
    path.push('.');
    path.push_str(seg);
    let r = f(path);
    path.truncate(len);
    r
}

/// True when every free occurrence of `x` in `t` sits beneath a message or
/// choice constructor.
fn guarded(t: &SessionType, x: &Ident) -> bool {
    match t {
        SessionType::Var(y) => y != x,
        SessionType::Rec(y, body) => y == x || guarded(body, x),
        _ => true,
    }
}

fn check_node(t: &SessionType, path: &mut String) -> Result<(), ValidationError> {
    let fail = |violation, path: &String| {
        Err(ValidationError {
            violation,
            path: path.clone(),
        })
    };
    match t {
        SessionType::End | SessionType::Var(_) => Ok(()),
        SessionType::Rec(x, body) => {
            if !guarded(body, x) {
                return fail(Violation::NonContractive { binder: x.clone() }, path);
            }
            with_segment(path, "rec", |p| check_node(body, p))
        }
        SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
            let tag = if matches!(t, SessionType::Input(..)) { "in" } else { "out" };
            if ps.is_empty() {
                return fail(Violation::EmptyPayloads, path);
            }
            with_segment(path, tag, |p| {
                for (i, payload) in ps.iter().enumerate() {
                    with_segment(p, &format!("payload[{i}]"), |p| check_node(payload, p))?;
                }
                with_segment(p, "cont", |p| check_node(k, p))
            })
        }
        SessionType::Select(alts) | SessionType::Branch(alts) => {
            let tag = if matches!(t, SessionType::Select(..)) { "sel" } else { "bra" };
            if alts.is_empty() {
                return fail(Violation::EmptyAlternatives, path);
            }
            let mut seen = BTreeSet::new();
            for (l, _) in alts {
                if !seen.insert(l) {
                    return fail(Violation::DuplicateLabel { label: l.clone() }, path);
                }
            }
            with_segment(path, tag, |p| {
                for (l, a) in alts {
                    with_segment(p, l.as_str(), |p| check_node(a, p))?;
                }
                Ok(())
            })
        }
    }
}

fn check_closed<'a>(
    t: &'a SessionType,
    bound: &mut Vec<&'a Ident>,
    path: &mut String,
) -> Result<(), ValidationError> {
    match t {
        SessionType::End => Ok(()),
        SessionType::Var(x) => {
            if bound.contains(&x) {
                Ok(())
            } else {
                Err(ValidationError {
                    violation: Violation::FreeVariable { name: x.clone() },
                    path: path.clone(),
                })
            }
        }
        SessionType::Rec(x, body) => {
            bound.push(x);
            let r = with_segment(path, "rec", |p| check_closed(body, bound, p));
            bound.pop();
            r
        }
        SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
            let tag = if matches!(t, SessionType::Input(..)) { "in" } else { "out" };
            with_segment(path, tag, |p| {
                for (i, payload) in ps.iter().enumerate() {
                    with_segment(p, &format!("payload[{i}]"), |p| check_closed(payload, bound, p))?;
                }
                with_segment(p, "cont", |p| check_closed(k, bound, p))
            })
        }
        SessionType::Select(alts) | SessionType::Branch(alts) => {
            let tag = if matches!(t, SessionType::Select(..)) { "sel" } else { "bra" };
            with_segment(path, tag, |p| {
                for (l, a) in alts {
                    with_segment(p, l.as_str(), |p| check_closed(a, bound, p))?;
                }
                Ok(())
            })
        }
    }
}
