//! Interned closed types for the checkers.
//!
//! Every judgement reachable from `T <= U` mentions only top-down subterms of
//! `T` and `U`, so the checkers work over a table of those subterms in
//! alpha-canonical form, each with its head shape resolved to table indices.
//! Unfolding a `rec` node is then an index lookup.

use std::collections::HashMap;

use crate::subterms::{unfold_once, SubtermError};
use crate::syntax::{alpha_canonical, nesting_depth, size, Label, SessionType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    End,
    /// Points at the one-step unfolding.
    Rec(TypeId),
    Input(Vec<TypeId>, TypeId),
    Output(Vec<TypeId>, TypeId),
    /// Alternatives sorted by label.
    Select(Vec<(Label, TypeId)>),
    Branch(Vec<(Label, TypeId)>),
}

#[derive(Debug, Default)]
pub struct TypeGraph {
    types: Vec<SessionType>,
    shapes: Vec<Shape>,
    depths: Vec<usize>,
    index: HashMap<SessionType, TypeId>,
    budget: usize,
}

impl TypeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a closed type and its whole top-down subterm closure.
    pub fn add(&mut self, t: &SessionType) -> Result<TypeId, SubtermError> {
        self.budget += 4 * size(t);
        let root = alpha_canonical(t);
        if let Some(&id) = self.index.get(&root) {
            return Ok(id);
        }
        let root_id = self.intern(root);
        let mut pending = vec![root_id];
        while let Some(id) = pending.pop() {
            let node = self.types[id.0 as usize].clone();
            let shape = match &node {
                SessionType::End => Shape::End,
                SessionType::Var(x) => return Err(SubtermError::Open(x.to_string())),
                s @ SessionType::Rec(..) => {
                    let next = unfold_once(s);
                    Shape::Rec(self.child(&next, &mut pending)?)
                }
                SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
                    let is_input = matches!(node, SessionType::Input(..));
                    let ps = ps
                        .iter()
                        .map(|p| self.child(p, &mut pending))
                        .collect::<Result<Vec<_>, _>>()?;
                    let k = self.child(k, &mut pending)?;
                    if is_input {
                        Shape::Input(ps, k)
                    } else {
                        Shape::Output(ps, k)
                    }
                }
                SessionType::Select(alts) | SessionType::Branch(alts) => {
                    let is_select = matches!(node, SessionType::Select(..));
                    let alts = alts
                        .iter()
                        .map(|(l, a)| Ok((l.clone(), self.child(a, &mut pending)?)))
                        .collect::<Result<Vec<_>, SubtermError>>()?;
                    if is_select {
                        Shape::Select(alts)
                    } else {
                        Shape::Branch(alts)
                    }
                }
            };
            self.shapes[id.0 as usize] = shape;
        }
        Ok(root_id)
    }

    fn intern(&mut self, canonical: SessionType) -> TypeId {
        let id = TypeId(self.types.len() as u32);
        self.depths.push(nesting_depth(&canonical));
        self.index.insert(canonical.clone(), id);
        self.types.push(canonical);
        self.shapes.push(Shape::End);
        id
    }

    fn child(
        &mut self,
        t: &SessionType,
        pending: &mut Vec<TypeId>,
    ) -> Result<TypeId, SubtermError> {
        let c = alpha_canonical(t);
        if let Some(&id) = self.index.get(&c) {
            return Ok(id);
        }
        if self.types.len() >= self.budget {
            return Err(SubtermError::IterationCap { cap: self.budget });
        }
        let id = self.intern(c);
        pending.push(id);
        Ok(id)
    }

    pub fn lookup(&self, t: &SessionType) -> Option<TypeId> {
        self.index.get(&alpha_canonical(t)).copied()
    }

    pub fn ty(&self, id: TypeId) -> &SessionType {
        &self.types[id.0 as usize]
    }

    pub fn shape(&self, id: TypeId) -> &Shape {
        &self.shapes[id.0 as usize]
    }

    pub fn nesting_depth(&self, id: TypeId) -> usize {
        self.depths[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}
