//! Interned closure of a preprocessed knowledge base.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::datatypes::{DerivedDatatype, PrimitiveDatatype};
use crate::dl::{neg, Concept, DlError, Kb, Signature, TBoxAxiom};

use super::ReasonerError;

pub(crate) type Id = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Node {
    Top,
    Bot,
    Atom(String),
    NegAtom(String),
    And(Id, Id),
    Or(Id, Id),
    Exists(Id, Id),
    Forall(Id, Id),
    Some(Id, Id),
    Undef(Id),
}

#[derive(Default)]
pub(crate) struct Arena {
    pub nodes: Vec<Node>,
    pub trees: Vec<Concept>,
    pub negs: Vec<Id>,
    index: BTreeMap<Concept, Id>,
    pub roles: Vec<String>,
    role_ix: BTreeMap<String, Id>,
    pub features: Vec<(String, PrimitiveDatatype)>,
    feature_ix: BTreeMap<String, Id>,
    pub exprs: Vec<DerivedDatatype>,
    expr_ix: BTreeMap<DerivedDatatype, Id>,
    /// Reflexive-transitive super-roles / super-features.
    pub role_up: Vec<Vec<Id>>,
    pub feature_up: Vec<Vec<Id>>,
    pub role_disj: BTreeSet<(Id, Id)>,
    pub feature_disj: BTreeSet<(Id, Id)>,
    /// Internalized concept inclusions.
    pub universal: Vec<Id>,
}

fn up_closure(n: usize, edges: &[(Id, Id)]) -> Vec<Vec<Id>> {
    let mut out = Vec::with_capacity(n);
    for start in 0..n as Id {
        let mut seen = BTreeSet::from([start]);
        let mut todo = alloc::vec![start];
        while let Some(x) = todo.pop() {
            for &(a, b) in edges {
                if a == x && seen.insert(b) {
                    todo.push(b);
                }
            }
        }
        out.push(seen.into_iter().collect());
    }
    out
}

impl Arena {
    pub fn build(kb: &Kb, limit: usize) -> Result<Arena, ReasonerError> {
        let mut a = Arena::default();
        for r in &kb.signature.roles {
            a.role_ix.insert(r.clone(), a.roles.len() as Id);
            a.roles.push(r.clone());
        }
        for (f, dt) in &kb.signature.features {
            a.feature_ix.insert(f.clone(), a.features.len() as Id);
            a.features.push((f.clone(), *dt));
        }
        let (mut role_edges, mut feature_edges) = (Vec::new(), Vec::new());
        for ax in &kb.tbox {
            match ax {
                TBoxAxiom::ConceptIncl(c1, c2) => {
                    let u = neg(c1, &kb.signature)?.or(c2.clone());
                    let id = a.intern(&u, &kb.signature)?;
                    if !a.universal.contains(&id) {
                        a.universal.push(id);
                    }
                }
                TBoxAxiom::RoleIncl(r, s) => role_edges.push((a.role(r)?, a.role(s)?)),
                TBoxAxiom::FeatureIncl(f, g) => feature_edges.push((a.feature(f)?, a.feature(g)?)),
                TBoxAxiom::RoleDisj(r, s) => {
                    let (r, s) = (a.role(r)?, a.role(s)?);
                    a.role_disj.insert((r, s));
                    a.role_disj.insert((s, r));
                }
                TBoxAxiom::FeatureDisj(f, g) => {
                    let (f, g) = (a.feature(f)?, a.feature(g)?);
                    a.feature_disj.insert((f, g));
                    a.feature_disj.insert((g, f));
                }
            }
        }
        for fact in &kb.abox {
            if let crate::dl::AboxFact::Concept(n, _) = fact {
                a.intern(&Concept::name(n.clone()), &kb.signature)?;
            }
        }
        a.role_up = up_closure(a.roles.len(), &role_edges);
        a.feature_up = up_closure(a.features.len(), &feature_edges);
        a.close(&kb.signature, limit)?;
        Ok(a)
    }

    pub fn role(&self, r: &str) -> Result<Id, DlError> {
        self.role_ix.get(r).copied().ok_or_else(|| DlError::UnknownRole(r.into()))
    }

    pub fn feature(&self, f: &str) -> Result<Id, DlError> {
        self.feature_ix.get(f).copied().ok_or_else(|| DlError::UnknownFeature(f.into()))
    }

    pub fn id_of(&self, c: &Concept) -> Option<Id> {
        self.index.get(c).copied()
    }

    fn expr(&mut self, e: &DerivedDatatype) -> Id {
        if let Some(&id) = self.expr_ix.get(e) {
            return id;
        }
        let id = self.exprs.len() as Id;
        self.exprs.push(e.clone());
        self.expr_ix.insert(e.clone(), id);
        id
    }

    pub fn intern(&mut self, c: &Concept, sig: &Signature) -> Result<Id, ReasonerError> {
        if let Some(&id) = self.index.get(c) {
            return Ok(id);
        }
        let node = match c {
            Concept::Top => Node::Top,
            Concept::Bot => Node::Bot,
            Concept::Name(n) => Node::Atom(n.clone()),
            Concept::Not(inner) => match &**inner {
                Concept::Name(n) => Node::NegAtom(n.clone()),
                other => {
                    let n = crate::dl::nnf(&other.clone().not(), sig)?;
                    return self.intern(&n, sig);
                }
            },
            Concept::And(x, y) => Node::And(self.intern(x, sig)?, self.intern(y, sig)?),
            Concept::Or(x, y) => Node::Or(self.intern(x, sig)?, self.intern(y, sig)?),
            Concept::Exists(r, x) => Node::Exists(self.role(r)?, self.intern(x, sig)?),
            Concept::Forall(r, x) => Node::Forall(self.role(r)?, self.intern(x, sig)?),
            Concept::ExistsF(f, e) => Node::Some(self.feature(f)?, self.expr(e)),
            Concept::Undef(f) => Node::Undef(self.feature(f)?),
        };
        let id = self.nodes.len() as Id;
        self.nodes.push(node);
        self.trees.push(c.clone());
        self.index.insert(c.clone(), id);
        Ok(id)
    }

    /// Adds `∼C` for every member until the set is closed.
    fn close(&mut self, sig: &Signature, limit: usize) -> Result<(), ReasonerError> {
        let mut i = 0;
        while i < self.nodes.len() {
            if self.nodes.len() > limit {
                return Err(ReasonerError::ClosureLimit { limit });
            }
            let n = neg(&self.trees[i].clone(), sig)?;
            let id = self.intern(&n, sig)?;
            self.negs.push(id);
            i += 1;
        }
        if self.nodes.len() > limit {
            return Err(ReasonerError::ClosureLimit { limit });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn roles_disjoint(&self, roles: &[Id]) -> bool {
        roles.iter().any(|&r| roles.iter().any(|&s| self.role_disj.contains(&(r, s))))
    }
}
