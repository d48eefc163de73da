//! Knot-based satisfiability for ALCH(D) knowledge bases.
//!
//! A successful check returns the knot set it built, which [`verify`] can
//! re-check independently of the search.

mod arena;
mod search;
mod verify;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::datatypes::{DerivedDatatype, Value};
use crate::dl::{neg, nnf, AboxFact, Concept, DlError, Kb, TBoxAxiom};

use arena::{Arena, Id};
use search::{NodeSolution, Problem, Search};

pub use verify::{knot_consistent, verify};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReasonerError {
    #[error("closure exceeds the limit of {limit} concepts")]
    ClosureLimit { limit: usize },
    #[error(transparent)]
    Dl(#[from] DlError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReasonerOptions {
    pub closure_limit: usize,
    pub trace: bool,
}

impl Default for ReasonerOptions {
    fn default() -> Self {
        ReasonerOptions { closure_limit: 4096, trace: false }
    }
}

/// A set of closure concepts, possibly tied to a named object.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConceptType {
    pub concepts: BTreeSet<Concept>,
    pub object: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Successor {
    Role { roles: BTreeSet<String>, leaf: ConceptType },
    Feature { features: BTreeSet<String>, dtype: BTreeSet<DerivedDatatype>, value: Value },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Knot {
    pub root: ConceptType,
    pub successors: Vec<Successor>,
}

impl Knot {
    /// Value of `feature` at the root, if it has one.
    pub fn value(&self, feature: &str) -> Option<&Value> {
        self.successors.iter().find_map(|s| match s {
            Successor::Feature { features, value, .. } if features.contains(feature) => Some(value),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct KnotSet {
    pub knots: Vec<Knot>,
    /// Knot of the object introduced by a concept query.
    pub focus: Option<usize>,
}

impl KnotSet {
    pub fn focus(&self) -> Option<&Knot> {
        self.focus.map(|i| &self.knots[i])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(KnotSet),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn knots(&self) -> Option<&KnotSet> {
        match self {
            SatResult::Sat(k) => Some(k),
            SatResult::Unsat => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub id: usize,
    pub root: Vec<String>,
    pub verdict: Result<(), &'static str>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "knot {} root={{{}}} verdict=", self.id, self.root.join(", "))?;
        match self.verdict {
            Ok(()) => f.write_str("kept"),
            Err(reason) => write!(f, "eliminated({reason})"),
        }
    }
}

/// Normal form the search works on: concept inclusions in NNF and feature
/// assertions replaced by fresh concept names.
pub fn preprocess(kb: &Kb) -> Result<Kb, ReasonerError> {
    kb.check()?;
    let mut out = Kb { signature: kb.signature.clone(), tbox: Vec::new(), abox: Vec::new() };
    for ax in &kb.tbox {
        out.tbox.push(match ax {
            TBoxAxiom::ConceptIncl(a, b) => TBoxAxiom::ConceptIncl(nnf(a, &kb.signature)?, nnf(b, &kb.signature)?),
            other => other.clone(),
        });
    }
    for fact in &kb.abox {
        match fact {
            AboxFact::Feature(f, o, v) => {
                let dt = kb.signature.feature_type(f)?;
                let n = out.signature.fresh_concept("V");
                let e = DerivedDatatype::enumeration(dt, [v.clone()])
                    .map_err(|_| DlError::ValueType { feature: f.clone(), value: v.clone() })?;
                out.tbox.push(TBoxAxiom::ConceptIncl(Concept::name(n.clone()), Concept::some_value(f.clone(), e)));
                out.abox.push(AboxFact::Concept(n, o.clone()));
            }
            other => out.abox.push(other.clone()),
        }
    }
    Ok(out)
}

pub fn kb_satisfiable(kb: &Kb, opts: &ReasonerOptions) -> Result<SatResult, ReasonerError> {
    kb_satisfiable_traced(kb, opts).map(|(r, _)| r)
}

pub fn kb_satisfiable_traced(kb: &Kb, opts: &ReasonerOptions) -> Result<(SatResult, Vec<TraceEvent>), ReasonerError> {
    solve_focused(kb, None, opts)
}

fn solve_focused(
    kb: &Kb,
    focus: Option<&str>,
    opts: &ReasonerOptions,
) -> Result<(SatResult, Vec<TraceEvent>), ReasonerError> {
    let pre = preprocess(kb)?;
    let ar = Arena::build(&pre, opts.closure_limit)?;
    let objects: Vec<String> = pre.objects().into_iter().collect();
    let index: BTreeMap<&str, usize> = objects.iter().enumerate().map(|(i, o)| (o.as_str(), i)).collect();
    let mut edges: BTreeMap<(usize, usize), BTreeSet<Id>> = BTreeMap::new();
    let mut seeds = Vec::new();
    for fact in &pre.abox {
        match fact {
            AboxFact::Concept(n, o) => {
                let id = ar.id_of(&Concept::name(n.clone())).expect("ABox names are interned");
                seeds.push((index[o.as_str()], id));
            }
            AboxFact::Role(r, a, b) => {
                let e = edges.entry((index[a.as_str()], index[b.as_str()])).or_default();
                e.extend(ar.role_up[ar.role(r)? as usize].iter().copied());
            }
            AboxFact::Feature(..) => unreachable!("removed by preprocessing"),
        }
    }
    let edges: Vec<(usize, usize, Vec<Id>)> =
        edges.into_iter().map(|((a, b), roles)| (a, b, roles.into_iter().collect())).collect();
    let mut search = Search::new(&ar, opts.trace);
    if edges.iter().any(|(_, _, roles)| ar.roles_disjoint(roles)) {
        return Ok((SatResult::Unsat, search.trace.unwrap_or_default()));
    }
    let prob = Problem { n: objects.len(), edges, seeds };
    let solved = search.solve(&prob)?;
    let mut trace = search.trace.take().unwrap_or_default();
    let Some(named) = solved else {
        if opts.trace {
            let next = trace.len();
            trace.extend(objects.iter().enumerate().map(|(i, o)| TraceEvent {
                id: next + i,
                root: alloc::vec![format!("object {o}")],
                verdict: Err("no consistent assignment for named objects"),
            }));
        }
        return Ok((SatResult::Unsat, trace));
    };
    if opts.trace {
        let next = trace.len();
        trace.extend(objects.iter().enumerate().map(|(i, o)| TraceEvent {
            id: next + i,
            root: alloc::vec![format!("object {o}")],
            verdict: Ok(()),
        }));
    }
    let mut knots = build_knots(&ar, &search, &objects, &prob, &named);
    knots.focus = focus.and_then(|o| index.get(o).copied());
    Ok((SatResult::Sat(knots), trace))
}

fn concept_type(ar: &Arena, sol: &NodeSolution, object: Option<&str>) -> ConceptType {
    ConceptType {
        concepts: sol.label.iter().map(|c| ar.trees[c as usize].clone()).collect(),
        object: object.map(String::from),
    }
}

fn build_knots(ar: &Arena, search: &Search<'_>, objects: &[String], prob: &Problem, named: &[NodeSolution]) -> KnotSet {
    let role_names = |ids: &[Id]| ids.iter().map(|&r| ar.roles[r as usize].clone()).collect::<BTreeSet<String>>();
    let mut todo: Vec<&[Id]> = Vec::new();
    let mut seen: BTreeSet<&[Id]> = BTreeSet::new();
    let knot = |sol: &NodeSolution, object: Option<&str>, extra: Vec<Successor>| {
        let mut successors = extra;
        for (roles, demand) in &sol.successors {
            let leaf = &search.solutions[demand];
            successors.push(Successor::Role { roles: role_names(roles), leaf: concept_type(ar, leaf, None) });
        }
        for class in &sol.features {
            successors.push(Successor::Feature {
                features: class.features.iter().map(|&f| ar.features[f as usize].0.clone()).collect(),
                dtype: class.exprs.iter().map(|&e| ar.exprs[e as usize].clone()).collect(),
                value: class.value.clone(),
            });
        }
        Knot { root: concept_type(ar, sol, object), successors }
    };
    let mut out = KnotSet::default();
    for (i, sol) in named.iter().enumerate() {
        let extra = prob
            .edges
            .iter()
            .filter(|(a, _, _)| *a == i)
            .map(|(_, b, roles)| Successor::Role {
                roles: role_names(roles),
                leaf: concept_type(ar, &named[*b], Some(&objects[*b])),
            })
            .collect();
        out.knots.push(knot(sol, Some(&objects[i]), extra));
        for (_, d) in &sol.successors {
            if seen.insert(d) {
                todo.push(d);
            }
        }
    }
    while let Some(d) = todo.pop() {
        let sol = &search.solutions[d];
        let k = knot(sol, None, Vec::new());
        if !out.knots.contains(&k) {
            out.knots.push(k);
        }
        for (_, d) in &sol.successors {
            if seen.insert(d) {
                todo.push(d);
            }
        }
    }
    out
}

/// Satisfiability of `c` w.r.t. `kb`. The returned knot set is for the KB
/// extended with a fresh object `x#` whose knot is the focus.
pub fn concept_satisfiable(kb: &Kb, c: &Concept, opts: &ReasonerOptions) -> Result<SatResult, ReasonerError> {
    c.check(&kb.signature)?;
    let (ext, obj) = with_fresh_object(kb, c)?;
    solve_focused(&ext, Some(&obj), opts).map(|(r, _)| r)
}

/// The KB extended so that satisfiability means `c` has an instance.
pub fn with_fresh_object(kb: &Kb, c: &Concept) -> Result<(Kb, String), ReasonerError> {
    let mut ext = kb.clone();
    let n = ext.signature.fresh_concept("Q");
    let objects = kb.objects();
    let obj = (0..).map(|i| format!("x#{i}")).find(|o| !objects.contains(o)).expect("unbounded");
    ext.tbox.push(TBoxAxiom::ConceptIncl(Concept::name(n.clone()), nnf(c, &kb.signature)?));
    ext.abox.push(AboxFact::Concept(n, obj.clone()));
    Ok((ext, obj))
}

/// Whether `kb` entails `fact`.
pub fn instance_check(kb: &Kb, fact: &AboxFact, opts: &ReasonerOptions) -> Result<bool, ReasonerError> {
    fact.check(&kb.signature)?;
    let mut ext = kb.clone();
    match fact {
        AboxFact::Concept(n, o) => {
            let q = ext.signature.fresh_concept("Q");
            ext.tbox.push(TBoxAxiom::ConceptIncl(Concept::name(q.clone()), Concept::name(n.clone()).not()));
            ext.abox.push(AboxFact::Concept(q, o.clone()));
        }
        AboxFact::Feature(f, o, v) => {
            let dt = kb.signature.feature_type(f)?;
            let e = DerivedDatatype::enumeration(dt, [v.clone()])
                .map_err(|_| DlError::ValueType { feature: f.clone(), value: v.clone() })?;
            let q = ext.signature.fresh_concept("Q");
            let not_v = neg(&Concept::some_value(f.clone(), e), &kb.signature)?;
            ext.tbox.push(TBoxAxiom::ConceptIncl(Concept::name(q.clone()), not_v));
            ext.abox.push(AboxFact::Concept(q, o.clone()));
        }
        AboxFact::Role(r, a, b) => {
            let s = ext.signature.fresh_role("Q");
            ext.tbox.push(TBoxAxiom::RoleDisj(s.clone(), r.clone()));
            ext.abox.push(AboxFact::Role(s, a.clone(), b.clone()));
        }
    }
    Ok(!kb_satisfiable(&ext, opts)?.is_sat())
}
