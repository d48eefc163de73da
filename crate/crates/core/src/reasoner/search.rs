//! DPLL-style construction of knots.
//!
//! Each node carries a partial concept-type (a set of closure members that is
//! closed under the type conditions). Disjunctions, including internalized
//! inclusions, are branched on semantically; feature constraints are checked
//! eagerly; role successors are solved recursively with a cache. A demand
//! set that is still being solved is optimistically assumed satisfiable, so
//! cycles are resolved as a greatest fixpoint.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::datatypes::{complement, dsat_over, enumerate_small, DerivedDatatype, Dsat, Value};

use super::arena::{Arena, Id, Node};
use super::{ReasonerError, TraceEvent};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Label(Vec<u64>);

impl Label {
    fn new(n: usize) -> Self {
        Label(vec![0; n.div_ceil(64)])
    }

    pub fn has(&self, i: Id) -> bool {
        self.0[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: Id) {
        self.0[(i / 64) as usize] |= 1 << (i % 64);
    }

    pub fn iter(&self) -> impl Iterator<Item = Id> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| (w * 64 + b) as Id)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct FeatureClass {
    pub features: Vec<Id>,
    pub exprs: Vec<Id>,
    pub value: Value,
}

#[derive(Clone, Debug)]
pub(crate) struct NodeSolution {
    pub label: Label,
    /// Role-type and demand set of each anonymous successor.
    pub successors: Vec<(Vec<Id>, Vec<Id>)>,
    pub features: Vec<FeatureClass>,
}

/// A set of nodes solved together, linked by role edges (named objects).
pub(crate) struct Problem {
    pub n: usize,
    pub edges: Vec<(usize, usize, Vec<Id>)>,
    pub seeds: Vec<(usize, Id)>,
}

struct Frame {
    demand: Vec<Id>,
    min_dep: usize,
}

pub(crate) struct Search<'a> {
    pub ar: &'a Arena,
    dsat_memo: BTreeMap<Vec<Id>, Option<Value>>,
    feature_memo: BTreeMap<(Vec<(Id, Id)>, Vec<Id>), Option<Vec<FeatureClass>>>,
    sat_cache: BTreeSet<Vec<Id>>,
    nogoods: Vec<Vec<Id>>,
    stack: Vec<Frame>,
    pub solutions: BTreeMap<Vec<Id>, NodeSolution>,
    tentative: Vec<(Vec<Id>, usize)>,
    pub trace: Option<Vec<TraceEvent>>,
    next_trace_id: usize,
    reason: &'static str,
}

struct FeatureView {
    items: Vec<(Id, Id)>,
    undefs: Vec<Id>,
}

fn find(parent: &mut BTreeMap<Id, Id>, x: Id) -> Id {
    let p = *parent.get(&x).unwrap_or(&x);
    if p == x {
        return x;
    }
    let r = find(parent, p);
    parent.insert(x, r);
    r
}

impl<'a> Search<'a> {
    pub fn new(ar: &'a Arena, trace: bool) -> Self {
        Search {
            ar,
            dsat_memo: BTreeMap::new(),
            feature_memo: BTreeMap::new(),
            sat_cache: BTreeSet::new(),
            nogoods: Vec::new(),
            stack: Vec::new(),
            solutions: BTreeMap::new(),
            tentative: Vec::new(),
            trace: trace.then(Vec::new),
            next_trace_id: 0,
            reason: "clash",
        }
    }

    fn dsat(&mut self, exprs: &[Id]) -> Option<Value> {
        if let Some(v) = self.dsat_memo.get(exprs) {
            return v.clone();
        }
        let base = self.ar.exprs[exprs[0] as usize].base();
        let r = match dsat_over(base, exprs.iter().map(|&e| &self.ar.exprs[e as usize])) {
            Dsat::Sat(v) => Some(v),
            Dsat::Unsat => None,
        };
        self.dsat_memo.insert(exprs.to_vec(), r.clone());
        r
    }

    fn view(&self, label: &Label) -> FeatureView {
        let mut v = FeatureView { items: Vec::new(), undefs: Vec::new() };
        for c in label.iter() {
            match self.ar.nodes[c as usize] {
                Node::Some(f, e) => v.items.push((f, e)),
                Node::Undef(f) => v.undefs.push(f),
                _ => {}
            }
        }
        v
    }

    /// Value classes of the defined features, or `None` on a clash.
    fn features(&mut self, view: &FeatureView, extra: Option<Id>) -> Option<Vec<FeatureClass>> {
        let mut items = view.items.clone();
        let mut undefs = view.undefs.clone();
        if let Some(x) = extra {
            match self.ar.nodes[x as usize] {
                Node::Some(f, e) => items.push((f, e)),
                Node::Undef(f) => undefs.push(f),
                _ => {}
            }
        }
        items.sort();
        items.dedup();
        undefs.sort();
        undefs.dedup();
        let key = (items, undefs);
        if let Some(r) = self.feature_memo.get(&key) {
            return r.clone();
        }
        let r = self.compute_features(&key.0, &key.1);
        self.feature_memo.insert(key, r.clone());
        r
    }

    fn compute_features(&mut self, items: &[(Id, Id)], undefs: &[Id]) -> Option<Vec<FeatureClass>> {
        let ar = self.ar;
        let mut parent: BTreeMap<Id, Id> = BTreeMap::new();
        let mut defined = BTreeSet::new();
        for &(f, _) in items {
            for &g in &ar.feature_up[f as usize] {
                defined.insert(g);
                let (rf, rg) = (find(&mut parent, f), find(&mut parent, g));
                if rf != rg {
                    parent.insert(rf, rg);
                }
            }
        }
        if undefs.iter().any(|u| defined.contains(u)) {
            self.reason = "undefined feature has a value";
            return None;
        }
        let mut classes: BTreeMap<Id, (Vec<Id>, Vec<Id>)> = BTreeMap::new();
        for &g in &defined {
            let r = find(&mut parent, g);
            classes.entry(r).or_default().0.push(g);
        }
        for &(f, e) in items {
            let r = find(&mut parent, f);
            classes.get_mut(&r).unwrap().1.push(e);
        }
        let mut out = Vec::new();
        for (_, (features, mut exprs)) in classes {
            exprs.sort();
            exprs.dedup();
            if features.iter().any(|&f| features.iter().any(|&g| ar.feature_disj.contains(&(f, g)))) {
                self.reason = "disjoint features share a value";
                return None;
            }
            let Some(value) = self.dsat(&exprs) else {
                self.reason = "unsatisfiable datatype";
                return None;
            };
            out.push(FeatureClass { features, exprs, value });
        }
        if !self.separate(&mut out) {
            self.reason = "disjoint features forced to one value";
            return None;
        }
        Some(out)
    }

    /// Picks pairwise distinct values for classes linked by feature
    /// disjointness.
    fn separate(&mut self, classes: &mut [FeatureClass]) -> bool {
        let ar = self.ar;
        let n = classes.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i != j
                    && classes[i].features.iter().any(|&f| classes[j].features.iter().any(|&g| ar.feature_disj.contains(&(f, g))))
                {
                    adj[i].push(j);
                }
            }
        }
        let involved: Vec<usize> = (0..n).filter(|&i| !adj[i].is_empty()).collect();
        if involved.is_empty() {
            return true;
        }
        let limit = involved.len();
        let mut finite: Vec<(usize, Vec<Value>)> = Vec::new();
        let mut flexible = Vec::new();
        for &i in &involved {
            let base = ar.exprs[classes[i].exprs[0] as usize].base();
            match enumerate_small(base, classes[i].exprs.iter().map(|&e| &ar.exprs[e as usize]), limit) {
                Some(vals) => finite.push((i, vals)),
                None => flexible.push(i),
            }
        }
        let mut chosen: BTreeMap<usize, Value> = BTreeMap::new();
        fn assign(k: usize, finite: &[(usize, Vec<Value>)], adj: &[Vec<usize>], chosen: &mut BTreeMap<usize, Value>) -> bool {
            let Some((i, vals)) = finite.get(k) else { return true };
            for v in vals {
                if adj[*i].iter().all(|j| chosen.get(j) != Some(v)) {
                    chosen.insert(*i, v.clone());
                    if assign(k + 1, finite, adj, chosen) {
                        return true;
                    }
                    chosen.remove(i);
                }
            }
            false
        }
        if !assign(0, &finite, &adj, &mut chosen) {
            return false;
        }
        for i in flexible {
            let base = ar.exprs[classes[i].exprs[0] as usize].base();
            let taken: Vec<Value> = adj[i].iter().filter_map(|j| chosen.get(j).cloned()).filter(|v| base.admits(v)).collect();
            let avoid = complement(&DerivedDatatype::enumeration(base, taken).expect("values of the same datatype"));
            let exprs: Vec<&DerivedDatatype> =
                classes[i].exprs.iter().map(|&e| &ar.exprs[e as usize]).chain(core::iter::once(&avoid)).collect();
            match dsat_over(base, exprs) {
                Dsat::Sat(v) => {
                    chosen.insert(i, v);
                }
                Dsat::Unsat => return false,
            }
        }
        for (i, v) in chosen {
            classes[i].value = v;
        }
        true
    }

    fn falsified(&mut self, label: &Label, view: &FeatureView, c: Id) -> bool {
        if label.has(c) {
            return false;
        }
        if label.has(self.ar.negs[c as usize]) {
            return true;
        }
        match self.ar.nodes[c as usize] {
            Node::Bot => true,
            Node::And(a, b) => self.falsified(label, view, a) || self.falsified(label, view, b),
            Node::Or(a, b) => self.falsified(label, view, a) && self.falsified(label, view, b),
            Node::Some(..) | Node::Undef(_) => self.features(view, Some(c)).is_none(),
            Node::Exists(r, _) => self.ar.roles_disjoint(&self.ar.role_up[r as usize]),
            _ => false,
        }
    }

    /// Closes the labels under the type conditions; `false` on a clash.
    fn propagate(&mut self, prob: &Problem, labels: &mut [Label], mut queue: Vec<(usize, Id)>) -> bool {
        let ar = self.ar;
        loop {
            while let Some((i, c)) = queue.pop() {
                if labels[i].has(c) {
                    continue;
                }
                if matches!(ar.nodes[c as usize], Node::Bot) || labels[i].has(ar.negs[c as usize]) {
                    self.reason = "contradictory concepts";
                    return false;
                }
                labels[i].set(c);
                match ar.nodes[c as usize] {
                    Node::And(a, b) => {
                        queue.push((i, a));
                        queue.push((i, b));
                    }
                    Node::Forall(r, d) => {
                        for (a, b, roles) in &prob.edges {
                            if *a == i && roles.contains(&r) {
                                queue.push((*b, d));
                            }
                        }
                    }
                    Node::Exists(r, _) if ar.roles_disjoint(&ar.role_up[r as usize]) => {
                        self.reason = "disjoint roles";
                        return false;
                    }
                    _ => {}
                }
            }
            for i in 0..labels.len() {
                for ng in &self.nogoods {
                    let mut missing = ng.iter().filter(|&&c| !labels[i].has(c));
                    match (missing.next(), missing.next()) {
                        (None, _) => {
                            self.reason = "known unsatisfiable combination";
                            return false;
                        }
                        (Some(&m), None) if !labels[i].has(ar.negs[m as usize]) => queue.push((i, ar.negs[m as usize])),
                        _ => {}
                    }
                }
                if !queue.is_empty() {
                    break;
                }
                let view = self.view(&labels[i]);
                if self.features(&view, None).is_none() {
                    return false;
                }
                let ors: Vec<(Id, Id)> = labels[i]
                    .iter()
                    .filter_map(|c| match ar.nodes[c as usize] {
                        Node::Or(a, b) if !labels[i].has(a) && !labels[i].has(b) => Some((a, b)),
                        _ => None,
                    })
                    .collect();
                for (a, b) in ors {
                    let fa = self.falsified(&labels[i], &view, a);
                    let fb = self.falsified(&labels[i], &view, b);
                    match (fa, fb) {
                        (true, true) => {
                            self.reason = "no disjunct can hold";
                            return false;
                        }
                        (true, false) => queue.push((i, b)),
                        (false, true) => queue.push((i, a)),
                        _ => {}
                    }
                }
                if !queue.is_empty() {
                    break;
                }
            }
            if queue.is_empty() {
                return true;
            }
        }
    }

    fn branch(&self, labels: &[Label]) -> Option<(usize, Id, Id)> {
        for (i, l) in labels.iter().enumerate() {
            for c in l.iter() {
                if let Node::Or(a, b) = self.ar.nodes[c as usize] {
                    if !l.has(a) && !l.has(b) {
                        return Some((i, a, b));
                    }
                }
            }
        }
        None
    }

    fn successor_demand(&self, label: &Label, r: Id, c: Id) -> (Vec<Id>, Vec<Id>, Vec<Id>) {
        let up = self.ar.role_up[r as usize].clone();
        let mut demand = vec![c];
        let mut used = Vec::new();
        for x in label.iter() {
            if let Node::Forall(s, d) = self.ar.nodes[x as usize] {
                if up.contains(&s) {
                    demand.push(d);
                    used.push(x);
                }
            }
        }
        demand.sort();
        demand.dedup();
        (up, demand, used)
    }

    fn leaf(&mut self, labels: &[Label]) -> Result<Option<Vec<NodeSolution>>, ReasonerError> {
        let mut out = Vec::with_capacity(labels.len());
        for label in labels {
            let view = self.view(label);
            let Some(features) = self.features(&view, None) else { return Ok(None) };
            let mut successors = Vec::new();
            for x in label.iter() {
                if let Node::Exists(r, c) = self.ar.nodes[x as usize] {
                    let (up, demand, used) = self.successor_demand(label, r, c);
                    if !self.sat(&demand)? {
                        let mut ng: Vec<Id> = used;
                        ng.push(x);
                        ng.sort();
                        self.nogoods.push(ng);
                        self.reason = "unsatisfiable successor";
                        return Ok(None);
                    }
                    successors.push((up, demand));
                }
            }
            out.push(NodeSolution { label: label.clone(), successors, features });
        }
        Ok(Some(out))
    }

    pub fn solve(&mut self, prob: &Problem) -> Result<Option<Vec<NodeSolution>>, ReasonerError> {
        let mut first = vec![Label::new(self.ar.len()); prob.n];
        let mut queue: Vec<(usize, Id)> = prob.seeds.clone();
        for i in 0..prob.n {
            queue.extend(self.ar.universal.iter().map(|&u| (i, u)));
        }
        // Later pushes are popped first; keep seeds in natural order.
        queue.reverse();
        let mut stack = vec![(core::mem::take(&mut first), queue)];
        while let Some((mut labels, queue)) = stack.pop() {
            if !self.propagate(prob, &mut labels, queue) {
                continue;
            }
            match self.branch(&labels) {
                Some((i, a, b)) => {
                    let neg_a = self.ar.negs[a as usize];
                    stack.push((labels.clone(), vec![(i, neg_a), (i, b)]));
                    stack.push((labels, vec![(i, a)]));
                }
                None => {
                    if let Some(sol) = self.leaf(&labels)? {
                        return Ok(Some(sol));
                    }
                }
            }
        }
        Ok(None)
    }

    fn nogood_subset(&self, demand: &[Id]) -> bool {
        self.nogoods.iter().any(|ng| ng.iter().all(|c| demand.binary_search(c).is_ok()))
    }

    fn record(&mut self, demand: &[Id], result: Result<(), &'static str>) {
        if let Some(trace) = self.trace.as_mut() {
            let root = demand.iter().map(|&c| self.ar.trees[c as usize].to_string()).collect::<Vec<String>>();
            trace.push(TraceEvent { id: self.next_trace_id, root, verdict: result });
            self.next_trace_id += 1;
        }
    }

    /// Whether some node can carry every concept of `demand` (sorted).
    pub fn sat(&mut self, demand: &[Id]) -> Result<bool, ReasonerError> {
        if self.sat_cache.contains(demand) {
            return Ok(true);
        }
        if self.nogood_subset(demand) {
            return Ok(false);
        }
        if let Some(pos) = self.stack.iter().position(|f| f.demand == demand) {
            for f in &mut self.stack[pos + 1..] {
                f.min_dep = f.min_dep.min(pos);
            }
            return Ok(true);
        }
        let depth = self.stack.len();
        self.stack.push(Frame { demand: demand.to_vec(), min_dep: usize::MAX });
        let prob = Problem { n: 1, edges: Vec::new(), seeds: demand.iter().map(|&c| (0, c)).collect() };
        let result = self.solve(&prob);
        let frame = self.stack.pop().expect("frame pushed above");
        let result = result?;
        // Solutions that assumed this frame (or deeper ones) are settled now.
        let (settled, keep): (Vec<_>, Vec<_>) = self.tentative.drain(..).partition(|(_, d)| *d >= depth);
        self.tentative = keep;
        match result {
            None => {
                for (d, _) in settled {
                    self.solutions.remove(&d);
                }
                self.nogoods.push(demand.to_vec());
                let reason = self.reason;
                self.record(demand, Err(reason));
                Ok(false)
            }
            Some(mut sol) => {
                self.solutions.insert(demand.to_vec(), sol.remove(0));
                if frame.min_dep >= depth {
                    self.sat_cache.insert(demand.to_vec());
                } else {
                    self.tentative.push((demand.to_vec(), frame.min_dep));
                    if let Some(parent) = self.stack.last_mut() {
                        parent.min_dep = parent.min_dep.min(frame.min_dep);
                    }
                }
                self.record(demand, Ok(()));
                Ok(true)
            }
        }
    }
}
