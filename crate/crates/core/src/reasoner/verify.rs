//! Independent check of a knot set against a knowledge base.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::datatypes::{dsat_over, value_in, Dsat};
use crate::dl::{neg, AboxFact, Concept, Kb, TBoxAxiom};

use super::{preprocess, ConceptType, Knot, KnotSet, ReasonerError, Successor};

fn supers(kb: &Kb, name: &str, role: bool) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([String::from(name)]);
    let mut changed = true;
    while changed {
        changed = false;
        for ax in &kb.tbox {
            let (a, b) = match (ax, role) {
                (TBoxAxiom::RoleIncl(a, b), true) | (TBoxAxiom::FeatureIncl(a, b), false) => (a, b),
                _ => continue,
            };
            if seen.contains(a) && !seen.contains(b) {
                seen.insert(b.clone());
                changed = true;
            }
        }
    }
    seen
}

fn disjoint(kb: &Kb, x: &str, y: &str, role: bool) -> bool {
    kb.tbox.iter().any(|ax| match (ax, role) {
        (TBoxAxiom::RoleDisj(a, b), true) | (TBoxAxiom::FeatureDisj(a, b), false) => {
            (a == x && b == y) || (a == y && b == x)
        }
        _ => false,
    })
}

fn has_disjoint_pair(kb: &Kb, names: &BTreeSet<String>, role: bool) -> bool {
    names.iter().any(|x| names.iter().any(|y| disjoint(kb, x, y, role)))
}

fn check_type(t: &ConceptType, kb: &Kb) -> Result<(), String> {
    let sig = &kb.signature;
    let has = |c: &Concept| *c == Concept::Top || t.concepts.contains(c);
    for c in &t.concepts {
        let n = neg(c, sig).map_err(|e| format!("{e}"))?;
        if *c == Concept::Bot || t.concepts.contains(&n) {
            return Err(format!("type holds {c} and its negation"));
        }
        match c {
            Concept::And(a, b) if !(has(a) && has(b)) => return Err(format!("conjunction {c} not decomposed")),
            Concept::Or(a, b) if !(has(a) || has(b)) => return Err(format!("disjunction {c} has no disjunct")),
            _ => {}
        }
    }
    for ax in &kb.tbox {
        if let TBoxAxiom::ConceptIncl(a, b) = ax {
            let na = neg(a, sig).map_err(|e| format!("{e}"))?;
            if !(has(&na) || has(b)) {
                return Err(format!("inclusion {ax} violated"));
            }
        }
    }
    if let Some(o) = &t.object {
        for fact in &kb.abox {
            if let AboxFact::Concept(n, x) = fact {
                if x == o && !t.concepts.contains(&Concept::name(n.clone())) {
                    return Err(format!("{fact} missing from the type of {o}"));
                }
            }
        }
    }
    Ok(())
}

/// Type conditions on the root and every leaf, plus the local knot
/// conditions. `kb` must be in the form produced by preprocessing.
pub fn knot_consistent(k: &Knot, kb: &Kb) -> Result<(), String> {
    check_type(&k.root, kb)?;
    let mut defined: BTreeSet<&str> = BTreeSet::new();
    for s in &k.successors {
        match s {
            Successor::Role { roles, leaf } => {
                check_type(leaf, kb)?;
                for r in roles {
                    if !supers(kb, r, true).is_subset(roles) {
                        return Err(format!("edge {roles:?} not closed under role inclusions"));
                    }
                }
                if has_disjoint_pair(kb, roles, true) {
                    return Err(format!("edge {roles:?} holds disjoint roles"));
                }
            }
            Successor::Feature { features, dtype, value } => {
                for f in features {
                    if !supers(kb, f, false).is_subset(features) {
                        return Err(format!("features {features:?} not closed under inclusions"));
                    }
                    if !defined.insert(f) {
                        return Err(format!("feature {f} has two values"));
                    }
                }
                if has_disjoint_pair(kb, features, false) {
                    return Err(format!("features {features:?} hold disjoint features"));
                }
                let Some(f) = features.iter().next() else { return Err("empty feature edge".into()) };
                let base = kb.signature.feature_type(f).map_err(|e| format!("{e}"))?;
                if !base.admits(value) || dtype.iter().any(|e| e.base() != base || value_in(e, value) != Ok(true)) {
                    return Err(format!("value {value} outside {dtype:?}"));
                }
                if !matches!(dsat_over(base, dtype.iter()), Dsat::Sat(_)) {
                    return Err("unsatisfiable feature edge".into());
                }
            }
        }
    }
    let feature_edges: Vec<_> = k
        .successors
        .iter()
        .filter_map(|s| match s {
            Successor::Feature { features, value, .. } => Some((features, value)),
            _ => None,
        })
        .collect();
    for (fa, va) in &feature_edges {
        for (fb, vb) in &feature_edges {
            if va == vb && fa.iter().any(|x| fb.iter().any(|y| disjoint(kb, x, y, false))) {
                return Err(format!("disjoint features share the value {va}"));
            }
        }
    }
    for c in &k.root.concepts {
        match c {
            Concept::Exists(r, d) => {
                let ok = k.successors.iter().any(|s| {
                    matches!(s, Successor::Role { roles, leaf } if roles.contains(r) && (**d == Concept::Top || leaf.concepts.contains(d)))
                });
                if !ok {
                    return Err(format!("{c} has no witness"));
                }
            }
            Concept::Forall(r, d) => {
                for s in &k.successors {
                    if let Successor::Role { roles, leaf } = s {
                        if roles.contains(r) && **d != Concept::Top && !leaf.concepts.contains(d) {
                            return Err(format!("{c} violated along an edge"));
                        }
                    }
                }
            }
            Concept::ExistsF(f, e) => {
                let ok = k.successors.iter().any(|s| {
                    matches!(s, Successor::Feature { features, dtype, .. } if features.contains(f) && dtype.contains(e))
                });
                if !ok {
                    return Err(format!("{c} has no value"));
                }
            }
            Concept::Undef(f) => {
                if k.value(f).is_some() {
                    return Err(format!("{c} but a value is present"));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Checks that `knots` witnesses satisfiability of `kb`.
pub fn verify(knots: &KnotSet, kb: &Kb) -> Result<(), String> {
    let kb = preprocess(kb).map_err(|e: ReasonerError| format!("{e}"))?;
    for k in &knots.knots {
        knot_consistent(k, &kb)?;
        for s in &k.successors {
            if let Successor::Role { leaf, .. } = s {
                if !knots.knots.iter().any(|k2| k2.root == *leaf) {
                    return Err("a leaf type has no knot".into());
                }
            }
        }
    }
    for o in kb.objects() {
        let n = knots.knots.iter().filter(|k| k.root.object.as_deref() == Some(&o)).count();
        if n != 1 {
            return Err(format!("object {o} has {n} knots"));
        }
    }
    for fact in &kb.abox {
        if let AboxFact::Role(r, a, b) = fact {
            let knot = knots.knots.iter().find(|k| k.root.object.as_deref() == Some(a.as_str())).expect("counted above");
            let ok = knot.successors.iter().any(|s| {
                matches!(s, Successor::Role { roles, leaf } if roles.contains(r) && leaf.object.as_deref() == Some(b.as_str()))
            });
            if !ok {
                return Err(format!("{fact} not realized"));
            }
        }
    }
    Ok(())
}
