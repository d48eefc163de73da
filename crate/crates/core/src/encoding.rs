//! Decision knowledge bases and their compilation into ALCH(D).
//!
//! Every input datum `P` becomes a feature `P`; every table column `a` of
//! table `M` becomes the feature `M.a`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::datatypes::{DerivedDatatype, PrimitiveDatatype, Value};
use crate::dl::{AboxFact, Concept, DlError, Kb, Signature, TBoxAxiom};
use crate::dmn::{Attr, DecisionTable, DmnError, Drg, Flow, RuleOrder};
use crate::sfeel::SFeelCondition;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dkb {
    pub signature: Signature,
    pub background: Vec<TBoxAxiom>,
    pub drg: Drg,
    pub bridge: String,
    pub abox: Vec<AboxFact>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EncodingError {
    #[error(transparent)]
    Dl(#[from] DlError),
    #[error("invalid decision graph: {}", join(.0))]
    Drg(Vec<DmnError>),
    #[error("free input {name} is {drg} in the decision graph but {signature} in the ontology")]
    FreeInputType { name: String, drg: PrimitiveDatatype, signature: PrimitiveDatatype },
    #[error("free input {0} clashes with a concept or role of the ontology")]
    FreeInputKind(String),
    #[error("bound attribute {0} also occurs in the ontology signature")]
    BoundAttribute(String),
    #[error("bridge concept {0} is not declared")]
    UnknownBridge(String),
}

fn join(errors: &[DmnError]) -> String {
    errors.iter().map(|e| format!("{e}")).collect::<Vec<_>>().join("; ")
}

/// Feature name of a DRG attribute.
pub fn feature_name(a: &Attr) -> String {
    match a {
        Attr::Datum(n) => n.clone(),
        Attr::Column { table, attr } => mangle(table, attr),
    }
}

pub fn mangle(table: &str, attr: &str) -> String {
    format!("{table}.{attr}")
}

pub fn validate_dkb(d: &Dkb) -> Result<(), Vec<EncodingError>> {
    let mut errors = Vec::new();
    if let Err(e) = d.drg.validate() {
        errors.push(EncodingError::Drg(e));
    }
    if !d.signature.concepts.contains(&d.bridge) {
        errors.push(EncodingError::UnknownBridge(d.bridge.clone()));
    }
    for a in d.drg.free_inputs() {
        let name = feature_name(&a);
        let Some(dt) = d.drg.attr_type(&a) else { continue };
        if let Some(&sig_dt) = d.signature.features.get(&name) {
            if sig_dt != dt {
                errors.push(EncodingError::FreeInputType { name, drg: dt, signature: sig_dt });
            }
        } else if d.signature.contains(&name) {
            errors.push(EncodingError::FreeInputKind(name));
        }
    }
    for a in d.drg.bound_attrs() {
        let name = feature_name(&a);
        if d.signature.contains(&name) {
            errors.push(EncodingError::BoundAttribute(name));
        }
    }
    for ax in &d.background {
        if let Err(e) = ax.check(&d.signature) {
            errors.push(e.into());
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// `ρ^{P,D}(φ)`: `⊤` for `-`, otherwise `∃P.E` with `E` the value set of `φ`.
pub fn rho(feature: &str, dt: PrimitiveDatatype, c: &SFeelCondition) -> Concept {
    match c {
        SFeelCondition::Any => Concept::Top,
        c => Concept::some_value(feature, c.to_derived(dt)),
    }
}

/// Conjunction of the rule's input conditions.
pub fn rho_if(table: &DecisionTable, rule: usize) -> Concept {
    let r = &table.rules[rule];
    Concept::and_all(table.inputs.iter().map(|c| {
        let cond = r.inputs.get(&c.name).unwrap_or(&SFeelCondition::Any);
        rho(&mangle(&table.name, &c.name), c.datatype, cond)
    }))
}

/// Conjunction of `∃M.b.{v}` over the rule's outputs.
pub fn rho_then(table: &DecisionTable, rule: usize) -> Concept {
    let r = &table.rules[rule];
    Concept::and_all(
        table
            .outputs
            .iter()
            .filter_map(|c| Some(value_concept(&mangle(&table.name, &c.name), c.datatype, r.outputs.get(&c.name)?.clone()))),
    )
}

/// `∃F.{v}`.
pub fn value_concept(feature: &str, dt: PrimitiveDatatype, v: Value) -> Concept {
    Concept::some_value(feature, DerivedDatatype::enumeration(dt, [v]).expect("value typed by its attribute"))
}

/// `ρ(If_r) ⊓ ⨅_{r2 ≺ r} ¬ρ(If_r2)`: the rule fires.
pub fn firing_condition(table: &DecisionTable, rule: usize, order: &RuleOrder) -> Concept {
    Concept::and_all(
        core::iter::once(rho_if(table, rule)).chain(order.before(rule).iter().map(|&r2| rho_if(table, r2).not())),
    )
}

/// No rule fires.
pub fn no_rule_fires(table: &DecisionTable) -> Concept {
    Concept::and_all((0..table.rules.len()).map(|r| rho_if(table, r).not()))
}

pub fn encode_attribute(feature: &str, dt: PrimitiveDatatype, bridge: &str) -> TBoxAxiom {
    TBoxAxiom::ConceptIncl(Concept::defined(feature, dt), Concept::name(bridge))
}

pub fn encode_facet(feature: &str, dt: PrimitiveDatatype, facet: &SFeelCondition) -> Option<TBoxAxiom> {
    match facet {
        SFeelCondition::Any => None,
        f => Some(TBoxAxiom::ConceptIncl(Concept::defined(feature, dt), Concept::some_value(feature, f.to_derived(dt)))),
    }
}

/// Output ranges act as enumeration facets.
pub fn encode_range(feature: &str, dt: PrimitiveDatatype, range: &[Value]) -> TBoxAxiom {
    let e = DerivedDatatype::enumeration(dt, range.iter().cloned()).expect("range typed by its attribute");
    TBoxAxiom::ConceptIncl(Concept::defined(feature, dt), Concept::some_value(feature, e))
}

pub fn encode_rule(table: &DecisionTable, rule: usize, order: &RuleOrder) -> TBoxAxiom {
    TBoxAxiom::ConceptIncl(firing_condition(table, rule, order), rho_then(table, rule))
}

pub fn encode_defaults(table: &DecisionTable) -> Option<TBoxAxiom> {
    let defaults: Vec<Concept> = table
        .outputs
        .iter()
        .filter_map(|c| Some(value_concept(&mangle(&table.name, &c.name), c.datatype, c.default.clone()?)))
        .collect();
    if defaults.is_empty() {
        return None;
    }
    Some(TBoxAxiom::ConceptIncl(no_rule_fires(table), Concept::and_all(defaults)))
}

pub fn encode_flow(drg: &Drg, flow: &Flow) -> Result<TBoxAxiom, EncodingError> {
    let target = flow.target();
    match (drg.attr_type(&flow.source), drg.attr_type(&target)) {
        (Some(l), Some(r)) if l == r => Ok(TBoxAxiom::FeatureIncl(feature_name(&flow.source), feature_name(&target))),
        (Some(l), Some(r)) => Err(EncodingError::Drg(alloc::vec![DmnError::FlowTypeMismatch {
            from: flow.source.to_string(),
            target: target.to_string(),
            left: l,
            right: r,
        }])),
        _ => Err(EncodingError::Drg(alloc::vec![DmnError::UnknownEndpoint(flow.source.to_string())])),
    }
}

/// All table axioms in emission order: typing and facets per input column,
/// typing and range per output column, rules, defaults.
pub fn encode_table(table: &DecisionTable, bridge: &str) -> Vec<TBoxAxiom> {
    let mut out = Vec::new();
    for c in &table.inputs {
        let f = mangle(&table.name, &c.name);
        out.push(encode_attribute(&f, c.datatype, bridge));
        out.extend(encode_facet(&f, c.datatype, &c.facet));
    }
    for c in &table.outputs {
        let f = mangle(&table.name, &c.name);
        out.push(encode_attribute(&f, c.datatype, bridge));
        out.push(encode_range(&f, c.datatype, &c.range));
    }
    let order = table.rule_order();
    for r in 0..table.rules.len() {
        out.push(encode_rule(table, r, &order));
    }
    out.extend(encode_defaults(table));
    out
}

/// Signature of the DRG: one feature per input datum and per column.
pub fn drg_signature(drg: &Drg) -> Vec<(String, PrimitiveDatatype)> {
    let mut out: Vec<(String, PrimitiveDatatype)> = drg.input_data.iter().map(|d| (d.name.clone(), d.datatype)).collect();
    for t in &drg.tables {
        for c in &t.inputs {
            out.push((mangle(&t.name, &c.name), c.datatype));
        }
        for c in &t.outputs {
            out.push((mangle(&t.name, &c.name), c.datatype));
        }
    }
    out
}

/// Axioms for the DRG alone, without background knowledge.
pub fn encode_drg(drg: &Drg, bridge: &str) -> Result<Vec<TBoxAxiom>, EncodingError> {
    let mut out = Vec::new();
    for d in &drg.input_data {
        out.push(encode_attribute(&d.name, d.datatype, bridge));
        out.extend(encode_facet(&d.name, d.datatype, &d.facet));
    }
    for t in &drg.tables {
        out.extend(encode_table(t, bridge));
    }
    for f in &drg.flows {
        out.push(encode_flow(drg, f)?);
    }
    Ok(out)
}

fn extended_signature(d: &Dkb) -> Result<Signature, EncodingError> {
    let mut sig = d.signature.clone();
    for (name, dt) in drg_signature(&d.drg) {
        sig.add_feature(&name, dt)?;
    }
    Ok(sig)
}

/// The knowledge base `⟨Σ ∪ Σ_G, T ∪ T_G, A⟩`.
pub fn encode_dkb(d: &Dkb) -> Result<Kb, EncodingError> {
    if let Err(mut e) = validate_dkb(d) {
        return Err(e.remove(0));
    }
    let signature = extended_signature(d)?;
    let mut tbox = d.background.clone();
    tbox.extend(encode_drg(&d.drg, &d.bridge)?);
    let kb = Kb { signature, tbox, abox: d.abox.clone() };
    kb.check()?;
    Ok(kb)
}

/// Closure axioms stating that outputs are only ever produced by a firing
/// rule or a default, and that fed inputs only carry values of their source.
pub fn provenance_axioms(drg: &Drg) -> Vec<TBoxAxiom> {
    let mut out = Vec::new();
    for t in &drg.tables {
        let order = t.rule_order();
        for c in &t.outputs {
            let f = mangle(&t.name, &c.name);
            for v in &c.range {
                let mut reasons: Vec<Concept> = (0..t.rules.len())
                    .filter(|&r| t.rules[r].outputs.get(&c.name) == Some(v))
                    .map(|r| firing_condition(t, r, &order))
                    .collect();
                if c.default.as_ref() == Some(v) {
                    reasons.push(no_rule_fires(t));
                }
                out.push(TBoxAxiom::ConceptIncl(value_concept(&f, c.datatype, v.clone()), Concept::or_all(reasons)));
            }
        }
    }
    let fed: BTreeSet<(String, String, PrimitiveDatatype)> = drg
        .flows
        .iter()
        .filter_map(|f| Some((feature_name(&f.source), feature_name(&f.target()), drg.attr_type(&f.source)?)))
        .collect();
    for (src, dst, dt) in fed {
        out.push(TBoxAxiom::ConceptIncl(Concept::defined(dst, dt), Concept::defined(src, dt)));
    }
    out
}

/// [`encode_dkb`] plus [`provenance_axioms`].
pub fn encode_dkb_closed(d: &Dkb) -> Result<Kb, EncodingError> {
    let mut kb = encode_dkb(d)?;
    kb.tbox.extend(provenance_axioms(&d.drg));
    Ok(kb)
}
