//! The verification tasks over decision knowledge bases, each reduced to
//! satisfiability or instance checks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::datatypes::{complement, enumerate_small, normalize_numeric, DerivedDatatype, PrimitiveDatatype, Value};
use crate::dl::{AboxFact, Concept, Kb, Signature};
use crate::dmn::{Attr, DecisionTable, Drg, DmnError};
use crate::encoding::{encode_dkb, encode_dkb_closed, feature_name, mangle, rho_if, value_concept, Dkb, EncodingError};
use crate::reasoner::{concept_satisfiable, instance_check, ReasonerError, ReasonerOptions, SatResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    UniqueHit,
    AnyHit,
    PriorityHit,
    IoRelationship,
    OutputCoverage,
    Completeness,
    OutputDeterminability,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::UniqueHit,
        Task::AnyHit,
        Task::PriorityHit,
        Task::IoRelationship,
        Task::OutputCoverage,
        Task::Completeness,
        Task::OutputDeterminability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::UniqueHit => "unique-hit",
            Task::AnyHit => "any-hit",
            Task::PriorityHit => "priority-hit",
            Task::IoRelationship => "io",
            Task::OutputCoverage => "coverage",
            Task::Completeness => "completeness",
            Task::OutputDeterminability => "determinability",
        }
    }

    pub fn from_name(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Input values of a witness model plus, per input, the set of values the
/// same argument works for.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Region {
    pub bounds: BTreeMap<String, DerivedDatatype>,
    pub sample: BTreeMap<String, Value>,
}

impl Region {
    /// Human-readable bound of one input.
    pub fn describe(&self, feature: &str) -> Option<String> {
        let e = self.bounds.get(feature)?;
        Some(if e.base().is_numeric() {
            let shapes = normalize_numeric(core::slice::from_ref(e)).expect("numeric bound");
            shapes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" or ")
        } else {
            match enumerate_small(e.base(), [e], 8) {
                Some(vs) => format!("{{{}}}", vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")),
                None => e.to_string(),
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Two rules (0-based) that can fire together.
    Overlap { table: String, first: usize, second: usize, sample: BTreeMap<String, Value> },
    /// `rule` never fires alone below `by`.
    Masked { table: String, rule: usize, by: usize },
    /// An input for which the output is produced.
    Covered { table: String, attr: String, sample: BTreeMap<String, Value> },
    /// Inputs leaving the output undefined.
    Uncovered { table: String, attr: String, region: Region },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sample = |s: &BTreeMap<String, Value>| s.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ");
        match self {
            Witness::Overlap { table, first, second, sample: s } => {
                write!(f, "{table}: rules {} and {} overlap at {}", first + 1, second + 1, sample(s))
            }
            Witness::Masked { table, rule, by } => write!(f, "{table}: rule {} is masked by rule {}", rule + 1, by + 1),
            Witness::Covered { table, attr, sample: s } => write!(f, "{table}.{attr} produced at {}", sample(s)),
            Witness::Uncovered { table, attr, region } => {
                write!(f, "{table}.{attr} undefined for ")?;
                let parts: Vec<String> = region
                    .bounds
                    .keys()
                    .map(|k| format!("{k} in {}", region.describe(k).unwrap_or_default()))
                    .collect();
                write!(f, "{} (e.g. {})", parts.join(", "), sample(&region.sample))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct TaskStats {
    pub reasoner_calls: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskVerdict {
    pub task: Task,
    pub holds: bool,
    pub witnesses: Vec<Witness>,
    pub stats: TaskStats,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaskError {
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("{0} is not an output table")]
    NotAnOutput(String),
    #[error("table {table} has no output {attr}")]
    UnknownOutput { table: String, attr: String },
    #[error("value {value} is not in the range of {table}.{attr}")]
    OutsideRange { table: String, attr: String, value: Value },
    #[error("template: {0}")]
    Template(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaskOptions {
    pub reasoner: ReasonerOptions,
    /// Drop the background TBox.
    pub no_ontology: bool,
    /// Uncovered regions reported per output attribute.
    pub region_limit: usize,
}

impl Default for TaskOptions {
    fn default() -> Self {
        TaskOptions { reasoner: ReasonerOptions::default(), no_ontology: false, region_limit: 4 }
    }
}

/// A DKB around one bare table, with a fresh bridge concept.
pub fn table_dkb(table: DecisionTable) -> Dkb {
    let mut signature = Signature::default();
    signature.add_concept("Case").expect("fresh signature");
    Dkb { signature, background: Vec::new(), drg: Drg::single(table), bridge: "Case".into(), abox: Vec::new() }
}

/// `d` cut down to one table, the input data feeding it and those flows.
/// Inputs fed by other tables become free.
pub fn restrict(d: &Dkb, table: &str) -> Result<Dkb, TaskError> {
    let t = d.drg.table(table).ok_or_else(|| TaskError::UnknownTable(table.into()))?;
    let flows: Vec<_> =
        d.drg.flows.iter().filter(|f| f.table == table && matches!(f.source, Attr::Datum(_))).cloned().collect();
    let input_data = d
        .drg
        .input_data
        .iter()
        .filter(|x| flows.iter().any(|f| f.source == Attr::Datum(x.name.clone())))
        .cloned()
        .collect();
    let drg = Drg { input_data, tables: alloc::vec![t.clone()], outputs: alloc::vec![table.into()], flows, ..Drg::default() };
    Ok(Dkb { drg, ..d.clone() })
}

struct Ctx<'a> {
    d: &'a Dkb,
    opts: &'a TaskOptions,
    kb: Option<Kb>,
    closed: Option<Kb>,
    calls: usize,
}

impl<'a> Ctx<'a> {
    fn new(d: &'a Dkb, opts: &'a TaskOptions) -> Self {
        Ctx { d, opts, kb: None, closed: None, calls: 0 }
    }

    fn dkb(&self) -> Dkb {
        let mut d = self.d.clone();
        if self.opts.no_ontology {
            d.background.clear();
        }
        d
    }

    fn kb(&mut self) -> Result<&Kb, TaskError> {
        if self.kb.is_none() {
            self.kb = Some(encode_dkb(&self.dkb())?);
        }
        Ok(self.kb.as_ref().unwrap())
    }

    fn closed(&mut self) -> Result<&Kb, TaskError> {
        if self.closed.is_none() {
            self.closed = Some(encode_dkb_closed(&self.dkb())?);
        }
        Ok(self.closed.as_ref().unwrap())
    }

    fn sat(&mut self, c: &Concept, closed: bool) -> Result<SatResult, TaskError> {
        self.calls += 1;
        let opts = self.opts.reasoner;
        let kb = if closed { self.closed()? } else { self.kb()? };
        Ok(concept_satisfiable(kb, c, &opts)?)
    }

    fn verdict(&self, task: Task, witnesses: Vec<Witness>) -> TaskVerdict {
        TaskVerdict { task, holds: witnesses.is_empty(), witnesses, stats: TaskStats { reasoner_calls: self.calls } }
    }

    fn table(&self, name: &str) -> Result<&'a DecisionTable, TaskError> {
        self.d.drg.table(name).ok_or_else(|| TaskError::UnknownTable(name.into()))
    }
}

/// Values of the free inputs in the focus knot of `r`.
fn sample(d: &Dkb, r: &SatResult) -> BTreeMap<String, Value> {
    let Some(k) = r.knots().and_then(|k| k.focus()) else { return BTreeMap::new() };
    d.drg
        .free_inputs()
        .iter()
        .filter_map(|a| {
            let f = feature_name(a);
            Some((f.clone(), k.value(&f)?.clone()))
        })
        .collect()
}

/// Box of free-input values sharing the focus knot's concept-type.
fn region(d: &Dkb, r: &SatResult) -> Region {
    let mut out = Region { sample: sample(d, r), ..Region::default() };
    let Some(k) = r.knots().and_then(|k| k.focus()) else { return out };
    for a in d.drg.free_inputs() {
        let f = feature_name(&a);
        let dt = d.drg.attr_type(&a).expect("free inputs are typed");
        for s in &k.successors {
            if let crate::reasoner::Successor::Feature { features, dtype, .. } = s {
                if features.contains(&f) {
                    let b = dtype.iter().try_fold(DerivedDatatype::full(dt), |acc, e| acc.intersection(e));
                    out.bounds.insert(f.clone(), b.expect("one datatype per feature"));
                }
            }
        }
    }
    out
}

fn overlap_pairs(ctx: &mut Ctx<'_>, table: &str, only_differing: bool) -> Result<Vec<Witness>, TaskError> {
    let t = ctx.table(table)?;
    let order = t.rule_order();
    let mut out = Vec::new();
    for (i, &r1) in order.0.iter().enumerate() {
        for &r2 in &order.0[i + 1..] {
            if only_differing && t.rules[r1].outputs == t.rules[r2].outputs {
                continue;
            }
            let c = rho_if(t, r1).and(rho_if(t, r2));
            let r = ctx.sat(&c, false)?;
            if r.is_sat() {
                let (first, second) = (r1.min(r2), r1.max(r2));
                out.push(Witness::Overlap { table: table.into(), first, second, sample: sample(ctx.d, &r) });
            }
        }
    }
    Ok(out)
}

pub fn check_unique_hit(d: &Dkb, table: &str, opts: &TaskOptions) -> Result<TaskVerdict, TaskError> {
    let mut ctx = Ctx::new(d, opts);
    let w = overlap_pairs(&mut ctx, table, false)?;
    Ok(ctx.verdict(Task::UniqueHit, w))
}

pub fn check_any_hit(d: &Dkb, table: &str, opts: &TaskOptions) -> Result<TaskVerdict, TaskError> {
    let mut ctx = Ctx::new(d, opts);
    let w = overlap_pairs(&mut ctx, table, true)?;
    Ok(ctx.verdict(Task::AnyHit, w))
}

pub fn check_priority_hit(d: &Dkb, table: &str, opts: &TaskOptions) -> Result<TaskVerdict, TaskError> {
    let mut ctx = Ctx::new(d, opts);
    let t = ctx.table(table)?;
    let order = t.rule_order();
    let mut w = Vec::new();
    for (i, &r2) in order.0.iter().enumerate() {
        for &r1 in &order.0[..i] {
            let c = rho_if(t, r1).not().and(rho_if(t, r2));
            if !ctx.sat(&c, false)?.is_sat() {
                w.push(Witness::Masked { table: table.into(), rule: r2, by: r1 });
                break;
            }
        }
    }
    Ok(ctx.verdict(Task::PriorityHit, w))
}

fn output_feature(d: &Dkb, table: &str, attr: &str) -> Result<(String, PrimitiveDatatype), TaskError> {
    if !d.drg.outputs.iter().any(|o| o == table) {
        return Err(if d.drg.table(table).is_some() {
            TaskError::NotAnOutput(table.into())
        } else {
            TaskError::UnknownTable(table.into())
        });
    }
    let t = d.drg.table(table).ok_or_else(|| TaskError::UnknownTable(table.into()))?;
    let c = t.output(attr).ok_or_else(|| TaskError::UnknownOutput { table: table.into(), attr: attr.into() })?;
    Ok((mangle(table, attr), c.datatype))
}

fn check_value(d: &Dkb, table: &str, attr: &str, v: &Value) -> Result<(String, PrimitiveDatatype), TaskError> {
    let (f, dt) = output_feature(d, table, attr)?;
    let c = d.drg.table(table).and_then(|t| t.output(attr)).expect("checked above");
    if !c.range.contains(v) {
        return Err(TaskError::OutsideRange { table: table.into(), attr: attr.into(), value: v.clone() });
    }
    Ok((f, dt))
}

/// Whether `d`'s ABox entails that `object` gets `table.attr = v`. In
/// no-ontology mode the object is also asserted to be an instance of the
/// bridge concept.
pub fn check_io(d: &Dkb, table: &str, attr: &str, object: &str, v: &Value, opts: &TaskOptions) -> Result<TaskVerdict, TaskError> {
    let (f, _) = check_value(d, table, attr, v)?;
    let mut ctx = Ctx::new(d, opts);
    let mut kb = ctx.kb()?.clone();
    if opts.no_ontology {
        kb.abox.push(AboxFact::Concept(d.bridge.clone(), object.into()));
    }
    ctx.calls += 1;
    let holds = instance_check(&kb, &AboxFact::Feature(f, object.into(), v.clone()), &opts.reasoner)?;
    let mut out = ctx.verdict(Task::IoRelationship, Vec::new());
    out.holds = holds;
    Ok(out)
}

/// Whether some input produces `table.attr = v`. Outputs are read as
/// produced only by firing rules or defaults, and fed inputs as carrying
/// only their source's value.
pub fn check_coverage(d: &Dkb, table: &str, attr: &str, v: &Value, opts: &TaskOptions) -> Result<TaskVerdict, TaskError> {
    let (f, dt) = check_value(d, table, attr, v)?;
    let mut ctx = Ctx::new(d, opts);
    let r = ctx.sat(&value_concept(&f, dt, v.clone()), true)?;
    let holds = r.is_sat();
    let witnesses = if holds {
        alloc::vec![Witness::Covered { table: table.into(), attr: attr.into(), sample: sample(d, &r) }]
    } else {
        Vec::new()
    };
    Ok(TaskVerdict { task: Task::OutputCoverage, holds, witnesses, stats: TaskStats { reasoner_calls: ctx.calls } })
}

/// `⨅_{P ∈ I} ∃P` over the free inputs.
pub fn all_inputs_template(d: &Dkb) -> Concept {
    Concept::and_all(d.drg.free_inputs().iter().map(|a| {
        Concept::defined(feature_name(a), d.drg.attr_type(a).expect("free inputs are typed"))
    }))
}

fn check_template(d: &Dkb, t: &Concept) -> Result<(), TaskError> {
    let kb = encode_dkb(d)?;
    t.check(&kb.signature).map_err(|e| TaskError::Template(e.to_string()))?;
    let bound: Vec<String> = d.drg.bound_attrs().iter().map(feature_name).collect();
    let mut bad = None;
    walk(t, &mut |c| {
        if let Concept::ExistsF(f, _) | Concept::Undef(f) = c {
            if bound.contains(f) {
                bad = Some(f.clone());
            }
        }
    });
    match bad {
        Some(f) => Err(TaskError::Template(format!("{f} is computed by the decision graph"))),
        None => Ok(()),
    }
}

fn walk(c: &Concept, f: &mut impl FnMut(&Concept)) {
    f(c);
    for x in c.children() {
        walk(x, f);
    }
}

fn undetermined(ctx: &mut Ctx<'_>, template: &Concept, task: Task) -> Result<TaskVerdict, TaskError> {
    let d = ctx.d;
    let mut witnesses = Vec::new();
    for name in &d.drg.outputs {
        let t = ctx.table(name)?;
        for c in &t.outputs {
            let f = mangle(name, &c.name);
            let mut query = template.clone().and(Concept::undef(f.clone()));
            for _ in 0..ctx.opts.region_limit.max(1) {
                let r = ctx.sat(&query, false)?;
                if !r.is_sat() {
                    break;
                }
                let region = region(d, &r);
                let exclude = Concept::or_all(region.bounds.iter().map(|(p, e)| {
                    Concept::undef(p.clone()).or(Concept::some_value(p.clone(), complement(e)))
                }));
                witnesses.push(Witness::Uncovered { table: name.clone(), attr: c.name.clone(), region });
                if exclude == Concept::Bot {
                    break;
                }
                query = query.and(exclude);
            }
        }
    }
    Ok(ctx.verdict(task, witnesses))
}

pub fn check_completeness(d: &Dkb, opts: &TaskOptions) -> Result<TaskVerdict, TaskError> {
    let mut ctx = Ctx::new(d, opts);
    undetermined(&mut ctx, &all_inputs_template(d), Task::Completeness)
}

pub fn check_determinability(d: &Dkb, template: &Concept, opts: &TaskOptions) -> Result<TaskVerdict, TaskError> {
    check_template(d, template)?;
    let mut ctx = Ctx::new(d, opts);
    undetermined(&mut ctx, template, Task::OutputDeterminability)
}

impl From<Vec<DmnError>> for TaskError {
    fn from(e: Vec<DmnError>) -> Self {
        TaskError::Encoding(EncodingError::Drg(e))
    }
}
