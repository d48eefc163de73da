//! Decision tables and decision requirements graphs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::datatypes::{PrimitiveDatatype, Value};
use crate::dl::is_identifier;
use crate::sfeel::SFeelCondition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HitPolicy {
    Unique,
    Any,
    Priority,
}

impl HitPolicy {
    pub fn letter(self) -> &'static str {
        match self {
            HitPolicy::Unique => "U",
            HitPolicy::Any => "A",
            HitPolicy::Priority => "P",
        }
    }

    pub fn from_letter(s: &str) -> Option<Self> {
        match s {
            "U" | "u" => Some(HitPolicy::Unique),
            "A" | "a" => Some(HitPolicy::Any),
            "P" | "p" => Some(HitPolicy::Priority),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputColumn {
    pub name: String,
    pub datatype: PrimitiveDatatype,
    pub facet: SFeelCondition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputColumn {
    pub name: String,
    pub datatype: PrimitiveDatatype,
    /// Ordered by priority, highest first.
    pub range: Vec<Value>,
    pub default: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Rule {
    pub inputs: BTreeMap<String, SFeelCondition>,
    pub outputs: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionTable {
    pub name: String,
    pub inputs: Vec<InputColumn>,
    pub outputs: Vec<OutputColumn>,
    pub rules: Vec<Rule>,
    pub hit: HitPolicy,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DmnError {
    #[error("`{0}` is not a valid name")]
    InvalidName(String),
    #[error("table {table}: attribute {attr} is declared twice")]
    DuplicateAttribute { table: String, attr: String },
    #[error("table {table}: rule {rule} missing entry for {attr}")]
    MissingEntry { table: String, rule: usize, attr: String },
    #[error("table {table}: rule {rule} has an entry for unknown attribute {attr}")]
    UnknownEntry { table: String, rule: usize, attr: String },
    #[error("table {table}: output {attr} has an empty range")]
    EmptyRange { table: String, attr: String },
    #[error("table {table}: {what} value {value} for {attr} is outside its range")]
    OutsideRange { table: String, attr: String, value: Value, what: String },
    #[error("{owner}: ill-typed condition `{condition}` for {attr} ({datatype})")]
    IllTyped { owner: String, attr: String, condition: String, datatype: PrimitiveDatatype },
    #[error("duplicate table name {0}")]
    DuplicateTable(String),
    #[error("duplicate input datum {0}")]
    DuplicateInput(String),
    #[error("unknown flow endpoint {0}")]
    UnknownEndpoint(String),
    #[error("flow {from} -> {target} connects {left} to {right}")]
    FlowTypeMismatch { from: String, target: String, left: PrimitiveDatatype, right: PrimitiveDatatype },
    #[error("input attribute {0} is fed by more than one flow")]
    AmbiguousFlow(String),
    #[error("decision tables form a cycle through {0}")]
    Cycle(String),
    #[error("unknown output table {0}")]
    UnknownOutput(String),
    #[error("unknown business knowledge model {0}")]
    UnknownBkm(String),
    #[error("value {value} for {attr} violates its facet")]
    FacetViolation { attr: String, value: Value },
}

fn condition_well_typed(c: &SFeelCondition, dt: PrimitiveDatatype) -> bool {
    match c {
        SFeelCondition::Any => true,
        SFeelCondition::Eq(v) | SFeelCondition::NotEq(v) => dt.admits(v),
        SFeelCondition::Cmp(_, v) => dt.is_numeric() && dt.admits(v),
        SFeelCondition::Interval { lo, hi, .. } => {
            dt.is_numeric() && dt.admits(lo) && dt.admits(hi) && lo.as_num() <= hi.as_num()
        }
        SFeelCondition::Or(items) => {
            items.len() >= 2
                && items
                    .iter()
                    .all(|i| !matches!(i, SFeelCondition::Any | SFeelCondition::Or(_)) && condition_well_typed(i, dt))
        }
    }
}

/// Rule indices from highest to lowest priority.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleOrder(pub Vec<usize>);

impl RuleOrder {
    /// Rules strictly above `rule`.
    pub fn before(&self, rule: usize) -> &[usize] {
        let pos = self.0.iter().position(|&r| r == rule).expect("rule in order");
        &self.0[..pos]
    }

    pub fn position(&self, rule: usize) -> usize {
        self.0.iter().position(|&r| r == rule).expect("rule in order")
    }
}

impl DecisionTable {
    pub fn input(&self, name: &str) -> Option<&InputColumn> {
        self.inputs.iter().find(|c| c.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&OutputColumn> {
        self.outputs.iter().find(|c| c.name == name)
    }

    pub fn attribute_type(&self, name: &str) -> Option<PrimitiveDatatype> {
        self.input(name).map(|c| c.datatype).or_else(|| self.output(name).map(|c| c.datatype))
    }

    pub fn validate(&self) -> Result<(), Vec<DmnError>> {
        let mut errors = Vec::new();
        let t = &self.name;
        if !is_identifier(t) {
            errors.push(DmnError::InvalidName(t.clone()));
        }
        let mut seen = BTreeSet::new();
        for name in self.inputs.iter().map(|c| &c.name).chain(self.outputs.iter().map(|c| &c.name)) {
            if !is_identifier(name) {
                errors.push(DmnError::InvalidName(name.clone()));
            }
            if !seen.insert(name) {
                errors.push(DmnError::DuplicateAttribute { table: t.clone(), attr: name.clone() });
            }
        }
        for c in &self.inputs {
            if !condition_well_typed(&c.facet, c.datatype) {
                errors.push(DmnError::IllTyped {
                    owner: format!("table {t} facet"),
                    attr: c.name.clone(),
                    condition: c.facet.to_string(),
                    datatype: c.datatype,
                });
            }
        }
        for c in &self.outputs {
            if c.range.is_empty() {
                errors.push(DmnError::EmptyRange { table: t.clone(), attr: c.name.clone() });
            }
            for v in c.range.iter().chain(c.default.iter()) {
                if !c.datatype.admits(v) {
                    errors.push(DmnError::IllTyped {
                        owner: format!("table {t} range"),
                        attr: c.name.clone(),
                        condition: v.to_string(),
                        datatype: c.datatype,
                    });
                }
            }
            if let Some(d) = &c.default {
                if !c.range.contains(d) {
                    errors.push(DmnError::OutsideRange {
                        table: t.clone(),
                        attr: c.name.clone(),
                        value: d.clone(),
                        what: "default".into(),
                    });
                }
            }
        }
        for (i, r) in self.rules.iter().enumerate() {
            let rule = i + 1;
            for c in &self.inputs {
                match r.inputs.get(&c.name) {
                    None => errors.push(DmnError::MissingEntry { table: t.clone(), rule, attr: c.name.clone() }),
                    Some(cond) if !condition_well_typed(cond, c.datatype) => errors.push(DmnError::IllTyped {
                        owner: format!("table {t} rule {rule}"),
                        attr: c.name.clone(),
                        condition: cond.to_string(),
                        datatype: c.datatype,
                    }),
                    Some(_) => {}
                }
            }
            for c in &self.outputs {
                match r.outputs.get(&c.name) {
                    None => errors.push(DmnError::MissingEntry { table: t.clone(), rule, attr: c.name.clone() }),
                    Some(v) if !c.range.contains(v) => errors.push(DmnError::OutsideRange {
                        table: t.clone(),
                        attr: c.name.clone(),
                        value: v.clone(),
                        what: format!("rule {rule}"),
                    }),
                    Some(_) => {}
                }
            }
            for a in r.inputs.keys() {
                if self.input(a).is_none() {
                    errors.push(DmnError::UnknownEntry { table: t.clone(), rule, attr: a.clone() });
                }
            }
            for a in r.outputs.keys() {
                if self.output(a).is_none() {
                    errors.push(DmnError::UnknownEntry { table: t.clone(), rule, attr: a.clone() });
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// Lexicographic over outputs in declared order, by position in each
    /// output's range; ties keep textual order.
    pub fn rule_order(&self) -> RuleOrder {
        let key = |r: &Rule| -> Vec<usize> {
            self.outputs
                .iter()
                .map(|c| {
                    r.outputs
                        .get(&c.name)
                        .and_then(|v| c.range.iter().position(|x| x == v))
                        .unwrap_or(usize::MAX)
                })
                .collect()
        };
        let mut idx: Vec<usize> = (0..self.rules.len()).collect();
        idx.sort_by_key(|&i| (key(&self.rules[i]), i));
        RuleOrder(idx)
    }

    /// Index of the rule chosen on `inputs` (missing attributes are undefined).
    pub fn first_match(&self, order: &RuleOrder, inputs: &BTreeMap<String, Value>) -> Option<usize> {
        order.0.iter().copied().find(|&i| rule_fires(&self.rules[i], inputs))
    }
}

/// A rule fires when every entry matches; `-` also matches undefined values.
pub fn rule_fires(rule: &Rule, inputs: &BTreeMap<String, Value>) -> bool {
    rule.inputs.iter().all(|(a, c)| match inputs.get(a) {
        Some(v) => c.matches(v),
        None => c.is_any(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputDatum {
    pub name: String,
    pub datatype: PrimitiveDatatype,
    pub facet: SFeelCondition,
}

/// An attribute of a DRG: an input datum or a table column.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attr {
    Datum(String),
    Column { table: String, attr: String },
}

impl Attr {
    pub fn column(table: &str, attr: &str) -> Self {
        Attr::Column { table: table.into(), attr: attr.into() }
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attr::Datum(n) => f.write_str(n),
            Attr::Column { table, attr } => write!(f, "{table}.{attr}"),
        }
    }
}

/// Information flow from an input datum or output column to an input column.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Flow {
    pub source: Attr,
    pub table: String,
    pub attr: String,
}

impl Flow {
    pub fn target(&self) -> Attr {
        Attr::column(&self.table, &self.attr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Drg {
    pub input_data: Vec<InputDatum>,
    pub tables: Vec<DecisionTable>,
    pub outputs: Vec<String>,
    pub bkms: Vec<String>,
    /// Declared knowledge requirements, BKM name to table name.
    pub knowledge: Vec<(String, String)>,
    pub flows: Vec<Flow>,
}

/// Node of the requirement graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Node {
    Input(String),
    Table(String),
    Bkm(String),
}

impl Drg {
    /// The trivial graph around one table: no input data, no flows, the
    /// table as the only output.
    pub fn single(table: DecisionTable) -> Self {
        Drg { outputs: alloc::vec![table.name.clone()], tables: alloc::vec![table], ..Drg::default() }
    }

    pub fn table(&self, name: &str) -> Option<&DecisionTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn datum(&self, name: &str) -> Option<&InputDatum> {
        self.input_data.iter().find(|d| d.name == name)
    }

    pub fn attr_type(&self, a: &Attr) -> Option<PrimitiveDatatype> {
        match a {
            Attr::Datum(n) => self.datum(n).map(|d| d.datatype),
            Attr::Column { table, attr } => self.table(table)?.attribute_type(attr),
        }
    }

    fn is_output_column(&self, a: &Attr) -> bool {
        matches!(a, Attr::Column { table, attr } if self.table(table).is_some_and(|t| t.output(attr).is_some()))
    }

    fn is_input_column(&self, a: &Attr) -> bool {
        matches!(a, Attr::Column { table, attr } if self.table(table).is_some_and(|t| t.input(attr).is_some()))
    }

    /// Requirement edges induced by flows and declared knowledge requirements.
    pub fn requirements(&self) -> BTreeSet<(Node, Node)> {
        let mut out = BTreeSet::new();
        for f in &self.flows {
            let from = match &f.source {
                Attr::Datum(n) => Node::Input(n.clone()),
                Attr::Column { table, .. } => Node::Table(table.clone()),
            };
            out.insert((from, Node::Table(f.table.clone())));
        }
        for (k, t) in &self.knowledge {
            out.insert((Node::Bkm(k.clone()), Node::Table(t.clone())));
        }
        out
    }

    pub fn validate(&self) -> Result<(), Vec<DmnError>> {
        let mut errors = Vec::new();
        let mut names = BTreeSet::new();
        for t in &self.tables {
            if let Err(e) = t.validate() {
                errors.extend(e);
            }
            if !names.insert(&t.name) {
                errors.push(DmnError::DuplicateTable(t.name.clone()));
            }
        }
        let mut data = BTreeSet::new();
        for d in &self.input_data {
            if !is_identifier(&d.name) {
                errors.push(DmnError::InvalidName(d.name.clone()));
            }
            if !data.insert(&d.name) {
                errors.push(DmnError::DuplicateInput(d.name.clone()));
            }
            if !condition_well_typed(&d.facet, d.datatype) {
                errors.push(DmnError::IllTyped {
                    owner: "input data facet".into(),
                    attr: d.name.clone(),
                    condition: d.facet.to_string(),
                    datatype: d.datatype,
                });
            }
        }
        for o in &self.outputs {
            if self.table(o).is_none() {
                errors.push(DmnError::UnknownOutput(o.clone()));
            }
        }
        for k in &self.bkms {
            if !is_identifier(k) {
                errors.push(DmnError::InvalidName(k.clone()));
            }
        }
        for (k, t) in &self.knowledge {
            if !self.bkms.contains(k) {
                errors.push(DmnError::UnknownBkm(k.clone()));
            }
            if self.table(t).is_none() {
                errors.push(DmnError::UnknownEndpoint(t.clone()));
            }
        }
        let mut fed = BTreeSet::new();
        for f in &self.flows {
            let target = f.target();
            let source_ok = match &f.source {
                Attr::Datum(n) => self.datum(n).is_some(),
                col => self.is_output_column(col),
            };
            if !source_ok {
                errors.push(DmnError::UnknownEndpoint(f.source.to_string()));
            }
            if !self.is_input_column(&target) {
                errors.push(DmnError::UnknownEndpoint(target.to_string()));
            }
            if let (Some(l), Some(r)) = (self.attr_type(&f.source), self.attr_type(&target)) {
                if l != r {
                    errors.push(DmnError::FlowTypeMismatch {
                        from: f.source.to_string(),
                        target: target.to_string(),
                        left: l,
                        right: r,
                    });
                }
            }
            if !fed.insert(target.clone()) {
                errors.push(DmnError::AmbiguousFlow(target.to_string()));
            }
        }
        if let Err(cycle) = self.try_topo_order() {
            errors.push(DmnError::Cycle(cycle));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    fn table_edges(&self) -> BTreeSet<(usize, usize)> {
        let index = |n: &str| self.tables.iter().position(|t| t.name == n);
        self.flows
            .iter()
            .filter_map(|f| match &f.source {
                Attr::Column { table, .. } => Some((index(table)?, index(&f.table)?)),
                Attr::Datum(_) => None,
            })
            .collect()
    }

    fn try_topo_order(&self) -> Result<Vec<usize>, String> {
        let edges = self.table_edges();
        let n = self.tables.len();
        let mut indegree = alloc::vec![0usize; n];
        for &(_, b) in &edges {
            indegree[b] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &(a, b) in &edges {
                if a == i {
                    indegree[b] -= 1;
                    if indegree[b] == 0 {
                        ready.insert(b);
                    }
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            let stuck = (0..n).find(|i| !order.contains(i)).unwrap();
            Err(self.tables[stuck].name.clone())
        }
    }

    /// Tables in dependency order, ties broken textually.
    pub fn topo_order(&self) -> Vec<&DecisionTable> {
        self.try_topo_order()
            .unwrap_or_else(|_| (0..self.tables.len()).collect())
            .into_iter()
            .map(|i| &self.tables[i])
            .collect()
    }

    fn fed(&self) -> BTreeSet<Attr> {
        self.flows.iter().map(Flow::target).collect()
    }

    /// Input data plus table input columns no flow feeds.
    pub fn free_inputs(&self) -> BTreeSet<Attr> {
        let fed = self.fed();
        let mut out: BTreeSet<Attr> = self.input_data.iter().map(|d| Attr::Datum(d.name.clone())).collect();
        for t in &self.tables {
            for c in &t.inputs {
                let a = Attr::column(&t.name, &c.name);
                if !fed.contains(&a) {
                    out.insert(a);
                }
            }
        }
        out
    }

    /// Fed input columns and all output columns.
    pub fn bound_attrs(&self) -> BTreeSet<Attr> {
        let fed = self.fed();
        let mut out = BTreeSet::new();
        for t in &self.tables {
            for c in &t.inputs {
                let a = Attr::column(&t.name, &c.name);
                if fed.contains(&a) {
                    out.insert(a);
                }
            }
            for c in &t.outputs {
                out.insert(Attr::column(&t.name, &c.name));
            }
        }
        out
    }

    fn facet_of(&self, a: &Attr) -> Option<&SFeelCondition> {
        match a {
            Attr::Datum(n) => self.datum(n).map(|d| &d.facet),
            Attr::Column { table, attr } => self.table(table)?.input(attr).map(|c| &c.facet),
        }
    }

    /// Runs every table in dependency order on a complete-information input.
    /// Free inputs missing from `assignment` are undefined.
    pub fn execute(&self, assignment: &BTreeMap<Attr, Value>) -> Result<BTreeMap<Attr, Option<Value>>, DmnError> {
        let mut values: BTreeMap<Attr, Value> = BTreeMap::new();
        for (a, v) in assignment {
            if let Some(facet) = self.facet_of(a) {
                if !facet.matches(v) {
                    return Err(DmnError::FacetViolation { attr: a.to_string(), value: v.clone() });
                }
            }
            values.insert(a.clone(), v.clone());
        }
        let mut out = BTreeMap::new();
        for t in self.topo_order() {
            let mut inputs = BTreeMap::new();
            for c in &t.inputs {
                let target = Attr::column(&t.name, &c.name);
                let source = self.flows.iter().find(|f| f.target() == target).map(|f| f.source.clone());
                let v = match source {
                    Some(src) => values.get(&src).cloned(),
                    None => values.get(&target).cloned(),
                };
                if let Some(v) = v {
                    if !c.facet.matches(&v) {
                        return Err(DmnError::FacetViolation { attr: target.to_string(), value: v });
                    }
                    inputs.insert(c.name.clone(), v);
                }
            }
            let chosen = t.first_match(&t.rule_order(), &inputs).map(|i| &t.rules[i]);
            for c in &t.outputs {
                let v = match chosen {
                    Some(r) => r.outputs.get(&c.name).cloned(),
                    None => c.default.clone(),
                };
                let a = Attr::column(&t.name, &c.name);
                if let Some(v) = &v {
                    values.insert(a.clone(), v.clone());
                }
                out.insert(a, v);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sfeel::parse_condition;
    use alloc::vec;

    fn cond(s: &str, dt: PrimitiveDatatype) -> SFeelCondition {
        parse_condition(s, dt, None).unwrap()
    }

    fn refuel() -> DecisionTable {
        let s = PrimitiveDatatype::String;
        let r = PrimitiveDatatype::Real;
        let rule = |enter: &str, length: &str, cargo: &str, out: &str| Rule {
            inputs: [("Enter", cond(enter, s)), ("length", cond(length, r)), ("cargo", cond(cargo, r))]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            outputs: [("RefuelArea".to_string(), Value::str(out))].into_iter().collect(),
        };
        DecisionTable {
            name: "Rad".into(),
            inputs: vec![
                InputColumn { name: "Enter".into(), datatype: s, facet: cond("\"y\", \"n\"", s) },
                InputColumn { name: "length".into(), datatype: r, facet: cond(">=0", r) },
                InputColumn { name: "cargo".into(), datatype: r, facet: cond(">=0", r) },
            ],
            outputs: vec![OutputColumn {
                name: "RefuelArea".into(),
                datatype: s,
                range: vec![Value::str("none"), Value::str("indoor"), Value::str("outdoor")],
                default: Some(Value::str("none")),
            }],
            rules: vec![
                rule("\"n\"", "-", "-", "none"),
                rule("\"y\"", "<=350", "-", "indoor"),
                rule("\"y\"", ">350", "<=0.3", "indoor"),
                rule("\"y\"", ">350", ">0.3", "outdoor"),
            ],
            hit: HitPolicy::Unique,
        }
    }

    #[test]
    fn table_validation() {
        let t = refuel();
        assert_eq!(t.validate(), Ok(()));
        let mut broken = t.clone();
        broken.rules[2].inputs.remove("cargo");
        let errs = broken.validate().unwrap_err();
        assert_eq!(errs[0].to_string(), "table Rad: rule 3 missing entry for cargo");
        let mut broken = t;
        broken.outputs[0].default = Some(Value::str("roof"));
        assert!(broken.validate().is_err());
    }

    #[test]
    fn rule_order_follows_range() {
        let mut t = refuel();
        assert_eq!(t.rule_order(), RuleOrder(vec![0, 1, 2, 3]));
        t.rules.swap(0, 3);
        assert_eq!(t.rule_order(), RuleOrder(vec![3, 1, 2, 0]));
        t.rules.truncate(1);
        assert_eq!(t.rule_order(), RuleOrder(vec![0]));
    }

    #[test]
    fn free_and_bound() {
        let g = Drg::single(refuel());
        assert_eq!(g.free_inputs().len(), 3);
        assert_eq!(g.bound_attrs(), [Attr::column("Rad", "RefuelArea")].into_iter().collect());
        assert!(Drg::default().free_inputs().is_empty());
    }

    #[test]
    fn drg_validation() {
        let mut g = Drg::single(refuel());
        g.input_data.push(InputDatum { name: "len".into(), datatype: PrimitiveDatatype::Real, facet: SFeelCondition::Any });
        g.flows.push(Flow { source: Attr::Datum("len".into()), table: "Rad".into(), attr: "length".into() });
        assert_eq!(g.validate(), Ok(()));
        g.flows.push(Flow { source: Attr::Datum("len".into()), table: "Rad".into(), attr: "length".into() });
        assert!(matches!(g.validate().unwrap_err()[0], DmnError::AmbiguousFlow(_)));
        g.flows.pop();
        g.flows.push(Flow { source: Attr::column("Rad", "RefuelArea"), table: "Rad".into(), attr: "Enter".into() });
        assert!(g.validate().unwrap_err().iter().any(|e| matches!(e, DmnError::Cycle(_))));
    }

    #[test]
    fn execute_defaults_and_undefined() {
        let g = Drg::single(refuel());
        let mut a = BTreeMap::new();
        a.insert(Attr::column("Rad", "Enter"), Value::str("y"));
        a.insert(Attr::column("Rad", "length"), Value::int(360));
        a.insert(Attr::column("Rad", "cargo"), Value::int(1));
        let out = g.execute(&a).unwrap();
        assert_eq!(out[&Attr::column("Rad", "RefuelArea")], Some(Value::str("outdoor")));
        a.remove(&Attr::column("Rad", "Enter"));
        let out = g.execute(&a).unwrap();
        assert_eq!(out[&Attr::column("Rad", "RefuelArea")], Some(Value::str("none")));
        a.insert(Attr::column("Rad", "cargo"), Value::int(-1));
        assert!(g.execute(&a).is_err());
    }
}
