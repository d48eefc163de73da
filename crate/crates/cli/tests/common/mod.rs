//! Random generators and brute-force oracles shared by the integration tests.
//! The oracles only use evaluation (`matches`, `value_in`), never the
//! encoding or the reasoner.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use dkbv::document::Document;
use dkbv_core::datatypes::{
    parse_rational, value_in, BigRational, DataExpr, DerivedDatatype, FacetFormula, FacetOp, PrimitiveDatatype, Value,
};
use dkbv_core::dl::{AboxFact, Concept, Kb, Signature, TBoxAxiom};
use dkbv_core::dmn::{Attr, DecisionTable, Drg, Flow, HitPolicy, InputColumn, InputDatum, OutputColumn, Rule};
use dkbv_core::encoding::{drg_signature, Dkb};
use dkbv_core::sfeel::{parse_condition, SFeelCondition};

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub const NUMERIC: [PrimitiveDatatype; 4] =
    [PrimitiveDatatype::Natural, PrimitiveDatatype::Integer, PrimitiveDatatype::Rational, PrimitiveDatatype::Real];
pub const ALL_TYPES: [PrimitiveDatatype; 5] = [
    PrimitiveDatatype::String,
    PrimitiveDatatype::Natural,
    PrimitiveDatatype::Integer,
    PrimitiveDatatype::Rational,
    PrimitiveDatatype::Real,
];
pub const STRINGS: [&str; 3] = ["p", "q", "r"];

pub fn num(text: &str) -> Value {
    Value::Num(parse_rational(text).unwrap())
}

pub fn q(v: &Value) -> BigRational {
    v.as_num().unwrap().clone()
}

// ---------------------------------------------------------------------------
// Representative points

/// Points covering every region cut out by unary constraints whose constants
/// are `consts`: the constants, points strictly between neighbours and
/// beyond both ends; integer neighbours for discrete datatypes.
pub fn representatives(dt: PrimitiveDatatype, consts: &[Value]) -> Vec<Value> {
    let mut out: BTreeSet<Value> = BTreeSet::new();
    if dt == PrimitiveDatatype::String {
        out.extend(consts.iter().filter(|v| v.as_str().is_some()).cloned());
        out.insert(Value::str("~other"));
        return out.into_iter().collect();
    }
    let mut cs: Vec<BigRational> = consts.iter().filter_map(|v| v.as_num().cloned()).collect();
    cs.sort();
    cs.dedup();
    let one = BigRational::from_integer(1.into());
    if dt.is_discrete() {
        out.insert(Value::int(0));
        out.insert(Value::int(1));
        for c in &cs {
            for base in [c.floor(), c.ceil()] {
                for d in [-1i64, 0, 1] {
                    out.insert(Value::Num(base.clone() + BigRational::from_integer(d.into())));
                }
            }
        }
    } else {
        if cs.is_empty() {
            out.insert(Value::int(0));
        }
        for c in &cs {
            out.insert(Value::Num(c.clone()));
        }
        for w in cs.windows(2) {
            out.insert(Value::Num((w[0].clone() + w[1].clone()) / BigRational::from_integer(2.into())));
        }
        if let (Some(lo), Some(hi)) = (cs.first(), cs.last()) {
            out.insert(Value::Num(lo.clone() - one.clone()));
            out.insert(Value::Num(hi.clone() + one));
        }
    }
    out.into_iter().filter(|v| dt.admits(v)).collect()
}

// ---------------------------------------------------------------------------
// Random S-FEEL conditions and tables

fn constant_text(rng: &mut StdRng, dt: PrimitiveDatatype) -> String {
    if dt.is_discrete() {
        let lo = if dt == PrimitiveDatatype::Natural { 0 } else { -1 };
        rng.gen_range(lo..=6).to_string()
    } else {
        ["0", "0.5", "1", "2", "2.5", "3", "4", "4.5", "5", "6", "1/3"].choose(rng).unwrap().to_string()
    }
}

fn atom_text(rng: &mut StdRng, dt: PrimitiveDatatype) -> String {
    if dt == PrimitiveDatatype::String {
        return format!("\"{}\"", STRINGS.choose(rng).unwrap());
    }
    match rng.gen_range(0..3) {
        0 => constant_text(rng, dt),
        1 => format!("{}{}", ["<", "<=", ">", ">="].choose(rng).unwrap(), constant_text(rng, dt)),
        _ => {
            let (a, b) = (constant_text(rng, dt), constant_text(rng, dt));
            let (qa, qb) = (parse_rational(&a).unwrap(), parse_rational(&b).unwrap());
            let (lo, hi) = if qa <= qb { (a, b) } else { (b, a) };
            format!("{}{lo}..{hi}{}", ["[", "("].choose(rng).unwrap(), ["]", ")"].choose(rng).unwrap())
        }
    }
}

/// A random non-trivial S-FEEL condition text over `dt`.
pub fn condition_text(rng: &mut StdRng, dt: PrimitiveDatatype) -> String {
    match rng.gen_range(0..10) {
        0 | 1 => format!("not({})", if dt == PrimitiveDatatype::String { atom_text(rng, dt) } else { constant_text(rng, dt) }),
        2 | 3 => format!("{}, {}", atom_text(rng, dt), atom_text(rng, dt)),
        _ => atom_text(rng, dt),
    }
}

pub fn cond(text: &str, dt: PrimitiveDatatype) -> SFeelCondition {
    parse_condition(text, dt, None).unwrap_or_else(|e| panic!("{text}: {e}"))
}

pub struct TableShape {
    pub numeric: usize,
    pub string: bool,
    pub rules: usize,
}

pub fn random_shape(rng: &mut StdRng) -> TableShape {
    TableShape { numeric: rng.gen_range(1..=4), string: rng.gen_bool(0.5), rules: rng.gen_range(1..=8) }
}

/// A random table: numeric inputs `x0..`, an optional string input `s`, one
/// string output `y` over `p, q, r`.
pub fn random_table(rng: &mut StdRng, name: &str, shape: &TableShape) -> DecisionTable {
    let mut inputs = Vec::new();
    for i in 0..shape.numeric {
        let dt = *NUMERIC.choose(rng).unwrap();
        let facet = match rng.gen_range(0..3) {
            0 => "-",
            1 => ">=0",
            _ => "[0..5]",
        };
        inputs.push(InputColumn { name: format!("x{i}"), datatype: dt, facet: cond(facet, dt) });
    }
    if shape.string {
        let s = PrimitiveDatatype::String;
        let facet = if rng.gen_bool(0.5) { "-" } else { "\"p\", \"q\", \"r\"" };
        inputs.push(InputColumn { name: "s".into(), datatype: s, facet: cond(facet, s) });
    }
    let range: Vec<Value> = STRINGS.iter().map(|s| Value::str(*s)).collect();
    let default = rng.gen_bool(0.25).then(|| range.choose(rng).unwrap().clone());
    let mut rules = Vec::new();
    for _ in 0..shape.rules {
        let mut r = Rule::default();
        for c in &inputs {
            let text = if rng.gen_bool(0.4) { "-".to_string() } else { condition_text(rng, c.datatype) };
            r.inputs.insert(c.name.clone(), cond(&text, c.datatype));
        }
        r.outputs.insert("y".into(), range.choose(rng).unwrap().clone());
        rules.push(r);
    }
    let hit = *[HitPolicy::Unique, HitPolicy::Any, HitPolicy::Priority].choose(rng).unwrap();
    let t = DecisionTable {
        name: name.into(),
        inputs,
        outputs: vec![OutputColumn { name: "y".into(), datatype: PrimitiveDatatype::String, range, default }],
        rules,
        hit,
    };
    t.validate().unwrap_or_else(|e| panic!("generated table invalid: {e:?}"));
    t
}

/// 1 to 3 tables in a chain: each later table's `s` is fed by the previous
/// table's `y`; some numeric inputs are fed by shared input data.
pub fn random_drg(rng: &mut StdRng) -> Drg {
    let n = rng.gen_range(1..=3);
    let mut drg = Drg::default();
    for i in 0..n {
        let mut shape = random_shape(rng);
        shape.string |= i > 0;
        shape.numeric = shape.numeric.min(3);
        shape.rules = shape.rules.min(5);
        let t = random_table(rng, &format!("T{i}"), &shape);
        if i > 0 {
            drg.flows.push(Flow { source: Attr::column(&format!("T{}", i - 1), "y"), table: t.name.clone(), attr: "s".into() });
        }
        for c in t.inputs.iter().filter(|c| c.datatype.is_numeric()) {
            if rng.gen_bool(0.5) {
                let name = format!("d_{}", c.datatype.name());
                if drg.datum(&name).is_none() {
                    let facet = if rng.gen_bool(0.5) { cond(">=0", c.datatype) } else { SFeelCondition::Any };
                    drg.input_data.push(InputDatum { name: name.clone(), datatype: c.datatype, facet });
                }
                drg.flows.push(Flow { source: Attr::Datum(name), table: t.name.clone(), attr: c.name.clone() });
            }
        }
        drg.tables.push(t);
    }
    drg.outputs.push(format!("T{}", n - 1));
    if n > 1 && rng.gen_bool(0.5) {
        drg.outputs.insert(0, "T0".into());
    }
    drg.validate().unwrap_or_else(|e| panic!("generated graph invalid: {e:?}"));
    drg
}

// ---------------------------------------------------------------------------
// Grid oracle for single tables

/// Per input column, the distinct sets of rules whose entry accepts a value
/// (bit `r` for rule `r`), over representative values inside the facet;
/// `None` stands for the undefined value when `undefined` is set.
fn column_masks(t: &DecisionTable, undefined: bool) -> Vec<BTreeSet<u32>> {
    t.inputs
        .iter()
        .map(|c| {
            let mut consts = c.facet.constants();
            for r in &t.rules {
                consts.extend(r.inputs[&c.name].constants());
            }
            let mut masks = BTreeSet::new();
            for v in representatives(c.datatype, &consts) {
                if !c.facet.matches(&v) {
                    continue;
                }
                let m = t.rules.iter().enumerate().filter(|(_, r)| r.inputs[&c.name].matches(&v)).fold(0u32, |m, (i, _)| m | 1 << i);
                masks.insert(m);
            }
            if undefined {
                let m = t.rules.iter().enumerate().filter(|(_, r)| r.inputs[&c.name].is_any()).fold(0u32, |m, (i, _)| m | 1 << i);
                masks.insert(m);
            }
            masks
        })
        .collect()
}

fn both(cols: &[BTreeSet<u32>], want: u32) -> bool {
    cols.iter().all(|ms| ms.iter().any(|m| m & want == want))
}

/// Pairs `(a, b)`, `a < b`, of rules that fire together on some input.
pub fn grid_overlaps(t: &DecisionTable, only_differing: bool) -> BTreeSet<(usize, usize)> {
    let cols = column_masks(t, true);
    let mut out = BTreeSet::new();
    for a in 0..t.rules.len() {
        for b in a + 1..t.rules.len() {
            if only_differing && t.rules[a].outputs == t.rules[b].outputs {
                continue;
            }
            if both(&cols, 1 << a | 1 << b) {
                out.insert((a, b));
            }
        }
    }
    out
}

/// `(rule, by)`: `rule` never fires without the higher-priority `by`, for
/// the first such `by` in priority order.
pub fn grid_masked(t: &DecisionTable) -> BTreeSet<(usize, usize)> {
    let cols = column_masks(t, true);
    let order = t.rule_order().0;
    let mut out = BTreeSet::new();
    for (i, &r2) in order.iter().enumerate() {
        for &r1 in &order[..i] {
            let fires_alone = (0..cols.len()).any(|a| {
                cols[a].iter().any(|m| m & 1 << r2 != 0 && m & 1 << r1 == 0)
                    && cols.iter().enumerate().all(|(b, ms)| b == a || ms.iter().any(|m| m & 1 << r2 != 0))
            });
            if !fires_alone {
                out.insert((r2, r1));
                break;
            }
        }
    }
    out
}

/// Whether every total input inside the facets makes some rule fire (or
/// the output has a default).
pub fn grid_complete(t: &DecisionTable) -> bool {
    if t.outputs.iter().all(|c| c.default.is_some()) {
        return true;
    }
    let cols = column_masks(t, false);
    if cols.iter().any(|ms| ms.is_empty()) {
        return true;
    }
    fn uncovered(cols: &[BTreeSet<u32>], alive: u32) -> bool {
        match cols.split_first() {
            None => alive == 0,
            Some((ms, rest)) => ms.iter().any(|m| uncovered(rest, alive & m)),
        }
    }
    let all = if t.rules.len() == 32 { u32::MAX } else { (1u32 << t.rules.len()) - 1 };
    !uncovered(&cols, all)
}

/// A random total assignment of representative values inside the facets.
pub fn random_assignment(rng: &mut StdRng, t: &DecisionTable) -> Option<BTreeMap<String, Value>> {
    let mut out = BTreeMap::new();
    for c in &t.inputs {
        let mut consts = c.facet.constants();
        for r in &t.rules {
            consts.extend(r.inputs[&c.name].constants());
        }
        let pool: Vec<Value> = representatives(c.datatype, &consts).into_iter().filter(|v| c.facet.matches(v)).collect();
        out.insert(c.name.clone(), pool.choose(rng)?.clone());
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// Random datatypes, concepts and knowledge bases

fn random_value(rng: &mut StdRng, dt: PrimitiveDatatype) -> Value {
    if dt == PrimitiveDatatype::String {
        return Value::str(*STRINGS.choose(rng).unwrap());
    }
    loop {
        let v = num(&constant_text(rng, dt));
        if dt.admits(&v) {
            return v;
        }
    }
}

/// A bound for a facet; may lie outside a discrete datatype.
fn random_bound(rng: &mut StdRng, dt: PrimitiveDatatype) -> Value {
    num(["-2", "-1", "0", "1/2", "1", "3/2", "2", "3", "7/2", "4", "5"].choose(rng).unwrap())
        .clone()
        .to_owned()
        .pipe(|v| if dt.is_discrete() && rng.gen_bool(0.6) { Value::Num(q(&v).round()) } else { v })
}

trait Pipe: Sized {
    fn pipe<T>(self, f: impl FnOnce(Self) -> T) -> T {
        f(self)
    }
}
impl<T> Pipe for T {}

fn random_formula(rng: &mut StdRng, dt: PrimitiveDatatype, depth: u32) -> FacetFormula {
    if dt == PrimitiveDatatype::String {
        let leaf = |rng: &mut StdRng| FacetFormula::facet(FacetOp::Eq, random_value(rng, dt));
        return match (depth, rng.gen_range(0..4)) {
            (0, _) | (_, 0) => leaf(rng),
            (_, 1) => FacetFormula::Not(random_formula(rng, dt, depth - 1).into()),
            (_, 2) => random_formula(rng, dt, depth - 1).or(random_formula(rng, dt, depth - 1)),
            _ => random_formula(rng, dt, depth - 1).and(random_formula(rng, dt, depth - 1)),
        };
    }
    let leaf = |rng: &mut StdRng| {
        let op = *[FacetOp::Eq, FacetOp::Lt, FacetOp::Leq, FacetOp::Gt, FacetOp::Geq].choose(rng).unwrap();
        FacetFormula::facet(op, random_bound(rng, dt))
    };
    match (depth, rng.gen_range(0..5)) {
        (0, _) | (_, 0) | (_, 1) => leaf(rng),
        (_, 2) => FacetFormula::Not(random_formula(rng, dt, depth - 1).into()),
        (_, 3) => random_formula(rng, dt, depth - 1).or(random_formula(rng, dt, depth - 1)),
        _ => random_formula(rng, dt, depth - 1).and(random_formula(rng, dt, depth - 1)),
    }
}

fn random_expr(rng: &mut StdRng, dt: PrimitiveDatatype, depth: u32) -> DataExpr {
    match (depth, rng.gen_range(0..7)) {
        (_, 0) => DataExpr::Full,
        (_, 1) | (_, 2) => DataExpr::Enumeration((0..rng.gen_range(1..=3)).map(|_| random_value(rng, dt)).collect()),
        (0, _) | (_, 3) | (_, 4) => DataExpr::Restriction(random_formula(rng, dt, 2)),
        (_, 5) => DataExpr::Union(random_expr(rng, dt, depth - 1).into(), random_expr(rng, dt, depth - 1).into()),
        _ => {
            let (a, b) = (random_expr(rng, dt, depth - 1), random_expr(rng, dt, depth - 1));
            if rng.gen_bool(0.5) {
                DataExpr::Intersection(a.into(), b.into())
            } else {
                DataExpr::Difference(a.into(), b.into())
            }
        }
    }
}

pub fn random_derived(rng: &mut StdRng, dt: PrimitiveDatatype) -> DerivedDatatype {
    DerivedDatatype::new(dt, random_expr(rng, dt, 2)).unwrap()
}

/// A facet conjunct: mostly single comparisons, sometimes richer.
pub fn random_conjunct(rng: &mut StdRng, dt: PrimitiveDatatype) -> DerivedDatatype {
    if rng.gen_bool(0.6) && dt != PrimitiveDatatype::String {
        let op = *[FacetOp::Eq, FacetOp::Lt, FacetOp::Leq, FacetOp::Gt, FacetOp::Geq].choose(rng).unwrap();
        DerivedDatatype::facet(dt, op, random_bound(rng, dt)).unwrap()
    } else {
        random_derived(rng, dt)
    }
}

pub fn random_concept(rng: &mut StdRng, sig: &Signature, depth: u32) -> Concept {
    let concepts: Vec<&String> = sig.concepts.iter().collect();
    let roles: Vec<&String> = sig.roles.iter().collect();
    let features: Vec<(&String, &PrimitiveDatatype)> = sig.features.iter().collect();
    let pick = rng.gen_range(0..if depth == 0 { 4 } else { 11 });
    match pick {
        0 if !concepts.is_empty() => Concept::name(concepts.choose(rng).unwrap().as_str()),
        1 if !features.is_empty() => {
            let (f, dt) = features.choose(rng).unwrap();
            Concept::some_value(f.as_str(), random_derived(rng, **dt))
        }
        2 if !features.is_empty() => Concept::undef(features.choose(rng).unwrap().0.as_str()),
        3 if rng.gen_bool(0.3) => if rng.gen_bool(0.5) { Concept::Top } else { Concept::Bot },
        0..=3 => match concepts.choose(rng) {
            Some(c) => Concept::name(c.as_str()),
            None => Concept::Top,
        },
        4 | 5 => random_concept(rng, sig, depth - 1).not(),
        6 => random_concept(rng, sig, depth - 1).and(random_concept(rng, sig, depth - 1)),
        7 => random_concept(rng, sig, depth - 1).or(random_concept(rng, sig, depth - 1)),
        8 | 9 if !roles.is_empty() => Concept::exists(roles.choose(rng).unwrap().as_str(), random_concept(rng, sig, depth - 1)),
        _ if !roles.is_empty() => Concept::forall(roles.choose(rng).unwrap().as_str(), random_concept(rng, sig, depth - 1)),
        _ => random_concept(rng, sig, depth - 1),
    }
}

pub fn small_signature() -> Signature {
    let mut s = Signature::default();
    for c in ["A", "B", "C"] {
        s.add_concept(c).unwrap();
    }
    for r in ["R", "S"] {
        s.add_role(r).unwrap();
    }
    s.add_feature("f", PrimitiveDatatype::Integer).unwrap();
    s.add_feature("h", PrimitiveDatatype::Integer).unwrap();
    s.add_feature("g", PrimitiveDatatype::Real).unwrap();
    s
}

/// A small random knowledge base over [`small_signature`].
pub fn random_kb(rng: &mut StdRng) -> Kb {
    let signature = small_signature();
    let mut tbox = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let a = random_concept(rng, &signature, 1);
        let b = random_concept(rng, &signature, 2);
        tbox.push(TBoxAxiom::ConceptIncl(a, b));
    }
    if rng.gen_bool(0.25) {
        tbox.push(TBoxAxiom::RoleIncl("R".into(), "S".into()));
    }
    if rng.gen_bool(0.15) {
        tbox.push(TBoxAxiom::RoleDisj("R".into(), "S".into()));
    }
    if rng.gen_bool(0.2) {
        tbox.push(TBoxAxiom::FeatureIncl("f".into(), "h".into()));
    }
    if rng.gen_bool(0.15) {
        tbox.push(TBoxAxiom::FeatureDisj("f".into(), "h".into()));
    }
    let objects = ["a", "b"];
    let mut abox = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let o = objects.choose(rng).unwrap().to_string();
        abox.push(match rng.gen_range(0..4) {
            0 | 1 => AboxFact::Concept(["A", "B", "C"].choose(rng).unwrap().to_string(), o),
            2 => AboxFact::Role(["R", "S"].choose(rng).unwrap().to_string(), o, objects.choose(rng).unwrap().to_string()),
            _ => {
                let (f, dt) = [("f", PrimitiveDatatype::Integer), ("h", PrimitiveDatatype::Integer), ("g", PrimitiveDatatype::Real)]
                    .choose(rng)
                    .copied()
                    .unwrap();
                AboxFact::Feature(f.into(), o, random_value(rng, dt))
            }
        });
    }
    let kb = Kb { signature, tbox, abox };
    kb.check().unwrap();
    kb
}

// ---------------------------------------------------------------------------
// Finite interpretations

#[derive(Clone, Debug)]
pub struct Interpretation {
    pub size: usize,
    pub concepts: BTreeMap<String, Vec<bool>>,
    pub roles: BTreeMap<String, BTreeSet<(usize, usize)>>,
    pub features: BTreeMap<String, Vec<Option<Value>>>,
    pub objects: BTreeMap<String, usize>,
}

impl Interpretation {
    pub fn holds(&self, c: &Concept, x: usize) -> bool {
        match c {
            Concept::Top => true,
            Concept::Bot => false,
            Concept::Name(n) => self.concepts[n][x],
            Concept::Not(a) => !self.holds(a, x),
            Concept::And(a, b) => self.holds(a, x) && self.holds(b, x),
            Concept::Or(a, b) => self.holds(a, x) || self.holds(b, x),
            Concept::Exists(r, a) => self.roles[r].iter().any(|&(s, t)| s == x && self.holds(a, t)),
            Concept::Forall(r, a) => self.roles[r].iter().all(|&(s, t)| s != x || self.holds(a, t)),
            Concept::ExistsF(f, e) => self.features[f][x].as_ref().is_some_and(|v| value_in(e, v) == Ok(true)),
            Concept::Undef(f) => self.features[f][x].is_none(),
        }
    }

    pub fn is_model(&self, kb: &Kb) -> bool {
        let all = 0..self.size;
        let tbox_ok = kb.tbox.iter().all(|ax| match ax {
            TBoxAxiom::ConceptIncl(a, b) => all.clone().all(|x| !self.holds(a, x) || self.holds(b, x)),
            TBoxAxiom::RoleIncl(r, s) => self.roles[r].is_subset(&self.roles[s]),
            TBoxAxiom::RoleDisj(r, s) => self.roles[r].is_disjoint(&self.roles[s]),
            TBoxAxiom::FeatureIncl(f, h) => all.clone().all(|x| self.features[f][x].is_none() || self.features[f][x] == self.features[h][x]),
            TBoxAxiom::FeatureDisj(f, h) => {
                all.clone().all(|x| self.features[f][x].is_none() || self.features[f][x] != self.features[h][x])
            }
        });
        tbox_ok
            && kb.abox.iter().all(|fact| match fact {
                AboxFact::Concept(c, o) => self.concepts[c][self.objects[o]],
                AboxFact::Role(r, a, b) => self.roles[r].contains(&(self.objects[a], self.objects[b])),
                AboxFact::Feature(f, o, v) => self.features[f][self.objects[o]].as_ref() == Some(v),
            })
    }
}

/// Values worth trying for each feature of `kb`.
pub fn value_pools(kb: &Kb) -> BTreeMap<String, Vec<Value>> {
    let mut consts: BTreeMap<String, Vec<Value>> = BTreeMap::new();
    fn walk(c: &Concept, out: &mut BTreeMap<String, Vec<Value>>) {
        if let Concept::ExistsF(f, e) = c {
            out.entry(f.clone()).or_default().extend(e.constants());
        }
        for x in c.children() {
            walk(x, out);
        }
    }
    for ax in &kb.tbox {
        if let TBoxAxiom::ConceptIncl(a, b) = ax {
            walk(a, &mut consts);
            walk(b, &mut consts);
        }
    }
    for fact in &kb.abox {
        if let AboxFact::Feature(f, _, v) = fact {
            consts.entry(f.clone()).or_default().push(v.clone());
        }
    }
    // Shared constants across features linked by inclusion or disjointness.
    let all: Vec<Value> = consts.values().flatten().cloned().collect();
    kb.signature
        .features
        .iter()
        .map(|(f, dt)| (f.clone(), representatives(*dt, &all)))
        .collect()
}

/// Searches for a model with up to `max_size` elements: exhaustively for one
/// element, by sampling `samples` interpretations for larger sizes.
pub fn find_model(kb: &Kb, rng: &mut StdRng, max_size: usize, samples: usize) -> Option<Interpretation> {
    let pools = value_pools(kb);
    let objects: Vec<String> = kb.objects().into_iter().collect();
    for size in 1..=max_size {
        let tries = if size == 1 { usize::MAX } else { samples };
        let mut exhaustive = Exhaustive::new(kb, &pools, size);
        for t in 0..tries {
            let mut i = if size == 1 {
                match exhaustive.next() {
                    Some(i) => i,
                    None => break,
                }
            } else {
                random_interpretation(kb, &pools, size, rng)
            };
            let _ = t;
            for (k, o) in objects.iter().enumerate() {
                let e = if size == 1 { 0 } else if k < size && rng.gen_bool(0.8) { k } else { rng.gen_range(0..size) };
                i.objects.insert(o.clone(), e);
            }
            if i.is_model(kb) {
                return Some(i);
            }
        }
    }
    None
}

fn random_interpretation(kb: &Kb, pools: &BTreeMap<String, Vec<Value>>, size: usize, rng: &mut StdRng) -> Interpretation {
    let sig = &kb.signature;
    Interpretation {
        size,
        concepts: sig.concepts.iter().map(|c| (c.clone(), (0..size).map(|_| rng.gen_bool(0.5)).collect())).collect(),
        roles: sig
            .roles
            .iter()
            .map(|r| {
                let edges = (0..size).flat_map(|a| (0..size).map(move |b| (a, b))).filter(|_| rng.gen_bool(0.35)).collect();
                (r.clone(), edges)
            })
            .collect(),
        features: sig
            .features
            .keys()
            .map(|f| {
                let pool = &pools[f];
                (f.clone(), (0..size).map(|_| if rng.gen_bool(0.3) { None } else { pool.choose(rng).cloned() }).collect())
            })
            .collect(),
        objects: BTreeMap::new(),
    }
}

/// All one-element interpretations, as a counter over per-symbol choices.
struct Exhaustive<'a> {
    kb: &'a Kb,
    pools: &'a BTreeMap<String, Vec<Value>>,
    radix: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl<'a> Exhaustive<'a> {
    fn new(kb: &'a Kb, pools: &'a BTreeMap<String, Vec<Value>>, size: usize) -> Self {
        let sig = &kb.signature;
        let mut radix = vec![2; sig.concepts.len() + sig.roles.len()];
        radix.extend(sig.features.keys().map(|f| pools[f].len() + 1));
        let digits = vec![0; radix.len()];
        Exhaustive { kb, pools, radix, digits, done: size != 1 }
    }
}

impl Iterator for Exhaustive<'_> {
    type Item = Interpretation;

    fn next(&mut self) -> Option<Interpretation> {
        if self.done {
            return None;
        }
        let sig = &self.kb.signature;
        let mut d = self.digits.iter();
        let concepts = sig.concepts.iter().map(|c| (c.clone(), vec![*d.next().unwrap() == 1])).collect();
        let roles = sig
            .roles
            .iter()
            .map(|r| (r.clone(), if *d.next().unwrap() == 1 { [(0, 0)].into_iter().collect() } else { BTreeSet::new() }))
            .collect();
        let features = sig
            .features
            .keys()
            .map(|f| {
                let k = *d.next().unwrap();
                (f.clone(), vec![if k == 0 { None } else { Some(self.pools[f][k - 1].clone()) }])
            })
            .collect();
        // advance
        let mut i = 0;
        loop {
            if i == self.digits.len() {
                self.done = true;
                break;
            }
            self.digits[i] += 1;
            if self.digits[i] < self.radix[i] {
                break;
            }
            self.digits[i] = 0;
            i += 1;
        }
        Some(Interpretation { size: 1, concepts, roles, features, objects: BTreeMap::new() })
    }
}

// ---------------------------------------------------------------------------
// Random documents

pub fn random_document(rng: &mut StdRng) -> Document {
    let mut signature = Signature::default();
    for c in ["Case", "A", "B"] {
        signature.add_concept(c).unwrap();
    }
    for r in ["R", "S"] {
        signature.add_role(r).unwrap();
    }
    for (f, dt) in [("f", PrimitiveDatatype::Integer), ("f2", PrimitiveDatatype::Integer), ("g", PrimitiveDatatype::Real), ("k", PrimitiveDatatype::String)] {
        if rng.gen_bool(0.7) {
            signature.add_feature(f, dt).unwrap();
        }
    }
    let drg = random_drg(rng);
    let mut background = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        background.push(match rng.gen_range(0..6) {
            0 => TBoxAxiom::RoleIncl("R".into(), "S".into()),
            1 => TBoxAxiom::RoleDisj("S".into(), "R".into()),
            2 if signature.features.contains_key("f") && signature.features.contains_key("f2") => {
                TBoxAxiom::FeatureIncl("f".into(), "f2".into())
            }
            _ => TBoxAxiom::ConceptIncl(random_concept(rng, &signature, 2), random_concept(rng, &signature, 2)),
        });
    }
    let mut ext = signature.clone();
    for (n, dt) in drg_signature(&drg) {
        ext.add_feature(&n, dt).unwrap();
    }
    let mut abox = Vec::new();
    let features: Vec<(String, PrimitiveDatatype)> = ext.features.iter().map(|(f, d)| (f.clone(), *d)).collect();
    for _ in 0..rng.gen_range(0..=4) {
        let o = ["o1", "o2"].choose(rng).unwrap().to_string();
        abox.push(match rng.gen_range(0..3) {
            0 => AboxFact::Concept("A".into(), o),
            1 => AboxFact::Role("R".into(), o, "o2".into()),
            _ => {
                let (f, dt) = features.choose(rng).unwrap().clone();
                AboxFact::Feature(f, o, random_value(rng, dt))
            }
        });
    }
    let mut free = signature.clone();
    for a in drg.free_inputs() {
        let name = dkbv_core::encoding::feature_name(&a);
        free.add_feature(&name, drg.attr_type(&a).unwrap()).unwrap();
    }
    let templates = (0..rng.gen_range(0..=2)).map(|i| (format!("t{i}"), random_concept(rng, &free, 2))).collect();
    let today = rng.gen_bool(0.5).then(|| BigRational::from_integer(rng.gen_range(0..30000).into()));
    let dkb = Dkb { signature, background, drg, bridge: "Case".into(), abox };
    dkbv_core::encoding::validate_dkb(&dkb).unwrap_or_else(|e| panic!("generated document invalid: {e:?}"));
    Document { today, dkb, templates }
}
