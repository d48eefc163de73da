//! OWL 2 functional-style syntax: export of an encoded DKB and a checker for
//! the fragment of the grammar the exporter uses.
//!
//! Reals and rationals map to `xsd:decimal`; OWL 2 has no datatype for the
//! full real line, so this is an approximation. Values without a finite
//! decimal expansion are written as `owl:rational` literals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use dkbv_core::datatypes::{format_rational, DataExpr, DerivedDatatype, FacetFormula, FacetOp, PrimitiveDatatype, Value};
use dkbv_core::dl::{AboxFact, Concept, Kb, TBoxAxiom};
use dkbv_core::encoding::{encode_dkb, Dkb, EncodingError};

pub const ONTOLOGY_IRI: &str = "http://example.org/dkbv/dkb";

pub fn xsd(dt: PrimitiveDatatype) -> &'static str {
    match dt {
        PrimitiveDatatype::String => "xsd:string",
        PrimitiveDatatype::Natural => "xsd:nonNegativeInteger",
        PrimitiveDatatype::Integer => "xsd:integer",
        PrimitiveDatatype::Rational | PrimitiveDatatype::Real => "xsd:decimal",
    }
}

fn iri(name: &str) -> String {
    let plain = name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-')
        && name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
        && !name.ends_with('.');
    if plain {
        format!(":{name}")
    } else {
        let enc: String = name
            .bytes()
            .map(|b| if b.is_ascii_alphanumeric() || b"_.-".contains(&b) { (b as char).to_string() } else { format!("%{b:02X}") })
            .collect();
        format!("<{ONTOLOGY_IRI}#{enc}>")
    }
}

fn literal(dt: PrimitiveDatatype, v: &Value) -> String {
    match v {
        Value::Str(s) => format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
        Value::Num(q) => {
            let text = format_rational(q);
            let ty = if text.contains('/') {
                "owl:rational"
            } else if q.is_integer() && dt.is_discrete() {
                xsd(dt)
            } else {
                "xsd:decimal"
            };
            format!("\"{text}\"^^{ty}")
        }
    }
}

fn facet_name(op: FacetOp) -> &'static str {
    match op {
        FacetOp::Lt => "xsd:maxExclusive",
        FacetOp::Leq => "xsd:maxInclusive",
        FacetOp::Gt => "xsd:minExclusive",
        FacetOp::Geq => "xsd:minInclusive",
        FacetOp::Eq => unreachable!("equality is a one-of"),
    }
}

/// Comparison facets of a conjunction, or `None` if it contains anything else.
fn plain_facets(f: &FacetFormula, out: &mut Vec<(FacetOp, Value)>) -> bool {
    match f {
        FacetFormula::Facet(x) if x.op != FacetOp::Eq => {
            out.push((x.op, x.bound.clone()));
            true
        }
        FacetFormula::And(a, b) => plain_facets(a, out) && plain_facets(b, out),
        _ => false,
    }
}

fn formula_range(dt: PrimitiveDatatype, f: &FacetFormula) -> String {
    let mut facets = Vec::new();
    if plain_facets(f, &mut facets) {
        let parts: Vec<String> = facets.iter().map(|(op, v)| format!("{} {}", facet_name(*op), literal(dt, v))).collect();
        return format!("DatatypeRestriction({} {})", xsd(dt), parts.join(" "));
    }
    match f {
        FacetFormula::Facet(x) => format!("DataOneOf({})", literal(dt, &x.bound)),
        FacetFormula::And(a, b) => format!("DataIntersectionOf({} {})", formula_range(dt, a), formula_range(dt, b)),
        FacetFormula::Or(a, b) => format!("DataUnionOf({} {})", formula_range(dt, a), formula_range(dt, b)),
        FacetFormula::Not(a) => format!("DataIntersectionOf({} DataComplementOf({}))", xsd(dt), formula_range(dt, a)),
    }
}

fn expr_range(dt: PrimitiveDatatype, e: &DataExpr) -> String {
    match e {
        DataExpr::Full => xsd(dt).into(),
        DataExpr::Enumeration(vs) if vs.is_empty() => format!("DataIntersectionOf({0} DataComplementOf({0}))", xsd(dt)),
        DataExpr::Enumeration(vs) => {
            format!("DataOneOf({})", vs.iter().map(|v| literal(dt, v)).collect::<Vec<_>>().join(" "))
        }
        DataExpr::Restriction(f) => formula_range(dt, f),
        DataExpr::Union(a, b) => format!("DataUnionOf({} {})", expr_range(dt, a), expr_range(dt, b)),
        DataExpr::Intersection(a, b) => format!("DataIntersectionOf({} {})", expr_range(dt, a), expr_range(dt, b)),
        DataExpr::Difference(a, b) => {
            format!("DataIntersectionOf({} DataComplementOf({}))", expr_range(dt, a), expr_range(dt, b))
        }
    }
}

pub fn data_range(e: &DerivedDatatype) -> String {
    expr_range(e.base(), e.expr())
}

fn flatten<'a>(c: &'a Concept, and: bool, out: &mut Vec<&'a Concept>) {
    match (c, and) {
        (Concept::And(a, b), true) | (Concept::Or(a, b), false) => {
            flatten(a, and, out);
            flatten(b, and, out);
        }
        _ => out.push(c),
    }
}

pub fn class_expression(c: &Concept, kb: &Kb) -> String {
    let dt = |f: &str| kb.signature.features.get(f).copied().unwrap_or(PrimitiveDatatype::Real);
    match c {
        Concept::Top => "owl:Thing".into(),
        Concept::Bot => "owl:Nothing".into(),
        Concept::Name(n) => iri(n),
        Concept::Not(a) => format!("ObjectComplementOf({})", class_expression(a, kb)),
        Concept::And(..) | Concept::Or(..) => {
            let and = matches!(c, Concept::And(..));
            let mut items = Vec::new();
            flatten(c, and, &mut items);
            let parts: Vec<String> = items.iter().map(|x| class_expression(x, kb)).collect();
            format!("{}({})", if and { "ObjectIntersectionOf" } else { "ObjectUnionOf" }, parts.join(" "))
        }
        Concept::Exists(r, a) => format!("ObjectSomeValuesFrom({} {})", iri(r), class_expression(a, kb)),
        Concept::Forall(r, a) => format!("ObjectAllValuesFrom({} {})", iri(r), class_expression(a, kb)),
        Concept::ExistsF(f, e) => format!("DataSomeValuesFrom({} {})", iri(f), data_range(e)),
        Concept::Undef(f) => format!("ObjectComplementOf(DataSomeValuesFrom({} {}))", iri(f), xsd(dt(f))),
    }
}

fn axiom(ax: &TBoxAxiom, kb: &Kb) -> String {
    match ax {
        TBoxAxiom::ConceptIncl(a, b) => format!("SubClassOf({} {})", class_expression(a, kb), class_expression(b, kb)),
        TBoxAxiom::RoleIncl(a, b) => format!("SubObjectPropertyOf({} {})", iri(a), iri(b)),
        TBoxAxiom::FeatureIncl(a, b) => format!("SubDataPropertyOf({} {})", iri(a), iri(b)),
        TBoxAxiom::RoleDisj(a, b) => format!("DisjointObjectProperties({} {})", iri(a), iri(b)),
        TBoxAxiom::FeatureDisj(a, b) => format!("DisjointDataProperties({} {})", iri(a), iri(b)),
    }
}

fn assertion(fact: &AboxFact, kb: &Kb) -> String {
    match fact {
        AboxFact::Concept(c, o) => format!("ClassAssertion({} {})", iri(c), iri(o)),
        AboxFact::Role(r, a, b) => format!("ObjectPropertyAssertion({} {} {})", iri(r), iri(a), iri(b)),
        AboxFact::Feature(f, o, v) => {
            let dt = kb.signature.features.get(f).copied().unwrap_or(PrimitiveDatatype::Real);
            format!("DataPropertyAssertion({} {} {})", iri(f), iri(o), literal(dt, v))
        }
    }
}

/// The knowledge base in functional-style syntax.
pub fn export_kb(kb: &Kb) -> String {
    let mut out = String::new();
    for (p, i) in [
        ("", &*format!("{ONTOLOGY_IRI}#")),
        ("owl", "http://www.w3.org/2002/07/owl#"),
        ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
        ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
        ("xsd", "http://www.w3.org/2001/XMLSchema#"),
    ] {
        writeln!(out, "Prefix({p}:=<{i}>)").unwrap();
    }
    writeln!(out, "Ontology(<{ONTOLOGY_IRI}>").unwrap();
    let sig = &kb.signature;
    for c in &sig.concepts {
        writeln!(out, "  Declaration(Class({}))", iri(c)).unwrap();
    }
    for r in &sig.roles {
        writeln!(out, "  Declaration(ObjectProperty({}))", iri(r)).unwrap();
    }
    for f in sig.features.keys() {
        writeln!(out, "  Declaration(DataProperty({}))", iri(f)).unwrap();
    }
    for o in kb.objects() {
        writeln!(out, "  Declaration(NamedIndividual({}))", iri(&o)).unwrap();
    }
    for (f, dt) in &sig.features {
        writeln!(out, "  FunctionalDataProperty({})", iri(f)).unwrap();
        writeln!(out, "  DataPropertyRange({} {})", iri(f), xsd(*dt)).unwrap();
    }
    for ax in &kb.tbox {
        writeln!(out, "  {}", axiom(ax, kb)).unwrap();
    }
    for fact in &kb.abox {
        writeln!(out, "  {}", assertion(fact, kb)).unwrap();
    }
    out.push_str(")\n");
    out
}

/// Ontology, DRG and facts of `d`, encoded.
pub fn export_owl(d: &Dkb) -> Result<String, EncodingError> {
    Ok(export_kb(&encode_dkb(d)?))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{offset}: {message}")]
pub struct OwlSyntaxError {
    pub offset: usize,
    pub message: String,
}

/// What a well-formed document contains.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OwlSummary {
    pub prefixes: BTreeSet<String>,
    /// Axiom counts per constructor, declarations keyed by entity kind.
    pub axioms: BTreeMap<String, usize>,
    pub functional_data_properties: BTreeSet<String>,
    pub data_properties: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Eq,
    Full(String),
    Name(String),
    Lit(String),
    Caret,
    Lang(String),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, OwlSyntaxError> {
    let err = |offset, m: &str| Err(OwlSyntaxError { offset, message: m.into() });
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'#' => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                out.push((i, Tok::Open));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::Close));
                i += 1;
            }
            b'=' => {
                out.push((i, Tok::Eq));
                i += 1;
            }
            b'^' if b.get(i + 1) == Some(&b'^') => {
                out.push((i, Tok::Caret));
                i += 2;
            }
            b'<' => {
                let end = text[i..].find('>').map(|e| i + e);
                let Some(end) = end else { return err(i, "unterminated IRI") };
                let body = &text[i + 1..end];
                if body.is_empty() || body.contains(|c: char| c.is_whitespace() || "<\"{}|^`\\".contains(c)) {
                    return err(i, "malformed IRI");
                }
                out.push((i, Tok::Full(body.into())));
                i = end + 1;
            }
            b'"' => {
                let start = i;
                i += 1;
                let mut s = String::new();
                loop {
                    match text[i..].chars().next() {
                        None => return err(start, "unterminated literal"),
                        Some('"') => break,
                        Some('\\') => match b.get(i + 1) {
                            Some(b'"') | Some(b'\\') => {
                                s.push(b[i + 1] as char);
                                i += 2;
                            }
                            _ => return err(i, "bad escape"),
                        },
                        Some(ch) => {
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                i += 1;
                out.push((start, Tok::Lit(s)));
            }
            b'@' => {
                let start = i;
                i += 1;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'-') {
                    i += 1;
                }
                if i == start + 1 {
                    return err(start, "empty language tag");
                }
                out.push((start, Tok::Lang(text[start + 1..i].into())));
            }
            _ if c.is_ascii_alphabetic() || c == b'_' || c == b':' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b"_-.:%".contains(&b[i])) {
                    i += 1;
                }
                let word = &text[start..i];
                if word.ends_with('.') {
                    return err(i - 1, "name ends with '.'");
                }
                if word.matches(':').count() > 1 {
                    return err(start, "malformed prefixed name");
                }
                out.push((start, Tok::Name(word.into())));
            }
            _ => return err(i, "unexpected character"),
        }
    }
    Ok(out)
}

const FACETS: &[&str] = &[
    "xsd:minInclusive",
    "xsd:maxInclusive",
    "xsd:minExclusive",
    "xsd:maxExclusive",
    "xsd:length",
    "xsd:minLength",
    "xsd:maxLength",
    "xsd:pattern",
];

struct Checker {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    summary: OwlSummary,
}

type Check<T = ()> = Result<T, OwlSyntaxError>;

impl Checker {
    fn at(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn fail<T>(&self, m: impl Into<String>) -> Check<T> {
        Err(OwlSyntaxError { offset: self.at(), message: m.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn open(&mut self) -> Check {
        match self.bump() {
            Some(Tok::Open) => Ok(()),
            _ => {
                self.pos -= 1;
                self.fail("expected '('")
            }
        }
    }

    fn close(&mut self) -> Check {
        match self.bump() {
            Some(Tok::Close) => Ok(()),
            _ => {
                self.pos -= 1;
                self.fail("expected ')'")
            }
        }
    }

    fn at_close(&self) -> bool {
        self.peek() == Some(&Tok::Close)
    }

    fn prefixed(&self, w: &str) -> Check {
        match w.split_once(':') {
            Some((p, _)) if self.summary.prefixes.contains(p) => Ok(()),
            Some((p, _)) => self.fail(format!("undeclared prefix '{p}:'")),
            None => self.fail(format!("expected an IRI, found {w}")),
        }
    }

    /// An IRI; returns its text.
    fn iri(&mut self) -> Check<String> {
        match self.peek().cloned() {
            Some(Tok::Full(s)) => {
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Name(w)) if w.contains(':') => {
                self.prefixed(&w)?;
                self.pos += 1;
                Ok(w)
            }
            _ => self.fail("expected an IRI"),
        }
    }

    /// A constructor keyword followed by '('.
    fn ctor(&mut self) -> Option<String> {
        if let (Some(Tok::Name(w)), Some((_, Tok::Open))) = (self.peek(), self.toks.get(self.pos + 1)) {
            if !w.contains(':') {
                let w = w.clone();
                self.pos += 2;
                return Some(w);
            }
        }
        None
    }

    fn literal(&mut self) -> Check {
        match self.bump() {
            Some(Tok::Lit(_)) => {}
            _ => {
                self.pos -= 1;
                return self.fail("expected a literal");
            }
        }
        match self.peek() {
            Some(Tok::Caret) => {
                self.pos += 1;
                self.iri().map(drop)
            }
            Some(Tok::Lang(_)) => {
                self.pos += 1;
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn list<T>(&mut self, min: usize, mut item: impl FnMut(&mut Self) -> Check<T>) -> Check<Vec<T>> {
        let mut out = Vec::new();
        while !self.at_close() {
            out.push(item(self)?);
        }
        if out.len() < min {
            return self.fail(format!("expected at least {min} arguments"));
        }
        self.close()?;
        Ok(out)
    }

    fn object_property(&mut self) -> Check {
        let save = self.pos;
        if self.ctor().as_deref() == Some("ObjectInverseOf") {
            self.iri()?;
            return self.close();
        }
        self.pos = save;
        self.iri().map(drop)
    }

    fn data_range(&mut self) -> Check {
        let save = self.pos;
        match self.ctor().as_deref() {
            None => self.iri().map(drop),
            Some("DataIntersectionOf") | Some("DataUnionOf") => self.list(2, Self::data_range).map(drop),
            Some("DataComplementOf") => {
                self.data_range()?;
                self.close()
            }
            Some("DataOneOf") => self.list(1, Self::literal).map(drop),
            Some("DatatypeRestriction") => {
                self.iri()?;
                self.list(1, |c| {
                    let f = c.iri()?;
                    if !FACETS.contains(&f.as_str()) && !f.starts_with("http://www.w3.org/2001/XMLSchema#") {
                        return c.fail(format!("unknown facet {f}"));
                    }
                    c.literal()
                })
                .map(drop)
            }
            Some(other) => {
                self.pos = save;
                self.fail(format!("expected a data range, found {other}"))
            }
        }
    }

    fn class(&mut self) -> Check {
        let save = self.pos;
        let Some(k) = self.ctor() else { return self.iri().map(drop) };
        match k.as_str() {
            "ObjectIntersectionOf" | "ObjectUnionOf" => self.list(2, Self::class).map(drop),
            "ObjectComplementOf" => {
                self.class()?;
                self.close()
            }
            "ObjectOneOf" => self.list(1, Self::individual).map(drop),
            "ObjectSomeValuesFrom" | "ObjectAllValuesFrom" => {
                self.object_property()?;
                self.class()?;
                self.close()
            }
            "ObjectHasValue" => {
                self.object_property()?;
                self.individual()?;
                self.close()
            }
            "DataSomeValuesFrom" | "DataAllValuesFrom" => {
                self.iri()?;
                self.data_range()?;
                self.close()
            }
            "DataHasValue" => {
                self.iri()?;
                self.literal()?;
                self.close()
            }
            _ => {
                self.pos = save;
                self.fail(format!("expected a class expression, found {k}"))
            }
        }
    }

    fn individual(&mut self) -> Check {
        match self.peek() {
            Some(Tok::Name(w)) if w.starts_with("_:") => {
                self.pos += 1;
                Ok(())
            }
            _ => self.iri().map(drop),
        }
    }

    fn entity(&mut self) -> Check {
        let Some(k) = self.ctor() else { return self.fail("expected an entity") };
        if !["Class", "Datatype", "ObjectProperty", "DataProperty", "AnnotationProperty", "NamedIndividual"].contains(&k.as_str())
        {
            self.pos -= 2;
            return self.fail(format!("unknown entity kind {k}"));
        }
        let i = self.iri()?;
        if k == "DataProperty" {
            self.summary.data_properties.insert(i);
        }
        *self.summary.axioms.entry(format!("Declaration({k})")).or_default() += 1;
        self.close()
    }

    fn axiom(&mut self) -> Check {
        let save = self.pos;
        let Some(k) = self.ctor() else { return self.fail("expected an axiom") };
        match k.as_str() {
            "Declaration" => {
                self.entity()?;
                return self.close();
            }
            "SubClassOf" | "DisjointUnion" => {
                if k == "DisjointUnion" {
                    self.iri()?;
                    self.list(2, Self::class)?;
                } else {
                    self.class()?;
                    self.class()?;
                    self.close()?;
                }
            }
            "EquivalentClasses" | "DisjointClasses" => {
                self.list(2, Self::class)?;
            }
            "SubObjectPropertyOf" => {
                self.object_property()?;
                self.object_property()?;
                self.close()?;
            }
            "EquivalentObjectProperties" | "DisjointObjectProperties" => {
                self.list(2, Self::object_property)?;
            }
            "SubDataPropertyOf" => {
                self.iri()?;
                self.iri()?;
                self.close()?;
            }
            "EquivalentDataProperties" | "DisjointDataProperties" => {
                self.list(2, |c| c.iri().map(drop))?;
            }
            "FunctionalDataProperty" => {
                let i = self.iri()?;
                self.summary.functional_data_properties.insert(i);
                self.close()?;
            }
            "FunctionalObjectProperty" => {
                self.object_property()?;
                self.close()?;
            }
            "DataPropertyDomain" | "ObjectPropertyDomain" | "ObjectPropertyRange" => {
                if k == "DataPropertyDomain" {
                    self.iri()?;
                } else {
                    self.object_property()?;
                }
                self.class()?;
                self.close()?;
            }
            "DataPropertyRange" => {
                self.iri()?;
                self.data_range()?;
                self.close()?;
            }
            "ClassAssertion" => {
                self.class()?;
                self.individual()?;
                self.close()?;
            }
            "ObjectPropertyAssertion" | "NegativeObjectPropertyAssertion" => {
                self.object_property()?;
                self.individual()?;
                self.individual()?;
                self.close()?;
            }
            "DataPropertyAssertion" | "NegativeDataPropertyAssertion" => {
                self.iri()?;
                self.individual()?;
                self.literal()?;
                self.close()?;
            }
            _ => {
                self.pos = save;
                return self.fail(format!("unknown axiom {k}"));
            }
        }
        *self.summary.axioms.entry(k).or_default() += 1;
        Ok(())
    }

    fn document(&mut self) -> Check {
        while let Some(Tok::Name(w)) = self.peek() {
            if w != "Prefix" {
                break;
            }
            self.pos += 1;
            self.open()?;
            let name = match self.bump() {
                Some(Tok::Name(w)) if w.ends_with(':') && w.matches(':').count() == 1 => w[..w.len() - 1].to_string(),
                _ => {
                    self.pos -= 1;
                    return self.fail("expected a prefix name");
                }
            };
            if self.bump() != Some(Tok::Eq) {
                self.pos -= 1;
                return self.fail("expected '='");
            }
            match self.bump() {
                Some(Tok::Full(_)) => {}
                _ => {
                    self.pos -= 1;
                    return self.fail("expected a full IRI");
                }
            }
            self.close()?;
            if !self.summary.prefixes.insert(name.clone()) {
                return self.fail(format!("prefix {name}: declared twice"));
            }
        }
        if self.ctor().as_deref() != Some("Ontology") {
            return self.fail("expected 'Ontology('");
        }
        if matches!(self.peek(), Some(Tok::Full(_))) || matches!(self.peek(), Some(Tok::Name(w)) if w.contains(':')) {
            self.iri()?;
            if matches!(self.peek(), Some(Tok::Full(_))) || matches!(self.peek(), Some(Tok::Name(w)) if w.contains(':')) {
                self.iri()?;
            }
        }
        while !self.at_close() {
            if self.peek().is_none() {
                return self.fail("unterminated ontology");
            }
            self.axiom()?;
        }
        self.close()?;
        if self.pos < self.toks.len() {
            return self.fail("trailing input after ontology");
        }
        Ok(())
    }
}

/// Checks `text` against the functional-style grammar (the subset covering
/// class expressions, data ranges, property and assertion axioms).
pub fn check_functional_syntax(text: &str) -> Result<OwlSummary, OwlSyntaxError> {
    let toks = lex(text)?;
    let mut c = Checker { toks, pos: 0, end: text.len(), summary: OwlSummary::default() };
    c.document()?;
    Ok(c.summary)
}
