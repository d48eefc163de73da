//! ALCH(D) syntax: signatures, concepts, axioms, negation normal form and
//! closure.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::datatypes::{complement, DerivedDatatype, PrimitiveDatatype, Value};

/// `[A-Za-z_][A-Za-z0-9_]*`; dots are reserved for mangled attribute names
/// and `#` for generated names.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DlError {
    #[error("unknown concept name {0}")]
    UnknownConcept(String),
    #[error("unknown role {0}")]
    UnknownRole(String),
    #[error("unknown feature {0}")]
    UnknownFeature(String),
    #[error("feature {feature} has datatype {expected}, found {found}")]
    FeatureType { feature: String, expected: PrimitiveDatatype, found: PrimitiveDatatype },
    #[error("{0} is declared with two different kinds")]
    NameClash(String),
    #[error("value {value} does not fit feature {feature}")]
    ValueType { feature: String, value: Value },
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Signature {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub features: BTreeMap<String, PrimitiveDatatype>,
}

impl Signature {
    pub fn contains(&self, name: &str) -> bool {
        self.concepts.contains(name) || self.roles.contains(name) || self.features.contains_key(name)
    }

    pub fn add_concept(&mut self, name: &str) -> Result<(), DlError> {
        if self.roles.contains(name) || self.features.contains_key(name) {
            return Err(DlError::NameClash(name.into()));
        }
        self.concepts.insert(name.into());
        Ok(())
    }

    pub fn add_role(&mut self, name: &str) -> Result<(), DlError> {
        if self.concepts.contains(name) || self.features.contains_key(name) {
            return Err(DlError::NameClash(name.into()));
        }
        self.roles.insert(name.into());
        Ok(())
    }

    pub fn add_feature(&mut self, name: &str, dt: PrimitiveDatatype) -> Result<(), DlError> {
        if self.concepts.contains(name) || self.roles.contains(name) {
            return Err(DlError::NameClash(name.into()));
        }
        match self.features.get(name) {
            Some(&old) if old != dt => Err(DlError::FeatureType { feature: name.into(), expected: old, found: dt }),
            _ => {
                self.features.insert(name.into(), dt);
                Ok(())
            }
        }
    }

    pub fn feature_type(&self, name: &str) -> Result<PrimitiveDatatype, DlError> {
        self.features.get(name).copied().ok_or_else(|| DlError::UnknownFeature(name.into()))
    }

    fn fresh(&self, prefix: &str) -> String {
        (0u64..)
            .map(|i| alloc::format!("{prefix}#{i}"))
            .find(|n| !self.contains(n))
            .unwrap()
    }

    pub fn fresh_concept(&mut self, prefix: &str) -> String {
        let n = self.fresh(prefix);
        self.concepts.insert(n.clone());
        n
    }

    pub fn fresh_role(&mut self, prefix: &str) -> String {
        let n = self.fresh(prefix);
        self.roles.insert(n.clone());
        n
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Top,
    Bot,
    Name(String),
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Exists(String, Box<Concept>),
    Forall(String, Box<Concept>),
    ExistsF(String, DerivedDatatype),
    Undef(String),
}

impl Concept {
    pub fn name(n: impl Into<String>) -> Self {
        Concept::Name(n.into())
    }

    pub fn not(self) -> Self {
        Concept::Not(Box::new(self))
    }

    pub fn and(self, other: Concept) -> Self {
        Concept::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Concept) -> Self {
        Concept::Or(Box::new(self), Box::new(other))
    }

    pub fn exists(role: impl Into<String>, c: Concept) -> Self {
        Concept::Exists(role.into(), Box::new(c))
    }

    pub fn forall(role: impl Into<String>, c: Concept) -> Self {
        Concept::Forall(role.into(), Box::new(c))
    }

    pub fn some_value(feature: impl Into<String>, e: DerivedDatatype) -> Self {
        Concept::ExistsF(feature.into(), e)
    }

    /// `∃F`, i.e. `∃F.D_F`.
    pub fn defined(feature: impl Into<String>, dt: PrimitiveDatatype) -> Self {
        Concept::ExistsF(feature.into(), DerivedDatatype::full(dt))
    }

    pub fn undef(feature: impl Into<String>) -> Self {
        Concept::Undef(feature.into())
    }

    /// Right-folded conjunction; `⊤` when empty.
    pub fn and_all(items: impl IntoIterator<Item = Concept>) -> Self {
        let mut items: Vec<Concept> = items.into_iter().filter(|c| *c != Concept::Top).collect();
        let Some(mut acc) = items.pop() else { return Concept::Top };
        while let Some(c) = items.pop() {
            acc = c.and(acc);
        }
        acc
    }

    /// Right-folded disjunction; `⊥` when empty.
    pub fn or_all(items: impl IntoIterator<Item = Concept>) -> Self {
        let mut items: Vec<Concept> = items.into_iter().filter(|c| *c != Concept::Bot).collect();
        let Some(mut acc) = items.pop() else { return Concept::Bot };
        while let Some(c) = items.pop() {
            acc = c.or(acc);
        }
        acc
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Concept::Not(inner) => matches!(**inner, Concept::Name(_)),
            Concept::And(a, b) | Concept::Or(a, b) => a.is_nnf() && b.is_nnf(),
            Concept::Exists(_, c) | Concept::Forall(_, c) => c.is_nnf(),
            _ => true,
        }
    }

    /// Direct subconcepts.
    pub fn children(&self) -> Vec<&Concept> {
        match self {
            Concept::Not(c) | Concept::Exists(_, c) | Concept::Forall(_, c) => alloc::vec![&**c],
            Concept::And(a, b) | Concept::Or(a, b) => alloc::vec![&**a, &**b],
            _ => Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn check(&self, sig: &Signature) -> Result<(), DlError> {
        match self {
            Concept::Top | Concept::Bot => Ok(()),
            Concept::Name(n) => {
                if sig.concepts.contains(n) {
                    Ok(())
                } else {
                    Err(DlError::UnknownConcept(n.clone()))
                }
            }
            Concept::Not(c) => c.check(sig),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.check(sig)?;
                b.check(sig)
            }
            Concept::Exists(r, c) | Concept::Forall(r, c) => {
                if !sig.roles.contains(r) {
                    return Err(DlError::UnknownRole(r.clone()));
                }
                c.check(sig)
            }
            Concept::ExistsF(f, e) => {
                let dt = sig.feature_type(f)?;
                if dt != e.base() {
                    return Err(DlError::FeatureType { feature: f.clone(), expected: dt, found: e.base() });
                }
                Ok(())
            }
            Concept::Undef(f) => sig.feature_type(f).map(|_| ()),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, needed: bool, body: &dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result| {
            if needed {
                f.write_str("(")?;
            }
            body(f)?;
            if needed {
                f.write_str(")")?;
            }
            Ok(())
        };
        match self {
            Concept::Top => f.write_str("top"),
            Concept::Bot => f.write_str("bottom"),
            Concept::Name(n) => f.write_str(n),
            Concept::Not(c) => {
                f.write_str("not ")?;
                c.fmt_prec(f, 3)
            }
            Concept::And(a, b) => paren(f, prec > 2, &|f| {
                a.fmt_prec(f, 3)?;
                f.write_str(" and ")?;
                b.fmt_prec(f, 2)
            }),
            Concept::Or(a, b) => paren(f, prec > 1, &|f| {
                a.fmt_prec(f, 2)?;
                f.write_str(" or ")?;
                b.fmt_prec(f, 1)
            }),
            Concept::Exists(r, c) => {
                write!(f, "some {r}.")?;
                c.fmt_prec(f, 3)
            }
            Concept::Forall(r, c) => {
                write!(f, "all {r}.")?;
                c.fmt_prec(f, 3)
            }
            Concept::ExistsF(feat, e) if e.is_full() => write!(f, "some {feat}"),
            Concept::ExistsF(feat, e) => write!(f, "some {feat}.{e}"),
            Concept::Undef(feat) => write!(f, "undef {feat}"),
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Surface `∀F.E`: `Undef F ⊔ ∃F.E`.
pub fn desugar_feature_forall(feature: &str, e: DerivedDatatype) -> Concept {
    Concept::undef(feature).or(Concept::some_value(feature, e))
}

/// NNF of `¬c` for `c` already in NNF.
pub fn neg(c: &Concept, sig: &Signature) -> Result<Concept, DlError> {
    Ok(match c {
        Concept::Top => Concept::Bot,
        Concept::Bot => Concept::Top,
        Concept::Name(_) => c.clone().not(),
        Concept::Not(inner) => match &**inner {
            Concept::Name(_) => (**inner).clone(),
            other => nnf(other, sig)?,
        },
        Concept::And(a, b) => neg(a, sig)?.or(neg(b, sig)?),
        Concept::Or(a, b) => match (&**a, &**b) {
            // Undef F ⊔ ∃F.X is the image of ∃F.(D_F \ X); map it back.
            (Concept::Undef(f1), Concept::ExistsF(f2, x)) if f1 == f2 => Concept::ExistsF(f1.clone(), complement(x)),
            _ => neg(a, sig)?.and(neg(b, sig)?),
        },
        Concept::Exists(r, c) => Concept::forall(r.clone(), neg(c, sig)?),
        Concept::Forall(r, c) => Concept::exists(r.clone(), neg(c, sig)?),
        Concept::ExistsF(f, e) if e.is_full() => Concept::undef(f.clone()),
        Concept::ExistsF(f, e) => Concept::undef(f.clone()).or(Concept::ExistsF(f.clone(), complement(e))),
        Concept::Undef(f) => Concept::defined(f.clone(), sig.feature_type(f)?),
    })
}

/// Negation normal form: negation only in front of concept names.
pub fn nnf(c: &Concept, sig: &Signature) -> Result<Concept, DlError> {
    Ok(match c {
        Concept::Not(inner) => neg(&nnf(inner, sig)?, sig)?,
        Concept::And(a, b) => nnf(a, sig)?.and(nnf(b, sig)?),
        Concept::Or(a, b) => nnf(a, sig)?.or(nnf(b, sig)?),
        Concept::Exists(r, c) => Concept::exists(r.clone(), nnf(c, sig)?),
        Concept::Forall(r, c) => Concept::forall(r.clone(), nnf(c, sig)?),
        other => other.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TBoxAxiom {
    ConceptIncl(Concept, Concept),
    RoleIncl(String, String),
    FeatureIncl(String, String),
    RoleDisj(String, String),
    FeatureDisj(String, String),
}

impl TBoxAxiom {
    pub fn check(&self, sig: &Signature) -> Result<(), DlError> {
        let role = |r: &String| if sig.roles.contains(r) { Ok(()) } else { Err(DlError::UnknownRole(r.clone())) };
        match self {
            TBoxAxiom::ConceptIncl(a, b) => {
                a.check(sig)?;
                b.check(sig)
            }
            TBoxAxiom::RoleIncl(a, b) | TBoxAxiom::RoleDisj(a, b) => {
                role(a)?;
                role(b)
            }
            TBoxAxiom::FeatureIncl(a, b) | TBoxAxiom::FeatureDisj(a, b) => {
                let (x, y) = (sig.feature_type(a)?, sig.feature_type(b)?);
                if x != y {
                    return Err(DlError::FeatureType { feature: b.clone(), expected: x, found: y });
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for TBoxAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TBoxAxiom::ConceptIncl(a, b) => write!(f, "{a} sub {b}"),
            TBoxAxiom::RoleIncl(a, b) => write!(f, "rolesub {a} {b}"),
            TBoxAxiom::FeatureIncl(a, b) => write!(f, "featuresub {a} {b}"),
            TBoxAxiom::RoleDisj(a, b) => write!(f, "roledisj {a} {b}"),
            TBoxAxiom::FeatureDisj(a, b) => write!(f, "featuredisj {a} {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AboxFact {
    Concept(String, String),
    Role(String, String, String),
    Feature(String, String, Value),
}

impl AboxFact {
    pub fn check(&self, sig: &Signature) -> Result<(), DlError> {
        match self {
            AboxFact::Concept(n, _) => {
                if sig.concepts.contains(n) {
                    Ok(())
                } else {
                    Err(DlError::UnknownConcept(n.clone()))
                }
            }
            AboxFact::Role(r, _, _) => {
                if sig.roles.contains(r) {
                    Ok(())
                } else {
                    Err(DlError::UnknownRole(r.clone()))
                }
            }
            AboxFact::Feature(f, _, v) => {
                if sig.feature_type(f)?.admits(v) {
                    Ok(())
                } else {
                    Err(DlError::ValueType { feature: f.clone(), value: v.clone() })
                }
            }
        }
    }

    pub fn objects(&self) -> Vec<&str> {
        match self {
            AboxFact::Concept(_, o) | AboxFact::Feature(_, o, _) => alloc::vec![o.as_str()],
            AboxFact::Role(_, a, b) => alloc::vec![a.as_str(), b.as_str()],
        }
    }
}

impl fmt::Display for AboxFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AboxFact::Concept(n, o) => write!(f, "{n}({o})"),
            AboxFact::Role(r, a, b) => write!(f, "{r}({a}, {b})"),
            AboxFact::Feature(feat, o, v) => write!(f, "{feat}({o}, {v})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Kb {
    pub signature: Signature,
    pub tbox: Vec<TBoxAxiom>,
    pub abox: Vec<AboxFact>,
}

impl Kb {
    pub fn check(&self) -> Result<(), DlError> {
        self.tbox.iter().try_for_each(|a| a.check(&self.signature))?;
        self.abox.iter().try_for_each(|a| a.check(&self.signature))
    }

    pub fn objects(&self) -> BTreeSet<String> {
        self.abox.iter().flat_map(|f| f.objects()).map(String::from).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Closure {
    pub concepts: BTreeSet<Concept>,
    pub objects: BTreeSet<String>,
}

/// Smallest set holding the KB's concepts, closed under subconcepts and
/// NNF negation. TBox concepts are expected in NNF.
pub fn closure(kb: &Kb) -> Result<Closure, DlError> {
    let mut out = Closure { objects: kb.objects(), ..Closure::default() };
    let mut todo: Vec<Concept> = Vec::new();
    for ax in &kb.tbox {
        if let TBoxAxiom::ConceptIncl(a, b) = ax {
            todo.push(a.clone());
            todo.push(b.clone());
        }
    }
    for fact in &kb.abox {
        if let AboxFact::Concept(n, _) = fact {
            todo.push(Concept::name(n.clone()));
        }
    }
    while let Some(c) = todo.pop() {
        if out.concepts.contains(&c) {
            continue;
        }
        todo.extend(c.children().into_iter().cloned());
        todo.push(neg(&c, &kb.signature)?);
        out.concepts.insert(c);
    }
    Ok(out)
}

/// `Γ_D`: the datatype expressions under `∃F.E` in the closure with `D_F = D`.
pub fn gamma(kb: &Kb, dt: PrimitiveDatatype) -> Result<BTreeSet<DerivedDatatype>, DlError> {
    Ok(closure(kb)?
        .concepts
        .into_iter()
        .filter_map(|c| match c {
            Concept::ExistsF(_, e) if e.base() == dt => Some(e),
            _ => None,
        })
        .collect())
}
