//! Primitive datatypes, facets, derived datatypes and an exact solver for
//! conjunctions of unary datatype constraints.
//!
//! Numbers are exact rationals throughout. Rational and real are solved the
//! same way (dense orders); natural and integer restrict to the integers.

mod interval;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
pub use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use interval::{Interval, IntervalSet, Lower, Upper};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimitiveDatatype {
    String,
    Natural,
    Integer,
    Rational,
    Real,
}

impl PrimitiveDatatype {
    pub const ALL: [PrimitiveDatatype; 5] = [
        PrimitiveDatatype::String,
        PrimitiveDatatype::Natural,
        PrimitiveDatatype::Integer,
        PrimitiveDatatype::Rational,
        PrimitiveDatatype::Real,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrimitiveDatatype::String => "string",
            PrimitiveDatatype::Natural => "natural",
            PrimitiveDatatype::Integer => "integer",
            PrimitiveDatatype::Rational => "rational",
            PrimitiveDatatype::Real => "real",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        PrimitiveDatatype::ALL.into_iter().find(|d| d.name() == name)
    }

    pub fn is_numeric(self) -> bool {
        self != PrimitiveDatatype::String
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, PrimitiveDatatype::Natural | PrimitiveDatatype::Integer)
    }

    /// Whether `value` lies in this datatype's domain.
    pub fn admits(self, value: &Value) -> bool {
        match (self, value) {
            (PrimitiveDatatype::String, Value::Str(_)) => true,
            (PrimitiveDatatype::Natural, Value::Num(q)) => q.is_integer() && !q.is_negative(),
            (PrimitiveDatatype::Integer, Value::Num(q)) => q.is_integer(),
            (PrimitiveDatatype::Rational | PrimitiveDatatype::Real, Value::Num(_)) => true,
            _ => false,
        }
    }

    fn numeric_domain(self) -> IntervalSet {
        match self {
            PrimitiveDatatype::Natural => IntervalSet::from_interval(Interval {
                lo: Lower::Closed(BigRational::zero()),
                hi: Upper::PosInf,
            }),
            _ => IntervalSet::full(),
        }
    }
}

impl fmt::Display for PrimitiveDatatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A datatype value: a string or an exact rational number.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Str(String),
    Num(BigRational),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn int(n: i64) -> Self {
        Value::Num(BigRational::from_integer(BigInt::from(n)))
    }

    /// Parses a numeric literal (`12`, `-0.75`, `3/7`) into an exact value.
    pub fn parse_number(text: &str) -> Option<Self> {
        parse_rational(text).map(Value::Num)
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self {
            Value::Num(q) => Some(q),
            Value::Str(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            Value::Num(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(q) => f.write_str(&format_rational(q)),
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

/// Parses `-?digits(.digits)?` or `-?digits/digits`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let q = if let Some((num, den)) = body.split_once('/') {
        if !digits(num) || !digits(den) {
            return None;
        }
        let den: BigInt = den.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        BigRational::new(num.parse().ok()?, den)
    } else if let Some((int, frac)) = body.split_once('.') {
        if !digits(int) || !digits(frac) {
            return None;
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let whole: BigInt = format!("{int}{frac}").parse().ok()?;
        BigRational::new(whole, scale)
    } else {
        if !digits(body) {
            return None;
        }
        BigRational::from_integer(body.parse().ok()?)
    };
    Some(if neg { -q } else { q })
}

/// Exact decimal when the denominator divides a power of ten, `p/q` otherwise.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        return q.numer().to_string();
    }
    let mut den = q.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let places = twos.max(fives);
    let scaled = (q * BigRational::from_integer(BigInt::from(10u32).pow(places as u32))).to_integer();
    let sign = if scaled.is_negative() { "-" } else { "" };
    let digits = scaled.abs().to_string();
    let digits = if digits.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int, frac) = digits.split_at(digits.len() - places);
    format!("{sign}{int}.{frac}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FacetOp {
    Eq,
    Lt,
    Leq,
    Gt,
    Geq,
}

impl FacetOp {
    pub fn symbol(self) -> &'static str {
        match self {
            FacetOp::Eq => "=",
            FacetOp::Lt => "<",
            FacetOp::Leq => "<=",
            FacetOp::Gt => ">",
            FacetOp::Geq => ">=",
        }
    }
}

impl fmt::Display for FacetOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A unary comparison predicate `op bound`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Facet {
    pub op: FacetOp,
    pub bound: Value,
}

impl Facet {
    pub fn new(op: FacetOp, bound: Value) -> Self {
        Facet { op, bound }
    }

    fn holds(&self, v: &Value) -> bool {
        match (v, &self.bound) {
            (Value::Str(a), Value::Str(b)) => self.op == FacetOp::Eq && a == b,
            (Value::Num(a), Value::Num(b)) => match self.op {
                FacetOp::Eq => a == b,
                FacetOp::Lt => a < b,
                FacetOp::Leq => a <= b,
                FacetOp::Gt => a > b,
                FacetOp::Geq => a >= b,
            },
            _ => false,
        }
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.op.symbol(), self.bound)
    }
}

/// Boolean combination of facets over one datatype.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FacetFormula {
    Facet(Facet),
    And(alloc::boxed::Box<FacetFormula>, alloc::boxed::Box<FacetFormula>),
    Or(alloc::boxed::Box<FacetFormula>, alloc::boxed::Box<FacetFormula>),
    Not(alloc::boxed::Box<FacetFormula>),
}

impl FacetFormula {
    pub fn facet(op: FacetOp, bound: Value) -> Self {
        FacetFormula::Facet(Facet::new(op, bound))
    }

    pub fn and(self, other: FacetFormula) -> Self {
        FacetFormula::And(self.into(), other.into())
    }

    pub fn or(self, other: FacetFormula) -> Self {
        FacetFormula::Or(self.into(), other.into())
    }

    /// Structural negation; comparisons flip, `Not` is unwrapped.
    pub fn negate(&self) -> FacetFormula {
        match self {
            FacetFormula::Facet(f) => match f.op {
                FacetOp::Eq => FacetFormula::Not(self.clone().into()),
                FacetOp::Lt => FacetFormula::facet(FacetOp::Geq, f.bound.clone()),
                FacetOp::Leq => FacetFormula::facet(FacetOp::Gt, f.bound.clone()),
                FacetOp::Gt => FacetFormula::facet(FacetOp::Leq, f.bound.clone()),
                FacetOp::Geq => FacetFormula::facet(FacetOp::Lt, f.bound.clone()),
            },
            FacetFormula::Not(inner) => (**inner).clone(),
            FacetFormula::And(a, b) => FacetFormula::Or(a.negate().into(), b.negate().into()),
            FacetFormula::Or(a, b) => FacetFormula::And(a.negate().into(), b.negate().into()),
        }
    }

    fn holds(&self, v: &Value) -> bool {
        match self {
            FacetFormula::Facet(f) => f.holds(v),
            FacetFormula::And(a, b) => a.holds(v) && b.holds(v),
            FacetFormula::Or(a, b) => a.holds(v) || b.holds(v),
            FacetFormula::Not(a) => !a.holds(v),
        }
    }

    fn for_each_facet<'a>(&'a self, out: &mut impl FnMut(&'a Facet)) {
        match self {
            FacetFormula::Facet(f) => out(f),
            FacetFormula::And(a, b) | FacetFormula::Or(a, b) => {
                a.for_each_facet(out);
                b.for_each_facet(out);
            }
            FacetFormula::Not(a) => a.for_each_facet(out),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            FacetFormula::Facet(x) => write!(f, "{x}"),
            FacetFormula::Not(a) => {
                f.write_str("!")?;
                a.fmt_prec(f, 3)
            }
            FacetFormula::And(a, b) => {
                if prec > 2 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 2)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, 3)?;
                if prec > 2 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            FacetFormula::Or(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for FacetFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Expression tree of a derived datatype; all leaves share the base datatype
/// of the enclosing [`DerivedDatatype`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataExpr {
    Full,
    Union(alloc::boxed::Box<DataExpr>, alloc::boxed::Box<DataExpr>),
    Intersection(alloc::boxed::Box<DataExpr>, alloc::boxed::Box<DataExpr>),
    Difference(alloc::boxed::Box<DataExpr>, alloc::boxed::Box<DataExpr>),
    /// Sorted and deduplicated.
    Enumeration(Vec<Value>),
    Restriction(FacetFormula),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DatatypeError {
    #[error("value {value} is not in the domain of {datatype}")]
    ValueMismatch { value: Value, datatype: PrimitiveDatatype },
    #[error("cannot combine {left} with {right}")]
    MixedDatatypes { left: PrimitiveDatatype, right: PrimitiveDatatype },
    #[error("string datatypes only support equality facets, found {0}")]
    StringComparison(FacetOp),
    #[error("an empty conjunction has no datatype")]
    EmptyConjunction,
    #[error("{0} is not a numeric datatype")]
    NotNumeric(PrimitiveDatatype),
}

/// A datatype derived from one primitive datatype.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerivedDatatype {
    base: PrimitiveDatatype,
    expr: DataExpr,
}

impl DerivedDatatype {
    pub fn new(base: PrimitiveDatatype, expr: DataExpr) -> Result<Self, DatatypeError> {
        fn check(base: PrimitiveDatatype, e: &DataExpr) -> Result<(), DatatypeError> {
            match e {
                DataExpr::Full => Ok(()),
                DataExpr::Union(a, b) | DataExpr::Intersection(a, b) | DataExpr::Difference(a, b) => {
                    check(base, a)?;
                    check(base, b)
                }
                DataExpr::Enumeration(vs) => vs.iter().try_for_each(|v| {
                    if base.admits(v) {
                        Ok(())
                    } else {
                        Err(DatatypeError::ValueMismatch { value: v.clone(), datatype: base })
                    }
                }),
                DataExpr::Restriction(f) => {
                    let mut err = Ok(());
                    f.for_each_facet(&mut |facet| {
                        if err.is_err() {
                            return;
                        }
                        let kind_ok = matches!(
                            (base.is_numeric(), &facet.bound),
                            (true, Value::Num(_)) | (false, Value::Str(_))
                        );
                        if !kind_ok {
                            err = Err(DatatypeError::ValueMismatch { value: facet.bound.clone(), datatype: base });
                        } else if !base.is_numeric() && facet.op != FacetOp::Eq {
                            err = Err(DatatypeError::StringComparison(facet.op));
                        }
                    });
                    err
                }
            }
        }
        check(base, &expr)?;
        Ok(DerivedDatatype { base, expr: canonical(expr) })
    }

    pub fn full(base: PrimitiveDatatype) -> Self {
        DerivedDatatype { base, expr: DataExpr::Full }
    }

    pub fn empty(base: PrimitiveDatatype) -> Self {
        DerivedDatatype {
            base,
            expr: DataExpr::Difference(DataExpr::Full.into(), DataExpr::Full.into()),
        }
    }

    pub fn facet(base: PrimitiveDatatype, op: FacetOp, bound: Value) -> Result<Self, DatatypeError> {
        Self::new(base, DataExpr::Restriction(FacetFormula::facet(op, bound)))
    }

    pub fn restriction(base: PrimitiveDatatype, formula: FacetFormula) -> Result<Self, DatatypeError> {
        Self::new(base, DataExpr::Restriction(formula))
    }

    pub fn enumeration(base: PrimitiveDatatype, values: impl IntoIterator<Item = Value>) -> Result<Self, DatatypeError> {
        Self::new(base, DataExpr::Enumeration(values.into_iter().collect()))
    }

    pub fn base(&self) -> PrimitiveDatatype {
        self.base
    }

    pub fn expr(&self) -> &DataExpr {
        &self.expr
    }

    pub fn is_full(&self) -> bool {
        self.expr == DataExpr::Full
    }

    fn combine(
        &self,
        other: &DerivedDatatype,
        op: fn(alloc::boxed::Box<DataExpr>, alloc::boxed::Box<DataExpr>) -> DataExpr,
    ) -> Result<Self, DatatypeError> {
        if self.base != other.base {
            return Err(DatatypeError::MixedDatatypes { left: self.base, right: other.base });
        }
        Ok(DerivedDatatype { base: self.base, expr: op(self.expr.clone().into(), other.expr.clone().into()) })
    }

    pub fn union(&self, other: &DerivedDatatype) -> Result<Self, DatatypeError> {
        self.combine(other, DataExpr::Union)
    }

    pub fn intersection(&self, other: &DerivedDatatype) -> Result<Self, DatatypeError> {
        self.combine(other, DataExpr::Intersection)
    }

    pub fn difference(&self, other: &DerivedDatatype) -> Result<Self, DatatypeError> {
        self.combine(other, DataExpr::Difference)
    }

    /// Every constant mentioned by the expression.
    pub fn constants(&self) -> Vec<Value> {
        fn walk(e: &DataExpr, out: &mut Vec<Value>) {
            match e {
                DataExpr::Full => {}
                DataExpr::Union(a, b) | DataExpr::Intersection(a, b) | DataExpr::Difference(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                DataExpr::Enumeration(vs) => out.extend(vs.iter().cloned()),
                DataExpr::Restriction(f) => f.for_each_facet(&mut |facet| out.push(facet.bound.clone())),
            }
        }
        let mut out = Vec::new();
        walk(&self.expr, &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn extent(&self) -> Extent {
        if self.base.is_numeric() {
            let domain = self.base.numeric_domain();
            Extent::Numbers(numeric_extent(&self.expr, &domain))
        } else {
            Extent::Strings(string_extent(&self.expr))
        }
    }
}

fn canonical(expr: DataExpr) -> DataExpr {
    match expr {
        DataExpr::Enumeration(mut vs) => {
            vs.sort();
            vs.dedup();
            DataExpr::Enumeration(vs)
        }
        DataExpr::Union(a, b) => DataExpr::Union(canonical(*a).into(), canonical(*b).into()),
        DataExpr::Intersection(a, b) => DataExpr::Intersection(canonical(*a).into(), canonical(*b).into()),
        DataExpr::Difference(a, b) => DataExpr::Difference(canonical(*a).into(), canonical(*b).into()),
        other => other,
    }
}

impl fmt::Display for DerivedDatatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(base: PrimitiveDatatype, e: &DataExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                DataExpr::Full => write!(f, "{base}"),
                DataExpr::Restriction(x) => write!(f, "{base}[{x}]"),
                DataExpr::Enumeration(vs) => {
                    write!(f, "{base}{{")?;
                    for (i, v) in vs.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{v}")?;
                    }
                    f.write_str("}")
                }
                DataExpr::Union(a, b) | DataExpr::Intersection(a, b) | DataExpr::Difference(a, b) => {
                    let sym = match e {
                        DataExpr::Union(..) => " | ",
                        DataExpr::Intersection(..) => " & ",
                        _ => " \\ ",
                    };
                    f.write_str("(")?;
                    go(base, a, f)?;
                    f.write_str(sym)?;
                    go(base, b, f)?;
                    f.write_str(")")
                }
            }
        }
        go(self.base, &self.expr, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum StrSet {
    Finite(BTreeSet<String>),
    Cofinite(BTreeSet<String>),
}

impl StrSet {
    fn complement(self) -> StrSet {
        match self {
            StrSet::Finite(s) => StrSet::Cofinite(s),
            StrSet::Cofinite(s) => StrSet::Finite(s),
        }
    }

    fn intersect(self, other: StrSet) -> StrSet {
        match (self, other) {
            (StrSet::Finite(a), StrSet::Finite(b)) => StrSet::Finite(a.intersection(&b).cloned().collect()),
            (StrSet::Finite(a), StrSet::Cofinite(b)) | (StrSet::Cofinite(b), StrSet::Finite(a)) => {
                StrSet::Finite(a.difference(&b).cloned().collect())
            }
            (StrSet::Cofinite(a), StrSet::Cofinite(b)) => StrSet::Cofinite(a.union(&b).cloned().collect()),
        }
    }

    fn union(self, other: StrSet) -> StrSet {
        self.complement().intersect(other.complement()).complement()
    }

    fn witness(&self) -> Option<String> {
        match self {
            StrSet::Finite(s) => s.iter().next().cloned(),
            StrSet::Cofinite(excluded) => (0u64..)
                .map(|i| format!("w{i}"))
                .find(|w| !excluded.contains(w)),
        }
    }
}

enum Extent {
    Strings(StrSet),
    Numbers(IntervalSet),
}

fn string_formula_extent(f: &FacetFormula) -> StrSet {
    match f {
        FacetFormula::Facet(facet) => match &facet.bound {
            Value::Str(s) => StrSet::Finite(core::iter::once(s.clone()).collect()),
            Value::Num(_) => StrSet::Finite(BTreeSet::new()),
        },
        FacetFormula::And(a, b) => string_formula_extent(a).intersect(string_formula_extent(b)),
        FacetFormula::Or(a, b) => string_formula_extent(a).union(string_formula_extent(b)),
        FacetFormula::Not(a) => string_formula_extent(a).complement(),
    }
}

fn string_extent(e: &DataExpr) -> StrSet {
    match e {
        DataExpr::Full => StrSet::Cofinite(BTreeSet::new()),
        DataExpr::Union(a, b) => string_extent(a).union(string_extent(b)),
        DataExpr::Intersection(a, b) => string_extent(a).intersect(string_extent(b)),
        DataExpr::Difference(a, b) => string_extent(a).intersect(string_extent(b).complement()),
        DataExpr::Enumeration(vs) => StrSet::Finite(vs.iter().filter_map(|v| v.as_str().map(String::from)).collect()),
        DataExpr::Restriction(f) => string_formula_extent(f),
    }
}

fn facet_interval(facet: &Facet) -> IntervalSet {
    let Value::Num(v) = &facet.bound else {
        return IntervalSet::empty();
    };
    let v = v.clone();
    let iv = match facet.op {
        FacetOp::Eq => Interval::point(v),
        FacetOp::Lt => Interval { lo: Lower::NegInf, hi: Upper::Open(v) },
        FacetOp::Leq => Interval { lo: Lower::NegInf, hi: Upper::Closed(v) },
        FacetOp::Gt => Interval { lo: Lower::Open(v), hi: Upper::PosInf },
        FacetOp::Geq => Interval { lo: Lower::Closed(v), hi: Upper::PosInf },
    };
    IntervalSet::from_interval(iv)
}

fn numeric_formula_extent(f: &FacetFormula, domain: &IntervalSet) -> IntervalSet {
    match f {
        FacetFormula::Facet(facet) => facet_interval(facet).intersect(domain),
        FacetFormula::And(a, b) => numeric_formula_extent(a, domain).intersect(&numeric_formula_extent(b, domain)),
        FacetFormula::Or(a, b) => numeric_formula_extent(a, domain).union(&numeric_formula_extent(b, domain)),
        FacetFormula::Not(a) => domain.difference(&numeric_formula_extent(a, domain)),
    }
}

fn numeric_extent(e: &DataExpr, domain: &IntervalSet) -> IntervalSet {
    match e {
        DataExpr::Full => domain.clone(),
        DataExpr::Union(a, b) => numeric_extent(a, domain).union(&numeric_extent(b, domain)),
        DataExpr::Intersection(a, b) => numeric_extent(a, domain).intersect(&numeric_extent(b, domain)),
        DataExpr::Difference(a, b) => numeric_extent(a, domain).difference(&numeric_extent(b, domain)),
        DataExpr::Enumeration(vs) => IntervalSet::from_points(vs.iter().filter_map(Value::as_num)).intersect(domain),
        DataExpr::Restriction(f) => numeric_formula_extent(f, domain),
    }
}

/// Membership of `v` in the value set of `e`, evaluated directly on the
/// expression tree.
pub fn value_in(e: &DerivedDatatype, v: &Value) -> Result<bool, DatatypeError> {
    if !e.base.admits(v) {
        return Err(DatatypeError::ValueMismatch { value: v.clone(), datatype: e.base });
    }
    fn eval(expr: &DataExpr, v: &Value) -> bool {
        match expr {
            DataExpr::Full => true,
            DataExpr::Union(a, b) => eval(a, v) || eval(b, v),
            DataExpr::Intersection(a, b) => eval(a, v) && eval(b, v),
            DataExpr::Difference(a, b) => eval(a, v) && !eval(b, v),
            DataExpr::Enumeration(vs) => vs.contains(v),
            DataExpr::Restriction(f) => f.holds(v),
        }
    }
    Ok(eval(&e.expr, v))
}

/// `D \ E` over the base datatype `D` of `E`.
///
/// Single-facet restrictions flip their comparison, `D \ X` unwraps to `X`,
/// anything else is wrapped in a difference.
pub fn complement(e: &DerivedDatatype) -> DerivedDatatype {
    let expr = match &e.expr {
        DataExpr::Restriction(f) => DataExpr::Restriction(f.negate()),
        DataExpr::Difference(a, b) if **a == DataExpr::Full => (**b).clone(),
        other => DataExpr::Difference(DataExpr::Full.into(), other.clone().into()),
    };
    DerivedDatatype { base: e.base, expr }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShapeBound {
    pub value: BigRational,
    pub strict: bool,
}

/// An interval with finitely many excluded points; integral shapes only
/// contain integers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NumericShape {
    pub lower: Option<ShapeBound>,
    pub upper: Option<ShapeBound>,
    pub excluded: BTreeSet<BigRational>,
    pub integral: bool,
}

fn ceil_int(q: &BigRational) -> BigInt {
    q.ceil().to_integer()
}

fn floor_int(q: &BigRational) -> BigInt {
    q.floor().to_integer()
}

impl NumericShape {
    pub fn contains(&self, v: &BigRational) -> bool {
        if self.integral && !v.is_integer() {
            return false;
        }
        let above = self.lower.as_ref().is_none_or(|b| if b.strict { v > &b.value } else { v >= &b.value });
        let below = self.upper.as_ref().is_none_or(|b| if b.strict { v < &b.value } else { v <= &b.value });
        above && below && !self.excluded.contains(v)
    }

    /// Smallest and largest integers inside the bounds, when bounded.
    fn integer_range(&self) -> (Option<BigInt>, Option<BigInt>) {
        let lo = self.lower.as_ref().map(|b| {
            if b.strict {
                floor_int(&b.value) + 1
            } else {
                ceil_int(&b.value)
            }
        });
        let hi = self.upper.as_ref().map(|b| {
            if b.strict {
                ceil_int(&b.value) - 1
            } else {
                floor_int(&b.value)
            }
        });
        (lo, hi)
    }

    pub fn is_empty(&self) -> bool {
        if self.integral {
            let (lo, hi) = self.integer_range();
            match (lo, hi) {
                (Some(lo), Some(hi)) => {
                    if hi < lo {
                        return true;
                    }
                    let count = hi.clone() - lo.clone() + 1;
                    let excluded = self
                        .excluded
                        .iter()
                        .filter(|x| x.is_integer() && x.to_integer() >= lo && x.to_integer() <= hi)
                        .count();
                    count == BigInt::from(excluded)
                }
                _ => false,
            }
        } else {
            match (&self.lower, &self.upper) {
                (Some(l), Some(u)) => {
                    l.value > u.value
                        || (l.value == u.value && (l.strict || u.strict || self.excluded.contains(&l.value)))
                }
                _ => false,
            }
        }
    }

    /// Deterministic member: smallest integer for discrete shapes, midpoint
    /// (or bound ± 1 on rays) for dense ones.
    pub fn witness(&self) -> Option<BigRational> {
        if self.is_empty() {
            return None;
        }
        if self.integral {
            let (lo, hi) = self.integer_range();
            let pick = |mut i: BigInt, step: i64| loop {
                let q = BigRational::from_integer(i.clone());
                if !self.excluded.contains(&q) {
                    return q;
                }
                i += step;
            };
            return Some(match (lo, hi) {
                (Some(lo), _) => pick(lo, 1),
                (None, Some(hi)) => pick(hi, -1),
                (None, None) => pick(BigInt::zero(), 1),
            });
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let one = BigRational::one();
        let candidate = match (&self.lower, &self.upper) {
            (Some(l), Some(u)) if l.value == u.value => return Some(l.value.clone()),
            (Some(l), Some(u)) => {
                let mut m = (&l.value + &u.value) / &two;
                while self.excluded.contains(&m) {
                    m = (&l.value + &m) / &two;
                }
                m
            }
            (Some(l), None) => {
                let mut m = &l.value + &one;
                while self.excluded.contains(&m) {
                    m += &one;
                }
                m
            }
            (None, Some(u)) => {
                let mut m = &u.value - &one;
                while self.excluded.contains(&m) {
                    m -= &one;
                }
                m
            }
            (None, None) => {
                let mut m = BigRational::zero();
                while self.excluded.contains(&m) {
                    m += &one;
                }
                m
            }
        };
        Some(candidate)
    }
}

impl fmt::Display for NumericShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lower {
            Some(b) => write!(f, "{}{}", if b.strict { "(" } else { "[" }, format_rational(&b.value))?,
            None => f.write_str("(-inf")?,
        }
        f.write_str("..")?;
        match &self.upper {
            Some(b) => write!(f, "{}{}", format_rational(&b.value), if b.strict { ")" } else { "]" })?,
            None => f.write_str("+inf)")?,
        }
        if !self.excluded.is_empty() {
            f.write_str(" \\ {")?;
            for (i, x) in self.excluded.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(&format_rational(x))?;
            }
            f.write_str("}")?;
        }
        if self.integral {
            f.write_str(" in Z")?;
        }
        Ok(())
    }
}

fn shapes_of(set: &IntervalSet, integral: bool) -> Vec<NumericShape> {
    let mut shapes: Vec<NumericShape> = Vec::new();
    for iv in set.intervals() {
        let lower = match &iv.lo {
            Lower::NegInf => None,
            Lower::Closed(v) => Some(ShapeBound { value: v.clone(), strict: false }),
            Lower::Open(v) => Some(ShapeBound { value: v.clone(), strict: true }),
        };
        let upper = match &iv.hi {
            Upper::PosInf => None,
            Upper::Closed(v) => Some(ShapeBound { value: v.clone(), strict: false }),
            Upper::Open(v) => Some(ShapeBound { value: v.clone(), strict: true }),
        };
        // (a, q) followed by (q, b) becomes (a, b) with q excluded.
        if let (Some(last), Some(lo)) = (shapes.last_mut(), &lower) {
            if let Some(up) = &last.upper {
                if up.strict && lo.strict && up.value == lo.value {
                    last.excluded.insert(lo.value.clone());
                    last.upper = upper;
                    continue;
                }
            }
        }
        shapes.push(NumericShape { lower, upper, excluded: BTreeSet::new(), integral });
    }
    shapes
}

fn common_base(conj: &[DerivedDatatype]) -> Result<PrimitiveDatatype, DatatypeError> {
    let first = conj.first().ok_or(DatatypeError::EmptyConjunction)?.base;
    for e in conj {
        if e.base != first {
            return Err(DatatypeError::MixedDatatypes { left: first, right: e.base });
        }
    }
    Ok(first)
}

/// Disjunction of shapes whose union is exactly the intersection of `conj`.
pub fn normalize_numeric(conj: &[DerivedDatatype]) -> Result<Vec<NumericShape>, DatatypeError> {
    let base = common_base(conj)?;
    if !base.is_numeric() {
        return Err(DatatypeError::NotNumeric(base));
    }
    Ok(shapes_of(&numeric_intersection(base, conj.iter()), base.is_discrete()))
}

fn numeric_intersection<'a>(base: PrimitiveDatatype, conj: impl Iterator<Item = &'a DerivedDatatype>) -> IntervalSet {
    let mut acc = base.numeric_domain();
    for e in conj {
        if acc.is_empty() {
            break;
        }
        if let Extent::Numbers(s) = e.extent() {
            acc = acc.intersect(&s);
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dsat {
    Sat(Value),
    Unsat,
}

impl Dsat {
    pub fn is_sat(&self) -> bool {
        matches!(self, Dsat::Sat(_))
    }
}

/// Satisfiability of a conjunction of derived datatypes over one primitive
/// datatype, with a deterministic witness.
pub fn dsat(conj: &[DerivedDatatype]) -> Result<Dsat, DatatypeError> {
    let base = common_base(conj)?;
    Ok(dsat_over(base, conj.iter()))
}

/// As [`dsat`], with the datatype given explicitly so the conjunction may be
/// empty. Members with another base datatype are ignored.
pub fn dsat_over<'a>(base: PrimitiveDatatype, conj: impl IntoIterator<Item = &'a DerivedDatatype>) -> Dsat {
    let conj = conj.into_iter().filter(|e| e.base == base);
    if base.is_numeric() {
        let set = numeric_intersection(base, conj);
        shapes_of(&set, base.is_discrete())
            .iter()
            .find_map(NumericShape::witness)
            .map_or(Dsat::Unsat, |q| Dsat::Sat(Value::Num(q)))
    } else {
        let mut acc = StrSet::Cofinite(BTreeSet::new());
        for e in conj {
            if let Extent::Strings(s) = e.extent() {
                acc = acc.intersect(s);
            }
        }
        acc.witness().map_or(Dsat::Unsat, |s| Dsat::Sat(Value::Str(s)))
    }
}

/// Some member of `e`, or `None` when `e` is empty.
pub fn witness(e: &DerivedDatatype) -> Option<Value> {
    match dsat_over(e.base, core::iter::once(e)) {
        Dsat::Sat(v) => Some(v),
        Dsat::Unsat => None,
    }
}

/// Up to `limit` members of the conjunction; `None` when it has more.
pub fn enumerate_small<'a>(
    base: PrimitiveDatatype,
    conj: impl IntoIterator<Item = &'a DerivedDatatype>,
    limit: usize,
) -> Option<Vec<Value>> {
    let conj: Vec<&DerivedDatatype> = conj.into_iter().filter(|e| e.base == base).collect();
    if base.is_numeric() {
        let set = numeric_intersection(base, conj.iter().copied());
        let mut out = Vec::new();
        for shape in shapes_of(&set, base.is_discrete()) {
            if shape.is_empty() {
                continue;
            }
            if shape.integral {
                let (Some(lo), Some(hi)) = shape.integer_range() else { return None };
                let width = (hi.clone() - lo.clone()).to_usize()?;
                if width > limit {
                    return None;
                }
                let mut i = lo;
                while i <= hi {
                    let q = BigRational::from_integer(i.clone());
                    if !shape.excluded.contains(&q) {
                        out.push(Value::Num(q));
                    }
                    i += 1;
                }
            } else {
                match (&shape.lower, &shape.upper) {
                    (Some(l), Some(u)) if l.value == u.value => out.push(Value::Num(l.value.clone())),
                    _ => return None,
                }
            }
            if out.len() > limit {
                return None;
            }
        }
        Some(out)
    } else {
        let mut acc = StrSet::Cofinite(BTreeSet::new());
        for e in conj {
            if let Extent::Strings(s) = e.extent() {
                acc = acc.intersect(s);
            }
        }
        match acc {
            StrSet::Finite(s) if s.len() <= limit => Some(s.into_iter().map(Value::Str).collect()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn real(op: FacetOp, n: i64) -> DerivedDatatype {
        DerivedDatatype::facet(PrimitiveDatatype::Real, op, Value::int(n)).unwrap()
    }

    fn int(op: FacetOp, n: i64) -> DerivedDatatype {
        DerivedDatatype::facet(PrimitiveDatatype::Integer, op, Value::int(n)).unwrap()
    }

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn membership_examples() {
        let zero_nine = DerivedDatatype::restriction(
            PrimitiveDatatype::Real,
            FacetFormula::facet(FacetOp::Geq, Value::int(0)).and(FacetFormula::facet(FacetOp::Leq, Value::int(9))),
        )
        .unwrap();
        assert!(value_in(&zero_nine, &Value::int(5)).unwrap());
        assert!(value_in(&real(FacetOp::Eq, 135), &Value::int(135)).unwrap());

        let types = DerivedDatatype::enumeration(PrimitiveDatatype::String, [Value::str("CCV"), Value::str("CT")]).unwrap();
        let ct = DerivedDatatype::enumeration(PrimitiveDatatype::String, [Value::str("CT")]).unwrap();
        assert!(!value_in(&types.difference(&ct).unwrap(), &Value::str("CT")).unwrap());
    }

    #[test]
    fn membership_rejects_foreign_values() {
        assert!(matches!(
            value_in(&real(FacetOp::Gt, 0), &Value::str("x")),
            Err(DatatypeError::ValueMismatch { .. })
        ));
        assert!(value_in(&int(FacetOp::Gt, 0), &Value::Num(q("1/2"))).is_err());
        let nat = DerivedDatatype::full(PrimitiveDatatype::Natural);
        assert!(value_in(&nat, &Value::int(-1)).is_err());
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement(&real(FacetOp::Gt, 5)), real(FacetOp::Leq, 5));
        let y = DerivedDatatype::enumeration(PrimitiveDatatype::String, [Value::str("Y")]).unwrap();
        let not_y = complement(&y);
        assert_eq!(
            not_y.expr(),
            &DataExpr::Difference(DataExpr::Full.into(), DataExpr::Enumeration(vec![Value::str("Y")]).into())
        );
        assert_eq!(complement(&not_y), y);
        assert_eq!(complement(&complement(&DerivedDatatype::full(PrimitiveDatatype::Real))), DerivedDatatype::full(PrimitiveDatatype::Real));
    }

    #[test]
    fn normalize_examples() {
        let shapes = normalize_numeric(&[real(FacetOp::Gt, 0), real(FacetOp::Lt, 260)]).unwrap();
        assert_eq!(shapes.len(), 1);
        assert_eq!(shapes[0].lower, Some(ShapeBound { value: q("0"), strict: true }));
        assert_eq!(shapes[0].upper, Some(ShapeBound { value: q("260"), strict: true }));
        assert!(shapes[0].excluded.is_empty());

        let split = real(FacetOp::Lt, 260).union(&real(FacetOp::Gt, 320)).unwrap();
        let shapes = normalize_numeric(&[split, real(FacetOp::Gt, 0)]).unwrap();
        assert_eq!(shapes.len(), 2);
        assert_eq!(shapes[1].lower, Some(ShapeBound { value: q("320"), strict: true }));
        assert_eq!(shapes[1].upper, None);

        let shapes = normalize_numeric(&[int(FacetOp::Gt, 1), int(FacetOp::Lt, 2)]).unwrap();
        assert_eq!(shapes.len(), 1);
        assert!(shapes[0].integral);
        assert!(shapes[0].is_empty());
    }

    #[test]
    fn punctured_interval_keeps_exclusions() {
        let e = real(FacetOp::Geq, 0).difference(&DerivedDatatype::enumeration(PrimitiveDatatype::Real, [Value::int(5)]).unwrap()).unwrap();
        let shapes = normalize_numeric(&[e]).unwrap();
        assert_eq!(shapes.len(), 1);
        assert!(shapes[0].excluded.contains(&q("5")));
    }

    #[test]
    fn dsat_examples() {
        let zero_nine = real(FacetOp::Geq, 0).intersection(&real(FacetOp::Leq, 9)).unwrap();
        assert_eq!(dsat(&[zero_nine, real(FacetOp::Eq, 135)]).unwrap(), Dsat::Unsat);
        assert_eq!(dsat(&[int(FacetOp::Gt, 1), int(FacetOp::Lt, 2)]).unwrap(), Dsat::Unsat);
        let rat = |op, n| DerivedDatatype::facet(PrimitiveDatatype::Rational, op, Value::int(n)).unwrap();
        assert_eq!(dsat(&[rat(FacetOp::Gt, 1), rat(FacetOp::Lt, 2)]).unwrap(), Dsat::Sat(Value::Num(q("3/2"))));
        let ccv = DerivedDatatype::facet(PrimitiveDatatype::String, FacetOp::Eq, Value::str("CCV")).unwrap();
        assert_eq!(dsat(&[ccv.clone(), complement(&ccv)]).unwrap(), Dsat::Unsat);
    }

    #[test]
    fn dsat_rejects_mixed_conjunctions() {
        let s = DerivedDatatype::full(PrimitiveDatatype::String);
        assert!(matches!(dsat(&[s, real(FacetOp::Gt, 0)]), Err(DatatypeError::MixedDatatypes { .. })));
        assert_eq!(dsat(&[]), Err(DatatypeError::EmptyConjunction));
    }

    #[test]
    fn witness_examples() {
        let e = real(FacetOp::Gt, 320).intersection(&real(FacetOp::Lt, 400)).unwrap();
        assert_eq!(witness(&e), Some(Value::int(360)));
        let e = int(FacetOp::Gt, 1).intersection(&int(FacetOp::Lt, 2)).unwrap();
        assert_eq!(witness(&e), None);
        let cofinite = DerivedDatatype::full(PrimitiveDatatype::String)
            .difference(
                &DerivedDatatype::enumeration(PrimitiveDatatype::String, [Value::str("none"), Value::str("indoor"), Value::str("outdoor")])
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(witness(&cofinite), Some(Value::str("w0")));
        assert_eq!(witness(&real(FacetOp::Geq, 0)), Some(Value::int(1)));
        assert_eq!(witness(&DerivedDatatype::full(PrimitiveDatatype::Natural)), Some(Value::int(0)));
    }

    #[test]
    fn string_comparisons_are_rejected() {
        assert_eq!(
            DerivedDatatype::facet(PrimitiveDatatype::String, FacetOp::Lt, Value::str("a")),
            Err(DatatypeError::StringComparison(FacetOp::Lt))
        );
    }

    #[test]
    fn rational_literals() {
        assert_eq!(parse_rational("0.75"), Some(q("3/4")));
        assert_eq!(parse_rational("-12"), Some(-q("12")));
        assert_eq!(parse_rational("1."), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(format_rational(&q("3/4")), "0.75");
        assert_eq!(format_rational(&q("-1/20")), "-0.05");
        assert_eq!(format_rational(&q("1/3")), "1/3");
        assert_eq!(format_rational(&q("31/2")), "15.5");
    }

    #[test]
    fn enumerate_small_bounds() {
        let e = int(FacetOp::Geq, 1).intersection(&int(FacetOp::Leq, 3)).unwrap();
        assert_eq!(enumerate_small(PrimitiveDatatype::Integer, [&e], 5).unwrap().len(), 3);
        assert_eq!(enumerate_small(PrimitiveDatatype::Real, [&real(FacetOp::Gt, 0)], 5), None);
        assert_eq!(enumerate_small(PrimitiveDatatype::Real, [&real(FacetOp::Eq, 2)], 5), Some(vec![Value::int(2)]));
    }
}
