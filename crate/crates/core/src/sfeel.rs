//! S-FEEL conditions: parsing, printing, evaluation and translation to
//! derived datatypes.
//!
//! ```text
//! cond     := "-" | disj
//! disj     := atom { "," atom }
//! atom     := literal | "not(" literal ")" | cmp literal | interval
//! cmp      := "<" | "<=" | ">" | ">="
//! interval := ("[" | "(") literal ".." literal ("]" | ")")
//! literal  := number | quoted-string | "today"
//! ```

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;

use crate::datatypes::{
    parse_rational, DataExpr, DerivedDatatype, FacetFormula, FacetOp, PrimitiveDatatype, Value,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparison {
    Lt,
    Leq,
    Gt,
    Geq,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        self.facet_op().symbol()
    }

    pub fn facet_op(self) -> FacetOp {
        match self {
            Comparison::Lt => FacetOp::Lt,
            Comparison::Leq => FacetOp::Leq,
            Comparison::Gt => FacetOp::Gt,
            Comparison::Geq => FacetOp::Geq,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SFeelCondition {
    Any,
    Eq(Value),
    NotEq(Value),
    Cmp(Comparison, Value),
    Interval { lower_open: bool, lo: Value, hi: Value, upper_open: bool },
    /// At least two members, none of them `Any` or `Or`.
    Or(Vec<SFeelCondition>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SFeelErrorKind {
    #[error("syntax error: {0}")]
    Syntax(&'static str),
    #[error("type error: {0}")]
    Type(String),
    #[error("malformed interval: lower bound exceeds upper bound")]
    MalformedInterval,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct SFeelError {
    pub kind: SFeelErrorKind,
    pub offset: usize,
}

fn err<T>(kind: SFeelErrorKind, offset: usize) -> Result<T, SFeelError> {
    Err(SFeelError { kind, offset })
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    dt: PrimitiveDatatype,
    today: Option<&'a BigRational>,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str, what: &'static str) -> Result<(), SFeelError> {
        if self.eat(tok) {
            Ok(())
        } else {
            err(SFeelErrorKind::Syntax(what), self.pos)
        }
    }

    fn literal(&mut self) -> Result<Value, SFeelError> {
        self.skip_ws();
        let start = self.pos;
        let rest = self.rest();
        let value = if let Some(body) = rest.strip_prefix('"') {
            let mut out = String::new();
            let mut chars = body.char_indices();
            loop {
                match chars.next() {
                    None => return err(SFeelErrorKind::Syntax("unterminated string"), start),
                    Some((i, '"')) => {
                        self.pos += 1 + i + 1;
                        break;
                    }
                    Some((_, '\\')) => match chars.next() {
                        Some((_, '"')) => out.push('"'),
                        Some((_, '\\')) => out.push('\\'),
                        Some((_, 'n')) => out.push('\n'),
                        _ => return err(SFeelErrorKind::Syntax("bad escape"), start),
                    },
                    Some((_, c)) => out.push(c),
                }
            }
            Value::Str(out)
        } else if rest.starts_with("today") {
            self.pos += "today".len();
            match self.today {
                Some(t) => Value::Num(t.clone()),
                None => return err(SFeelErrorKind::Type("`today` is not defined".into()), start),
            }
        } else {
            let bytes = rest.as_bytes();
            let mut end = 0;
            if bytes.first() == Some(&b'-') {
                end = 1;
            }
            let digits_from = |mut i: usize| {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                i
            };
            let int_end = digits_from(end);
            if int_end == end {
                return err(SFeelErrorKind::Syntax("expected a literal"), start);
            }
            end = int_end;
            // A '.' only starts a fraction when a digit follows, so `0..9` splits.
            if bytes.get(end) == Some(&b'.') && bytes.get(end + 1).is_some_and(u8::is_ascii_digit) {
                end = digits_from(end + 1);
            } else if bytes.get(end) == Some(&b'/') && bytes.get(end + 1).is_some_and(u8::is_ascii_digit) {
                end = digits_from(end + 1);
            }
            let q = match parse_rational(&rest[..end]) {
                Some(q) => q,
                None => return err(SFeelErrorKind::Syntax("invalid number"), start),
            };
            self.pos += end;
            Value::Num(q)
        };
        if !self.dt.admits(&value) {
            return err(SFeelErrorKind::Type(alloc::format!("{value} is not a {} value", self.dt)), start);
        }
        Ok(value)
    }

    fn numeric_only(&self, at: usize) -> Result<(), SFeelError> {
        if self.dt.is_numeric() {
            Ok(())
        } else {
            err(SFeelErrorKind::Type(alloc::format!("comparisons are not defined on {}", self.dt)), at)
        }
    }

    fn atom(&mut self) -> Result<SFeelCondition, SFeelError> {
        self.skip_ws();
        let start = self.pos;
        if self.eat("not(") {
            let v = self.literal()?;
            self.expect(")", "expected `)`")?;
            return Ok(SFeelCondition::NotEq(v));
        }
        for (tok, cmp) in [("<=", Comparison::Leq), (">=", Comparison::Geq), ("<", Comparison::Lt), (">", Comparison::Gt)] {
            if self.eat(tok) {
                self.numeric_only(start)?;
                return Ok(SFeelCondition::Cmp(cmp, self.literal()?));
            }
        }
        let lower_open = if self.eat("[") {
            false
        } else if self.eat("(") {
            true
        } else {
            return Ok(SFeelCondition::Eq(self.literal()?));
        };
        self.numeric_only(start)?;
        let lo = self.literal()?;
        if !self.eat("..") {
            self.expect(",", "expected `..`")?;
        }
        let hi = self.literal()?;
        let upper_open = if self.eat("]") {
            false
        } else if self.eat(")") {
            true
        } else {
            return err(SFeelErrorKind::Syntax("expected `]` or `)`"), self.pos);
        };
        if lo.as_num() > hi.as_num() {
            return err(SFeelErrorKind::MalformedInterval, start);
        }
        Ok(SFeelCondition::Interval { lower_open, lo, hi, upper_open })
    }
}

/// Parses an S-FEEL condition over `dt`. `today` substitutes the reserved
/// constant of the same name.
pub fn parse_condition(text: &str, dt: PrimitiveDatatype, today: Option<&BigRational>) -> Result<SFeelCondition, SFeelError> {
    let trimmed = text.trim();
    if trimmed == "-" {
        return Ok(SFeelCondition::Any);
    }
    let mut p = Parser { src: text, pos: 0, dt, today };
    let mut atoms = alloc::vec![p.atom()?];
    while p.eat(",") {
        atoms.push(p.atom()?);
    }
    p.skip_ws();
    if p.pos != text.len() {
        return err(SFeelErrorKind::Syntax("unexpected trailing input"), p.pos);
    }
    Ok(if atoms.len() == 1 { atoms.pop().unwrap() } else { SFeelCondition::Or(atoms) })
}

impl fmt::Display for SFeelCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SFeelCondition::Any => f.write_str("-"),
            SFeelCondition::Eq(v) => write!(f, "{v}"),
            SFeelCondition::NotEq(v) => write!(f, "not({v})"),
            SFeelCondition::Cmp(c, v) => write!(f, "{}{v}", c.symbol()),
            SFeelCondition::Interval { lower_open, lo, hi, upper_open } => write!(
                f,
                "{}{lo}..{hi}{}",
                if *lower_open { "(" } else { "[" },
                if *upper_open { ")" } else { "]" }
            ),
            SFeelCondition::Or(items) => {
                for (i, c) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}

impl SFeelCondition {
    /// Whether a defined value satisfies the condition.
    pub fn matches<'a>(&'a self, v: &'a Value) -> bool {
        let num = |a: &'a Value| a.as_num().zip(v.as_num());
        match self {
            SFeelCondition::Any => true,
            SFeelCondition::Eq(x) => x == v,
            SFeelCondition::NotEq(x) => x != v,
            SFeelCondition::Cmp(c, x) => num(x).is_some_and(|(b, a)| match c {
                Comparison::Lt => a < b,
                Comparison::Leq => a <= b,
                Comparison::Gt => a > b,
                Comparison::Geq => a >= b,
            }),
            SFeelCondition::Interval { lower_open, lo, hi, upper_open } => {
                let (Some((lo, a)), Some((hi, _))) = (num(lo), num(hi)) else { return false };
                let above = if *lower_open { a > lo } else { a >= lo };
                let below = if *upper_open { a < hi } else { a <= hi };
                above && below
            }
            SFeelCondition::Or(items) => items.iter().any(|c| c.matches(v)),
        }
    }

    /// Whether the condition also accepts a missing value.
    pub fn is_any(&self) -> bool {
        matches!(self, SFeelCondition::Any)
    }

    /// Every literal mentioned by the condition.
    pub fn constants(&self) -> Vec<Value> {
        match self {
            SFeelCondition::Any => Vec::new(),
            SFeelCondition::Eq(v) | SFeelCondition::NotEq(v) | SFeelCondition::Cmp(_, v) => alloc::vec![v.clone()],
            SFeelCondition::Interval { lo, hi, .. } => alloc::vec![lo.clone(), hi.clone()],
            SFeelCondition::Or(items) => items.iter().flat_map(SFeelCondition::constants).collect(),
        }
    }

    /// The value set accepted by the condition as a derived datatype over `dt`.
    pub fn to_derived(&self, dt: PrimitiveDatatype) -> DerivedDatatype {
        let expr = self.to_expr();
        DerivedDatatype::new(dt, expr).expect("condition well-typed for its datatype")
    }

    fn to_expr(&self) -> DataExpr {
        let facet = |op, v: &Value| FacetFormula::facet(op, v.clone());
        match self {
            SFeelCondition::Any => DataExpr::Full,
            SFeelCondition::Eq(v) => DataExpr::Restriction(facet(FacetOp::Eq, v)),
            SFeelCondition::NotEq(v) => {
                DataExpr::Difference(Box::new(DataExpr::Full), Box::new(DataExpr::Enumeration(alloc::vec![v.clone()])))
            }
            SFeelCondition::Cmp(c, v) => DataExpr::Restriction(facet(c.facet_op(), v)),
            SFeelCondition::Interval { lower_open, lo, hi, upper_open } => {
                let lower = facet(if *lower_open { FacetOp::Gt } else { FacetOp::Geq }, lo);
                let upper = facet(if *upper_open { FacetOp::Lt } else { FacetOp::Leq }, hi);
                DataExpr::Restriction(lower.and(upper))
            }
            SFeelCondition::Or(items) => {
                let mut it = items.iter().map(SFeelCondition::to_expr);
                let first = it.next().unwrap_or(DataExpr::Full);
                it.fold(first, |acc, e| DataExpr::Union(Box::new(acc), Box::new(e)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datatypes::value_in;
    use alloc::string::ToString;
    use alloc::vec;

    const REAL: PrimitiveDatatype = PrimitiveDatatype::Real;

    fn parse(s: &str, dt: PrimitiveDatatype) -> SFeelCondition {
        parse_condition(s, dt, None).unwrap()
    }

    #[test]
    fn grammar_examples() {
        assert_eq!(parse("-", REAL), SFeelCondition::Any);
        assert_eq!(
            parse("<260, >320", REAL),
            SFeelCondition::Or(vec![SFeelCondition::Cmp(Comparison::Lt, Value::int(260)), SFeelCondition::Cmp(Comparison::Gt, Value::int(320))])
        );
        assert_eq!(parse("not(\"CCV\")", PrimitiveDatatype::String), SFeelCondition::NotEq(Value::str("CCV")));
        assert_eq!(
            parse("[0..9]", REAL),
            SFeelCondition::Interval { lower_open: false, lo: Value::int(0), hi: Value::int(9), upper_open: false }
        );
        assert_eq!(parse("[0, 9]", REAL), parse("[0..9]", REAL));
        assert_eq!(parse("-5", REAL), SFeelCondition::Eq(Value::int(-5)));
        assert_eq!(parse("<=0.75", REAL), SFeelCondition::Cmp(Comparison::Leq, Value::parse_number("3/4").unwrap()));
    }

    #[test]
    fn today_is_substituted() {
        let today = BigRational::from_integer(20000.into());
        assert_eq!(
            parse_condition(">today", REAL, Some(&today)).unwrap(),
            SFeelCondition::Cmp(Comparison::Gt, Value::int(20000))
        );
        assert!(parse_condition(">today", REAL, None).is_err());
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_condition("<5, ?", REAL, None).unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(matches!(e.kind, SFeelErrorKind::Syntax(_)));
        let e = parse_condition("<\"a\"", PrimitiveDatatype::String, None).unwrap_err();
        assert!(matches!(e.kind, SFeelErrorKind::Type(_)));
        let e = parse_condition("[9..0]", REAL, None).unwrap_err();
        assert_eq!(e.kind, SFeelErrorKind::MalformedInterval);
        assert!(parse_condition("1.5", PrimitiveDatatype::Integer, None).is_err());
        assert!(parse_condition("not([0..1])", REAL, None).is_err());
    }

    #[test]
    fn printing() {
        assert_eq!(SFeelCondition::Any.to_string(), "-");
        let iv = SFeelCondition::Interval { lower_open: true, lo: Value::int(320), hi: Value::int(400), upper_open: true };
        assert_eq!(iv.to_string(), "(320..400)");
        let or = SFeelCondition::Or(vec![SFeelCondition::Eq(Value::str("indoor")), SFeelCondition::Eq(Value::str("outdoor"))]);
        assert_eq!(or.to_string(), "\"indoor\", \"outdoor\"");
    }

    #[test]
    fn derived_translation() {
        assert!(SFeelCondition::Any.to_derived(REAL).is_full());
        let lt = SFeelCondition::Cmp(Comparison::Lt, Value::int(10)).to_derived(REAL);
        assert_eq!(lt, DerivedDatatype::facet(REAL, FacetOp::Lt, Value::int(10)).unwrap());
        let iv = parse("(0..9]", REAL).to_derived(REAL);
        assert!(!value_in(&iv, &Value::int(0)).unwrap());
        assert!(value_in(&iv, &Value::int(9)).unwrap());
    }
}
