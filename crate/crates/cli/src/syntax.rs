//! Concrete syntax for concepts, data ranges, values, axioms and facts.
//! Printing uses the `Display` impls of the core types; this module is the
//! inverse.

use dkbv_core::datatypes::{parse_rational, DataExpr, DerivedDatatype, Facet, FacetFormula, FacetOp, PrimitiveDatatype, Value};
use dkbv_core::dl::{desugar_feature_forall, AboxFact, Concept, Signature, TBoxAxiom};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct SyntaxError {
    /// Byte offset into the parsed text.
    pub offset: usize,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, SyntaxError>;

pub const KEYWORDS: &[&str] = &[
    "top", "bottom", "not", "and", "or", "some", "all", "undef", "sub", "rolesub", "featuresub", "roledisj", "featuredisj",
];

pub struct Cursor<'a> {
    pub src: &'a str,
    pub pos: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(SyntaxError { offset: self.pos, message: message.into() })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    pub fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    /// Consumes `tok` if the remaining text starts with it.
    pub fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(format!("expected '{tok}'"))
        }
    }

    /// Consumes `kw` when followed by a non-identifier character.
    pub fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let r = self.rest();
        if r.starts_with(kw) && !r[kw.len()..].starts_with(is_ident_char) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    pub fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let r = self.rest();
        if !r.starts_with(is_ident_start) {
            return self.err("expected a name");
        }
        let n = r.find(|c: char| !is_ident_char(c)).unwrap_or(r.len());
        self.pos += n;
        Ok(&r[..n])
    }

    /// Identifier segments joined by `.`, with the end offset of each.
    fn path(&mut self) -> Result<Vec<(&'a str, usize)>> {
        let mut out = vec![(self.ident()?, self.pos)];
        loop {
            let r = self.rest();
            if r.starts_with('.') && r[1..].starts_with(is_ident_start) {
                self.pos += 1;
                let s = self.ident()?;
                out.push((s, self.pos));
            } else {
                return Ok(out);
            }
        }
    }

    /// A possibly dotted name, e.g. a mangled feature.
    pub fn dotted(&mut self) -> Result<String> {
        Ok(self.path()?.iter().map(|(s, _)| *s).collect::<Vec<_>>().join("."))
    }

    /// Longest prefix of a dotted path accepted by `known`; the cursor is
    /// left right after it.
    fn resolve(&mut self, known: impl Fn(&str) -> bool, what: &str) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        let path = self.path()?;
        for i in (1..=path.len()).rev() {
            let name = path[..i].iter().map(|(s, _)| *s).collect::<Vec<_>>().join(".");
            if known(&name) {
                self.pos = path[i - 1].1;
                return Ok(name);
            }
        }
        self.pos = start;
        self.err(format!("unknown {what} {}", path.iter().map(|(s, _)| *s).collect::<Vec<_>>().join(".")))
    }

    pub fn value(&mut self) -> Result<Value> {
        self.skip_ws();
        let r = self.rest();
        if let Some(body) = r.strip_prefix('"') {
            let mut out = String::new();
            let mut chars = body.char_indices();
            while let Some((i, c)) = chars.next() {
                match c {
                    '"' => {
                        self.pos += i + 2;
                        return Ok(Value::Str(out));
                    }
                    '\\' => match chars.next() {
                        Some((_, 'n')) => out.push('\n'),
                        Some((_, c @ ('"' | '\\'))) => out.push(c),
                        _ => return self.err("bad escape in string"),
                    },
                    c => out.push(c),
                }
            }
            return self.err("unterminated string");
        }
        let n = r
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_digit() || c == '/' || (c == '-' && i == 0) || (c == '.' && r[i + 1..].starts_with(|d: char| d.is_ascii_digit()))))
            .map_or(r.len(), |(i, _)| i);
        match parse_rational(&r[..n]) {
            Some(q) if n > 0 => {
                self.pos += n;
                Ok(Value::Num(q))
            }
            _ => self.err("expected a value"),
        }
    }
}

pub fn datatype_name(c: &mut Cursor<'_>) -> Result<PrimitiveDatatype> {
    let save = c.pos;
    let name = c.ident()?;
    PrimitiveDatatype::from_name(name).map_or_else(
        || {
            c.pos = save;
            c.err(format!("unknown datatype {name}"))
        },
        Ok,
    )
}

fn facet_op(c: &mut Cursor<'_>) -> Result<FacetOp> {
    for (tok, op) in [("<=", FacetOp::Leq), (">=", FacetOp::Geq), ("<", FacetOp::Lt), (">", FacetOp::Gt), ("=", FacetOp::Eq)] {
        if c.eat(tok) {
            return Ok(op);
        }
    }
    c.err("expected a facet")
}

fn formula(c: &mut Cursor<'_>) -> Result<FacetFormula> {
    let mut acc = formula_and(c)?;
    while c.eat("|") {
        acc = acc.or(formula_and(c)?);
    }
    Ok(acc)
}

fn formula_and(c: &mut Cursor<'_>) -> Result<FacetFormula> {
    let mut acc = formula_unary(c)?;
    while c.eat("&") {
        acc = acc.and(formula_unary(c)?);
    }
    Ok(acc)
}

fn formula_unary(c: &mut Cursor<'_>) -> Result<FacetFormula> {
    if c.eat("!") {
        return Ok(FacetFormula::Not(formula_unary(c)?.into()));
    }
    if c.eat("(") {
        let f = formula(c)?;
        c.expect(")")?;
        return Ok(f);
    }
    let op = facet_op(c)?;
    Ok(FacetFormula::Facet(Facet::new(op, c.value()?)))
}

fn range_expr(c: &mut Cursor<'_>) -> Result<(PrimitiveDatatype, DataExpr)> {
    if c.eat("(") {
        let (b1, a) = range_expr(c)?;
        let ctor: fn(Box<DataExpr>, Box<DataExpr>) -> DataExpr = if c.eat("|") {
            DataExpr::Union
        } else if c.eat("&") {
            DataExpr::Intersection
        } else if c.eat("\\") {
            DataExpr::Difference
        } else {
            return c.err("expected '|', '&' or '\\'");
        };
        let at = c.pos;
        let (b2, b) = range_expr(c)?;
        c.expect(")")?;
        if b1 != b2 {
            return Err(SyntaxError { offset: at, message: format!("expected {b1}, found {b2}") });
        }
        return Ok((b1, ctor(a.into(), b.into())));
    }
    let base = datatype_name(c)?;
    if c.rest().starts_with('[') {
        c.pos += 1;
        let f = formula(c)?;
        c.expect("]")?;
        Ok((base, DataExpr::Restriction(f)))
    } else if c.rest().starts_with('{') {
        c.pos += 1;
        let mut vs = Vec::new();
        if !c.eat("}") {
            loop {
                vs.push(c.value()?);
                if c.eat("}") {
                    break;
                }
                c.expect(",")?;
            }
        }
        Ok((base, DataExpr::Enumeration(vs)))
    } else {
        Ok((base, DataExpr::Full))
    }
}

pub fn data_range(c: &mut Cursor<'_>) -> Result<DerivedDatatype> {
    c.skip_ws();
    let at = c.pos;
    let (base, e) = range_expr(c)?;
    DerivedDatatype::new(base, e).map_err(|e| SyntaxError { offset: at, message: e.to_string() })
}

pub fn concept(c: &mut Cursor<'_>, sig: &Signature) -> Result<Concept> {
    let a = concept_and(c, sig)?;
    if c.keyword("or") {
        return Ok(a.or(concept(c, sig)?));
    }
    Ok(a)
}

fn concept_and(c: &mut Cursor<'_>, sig: &Signature) -> Result<Concept> {
    let a = concept_unary(c, sig)?;
    if c.keyword("and") {
        return Ok(a.and(concept_and(c, sig)?));
    }
    Ok(a)
}

fn typed_range(c: &mut Cursor<'_>, sig: &Signature, f: &str) -> Result<DerivedDatatype> {
    c.skip_ws();
    let at = c.pos;
    let e = data_range(c)?;
    let dt = sig.features[f];
    if e.base() != dt {
        return Err(SyntaxError { offset: at, message: format!("feature {f} takes {dt}, found {}", e.base()) });
    }
    Ok(e)
}

fn concept_unary(c: &mut Cursor<'_>, sig: &Signature) -> Result<Concept> {
    let known = |n: &str| sig.roles.contains(n) || sig.features.contains_key(n);
    if c.keyword("not") {
        return Ok(concept_unary(c, sig)?.not());
    }
    if c.keyword("top") {
        return Ok(Concept::Top);
    }
    if c.keyword("bottom") {
        return Ok(Concept::Bot);
    }
    if c.eat("(") {
        let x = concept(c, sig)?;
        c.expect(")")?;
        return Ok(x);
    }
    if c.keyword("undef") {
        let f = c.resolve(|n| sig.features.contains_key(n), "feature")?;
        return Ok(Concept::undef(f));
    }
    for (kw, some) in [("some", true), ("all", false)] {
        if !c.keyword(kw) {
            continue;
        }
        let name = c.resolve(known, "role or feature")?;
        let dot = c.rest().starts_with('.');
        if sig.roles.contains(&name) {
            if !dot {
                return c.err("expected '.'");
            }
            c.pos += 1;
            let filler = concept_unary(c, sig)?;
            return Ok(if some { Concept::exists(name, filler) } else { Concept::forall(name, filler) });
        }
        if !dot {
            if some {
                return Ok(Concept::defined(name.clone(), sig.features[&name]));
            }
            return c.err("expected '.'");
        }
        c.pos += 1;
        let e = typed_range(c, sig, &name)?;
        return Ok(if some { Concept::some_value(name, e) } else { desugar_feature_forall(&name, e) });
    }
    let save = c.pos;
    let n = c.ident()?;
    if KEYWORDS.contains(&n) || !sig.concepts.contains(n) {
        c.pos = save;
        return c.err(format!("unknown concept {n}"));
    }
    Ok(Concept::name(n))
}

/// Parses a whole string as a concept.
pub fn parse_concept(text: &str, sig: &Signature) -> Result<Concept> {
    let mut c = Cursor::new(text);
    let x = concept(&mut c, sig)?;
    if !c.at_end() {
        return c.err("unexpected trailing text");
    }
    Ok(x)
}

pub fn axiom(c: &mut Cursor<'_>, sig: &Signature) -> Result<TBoxAxiom> {
    let pairs: [(&str, fn(String, String) -> TBoxAxiom, bool); 4] = [
        ("rolesub", TBoxAxiom::RoleIncl, true),
        ("featuresub", TBoxAxiom::FeatureIncl, false),
        ("roledisj", TBoxAxiom::RoleDisj, true),
        ("featuredisj", TBoxAxiom::FeatureDisj, false),
    ];
    for (kw, ctor, role) in pairs {
        if c.keyword(kw) {
            let known = |n: &str| if role { sig.roles.contains(n) } else { sig.features.contains_key(n) };
            let what = if role { "role" } else { "feature" };
            let a = c.resolve(known, what)?;
            let b = c.resolve(known, what)?;
            return Ok(ctor(a, b));
        }
    }
    let a = concept(c, sig)?;
    if !c.keyword("sub") {
        return c.err("expected 'sub'");
    }
    Ok(TBoxAxiom::ConceptIncl(a, concept(c, sig)?))
}

pub fn fact(c: &mut Cursor<'_>, sig: &Signature) -> Result<AboxFact> {
    c.skip_ws();
    let at = c.pos;
    let name = c.dotted()?;
    c.expect("(")?;
    let o = c.ident()?.to_string();
    let out = if sig.concepts.contains(&name) {
        AboxFact::Concept(name, o)
    } else if sig.roles.contains(&name) {
        c.expect(",")?;
        AboxFact::Role(name, o, c.ident()?.to_string())
    } else if let Some(&dt) = sig.features.get(&name) {
        c.expect(",")?;
        c.skip_ws();
        let vat = c.pos;
        let v = c.value()?;
        if !dt.admits(&v) {
            return Err(SyntaxError { offset: vat, message: format!("{v} is not a {dt}") });
        }
        AboxFact::Feature(name, o, v)
    } else {
        return Err(SyntaxError { offset: at, message: format!("unknown name {name}") });
    };
    c.expect(")")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        let mut s = Signature::default();
        s.add_concept("A").unwrap();
        s.add_concept("B").unwrap();
        s.add_role("R").unwrap();
        s.add_feature("f", PrimitiveDatatype::Real).unwrap();
        s.add_feature("T.a", PrimitiveDatatype::String).unwrap();
        s
    }

    #[test]
    fn concepts_round_trip() {
        let s = sig();
        for text in [
            "A and B or not A",
            "(A or B) and A",
            "some R.(A and B)",
            "all R.some R.A",
            "some f.real[>=0 & <=9]",
            "some f",
            "undef T.a",
            "some T.a.string{\"x\", \"y\"}",
            "some f.(real[>1] \\ real{3/2})",
            "not some f.real[!=1 | <0]",
            "top and bottom",
        ] {
            let Ok(c) = parse_concept(text, &s) else {
                assert!(text.contains("!="), "{text}");
                continue;
            };
            let printed = c.to_string();
            assert_eq!(parse_concept(&printed, &s).unwrap(), c, "{text} -> {printed}");
        }
    }

    #[test]
    fn feature_forall_is_desugared() {
        let c = parse_concept("all f.real[>0]", &sig()).unwrap();
        assert_eq!(c.to_string(), "undef f or some f.real[>0]");
    }

    #[test]
    fn errors_point_at_the_problem() {
        let e = parse_concept("A and C", &sig()).unwrap_err();
        assert_eq!(e.offset, 6);
        let e = parse_concept("some f.string{\"a\"}", &sig()).unwrap_err();
        assert_eq!(e.offset, 7);
        assert!(parse_concept("some R", &sig()).is_err());
    }

    #[test]
    fn axioms_and_facts() {
        let s = sig();
        let mut c = Cursor::new("A sub some R.B");
        assert_eq!(axiom(&mut c, &s).unwrap().to_string(), "A sub some R.B");
        let mut c = Cursor::new("rolesub R R");
        assert_eq!(axiom(&mut c, &s).unwrap(), TBoxAxiom::RoleIncl("R".into(), "R".into()));
        let mut c = Cursor::new("f(o, -3/4)");
        assert_eq!(fact(&mut c, &s).unwrap().to_string(), "f(o, -0.75)");
        let mut c = Cursor::new("T.a(o, \"q\\\"\")");
        assert_eq!(fact(&mut c, &s).unwrap(), AboxFact::Feature("T.a".into(), "o".into(), Value::str("q\"")));
        let mut c = Cursor::new("f(o, \"x\")");
        assert!(fact(&mut c, &s).is_err());
    }
}
