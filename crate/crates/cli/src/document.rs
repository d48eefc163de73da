//! The `.dkb` file format.
//!
//! Line-oriented; `#` starts a comment. Statements:
//!
//! ```text
//! today 20000
//! concept Ship CCV
//! role hasPart
//! feature length: real
//! bridge Ship
//! axiom CCV sub all length.real{135}
//! data length: real where >=0
//! table Sc hit U
//!   input length: real where >=0
//!   output Enter: string in "y", "n" default "n"
//!   rule <260 => "y"
//! end
//! flow length -> Sc.length
//! outputs Sc
//! bkm Rules
//! knowledge Rules -> Sc
//! fact Ship(s1)
//! template phi = some length
//! ```

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use dkbv_core::datatypes::{format_rational, BigRational, PrimitiveDatatype, Value};
use dkbv_core::dl::{is_identifier, Concept, Signature};
use dkbv_core::dmn::{Attr, DecisionTable, Drg, Flow, HitPolicy, InputColumn, InputDatum, OutputColumn, Rule};
use dkbv_core::encoding::{drg_signature, validate_dkb, Dkb};
use dkbv_core::sfeel::{parse_condition, SFeelCondition};

use crate::syntax::{self, datatype_name, Cursor, SyntaxError, KEYWORDS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub today: Option<BigRational>,
    pub dkb: Dkb,
    pub templates: Vec<(String, Concept)>,
}

/// A problem at a 1-based line and column; line 0 means the whole document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "error: {}", self.message)
        } else {
            write!(f, "{}:{}: {}", self.line, self.column, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ParseError(pub Vec<Diagnostic>);

struct Line<'a> {
    no: usize,
    /// Byte offset of `text` within the source line.
    indent: usize,
    text: &'a str,
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_str => escaped = true,
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

struct Parser {
    diags: Vec<Diagnostic>,
    today: Option<BigRational>,
}

impl Parser {
    fn diag(&mut self, line: &Line<'_>, offset: usize, message: impl Into<String>) {
        let column = line.indent + line.text[..offset.min(line.text.len())].chars().count() + 1;
        self.diags.push(Diagnostic { line: line.no, column, message: message.into() });
    }

    fn syntax(&mut self, line: &Line<'_>, e: SyntaxError) {
        self.diag(line, e.offset, e.message);
    }
}

/// Splits `text` at top-level occurrences of `sep`, outside string literals.
fn split_top<'a>(text: &'a str, sep: &str) -> Vec<(usize, &'a str)> {
    let mut out = Vec::new();
    let (mut start, mut in_str, mut escaped) = (0, false, false);
    let mut i = 0;
    while i < text.len() {
        let c = text[i..].chars().next().unwrap();
        if escaped {
            escaped = false;
        } else if in_str && c == '\\' {
            escaped = true;
        } else if c == '"' {
            in_str = !in_str;
        } else if !in_str && text[i..].starts_with(sep) {
            out.push((start, &text[start..i]));
            i += sep.len();
            start = i;
            continue;
        }
        i += c.len_utf8();
    }
    out.push((start, &text[start..]));
    out
}

fn name_ok(n: &str) -> bool {
    is_identifier(n) && !KEYWORDS.contains(&n)
}

pub fn parse_dkb(text: &str) -> Result<Document, ParseError> {
    parse_dkb_with(text, None)
}

/// As [`parse_dkb`]; a given `today` replaces the document's own.
pub fn parse_dkb_with(text: &str, today: Option<BigRational>) -> Result<Document, ParseError> {
    let fixed = today.is_some();
    let lines: Vec<Line<'_>> = text
        .lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = strip_comment(raw);
            let trimmed = body.trim();
            (!trimmed.is_empty()).then(|| Line { no: i + 1, indent: body.len() - body.trim_start().len(), text: trimmed })
        })
        .collect();
    let mut p = Parser { diags: Vec::new(), today };
    let mut sig = Signature::default();
    let mut bridge: Option<String> = None;
    let mut drg = Drg::default();
    let mut deferred: Vec<usize> = Vec::new();
    let mut i = 0;
    // Declarations first so that later statements may refer to anything.
    while i < lines.len() {
        let line = &lines[i];
        let mut c = Cursor::new(line.text);
        let kw = c.ident().unwrap_or("");
        match kw {
            "today" => match c.value() {
                Ok(Value::Num(_)) if c.at_end() && fixed => {}
                Ok(Value::Num(q)) if c.at_end() => p.today = Some(q),
                _ => p.diag(line, c.pos, "expected a number"),
            },
            "concept" | "role" => {
                while !c.at_end() {
                    let at = c.pos;
                    match c.ident() {
                        Ok(n) if name_ok(n) => {
                            let r = if kw == "concept" { sig.add_concept(n) } else { sig.add_role(n) };
                            if let Err(e) = r {
                                p.diag(line, at, e.to_string());
                            }
                        }
                        Ok(n) => p.diag(line, at, format!("{n} is reserved")),
                        Err(e) => {
                            p.syntax(line, e);
                            break;
                        }
                    }
                }
            }
            "feature" => {
                let r = (|| {
                    let at = c.pos;
                    let n = c.ident()?;
                    if !name_ok(n) {
                        return Err(SyntaxError { offset: at, message: format!("{n} is reserved") });
                    }
                    c.expect(":")?;
                    let dt = datatype_name(&mut c)?;
                    if !c.at_end() {
                        return c.err("unexpected trailing text");
                    }
                    sig.add_feature(n, dt).map_err(|e| SyntaxError { offset: at, message: e.to_string() })
                })();
                if let Err(e) = r {
                    p.syntax(line, e);
                }
            }
            "table" => {
                let start = i;
                while i < lines.len() && lines[i].text != "end" {
                    i += 1;
                }
                if i == lines.len() {
                    p.diag(&lines[start], 0, "table without 'end'");
                }
                deferred.push(start);
            }
            "end" => p.diag(line, 0, "'end' outside a table"),
            _ => deferred.push(i),
        }
        i += 1;
    }
    // Structure of the decision graph.
    let mut late = Vec::new();
    for &i in &deferred {
        let line = &lines[i];
        let mut c = Cursor::new(line.text);
        let kw = c.ident().unwrap_or("");
        let r: syntax::Result<()> = match kw {
            "bridge" => (|| {
                let n = c.ident()?;
                if bridge.is_some() {
                    return c.err("bridge declared twice");
                }
                bridge = Some(n.to_string());
                end(&mut c)
            })(),
            "data" => (|| {
                let at = c.pos;
                let name = c.ident()?.to_string();
                c.expect(":")?;
                let dt = datatype_name(&mut c)?;
                let facet = where_clause(&mut c, dt, p.today.as_ref())?;
                if drg.datum(&name).is_some() {
                    return Err(SyntaxError { offset: at, message: format!("duplicate input datum {name}") });
                }
                drg.input_data.push(InputDatum { name, datatype: dt, facet });
                Ok(())
            })(),
            "table" => {
                let block: Vec<&Line<'_>> = lines[i..].iter().take_while(|l| l.text != "end").collect();
                match parse_table(&mut p, &block) {
                    Some(t) if drg.table(&t.name).is_some() => {
                        p.diag(line, 6, format!("duplicate table name {}", t.name));
                        Ok(())
                    }
                    Some(t) => {
                        drg.tables.push(t);
                        Ok(())
                    }
                    None => Ok(()),
                }
            }
            "flow" => (|| {
                let src = c.dotted()?;
                c.expect("->")?;
                let at = c.pos;
                let dst = c.dotted()?;
                let Some((table, attr)) = dst.split_once('.') else {
                    return Err(SyntaxError { offset: at, message: "flow target must be Table.attr".into() });
                };
                let source = match src.split_once('.') {
                    Some((t, a)) => Attr::column(t, a),
                    None => Attr::Datum(src),
                };
                drg.flows.push(Flow { source, table: table.into(), attr: attr.into() });
                end(&mut c)
            })(),
            "outputs" => {
                let mut r = Ok(());
                while !c.at_end() {
                    match c.ident() {
                        Ok(n) => drg.outputs.push(n.into()),
                        Err(e) => {
                            r = Err(e);
                            break;
                        }
                    }
                }
                r
            }
            "bkm" => c.ident().map(|n| drg.bkms.push(n.into())).and_then(|_| end(&mut c)),
            "knowledge" => (|| {
                let b = c.ident()?.to_string();
                c.expect("->")?;
                let t = c.ident()?.to_string();
                drg.knowledge.push((b, t));
                end(&mut c)
            })(),
            "axiom" | "fact" | "template" => {
                late.push(i);
                Ok(())
            }
            _ => Err(SyntaxError { offset: 0, message: format!("unknown statement '{kw}'") }),
        };
        if let Err(e) = r {
            p.syntax(line, e);
        }
    }
    let mut ext = sig.clone();
    for (n, dt) in drg_signature(&drg) {
        if ext.add_feature(&n, dt).is_err() {
            p.diags.push(Diagnostic { line: 0, column: 0, message: format!("attribute {n} clashes with the signature") });
        }
    }
    let mut background = Vec::new();
    let mut abox = Vec::new();
    let mut templates: Vec<(String, Concept)> = Vec::new();
    for i in late {
        let line = &lines[i];
        let mut c = Cursor::new(line.text);
        let r: syntax::Result<()> = match c.ident().unwrap_or("") {
            "axiom" => syntax::axiom(&mut c, &sig).map(|a| background.push(a)).and_then(|_| end(&mut c)),
            "fact" => syntax::fact(&mut c, &ext).map(|f| abox.push(f)).and_then(|_| end(&mut c)),
            _ => (|| {
                let at = c.pos;
                let n = c.ident()?.to_string();
                c.expect("=")?;
                let t = syntax::concept(&mut c, &ext)?;
                end(&mut c)?;
                if templates.iter().any(|(m, _)| *m == n) {
                    return Err(SyntaxError { offset: at, message: format!("duplicate template {n}") });
                }
                templates.push((n, t));
                Ok(())
            })(),
        };
        if let Err(e) = r {
            p.syntax(line, e);
        }
    }
    if bridge.is_none() {
        p.diags.push(Diagnostic { line: 0, column: 0, message: "missing bridge declaration".into() });
    }
    if !p.diags.is_empty() {
        p.diags.sort_by_key(|d| (d.line, d.column));
        return Err(ParseError(p.diags));
    }
    let dkb = Dkb { signature: sig, background, drg, bridge: bridge.unwrap_or_default(), abox };
    if let Err(errs) = validate_dkb(&dkb) {
        return Err(ParseError(errs.into_iter().map(|e| Diagnostic { line: 0, column: 0, message: e.to_string() }).collect()));
    }
    Ok(Document { today: p.today, dkb, templates })
}

fn end(c: &mut Cursor<'_>) -> syntax::Result<()> {
    if c.at_end() {
        Ok(())
    } else {
        c.err("unexpected trailing text")
    }
}

fn sfeel(c: &mut Cursor<'_>, text_end: usize, dt: PrimitiveDatatype, today: Option<&BigRational>) -> syntax::Result<SFeelCondition> {
    c.skip_ws();
    let start = c.pos;
    let text = &c.src[start..text_end];
    let r = parse_condition(text.trim_end(), dt, today)
        .map_err(|e| SyntaxError { offset: start + e.offset, message: e.kind.to_string() });
    c.pos = text_end;
    r
}

fn where_clause(c: &mut Cursor<'_>, dt: PrimitiveDatatype, today: Option<&BigRational>) -> syntax::Result<SFeelCondition> {
    if c.at_end() {
        return Ok(SFeelCondition::Any);
    }
    if !c.keyword("where") {
        return c.err("expected 'where'");
    }
    sfeel(c, c.src.len(), dt, today)
}

fn parse_table(p: &mut Parser, block: &[&Line<'_>]) -> Option<DecisionTable> {
    let head = block[0];
    let before = p.diags.len();
    let mut c = Cursor::new(head.text);
    c.ident().ok();
    let header = (|| {
        let name = c.ident()?.to_string();
        if !c.keyword("hit") {
            return c.err("expected 'hit'");
        }
        let at = c.pos;
        let letter = c.ident()?;
        let hit = HitPolicy::from_letter(letter)
            .ok_or(SyntaxError { offset: at, message: format!("unknown hit policy {letter}") })?;
        end(&mut c)?;
        Ok((name, hit))
    })();
    let (name, hit) = match header {
        Ok(h) => h,
        Err(e) => {
            p.syntax(head, e);
            return None;
        }
    };
    let mut t = DecisionTable { name, inputs: Vec::new(), outputs: Vec::new(), rules: Vec::new(), hit };
    let today = p.today.clone();
    for line in &block[1..] {
        let mut c = Cursor::new(line.text);
        let r: syntax::Result<()> = match c.ident().unwrap_or("") {
            "input" => (|| {
                let name = c.ident()?.to_string();
                c.expect(":")?;
                let dt = datatype_name(&mut c)?;
                let facet = where_clause(&mut c, dt, today.as_ref())?;
                t.inputs.push(InputColumn { name, datatype: dt, facet });
                Ok(())
            })(),
            "output" => (|| {
                let name = c.ident()?.to_string();
                c.expect(":")?;
                let dt = datatype_name(&mut c)?;
                if !c.keyword("in") {
                    return c.err("expected 'in'");
                }
                let mut range = vec![typed_value(&mut c, dt)?];
                while c.eat(",") {
                    range.push(typed_value(&mut c, dt)?);
                }
                let default = if c.keyword("default") { Some(typed_value(&mut c, dt)?) } else { None };
                end(&mut c)?;
                t.outputs.push(OutputColumn { name, datatype: dt, range, default });
                Ok(())
            })(),
            "rule" => (|| {
                let base = c.pos;
                let body = &line.text[base..];
                let sides = split_top(body, "=>");
                if sides.len() != 2 {
                    return c.err("expected '=>'");
                }
                let ins = split_top(sides[0].1, "|");
                let outs = split_top(sides[1].1, "|");
                if ins.len() != t.inputs.len() || outs.len() != t.outputs.len() {
                    return c.err(format!(
                        "rule has {} inputs and {} outputs, table has {} and {}",
                        ins.len(),
                        outs.len(),
                        t.inputs.len(),
                        t.outputs.len()
                    ));
                }
                let mut rule = Rule::default();
                for ((off, text), col) in ins.iter().zip(&t.inputs) {
                    let mut cc = Cursor { src: line.text, pos: base + off };
                    let stop = base + off + text.len();
                    let cond = sfeel(&mut cc, stop, col.datatype, today.as_ref())?;
                    rule.inputs.insert(col.name.clone(), cond);
                }
                for ((off, text), col) in outs.iter().zip(&t.outputs) {
                    let start = base + sides[1].0 + off;
                    let mut cc = Cursor { src: &line.text[..start + text.len()], pos: start };
                    let v = typed_value(&mut cc, col.datatype)?;
                    end(&mut cc)?;
                    rule.outputs.insert(col.name.clone(), v);
                }
                t.rules.push(rule);
                Ok(())
            })(),
            kw => Err(SyntaxError { offset: 0, message: format!("unknown table statement '{kw}'") }),
        };
        if let Err(e) = r {
            p.syntax(line, e);
        }
    }
    if p.diags.len() > before {
        return None;
    }
    if let Err(errs) = t.validate() {
        for e in errs {
            p.diag(head, 0, e.to_string());
        }
        return None;
    }
    Some(t)
}

fn typed_value(c: &mut Cursor<'_>, dt: PrimitiveDatatype) -> syntax::Result<Value> {
    c.skip_ws();
    let at = c.pos;
    let v = c.value()?;
    if !dt.admits(&v) {
        return Err(SyntaxError { offset: at, message: format!("{v} is not a {dt}") });
    }
    Ok(v)
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn where_text(c: &SFeelCondition) -> String {
    if c.is_any() {
        String::new()
    } else {
        format!(" where {c}")
    }
}

/// Canonical text of a document; [`parse_dkb`] reads it back unchanged.
pub fn emit_dkb(doc: &Document) -> String {
    let d = &doc.dkb;
    let sig = &d.signature;
    let mut out = String::new();
    if let Some(q) = &doc.today {
        writeln!(out, "today {}", format_rational(q)).unwrap();
    }
    if !sig.concepts.is_empty() {
        writeln!(out, "concept {}", join(&sig.concepts, " ")).unwrap();
    }
    if !sig.roles.is_empty() {
        writeln!(out, "role {}", join(&sig.roles, " ")).unwrap();
    }
    for (f, dt) in &sig.features {
        writeln!(out, "feature {f}: {dt}").unwrap();
    }
    writeln!(out, "bridge {}", d.bridge).unwrap();
    for ax in &d.background {
        writeln!(out, "axiom {ax}").unwrap();
    }
    let g = &d.drg;
    for x in &g.input_data {
        writeln!(out, "data {}: {}{}", x.name, x.datatype, where_text(&x.facet)).unwrap();
    }
    for t in &g.tables {
        writeln!(out, "table {} hit {}", t.name, t.hit.letter()).unwrap();
        for c in &t.inputs {
            writeln!(out, "  input {}: {}{}", c.name, c.datatype, where_text(&c.facet)).unwrap();
        }
        for c in &t.outputs {
            write!(out, "  output {}: {} in {}", c.name, c.datatype, join(&c.range, ", ")).unwrap();
            if let Some(v) = &c.default {
                write!(out, " default {v}").unwrap();
            }
            out.push('\n');
        }
        for r in &t.rules {
            let ins = t.inputs.iter().map(|c| r.inputs.get(&c.name).cloned().unwrap_or(SFeelCondition::Any));
            let outs = t.outputs.iter().filter_map(|c| r.outputs.get(&c.name));
            writeln!(out, "  rule {} => {}", join(ins, " | "), join(outs, " | ")).unwrap();
        }
        out.push_str("end\n");
    }
    for f in &g.flows {
        writeln!(out, "flow {} -> {}.{}", f.source, f.table, f.attr).unwrap();
    }
    if !g.outputs.is_empty() {
        writeln!(out, "outputs {}", g.outputs.join(" ")).unwrap();
    }
    for b in &g.bkms {
        writeln!(out, "bkm {b}").unwrap();
    }
    for (b, t) in &g.knowledge {
        writeln!(out, "knowledge {b} -> {t}").unwrap();
    }
    for f in &d.abox {
        writeln!(out, "fact {f}").unwrap();
    }
    for (n, t) in &doc.templates {
        writeln!(out, "template {n} = {t}").unwrap();
    }
    out
}

impl Document {
    pub fn template(&self, name: &str) -> Option<&Concept> {
        self.templates.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    /// Names used anywhere in the document, for fresh-name checks.
    pub fn names(&self) -> BTreeSet<String> {
        let s = &self.dkb.signature;
        s.concepts.iter().chain(&s.roles).chain(s.features.keys()).cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = r#"
# a one-table document
concept Case
bridge Case
table T hit U
  input x: real where >=0   # facet
  output y: string in "a", "b" default "b"
  rule <5 => "a"
  rule [5..10] => "b"
end
outputs T
fact T.x(o, 3)
template all = some T.x
"#;

    #[test]
    fn minimal_document() {
        let doc = parse_dkb(MINI).unwrap();
        assert!(doc.dkb.background.is_empty());
        assert_eq!(doc.dkb.drg.tables[0].rules.len(), 2);
        let text = emit_dkb(&doc);
        assert_eq!(parse_dkb(&text).unwrap(), doc, "{text}");
    }

    #[test]
    fn diagnostics_have_positions() {
        let bad = MINI.replace("rule <5", "rule <<5");
        let e = parse_dkb(&bad).unwrap_err();
        assert_eq!((e.0[0].line, e.0[0].column), (8, 9), "{e}");
        let dup = MINI.replace("outputs T", "table T hit U\n  input x: real\n  output y: string in \"a\"\n  rule - => \"a\"\nend\noutputs T");
        let e = parse_dkb(&dup).unwrap_err();
        assert!(e.to_string().contains("duplicate table name T"), "{e}");
        let e = parse_dkb("concept A\nbridge A\nflurb\n").unwrap_err();
        assert_eq!(e.0[0].line, 3);
    }

    #[test]
    fn today_is_substituted() {
        let doc = parse_dkb(&MINI.replace("rule <5", "rule <today").replace("concept Case", "today 7\nconcept Case")).unwrap();
        assert_eq!(doc.dkb.drg.tables[0].rules[0].inputs["x"].to_string(), "<7");
    }
}
