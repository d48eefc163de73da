//! The `dkbv` command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dkbv_core::datatypes::{format_rational, parse_rational, Value};
use dkbv_core::dl::Concept;
use dkbv_core::dmn::HitPolicy;
use dkbv_core::encoding::{encode_dkb, Dkb};
use dkbv_core::reasoner::{ReasonerError, ReasonerOptions};
use dkbv_core::tasks::{self, Task, TaskError, TaskOptions, TaskVerdict};

use crate::document::{emit_dkb, parse_dkb_with, Document};
use crate::fixtures;
use crate::owl::export_kb;
use crate::report::{ReportDocument, RunOptions, VerdictRecord};
use crate::syntax::parse_concept;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dkbv", version, about = "Verify decision tables against an ontology")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run verification tasks and report verdicts.
    Check(CheckArgs),
    /// Parse a document and print it in canonical form.
    Parse {
        /// A `.dkb` file, or `fixture:NAME`.
        file: String,
        #[arg(long)]
        today: Option<String>,
    },
    /// Print the encoded knowledge base.
    Encode {
        file: String,
        /// OWL 2 functional-style syntax instead of the native syntax.
        #[arg(long)]
        owl: bool,
        #[arg(long)]
        today: Option<String>,
    },
    /// List the packaged fixtures, or print one.
    Fixtures { name: Option<String> },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// A `.dkb` file, or `fixture:NAME`.
    pub file: String,
    /// unique-hit, any-hit, priority-hit, io, coverage, completeness,
    /// determinability or all; repeatable.
    #[arg(long = "task")]
    pub tasks: Vec<String>,
    /// Restrict to one table; completeness and determinability then run on
    /// the table and the input data feeding it.
    #[arg(long)]
    pub table: Option<String>,
    /// Output attribute for coverage and io.
    #[arg(long)]
    pub attr: Option<String>,
    /// Output value for coverage and io.
    #[arg(long)]
    pub value: Option<String>,
    /// ABox object whose output io checks.
    #[arg(long)]
    pub object: Option<String>,
    /// A concept, or the name of a template in the document.
    #[arg(long)]
    pub template: Option<String>,
    /// Ignore the background ontology.
    #[arg(long)]
    pub no_ontology: bool,
    /// Overrides the document's `today`.
    #[arg(long)]
    pub today: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long, default_value_t = ReasonerOptions::default().closure_limit)]
    pub closure_limit: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Resource(String),
}

impl RunError {
    pub fn code(&self) -> i32 {
        match self {
            RunError::Usage(_) => EXIT_USAGE,
            RunError::Resource(_) => EXIT_RESOURCE,
        }
    }
}

fn usage(m: impl Into<String>) -> RunError {
    RunError::Usage(m.into())
}

impl From<TaskError> for RunError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::Reasoner(ReasonerError::ClosureLimit { .. }) => RunError::Resource(e.to_string()),
            e => RunError::Usage(e.to_string()),
        }
    }
}

/// Source text and its display path.
pub fn read_input(file: &str) -> Result<(String, String), RunError> {
    if let Some(name) = file.strip_prefix("fixture:") {
        let text = fixtures::source(name).ok_or_else(|| usage(fixtures::UnknownFixture(name.into()).to_string()))?;
        return Ok((file.into(), text.into()));
    }
    let text = std::fs::read_to_string(file).map_err(|e| usage(format!("{file}: {e}")))?;
    Ok((file.into(), text))
}

fn parse_today(t: &Option<String>) -> Result<Option<dkbv_core::datatypes::BigRational>, RunError> {
    t.as_deref().map(|s| parse_rational(s).ok_or_else(|| usage(format!("--today: not a number: {s}")))).transpose()
}

pub fn load(file: &str, today: &Option<String>) -> Result<(String, String, Document), RunError> {
    let (path, text) = read_input(file)?;
    let doc = parse_dkb_with(&text, parse_today(today)?).map_err(|e| {
        usage(e.0.iter().map(|d| format!("{path}:{d}")).collect::<Vec<_>>().join("\n"))
    })?;
    Ok((path, text, doc))
}

fn subject(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

struct Job {
    subject: BTreeMap<String, String>,
    run: Box<dyn Fn(&TaskOptions) -> Result<TaskVerdict, TaskError>>,
}

fn hit_task(p: HitPolicy) -> Task {
    match p {
        HitPolicy::Unique => Task::UniqueHit,
        HitPolicy::Any => Task::AnyHit,
        HitPolicy::Priority => Task::PriorityHit,
    }
}

fn typed_value(d: &Dkb, table: &str, attr: &str, text: &str) -> Result<Value, RunError> {
    let col = d
        .drg
        .table(table)
        .and_then(|t| t.output(attr))
        .ok_or_else(|| usage(format!("table {table} has no output {attr}")))?;
    let v = if col.datatype.is_numeric() {
        Value::Num(parse_rational(text).ok_or_else(|| usage(format!("--value: not a number: {text}")))?)
    } else {
        Value::str(text.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(text))
    };
    Ok(v)
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Str(s) => s.clone(),
        Value::Num(q) => format_rational(q),
    }
}

/// `(table, attr, value)` triples selected by the optional flags.
fn outputs(d: &Dkb, a: &CheckArgs) -> Result<Vec<(String, String, Value)>, RunError> {
    let mut out = Vec::new();
    for name in &d.drg.outputs {
        if a.table.as_ref().is_some_and(|t| t != name) {
            continue;
        }
        let t = d.drg.table(name).expect("validated");
        for c in &t.outputs {
            if a.attr.as_ref().is_some_and(|x| *x != c.name) {
                continue;
            }
            match &a.value {
                // Without a fully named column, skip columns the value does not fit.
                Some(v) if a.table.is_none() || a.attr.is_none() => {
                    match typed_value(d, name, &c.name, v) {
                        Ok(v) if c.range.contains(&v) => out.push((name.clone(), c.name.clone(), v)),
                        _ => {}
                    }
                }
                Some(v) => out.push((name.clone(), c.name.clone(), typed_value(d, name, &c.name, v)?)),
                None => out.extend(c.range.iter().map(|v| (name.clone(), c.name.clone(), v.clone()))),
            }
        }
    }
    if out.is_empty() {
        return Err(usage("no output table, attribute or value matches the given flags"));
    }
    Ok(out)
}

fn templates(doc: &Document, a: &CheckArgs, explicit: bool) -> Result<Vec<(String, Concept)>, RunError> {
    match &a.template {
        Some(t) => {
            if let Some(c) = doc.template(t) {
                return Ok(vec![(t.clone(), c.clone())]);
            }
            let kb = encode_dkb(&doc.dkb).map_err(|e| usage(e.to_string()))?;
            let c = parse_concept(t, &kb.signature).map_err(|e| usage(format!("--template: {e} at {}", e.offset)))?;
            Ok(vec![(t.clone(), c)])
        }
        None if doc.templates.is_empty() && explicit => Err(usage("determinability needs --template or a template in the document")),
        None => Ok(doc.templates.clone()),
    }
}

fn jobs(doc: &Document, a: &CheckArgs) -> Result<Vec<Job>, RunError> {
    let d = &doc.dkb;
    let mut requested: Vec<String> = if a.tasks.is_empty() { vec!["all".into()] } else { a.tasks.clone() };
    requested.dedup();
    let all = requested.iter().any(|t| t == "all");
    let mut selected: Vec<Task> = Vec::new();
    for t in &requested {
        if t == "all" {
            continue;
        }
        let task = Task::from_name(t).ok_or_else(|| usage(format!("unknown task {t}")))?;
        if !selected.contains(&task) {
            selected.push(task);
        }
    }
    if let Some(t) = &a.table {
        if d.drg.table(t).is_none() {
            return Err(usage(format!("unknown table {t}")));
        }
    }
    let tables: Vec<String> = d.drg.tables.iter().map(|t| t.name.clone()).filter(|n| a.table.as_ref().is_none_or(|t| t == n)).collect();
    let scope = |d: &Dkb| -> Result<Dkb, RunError> {
        match &a.table {
            Some(t) => Ok(tasks::restrict(d, t)?),
            None => Ok(d.clone()),
        }
    };
    let mut out: Vec<Job> = Vec::new();
    let hit = |out: &mut Vec<Job>, task: Task, table: &str| {
        let (d, table) = (d.clone(), table.to_string());
        out.push(Job {
            subject: subject(&[("table", &table)]),
            run: Box::new(move |o| match task {
                Task::UniqueHit => tasks::check_unique_hit(&d, &table, o),
                Task::AnyHit => tasks::check_any_hit(&d, &table, o),
                _ => tasks::check_priority_hit(&d, &table, o),
            }),
        });
    };
    for t in &tables {
        let policy = hit_task(d.drg.table(t).expect("listed").hit);
        for task in [Task::UniqueHit, Task::AnyHit, Task::PriorityHit] {
            if selected.contains(&task) || (all && task == policy) {
                hit(&mut out, task, t);
            }
        }
    }
    if selected.contains(&Task::Completeness) || all {
        let sd = scope(d)?;
        let s = a.table.as_ref().map_or_else(|| subject(&[("graph", "all")]), |t| subject(&[("graph", t)]));
        out.push(Job { subject: s, run: Box::new(move |o| tasks::check_completeness(&sd, o)) });
    }
    if selected.contains(&Task::OutputDeterminability) || all {
        for (name, c) in templates(doc, a, selected.contains(&Task::OutputDeterminability))? {
            let sd = scope(d)?;
            let mut s = subject(&[("template", &name)]);
            if let Some(t) = &a.table {
                s.insert("graph".into(), t.clone());
            }
            out.push(Job { subject: s, run: Box::new(move |o| tasks::check_determinability(&sd, &c, o)) });
        }
    }
    if selected.contains(&Task::OutputCoverage) || all {
        for (table, attr, v) in outputs(d, a)? {
            let d = d.clone();
            let s = subject(&[("table", &table), ("attr", &attr), ("value", &value_text(&v))]);
            out.push(Job { subject: s, run: Box::new(move |o| tasks::check_coverage(&d, &table, &attr, &v, o)) });
        }
    }
    if selected.contains(&Task::IoRelationship) || (all && a.object.is_some()) {
        let object = a.object.clone().ok_or_else(|| usage("io needs --object"))?;
        if a.table.is_none() || a.attr.is_none() || a.value.is_none() {
            return Err(usage("io needs --table, --attr and --value"));
        }
        for (table, attr, v) in outputs(d, a)? {
            let (d, object) = (d.clone(), object.clone());
            let s = subject(&[("table", &table), ("attr", &attr), ("value", &value_text(&v)), ("object", &object)]);
            out.push(Job { subject: s, run: Box::new(move |o| tasks::check_io(&d, &table, &attr, &object, &v, o)) });
        }
    }
    Ok(out)
}

/// Runs `check` and builds the report.
pub fn check(a: &CheckArgs) -> Result<ReportDocument, RunError> {
    let (path, text, doc) = load(&a.file, &a.today)?;
    if a.closure_limit == 0 {
        return Err(usage("--closure-limit must be positive"));
    }
    let opts = TaskOptions {
        reasoner: ReasonerOptions { closure_limit: a.closure_limit, trace: false },
        no_ontology: a.no_ontology,
        ..TaskOptions::default()
    };
    let mut records = Vec::new();
    for job in jobs(&doc, a)? {
        let start = Instant::now();
        let v = (job.run)(&opts)?;
        records.push(VerdictRecord::new(&v, job.subject, start.elapsed()));
    }
    let options = RunOptions {
        no_ontology: a.no_ontology,
        closure_limit: a.closure_limit,
        today: doc.today.as_ref().map(format_rational),
    };
    Ok(ReportDocument::new(&path, text.as_bytes(), options, records))
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, RunError> {
    let io = |e: std::io::Error| RunError::Usage(e.to_string());
    match cli.command {
        Command::Check(a) => {
            let r = check(&a)?;
            let text = match a.format {
                Format::Text => r.to_text(),
                Format::Json => r.to_json() + "\n",
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(if r.holds { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Parse { file, today } => {
            let (_, _, doc) = load(&file, &today)?;
            out.write_all(emit_dkb(&doc).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Encode { file, owl, today } => {
            let (_, _, doc) = load(&file, &today)?;
            let kb = encode_dkb(&doc.dkb).map_err(|e| usage(e.to_string()))?;
            let text = if owl {
                export_kb(&kb)
            } else {
                let mut s = String::new();
                for ax in &kb.tbox {
                    s += &format!("axiom {ax}\n");
                }
                for f in &kb.abox {
                    s += &format!("fact {f}\n");
                }
                s
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Fixtures { name: None } => {
            for n in fixtures::NAMES {
                writeln!(out, "{n}").map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Fixtures { name: Some(n) } => {
            let text = fixtures::source(&n).ok_or_else(|| usage(fixtures::UnknownFixture(n).to_string()))?;
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "dkbv: {e}");
            e.code()
        }
    }
}
