//! Command-line front end: type checking, normalization, isomorphism
//! queries, prime-factor decomposition, class enumeration, trace
//! export, and an interactive session.
//!
//! Exit codes: 0 success, 1 type error, 2 parse or input error,
//! 3 budget exhausted before the answer was certain, 4 internal
//! invariant violation.

use clap::{Parser as ClapParser, Subcommand, ValueEnum};
use psi::iso::{prime_factors, types_isomorphic};
use psi::oracle::{iso_oracle, ORACLE_BUDGET_DEFAULT};
use psi::parse::{parse_file, parse_term, parse_term_with, parse_type, ParseError, SourceFile};
use psi::rewrite::{equiv_class, normalize, Strategy, CLASS_BUDGET_DEFAULT};
use psi::trace::TraceDocument;
use psi::typing::{synthesize, TypeError};
use psi::{Context, Term};
use std::collections::BTreeMap;
use std::io::{self, BufRead, Read, Write};
use std::panic::AssertUnwindSafe;
use std::path::Path;

const EXIT_OK: i32 = 0;
const EXIT_TYPE_ERROR: i32 = 1;
const EXIT_PARSE_ERROR: i32 = 2;
const EXIT_BUDGET: i32 = 3;
const EXIT_INTERNAL: i32 = 4;

/// Environment variable overriding the default search budget.
const BUDGET_ENV: &str = "PSI_DEFAULT_BUDGET";

#[derive(ClapParser)]
#[command(
    name = "psi",
    version,
    about = "Typechecker and normalizer for a polymorphic calculus whose types are identified up to isomorphism"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TraceFormat {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Infer the type of a term, or of every definition in a file
    Check {
        /// Term, file path, or `-` for stdin
        input: String,
    },
    /// Reduce a term to normal form
    Eval {
        /// Term, file path, or `-` for stdin
        input: String,
        /// Deterministic strategy: always contract the least redex (default)
        #[arg(long, conflicts_with = "all")]
        det: bool,
        /// Explore the whole reduction graph and print every normal form
        #[arg(long)]
        all: bool,
        /// Search budget (default from PSI_DEFAULT_BUDGET or 10000)
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Decide whether two types are isomorphic
    Iso {
        left: String,
        right: String,
    },
    /// Print the prime factors of a type, one per line
    Pf {
        r#type: String,
    },
    /// Enumerate the structural-equivalence class of a term
    Class {
        /// Term, file path, or `-` for stdin
        input: String,
        /// Search budget (default from PSI_DEFAULT_BUDGET or 10000)
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Export a normalization trace
    Trace {
        /// Term, file path, or `-` for stdin
        input: String,
        #[arg(long, value_enum, default_value_t = TraceFormat::Json)]
        format: TraceFormat,
        /// Deterministic strategy (default)
        #[arg(long, conflicts_with = "all")]
        det: bool,
        /// Explore the whole reduction graph
        #[arg(long)]
        all: bool,
        /// Search budget (default from PSI_DEFAULT_BUDGET or 10000)
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Search for an isomorphism by exhaustive axiom rewriting
    Oracle {
        left: String,
        right: String,
        /// Maximum number of types to visit (default 50000)
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Interactive session (:h for commands)
    Repl,
}

enum Failure {
    Parse(ParseError),
    Type(TypeError),
    Io(io::Error),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Parse(_) | Failure::Io(_) => EXIT_PARSE_ERROR,
            Failure::Type(_) => EXIT_TYPE_ERROR,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Parse(e) => write!(f, "{e}"),
            Failure::Type(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Parse(e)
    }
}

impl From<TypeError> for Failure {
    fn from(e: TypeError) -> Self {
        Failure::Type(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(AssertUnwindSafe(|| run(cli)));
    let code = match outcome {
        Ok(Ok(code)) => code,
        Ok(Err(failure)) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal invariant violation");
            EXIT_INTERNAL
        }
    };
    std::process::exit(code);
}

fn effective_budget(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(CLASS_BUDGET_DEFAULT)
}

fn strategy_of(all: bool) -> Strategy {
    if all {
        Strategy::Exhaustive
    } else {
        Strategy::Deterministic
    }
}

enum Loaded {
    Term { term: Term, ctx: Context },
    File(SourceFile),
}

/// `ctx` and `def` are keywords, so a line opening with either marks
/// source-file input; anything else is an inline term.
fn looks_like_source_file(text: &str) -> bool {
    text.lines().any(|line| {
        let t = line.trim_start();
        for kw in ["ctx", "def"] {
            if t == kw {
                return true;
            }
            if let Some(rest) = t.strip_prefix(kw) {
                if rest.starts_with(|c: char| c.is_whitespace()) {
                    return true;
                }
            }
        }
        false
    })
}

fn load(input: &str) -> Result<Loaded, Failure> {
    let text = if input == "-" {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf)?;
        buf
    } else if Path::new(input).is_file() {
        std::fs::read_to_string(input)?
    } else {
        input.to_string()
    };
    if looks_like_source_file(&text) {
        let file = parse_file(&text)?;
        if file.decls.is_empty() {
            return Err(Failure::Parse(ParseError {
                line: 0,
                col: 0,
                message: "source file declares a context but no definitions".to_string(),
            }));
        }
        Ok(Loaded::File(file))
    } else {
        let (term, ctx) = parse_term(&text)?;
        Ok(Loaded::Term { term, ctx })
    }
}

/// The subject of a term-level command: an inline term as-is, or the
/// last definition of a file.
fn load_subject(input: &str) -> Result<(Term, Context), Failure> {
    match load(input)? {
        Loaded::Term { term, ctx } => Ok((term, ctx)),
        Loaded::File(file) => {
            let decl = file.decls.last().expect("load rejects empty files");
            Ok((decl.term.clone(), decl.ctx.clone()))
        }
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.cmd {
        Cmd::Check { input } => match load(&input)? {
            Loaded::Term { term, ctx } => {
                let ty = synthesize(&ctx, &term)?;
                println!("{ty}");
                Ok(EXIT_OK)
            }
            Loaded::File(file) => {
                for decl in &file.decls {
                    let ty = synthesize(&decl.ctx, &decl.term)?;
                    println!("{} : {}", decl.name, ty);
                }
                Ok(EXIT_OK)
            }
        },
        Cmd::Eval {
            input,
            det: _,
            all,
            budget,
        } => {
            let (term, _) = load_subject(&input)?;
            let budget = effective_budget(budget);
            let traces = normalize(&term, strategy_of(all), budget);
            let incomplete = traces.iter().any(|t| !t.exhaustive);
            for trace in &traces {
                println!("{}", trace.result);
            }
            if incomplete {
                eprintln!("warning: search budget exhausted; results may be incomplete");
                Ok(EXIT_BUDGET)
            } else {
                Ok(EXIT_OK)
            }
        }
        Cmd::Iso { left, right } => {
            let a = parse_type(&left)?;
            let b = parse_type(&right)?;
            if types_isomorphic(&a, &b) {
                println!("isomorphic");
            } else {
                println!("not isomorphic");
            }
            Ok(EXIT_OK)
        }
        Cmd::Pf { r#type } => {
            let ty = parse_type(&r#type)?;
            for factor in prime_factors(&ty) {
                println!("{}", factor.denote());
            }
            Ok(EXIT_OK)
        }
        Cmd::Class { input, budget } => {
            let (term, _) = load_subject(&input)?;
            let budget = effective_budget(budget);
            let class = equiv_class(&term, budget);
            for member in class.members() {
                println!("{member}");
            }
            if class.is_closed() {
                Ok(EXIT_OK)
            } else {
                eprintln!("warning: class budget exhausted; class may be larger");
                Ok(EXIT_BUDGET)
            }
        }
        Cmd::Trace {
            input,
            format,
            det: _,
            all,
            budget,
        } => {
            let (term, _) = load_subject(&input)?;
            let budget = effective_budget(budget);
            let strategy = strategy_of(all);
            let traces = normalize(&term, strategy, budget);
            let incomplete = traces.iter().any(|t| !t.exhaustive);
            let doc = TraceDocument::new(&term, strategy, budget, &traces);
            match format {
                TraceFormat::Json => println!("{}", doc.to_json()),
                TraceFormat::Dot => print!("{}", doc.to_dot()),
            }
            if incomplete {
                eprintln!("warning: search budget exhausted; trace may be incomplete");
                Ok(EXIT_BUDGET)
            } else {
                Ok(EXIT_OK)
            }
        }
        Cmd::Oracle {
            left,
            right,
            budget,
        } => {
            let a = parse_type(&left)?;
            let b = parse_type(&right)?;
            let budget = budget.unwrap_or(ORACLE_BUDGET_DEFAULT);
            let verdict = iso_oracle(&a, &b, budget);
            if verdict.related {
                println!("isomorphic ({} types visited)", verdict.visited);
                Ok(EXIT_OK)
            } else if verdict.closed {
                println!(
                    "not isomorphic: rewrite closure exhausted ({} types visited)",
                    verdict.visited
                );
                Ok(EXIT_OK)
            } else {
                println!("unknown: budget exhausted ({} types visited)", verdict.visited);
                Ok(EXIT_BUDGET)
            }
        }
        Cmd::Repl => repl(),
    }
}

const REPL_HELP: &str = "\
commands:
  :t TERM       infer the term's type
  :eval TERM    reduce to normal form (deterministic strategy)
  :class TERM   list the term's structural-equivalence class
  :pf TYPE      print the type's prime factors
  :ctx          show the ambient context and definitions
  ctx x : T     extend the ambient context
  def n = TERM  add a definition usable in later inputs
  :h            this help
  :q            quit
a bare TERM infers its type, like :t";

fn repl() -> Result<i32, Failure> {
    let budget = effective_budget(None);
    let stdin = io::stdin();
    let mut preamble = String::new();
    loop {
        print!("psi> ");
        io::stdout().flush()?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            println!();
            break;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == ":q" || line == ":quit" {
            break;
        }
        if line == ":h" || line == ":help" {
            println!("{REPL_HELP}");
            continue;
        }
        if let Err(message) = repl_line(line, &mut preamble, budget) {
            eprintln!("error: {message}");
        }
    }
    Ok(EXIT_OK)
}

fn repl_state(preamble: &str) -> Result<(Context, BTreeMap<String, Term>), ParseError> {
    let file = parse_file(preamble)?;
    let defs = file
        .decls
        .iter()
        .map(|d| (d.name.clone(), d.term.clone()))
        .collect();
    Ok((file.ctx, defs))
}

fn repl_line(line: &str, preamble: &mut String, budget: usize) -> Result<(), String> {
    let keyword = line.split_whitespace().next().unwrap_or("");
    if keyword == "ctx" || keyword == "def" {
        let mut candidate = preamble.clone();
        candidate.push_str(line);
        candidate.push('\n');
        repl_state(&candidate).map_err(|e| e.to_string())?;
        *preamble = candidate;
        return Ok(());
    }
    let (ambient, defs) = repl_state(preamble).map_err(|e| e.to_string())?;
    if line == ":ctx" {
        for (v, ty) in ambient.iter() {
            println!("{v} : {ty}");
        }
        for name in defs.keys() {
            println!("def {name}");
        }
        return Ok(());
    }
    let (command, rest) = match line.strip_prefix(':') {
        Some(rest) => {
            let mut parts = rest.splitn(2, char::is_whitespace);
            let cmd = parts.next().unwrap_or("");
            (cmd, parts.next().unwrap_or("").trim())
        }
        None => ("t", line),
    };
    match command {
        "t" => {
            let (term, ctx) = parse_term_with(rest, &ambient, &defs).map_err(|e| e.to_string())?;
            let ty = synthesize(&ctx, &term).map_err(|e| e.to_string())?;
            println!("{ty}");
        }
        "eval" => {
            let (term, _) = parse_term_with(rest, &ambient, &defs).map_err(|e| e.to_string())?;
            let traces = normalize(&term, Strategy::Deterministic, budget);
            for trace in &traces {
                println!("{}", trace.result);
                if !trace.exhaustive {
                    eprintln!("warning: search budget exhausted; result may not be normal");
                }
            }
        }
        "class" => {
            let (term, _) = parse_term_with(rest, &ambient, &defs).map_err(|e| e.to_string())?;
            let class = equiv_class(&term, budget);
            for member in class.members() {
                println!("{member}");
            }
            if !class.is_closed() {
                eprintln!("warning: class budget exhausted; class may be larger");
            }
        }
        "pf" => {
            let ty = parse_type(rest).map_err(|e| e.to_string())?;
            for factor in prime_factors(&ty) {
                println!("{}", factor.denote());
            }
        }
        other => return Err(format!("unknown command :{other} (try :h)")),
    }
    Ok(())
}
