//! Concrete syntax: lexer, parser and annotation elaboration.
//!
//! Types:
//!
//! ```text
//! Type  := 'forall' TYVAR '.' Type | Arr
//! Arr   := Conj ('->' Type)?            -- right associative
//! Conj  := Atom ('/\' Conj)?            -- binds tighter than '->'
//! Atom  := TYVAR | '(' Type ')'
//! ```
//!
//! Terms:
//!
//! ```text
//! Term    := 'lam' VAR ':' Type '.' Term | 'tlam' TYVAR '.' Term | App
//! App     := Factor Factor*              -- left associative application
//! Factor  := Primary ('[' Type ']')*     -- postfix type application
//! Primary := VAR | '<' Term ',' Term '>' | '(' Term ')'
//!          | 'pi' '[' Type ']' Factor
//! ```
//!
//! Type variables are uppercase-initial identifiers, term variables
//! lowercase-initial; `--` starts a line comment. Variable occurrences are
//! written bare: the elaborator copies the binder's annotation onto bound
//! occurrences, while free occurrences take their type from, in order, the
//! term's `where` clause, a definition of the same name, or the ambient
//! context built from `ctx` directives. A free variable with no source of
//! annotation is a parse error.
//!
//! Source files are sequences of `ctx x : T, ...` directives and
//! `def name = term [where ...]` declarations; later `ctx` entries and
//! `def`s override earlier ones of the same name.

use crate::syntax::{Context, Term, TermVar, Type, TypeVar};
use std::collections::BTreeMap;
use std::fmt;

/// A parse or elaboration failure, with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        message: message.into(),
    })
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    TermIdent(String),
    TypeIdent(String),
    Lam,
    TLam,
    Pi,
    Forall,
    Where,
    Def,
    Ctx,
    Arrow,
    Wedge,
    Dot,
    Comma,
    Colon,
    Equals,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LAngle,
    RAngle,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::TermIdent(n) | Tok::TypeIdent(n) => return write!(f, "`{n}`"),
            Tok::Lam => "`lam`",
            Tok::TLam => "`tlam`",
            Tok::Pi => "`pi`",
            Tok::Forall => "`forall`",
            Tok::Where => "`where`",
            Tok::Def => "`def`",
            Tok::Ctx => "`ctx`",
            Tok::Arrow => "`->`",
            Tok::Wedge => "`/\\`",
            Tok::Dot => "`.`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Equals => "`=`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LAngle => "`<`",
            Tok::RAngle => "`>`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();

    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            tokens.push(Token {
                tok: $tok,
                line,
                col,
            });
            col += $len;
        }};
    }

    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '-' => {
                let (l, co) = (line, col);
                chars.next();
                match chars.peek() {
                    Some('>') => {
                        chars.next();
                        tokens.push(Token {
                            tok: Tok::Arrow,
                            line: l,
                            col: co,
                        });
                        col += 2;
                    }
                    Some('-') => {
                        // Line comment.
                        for c in chars.by_ref() {
                            if c == '\n' {
                                line += 1;
                                col = 1;
                                break;
                            }
                        }
                    }
                    _ => return err(l, co, "expected `->` or `--`"),
                }
            }
            '/' => {
                let (l, co) = (line, col);
                chars.next();
                if chars.peek() == Some(&'\\') {
                    chars.next();
                    tokens.push(Token {
                        tok: Tok::Wedge,
                        line: l,
                        col: co,
                    });
                    col += 2;
                } else {
                    return err(l, co, "expected `/\\`");
                }
            }
            '.' => {
                chars.next();
                push!(Tok::Dot, 1);
            }
            ',' => {
                chars.next();
                push!(Tok::Comma, 1);
            }
            ':' => {
                chars.next();
                push!(Tok::Colon, 1);
            }
            '=' => {
                chars.next();
                push!(Tok::Equals, 1);
            }
            '(' => {
                chars.next();
                push!(Tok::LParen, 1);
            }
            ')' => {
                chars.next();
                push!(Tok::RParen, 1);
            }
            '[' => {
                chars.next();
                push!(Tok::LBracket, 1);
            }
            ']' => {
                chars.next();
                push!(Tok::RBracket, 1);
            }
            '<' => {
                chars.next();
                push!(Tok::LAngle, 1);
            }
            '>' => {
                chars.next();
                push!(Tok::RAngle, 1);
            }
            c if c.is_ascii_alphabetic() => {
                let start_col = col;
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                        name.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let tok = match name.as_str() {
                    "lam" => Tok::Lam,
                    "tlam" => Tok::TLam,
                    "pi" => Tok::Pi,
                    "forall" => Tok::Forall,
                    "where" => Tok::Where,
                    "def" => Tok::Def,
                    "ctx" => Tok::Ctx,
                    _ if name.chars().next().unwrap().is_ascii_uppercase() => {
                        Tok::TypeIdent(name)
                    }
                    _ => Tok::TermIdent(name),
                };
                tokens.push(Token {
                    tok,
                    line,
                    col: start_col,
                });
            }
            other => return err(line, col, format!("unexpected character `{other}`")),
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// Term skeleton before annotation elaboration: variable occurrences are
/// bare names with source positions.
#[derive(Clone, Debug)]
enum Raw {
    Var(String, usize, usize),
    Lam(String, Type, Box<Raw>),
    App(Box<Raw>, Box<Raw>),
    Pair(Box<Raw>, Box<Raw>),
    Proj(Type, Box<Raw>),
    TLam(String, Box<Raw>),
    TApp(Box<Raw>, Type),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        (self.tokens[self.pos].line, self.tokens[self.pos].col)
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            let (l, c) = self.here();
            err(l, c, format!("expected {want}, found {}", self.peek()))
        }
    }

    fn expect_type_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::TypeIdent(n) => {
                self.advance();
                Ok(n)
            }
            other => {
                let (l, c) = self.here();
                err(l, c, format!("expected a type variable, found {other}"))
            }
        }
    }

    fn expect_term_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::TermIdent(n) => {
                self.advance();
                Ok(n)
            }
            other => {
                let (l, c) = self.here();
                err(l, c, format!("expected a term variable, found {other}"))
            }
        }
    }

    // -- types ------------------------------------------------------------

    fn type_expr(&mut self) -> Result<Type, ParseError> {
        if *self.peek() == Tok::Forall {
            self.advance();
            let name = self.expect_type_ident()?;
            self.expect(Tok::Dot)?;
            let body = self.type_expr()?;
            Ok(Type::Forall(TypeVar::new(name), Box::new(body)))
        } else {
            self.arrow_type()
        }
    }

    fn arrow_type(&mut self) -> Result<Type, ParseError> {
        let left = self.conj_type()?;
        if *self.peek() == Tok::Arrow {
            self.advance();
            let right = self.type_expr()?;
            Ok(Type::Arrow(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn conj_type(&mut self) -> Result<Type, ParseError> {
        let left = self.atom_type()?;
        if *self.peek() == Tok::Wedge {
            self.advance();
            let right = self.conj_type()?;
            Ok(Type::Conj(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn atom_type(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::TypeIdent(n) => {
                self.advance();
                Ok(Type::Var(TypeVar::new(n)))
            }
            Tok::LParen => {
                self.advance();
                let ty = self.type_expr()?;
                self.expect(Tok::RParen)?;
                Ok(ty)
            }
            other => {
                let (l, c) = self.here();
                err(l, c, format!("expected a type, found {other}"))
            }
        }
    }

    // -- terms ------------------------------------------------------------

    fn term_expr(&mut self) -> Result<Raw, ParseError> {
        match self.peek() {
            Tok::Lam => {
                self.advance();
                let name = self.expect_term_ident()?;
                self.expect(Tok::Colon)?;
                let ann = self.type_expr()?;
                self.expect(Tok::Dot)?;
                let body = self.term_expr()?;
                Ok(Raw::Lam(name, ann, Box::new(body)))
            }
            Tok::TLam => {
                self.advance();
                let name = self.expect_type_ident()?;
                self.expect(Tok::Dot)?;
                let body = self.term_expr()?;
                Ok(Raw::TLam(name, Box::new(body)))
            }
            _ => self.app_term(),
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Tok::TermIdent(_) | Tok::LParen | Tok::LAngle | Tok::Pi
        )
    }

    fn app_term(&mut self) -> Result<Raw, ParseError> {
        let mut acc = self.factor()?;
        while self.starts_factor() {
            let arg = self.factor()?;
            acc = Raw::App(Box::new(acc), Box::new(arg));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Raw, ParseError> {
        let mut acc = self.primary()?;
        while *self.peek() == Tok::LBracket {
            self.advance();
            let ty = self.type_expr()?;
            self.expect(Tok::RBracket)?;
            acc = Raw::TApp(Box::new(acc), ty);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<Raw, ParseError> {
        match self.peek().clone() {
            Tok::TermIdent(n) => {
                let (l, c) = self.here();
                self.advance();
                Ok(Raw::Var(n, l, c))
            }
            Tok::LParen => {
                self.advance();
                let t = self.term_expr()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LAngle => {
                self.advance();
                let left = self.term_expr()?;
                self.expect(Tok::Comma)?;
                let right = self.term_expr()?;
                self.expect(Tok::RAngle)?;
                Ok(Raw::Pair(Box::new(left), Box::new(right)))
            }
            Tok::Pi => {
                self.advance();
                self.expect(Tok::LBracket)?;
                let ty = self.type_expr()?;
                self.expect(Tok::RBracket)?;
                let body = self.factor()?;
                Ok(Raw::Proj(ty, Box::new(body)))
            }
            other => {
                let (l, c) = self.here();
                err(l, c, format!("expected a term, found {other}"))
            }
        }
    }

    /// `x : T, y : U, ...` — used by `where` clauses and `ctx` directives.
    fn ctx_entries(&mut self) -> Result<Vec<(String, Type, usize, usize)>, ParseError> {
        let mut entries = Vec::new();
        loop {
            let (l, c) = self.here();
            let name = self.expect_term_ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.type_expr()?;
            entries.push((name, ty, l, c));
            if *self.peek() == Tok::Comma {
                self.advance();
            } else {
                break;
            }
        }
        Ok(entries)
    }

    fn term_input(&mut self) -> Result<(Raw, Context), ParseError> {
        let raw = self.term_expr()?;
        let mut local = Context::new();
        if *self.peek() == Tok::Where {
            self.advance();
            for (name, ty, l, c) in self.ctx_entries()? {
                if local.insert(TermVar::new(name.clone()), ty).is_some() {
                    return err(l, c, format!("duplicate annotation for `{name}` in where clause"));
                }
            }
        }
        Ok((raw, local))
    }
}

// ---------------------------------------------------------------------------
// Elaboration
// ---------------------------------------------------------------------------

/// Records the annotation of every free variable occurrence of an
/// already-elaborated term.
fn register_free(term: &Term, bound: &mut Vec<TermVar>, used: &mut Context) {
    match term {
        Term::Var(v, ty) => {
            if !bound.contains(v) {
                used.insert(v.clone(), ty.clone());
            }
        }
        Term::Lam(x, _, body) => {
            bound.push(x.clone());
            register_free(body, bound, used);
            bound.pop();
        }
        Term::App(f, a) => {
            register_free(f, bound, used);
            register_free(a, bound, used);
        }
        Term::Pair(l, r) => {
            register_free(l, bound, used);
            register_free(r, bound, used);
        }
        Term::Proj(_, body) | Term::TLam(_, body) | Term::TApp(body, _) => {
            register_free(body, bound, used);
        }
    }
}

fn elaborate(
    raw: &Raw,
    bound: &mut Vec<(String, Type)>,
    local: &Context,
    defs: &BTreeMap<String, Term>,
    ambient: &Context,
    used: &mut Context,
) -> Result<Term, ParseError> {
    match raw {
        Raw::Var(name, l, c) => {
            if let Some((_, ty)) = bound.iter().rev().find(|(n, _)| n == name) {
                return Ok(Term::Var(TermVar::new(name.clone()), ty.clone()));
            }
            let var = TermVar::new(name.clone());
            if let Some(ty) = local.get(&var) {
                used.insert(var.clone(), ty.clone());
                return Ok(Term::Var(var, ty.clone()));
            }
            if let Some(body) = defs.get(name) {
                // The spliced body's free variables become free here;
                // record their annotations so the caller's context
                // still covers the whole term.
                register_free(body, &mut Vec::new(), used);
                return Ok(body.clone());
            }
            if let Some(ty) = ambient.get(&var) {
                used.insert(var.clone(), ty.clone());
                return Ok(Term::Var(var, ty.clone()));
            }
            err(
                *l,
                *c,
                format!("free variable `{name}` has no annotation (add a `where` clause or `ctx` entry)"),
            )
        }
        Raw::Lam(name, ann, body) => {
            bound.push((name.clone(), ann.clone()));
            let body = elaborate(body, bound, local, defs, ambient, used);
            bound.pop();
            Ok(Term::Lam(TermVar::new(name.clone()), ann.clone(), Box::new(body?)))
        }
        Raw::App(f, a) => Ok(Term::App(
            Box::new(elaborate(f, bound, local, defs, ambient, used)?),
            Box::new(elaborate(a, bound, local, defs, ambient, used)?),
        )),
        Raw::Pair(l, r) => Ok(Term::Pair(
            Box::new(elaborate(l, bound, local, defs, ambient, used)?),
            Box::new(elaborate(r, bound, local, defs, ambient, used)?),
        )),
        Raw::Proj(ty, body) => Ok(Term::Proj(
            ty.clone(),
            Box::new(elaborate(body, bound, local, defs, ambient, used)?),
        )),
        Raw::TLam(name, body) => Ok(Term::TLam(
            TypeVar::new(name.clone()),
            Box::new(elaborate(body, bound, local, defs, ambient, used)?),
        )),
        Raw::TApp(f, ty) => Ok(Term::TApp(
            Box::new(elaborate(f, bound, local, defs, ambient, used)?),
            ty.clone(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// Parses a standalone type.
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src)?;
    let ty = p.type_expr()?;
    p.expect(Tok::Eof)?;
    Ok(ty)
}

/// Parses a term with an optional `where` clause. Returns the elaborated
/// term together with the context covering its free variables.
pub fn parse_term(src: &str) -> Result<(Term, Context), ParseError> {
    parse_term_with(src, &Context::new(), &BTreeMap::new())
}

/// Parses a term against an ambient context and definition set. The
/// returned context holds the annotations of the free variables that were
/// resolved (both `where`-clause and ambient ones).
pub fn parse_term_with(
    src: &str,
    ambient: &Context,
    defs: &BTreeMap<String, Term>,
) -> Result<(Term, Context), ParseError> {
    let mut p = Parser::new(src)?;
    let (raw, local) = p.term_input()?;
    p.expect(Tok::Eof)?;
    let mut used = local.clone();
    let term = elaborate(&raw, &mut Vec::new(), &local, defs, ambient, &mut used)?;
    Ok((term, used))
}

/// A named declaration from a source file: `def name = term [where ...]`.
#[derive(Clone, Debug)]
pub struct Decl {
    pub name: String,
    /// Context for the declaration's free variables (ambient entries the
    /// term uses, plus its `where` clause).
    pub ctx: Context,
    pub term: Term,
}

/// A parsed source file: the final ambient context and the declarations in
/// order.
#[derive(Clone, Debug, Default)]
pub struct SourceFile {
    pub ctx: Context,
    pub decls: Vec<Decl>,
}

/// Parses a source file of `ctx` directives and `def` declarations. Each
/// definition may refer to earlier ones by name; the earlier term is
/// spliced in.
pub fn parse_file(src: &str) -> Result<SourceFile, ParseError> {
    let mut p = Parser::new(src)?;
    let mut ambient = Context::new();
    let mut defs: BTreeMap<String, Term> = BTreeMap::new();
    let mut decls = Vec::new();
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ctx => {
                p.advance();
                for (name, ty, _, _) in p.ctx_entries()? {
                    ambient.insert(TermVar::new(name), ty);
                }
            }
            Tok::Def => {
                p.advance();
                let name = p.expect_term_ident()?;
                p.expect(Tok::Equals)?;
                let (raw, local) = p.term_input()?;
                let mut used = local.clone();
                let term = elaborate(&raw, &mut Vec::new(), &local, &defs, &ambient, &mut used)?;
                defs.insert(name.clone(), term.clone());
                decls.push(Decl {
                    name,
                    ctx: used,
                    term,
                });
            }
            other => {
                let (l, c) = p.here();
                return err(l, c, format!("expected `ctx`, `def` or end of file, found {other}"));
            }
        }
    }
    Ok(SourceFile {
        ctx: ambient,
        decls,
    })
}
