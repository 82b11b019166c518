//! Pretty-printing of types and terms.
//!
//! The renderer emits minimal parentheses with respect to the grammar in
//! [`crate::parse`] and is stable: identical trees produce identical text.
//! Binders whose names are internally generated (reserved `_` prefix, which
//! the parser cannot produce) are renamed on the way out to deterministic
//! surface names, so printed syntax always re-parses to an alpha-equivalent
//! tree.

use crate::syntax::{is_reserved_name, Term, TermVar, Type, TypeVar};
use std::collections::HashSet;
use std::fmt;

// Precedence levels, higher binds tighter.
// Types: forall = 0, arrow = 1, conj = 2, atom = 3.
// Terms: binder = 0, application = 1, projection = 2, type application = 3,
//        atom = 4.

fn type_prec(ty: &Type) -> u8 {
    match ty {
        Type::Forall(_, _) => 0,
        Type::Arrow(_, _) => 1,
        Type::Conj(_, _) => 2,
        Type::Var(_) => 3,
    }
}

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Lam(_, _, _) | Term::TLam(_, _) => 0,
        Term::App(_, _) => 1,
        Term::Proj(_, _) => 2,
        Term::TApp(_, _) => 3,
        Term::Var(_, _) | Term::Pair(_, _) => 4,
    }
}

/// Scope-aware renaming state for one printing pass. Counters never reset
/// within a pass, so a generated surface name is never reused for two
/// different binders in the same output.
struct Renamer {
    type_scope: Vec<(TypeVar, String)>,
    term_scope: Vec<(TermVar, String)>,
    next_type: u32,
    next_term: u32,
}

impl Renamer {
    fn new() -> Self {
        Renamer {
            type_scope: Vec::new(),
            term_scope: Vec::new(),
            next_type: 1,
            next_term: 1,
        }
    }

    fn display_type_var(&self, v: &TypeVar) -> String {
        for (orig, shown) in self.type_scope.iter().rev() {
            if orig == v {
                return shown.clone();
            }
        }
        v.0.clone()
    }

    fn display_term_var(&self, v: &TermVar) -> String {
        for (orig, shown) in self.term_scope.iter().rev() {
            if orig == v {
                return shown.clone();
            }
        }
        v.0.clone()
    }

    /// Picks the surface name for a type binder: the original name when it
    /// is printable, otherwise the first `X{n}` that cannot collide with a
    /// free occurrence displayed inside the binder's scope.
    fn push_type_binder(&mut self, v: &TypeVar, body_free: impl Fn() -> HashSet<TypeVar>) -> String {
        let shown = if is_reserved_name(&v.0) {
            let forbidden: HashSet<String> = body_free()
                .iter()
                .filter(|f| *f != v)
                .map(|f| self.display_type_var(f))
                .collect();
            loop {
                let cand = format!("X{}", self.next_type);
                self.next_type += 1;
                if !forbidden.contains(&cand) {
                    break cand;
                }
            }
        } else {
            v.0.clone()
        };
        self.type_scope.push((v.clone(), shown.clone()));
        shown
    }

    fn pop_type_binder(&mut self) {
        self.type_scope.pop();
    }

    fn push_term_binder(&mut self, v: &TermVar, body_free: impl Fn() -> HashSet<TermVar>) -> String {
        let shown = if is_reserved_name(&v.0) {
            let forbidden: HashSet<String> = body_free()
                .iter()
                .filter(|f| *f != v)
                .map(|f| self.display_term_var(f))
                .collect();
            loop {
                let cand = format!("x{}", self.next_term);
                self.next_term += 1;
                if !forbidden.contains(&cand) {
                    break cand;
                }
            }
        } else {
            v.0.clone()
        };
        self.term_scope.push((v.clone(), shown.clone()));
        shown
    }

    fn pop_term_binder(&mut self) {
        self.term_scope.pop();
    }
}

fn fmt_type(ty: &Type, min_prec: u8, r: &mut Renamer, out: &mut String) {
    let wrap = type_prec(ty) < min_prec;
    if wrap {
        out.push('(');
    }
    match ty {
        Type::Var(v) => out.push_str(&r.display_type_var(v)),
        Type::Arrow(a, b) => {
            fmt_type(a, 2, r, out);
            out.push_str(" -> ");
            fmt_type(b, 0, r, out);
        }
        Type::Conj(a, b) => {
            fmt_type(a, 3, r, out);
            out.push_str(" /\\ ");
            fmt_type(b, 2, r, out);
        }
        Type::Forall(x, body) => {
            let shown = r.push_type_binder(x, || body.free_vars());
            out.push_str("forall ");
            out.push_str(&shown);
            out.push_str(". ");
            fmt_type(body, 0, r, out);
            r.pop_type_binder();
        }
    }
    if wrap {
        out.push(')');
    }
}

fn fmt_term(t: &Term, min_prec: u8, r: &mut Renamer, out: &mut String) {
    let wrap = term_prec(t) < min_prec;
    if wrap {
        out.push('(');
    }
    match t {
        Term::Var(v, _) => out.push_str(&r.display_term_var(v)),
        Term::Lam(x, ann, body) => {
            // The annotation is printed outside the binder's term scope but
            // inside the current type scope.
            let mut ann_text = String::new();
            fmt_type(ann, 0, r, &mut ann_text);
            let shown = r.push_term_binder(x, || body.free_term_vars());
            out.push_str("lam ");
            out.push_str(&shown);
            out.push_str(" : ");
            out.push_str(&ann_text);
            out.push_str(". ");
            fmt_term(body, 0, r, out);
            r.pop_term_binder();
        }
        Term::App(f, a) => {
            fmt_term(f, 1, r, out);
            out.push(' ');
            fmt_term(a, 2, r, out);
        }
        Term::Pair(l, rgt) => {
            out.push('<');
            fmt_term(l, 0, r, out);
            out.push_str(", ");
            fmt_term(rgt, 0, r, out);
            out.push('>');
        }
        Term::Proj(ty, body) => {
            out.push_str("pi [");
            fmt_type(ty, 0, r, out);
            out.push_str("] ");
            fmt_term(body, 2, r, out);
        }
        Term::TLam(x, body) => {
            let shown = r.push_type_binder(x, || body.free_type_vars());
            out.push_str("tlam ");
            out.push_str(&shown);
            out.push_str(". ");
            fmt_term(body, 0, r, out);
            r.pop_type_binder();
        }
        Term::TApp(f, ty) => {
            fmt_term(f, 3, r, out);
            out.push_str(" [");
            fmt_type(ty, 0, r, out);
            out.push(']');
        }
    }
    if wrap {
        out.push(')');
    }
}

/// Renders a type with minimal parentheses.
pub fn format_type(ty: &Type) -> String {
    let mut out = String::new();
    fmt_type(ty, 0, &mut Renamer::new(), &mut out);
    out
}

/// Renders a term with minimal parentheses. Variable occurrences print
/// bare (annotations live on binders and in contexts), so re-parsing a
/// printed term needs the same context its free variables came from.
pub fn format_term(t: &Term) -> String {
    let mut out = String::new();
    fmt_term(t, 0, &mut Renamer::new(), &mut out);
    out
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_type(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_term(self))
    }
}
