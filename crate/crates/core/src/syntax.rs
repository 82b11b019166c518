//! Abstract syntax for types and terms.
//!
//! Types are built from variables, arrows, conjunctions (products) and
//! universal quantification. Terms follow Church style: every variable
//! occurrence carries a type annotation, as do lambda binders and
//! projections, so type information is never reconstructed from scratch.
//!
//! The module owns the binding machinery the rest of the crate relies on:
//! free-variable computation, capture-avoiding substitution (types into
//! types, terms into terms, types into terms) and alpha-canonicalization.
//! Canonical trees rename every binder to a reserved, position-derived name
//! so that alpha-equivalent syntax becomes structurally equal; the reserved
//! names start with `_`, which the concrete syntax never produces.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

/// A type variable. Concrete syntax restricts these to uppercase-initial
/// identifiers; names starting with `_` are reserved for internally
/// generated variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TypeVar(pub String);

/// A term variable. Concrete syntax restricts these to lowercase-initial
/// identifiers; names starting with `_` are reserved.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TermVar(pub String);

impl TypeVar {
    pub fn new(name: impl Into<String>) -> Self {
        TypeVar(name.into())
    }
    pub fn name(&self) -> &str {
        &self.0
    }
}

impl TermVar {
    pub fn new(name: impl Into<String>) -> Self {
        TermVar(name.into())
    }
    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TypeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for TermVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Types: variables, arrows, conjunctions and universal quantifiers.
///
/// The derived `Ord` is the structural order used wherever a deterministic
/// choice among types is needed; it is only ever applied to
/// alpha-canonical trees, where it is stable across alpha-variants.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Type {
    Var(TypeVar),
    Arrow(Box<Type>, Box<Type>),
    Conj(Box<Type>, Box<Type>),
    Forall(TypeVar, Box<Type>),
}

/// Church-style terms. `Var` carries the type of the occurrence; `Proj`
/// carries the type being projected out of a conjunction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(TermVar, Type),
    Lam(TermVar, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Proj(Type, Box<Term>),
    TLam(TypeVar, Box<Term>),
    TApp(Box<Term>, Type),
}

/// A typing context: a finite map from term variables to types, at most one
/// binding per name. Iteration order is the variable order, which keeps
/// everything that prints or folds a context deterministic.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Context {
    bindings: BTreeMap<TermVar, Type>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    /// Inserts a binding, returning the previous type for the name if any.
    pub fn insert(&mut self, var: TermVar, ty: Type) -> Option<Type> {
        self.bindings.insert(var, ty)
    }

    pub fn get(&self, var: &TermVar) -> Option<&Type> {
        self.bindings.get(var)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TermVar, &Type)> {
        self.bindings.iter()
    }

    /// Union of two contexts; `other` entries win on a shared name.
    pub fn merged(&self, other: &Context) -> Context {
        let mut out = self.clone();
        for (v, t) in other.iter() {
            out.insert(v.clone(), t.clone());
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Construction helpers
// ---------------------------------------------------------------------------

pub fn tvar(name: &str) -> Type {
    Type::Var(TypeVar::new(name))
}

pub fn arrow(dom: Type, cod: Type) -> Type {
    Type::Arrow(Box::new(dom), Box::new(cod))
}

pub fn conj(left: Type, right: Type) -> Type {
    Type::Conj(Box::new(left), Box::new(right))
}

pub fn forall(var: &str, body: Type) -> Type {
    Type::Forall(TypeVar::new(var), Box::new(body))
}

pub fn var(name: &str, ty: Type) -> Term {
    Term::Var(TermVar::new(name), ty)
}

pub fn lam(name: &str, ann: Type, body: Term) -> Term {
    Term::Lam(TermVar::new(name), ann, Box::new(body))
}

pub fn app(fun: Term, arg: Term) -> Term {
    Term::App(Box::new(fun), Box::new(arg))
}

pub fn pair(left: Term, right: Term) -> Term {
    Term::Pair(Box::new(left), Box::new(right))
}

pub fn proj(ty: Type, body: Term) -> Term {
    Term::Proj(ty, Box::new(body))
}

pub fn tlam(var: &str, body: Term) -> Term {
    Term::TLam(TypeVar::new(var), Box::new(body))
}

pub fn tapp(fun: Term, ty: Type) -> Term {
    Term::TApp(Box::new(fun), ty)
}

// ---------------------------------------------------------------------------
// Fresh names
// ---------------------------------------------------------------------------

static FRESH_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Returns a globally fresh type variable. The `_F` prefix cannot be
/// produced by the parser, so fresh names never collide with user input.
pub fn fresh_type_var() -> TypeVar {
    TypeVar(format!("_F{}", FRESH_COUNTER.fetch_add(1, Ordering::Relaxed)))
}

/// Returns a globally fresh term variable (reserved `_f` prefix).
pub fn fresh_term_var() -> TermVar {
    TermVar(format!("_f{}", FRESH_COUNTER.fetch_add(1, Ordering::Relaxed)))
}

/// True for internally generated names, which the printer renames before
/// emitting concrete syntax.
pub fn is_reserved_name(name: &str) -> bool {
    name.starts_with('_')
}

// ---------------------------------------------------------------------------
// Free variables
// ---------------------------------------------------------------------------

impl Type {
    /// The set of free type variables.
    pub fn free_vars(&self) -> HashSet<TypeVar> {
        let mut acc = HashSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut acc);
        acc
    }

    fn collect_free_vars(&self, bound: &mut Vec<TypeVar>, acc: &mut HashSet<TypeVar>) {
        match self {
            Type::Var(v) => {
                if !bound.contains(v) {
                    acc.insert(v.clone());
                }
            }
            Type::Arrow(a, b) | Type::Conj(a, b) => {
                a.collect_free_vars(bound, acc);
                b.collect_free_vars(bound, acc);
            }
            Type::Forall(x, body) => {
                bound.push(x.clone());
                body.collect_free_vars(bound, acc);
                bound.pop();
            }
        }
    }

    pub fn contains_free(&self, var: &TypeVar) -> bool {
        match self {
            Type::Var(v) => v == var,
            Type::Arrow(a, b) | Type::Conj(a, b) => {
                a.contains_free(var) || b.contains_free(var)
            }
            Type::Forall(x, body) => x != var && body.contains_free(var),
        }
    }
}

impl Term {
    /// Free term variables (binders inside the term removed).
    pub fn free_term_vars(&self) -> HashSet<TermVar> {
        let mut acc = HashSet::new();
        self.collect_free_term_vars(&mut Vec::new(), &mut acc);
        acc
    }

    fn collect_free_term_vars(&self, bound: &mut Vec<TermVar>, acc: &mut HashSet<TermVar>) {
        match self {
            Term::Var(v, _) => {
                if !bound.contains(v) {
                    acc.insert(v.clone());
                }
            }
            Term::Lam(x, _, body) => {
                bound.push(x.clone());
                body.collect_free_term_vars(bound, acc);
                bound.pop();
            }
            Term::App(f, a) => {
                f.collect_free_term_vars(bound, acc);
                a.collect_free_term_vars(bound, acc);
            }
            Term::Pair(l, r) => {
                l.collect_free_term_vars(bound, acc);
                r.collect_free_term_vars(bound, acc);
            }
            Term::Proj(_, body) => body.collect_free_term_vars(bound, acc),
            Term::TLam(_, body) => body.collect_free_term_vars(bound, acc),
            Term::TApp(f, _) => f.collect_free_term_vars(bound, acc),
        }
    }

    /// Free type variables of a term: the union over all annotations and
    /// type arguments, with `tlam` binders (and `forall` binders inside
    /// annotations) removed from their scope.
    pub fn free_type_vars(&self) -> HashSet<TypeVar> {
        let mut acc = HashSet::new();
        self.collect_free_type_vars(&mut Vec::new(), &mut acc);
        acc
    }

    fn collect_free_type_vars(&self, bound: &mut Vec<TypeVar>, acc: &mut HashSet<TypeVar>) {
        match self {
            Term::Var(_, ty) => ty.collect_free_vars(bound, acc),
            Term::Lam(_, ann, body) => {
                ann.collect_free_vars(bound, acc);
                body.collect_free_type_vars(bound, acc);
            }
            Term::App(f, a) => {
                f.collect_free_type_vars(bound, acc);
                a.collect_free_type_vars(bound, acc);
            }
            Term::Pair(l, r) => {
                l.collect_free_type_vars(bound, acc);
                r.collect_free_type_vars(bound, acc);
            }
            Term::Proj(ty, body) => {
                ty.collect_free_vars(bound, acc);
                body.collect_free_type_vars(bound, acc);
            }
            Term::TLam(x, body) => {
                bound.push(x.clone());
                body.collect_free_type_vars(bound, acc);
                bound.pop();
            }
            Term::TApp(f, ty) => {
                f.collect_free_type_vars(bound, acc);
                ty.collect_free_vars(bound, acc);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

impl Type {
    /// Capture-avoiding substitution of `replacement` for the free variable
    /// `var`. Binders that would capture a free variable of `replacement`
    /// are renamed to fresh names first.
    pub fn subst(&self, var: &TypeVar, replacement: &Type) -> Type {
        match self {
            Type::Var(v) => {
                if v == var {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            Type::Arrow(a, b) => arrow(a.subst(var, replacement), b.subst(var, replacement)),
            Type::Conj(a, b) => conj(a.subst(var, replacement), b.subst(var, replacement)),
            Type::Forall(x, body) => {
                if x == var {
                    self.clone()
                } else if replacement.contains_free(x) && body.contains_free(var) {
                    let fresh = fresh_type_var();
                    let renamed = body.subst(x, &Type::Var(fresh.clone()));
                    Type::Forall(fresh, Box::new(renamed.subst(var, replacement)))
                } else {
                    Type::Forall(x.clone(), Box::new(body.subst(var, replacement)))
                }
            }
        }
    }
}

impl Term {
    /// Capture-avoiding substitution of the term `replacement` for the free
    /// term variable `var`. Both lambda binders (against free term
    /// variables of the replacement) and type binders (against its free
    /// type variables) are renamed when they would capture.
    pub fn subst_term(&self, var: &TermVar, replacement: &Term) -> Term {
        match self {
            Term::Var(v, _) => {
                if v == var {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            Term::Lam(x, ann, body) => {
                if x == var {
                    self.clone()
                } else if replacement.free_term_vars().contains(x)
                    && body.free_term_vars().contains(var)
                {
                    let fresh = fresh_term_var();
                    let renamed =
                        body.subst_term(x, &Term::Var(fresh.clone(), ann.clone()));
                    Term::Lam(
                        fresh,
                        ann.clone(),
                        Box::new(renamed.subst_term(var, replacement)),
                    )
                } else {
                    Term::Lam(
                        x.clone(),
                        ann.clone(),
                        Box::new(body.subst_term(var, replacement)),
                    )
                }
            }
            Term::App(f, a) => app(
                f.subst_term(var, replacement),
                a.subst_term(var, replacement),
            ),
            Term::Pair(l, r) => pair(
                l.subst_term(var, replacement),
                r.subst_term(var, replacement),
            ),
            Term::Proj(ty, body) => {
                Term::Proj(ty.clone(), Box::new(body.subst_term(var, replacement)))
            }
            Term::TLam(x, body) => {
                if body.free_term_vars().contains(var)
                    && replacement.free_type_vars().contains(x)
                {
                    let fresh = fresh_type_var();
                    let renamed = body.subst_type(x, &Type::Var(fresh.clone()));
                    Term::TLam(fresh, Box::new(renamed.subst_term(var, replacement)))
                } else {
                    Term::TLam(x.clone(), Box::new(body.subst_term(var, replacement)))
                }
            }
            Term::TApp(f, ty) => tapp(f.subst_term(var, replacement), ty.clone()),
        }
    }

    /// Capture-avoiding substitution of a type for a free type variable,
    /// applied to every annotation, projection type and type argument.
    pub fn subst_type(&self, var: &TypeVar, replacement: &Type) -> Term {
        match self {
            Term::Var(v, ty) => Term::Var(v.clone(), ty.subst(var, replacement)),
            Term::Lam(x, ann, body) => Term::Lam(
                x.clone(),
                ann.subst(var, replacement),
                Box::new(body.subst_type(var, replacement)),
            ),
            Term::App(f, a) => app(
                f.subst_type(var, replacement),
                a.subst_type(var, replacement),
            ),
            Term::Pair(l, r) => pair(
                l.subst_type(var, replacement),
                r.subst_type(var, replacement),
            ),
            Term::Proj(ty, body) => Term::Proj(
                ty.subst(var, replacement),
                Box::new(body.subst_type(var, replacement)),
            ),
            Term::TLam(x, body) => {
                if x == var {
                    self.clone()
                } else if replacement.contains_free(x) && body.free_type_vars().contains(var)
                {
                    let fresh = fresh_type_var();
                    let renamed = body.subst_type(x, &Type::Var(fresh.clone()));
                    Term::TLam(fresh, Box::new(renamed.subst_type(var, replacement)))
                } else {
                    Term::TLam(x.clone(), Box::new(body.subst_type(var, replacement)))
                }
            }
            Term::TApp(f, ty) => Term::TApp(
                Box::new(f.subst_type(var, replacement)),
                ty.subst(var, replacement),
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Alpha-canonical trees
// ---------------------------------------------------------------------------

/// Renames the bound variables of `ty` to position-derived names: the
/// binder with `level` enclosing type binders becomes `_T{level}`. Free
/// variables keep their names, so alpha-equivalent types (and only those)
/// map to structurally equal trees.
fn canon_type(ty: &Type, level: usize, env: &BTreeMap<TypeVar, TypeVar>) -> Type {
    match ty {
        Type::Var(v) => Type::Var(env.get(v).cloned().unwrap_or_else(|| v.clone())),
        Type::Arrow(a, b) => arrow(canon_type(a, level, env), canon_type(b, level, env)),
        Type::Conj(a, b) => conj(canon_type(a, level, env), canon_type(b, level, env)),
        Type::Forall(x, body) => {
            let canon_name = TypeVar(format!("_T{level}"));
            let mut inner = env.clone();
            inner.insert(x.clone(), canon_name.clone());
            Type::Forall(canon_name, Box::new(canon_type(body, level + 1, &inner)))
        }
    }
}

fn canon_term(
    term: &Term,
    term_level: usize,
    type_level: usize,
    term_env: &BTreeMap<TermVar, TermVar>,
    type_env: &BTreeMap<TypeVar, TypeVar>,
) -> Term {
    match term {
        Term::Var(v, ty) => Term::Var(
            term_env.get(v).cloned().unwrap_or_else(|| v.clone()),
            canon_type(ty, type_level, type_env),
        ),
        Term::Lam(x, ann, body) => {
            let canon_name = TermVar(format!("_v{term_level}"));
            let mut inner = term_env.clone();
            inner.insert(x.clone(), canon_name.clone());
            Term::Lam(
                canon_name,
                canon_type(ann, type_level, type_env),
                Box::new(canon_term(body, term_level + 1, type_level, &inner, type_env)),
            )
        }
        Term::App(f, a) => app(
            canon_term(f, term_level, type_level, term_env, type_env),
            canon_term(a, term_level, type_level, term_env, type_env),
        ),
        Term::Pair(l, r) => pair(
            canon_term(l, term_level, type_level, term_env, type_env),
            canon_term(r, term_level, type_level, term_env, type_env),
        ),
        Term::Proj(ty, body) => Term::Proj(
            canon_type(ty, type_level, type_env),
            Box::new(canon_term(body, term_level, type_level, term_env, type_env)),
        ),
        Term::TLam(x, body) => {
            let canon_name = TypeVar(format!("_T{type_level}"));
            let mut inner = type_env.clone();
            inner.insert(x.clone(), canon_name.clone());
            Term::TLam(
                canon_name,
                Box::new(canon_term(body, term_level, type_level + 1, term_env, &inner)),
            )
        }
        Term::TApp(f, ty) => Term::TApp(
            Box::new(canon_term(f, term_level, type_level, term_env, type_env)),
            canon_type(ty, type_level, type_env),
        ),
    }
}

impl Type {
    /// The alpha-canonical tree: bound variables renamed by binder
    /// position, free variables untouched. Structural equality on the
    /// result decides alpha-equivalence.
    pub fn alpha_canonical(&self) -> Type {
        canon_type(self, 0, &BTreeMap::new())
    }

    /// A 64-bit digest of the alpha-canonical tree, usable as a cheap
    /// dedup key. Identity-sensitive callers compare the trees themselves.
    pub fn alpha_digest(&self) -> u64 {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut hasher = DefaultHasher::new();
        self.alpha_canonical().hash(&mut hasher);
        hasher.finish()
    }

    pub fn alpha_eq(&self, other: &Type) -> bool {
        self.alpha_canonical() == other.alpha_canonical()
    }
}

impl Term {
    /// The alpha-canonical tree: lambda binders become `_v{level}`, type
    /// binders `_T{level}` (levels counted per namespace), and every
    /// annotation is canonicalized in the enclosing type-binder scope.
    pub fn alpha_canonical(&self) -> Term {
        canon_term(self, 0, 0, &BTreeMap::new(), &BTreeMap::new())
    }

    /// A 64-bit digest of the alpha-canonical tree.
    pub fn alpha_digest(&self) -> u64 {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut hasher = DefaultHasher::new();
        self.alpha_canonical().hash(&mut hasher);
        hasher.finish()
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.alpha_canonical() == other.alpha_canonical()
    }
}
