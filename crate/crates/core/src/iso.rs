//! Prime-factor canonical forms and the isomorphism decision procedure.
//!
//! Every type factors into a multiset of *primes* of shape
//! `forall X1..Xk. (C -> Y)` (or the degenerate `forall X1..Xk. Y` when
//! there is nothing to the left of the head): a variable is its own bare
//! prime; an arrow pushes its domain into every prime of the codomain; a
//! conjunction is the multiset union of its sides; and a quantifier is
//! prepended to the prefix of every prime of its body. A type is
//! isomorphic to the conjunction of its primes, and two types are
//! isomorphic exactly when their canonical prime multisets coincide.
//!
//! Canonical forms erase names: prefix variables are numbered by position
//! (de Bruijn levels threaded through the whole tree), prime arguments are
//! canonicalized recursively, and the resulting multiset is sorted by the
//! total order on primes. Structural equality on [`CanonType`] therefore
//! decides isomorphism; [`crate::oracle`] provides the independent
//! axiom-closure route the engine is tested against.
//!
//! The residual operations ([`arrow_residual`], [`conj_residual`],
//! [`forall_strip`]) answer the three questions the type checker asks:
//! "is this type an arrow with the given domain", "a conjunction with the
//! given component", "a universal" — each up to isomorphism, each
//! returning the leftover piece.

use crate::syntax::{conj, fresh_type_var, Type, TypeVar};
use std::cell::RefCell;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Symbolic factorization
// ---------------------------------------------------------------------------

/// One prime factor in symbolic form: `forall prefix. (arg -> head)`,
/// with `arg` absent for bare primes. Prefix variables scope over `arg`
/// and may be the head; the prefix order is significant (quantifiers do
/// not commute).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeFactor {
    pub prefix: Vec<TypeVar>,
    pub arg: Option<Type>,
    pub head: TypeVar,
}

impl PrimeFactor {
    /// The type this factor denotes.
    pub fn denote(&self) -> Type {
        let head = Type::Var(self.head.clone());
        let body = match &self.arg {
            None => head,
            Some(arg) => Type::Arrow(Box::new(arg.clone()), Box::new(head)),
        };
        self.prefix
            .iter()
            .rev()
            .fold(body, |acc, x| Type::Forall(x.clone(), Box::new(acc)))
    }

    /// Alpha-renames the whole prefix to globally fresh names. Binders are
    /// processed innermost-first so that shadowed prefixes rename
    /// correctly.
    fn freshen_prefix(mut self) -> PrimeFactor {
        let mut fresh_names = vec![TypeVar::new(""); self.prefix.len()];
        for i in (0..self.prefix.len()).rev() {
            let old = self.prefix[i].clone();
            let new = fresh_type_var();
            if let Some(arg) = &self.arg {
                self.arg = Some(arg.subst(&old, &Type::Var(new.clone())));
            }
            if self.head == old {
                self.head = new.clone();
            }
            fresh_names[i] = new;
        }
        self.prefix = fresh_names;
        self
    }
}

/// The prime factors of a type, by structural recursion:
///
/// - a variable is one bare prime;
/// - `A -> B` prepends `A` to the argument of every prime of `B` (the
///   prefix is freshened first so `A` cannot be captured); a bare prime
///   `forall Xs. Y` becomes `forall Xs. (A -> Y)`;
/// - `A /\ B` is the multiset union;
/// - `forall X. A` prepends `X` to the prefix of every prime of `A`.
pub fn prime_factors(ty: &Type) -> Vec<PrimeFactor> {
    match ty {
        Type::Var(x) => vec![PrimeFactor {
            prefix: Vec::new(),
            arg: None,
            head: x.clone(),
        }],
        Type::Conj(a, b) => {
            let mut out = prime_factors(a);
            out.extend(prime_factors(b));
            out
        }
        Type::Arrow(a, b) => prime_factors(b)
            .into_iter()
            .map(|pf| {
                let pf = pf.freshen_prefix();
                let arg = match pf.arg {
                    None => (**a).clone(),
                    Some(existing) => conj((**a).clone(), existing),
                };
                PrimeFactor {
                    prefix: pf.prefix,
                    arg: Some(arg),
                    head: pf.head,
                }
            })
            .collect(),
        Type::Forall(x, body) => prime_factors(body)
            .into_iter()
            .map(|mut pf| {
                pf.prefix.insert(0, x.clone());
                pf
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Canonical forms
// ---------------------------------------------------------------------------

/// Head of a canonical prime: a prefix variable identified by its de
/// Bruijn level (position among all enclosing canonical binders), or a
/// free variable by name. The derived order places every bound head
/// before every free head, levels ascending, then free names
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Head {
    Bound(usize),
    Free(TypeVar),
}

/// A canonical prime: `binders` quantifiers, an optional canonical
/// argument, and a head. The derived order — binder count, then head,
/// then argument — is the total order canonical multisets are sorted by.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime {
    binders: usize,
    head: Head,
    arg: Option<CanonType>,
}

impl Prime {
    pub fn binders(&self) -> usize {
        self.binders
    }
    pub fn head(&self) -> &Head {
        &self.head
    }
    pub fn arg(&self) -> Option<&CanonType> {
        self.arg.as_ref()
    }

    /// Rebuilds the type this prime denotes. `scope` carries the names
    /// chosen for enclosing canonical binders, indexed by level.
    fn denote_under(&self, scope: &mut Vec<TypeVar>) -> Type {
        let base = scope.len();
        for _ in 0..self.binders {
            scope.push(fresh_type_var());
        }
        let head = match &self.head {
            Head::Bound(level) => Type::Var(scope[*level].clone()),
            Head::Free(v) => Type::Var(v.clone()),
        };
        let body = match &self.arg {
            None => head,
            Some(arg) => Type::Arrow(Box::new(arg.denote_under(scope)), Box::new(head)),
        };
        let out = scope[base..]
            .iter()
            .rev()
            .fold(body, |acc, x| Type::Forall(x.clone(), Box::new(acc)));
        scope.truncate(base);
        out
    }

    pub fn denote(&self) -> Type {
        self.denote_under(&mut Vec::new())
    }
}

/// The canonical form of a type: its prime multiset, sorted. Structural
/// equality decides isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonType {
    primes: Vec<Prime>,
}

impl CanonType {
    pub fn primes(&self) -> &[Prime] {
        &self.primes
    }

    /// A type denoting this canonical form: the right-nested conjunction
    /// of the denoted primes, in canonical order.
    pub fn denote(&self) -> Type {
        self.denote_under(&mut Vec::new())
    }

    fn denote_under(&self, scope: &mut Vec<TypeVar>) -> Type {
        let mut parts = self.primes.iter().rev().map(|p| p.denote_under(scope));
        let last = parts.next().expect("canonical forms are nonempty");
        parts.fold(last, |acc, p| conj(p, acc))
    }
}

/// Canonicalizes `ty` at nesting depth `depth`; `env` maps the in-scope
/// quantifier names to their levels. The four cases mirror
/// [`prime_factors`], but binder positions replace names, so no
/// freshening is needed: a prime's own binders occupy levels
/// `depth..depth+binders`, and an arrow's domain is canonicalized at
/// `depth + binders` before joining the prime's argument.
fn canon_at(ty: &Type, depth: usize, env: &BTreeMap<TypeVar, usize>) -> CanonType {
    match ty {
        Type::Var(x) => {
            let head = match env.get(x) {
                Some(level) => Head::Bound(*level),
                None => Head::Free(x.clone()),
            };
            CanonType {
                primes: vec![Prime {
                    binders: 0,
                    head,
                    arg: None,
                }],
            }
        }
        Type::Conj(a, b) => {
            let mut primes = canon_at(a, depth, env).primes;
            primes.extend(canon_at(b, depth, env).primes);
            primes.sort();
            CanonType { primes }
        }
        Type::Arrow(a, b) => {
            let mut primes = canon_at(b, depth, env).primes;
            for prime in &mut primes {
                let dom = canon_at(a, depth + prime.binders, env);
                let arg = match prime.arg.take() {
                    None => dom,
                    Some(existing) => {
                        let mut merged = dom.primes;
                        merged.extend(existing.primes);
                        merged.sort();
                        CanonType { primes: merged }
                    }
                };
                prime.arg = Some(arg);
            }
            primes.sort();
            CanonType { primes }
        }
        Type::Forall(x, body) => {
            let mut inner = env.clone();
            inner.insert(x.clone(), depth);
            let mut primes = canon_at(body, depth + 1, &inner).primes;
            for prime in &mut primes {
                prime.binders += 1;
            }
            // Uniform +1 on the leading sort key preserves order.
            CanonType { primes }
        }
    }
}

thread_local! {
    static CANON_CACHE: RefCell<std::collections::HashMap<Type, CanonType>> =
        RefCell::new(std::collections::HashMap::new());
}

/// The canonical form of a type. Results are memoized per thread; the
/// cache is observationally transparent.
pub fn canonicalize(ty: &Type) -> CanonType {
    CANON_CACHE.with(|cache| {
        if let Some(hit) = cache.borrow().get(ty) {
            return hit.clone();
        }
        let canon = canon_at(ty, 0, &BTreeMap::new());
        let mut cache = cache.borrow_mut();
        if cache.len() > 0x10000 {
            cache.clear();
        }
        cache.insert(ty.clone(), canon.clone());
        canon
    })
}

/// Decides whether two types are isomorphic.
pub fn types_isomorphic(a: &Type, b: &Type) -> bool {
    canonicalize(a) == canonicalize(b)
}

/// The right-nested conjunction of `parts` in canonical order (stable for
/// isomorphic parts). `None` when `parts` is empty: conjunction has no
/// unit.
pub fn conjunction_of(parts: &[Type]) -> Option<Type> {
    if parts.is_empty() {
        return None;
    }
    let mut sorted: Vec<&Type> = parts.iter().collect();
    sorted.sort_by_cached_key(|ty| canonicalize(ty));
    let mut rev = sorted.into_iter().rev().cloned();
    let last = rev.next().unwrap();
    Some(rev.fold(last, |acc, ty| conj(ty, acc)))
}

/// Multiset difference `big - small` over sorted prime lists, or `None`
/// when `small` does not embed in `big`.
fn multiset_subtract(big: &[Prime], small: &[Prime]) -> Option<Vec<Prime>> {
    let mut out = Vec::with_capacity(big.len().saturating_sub(small.len()));
    let mut bi = 0;
    for s in small {
        loop {
            if bi == big.len() {
                return None;
            }
            let b = &big[bi];
            bi += 1;
            match b.cmp(s) {
                std::cmp::Ordering::Less => out.push(b.clone()),
                std::cmp::Ordering::Equal => break,
                std::cmp::Ordering::Greater => return None,
            }
        }
    }
    out.extend_from_slice(&big[bi..]);
    Some(out)
}

/// Splits `t` as `a /\ b` up to isomorphism: the primes of `a` must embed
/// strictly into the primes of `t`, and `b` denotes the (nonempty)
/// remainder. Strictness means `conj_residual(t, t)` is `None`: a
/// conjunction splits only into two proper pieces.
pub fn conj_residual(t: &Type, a: &Type) -> Option<Type> {
    let ct = canonicalize(t);
    let ca = canonicalize(a);
    let remainder = multiset_subtract(&ct.primes, &ca.primes)?;
    if remainder.is_empty() {
        return None;
    }
    Some(CanonType { primes: remainder }.denote())
}

/// Splits `t` as `s -> b` up to isomorphism. Every prime of `t` must have
/// an argument that the primes of `s` embed into (under a freshly opened
/// prefix, so `s` cannot refer to the prefix); the contribution of each
/// prime re-binds its prefix over the remainder arrow, and `b` is the
/// conjunction of the contributions.
pub fn arrow_residual(t: &Type, s: &Type) -> Option<Type> {
    let ct = canonicalize(t);
    let cs = canonicalize(s);
    let mut parts = Vec::with_capacity(ct.primes.len());
    for prime in &ct.primes {
        let arg = prime.arg.as_ref()?;
        // Open the prefix with fresh names; they become free variables of
        // the argument and head, and are re-bound below.
        let mut scope: Vec<TypeVar> = (0..prime.binders).map(|_| fresh_type_var()).collect();
        let arg_ty = arg.denote_under(&mut scope);
        let head_ty = match &prime.head {
            Head::Bound(level) => Type::Var(scope[*level].clone()),
            Head::Free(v) => Type::Var(v.clone()),
        };
        let ca = canonicalize(&arg_ty);
        let remainder = multiset_subtract(&ca.primes, &cs.primes)?;
        let body = if remainder.is_empty() {
            head_ty
        } else {
            let rem_ty = CanonType { primes: remainder }.denote();
            Type::Arrow(Box::new(rem_ty), Box::new(head_ty))
        };
        parts.push(
            scope
                .iter()
                .rev()
                .fold(body, |acc, x| Type::Forall(x.clone(), Box::new(acc))),
        );
    }
    conjunction_of(&parts)
}

/// Splits `t` as `forall X. c` up to isomorphism: every prime must carry
/// at least one quantifier; the outermost binder of each prime is opened
/// with one shared fresh variable, and `c` is the conjunction of the
/// opened primes.
pub fn forall_strip(t: &Type) -> Option<(TypeVar, Type)> {
    let ct = canonicalize(t);
    if ct.primes.iter().any(|p| p.binders == 0) {
        return None;
    }
    let x = fresh_type_var();
    let mut parts = Vec::with_capacity(ct.primes.len());
    for prime in &ct.primes {
        let mut scope = vec![x.clone()];
        scope.extend((1..prime.binders).map(|_| fresh_type_var()));
        let head = match &prime.head {
            Head::Bound(level) => Type::Var(scope[*level].clone()),
            Head::Free(v) => Type::Var(v.clone()),
        };
        let body = match &prime.arg {
            None => head,
            Some(arg) => {
                let mut full_scope = scope.clone();
                let arg_ty = arg.denote_under(&mut full_scope);
                Type::Arrow(Box::new(arg_ty), Box::new(head))
            }
        };
        parts.push(
            scope[1..]
                .iter()
                .rev()
                .fold(body, |acc, v| Type::Forall(v.clone(), Box::new(acc))),
        );
    }
    Some((x, conjunction_of(&parts)?))
}
