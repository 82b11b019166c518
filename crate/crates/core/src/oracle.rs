//! Independent ground truth for the type-isomorphism relation, plus the
//! exhaustive type enumerator used by agreement tests.
//!
//! The oracle knows nothing about canonical forms. It treats the six
//! isomorphism axioms as rewrite rules, applies them in both directions at
//! every position, and saturates breadth-first modulo alpha-equivalence.
//! Two types are related exactly when the closure of one reaches the
//! other. Saturation is budget-capped: a verdict of "not related" is
//! definitive when the closure closed, and "not found within budget"
//! otherwise.
//!
//! Axioms (both orientations):
//!
//! ```text
//! A /\ B            ~ B /\ A
//! A /\ (B /\ C)     ~ (A /\ B) /\ C
//! A -> (B /\ C)     ~ (A -> B) /\ (A -> C)
//! (A /\ B) -> C     ~ A -> B -> C
//! forall X. A -> B  ~ A -> forall X. B     when X not free in A
//! forall X. A /\ B  ~ (forall X. A) /\ (forall X. B)
//! ```

use crate::syntax::{fresh_type_var, Type, TypeVar};
use std::collections::{HashSet, VecDeque};

/// Default saturation budget (maximum alpha-distinct types materialized).
pub const ORACLE_BUDGET_DEFAULT: usize = 50_000;

/// All types reachable from `ty` by one axiom application at one position,
/// in either direction. Results are raw trees; callers dedup modulo alpha.
pub fn axiom_neighbors(ty: &Type) -> Vec<Type> {
    let mut out = Vec::new();
    root_axioms(ty, &mut out);
    // Congruence: rewrite inside each immediate subterm.
    match ty {
        Type::Var(_) => {}
        Type::Arrow(a, b) => {
            for a2 in axiom_neighbors(a) {
                out.push(Type::Arrow(Box::new(a2), b.clone()));
            }
            for b2 in axiom_neighbors(b) {
                out.push(Type::Arrow(a.clone(), Box::new(b2)));
            }
        }
        Type::Conj(a, b) => {
            for a2 in axiom_neighbors(a) {
                out.push(Type::Conj(Box::new(a2), b.clone()));
            }
            for b2 in axiom_neighbors(b) {
                out.push(Type::Conj(a.clone(), Box::new(b2)));
            }
        }
        Type::Forall(x, body) => {
            for b2 in axiom_neighbors(body) {
                out.push(Type::Forall(x.clone(), Box::new(b2)));
            }
        }
    }
    out
}

fn root_axioms(ty: &Type, out: &mut Vec<Type>) {
    match ty {
        Type::Var(_) => {}
        Type::Conj(a, b) => {
            // Commutativity (self-inverse, one orientation suffices).
            out.push(Type::Conj(b.clone(), a.clone()));
            // Associativity, right to left: A /\ (B /\ C) -> (A /\ B) /\ C.
            if let Type::Conj(b1, c) = &**b {
                out.push(Type::Conj(
                    Box::new(Type::Conj(a.clone(), b1.clone())),
                    c.clone(),
                ));
            }
            // Associativity, left to right.
            if let Type::Conj(a1, a2) = &**a {
                out.push(Type::Conj(
                    a1.clone(),
                    Box::new(Type::Conj(a2.clone(), b.clone())),
                ));
            }
            // Distribution, collapse direction: (A -> B) /\ (A -> C).
            if let (Type::Arrow(d1, b1), Type::Arrow(d2, c1)) = (&**a, &**b) {
                if d1.alpha_eq(d2) {
                    out.push(Type::Arrow(
                        d1.clone(),
                        Box::new(Type::Conj(b1.clone(), c1.clone())),
                    ));
                }
            }
            // Quantifier distribution, collapse direction:
            // (forall X. A) /\ (forall Y. B) -> forall Z. A[X:=Z] /\ B[Y:=Z].
            if let (Type::Forall(x, a1), Type::Forall(y, b1)) = (&**a, &**b) {
                let z = fresh_type_var();
                let left = a1.subst(x, &Type::Var(z.clone()));
                let right = b1.subst(y, &Type::Var(z.clone()));
                out.push(Type::Forall(z, Box::new(Type::Conj(Box::new(left), Box::new(right)))));
            }
        }
        Type::Arrow(a, b) => {
            // Distribution: A -> (B /\ C) -> (A -> B) /\ (A -> C).
            if let Type::Conj(b1, c1) = &**b {
                out.push(Type::Conj(
                    Box::new(Type::Arrow(a.clone(), b1.clone())),
                    Box::new(Type::Arrow(a.clone(), c1.clone())),
                ));
            }
            // Currying: (A /\ B) -> C -> A -> B -> C.
            if let Type::Conj(a1, a2) = &**a {
                out.push(Type::Arrow(
                    a1.clone(),
                    Box::new(Type::Arrow(a2.clone(), b.clone())),
                ));
            }
            // Uncurrying: A -> (B -> C) -> (A /\ B) -> C.
            if let Type::Arrow(b1, c1) = &**b {
                out.push(Type::Arrow(
                    Box::new(Type::Conj(a.clone(), b1.clone())),
                    c1.clone(),
                ));
            }
            // Quantifier hoisting: A -> forall X. B -> forall X. (A -> B),
            // alpha-renaming the binder when it collides with A.
            if let Type::Forall(x, b1) = &**b {
                let (x, b1) = if a.contains_free(x) {
                    let fresh = fresh_type_var();
                    let renamed = b1.subst(x, &Type::Var(fresh.clone()));
                    (fresh, Box::new(renamed))
                } else {
                    (x.clone(), b1.clone())
                };
                out.push(Type::Forall(
                    x,
                    Box::new(Type::Arrow(a.clone(), b1)),
                ));
            }
        }
        Type::Forall(x, body) => match &**body {
            // Quantifier lowering: forall X. (A -> B) -> A -> forall X. B,
            // only when X is not free in A.
            Type::Arrow(a, b) => {
                if !a.contains_free(x) {
                    out.push(Type::Arrow(
                        a.clone(),
                        Box::new(Type::Forall(x.clone(), b.clone())),
                    ));
                }
            }
            // Quantifier distribution over conjunction.
            Type::Conj(a, b) => {
                out.push(Type::Conj(
                    Box::new(Type::Forall(x.clone(), a.clone())),
                    Box::new(Type::Forall(x.clone(), b.clone())),
                ));
            }
            _ => {}
        },
    }
}

/// Outcome of a saturation query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    /// The target was reached from the source.
    pub related: bool,
    /// The closure was fully explored. When `related` is false and
    /// `closed` is true the types are definitively not isomorphic.
    pub closed: bool,
    /// Alpha-distinct types materialized during the search.
    pub visited: usize,
}

/// Decides whether `a` and `b` are related by the axiom closure, stopping
/// early when the target is found or `budget` types have been visited.
pub fn iso_oracle(a: &Type, b: &Type, budget: usize) -> OracleVerdict {
    let target = b.alpha_canonical();
    let start = a.alpha_canonical();
    if start == target {
        return OracleVerdict {
            related: true,
            closed: false,
            visited: 1,
        };
    }
    let mut seen: HashSet<Type> = HashSet::new();
    seen.insert(start.clone());
    let mut queue = VecDeque::new();
    queue.push_back(start);
    while let Some(current) = queue.pop_front() {
        for next in axiom_neighbors(&current) {
            let canon = next.alpha_canonical();
            if seen.contains(&canon) {
                continue;
            }
            if canon == target {
                return OracleVerdict {
                    related: true,
                    closed: false,
                    visited: seen.len() + 1,
                };
            }
            if seen.len() >= budget {
                return OracleVerdict {
                    related: false,
                    closed: false,
                    visited: seen.len(),
                };
            }
            seen.insert(canon.clone());
            queue.push_back(canon);
        }
    }
    OracleVerdict {
        related: false,
        closed: true,
        visited: seen.len(),
    }
}

/// The full axiom closure of `ty` (alpha-canonical members) and whether it
/// closed within the budget. Useful for caching when many queries share a
/// source type.
pub fn iso_closure(ty: &Type, budget: usize) -> (HashSet<Type>, bool) {
    let start = ty.alpha_canonical();
    let mut seen: HashSet<Type> = HashSet::new();
    seen.insert(start.clone());
    let mut queue = VecDeque::new();
    queue.push_back(start);
    while let Some(current) = queue.pop_front() {
        for next in axiom_neighbors(&current) {
            let canon = next.alpha_canonical();
            if !seen.contains(&canon) {
                if seen.len() >= budget {
                    return (seen, false);
                }
                seen.insert(canon.clone());
                queue.push_back(canon);
            }
        }
    }
    (seen, true)
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration
// ---------------------------------------------------------------------------

/// Enumerates every alpha-distinct type with at most `max_nodes` syntax
/// nodes (variables included) whose free variables come from `free`.
/// Binders are introduced with names canonical in the nesting depth, so
/// alpha-equivalent candidates coincide and nothing is enumerated twice.
pub fn enumerate_types(max_nodes: usize, free: &[TypeVar]) -> Vec<Type> {
    fn binder_name(depth: usize) -> TypeVar {
        TypeVar::new(format!("Q{depth}"))
    }

    // exact[(n, depth)] = all types with exactly n nodes under `depth`
    // enclosing enumerator binders.
    fn exact(
        n: usize,
        depth: usize,
        free: &[TypeVar],
        memo: &mut std::collections::HashMap<(usize, usize), Vec<Type>>,
    ) -> Vec<Type> {
        if let Some(hit) = memo.get(&(n, depth)) {
            return hit.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            for v in free {
                out.push(Type::Var(v.clone()));
            }
            for d in 0..depth {
                out.push(Type::Var(binder_name(d)));
            }
        } else {
            for body in exact(n - 1, depth + 1, free, memo) {
                out.push(Type::Forall(binder_name(depth), Box::new(body)));
            }
            for left_nodes in 1..n - 1 {
                let right_nodes = n - 1 - left_nodes;
                let lefts = exact(left_nodes, depth, free, memo);
                let rights = exact(right_nodes, depth, free, memo);
                for l in &lefts {
                    for r in &rights {
                        out.push(Type::Arrow(Box::new(l.clone()), Box::new(r.clone())));
                        out.push(Type::Conj(Box::new(l.clone()), Box::new(r.clone())));
                    }
                }
            }
        }
        memo.insert((n, depth), out.clone());
        out
    }

    let mut memo = std::collections::HashMap::new();
    let mut all = Vec::new();
    for n in 1..=max_nodes {
        all.extend(exact(n, 0, free, &mut memo));
    }
    all
}
