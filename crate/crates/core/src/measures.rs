//! Term measures underpinning termination, the longest-reduction
//! search, and the brute-force classifier for members of a pair's
//! equivalence class.
//!
//! Plain term size is not invariant under the structural equivalence
//! (distributing an abstraction over a pair duplicates the binder), so
//! the engine uses a weighted measure `M` driven by an auxiliary pair
//! count `P`. Both are constant across every structural-equivalence
//! class, and `M` strictly dominates every immediate subterm — together
//! these make `M` a termination certificate for reduction, which the
//! test suites check computationally.

use crate::rewrite::{equiv_class, reduce_step_traced, term_equiv, Equivalence, EquivClass};
use crate::syntax::Term;
use std::collections::{HashMap, HashSet};

/// The two measures of a term, computed together.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasurePair {
    pub m: u64,
    pub p: u64,
}

/// Pair weight: counts pair constructors, weighting nothing else;
/// applications and projections look only at the operator side.
pub fn measure_p(term: &Term) -> u64 {
    match term {
        Term::Var(..) => 0,
        Term::Lam(_, _, r) => measure_p(r),
        Term::App(r, _) => measure_p(r),
        Term::Pair(r, s) => 1 + measure_p(r) + measure_p(s),
        Term::Proj(_, r) => measure_p(r),
        Term::TLam(_, r) => measure_p(r),
        Term::TApp(r, _) => measure_p(r),
    }
}

/// Weighted size: like a node count, but unary constructors also absorb
/// the pair weight of their body, and an application charges its
/// argument once per pair in the operator. Always at least 1.
pub fn measure_m(term: &Term) -> u64 {
    match term {
        Term::Var(..) => 1,
        Term::Lam(_, _, r) => 1 + measure_m(r) + measure_p(r),
        Term::App(r, s) => measure_m(r) + measure_m(s) + measure_p(r) * measure_m(s),
        Term::Pair(r, s) => measure_m(r) + measure_m(s),
        Term::Proj(_, r) => 1 + measure_m(r) + measure_p(r),
        Term::TLam(_, r) => 1 + measure_m(r) + measure_p(r),
        Term::TApp(r, _) => 1 + measure_m(r) + measure_p(r),
    }
}

pub fn measures(term: &Term) -> MeasurePair {
    MeasurePair {
        m: measure_m(term),
        p: measure_p(term),
    }
}

/// Outcome of the longest-reduction search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LongestReduction {
    /// Length of the longest reduction sequence from the term.
    Length(u64),
    /// A class or graph search hit its budget; the true length is
    /// unknown.
    BudgetExceeded,
    /// The reduction graph contains a cycle — impossible for well-typed
    /// terms, reported rather than diverged on.
    CycleDetected,
}

struct LongestSearch {
    budget: usize,
    memo: HashMap<Term, u64>,
    on_stack: HashSet<Term>,
}

enum SearchStop {
    Budget,
    Cycle,
}

impl LongestSearch {
    fn run(&mut self, entry: &Term) -> Result<u64, SearchStop> {
        let class = equiv_class(entry, self.budget);
        if !class.is_closed() {
            return Err(SearchStop::Budget);
        }
        let repr = class.representative().clone();
        if let Some(&n) = self.memo.get(&repr) {
            return Ok(n);
        }
        if self.memo.len() >= self.budget {
            return Err(SearchStop::Budget);
        }
        if !self.on_stack.insert(repr.clone()) {
            return Err(SearchStop::Cycle);
        }
        let mut best = 0;
        for traced in reduce_step_traced(&class) {
            best = best.max(1 + self.run(&traced.reduct)?);
        }
        self.on_stack.remove(&repr);
        self.memo.insert(repr, best);
        Ok(best)
    }
}

/// Length of the longest reduction sequence from `term`, by memoized
/// depth-first search over the reduction graph with classes collapsed
/// to their representatives.
pub fn longest_reduction(term: &Term, budget: usize) -> LongestReduction {
    let mut search = LongestSearch {
        budget,
        memo: HashMap::new(),
        on_stack: HashSet::new(),
    };
    match search.run(term) {
        Ok(n) => LongestReduction::Length(n),
        Err(SearchStop::Budget) => LongestReduction::BudgetExceeded,
        Err(SearchStop::Cycle) => LongestReduction::CycleDetected,
    }
}

/// The five shapes a member of a pair's equivalence class can take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairShape {
    /// A pair whose components redistribute the original components.
    Pair,
    /// An abstraction over a pair-equivalent body.
    Lambda,
    /// An application whose operator is pair-equivalent.
    Application,
    /// A type abstraction over a pair-equivalent body.
    TypeLambda,
    /// A type application whose operator is pair-equivalent.
    TypeApplication,
}

fn equivalent(a: &Term, b: &Term, budget: usize) -> bool {
    term_equiv(a, b, budget) == Equivalence::Equivalent
}

/// Pair-shaped members of the class of `term`, as component pairs.
fn pair_members(term: &Term, budget: usize) -> Vec<(Term, Term)> {
    equiv_class(term, budget)
        .members()
        .iter()
        .filter_map(|m| match m {
            Term::Pair(l, r) => Some(((**l).clone(), (**r).clone())),
            _ => None,
        })
        .collect()
}

/// Classifies `t`, a member of the class of the pair of `r` and `s`,
/// into one of the five characteristic shapes — verifying the shape's
/// component conditions with bounded equivalence checks. `None` means
/// no shape matched (a counterexample to the characterisation, or a
/// budget too small to verify it).
pub fn pair_shape_classify(t: &Term, r: &Term, s: &Term, budget: usize) -> Option<PairShape> {
    let eq = |a: &Term, b: &Term| equivalent(a, b, budget);
    let pair = |a: &Term, b: &Term| Term::Pair(Box::new(a.clone()), Box::new(b.clone()));
    match t {
        Term::Pair(u, v) => {
            // Components match directly, in either order.
            if (eq(u, r) && eq(v, s)) || (eq(u, s) && eq(v, r)) {
                return Some(PairShape::Pair);
            }
            // One original component sits whole inside one side, the
            // other is split across both (all four symmetries).
            for (kept, searched) in [(&**u, &**v), (&**v, &**u)] {
                for (w, whole) in pair_members(searched, budget)
                    .iter()
                    .flat_map(|(p, q)| [(p, q), (q, p)])
                {
                    for (whole_target, split_target) in [(s, r), (r, s)] {
                        if eq(whole, whole_target) && eq(split_target, &pair(kept, w)) {
                            return Some(PairShape::Pair);
                        }
                    }
                }
            }
            // Both originals split across both sides (the four-way
            // redistribution).
            for (t11, t21) in pair_members(u, budget) {
                for (t12, t22) in pair_members(v, budget) {
                    if eq(r, &pair(&t11, &t12)) && eq(s, &pair(&t21, &t22)) {
                        return Some(PairShape::Pair);
                    }
                }
            }
            None
        }
        Term::Lam(x, a, body) => {
            for (a1, a2) in pair_members(body, budget) {
                let left = Term::Lam(x.clone(), a.clone(), Box::new(a1));
                let right = Term::Lam(x.clone(), a.clone(), Box::new(a2));
                if (eq(r, &left) && eq(s, &right)) || (eq(r, &right) && eq(s, &left)) {
                    return Some(PairShape::Lambda);
                }
            }
            None
        }
        Term::App(fun, arg) => {
            for (a1, a2) in pair_members(fun, budget) {
                let left = Term::App(Box::new(a1), arg.clone());
                let right = Term::App(Box::new(a2), arg.clone());
                if (eq(r, &left) && eq(s, &right)) || (eq(r, &right) && eq(s, &left)) {
                    return Some(PairShape::Application);
                }
            }
            None
        }
        Term::TLam(x, body) => {
            for (a1, a2) in pair_members(body, budget) {
                let left = Term::TLam(x.clone(), Box::new(a1));
                let right = Term::TLam(x.clone(), Box::new(a2));
                if (eq(r, &left) && eq(s, &right)) || (eq(r, &right) && eq(s, &left)) {
                    return Some(PairShape::TypeLambda);
                }
            }
            None
        }
        Term::TApp(fun, a) => {
            for (a1, a2) in pair_members(fun, budget) {
                let left = Term::TApp(Box::new(a1), a.clone());
                let right = Term::TApp(Box::new(a2), a.clone());
                if (eq(r, &left) && eq(s, &right)) || (eq(r, &right) && eq(s, &left)) {
                    return Some(PairShape::TypeApplication);
                }
            }
            None
        }
        Term::Var(..) | Term::Proj(..) => None,
    }
}

/// Checks that every member of `class` carries the same measures and
/// returns them. Panics with a counterexample otherwise (test support).
pub fn class_measures(class: &EquivClass) -> MeasurePair {
    let expected = measures(&class.members()[0]);
    for member in class.members() {
        let got = measures(member);
        assert_eq!(
            got, expected,
            "measure not constant across class: {member} has {got:?}, expected {expected:?}"
        );
    }
    expected
}
