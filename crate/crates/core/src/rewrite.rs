//! Structural equivalence of terms and reduction modulo that
//! equivalence.
//!
//! Two terms are structurally equivalent when one rewrites to the other
//! by the symmetric relation generated from eleven schemas — pair
//! commutation and association, distribution of abstraction and
//! application over pairs, currying, and the six permutations of type
//! abstraction/application with the other constructors — applied in
//! either orientation at any subterm position (but never inside a type
//! annotation). Reduction proper has three type-guarded head rules
//! (beta for term abstraction, beta for type abstraction, and pair
//! projection); a full reduction step is "rewrite anywhere in the
//! equivalence class, then contract one redex".
//!
//! Classes are materialized by budgeted breadth-first search over
//! alpha-canonical representatives ([`equiv_class`]); the budget makes
//! every operation total even though class finiteness is not
//! established, and results carry a flag saying whether the search
//! closed. [`normalize`] explores the reduction graph either
//! deterministically (always contracting the least reduct, for
//! reproducible output over a deliberately non-deterministic calculus)
//! or exhaustively (every normal form, one trace each).

use crate::iso::{conj_residual, forall_strip, types_isomorphic};
use crate::syntax::{fresh_term_var, fresh_type_var, Context, Term, TermVar, Type, TypeVar};
use crate::typing::synthesize_open;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

/// Default cap on materialized class members.
pub const CLASS_BUDGET_DEFAULT: usize = 10_000;

/// Reduction rule names as they appear in traces.
pub const RULE_BETA_LAMBDA: &str = "beta_lambda";
pub const RULE_BETA_TYPE: &str = "beta_Lambda";
pub const RULE_PI: &str = "pi";

/// Renames free occurrences of the term variable `old` to `new`,
/// preserving each occurrence's annotation. `new` must be globally
/// fresh, so capture is impossible.
fn rename_term_var(term: &Term, old: &TermVar, new: &TermVar) -> Term {
    match term {
        Term::Var(v, ann) if v == old => Term::Var(new.clone(), ann.clone()),
        Term::Var(..) => term.clone(),
        Term::Lam(v, _, _) if v == old => term.clone(),
        Term::Lam(v, a, b) => Term::Lam(
            v.clone(),
            a.clone(),
            Box::new(rename_term_var(b, old, new)),
        ),
        Term::App(f, a) => Term::App(
            Box::new(rename_term_var(f, old, new)),
            Box::new(rename_term_var(a, old, new)),
        ),
        Term::Pair(l, r) => Term::Pair(
            Box::new(rename_term_var(l, old, new)),
            Box::new(rename_term_var(r, old, new)),
        ),
        Term::Proj(a, b) => Term::Proj(a.clone(), Box::new(rename_term_var(b, old, new))),
        Term::TLam(x, b) => Term::TLam(x.clone(), Box::new(rename_term_var(b, old, new))),
        Term::TApp(f, a) => Term::TApp(Box::new(rename_term_var(f, old, new)), a.clone()),
    }
}

/// Is `subject` of type `forall W. (component' /\ rest)` — a universal
/// whose body contains (an instance of) `component`, quantified as
/// `binder`? This is the side condition of the projection/type-
/// application permutation; failures (including untypeable subjects)
/// are silent.
fn universal_conjunction_guard(subject: &Term, binder: &TypeVar, component: &Type) -> bool {
    let Ok(subject_ty) = synthesize_open(&Context::default(), subject) else {
        return false;
    };
    let Some((w, body)) = forall_strip(&subject_ty) else {
        return false;
    };
    let opened = component.subst(binder, &Type::Var(w));
    conj_residual(&body, &opened).is_some()
}

/// Replaces the occurrences of `target` in `ty` selected by `mask` with
/// `fresh`, counting every replaceable occurrence into `counter`.
/// Occurrences under a binder that captures a free variable of `target`
/// are not occurrences at all (`blocked`). Nested matches cannot exist
/// (a proper subtree is smaller than the whole), so matched subtrees are
/// not descended into.
fn replace_target_occurrences(
    ty: &Type,
    target: &Type,
    fresh: &TypeVar,
    mask: u64,
    counter: &mut u32,
    blocked: u32,
    target_free: &HashSet<TypeVar>,
) -> Type {
    if blocked == 0 && ty.alpha_eq(target) {
        let bit = *counter;
        *counter += 1;
        if bit < 64 && mask & (1u64 << bit) != 0 {
            return Type::Var(fresh.clone());
        }
        return ty.clone();
    }
    match ty {
        Type::Var(_) => ty.clone(),
        Type::Arrow(a, b) => Type::Arrow(
            Box::new(replace_target_occurrences(
                a, target, fresh, mask, counter, blocked, target_free,
            )),
            Box::new(replace_target_occurrences(
                b, target, fresh, mask, counter, blocked, target_free,
            )),
        ),
        Type::Conj(a, b) => Type::Conj(
            Box::new(replace_target_occurrences(
                a, target, fresh, mask, counter, blocked, target_free,
            )),
            Box::new(replace_target_occurrences(
                b, target, fresh, mask, counter, blocked, target_free,
            )),
        ),
        Type::Forall(x, body) => {
            let inner_blocked = blocked + u32::from(target_free.contains(x));
            Type::Forall(
                x.clone(),
                Box::new(replace_target_occurrences(
                    body,
                    target,
                    fresh,
                    mask,
                    counter,
                    inner_blocked,
                    target_free,
                )),
            )
        }
    }
}

/// All single rewrites available at the root of `term`, both
/// orientations of every schema.
fn root_equiv(term: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    match term {
        Term::Var(..) => {}
        Term::Pair(l, r) => {
            // Pair commutation (its own inverse: emitted once).
            out.push(Term::Pair(r.clone(), l.clone()));
            // Association, both ways.
            if let Term::Pair(s, t) = &**r {
                out.push(Term::Pair(
                    Box::new(Term::Pair(l.clone(), s.clone())),
                    t.clone(),
                ));
            }
            if let Term::Pair(s, t) = &**l {
                out.push(Term::Pair(
                    s.clone(),
                    Box::new(Term::Pair(t.clone(), r.clone())),
                ));
            }
            // Abstraction distribution, collapsing: the annotations must
            // agree up to alpha (not merely up to isomorphism).
            if let (Term::Lam(x, a, bl), Term::Lam(y, b, br)) = (&**l, &**r) {
                if a.alpha_eq(b) {
                    let z = fresh_term_var();
                    out.push(Term::Lam(
                        z.clone(),
                        a.clone(),
                        Box::new(Term::Pair(
                            Box::new(rename_term_var(bl, x, &z)),
                            Box::new(rename_term_var(br, y, &z)),
                        )),
                    ));
                }
            }
            // Application distribution, collapsing: same argument.
            if let (Term::App(f, s), Term::App(g, t)) = (&**l, &**r) {
                if s.alpha_eq(t) {
                    out.push(Term::App(
                        Box::new(Term::Pair(f.clone(), g.clone())),
                        s.clone(),
                    ));
                }
            }
            // Type-abstraction distribution, collapsing.
            if let (Term::TLam(x, bl), Term::TLam(y, br)) = (&**l, &**r) {
                let z = fresh_type_var();
                out.push(Term::TLam(
                    z.clone(),
                    Box::new(Term::Pair(
                        Box::new(bl.subst_type(x, &Type::Var(z.clone()))),
                        Box::new(br.subst_type(y, &Type::Var(z)))
                    )),
                ));
            }
            // Type-application distribution, collapsing: same type.
            if let (Term::TApp(f, a), Term::TApp(g, b)) = (&**l, &**r) {
                if a.alpha_eq(b) {
                    out.push(Term::TApp(
                        Box::new(Term::Pair(f.clone(), g.clone())),
                        a.clone(),
                    ));
                }
            }
        }
        Term::Lam(x, a, body) => {
            // Abstraction distribution, spreading.
            if let Term::Pair(u, v) = &**body {
                out.push(Term::Pair(
                    Box::new(Term::Lam(x.clone(), a.clone(), u.clone())),
                    Box::new(Term::Lam(x.clone(), a.clone(), v.clone())),
                ));
            }
            // Type abstraction hoists out of a term abstraction when it
            // cannot capture the annotation.
            if let Term::TLam(tx, b) = &**body {
                if !a.contains_free(tx) {
                    out.push(Term::TLam(
                        tx.clone(),
                        Box::new(Term::Lam(x.clone(), a.clone(), b.clone())),
                    ));
                }
            }
            // Type application hoists out of a term abstraction.
            if let Term::TApp(f, b) = &**body {
                out.push(Term::TApp(
                    Box::new(Term::Lam(x.clone(), a.clone(), f.clone())),
                    b.clone(),
                ));
            }
        }
        Term::App(f, s) => {
            // Currying: a pair argument splits into two applications.
            if let Term::Pair(u, v) = &**s {
                out.push(Term::App(
                    Box::new(Term::App(f.clone(), u.clone())),
                    v.clone(),
                ));
            }
            // Uncurrying: two arguments merge into a pair.
            if let Term::App(g, u) = &**f {
                out.push(Term::App(
                    g.clone(),
                    Box::new(Term::Pair(u.clone(), Box::new((**s).clone()))),
                ));
            }
            // Application distribution, spreading.
            if let Term::Pair(u, v) = &**f {
                out.push(Term::Pair(
                    Box::new(Term::App(u.clone(), Box::new((**s).clone()))),
                    Box::new(Term::App(v.clone(), Box::new((**s).clone()))),
                ));
            }
        }
        Term::TLam(x, body) => {
            // Type abstraction sinks into a term abstraction.
            if let Term::Lam(v, a, b) = &**body {
                if !a.contains_free(x) {
                    out.push(Term::Lam(
                        v.clone(),
                        a.clone(),
                        Box::new(Term::TLam(x.clone(), b.clone())),
                    ));
                }
            }
            // Type-abstraction distribution, spreading.
            if let Term::Pair(l, r) = &**body {
                out.push(Term::Pair(
                    Box::new(Term::TLam(x.clone(), l.clone())),
                    Box::new(Term::TLam(x.clone(), r.clone())),
                ));
            }
            // A quantifier over a projection folds into the index.
            if let Term::Proj(a, b) = &**body {
                out.push(Term::Proj(
                    Type::Forall(x.clone(), Box::new(a.clone())),
                    Box::new(Term::TLam(x.clone(), b.clone())),
                ));
            }
        }
        Term::TApp(f, b) => {
            // Type application sinks into a term abstraction.
            if let Term::Lam(v, a, body) = &**f {
                out.push(Term::Lam(
                    v.clone(),
                    a.clone(),
                    Box::new(Term::TApp(body.clone(), b.clone())),
                ));
            }
            // Type-application distribution, spreading.
            if let Term::Pair(l, r) = &**f {
                out.push(Term::Pair(
                    Box::new(Term::TApp(l.clone(), b.clone())),
                    Box::new(Term::TApp(r.clone(), b.clone())),
                ));
            }
            // Type application commutes into a quantified projection:
            // guarded by the subject's type being a universal over a
            // conjunction containing the index.
            if let Term::Proj(idx, subject) = &**f {
                if let Type::Forall(x, component) = idx {
                    if universal_conjunction_guard(subject, x, component) {
                        out.push(Term::Proj(
                            component.subst(x, b),
                            Box::new(Term::TApp(subject.clone(), b.clone())),
                        ));
                    }
                }
            }
        }
        Term::Proj(idx, body) => {
            // A quantified index unfolds over a type abstraction.
            if let (Type::Forall(x, a), Term::TLam(y, b)) = (idx, &**body) {
                let z = fresh_type_var();
                out.push(Term::TLam(
                    z.clone(),
                    Box::new(Term::Proj(
                        a.subst(x, &Type::Var(z.clone())),
                        Box::new(b.subst_type(y, &Type::Var(z))),
                    )),
                ));
            }
            // Type application commutes back out of a projection: the
            // index must be re-generalized, so every subset of the
            // occurrences of the applied type is a candidate (the empty
            // subset gives a vacuous quantifier). Candidates failing the
            // typing guard are dropped.
            if let Term::TApp(subject, arg) = &**body {
                if let Ok(subject_ty) = synthesize_open(&Context::default(), subject) {
                    if let Some((w, opened_body)) = forall_strip(&subject_ty) {
                        let target_free = arg.free_vars();
                        let mut counter = 0;
                        let probe = fresh_type_var();
                        replace_target_occurrences(
                            idx,
                            arg,
                            &probe,
                            0,
                            &mut counter,
                            0,
                            &target_free,
                        );
                        let n = counter.min(12);
                        for mask in 0..(1u64 << n) {
                            let z = fresh_type_var();
                            let mut c = 0;
                            let candidate = replace_target_occurrences(
                                idx,
                                arg,
                                &z,
                                mask,
                                &mut c,
                                0,
                                &target_free,
                            );
                            let opened = candidate.subst(&z, &Type::Var(w.clone()));
                            if conj_residual(&opened_body, &opened).is_some() {
                                out.push(Term::TApp(
                                    Box::new(Term::Proj(
                                        Type::Forall(z, Box::new(candidate)),
                                        subject.clone(),
                                    )),
                                    arg.clone(),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// All terms one structural-equivalence step away from `term`: every
/// schema, both orientations, at every subterm position. Type
/// annotations are not rewritten into.
pub fn equiv_neighbors(term: &Term) -> Vec<Term> {
    let mut out = root_equiv(term);
    match term {
        Term::Var(..) => {}
        Term::Lam(x, a, b) => {
            for n in equiv_neighbors(b) {
                out.push(Term::Lam(x.clone(), a.clone(), Box::new(n)));
            }
        }
        Term::App(f, s) => {
            for n in equiv_neighbors(f) {
                out.push(Term::App(Box::new(n), s.clone()));
            }
            for n in equiv_neighbors(s) {
                out.push(Term::App(f.clone(), Box::new(n)));
            }
        }
        Term::Pair(l, r) => {
            for n in equiv_neighbors(l) {
                out.push(Term::Pair(Box::new(n), r.clone()));
            }
            for n in equiv_neighbors(r) {
                out.push(Term::Pair(l.clone(), Box::new(n)));
            }
        }
        Term::Proj(a, b) => {
            for n in equiv_neighbors(b) {
                out.push(Term::Proj(a.clone(), Box::new(n)));
            }
        }
        Term::TLam(x, b) => {
            for n in equiv_neighbors(b) {
                out.push(Term::TLam(x.clone(), Box::new(n)));
            }
        }
        Term::TApp(f, a) => {
            for n in equiv_neighbors(f) {
                out.push(Term::TApp(Box::new(n), a.clone()));
            }
        }
    }
    out
}

/// All one-step reducts of `term` at any position, tagged with the rule
/// that fired. Beta requires the argument's type to match the binder
/// annotation up to isomorphism; projection contracts the left pair
/// component when its type matches the index (commutation in the class
/// reaches the right one). Guard failures are silent.
pub fn head_reduce(term: &Term) -> Vec<(&'static str, Term)> {
    let mut out = Vec::new();
    match term {
        Term::Var(..) => {}
        Term::App(f, s) => {
            if let Term::Lam(x, a, body) = &**f {
                if let Ok(arg_ty) = synthesize_open(&Context::default(), s) {
                    if types_isomorphic(&arg_ty, a) {
                        out.push((RULE_BETA_LAMBDA, body.subst_term(x, s)));
                    }
                }
            }
        }
        Term::TApp(f, b) => {
            if let Term::TLam(x, body) = &**f {
                out.push((RULE_BETA_TYPE, body.subst_type(x, b)));
            }
        }
        Term::Proj(a, p) => {
            if let Term::Pair(l, _) = &**p {
                if let Ok(left_ty) = synthesize_open(&Context::default(), l) {
                    if types_isomorphic(&left_ty, a) {
                        out.push((RULE_PI, (**l).clone()));
                    }
                }
            }
        }
        _ => {}
    }
    match term {
        Term::Var(..) => {}
        Term::Lam(x, a, b) => {
            for (rule, n) in head_reduce(b) {
                out.push((rule, Term::Lam(x.clone(), a.clone(), Box::new(n))));
            }
        }
        Term::App(f, s) => {
            for (rule, n) in head_reduce(f) {
                out.push((rule, Term::App(Box::new(n), s.clone())));
            }
            for (rule, n) in head_reduce(s) {
                out.push((rule, Term::App(f.clone(), Box::new(n))));
            }
        }
        Term::Pair(l, r) => {
            for (rule, n) in head_reduce(l) {
                out.push((rule, Term::Pair(Box::new(n), r.clone())));
            }
            for (rule, n) in head_reduce(r) {
                out.push((rule, Term::Pair(l.clone(), Box::new(n))));
            }
        }
        Term::Proj(a, b) => {
            for (rule, n) in head_reduce(b) {
                out.push((rule, Term::Proj(a.clone(), Box::new(n))));
            }
        }
        Term::TLam(x, b) => {
            for (rule, n) in head_reduce(b) {
                out.push((rule, Term::TLam(x.clone(), Box::new(n))));
            }
        }
        Term::TApp(f, a) => {
            for (rule, n) in head_reduce(f) {
                out.push((rule, Term::TApp(Box::new(n), a.clone())));
            }
        }
    }
    out
}

/// A materialized structural-equivalence class: alpha-canonical members
/// in breadth-first discovery order, with the search tree retained so a
/// rewrite chain from the root to any member can be reproduced.
#[derive(Clone, Debug)]
pub struct EquivClass {
    members: Vec<Term>,
    index: HashMap<Term, usize>,
    parent: Vec<Option<usize>>,
    is_closed: bool,
}

impl EquivClass {
    /// Members, alpha-canonical, in discovery order (the root first).
    pub fn members(&self) -> &[Term] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the search closed and every member is listed; false
    /// when the budget cut it short and members may be missing.
    pub fn is_closed(&self) -> bool {
        self.is_closed
    }

    /// Members materialized (the budget measure).
    pub fn budget_used(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, term: &Term) -> bool {
        self.index.contains_key(&term.alpha_canonical())
    }

    pub fn member_index(&self, term: &Term) -> Option<usize> {
        self.index.get(&term.alpha_canonical()).copied()
    }

    /// The least member — a canonical name for the class when the search
    /// closed.
    pub fn representative(&self) -> &Term {
        self.members.iter().min().expect("classes are nonempty")
    }

    /// The rewrite chain from the root to member `i`, inclusive of both
    /// endpoints; consecutive entries are one structural step apart.
    pub fn witness_chain(&self, i: usize) -> Vec<Term> {
        let mut chain = Vec::new();
        let mut cur = Some(i);
        while let Some(c) = cur {
            chain.push(self.members[c].clone());
            cur = self.parent[c];
        }
        chain.reverse();
        chain
    }
}

/// Breadth-first closure of [`equiv_neighbors`] from `term`, stopping
/// when closed or when `budget` members have been materialized.
pub fn equiv_class(term: &Term, budget: usize) -> EquivClass {
    let budget = budget.max(1);
    let root = term.alpha_canonical();
    let mut members = vec![root.clone()];
    let mut index = HashMap::new();
    index.insert(root, 0usize);
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut queue = VecDeque::new();
    queue.push_back(0usize);
    let mut closed = true;
    'search: while let Some(i) = queue.pop_front() {
        let current = members[i].clone();
        for neighbor in equiv_neighbors(&current) {
            let canon = neighbor.alpha_canonical();
            if index.contains_key(&canon) {
                continue;
            }
            if members.len() >= budget {
                closed = false;
                break 'search;
            }
            index.insert(canon.clone(), members.len());
            parent.push(Some(i));
            members.push(canon);
            queue.push_back(members.len() - 1);
        }
    }
    EquivClass {
        members,
        index,
        parent,
        is_closed: closed,
    }
}

pub(crate) struct TracedReduct {
    pub(crate) member: usize,
    pub(crate) rule: &'static str,
    pub(crate) reduct: Term,
}

/// One-step reducts over all class members, deduplicated alpha-
/// canonically; the first (breadth-first) witness wins.
pub(crate) fn reduce_step_traced(class: &EquivClass) -> Vec<TracedReduct> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, member) in class.members().iter().enumerate() {
        for (rule, reduct) in head_reduce(member) {
            let canon = reduct.alpha_canonical();
            if seen.insert(canon.clone()) {
                out.push(TracedReduct {
                    member: i,
                    rule,
                    reduct: canon,
                });
            }
        }
    }
    out
}

/// The result of one full reduction step from a term: every reduct
/// reachable as "rewrite structurally, then contract one redex",
/// alpha-canonical and sorted. `complete` is false when the class
/// search hit its budget, in which case reducts may be missing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReduceOutcome {
    pub reducts: Vec<Term>,
    pub complete: bool,
}

/// All one-step reducts of `term` modulo structural equivalence. The
/// reducts themselves are not class-expanded.
pub fn reduce_step(term: &Term, budget: usize) -> ReduceOutcome {
    let class = equiv_class(term, budget);
    let set: BTreeSet<Term> = reduce_step_traced(&class)
        .into_iter()
        .map(|t| t.reduct)
        .collect();
    ReduceOutcome {
        reducts: set.into_iter().collect(),
        complete: class.is_closed(),
    }
}

/// Three-valued answer to "are these terms structurally equivalent?".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Distinct,
    Unknown,
}

/// Decides membership of `s` in the class of `r`, within budget.
/// `Unknown` means the class search hit the budget before finding `s`.
pub fn term_equiv(r: &Term, s: &Term, budget: usize) -> Equivalence {
    let class = equiv_class(r, budget);
    if class.contains(s) {
        Equivalence::Equivalent
    } else if class.is_closed() {
        Equivalence::Distinct
    } else {
        Equivalence::Unknown
    }
}

/// One reduction step in a trace: `from` rewrites structurally along
/// `equiv_witness` (inclusive chain, `from` first) to the redex, where
/// `rule` contracts to `to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub from: Term,
    pub equiv_witness: Vec<Term>,
    pub rule: &'static str,
    pub to: Term,
}

/// A reduction from a term to one of its normal forms. `exhaustive` is
/// false when any class or graph search hit its budget, in which case
/// `result` may not be normal or other normal forms may exist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTrace {
    pub steps: Vec<TraceStep>,
    pub result: Term,
    pub exhaustive: bool,
}

/// How [`normalize`] explores the reduction graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Repeatedly contract the least reduct: one reproducible trace.
    Deterministic,
    /// Search the whole graph: one trace per distinct normal form.
    Exhaustive,
}

fn normalize_deterministic(term: &Term, budget: usize) -> ReductionTrace {
    let mut current = term.alpha_canonical();
    let mut steps = Vec::new();
    let mut exhaustive = true;
    loop {
        if steps.len() >= budget {
            exhaustive = false;
            break;
        }
        let class = equiv_class(&current, budget);
        if !class.is_closed() {
            exhaustive = false;
        }
        let traced = reduce_step_traced(&class);
        let Some(best) = traced.into_iter().min_by(|a, b| a.reduct.cmp(&b.reduct)) else {
            break;
        };
        steps.push(TraceStep {
            from: current.clone(),
            equiv_witness: class.witness_chain(best.member),
            rule: best.rule,
            to: best.reduct.clone(),
        });
        current = best.reduct;
    }
    ReductionTrace {
        steps,
        result: current,
        exhaustive,
    }
}

fn normalize_exhaustive(term: &Term, budget: usize) -> Vec<ReductionTrace> {
    struct Node {
        entry: Term,
        class: EquivClass,
        parent: Option<(usize, TraceStep)>,
    }
    let mut exhaustive = true;
    let root_entry = term.alpha_canonical();
    let root_class = equiv_class(&root_entry, budget);
    if !root_class.is_closed() {
        exhaustive = false;
    }
    let mut by_repr: HashMap<Term, usize> = HashMap::new();
    by_repr.insert(root_class.representative().clone(), 0);
    let mut nodes = vec![Node {
        entry: root_entry,
        class: root_class,
        parent: None,
    }];
    let mut queue = VecDeque::new();
    queue.push_back(0usize);
    let mut normal = Vec::new();
    while let Some(i) = queue.pop_front() {
        let traced = reduce_step_traced(&nodes[i].class);
        if traced.is_empty() {
            normal.push(i);
            continue;
        }
        for tr in traced {
            let reduct_class = equiv_class(&tr.reduct, budget);
            if !reduct_class.is_closed() {
                exhaustive = false;
            }
            let repr = reduct_class.representative().clone();
            if by_repr.contains_key(&repr) {
                continue;
            }
            if nodes.len() >= budget {
                exhaustive = false;
                continue;
            }
            let step = TraceStep {
                from: nodes[i].entry.clone(),
                equiv_witness: nodes[i].class.witness_chain(tr.member),
                rule: tr.rule,
                to: tr.reduct.clone(),
            };
            by_repr.insert(repr, nodes.len());
            nodes.push(Node {
                entry: tr.reduct,
                class: reduct_class,
                parent: Some((i, step)),
            });
            queue.push_back(nodes.len() - 1);
        }
    }
    let mut traces: Vec<ReductionTrace> = normal
        .into_iter()
        .map(|n| {
            let mut steps = Vec::new();
            let mut cur = n;
            while let Some((p, step)) = &nodes[cur].parent {
                steps.push(step.clone());
                cur = *p;
            }
            steps.reverse();
            ReductionTrace {
                steps,
                result: nodes[n].entry.clone(),
                exhaustive,
            }
        })
        .collect();
    traces.sort_by(|a, b| a.result.cmp(&b.result));
    traces
}

/// Reduces `term` to normal form(s). Deterministic strategy returns
/// exactly one trace; exhaustive returns one per distinct normal form
/// (classes of normal forms are distinguished by their least member),
/// sorted by result. A term is normal when a closed class search finds
/// no redex; budget exhaustion anywhere marks every returned trace
/// non-exhaustive.
pub fn normalize(term: &Term, strategy: Strategy, budget: usize) -> Vec<ReductionTrace> {
    match strategy {
        Strategy::Deterministic => vec![normalize_deterministic(term, budget)],
        Strategy::Exhaustive => normalize_exhaustive(term, budget),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use crate::syntax::Context;
    use crate::typing::synthesize;

    fn parsed(src: &str) -> (Term, Context) {
        parse_term(src).unwrap()
    }

    fn term(src: &str) -> Term {
        parsed(src).0
    }

    fn assert_equiv(a: &str, b: &str) {
        assert_eq!(
            term_equiv(&term(a), &term(b), CLASS_BUDGET_DEFAULT),
            Equivalence::Equivalent,
            "{a} should be equivalent to {b}"
        );
        assert_eq!(
            term_equiv(&term(b), &term(a), CLASS_BUDGET_DEFAULT),
            Equivalence::Equivalent,
            "{b} should be equivalent to {a}"
        );
    }

    #[test]
    fn pair_commutation_and_association() {
        let class = equiv_class(&term("<x, y> where x : X, y : Y"), 100);
        assert_eq!(class.len(), 2);
        assert!(class.is_closed());
        assert!(class.contains(&term("<y, x> where x : X, y : Y")));
        assert_equiv(
            "<x, <y, z>> where x : X, y : Y, z : Z",
            "<<x, y>, z> where x : X, y : Y, z : Z",
        );
    }

    #[test]
    fn a_variable_is_alone_in_its_class() {
        let class = equiv_class(&term("x where x : X"), 100);
        assert_eq!(class.len(), 1);
        assert!(class.is_closed());
    }

    #[test]
    fn abstraction_over_a_pair_closes_at_four_members() {
        let class = equiv_class(&term("lam x : X. <y, z> where y : Y, z : Z"), 100);
        assert!(class.is_closed());
        assert_eq!(class.len(), 4);
        assert!(class.contains(&term("<lam x : X. y, lam x : X. z> where y : Y, z : Z")));
        assert!(class.contains(&term("lam x : X. <z, y> where y : Y, z : Z")));
        assert!(class.contains(&term("<lam x : X. z, lam x : X. y> where y : Y, z : Z")));
    }

    #[test]
    fn currying_relates_pair_and_spine_application() {
        assert_equiv(
            "f <s, t> where f : X -> Y -> Z, s : X, t : Y",
            "f s t where f : X -> Y -> Z, s : X, t : Y",
        );
    }

    #[test]
    fn application_distributes_over_pairs() {
        assert_equiv(
            "<f, g> s where f : X -> Y, g : X -> Z, s : X",
            "<f s, g s> where f : X -> Y, g : X -> Z, s : X",
        );
    }

    #[test]
    fn distribution_requires_alpha_equal_annotations() {
        // <lam x:X.y, lam x:Y.y> must NOT collapse: annotations differ.
        let t = term("<lam x : X. y, lam x : Y. y> where y : Z");
        let collapses = equiv_class(&t, 100)
            .members()
            .iter()
            .any(|m| matches!(m, Term::Lam(..)));
        assert!(!collapses);
        // With isomorphic-but-unequal annotations it must also not fire.
        let t = term("<lam x : X -> Y /\\ Z. y, lam x : (X -> Y) /\\ (X -> Z). y> where y : W");
        let collapses = equiv_class(&t, 100)
            .members()
            .iter()
            .any(|m| matches!(m, Term::Lam(..)));
        assert!(!collapses);
    }

    #[test]
    fn type_abstraction_commutes_with_term_abstraction() {
        assert_equiv("tlam X. lam y : Z. y", "lam y : Z. tlam X. y");
        // Blocked when the annotation mentions the quantified variable.
        let t = term("tlam X. lam x : X. x");
        let class = equiv_class(&t, 100);
        assert_eq!(class.len(), 1);
    }

    #[test]
    fn type_application_commutes_with_term_abstraction() {
        assert_equiv(
            "(lam x : X. r) [Y] where r : forall Z. Z",
            "lam x : X. r [Y] where r : forall Z. Z",
        );
    }

    #[test]
    fn type_abstraction_distributes_over_pairs() {
        assert_equiv(
            "tlam X. <y, z> where y : Y, z : Z",
            "<tlam X. y, tlam W. z> where y : Y, z : Z",
        );
    }

    #[test]
    fn type_application_distributes_over_pairs() {
        assert_equiv(
            "<r, s> [A] where r : forall X. X, s : forall X. X -> X",
            "<r [A], s [A]> where r : forall X. X, s : forall X. X -> X",
        );
    }

    #[test]
    fn quantified_projection_commutes_with_type_abstraction() {
        assert_equiv(
            "pi [forall X. X -> X] (tlam X. <lam x : X. x, r>) where r : A",
            "tlam X. pi [X -> X] <lam x : X. x, r> where r : A",
        );
    }

    #[test]
    fn quantified_projection_commutes_with_type_application() {
        let quantified = "(pi [forall X. X -> X] r) [A] where r : forall X. (X -> X) /\\ B";
        let instantiated = "pi [A -> A] (r [A]) where r : forall X. (X -> X) /\\ B";
        assert_equiv(quantified, instantiated);
    }

    #[test]
    fn beta_contracts_a_matching_pair_argument() {
        let t = term("(lam x : X /\\ Y. x) <a, b> where a : X, b : Y");
        let reds = head_reduce(&t);
        assert_eq!(reds.len(), 1);
        assert_eq!(reds[0].0, RULE_BETA_LAMBDA);
        assert!(reds[0].1.alpha_eq(&term("<a, b> where a : X, b : Y")));
    }

    #[test]
    fn beta_needs_the_annotation_to_match() {
        // The binder expects X, the pair has X /\ Y: no head redex.
        let t = term("(lam x : X. u) <a, b> where u : Z, a : X, b : Y");
        assert!(head_reduce(&t).is_empty());
        // But currying in the class exposes (lam x:X.u) a, which fires.
        let out = reduce_step(&t, 1_000);
        assert!(out.complete);
        assert!(out
            .reducts
            .iter()
            .any(|r| r.alpha_eq(&term("u b where u : Z, b : Y"))));
        // Plain type mismatch stays silent.
        let t = term("(lam x : X. x) y where y : Y");
        assert!(head_reduce(&t).is_empty());
    }

    #[test]
    fn projection_contracts_the_left_component_only() {
        let t = term("pi [X] <a, b> where a : X, b : X");
        let reds = head_reduce(&t);
        assert_eq!(reds.len(), 1);
        assert!(reds[0].1.alpha_eq(&term("a where a : X")));
        // The full step sees both components via commutation.
        let out = reduce_step(&t, 1_000);
        assert_eq!(out.reducts.len(), 2);
    }

    #[test]
    fn type_beta_contract_is_unguarded() {
        let t = term("(tlam X. lam x : X. x) [Y]");
        let reds = head_reduce(&t);
        assert_eq!(reds.len(), 1);
        assert_eq!(reds[0].0, RULE_BETA_TYPE);
        assert!(reds[0].1.alpha_eq(&term("lam x : Y. x")));
    }

    #[test]
    fn a_normal_variable_has_no_reducts() {
        let out = reduce_step(&term("x where x : X"), 100);
        assert!(out.reducts.is_empty());
        assert!(out.complete);
        let traces = normalize(&term("x where x : X"), Strategy::Deterministic, 100);
        assert_eq!(traces.len(), 1);
        assert!(traces[0].steps.is_empty());
        assert!(traces[0].exhaustive);
        assert!(traces[0].result.alpha_eq(&term("x where x : X")));
    }

    #[test]
    fn curried_application_to_a_pair_reduces_to_the_flipped_application() {
        let t = term("(lam f : X -> Y. lam x : X. f x) <g, r> where g : X -> Y, r : X");
        let traces = normalize(&t, Strategy::Deterministic, 1_000);
        assert_eq!(traces.len(), 1);
        assert!(traces[0].exhaustive);
        assert!(traces[0].result.alpha_eq(&term("g r where g : X -> Y, r : X")));
        assert_eq!(traces[0].steps.len(), 2);
        for step in &traces[0].steps {
            assert_eq!(step.rule, RULE_BETA_LAMBDA);
            assert_eq!(step.equiv_witness.first(), Some(&step.from));
        }
    }

    #[test]
    fn flipped_arguments_still_reach_the_same_normal_form() {
        let t = term("(lam f : X -> Y. lam x : X. f x) r g where g : X -> Y, r : X");
        let traces = normalize(&t, Strategy::Exhaustive, 2_000);
        assert!(traces.iter().all(|tr| tr.exhaustive));
        assert_eq!(traces.len(), 1);
        assert!(traces[0].result.alpha_eq(&term("g r where g : X -> Y, r : X")));
    }

    #[test]
    fn exhaustive_search_finds_both_projections() {
        let t = term("pi [X] <a, b> where a : X, b : X");
        let traces = normalize(&t, Strategy::Exhaustive, 1_000);
        assert_eq!(traces.len(), 2);
        let results: Vec<&Term> = traces.iter().map(|tr| &tr.result).collect();
        assert!(results.iter().any(|r| r.alpha_eq(&term("a where a : X"))));
        assert!(results.iter().any(|r| r.alpha_eq(&term("b where b : X"))));
    }

    #[test]
    fn annotation_mismatch_determinizes_projection() {
        // pi [B -> A] <lam x:B.r, lam x:C.s> t: only the B-annotated
        // component can be projected, so exactly one normal form.
        let t = term(
            "pi [B -> A] <lam x : B. r, lam x : C. s> t where r : A, s : A, t : B",
        );
        let traces = normalize(&t, Strategy::Exhaustive, 2_000);
        assert_eq!(traces.len(), 1);
        assert!(traces[0].result.alpha_eq(&term("r where r : A")));
    }

    #[test]
    fn distinct_variables_are_distinct() {
        assert_eq!(
            term_equiv(
                &term("x where x : X"),
                &term("y where y : X"),
                CLASS_BUDGET_DEFAULT
            ),
            Equivalence::Distinct
        );
    }

    #[test]
    fn budget_exhaustion_reports_unknown() {
        // A class of size 4 searched with budget 2 cannot prove distinctness.
        let a = term("lam x : X. <y, z> where y : Y, z : Z");
        let b = term("w where w : W");
        assert_eq!(term_equiv(&a, &b, 2), Equivalence::Unknown);
    }

    #[test]
    fn every_neighbor_preserves_the_synthesized_type() {
        let samples = [
            "(lam f : X -> Y. lam x : X. f x) <g, r> where g : X -> Y, r : X",
            "tlam X. <lam x : X. x, r> where r : A",
            "pi [forall X. X -> X] (tlam X. <lam x : X. x, r>) [A] where r : forall X. (X -> X) /\\ B",
            "<r, s> [A] where r : forall X. X, s : forall X. X -> X",
        ];
        for src in samples {
            let (t, ctx) = parsed(src);
            let ty = synthesize(&ctx, &t).unwrap();
            for member in equiv_class(&t, 1_000).members() {
                let mty = synthesize_open(&Context::default(), member).unwrap();
                assert!(
                    types_isomorphic(&ty, &mty),
                    "{src}: member {member} has type {mty}, expected {ty}"
                );
            }
            for r in reduce_step(&t, 1_000).reducts {
                let rty = synthesize_open(&Context::default(), &r).unwrap();
                assert!(
                    types_isomorphic(&ty, &rty),
                    "{src}: reduct {r} has type {rty}, expected {ty}"
                );
            }
        }
    }

    #[test]
    fn witness_chains_link_contiguously() {
        let t = term("lam x : X. <y, z> where y : Y, z : Z");
        let class = equiv_class(&t, 100);
        for i in 0..class.len() {
            let chain = class.witness_chain(i);
            assert_eq!(chain.first().unwrap(), &class.members()[0]);
            assert_eq!(chain.last().unwrap(), &class.members()[i]);
            for pair in chain.windows(2) {
                let neighbors: Vec<Term> = equiv_neighbors(&pair[0])
                    .into_iter()
                    .map(|n| n.alpha_canonical())
                    .collect();
                assert!(neighbors.contains(&pair[1]));
            }
        }
    }
}
