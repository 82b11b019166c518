//! Deterministic random generation of types and well-typed terms.
//!
//! Terms are built goal-directed: pick a goal type, then run the typing
//! rules backwards — introductions follow the goal's shape, and a
//! configurable share of nodes are elimination detours (apply a
//! function to get the goal, project the goal out of a wider
//! conjunction, instantiate a universal). Binder names come from
//! generator-local counters, so every binder is fresh by construction
//! and generalization never traps a context variable. Free variables
//! are accumulated into the returned context with exactly the
//! annotation used at their occurrences.
//!
//! Everything is a pure function of `(size, seed)`: the generator owns
//! its RNG (a seeded ChaCha8) and never consults global state, so
//! suites replay identically.

use crate::syntax::{Context, Term, TermVar, Type, TypeVar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FREE_TYPE_POOL: [&str; 4] = ["X", "Y", "Z", "W"];

/// Number of constructors in a type.
pub fn type_nodes(ty: &Type) -> usize {
    match ty {
        Type::Var(_) => 1,
        Type::Arrow(a, b) | Type::Conj(a, b) => 1 + type_nodes(a) + type_nodes(b),
        Type::Forall(_, a) => 1 + type_nodes(a),
    }
}

struct TypeGen<'a> {
    rng: &'a mut ChaCha8Rng,
    next_binder: u32,
}

impl TypeGen<'_> {
    fn variable(&mut self, scope: &[TypeVar]) -> Type {
        if !scope.is_empty() && self.rng.gen_bool(0.4) {
            let i = self.rng.gen_range(0..scope.len());
            Type::Var(scope[i].clone())
        } else {
            let i = self.rng.gen_range(0..FREE_TYPE_POOL.len());
            Type::Var(TypeVar::new(FREE_TYPE_POOL[i]))
        }
    }

    fn quantified(&mut self, budget: usize, scope: &mut Vec<TypeVar>) -> Type {
        let name = TypeVar::new(&format!("T{}", self.next_binder));
        self.next_binder += 1;
        scope.push(name.clone());
        let body = self.generate(budget - 1, scope);
        scope.pop();
        Type::Forall(name, Box::new(body))
    }

    fn generate(&mut self, budget: usize, scope: &mut Vec<TypeVar>) -> Type {
        if budget <= 1 {
            return self.variable(scope);
        }
        if budget == 2 {
            return if self.rng.gen_bool(0.5) {
                self.quantified(budget, scope)
            } else {
                self.variable(scope)
            };
        }
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let left = self.rng.gen_range(1..=budget - 2);
                let a = self.generate(left, scope);
                let b = self.generate(budget - 1 - left, scope);
                Type::Arrow(Box::new(a), Box::new(b))
            }
            4..=6 => {
                let left = self.rng.gen_range(1..=budget - 2);
                let a = self.generate(left, scope);
                let b = self.generate(budget - 1 - left, scope);
                Type::Conj(Box::new(a), Box::new(b))
            }
            _ => self.quantified(budget, scope),
        }
    }
}

/// A random type with at most `max_nodes` constructors, deterministic
/// in `(max_nodes, seed)`. Free variables come from a fixed four-name
/// pool; quantified variables are numbered.
pub fn gen_type(max_nodes: usize, seed: u64) -> Type {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ max_nodes as u64);
    let mut gen = TypeGen {
        rng: &mut rng,
        next_binder: 0,
    };
    let budget = max_nodes.max(1);
    let target = gen.rng.gen_range(1..=budget);
    gen.generate(target, &mut Vec::new())
}

struct TermGen {
    rng: ChaCha8Rng,
    /// Free variables used so far, in first-use order.
    ctx: Vec<(TermVar, Type)>,
    /// Enclosing term binders, innermost last.
    term_scope: Vec<(TermVar, Type)>,
    /// Enclosing type binders.
    type_scope: Vec<TypeVar>,
    next_term_binder: u32,
    next_type_binder: u32,
    next_free: u32,
}

impl TermGen {
    fn fresh_type(&mut self, budget: usize) -> Type {
        let mut gen = TypeGen {
            rng: &mut self.rng,
            next_binder: 0,
        };
        // Offset quantifier numbering so type-level binders can never
        // collide with the term generator's own type binders.
        gen.next_binder = 1000 + self.next_type_binder * 16;
        let mut scope = self.type_scope.clone();
        gen.generate(budget, &mut scope)
    }

    fn mentions_scoped_variable(&self, ty: &Type) -> bool {
        self.type_scope.iter().any(|x| ty.contains_free(x))
    }

    /// The smallest inhabitant of `goal`: a scoped variable of that
    /// exact type if one exists, otherwise a context variable — via a
    /// polymorphic helper when the goal mentions a quantified variable
    /// that must not leak into the context.
    fn leaf(&mut self, goal: &Type) -> Term {
        if let Some((v, ty)) = self
            .term_scope
            .iter()
            .rev()
            .find(|(_, ty)| ty.alpha_eq(goal))
        {
            return Term::Var(v.clone(), ty.clone());
        }
        if self.mentions_scoped_variable(goal) {
            let poly = Type::Forall(
                TypeVar::new("P"),
                Box::new(Type::Var(TypeVar::new("P"))),
            );
            let helper = self.context_var(&poly);
            return Term::TApp(Box::new(helper), goal.clone());
        }
        self.context_var(goal)
    }

    fn context_var(&mut self, ty: &Type) -> Term {
        if let Some((v, existing)) = self.ctx.iter().find(|(_, t)| t.alpha_eq(ty)) {
            return Term::Var(v.clone(), existing.clone());
        }
        let v = TermVar::new(&format!("g{}", self.next_free));
        self.next_free += 1;
        self.ctx.push((v.clone(), ty.clone()));
        Term::Var(v, ty.clone())
    }

    /// Subtrees of `goal` not lying under any of `goal`'s own binders —
    /// safe targets for re-abstraction.
    fn abstractable_subtrees(goal: &Type, out: &mut Vec<Type>) {
        out.push(goal.clone());
        match goal {
            Type::Var(_) | Type::Forall(..) => {}
            Type::Arrow(a, b) | Type::Conj(a, b) => {
                Self::abstractable_subtrees(a, out);
                Self::abstractable_subtrees(b, out);
            }
        }
    }

    fn replace_subtree(ty: &Type, target: &Type, with: &TypeVar) -> Type {
        if ty == target {
            return Type::Var(with.clone());
        }
        match ty {
            Type::Var(_) => ty.clone(),
            Type::Forall(..) => ty.clone(),
            Type::Arrow(a, b) => Type::Arrow(
                Box::new(Self::replace_subtree(a, target, with)),
                Box::new(Self::replace_subtree(b, target, with)),
            ),
            Type::Conj(a, b) => Type::Conj(
                Box::new(Self::replace_subtree(a, target, with)),
                Box::new(Self::replace_subtree(b, target, with)),
            ),
        }
    }

    fn generate(&mut self, goal: &Type, size: usize) -> Term {
        if size <= 1 {
            return self.leaf(goal);
        }
        // Elimination detours take over a share of the nodes; the rest
        // follow the goal's own shape.
        let detour = self.rng.gen_bool(0.35);
        if detour {
            return match self.rng.gen_range(0..4) {
                0 | 1 => self.eliminate_application(goal, size),
                2 => self.eliminate_projection(goal, size),
                _ => self.eliminate_instantiation(goal, size),
            };
        }
        match goal {
            Type::Arrow(a, b) => {
                let x = TermVar::new(&format!("b{}", self.next_term_binder));
                self.next_term_binder += 1;
                self.term_scope.push((x.clone(), (**a).clone()));
                let body = self.generate(b, size - 1);
                self.term_scope.pop();
                Term::Lam(x, (**a).clone(), Box::new(body))
            }
            Type::Conj(a, b) => {
                let left_size = 1 + (size - 2) / 2;
                let l = self.generate(a, left_size);
                let r = self.generate(b, size - 1 - left_size);
                Term::Pair(Box::new(l), Box::new(r))
            }
            Type::Forall(x, body) => {
                let fresh = TypeVar::new(&format!("T{}", self.next_type_binder));
                self.next_type_binder += 1;
                let opened = body.subst(x, &Type::Var(fresh.clone()));
                self.type_scope.push(fresh.clone());
                let inner = self.generate(&opened, size - 1);
                self.type_scope.pop();
                Term::TLam(fresh, Box::new(inner))
            }
            Type::Var(_) => {
                if self.rng.gen_bool(0.7) {
                    self.eliminate_application(goal, size)
                } else {
                    self.eliminate_projection(goal, size)
                }
            }
        }
    }

    /// Builds `goal` as an application. A share of the domains are
    /// conjunctions, delivered either as a literal pair or curried —
    /// both views are interchangeable for the checker.
    fn eliminate_application(&mut self, goal: &Type, size: usize) -> Term {
        let fun_size = 1 + (size.saturating_sub(2)) * 3 / 5;
        let arg_size = (size.saturating_sub(1 + fun_size)).max(1);
        if self.rng.gen_bool(0.3) {
            let d1 = self.fresh_type(2);
            let d2 = self.fresh_type(2);
            let dom = Type::Conj(Box::new(d1.clone()), Box::new(d2.clone()));
            let fun_ty = Type::Arrow(Box::new(dom), Box::new(goal.clone()));
            let fun = self.generate(&fun_ty, fun_size);
            let left_size = 1 + arg_size.saturating_sub(1) / 2;
            let a1 = self.generate(&d1, left_size);
            let a2 = self.generate(&d2, arg_size.saturating_sub(left_size).max(1));
            if self.rng.gen_bool(0.5) {
                Term::App(
                    Box::new(fun),
                    Box::new(Term::Pair(Box::new(a1), Box::new(a2))),
                )
            } else {
                Term::App(Box::new(Term::App(Box::new(fun), Box::new(a1))), Box::new(a2))
            }
        } else {
            let dom = self.fresh_type(3);
            let fun_ty = Type::Arrow(Box::new(dom.clone()), Box::new(goal.clone()));
            let fun = self.generate(&fun_ty, fun_size);
            let arg = self.generate(&dom, arg_size);
            Term::App(Box::new(fun), Box::new(arg))
        }
    }

    /// Builds `goal` by projecting it out of a wider conjunction.
    fn eliminate_projection(&mut self, goal: &Type, size: usize) -> Term {
        let other = self.fresh_type(3);
        let subject_ty = if self.rng.gen_bool(0.5) {
            Type::Conj(Box::new(goal.clone()), Box::new(other))
        } else {
            Type::Conj(Box::new(other), Box::new(goal.clone()))
        };
        let subject = self.generate(&subject_ty, size.saturating_sub(1).max(1));
        Term::Proj(goal.clone(), Box::new(subject))
    }

    /// Builds `goal` by instantiating a universal: a subtree of the
    /// goal is abstracted into the quantifier and re-applied.
    fn eliminate_instantiation(&mut self, goal: &Type, size: usize) -> Term {
        let mut candidates = Vec::new();
        Self::abstractable_subtrees(goal, &mut candidates);
        let target = candidates[self.rng.gen_range(0..candidates.len())].clone();
        let x = TypeVar::new(&format!("T{}", self.next_type_binder));
        self.next_type_binder += 1;
        let abstracted = Self::replace_subtree(goal, &target, &x);
        let fun_ty = Type::Forall(x, Box::new(abstracted));
        let fun = self.generate(&fun_ty, size.saturating_sub(1).max(1));
        Term::TApp(Box::new(fun), target)
    }
}

/// A well-typed term of roughly `size` constructors together with the
/// context binding its free variables. Deterministic in `(size, seed)`;
/// the output always synthesizes successfully under the returned
/// context.
pub fn gen_typed_term(size: usize, seed: u64) -> (Context, Term) {
    let size = size.max(1);
    let mut gen = TermGen {
        rng: ChaCha8Rng::seed_from_u64(
            seed.wrapping_mul(0xD134_2543_DE82_EF95).wrapping_add(size as u64),
        ),
        ctx: Vec::new(),
        term_scope: Vec::new(),
        type_scope: Vec::new(),
        next_term_binder: 0,
        next_type_binder: 0,
        next_free: 0,
    };
    let goal_nodes = (size / 2).clamp(1, 6);
    let goal_budget = gen.rng.gen_range(1..=goal_nodes);
    let goal = {
        let mut tg = TypeGen {
            rng: &mut gen.rng,
            next_binder: 500,
        };
        tg.generate(goal_budget, &mut Vec::new())
    };
    let term = gen.generate(&goal, size);
    let mut ctx = Context::default();
    for (v, ty) in gen.ctx {
        ctx.insert(v, ty);
    }
    (ctx, term)
}
