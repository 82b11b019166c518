//! Type synthesis for annotated terms, with isomorphic types treated as
//! equal.
//!
//! Synthesis is bottom-up and syntax-directed. Conversion between
//! isomorphic types never appears as a separate step: it is absorbed into
//! the three residual operations of [`crate::iso`] — application checks
//! the argument against the function type with [`arrow_residual`],
//! projection locates its component with [`conj_residual`], and type
//! application strips a quantifier with [`forall_strip`]. Two synthesized
//! types for the same term are therefore equal only up to isomorphism,
//! and [`check`] compares with [`types_isomorphic`].
//!
//! Because every variable occurrence carries its type, an explicit
//! context is redundant; the checker still accepts one and verifies
//! occurrences against it. In closed mode ([`synthesize`]) every free
//! variable must be bound by the context; in open mode
//! ([`synthesize_open`]) unbound variables stand on their annotations,
//! which must agree (up to isomorphism) across occurrences.

use crate::iso::{arrow_residual, canonicalize, conj_residual, forall_strip, types_isomorphic};
use crate::syntax::{arrow, conj, Context, Term, TermVar, Type, TypeVar};
use std::collections::BTreeMap;
use std::fmt;

/// One step from a term to its immediate subterm, used to address error
/// locations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathStep {
    LamBody,
    AppFun,
    AppArg,
    PairLeft,
    PairRight,
    ProjBody,
    TLamBody,
    TAppFun,
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PathStep::LamBody => "lam-body",
            PathStep::AppFun => "app-fun",
            PathStep::AppArg => "app-arg",
            PathStep::PairLeft => "pair-left",
            PathStep::PairRight => "pair-right",
            PathStep::ProjBody => "proj-body",
            PathStep::TLamBody => "tlam-body",
            PathStep::TAppFun => "tapp-fun",
        };
        f.write_str(s)
    }
}

/// Path from the root of the checked term to the subterm a rule failed
/// at. Empty means the root itself.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TermPath(pub Vec<PathStep>);

impl fmt::Display for TermPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("<root>");
        }
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

/// What went wrong. Exactly one kind per failure; the variant names the
/// violated rule's expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeErrorKind {
    UnboundVariable,
    AnnotationMismatch,
    NotAnArrow,
    NotAConjunction,
    NotAUniversal,
    EscapingTypeVariable,
    ProjectionTypeNotPresent,
}

/// A synthesis failure: its kind, the innermost failing subterm
/// (leftmost on ties — subterms are visited left to right and the first
/// error wins), and a human-readable detail line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub path: TermPath,
    pub detail: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.kind, self.path, self.detail)
    }
}

impl std::error::Error for TypeError {}

struct Checker<'a> {
    ctx: &'a Context,
    closed: bool,
    /// Annotations adopted for context-free variables (open mode only);
    /// later occurrences must agree up to isomorphism.
    free_seen: BTreeMap<TermVar, Type>,
    path: Vec<PathStep>,
}

impl Checker<'_> {
    fn fail(&self, kind: TypeErrorKind, detail: String) -> TypeError {
        TypeError {
            kind,
            path: TermPath(self.path.clone()),
            detail,
        }
    }

    fn synthesize(
        &mut self,
        term: &Term,
        scope: &mut Vec<(TermVar, Type)>,
    ) -> Result<Type, TypeError> {
        match term {
            Term::Var(v, ann) => {
                let binding = scope
                    .iter()
                    .rev()
                    .find(|(name, _)| name == v)
                    .map(|(_, ty)| ty)
                    .or_else(|| self.ctx.get(v));
                match binding {
                    Some(bound) => {
                        if !types_isomorphic(ann, bound) {
                            return Err(self.fail(
                                TypeErrorKind::AnnotationMismatch,
                                format!("{v} is annotated {ann} but bound with type {bound}"),
                            ));
                        }
                    }
                    None if self.closed => {
                        return Err(self.fail(
                            TypeErrorKind::UnboundVariable,
                            format!("{v} is not bound in the context"),
                        ));
                    }
                    None => {
                        if let Some(seen) = self.free_seen.get(v) {
                            if !types_isomorphic(ann, seen) {
                                return Err(self.fail(
                                    TypeErrorKind::AnnotationMismatch,
                                    format!(
                                        "{v} is annotated {ann} here but {seen} elsewhere"
                                    ),
                                ));
                            }
                        } else {
                            self.free_seen.insert(v.clone(), ann.clone());
                        }
                    }
                }
                Ok(ann.clone())
            }
            Term::Lam(v, a, body) => {
                scope.push((v.clone(), a.clone()));
                self.path.push(PathStep::LamBody);
                let body_ty = self.synthesize(body, scope);
                self.path.pop();
                scope.pop();
                Ok(arrow(a.clone(), body_ty?))
            }
            Term::App(fun, argm) => {
                self.path.push(PathStep::AppFun);
                let fun_ty = self.synthesize(fun, scope);
                self.path.pop();
                let fun_ty = fun_ty?;
                self.path.push(PathStep::AppArg);
                let arg_ty = self.synthesize(argm, scope);
                self.path.pop();
                let arg_ty = arg_ty?;
                arrow_residual(&fun_ty, &arg_ty).ok_or_else(|| {
                    self.fail(
                        TypeErrorKind::NotAnArrow,
                        format!("cannot apply a term of type {fun_ty} to an argument of type {arg_ty}"),
                    )
                })
            }
            Term::Pair(l, r) => {
                self.path.push(PathStep::PairLeft);
                let lt = self.synthesize(l, scope);
                self.path.pop();
                let lt = lt?;
                self.path.push(PathStep::PairRight);
                let rt = self.synthesize(r, scope);
                self.path.pop();
                Ok(conj(lt, rt?))
            }
            Term::Proj(a, body) => {
                self.path.push(PathStep::ProjBody);
                let body_ty = self.synthesize(body, scope);
                self.path.pop();
                let body_ty = body_ty?;
                if conj_residual(&body_ty, a).is_some() {
                    Ok(a.clone())
                } else if canonicalize(&body_ty).primes().len() <= 1 {
                    Err(self.fail(
                        TypeErrorKind::NotAConjunction,
                        format!("cannot project out of the prime type {body_ty}"),
                    ))
                } else {
                    Err(self.fail(
                        TypeErrorKind::ProjectionTypeNotPresent,
                        format!("{body_ty} has no component {a}"),
                    ))
                }
            }
            Term::TLam(x, body) => {
                self.path.push(PathStep::TLamBody);
                let body_ty = self.synthesize(body, scope);
                self.path.pop();
                let body_ty = body_ty?;
                let mut bound = Vec::new();
                if escapes(x, body, &mut bound) {
                    return Err(self.fail(
                        TypeErrorKind::EscapingTypeVariable,
                        format!("{x} occurs in the type of a free variable of the body"),
                    ));
                }
                Ok(Type::Forall(x.clone(), Box::new(body_ty)))
            }
            Term::TApp(fun, b) => {
                self.path.push(PathStep::TAppFun);
                let fun_ty = self.synthesize(fun, scope);
                self.path.pop();
                let fun_ty = fun_ty?;
                match forall_strip(&fun_ty) {
                    Some((x, c)) => Ok(c.subst(&x, b)),
                    None => Err(self.fail(
                        TypeErrorKind::NotAUniversal,
                        format!("type application requires a universal type, found {fun_ty}"),
                    )),
                }
            }
        }
    }
}

/// Does `x` occur free in the annotation of any term variable that is
/// free in `term`? This is the side condition of quantifier
/// introduction: the generalized variable must not appear in the types
/// of the surrounding context, and those types are exactly the
/// annotations of the free occurrences. `bound` carries the term
/// variables bound within `term` so far.
fn escapes(x: &TypeVar, term: &Term, bound: &mut Vec<TermVar>) -> bool {
    match term {
        Term::Var(v, ann) => !bound.contains(v) && ann.contains_free(x),
        Term::Lam(v, _, body) => {
            bound.push(v.clone());
            let hit = escapes(x, body, bound);
            bound.pop();
            hit
        }
        Term::App(f, a) => escapes(x, f, bound) || escapes(x, a, bound),
        Term::Pair(l, r) => escapes(x, l, bound) || escapes(x, r, bound),
        Term::Proj(_, body) => escapes(x, body, bound),
        // A shadowing quantifier captures deeper occurrences of the name.
        Term::TLam(y, body) => y != x && escapes(x, body, bound),
        Term::TApp(f, _) => escapes(x, f, bound),
    }
}

fn run(ctx: &Context, term: &Term, closed: bool) -> Result<Type, TypeError> {
    let mut checker = Checker {
        ctx,
        closed,
        free_seen: BTreeMap::new(),
        path: Vec::new(),
    };
    checker.synthesize(term, &mut Vec::new())
}

/// Synthesizes the type of `term`. Every free term variable must be
/// bound by `ctx`, and each occurrence's annotation must match its
/// binding up to isomorphism.
pub fn synthesize(ctx: &Context, term: &Term) -> Result<Type, TypeError> {
    run(ctx, term, true)
}

/// Like [`synthesize`], but variables missing from `ctx` are accepted on
/// their annotations, which must agree across occurrences up to
/// isomorphism. Used to type subterms in isolation.
pub fn synthesize_open(ctx: &Context, term: &Term) -> Result<Type, TypeError> {
    run(ctx, term, false)
}

/// Does `term` have type `a` (up to isomorphism)? Errors propagate from
/// synthesis; `Ok(false)` means the term is well-typed at a
/// non-isomorphic type.
pub fn check(ctx: &Context, term: &Term, a: &Type) -> Result<bool, TypeError> {
    Ok(types_isomorphic(&synthesize(ctx, term)?, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_term, parse_type};
    use crate::syntax::{tlam, tvar, var};

    fn parsed(src: &str) -> (Term, Context) {
        parse_term(src).unwrap()
    }

    fn t(src: &str) -> Type {
        parse_type(src).unwrap()
    }

    fn syn(src: &str) -> Result<Type, TypeError> {
        let (term, ctx) = parsed(src);
        synthesize(&ctx, &term)
    }

    #[test]
    fn curried_function_applies_to_a_pair() {
        let ty = syn("(lam f : X -> Y. lam x : X. f x) <g, r> where g : X -> Y, r : X").unwrap();
        assert!(types_isomorphic(&ty, &t("Y")));
    }

    #[test]
    fn pair_argument_feeds_a_curried_function() {
        let ty = syn("f <a, b> where f : X -> Y -> Z, a : X, b : Y").unwrap();
        assert!(types_isomorphic(&ty, &t("Z")));
    }

    #[test]
    fn lambda_returning_a_pair_projects_to_an_arrow() {
        let ty = syn("pi [X -> Y] (lam x : X. <u, v>) where u : Y, v : Z").unwrap();
        assert_eq!(ty, t("X -> Y"));
    }

    #[test]
    fn check_accepts_the_uncurried_view_of_a_curried_abstraction() {
        let (term, ctx) = parsed("lam f : X -> Y. lam x : X. f x");
        assert_eq!(check(&ctx, &term, &t("(X -> Y) /\\ X -> Y")), Ok(true));
        assert_eq!(check(&ctx, &term, &t("(X -> Y) -> X -> Y")), Ok(true));
        assert_eq!(check(&ctx, &term, &t("X -> Y")), Ok(false));
    }

    #[test]
    fn variable_types_to_its_annotation() {
        let (term, ctx) = parsed("x where x : X");
        assert_eq!(synthesize(&ctx, &term), Ok(t("X")));
        assert_eq!(check(&ctx, &term, &t("X")), Ok(true));
        assert_eq!(check(&ctx, &term, &t("Y")), Ok(false));
    }

    #[test]
    fn type_application_instantiates() {
        let ty = syn("x [Y] where x : forall X. X -> X").unwrap();
        assert!(types_isomorphic(&ty, &t("Y -> Y")));
        // Instantiation reaches under an outer domain.
        let ty = syn("x [Z] where x : Y -> forall X. X").unwrap();
        assert!(types_isomorphic(&ty, &t("Y -> Z")));
    }

    #[test]
    fn generalization_succeeds_over_internally_bound_variables() {
        let (term, ctx) = parsed("tlam X. lam x : X. x");
        assert!(ctx.is_empty());
        let ty = synthesize(&ctx, &term).unwrap();
        assert!(types_isomorphic(&ty, &t("forall X. X -> X")));
    }

    #[test]
    fn generalization_over_a_free_variable_type_is_rejected() {
        let (term, ctx) = parsed("tlam X. x where x : X");
        let err = synthesize(&ctx, &term).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::EscapingTypeVariable);
        assert_eq!(err.path, TermPath(Vec::new()));
    }

    #[test]
    fn shadowing_quantifier_still_captures_the_escape() {
        // tlam X. (tlam X. x^X): the inner quantifier is the one the
        // occurrence refers to, so it is the inner rule that fails.
        let term = tlam("X", tlam("X", var("x", tvar("X"))));
        let err = synthesize_open(&Context::default(), &term).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::EscapingTypeVariable);
        assert_eq!(err.path, TermPath(vec![PathStep::TLamBody]));
    }

    #[test]
    fn binder_annotations_do_not_block_generalization() {
        // The quantified variable may appear in annotations of variables
        // bound inside the body; only free variables count.
        let ty = syn("tlam X. lam f : X -> Y. lam x : X. f x").unwrap();
        assert!(types_isomorphic(&ty, &t("forall X. (X -> Y) /\\ X -> Y")));
    }

    #[test]
    fn closed_mode_requires_context_bindings() {
        let (term, _ctx) = parsed("lam x : X. <x, y> where y : Y");
        let err = synthesize(&Context::default(), &term).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::UnboundVariable);
        assert_eq!(
            err.path,
            TermPath(vec![PathStep::LamBody, PathStep::PairRight])
        );
        assert!(synthesize_open(&Context::default(), &term).is_ok());
    }

    #[test]
    fn occurrence_annotations_must_match_their_binding() {
        let term = crate::syntax::lam("x", t("X"), var("x", t("Y")));
        let err = synthesize(&Context::default(), &term).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::AnnotationMismatch);
        assert_eq!(err.path, TermPath(vec![PathStep::LamBody]));
        // An isomorphic (not merely equal) annotation is fine.
        let term = crate::syntax::lam(
            "x",
            t("X -> Y /\\ Z"),
            var("x", t("(X -> Y) /\\ (X -> Z)")),
        );
        assert!(synthesize(&Context::default(), &term).is_ok());
    }

    #[test]
    fn free_occurrences_must_agree_with_each_other() {
        let term = crate::syntax::pair(var("x", t("X")), var("x", t("Y")));
        let err = synthesize_open(&Context::default(), &term).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::AnnotationMismatch);
        assert_eq!(err.path, TermPath(vec![PathStep::PairRight]));
    }

    #[test]
    fn application_of_a_non_arrow_fails_at_the_application() {
        let (term, ctx) = parsed("x y where x : X, y : Y");
        let err = synthesize(&ctx, &term).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::NotAnArrow);
        assert_eq!(err.path, TermPath(Vec::new()));
        // A wrong argument type is the same failure: there is no arrow
        // from Y into anything inside X -> Z.
        let (term, ctx) = parsed("x y where x : X -> Z, y : Y");
        let err = synthesize(&ctx, &term).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::NotAnArrow);
    }

    #[test]
    fn projection_failures_distinguish_prime_subjects() {
        let (term, ctx) = parsed("pi [X] x where x : X");
        let err = synthesize(&ctx, &term).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::NotAConjunction);
        let (term, ctx) = parsed("pi [Z] <x, y> where x : X, y : Y");
        let err = synthesize(&ctx, &term).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::ProjectionTypeNotPresent);
    }

    #[test]
    fn type_application_of_a_non_universal_fails() {
        let (term, ctx) = parsed("x [Y] where x : X");
        let err = synthesize(&ctx, &term).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::NotAUniversal);
    }

    #[test]
    fn projection_can_split_a_quantified_conjunction() {
        // x : forall X. (X -> X) /\ Y; the quantifier distributes, so the
        // component forall X. X -> X can be projected out.
        let ty = syn("pi [forall X. X -> X] x where x : forall X. (X -> X) /\\ Y").unwrap();
        assert_eq!(ty, t("forall X. X -> X"));
    }

    #[test]
    fn type_application_strips_a_distributed_quantifier() {
        let ty = syn("x [Z] where x : (forall X. X -> Y) /\\ (forall X. X -> W)").unwrap();
        assert!(types_isomorphic(&ty, &t("(Z -> Y) /\\ (Z -> W)")));
    }

    #[test]
    fn leftmost_error_wins() {
        let term = crate::syntax::pair(var("x", t("X")), var("y", t("Y")));
        let err = synthesize(&Context::default(), &term).unwrap_err();
        assert_eq!(err.path, TermPath(vec![PathStep::PairLeft]));
    }

    #[test]
    fn error_display_is_informative() {
        let (term, ctx) = parsed("x y where x : X, y : Y");
        let err = synthesize(&ctx, &term).unwrap_err();
        let shown = err.to_string();
        assert!(shown.contains("NotAnArrow"), "{shown}");
        assert!(shown.contains("<root>"), "{shown}");
    }
}
