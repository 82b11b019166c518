//! Acceptance gate: nine criteria, one test and one printed PASS/FAIL
//! line each. Budgets, counts, seeds, and tolerances are pinned here.

use psi::generate::{gen_type, gen_typed_term};
use psi::iso::{conjunction_of, prime_factors, types_isomorphic};
use psi::measures::{measure_m, measure_p, pair_shape_classify, PairShape};
use psi::oracle::{enumerate_types, iso_closure, iso_oracle};
use psi::parse::{parse_term, parse_type};
use psi::rewrite::{equiv_class, equiv_neighbors, head_reduce, normalize, reduce_step, Strategy};
use psi::syntax::{Context, Term, Type, TypeVar};
use psi::typing::{synthesize, synthesize_open};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::time::{Duration, Instant};

// Pinned parameters.
const GOLDEN_TIME_LIMIT: Duration = Duration::from_secs(1);
const ENUM_NODE_LIMIT: usize = 7;
const ENUM_EXPECTED_COUNT: usize = 5939;
const RANDOM_PAIR_COUNT: usize = 50_000;
const RANDOM_PAIR_SEED: u64 = 0xC2;
const ORACLE_BUDGET: usize = 50_000;
const RANDOM_TYPE_COUNT: usize = 1_000;
const RANDOM_TYPE_NODE_LIMIT: usize = 10;
const GENERATED_TERM_COUNT: usize = 1_000;
const GENERATED_SIZE_LIMIT: usize = 10;
const CLASS_BUDGET: usize = 20_000;
const NORMALIZE_BUDGET: usize = 50_000;
const PAIR_TRIPLE_COUNT: usize = 200;

fn report(number: usize, title: &str, result: Result<(), String>) {
    match &result {
        Ok(()) => println!("ACCEPTANCE {number} ({title}): PASS"),
        Err(reason) => println!("ACCEPTANCE {number} ({title}): FAIL — {reason}"),
    }
    if let Err(reason) = result {
        panic!("acceptance criterion {number} failed: {reason}");
    }
}

/// `(term, expected type, expected unique normal form)` — the full
/// worked-example corpus.
const GOLDEN: [(&str, &str, &str); 9] = [
    (
        "(lam f : A -> B. lam x : A. f x) <g, r> where g : A -> B, r : A",
        "B",
        "g r where g : A -> B, r : A",
    ),
    (
        "(lam f : A -> B. lam x : A. f x) r g where g : A -> B, r : A",
        "B",
        "g r where g : A -> B, r : A",
    ),
    (
        "(lam z : (A -> B) /\\ A. (pi [A -> B] z) (pi [A] z)) g r where g : A -> B, r : A",
        "B",
        "g r where g : A -> B, r : A",
    ),
    (
        "pi [A -> B] (lam x : A. <u, v>) where u : B, v : C",
        "A -> B",
        "lam x : A. u where u : B",
    ),
    (
        "(tlam X. lam x : A. lam f : A -> X. f x) r where r : A",
        "forall X. ((A -> X) -> X)",
        "tlam X. lam f : A -> X. f r where r : A",
    ),
    (
        "((lam x : forall X. (X -> X). x) [A]) (tlam X. lam x : X. x)",
        "A -> A",
        "lam x : A. x",
    ),
    (
        "pi [forall X. (X -> X)] (tlam X. <lam x : X. x, r>) where r : A",
        "forall X. (X -> X)",
        "tlam X. lam x : X. x",
    ),
    (
        "<tlam X. lam x : X. lam y : A. r, tlam X. lam x : X. lam z : B. s> [C] \
         where r : D, s : E",
        "(C -> A -> D) /\\ (C -> B -> E)",
        "<lam x : C. lam y : A. r, lam x : C. lam z : B. s> where r : D, s : E",
    ),
    (
        "(pi [forall X. (X -> X)] (tlam X. <lam x : X. x, r>)) [A] where r : B",
        "A -> A",
        "lam x : A. x",
    ),
];

#[test]
fn criterion_1_golden_corpus_exact_and_fast() {
    let run = || -> Result<(), String> {
        let start = Instant::now();
        for (i, (src, ty_src, nf_src)) in GOLDEN.iter().enumerate() {
            let (term, ctx) = parse_term(src).map_err(|e| format!("example {}: {e}", i + 1))?;
            let ty = synthesize(&ctx, &term).map_err(|e| format!("example {}: {e}", i + 1))?;
            let expected_ty = parse_type(ty_src).unwrap();
            if !types_isomorphic(&ty, &expected_ty) {
                return Err(format!("example {}: inferred {ty}, expected {expected_ty}", i + 1));
            }
            let traces = normalize(&term, Strategy::Exhaustive, NORMALIZE_BUDGET);
            if traces.len() != 1 || !traces[0].exhaustive {
                return Err(format!(
                    "example {}: expected one exhaustively-found normal form, got {}",
                    i + 1,
                    traces.len()
                ));
            }
            let (expected_nf, _) = parse_term(nf_src).unwrap();
            if !traces[0].result.alpha_eq(&expected_nf) {
                return Err(format!(
                    "example {}: normalized to {}, expected {}",
                    i + 1,
                    traces[0].result,
                    expected_nf
                ));
            }
        }
        let elapsed = start.elapsed();
        if elapsed > GOLDEN_TIME_LIMIT {
            return Err(format!("corpus took {elapsed:?}, limit {GOLDEN_TIME_LIMIT:?}"));
        }
        Ok(())
    };
    report(1, "worked examples exact within one second", run());
}

#[test]
fn criterion_2_canonicalizer_agrees_with_the_rewrite_oracle() {
    let run = || -> Result<(), String> {
        let pool = [TypeVar::new("X"), TypeVar::new("Y")];
        let universe = enumerate_types(ENUM_NODE_LIMIT, &pool);
        if universe.len() != ENUM_EXPECTED_COUNT {
            return Err(format!(
                "enumerated {} types at {} nodes, expected {}",
                universe.len(),
                ENUM_NODE_LIMIT,
                ENUM_EXPECTED_COUNT
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_PAIR_SEED);
        let mut closures: HashMap<usize, (std::collections::HashSet<Type>, bool)> =
            HashMap::new();
        let mut disagreements = 0usize;
        for _ in 0..RANDOM_PAIR_COUNT {
            let i = rng.gen_range(0..universe.len());
            let j = rng.gen_range(0..universe.len());
            let (a, b) = (&universe[i], &universe[j]);
            let fast = types_isomorphic(a, b);
            let (closure, closed) = closures
                .entry(i)
                .or_insert_with(|| iso_closure(a, ORACLE_BUDGET))
                .clone();
            let slow = closure.contains(&b.alpha_canonical());
            if !slow && !closed {
                return Err(format!("oracle ran out of budget on {a}"));
            }
            if fast != slow {
                disagreements += 1;
                if disagreements <= 3 {
                    eprintln!("disagreement: {a} vs {b}: canonical {fast}, oracle {slow}");
                }
            }
        }
        if disagreements != 0 {
            return Err(format!("{disagreements} disagreements over {RANDOM_PAIR_COUNT} pairs"));
        }
        Ok(())
    };
    report(2, "isomorphism decisions match exhaustive rewriting", run());
}

#[test]
fn criterion_3_types_equal_the_conjunction_of_their_primes() {
    let run = || -> Result<(), String> {
        for seed in 0..RANDOM_TYPE_COUNT as u64 {
            let ty = gen_type(RANDOM_TYPE_NODE_LIMIT, seed);
            let parts: Vec<Type> = prime_factors(&ty).iter().map(|f| f.denote()).collect();
            let rebuilt = conjunction_of(&parts)
                .ok_or_else(|| format!("{ty}: no factors at all"))?;
            if !types_isomorphic(&ty, &rebuilt) {
                return Err(format!("{ty} is not isomorphic to {rebuilt}"));
            }
        }
        Ok(())
    };
    report(3, "every type is the conjunction of its prime factors", run());
}

/// The eleven structural schemas, as (left, right) concrete instances.
const SCHEMA_INSTANCES: [(&str, &str); 11] = [
    ("<u, v> where u : A, v : B", "<v, u> where u : A, v : B"),
    (
        "<u, <v, w>> where u : A, v : B, w : C",
        "<<u, v>, w> where u : A, v : B, w : C",
    ),
    (
        "lam x : A. <u, v> where u : B, v : C",
        "<lam x : A. u, lam x : A. v> where u : B, v : C",
    ),
    (
        "<f, g> s where f : A -> B, g : A -> C, s : A",
        "<f s, g s> where f : A -> B, g : A -> C, s : A",
    ),
    (
        "f <u, v> where f : A /\\ B -> C, u : A, v : B",
        "f u v where f : A /\\ B -> C, u : A, v : B",
    ),
    (
        "tlam X. lam x : A. r where r : B",
        "lam x : A. tlam X. r where r : B",
    ),
    (
        "(lam x : B. f) [A] where f : forall X. X -> X",
        "lam x : B. (f [A]) where f : forall X. X -> X",
    ),
    (
        "tlam X. <u, v> where u : A, v : B",
        "<tlam X. u, tlam X. v> where u : A, v : B",
    ),
    (
        "tlam X. pi [X -> X] (w [X]) where w : forall Z. ((Z -> Z) /\\ B)",
        "pi [forall X. (X -> X)] (tlam X. w [X]) where w : forall Z. ((Z -> Z) /\\ B)",
    ),
    (
        "<u, v> [A] where u : forall X. (X -> B), v : forall Y. Y",
        "<u [A], v [A]> where u : forall X. (X -> B), v : forall Y. Y",
    ),
    (
        "(pi [forall X. (X -> X)] r) [A] where r : forall X. ((X -> X) /\\ Y)",
        "pi [A -> A] (r [A]) where r : forall X. ((X -> X) /\\ Y)",
    ),
];

/// The three contraction rules, as (redex, rule, reduct) instances.
const CONTRACTION_INSTANCES: [(&str, &str, &str); 3] = [
    (
        "(lam x : A. <x, x>) u where u : A",
        "beta_lambda",
        "<u, u> where u : A",
    ),
    ("(tlam X. lam x : X. x) [A]", "beta_Lambda", "lam x : A. x"),
    ("pi [A] <u, v> where u : A, v : B", "pi", "u where u : A"),
];

#[test]
fn criterion_4_reduction_preserves_types() {
    let run = || -> Result<(), String> {
        // Eleven schemas: relation holds both ways, types agree.
        for (left_src, right_src) in SCHEMA_INSTANCES {
            let (left, _) = parse_term(left_src).unwrap();
            let (right, _) = parse_term(right_src).unwrap();
            if !equiv_neighbors(&left).iter().any(|t| t.alpha_eq(&right)) {
                return Err(format!("schema missing: {left_src} -> {right_src}"));
            }
            if !equiv_neighbors(&right).iter().any(|t| t.alpha_eq(&left)) {
                return Err(format!("schema missing: {right_src} -> {left_src}"));
            }
            let lt = synthesize_open(&Context::new(), &left).map_err(|e| e.to_string())?;
            let rt = synthesize_open(&Context::new(), &right).map_err(|e| e.to_string())?;
            if !types_isomorphic(&lt, &rt) {
                return Err(format!("{left_src}: {lt} vs {rt}"));
            }
        }
        // Three contractions: rule fires, types agree.
        for (redex_src, rule, reduct_src) in CONTRACTION_INSTANCES {
            let (redex, _) = parse_term(redex_src).unwrap();
            let (reduct, _) = parse_term(reduct_src).unwrap();
            if !head_reduce(&redex)
                .iter()
                .any(|(r, t)| *r == rule && t.alpha_eq(&reduct))
            {
                return Err(format!("contraction missing: {redex_src} -> {reduct_src}"));
            }
            let before = synthesize_open(&Context::new(), &redex).map_err(|e| e.to_string())?;
            let after = synthesize_open(&Context::new(), &reduct).map_err(|e| e.to_string())?;
            if !types_isomorphic(&before, &after) {
                return Err(format!("{redex_src}: {before} vs {after}"));
            }
        }
        // One thousand generated terms: every one-step reduct keeps the type.
        for i in 0..GENERATED_TERM_COUNT as u64 {
            let size = 1 + (i as usize % GENERATED_SIZE_LIMIT);
            let (ctx, term) = gen_typed_term(size, i);
            let ty =
                synthesize(&ctx, &term).map_err(|e| format!("seed {i}: {term}: {e}"))?;
            for reduct in reduce_step(&term, CLASS_BUDGET).reducts {
                let reduct_ty = synthesize(&ctx, &reduct)
                    .map_err(|e| format!("seed {i}: {term} -> {reduct}: {e}"))?;
                if !types_isomorphic(&ty, &reduct_ty) {
                    return Err(format!(
                        "seed {i}: {term} : {ty} reduced to {reduct} : {reduct_ty}"
                    ));
                }
            }
        }
        Ok(())
    };
    report(4, "subject reduction on schemas, rules, and generated terms", run());
}

#[test]
fn criterion_5_exhaustive_normalization_terminates() {
    let run = || -> Result<(), String> {
        let mut exhausted = 0usize;
        for i in 0..GENERATED_TERM_COUNT as u64 {
            let size = 1 + (i as usize % GENERATED_SIZE_LIMIT);
            let (_, term) = gen_typed_term(size, 1_000 + i);
            let traces = normalize(&term, Strategy::Exhaustive, NORMALIZE_BUDGET);
            if traces.is_empty() {
                return Err(format!("seed {}: no trace produced", 1_000 + i));
            }
            if traces.iter().any(|t| !t.exhaustive) {
                exhausted += 1;
                if exhausted <= 3 {
                    eprintln!("budget exhausted on seed {}: {term}", 1_000 + i);
                }
            }
        }
        if exhausted != 0 {
            return Err(format!(
                "{exhausted} of {GENERATED_TERM_COUNT} normalizations hit the budget"
            ));
        }
        Ok(())
    };
    report(5, "exhaustive normalization closes on generated terms", run());
}

#[test]
fn criterion_6_measures_are_class_invariants_with_strict_dominance() {
    let run = || -> Result<(), String> {
        for i in 0..GENERATED_TERM_COUNT as u64 {
            let size = 1 + (i as usize % GENERATED_SIZE_LIMIT);
            let (_, term) = gen_typed_term(size, 2_000 + i);
            let class = equiv_class(&term, CLASS_BUDGET);
            let (m0, p0) = (measure_m(&term), measure_p(&term));
            for member in class.members() {
                let (m, p) = (measure_m(member), measure_p(member));
                if (m, p) != (m0, p0) {
                    return Err(format!(
                        "{term} has (M,P)=({m0},{p0}) but member {member} has ({m},{p})"
                    ));
                }
            }
        }
        // Strict dominance at all eight subterm positions, with every
        // position exercised.
        let mut seen = [false; 8];
        fn dominated(term: &Term, seen: &mut [bool; 8]) -> Result<(), String> {
            let m = measure_m(term);
            let subs: Vec<(usize, &Term)> = match term {
                Term::Var(..) => vec![],
                Term::Lam(_, _, b) => vec![(0, &**b)],
                Term::App(f, a) => vec![(1, &**f), (2, &**a)],
                Term::Pair(l, r) => vec![(3, &**l), (4, &**r)],
                Term::Proj(_, b) => vec![(5, &**b)],
                Term::TLam(_, b) => vec![(6, &**b)],
                Term::TApp(f, _) => vec![(7, &**f)],
            };
            for (position, sub) in subs {
                seen[position] = true;
                if measure_m(sub) >= m {
                    return Err(format!("M({sub}) >= M({term})"));
                }
                dominated(sub, seen)?;
            }
            Ok(())
        }
        for i in 0..GENERATED_TERM_COUNT as u64 {
            let size = 1 + (i as usize % GENERATED_SIZE_LIMIT);
            let (_, term) = gen_typed_term(size, 2_000 + i);
            dominated(&term, &mut seen)?;
        }
        if seen != [true; 8] {
            return Err(format!("not every subterm position was exercised: {seen:?}"));
        }
        Ok(())
    };
    report(6, "measures constant on classes, strictly above subterms", run());
}

#[test]
fn criterion_7_projection_nondeterminism_is_exactly_as_specified() {
    let run = || -> Result<(), String> {
        let (ambiguous, _) = parse_term("pi [X] <u, v> where u : X, v : X").unwrap();
        let traces = normalize(&ambiguous, Strategy::Exhaustive, NORMALIZE_BUDGET);
        let mut results: Vec<String> =
            traces.iter().map(|t| t.result.to_string()).collect();
        results.sort();
        if results != ["u", "v"] {
            return Err(format!("ambiguous projection gave {results:?}, expected [u, v]"));
        }
        let (determined, _) = parse_term(
            "pi [B -> A] <lam x : B. r, lam x : C. s> t where r : A, s : A, t : B",
        )
        .unwrap();
        let traces = normalize(&determined, Strategy::Exhaustive, NORMALIZE_BUDGET);
        let results: Vec<String> = traces.iter().map(|t| t.result.to_string()).collect();
        if results != ["r"] {
            return Err(format!(
                "annotation-determined projection gave {results:?}, expected [r]"
            ));
        }
        Ok(())
    };
    report(7, "projection branches exactly where types allow", run());
}

#[test]
fn criterion_8_pair_equivalences_fit_the_five_shapes() {
    let run = || -> Result<(), String> {
        let mut counts: HashMap<PairShape, usize> = HashMap::new();
        let mut triples = 0usize;
        let mut seed = 3_000u64;
        while triples < PAIR_TRIPLE_COUNT {
            let size = 2 + (seed as usize % (GENERATED_SIZE_LIMIT - 1));
            let (_, term) = gen_typed_term(size, seed);
            seed += 1;
            let class = equiv_class(&term, CLASS_BUDGET);
            if !class.is_closed() {
                continue;
            }
            let pairs: Vec<(Term, Term)> = class
                .members()
                .iter()
                .filter_map(|m| match m {
                    Term::Pair(l, r) => Some(((**l).clone(), (**r).clone())),
                    _ => None,
                })
                .take(2)
                .collect();
            for (r, s) in pairs {
                for t in class.members().iter().take(5) {
                    if triples >= PAIR_TRIPLE_COUNT {
                        break;
                    }
                    match pair_shape_classify(t, &r, &s, CLASS_BUDGET) {
                        Some(shape) => {
                            *counts.entry(shape).or_default() += 1;
                            triples += 1;
                        }
                        None => {
                            return Err(format!(
                                "{t} is equivalent to <{r}, {s}> but fits no shape"
                            ));
                        }
                    }
                }
            }
        }
        if counts.is_empty() {
            return Err("no pair-shaped classes were generated".to_string());
        }
        Ok(())
    };
    report(8, "pair equivalences decompose into the five shapes", run());
}

#[test]
fn criterion_9_quantifier_swap_is_not_an_isomorphism() {
    let run = || -> Result<(), String> {
        let a = parse_type("forall X. forall Y. (X -> Y -> X)").unwrap();
        let b = parse_type("forall Y. forall X. (X -> Y -> X)").unwrap();
        if types_isomorphic(&a, &b) {
            return Err("canonicalizer identified the swapped quantifiers".to_string());
        }
        let verdict = iso_oracle(&a, &b, ORACLE_BUDGET);
        if verdict.related {
            return Err(format!(
                "oracle related the swapped quantifiers after {} types",
                verdict.visited
            ));
        }
        Ok(())
    };
    report(9, "swapped quantifiers stay distinct", run());
}
