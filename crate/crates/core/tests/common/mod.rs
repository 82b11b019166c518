//! Helpers shared by the integration suites.

use psi::rewrite::{head_reduce, equiv_neighbors, ReductionTrace};
use psi::syntax::Term;

/// Checks a trace's internal consistency: steps chain, every witness
/// chain starts at the step's source, consecutive witnesses really are
/// structural neighbors, and the final witness contracts to the step's
/// target under the named rule.
pub fn verify_trace(trace: &ReductionTrace, start: &Term) {
    let mut current = start.alpha_canonical();
    for (i, step) in trace.steps.iter().enumerate() {
        assert!(
            step.from.alpha_eq(&current),
            "step {i} starts at {} but the trace is at {}",
            step.from,
            current
        );
        let first = step.equiv_witness.first().expect("non-empty witness");
        assert!(first.alpha_eq(&step.from), "witness chain starts at from");
        for pair in step.equiv_witness.windows(2) {
            let neighbors = equiv_neighbors(&pair[0]);
            assert!(
                neighbors.iter().any(|n| n.alpha_eq(&pair[1])),
                "witness link {} -/- {}",
                pair[0],
                pair[1]
            );
        }
        let redex = step.equiv_witness.last().unwrap();
        let contracted = head_reduce(redex);
        assert!(
            contracted
                .iter()
                .any(|(rule, to)| *rule == step.rule && to.alpha_eq(&step.to)),
            "step {i}: {} does not contract to {} by {}",
            redex,
            step.to,
            step.rule
        );
        current = step.to.clone();
    }
    assert!(
        trace.result.alpha_eq(&current),
        "trace result {} differs from final step target {}",
        trace.result,
        current
    );
}
