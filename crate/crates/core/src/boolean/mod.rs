//! The enriched Boolean-algebra theory: computable model, quantifier
//! elimination, sentence decision, and the independent bounded-witness
//! oracle.

mod cells;
mod element;
mod qe;
mod witness;

pub use cells::{split_feasible, CellSpec};
pub use element::BooleanElement;
pub use qe::{
    decide_sentence, eliminate_quantifiers, eval_closed_qf, eval_enriched_atom,
    eval_quantifier_free, eval_term, qf_equivalent,
};
pub use witness::{bounded_witness_evaluate, sufficient_fuel, WitnessOutcome};

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::formula::{parse_formula, Formula, Signature, Var};

    fn bool_f(s: &str) -> Formula {
        parse_formula(s, &Signature::boolean_enriched()).unwrap()
    }

    fn check_qe_against_oracle(text: &str, assignments: &[BTreeMap<Var, BooleanElement>]) {
        let f = bool_f(text);
        let qf = eliminate_quantifiers(&f).unwrap();
        assert!(qf.is_quantifier_free(), "{text} -> {qf}");
        assert!(
            qf.free_vars().is_subset(&f.free_vars()),
            "no new free variables"
        );
        let fuel = sufficient_fuel(&f);
        for asg in assignments {
            let direct = eval_quantifier_free(&qf, asg).unwrap();
            let oracle = bounded_witness_evaluate(&f, asg, fuel).unwrap();
            assert!(oracle.exact);
            assert_eq!(direct, oracle.value, "{text} at {asg:?}");
        }
    }

    fn singleton(x: BooleanElement) -> BTreeMap<Var, BooleanElement> {
        let mut m = BTreeMap::new();
        m.insert(Var::new("x", "bool"), x);
        m
    }

    #[test]
    fn qe_subset_with_two_members_is_c2() {
        let f = bool_f("exists w. (w <= x /\\ C[2](w))");
        let qf = eliminate_quantifiers(&f).unwrap();
        // Semantically C[2](x): check over a spread of assignments.
        let expect = bool_f("C[2](x)");
        assert!(qf_equivalent(&qf, &expect).unwrap(), "{qf}");
    }

    #[test]
    fn qe_sentence_split_universe() {
        let f = bool_f("exists w. (~Fin(w) /\\ ~Fin(~w))");
        assert!(decide_sentence(&f).unwrap());
    }

    #[test]
    fn qe_contradiction() {
        let f = bool_f("exists w. (Fin(w) /\\ ~Fin(w))");
        assert!(!decide_sentence(&f).unwrap());
    }

    #[test]
    fn decide_fin_of_empty() {
        assert!(decide_sentence(&bool_f("Fin(0)")).unwrap());
        assert!(!decide_sentence(&bool_f("Fin(1)")).unwrap());
    }

    #[test]
    fn qe_identity_on_quantifier_free() {
        let f = bool_f("Fin(x) /\\ C[2](x \\/ w)");
        let qf = eliminate_quantifiers(&f).unwrap();
        assert_eq!(qf, f);
    }

    #[test]
    fn qe_matches_oracle_on_samples() {
        let assignments = vec![
            singleton(BooleanElement::empty()),
            singleton(BooleanElement::from_finite([0])),
            singleton(BooleanElement::from_finite([2, 5, 9])),
            singleton(BooleanElement::from_finite([1, 2, 3, 4])),
            singleton(BooleanElement::from_residues(2, [0])),
            singleton(BooleanElement::new(3, [1], [0], [4])),
            singleton(BooleanElement::universe()),
        ];
        for text in [
            "exists w. (w <= x /\\ C[2](w))",
            "exists w. (w <= x /\\ ~Fin(w))",
            "exists w. (x <= w /\\ Res[2,0](w))",
            "forall w. (w <= x -> Fin(w))",
            "exists w. ((w /\\ x) = 0 /\\ C[3](w \\/ x))",
            "forall w. (w = x \\/ C[1](w \\/ x))",
            "exists w. (Res[3,1](w) /\\ w <= x)",
        ] {
            check_qe_against_oracle(text, &assignments);
        }
    }

    #[test]
    fn qe_idempotent_up_to_equivalence() {
        for text in [
            "exists w. (w <= x /\\ C[2](w))",
            "forall w. (w <= x -> Fin(w))",
            "exists w. (Res[2,1](w) /\\ w <= x)",
        ] {
            let once = eliminate_quantifiers(&bool_f(text)).unwrap();
            let twice = eliminate_quantifiers(&once).unwrap();
            assert!(qf_equivalent(&once, &twice).unwrap(), "{text}");
        }
    }

    #[test]
    fn splitting_axiom_decides_true() {
        let f = bool_f(
            "forall x. (~Fin(x) -> exists w. (w <= x /\\ w != x /\\ ~Fin(w) /\\ ~Fin(x /\\ ~w)))",
        );
        assert!(decide_sentence(&f).unwrap());
    }

    #[test]
    fn res_composition_axiom_decides_true() {
        let f = bool_f(
            "forall x. forall w. ((x /\\ w) = 0 /\\ Res[2,1](x) /\\ Res[2,1](w) -> Res[2,0](x \\/ w))",
        );
        assert!(decide_sentence(&f).unwrap());
    }

    #[test]
    fn res_implies_fin_decides_true() {
        let f = bool_f("forall x. (Res[3,2](x) -> Fin(x))");
        assert!(decide_sentence(&f).unwrap());
    }

    #[test]
    fn proper_ideal_axioms() {
        for s in [
            "Fin(0)",
            "~Fin(1)",
            "forall x. forall w. (Fin(x) /\\ w <= x -> Fin(w))",
            "forall x. forall w. (Fin(x) /\\ Fin(w) -> Fin(x \\/ w))",
        ] {
            assert!(decide_sentence(&bool_f(s)).unwrap(), "{s}");
        }
    }
}
