//! Bounded witness search: an oracle for quantified formulas in the
//! computable model, independent of the symbolic elimination path.
//!
//! Quantifiers are decided by enumerating structured candidate witnesses
//! built from the minterm cells of the current assignment: finite prefixes
//! of a cell, a cell minus a prefix, and the two rank-parity halves of a
//! cell. The cell analysis shows candidates of this shape suffice once the
//! prefix budget reaches `(max C index + lcm of Res moduli) * 2^depth`:
//! splits only ever need exact finite parts up to the cap plus residue
//! slack, which doubles per quantifier level, and infinite/infinite splits
//! are covered by the parity halves.

use std::collections::{BTreeMap, BTreeSet};

use num::integer::lcm;

use super::element::BooleanElement;
use super::qe::{eval_enriched_atom, eval_term};
use crate::error::{Error, Result};
use crate::formula::{Formula, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessOutcome {
    pub value: bool,
    /// The fuel this run was allowed.
    pub fuel: u64,
    /// Fuel at which the search is provably complete for this formula.
    pub required_fuel: u64,
    /// False when `fuel < required_fuel`: existential successes are still
    /// sound but failures may be artifacts of the truncated search.
    pub exact: bool,
}

/// Largest C index and lcm of Res moduli occurring in the formula.
fn formula_indices(f: &Formula) -> (u64, u64) {
    fn walk(f: &Formula, cmax: &mut u64, q: &mut u64) {
        match f {
            Formula::Pred(p, _) => match p.name.as_str() {
                "C" => *cmax = (*cmax).max(p.indices[0] as u64),
                "Res" => *q = lcm(*q, p.indices[0] as u64),
                _ => {}
            },
            Formula::Not(g) => walk(g, cmax, q),
            Formula::And(a, b) | Formula::Or(a, b) => {
                walk(a, cmax, q);
                walk(b, cmax, q);
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => walk(b, cmax, q),
            _ => {}
        }
    }
    let mut cmax = 1;
    let mut q = 1;
    walk(f, &mut cmax, &mut q);
    (cmax, q)
}

/// The sufficient fuel for a formula: `(max C index + lcm of Res moduli) *
/// 2^(quantifier depth)`.
pub fn sufficient_fuel(f: &Formula) -> u64 {
    let (cmax, q) = formula_indices(f);
    (cmax + q) * (1u64 << f.quantifier_depth().min(16))
}

/// Evaluates a formula of the enriched Boolean signature in the computable
/// model, searching quantifier witnesses up to the fuel bound.
pub fn bounded_witness_evaluate(
    f: &Formula,
    asg: &BTreeMap<Var, BooleanElement>,
    fuel: u64,
) -> Result<WitnessOutcome> {
    let required_fuel = sufficient_fuel(f);
    let (cmax, q) = formula_indices(f);
    let mut asg = asg.clone();
    let value = eval(f, &mut asg, cmax + q, fuel)?;
    Ok(WitnessOutcome {
        value,
        fuel,
        required_fuel,
        exact: fuel >= required_fuel,
    })
}

fn eval(
    f: &Formula,
    asg: &mut BTreeMap<Var, BooleanElement>,
    base: u64,
    fuel: u64,
) -> Result<bool> {
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Not(g) => Ok(!eval(g, asg, base, fuel)?),
        Formula::And(a, b) => Ok(eval(a, asg, base, fuel)? && eval(b, asg, base, fuel)?),
        Formula::Or(a, b) => Ok(eval(a, asg, base, fuel)? || eval(b, asg, base, fuel)?),
        Formula::Eq(a, b) => Ok(eval_term(a, asg)? == eval_term(b, asg)?),
        Formula::Pred(p, args) => {
            let vals: Vec<BooleanElement> = args
                .iter()
                .map(|t| eval_term(t, asg))
                .collect::<Result<_>>()?;
            eval_enriched_atom(p, &vals)
        }
        Formula::Exists(x, body) => {
            let saved = asg.get(x).cloned();
            let depth = 1 + body.quantifier_depth() as u32;
            let level = (base << depth.min(16)).min(fuel);
            let mut found = false;
            for cand in candidates(asg, level)? {
                asg.insert(x.clone(), cand);
                if eval(body, asg, base, fuel)? {
                    found = true;
                    break;
                }
            }
            match saved {
                Some(v) => {
                    asg.insert(x.clone(), v);
                }
                None => {
                    asg.remove(x);
                }
            }
            Ok(found)
        }
        Formula::Forall(x, body) => {
            let neg = Formula::not(body.as_ref().clone());
            let ex = Formula::exists(x.clone(), neg);
            Ok(!eval(&ex, asg, base, fuel)?)
        }
    }
}

/// Candidate witnesses: unions, over the minterm cells of the current
/// assignment, of one part per cell drawn from prefixes, co-prefixes, and
/// the two rank-parity halves.
fn candidates(asg: &BTreeMap<Var, BooleanElement>, budget: u64) -> Result<Vec<BooleanElement>> {
    let values: Vec<&BooleanElement> = asg.values().collect();
    let k = values.len();
    if k > 4 {
        return Err(Error::Budget {
            needed: 1u128 << k,
            budget: 16,
        });
    }
    let mut cells = Vec::new();
    for mask in 0..(1usize << k) {
        let mut cell = BooleanElement::universe();
        for (i, v) in values.iter().enumerate() {
            let lit = if mask >> i & 1 == 1 {
                (*v).clone()
            } else {
                v.complement()
            };
            cell = cell.meet(&lit);
        }
        if !cell.is_empty() {
            cells.push(cell);
        }
    }
    let mut per_cell: Vec<Vec<BooleanElement>> = Vec::with_capacity(cells.len());
    for cell in &cells {
        let mut parts = BTreeSet::new();
        let card = cell.cardinality();
        let top = match card {
            Some(c) => c.min(budget),
            None => budget,
        };
        for j in 0..=top {
            parts.insert(cell.take_prefix(j));
            parts.insert(cell.drop_prefix(j));
        }
        parts.insert(cell.clone());
        if card.is_none() {
            parts.insert(cell.stride(0));
            parts.insert(cell.stride(1));
        }
        per_cell.push(parts.into_iter().collect());
    }
    let total: u128 = per_cell.iter().map(|p| p.len() as u128).product();
    if total > 3_000_000 {
        return Err(Error::Budget {
            needed: total,
            budget: 3_000_000,
        });
    }
    let mut out = BTreeSet::new();
    let mut stack: Vec<(usize, BooleanElement)> = vec![(0, BooleanElement::empty())];
    while let Some((i, acc)) = stack.pop() {
        if i == per_cell.len() {
            out.insert(acc);
            continue;
        }
        for part in &per_cell[i] {
            stack.push((i + 1, acc.join(part)));
        }
    }
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Signature};

    fn bool_f(s: &str) -> Formula {
        parse_formula(s, &Signature::boolean_enriched()).unwrap()
    }

    fn x() -> Var {
        Var::new("x", "bool")
    }

    #[test]
    fn subset_with_two_members() {
        // exists w (w <= x and C[2](w)) with x = {2,5,9}.
        let f = bool_f("exists w. (w <= x /\\ C[2](w))");
        let mut asg = BTreeMap::new();
        asg.insert(x(), BooleanElement::from_finite([2, 5, 9]));
        let out = bounded_witness_evaluate(&f, &asg, 16).unwrap();
        assert!(out.value);
        assert!(out.exact);
        // And with a singleton it fails.
        let mut asg = BTreeMap::new();
        asg.insert(x(), BooleanElement::from_finite([7]));
        assert!(!bounded_witness_evaluate(&f, &asg, 16).unwrap().value);
    }

    #[test]
    fn below_zero_is_zero() {
        let f = bool_f("forall w. (w <= 0 -> w = 0)");
        let out = bounded_witness_evaluate(&f, &BTreeMap::new(), 2).unwrap();
        assert!(out.value);
    }

    #[test]
    fn infinite_coinfinite_witness() {
        let f = bool_f("exists w. (~Fin(w) /\\ ~Fin(~w))");
        let out = bounded_witness_evaluate(&f, &BTreeMap::new(), 8).unwrap();
        assert!(out.value);
    }

    #[test]
    fn splitting_an_infinite_set() {
        // Any infinite x splits into two infinite halves.
        let f = bool_f("exists w. (w <= x /\\ w != x /\\ ~Fin(w) /\\ ~Fin(x /\\ ~w))");
        let mut asg = BTreeMap::new();
        asg.insert(x(), BooleanElement::from_residues(3, [1]));
        let out = bounded_witness_evaluate(&f, &asg, 8).unwrap();
        assert!(out.value);
    }

    #[test]
    fn fuel_flagging() {
        let f = bool_f("exists w. C[4](w)");
        let out = bounded_witness_evaluate(&f, &BTreeMap::new(), 1).unwrap();
        assert!(!out.exact);
        assert_eq!(out.required_fuel, (4 + 1) * 2);
    }
}
