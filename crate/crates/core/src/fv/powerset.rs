//! Evaluation of enriched Boolean formulas over the powerset algebra of a
//! finite index set `{0..s}`. `Fin` holds of everything, `C[j]` counts
//! indices, `Res[n,r]` is cardinality mod n. Quantifiers enumerate all
//! subsets; this is the reference semantics used to cross-check the plan
//! evaluator and to enumerate accepted Boolean-value sequences.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formula::{Formula, Term, Var};

pub fn eval_powerset(
    f: &Formula,
    index_count: usize,
    asg: &BTreeMap<Var, u64>,
) -> Result<bool> {
    if index_count > 16 {
        return Err(Error::Budget {
            needed: 1u128 << index_count,
            budget: 1 << 16,
        });
    }
    let quantifiers = f.quantifier_count() as u32;
    let needed = (1u128 << index_count).saturating_pow(quantifiers.max(1));
    if needed > 200_000_000 {
        return Err(Error::Budget {
            needed,
            budget: 200_000_000,
        });
    }
    let mut env: Vec<(Var, u64)> = asg.iter().map(|(v, m)| (v.clone(), *m)).collect();
    eval(f, index_count, &mut env)
}

fn term_mask(t: &Term, full: u64, env: &[(Var, u64)]) -> Result<u64> {
    match t {
        Term::Var(v) => env
            .iter()
            .rev()
            .find(|(w, _)| w == v)
            .map(|(_, m)| *m)
            .ok_or_else(|| Error::Invalid(format!("unassigned variable {}", v.name))),
        Term::Const(c) => match c.as_str() {
            "0" => Ok(0),
            "1" => Ok(full),
            other => Err(Error::Sort(format!("unknown constant {other}"))),
        },
        Term::App(f, args) => match (f.as_str(), args.len()) {
            ("meet", 2) => Ok(term_mask(&args[0], full, env)? & term_mask(&args[1], full, env)?),
            ("join", 2) => Ok(term_mask(&args[0], full, env)? | term_mask(&args[1], full, env)?),
            ("compl", 1) => Ok(full & !term_mask(&args[0], full, env)?),
            _ => Err(Error::Sort(format!("non-Boolean function {f}"))),
        },
    }
}

fn eval(f: &Formula, index_count: usize, env: &mut Vec<(Var, u64)>) -> Result<bool> {
    let full = if index_count == 64 {
        u64::MAX
    } else {
        (1u64 << index_count) - 1
    };
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Eq(a, b) => Ok(term_mask(a, full, env)? == term_mask(b, full, env)?),
        Formula::Pred(p, args) => {
            let masks: Vec<u64> = args
                .iter()
                .map(|t| term_mask(t, full, env))
                .collect::<Result<_>>()?;
            match (p.name.as_str(), masks.as_slice()) {
                ("<=", [a, b]) => Ok(a & !b == 0),
                ("Fin", [_]) => Ok(true),
                ("C", [a]) => Ok(a.count_ones() as i64 >= p.indices[0]),
                ("Res", [a]) => {
                    let (n, r) = (p.indices[0], p.indices[1]);
                    Ok(a.count_ones() as i64 % n == r % n)
                }
                _ => Err(Error::Sort(format!("unknown predicate {}", p.name))),
            }
        }
        Formula::Not(g) => Ok(!eval(g, index_count, env)?),
        Formula::And(a, b) => Ok(eval(a, index_count, env)? && eval(b, index_count, env)?),
        Formula::Or(a, b) => Ok(eval(a, index_count, env)? || eval(b, index_count, env)?),
        Formula::Forall(v, body) => {
            for m in 0..=full {
                env.push((v.clone(), m));
                let ok = eval(body, index_count, env);
                env.pop();
                if !ok? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Exists(v, body) => {
            for m in 0..=full {
                env.push((v.clone(), m));
                let ok = eval(body, index_count, env);
                env.pop();
                if ok? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}
