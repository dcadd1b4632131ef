//! The translation plan: a mirror of the inductive Feferman-Vaught
//! construction that supports evaluation without materializing the
//! (potentially doubly exponential) local formula family.
//!
//! Locals per node:
//! - atomic: one local, the atom itself;
//! - negation: the operand's locals;
//! - conjunction/disjunction: the concatenation of both operands' locals;
//! - `exists x`: for each subset `T` of the operand's locals, the pattern
//!   formula `exists x (AND_{j in T} psi_j AND AND_{j not in T} ~psi_j)`;
//!   with a restriction `Φ`, one such family for witnesses satisfying `Φ`
//!   and one for witnesses violating it.
//!
//! What the Boolean side needs from a factor is captured by [`FactorInfo`]:
//! the truth of the atom at a leaf, pairs along binary connectives, and at
//! a quantifier the set of operand infos realized by some witness (split
//! into in/out of the restriction).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::finite::FiniteStructure;
use crate::formula::{Formula, Term, Var};
use crate::product::RestrictionSpec;

const MAX_INNER_LOCALS: usize = 16;
const MAX_MATERIALIZED: u128 = 4096;

#[derive(Debug, Clone)]
pub(crate) enum Plan {
    Atomic {
        formula: Formula,
    },
    Not(Box<Plan>),
    And(Box<Plan>, Box<Plan>),
    Or(Box<Plan>, Box<Plan>),
    Exists {
        var: Var,
        /// Restriction formula and its free variable, when restricted.
        restriction: Option<(Formula, Var)>,
        inner: Box<Plan>,
    },
}

impl Plan {
    pub fn build(f: &Formula, restriction: &RestrictionSpec) -> Result<Plan> {
        Ok(match f {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Pred(..) => {
                Plan::Atomic { formula: f.clone() }
            }
            Formula::Not(g) => Plan::Not(Box::new(Plan::build(g, restriction)?)),
            Formula::And(a, b) => Plan::And(
                Box::new(Plan::build(a, restriction)?),
                Box::new(Plan::build(b, restriction)?),
            ),
            Formula::Or(a, b) => Plan::Or(
                Box::new(Plan::build(a, restriction)?),
                Box::new(Plan::build(b, restriction)?),
            ),
            Formula::Exists(v, body) => Plan::Exists {
                var: v.clone(),
                restriction: restriction_for(restriction, &v.sort)?,
                inner: Box::new(Plan::build(body, restriction)?),
            },
            Formula::Forall(v, body) => {
                // forall x g = ~exists x ~g
                let inner = Plan::Not(Box::new(Plan::build(body, restriction)?));
                Plan::Not(Box::new(Plan::Exists {
                    var: v.clone(),
                    restriction: restriction_for(restriction, &v.sort)?,
                    inner: Box::new(inner),
                }))
            }
        })
    }

    pub fn local_count(&self) -> u128 {
        match self {
            Plan::Atomic { .. } => 1,
            Plan::Not(p) => p.local_count(),
            Plan::And(a, b) | Plan::Or(a, b) => a.local_count().saturating_add(b.local_count()),
            Plan::Exists {
                inner, restriction, ..
            } => {
                let m = inner.local_count().min(120);
                let patterns = 1u128 << m;
                if restriction.is_some() {
                    patterns.saturating_mul(2)
                } else {
                    patterns
                }
            }
        }
    }

    pub fn atom_count(&self) -> usize {
        match self {
            Plan::Atomic { .. } => 1,
            Plan::Not(p) => p.atom_count(),
            Plan::And(a, b) | Plan::Or(a, b) => a.atom_count() + b.atom_count(),
            Plan::Exists { inner, .. } => inner.atom_count(),
        }
    }
}

fn restriction_for(r: &RestrictionSpec, sort: &str) -> Result<Option<(Formula, Var)>> {
    match r.for_sort(sort) {
        None => Ok(None),
        Some(phi) => {
            let free: Vec<Var> = phi.free_vars().into_iter().collect();
            if free.len() != 1 {
                return Err(Error::Invalid(
                    "restriction formula must have one free variable".into(),
                ));
            }
            Ok(Some((phi.clone(), free[0].clone())))
        }
    }
}

/// What one factor contributes to the Boolean side of the translation,
/// structured along the plan.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum FactorInfo {
    Leaf(bool),
    Pair(Box<FactorInfo>, Box<FactorInfo>),
    Quant {
        inside: BTreeSet<FactorInfo>,
        outside: BTreeSet<FactorInfo>,
    },
}

/// Computes the factor info of one factor under a per-factor environment.
pub(crate) fn pattern_at(
    plan: &Plan,
    factor: &FiniteStructure,
    env: &mut Vec<(Var, usize)>,
) -> Result<FactorInfo> {
    match plan {
        Plan::Atomic { formula } => Ok(FactorInfo::Leaf(factor.satisfies_with_env(formula, env)?)),
        Plan::Not(p) => pattern_at(p, factor, env),
        Plan::And(a, b) | Plan::Or(a, b) => {
            let l = pattern_at(a, factor, env)?;
            let r = pattern_at(b, factor, env)?;
            Ok(FactorInfo::Pair(Box::new(l), Box::new(r)))
        }
        Plan::Exists {
            var,
            restriction,
            inner,
        } => {
            let mut inside = BTreeSet::new();
            let mut outside = BTreeSet::new();
            for b in 0..factor.size() {
                env.push((var.clone(), b));
                let info = pattern_at(inner, factor, env);
                env.pop();
                let info = info?;
                let in_restriction = match restriction {
                    None => true,
                    Some((phi, pv)) => {
                        env.push((pv.clone(), b));
                        let ok = factor.satisfies_with_env(phi, env);
                        env.pop();
                        ok?
                    }
                };
                if in_restriction {
                    inside.insert(info);
                } else {
                    outside.insert(info);
                }
            }
            Ok(FactorInfo::Quant { inside, outside })
        }
    }
}

/// Evaluates the Boolean-sort side of the translation on concrete factor
/// infos (finite index set, where `Fin` is vacuous).
pub(crate) fn theta_eval(plan: &Plan, infos: &[&FactorInfo]) -> bool {
    match plan {
        Plan::Atomic { .. } => infos.iter().all(|i| matches!(i, FactorInfo::Leaf(true))),
        Plan::Not(p) => !theta_eval(p, infos),
        Plan::And(a, b) | Plan::Or(a, b) => {
            let mut lefts = Vec::with_capacity(infos.len());
            let mut rights = Vec::with_capacity(infos.len());
            for i in infos {
                match i {
                    FactorInfo::Pair(l, r) => {
                        lefts.push(l.as_ref());
                        rights.push(r.as_ref());
                    }
                    _ => unreachable!("plan/info shape mismatch"),
                }
            }
            match plan {
                Plan::And(..) => theta_eval(a, &lefts) && theta_eval(b, &rights),
                _ => theta_eval(a, &lefts) || theta_eval(b, &rights),
            }
        }
        Plan::Exists { inner, .. } => {
            // Per index, the witness realizes one of the patterns available
            // there; over a finite index set the finitely-many-violations
            // side condition is vacuous, so in- and out-patterns are both
            // available.
            let choices: Vec<Vec<&FactorInfo>> = infos
                .iter()
                .map(|i| match i {
                    FactorInfo::Quant { inside, outside } => {
                        inside.iter().chain(outside.iter()).collect()
                    }
                    _ => unreachable!("plan/info shape mismatch"),
                })
                .collect();
            let mut chosen: Vec<&FactorInfo> = Vec::with_capacity(infos.len());
            search(inner, &choices, &mut chosen)
        }
    }
}

fn search<'a>(
    inner: &Plan,
    choices: &[Vec<&'a FactorInfo>],
    chosen: &mut Vec<&'a FactorInfo>,
) -> bool {
    if chosen.len() == choices.len() {
        return theta_eval(inner, chosen);
    }
    let i = chosen.len();
    for c in &choices[i] {
        chosen.push(c);
        if search(inner, choices, chosen) {
            chosen.pop();
            return true;
        }
        chosen.pop();
    }
    false
}

/// Truth of each local at one factor. Guarded: the local count must stay
/// within `MAX_MATERIALIZED`.
pub(crate) fn local_truths(
    plan: &Plan,
    factor: &FiniteStructure,
    env: &mut Vec<(Var, usize)>,
) -> Result<Vec<bool>> {
    if plan.local_count() > MAX_MATERIALIZED {
        return Err(Error::Budget {
            needed: plan.local_count(),
            budget: MAX_MATERIALIZED,
        });
    }
    match plan {
        Plan::Atomic { formula } => Ok(vec![factor.satisfies_with_env(formula, env)?]),
        Plan::Not(p) => local_truths(p, factor, env),
        Plan::And(a, b) | Plan::Or(a, b) => {
            let mut l = local_truths(a, factor, env)?;
            l.extend(local_truths(b, factor, env)?);
            Ok(l)
        }
        Plan::Exists {
            var,
            restriction,
            inner,
        } => {
            let m = inner.local_count() as usize;
            let mut realized_in: BTreeSet<u64> = BTreeSet::new();
            let mut realized_out: BTreeSet<u64> = BTreeSet::new();
            for b in 0..factor.size() {
                env.push((var.clone(), b));
                let bits = local_truths(inner, factor, env);
                env.pop();
                let bits = bits?;
                let mut mask = 0u64;
                for (j, &t) in bits.iter().enumerate() {
                    if t {
                        mask |= 1 << j;
                    }
                }
                let in_restriction = match restriction {
                    None => true,
                    Some((phi, pv)) => {
                        env.push((pv.clone(), b));
                        let ok = factor.satisfies_with_env(phi, env);
                        env.pop();
                        ok?
                    }
                };
                if in_restriction {
                    realized_in.insert(mask);
                } else {
                    realized_out.insert(mask);
                }
            }
            let mut out = Vec::with_capacity(1 << m);
            for t in 0..(1u64 << m) {
                out.push(realized_in.contains(&t));
            }
            if restriction.is_some() {
                for t in 0..(1u64 << m) {
                    out.push(realized_out.contains(&t));
                }
            }
            Ok(out)
        }
    }
}

/// Materializes the local formula family. Guarded by `MAX_MATERIALIZED`.
pub(crate) fn local_formulas(plan: &Plan) -> Result<Vec<Formula>> {
    if plan.local_count() > MAX_MATERIALIZED {
        return Err(Error::Budget {
            needed: plan.local_count(),
            budget: MAX_MATERIALIZED,
        });
    }
    match plan {
        Plan::Atomic { formula } => Ok(vec![formula.clone()]),
        Plan::Not(p) => local_formulas(p),
        Plan::And(a, b) | Plan::Or(a, b) => {
            let mut l = local_formulas(a)?;
            l.extend(local_formulas(b)?);
            Ok(l)
        }
        Plan::Exists {
            var,
            restriction,
            inner,
        } => {
            let psis = local_formulas(inner)?;
            let m = psis.len();
            if m > MAX_INNER_LOCALS {
                return Err(Error::Budget {
                    needed: 1u128 << m,
                    budget: 1u128 << MAX_INNER_LOCALS,
                });
            }
            let pattern_body = |t: u64| {
                Formula::and_all((0..m).map(|j| {
                    if t >> j & 1 == 1 {
                        psis[j].clone()
                    } else {
                        Formula::not(psis[j].clone())
                    }
                }))
            };
            let mut out = Vec::new();
            match restriction {
                None => {
                    for t in 0..(1u64 << m) {
                        out.push(Formula::exists(var.clone(), pattern_body(t)));
                    }
                }
                Some((phi, pv)) => {
                    let mut sub = BTreeMap::new();
                    sub.insert(pv.clone(), Term::Var(var.clone()));
                    let phi_x = phi.substitute(&sub);
                    for t in 0..(1u64 << m) {
                        out.push(Formula::exists(
                            var.clone(),
                            Formula::and(phi_x.clone(), pattern_body(t)),
                        ));
                    }
                    for t in 0..(1u64 << m) {
                        out.push(Formula::exists(
                            var.clone(),
                            Formula::and(Formula::not(phi_x.clone()), pattern_body(t)),
                        ));
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Materializes the Boolean-sort formula over variables standing for the
/// Boolean values of this plan's locals.
pub(crate) fn theta_formula(plan: &Plan, locals: &[Term], fresh: &mut usize) -> Result<Formula> {
    match plan {
        Plan::Atomic { .. } => Ok(Formula::Eq(locals[0].clone(), Term::constant("1"))),
        Plan::Not(p) => Ok(Formula::not(theta_formula(p, locals, fresh)?)),
        Plan::And(a, b) | Plan::Or(a, b) => {
            let ca = a.local_count() as usize;
            let l = theta_formula(a, &locals[..ca], fresh)?;
            let r = theta_formula(b, &locals[ca..], fresh)?;
            Ok(match plan {
                Plan::And(..) => Formula::and(l, r),
                _ => Formula::or(l, r),
            })
        }
        Plan::Exists {
            inner, restriction, ..
        } => {
            let m = inner.local_count() as usize;
            if m > MAX_INNER_LOCALS {
                return Err(Error::Budget {
                    needed: 1u128 << m,
                    budget: 1u128 << MAX_INNER_LOCALS,
                });
            }
            let ys: Vec<Var> = (0..m)
                .map(|_| {
                    *fresh += 1;
                    Var::new(format!("Y{fresh}"), "bool")
                })
                .collect();
            let y_terms: Vec<Term> = ys.iter().map(|y| Term::Var(y.clone())).collect();
            let inner_theta = theta_formula(inner, &y_terms, fresh)?;
            let minterm = |t: u64| -> Term {
                let mut acc: Option<Term> = None;
                for (j, y) in y_terms.iter().enumerate() {
                    let lit = if t >> j & 1 == 1 {
                        y.clone()
                    } else {
                        Term::app("compl", vec![y.clone()])
                    };
                    acc = Some(match acc {
                        None => lit,
                        Some(s) => Term::app("meet", vec![s, lit]),
                    });
                }
                acc.unwrap_or_else(|| Term::constant("1"))
            };
            let le = |a: Term, b: Term| {
                Formula::Pred(crate::formula::PredSym::plain("<="), vec![a, b])
            };
            let body = match restriction {
                None => {
                    let constraints = (0..(1u64 << m))
                        .map(|t| le(minterm(t), locals[t as usize].clone()));
                    Formula::and_all(std::iter::once(inner_theta).chain(constraints))
                }
                Some(_) => {
                    *fresh += 1;
                    let w = Var::new(format!("W{fresh}"), "bool");
                    let wt = Term::Var(w.clone());
                    let fin_w = Formula::Pred(
                        crate::formula::PredSym::plain("Fin"),
                        vec![wt.clone()],
                    );
                    let mut parts = vec![inner_theta, fin_w];
                    for t in 0..(1u64 << m) {
                        let cell = minterm(t);
                        parts.push(le(
                            Term::app(
                                "meet",
                                vec![cell.clone(), Term::app("compl", vec![wt.clone()])],
                            ),
                            locals[t as usize].clone(),
                        ));
                        parts.push(le(
                            Term::app("meet", vec![cell, wt.clone()]),
                            locals[(1usize << m) + t as usize].clone(),
                        ));
                    }
                    let inner_body = Formula::and_all(parts);
                    return Ok(wrap_exists(
                        ys.into_iter().chain(std::iter::once(w)).collect(),
                        inner_body,
                    ));
                }
            };
            Ok(wrap_exists(ys, body))
        }
    }
}

fn wrap_exists(vars: Vec<Var>, body: Formula) -> Formula {
    let mut out = body;
    for v in vars.into_iter().rev() {
        out = Formula::exists(v, out);
    }
    out
}
