//! Negation normal form, prenex normal form, and relativization of ring
//! formulas to the subring carved out by an idempotent.

use std::collections::BTreeSet;

use super::{fresh_name, Formula, Term, Var};

/// Pushes negations onto atoms and removes double negations. The result has
/// `~` applied to atomic formulas only.
pub fn to_nnf(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Eq(..) | Formula::Pred(..) => f.clone(),
        Formula::Not(g) => nnf_neg(g),
        Formula::And(a, b) => Formula::and(to_nnf(a), to_nnf(b)),
        Formula::Or(a, b) => Formula::or(to_nnf(a), to_nnf(b)),
        Formula::Forall(v, b) => Formula::forall(v.clone(), to_nnf(b)),
        Formula::Exists(v, b) => Formula::exists(v.clone(), to_nnf(b)),
    }
}

fn nnf_neg(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Eq(..) | Formula::Pred(..) => Formula::not(f.clone()),
        Formula::Not(g) => to_nnf(g),
        Formula::And(a, b) => Formula::or(nnf_neg(a), nnf_neg(b)),
        Formula::Or(a, b) => Formula::and(nnf_neg(a), nnf_neg(b)),
        Formula::Forall(v, b) => Formula::exists(v.clone(), nnf_neg(b)),
        Formula::Exists(v, b) => Formula::forall(v.clone(), nnf_neg(b)),
    }
}

/// Renames bound variables so that no two binders share a name and no bound
/// name collides with a free variable.
pub fn freshen_bound(f: &Formula) -> Formula {
    let mut used: BTreeSet<String> = f.free_vars().into_iter().map(|v| v.name).collect();
    fn walk(
        f: &Formula,
        env: &mut Vec<(Var, Var)>,
        used: &mut BTreeSet<String>,
    ) -> Formula {
        match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Eq(a, b) => Formula::Eq(rename_term(a, env), rename_term(b, env)),
            Formula::Pred(p, args) => Formula::Pred(
                p.clone(),
                args.iter().map(|a| rename_term(a, env)).collect(),
            ),
            Formula::Not(g) => Formula::not(walk(g, env, used)),
            Formula::And(a, b) => {
                let l = walk(a, env, used);
                Formula::and(l, walk(b, env, used))
            }
            Formula::Or(a, b) => {
                let l = walk(a, env, used);
                Formula::or(l, walk(b, env, used))
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let name = fresh_name(&v.name, used);
                used.insert(name.clone());
                let v2 = Var::new(name, v.sort.clone());
                env.push((v.clone(), v2.clone()));
                let inner = walk(body, env, used);
                env.pop();
                match f {
                    Formula::Forall(..) => Formula::forall(v2, inner),
                    _ => Formula::exists(v2, inner),
                }
            }
        }
    }
    fn rename_term(t: &Term, env: &[(Var, Var)]) -> Term {
        match t {
            Term::Var(v) => match env.iter().rev().find(|(old, _)| old == v) {
                Some((_, new)) => Term::Var(new.clone()),
                None => t.clone(),
            },
            Term::Const(_) => t.clone(),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|a| rename_term(a, env)).collect(),
            ),
        }
    }
    walk(f, &mut Vec::new(), &mut used)
}

/// Prenex normal form: a quantifier prefix over a quantifier-free matrix,
/// equivalent to the input on every structure. Bound variables are renamed
/// apart first, so pulling quantifiers over the sibling subformula cannot
/// capture.
pub fn to_prenex(f: &Formula) -> Formula {
    let f = freshen_bound(f);
    let (prefix, matrix) = pull(&f);
    let mut out = matrix;
    for (universal, v) in prefix.into_iter().rev() {
        out = if universal {
            Formula::forall(v, out)
        } else {
            Formula::exists(v, out)
        };
    }
    out
}

fn pull(f: &Formula) -> (Vec<(bool, Var)>, Formula) {
    match f {
        Formula::True | Formula::False | Formula::Eq(..) | Formula::Pred(..) => {
            (Vec::new(), f.clone())
        }
        Formula::Not(g) => {
            let (p, m) = pull(g);
            if p.is_empty() {
                (Vec::new(), f.clone())
            } else {
                let flipped = p.into_iter().map(|(u, v)| (!u, v)).collect();
                (flipped, Formula::not(m))
            }
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (mut pa, ma) = pull(a);
            let (pb, mb) = pull(b);
            pa.extend(pb);
            let m = match f {
                Formula::And(..) => Formula::and(ma, mb),
                _ => Formula::or(ma, mb),
            };
            (pa, m)
        }
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let (mut p, m) = pull(body);
            let universal = matches!(f, Formula::Forall(..));
            p.insert(0, (universal, v.clone()));
            (p, m)
        }
    }
}

/// Result of [`relativize_to_idempotent`].
#[derive(Debug, Clone)]
pub struct Relativized {
    pub formula: Formula,
    /// The fresh free variable standing for the idempotent.
    pub idempotent: Var,
    /// True when the preferred name `y` was taken and a primed name was
    /// chosen instead.
    pub renamed: bool,
}

/// Builds, from a ring formula `f(x1..xn)`, the formula `F(y, x1..xn)` such
/// that for every commutative ring `R`, idempotent `e`, and elements `ai`:
/// the subring `eR` (with unit `e`) satisfies `f(e*a1, ..., e*an)` exactly
/// when `R` satisfies `F(e, a1, ..., an)`.
///
/// Quantifiers are relativized to `{z : z = y*z}`, the constant `1` becomes
/// `y`, and every free variable `x` is replaced by `y*x`.
pub fn relativize_to_idempotent(f: &Formula) -> Relativized {
    let f = freshen_bound(f);
    let used = f.all_var_names();
    let name = fresh_name("y", &used);
    let renamed = name != "y";
    let sort = f
        .free_vars()
        .iter()
        .next()
        .map(|v| v.sort.clone())
        .unwrap_or_else(|| "ring".to_string());
    let y = Var::new(name, sort);
    let free = f.free_vars();
    let formula = rel(&f, &y, &free);
    Relativized {
        formula,
        idempotent: y,
        renamed,
    }
}

fn rel(f: &Formula, y: &Var, free: &BTreeSet<Var>) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Eq(a, b) => Formula::Eq(rel_term(a, y, free), rel_term(b, y, free)),
        Formula::Pred(p, args) => Formula::Pred(
            p.clone(),
            args.iter().map(|a| rel_term(a, y, free)).collect(),
        ),
        Formula::Not(g) => Formula::not(rel(g, y, free)),
        Formula::And(a, b) => Formula::and(rel(a, y, free), rel(b, y, free)),
        Formula::Or(a, b) => Formula::or(rel(a, y, free), rel(b, y, free)),
        Formula::Exists(z, body) => {
            let guard = membership_guard(z, y);
            Formula::exists(z.clone(), Formula::and(guard, rel(body, y, free)))
        }
        Formula::Forall(z, body) => {
            let guard = membership_guard(z, y);
            Formula::forall(
                z.clone(),
                Formula::or(Formula::not(guard), rel(body, y, free)),
            )
        }
    }
}

/// `z = y*z`, i.e. `z` lies in the subring carved out by the idempotent.
fn membership_guard(z: &Var, y: &Var) -> Formula {
    Formula::Eq(
        Term::Var(z.clone()),
        Term::app("*", vec![Term::Var(y.clone()), Term::Var(z.clone())]),
    )
}

fn rel_term(t: &Term, y: &Var, free: &BTreeSet<Var>) -> Term {
    match t {
        Term::Var(v) => {
            if free.contains(v) {
                Term::app("*", vec![Term::Var(y.clone()), t.clone()])
            } else {
                t.clone()
            }
        }
        Term::Const(c) if c == "1" => Term::Var(y.clone()),
        Term::Const(_) => t.clone(),
        Term::App(g, args) => Term::App(
            g.clone(),
            args.iter().map(|a| rel_term(a, y, free)).collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, render, Signature};

    fn ring(s: &str) -> Formula {
        parse_formula(s, &Signature::ring()).unwrap()
    }

    #[test]
    fn nnf_pushes_negation() {
        let f = ring("~(x = 0 /\\ y = 0)");
        let g = to_nnf(&f);
        assert_eq!(render(&g), "~(x = 0) \\/ ~(y = 0)");
    }

    #[test]
    fn nnf_flips_quantifiers() {
        let f = ring("~forall x. x = 0");
        let g = to_nnf(&f);
        assert_eq!(render(&g), "exists x. ~(x = 0)");
    }

    #[test]
    fn nnf_identity_on_nnf() {
        let f = ring("~(x = 0) \\/ y = 1");
        assert_eq!(to_nnf(&f), f);
    }

    #[test]
    fn prenex_pulls_exists() {
        let f = ring("(exists x. x * w = w) /\\ w = w");
        let g = to_prenex(&f);
        assert_eq!(render(&g), "exists x. x * w = w /\\ w = w");
    }

    #[test]
    fn prenex_identity_on_prenex() {
        let f = ring("forall x. exists w. x * w = x");
        assert_eq!(to_prenex(&f), f);
    }

    #[test]
    fn prenex_renames_clashing_binders() {
        let f = ring("(exists x. x = 0) /\\ (exists x. x = 1)");
        let g = to_prenex(&f);
        assert_eq!(render(&g), "exists x. exists x'. x = 0 /\\ x' = 1");
    }

    #[test]
    fn relativize_atomic() {
        let r = relativize_to_idempotent(&ring("x = 0"));
        assert!(!r.renamed);
        assert_eq!(render(&r.formula), "y * x = 0");
    }

    #[test]
    fn relativize_replaces_one_and_guards_quantifiers() {
        let r = relativize_to_idempotent(&ring("exists z. z * x = 1"));
        assert_eq!(
            render(&r.formula),
            "exists z. z = y * z /\\ z * (y * x) = y"
        );
    }

    #[test]
    fn relativize_renames_on_collision() {
        let r = relativize_to_idempotent(&ring("y = 0"));
        assert!(r.renamed);
        assert_eq!(render(&r.formula), "y' * y = 0");
    }

    #[test]
    fn relativize_extends_free_vars_by_exactly_the_idempotent() {
        let f = ring("exists z. z * x = w");
        let r = relativize_to_idempotent(&f);
        let mut want = f.free_vars();
        want.insert(r.idempotent.clone());
        assert_eq!(r.formula.free_vars(), want);
    }
}
