//! The effective Feferman-Vaught construction: from a formula over the
//! factor signature, local formulas `psi_1..psi_m` and a Boolean-sort
//! formula `Theta` such that truth in a (restricted) product reduces to
//! truth of `Theta` on the Boolean values `[[psi_j]]` over the index
//! algebra. Includes the finite-index specialization (accepted
//! Boolean-value sequences) and the rectangle decomposition of definable
//! sets in finite products.

mod plan;
mod powerset;

pub use powerset::eval_powerset;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::finite::FiniteStructure;
use crate::formula::{Formula, Signature, Term, Var};
use crate::product::{ProductStructure, RestrictionSpec};
use plan::{local_formulas, local_truths, pattern_at, theta_eval, Plan};

/// One factor's contribution to the Boolean side of a sentence translation.
/// Two factors with equal classes are indistinguishable to the translation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorClass(plan::FactorInfo);

/// The result of translating a formula: the plan carries the full inductive
/// structure; the local formulas and `Theta` materialize on demand (they
/// grow doubly exponentially in quantifier depth and are only printable for
/// small inputs).
#[derive(Debug)]
pub struct FvTranslation {
    input: Formula,
    restriction: RestrictionSpec,
    the_plan: Plan,
}

impl FvTranslation {
    pub fn input(&self) -> &Formula {
        &self.input
    }

    pub fn restriction(&self) -> &RestrictionSpec {
        &self.restriction
    }

    /// Number of top-level local formulas.
    pub fn local_count(&self) -> u128 {
        self.the_plan.local_count()
    }

    /// A coarse upper bound on the local count from the inductive
    /// construction: atoms concatenate and each quantifier exponentiates.
    pub fn growth_bound(&self) -> u128 {
        let mut bound = self.the_plan.atom_count() as u128;
        for _ in 0..self.input.quantifier_depth() {
            if bound >= 120 {
                return u128::MAX;
            }
            bound = 1u128 << bound;
            if matches!(self.restriction, RestrictionSpec::PerSort(_)) {
                bound = bound.saturating_mul(2);
            }
        }
        bound
    }

    /// The local formulas `psi_1..psi_m` (budget-guarded).
    pub fn local_formulas(&self) -> Result<Vec<Formula>> {
        local_formulas(&self.the_plan)
    }

    /// The Boolean-sort formula `Theta(X1..Xm)` (budget-guarded).
    pub fn boolean_formula(&self) -> Result<Formula> {
        let m = self.local_count();
        if m > 4096 {
            return Err(Error::Budget {
                needed: m,
                budget: 4096,
            });
        }
        let locals: Vec<Term> = (1..=m as usize)
            .map(|j| Term::Var(Var::new(format!("X{j}"), "bool")))
            .collect();
        let mut fresh = 0usize;
        plan::theta_formula(&self.the_plan, &locals, &mut fresh)
    }

    /// Boolean values `[[psi_j(args)]]` over a finite product, one index
    /// set per local formula (budget-guarded).
    pub fn boolean_values(
        &self,
        product: &ProductStructure,
        vars: &[Var],
        args: &[Vec<usize>],
    ) -> Result<Vec<BTreeSet<usize>>> {
        let m = self.local_count();
        if m > 4096 {
            return Err(Error::Budget {
                needed: m,
                budget: 4096,
            });
        }
        let mut values = vec![BTreeSet::new(); m as usize];
        for (i, factor) in product.factors().iter().enumerate() {
            let mut env: Vec<(Var, usize)> = vars
                .iter()
                .cloned()
                .zip(args.iter().map(|a| a[i]))
                .collect();
            let truths = local_truths(&self.the_plan, factor, &mut env)?;
            for (j, &t) in truths.iter().enumerate() {
                if t {
                    values[j].insert(i);
                }
            }
        }
        Ok(values)
    }

    /// Evaluates the translation over a finite product: per-factor local
    /// evaluation feeding the Boolean-side combination, never evaluating
    /// the product directly.
    pub fn evaluate(
        &self,
        product: &ProductStructure,
        vars: &[Var],
        args: &[Vec<usize>],
    ) -> Result<bool> {
        let free = self.input.free_vars();
        for v in &free {
            if !vars.contains(v) {
                return Err(Error::Invalid(format!(
                    "assignment misses free variable {}",
                    v.name
                )));
            }
        }
        let infos = self.factor_infos(product, vars, args)?;
        let refs: Vec<&plan::FactorInfo> = infos.iter().map(|c| &c.0).collect();
        Ok(theta_eval(&self.the_plan, &refs))
    }

    fn factor_infos(
        &self,
        product: &ProductStructure,
        vars: &[Var],
        args: &[Vec<usize>],
    ) -> Result<Vec<FactorClass>> {
        product
            .factors()
            .iter()
            .enumerate()
            .map(|(i, factor)| {
                let mut env: Vec<(Var, usize)> = vars
                    .iter()
                    .cloned()
                    .zip(args.iter().map(|a| a[i]))
                    .collect();
                Ok(FactorClass(pattern_at(&self.the_plan, factor, &mut env)?))
            })
            .collect()
    }

    /// The class of one factor for a sentence translation.
    pub fn factor_class(&self, factor: &FiniteStructure) -> Result<FactorClass> {
        if !self.input.is_sentence() {
            return Err(Error::Invalid(
                "factor classes are defined for sentences".into(),
            ));
        }
        let mut env = Vec::new();
        Ok(FactorClass(pattern_at(&self.the_plan, factor, &mut env)?))
    }

    /// Truth of the translated sentence over a product assembled from
    /// factor classes.
    pub fn evaluate_on_classes(&self, classes: &[&FactorClass]) -> Result<bool> {
        if classes.is_empty() {
            return Err(Error::Invalid("empty index set".into()));
        }
        let refs: Vec<&plan::FactorInfo> = classes.iter().map(|c| &c.0).collect();
        Ok(theta_eval(&self.the_plan, &refs))
    }
}

type CacheKey = (Formula, Option<BTreeMap<String, Formula>>);

static TRANSLATION_CACHE: Lazy<RwLock<HashMap<CacheKey, Arc<FvTranslation>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

/// The Feferman-Vaught translation of `f` over `sig`, for products
/// restricted by `restriction`. Results are cached by formula.
pub fn translate(
    f: &Formula,
    sig: &Signature,
    restriction: &RestrictionSpec,
) -> Result<Arc<FvTranslation>> {
    sig.check_formula(f)?;
    let key: CacheKey = (
        f.clone(),
        match restriction {
            RestrictionSpec::Unrestricted => None,
            RestrictionSpec::PerSort(m) => Some(m.clone()),
        },
    );
    if let Some(t) = TRANSLATION_CACHE.read().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let the_plan = Plan::build(f, restriction)?;
    let t = Arc::new(FvTranslation {
        input: f.clone(),
        restriction: restriction.clone(),
        the_plan,
    });
    TRANSLATION_CACHE
        .write()
        .unwrap()
        .insert(key, t.clone());
    Ok(t)
}

/// Convenience: translate and evaluate a sentence over a product, and
/// cross-check against direct evaluation. A mismatch is a hard error.
pub fn evaluate_translation_checked(
    f: &Formula,
    product: &ProductStructure,
    budget: u128,
) -> Result<bool> {
    let t = translate(f, product.signature(), product.restriction())?;
    let via_fv = t.evaluate(product, &[], &[])?;
    let direct = product.eval_direct(f, budget)?;
    if via_fv != direct {
        return Err(Error::OracleMismatch(format!(
            "translation disagrees with direct evaluation of {f} on {}: fv={via_fv} direct={direct}",
            product.label()
        )));
    }
    Ok(via_fv)
}

/// The finite-index specialization: local formulas and the accepted
/// Boolean-value sequences over `P({0..s})`. Truth of `f` in any product of
/// `s` structures is equivalent to the sequence of Boolean values of the
/// locals being one of the accepted sequences.
#[derive(Debug, Clone)]
pub struct FiniteIndexTranslation {
    pub locals: Vec<Formula>,
    pub index_count: usize,
    /// Each accepted sequence assigns one subset of `{0..s}` per local.
    pub accepted: Vec<Vec<BTreeSet<usize>>>,
}

pub fn translate_finite_index(
    f: &Formula,
    sig: &Signature,
    s: usize,
) -> Result<FiniteIndexTranslation> {
    if s == 0 {
        return Err(Error::Invalid("index count must be at least 1".into()));
    }
    let t = translate(f, sig, &RestrictionSpec::Unrestricted)?;
    let locals = t.local_formulas()?;
    let m = locals.len();
    let total = (1u128 << s).saturating_pow(m as u32);
    if total > 2_000_000 {
        return Err(Error::Budget {
            needed: total,
            budget: 2_000_000,
        });
    }
    let theta = t.boolean_formula()?;
    let xvars: Vec<Var> = (1..=m).map(|j| Var::new(format!("X{j}"), "bool")).collect();
    let mut accepted = Vec::new();
    let mut seq = vec![0u64; m];
    let full = (1u64 << s) - 1;
    loop {
        let mut asg = BTreeMap::new();
        for (v, &mask) in xvars.iter().zip(&seq) {
            asg.insert(v.clone(), mask);
        }
        if eval_powerset(&theta, s, &asg)? {
            accepted.push(
                seq.iter()
                    .map(|&mask| (0..s).filter(|i| mask >> i & 1 == 1).collect())
                    .collect(),
            );
        }
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(FiniteIndexTranslation {
                    locals,
                    index_count: s,
                    accepted,
                });
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] <= full {
                break;
            }
            seq[i] = 0;
        }
    }
}

/// One rectangle: per factor, the list of element tuples allowed there.
pub type Rectangle = Vec<Vec<Vec<usize>>>;

/// Decomposes the solution set of `f` over a finite product into a disjoint
/// union of rectangles, by grouping each factor's tuples into classes
/// indistinguishable to the translation and keeping the class combinations
/// on which the Boolean side holds.
pub fn rectangles(
    f: &Formula,
    product: &ProductStructure,
) -> Result<(Vec<Var>, Vec<Rectangle>)> {
    product.signature().check_formula(f)?;
    let vars: Vec<Var> = f.free_vars().into_iter().collect();
    let t = translate(f, product.signature(), &RestrictionSpec::Unrestricted)?;
    // Group each factor's tuples by their factor info.
    let mut per_factor: Vec<Vec<(plan::FactorInfo, Vec<Vec<usize>>)>> = Vec::new();
    for factor in product.factors() {
        let mut classes: BTreeMap<plan::FactorInfo, Vec<Vec<usize>>> = BTreeMap::new();
        let k = vars.len();
        let mut tuple = vec![0usize; k];
        loop {
            let mut env: Vec<(Var, usize)> =
                vars.iter().cloned().zip(tuple.iter().copied()).collect();
            let info = pattern_at(&t.the_plan, factor, &mut env)?;
            classes.entry(info).or_default().push(tuple.clone());
            let mut i = k;
            let mut done = false;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                tuple[i] += 1;
                if tuple[i] < factor.size() {
                    break;
                }
                tuple[i] = 0;
            }
            if done {
                break;
            }
        }
        per_factor.push(classes.into_iter().collect());
    }
    let combos: u128 = per_factor.iter().map(|c| c.len() as u128).product();
    if combos > 2_000_000 {
        return Err(Error::Budget {
            needed: combos,
            budget: 2_000_000,
        });
    }
    // Enumerate class combinations; each satisfying combination is one
    // rectangle.
    let s = per_factor.len();
    let mut rects = Vec::new();
    let mut choice = vec![0usize; s];
    loop {
        let infos: Vec<&plan::FactorInfo> = choice
            .iter()
            .enumerate()
            .map(|(i, &c)| &per_factor[i][c].0)
            .collect();
        if theta_eval(&t.the_plan, &infos) {
            rects.push(
                choice
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| per_factor[i][c].1.clone())
                    .collect(),
            );
        }
        let mut i = s;
        loop {
            if i == 0 {
                return Ok((vars, rects));
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < per_factor[i].len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn zn(n: u64) -> FiniteStructure {
        FiniteStructure::ring_mod(n).unwrap()
    }

    fn ring_f(s: &str) -> Formula {
        parse_formula(s, &Signature::ring()).unwrap()
    }

    fn unrestricted() -> RestrictionSpec {
        RestrictionSpec::Unrestricted
    }

    #[test]
    fn atomic_translation_shape() {
        let f = ring_f("x = w");
        let t = translate(&f, &Signature::ring(), &unrestricted()).unwrap();
        assert_eq!(t.local_count(), 1);
        let locals = t.local_formulas().unwrap();
        assert_eq!(locals, vec![f]);
        let theta = t.boolean_formula().unwrap();
        assert_eq!(crate::formula::render(&theta), "X1 = 1");
    }

    #[test]
    fn negation_negates_theta() {
        let f = ring_f("~(x = 0)");
        let t = translate(&f, &Signature::ring(), &unrestricted()).unwrap();
        assert_eq!(t.local_count(), 1);
        let theta = t.boolean_formula().unwrap();
        assert_eq!(crate::formula::render(&theta), "~(X1 = 1)");
    }

    #[test]
    fn cross_idempotent_witness_on_z2xz2() {
        // exists x (x^2 = x and x != 0 and x != 1): false in both factors
        // alone, true in the product via the witness (1, 0).
        let f = ring_f("exists x. (x * x = x /\\ x != 0 /\\ x != 1)");
        let p = ProductStructure::new(vec![zn(2), zn(2)]).unwrap();
        let t = translate(&f, &Signature::ring(), &unrestricted()).unwrap();
        assert!(t.evaluate(&p, &[], &[]).unwrap());
        assert!(p.eval_direct(&f, 1 << 30).unwrap());
        // Degenerate one-factor product: factor truth.
        let single = ProductStructure::new(vec![zn(4)]).unwrap();
        assert!(!t.evaluate(&single, &[], &[]).unwrap());
    }

    #[test]
    fn checked_evaluation_on_sentences() {
        let sentences = [
            "forall x. forall w. x * w = w * x",
            "exists x. (x * x = x /\\ x != 0 /\\ x != 1)",
            "forall x. x * x * x = x",
            "exists x. x * x = 0 - 1",
            "forall x. (exists w. x * w = 1) \\/ x = 0",
        ];
        let products = [
            ProductStructure::new(vec![zn(2), zn(3)]).unwrap(),
            ProductStructure::new(vec![zn(4), zn(9)]).unwrap(),
            ProductStructure::new(vec![zn(2), zn(2), zn(5)]).unwrap(),
            ProductStructure::new(vec![zn(6)]).unwrap(),
        ];
        for s in sentences {
            let f = ring_f(s);
            for p in &products {
                evaluate_translation_checked(&f, p, 1 << 34).unwrap();
            }
        }
    }

    #[test]
    fn finite_index_tautology() {
        let f = ring_f("forall x. x = x");
        let ft = translate_finite_index(&f, &Signature::ring(), 2).unwrap();
        // Every Boolean-value sequence is accepted for a tautology.
        let total = (1usize << 2i32.pow(ft.locals.len() as u32 - 1)).pow(1);
        assert!(!ft.accepted.is_empty());
        assert_eq!(
            ft.accepted.len(),
            (1usize << 2).pow(ft.locals.len() as u32),
            "all {total} sequences accepted"
        );
    }

    #[test]
    fn finite_index_atomic_sentence() {
        // For an atomic sentence the single local is the sentence and a
        // sequence is accepted exactly when its value is the full index set.
        let f = ring_f("1 + 1 = 0");
        let ft = translate_finite_index(&f, &Signature::ring(), 3).unwrap();
        assert_eq!(ft.locals.len(), 1);
        let full: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
        assert_eq!(ft.accepted, vec![vec![full]]);
    }

    #[test]
    fn rectangles_full_and_idempotent() {
        let p = ProductStructure::new(vec![zn(2), zn(3)]).unwrap();
        // x = x: one full rectangle.
        let (_, rects) = rectangles(&ring_f("x = x"), &p).unwrap();
        assert_eq!(rects.len(), 1);
        assert_eq!(rects[0][0].len(), 2);
        assert_eq!(rects[0][1].len(), 3);
        // Idempotents decompose componentwise: {0,1} x {0,1}.
        let (_, rects) = rectangles(&ring_f("x * x = x"), &p).unwrap();
        let mut first: BTreeSet<usize> = BTreeSet::new();
        let mut second: BTreeSet<usize> = BTreeSet::new();
        for r in &rects {
            for t in &r[0] {
                first.insert(t[0]);
            }
            for t in &r[1] {
                second.insert(t[0]);
            }
        }
        assert_eq!(first, [0, 1].into_iter().collect());
        assert_eq!(second, [0, 1].into_iter().collect());
    }

    #[test]
    fn rectangles_union_matches_brute_force() {
        let p = ProductStructure::new(vec![zn(3), zn(4)]).unwrap();
        for s in ["x * x = x", "exists w. x = w + w", "x = 0 \\/ x = 1"] {
            let f = ring_f(s);
            let (vars, rects) = rectangles(&f, &p).unwrap();
            // Collect the union of the rectangles as tuples of product
            // elements (k = 1 free variable here).
            let mut union: BTreeSet<Vec<usize>> = BTreeSet::new();
            for r in &rects {
                for t0 in &r[0] {
                    for t1 in &r[1] {
                        union.insert(vec![t0[0], t1[0]]);
                    }
                }
            }
            let mut direct: BTreeSet<Vec<usize>> = BTreeSet::new();
            for a0 in 0..3usize {
                for a1 in 0..4usize {
                    let mut asg = BTreeMap::new();
                    asg.insert(vars[0].clone(), vec![a0, a1]);
                    if p.satisfies_assignment(&f, &asg).unwrap() {
                        direct.insert(vec![a0, a1]);
                    }
                }
            }
            assert_eq!(union, direct, "{s}");
        }
    }

    #[test]
    fn theta_formula_matches_plan_on_small_cases() {
        // Bind the printed Theta to the plan evaluator through the powerset
        // semantics on 2 indices.
        let f = ring_f("exists x. x * x = x");
        let t = translate(&f, &Signature::ring(), &unrestricted()).unwrap();
        let theta = t.boolean_formula().unwrap();
        let locals = t.local_formulas().unwrap();
        let m = locals.len();
        for p in [
            ProductStructure::new(vec![zn(2), zn(3)]).unwrap(),
            ProductStructure::new(vec![zn(4), zn(5)]).unwrap(),
        ] {
            let values = t.boolean_values(&p, &[], &[]).unwrap();
            let mut asg = BTreeMap::new();
            for (j, set) in values.iter().enumerate() {
                let mask = set.iter().fold(0u64, |m, &i| m | 1 << i);
                asg.insert(Var::new(format!("X{}", j + 1), "bool"), mask);
            }
            assert_eq!(values.len(), m);
            let via_theta = eval_powerset(&theta, 2, &asg).unwrap();
            let via_plan = t.evaluate(&p, &[], &[]).unwrap();
            assert_eq!(via_theta, via_plan, "{}", p.label());
        }
    }

    #[test]
    fn restricted_translation_evaluates_like_unrestricted_on_finite_products(
    ) {
        // Over a finite index set the restriction is vacuous for truth.
        let f = ring_f("exists x. forall w. x * w = w");
        let phi = ring_f("v * v = v");
        let r = RestrictionSpec::single(phi).unwrap();
        let tu = translate(&f, &Signature::ring(), &unrestricted()).unwrap();
        let tr = translate(&f, &Signature::ring(), &r).unwrap();
        assert!(tr.local_count() > tu.local_count());
        for p in [
            ProductStructure::new(vec![zn(2), zn(3)]).unwrap(),
            ProductStructure::new(vec![zn(4), zn(6)]).unwrap(),
        ] {
            assert_eq!(
                tu.evaluate(&p, &[], &[]).unwrap(),
                tr.evaluate(&p, &[], &[]).unwrap()
            );
        }
    }
}
