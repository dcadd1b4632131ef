//! Finite-index products of finite structures: componentwise operations,
//! Boolean values as index sets, supports, and stalks at atoms.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::finite::FiniteStructure;
use crate::formula::{Formula, Signature, Term, Var};

/// Restriction defining a restricted product: per sort, a formula in one
/// free variable of that sort which all but finitely many coordinates must
/// satisfy. Vacuous over a finite index set, but recorded and honored by the
/// translation machinery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RestrictionSpec {
    Unrestricted,
    PerSort(BTreeMap<String, Formula>),
}

impl RestrictionSpec {
    /// Restriction by one formula over a one-sorted signature.
    pub fn single(f: Formula) -> Result<RestrictionSpec> {
        let free = f.free_vars();
        if free.len() != 1 {
            return Err(Error::Invalid(
                "restriction formula must have exactly one free variable".into(),
            ));
        }
        let sort = free.iter().next().unwrap().sort.clone();
        let mut m = BTreeMap::new();
        m.insert(sort, f);
        Ok(RestrictionSpec::PerSort(m))
    }

    pub fn for_sort(&self, sort: &str) -> Option<&Formula> {
        match self {
            RestrictionSpec::Unrestricted => None,
            RestrictionSpec::PerSort(m) => m.get(sort),
        }
    }
}

/// A product of finitely many structures over a shared signature. Elements
/// are index-length tuples with componentwise operations.
#[derive(Debug, Clone)]
pub struct ProductStructure {
    factors: Vec<FiniteStructure>,
    labels: Vec<String>,
    restriction: RestrictionSpec,
}

impl ProductStructure {
    pub fn new(factors: Vec<FiniteStructure>) -> Result<ProductStructure> {
        let labels = factors.iter().map(|f| f.label().to_string()).collect();
        ProductStructure::with_labels(factors, labels, RestrictionSpec::Unrestricted)
    }

    pub fn with_labels(
        factors: Vec<FiniteStructure>,
        labels: Vec<String>,
        restriction: RestrictionSpec,
    ) -> Result<ProductStructure> {
        if factors.is_empty() {
            return Err(Error::Invalid("a product needs at least one factor".into()));
        }
        if labels.len() != factors.len() {
            return Err(Error::Invalid("one label per factor required".into()));
        }
        let sig = factors[0].signature().clone();
        for f in &factors[1..] {
            if f.signature().as_ref() != sig.as_ref() {
                return Err(Error::Sort(
                    "all factors must share one signature".into(),
                ));
            }
        }
        Ok(ProductStructure {
            factors,
            labels,
            restriction,
        })
    }

    pub fn factors(&self) -> &[FiniteStructure] {
        &self.factors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn restriction(&self) -> &RestrictionSpec {
        &self.restriction
    }

    pub fn index_count(&self) -> usize {
        self.factors.len()
    }

    pub fn signature(&self) -> &Signature {
        self.factors[0].signature()
    }

    pub fn label(&self) -> String {
        self.labels.join(" x ")
    }

    /// Total carrier size (one-sorted).
    pub fn size(&self) -> Result<u128> {
        let mut n: u128 = 1;
        for f in &self.factors {
            n = n
                .checked_mul(f.size() as u128)
                .ok_or_else(|| Error::Invalid("product too large".into()))?;
        }
        Ok(n)
    }

    pub fn all_rings(&self) -> bool {
        self.factors.iter().all(|f| f.is_ring())
    }

    /// The Boolean value `[[f(args)]]`: the set of indices whose factor
    /// satisfies the formula at the projected arguments.
    pub fn boolean_value(
        &self,
        f: &Formula,
        vars: &[Var],
        args: &[Vec<usize>],
    ) -> Result<BTreeSet<usize>> {
        for a in args {
            if a.len() != self.index_count() {
                return Err(Error::Invalid(
                    "argument tuple length does not match the index count".into(),
                ));
            }
        }
        let mut out = BTreeSet::new();
        for (i, factor) in self.factors.iter().enumerate() {
            let mut asg = BTreeMap::new();
            for (v, a) in vars.iter().zip(args) {
                asg.insert(v.clone(), a[i]);
            }
            if factor.satisfies(f, &asg)? {
                out.insert(i);
            }
        }
        Ok(out)
    }

    /// The idempotent-support of an element: the indices where it is
    /// nonzero (ring factors).
    pub fn support(&self, a: &[usize]) -> Result<BTreeSet<usize>> {
        if !self.all_rings() {
            return Err(Error::Invalid("support is defined for ring products".into()));
        }
        Ok(a.iter()
            .enumerate()
            .filter(|(i, &v)| v != self.factors[*i].zero())
            .map(|(i, _)| i)
            .collect())
    }

    /// The idempotent `e_X`: 1 on `X`, 0 elsewhere.
    pub fn idempotent_of_set(&self, x: &BTreeSet<usize>) -> Result<Vec<usize>> {
        if !self.all_rings() {
            return Err(Error::Invalid(
                "idempotents of sets are defined for ring products".into(),
            ));
        }
        Ok((0..self.index_count())
            .map(|i| {
                if x.contains(&i) {
                    self.factors[i].one()
                } else {
                    self.factors[i].zero()
                }
            })
            .collect())
    }

    pub fn componentwise<F: Fn(&FiniteStructure, usize, usize) -> usize>(
        &self,
        a: &[usize],
        b: &[usize],
        op: F,
    ) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, f)| op(f, a[i], b[i]))
            .collect()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.factors[i + 1].size();
        }
        s
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        let strides = self.strides();
        tuple.iter().zip(&strides).map(|(t, s)| t * s).sum()
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.factors.len()];
        for i in (0..self.factors.len()).rev() {
            let n = self.factors[i].size();
            out[i] = idx % n;
            idx /= n;
        }
        out
    }

    /// Exact truth of a sentence by exhaustive enumeration over product
    /// elements. The cost estimate `size^depth` must stay within `budget`.
    pub fn eval_direct(&self, sentence: &Formula, budget: u128) -> Result<bool> {
        if !sentence.is_sentence() {
            return Err(Error::Invalid("eval_direct requires a sentence".into()));
        }
        self.satisfies_assignment_with_budget(sentence, &BTreeMap::new(), budget)
    }

    /// Truth of a formula under an assignment of product elements (as
    /// tuples) to its free variables.
    pub fn satisfies_assignment(
        &self,
        f: &Formula,
        asg: &BTreeMap<Var, Vec<usize>>,
    ) -> Result<bool> {
        self.satisfies_assignment_with_budget(f, asg, 1 << 40)
    }

    pub fn satisfies_assignment_with_budget(
        &self,
        f: &Formula,
        asg: &BTreeMap<Var, Vec<usize>>,
        budget: u128,
    ) -> Result<bool> {
        let size = self.size()?;
        let depth = f.quantifier_depth() as u32;
        let needed = size.checked_pow(depth).unwrap_or(u128::MAX);
        if needed > budget {
            return Err(Error::Budget { needed, budget });
        }
        let ev = DirectEval {
            product: self,
            strides: self.strides(),
        };
        let mut env = Vec::new();
        for (v, tuple) in asg {
            if tuple.len() != self.index_count() {
                return Err(Error::Invalid(format!(
                    "assignment for {} has wrong tuple length",
                    v.name
                )));
            }
            env.push((v.clone(), self.encode(tuple)));
        }
        ev.eval(f, &mut env)
    }

    /// Materializes the product as a single finite structure with explicit
    /// tables. Guarded, for small products only.
    pub fn as_finite_structure(&self, max_size: usize) -> Result<FiniteStructure> {
        let size = self.size()? as usize;
        if self.size()? > max_size as u128 {
            return Err(Error::Budget {
                needed: self.size()?,
                budget: max_size as u128,
            });
        }
        let sig = self.factors[0].signature().clone();
        let sort = sig
            .single_sort()
            .ok_or_else(|| Error::Invalid("one-sorted products only".into()))?
            .to_string();
        let mut functions = BTreeMap::new();
        for (name, decl) in sig.functions() {
            if decl.arg_sorts.len() != 2 {
                return Err(Error::Invalid(
                    "table materialization supports binary functions only".into(),
                ));
            }
            let mut t = vec![0usize; size * size];
            for a in 0..size {
                let da = self.decode(a);
                for b in 0..size {
                    let db = self.decode(b);
                    let r: Vec<usize> = self
                        .factors
                        .iter()
                        .enumerate()
                        .map(|(i, f)| f.apply(name, &[da[i], db[i]]))
                        .collect();
                    t[a * size + b] = self.encode(&r);
                }
            }
            functions.insert(name.clone(), t);
        }
        let mut constants = BTreeMap::new();
        for (name, _) in sig.constants() {
            let tuple: Vec<usize> = self
                .factors
                .iter()
                .map(|f| f.constant(name).unwrap())
                .collect();
            constants.insert(name.clone(), self.encode(&tuple));
        }
        let mut carrier_sizes = BTreeMap::new();
        carrier_sizes.insert(sort, size);
        FiniteStructure::from_tables(
            self.factors[0].signature().clone(),
            carrier_sizes,
            functions,
            BTreeMap::new(),
            constants,
            self.label(),
        )
    }

    /// Returns factor `i` and verifies that the map `e_i * a -> a(i)` is a
    /// ring isomorphism from the stalk of the product at the atom `e_i`
    /// onto the factor.
    pub fn stalk_at_atom(&self, i: usize) -> Result<&FiniteStructure> {
        if i >= self.index_count() {
            return Err(Error::Invalid(format!("no factor {i}")));
        }
        if !self.all_rings() {
            return Err(Error::Invalid("stalks are defined for ring products".into()));
        }
        let factor = &self.factors[i];
        // The stalk e_i * P consists of the tuples supported at i alone;
        // the isomorphism onto factor i picks coordinate i. Check that the
        // componentwise operations transport along it, table by table.
        let embed = |x: usize| -> Vec<usize> {
            (0..self.index_count())
                .map(|j| if j == i { x } else { self.factors[j].zero() })
                .collect()
        };
        for op in ["+", "-", "*"] {
            for a in 0..factor.size() {
                for b in 0..factor.size() {
                    let got =
                        self.componentwise(&embed(a), &embed(b), |f, x, w| f.apply(op, &[x, w]));
                    if got != embed(factor.apply(op, &[a, b])) {
                        return Err(Error::OracleMismatch(format!(
                            "stalk at atom {i} is not isomorphic to factor {i} (op {op} at {a},{b})"
                        )));
                    }
                }
            }
        }
        // The unit of the stalk is e_i itself and must map to the factor's 1.
        let e_i = self.idempotent_of_set(&[i].into_iter().collect())?;
        if e_i[i] != factor.one() {
            return Err(Error::OracleMismatch(format!(
                "unit of the stalk at atom {i} does not map to 1"
            )));
        }
        Ok(factor)
    }
}

struct DirectEval<'a> {
    product: &'a ProductStructure,
    strides: Vec<usize>,
}

impl<'a> DirectEval<'a> {
    fn digit(&self, x: usize, i: usize) -> usize {
        x / self.strides[i] % self.product.factors[i].size()
    }

    fn eval_term(&self, t: &Term, env: &[(Var, usize)]) -> Result<usize> {
        match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(w, _)| w == v)
                .map(|(_, x)| *x)
                .ok_or_else(|| Error::Invalid(format!("unassigned variable {}", v.name))),
            Term::Const(c) => {
                let mut acc = 0usize;
                for (i, f) in self.product.factors.iter().enumerate() {
                    let v = f
                        .constant(c)
                        .ok_or_else(|| Error::Sort(format!("unknown constant {c}")))?;
                    acc += v * self.strides[i];
                }
                Ok(acc)
            }
            Term::App(name, args) => {
                let vals: Vec<usize> = args
                    .iter()
                    .map(|a| self.eval_term(a, env))
                    .collect::<Result<_>>()?;
                let mut acc = 0usize;
                for (i, f) in self.product.factors.iter().enumerate() {
                    let digs: Vec<usize> = vals.iter().map(|&v| self.digit(v, i)).collect();
                    acc += f.apply(name, &digs) * self.strides[i];
                }
                Ok(acc)
            }
        }
    }

    fn eval(&self, f: &Formula, env: &mut Vec<(Var, usize)>) -> Result<bool> {
        match f {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Eq(a, b) => Ok(self.eval_term(a, env)? == self.eval_term(b, env)?),
            Formula::Pred(p, args) => {
                // A relation holds in the product when it holds in every
                // factor.
                let vals: Vec<usize> = args
                    .iter()
                    .map(|a| self.eval_term(a, env))
                    .collect::<Result<_>>()?;
                for (i, factor) in self.product.factors.iter().enumerate() {
                    let digs: Vec<usize> = vals.iter().map(|&v| self.digit(v, i)).collect();
                    let vars: Vec<Var> = (0..digs.len())
                        .map(|k| Var::new(format!("__a{k}"), "ring"))
                        .collect();
                    let atom = Formula::Pred(
                        p.clone(),
                        vars.iter().map(|v| Term::Var(v.clone())).collect(),
                    );
                    let mut asg = BTreeMap::new();
                    for (v, &d) in vars.iter().zip(&digs) {
                        asg.insert(v.clone(), d);
                    }
                    if !factor.satisfies(&atom, &asg)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Not(g) => Ok(!self.eval(g, env)?),
            Formula::And(a, b) => Ok(self.eval(a, env)? && self.eval(b, env)?),
            Formula::Or(a, b) => Ok(self.eval(a, env)? || self.eval(b, env)?),
            Formula::Forall(v, body) => {
                let size = self.product.size()? as usize;
                for x in 0..size {
                    env.push((v.clone(), x));
                    let ok = self.eval(body, env);
                    env.pop();
                    if !ok? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Exists(v, body) => {
                let size = self.product.size()? as usize;
                for x in 0..size {
                    env.push((v.clone(), x));
                    let ok = self.eval(body, env);
                    env.pop();
                    if ok? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
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

    fn z2xz3() -> ProductStructure {
        ProductStructure::new(vec![zn(2), zn(3)]).unwrap()
    }

    #[test]
    fn boolean_values_componentwise() {
        let p = z2xz3();
        let f = ring_f("x * x = x");
        let x = Var::new("x", "ring");
        // a = (1, 2): idempotent in Z/2, not in Z/3.
        let bv = p.boolean_value(&f, &[x.clone()], &[vec![1, 2]]).unwrap();
        assert_eq!(bv, [0].into_iter().collect());
        let bv = p
            .boolean_value(&ring_f("x = x"), &[x.clone()], &[vec![1, 2]])
            .unwrap();
        assert_eq!(bv, [0, 1].into_iter().collect());
        let bv = p
            .boolean_value(&ring_f("x != x"), &[x], &[vec![1, 2]])
            .unwrap();
        assert!(bv.is_empty());
    }

    #[test]
    fn support_and_idempotents() {
        let p = z2xz3();
        assert_eq!(p.support(&[0, 2]).unwrap(), [1].into_iter().collect());
        let p3 = ProductStructure::new(vec![zn(2), zn(3), zn(5)]).unwrap();
        for mask in 0..8usize {
            let x: BTreeSet<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
            let e = p3.idempotent_of_set(&x).unwrap();
            assert_eq!(p3.support(&e).unwrap(), x);
        }
        // e_X * e_Y = e_{X and Y}.
        for mx in 0..8usize {
            for my in 0..8usize {
                let x: BTreeSet<usize> = (0..3).filter(|i| mx >> i & 1 == 1).collect();
                let y: BTreeSet<usize> = (0..3).filter(|i| my >> i & 1 == 1).collect();
                let ex = p3.idempotent_of_set(&x).unwrap();
                let ey = p3.idempotent_of_set(&y).unwrap();
                let prod = p3.componentwise(&ex, &ey, |f, a, b| f.mul(a, b));
                let inter: BTreeSet<usize> = x.intersection(&y).copied().collect();
                assert_eq!(prod, p3.idempotent_of_set(&inter).unwrap());
            }
        }
    }

    #[test]
    fn direct_eval_idempotent_sentence() {
        let f = ring_f("exists x. (x * x = x /\\ x != 0 /\\ x != 1)");
        let p = ProductStructure::new(vec![zn(2), zn(2)]).unwrap();
        assert!(p.eval_direct(&f, 1 << 30).unwrap());
        let single = ProductStructure::new(vec![zn(4)]).unwrap();
        assert!(!single.eval_direct(&f, 1 << 30).unwrap());
        assert!(p
            .eval_direct(&ring_f("forall x. x = x"), 1 << 30)
            .unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let p = ProductStructure::new(vec![zn(9), zn(9), zn(9), zn(9)]).unwrap();
        let f = ring_f("forall x. forall w. forall v. x * (w * v) = (x * w) * v");
        assert!(matches!(
            p.eval_direct(&f, 1000),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn stalks_at_atoms() {
        let p = z2xz3();
        assert_eq!(p.stalk_at_atom(0).unwrap().size(), 2);
        assert_eq!(p.stalk_at_atom(1).unwrap().size(), 3);
        let single = ProductStructure::new(vec![zn(5)]).unwrap();
        assert_eq!(single.stalk_at_atom(0).unwrap().size(), 5);
    }

    #[test]
    fn materialized_product_is_a_ring() {
        let p = z2xz3();
        let m = p.as_finite_structure(64).unwrap();
        assert!(m.is_ring());
        assert_eq!(m.size(), 6);
        // Direct and materialized evaluation agree.
        let f = ring_f("exists x. (x * x = x /\\ x != 0 /\\ x != 1)");
        assert_eq!(
            p.eval_direct(&f, 1 << 30).unwrap(),
            m.satisfies_sentence(&f).unwrap()
        );
    }
}
