//! Finite structures and brute-force model checking.
//!
//! The central constructor is [`FiniteStructure::ring_mod`], the ring `Z/n`.
//! Satisfaction is Tarskian truth by exhaustive quantifier enumeration with
//! short-circuiting; this module is the oracle every other engine is checked
//! against, so clarity beats speed throughout.

mod axioms;
mod idem;
mod specfile;

pub use axioms::{check_restricted_product_axioms, AxiomCheck, AxiomReport};
pub use idem::{
    fin_formula, fin_formula_holds, idempotent_lattice, internal_boolean_value,
    is_von_neumann_regular, stalk, vnr_routes, IdempotentLattice, Stalk,
};
pub use specfile::parse_structure_spec;

use std::collections::BTreeMap;
use std::sync::Arc;

use num::rational::Ratio;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::formula::{Formula, Signature, Term, Var};

static RING_SIG: Lazy<Arc<Signature>> = Lazy::new(|| Arc::new(Signature::ring()));

pub fn ring_signature() -> Arc<Signature> {
    RING_SIG.clone()
}

/// A finite interpretation of a signature: carriers are `0..size` per sort,
/// operations and predicates are total tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    sig: Arc<Signature>,
    carrier_sizes: BTreeMap<String, usize>,
    functions: BTreeMap<String, Vec<usize>>,
    predicates: BTreeMap<(String, Vec<i64>), Vec<bool>>,
    constants: BTreeMap<String, usize>,
    label: String,
    /// True when this structure is a commutative unital ring over the ring
    /// signature (verified at construction for explicit tables).
    ring: bool,
}

impl FiniteStructure {
    /// The ring `Z/n` with the standard tables.
    pub fn ring_mod(n: u64) -> Result<FiniteStructure> {
        if n < 2 {
            return Err(Error::Invalid(format!("ring_mod requires n >= 2, got {n}")));
        }
        let n = usize::try_from(n).map_err(|_| Error::Invalid("modulus too large".into()))?;
        let mut functions = BTreeMap::new();
        let table = |op: fn(usize, usize, usize) -> usize| {
            let mut t = vec![0usize; n * n];
            for i in 0..n {
                for j in 0..n {
                    t[i * n + j] = op(i, j, n);
                }
            }
            t
        };
        functions.insert("+".to_string(), table(|i, j, n| (i + j) % n));
        functions.insert("-".to_string(), table(|i, j, n| (i + n - j) % n));
        functions.insert("*".to_string(), table(|i, j, n| (i * j) % n));
        let mut constants = BTreeMap::new();
        constants.insert("0".to_string(), 0);
        constants.insert("1".to_string(), 1 % n);
        let mut carrier_sizes = BTreeMap::new();
        carrier_sizes.insert("ring".to_string(), n);
        Ok(FiniteStructure {
            sig: ring_signature(),
            carrier_sizes,
            functions,
            predicates: BTreeMap::new(),
            constants,
            label: format!("Z/{n}"),
            ring: true,
        })
    }

    /// Builds a structure from explicit tables. If the signature is the ring
    /// signature, the commutative unital ring axioms are verified once here.
    pub fn from_tables(
        sig: Arc<Signature>,
        carrier_sizes: BTreeMap<String, usize>,
        functions: BTreeMap<String, Vec<usize>>,
        predicates: BTreeMap<(String, Vec<i64>), Vec<bool>>,
        constants: BTreeMap<String, usize>,
        label: String,
    ) -> Result<FiniteStructure> {
        for (sort, size) in &carrier_sizes {
            if *size == 0 {
                return Err(Error::Invalid(format!("empty carrier for sort {sort}")));
            }
        }
        for sort in sig.sorts() {
            if !carrier_sizes.contains_key(sort) {
                return Err(Error::Invalid(format!("missing carrier for sort {sort}")));
            }
        }
        let mut s = FiniteStructure {
            sig,
            carrier_sizes,
            functions,
            predicates,
            constants,
            label,
            ring: false,
        };
        s.validate_tables()?;
        if s.sig.name == "ring" {
            s.ring = s.check_ring_axioms();
        }
        Ok(s)
    }

    fn validate_tables(&self) -> Result<()> {
        for (name, decl) in self.sig.functions() {
            let table = self
                .functions
                .get(name)
                .ok_or_else(|| Error::Invalid(format!("missing table for function {name}")))?;
            let want: usize = decl
                .arg_sorts
                .iter()
                .map(|s| self.carrier_sizes[s])
                .product();
            if table.len() != want {
                return Err(Error::Invalid(format!(
                    "table for {name} has {} entries, expected {want}",
                    table.len()
                )));
            }
            let out_size = self.carrier_sizes[&decl.result_sort];
            if table.iter().any(|&v| v >= out_size) {
                return Err(Error::Invalid(format!(
                    "table for {name} has out-of-carrier entries"
                )));
            }
        }
        for (name, sort) in self.sig.constants() {
            let v = self
                .constants
                .get(name)
                .ok_or_else(|| Error::Invalid(format!("missing constant {name}")))?;
            if *v >= self.carrier_sizes[sort] {
                return Err(Error::Invalid(format!("constant {name} out of carrier")));
            }
        }
        Ok(())
    }

    fn check_ring_axioms(&self) -> bool {
        let n = self.size();
        let zero = self.constants["0"];
        let one = self.constants["1"];
        for a in 0..n {
            if self.add(a, zero) != a
                || self.mul(a, one) != a
                || self.sub(a, a) != zero
                || self.sub(zero, self.sub(zero, a)) != a
            {
                return false;
            }
            for b in 0..n {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return false;
                }
                if self.sub(a, b) != self.add(a, self.sub(zero, b)) {
                    return false;
                }
                for c in 0..n {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c))
                        || self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c))
                        || self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c))
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_ring(&self) -> bool {
        self.ring
    }

    pub(crate) fn require_ring(&self) -> Result<()> {
        if self.ring {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "{} is not a commutative unital ring",
                self.label
            )))
        }
    }

    pub fn carrier_size(&self, sort: &str) -> usize {
        self.carrier_sizes.get(sort).copied().unwrap_or(0)
    }

    /// Carrier size of the unique sort (for one-sorted structures).
    pub fn size(&self) -> usize {
        debug_assert_eq!(self.carrier_sizes.len(), 1);
        *self.carrier_sizes.values().next().unwrap()
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied()
    }

    pub fn apply(&self, func: &str, args: &[usize]) -> usize {
        let decl = self.sig.function(func).expect("unknown function");
        let table = &self.functions[func];
        let mut idx = 0usize;
        for (a, sort) in args.iter().zip(&decl.arg_sorts) {
            idx = idx * self.carrier_sizes[sort] + a;
        }
        table[idx]
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.apply("+", &[a, b])
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.apply("-", &[a, b])
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.apply("*", &[a, b])
    }

    pub fn zero(&self) -> usize {
        self.constants["0"]
    }

    pub fn one(&self) -> usize {
        self.constants["1"]
    }

    fn pred_holds(&self, name: &str, indices: &[i64], args: &[usize]) -> Result<bool> {
        let key = (name.to_string(), indices.to_vec());
        let table = self.predicates.get(&key).ok_or_else(|| {
            Error::Sort(format!(
                "structure {} does not interpret predicate {name}{indices:?}",
                self.label
            ))
        })?;
        let decl = self.sig.predicate(name).unwrap();
        let mut idx = 0usize;
        for (a, sort) in args.iter().zip(&decl.arg_sorts) {
            idx = idx * self.carrier_sizes[sort] + a;
        }
        Ok(table[idx])
    }

    pub fn eval_term(&self, t: &Term, env: &[(Var, usize)]) -> Result<usize> {
        match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(w, _)| w == v)
                .map(|(_, val)| *val)
                .ok_or_else(|| Error::Invalid(format!("unassigned variable {}", v.name))),
            Term::Const(c) => self
                .constants
                .get(c)
                .copied()
                .ok_or_else(|| Error::Sort(format!("unknown constant {c}"))),
            Term::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_term(a, env)?);
                }
                if self.sig.function(f).is_none() {
                    return Err(Error::Sort(format!("unknown function {f}")));
                }
                Ok(self.apply(f, &vals))
            }
        }
    }

    fn eval(&self, f: &Formula, env: &mut Vec<(Var, usize)>) -> Result<bool> {
        match f {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Eq(a, b) => Ok(self.eval_term(a, env)? == self.eval_term(b, env)?),
            Formula::Pred(p, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_term(a, env)?);
                }
                self.pred_holds(&p.name, &p.indices, &vals)
            }
            Formula::Not(g) => Ok(!self.eval(g, env)?),
            Formula::And(a, b) => Ok(self.eval(a, env)? && self.eval(b, env)?),
            Formula::Or(a, b) => Ok(self.eval(a, env)? || self.eval(b, env)?),
            Formula::Forall(v, body) => {
                let size = self.carrier_sizes.get(&v.sort).copied().ok_or_else(|| {
                    Error::Sort(format!("no carrier for sort {}", v.sort))
                })?;
                for val in 0..size {
                    env.push((v.clone(), val));
                    let ok = self.eval(body, env);
                    env.pop();
                    if !ok? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Exists(v, body) => {
                let size = self.carrier_sizes.get(&v.sort).copied().ok_or_else(|| {
                    Error::Sort(format!("no carrier for sort {}", v.sort))
                })?;
                for val in 0..size {
                    env.push((v.clone(), val));
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

    /// Tarskian truth under a pre-built environment (innermost binding
    /// last). The environment must cover the free variables.
    pub fn satisfies_with_env(&self, f: &Formula, env: &mut Vec<(Var, usize)>) -> Result<bool> {
        self.eval(f, env)
    }

    /// Tarskian truth under an assignment covering the free variables.
    pub fn satisfies(&self, f: &Formula, asg: &BTreeMap<Var, usize>) -> Result<bool> {
        for v in f.free_vars() {
            match asg.get(&v) {
                Some(val) if *val < self.carrier_size(&v.sort) => {}
                Some(_) => {
                    return Err(Error::Invalid(format!(
                        "assignment for {} out of carrier",
                        v.name
                    )))
                }
                None => {
                    return Err(Error::Invalid(format!(
                        "assignment misses free variable {}",
                        v.name
                    )))
                }
            }
        }
        let mut env: Vec<(Var, usize)> = asg.iter().map(|(v, x)| (v.clone(), *x)).collect();
        self.eval(f, &mut env)
    }

    /// Truth of a sentence.
    pub fn satisfies_sentence(&self, f: &Formula) -> Result<bool> {
        self.satisfies(f, &BTreeMap::new())
    }

    /// The exact solution set of `f` over the given variable order, by
    /// exhaustive enumeration. `vars` must cover the free variables.
    pub fn definable_set(&self, f: &Formula, vars: &[Var]) -> Result<Vec<Vec<usize>>> {
        let free = f.free_vars();
        for v in &free {
            if !vars.contains(v) {
                return Err(Error::Invalid(format!(
                    "variable order misses free variable {}",
                    v.name
                )));
            }
        }
        let sizes: Vec<usize> = vars.iter().map(|v| self.carrier_size(&v.sort)).collect();
        let mut out = Vec::new();
        let mut tuple = vec![0usize; vars.len()];
        loop {
            let mut env: Vec<(Var, usize)> = vars
                .iter()
                .cloned()
                .zip(tuple.iter().copied())
                .collect();
            if self.eval(f, &mut env)? {
                out.push(tuple.clone());
            }
            // Odometer increment.
            let mut i = vars.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                tuple[i] += 1;
                if tuple[i] < sizes[i] {
                    break;
                }
                tuple[i] = 0;
            }
        }
    }

    /// Solution set over the free variables in sorted order.
    pub fn definable_set_sorted_vars(&self, f: &Formula) -> Result<(Vec<Var>, Vec<Vec<usize>>)> {
        let vars: Vec<Var> = f.free_vars().into_iter().collect();
        let set = self.definable_set(f, &vars)?;
        Ok((vars, set))
    }

    /// Normalized counting measure: `|solutions| / |carrier|^k` as an exact
    /// rational.
    pub fn counting_measure(&self, f: &Formula) -> Result<Ratio<u64>> {
        let (vars, set) = self.definable_set_sorted_vars(&f.clone())?;
        let mut denom: u64 = 1;
        for v in &vars {
            denom = denom
                .checked_mul(self.carrier_size(&v.sort) as u64)
                .ok_or_else(|| Error::Invalid("carrier power overflows".into()))?;
        }
        if denom == 0 {
            return Err(Error::Invalid("empty carrier".into()));
        }
        Ok(Ratio::new(set.len() as u64, denom))
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

    #[test]
    fn ring_mod_rejects_small() {
        assert!(FiniteStructure::ring_mod(0).is_err());
        assert!(FiniteStructure::ring_mod(1).is_err());
    }

    #[test]
    fn ring_mod_tables() {
        let r2 = zn(2);
        assert_eq!(r2.size(), 2);
        assert_eq!(r2.mul(1, 1), 1);
        let r6 = zn(6);
        assert_eq!(r6.add(1, 5), 0);
        assert_eq!(r6.mul(4, 4), 4);
        let r9 = zn(9);
        assert_eq!(r9.mul(3, 3), 0);
    }

    #[test]
    fn nontrivial_idempotent_sentence() {
        let f = ring_f("exists x. (x * x = x /\\ x != 0 /\\ x != 1)");
        assert!(!zn(4).satisfies_sentence(&f).unwrap());
        assert!(zn(6).satisfies_sentence(&f).unwrap());
    }

    #[test]
    fn tautology_everywhere() {
        let f = ring_f("forall x. x = x");
        for n in 2..12 {
            assert!(zn(n).satisfies_sentence(&f).unwrap());
        }
    }

    #[test]
    fn definable_sets() {
        let idem = ring_f("x * x = x");
        let (_, set) = zn(6).definable_set_sorted_vars(&idem).unwrap();
        assert_eq!(set, vec![vec![0], vec![1], vec![3], vec![4]]);

        let units = ring_f("exists w. x * w = 1");
        let (_, set) = zn(9).definable_set_sorted_vars(&units).unwrap();
        let got: Vec<usize> = set.into_iter().map(|t| t[0]).collect();
        assert_eq!(got, vec![1, 2, 4, 5, 7, 8]);

        let empty = ring_f("x != x");
        let (_, set) = zn(5).definable_set_sorted_vars(&empty).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn counting_measures() {
        use num::rational::Ratio;
        // Multiples of 3 in Z/9, encoded without numerals beyond 1.
        let f = ring_f("exists w. x = w + w + w");
        assert_eq!(
            zn(9).counting_measure(&f).unwrap(),
            Ratio::new(3u64, 9u64)
        );
        let f = ring_f("x = x");
        assert_eq!(zn(7).counting_measure(&f).unwrap(), Ratio::new(1u64, 1u64));
        let f = ring_f("x * x = x");
        assert_eq!(zn(6).counting_measure(&f).unwrap(), Ratio::new(2u64, 3u64));
    }

    #[test]
    fn measure_of_rectangle_is_product() {
        let f = ring_f("x * x = x /\\ exists w. v * w = 1");
        let a = zn(6).counting_measure(&ring_f("x * x = x")).unwrap();
        let b = zn(6).counting_measure(&ring_f("exists w. v * w = 1")).unwrap();
        assert_eq!(zn(6).counting_measure(&f).unwrap(), a * b);
    }

    #[test]
    fn assignment_errors() {
        let f = ring_f("x = 0");
        assert!(zn(4).satisfies(&f, &BTreeMap::new()).is_err());
    }
}
