//! Idempotents of a finite commutative ring: the Boolean algebra they form,
//! stalks, von Neumann regularity, and internal Boolean values.

use std::collections::BTreeMap;


use once_cell::sync::Lazy;

use super::{ring_signature, FiniteStructure};
use crate::error::{Error, Result};
use crate::formula::{parse_formula, Formula, Var};

/// The Boolean algebra of idempotents of a ring, with
/// `e /\ f = ef`, `e \/ f = e + f - ef`, `~e = 1 - e`, and the order
/// `e <= f  iff  e = ef`. Atoms are the minimal nonzero idempotents.
#[derive(Debug, Clone)]
pub struct IdempotentLattice {
    /// Ring elements that are idempotent, sorted ascending.
    pub idempotents: Vec<usize>,
    /// Minimal nonzero idempotents.
    pub atoms: Vec<usize>,
    zero: usize,
    one: usize,
    /// Tables over lattice indices.
    le: Vec<Vec<bool>>,
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
    compl: Vec<usize>,
}

impl IdempotentLattice {
    pub fn index_of(&self, e: usize) -> Option<usize> {
        self.idempotents.binary_search(&e).ok()
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn one(&self) -> usize {
        self.one
    }

    /// `B = {0, 1}`: the ring is connected.
    pub fn is_connected(&self) -> bool {
        self.idempotents.len() <= 2
    }

    pub fn le(&self, e: usize, f: usize) -> bool {
        self.le[self.index_of(e).unwrap()][self.index_of(f).unwrap()]
    }

    pub fn meet(&self, e: usize, f: usize) -> usize {
        self.idempotents[self.meet[self.index_of(e).unwrap()][self.index_of(f).unwrap()]]
    }

    pub fn join(&self, e: usize, f: usize) -> usize {
        self.idempotents[self.join[self.index_of(e).unwrap()][self.index_of(f).unwrap()]]
    }

    pub fn complement(&self, e: usize) -> usize {
        self.idempotents[self.compl[self.index_of(e).unwrap()]]
    }

    pub fn join_all<I: IntoIterator<Item = usize>>(&self, items: I) -> usize {
        let mut acc = self.zero;
        for e in items {
            acc = self.join(acc, e);
        }
        acc
    }

    /// Atoms below `e`.
    pub fn atoms_below(&self, e: usize) -> Vec<usize> {
        self.atoms.iter().copied().filter(|&a| self.le(a, e)).collect()
    }
}

/// Computes the idempotent lattice of a finite commutative ring.
pub fn idempotent_lattice(m: &FiniteStructure) -> Result<IdempotentLattice> {
    m.require_ring()?;
    let n = m.size();
    let one = m.one();
    let zero = m.zero();
    let idempotents: Vec<usize> = (0..n).filter(|&x| m.mul(x, x) == x).collect();
    let k = idempotents.len();
    let idx = |e: usize| idempotents.binary_search(&e).unwrap();
    let mut le = vec![vec![false; k]; k];
    let mut meet = vec![vec![0usize; k]; k];
    let mut join = vec![vec![0usize; k]; k];
    let mut compl = vec![0usize; k];
    for (i, &e) in idempotents.iter().enumerate() {
        compl[i] = idx(m.sub(one, e));
        for (j, &f) in idempotents.iter().enumerate() {
            let ef = m.mul(e, f);
            le[i][j] = e == ef;
            meet[i][j] = idx(ef);
            join[i][j] = idx(m.sub(m.add(e, f), ef));
        }
    }
    let atoms = idempotents
        .iter()
        .copied()
        .filter(|&a| {
            a != zero
                && idempotents
                    .iter()
                    .all(|&b| b == zero || b == a || !le[idx(b)][idx(a)])
        })
        .collect();
    Ok(IdempotentLattice {
        idempotents,
        atoms,
        zero,
        one,
        le,
        meet,
        join,
        compl,
    })
}

/// The ring `eM` (unit `e`) together with the embedding of its carrier into
/// the parent ring.
#[derive(Debug, Clone)]
pub struct Stalk {
    pub ring: FiniteStructure,
    /// New carrier index -> element of the parent ring.
    pub elements: Vec<usize>,
}

impl Stalk {
    pub fn index_of(&self, parent_element: usize) -> Option<usize> {
        self.elements.binary_search(&parent_element).ok()
    }

    /// Image of a parent-ring element under `a -> e*a`, as a stalk index.
    pub fn project(&self, m: &FiniteStructure, e: usize, a: usize) -> usize {
        self.index_of(m.mul(e, a)).expect("e*a lies in eM")
    }
}

/// The stalk of a ring at a nonzero idempotent `e`: the ideal `eM` with the
/// induced operations and `e` as the unit element.
pub fn stalk(m: &FiniteStructure, e: usize) -> Result<Stalk> {
    m.require_ring()?;
    if m.mul(e, e) != e {
        return Err(Error::Invalid(format!("{e} is not idempotent")));
    }
    if e == m.zero() {
        return Err(Error::Invalid("stalk at 0 is the zero ring".into()));
    }
    let n = m.size();
    let mut elements: Vec<usize> = (0..n).map(|x| m.mul(e, x)).collect();
    elements.sort_unstable();
    elements.dedup();
    let size = elements.len();
    let pos = |x: usize| elements.binary_search(&x).unwrap();
    let mut functions = BTreeMap::new();
    for op in ["+", "-", "*"] {
        let mut t = vec![0usize; size * size];
        for (i, &a) in elements.iter().enumerate() {
            for (j, &b) in elements.iter().enumerate() {
                t[i * size + j] = pos(m.apply(op, &[a, b]));
            }
        }
        functions.insert(op.to_string(), t);
    }
    let mut constants = BTreeMap::new();
    constants.insert("0".to_string(), pos(m.zero()));
    constants.insert("1".to_string(), pos(e));
    let mut carrier_sizes = BTreeMap::new();
    carrier_sizes.insert("ring".to_string(), size);
    let ring = FiniteStructure::from_tables(
        ring_signature(),
        carrier_sizes,
        functions,
        BTreeMap::new(),
        constants,
        format!("{}@e={}", m.label(), e),
    )?;
    Ok(Stalk { ring, elements })
}

/// Both characterizations of von Neumann regularity of an element:
/// `exists x. a*a*x = a`, and "the ideal (a) is generated by an idempotent".
pub fn vnr_routes(m: &FiniteStructure, a: usize) -> Result<(bool, bool)> {
    m.require_ring()?;
    let n = m.size();
    let by_witness = (0..n).any(|x| m.mul(m.mul(a, a), x) == a);
    let ideal = |x: usize| {
        let mut v: Vec<usize> = (0..n).map(|r| m.mul(x, r)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let ia = ideal(a);
    let by_ideal = (0..n).any(|e| m.mul(e, e) == e && ideal(e) == ia);
    Ok((by_witness, by_ideal))
}

/// True when `a` is von Neumann regular. The two characterizations are both
/// computed and must agree.
pub fn is_von_neumann_regular(m: &FiniteStructure, a: usize) -> Result<bool> {
    let (by_witness, by_ideal) = vnr_routes(m, a)?;
    if by_witness != by_ideal {
        return Err(Error::OracleMismatch(format!(
            "von Neumann regularity routes disagree for {a} in {}: witness={by_witness}, ideal={by_ideal}",
            m.label()
        )));
    }
    Ok(by_witness)
}

static FIN_FORMULA: Lazy<Formula> = Lazy::new(|| {
    parse_formula(
        "x = x * x /\\ forall w. exists e. exists u. exists z. \
         (e = e * e /\\ w * x = e * u /\\ e = (w * x) * z)",
        &crate::formula::Signature::ring(),
    )
    .unwrap()
});

/// The formula defining finite-support idempotents: `x = x^2` and every
/// multiple of `x` is von Neumann regular.
pub fn fin_formula() -> &'static Formula {
    &FIN_FORMULA
}

/// Evaluates the finite-support-defining formula on `x` by brute force.
pub fn fin_formula_holds(m: &FiniteStructure, x: usize) -> Result<bool> {
    m.require_ring()?;
    let mut asg = BTreeMap::new();
    asg.insert(Var::new("x", "ring"), x);
    m.satisfies(fin_formula(), &asg)
}

/// Internal Boolean value of `f(args)` in a ring: the supremum (join) of all
/// atoms `e` of the idempotent lattice such that the stalk at `e` satisfies
/// `f(e*a_1, ..., e*a_k)`. Returns the idempotent, with 0 for the empty
/// supremum.
pub fn internal_boolean_value(
    m: &FiniteStructure,
    lattice: &IdempotentLattice,
    f: &Formula,
    vars: &[Var],
    args: &[usize],
) -> Result<usize> {
    m.require_ring()?;
    let mut sup = lattice.zero();
    for &e in &lattice.atoms {
        let st = stalk(m, e)?;
        let mut asg = BTreeMap::new();
        for (v, &a) in vars.iter().zip(args) {
            asg.insert(v.clone(), st.project(m, e, a));
        }
        if st.ring.satisfies(f, &asg)? {
            sup = lattice.join(sup, e);
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{relativize_to_idempotent, render, Signature};

    fn zn(n: u64) -> FiniteStructure {
        FiniteStructure::ring_mod(n).unwrap()
    }

    #[test]
    fn lattice_of_z6() {
        let l = idempotent_lattice(&zn(6)).unwrap();
        assert_eq!(l.idempotents, vec![0, 1, 3, 4]);
        assert_eq!(l.atoms, vec![3, 4]);
        assert_eq!(l.meet(3, 4), 0);
        assert_eq!(l.join(3, 4), 1);
        assert_eq!(l.complement(3), 4);
    }

    #[test]
    fn lattice_of_z4_connected() {
        let l = idempotent_lattice(&zn(4)).unwrap();
        assert_eq!(l.idempotents, vec![0, 1]);
        assert_eq!(l.atoms, vec![1]);
        assert!(l.is_connected());
    }

    #[test]
    fn lattice_of_z30() {
        let l = idempotent_lattice(&zn(30)).unwrap();
        assert_eq!(l.idempotents.len(), 8);
        assert_eq!(l.atoms.len(), 3);
    }

    #[test]
    fn stalks_of_z6() {
        let m = zn(6);
        let s3 = stalk(&m, 3).unwrap();
        assert_eq!(s3.elements, vec![0, 3]);
        assert_eq!(s3.ring.one(), s3.index_of(3).unwrap());
        let s4 = stalk(&m, 4).unwrap();
        assert_eq!(s4.elements, vec![0, 2, 4]);
        // Stalk at 1 is the ring itself.
        let s1 = stalk(&m, 1).unwrap();
        assert_eq!(s1.elements, vec![0, 1, 2, 3, 4, 5]);
        assert!(s1.ring.is_ring());
    }

    #[test]
    fn stalk_at_non_idempotent_rejected() {
        assert!(stalk(&zn(6), 2).is_err());
        assert!(stalk(&zn(6), 0).is_err());
    }

    #[test]
    fn vnr_examples() {
        assert!(!is_von_neumann_regular(&zn(4), 2).unwrap());
        assert!(is_von_neumann_regular(&zn(6), 2).unwrap());
        // Units are always regular.
        for n in [4u64, 6, 9, 12] {
            let m = zn(n);
            let one = m.one();
            for a in 0..m.size() {
                let unit = (0..m.size()).any(|x| m.mul(a, x) == one);
                if unit {
                    assert!(is_von_neumann_regular(&m, a).unwrap());
                }
            }
        }
    }

    #[test]
    fn fin_formula_on_small_rings() {
        // Z/6 is von Neumann regular, so the formula holds exactly on the
        // idempotents.
        let m = zn(6);
        for x in 0..6 {
            let expect = m.mul(x, x) == x;
            assert_eq!(fin_formula_holds(&m, x).unwrap(), expect, "x={x}");
        }
        // In Z/4 the multiple 2 = 2*1 of 1 is not regular, so only 0 passes.
        let m = zn(4);
        let got: Vec<usize> = (0..4)
            .filter(|&x| fin_formula_holds(&m, x).unwrap())
            .collect();
        assert_eq!(got, vec![0]);
    }

    #[test]
    fn internal_boolean_value_matches_relativization() {
        // [[x^2 = x]](a) over Z/6 by stalks agrees with evaluating the
        // relativized formula at each atom.
        let m = zn(6);
        let l = idempotent_lattice(&m).unwrap();
        let f = parse_formula("x * x = x", &Signature::ring()).unwrap();
        let rel = relativize_to_idempotent(&f);
        let x = Var::new("x", "ring");
        for a in 0..6 {
            let via_stalks = internal_boolean_value(&m, &l, &f, &[x.clone()], &[a]).unwrap();
            let mut sup = l.zero();
            for &e in &l.atoms {
                let mut asg = BTreeMap::new();
                asg.insert(rel.idempotent.clone(), e);
                asg.insert(x.clone(), a);
                if m.satisfies(&rel.formula, &asg).unwrap() {
                    sup = l.join(sup, e);
                }
            }
            assert_eq!(via_stalks, sup, "a={a} rel={}", render(&rel.formula));
        }
    }
}
