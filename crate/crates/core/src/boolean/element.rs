//! The computable model of the enriched Boolean-algebra theory: eventually
//! periodic subsets of the naturals.
//!
//! An element denotes `({k : k mod modulus in residues} ∪ added) \ removed`.
//! The stored form is canonical: the modulus is the minimal eventual period,
//! `added` is disjoint from the residue classes, and `removed` is contained
//! in them. Two elements denote the same set exactly when their stored forms
//! are equal, so `Eq`/`Ord`/`Hash` all agree with set equality.

use std::collections::BTreeSet;
use std::fmt;

use num::integer::lcm;

/// One eventually periodic subset of ℕ, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BooleanElement {
    modulus: u64,
    residues: BTreeSet<u64>,
    added: BTreeSet<u64>,
    removed: BTreeSet<u64>,
}

impl BooleanElement {
    /// The empty set.
    pub fn empty() -> Self {
        BooleanElement {
            modulus: 1,
            residues: BTreeSet::new(),
            added: BTreeSet::new(),
            removed: BTreeSet::new(),
        }
    }

    /// All of ℕ.
    pub fn universe() -> Self {
        BooleanElement {
            modulus: 1,
            residues: [0].into_iter().collect(),
            added: BTreeSet::new(),
            removed: BTreeSet::new(),
        }
    }

    /// A finite set.
    pub fn from_finite<I: IntoIterator<Item = u64>>(members: I) -> Self {
        BooleanElement {
            modulus: 1,
            residues: BTreeSet::new(),
            added: members.into_iter().collect(),
            removed: BTreeSet::new(),
        }
    }

    /// The union of residue classes `{k : k mod n in residues}`.
    pub fn from_residues<I: IntoIterator<Item = u64>>(n: u64, residues: I) -> Self {
        assert!(n >= 1, "modulus must be positive");
        let residues: BTreeSet<u64> = residues.into_iter().map(|r| r % n).collect();
        canonicalize(n, residues, BTreeSet::new(), BTreeSet::new())
    }

    /// General constructor; the denotation is
    /// `({k : k mod n in residues} ∪ added) \ removed`.
    pub fn new<I, J, K>(n: u64, residues: I, added: J, removed: K) -> Self
    where
        I: IntoIterator<Item = u64>,
        J: IntoIterator<Item = u64>,
        K: IntoIterator<Item = u64>,
    {
        assert!(n >= 1, "modulus must be positive");
        let residues: BTreeSet<u64> = residues.into_iter().map(|r| r % n).collect();
        let added: BTreeSet<u64> = added.into_iter().collect();
        let removed: BTreeSet<u64> = removed.into_iter().collect();
        // Normalize the exception sets against the raw denotation first.
        let member = |k: u64| {
            (residues.contains(&(k % n)) || added.contains(&k)) && !removed.contains(&k)
        };
        let horizon = added
            .iter()
            .chain(removed.iter())
            .copied()
            .max()
            .map(|m| m + 1)
            .unwrap_or(0);
        let mut add2 = BTreeSet::new();
        let mut rem2 = BTreeSet::new();
        for k in 0..horizon {
            let in_class = residues.contains(&(k % n));
            match (member(k), in_class) {
                (true, false) => {
                    add2.insert(k);
                }
                (false, true) => {
                    rem2.insert(k);
                }
                _ => {}
            }
        }
        canonicalize(n, residues, add2, rem2)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &BTreeSet<u64> {
        &self.residues
    }

    pub fn added(&self) -> &BTreeSet<u64> {
        &self.added
    }

    pub fn removed(&self) -> &BTreeSet<u64> {
        &self.removed
    }

    pub fn contains(&self, k: u64) -> bool {
        if self.added.contains(&k) {
            return true;
        }
        if self.removed.contains(&k) {
            return false;
        }
        self.residues.contains(&(k % self.modulus))
    }

    /// First index after which membership is purely periodic.
    pub fn threshold(&self) -> u64 {
        self.added
            .iter()
            .chain(self.removed.iter())
            .copied()
            .max()
            .map(|m| m + 1)
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty() && self.added.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.residues.is_empty()
    }

    /// Cardinality when finite.
    pub fn cardinality(&self) -> Option<u64> {
        if self.is_finite() {
            Some(self.added.len() as u64)
        } else {
            None
        }
    }

    /// `C_j`: at least `j` members (every singleton is an atom).
    pub fn count_at_least(&self, j: u64) -> bool {
        if !self.is_finite() {
            return true;
        }
        self.added.len() as u64 >= j
    }

    /// `Res(n, r)`: finite with cardinality congruent to `r` mod `n`.
    pub fn residue_is(&self, n: u64, r: u64) -> bool {
        match self.cardinality() {
            Some(c) => c % n == r % n,
            None => false,
        }
    }

    pub fn complement(&self) -> BooleanElement {
        let comp: BTreeSet<u64> = (0..self.modulus)
            .filter(|r| !self.residues.contains(r))
            .collect();
        canonicalize(
            self.modulus,
            comp,
            self.removed.clone(),
            self.added.clone(),
        )
    }

    fn binop(&self, other: &BooleanElement, op: impl Fn(bool, bool) -> bool) -> BooleanElement {
        let m = lcm(self.modulus, other.modulus);
        let residues: BTreeSet<u64> = (0..m)
            .filter(|r| {
                op(
                    self.residues.contains(&(r % self.modulus)),
                    other.residues.contains(&(r % other.modulus)),
                )
            })
            .collect();
        let horizon = self.threshold().max(other.threshold());
        let mut added = BTreeSet::new();
        let mut removed = BTreeSet::new();
        for k in 0..horizon {
            let actual = op(self.contains(k), other.contains(k));
            let in_class = residues.contains(&(k % m));
            match (actual, in_class) {
                (true, false) => {
                    added.insert(k);
                }
                (false, true) => {
                    removed.insert(k);
                }
                _ => {}
            }
        }
        canonicalize(m, residues, added, removed)
    }

    pub fn meet(&self, other: &BooleanElement) -> BooleanElement {
        self.binop(other, |a, b| a && b)
    }

    pub fn join(&self, other: &BooleanElement) -> BooleanElement {
        self.binop(other, |a, b| a || b)
    }

    pub fn minus(&self, other: &BooleanElement) -> BooleanElement {
        self.binop(other, |a, b| a && !b)
    }

    pub fn sym_diff(&self, other: &BooleanElement) -> BooleanElement {
        self.binop(other, |a, b| a != b)
    }

    pub fn subset_of(&self, other: &BooleanElement) -> bool {
        self.minus(other).is_empty()
    }

    /// Number of members strictly below `k`.
    pub fn count_below(&self, k: u64) -> u64 {
        let mut count = 0u64;
        for &r in &self.residues {
            if r < k {
                count += (k - r).div_ceil(self.modulus);
            }
        }
        count += self.added.iter().filter(|&&a| a < k).count() as u64;
        count - self.removed.iter().filter(|&&r| r < k).count() as u64
    }

    /// Members in ascending order.
    pub fn iter_members(&self) -> impl Iterator<Item = u64> + '_ {
        let mut k = 0u64;
        std::iter::from_fn(move || {
            if self.is_finite() {
                // Finite: walk the explicit set.
                let next = self.added.range(k..).next().copied();
                if let Some(v) = next {
                    k = v + 1;
                }
                next
            } else {
                loop {
                    if self.contains(k) {
                        k += 1;
                        return Some(k - 1);
                    }
                    k += 1;
                }
            }
        })
    }

    /// The set of the first `j` members.
    pub fn take_prefix(&self, j: u64) -> BooleanElement {
        BooleanElement::from_finite(self.iter_members().take(j as usize))
    }

    /// Everything but the first `j` members.
    pub fn drop_prefix(&self, j: u64) -> BooleanElement {
        self.minus(&self.take_prefix(j))
    }

    /// Members whose position (0-based rank) is congruent to `offset` mod 2.
    /// Splits any infinite element into two infinite halves.
    pub fn stride(&self, offset: u64) -> BooleanElement {
        let offset = offset % 2;
        if self.is_finite() {
            return BooleanElement::from_finite(
                self.iter_members()
                    .enumerate()
                    .filter(|(i, _)| *i as u64 % 2 == offset)
                    .map(|(_, v)| v),
            );
        }
        // Beyond the threshold the set is periodic with d = |residues|
        // members per block of length `modulus`; ranks advance by d per
        // block, so rank parity (and hence membership in the stride) is
        // periodic with period 2*modulus beyond the threshold.
        let period = 2 * self.modulus;
        let start = self.threshold();
        let f = |k: u64| self.contains(k) && self.count_below(k) % 2 == offset;
        from_membership_with_period(period, start, f)
    }
}

/// Builds an element from a membership predicate that is known to be
/// `period`-periodic at and beyond `start`.
fn from_membership_with_period(
    period: u64,
    start: u64,
    f: impl Fn(u64) -> bool,
) -> BooleanElement {
    let residues: BTreeSet<u64> = (start..start + period)
        .filter(|&k| f(k))
        .map(|k| k % period)
        .collect();
    let mut added = BTreeSet::new();
    let mut removed = BTreeSet::new();
    for k in 0..start {
        let actual = f(k);
        let in_class = residues.contains(&(k % period));
        match (actual, in_class) {
            (true, false) => {
                added.insert(k);
            }
            (false, true) => {
                removed.insert(k);
            }
            _ => {}
        }
    }
    canonicalize(period, residues, added, removed)
}

/// Reduces to the minimal eventual period and recomputes minimal exception
/// sets. Inputs must already satisfy: `added` disjoint from the classes,
/// `removed` contained in them.
fn canonicalize(
    n: u64,
    residues: BTreeSet<u64>,
    added: BTreeSet<u64>,
    removed: BTreeSet<u64>,
) -> BooleanElement {
    // The minimal period of a union of residue classes mod n divides n.
    let mut best = n;
    for d in 1..=n / 2 {
        if n % d != 0 {
            continue;
        }
        let collapses = (0..n).all(|r| residues.contains(&r) == residues.contains(&((r + d) % n)));
        if collapses {
            best = d;
            break;
        }
    }
    if best == n && added.is_empty() && removed.is_empty() {
        return BooleanElement {
            modulus: n,
            residues,
            added,
            removed,
        };
    }
    let small: BTreeSet<u64> = residues.iter().map(|r| r % best).collect();
    let member = |k: u64| {
        (residues.contains(&(k % n)) || added.contains(&k)) && !removed.contains(&k)
    };
    let horizon = added
        .iter()
        .chain(removed.iter())
        .copied()
        .max()
        .map(|m| m + 1)
        .unwrap_or(0);
    let mut add2 = BTreeSet::new();
    let mut rem2 = BTreeSet::new();
    for k in 0..horizon {
        let in_class = small.contains(&(k % best));
        match (member(k), in_class) {
            (true, false) => {
                add2.insert(k);
            }
            (false, true) => {
                rem2.insert(k);
            }
            _ => {}
        }
    }
    BooleanElement {
        modulus: best,
        residues: small,
        added: add2,
        removed: rem2,
    }
}

impl fmt::Display for BooleanElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{{")?;
            for (i, k) in self.added.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{k}")?;
            }
            return write!(f, "}}");
        }
        let classes: Vec<String> = self
            .residues
            .iter()
            .map(|r| format!("{r} mod {}", self.modulus))
            .collect();
        write!(f, "[{}]", classes.join(", "))?;
        if !self.added.is_empty() {
            let e: Vec<String> = self.added.iter().map(|k| k.to_string()).collect();
            write!(f, " + {{{}}}", e.join(","))?;
        }
        if !self.removed.is_empty() {
            let e: Vec<String> = self.removed.iter().map(|k| k.to_string()).collect();
            write!(f, " - {{{}}}", e.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evens() -> BooleanElement {
        BooleanElement::from_residues(2, [0])
    }

    #[test]
    fn canonical_minimal_modulus() {
        // Classes {0, 2} mod 4 are just the evens.
        let a = BooleanElement::from_residues(4, [0, 2]);
        assert_eq!(a, evens());
        assert_eq!(a.modulus(), 2);
    }

    #[test]
    fn exceptions_fold_into_classes() {
        // evens minus {4} plus {4} back is evens.
        let a = evens().minus(&BooleanElement::from_finite([4]));
        let b = a.join(&BooleanElement::from_finite([4]));
        assert_eq!(b, evens());
    }

    #[test]
    fn meet_of_classes() {
        let threes = BooleanElement::from_residues(3, [0]);
        let m = evens().meet(&threes);
        assert_eq!(m, BooleanElement::from_residues(6, [0]));
    }

    #[test]
    fn complement_involution_and_excluded_middle() {
        let a = BooleanElement::new(3, [1], [0, 6], [4]);
        assert_eq!(a.complement().complement(), a);
        assert_eq!(a.join(&a.complement()), BooleanElement::universe());
        assert!(a.meet(&a.complement()).is_empty());
    }

    #[test]
    fn finiteness_and_counts() {
        let f = BooleanElement::from_finite([2, 5, 9]);
        assert!(f.is_finite());
        assert_eq!(f.cardinality(), Some(3));
        assert!(f.count_at_least(3));
        assert!(!f.count_at_least(4));
        assert!(f.residue_is(2, 1));
        assert!(!evens().is_finite());
        assert!(evens().count_at_least(1000));
        assert!(!evens().residue_is(2, 0));
    }

    #[test]
    fn prefix_and_drop() {
        let p = evens().take_prefix(3);
        assert_eq!(p, BooleanElement::from_finite([0, 2, 4]));
        let d = evens().drop_prefix(3);
        assert!(!d.contains(4));
        assert!(d.contains(6));
        assert!(!d.is_finite());
    }

    #[test]
    fn stride_splits_infinite_into_two_infinite() {
        let a = BooleanElement::new(3, [0], [1], []);
        let s0 = a.stride(0);
        let s1 = a.stride(1);
        assert!(!s0.is_finite());
        assert!(!s1.is_finite());
        assert!(s0.meet(&s1).is_empty());
        assert_eq!(s0.join(&s1), a);
        // Membership agrees with rank parity on a window.
        let members: Vec<u64> = a.iter_members().take(20).collect();
        for (i, &m) in members.iter().enumerate() {
            assert_eq!(s0.contains(m), i % 2 == 0, "member #{i} = {m}");
        }
    }

    #[test]
    fn count_below_matches_enumeration() {
        let a = BooleanElement::new(4, [1, 3], [0], [5]);
        let mut seen = 0;
        for k in 0..100 {
            assert_eq!(a.count_below(k), seen, "k={k}");
            if a.contains(k) {
                seen += 1;
            }
        }
    }
}
