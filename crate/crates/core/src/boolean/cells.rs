//! Cardinality descriptions of minterm cells and the split-feasibility
//! relation driving quantifier elimination.

use num::integer::lcm;

/// What is known about the cardinality of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellSpec {
    /// Exactly `k` members.
    Exact(u64),
    /// Finite, at least `min` members, congruent to `residue` mod `modulus`
    /// (`modulus = 1` places no residue constraint).
    AtLeast { min: u64, modulus: u64, residue: u64 },
    /// Not finite.
    Infinite,
}

impl CellSpec {
    fn is_finite(&self) -> bool {
        !matches!(self, CellSpec::Infinite)
    }

    fn admits(&self, m: u64) -> bool {
        match *self {
            CellSpec::Exact(k) => m == k,
            CellSpec::AtLeast {
                min,
                modulus,
                residue,
            } => m >= min && m % modulus == residue % modulus,
            CellSpec::Infinite => false,
        }
    }

    fn max_threshold(&self) -> u64 {
        match *self {
            CellSpec::Exact(k) => k,
            CellSpec::AtLeast { min, .. } => min,
            CellSpec::Infinite => 0,
        }
    }

    fn modulus(&self) -> u64 {
        match *self {
            CellSpec::AtLeast { modulus, .. } => modulus,
            _ => 1,
        }
    }
}

/// Decides whether a cell matching `parent` can be written as a disjoint
/// union of cells matching `left` and `right`, in some (equivalently, in
/// every) model of the enriched theory.
///
/// An infinite cell splits as infinite + anything (the splitting axiom
/// covers infinite + infinite; atomicity carves finite parts of any exact
/// size, and the residue composition axioms fix the residue bookkeeping).
/// Finite cells split by exact arithmetic on counts and residues.
pub fn split_feasible(parent: CellSpec, left: CellSpec, right: CellSpec) -> bool {
    match (parent.is_finite(), left.is_finite(), right.is_finite()) {
        // A finite total admits no infinite part, and two finite parts never
        // sum to an infinite total.
        (true, ll, rr) => {
            if !ll || !rr {
                return false;
            }
            finite_sum_feasible(parent, left, right)
        }
        (false, false, _) | (false, _, false) => true,
        (false, true, true) => false,
    }
}

/// Is there `a` admitted by `left` and `b` admitted by `right` with `a + b`
/// admitted by `parent`? All three are finite specs, i.e. semilinear subsets
/// of ℕ with thresholds and one period each; if any solution exists, one
/// exists with both parts below the sum of all thresholds plus three times
/// the common period (shrinking a large part by the period steps keeps all
/// three constraints).
fn finite_sum_feasible(parent: CellSpec, left: CellSpec, right: CellSpec) -> bool {
    let q = lcm(lcm(parent.modulus(), left.modulus()), right.modulus());
    let bound = parent.max_threshold() + left.max_threshold() + right.max_threshold() + 3 * q;
    for a in 0..=bound {
        if !left.admits(a) {
            continue;
        }
        for b in 0..=bound {
            if right.admits(b) && parent.admits(a + b) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: CellSpec = CellSpec::Infinite;

    fn exact(k: u64) -> CellSpec {
        CellSpec::Exact(k)
    }

    fn at_least(min: u64, modulus: u64, residue: u64) -> CellSpec {
        CellSpec::AtLeast {
            min,
            modulus,
            residue,
        }
    }

    #[test]
    fn infinite_splits() {
        assert!(split_feasible(INF, INF, INF));
        assert!(split_feasible(INF, exact(5), INF));
        assert!(split_feasible(INF, INF, at_least(2, 3, 1)));
        assert!(!split_feasible(INF, exact(0), exact(7)));
    }

    #[test]
    fn exact_arithmetic() {
        assert!(split_feasible(exact(3), exact(1), exact(2)));
        assert!(!split_feasible(exact(3), exact(2), exact(2)));
        assert!(!split_feasible(exact(3), INF, exact(0)));
    }

    #[test]
    fn residue_composition() {
        // parent finite ≡ 0 mod 2 from two odd finite parts.
        let even = at_least(0, 2, 0);
        let odd = at_least(0, 2, 1);
        assert!(split_feasible(even, odd, odd));
        assert!(!split_feasible(even, odd, at_least(0, 2, 0)));
        // Mixed moduli resolve through the lcm.
        assert!(split_feasible(at_least(0, 6, 5), at_least(0, 2, 1), at_least(0, 3, 2)));
    }

    #[test]
    fn minimums_respected() {
        assert!(!split_feasible(exact(3), at_least(2, 1, 0), at_least(2, 1, 0)));
        assert!(split_feasible(exact(4), at_least(2, 1, 0), at_least(2, 1, 0)));
    }
}
