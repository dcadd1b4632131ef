//! Quantifier elimination for the theory of infinite atomic Boolean
//! algebras enriched with `C[j]`, `Fin`, and `Res[n,r]`.
//!
//! A quantifier-free formula in variables `y1..yv` only constrains the
//! cardinalities of the `2^v` minterm cells, and the relevant information
//! about one cell is its *type*: an exact count below a cap, or "finite,
//! at least cap, with a known residue", or infinite. With the cap at least
//! the largest `C` index and the residue modulus the lcm of the `Res`
//! moduli, every atom's truth is determined by the cell types (the theory's
//! axioms force `#(x) <= n` to imply `Fin(x)` and fix residue bookkeeping,
//! so the classification is total in every model).
//!
//! `exists x` is eliminated by deciding, per outer type vector, whether
//! each outer cell can split into an (x, ~x) pair of inner types making the
//! body true ([`split_feasible`]). Outer types need resolution up to
//! `2*cap + 2*lcm`: beyond that, the set of feasible splits of a finite
//! cell depends only on its residue, so the outer type system determines
//! feasibility.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::integer::lcm;
use once_cell::sync::Lazy;
use std::sync::Mutex;

use super::cells::{split_feasible, CellSpec};
use super::element::BooleanElement;
use crate::error::{Error, Result};
use crate::formula::{Formula, PredSym, Term, Var};

/// Upper bound on distinct variables in one elimination step (inner cells
/// fit in a u32 mask).
const MAX_VARS: usize = 4;

/// Node budget for one emitted formula.
const EMIT_BUDGET: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct TypeSystem {
    cap: u64,
    modulus: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum CellType {
    /// Finite. `count < cap` means exactly `count`; `count == cap` means
    /// at least `cap` with the given residue mod the system modulus.
    Fin { count: u64, residue: u64 },
    Inf,
}

impl TypeSystem {
    fn types(&self) -> Vec<CellType> {
        let mut out = Vec::new();
        for c in 0..self.cap {
            out.push(CellType::Fin {
                count: c,
                residue: c % self.modulus,
            });
        }
        for r in 0..self.modulus {
            out.push(CellType::Fin {
                count: self.cap,
                residue: r,
            });
        }
        out.push(CellType::Inf);
        out
    }

    fn spec(&self, t: CellType) -> CellSpec {
        match t {
            CellType::Fin { count, residue } if count == self.cap => CellSpec::AtLeast {
                min: self.cap,
                modulus: self.modulus,
                residue,
            },
            CellType::Fin { count, .. } => CellSpec::Exact(count),
            CellType::Inf => CellSpec::Infinite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum CellAtom {
    /// Sum of the cells' cardinalities is at least `j`.
    CountAtLeast { cells: u32, j: u64 },
    /// Every cell in the mask is finite.
    AllFinite { cells: u32 },
    /// All finite and the total count is congruent to `r` mod `n`.
    Residue { cells: u32, n: u64, r: u64 },
}

#[derive(Debug, Clone)]
enum CellForm {
    True,
    False,
    Atom(usize),
    Not(Box<CellForm>),
    And(Box<CellForm>, Box<CellForm>),
    Or(Box<CellForm>, Box<CellForm>),
}

/// Evaluates a Boolean term as a mask over the `2^v` minterm cells.
fn term_mask(t: &Term, vars: &[Var]) -> Result<u32> {
    let ncells = 1u32 << vars.len();
    let full = if ncells == 32 { u32::MAX } else { (1u32 << ncells) - 1 };
    match t {
        Term::Var(v) => {
            let pos = vars
                .iter()
                .position(|w| w == v)
                .ok_or_else(|| Error::Invalid(format!("unbound variable {}", v.name)))?;
            let mut mask = 0u32;
            for cell in 0..ncells {
                if cell >> pos & 1 == 1 {
                    mask |= 1 << cell;
                }
            }
            Ok(mask)
        }
        Term::Const(c) => match c.as_str() {
            "0" => Ok(0),
            "1" => Ok(full),
            other => Err(Error::Sort(format!("unknown Boolean constant {other}"))),
        },
        Term::App(f, args) => match (f.as_str(), args.len()) {
            ("meet", 2) => Ok(term_mask(&args[0], vars)? & term_mask(&args[1], vars)?),
            ("join", 2) => Ok(term_mask(&args[0], vars)? | term_mask(&args[1], vars)?),
            ("compl", 1) => Ok(full & !term_mask(&args[0], vars)?),
            _ => Err(Error::Sort(format!("non-Boolean function {f}"))),
        },
    }
}

struct CellTranslation {
    form: CellForm,
    atoms: Vec<CellAtom>,
}

fn intern_atom(atoms: &mut Vec<CellAtom>, a: CellAtom) -> usize {
    if let Some(i) = atoms.iter().position(|b| *b == a) {
        i
    } else {
        atoms.push(a);
        atoms.len() - 1
    }
}

fn qf_to_cells(f: &Formula, vars: &[Var]) -> Result<CellTranslation> {
    let mut atoms = Vec::new();
    let form = go(f, vars, &mut atoms)?;
    return Ok(CellTranslation { form, atoms });

    fn go(f: &Formula, vars: &[Var], atoms: &mut Vec<CellAtom>) -> Result<CellForm> {
        match f {
            Formula::True => Ok(CellForm::True),
            Formula::False => Ok(CellForm::False),
            Formula::Not(g) => Ok(CellForm::Not(Box::new(go(g, vars, atoms)?))),
            Formula::And(a, b) => Ok(CellForm::And(
                Box::new(go(a, vars, atoms)?),
                Box::new(go(b, vars, atoms)?),
            )),
            Formula::Or(a, b) => Ok(CellForm::Or(
                Box::new(go(a, vars, atoms)?),
                Box::new(go(b, vars, atoms)?),
            )),
            Formula::Eq(a, b) => {
                let diff = term_mask(a, vars)? ^ term_mask(b, vars)?;
                if diff == 0 {
                    Ok(CellForm::True)
                } else {
                    // Equal sets: the symmetric difference is empty.
                    Ok(CellForm::Not(Box::new(CellForm::Atom(intern_atom(
                        atoms,
                        CellAtom::CountAtLeast { cells: diff, j: 1 },
                    )))))
                }
            }
            Formula::Pred(p, args) => pred(p, args, vars, atoms),
            Formula::Forall(..) | Formula::Exists(..) => Err(Error::Invalid(
                "cell translation requires a quantifier-free formula".into(),
            )),
        }
    }

    fn pred(
        p: &PredSym,
        args: &[Term],
        vars: &[Var],
        atoms: &mut Vec<CellAtom>,
    ) -> Result<CellForm> {
        match (p.name.as_str(), args.len()) {
            ("<=", 2) => {
                let extra = term_mask(&args[0], vars)? & !term_mask(&args[1], vars)?;
                if extra == 0 {
                    Ok(CellForm::True)
                } else {
                    Ok(CellForm::Not(Box::new(CellForm::Atom(intern_atom(
                        atoms,
                        CellAtom::CountAtLeast { cells: extra, j: 1 },
                    )))))
                }
            }
            ("Fin", 1) => {
                let cells = term_mask(&args[0], vars)?;
                Ok(CellForm::Atom(intern_atom(
                    atoms,
                    CellAtom::AllFinite { cells },
                )))
            }
            ("C", 1) => {
                let j = p.indices[0] as u64;
                let cells = term_mask(&args[0], vars)?;
                Ok(CellForm::Atom(intern_atom(
                    atoms,
                    CellAtom::CountAtLeast { cells, j },
                )))
            }
            ("Res", 1) => {
                let n = p.indices[0] as u64;
                let r = p.indices[1] as u64;
                let cells = term_mask(&args[0], vars)?;
                Ok(CellForm::Atom(intern_atom(
                    atoms,
                    CellAtom::Residue { cells, n, r },
                )))
            }
            (other, _) => Err(Error::Sort(format!(
                "predicate {other} is not part of the enriched Boolean signature"
            ))),
        }
    }
}

fn translation_params(atoms: &[CellAtom]) -> (u64, u64) {
    let mut cmax = 1u64;
    let mut q = 1u64;
    for a in atoms {
        match a {
            CellAtom::CountAtLeast { j, .. } => cmax = cmax.max(*j),
            CellAtom::Residue { n, .. } => q = lcm(q, *n),
            CellAtom::AllFinite { .. } => {}
        }
    }
    (cmax, q)
}

/// Per-atom aggregation state while assigning cell types one cell at a time.
/// CountAtLeast tracks the partial sum capped at `j`; AllFinite tracks
/// violation; Residue stores the partial residue, with `n` meaning violated.
type State = Vec<u32>;

fn initial_state(atoms: &[CellAtom]) -> State {
    atoms.iter().map(|_| 0).collect()
}

fn apply_cell_type(
    state: &mut State,
    atoms: &[CellAtom],
    inner_cell: u32,
    t: CellType,
    ts_in: &TypeSystem,
) {
    for (i, a) in atoms.iter().enumerate() {
        match a {
            CellAtom::CountAtLeast { cells, j } => {
                if cells >> inner_cell & 1 == 1 {
                    let add = match t {
                        CellType::Inf => *j,
                        CellType::Fin { count, .. } if count == ts_in.cap => *j,
                        CellType::Fin { count, .. } => count,
                    };
                    state[i] = (*j).min(state[i] as u64 + add) as u32;
                }
            }
            CellAtom::AllFinite { cells } => {
                if cells >> inner_cell & 1 == 1 && t == CellType::Inf {
                    state[i] = 1;
                }
            }
            CellAtom::Residue { cells, n, .. } => {
                if cells >> inner_cell & 1 == 1 {
                    if state[i] as u64 == *n {
                        continue;
                    }
                    match t {
                        CellType::Inf => state[i] = *n as u32,
                        CellType::Fin { residue, .. } => {
                            state[i] = ((state[i] as u64 + residue) % n) as u32
                        }
                    }
                }
            }
        }
    }
}

fn atom_truth(state: &State, atoms: &[CellAtom]) -> Vec<bool> {
    atoms
        .iter()
        .enumerate()
        .map(|(i, a)| match a {
            CellAtom::CountAtLeast { j, .. } => state[i] as u64 == *j,
            CellAtom::AllFinite { .. } => state[i] == 0,
            CellAtom::Residue { n, r, .. } => state[i] as u64 != *n && state[i] as u64 == r % n,
        })
        .collect()
}

fn eval_cell_form(f: &CellForm, truth: &[bool]) -> bool {
    match f {
        CellForm::True => true,
        CellForm::False => false,
        CellForm::Atom(i) => truth[*i],
        CellForm::Not(g) => !eval_cell_form(g, truth),
        CellForm::And(a, b) => eval_cell_form(a, truth) && eval_cell_form(b, truth),
        CellForm::Or(a, b) => eval_cell_form(a, truth) || eval_cell_form(b, truth),
    }
}

/// Split tables keyed by the inner type system; the outer system is derived
/// from it, so this caches all the feasibility arithmetic across calls.
static SPLIT_CACHE: Lazy<Mutex<HashMap<TypeSystem, SplitTable>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

#[derive(Clone)]
struct SplitTable {
    in_types: Vec<CellType>,
    out_types: Vec<CellType>,
    /// For each outer type, the feasible (x-part, rest) inner type pairs.
    splits: Vec<Vec<(usize, usize)>>,
    ts_in: TypeSystem,
    ts_out: TypeSystem,
}

fn split_table(ts_in: TypeSystem) -> SplitTable {
    if let Some(t) = SPLIT_CACHE.lock().unwrap().get(&ts_in) {
        return t.clone();
    }
    let ts_out = TypeSystem {
        cap: 2 * ts_in.cap + 2 * ts_in.modulus,
        modulus: ts_in.modulus,
    };
    let in_types = ts_in.types();
    let out_types = ts_out.types();
    let mut splits = Vec::with_capacity(out_types.len());
    for &ot in &out_types {
        let mut pairs = Vec::new();
        for (ai, &a) in in_types.iter().enumerate() {
            for (bi, &b) in in_types.iter().enumerate() {
                if split_feasible(ts_out.spec(ot), ts_in.spec(a), ts_in.spec(b)) {
                    pairs.push((ai, bi));
                }
            }
        }
        splits.push(pairs);
    }
    let table = SplitTable {
        in_types,
        out_types,
        splits,
        ts_in,
        ts_out,
    };
    SPLIT_CACHE
        .lock()
        .unwrap()
        .insert(ts_in, table.clone());
    table
}

/// The minterm cell of the outer variables selected by `cell` bits, as a
/// Boolean term.
fn cell_term(cell: u32, vars: &[Var]) -> Term {
    let mut acc: Option<Term> = None;
    for (pos, v) in vars.iter().enumerate() {
        let lit = if cell >> pos & 1 == 1 {
            Term::Var(v.clone())
        } else {
            Term::app("compl", vec![Term::Var(v.clone())])
        };
        acc = Some(match acc {
            None => lit,
            Some(t) => Term::app("meet", vec![t, lit]),
        });
    }
    acc.unwrap_or_else(|| Term::constant("1"))
}

/// Quantifier-free description of an outer cell type.
fn describe_type(term: &Term, t: CellType, ts: &TypeSystem) -> Formula {
    let c_at_least = |j: u64| {
        Formula::Pred(
            PredSym::indexed("C", vec![j as i64]),
            vec![term.clone()],
        )
    };
    let fin = Formula::Pred(PredSym::plain("Fin"), vec![term.clone()]);
    match t {
        CellType::Inf => Formula::not(fin),
        CellType::Fin { count, residue } if count == ts.cap => {
            let mut parts = vec![fin, c_at_least(ts.cap)];
            if ts.modulus > 1 {
                parts.push(Formula::Pred(
                    PredSym::indexed("Res", vec![ts.modulus as i64, residue as i64]),
                    vec![term.clone()],
                ));
            }
            Formula::and_all(parts)
        }
        CellType::Fin { count, .. } => {
            if count == 0 {
                Formula::not(c_at_least(1))
            } else {
                Formula::and(c_at_least(count), Formula::not(c_at_least(count + 1)))
            }
        }
    }
}

/// Eliminates one existential quantifier from a quantifier-free body.
fn eliminate_exists(x: &Var, psi: &Formula) -> Result<Formula> {
    let mut free: Vec<Var> = psi.free_vars().into_iter().collect();
    if !free.contains(x) {
        return Ok(psi.clone());
    }
    free.retain(|v| v != x);
    let v = free.len();
    if v + 1 > MAX_VARS + 1 {
        return Err(Error::Budget {
            needed: 1u128 << (v + 1),
            budget: 1u128 << (MAX_VARS + 1),
        });
    }
    let mut inner_vars = free.clone();
    inner_vars.push(x.clone());
    let tr = qf_to_cells(psi, &inner_vars)?;
    let (cmax, q) = translation_params(&tr.atoms);
    let ts_in = TypeSystem {
        cap: cmax,
        modulus: q,
    };
    let table = split_table(ts_in);
    let ncells = 1u32 << v;
    let out_count = table.out_types.len();
    let inf_idx = out_count - 1;
    debug_assert_eq!(table.out_types[inf_idx], CellType::Inf);

    // Forward pass: layered DAG over outer cells. State = per-atom
    // aggregates plus one flag recording whether some outer cell is
    // infinite (cells partition an infinite algebra, so type vectors with
    // all cells finite are unrealizable and pruned).
    let mut layer_states: Vec<Vec<State>> = vec![vec![initial_state(&tr.atoms)]];
    let mut layer_edges: Vec<Vec<BTreeMap<usize, BTreeSet<usize>>>> = Vec::new();
    for cell in 0..ncells {
        let cur = &layer_states[cell as usize];
        let mut next_index: HashMap<State, usize> = HashMap::new();
        let mut next_states: Vec<State> = Vec::new();
        let mut edges: Vec<BTreeMap<usize, BTreeSet<usize>>> =
            vec![BTreeMap::new(); cur.len()];
        let allowed: Vec<usize> = if v == 0 {
            vec![inf_idx]
        } else {
            (0..out_count).collect()
        };
        for (node, state) in cur.iter().enumerate() {
            for &ot in &allowed {
                let mut targets = BTreeSet::new();
                for &(ai, bi) in &table.splits[ot] {
                    let mut s2 = state.clone();
                    // x-part lands in the inner cell with the x bit set.
                    apply_cell_type(
                        &mut s2,
                        &tr.atoms,
                        cell | (1 << v),
                        table.in_types[ai],
                        &table.ts_in,
                    );
                    apply_cell_type(&mut s2, &tr.atoms, cell, table.in_types[bi], &table.ts_in);
                    let id = match next_index.get(&s2) {
                        Some(&id) => id,
                        None => {
                            let id = next_states.len();
                            next_index.insert(s2.clone(), id);
                            next_states.push(s2);
                            id
                        }
                    };
                    targets.insert(id);
                }
                if !targets.is_empty() {
                    edges[node].insert(ot, targets);
                }
            }
        }
        layer_edges.push(edges);
        layer_states.push(next_states);
    }

    // Acceptance needs the body true; with v >= 1 the path must also pass
    // through at least one infinite outer type, but that is enforced during
    // the backward pass by splitting on "infinite seen".
    let final_states = &layer_states[ncells as usize];
    let accept: Vec<bool> = final_states
        .iter()
        .map(|s| eval_cell_form(&tr.form, &atom_truth(s, &tr.atoms)))
        .collect();

    // Backward pass: for each node and each value of "an infinite cell is
    // still required", the formula over the remaining cells.
    let mut budget = EMIT_BUDGET;
    let need_inf_initial = v >= 1;
    // formulas[layer][node][need_inf as usize]
    let mut next_formulas: Vec<[Formula; 2]> = accept
        .iter()
        .map(|&ok| {
            [
                if ok { Formula::True } else { Formula::False },
                // An infinite cell was required but never chosen.
                Formula::False,
            ]
        })
        .collect();
    for cell in (0..ncells).rev() {
        let edges = &layer_edges[cell as usize];
        let mut cur_formulas: Vec<[Formula; 2]> = Vec::with_capacity(edges.len());
        for node_edges in edges {
            let mut variants: [Formula; 2] = [Formula::False, Formula::False];
            for need_inf in [false, true] {
                // Group outer types by the formula continuation they lead to.
                let mut groups: BTreeMap<(Vec<usize>, bool), Vec<usize>> = BTreeMap::new();
                for (&ot, targets) in node_edges {
                    let next_need = need_inf && ot != inf_idx;
                    groups
                        .entry((targets.iter().copied().collect(), next_need))
                        .or_default()
                        .push(ot);
                }
                let mut disjuncts = Vec::new();
                for ((targets, next_need), ots) in groups {
                    let rest = Formula::or_all(
                        targets
                            .iter()
                            .map(|&t| next_formulas[t][next_need as usize].clone()),
                    );
                    if rest == Formula::False {
                        continue;
                    }
                    let descr = if ots.len() == out_count {
                        Formula::True
                    } else {
                        let term = cell_term(cell, &free);
                        Formula::or_all(
                            ots.iter()
                                .map(|&ot| describe_type(&term, table.out_types[ot], &table.ts_out)),
                        )
                    };
                    disjuncts.push(Formula::and(descr, rest));
                }
                let formula = Formula::or_all(disjuncts);
                let size = formula.size();
                if size > budget {
                    return Err(Error::Budget {
                        needed: size as u128,
                        budget: EMIT_BUDGET as u128,
                    });
                }
                budget -= size.min(budget);
                variants[need_inf as usize] = formula;
            }
            cur_formulas.push(variants);
        }
        next_formulas = cur_formulas;
    }
    Ok(next_formulas[0][need_inf_initial as usize].clone())
}

/// Eliminates all quantifiers, producing an equivalent quantifier-free
/// formula in the same free variables (over every model of the theory).
pub fn eliminate_quantifiers(f: &Formula) -> Result<Formula> {
    match f {
        Formula::True | Formula::False | Formula::Eq(..) | Formula::Pred(..) => Ok(f.clone()),
        Formula::Not(g) => Ok(simplify_not(eliminate_quantifiers(g)?)),
        Formula::And(a, b) => {
            Ok(Formula::and_all([eliminate_quantifiers(a)?, eliminate_quantifiers(b)?]))
        }
        Formula::Or(a, b) => {
            Ok(Formula::or_all([eliminate_quantifiers(a)?, eliminate_quantifiers(b)?]))
        }
        Formula::Exists(x, body) => {
            let inner = eliminate_quantifiers(body)?;
            eliminate_exists(x, &inner)
        }
        Formula::Forall(x, body) => {
            let inner = eliminate_quantifiers(body)?;
            let neg = eliminate_exists(x, &simplify_not(inner))?;
            Ok(simplify_not(neg))
        }
    }
}

fn simplify_not(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(g) => *g,
        other => Formula::not(other),
    }
}

/// Decides a sentence of the enriched Boolean theory (which is complete, so
/// sentences have a well-defined truth value).
pub fn decide_sentence(f: &Formula) -> Result<bool> {
    if !f.is_sentence() {
        return Err(Error::Invalid(
            "decide_sentence requires a closed formula".into(),
        ));
    }
    let g = eliminate_quantifiers(f)?;
    eval_closed_qf(&g)
}

/// Truth of a variable-free quantifier-free formula: terms over the
/// constants denote 0 or 1, and 1 is infinite in every model.
pub fn eval_closed_qf(f: &Formula) -> Result<bool> {
    fn term_value(t: &Term) -> Result<bool> {
        match t {
            Term::Var(v) => Err(Error::Invalid(format!(
                "formula is not closed: variable {}",
                v.name
            ))),
            Term::Const(c) => match c.as_str() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::Sort(format!("unknown constant {other}"))),
            },
            Term::App(f, args) => match (f.as_str(), args.len()) {
                ("meet", 2) => Ok(term_value(&args[0])? && term_value(&args[1])?),
                ("join", 2) => Ok(term_value(&args[0])? || term_value(&args[1])?),
                ("compl", 1) => Ok(!term_value(&args[0])?),
                _ => Err(Error::Sort(format!("non-Boolean function {f}"))),
            },
        }
    }
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Not(g) => Ok(!eval_closed_qf(g)?),
        Formula::And(a, b) => Ok(eval_closed_qf(a)? && eval_closed_qf(b)?),
        Formula::Or(a, b) => Ok(eval_closed_qf(a)? || eval_closed_qf(b)?),
        Formula::Eq(a, b) => Ok(term_value(a)? == term_value(b)?),
        Formula::Pred(p, args) => {
            let vals: Vec<bool> = args
                .iter()
                .map(term_value)
                .collect::<Result<Vec<bool>>>()?;
            match (p.name.as_str(), vals.as_slice()) {
                ("<=", [a, b]) => Ok(!a || *b),
                ("Fin", [a]) => Ok(!a),
                ("C", [a]) => Ok(*a),
                ("Res", [a]) => {
                    let (n, r) = (p.indices[0] as u64, p.indices[1] as u64);
                    Ok(if *a { false } else { r % n == 0 })
                }
                _ => Err(Error::Sort(format!("unknown predicate {}", p.name))),
            }
        }
        Formula::Forall(..) | Formula::Exists(..) => Err(Error::Invalid(
            "eval_closed_qf requires a quantifier-free formula".into(),
        )),
    }
}

/// Evaluates one enriched atom in the computable model.
pub fn eval_enriched_atom(pred: &PredSym, args: &[BooleanElement]) -> Result<bool> {
    match (pred.name.as_str(), args) {
        ("<=", [a, b]) => Ok(a.subset_of(b)),
        ("Fin", [a]) => Ok(a.is_finite()),
        ("C", [a]) => Ok(a.count_at_least(pred.indices[0] as u64)),
        ("Res", [a]) => Ok(a.residue_is(pred.indices[0] as u64, pred.indices[1] as u64)),
        _ => Err(Error::Sort(format!(
            "unknown enriched atom {}/{}",
            pred.name,
            args.len()
        ))),
    }
}

/// Evaluates a Boolean term in the computable model.
pub fn eval_term(t: &Term, asg: &BTreeMap<Var, BooleanElement>) -> Result<BooleanElement> {
    match t {
        Term::Var(v) => asg
            .get(v)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("unassigned variable {}", v.name))),
        Term::Const(c) => match c.as_str() {
            "0" => Ok(BooleanElement::empty()),
            "1" => Ok(BooleanElement::universe()),
            other => Err(Error::Sort(format!("unknown constant {other}"))),
        },
        Term::App(f, args) => match (f.as_str(), args.len()) {
            ("meet", 2) => Ok(eval_term(&args[0], asg)?.meet(&eval_term(&args[1], asg)?)),
            ("join", 2) => Ok(eval_term(&args[0], asg)?.join(&eval_term(&args[1], asg)?)),
            ("compl", 1) => Ok(eval_term(&args[0], asg)?.complement()),
            _ => Err(Error::Sort(format!("non-Boolean function {f}"))),
        },
    }
}

/// Direct semantics of a quantifier-free formula in the computable model.
pub fn eval_quantifier_free(f: &Formula, asg: &BTreeMap<Var, BooleanElement>) -> Result<bool> {
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Not(g) => Ok(!eval_quantifier_free(g, asg)?),
        Formula::And(a, b) => Ok(eval_quantifier_free(a, asg)? && eval_quantifier_free(b, asg)?),
        Formula::Or(a, b) => Ok(eval_quantifier_free(a, asg)? || eval_quantifier_free(b, asg)?),
        Formula::Eq(a, b) => Ok(eval_term(a, asg)? == eval_term(b, asg)?),
        Formula::Pred(p, args) => {
            let vals: Vec<BooleanElement> = args
                .iter()
                .map(|t| eval_term(t, asg))
                .collect::<Result<_>>()?;
            eval_enriched_atom(p, &vals)
        }
        Formula::Forall(..) | Formula::Exists(..) => Err(Error::Invalid(
            "eval_quantifier_free got a quantified formula".into(),
        )),
    }
}

/// Decides equivalence of two quantifier-free formulas by enumerating cell
/// type vectors over their combined free variables. Because truth of a
/// quantifier-free formula is determined by the cell types, and every type
/// vector with an infinite cell is realized in the computable model, this
/// decides equivalence over all models of the theory.
pub fn qf_equivalent(f: &Formula, g: &Formula) -> Result<bool> {
    if !f.is_quantifier_free() || !g.is_quantifier_free() {
        return Err(Error::Invalid("qf_equivalent requires quantifier-free inputs".into()));
    }
    let mut vars: BTreeSet<Var> = f.free_vars();
    vars.extend(g.free_vars());
    let vars: Vec<Var> = vars.into_iter().collect();
    let v = vars.len();
    if v == 0 {
        return Ok(eval_closed_qf(f)? == eval_closed_qf(g)?);
    }
    if v > MAX_VARS {
        return Err(Error::Budget {
            needed: 1u128 << v,
            budget: 1u128 << MAX_VARS,
        });
    }
    let tf = qf_to_cells(f, &vars)?;
    let tg = qf_to_cells(g, &vars)?;
    let (c1, q1) = translation_params(&tf.atoms);
    let (c2, q2) = translation_params(&tg.atoms);
    let ts = TypeSystem {
        cap: c1.max(c2),
        modulus: lcm(q1, q2),
    };
    let types = ts.types();
    let ncells = 1usize << v;
    let total = (types.len() as u128).pow(ncells as u32);
    if total > 20_000_000 {
        return Err(Error::Budget {
            needed: total,
            budget: 20_000_000,
        });
    }
    let mut assignment = vec![0usize; ncells];
    loop {
        if assignment.iter().any(|&t| types[t] == CellType::Inf) {
            let mut sf = initial_state(&tf.atoms);
            let mut sg = initial_state(&tg.atoms);
            for (cell, &ti) in assignment.iter().enumerate() {
                apply_cell_type(&mut sf, &tf.atoms, cell as u32, types[ti], &ts);
                apply_cell_type(&mut sg, &tg.atoms, cell as u32, types[ti], &ts);
            }
            let vf = eval_cell_form(&tf.form, &atom_truth(&sf, &tf.atoms));
            let vg = eval_cell_form(&tg.form, &atom_truth(&sg, &tg.atoms));
            if vf != vg {
                return Ok(false);
            }
        }
        let mut i = ncells;
        loop {
            if i == 0 {
                return Ok(true);
            }
            i -= 1;
            assignment[i] += 1;
            if assignment[i] < types.len() {
                break;
            }
            assignment[i] = 0;
        }
    }
}
