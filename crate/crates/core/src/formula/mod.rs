//! Many-sorted first-order terms and formulas over a declared signature,
//! with parsing, rendering and the syntactic transformations shared by the
//! other modules.
//!
//! The core connectives are negation, conjunction and disjunction;
//! implication and bi-implication are surface syntax eliminated by the
//! parser. Indexed predicate families such as `C[j]` and `Res[n,r]` carry
//! their integer indices inside the symbol.

mod parser;
mod render;
mod transform;

pub use parser::parse_formula;
pub use render::{render, render_annotated};
pub use transform::{relativize_to_idempotent, to_nnf, to_prenex, Relativized};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// A sorted variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: String,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Var {
            name: name.into(),
            sort: sort.into(),
        }
    }
}

/// A predicate symbol together with the integer indices baked into it.
/// Plain predicates have an empty index list; `C[3]` is `name = "C"`,
/// `indices = [3]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredSym {
    pub name: String,
    pub indices: Vec<i64>,
}

impl PredSym {
    pub fn plain(name: impl Into<String>) -> Self {
        PredSym {
            name: name.into(),
            indices: Vec::new(),
        }
    }

    pub fn indexed(name: impl Into<String>, indices: Vec<i64>) -> Self {
        PredSym {
            name: name.into(),
            indices,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Term::Var(Var::new(name, sort))
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(name.into(), args)
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => {
                for a in args {
                    a.free_vars_into(out);
                }
            }
        }
    }

    /// All variable names occurring in the term, bound or not.
    fn var_names_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.name.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => {
                for a in args {
                    a.var_names_into(out);
                }
            }
        }
    }

    /// Replaces every occurrence of variables per `map`. The map must not
    /// introduce captures; callers rename bound variables apart first.
    pub fn substitute(&self, map: &BTreeMap<Var, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.substitute(map)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Pred(PredSym, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    /// Conjunction of a sequence, folding the trivial cases. Produces `True`
    /// for an empty sequence.
    pub fn and_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut acc: Option<Formula> = None;
        for f in items {
            match f {
                Formula::True => continue,
                Formula::False => return Formula::False,
                f => {
                    acc = Some(match acc {
                        None => f,
                        Some(a) => Formula::and(a, f),
                    })
                }
            }
        }
        acc.unwrap_or(Formula::True)
    }

    /// Disjunction of a sequence, folding the trivial cases. Produces
    /// `False` for an empty sequence.
    pub fn or_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut acc: Option<Formula> = None;
        for f in items {
            match f {
                Formula::False => continue,
                Formula::True => return Formula::True,
                f => {
                    acc = Some(match acc {
                        None => f,
                        Some(a) => Formula::or(a, f),
                    })
                }
            }
        }
        acc.unwrap_or(Formula::False)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    fn free_vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            Formula::Pred(_, args) => {
                for a in args {
                    a.free_vars_into(out);
                }
            }
            Formula::Not(f) => f.free_vars_into(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let mut inner = BTreeSet::new();
                body.free_vars_into(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
        }
    }

    /// Every variable name mentioned anywhere, bound or free.
    pub fn all_var_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.all_var_names_into(&mut out);
        out
    }

    fn all_var_names_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                a.var_names_into(out);
                b.var_names_into(out);
            }
            Formula::Pred(_, args) => {
                for a in args {
                    a.var_names_into(out);
                }
            }
            Formula::Not(f) => f.all_var_names_into(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.all_var_names_into(out);
                b.all_var_names_into(out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                out.insert(v.name.clone());
                body.all_var_names_into(out);
            }
        }
    }

    /// Maximum quantifier nesting depth.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Pred(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + b.quantifier_depth(),
        }
    }

    /// Total number of quantifier nodes.
    pub fn quantifier_count(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Pred(..) => 0,
            Formula::Not(f) => f.quantifier_count(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.quantifier_count() + b.quantifier_count()
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + b.quantifier_count(),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_count() == 0
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Number of nodes; used for budget estimates and growth reports.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Pred(..) => 1,
            Formula::Not(f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.size() + b.size(),
            Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + b.size(),
        }
    }

    /// Capture-avoiding substitution of free variables. Bound variables that
    /// would capture a substituted term are renamed on the fly.
    pub fn substitute(&self, map: &BTreeMap<Var, Term>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(a, b) => Formula::Eq(a.substitute(map), b.substitute(map)),
            Formula::Pred(p, args) => Formula::Pred(
                p.clone(),
                args.iter().map(|a| a.substitute(map)).collect(),
            ),
            Formula::Not(f) => Formula::not(f.substitute(map)),
            Formula::And(a, b) => Formula::and(a.substitute(map), b.substitute(map)),
            Formula::Or(a, b) => Formula::or(a.substitute(map), b.substitute(map)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let mut inner = map.clone();
                inner.remove(v);
                // Rename the binder if some replacement term mentions it.
                let mut replaced_names = BTreeSet::new();
                for t in inner.values() {
                    t.var_names_into(&mut replaced_names);
                }
                let (v2, body2) = if replaced_names.contains(&v.name) {
                    let used: BTreeSet<String> = body
                        .all_var_names()
                        .into_iter()
                        .chain(replaced_names.iter().cloned())
                        .collect();
                    let fresh = fresh_name(&v.name, &used);
                    let v2 = Var::new(fresh, v.sort.clone());
                    let mut ren = BTreeMap::new();
                    ren.insert(v.clone(), Term::Var(v2.clone()));
                    (v2, body.substitute(&ren))
                } else {
                    (v.clone(), body.as_ref().clone())
                };
                let inner_body = body2.substitute(&inner);
                match self {
                    Formula::Forall(..) => Formula::forall(v2, inner_body),
                    _ => Formula::exists(v2, inner_body),
                }
            }
        }
    }
}

/// Picks a name based on `base` that is not in `used`, by appending primes.
pub(crate) fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    let mut name = base.to_string();
    loop {
        name.push('\'');
        if !used.contains(&name) {
            return name;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDecl {
    pub arg_sorts: Vec<String>,
    pub result_sort: String,
}

/// Constraint on the integer indices of an indexed predicate family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexRule {
    /// No indices allowed.
    None,
    /// One index `j >= 1`, as in `C[j]`.
    PositiveCount,
    /// Two indices `n >= 1`, `0 <= r < n`, as in `Res[n,r]`.
    Residue,
}

impl IndexRule {
    pub fn arity(&self) -> usize {
        match self {
            IndexRule::None => 0,
            IndexRule::PositiveCount => 1,
            IndexRule::Residue => 2,
        }
    }

    pub fn check(&self, indices: &[i64]) -> bool {
        match self {
            IndexRule::None => indices.is_empty(),
            IndexRule::PositiveCount => indices.len() == 1 && indices[0] >= 1,
            IndexRule::Residue => {
                indices.len() == 2 && indices[0] >= 1 && indices[1] >= 0 && indices[1] < indices[0]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredDecl {
    pub index_rule: IndexRule,
    pub arg_sorts: Vec<String>,
}

/// Surface tokens that the parser maps onto term-level function symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceOps {
    pub and: Option<String>,
    pub or: Option<String>,
    pub not: Option<String>,
    pub add: Option<String>,
    pub sub: Option<String>,
    pub mul: Option<String>,
}

/// A many-sorted signature: sorts, function symbols, predicate symbols and
/// constants. Symbol names are unique per kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    sorts: Vec<String>,
    functions: BTreeMap<String, FuncDecl>,
    predicates: BTreeMap<String, PredDecl>,
    constants: BTreeMap<String, String>,
    surface: SurfaceOps,
}

impl Signature {
    pub fn new(name: impl Into<String>, sorts: Vec<String>) -> Self {
        Signature {
            name: name.into(),
            sorts,
            functions: BTreeMap::new(),
            predicates: BTreeMap::new(),
            constants: BTreeMap::new(),
            surface: SurfaceOps::default(),
        }
    }

    pub fn add_function(
        &mut self,
        name: impl Into<String>,
        arg_sorts: Vec<String>,
        result_sort: String,
    ) -> Result<()> {
        let name = name.into();
        for s in arg_sorts.iter().chain(std::iter::once(&result_sort)) {
            if !self.sorts.contains(s) {
                return Err(Error::Sort(format!(
                    "function {name} references undeclared sort {s}"
                )));
            }
        }
        if self.functions.contains_key(&name) {
            return Err(Error::Invalid(format!("duplicate function symbol {name}")));
        }
        self.functions.insert(
            name,
            FuncDecl {
                arg_sorts,
                result_sort,
            },
        );
        Ok(())
    }

    pub fn add_predicate(
        &mut self,
        name: impl Into<String>,
        index_rule: IndexRule,
        arg_sorts: Vec<String>,
    ) -> Result<()> {
        let name = name.into();
        for s in &arg_sorts {
            if !self.sorts.contains(s) {
                return Err(Error::Sort(format!(
                    "predicate {name} references undeclared sort {s}"
                )));
            }
        }
        if self.predicates.contains_key(&name) {
            return Err(Error::Invalid(format!("duplicate predicate symbol {name}")));
        }
        self.predicates.insert(
            name,
            PredDecl {
                index_rule,
                arg_sorts,
            },
        );
        Ok(())
    }

    pub fn add_constant(&mut self, name: impl Into<String>, sort: String) -> Result<()> {
        let name = name.into();
        if !self.sorts.contains(&sort) {
            return Err(Error::Sort(format!(
                "constant {name} references undeclared sort {sort}"
            )));
        }
        if self.constants.contains_key(&name) {
            return Err(Error::Invalid(format!("duplicate constant symbol {name}")));
        }
        self.constants.insert(name, sort);
        Ok(())
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    pub fn single_sort(&self) -> Option<&str> {
        if self.sorts.len() == 1 {
            Some(&self.sorts[0])
        } else {
            None
        }
    }

    pub fn function(&self, name: &str) -> Option<&FuncDecl> {
        self.functions.get(name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredDecl> {
        self.predicates.get(name)
    }

    pub fn constant_sort(&self, name: &str) -> Option<&str> {
        self.constants.get(name).map(|s| s.as_str())
    }

    pub fn functions(&self) -> impl Iterator<Item = (&String, &FuncDecl)> {
        self.functions.iter()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&String, &PredDecl)> {
        self.predicates.iter()
    }

    pub fn constants(&self) -> impl Iterator<Item = (&String, &String)> {
        self.constants.iter()
    }

    pub fn surface(&self) -> &SurfaceOps {
        &self.surface
    }

    pub fn surface_mut(&mut self) -> &mut SurfaceOps {
        &mut self.surface
    }

    /// The one-sorted ring signature `{+, -, *, 0, 1}`.
    pub fn ring() -> Signature {
        let sort = "ring".to_string();
        let mut sig = Signature::new("ring", vec![sort.clone()]);
        for op in ["+", "-", "*"] {
            sig.add_function(op, vec![sort.clone(), sort.clone()], sort.clone())
                .unwrap();
        }
        sig.add_constant("0", sort.clone()).unwrap();
        sig.add_constant("1", sort.clone()).unwrap();
        sig.surface = SurfaceOps {
            add: Some("+".into()),
            sub: Some("-".into()),
            mul: Some("*".into()),
            ..SurfaceOps::default()
        };
        sig
    }

    /// The enriched Boolean-algebra signature: lattice operations `meet`,
    /// `join`, `compl` (surface `/\`, `\/`, `~`), constants `0`, `1`, the
    /// order `<=`, and the unary predicate families `Fin`, `C[j]`,
    /// `Res[n,r]`.
    pub fn boolean_enriched() -> Signature {
        let sort = "bool".to_string();
        let mut sig = Signature::new("boolean_enriched", vec![sort.clone()]);
        sig.add_function("meet", vec![sort.clone(), sort.clone()], sort.clone())
            .unwrap();
        sig.add_function("join", vec![sort.clone(), sort.clone()], sort.clone())
            .unwrap();
        sig.add_function("compl", vec![sort.clone()], sort.clone())
            .unwrap();
        sig.add_constant("0", sort.clone()).unwrap();
        sig.add_constant("1", sort.clone()).unwrap();
        sig.add_predicate("<=", IndexRule::None, vec![sort.clone(), sort.clone()])
            .unwrap();
        sig.add_predicate("Fin", IndexRule::None, vec![sort.clone()])
            .unwrap();
        sig.add_predicate("C", IndexRule::PositiveCount, vec![sort.clone()])
            .unwrap();
        sig.add_predicate("Res", IndexRule::Residue, vec![sort.clone()])
            .unwrap();
        sig.surface = SurfaceOps {
            and: Some("meet".into()),
            or: Some("join".into()),
            not: Some("compl".into()),
            ..SurfaceOps::default()
        };
        sig
    }

    /// Infers the sort of a term, checking well-sortedness along the way.
    pub fn term_sort(&self, t: &Term) -> Result<String> {
        match t {
            Term::Var(v) => {
                if self.sorts.contains(&v.sort) {
                    Ok(v.sort.clone())
                } else {
                    Err(Error::Sort(format!(
                        "variable {} has undeclared sort {}",
                        v.name, v.sort
                    )))
                }
            }
            Term::Const(c) => self
                .constant_sort(c)
                .map(|s| s.to_string())
                .ok_or_else(|| Error::Sort(format!("unknown constant {c}"))),
            Term::App(f, args) => {
                let decl = self
                    .function(f)
                    .ok_or_else(|| Error::Sort(format!("unknown function {f}")))?;
                if decl.arg_sorts.len() != args.len() {
                    return Err(Error::Sort(format!(
                        "function {f} expects {} arguments, got {}",
                        decl.arg_sorts.len(),
                        args.len()
                    )));
                }
                for (a, want) in args.iter().zip(&decl.arg_sorts) {
                    let got = self.term_sort(a)?;
                    if &got != want {
                        return Err(Error::Sort(format!(
                            "argument of {f} has sort {got}, expected {want}"
                        )));
                    }
                }
                Ok(decl.result_sort.clone())
            }
        }
    }

    /// Checks that a formula is well-sorted over this signature.
    pub fn check_formula(&self, f: &Formula) -> Result<()> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Eq(a, b) => {
                let sa = self.term_sort(a)?;
                let sb = self.term_sort(b)?;
                if sa != sb {
                    return Err(Error::Sort(format!(
                        "equation between sorts {sa} and {sb}"
                    )));
                }
                Ok(())
            }
            Formula::Pred(p, args) => {
                let decl = self
                    .predicate(&p.name)
                    .ok_or_else(|| Error::Sort(format!("unknown predicate {}", p.name)))?;
                if !decl.index_rule.check(&p.indices) {
                    return Err(Error::Invalid(format!(
                        "bad indices {:?} for predicate {}",
                        p.indices, p.name
                    )));
                }
                if decl.arg_sorts.len() != args.len() {
                    return Err(Error::Sort(format!(
                        "predicate {} expects {} arguments, got {}",
                        p.name,
                        decl.arg_sorts.len(),
                        args.len()
                    )));
                }
                for (a, want) in args.iter().zip(&decl.arg_sorts) {
                    let got = self.term_sort(a)?;
                    if &got != want {
                        return Err(Error::Sort(format!(
                            "argument of {} has sort {got}, expected {want}",
                            p.name
                        )));
                    }
                }
                Ok(())
            }
            Formula::Not(g) => self.check_formula(g),
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.check_formula(a)?;
                self.check_formula(b)
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                if !self.sorts.contains(&v.sort) {
                    return Err(Error::Sort(format!(
                        "quantified variable {} has undeclared sort {}",
                        v.name, v.sort
                    )));
                }
                self.check_formula(body)
            }
        }
    }
}
