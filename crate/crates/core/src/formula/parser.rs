//! Formula parser.
//!
//! Grammar sketch (loosest to tightest):
//!
//! ```text
//! formula := quantified | iff
//! quantified := ("forall" | "exists") IDENT [":" SORT] "." formula
//! iff  := imp ("<->" imp)*
//! imp  := or ("->" imp)?
//! or   := and ("\/" and)*
//! and  := cmp ("/\" cmp)*
//! cmp  := add (("="|"!="|"<="|"<") add)?
//! add  := mul (("+"|"-") mul)*
//! mul  := unary (("*"|".") unary)*          -- "." only as the unicode dot
//! unary := ("~"|"-") unary | quantified | primary
//! primary := "(" formula ")" | "true" | "false" | INT
//!          | IDENT | IDENT "(" args ")" | IDENT "[" ints "]" "(" args ")"
//! ```
//!
//! The tokens `/\`, `\/`, `~` double as the lattice operations of a Boolean
//! signature; whether a node is a connective or a term operation is decided
//! during elaboration from its position. In an equation `t1 = t2` the
//! comparison binds tighter than `/\`, so lattice terms on an equation side
//! must be parenthesized: `(x /\ y) = 0`.
//!
//! Unicode aliases accepted: ∀ ∃ ∧ ∨ ¬ → ↔ ≤ ≠ ⊤ ⊥ ·

use std::collections::BTreeMap;

use super::{Formula, PredSym, Signature, Term, Var};
use crate::error::ParseError;

/// Parses one formula over the given signature.
///
/// Free variables receive the signature's unique sort; in a many-sorted
/// signature every variable must get its sort from a quantifier annotation.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let raw = p.parse_expr(0)?;
    p.expect_end()?;
    let mut elab = Elab {
        sig,
        bound: Vec::new(),
        free: BTreeMap::new(),
    };
    elab.formula(&raw)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Eq,
    Ne,
    Le,
    Lt,
    Arrow,
    Iff,
    AndOp,
    OrOp,
    Tilde,
    Plus,
    Minus,
    Star,
    Forall,
    Exists,
    TrueK,
    FalseK,
}

#[derive(Debug, Clone)]
struct SpTok {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<SpTok>, ParseError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();
    macro_rules! push {
        ($t:expr, $c:expr) => {
            out.push(SpTok {
                tok: $t,
                line,
                col: $c,
            })
        };
    }
    while let Some(&c) = chars.peek() {
        let start_col = col;
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            chars.next();
            col += 1;
        };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => bump(&mut chars),
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                bump(&mut chars);
                push!(Tok::LParen, start_col);
            }
            ')' => {
                bump(&mut chars);
                push!(Tok::RParen, start_col);
            }
            '[' => {
                bump(&mut chars);
                push!(Tok::LBracket, start_col);
            }
            ']' => {
                bump(&mut chars);
                push!(Tok::RBracket, start_col);
            }
            ',' => {
                bump(&mut chars);
                push!(Tok::Comma, start_col);
            }
            '.' => {
                bump(&mut chars);
                push!(Tok::Dot, start_col);
            }
            ':' => {
                bump(&mut chars);
                push!(Tok::Colon, start_col);
            }
            '=' => {
                bump(&mut chars);
                push!(Tok::Eq, start_col);
            }
            '+' => {
                bump(&mut chars);
                push!(Tok::Plus, start_col);
            }
            '*' | '·' => {
                bump(&mut chars);
                push!(Tok::Star, start_col);
            }
            '~' | '¬' => {
                bump(&mut chars);
                push!(Tok::Tilde, start_col);
            }
            '∧' => {
                bump(&mut chars);
                push!(Tok::AndOp, start_col);
            }
            '∨' => {
                bump(&mut chars);
                push!(Tok::OrOp, start_col);
            }
            '→' => {
                bump(&mut chars);
                push!(Tok::Arrow, start_col);
            }
            '↔' => {
                bump(&mut chars);
                push!(Tok::Iff, start_col);
            }
            '≤' => {
                bump(&mut chars);
                push!(Tok::Le, start_col);
            }
            '≠' => {
                bump(&mut chars);
                push!(Tok::Ne, start_col);
            }
            '⊤' => {
                bump(&mut chars);
                push!(Tok::TrueK, start_col);
            }
            '⊥' => {
                bump(&mut chars);
                push!(Tok::FalseK, start_col);
            }
            '∀' => {
                bump(&mut chars);
                push!(Tok::Forall, start_col);
            }
            '∃' => {
                bump(&mut chars);
                push!(Tok::Exists, start_col);
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    push!(Tok::Arrow, start_col);
                } else {
                    push!(Tok::Minus, start_col);
                }
            }
            '!' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    push!(Tok::Ne, start_col);
                } else {
                    return Err(ParseError::new(line, start_col, "expected '=' after '!'"));
                }
            }
            '<' => {
                bump(&mut chars);
                match chars.peek() {
                    Some(&'=') => {
                        bump(&mut chars);
                        push!(Tok::Le, start_col);
                    }
                    Some(&'-') => {
                        bump(&mut chars);
                        if chars.peek() == Some(&'>') {
                            bump(&mut chars);
                            push!(Tok::Iff, start_col);
                        } else {
                            return Err(ParseError::new(
                                line,
                                start_col,
                                "expected '>' after '<-'",
                            ));
                        }
                    }
                    _ => push!(Tok::Lt, start_col),
                }
            }
            '/' => {
                bump(&mut chars);
                if chars.peek() == Some(&'\\') {
                    bump(&mut chars);
                    push!(Tok::AndOp, start_col);
                } else {
                    return Err(ParseError::new(line, start_col, "expected '\\' after '/'"));
                }
            }
            '\\' => {
                bump(&mut chars);
                if chars.peek() == Some(&'/') {
                    bump(&mut chars);
                    push!(Tok::OrOp, start_col);
                } else {
                    return Err(ParseError::new(line, start_col, "expected '/' after '\\'"));
                }
            }
            c if c.is_ascii_digit() => {
                let mut n: i64 = 0;
                while let Some(&d) = chars.peek() {
                    if let Some(v) = d.to_digit(10) {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(v as i64))
                            .ok_or_else(|| {
                                ParseError::new(line, start_col, "integer literal too large")
                            })?;
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                push!(Tok::Int(n), start_col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '\'' {
                        s.push(d);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                let tok = match s.as_str() {
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    "true" => Tok::TrueK,
                    "false" => Tok::FalseK,
                    _ => Tok::Ident(s),
                };
                push!(tok, start_col);
            }
            other => {
                return Err(ParseError::new(
                    line,
                    start_col,
                    format!("unexpected character {other:?}"),
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CmpOp {
    Eq,
    Ne,
    Le,
    Lt,
}

#[derive(Debug, Clone)]
enum RawNode {
    Ident(String),
    Int(i64),
    App(String, Vec<i64>, Vec<Raw>),
    True,
    False,
    Not(Box<Raw>),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Imp(Box<Raw>, Box<Raw>),
    Iff(Box<Raw>, Box<Raw>),
    Cmp(CmpOp, Box<Raw>, Box<Raw>),
    Add(Box<Raw>, Box<Raw>),
    Sub(Box<Raw>, Box<Raw>),
    Mul(Box<Raw>, Box<Raw>),
    Neg(Box<Raw>),
    Quant(bool, String, Option<String>, Box<Raw>),
}

#[derive(Debug, Clone)]
struct Raw {
    node: RawNode,
    line: u32,
    col: u32,
}

impl Raw {
    fn new(node: RawNode, line: u32, col: u32) -> Self {
        Raw { node, line, col }
    }
}

struct Parser {
    tokens: Vec<SpTok>,
    pos: usize,
}

// Binding powers, loosest first.
const P_IFF: u8 = 1;
const P_IMP: u8 = 2;
const P_OR: u8 = 3;
const P_AND: u8 = 4;
const P_CMP: u8 = 5;
const P_ADD: u8 = 6;
const P_MUL: u8 = 7;

impl Parser {
    fn peek(&self) -> Option<&SpTok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<SpTok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (u32, u32) {
        match self.peek() {
            Some(t) => (t.line, t.col),
            None => self
                .tokens
                .last()
                .map(|t| (t.line, t.col + 1))
                .unwrap_or((1, 1)),
        }
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::new(line, col, msg)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.err_here("unexpected trailing input"))
        }
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<Raw, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let (op_bp, right_assoc) = match self.peek().map(|t| &t.tok) {
                Some(Tok::Iff) => (P_IFF, true),
                Some(Tok::Arrow) => (P_IMP, true),
                Some(Tok::OrOp) => (P_OR, false),
                Some(Tok::AndOp) => (P_AND, false),
                Some(Tok::Eq) | Some(Tok::Ne) | Some(Tok::Le) | Some(Tok::Lt) => (P_CMP, false),
                Some(Tok::Plus) | Some(Tok::Minus) => (P_ADD, false),
                Some(Tok::Star) => (P_MUL, false),
                _ => break,
            };
            if op_bp < min_bp {
                break;
            }
            let op = self.next().unwrap();
            let next_bp = if right_assoc { op_bp } else { op_bp + 1 };
            // Comparisons are non-associative.
            let rhs_bp = if op_bp == P_CMP { P_CMP + 1 } else { next_bp };
            let rhs = self.parse_expr(rhs_bp)?;
            let (l, c) = (op.line, op.col);
            let node = match op.tok {
                Tok::Iff => RawNode::Iff(Box::new(lhs), Box::new(rhs)),
                Tok::Arrow => RawNode::Imp(Box::new(lhs), Box::new(rhs)),
                Tok::OrOp => RawNode::Or(Box::new(lhs), Box::new(rhs)),
                Tok::AndOp => RawNode::And(Box::new(lhs), Box::new(rhs)),
                Tok::Eq => RawNode::Cmp(CmpOp::Eq, Box::new(lhs), Box::new(rhs)),
                Tok::Ne => RawNode::Cmp(CmpOp::Ne, Box::new(lhs), Box::new(rhs)),
                Tok::Le => RawNode::Cmp(CmpOp::Le, Box::new(lhs), Box::new(rhs)),
                Tok::Lt => RawNode::Cmp(CmpOp::Lt, Box::new(lhs), Box::new(rhs)),
                Tok::Plus => RawNode::Add(Box::new(lhs), Box::new(rhs)),
                Tok::Minus => RawNode::Sub(Box::new(lhs), Box::new(rhs)),
                Tok::Star => RawNode::Mul(Box::new(lhs), Box::new(rhs)),
                _ => unreachable!(),
            };
            lhs = Raw::new(node, l, c);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Raw, ParseError> {
        let (line, col) = self.here();
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Tilde) => {
                self.next();
                let inner = self.parse_unary()?;
                Ok(Raw::new(RawNode::Not(Box::new(inner)), line, col))
            }
            Some(Tok::Minus) => {
                self.next();
                let inner = self.parse_unary()?;
                Ok(Raw::new(RawNode::Neg(Box::new(inner)), line, col))
            }
            Some(Tok::Forall) | Some(Tok::Exists) => self.parse_quant(),
            _ => self.parse_primary(),
        }
    }

    fn parse_quant(&mut self) -> Result<Raw, ParseError> {
        let q = self.next().unwrap();
        let universal = q.tok == Tok::Forall;
        let name = match self.next() {
            Some(SpTok {
                tok: Tok::Ident(s), ..
            }) => s,
            _ => return Err(self.err_here("expected variable name after quantifier")),
        };
        let sort = if self.peek().map(|t| &t.tok) == Some(&Tok::Colon) {
            self.next();
            match self.next() {
                Some(SpTok {
                    tok: Tok::Ident(s), ..
                }) => Some(s),
                _ => return Err(self.err_here("expected sort name after ':'")),
            }
        } else {
            None
        };
        self.expect(Tok::Dot, "'.' after quantified variable")?;
        let body = self.parse_expr(0)?;
        Ok(Raw::new(
            RawNode::Quant(universal, name, sort, Box::new(body)),
            q.line,
            q.col,
        ))
    }

    fn parse_primary(&mut self) -> Result<Raw, ParseError> {
        let t = match self.next() {
            Some(t) => t,
            None => {
                return Err(self.err_here("unexpected end of input"));
            }
        };
        let (line, col) = (t.line, t.col);
        match t.tok {
            Tok::TrueK => Ok(Raw::new(RawNode::True, line, col)),
            Tok::FalseK => Ok(Raw::new(RawNode::False, line, col)),
            Tok::Int(n) => Ok(Raw::new(RawNode::Int(n), line, col)),
            Tok::LParen => {
                let inner = self.parse_expr(0)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let mut indices = Vec::new();
                let mut has_indices = false;
                if self.peek().map(|t| &t.tok) == Some(&Tok::LBracket) {
                    has_indices = true;
                    self.next();
                    loop {
                        let neg = if self.peek().map(|t| &t.tok) == Some(&Tok::Minus) {
                            self.next();
                            true
                        } else {
                            false
                        };
                        match self.next() {
                            Some(SpTok {
                                tok: Tok::Int(n), ..
                            }) => indices.push(if neg { -n } else { n }),
                            _ => return Err(self.err_here("expected integer index")),
                        }
                        match self.peek().map(|t| &t.tok) {
                            Some(Tok::Comma) => {
                                self.next();
                            }
                            Some(Tok::RBracket) => {
                                self.next();
                                break;
                            }
                            _ => return Err(self.err_here("expected ',' or ']' in index list")),
                        }
                    }
                }
                if self.peek().map(|t| &t.tok) == Some(&Tok::LParen) {
                    self.next();
                    let mut args = Vec::new();
                    if self.peek().map(|t| &t.tok) != Some(&Tok::RParen) {
                        loop {
                            args.push(self.parse_expr(0)?);
                            match self.peek().map(|t| &t.tok) {
                                Some(Tok::Comma) => {
                                    self.next();
                                }
                                _ => break,
                            }
                        }
                    }
                    self.expect(Tok::RParen, "')' after argument list")?;
                    Ok(Raw::new(RawNode::App(name, indices, args), line, col))
                } else if has_indices {
                    Err(ParseError::new(
                        line,
                        col,
                        format!("indexed symbol {name} requires an argument list"),
                    ))
                } else {
                    Ok(Raw::new(RawNode::Ident(name), line, col))
                }
            }
            other => Err(ParseError::new(
                line,
                col,
                format!("unexpected token {other:?}"),
            )),
        }
    }
}

struct Elab<'a> {
    sig: &'a Signature,
    bound: Vec<Var>,
    /// Sorts assigned so far to free variables, for consistency.
    free: BTreeMap<String, String>,
}

impl<'a> Elab<'a> {
    fn err(&self, raw: &Raw, msg: impl Into<String>) -> ParseError {
        ParseError::new(raw.line, raw.col, msg)
    }

    fn formula(&mut self, raw: &Raw) -> Result<Formula, ParseError> {
        match &raw.node {
            RawNode::True => Ok(Formula::True),
            RawNode::False => Ok(Formula::False),
            RawNode::Not(a) => Ok(Formula::not(self.formula(a)?)),
            RawNode::And(a, b) => Ok(Formula::and(self.formula(a)?, self.formula(b)?)),
            RawNode::Or(a, b) => Ok(Formula::or(self.formula(a)?, self.formula(b)?)),
            RawNode::Imp(a, b) => Ok(Formula::implies(self.formula(a)?, self.formula(b)?)),
            RawNode::Iff(a, b) => {
                let fa = self.formula(a)?;
                let fb = self.formula(b)?;
                Ok(Formula::and(
                    Formula::implies(fa.clone(), fb.clone()),
                    Formula::implies(fb, fa),
                ))
            }
            RawNode::Cmp(op, a, b) => {
                let (ta, sa) = self.term(a, None)?;
                let (tb, sb) = self.term(b, Some(&sa))?;
                if sa != sb {
                    return Err(self.err(b, format!("sort mismatch: {sa} vs {sb}")));
                }
                let eq = Formula::Eq(ta.clone(), tb.clone());
                match op {
                    CmpOp::Eq => Ok(eq),
                    CmpOp::Ne => Ok(Formula::not(eq)),
                    CmpOp::Le | CmpOp::Lt => {
                        if self.sig.predicate("<=").is_none() {
                            return Err(
                                self.err(raw, "signature has no order predicate '<='".to_string())
                            );
                        }
                        let le = Formula::Pred(PredSym::plain("<="), vec![ta, tb]);
                        if *op == CmpOp::Le {
                            Ok(le)
                        } else {
                            Ok(Formula::and(le, Formula::not(eq)))
                        }
                    }
                }
            }
            RawNode::Quant(universal, name, sort, body) => {
                let sort = match sort {
                    Some(s) => {
                        if !self.sig.sorts().contains(s) {
                            return Err(self.err(raw, format!("unknown sort {s}")));
                        }
                        s.clone()
                    }
                    None => match self.sig.single_sort() {
                        Some(s) => s.to_string(),
                        None => {
                            return Err(self.err(
                                raw,
                                "sort annotation required in a many-sorted signature",
                            ))
                        }
                    },
                };
                let v = Var::new(name.clone(), sort);
                self.bound.push(v.clone());
                let inner = self.formula(body);
                self.bound.pop();
                let inner = inner?;
                Ok(if *universal {
                    Formula::forall(v, inner)
                } else {
                    Formula::exists(v, inner)
                })
            }
            RawNode::App(name, indices, args) => {
                let decl = match self.sig.predicate(name) {
                    Some(d) => d,
                    None =>

                        return Err(self.err(
                            raw,
                            format!("unknown predicate {name} (functions cannot stand as formulas)"),
                        )),
                };
                if !decl.index_rule.check(indices) {
                    return Err(self.err(
                        raw,
                        format!("bad indices {indices:?} for predicate {name}"),
                    ));
                }
                if decl.arg_sorts.len() != args.len() {
                    return Err(self.err(
                        raw,
                        format!(
                            "predicate {name} expects {} arguments, got {}",
                            decl.arg_sorts.len(),
                            args.len()
                        ),
                    ));
                }
                let arg_sorts = decl.arg_sorts.clone();
                let mut ts = Vec::new();
                for (a, want) in args.iter().zip(&arg_sorts) {
                    let (t, s) = self.term(a, Some(want))?;
                    if &s != want {
                        return Err(self.err(a, format!("sort mismatch: {s}, expected {want}")));
                    }
                    ts.push(t);
                }
                Ok(Formula::Pred(
                    PredSym::indexed(name.clone(), indices.clone()),
                    ts,
                ))
            }
            RawNode::Ident(_) | RawNode::Int(_) | RawNode::Add(..) | RawNode::Sub(..)
            | RawNode::Mul(..) | RawNode::Neg(..) => {
                Err(self.err(raw, "expected a formula, found a term"))
            }
        }
    }

    fn surface_fn(
        &self,
        raw: &Raw,
        pick: impl Fn(&super::SurfaceOps) -> Option<&String>,
        what: &str,
    ) -> Result<String, ParseError> {
        pick(self.sig.surface())
            .cloned()
            .ok_or_else(|| self.err(raw, format!("signature has no {what} operation on terms")))
    }

    fn term(&mut self, raw: &Raw, want: Option<&str>) -> Result<(Term, String), ParseError> {
        match &raw.node {
            RawNode::Ident(name) => {
                if let Some(sort) = self.sig.constant_sort(name) {
                    return Ok((Term::Const(name.clone()), sort.to_string()));
                }
                if self.sig.function(name).is_some() {
                    return Err(self.err(raw, format!("function {name} used without arguments")));
                }
                if self.sig.predicate(name).is_some() {
                    return Err(self.err(raw, format!("predicate {name} used as a term")));
                }
                // A variable: bound beats free.
                if let Some(v) = self.bound.iter().rev().find(|v| &v.name == name) {
                    return Ok((Term::Var(v.clone()), v.sort.clone()));
                }
                let sort = if let Some(s) = self.free.get(name) {
                    s.clone()
                } else {
                    let s = match want {
                        Some(s) => s.to_string(),
                        None => match self.sig.single_sort() {
                            Some(s) => s.to_string(),
                            None => {
                                return Err(self.err(
                                    raw,
                                    format!("cannot infer sort of free variable {name}"),
                                ))
                            }
                        },
                    };
                    self.free.insert(name.clone(), s.clone());
                    s
                };
                Ok((Term::var(name.clone(), sort.clone()), sort))
            }
            RawNode::Int(n) => self.numeral(raw, *n),
            RawNode::Neg(a) => {
                let (t, s) = self.term(a, want)?;
                if let Some(sub) = self.sig.surface().sub.clone() {
                    if self.sig.constant_sort("0").is_some() {
                        return Ok((Term::app(sub, vec![Term::constant("0"), t]), s));
                    }
                }
                if let Some(not) = self.sig.surface().not.clone() {
                    return Ok((Term::app(not, vec![t]), s));
                }
                Err(self.err(raw, "signature has no negation operation on terms"))
            }
            RawNode::Not(a) => {
                let name = self.surface_fn(raw, |s| s.not.as_ref(), "complement")?;
                let (t, s) = self.term(a, want)?;
                Ok((Term::app(name, vec![t]), s))
            }
            RawNode::And(a, b) | RawNode::Or(a, b) => {
                let name = match &raw.node {
                    RawNode::And(..) => self.surface_fn(raw, |s| s.and.as_ref(), "meet")?,
                    _ => self.surface_fn(raw, |s| s.or.as_ref(), "join")?,
                };
                let (ta, s) = self.term(a, want)?;
                let (tb, _) = self.term(b, Some(&s))?;
                Ok((Term::app(name, vec![ta, tb]), s))
            }
            RawNode::Add(a, b) | RawNode::Sub(a, b) | RawNode::Mul(a, b) => {
                let name = match &raw.node {
                    RawNode::Add(..) => self.surface_fn(raw, |s| s.add.as_ref(), "addition")?,
                    RawNode::Sub(..) => self.surface_fn(raw, |s| s.sub.as_ref(), "subtraction")?,
                    _ => self.surface_fn(raw, |s| s.mul.as_ref(), "multiplication")?,
                };
                let (ta, s) = self.term(a, want)?;
                let (tb, _) = self.term(b, Some(&s))?;
                Ok((Term::app(name, vec![ta, tb]), s))
            }
            RawNode::App(name, indices, args) => {
                if !indices.is_empty() {
                    return Err(self.err(raw, "indexed symbols are predicates, not functions"));
                }
                let decl = match self.sig.function(name) {
                    Some(d) => d.clone(),
                    None => return Err(self.err(raw, format!("unknown function {name}"))),
                };
                if decl.arg_sorts.len() != args.len() {
                    return Err(self.err(
                        raw,
                        format!(
                            "function {name} expects {} arguments, got {}",
                            decl.arg_sorts.len(),
                            args.len()
                        ),
                    ));
                }
                let mut ts = Vec::new();
                for (a, wants) in args.iter().zip(&decl.arg_sorts) {
                    let (t, s) = self.term(a, Some(wants))?;
                    if &s != wants {
                        return Err(self.err(a, format!("sort mismatch: {s}, expected {wants}")));
                    }
                    ts.push(t);
                }
                Ok((Term::app(name.clone(), ts), decl.result_sort))
            }
            _ => Err(self.err(raw, "expected a term, found a formula")),
        }
    }

    /// Integer literals: `0` and `1` name the constants; larger numerals
    /// expand to `1 + 1 + ...` when the signature has addition.
    fn numeral(&mut self, raw: &Raw, n: i64) -> Result<(Term, String), ParseError> {
        if n < 0 {
            let (t, s) = self.numeral(raw, -n)?;
            let sub = self.surface_fn(raw, |s| s.sub.as_ref(), "subtraction")?;
            return Ok((Term::app(sub, vec![Term::constant("0"), t]), s));
        }
        let zero_sort = self.sig.constant_sort("0").map(|s| s.to_string());
        let one_sort = self.sig.constant_sort("1").map(|s| s.to_string());
        match n {
            0 => zero_sort
                .map(|s| (Term::constant("0"), s))
                .ok_or_else(|| self.err(raw, "signature has no constant 0")),
            1 => one_sort
                .map(|s| (Term::constant("1"), s))
                .ok_or_else(|| self.err(raw, "signature has no constant 1")),
            n => {
                if n > 4096 {
                    return Err(self.err(raw, "numeral too large"));
                }
                let sort =
                    one_sort.ok_or_else(|| self.err(raw, "signature has no constant 1"))?;
                let add = self.surface_fn(raw, |s| s.add.as_ref(), "addition")?;
                let mut t = Term::constant("1");
                for _ in 1..n {
                    t = Term::app(add.clone(), vec![t, Term::constant("1")]);
                }
                Ok((t, sort))
            }
        }
    }
}
