//! Canonical text form. `parse_formula(render(f), sig)` returns a tree
//! structurally equal to `f`.

use std::fmt;

use super::{Formula, Term, Var};

/// Renders without sort annotations (sufficient for one-sorted signatures).
pub fn render(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f, 0, false);
    s
}

/// Renders with a sort annotation on every quantifier.
pub fn render_annotated(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f, 0, true);
    s
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(&mut s, self, 0);
        f.write_str(&s)
    }
}

// Binding powers, shared with the parser.
const P_OR: u8 = 3;
const P_AND: u8 = 4;
const P_CMP: u8 = 5;
const P_ADD: u8 = 6;
const P_MUL: u8 = 7;
const P_UNARY: u8 = 8;
const P_ATOM: u8 = 10;

fn write_formula(out: &mut String, f: &Formula, min_bp: u8, sorts: bool) {
    let prec = formula_prec(f);
    let parens = prec < min_bp;
    if parens {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Eq(a, b) => {
            write_term(out, a, P_CMP + 1);
            out.push_str(" = ");
            write_term(out, b, P_CMP + 1);
        }
        Formula::Pred(p, args) => {
            if p.name == "<=" && args.len() == 2 {
                write_term(out, &args[0], P_CMP + 1);
                out.push_str(" <= ");
                write_term(out, &args[1], P_CMP + 1);
            } else {
                out.push_str(&p.name);
                if !p.indices.is_empty() {
                    out.push('[');
                    for (i, ix) in p.indices.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        out.push_str(&ix.to_string());
                    }
                    out.push(']');
                }
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(out, a, 0);
                }
                out.push(')');
            }
        }
        Formula::Not(g) => {
            out.push('~');
            write_formula(out, g, P_UNARY, sorts);
        }
        Formula::And(a, b) => {
            write_formula(out, a, P_AND, sorts);
            out.push_str(" /\\ ");
            write_formula(out, b, P_AND + 1, sorts);
        }
        Formula::Or(a, b) => {
            write_formula(out, a, P_OR, sorts);
            out.push_str(" \\/ ");
            write_formula(out, b, P_OR + 1, sorts);
        }
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            out.push_str(match f {
                Formula::Forall(..) => "forall ",
                _ => "exists ",
            });
            write_var(out, v, sorts);
            out.push_str(". ");
            write_formula(out, body, 0, sorts);
        }
    }
    if parens {
        out.push(')');
    }
}

fn write_var(out: &mut String, v: &Var, sorts: bool) {
    out.push_str(&v.name);
    if sorts {
        out.push(':');
        out.push_str(&v.sort);
    }
}

fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => 0,
        Formula::Or(..) => P_OR,
        Formula::And(..) => P_AND,
        Formula::Eq(..) => P_CMP,
        Formula::Pred(p, _) if p.name == "<=" => P_CMP,
        Formula::Not(..) => P_UNARY,
        _ => P_ATOM,
    }
}

fn write_term(out: &mut String, t: &Term, min_bp: u8) {
    let prec = term_prec(t);
    let parens = prec < min_bp;
    if parens {
        out.push('(');
    }
    match t {
        Term::Var(v) => out.push_str(&v.name),
        Term::Const(c) => out.push_str(c),
        Term::App(f, args) => match (f.as_str(), args.len()) {
            ("+", 2) | ("-", 2) => {
                write_term(out, &args[0], P_ADD);
                out.push_str(if f == "+" { " + " } else { " - " });
                write_term(out, &args[1], P_ADD + 1);
            }
            ("*", 2) => {
                write_term(out, &args[0], P_MUL);
                out.push_str(" * ");
                write_term(out, &args[1], P_MUL + 1);
            }
            ("meet", 2) => {
                write_term(out, &args[0], P_AND);
                out.push_str(" /\\ ");
                write_term(out, &args[1], P_AND + 1);
            }
            ("join", 2) => {
                write_term(out, &args[0], P_OR);
                out.push_str(" \\/ ");
                write_term(out, &args[1], P_OR + 1);
            }
            ("compl", 1) => {
                out.push('~');
                write_term(out, &args[0], P_UNARY);
            }
            _ => {
                out.push_str(f);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(out, a, 0);
                }
                out.push(')');
            }
        },
    }
    if parens {
        out.push(')');
    }
}

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::App(f, args) => match (f.as_str(), args.len()) {
            ("+", 2) | ("-", 2) => P_ADD,
            ("*", 2) => P_MUL,
            ("meet", 2) => P_AND,
            ("join", 2) => P_OR,
            ("compl", 1) => P_UNARY,
            _ => P_ATOM,
        },
        _ => P_ATOM,
    }
}
