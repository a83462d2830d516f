//! Concrete ASCII syntax for formulas and the textual file formats.

mod files;
mod lexer;

use std::fmt;

use thiserror::Error;

use crate::error::Result;
use crate::formula::{self, Formula, Prop, Quantifier, Sentence, Var};
use lexer::{lex, Cursor, Tok};

pub use files::{
    parse_kripke, parse_minsky, parse_named_traces, parse_pcp, parse_trace_model, print_kripke,
    print_minsky, print_pcp, print_trace, print_trace_model, print_valuation,
};

/// Byte range into the parsed input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> SourceSpan {
        SourceSpan { start, end }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at {}..{}: expected {}, found {}",
            self.span.start,
            self.span.end,
            self.expected.join(" or "),
            self.found
        )
    }
}

const KEYWORDS: &[&str] = &[
    "forall", "exists", "true", "false", "xor", "X", "F", "G", "U",
];

/// User propositions are `[a-z0-9_]+`; generated ones contain `@`.
pub fn valid_prop(name: &str) -> bool {
    if name.is_empty() || KEYWORDS.contains(&name) {
        return false;
    }
    if name.contains('@') {
        return name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'@' || b == b'.');
    }
    name.bytes()
        .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

pub fn valid_var(name: &str) -> bool {
    !name.is_empty()
        && !KEYWORDS.contains(&name)
        && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

// binding strength, loosest first
const L_QUANT: u8 = 0;
const L_IFF: u8 = 1;
const L_IMP: u8 = 2;
const L_XOR: u8 = 3;
const L_OR: u8 = 4;
const L_AND: u8 = 5;
const L_UNTIL: u8 = 6;
const L_PREFIX: u8 = 7;
const L_ATOM: u8 = 8;

pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut c = Cursor::new(lex(text, false)?);
    let f = parse_expr(&mut c, L_QUANT)?;
    if !matches!(c.peek(), Tok::Eof) {
        return Err(c.error(&["an operator", "end of input"]).into());
    }
    Ok(f)
}

/// Parses a formula and brings it into prenex form.
pub fn parse_sentence(text: &str) -> Result<Sentence> {
    let f = parse_formula(text)?;
    let mut prefix = Vec::new();
    let mut cur = &f;
    loop {
        match cur {
            Formula::Exists(v, b) => {
                prefix.push((Quantifier::Exists, v.clone()));
                cur = b;
            }
            Formula::Forall(v, b) => {
                prefix.push((Quantifier::Forall, v.clone()));
                cur = b;
            }
            _ => break,
        }
    }
    if cur.has_quantifier() {
        return formula::prenex(&f);
    }
    Sentence::new(prefix, cur.clone())
}

fn binop(t: &Tok) -> Option<(u8, bool)> {
    // (level, right associative)
    match t {
        Tok::DArrow => Some((L_IFF, false)),
        Tok::Arrow => Some((L_IMP, true)),
        Tok::Ident(s) if s == "xor" => Some((L_XOR, false)),
        Tok::Pipe => Some((L_OR, false)),
        Tok::Amp => Some((L_AND, false)),
        Tok::Ident(s) if s == "U" => Some((L_UNTIL, true)),
        _ => None,
    }
}

fn parse_expr(c: &mut Cursor, min: u8) -> std::result::Result<Formula, ParseError> {
    let mut lhs = parse_unary(c)?;
    while let Some((lvl, right)) = binop(c.peek()) {
        if lvl < min {
            break;
        }
        let op = c.bump().tok;
        let rhs = parse_expr(c, if right { lvl } else { lvl + 1 })?;
        lhs = match (op, lvl) {
            (Tok::DArrow, _) => formula::iff(lhs, rhs),
            (Tok::Arrow, _) => formula::implies(lhs, rhs),
            (Tok::Pipe, _) => formula::or(lhs, rhs),
            (Tok::Amp, _) => formula::and(lhs, rhs),
            (_, L_XOR) => formula::xor(lhs, rhs),
            _ => formula::until(lhs, rhs),
        };
    }
    Ok(lhs)
}

fn parse_unary(c: &mut Cursor) -> std::result::Result<Formula, ParseError> {
    match c.peek().clone() {
        Tok::Bang => {
            c.bump();
            Ok(formula::not(parse_unary(c)?))
        }
        Tok::LParen => {
            c.bump();
            let f = parse_expr(c, L_QUANT)?;
            c.expect(&Tok::RParen)?;
            Ok(f)
        }
        Tok::Ident(s) => match s.as_str() {
            "X" => {
                c.bump();
                Ok(formula::next(parse_unary(c)?))
            }
            "F" => {
                c.bump();
                Ok(formula::eventually(parse_unary(c)?))
            }
            "G" => {
                c.bump();
                Ok(formula::always(parse_unary(c)?))
            }
            "true" => {
                c.bump();
                Ok(Formula::True)
            }
            "false" => {
                c.bump();
                Ok(Formula::False)
            }
            "forall" | "exists" => {
                c.bump();
                let q = if s == "forall" {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let span = c.span();
                let (v, _) = c.ident("a trace variable")?;
                if !valid_var(&v) {
                    return Err(ParseError {
                        span,
                        expected: vec!["a trace variable".into()],
                        found: format!("`{v}`"),
                    });
                }
                c.expect(&Tok::Dot)?;
                let body = parse_expr(c, L_QUANT)?;
                Ok(formula::quantify(q, &Var::new(&v), body))
            }
            _ => {
                if !valid_prop(&s) {
                    return Err(c.error(&["a proposition", "`(`", "a unary operator"]));
                }
                c.bump();
                c.expect(&Tok::LBracket)?;
                let vspan = c.span();
                let (v, _) = c.ident("a trace variable")?;
                if !valid_var(&v) {
                    return Err(ParseError {
                        span: vspan,
                        expected: vec!["a trace variable".into()],
                        found: format!("`{v}`"),
                    });
                }
                c.expect(&Tok::RBracket)?;
                Ok(Formula::Atom(Prop::new(&s), Var::new(&v)))
            }
        },
        _ => Err(c.error(&["a proposition", "`(`", "a unary operator", "a quantifier"])),
    }
}

fn level(f: &Formula) -> u8 {
    use Formula::*;
    match f {
        True | False | Atom(_, _) => L_ATOM,
        Not(_) | Next(_) | Eventually(_) | Always(_) => L_PREFIX,
        Until(_, _) => L_UNTIL,
        And(_, _) => L_AND,
        Or(_, _) => L_OR,
        Xor(_, _) => L_XOR,
        Implies(_, _) => L_IMP,
        Iff(_, _) => L_IFF,
        Exists(_, _) | Forall(_, _) => L_QUANT,
    }
}

/// Prints with minimal parentheses; `parse_formula` inverts it.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, L_QUANT, &mut out);
    out
}

fn write_formula(f: &Formula, ctx: u8, out: &mut String) {
    use Formula::*;
    let lvl = level(f);
    // quantifier bodies extend to the right, so they are only bare at the loosest position
    let paren = lvl < ctx || (lvl == L_QUANT && ctx > L_QUANT);
    if paren {
        out.push('(');
    }
    let bin = |a: &Formula, b: &Formula, op: &str, right: bool, out: &mut String| {
        let (la, lb) = if right {
            (lvl + 1, lvl)
        } else {
            (lvl, lvl + 1)
        };
        write_formula(a, la, out);
        out.push(' ');
        out.push_str(op);
        out.push(' ');
        write_formula(b, lb, out);
    };
    match f {
        True => out.push_str("true"),
        False => out.push_str("false"),
        Atom(p, v) => {
            out.push_str(p.name());
            out.push('[');
            out.push_str(v.name());
            out.push(']');
        }
        Not(a) => {
            out.push('!');
            write_formula(a, L_PREFIX, out);
        }
        Next(a) => {
            out.push_str("X ");
            write_formula(a, L_PREFIX, out);
        }
        Eventually(a) => {
            out.push_str("F ");
            write_formula(a, L_PREFIX, out);
        }
        Always(a) => {
            out.push_str("G ");
            write_formula(a, L_PREFIX, out);
        }
        Until(a, b) => bin(a, b, "U", true, out),
        And(a, b) => bin(a, b, "&", false, out),
        Or(a, b) => bin(a, b, "|", false, out),
        Xor(a, b) => bin(a, b, "xor", false, out),
        Implies(a, b) => bin(a, b, "->", true, out),
        Iff(a, b) => bin(a, b, "<->", false, out),
        Exists(v, b) | Forall(v, b) => {
            out.push_str(if matches!(f, Exists(_, _)) {
                "exists "
            } else {
                "forall "
            });
            out.push_str(v.name());
            out.push_str(". ");
            write_formula(b, L_QUANT, out);
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn print_sentence(s: &Sentence) -> String {
    print_formula(&s.to_formula())
}
