use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, Cursor, Tok};
use super::{valid_prop, ParseError};
use crate::encode::{MinskyMachine, Op, PcpInstance, Rule};
use crate::error::{Error, Result};
use crate::formula::Prop;
use crate::semantics::{FiniteTraceModel, KripkeStructure, LassoTrace, Valuation};

fn parse_valuation(c: &mut Cursor) -> std::result::Result<Valuation, ParseError> {
    c.expect(&Tok::LBrace)?;
    let mut v = Valuation::new();
    if c.eat(&Tok::RBrace) {
        return Ok(v);
    }
    loop {
        let span = c.span();
        let (name, _) = c.ident("a proposition")?;
        if !valid_prop(&name) || !v.insert(Prop::new(&name)) {
            return Err(ParseError {
                span,
                expected: vec!["a new proposition".into()],
                found: format!("`{name}`"),
            });
        }
        if c.eat(&Tok::RBrace) {
            return Ok(v);
        }
        c.expect(&Tok::Comma)?;
    }
}

/// `trace NAME : V ; ... | V ; ... ;` per line.
pub fn parse_trace_model(text: &str) -> Result<FiniteTraceModel> {
    Ok(FiniteTraceModel::new(
        parse_named_traces(text)?.into_iter().map(|(_, t)| t),
    )?)
}

pub fn parse_named_traces(text: &str) -> Result<Vec<(String, LassoTrace)>> {
    let mut c = Cursor::new(lex(text, true)?);
    let mut out = Vec::new();
    loop {
        c.skip_newlines();
        if matches!(c.peek(), Tok::Eof) {
            break;
        }
        c.keyword("trace")?;
        let (name, _) = c.ident("a trace name")?;
        c.expect(&Tok::Colon)?;
        let mut stem = Vec::new();
        let mut lp = Vec::new();
        let mut in_loop = false;
        while !c.at_line_end() {
            match c.peek() {
                Tok::Semi => {
                    c.bump();
                }
                Tok::Pipe if !in_loop => {
                    c.bump();
                    in_loop = true;
                }
                Tok::LBrace => {
                    let v = parse_valuation(&mut c)?;
                    if in_loop {
                        lp.push(v);
                    } else {
                        stem.push(v);
                    }
                }
                _ => return Err(c.error(&["`{`", "`;`", "`|`", "end of line"]).into()),
            }
        }
        if !in_loop {
            return Err(c.error(&["`|`"]).into());
        }
        if lp.is_empty() {
            return Err(Error::EmptyLoop(name));
        }
        out.push((name, LassoTrace::raw(stem, lp).canonical()));
        c.end_line()?;
    }
    Ok(out)
}

pub fn print_valuation(v: &Valuation) -> String {
    let names: Vec<&str> = v.iter().map(|p| p.name()).collect();
    format!("{{{}}}", names.join(","))
}

/// Body of a trace line: `V ; V | V ;`.
pub fn print_trace(t: &LassoTrace) -> String {
    let stem: Vec<String> = t.stem().iter().map(print_valuation).collect();
    let lp: Vec<String> = t.lp().iter().map(print_valuation).collect();
    if stem.is_empty() {
        format!("| {} ;", lp.join(" ; "))
    } else {
        format!("{} | {} ;", stem.join(" ; "), lp.join(" ; "))
    }
}

/// Traces in canonical order named `t0`, `t1`, ...
pub fn print_trace_model(m: &FiniteTraceModel) -> String {
    m.traces()
        .enumerate()
        .map(|(i, t)| format!("trace t{i} : {}\n", print_trace(t)))
        .collect()
}

/// `state NAME : {a,b} initial?` lines followed by `edge A -> B` lines.
pub fn parse_kripke(text: &str) -> Result<KripkeStructure> {
    let mut c = Cursor::new(lex(text, true)?);
    let mut names: Vec<String> = Vec::new();
    let mut labels = Vec::new();
    let mut initial = BTreeSet::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    loop {
        c.skip_newlines();
        match c.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "state" => {
                c.bump();
                let span = c.span();
                let (name, _) = c.ident("a state name")?;
                if names.contains(&name) {
                    return Err(ParseError {
                        span,
                        expected: vec!["a new state name".into()],
                        found: format!("`{name}`"),
                    }
                    .into());
                }
                c.expect(&Tok::Colon)?;
                let v = parse_valuation(&mut c)?;
                if matches!(c.peek(), Tok::Ident(s) if s == "initial") {
                    c.bump();
                    initial.insert(names.len());
                }
                names.push(name);
                labels.push(v);
                c.end_line()?;
            }
            Tok::Ident(kw) if kw == "edge" => {
                c.bump();
                let (a, _) = c.ident("a state name")?;
                c.expect(&Tok::Arrow)?;
                let (b, _) = c.ident("a state name")?;
                edges.push((a, b));
                c.end_line()?;
            }
            _ => return Err(c.error(&["`state`", "`edge`"]).into()),
        }
    }
    let idx: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut succ = vec![BTreeSet::new(); names.len()];
    for (a, b) in &edges {
        let ia = *idx
            .get(a.as_str())
            .ok_or_else(|| Error::DanglingEdge(a.clone()))?;
        let ib = *idx
            .get(b.as_str())
            .ok_or_else(|| Error::DanglingEdge(b.clone()))?;
        succ[ia].insert(ib);
    }
    KripkeStructure::new(names, labels, initial, succ)
}

pub fn print_kripke(k: &KripkeStructure) -> String {
    let mut out = String::new();
    for q in 0..k.len() {
        out.push_str(&format!(
            "state {} : {}",
            k.name(q),
            print_valuation(k.label(q))
        ));
        if k.initial().contains(&q) {
            out.push_str(" initial");
        }
        out.push('\n');
    }
    for q in 0..k.len() {
        for &r in k.succ(q) {
            out.push_str(&format!("edge {} -> {}\n", k.name(q), k.name(r)));
        }
    }
    out
}

fn word(c: &mut Cursor, allow_empty: bool) -> std::result::Result<String, ParseError> {
    match c.peek().clone() {
        Tok::Ident(w) if w.bytes().all(|b| b.is_ascii_lowercase()) => {
            c.bump();
            Ok(w)
        }
        Tok::Slash | Tok::Newline | Tok::Eof if allow_empty => Ok(String::new()),
        _ => Err(c.error(&["a lowercase word"])),
    }
}

/// `pair WORD / WORD` per line.
pub fn parse_pcp(text: &str) -> Result<PcpInstance> {
    let mut c = Cursor::new(lex(text, true)?);
    let mut pairs = Vec::new();
    loop {
        c.skip_newlines();
        if matches!(c.peek(), Tok::Eof) {
            break;
        }
        c.keyword("pair")?;
        let u = word(&mut c, true)?;
        c.expect(&Tok::Slash)?;
        let v = word(&mut c, true)?;
        c.end_line()?;
        pairs.push((u, v));
    }
    PcpInstance::new(pairs)
}

pub fn print_pcp(p: &PcpInstance) -> String {
    p.pairs()
        .iter()
        .map(|(u, v)| format!("pair {u} / {v}\n"))
        .collect()
}

/// `init STATE` then `trans FROM {1|2} {inc|dec|zero} TO` lines.
pub fn parse_minsky(text: &str) -> Result<MinskyMachine> {
    let mut c = Cursor::new(lex(text, true)?);
    c.skip_newlines();
    c.keyword("init")?;
    let (init, _) = c.ident("a state name")?;
    c.end_line()?;
    let mut rules = Vec::new();
    loop {
        c.skip_newlines();
        if matches!(c.peek(), Tok::Eof) {
            break;
        }
        c.keyword("trans")?;
        let (from, _) = c.ident("a state name")?;
        let counter = match c.peek().clone() {
            Tok::Ident(s) if s == "1" || s == "2" => {
                c.bump();
                if s == "1" {
                    1
                } else {
                    2
                }
            }
            _ => return Err(c.error(&["`1`", "`2`"]).into()),
        };
        let (op, _) = c.ident("an opcode")?;
        let op = match op.as_str() {
            "inc" => Op::Inc,
            "dec" => Op::Dec,
            "zero" => Op::Zero,
            _ => return Err(Error::UnknownOpcode(op)),
        };
        let (to, _) = c.ident("a state name")?;
        c.end_line()?;
        rules.push(Rule {
            from,
            counter,
            op,
            to,
        });
    }
    MinskyMachine::new(init, rules)
}

pub fn print_minsky(m: &MinskyMachine) -> String {
    let mut out = format!("init {}\n", m.initial());
    for r in m.rules() {
        let op = match r.op {
            Op::Inc => "inc",
            Op::Dec => "dec",
            Op::Zero => "zero",
        };
        out.push_str(&format!("trans {} {} {} {}\n", r.from, r.counter, op, r.to));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::valuation;

    #[test]
    fn trace_examples() {
        let m = parse_trace_model("trace t : {a} | {} ;").unwrap();
        let t = &m.to_vec()[0];
        assert_eq!(t.stem(), &[valuation(&["a"])]);
        assert_eq!(t.lp(), &[valuation(&[])]);
        let m = parse_trace_model("trace t : | {a} ;").unwrap();
        assert_eq!(m.to_vec()[0], LassoTrace::constant(valuation(&["a"])));
        assert!(matches!(
            parse_trace_model("trace t : {a} | ;"),
            Err(Error::EmptyLoop(_))
        ));
        assert!(matches!(
            parse_trace_model("trace t : {a,a} | {} ;"),
            Err(Error::Parse(_))
        ));
        let two =
            parse_trace_model("# comment\ntrace x : | {a} ;\ntrace y : {a} | {a} ; # same trace\n")
                .unwrap();
        assert_eq!(two.len(), 1);
        let round = parse_trace_model("trace t : {b,a} ; {} | {a} ; {} ;").unwrap();
        assert_eq!(
            parse_trace_model(&print_trace_model(&round)).unwrap(),
            round
        );
    }

    #[test]
    fn kripke_errors() {
        assert!(matches!(
            parse_kripke("state s : {} initial\nedge s -> t\n"),
            Err(Error::DanglingEdge(_))
        ));
        assert!(matches!(
            parse_kripke("state s : {}\nedge s -> s\n"),
            Err(Error::NoInitialState)
        ));
    }

    #[test]
    fn pcp_and_minsky() {
        let p = parse_pcp("pair b / aba\npair aa / a\n").unwrap();
        assert_eq!(p.pairs().len(), 2);
        assert_eq!(parse_pcp(&print_pcp(&p)).unwrap(), p);
        assert!(matches!(
            parse_pcp("pair / a\n"),
            Err(Error::EmptyWordPair(1))
        ));
        let m = parse_minsky("init q0\ntrans q0 1 zero q0\n").unwrap();
        assert_eq!(m.rules().len(), 1);
        assert_eq!(parse_minsky(&print_minsky(&m)).unwrap(), m);
        assert!(matches!(
            parse_minsky("init q0\ntrans q0 1 jump q0\n"),
            Err(Error::UnknownOpcode(_))
        ));
    }
}
