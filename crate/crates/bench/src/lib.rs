//! Shared inputs for the criterion benches.

use hyperltl::formula::Sentence;
use hyperltl::semantics::KripkeStructure;
use hyperltl::syntax::{parse_kripke, parse_sentence};

/// Named sentences exercised by the decider benches.
pub fn sentences() -> Vec<(&'static str, Sentence)> {
    [
        ("strict_chain", "forall p. exists q. G (a[p] -> a[q]) & F (!a[p] & a[q])"),
        ("xor_witness", "forall p. exists q. F (a[p] xor a[q])"),
        ("lead_window", "exists t. forall p. exists q. X a[q] & F (a[t] xor a[p]) & G (a[p] -> a[q])"),
        ("two_props", "forall p. exists q. G (a[p] -> b[q]) & F (b[p] & !a[q])"),
    ]
    .into_iter()
    .map(|(n, t)| (n, parse_sentence(t).expect("valid")))
    .collect()
}

pub fn noninterference() -> Sentence {
    parse_sentence("forall p. forall q. G (l[p] <-> l[q]) -> G (o[p] <-> o[q])").expect("valid")
}

/// `n` states in a ring, each labelled with `h` and `o` in alternation.
pub fn ring(n: usize) -> KripkeStructure {
    let mut text = String::new();
    for i in 0..n {
        let label = if i % 2 == 0 { "{h,o}" } else { "{}" };
        text.push_str(&format!("state s{i} : {label} initial\n"));
    }
    for i in 0..n {
        text.push_str(&format!("edge s{i} -> s{}\n", (i + 1) % n));
    }
    parse_kripke(&text).expect("valid")
}
