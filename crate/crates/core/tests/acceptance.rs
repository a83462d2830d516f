//! End-to-end acceptance checks. Each test prints one `PASS name` or
//! `FAIL name: ...` line to the real stdout (bypassing the capture), then
//! asserts.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use regex::Regex;

use hyperltl::automata::{complement_nba, ltl_sat, Cube, Edge, LassoWord, Nba};
use hyperltl::decide::{
    decide_complete, fragment_witness_chain, lassos_up_to, sat_bounded_kripke, sat_bounded_periodic,
    sat_bounded_traces, sat_fragment, Budget, Certificate, Outcome,
};
use hyperltl::encode::{
    counter_prop, encode_minsky, encode_pcp, encode_starfree, word_structure, minsky_rank,
    minsky_run_model, pcp_solution_model, psi_e, starfree_sample, word_trace, StarFreeExpr,
};
use hyperltl::error::Error;
use hyperltl::formula::{
    always, and, atom, classify_prefix, eventually, iff, implies, in_fragment, next, not, or,
    temporal_depth, until, xor, Formula, Fragment, Prop, Quantifier, Sentence, Var,
};
use hyperltl::modelcheck::modelcheck;
use hyperltl::semantics::{
    eval_formula, eval_qf, eval_sentence, kripke_lassos, valuation, FiniteTraceModel,
    KripkeStructure, LassoTrace, TraceAssignment, Valuation,
};
use hyperltl::syntax::{parse_kripke, parse_minsky, parse_pcp, parse_sentence, print_sentence};
use hyperltl::transform::{
    eliminate_x, merge_model, merge_universals, reduce_depth2, skolem_model, to_forall_exists,
    unmerge, witness_model_depth2, xelim_model,
};

fn report(name: &str, started: Instant, detail: String, failures: Vec<String>) {
    let secs = started.elapsed().as_secs_f64();
    let line = if failures.is_empty() {
        format!("PASS {name} ({detail}; {secs:.1}s)")
    } else {
        format!(
            "FAIL {name}: {} failure(s), first: {}",
            failures.len(),
            failures[0]
        )
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    assert!(failures.is_empty(), "{line}");
}

// ---------------------------------------------------------------- generators

struct Gen {
    rng: ChaCha8Rng,
}

#[derive(Clone, Copy)]
struct Ops {
    next: bool,
    until: bool,
}

impl Gen {
    fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn atom(&mut self, vars: &[&str], props: &[&str]) -> Formula {
        let v = *vars.choose(&mut self.rng).unwrap();
        let p = *props.choose(&mut self.rng).unwrap();
        atom(p, v)
    }

    fn connect(&mut self, a: Formula, b: Formula) -> Formula {
        match self.rng.gen_range(0..5) {
            0 | 1 => and(a, b),
            2 => or(a, b),
            3 => implies(a, b),
            _ => match self.rng.gen_bool(0.5) {
                true => iff(a, b),
                false => xor(a, b),
            },
        }
    }

    fn split(&mut self, size: usize) -> (usize, usize) {
        let l = self.rng.gen_range(1..size - 1);
        (l, size - 1 - l)
    }

    /// Propositional formula with at most `size` nodes.
    fn prop(&mut self, vars: &[&str], props: &[&str], size: usize) -> Formula {
        if size < 2 || self.rng.gen_bool(0.45) {
            return self.atom(vars, props);
        }
        if size < 3 || self.rng.gen_bool(0.3) {
            return not(self.prop(vars, props, size - 1));
        }
        let (l, r) = self.split(size);
        let a = self.prop(vars, props, l);
        let b = self.prop(vars, props, r);
        self.connect(a, b)
    }

    /// Temporal depth at most `depth`, at most `size` nodes.
    fn ltl(&mut self, vars: &[&str], props: &[&str], size: usize, depth: usize, ops: Ops) -> Formula {
        if size < 2 || self.rng.gen_bool(0.2) {
            return self.atom(vars, props);
        }
        let choice = self.rng.gen_range(0..10);
        if depth > 0 && choice < 5 {
            if ops.until && size >= 3 && choice == 0 {
                let (l, r) = self.split(size);
                let a = self.ltl(vars, props, l, depth - 1, ops);
                let b = self.ltl(vars, props, r, depth - 1, ops);
                return until(a, b);
            }
            let body = self.ltl(vars, props, size - 1, depth - 1, ops);
            return match self.rng.gen_range(0..3) {
                0 if ops.next => next(body),
                0 | 1 => eventually(body),
                _ => always(body),
            };
        }
        if size < 3 || choice < 7 {
            return not(self.ltl(vars, props, size - 1, depth, ops));
        }
        let (l, r) = self.split(size);
        let a = self.ltl(vars, props, l, depth, ops);
        let b = self.ltl(vars, props, r, depth, ops);
        self.connect(a, b)
    }

    /// Boolean combination of `F β`, `G β`, `β` and, with `xs`, `X^k β`.
    fn fg(&mut self, vars: &[&str], props: &[&str], size: usize, xs: bool) -> Formula {
        if size < 3 || self.rng.gen_bool(0.35) {
            let inner = size.saturating_sub(1).max(1);
            let b = self.prop(vars, props, inner.min(4));
            return match self.rng.gen_range(0..4) {
                0 => eventually(b),
                1 => always(b),
                2 if xs => (0..self.rng.gen_range(1..=2)).fold(b, |f, _| next(f)),
                _ => b,
            };
        }
        if self.rng.gen_bool(0.2) {
            return not(self.fg(vars, props, size - 1, xs));
        }
        let (l, r) = self.split(size);
        let a = self.fg(vars, props, l, xs);
        let b = self.fg(vars, props, r, xs);
        self.connect(a, b)
    }

    fn sentence(&mut self, kinds: &[Quantifier], matrix: Formula) -> Sentence {
        let prefix = kinds
            .iter()
            .enumerate()
            .map(|(i, q)| (*q, Var::new(VARS[i])))
            .collect();
        Sentence::new(prefix, matrix).expect("closed")
    }
}

const VARS: [&str; 4] = ["p", "q", "r", "s"];

fn size_of(f: &Formula) -> usize {
    hyperltl::formula::size(f)
}

fn model(ts: impl IntoIterator<Item = LassoTrace>) -> FiniteTraceModel {
    FiniteTraceModel::new(ts).unwrap()
}

/// First model among subsets of `u` with at most `max` traces.
fn brute_force(s: &Sentence, u: &[LassoTrace], max: usize) -> Option<FiniteTraceModel> {
    use itertools::Itertools;
    for r in 1..=max.min(u.len()) {
        let hit = (0..u.len())
            .combinations(r)
            .collect::<Vec<_>>()
            .into_par_iter()
            .find_map_first(|c| {
                let t = model(c.iter().map(|&i| u[i].clone()));
                eval_sentence(s, &t).unwrap().then_some(t)
            });
        if hit.is_some() {
            return hit;
        }
    }
    None
}

fn props_of(names: &[&str]) -> Vec<Prop> {
    names.iter().map(|n| Prop::new(n)).collect()
}

// ---------------------------------------------------------------- criteria

#[test]
fn pcp_worked_example() {
    let start = Instant::now();
    let p = parse_pcp("pair b / aba\npair aa / a\n").unwrap();
    let (s, _) = encode_pcp(&p).unwrap();
    let t = pcp_solution_model(&p, &[2, 1, 2]).unwrap();
    let mut failures = Vec::new();
    if t.len() != 8 {
        failures.push(format!("reference model has {} traces", t.len()));
    }
    if !eval_sentence(&s, &t).unwrap() {
        failures.push("encoding is false on the reference model".into());
    }
    let ts = t.to_vec();
    let set = |tr: &LassoTrace, j: usize, names: &[&str]| {
        let mut stem = tr.stem().to_vec();
        stem[j] = valuation(names);
        LassoTrace::raw(stem, tr.lp().to_vec())
    };
    let without = |i: usize| model(ts.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, x)| x.clone()));
    let with = |i: usize, tr: LassoTrace| {
        model(ts.iter().enumerate().map(|(k, x)| if k == i { tr.clone() } else { x.clone() }))
    };
    let perturbed = [
        ("first type-one trace deleted", without(0)),
        ("last type-two trace deleted", without(7)),
        ("letter of a type-one trace changed", with(0, set(&ts[0], 0, &["b"]))),
        ("rank bit of a type-one trace flipped", with(1, set(&ts[1], 7, &["0"]))),
        ("bit pair of a type-two trace changed", with(2, set(&ts[2], 6, &["p11"]))),
    ];
    for (what, m) in &perturbed {
        if m.len() != 8 - usize::from(what.contains("deleted")) {
            failures.push(format!("{what}: perturbation collapsed traces"));
        }
        if eval_sentence(&s, m).unwrap() {
            failures.push(format!("{what}: still satisfies the encoding"));
        }
    }
    report(
        "pcp_worked_example",
        start,
        "8-trace model holds, 5 perturbations fail".into(),
        failures,
    );
}

#[test]
fn strict_chain_triangle() {
    let start = Instant::now();
    let s = parse_sentence("forall p. exists q. G (a[p] -> a[q]) & F (!a[p] & a[q])").unwrap();
    let b = Budget::default();
    let mut failures = Vec::new();
    let v = sat_fragment(&s, &b).unwrap();
    match v.certificate() {
        Some(Certificate::Fragment(c)) => {
            let chain = fragment_witness_chain(c, 3).unwrap();
            if chain.steps.len() < 3 {
                failures.push(format!("chain has {} steps", chain.steps.len()));
            }
            let a = Prop::new("a");
            let count = |t: &LassoTrace| -> (usize, usize) {
                let on = |x: &[Valuation]| x.iter().filter(|v| v.contains(&a)).count();
                (on(t.lp()), t.lp().len())
            };
            for step in &chain.steps {
                let w = &step.witnesses[0];
                let mut pi = TraceAssignment::new();
                pi.insert(Var::new("p"), &step.pi);
                pi.insert(Var::new("q"), w);
                if !eval_qf(&s.matrix, &pi).unwrap() {
                    failures.push(format!("step {} violates the matrix", step.level));
                }
                let (x, n) = count(&step.pi);
                let (y, m) = count(w);
                if y * n <= x * m {
                    failures.push(format!("step {}: a-density does not grow", step.level));
                }
            }
        }
        _ => failures.push(format!("sat_fragment: {}", v.label())),
    }
    for k in 1..=4 {
        let v = sat_bounded_traces(&s, k, &b).unwrap();
        if !matches!(v.outcome, Outcome::UnsatWithinBound(_)) {
            failures.push(format!("sat_bounded_traces k={k}: {}", v.label()));
        }
    }
    for k in 1..=2 {
        let v = sat_bounded_kripke(&s, k, &b).unwrap();
        if !matches!(v.outcome, Outcome::UnsatWithinBound(_)) {
            failures.push(format!("sat_bounded_kripke k={k}: {}", v.label()));
        }
    }
    report(
        "strict_chain_triangle",
        start,
        "fragment SAT with depth-3 chain, traces k<=4 and kripke k<=2 UNSAT_WITHIN_BOUND".into(),
        failures,
    );
}

#[test]
fn fragment_decider_coherence() {
    let start = Instant::now();
    let mut g = Gen::new(3);
    let b = Budget::default();
    let mut cases = Vec::new();
    while cases.len() < 500 {
        let lead = cases.len() % 2 == 1;
        let kinds: Vec<Quantifier> = if lead {
            vec![Quantifier::Exists, Quantifier::Forall, Quantifier::Exists]
        } else {
            vec![Quantifier::Forall, Quantifier::Exists]
        };
        let vars = &VARS[..kinds.len()];
        let size = g.rng.gen_range(3..=10);
        let f = g.fg(vars, &["a"], size, false);
        if size_of(&f) > 10 {
            continue;
        }
        let s = g.sentence(&kinds, f);
        if in_fragment(&s, Fragment::FG1) {
            cases.push(s);
        }
    }
    let results: Vec<(String, bool, bool)> = cases
        .par_iter()
        .map(|s| {
            let f = sat_fragment(s, &b).unwrap();
            let p = sat_bounded_periodic(s, 4, &b).unwrap();
            let mut err = String::new();
            if p.is_unknown() || f.is_unknown() {
                err = format!("UNKNOWN on {}", print_sentence(s));
            } else if p.is_sat() && !f.is_sat() {
                err = format!("periodic SAT but fragment UNSAT: {}", print_sentence(s));
            }
            if let Some(Certificate::Fragment(c)) = f.certificate() {
                if let Err(e) = fragment_witness_chain(c, 2) {
                    err = format!("chain failed ({e}): {}", print_sentence(s));
                }
            }
            (err, f.is_sat(), p.is_sat())
        })
        .collect();
    let failures: Vec<String> = results.iter().filter(|r| !r.0.is_empty()).map(|r| r.0.clone()).collect();
    let fsat = results.iter().filter(|r| r.1).count();
    let psat = results.iter().filter(|r| r.2).count();
    report(
        "fragment_decider_coherence",
        start,
        format!("500 sentences, fragment SAT {fsat}, periodic SAT {psat}, 0 contradictions"),
        failures,
    );
}

/// Recovers a model of `s` from a model of its X-free form: for a marker
/// trace with `m^k` first at `j_k`, every other trace `t'` becomes the
/// projection of `t'(j_0)…t'(j_d) t'`. Some marker trace must work.
fn xelim_back(s: &Sentence, o: &Sentence, m: &FiniteTraceModel) -> bool {
    let ap = s.props();
    let markers: Vec<Prop> = (0..)
        .map(|k| Prop::new(&format!("@m{k}")))
        .take_while(|p| o.props().contains(p))
        .collect();
    let first = |t: &LassoTrace, p: &Prop| (0..t.stem().len() + t.lp().len()).find(|&j| t.value_at(j).contains(p));
    m.traces().any(|t0| {
        let Some(js) = markers.iter().map(|p| first(t0, p)).collect::<Option<Vec<usize>>>() else {
            return false;
        };
        let rest: Vec<LassoTrace> = m
            .traces()
            .filter(|t| *t != t0)
            .map(|t| {
                let mut stem: Vec<Valuation> = js.iter().map(|&j| t.value_at(j).clone()).collect();
                stem.extend(t.stem().iter().cloned());
                LassoTrace::raw(stem, t.lp().to_vec())
            })
            .collect();
        match FiniteTraceModel::new(rest) {
            Ok(t) => eval_sentence(s, &t.project(&ap)).unwrap(),
            Err(_) => false,
        }
    })
}

/// Models of `o` found by bounded search with tight caps; empty on blowup.
fn small_models(o: &Sentence) -> Vec<FiniteTraceModel> {
    let b = Budget {
        tableau_states: 1 << 14,
        expand_nodes: 1 << 14,
        ..Budget::default()
    };
    match sat_bounded_traces(o, 2, &b) {
        Ok(v) => match v.certificate() {
            Some(Certificate::Traces(t)) => vec![t.clone()],
            _ => Vec::new(),
        },
        Err(Error::SizeBlowup { .. }) => Vec::new(),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn transformation_transport() {
    let start = Instant::now();
    let mut g = Gen::new(4);
    let all_ops = Ops {
        next: true,
        until: true,
    };
    let mut cases: Vec<(Sentence, FiniteTraceModel)> = Vec::new();
    let mut tries = 0;
    while cases.len() < 200 {
        tries += 1;
        let props: &[&str] = if g.rng.gen_bool(0.5) { &["a"] } else { &["a", "b"] };
        let xs = cases.len() % 3 == 0;
        let kinds: Vec<Quantifier> = if xs {
            [
                vec![Quantifier::Forall],
                vec![Quantifier::Exists, Quantifier::Forall],
                vec![Quantifier::Forall, Quantifier::Exists],
            ]
            .choose(&mut g.rng)
            .unwrap()
            .clone()
        } else {
            (0..g.rng.gen_range(1..=2))
                .map(|_| if g.rng.gen_bool(0.5) { Quantifier::Forall } else { Quantifier::Exists })
                .collect()
        };
        let vars = &VARS[..kinds.len()];
        let size = g.rng.gen_range(2..=8);
        let f = if xs {
            g.fg(vars, props, size, true)
        } else {
            g.ltl(vars, props, size, 2, all_ops)
        };
        let s = g.sentence(&kinds, f);
        if temporal_depth(&s.matrix) > 2 {
            continue;
        }
        let u = lassos_up_to(&props_of(props), 2);
        if let Some(t) = brute_force(&s, &u, 3) {
            cases.push((s, t));
        }
    }
    let results: Vec<(Vec<String>, usize, usize)> = cases
        .par_iter()
        .map(|(s, t)| {
            let mut fails = Vec::new();
            let mut backward = 0;
            let mut xelims = 0;
            let ap = s.props();
            let text = print_sentence(s);
            let mut back = |name: &str, o: &Sentence, m: Option<FiniteTraceModel>, fails: &mut Vec<String>| {
                let mut found = small_models(o);
                found.extend(m);
                for m in found {
                    backward += 1;
                    if !eval_sentence(s, &m).unwrap() {
                        fails.push(format!("{name} backward: {text}"));
                    }
                }
            };
            // depth reduction
            let d = reduce_depth2(s);
            if temporal_depth(&d.matrix) > 2 {
                fails.push(format!("depth2 td: {text}"));
            }
            match witness_model_depth2(t, s) {
                Ok(w) if eval_sentence(&d, &w).unwrap() => back("depth2", &d, Some(w.project(&ap)), &mut fails),
                _ => fails.push(format!("depth2 forward: {text}")),
            }
            // alternation reduction
            let fe = to_forall_exists(s).unwrap();
            if !classify_prefix(&fe).is_forall_exists() {
                fails.push(format!("forall-exists prefix: {text}"));
            }
            match skolem_model(t, s) {
                Ok(w) if eval_sentence(&fe, &w).unwrap() => {
                    back("forall-exists", &fe, Some(w.project(&ap)), &mut fails);
                    // universal merging
                    let mg = merge_universals(&fe).unwrap();
                    if mg.count(Quantifier::Forall) > 2 {
                        fails.push(format!("forall2 universals: {text}"));
                    }
                    let n = fe.count(Quantifier::Forall);
                    let mm = if n > 2 { merge_model(&w, n) } else { w.clone() };
                    if !eval_sentence(&mg, &mm).unwrap() {
                        fails.push(format!("forall2 forward: {text}"));
                    }
                    let um = if n > 2 { unmerge(&mm) } else { mm };
                    if !eval_sentence(s, &um.project(&ap)).unwrap() {
                        fails.push(format!("forall2 backward: {text}"));
                    }
                }
                _ => fails.push(format!("forall-exists forward: {text}")),
            }
            // next elimination
            if s.count(Quantifier::Forall) == 1
                && classify_prefix(s).is_exists_forall_exists()
                && in_fragment(s, Fragment::FGX1)
            {
                xelims += 1;
                let o = eliminate_x(s).unwrap();
                if !in_fragment(&o, Fragment::FG1) {
                    fails.push(format!("xelim fragment: {text}"));
                }
                let w = xelim_model(t, s);
                if !eval_sentence(&o, &w).unwrap() {
                    fails.push(format!("xelim forward: {text}"));
                }
                let mut found = small_models(&o);
                found.push(w);
                for m in found {
                    backward += 1;
                    if !xelim_back(s, &o, &m) {
                        fails.push(format!("xelim backward: {text}"));
                    }
                }
            }
            (fails, backward, xelims)
        })
        .collect();
    let failures: Vec<String> = results.iter().flat_map(|r| r.0.clone()).collect();
    let backward: usize = results.iter().map(|r| r.1).sum();
    let xelims: usize = results.iter().map(|r| r.2).sum();
    report(
        "transformation_transport",
        start,
        format!("200 sentences from {tries} draws, {backward} backward checks, {xelims} with X elimination"),
        failures,
    );
}

#[test]
fn merge_transport_three_universals() {
    let start = Instant::now();
    let mut g = Gen::new(14);
    let ops = Ops {
        next: true,
        until: false,
    };
    let mut failures = Vec::new();
    let mut done = 0;
    let u = lassos_up_to(&props_of(&["a"]), 2);
    while done < 20 {
        let kinds = [Quantifier::Forall; 3];
        let f = g.ltl(&VARS[..3], &["a"], 6, 1, ops);
        let s = g.sentence(&kinds, f);
        let Some(t) = brute_force(&s, &u, 2) else { continue };
        done += 1;
        let m = merge_universals(&s).unwrap();
        let mm = merge_model(&t, 3);
        if m.count(Quantifier::Forall) != 2 || !eval_sentence(&m, &mm).unwrap() {
            failures.push(format!("forward: {}", print_sentence(&s)));
        }
        if !eval_sentence(&s, &unmerge(&mm)).unwrap() {
            failures.push(format!("backward: {}", print_sentence(&s)));
        }
    }
    report("merge_transport_three_universals", start, "20 sentences".into(), failures);
}

fn words(letters: &[&str], max: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            for c in letters {
                let mut x = w.clone();
                x.push(c.to_string());
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn random_nba(rng: &mut ChaCha8Rng, n: usize, atoms: usize) -> Nba {
    let names: Vec<(Prop, Var)> = ["a", "b"][..atoms]
        .iter()
        .map(|p| (Prop::new(p), Var::new("z")))
        .collect();
    let mut edges = vec![Vec::new(); n];
    for q in 0..n {
        for _ in 0..rng.gen_range(1..=3) {
            let mut guard = Cube::TRUE;
            for i in 0..atoms {
                match rng.gen_range(0..3) {
                    0 => guard.pos |= 1 << i,
                    1 => guard.neg |= 1 << i,
                    _ => {}
                }
            }
            edges[q].push(Edge {
                guard,
                to: rng.gen_range(0..n),
            });
        }
    }
    let accepting = (0..n).map(|_| rng.gen_bool(0.4)).collect();
    let initial = if rng.gen_bool(0.8) { vec![0] } else { vec![0, n - 1] };
    Nba::new(names, initial, edges, accepting).unwrap()
}

#[test]
fn ltl_backend_differential() {
    let start = Instant::now();
    let mut g = Gen::new(5);
    let ops = Ops {
        next: true,
        until: true,
    };
    let mut formulas = Vec::new();
    while formulas.len() < 500 {
        let props: &[&str] = if g.rng.gen_bool(0.5) { &["a"] } else { &["a", "b"] };
        let size = g.rng.gen_range(1..=12);
        let f = g.ltl(&["t"], props, size, 4, ops);
        if size_of(&f) <= 12 {
            formulas.push(f);
        }
    }
    let u = lassos_up_to(&props_of(&["a", "b"]), 3);
    let mut failures: Vec<String> = formulas
        .par_iter()
        .filter_map(|f| {
            let oracle = u.iter().any(|t| {
                let mut pi = TraceAssignment::new();
                pi.insert(Var::new("t"), t);
                eval_qf(f, &pi).unwrap()
            });
            match ltl_sat(f).unwrap() {
                Some(t) => {
                    let mut pi = TraceAssignment::new();
                    pi.insert(Var::new("t"), &t);
                    (!eval_qf(f, &pi).unwrap()).then(|| format!("model fails: {f}"))
                }
                None if oracle => Some(format!("oracle SAT, backend UNSAT: {f}")),
                None => None,
            }
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let letters = |atoms: usize| -> Vec<u64> { (0..1u64 << atoms).collect() };
    for i in 0..200 {
        let atoms = 1 + i % 2;
        let n = rng.gen_range(1..=6);
        let a = random_nba(&mut rng, n, atoms);
        let c = complement_nba(&a).unwrap();
        if !a.intersect(&c).is_empty() {
            failures.push(format!("L(A) and L(not A) intersect:\n{}", a.dump()));
            continue;
        }
        let ls = letters(atoms);
        for len in 1..=3 {
            for split in 0..len {
                for word in itertools::Itertools::multi_cartesian_product((0..len).map(|_| ls.iter().copied())) {
                    let w = LassoWord {
                        stem: word[..split].to_vec(),
                        lp: word[split..].to_vec(),
                    };
                    if a.accepts(&w) == c.accepts(&w) {
                        failures.push(format!("word {w:?} in both or neither:\n{}", a.dump()));
                    }
                }
            }
        }
    }
    report(
        "ltl_backend_differential",
        start,
        "500 formulas, 200 automata".into(),
        failures,
    );
}

fn structure(rng: &mut ChaCha8Rng, i: usize) -> KripkeStructure {
    let n = rng.gen_range(if i % 2 == 0 { 1..=4 } else { 3..=4 });
    let labels: Vec<Valuation> = (0..n)
        .map(|_| {
            let mut v = Valuation::new();
            for p in ["a", "b"] {
                if rng.gen_bool(0.5) {
                    v.insert(Prop::new(p));
                }
            }
            v
        })
        .collect();
    let mut succ = vec![BTreeSet::new(); n];
    if i % 2 == 0 {
        for q in 0..n - 1 {
            succ[q].insert(q + 1);
        }
        succ[n - 1].insert(n - 1);
    } else {
        for q in 0..n - 3 {
            succ[q].insert(q + 1);
        }
        succ[n - 3].insert(n - 2);
        succ[n - 3].insert(n - 1);
        succ[n - 2].insert(n - 2);
        succ[n - 1].insert(n - 1);
    }
    KripkeStructure::new((0..n).map(|q| format!("s{q}")).collect(), labels, [0].into(), succ).unwrap()
}

#[test]
fn modelcheck_oracle_agreement() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ks: Vec<(KripkeStructure, FiniteTraceModel)> = (0..20)
        .map(|i| {
            let k = structure(&mut rng, i);
            let t = kripke_lassos(&k, 4, 1);
            (k, t)
        })
        .collect();
    let mut g = Gen::new(7);
    let ops = Ops {
        next: true,
        until: true,
    };
    let mut sentences = Vec::new();
    while sentences.len() < 200 {
        let n = g.rng.gen_range(1..=3);
        let first = if g.rng.gen_bool(0.5) { Quantifier::Forall } else { Quantifier::Exists };
        let other = if first == Quantifier::Forall { Quantifier::Exists } else { Quantifier::Forall };
        let switch = g.rng.gen_range(1..=n);
        let kinds: Vec<Quantifier> = (0..n).map(|i| if i < switch { first } else { other }).collect();
        let props: &[&str] = if g.rng.gen_bool(0.5) { &["a"] } else { &["a", "b"] };
        let size = g.rng.gen_range(2..=8);
        let f = g.ltl(&VARS[..n], props, size, 1, ops);
        sentences.push(g.sentence(&kinds, f));
    }
    let failures: Vec<String> = sentences
        .par_iter()
        .flat_map_iter(|s| {
            ks.iter().enumerate().filter_map(move |(i, (k, t))| {
                let mc = modelcheck(k, s);
                let ev = eval_sentence(s, t).unwrap();
                match mc {
                    Ok(b) if b == ev => None,
                    Ok(b) => Some(format!("structure {i}: modelcheck {b}, oracle {ev}: {}", print_sentence(s))),
                    Err(e) => Some(format!("structure {i}: {e}: {}", print_sentence(s))),
                }
            })
        })
        .collect();
    report(
        "modelcheck_oracle_agreement",
        start,
        "20 structures x 200 sentences".into(),
        failures,
    );
}

#[test]
fn noninterference_demo() {
    let start = Instant::now();
    let s = parse_sentence("forall p. forall q. G (l[p] <-> l[q]) -> G (o[p] <-> o[q])").unwrap();
    let leaky = parse_kripke(
        "state s0 : {h,o} initial\nstate s1 : {} initial\nedge s0 -> s0\nedge s1 -> s1\n",
    )
    .unwrap();
    let secure = parse_kripke(
        "state s0 : {h} initial\nstate s1 : {} initial\nedge s0 -> s0\nedge s1 -> s1\n",
    )
    .unwrap();
    let mut failures = Vec::new();
    if modelcheck(&leaky, &s).unwrap() {
        failures.push("leaking structure holds".into());
    }
    if !modelcheck(&secure, &s).unwrap() {
        failures.push("secure structure fails".into());
    }
    report("noninterference_demo", start, "leaky fails, secure holds".into(), failures);
}

/// `t` with counter `i` exactly on positions `set`; loop free of counters.
fn counter_trace(q: &str, sets: [&[usize]; 2]) -> LassoTrace {
    let len = sets.iter().flat_map(|s| s.iter()).max().map_or(1, |m| m + 1);
    let stem = (0..len)
        .map(|j| {
            let mut v = Valuation::new();
            if j == 0 {
                v.insert(Prop::new(q));
            }
            for (k, s) in sets.iter().enumerate() {
                if s.contains(&j) {
                    v.insert(counter_prop(k as u8 + 1));
                }
            }
            v
        })
        .collect();
    LassoTrace::raw(stem, vec![Valuation::new()]).canonical()
}

fn counter_set(t: &LassoTrace, i: u8) -> BTreeSet<usize> {
    let c = counter_prop(i);
    (0..t.stem().len() + t.lp().len())
        .filter(|&j| t.value_at(j).contains(&c))
        .collect()
}

#[test]
fn minsky_encoder() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let zero = parse_minsky("init q0\ntrans q0 1 zero q0\n").unwrap();
    let dec = parse_minsky("init q0\ntrans q0 1 dec q0\n").unwrap();
    let single = model(minsky_run_model(&zero, 0));
    if single.len() != 1 || !eval_sentence(&encode_minsky(&zero).unwrap(), &single).unwrap() {
        failures.push("zero-loop encoding fails on its proof model".into());
    }
    if eval_sentence(&encode_minsky(&dec).unwrap(), &single).unwrap() {
        failures.push("dec-on-zero encoding holds on the single trace".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut machines = vec![zero, dec];
    machines.push(parse_minsky("init q0\ntrans q0 1 inc q1\ntrans q1 1 dec q0\n").unwrap());
    for _ in 0..10 {
        let mut text = "init q0\n".to_string();
        for _ in 0..rng.gen_range(1..=4) {
            let op = ["inc", "dec", "zero"].choose(&mut rng).unwrap();
            text.push_str(&format!(
                "trans q{} {} {op} q{}\n",
                rng.gen_range(0..3),
                rng.gen_range(1..=2),
                rng.gen_range(0..3)
            ));
        }
        machines.push(parse_minsky(&text).unwrap());
    }
    for m in &machines {
        if !in_fragment(&encode_minsky(m).unwrap(), Fragment::FG1) {
            failures.push("encoding outside FG1".into());
        }
    }
    for _ in 0..50 {
        // nested counter sets: prefixes of a random permutation
        let mut perms: Vec<Vec<usize>> = (0..2)
            .map(|_| {
                let mut p: Vec<usize> = (0..6).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        if rng.gen_bool(0.5) {
            perms = vec![(0..6).collect(), (0..6).collect()];
        }
        let ts: Vec<LassoTrace> = (0..rng.gen_range(1..=6))
            .map(|_| {
                let q = ["q0", "q1"].choose(&mut rng).unwrap();
                let a = &perms[0][..rng.gen_range(0..=4)];
                let b = &perms[1][..rng.gen_range(0..=4)];
                counter_trace(q, [a, b])
            })
            .collect();
        let m = model(ts);
        for t in m.traces() {
            for i in 1..=2u8 {
                let mine = counter_set(t, i);
                let below: BTreeSet<BTreeSet<usize>> = m
                    .traces()
                    .map(|x| counter_set(x, i))
                    .filter(|s| s.is_subset(&mine) && *s != mine)
                    .collect();
                match minsky_rank(&m, t, i) {
                    Ok(r) if r == below.len() => {}
                    other => failures.push(format!("rank {other:?} != {} for counter {i}", below.len())),
                }
            }
        }
    }
    report(
        "minsky_encoder",
        start,
        format!("{} machines in FG1, 50 rank models", machines.len()),
        failures,
    );
}

fn random_expr(rng: &mut ChaCha8Rng, size: usize) -> StarFreeExpr {
    use StarFreeExpr::*;
    if size < 2 || rng.gen_bool(0.3) {
        return [A, B, Epsilon, Empty][rng.gen_range(0..4)].clone();
    }
    if size < 3 || rng.gen_bool(0.3) {
        return StarFreeExpr::complement(random_expr(rng, size - 1));
    }
    let l = rng.gen_range(1..size - 1);
    let (a, b) = (random_expr(rng, l), random_expr(rng, size - 1 - l));
    if rng.gen_bool(0.5) {
        StarFreeExpr::sum(a, b)
    } else {
        StarFreeExpr::concat(a, b)
    }
}

fn member(e: &StarFreeExpr, w: &str) -> bool {
    use StarFreeExpr::*;
    match e {
        A => w == "a",
        B => w == "b",
        Epsilon => w.is_empty(),
        Empty => false,
        Sum(x, y) => member(x, w) || member(y, w),
        Concat(x, y) => (0..=w.len()).any(|i| member(x, &w[..i]) && member(y, &w[i..])),
        Complement(x) => !member(x, w),
    }
}

#[test]
fn starfree_encoder() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sample = starfree_sample(3);
    let ws: Vec<String> = words(&["a", "b"], 3).into_iter().map(|w| w.concat()).collect();
    let mut failures = Vec::new();
    let mut pairs = 0;
    for _ in 0..20 {
        let size = rng.gen_range(1..=5);
        let e = random_expr(&mut rng, size);
        if temporal_depth(&encode_starfree(&e).unwrap().matrix) != 1 {
            failures.push(format!("temporal depth of {e:?}"));
        }
        let v = Var::new("p");
        let mut used: BTreeSet<Var> = [v.clone()].into();
        let f = psi_e(&e, &v, &mut used);
        for w in &ws {
            pairs += 1;
            let got = eval_formula(&f, &sample, &[(v.clone(), word_trace(0, w))]).unwrap();
            if got != member(&e, w) {
                failures.push(format!("{e:?} on {w:?}: formula {got}"));
            }
        }
    }
    // sample of the structure versus the displayed language
    let k = word_structure();
    let sampled: BTreeSet<LassoTrace> = kripke_lassos(&k, 2, 2).traces().cloned().collect();
    let letters = ["l", "a", "b", "r", "hash"];
    let code = |v: &Valuation| -> char {
        match v.iter().next().map(|p| p.name()) {
            Some("l") => 'l',
            Some("a") => 'a',
            Some("b") => 'b',
            Some("r") => 'r',
            _ => '#',
        }
    };
    let stem_ok = |re: &str, s: &str| Regex::new(re).unwrap().is_match(s);
    let mut expected = BTreeSet::new();
    for w in words(&letters, 4) {
        for split in 0..w.len() {
            if split > 2 || w.len() - split > 2 {
                continue;
            }
            let vals: Vec<Valuation> = w.iter().map(|x| valuation(&[x])).collect();
            let t = LassoTrace::raw(vals[..split].to_vec(), vals[split..].to_vec());
            let stem: String = t.stem().iter().map(code).collect();
            let lp: String = t.lp().iter().map(code).collect();
            let inside = if lp.chars().all(|c| c == 'l') {
                stem_ok("^l*$", &stem)
            } else if lp.chars().all(|c| c == 'a' || c == 'b') {
                stem_ok("^l*[ab]*$", &stem)
            } else if lp.chars().all(|c| c == 'r') {
                stem_ok("^l*[ab]*r*$", &stem) || stem_ok("^l*#r*$", &stem)
            } else {
                false
            };
            if inside {
                expected.insert(t.canonical());
            }
        }
    }
    if sampled != expected {
        failures.push(format!(
            "structure sample differs: {} sampled, {} expected",
            sampled.len(),
            expected.len()
        ));
    }
    report(
        "starfree_encoder",
        start,
        format!("{pairs} expression/word pairs, {} lassos in the structure sample", sampled.len()),
        failures,
    );
}

#[test]
fn small_model_completeness() {
    let start = Instant::now();
    let mut g = Gen::new(10);
    let ops = Ops {
        next: true,
        until: true,
    };
    let b = Budget::default();
    let u = lassos_up_to(&props_of(&["a"]), 3);
    let mut cases = Vec::new();
    while cases.len() < 100 {
        let e = g.rng.gen_range(0..=2);
        let a = g.rng.gen_range(0..=2);
        if e + a == 0 {
            continue;
        }
        let kinds: Vec<Quantifier> = (0..e)
            .map(|_| Quantifier::Exists)
            .chain((0..a).map(|_| Quantifier::Forall))
            .collect();
        let size = g.rng.gen_range(2..=9);
        let f = g.ltl(&VARS[..e + a], &["a"], size, 2, ops);
        cases.push(g.sentence(&kinds, f));
    }
    let results: Vec<(Option<String>, bool)> = cases
        .iter()
        .map(|s| {
            let k = s.count(Quantifier::Exists).max(1);
            let oracle = brute_force(s, &u, k).is_some();
            let v = decide_complete(s, &b).unwrap();
            let err = match (&v.outcome, oracle) {
                (Outcome::Sat(_), _) => None,
                (Outcome::Unsat, true) => Some(format!("oracle found a model, decider UNSAT: {}", print_sentence(s))),
                (Outcome::Unsat, false) => None,
                (o, _) => Some(format!("unexpected outcome {o:?}: {}", print_sentence(s))),
            };
            (err, v.is_sat())
        })
        .collect();
    let failures: Vec<String> = results.iter().filter_map(|r| r.0.clone()).collect();
    let sat = results.iter().filter(|r| r.1).count();
    report(
        "small_model_completeness",
        start,
        format!("100 sentences, {sat} SAT, no contradictions"),
        failures,
    );
}

#[test]
fn bounded_monotonicity_and_consistency() {
    let start = Instant::now();
    let mut g = Gen::new(11);
    let ops = Ops {
        next: true,
        until: false,
    };
    let b = Budget::default();
    let mut failures = Vec::new();
    for i in 0..40 {
        let kinds = if i % 2 == 0 {
            vec![Quantifier::Forall, Quantifier::Exists]
        } else {
            vec![Quantifier::Exists, Quantifier::Forall]
        };
        let f = g.ltl(&VARS[..2], &["a"], 6, 2, ops);
        let s = g.sentence(&kinds, f);
        for k in 1..=2 {
            let lo = sat_bounded_periodic(&s, k, &b).unwrap();
            let hi = sat_bounded_periodic(&s, k + 1, &b).unwrap();
            if lo.is_sat() && !hi.is_sat() {
                failures.push(format!("periodic SAT at {k} but not {}: {}", k + 1, print_sentence(&s)));
            }
            let lo = sat_bounded_traces(&s, k, &b).unwrap();
            let hi = sat_bounded_traces(&s, k + 1, &b).unwrap();
            if lo.is_sat() && !hi.is_sat() {
                failures.push(format!("traces SAT at {k} but not {}: {}", k + 1, print_sentence(&s)));
            }
        }
        if classify_prefix(&s).is_exists_forall() {
            let c = decide_complete(&s, &b).unwrap();
            let p = sat_bounded_periodic(&s, 3, &b).unwrap();
            if p.is_sat() && !c.is_sat() {
                failures.push(format!("periodic SAT, complete UNSAT: {}", print_sentence(&s)));
            }
        }
    }
    report("bounded_monotonicity_and_consistency", start, "40 sentences".into(), failures);
}
