use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::{
    always, and, and_all, atom, eventually, exists, forall, iff, implies, not, or, or_all, prenex,
    Formula, Prop, Sentence, Var,
};
use crate::semantics::{eval_qf, FiniteTraceModel, LassoTrace, TraceAssignment, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Inc,
    Dec,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub from: String,
    pub counter: u8,
    pub op: Op,
    pub to: String,
}

/// Two-counter machine; states are the rule endpoints plus the initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinskyMachine {
    states: Vec<String>,
    initial: String,
    rules: Vec<Rule>,
}

impl MinskyMachine {
    pub fn new(initial: String, rules: Vec<Rule>) -> Result<MinskyMachine> {
        let mut states = BTreeSet::new();
        states.insert(initial.clone());
        for r in &rules {
            if r.counter != 1 && r.counter != 2 {
                return Err(Error::Invalid(format!(
                    "counter {} is not 1 or 2",
                    r.counter
                )));
            }
            states.insert(r.from.clone());
            states.insert(r.to.clone());
        }
        for s in &states {
            if !crate::syntax::valid_prop(s) || s == "1" || s == "2" {
                return Err(Error::Invalid(format!(
                    "`{s}` cannot be used as a state name"
                )));
            }
        }
        Ok(MinskyMachine {
            states: states.into_iter().collect(),
            initial,
            rules,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Successor configurations of `(q, n1, n2)`.
    pub fn step(&self, q: &str, n: [u64; 2]) -> Vec<(String, [u64; 2])> {
        let mut out = Vec::new();
        for r in self.rules.iter().filter(|r| r.from == q) {
            let i = (r.counter - 1) as usize;
            let mut m = n;
            match r.op {
                Op::Inc => m[i] += 1,
                Op::Dec if n[i] > 0 => m[i] -= 1,
                Op::Zero if n[i] == 0 => {}
                _ => continue,
            }
            out.push((r.to.clone(), m));
        }
        out
    }

    /// The first `steps + 1` configurations of the run that always takes the first applicable rule.
    pub fn run(&self, steps: usize) -> Vec<(String, [u64; 2])> {
        let mut out = vec![(self.initial.clone(), [0, 0])];
        for _ in 0..steps {
            let (q, n) = out.last().unwrap().clone();
            match self.step(&q, n).into_iter().next() {
                Some(c) => out.push(c),
                None => break,
            }
        }
        out
    }
}

pub fn counter_prop(i: u8) -> Prop {
    Prop::new(if i == 1 { "1" } else { "2" })
}

fn c(i: u8, v: &str) -> Formula {
    atom(counter_prop(i).name(), v)
}

fn leq(i: u8, a: &str, b: &str) -> Formula {
    always(implies(c(i, a), c(i, b)))
}

fn lt(i: u8, a: &str, b: &str) -> Formula {
    and(leq(i, a, b), eventually(and(not(c(i, a)), c(i, b))))
}

fn op_formula(i: u8, op: Op, p: &str, q: &str, r: &Var) -> Formula {
    let rn = r.name();
    match op {
        Op::Inc => forall(r, and(lt(i, p, q), or(leq(i, rn, p), leq(i, q, rn)))),
        Op::Dec => forall(r, and(lt(i, q, p), or(leq(i, p, rn), leq(i, rn, q)))),
        Op::Zero => always(and(not(c(i, p)), not(c(i, q)))),
    }
}

/// Body of the successor requirement with `p` and `q` free: some rule leads from `p` to `q`.
pub fn minsky_step(m: &MinskyMachine, p: &str, q: &str) -> Formula {
    let r = Var::new("r");
    or_all(m.rules.iter().map(|rule| {
        let other = 3 - rule.counter;
        and_all([
            atom(&rule.from, p),
            atom(&rule.to, q),
            op_formula(rule.counter, rule.op, p, q, &r),
            always(iff(c(other, p), c(other, q))),
        ])
    }))
}

/// The conjunction of the total-order, uniqueness, initial and successor
/// requirements, prenexed.
pub fn encode_minsky(m: &MinskyMachine) -> Result<Sentence> {
    let v = |s: &str| Var::new(s);
    let total = |i: u8| {
        forall(
            &v("a"),
            forall(&v("b"), or(leq(i, "a", "b"), leq(i, "b", "a"))),
        )
    };
    let mut unique = Vec::new();
    for q in &m.states {
        for q2 in &m.states {
            if q != q2 {
                unique.push(implies(atom(q, "u"), not(atom(q2, "u"))));
            }
        }
    }
    let phi1 = forall(&v("u"), and_all(unique));
    let phi2 = exists(
        &v("z"),
        and(
            atom(&m.initial, "z"),
            always(and(not(c(1, "z")), not(c(2, "z")))),
        ),
    );
    let phi3 = forall(&v("p"), exists(&v("q"), minsky_step(m, "p", "q")));
    prenex(&and_all([total(1), total(2), phi1, phi2, phi3]))
}

/// The trace of configuration `(q, n1, n2)`: `{q}` at position 0 and counter
/// `i` on positions `0..n_i`.
pub fn config_trace(q: &str, n: [u64; 2]) -> LassoTrace {
    let len = n[0].max(n[1]).max(1) as usize;
    let stem: Vec<Valuation> = (0..len)
        .map(|j| {
            let mut v = Valuation::new();
            if j == 0 {
                v.insert(Prop::new(q));
            }
            for i in 1..=2u8 {
                if (j as u64) < n[(i - 1) as usize] {
                    v.insert(counter_prop(i));
                }
            }
            v
        })
        .collect();
    LassoTrace::raw(stem, vec![Valuation::new()]).canonical()
}

/// Configuration traces along the first-rule run for `steps` steps.
pub fn minsky_run_model(m: &MinskyMachine, steps: usize) -> Vec<LassoTrace> {
    m.run(steps)
        .iter()
        .map(|(q, n)| config_trace(q, *n))
        .collect()
}

fn counter_leq(i: u8, a: &LassoTrace, b: &LassoTrace) -> Result<bool> {
    let f = leq(i, "a", "b");
    let mut pi = TraceAssignment::new();
    pi.insert(Var::new("a"), a);
    pi.insert(Var::new("b"), b);
    eval_qf(&f, &pi)
}

/// Number of distinct `i`-sets strictly below that of `t` in `T`.
pub fn minsky_rank(model: &FiniteTraceModel, t: &LassoTrace, i: u8) -> Result<usize> {
    let ts = model.to_vec();
    let n = ts.len();
    let mut le = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            le[a][b] = counter_leq(i, &ts[a], &ts[b])?;
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !le[a][b] && !le[b][a] {
                return Err(Error::NotTotallyOrdered(i));
            }
        }
    }
    let below: Vec<usize> = (0..n)
        .filter(|&a| {
            counter_leq(i, &ts[a], t).unwrap_or(false) && !counter_leq(i, t, &ts[a]).unwrap_or(true)
        })
        .collect();
    // count equivalence classes of mutual inclusion
    let mut classes: Vec<usize> = Vec::new();
    for a in below {
        if !classes.iter().any(|&b| le[a][b] && le[b][a]) {
            classes.push(a);
        }
    }
    Ok(classes.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{in_fragment, Fragment};
    use crate::semantics::{eval_formula, eval_sentence};
    use crate::syntax::parse_minsky;

    #[test]
    fn zero_loop() {
        let m = parse_minsky("init q0\ntrans q0 1 zero q0\n").unwrap();
        let s = encode_minsky(&m).unwrap();
        assert!(in_fragment(&s, Fragment::FG1));
        let t = FiniteTraceModel::new(minsky_run_model(&m, 0)).unwrap();
        assert_eq!(t.len(), 1);
        assert!(eval_sentence(&s, &t).unwrap());
    }

    #[test]
    fn dec_on_zero() {
        let m = parse_minsky("init q0\ntrans q0 1 dec q0\n").unwrap();
        let s = encode_minsky(&m).unwrap();
        let t = FiniteTraceModel::new(minsky_run_model(&m, 0)).unwrap();
        assert!(!eval_sentence(&s, &t).unwrap());
    }

    #[test]
    fn inc_dec_steps() {
        let m = parse_minsky("init q0\ntrans q0 1 inc q1\ntrans q1 1 dec q0\n").unwrap();
        let run = minsky_run_model(&m, 3);
        assert_eq!(run.len(), 4);
        let t = FiniteTraceModel::new(run.clone()).unwrap();
        let step = minsky_step(&m, "p", "q");
        for w in run.windows(2) {
            let pi = [(Var::new("p"), w[0].clone()), (Var::new("q"), w[1].clone())];
            assert!(eval_formula(&step, &t, &pi).unwrap());
        }
        let q0 = run[0].clone();
        let q1 = run[1].clone();
        assert_eq!(minsky_rank(&t, &q0, 1).unwrap(), 0);
        assert_eq!(minsky_rank(&t, &q1, 1).unwrap(), 1);
        assert_eq!(minsky_rank(&t, &run[2], 1).unwrap(), 0);
    }
}
