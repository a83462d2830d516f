//! `∃^n ∀ ∃^n'` sentences of temporal depth one.
//!
//! A tuple of traces is abstracted to the set `V` of valuation tuples it
//! visits, together with a window holding its first `d+1` tuples when the
//! matrix reads positions directly (`X^k β` or a bare `β`). A candidate set
//! `S` of such members must agree on the leading components (requirement 1),
//! be closed under handing any component over to the universal
//! (requirement 2), and satisfy the matrix member-wise (requirement 3). The
//! largest such `S` for a fixed leading projection is a greatest fixpoint.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::{search_props, Budget, Certificate, Outcome, Stats, Verdict};
use crate::error::{Error, Result};
use crate::formula::{
    classify_prefix, fresh_var, in_fragment, is_propositional, strip_next, Formula, Fragment, Prop,
    Quantifier, Sentence, Var,
};
use crate::semantics::{eval_qf, LassoTrace, TraceAssignment, Valuation};
use crate::syntax::print_valuation;

type Tuple = u64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Member {
    w: Vec<Tuple>,
    v: u64,
}

/// Key of a projection: window and visited set.
type Key = (Vec<Tuple>, u64);

#[derive(Clone, Debug)]
enum Node {
    Const(bool),
    Not(Box<Node>),
    Bin(fn(bool, bool) -> bool, Box<Node>, Box<Node>),
    Eventually(usize),
    Always(usize),
    At(usize, usize),
}

/// Encoded problem: components are `τ1…τn, π, τn+1…`.
#[derive(Clone, Debug)]
struct Problem {
    props: Vec<Prop>,
    vars: Vec<Var>,
    n: usize,
    window: usize,
    tree: Node,
    /// Bitmask over tuple ids satisfying each propositional leaf.
    leaves: Vec<u64>,
}

impl Problem {
    fn arity(&self) -> usize {
        self.vars.len()
    }

    fn width(&self) -> usize {
        self.props.len()
    }

    fn tuples(&self) -> usize {
        1 << (self.width() * self.arity())
    }

    fn comp(&self, u: Tuple, c: usize) -> u64 {
        let a = self.width();
        (u >> (c * a)) & ((1u64 << a) - 1)
    }

    fn proj(&self, u: Tuple, comps: &[usize]) -> Tuple {
        let a = self.width();
        comps
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &c)| acc | self.comp(u, c) << (k * a))
    }

    fn proj_key(&self, m: &Member, comps: &[usize]) -> Key {
        let w = m.w.iter().map(|&u| self.proj(u, comps)).collect();
        let mut v = 0u64;
        for u in ids(m.v) {
            v |= 1 << self.proj(u, comps);
        }
        (w, v)
    }

    fn valuation(&self, bits: u64) -> Valuation {
        self.props
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, p)| p.clone())
            .collect()
    }

    fn encode(&self, ts: &[&LassoTrace], j: usize) -> Tuple {
        let a = self.width();
        let mut u = 0;
        for (c, t) in ts.iter().enumerate() {
            let val = t.value_at(j);
            for (i, p) in self.props.iter().enumerate() {
                if val.contains(p) {
                    u |= 1 << (c * a + i);
                }
            }
        }
        u
    }

    fn eval(&self, node: &Node, m: &Member) -> bool {
        match node {
            Node::Const(b) => *b,
            Node::Not(a) => !self.eval(a, m),
            Node::Bin(op, a, b) => op(self.eval(a, m), self.eval(b, m)),
            Node::Eventually(l) => m.v & self.leaves[*l] != 0,
            Node::Always(l) => m.v & !self.leaves[*l] == 0,
            Node::At(k, l) => self.leaves[*l] >> m.w[*k] & 1 == 1,
        }
    }

    fn prefix_comps(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    fn with(&self, i: usize) -> Vec<usize> {
        let mut c = self.prefix_comps();
        c.push(i);
        c
    }
}

fn ids(mask: u64) -> impl Iterator<Item = Tuple> {
    (0..64u64).filter(move |i| mask >> i & 1 == 1)
}

fn eval_prop(f: &Formula, u: Tuple, p: &Problem) -> bool {
    use Formula as Fm;
    match f {
        Fm::True => true,
        Fm::False => false,
        Fm::Atom(a, v) => {
            let c = p.vars.iter().position(|w| w == v).expect("bound");
            let i = p.props.iter().position(|q| q == a).expect("known");
            p.comp(u, c) >> i & 1 == 1
        }
        Fm::Not(a) => !eval_prop(a, u, p),
        Fm::And(a, b) => eval_prop(a, u, p) && eval_prop(b, u, p),
        Fm::Or(a, b) => eval_prop(a, u, p) || eval_prop(b, u, p),
        Fm::Implies(a, b) => !eval_prop(a, u, p) || eval_prop(b, u, p),
        Fm::Iff(a, b) => eval_prop(a, u, p) == eval_prop(b, u, p),
        Fm::Xor(a, b) => eval_prop(a, u, p) != eval_prop(b, u, p),
        _ => unreachable!("propositional"),
    }
}

fn compile(f: &Formula, leaves: &mut Vec<Formula>, depth: &mut Option<usize>) -> Node {
    use Formula as Fm;
    let mut leaf = |g: &Formula| {
        leaves.push(g.clone());
        leaves.len() - 1
    };
    match f {
        Fm::True => Node::Const(true),
        Fm::False => Node::Const(false),
        Fm::Eventually(b) => Node::Eventually(leaf(b)),
        Fm::Always(b) => Node::Always(leaf(b)),
        Fm::Next(_) => {
            let (k, b) = strip_next(f);
            *depth = Some(depth.unwrap_or(0).max(k));
            Node::At(k, leaf(b))
        }
        _ if is_propositional(f) => {
            *depth = Some(depth.unwrap_or(0));
            Node::At(0, leaf(f))
        }
        Fm::Not(a) => Node::Not(Box::new(compile(a, leaves, depth))),
        Fm::And(a, b) | Fm::Or(a, b) | Fm::Implies(a, b) | Fm::Iff(a, b) | Fm::Xor(a, b) => {
            let op: fn(bool, bool) -> bool = match f {
                Fm::And(..) => |x, y| x && y,
                Fm::Or(..) => |x, y| x || y,
                Fm::Implies(..) => |x, y| !x || y,
                Fm::Iff(..) => |x, y| x == y,
                _ => |x, y| x != y,
            };
            let l = compile(a, leaves, depth);
            let r = compile(b, leaves, depth);
            Node::Bin(op, Box::new(l), Box::new(r))
        }
        _ => unreachable!("checked fragment"),
    }
}

/// Witness of satisfiability: the surviving members for one leading
/// projection, from which witness chains of any depth are generated.
#[derive(Clone, Debug)]
pub struct FragmentCertificate {
    /// The decided sentence, with a dummy universal added to `∃*` inputs.
    pub sentence: Sentence,
    problem: Problem,
    members: Vec<Member>,
}

impl FragmentCertificate {
    pub fn num_members(&self) -> usize {
        self.members.len()
    }

    pub fn window(&self) -> usize {
        self.problem.window
    }

    /// Members as text: one line per member with its window and tuples.
    pub fn render(&self) -> String {
        let p = &self.problem;
        let tuple = |u: Tuple| -> String {
            let parts: Vec<String> = (0..p.arity())
                .map(|c| print_valuation(&p.valuation(p.comp(u, c))))
                .collect();
            format!("({})", parts.join(", "))
        };
        let mut out = String::new();
        let vars: Vec<&str> = p.vars.iter().map(|v| v.name()).collect();
        let _ = writeln!(out, "# components: {}", vars.join(", "));
        for m in &self.members {
            let w: Vec<String> = m.w.iter().map(|&u| tuple(u)).collect();
            let v: Vec<String> = ids(m.v).map(tuple).collect();
            let _ = writeln!(out, "member window [{}] visits {{{}}}", w.join(" "), v.join(" "));
        }
        out
    }
}

fn prepare(s: &Sentence) -> Result<Problem> {
    let pat = classify_prefix(s);
    if !in_fragment(s, Fragment::FGX1) || !pat.is_exists_forall_exists() {
        return Err(Error::Shape(
            "sat_fragment needs an ∃*∀∃* sentence of temporal depth one over F, G and X".into(),
        ));
    }
    let mut vars = s.vars();
    let kinds = s.kinds();
    let n = match kinds.iter().position(|q| *q == Quantifier::Forall) {
        Some(i) => i,
        None => {
            let mut used: BTreeSet<Var> = vars.iter().cloned().collect();
            vars.push(fresh_var("d", &mut used));
            vars.len() - 1
        }
    };
    let props = search_props(s);
    let mut leaves = Vec::new();
    let mut depth = None;
    let tree = compile(&s.matrix, &mut leaves, &mut depth);
    let mut p = Problem {
        props,
        vars,
        n,
        window: depth.map_or(0, |d| d + 1),
        tree,
        leaves: Vec::new(),
    };
    if p.width() * p.arity() > 6 {
        return Ok(p);
    }
    p.leaves = leaves
        .iter()
        .map(|f| (0..p.tuples() as u64).filter(|&u| eval_prop(f, u, &p)).fold(0, |acc, u| acc | 1 << u))
        .collect();
    Ok(p)
}

fn sentence_of(s: &Sentence, p: &Problem) -> Sentence {
    if s.count(Quantifier::Forall) == 1 {
        return s.clone();
    }
    let mut prefix = s.prefix.clone();
    prefix.push((Quantifier::Forall, p.vars[p.n].clone()));
    Sentence {
        prefix,
        matrix: s.matrix.clone(),
    }
}

/// Estimated member count: `Σ_j C(|U|, j) j^L`.
fn member_estimate(tuples: usize, window: usize) -> u128 {
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for j in 1..=tuples {
        c = c * (tuples - j + 1) as u128 / j as u128;
        total = total.saturating_add(c.saturating_mul((j as u128).saturating_pow(window as u32)));
    }
    total
}

/// Decides `∃*∀∃*` sentences in the depth-one fragment with `F`, `G` and
/// iterated `X` over propositional bodies.
pub fn sat_fragment(s: &Sentence, budget: &Budget) -> Result<Verdict> {
    let start = Instant::now();
    let p = prepare(s)?;
    let done = |outcome, candidates| Verdict {
        outcome,
        stats: Stats {
            candidates,
            elapsed: start.elapsed(),
        },
    };
    if p.width() * p.arity() > 6 {
        return Ok(done(
            Outcome::Unknown(format!(
                "tuple space 2^{} exceeds 2^6",
                p.width() * p.arity()
            )),
            0,
        ));
    }
    let est = member_estimate(p.tuples(), p.window);
    if est > budget.fragment_members as u128 {
        return Ok(done(
            Outcome::Unknown(format!(
                "about {est} abstract members exceed the budget of {}",
                budget.fragment_members
            )),
            0,
        ));
    }
    let members = enumerate(&p);
    let explored = members.len() as u64;
    let mut groups: BTreeMap<Key, Vec<Member>> = BTreeMap::new();
    let pc = p.prefix_comps();
    for m in members {
        groups.entry(p.proj_key(&m, &pc)).or_default().push(m);
    }
    let groups: Vec<Vec<Member>> = groups.into_values().collect();
    let found = groups.par_iter().find_map_first(|g| {
        let s = gfp(&p, g);
        (!s.is_empty()).then_some(s)
    });
    let Some(members) = found else {
        return Ok(done(Outcome::Unsat, explored));
    };
    let cert = FragmentCertificate {
        sentence: sentence_of(s, &p),
        problem: p,
        members,
    };
    fragment_witness_chain(&cert, budget.chain_depth)?;
    Ok(done(Outcome::Sat(Certificate::Fragment(Box::new(cert))), explored))
}

/// Members satisfying the matrix, windows drawn from the visited set.
fn enumerate(p: &Problem) -> Vec<Member> {
    let total = p.tuples();
    let full: u64 = if total == 64 { u64::MAX } else { (1u64 << total) - 1 };
    let mut out = Vec::new();
    for v in 1..=full {
        let elems: Vec<Tuple> = ids(v).collect();
        let mut idx = vec![0usize; p.window];
        loop {
            let m = Member {
                w: idx.iter().map(|&i| elems[i]).collect(),
                v,
            };
            if p.eval(&p.tree, &m) {
                out.push(m);
            }
            if !crate::transform::bump(&mut idx, elems.len()) {
                break;
            }
        }
        if v == full {
            break;
        }
    }
    out
}

/// Greatest subset of `g` closed under requirement 2.
fn gfp(p: &Problem, g: &[Member]) -> Vec<Member> {
    let own: Vec<Key> = g.iter().map(|m| p.proj_key(m, &p.with(p.n))).collect();
    let needs: Vec<Vec<Key>> = g
        .iter()
        .map(|m| (0..p.arity()).map(|i| p.proj_key(m, &p.with(i))).collect())
        .collect();
    let mut count: HashMap<&Key, usize> = HashMap::new();
    for k in &own {
        *count.entry(k).or_default() += 1;
    }
    let mut dependents: HashMap<&Key, Vec<usize>> = HashMap::new();
    for (i, ns) in needs.iter().enumerate() {
        for k in ns {
            dependents.entry(k).or_default().push(i);
        }
    }
    let mut alive = vec![true; g.len()];
    let mut work: Vec<usize> = (0..g.len()).collect();
    while let Some(i) = work.pop() {
        if !alive[i] {
            continue;
        }
        if needs[i].iter().all(|k| count.get(k).copied().unwrap_or(0) > 0) {
            continue;
        }
        alive[i] = false;
        let c = count.get_mut(&own[i]).expect("counted");
        *c -= 1;
        if *c == 0 {
            if let Some(ds) = dependents.get(&own[i]) {
                work.extend(ds.iter().copied().filter(|&d| alive[d]));
            }
        }
    }
    g.iter()
        .zip(alive)
        .filter(|(_, a)| *a)
        .map(|(m, _)| m.clone())
        .collect()
}

/// One verified step: the universal trace and its existential witnesses.
#[derive(Clone, Debug)]
pub struct ChainStep {
    pub level: usize,
    pub pi: LassoTrace,
    pub witnesses: Vec<LassoTrace>,
}

/// Base traces for the leading existentials and the traces produced level by
/// level; every step has passed `eval_qf` and the loop-coverage check.
#[derive(Clone, Debug)]
pub struct WitnessChain {
    pub base: Vec<LassoTrace>,
    pub levels: Vec<Vec<LassoTrace>>,
    pub steps: Vec<ChainStep>,
}

fn lasso_of(p: &Problem, stem: &[Tuple], lp: &[Tuple], c: usize) -> LassoTrace {
    let val = |u: &Tuple| p.valuation(p.comp(*u, c));
    LassoTrace::raw(stem.iter().map(val).collect(), lp.iter().map(val).collect()).canonical()
}

/// `d` rounds of witness construction starting from the base traces.
pub fn fragment_witness_chain(c: &FragmentCertificate, depth: usize) -> Result<WitnessChain> {
    let p = &c.problem;
    let first = &c.members[0];
    let pc = p.prefix_comps();
    let (w0, v0) = p.proj_key(first, &pc);
    let mut base = Vec::new();
    let mut start: Vec<LassoTrace> = Vec::new();
    if p.n > 0 {
        let lp: Vec<Tuple> = ids(v0).collect();
        for i in 0..p.n {
            base.push(lasso_of(p, &w0, &lp, i));
        }
        for t in &base {
            if !start.contains(t) {
                start.push(t.clone());
            }
        }
    } else {
        let (w, v) = p.proj_key(first, &[p.n]);
        let lp: Vec<Tuple> = ids(v).collect();
        start.push(lasso_of(p, &w, &lp, 0));
    }
    let mut seen: BTreeSet<LassoTrace> = start.iter().cloned().collect();
    let mut levels = vec![start];
    let mut steps = Vec::new();
    for level in 0..depth {
        let mut next = Vec::new();
        for t in &levels[level] {
            let ws = step(c, &base, t)?;
            for w in &ws {
                if seen.insert(w.clone()) {
                    next.push(w.clone());
                }
            }
            steps.push(ChainStep {
                level,
                pi: t.clone(),
                witnesses: ws,
            });
        }
        levels.push(next);
    }
    Ok(WitnessChain {
        base,
        levels,
        steps,
    })
}

fn internal(msg: &str) -> Error {
    Error::Invalid(format!("internal: witness chain {msg}"))
}

fn step(c: &FragmentCertificate, base: &[LassoTrace], t: &LassoTrace) -> Result<Vec<LassoTrace>> {
    let p = &c.problem;
    let mut ts: Vec<&LassoTrace> = base.iter().collect();
    ts.push(t);
    let stem = ts.iter().map(|x| x.stem().len()).max().unwrap_or(0).max(p.window);
    let period = ts
        .iter()
        .fold(1, |acc, x| crate::transform::lcm(acc, x.lp().len()));
    let joint: Vec<Tuple> = (0..stem + period).map(|j| p.encode(&ts, j)).collect();
    let loop_set: u64 = joint[stem..].iter().fold(0, |acc, &u| acc | 1 << u);
    let all_set: u64 = joint.iter().fold(0, |acc, &u| acc | 1 << u);
    if loop_set != all_set {
        return Err(internal("lost a recurring tuple"));
    }
    let key: Key = (joint[..p.window].to_vec(), all_set);
    let own = p.with(p.n);
    let m = c
        .members
        .iter()
        .find(|m| p.proj_key(m, &own) == key)
        .ok_or_else(|| internal("found no member for a trace"))?;
    let by_prefix = |k: Tuple| -> Vec<Tuple> { ids(m.v).filter(|&u| p.proj(u, &own) == k).collect() };
    let mut full: Vec<Tuple> = Vec::new();
    for (j, &k) in joint[..stem].iter().enumerate() {
        if j < p.window {
            full.push(m.w[j]);
        } else {
            full.push(*by_prefix(k).first().ok_or_else(|| internal("has no tuple for a prefix"))?);
        }
    }
    let mut occurrences: HashMap<Tuple, usize> = HashMap::new();
    for &k in &joint[stem..] {
        *occurrences.entry(k).or_default() += 1;
    }
    let reps = occurrences
        .iter()
        .map(|(&k, &n)| by_prefix(k).len().div_ceil(n))
        .max()
        .unwrap_or(1)
        .max(1);
    let mut used: HashMap<Tuple, usize> = HashMap::new();
    let mut lp = Vec::with_capacity(period * reps);
    for r in 0..reps * period {
        let k = joint[stem + r % period];
        let choices = by_prefix(k);
        let i = used.entry(k).or_default();
        lp.push(choices[*i % choices.len()]);
        *i += 1;
    }
    let covered = lp.iter().fold(0u64, |acc, &u| acc | 1 << u);
    if covered != m.v {
        return Err(internal("does not visit every tuple of its member"));
    }
    let ws: Vec<LassoTrace> = (p.n + 1..p.arity()).map(|i| lasso_of(p, &full, &lp, i)).collect();
    let mut pi = TraceAssignment::new();
    for (i, b) in base.iter().enumerate() {
        pi.insert(p.vars[i].clone(), b);
    }
    pi.insert(p.vars[p.n].clone(), t);
    for (i, w) in ws.iter().enumerate() {
        pi.insert(p.vars[p.n + 1 + i].clone(), w);
    }
    if !eval_qf(&c.sentence.matrix, &pi)? {
        return Err(internal("step violates the matrix"));
    }
    Ok(ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sentence;

    fn decide(text: &str) -> Verdict {
        sat_fragment(&parse_sentence(text).unwrap(), &Budget::default()).unwrap()
    }

    #[test]
    fn examples() {
        let v = decide("forall p. exists q. G (a[p] -> a[q]) & F (!a[p] & a[q])");
        let Some(Certificate::Fragment(c)) = v.certificate() else {
            panic!("{v:?}")
        };
        let chain = fragment_witness_chain(c, 3).unwrap();
        assert_eq!(chain.steps.len(), 3);
        for s in &chain.steps {
            let a = Prop::new("a");
            let count = |t: &LassoTrace| (0..64).filter(|&j| t.value_at(j).contains(&a)).count();
            assert!(count(&s.witnesses[0]) >= count(&s.pi));
        }
        assert!(decide("forall p. F a[p] & F !a[p]").is_sat());
        assert!(decide("forall p. exists q. G (a[p] xor a[q]) & G (a[p] <-> a[q])").is_unsat());
    }

    #[test]
    fn windows_and_leading() {
        assert!(decide("exists t. forall p. X X a[p] & !a[t]").is_sat());
        assert!(decide("exists t. forall p. X a[p] & X !a[t]").is_unsat());
        assert!(decide("exists t. forall p. G (a[t] <-> !a[p])").is_unsat());
        assert!(decide("exists t. forall p. F (a[t] & a[p]) & F (!a[t] & !a[p])").is_sat());
        assert!(decide("exists t. exists u. F (a[t] & !a[u])").is_sat());
        assert!(decide("exists t. a[t] & !a[t]").is_unsat());
    }

    fn valid(p: &Problem, s: &[&Member]) -> bool {
        let owns: BTreeSet<Key> = s.iter().map(|m| p.proj_key(m, &p.with(p.n))).collect();
        s.iter()
            .all(|m| (0..p.arity()).all(|i| owns.contains(&p.proj_key(m, &p.with(i)))))
    }

    #[test]
    fn gfp_is_union_of_valid_sets() {
        for text in [
            "forall p. exists q. G (a[p] -> a[q]) & F (!a[p] & a[q])",
            "forall p. exists q. F (a[p] xor a[q]) & G (a[p] | a[q])",
            "forall p. exists q. G !a[q] | F (a[p] & !a[q])",
            "forall p. exists q. F a[q] & G (a[p] -> !a[q])",
        ] {
            let p = prepare(&parse_sentence(text).unwrap()).unwrap();
            let ms = enumerate(&p);
            assert!(ms.len() <= 16, "{text}");
            let mut union = BTreeSet::new();
            for bits in 1u32..1 << ms.len() {
                let s: Vec<&Member> = (0..ms.len()).filter(|i| bits >> i & 1 == 1).map(|i| &ms[i]).collect();
                if valid(&p, &s) {
                    union.extend(s.into_iter().cloned());
                }
            }
            let g: BTreeSet<Member> = gfp(&p, &ms).into_iter().collect();
            assert_eq!(g, union, "{text}");
        }
    }
}
