use std::collections::{BTreeMap, HashMap};

use super::trace::{align, FiniteTraceModel, LassoTrace, DEFAULT_PERIOD_CAP};
use crate::error::{Error, Result};
use crate::formula::{miniscope, Formula, Prop, Quantifier, Sentence, Var};

/// Map from trace variables to traces.
pub type TraceAssignment<'a> = BTreeMap<Var, &'a LassoTrace>;

#[derive(Clone, Debug)]
enum Node {
    True,
    False,
    Atom(Prop, usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Xor(usize, usize),
    Next(usize),
    Eventually(usize),
    Always(usize),
    Until(usize, usize),
}

/// Quantifier-free formula compiled to a DAG of distinct subformulas.
#[derive(Clone, Debug)]
pub struct CompiledQf {
    nodes: Vec<Node>,
    index: HashMap<Formula, usize>,
    root: usize,
    slots: Vec<Var>,
    cap: u64,
}

/// Truth values of every subformula at every folded index `0..stem+period`.
pub struct Vectors {
    pub stem: usize,
    pub period: usize,
    values: Vec<bool>,
}

impl Vectors {
    fn horizon(&self) -> usize {
        self.stem + self.period
    }

    /// Value of node `n` at position `j` (any natural number).
    pub fn at(&self, n: usize, j: usize) -> bool {
        let h = self.horizon();
        let j = if j < h {
            j
        } else {
            self.stem + (j - self.stem) % self.period
        };
        self.values[n * h + j]
    }
}

impl CompiledQf {
    pub fn new(f: &Formula) -> Result<CompiledQf> {
        if f.has_quantifier() {
            return Err(Error::Shape(
                "quantifier in quantifier-free position".into(),
            ));
        }
        let slots: Vec<Var> = f.free_vars().into_iter().collect();
        let mut c = CompiledQf {
            nodes: Vec::new(),
            index: HashMap::new(),
            root: 0,
            slots,
            cap: DEFAULT_PERIOD_CAP,
        };
        c.root = c.add(f);
        Ok(c)
    }

    pub fn with_cap(mut self, cap: u64) -> CompiledQf {
        self.cap = cap;
        self
    }

    /// Free variables in slot order (sorted).
    pub fn slots(&self) -> &[Var] {
        &self.slots
    }

    /// Node index of a subformula, if present.
    pub fn node_of(&self, f: &Formula) -> Option<usize> {
        self.index.get(f).copied()
    }

    fn add(&mut self, f: &Formula) -> usize {
        if let Some(&i) = self.index.get(f) {
            return i;
        }
        use Formula as Fm;
        let node = match f {
            Fm::True => Node::True,
            Fm::False => Node::False,
            Fm::Atom(p, v) => {
                let slot = self.slots.iter().position(|s| s == v).expect("slot");
                Node::Atom(p.clone(), slot)
            }
            Fm::Not(a) => Node::Not(self.add(a)),
            Fm::And(a, b) => Node::And(self.add(a), self.add(b)),
            Fm::Or(a, b) => Node::Or(self.add(a), self.add(b)),
            Fm::Implies(a, b) => Node::Implies(self.add(a), self.add(b)),
            Fm::Iff(a, b) => Node::Iff(self.add(a), self.add(b)),
            Fm::Xor(a, b) => Node::Xor(self.add(a), self.add(b)),
            Fm::Next(a) => Node::Next(self.add(a)),
            Fm::Eventually(a) => Node::Eventually(self.add(a)),
            Fm::Always(a) => Node::Always(self.add(a)),
            Fm::Until(a, b) => Node::Until(self.add(a), self.add(b)),
            Fm::Exists(_, _) | Fm::Forall(_, _) => unreachable!(),
        };
        self.nodes.push(node);
        let i = self.nodes.len() - 1;
        self.index.insert(f.clone(), i);
        i
    }

    /// Evaluates at position 0; `traces[i]` is assigned to `slots()[i]`.
    pub fn eval(&self, traces: &[&LassoTrace]) -> Result<bool> {
        let v = self.vectors(traces)?;
        Ok(v.at(self.root, 0))
    }

    /// Evaluates with the horizon stretched to `stem + extra_periods * period`.
    pub fn eval_with_horizon(&self, traces: &[&LassoTrace], extra_periods: usize) -> Result<bool> {
        let (s, p) = align(traces, self.cap)?;
        Ok(self
            .compute(traces, s, p * extra_periods.max(1))
            .at(self.root, 0))
    }

    pub fn vectors(&self, traces: &[&LassoTrace]) -> Result<Vectors> {
        assert_eq!(traces.len(), self.slots.len(), "one trace per slot");
        let (s, p) = align(traces, self.cap)?;
        Ok(self.compute(traces, s, p))
    }

    pub fn root(&self) -> usize {
        self.root
    }

    fn compute(&self, traces: &[&LassoTrace], s: usize, p: usize) -> Vectors {
        let h = s + p;
        let mut vals = vec![false; self.nodes.len() * h];
        let succ = |j: usize| if j + 1 < h { j + 1 } else { s };
        for (n, node) in self.nodes.iter().enumerate() {
            let (done, rest) = vals.split_at_mut(n * h);
            let out = &mut rest[..h];
            let get = |m: usize, j: usize| done[m * h + j];
            match node {
                Node::True => out.fill(true),
                Node::False => {}
                Node::Atom(prop, slot) => {
                    let t = traces[*slot];
                    for (j, o) in out.iter_mut().enumerate() {
                        *o = t.value_at(j).contains(prop);
                    }
                }
                Node::Not(a) => (0..h).for_each(|j| out[j] = !get(*a, j)),
                Node::And(a, b) => (0..h).for_each(|j| out[j] = get(*a, j) && get(*b, j)),
                Node::Or(a, b) => (0..h).for_each(|j| out[j] = get(*a, j) || get(*b, j)),
                Node::Implies(a, b) => (0..h).for_each(|j| out[j] = !get(*a, j) || get(*b, j)),
                Node::Iff(a, b) => (0..h).for_each(|j| out[j] = get(*a, j) == get(*b, j)),
                Node::Xor(a, b) => (0..h).for_each(|j| out[j] = get(*a, j) != get(*b, j)),
                Node::Next(a) => (0..h).for_each(|j| out[j] = get(*a, succ(j))),
                Node::Until(_, _) | Node::Eventually(_) | Node::Always(_) => {
                    // least (U, F) or greatest (G) fixpoint: two passes over the loop, one over the stem
                    let greatest = matches!(node, Node::Always(_));
                    let step = |j: usize, nxt: bool| match node {
                        Node::Until(a, b) => get(*b, j) || (get(*a, j) && nxt),
                        Node::Eventually(b) => get(*b, j) || nxt,
                        Node::Always(b) => get(*b, j) && nxt,
                        _ => unreachable!(),
                    };
                    out[s..h].fill(greatest);
                    for _ in 0..2 {
                        for j in (s..h).rev() {
                            out[j] = step(j, out[succ(j)]);
                        }
                    }
                    for j in (0..s).rev() {
                        out[j] = step(j, out[j + 1]);
                    }
                }
            }
        }
        Vectors {
            stem: s,
            period: p,
            values: vals,
        }
    }
}

/// Evaluates a quantifier-free formula at position 0.
pub fn eval_qf(psi: &Formula, pi: &TraceAssignment) -> Result<bool> {
    let c = CompiledQf::new(psi)?;
    let ts = assigned(&c, pi)?;
    c.eval(&ts)
}

fn assigned<'a>(c: &CompiledQf, pi: &TraceAssignment<'a>) -> Result<Vec<&'a LassoTrace>> {
    c.slots()
        .iter()
        .map(|v| {
            pi.get(v)
                .copied()
                .ok_or_else(|| Error::NotClosed(v.to_string()))
        })
        .collect()
}

enum Tree {
    Leaf(CompiledQf),
    Not(Box<Tree>),
    Bin(Box<Tree>, Box<Tree>, fn(bool, bool) -> bool, Short),
    Quant(Quantifier, Var, Box<Tree>),
}

#[derive(Clone, Copy)]
enum Short {
    And,
    Or,
    Implies,
    None,
}

/// Evaluator for formulas whose quantifiers occur only under Boolean
/// connectives, over a fixed finite trace universe.
pub struct Evaluator {
    tree: Tree,
    cap: u64,
}

impl Evaluator {
    pub fn new(f: &Formula) -> Result<Evaluator> {
        Ok(Evaluator {
            tree: build(f)?,
            cap: DEFAULT_PERIOD_CAP,
        })
    }

    pub fn with_cap(mut self, cap: u64) -> Evaluator {
        self.cap = cap;
        set_cap(&mut self.tree, cap);
        self
    }

    /// Evaluates with free variables bound by `env` over universe `ts`.
    pub fn eval(&self, ts: &[LassoTrace], env: &[(Var, usize)]) -> Result<bool> {
        let mut env = env.to_vec();
        eval_tree(&self.tree, ts, &mut env)
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }
}

fn set_cap(t: &mut Tree, cap: u64) {
    match t {
        Tree::Leaf(c) => c.cap = cap,
        Tree::Not(a) | Tree::Quant(_, _, a) => set_cap(a, cap),
        Tree::Bin(a, b, _, _) => {
            set_cap(a, cap);
            set_cap(b, cap);
        }
    }
}

fn build(f: &Formula) -> Result<Tree> {
    use Formula as Fm;
    if !f.has_quantifier() {
        return Ok(Tree::Leaf(CompiledQf::new(f)?));
    }
    let bin = |a: &Formula, b: &Formula, op: fn(bool, bool) -> bool, sh: Short| -> Result<Tree> {
        Ok(Tree::Bin(Box::new(build(a)?), Box::new(build(b)?), op, sh))
    };
    match f {
        Fm::Not(a) => Ok(Tree::Not(Box::new(build(a)?))),
        Fm::And(a, b) => bin(a, b, |x, y| x && y, Short::And),
        Fm::Or(a, b) => bin(a, b, |x, y| x || y, Short::Or),
        Fm::Implies(a, b) => bin(a, b, |x, y| !x || y, Short::Implies),
        Fm::Iff(a, b) => bin(a, b, |x, y| x == y, Short::None),
        Fm::Xor(a, b) => bin(a, b, |x, y| x != y, Short::None),
        Fm::Exists(v, b) => Ok(Tree::Quant(
            Quantifier::Exists,
            v.clone(),
            Box::new(build(b)?),
        )),
        Fm::Forall(v, b) => Ok(Tree::Quant(
            Quantifier::Forall,
            v.clone(),
            Box::new(build(b)?),
        )),
        _ => {
            let v = f
                .children()
                .into_iter()
                .find_map(|c| first_quantified(c))
                .unwrap_or_default();
            Err(Error::QuantifierUnderTemporal(v))
        }
    }
}

fn first_quantified(f: &Formula) -> Option<String> {
    match f {
        Formula::Exists(v, _) | Formula::Forall(v, _) => Some(v.to_string()),
        _ => f.children().into_iter().find_map(first_quantified),
    }
}

fn eval_tree(t: &Tree, ts: &[LassoTrace], env: &mut Vec<(Var, usize)>) -> Result<bool> {
    match t {
        Tree::Leaf(c) => {
            let mut args = Vec::with_capacity(c.slots().len());
            for v in c.slots() {
                let i = env
                    .iter()
                    .rev()
                    .find(|(w, _)| w == v)
                    .map(|(_, i)| *i)
                    .ok_or_else(|| Error::NotClosed(v.to_string()))?;
                args.push(&ts[i]);
            }
            c.eval(&args)
        }
        Tree::Not(a) => Ok(!eval_tree(a, ts, env)?),
        Tree::Bin(a, b, op, sh) => {
            let x = eval_tree(a, ts, env)?;
            match (sh, x) {
                (Short::And, false) => return Ok(false),
                (Short::Or, true) => return Ok(true),
                (Short::Implies, false) => return Ok(true),
                _ => {}
            }
            let y = eval_tree(b, ts, env)?;
            Ok(op(x, y))
        }
        Tree::Quant(q, v, body) => {
            let want = *q == Quantifier::Exists;
            for i in 0..ts.len() {
                env.push((v.clone(), i));
                let r = eval_tree(body, ts, env);
                env.pop();
                if r? == want {
                    return Ok(want);
                }
            }
            Ok(!want)
        }
    }
}

/// `T ⊨ s`.
pub fn eval_sentence(s: &Sentence, t: &FiniteTraceModel) -> Result<bool> {
    eval_sentence_with_cap(s, t, DEFAULT_PERIOD_CAP)
}

pub fn eval_sentence_with_cap(s: &Sentence, t: &FiniteTraceModel, cap: u64) -> Result<bool> {
    let ev = Evaluator::new(&miniscope(s))?.with_cap(cap);
    ev.eval(&t.to_vec(), &[])
}

/// Evaluates a formula with quantifiers only under Boolean connectives.
pub fn eval_formula(f: &Formula, t: &FiniteTraceModel, pi: &[(Var, LassoTrace)]) -> Result<bool> {
    let mut ts = t.to_vec();
    let mut env = Vec::new();
    for (v, tr) in pi {
        let c = tr.canonical();
        let i = match ts.iter().position(|x| *x == c) {
            Some(i) => i,
            None => {
                ts.push(c);
                ts.len() - 1
            }
        };
        env.push((v.clone(), i));
    }
    // free traces outside the universe must not be quantified over
    let universe = t.len();
    let ev = Evaluator::new(f)?;
    eval_restricted(&ev.tree, &ts, universe, &mut env)
}

fn eval_restricted(
    t: &Tree,
    ts: &[LassoTrace],
    universe: usize,
    env: &mut Vec<(Var, usize)>,
) -> Result<bool> {
    match t {
        Tree::Quant(q, v, body) => {
            let want = *q == Quantifier::Exists;
            for i in 0..universe {
                env.push((v.clone(), i));
                let r = eval_restricted(body, ts, universe, env);
                env.pop();
                if r? == want {
                    return Ok(want);
                }
            }
            Ok(!want)
        }
        Tree::Not(a) => Ok(!eval_restricted(a, ts, universe, env)?),
        Tree::Bin(a, b, op, sh) => {
            let x = eval_restricted(a, ts, universe, env)?;
            match (sh, x) {
                (Short::And, false) => return Ok(false),
                (Short::Or, true) => return Ok(true),
                (Short::Implies, false) => return Ok(true),
                _ => {}
            }
            let y = eval_restricted(b, ts, universe, env)?;
            Ok(op(x, y))
        }
        Tree::Leaf(_) => eval_tree(t, ts, env),
    }
}
