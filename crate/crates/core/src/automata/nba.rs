use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::formula::{Prop, Var};
use crate::semantics::{KripkeStructure, LassoTrace, Valuation};

/// A letter is a bit mask over the automaton's atom list.
pub type Letter = u64;

/// Conjunction of literals over atom indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cube {
    pub pos: u64,
    pub neg: u64,
}

impl Cube {
    pub const TRUE: Cube = Cube { pos: 0, neg: 0 };

    pub fn letter(l: Letter, mask: u64) -> Cube {
        Cube {
            pos: l & mask,
            neg: !l & mask,
        }
    }

    pub fn matches(&self, l: Letter) -> bool {
        l & self.pos == self.pos && l & self.neg == 0
    }

    pub fn is_consistent(&self) -> bool {
        self.pos & self.neg == 0
    }

    pub fn and(&self, o: &Cube) -> Cube {
        Cube {
            pos: self.pos | o.pos,
            neg: self.neg | o.neg,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub guard: Cube,
    pub to: usize,
}

/// Nondeterministic Büchi automaton with state-based acceptance and
/// cube-labeled transitions over an explicit atom list.
#[derive(Clone, Debug)]
pub struct Nba {
    atoms: Vec<(Prop, Var)>,
    initial: Vec<usize>,
    edges: Vec<Vec<Edge>>,
    accepting: Vec<bool>,
}

/// Ultimately periodic word over an automaton's letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LassoWord {
    pub stem: Vec<Letter>,
    pub lp: Vec<Letter>,
}

impl LassoWord {
    pub fn at(&self, j: usize) -> Letter {
        if j < self.stem.len() {
            self.stem[j]
        } else {
            self.lp[(j - self.stem.len()) % self.lp.len()]
        }
    }

    /// One trace per variable occurring in `atoms`.
    pub fn unzip(&self, atoms: &[(Prop, Var)]) -> Vec<(Var, LassoTrace)> {
        let vars: BTreeSet<&Var> = atoms.iter().map(|(_, v)| v).collect();
        vars.into_iter()
            .map(|v| {
                let val = |l: &Letter| -> Valuation {
                    atoms
                        .iter()
                        .enumerate()
                        .filter(|(i, (_, w))| w == v && l >> i & 1 == 1)
                        .map(|(_, (p, _))| p.clone())
                        .collect()
                };
                let t = LassoTrace::raw(
                    self.stem.iter().map(val).collect(),
                    self.lp.iter().map(val).collect(),
                );
                (v.clone(), t.canonical())
            })
            .collect()
    }
}

/// Iterative Tarjan; returns the SCC id of each node and the number of SCCs.
pub(crate) fn sccs(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> (Vec<usize>, usize) {
    const NONE: usize = usize::MAX;
    let mut index = vec![NONE; n];
    let mut low = vec![0; n];
    let mut comp = vec![NONE; n];
    let mut on = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if index[root] != NONE {
            continue;
        }
        let mut call: Vec<(usize, Vec<usize>, usize)> = vec![(root, succ(root), 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on[root] = true;
        while let Some((v, ss, i)) = call.last_mut() {
            let v = *v;
            if *i < ss.len() {
                let w = ss[*i];
                *i += 1;
                if index[w] == NONE {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on[w] = true;
                    let sw = succ(w);
                    call.push((w, sw, 0));
                } else if on[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some((u, _, _)) = call.last() {
                    low[*u] = low[*u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    (comp, ncomp)
}

/// Shortest edge path inside `allowed` from `from` to any node satisfying `goal`,
/// as a list of `(src, edge index)`; `None` if unreachable. An empty path means
/// `from` itself satisfies the goal.
pub(crate) fn bfs_path<E>(
    edges: &[Vec<E>],
    target: impl Fn(&E) -> usize,
    from: &[usize],
    allowed: impl Fn(usize) -> bool,
    goal: impl Fn(usize) -> bool,
) -> Option<Vec<(usize, usize)>> {
    let mut prev: HashMap<usize, Option<(usize, usize)>> = HashMap::new();
    let mut queue = VecDeque::new();
    for &f in from {
        if prev.insert(f, None).is_none() {
            queue.push_back(f);
        }
    }
    while let Some(v) = queue.pop_front() {
        if goal(v) {
            let mut path = Vec::new();
            let mut cur = v;
            while let Some(Some((p, e))) = prev.get(&cur) {
                path.push((*p, *e));
                cur = *p;
            }
            path.reverse();
            return Some(path);
        }
        for (i, e) in edges[v].iter().enumerate() {
            let w = target(e);
            if allowed(w) && !prev.contains_key(&w) {
                prev.insert(w, Some((v, i)));
                queue.push_back(w);
            }
        }
    }
    None
}

impl Nba {
    pub fn new(
        atoms: Vec<(Prop, Var)>,
        initial: Vec<usize>,
        edges: Vec<Vec<Edge>>,
        accepting: Vec<bool>,
    ) -> Result<Nba> {
        if atoms.len() > 64 {
            return Err(Error::AlphabetTooLarge(atoms.len()));
        }
        assert_eq!(edges.len(), accepting.len());
        Ok(Nba {
            atoms,
            initial,
            edges,
            accepting,
        })
    }

    pub fn empty(atoms: Vec<(Prop, Var)>) -> Nba {
        Nba {
            atoms,
            initial: Vec::new(),
            edges: Vec::new(),
            accepting: Vec::new(),
        }
    }

    /// The automaton accepting every word.
    pub fn universal(atoms: Vec<(Prop, Var)>) -> Nba {
        Nba {
            atoms,
            initial: vec![0],
            edges: vec![vec![Edge {
                guard: Cube::TRUE,
                to: 0,
            }]],
            accepting: vec![true],
        }
    }

    pub fn atoms(&self) -> &[(Prop, Var)] {
        &self.atoms
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn edges(&self, q: usize) -> &[Edge] {
        &self.edges[q]
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn mask(&self) -> u64 {
        if self.atoms.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.atoms.len()) - 1
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// All letters of the explicit alphabet.
    pub fn letters(&self, cap: usize) -> Result<Vec<Letter>> {
        if self.atoms.len() > cap {
            return Err(Error::AlphabetTooLarge(self.atoms.len()));
        }
        Ok((0..1u64 << self.atoms.len()).collect())
    }

    pub fn succ(&self, q: usize, l: Letter) -> impl Iterator<Item = usize> + '_ {
        self.edges[q]
            .iter()
            .filter(move |e| e.guard.matches(l))
            .map(|e| e.to)
    }

    fn scc_info(&self) -> (Vec<usize>, Vec<bool>) {
        let n = self.num_states();
        let (comp, nc) = sccs(n, |v| self.edges[v].iter().map(|e| e.to).collect());
        let mut nontrivial = vec![false; nc];
        for v in 0..n {
            for e in &self.edges[v] {
                if comp[e.to] == comp[v] {
                    nontrivial[comp[v]] = true;
                }
            }
        }
        (comp, nontrivial)
    }

    /// Weak: every nontrivial SCC is uniformly accepting or rejecting.
    pub fn is_weak(&self) -> bool {
        let (comp, nontrivial) = self.scc_info();
        let mut kind: HashMap<usize, bool> = HashMap::new();
        for v in 0..self.num_states() {
            if nontrivial[comp[v]]
                && *kind.entry(comp[v]).or_insert(self.accepting[v]) != self.accepting[v]
            {
                return false;
            }
        }
        true
    }

    /// Restricts to states that are reachable and can reach an accepting cycle.
    pub fn trim(&self) -> Nba {
        let n = self.num_states();
        let (comp, nontrivial) = self.scc_info();
        let mut good = vec![false; n];
        for v in 0..n {
            if self.accepting[v] && nontrivial[comp[v]] {
                good[v] = true;
            }
        }
        // backward closure
        let mut pred = vec![Vec::new(); n];
        for v in 0..n {
            for e in &self.edges[v] {
                pred[e.to].push(v);
            }
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| good[v]).collect();
        while let Some(v) = stack.pop() {
            for &p in &pred[v] {
                if !good[p] {
                    good[p] = true;
                    stack.push(p);
                }
            }
        }
        // forward from initial
        let mut reach = vec![false; n];
        let mut stack: Vec<usize> = self.initial.iter().copied().filter(|&q| good[q]).collect();
        for &q in &stack {
            reach[q] = true;
        }
        while let Some(v) = stack.pop() {
            for e in &self.edges[v] {
                if good[e.to] && !reach[e.to] {
                    reach[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        let mut map = vec![usize::MAX; n];
        let mut k = 0;
        for v in 0..n {
            if reach[v] {
                map[v] = k;
                k += 1;
            }
        }
        let mut edges = vec![Vec::new(); k];
        let mut accepting = vec![false; k];
        for v in 0..n {
            if map[v] == usize::MAX {
                continue;
            }
            accepting[map[v]] = self.accepting[v];
            let mut es: Vec<Edge> = self.edges[v]
                .iter()
                .filter(|e| map[e.to] != usize::MAX && e.guard.is_consistent())
                .map(|e| Edge {
                    guard: e.guard,
                    to: map[e.to],
                })
                .collect();
            es.sort();
            es.dedup();
            edges[map[v]] = es;
        }
        let mut initial: Vec<usize> = self
            .initial
            .iter()
            .filter(|&&q| map[q] != usize::MAX)
            .map(|&q| map[q])
            .collect();
        initial.sort();
        initial.dedup();
        Nba {
            atoms: self.atoms.clone(),
            initial,
            edges,
            accepting,
        }
    }

    /// An accepting lasso, if the language is nonempty. The result is checked
    /// by simulation before it is returned.
    pub fn nonempty(&self) -> Option<LassoWord> {
        let (comp, nontrivial) = self.scc_info();
        let target = |e: &Edge| e.to;
        let stem = bfs_path(
            &self.edges,
            target,
            &self.initial,
            |_| true,
            |v| self.accepting[v] && nontrivial[comp[v]],
        )?;
        let s = match stem.last() {
            Some(&(p, e)) => self.edges[p][e].to,
            None => *self
                .initial
                .iter()
                .find(|&&q| self.accepting[q] && nontrivial[comp[q]])
                .expect("goal state"),
        };
        let c = comp[s];
        // one edge out of s inside the SCC, then back to s
        let first = self.edges[s]
            .iter()
            .find(|e| comp[e.to] == c)
            .expect("nontrivial SCC");
        let back = bfs_path(
            &self.edges,
            target,
            &[first.to],
            |w| comp[w] == c,
            |w| w == s,
        )
        .expect("strongly connected");
        let letter = |(p, e): &(usize, usize)| self.edges[*p][*e].guard.pos;
        let word = LassoWord {
            stem: stem.iter().map(letter).collect(),
            lp: std::iter::once(first.guard.pos)
                .chain(back.iter().map(letter))
                .collect(),
        };
        debug_assert!(self.accepts(&word));
        if self.accepts(&word) {
            Some(word)
        } else {
            None
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nonempty().is_none()
    }

    /// Membership of a lasso word, by product with the lasso's position graph.
    pub fn accepts(&self, w: &LassoWord) -> bool {
        if w.lp.is_empty() {
            return false;
        }
        let len = w.stem.len() + w.lp.len();
        let nextpos = |j: usize| if j + 1 < len { j + 1 } else { w.stem.len() };
        let id = |q: usize, j: usize| q * len + j;
        let total = self.num_states() * len;
        let succ = |v: usize| -> Vec<usize> {
            let (q, j) = (v / len, v % len);
            self.succ(q, w.at(j)).map(|r| id(r, nextpos(j))).collect()
        };
        let mut reach = vec![false; total];
        let mut stack: Vec<usize> = self.initial.iter().map(|&q| id(q, 0)).collect();
        for &v in &stack {
            reach[v] = true;
        }
        while let Some(v) = stack.pop() {
            for u in succ(v) {
                if !reach[u] {
                    reach[u] = true;
                    stack.push(u);
                }
            }
        }
        let (comp, nc) = sccs(total, |v| if reach[v] { succ(v) } else { Vec::new() });
        let mut ok = vec![false; nc];
        for v in 0..total {
            if reach[v] && self.accepting[v / len] {
                if succ(v).iter().any(|&u| comp[u] == comp[v]) {
                    ok[comp[v]] = true;
                }
            }
        }
        (0..total).any(|v| reach[v] && ok[comp[v]])
    }

    /// Synchronous product with `k` for variable `v`, projecting `v`'s atoms away.
    /// Product states are `(q, s)` where `s` is the structure state read next.
    pub fn product_project(&self, k: &KripkeStructure, v: &Var) -> Result<Nba> {
        let keep: Vec<usize> = (0..self.atoms.len())
            .filter(|&i| &self.atoms[i].1 != v)
            .collect();
        let atoms: Vec<(Prop, Var)> = keep.iter().map(|&i| self.atoms[i].clone()).collect();
        let project = |m: u64| -> u64 {
            keep.iter()
                .enumerate()
                .filter(|(_, &i)| m >> i & 1 == 1)
                .fold(0, |acc, (j, _)| acc | 1 << j)
        };
        let vmask: u64 = (0..self.atoms.len())
            .filter(|&i| &self.atoms[i].1 == v)
            .fold(0, |acc, i| acc | 1 << i);
        let lab: Vec<u64> = (0..k.len())
            .map(|s| {
                (0..self.atoms.len())
                    .filter(|&i| vmask >> i & 1 == 1 && k.label(s).contains(&self.atoms[i].0))
                    .fold(0, |acc, i| acc | 1 << i)
            })
            .collect();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut states: Vec<(usize, usize)> = Vec::new();
        let mut queue = VecDeque::new();
        let mut initial = Vec::new();
        for &q in &self.initial {
            for &s in k.initial() {
                let id = *index.entry((q, s)).or_insert_with(|| {
                    states.push((q, s));
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                initial.push(id);
            }
        }
        let mut edges: Vec<Vec<Edge>> = Vec::new();
        while let Some(id) = queue.pop_front() {
            let (q, s) = states[id];
            let mut out = Vec::new();
            for e in &self.edges[q] {
                let g = e.guard;
                if g.pos & vmask & !lab[s] != 0 || g.neg & vmask & lab[s] != 0 {
                    continue;
                }
                let guard = Cube {
                    pos: project(g.pos),
                    neg: project(g.neg),
                };
                for &s2 in k.succ(s) {
                    let key = (e.to, s2);
                    let to = match index.get(&key) {
                        Some(&t) => t,
                        None => {
                            states.push(key);
                            index.insert(key, states.len() - 1);
                            queue.push_back(states.len() - 1);
                            states.len() - 1
                        }
                    };
                    out.push(Edge { guard, to });
                }
            }
            if edges.len() <= id {
                edges.resize(id + 1, Vec::new());
            }
            edges[id] = out;
        }
        edges.resize(states.len(), Vec::new());
        let accepting = states.iter().map(|&(q, _)| self.accepting[q]).collect();
        Ok(Nba {
            atoms,
            initial,
            edges,
            accepting,
        }
        .trim())
    }

    /// Büchi intersection over the same atom list.
    pub fn intersect(&self, o: &Nba) -> Nba {
        assert_eq!(self.atoms, o.atoms, "same atom list");
        let mut index: HashMap<(usize, usize, u8), usize> = HashMap::new();
        let mut states: Vec<(usize, usize, u8)> = Vec::new();
        let mut queue = VecDeque::new();
        let mut initial = Vec::new();
        let mut get =
            |key: (usize, usize, u8), states: &mut Vec<_>, queue: &mut VecDeque<usize>| {
                *index.entry(key).or_insert_with(|| {
                    states.push(key);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                })
            };
        for &a in &self.initial {
            for &b in &o.initial {
                initial.push(get((a, b, 0), &mut states, &mut queue));
            }
        }
        let mut edges: Vec<Vec<Edge>> = Vec::new();
        while let Some(id) = queue.pop_front() {
            let (a, b, f) = states[id];
            let nf = match f {
                0 if self.accepting[a] => 1,
                1 if o.accepting[b] => 0,
                x => x,
            };
            let mut out = Vec::new();
            for ea in &self.edges[a] {
                for eb in &o.edges[b] {
                    let g = ea.guard.and(&eb.guard);
                    if g.is_consistent() {
                        let to = get((ea.to, eb.to, nf), &mut states, &mut queue);
                        out.push(Edge { guard: g, to });
                    }
                }
            }
            if edges.len() <= id {
                edges.resize(id + 1, Vec::new());
            }
            edges[id] = out;
        }
        edges.resize(states.len(), Vec::new());
        let accepting = states
            .iter()
            .map(|&(a, _, f)| f == 0 && self.accepting[a])
            .collect();
        Nba {
            atoms: self.atoms.clone(),
            initial,
            edges,
            accepting,
        }
    }

    /// Labeled edge list, for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let lit = |c: &Cube| -> String {
            let mut parts = Vec::new();
            for (i, (p, v)) in self.atoms.iter().enumerate() {
                if c.pos >> i & 1 == 1 {
                    parts.push(format!("{}[{}]", p.name(), v.name()));
                }
                if c.neg >> i & 1 == 1 {
                    parts.push(format!("!{}[{}]", p.name(), v.name()));
                }
            }
            if parts.is_empty() {
                "true".into()
            } else {
                parts.join(" & ")
            }
        };
        let _ = writeln!(out, "initial {:?}", self.initial);
        for q in 0..self.num_states() {
            let _ = writeln!(
                out,
                "state {q}{}",
                if self.accepting[q] { " accepting" } else { "" }
            );
            for e in &self.edges[q] {
                let _ = writeln!(out, "  {} -> {}", lit(&e.guard), e.to);
            }
        }
        out
    }
}
