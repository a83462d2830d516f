use std::collections::{BTreeSet, HashMap};

use super::nba::{bfs_path, sccs, Cube, Edge, LassoWord, Nba};
use crate::error::{Error, Result};
use crate::formula::{Formula, Prop, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum N {
    True,
    False,
    Lit(u32, bool),
    And(u32, u32),
    Or(u32, u32),
    X(u32),
    U(u32, u32),
    R(u32, u32),
}

/// Negation normal form over X, U, R with hash-consed nodes.
struct Arena {
    nodes: Vec<N>,
    index: HashMap<N, u32>,
    atoms: HashMap<(Prop, Var), u32>,
    memo: HashMap<(usize, bool), u32>,
}

impl Arena {
    fn new(atoms: &[(Prop, Var)]) -> Arena {
        let mut a = Arena {
            nodes: Vec::new(),
            index: HashMap::new(),
            atoms: atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), i as u32))
                .collect(),
            memo: HashMap::new(),
        };
        a.mk(N::True);
        a.mk(N::False);
        a
    }

    fn mk(&mut self, n: N) -> u32 {
        let n = match n {
            N::And(a, b) if a == 1 || b == 1 => N::False,
            N::And(0, b) => return b,
            N::And(a, 0) => return a,
            N::And(a, b) if a == b => return a,
            N::Or(a, b) if a == 0 || b == 0 => N::True,
            N::Or(1, b) => return b,
            N::Or(a, 1) => return a,
            N::Or(a, b) if a == b => return a,
            N::And(a, b) if a > b => N::And(b, a),
            N::Or(a, b) if a > b => N::Or(b, a),
            N::X(0) => N::True,
            N::X(1) => N::False,
            N::U(_, 0) | N::R(_, 0) => N::True,
            N::U(_, 1) | N::R(_, 1) => N::False,
            n => n,
        };
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(n);
        self.index.insert(n, i);
        i
    }

    fn nnf(&mut self, f: &Formula, neg: bool) -> Result<u32> {
        let key = (f as *const Formula as usize, neg);
        if let Some(&i) = self.memo.get(&key) {
            return Ok(i);
        }
        use Formula as F;
        let r = match f {
            F::True => self.mk(if neg { N::False } else { N::True }),
            F::False => self.mk(if neg { N::True } else { N::False }),
            F::Atom(p, v) => {
                let i = *self.atoms.get(&(p.clone(), v.clone())).ok_or_else(|| {
                    Error::Invalid(format!("atom {}[{}] not in universe", p.name(), v.name()))
                })?;
                self.mk(N::Lit(i, !neg))
            }
            F::Not(a) => self.nnf(a, !neg)?,
            F::And(a, b) | F::Or(a, b) => {
                let (x, y) = (self.nnf(a, neg)?, self.nnf(b, neg)?);
                let conj = matches!(f, F::And(..)) != neg;
                self.mk(if conj { N::And(x, y) } else { N::Or(x, y) })
            }
            F::Implies(a, b) => {
                let (x, y) = (self.nnf(a, !neg)?, self.nnf(b, neg)?);
                self.mk(if neg { N::And(x, y) } else { N::Or(x, y) })
            }
            F::Iff(a, b) | F::Xor(a, b) => {
                let same = matches!(f, F::Iff(..)) != neg;
                let (pa, na) = (self.nnf(a, false)?, self.nnf(a, true)?);
                let (pb, nb) = (self.nnf(b, false)?, self.nnf(b, true)?);
                let (l, r) = if same {
                    (self.mk(N::And(pa, pb)), self.mk(N::And(na, nb)))
                } else {
                    (self.mk(N::And(pa, nb)), self.mk(N::And(na, pb)))
                };
                self.mk(N::Or(l, r))
            }
            F::Next(a) => {
                let x = self.nnf(a, neg)?;
                self.mk(N::X(x))
            }
            F::Eventually(a) => {
                let x = self.nnf(a, neg)?;
                self.mk(if neg { N::R(1, x) } else { N::U(0, x) })
            }
            F::Always(a) => {
                let x = self.nnf(a, neg)?;
                self.mk(if neg { N::U(0, x) } else { N::R(1, x) })
            }
            F::Until(a, b) => {
                let (x, y) = (self.nnf(a, neg)?, self.nnf(b, neg)?);
                self.mk(if neg { N::R(x, y) } else { N::U(x, y) })
            }
            F::Exists(..) | F::Forall(..) => {
                return Err(Error::Shape("quantifier inside LTL formula".into()))
            }
        };
        self.memo.insert(key, r);
        Ok(r)
    }
}

/// One expansion term: letter constraint, next obligations, postponed untils.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Term {
    cube: Cube,
    next: Vec<u32>,
    postponed: Vec<u32>,
}

fn expand(arena: &Arena, state: &[u32]) -> Vec<Term> {
    struct Br {
        todo: Vec<u32>,
        done: BTreeSet<u32>,
        cube: Cube,
        next: BTreeSet<u32>,
        postponed: BTreeSet<u32>,
    }
    let mut out = BTreeSet::new();
    let mut stack = vec![Br {
        todo: state.to_vec(),
        done: BTreeSet::new(),
        cube: Cube::TRUE,
        next: BTreeSet::new(),
        postponed: BTreeSet::new(),
    }];
    'branch: while let Some(mut b) = stack.pop() {
        while let Some(f) = b.todo.pop() {
            if !b.done.insert(f) {
                continue;
            }
            match arena.nodes[f as usize] {
                N::True => {}
                N::False => continue 'branch,
                N::Lit(i, pos) => {
                    if pos {
                        b.cube.pos |= 1 << i;
                    } else {
                        b.cube.neg |= 1 << i;
                    }
                    if !b.cube.is_consistent() {
                        continue 'branch;
                    }
                }
                N::And(x, y) => {
                    b.todo.push(x);
                    b.todo.push(y);
                }
                N::Or(x, y) => {
                    let mut other = Br {
                        todo: b.todo.clone(),
                        done: b.done.clone(),
                        cube: b.cube,
                        next: b.next.clone(),
                        postponed: b.postponed.clone(),
                    };
                    other.todo.push(y);
                    stack.push(other);
                    b.todo.push(x);
                }
                N::X(x) => {
                    if x != 0 {
                        b.next.insert(x);
                    }
                }
                N::U(x, y) => {
                    let mut other = Br {
                        todo: b.todo.clone(),
                        done: b.done.clone(),
                        cube: b.cube,
                        next: b.next.clone(),
                        postponed: b.postponed.clone(),
                    };
                    other.todo.push(x);
                    other.next.insert(f);
                    other.postponed.insert(f);
                    stack.push(other);
                    b.todo.push(y);
                }
                N::R(x, y) => {
                    let mut other = Br {
                        todo: b.todo.clone(),
                        done: b.done.clone(),
                        cube: b.cube,
                        next: b.next.clone(),
                        postponed: b.postponed.clone(),
                    };
                    other.todo.push(y);
                    other.next.insert(f);
                    stack.push(other);
                    b.todo.push(x);
                    b.todo.push(y);
                }
            }
        }
        out.insert(Term {
            cube: b.cube,
            next: b.next.into_iter().collect(),
            postponed: b.postponed.into_iter().collect(),
        });
    }
    out.into_iter().collect()
}

#[derive(Clone, Debug)]
struct TEdge {
    cube: Cube,
    to: usize,
    postponed: Vec<u32>,
}

/// Transition-based generalized Büchi automaton built on the fly from the
/// tableau. Acceptance set `u` holds the edges that do not postpone `u`.
struct Tgba {
    edges: Vec<Vec<TEdge>>,
    untils: Vec<u32>,
}

fn build_tgba(arena: &Arena, root: u32, state_cap: usize) -> Result<Tgba> {
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut states: Vec<Vec<u32>> = Vec::new();
    let init = if root == 0 { Vec::new() } else { vec![root] };
    index.insert(init.clone(), 0);
    states.push(init);
    let mut edges = Vec::new();
    let mut untils = BTreeSet::new();
    let mut i = 0;
    while i < states.len() {
        if states.len() > state_cap {
            return Err(Error::SizeBlowup {
                size: states.len(),
                cap: state_cap,
            });
        }
        let terms = expand(arena, &states[i]);
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            untils.extend(t.postponed.iter().copied());
            let to = match index.get(&t.next) {
                Some(&j) => j,
                None => {
                    states.push(t.next.clone());
                    index.insert(t.next, states.len() - 1);
                    states.len() - 1
                }
            };
            out.push(TEdge {
                cube: t.cube,
                to,
                postponed: t.postponed,
            });
        }
        edges.push(out);
        i += 1;
    }
    Ok(Tgba {
        edges,
        untils: untils.into_iter().collect(),
    })
}

impl Tgba {
    /// Accepting lasso by SCC analysis of the generalized condition.
    fn lasso(&self) -> Option<LassoWord> {
        let n = self.edges.len();
        let (comp, nc) = sccs(n, |v| self.edges[v].iter().map(|e| e.to).collect());
        let mut internal = vec![false; nc];
        let mut postponed_somewhere: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); nc];
        for v in 0..n {
            for e in &self.edges[v] {
                if comp[e.to] == comp[v] {
                    internal[comp[v]] = true;
                    postponed_somewhere[comp[v]].extend(e.postponed.iter().copied());
                }
            }
        }
        // an SCC is good if every until postponed inside it is also fulfilled inside it
        let mut good = vec![false; nc];
        for c in 0..nc {
            if !internal[c] {
                continue;
            }
            good[c] = postponed_somewhere[c].iter().all(|u| {
                (0..n).filter(|&v| comp[v] == c).any(|v| {
                    self.edges[v]
                        .iter()
                        .any(|e| comp[e.to] == c && !e.postponed.contains(u))
                })
            });
        }
        let target = |e: &TEdge| e.to;
        let stem = bfs_path(&self.edges, target, &[0], |_| true, |v| good[comp[v]])?;
        let s = stem.last().map(|&(p, e)| self.edges[p][e].to).unwrap_or(0);
        let c = comp[s];
        let mut cycle: Vec<(usize, usize)> = Vec::new();
        let mut cur = s;
        for u in &postponed_somewhere[c] {
            let path = bfs_path(
                &self.edges,
                target,
                &[cur],
                |w| comp[w] == c,
                |w| {
                    self.edges[w]
                        .iter()
                        .any(|e| comp[e.to] == c && !e.postponed.contains(u))
                },
            )
            .expect("strongly connected");
            cycle.extend(path.iter().copied());
            let w = path
                .last()
                .map(|&(p, e)| self.edges[p][e].to)
                .unwrap_or(cur);
            let ei = self.edges[w]
                .iter()
                .position(|e| comp[e.to] == c && !e.postponed.contains(u))
                .unwrap();
            cycle.push((w, ei));
            cur = self.edges[w][ei].to;
        }
        if cycle.is_empty() {
            let ei = self.edges[s].iter().position(|e| comp[e.to] == c).unwrap();
            cycle.push((s, ei));
            cur = self.edges[s][ei].to;
        }
        let back = bfs_path(&self.edges, target, &[cur], |w| comp[w] == c, |w| w == s)
            .expect("strongly connected");
        cycle.extend(back);
        let letter = |&(p, e): &(usize, usize)| self.edges[p][e].cube.pos;
        Some(LassoWord {
            stem: stem.iter().map(letter).collect(),
            lp: cycle.iter().map(letter).collect(),
        })
    }

    /// Degeneralization with level jumps; acceptance at the top level.
    fn degeneralize(&self, atoms: Vec<(Prop, Var)>) -> Nba {
        let k = self.untils.len();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut states = vec![(0usize, 0usize)];
        index.insert((0, 0), 0);
        let mut edges: Vec<Vec<Edge>> = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let (q, l) = states[i];
            let mut out = Vec::new();
            for e in &self.edges[q] {
                let mut l2 = if l == k { 0 } else { l };
                while l2 < k && !e.postponed.contains(&self.untils[l2]) {
                    l2 += 1;
                }
                let key = (e.to, l2);
                let to = match index.get(&key) {
                    Some(&j) => j,
                    None => {
                        states.push(key);
                        index.insert(key, states.len() - 1);
                        states.len() - 1
                    }
                };
                out.push(Edge { guard: e.cube, to });
            }
            edges.push(out);
            i += 1;
        }
        let accepting = states.iter().map(|&(_, l)| l == k).collect();
        Nba::new(atoms, vec![0], edges, accepting)
            .expect("atom count checked")
            .trim()
    }
}

/// Default cap on tableau states.
pub const DEFAULT_TABLEAU_CAP: usize = 1 << 20;

fn universe_of(f: &Formula, atoms: &[(Prop, Var)]) -> Result<Vec<(Prop, Var)>> {
    let mut all: BTreeSet<(Prop, Var)> = atoms.iter().cloned().collect();
    all.extend(f.atoms());
    if all.len() > 64 {
        return Err(Error::AlphabetTooLarge(all.len()));
    }
    // keep the caller's order first
    let mut out: Vec<(Prop, Var)> = atoms.to_vec();
    for a in all {
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

/// Büchi automaton for a quantifier-free formula. `atoms` fixes the order
/// of the letter bits; atoms of `f` missing from it are appended.
pub fn ltl_to_nba(f: &Formula, atoms: &[(Prop, Var)]) -> Result<Nba> {
    let atoms = universe_of(f, atoms)?;
    let mut arena = Arena::new(&atoms);
    let root = arena.nnf(f, false)?;
    Ok(build_tgba(&arena, root, DEFAULT_TABLEAU_CAP)?.degeneralize(atoms))
}

/// Satisfying lasso word for a quantifier-free formula over its own atoms.
pub fn ltl_sat_word(f: &Formula, cap: usize) -> Result<Option<(Vec<(Prop, Var)>, LassoWord)>> {
    let atoms = universe_of(f, &[])?;
    let mut arena = Arena::new(&atoms);
    let root = arena.nnf(f, false)?;
    Ok(build_tgba(&arena, root, cap)?.lasso().map(|w| (atoms, w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn nba(s: &str) -> Nba {
        let f = parse_formula(s).unwrap();
        ltl_to_nba(&f, &[]).unwrap()
    }

    fn w(stem: &[u64], lp: &[u64]) -> LassoWord {
        LassoWord {
            stem: stem.to_vec(),
            lp: lp.to_vec(),
        }
    }

    #[test]
    fn examples() {
        let g = nba("G a[z]");
        assert_eq!(g.num_states(), 1);
        assert!(g.accepts(&w(&[], &[1])));
        assert!(!g.accepts(&w(&[1], &[0])));
        assert!(nba("F a[z] & G !a[z]").is_empty());
        let u = nba("a[z] U b[z]");
        // atoms sorted: a, b
        assert!(u.accepts(&w(&[1, 1], &[2])));
        assert!(!u.accepts(&w(&[], &[1])));
    }

    #[test]
    fn depth_one_is_weak() {
        for s in [
            "F a[z] & F b[z]",
            "G a[z] & F !b[z]",
            "(a[z] U b[z]) | G !a[z]",
            "X a[z] & F b[z]",
        ] {
            assert!(nba(s).is_weak(), "{s}");
        }
    }

    #[test]
    fn generalized_lasso() {
        let f = parse_formula("G F a[z] & G F !a[z]").unwrap();
        let (_, w) = ltl_sat_word(&f, 1000).unwrap().unwrap();
        assert!(w.lp.contains(&0) && w.lp.contains(&1));
        let g = parse_formula("F G a[z] & G F !a[z]").unwrap();
        assert!(ltl_sat_word(&g, 1000).unwrap().is_none());
    }
}
