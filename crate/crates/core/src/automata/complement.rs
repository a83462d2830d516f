use std::collections::{BTreeSet, HashMap};

use super::nba::{Cube, Edge, Letter, Nba};
use crate::error::{Error, Result};

/// Limits for complementation.
#[derive(Clone, Copy, Debug)]
pub struct ComplementLimits {
    /// Input size cap for the rank-based construction.
    pub rank_states: usize,
    /// Output state budget for either construction.
    pub output_states: usize,
    /// Largest atom count for the explicit alphabet.
    pub atoms: usize,
}

impl Default for ComplementLimits {
    fn default() -> Self {
        ComplementLimits {
            rank_states: 12,
            output_states: 200_000,
            atoms: 16,
        }
    }
}

/// Complement over the explicit alphabet of `a`'s atoms: breakpoint
/// construction for weak automata, tight rankings otherwise.
pub fn complement_nba(a: &Nba) -> Result<Nba> {
    complement_with(a, &ComplementLimits::default())
}

pub fn complement_with(a: &Nba, lim: &ComplementLimits) -> Result<Nba> {
    let a = a.trim();
    let letters = a.letters(lim.atoms)?;
    if a.is_weak() {
        breakpoint(&a, &letters, lim)
    } else {
        if a.num_states() > lim.rank_states {
            return Err(Error::ComplementBlowup {
                states: a.num_states(),
                cap: lim.rank_states,
                position: None,
            });
        }
        ranks(&a, &letters, lim)
    }
}

fn succ_set(a: &Nba, s: &[usize], l: Letter) -> Vec<usize> {
    let mut out: BTreeSet<usize> = BTreeSet::new();
    for &q in s {
        out.extend(a.succ(q, l));
    }
    out.into_iter().collect()
}

struct Builder<K> {
    index: HashMap<K, usize>,
    states: Vec<K>,
    edges: Vec<Vec<Edge>>,
    cap: usize,
    input: usize,
}

impl<K: Clone + Eq + std::hash::Hash> Builder<K> {
    fn new(cap: usize, input: usize) -> Self {
        Builder {
            index: HashMap::new(),
            states: Vec::new(),
            edges: Vec::new(),
            cap,
            input,
        }
    }

    fn id(&mut self, k: K) -> Result<usize> {
        if let Some(&i) = self.index.get(&k) {
            return Ok(i);
        }
        if self.states.len() >= self.cap {
            return Err(Error::ComplementBlowup {
                states: self.input,
                cap: self.cap,
                position: None,
            });
        }
        self.states.push(k.clone());
        self.edges.push(Vec::new());
        self.index.insert(k, self.states.len() - 1);
        Ok(self.states.len() - 1)
    }
}

/// Universal Büchi over the rejecting states of a weak automaton, turned
/// nondeterministic with a breakpoint set of owing states.
fn breakpoint(a: &Nba, letters: &[Letter], lim: &ComplementLimits) -> Result<Nba> {
    let rejecting = |q: &usize| !a.is_accepting(*q);
    let mut b: Builder<(Vec<usize>, Vec<usize>)> = Builder::new(lim.output_states, a.num_states());
    let init: Vec<usize> = {
        let mut v = a.initial().to_vec();
        v.sort();
        v.dedup();
        v
    };
    let owe: Vec<usize> = init.iter().copied().filter(|q| !rejecting(q)).collect();
    b.id((init, owe))?;
    let mask = a.mask();
    let mut i = 0;
    while i < b.states.len() {
        let (s, o) = b.states[i].clone();
        for &l in letters {
            let s2 = succ_set(a, &s, l);
            let o2: Vec<usize> = if o.is_empty() {
                s2.iter().copied().filter(|q| !rejecting(q)).collect()
            } else {
                succ_set(a, &o, l)
                    .into_iter()
                    .filter(|q| !rejecting(q))
                    .collect()
            };
            let to = b.id((s2, o2))?;
            b.edges[i].push(Edge {
                guard: Cube::letter(l, mask),
                to,
            });
        }
        i += 1;
    }
    let accepting = b.states.iter().map(|(_, o)| o.is_empty()).collect();
    Ok(Nba::new(a.atoms().to_vec(), vec![0], b.edges, accepting)?.trim())
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum RState {
    /// Subset phase before the guess.
    Subset(Vec<usize>),
    /// Ranked phase: states with their ranks, and the breakpoint set.
    Ranked(Vec<(usize, u8)>, Vec<usize>),
}

fn tight(r: &[(usize, u8)]) -> bool {
    let max = r.iter().map(|&(_, k)| k).max().unwrap_or(0);
    if max % 2 == 0 {
        return r.is_empty();
    }
    (1..=max)
        .step_by(2)
        .all(|odd| r.iter().any(|&(_, k)| k == odd))
}

/// All tight level rankings of `s2` bounded pointwise by `bound` (even on
/// accepting states).
fn rankings(a: &Nba, s2: &[usize], bound: &[u8]) -> Vec<Vec<(usize, u8)>> {
    let mut out = Vec::new();
    let mut cur: Vec<(usize, u8)> = Vec::with_capacity(s2.len());
    fn go(
        a: &Nba,
        s2: &[usize],
        bound: &[u8],
        cur: &mut Vec<(usize, u8)>,
        out: &mut Vec<Vec<(usize, u8)>>,
    ) {
        let i = cur.len();
        if i == s2.len() {
            if tight(cur) {
                out.push(cur.clone());
            }
            return;
        }
        let q = s2[i];
        for r in 0..=bound[i] {
            if a.is_accepting(q) && r % 2 == 1 {
                continue;
            }
            cur.push((q, r));
            go(a, s2, bound, cur, out);
            cur.pop();
        }
    }
    go(a, s2, bound, &mut cur, &mut out);
    out
}

fn ranks(a: &Nba, letters: &[Letter], lim: &ComplementLimits) -> Result<Nba> {
    let n = a.num_states();
    let nonacc = (0..n).filter(|&q| !a.is_accepting(q)).count();
    let top: u8 = (2 * nonacc.max(1) - 1) as u8;
    let mask = a.mask();
    let mut b: Builder<RState> = Builder::new(lim.output_states, n);
    let mut init = a.initial().to_vec();
    init.sort();
    init.dedup();
    b.id(RState::Subset(init))?;
    let mut i = 0;
    while i < b.states.len() {
        let st = b.states[i].clone();
        for &l in letters {
            let mut targets = Vec::new();
            match &st {
                RState::Subset(s) => {
                    let s2 = succ_set(a, s, l);
                    targets.push(RState::Subset(s2.clone()));
                    let bound = vec![top; s2.len()];
                    for r in rankings(a, &s2, &bound) {
                        targets.push(RState::Ranked(r, Vec::new()));
                    }
                }
                RState::Ranked(f, o) => {
                    let s: Vec<usize> = f.iter().map(|&(q, _)| q).collect();
                    let s2 = succ_set(a, &s, l);
                    let bound: Vec<u8> = s2
                        .iter()
                        .map(|&q2| {
                            f.iter()
                                .filter(|&&(q, _)| a.succ(q, l).any(|x| x == q2))
                                .map(|&(_, r)| r)
                                .min()
                                .unwrap()
                        })
                        .collect();
                    for r in rankings(a, &s2, &bound) {
                        let even: Vec<usize> = r
                            .iter()
                            .filter(|&&(_, k)| k % 2 == 0)
                            .map(|&(q, _)| q)
                            .collect();
                        let o2: Vec<usize> = if o.is_empty() {
                            even
                        } else {
                            let so = succ_set(a, o, l);
                            even.into_iter().filter(|q| so.contains(q)).collect()
                        };
                        targets.push(RState::Ranked(r, o2));
                    }
                }
            }
            for t in targets {
                let to = b.id(t)?;
                b.edges[i].push(Edge {
                    guard: Cube::letter(l, mask),
                    to,
                });
            }
        }
        i += 1;
    }
    let accepting = b
        .states
        .iter()
        .map(|s| matches!(s, RState::Ranked(_, o) if o.is_empty()))
        .collect();
    Ok(Nba::new(a.atoms().to_vec(), vec![0], b.edges, accepting)?.trim())
}
