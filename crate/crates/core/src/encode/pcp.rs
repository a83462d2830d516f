use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::{
    always, and, and_all, atom, eventually, exists, forall, iff, implies, next, next_n, not, or,
    or_all, prenex, until, Formula, Prop, Sentence, Var,
};
use crate::semantics::{FiniteTraceModel, LassoTrace, Valuation};

/// A PCP instance: pairs `(u_m, u'_m)` of nonempty lowercase words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcpInstance {
    pairs: Vec<(String, String)>,
}

impl PcpInstance {
    pub fn new(pairs: Vec<(String, String)>) -> Result<PcpInstance> {
        if pairs.is_empty() {
            return Err(Error::Invalid("instance has no pairs".into()));
        }
        for (i, (u, v)) in pairs.iter().enumerate() {
            if u.is_empty() || v.is_empty() {
                return Err(Error::EmptyWordPair(i + 1));
            }
            if !u.bytes().chain(v.bytes()).all(|b| b.is_ascii_lowercase()) {
                return Err(Error::Invalid(format!("pair {} is not over a-z", i + 1)));
            }
        }
        Ok(PcpInstance { pairs })
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    /// Maximal word length `ℓ`.
    pub fn width(&self) -> usize {
        self.pairs
            .iter()
            .map(|(u, v)| u.len().max(v.len()))
            .max()
            .unwrap()
    }

    pub fn alphabet(&self) -> BTreeSet<char> {
        self.pairs
            .iter()
            .flat_map(|(u, v)| u.chars().chain(v.chars()))
            .collect()
    }

    /// Trace length bound `2^n + 2ℓ + 1`.
    pub fn bound(&self) -> usize {
        (1usize << self.pairs.len().min(40)) + 2 * self.width() + 1
    }

    /// Is the 1-based index word `s` a solution?
    pub fn is_solution(&self, s: &[usize]) -> bool {
        !s.is_empty()
            && s.iter().all(|&m| m >= 1 && m <= self.pairs.len())
            && self.top(s) == self.bottom(s)
    }

    pub fn top(&self, s: &[usize]) -> String {
        s.iter().map(|&m| self.pairs[m - 1].0.as_str()).collect()
    }

    pub fn bottom(&self, s: &[usize]) -> String {
        s.iter().map(|&m| self.pairs[m - 1].1.as_str()).collect()
    }
}

/// Proposition naming used by the encoder.
#[derive(Clone, Debug)]
pub struct PcpProps {
    pub letters: Vec<char>,
}

impl PcpProps {
    pub fn new(p: &PcpInstance) -> PcpProps {
        PcpProps {
            letters: p.alphabet().into_iter().collect(),
        }
    }

    pub fn letter(c: char) -> Prop {
        Prop::new(&c.to_string())
    }

    pub fn bar(c: char) -> Prop {
        Prop::new(&format!("bar_{c}"))
    }

    pub fn pad() -> Prop {
        Prop::new("pad")
    }

    pub fn end() -> Prop {
        Prop::new("end")
    }

    pub fn bit(b: bool) -> Prop {
        Prop::new(if b { "1" } else { "0" })
    }

    pub fn pair(x: bool, y: bool) -> Prop {
        Prop::new(&format!("p{}{}", x as u8, y as u8))
    }

    pub fn all(&self) -> Vec<Prop> {
        let mut v: Vec<Prop> = Vec::new();
        for &c in &self.letters {
            v.push(Self::letter(c));
            v.push(Self::bar(c));
        }
        v.push(Self::pad());
        v.push(Self::end());
        v.push(Self::bit(false));
        v.push(Self::bit(true));
        for x in [false, true] {
            for y in [false, true] {
                v.push(Self::pair(x, y));
            }
        }
        v
    }
}

fn singleton(p: Prop) -> Valuation {
    [p].into_iter().collect()
}

/// LSB-first binary representation; `b_0 = 0`.
pub fn binary(r: usize) -> Vec<bool> {
    if r == 0 {
        return vec![false];
    }
    let mut out = Vec::new();
    let mut x = r;
    while x > 0 {
        out.push(x & 1 == 1);
        x >>= 1;
    }
    out
}

fn padded(w: &str, l: usize) -> Vec<Option<char>> {
    let mut v: Vec<Option<char>> = w.chars().map(Some).collect();
    v.resize(l, None);
    v
}

fn block_vals(w: &str, l: usize, bar: Option<usize>) -> Vec<Valuation> {
    padded(w, l)
        .into_iter()
        .enumerate()
        .map(|(i, c)| match c {
            None => singleton(PcpProps::pad()),
            Some(c) if bar == Some(i) => singleton(PcpProps::bar(c)),
            Some(c) => singleton(PcpProps::letter(c)),
        })
        .collect()
}

fn dollar_trace(stem: Vec<Valuation>) -> LassoTrace {
    LassoTrace::raw(stem, vec![singleton(PcpProps::end())]).canonical()
}

/// Type-one trace `pad(u_m) pad(u'_m) b_r $^ω` (m is 1-based).
pub fn type_one(p: &PcpInstance, m: usize, r: usize) -> LassoTrace {
    let l = p.width();
    let (u, v) = &p.pairs[m - 1];
    let mut stem = block_vals(u, l, None);
    stem.extend(block_vals(v, l, None));
    stem.extend(binary(r).into_iter().map(|b| singleton(PcpProps::bit(b))));
    dollar_trace(stem)
}

/// Type-two trace `win(u_m, j) win(u'_{m2}, j2) [b_r, b_{r2}] $^ω`.
pub fn type_two(
    p: &PcpInstance,
    m: usize,
    j: usize,
    r: usize,
    m2: usize,
    j2: usize,
    r2: usize,
) -> LassoTrace {
    let l = p.width();
    let mut stem = block_vals(&p.pairs[m - 1].0, l, Some(j));
    stem.extend(block_vals(&p.pairs[m2 - 1].1, l, Some(j2)));
    let (x, y) = (binary(r), binary(r2));
    let len = x.len().max(y.len());
    for i in 0..len {
        let a = x.get(i).copied().unwrap_or(false);
        let b = y.get(i).copied().unwrap_or(false);
        stem.push(singleton(PcpProps::pair(a, b)));
    }
    dollar_trace(stem)
}

/// The reference model `T₁ ∪ T₂` for a solution `s` (1-based indices).
pub fn pcp_solution_model(p: &PcpInstance, s: &[usize]) -> Result<FiniteTraceModel> {
    if !p.is_solution(s) {
        return Err(Error::NotASolution);
    }
    let mut traces: Vec<LassoTrace> = (0..s.len()).map(|r| type_one(p, s[r], r)).collect();
    let locate = |lens: Vec<usize>, i: usize| {
        let mut acc = 0;
        for (r, len) in lens.into_iter().enumerate() {
            if i < acc + len {
                return (r, i - acc);
            }
            acc += len;
        }
        unreachable!("index inside the solution word")
    };
    let top_lens: Vec<usize> = s.iter().map(|&m| p.pairs[m - 1].0.len()).collect();
    let bot_lens: Vec<usize> = s.iter().map(|&m| p.pairs[m - 1].1.len()).collect();
    for i in 0..p.top(s).len() {
        let (r, j) = locate(top_lens.clone(), i);
        let (r2, j2) = locate(bot_lens.clone(), i);
        traces.push(type_two(p, s[r], j, r, s[r2], j2, r2));
    }
    FiniteTraceModel::new(traces)
}

struct Enc<'a> {
    p: &'a PcpInstance,
    props: PcpProps,
    l: usize,
}

impl Enc<'_> {
    fn at(&self, k: usize, prop: &Prop, v: &str) -> Formula {
        next_n(k, atom(prop.name(), v))
    }

    fn spell(&self, offset: usize, vals: &[Valuation], v: &str) -> Formula {
        and_all(vals.iter().enumerate().map(|(i, val)| {
            let p = val.iter().next().unwrap();
            self.at(offset + i, p, v)
        }))
    }

    fn any_bar(&self, v: &str) -> Formula {
        or_all(
            self.props
                .letters
                .iter()
                .map(|&c| atom(PcpProps::bar(c).name(), v)),
        )
    }

    fn exactly_one(&self, v: &str) -> Formula {
        let all = self.props.all();
        let some = or_all(all.iter().map(|a| atom(a.name(), v)));
        let mut excl = Vec::new();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                excl.push(not(and(atom(all[i].name(), v), atom(all[j].name(), v))));
            }
        }
        always(and(some, and_all(excl)))
    }

    fn dollars_forever(&self, v: &str) -> Formula {
        always(implies(atom("end", v), next(atom("end", v))))
    }

    fn type_one(&self, v: &str) -> Formula {
        let words = or_all(self.p.pairs.iter().map(|(u, w)| {
            and(
                self.spell(0, &block_vals(u, self.l, None), v),
                self.spell(self.l, &block_vals(w, self.l, None), v),
            )
        }));
        let bit = or(atom("0", v), atom("1", v));
        let bits = or(
            and(atom("0", v), next(atom("end", v))),
            until(bit, and(atom("1", v), next(atom("end", v)))),
        );
        and_all([words, next_n(2 * self.l, bits), self.dollars_forever(v)])
    }

    fn window(&self, offset: usize, w: &str, j: usize, v: &str) -> Formula {
        self.spell(offset, &block_vals(w, self.l, Some(j)), v)
    }

    fn windows(&self, offset: usize, top: bool, v: &str) -> Formula {
        or_all(
            self.p
                .pairs
                .iter()
                .flat_map(|(u, w)| {
                    let word = if top { u } else { w };
                    (0..word.len()).map(move |j| (word.clone(), j))
                })
                .map(|(word, j)| self.window(offset, &word, j, v)),
        )
    }

    fn type_two(&self, v: &str) -> Formula {
        let pair = |x, y| atom(PcpProps::pair(x, y).name(), v);
        let any = or_all([
            pair(false, false),
            pair(false, true),
            pair(true, false),
            pair(true, true),
        ]);
        let nonzero = or_all([pair(false, true), pair(true, false), pair(true, true)]);
        let bits = or(
            and(any.clone(), next(atom("end", v))),
            until(any, and(nonzero, next(atom("end", v)))),
        );
        and_all([
            self.windows(0, true, v),
            self.windows(self.l, false, v),
            next_n(2 * self.l, bits),
            self.dollars_forever(v),
        ])
    }

    /// Bit `comp` of the rank stored on `v`; component 0 is the type-one bit.
    fn hi(&self, comp: u8, v: &str) -> Formula {
        let pair = |x, y| atom(PcpProps::pair(x, y).name(), v);
        match comp {
            0 => atom("1", v),
            1 => or(pair(true, false), pair(true, true)),
            _ => or(pair(false, true), pair(true, true)),
        }
    }

    fn same_rank(&self, ca: u8, a: &str, cb: u8, b: &str) -> Formula {
        always(iff(self.hi(ca, a), self.hi(cb, b)))
    }

    /// rank(b) = rank(a) + 1 via carry propagation from the least significant bit.
    fn inc(&self, ca: u8, a: &str, cb: u8, b: &str) -> Formula {
        let (ha, hb) = (self.hi(ca, a), self.hi(cb, b));
        next_n(
            2 * self.l,
            until(
                and(ha.clone(), not(hb.clone())),
                and_all([not(ha.clone()), hb.clone(), next(always(iff(ha, hb)))]),
            ),
        )
    }

    fn letter_eq(&self, offset: usize, a: &str, b: &str) -> Formula {
        let unbar = |c: char, v: &str| {
            or(
                atom(PcpProps::letter(c).name(), v),
                atom(PcpProps::bar(c).name(), v),
            )
        };
        and_all((0..self.l).map(|i| {
            let mut parts: Vec<Formula> = self
                .props
                .letters
                .iter()
                .map(|&c| iff(unbar(c, a), unbar(c, b)))
                .collect();
            parts.push(iff(atom("pad", a), atom("pad", b)));
            next_n(offset + i, and_all(parts))
        }))
    }

    fn bar_shift(&self, offset: usize, a: &str, b: &str) -> Formula {
        and_all((0..self.l - 1).map(|i| {
            iff(
                next_n(offset + i, self.any_bar(a)),
                next_n(offset + i + 1, self.any_bar(b)),
            )
        }))
    }

    fn last(&self, offset: usize, v: &str) -> Formula {
        or_all((0..self.l).map(|i| {
            let bar = next_n(offset + i, self.any_bar(v));
            if i + 1 == self.l {
                bar
            } else {
                and(bar, next_n(offset + i + 1, atom("pad", v)))
            }
        }))
    }

    fn final_(&self, v: &str) -> Formula {
        and_all([
            self.last(0, v),
            self.last(self.l, v),
            self.same_rank(1, v, 2, v),
        ])
    }

    fn succ(&self, a: &str, b: &str) -> Formula {
        let keep = |off: usize, comp: u8| {
            and_all([
                self.letter_eq(off, a, b),
                self.bar_shift(off, a, b),
                self.same_rank(comp, a, comp, b),
            ])
        };
        let restart =
            |off: usize, comp: u8| and(next_n(off, self.any_bar(b)), self.inc(comp, a, comp, b));
        let (la, lb) = (self.last(0, a), self.last(self.l, a));
        or_all([
            and_all([
                not(la.clone()),
                not(lb.clone()),
                keep(0, 1),
                keep(self.l, 2),
            ]),
            and_all([la.clone(), not(lb.clone()), restart(0, 1), keep(self.l, 2)]),
            and_all([not(la.clone()), lb.clone(), keep(0, 1), restart(self.l, 2)]),
            and_all([la, lb, restart(0, 1), restart(self.l, 2)]),
        ])
    }

    fn same_bar_letter(&self, v: &str) -> Formula {
        and_all(self.props.letters.iter().map(|&c| {
            let b = PcpProps::bar(c);
            let first = or_all((0..self.l).map(|i| self.at(i, &b, v)));
            let second = or_all((0..self.l).map(|i| self.at(self.l + i, &b, v)));
            iff(first, second)
        }))
    }

    fn initial(&self, v: &str) -> Formula {
        let start = or_all(
            self.p
                .pairs
                .iter()
                .map(|(u, w)| and(self.window(0, u, 0, v), self.window(self.l, w, 0, v))),
        );
        and_all([
            self.type_two(v),
            start,
            next_n(2 * self.l, and(atom("p00", v), next(atom("end", v)))),
        ])
    }
}

/// The requirement sentences over a solution-encoding model, prenexed, with
/// the length bound `k`.
pub fn encode_pcp(p: &PcpInstance) -> Result<(Sentence, usize)> {
    let e = Enc {
        p,
        props: PcpProps::new(p),
        l: p.width(),
    };
    let v = Var::new;
    let reqs = vec![
        forall(&v("a"), e.exactly_one("a")),
        forall(&v("a"), or(e.type_one("a"), e.type_two("a"))),
        forall(
            &v("a"),
            forall(
                &v("b"),
                implies(
                    and_all([
                        e.type_one("a"),
                        e.type_one("b"),
                        e.same_rank(0, "a", 0, "b"),
                    ]),
                    always(and_all(
                        e.props
                            .all()
                            .iter()
                            .map(|x| iff(atom(x.name(), "a"), atom(x.name(), "b"))),
                    )),
                ),
            ),
        ),
        forall(
            &v("a"),
            exists(
                &v("b"),
                implies(
                    and(e.type_one("a"), eventually(atom("1", "a"))),
                    and(e.type_one("b"), e.inc(0, "b", 0, "a")),
                ),
            ),
        ),
        exists(&v("a"), e.initial("a")),
        forall(
            &v("a"),
            exists(
                &v("b"),
                implies(
                    e.type_two("a"),
                    or(e.final_("a"), and(e.type_two("b"), e.succ("a", "b"))),
                ),
            ),
        ),
        forall(
            &v("a"),
            exists(
                &v("b"),
                exists(
                    &v("c"),
                    implies(
                        e.type_two("a"),
                        and_all([
                            e.type_one("b"),
                            e.letter_eq(0, "a", "b"),
                            e.same_rank(1, "a", 0, "b"),
                            e.type_one("c"),
                            e.letter_eq(e.l, "a", "c"),
                            e.same_rank(2, "a", 0, "c"),
                        ]),
                    ),
                ),
            ),
        ),
        forall(&v("a"), implies(e.type_two("a"), e.same_bar_letter("a"))),
    ];
    Ok((prenex(&and_all(reqs))?, p.bound()))
}
