use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::Prop;

pub type Valuation = BTreeSet<Prop>;

/// Builds a valuation from proposition names.
pub fn valuation(names: &[&str]) -> Valuation {
    names.iter().map(|n| Prop::new(n)).collect()
}

/// Ultimately periodic trace `stem · loop^ω`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LassoTrace {
    stem: Vec<Valuation>,
    lp: Vec<Valuation>,
}

impl LassoTrace {
    /// Builds the canonical form of `stem · lp^ω`.
    pub fn new(stem: Vec<Valuation>, lp: Vec<Valuation>) -> Result<LassoTrace> {
        if lp.is_empty() {
            return Err(Error::EmptyLoop(String::new()));
        }
        Ok(LassoTrace::raw(stem, lp).canonical())
    }

    /// Keeps the representation as given (not canonicalized).
    pub fn raw(stem: Vec<Valuation>, lp: Vec<Valuation>) -> LassoTrace {
        assert!(!lp.is_empty(), "lasso loop must be nonempty");
        LassoTrace { stem, lp }
    }

    pub fn constant(v: Valuation) -> LassoTrace {
        LassoTrace {
            stem: vec![],
            lp: vec![v],
        }
    }

    pub fn stem(&self) -> &[Valuation] {
        &self.stem
    }

    pub fn lp(&self) -> &[Valuation] {
        &self.lp
    }

    pub fn value_at(&self, j: usize) -> &Valuation {
        if j < self.stem.len() {
            &self.stem[j]
        } else {
            &self.lp[(j - self.stem.len()) % self.lp.len()]
        }
    }

    /// Minimal loop period, then minimal stem.
    pub fn canonical(&self) -> LassoTrace {
        let n = self.lp.len();
        let period = (1..=n)
            .find(|p| n % p == 0 && (0..n).all(|i| self.lp[i] == self.lp[i % p]))
            .unwrap_or(n);
        let mut lp: Vec<Valuation> = self.lp[..period].to_vec();
        let mut stem = self.stem.clone();
        while let Some(last) = stem.last() {
            if *last == lp[lp.len() - 1] {
                stem.pop();
                lp.rotate_right(1);
            } else {
                break;
            }
        }
        LassoTrace { stem, lp }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// Same trace with the stem unrolled to at least `len` positions and the
    /// loop repeated `reps` times.
    pub fn unrolled(&self, len: usize, reps: usize) -> LassoTrace {
        let s = len.max(self.stem.len());
        let stem = (0..s).map(|j| self.value_at(j).clone()).collect();
        let lp = (0..self.lp.len() * reps.max(1))
            .map(|j| self.value_at(s + j).clone())
            .collect();
        LassoTrace { stem, lp }
    }

    /// Applies `f` to every valuation.
    pub fn map(&self, f: impl Fn(&Valuation) -> Valuation) -> LassoTrace {
        LassoTrace {
            stem: self.stem.iter().map(&f).collect(),
            lp: self.lp.iter().map(&f).collect(),
        }
        .canonical()
    }

    pub fn props(&self) -> BTreeSet<Prop> {
        self.stem
            .iter()
            .chain(&self.lp)
            .flat_map(|v| v.iter().cloned())
            .collect()
    }
}

impl fmt::Debug for LassoTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_trace(self))
    }
}

/// Nonempty, deduplicated set of canonical lasso traces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteTraceModel {
    traces: BTreeSet<LassoTrace>,
}

impl FiniteTraceModel {
    pub fn new<I: IntoIterator<Item = LassoTrace>>(traces: I) -> Result<FiniteTraceModel> {
        let traces: BTreeSet<LassoTrace> = traces.into_iter().map(|t| t.canonical()).collect();
        if traces.is_empty() {
            return Err(Error::EmptyModel);
        }
        Ok(FiniteTraceModel { traces })
    }

    pub fn traces(&self) -> impl Iterator<Item = &LassoTrace> {
        self.traces.iter()
    }

    pub fn to_vec(&self) -> Vec<LassoTrace> {
        self.traces.iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn contains(&self, t: &LassoTrace) -> bool {
        self.traces.contains(&t.canonical())
    }

    /// Restricts every valuation to `keep`.
    pub fn project(&self, keep: &BTreeSet<Prop>) -> FiniteTraceModel {
        FiniteTraceModel {
            traces: self
                .traces
                .iter()
                .map(|t| t.map(|v| v.intersection(keep).cloned().collect()))
                .collect(),
        }
    }
}

/// `lcm` of the loop lengths and the longest stem; errors past `cap`.
pub fn align(ts: &[&LassoTrace], cap: u64) -> Result<(usize, usize)> {
    let s = ts.iter().map(|t| t.stem.len()).max().unwrap_or(0);
    let mut p: u128 = 1;
    for t in ts {
        let l = t.lp.len() as u128;
        p = p / gcd(p, l) * l;
        if p > cap as u128 {
            return Err(Error::PeriodBlowup { period: p, cap });
        }
    }
    Ok((s, p as usize))
}

pub fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub const DEFAULT_PERIOD_CAP: u64 = 1_000_000;
