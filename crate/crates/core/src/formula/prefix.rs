use std::fmt;

use super::{Quantifier, Sentence};

/// Run-length encoded quantifier prefix, e.g. `∀2∃1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PrefixPattern {
    pub runs: Vec<(Quantifier, usize)>,
}

pub fn classify_prefix(s: &Sentence) -> PrefixPattern {
    PrefixPattern::from_kinds(&s.kinds())
}

impl PrefixPattern {
    pub fn from_kinds(kinds: &[Quantifier]) -> PrefixPattern {
        let mut runs: Vec<(Quantifier, usize)> = Vec::new();
        for &q in kinds {
            match runs.last_mut() {
                Some((k, n)) if *k == q => *n += 1,
                _ => runs.push((q, 1)),
            }
        }
        PrefixPattern { runs }
    }

    /// Expands back to the sequence of quantifier kinds.
    pub fn kinds(&self) -> Vec<Quantifier> {
        self.runs
            .iter()
            .flat_map(|&(q, n)| std::iter::repeat(q).take(n))
            .collect()
    }

    /// Parses the run-length string produced by `Display`.
    pub fn parse(text: &str) -> Option<PrefixPattern> {
        let mut runs = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            let q = match c {
                '∀' => Quantifier::Forall,
                '∃' => Quantifier::Exists,
                _ => return None,
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let n: usize = digits.parse().ok()?;
            if n == 0 {
                return None;
            }
            runs.push((q, n));
        }
        Some(PrefixPattern { runs })
    }

    pub fn count(&self, q: Quantifier) -> usize {
        self.runs.iter().filter(|r| r.0 == q).map(|r| r.1).sum()
    }

    /// Matches `Q1* Q2* ... ` for the given sequence of kinds, each block possibly empty.
    pub fn matches_blocks(&self, blocks: &[Quantifier]) -> bool {
        let mut i = 0;
        for &(q, _) in &self.runs {
            while i < blocks.len() && blocks[i] != q {
                i += 1;
            }
            if i == blocks.len() {
                return false;
            }
            i += 1;
        }
        true
    }

    pub fn is_alternation_free(&self) -> bool {
        self.runs.len() <= 1
    }

    pub fn is_exists_star(&self) -> bool {
        self.count(Quantifier::Forall) == 0
    }

    pub fn is_forall_star(&self) -> bool {
        self.count(Quantifier::Exists) == 0
    }

    /// `∃*∀*`.
    pub fn is_exists_forall(&self) -> bool {
        self.matches_blocks(&[Quantifier::Exists, Quantifier::Forall])
    }

    /// `∀*∃*`.
    pub fn is_forall_exists(&self) -> bool {
        self.matches_blocks(&[Quantifier::Forall, Quantifier::Exists])
    }

    /// `∃*∀∃*` with at most one universal.
    pub fn is_exists_forall_exists(&self) -> bool {
        self.count(Quantifier::Forall) <= 1
            && self.matches_blocks(&[Quantifier::Exists, Quantifier::Forall, Quantifier::Exists])
    }
}

impl fmt::Display for PrefixPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, n) in &self.runs {
            write!(f, "{}{}", q.symbol(), n)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sentence;

    fn pat(s: &str) -> PrefixPattern {
        classify_prefix(&parse_sentence(s).unwrap())
    }

    #[test]
    fn examples() {
        assert_eq!(
            pat("forall p. forall q. exists t. a[p] & a[q] & a[t]").to_string(),
            "∀2∃1"
        );
        assert_eq!(pat("exists t1. exists t2. a[t1] & a[t2]").to_string(), "∃2");
        assert_eq!(pat("true").to_string(), "");
    }

    #[test]
    fn roundtrip_and_predicates() {
        use Quantifier::*;
        let kinds = vec![Exists, Exists, Forall, Exists];
        let p = PrefixPattern::from_kinds(&kinds);
        assert_eq!(PrefixPattern::parse(&p.to_string()).unwrap(), p);
        assert_eq!(p.kinds(), kinds);
        assert!(p.is_exists_forall_exists());
        assert!(!p.is_exists_forall());
        assert!(!p.is_forall_exists());
        let q = PrefixPattern::from_kinds(&[Forall, Forall, Exists]);
        assert!(q.is_forall_exists());
        assert!(!q.is_exists_forall_exists());
        assert!(PrefixPattern::default().is_exists_forall());
        assert_eq!(PrefixPattern::parse(""), Some(PrefixPattern::default()));
        assert_eq!(PrefixPattern::parse("∀0"), None);
    }
}
