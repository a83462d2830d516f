use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formula::{and_all, or_all, Formula, Quantifier, Sentence, Var};

/// Default node budget for `expand_quantifiers`.
pub const DEFAULT_EXPAND_CAP: usize = 1 << 22;

/// `∃x1…∃xk. φ̄` where every `∀π` becomes a `k`-fold conjunction and every
/// `∃π` a `k`-fold disjunction over the `xi`.
pub fn expand_quantifiers(s: &Sentence, k: usize, cap: usize) -> Result<Sentence> {
    let k = k.max(1);
    let n = s.prefix.len() as u32;
    let nodes = s.matrix.node_count() as u128 * (k as u128).saturating_pow(n);
    if nodes > cap as u128 {
        return Err(Error::SizeBlowup {
            size: nodes.min(usize::MAX as u128) as usize,
            cap,
        });
    }
    let xs: Vec<Var> = (1..=k).map(|i| Var::new(&format!("x{i}"))).collect();
    let mut env = BTreeMap::new();
    let matrix = go(s, 0, &xs, &mut env);
    Sentence::new(
        xs.into_iter().map(|x| (Quantifier::Exists, x)).collect(),
        matrix,
    )
}

fn go(s: &Sentence, i: usize, xs: &[Var], env: &mut BTreeMap<Var, Var>) -> Formula {
    let Some((q, v)) = s.prefix.get(i) else {
        return s
            .matrix
            .rename_vars(&|w| env.get(w).cloned().unwrap_or_else(|| w.clone()));
    };
    let parts: Vec<Formula> = xs
        .iter()
        .map(|x| {
            env.insert(v.clone(), x.clone());
            let f = go(s, i + 1, xs, env);
            env.remove(v);
            f
        })
        .collect();
    match q {
        Quantifier::Forall => and_all(parts),
        Quantifier::Exists => or_all(parts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sentence;

    #[test]
    fn examples() {
        let s = parse_sentence("forall p. G a[p]").unwrap();
        let e = expand_quantifiers(&s, 2, DEFAULT_EXPAND_CAP).unwrap();
        assert_eq!(e.to_string(), "exists x1. exists x2. G a[x1] & G a[x2]");
        let s = parse_sentence("forall x2. exists x1. F (a[x2] & !a[x1])").unwrap();
        let e = expand_quantifiers(&s, 2, DEFAULT_EXPAND_CAP).unwrap();
        assert_eq!(
            e.to_string(),
            "exists x1. exists x2. (F (a[x1] & !a[x1]) | F (a[x1] & !a[x2])) & (F (a[x2] & !a[x1]) | F (a[x2] & !a[x2]))"
        );
        assert!(matches!(
            expand_quantifiers(&s, 2, 3),
            Err(Error::SizeBlowup { .. })
        ));
    }
}
