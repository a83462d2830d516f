use super::{Formula, Sentence};

/// Temporal-depth-one fragments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragment {
    /// Boolean combinations of `F β`, `G β` and propositional `β`.
    FG1,
    /// `FG1` plus `X^n β` for propositional `β`.
    FGX1,
}

pub fn in_fragment(s: &Sentence, which: Fragment) -> bool {
    matrix_in_fragment(&s.matrix, which)
}

pub fn matrix_in_fragment(f: &Formula, which: Fragment) -> bool {
    use Formula::*;
    match f {
        Exists(_, _) | Forall(_, _) | Until(_, _) => false,
        True | False | Atom(_, _) => true,
        Not(a) => matrix_in_fragment(a, which),
        And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Xor(a, b) => {
            matrix_in_fragment(a, which) && matrix_in_fragment(b, which)
        }
        Eventually(a) | Always(a) => is_propositional(a),
        Next(_) => which == Fragment::FGX1 && is_propositional(strip_next(f).1),
    }
}

/// No temporal operators and no quantifiers.
pub fn is_propositional(f: &Formula) -> bool {
    !f.is_temporal() && !f.is_quantifier() && f.children().into_iter().all(is_propositional)
}

/// Splits `X^k g` into `(k, g)` with `g` not an `X`.
pub fn strip_next(f: &Formula) -> (usize, &Formula) {
    let mut k = 0;
    let mut cur = f;
    while let Formula::Next(a) = cur {
        k += 1;
        cur = a;
    }
    (k, cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sentence;

    fn frag(s: &str) -> (bool, bool) {
        let s = parse_sentence(s).unwrap();
        (
            in_fragment(&s, Fragment::FG1),
            in_fragment(&s, Fragment::FGX1),
        )
    }

    #[test]
    fn examples() {
        assert_eq!(
            frag("forall p. exists q. G (a[p] -> a[q]) & F (!a[p] & a[q])"),
            (true, true)
        );
        assert_eq!(frag("forall p. X X a[p]"), (false, true));
        assert_eq!(frag("forall p. F G a[p]"), (false, false));
        assert_eq!(frag("forall p. a[p] U a[p]"), (false, false));
        assert_eq!(frag("forall p. X F a[p]"), (false, false));
        assert_eq!(frag("forall p. a[p] & !G (a[p] | b[p])"), (true, true));
    }
}
