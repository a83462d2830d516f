use super::depth2::bump;
use super::used_vars;
use crate::error::{Error, Result};
use crate::formula::{
    and, and_all, eventually, fresh_var, implies, Formula, Prop, Quantifier, Sentence, Var,
};
use crate::semantics::{eval_formula, eval_sentence, FiniteTraceModel, LassoTrace};

/// Index of the first existential quantifier with a universal after it.
pub fn critical_index(s: &Sentence) -> Option<usize> {
    let kinds = s.kinds();
    let last_forall = kinds.iter().rposition(|q| *q == Quantifier::Forall)?;
    kinds[..last_forall]
        .iter()
        .position(|q| *q == Quantifier::Exists)
}

fn marks(round: usize, n: usize) -> Vec<Prop> {
    (1..=n + 1)
        .map(|i| {
            if round == 1 {
                Prop::new(&format!("@m{i}"))
            } else {
                Prop::new(&format!("@r{round}m{i}"))
            }
        })
        .collect()
}

fn marked(ms: &[Prop], vs: &[Var]) -> Formula {
    eventually(and_all(
        ms.iter()
            .zip(vs)
            .map(|(m, v)| Formula::Atom(m.clone(), v.clone())),
    ))
}

fn round(s: &Sentence, c: usize, r: usize) -> Sentence {
    let mut used = used_vars(s);
    let orig: Vec<Var> = s.vars()[..=c].to_vec();
    let shadow: Vec<Var> = orig
        .iter()
        .map(|v| fresh_var(&format!("{}_s", v.name()), &mut used))
        .collect();
    let ms = marks(r, c);
    let mut prefix: Vec<(Quantifier, Var)> = shadow[..c]
        .iter()
        .chain(&orig)
        .map(|v| (Quantifier::Forall, v.clone()))
        .collect();
    prefix.extend(s.prefix[c + 1..].iter().cloned());
    prefix.push((Quantifier::Exists, shadow[c].clone()));
    let matrix = and(
        marked(&ms, &shadow),
        implies(marked(&ms, &orig), s.matrix.clone()),
    );
    Sentence::new(prefix, matrix).expect("closed by construction")
}

/// Removes critical existentials one at a time by materializing the Skolem
/// function with marker propositions; the result has a `∀*∃*` prefix.
pub fn to_forall_exists(s: &Sentence) -> Result<Sentence> {
    let mut cur = s.clone();
    let mut r = 1;
    while let Some(c) = critical_index(&cur) {
        cur = round(&cur, c, r);
        r += 1;
    }
    Ok(cur)
}

/// Model of `to_forall_exists(s)` built from a finite model of `s`: each
/// round places the marks of every Skolem tuple at its own position past all
/// stems.
pub fn skolem_model(t: &FiniteTraceModel, s: &Sentence) -> Result<FiniteTraceModel> {
    if !eval_sentence(s, t)? {
        return Err(Error::NotAModel);
    }
    let mut cur = s.clone();
    let mut model = t.clone();
    let mut r = 1;
    while let Some(c) = critical_index(&cur) {
        model = skolem_round(&model, &cur, c, r)?;
        cur = round(&cur, c, r);
        r += 1;
    }
    if !eval_sentence(&cur, &model)? {
        return Err(Error::Invalid(
            "internal: Skolem model failed verification".into(),
        ));
    }
    Ok(model)
}

fn skolem_round(
    t: &FiniteTraceModel,
    s: &Sentence,
    c: usize,
    r: usize,
) -> Result<FiniteTraceModel> {
    let ts = t.to_vec();
    let vars = s.vars();
    let rest = Sentence {
        prefix: s.prefix[c + 1..].to_vec(),
        matrix: s.matrix.clone(),
    }
    .to_formula();
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let mut idx = vec![0usize; c];
    loop {
        let mut pi: Vec<(Var, LassoTrace)> = idx
            .iter()
            .enumerate()
            .map(|(i, &k)| (vars[i].clone(), ts[k].clone()))
            .collect();
        let mut found = None;
        for (w, tw) in ts.iter().enumerate() {
            pi.push((vars[c].clone(), tw.clone()));
            let ok = eval_formula(&rest, t, &pi)?;
            pi.pop();
            if ok {
                found = Some(w);
                break;
            }
        }
        let w = found.ok_or(Error::NotAModel)?;
        let mut tup = idx.clone();
        tup.push(w);
        tuples.push(tup);
        if !bump(&mut idx, ts.len()) {
            break;
        }
    }
    let base = ts.iter().map(|x| x.stem().len()).max().unwrap_or(0);
    let ms = marks(r, c);
    let out = ts.iter().enumerate().map(|(k, tr)| {
        let u = tr.unrolled(base + tuples.len(), 1);
        let mut stem = u.stem().to_vec();
        for (j, tup) in tuples.iter().enumerate() {
            for (i, &comp) in tup.iter().enumerate() {
                if comp == k {
                    stem[base + j].insert(ms[i].clone());
                }
            }
        }
        LassoTrace::raw(stem, u.lp().to_vec())
    });
    FiniteTraceModel::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::classify_prefix;
    use crate::semantics::valuation;
    use crate::syntax::parse_sentence;

    #[test]
    fn rounds() {
        let s = parse_sentence("forall p. exists q. G (a[p] <-> a[q])").unwrap();
        assert_eq!(to_forall_exists(&s).unwrap(), s);
        let s = parse_sentence("exists p. forall q. F (a[p] & !a[q]) | G a[q]").unwrap();
        let o = to_forall_exists(&s).unwrap();
        assert!(classify_prefix(&o).is_forall_exists());
        assert!(o.props().contains(&Prop::new("@m1")));
        let s = parse_sentence("exists p. forall q. exists u. forall v. a[p] | a[q] | a[u] | a[v]")
            .unwrap();
        let o = to_forall_exists(&s).unwrap();
        assert!(o.props().contains(&Prop::new("@r2m3")));
        assert!(critical_index(&o).is_none());
    }

    #[test]
    fn transport() {
        let s = parse_sentence("exists p. forall q. G (a[q] -> a[p])").unwrap();
        let t = FiniteTraceModel::new([
            LassoTrace::constant(valuation(&["a"])),
            LassoTrace::constant(valuation(&[])),
        ])
        .unwrap();
        let m = skolem_model(&t, &s).unwrap();
        assert_eq!(m.len(), 2);
        let s = parse_sentence("forall p. exists q. forall u. F (a[p] <-> !a[q]) | a[u]").unwrap();
        skolem_model(&t, &s).unwrap();
    }
}
