use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hyperltl::automata::{ltl_sat_capped, unzip, zip_exists, ComplementLimits};
use hyperltl::decide::{
    decide_complete, fragment_witness_chain, sat_bounded_kripke, sat_bounded_periodic,
    sat_bounded_traces, sat_fragment, Budget, Certificate, FragmentCertificate, Outcome, Verdict,
};
use hyperltl::encode::{
    encode_minsky, encode_pcp, encode_starfree, minsky_run_model, pcp_solution_model,
    starfree_sample, PcpInstance, StarFreeExpr,
};
use hyperltl::error::Error;
use hyperltl::formula::{
    alternation_depth, classify_prefix, in_fragment, prenex, size, temporal_depth, Fragment,
    Sentence,
};
use hyperltl::modelcheck::modelcheck_with;
use hyperltl::semantics::{eval_sentence_with_cap, FiniteTraceModel};
use hyperltl::syntax::{
    parse_formula, parse_kripke, parse_minsky, parse_pcp, parse_sentence, parse_trace_model,
    print_kripke, print_sentence, print_trace, print_trace_model,
};
use hyperltl::transform::{
    eliminate_x, merge_universals, normalize_forall2_exists, reduce_depth2, to_forall_exists,
};

#[derive(Parser)]
#[command(name = "hyperltl", version, about = "HyperLTL satisfiability and model checking")]
struct Cli {
    /// Emit one JSON record instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for the deciders (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest combined loop period during evaluation.
    #[arg(long, global = true, default_value_t = Budget::default().period_cap)]
    period_cap: u64,
    /// State cap for the LTL tableau.
    #[arg(long, global = true, default_value_t = Budget::default().tableau_states)]
    tableau_states: usize,
    /// Node cap for quantifier expansion.
    #[arg(long, global = true, default_value_t = Budget::default().expand_nodes)]
    expand_nodes: usize,
    /// Candidate models or structures examined by bounded search.
    #[arg(long, global = true, default_value_t = Budget::default().candidates)]
    candidates: u64,
    /// Largest lasso universe for periodic search.
    #[arg(long, global = true, default_value_t = Budget::default().universe)]
    universe: usize,
    /// Input size cap for rank-based complementation.
    #[arg(long, global = true, default_value_t = ComplementLimits::default().rank_states)]
    rank_states: usize,
    /// Output state cap for complementation.
    #[arg(long, global = true, default_value_t = ComplementLimits::default().output_states)]
    complement_states: usize,
    /// Abstract members enumerated by the fragment decider.
    #[arg(long, global = true, default_value_t = Budget::default().fragment_members)]
    fragment_members: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            period_cap: self.period_cap,
            tableau_states: self.tableau_states,
            expand_nodes: self.expand_nodes,
            candidates: self.candidates,
            universe: self.universe,
            complement: ComplementLimits {
                rank_states: self.rank_states,
                output_states: self.complement_states,
                ..ComplementLimits::default()
            },
            fragment_members: self.fragment_members,
            ..Budget::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and pretty-print a sentence.
    Parse { file: PathBuf },
    /// Temporal depth, alternation depth, prefix class and fragment flags.
    Measure { file: PathBuf },
    /// Apply a satisfiability-preserving transformation.
    Transform {
        #[arg(long, value_enum)]
        pass: Pass,
        /// Skip the depth reduction when temporal depth is already at most 2.
        #[arg(long)]
        skip_if_shallow: bool,
        file: PathBuf,
    },
    /// Evaluate a sentence on a finite trace model.
    Eval {
        #[arg(long)]
        model: PathBuf,
        file: PathBuf,
    },
    /// Decide satisfiability.
    Sat {
        #[arg(long, value_enum, default_value = "auto")]
        mode: Mode,
        /// Bound for the bounded modes (traces, lasso length, states).
        #[arg(long)]
        bound: Option<usize>,
        /// Depth of the witness chain written for fragment certificates.
        #[arg(long, default_value_t = 3)]
        chain_depth: usize,
        /// Directory for certificate files.
        #[arg(long)]
        cert_dir: Option<PathBuf>,
        file: PathBuf,
    },
    /// Model-check a Kripke structure.
    Mc {
        #[arg(long)]
        kripke: PathBuf,
        file: PathBuf,
    },
    /// Generate hard instances from PCP, Minsky machines or star-free expressions.
    Encode {
        #[arg(value_enum)]
        kind: EncodeKind,
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the reference model.
        #[arg(long)]
        ref_model: Option<PathBuf>,
        /// PCP solution as 1-based indices, e.g. `2,1,2`; searched for when absent.
        #[arg(long, value_delimiter = ',')]
        solution: Option<Vec<usize>>,
        /// Minsky run length for the reference model.
        #[arg(long, default_value_t = 0)]
        steps: usize,
        /// Word length bound of the star-free reference sample.
        #[arg(long, default_value_t = 3)]
        sample: usize,
        /// Normalize Minsky encodings to a ∀²∃* prefix.
        #[arg(long)]
        normalize: bool,
    },
    /// Single-trace LTL backend.
    Ltl {
        #[command(subcommand)]
        cmd: LtlCmd,
    },
}

#[derive(Subcommand)]
enum LtlCmd {
    /// Satisfiability of a quantifier-free or purely existential formula.
    Sat { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Pass {
    Prenex,
    Depth2,
    ForallExists,
    Forall2,
    Xelim,
    Normalize,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Mode {
    Auto,
    Traces,
    Periodic,
    Kripke,
    Fragment,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodeKind {
    Pcp,
    Minsky,
    Starfree,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

type Res<T> = Result<T, CliError>;

/// Text for humans, a JSON record for `--json`, and the exit code.
struct Report {
    text: String,
    record: Value,
    code: u8,
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Res<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn sentence(path: &Path) -> Res<Sentence> {
    Ok(parse_sentence(&read(path)?)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let json = cli.json;
    match run(cli) {
        Ok(r) => {
            if json {
                println!("{}", r.record);
            } else {
                print!("{}", r.text);
            }
            ExitCode::from(r.code)
        }
        Err(e) => {
            if json {
                println!("{}", json!({"outcome": "error", "error": e.to_string()}));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Res<Report> {
    let budget = cli.budget.budget();
    match cli.cmd {
        Cmd::Parse { file } => {
            let s = sentence(&file)?;
            let text = print_sentence(&s);
            Ok(Report {
                record: json!({"command": "parse", "outcome": "parsed", "sentence": text}),
                text: format!("{text}\n"),
                code: 0,
            })
        }
        Cmd::Measure { file } => measure(&file),
        Cmd::Transform {
            pass,
            skip_if_shallow,
            file,
        } => {
            let s = match pass {
                Pass::Prenex => prenex(&parse_formula(&read(&file)?)?)?,
                Pass::Depth2 => reduce_depth2(&sentence(&file)?),
                Pass::ForallExists => to_forall_exists(&sentence(&file)?)?,
                Pass::Forall2 => merge_universals(&sentence(&file)?)?,
                Pass::Xelim => eliminate_x(&sentence(&file)?)?,
                Pass::Normalize => normalize_forall2_exists(&sentence(&file)?, skip_if_shallow)?,
            };
            let text = print_sentence(&s);
            Ok(Report {
                record: json!({
                    "command": "transform",
                    "outcome": "ok",
                    "sentence": text,
                    "prefix": classify_prefix(&s).to_string(),
                    "td": temporal_depth(&s.matrix),
                }),
                text: format!("{text}\n"),
                code: 0,
            })
        }
        Cmd::Eval { model, file } => {
            let s = sentence(&file)?;
            let t = parse_trace_model(&read(&model)?)?;
            let holds = eval_sentence_with_cap(&s, &t, budget.period_cap)?;
            Ok(Report {
                text: format!("{holds}\n"),
                record: json!({"command": "eval", "outcome": holds, "traces": t.len()}),
                code: if holds { 0 } else { 1 },
            })
        }
        Cmd::Sat {
            mode,
            bound,
            chain_depth,
            cert_dir,
            file,
        } => {
            let budget = Budget {
                chain_depth,
                ..budget
            };
            sat(&file, mode, bound, &budget, cert_dir.as_deref())
        }
        Cmd::Mc { kripke, file } => {
            let s = sentence(&file)?;
            let k = parse_kripke(&read(&kripke)?)?;
            let (holds, stats) = modelcheck_with(&k, &s, &budget.complement)?;
            let word = if holds { "holds" } else { "fails" };
            Ok(Report {
                text: format!("{word}\n"),
                record: json!({
                    "command": "mc",
                    "outcome": word,
                    "states": k.len(),
                    "complementations": stats.complementations,
                    "max_states": stats.max_states,
                }),
                code: if holds { 0 } else { 1 },
            })
        }
        Cmd::Encode {
            kind,
            input,
            output,
            ref_model,
            solution,
            steps,
            sample,
            normalize,
        } => encode(kind, &input, &output, ref_model.as_deref(), solution, steps, sample, normalize),
        Cmd::Ltl {
            cmd: LtlCmd::Sat { file },
        } => ltl(&file, &budget),
    }
}

fn measure(file: &Path) -> Res<Report> {
    let s = sentence(file)?;
    let td = temporal_depth(&s.matrix);
    let ad = alternation_depth(&s);
    let prefix = classify_prefix(&s).to_string();
    let fg1 = in_fragment(&s, Fragment::FG1);
    let fgx1 = in_fragment(&s, Fragment::FGX1);
    let sz = size(&s.matrix);
    Ok(Report {
        text: format!("td={td}\nad={ad}\nprefix={prefix}\nFG1={fg1}\nFGX1={fgx1}\nsize={sz}\n"),
        record: json!({
            "command": "measure",
            "outcome": "ok",
            "td": td,
            "ad": ad,
            "prefix": prefix,
            "FG1": fg1,
            "FGX1": fgx1,
            "size": sz,
        }),
        code: 0,
    })
}

fn sat(
    file: &Path,
    mode: Mode,
    bound: Option<usize>,
    budget: &Budget,
    cert_dir: Option<&Path>,
) -> Res<Report> {
    let s = sentence(file)?;
    let pat = classify_prefix(&s);
    let need_bound = |default: usize| bound.unwrap_or(default).max(1);
    let (used, v) = match mode {
        Mode::Auto if pat.is_exists_forall() => ("complete", decide_complete(&s, budget)?),
        Mode::Auto if pat.is_exists_forall_exists() && in_fragment(&s, Fragment::FGX1) => {
            ("fragment", sat_fragment(&s, budget)?)
        }
        Mode::Auto => {
            return Err(CliError::Usage(format!(
                "no complete procedure for prefix {pat}; choose --mode traces, periodic or kripke"
            )))
        }
        Mode::Traces => ("traces", sat_bounded_traces(&s, need_bound(2), budget)?),
        Mode::Periodic => ("periodic", sat_bounded_periodic(&s, need_bound(3), budget)?),
        Mode::Kripke => ("kripke", sat_bounded_kripke(&s, need_bound(2), budget)?),
        Mode::Fragment => ("fragment", sat_fragment(&s, budget)?),
    };
    let bound_used = match used {
        "traces" => Some(need_bound(2)),
        "periodic" => Some(need_bound(3)),
        "kripke" => Some(need_bound(2)),
        _ => None,
    };
    let stem = file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sentence".into());
    let body = v.certificate().map(|c| render_certificate(c, budget.chain_depth)).transpose()?;
    let mut cert_path = None;
    if let (Some(dir), Some(c), Some((_, text))) = (cert_dir, v.certificate(), &body) {
        let ext = match c {
            Certificate::Traces(_) => "trc",
            Certificate::Kripke(_) => "kst",
            Certificate::Fragment(_) => "frag",
        };
        let path = dir.join(format!("{stem}.{ext}"));
        write(&path, text)?;
        cert_path = Some(path);
    }
    let mut text = format!("{}\n", v.label());
    match &v.outcome {
        Outcome::UnsatWithinBound(k) => text.push_str(&format!("# no model within bound {k}\n")),
        Outcome::Unknown(why) => text.push_str(&format!("# {why}\n")),
        _ => {}
    }
    match (&cert_path, &body) {
        (Some(p), _) => text.push_str(&format!("# certificate written to {}\n", p.display())),
        (None, Some((_, b))) => text.push_str(b),
        _ => {}
    }
    text.push_str(&format!(
        "# procedure {used}, {} candidates, {:.3}s\n",
        v.stats.candidates,
        v.stats.elapsed.as_secs_f64()
    ));
    let record = json!({
        "command": "sat",
        "outcome": v.label(),
        "procedure": used,
        "bound": bound_used,
        "reason": match &v.outcome { Outcome::Unknown(w) => Some(w.clone()), _ => None },
        "certificate_kind": body.as_ref().map(|(k, _)| *k),
        "certificate": cert_path.as_ref().map(|p| p.display().to_string()),
        "chain_depth": matches!(v.certificate(), Some(Certificate::Fragment(_))).then_some(budget.chain_depth),
        "stats": {
            "candidates": v.stats.candidates,
            "elapsed_ms": v.stats.elapsed.as_millis() as u64,
        },
    });
    Ok(Report {
        text,
        record,
        code: exit_code(&v),
    })
}

fn exit_code(v: &Verdict) -> u8 {
    v.exit_code() as u8
}

fn render_certificate(c: &Certificate, depth: usize) -> Res<(&'static str, String)> {
    Ok(match c {
        Certificate::Traces(t) => ("traces", print_trace_model(t)),
        Certificate::Kripke(k) => ("kripke", print_kripke(k)),
        Certificate::Fragment(f) => ("fragment", render_fragment(f, depth)?),
    })
}

fn render_fragment(c: &FragmentCertificate, depth: usize) -> Res<String> {
    let chain = fragment_witness_chain(c, depth)?;
    let mut out = format!("# sentence: {}\n", print_sentence(&c.sentence));
    out.push_str(&c.render());
    for (i, t) in chain.base.iter().enumerate() {
        out.push_str(&format!("base b{i} : {}\n", print_trace(t)));
    }
    for step in &chain.steps {
        out.push_str(&format!("step {} pi : {}\n", step.level, print_trace(&step.pi)));
        for (i, w) in step.witnesses.iter().enumerate() {
            out.push_str(&format!("  witness w{i} : {}\n", print_trace(w)));
        }
    }
    Ok(out)
}

/// Shortest solution with at most `max` indices, by breadth-first search.
fn find_pcp_solution(p: &PcpInstance, max: usize) -> Option<Vec<usize>> {
    let n = p.pairs().len();
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for s in &frontier {
            for i in 1..=n {
                let mut t = s.clone();
                t.push(i);
                if p.is_solution(&t) {
                    return Some(t);
                }
                let (u, v): (String, String) = t.iter().fold(
                    (String::new(), String::new()),
                    |(mut u, mut v), &i| {
                        u.push_str(&p.pairs()[i - 1].0);
                        v.push_str(&p.pairs()[i - 1].1);
                        (u, v)
                    },
                );
                if u.starts_with(&v) || v.starts_with(&u) {
                    next.push(t);
                }
            }
        }
        frontier = next;
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn encode(
    kind: EncodeKind,
    input: &Path,
    output: &Path,
    ref_model: Option<&Path>,
    solution: Option<Vec<usize>>,
    steps: usize,
    sample: usize,
    normalize: bool,
) -> Res<Report> {
    let text = read(input)?;
    let (s, model, extra): (Sentence, Option<FiniteTraceModel>, Value) = match kind {
        EncodeKind::Pcp => {
            let p = parse_pcp(&text)?;
            let (s, k) = encode_pcp(&p)?;
            let model = match ref_model {
                None => None,
                Some(_) => {
                    let sol = match solution {
                        Some(sol) => sol,
                        None => find_pcp_solution(&p, 8).ok_or_else(|| {
                            CliError::Usage("no solution with at most 8 indices; pass --solution".into())
                        })?,
                    };
                    Some(pcp_solution_model(&p, &sol)?)
                }
            };
            (s, model, json!({"k": k}))
        }
        EncodeKind::Minsky => {
            let m = parse_minsky(&text)?;
            let mut s = encode_minsky(&m)?;
            if normalize {
                s = normalize_forall2_exists(&s, false)?;
            }
            let model = ref_model
                .map(|_| FiniteTraceModel::new(minsky_run_model(&m, steps)))
                .transpose()?;
            (s, model, json!({"steps": steps}))
        }
        EncodeKind::Starfree => {
            let e = StarFreeExpr::parse(text.trim())
                .ok_or_else(|| CliError::Usage(format!("{}: not a star-free expression", input.display())))?;
            let s = encode_starfree(&e)?;
            let model = ref_model.map(|_| starfree_sample(sample));
            (s, model, json!({"sample": sample}))
        }
    };
    let printed = print_sentence(&s);
    write(output, &format!("{printed}\n"))?;
    if let (Some(path), Some(m)) = (ref_model, &model) {
        write(path, &print_trace_model(m))?;
    }
    let mut text = format!("wrote {}\n", output.display());
    if let Some(path) = ref_model {
        text.push_str(&format!("wrote {}\n", path.display()));
    }
    Ok(Report {
        text,
        record: json!({
            "command": "encode",
            "outcome": "ok",
            "output": output.display().to_string(),
            "ref_model": ref_model.map(|p| p.display().to_string()),
            "size": size(&s.matrix),
            "prefix": classify_prefix(&s).to_string(),
            "details": extra,
        }),
        code: 0,
    })
}

fn ltl(file: &Path, budget: &Budget) -> Res<Report> {
    let f = parse_formula(&read(file)?)?;
    let (traces, sat) = if f.has_quantifier() {
        let s = prenex(&f)?;
        let z = zip_exists(&s)?;
        match ltl_sat_capped(&z, budget.tableau_states)? {
            Some(t) => (
                unzip(&s, &t)
                    .into_iter()
                    .map(|(v, t)| (v.name().to_string(), print_trace(&t)))
                    .collect(),
                true,
            ),
            None => (Vec::new(), false),
        }
    } else {
        match ltl_sat_capped(&f, budget.tableau_states)? {
            Some(t) => {
                let name = f.free_vars().into_iter().next().map_or("t".to_string(), |v| v.name().to_string());
                (vec![(name, print_trace(&t))], true)
            }
            None => (Vec::new(), false),
        }
    };
    let mut text = format!("{}\n", if sat { "SAT" } else { "UNSAT" });
    for (name, t) in &traces {
        text.push_str(&format!("trace {name} : {t}\n"));
    }
    let record = json!({
        "command": "ltl",
        "outcome": if sat { "SAT" } else { "UNSAT" },
        "traces": traces.iter().map(|(n, t)| json!({"var": n, "trace": t})).collect::<Vec<_>>(),
    });
    Ok(Report {
        text,
        record,
        code: if sat { 0 } else { 1 },
    })
}
