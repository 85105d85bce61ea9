//! The `rapt` command line.

use std::collections::BTreeSet;
use std::io::{IsTerminal, Write};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::equivalence::{check, EquivKind};
use crate::recursion::{apply_cfar, find_clusters, RecSpec};
use crate::rewriter::{normalize, Mode};
use crate::semantics::{build_lts_with, Budget, Dir, LtsOptions};
use crate::suite::{prove_axioms, SuiteOptions};
use crate::syntax::{parse_file, parse_term_in, render, render_body, render_signature, SourceFile, SyntaxError};
use crate::term::{Label, Signature, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Parser)]
#[command(name = "rapt", version, about = "Reversible true-concurrency process algebra workbench")]
pub struct Cli {
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = Budget::default().max_states)]
    pub max_states: usize,
    /// Largest history key an LTS may reach.
    #[arg(long, global = true, default_value_t = Budget::default().max_key)]
    pub max_key: u32,
    /// Pomset size bound for the pomset kinds.
    #[arg(long, global = true, default_value_t = 4)]
    pub pomset_k: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Drop the sequencing gap-fill rules from the semantics.
    #[arg(long, global = true)]
    pub strict_paper_sos: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a term or a whole file in canonical form.
    Fmt {
        /// Term text or a name from the file's [terms] section.
        term: Option<String>,
        #[arg(short, long)]
        file: Option<String>,
    },
    /// Rewrite a term to basic form.
    Normalize {
        term: String,
        #[arg(short, long)]
        file: Option<String>,
        /// Emit every rewrite step as JSON.
        #[arg(long)]
        trace: bool,
        /// Include the silent-step rules.
        #[arg(long)]
        branching: bool,
    },
    /// Explore the forward/reverse transition system of a term.
    Lts {
        term: String,
        #[arg(short, long)]
        file: Option<String>,
    },
    /// Compare two terms.
    Equiv {
        left: String,
        right: String,
        #[arg(short, long)]
        file: Option<String>,
        /// fr-step, fr-pomset, fr-hp, fr-hhp, rb-fr-step, rb-fr-pomset or rb-fr-hp.
        #[arg(short, long, default_value = "fr-step")]
        kind: String,
    },
    /// Check every shipped axiom on random closed instances.
    ProveAxioms {
        #[arg(long, default_value_t = 50)]
        instances: usize,
        /// Check the silent-step and abstraction axioms under fr-step.
        #[arg(long)]
        wrong_kind: bool,
        /// Restrict to these rule ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// List the clusters of a specification for an abstraction set.
    Cluster {
        #[arg(short, long)]
        file: String,
        /// Specification name; defaults to the only one in the file.
        #[arg(long)]
        spec: Option<String>,
        /// Labels to abstract, comma separated.
        #[arg(long, value_delimiter = ',')]
        hide: Vec<String>,
    },
    /// Apply the cluster fair abstraction rule.
    Cfar {
        #[arg(short, long)]
        file: String,
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        var: String,
        #[arg(long, value_delimiter = ',')]
        hide: Vec<String>,
    },
}

/// Error with the name of its kind, printed as `error: Kind: message`.
struct Failure {
    kind: String,
    msg: String,
}

impl Failure {
    fn new(kind: &str, msg: impl ToString) -> Failure {
        Failure { kind: kind.to_string(), msg: msg.to_string() }
    }

    /// Uses the variant name of `e` as the kind.
    fn from_err<E: std::fmt::Debug + std::fmt::Display>(e: E) -> Failure {
        let dbg = format!("{e:?}");
        let kind = dbg.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        Failure { kind, msg: e.to_string() }
    }
}

struct Env {
    out: String,
    color: bool,
}

impl Env {
    fn line(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn paint(&self, s: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}

fn load(file: Option<&str>) -> Result<SourceFile, Failure> {
    match file {
        None => Ok(SourceFile { signature: Signature::suite(), ..SourceFile::default() }),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::new("Io", format!("{path}: {e}")))?;
            parse_file(&text).map_err(Failure::from_err)
        }
    }
}

/// A named term of the file, or term text. Labels the signature lacks are
/// added to it when no file is given.
fn resolve(src: &mut SourceFile, text: &str, from_file: bool) -> Result<Term, Failure> {
    if let Some(t) = src.term(text) {
        return Ok(t.clone());
    }
    loop {
        match parse_term_in(text, &src.signature, &src.specs) {
            Ok(t) => return Ok(t),
            Err(SyntaxError::UnknownLabel { name, .. }) if !from_file => {
                let l = Label::new(&name).map_err(Failure::from_err)?;
                let mut alphabet = src.signature.alphabet.clone();
                if !alphabet.insert(l) {
                    return Err(Failure::new("UnknownLabel", name));
                }
                let mut sig = Signature::new(alphabet);
                for (a, b, c) in src.signature.gamma_entries() {
                    sig.add_gamma(a.clone(), b.clone(), c.clone()).map_err(Failure::from_err)?;
                }
                for (a, b) in src.signature.conflict_pairs() {
                    sig.add_conflict(a.clone(), b.clone()).map_err(Failure::from_err)?;
                }
                for (a, b) in src.signature.prio_pairs() {
                    sig.add_prio(a.clone(), b.clone()).map_err(Failure::from_err)?;
                }
                src.signature = sig;
            }
            Err(e) => return Err(Failure::from_err(e)),
        }
    }
}

fn pick_spec<'a>(src: &'a SourceFile, name: Option<&str>) -> Result<&'a RecSpec, Failure> {
    match name {
        Some(n) => src.specs.get(n).ok_or_else(|| Failure::new("UnknownSpec", n)),
        None if src.specs.len() == 1 => Ok(src.specs.values().next().expect("one spec")),
        None => Err(Failure::new("UnknownSpec", "the file has several specifications; pass --spec")),
    }
}

fn label_set(names: &[String]) -> Result<BTreeSet<Label>, Failure> {
    names.iter().filter(|n| !n.is_empty()).map(|n| Label::new(n).map_err(Failure::from_err)).collect()
}

fn render_file(src: &SourceFile) -> String {
    let mut out = render_signature(&src.signature);
    for (name, spec) in &src.specs {
        out.push_str(&format!("\n[spec {name}]\n"));
        for (v, t) in &spec.equations {
            out.push_str(&format!("{v} = {}\n", render_body(t)));
        }
    }
    if !src.terms.is_empty() {
        out.push_str("\n[terms]\n");
        for (n, t) in &src.terms {
            out.push_str(&format!("{n} = {}\n", render(t)));
        }
    }
    out
}

fn lts_options(cli: &Cli) -> LtsOptions {
    let mut o = LtsOptions::new(Budget { max_states: cli.max_states, max_key: cli.max_key });
    o.strict_paper_sos = cli.strict_paper_sos;
    o
}

fn run_command(cli: &Cli, env: &mut Env) -> Result<i32, Failure> {
    if cli.max_states == 0 || cli.max_key == 0 || cli.pomset_k == 0 {
        return Err(Failure::new("InvalidBudget", "budgets and --pomset-k must be positive"));
    }
    match &cli.command {
        Command::Fmt { term, file } => {
            let mut src = load(file.as_deref())?;
            match term {
                Some(t) => {
                    let t = resolve(&mut src, t, file.is_some())?;
                    env.line(&render(&t));
                }
                None if file.is_some() => env.out.push_str(&render_file(&src)),
                None => return Err(Failure::new("Usage", "fmt needs a term or --file")),
            }
            Ok(0)
        }
        Command::Normalize { term, file, trace, branching } => {
            let mut src = load(file.as_deref())?;
            let t = resolve(&mut src, term, file.is_some())?;
            let mode = if *branching { Mode::Branching } else { Mode::Strong };
            let (nf, tr) = normalize(&t, &src.signature, mode).map_err(Failure::from_err)?;
            match cli.format {
                Format::Json => {
                    let steps: Vec<serde_json::Value> = tr
                        .to_json_lines()
                        .lines()
                        .map(|l| serde_json::from_str(l).expect("trace lines are JSON"))
                        .collect();
                    let mut v = json!({ "normal_form": render(&nf) });
                    if *trace {
                        v["trace"] = json!(steps);
                    }
                    env.line(&serde_json::to_string_pretty(&v).expect("serializes"));
                }
                _ => {
                    if *trace {
                        env.out.push_str(&tr.to_json_lines());
                    }
                    env.line(&render(&nf));
                }
            }
            Ok(0)
        }
        Command::Lts { term, file } => {
            let mut src = load(file.as_deref())?;
            let t = resolve(&mut src, term, file.is_some())?;
            let l = build_lts_with(&t, &src.signature, &src.specs, &lts_options(cli)).map_err(Failure::from_err)?;
            match cli.format {
                Format::Json => env.line(&serde_json::to_string_pretty(&l.to_json()).expect("serializes")),
                Format::Dot => env.out.push_str(&l.to_dot()),
                Format::Text => {
                    for (i, s) in l.states.iter().enumerate() {
                        let mark = if i == l.initial { "*" } else { " " };
                        env.line(&format!("{mark}s{i} {}", render(s)));
                    }
                    for e in &l.edges {
                        let evs: Vec<String> = e
                            .events
                            .iter()
                            .map(|x| match (e.dir, x.key) {
                                (Dir::Rev, Some(k)) => format!("{}[{k}]", x.label),
                                _ => x.label.to_string(),
                            })
                            .collect();
                        let arrow = if e.dir == Dir::Fwd { "->" } else { "~>" };
                        env.line(&format!("s{} {arrow} s{} {{{}}}", e.from, e.to, evs.join(",")));
                    }
                }
            }
            Ok(0)
        }
        Command::Equiv { left, right, file, kind } => {
            let mut src = load(file.as_deref())?;
            let t1 = resolve(&mut src, left, file.is_some())?;
            let t2 = resolve(&mut src, right, file.is_some())?;
            let explicit_k = kind.contains('(');
            let mut kind: EquivKind = kind.parse().map_err(Failure::from_err)?;
            if !explicit_k {
                kind = match kind {
                    EquivKind::FrPomset(_) => EquivKind::FrPomset(cli.pomset_k),
                    EquivKind::RbFrPomset(_) => EquivKind::RbFrPomset(cli.pomset_k),
                    k => k,
                };
            }
            let opts = lts_options(cli);
            let l1 = build_lts_with(&t1, &src.signature, &src.specs, &opts).map_err(Failure::from_err)?;
            let l2 = build_lts_with(&t2, &src.signature, &src.specs, &opts).map_err(Failure::from_err)?;
            let v = check(&l1, &l2, kind).map_err(Failure::from_err)?;
            if cli.format == Format::Text {
                let word = if v.equivalent { env.paint("equivalent", "32") } else { env.paint("inequivalent", "31") };
                env.line(&format!("{word} under {kind}"));
            }
            env.line(&serde_json::to_string_pretty(&v).expect("serializes"));
            Ok(if v.equivalent { 0 } else { 1 })
        }
        Command::ProveAxioms { instances, wrong_kind, only } => {
            let mut opts = SuiteOptions::new(cli.seed, *instances);
            opts.pomset_k = cli.pomset_k;
            opts.wrong_kind = *wrong_kind;
            opts.only = only.clone();
            opts.strict_paper_sos = cli.strict_paper_sos;
            let report = prove_axioms(&opts);
            match cli.format {
                Format::Json => env.line(&serde_json::to_string_pretty(&report).expect("serializes")),
                _ => env.out.push_str(&report.render_text()),
            }
            Ok(if report.ok() { 0 } else { 1 })
        }
        Command::Cluster { file, spec, hide } => {
            let src = load(Some(file))?;
            let e = pick_spec(&src, spec.as_deref())?;
            let cs = find_clusters(e, &label_set(hide)?).map_err(Failure::from_err)?;
            let v: Vec<serde_json::Value> = cs.iter().map(|c| c.to_json()).collect();
            env.line(&serde_json::to_string_pretty(&v).expect("serializes"));
            Ok(0)
        }
        Command::Cfar { file, spec, var, hide } => {
            let src = load(Some(file))?;
            let e = pick_spec(&src, spec.as_deref())?;
            let r = apply_cfar(e, var, &label_set(hide)?, &src.signature).map_err(Failure::from_err)?;
            match cli.format {
                Format::Json => env.line(&serde_json::to_string_pretty(&r.to_json()).expect("serializes")),
                _ => {
                    env.line(&render(&r.result));
                    let status = if r.verified { env.paint("verified", "32") } else { env.paint("unverified", "33") };
                    let extra = if r.divergent { " (divergent cluster)" } else { "" };
                    env.line(&format!("{status}{extra}"));
                }
            }
            Ok(0)
        }
    }
}

/// Runs the command line `args` (program name first). Returns the exit code
/// and writes normal output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let color = std::env::var("RAPT_COLOR").map(|v| v != "0").unwrap_or(true) && std::io::stdout().is_terminal();
    let mut env = Env { out: String::new(), color };
    let code = match run_command(&cli, &mut env) {
        Ok(c) => c,
        Err(f) => {
            let _ = writeln!(err, "{}: {}: {}", env.paint("error", "31"), f.kind, f.msg);
            2
        }
    };
    let _ = out.write_all(env.out.as_bytes());
    code
}
