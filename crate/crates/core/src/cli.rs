//! The `uqclone` command line. Verdicts are printed as
//! `VERDICT <kind> <payload>` lines, optionally followed by `WITNESS` and
//! `NOTE` lines; artifact commands print the artifact alone.
//!
//! Exit codes: 0 when a verdict was computed, 1 on usage, parse or I/O
//! errors, 2 when a budget was exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::budget::Budget;
use crate::closure::{self, check_upp, eval_formula, find_upp, qfpp_closure, FindUpp, UppVerdict};
use crate::csp::{self, Count, Instance, Uniqueness};
use crate::lattice::{self, CloneCatalog, CloneEntry};
use crate::ppart::{self, Certification};
use crate::reduce::{self, EthPlan};
use crate::relcore::{dual_language, dual_partial, Language, Operation, Relation};
use crate::weakbase;
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "uqclone", version, about = "Clone theory with unique existential quantification")]
struct Cli {
    /// Worker threads (0 picks the number of cores).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for randomized generation; no current subcommand draws random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Auxiliary variables tried by find-upp.
    #[arg(long, global = true, default_value_t = 2)]
    max_aux: usize,
    /// Largest arity of enumerated Boolean operations.
    #[arg(long, global = true, default_value_t = 4)]
    max_arity: usize,
    /// Largest number of Boolean variables of an instance (scaled by log2 of the domain size).
    #[arg(long, global = true, default_value_t = 30)]
    max_vars: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct LangArg {
    /// Language file.
    lang: PathBuf,
}

#[derive(Args, Debug)]
struct InstArg {
    /// Instance file.
    instance: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Identify the co-clone of a Boolean language.
    Classify {
        #[command(flatten)]
        l: LangArg,
        /// Index bound for the S chains (default: largest arity + 1).
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Complexity of unique-SAT over a Boolean language.
    UsatClass(LangArg),
    /// Classification of the unique-CSP over a language.
    UcspClass(LangArg),
    /// Whether a co-clone equals its uniquely quantified closure.
    Covered {
        /// Co-clone name, e.g. ID2, IE0, IS11^3.
        name: String,
    },
    /// Search for a upp-definition of a relation.
    FindUpp {
        /// File holding the relation.
        relation: PathBuf,
        /// Language to define it over.
        #[arg(long)]
        over: PathBuf,
        /// Relation to pick when the file holds several.
        #[arg(long)]
        name: Option<String>,
    },
    /// Check the definitions in a file.
    CheckUpp {
        defs: PathBuf,
        /// Relation file holding the targets.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Check a separation certificate.
    Certify {
        /// Witness partial operation (`pop` file).
        #[arg(long)]
        witness: PathBuf,
        /// Source language (IE0 or IE route).
        #[arg(long, required_unless_present = "frozen")]
        source: Option<PathBuf>,
        /// Target relation file (IE0 or IE route).
        #[arg(long, requires = "source")]
        target: Option<PathBuf>,
        /// Chain index n of the frozen route.
        #[arg(long, requires_all = ["weak", "plain"], conflicts_with = "source")]
        frozen: Option<usize>,
        /// Weak base language (frozen route).
        #[arg(long)]
        weak: Option<PathBuf>,
        /// Plain base language (frozen route).
        #[arg(long)]
        plain: Option<PathBuf>,
    },
    /// Quantifier-free pp closure at a given arity.
    QfppClosure {
        #[command(flatten)]
        l: LangArg,
        #[arg(long)]
        arity: usize,
    },
    /// C(U^s) for a catalog clone or a generator file.
    WeakBase {
        /// Catalog clone name or generator file.
        #[arg(long)]
        clone: String,
        #[arg(long)]
        s: usize,
    },
    /// The quantifier-free definition of C(U^s) over a co-clone base.
    EmitQfpp {
        /// Catalog clone whose co-clone base is used.
        #[arg(long, required_unless_present = "base", conflicts_with = "base")]
        clone: Option<String>,
        /// Language file holding the base.
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        s: usize,
    },
    /// Number of models.
    Count(InstArg),
    /// Whether there is exactly one model.
    Unique(InstArg),
    /// List models in lexicographic order.
    Enumerate {
        #[command(flatten)]
        i: InstArg,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Replace every constraint by its upp-definition.
    ReduceUpp {
        #[command(flatten)]
        i: InstArg,
        #[arg(long)]
        defs: PathBuf,
    },
    /// R5 instance to a unique-SAT instance over R5z.
    ReduceUnsat {
        #[command(flatten)]
        i: InstArg,
        /// Language path written into the output instance.
        #[arg(long, default_value = "r5z.rel")]
        lang_out: String,
    },
    /// Steering construction: unsatisfiable input iff unique output model.
    ReduceEth {
        #[command(flatten)]
        i: InstArg,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Dual of a language, a partial operation or an instance.
    Dual {
        file: PathBuf,
        /// Language path for a dualized instance.
        #[arg(long)]
        lang_out: Option<String>,
    },
    /// Which of 0, 1, not, and, or, maj, xor3 preserve a language.
    AtomProfile(LangArg),
}

impl Cmd {
    fn kind(&self) -> &'static str {
        match self {
            Cmd::Classify { .. } => "coclone",
            Cmd::UsatClass(_) => "usat",
            Cmd::UcspClass(_) => "ucsp",
            Cmd::Covered { .. } => "covered",
            Cmd::FindUpp { .. } => "upp",
            Cmd::CheckUpp { .. } => "upp-check",
            Cmd::Certify { .. } => "certify",
            Cmd::QfppClosure { .. } => "qfpp-closure",
            Cmd::WeakBase { .. } => "weak-base",
            Cmd::EmitQfpp { .. } => "emit-qfpp",
            Cmd::Count(_) => "count",
            Cmd::Unique(_) => "unique",
            Cmd::Enumerate { .. } => "models",
            Cmd::ReduceUpp { .. } => "reduce-upp",
            Cmd::ReduceUnsat { .. } => "reduce-unsat",
            Cmd::ReduceEth { .. } => "reduce-eth",
            Cmd::Dual { .. } => "dual",
            Cmd::AtomProfile(_) => "atom-profile",
        }
    }
}

/// Runs the command line with the process streams.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let budget = Budget { op_arity_d2: cli.max_arity, csp_vars: cli.max_vars, ..Budget::default() };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let result = pool.install(|| execute(&cli, &budget));
    match result {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(Error::Budget(m)) => {
            let _ = writeln!(out, "VERDICT budget-exceeded {} {m}", cli.cmd.kind());
            2
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn point(t: &[u8]) -> String {
    if t.iter().all(|&v| v < 10) {
        t.iter().map(|v| char::from(b'0' + v)).collect()
    } else {
        t.iter().map(u8::to_string).collect::<Vec<_>>().join(",")
    }
}

fn points(ts: &[Vec<u8>]) -> String {
    ts.iter().map(|t| point(t)).collect::<Vec<_>>().join(" ")
}

fn assignment(vars: &[String], values: &[u8]) -> String {
    vars.iter().zip(values).map(|(v, d)| format!("{v}={d}")).collect::<Vec<_>>().join(" ")
}

fn load_relation(path: &Path, name: Option<&str>) -> Result<Relation> {
    let lang = Language::from_file(path)?;
    match (name, lang.relations()) {
        (Some(n), _) => lang.get(n).cloned().ok_or_else(|| Error::Unknown(format!("relation {n} in {}", path.display()))),
        (None, [r]) => Ok(r.clone()),
        (None, rs) => Err(Error::Precondition(format!(
            "{} holds {} relations; pick one with --name",
            path.display(),
            rs.len()
        ))),
    }
}

fn generators(clone_or_file: &str) -> Result<(usize, Vec<Operation>)> {
    let path = Path::new(clone_or_file);
    if path.is_file() {
        return weakbase::generators_from_file(path);
    }
    let entry = catalog_entry(clone_or_file)?;
    Ok((2, entry.gens))
}

fn catalog_entry(name: &str) -> Result<CloneEntry> {
    let norm = lattice::normalize_name(name);
    let bare = norm.strip_prefix('I').filter(|b| lattice::parse_clone_name(b).is_ok()).unwrap_or(&norm);
    let (_, index) = lattice::parse_clone_name(bare)?;
    let cat = CloneCatalog::with_chain_bound(index.unwrap_or(2).max(2))?;
    cat.get(&norm).cloned().ok_or_else(|| Error::Unknown(format!("clone {name}")))
}

fn execute(cli: &Cli, budget: &Budget) -> Result<String> {
    let _ = cli.seed;
    let mut o = String::new();
    match &cli.cmd {
        Cmd::Classify { l, bound } => {
            let lang = Language::from_file(&l.lang)?;
            let id = lattice::identify_coclone(&lang, *bound)?;
            let _ = writeln!(o, "VERDICT coclone {id}");
            let name = match &id {
                lattice::Identification::Exact(n) => n,
                lattice::Identification::Interval { upper, .. } => upper,
            };
            let _ = writeln!(o, "NOTE covered {}", lattice::covered_verdict(name)?);
            let _ = writeln!(o, "NOTE usat {}", lattice::usat_class(&lang)?);
        }
        Cmd::UsatClass(l) => {
            let lang = Language::from_file(&l.lang)?;
            let _ = writeln!(o, "VERDICT usat {}", lattice::usat_class(&lang)?);
            let _ = writeln!(o, "NOTE profile {}", lattice::atom_profile(&lang)?);
        }
        Cmd::UcspClass(l) => {
            let lang = Language::from_file(&l.lang)?;
            let (class, sound) = lattice::ucsp_class(&lang, budget)?;
            let _ = writeln!(o, "VERDICT ucsp {class} {sound}");
        }
        Cmd::Covered { name } => {
            let _ = writeln!(o, "VERDICT covered {}", lattice::covered_verdict(name)?);
        }
        Cmd::FindUpp { relation, over, name } => {
            let r = load_relation(relation, name.as_deref())?;
            let lang = Language::from_file(over)?;
            match find_upp(&r, &lang, cli.max_aux, budget)? {
                FindUpp::Found(cert) => {
                    let mut phi = cert.formula;
                    phi.lang_path = Some(over.display().to_string());
                    let _ = writeln!(o, "VERDICT upp found");
                    o.push_str(&phi.to_text());
                }
                FindUpp::NoneUpTo(m) => {
                    let _ = writeln!(o, "VERDICT upp not found up to {m}");
                }
            }
        }
        Cmd::CheckUpp { defs, target } => {
            let defs = closure::defs_from_file(defs)?;
            let targets = target.as_deref().map(Language::from_file).transpose()?;
            for def in &defs {
                let (goal, note) = match (&targets, def.language.get(&def.name)) {
                    (Some(t), _) => match (t.get(&def.name), t.relations()) {
                        (Some(r), _) => (r.clone(), None),
                        (None, [r]) => (r.clone(), None),
                        _ => return Err(Error::Unknown(format!("target relation {}", def.name))),
                    },
                    (None, Some(r)) => (r.clone(), None),
                    (None, None) => (eval_formula(def, budget)?.rel, Some("target is the defined relation itself")),
                };
                if let Some(n) = note {
                    let _ = writeln!(o, "NOTE {}: {n}", def.name);
                }
                write_upp_verdict(&mut o, &def.name, &check_upp(def, &goal, budget)?);
            }
        }
        Cmd::Certify { witness, source, target, frozen, weak, plain } => {
            let f = ppart::pop_from_file(witness)?;
            let cert = match frozen {
                Some(n) => {
                    let weak = Language::from_file(weak.as_ref().unwrap())?;
                    let plain = Language::from_file(plain.as_ref().unwrap())?;
                    ppart::certify_frozen_collapse(&weak, &plain, &f, *n)?
                }
                None => {
                    let lang = Language::from_file(source.as_ref().unwrap())?;
                    let target = target
                        .as_ref()
                        .ok_or_else(|| Error::Precondition("--target is required with --source".into()))?;
                    let r = load_relation(target, None)?;
                    ppart::certify_not_upp(&lang, &r, &f)?
                }
            };
            match cert {
                Certification::Certified(c) => {
                    let _ = writeln!(
                        o,
                        "VERDICT impossible (certified) route {} target {}",
                        c.route,
                        c.target.display_name()
                    );
                    let _ = writeln!(o, "WITNESS rows {}", points(&c.violation));
                }
                Certification::Rejected(r) => {
                    let _ = writeln!(o, "VERDICT rejected {r}");
                    if let ppart::Rejection::ViolatesSource { rows, .. } = &r {
                        let _ = writeln!(o, "WITNESS rows {}", points(rows));
                    }
                }
            }
        }
        Cmd::QfppClosure { l, arity } => {
            let lang = Language::from_file(&l.lang)?;
            for (i, e) in qfpp_closure(&lang, *arity, budget)?.into_iter().enumerate() {
                let atoms: Vec<String> = e
                    .atoms
                    .iter()
                    .map(|(r, a)| format!("{r}({})", a.iter().map(|c| format!("x{}", c + 1)).collect::<Vec<_>>().join(",")))
                    .collect();
                let body = if atoms.is_empty() { "true".to_string() } else { atoms.join(" & ") };
                let _ = writeln!(o, "# {body}");
                o.push_str(&e.rel.named(format!("Q{}", i + 1)).to_text());
            }
        }
        Cmd::WeakBase { clone, s } => {
            let (d, gens) = generators(clone)?;
            let w = weakbase::weak_base(&gens, d, *s, budget)?;
            o.push_str(&w.named(format!("W{s}")).to_text());
        }
        Cmd::EmitQfpp { clone, base, s } => {
            let (lang, path) = match (clone, base) {
                (Some(c), _) => (Language::from_relations(2, catalog_entry(c)?.base)?, None),
                (None, Some(p)) => (Language::from_file(p)?, Some(p.display().to_string())),
                (None, None) => unreachable!("clap requires one of --clone and --base"),
            };
            let mut phi = weakbase::emit_weakbase_qfpp(&lang, *s, budget)?;
            phi.lang_path = path;
            o.push_str(&phi.to_text());
        }
        Cmd::Count(i) => {
            let inst = Instance::from_file(&i.instance)?;
            match csp::count_models(&inst, None, budget)? {
                Count::Exact(n) => {
                    let _ = writeln!(o, "VERDICT count {n}");
                }
                Count::AtLeast(n) => {
                    let _ = writeln!(o, "VERDICT count at-least {n}");
                }
            }
        }
        Cmd::Unique(i) => {
            let inst = Instance::from_file(&i.instance)?;
            match csp::unique_model(&inst, budget)? {
                Uniqueness::Unique(m) => {
                    let _ = writeln!(o, "VERDICT unique yes");
                    let _ = writeln!(o, "WITNESS {}", assignment(&inst.vars, &m));
                }
                Uniqueness::Zero => {
                    let _ = writeln!(o, "VERDICT unique no zero-models");
                }
                Uniqueness::Many(a, b) => {
                    let _ = writeln!(o, "VERDICT unique no many-models");
                    let _ = writeln!(o, "WITNESS {}", assignment(&inst.vars, &a));
                    let _ = writeln!(o, "WITNESS {}", assignment(&inst.vars, &b));
                }
            }
        }
        Cmd::Enumerate { i, limit } => {
            let inst = Instance::from_file(&i.instance)?;
            let models = csp::enumerate_models(&inst, *limit, budget)?;
            let complete = limit.is_none_or(|l| models.len() < l);
            let _ = writeln!(o, "VERDICT models {}{}", if complete { "" } else { "at-least " }, models.len());
            let _ = writeln!(o, "NOTE vars {}", inst.vars.join(" "));
            for m in &models {
                let _ = writeln!(o, "MODEL {}", point(m));
            }
        }
        Cmd::ReduceUpp { i, defs } => {
            let inst = Instance::from_file(&i.instance)?;
            let defs = closure::defs_from_file(defs)?;
            o.push_str(&reduce::rewrite_upp(&inst, &defs, budget)?.to_text());
        }
        Cmd::ReduceUnsat { i, lang_out } => {
            let inst = Instance::from_file(&i.instance)?;
            let mut out = reduce::unsat_to_usat(&inst)?;
            out.lang_path = Some(lang_out.clone());
            o.push_str(&out.to_text());
        }
        Cmd::ReduceEth { i, plan } => {
            let inst = Instance::from_file(&i.instance)?;
            let plan = EthPlan::from_defs(closure::defs_from_file(plan)?)?;
            o.push_str(&reduce::eth_reduction(&inst, &plan, budget)?.to_text());
        }
        Cmd::Dual { file, lang_out } => {
            let text = std::fs::read_to_string(file)
                .map_err(|source| Error::Io { path: file.display().to_string(), source })?;
            let first = text
                .lines()
                .map(|l| l.split('#').next().unwrap().trim())
                .find(|l| !l.is_empty())
                .and_then(|l| l.split_whitespace().next())
                .unwrap_or("");
            match first {
                "relation" => o.push_str(&dual_language(&Language::parse(&text)?)?.to_text()),
                "pop" => o.push_str(&ppart::pop_to_text(&dual_partial(&ppart::parse_pop(&text)?)?)),
                _ => {
                    let lang_out = lang_out
                        .as_ref()
                        .ok_or_else(|| Error::Precondition("dualizing an instance needs --lang-out".into()))?;
                    let mut d = Instance::from_file(file)?.dual()?;
                    d.lang_path = Some(lang_out.clone());
                    o.push_str(&d.to_text());
                }
            }
        }
        Cmd::AtomProfile(l) => {
            let lang = Language::from_file(&l.lang)?;
            let _ = writeln!(o, "VERDICT atom-profile {}", lattice::atom_profile(&lang)?);
        }
    }
    Ok(o)
}

fn write_upp_verdict(o: &mut String, name: &str, v: &UppVerdict) {
    match v {
        UppVerdict::Valid(cert) => {
            let _ = writeln!(o, "VERDICT upp-check {name} valid");
            for w in &cert.witnesses {
                let map: Vec<String> = w.map.iter().map(|(k, v)| format!("{}:{v}", point(k))).collect();
                let _ = writeln!(
                    o,
                    "WITNESS {} determined-by {} map {}",
                    w.var,
                    if w.determined_by.is_empty() { "-".to_string() } else { w.determined_by.join(",") },
                    map.join(" ")
                );
            }
        }
        UppVerdict::WrongRelation { missing, extra } => {
            let _ = writeln!(o, "VERDICT upp-check {name} wrong-relation missing {} extra {}", missing.len(), extra.len());
            if !missing.is_empty() {
                let _ = writeln!(o, "WITNESS missing {}", points(missing));
            }
            if !extra.is_empty() {
                let _ = writeln!(o, "WITNESS extra {}", points(extra));
            }
        }
        UppVerdict::NotUnique { var, pair, ambiguous } => {
            let _ = writeln!(o, "VERDICT upp-check {name} not-unique {var}");
            let _ = writeln!(o, "WITNESS assignments {} {}", point(&pair.0), point(&pair.1));
            let _ = writeln!(o, "WITNESS ambiguous {}", points(ambiguous));
        }
        UppVerdict::NotFrozen { var, pair } => {
            let _ = writeln!(o, "VERDICT upp-check {name} not-frozen {var}");
            let _ = writeln!(o, "WITNESS assignments {} {}", point(&pair.0), point(&pair.1));
        }
    }
}
