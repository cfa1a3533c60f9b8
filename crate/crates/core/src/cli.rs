//! Command-line frontend. All commands build their output into a string so
//! the dispatcher is testable; only progress reporting goes to stderr.

use std::fmt::Write as _;
use std::io::Write as _;

use clap::{Parser, Subcommand, ValueEnum};

use crate::blocks::{block_coding, hat_substitution};
use crate::epimorph::enumerate_epis;
use crate::graphs::{block_graph, letter_graph, FactorGraph};
use crate::letter_map::LetterMap;
use crate::procedures::{
    conjugacy_list_to_json, conjugacy_list_with, decide_conjugate,
    factor_list_to_json, factor_list_with_progress, Catalog, CatalogEntry, ConjugacyAnswer,
    FactorOptions,
};
use crate::subst::{analyze, Substitution};
use crate::verify::{non_substitutive_evidence, Certificate};
use crate::{Error, ProjectedSystem, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_UNDECIDED: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "substconj",
    about = "Factor and conjugacy lists of constant-length substitution systems",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads for the search grid (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Basic classification: primitivity, injectivity, aperiodicity, standard form
    Analyze { substitution: String },
    /// Standard form (lexicographically least relabeling)
    Std { substitution: String },
    /// Iterated merging of equal-image letters
    Injectivize { substitution: String },
    /// Hat substitution of the N-block presentation at lag M
    Nblock {
        substitution: String,
        #[arg(short = 'N', long = "blocks")]
        n: usize,
        #[arg(short = 'M', long = "lag", default_value_t = 0)]
        m: usize,
    },
    /// The exact set of length-N factors
    Language {
        substitution: String,
        #[arg(short = 'N', long = "length")]
        n: usize,
    },
    /// Factor graphs: order-1 by default, or the (L,M) block graph
    Graphs {
        substitution: String,
        #[arg(short = 'L', long = "block-length")]
        l: Option<usize>,
        #[arg(short = 'M', long = "lag", default_value_t = 0)]
        m: usize,
        /// Letter-to-letter projection, e.g. "{1}{2,3}"
        #[arg(long)]
        partition: Option<String>,
    },
    /// All epimorphisms from the order-1 graph onto the (L,M) block graph
    Epis {
        substitution: String,
        #[arg(short = 'L', long = "block-length")]
        l: Option<usize>,
        #[arg(short = 'M', long = "lag", default_value_t = 0)]
        m: usize,
        #[arg(long)]
        partition: Option<String>,
    },
    /// Complete list of injective substitutions generating a factor system
    Factors {
        substitution: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Complete list of injective substitutions generating a conjugate system
    Conjugacy {
        substitution: String,
        #[command(flatten)]
        search: SearchArgs,
        /// Persistent catalog caching the per-candidate factor lists
        #[arg(long)]
        cache: Option<std::path::PathBuf>,
    },
    /// Decide conjugacy of two substitution systems of the same length
    Conjugate {
        first: String,
        second: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// No-epimorphism ladder indicating a system is not substitutive
    Evidence {
        substitution: String,
        #[arg(long)]
        partition: Option<String>,
        /// Test block lengths L, L^2, ..., L^depth
        #[arg(short = 'n', long, default_value_t = 3)]
        depth: u32,
    },
}

#[derive(clap::Args, Debug)]
struct SearchArgs {
    /// Disable the automorphism quotient of the partition grid
    #[arg(long)]
    no_symmetry: bool,
    /// Word-refutation depth
    #[arg(long)]
    kmax: Option<usize>,
    /// Wall-clock budget in seconds; partial results are marked incomplete
    #[arg(long)]
    budget: Option<u64>,
}

impl SearchArgs {
    fn options(&self) -> FactorOptions {
        FactorOptions {
            symmetry: !self.no_symmetry,
            k_max: self.kmax,
            budget: self.budget.map(std::time::Duration::from_secs),
            ..FactorOptions::default()
        }
    }
}

/// Parse arguments and run; returns the exit code and the rendered output.
pub fn run(args: Vec<String>) -> (i32, String) {
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path as well
            let rendered = e.render().to_string();
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            return (code, rendered);
        }
    };
    if let Some(jobs) = cli.jobs {
        // ignore failure: the global pool can only be configured once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match dispatch(&cli) {
        Ok((code, out)) => (code, out),
        Err(e) => {
            let code = match &e {
                Error::Unsupported(_) => EXIT_UNSUPPORTED,
                Error::InvalidInput(_) | Error::Parse { .. } => EXIT_INVALID,
            };
            (code, format!("error: {e}\n"))
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(i32, String)> {
    let fmt = cli.format;
    match &cli.command {
        Command::Analyze { substitution } => cmd_analyze(substitution, fmt),
        Command::Std { substitution } => cmd_std(substitution, fmt),
        Command::Injectivize { substitution } => cmd_injectivize(substitution, fmt),
        Command::Nblock { substitution, n, m } => cmd_nblock(substitution, *n, *m, fmt),
        Command::Language { substitution, n } => cmd_language(substitution, *n, fmt),
        Command::Graphs {
            substitution,
            l,
            m,
            partition,
        } => cmd_graphs(substitution, *l, *m, partition.as_deref(), fmt),
        Command::Epis {
            substitution,
            l,
            m,
            partition,
        } => cmd_epis(substitution, *l, *m, partition.as_deref(), fmt),
        Command::Factors {
            substitution,
            search,
        } => cmd_factors(substitution, search, fmt),
        Command::Conjugacy {
            substitution,
            search,
            cache,
        } => cmd_conjugacy(substitution, search, cache.as_deref(), fmt),
        Command::Conjugate {
            first,
            second,
            search,
        } => cmd_conjugate(first, second, search, fmt),
        Command::Evidence {
            substitution,
            partition,
            depth,
        } => cmd_evidence(substitution, partition.as_deref(), *depth, fmt),
    }
}

fn require_text_or_json(fmt: Format) -> Result<()> {
    if fmt == Format::Dot {
        Err(Error::InvalidInput(
            "dot output is only available for the graphs command".into(),
        ))
    } else {
        Ok(())
    }
}

fn projected_system(substitution: &str, partition: Option<&str>) -> Result<ProjectedSystem> {
    let gen = Substitution::parse(substitution)?;
    let projection = match partition {
        Some(text) => LetterMap::parse(text, gen.alphabet())?,
        None => LetterMap::identity(gen.alphabet().clone()),
    };
    ProjectedSystem::new(gen, projection)
}

fn cmd_analyze(text: &str, fmt: Format) -> Result<(i32, String)> {
    require_text_or_json(fmt)?;
    let s = Substitution::parse(text)?;
    let report = analyze(&s, None);
    let aperiodic = match &report.aperiodic {
        crate::Aperiodicity::Periodic { witness_n } => {
            format!("periodic (complexity drops at n={witness_n})")
        }
        crate::Aperiodicity::CertifiedUpTo(b) => format!("aperiodic (checked up to {b})"),
        crate::Aperiodicity::Unknown => "unknown".into(),
    };
    let out = match fmt {
        Format::Json => pretty(&serde_json::json!({
            "substitution": s.rules_string(),
            "alphabet_size": s.size(),
            "length": s.length(),
            "primitive": report.primitive,
            "injective": report.injective,
            "aperiodic": aperiodic,
            "standard_form": report.standard_form.rules_string(),
        })),
        _ => format!(
            "substitution:  {}\nalphabet:      {} letters, length {}\nprimitive:     {}\ninjective:     {}\naperiodic:     {}\nstandard form: {}\n",
            s.rules_string(),
            s.size(),
            s.length(),
            report.primitive,
            report.injective,
            aperiodic,
            report.standard_form.rules_string(),
        ),
    };
    Ok((EXIT_OK, out))
}

fn cmd_std(text: &str, fmt: Format) -> Result<(i32, String)> {
    require_text_or_json(fmt)?;
    let s = Substitution::parse(text)?;
    let (form, perm) = s.standard_form();
    let out = match fmt {
        Format::Json => pretty(&serde_json::json!({
            "standard_form": form.rules_string(),
            "relabeling": perm,
        })),
        _ => format!("{}\n", form.rules_string()),
    };
    Ok((EXIT_OK, out))
}

fn cmd_injectivize(text: &str, fmt: Format) -> Result<(i32, String)> {
    require_text_or_json(fmt)?;
    let s = Substitution::parse(text)?;
    let inj = s.injectivize();
    let out = match fmt {
        Format::Json => pretty(&serde_json::json!({
            "substitution": inj.substitution.rules_string(),
            "rounds": inj.rounds,
            "partition": inj.map.partition_string(),
        })),
        _ => format!(
            "{}\nrounds:    {}\npartition: {}\n",
            inj.substitution.rules_string(),
            inj.rounds,
            inj.map.partition_string()
        ),
    };
    Ok((EXIT_OK, out))
}

fn cmd_nblock(text: &str, n: usize, m: usize, fmt: Format) -> Result<(i32, String)> {
    require_text_or_json(fmt)?;
    let s = Substitution::parse(text)?;
    let coding = block_coding(&s, n)?;
    let hat = hat_substitution(&s, n, m)?;
    let blocks: Vec<String> = coding
        .blocks()
        .iter()
        .map(|b| s.alphabet().render_word(b))
        .collect();
    let out = match fmt {
        Format::Json => pretty(&serde_json::json!({
            "hat": hat.rules_string(),
            "n": n,
            "lag": m,
            "coding": blocks,
        })),
        _ => {
            let mut out = format!("{}\n\ncoding of {n}-blocks:\n", hat.rules_string());
            for (i, b) in blocks.iter().enumerate() {
                let _ = writeln!(out, "  {} = {}", i + 1, b);
            }
            out
        }
    };
    Ok((EXIT_OK, out))
}

fn cmd_language(text: &str, n: usize, fmt: Format) -> Result<(i32, String)> {
    require_text_or_json(fmt)?;
    let s = Substitution::parse(text)?;
    let words: Vec<String> = s
        .language(n)?
        .iter()
        .map(|w| s.alphabet().render_word(w))
        .collect();
    let out = match fmt {
        Format::Json => pretty(&serde_json::json!({ "n": n, "words": words })),
        _ => {
            let mut out = String::new();
            for w in &words {
                let _ = writeln!(out, "{w}");
            }
            let _ = writeln!(out, "({} words)", words.len());
            out
        }
    };
    Ok((EXIT_OK, out))
}

fn cmd_graphs(
    text: &str,
    l: Option<usize>,
    m: usize,
    partition: Option<&str>,
    fmt: Format,
) -> Result<(i32, String)> {
    let sys = projected_system(text, partition)?;
    let (name, graph) = match l {
        None => ("G1".to_string(), letter_graph(&sys)?),
        Some(l) => (format!("G_{l}_{m}"), block_graph(&sys, l, m)?),
    };
    let out = match fmt {
        Format::Dot => graph.to_dot(&name),
        Format::Json => pretty(&graph.to_json()),
        Format::Text => render_graph_text(&graph),
    };
    Ok((EXIT_OK, out))
}

fn render_graph_text(g: &FactorGraph) -> String {
    let mut out = format!("{} vertices, {} edges\n", g.vertex_count(), g.edge_count());
    for v in 0..g.vertex_count() {
        let succ: Vec<String> = g
            .edges()
            .iter()
            .filter(|&&(u, _)| u == v)
            .map(|&(_, w)| g.vertex_label(w))
            .collect();
        let _ = writeln!(out, "  {} -> {}", g.vertex_label(v), succ.join(", "));
    }
    out
}

fn cmd_epis(
    text: &str,
    l: Option<usize>,
    m: usize,
    partition: Option<&str>,
    fmt: Format,
) -> Result<(i32, String)> {
    require_text_or_json(fmt)?;
    let sys = projected_system(text, partition)?;
    let l = l.unwrap_or(sys.generator.length());
    let g1 = letter_graph(&sys)?;
    let glm = block_graph(&sys, l, m)?;
    let (epis, stats) = enumerate_epis(&g1, &glm)?;
    let out = match fmt {
        Format::Json => pretty(&serde_json::json!({
            "l": l,
            "m": m,
            "epimorphisms": epis.iter().map(|e| e.induced.rules_string()).collect::<Vec<_>>(),
            "nodes_expanded": stats.nodes_expanded,
        })),
        _ => {
            let mut out = format!("{} epimorphism(s) onto the ({l},{m}) block graph\n", epis.len());
            for (i, e) in epis.iter().enumerate() {
                let _ = writeln!(out, "  {}. {}", i + 1, e.induced.rules_string());
            }
            let _ = writeln!(out, "search nodes expanded: {}", stats.nodes_expanded);
            out
        }
    };
    Ok((EXIT_OK, out))
}

fn progress_to_stderr(done: usize, total: usize) {
    let step = (total / 20).max(1);
    if done % step == 0 || done == total {
        eprint!("\r{done}/{total} cases");
        if done == total {
            eprintln!();
        }
        let _ = std::io::stderr().flush();
    }
}

fn entry_table(entries: &[CatalogEntry], undecided: &[CatalogEntry]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<4} {:<28} {:<3} {:<34} {}",
        "Nr.", "Partition", "M", "Standard form", "Certificate"
    );
    let mut nr = 0;
    let mut row = |e: &CatalogEntry, tag: &str| {
        nr += 1;
        let cert = match &e.certificate {
            Certificate::Intertwining { p, m, .. } => format!("intertwining p={p} lag={m}{tag}"),
            Certificate::WordRefutation { length, .. } => format!("refuted at length {length}{tag}"),
            Certificate::Undecided { checked_up_to } => {
                format!("undecided up to {checked_up_to}{tag}")
            }
        };
        format!(
            "{:<4} {:<28} {:<3} {:<34} {}\n",
            nr,
            e.provenance.partition.partition_string(),
            e.provenance.m,
            e.standard_form.rules_string(),
            cert
        )
    };
    for e in entries {
        let line = row(e, "");
        out.push_str(&line);
    }
    for e in undecided {
        let line = row(e, " (excluded)");
        out.push_str(&line);
    }
    out
}

fn cmd_factors(text: &str, search: &SearchArgs, fmt: Format) -> Result<(i32, String)> {
    require_text_or_json(fmt)?;
    let s = Substitution::parse(text)?;
    let list = factor_list_with_progress(&s, &search.options(), Some(&progress_to_stderr))?;
    let code = if !list.complete || !list.undecided.is_empty() {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    };
    let out = match fmt {
        Format::Json => pretty(&factor_list_to_json(&list)),
        _ => {
            let mut out = format!(
                "factor list of {} ({} partitions, {} cases{})\n\n",
                list.source.rules_string(),
                list.partitions_examined,
                list.cases_examined,
                if list.complete { "" } else { ", INCOMPLETE" }
            );
            out.push_str(&entry_table(&list.entries, &list.undecided));
            let _ = writeln!(
                out,
                "\n{} factor(s), {} undecided",
                list.entries.len(),
                list.undecided.len()
            );
            out
        }
    };
    Ok((code, out))
}

fn cmd_conjugacy(
    text: &str,
    search: &SearchArgs,
    cache: Option<&std::path::Path>,
    fmt: Format,
) -> Result<(i32, String)> {
    require_text_or_json(fmt)?;
    let s = Substitution::parse(text)?;
    let mut catalog = cache.map(Catalog::open).transpose()?;
    let list = conjugacy_list_with(&s, &search.options(), catalog.as_mut())?;
    let code = if !list.complete || !list.undecided.is_empty() {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    };
    let out = match fmt {
        Format::Json => pretty(&conjugacy_list_to_json(&list)),
        _ => {
            let mut out = format!(
                "conjugacy class of {}{}\n\n",
                list.source.rules_string(),
                if list.complete { "" } else { " (INCOMPLETE)" }
            );
            out.push_str(&entry_table(&list.entries, &list.undecided));
            let _ = writeln!(
                out,
                "\n{} conjugate substitution(s), {} undecided",
                list.entries.len(),
                list.undecided.len()
            );
            out
        }
    };
    Ok((code, out))
}

fn cmd_conjugate(
    first: &str,
    second: &str,
    search: &SearchArgs,
    fmt: Format,
) -> Result<(i32, String)> {
    require_text_or_json(fmt)?;
    let a = Substitution::parse(first)?;
    let b = Substitution::parse(second)?;
    let answer = decide_conjugate(&a, &b, &search.options())?;
    let (code, verdict) = match answer {
        ConjugacyAnswer::Conjugate => (EXIT_OK, "conjugate"),
        ConjugacyAnswer::NotConjugate => (EXIT_OK, "not conjugate"),
        ConjugacyAnswer::Undecided => (EXIT_UNDECIDED, "undecided"),
    };
    let out = match fmt {
        Format::Json => pretty(&serde_json::json!({
            "first": a.rules_string(),
            "second": b.rules_string(),
            "verdict": verdict,
        })),
        _ => format!("{verdict}\n"),
    };
    Ok((code, out))
}

fn cmd_evidence(
    text: &str,
    partition: Option<&str>,
    depth: u32,
    fmt: Format,
) -> Result<(i32, String)> {
    require_text_or_json(fmt)?;
    let sys = projected_system(text, partition)?;
    let report = non_substitutive_evidence(&sys, depth)?;
    let out = match fmt {
        Format::Json => pretty(&serde_json::json!({
            "depth": depth,
            "no_epimorphism_anywhere": report.no_epimorphism_anywhere(),
            "entries": report.entries.iter().map(|e| serde_json::json!({
                "n": e.n, "m": e.m, "loops": e.loop_count, "epimorphisms": e.epi_count,
            })).collect::<Vec<_>>(),
        })),
        _ => {
            let mut out = format!("{:<3} {:<4} {:<6} {}\n", "n", "M", "loops", "epimorphisms");
            for e in &report.entries {
                let _ = writeln!(out, "{:<3} {:<4} {:<6} {}", e.n, e.m, e.loop_count, e.epi_count);
            }
            let _ = writeln!(
                out,
                "\n{}",
                if report.no_epimorphism_anywhere() {
                    "no epimorphism at any tested depth: no substitution of these lengths generates the system"
                } else {
                    "epimorphisms exist at some depth"
                }
            );
            out
        }
    };
    Ok((EXIT_OK, out))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
