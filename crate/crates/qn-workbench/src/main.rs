//! Command-line driver: each subcommand wraps one verification pipeline and
//! reports through a stable envelope. Exit codes: 0 pass, 1 usage or input
//! error, 2 verification failure, 3 insufficient truncation.

use clap::{Parser, Subcommand};
use qn_workbench::groebner::{CacheHeader, RewriteSystem};
use qn_workbench::qn::{self, Variant};
use qn_workbench::resolution::{
    check_d_squared, complex_homology, koszulity_verdict, peeling_complex, tor_bigraded,
};
use qn_workbench::scalar::FieldSpec;
use qn_workbench::series::{
    dual_polynomial_check, froberg_check, hilbert_series, quadratic_dual, Presentation,
};
use qn_workbench::util::atomic_write;
use qn_workbench::Error;
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

const CACHE_ENV: &str = "QN_WORKBENCH_CACHE";

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "text" => Ok(Format::Text),
        "json" => Ok(Format::Json),
        other => Err(format!("unknown format '{other}' (expected 'text' or 'json')")),
    }
}

#[derive(Parser)]
#[command(
    name = "qn-workbench",
    version,
    about = "Exact workbench for the quadratic algebras attached to pseudo-roots \
             of noncommutative polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Output format: text or json
    #[arg(long, global = true, default_value = "text", value_parser = parse_format)]
    format: Format,

    /// Coefficient field: rational or fp:P with P prime
    #[arg(long, global = true, default_value = "rational", value_parser = FieldSpec::parse)]
    field: FieldSpec,

    /// Worker threads for slice computations (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Truncated reduced rewrite system; for the graded algebra, compared
    /// against the closed-form basis
    Gb {
        /// Family rank
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=8))]
        n: u8,
        /// Which family algebra: q (ungraded) or gr (associated graded)
        #[arg(long, default_value = "gr", value_parser = Variant::parse)]
        algebra: Variant,
        /// Completion truncation degree
        #[arg(long, default_value_t = 5)]
        max_degree: usize,
        /// Cache directory (default: $QN_WORKBENCH_CACHE)
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Dimension series; with --n and no --algebra, both family algebras
    /// are computed and verified equal entrywise
    #[command(group = clap::ArgGroup::new("source").required(true).args(["n", "presentation"]))]
    Hilbert {
        /// Family rank
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=8))]
        n: Option<u8>,
        /// Restrict to one family algebra
        #[arg(long, value_parser = Variant::parse, conflicts_with = "presentation")]
        algebra: Option<Variant>,
        /// Highest degree reported
        #[arg(long, default_value_t = 5)]
        max_degree: usize,
        /// Presentation file (line 1 `generators: …`, then one relation per line)
        #[arg(long)]
        presentation: Option<PathBuf>,
    },
    /// Quadratic dual: generators, relations, dimensions; for the ungraded
    /// family algebra, also the finite-top-degree verdict
    #[command(group = clap::ArgGroup::new("source").required(true).args(["n", "presentation"]))]
    Dual {
        /// Family rank
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=8))]
        n: Option<u8>,
        /// Which family algebra to dualize
        #[arg(long, default_value = "q", value_parser = Variant::parse, conflicts_with = "presentation")]
        algebra: Variant,
        /// Highest dual degree reported (default: n + 2 for the family, 6 otherwise)
        #[arg(long)]
        max_degree: Option<usize>,
        /// Presentation file
        #[arg(long)]
        presentation: Option<PathBuf>,
    },
    /// Alternating convolution of the series with its dual's; must telescope
    /// to 1, 0, 0, …
    #[command(group = clap::ArgGroup::new("source").required(true).args(["n", "presentation"]))]
    Froberg {
        /// Family rank
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=8))]
        n: Option<u8>,
        /// Restrict to one family algebra (default: check both)
        #[arg(long, value_parser = Variant::parse, conflicts_with = "presentation")]
        algebra: Option<Variant>,
        /// Highest degree checked
        #[arg(long, default_value_t = 6)]
        max_degree: usize,
        /// Presentation file
        #[arg(long)]
        presentation: Option<PathBuf>,
    },
    /// The peeling complex over the graded algebra: build it, check d² = 0,
    /// and verify slice-by-slice acyclicity
    Complex {
        /// Family rank
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        n: u8,
        /// Internal-degree bound for the homology check
        #[arg(long, default_value_t = 5)]
        max_degree: usize,
    },
    /// Bigraded Tor of the trivial module and the bounded Koszulity verdict
    #[command(group = clap::ArgGroup::new("source").required(true).args(["n", "presentation"]))]
    Tor {
        /// Family rank
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=8))]
        n: Option<u8>,
        /// Which family algebra
        #[arg(long, default_value = "gr", value_parser = Variant::parse, conflicts_with = "presentation")]
        algebra: Variant,
        /// Highest homological degree
        #[arg(long, default_value_t = 4)]
        i_max: usize,
        /// Highest internal degree
        #[arg(long, default_value_t = 6)]
        j_max: usize,
        /// Presentation file
        #[arg(long)]
        presentation: Option<PathBuf>,
    },
    /// Run the whole battery of checks for one rank and report per-check
    /// verdicts with timings
    VerifyAll {
        /// Family rank
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
        n: u8,
    },
    /// Dump a presentation, a rewrite system, or the peeling complex as text
    Export {
        /// What to dump: presentation, gb, or complex
        #[arg(long, value_parser = parse_what)]
        what: What,
        /// Family rank
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        n: u8,
        /// Which family algebra (presentation and gb only)
        #[arg(long, default_value = "gr", value_parser = Variant::parse)]
        algebra: Variant,
        /// Completion truncation degree (gb only)
        #[arg(long, default_value_t = 5)]
        max_degree: usize,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy)]
enum What {
    Presentation,
    Gb,
    Complex,
}

fn parse_what(s: &str) -> Result<What, String> {
    match s {
        "presentation" => Ok(What::Presentation),
        "gb" => Ok(What::Gb),
        "complex" => Ok(What::Complex),
        other => Err(format!("unknown export '{other}' (expected presentation, gb, or complex)")),
    }
}

struct CmdOut {
    command: &'static str,
    config: Value,
    verdict: String,
    data: Value,
    text: String,
    exit: i32,
}

fn truncated(command: &'static str, config: Value, need: usize, have: usize) -> CmdOut {
    CmdOut {
        command,
        config,
        verdict: "insufficient-truncation".into(),
        data: json!({ "need": need, "have": have }),
        text: format!("insufficient truncation: need degree {need}, have {have}\n"),
        exit: 3,
    }
}

macro_rules! or_trunc {
    ($e:expr, $cmd:literal, $config:expr) => {
        match $e {
            Ok(v) => v,
            Err(Error::InsufficientTruncation { need, have }) => {
                return Ok(truncated($cmd, $config, need, have))
            }
            Err(e) => return Err(e),
        }
    };
}

fn emit(out: &CmdOut, format: Format, started: Instant) {
    // ignore write failures (e.g. a closed pipe) — the exit code is the contract
    let mut stdout = std::io::stdout().lock();
    let _ = match format {
        Format::Json => {
            let envelope = json!({
                "command": out.command,
                "config": out.config,
                "verdict": out.verdict,
                "data": out.data,
                "elapsed_ms": started.elapsed().as_millis() as u64,
            });
            writeln!(stdout, "{}", serde_json::to_string_pretty(&envelope).unwrap())
        }
        Format::Text => {
            write!(stdout, "{}", out.text).and_then(|_| writeln!(stdout, "verdict: {}", out.verdict))
        }
    };
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().ok();
    }
    let format = cli.format;
    let started = Instant::now();
    match dispatch(cli) {
        Ok(out) => {
            emit(&out, format, started);
            std::process::exit(out.exit);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn dispatch(cli: Cli) -> Result<CmdOut, Error> {
    let field = cli.field;
    match cli.command {
        Cmd::Gb { n, algebra, max_degree, cache_dir } => cmd_gb(n, algebra, max_degree, cache_dir, field),
        Cmd::Hilbert { n, algebra, max_degree, presentation } => {
            cmd_hilbert(n, algebra, max_degree, presentation, field)
        }
        Cmd::Dual { n, algebra, max_degree, presentation } => {
            cmd_dual(n, algebra, max_degree, presentation, field)
        }
        Cmd::Froberg { n, algebra, max_degree, presentation } => {
            cmd_froberg(n, algebra, max_degree, presentation, field)
        }
        Cmd::Complex { n, max_degree } => cmd_complex(n, max_degree, field),
        Cmd::Tor { n, algebra, i_max, j_max, presentation } => {
            cmd_tor(n, algebra, i_max, j_max, presentation, field)
        }
        Cmd::VerifyAll { n } => cmd_verify_all(n, field),
        Cmd::Export { what, n, algebra, max_degree, out } => {
            cmd_export(what, n, algebra, max_degree, out, field)
        }
    }
}

fn load_presentation(path: &Path, field: FieldSpec) -> Result<Presentation, Error> {
    let text = std::fs::read_to_string(path)?;
    Presentation::parse(&text, field)
}

fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; cols];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{:>w$}", cell, w = widths[i]));
        }
        out.push('\n');
    }
    out
}

fn family_rewrite_system(
    n: u8,
    variant: Variant,
    max_degree: usize,
    field: FieldSpec,
) -> Result<RewriteSystem, Error> {
    if n == 1 {
        RewriteSystem::complete(&[], max_degree.max(2), field)
    } else {
        qn::family_system(n, variant, max_degree, field)
    }
}

fn cmd_gb(
    n: u8,
    algebra: Variant,
    max_degree: usize,
    cache_dir: Option<PathBuf>,
    field: FieldSpec,
) -> Result<CmdOut, Error> {
    let config = json!({
        "n": n, "algebra": algebra.to_string(), "max_degree": max_degree,
        "field": field.to_string(),
    });
    let alph = qn::alphabet(n);
    let relations = qn::relations(n, algebra, field)?;
    let header = CacheHeader { n, algebra: algebra.to_string(), max_degree, field };
    let cache_dir = cache_dir.or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from));
    let cache_path =
        cache_dir.map(|d| d.join(format!("qn{n}-{algebra}-deg{max_degree}-{field}.gb")));
    let mut cache_state = "off";
    let rs = match &cache_path {
        Some(path) if path.exists() => match RewriteSystem::read_cache(path, &alph) {
            Ok((h, rs)) if h == header => {
                cache_state = "hit";
                rs
            }
            _ => {
                cache_state = "refreshed";
                let rs = RewriteSystem::complete(&relations, max_degree, field)?;
                rs.write_cache(&header, &alph, path)?;
                rs
            }
        },
        Some(path) => {
            cache_state = "miss";
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            let rs = RewriteSystem::complete(&relations, max_degree, field)?;
            rs.write_cache(&header, &alph, path)?;
            rs
        }
        None => RewriteSystem::complete(&relations, max_degree, field)?,
    };
    let rules: Vec<String> = rs.rules().iter().map(|r| r.display(&alph).to_string()).collect();

    let mut text = format!("rewrite system for {algebra} (n={n}, degree <= {max_degree}):\n");
    for r in &rules {
        text.push_str(&format!("  {r}\n"));
    }
    let (closed, closed_match) = if algebra == Variant::Gr {
        let closed: Vec<String> = qn::closed_gb(n, field)?
            .iter()
            .filter(|g| g.homogeneous_degree().unwrap_or(usize::MAX) <= max_degree)
            .map(|g| g.monicized().display(&alph).to_string())
            .collect();
        let matches = rules.iter().collect::<BTreeSet<_>>() == closed.iter().collect::<BTreeSet<_>>();
        text.push_str(&format!("closed form ({} elements):\n", closed.len()));
        for g in &closed {
            text.push_str(&format!("  {g}\n"));
        }
        (Some(closed), Some(matches))
    } else {
        (None, None)
    };
    if let Some(p) = &cache_path {
        text.push_str(&format!("cache: {} ({})\n", cache_state, p.display()));
    }
    let pass = closed_match.unwrap_or(true);
    Ok(CmdOut {
        command: "gb",
        config,
        verdict: if pass { "pass" } else { "fail" }.into(),
        data: json!({
            "rule_count": rules.len(), "rules": rules,
            "closed": closed, "closed_match": closed_match,
            "cache": cache_state,
            "cache_path": cache_path.as_ref().map(|p| p.display().to_string()),
        }),
        text,
        exit: if pass { 0 } else { 2 },
    })
}

fn cmd_hilbert(
    n: Option<u8>,
    algebra: Option<Variant>,
    max_degree: usize,
    presentation: Option<PathBuf>,
    field: FieldSpec,
) -> Result<CmdOut, Error> {
    let config = json!({
        "n": n, "algebra": algebra.map(|a| a.to_string()), "max_degree": max_degree,
        "field": field.to_string(),
        "presentation": presentation.as_ref().map(|p| p.display().to_string()),
    });
    if let Some(path) = presentation {
        let pres = load_presentation(&path, field)?;
        let h = hilbert_series(&pres, max_degree)?;
        return Ok(CmdOut {
            command: "hilbert",
            config,
            verdict: "pass".into(),
            data: json!({ "series": h }),
            text: format!("dimensions: {h}\n"),
            exit: 0,
        });
    }
    let n = n.unwrap();
    match algebra {
        Some(variant) => {
            let h = hilbert_series(&qn::presentation(n, variant, field)?, max_degree)?;
            Ok(CmdOut {
                command: "hilbert",
                config,
                verdict: "pass".into(),
                data: json!({ "series": h }),
                text: format!("{variant} dimensions: {h}\n"),
                exit: 0,
            })
        }
        None => {
            let hq = hilbert_series(&qn::presentation(n, Variant::Q, field)?, max_degree)?;
            let hgr = hilbert_series(&qn::presentation(n, Variant::Gr, field)?, max_degree)?;
            let equal = hq == hgr;
            let text = format!(" q dimensions: {hq}\ngr dimensions: {hgr}\nentrywise equal: {equal}\n");
            Ok(CmdOut {
                command: "hilbert",
                config,
                verdict: if equal { "pass" } else { "fail" }.into(),
                data: json!({ "q": hq, "gr": hgr, "equal": equal }),
                text,
                exit: if equal { 0 } else { 2 },
            })
        }
    }
}

fn cmd_dual(
    n: Option<u8>,
    algebra: Variant,
    max_degree: Option<usize>,
    presentation: Option<PathBuf>,
    field: FieldSpec,
) -> Result<CmdOut, Error> {
    let config = json!({
        "n": n, "algebra": algebra.to_string(), "max_degree": max_degree,
        "field": field.to_string(),
        "presentation": presentation.as_ref().map(|p| p.display().to_string()),
    });
    let (pres, family_n) = match &presentation {
        Some(path) => (load_presentation(path, field)?, None),
        None => {
            let n = n.unwrap();
            (qn::presentation(n, algebra, field)?, Some(n))
        }
    };
    let dual = quadratic_dual(&pres)?;
    let md = max_degree.unwrap_or(match family_n {
        Some(n) => n as usize + 2,
        None => 6,
    });
    let dims = hilbert_series(&dual, md)?;
    let mut text = format!("dual presentation:\n{}", dual.render());
    text.push_str(&format!("dual dimensions: {dims}\n"));
    let mut data = json!({
        "dual_generators": dual.alphabet.labels(),
        "dual_relation_count": dual.relations.len(),
        "dual_dims": dims,
    });
    let (verdict, exit) = if let (Some(n), Variant::Q) = (family_n, algebra) {
        let rep = or_trunc!(dual_polynomial_check(n, md, field), "dual", config.clone());
        text.push_str(&format!(
            "nonzero through degree {n}: {}; zero beyond: {}\n",
            rep.nonzero_through_n, rep.zero_beyond_n
        ));
        let ok = rep.ok;
        data["polynomiality"] = serde_json::to_value(&rep).unwrap();
        (if ok { "pass" } else { "fail" }, if ok { 0 } else { 2 })
    } else {
        ("pass", 0)
    };
    Ok(CmdOut { command: "dual", config, verdict: verdict.into(), data, text, exit })
}

fn cmd_froberg(
    n: Option<u8>,
    algebra: Option<Variant>,
    max_degree: usize,
    presentation: Option<PathBuf>,
    field: FieldSpec,
) -> Result<CmdOut, Error> {
    let config = json!({
        "n": n, "algebra": algebra.map(|a| a.to_string()), "max_degree": max_degree,
        "field": field.to_string(),
        "presentation": presentation.as_ref().map(|p| p.display().to_string()),
    });
    let targets: Vec<(String, Presentation)> = match &presentation {
        Some(path) => vec![("presentation".into(), load_presentation(path, field)?)],
        None => {
            let n = n.unwrap();
            let variants = match algebra {
                Some(v) => vec![v],
                None => vec![Variant::Q, Variant::Gr],
            };
            variants
                .into_iter()
                .map(|v| Ok((v.to_string(), qn::presentation(n, v, field)?)))
                .collect::<Result<_, Error>>()?
        }
    };
    let mut text = String::new();
    let mut entries = Vec::new();
    let mut all_ok = true;
    for (label, pres) in &targets {
        let h = hilbert_series(pres, max_degree)?;
        let dual = quadratic_dual(pres)?;
        let hd = hilbert_series(&dual, max_degree)?;
        let rep = froberg_check(&h, &hd, max_degree);
        all_ok &= rep.ok;
        text.push_str(&format!("{label}: series {h}, dual {hd}\n"));
        let mut rows = vec![vec!["degree".to_string(), "convolution".to_string()]];
        for (d, c) in rep.convolution.iter().enumerate() {
            rows.push(vec![d.to_string(), c.to_string()]);
        }
        text.push_str(&aligned(&rows));
        if let Some(d) = rep.first_failure {
            text.push_str(&format!("first failure at degree {d}\n"));
        }
        entries.push(json!({
            "algebra": label, "series": h, "dual_series": hd,
            "report": serde_json::to_value(&rep).unwrap(),
        }));
    }
    Ok(CmdOut {
        command: "froberg",
        config,
        verdict: if all_ok { "pass" } else { "fail" }.into(),
        data: json!({ "checks": entries }),
        text,
        exit: if all_ok { 0 } else { 2 },
    })
}

fn cmd_complex(n: u8, max_degree: usize, field: FieldSpec) -> Result<CmdOut, Error> {
    let config = json!({ "n": n, "max_degree": max_degree, "field": field.to_string() });
    let cx = peeling_complex(n, field);
    let rs = family_rewrite_system(n, Variant::Gr, max_degree + 1, field)?;
    let d2 = check_d_squared(&cx, &rs)?;
    let hom = or_trunc!(complex_homology(&cx, &rs, max_degree), "complex", config.clone());
    let pass = d2.ok && hom.ok;
    let mut text = format!("generators per position: {:?}\n", cx.gen_counts());
    text.push_str(&format!(
        "d^2: {} composites, {}\n",
        d2.composites_checked,
        if d2.ok { "all reduce to zero".to_string() } else { format!("{} nonzero", d2.failures.len()) }
    ));
    for f in &d2.failures {
        text.push_str(&format!("  {} -> {}: residue {}\n", f.source, f.target, f.residue));
    }
    let mut rows = vec![["i", "j", "chain", "rank_out", "rank_in", "dim"]
        .map(String::from)
        .to_vec()];
    for s in &hom.slices {
        rows.push(vec![
            s.position.to_string(),
            s.degree.to_string(),
            s.chain_dim.to_string(),
            s.rank_out.to_string(),
            s.rank_in.to_string(),
            s.homology_dim.to_string(),
        ]);
    }
    text.push_str(&aligned(&rows));
    let table: Vec<Value> = hom
        .slices
        .iter()
        .map(|s| json!({ "i": s.position, "j": s.degree, "dim": s.homology_dim }))
        .collect();
    Ok(CmdOut {
        command: "complex",
        config,
        verdict: if pass { "pass" } else { "fail" }.into(),
        data: json!({
            "gen_counts": cx.gen_counts(),
            "d_squared": serde_json::to_value(&d2).unwrap(),
            "homology": serde_json::to_value(&hom).unwrap(),
            "table": table,
        }),
        text,
        exit: if pass { 0 } else { 2 },
    })
}

fn cmd_tor(
    n: Option<u8>,
    algebra: Variant,
    i_max: usize,
    j_max: usize,
    presentation: Option<PathBuf>,
    field: FieldSpec,
) -> Result<CmdOut, Error> {
    let config = json!({
        "n": n, "algebra": algebra.to_string(), "i_max": i_max, "j_max": j_max,
        "field": field.to_string(),
        "presentation": presentation.as_ref().map(|p| p.display().to_string()),
    });
    let pres = match &presentation {
        Some(path) => load_presentation(path, field)?,
        None => qn::presentation(n.unwrap(), algebra, field)?,
    };
    let rep = koszulity_verdict(&pres, i_max, j_max)?;
    let mut rows = Vec::new();
    let mut header = vec!["i\\j".to_string()];
    header.extend((0..=j_max).map(|j| j.to_string()));
    rows.push(header);
    for (i, row) in rep.tor.dims.iter().enumerate() {
        let mut r = vec![i.to_string()];
        r.extend(row.iter().map(u64::to_string));
        rows.push(r);
    }
    let mut text = String::from("bigraded Tor dimensions:\n");
    text.push_str(&aligned(&rows));
    text.push_str(&format!("diagonal: {:?}\n", rep.tor.diagonal));
    text.push_str(&format!("dual dimensions: {:?}\n", rep.dual_dims));
    text.push_str(&format!("chain-count bounds: {:?}\n", rep.chain_bounds));
    text.push_str(&format!(
        "off-diagonal zero: {}; diagonal matches dual: {}; within bounds: {}\n",
        rep.tor.off_diagonal_zero, rep.diagonal_matches_dual, rep.diagonal_within_bounds
    ));
    let table: Vec<Value> = rep
        .tor
        .dims
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter().enumerate().filter(|(_, &v)| v > 0).map(move |(j, &v)| {
                json!({ "i": i, "j": j, "dim": v })
            })
        })
        .collect();
    let pass = rep.pass;
    Ok(CmdOut {
        command: "tor",
        config,
        verdict: if pass { "pass" } else { "fail" }.into(),
        data: json!({
            "report": serde_json::to_value(&rep).unwrap(),
            "table": table,
        }),
        text,
        exit: if pass { 0 } else { 2 },
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn cmd_verify_all(n: u8, field: FieldSpec) -> Result<CmdOut, Error> {
    let config = json!({ "n": n, "field": field.to_string() });
    let hilbert_deg: usize = if n <= 3 { 5 } else { 4 };
    let froberg_deg: usize = if n <= 3 { 6 } else { 5 };
    let homology_bound: usize = if n <= 3 { 6 } else { 5 };
    let (i_max, j_max): (usize, usize) = if n <= 3 { (4, 6) } else { (3, 4) };

    type Check = Box<dyn Fn() -> Result<(bool, Value), Error>>;
    let checks: Vec<(&str, String, Check)> = vec![
        (
            "gb-closed-form",
            "degree-5 completion equals the closed-form basis".into(),
            Box::new(move || {
                let alph = qn::alphabet(n);
                let rs = qn::family_system(n, Variant::Gr, 5, field)?;
                let computed: BTreeSet<String> =
                    rs.rules().iter().map(|r| r.display(&alph).to_string()).collect();
                let closed: BTreeSet<String> = qn::closed_gb(n, field)?
                    .iter()
                    .filter(|g| g.homogeneous_degree().unwrap_or(usize::MAX) <= 5)
                    .map(|g| g.monicized().display(&alph).to_string())
                    .collect();
                let pass = computed == closed;
                Ok((pass, json!({ "computed": computed.len(), "closed": closed.len() })))
            }),
        ),
        (
            "normal-words",
            "automaton counts match direct enumeration through degree 6".into(),
            Box::new(move || {
                let pres = qn::presentation(n, Variant::Gr, field)?;
                let h = hilbert_series(&pres, 6)?;
                let rs = qn::family_system(n, Variant::Gr, 6, field)?;
                let g = qn::alphabet(n).len();
                let mut pass = true;
                for d in 0..=6usize {
                    pass &= qn::normal_words(n, d).len() as u64 == h[d];
                    pass &= rs.normal_words(g, d).len() as u64 == h[d];
                }
                if n == 2 {
                    pass &= h.dims() == [1, 3, 8, 21, 55, 144, 377];
                }
                Ok((pass, json!({ "counts": h })))
            }),
        ),
        (
            "hilbert-match",
            format!("ungraded and graded series agree through degree {hilbert_deg}"),
            Box::new(move || {
                let hq = hilbert_series(&qn::presentation(n, Variant::Q, field)?, hilbert_deg)?;
                let hgr = hilbert_series(&qn::presentation(n, Variant::Gr, field)?, hilbert_deg)?;
                Ok((hq == hgr, json!({ "q": hq, "gr": hgr })))
            }),
        ),
        (
            "froberg",
            format!("series convolution telescopes through degree {froberg_deg}, both algebras"),
            Box::new(move || {
                let mut pass = true;
                let mut details = Vec::new();
                for variant in [Variant::Q, Variant::Gr] {
                    let pres = qn::presentation(n, variant, field)?;
                    let h = hilbert_series(&pres, froberg_deg)?;
                    let hd = hilbert_series(&quadratic_dual(&pres)?, froberg_deg)?;
                    let rep = froberg_check(&h, &hd, froberg_deg);
                    pass &= rep.ok;
                    details.push(json!({ "algebra": variant.to_string(), "ok": rep.ok }));
                }
                Ok((pass, Value::Array(details)))
            }),
        ),
        (
            "dual-polynomial",
            format!("dual dimensions vanish exactly above degree {n}"),
            Box::new(move || {
                let rep = dual_polynomial_check(n, n as usize + 2, field)?;
                Ok((rep.ok, json!({ "dims": rep.dual_dims })))
            }),
        ),
        (
            "complex-acyclic",
            format!("d^2 = 0 and homology vanishes through degree {homology_bound}"),
            Box::new(move || {
                let cx = peeling_complex(n, field);
                let rs = qn::family_system(n, Variant::Gr, homology_bound + 1, field)?;
                let d2 = check_d_squared(&cx, &rs)?;
                let hom = complex_homology(&cx, &rs, homology_bound)?;
                Ok((
                    d2.ok && hom.ok,
                    json!({ "composites": d2.composites_checked, "homology_ok": hom.ok }),
                ))
            }),
        ),
        (
            "koszulity",
            format!("Tor diagonal within ({i_max}, {j_max}) for both algebras"),
            Box::new(move || {
                let mut pass = true;
                let mut details = Vec::new();
                for variant in [Variant::Q, Variant::Gr] {
                    let pres = qn::presentation(n, variant, field)?;
                    let rep = koszulity_verdict(&pres, i_max, j_max)?;
                    pass &= rep.pass;
                    details.push(json!({
                        "algebra": variant.to_string(),
                        "diagonal": rep.tor.diagonal,
                        "pass": rep.pass,
                    }));
                }
                Ok((pass, Value::Array(details)))
            }),
        ),
        (
            "structure-counts",
            "generator and relation counts match the closed formulas".into(),
            Box::new(move || {
                let tor = tor_bigraded(&qn::presentation(n, Variant::Gr, field)?, 2, 2)?;
                let t11_expected = (1u64 << n) - 1;
                let t22_expected: u64 =
                    (1..=n as u64).map(|k| binomial(n as u64, k) * (k - 1)).sum();
                let counts = peeling_complex(n, field).gen_counts();
                let counts_expected: Vec<usize> = (1..=n as u64)
                    .map(|t| {
                        (1..=n as u64)
                            .map(|k| binomial(n as u64, k) * binomial(k - 1, t - 1))
                            .sum::<u64>() as usize
                    })
                    .collect();
                let pass = tor.dims[1][1] == t11_expected
                    && tor.dims[2][2] == t22_expected
                    && counts == counts_expected;
                Ok((
                    pass,
                    json!({
                        "tor_1_1": tor.dims[1][1], "tor_2_2": tor.dims[2][2],
                        "gen_counts": counts,
                    }),
                ))
            }),
        ),
    ];

    let mut text = format!("verification battery for n={n}:\n");
    let mut entries = Vec::new();
    let mut all_pass = true;
    let mut rows = vec![["check", "result", "ms"].map(String::from).to_vec()];
    for (name, description, run) in &checks {
        let t0 = Instant::now();
        let (pass, details) = match run() {
            Ok((pass, details)) => (pass, details),
            Err(e) => (false, json!({ "error": e.to_string() })),
        };
        let ms = t0.elapsed().as_millis() as u64;
        all_pass &= pass;
        rows.push(vec![
            name.to_string(),
            if pass { "pass" } else { "FAIL" }.to_string(),
            ms.to_string(),
        ]);
        entries.push(json!({
            "check": name, "description": description, "pass": pass,
            "elapsed_ms": ms, "details": details,
        }));
    }
    text.push_str(&aligned(&rows));
    Ok(CmdOut {
        command: "verify-all",
        config,
        verdict: if all_pass { "pass" } else { "fail" }.into(),
        data: json!({ "checks": entries, "all_pass": all_pass }),
        text,
        exit: if all_pass { 0 } else { 2 },
    })
}

fn cmd_export(
    what: What,
    n: u8,
    algebra: Variant,
    max_degree: usize,
    out: Option<PathBuf>,
    field: FieldSpec,
) -> Result<CmdOut, Error> {
    let what_name = match what {
        What::Presentation => "presentation",
        What::Gb => "gb",
        What::Complex => "complex",
    };
    let config = json!({
        "what": what_name, "n": n, "algebra": algebra.to_string(),
        "max_degree": max_degree, "field": field.to_string(),
        "out": out.as_ref().map(|p| p.display().to_string()),
    });
    let content = match what {
        What::Presentation => qn::presentation(n, algebra, field)?.render(),
        What::Gb => {
            let alph = qn::alphabet(n);
            let rs = family_rewrite_system(n, algebra, max_degree, field)?;
            let header = CacheHeader { n, algebra: algebra.to_string(), max_degree, field };
            rs.render_cache(&header, &alph)
        }
        What::Complex => peeling_complex(n, field).render(),
    };
    let (text, stored) = match &out {
        Some(path) => {
            atomic_write(path, &content)?;
            (format!("wrote {} ({} bytes)\n", path.display(), content.len()), None)
        }
        None => (content.clone(), Some(content)),
    };
    Ok(CmdOut {
        command: "export",
        config,
        verdict: "pass".into(),
        data: json!({
            "what": what_name,
            "path": out.as_ref().map(|p| p.display().to_string()),
            "content": stored,
        }),
        text,
        exit: 0,
    })
}
