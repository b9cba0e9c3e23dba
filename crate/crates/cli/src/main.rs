mod cache;
mod suites;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use torus_ksys::families::{generate, leading_order, table_row, FamilyKind, FamilySpec};
use torus_ksys::ksystem::{
    agol_bound, eta_from_table, invert_bound, kappa_min, kappa_with_pair, SearchOptions,
};
use torus_ksys::numtheory::{gamma_graph, gamma_graph_unchecked};
use torus_ksys::render::{ford_svg, geodesic_svg, triangulation_svg};
use torus_ksys::triangulation::{default_labelling, ENUMERATE_MAX_N};
use torus_ksys::{iota, Error, FareyLabelling, SearchRecord, Slope, Triangulation};

use cache::Cache;
use suites::Suite;

/// Exact k-system computations for curves on the torus.
#[derive(Parser, Debug)]
#[command(name = "torus-ksys", version)]
struct Cli {
    /// Largest polygon size the exhaustive searches may reach.
    #[arg(long, global = true, default_value_t = 14, value_parser = clap::value_parser!(u64).range(3..=ENUMERATE_MAX_N as u64))]
    max_n: u64,
    /// JSON-lines file of search results, reused across runs.
    #[arg(long, global = true, env = "TORUS_KSYS_CACHE")]
    cache: Option<PathBuf>,
    /// Worker threads for the searches (defaults to available parallelism).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for the randomised corpora.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
    Svg,
    Dot,
}

#[derive(Args, Debug)]
struct Source {
    /// Triangulation file: `{"n": .., "diagonals": [[i, j], ..]}` or a JSON
    /// array of slopes such as `["0/1", "1/1", "1/0"]`.
    #[arg(long, conflicts_with = "family")]
    file: Option<PathBuf>,
    #[arg(long, requires = "param")]
    family: Option<FamilyKind>,
    #[arg(long)]
    param: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Intersection number of two slopes.
    Iota { a: Slope, b: Slope },
    /// Largest pairwise intersection of a triangulation's slopes.
    Kappa(Source),
    /// Least κ over all triangulations of the n-gon.
    KappaMin {
        #[arg(long)]
        n: usize,
        /// Recompute even when the cache has a record.
        #[arg(long)]
        force: bool,
        /// Search every triangulation instead of one per dihedral orbit.
        #[arg(long)]
        no_symmetry: bool,
    },
    /// Largest k-system on the torus.
    Eta {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        force: bool,
    },
    /// Exact values for a family member next to the table's leading order.
    Family {
        #[arg(long)]
        kind: FamilyKind,
        #[arg(long)]
        param: u64,
        /// Emit every member from the smallest up to `--param`.
        #[arg(long)]
        table: bool,
    },
    /// The coprime graph on 1..=h.
    Gamma {
        #[arg(long)]
        h: u64,
    },
    /// Run verification suites; exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// SVG pictures.
    Render {
        #[command(subcommand)]
        what: RenderKind,
        /// Write here instead of standard output.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// η, the prime bound and the inverted asymptotic bound side by side.
    Bounds {
        #[arg(long)]
        k: u64,
        /// Constant in `n − C√n ln n ≤ k`.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
}

#[derive(Subcommand, Debug)]
enum RenderKind {
    /// Ford circles over [0, 1].
    Ford {
        #[arg(long, default_value_t = 8)]
        max_denom: u64,
    },
    /// The polygon, with the fan and branches of one horoball highlighted.
    Hull {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        vertex: Option<usize>,
    },
    /// Ford circles of the labels with the κ geodesic and its midpoint.
    Geodesic {
        #[command(flatten)]
        source: Source,
    },
}

/// A failed check, as opposed to bad input.
#[derive(Debug)]
struct Violation(String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Violation {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Violation>().is_some() {
        return 1;
    }
    match e.downcast_ref::<Error>() {
        Some(
            Error::Invariant(_)
            | Error::InconsistentAssignment(_)
            | Error::NotAKSystem { .. }
            | Error::DegeneratePath(_)
            | Error::EmptyHeightClass(_),
        ) => 1,
        Some(_) => 2,
        // I/O and cache corruption: the run could not be trusted.
        None => 1,
    }
}

struct Ctx {
    max_n: usize,
    cache: Option<Cache>,
    format: Option<Format>,
    seed: u64,
}

impl Ctx {
    fn format(&self, default: Format, allowed: &[Format]) -> anyhow::Result<Format> {
        let f = self.format.unwrap_or(default);
        if !allowed.contains(&f) {
            return Err(Error::InvalidParameter(format!(
                "format {f:?} not supported here; use one of {allowed:?}"
            ))
            .into());
        }
        Ok(f)
    }

    /// `κ_T(n)`, from the cache when a verified record exists.
    fn search(&mut self, n: usize, force: bool, symmetry: bool) -> anyhow::Result<SearchRecord> {
        if !force {
            if let Some(r) = self.cache.as_ref().and_then(|c| c.get(n)) {
                r.verify().map_err(|e| Violation(format!("cache: {e}")))?;
                return Ok(r.clone());
            }
        }
        let opts = SearchOptions {
            max_n: self.max_n,
            symmetry,
        };
        let r = kappa_min(n, &opts)?;
        if let Some(c) = self.cache.as_mut() {
            c.append(r.clone())?;
        }
        Ok(r)
    }
}

fn load_source(s: &Source) -> anyhow::Result<(Triangulation, FareyLabelling)> {
    if let Some(path) = &s.file {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
        if value.is_array() {
            let slopes: Vec<Slope> = serde_json::from_value(value)
                .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
            return Ok(Triangulation::from_slopes(&slopes)?);
        }
        let t: Triangulation = serde_json::from_value(value)
            .map_err(|e| Error::InvalidTriangulation(format!("{}: {e}", path.display())))?;
        let l = default_labelling(&t);
        return Ok((t, l));
    }
    match (s.family, s.param) {
        (Some(kind), Some(param)) => Ok(generate(&FamilySpec::new(kind, param)?)?),
        _ => Err(Error::InvalidParameter("give --file or --family with --param".into()).into()),
    }
}

fn diagonals_text(t: &Triangulation) -> String {
    let d: Vec<String> = t
        .diagonals()
        .iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect();
    format!("[{}]", d.join(" "))
}

fn emit(out: &mut impl Write, text: &str) -> anyhow::Result<()> {
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn json_line(v: &impl serde::Serialize) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn family_csv(specs: &[FamilySpec]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "family",
        "param",
        "n",
        "kappa_exact",
        "kappa_leading_order",
        "kappa_leading_value",
        "max_width_exact",
        "width_leading_order",
        "width_leading_value",
        "height_at_max_width_exact",
        "height_leading_order",
        "height_leading_value",
    ])?;
    for spec in specs {
        let row = table_row(spec)?;
        let lead = leading_order(spec);
        w.write_record([
            spec.kind.short_name().to_string(),
            spec.param.to_string(),
            row.n.to_string(),
            row.kappa.to_string(),
            lead.kappa.to_string(),
            format!("{:.3}", lead.kappa_value),
            row.max_width.to_string(),
            lead.width.to_string(),
            format!("{:.3}", lead.width_value),
            row.height_at_max_width.to_string(),
            lead.height.to_string(),
            format!("{:.3}", lead.height_value),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn family_min(kind: FamilyKind) -> u64 {
    match kind {
        FamilyKind::Chain | FamilyKind::Achain => 3,
        FamilyKind::Regular => 1,
        FamilyKind::Farey => 2,
    }
}

fn run(cli: Cli, out: &mut impl Write) -> anyhow::Result<()> {
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w as usize)
            .build_global()
            .map_err(|e| anyhow!("worker pool: {e}"))?;
    }
    if cli.max_n > 14 {
        eprintln!(
            "warning: --max-n {} goes past the default frontier; searches may take hours",
            cli.max_n
        );
    }
    let cache = cli.cache.as_deref().map(Cache::open).transpose()?;
    let mut ctx = Ctx {
        max_n: cli.max_n as usize,
        cache,
        format: cli.format,
        seed: cli.seed,
    };
    use Format::*;
    match cli.command {
        Command::Iota { a, b } => {
            let i = iota(&a, &b);
            match ctx.format(Text, &[Text, Json])? {
                Json => emit(
                    out,
                    &json!({"a": a, "b": b, "iota": i.to_string()}).to_string(),
                ),
                _ => emit(out, &i.to_string()),
            }
        }
        Command::Kappa(source) => {
            let (t, l) = load_source(&source)?;
            let (k, (u, v)) = kappa_with_pair(&l);
            match ctx.format(Text, &[Text, Json])? {
                Json => emit(
                    out,
                    &json_line(&json!({
                        "n": t.n(),
                        "kappa": k.to_string(),
                        "pair": [u, v],
                        "slopes": [l.label(u), l.label(v)],
                    }))?,
                ),
                _ => emit(
                    out,
                    &format!(
                        "kappa = {k} (n = {}, attained by {} and {})",
                        t.n(),
                        l.label(u),
                        l.label(v)
                    ),
                ),
            }
        }
        Command::KappaMin {
            n,
            force,
            no_symmetry,
        } => {
            let r = ctx.search(n, force, !no_symmetry)?;
            match ctx.format(Text, &[Text, Json])? {
                Json => emit(out, &json_line(&r)?),
                _ => emit(
                    out,
                    &format!(
                        "kappa_T({n}) = {}\nwitness: {}",
                        r.kappa_min,
                        diagonals_text(&r.witness)
                    ),
                ),
            }
        }
        Command::Eta { k, force } => {
            let mut records = Vec::new();
            if k > 0 {
                for n in 3..=ctx.max_n {
                    let r = ctx.search(n, force, true)?;
                    let done = r.kappa_min > k;
                    records.push(r);
                    if done {
                        break;
                    }
                }
            }
            let e = eta_from_table(k, &records)?;
            match ctx.format(Text, &[Text, Json])? {
                Json => emit(out, &json_line(&e)?),
                _ => {
                    let mut text = format!("eta_T({k}) = {}", e.value);
                    if let Some(w) = &e.witness {
                        let l = default_labelling(w);
                        let slopes: Vec<String> = l.labels.iter().map(|s| s.to_string()).collect();
                        text += &format!(
                            "\nwitness: {}\nslopes: {}",
                            diagonals_text(w),
                            slopes.join(" ")
                        );
                    }
                    emit(out, &text)
                }
            }
        }
        Command::Family { kind, param, table } => {
            let lo = if table { family_min(kind) } else { param };
            let specs: Vec<FamilySpec> = (lo..=param)
                .map(|p| FamilySpec::new(kind, p))
                .collect::<Result<_, _>>()?;
            match ctx.format(Csv, &[Csv, Json])? {
                Json => {
                    let rows: Vec<_> = specs
                        .iter()
                        .map(|s| -> anyhow::Result<_> {
                            Ok(json!({"exact": table_row(s)?, "leading_order": leading_order(s)}))
                        })
                        .collect::<anyhow::Result<_>>()?;
                    emit(out, &json_line(&rows)?)
                }
                _ => emit(out, &family_csv(&specs)?),
            }
        }
        Command::Gamma { h } => {
            let g = gamma_graph_unchecked(h)?;
            if let Err(e) = g.verify() {
                bail!(Violation(e.to_string()));
            }
            match ctx.format(Json, &[Json, Dot])? {
                Dot => emit(out, &g.to_dot()),
                _ => emit(
                    out,
                    &json_line(&json!({
                        "h": g.h,
                        "edges": g.edges,
                        "degrees": &g.degrees()[1..],
                        "weight_sum": gamma_graph(h)?.weight_sum().to_string(),
                    }))?,
                ),
            }
        }
        Command::Verify { suite } => {
            let checks = suites::run(suite, ctx.seed)?;
            match ctx.format(Text, &[Text, Json])? {
                Json => emit(out, &json_line(&checks)?)?,
                _ => {
                    for c in &checks {
                        let status = if c.passed { "ok  " } else { "FAIL" };
                        writeln!(out, "{status} [{}] {}: {}", c.suite, c.name, c.detail)?;
                    }
                }
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                bail!(Violation(format!("{failed} checks failed")));
            }
            Ok(())
        }
        Command::Render { what, out: path } => {
            ctx.format(Svg, &[Svg])?;
            let svg = match what {
                RenderKind::Ford { max_denom } => {
                    if max_denom == 0 || max_denom > 200 {
                        bail!(Error::InvalidParameter(format!(
                            "--max-denom must lie in 1..=200, got {max_denom}"
                        )));
                    }
                    ford_svg(max_denom)
                }
                RenderKind::Hull { source, vertex } => {
                    let (t, l) = load_source(&source)?;
                    triangulation_svg(&t, &l, vertex)?
                }
                RenderKind::Geodesic { source } => {
                    let (t, l) = load_source(&source)?;
                    geodesic_svg(&t, &l)?.0
                }
            };
            match path {
                Some(p) => write_file(&p, &svg),
                None => emit(out, &svg),
            }
        }
        Command::Bounds { k, c } => {
            if !(c.is_finite() && c >= 0.0) {
                bail!(Error::InvalidParameter(format!(
                    "--c must be a finite non-negative number, got {c}"
                )));
            }
            let mut records = Vec::new();
            let mut eta = None;
            if k > 0 {
                for n in 3..=ctx.max_n {
                    let r = ctx.search(n, false, true)?;
                    let done = r.kappa_min > k;
                    records.push(r);
                    if done {
                        break;
                    }
                }
            }
            match eta_from_table(k, &records) {
                Ok(e) => eta = Some(e.value),
                Err(Error::FrontierExceeded { .. }) => {}
                Err(e) => return Err(e.into()),
            }
            let agol = agol_bound(k);
            let inverted = if k > 0 {
                Some(invert_bound(k, c)?)
            } else {
                None
            };
            match ctx.format(Text, &[Text, Json])? {
                Json => emit(
                    out,
                    &json_line(
                        &json!({"k": k, "eta": eta, "agol_bound": agol, "c": c, "inverted_bound": inverted}),
                    )?,
                ),
                _ => {
                    let show = |v: Option<u64>, missing: &str| {
                        v.map_or(missing.to_string(), |v| v.to_string())
                    };
                    let frontier = format!("beyond n <= {} frontier", ctx.max_n);
                    emit(
                        out,
                        &format!(
                            "k = {k}\neta_T(k) = {}\n1 + nextprime(k) = {agol}\nmax{{n : n - {c}*sqrt(n)*ln(n) <= k}} = {}",
                            show(eta.map(|e| e as u64), &frontier),
                            show(inverted, "undefined for k = 0"),
                        ),
                    )
                }
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<std::io::Error>()
        .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
