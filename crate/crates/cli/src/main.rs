use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use cmspress::boundary::{
    boundary_entropy, build_boundary_model, check_lemmas, BoundaryModel, BoundaryOptions, BoundarySource,
    CompactifiedShift, InferenceMode, LemmaReport,
};
use cmspress::diff::{kink_scan, parse_grid, pressure_curve_threaded};
use cmspress::gallery::{instantiate, instantiate_with, GalleryEntry, GalleryParams, CATALOGUE};
use cmspress::io::{self, BoundaryFile, GalleryBundle};
use cmspress::metric::{classify, ShiftMetric, VertexMetric};
use cmspress::potential::{Formula, Potential};
use cmspress::pressure::{
    compactified_pressure, gurevich_pressure, interior_pressure_threaded, loop_entropy, separated_set_pressure,
    sft_pressure, PressureEstimate, SchedulePoint,
};
use cmspress::sectors::{decompose_threaded, verify, SectorCertificate, SectorDecomposition, SectorWitness};
use cmspress::shift::{truncate, Generator, Label, ShiftSpec, VertexId};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] cmspress::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "cmspress", version, about = "Pressure of countable Markov shifts and their compactifications")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "CMSPRESS_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads for independent evaluations.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the pressure of a potential.
    Pressure(PressureArgs),
    /// Sector decomposition and its certificate.
    Sectors(SectorsArgs),
    /// Boundary model, lemma checks and boundary entropy.
    Boundary(BoundaryArgs),
    /// Pressure along the line φ + tψ with second differences and kinks.
    DiffScan(DiffScanArgs),
    /// Named example systems.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Interior and compactified pressure side by side on non-sectorial examples.
    ExploreConjecture(ExploreArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Spectral,
    Separated,
    Gurevich,
    Loop,
    Interior,
    Compactified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Analytic,
    Heuristic,
}

#[derive(Args, Debug)]
struct PressureArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Potential file; the zero potential when omitted.
    #[arg(long)]
    potential: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "interior")]
    method: MethodArg,
    /// Truncations for the interior method.
    #[arg(long, value_delimiter = ',', default_values_t = [4u64, 8, 16, 32, 64])]
    schedule: Vec<u64>,
    /// Truncation for spectral, separated, gurevich and compactified methods.
    #[arg(long = "truncation", default_value_t = 64)]
    n: u64,
    /// Metric file, needed by the separated method.
    #[arg(long)]
    metric: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    /// Word length for the separated method.
    #[arg(long, default_value_t = 8)]
    words: usize,
    #[arg(long, default_value_t = 0.125)]
    eps: f64,
    /// Base vertex label for the gurevich method.
    #[arg(long, default_value = "1")]
    base: String,
    /// Largest period for the gurevich method.
    #[arg(long, default_value_t = 20)]
    periods: usize,
    /// Loop-count cutoff for the loop method.
    #[arg(long, default_value_t = 60)]
    cutoff: usize,
    /// Boundary file (or boundary report, or gallery bundle) for the compactified method.
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SectorsArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    metric: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [4u64, 16, 64])]
    cutoffs: Vec<u64>,
    #[arg(long, default_value_t = 4096)]
    nmax: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundaryArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    metric: PathBuf,
    #[arg(long, value_enum, default_value = "analytic")]
    mode: ModeArg,
    /// Sector cutoffs; a certified decomposition names the boundary chains.
    #[arg(long, value_delimiter = ',', default_values_t = [4u64, 16, 64])]
    cutoffs: Vec<u64>,
    #[arg(long, default_value_t = 1024)]
    nmax: u64,
    /// Truncation on which the lemmas are checked.
    #[arg(long = "truncation", default_value_t = 64)]
    n: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiffScanArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    phi: PathBuf,
    #[arg(long)]
    psi: PathBuf,
    /// `from:to:step`.
    #[arg(long, default_value = "-1:1:0.01", allow_hyphen_values = true)]
    grid: String,
    /// Truncation of infinite specs.
    #[arg(long = "truncation", default_value_t = 64)]
    n: u64,
    /// Kink detection tolerance; kinks are reported on stderr.
    #[arg(long, default_value_t = 1e-6)]
    kink_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum GalleryAction {
    List,
    Export {
        #[arg(long)]
        name: String,
        /// Loop counts as JSON, e.g. '{"kind":"constant","value":2}'.
        #[arg(long)]
        counts: Option<String>,
        /// Comma-separated circle radii.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ExploreArgs {
    /// Gallery entries; all non-sectorial entries when omitted.
    #[arg(long, value_delimiter = ',')]
    names: Vec<String>,
    /// Random potentials a + b·1[x₀ = 1] per entry, besides φ = 0.
    #[arg(long, default_value_t = 3)]
    samples: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [16u64, 32, 64, 128])]
    schedule: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn load_spec(path: &Path) -> Result<ShiftSpec> {
    Ok(io::load_spec(&read(path)?)?)
}

fn load_metric(path: &Path, spec: &ShiftSpec) -> Result<(VertexMetric, f64)> {
    let m = io::load_metric(&read(path)?)?;
    m.metric.check_compatible(spec)?;
    Ok((m.metric, m.theta.unwrap_or(0.5)))
}

fn load_potential(path: Option<&Path>, spec: &ShiftSpec) -> Result<Potential> {
    match path {
        Some(p) => Ok(io::load_potential(&read(p)?, spec)?),
        None => Ok(Potential::zero()),
    }
}

fn csv_rows(trace: &[SchedulePoint]) -> String {
    let mut s = String::from("N,value,lower,upper,increment\n");
    for r in trace {
        let inc = r.increment.map(|x| format!("{x:e}")).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{}", r.n, r.value, r.lower, r.upper, inc);
    }
    s
}

fn single_row(n: u64, est: &PressureEstimate) -> Vec<SchedulePoint> {
    vec![SchedulePoint {
        n,
        value: est.value,
        lower: est.lower,
        upper: est.upper,
        increment: None,
    }]
}

fn pressure(a: &PressureArgs, threads: usize) -> Result<String> {
    let spec = load_spec(&a.spec)?;
    let p = load_potential(a.potential.as_deref(), &spec)?;
    let est = match a.method {
        MethodArg::Interior => interior_pressure_threaded(&spec, &p, &a.schedule, threads)?,
        MethodArg::Spectral => {
            let mut e = sft_pressure(&truncate(&spec, a.n), &p)?;
            e.trace = single_row(a.n, &e);
            e
        }
        MethodArg::Separated => {
            let path = a
                .metric
                .as_deref()
                .ok_or_else(|| CliError::Usage("--method separated needs --metric".into()))?;
            let (vm, theta) = load_metric(path, &spec)?;
            let sm = ShiftMetric::new(vm, a.theta.unwrap_or(theta))?;
            let mut e = separated_set_pressure(&truncate(&spec, a.n), &p, &sm, a.words, a.eps)?;
            e.trace = single_row(a.n, &e);
            e
        }
        MethodArg::Gurevich => {
            let base = spec.vertex_of(&Label::parse(&a.base))?;
            gurevich_pressure(&spec, &p, base, a.periods, a.n)?
        }
        MethodArg::Loop => {
            let Some(Generator::LoopSystem { counts }) = spec.generator() else {
                return Err(CliError::Usage("--method loop needs a loop_system spec".into()));
            };
            if a.potential.is_some() {
                return Err(CliError::Usage("--method loop computes entropy; drop --potential".into()));
            }
            let h = loop_entropy(&counts.sequence(a.cutoff), a.cutoff)?;
            let mut e = PressureEstimate {
                value: h,
                lower: h,
                upper: h,
                method: cmspress::pressure::Method::LoopGf,
                params: [("cutoff".to_string(), a.cutoff as f64)].into(),
                trace: Vec::new(),
            };
            e.trace = single_row(a.cutoff as u64, &e);
            e
        }
        MethodArg::Compactified => {
            let path = a
                .boundary
                .as_deref()
                .ok_or_else(|| CliError::Usage("--method compactified needs --boundary".into()))?;
            let model = io::load_boundary(&read(path)?, &spec)?;
            let cs = CompactifiedShift::new(truncate(&spec, a.n), model)?;
            let mut e = compactified_pressure(&cs, &p)?;
            e.trace = single_row(a.n, &e);
            e
        }
    };
    Ok(match a.format {
        Format::Csv => csv_rows(&est.trace),
        Format::Json => to_json(&est),
    })
}

fn label(spec: &ShiftSpec, v: VertexId) -> Value {
    json!(spec.label(v))
}

fn witness_json(w: &SectorWitness, spec: &ShiftSpec) -> Value {
    match w {
        SectorWitness::CrossSectorEdge { level, from, to } => {
            json!({"kind": "cross_sector_edge", "level": level, "from": label(spec, *from), "to": label(spec, *to)})
        }
        SectorWitness::NonShrinkingDiameter { floor, pairs } => json!({
            "kind": "non_shrinking_diameter",
            "floor": floor,
            "pairs": pairs
                .iter()
                .map(|(k, a, b, d)| json!({"level": k, "a": label(spec, *a), "b": label(spec, *b), "distance": d}))
                .collect::<Vec<_>>(),
        }),
        other => serde_json::to_value(other).expect("serializable witness"),
    }
}

fn certificate_json(c: &SectorCertificate, spec: &ShiftSpec) -> Value {
    json!({
        "verdict": c.verdict,
        "witness": c.witness.as_ref().map(|w| witness_json(w, spec)),
        "reason": c.reason,
    })
}

/// Sectors are written by their generator description when known, otherwise
/// by member labels.
fn decomposition_json(dec: &SectorDecomposition) -> Value {
    let spec = dec.spec();
    let levels: Vec<Value> = dec
        .levels
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let nesting = if k == 0 { Vec::new() } else { dec.nesting(k) };
            let sectors: Vec<Value> = l
                .sectors
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let mut o = json!({
                        "extent": s.extent,
                        "diameter": s.diameter,
                        "diameter_bound": s.bound,
                        "members_in_truncation": s.members.len(),
                        "parent": nesting.get(i).copied().flatten(),
                    });
                    match &s.shape {
                        Some(shape) => o["description"] = json!(shape.describe()),
                        None => o["members"] = json!(s.members.iter().map(|&v| spec.label(v)).collect::<Vec<_>>()),
                    }
                    o
                })
                .collect();
            json!({
                "k": l.k,
                "cutoff": l.cutoff,
                "requested_cutoff": l.requested_cutoff,
                "delta": l.delta,
                "delta_certified": l.delta_certified,
                "absorbed": l.absorbed,
                "finite_residual": l.finite_residual,
                "sectors": sectors,
            })
        })
        .collect();
    json!({"n_max": dec.n_max, "levels": levels})
}

fn sectors(a: &SectorsArgs, threads: usize) -> Result<String> {
    let spec = load_spec(&a.spec)?;
    let (vm, _) = load_metric(&a.metric, &spec)?;
    let dec = decompose_threaded(&spec, &vm, &a.cutoffs, a.nmax, threads)?;
    let cert = verify(&dec);
    let mut report = decomposition_json(&dec);
    report["certificate"] = certificate_json(&cert, &spec);
    report["metric"] = json!(vm.name());
    Ok(to_json(&report))
}

fn lemma_json(r: &LemmaReport, spec: &ShiftSpec) -> Value {
    json!({
        "passed": r.passed,
        "no_excursion": r.no_excursion.passed,
        "excursion_horizon": r.no_excursion.m_max,
        "excursion_witness": r.no_excursion.witness.as_ref().map(|w| w.iter().map(|n| io::node_label(n, spec)).collect::<Vec<_>>()),
        "within_nonempty": r.within_nonempty,
        "identity_required": r.identity_required,
        "within_identity": r.within_identity,
    })
}

fn boundary_report(spec: &ShiftSpec, model: &BoundaryModel, sectorial: bool, n: u64) -> Result<Value> {
    let cs = CompactifiedShift::new(truncate(spec, n), model.clone())?;
    let lemmas = check_lemmas(&cs, sectorial)?;
    let entropy = if model.symbols.is_empty() {
        None
    } else {
        Some(boundary_entropy(&cs)?)
    };
    Ok(json!({
        "model": BoundaryFile::from_model(model, spec),
        "sectorial": sectorial,
        "lemmas": lemma_json(&lemmas, spec),
        "boundary_entropy": entropy,
        "truncation": n,
    }))
}

fn boundary(a: &BoundaryArgs, threads: usize) -> Result<String> {
    let spec = load_spec(&a.spec)?;
    let (vm, _) = load_metric(&a.metric, &spec)?;
    let mode = match a.mode {
        ModeArg::Analytic => InferenceMode::Analytic,
        ModeArg::Heuristic => InferenceMode::Heuristic,
    };
    let opts = BoundaryOptions {
        mode,
        n_max: a.nmax,
        ..BoundaryOptions::default()
    };
    let (model, sectorial) = if spec.finite_size().is_some() {
        (BoundaryModel::empty(mode), false)
    } else {
        let dec = decompose_threaded(&spec, &vm, &a.cutoffs, a.nmax, threads)?;
        if verify(&dec).is_sectorial() {
            (build_boundary_model(&spec, &vm, BoundarySource::Sectors(&dec), &opts)?, true)
        } else {
            let class = classify(&vm, 64, &[0.5])?;
            (build_boundary_model(&spec, &vm, BoundarySource::Classification(&class), &opts)?, false)
        }
    };
    Ok(to_json(&boundary_report(&spec, &model, sectorial, a.n)?))
}

fn diff_scan(a: &DiffScanArgs, threads: usize) -> Result<String> {
    let spec = load_spec(&a.spec)?;
    let phi = load_potential(Some(&a.phi), &spec)?;
    let psi = load_potential(Some(&a.psi), &spec)?;
    let grid = parse_grid(&a.grid)?;
    let n = spec.finite_size().unwrap_or(a.n);
    let curve = pressure_curve_threaded(&truncate(&spec, n), &phi, &psi, &grid, threads)?;
    let mut s = String::from("t,P,d2P\n");
    for ((t, p), d) in curve.grid.iter().zip(&curve.values).zip(curve.second_differences()) {
        let d = d.map(|x| format!("{x:e}")).unwrap_or_default();
        let _ = writeln!(s, "{t},{p},{d}");
    }
    if grid.len() >= 3 {
        let k = kink_scan(&curve, a.kink_tol)?;
        for (t, (l, r)) in k.locations.iter().zip(&k.slopes) {
            eprintln!("kink at t = {t}: slopes ({l}, {r})");
        }
    }
    Ok(s)
}

fn gallery_list() -> Result<String> {
    let mut s = String::new();
    for name in CATALOGUE {
        let e = instantiate(name)?;
        let o = &e.oracles;
        let f = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{name:<20} {:<18} metric={:<18} h={:<9} h_boundary={:<9} sectorial={}",
            e.spec.describe(),
            e.metric.name(),
            f(o.entropy.as_ref().map(|x| x.value)),
            f(o.boundary_entropy.as_ref().map(|x| x.value)),
            o.sectorial.as_ref().map(|x| x.value.to_string()).unwrap_or_else(|| "-".into()),
        );
    }
    Ok(s)
}

fn gallery_export(name: &str, counts: Option<&str>, radii: Option<&[f64]>) -> Result<String> {
    let params = GalleryParams {
        counts: counts.map(serde_json::from_str).transpose().map_err(cmspress::Error::from)?,
        radii: radii.map(<[f64]>::to_vec),
    };
    let e: GalleryEntry = instantiate_with(name, &params)?;
    Ok(to_json(&GalleryBundle::from_entry(&e)))
}

#[derive(Serialize)]
struct ExploreRow {
    entry: String,
    potential: String,
    interior: f64,
    compactified: f64,
    difference: f64,
    truncation: u64,
}

fn explore(a: &ExploreArgs, seed: u64, threads: usize) -> Result<String> {
    let names: Vec<String> = if a.names.is_empty() {
        CATALOGUE
            .iter()
            .filter(|n| instantiate(n).is_ok_and(|e| e.oracles.sectorial.is_some_and(|o| !o.value)))
            .map(|n| n.to_string())
            .collect()
    } else {
        a.names.clone()
    };
    let n = *a
        .schedule
        .last()
        .ok_or_else(|| CliError::Usage("--schedule must not be empty".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for name in &names {
        let e = instantiate(name)?;
        let cs = CompactifiedShift::new(truncate(&e.spec, n), e.boundary.clone())?;
        let one = VertexId::from_index(1);
        let mut potentials = vec![("0".to_string(), Potential::zero())];
        for _ in 0..a.samples {
            let (c, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let limits = e.boundary.symbol_ids().map(|s| (s.to_string(), 0.0)).collect();
            let ind = Potential::formula(Formula::Indicator { vertex: one }, limits);
            potentials.push((format!("{c:.6} + {b:.6}*1[x0=1]"), Potential::affine(vec![(b, ind)], c)));
        }
        for (desc, p) in potentials {
            let i = interior_pressure_threaded(&e.spec, &p, &a.schedule, threads)?.value;
            let c = compactified_pressure(&cs, &p)?.value;
            rows.push(ExploreRow {
                entry: name.clone(),
                potential: desc,
                interior: i,
                compactified: c,
                difference: c - i,
                truncation: n,
            });
        }
    }
    Ok(to_json(&json!({
        "note": "dual estimates only; no pass/fail is asserted",
        "seed": seed,
        "rows": rows,
    })))
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let (text, out) = match &cli.command {
        Command::Pressure(a) => (pressure(a, cli.threads)?, a.out.as_deref()),
        Command::Sectors(a) => (sectors(a, cli.threads)?, a.out.as_deref()),
        Command::Boundary(a) => (boundary(a, cli.threads)?, a.out.as_deref()),
        Command::DiffScan(a) => (diff_scan(a, cli.threads)?, a.out.as_deref()),
        Command::Gallery { action } => match action {
            GalleryAction::List => (gallery_list()?, None),
            GalleryAction::Export { name, counts, radii, out } => {
                (gallery_export(name, counts.as_deref(), radii.as_deref())?, out.as_deref())
            }
        },
        Command::ExploreConjecture(a) => (explore(a, cli.seed, cli.threads)?, a.out.as_deref()),
    };
    emit(out, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
