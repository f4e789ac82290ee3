//! Command-line interface: orbit tables, generator checks, image ingestion,
//! single fits and model paths, each writing reports that embed the
//! resolved run configuration and a digest of their inputs.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical failure,
//! 4 verification failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::action::{orbit_count_formula, GroupAction, OrbitCounts};
use crate::builder::{greedy_build, stepwise_build, verify_halting, BuildError, BuilderConfig, PoolChoice, TermSpace};
use crate::distribution::Distribution;
use crate::features::{orbit_signature, PoolTag, Term};
use crate::generators::{check_invariance, GeneratorSet};
use crate::group::{GroupSpec, DEFAULT_MAX_ORDER};
use crate::imagery::{aggregate, extract_counts, preprocess, Endian, ImageGray, PreprocessConfig};
use crate::lattice::LatticeSpace;
use crate::maxent::{solve_maxent, SolveError, SolverOptions};
use crate::order::CandidatePolicy;
use crate::report::{
    counts_tsv, density_tsv, digest_inputs, distribution_tsv, fit_json, orbit_table_tsv, path_json, path_tsv,
    read_distribution_tsv, Provenance,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NotRealizable { .. } | SolveError::MaxIterations { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Solve(s) => s.into(),
            other => validation(other),
        }
    }
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "symmaxent", version, about = "Group-invariant maximum-entropy models on finite lattices")]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SharedArgs {
    /// Builtin group (microimage, trivial, trivial(m), sign_inversion(m)) or a JSON file
    #[arg(long, global = true, default_value = "microimage")]
    pub group: String,
    /// Builtin generator set (microimage, sign_inversion(m), coordinates(m)) or a JSON file
    #[arg(long, global = true, default_value = "microimage")]
    pub generators: String,
    /// Quantization levels per coordinate
    #[arg(long = "L", global = true, default_value_t = 4)]
    pub levels: usize,
    /// Patch side; the lattice has dimension n²
    #[arg(long, global = true, default_value_t = 2)]
    pub n: usize,
    #[arg(long, global = true, value_enum, default_value_t = PoolChoice::Invariant)]
    pub pool: PoolChoice,
    #[arg(long = "lookahead-r", global = true, default_value_t = 1)]
    pub lookahead_r: usize,
    #[arg(long, global = true)]
    pub sample: Option<usize>,
    /// Lookahead for the ordinary half of a mixed pool
    #[arg(long = "ordinary-lookahead-r", global = true)]
    pub ordinary_lookahead_r: Option<usize>,
    /// Sample size for the ordinary half of a mixed pool
    #[arg(long = "ordinary-sample", global = true)]
    pub ordinary_sample: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "max-terms", global = true)]
    pub max_terms: Option<usize>,
    #[arg(long = "kl-stop", global = true, default_value_t = 1e-9)]
    pub kl_stop: f64,
    #[arg(long, global = true, value_enum, default_value_t = CandidatePolicy::LiteralShell)]
    pub policy: CandidatePolicy,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long = "out-dir", global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long = "no-timestamp", global = true)]
    pub no_timestamp: bool,
    /// Solver tolerance on the standardized moment residual
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Solver iteration cap
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Pgm,
    Raw16,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EndianArg {
    Big,
    Little,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Enumerate orbits and cross-check the microimage orbit-count formula
    Orbits,
    /// Verify invariance, the relation and orbit separation of a generator set
    CheckGenerators,
    /// Quantize images and count microimages
    Ingest(IngestArgs),
    /// Fit one maximum-entropy model for an explicit term list
    Fit(FitArgs),
    /// Build a model path by greedy lookahead or stepwise addition
    Greedy(GreedyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ImageFormat::Pgm)]
    pub format: ImageFormat,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long, value_enum, default_value_t = EndianArg::Big)]
    pub endian: EndianArg,
    /// Fraction of pixels winsorized in each tail
    #[arg(long, default_value_t = 0.005)]
    pub clip: f64,
    /// Skip the log(1 + v) transform
    #[arg(long = "no-log")]
    pub no_log: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Distribution or counts TSV over the lattice
    #[arg(long)]
    pub target: PathBuf,
    /// Term such as f:(0,0,2,0,0), x:(1,0,0,0) or f3^2; repeatable
    #[arg(long = "term", required = true)]
    pub terms: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct GreedyArgs {
    #[arg(long)]
    pub target: PathBuf,
    /// Add the ≺-least independent term at each step instead of searching
    #[arg(long)]
    pub stepwise: bool,
}

/// What a command wrote and its one-line summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

struct Context {
    shared: SharedArgs,
    config: Value,
    files: Vec<PathBuf>,
}

impl Context {
    fn provenance(&self, digest: String) -> Provenance {
        Provenance::new(&self.config, digest, !self.shared.no_timestamp)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.shared.out_dir).map_err(validation)?;
        let path = self.shared.out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| validation(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
        text.push('\n');
        self.write(name, &text)
    }

    fn solver(&self) -> SolverOptions {
        let mut s = SolverOptions::default();
        if let Some(t) = self.shared.tol {
            s.tol = t;
        }
        if let Some(m) = self.shared.max_iter {
            s.max_iter = m;
        }
        s
    }

    fn builder(&self) -> BuilderConfig {
        BuilderConfig {
            pool: self.shared.pool,
            lookahead: self.shared.lookahead_r,
            sample_size: self.shared.sample,
            ordinary_lookahead: self.shared.ordinary_lookahead_r,
            ordinary_sample_size: self.shared.ordinary_sample,
            rng_seed: self.shared.seed,
            max_terms: self.shared.max_terms,
            kl_stop: self.shared.kl_stop,
            candidate_policy: self.shared.policy,
            solver: self.solver(),
        }
    }

    /// Named bytes of the group and generator definitions.
    fn definition_inputs(&self) -> Result<Vec<(String, Vec<u8>)>, CliError> {
        [&self.shared.group, &self.shared.generators]
            .into_iter()
            .map(|name| {
                let path = Path::new(name);
                if path.is_file() {
                    Ok((name.clone(), std::fs::read(path).map_err(validation)?))
                } else {
                    Ok((name.clone(), Vec::new()))
                }
            })
            .collect()
    }

    fn group(&self) -> Result<GroupSpec, CliError> {
        let name = &self.shared.group;
        let path = Path::new(name);
        if path.is_file() {
            GroupSpec::from_file(path, DEFAULT_MAX_ORDER).map_err(validation)
        } else {
            GroupSpec::builtin(name, self.shared.n * self.shared.n).map_err(validation)
        }
    }

    fn generators(&self) -> Result<GeneratorSet, CliError> {
        let name = &self.shared.generators;
        let path = Path::new(name);
        if path.is_file() {
            GeneratorSet::from_file(path).map_err(validation)
        } else {
            GeneratorSet::builtin(name).ok_or_else(|| validation(format!("unknown generator set {name:?}")))
        }
    }

    fn action(&self) -> Result<GroupAction, CliError> {
        let group = self.group()?;
        let dim = self.shared.n * self.shared.n;
        if group.dimension() != dim {
            return Err(validation(format!(
                "group acts on dimension {}, but --n {} gives dimension {dim}",
                group.dimension(),
                self.shared.n
            )));
        }
        let space = LatticeSpace::microimages(self.shared.levels, self.shared.n).map_err(validation)?;
        GroupAction::new(group, space).map_err(validation)
    }

    fn term_space(&self) -> Result<TermSpace, CliError> {
        Ok(TermSpace::new(self.action()?, self.generators()?)?)
    }
}

/// Runs a parsed command line, installing a thread pool if requested.
pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    if cli.shared.levels < 2 {
        return Err(validation("--L must be at least 2"));
    }
    if cli.shared.n == 0 {
        return Err(validation("--n must be positive"));
    }
    let config = serde_json::to_value(&cli).expect("config serializes");
    let mut ctx = Context {
        shared: cli.shared.clone(),
        config,
        files: Vec::new(),
    };
    let body = |ctx: &mut Context| -> Result<String, CliError> {
        match &cli.command {
            Command::Orbits => cmd_orbits(ctx),
            Command::CheckGenerators => cmd_check_generators(ctx),
            Command::Ingest(a) => cmd_ingest(ctx, a),
            Command::Fit(a) => cmd_fit(ctx, a),
            Command::Greedy(a) => cmd_greedy(ctx, a),
        }
    };
    let summary = match cli.shared.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(validation)?
            .install(|| body(&mut ctx))?,
        None => body(&mut ctx)?,
    };
    Ok(Outcome {
        summary,
        files: ctx.files,
    })
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn digest_of(inputs: &[(String, Vec<u8>)]) -> String {
    digest_inputs(inputs.iter().map(|(n, b)| (n.as_str(), b.as_slice())))
}

fn format_counts(c: &OrbitCounts) -> String {
    format!(
        "M={} sizes 2:{} 4:{} 8:{} 16:{}",
        c.total, c.size2, c.size4, c.size8, c.size16
    )
}

fn cmd_orbits(ctx: &mut Context) -> Result<String, CliError> {
    let action = ctx.action()?;
    let inputs = ctx.definition_inputs()?;
    let prov = ctx.provenance(digest_of(&inputs));
    let signatures = ctx
        .generators()
        .ok()
        .and_then(|g| orbit_signature(&g, &action).ok());
    let hist = action.orbits().size_histogram();
    let enumerated = OrbitCounts::from_histogram(&hist);
    let formula = (ctx.shared.group == "microimage" && ctx.shared.n == 2)
        .then(|| orbit_count_formula(ctx.shared.levels).ok())
        .flatten();
    ctx.write("orbits.tsv", &orbit_table_tsv(&action, signatures.as_deref(), &prov))?;
    let matches = formula.as_ref().map(|f| *f == enumerated);
    let report = prov.attach(json!({
        "K": action.space().len(),
        "M": action.orbits().len(),
        "group_order": action.group().order(),
        "size_histogram": hist.iter().map(|(s, c)| json!({"size": s, "count": c})).collect::<Vec<_>>(),
        "formula": formula.as_ref().map(|f| json!({
            "total": f.total, "size2": f.size2, "size4": f.size4, "size8": f.size8, "size16": f.size16,
        })),
        "formula_matches": matches,
    }));
    ctx.write_json("orbits.json", &report)?;
    let summary = format!(
        "K={} {}",
        action.space().len(),
        format_counts(&enumerated)
    );
    if matches == Some(false) {
        return Err(CliError::Verification(format!(
            "orbit enumeration {summary} disagrees with formula {}",
            format_counts(formula.as_ref().unwrap())
        )));
    }
    Ok(summary)
}

fn cmd_check_generators(ctx: &mut Context) -> Result<String, CliError> {
    let gens = ctx.generators()?;
    let action = ctx.action()?;
    let inputs = ctx.definition_inputs()?;
    let prov = ctx.provenance(digest_of(&inputs));
    let invariance: Vec<bool> = gens
        .polys()
        .iter()
        .map(|f| check_invariance(f, action.group()))
        .collect::<Result<_, _>>()
        .map_err(validation)?;
    let relation = gens.relation_composed().map(|q| q.is_zero());
    let separation = orbit_signature(&gens, &action);
    let separates = separation.is_ok();
    let passed = invariance.iter().all(|&b| b) && relation != Some(false) && separates;
    let report = prov.attach(json!({
        "generators": gens.polys().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "invariant": invariance,
        "relation": gens.relation().map(|q| q.to_string_with("y")),
        "relation_vanishes": relation,
        "separates_orbits": separates,
        "separation_error": separation.err().map(|e| e.to_string()),
        "passed": passed,
    }));
    ctx.write_json("generators.json", &report)?;
    let summary = format!(
        "invariant {}/{}, relation {}, separation {}",
        invariance.iter().filter(|&&b| b).count(),
        invariance.len(),
        match relation {
            Some(true) => "vanishes",
            Some(false) => "does not vanish",
            None => "absent",
        },
        if separates { "ok" } else { "fails" }
    );
    if passed {
        Ok(format!("pass: {summary}"))
    } else {
        Err(CliError::Verification(format!("fail: {summary}")))
    }
}

fn cmd_ingest(ctx: &mut Context, args: &IngestArgs) -> Result<String, CliError> {
    let cfg = PreprocessConfig {
        clip_fraction: args.clip,
        log_transform: !args.no_log,
        levels: ctx.shared.levels,
        patch: ctx.shared.n,
    };
    cfg.validate().map_err(validation)?;
    let space = LatticeSpace::microimages(cfg.levels, cfg.patch).map_err(validation)?;
    let (width, height) = match args.format {
        ImageFormat::Raw16 => (
            args.width.ok_or_else(|| validation("raw16 input needs --width"))?,
            args.height.ok_or_else(|| validation("raw16 input needs --height"))?,
        ),
        ImageFormat::Pgm => (0, 0),
    };
    let endian = match args.endian {
        EndianArg::Big => Endian::Big,
        EndianArg::Little => Endian::Little,
    };
    let bytes: Vec<Vec<u8>> = args
        .paths
        .iter()
        .map(|p| std::fs::read(p).map_err(|e| validation(format!("{}: {e}", p.display()))))
        .collect::<Result<_, _>>()?;
    let results = args
        .paths
        .par_iter()
        .zip(&bytes)
        .map(|(path, b)| {
            let img = match args.format {
                ImageFormat::Pgm => ImageGray::parse_pgm(b),
                ImageFormat::Raw16 => ImageGray::parse_raw16(b, width, height, endian),
            }
            .map_err(|e| validation(format!("{}: {e}", path.display())))?;
            let q = preprocess(&img, &cfg).map_err(validation)?;
            let counts = extract_counts(&q, cfg.patch, &space).map_err(|e| validation(format!("{}: {e}", path.display())))?;
            Ok((q.constant, counts))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let digest = digest_inputs(
        args.paths
            .iter()
            .zip(&bytes)
            .map(|(p, b)| (p.to_str().unwrap_or("?"), b.as_slice())),
    );
    let prov = ctx.provenance(digest);
    let mut images = Vec::new();
    for (i, (path, (constant, counts))) in args.paths.iter().zip(&results).enumerate() {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
        let name = format!("counts_{i:04}_{stem}.tsv");
        ctx.write(&name, &counts_tsv(&space, &counts.counts, &prov))?;
        images.push(json!({
            "path": path.display().to_string(),
            "counts_file": name,
            "patches": counts.total,
            "constant": constant,
        }));
    }
    let all: Vec<_> = results.iter().map(|(_, c)| c.clone()).collect();
    let emp = aggregate(&all).map_err(validation)?;
    ctx.write("distribution.tsv", &distribution_tsv(&emp.probs, &prov))?;
    ctx.write("pooled_counts.tsv", &counts_tsv(&space, &emp.pooled, &prov))?;
    let flagged = results.iter().filter(|(c, _)| *c).count();
    ctx.write_json(
        "ingest.json",
        &prov.attach(json!({
            "images": images,
            "K": space.len(),
            "constant_images": flagged,
        })),
    )?;
    Ok(format!(
        "{} images, {} patches, {flagged} constant",
        emp.images,
        emp.pooled.iter().sum::<u64>()
    ))
}

fn read_target(path: &Path, k: usize) -> Result<(Distribution, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| validation("target is not UTF-8"))?;
    let target = read_distribution_tsv(&text, k).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    Ok((target, bytes))
}

fn cmd_fit(ctx: &mut Context, args: &FitArgs) -> Result<String, CliError> {
    let space = ctx.term_space()?;
    let (target, bytes) = read_target(&args.target, space.space_len())?;
    let inv_arity = space.pool(PoolTag::Invariant).arity();
    let ord_arity = space.pool(PoolTag::Ordinary).arity();
    let mut terms: Vec<Term> = args
        .terms
        .iter()
        .map(|t| Term::parse(t, inv_arity, ord_arity))
        .collect::<Result<_, _>>()
        .map_err(validation)?;
    terms.retain(|t| !t.is_constant());
    let pools: std::collections::BTreeSet<_> = terms.iter().map(|t| t.pool).collect();
    let pool = match (pools.len(), pools.iter().next()) {
        (2, _) => "mixed",
        (_, Some(PoolTag::Ordinary)) => "ordinary",
        _ => "invariant",
    };
    let constant = space.constant(if pool == "ordinary" {
        PoolTag::Ordinary
    } else {
        PoolTag::Invariant
    });
    terms.insert(0, constant);
    let cs = space.constraints(&terms, &target)?;
    let (model, report) = solve_maxent(&cs, &ctx.solver())?;

    let mut inputs = ctx.definition_inputs()?;
    inputs.push((args.target.display().to_string(), bytes));
    let prov = ctx.provenance(digest_of(&inputs));
    ctx.write_json("fit.json", &fit_json(&model, &report, pool, &prov))?;
    ctx.write("density.tsv", &density_tsv(space.action().space(), &model.density, &prov))?;
    Ok(format!(
        "|A|={} kl={:.6e} entropy={:.6} residual={:.2e} iterations={}",
        terms.len(),
        report.kl_to_target.unwrap_or(f64::NAN),
        report.entropy,
        report.residual_inf,
        report.iterations
    ))
}

fn cmd_greedy(ctx: &mut Context, args: &GreedyArgs) -> Result<String, CliError> {
    let space = ctx.term_space()?;
    let (target, bytes) = read_target(&args.target, space.space_len())?;
    let config = ctx.builder();
    let path = if args.stepwise {
        stepwise_build(&space, &target, &config)?
    } else {
        greedy_build(&space, &target, &config)?
    };
    let mut inputs = ctx.definition_inputs()?;
    inputs.push((args.target.display().to_string(), bytes));
    let prov = ctx.provenance(digest_of(&inputs));
    let mut body = path_json(&path, &prov);
    let halting = (path.pool == PoolChoice::Invariant)
        .then(|| verify_halting(&path, space.action(), &target))
        .transpose()?;
    if let (Some(h), Value::Object(map)) = (&halting, &mut body) {
        map.insert("halting".into(), serde_json::to_value(h).expect("report serializes"));
    }
    ctx.write("path.tsv", &path_tsv(&path, &prov))?;
    ctx.write_json("path.json", &body)?;
    ctx.write(
        "density.tsv",
        &density_tsv(space.action().space(), &path.final_step().model.density, &prov),
    )?;
    let last = path.final_step();
    let summary = format!(
        "{} terms, terminal {}, kl={:.6e}, entropy={:.6}",
        path.len(),
        serde_json::to_value(path.terminal).unwrap().as_str().unwrap(),
        last.kl,
        last.entropy
    );
    if let Some(h) = halting.filter(|h| !h.passed) {
        return Err(CliError::Verification(format!("{summary}; {}", h.note)));
    }
    Ok(summary)
}
