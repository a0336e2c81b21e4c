//! Batch commands behind the `wickmaps` binary: graph census, identity
//! verification suites and single contributions, each producing a
//! [`Report`] of checked rows.

use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{build_named_algebra, AlgebraError, AlgebraJson, FieldCase, StarAlgebra};
use crate::characters::{frobenius_schur_sum, irreducible_data, mednykh_sum, CharacterError};
use crate::groups::{build_group, hom_count, FiniteGroup, GroupError, GroupJson, GroupSpec, Surface};
use crate::maps::{
    classify, degree_sequences, enumerate_configurations, labeled_group_order, random_configuration,
    standard_nonorientable, standard_orientable, weighted_degree, MapError, MapGraph, Mode,
};
use crate::scalar::{fmt_rational, Rational, Scalar};
use crate::series::SeriesError;
use crate::wick::{WickError, WickEvaluator};

/// Groups used by the verification suites when none is given.
pub const TEST_GROUPS: [&str; 9] = ["Z2", "Z3", "Z4", "Z2xZ2", "S3", "D4", "Q8", "A4", "S4"];

/// Algebras used by the contraction suite when none is given.
pub const CONTRACTION_ALGEBRAS: [&str; 5] = ["C[Z2]", "C[S3]", "M(2,C)", "R[S3]", "M(1,H)"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("refusing: {0}")]
    Guard(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Wick(#[from] WickError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Characters(#[from] CharacterError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    /// Usage problems exit 2, everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Guard(_) | CliError::Algebra(_) | CliError::Group(_) | CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Wick,
    Mednykh,
    FrobeniusSchur,
    Contraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ribbon,
    Moebius,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Ribbon => Mode::Ribbon,
            ModeArg::Moebius => Mode::Moebius,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wickmaps", version, about = "Exact Wick expansions over ribbon and Möbius graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "tsv", global = true)]
    pub format: Format,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Worker threads (0 = one per core); results do not depend on it.
    #[arg(long, default_value_t = 0, global = true)]
    pub threads: usize,
    /// Largest total dart count (weighted degree) any command will enumerate.
    #[arg(long, default_value_t = 12, global = true)]
    pub max_darts: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One row per isomorphism class, with an orbit-stabilizer check.
    Census {
        /// Degree vector v_1,v_2,... (comma separated)
        #[arg(long, conflicts_with = "weighted_degree")]
        degrees: Option<String>,
        /// All non-empty degree vectors up to this weighted degree
        #[arg(long)]
        weighted_degree: Option<usize>,
        #[arg(long, value_enum, default_value = "ribbon")]
        mode: ModeArg,
    },
    /// Run an identity suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Group name or JSON file (mednykh, frobenius-schur)
        #[arg(long)]
        group: Option<String>,
        /// Algebra name or JSON file (wick, contraction)
        #[arg(long)]
        algebra: Option<String>,
        /// Largest genus checked (mednykh)
        #[arg(long, default_value_t = 3)]
        genus: u32,
        /// Largest cross-cap number checked (frobenius-schur)
        #[arg(long, default_value_t = 4)]
        crosscaps: u32,
        /// Series truncation (wick)
        #[arg(long, default_value_t = 6)]
        weighted_degree: usize,
        /// Random checks of each kind (contraction)
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
    /// Closed-form surface invariant with a graph-side recomputation.
    Contribution {
        #[arg(long)]
        algebra: String,
        #[arg(long, conflicts_with = "crosscaps")]
        genus: Option<u32>,
        #[arg(long)]
        crosscaps: Option<u32>,
        #[arg(long)]
        faces: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub cells: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Report {
    fn new(command: impl Into<String>, columns: &[&str]) -> Self {
        Report { command: command.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, cells: Vec<String>, pass: bool) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(Row { cells, pass });
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Tsv => {
                let mut out = format!("# {}\n{}\tpass\n", self.command, self.columns.join("\t"));
                for r in &self.rows {
                    out.push_str(&r.cells.join("\t"));
                    out.push_str(if r.pass { "\tpass\n" } else { "\tFAIL\n" });
                }
                out.push_str(&format!("# rows={} failed={}\n", self.rows.len(), self.failures()));
                out
            }
            Format::Json => {
                #[derive(Serialize)]
                struct Doc<'a> {
                    #[serde(flatten)]
                    report: &'a Report,
                    all_pass: bool,
                }
                let doc = Doc { report: self, all_pass: self.all_pass() };
                serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
            }
        }
    }
}

fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_string(), message: e.to_string() })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T, CliError> {
    serde_json::from_str(&read_file(path)?).map_err(|e| CliError::Io { path: path.to_string(), message: e.to_string() })
}

/// A built-in name, or a path to a JSON file.
pub fn load_algebra(name: &str) -> Result<StarAlgebra, CliError> {
    if name.ends_with(".json") || Path::new(name).is_file() {
        let json: AlgebraJson = parse_json(name)?;
        return Ok(StarAlgebra::from_json(&json)?);
    }
    Ok(build_named_algebra(&name.parse()?)?)
}

/// A built-in name, or a path to a JSON file.
pub fn load_group(name: &str) -> Result<FiniteGroup, CliError> {
    if name.ends_with(".json") || Path::new(name).is_file() {
        let json: GroupJson = parse_json(name)?;
        return Ok(FiniteGroup::from_json(&json)?);
    }
    Ok(build_group(&name.parse::<GroupSpec>()?)?)
}

fn parse_degrees(s: &str) -> Result<Vec<usize>, CliError> {
    let mut v = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("bad degree vector {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    while v.last() == Some(&0) {
        v.pop();
    }
    Ok(v)
}

fn fmt_degrees(v: &[usize]) -> String {
    if v.is_empty() {
        return "-".into();
    }
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn fmt_multidegree(v: &[u32]) -> String {
    let trimmed: Vec<usize> = {
        let mut t: Vec<usize> = v.iter().map(|&x| x as usize).collect();
        while t.last() == Some(&0) {
            t.pop();
        }
        t
    };
    fmt_degrees(&trimmed)
}

fn fmt_int(n: &BigInt) -> String {
    fmt_rational(&Rational::from_integer(n.clone()))
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let common = &cli.common;
    let work = || match &cli.command {
        Command::Census { degrees, weighted_degree, mode } => {
            cmd_census(degrees.as_deref(), *weighted_degree, (*mode).into(), common.max_darts)
        }
        Command::Verify { suite, group, algebra, genus, crosscaps, weighted_degree, count } => match suite {
            Suite::Wick => {
                cmd_verify_wick(algebra.as_deref().unwrap_or("M(1,C)"), *weighted_degree, common.max_darts)
            }
            Suite::Mednykh => cmd_verify_mednykh(group.as_deref(), *genus),
            Suite::FrobeniusSchur => cmd_verify_frobenius_schur(group.as_deref(), *crosscaps),
            Suite::Contraction => cmd_verify_contraction(algebra.as_deref(), common.seed, *count),
        },
        Command::Contribution { algebra, genus, crosscaps, faces } => {
            cmd_contribution(algebra, *genus, *crosscaps, *faces)
        }
    };
    if common.threads == 0 {
        return work();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?
        .install(work)
}

fn class_type(g: &MapGraph) -> String {
    match g.topological_type() {
        Ok(t) => t.to_string(),
        Err(_) => format!("components={}", g.component_count()),
    }
}

pub fn cmd_census(
    degrees: Option<&str>,
    max_weight: Option<usize>,
    mode: Mode,
    max_darts: usize,
) -> Result<Report, CliError> {
    let seqs: Vec<Vec<usize>> = match (degrees, max_weight) {
        (Some(d), _) => vec![parse_degrees(d)?],
        (None, Some(w)) => degree_sequences(w)
            .into_iter()
            .filter(|v| weighted_degree(v) > 0)
            .map(|mut v| {
                while v.last() == Some(&0) {
                    v.pop();
                }
                v
            })
            .collect(),
        (None, None) => return Err(CliError::Usage("census needs --degrees or --weighted-degree".into())),
    };
    if let Some(w) = seqs.iter().map(|v| weighted_degree(v)).max() {
        if w > max_darts {
            return Err(CliError::Guard(format!("weighted degree {w} exceeds --max-darts {max_darts}")));
        }
    }
    let command = match (degrees, max_weight) {
        (Some(d), _) => format!("census --degrees {d} --mode {mode}"),
        (None, Some(w)) => format!("census --weighted-degree {w} --mode {mode}"),
        _ => unreachable!(),
    };
    let mut report = Report::new(command, &["degrees", "class", "aut", "type", "labeled", "expected"]);
    for v in seqs {
        let total = labeled_group_order(&v, mode);
        for c in classify(enumerate_configurations(&v, mode == Mode::Moebius), mode) {
            let expected = total / c.aut;
            report.push(
                vec![
                    fmt_degrees(&v),
                    c.form.to_string(),
                    c.aut.to_string(),
                    class_type(&c.representative),
                    c.labeled_count.to_string(),
                    expected.to_string(),
                ],
                c.labeled_count * c.aut == total,
            );
        }
    }
    Ok(report)
}

pub fn cmd_verify_wick(algebra: &str, w: usize, max_darts: usize) -> Result<Report, CliError> {
    if w > max_darts {
        return Err(CliError::Guard(format!("weighted degree {w} exceeds --max-darts {max_darts}")));
    }
    let alg = load_algebra(algebra)?;
    let ev = WickEvaluator::new(&alg)?;
    let wick = ev.series_wick(w);
    let full = ev.series_graph(w, false);
    let connected = ev.series_graph(w, true);
    let log = wick.log()?;
    let mut report = Report::new(
        format!("verify wick --algebra {} --weighted-degree {w}", alg.name()),
        &["series", "degrees", "expected", "computed"],
    );
    for (label, lhs, rhs) in [("full", &wick, &full), ("connected", &log, &connected)] {
        for v in degree_sequences(w) {
            let key: Vec<u32> = v.iter().map(|&x| x as u32).collect();
            let (a, b) = (lhs.coeff(&key), rhs.coeff(&key));
            if a.is_zero() && b.is_zero() {
                continue;
            }
            report.push(vec![label.into(), fmt_multidegree(&key), a.to_string(), b.to_string()], a == b);
        }
    }
    Ok(report)
}

fn group_list(group: Option<&str>) -> Result<Vec<FiniteGroup>, CliError> {
    match group {
        Some(g) => Ok(vec![load_group(g)?]),
        None => TEST_GROUPS.iter().map(|g| load_group(g)).collect(),
    }
}

fn rational_pow(base: usize, exp: i64) -> Rational {
    let b = Rational::from_integer(BigInt::from(base));
    if exp >= 0 {
        num_traits::pow(b, exp as usize)
    } else {
        num_traits::pow(b.recip(), exp.unsigned_abs() as usize)
    }
}

pub fn cmd_verify_mednykh(group: Option<&str>, max_genus: u32) -> Result<Report, CliError> {
    let mut report = Report::new(
        format!("verify mednykh --genus {max_genus}{}", group.map(|g| format!(" --group {g}")).unwrap_or_default()),
        &["group", "genus", "hom_count", "expected", "computed"],
    );
    for g in group_list(group)? {
        let data = irreducible_data(&g)?;
        for genus in 0..=max_genus {
            let chi = 2 - 2 * i64::from(genus);
            let hom = hom_count(&g, Surface::Orientable { genus })?;
            let expected = rational_pow(g.order(), chi - 1) * Rational::from_integer(hom.clone());
            let computed = mednykh_sum(&data, chi);
            report.push(
                vec![
                    g.name().to_string(),
                    genus.to_string(),
                    fmt_int(&hom),
                    fmt_rational(&expected),
                    fmt_rational(&computed),
                ],
                expected == computed,
            );
        }
    }
    Ok(report)
}

pub fn cmd_verify_frobenius_schur(group: Option<&str>, max_crosscaps: u32) -> Result<Report, CliError> {
    let mut report = Report::new(
        format!(
            "verify frobenius-schur --crosscaps {max_crosscaps}{}",
            group.map(|g| format!(" --group {g}")).unwrap_or_default()
        ),
        &["group", "crosscaps", "hom_count", "expected", "computed"],
    );
    for g in group_list(group)? {
        let data = irreducible_data(&g)?;
        for k in 1..=max_crosscaps {
            let chi = 2 - i64::from(k);
            let hom = hom_count(&g, Surface::NonOrientable { crosscaps: k })?;
            let expected = rational_pow(g.order(), chi - 1) * Rational::from_integer(hom.clone());
            let computed = frobenius_schur_sum(&data, chi);
            report.push(
                vec![g.name().to_string(), k.to_string(), fmt_int(&hom), fmt_rational(&expected), fmt_rational(&computed)],
                expected == computed,
            );
        }
    }
    Ok(report)
}

/// Outcome of one randomized invariance check.
#[derive(Debug, Clone)]
pub struct InvarianceCheck {
    pub kind: &'static str,
    pub algebra: String,
    pub graph: String,
    pub target: usize,
    pub before: Scalar,
    pub after: Scalar,
}

impl InvarianceCheck {
    pub fn pass(&self) -> bool {
        self.before == self.after
    }
}

fn random_graph<R: Rng>(rng: &mut R, mode: Mode, max_weight: usize) -> MapGraph {
    loop {
        let seq: Vec<usize> = (0..4).map(|_| rng.gen_range(0..3)).collect();
        let w = weighted_degree(&seq);
        if w == 0 || w > max_weight {
            continue;
        }
        if let Some(c) = random_configuration(rng, &seq, mode == Mode::Moebius) {
            return c.to_graph(mode);
        }
    }
}

/// `count` contraction checks spread round-robin over `algebras`, then
/// `count` vertex-flip checks over the real ones. Graphs have at most five
/// edges.
pub fn invariance_checks(algebras: &[StarAlgebra], seed: u64, count: usize) -> Result<Vec<InvarianceCheck>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let evaluators = algebras.iter().map(WickEvaluator::new).collect::<Result<Vec<_>, _>>()?;
    let mode_of = |a: &StarAlgebra| if a.field() == FieldCase::Real { Mode::Moebius } else { Mode::Ribbon };
    let mut out = Vec::with_capacity(2 * count);
    let mut i = 0;
    while out.len() < count {
        let ev = &evaluators[i % evaluators.len()];
        let g = random_graph(&mut rng, mode_of(ev.algebra()), 10);
        let vof = g.vertex_of();
        let bridges: Vec<usize> = g.edges().into_iter().filter(|&d| vof[d] != vof[g.alpha(d)]).collect();
        if bridges.is_empty() {
            continue;
        }
        let d = bridges[rng.gen_range(0..bridges.len())];
        let contracted = g.contract_edge(d)?;
        out.push(InvarianceCheck {
            kind: "contraction",
            algebra: ev.algebra().name().to_string(),
            graph: g.canonical_form().to_string(),
            target: d,
            before: ev.graph_contribution(&g)?,
            after: ev.graph_contribution(&contracted)?,
        });
        i += 1;
    }
    let real: Vec<&WickEvaluator> = evaluators.iter().filter(|e| e.algebra().field() == FieldCase::Real).collect();
    for j in 0..if real.is_empty() { 0 } else { count } {
        let ev = real[j % real.len()];
        let g = random_graph(&mut rng, Mode::Moebius, 10);
        let v = rng.gen_range(0..g.vertices().len());
        let flipped = g.flip_vertex(v)?;
        // bypass the class cache: evaluate the flipped labeling directly
        let direct = WickEvaluator::new(ev.algebra())?;
        out.push(InvarianceCheck {
            kind: "flip",
            algebra: ev.algebra().name().to_string(),
            graph: g.canonical_form().to_string(),
            target: v,
            before: ev.graph_contribution(&g)?,
            after: direct.graph_contribution(&flipped)?,
        });
    }
    Ok(out)
}

pub fn cmd_verify_contraction(algebra: Option<&str>, seed: u64, count: usize) -> Result<Report, CliError> {
    let algebras = match algebra {
        Some(a) => vec![load_algebra(a)?],
        None => CONTRACTION_ALGEBRAS.iter().map(|a| load_algebra(a)).collect::<Result<_, _>>()?,
    };
    let mut report = Report::new(
        format!("verify contraction --seed {seed} --count {count}"),
        &["kind", "algebra", "graph", "target", "before", "after"],
    );
    for c in invariance_checks(&algebras, seed, count)? {
        let pass = c.pass();
        report.push(
            vec![c.kind.into(), c.algebra, c.graph, c.target.to_string(), c.before.to_string(), c.after.to_string()],
            pass,
        );
    }
    Ok(report)
}

pub fn cmd_contribution(algebra: &str, genus: Option<u32>, crosscaps: Option<u32>, faces: u32) -> Result<Report, CliError> {
    let alg = load_algebra(algebra)?;
    let ev = WickEvaluator::new(&alg)?;
    let (label, closed, graph) = match (genus, crosscaps) {
        (Some(g), None) => {
            let closed = ev.closed_form_or(g, faces)?;
            let graph = match standard_orientable(g, faces) {
                Ok(s) => s,
                Err(_) if g == 0 && faces == 1 => MapGraph::isolated_only(1, Mode::Ribbon),
                Err(e) => return Err(e.into()),
            };
            (format!("or(g={g},f={faces})"), closed, graph)
        }
        (None, Some(k)) => {
            if alg.field() == FieldCase::Complex {
                return Err(CliError::Wick(WickError::NonOrientableComplex));
            }
            (format!("nor(k={k},f={faces})"), ev.closed_form_nor(k, faces)?, standard_nonorientable(k, faces)?)
        }
        _ => return Err(CliError::Usage("give exactly one of --genus or --crosscaps".into())),
    };
    let on_graph = ev.graph_contribution(&graph)?;
    let mut report = Report::new(
        format!("contribution --algebra {} {label}", alg.name()),
        &["algebra", "type", "closed_form", "standard_graph"],
    );
    let pass = closed == on_graph;
    report.push(vec![alg.name().to_string(), label, closed.to_string(), on_graph.to_string()], pass);
    Ok(report)
}
