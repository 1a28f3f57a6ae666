//! Command-line surface over the kakeya library. Every number crossing
//! this boundary is an exact fraction `p/q` or a decimal integer; decimals
//! appear only inside rendered figures.
//!
//! Exit codes: 0 success, 1 a requested check failed, 2 usage error,
//! 3 malformed fraction, 4 unreadable input file, 5 other domain errors.

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use kakeya::assembly::{AssemblyError, LineFamily, Slice};
use kakeya::dimension::{CubeCounts, DimensionError};
use kakeya::grid::{CellSet, GridError};
use kakeya::interval::IntervalUnion;
use kakeya::moran::{self, BuildState, BuildError, PatternError, VerifyError};
use kakeya::projection::{self, diag_measure_bound};
use kakeya::rational::{format_fraction, parse_fraction, Rational};
use kakeya::render::{self, FanOptions, RenderError, StagePanel};
use kakeya::schedule::{self, ScheduleError, ScheduleParseError};
use kakeya::snapshot::{parse_snapshot, write_snapshot, SnapshotError};
use kakeya::sticky::{self, StickyError};
use num_bigint::BigUint;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kakeya",
    version,
    about = "Finite-stage Kakeya constructions in exact arithmetic"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a stage snapshot by repeated two-stage rounds
    Build(BuildArgs),
    /// Check the construction conditions of a snapshot
    Verify(VerifyArgs),
    /// Synthesize a parameter schedule, or re-check an existing one
    Schedule(ScheduleArgs),
    /// Exact projection measures along the stage chain of a snapshot
    Project(ProjectArgs),
    /// Dimension report (packing ratio, entropy, measure bound) of a schedule
    Dims(DimsArgs),
    /// Exact slice of the dual line family of a snapshot
    Slice(SliceArgs),
    /// Sticky-family artifacts
    #[command(subcommand)]
    Sticky(StickyCmd),
    /// SVG and PGM figures
    Render(RenderArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("shape").required(true).args(["n", "ns"])))]
struct BuildArgs {
    /// Subdivision parameter reused for every round
    #[arg(long)]
    n: Option<u32>,
    /// Number of rounds, used with --n
    #[arg(long, default_value_t = 1, requires = "n")]
    rounds: u32,
    /// Per-round parameters, comma separated (alternative to --n)
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<u32>>,
    /// Use seeded random valid patterns instead of the canonical ones
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Snapshot file to check
    #[arg(long)]
    input: PathBuf,
    /// Per-round parameters the snapshot was built with, e.g. 1,1,2
    #[arg(long, value_delimiter = ',', required = true)]
    ns: Vec<u32>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["depth", "check"])))]
struct ScheduleArgs {
    /// Number of blocks to synthesize
    #[arg(long)]
    depth: Option<u32>,
    /// Ratio threshold as a fraction p/q
    #[arg(long, default_value = "1/100")]
    epsilon: String,
    /// Re-verify this schedule file instead of synthesizing
    #[arg(long)]
    check: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("proj").required(true).args(["slope", "diag_plus", "diag_minus"])))]
struct ProjectArgs {
    /// Snapshot file
    #[arg(long)]
    input: PathBuf,
    /// Per-round parameters, used to reconstruct the stage chain
    #[arg(long, value_delimiter = ',', required = true)]
    ns: Vec<u32>,
    /// Rational slope of the projection x + slope*y
    #[arg(long, allow_hyphen_values = true)]
    slope: Option<String>,
    /// Project onto x+y values
    #[arg(long)]
    diag_plus: bool,
    /// Project onto x-y values
    #[arg(long)]
    diag_minus: bool,
    /// Append the counting bound column (diagonal projections only)
    #[arg(long)]
    bound: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DimsArgs {
    /// Schedule file
    #[arg(long)]
    schedule: PathBuf,
    /// Append a trailing odd half-stage with this subdivision parameter
    #[arg(long)]
    half_stage: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SliceArgs {
    /// Snapshot file holding the parameter cells
    #[arg(long)]
    input: PathBuf,
    /// Slice height t as a fraction p/q, negatives allowed
    #[arg(long, allow_hyphen_values = true)]
    t: String,
    /// Lift: planar, box:<d>, or power:<d>
    #[arg(long, default_value = "planar")]
    lift: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum StickyCmd {
    /// Stage-k cover of the digit-{0,3} set
    C0 {
        #[arg(long)]
        stage: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weighted sum C0 + t*C0 of stage covers
    Sum {
        #[arg(long)]
        stage: u32,
        /// Weight t as a fraction p/q, negatives allowed
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slice of the plate family at height lambda
    Slice {
        /// Height strictly between 0 and 1, as p/q
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        stage: u32,
        /// Ambient dimension
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Product structure of the stage parameters (exit 1 on failure)
    Check {
        #[arg(long)]
        stage: u32,
        #[arg(long, default_value_t = 2)]
        d: u32,
    },
    /// Direction box coverage (exit 1 when not the full box)
    Dirbox {
        #[arg(long)]
        stage: u32,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dimension counts of the line factor, or of the planar product
    Counts {
        #[arg(long)]
        stage: u32,
        /// Count the planar four-corner product instead of the line factor
        #[arg(long)]
        plane: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    /// Stage panels, odd and even stages alternating
    Stages,
    /// Line fan of a parameter family
    Fan,
    /// Line fan of the four-corner family
    StickyFan,
    /// P5 raster of the union of lines, one slice per row
    K0Raster,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, value_enum)]
    figure: Figure,
    /// Snapshot input for fan and raster figures (built or derived otherwise)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Subdivision parameter for built figures
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Rounds for built fan and raster figures
    #[arg(long, default_value_t = 1)]
    rounds: u32,
    /// Panel count for the stages figure
    #[arg(long, default_value_t = 2)]
    stages: u32,
    /// Stage of the four-corner family
    #[arg(long, default_value_t = 3)]
    stage: u32,
    /// Panel side in pixels
    #[arg(long, default_value_t = 200)]
    size: u32,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 480)]
    height: u32,
    /// Overlay the slice plane at this height, p/q
    #[arg(long, allow_hyphen_values = true)]
    slice_t: Option<String>,
    /// Cap on drawn parameter cells
    #[arg(long, default_value_t = 4096)]
    max_cells: usize,
    /// Output file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Fraction(String),
    Input(PathBuf, std::io::Error),
    Output(PathBuf, std::io::Error),
    Check(String),
    Domain(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Fraction(s) => write!(f, "bad fraction {s}"),
            CliError::Input(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            CliError::Output(p, e) => write!(f, "cannot write {}: {e}", p.display()),
            CliError::Check(s) => write!(f, "check failed: {s}"),
            CliError::Domain(s) => f.write_str(s),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Fraction(_) => 3,
            CliError::Input(..) => 4,
            CliError::Output(..) | CliError::Domain(_) => 5,
        }
    }
}

macro_rules! domain_from {
    ($($t:ty),+ $(,)?) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain(e.to_string())
            }
        })+
    };
}

domain_from!(
    GridError,
    BuildError,
    PatternError,
    VerifyError,
    SnapshotError,
    ScheduleError,
    ScheduleParseError,
    DimensionError,
    StickyError,
    AssemblyError,
    RenderError,
);

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Build(a) => cmd_build(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Schedule(a) => cmd_schedule(a),
        Cmd::Project(a) => cmd_project(a),
        Cmd::Dims(a) => cmd_dims(a),
        Cmd::Slice(a) => cmd_slice(a),
        Cmd::Sticky(c) => cmd_sticky(c),
        Cmd::Render(a) => cmd_render(a),
    }
}

fn fraction(s: &str) -> Result<Rational, CliError> {
    parse_fraction(s).map_err(|e| CliError::Fraction(format!("`{s}`: {e}")))
}

fn read_input(p: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(p).map_err(|e| CliError::Input(p.clone(), e))
}

fn emit(out: &Option<PathBuf>, content: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, content).map_err(|e| CliError::Output(p.clone(), e)),
        None => {
            std::io::stdout()
                .write_all(content)
                .map_err(|e| CliError::Output(PathBuf::from("<stdout>"), e))
        }
    }
}

fn interval_lines(u: &IntervalUnion) -> String {
    let mut out = String::new();
    for (lo, hi) in u.pieces() {
        out.push_str(&format!("{} {}\n", format_fraction(lo), format_fraction(hi)));
    }
    out
}

fn slice_text(s: &Slice) -> String {
    let mut out = interval_lines(&s.factor);
    out.push_str(&format!("copies={}\n", s.copies));
    out.push_str(&format!("box_dims={}\n", s.box_dims));
    out.push_str(&format!("measure={}\n", format_fraction(&s.measure())));
    out
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut b = serde_json::to_vec_pretty(value).map_err(|e| CliError::Domain(e.to_string()))?;
    b.push(b'\n');
    Ok(b)
}

fn round_list(n: Option<u32>, rounds: u32, ns: Option<Vec<u32>>) -> Result<Vec<u32>, CliError> {
    let list = match ns {
        Some(v) => v,
        None => vec![n.expect("clap group"); rounds as usize],
    };
    if list.is_empty() || list.contains(&0) {
        return Err(CliError::Domain("round parameters must be positive".into()));
    }
    Ok(list)
}

fn cmd_build(a: BuildArgs) -> Result<(), CliError> {
    let list = round_list(a.n, a.rounds, a.ns)?;
    let mut state = BuildState::initial();
    for (j, &n) in list.iter().enumerate() {
        let pat = match a.seed {
            Some(seed) => moran::random_round_pattern(n, seed.wrapping_add(j as u64), 10_000)?,
            None => moran::make_round_pattern(n)?,
        };
        state.apply_round(&pat)?;
    }
    emit(&a.out, write_snapshot(state.cells()).as_bytes())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), CliError> {
    let cells = parse_snapshot(&read_input(&a.input)?)?;
    let report = moran::verify_conditions(&cells, &a.ns)?;
    emit(&a.out, &json_bytes(&report)?)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Check(
            report.first_failure().unwrap_or_else(|| "construction conditions".into()),
        ))
    }
}

fn cmd_schedule(a: ScheduleArgs) -> Result<(), CliError> {
    if let Some(path) = &a.check {
        let sched = schedule::parse_schedule(&read_input(path)?)?;
        sched.validate().map_err(|e| CliError::Check(e.to_string()))?;
        emit(&a.out, format!("ok blocks={}\n", sched.blocks.len()).as_bytes())
    } else {
        let eps = fraction(&a.epsilon)?;
        let sched = schedule::build_schedule(a.depth.expect("clap group"), &eps)?;
        emit(&a.out, sched.to_text().as_bytes())
    }
}

fn cmd_project(a: ProjectArgs) -> Result<(), CliError> {
    enum Kind {
        Slope(Rational),
        Plus,
        Minus,
    }
    let kind = match &a.slope {
        Some(s) => Kind::Slope(fraction(s)?),
        None if a.diag_plus => Kind::Plus,
        None => Kind::Minus,
    };
    if a.bound && matches!(kind, Kind::Slope(_)) {
        return Err(CliError::Domain(
            "--bound applies to diagonal projections only".into(),
        ));
    }
    if a.ns.contains(&0) {
        return Err(CliError::Domain("round parameters must be positive".into()));
    }
    let cells = parse_snapshot(&read_input(&a.input)?)?;
    let total: u32 = a.ns.iter().map(|n| 2 * n).sum();
    if cells.exponent() != total {
        return Err(CliError::Domain(format!(
            "snapshot exponent {} does not match the --ns total {total}",
            cells.exponent()
        )));
    }
    let mut out = String::new();
    let mut s = 0u32;
    for (j, &n) in a.ns.iter().enumerate() {
        s += 2 * n;
        let stage = cells.coarsen(s)?;
        let m = match &kind {
            Kind::Slope(l) => projection::project(&stage, l).measure(),
            Kind::Plus => projection::diag_plus(&stage).measure(),
            Kind::Minus => projection::diag_minus(&stage).measure(),
        };
        out.push_str(&format!("{s} {}", format_fraction(&m)));
        if a.bound {
            out.push_str(&format!(
                " {}",
                format_fraction(&diag_measure_bound(&a.ns[..=j]))
            ));
        }
        out.push('\n');
    }
    emit(&a.out, out.as_bytes())
}

fn parse_biguint(s: &str) -> Result<BigUint, CliError> {
    (!s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
        .then(|| BigUint::parse_bytes(s.as_bytes(), 10))
        .flatten()
        .ok_or_else(|| CliError::Domain(format!("bad integer `{s}`")))
}

fn cmd_dims(a: DimsArgs) -> Result<(), CliError> {
    let sched = schedule::parse_schedule(&read_input(&a.schedule)?)?;
    let half = a.half_stage.as_deref().map(parse_biguint).transpose()?;
    let counts = CubeCounts::from_schedule(&sched, half.as_ref())?;
    emit(&a.out, &json_bytes(&counts.report()?)?)
}

fn lift_family(cells: CellSet, lift: &str) -> Result<LineFamily, CliError> {
    if lift == "planar" {
        return Ok(LineFamily::from_cells(cells));
    }
    let parsed = lift.split_once(':').and_then(|(kind, d)| {
        let d: u32 = d.parse().ok()?;
        Some((kind, d))
    });
    match parsed {
        Some(("box", d)) => Ok(LineFamily::with_box_lift(cells, d)?),
        Some(("power", d)) => Ok(LineFamily::with_power_lift(cells, d)?),
        _ => Err(CliError::Domain(format!(
            "bad lift `{lift}` (expected planar, box:<d>, or power:<d>)"
        ))),
    }
}

fn cmd_slice(a: SliceArgs) -> Result<(), CliError> {
    let cells = parse_snapshot(&read_input(&a.input)?)?;
    let t = fraction(&a.t)?;
    let fam = lift_family(cells, &a.lift)?;
    emit(&a.out, slice_text(&fam.slice(&t)).as_bytes())
}

fn cmd_sticky(cmd: StickyCmd) -> Result<(), CliError> {
    match cmd {
        StickyCmd::C0 { stage, out } => {
            let c = sticky::c0_stage(stage)?;
            let mut text = interval_lines(&c);
            text.push_str(&format!("measure={}\n", format_fraction(&c.measure())));
            emit(&out, text.as_bytes())
        }
        StickyCmd::Sum { stage, t, out } => {
            let t = fraction(&t)?;
            let c = sticky::c0_stage(stage)?;
            let sum = sticky::minkowski_sum(&c, &c, &t)?;
            let mut text = interval_lines(&sum);
            text.push_str(&format!("measure={}\n", format_fraction(&sum.measure())));
            emit(&out, text.as_bytes())
        }
        StickyCmd::Slice { lambda, stage, d, out } => {
            let l = fraction(&lambda)?;
            let s = sticky::sticky_slice(&l, stage, d)?;
            emit(&out, slice_text(&s).as_bytes())
        }
        StickyCmd::Check { stage, d } => {
            let check = sticky::sticky_param_product_check(stage, d)?;
            if check.pass {
                emit(&None, format!("pass boxes={}\n", check.boxes).as_bytes())
            } else {
                emit(
                    &None,
                    format!(
                        "fail boxes={} witness={}\n",
                        check.boxes,
                        check.witness.unwrap_or_default()
                    )
                    .as_bytes(),
                )?;
                Err(CliError::Check("parameter product structure".into()))
            }
        }
        StickyCmd::Dirbox { stage, d, out } => {
            let span = sticky::direction_span(stage)?;
            let full = sticky::direction_box_is_full(stage, d)?;
            let mut text = interval_lines(&span);
            text.push_str(&format!("full={full}\n"));
            emit(&out, text.as_bytes())?;
            if full {
                Ok(())
            } else {
                Err(CliError::Check("direction box is not full".into()))
            }
        }
        StickyCmd::Counts { stage, plane, out } => {
            let counts = if plane {
                sticky::four_corner_counts(stage)?
            } else {
                sticky::c0_dimension_counts(stage)?
            };
            emit(&out, &json_bytes(&counts.report()?)?)
        }
    }
}

fn stage_panels(n: u32, stages: u32) -> Result<Vec<StagePanel>, CliError> {
    let pat = moran::make_round_pattern(n)?;
    let mut state = BuildState::initial();
    let mut panels = Vec::new();
    for i in 0..stages {
        let prev = state.cells().exponent();
        if i % 2 == 0 {
            panels.push(StagePanel {
                cells: state.odd_stage(&pat)?,
                coarse_exponent: prev,
            });
        } else {
            state.apply_round(&pat)?;
            panels.push(StagePanel {
                cells: state.cells().clone(),
                coarse_exponent: prev + n,
            });
        }
    }
    Ok(panels)
}

fn cmd_render(a: RenderArgs) -> Result<(), CliError> {
    let family_cells = |a: &RenderArgs, default_sticky: bool| -> Result<CellSet, CliError> {
        match &a.input {
            Some(p) => Ok(parse_snapshot(&read_input(p)?)?),
            None if default_sticky => Ok(sticky::four_corner_stage(a.stage)?),
            None => Ok(moran::build_rounds(a.n, a.rounds)?.cells().clone()),
        }
    };
    let content: Vec<u8> = match a.figure {
        Figure::Stages => {
            render::render_stage_panels(&stage_panels(a.n, a.stages)?, a.size)?.into_bytes()
        }
        Figure::Fan | Figure::StickyFan => {
            let cells = family_cells(&a, a.figure == Figure::StickyFan)?;
            let opts = FanOptions {
                width_px: a.width,
                height_px: a.height,
                max_cells: a.max_cells,
                slice_t: a.slice_t.as_deref().map(fraction).transpose()?,
            };
            render::render_line_fan(&cells, &opts)?.into_bytes()
        }
        Figure::K0Raster => {
            let cells = family_cells(&a, true)?;
            render::render_slice_raster(&cells, a.width, a.height)?
        }
    };
    fs::write(&a.out, content).map_err(|e| CliError::Output(a.out.clone(), e))
}
