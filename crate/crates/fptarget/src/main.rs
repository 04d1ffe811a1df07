//! Command-line front end for the fingerprint-target toolchain.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 validation or
//! geometry failure, 3 external-matcher failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fptarget::config::PipelineConfig;
use fptarget::matcher::{evaluate_matrix_parallel, ExternalMatcher};
use fptarget::pgm::{load_image, write_pgm, ImageError};
use fptarget::pipeline::run_pipeline;
use fptarget::report::write_matrix_csv;
use fptarget::sets::{load_sets_dir, load_sets_manifest, SetsError};
use fptarget::stl::{read_stl, write_stl, StlError};
use fptarget::obj::{read_obj, ObjError};
use fptarget_core::interop::{BaselineMatcher, InteropError, MatchError, ScoreMatrix};
use fptarget_core::metrology::ridge_spacing;
use fptarget_core::mold::{build_mold, MoldSpec};
use fptarget_core::pattern::{sine_grating, synth_impression, GratingKind};
use fptarget_core::projection::{make_smooth_finger, map_image_to_surface, ScaleModel, Wrap};
use fptarget_core::scaffold::{build_scaffold, ScaffoldSpec};
use fptarget_core::TriangleMesh;

#[derive(Parser)]
#[command(
    name = "fptarget",
    version,
    about = "Build, measure, and evaluate 3D fingerprint targets (units: mm and px)",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sinusoidal calibration grating as a PGM image
    GenPattern(GenPatternArgs),
    /// Project an image onto the synthetic finger and write the displaced surface STL
    Project(ProjectArgs),
    /// Build the two-piece negative mold around a displaced surface mesh
    BuildMold(BuildMoldArgs),
    /// Build the four scaffold framework parts for a mold
    BuildScaffold(BuildScaffoldArgs),
    /// Check a mesh for watertightness and print its validation report
    ValidateMesh(ValidateMeshArgs),
    /// Measure mean center-to-center ridge spacing in an image
    MeasureRidges(MeasureRidgesArgs),
    /// Simulate capturing a printed/cast pattern (rescale + sensor noise)
    SynthImpression(SynthArgs),
    /// Score impression sets across readers and report the TAR/FAR matrix
    Interop(InteropArgs),
    /// Run the whole electronic pipeline from a config file
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Vertical,
    Horizontal,
    Circular,
}

impl From<KindArg> for GratingKind {
    fn from(kind: KindArg) -> GratingKind {
        match kind {
            KindArg::Vertical => GratingKind::Vertical,
            KindArg::Horizontal => GratingKind::Horizontal,
            KindArg::Circular => GratingKind::Circular,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WrapArg {
    Frontal,
    Full,
}

impl From<WrapArg> for Wrap {
    fn from(wrap: WrapArg) -> Wrap {
        match wrap {
            WrapArg::Frontal => Wrap::Frontal,
            WrapArg::Full => Wrap::Full,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleMode {
    /// Project at the nominal scale, uncompensated
    Nominal,
    /// Divide out modeling + printing shrink
    Compensated,
    /// Divide out modeling + printing + casting shrink
    #[value(name = "compensated+cast")]
    CompensatedCast,
}

impl ScaleMode {
    fn px_per_mm(self, model: &ScaleModel) -> f64 {
        match self {
            ScaleMode::Nominal => model.nominal_px_per_mm,
            ScaleMode::Compensated => model.compensated_scale(false),
            ScaleMode::CompensatedCast => model.compensated_scale(true),
        }
    }
}

#[derive(Args)]
struct FingerArgs {
    /// Finger diameter in mm
    #[arg(long = "diameter", value_name = "MM", default_value_t = 27.0)]
    diameter_mm: f64,
    /// Finger body length (base to start of the tip hemisphere) in mm
    #[arg(long = "length", value_name = "MM", default_value_t = 25.0)]
    length_mm: f64,
    /// Circumferential tessellation segments (count)
    #[arg(long, value_name = "N", default_value_t = 512)]
    circ_segments: u32,
    /// Axial tessellation segments along the body (count)
    #[arg(long, value_name = "N", default_value_t = 256)]
    axial_segments: u32,
}

#[derive(Args)]
struct ScaleArgs {
    /// Nominal projection scale in px/mm (500 ppi = 19.685)
    #[arg(long, value_name = "PX_PER_MM", default_value_t = 19.685)]
    nominal_scale: f64,
    /// Modeling shrink fraction (dimensionless)
    #[arg(long, value_name = "FRACTION", default_value_t = 0.058)]
    e_model: f64,
    /// Printing shrink fraction (dimensionless)
    #[arg(long, value_name = "FRACTION", default_value_t = 0.1142)]
    e_print: f64,
    /// Casting shrink fraction (dimensionless)
    #[arg(long, value_name = "FRACTION", default_value_t = 0.018)]
    e_cast: f64,
}

impl ScaleArgs {
    fn model(&self) -> ScaleModel {
        ScaleModel {
            nominal_px_per_mm: self.nominal_scale,
            e_model: self.e_model,
            e_print: self.e_print,
            e_cast: self.e_cast,
        }
    }
}

#[derive(Args)]
struct MoldArgs {
    /// Outer shell diameter in mm
    #[arg(long = "shell-dia", value_name = "MM", default_value_t = 34.0)]
    shell_diameter_mm: f64,
    /// Shell height as a multiple of the finger surface height (ratio)
    #[arg(long, value_name = "RATIO", default_value_t = 1.25)]
    height_factor: f64,
    /// Minimum acceptable wall thickness in mm
    #[arg(long = "min-wall", value_name = "MM", default_value_t = 3.5)]
    min_wall_mm: f64,
    /// Alignment lock bar length in mm
    #[arg(long = "lock-length", value_name = "MM", default_value_t = 34.0)]
    lock_length_mm: f64,
    /// Alignment lock bar width in mm
    #[arg(long = "lock-width", value_name = "MM", default_value_t = 4.0)]
    lock_width_mm: f64,
    /// Alignment lock bar height in mm
    #[arg(long = "lock-height", value_name = "MM", default_value_t = 4.0)]
    lock_height_mm: f64,
    /// Shell wall tessellation segments (count)
    #[arg(long, value_name = "N", default_value_t = 256)]
    shell_segments: u32,
}

impl MoldArgs {
    fn spec(&self) -> MoldSpec {
        MoldSpec {
            shell_diameter_mm: self.shell_diameter_mm,
            height_factor: self.height_factor,
            min_wall_mm: self.min_wall_mm,
            lock_length_mm: self.lock_length_mm,
            lock_cross_section_mm: (self.lock_width_mm, self.lock_height_mm),
            shell_segments: self.shell_segments,
        }
    }
}

#[derive(Args)]
struct GenPatternArgs {
    /// Direction of intensity variation
    #[arg(long, value_enum, default_value_t = KindArg::Circular)]
    kind: KindArg,
    /// Grating period in px
    #[arg(long, value_name = "PX", default_value_t = 10.0)]
    period: f64,
    /// Image size as WxH in px
    #[arg(long, value_name = "WxH", value_parser = parse_size, default_value = "800x800")]
    size: (u32, u32),
    /// Sampling resolution stored with the image, in px/inch
    #[arg(long, value_name = "PPI", default_value_t = 500.0)]
    ppi: f64,
    /// Output PGM path
    #[arg(short = 'o', long = "output", value_name = "FILE.pgm")]
    output: PathBuf,
}

#[derive(Args)]
struct ProjectArgs {
    /// Input fingerprint image (PGM or PNG)
    #[arg(long, value_name = "FILE")]
    image: PathBuf,
    /// Override the image's px/inch resolution
    #[arg(long, value_name = "PPI")]
    ppi: Option<f64>,
    /// Which shrink stages the projection scale compensates
    #[arg(long, value_enum, default_value_t = ScaleMode::Compensated)]
    scale_mode: ScaleMode,
    /// Ridge relief height in mm
    #[arg(long = "ridge-height", value_name = "MM", default_value_t = 0.33)]
    ridge_height_mm: f64,
    /// Circumferential coverage of the image
    #[arg(long, value_enum, default_value_t = WrapArg::Frontal)]
    wrap: WrapArg,
    #[command(flatten)]
    finger: FingerArgs,
    #[command(flatten)]
    scale: ScaleArgs,
    /// Output STL path for the displaced (open) surface
    #[arg(short = 'o', long = "output", value_name = "FILE.stl")]
    output: PathBuf,
}

#[derive(Args)]
struct BuildMoldArgs {
    /// Displaced finger surface mesh (STL or OBJ)
    #[arg(long, value_name = "FILE")]
    surface: PathBuf,
    /// Finger surface height in mm (default: mesh extent along z)
    #[arg(long = "finger-height", value_name = "MM")]
    finger_height_mm: Option<f64>,
    #[command(flatten)]
    mold: MoldArgs,
    /// Output directory for mold_half_a.stl and mold_half_b.stl
    #[arg(short = 'o', long = "output", value_name = "DIR")]
    output: PathBuf,
}

#[derive(Args)]
struct BuildScaffoldArgs {
    /// Scaffold wall thickness in mm
    #[arg(long = "wall", value_name = "MM", default_value_t = 9.0)]
    wall_mm: f64,
    /// Mold cutout diameter in mm (must equal the shell diameter)
    #[arg(long = "cutout", value_name = "MM", default_value_t = 34.0)]
    cutout_mm: f64,
    /// Inner-surface shrink offset in mm (casting shell thickness)
    #[arg(long = "offset", value_name = "MM", default_value_t = 1.5)]
    shrink_offset_mm: f64,
    /// Side-wall clearance above the mold mouth in mm
    #[arg(long = "clearance", value_name = "MM", default_value_t = 20.0)]
    clearance_above_mold_mm: f64,
    #[command(flatten)]
    mold: MoldArgs,
    #[command(flatten)]
    finger: FingerArgs,
    /// Output directory for the four scaffold STLs
    #[arg(short = 'o', long = "output", value_name = "DIR")]
    output: PathBuf,
}

impl BuildScaffoldArgs {
    fn spec(&self) -> ScaffoldSpec {
        ScaffoldSpec {
            wall_mm: self.wall_mm,
            cutout_mm: self.cutout_mm,
            shrink_offset_mm: self.shrink_offset_mm,
            clearance_above_mold_mm: self.clearance_above_mold_mm,
        }
    }
}

#[derive(Args)]
struct ValidateMeshArgs {
    /// Mesh file to check (STL or OBJ)
    #[arg(value_name = "FILE")]
    mesh: PathBuf,
}

#[derive(Args)]
struct MeasureRidgesArgs {
    /// Image to measure (PGM or PNG)
    #[arg(value_name = "FILE")]
    image: PathBuf,
    /// Override the image's px/inch resolution
    #[arg(long, value_name = "PPI")]
    ppi: Option<f64>,
    /// Analysis window side in px
    #[arg(long, value_name = "PX", default_value_t = 64)]
    window: u32,
    /// Window step in px
    #[arg(long, value_name = "PX", default_value_t = 32)]
    step: u32,
    /// Expected spacing in px, for the deviation report line
    #[arg(long, value_name = "PX")]
    expected: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    /// Source image (PGM or PNG)
    #[arg(long, value_name = "FILE")]
    image: PathBuf,
    /// Override the image's px/inch resolution
    #[arg(long, value_name = "PPI")]
    ppi: Option<f64>,
    /// Rescale factor about the image centre (0.5 to 2.0, dimensionless)
    #[arg(long, value_name = "FACTOR", default_value_t = 1.0)]
    scale: f64,
    /// Gaussian sensor noise standard deviation in gray levels
    #[arg(long, value_name = "GRAY", default_value_t = 0.0)]
    noise: f64,
    /// RNG seed (same seed, same output)
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Output PGM path
    #[arg(short = 'o', long = "output", value_name = "FILE.pgm")]
    output: PathBuf,
}

#[derive(Args)]
struct InteropArgs {
    /// CSV manifest of impressions (reader_id,target_id,index,path)
    #[arg(long, value_name = "CSV", conflicts_with = "dir", required_unless_present = "dir")]
    manifest: Option<PathBuf>,
    /// Corpus root laid out as <reader>/<target>/<index>.pgm
    #[arg(long, value_name = "DIR")]
    dir: Option<PathBuf>,
    /// Override every image's px/inch resolution
    #[arg(long, value_name = "PPI")]
    ppi: Option<f64>,
    /// "builtin" or "cmd:<argv with {a} {b} placeholders>"
    #[arg(long, value_name = "MATCHER", default_value = "builtin")]
    matcher: String,
    /// Operating threshold on the score scale (score units)
    #[arg(long, value_name = "SCORE", default_value_t = 49.0)]
    threshold: f64,
    /// Also score pairs whose two sides are the same file
    #[arg(long)]
    include_identical: bool,
    /// Scoring worker threads (default: $FPTARGET_WORKERS or 1)
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// External matcher timeout per pair in seconds
    #[arg(long = "timeout-secs", value_name = "S", default_value_t = 30)]
    timeout_secs: u64,
    /// Also write the matrix as CSV
    #[arg(short = 'o', long = "output", value_name = "FILE.csv")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config file (flat key=value; see the config reference)
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
}

/// A command failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Failure {
        Failure { code: 1, message: e.to_string() }
    }
    fn geometry(e: impl std::fmt::Display) -> Failure {
        Failure { code: 2, message: e.to_string() }
    }
    fn matcher(e: impl std::fmt::Display) -> Failure {
        Failure { code: 3, message: e.to_string() }
    }
}

/// Content-level failures are geometry/validation (2); unreadable files are
/// usage (1).
fn stl_failure(e: StlError) -> Failure {
    match e {
        StlError::Io { .. } => Failure::usage(e),
        _ => Failure::geometry(e),
    }
}

fn obj_failure(e: ObjError) -> Failure {
    match e {
        ObjError::Io { .. } => Failure::usage(e),
        _ => Failure::geometry(e),
    }
}

fn image_failure(e: ImageError) -> Failure {
    match e {
        ImageError::Io { .. } | ImageError::UnknownFormat { .. } => Failure::usage(e),
        _ => Failure::geometry(e),
    }
}

fn sets_failure(e: SetsError) -> Failure {
    match e {
        SetsError::Image(inner) => image_failure(inner),
        SetsError::Interop(inner) => Failure::geometry(inner),
        _ => Failure::usage(e),
    }
}

/// Join an error with its sources; `Display` alone drops the cause of a
/// matcher failure.
fn error_chain(e: &dyn std::error::Error) -> String {
    let mut text = e.to_string();
    let mut cause = e.source();
    while let Some(c) = cause {
        text.push_str(": ");
        text.push_str(&c.to_string());
        cause = c.source();
    }
    text
}

fn interop_failure(e: InteropError) -> Failure {
    let chained = error_chain(&e);
    match &e {
        InteropError::MatchFailed { source: MatchError::Backend { .. }, .. } => {
            Failure::matcher(chained)
        }
        _ => Failure::geometry(chained),
    }
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH (e.g. 800x800), got '{}'", s))?;
    let w = w.trim().parse::<u32>().map_err(|e| format!("width: {}", e))?;
    let h = h.trim().parse::<u32>().map_err(|e| format!("height: {}", e))?;
    Ok((w, h))
}

fn read_mesh(path: &Path) -> Result<TriangleMesh, Failure> {
    match path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase().as_str()
    {
        "stl" => read_stl(path).map_err(stl_failure),
        "obj" => read_obj(path).map_err(obj_failure),
        other => Err(Failure::usage(format!(
            "{}: unknown mesh format '.{}' (use .stl or .obj)",
            path.display(),
            other
        ))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::GenPattern(args) => cmd_gen_pattern(args),
        Command::Project(args) => cmd_project(args),
        Command::BuildMold(args) => cmd_build_mold(args),
        Command::BuildScaffold(args) => cmd_build_scaffold(args),
        Command::ValidateMesh(args) => cmd_validate_mesh(args),
        Command::MeasureRidges(args) => cmd_measure_ridges(args),
        Command::SynthImpression(args) => cmd_synth(args),
        Command::Interop(args) => cmd_interop(args),
        Command::Run(args) => cmd_run(args),
    }
}

fn cmd_gen_pattern(args: GenPatternArgs) -> Result<(), Failure> {
    let (width, height) = args.size;
    let image = sine_grating(args.kind.into(), args.period, width, height, args.ppi)
        .map_err(Failure::geometry)?;
    write_pgm(&image, &args.output).map_err(image_failure)?;
    println!("wrote {} ({}x{} px, {} ppi)", args.output.display(), width, height, args.ppi);
    Ok(())
}

fn cmd_project(args: ProjectArgs) -> Result<(), Failure> {
    let model = args.scale.model();
    model.validate().map_err(Failure::usage)?;
    let image = load_image(&args.image, args.ppi).map_err(image_failure)?;
    let surface = make_smooth_finger(
        args.finger.diameter_mm,
        args.finger.length_mm,
        args.finger.circ_segments,
        args.finger.axial_segments,
    )
    .map_err(Failure::geometry)?;
    let scale = args.scale_mode.px_per_mm(&model);
    println!("scale: {:.2} px/mm", scale);
    let displaced =
        map_image_to_surface(&image, &surface, scale, args.ridge_height_mm, args.wrap.into())
            .map_err(Failure::geometry)?;
    write_stl(&displaced, &args.output).map_err(stl_failure)?;
    println!("wrote {} ({} faces)", args.output.display(), displaced.face_count());
    Ok(())
}

fn cmd_build_mold(args: BuildMoldArgs) -> Result<(), Failure> {
    let surface = read_mesh(&args.surface)?;
    let finger_height = match args.finger_height_mm {
        Some(h) => h,
        None => {
            let b = surface.bounds();
            b.max.z - b.min.z
        }
    };
    let assembly = build_mold(&surface, finger_height, &args.mold.spec())
        .map_err(Failure::geometry)?;
    std::fs::create_dir_all(&args.output).map_err(Failure::usage)?;
    let half_a = args.output.join("mold_half_a.stl");
    let half_b = args.output.join("mold_half_b.stl");
    write_stl(&assembly.half_above, &half_a).map_err(stl_failure)?;
    write_stl(&assembly.half_below, &half_b).map_err(stl_failure)?;
    println!("{}", assembly.dimensions());
    println!("wrote {}", half_a.display());
    println!("wrote {}", half_b.display());
    Ok(())
}

fn cmd_build_scaffold(args: BuildScaffoldArgs) -> Result<(), Failure> {
    let surface = make_smooth_finger(
        args.finger.diameter_mm,
        args.finger.length_mm,
        args.finger.circ_segments,
        args.finger.axial_segments,
    )
    .map_err(Failure::geometry)?;
    let parts = build_scaffold(&args.mold.spec(), &args.spec(), &surface)
        .map_err(Failure::geometry)?;
    std::fs::create_dir_all(&args.output).map_err(Failure::usage)?;
    println!("{}", parts.dims);
    for (name, mesh) in parts.named() {
        let path = args.output.join(format!("{}.stl", name));
        write_stl(mesh, &path).map_err(stl_failure)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_validate_mesh(args: ValidateMeshArgs) -> Result<(), Failure> {
    let mesh = read_mesh(&args.mesh)?;
    let report = mesh.validate();
    print!("{}", report);
    if report.is_sound() {
        Ok(())
    } else {
        Err(Failure::geometry(format!("{} is not watertight/sound", args.mesh.display())))
    }
}

fn cmd_measure_ridges(args: MeasureRidgesArgs) -> Result<(), Failure> {
    let image = load_image(&args.image, args.ppi).map_err(image_failure)?;
    let report = ridge_spacing(&image, args.window, args.step, args.expected)
        .map_err(Failure::geometry)?;
    println!("{}", report);
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let image = load_image(&args.image, args.ppi).map_err(image_failure)?;
    let out =
        synth_impression(&image, args.scale, args.noise, args.seed).map_err(Failure::geometry)?;
    write_pgm(&out, &args.output).map_err(image_failure)?;
    println!("wrote {}", args.output.display());
    Ok(())
}

fn env_workers() -> Result<Option<usize>, Failure> {
    match std::env::var("FPTARGET_WORKERS") {
        Ok(raw) if !raw.trim().is_empty() => {
            let n: usize = raw
                .trim()
                .parse()
                .map_err(|e| Failure::usage(format!("FPTARGET_WORKERS={:?}: {}", raw, e)))?;
            Ok(Some(n.max(1)))
        }
        _ => Ok(None),
    }
}

fn cmd_interop(args: InteropArgs) -> Result<(), Failure> {
    let sets = if let Some(manifest) = &args.manifest {
        load_sets_manifest(manifest, args.ppi).map_err(sets_failure)?
    } else {
        let dir = args.dir.as_ref().expect("clap enforces manifest xor dir");
        load_sets_dir(dir, args.ppi).map_err(sets_failure)?
    };
    let workers = match args.workers {
        Some(n) => n.max(1),
        None => env_workers()?.unwrap_or(1),
    };

    let matrix: ScoreMatrix = if args.matcher == "builtin" {
        evaluate_matrix_parallel(
            &sets,
            &BaselineMatcher,
            args.threshold,
            args.include_identical,
            workers,
        )
        .map_err(interop_failure)?
    } else if let Some(template) = args.matcher.strip_prefix("cmd:") {
        let external =
            ExternalMatcher::new(template, Duration::from_secs(args.timeout_secs.max(1)))
                .map_err(Failure::usage)?;
        evaluate_matrix_parallel(
            &sets,
            &external,
            args.threshold,
            args.include_identical,
            workers,
        )
        .map_err(interop_failure)?
    } else {
        return Err(Failure::usage(format!(
            "--matcher must be \"builtin\" or \"cmd:<command>\", got {:?}",
            args.matcher
        )));
    };

    println!("{}", matrix);
    if let Some(path) = &args.output {
        write_matrix_csv(&matrix, path).map_err(Failure::usage)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let mut config = PipelineConfig::from_file(&args.config).map_err(Failure::usage)?;
    if let Ok(dir) = std::env::var("FPTARGET_OUT_DIR") {
        if !dir.trim().is_empty() {
            config.output_dir = PathBuf::from(dir);
        }
    }
    let out = run_pipeline(&config).map_err(Failure::geometry)?;
    println!("scale: {:.2} px/mm", out.compensated_px_per_mm);
    println!("output {}", out.output_dir.display());
    for entry in &out.manifest {
        println!("{}  {:>9} B  {}", entry.sha256, entry.bytes, entry.path);
    }
    println!("manifest {}", out.manifest_path.display());
    Ok(())
}
