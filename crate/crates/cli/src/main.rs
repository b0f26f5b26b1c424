//! `urdd`: convert URDF files into URDDs, combine, inspect and validate them.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use urdd_core::composer::{combine, Attachment};
use urdd_core::pipeline::{
    apply_overrides, batch_convert, convert_file, read_overrides, urdd_info, ConvertOptions, ConvertReport, UrddInfo,
};
use urdd_core::proximity::SamplingParams;
use urdd_core::{Error, ErrorClass};
use urdd_store::schema::{DecompositionParams, JointSpec};
use urdd_store::{validate_urdd, ModuleId};

#[derive(Parser)]
#[command(name = "urdd", version, about = "Convert, combine, inspect and validate URDDs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert one URDF into a URDD.
    Convert {
        #[arg(long)]
        urdf: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        derive: DeriveFlags,
    },
    /// Convert every *.urdf below a directory.
    Batch {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        derive: DeriveFlags,
    },
    /// Summarize a URDD.
    Info {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Attach the child URDD to a link of the parent URDD.
    Combine {
        #[arg(long)]
        parent: PathBuf,
        #[arg(long)]
        child: PathBuf,
        /// Link of the parent to attach to.
        #[arg(long)]
        attach_link: String,
        /// Attachment joint as JSON, or `@path` to a JSON file.
        #[arg(long)]
        joint: String,
        #[arg(long)]
        parent_prefix: Option<String>,
        #[arg(long)]
        child_prefix: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        derive: DeriveFlags,
    },
    /// Check a URDD for consistency.
    Validate {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Regenerate the skips module of a URDD from a skips_overrides.json file.
    ApplyOverrides {
        dir: PathBuf,
        #[arg(long)]
        overrides: PathBuf,
    },
}

#[derive(Args, Clone)]
struct DeriveFlags {
    /// Comma-separated module names; dependencies are added automatically.
    #[arg(long, value_delimiter = ',')]
    modules: Option<Vec<String>>,
    #[arg(long)]
    decomp_max_pieces: Option<usize>,
    #[arg(long)]
    decomp_tolerance: Option<f64>,
    #[arg(long)]
    decomp_resolution: Option<usize>,
    /// Configurations sampled for distance statistics.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also export GLB meshes.
    #[arg(long)]
    glb: bool,
    /// Fixed creation time (Unix seconds) for byte-reproducible output.
    #[arg(long)]
    epoch: Option<i64>,
    /// Keep the output directory when conversion fails.
    #[arg(long)]
    keep_partial: bool,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// skips_overrides.json to merge into the skip matrices.
    #[arg(long)]
    skip_overrides: Option<PathBuf>,
    /// Asset root for mesh paths; defaults to the URDF's directory, then
    /// URDD_ASSET_ROOT.
    #[arg(long)]
    asset_root: Option<PathBuf>,
}

impl DeriveFlags {
    fn options(&self) -> Result<ConvertOptions, Error> {
        if let Some(n) = self.jobs {
            if n == 0 {
                return Err(Error::InvalidInput("--jobs must be at least 1".into()));
            }
            // Only fails if a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        let modules = self
            .modules
            .as_ref()
            .map(|names| {
                names
                    .iter()
                    .map(|n| {
                        ModuleId::from_name(n.trim()).ok_or_else(|| Error::InvalidInput(format!("unknown module `{n}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let defaults = DecompositionParams::default();
        let decomposition = DecompositionParams {
            max_pieces: self.decomp_max_pieces.unwrap_or(defaults.max_pieces),
            concavity_tolerance: self.decomp_tolerance.unwrap_or(defaults.concavity_tolerance),
            voxel_resolution: self.decomp_resolution.unwrap_or(defaults.voxel_resolution),
        };
        if decomposition.max_pieces == 0 || decomposition.voxel_resolution < 2 {
            return Err(Error::InvalidInput("decomposition needs at least 1 piece and resolution 2".into()));
        }
        if !(decomposition.concavity_tolerance >= 0.0) {
            return Err(Error::InvalidInput("--decomp-tolerance must be non-negative".into()));
        }
        let defaults = SamplingParams::default();
        let sampling = SamplingParams {
            samples: self.samples.unwrap_or(defaults.samples),
            seed: self.seed.unwrap_or(defaults.seed),
        };
        let overrides = match &self.skip_overrides {
            Some(p) => read_overrides(p)?,
            None => Vec::new(),
        };
        Ok(ConvertOptions {
            modules,
            decomposition,
            sampling,
            glb: self.glb,
            epoch: self.epoch,
            keep_partial: self.keep_partial,
            overrides,
            asset_roots: self.asset_root.iter().cloned().collect(),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are input errors; help and version are not errors.
            return if e.use_stderr() {
                ExitCode::from(ErrorClass::Input.exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report_error(e: &Error) {
    eprintln!("error: {e}");
    if let Error::Validation(findings) = e {
        for f in findings {
            eprintln!("  {f}");
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Convert { urdf, out, derive } => {
            let options = derive.options()?;
            let report = convert_file(&urdf, &out, &options)?;
            print_report(&report);
            Ok(ExitCode::SUCCESS)
        }
        Command::Batch { input, out, derive } => batch(&input, &out, &derive.options()?),
        Command::Info { dir, json } => {
            let info = urdd_info(&dir)?;
            if json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&info).expect("info serializes")));
            } else {
                print_info(&info);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Combine {
            parent,
            child,
            attach_link,
            joint,
            parent_prefix,
            child_prefix,
            out,
            derive,
        } => {
            let options = derive.options()?;
            let joint = parse_joint(&joint)?;
            let attachment = Attachment {
                attach_link,
                joint,
                parent_prefix,
                child_prefix,
            };
            let report = combine(&parent, &child, &attachment, &out, &options)?;
            print_report(&report);
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { dir, json } => {
            if !dir.is_dir() {
                return Err(Error::InvalidInput(format!("{} is not a directory", dir.display())));
            }
            let report = validate_urdd(&dir);
            if json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes")));
            } else if report.is_empty() {
                println!("{}: valid", dir.display());
            } else {
                for f in &report.findings {
                    println!("{f}");
                }
            }
            Ok(if report.has_errors() {
                ExitCode::from(ErrorClass::Validation.exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::ApplyOverrides { dir, overrides } => {
            let overrides = read_overrides(&overrides)?;
            apply_overrides(&dir, &overrides)?;
            println!("applied {} override(s) to {}", overrides.len(), dir.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Write to stdout, tolerating a closed pipe (`urdd info --json | head`).
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn parse_joint(arg: &str) -> Result<JointSpec, Error> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read joint file {path}: {e}")))?,
        None => arg.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("invalid joint JSON: {e}")))
}

fn print_report(report: &ConvertReport) {
    for n in report.dependency_notices() {
        eprintln!("{n}");
    }
    print!("{}", report.timing_table());
    println!("wrote {} ({} modules)", report.out.display(), report.modules.len());
}

fn print_info(info: &UrddInfo) {
    let opt = |v: Option<usize>| v.map_or("-".to_string(), |n| n.to_string());
    println!("robot:               {}", info.robot_name);
    println!("format version:      {}", info.urdd_format_version);
    println!("created:             {}", info.created_at);
    println!("dofs:                {}", opt(info.num_dofs));
    println!("links:               {}", opt(info.num_links));
    if let Some(b) = info.source_urdf_bytes {
        println!("source URDF:         {b} bytes");
    }
    println!("size without meshes: {} bytes", info.size_without_meshes);
    println!("size with meshes:    {} bytes", info.size_with_meshes);
    if !info.composed_from.is_empty() {
        println!("composed from:       {}", info.composed_from.join(", "));
    }
    println!("modules:");
    for m in &info.modules {
        println!("  {:<40} {}", m.name, m.version);
    }
}

fn batch(input: &Path, out: &Path, options: &ConvertOptions) -> Result<ExitCode, Error> {
    let start = Instant::now();
    let outcomes = batch_convert(input, out, options)?;
    if outcomes.is_empty() {
        eprintln!("warning: no *.urdf files found under {}", input.display());
        return Ok(ExitCode::SUCCESS);
    }
    let width = outcomes.iter().map(|o| o.urdf.display().to_string().len()).max().unwrap_or(4).max(4);
    println!("{:<width$}  {:<6}  {:>8}  detail", "urdf", "status", "seconds");
    let mut failure: Option<i32> = None;
    for o in &outcomes {
        let name = o.urdf.display().to_string();
        match &o.result {
            Ok(r) => println!(
                "{name:<width$}  {:<6}  {:>8.3}  {}",
                "ok",
                r.total_time().as_secs_f64(),
                o.out.display()
            ),
            Err(e) => {
                failure.get_or_insert(e.exit_code());
                println!("{name:<width$}  {:<6}  {:>8}  {e}", "FAILED", "-");
            }
        }
    }
    let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
    println!(
        "{} converted, {failed} failed, {:.3} s",
        outcomes.len() - failed,
        start.elapsed().as_secs_f64()
    );
    Ok(match failure {
        Some(code) => ExitCode::from(code as u8),
        None => ExitCode::SUCCESS,
    })
}
