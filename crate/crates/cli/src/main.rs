//! riskmap: score layered security postures from catalog/assessment files.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error,
//! 3 computation error. Diagnostics go to stderr; results to stdout or
//! files under --out.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use riskmap_core::{
    analyze_cascades, build_report, emit_csv, emit_json, emit_radar_svg, load_catalog,
    run_monte_carlo_threaded, score_platform, validate_assessment, validate_catalog,
    validate_coupling, whatif, AssessmentReport, CascadeConfig, Catalog, ConfigEcho,
    CouplingInputs, Error, LayerCoverageMode, LayerId, LoadOptions, McConfig, NoiseModel,
    NoiseSpec, PlatformAssessment, ValidationReport, DEFAULT_SEED,
};

#[derive(Parser)]
#[command(
    name = "riskmap",
    version,
    about = "Quantitative security assessment for layered robotic architectures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseModelArg {
    Multiplicative,
    Additive,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoverageModeArg {
    LayerScoreScaled,
    ResidentAttacks,
}

#[derive(Args)]
struct InputArgs {
    /// Catalog file; defaults to the embedded catalog.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Assessment file.
    #[arg(long)]
    assessment: Option<PathBuf>,
    /// Coupling file (S/E/M matrices).
    #[arg(long)]
    coupling: Option<PathBuf>,
    /// Accept continuous gamma/impact/mu values in [0,1] instead of the
    /// discrete level sets.
    #[arg(long)]
    allow_continuous: bool,
}

#[derive(Args)]
struct CascadeArgs {
    /// Per-hop coupling threshold.
    #[arg(long, default_value_t = riskmap_core::cascade::DEFAULT_EPSILON_HOP)]
    epsilon_hop: f64,
    /// Minimum end-to-end path strength.
    #[arg(long, default_value_t = riskmap_core::cascade::DEFAULT_MIN_PROP)]
    min_prop: f64,
    /// How many top cascade records to keep.
    #[arg(long, default_value_t = riskmap_core::cascade::DEFAULT_TOP_K)]
    top_k: usize,
    /// Allow paths whose first and last layer coincide.
    #[arg(long)]
    allow_repeated_endpoints: bool,
    /// How per-layer coverage is derived.
    #[arg(long, value_enum, default_value = "layer-score-scaled")]
    coverage_mode: CoverageModeArg,
}

impl CascadeArgs {
    fn config(&self) -> CascadeConfig {
        CascadeConfig {
            epsilon_hop: self.epsilon_hop,
            min_prop: self.min_prop,
            hops: 2,
            top_k: self.top_k,
            require_distinct_endpoints: !self.allow_repeated_endpoints,
            layer_coverage_mode: match self.coverage_mode {
                CoverageModeArg::LayerScoreScaled => LayerCoverageMode::LayerScoreScaled,
                CoverageModeArg::ResidentAttacks => LayerCoverageMode::ResidentAttacks,
            },
        }
    }
}

#[derive(Args)]
struct McArgs {
    /// Monte Carlo iterations.
    #[arg(long, default_value_t = 1000)]
    iterations: u32,
    /// RNG seed; falls back to RISKMAP_SEED, then a fixed constant.
    #[arg(long)]
    seed: Option<u64>,
    /// Noise half-width as a fraction of each value.
    #[arg(long, default_value_t = 0.25)]
    noise_fraction: f64,
    #[arg(long, value_enum, default_value = "multiplicative")]
    noise_model: NoiseModelArg,
    /// Perturb gamma/mu/attack weights instead of likelihood/impact/gamma/mu.
    #[arg(long)]
    cascade_noise_targets: bool,
    /// Worker threads; results are identical for any value.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl McArgs {
    fn config(&self) -> McConfig {
        let seed = self.seed.or_else(env_seed).unwrap_or(DEFAULT_SEED);
        let mut noise = NoiseSpec {
            fraction: self.noise_fraction,
            ..NoiseSpec::default()
        };
        if self.cascade_noise_targets {
            noise.targets = NoiseSpec::cascade_targets();
        }
        noise.model = match self.noise_model {
            NoiseModelArg::Multiplicative => NoiseModel::Multiplicative,
            NoiseModelArg::Additive => NoiseModel::Additive,
        };
        McConfig {
            iterations: self.iterations,
            seed,
            noise,
        }
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("RISKMAP_SEED").ok()?.parse().ok()
}

#[derive(Subcommand)]
enum Command {
    /// Lint catalog, assessment, and coupling files.
    Validate {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Score one platform: breakdown, aggregate, layer scores.
    Score {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate cascade paths and rank residual risks.
    Cascade {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        cascade: CascadeArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Monte Carlo uncertainty bands for every metric.
    Mc {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        cascade: CascadeArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Full bundle: breakdown, cascades, Monte Carlo, radar, CSV tables.
    Report {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        cascade: CascadeArgs,
        #[command(flatten)]
        mc: McArgs,
        /// Directory for report.json, the CSV tables, and radar.svg.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank single-defense upgrades by aggregate gain.
    Whatif {
        #[command(flatten)]
        inputs: InputArgs,
        /// Proposal as DEFENSE-ID=LEVEL, repeatable.
        #[arg(long = "set", value_name = "ID=LEVEL", required = true)]
        proposals: Vec<String>,
        /// Apply proposals in order instead of independently.
        #[arg(long)]
        cumulative: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) | Error::Io(_) | Error::Validation(_) | Error::Bind(_) => 1,
        Error::UnsupportedConfig(_) => 2,
        Error::Domain(_)
        | Error::LengthMismatch { .. }
        | Error::NoApplicableThreats
        | Error::Schema(_)
        | Error::EmptySample => 3,
    }
}

fn load_inputs(args: &InputArgs) -> Result<(Catalog, Option<PlatformAssessment>, Option<CouplingInputs>), Error> {
    let options = LoadOptions {
        allow_continuous: args.allow_continuous,
    };
    let catalog = match &args.catalog {
        Some(path) => load_catalog(path, options)?,
        None => Catalog::shipped(),
    };
    let assessment = match &args.assessment {
        Some(path) => Some(PlatformAssessment::load(path, options)?),
        None => None,
    };
    let coupling = match &args.coupling {
        Some(path) => Some(CouplingInputs::load(path)?),
        None => None,
    };
    Ok((catalog, assessment, coupling))
}

fn require_assessment(a: Option<PlatformAssessment>) -> Result<PlatformAssessment, Error> {
    a.ok_or_else(|| Error::Bind("--assessment is required for this command".into()))
}

fn require_coupling(c: Option<CouplingInputs>) -> Result<CouplingInputs, Error> {
    c.ok_or_else(|| Error::Bind("--coupling is required for this command".into()))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Error> {
    let v = serde_json::to_value(value).map_err(Error::from)?;
    println!("{}", riskmap_core::canonical::to_canonical_string(&v)?);
    Ok(())
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, bytes)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run_validate(inputs: &InputArgs, format: Format) -> Result<u8, Error> {
    let options = LoadOptions {
        allow_continuous: inputs.allow_continuous,
    };
    let mut combined = ValidationReport::default();
    let catalog = match &inputs.catalog {
        Some(path) => {
            let bytes = std::fs::read(path)?;
            let (catalog, mut report) = riskmap_core::parse_catalog(&bytes)?;
            report.merge(validate_catalog(&catalog, options.mode()));
            combined.merge(report);
            catalog
        }
        None => Catalog::shipped(),
    };
    if let Some(path) = &inputs.assessment {
        let assessment = PlatformAssessment::parse(&std::fs::read(path)?)?;
        combined.merge(validate_assessment(&assessment, options.mode()));
        // Binding problems (id mismatches) are validation findings here.
        if combined.is_valid() {
            if let Err(e) = riskmap_core::bind(&catalog, &assessment) {
                eprintln!("bind check failed: {e}");
                return Ok(1);
            }
        }
    }
    if let Some(path) = &inputs.coupling {
        let coupling = CouplingInputs::parse(&std::fs::read(path)?)?;
        combined.merge(validate_coupling(&coupling));
    }

    match format {
        Format::Json => print_json(&combined)?,
        _ => {
            if combined.is_valid() {
                println!("ok: no violations");
            } else {
                for v in &combined.violations {
                    println!("{:?} at {}: {}", v.code, v.path, v.message);
                }
            }
        }
    }
    Ok(if combined.is_valid() { 0 } else { 1 })
}

fn breakdown_text(report: &AssessmentReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "platform: {}\naggregate: {:.2}%\ncatalog: {}\n\nlayer scores (0-5):\n",
        report.platform, report.breakdown.aggregate_percent, report.catalog_fingerprint
    ));
    for layer in LayerId::ALL {
        out.push_str(&format!(
            "  {:<2}  {:<22} {:.3}\n",
            layer.code(),
            layer.display_name(),
            report.breakdown.layer_scores[&layer]
        ));
    }
    out
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Validate { inputs, format } => run_validate(&inputs, format),
        Command::Score { inputs, format, out } => {
            let (catalog, assessment, _) = load_inputs(&inputs)?;
            let assessment = require_assessment(assessment)?;
            let breakdown = score_platform(&catalog, &assessment)?;
            let config = ConfigEcho {
                allow_continuous: inputs.allow_continuous,
                ..ConfigEcho::default()
            };
            let report = build_report(
                assessment.platform.clone(),
                &catalog,
                breakdown,
                None,
                None,
                config,
            )?;
            match format {
                Format::Json => match &out {
                    Some(dir) => write_file(dir, "report.json", &emit_json(&report)?)?,
                    None => print_json(&report)?,
                },
                Format::Csv => {
                    let tables = emit_csv(&report);
                    match &out {
                        Some(dir) => {
                            for (name, body) in &tables {
                                write_file(dir, name, body.as_bytes())?;
                            }
                        }
                        None => print!("{}", tables["scores.csv"]),
                    }
                }
                Format::Svg => {
                    let svg = emit_radar_svg(&report.breakdown.layer_scores, None)?;
                    match &out {
                        Some(dir) => write_file(dir, "radar.svg", &svg)?,
                        None => std::io::stdout().write_all(&svg)?,
                    }
                }
                Format::Text => print!("{}", breakdown_text(&report)),
            }
            Ok(0)
        }
        Command::Cascade { inputs, cascade, format } => {
            let (catalog, assessment, coupling) = load_inputs(&inputs)?;
            let assessment = require_assessment(assessment)?;
            let coupling = require_coupling(coupling)?;
            let breakdown = score_platform(&catalog, &assessment)?;
            let analysis = analyze_cascades(&catalog, &breakdown, &coupling, &cascade.config())?;
            match format {
                Format::Text => {
                    println!("{} qualifying paths, {} records", analysis.paths.len(), analysis.records);
                    for r in &analysis.top {
                        println!(
                            "{:<14} {:<7} strength={:.4} gap={:.4} crr={:.4} cci={:.4}",
                            r.path.label(),
                            r.attack_id,
                            r.path.strength,
                            r.defense_gap,
                            r.crr,
                            r.cci
                        );
                    }
                }
                _ => print_json(&analysis)?,
            }
            Ok(0)
        }
        Command::Mc { inputs, cascade, mc, format } => {
            let (catalog, assessment, coupling) = load_inputs(&inputs)?;
            let assessment = require_assessment(assessment)?;
            let results = run_monte_carlo_threaded(
                &catalog,
                &assessment,
                coupling.as_ref(),
                &cascade.config(),
                &mc.config(),
                mc.threads,
            )?;
            match format {
                Format::Csv => {
                    print!("{}", riskmap_core::report::MC_CSV_HEADER);
                    println!();
                    for (metric, s) in &results.summaries {
                        println!(
                            "{},{},{},{},{},{}",
                            metric, s.mean, s.std_dev, s.median, s.p5, s.p95
                        );
                    }
                }
                _ => print_json(&results)?,
            }
            Ok(0)
        }
        Command::Report { inputs, cascade, mc, out } => {
            let (catalog, assessment, coupling) = load_inputs(&inputs)?;
            let assessment = require_assessment(assessment)?;
            let cascade_cfg = cascade.config();
            let mc_cfg = mc.config();
            let breakdown = score_platform(&catalog, &assessment)?;
            let analysis = match &coupling {
                Some(c) => Some(analyze_cascades(&catalog, &breakdown, c, &cascade_cfg)?),
                None => None,
            };
            let results = run_monte_carlo_threaded(
                &catalog,
                &assessment,
                coupling.as_ref(),
                &cascade_cfg,
                &mc_cfg,
                mc.threads,
            )?;
            let config = ConfigEcho::materialize(
                inputs.allow_continuous,
                false,
                riskmap_core::cascade::DEFAULT_ALPHA,
                riskmap_core::cascade::DEFAULT_BETA,
                &cascade_cfg,
                &mc_cfg,
            );
            let report = build_report(
                assessment.platform.clone(),
                &catalog,
                breakdown,
                Some(results),
                analysis,
                config,
            )?;
            let json = emit_json(&report)?;
            match out {
                Some(dir) => {
                    write_file(&dir, "report.json", &json)?;
                    for (name, body) in emit_csv(&report) {
                        write_file(&dir, &name, body.as_bytes())?;
                    }
                    let svg = emit_radar_svg(&report.breakdown.layer_scores, None)?;
                    write_file(&dir, "radar.svg", &svg)?;
                }
                None => {
                    std::io::stdout().write_all(&json)?;
                    println!();
                }
            }
            Ok(0)
        }
        Command::Whatif { inputs, proposals, cumulative, format } => {
            let (catalog, assessment, _) = load_inputs(&inputs)?;
            let assessment = require_assessment(assessment)?;
            let mut parsed = Vec::new();
            for raw in &proposals {
                let Some((id, level)) = raw.split_once('=') else {
                    return Err(Error::Bind(format!(
                        "proposal {raw:?} is not of the form DEFENSE-ID=LEVEL"
                    )));
                };
                let level: f64 = level
                    .parse()
                    .map_err(|_| Error::Bind(format!("proposal level in {raw:?} is not a number")))?;
                parsed.push((id.to_string(), level));
            }
            let delta = whatif(
                &catalog,
                &assessment,
                &parsed,
                cumulative,
                inputs.allow_continuous,
            )?;
            match format {
                Format::Text => {
                    println!("baseline: {:.4}%", delta.baseline_percent);
                    for e in &delta.entries {
                        println!(
                            "{:<7} mu={:<5} aggregate={:.4}% gain={:+.4}",
                            e.defense_id, e.proposed_mu, e.new_aggregate, e.gain
                        );
                    }
                }
                _ => print_json(&delta)?,
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
