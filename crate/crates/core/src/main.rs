//! Command-line front end: one subcommand per simulated experiment,
//! emitting plot-ready CSV/JSON.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use beamsplit::analysis::{
    find_switch_point, find_switch_point_with, loss_curve, mip_mfp_contours, vortex_selection,
    SwitchPointRule,
};
use beamsplit::io::{
    emit_loss_curve_json, emit_materials_json, emit_switch_point_json, emit_trace_csv,
    emit_trace_json, parse_materials, parse_scenario, OutputFormat, BUILTIN_MATERIALS_CSV,
};
use beamsplit::optics::{ApertureSpec, GratingSpec};
use beamsplit::resonator::{propagate, ScenarioConfig};
use beamsplit::{Error, Result};

#[derive(Parser)]
#[command(
    name = "beamsplit",
    version,
    about = "Scattering-matrix simulation of a resonator-based two-port beam splitter"
)]
struct Cli {
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format (trace commands default to csv, summaries to json).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Suppress informational messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Two-beam crystal intensity trace (direct and diffracted beams per pass).
    TwoBeam {
        /// Crystal thickness as a fraction of the extinction distance, in [0, 0.5].
        #[arg(long = "t-over-xi")]
        t_over_xi: f64,
        /// Number of passes through the crystal.
        #[arg(long, default_value_t = 100)]
        passes: usize,
    },

    /// Multi-beam sinusoidal-grating trace, with or without the blocking aperture.
    Grating {
        /// Grating phase amplitude in units of pi.
        #[arg(long = "a-over-pi")]
        a_over_pi: f64,
        /// Truncation half-width M (matrix dimension 2M+1).
        #[arg(long, default_value_t = 100)]
        m: usize,
        /// Number of passes through the grating.
        #[arg(long, default_value_t = 300)]
        passes: usize,
        /// Comma-separated diffraction orders passed by the aperture.
        #[arg(long, value_delimiter = ',', default_value = "0,1", allow_hyphen_values = true)]
        aperture: Vec<i32>,
        /// Remove the aperture entirely (all orders propagate freely).
        #[arg(long)]
        no_aperture: bool,
        /// Comma-separated diffraction orders to record.
        #[arg(long, value_delimiter = ',', default_value = "0,1", allow_hyphen_values = true)]
        tracked: Vec<i32>,
    },

    /// Locate the switch point for a sinusoidal grating and report the port intensities there.
    SwitchPoint {
        /// Grating phase amplitude in units of pi.
        #[arg(long = "a-over-pi")]
        a_over_pi: f64,
        #[arg(long, default_value_t = 100)]
        m: usize,
        /// Pass budget for the search.
        #[arg(long = "n-max", default_value_t = 1000)]
        n_max: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1", allow_hyphen_values = true)]
        aperture: Vec<i32>,
    },

    /// Loss at the switch point for a sweep of grating amplitudes.
    LossCurve {
        /// Comma-separated phase amplitudes in units of pi, any order.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.04,0.03,0.02,0.015,0.0125,0.01,0.0087,0.00785,0.006,0.005"
        )]
        amplitudes: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        m: usize,
    },

    /// Switch-point efficiency including inelastic scattering in the grating.
    Inelastic {
        /// Material preset (carbon, gold) or "custom".
        #[arg(long)]
        material: String,
        /// Grating phase amplitude in units of pi (overrides the preset).
        #[arg(long = "a-over-pi")]
        a_over_pi: Option<f64>,
        /// Grating thickness in nanometers (overrides the preset).
        #[arg(long = "thickness-nm")]
        thickness_nm: Option<f64>,
        /// Inelastic mean free path in nanometers (overrides the preset).
        #[arg(long = "mfp-nm")]
        mfp_nm: Option<f64>,
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long = "n-max", default_value_t = 1000)]
        n_max: usize,
        /// Locate the switch point on the attenuated trace instead of the
        /// loss-free one.
        #[arg(long = "switch-on-attenuated")]
        switch_on_attenuated: bool,
    },

    /// Material survey with constant MIP-MFP-product contours.
    Materials {
        /// Comma-separated contour products in nm*V.
        #[arg(long, value_delimiter = ',', default_value = "1200,1600,2000")]
        contours: Vec<f64>,
        /// Material dataset CSV (defaults to the bundled survey).
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Lower end of the sampled MIP range, in volts.
        #[arg(long = "v-min", default_value_t = 5.0)]
        v_min: f64,
        /// Upper end of the sampled MIP range, in volts.
        #[arg(long = "v-max", default_value_t = 30.0)]
        v_max: f64,
        /// Samples per contour.
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },

    /// Vortex-order selection through a fork hologram with aperture {0, charge}.
    Vortex {
        /// Topological charge / diffraction order to select.
        #[arg(long, allow_hyphen_values = true)]
        charge: i32,
        /// Hologram phase amplitude in units of pi.
        #[arg(long = "a-over-pi", default_value_t = 0.2)]
        a_over_pi: f64,
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long = "n-max", default_value_t = 1000)]
        n_max: usize,
    },

    /// Execute a scenario file.
    Run {
        /// Path to a TOML scenario document.
        #[arg(long)]
        config: PathBuf,
    },
}

/// What a subcommand produced, before formatting.
enum Payload {
    Trace(beamsplit::IntensityTrace64),
    Text(String),
}

fn preset(material: &str) -> Result<Option<(f64, f64, f64)>> {
    match material {
        "carbon" => Ok(Some((0.02, 1.0, 160.0))),
        "gold" => Ok(Some((0.058, 1.0, 84.0))),
        "custom" => Ok(None),
        other => Err(Error::InvalidArgument(format!(
            "unknown material \"{other}\" (expected carbon, gold, or custom)"
        ))),
    }
}

fn execute(command: &Command) -> Result<(Payload, OutputFormat)> {
    use std::f64::consts::PI;
    match command {
        Command::TwoBeam { t_over_xi, passes } => {
            let config = ScenarioConfig::new(GratingSpec::crystal_two_beam(*t_over_xi), *passes);
            Ok((Payload::Trace(propagate(&config)?), OutputFormat::Csv))
        }

        Command::Grating {
            a_over_pi,
            m,
            passes,
            aperture,
            no_aperture,
            tracked,
        } => {
            let mut config = ScenarioConfig::new(GratingSpec::sinusoidal(a_over_pi * PI), *passes)
                .with_truncation(*m)
                .with_tracked_orders(tracked.clone());
            if !no_aperture {
                config = config.with_aperture(ApertureSpec::new(aperture.iter().copied())?);
            }
            Ok((Payload::Trace(propagate(&config)?), OutputFormat::Csv))
        }

        Command::SwitchPoint {
            a_over_pi,
            m,
            n_max,
            aperture,
        } => {
            let spec = ApertureSpec::new(aperture.iter().copied())?;
            let tracked: Vec<i32> = spec.passed_orders().collect();
            let config = ScenarioConfig::new(GratingSpec::sinusoidal(a_over_pi * PI), *n_max)
                .with_truncation(*m)
                .with_aperture(spec)
                .with_tracked_orders(tracked);
            let result = find_switch_point(&config)?;
            Ok((
                Payload::Text(emit_switch_point_json(&result)),
                OutputFormat::Json,
            ))
        }

        Command::LossCurve { amplitudes, m } => {
            let radians: Vec<f64> = amplitudes.iter().map(|a| a * PI).collect();
            let curve = loss_curve(&radians, &ApertureSpec::direct_and_first(), *m)?;
            Ok((
                Payload::Text(emit_loss_curve_json(&curve)),
                OutputFormat::Json,
            ))
        }

        Command::Inelastic {
            material,
            a_over_pi,
            thickness_nm,
            mfp_nm,
            m,
            n_max,
            switch_on_attenuated,
        } => {
            let defaults = preset(material)?;
            let pick = |explicit: Option<f64>, slot: usize, flag: &str| -> Result<f64> {
                explicit
                    .or_else(|| defaults.map(|d| [d.0, d.1, d.2][slot]))
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("--material custom requires --{flag}"))
                    })
            };
            let a = pick(*a_over_pi, 0, "a-over-pi")? * PI;
            let thickness = pick(*thickness_nm, 1, "thickness-nm")?;
            let mfp = pick(*mfp_nm, 2, "mfp-nm")?;
            let grating = GratingSpec::sinusoidal(a)
                .with_thickness_nm(thickness)
                .with_mfp_nm(mfp);
            let config = ScenarioConfig::new(grating, *n_max)
                .with_truncation(*m)
                .with_aperture(ApertureSpec::direct_and_first())
                .with_attenuation(true);
            let rule = if *switch_on_attenuated {
                SwitchPointRule::AttenuatedTrace
            } else {
                SwitchPointRule::UnitaryTrace
            };
            let result = find_switch_point_with(&config, rule)?;
            Ok((
                Payload::Text(emit_switch_point_json(&result)),
                OutputFormat::Json,
            ))
        }

        Command::Materials {
            contours,
            dataset,
            v_min,
            v_max,
            samples,
        } => {
            let text = match dataset {
                Some(path) => fs::read_to_string(path)?,
                None => BUILTIN_MATERIALS_CSV.to_string(),
            };
            let materials = parse_materials(&text)?;
            let contours = mip_mfp_contours(contours, (*v_min, *v_max), *samples)?;
            Ok((
                Payload::Text(emit_materials_json(&materials, &contours)),
                OutputFormat::Json,
            ))
        }

        Command::Vortex {
            charge,
            a_over_pi,
            m,
            n_max,
        } => {
            let result = vortex_selection(a_over_pi * PI, *charge, *m, *n_max)?;
            Ok((
                Payload::Text(emit_switch_point_json(&result)),
                OutputFormat::Json,
            ))
        }

        Command::Run { config } => {
            let document = fs::read_to_string(config)?;
            let (scenario, output) = parse_scenario(&document)?;
            let trace = propagate(&scenario)?;
            let format = output
                .as_ref()
                .and_then(|o| o.format)
                .unwrap_or(OutputFormat::Csv);
            // The scenario's own output path applies unless --out overrides.
            if let Some(path) = output.and_then(|o| o.path) {
                let rendered = render_trace(&trace, format);
                fs::write(&path, rendered)?;
            }
            Ok((Payload::Trace(trace), format))
        }
    }
}

fn render_trace(trace: &beamsplit::IntensityTrace64, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => emit_trace_csv(trace),
        OutputFormat::Json => emit_trace_json(trace),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let (payload, default_format) = execute(&cli.command)?;
    let format = match cli.format {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Json) => OutputFormat::Json,
        None => default_format,
    };
    let rendered = match &payload {
        Payload::Trace(trace) => render_trace(trace, format),
        Payload::Text(text) => {
            if format == OutputFormat::Csv {
                return Err(Error::InvalidArgument(
                    "csv output is only available for trace commands; use --format json".into(),
                ));
            }
            text.clone()
        }
    };
    match &cli.out {
        Some(path) => {
            fs::write(path, rendered)?;
            if !cli.quiet {
                eprintln!("wrote {}", path.display());
            }
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn exit_class(error: &Error) -> u8 {
    match error {
        Error::InvalidArgument(_)
        | Error::DimensionMismatch { .. }
        | Error::Scenario(_)
        | Error::Dataset(_) => 3,
        Error::NoSwitchPoint { .. } | Error::Io(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with code 2 on usage errors
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}
