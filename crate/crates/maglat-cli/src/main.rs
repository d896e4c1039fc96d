use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maglat::lattice::Sublattice;
use maglat::scenario::{
    self, Analysis, BandPotential, Convention, DriveConfig, EnvironmentConfig, Format, Grid, ImplementationConfig,
    LoadedScenario, MaterialConfig, RunOptions, RunOutcome, SawConfig, ScenarioConfig, WireConfig, SCHEMA_VERSION,
};
use maglat::Error;

#[derive(Parser, Debug)]
#[command(name = "maglat", version, about = "Design calculations for solid-state magnetic traps and lattices")]
struct Cli {
    /// Directory for report.json and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Reject unknown scenario keys; in table1, fail on cells off by more than 8%.
    #[arg(long, global = true)]
    strict: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, env = "MAGLAT_THREADS")]
    threads: Option<usize>,
    /// How bare Hz/GHz are read.
    #[arg(long, global = true, value_enum, default_value_t = FreqArg::Angular)]
    freq_convention: FreqArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FreqArg {
    Angular,
    Cycle,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SubArg {
    Plus,
    Minus,
}

#[derive(Args, Debug, Clone, Default)]
struct MaterialArgs {
    #[arg(long, default_value = "custom")]
    material_name: String,
    /// g-factor.
    #[arg(long, allow_hyphen_values = true)]
    g: Option<f64>,
    /// Effective mass in units of m0.
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    dielectric: Option<f64>,
    #[arg(long)]
    sound_speed: Option<String>,
    #[arg(long)]
    rashba: Option<String>,
    #[arg(long)]
    dresselhaus: Option<String>,
    #[arg(long)]
    phonon_rate: Option<String>,
    #[arg(long)]
    linewidth: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
struct DriveArgs {
    #[arg(long)]
    rabi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long)]
    b0: Option<String>,
    #[arg(long)]
    b1: Option<String>,
    /// Drive frequency, e.g. "22 GHz_f".
    #[arg(long)]
    omega: Option<String>,
    /// Lattice constant, e.g. "900 nm".
    #[arg(long)]
    a: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct WireArgs {
    #[arg(long, default_value_t = 50)]
    n_wires: usize,
    #[arg(long = "wire-a", default_value = "1 um")]
    wire_a: String,
    #[arg(long, default_value = "1 um")]
    d: String,
    #[arg(long, default_value = "70 mA")]
    current: String,
    #[arg(long, default_value = "480 nm")]
    width: String,
    #[arg(long, default_value = "480 nm")]
    height: String,
}

#[derive(Args, Debug, Clone)]
struct FilmArgs {
    #[arg(long, default_value = "25 nm")]
    thickness: String,
    #[arg(long, default_value = "1.8 T")]
    saturation: String,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 2.1)]
    g_film: f64,
    #[arg(long, default_value = "10 T")]
    magnetoelastic: String,
    #[arg(long, default_value_t = 2e-4)]
    strain: f64,
    #[arg(long = "film-sound-speed", default_value = "3500 m/s")]
    film_sound_speed: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Achievable Rabi frequencies per material and field level.
    Table1 {
        /// Wire B1 levels (low high), e.g. "10 mT" "50 mT".
        #[arg(long, num_args = 2)]
        wire: Option<Vec<String>>,
        #[arg(long, num_args = 2)]
        saw: Option<Vec<String>>,
    },
    /// One of inas_electron, inas_heavy_hole, insb_heavy_hole.
    CaseStudy { name: String },
    /// Trap depth, harmonic frequency, loss and requirement chain.
    TrapCheck {
        #[command(flatten)]
        material: MaterialArgs,
        #[command(flatten)]
        drive: DriveArgs,
        #[arg(long, default_value = "10 mK")]
        temperature: String,
    },
    /// Field map of the meandering wire.
    WireField {
        #[command(flatten)]
        wire: WireArgs,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        g: f64,
        /// Depths in units of a.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        x_over_a: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
    /// Rabi amplitudes of the wire drive at depth d.
    Rabi {
        #[command(flatten)]
        wire: WireArgs,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        g: f64,
    },
    /// Stray field of the magnetoelastic film.
    SawStray {
        #[command(flatten)]
        film: FilmArgs,
        #[arg(long, value_delimiter = ',', default_value = "10 GHz_f")]
        frequency: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5")]
        x_over_a: Vec<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Spin-dependent depths of the combined strain and magnetic lattice.
    Hybrid {
        #[command(flatten)]
        material: MaterialArgs,
        #[command(flatten)]
        drive: DriveArgs,
        #[arg(long)]
        v_saw: String,
        #[arg(long)]
        e_s: Option<String>,
    },
    /// Bloch bands of a sin^2 lattice or of the adiabatic potentials.
    Bands {
        #[command(flatten)]
        material: MaterialArgs,
        #[command(flatten)]
        drive: DriveArgs,
        /// Use V0 sin^2 with this depth in E_R instead of the drive.
        #[arg(long)]
        v0_over_er: Option<f64>,
        #[arg(long, value_enum, default_value_t = SubArg::Minus)]
        sublattice: SubArg,
        #[arg(long, default_value_t = 32)]
        n_q: usize,
        #[arg(long, default_value_t = 3)]
        n_bands: usize,
    },
    /// Hubbard parameters of the dressed-spin lattice.
    Hubbard {
        #[command(flatten)]
        material: MaterialArgs,
        #[command(flatten)]
        drive: DriveArgs,
        #[arg(long, default_value_t = 8)]
        n_sites: usize,
        #[arg(long)]
        omega_dr: Option<String>,
        #[arg(long)]
        omega_3: Option<String>,
        #[arg(long)]
        d_scr: Option<String>,
        #[arg(long)]
        u_over_tc: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        z0_over_a: f64,
    },
    /// Stroboscopic error of the Magnus Hamiltonians against full propagation.
    FloquetCompare {
        #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
        delta_over_omega: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.5")]
        rabi_over_omega: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        orders: Vec<u8>,
        #[arg(long, default_value_t = 10)]
        periods: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Stability verdicts of the generalized Mathieu equation on a (q, r) grid.
    StabilityDiagram {
        #[arg(long, default_value_t = 0.0)]
        q_min: f64,
        #[arg(long, default_value_t = 1.2)]
        q_max: f64,
        #[arg(long, default_value_t = 61)]
        nq: usize,
        #[arg(long, default_value_t = 0.0)]
        r_min: f64,
        #[arg(long, default_value_t = 0.6)]
        r_max: f64,
        #[arg(long, default_value_t = 31)]
        nr: usize,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        /// Also write a PBM bitmap (needs --out).
        #[arg(long)]
        pbm: bool,
    },
    /// t_rat sweep over drive strength and Omega0/Delta.
    HoppingSweep {
        #[arg(long, default_value_t = 1.0)]
        n_b_sqrt: f64,
        #[arg(long, default_value_t = 8)]
        n_sites: usize,
    },
    /// Run a scenario file.
    Run { scenario: PathBuf },
}

fn material(m: &MaterialArgs) -> Option<MaterialConfig> {
    let (g, mass) = (m.g?, m.mass?);
    Some(MaterialConfig {
        name: m.material_name.clone(),
        g_factor: g,
        eff_mass: mass,
        sound_speed: m.sound_speed.clone(),
        dielectric_const: m.dielectric,
        rashba: m.rashba.clone(),
        dresselhaus: m.dresselhaus.clone(),
        phonon_rate: m.phonon_rate.clone(),
        linewidth: m.linewidth.clone(),
    })
}

fn drive(d: &DriveArgs) -> Option<DriveConfig> {
    Some(DriveConfig {
        b0: d.b0.clone(),
        b1: d.b1.clone(),
        rabi: d.rabi.clone(),
        delta: d.delta.clone(),
        omega: d.omega.clone()?,
        a: d.a.clone()?,
    })
}

fn wire(w: &WireArgs) -> ImplementationConfig {
    ImplementationConfig::Wire(WireConfig {
        n_wires: w.n_wires,
        a: Some(w.wire_a.clone()),
        d: w.d.clone(),
        current: w.current.clone(),
        cross_section: Some([w.width.clone(), w.height.clone()]),
        omega: None,
    })
}

fn wire_material(g: f64) -> MaterialConfig {
    MaterialConfig {
        name: "wire probe".into(),
        g_factor: g,
        eff_mass: 1.0,
        sound_speed: None,
        dielectric_const: None,
        rashba: None,
        dresselhaus: None,
        phonon_rate: None,
        linewidth: None,
    }
}

fn base(cli: &Cli) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: String::new(),
        frequency_convention: match cli.freq_convention {
            FreqArg::Angular => Convention::Angular,
            FreqArg::Cycle => Convention::Cycle,
        },
        seed: cli.seed,
        material: None,
        drive: None,
        environment: None,
        implementation: ImplementationConfig::Abstract,
        analyses: Vec::new(),
        expectations: Vec::new(),
        output: Default::default(),
    }
}

fn build(cli: &Cli) -> ScenarioConfig {
    let mut s = base(cli);
    let a = match &cli.command {
        Command::Table1 { wire, saw } => Analysis::Table1 {
            wire: wire.as_ref().map(|v| [v[0].clone(), v[1].clone()]),
            saw: saw.as_ref().map(|v| [v[0].clone(), v[1].clone()]),
        },
        Command::CaseStudy { name } => Analysis::CaseStudy { name: name.clone() },
        Command::TrapCheck { material: m, drive: d, temperature } => {
            s.material = material(m);
            s.drive = drive(d);
            s.environment = Some(EnvironmentConfig { temperature: temperature.clone() });
            Analysis::TrapCheck { thresholds: None }
        }
        Command::WireField { wire: w, g, x_over_a, samples } => {
            s.material = Some(wire_material(*g));
            s.implementation = wire(w);
            Analysis::WireField { x_over_a: x_over_a.clone(), samples_per_period: *samples }
        }
        Command::Rabi { wire: w, g } => {
            s.material = Some(wire_material(*g));
            s.implementation = wire(w);
            Analysis::Rabi {}
        }
        Command::SawStray { film, frequency, x_over_a, tol } => {
            s.implementation = ImplementationConfig::Saw(SawConfig {
                thickness: film.thickness.clone(),
                saturation: film.saturation.clone(),
                gilbert_alpha: film.alpha,
                g_film: film.g_film,
                magnetoelastic: film.magnetoelastic.clone(),
                strain: film.strain,
                frequency: frequency[0].clone(),
                sound_speed: film.film_sound_speed.clone(),
            });
            Analysis::SawStray { x_over_a: x_over_a.clone(), frequencies: Some(frequency.clone()), tol: *tol }
        }
        Command::Hybrid { material: m, drive: d, v_saw, e_s } => {
            s.material = material(m);
            s.drive = drive(d);
            Analysis::Hybrid { v_saw: v_saw.clone(), e_s: e_s.clone() }
        }
        Command::Bands { material: m, drive: d, v0_over_er, sublattice, n_q, n_bands } => {
            let potential = match v0_over_er {
                Some(v) => BandPotential::Sin2 { v0_over_er: *v },
                None => {
                    s.material = material(m);
                    s.drive = drive(d);
                    BandPotential::Adiabatic {
                        sublattice: match sublattice {
                            SubArg::Plus => Sublattice::Plus,
                            SubArg::Minus => Sublattice::Minus,
                        },
                    }
                }
            };
            Analysis::Bands { n_q: *n_q, n_bands: *n_bands, potential }
        }
        Command::Hubbard { material: m, drive: d, n_sites, omega_dr, omega_3, d_scr, u_over_tc, z0_over_a } => {
            s.material = material(m);
            s.drive = drive(d);
            Analysis::Hubbard {
                n_sites: *n_sites,
                omega_dr: omega_dr.clone(),
                omega_3: omega_3.clone(),
                d_scr: d_scr.clone(),
                u_over_tc: *u_over_tc,
                z0_over_a: *z0_over_a,
                u_sublattice: Sublattice::Minus,
                disorder: Default::default(),
            }
        }
        Command::FloquetCompare { delta_over_omega, rabi_over_omega, orders, periods, tol } => Analysis::FloquetCompare {
            delta_over_omega: *delta_over_omega,
            rabi_over_omega: rabi_over_omega.clone(),
            orders: orders.clone(),
            n_periods: *periods,
            tol: *tol,
        },
        Command::StabilityDiagram { q_min, q_max, nq, r_min, r_max, nr, eta, pbm } => Analysis::StabilityDiagram {
            q: Grid { min: *q_min, max: *q_max, n: *nq, log: false },
            r: Grid { min: *r_min, max: *r_max, n: *nr, log: false },
            eta: *eta,
            pbm: *pbm,
        },
        Command::HoppingSweep { n_b_sqrt, n_sites } => Analysis::HoppingSweep {
            drive_over_rabi: scenario::default_sweep_drive(),
            rabi_over_delta: scenario::default_sweep_rabi(),
            n_b_sqrt: *n_b_sqrt,
            n_sites: *n_sites,
        },
        Command::Run { .. } => unreachable!("scenario files are loaded, not built"),
    };
    s.name = a.kind().to_string();
    s.analyses.push(a);
    s
}

fn table1_strict(outcome: &RunOutcome) -> Option<Error> {
    let cells = outcome.report.results.get("table1")?.get("cells")?.as_array()?;
    let bad: Vec<String> = cells
        .iter()
        .filter(|c| {
            c["rel_dev"].as_array().is_some_and(|d| d.iter().any(|x| !x.as_f64().is_some_and(|v| v.abs() <= 0.08)))
        })
        .map(|c| format!("{} {}", c["material"].as_str().unwrap_or("?"), c["implementation"].as_str().unwrap_or("?")))
        .collect();
    (!bad.is_empty()).then(|| Error::Mismatch(format!("cells off by more than 8%: {}", bad.join(", "))))
}

fn print_outcome(outcome: &RunOutcome, format: Format) {
    match format {
        Format::Csv => {
            for (i, t) in outcome.tables.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                print!("{}", t.to_csv());
            }
        }
        Format::Json => {
            let v = serde_json::json!({
                "results": outcome.report.results,
                "checks": outcome.report.checks,
                "warnings": outcome.report.warnings,
            });
            println!("{}", serde_json::to_string_pretty(&v).unwrap_or_default());
        }
    }
}

fn run(cli: &Cli) -> Result<RunOutcome, Error> {
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    let opts = RunOptions { strict: cli.strict, out_dir: cli.out.clone(), format: Some(format), seed: cli.seed };
    let mut outcome = match &cli.command {
        Command::Run { scenario: path } => scenario::run_scenario(path, &opts)?,
        _ => scenario::run_config(LoadedScenario { config: build(cli), unknown_keys: Vec::new() }, &opts)?,
    };
    if cli.strict && outcome.mismatch.is_none() {
        if let Command::Table1 { .. } = cli.command {
            outcome.mismatch = table1_strict(&outcome);
        }
    }
    print_outcome(&outcome, format);
    Ok(outcome)
}

fn report_error(cli: &Cli, e: &Error) {
    let v = scenario::error_json(e);
    let text = serde_json::to_string_pretty(&v).unwrap_or_default();
    eprintln!("{text}");
    if let Some(dir) = &cli.out {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{text}\n"));
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size thread pool: {e}");
        }
    }
    let code = match run(&cli) {
        Ok(outcome) => match &outcome.mismatch {
            Some(e) => {
                report_error(&cli, e);
                e.exit_code()
            }
            None => 0,
        },
        Err(e) => {
            report_error(&cli, &e);
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
