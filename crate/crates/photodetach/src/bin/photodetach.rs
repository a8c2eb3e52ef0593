//! Command-line front end: single-point evaluation, figure-reproduction
//! sweeps, oracle validation, spectrum synthesis and surface fitting.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error, 3 validation
//! failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use photodetach::fit::{fit_surface, synthesize_spectrum, FitBounds, Spectrum};
use photodetach::model::{DetachmentPoint, IonModel, ScreenGeometry, SurfaceModel};
use photodetach::oracle::{
    run_validation_grid, ValidationCheck, ValidationGrid, ValidationTolerances,
};
use photodetach::sweep::{
    parse_key_values, preset_fig2, preset_fig3, preset_fig4, run_sweep, write_table, Quantity,
    SweepError, SweepSpec, SweepVariable, Table,
};
use photodetach::units::{ev_to_hartree, hartree_to_ev};
use photodetach::ModelError;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const DEFAULT_D_BOHR: f64 = 100.0;
const DEFAULT_L_BOHR: f64 = 1e4;

#[derive(Parser)]
#[command(
    name = "photodetach",
    version,
    about = "H- photodetachment near a partially reflecting wall: cross sections, screen flux, validation, and surface fitting",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate sigma0, sigma1, sigma2, sigma and the modulation A at one energy
    Sigma(SigmaArgs),
    /// Evaluate the modulation function A(u) and its kernel A1(u)
    Modulation(ModulationArgs),
    /// Tabulate the electron flux through a distant screen
    FluxScreen(FluxScreenArgs),
    /// Tabulate cross sections or the modulation along a swept variable
    Sweep(SweepArgs),
    /// Compare every closed form against its quadrature oracle
    Validate(ValidateArgs),
    /// Recover wall parameters (K, mu and optionally d) from a spectrum
    Fit(FitArgs),
    /// Synthesize a cross-section spectrum, optionally with noise
    Synth(SynthArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// Flat `key = value` config file; command-line flags override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SigmaArgs {
    /// Photon energy in eV (exactly one of --eph-ev / --e-au)
    #[arg(long, value_name = "EV")]
    eph_ev: Option<f64>,
    /// Detached-electron energy in hartree (exactly one of --eph-ev / --e-au)
    #[arg(long, value_name = "HARTREE", conflicts_with = "eph_ev")]
    e_au: Option<f64>,
    /// Reflection parameter K in [0, 1]
    #[arg(long, value_name = "K")]
    k: Option<f64>,
    /// Reflection phase index mu (reflection phase mu*pi/2)
    #[arg(long, value_name = "MU")]
    mu: Option<f64>,
    /// Ion-to-wall distance in bohr [default: 100]
    #[arg(long, value_name = "BOHR")]
    d_bohr: Option<f64>,
    /// Binding energy in eV [default: 0.7542]
    #[arg(long, value_name = "EV")]
    eb_ev: Option<f64>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct ModulationArgs {
    /// Round-trip action u = 2 d sqrt(2E), dimensionless
    #[arg(long, value_name = "U")]
    u: Option<f64>,
    /// Reflection parameter K in [0, 1]
    #[arg(long, value_name = "K")]
    k: Option<f64>,
    /// Reflection phase index mu
    #[arg(long, value_name = "MU")]
    mu: Option<f64>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FluxPreset {
    /// K in {1, 0.5, 0.1} x mu in {1, 2}, E_ph = 1 eV, d = 100, L = 1e4 bohr
    Fig4,
}

#[derive(Args)]
struct FluxScreenArgs {
    /// Bundled parameter set; excludes the custom flags
    #[arg(
        long,
        value_enum,
        conflicts_with_all = ["eph_ev", "k", "mu", "d_bohr", "l_bohr", "rho_max", "points", "eb_ev"]
    )]
    preset: Option<FluxPreset>,
    /// Photon energy in eV [default: 1.0]
    #[arg(long, value_name = "EV")]
    eph_ev: Option<f64>,
    /// Reflection parameter K in [0, 1]
    #[arg(long, value_name = "K")]
    k: Option<f64>,
    /// Reflection phase index mu
    #[arg(long, value_name = "MU")]
    mu: Option<f64>,
    /// Ion-to-wall distance in bohr [default: 100]
    #[arg(long, value_name = "BOHR")]
    d_bohr: Option<f64>,
    /// Wall-to-screen distance L in bohr [default: 10000]
    #[arg(long, value_name = "BOHR")]
    l_bohr: Option<f64>,
    /// Largest screen radius tabulated, in bohr [default: 8 L]
    #[arg(long, value_name = "BOHR")]
    rho_max: Option<f64>,
    /// Number of radial samples [default: 2001]
    #[arg(long, value_name = "N")]
    points: Option<usize>,
    /// Binding energy in eV [default: 0.7542]
    #[arg(long, value_name = "EV")]
    eb_ev: Option<f64>,
    /// Output CSV path [default: stdout]
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepPreset {
    /// Modulation A(u), u in [0.5, 60], K in {1, 0.7, 0.4} x mu in {1, 1.5, 2}
    Fig2,
    /// sigma(E_ph) with d = 100 bohr for the same K x mu grid
    Fig3,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepVariableArg {
    /// Round-trip action u (modulation output only)
    U,
    /// Photon energy in eV
    EphEv,
}

#[derive(Args)]
struct SweepArgs {
    /// Bundled parameter set; excludes the custom flags
    #[arg(
        long,
        value_enum,
        conflicts_with_all = ["variable", "start", "stop", "count", "k", "mu", "d_bohr", "eb_ev", "outputs"]
    )]
    preset: Option<SweepPreset>,
    /// Swept variable
    #[arg(long, value_enum)]
    variable: Option<SweepVariableArg>,
    /// First swept value (u is dimensionless, photon energies in eV)
    #[arg(long, value_name = "VALUE")]
    start: Option<f64>,
    /// Last swept value
    #[arg(long, value_name = "VALUE")]
    stop: Option<f64>,
    /// Number of rows [default: 1000]
    #[arg(long, value_name = "N")]
    count: Option<usize>,
    /// Reflection parameter K in [0, 1]
    #[arg(long, value_name = "K")]
    k: Option<f64>,
    /// Reflection phase index mu
    #[arg(long, value_name = "MU")]
    mu: Option<f64>,
    /// Ion-to-wall distance in bohr [default: 100]
    #[arg(long, value_name = "BOHR")]
    d_bohr: Option<f64>,
    /// Binding energy in eV [default: 0.7542]
    #[arg(long, value_name = "EV")]
    eb_ev: Option<f64>,
    /// Comma-separated quantities: A, sigma0, sigma1, sigma2, sigma-total [default: A]
    #[arg(long, value_name = "LIST")]
    outputs: Option<String>,
    /// Output CSV path [default: stdout]
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    /// A handful of representative points
    Small,
    /// The full photon-energy x K x mu x d grid
    Full,
}

#[derive(Args)]
struct ValidateArgs {
    /// Override every per-check tolerance with one relative tolerance
    /// [defaults: sigma1 1e-8, sigma2 1e-10, screen total 1e-8]
    #[arg(long, value_name = "REL")]
    tol: Option<f64>,
    /// Grid size
    #[arg(long, value_enum, default_value = "full")]
    grid: GridArg,
    /// Output CSV path [default: stdout]
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Spectrum CSV (header `E_ph_eV,sigma_au`); '-' reads standard input
    #[arg(long, value_name = "PATH", default_value = "-")]
    input: String,
    /// Hold the wall distance fixed at this many bohr and fit only K, mu
    #[arg(long, value_name = "BOHR", conflicts_with = "fit_d")]
    fixed_d: Option<f64>,
    /// Fit the wall distance along with K and mu
    #[arg(long)]
    fit_d: bool,
    /// Lower K bound [default: 0]
    #[arg(long, value_name = "K")]
    k_min: Option<f64>,
    /// Upper K bound [default: 1]
    #[arg(long, value_name = "K")]
    k_max: Option<f64>,
    /// Lower mu bound [default: 0]
    #[arg(long, value_name = "MU")]
    mu_min: Option<f64>,
    /// Upper mu bound [default: 4]
    #[arg(long, value_name = "MU")]
    mu_max: Option<f64>,
    /// Lower d bound in bohr, used with --fit-d [default: 50]
    #[arg(long, value_name = "BOHR")]
    d_min: Option<f64>,
    /// Upper d bound in bohr, used with --fit-d [default: 1000]
    #[arg(long, value_name = "BOHR")]
    d_max: Option<f64>,
    /// Binding energy in eV [default: 0.7542]
    #[arg(long, value_name = "EV")]
    eb_ev: Option<f64>,
    /// Print the result as a CSV row instead of a key = value block
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct SynthArgs {
    /// Reflection parameter K in [0, 1]
    #[arg(long, value_name = "K")]
    k: Option<f64>,
    /// Reflection phase index mu
    #[arg(long, value_name = "MU")]
    mu: Option<f64>,
    /// Ion-to-wall distance in bohr [default: 100]
    #[arg(long, value_name = "BOHR")]
    d_bohr: Option<f64>,
    /// First photon energy in eV [default: threshold + 0.05]
    #[arg(long, value_name = "EV")]
    start_ev: Option<f64>,
    /// Last photon energy in eV [default: threshold + 1.0]
    #[arg(long, value_name = "EV")]
    stop_ev: Option<f64>,
    /// Number of samples [default: 200]
    #[arg(long, value_name = "N")]
    count: Option<usize>,
    /// Relative width of multiplicative Gaussian noise [default: 0]
    #[arg(long, value_name = "REL")]
    noise: Option<f64>,
    /// Random seed [default: 0]
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Binding energy in eV [default: 0.7542]
    #[arg(long, value_name = "EV")]
    eb_ev: Option<f64>,
    /// Output CSV path [default: stdout]
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

enum CliError {
    Usage(String),
    Domain(String),
    Validation(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
            CliError::Validation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) | CliError::Validation(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Model(m) => CliError::Domain(m.to_string()),
            SweepError::Io { .. } => CliError::Domain(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Values from an optional `key = value` file, consulted when the
/// corresponding flag is absent.
struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self(BTreeMap::new()));
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok(Self(parse_key_values(&text).map_err(|e| CliError::Usage(e.to_string()))?))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.parse(key)
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.parse(key)
    }

    fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.parse(key)
    }

    fn string(&self, key: &str) -> Option<String> {
        self.0.get(key).cloned()
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.0
            .get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
            })
            .transpose()
    }
}

fn require(value: Option<f64>, flag: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required value for --{flag}")))
}

fn reflection_checked(k: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&k) {
        Ok(k)
    } else {
        Err(CliError::Usage(format!("--k must lie in [0, 1], got {k}")))
    }
}

/// `None` keeps the built-in 0.027716-hartree binding energy without an
/// eV round trip.
fn resolve_ion(eb_ev: Option<f64>) -> Result<IonModel, CliError> {
    match eb_ev {
        None => Ok(IonModel::h_minus()),
        Some(ev) if ev > 0.0 => Ok(IonModel::new(
            ev_to_hartree(ev),
            photodetach::model::DEFAULT_NORMALIZATION,
            photodetach::model::DEFAULT_LIGHT_SPEED,
        )?),
        Some(ev) => Err(CliError::Usage(format!("--eb-ev must be positive, got {ev}"))),
    }
}

fn surface_checked(k: f64, mu: f64, d: f64) -> Result<SurfaceModel, CliError> {
    let k = reflection_checked(k)?;
    if !(d > 0.0) {
        return Err(CliError::Usage(format!("--d-bohr must be positive, got {d}")));
    }
    let surface = SurfaceModel::new(k, mu, d)?;
    if let Some(warning) = surface.asymptotic_warning() {
        eprintln!("warning: {warning}");
    }
    Ok(surface)
}

fn emit_table(table: &Table, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => write_table(table, path).map_err(CliError::from),
        None => {
            let stdout = std::io::stdout();
            table
                .write_csv(stdout.lock())
                .map_err(|e| CliError::Domain(format!("stdout: {e}")))
        }
    }
}

fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            if i == count - 1 {
                stop
            } else {
                start + (stop - start) * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}

fn cmd_sigma(args: SigmaArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.config.config.as_deref())?;
    let eph_ev = args.eph_ev.or(config.f64("eph-ev")?);
    let e_au = args.e_au.or(config.f64("e-au")?);
    let k = require(args.k.or(config.f64("k")?), "k")?;
    let mu = require(args.mu.or(config.f64("mu")?), "mu")?;
    let d = args.d_bohr.or(config.f64("d-bohr")?).unwrap_or(DEFAULT_D_BOHR);
    let eb_ev = args.eb_ev.or(config.f64("eb-ev")?);

    let ion = resolve_ion(eb_ev)?;
    let surface = surface_checked(k, mu, d)?;
    let point = match (eph_ev, e_au) {
        (Some(ev), None) => DetachmentPoint::from_photon_energy(&ion, &surface, ev_to_hartree(ev))?,
        (None, Some(e)) => DetachmentPoint::from_electron_energy(&ion, &surface, e)?,
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give exactly one of --eph-ev / --e-au".into()))
        }
        (None, None) => {
            return Err(CliError::Usage("one of --eph-ev / --e-au is required".into()))
        }
    };

    let e = point.electron_energy();
    let row = [
        hartree_to_ev(point.photon_energy()),
        e,
        point.action(),
        photodetach::modulation(point.action(), &surface)?,
        photodetach::sigma0(&ion, e)?,
        photodetach::sigma1(&ion, &surface, e)?,
        photodetach::sigma2(&ion, &surface, e)?,
        photodetach::sigma_total(&ion, &surface, e)?,
    ];
    println!("E_ph_eV,E_au,u,A,sigma0_au,sigma1_au,sigma2_au,sigma_total_au");
    println!("{}", row.iter().map(|v| format!("{v:.11e}")).collect::<Vec<_>>().join(","));
    Ok(())
}

fn cmd_modulation(args: ModulationArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.config.config.as_deref())?;
    let u = require(args.u.or(config.f64("u")?), "u")?;
    let k = reflection_checked(require(args.k.or(config.f64("k")?), "k")?)?;
    let mu = require(args.mu.or(config.f64("mu")?), "mu")?;
    if !(u >= 0.0) {
        return Err(CliError::Usage(format!("--u must be nonnegative, got {u}")));
    }
    let a1 = photodetach::a1(u, mu)?;
    println!("u,A1,A");
    println!("{u:.11e},{a1:.11e},{:.11e}", 1.0 - 3.0 * k * a1);
    Ok(())
}

fn cmd_flux_screen(args: FluxScreenArgs) -> Result<(), CliError> {
    if let Some(FluxPreset::Fig4) = args.preset {
        let table = preset_fig4()?;
        return emit_table(&table, args.output.as_deref());
    }
    let config = FileConfig::load(args.config.config.as_deref())?;
    let eph_ev = args.eph_ev.or(config.f64("eph-ev")?).unwrap_or(1.0);
    let k = require(args.k.or(config.f64("k")?), "k")?;
    let mu = require(args.mu.or(config.f64("mu")?), "mu")?;
    let d = args.d_bohr.or(config.f64("d-bohr")?).unwrap_or(DEFAULT_D_BOHR);
    let l = args.l_bohr.or(config.f64("l-bohr")?).unwrap_or(DEFAULT_L_BOHR);
    let rho_max = args.rho_max.or(config.f64("rho-max")?).unwrap_or(8.0 * l);
    let points = args.points.or(config.usize("points")?).unwrap_or(2001);
    let eb_ev = args.eb_ev.or(config.f64("eb-ev")?);

    let ion = resolve_ion(eb_ev)?;
    let surface = surface_checked(k, mu, d)?;
    if !(l > 0.0) {
        return Err(CliError::Usage(format!("--l-bohr must be positive, got {l}")));
    }
    let geometry = ScreenGeometry::new(l, rho_max, points).map_err(|e| CliError::Usage(e.to_string()))?;
    let spec = SweepSpec {
        variable: SweepVariable::RhoBohr,
        start: 0.0,
        stop: rho_max,
        count: points,
        ion,
        surface,
        geometry: Some(geometry),
        photon_energy_ev: Some(eph_ev),
        outputs: vec![Quantity::ScreenFlux],
    };
    let table = run_sweep(&spec)?;
    emit_table(&table, args.output.as_deref())
}

fn parse_outputs(raw: &str) -> Result<Vec<Quantity>, CliError> {
    raw.split(',')
        .map(|token| match token.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Quantity::Modulation),
            "sigma0" => Ok(Quantity::Sigma0),
            "sigma1" => Ok(Quantity::Sigma1),
            "sigma2" => Ok(Quantity::Sigma2),
            "sigma-total" | "sigma_total" => Ok(Quantity::SigmaTotal),
            other => Err(CliError::Usage(format!(
                "unknown output quantity '{other}' (expected A, sigma0, sigma1, sigma2, sigma-total)"
            ))),
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    match args.preset {
        Some(SweepPreset::Fig2) => {
            let table = preset_fig2()?;
            return emit_table(&table, args.output.as_deref());
        }
        Some(SweepPreset::Fig3) => {
            let table = preset_fig3()?;
            return emit_table(&table, args.output.as_deref());
        }
        None => {}
    }
    let config = FileConfig::load(args.config.config.as_deref())?;
    let variable = match args.variable {
        Some(SweepVariableArg::U) => SweepVariable::Action,
        Some(SweepVariableArg::EphEv) => SweepVariable::PhotonEnergyEv,
        None => match config.string("variable").as_deref() {
            Some("u") => SweepVariable::Action,
            Some("eph-ev") => SweepVariable::PhotonEnergyEv,
            Some(other) => {
                return Err(CliError::Usage(format!(
                    "config key 'variable': expected 'u' or 'eph-ev', got '{other}'"
                )))
            }
            None => return Err(CliError::Usage("missing required value for --variable".into())),
        },
    };
    let start = require(args.start.or(config.f64("start")?), "start")?;
    let stop = require(args.stop.or(config.f64("stop")?), "stop")?;
    let count = args.count.or(config.usize("count")?).unwrap_or(1000);
    let k = require(args.k.or(config.f64("k")?), "k")?;
    let mu = require(args.mu.or(config.f64("mu")?), "mu")?;
    let d = args.d_bohr.or(config.f64("d-bohr")?).unwrap_or(DEFAULT_D_BOHR);
    let eb_ev = args.eb_ev.or(config.f64("eb-ev")?);
    let outputs_raw = args.outputs.or(config.string("outputs")).unwrap_or_else(|| "A".to_string());

    let spec = SweepSpec {
        variable,
        start,
        stop,
        count,
        ion: resolve_ion(eb_ev)?,
        surface: surface_checked(k, mu, d)?,
        geometry: None,
        photon_energy_ev: None,
        outputs: parse_outputs(&outputs_raw)?,
    };
    let table = run_sweep(&spec)?;
    emit_table(&table, args.output.as_deref())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let tolerances = match args.tol {
        Some(tol) if tol > 0.0 => ValidationTolerances::uniform(tol),
        Some(tol) => return Err(CliError::Usage(format!("--tol must be positive, got {tol}"))),
        None => ValidationTolerances::default(),
    };
    let grid = match args.grid {
        GridArg::Small => ValidationGrid::Small,
        GridArg::Full => ValidationGrid::Full,
    };
    let rows = run_validation_grid(&IonModel::h_minus(), grid, &tolerances)
        .map_err(|e| CliError::Domain(e.to_string()))?;

    let mut report = String::new();
    report.push_str(ValidationCheck::csv_header());
    report.push('\n');
    for row in &rows {
        report.push_str(&row.to_csv_row());
        report.push('\n');
    }
    match args.output.as_deref() {
        Some(path) => std::fs::write(path, &report)
            .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?,
        None => print!("{report}"),
    }

    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} of {} oracle checks passed", rows.len() - failed, rows.len());
    if failed > 0 {
        return Err(CliError::Validation(format!(
            "{failed} oracle check(s) disagree beyond tolerance"
        )));
    }
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.config.config.as_deref())?;
    let eb_ev = args.eb_ev.or(config.f64("eb-ev")?);
    let ion = resolve_ion(eb_ev)?;

    let spectrum = if args.input == "-" {
        let stdin = std::io::stdin();
        Spectrum::read_csv(stdin.lock(), ion)
    } else {
        let file = std::fs::File::open(&args.input)
            .map_err(|e| CliError::Domain(format!("{}: {e}", args.input)))?;
        Spectrum::read_csv(std::io::BufReader::new(file), ion)
    }
    .map_err(|e| CliError::Domain(e.to_string()))?;

    let fixed_d = match (args.fixed_d.or(config.f64("fixed-d")?), args.fit_d) {
        (Some(d), false) => Some(d),
        (None, true) => None,
        (None, false) => return Err(CliError::Usage("give --fixed-d <BOHR> or --fit-d".into())),
        (Some(_), true) => return Err(CliError::Usage("--fixed-d conflicts with --fit-d".into())),
    };

    let defaults = FitBounds::default();
    let bounds = FitBounds {
        reflection: (
            args.k_min.or(config.f64("k-min")?).unwrap_or(defaults.reflection.0),
            args.k_max.or(config.f64("k-max")?).unwrap_or(defaults.reflection.1),
        ),
        phase_index: (
            args.mu_min.or(config.f64("mu-min")?).unwrap_or(defaults.phase_index.0),
            args.mu_max.or(config.f64("mu-max")?).unwrap_or(defaults.phase_index.1),
        ),
        wall_distance: (
            args.d_min.or(config.f64("d-min")?).unwrap_or(defaults.wall_distance.0),
            args.d_max.or(config.f64("d-max")?).unwrap_or(defaults.wall_distance.1),
        ),
    };

    let result = fit_surface(&spectrum, fixed_d, &bounds).map_err(|e| match e {
        photodetach::fit::FitError::InvalidBounds(_)
        | photodetach::fit::FitError::NonPositiveFixedDistance(_) => CliError::Usage(e.to_string()),
        other => CliError::Domain(other.to_string()),
    })?;

    if args.csv {
        println!("{}", photodetach::fit::FitResult::csv_header());
        println!("{}", result.to_csv_row());
    } else {
        print!("{}", result.to_key_value_block());
    }
    if result.degenerate {
        eprintln!("note: fitted K is consistent with 0; mu and d are unidentifiable");
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.config.config.as_deref())?;
    let k = require(args.k.or(config.f64("k")?), "k")?;
    let mu = require(args.mu.or(config.f64("mu")?), "mu")?;
    let d = args.d_bohr.or(config.f64("d-bohr")?).unwrap_or(DEFAULT_D_BOHR);
    let eb_ev = args.eb_ev.or(config.f64("eb-ev")?);
    let ion = resolve_ion(eb_ev)?;
    let threshold_ev = hartree_to_ev(ion.binding_energy());
    let start_ev = args.start_ev.or(config.f64("start-ev")?).unwrap_or(threshold_ev + 0.05);
    let stop_ev = args.stop_ev.or(config.f64("stop-ev")?).unwrap_or(threshold_ev + 1.0);
    let count = args.count.or(config.usize("count")?).unwrap_or(200);
    let noise = args.noise.or(config.f64("noise")?).unwrap_or(0.0);
    let seed = args.seed.or(config.u64("seed")?).unwrap_or(0);

    if !(start_ev < stop_ev) {
        return Err(CliError::Usage(format!(
            "--start-ev {start_ev} must be below --stop-ev {stop_ev}"
        )));
    }
    if count < 8 {
        return Err(CliError::Usage(format!(
            "--count must be at least 8 for a fittable spectrum, got {count}"
        )));
    }
    if !(noise >= 0.0) {
        return Err(CliError::Usage(format!("--noise must be nonnegative, got {noise}")));
    }
    let surface = surface_checked(k, mu, d)?;
    let grid = linspace(start_ev, stop_ev, count);
    let spectrum = synthesize_spectrum(&ion, &surface, &grid, noise, seed)
        .map_err(|e| CliError::Domain(e.to_string()))?;

    match args.output.as_deref() {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
            let mut writer = std::io::BufWriter::new(file);
            spectrum
                .write_csv(&mut writer)
                .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
            writer
                .flush()
                .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
        }
        None => {
            let stdout = std::io::stdout();
            spectrum
                .write_csv(stdout.lock())
                .map_err(|e| CliError::Domain(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sigma(args) => cmd_sigma(args),
        Command::Modulation(args) => cmd_modulation(args),
        Command::FluxScreen(args) => cmd_flux_screen(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
