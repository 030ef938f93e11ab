//! Command-line front end.
//!
//! [`run`] parses the arguments, writes results to `out` and diagnostics to
//! `err`, and returns the process exit code: 0 on success, 2 on a usage
//! error, 1 when a computation fails.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cp;
use crate::dataio::{self, ParticleDataset};
use crate::estimation::{self, FitConfig, FitParam, FitValues};
use crate::model::{self, FormFactor};
use crate::montecarlo;
use crate::temporal::{self, InterferenceCoefficient, ModelKind, Sector};
use crate::{Complex64, Error};

#[derive(Parser, Debug)]
#[command(
    name = "friedrichs",
    version,
    about = "CP violation in neutral-meson decay from the two-level Friedrichs model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print ε, ε^th, q/p and A_SL
    Epsilon(Source),
    /// Print the effective Hamiltonian and its eigenvalues
    Hamiltonian(HamiltonianArgs),
    /// Test the CPT conditions for the coupling phases
    CptCheck(CptArgs),
    /// Write the standard or renormalized decay intensity as CSV
    Intensity(IntensityArgs),
    /// Write a CP-sector decay density as CSV
    Density(DensityArgs),
    /// Integrate the discrete-sector amplitudes and write them as CSV
    Evolve(EvolveArgs),
    /// Draw decay events and write them as CSV
    Sample(SampleArgs),
    /// Fit the interference intensity to events or a series
    Fit(FitArgs),
    /// List the built-in datasets
    Datasets,
}

#[derive(Args, Debug, Clone)]
struct Source {
    /// Built-in dataset: kaon, Bs or D
    #[arg(long, default_value = "kaon", conflicts_with = "params")]
    dataset: String,
    /// Parameter file to use instead of a built-in dataset
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Phase of the short-lived coupling, radians [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    theta_s: Option<f64>,
    /// Phase of the long-lived coupling, radians [default: π/2]
    #[arg(long, allow_hyphen_values = true)]
    theta_l: Option<f64>,
}

#[derive(Args, Debug)]
struct HamiltonianArgs {
    #[command(flatten)]
    source: Source,
    /// Basis of the printed matrix
    #[arg(long, value_enum, default_value_t = BasisArg::K1k2)]
    basis: BasisArg,
}

#[derive(Args, Debug)]
struct CptArgs {
    #[command(flatten)]
    source: Source,
    /// Largest accepted relative residual
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    K1k2,
    K0,
}

#[derive(Args, Debug)]
struct Grid {
    /// Start of the time grid, in the dataset's time unit
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    /// End of the time grid [default: 20 τ_S]
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid points
    #[arg(long, default_value_t = 2000)]
    points: usize,
    /// Output file [default: standard output]
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum IntensityModel {
    Standard,
    Renormalized,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Coefficient {
    Exact,
    Displayed,
}

#[derive(Args, Debug)]
struct IntensityArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    grid: Grid,
    /// Intensity model
    #[arg(long, value_enum, default_value_t = IntensityModel::Standard)]
    model: IntensityModel,
    /// Intensity at t = 0
    #[arg(long, default_value_t = 1.0)]
    i0: f64,
    /// Interference coefficient of the standard model: 2|ε| or |ε|
    #[arg(long, value_enum, default_value_t = Coefficient::Exact)]
    coefficient: Coefficient,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    grid: Grid,
    /// CP sector: plus (+1) or minus (-1)
    #[arg(long, default_value = "plus", value_parser = parse_sector, allow_hyphen_values = true)]
    sector: Sector,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormFactorArg {
    Flat,
    Lorentzian,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum InitialState {
    K1,
    K2,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    source: Source,
    /// Start of the time grid, in the dataset's time unit (must be 0)
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    /// End of the time grid [default: 5 τ_S]
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid points
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Output file [default: standard output]
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Form factor of the couplings
    #[arg(long, value_enum, default_value_t = FormFactorArg::Flat)]
    form_factor: FormFactorArg,
    /// Lorentzian cut-off in units of Γ_S
    #[arg(long, default_value_t = 1000.0)]
    cutoff: f64,
    /// Initial discrete state
    #[arg(long, value_enum, default_value_t = InitialState::K1)]
    initial: InitialState,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    source: Source,
    /// Number of events
    #[arg(long, short = 'n', default_value_t = 100_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    events: u64,
    /// Seed of the random stream
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file [default: standard output]
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    source: Source,
    /// Event CSV (t,sector) or series CSV (t,value,stderr)
    #[arg(long, short)]
    input: PathBuf,
    /// Histogram bins for event input
    #[arg(long, default_value_t = 400)]
    bins: usize,
    /// Upper histogram edge for event input [default: 20 τ_S]
    #[arg(long)]
    t_max: Option<f64>,
    /// CP sector histogrammed from event input
    #[arg(long, default_value = "plus", value_parser = parse_sector, allow_hyphen_values = true)]
    sector: Sector,
    /// Free parameters
    #[arg(long, value_delimiter = ',', value_parser = parse_fit_param,
          default_value = "delta_m,eps_mod,eps_arg,scale")]
    free: Vec<FitParam>,
    /// Extra starting values of Δm, as multiples of the dataset value
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1.25,1.5,2")]
    dm_starts: Vec<f64>,
    /// Largest number of iterations per start
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    /// Output file for the report [default: standard output]
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_sector(s: &str) -> Result<Sector, String> {
    match s {
        "plus" | "+1" | "1" => Ok(Sector::Plus),
        "minus" | "-1" => Ok(Sector::Minus),
        _ => Err(format!("'{s}' is not a sector (plus, minus, +1, -1)")),
    }
}

fn parse_fit_param(s: &str) -> Result<FitParam, String> {
    FitParam::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = FitParam::ALL.iter().map(|p| p.name()).collect();
        format!("'{s}' is not a fit parameter ({})", names.join(", "))
    })
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(Error::Io(e))
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Runs one command; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(err, "{}", e.render());
                    2
                }
                _ => {
                    let text = e.to_string();
                    let first = text.lines().next().unwrap_or("error: invalid arguments");
                    let _ = writeln!(err, "{first}");
                    2
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Compute(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Epsilon(src) => epsilon(&src, out),
        Command::Hamiltonian(a) => hamiltonian(&a, out),
        Command::CptCheck(a) => cpt(&a, out),
        Command::Intensity(a) => intensity(&a, out),
        Command::Density(a) => density(&a, out),
        Command::Evolve(a) => evolve(&a, out),
        Command::Sample(a) => sample(&a, out),
        Command::Fit(a) => fit(&a, out),
        Command::Datasets => datasets(out),
    }
}

fn load(src: &Source) -> Result<ParticleDataset, Failure> {
    let dataset = match &src.params {
        Some(path) => dataio::load_params(path)?,
        None => dataio::builtin_dataset(&src.dataset).map_err(|e| usage(e.to_string()))?,
    };
    for (name, v) in [("--theta-s", src.theta_s), ("--theta-l", src.theta_l)] {
        if v.is_some_and(|x| !x.is_finite()) {
            return Err(usage(format!("{name} must be finite")));
        }
    }
    Ok(dataset)
}

fn phases(src: &Source) -> (f64, f64) {
    (src.theta_s.unwrap_or(0.0), src.theta_l.unwrap_or(FRAC_PI_2))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn time_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>, Failure> {
    if !(t_min.is_finite() && t_max.is_finite()) {
        return Err(usage("time range must be finite"));
    }
    if t_min < 0.0 {
        return Err(usage("--t-min must be non-negative"));
    }
    if !(t_max > t_min) {
        return Err(usage("--t-max must exceed --t-min"));
    }
    if points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    Ok(temporal::linear_grid(t_min, t_max, points))
}

fn epsilon(src: &Source, out: &mut dyn Write) -> Result<(), Failure> {
    let d = load(src)?;
    let eps = cp::epsilon_bare(&d.params)?;
    let th = cp::epsilon_renormalized(&d.params)?;
    let qp = cp::q_over_p(&th)?;
    let mut s = String::new();
    let _ = writeln!(s, "dataset = {}", d.name);
    let _ = writeln!(s, "eps_mod = {}", eps.modulus());
    let _ = writeln!(s, "eps_arg_deg = {}", eps.arg_deg());
    let _ = writeln!(s, "eps_th_mod = {}", th.modulus());
    let _ = writeln!(s, "eps_th_arg_deg = {}", th.arg_deg());
    let _ = writeln!(s, "eps_th_re = {}", th.value.re);
    let _ = writeln!(s, "eps_th_im = {}", th.value.im);
    let _ = writeln!(s, "qp_mod = {}", qp.modulus);
    let _ = writeln!(s, "qp_phase_deg = {}", qp.phase_deg);
    let _ = writeln!(s, "a_sl = {}", cp::asymmetry_sl(&th));
    if th.out_of_range {
        let _ = writeln!(s, "warning = |eps_th| outside the small-violation regime");
    }
    emit(out, None, &s)
}

fn format_complex(z: Complex64) -> String {
    format!("{} {}", z.re, z.im)
}

fn hamiltonian(a: &HamiltonianArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let d = load(&a.source)?;
    let (ts, tl) = phases(&a.source);
    let c = model::couplings_from_params(&d.params, ts, tl)?;
    let h = model::build_effective_hamiltonian(&c);
    let shown = match a.basis {
        BasisArg::K1k2 => h,
        BasisArg::K0 => model::to_k0_basis(&h)?,
    };
    let pairs = model::eigensystem(&h)?;
    let mut s = String::new();
    let _ = writeln!(s, "dataset = {}", d.name);
    let _ = writeln!(s, "basis = {}", shown.basis().name());
    for i in 0..2 {
        for j in 0..2 {
            let _ = writeln!(s, "h{}{} = {}", i + 1, j + 1, format_complex(shown.get(i, j)));
        }
    }
    let _ = writeln!(s, "eigenvalue_plus = {}", format_complex(pairs[0].eigenvalue));
    let _ = writeln!(s, "eigenvalue_minus = {}", format_complex(pairs[1].eigenvalue));
    emit(out, None, &s)
}

fn cpt(a: &CptArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if !(a.tol >= 0.0) {
        return Err(usage("--tol must be non-negative"));
    }
    let d = load(&a.source)?;
    let (ts, tl) = phases(&a.source);
    let c = model::couplings_from_params(&d.params, ts, tl)?;
    let h = model::to_k0_basis(&model::build_effective_hamiltonian(&c))?;
    let check = model::cpt_check(&h, a.tol)?;
    let names = ["m11_m22", "g11_g22", "m12_m21conj", "g12_g21conj"];
    let mut s = String::new();
    let _ = writeln!(s, "delta_theta = {}", c.delta_theta());
    for (n, r) in names.iter().zip(check.residuals) {
        let _ = writeln!(s, "residual.{n} = {r}");
    }
    let _ = writeln!(s, "{}", if check.satisfied { "PASS" } else { "FAIL" });
    emit(out, None, &s)
}

fn intensity(a: &IntensityArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let d = load(&a.source)?;
    let grid = time_grid(a.grid.t_min, a.grid.t_max.unwrap_or(20.0 * d.params.tau_s()), a.grid.points)?;
    if !(a.i0 > 0.0 && a.i0.is_finite()) {
        return Err(usage("--i0 must be positive"));
    }
    let series = match a.model {
        IntensityModel::Standard => {
            let e = cp::epsilon_bare(&d.params)?;
            let coefficient = match a.coefficient {
                Coefficient::Exact => InterferenceCoefficient::Exact,
                Coefficient::Displayed => InterferenceCoefficient::Displayed,
            };
            temporal::intensity_standard(&d.params, &e, &grid, a.i0, coefficient)?
        }
        IntensityModel::Renormalized => temporal::intensity_renormalized(&d.params, &grid, a.i0)?,
    };
    emit(out, a.grid.output.as_deref(), &dataio::format_series(&series))
}

fn density(a: &DensityArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let d = load(&a.source)?;
    let grid = time_grid(a.grid.t_min, a.grid.t_max.unwrap_or(20.0 * d.params.tau_s()), a.grid.points)?;
    let e = cp::epsilon_bare(&d.params)?;
    let w = temporal::build_wavefunction(&d.params, &e)?;
    let series = temporal::density_cp(&w, a.sector, &grid)?;
    emit(out, a.grid.output.as_deref(), &dataio::format_series(&series))
}

fn evolve(a: &EvolveArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let d = load(&a.source)?;
    if a.t_min != 0.0 {
        return Err(usage("--t-min must be 0 for evolve"));
    }
    let grid = time_grid(0.0, a.t_max.unwrap_or(5.0 * d.params.tau_s()), a.points)?;
    let (ts, tl) = phases(&a.source);
    let c = model::couplings_from_params(&d.params, ts, tl)?;
    let ff = match a.form_factor {
        FormFactorArg::Flat => FormFactor::Flat,
        FormFactorArg::Lorentzian => {
            if !(a.cutoff > 0.0 && a.cutoff.is_finite()) {
                return Err(usage("--cutoff must be positive"));
            }
            FormFactor::lorentzian(a.cutoff * d.params.gamma_s)?
        }
    };
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let f0 = match a.initial {
        InitialState::K1 => [one, zero],
        InitialState::K2 => [zero, one],
    };
    let states = model::evolve_exact(&c, &ff, &f0, &grid)?;
    let mut s = String::from("t,re_f1,im_f1,re_f2,im_f2\n");
    for (t, f) in grid.iter().zip(&states) {
        let _ = writeln!(s, "{t},{},{},{},{}", f[0].re, f[0].im, f[1].re, f[1].im);
    }
    emit(out, a.output.as_deref(), &s)
}

fn sample(a: &SampleArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let d = load(&a.source)?;
    let n = usize::try_from(a.events).map_err(|_| usage("--events is too large"))?;
    let e = cp::epsilon_bare(&d.params)?;
    let w = temporal::build_wavefunction(&d.params, &e)?;
    let events = montecarlo::sample_decays(&w, n, a.seed)?;
    emit(out, a.output.as_deref(), &dataio::format_events(&events))
}

fn fit(a: &FitArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let d = load(&a.source)?;
    if a.bins == 0 {
        return Err(usage("--bins must be at least 1"));
    }
    if a.dm_starts.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(usage("--dm-starts must be positive"));
    }
    let t_max = a.t_max.unwrap_or(20.0 * d.params.tau_s());
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(usage("--t-max must be positive"));
    }
    let text = std::fs::read_to_string(&a.input)?;
    let (data, hist) = if dataio::is_event_csv(&text) {
        let events = dataio::parse_events(&text, 0)?;
        let edges = temporal::linear_grid(0.0, t_max, a.bins + 1);
        let h = montecarlo::histogram(&events, Some(a.sector), &edges)?;
        (h.series.clone(), Some(h))
    } else {
        (dataio::parse_series(&text, ModelKind::Histogram)?, None)
    };

    let p = &d.params;
    let eps = cp::epsilon_bare(p)?.value;
    // the CP = −1 density is the CP = +1 form with the two poles exchanged
    let (th_value, gamma_s, gamma_l) = match a.sector {
        Sector::Plus => (eps * (p.gamma_l / p.gamma_s).sqrt(), p.gamma_s, p.gamma_l),
        Sector::Minus => (eps * (p.gamma_s / p.gamma_l).sqrt(), p.gamma_l, p.gamma_s),
    };
    let delta_m = match a.sector {
        Sector::Plus => d.params.delta_m(),
        Sector::Minus => -d.params.delta_m(),
    };
    let mut guess = FitValues {
        delta_m,
        eps_mod: th_value.norm(),
        eps_arg: th_value.arg(),
        gamma_s,
        gamma_l,
        scale: 1.0,
    };
    guess.scale = best_scale(&guess, &data).ok_or_else(|| Error::Fit("data carry no signal".into()))?;
    let mut cfg = FitConfig::new(guess)
        .with_free(&a.free)
        .with_delta_m_starts(a.dm_starts.iter().map(|k| k * delta_m).collect());
    cfg.max_iterations = a.max_iterations;
    let result = match &hist {
        Some(h) => estimation::fit_histogram(h, &cfg)?,
        None => estimation::fit_intensity(&data, &cfg)?,
    };
    emit(out, a.output.as_deref(), &result.report())
}

/// Weighted least-squares scale for an otherwise fixed model.
fn best_scale(v: &FitValues, data: &temporal::IntensitySeries) -> Option<f64> {
    let errors = data.errors.as_ref()?;
    let (mut num, mut den) = (0.0, 0.0);
    for ((t, y), e) in data.times.iter().zip(&data.values).zip(errors) {
        if *e <= 0.0 {
            continue;
        }
        let m = v.eval(*t) / v.scale;
        num += y * m / (e * e);
        den += m * m / (e * e);
    }
    let s = num / den;
    (s > 0.0 && s.is_finite()).then_some(s)
}

fn datasets(out: &mut dyn Write) -> Result<(), Failure> {
    let mut s = String::new();
    for d in dataio::builtin_datasets() {
        let u = d.units.symbol();
        let _ = writeln!(s, "[{}]", d.name);
        let _ = writeln!(s, "units = {u}");
        let _ = writeln!(s, "gamma_S = {} 1/{u}", d.params.gamma_s);
        let _ = writeln!(s, "gamma_L = {} 1/{u}", d.params.gamma_l);
        let _ = writeln!(s, "delta_m = {} 1/{u}", d.params.delta_m());
        for r in &d.reference_values {
            let _ = writeln!(s, "ref.{} = {} +- {} | {}", r.name, r.value, r.tolerance, r.provenance);
        }
    }
    emit(out, None, &s)
}
