use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pdl::dispersion::media_catalog;
use pdl::metrics::NumericBroadening;
use pdl::qkd::{AttenuationConvention, QberConvention};
use pdl::runner::{
    fmt_float, preset, preset_names, run_sweep, Axis, CurveParams, Family, MethodChoice, Metric,
    SweepConfig,
};
use pdl::units::PS;
use pdl::Error;

#[derive(Parser)]
#[command(
    name = "pdl",
    version,
    about = "Dispersion of single-photon temporal modes, symbol rates and BB84 key rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dispersive media known by name.
    Media {
        #[command(subcommand)]
        action: MediaAction,
    },
    /// Broadening Γ = σ_L/σ against propagation length.
    Broadening(CurveCmd),
    /// Three-sigma symbol rate against propagation length.
    SymbolRate(CurveCmd),
    /// BB84 key-rate model for Gaussian photons.
    Keyrate(KeyrateCmd),
    /// Time-bin qubit densities before and after propagation.
    Qubit(QubitCmd),
    /// Dump the sampled wave function after propagation.
    Propagate(PropagateCmd),
    /// Run a sweep from a JSON config or a bundled figure preset.
    Sweep(SweepCmd),
}

#[derive(Subcommand)]
enum MediaAction {
    List {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Gaussian,
    Ggd,
    Sech,
    Timebin,
}

impl From<ModeArg> for Family {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Gaussian => Family::Gaussian,
            ModeArg::Ggd => Family::Ggd,
            ModeArg::Sech => Family::Sech,
            ModeArg::Timebin => Family::Timebin,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    ClosedForm,
    Numeric,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::ClosedForm => MethodChoice::ClosedForm,
            MethodArg::Numeric => MethodChoice::Numeric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AttenArg {
    Db,
    Literal,
}

#[derive(Clone, Copy, ValueEnum)]
enum QberArg {
    Printed,
    Sifted,
}

#[derive(Args)]
struct ModeFlags {
    #[arg(long, value_enum, default_value = "gaussian")]
    mode: ModeArg,
    #[arg(long, default_value_t = 4.25)]
    sigma_ps: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    chirp: f64,
    #[arg(long, alias = "q", default_value_t = 2.0)]
    shape_q: f64,
    /// Time-bin separation T.
    #[arg(long, default_value_t = 5.0)]
    separation_ps: f64,
    /// Width σ̃ of one time-bin packet.
    #[arg(long, default_value_t = 0.25)]
    packet_sigma_ps: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    theta_rad: f64,
    #[arg(long, default_value_t = 0.0)]
    phi_rad: f64,
}

#[derive(Args)]
struct MediumFlags {
    /// Medium name; see `pdl media list`. Defaults to air, or smf28e+ for
    /// `keyrate` and `qubit`.
    #[arg(long)]
    medium: Option<String>,
    #[arg(
        long,
        allow_negative_numbers = true,
        conflicts_with = "beta_ps2_per_km"
    )]
    beta_fs2_per_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta_ps2_per_km: Option<f64>,
    /// Attenuation for an explicit GVD value.
    #[arg(long, default_value_t = 0.0)]
    atten_db_per_km: f64,
}

#[derive(Args)]
struct LengthFlags {
    /// Comma-separated lengths; overrides the range flags.
    #[arg(long, value_delimiter = ',')]
    l_km: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    l_min_km: f64,
    #[arg(long)]
    l_max_km: Option<f64>,
    #[arg(long, default_value_t = 200)]
    l_points: usize,
    /// Log-spaced lengths.
    #[arg(long)]
    log: bool,
}

#[derive(Args)]
struct CurveCmd {
    #[command(flatten)]
    mode: ModeFlags,
    #[command(flatten)]
    medium: MediumFlags,
    #[command(flatten)]
    length: LengthFlags,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KeyrateCmd {
    #[arg(long, default_value_t = 4.25)]
    sigma_ps: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    chirp: f64,
    #[arg(long, default_value_t = 5.0)]
    jitter_ps: f64,
    /// Comma-separated detection windows.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    window_ps: Vec<f64>,
    /// Slot separation Θ.
    #[arg(long, default_value_t = 100.0)]
    sep_ps: f64,
    #[command(flatten)]
    medium: MediumFlags,
    #[command(flatten)]
    length: LengthFlags,
    #[arg(long, value_enum, default_value = "db")]
    attenuation: AttenArg,
    #[arg(long, value_enum, default_value = "printed")]
    qber: QberArg,
    /// Monte Carlo slots per point for the check columns; 0 skips them.
    #[arg(long, default_value_t = 0)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QubitCmd {
    #[arg(long, default_value_t = 5.0)]
    separation_ps: f64,
    #[arg(long, default_value_t = 0.25)]
    packet_sigma_ps: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    chirp: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    theta_rad: f64,
    #[arg(long, default_value_t = 0.0)]
    phi_rad: f64,
    #[command(flatten)]
    medium: MediumFlags,
    /// Comma-separated lengths in metres; L = 0 is always included.
    #[arg(long, value_delimiter = ',', default_value = "100,300,500")]
    l_m: Vec<f64>,
    #[arg(long, default_value_t = -60.0, allow_negative_numbers = true)]
    t_min_ps: f64,
    #[arg(long, default_value_t = 60.0)]
    t_max_ps: f64,
    #[arg(long, default_value_t = 1201)]
    t_points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PropagateCmd {
    #[command(flatten)]
    mode: ModeFlags,
    #[command(flatten)]
    medium: MediumFlags,
    #[arg(long)]
    l_km: f64,
    /// Keep only samples inside [t-min-ps, t-max-ps].
    #[arg(long, allow_negative_numbers = true)]
    t_min_ps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_max_ps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepCmd {
    #[arg(long, conflicts_with_all = ["preset", "all"])]
    config: Option<PathBuf>,
    /// Bundled preset, fig1 to fig24.
    #[arg(long, conflicts_with = "all")]
    preset: Option<String>,
    /// Run every bundled preset; needs --out-dir.
    #[arg(long, requires = "out_dir")]
    all: bool,
    #[arg(long)]
    list: bool,
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Write `<experiment>.csv` into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    l_points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn blank_config(experiment: &str, metric: Metric) -> SweepConfig {
    serde_json::from_value(serde_json::json!({
        "experiment": experiment,
        "metric": metric,
        "l-km": [0.0],
        "t-min-ps": -1.0,
        "t-max-ps": 1.0,
    }))
    .expect("static config is valid")
}

fn apply_mode(cfg: &mut SweepConfig, m: &ModeFlags) {
    cfg.mode = m.mode.into();
    cfg.sigma_ps = vec![m.sigma_ps];
    cfg.chirp = vec![m.chirp];
    cfg.shape_q = vec![m.shape_q];
    cfg.separation_ps = vec![m.separation_ps];
    cfg.packet_sigma_ps = vec![m.packet_sigma_ps];
    cfg.theta_rad = vec![m.theta_rad];
    cfg.phi_rad = vec![m.phi_rad];
}

fn apply_medium(cfg: &mut SweepConfig, m: &MediumFlags, default: &str) {
    cfg.media = vec![m.medium.clone().unwrap_or_else(|| default.to_string())];
    cfg.beta_fs2_per_m = m.beta_fs2_per_m.map(|b| vec![b]);
    cfg.beta_ps2_per_km = m.beta_ps2_per_km.map(|b| vec![b]);
    cfg.atten_db_per_km = m.atten_db_per_km;
}

fn apply_length(cfg: &mut SweepConfig, l: &LengthFlags) -> Result<(), Error> {
    match (&l.l_km, l.l_max_km) {
        (Some(list), _) => cfg.l_km = Some(list.clone()),
        (None, Some(max)) => {
            cfg.l_km = None;
            cfg.l_min_km = l.l_min_km;
            cfg.l_max_km = max;
            cfg.l_points = l.l_points;
            cfg.l_axis = if l.log { Axis::Log } else { Axis::Linear };
        }
        (None, None) => {
            return Err(Error::Config("give --l-km or --l-max-km".into()));
        }
    }
    Ok(())
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Runs a sweep and writes it; point failures make the exit status 2.
fn emit(cfg: &SweepConfig, out: Option<&PathBuf>) -> Result<u8, Error> {
    let table = run_sweep(cfg)?;
    let mut w = open_out(out)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let failed = table.failures();
    if failed > 0 {
        eprintln!(
            "pdl: {}: {failed} of {} points failed; see the error column",
            cfg.experiment,
            table.rows.len()
        );
        return Ok(2);
    }
    Ok(0)
}

fn media_list(out: Option<&PathBuf>) -> Result<u8, Error> {
    let mut w = csv::Writer::from_writer(open_out(out)?);
    w.write_record([
        "label",
        "beta_s2_per_m",
        "beta_fs2_per_m",
        "atten_db_per_km",
    ])?;
    for m in media_catalog::<f64>() {
        w.write_record([
            m.label.clone(),
            fmt_float(m.beta),
            fmt_float(m.beta * 1e30),
            fmt_float(m.atten_db_per_km),
        ])?;
    }
    w.flush()?;
    Ok(0)
}

fn curve_cmd(c: &CurveCmd, metric: Metric) -> Result<u8, Error> {
    let name = match metric {
        Metric::Broadening => "broadening",
        _ => "symbol-rate",
    };
    let mut cfg = blank_config(name, metric);
    apply_mode(&mut cfg, &c.mode);
    apply_medium(&mut cfg, &c.medium, "air");
    apply_length(&mut cfg, &c.length)?;
    cfg.method = c.method.into();
    cfg.validate()?;
    emit(&cfg, c.out.as_ref())
}

fn keyrate_cmd(k: &KeyrateCmd) -> Result<u8, Error> {
    let mut cfg = blank_config("keyrate", Metric::Keyrate);
    cfg.sigma_ps = vec![k.sigma_ps];
    cfg.chirp = vec![k.chirp];
    cfg.jitter_ps = k.jitter_ps;
    cfg.window_ps = k.window_ps.clone();
    cfg.slot_separation_ps = k.sep_ps;
    apply_medium(&mut cfg, &k.medium, "smf28e+");
    apply_length(&mut cfg, &k.length)?;
    cfg.attenuation_convention = match k.attenuation {
        AttenArg::Db => AttenuationConvention::Db,
        AttenArg::Literal => AttenuationConvention::Literal,
    };
    cfg.qber_convention = match k.qber {
        QberArg::Printed => QberConvention::Printed,
        QberArg::Sifted => QberConvention::Sifted,
    };
    cfg.monte_carlo_samples = k.mc_samples;
    cfg.seed = k.seed;
    cfg.validate()?;
    emit(&cfg, k.out.as_ref())
}

fn qubit_cmd(q: &QubitCmd) -> Result<u8, Error> {
    let mut cfg = blank_config("qubit", Metric::Pdf);
    cfg.mode = Family::Timebin;
    cfg.separation_ps = vec![q.separation_ps];
    cfg.packet_sigma_ps = vec![q.packet_sigma_ps];
    cfg.chirp = vec![q.chirp];
    cfg.theta_rad = vec![q.theta_rad];
    cfg.phi_rad = vec![q.phi_rad];
    apply_medium(&mut cfg, &q.medium, "smf28e+");
    let mut lengths: Vec<f64> = vec![0.0];
    lengths.extend(q.l_m.iter().filter(|&&l| l != 0.0).map(|l| l / 1e3));
    cfg.l_km = Some(lengths);
    cfg.t_min_ps = q.t_min_ps;
    cfg.t_max_ps = q.t_max_ps;
    cfg.t_points = q.t_points;
    cfg.validate()?;
    emit(&cfg, q.out.as_ref())
}

fn propagate_cmd(p: &PropagateCmd) -> Result<u8, Error> {
    let mut cfg = blank_config("propagate", Metric::Broadening);
    apply_mode(&mut cfg, &p.mode);
    apply_medium(&mut cfg, &p.medium, "air");
    let medium = cfg.media()?.remove(0);
    let curve = CurveParams {
        family: cfg.mode,
        medium: medium.clone(),
        sigma_ps: Some(p.mode.sigma_ps),
        chirp: p.mode.chirp,
        shape_q: Some(p.mode.shape_q),
        separation_ps: Some(p.mode.separation_ps),
        packet_sigma_ps: Some(p.mode.packet_sigma_ps),
        theta_rad: Some(p.mode.theta_rad),
        phi_rad: Some(p.mode.phi_rad),
        window_ps: None,
    };
    let mode = curve.mode()?;
    let l = p.l_km * 1e3;
    let nb = NumericBroadening::new(&mode, medium.beta, l)?;
    let swf = nb.propagated(l)?;
    let lo = p.t_min_ps.map_or(f64::NEG_INFINITY, |t| t * PS);
    let hi = p.t_max_ps.map_or(f64::INFINITY, |t| t * PS);
    let mut w = csv::Writer::from_writer(open_out(p.out.as_ref())?);
    w.write_record(["t_s", "re_amp", "im_amp", "pdf_per_s"])?;
    for (t, a) in swf.grid().times().zip(swf.amplitudes()) {
        if t < lo || t > hi {
            continue;
        }
        w.write_record([
            fmt_float(t),
            fmt_float(a.re),
            fmt_float(a.im),
            fmt_float(a.norm_sqr()),
        ])?;
    }
    w.flush()?;
    Ok(0)
}

fn sweep_cmd(s: &SweepCmd) -> Result<u8, Error> {
    if s.list {
        let mut w = io::stdout().lock();
        for name in preset_names() {
            let cfg = preset(name)?;
            writeln!(w, "{name}\t{}", cfg.description.unwrap_or_default())?;
        }
        return Ok(0);
    }
    let configs = if s.all {
        preset_names().map(preset).collect::<Result<Vec<_>, _>>()?
    } else if let Some(path) = &s.config {
        vec![SweepConfig::from_file(path)?]
    } else if let Some(name) = &s.preset {
        vec![preset(name)?]
    } else {
        return Err(Error::Config(
            "give --config FILE, --preset NAME, --all or --list".into(),
        ));
    };
    let mut status = 0;
    for mut cfg in configs {
        if let Some(n) = s.l_points {
            cfg.l_points = n;
        }
        if let Some(seed) = s.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        let out = match (&s.out, &s.out_dir) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(dir)) => {
                std::fs::create_dir_all(dir)?;
                Some(dir.join(format!("{}.csv", cfg.experiment)))
            }
            (None, None) => cfg.out.as_ref().map(PathBuf::from),
        };
        status = status.max(emit(&cfg, out.as_ref())?);
    }
    Ok(status)
}

fn broken_pipe(e: &Error) -> bool {
    let io = match e {
        Error::Io(io) => io,
        Error::Csv(c) => match c.kind() {
            csv::ErrorKind::Io(io) => io,
            _ => return false,
        },
        _ => return false,
    };
    io.kind() == io::ErrorKind::BrokenPipe
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Media {
            action: MediaAction::List { out },
        } => media_list(out.as_ref()),
        Command::Broadening(c) => curve_cmd(c, Metric::Broadening),
        Command::SymbolRate(c) => curve_cmd(c, Metric::SymbolRate),
        Command::Keyrate(k) => keyrate_cmd(k),
        Command::Qubit(q) => qubit_cmd(q),
        Command::Propagate(p) => propagate_cmd(p),
        Command::Sweep(s) => sweep_cmd(s),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        // a closed pipe (`pdl ... | head`) is not a failure
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pdl: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
