use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppwalk::experiment::{
    a2_check, fit_exponent, run_scaling, sample_process, transition_scan, write_rows, ExperimentConfig, ScalingRow,
    Statistic,
};
use ppwalk::isoperimetry::{
    cheeger_exact_with, cheeger_sweep_upper, hybrid_profile_exact_with, iso_profile_exact_with, trap_upper_bound,
    IsoProfile,
};
use ppwalk::percolation::{event_sweep, sample_site_field, EventRow};
use ppwalk::pointprocess::{read_csv, write_csv, PointSet};
use ppwalk::spectral::{
    spectral_profile_bound, fmt_real, mixing_time_exact, spectral_profile_exact_with, spectral_report,
    SpectralOptions,
};
use ppwalk::walk::{build_generator_with, Model};
use ppwalk::{Error, Execution, WalkGenerator};

/// Random walks on point processes: conductance, profiles, spectral gaps,
/// mixing times and scaling sweeps.
#[derive(Parser)]
#[command(name = "ppwalk", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a point configuration and write it as CSV.
    Sample(SampleArgs),
    /// Spectral gap, Poincaré constant and mixing bounds of one configuration.
    Spectrum(WalkArgs),
    /// Cheeger constant: exact for small configurations, upper bounds otherwise.
    Cheeger(WalkArgs),
    /// Isoperimetric, hybrid or spectral profile of one configuration.
    Profile(ProfileArgs),
    /// Exact uniform mixing time and its upper bounds.
    Mix(WalkArgs),
    /// Site-percolation event sweep over seeds.
    Perc(PercArgs),
    /// Sweep over box sides; writes the cell table and prints exponent fits.
    Scaling(CommonArgs),
    /// Sweep over intensities at alpha = dim; prints the monotonicity verdict.
    Transition(CommonArgs),
    /// Monte Carlo moments of the S and R statistics over box sides.
    A2check(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set L_list=8,16,32`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Generator model: 1, 2 or 3.
    #[arg(long)]
    model: Option<u8>,
    #[arg(long)]
    cutoff: Option<f64>,
    /// Seed list, e.g. `0..20` or `1,5,9`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; `-` writes to standard output.
    #[arg(long)]
    output: Option<String>,
}

impl CommonArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        let flags: [(&str, Option<String>); 8] = [
            ("dim", self.dim.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("rho", self.rho.map(|v| v.to_string())),
            ("model", self.model.map(|v| v.to_string())),
            ("cutoff", self.cutoff.map(|v| v.to_string())),
            ("seeds", self.seeds.clone()),
            ("workers", self.workers.map(|v| v.to_string())),
            ("output_path", self.output.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Box side; defaults to the first entry of `L_list`.
    #[arg(long)]
    side: Option<f64>,
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Point CSV; without it a configuration is sampled from the config.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Box side when sampling; defaults to the first entry of `L_list`.
    #[arg(long)]
    side: Option<f64>,
    /// Write JSON instead of text (spectrum only).
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileKindArg {
    Iso,
    Hybrid,
    Spectral,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(long, value_enum, default_value = "iso")]
    kind: ProfileKindArg,
    /// Comma-separated increasing grid in (0, 1] for the isoperimetric kinds.
    #[arg(long, default_value = "0.05,0.1,0.2,0.3,0.4,0.5")]
    grid: String,
}

#[derive(Args)]
struct PercArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Lattice side.
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 0.95)]
    p: f64,
    #[arg(long, default_value_t = 0.8)]
    kappa: f64,
    #[arg(long, default_value_t = 16)]
    cube_side: usize,
    /// Write the run-length dump of the first seed's field here.
    #[arg(long)]
    dump: Option<PathBuf>,
}

fn open_output(path: &str) -> Result<Box<dyn Write>, Error> {
    if path == "-" {
        return Ok(Box::new(BufWriter::new(io::stdout())));
    }
    if let Some(parent) = Path::new(path).parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let f = File::create(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    Ok(Box::new(BufWriter::new(f)))
}

fn load_points(args: &WalkArgs, cfg: &ExperimentConfig) -> Result<PointSet, Error> {
    match &args.points {
        Some(p) => {
            let f = File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            read_csv(BufReader::new(f))
        }
        None => {
            let side = args.side.unwrap_or(cfg.l_list[0] as f64);
            sample_process(cfg, side, cfg.rho, cfg.seeds[0])
        }
    }
}

fn generator(args: &WalkArgs) -> Result<(ExperimentConfig, WalkGenerator), Error> {
    let cfg = args.common.config()?;
    let xi = load_points(args, &cfg)?;
    let gen = build_generator_with(&xi, cfg.alpha, cfg.model, cfg.cutoff, exec(&cfg))?;
    Ok((cfg, gen))
}

fn exec(cfg: &ExperimentConfig) -> Execution {
    Execution::with_workers(cfg.workers)
}

fn spectral_options(cfg: &ExperimentConfig) -> SpectralOptions {
    SpectralOptions {
        dense_limit: cfg.size_limits.dense,
        eigensolve_limit: cfg.size_limits.eigensolve,
        exec: exec(cfg),
        ..SpectralOptions::default()
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad grid value {s:?}")))
        })
        .collect()
}

fn cmd_sample(args: &SampleArgs) -> Result<(), Error> {
    let cfg = args.common.config()?;
    let side = args.side.unwrap_or(cfg.l_list[0] as f64);
    let xi = sample_process(&cfg, side, cfg.rho, cfg.seeds[0])?;
    let out = args.common.output.as_deref().unwrap_or("-");
    let mut w = open_output(out)?;
    write_csv(&xi, &mut w)?;
    w.flush()?;
    if out != "-" {
        println!("{} points written to {out}", xi.len());
    }
    Ok(())
}

fn cmd_spectrum(args: &WalkArgs) -> Result<(), Error> {
    let (cfg, gen) = generator(args)?;
    let (mut report, _) = spectral_report(&gen, &spectral_options(&cfg))?;
    if !report.degenerate && gen.model() != Model::Unit && gen.n() <= cfg.size_limits.profile {
        report.bound_profile = spectral_profile_bound(&gen, report.gap, exec(&cfg)).ok();
    }
    if args.json {
        report.write_json(io::stdout())?;
        println!();
    } else {
        println!("{}", ppwalk::spectral::SpectralReport::CSV_HEADER);
        println!("{}", report.csv_row());
    }
    Ok(())
}

fn cmd_cheeger(args: &WalkArgs) -> Result<(), Error> {
    let (cfg, gen) = generator(args)?;
    if gen.n() < 2 {
        return Err(Error::TooSmall { need: 2, got: gen.n() });
    }
    if gen.n() <= cfg.size_limits.cut_enum {
        let (phi, set) = cheeger_exact_with(&gen, exec(&cfg))?;
        println!("phi = {phi}");
        println!("set = {set:?}");
    } else {
        let (sweep, _) = cheeger_sweep_upper(&gen)?;
        let (trap, witness) = trap_upper_bound(&gen)?;
        println!("n = {} exceeds the enumeration limit {}; upper bounds only", gen.n(), cfg.size_limits.cut_enum);
        println!("phi_sweep = {sweep}");
        println!("phi_trap = {trap}");
        println!("trap = {witness:?}");
    }
    Ok(())
}

fn write_iso(p: &IsoProfile, out: &str) -> Result<(), Error> {
    let mut w = open_output(out)?;
    p.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_profile(args: &ProfileArgs) -> Result<(), Error> {
    let (cfg, gen) = generator(&args.walk)?;
    let out = args.walk.common.output.as_deref().unwrap_or("-");
    match args.kind {
        ProfileKindArg::Iso => write_iso(&iso_profile_exact_with(&gen, &parse_grid(&args.grid)?, exec(&cfg))?, out),
        ProfileKindArg::Hybrid => {
            write_iso(&hybrid_profile_exact_with(&gen, &parse_grid(&args.grid)?, exec(&cfg))?, out)
        }
        ProfileKindArg::Spectral => {
            let (report, _) = spectral_report(&gen, &spectral_options(&cfg))?;
            let sp = spectral_profile_exact_with(&gen, report.gap, exec(&cfg))?;
            let mut w = open_output(out)?;
            writeln!(w, "r,lambda")?;
            for (b, v) in sp.breakpoints.iter().zip(&sp.values) {
                writeln!(w, "{b},{}", fmt_real(*v))?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_mix(args: &WalkArgs) -> Result<(), Error> {
    let (cfg, gen) = generator(args)?;
    let tau = mixing_time_exact(&gen, cfg.size_limits.dense)?;
    let (report, _) = spectral_report(&gen, &spectral_options(&cfg))?;
    println!("tau = {tau}");
    println!("bound_simple = {}", report.bound_simple);
    if gen.model() != Model::Unit && gen.n() <= cfg.size_limits.profile {
        let b = spectral_profile_bound(&gen, report.gap, exec(&cfg))?;
        println!("bound_profile = {b}");
    }
    Ok(())
}

fn cmd_perc(args: &PercArgs) -> Result<(), Error> {
    let cfg = args.common.config()?;
    let rows = event_sweep(args.n, cfg.dim, args.p, args.kappa, args.cube_side, &cfg.seeds, exec(&cfg))?;
    if let Some(path) = &args.dump {
        let field = sample_site_field(args.n, cfg.dim, args.p, cfg.seeds[0])?;
        std::fs::write(path, field.to_rle()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let out = args.common.output.as_deref().unwrap_or("-");
    let mut w = open_output(out)?;
    writeln!(w, "{}", EventRow::CSV_HEADER)?;
    for r in &rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    let k = rows.len() as f64;
    let joint = rows.iter().filter(|r| r.events.all()).count() as f64;
    eprintln!("A&B&C frequency {:.3} over {} seeds", joint / k, rows.len());
    Ok(())
}

fn write_table(rows: &[ScalingRow], cfg: &ExperimentConfig) -> Result<(), Error> {
    let mut w = open_output(&cfg.output_path)?;
    write_rows(rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_scaling(args: &CommonArgs) -> Result<(), Error> {
    let cfg = args.config()?;
    let rows = run_scaling(&cfg)?;
    write_table(&rows, &cfg)?;
    let ok = rows.iter().filter(|r| r.status == ppwalk::experiment::CellStatus::Ok).count();
    println!("{} cells ({ok} ok) written to {}", rows.len(), cfg.output_path);
    for stat in [Statistic::Poincare, Statistic::GammaHat, Statistic::Remark1Ratio] {
        let name = format!("{stat:?}").to_lowercase();
        match fit_exponent(&rows, stat) {
            Ok(f) => println!("fit {name}: slope {} intercept {} r2 {}", f.slope, f.intercept, f.r_squared),
            Err(e) => println!("fit {name}: {e}"),
        }
    }
    Ok(())
}

fn cmd_transition(args: &CommonArgs) -> Result<(), Error> {
    let cfg = args.config()?;
    let rep = transition_scan(&cfg)?;
    write_table(&rep.rows, &cfg)?;
    rep.write_summary(io::stdout())?;
    println!("verdict = {}", rep.verdict());
    Ok(())
}

fn cmd_a2(args: &CommonArgs) -> Result<(), Error> {
    let cfg = args.config()?;
    let rep = a2_check(&cfg)?;
    let mut w = open_output(&cfg.output_path)?;
    rep.write_rows(&mut w)?;
    w.flush()?;
    rep.write_summary(io::stdout())?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Cheeger(a) => cmd_cheeger(a),
        Command::Profile(a) => cmd_profile(a),
        Command::Mix(a) => cmd_mix(a),
        Command::Perc(a) => cmd_perc(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::Transition(a) => cmd_transition(a),
        Command::A2check(a) => cmd_a2(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{}", e.render());
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
