use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nematic_core::coefficients::{c2, c2_alternate, lifespan_bound, part2_energy_cap, regime_classify};
use nematic_core::driver::experiments::{check_suite, convergence_config, simulate_config, sweep, sweep_summary};
use nematic_core::driver::RunConfig;
use nematic_core::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "nematic", version, about = "Inertial Ericksen-Leslie simulator on the periodic torus")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` of the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random presets.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replaces the configured initial data by the named preset with
    /// default parameters.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Final time; overrides `stepper.t_end`.
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trajectory and write monitors.csv and snapshots.
    Simulate,
    /// Print the regime constants of the configured coefficients.
    Classify,
    /// Print the guaranteed lifespan for a given initial energy.
    Lifespan {
        #[arg(long = "e-in")]
        e_in: f64,
        /// |grad d_in|_{H^s}.
        #[arg(long = "grad-din", default_value_t = 0.0)]
        grad_din: f64,
    },
    /// Run the structural check suite; exits nonzero on any failure.
    Check,
    /// Richardson estimate of the temporal order for the configured run.
    Convergence,
    /// Run the `[sweep]` grid of the config and write summary.txt.
    Sweep,
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::ConfigInvalid {
            field: "--config".into(),
            message: "this subcommand needs a configuration file".into(),
        })?;
    RunConfig::load(path)?.with_overrides(cli.seed, cli.preset.as_deref(), cli.t_end)
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| cfg.output_dir.clone())
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Simulate => {
            let cfg = load(cli)?;
            let out = out_dir(cli, &cfg);
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("config.toml"), cfg.to_toml_string())?;
            let o = simulate_config(&cfg, Some(&out))?;
            println!("stop                = {}", o.stop);
            println!("steps               = {}", o.steps);
            println!("E_in                = {:e}", o.e_in);
            println!("max constraint dev  = {:e}", o.max_constraint_dev());
            println!("final E_script      = {:e}", o.final_e_script());
            println!("output              = {}", out.display());
            Ok(true)
        }
        Command::Classify => {
            let cfg = load(cli)?;
            let rep = regime_classify(&cfg.coefficients()?, cfg.constants()?)?;
            println!("{}", rep.to_key_values().trim_end());
            Ok(true)
        }
        Command::Lifespan { e_in, grad_din } => {
            let cfg = load(cli)?;
            let coef = cfg.coefficients()?;
            let k = cfg.constants()?;
            let l = lifespan_bound(&coef, *e_in, k, *grad_din)?;
            println!("regime   = {:?}", l.regime);
            println!("lifespan = {}", l.time);
            println!("small_data = {}", l.small_data);
            if coef.is_wave_map() {
                let c = c2(&coef, k.c, *grad_din);
                println!("C2       = {c}");
                println!("C2 (alternate form) = {}", c2_alternate(&coef, k.c, *grad_din));
                if l.time.is_finite() {
                    if let Ok(cap) = part2_energy_cap(*e_in, 0.5 * l.time, c) {
                        println!("W(E_in, T/2) = {}", cap.w);
                        println!("energy cap at T/2 = {}", cap.bound);
                    }
                }
            }
            Ok(true)
        }
        Command::Check => {
            let results = check_suite()?;
            for r in &results {
                println!("{r}");
            }
            Ok(results.iter().all(|r| r.passed))
        }
        Command::Convergence => {
            let cfg = load(cli)?;
            let r = convergence_config(&cfg)?;
            println!("dt        = {:e} {:e} {:e}", r.dts[0], r.dts[1], r.dts[2]);
            println!("diffs     = {:e} {:e}", r.differences[0], r.differences[1]);
            println!("order     = {:.4}", r.order);
            Ok(true)
        }
        Command::Sweep => {
            let cfg = load(cli)?;
            let out = out_dir(cli, &cfg);
            let rows = sweep(&cfg, &out)?;
            print!("{}", sweep_summary(&rows));
            Ok(true)
        }
    }
}

fn init_threads(n: Option<usize>) {
    if let Some(n) = n {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not configure {n} threads: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    init_threads(cli.threads);
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(p) = cli.config.as_deref().filter(|p| !Path::new(p).exists()) {
                eprintln!("config file {} does not exist", p.display());
            }
            ExitCode::from(2)
        }
    }
}
