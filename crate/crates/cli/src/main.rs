use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bathsim::device::{bundled_scenario, load_scenario, load_scenario_file, InitialState, ScenarioConfig};
use bathsim::effective::{approx_fidelity, exact_fidelity, experiment_estimate, ThreeLevelParams};
use bathsim::parallel::Execution;
use bathsim::rates::rate_table;
use bathsim::scenarios::report::write_spectrum;
use bathsim::scenarios::spectroscopy::SpectroscopySettings;
use bathsim::scenarios::sweep::parse_values;
use bathsim::scenarios::{
    run_bell, run_spectroscopy, run_sweep, run_w, write_report, write_sweep_csv, Channels, Pumps, ScenarioReport,
    SweepAxis,
};
use clap::{Parser, Subcommand, ValueEnum};

/// Lindblad simulation of dissipative Bell and W state stabilization.
#[derive(Parser, Debug)]
#[command(name = "bathsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-qubit Bell-state stabilization.
    Bell {
        /// Scenario JSON file or bundled name (bell, bell_single_channel, bell_pump2).
        #[arg(long, default_value = "bell")]
        config: String,
        #[arg(long, default_value = "bathsim-out")]
        out: PathBuf,
        /// Dissipation channels to drive; defaults to the ones in the config.
        #[arg(long, value_enum)]
        channels: Option<ChannelArg>,
        /// Also run the second pump (adds one at the |T> transition if absent).
        #[arg(long)]
        pump2: bool,
        /// Initial qubit state, e.g. gg, ee, T.
        #[arg(long)]
        initial: Option<String>,
    },
    /// Three-qubit W-state stabilization.
    W {
        #[arg(long, default_value = "w")]
        config: String,
        #[arg(long, default_value = "bathsim-out")]
        out: PathBuf,
        #[arg(long)]
        initial: Option<String>,
    },
    /// Weak-drive spectroscopy of the qubit array.
    Spectroscopy {
        #[arg(long, default_value = "bell")]
        config: String,
        #[arg(long, default_value = "bathsim-out")]
        out: PathBuf,
        /// Index of the driven qubit.
        #[arg(long, default_value_t = 0)]
        qubit: usize,
        /// Drive amplitude, MHz.
        #[arg(long, default_value_t = 0.05)]
        amplitude: f64,
        /// Drive duration, us.
        #[arg(long, default_value_t = 4.0)]
        duration: f64,
        /// Drive frequencies as start:stop:count (MHz); defaults to a window
        /// around the working frequencies.
        #[arg(long)]
        range: Option<String>,
        #[arg(long)]
        sequential: bool,
    },
    /// Sweep one parameter and record steady fidelity and S -> T rates.
    Sweep {
        #[arg(long, default_value = "bell_single_channel")]
        config: String,
        #[arg(long, default_value = "bathsim-out")]
        out: PathBuf,
        /// n_bar, chi, kappa, T1 or T_phi.
        #[arg(long)]
        axis: String,
        /// start:stop:count or a comma list (inf allowed).
        #[arg(long)]
        values: String,
        #[arg(long)]
        sequential: bool,
    },
    /// Golden-rule forward/reverse rates for every driven resonator.
    Rates {
        #[arg(long, default_value = "bell")]
        config: String,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Three-level model fidelities and the experiment estimate.
    Effective {
        /// Pump amplitude, MHz.
        #[arg(long, default_value_t = 0.53)]
        omega: f64,
        /// Decay rate of |S> and |T>, 1/us.
        #[arg(long, default_value_t = 1.0 / 27.0)]
        gamma1: f64,
        /// |T> -> |S> dephasing rate, 1/us.
        #[arg(long, default_value_t = 1.0 / 18.0)]
        gamma_phi: f64,
        /// Engineered |S> -> |T> rate, 1/us.
        #[arg(long, default_value_t = 1.0 / 0.9)]
        gamma_s: f64,
        /// Stabilization time constant for the estimate, us.
        #[arg(long, default_value_t = 0.9)]
        ts: f64,
        /// Qubit T1 values for the estimate, us (comma list).
        #[arg(long, default_value = "27,27")]
        t1: String,
        /// Dephasing time for the estimate, us.
        #[arg(long, default_value_t = 18.0)]
        tphi: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ChannelArg {
    R1,
    R2,
    Both,
}

fn load_config(name: &str) -> Result<ScenarioConfig> {
    let path = Path::new(name);
    if path.exists() {
        return load_scenario_file(path).with_context(|| format!("loading {}", path.display()));
    }
    match bundled_scenario(name) {
        Some(text) => Ok(load_scenario(text)?),
        None => bail!("no config file `{name}` and no bundled scenario of that name"),
    }
}

fn initial_state(s: &Option<String>) -> Option<InitialState> {
    s.as_ref().map(|n| InitialState::Named(n.clone()))
}

fn print_report(report: &ScenarioReport, out: &Path) {
    println!("scenario           {}", report.scenario);
    println!("initial state      {}", report.initial_state);
    println!("hilbert dimension  {}", report.hilbert_dim);
    println!("steady fidelity    {:.4}", report.steady_fidelity);
    if let Some(f) = report.asymptotic_fidelity {
        println!("asymptotic         {f:.4}");
    }
    if let Some(t) = report.fitted_ts_us {
        println!("fitted T_s (us)    {t:.3}");
    }
    let d = &report.diagnostics;
    println!(
        "integrity          trace {:.1e}, hermiticity {:.1e}, min eigenvalue {:.1e}",
        d.max_trace_error, d.max_hermiticity_error, d.min_eigenvalue
    );
    for n in &report.notes {
        println!("note               {n}");
    }
    println!("wrote {}", out.display());
}

fn default_spectrum_range(cfg: &ScenarioConfig) -> Vec<f64> {
    let freqs: Vec<f64> = cfg.qubits.iter().map(|q| q.working_freq()).collect();
    let j = cfg.j_mhz.iter().cloned().fold(0.0, f64::max);
    let lo = freqs.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * j - 5.0;
    let hi = freqs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * j + 5.0;
    let n = ((hi - lo) / 0.1).round() as usize + 1;
    (0..n).map(|i| lo + 0.1 * i as f64).collect()
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bell { config, out, channels, pump2, initial } => {
            let cfg = load_config(&config)?;
            let channels = match channels {
                Some(ChannelArg::R1) => Channels::R1,
                Some(ChannelArg::R2) => Channels::R2,
                Some(ChannelArg::Both) => Channels::Both,
                None => match cfg.driven_resonators().as_slice() {
                    [0] => Channels::R1,
                    [1] => Channels::R2,
                    _ => Channels::Both,
                },
            };
            let pumps = if pump2 || cfg.pumps.iter().filter(|p| p.enabled).count() > 1 {
                Pumps::P1P2
            } else {
                Pumps::P1
            };
            let report = run_bell(&cfg, channels, pumps, initial_state(&initial).as_ref())?;
            write_report(&out, &report)?;
            print_report(&report, &out);
        }
        Command::W { config, out, initial } => {
            let cfg = load_config(&config)?;
            let report = run_w(&cfg, initial_state(&initial).as_ref())?;
            write_report(&out, &report)?;
            print_report(&report, &out);
        }
        Command::Spectroscopy { config, out, qubit, amplitude, duration, range, sequential } => {
            let cfg = load_config(&config)?;
            let freqs = match range {
                Some(r) => parse_values(&r)?,
                None => default_spectrum_range(&cfg),
            };
            let settings = SpectroscopySettings { drive_qubit: qubit, amplitude_mhz: amplitude, duration_us: duration, ..Default::default() };
            let spectrum = run_spectroscopy(&cfg, &freqs, &settings, execution(sequential))?;
            write_spectrum(&out, &spectrum)?;
            let peaks: Vec<String> = spectrum.peaks_mhz.iter().map(|p| format!("{p:.2}")).collect();
            println!("peaks (MHz)  {}", peaks.join(", "));
            println!("wrote {}", out.display());
        }
        Command::Sweep { config, out, axis, values, sequential } => {
            let cfg = load_config(&config)?;
            let axis: SweepAxis = axis.parse()?;
            let values = parse_values(&values)?;
            let sweep = run_sweep(&cfg, axis, &values, execution(sequential))?;
            write_sweep_csv(&out, &sweep)?;
            let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
            println!("{:>10} {:>8} {:>8} {:>8} {:>8}", axis.to_string(), "F", "F_inf", "G_sim", "G_gold");
            for r in &sweep.rows {
                println!(
                    "{:>10.4} {:>8} {:>8} {:>8} {:>8}{}",
                    r.value,
                    fmt(r.steady_fidelity),
                    fmt(r.asymptotic_fidelity),
                    fmt(r.gamma_st_sim),
                    fmt(r.gamma_st_golden),
                    r.error.as_ref().map(|e| format!("  error: {e}")).unwrap_or_default()
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Rates { config, json } => {
            let cfg = load_config(&config)?.validate()?;
            let rows = rate_table(&cfg)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                println!(
                    "{:<4} {:>4} {:>9} {:>9} {:>6} {:>11} {:>11} {:>10}",
                    "res", "p->l", "gap", "detuning", "n_bar", "forward", "reverse", "ratio"
                );
                for r in rows {
                    println!(
                        "{:<4} {:>4} {:>9.3} {:>9.3} {:>6.3} {:>11.5} {:>11.3e} {:>10.2}",
                        r.resonator,
                        format!("{}->{}", r.from_mode, r.to_mode),
                        r.gap_mhz,
                        r.detuning_mhz,
                        r.n_bar,
                        r.forward,
                        r.reverse,
                        r.ratio
                    );
                }
            }
        }
        Command::Effective { omega, gamma1, gamma_phi, gamma_s, ts, t1, tphi } => {
            let p = ThreeLevelParams { omega_p_mhz: omega, gamma1, gamma_phi, gamma_s };
            let t1: Vec<f64> = parse_values(&t1)?;
            println!("exact      {:.4}", exact_fidelity(&p)?);
            println!("approx     {:.4}", approx_fidelity(gamma1, gamma_phi, gamma_s));
            println!("estimate   {:.4}", experiment_estimate(ts, &t1, tphi)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
