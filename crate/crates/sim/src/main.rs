use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gfcsa_core::fixtures::{instantaneous_cancellation_slot, PEELING_EXAMPLE};
use gfcsa_core::logical::{decode_no_sic, peel_with_sic, ResourceGraph};
use gfcsa_core::mac::parse_dump;
use gfcsa_core::receiver::{ReceiverMode, Schedule, SicAlgorithm, TraceEvent};
use gfcsa_sim::analytic::{bench_logical, pfail_grid, plr_no_sic_curve, PfailGrid};
use gfcsa_sim::campaign::run_campaign_with;
use gfcsa_sim::output::{sink, write_rows, Format};
use gfcsa_sim::{Campaign, CampaignConfig, ConfigBuilder, Result, RunOptions, SimError};

/// Monte Carlo and analytic evaluation of grant-free coded slotted ALOHA
/// with a massive-MIMO receiver.
#[derive(Parser)]
#[command(name = "gfcsa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full campaign and write one row per (K_a, receiver).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Record per-point wall time (makes the output run dependent).
        #[arg(long)]
        wall_time: bool,
        /// Write decode and subtraction events, one per line, to this file.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Evaluate closed-form curves.
    Analytic {
        #[arg(value_enum)]
        curve: Curve,
        #[command(flatten)]
        common: Common,
        /// Monte Carlo trials per point for the failure-probability curve.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        /// Noise variances of the failure-probability grid.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 10.0])]
        noise: Vec<f64>,
        /// Users per pilot.
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
        pilot_users: Vec<usize>,
        /// Users per slot.
        #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60])]
        slot_users: Vec<usize>,
    },
    /// Collision-channel sweep with and without peeling.
    BenchLogical {
        #[command(flatten)]
        common: Common,
        /// User outcomes per point.
        #[arg(long, default_value_t = 100_000)]
        min_users: u64,
    },
    /// Run a dumped allocation through the collision-channel decoders, or a
    /// built-in scenario.
    Fixture {
        /// Allocation dump (`user: (slot,pilot) ...`, 1-based).
        #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
        path: Option<PathBuf>,
        #[arg(long, value_enum)]
        builtin: Option<Builtin>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Curve {
    Pfail,
    PlrNoSic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    /// Eight users, eight slots, two pilots.
    Peeling,
    /// One slot that only instantaneous cancellation fully resolves.
    Slot,
}

#[derive(Args)]
struct Common {
    /// Campaign configuration (flat TOML).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set k_a=[300,600]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

impl Common {
    fn config(&self) -> Result<CampaignConfig> {
        let mut b = match &self.config {
            Some(p) => ConfigBuilder::from_file(p)?,
            None => ConfigBuilder::new(),
        };
        for s in &self.set {
            b.set(s)?;
        }
        if let Some(v) = self.seed {
            b.set_value("seed", v as i64);
        }
        if let Some(v) = self.workers {
            b.set_value("workers", v as i64);
        }
        if let Some(v) = self.frames {
            b.set_value("frames", v as i64);
        }
        b.build()
    }

    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            Format::Csv
        }
    }
}

fn simulate(common: &Common, wall_time: bool, trace: Option<&Path>) -> Result<()> {
    let c = Campaign::new(common.config()?)?;
    let mut trace_out = trace.map(|p| sink(Some(p))).transpose()?;
    let opts = RunOptions {
        wall_time,
        trace: trace_out.is_some(),
    };
    let rows = run_campaign_with(&c, opts, |p| {
        eprintln!(
            "k_a={} frames={} done in {:.1} s",
            p.k_a,
            p.frames.len(),
            p.wall_s
        );
        if let Some(w) = trace_out.as_mut() {
            for line in p.frames.iter().flat_map(|f| &f.trace) {
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    })?;
    if let Some(mut w) = trace_out {
        w.flush()?;
    }
    write_rows(&rows, common.format(), sink(common.out.as_deref())?)
}

fn analytic(
    curve: Curve,
    common: &Common,
    trials: u64,
    noise: &[f64],
    aj: &[usize],
    a: &[usize],
) -> Result<()> {
    let cfg = common.config()?;
    let out = sink(common.out.as_deref())?;
    match curve {
        Curve::Pfail => {
            let grid = PfailGrid {
                noise_vars: noise.to_vec(),
                pilot_users: aj.to_vec(),
                slot_users: a.to_vec(),
                trials,
                ..PfailGrid::from_config(&cfg)
            };
            write_rows(&pfail_grid(&grid, &cfg, cfg.workers)?, common.format(), out)
        }
        Curve::PlrNoSic => write_rows(
            &plr_no_sic_curve(&Campaign::new(cfg)?)?,
            common.format(),
            out,
        ),
    }
}

fn fixture(path: Option<&Path>, builtin: Option<Builtin>, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    let text = match (builtin, path) {
        (Some(Builtin::Slot), _) => return slot_fixture(&mut w),
        (Some(Builtin::Peeling), _) => PEELING_EXAMPLE.to_string(),
        (None, Some(p)) => std::fs::read_to_string(p)
            .map_err(|e| SimError::Config(format!("cannot read {}: {e}", p.display())))?,
        (None, None) => return Err(SimError::Config("no allocation given".into())),
    };
    let alloc = parse_dump(&text)?;
    let g = ResourceGraph::from_allocation(&alloc);
    let peeled = peel_with_sic(&g);
    writeln!(
        w,
        "users={} slots={} pilots={}",
        alloc.n_users(),
        alloc.n_slots(),
        alloc.n_pilots()
    )?;
    let waves = peeled.order.last().map_or(0, |s| s.wave + 1);
    for wave in 0..waves {
        let users: Vec<String> = peeled
            .order
            .iter()
            .filter(|s| s.wave == wave)
            .map(|s| {
                format!(
                    "{}@({},{})",
                    s.user + 1,
                    s.resource.slot + 1,
                    s.resource.pilot + 1
                )
            })
            .collect();
        writeln!(w, "wave {}: {}", wave + 1, users.join(" "))?;
    }
    let order: Vec<String> = peeled
        .order
        .iter()
        .map(|s| (s.user + 1).to_string())
        .collect();
    writeln!(
        w,
        "sic decoded {}/{}: {}",
        peeled.n_decoded(),
        alloc.n_users(),
        order.join(" ")
    )?;
    let single: Vec<String> = decode_no_sic(&g)
        .iter()
        .enumerate()
        .filter(|(_, d)| **d)
        .map(|(u, _)| (u + 1).to_string())
        .collect();
    writeln!(
        w,
        "no-sic decoded {}/{}: {}",
        single.len(),
        alloc.n_users(),
        single.join(" ")
    )?;
    w.flush()?;
    Ok(())
}

fn slot_fixture(w: &mut dyn Write) -> Result<()> {
    let s = instantaneous_cancellation_slot();
    for sic in [SicAlgorithm::Chb, SicAlgorithm::Pab, SicAlgorithm::Prce] {
        for schedule in [Schedule::Plain, Schedule::Instantaneous] {
            let mode = ReceiverMode::new(sic, schedule);
            let mut events: Vec<TraceEvent> = Vec::new();
            let rx = s.run(mode, &mut events)?;
            writeln!(
                w,
                "mode={sic:?}/{schedule:?} decoded={}/{}",
                rx.n_decoded(),
                s.users.len()
            )?;
            for e in events {
                writeln!(w, "  {e}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            common,
            wall_time,
            trace,
        } => simulate(&common, wall_time, trace.as_deref()),
        Command::Analytic {
            curve,
            common,
            trials,
            noise,
            pilot_users,
            slot_users,
        } => analytic(curve, &common, trials, &noise, &pilot_users, &slot_users),
        Command::BenchLogical { common, min_users } => {
            let rows = bench_logical(&common.config()?, min_users)?;
            write_rows(&rows, common.format(), sink(common.out.as_deref())?)
        }
        Command::Fixture { path, builtin, out } => {
            fixture(path.as_deref(), builtin, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gfcsa: {e}");
            e.exit_code()
        }
    }
}
