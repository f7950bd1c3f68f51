//! Seeded parallel execution of frames and aggregation into result rows.

use std::time::Instant;

use gfcsa_core::frame::{run_modes, FrameRealization, FrameSpec};
use gfcsa_core::logical::{decode_no_sic, peel_with_sic, ResourceGraph};
use gfcsa_core::mac::place;
use gfcsa_core::receiver::{ReceiverMode, TraceEvent, Tracer};
use gfcsa_core::rng::{Domain, Streams};
use gfcsa_core::signal::CodeSpec;
use gfcsa_core::stats::{wilson_interval, Z95};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Campaign, ModeKey};
use crate::error::{Result, SimError};

/// Slots per frame that fit in the latency budget: `⌊Ω B_s / (2 (N_P + N_D))⌋`.
/// Fails when fewer than `repetitions` slots fit.
pub fn slots_from_latency(
    latency_budget: f64,
    symbol_rate: f64,
    n_pilots: usize,
    n_payload: usize,
    repetitions: usize,
) -> Result<usize> {
    if !(latency_budget > 0.0 && symbol_rate > 0.0) || n_pilots == 0 || n_payload == 0 {
        return Err(SimError::Config(
            "latency, symbol rate and slot lengths must be positive".into(),
        ));
    }
    let slots = (latency_budget * symbol_rate / (2 * (n_pilots + n_payload)) as f64).floor();
    if slots < repetitions as f64 {
        return Err(SimError::Config(format!(
            "only {slots} slots fit in {latency_budget} s at {symbol_rate} symbols/s, need at least {repetitions}"
        )));
    }
    Ok(slots as usize)
}

/// Delivered information bits per channel use over a frame.
pub fn sum_rate(
    p_l: f64,
    k_a: usize,
    n_payload: usize,
    bits_per_symbol: usize,
    code: &CodeSpec,
    n_slots: usize,
    n_pilots: usize,
) -> f64 {
    let info_bits = n_payload as f64 * bits_per_symbol as f64 * code.rate() - code.n_extra as f64;
    (1.0 - p_l) * k_a as f64 * info_bits / (n_slots * (n_pilots + n_payload)) as f64
}

impl Campaign {
    pub fn sum_rate(&self, p_l: f64, k_a: usize) -> f64 {
        sum_rate(
            p_l,
            k_a,
            self.cfg.payload_symbols,
            self.constellation.bits_per_symbol(),
            &self.code,
            self.n_slots,
            self.cfg.n_pilots,
        )
    }

    /// Random streams of the operating point with `k_a` users. Points are
    /// independent of each other; all modes at one point see the same frames.
    pub fn point_streams(&self, k_a: usize) -> Streams {
        Streams::new(self.cfg.seed ^ (k_a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModeTally {
    pub decoded: u64,
    pub attempts: u64,
    pub subtractions: u64,
}

/// Per-mode results of one frame, in the order of [`Campaign::modes`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub frame: u64,
    pub modes: Vec<ModeTally>,
    pub transmitted_replicas: Vec<usize>,
    pub trace: Vec<String>,
}

struct Labelled<'a> {
    prefix: String,
    lines: &'a mut Vec<String>,
}

impl Tracer for Labelled<'_> {
    fn event(&mut self, e: &TraceEvent) {
        self.lines.push(format!("{}{e}", self.prefix));
    }
}

/// Simulates one frame of `spec` under every mode of `c`.
pub fn run_frame(
    c: &Campaign,
    spec: &FrameSpec,
    streams: &Streams,
    frame: u64,
    trace: bool,
) -> Result<FrameResult> {
    let fs = streams.frame(frame);
    let k_a = spec.mac.k_active;
    let phy: Vec<ReceiverMode> = c
        .modes
        .iter()
        .filter_map(|m| match m {
            ModeKey::Phy(r) => Some(*r),
            _ => None,
        })
        .collect();
    let mut phy_out = Vec::new();
    let mut lines: Vec<Vec<String>> = vec![Vec::new(); phy.len()];
    let alloc = if phy.is_empty() {
        place(&spec.mac, &mut fs.stream(Domain::Allocation, 0))?
    } else {
        let real = FrameRealization::draw(spec, fs)?;
        let mut sinks: Vec<Labelled<'_>> = lines
            .iter_mut()
            .zip(&phy)
            .map(|(l, m)| Labelled {
                prefix: format!("k_a={k_a} mode={} ", ModeKey::Phy(*m).label()),
                lines: l,
            })
            .collect();
        let mut quiet: Vec<()> = vec![(); phy.len()];
        let mut tracers: Vec<&mut dyn Tracer> = if trace {
            sinks.iter_mut().map(|s| s as &mut dyn Tracer).collect()
        } else {
            quiet.iter_mut().map(|s| s as &mut dyn Tracer).collect()
        };
        phy_out = run_modes(spec, &real, &phy, frame, &mut tracers)?;
        real.alloc
    };
    let graph = c
        .modes
        .iter()
        .any(|m| !matches!(m, ModeKey::Phy(_)))
        .then(|| ResourceGraph::from_allocation(&alloc));
    let mut phy_iter = phy_out.into_iter();
    let mut modes = Vec::with_capacity(c.modes.len());
    let mut transmitted = Vec::with_capacity(c.modes.len());
    for m in &c.modes {
        match m {
            ModeKey::Phy(_) => {
                let o = phy_iter.next().expect("one outcome per physical mode");
                modes.push(ModeTally {
                    decoded: o.n_decoded() as u64,
                    attempts: o.counters.attempts(),
                    subtractions: o.counters.subtractions(),
                });
                transmitted.push(o.transmitted_replicas);
            }
            ModeKey::LogicalSic | ModeKey::LogicalNosic => {
                let g = graph
                    .as_ref()
                    .expect("built when a logical mode is present");
                let decoded = if *m == ModeKey::LogicalSic {
                    peel_with_sic(g).n_decoded()
                } else {
                    decode_no_sic(g).iter().filter(|d| **d).count()
                };
                modes.push(ModeTally {
                    decoded: decoded as u64,
                    ..ModeTally::default()
                });
                transmitted.push(alloc.transmitted_replicas());
            }
        }
    }
    debug_assert!(modes.iter().all(|t| t.decoded <= k_a as u64));
    Ok(FrameResult {
        frame,
        modes,
        transmitted_replicas: transmitted,
        trace: lines.into_iter().flatten().collect(),
    })
}

/// All frames of one operating point, in frame order.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub k_a: usize,
    pub frames: Vec<FrameResult>,
    pub wall_s: f64,
}

impl PointResult {
    pub fn tally(&self, mode: usize) -> ModeTally {
        self.frames
            .iter()
            .fold(ModeTally::default(), |acc, f| ModeTally {
                decoded: acc.decoded + f.modes[mode].decoded,
                attempts: acc.attempts + f.modes[mode].attempts,
                subtractions: acc.subtractions + f.modes[mode].subtractions,
            })
    }

    /// Decoded users of `mode` in each frame.
    pub fn decoded_per_frame(&self, mode: usize) -> Vec<u64> {
        self.frames.iter().map(|f| f.modes[mode].decoded).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Record the wall time of each point. Off by default, since timing is
    /// the only part of the output that is not a function of the seed.
    pub wall_time: bool,
    /// Collect decode and subtraction events of physical-layer modes.
    pub trace: bool,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Internal(format!("cannot start worker pool: {e}")))
}

/// Simulates `frames` frames at `k_a` users on `workers` threads.
pub fn run_point(
    c: &Campaign,
    k_a: usize,
    frames: usize,
    workers: usize,
    trace: bool,
) -> Result<PointResult> {
    let spec = c.frame_spec(k_a)?;
    let streams = c.point_streams(k_a);
    let start = Instant::now();
    let frames = pool(workers)?.install(|| {
        (0..frames as u64)
            .into_par_iter()
            .map(|f| run_frame(c, &spec, &streams, f, trace))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(PointResult {
        k_a,
        frames,
        wall_s: start.elapsed().as_secs_f64(),
    })
}

/// One output line: a (K_a, receiver) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignRow {
    pub k_a: usize,
    pub protocol: &'static str,
    pub sic: &'static str,
    pub instantaneous: bool,
    pub coherence: &'static str,
    pub frames: usize,
    pub users_total: u64,
    pub users_lost: u64,
    pub plr: Option<f64>,
    pub plr_ci_lo: Option<f64>,
    pub plr_ci_hi: Option<f64>,
    pub sum_rate_bpcu: f64,
    pub sum_rate_bps: f64,
    pub decode_attempts: u64,
    pub subtractions: u64,
    pub wall_s: Option<f64>,
}

impl CampaignRow {
    pub fn mean_decoded(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        (self.users_total - self.users_lost) as f64 / self.frames as f64
    }
}

/// Rows of one finished point.
pub fn point_rows(c: &Campaign, p: &PointResult, opts: RunOptions) -> Vec<CampaignRow> {
    c.modes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let t = p.tally(i);
            let users_total = (p.k_a * p.frames.len()) as u64;
            let users_lost = users_total - t.decoded;
            let (plr, lo, hi) = if users_total == 0 {
                (None, None, None)
            } else {
                let (lo, hi) = wilson_interval(users_lost, users_total, Z95);
                (
                    Some(users_lost as f64 / users_total as f64),
                    Some(lo),
                    Some(hi),
                )
            };
            let rate = plr.map_or(0.0, |p_l| c.sum_rate(p_l, p.k_a));
            CampaignRow {
                k_a: p.k_a,
                protocol: c.cfg.protocol.name(),
                sic: m.sic_name(),
                instantaneous: m.instantaneous(),
                coherence: c.cfg.coherence.name(),
                frames: p.frames.len(),
                users_total,
                users_lost,
                plr,
                plr_ci_lo: lo,
                plr_ci_hi: hi,
                sum_rate_bpcu: rate,
                sum_rate_bps: rate * c.cfg.symbol_rate,
                decode_attempts: t.attempts,
                subtractions: t.subtractions,
                wall_s: opts.wall_time.then_some(p.wall_s),
            }
        })
        .collect()
}

/// Runs every point of the sweep. `on_point` sees each finished point (for
/// progress reporting and trace output) before the next one starts.
pub fn run_campaign_with(
    c: &Campaign,
    opts: RunOptions,
    mut on_point: impl FnMut(&PointResult) -> Result<()>,
) -> Result<Vec<CampaignRow>> {
    let mut rows = Vec::new();
    for &k_a in &c.cfg.k_a {
        let p = run_point(c, k_a, c.frames_at(k_a), c.cfg.workers, opts.trace)?;
        on_point(&p)?;
        rows.extend(point_rows(c, &p, opts));
    }
    Ok(rows)
}

pub fn run_campaign(c: &Campaign, opts: RunOptions) -> Result<Vec<CampaignRow>> {
    run_campaign_with(c, opts, |_| Ok(()))
}
