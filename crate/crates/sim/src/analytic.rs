//! Closed-form curves, their Monte Carlo counterparts and the collision
//! channel sweep.

use gfcsa_core::analytics::{
    p_fail, p_fail_mean_channel, plr_no_sic, var_interference_post_chb, InterferenceScenario,
    PfailCode, QamErrorParams,
};
use gfcsa_core::experiment::{chb_singleton_trial, SingletonExperiment};
use gfcsa_core::rng::{Domain, Streams};
use gfcsa_core::stats::{wilson_interval, Z95};
use rayon::prelude::*;
use serde::Serialize;

use crate::campaign::{point_rows, run_point, RunOptions};
use crate::config::{Campaign, CampaignConfig, ModeKey};
use crate::error::{Result, SimError};

/// Failure probability of a singleton after the CHB subtraction of every
/// co-pilot user, analytic and optionally simulated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PfailPoint {
    pub noise_var: f64,
    pub n_pilot_users: usize,
    pub n_slot_users: usize,
    pub var_interference: f64,
    pub p_fail: f64,
    pub p_fail_mean_channel: f64,
    pub trials: u64,
    pub failures: u64,
    pub p_fail_sim: Option<f64>,
    pub sim_ci_lo: Option<f64>,
    pub sim_ci_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfailGrid {
    pub antennas: usize,
    pub n_pilots: usize,
    pub code: PfailCode,
    pub constellation_order: usize,
    pub noise_vars: Vec<f64>,
    pub pilot_users: Vec<usize>,
    pub slot_users: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
}

impl PfailGrid {
    pub fn from_config(cfg: &CampaignConfig) -> Self {
        Self {
            antennas: cfg.antennas,
            n_pilots: cfg.n_pilots,
            code: PfailCode {
                n_d: cfg.payload_symbols,
                t: cfg.code_t,
            },
            constellation_order: cfg.constellation_order,
            noise_vars: vec![1.0, 10.0],
            pilot_users: vec![1, 2, 3],
            slot_users: (1..=12).map(|i| 5 * i).collect(),
            trials: 0,
            seed: cfg.seed,
        }
    }
}

/// Evaluates every `(σ², |A^j|, |A|)` of `grid` with `|A| >= |A^j|`. The
/// simulation, when `grid.trials > 0`, draws from a stream keyed by the
/// point's position in the grid and is split over `workers` threads.
pub fn pfail_grid(
    grid: &PfailGrid,
    cfg: &CampaignConfig,
    workers: usize,
) -> Result<Vec<PfailPoint>> {
    let q = QamErrorParams::new(grid.constellation_order)?;
    let campaign = Campaign::new(cfg.clone())?;
    let mut points = Vec::new();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Internal(e.to_string()))?;
    let streams = Streams::new(grid.seed);
    let mut index = 0u64;
    for &noise_var in &grid.noise_vars {
        for &aj in &grid.pilot_users {
            for &a in grid.slot_users.iter().filter(|&&a| a >= aj) {
                index += 1;
                let scenario = InterferenceScenario {
                    n_slot_users: a,
                    n_pilot_users: aj,
                    noise_var,
                    n_pilots: grid.n_pilots,
                    antennas: grid.antennas,
                };
                let analytic = p_fail(&scenario, grid.code, &q)?;
                if !analytic.is_finite() {
                    return Err(SimError::Numerical(format!(
                        "p_fail is not finite at {scenario:?}"
                    )));
                }
                let e = SingletonExperiment {
                    scenario,
                    code: campaign.code,
                    constellation: campaign.constellation.clone(),
                };
                let failures = if grid.trials > 0 {
                    simulate_failures(&e, grid.trials, &streams, index, &pool)?
                } else {
                    0
                };
                let sim = (grid.trials > 0).then(|| {
                    let (lo, hi) = wilson_interval(failures, grid.trials, Z95);
                    (failures as f64 / grid.trials as f64, lo, hi)
                });
                points.push(PfailPoint {
                    noise_var,
                    n_pilot_users: aj,
                    n_slot_users: a,
                    var_interference: var_interference_post_chb(&scenario),
                    p_fail: analytic,
                    p_fail_mean_channel: p_fail_mean_channel(&scenario, grid.code, &q)?,
                    trials: grid.trials,
                    failures,
                    p_fail_sim: sim.map(|s| s.0),
                    sim_ci_lo: sim.map(|s| s.1),
                    sim_ci_hi: sim.map(|s| s.2),
                });
            }
        }
    }
    Ok(points)
}

/// Trials are split into fixed chunks with their own streams, so the count
/// does not depend on the number of workers.
fn simulate_failures(
    e: &SingletonExperiment,
    trials: u64,
    streams: &Streams,
    point: u64,
    pool: &rayon::ThreadPool,
) -> Result<u64> {
    e.validate()?;
    const CHUNK: u64 = 1000;
    let fs = streams.frame(point);
    let chunks = trials.div_ceil(CHUNK);
    Ok(pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = fs.stream(Domain::Trial, c);
                let n = CHUNK.min(trials - c * CHUNK);
                (0..n)
                    .filter(|_| chb_singleton_trial(e, &mut rng).failed(&e.code))
                    .count() as u64
            })
            .sum()
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlrPoint {
    pub k_a: usize,
    pub plr_no_sic: f64,
}

pub fn plr_no_sic_curve(c: &Campaign) -> Result<Vec<PlrPoint>> {
    c.cfg
        .k_a
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k_a| {
            Ok(PlrPoint {
                k_a,
                plr_no_sic: plr_no_sic(k_a, c.cfg.repetitions, c.n_slots, c.cfg.n_pilots)?,
            })
        })
        .collect()
}

/// Collision-channel sweep: peeling and single-pass decoding of the same
/// allocations, next to the closed form for the single pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalRow {
    pub k_a: usize,
    pub frames: usize,
    pub users_total: u64,
    pub lost_sic: u64,
    pub plr_sic: f64,
    pub lost_nosic: u64,
    pub plr_nosic: f64,
    pub plr_nosic_ci_lo: f64,
    pub plr_nosic_ci_hi: f64,
    pub plr_nosic_analytic: f64,
}

/// `min_users` sets the number of user outcomes per point; frames are
/// rounded up to reach it (and never fewer than `cfg.frames` when set).
pub fn bench_logical(cfg: &CampaignConfig, min_users: u64) -> Result<Vec<LogicalRow>> {
    let mut cfg = cfg.clone();
    cfg.sic = vec![
        crate::config::SicKey::LogicalSic,
        crate::config::SicKey::LogicalNosic,
    ];
    cfg.instantaneous = vec![false];
    let c = Campaign::new(cfg)?;
    debug_assert_eq!(c.modes, [ModeKey::LogicalSic, ModeKey::LogicalNosic]);
    let mut rows = Vec::new();
    for &k_a in c.cfg.k_a.iter().filter(|&&k| k > 0) {
        let frames = (min_users.div_ceil(k_a as u64) as usize).max(c.cfg.frames.unwrap_or(1));
        let p = run_point(&c, k_a, frames, c.cfg.workers, false)?;
        let r = point_rows(&c, &p, RunOptions::default());
        let (sic, nosic) = (&r[0], &r[1]);
        rows.push(LogicalRow {
            k_a,
            frames,
            users_total: sic.users_total,
            lost_sic: sic.users_lost,
            plr_sic: sic.plr.unwrap_or(0.0),
            lost_nosic: nosic.users_lost,
            plr_nosic: nosic.plr.unwrap_or(0.0),
            plr_nosic_ci_lo: nosic.plr_ci_lo.unwrap_or(0.0),
            plr_nosic_ci_hi: nosic.plr_ci_hi.unwrap_or(1.0),
            plr_nosic_analytic: plr_no_sic(k_a, c.cfg.repetitions, c.n_slots, c.cfg.n_pilots)?,
        });
    }
    Ok(rows)
}
