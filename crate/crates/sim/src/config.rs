//! Campaign configuration: a flat TOML table.
//!
//! Every key has a default matching the reference system (50 ms latency
//! budget, 1 Msymbol/s, 256 antennas, 64 pilots, BCH(511, 421, 10) on QPSK,
//! three replicas, noise variance 0.1). Unknown keys are rejected.
//!
//! ```toml
//! k_a = [300, 600, 900]
//! sic = ["chb", "pab"]
//! instantaneous = [false, true]
//! frames = 200
//! seed = 7
//! ```

use std::path::Path;

use gfcsa_core::channel::{Coherence, NoiseSpec};
use gfcsa_core::frame::{FrameSpec, PhyConfig};
use gfcsa_core::mac::{FrameConfig, Protocol};
use gfcsa_core::receiver::{ReceiverMode, Schedule, SicAlgorithm};
use gfcsa_core::signal::{CodeSpec, Constellation};
use gfcsa_core::stats::Z95;
use serde::{Deserialize, Deserializer, Serialize};

use crate::campaign::slots_from_latency;
use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKey {
    Baseline,
    ScAck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceKey {
    PerSlot,
    PerUser,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SicKey {
    Chb,
    Pab,
    Prce,
    LogicalSic,
    LogicalNosic,
}

impl ProtocolKey {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKey::Baseline => "baseline",
            ProtocolKey::ScAck => "sc_ack",
        }
    }
}

impl CoherenceKey {
    pub fn name(self) -> &'static str {
        match self {
            CoherenceKey::PerSlot => "per_slot",
            CoherenceKey::PerUser => "per_user",
        }
    }
}

impl SicKey {
    pub fn name(self) -> &'static str {
        match self {
            SicKey::Chb => "chb",
            SicKey::Pab => "pab",
            SicKey::Prce => "prce",
            SicKey::LogicalSic => "logical_sic",
            SicKey::LogicalNosic => "logical_nosic",
        }
    }

    fn algorithm(self) -> Option<SicAlgorithm> {
        match self {
            SicKey::Chb => Some(SicAlgorithm::Chb),
            SicKey::Pab => Some(SicAlgorithm::Pab),
            SicKey::Prce => Some(SicAlgorithm::Prce),
            SicKey::LogicalSic | SicKey::LogicalNosic => None,
        }
    }
}

/// One receiver evaluated in a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKey {
    Phy(ReceiverMode),
    LogicalSic,
    LogicalNosic,
}

impl ModeKey {
    pub fn sic_name(self) -> &'static str {
        match self {
            ModeKey::Phy(m) => match m.sic {
                SicAlgorithm::Chb => "chb",
                SicAlgorithm::Pab => "pab",
                SicAlgorithm::Prce => "prce",
            },
            ModeKey::LogicalSic => "logical_sic",
            ModeKey::LogicalNosic => "logical_nosic",
        }
    }

    pub fn instantaneous(self) -> bool {
        matches!(self, ModeKey::Phy(m) if m.schedule == Schedule::Instantaneous)
    }

    /// Short label such as `pab+ic`.
    pub fn label(self) -> String {
        if self.instantaneous() {
            format!("{}+ic", self.sic_name())
        } else {
            self.sic_name().to_string()
        }
    }
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    /// Ω in seconds.
    pub latency_budget: f64,
    /// B_s in symbols per second.
    pub symbol_rate: f64,
    pub antennas: usize,
    pub n_pilots: usize,
    /// N_D; must equal the codeword length in symbols.
    pub payload_symbols: usize,
    pub repetitions: usize,
    pub noise_var: f64,
    pub constellation_order: usize,
    pub code_n: usize,
    pub code_k: usize,
    pub code_t: usize,
    pub code_n_extra: usize,
    pub protocol: ProtocolKey,
    #[serde(deserialize_with = "one_or_many")]
    pub sic: Vec<SicKey>,
    #[serde(deserialize_with = "one_or_many")]
    pub instantaneous: Vec<bool>,
    pub coherence: CoherenceKey,
    #[serde(deserialize_with = "one_or_many")]
    pub k_a: Vec<usize>,
    /// Frames per point. When absent, chosen so that the 95% interval half
    /// width is at most a third of `target_plr` at that point.
    pub frames: Option<usize>,
    pub target_plr: f64,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            latency_budget: 0.05,
            symbol_rate: 1e6,
            antennas: 256,
            n_pilots: 64,
            payload_symbols: 256,
            repetitions: 3,
            noise_var: 0.1,
            constellation_order: 4,
            code_n: 511,
            code_k: 421,
            code_t: 10,
            code_n_extra: 33,
            protocol: ProtocolKey::Baseline,
            sic: vec![SicKey::Chb],
            instantaneous: vec![false],
            coherence: CoherenceKey::PerSlot,
            k_a: vec![100, 300, 500],
            frames: None,
            target_plr: 1e-3,
            seed: 1,
            workers: 0,
        }
    }
}

/// Parsed TOML table plus `key=value` overrides, deserialized at the end so
/// overrides go through the same unknown-key check as the file.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    table: toml::Table,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        Ok(Self { table })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text).map_err(|e| match e {
            SimError::Config(m) => SimError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Applies `key=value`. The value is read as a TOML value and falls back
    /// to a bare string, so `sic=pab` and `k_a=[100,200]` both work.
    pub fn set(&mut self, assignment: &str) -> Result<&mut Self> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| SimError::Config(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        let value = value.trim();
        let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        self.table.insert(key.to_string(), parsed);
        Ok(self)
    }

    pub fn set_value(&mut self, key: &str, value: impl Into<toml::Value>) -> &mut Self {
        self.table.insert(key.to_string(), value.into());
        self
    }

    pub fn build(&self) -> Result<CampaignConfig> {
        toml::Value::Table(self.table.clone())
            .try_into()
            .map_err(|e: toml::de::Error| SimError::Config(e.to_string().trim().to_string()))
    }
}

/// A configuration checked for consistency, with derived quantities.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub cfg: CampaignConfig,
    pub n_slots: usize,
    pub modes: Vec<ModeKey>,
    pub code: CodeSpec,
    pub constellation: Constellation,
}

impl Campaign {
    pub fn new(cfg: CampaignConfig) -> Result<Self> {
        let bad = |m: String| Err(SimError::Config(m));
        for (name, v) in [
            ("antennas", cfg.antennas),
            ("n_pilots", cfg.n_pilots),
            ("payload_symbols", cfg.payload_symbols),
            ("repetitions", cfg.repetitions),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if !(cfg.latency_budget > 0.0 && cfg.symbol_rate > 0.0) {
            return bad("latency_budget and symbol_rate must be positive".into());
        }
        if !(cfg.target_plr > 0.0 && cfg.target_plr < 1.0) {
            return bad(format!(
                "target_plr must be in (0, 1), got {}",
                cfg.target_plr
            ));
        }
        if cfg.frames == Some(0) {
            return bad("frames must be positive".into());
        }
        NoiseSpec::new(cfg.noise_var)?;
        let constellation = Constellation::new(cfg.constellation_order)?;
        let code = CodeSpec::new(cfg.code_n, cfg.code_k, cfg.code_t, cfg.code_n_extra)?;
        let symbols = code.symbols(constellation.bits_per_symbol());
        if symbols != cfg.payload_symbols {
            return bad(format!(
                "payload_symbols = {} but a {}-bit codeword on {}-QAM takes {symbols} symbols",
                cfg.payload_symbols, cfg.code_n, cfg.constellation_order
            ));
        }
        let n_slots = slots_from_latency(
            cfg.latency_budget,
            cfg.symbol_rate,
            cfg.n_pilots,
            cfg.payload_symbols,
            cfg.repetitions,
        )?;
        if cfg.sic.is_empty() || cfg.instantaneous.is_empty() || cfg.k_a.is_empty() {
            return bad("sic, instantaneous and k_a need at least one entry".into());
        }
        let mut modes = Vec::new();
        for &sic in &cfg.sic {
            match sic.algorithm() {
                Some(alg) => {
                    for &ic in &cfg.instantaneous {
                        if cfg.protocol == ProtocolKey::ScAck && !ic {
                            return bad(format!(
                                "protocol sc_ack needs instantaneous cancellation, but {} without it was requested",
                                sic.name()
                            ));
                        }
                        let schedule = if ic {
                            Schedule::Instantaneous
                        } else {
                            Schedule::Plain
                        };
                        modes.push(ModeKey::Phy(ReceiverMode::new(alg, schedule)));
                    }
                }
                None if sic == SicKey::LogicalSic => modes.push(ModeKey::LogicalSic),
                None => modes.push(ModeKey::LogicalNosic),
            }
        }
        let mut seen = std::collections::HashSet::new();
        modes.retain(|m| seen.insert(*m));
        let campaign = Self {
            cfg,
            n_slots,
            modes,
            code,
            constellation,
        };
        campaign.frame_spec(1)?.validate()?;
        Ok(campaign)
    }

    pub fn frame_spec(&self, k_a: usize) -> Result<FrameSpec> {
        Ok(FrameSpec {
            mac: FrameConfig {
                n_slots: self.n_slots,
                n_pilots: self.cfg.n_pilots,
                repetitions: self.cfg.repetitions,
                k_active: k_a,
                protocol: match self.cfg.protocol {
                    ProtocolKey::Baseline => Protocol::Baseline,
                    ProtocolKey::ScAck => Protocol::ScAck,
                },
                coherence: match self.cfg.coherence {
                    CoherenceKey::PerSlot => Coherence::PerSlot,
                    CoherenceKey::PerUser => Coherence::PerUser,
                },
            },
            phy: PhyConfig {
                antennas: self.cfg.antennas,
                noise: NoiseSpec::new(self.cfg.noise_var)?,
                code: self.code,
                constellation: self.constellation.clone(),
            },
        })
    }

    /// Frames simulated at `k_a` active users.
    pub fn frames_at(&self, k_a: usize) -> usize {
        if k_a == 0 {
            return 0;
        }
        self.cfg.frames.unwrap_or_else(|| {
            // half width z·sqrt(p/n) <= p/3  ⇔  n >= 9 z² / p
            let users = 9.0 * Z95 * Z95 / self.cfg.target_plr;
            ((users / k_a as f64).ceil() as usize).max(1)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_describe_the_reference_system() {
        let c = Campaign::new(CampaignConfig::default()).unwrap();
        assert_eq!(c.n_slots, 78);
        assert_eq!(
            c.modes,
            [ModeKey::Phy(ReceiverMode::new(
                SicAlgorithm::Chb,
                Schedule::Plain
            ))]
        );
        // 34.6 thousand users are needed at 1e-3
        assert_eq!(c.frames_at(650), 54);
        assert_eq!(c.frames_at(0), 0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ConfigBuilder::from_str("antenas = 64")
            .unwrap()
            .build()
            .unwrap_err();
        assert!(
            matches!(err, SimError::Config(ref m) if m.contains("antenas")),
            "{err}"
        );
        let mut b = ConfigBuilder::new();
        b.set("seeed=3").unwrap();
        assert!(matches!(b.build(), Err(SimError::Config(_))));
    }

    #[test]
    fn scalars_and_lists_are_both_accepted() {
        let mut b =
            ConfigBuilder::from_str("sic = \"pab\"\nk_a = 500\ninstantaneous = [false, true]")
                .unwrap();
        b.set("coherence=per_user")
            .unwrap()
            .set("noise_var=0")
            .unwrap();
        let cfg = b.build().unwrap();
        assert_eq!(cfg.sic, [SicKey::Pab]);
        assert_eq!(cfg.k_a, [500]);
        assert_eq!(cfg.coherence, CoherenceKey::PerUser);
        assert_eq!(cfg.noise_var, 0.0);
        let c = Campaign::new(cfg).unwrap();
        assert_eq!(c.modes.len(), 2);
        assert_eq!(c.modes[1].label(), "pab+ic");
    }

    #[test]
    fn inconsistent_configurations_are_rejected() {
        let check = |text: &str| {
            let cfg = ConfigBuilder::from_str(text).unwrap().build().unwrap();
            assert!(
                matches!(Campaign::new(cfg), Err(SimError::Config(_))),
                "{text}"
            );
        };
        check("payload_symbols = 128");
        check("latency_budget = 0.001");
        check("protocol = \"sc_ack\"");
        check("n_pilots = 48");
        check("repetitions = 0");
        check("noise_var = -1.0");
        check("k_a = []");
        check("frames = 0");
        check("constellation_order = 8");
    }

    #[test]
    fn payload_length_follows_the_code() {
        let cfg = ConfigBuilder::from_str(
            "payload_symbols = 128\ncode_n = 255\ncode_k = 215\ncode_t = 5",
        )
        .unwrap()
        .build()
        .unwrap();
        assert_eq!(Campaign::new(cfg).unwrap().n_slots, 130);
    }
}
