//! Campaign orchestration for the grant-free coded slotted ALOHA simulator:
//! configuration, seeded parallel frame execution, aggregation into packet
//! loss and sum rate, and CSV/JSON output.

pub mod analytic;
pub mod campaign;
pub mod config;
pub mod error;
pub mod output;

pub use campaign::{
    run_campaign, run_point, slots_from_latency, sum_rate, CampaignRow, RunOptions,
};
pub use config::{Campaign, CampaignConfig, ConfigBuilder};
pub use error::{Result, SimError};
