//! Closed-form models: interference variance after MRC, symbol and packet
//! failure probabilities of a singleton user, the no-SIC packet loss rate and
//! the decoding-cost model.
//!
//! The interference formulas treat the cross terms `h_kᴴ h_m x(m)`,
//! `z_jᴴ h_m x(m)`, `h_kᴴ Z` and `z_jᴴ Z` as independent entry by entry and
//! the resulting sum as complex Gaussian. That approximation is built into
//! every function here; `experiment` provides the matching simulations.

mod complexity;
mod interference;
mod pfail;
mod quadrature;

pub use complexity::ComplexityModel;
pub use interference::{
    es_n0_equivalent, symbol_error_given_w, var_interference_initial, var_interference_post_chb,
    InterferenceScenario, QamErrorParams,
};
pub use pfail::{
    chi_square_log_density, p_fail, p_fail_given_w, p_fail_mean_channel, plr_no_sic, PfailCode,
};
pub use quadrature::{integrate, Integral, Tolerance};
