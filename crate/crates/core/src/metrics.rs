//! Per-trial SINR evaluation at the four secondary links and the outage
//! decision.

use crate::params::{Node, Su, SystemParameters};
use crate::power::{EffectiveGains, PowerAllocation};
use crate::topology::{path_loss, Topology};

/// SINRs of one trial and the resulting outage flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// Relay SINR for SU A's uplink (slot 1).
    pub gamma_rs_1: f64,
    /// Relay SINR for SU B's uplink (slot 2).
    pub gamma_rs_2: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub outage: bool,
    /// Some optimal split collapsed to zero: the relay decode constraint was
    /// infeasible, so the trial was an outage before the downlink was even
    /// evaluated.
    pub pre_doomed: bool,
}

impl TrialOutcome {
    pub fn sinrs(&self) -> [f64; 4] {
        [self.gamma_rs_1, self.gamma_rs_2, self.gamma_a, self.gamma_b]
    }
}

/// Relay-side SINR of the given SU's uplink slot:
/// `p_i·r^-τ·g_rs / (1 + relay leakage)`.
pub fn snr_relay(
    su: Su,
    gains: &EffectiveGains,
    alloc: &PowerAllocation,
    params: &SystemParameters,
    topo: &Topology,
) -> f64 {
    let g = gains.su(su);
    alloc.harvested(su)
        * path_loss(topo.distance(su.node(), Node::Rs), params.path_loss_exp)
        * g.relay_side_gain
        / (1.0 + g.relay_leakage)
}

/// SU-side slot-3 SINR: `p_rs·r^-τ·ρ_i·w_i²·g_i / (1 + SU leakage)` with
/// `w_A = X_A`, `w_B = X_B`.
pub fn snr_su(
    su: Su,
    gains: &EffectiveGains,
    alloc: &PowerAllocation,
    params: &SystemParameters,
    topo: &Topology,
) -> f64 {
    let g = gains.su(su);
    let w = alloc.weight(su);
    params.relay_power
        * path_loss(topo.distance(su.node(), Node::Rs), params.path_loss_exp)
        * alloc.rho(su)
        * w
        * w
        * g.su_side_gain
        / (1.0 + g.su_leakage)
}

/// Outage happens iff any of the four link SINRs falls below the threshold;
/// success requires all four to reach it (non-strict).
///
/// The comparison carries a 1e-9 relative guard band: the optimal split
/// makes the uplink constraint exactly active, so the recomputed relay SINR
/// sits on the threshold up to rounding and must not flip the decision.
pub fn is_outage(sinrs: [f64; 4], gamma_th: f64) -> bool {
    let edge = gamma_th * (1.0 - 1e-9);
    sinrs.iter().any(|&g| g < edge)
}
