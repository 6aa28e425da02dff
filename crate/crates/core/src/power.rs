//! Closed-form power-splitting ratios, harvested power and the relay
//! power-control factor, together with a brute-force grid oracle used to
//! validate them.
//!
//! The uplink decode constraint `γ_rs ≥ γ_th` together with the harvested
//! power expression collapses to `(1 - ρ_i)·Z_i ≥ γ_th`, so the optimal
//! split is `ρ_i* = max(1 - γ_th/Z_i, 0)` and the constraint is active
//! whenever `ρ_i* > 0`. The downlink max-min power-control factor equalises
//! the two SU SINRs.
//!
//! All desired powers are divided by `1 +` the post-filter interference
//! leakage of the corresponding receiver; with exact alignment the leakage
//! vanishes and the expressions reduce to their ideal forms.

use crate::beamformer::BeamformerSet;
use crate::channel::ChannelRealization;
use crate::error::ModelError;
use crate::params::{Node, Su, SystemParameters};
use crate::topology::{path_loss, Topology};

/// Post-filter scalar gains of one secondary user's links.
///
/// `relay_side_gain` and `su_side_gain` are the unscaled `|u^H H v|²`
/// factors of the uplink and downlink; the harvest gains are `‖H v‖²` of
/// the two slot-3 transmitters; the leakage fields are already scaled by
/// transmit power and path loss (linear powers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuGains {
    pub relay_side_gain: f64,
    pub su_side_gain: f64,
    pub harvest_rs: f64,
    pub harvest_rp: f64,
    /// Residual interference power at the relay in this SU's uplink slot.
    pub relay_leakage: f64,
    /// Residual interference power at this SU's slot-3 receiver.
    pub su_leakage: f64,
}

/// Effective gains for both secondary users under one beamformer set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveGains {
    pub a: SuGains,
    pub b: SuGains,
}

fn scalar_gain(u: &crate::CVec, h: &crate::CMat, v: &crate::CVec) -> f64 {
    (u.adjoint() * h * v)[(0, 0)].norm_sqr()
}

impl EffectiveGains {
    /// Evaluates every gain and leakage term for the current beamformers.
    pub fn compute(
        ch: &ChannelRealization,
        params: &SystemParameters,
        topo: &Topology,
        bf: &BeamformerSet,
    ) -> Self {
        let tau = params.path_loss_exp;
        let su = |su: Su| {
            let (node, v_i, u_slot, u_i) = match su {
                Su::A => (Node::A, &bf.v_a, &bf.u_rs[0], &bf.u_a),
                Su::B => (Node::B, &bf.v_b, &bf.u_rs[1], &bf.u_b),
            };
            let pu = su.cochannel_pu();
            let v_pu = match su {
                Su::A => &bf.v_p1,
                Su::B => &bf.v_p2,
            };
            SuGains {
                relay_side_gain: scalar_gain(u_slot, ch.h(Node::Rs, node), v_i),
                su_side_gain: scalar_gain(u_i, ch.h(node, Node::Rs), &bf.v_rs),
                harvest_rs: (ch.h(node, Node::Rs) * &bf.v_rs).norm_squared(),
                harvest_rp: (ch.h(node, Node::Rp) * &bf.v_rp).norm_squared(),
                relay_leakage: params.power(pu)
                    * path_loss(topo.distance(Node::Rs, pu), tau)
                    * scalar_gain(u_slot, ch.h(Node::Rs, pu), v_pu),
                su_leakage: params.primary_relay_power
                    * path_loss(topo.distance(node, Node::Rp), tau)
                    * scalar_gain(u_i, ch.h(node, Node::Rp), &bf.v_rp),
            }
        };
        EffectiveGains {
            a: su(Su::A),
            b: su(Su::B),
        }
    }

    pub fn su(&self, su: Su) -> &SuGains {
        match su {
            Su::A => &self.a,
            Su::B => &self.b,
        }
    }
}

/// Total slot-3 power available for harvesting at an SU (before the split
/// and conversion): `p_rs·r^-τ·‖H v_rs‖² + p_rp·r^-τ·‖H v_rp‖²`.
fn incident_power(gains: &SuGains, params: &SystemParameters, topo: &Topology, su: Su) -> f64 {
    let tau = params.path_loss_exp;
    let node = su.node();
    params.relay_power * path_loss(topo.distance(node, Node::Rs), tau) * gains.harvest_rs
        + params.primary_relay_power
            * path_loss(topo.distance(node, Node::Rp), tau)
            * gains.harvest_rp
}

/// Uplink budget factor `Z_i`: the relay-side SINR obtained per unit of
/// harvest share, so the decode constraint reads `(1 - ρ_i)·Z_i ≥ γ_th`.
pub fn compute_z(
    gains: &EffectiveGains,
    params: &SystemParameters,
    topo: &Topology,
    su: Su,
) -> f64 {
    let g = gains.su(su);
    path_loss(topo.distance(su.node(), Node::Rs), params.path_loss_exp)
        * params.conversion_eff
        * g.relay_side_gain
        / (1.0 + g.relay_leakage)
        * incident_power(g, params, topo, su)
}

/// Optimal split with both complements carried exactly.
///
/// `harvest_share = 1 - rho` is computed directly as `min(γ_th/Z, 1)` so
/// the downstream relay SINR reproduces `γ_th` without cancellation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsSplit {
    pub rho: f64,
    pub harvest_share: f64,
}

/// Closed-form optimal power-splitting ratio `ρ* = max(1 - γ_th/Z, 0)`.
///
/// `ρ* = 0` signals that even full harvesting cannot satisfy the relay
/// decode constraint: the trial is a guaranteed outage, not an error.
pub fn optimal_ps(z: f64, gamma_th: f64) -> f64 {
    optimal_split(z, gamma_th).rho
}

/// As [`optimal_ps`], also returning the exact harvest share.
pub fn optimal_split(z: f64, gamma_th: f64) -> PsSplit {
    if z <= gamma_th {
        return PsSplit {
            rho: 0.0,
            harvest_share: 1.0,
        };
    }
    let share = gamma_th / z;
    PsSplit {
        rho: 1.0 - share,
        harvest_share: share,
    }
}

/// Harvested SU transmit power `p_i = η·(1 - ρ_i)·(incident slot-3 power)`;
/// the AWGN contribution is ignored.
pub fn harvested_power(
    rho: f64,
    gains: &EffectiveGains,
    params: &SystemParameters,
    topo: &Topology,
    su: Su,
) -> f64 {
    harvested_power_from_share(1.0 - rho, gains, params, topo, su)
}

/// [`harvested_power`] parameterised by the harvest share `1 - ρ` directly.
pub fn harvested_power_from_share(
    share: f64,
    gains: &EffectiveGains,
    params: &SystemParameters,
    topo: &Topology,
    su: Su,
) -> f64 {
    params.conversion_eff * share * incident_power(gains.su(su), params, topo, su)
}

/// Relay power-control weights
/// `X_A = (1-θ)/sqrt(θ² + (1-θ)²)`, `X_B = θ/sqrt(θ² + (1-θ)²)`.
pub fn relay_weights(theta: f64) -> (f64, f64) {
    let d = theta.hypot(1.0 - theta);
    ((1.0 - theta) / d, theta / d)
}

/// The max-min power-control factor with its weights computed stably from
/// the same intermediates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSolution {
    pub theta: f64,
    pub x_a: f64,
    pub x_b: f64,
}

/// Optimal power-control factor `θ* = a/(a+b)` with
/// `a = sqrt(r_A^-τ·ρ_A·g_A/(1+l_A))` and `b` its B-side counterpart; at
/// `θ*` the two SU SINRs are equal.
pub fn optimal_theta(
    gains: &EffectiveGains,
    rho_a: f64,
    rho_b: f64,
    topo: &Topology,
    tau: f64,
) -> Result<f64, ModelError> {
    optimal_theta_weights(gains, rho_a, rho_b, topo, tau).map(|s| s.theta)
}

/// As [`optimal_theta`], returning the weights `X_A = b/hypot(a,b)`,
/// `X_B = a/hypot(a,b)` without going back through `θ`.
pub fn optimal_theta_weights(
    gains: &EffectiveGains,
    rho_a: f64,
    rho_b: f64,
    topo: &Topology,
    tau: f64,
) -> Result<ThetaSolution, ModelError> {
    let side = |su: Su, rho: f64| {
        let g = gains.su(su);
        (path_loss(topo.distance(su.node(), Node::Rs), tau) * rho * g.su_side_gain
            / (1.0 + g.su_leakage))
            .sqrt()
    };
    let a = side(Su::A, rho_a);
    let b = side(Su::B, rho_b);
    if a + b == 0.0 {
        return Err(ModelError::DegenerateChannel(
            "both SU downlink gains vanish; power-control factor undefined".into(),
        ));
    }
    let h = a.hypot(b);
    Ok(ThetaSolution {
        theta: a / (a + b),
        x_a: b / h,
        x_b: a / h,
    })
}

/// Power-allocation state of one trial: splits, control factor, weights and
/// the harvested SU transmit powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub rho_a: f64,
    pub rho_b: f64,
    pub theta: f64,
    pub x_a: f64,
    pub x_b: f64,
    pub p_a: f64,
    pub p_b: f64,
}

impl PowerAllocation {
    pub fn rho(&self, su: Su) -> f64 {
        match su {
            Su::A => self.rho_a,
            Su::B => self.rho_b,
        }
    }

    pub fn harvested(&self, su: Su) -> f64 {
        match su {
            Su::A => self.p_a,
            Su::B => self.p_b,
        }
    }

    /// Weight carried by the stream decoded at this SU (`X_A` for A, `X_B`
    /// for B), following the max-min optimisation pairing.
    pub fn weight(&self, su: Su) -> f64 {
        match su {
            Su::A => self.x_a,
            Su::B => self.x_b,
        }
    }
}

/// Best feasible grid point found by [`grid_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    pub rho_a: f64,
    pub rho_b: f64,
    pub theta: f64,
    pub min_sinr: f64,
}

/// Exhaustive search of `min(γ_A, γ_B)` over a uniform grid of
/// `(ρ_A, ρ_B, θ) ∈ [0,1]³` subject to both relay decode constraints.
///
/// Every SINR is re-evaluated longhand from the gains, independently of the
/// closed-form routines this oracle validates. Returns `None` when no grid
/// point is feasible (consistent with `ρ* = 0`).
pub fn grid_oracle(
    gains: &EffectiveGains,
    params: &SystemParameters,
    topo: &Topology,
    grid_size: usize,
) -> Result<Option<GridOptimum>, ModelError> {
    if grid_size < 11 {
        return Err(ModelError::InvalidParameter(format!(
            "oracle grid must have at least 11 points, got {grid_size}"
        )));
    }
    let tau = params.path_loss_exp;
    let gamma_th = params.threshold_snr;
    let grid = |k: usize| k as f64 / (grid_size - 1) as f64;

    // Uplink feasibility and the downlink prefactor depend on one rho only,
    // so both are tabulated per SU before the theta scan.
    let per_su = |su: Su| -> Vec<(f64, f64)> {
        let g = gains.su(su);
        let pl_rs = path_loss(topo.distance(su.node(), Node::Rs), tau);
        let pl_rp = path_loss(topo.distance(su.node(), Node::Rp), tau);
        (0..grid_size)
            .filter_map(|k| {
                let rho = grid(k);
                let p_harv = params.conversion_eff
                    * (1.0 - rho)
                    * (params.relay_power * pl_rs * g.harvest_rs
                        + params.primary_relay_power * pl_rp * g.harvest_rp);
                let gamma_relay = p_harv * pl_rs * g.relay_side_gain / (1.0 + g.relay_leakage);
                if gamma_relay < gamma_th {
                    return None;
                }
                let down = params.relay_power * pl_rs * rho * g.su_side_gain / (1.0 + g.su_leakage);
                Some((rho, down))
            })
            .collect()
    };
    let feas_a = per_su(Su::A);
    let feas_b = per_su(Su::B);
    if feas_a.is_empty() || feas_b.is_empty() {
        return Ok(None);
    }

    let mut best: Option<GridOptimum> = None;
    for k in 0..grid_size {
        let theta = grid(k);
        let denom = theta * theta + (1.0 - theta) * (1.0 - theta);
        let wa2 = (1.0 - theta) * (1.0 - theta) / denom;
        let wb2 = theta * theta / denom;
        // min(gamma_a, gamma_b) is maximised by the largest feasible rho on
        // each side independently, but the full scan is kept: this is the
        // brute-force reference, not a solver.
        for &(rho_a, down_a) in &feas_a {
            let gamma_a = down_a * wa2;
            for &(rho_b, down_b) in &feas_b {
                let m = gamma_a.min(down_b * wb2);
                if best.is_none_or(|b| m > b.min_sinr) {
                    best = Some(GridOptimum {
                        rho_a,
                        rho_b,
                        theta,
                        min_sinr: m,
                    });
                }
            }
        }
    }
    Ok(best)
}
