//! Per-trial orchestration of the two-step outage minimisation and
//! Monte-Carlo estimation of the outage probability.
//!
//! Each trial owns a counter-based random stream derived from
//! `(master seed, trial index)`, so estimates are a pure function of the
//! configuration and seed, independent of how trials are scheduled across
//! workers. All schemes at one sweep point share those streams (common
//! random numbers): paired schemes see identical channel realizations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beamformer::BeamformerSet;
use crate::channel::ChannelRealization;
use crate::error::ModelError;
use crate::ia::{run_ia, IaDiagnostics};
use crate::metrics::{is_outage, snr_relay, snr_su, TrialOutcome};
use crate::params::{db_to_linear, Su, SystemParameters};
use crate::power::{
    compute_z, harvested_power_from_share, optimal_split, optimal_theta_weights, EffectiveGains,
    PowerAllocation,
};
use crate::topology::Topology;

/// Transmission scheme under test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Closed-form ρ* and θ* with MMSE-aligned beamformers.
    Proposed,
    /// Fixed equal power-splitting ratio at both SUs, optimal θ, aligned
    /// beamformers.
    StaticEqualPs(f64),
    /// Optimal ρ* and θ* over matched-filter (MRT/MRC) beamformers.
    MrtMrc,
    /// Optimal ρ* with the relay power split equally (θ = 0.5), aligned
    /// beamformers.
    StaticPowerControl,
}

impl Scheme {
    /// Stable identifier used in CSV output and config files.
    pub fn name(&self) -> String {
        match self {
            Scheme::Proposed => "proposed".into(),
            Scheme::StaticEqualPs(rho) => format!("static_ps_{rho}"),
            Scheme::MrtMrc => "mrt_mrc".into(),
            Scheme::StaticPowerControl => "static_power_control".into(),
        }
    }

    /// The benchmark set evaluated in the experiments: the proposed scheme,
    /// static equal splits 0.3/0.5/0.7, MRT-MRC and static power control.
    pub fn all() -> Vec<Scheme> {
        vec![
            Scheme::Proposed,
            Scheme::StaticEqualPs(0.3),
            Scheme::StaticEqualPs(0.5),
            Scheme::StaticEqualPs(0.7),
            Scheme::MrtMrc,
            Scheme::StaticPowerControl,
        ]
    }

    fn uses_alignment(&self) -> bool {
        !matches!(self, Scheme::MrtMrc)
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(Scheme::Proposed),
            "mrt_mrc" => Ok(Scheme::MrtMrc),
            "static_power_control" => Ok(Scheme::StaticPowerControl),
            other => {
                if let Some(rho) = other.strip_prefix("static_ps_") {
                    let rho: f64 = rho.parse().map_err(|_| {
                        ModelError::InvalidParameter(format!("bad static PS ratio in `{other}`"))
                    })?;
                    if !(0.0..=1.0).contains(&rho) {
                        return Err(ModelError::InvalidParameter(format!(
                            "static PS ratio must be in [0, 1], got {rho}"
                        )));
                    }
                    Ok(Scheme::StaticEqualPs(rho))
                } else {
                    Err(ModelError::InvalidParameter(format!(
                        "unknown scheme `{other}`"
                    )))
                }
            }
        }
    }
}

/// Power allocation for the current gains under a scheme's policy.
pub fn allocate(
    scheme: &Scheme,
    gains: &EffectiveGains,
    params: &SystemParameters,
    topo: &Topology,
) -> PowerAllocation {
    let split = |su: Su| match scheme {
        Scheme::StaticEqualPs(rho) => (*rho, 1.0 - rho),
        _ => {
            let s = optimal_split(compute_z(gains, params, topo, su), params.threshold_snr);
            (s.rho, s.harvest_share)
        }
    };
    let (rho_a, share_a) = split(Su::A);
    let (rho_b, share_b) = split(Su::B);
    let p_a = harvested_power_from_share(share_a, gains, params, topo, Su::A);
    let p_b = harvested_power_from_share(share_b, gains, params, topo, Su::B);
    let even = (
        0.5,
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
    );
    let (theta, x_a, x_b) = match scheme {
        Scheme::StaticPowerControl => even,
        _ if rho_a > 0.0 && rho_b > 0.0 => {
            match optimal_theta_weights(gains, rho_a, rho_b, topo, params.path_loss_exp) {
                Ok(t) => (t.theta, t.x_a, t.x_b),
                // Degenerate downlink: the trial is an outage either way.
                Err(_) => even,
            }
        }
        // A zero split already dooms the trial; the factor is irrelevant.
        _ => even,
    };
    PowerAllocation {
        rho_a,
        rho_b,
        theta,
        x_a,
        x_b,
        p_a,
        p_b,
    }
}

/// Everything the trial produced, for tests and diagnostics-oriented tools.
#[derive(Debug, Clone)]
pub struct TrialArtifacts {
    pub outcome: TrialOutcome,
    pub gains: EffectiveGains,
    pub alloc: PowerAllocation,
    pub beamformers: BeamformerSet,
    pub diagnostics: Option<IaDiagnostics>,
}

/// Runs one trial: sample channels, design beamformers per the scheme,
/// couple power allocation and alignment over the outer iterations, then
/// evaluate the four SINRs with a final allocation recomputed from the final
/// beamformers (which keeps the uplink constraint exactly active).
pub fn run_trial(
    scheme: &Scheme,
    params: &SystemParameters,
    topo: &Topology,
    rng: &mut ChaCha8Rng,
) -> TrialOutcome {
    run_trial_detailed(scheme, params, topo, rng).outcome
}

/// As [`run_trial`], also returning the final gains, allocation, beamformers
/// and alignment diagnostics.
pub fn run_trial_detailed(
    scheme: &Scheme,
    params: &SystemParameters,
    topo: &Topology,
    rng: &mut ChaCha8Rng,
) -> TrialArtifacts {
    let ch = ChannelRealization::sample(params, rng);
    let mut diagnostics = None;
    let bf = if scheme.uses_alignment() {
        let mut bf = BeamformerSet::random(params, rng);
        for _ in 0..params.max_outer_iters {
            let gains = EffectiveGains::compute(&ch, params, topo, &bf);
            let alloc = allocate(scheme, &gains, params, topo);
            let (aligned, diag) = run_ia(
                &ch,
                params,
                topo,
                &alloc,
                bf,
                params.max_inner_iters,
                params.inner_tolerance,
            );
            bf = aligned;
            diagnostics = Some(diag);
        }
        bf
    } else {
        BeamformerSet::mrt_mrc(&ch, params)
    };

    let gains = EffectiveGains::compute(&ch, params, topo, &bf);
    let alloc = allocate(scheme, &gains, params, topo);
    let gamma_rs_1 = snr_relay(Su::A, &gains, &alloc, params, topo);
    let gamma_rs_2 = snr_relay(Su::B, &gains, &alloc, params, topo);
    let gamma_a = snr_su(Su::A, &gains, &alloc, params, topo);
    let gamma_b = snr_su(Su::B, &gains, &alloc, params, topo);
    let pre_doomed = matches!(
        scheme,
        Scheme::Proposed | Scheme::MrtMrc | Scheme::StaticPowerControl
    ) && (alloc.rho_a == 0.0 || alloc.rho_b == 0.0);
    let outcome = TrialOutcome {
        gamma_rs_1,
        gamma_rs_2,
        gamma_a,
        gamma_b,
        outage: is_outage(
            [gamma_rs_1, gamma_rs_2, gamma_a, gamma_b],
            params.threshold_snr,
        ),
        pre_doomed,
    };
    TrialArtifacts {
        outcome,
        gains,
        alloc,
        beamformers: bf,
        diagnostics,
    }
}

/// The random stream of one trial: ChaCha8 keyed by the master seed with the
/// trial index as the stream number.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Closed-form allocation versus the brute-force grid on one realization.
#[derive(Debug, Clone)]
pub struct OracleCheck {
    /// `min(γ_A, γ_B)` achieved by the closed-form `(ρ_A*, ρ_B*, θ*)`;
    /// zero when a split collapsed (guaranteed outage).
    pub closed_form: f64,
    /// Best feasible grid point, if any.
    pub grid_best: Option<crate::power::GridOptimum>,
    /// `max(0, (grid - closed) / grid)`: how far the closed form fell short
    /// of the grid optimum, relative.
    pub shortfall: f64,
}

/// Runs the full proposed pipeline on the trial's realization and compares
/// the closed-form allocation with [`crate::power::grid_oracle`].
pub fn check_against_oracle(
    params: &SystemParameters,
    topo: &Topology,
    grid_size: usize,
    master_seed: u64,
    trial: u64,
) -> Result<OracleCheck, ModelError> {
    let mut rng = trial_rng(master_seed, trial);
    let art = run_trial_detailed(&Scheme::Proposed, params, topo, &mut rng);
    let closed_form = if art.alloc.rho_a > 0.0 && art.alloc.rho_b > 0.0 {
        art.outcome.gamma_a.min(art.outcome.gamma_b)
    } else {
        0.0
    };
    let grid_best = crate::power::grid_oracle(&art.gains, params, topo, grid_size)?;
    let shortfall = match &grid_best {
        Some(b) if b.min_sinr > 0.0 => ((b.min_sinr - closed_form) / b.min_sinr).max(0.0),
        _ => 0.0,
    };
    Ok(OracleCheck {
        closed_form,
        grid_best,
        shortfall,
    })
}

/// Monte-Carlo outage estimate with a 95% Wilson score interval.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageEstimate {
    pub scheme: Scheme,
    pub sweep_variable: String,
    pub sweep_value: f64,
    pub trials: u64,
    pub outages: u64,
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
}

/// 95% Wilson score interval for `k` successes in `n` Bernoulli trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    // The score interval contains the point estimate; keep that true under
    // floating-point rounding at the k = 0 and k = n corners.
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

/// Estimates the outage probability over `n_trials` independent trials run
/// in parallel; the result does not depend on the worker count.
pub fn estimate_outage(
    scheme: &Scheme,
    params: &SystemParameters,
    topo: &Topology,
    n_trials: u64,
    master_seed: u64,
) -> OutageEstimate {
    assert!(n_trials >= 1, "at least one trial required");
    let outages: u64 = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            u64::from(run_trial(scheme, params, topo, &mut rng).outage)
        })
        .sum();
    let (ci_low, ci_high) = wilson_interval(outages, n_trials);
    OutageEstimate {
        scheme: *scheme,
        sweep_variable: "none".into(),
        sweep_value: 0.0,
        trials: n_trials,
        outages,
        probability: outages as f64 / n_trials as f64,
        ci_low,
        ci_high,
        master_seed,
    }
}

/// Sweepable configuration axes of the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Threshold SNR in dB.
    GammaThDb,
    /// Secondary relay transmit power in dBm.
    PRsDbm,
    /// Antenna count at both SUs (relay and primary counts untouched).
    NSu,
    /// Distance A-relay in meters, with the relay sliding on the 1 m A-B
    /// segment (`r_rs_b = 1 - r_a_rs`).
    RArs,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::GammaThDb => "gamma_th_db",
            SweepVariable::PRsDbm => "p_rs_dbm",
            SweepVariable::NSu => "n_su",
            SweepVariable::RArs => "r_a_rs",
        }
    }

    /// Returns the base configuration moved to the given sweep value.
    pub fn apply(
        &self,
        value: f64,
        params: &SystemParameters,
        topo: &Topology,
    ) -> Result<(SystemParameters, Topology), ModelError> {
        let mut p = params.clone();
        let mut t = topo.clone();
        match self {
            SweepVariable::GammaThDb => p.threshold_snr = db_to_linear(value),
            SweepVariable::PRsDbm => p.relay_power = db_to_linear(value),
            SweepVariable::NSu => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(ModelError::InvalidSweep(format!(
                        "n_su values must be positive integers, got {value}"
                    )));
                }
                p.n_a = value as usize;
                p.n_b = value as usize;
            }
            SweepVariable::RArs => {
                if !(value > 0.0 && value < 1.0) {
                    return Err(ModelError::InvalidSweep(format!(
                        "r_a_rs must lie strictly inside the 1 m A-B segment, got {value}"
                    )));
                }
                t = Topology::from_base(
                    value,
                    1.0 - value,
                    topo.r_rs_rp,
                    topo.r_p1_rp,
                    topo.r_rp_p2,
                )?;
            }
        }
        p.validate()?;
        Ok((p, t))
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gamma_th_db" => Ok(SweepVariable::GammaThDb),
            "p_rs_dbm" => Ok(SweepVariable::PRsDbm),
            "n_su" => Ok(SweepVariable::NSu),
            "r_a_rs" => Ok(SweepVariable::RArs),
            other => Err(ModelError::InvalidSweep(format!(
                "unknown sweep variable `{other}`"
            ))),
        }
    }
}

/// A sweep axis together with its strictly increasing values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.values.is_empty() {
            return Err(ModelError::InvalidSweep(
                "sweep needs at least one value".into(),
            ));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::InvalidSweep(
                "sweep values must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Runs every scheme at every sweep value. All schemes at one value share
/// the per-trial channel streams.
pub fn sweep(
    schemes: &[Scheme],
    params: &SystemParameters,
    topo: &Topology,
    spec: &SweepSpec,
    n_trials: u64,
    master_seed: u64,
) -> Result<Vec<OutageEstimate>, ModelError> {
    spec.validate()?;
    let mut out = Vec::with_capacity(schemes.len() * spec.values.len());
    for &value in &spec.values {
        let (p, t) = spec.variable.apply(value, params, topo)?;
        for scheme in schemes {
            let mut est = estimate_outage(scheme, &p, &t, n_trials, master_seed);
            est.sweep_variable = spec.variable.name().into();
            est.sweep_value = value;
            out.push(est);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::all() {
            let parsed: Scheme = s.name().parse().unwrap();
            assert_eq!(parsed, s);
        }
        assert!("static_ps_1.5".parse::<Scheme>().is_err());
        assert!("bogus".parse::<Scheme>().is_err());
    }

    #[test]
    fn wilson_brackets_the_point_estimate() {
        for (k, n) in [(0u64, 100u64), (1, 100), (50, 100), (100, 100), (3, 10_000)] {
            let (lo, hi) = wilson_interval(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi, "({k}, {n})");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn wilson_width_shrinks_like_inverse_sqrt() {
        let width = |n: u64| {
            let k = n / 100;
            let (lo, hi) = wilson_interval(k, n);
            hi - lo
        };
        // Doubling the trial count shrinks the interval by about 1/sqrt(2).
        let ratio = width(20_000) / width(10_000);
        let expected = 0.5f64.sqrt();
        assert!(
            (ratio / expected - 1.0).abs() < 0.2,
            "ratio {ratio} vs {expected}"
        );
        let ratio = width(40_000) / width(10_000);
        assert!((ratio - 0.5).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        let spec = SweepSpec {
            variable: SweepVariable::GammaThDb,
            values: vec![1.0, 1.0],
        };
        assert!(spec.validate().is_err());
        let spec = SweepSpec {
            variable: SweepVariable::NSu,
            values: vec![2.5],
        };
        let params = SystemParameters::default();
        let topo = Topology::default();
        assert!(spec.variable.apply(2.5, &params, &topo).is_err());
    }

    #[test]
    fn fig5_geometry_complements_distance() {
        let params = SystemParameters::default();
        let topo = Topology::default();
        let (_, t) = SweepVariable::RArs.apply(0.3, &params, &topo).unwrap();
        assert_eq!(t.r_a_rs, 0.3);
        assert_eq!(t.r_rs_b, 0.7);
        // Derived distances are recomputed for the new geometry.
        assert_eq!(t.r_rp_a, 2.0f64.hypot(0.3));
    }

    #[test]
    fn identical_seed_reproduces_trials() {
        let params = SystemParameters {
            max_outer_iters: 2,
            max_inner_iters: 5,
            ..Default::default()
        };
        let topo = Topology::default();
        for scheme in [Scheme::Proposed, Scheme::MrtMrc] {
            let run = || {
                let mut rng = trial_rng(42, 7);
                run_trial(&scheme, &params, &topo, &mut rng)
            };
            assert_eq!(run(), run());
        }
    }
}
