//! System-wide scalar parameters and unit conversions.
//!
//! All powers are kept in linear, noise-referenced units: the AWGN at every
//! receiver has identity covariance, so noise power is pinned at 0 dBm = 1.0
//! and a transmit power quoted in dBm converts directly with
//! [`dbm_to_linear`].

use crate::error::ModelError;

/// The six nodes of the network.
///
/// `A` and `B` are the wireless-powered secondary users, `Rs` their two-way
/// decode-and-forward relay. `P1`/`P2` are the primary pair served by the
/// primary relay `Rp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    A,
    B,
    Rs,
    P1,
    P2,
    Rp,
}

/// One of the two secondary users.
///
/// SU `A` transmits to the relay in time slot 1, SU `B` in slot 2; both
/// receive the relay broadcast in slot 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Su {
    A,
    B,
}

impl Su {
    pub fn node(self) -> Node {
        match self {
            Su::A => Node::A,
            Su::B => Node::B,
        }
    }

    /// Uplink time slot carrying this SU's signal (1 or 2).
    pub fn slot(self) -> usize {
        match self {
            Su::A => 1,
            Su::B => 2,
        }
    }

    /// The primary user transmitting in the same slot.
    pub fn cochannel_pu(self) -> Node {
        match self {
            Su::A => Node::P1,
            Su::B => Node::P2,
        }
    }

    pub fn other(self) -> Su {
        match self {
            Su::A => Su::B,
            Su::B => Su::A,
        }
    }
}

/// Converts a decibel ratio to linear scale, `10^(x/10)`.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Converts a power in dBm to the linear, noise-referenced scale used by the
/// whole model (noise power fixed at 0 dBm = 1.0).
pub fn dbm_to_linear(x_dbm: f64) -> f64 {
    db_to_linear(x_dbm)
}

/// All scalar physical and algorithmic constants.
///
/// Defaults are the simulation settings used throughout: path-loss exponent
/// 2.7, conversion efficiency 0.8, threshold SNR 1 dB, relay power 20 dBm,
/// primary powers 35 dBm, four antennas everywhere, single stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParameters {
    /// Path-loss exponent τ (≥ 2).
    pub path_loss_exp: f64,
    /// RF-to-DC power conversion efficiency η, in (0, 1].
    pub conversion_eff: f64,
    /// Threshold SNR γ_th as a linear power ratio (> 0).
    pub threshold_snr: f64,
    /// Secondary relay transmit power (linear, > 0).
    pub relay_power: f64,
    /// Primary user 1 transmit power (linear, ≥ 0; zero disables it).
    pub p1_power: f64,
    /// Primary user 2 transmit power (linear, ≥ 0).
    pub p2_power: f64,
    /// Primary relay transmit power (linear, ≥ 0).
    pub primary_relay_power: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub n_rs: usize,
    pub n_p1: usize,
    pub n_p2: usize,
    pub n_rp: usize,
    /// Data streams per node; only d = 1 is supported.
    pub streams: usize,
    /// Outer iterations coupling power allocation and beamformer design.
    pub max_outer_iters: usize,
    /// Cap on MMSE alignment sweeps per outer iteration.
    pub max_inner_iters: usize,
    /// Frobenius-change stopping tolerance of the alignment loop.
    pub inner_tolerance: f64,
}

impl Default for SystemParameters {
    fn default() -> Self {
        SystemParameters {
            path_loss_exp: 2.7,
            conversion_eff: 0.8,
            threshold_snr: db_to_linear(1.0),
            relay_power: dbm_to_linear(20.0),
            p1_power: dbm_to_linear(35.0),
            p2_power: dbm_to_linear(35.0),
            primary_relay_power: dbm_to_linear(35.0),
            n_a: 4,
            n_b: 4,
            n_rs: 4,
            n_p1: 4,
            n_p2: 4,
            n_rp: 4,
            streams: 1,
            max_outer_iters: 5,
            max_inner_iters: 20,
            inner_tolerance: 1e-6,
        }
    }
}

impl SystemParameters {
    /// Checks every construction invariant, naming the offending field.
    ///
    /// Primary powers may be zero (interference-free configurations); the
    /// secondary relay power must be strictly positive since it carries the
    /// desired downlink.
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidParameter(msg));
        if !self.path_loss_exp.is_finite() || self.path_loss_exp < 2.0 {
            return bad(format!("tau must be >= 2, got {}", self.path_loss_exp));
        }
        if !(self.conversion_eff > 0.0 && self.conversion_eff <= 1.0) {
            return bad(format!(
                "eta must be in (0, 1], got {}",
                self.conversion_eff
            ));
        }
        if !self.threshold_snr.is_finite() || self.threshold_snr <= 0.0 {
            return bad(format!("gamma_th must be > 0, got {}", self.threshold_snr));
        }
        if !self.relay_power.is_finite() || self.relay_power <= 0.0 {
            return bad(format!("p_rs must be > 0, got {}", self.relay_power));
        }
        for (name, p) in [
            ("p_p1", self.p1_power),
            ("p_p2", self.p2_power),
            ("p_rp", self.primary_relay_power),
        ] {
            if !p.is_finite() || p < 0.0 {
                return bad(format!("{name} must be >= 0, got {p}"));
            }
        }
        if self.streams != 1 {
            return bad(format!(
                "d = {}: multi-stream unsupported (only d = 1)",
                self.streams
            ));
        }
        for (name, n) in [
            ("n_a", self.n_a),
            ("n_b", self.n_b),
            ("n_rs", self.n_rs),
            ("n_p1", self.n_p1),
            ("n_p2", self.n_p2),
            ("n_rp", self.n_rp),
        ] {
            if n < self.streams {
                return bad(format!("{name} = {n} is below the stream count"));
            }
        }
        if self.max_outer_iters == 0 {
            return bad("max_outer must be >= 1".into());
        }
        if self.inner_tolerance.is_nan() || self.inner_tolerance < 0.0 {
            return bad(format!(
                "inner_tol must be >= 0, got {}",
                self.inner_tolerance
            ));
        }
        Ok(())
    }

    /// Antenna count of a node.
    pub fn antennas(&self, node: Node) -> usize {
        match node {
            Node::A => self.n_a,
            Node::B => self.n_b,
            Node::Rs => self.n_rs,
            Node::P1 => self.n_p1,
            Node::P2 => self.n_p2,
            Node::Rp => self.n_rp,
        }
    }

    /// Transmit power of a fixed-power node (the SU powers are harvested and
    /// live in [`crate::power::PowerAllocation`] instead).
    pub fn power(&self, node: Node) -> f64 {
        match node {
            Node::Rs => self.relay_power,
            Node::P1 => self.p1_power,
            Node::P2 => self.p2_power,
            Node::Rp => self.primary_relay_power,
            Node::A | Node::B => panic!("SU transmit power is harvested, not a system constant"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn dbm_reference_points() {
        assert_relative_eq!(dbm_to_linear(0.0), 1.0);
        assert_relative_eq!(dbm_to_linear(20.0), 100.0);
        assert_relative_eq!(
            dbm_to_linear(35.0),
            3162.2776601683795,
            max_relative = 1e-12
        );
    }

    #[test]
    fn defaults_validate() {
        SystemParameters::default().validate().unwrap();
    }

    #[test]
    fn multi_stream_rejected() {
        let p = SystemParameters {
            streams: 2,
            ..Default::default()
        };
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("multi-stream unsupported"));
    }

    #[test]
    fn shallow_path_loss_exponent_rejected() {
        let p = SystemParameters {
            path_loss_exp: 1.5,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn zero_primary_power_allowed() {
        let p = SystemParameters {
            p1_power: 0.0,
            p2_power: 0.0,
            primary_relay_power: 0.0,
            ..Default::default()
        };
        p.validate().unwrap();
    }

    proptest! {
        #[test]
        fn dbm_monotone_and_decade_scaling(a in -40.0f64..50.0) {
            let x = dbm_to_linear(a);
            prop_assert!(dbm_to_linear(a + 1.0) > x);
            prop_assert!((dbm_to_linear(a + 10.0) / x - 10.0).abs() < 1e-9);
        }
    }
}
