//! Per-node precoders and decoders.
//!
//! Every matrix is a single column (d = 1) with unit Frobenius norm: the
//! transmit normalisation makes `p_k` the true transmit power, and the unit
//! decoder keeps the post-filter noise variance at one so the SINR formulas
//! stay well defined.

use rand::Rng;

use crate::channel::ChannelRealization;
use crate::params::{Node, SystemParameters};
use crate::{CMat, CVec, C64};

/// Scales a vector to unit Euclidean (= Frobenius) norm; zero vectors are
/// returned unchanged.
pub fn unit_norm(mut v: CVec) -> CVec {
    let n = v.norm();
    if n > 0.0 {
        v /= C64::new(n, 0.0);
    }
    v
}

/// The full set of precoders `V` and decoders `U` for one trial.
///
/// `u_rs` and `u_rp` hold the slot-1 and slot-2 decoders of the two relays
/// (index 0 = slot 1); the remaining decoders act in slot 3.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub v_a: CVec,
    pub v_b: CVec,
    pub v_p1: CVec,
    pub v_p2: CVec,
    pub v_rs: CVec,
    pub v_rp: CVec,
    pub u_rs: [CVec; 2],
    pub u_rp: [CVec; 2],
    pub u_a: CVec,
    pub u_b: CVec,
    pub u_p1: CVec,
    pub u_p2: CVec,
}

fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    use rand_distr::StandardNormal;
    let v = CVec::from_iterator(
        n,
        (0..n).map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        }),
    );
    unit_norm(v)
}

/// Principal singular triplet `(u, sigma, v)` of a complex matrix, with the
/// deterministic tie-break of the underlying SVD routine.
pub fn principal_singular_pair(m: &CMat) -> (CVec, f64, CVec) {
    let svd = m.clone().svd(true, true);
    let s = &svd.singular_values;
    let mut best = 0;
    for i in 1..s.len() {
        if s[i] > s[best] {
            best = i;
        }
    }
    let u = svd
        .u
        .as_ref()
        .expect("u requested")
        .column(best)
        .into_owned();
    let v = svd.v_t.as_ref().expect("v_t requested").row(best).adjoint();
    (unit_norm(u), s[best], unit_norm(v))
}

impl BeamformerSet {
    /// Random complex-Gaussian initialisation, unit-normalised, drawn from
    /// the trial stream in a fixed order.
    pub fn random<R: Rng + ?Sized>(params: &SystemParameters, rng: &mut R) -> Self {
        let n = |node| params.antennas(node);
        BeamformerSet {
            v_a: random_unit(n(Node::A), rng),
            v_b: random_unit(n(Node::B), rng),
            v_p1: random_unit(n(Node::P1), rng),
            v_p2: random_unit(n(Node::P2), rng),
            v_rs: random_unit(n(Node::Rs), rng),
            v_rp: random_unit(n(Node::Rp), rng),
            u_rs: [random_unit(n(Node::Rs), rng), random_unit(n(Node::Rs), rng)],
            u_rp: [random_unit(n(Node::Rp), rng), random_unit(n(Node::Rp), rng)],
            u_a: random_unit(n(Node::A), rng),
            u_b: random_unit(n(Node::B), rng),
            u_p1: random_unit(n(Node::P1), rng),
            u_p2: random_unit(n(Node::P2), rng),
        }
    }

    /// Interference-oblivious benchmark: maximum-ratio transmission at every
    /// transmitter and maximum-ratio combining at every receiver.
    ///
    /// Source precoders point at their intended receiver's channel; each
    /// relay precoder is matched to the row-stacked pair of its outgoing
    /// channels so a single beam serves both destinations.
    pub fn mrt_mrc(ch: &ChannelRealization, _params: &SystemParameters) -> Self {
        let pair = principal_singular_pair;
        // Uplinks: MRT at the sources, MRC at the relays.
        let (u_rs1, _, v_a) = pair(ch.h(Node::Rs, Node::A));
        let (u_rs2, _, v_b) = pair(ch.h(Node::Rs, Node::B));
        let (u_rp1, _, v_p1) = pair(ch.h(Node::Rp, Node::P1));
        let (u_rp2, _, v_p2) = pair(ch.h(Node::Rp, Node::P2));
        // Downlinks: MRC at the destinations.
        let (u_a, _, _) = pair(ch.h(Node::A, Node::Rs));
        let (u_b, _, _) = pair(ch.h(Node::B, Node::Rs));
        let (u_p1, _, _) = pair(ch.h(Node::P1, Node::Rp));
        let (u_p2, _, _) = pair(ch.h(Node::P2, Node::Rp));
        // Relay broadcast beams from the stacked destination channels.
        let stack_rs = stack_rows(ch.h(Node::A, Node::Rs), ch.h(Node::B, Node::Rs));
        let stack_rp = stack_rows(ch.h(Node::P1, Node::Rp), ch.h(Node::P2, Node::Rp));
        let (_, _, v_rs) = pair(&stack_rs);
        let (_, _, v_rp) = pair(&stack_rp);
        BeamformerSet {
            v_a,
            v_b,
            v_p1,
            v_p2,
            v_rs,
            v_rp,
            u_rs: [u_rs1, u_rs2],
            u_rp: [u_rp1, u_rp2],
            u_a,
            u_b,
            u_p1,
            u_p2,
        }
    }

    /// All fourteen matrices in a fixed order, for norm and convergence
    /// checks.
    pub fn iter(&self) -> impl Iterator<Item = &CVec> {
        [
            &self.v_a,
            &self.v_b,
            &self.v_p1,
            &self.v_p2,
            &self.v_rs,
            &self.v_rp,
            &self.u_rs[0],
            &self.u_rs[1],
            &self.u_rp[0],
            &self.u_rp[1],
            &self.u_a,
            &self.u_b,
            &self.u_p1,
            &self.u_p2,
        ]
        .into_iter()
    }

    /// Largest Frobenius-norm change over all matrices (the inner-loop
    /// convergence measure).
    pub fn max_change(&self, other: &BeamformerSet) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn stack_rows(top: &CMat, bottom: &CMat) -> CMat {
    assert_eq!(
        top.ncols(),
        bottom.ncols(),
        "stacked channels must share the transmitter"
    );
    let mut out = CMat::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_set_is_unit_norm_and_deterministic() {
        let params = SystemParameters::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bf = BeamformerSet::random(&params, &mut rng);
        for m in bf.iter() {
            assert_relative_eq!(m.norm(), 1.0, max_relative = 1e-12);
        }
        let mut rng2 = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(bf, BeamformerSet::random(&params, &mut rng2));
    }

    #[test]
    fn principal_pair_recovers_rank_one_factor() {
        // H = u s v^H with s = 3.
        let u = unit_norm(CVec::from_vec(vec![
            C64::new(0.5, 0.1),
            C64::new(-0.3, 0.7),
            C64::new(0.2, -0.2),
        ]));
        let v = unit_norm(CVec::from_vec(vec![
            C64::new(0.8, -0.4),
            C64::new(0.1, 0.3),
        ]));
        let h = &u * v.adjoint() * C64::new(3.0, 0.0);
        let (pu, s, pv) = principal_singular_pair(&h);
        assert_relative_eq!(s, 3.0, max_relative = 1e-10);
        // Recovered up to a common phase: |u^H H v| equals sigma.
        let gain = (pu.adjoint() * &h * &pv)[(0, 0)].norm();
        assert_relative_eq!(gain, 3.0, max_relative = 1e-10);
    }

    #[test]
    fn identity_channel_gain_is_one() {
        let h = CMat::identity(2, 2);
        let (u, s, v) = principal_singular_pair(&h);
        assert_relative_eq!(s, 1.0, max_relative = 1e-12);
        let gain = (u.adjoint() * &h * &v)[(0, 0)].norm();
        assert_relative_eq!(gain, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn mrt_mrc_matches_uplink_singular_values() {
        let params = SystemParameters::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = ChannelRealization::sample(&params, &mut rng);
        let bf = BeamformerSet::mrt_mrc(&ch, &params);
        for m in bf.iter() {
            assert_relative_eq!(m.norm(), 1.0, max_relative = 1e-12);
        }
        let h = ch.h(Node::Rs, Node::A);
        let (_, s, _) = principal_singular_pair(h);
        let gain = (bf.u_rs[0].adjoint() * h * &bf.v_a)[(0, 0)].norm();
        assert_relative_eq!(gain, s, max_relative = 1e-9);
    }
}
