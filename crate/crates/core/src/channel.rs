//! Small-scale Rayleigh fading draws for the sixteen directed links of the
//! network.
//!
//! Entries are i.i.d. circularly symmetric complex Gaussian with unit
//! variance; path loss is applied analytically in the SNR and harvesting
//! formulas, never folded into these matrices. One realization is held
//! fixed over the three time slots of a trial (block fading).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::params::{Node, SystemParameters};
use crate::{CMat, C64};

/// The modelled directed links as `(receiver, transmitter)` pairs, in the
/// canonical sampling order.
///
/// Slots 1-2 carry the uplinks into both relays, slot 3 the downlinks out of
/// them; the direct A-B link is not modelled.
pub const LINKS: [(Node, Node); 16] = [
    (Node::Rs, Node::A),
    (Node::Rs, Node::B),
    (Node::Rs, Node::P1),
    (Node::Rs, Node::P2),
    (Node::Rp, Node::P1),
    (Node::Rp, Node::P2),
    (Node::Rp, Node::A),
    (Node::Rp, Node::B),
    (Node::A, Node::Rs),
    (Node::B, Node::Rs),
    (Node::A, Node::Rp),
    (Node::B, Node::Rp),
    (Node::P1, Node::Rs),
    (Node::P2, Node::Rs),
    (Node::P1, Node::Rp),
    (Node::P2, Node::Rp),
];

/// One independent draw of every directed link matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    mats: Vec<CMat>,
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

impl ChannelRealization {
    /// Draws all sixteen link matrices from `rng`, each of dimension
    /// `N_rx x N_tx`. Deterministic given the generator state.
    pub fn sample<R: Rng + ?Sized>(params: &SystemParameters, rng: &mut R) -> Self {
        let mats = LINKS
            .iter()
            .map(|&(rx, tx)| {
                let (nr, nc) = (params.antennas(rx), params.antennas(tx));
                CMat::from_iterator(nr, nc, (0..nr * nc).map(|_| complex_gaussian(rng)))
            })
            .collect();
        ChannelRealization { mats }
    }

    /// Forward channel of the directed link `tx -> rx`, dimension
    /// `N_rx x N_tx`. Panics on a link that is not part of the model.
    pub fn h(&self, rx: Node, tx: Node) -> &CMat {
        let idx = LINKS
            .iter()
            .position(|&l| l == (rx, tx))
            .unwrap_or_else(|| panic!("link ({rx:?} <- {tx:?}) is not modelled"));
        &self.mats[idx]
    }

    /// Channel seen over `tx -> rx` in the reciprocal network: the conjugate
    /// transpose of the forward `(tx <- rx)` matrix.
    pub fn reciprocal(&self, rx: Node, tx: Node) -> CMat {
        self.h(tx, rx).adjoint()
    }
}
