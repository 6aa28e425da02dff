//! Iterative MMSE interference-alignment design of all fourteen precoders
//! and decoders over the three time slots.
//!
//! One sweep follows the forward/reciprocal pattern:
//!
//! 1. slot-1/2 receive filters at both relays,
//! 2. source precoders in the reciprocal uplink network (channels conjugate
//!    transposed, decoders acting as precoders),
//! 3. slot-3 receive filters at the four destinations,
//! 4. relay broadcast precoders in the reciprocal downlink network, with the
//!    power-control weights inside the sums for the secondary relay and
//!    equal weights for the primary relay.
//!
//! Every update is the exact minimiser of its receiver's mean-square error,
//! `(Σ t·t^H + I)^{-1}·Σ_desired t` over the scaled effective channels `t`.
//! A reciprocal link reuses the transmit power of the node radiating in the
//! reciprocal direction: the relays in the uplink phase, the SUs and PUs in
//! the downlink phase.

use crate::beamformer::BeamformerSet;
use crate::channel::ChannelRealization;
use crate::params::{Node, Su, SystemParameters};
use crate::power::{EffectiveGains, PowerAllocation};
use crate::topology::{path_loss, Topology};
use crate::{CMat, CVec, C64};

/// Post-filter state of one receiver: desired power, residual interference
/// power (both linear, scaled by transmit power and path loss) and the
/// receiver's mean-square error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverDiag {
    pub desired_gain: f64,
    pub leakage: f64,
    pub mse: f64,
}

impl ReceiverDiag {
    /// Single-stream rank condition: the desired effective channel must not
    /// collapse.
    pub fn rank_ok(&self) -> bool {
        self.desired_gain > 1e-9
    }
}

/// Alignment quality of the four outage-relevant receivers plus loop
/// bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IaDiagnostics {
    /// Relay receiver in slots 1 and 2.
    pub relay: [ReceiverDiag; 2],
    pub su_a: ReceiverDiag,
    pub su_b: ReceiverDiag,
    pub iterations: usize,
    pub converged: bool,
}

/// Numerical record of one filter update, used to audit stationarity and
/// per-update MSE descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateAudit {
    pub label: &'static str,
    /// `‖C·u - n‖ / (1 + ‖n‖)` of the unnormalised solution.
    pub residual: f64,
    /// Objective value of the filter that was being replaced.
    pub mse_before: f64,
    /// Objective value of the unnormalised minimiser.
    pub mse_after: f64,
}

/// MMSE receive filter for one desired effective channel and a list of
/// interference effective channels, all pre-scaled by `sqrt(p·r^-τ)`.
///
/// Returns the unnormalised minimiser `(D·D^H + Σ I·I^H + Id)^{-1}·D`. The
/// covariance is Hermitian positive definite by construction, so the solve
/// cannot fail; mismatched dimensions are a contract violation.
pub fn mmse_receive_filter(desired: &CVec, interference: &[CVec]) -> CVec {
    let dim = desired.len();
    for t in interference {
        assert_eq!(
            t.len(),
            dim,
            "effective channels must share the receiver dimension"
        );
    }
    let mut scratch = Scratch::default();
    scratch.push_term(desired.clone());
    for t in interference {
        scratch.push_term(t.clone());
    }
    scratch.solve(1);
    scratch.out
}

/// Scratch space for the rank-k covariance solves. All buffers are recycled
/// across the updates of an alignment run, so the steady-state sweep does
/// not touch the allocator.
#[derive(Default)]
struct Scratch {
    /// Scaled effective channels of the pending update (desired first).
    terms: Vec<CVec>,
    n_terms: usize,
    /// `w_i = B_{i-1}^{-1}·t_i` of the Sherman-Morrison recursion.
    ws: Vec<CVec>,
    pivots: Vec<f64>,
    out: CVec,
}

impl Scratch {
    /// Adds a ready-made term, respecting the pool bookkeeping.
    fn push_term(&mut self, v: CVec) {
        if self.n_terms == self.terms.len() {
            self.terms.push(v);
        } else {
            self.terms[self.n_terms] = v;
        }
        self.n_terms += 1;
    }

    /// Next term slot of the given dimension; contents are overwritten by
    /// the caller.
    fn term(&mut self, dim: usize) -> &mut CVec {
        if self.n_terms == self.terms.len() {
            self.terms.push(CVec::zeros(dim));
        } else if self.terms[self.n_terms].len() != dim {
            self.terms[self.n_terms] = CVec::zeros(dim);
        }
        self.n_terms += 1;
        &mut self.terms[self.n_terms - 1]
    }

    /// Solves `(I + Σ t·t^H)·u = Σ_desired t` into `self.out` by sequential
    /// Sherman-Morrison rank-1 updates, then resets the term list. Every
    /// pivot satisfies `d_i = 1 + t_i^H B_{i-1}^{-1} t_i >= 1`, so the
    /// recursion is unconditionally stable.
    fn solve(&mut self, n_desired: usize) {
        let k = self.n_terms;
        let terms = &self.terms[..k];
        let dim = terms[0].len();
        let one = C64::new(1.0, 0.0);
        self.pivots.clear();
        while self.ws.len() < k {
            self.ws.push(CVec::zeros(dim));
        }
        for i in 0..k {
            let (done, rest) = self.ws.split_at_mut(i);
            let w = &mut rest[0];
            if w.len() != dim {
                *w = CVec::zeros(dim);
            }
            w.copy_from(&terms[i]);
            for j in 0..i {
                let coeff = terms[j].dotc(w) / C64::new(self.pivots[j], 0.0);
                w.axpy(-coeff, &done[j], one);
            }
            self.pivots.push(1.0 + terms[i].dotc(w).re);
        }
        if self.out.len() != dim {
            self.out = CVec::zeros(dim);
        } else {
            self.out.fill(C64::new(0.0, 0.0));
        }
        for t in &terms[..n_desired] {
            self.out += t;
        }
        for ((t, w), d) in terms.iter().zip(&self.ws).zip(&self.pivots) {
            let coeff = t.dotc(&self.out) / C64::new(*d, 0.0);
            self.out.axpy(-coeff, w, one);
        }
        self.n_terms = 0;
    }

    /// Covariance and numerator of the pending update, for audit records.
    fn audit_matrices(&self, n_desired: usize) -> (CMat, CVec) {
        let terms = &self.terms[..self.n_terms];
        let dim = terms[0].len();
        let one = C64::new(1.0, 0.0);
        let mut cov = CMat::identity(dim, dim);
        let mut numerator = CVec::zeros(dim);
        for t in terms {
            cov.gerc(one, t, t, one);
        }
        for t in &terms[..n_desired] {
            numerator += t;
        }
        (cov, numerator)
    }
}

fn quadratic_mse(cov: &CMat, numerator: &CVec, c0: f64, u: &CVec) -> f64 {
    u.dotc(&(cov * u)).re - 2.0 * u.dotc(numerator).re + c0
}

struct SweepCtx<'a> {
    ch: &'a ChannelRealization,
    params: &'a SystemParameters,
    topo: &'a Topology,
    alloc: &'a PowerAllocation,
}

impl<'a> SweepCtx<'a> {
    fn power_of(&self, node: Node) -> f64 {
        match node {
            Node::A => self.alloc.p_a,
            Node::B => self.alloc.p_b,
            _ => self.params.power(node),
        }
    }

    fn amplitude(&self, power: f64, rx: Node, tx: Node) -> f64 {
        (power * path_loss(self.topo.distance(rx, tx), self.params.path_loss_exp)).sqrt()
    }

    /// Writes the scaled forward effective channel
    /// `sqrt(p_tx·r^-τ)·H_(rx,tx)·w` into `out`.
    fn fwd_into(&self, rx: Node, tx: Node, w: &CVec, extra_scale: f64, out: &mut CVec) {
        let scale = C64::new(self.amplitude(self.power_of(tx), rx, tx) * extra_scale, 0.0);
        let h = self.ch.h(rx, tx);
        out.fill(C64::new(0.0, 0.0));
        for j in 0..h.ncols() {
            let c = w[j] * scale;
            for i in 0..h.nrows() {
                out[i] += h[(i, j)] * c;
            }
        }
    }

    /// Writes the scaled reciprocal effective channel over the reversed
    /// forward link `fwd_tx -> fwd_rx` into `out`:
    /// `sqrt(p_stream·r^-τ)·H_(fwd_rx,fwd_tx)^H·w`.
    fn rev_into(
        &self,
        fwd_rx: Node,
        fwd_tx: Node,
        stream_power: f64,
        w: &CVec,
        extra_scale: f64,
        out: &mut CVec,
    ) {
        let scale = C64::new(
            self.amplitude(stream_power, fwd_rx, fwd_tx) * extra_scale,
            0.0,
        );
        let h = self.ch.h(fwd_rx, fwd_tx);
        for j in 0..h.ncols() {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..h.nrows() {
                acc += h[(i, j)].conj() * w[i];
            }
            out[j] = acc * scale;
        }
    }
}

/// Solves the pending update in `scratch`, stores the unit-normalised filter
/// in `target` and returns the Frobenius change.
fn commit_update(
    label: &'static str,
    scratch: &mut Scratch,
    n_desired: usize,
    target: &mut CVec,
    audit: &mut Option<&mut Vec<UpdateAudit>>,
) -> f64 {
    let audit_mats = audit.as_ref().map(|_| scratch.audit_matrices(n_desired));
    scratch.solve(n_desired);
    if let (Some(log), Some((cov, numerator))) = (audit.as_deref_mut(), audit_mats) {
        let c0 = n_desired as f64;
        log.push(UpdateAudit {
            label,
            residual: (&cov * &scratch.out - &numerator).norm() / (1.0 + numerator.norm()),
            mse_before: quadratic_mse(&cov, &numerator, c0, target),
            mse_after: quadratic_mse(&cov, &numerator, c0, &scratch.out),
        });
    }
    let norm = scratch.out.norm();
    if norm > 0.0 {
        scratch.out /= C64::new(norm, 0.0);
    }
    let mut delta_sq = 0.0;
    for (new, old) in scratch.out.iter().zip(target.iter()) {
        delta_sq += (new - old).norm_sqr();
    }
    target.copy_from(&scratch.out);
    delta_sq.sqrt()
}

/// One in-place Gauss-Seidel sweep over all fourteen matrices; returns the
/// largest per-matrix Frobenius change.
fn sweep_in_place(
    ctx: &SweepCtx,
    bf: &mut BeamformerSet,
    scratch: &mut Scratch,
    mut audit: Option<&mut Vec<UpdateAudit>>,
) -> f64 {
    let mut max_delta: f64 = 0.0;
    let dims = |node: Node| ctx.params.antennas(node);
    macro_rules! update {
        ($label:expr, $target:expr, $n_desired:expr) => {
            max_delta = max_delta.max(commit_update(
                $label, scratch, $n_desired, $target, &mut audit,
            ))
        };
    }

    // Slot-1/2 receive filters at both relays.
    let n_rs = dims(Node::Rs);
    ctx.fwd_into(Node::Rs, Node::A, &bf.v_a, 1.0, scratch.term(n_rs));
    ctx.fwd_into(Node::Rs, Node::P1, &bf.v_p1, 1.0, scratch.term(n_rs));
    update!("u_rs[1]", &mut bf.u_rs[0], 1);
    ctx.fwd_into(Node::Rs, Node::B, &bf.v_b, 1.0, scratch.term(n_rs));
    ctx.fwd_into(Node::Rs, Node::P2, &bf.v_p2, 1.0, scratch.term(n_rs));
    update!("u_rs[2]", &mut bf.u_rs[1], 1);
    let n_rp = dims(Node::Rp);
    ctx.fwd_into(Node::Rp, Node::P1, &bf.v_p1, 1.0, scratch.term(n_rp));
    ctx.fwd_into(Node::Rp, Node::A, &bf.v_a, 1.0, scratch.term(n_rp));
    update!("u_rp[1]", &mut bf.u_rp[0], 1);
    ctx.fwd_into(Node::Rp, Node::P2, &bf.v_p2, 1.0, scratch.term(n_rp));
    ctx.fwd_into(Node::Rp, Node::B, &bf.v_b, 1.0, scratch.term(n_rp));
    update!("u_rp[2]", &mut bf.u_rp[1], 1);

    // Source precoders in the reciprocal uplink network; the reciprocal
    // transmitters are the relays, radiating their own node powers.
    let (p_rs, p_rp) = (ctx.params.relay_power, ctx.params.primary_relay_power);
    let n_a = dims(Node::A);
    ctx.rev_into(Node::Rs, Node::A, p_rs, &bf.u_rs[0], 1.0, scratch.term(n_a));
    ctx.rev_into(Node::Rp, Node::A, p_rp, &bf.u_rp[0], 1.0, scratch.term(n_a));
    update!("v_a", &mut bf.v_a, 1);
    let n_b = dims(Node::B);
    ctx.rev_into(Node::Rs, Node::B, p_rs, &bf.u_rs[1], 1.0, scratch.term(n_b));
    ctx.rev_into(Node::Rp, Node::B, p_rp, &bf.u_rp[1], 1.0, scratch.term(n_b));
    update!("v_b", &mut bf.v_b, 1);
    let n_p1 = dims(Node::P1);
    ctx.rev_into(
        Node::Rp,
        Node::P1,
        p_rp,
        &bf.u_rp[0],
        1.0,
        scratch.term(n_p1),
    );
    ctx.rev_into(
        Node::Rs,
        Node::P1,
        p_rs,
        &bf.u_rs[0],
        1.0,
        scratch.term(n_p1),
    );
    update!("v_p1", &mut bf.v_p1, 1);
    let n_p2 = dims(Node::P2);
    ctx.rev_into(
        Node::Rp,
        Node::P2,
        p_rp,
        &bf.u_rp[1],
        1.0,
        scratch.term(n_p2),
    );
    ctx.rev_into(
        Node::Rs,
        Node::P2,
        p_rs,
        &bf.u_rs[1],
        1.0,
        scratch.term(n_p2),
    );
    update!("v_p2", &mut bf.v_p2, 1);

    // Slot-3 receive filters.
    ctx.fwd_into(Node::A, Node::Rs, &bf.v_rs, 1.0, scratch.term(n_a));
    ctx.fwd_into(Node::A, Node::Rp, &bf.v_rp, 1.0, scratch.term(n_a));
    update!("u_a", &mut bf.u_a, 1);
    ctx.fwd_into(Node::B, Node::Rs, &bf.v_rs, 1.0, scratch.term(n_b));
    ctx.fwd_into(Node::B, Node::Rp, &bf.v_rp, 1.0, scratch.term(n_b));
    update!("u_b", &mut bf.u_b, 1);
    ctx.fwd_into(Node::P1, Node::Rp, &bf.v_rp, 1.0, scratch.term(n_p1));
    ctx.fwd_into(Node::P1, Node::Rs, &bf.v_rs, 1.0, scratch.term(n_p1));
    update!("u_p1", &mut bf.u_p1, 1);
    ctx.fwd_into(Node::P2, Node::Rp, &bf.v_rp, 1.0, scratch.term(n_p2));
    ctx.fwd_into(Node::P2, Node::Rs, &bf.v_rs, 1.0, scratch.term(n_p2));
    update!("u_p2", &mut bf.u_p2, 1);

    // Relay broadcast precoders in the reciprocal downlink network. The
    // stream from A carries weight X_B and vice versa (weights inside the
    // sums); the primary relay splits evenly.
    let (p_a, p_b) = (ctx.alloc.p_a, ctx.alloc.p_b);
    let (p_p1, p_p2) = (ctx.params.p1_power, ctx.params.p2_power);
    let (x_a, x_b) = (ctx.alloc.x_a, ctx.alloc.x_b);
    ctx.rev_into(Node::A, Node::Rs, p_a, &bf.u_a, x_b, scratch.term(n_rs));
    ctx.rev_into(Node::B, Node::Rs, p_b, &bf.u_b, x_a, scratch.term(n_rs));
    ctx.rev_into(Node::P1, Node::Rs, p_p1, &bf.u_p1, 1.0, scratch.term(n_rs));
    ctx.rev_into(Node::P2, Node::Rs, p_p2, &bf.u_p2, 1.0, scratch.term(n_rs));
    update!("v_rs", &mut bf.v_rs, 2);
    let even = std::f64::consts::FRAC_1_SQRT_2;
    ctx.rev_into(Node::P1, Node::Rp, p_p1, &bf.u_p1, even, scratch.term(n_rp));
    ctx.rev_into(Node::P2, Node::Rp, p_p2, &bf.u_p2, even, scratch.term(n_rp));
    ctx.rev_into(Node::A, Node::Rp, p_a, &bf.u_a, 1.0, scratch.term(n_rp));
    ctx.rev_into(Node::B, Node::Rp, p_b, &bf.u_b, 1.0, scratch.term(n_rp));
    update!("v_rp", &mut bf.v_rp, 2);

    max_delta
}

/// One full forward/reciprocal alignment sweep; every output has unit
/// Frobenius norm.
pub fn ia_iteration(
    ch: &ChannelRealization,
    params: &SystemParameters,
    topo: &Topology,
    alloc: &PowerAllocation,
    bf: &BeamformerSet,
) -> BeamformerSet {
    let mut next = bf.clone();
    let mut scratch = Scratch::default();
    sweep_in_place(
        &SweepCtx {
            ch,
            params,
            topo,
            alloc,
        },
        &mut next,
        &mut scratch,
        None,
    );
    next
}

/// As [`ia_iteration`], recording a numerical audit of all fourteen updates.
pub fn ia_iteration_audited(
    ch: &ChannelRealization,
    params: &SystemParameters,
    topo: &Topology,
    alloc: &PowerAllocation,
    bf: &BeamformerSet,
    audits: &mut Vec<UpdateAudit>,
) -> BeamformerSet {
    let mut next = bf.clone();
    let mut scratch = Scratch::default();
    sweep_in_place(
        &SweepCtx {
            ch,
            params,
            topo,
            alloc,
        },
        &mut next,
        &mut scratch,
        Some(audits),
    );
    next
}

/// Runs alignment sweeps until the largest per-matrix Frobenius change drops
/// below `tolerance` or `max_iters` is reached. Non-convergence is reported
/// through the diagnostics, never as an error.
pub fn run_ia(
    ch: &ChannelRealization,
    params: &SystemParameters,
    topo: &Topology,
    alloc: &PowerAllocation,
    init: BeamformerSet,
    max_iters: usize,
    tolerance: f64,
) -> (BeamformerSet, IaDiagnostics) {
    let ctx = SweepCtx {
        ch,
        params,
        topo,
        alloc,
    };
    let mut bf = init;
    let mut scratch = Scratch::default();
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iters {
        let delta = sweep_in_place(&ctx, &mut bf, &mut scratch, None);
        iterations += 1;
        if delta < tolerance {
            converged = true;
            break;
        }
    }
    let mut diag = leakage_and_rank_check(ch, params, topo, alloc, &bf);
    diag.iterations = iterations;
    diag.converged = converged;
    (bf, diag)
}

/// Post-filter desired power, interference leakage and MSE for the four
/// outage-relevant receivers under the given beamformers.
pub fn leakage_and_rank_check(
    ch: &ChannelRealization,
    params: &SystemParameters,
    topo: &Topology,
    alloc: &PowerAllocation,
    bf: &BeamformerSet,
) -> IaDiagnostics {
    let ctx = SweepCtx {
        ch,
        params,
        topo,
        alloc,
    };
    let gains = EffectiveGains::compute(ch, params, topo, bf);
    let tau = params.path_loss_exp;
    let mut scratch = Scratch::default();
    let mut mse_single = |desired: CVec, interf: CVec, u: &CVec| {
        scratch.push_term(desired);
        scratch.push_term(interf);
        let (cov, numerator) = scratch.audit_matrices(1);
        scratch.n_terms = 0;
        quadratic_mse(&cov, &numerator, 1.0, u)
    };
    let relay_a = {
        let g = gains.su(Su::A);
        let mut d = CVec::zeros(params.n_rs);
        let mut i = CVec::zeros(params.n_rs);
        ctx.fwd_into(Node::Rs, Node::A, &bf.v_a, 1.0, &mut d);
        ctx.fwd_into(Node::Rs, Node::P1, &bf.v_p1, 1.0, &mut i);
        ReceiverDiag {
            desired_gain: alloc.p_a
                * path_loss(topo.distance(Node::Rs, Node::A), tau)
                * g.relay_side_gain,
            leakage: g.relay_leakage,
            mse: mse_single(d, i, &bf.u_rs[0]),
        }
    };
    let relay_b = {
        let g = gains.su(Su::B);
        let mut d = CVec::zeros(params.n_rs);
        let mut i = CVec::zeros(params.n_rs);
        ctx.fwd_into(Node::Rs, Node::B, &bf.v_b, 1.0, &mut d);
        ctx.fwd_into(Node::Rs, Node::P2, &bf.v_p2, 1.0, &mut i);
        ReceiverDiag {
            desired_gain: alloc.p_b
                * path_loss(topo.distance(Node::Rs, Node::B), tau)
                * g.relay_side_gain,
            leakage: g.relay_leakage,
            mse: mse_single(d, i, &bf.u_rs[1]),
        }
    };
    let mut su_rx = |su: Su, u: &CVec| {
        let g = gains.su(su);
        let node = su.node();
        let n = params.antennas(node);
        let mut d = CVec::zeros(n);
        let mut i = CVec::zeros(n);
        ctx.fwd_into(node, Node::Rs, &bf.v_rs, 1.0, &mut d);
        ctx.fwd_into(node, Node::Rp, &bf.v_rp, 1.0, &mut i);
        ReceiverDiag {
            desired_gain: params.relay_power
                * path_loss(topo.distance(node, Node::Rs), tau)
                * g.su_side_gain,
            leakage: g.su_leakage,
            mse: mse_single(d, i, u),
        }
    };
    IaDiagnostics {
        relay: [relay_a, relay_b],
        su_a: su_rx(Su::A, &bf.u_a),
        su_b: su_rx(Su::B, &bf.u_b),
        iterations: 0,
        converged: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cvec(entries: &[(f64, f64)]) -> CVec {
        CVec::from_iterator(entries.len(), entries.iter().map(|&(r, i)| C64::new(r, i)))
    }

    #[test]
    fn scalar_no_interference() {
        let u = mmse_receive_filter(&cvec(&[(1.0, 0.0)]), &[]);
        assert_relative_eq!(u[0].re, 0.5, max_relative = 1e-14);
        assert_relative_eq!(u[0].im, 0.0);
    }

    #[test]
    fn scalar_with_interference() {
        let interf = cvec(&[(3f64.sqrt(), 0.0)]);
        let u = mmse_receive_filter(&cvec(&[(1.0, 0.0)]), &[interf]);
        assert_relative_eq!(u[0].re, 0.2, max_relative = 1e-14);
    }

    #[test]
    #[should_panic(expected = "receiver dimension")]
    fn dimension_mismatch_is_a_contract_error() {
        let d = cvec(&[(1.0, 0.0), (0.0, 0.0)]);
        let i = cvec(&[(1.0, 0.0)]);
        let _ = mmse_receive_filter(&d, &[i]);
    }

    /// Hand-rolled complex Gaussian elimination, independent of the
    /// Sherman-Morrison path under test.
    fn solve_dense(a: &CMat, b: &CVec) -> CVec {
        let n = b.len();
        let mut m = a.clone();
        let mut x = b.clone();
        for k in 0..n {
            let mut piv = k;
            for r in k + 1..n {
                if m[(r, k)].norm() > m[(piv, k)].norm() {
                    piv = r;
                }
            }
            if piv != k {
                m.swap_rows(k, piv);
                x.swap_rows(k, piv);
            }
            let d = m[(k, k)];
            for r in k + 1..n {
                let f = m[(r, k)] / d;
                for c in k..n {
                    let sub = f * m[(k, c)];
                    m[(r, c)] -= sub;
                }
                let sub = f * x[k];
                x[r] -= sub;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..n {
                s -= m[(k, c)] * x[c];
            }
            x[k] = s / m[(k, k)];
        }
        x
    }

    #[test]
    fn matches_independent_linear_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let n = 4;
            let rand_vec = |rng: &mut ChaCha8Rng| {
                CVec::from_iterator(
                    n,
                    (0..n).map(|_| {
                        C64::new(
                            rand::Rng::random::<f64>(rng) - 0.5,
                            rand::Rng::random::<f64>(rng) - 0.5,
                        ) * 3.0
                    }),
                )
            };
            let d = rand_vec(&mut rng);
            let i1 = rand_vec(&mut rng);
            let i2 = rand_vec(&mut rng);
            let u = mmse_receive_filter(&d, &[i1.clone(), i2.clone()]);

            let one = C64::new(1.0, 0.0);
            let mut cov = CMat::identity(n, n);
            for t in [&d, &i1, &i2] {
                cov.gerc(one, t, t, one);
            }
            let reference = solve_dense(&cov, &d);
            assert!(
                (&u - &reference).norm() < 1e-10,
                "disagrees with dense solver"
            );
            // Stationarity: Cov*u - d = 0.
            assert!((&cov * &u - &d).norm() / (1.0 + d.norm()) < 1e-12);
        }
    }

    #[test]
    fn zero_iterations_returns_init() {
        let params = SystemParameters::default();
        let topo = Topology::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = ChannelRealization::sample(&params, &mut rng);
        let bf = BeamformerSet::random(&params, &mut rng);
        let alloc = PowerAllocation {
            rho_a: 0.5,
            rho_b: 0.5,
            theta: 0.5,
            x_a: std::f64::consts::FRAC_1_SQRT_2,
            x_b: std::f64::consts::FRAC_1_SQRT_2,
            p_a: 1.0,
            p_b: 1.0,
        };
        let (out, diag) = run_ia(&ch, &params, &topo, &alloc, bf.clone(), 0, 1e-6);
        assert_eq!(out, bf);
        assert!(!diag.converged);
        assert_eq!(diag.iterations, 0);
    }

    #[test]
    fn iteration_and_in_place_run_agree() {
        let params = SystemParameters::default();
        let topo = Topology::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = ChannelRealization::sample(&params, &mut rng);
        let bf = BeamformerSet::random(&params, &mut rng);
        let alloc = PowerAllocation {
            rho_a: 0.9,
            rho_b: 0.8,
            theta: 0.5,
            x_a: std::f64::consts::FRAC_1_SQRT_2,
            x_b: std::f64::consts::FRAC_1_SQRT_2,
            p_a: 30.0,
            p_b: 20.0,
        };
        let mut by_steps = bf.clone();
        for _ in 0..3 {
            by_steps = ia_iteration(&ch, &params, &topo, &alloc, &by_steps);
        }
        let (by_run, _) = run_ia(&ch, &params, &topo, &alloc, bf, 3, 0.0);
        assert_eq!(by_steps, by_run);
    }

    #[test]
    fn audited_sweep_matches_plain_sweep() {
        let params = SystemParameters::default();
        let topo = Topology::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = ChannelRealization::sample(&params, &mut rng);
        let bf = BeamformerSet::random(&params, &mut rng);
        let alloc = PowerAllocation {
            rho_a: 0.9,
            rho_b: 0.8,
            theta: 0.4,
            x_a: 0.8,
            x_b: 0.6,
            p_a: 10.0,
            p_b: 20.0,
        };
        let plain = ia_iteration(&ch, &params, &topo, &alloc, &bf);
        let mut audits = Vec::new();
        let audited = ia_iteration_audited(&ch, &params, &topo, &alloc, &bf, &mut audits);
        assert_eq!(plain, audited);
        assert_eq!(audits.len(), 14);
        for a in &audits {
            assert!(a.residual < 1e-9, "{}: residual {}", a.label, a.residual);
            assert!(
                a.mse_after <= a.mse_before + 1e-12,
                "{}: MSE increased {} -> {}",
                a.label,
                a.mse_before,
                a.mse_after
            );
            assert!(a.mse_after >= 0.0);
        }
    }
}
