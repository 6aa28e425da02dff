//! Node geometry: base distances plus the cross distances obtained from the
//! right-angle layout (secondary and primary chains sit on perpendicular
//! axes through the two relays), and the distance-based path loss `r^-τ`.

use crate::error::ModelError;
use crate::params::Node;

/// Large-scale path-loss factor `r^-τ` for a link of length `r`.
pub fn path_loss(distance: f64, tau: f64) -> f64 {
    distance.powf(-tau)
}

/// Node distances in meters.
///
/// The five base distances define the layout; the four cross distances are
/// derived with the Pythagorean theorem, e.g.
/// `r_rp_a = sqrt(r_rs_rp² + r_a_rs²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub r_a_rs: f64,
    pub r_rs_b: f64,
    pub r_rs_rp: f64,
    pub r_p1_rp: f64,
    pub r_rp_p2: f64,
    // Derived.
    pub r_rs_p1: f64,
    pub r_rs_p2: f64,
    pub r_rp_a: f64,
    pub r_rp_b: f64,
}

impl Default for Topology {
    fn default() -> Self {
        Topology::from_base(0.5, 0.5, 2.0, 0.5, 0.5).expect("default geometry is valid")
    }
}

impl Topology {
    /// Builds the full distance table from the five base distances.
    pub fn from_base(
        r_a_rs: f64,
        r_rs_b: f64,
        r_rs_rp: f64,
        r_p1_rp: f64,
        r_rp_p2: f64,
    ) -> Result<Self, ModelError> {
        for (name, r) in [
            ("r_a_rs", r_a_rs),
            ("r_rs_b", r_rs_b),
            ("r_rs_rp", r_rs_rp),
            ("r_p1_rp", r_p1_rp),
            ("r_rp_p2", r_rp_p2),
        ] {
            if !r.is_finite() || r <= 0.0 {
                return Err(ModelError::InvalidGeometry(format!(
                    "{name} must be > 0, got {r}"
                )));
            }
        }
        Ok(Topology {
            r_a_rs,
            r_rs_b,
            r_rs_rp,
            r_p1_rp,
            r_rp_p2,
            r_rs_p1: r_rs_rp.hypot(r_p1_rp),
            r_rs_p2: r_rs_rp.hypot(r_rp_p2),
            r_rp_a: r_rs_rp.hypot(r_a_rs),
            r_rp_b: r_rs_rp.hypot(r_rs_b),
        })
    }

    /// Distance between two nodes, symmetric in its arguments.
    ///
    /// Only the eight modelled links exist; asking for an unmodelled pair
    /// (e.g. the ignored direct A-B link) is a programming error.
    pub fn distance(&self, a: Node, b: Node) -> f64 {
        use Node::*;
        match (a, b) {
            (A, Rs) | (Rs, A) => self.r_a_rs,
            (B, Rs) | (Rs, B) => self.r_rs_b,
            (Rs, Rp) | (Rp, Rs) => self.r_rs_rp,
            (P1, Rp) | (Rp, P1) => self.r_p1_rp,
            (P2, Rp) | (Rp, P2) => self.r_rp_p2,
            (P1, Rs) | (Rs, P1) => self.r_rs_p1,
            (P2, Rs) | (Rs, P2) => self.r_rs_p2,
            (A, Rp) | (Rp, A) => self.r_rp_a,
            (B, Rp) | (Rp, B) => self.r_rp_b,
            _ => panic!("link {a:?}-{b:?} is not part of the model"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pythagoras_cross_distances() {
        let t = Topology::from_base(0.5, 0.5, 2.0, 0.5, 0.5).unwrap();
        assert_relative_eq!(t.r_rp_a, 2.0615528128088303, max_relative = 1e-12);
        assert_relative_eq!(t.r_rs_p1, 2.0615528128088303, max_relative = 1e-12);
        // Symmetric inputs give symmetric outputs.
        assert_eq!(t.r_rp_a, t.r_rp_b);
        assert_eq!(t.r_rs_p1, t.r_rs_p2);
    }

    #[test]
    fn degenerate_geometry_rejected() {
        assert!(Topology::from_base(0.5, 0.5, 0.0, 0.5, 0.5).is_err());
        assert!(Topology::from_base(-1.0, 0.5, 2.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn path_loss_decreases_with_distance() {
        for tau in [2.0, 2.7, 3.5] {
            assert!(path_loss(0.5, tau) > path_loss(1.0, tau));
            assert!(path_loss(1.0, tau) > path_loss(2.0, tau));
            assert!(path_loss(2.0, tau) > path_loss(2.06, tau));
        }
    }
}
