use serde::{Deserialize, Serialize};

use super::model::MdpModel;

/// `2·(2·N·D + 1)^N`.
pub fn confidence_constant(nodes: usize, bound: u32) -> f64 {
    2.0 * (2.0 * nodes as f64 * f64::from(bound) + 1.0).powi(nodes as i32)
}

/// Inputs of the L1 confidence radius that stay fixed during a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceParams {
    pub constant: f64,
    pub actions: usize,
    pub truncation: u32,
    /// Multiplies `constant`; 1 leaves the radius as derived.
    pub scale: f64,
}

impl ConfidenceParams {
    pub fn new(nodes: usize, bound: u32, actions: usize, truncation: u32) -> Self {
        ConfidenceParams {
            constant: confidence_constant(nodes, bound),
            actions,
            truncation,
            scale: 1.0,
        }
    }

    pub fn with_scale(self, scale: f64) -> Self {
        ConfidenceParams { scale, ..self }
    }

    /// `min(2, sqrt(C·ln(2·|A|·max(1, t)·V) / max(1, n)))`, and 2 for a pair
    /// never visited.
    pub fn radius(&self, visits: u64, episode_start: u64) -> f64 {
        if visits == 0 {
            return 2.0;
        }
        let t = episode_start.max(1) as f64;
        let log = (2.0 * self.actions as f64 * t * f64::from(self.truncation)).ln();
        (self.scale * self.constant * log / visits as f64).sqrt().min(2.0)
    }
}

/// Radius for `(s, a)` at the current episode of `model`.
pub fn confidence_radius(model: &MdpModel, s: usize, a: usize, params: &ConfidenceParams) -> f64 {
    params.radius(model.visits(s, a), model.episode_start())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values() {
        assert_eq!(confidence_constant(1, 1), 6.0);
        assert_eq!(confidence_constant(4, 1), 13122.0);
    }

    #[test]
    fn unvisited_pairs_get_the_full_simplex() {
        let p = ConfidenceParams::new(4, 1, 3, 30);
        assert_eq!(p.radius(0, 0), 2.0);
        assert_eq!(p.radius(0, 10_000), 2.0);
        assert_eq!(p.radius(1, 10_000), 2.0);
    }

    #[test]
    fn radius_shrinks_with_visits() {
        let p = ConfidenceParams::new(1, 1, 2, 10);
        // sqrt(6·ln(2·2·100·10) / 1e6)
        let want = (6.0 * 4000f64.ln() / 1e6).sqrt();
        assert!((p.radius(1_000_000, 100) - want).abs() < 1e-15);
        assert!(p.radius(1_000_000, 100) < p.radius(1_000, 100));
    }

    #[test]
    fn scale_multiplies_the_constant() {
        let p = ConfidenceParams::new(1, 1, 2, 10);
        let q = p.with_scale(4.0);
        assert!((q.radius(1_000_000, 100) - 2.0 * p.radius(1_000_000, 100)).abs() < 1e-15);
    }
}
