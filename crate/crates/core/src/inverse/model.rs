use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Five-parameter anomaly model
/// S(x₁, x₂) = S₀ + C₀ / (d² + (x₁ − x₁⁰)² + (x₂ − x₂⁰)²)³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams5 {
    /// Bulk stiffness [N/m].
    pub s0: f64,
    /// Anomaly strength [N·m⁵]; positive for a stiffening inclusion.
    pub c0: f64,
    /// Inclusion depth [m].
    pub d: f64,
    pub x10: f64,
    pub x20: f64,
}

impl ModelParams5 {
    pub fn validate(&self) -> Result<()> {
        if !(self.s0.is_finite() && self.s0 > 0.0) {
            return Err(invalid("s0", format!("must be positive, got {}", self.s0)));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(invalid("d", format!("must be positive, got {}", self.d)));
        }
        if !(self.c0.is_finite() && self.x10.is_finite() && self.x20.is_finite()) {
            return Err(invalid("c0/x10/x20", "must be finite"));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.s0, self.c0, self.d, self.x10, self.x20]
    }

    fn denominator(&self, x1: f64, x2: f64) -> f64 {
        let (dx, dy) = (x1 - self.x10, x2 - self.x20);
        self.d * self.d + dx * dx + dy * dy
    }
}

pub fn model_eval(p: &ModelParams5, x1: f64, x2: f64) -> f64 {
    p.s0 + p.c0 / p.denominator(x1, x2).powi(3)
}

/// Partial derivatives with respect to (S₀, C₀, d, x₁⁰, x₂⁰).
pub fn model_jacobian(p: &ModelParams5, x1: f64, x2: f64) -> [f64; 5] {
    let den = p.denominator(x1, x2);
    let inv3 = den.powi(-3);
    let k = 6.0 * p.c0 * inv3 / den;
    [1.0, inv3, -k * p.d, k * (x1 - p.x10), k * (x2 - p.x20)]
}
