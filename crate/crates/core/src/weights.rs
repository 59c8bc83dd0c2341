//! Weight functions concentrated on the characteristic strip through the data
//! set.
//!
//! For an axis-aligned field `β = (β₁, 0)` the weight is a product
//! `φ = ψ₁ ψ₂` of a streamwise exponential `ψ₁ = ±e^{-ξ}` and a crosswind
//! cut-off `ψ₂` that equals one on the stability strip `[ẙ⁻, ẙ⁺]` and decays
//! like `exp(-dist / (λ h^{1/2}))` outside it. The strip is the `y`-range
//! `[y⁻, y⁺]` swept by the data set, shrunk on both sides by the crosswind
//! margin `3 λ h^{1/2} ln(1/h)`, so that `ψ₂ = O(h³)` off the swept band.
//!
//! `ξ` is the distance from the inflow edge for the downstream weight and
//! from the outflow edge for the upstream one. Either way `β·∇ψ₂ = 0` and
//! `β·∇φ = -|β| |φ|`.

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::problem::ProblemConfig;

/// Which side of the data set the weight looks at, relative to the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Along the characteristics leaving the data set; `φ ∈ (0, 1)`.
    Downstream,
    /// Against the flow; `φ ∈ (-1, 0)`.
    Upstream,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub direction: Direction,
    /// Sign of `β₁` the weight was built for.
    pub beta_sign: f64,
    pub lambda: f64,
    /// Mesh size used in the decay rate and the margin.
    pub h: f64,
    pub y_ring_lo: f64,
    pub y_ring_hi: f64,
    /// `[y⁻, y⁺]` swept by the characteristics through the data set.
    pub omega_beta: (f64, f64),
}

impl WeightSpec {
    /// Crosswind margin `3 λ h^{1/2} ln(1/h)`.
    pub fn margin(lambda: f64, h: f64) -> f64 {
        3.0 * lambda * h.sqrt() * (1.0 / h).ln()
    }

    /// Largest `λ` whose margin still leaves a strip of positive width.
    pub fn max_lambda(h: f64, omega_beta: (f64, f64)) -> f64 {
        0.5 * (omega_beta.1 - omega_beta.0) / Self::margin(1.0, h)
    }
}

const DECAY_SLABS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    pub spec: WeightSpec,
}

/// Builds the weight for the data set of `config`.
///
/// The swept band is the `y`-extent of the data set; for a disk this is its
/// bounding box.
pub fn build_weight(
    config: &ProblemConfig,
    direction: Direction,
    h: f64,
    lambda: f64,
) -> Result<WeightField> {
    if lambda.is_nan() || lambda <= 0.0 || h.is_nan() || h <= 0.0 || h >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "weight needs lambda > 0 and 0 < h < 1, got lambda={lambda}, h={h}"
        )));
    }
    if config.beta[0] == 0.0 || config.beta[1] != 0.0 {
        return Err(Error::InvalidArgument("weight needs beta = (beta1, 0) with beta1 != 0".into()));
    }
    let (y_lo, y_hi) = config.omega.y_extent();
    let (y_lo, y_hi) = (y_lo.max(0.0), y_hi.min(1.0));
    let margin = WeightSpec::margin(lambda, h);
    let half_width = 0.5 * (y_hi - y_lo);
    if margin >= half_width {
        return Err(Error::WeightConstruction { margin, half_width });
    }
    Ok(WeightField {
        spec: WeightSpec {
            direction,
            beta_sign: config.beta[0].signum(),
            lambda,
            h,
            y_ring_lo: y_lo + margin,
            y_ring_hi: y_hi - margin,
            omega_beta: (y_lo, y_hi),
        },
    })
}

impl WeightField {
    fn decay_length(&self) -> f64 {
        self.spec.lambda * self.spec.h.sqrt()
    }

    /// `(ξ, dξ/dx)`.
    fn streamwise(&self, x: f64) -> (f64, f64) {
        let from_left = match self.spec.direction {
            Direction::Downstream => self.spec.beta_sign > 0.0,
            Direction::Upstream => self.spec.beta_sign < 0.0,
        };
        if from_left {
            (x, 1.0)
        } else {
            (1.0 - x, -1.0)
        }
    }

    fn sign(&self) -> f64 {
        match self.spec.direction {
            Direction::Downstream => 1.0,
            Direction::Upstream => -1.0,
        }
    }

    pub fn psi1(&self, p: Point) -> f64 {
        self.sign() * (-self.streamwise(p[0]).0).exp()
    }

    /// Crosswind cut-off `ψ₂` and `dψ₂/dy`; on a kink line the derivative is
    /// taken from below.
    fn psi2_with_slope(&self, y: f64) -> (f64, f64) {
        let l = self.decay_length();
        if y > self.spec.y_ring_hi {
            let v = ((self.spec.y_ring_hi - y) / l).exp();
            (v, -v / l)
        } else if y <= self.spec.y_ring_lo {
            let v = ((y - self.spec.y_ring_lo) / l).exp();
            (v, v / l)
        } else {
            (1.0, 0.0)
        }
    }

    pub fn psi2(&self, p: Point) -> f64 {
        self.psi2_with_slope(p[1]).0
    }

    /// `φ(x, y)`.
    pub fn value(&self, p: Point) -> f64 {
        self.psi1(p) * self.psi2(p)
    }

    /// Horizontal lines splitting the decay bands of `ψ₂` into slabs two
    /// decay lengths thick, up to where `ψ₂ < e^{-40}`. Ascending.
    pub fn crosswind_cuts(&self) -> Vec<f64> {
        let step = 2.0 * self.decay_length();
        let mut cuts: Vec<f64> = (0..=DECAY_SLABS)
            .flat_map(|k| {
                let d = k as f64 * step;
                [self.spec.y_ring_lo - d, self.spec.y_ring_hi + d]
            })
            .filter(|y| (0.0..=1.0).contains(y))
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts
    }

    /// Whether `ψ₂` varies noticeably somewhere in `[y0, y1]`.
    pub fn varies_within(&self, y0: f64, y1: f64) -> bool {
        let reach = DECAY_SLABS as f64 * 2.0 * self.decay_length();
        let below = (self.spec.y_ring_lo - reach, self.spec.y_ring_lo);
        let above = (self.spec.y_ring_hi, self.spec.y_ring_hi + reach);
        [below, above].iter().any(|&(a, b)| y0 < b && y1 > a)
    }

    pub fn abs(&self, p: Point) -> f64 {
        self.value(p).abs()
    }

    /// `∇φ(x, y)`.
    pub fn gradient(&self, p: Point) -> Point {
        let (_, dxi) = self.streamwise(p[0]);
        let psi1 = self.psi1(p);
        let (psi2, dpsi2) = self.psi2_with_slope(p[1]);
        [-dxi * psi1 * psi2, psi1 * dpsi2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::RegionSpec;

    fn side_config(beta1: f64) -> ProblemConfig {
        ProblemConfig::new(1e-6, [beta1, 0.0], RegionSpec::rect(0.0, 0.2, 0.4, 0.6))
    }

    #[test]
    fn unit_inside_strip() {
        let h = 1.0 / 256.0;
        let w = build_weight(&side_config(1.0), Direction::Downstream, h, 0.05).unwrap();
        let p = [0.37, 0.5];
        assert!(p[1] > w.spec.y_ring_lo && p[1] < w.spec.y_ring_hi);
        assert_eq!(w.value(p), (-0.37f64).exp());
    }

    #[test]
    fn cube_decay_at_margin() {
        let h = 1.0 / 256.0;
        let lambda = 0.05;
        let w = build_weight(&side_config(1.0), Direction::Downstream, h, lambda).unwrap();
        let margin = WeightSpec::margin(lambda, h);
        let y = w.spec.y_ring_hi + margin;
        assert!((y - 0.6).abs() < 1e-14);
        assert!((w.psi2([0.5, y]) - h.powi(3)).abs() < 1e-12 * h.powi(3));
        let y = w.spec.y_ring_lo - margin;
        assert!((w.psi2([0.5, y]) - h.powi(3)).abs() < 1e-12 * h.powi(3));
    }

    #[test]
    fn too_coarse_for_lambda() {
        let err = build_weight(&side_config(1.0), Direction::Downstream, 1.0 / 32.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::WeightConstruction { .. }));
        let lmax = WeightSpec::max_lambda(1.0 / 32.0, (0.4, 0.6));
        assert!(build_weight(&side_config(1.0), Direction::Downstream, 1.0 / 32.0, 0.99 * lmax).is_ok());
        assert!(build_weight(&side_config(1.0), Direction::Downstream, 1.0 / 32.0, lmax).is_err());
    }

    #[test]
    fn paper_orientation_formulas() {
        let h = 1.0 / 256.0;
        // β₁ > 0 downstream: ψ₁ = e^{-x}; β₁ < 0 upstream: ψ₁ = -e^{-x}.
        let down = build_weight(&side_config(1.0), Direction::Downstream, h, 0.05).unwrap();
        let up = build_weight(&side_config(-1.0), Direction::Upstream, h, 0.05).unwrap();
        for x in [0.0, 0.3, 0.9] {
            assert_eq!(down.psi1([x, 0.2]), (-x).exp());
            assert_eq!(up.psi1([x, 0.2]), -(-x).exp());
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 1.0 / 128.0;
        let w = build_weight(&side_config(1.0), Direction::Upstream, h, 0.04).unwrap();
        let eps = 1e-7;
        for p in [[0.2, 0.3], [0.7, 0.5], [0.45, 0.62]] {
            let g = w.gradient(p);
            let gx = (w.value([p[0] + eps, p[1]]) - w.value([p[0] - eps, p[1]])) / (2.0 * eps);
            let gy = (w.value([p[0], p[1] + eps]) - w.value([p[0], p[1] - eps])) / (2.0 * eps);
            assert!((g[0] - gx).abs() < 1e-6 * (1.0 + gx.abs()));
            assert!((g[1] - gy).abs() < 1e-6 * (1.0 + gy.abs()));
        }
    }
}
