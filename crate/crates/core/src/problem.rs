//! Physical and stabilization parameters, region geometry and manufactured
//! solutions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::Point;

/// A subset of the unit square, used for the data set and for the regions
/// where errors are measured.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Disk { center: Point, radius: f64 },
    Rectangle { x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64 },
    /// Union of several regions (several data boxes, for instance).
    Union(Vec<RegionSpec>),
}

impl RegionSpec {
    pub fn rect(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        RegionSpec::Rectangle { x_lo, x_hi, y_lo, y_hi }
    }

    pub fn disk(center: Point, radius: f64) -> Self {
        RegionSpec::Disk { center, radius }
    }

    /// The whole unit square.
    pub fn unit_square() -> Self {
        Self::rect(0.0, 1.0, 0.0, 1.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            RegionSpec::Disk { center, radius } => {
                (p[0] - center[0]).hypot(p[1] - center[1]) <= *radius
            }
            RegionSpec::Rectangle { x_lo, x_hi, y_lo, y_hi } => {
                p[0] >= *x_lo && p[0] <= *x_hi && p[1] >= *y_lo && p[1] <= *y_hi
            }
            RegionSpec::Union(parts) => parts.iter().any(|r| r.contains(p)),
        }
    }

    /// `(y_lo, y_hi)` of the bounding box.
    pub fn y_extent(&self) -> (f64, f64) {
        match self {
            RegionSpec::Disk { center, radius } => (center[1] - radius, center[1] + radius),
            RegionSpec::Rectangle { y_lo, y_hi, .. } => (*y_lo, *y_hi),
            RegionSpec::Union(parts) => parts.iter().map(RegionSpec::y_extent).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), (a, b)| (lo.min(a), hi.max(b)),
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            RegionSpec::Disk { center, radius } => {
                *radius > 0.0
                    && center.iter().all(|c| c.is_finite())
                    && (center[0].clamp(0.0, 1.0) - center[0]).hypot(center[1].clamp(0.0, 1.0) - center[1])
                        < *radius
            }
            RegionSpec::Rectangle { x_lo, x_hi, y_lo, y_hi } => {
                x_lo < x_hi && y_lo < y_hi && *x_lo < 1.0 && *x_hi > 0.0 && *y_lo < 1.0 && *y_hi > 0.0
            }
            RegionSpec::Union(parts) => {
                !parts.is_empty() && parts.iter().all(|r| r.validate().is_ok())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "region {self:?} does not meet the unit square"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    /// Diffusion coefficient.
    pub mu: f64,
    /// Constant convection field `(β₁, 0)`.
    pub beta: Point,
    /// Gradient-jump penalty constant.
    pub gamma: f64,
    /// Dual stabilizer constant.
    pub gamma_star: f64,
    /// Exponent of the diffusive part of the data penalty, in `[0, 2]`.
    pub zeta: f64,
    /// Data set.
    pub omega: RegionSpec,
}

impl ProblemConfig {
    pub const DEFAULT_GAMMA: f64 = 1e-5;
    pub const DEFAULT_GAMMA_STAR: f64 = 1.0;
    pub const DEFAULT_ZETA: f64 = 2.0;

    pub fn new(mu: f64, beta: Point, omega: RegionSpec) -> Self {
        Self {
            mu,
            beta,
            gamma: Self::DEFAULT_GAMMA,
            gamma_star: Self::DEFAULT_GAMMA_STAR,
            zeta: Self::DEFAULT_ZETA,
            omega,
        }
    }

    pub fn beta_norm(&self) -> f64 {
        self.beta[0].hypot(self.beta[1])
    }

    /// Mesh Péclet number `|β| h / μ`.
    pub fn peclet(&self, h: f64) -> f64 {
        self.beta_norm() * h / self.mu
    }

    /// Scalar factor `|β|/h + μ h^{-ζ}` of the data penalty.
    pub fn data_penalty_coefficient(&self, h: f64) -> f64 {
        self.beta_norm() / h + self.mu * h.powf(-self.zeta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu must be positive, got {}", self.mu)));
        }
        if !self.beta.iter().all(|b| b.is_finite()) || self.beta_norm() == 0.0 {
            return Err(Error::InvalidArgument("beta must be finite and nonzero".into()));
        }
        if self.beta[1] != 0.0 {
            return Err(Error::InvalidArgument(
                "only axis-aligned convection (beta1, 0) is supported".into(),
            ));
        }
        if !(self.gamma >= 0.0 && self.gamma_star >= 0.0) {
            return Err(Error::InvalidArgument("stabilization constants must be nonnegative".into()));
        }
        if !(0.0..=2.0).contains(&self.zeta) {
            return Err(Error::InvalidArgument(format!("zeta must lie in [0, 2], got {}", self.zeta)));
        }
        self.omega.validate()
    }
}

/// Manufactured solutions with pointwise value, gradient and Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactSolution {
    /// `2 sin(5πx) sin(5πy)`, unit L² norm on the square.
    ProductSine,
    /// `sin(3πx) + tanh(100(y - 1/2))`, an internal layer at `y = 1/2`.
    Layer,
    /// `a + b x + c y`.
    Linear { a: f64, b: f64, c: f64 },
}

impl ExactSolution {
    pub fn value(&self, p: Point) -> f64 {
        let [x, y] = p;
        match *self {
            ExactSolution::ProductSine => 2.0 * (5.0 * PI * x).sin() * (5.0 * PI * y).sin(),
            ExactSolution::Layer => (3.0 * PI * x).sin() + (100.0 * (y - 0.5)).tanh(),
            ExactSolution::Linear { a, b, c } => a + b * x + c * y,
        }
    }

    pub fn gradient(&self, p: Point) -> Point {
        let [x, y] = p;
        match *self {
            ExactSolution::ProductSine => {
                let (sx, cx) = (5.0 * PI * x).sin_cos();
                let (sy, cy) = (5.0 * PI * y).sin_cos();
                [10.0 * PI * cx * sy, 10.0 * PI * sx * cy]
            }
            ExactSolution::Layer => {
                let t = (100.0 * (y - 0.5)).tanh();
                [3.0 * PI * (3.0 * PI * x).cos(), 100.0 * (1.0 - t * t)]
            }
            ExactSolution::Linear { b, c, .. } => [b, c],
        }
    }

    pub fn laplacian(&self, p: Point) -> f64 {
        let [x, y] = p;
        match *self {
            ExactSolution::ProductSine => {
                -100.0 * PI * PI * (5.0 * PI * x).sin() * (5.0 * PI * y).sin()
            }
            ExactSolution::Layer => {
                let t = (100.0 * (y - 0.5)).tanh();
                -9.0 * PI * PI * (3.0 * PI * x).sin() - 2.0e4 * (1.0 - t * t) * t
            }
            ExactSolution::Linear { .. } => 0.0,
        }
    }

    /// Source term `f = -μΔu + β·∇u`.
    pub fn source(&self, config: &ProblemConfig, p: Point) -> f64 {
        let g = self.gradient(p);
        -config.mu * self.laplacian(p) + config.beta[0] * g[0] + config.beta[1] * g[1]
    }
}
