//! Fixed quadrature rules on triangles and edges.
//!
//! Triangle rules are stored in barycentric coordinates with weights that sum
//! to one; multiply by the element area to integrate.

use std::sync::LazyLock;

use crate::mesh::Point;

#[derive(Debug, Clone, Copy)]
pub struct TriangleRule<'a> {
    pub points: &'a [[f64; 3]],
    pub weights: &'a [f64],
}

const D4_W1: f64 = 0.223_381_589_678_011_47;
const D4_W2: f64 = 0.109_951_743_655_321_87;
const D4_A: f64 = 0.445_948_490_915_964_89;
const D4_B: f64 = 0.091_576_213_509_770_743;

/// Six-point rule, exact for polynomials of degree 4.
pub const DEGREE_4: TriangleRule<'static> = TriangleRule {
    points: &[
        [1.0 - 2.0 * D4_A, D4_A, D4_A],
        [D4_A, 1.0 - 2.0 * D4_A, D4_A],
        [D4_A, D4_A, 1.0 - 2.0 * D4_A],
        [1.0 - 2.0 * D4_B, D4_B, D4_B],
        [D4_B, 1.0 - 2.0 * D4_B, D4_B],
        [D4_B, D4_B, 1.0 - 2.0 * D4_B],
    ],
    weights: &[D4_W1, D4_W1, D4_W1, D4_W2, D4_W2, D4_W2],
};

// (6 ∓ √15)/21 and (155 ∓ √15)/1200.
const D5_A1: f64 = 0.101_286_507_323_456_34;
const D5_A2: f64 = 0.470_142_064_105_115_1;
const D5_W1: f64 = 0.125_939_180_544_827_15;
const D5_W2: f64 = 0.132_394_152_788_506_18;

/// Seven-point rule, exact for polynomials of degree 5.
pub const DEGREE_5: TriangleRule<'static> = TriangleRule {
    points: &[
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [1.0 - 2.0 * D5_A1, D5_A1, D5_A1],
        [D5_A1, 1.0 - 2.0 * D5_A1, D5_A1],
        [D5_A1, D5_A1, 1.0 - 2.0 * D5_A1],
        [1.0 - 2.0 * D5_A2, D5_A2, D5_A2],
        [D5_A2, 1.0 - 2.0 * D5_A2, D5_A2],
        [D5_A2, D5_A2, 1.0 - 2.0 * D5_A2],
    ],
    weights: &[0.225, D5_W1, D5_W1, D5_W1, D5_W2, D5_W2, D5_W2],
};

impl TriangleRule<'_> {
    /// Iterates `(physical point, barycentric coordinates, weight)` with the
    /// weight already scaled by the triangle area.
    pub fn on(
        &self,
        vertices: [Point; 3],
        area: f64,
    ) -> impl Iterator<Item = (Point, [f64; 3], f64)> + '_ {
        self.points.iter().zip(self.weights).map(move |(l, &w)| {
            let x = l[0] * vertices[0][0] + l[1] * vertices[1][0] + l[2] * vertices[2][0];
            let y = l[0] * vertices[0][1] + l[1] * vertices[1][1] + l[2] * vertices[2][1];
            ([x, y], *l, w * area)
        })
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    assert!(order > 0, "Gauss-Legendre rule needs at least one point");
    let m = order as f64;
    (0..order)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m + 0.5)).cos();
            let mut derivative = 1.0;
            for _ in 0..100 {
                let (mut p_prev, mut p) = (1.0, x);
                for k in 2..=order {
                    let k = k as f64;
                    (p_prev, p) = (p, ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k);
                }
                if order == 1 {
                    p_prev = 1.0;
                }
                derivative = m * (x * p - p_prev) / (x * x - 1.0);
                let step = p / derivative;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * derivative * derivative))
        })
        .collect()
}

/// Collapsed (Duffy) product of Gauss-Legendre rules, `order²` points,
/// exact for polynomials of degree `2 order - 2`.
#[derive(Debug, Clone)]
pub struct CollapsedRule {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl CollapsedRule {
    pub fn new(order: usize) -> Self {
        let gl = gauss_legendre(order);
        let mut points = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for &(s, ws) in &gl {
            for &(t, wt) in &gl {
                let (a, b) = (s, t * (1.0 - s));
                points.push([1.0 - a - b, a, b]);
                weights.push(2.0 * ws * wt * (1.0 - s));
            }
        }
        Self { points, weights }
    }

    pub fn rule(&self) -> TriangleRule<'_> {
        TriangleRule {
            points: &self.points,
            weights: &self.weights,
        }
    }
}

static LOAD: LazyLock<CollapsedRule> = LazyLock::new(|| CollapsedRule::new(6));
static FINE: LazyLock<CollapsedRule> = LazyLock::new(|| CollapsedRule::new(7));

/// 36-point rule of degree 10, used for the load vector whose integrand
/// oscillates on the scale of coarse elements.
pub fn load_rule() -> TriangleRule<'static> {
    LOAD.rule()
}

/// 49-point rule of degree 12 for sub-element pieces of weighted integrals.
pub fn fine_rule() -> TriangleRule<'static> {
    FINE.rule()
}

/// Three-point Gauss-Legendre rule on `[0, 1]` as `(t, weight)`.
pub const GAUSS_3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫ over the reference triangle of x^p y^q = p! q! / (p + q + 2)!.
    fn monomial_exact(p: u32, q: u32) -> f64 {
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        fact(p) * fact(q) / fact(p + q + 2)
    }

    fn check(rule: &TriangleRule<'_>, degree: u32) {
        let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for p in 0..=degree {
            for q in 0..=(degree - p) {
                let approx: f64 = rule
                    .on(verts, 0.5)
                    .map(|(x, _, w)| w * x[0].powi(p as i32) * x[1].powi(q as i32))
                    .sum();
                let exact = monomial_exact(p, q);
                assert!((approx - exact).abs() < 1e-14 * exact.max(1e-3), "x^{p} y^{q}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for rule in [DEGREE_4, DEGREE_5] {
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
            for l in rule.points {
                assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exactness_degrees() {
        check(&DEGREE_4, 4);
        check(&DEGREE_5, 5);
    }

    #[test]
    fn degree_5_constants_match_closed_form() {
        let s15 = 15f64.sqrt();
        assert!((D5_A1 - (6.0 - s15) / 21.0).abs() < 1e-16);
        assert!((D5_A2 - (6.0 + s15) / 21.0).abs() < 1e-16);
        assert!((D5_W1 - (155.0 - s15) / 1200.0).abs() < 1e-16);
        assert!((D5_W2 - (155.0 + s15) / 1200.0).abs() < 1e-16);
    }

    #[test]
    fn collapsed_rules_are_exact() {
        for order in [1, 2, 4, 6, 7] {
            let rule = CollapsedRule::new(order);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            check(&rule.rule(), 2 * order as u32 - 2);
        }
    }

    #[test]
    fn gauss_legendre_matches_three_point_rule() {
        let gl = gauss_legendre(3);
        for ((t, w), (t3, w3)) in gl.iter().zip(GAUSS_3) {
            assert!((t - t3).abs() < 1e-15 && (w - w3).abs() < 1e-15, "{t} {w}");
        }
    }

    #[test]
    fn gauss_3_is_degree_5() {
        for k in 0..=5 {
            let approx: f64 = GAUSS_3.iter().map(|(t, w)| w * t.powi(k)).sum();
            assert!((approx - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
