//! The four-chart atlas of the unit circle and its bilipschitz constants.
//!
//! Charts V₁…V₄ are the open half circles x₁ > 0, x₂ > 0, x₁ < 0, x₂ < 0
//! with coordinates x₂, x₁, x₂, x₁. The cover P consists of the arcs
//! (−π/3+ω, π/3−ω), (π/6+ω, 5π/6−ω), (2π/3+ω, 4π/3−ω), (7π/6+ω, 11π/6−ω).

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::arc_distance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartCoordinate {
    /// φ(cos θ, sin θ) = sin θ
    Sine,
    /// φ(cos θ, sin θ) = cos θ
    Cosine,
}

impl ChartCoordinate {
    pub fn eval(self, theta: f64) -> f64 {
        match self {
            ChartCoordinate::Sine => theta.sin(),
            ChartCoordinate::Cosine => theta.cos(),
        }
    }
}

/// An open arc (start, end) of the cover with its coordinate map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chart {
    pub start: f64,
    pub end: f64,
    pub coordinate: ChartCoordinate,
}

impl Chart {
    /// Distance from θ to the chart boundary, negative outside the chart.
    pub fn margin(&self, theta: f64) -> f64 {
        let center = 0.5 * (self.start + self.end);
        0.5 * (self.end - self.start) - arc_distance(theta, center)
    }

    /// Whether the closed arc [θ − radius, θ + radius] lies in the open chart.
    pub fn contains_ball(&self, theta: f64, radius: f64) -> bool {
        radius < self.margin(theta)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        loop {
            let theta = rng.random_range(self.start..self.end);
            if theta > self.start {
                return theta;
            }
        }
    }

    /// sup over the chart of 1/√(1 − η²), where η ranges over coordinate
    /// values. The coordinate is monotone on each chart, so the extreme |η|
    /// sits at an endpoint.
    fn inverse_derivative_bound(&self) -> f64 {
        let eta = self
            .coordinate
            .eval(self.start)
            .abs()
            .max(self.coordinate.eval(self.end).abs());
        1.0 / (1.0 - eta * eta).sqrt()
    }

    /// sup over the chart of |dφ/dθ|.
    fn derivative_bound(&self) -> f64 {
        let (a, b) = (self.start, self.end);
        // dφ/dθ is cos θ or −sin θ; its modulus peaks where the chart
        // crosses the axis it projects onto.
        let peak = match self.coordinate {
            ChartCoordinate::Sine => [0.0, PI, TAU],
            ChartCoordinate::Cosine => [PI / 2.0, 3.0 * PI / 2.0, -PI / 2.0],
        };
        let derivative = |t: f64| match self.coordinate {
            ChartCoordinate::Sine => t.cos().abs(),
            ChartCoordinate::Cosine => t.sin().abs(),
        };
        let interior = peak.iter().any(|&p| a < p && p < b);
        if interior {
            1.0
        } else {
            derivative(a).max(derivative(b))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartAtlas {
    pub omega: f64,
    pub charts: Vec<Chart>,
    /// Radius of the balls used for the local pair checks.
    pub lebesgue_delta: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartReport {
    pub atlas: ChartAtlas,
    pub c1: f64,
    pub c2: f64,
    pub product: f64,
    /// 1/√(1 − sin²(π/3 − ω)).
    pub closed_form: f64,
    pub pairs_checked: usize,
    /// max over sampled pairs of c1·|φ(y) − φ(z)| / r(y, z).
    pub lower_ratio: f64,
    /// max over sampled pairs of r(y, z) / (c2·|φ(y) − φ(z)|).
    pub upper_ratio: f64,
    /// Whether every sampled B(x, 3δ) fit inside a chart.
    pub lebesgue_ok: bool,
    /// The cover's Lebesgue number π/12 − ω: consecutive arcs overlap in an
    /// arc of length π/6 − 2ω.
    pub lebesgue_number: f64,
}

/// Largest γ such that every γ-ball lies in one arc of the cover.
pub fn cover_lebesgue_number(omega: f64) -> f64 {
    PI / 12.0 - omega
}

/// 1/√(1 − sin²(π/3 − ω)).
pub fn chart_product_closed_form(omega: f64) -> f64 {
    1.0 / (1.0 - (FRAC_PI_3 - omega).sin().powi(2)).sqrt()
}

pub fn circle_atlas(omega: f64, delta: f64) -> Result<ChartAtlas> {
    if !(omega > 0.0 && omega < PI / 12.0) {
        return Err(Error::InvalidArgument(format!("ω must lie in (0, π/12), got {omega}")));
    }
    if !(delta > 0.0 && delta < PI / 36.0) {
        return Err(Error::InvalidArgument(format!("δ must lie in (0, π/36), got {delta}")));
    }
    let charts = vec![
        Chart {
            start: -FRAC_PI_3 + omega,
            end: FRAC_PI_3 - omega,
            coordinate: ChartCoordinate::Sine,
        },
        Chart {
            start: FRAC_PI_6 + omega,
            end: 5.0 * FRAC_PI_6 - omega,
            coordinate: ChartCoordinate::Cosine,
        },
        Chart {
            start: 2.0 * FRAC_PI_3 + omega,
            end: 4.0 * FRAC_PI_3 - omega,
            coordinate: ChartCoordinate::Sine,
        },
        Chart {
            start: 7.0 * FRAC_PI_6 + omega,
            end: 11.0 * FRAC_PI_6 - omega,
            coordinate: ChartCoordinate::Cosine,
        },
    ];
    let c1 = 1.0 / charts.iter().map(Chart::derivative_bound).fold(0.0, f64::max);
    let c2 = charts.iter().map(Chart::inverse_derivative_bound).fold(0.0, f64::max);
    Ok(ChartAtlas {
        omega,
        charts,
        lebesgue_delta: delta,
        c1,
        c2,
    })
}

/// Build the atlas, compute c₁ and c₂ from the charts, and check both
/// bilipschitz inequalities on `pairs` random pairs inside charts plus up
/// to `pairs` random pairs inside δ-balls. Whether 3δ is a Lebesgue number
/// is reported, not enforced: that needs 3δ < π/12 − ω, which is stricter
/// than δ < π/36 once ω > 0.
pub fn chart_constants_circle(omega: f64, delta: f64, pairs: usize, seed: u64) -> Result<ChartReport> {
    let atlas = circle_atlas(omega, delta)?;
    let (c1, c2) = (atlas.c1, atlas.c2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slack = 1e-12;

    let mut lower_ratio = 0.0f64;
    let mut upper_ratio = 0.0f64;
    let mut lebesgue_ok = true;
    let mut checked = 0usize;

    let mut record = |chart: &Chart, y: f64, z: f64| -> Result<()> {
        let coordinate_gap = (chart.coordinate.eval(y) - chart.coordinate.eval(z)).abs();
        let r = arc_distance(y, z);
        if r == 0.0 {
            return Ok(());
        }
        let lower = c1 * coordinate_gap / r;
        let upper = r / (c2 * coordinate_gap);
        lower_ratio = lower_ratio.max(lower);
        upper_ratio = upper_ratio.max(upper);
        if lower > 1.0 + slack || upper > 1.0 + slack {
            return Err(Error::ChartViolation(format!(
                "pair ({y}, {z}) in chart ({}, {}): c1·|y−z|/r = {lower}, r/(c2·|y−z|) = {upper}",
                chart.start, chart.end
            )));
        }
        checked += 1;
        Ok(())
    };

    for _ in 0..pairs {
        let chart = atlas.charts[rng.random_range(0..atlas.charts.len())];
        let (y, z) = (chart.sample(&mut rng), chart.sample(&mut rng));
        record(&chart, y, z)?;
    }
    for _ in 0..pairs {
        let x = rng.random_range(0.0..TAU);
        lebesgue_ok &= atlas.charts.iter().any(|c| c.contains_ball(x, 3.0 * delta));
        // The chart with the largest margin at x holds the largest ball.
        let chart = *atlas
            .charts
            .iter()
            .max_by(|a, b| a.margin(x).total_cmp(&b.margin(x)))
            .expect("four charts");
        if !chart.contains_ball(x, delta) {
            continue;
        }
        let y = x + rng.random_range(-delta..delta);
        let z = x + rng.random_range(-delta..delta);
        record(&chart, y, z)?;
    }

    Ok(ChartReport {
        c1,
        c2,
        product: c1 * c2,
        closed_form: chart_product_closed_form(omega),
        pairs_checked: checked,
        lower_ratio,
        upper_ratio,
        lebesgue_ok,
        lebesgue_number: cover_lebesgue_number(omega),
        atlas,
    })
}

/// μ(B(x, r)) for the arc-length measure on the unit circle.
pub fn arc_measure(radius: f64) -> f64 {
    (2.0 * radius).clamp(0.0, TAU)
}

/// max over radii of μ(B(x, 2r)) / μ(B(x, r)); the measure is rotation
/// invariant so the center does not matter.
pub fn doubling_constant(radii: &[f64]) -> f64 {
    radii
        .iter()
        .filter(|&&r| r > 0.0)
        .map(|&r| arc_measure(2.0 * r) / arc_measure(r))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_match_closed_form() {
        for omega in [PI / 24.0, PI / 16.0, PI / 13.0] {
            let delta = 0.9 * cover_lebesgue_number(omega) / 3.0;
            let report = chart_constants_circle(omega, delta, 10_000, 9).unwrap();
            assert_eq!(report.c1, 1.0);
            assert!((report.product - report.closed_form).abs() < 1e-10);
            assert!(report.product < 2.0);
            assert!(report.lebesgue_ok);
            assert_eq!(report.pairs_checked, 20_000);
        }
        let report = chart_constants_circle(PI / 24.0, PI / 40.0, 100, 1).unwrap();
        assert!((report.product - 1.642_68).abs() < 1e-5);
    }

    #[test]
    fn product_tends_to_two() {
        let near = chart_product_closed_form(1e-9);
        assert!(near < 2.0 && 2.0 - near < 1e-8);
        let report = chart_constants_circle(1e-6, PI / 40.0, 1000, 2).unwrap();
        assert!(report.product < 2.0);
    }

    #[test]
    fn lebesgue_number_of_the_cover() {
        // The midpoint of an overlap is π/12 − ω away from both boundaries.
        let omega = PI / 24.0;
        let atlas = circle_atlas(omega, 0.01).unwrap();
        let gamma = cover_lebesgue_number(omega);
        let best = |x: f64| atlas.charts.iter().map(|c| c.margin(x)).fold(f64::MIN, f64::max);
        assert!((best(PI / 4.0) - gamma).abs() < 1e-12);
        let sampled = (0..100_000)
            .map(|i| best(TAU * i as f64 / 100_000.0))
            .fold(f64::MAX, f64::min);
        assert!((sampled - gamma).abs() < 1e-4);

        let wide = chart_constants_circle(omega, PI / 40.0, 2000, 4).unwrap();
        assert!(!wide.lebesgue_ok);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(chart_constants_circle(0.0, 0.05, 10, 0).is_err());
        assert!(chart_constants_circle(PI / 12.0, 0.05, 10, 0).is_err());
        assert!(chart_constants_circle(0.1, PI / 36.0, 10, 0).is_err());
    }

    #[test]
    fn arc_measure_doubles() {
        let radii: Vec<f64> = (1..1000).map(|i| i as f64 * (PI / 2.0) / 1000.0).collect();
        assert!((doubling_constant(&radii) - 2.0).abs() < 1e-12);
        assert!(doubling_constant(&[2.0]) < 2.0);
    }
}
