use serde::{Deserialize, Serialize};

use super::{DomainError, Point};

/// Temporal deviation cost of one demand type, piecewise linear in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TemporalCostSpec {
    /// `s * (b * (tau - t)^+ + h * (t - tau)^+)`: zero at the preferred
    /// time `tau`, slope `s*b` on the early side, `s*h` on the late side.
    TwoPieceLinear {
        sensitivity: f64,
        early_slope: f64,
        late_slope: f64,
        preferred_time: f64,
    },
    /// Convex nonnegative piecewise-linear cost given by `(t, value)`
    /// nodes, zero at exactly one node, extended beyond the node range
    /// with the end slopes.
    PiecewiseLinear { points: Vec<(f64, f64)> },
}

impl TemporalCostSpec {
    pub fn two_piece(sensitivity: f64, early_slope: f64, late_slope: f64, preferred_time: f64) -> Self {
        TemporalCostSpec::TwoPieceLinear {
            sensitivity,
            early_slope,
            late_slope,
            preferred_time,
        }
    }

    /// One-sided linear waiting cost `s * (t - start)^+`.
    pub fn waiting(sensitivity: f64, start: f64) -> Self {
        TemporalCostSpec::TwoPieceLinear {
            sensitivity,
            early_slope: 0.0,
            late_slope: 1.0,
            preferred_time: start,
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        match self {
            TemporalCostSpec::TwoPieceLinear {
                sensitivity,
                early_slope,
                late_slope,
                preferred_time,
            } => {
                if !(sensitivity.is_finite() && *sensitivity > 0.0) {
                    return Err(DomainError::validation("temporal sensitivity must be > 0"));
                }
                if !(early_slope.is_finite() && *early_slope >= 0.0)
                    || !(late_slope.is_finite() && *late_slope >= 0.0)
                {
                    return Err(DomainError::validation(
                        "temporal cost slopes must be finite and >= 0",
                    ));
                }
                if !preferred_time.is_finite() {
                    return Err(DomainError::validation("preferred time must be finite"));
                }
                Ok(())
            }
            TemporalCostSpec::PiecewiseLinear { points } => {
                if points.len() < 2 {
                    return Err(DomainError::validation(
                        "piecewise-linear cost needs at least two points",
                    ));
                }
                let mut zeros = 0usize;
                for window in points.windows(2) {
                    let (t0, v0) = window[0];
                    let (t1, v1) = window[1];
                    if !(t0.is_finite() && v0.is_finite() && t1.is_finite() && v1.is_finite()) {
                        return Err(DomainError::validation(
                            "piecewise-linear points must be finite",
                        ));
                    }
                    if t1 <= t0 {
                        return Err(DomainError::validation(
                            "piecewise-linear breakpoints must be strictly increasing",
                        ));
                    }
                }
                let mut prev_slope = f64::NEG_INFINITY;
                for window in points.windows(2) {
                    let slope = (window[1].1 - window[0].1) / (window[1].0 - window[0].0);
                    if slope < prev_slope - 1e-12 {
                        return Err(DomainError::validation(
                            "piecewise-linear cost must be convex (nondecreasing slopes)",
                        ));
                    }
                    prev_slope = prev_slope.max(slope);
                }
                for &(_, v) in points {
                    if v < 0.0 {
                        return Err(DomainError::validation(
                            "piecewise-linear cost must be nonnegative",
                        ));
                    }
                    if v == 0.0 {
                        zeros += 1;
                    }
                }
                if zeros != 1 {
                    return Err(DomainError::validation(
                        "piecewise-linear cost must be zero at exactly one point",
                    ));
                }
                let first_slope = (points[1].1 - points[0].1) / (points[1].0 - points[0].0);
                let last = points.len() - 1;
                let last_slope =
                    (points[last].1 - points[last - 1].1) / (points[last].0 - points[last - 1].0);
                if first_slope > 0.0 || last_slope < 0.0 {
                    return Err(DomainError::validation(
                        "piecewise-linear cost must be nonincreasing at the left end and nondecreasing at the right end",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Exact cost at time `t`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TemporalCostSpec::TwoPieceLinear {
                sensitivity,
                early_slope,
                late_slope,
                preferred_time,
            } => {
                let early = (preferred_time - t).max(0.0);
                let late = (t - preferred_time).max(0.0);
                sensitivity * (early_slope * early + late_slope * late)
            }
            TemporalCostSpec::PiecewiseLinear { points } => {
                let n = points.len();
                if t <= points[0].0 {
                    let slope = (points[1].1 - points[0].1) / (points[1].0 - points[0].0);
                    return points[0].1 + slope * (t - points[0].0);
                }
                if t >= points[n - 1].0 {
                    let slope =
                        (points[n - 1].1 - points[n - 2].1) / (points[n - 1].0 - points[n - 2].0);
                    return points[n - 1].1 + slope * (t - points[n - 1].0);
                }
                let k = points.partition_point(|&(bt, _)| bt <= t) - 1;
                let (t0, v0) = points[k];
                let (t1, v1) = points[k + 1];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// The unique time where the cost is zero.
    pub fn preferred_time(&self) -> f64 {
        match self {
            TemporalCostSpec::TwoPieceLinear { preferred_time, .. } => *preferred_time,
            TemporalCostSpec::PiecewiseLinear { points } => {
                points
                    .iter()
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .expect("validated piecewise-linear has points")
                    .0
            }
        }
    }

    /// Kinks strictly inside `(t0, t1)`, sorted.
    pub(crate) fn internal_breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            TemporalCostSpec::TwoPieceLinear { preferred_time, .. } => {
                if *preferred_time > t0 && *preferred_time < t1 {
                    vec![*preferred_time]
                } else {
                    vec![]
                }
            }
            TemporalCostSpec::PiecewiseLinear { points } => points
                .iter()
                .map(|&(t, _)| t)
                .filter(|&t| t > t0 && t < t1)
                .collect(),
        }
    }

    pub fn as_two_piece(&self) -> Option<(f64, f64, f64, f64)> {
        match self {
            TemporalCostSpec::TwoPieceLinear {
                sensitivity,
                early_slope,
                late_slope,
                preferred_time,
            } => Some((*sensitivity, *early_slope, *late_slope, *preferred_time)),
            TemporalCostSpec::PiecewiseLinear { .. } => None,
        }
    }
}

/// Spatial transport cost per unit demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpatialCostSpec {
    /// `coefficient * ||x - y||^exponent` with `exponent >= 1`.
    PowerOfDistance { exponent: f64, coefficient: f64 },
}

impl SpatialCostSpec {
    pub fn power(exponent: f64, coefficient: f64) -> Self {
        SpatialCostSpec::PowerOfDistance {
            exponent,
            coefficient,
        }
    }

    /// Plain Euclidean distance.
    pub fn euclidean() -> Self {
        SpatialCostSpec::power(1.0, 1.0)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        match self {
            SpatialCostSpec::PowerOfDistance {
                exponent,
                coefficient,
            } => {
                if !(exponent.is_finite() && *exponent >= 1.0) {
                    return Err(DomainError::validation("spatial cost exponent must be >= 1"));
                }
                if !(coefficient.is_finite() && *coefficient > 0.0) {
                    return Err(DomainError::validation("spatial cost coefficient must be > 0"));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        match self {
            SpatialCostSpec::PowerOfDistance {
                exponent,
                coefficient,
            } => {
                let d = x.distance(y);
                if *exponent == 1.0 {
                    coefficient * d
                } else if *exponent == 2.0 {
                    coefficient * d * d
                } else {
                    coefficient * d.powf(*exponent)
                }
            }
        }
    }
}

/// Piecewise-constant service rate over a bounded horizon.
///
/// `breakpoints` has one more entry than `rates` and spans the horizon;
/// segment `k` has constant rate `rates[k]` on
/// `[breakpoints[k], breakpoints[k+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityProfile {
    breakpoints: Vec<f64>,
    rates: Vec<f64>,
}

impl CapacityProfile {
    pub fn new(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self, DomainError> {
        if breakpoints.len() < 2 || rates.len() + 1 != breakpoints.len() {
            return Err(DomainError::validation(
                "capacity profile needs k+1 breakpoints for k rates",
            ));
        }
        for window in breakpoints.windows(2) {
            if !(window[0].is_finite() && window[1].is_finite()) || window[1] <= window[0] {
                return Err(DomainError::validation(
                    "capacity breakpoints must be finite and strictly increasing",
                ));
            }
        }
        if rates.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(DomainError::validation("capacity rates must be > 0"));
        }
        Ok(CapacityProfile { breakpoints, rates })
    }

    pub fn constant(rate: f64, t_start: f64, t_end: f64) -> Result<Self, DomainError> {
        CapacityProfile::new(vec![t_start, t_end], vec![rate])
    }

    pub fn horizon(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn is_constant(&self) -> bool {
        self.rates.len() == 1
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        let (t0, t1) = self.horizon();
        if t < t0 || t > t1 {
            return 0.0;
        }
        let k = self
            .breakpoints
            .partition_point(|&b| b <= t)
            .saturating_sub(1)
            .min(self.rates.len() - 1);
        self.rates[k]
    }

    /// Total capacity over the whole horizon.
    pub fn total(&self) -> f64 {
        self.rates
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(r, w)| r * (w[1] - w[0]))
            .sum()
    }

    /// Exact integral of the rate over `[a, b]` clamped to the horizon.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let (t0, t1) = self.horizon();
        let a = a.max(t0);
        let b = b.min(t1);
        if b <= a {
            return 0.0;
        }
        let mut acc = 0.0;
        for (k, w) in self.breakpoints.windows(2).enumerate() {
            let lo = w[0].max(a);
            let hi = w[1].min(b);
            if hi > lo {
                acc += self.rates[k] * (hi - lo);
            }
        }
        acc
    }

    /// Smallest `t` with `integrate(horizon_start, t) >= mass`, or the
    /// horizon end if the profile cannot hold that much.
    pub fn time_to_serve(&self, mass: f64) -> f64 {
        let (t0, t1) = self.horizon();
        if mass <= 0.0 {
            return t0;
        }
        let mut remaining = mass;
        for (k, w) in self.breakpoints.windows(2).enumerate() {
            let seg = self.rates[k] * (w[1] - w[0]);
            if remaining <= seg {
                return w[0] + remaining / self.rates[k];
            }
            remaining -= seg;
        }
        t1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_piece_examples() {
        let spec = TemporalCostSpec::two_piece(1.0, 2.0, 1.0, 0.0);
        assert_eq!(spec.eval(0.0), 0.0);
        assert_eq!(spec.eval(-1.0), 2.0);
        let spec = TemporalCostSpec::two_piece(0.7, 2.0, 1.0, 0.0);
        assert!((spec.eval(3.0) - 2.1).abs() < 1e-12);
    }

    #[test]
    fn two_piece_nonnegative_and_zero_only_at_tau() {
        let spec = TemporalCostSpec::two_piece(1.3, 0.5, 2.0, 0.7);
        for k in -100..=100 {
            let t = 0.7 + k as f64 * 0.05;
            let v = spec.eval(t);
            assert!(v >= 0.0);
            if k != 0 {
                assert!(v > 0.0);
            }
        }
        assert_eq!(spec.eval(0.7), 0.0);
    }

    #[test]
    fn piecewise_linear_eval_and_validation() {
        let spec = TemporalCostSpec::PiecewiseLinear {
            points: vec![(-1.0, 2.0), (0.0, 0.0), (2.0, 1.0)],
        };
        spec.validate().unwrap();
        assert_eq!(spec.eval(0.0), 0.0);
        assert!((spec.eval(1.0) - 0.5).abs() < 1e-12);
        // extension by end slopes
        assert!((spec.eval(-2.0) - 4.0).abs() < 1e-12);
        assert!((spec.eval(3.0) - 1.5).abs() < 1e-12);
        assert_eq!(spec.preferred_time(), 0.0);

        let nonconvex = TemporalCostSpec::PiecewiseLinear {
            points: vec![(-1.0, 2.0), (0.0, 0.0), (1.0, 2.0), (2.0, 2.5)],
        };
        assert!(nonconvex.validate().is_err());
        let two_zeros = TemporalCostSpec::PiecewiseLinear {
            points: vec![(-1.0, 0.0), (0.0, 0.0), (1.0, 2.0)],
        };
        assert!(two_zeros.validate().is_err());
    }

    #[test]
    fn spatial_cost_examples() {
        let unit = SpatialCostSpec::euclidean();
        let origin = Point::new(0.0, 0.0);
        assert_eq!(unit.eval(&origin, &origin), 0.0);
        assert!((unit.eval(&origin, &Point::new(3.0, 4.0)) - 5.0).abs() < 1e-12);
        let quad = SpatialCostSpec::power(2.0, 0.5);
        assert!((quad.eval(&origin, &Point::new(1.0, 1.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spatial_cost_increases_along_rays() {
        let spec = SpatialCostSpec::power(1.7, 2.0);
        let y = Point::new(0.3, 0.4);
        let dir = (0.6, -0.8);
        let mut prev = 0.0;
        for k in 1..=20 {
            let s = 0.1 * k as f64;
            let x = Point::new(y.x + dir.0 * s, y.y + dir.1 * s);
            let v = spec.eval(&x, &y);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn capacity_profile_integration() {
        let cap = CapacityProfile::new(vec![0.0, 1.0, 3.0], vec![2.0, 0.5]).unwrap();
        assert!((cap.total() - 3.0).abs() < 1e-12);
        assert!((cap.integrate(0.5, 2.0) - (1.0 + 0.5)).abs() < 1e-12);
        assert!((cap.integrate(-5.0, 10.0) - 3.0).abs() < 1e-12);
        assert_eq!(cap.integrate(2.0, 2.0), 0.0);
        assert_eq!(cap.rate_at(0.5), 2.0);
        assert_eq!(cap.rate_at(2.0), 0.5);
        assert!((cap.time_to_serve(2.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_profile_validation() {
        assert!(CapacityProfile::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(CapacityProfile::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(CapacityProfile::new(vec![0.0], vec![]).is_err());
    }
}
