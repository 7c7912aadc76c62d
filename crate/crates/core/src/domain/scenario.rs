use serde::{Deserialize, Serialize};

use super::{CapacityProfile, DemandField, DomainError, Point, SpatialCostSpec, TemporalCostSpec};

/// A service station: position inside the demand rectangle plus its
/// time-varying capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: usize,
    pub position: Point,
    pub capacity: CapacityProfile,
}

/// Which structural regime the temporal costs satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionMode {
    /// Common preferred time, strictly decreasing sensitivities, common
    /// early/late slopes across types.
    HomogeneousPreference,
    /// Common shape (sensitivity and slopes), distinct preferred times.
    HomogeneousSensitivity,
    /// Neither structured regime.
    General,
}

/// A full validated problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub demand: DemandField,
    pub stations: Vec<Station>,
    pub temporal_costs: Vec<TemporalCostSpec>,
    pub spatial_cost: SpatialCostSpec,
    pub reward: f64,
}

impl Scenario {
    pub fn new(
        demand: DemandField,
        stations: Vec<Station>,
        temporal_costs: Vec<TemporalCostSpec>,
        spatial_cost: SpatialCostSpec,
        reward: f64,
    ) -> Result<Self, DomainError> {
        let sc = Scenario {
            demand,
            stations,
            temporal_costs,
            spatial_cost,
            reward,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn type_count(&self) -> usize {
        self.demand.type_count()
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    /// Union of all station horizons.
    pub fn horizon(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.stations {
            let (a, b) = s.capacity.horizon();
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo, hi)
    }

    pub fn total_demand_mass(&self) -> f64 {
        self.demand.total_mass_all_types()
    }

    pub fn total_capacity(&self) -> f64 {
        self.stations.iter().map(|s| s.capacity.total()).sum()
    }

    /// Normalizer for tolerances and smoothing schedules: the reward plus
    /// the largest spatial cost between a grid corner and a station.
    pub fn cost_scale(&self) -> f64 {
        let (x0, x1, y0, y1) = self.demand.grid().bounds();
        let corners = [
            Point::new(x0, y0),
            Point::new(x0, y1),
            Point::new(x1, y0),
            Point::new(x1, y1),
        ];
        let mut max_delta: f64 = 0.0;
        for s in &self.stations {
            for c in &corners {
                max_delta = max_delta.max(self.spatial_cost.eval(c, &s.position));
            }
        }
        (self.reward + max_delta).max(1e-12)
    }

    /// Demand mass plus capacity; normalizer for mass-balance residuals.
    pub fn mass_scale(&self) -> f64 {
        (self.total_demand_mass() + self.total_capacity()).max(1e-12)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.stations.is_empty() {
            return Err(DomainError::validation("scenario needs at least one station"));
        }
        if self.temporal_costs.len() != self.demand.type_count() {
            return Err(DomainError::validation(format!(
                "temporal cost count {} does not match demand type count {}",
                self.temporal_costs.len(),
                self.demand.type_count()
            )));
        }
        if !(self.reward.is_finite() && self.reward >= 0.0) {
            return Err(DomainError::validation("reward must be finite and >= 0"));
        }
        self.spatial_cost.validate()?;
        for spec in &self.temporal_costs {
            spec.validate()?;
        }
        for (k, s) in self.stations.iter().enumerate() {
            if s.id != k {
                return Err(DomainError::validation(format!(
                    "station ids must be 0..n in order, found id {} at index {}",
                    s.id, k
                )));
            }
            if !self.demand.grid().contains(&s.position) {
                return Err(DomainError::validation(format!(
                    "station {} position ({}, {}) lies outside the grid rectangle",
                    s.id, s.position.x, s.position.y
                )));
            }
        }
        // Declared structured regimes must be internally consistent:
        // identical preferred times require strictly decreasing
        // sensitivities (checked when all costs are two-piece).
        if let Some(specs) = self.two_piece_specs() {
            let tau0 = specs[0].3;
            let common_tau = specs.iter().all(|s| s.3 == tau0);
            if common_tau && specs.len() > 1 {
                for w in specs.windows(2) {
                    if w[1].0 >= w[0].0 {
                        return Err(DomainError::validation(
                            "sensitivities not strictly decreasing for common preferred time",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn two_piece_specs(&self) -> Option<Vec<(f64, f64, f64, f64)>> {
        self.temporal_costs
            .iter()
            .map(|c| c.as_two_piece())
            .collect()
    }

    /// Detect the structural regime of the temporal costs.
    pub fn assumption_mode(&self) -> AssumptionMode {
        let Some(specs) = self.two_piece_specs() else {
            return AssumptionMode::General;
        };
        if specs.len() == 1 {
            return AssumptionMode::HomogeneousPreference;
        }
        let (s0, b0, h0, tau0) = specs[0];
        let common_tau = specs.iter().all(|&(_, _, _, t)| t == tau0);
        let common_shape = specs.iter().all(|&(_, b, h, _)| b == b0 && h == h0);
        let decreasing_s = specs.windows(2).all(|w| w[1].0 < w[0].0);
        if common_tau && common_shape && decreasing_s {
            return AssumptionMode::HomogeneousPreference;
        }
        let common_s = specs.iter().all(|&(s, _, _, _)| s == s0);
        let distinct_tau = {
            let mut taus: Vec<f64> = specs.iter().map(|&(_, _, _, t)| t).collect();
            taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
            taus.windows(2).all(|w| w[1] > w[0])
        };
        if common_s && common_shape && distinct_tau {
            return AssumptionMode::HomogeneousSensitivity;
        }
        AssumptionMode::General
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SpatialGrid;

    fn base_station(x: f64) -> Station {
        Station {
            id: 0,
            position: Point::new(x, 0.5),
            capacity: CapacityProfile::constant(1.0, 0.0, 1.0).unwrap(),
        }
    }

    #[test]
    fn minimal_scenario_has_unit_mass() {
        let field = DemandField::uniform(SpatialGrid::unit_square(10, 10), &[1.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![base_station(0.5)],
            vec![TemporalCostSpec::waiting(1.0, 0.0)],
            SpatialCostSpec::euclidean(),
            1.0,
        )
        .unwrap();
        assert!((sc.total_demand_mass() - 1.0).abs() < 1e-12);
        assert_eq!(sc.assumption_mode(), AssumptionMode::HomogeneousPreference);
    }

    #[test]
    fn rejects_increasing_sensitivities_with_common_tau() {
        let field = DemandField::uniform(SpatialGrid::unit_square(4, 4), &[1.0, 1.0]).unwrap();
        let err = Scenario::new(
            field,
            vec![base_station(0.5)],
            vec![
                TemporalCostSpec::two_piece(1.0, 1.0, 1.0, 0.0),
                TemporalCostSpec::two_piece(2.0, 1.0, 1.0, 0.0),
            ],
            SpatialCostSpec::euclidean(),
            1.0,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("not strictly decreasing"), "got: {msg}");
    }

    #[test]
    fn rejects_station_outside_grid() {
        let field = DemandField::uniform(SpatialGrid::unit_square(4, 4), &[1.0]).unwrap();
        let err = Scenario::new(
            field,
            vec![base_station(2.0)],
            vec![TemporalCostSpec::waiting(1.0, 0.0)],
            SpatialCostSpec::euclidean(),
            1.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("outside the grid"));
    }

    #[test]
    fn detects_homogeneous_sensitivity_mode() {
        let field = DemandField::uniform(SpatialGrid::unit_square(4, 4), &[1.0, 1.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![Station {
                id: 0,
                position: Point::new(0.5, 0.5),
                capacity: CapacityProfile::constant(1.0, -2.0, 4.0).unwrap(),
            }],
            vec![
                TemporalCostSpec::two_piece(1.0, 1.0, 1.0, 0.0),
                TemporalCostSpec::two_piece(1.0, 1.0, 1.0, 1.5),
            ],
            SpatialCostSpec::euclidean(),
            1.0,
        )
        .unwrap();
        assert_eq!(sc.assumption_mode(), AssumptionMode::HomogeneousSensitivity);
    }
}
