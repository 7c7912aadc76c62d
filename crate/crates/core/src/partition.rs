//! From dual weights to an explicit matching plan: labeled spatial cells,
//! exact temporal intervals, the per-(station, type) mass matrix, welfare,
//! and the structural-property verifiers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{AssumptionMode, Scenario, TemporalCostSpec};
use crate::envelope::TemporalEnvelope;
use crate::solver::{SpatialContext, WeightMatrix};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error(
        "plan inconsistency: spatial and temporal masses for station {station}, type {type_idx} \
         differ by {gap:.3e} (allowed {allowed:.3e})"
    )]
    Inconsistent {
        station: usize,
        type_idx: usize,
        gap: f64,
        allowed: f64,
    },
    #[error("verifier requires {required:?} mode, scenario is {actual:?}")]
    WrongMode {
        required: AssumptionMode,
        actual: AssumptionMode,
    },
}

/// Per-type cell labels: 0 marks unmatched cells, `i + 1` marks cells
/// served by station `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialPartition {
    pub labels: Vec<Vec<u32>>,
    /// Spatial cell demand mass per (station, type), row-major.
    pub masses: Vec<f64>,
    pub station_count: usize,
    pub type_count: usize,
}

impl SpatialPartition {
    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.masses[i * self.type_count + j]
    }
}

/// Per-station labeled service intervals plus idle time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalPartition {
    /// `intervals[i][j]` lists the closed intervals where station `i`
    /// serves type `j`.
    pub intervals: Vec<Vec<Vec<(f64, f64)>>>,
    pub idle: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareBreakdown {
    pub reward_total: f64,
    pub spatial_cost_total: f64,
    pub temporal_cost_total: f64,
    pub welfare: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingPlan {
    pub spatial: SpatialPartition,
    pub temporal: TemporalPartition,
    /// Served mass per (station, type), row-major; the spatial cell
    /// masses, which the temporal cells match within solver tolerance.
    pub q: Vec<f64>,
    pub welfare: WelfareBreakdown,
    pub served_mass: Vec<f64>,
    pub uncovered_mass: Vec<f64>,
    /// Largest |spatial - temporal| cell-mass gap across (i, j).
    pub consistency_residual: f64,
}

impl MatchingPlan {
    pub fn q_at(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.spatial.type_count + j]
    }
}

/// Label every grid cell per type: station `argmin_i delta + eta_ij` when
/// that minimum is at most `threshold`, else unmatched. Ties go to the
/// lowest station index.
pub fn spatial_cells(sc: &Scenario, eta: &WeightMatrix, threshold: f64) -> SpatialPartition {
    let ctx = SpatialContext::new(sc);
    spatial_cells_with(&ctx, sc, eta, threshold)
}

pub(crate) fn spatial_cells_with(
    ctx: &SpatialContext,
    sc: &Scenario,
    eta: &WeightMatrix,
    threshold: f64,
) -> SpatialPartition {
    let n = sc.station_count();
    let m = sc.type_count();
    let cells = sc.demand.grid().cell_count();
    let mut labels = vec![vec![0u32; cells]; m];
    let mut masses = vec![0.0; n * m];
    for cell in 0..cells {
        for (j, labels_j) in labels.iter_mut().enumerate() {
            let mut best_i = 0usize;
            let mut best = ctx.delta(cell, 0) + eta.get(0, j);
            for i in 1..n {
                let v = ctx.delta(cell, i) + eta.get(i, j);
                if v < best {
                    best = v;
                    best_i = i;
                }
            }
            if best <= threshold {
                labels_j[cell] = best_i as u32 + 1;
                masses[best_i * m + j] += ctx.mass(j, cell);
            }
        }
    }
    SpatialPartition {
        labels,
        masses,
        station_count: n,
        type_count: m,
    }
}

/// Exact per-type service intervals of one station: the times where
/// `l_j(t) - eta_j` is nonpositive and minimal across types, ties to the
/// lowest type index. Also returns the idle intervals.
pub fn temporal_cells(
    costs: &[TemporalCostSpec],
    eta_row: &[f64],
    horizon: (f64, f64),
) -> (Vec<Vec<(f64, f64)>>, Vec<(f64, f64)>) {
    let env = TemporalEnvelope::build(costs, eta_row, horizon);
    (env.merged_intervals(), env.idle_intervals())
}

/// Assemble the full plan from solved weights. `tol` is the solver's
/// relative mass-balance tolerance; spatial and temporal cell masses that
/// disagree by more than ten times it (scaled) are an inconsistency
/// error.
pub fn extract_plan(
    sc: &Scenario,
    eta: &WeightMatrix,
    tol: f64,
) -> Result<MatchingPlan, PartitionError> {
    let n = sc.station_count();
    let m = sc.type_count();
    let ctx = SpatialContext::new(sc);
    let spatial = spatial_cells_with(&ctx, sc, eta, sc.reward);

    let mut intervals = Vec::with_capacity(n);
    let mut idle = Vec::with_capacity(n);
    let mut temporal_masses = vec![0.0; n * m];
    let mut temporal_cost_total = 0.0;
    for i in 0..n {
        let cap = &sc.stations[i].capacity;
        let env = TemporalEnvelope::build(&sc.temporal_costs, eta.row(i), cap.horizon());
        let masses = env.cell_masses(cap);
        let costs = env.cost_masses(cap);
        for j in 0..m {
            temporal_masses[i * m + j] = masses[j];
            temporal_cost_total += costs[j];
        }
        intervals.push(env.merged_intervals());
        idle.push(env.idle_intervals());
    }

    let allowed = 10.0 * tol * sc.mass_scale();
    let mut consistency_residual = 0.0f64;
    for i in 0..n {
        for j in 0..m {
            let gap = (spatial.mass(i, j) - temporal_masses[i * m + j]).abs();
            consistency_residual = consistency_residual.max(gap);
            if gap > allowed {
                return Err(PartitionError::Inconsistent {
                    station: i,
                    type_idx: j,
                    gap,
                    allowed,
                });
            }
        }
    }

    // welfare straight from the partitions:
    // sum_ij [ int_C (r - delta) mu  -  int_T l_j c ]
    let grid = sc.demand.grid();
    let mut reward_total = 0.0;
    let mut spatial_cost_total = 0.0;
    let mut served_mass = vec![0.0; m];
    for j in 0..m {
        for cell in 0..grid.cell_count() {
            let label = spatial.labels[j][cell];
            if label == 0 {
                continue;
            }
            let i = (label - 1) as usize;
            let mass = ctx.mass(j, cell);
            reward_total += sc.reward * mass;
            spatial_cost_total += ctx.delta(cell, i) * mass;
            served_mass[j] += mass;
        }
    }
    let uncovered_mass: Vec<f64> = (0..m)
        .map(|j| (sc.demand.total_mass(j) - served_mass[j]).max(0.0))
        .collect();

    let welfare = WelfareBreakdown {
        reward_total,
        spatial_cost_total,
        temporal_cost_total,
        welfare: reward_total - spatial_cost_total - temporal_cost_total,
    };

    Ok(MatchingPlan {
        q: spatial.masses.clone(),
        spatial,
        temporal: TemporalPartition { intervals, idle },
        welfare,
        served_mass,
        uncovered_mass,
        consistency_residual,
    })
}

/// One reported violation of a structural property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub station: usize,
    pub type_a: usize,
    pub type_b: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

fn require_mode(sc_mode: AssumptionMode, required: AssumptionMode) -> Result<(), PartitionError> {
    if sc_mode == required {
        Ok(())
    } else {
        Err(PartitionError::WrongMode {
            required,
            actual: sc_mode,
        })
    }
}

/// Under a common preferred time with decreasing sensitivities, higher-
/// sensitivity types must be scheduled closer to the preferred time on
/// each side (nested bands).
pub fn check_sensitivity_priority(
    plan: &MatchingPlan,
    costs: &[TemporalCostSpec],
    mode: AssumptionMode,
) -> Result<CheckOutcome, PartitionError> {
    require_mode(mode, AssumptionMode::HomogeneousPreference)?;
    let tau = costs[0].preferred_time();
    let m = costs.len();
    let eps = 1e-9;
    let mut violations = Vec::new();
    for (station, per_type) in plan.temporal.intervals.iter().enumerate() {
        // types are indexed by decreasing sensitivity: an earlier index
        // must stay closer to tau than any later index, per side
        for hi in 0..m {
            for lo in (hi + 1)..m {
                let far_hi_late = per_type[hi]
                    .iter()
                    .map(|&(_, b)| b - tau)
                    .fold(f64::NEG_INFINITY, f64::max);
                let near_lo_late = per_type[lo]
                    .iter()
                    .filter(|&&(_, b)| b > tau + eps)
                    .map(|&(a, _)| (a - tau).max(0.0))
                    .fold(f64::INFINITY, f64::min);
                if far_hi_late > near_lo_late + eps {
                    violations.push(Violation {
                        station,
                        type_a: hi,
                        type_b: lo,
                        detail: format!(
                            "late side: type {hi} reaches {far_hi_late:.6} past the preferred time, type {lo} starts at {near_lo_late:.6}"
                        ),
                    });
                }
                let far_hi_early = per_type[hi]
                    .iter()
                    .map(|&(a, _)| tau - a)
                    .fold(f64::NEG_INFINITY, f64::max);
                let near_lo_early = per_type[lo]
                    .iter()
                    .filter(|&&(a, _)| a < tau - eps)
                    .map(|&(_, b)| (tau - b).max(0.0))
                    .fold(f64::INFINITY, f64::min);
                if far_hi_early > near_lo_early + eps {
                    violations.push(Violation {
                        station,
                        type_a: hi,
                        type_b: lo,
                        detail: format!(
                            "early side: type {hi} reaches {far_hi_early:.6} before the preferred time, type {lo} starts at {near_lo_early:.6}"
                        ),
                    });
                }
            }
        }
    }
    Ok(CheckOutcome {
        ok: violations.is_empty(),
        violations,
    })
}

/// Under a common shape with distinct preferred times, service intervals
/// must not cross: a type with an earlier preferred time is served weakly
/// earlier.
pub fn check_order_preserving(
    plan: &MatchingPlan,
    costs: &[TemporalCostSpec],
    mode: AssumptionMode,
) -> Result<CheckOutcome, PartitionError> {
    require_mode(mode, AssumptionMode::HomogeneousSensitivity)?;
    let m = costs.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        costs[a]
            .preferred_time()
            .partial_cmp(&costs[b].preferred_time())
            .unwrap()
    });
    let eps = 1e-9;
    let mut violations = Vec::new();
    for (station, per_type) in plan.temporal.intervals.iter().enumerate() {
        for k in 0..m {
            for l in (k + 1)..m {
                let early_type = order[k];
                let late_type = order[l];
                let sup_early = per_type[early_type]
                    .iter()
                    .map(|&(_, b)| b)
                    .fold(f64::NEG_INFINITY, f64::max);
                let inf_late = per_type[late_type]
                    .iter()
                    .map(|&(a, _)| a)
                    .fold(f64::INFINITY, f64::min);
                if sup_early > inf_late + eps {
                    violations.push(Violation {
                        station,
                        type_a: early_type,
                        type_b: late_type,
                        detail: format!(
                            "type {early_type} served until {sup_early:.6} after type {late_type} starts at {inf_late:.6}"
                        ),
                    });
                }
            }
        }
    }
    Ok(CheckOutcome {
        ok: violations.is_empty(),
        violations,
    })
}

/// Under a common preferred time, the served region of a more sensitive
/// type must sit inside that of any less sensitive type, up to one grid
/// cell of slack along the boundary.
pub fn check_monotone_coverage(
    plan: &MatchingPlan,
    grid_nx: usize,
    mode: AssumptionMode,
) -> Result<CheckOutcome, PartitionError> {
    require_mode(mode, AssumptionMode::HomogeneousPreference)?;
    let m = plan.spatial.type_count;
    let cells = plan.spatial.labels[0].len();
    let ny = cells / grid_nx;
    let mut violations = Vec::new();
    for hi in 0..m {
        for lo in (hi + 1)..m {
            // hi is more sensitive (earlier index): served(hi) must sit
            // inside served(lo) up to boundary slack
            for cell in 0..cells {
                if plan.spatial.labels[hi][cell] == 0 || plan.spatial.labels[lo][cell] != 0 {
                    continue;
                }
                let ix = cell % grid_nx;
                let iy = cell / grid_nx;
                let mut near_boundary = false;
                for (dx, dy) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let jx = ix as i64 + dx;
                    let jy = iy as i64 + dy;
                    if jx < 0 || jy < 0 || jx >= grid_nx as i64 || jy >= ny as i64 {
                        continue;
                    }
                    if plan.spatial.labels[lo][jy as usize * grid_nx + jx as usize] != 0 {
                        near_boundary = true;
                        break;
                    }
                }
                if !near_boundary {
                    violations.push(Violation {
                        station: plan.spatial.labels[hi][cell] as usize - 1,
                        type_a: hi,
                        type_b: lo,
                        detail: format!(
                            "cell {cell}: sensitive type {hi} served where tolerant type {lo} is not"
                        ),
                    });
                }
            }
        }
    }
    Ok(CheckOutcome {
        ok: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CapacityProfile, DemandField, Point, SpatialCostSpec, SpatialGrid, Station};
    use crate::solver::{solve_stbd, SolveOptions};

    fn station(id: usize, x: f64, y: f64, rate: f64, t0: f64, t1: f64) -> Station {
        Station {
            id,
            position: Point::new(x, y),
            capacity: CapacityProfile::constant(rate, t0, t1).unwrap(),
        }
    }

    fn two_station_scenario(reward: f64) -> Scenario {
        let field = DemandField::uniform(SpatialGrid::unit_square(20, 20), &[1.0]).unwrap();
        Scenario::new(
            field,
            vec![
                station(0, 0.25, 0.5, 5.0, 0.0, 1.0),
                station(1, 0.75, 0.5, 5.0, 0.0, 1.0),
            ],
            vec![TemporalCostSpec::waiting(1.0, 0.0)],
            SpatialCostSpec::euclidean(),
            reward,
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_infinite_threshold_is_voronoi() {
        let sc = two_station_scenario(1.0);
        let eta = WeightMatrix::zeros(2, 1);
        let part = spatial_cells(&sc, &eta, f64::INFINITY);
        let grid = sc.demand.grid();
        for cell in 0..grid.cell_count() {
            let p = grid.cell_center(cell);
            let expected = if p.x <= 0.5 { 1 } else { 2 };
            assert_eq!(part.labels[0][cell], expected, "cell at ({}, {})", p.x, p.y);
        }
    }

    #[test]
    fn threshold_below_all_costs_leaves_everything_unmatched() {
        let sc = two_station_scenario(1.0);
        let eta = WeightMatrix::zeros(2, 1);
        let part = spatial_cells(&sc, &eta, -1.0);
        assert!(part.labels[0].iter().all(|&l| l == 0));
        assert!(part.masses.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_d_weighted_boundary() {
        // stations at 0 and 1 on a strip, eta = (0, 0.2), threshold inf:
        // boundary where x = (1 - x) + 0.2, i.e. x = 0.6
        let grid = SpatialGrid::new(0.0, 1.0, 0.0, 1.0, 200, 1).unwrap();
        let field = DemandField::uniform(grid, &[1.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![
                station(0, 0.0, 0.5, 1.0, 0.0, 1.0),
                station(1, 1.0, 0.5, 1.0, 0.0, 1.0),
            ],
            vec![TemporalCostSpec::waiting(1.0, 0.0)],
            SpatialCostSpec::euclidean(),
            1.0,
        )
        .unwrap();
        let eta = WeightMatrix::from_values(2, 1, vec![0.0, 0.2]);
        let part = spatial_cells(&sc, &eta, f64::INFINITY);
        assert!((part.mass(0, 0) - 0.6).abs() < 3e-3);
        assert!((part.mass(1, 0) - 0.4).abs() < 3e-3);
    }

    #[test]
    fn temporal_cells_single_type_interval() {
        let costs = vec![TemporalCostSpec::two_piece(1.0, 2.0, 1.0, 0.0)];
        let (intervals, idle) = temporal_cells(&costs, &[2.0], (-5.0, 5.0));
        assert_eq!(intervals[0].len(), 1);
        let (a, b) = intervals[0][0];
        assert!((a + 1.0).abs() < 1e-9 && (b - 2.0).abs() < 1e-9);
        assert_eq!(idle.len(), 2);
    }

    #[test]
    fn zero_demand_plan_is_empty() {
        let field = DemandField::uniform(SpatialGrid::unit_square(6, 6), &[0.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![station(0, 0.5, 0.5, 1.0, 0.0, 1.0)],
            vec![TemporalCostSpec::waiting(1.0, 0.0)],
            SpatialCostSpec::euclidean(),
            1.0,
        )
        .unwrap();
        let (eta, _) = solve_stbd(&sc, &SolveOptions::default());
        let plan = extract_plan(&sc, &eta, 1e-5).unwrap();
        assert_eq!(plan.welfare.welfare, 0.0);
        assert!(plan.q.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn no_exclusion_plan_serves_all() {
        let field = DemandField::uniform(SpatialGrid::unit_square(24, 24), &[1.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![station(0, 0.5, 0.5, 50.0, 0.0, 1.0)],
            vec![TemporalCostSpec::waiting(1.0, 0.0)],
            SpatialCostSpec::euclidean(),
            10.0,
        )
        .unwrap();
        let (eta, report) = solve_stbd(&sc, &SolveOptions::default());
        assert!(report.converged);
        let plan = extract_plan(&sc, &eta, 1e-5).unwrap();
        assert!((plan.served_mass[0] - 1.0).abs() < 1e-6);
        assert!(plan.uncovered_mass[0] < 1e-6);
        // internal identity: welfare = r * served - spatial - temporal
        let recomputed = sc.reward * plan.served_mass.iter().sum::<f64>()
            - plan.welfare.spatial_cost_total
            - plan.welfare.temporal_cost_total;
        assert!((recomputed - plan.welfare.welfare).abs() < 1e-9);
    }

    #[test]
    fn hotelling_partial_welfare_matches_closed_form() {
        // (c1, c2, w, r) = (1, 1, 1, 0.5): welfare c r^2 / (2 (c + w))
        // per station, 0.0625 each, 0.125 total
        let grid = SpatialGrid::new(0.0, 1.0, 0.0, 1.0, 400, 1).unwrap();
        let field = DemandField::uniform(grid, &[1.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![
                station(0, 0.0, 0.5, 1.0, 0.0, 2.0),
                station(1, 1.0, 0.5, 1.0, 0.0, 2.0),
            ],
            vec![TemporalCostSpec::waiting(1.0, 0.0)],
            SpatialCostSpec::euclidean(),
            0.5,
        )
        .unwrap();
        let (eta, report) = solve_stbd(&sc, &SolveOptions::default());
        assert!(report.converged);
        let plan = extract_plan(&sc, &eta, 1e-5).unwrap();
        let expected = 2.0 * (1.0 * 0.25 / (2.0 * 2.0));
        assert!(
            (plan.welfare.welfare - expected).abs() < 5e-3 * expected.max(1.0),
            "welfare {} vs {}",
            plan.welfare.welfare,
            expected
        );
    }

    fn hand_plan(intervals: Vec<Vec<Vec<(f64, f64)>>>, m: usize) -> MatchingPlan {
        let n = intervals.len();
        MatchingPlan {
            spatial: SpatialPartition {
                labels: vec![vec![0; 1]; m],
                masses: vec![0.0; n * m],
                station_count: n,
                type_count: m,
            },
            temporal: TemporalPartition {
                intervals,
                idle: vec![vec![]; n],
            },
            q: vec![0.0; n * m],
            welfare: WelfareBreakdown {
                reward_total: 0.0,
                spatial_cost_total: 0.0,
                temporal_cost_total: 0.0,
                welfare: 0.0,
            },
            served_mass: vec![0.0; m],
            uncovered_mass: vec![0.0; m],
            consistency_residual: 0.0,
        }
    }

    #[test]
    fn sensitivity_priority_checker() {
        let costs = vec![
            TemporalCostSpec::two_piece(2.0, 1.0, 1.0, 0.0),
            TemporalCostSpec::two_piece(1.0, 1.0, 1.0, 0.0),
        ];
        let mode = AssumptionMode::HomogeneousPreference;
        // nested bands: type 0 (sensitive) inside, type 1 outside
        let good = hand_plan(
            vec![vec![vec![(-0.2, 0.2)], vec![(-0.8, -0.2), (0.2, 0.8)]]],
            2,
        );
        assert!(check_sensitivity_priority(&good, &costs, mode).unwrap().ok);
        // swapped bands on the late side
        let bad = hand_plan(vec![vec![vec![(0.4, 0.8)], vec![(0.0, 0.4)]]], 2);
        let outcome = check_sensitivity_priority(&bad, &costs, mode).unwrap();
        assert!(!outcome.ok);
        assert_eq!(outcome.violations.len(), 1);
        // single type passes vacuously
        let single = hand_plan(vec![vec![vec![(0.0, 1.0)]]], 1);
        assert!(check_sensitivity_priority(&single, &costs[..1], mode)
            .unwrap()
            .ok);
        // wrong mode is an error
        assert!(matches!(
            check_sensitivity_priority(&good, &costs, AssumptionMode::General),
            Err(PartitionError::WrongMode { .. })
        ));
    }

    #[test]
    fn order_preserving_checker() {
        let costs = vec![
            TemporalCostSpec::two_piece(1.0, 1.0, 1.0, 0.0),
            TemporalCostSpec::two_piece(1.0, 1.0, 1.0, 1.0),
        ];
        let mode = AssumptionMode::HomogeneousSensitivity;
        let good = hand_plan(vec![vec![vec![(-0.5, 0.4)], vec![(0.4, 1.5)]]], 2);
        assert!(check_order_preserving(&good, &costs, mode).unwrap().ok);
        let crossed = hand_plan(vec![vec![vec![(0.8, 1.2)], vec![(0.0, 0.6)]]], 2);
        assert!(!check_order_preserving(&crossed, &costs, mode).unwrap().ok);
    }

    #[test]
    fn monotone_coverage_checker() {
        let mode = AssumptionMode::HomogeneousPreference;
        // 4x1 strip; type 0 (sensitive) serves cells 0..2, type 1 serves 0..3
        let mut plan = hand_plan(vec![vec![vec![], vec![]]], 2);
        plan.spatial.labels = vec![vec![1, 1, 0, 0], vec![1, 1, 1, 0]];
        assert!(check_monotone_coverage(&plan, 4, mode).unwrap().ok);
        // inverted: sensitive type served strictly beyond the tolerant one
        plan.spatial.labels = vec![vec![1, 1, 1, 1], vec![1, 0, 0, 0]];
        let outcome = check_monotone_coverage(&plan, 4, mode).unwrap();
        assert!(!outcome.ok);
        // one-cell slack at the boundary is accepted
        plan.spatial.labels = vec![vec![1, 1, 1, 0], vec![1, 1, 0, 0]];
        assert!(check_monotone_coverage(&plan, 4, mode).unwrap().ok);
    }
}
