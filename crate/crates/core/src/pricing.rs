//! Envy-free implementation of a solved matching: continuous per-station
//! price curves, the finite-slot mechanism, and numerical envy/IR
//! verification.
//!
//! The price curve of station `i` is the clipped upper envelope
//! `p_i(t) = (max_j eta_ij - l_j(t))^+`. It irons temporal cost so a
//! type-j agent's utility at station i equals `r - delta - eta_ij`
//! anywhere on its service set, which is what makes the posted prices
//! envy-free and individually rational. Slots are the maximal intervals
//! with a constant positive argmax; each slot's price is the capacity-
//! weighted average of `eta - l` over the slot, so the expected cost plus
//! price inside a slot is exactly `eta_ij`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Scenario, TemporalCostSpec};
use crate::envelope::{integrate_affine_times_capacity, integrate_cost_times_capacity, TemporalEnvelope};
use crate::partition::MatchingPlan;
use crate::piecewise::PiecewiseLinearFn;
use crate::solver::WeightMatrix;

#[derive(Debug, Error)]
pub enum PricingError {
    #[error(
        "degenerate tie at station {station}: types {type_a} and {type_b} tie on \
         [{start:.6}, {end:.6}] (positive length)"
    )]
    DegenerateTie {
        station: usize,
        type_a: usize,
        type_b: usize,
        start: f64,
        end: f64,
    },
}

/// Per-station piecewise-linear price curves over each station's horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingSchedule {
    pub curves: Vec<PiecewiseLinearFn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub start: f64,
    pub end: f64,
    pub price: f64,
    pub target_type: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSchedule {
    pub per_station: Vec<Vec<Slot>>,
    /// Declared bound on pairwise crossings of the gap functions; 2 for
    /// the supported two-piece families.
    pub crossing_order: usize,
}

/// Longest Davenport-Schinzel sequence length for small orders:
/// `lambda_0 = 1`, `lambda_1 = m`, `lambda_2 = 2m - 1`. Higher orders are
/// superlinear and not needed here.
pub fn lambda_ds(s: usize, m: usize) -> Option<usize> {
    match s {
        0 => Some(1),
        1 => Some(m),
        2 => Some(2 * m - 1),
        _ => None,
    }
}

impl SlotSchedule {
    /// Slot-count bound per station implied by the crossing order.
    pub fn slot_bound(&self, m: usize) -> Option<usize> {
        lambda_ds(self.crossing_order, m)
    }
}

/// Exact envy-free price curves `(max_j eta_ij - l_j)^+` per station.
pub fn envy_free_prices(sc: &Scenario, eta: &WeightMatrix) -> PricingSchedule {
    let curves = sc
        .stations
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let horizon = st.capacity.horizon();
            let env = TemporalEnvelope::build(&sc.temporal_costs, eta.row(i), horizon);
            let mut nodes: Vec<(f64, f64)> = Vec::new();
            for p in &env.pieces {
                let va = match p.label {
                    Some(j) => env.gap(j, p.start).max(0.0),
                    None => 0.0,
                };
                let vb = match p.label {
                    Some(j) => env.gap(j, p.end).max(0.0),
                    None => 0.0,
                };
                if nodes.is_empty() {
                    nodes.push((p.start, va));
                } else if nodes.last().unwrap().0 < p.start {
                    nodes.push((p.start, va));
                }
                nodes.push((p.end, vb));
            }
            PiecewiseLinearFn::new(nodes)
        })
        .collect();
    PricingSchedule { curves }
}

/// Finite-slot mechanism: maximal constant-argmax intervals with
/// capacity-weighted average prices. A positive-length argmax tie is a
/// degenerate-instance error.
pub fn slot_mechanism(sc: &Scenario, eta: &WeightMatrix) -> Result<SlotSchedule, PricingError> {
    let tie_tol = 1e-9 * sc.cost_scale();
    let mut per_station = Vec::with_capacity(sc.station_count());
    for (i, st) in sc.stations.iter().enumerate() {
        let cap = &st.capacity;
        let env = TemporalEnvelope::build(&sc.temporal_costs, eta.row(i), cap.horizon());
        if let Some((a, b, lo, hi)) = env.positive_length_tie(tie_tol) {
            return Err(PricingError::DegenerateTie {
                station: i,
                type_a: a,
                type_b: b,
                start: lo,
                end: hi,
            });
        }
        let mut slots = Vec::new();
        for run in env.merged_runs() {
            let (start, end, label) = run;
            let Some(j) = label else { continue };
            // capacity-weighted average of eta_j - l_j over the run,
            // integrated exactly over the elementary pieces inside it
            let mut weighted_gap = 0.0;
            let mut mass = 0.0;
            for p in &env.pieces {
                if p.start >= start && p.end <= end && p.label == Some(j) {
                    weighted_gap += integrate_affine_times_capacity(
                        p.start,
                        p.end,
                        env.gap(j, p.start),
                        env.gap(j, p.end),
                        cap,
                    );
                    mass += cap.integrate(p.start, p.end);
                }
            }
            if mass <= 0.0 {
                continue;
            }
            slots.push(Slot {
                start,
                end,
                price: weighted_gap / mass,
                target_type: j,
            });
        }
        per_station.push(slots);
    }
    Ok(SlotSchedule {
        per_station,
        crossing_order: 2,
    })
}

/// Worst-case envy and individual-rationality slack over sampled agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvyReport {
    /// max over agents of (best alternative utility - assigned utility);
    /// for unmatched agents the assigned utility is 0.
    pub max_envy: f64,
    /// min assigned utility among matched agents.
    pub min_ir: f64,
    pub samples: usize,
}

/// Exact minimum of `l_j(t) + price(t)` over the price curve's domain:
/// both are piecewise linear, so the minimum sits on a breakpoint.
fn min_cost_plus_price(cost: &TemporalCostSpec, price: &PiecewiseLinearFn) -> f64 {
    let (t0, t1) = price.domain();
    let mut best = f64::INFINITY;
    for &(t, v) in price.nodes() {
        best = best.min(cost.eval(t) + v);
    }
    for t in cost.internal_breakpoints(t0, t1) {
        best = best.min(cost.eval(t) + price.eval(t));
    }
    best
}

/// Sample agents from the demand field (served and unserved regions) and
/// measure envy and IR against the posted continuous prices.
pub fn verify_envy_free(
    sc: &Scenario,
    plan: &MatchingPlan,
    prices: &PricingSchedule,
    samples: usize,
    seed: u64,
) -> EnvyReport {
    let grid = sc.demand.grid();
    let m = sc.type_count();
    let area = grid.cell_area();
    // cumulative mass over (type, cell)
    let mut cum = Vec::with_capacity(m * grid.cell_count());
    let mut total = 0.0;
    for j in 0..m {
        for cell in 0..grid.cell_count() {
            total += sc.demand.density(j, cell) * area;
            cum.push(total);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_envy = f64::NEG_INFINITY;
    let mut min_ir = f64::INFINITY;
    let mut drawn = 0usize;
    if total <= 0.0 {
        return EnvyReport {
            max_envy: 0.0,
            min_ir: 0.0,
            samples: 0,
        };
    }
    for _ in 0..samples {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cum.partition_point(|&c| c < u).min(cum.len() - 1);
        let j = idx / grid.cell_count();
        let cell = idx % grid.cell_count();
        let x = grid.cell_center(cell);
        drawn += 1;

        let best_alternative = (0..sc.station_count())
            .map(|i| {
                sc.reward
                    - sc.spatial_cost.eval(&x, &sc.stations[i].position)
                    - min_cost_plus_price(&sc.temporal_costs[j], &prices.curves[i])
            })
            .fold(f64::NEG_INFINITY, f64::max);

        let label = plan.spatial.labels[j][cell];
        if label == 0 {
            // unmatched: envy-freeness demands no positive alternative
            max_envy = max_envy.max(best_alternative);
        } else {
            let i = (label - 1) as usize;
            let assigned_t = plan.temporal.intervals[i][j]
                .first()
                .map(|&(a, b)| 0.5 * (a + b));
            let assigned = match assigned_t {
                Some(t) => {
                    sc.reward
                        - sc.spatial_cost.eval(&x, &sc.stations[i].position)
                        - sc.temporal_costs[j].eval(t)
                        - prices.curves[i].eval(t)
                }
                None => {
                    sc.reward
                        - sc.spatial_cost.eval(&x, &sc.stations[i].position)
                        - min_cost_plus_price(&sc.temporal_costs[j], &prices.curves[i])
                }
            };
            max_envy = max_envy.max(best_alternative - assigned);
            min_ir = min_ir.min(assigned);
        }
    }
    EnvyReport {
        max_envy: if max_envy.is_finite() { max_envy } else { 0.0 },
        min_ir: if min_ir.is_finite() { min_ir } else { 0.0 },
        samples: drawn,
    }
}

/// Envy/IR verification against the slot mechanism: agents choose among
/// slots, paying the slot price and drawing service time from the
/// capacity density inside the slot.
pub fn verify_envy_free_slots(
    sc: &Scenario,
    plan: &MatchingPlan,
    slots: &SlotSchedule,
    samples: usize,
    seed: u64,
) -> EnvyReport {
    let grid = sc.demand.grid();
    let m = sc.type_count();
    let area = grid.cell_area();
    let mut cum = Vec::with_capacity(m * grid.cell_count());
    let mut total = 0.0;
    for j in 0..m {
        for cell in 0..grid.cell_count() {
            total += sc.demand.density(j, cell) * area;
            cum.push(total);
        }
    }
    if total <= 0.0 {
        return EnvyReport {
            max_envy: 0.0,
            min_ir: 0.0,
            samples: 0,
        };
    }
    // expected temporal cost of type j inside each slot
    let expected_cost = |i: usize, slot: &Slot, j: usize| -> f64 {
        let cap = &sc.stations[i].capacity;
        let mass = cap.integrate(slot.start, slot.end);
        integrate_cost_times_capacity(&sc.temporal_costs[j], cap, slot.start, slot.end) / mass
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_envy = f64::NEG_INFINITY;
    let mut min_ir = f64::INFINITY;
    for _ in 0..samples {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cum.partition_point(|&c| c < u).min(cum.len() - 1);
        let j = idx / grid.cell_count();
        let cell = idx % grid.cell_count();
        let x = grid.cell_center(cell);

        let utility_at = |i: usize, slot: &Slot| -> f64 {
            sc.reward
                - sc.spatial_cost.eval(&x, &sc.stations[i].position)
                - expected_cost(i, slot, j)
                - slot.price
        };
        let mut best_alternative = f64::NEG_INFINITY;
        for (i, station_slots) in slots.per_station.iter().enumerate() {
            for slot in station_slots {
                best_alternative = best_alternative.max(utility_at(i, slot));
            }
        }
        let label = plan.spatial.labels[j][cell];
        if label == 0 {
            max_envy = max_envy.max(best_alternative);
        } else {
            let i = (label - 1) as usize;
            let assigned = slots.per_station[i]
                .iter()
                .filter(|slot| slot.target_type == j)
                .map(|slot| utility_at(i, slot))
                .fold(f64::NEG_INFINITY, f64::max);
            if assigned.is_finite() {
                max_envy = max_envy.max(best_alternative - assigned);
                min_ir = min_ir.min(assigned);
            } else {
                max_envy = max_envy.max(best_alternative);
            }
        }
    }
    EnvyReport {
        max_envy: if max_envy.is_finite() { max_envy } else { 0.0 },
        min_ir: if min_ir.is_finite() { min_ir } else { 0.0 },
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{
        CapacityProfile, DemandField, Point, SpatialCostSpec, SpatialGrid, Station,
    };
    use crate::linear::{closed_form_schedule, SlopePair};
    use crate::partition::extract_plan;
    use crate::solver::{solve_stbd, SolveOptions};

    /// The three-type pricing illustration: b=2, h=1, s=(1, 0.7, 0.5),
    /// capacity 8, volumes (12, 15, 19). The matching weights follow from
    /// the closed form eta = beta/(2c) A q.
    fn figure_weights() -> (Vec<TemporalCostSpec>, Vec<f64>, CapacityProfile) {
        let costs = vec![
            TemporalCostSpec::two_piece(1.0, 2.0, 1.0, 0.0),
            TemporalCostSpec::two_piece(0.7, 2.0, 1.0, 0.0),
            TemporalCostSpec::two_piece(0.5, 2.0, 1.0, 0.0),
        ];
        // beta/(2c) * A q with beta = 4/3, c = 8, q = (12, 15, 19)
        let eta = vec![32.0 / 12.0, 28.4 / 12.0, 23.0 / 12.0];
        let cap = CapacityProfile::constant(8.0, -4.0, 6.0).unwrap();
        (costs, eta, cap)
    }

    fn figure_scenario() -> (Scenario, WeightMatrix) {
        let (costs, eta, cap) = figure_weights();
        let field = DemandField::uniform(SpatialGrid::unit_square(4, 4), &[1.0, 1.0, 1.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![Station {
                id: 0,
                position: Point::new(0.5, 0.5),
                capacity: cap,
            }],
            costs,
            SpatialCostSpec::euclidean(),
            10.0,
        )
        .unwrap();
        let eta = WeightMatrix::from_values(1, 3, eta);
        (sc, eta)
    }

    #[test]
    fn single_type_price_peaks_at_preferred_time() {
        let field = DemandField::uniform(SpatialGrid::unit_square(4, 4), &[1.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![Station {
                id: 0,
                position: Point::new(0.5, 0.5),
                capacity: CapacityProfile::constant(1.0, -2.0, 2.0).unwrap(),
            }],
            vec![TemporalCostSpec::two_piece(1.0, 1.0, 1.0, 0.0)],
            SpatialCostSpec::euclidean(),
            1.0,
        )
        .unwrap();
        let eta = WeightMatrix::from_values(1, 1, vec![0.7]);
        let prices = envy_free_prices(&sc, &eta);
        let p = &prices.curves[0];
        assert!((p.eval(0.0) - 0.7).abs() < 1e-12);
        assert!((p.eval(0.35) - 0.35).abs() < 1e-12);
        assert_eq!(p.eval(1.5), 0.0);
        assert!(p.min_value() >= 0.0);
    }

    #[test]
    fn nonpositive_weights_price_is_zero() {
        let field = DemandField::uniform(SpatialGrid::unit_square(4, 4), &[1.0, 1.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![Station {
                id: 0,
                position: Point::new(0.5, 0.5),
                capacity: CapacityProfile::constant(1.0, -2.0, 2.0).unwrap(),
            }],
            vec![
                TemporalCostSpec::two_piece(2.0, 1.0, 1.0, 0.0),
                TemporalCostSpec::two_piece(1.0, 1.0, 1.0, 0.0),
            ],
            SpatialCostSpec::euclidean(),
            1.0,
        )
        .unwrap();
        let eta = WeightMatrix::from_values(1, 2, vec![-0.1, -0.2]);
        let prices = envy_free_prices(&sc, &eta);
        assert_eq!(prices.curves[0].max_value(), 0.0);
    }

    #[test]
    fn figure_replica_has_five_slots_with_peak_price_at_zero() {
        let (sc, eta) = figure_scenario();
        let slots = slot_mechanism(&sc, &eta).unwrap();
        assert_eq!(slots.per_station[0].len(), 5);
        assert_eq!(slots.slot_bound(3), Some(5));
        // price curve peaks at t = 0 and decreases both ways
        let prices = envy_free_prices(&sc, &eta);
        let p = &prices.curves[0];
        let peak = p.eval(0.0);
        assert!((peak - 32.0 / 12.0).abs() < 1e-9);
        for t in [-1.5, -0.5, 0.5, 1.5, 3.0] {
            assert!(p.eval(t) <= peak + 1e-12);
        }
        // band boundaries in time match the closed-form schedule
        let sched = closed_form_schedule(
            &[12.0, 15.0, 19.0],
            &[1.0, 0.7, 0.5],
            &SlopePair::Both { early: 2.0, late: 1.0 },
            8.0,
        )
        .unwrap();
        let inner = &slots.per_station[0]
            .iter()
            .find(|s| s.target_type == 0)
            .unwrap();
        assert!((inner.start - sched.early[0]).abs() < 1e-9);
        assert!((inner.end - sched.late[0]).abs() < 1e-9);
    }

    #[test]
    fn slot_expected_utility_identity() {
        // inside each slot, expected temporal cost plus price equals the
        // target type's weight
        let (sc, eta) = figure_scenario();
        let slots = slot_mechanism(&sc, &eta).unwrap();
        let cap = &sc.stations[0].capacity;
        for slot in &slots.per_station[0] {
            let mass = cap.integrate(slot.start, slot.end);
            let expected_cost = integrate_cost_times_capacity(
                &sc.temporal_costs[slot.target_type],
                cap,
                slot.start,
                slot.end,
            ) / mass;
            let identity = expected_cost + slot.price;
            assert!(
                (identity - eta.get(0, slot.target_type)).abs() < 1e-10,
                "slot {:?}: {} vs {}",
                slot,
                identity,
                eta.get(0, slot.target_type)
            );
        }
    }

    #[test]
    fn single_type_single_slot() {
        let field = DemandField::uniform(SpatialGrid::unit_square(4, 4), &[1.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![Station {
                id: 0,
                position: Point::new(0.5, 0.5),
                capacity: CapacityProfile::constant(2.0, -3.0, 3.0).unwrap(),
            }],
            vec![TemporalCostSpec::two_piece(1.0, 1.0, 1.0, 0.0)],
            SpatialCostSpec::euclidean(),
            1.0,
        )
        .unwrap();
        let eta = WeightMatrix::from_values(1, 1, vec![0.9]);
        let slots = slot_mechanism(&sc, &eta).unwrap();
        assert_eq!(slots.per_station[0].len(), 1);
        let slot = &slots.per_station[0][0];
        // capacity-weighted mean of eta - |t| over [-0.9, 0.9]
        assert!((slot.price - (0.9 - 0.45)).abs() < 1e-9);
    }

    #[test]
    fn degenerate_tie_is_an_error() {
        let field = DemandField::uniform(SpatialGrid::unit_square(4, 4), &[0.6, 0.4]).unwrap();
        let sc = Scenario::new(
            field,
            vec![Station {
                id: 0,
                position: Point::new(0.5, 0.5),
                capacity: CapacityProfile::constant(1.0, -2.0, 2.0).unwrap(),
            }],
            vec![
                TemporalCostSpec::two_piece(1.0, 1.0, 1.0, 0.0),
                TemporalCostSpec::PiecewiseLinear {
                    points: vec![(-1.0, 1.0), (0.0, 0.0), (1.0, 1.0)],
                },
            ],
            SpatialCostSpec::euclidean(),
            1.0,
        )
        .unwrap();
        // identical effective gap functions for both types
        let eta = WeightMatrix::from_values(1, 2, vec![0.5, 0.5]);
        assert!(matches!(
            slot_mechanism(&sc, &eta),
            Err(PricingError::DegenerateTie { .. })
        ));
    }

    fn solved_two_station() -> (Scenario, WeightMatrix, MatchingPlan) {
        let field = DemandField::uniform(SpatialGrid::unit_square(24, 24), &[0.7, 0.3]).unwrap();
        let sc = Scenario::new(
            field,
            vec![
                Station {
                    id: 0,
                    position: Point::new(0.3, 0.5),
                    capacity: CapacityProfile::constant(1.0, -2.0, 2.0).unwrap(),
                },
                Station {
                    id: 1,
                    position: Point::new(0.7, 0.5),
                    capacity: CapacityProfile::constant(0.6, -2.0, 2.0).unwrap(),
                },
            ],
            vec![
                TemporalCostSpec::two_piece(2.0, 1.0, 1.5, 0.0),
                TemporalCostSpec::two_piece(1.0, 1.0, 1.5, 0.0),
            ],
            SpatialCostSpec::euclidean(),
            2.0,
        )
        .unwrap();
        let (eta, report) = solve_stbd(&sc, &SolveOptions::default());
        assert!(report.converged);
        let plan = extract_plan(&sc, &eta, 1e-5).unwrap();
        (sc, eta, plan)
    }

    #[test]
    fn solved_plan_is_envy_free_and_ir() {
        let (sc, eta, plan) = solved_two_station();
        let prices = envy_free_prices(&sc, &eta);
        let report = verify_envy_free(&sc, &plan, &prices, 4000, 11);
        let tol = 1e-9 * sc.cost_scale();
        assert!(report.max_envy <= tol, "max envy {}", report.max_envy);
        assert!(report.min_ir >= -tol, "min IR {}", report.min_ir);

        // lemma identity on a dense grid: l_j + p_i >= eta_ij with
        // equality on the service set
        for i in 0..sc.station_count() {
            let (t0, t1) = sc.stations[i].capacity.horizon();
            for j in 0..sc.type_count() {
                let eta_ij = eta.get(i, j);
                for k in 0..=400 {
                    let t = t0 + (t1 - t0) * k as f64 / 400.0;
                    let v = sc.temporal_costs[j].eval(t) + prices.curves[i].eval(t);
                    assert!(v >= eta_ij - 1e-9, "identity broken at t={t}");
                }
                for &(a, b) in &plan.temporal.intervals[i][j] {
                    let t = 0.5 * (a + b);
                    let v = sc.temporal_costs[j].eval(t) + prices.curves[i].eval(t);
                    assert!((v - eta_ij).abs() < 1e-9, "equality broken on cell");
                }
            }
        }
    }

    #[test]
    fn perturbed_prices_create_envy() {
        let (sc, eta, plan) = solved_two_station();
        let prices = envy_free_prices(&sc, &eta);
        let bumped = PricingSchedule {
            curves: prices
                .curves
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    // station 0 dearer, station 1 cheaper: creates envy
                    let sign = if i == 0 { 1.0 } else { -1.0 };
                    c.map_values(move |v| (v + sign * 0.05).max(0.0))
                })
                .collect(),
        };
        let report = verify_envy_free(&sc, &plan, &bumped, 4000, 11);
        assert!(report.max_envy > 1e-3, "expected positive envy, got {}", report.max_envy);
    }

    #[test]
    fn slot_mechanism_matches_continuous_utilities() {
        let (sc, eta, plan) = solved_two_station();
        let slots = slot_mechanism(&sc, &eta).unwrap();
        for (i, station_slots) in slots.per_station.iter().enumerate() {
            let bound = slots.slot_bound(sc.type_count()).unwrap();
            assert!(station_slots.len() <= bound, "station {i} has too many slots");
        }
        let report = verify_envy_free_slots(&sc, &plan, &slots, 4000, 17);
        let tol = 1e-9 * sc.cost_scale();
        assert!(report.max_envy <= tol, "slot envy {}", report.max_envy);
        assert!(report.min_ir >= -tol, "slot IR {}", report.min_ir);
    }

    #[test]
    fn unmatched_agents_have_no_positive_alternative() {
        // tiny reward keeps most demand unmatched; their best alternative
        // utility must be nonpositive
        let field = DemandField::uniform(SpatialGrid::unit_square(20, 20), &[1.0]).unwrap();
        let sc = Scenario::new(
            field,
            vec![Station {
                id: 0,
                position: Point::new(0.5, 0.5),
                capacity: CapacityProfile::constant(0.5, 0.0, 2.0).unwrap(),
            }],
            vec![TemporalCostSpec::waiting(1.0, 0.0)],
            SpatialCostSpec::euclidean(),
            0.2,
        )
        .unwrap();
        let (eta, report) = solve_stbd(&sc, &SolveOptions::default());
        assert!(report.converged);
        let plan = extract_plan(&sc, &eta, 1e-5).unwrap();
        assert!(plan.uncovered_mass[0] > 0.1);
        let prices = envy_free_prices(&sc, &eta);
        let envy = verify_envy_free(&sc, &plan, &prices, 4000, 5);
        assert!(envy.max_envy <= 1e-9 * sc.cost_scale());
    }
}
