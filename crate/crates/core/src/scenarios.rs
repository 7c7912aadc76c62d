//! Seeded synthetic scenario generation.
//!
//! Demand comes from truncated gaussian mixtures rasterized onto the grid
//! and rescaled to exact per-type masses; capacity is split across two
//! site classes and rasterized from a constant or rise-then-fall (hump)
//! shape. A fixed seed reproduces the scenario bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    CapacityProfile, DemandField, DomainError, Point, Scenario, SpatialCostSpec, SpatialGrid,
    Station, TemporalCostSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlacementRule {
    /// Evenly spaced on a circle around the domain center.
    Ring,
    /// Near-square lattice over the middle of the domain.
    Lattice,
    /// Uniform draws over the middle 80% of the domain.
    #[default]
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CapacityShape {
    #[default]
    Constant,
    /// Rise-then-fall profile rasterized into equal time bins.
    Hump,
}

/// Recipe for a reproducible synthetic scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub grid: [usize; 2],
    #[serde(default = "default_extent")]
    pub extent: [f64; 4],
    pub blobs_per_type: usize,
    /// Total demand mass per type; the length sets the type count.
    pub type_masses: Vec<f64>,
    /// Urgency slopes, strictly decreasing; type j pays `slope_j * (t - t0)`.
    pub urgency_slopes: Vec<f64>,
    pub station_count: usize,
    #[serde(default)]
    pub placement: PlacementRule,
    #[serde(default)]
    pub capacity_shape: CapacityShape,
    /// Total capacity divided by total demand.
    pub capacity_slack: f64,
    pub horizon: [f64; 2],
    #[serde(default = "default_bins")]
    pub capacity_bins: usize,
    /// Fraction of stations in the high-capacity class.
    #[serde(default = "default_major_fraction")]
    pub major_fraction: f64,
    /// Share of total capacity held by the high-capacity class.
    #[serde(default = "default_major_share")]
    pub major_capacity_share: f64,
    #[serde(default = "default_one")]
    pub spatial_exponent: f64,
    #[serde(default = "default_one")]
    pub spatial_coefficient: f64,
    pub reward: f64,
}

fn default_extent() -> [f64; 4] {
    [0.0, 1.0, 0.0, 1.0]
}

fn default_bins() -> usize {
    12
}

fn default_major_fraction() -> f64 {
    0.3
}

fn default_major_share() -> f64 {
    0.6
}

fn default_one() -> f64 {
    1.0
}

impl GeneratorSpec {
    /// Vaccination-like preset: four urgency classes with slopes
    /// `0.1 * (1 + 2 * IFR_j)` for fitted fatality rates at representative
    /// ages, hump-shaped capacity with modest slack over demand.
    pub fn vaccination_like(seed: u64) -> Self {
        GeneratorSpec {
            seed,
            grid: [40, 40],
            extent: default_extent(),
            blobs_per_type: 3,
            // age shares, oldest first
            type_masses: vec![0.16, 0.33, 0.29, 0.22],
            // 0.1 * (1 + 2 * IFR%) at ages 75, 52, 30, 10
            urgency_slopes: vec![1.0, 0.2, 0.106, 0.1004],
            station_count: 6,
            placement: PlacementRule::Random,
            capacity_shape: CapacityShape::Hump,
            capacity_slack: 2.19 / 1.65,
            horizon: [0.0, 1.0],
            capacity_bins: 12,
            major_fraction: 0.3,
            major_capacity_share: 0.6,
            spatial_exponent: 1.0,
            spatial_coefficient: 1.0,
            reward: 10.0,
        }
    }
}

/// Total capacity over total demand; the generator's slack knob, measured
/// back from a scenario.
pub fn capacity_slack(sc: &Scenario) -> f64 {
    let demand = sc.total_demand_mass();
    if demand <= 0.0 {
        f64::INFINITY
    } else {
        sc.total_capacity() / demand
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Scenario, DomainError> {
    let m = spec.type_masses.len();
    if m == 0 {
        return Err(DomainError::validation("generator needs at least one type"));
    }
    if spec.urgency_slopes.len() != m {
        return Err(DomainError::validation(
            "generator urgency_slopes length must match type_masses",
        ));
    }
    if spec
        .urgency_slopes
        .windows(2)
        .any(|w| w[1] >= w[0])
        || spec.urgency_slopes.iter().any(|s| *s <= 0.0)
    {
        return Err(DomainError::validation(
            "generator urgency slopes must be positive and strictly decreasing",
        ));
    }
    if spec.type_masses.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(DomainError::validation("generator type masses must be >= 0"));
    }
    if spec.station_count == 0 {
        return Err(DomainError::validation("generator needs at least one station"));
    }
    if !(spec.capacity_slack.is_finite() && spec.capacity_slack > 0.0) {
        return Err(DomainError::validation("generator capacity slack must be > 0"));
    }
    if !(spec.major_fraction >= 0.0 && spec.major_fraction <= 1.0)
        || !(spec.major_capacity_share > 0.0 && spec.major_capacity_share < 1.0)
    {
        return Err(DomainError::validation(
            "generator station class parameters out of range",
        ));
    }
    let [x_min, x_max, y_min, y_max] = spec.extent;
    let grid = SpatialGrid::new(x_min, x_max, y_min, y_max, spec.grid[0], spec.grid[1])?;
    let [t0, t1] = spec.horizon;
    if !(t1 > t0) {
        return Err(DomainError::validation("generator horizon must have t1 > t0"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = x_max - x_min;
    let height = y_max - y_min;

    // stations first, then blobs, so the draw order is part of the contract
    let positions: Vec<Point> = match spec.placement {
        PlacementRule::Ring => {
            let cx = 0.5 * (x_min + x_max);
            let cy = 0.5 * (y_min + y_max);
            let r = 0.35 * width.min(height);
            (0..spec.station_count)
                .map(|k| {
                    let angle = 2.0 * std::f64::consts::PI * k as f64 / spec.station_count as f64;
                    Point::new(cx + r * angle.cos(), cy + r * angle.sin())
                })
                .collect()
        }
        PlacementRule::Lattice => {
            let side = (spec.station_count as f64).sqrt().ceil() as usize;
            (0..spec.station_count)
                .map(|k| {
                    let ix = k % side;
                    let iy = k / side;
                    Point::new(
                        x_min + width * (ix as f64 + 0.5) / side as f64,
                        y_min + height * (iy as f64 + 0.5) / side as f64,
                    )
                })
                .collect()
        }
        PlacementRule::Random => (0..spec.station_count)
            .map(|_| {
                Point::new(
                    x_min + width * (0.1 + 0.8 * rng.gen::<f64>()),
                    y_min + height * (0.1 + 0.8 * rng.gen::<f64>()),
                )
            })
            .collect(),
    };

    let mut densities = Vec::with_capacity(m);
    for &target_mass in &spec.type_masses {
        let mut blobs = Vec::with_capacity(spec.blobs_per_type);
        for _ in 0..spec.blobs_per_type {
            let cx = x_min + width * (0.1 + 0.8 * rng.gen::<f64>());
            let cy = y_min + height * (0.1 + 0.8 * rng.gen::<f64>());
            let sigma = width.min(height) * (0.08 + 0.12 * rng.gen::<f64>());
            let weight = 0.5 + rng.gen::<f64>();
            blobs.push((cx, cy, sigma, weight));
        }
        let mut density = vec![0.0; grid.cell_count()];
        for (cell, d) in density.iter_mut().enumerate() {
            let p = grid.cell_center(cell);
            for &(cx, cy, sigma, weight) in &blobs {
                let r2 = (p.x - cx).powi(2) + (p.y - cy).powi(2);
                *d += weight * (-r2 / (2.0 * sigma * sigma)).exp();
            }
        }
        let raw_mass: f64 = density.iter().sum::<f64>() * grid.cell_area();
        if raw_mass > 0.0 && target_mass > 0.0 {
            let scale = target_mass / raw_mass;
            for d in density.iter_mut() {
                *d *= scale;
            }
        } else {
            density.iter_mut().for_each(|d| *d = 0.0);
        }
        densities.push(density);
    }
    let demand = DemandField::new(grid, densities)?;

    let total_demand = demand.total_mass_all_types();
    let total_capacity = if total_demand > 0.0 {
        spec.capacity_slack * total_demand
    } else {
        1.0
    };
    let major_count = ((spec.station_count as f64 * spec.major_fraction).round() as usize)
        .min(spec.station_count);
    let per_station_capacity = |k: usize| -> f64 {
        if major_count == 0 || major_count == spec.station_count {
            total_capacity / spec.station_count as f64
        } else if k < major_count {
            total_capacity * spec.major_capacity_share / major_count as f64
        } else {
            total_capacity * (1.0 - spec.major_capacity_share)
                / (spec.station_count - major_count) as f64
        }
    };

    let stations = positions
        .into_iter()
        .enumerate()
        .map(|(k, position)| {
            let cap_total = per_station_capacity(k);
            let capacity = match spec.capacity_shape {
                CapacityShape::Constant => {
                    CapacityProfile::constant(cap_total / (t1 - t0), t0, t1)?
                }
                CapacityShape::Hump => hump_profile(cap_total, t0, t1, spec.capacity_bins)?,
            };
            Ok(Station {
                id: k,
                position,
                capacity,
            })
        })
        .collect::<Result<Vec<_>, DomainError>>()?;

    let temporal_costs = spec
        .urgency_slopes
        .iter()
        .map(|&s| TemporalCostSpec::waiting(s, t0))
        .collect();

    Scenario::new(
        demand,
        stations,
        temporal_costs,
        SpatialCostSpec::power(spec.spatial_exponent, spec.spatial_coefficient),
        spec.reward,
    )
}

/// Piecewise-constant rasterization of a rise-then-fall shape peaking at
/// 35% of the horizon, scaled to the requested total.
fn hump_profile(total: f64, t0: f64, t1: f64, bins: usize) -> Result<CapacityProfile, DomainError> {
    let bins = bins.max(2);
    let peak = 0.35;
    let shape = |u: f64| -> f64 {
        if u <= peak {
            0.15 + 0.85 * u / peak
        } else {
            0.15 + 0.85 * (1.0 - u) / (1.0 - peak)
        }
    };
    let dt = (t1 - t0) / bins as f64;
    let raw: Vec<f64> = (0..bins)
        .map(|k| shape((k as f64 + 0.5) / bins as f64))
        .collect();
    let raw_total: f64 = raw.iter().map(|r| r * dt).sum();
    let rates: Vec<f64> = raw.iter().map(|r| r * total / raw_total).collect();
    let breakpoints: Vec<f64> = (0..=bins)
        .map(|k| {
            if k == bins {
                t1
            } else {
                t0 + dt * k as f64
            }
        })
        .collect();
    CapacityProfile::new(breakpoints, rates)
}
