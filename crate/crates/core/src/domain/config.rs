use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    CapacityProfile, DemandField, DomainError, Point, Scenario, SpatialCostSpec, SpatialGrid,
    Station, TemporalCostSpec,
};
use crate::scenarios::GeneratorSpec;

/// On-disk scenario description. JSON and TOML are both accepted; the
/// format is chosen by file extension (`.toml` vs anything else).
///
/// A config either spells out `demand`/`stations`/`costs`/`reward`
/// explicitly or carries a `generator` section for synthetic instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub grid: Option<GridConfig>,
    pub demand: Option<DemandSection>,
    pub stations: Option<Vec<StationConfig>>,
    pub costs: Option<CostsConfig>,
    pub reward: Option<f64>,
    pub generator: Option<GeneratorSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DemandSection {
    /// One density spec per demand type.
    PerType(Vec<DemandConfig>),
    /// A CSV grid with header `x,y,type,density`; `types` gives the type
    /// count (defaults to one plus the largest type index seen).
    Csv { csv: String, types: Option<usize> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DemandConfig {
    Constant { density: f64 },
    Gaussians { components: Vec<GaussianComponent> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub center: [f64; 2],
    pub sigma: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationConfig {
    pub position: [f64; 2],
    pub capacity: CapacityConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CapacityConfig {
    Constant { rate: f64, horizon: [f64; 2] },
    Piecewise { breakpoints: Vec<f64>, rates: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostsConfig {
    pub spatial: SpatialConfig,
    pub temporal: Vec<TemporalConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpatialConfig {
    #[serde(default = "one")]
    pub exponent: f64,
    #[serde(default = "one")]
    pub coefficient: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TemporalConfig {
    TwoPiece {
        sensitivity: f64,
        early_slope: f64,
        late_slope: f64,
        preferred_time: f64,
    },
    Piecewise { points: Vec<[f64; 2]> },
}

/// Parse a config file without building the scenario.
pub fn load_scenario_config(path: &Path) -> Result<ScenarioConfig, DomainError> {
    let text = std::fs::read_to_string(path).map_err(|source| DomainError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let is_toml = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("toml"))
        .unwrap_or(false);
    if is_toml {
        toml::from_str(&text).map_err(|e| DomainError::Parse(e.to_string()))
    } else {
        serde_json::from_str(&text).map_err(|e| DomainError::Parse(e.to_string()))
    }
}

/// Load and validate a scenario. Explicit sections win; a config with
/// only a `generator` section is built through the generator.
pub fn load_scenario(path: &Path) -> Result<Scenario, DomainError> {
    let config = load_scenario_config(path)?;
    config.build(path.parent().unwrap_or(Path::new(".")))
}

impl ScenarioConfig {
    /// Build the scenario; `base_dir` anchors relative CSV references.
    pub fn build(&self, base_dir: &Path) -> Result<Scenario, DomainError> {
        if self.demand.is_some() {
            self.build_explicit(base_dir)
        } else if let Some(gen) = &self.generator {
            crate::scenarios::generate(gen)
        } else {
            Err(DomainError::validation(
                "config needs either a demand section or a generator section",
            ))
        }
    }

    /// Build from the generator section, rejecting configs without one.
    pub fn build_generated(&self) -> Result<Scenario, DomainError> {
        match &self.generator {
            Some(gen) => crate::scenarios::generate(gen),
            None => Err(DomainError::validation("config has no generator section")),
        }
    }

    fn build_explicit(&self, base_dir: &Path) -> Result<Scenario, DomainError> {
        let grid_cfg = self
            .grid
            .as_ref()
            .ok_or_else(|| DomainError::validation("missing grid section"))?;
        let grid = SpatialGrid::new(
            grid_cfg.x_min,
            grid_cfg.x_max,
            grid_cfg.y_min,
            grid_cfg.y_max,
            grid_cfg.nx,
            grid_cfg.ny,
        )?;
        let demand = match self.demand.as_ref().unwrap() {
            DemandSection::PerType(per_type) => {
                let densities = per_type
                    .iter()
                    .map(|cfg| rasterize_demand(cfg, &grid))
                    .collect::<Result<Vec<_>, _>>()?;
                DemandField::new(grid.clone(), densities)?
            }
            DemandSection::Csv { csv, types } => {
                let path = base_dir.join(csv);
                read_demand_csv(&path, &grid, *types)?
            }
        };
        let station_cfgs = self
            .stations
            .as_ref()
            .ok_or_else(|| DomainError::validation("missing stations section"))?;
        let stations = station_cfgs
            .iter()
            .enumerate()
            .map(|(id, cfg)| {
                let capacity = match &cfg.capacity {
                    CapacityConfig::Constant { rate, horizon } => {
                        CapacityProfile::constant(*rate, horizon[0], horizon[1])?
                    }
                    CapacityConfig::Piecewise { breakpoints, rates } => {
                        CapacityProfile::new(breakpoints.clone(), rates.clone())?
                    }
                };
                Ok(Station {
                    id,
                    position: Point::new(cfg.position[0], cfg.position[1]),
                    capacity,
                })
            })
            .collect::<Result<Vec<_>, DomainError>>()?;
        let costs = self
            .costs
            .as_ref()
            .ok_or_else(|| DomainError::validation("missing costs section"))?;
        let temporal_costs = costs
            .temporal
            .iter()
            .map(|cfg| match cfg {
                TemporalConfig::TwoPiece {
                    sensitivity,
                    early_slope,
                    late_slope,
                    preferred_time,
                } => TemporalCostSpec::two_piece(*sensitivity, *early_slope, *late_slope, *preferred_time),
                TemporalConfig::Piecewise { points } => TemporalCostSpec::PiecewiseLinear {
                    points: points.iter().map(|p| (p[0], p[1])).collect(),
                },
            })
            .collect();
        let spatial_cost = SpatialCostSpec::power(costs.spatial.exponent, costs.spatial.coefficient);
        let reward = self
            .reward
            .ok_or_else(|| DomainError::validation("missing reward"))?;
        Scenario::new(demand, stations, temporal_costs, spatial_cost, reward)
    }
}

fn rasterize_demand(cfg: &DemandConfig, grid: &SpatialGrid) -> Result<Vec<f64>, DomainError> {
    match cfg {
        DemandConfig::Constant { density } => {
            if !(density.is_finite() && *density >= 0.0) {
                return Err(DomainError::validation("constant density must be >= 0"));
            }
            Ok(vec![*density; grid.cell_count()])
        }
        DemandConfig::Gaussians { components } => {
            for c in components {
                if !(c.sigma.is_finite() && c.sigma > 0.0) {
                    return Err(DomainError::validation("gaussian sigma must be > 0"));
                }
                if !(c.mass.is_finite() && c.mass >= 0.0) {
                    return Err(DomainError::validation("gaussian mass must be >= 0"));
                }
            }
            let mut density = vec![0.0; grid.cell_count()];
            for (cell, d) in density.iter_mut().enumerate() {
                let p = grid.cell_center(cell);
                for c in components {
                    let dx = p.x - c.center[0];
                    let dy = p.y - c.center[1];
                    let r2 = dx * dx + dy * dy;
                    let norm = c.mass / (2.0 * std::f64::consts::PI * c.sigma * c.sigma);
                    *d += norm * (-r2 / (2.0 * c.sigma * c.sigma)).exp();
                }
            }
            Ok(density)
        }
    }
}

fn read_demand_csv(
    path: &Path,
    grid: &SpatialGrid,
    declared_types: Option<usize>,
) -> Result<DemandField, DomainError> {
    #[derive(Deserialize)]
    struct Row {
        x: f64,
        y: f64,
        #[serde(rename = "type")]
        type_idx: usize,
        density: f64,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| DomainError::Parse(e.to_string()))?;
    let mut rows: Vec<Row> = Vec::new();
    for record in reader.deserialize() {
        rows.push(record.map_err(|e| DomainError::Parse(format!("demand csv: {e}")))?);
    }
    let inferred = rows.iter().map(|r| r.type_idx + 1).max().unwrap_or(0);
    let m = declared_types.unwrap_or(inferred);
    if m == 0 {
        return Err(DomainError::validation("demand csv contains no rows"));
    }
    let mut densities = vec![vec![0.0; grid.cell_count()]; m];
    for row in &rows {
        if row.type_idx >= m {
            return Err(DomainError::validation(format!(
                "demand csv type index {} exceeds declared type count {}",
                row.type_idx, m
            )));
        }
        let Some(cell) = grid.cell_of(&Point::new(row.x, row.y)) else {
            return Err(DomainError::validation(format!(
                "demand csv point ({}, {}) lies outside the grid",
                row.x, row.y
            )));
        };
        densities[row.type_idx][cell] = row.density;
    }
    DemandField::new(grid.clone(), densities)
}
