use serde::{Deserialize, Serialize};

use super::DomainError;

/// A point in the planar spatial domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Uniform rectangular grid tiling a bounding rectangle.
///
/// Cells are indexed row-major: `idx = iy * nx + ix`. Quadrature uses cell
/// centers (midpoint rule).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
}

impl SpatialGrid {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self, DomainError> {
        if !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite()) {
            return Err(DomainError::validation("grid bounds must be finite"));
        }
        if x_max <= x_min || y_max <= y_min {
            return Err(DomainError::validation(
                "grid bounding rectangle must have positive extent per axis",
            ));
        }
        if nx < 1 || ny < 1 {
            return Err(DomainError::validation("grid resolution must be >= 1 per axis"));
        }
        let grid = SpatialGrid {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        };
        if grid.cell_area() <= 0.0 {
            return Err(DomainError::validation("grid cell area must be positive"));
        }
        Ok(grid)
    }

    /// Unit square with the given resolution; the common test fixture.
    pub fn unit_square(nx: usize, ny: usize) -> Self {
        SpatialGrid::new(0.0, 1.0, 0.0, 1.0, nx, ny).expect("unit square is valid")
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (self.x_min, self.x_max, self.y_min, self.y_max)
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_width(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn cell_height(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_width() * self.cell_height()
    }

    pub fn cell_center(&self, idx: usize) -> Point {
        let ix = idx % self.nx;
        let iy = idx / self.nx;
        Point {
            x: self.x_min + (ix as f64 + 0.5) * self.cell_width(),
            y: self.y_min + (iy as f64 + 0.5) * self.cell_height(),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Cell containing `p`, with points on the max boundary clamped inward.
    pub fn cell_of(&self, p: &Point) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let ix = (((p.x - self.x_min) / self.cell_width()) as usize).min(self.nx - 1);
        let iy = (((p.y - self.y_min) / self.cell_height()) as usize).min(self.ny - 1);
        Some(iy * self.nx + ix)
    }
}

/// Per-type demand densities over a shared grid (mass per unit area).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandField {
    grid: SpatialGrid,
    densities: Vec<Vec<f64>>,
}

impl DemandField {
    pub fn new(grid: SpatialGrid, densities: Vec<Vec<f64>>) -> Result<Self, DomainError> {
        if densities.is_empty() {
            return Err(DomainError::validation("demand field needs at least one type"));
        }
        for (j, d) in densities.iter().enumerate() {
            if d.len() != grid.cell_count() {
                return Err(DomainError::validation(format!(
                    "type {} density has {} cells, grid has {}",
                    j,
                    d.len(),
                    grid.cell_count()
                )));
            }
            if let Some(v) = d.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(DomainError::validation(format!(
                    "type {j} density contains a negative or non-finite value {v}"
                )));
            }
        }
        Ok(DemandField { grid, densities })
    }

    /// Uniform density per type.
    pub fn uniform(grid: SpatialGrid, per_type_density: &[f64]) -> Result<Self, DomainError> {
        let cells = grid.cell_count();
        let densities = per_type_density
            .iter()
            .map(|&d| vec![d; cells])
            .collect();
        DemandField::new(grid, densities)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn type_count(&self) -> usize {
        self.densities.len()
    }

    pub fn density(&self, type_idx: usize, cell: usize) -> f64 {
        self.densities[type_idx][cell]
    }

    pub fn densities(&self, type_idx: usize) -> &[f64] {
        &self.densities[type_idx]
    }

    /// Mass of one cell for one type: density times cell area.
    pub fn cell_mass(&self, type_idx: usize, cell: usize) -> f64 {
        self.densities[type_idx][cell] * self.grid.cell_area()
    }

    pub fn total_mass(&self, type_idx: usize) -> f64 {
        self.densities[type_idx].iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn total_mass_all_types(&self) -> f64 {
        (0..self.type_count()).map(|j| self.total_mass(j)).sum()
    }
}

/// Midpoint-rule integral of `weight` against the type-`j` density:
/// sum over cells of weight(center) * density * cell area.
pub fn spatial_integral<F>(field: &DemandField, type_idx: usize, weight: F) -> f64
where
    F: Fn(Point) -> f64,
{
    let grid = field.grid();
    let area = grid.cell_area();
    let mut acc = 0.0;
    for (cell, &density) in field.densities(type_idx).iter().enumerate() {
        if density > 0.0 {
            acc += weight(grid.cell_center(cell)) * density * area;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_tiles_rectangle_exactly() {
        let g = SpatialGrid::new(0.0, 2.0, -1.0, 1.0, 4, 5).unwrap();
        assert_eq!(g.cell_count(), 20);
        let total: f64 = g.cell_area() * g.cell_count() as f64;
        assert!((total - 4.0).abs() < 1e-12);
        // centers stay inside the rectangle
        for idx in 0..g.cell_count() {
            assert!(g.contains(&g.cell_center(idx)));
        }
    }

    #[test]
    fn rejects_degenerate_grid() {
        assert!(SpatialGrid::new(0.0, 0.0, 0.0, 1.0, 1, 1).is_err());
        assert!(SpatialGrid::new(0.0, 1.0, 0.0, 1.0, 0, 1).is_err());
    }

    #[test]
    fn uniform_unit_density_has_unit_mass() {
        let field = DemandField::uniform(SpatialGrid::unit_square(8, 8), &[1.0]).unwrap();
        assert!((field.total_mass(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_density() {
        let grid = SpatialGrid::unit_square(2, 2);
        let mut d = vec![1.0; 4];
        d[3] = -0.5;
        assert!(DemandField::new(grid, vec![d]).is_err());
    }

    #[test]
    fn integral_of_one_is_total_mass() {
        let field = DemandField::uniform(SpatialGrid::unit_square(16, 16), &[1.0]).unwrap();
        let v = spatial_integral(&field, 0, |_| 1.0);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(spatial_integral(&field, 0, |_| 0.0), 0.0);
    }

    #[test]
    fn integral_converges_for_distance_weight() {
        // mean Euclidean distance to the center of the unit square:
        // (sqrt(2) + asinh(1)) / 6 = 0.38259785...
        let exact = (std::f64::consts::SQRT_2 + 1.0f64.asinh()) / 6.0;
        let center = Point::new(0.5, 0.5);
        let mut prev_err = f64::INFINITY;
        for res in [16usize, 32, 64, 128] {
            let field = DemandField::uniform(SpatialGrid::unit_square(res, res), &[1.0]).unwrap();
            let v = spatial_integral(&field, 0, |p| p.distance(&center));
            let err = (v - exact).abs();
            assert!(err < prev_err, "refinement must not increase error");
            prev_err = err;
        }
        assert!(prev_err < 2e-3);
    }

    #[test]
    fn cell_of_round_trips_centers() {
        let g = SpatialGrid::new(-1.0, 3.0, 0.0, 2.0, 7, 3);
        let g = g.unwrap();
        for idx in 0..g.cell_count() {
            assert_eq!(g.cell_of(&g.cell_center(idx)), Some(idx));
        }
        assert_eq!(g.cell_of(&Point::new(10.0, 0.5)), None);
    }
}
