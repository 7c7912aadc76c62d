//! Brute-force ground truth: the fully discretized primal solved as a
//! linear program on tiny instances.
//!
//! Demand collapses to atoms (coarse cell x type), capacity to time bins
//! (station x bin), and the matching value is sampled at midpoints. The
//! LP `max v' p` subject to per-atom mass and per-bin capacity bounds is
//! solved by a dense primal simplex (the all-slack basis is feasible
//! because every bound is nonnegative), and every solution ships with an
//! independently checked dual certificate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Point, Scenario};
use crate::partition::extract_plan;
use crate::solver::{solve_stbd, SolveOptions};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large: {vars} variables exceeds the cap {cap}")]
    SizeCap { vars: usize, cap: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: Point,
    pub type_idx: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBin {
    pub station: usize,
    pub start: f64,
    pub end: f64,
    pub capacity: f64,
}

/// Discretized primal instance: one variable per (atom, bin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteInstance {
    pub atoms: Vec<Atom>,
    pub bins: Vec<TimeBin>,
    /// Row-major `[atom * bins + bin]`: value of one unit of that flow.
    pub values: Vec<f64>,
}

impl DiscreteInstance {
    pub fn variable_count(&self) -> usize {
        self.atoms.len() * self.bins.len()
    }
}

/// Default variable cap; the oracle exists to validate, not to scale.
pub const DEFAULT_VARIABLE_CAP: usize = 10_000;

/// Regrid the scenario onto `spatial_res` cells and `time_bins` bins per
/// station, sampling transport and temporal costs at midpoints.
pub fn discretize(
    sc: &Scenario,
    spatial_res: (usize, usize),
    time_bins: usize,
    cap: usize,
) -> Result<DiscreteInstance, OracleError> {
    let (nx, ny) = spatial_res;
    let grid = sc.demand.grid();
    let (x0, x1, y0, y1) = grid.bounds();
    let m = sc.type_count();
    let n = sc.station_count();

    // aggregate fine cells into coarse boxes by center membership
    let mut masses = vec![0.0; nx * ny * m];
    let wx = (x1 - x0) / nx as f64;
    let wy = (y1 - y0) / ny as f64;
    for cell in 0..grid.cell_count() {
        let p = grid.cell_center(cell);
        let ix = (((p.x - x0) / wx) as usize).min(nx - 1);
        let iy = (((p.y - y0) / wy) as usize).min(ny - 1);
        let coarse = iy * nx + ix;
        for j in 0..m {
            masses[coarse * m + j] += sc.demand.cell_mass(j, cell);
        }
    }
    let mut atoms = Vec::new();
    for coarse in 0..nx * ny {
        let ix = coarse % nx;
        let iy = coarse / nx;
        let position = Point::new(x0 + (ix as f64 + 0.5) * wx, y0 + (iy as f64 + 0.5) * wy);
        for j in 0..m {
            let mass = masses[coarse * m + j];
            if mass > 0.0 {
                atoms.push(Atom {
                    position,
                    type_idx: j,
                    mass,
                });
            }
        }
    }

    let mut bins = Vec::new();
    for (i, st) in sc.stations.iter().enumerate() {
        let (t0, t1) = st.capacity.horizon();
        let dt = (t1 - t0) / time_bins as f64;
        for k in 0..time_bins {
            let start = t0 + dt * k as f64;
            let end = if k + 1 == time_bins { t1 } else { start + dt };
            bins.push(TimeBin {
                station: i,
                start,
                end,
                capacity: st.capacity.integrate(start, end),
            });
        }
    }
    let _ = n;

    let vars = atoms.len() * bins.len();
    if vars > cap {
        return Err(OracleError::SizeCap { vars, cap });
    }
    let mut values = Vec::with_capacity(vars);
    for atom in &atoms {
        for bin in &bins {
            let mid = 0.5 * (bin.start + bin.end);
            let delta = sc
                .spatial_cost
                .eval(&atom.position, &sc.stations[bin.station].position);
            let l = sc.temporal_costs[atom.type_idx].eval(mid);
            values.push(sc.reward - delta - l);
        }
    }
    Ok(DiscreteInstance {
        atoms,
        bins,
        values,
    })
}

/// LP solution with its dual certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub value: f64,
    /// Row-major `[atom * bins + bin]` flows.
    pub flows: Vec<f64>,
    pub dual_atoms: Vec<f64>,
    pub dual_bins: Vec<f64>,
    /// |primal - dual| / max(1, |primal|), checked against 1e-7.
    pub duality_gap: f64,
}

/// Exact LP optimum by dense primal simplex with a verified certificate.
pub fn solve_lp(inst: &DiscreteInstance) -> Result<LpSolution, OracleError> {
    let na = inst.atoms.len();
    let nb = inst.bins.len();
    let vars = na * nb;
    let rows = na + nb;
    if vars == 0 {
        return Ok(LpSolution {
            value: 0.0,
            flows: vec![],
            dual_atoms: vec![0.0; na],
            dual_bins: vec![0.0; nb],
            duality_gap: 0.0,
        });
    }

    // tableau: rows x (vars + slacks + rhs); minimize -v'x
    let width = vars + rows + 1;
    let mut tab = vec![vec![0.0f64; width]; rows + 1];
    for a in 0..na {
        for b in 0..nb {
            let col = a * nb + b;
            tab[a][col] = 1.0;
            tab[na + b][col] = 1.0;
        }
    }
    for (r, row) in tab.iter_mut().enumerate().take(rows) {
        row[vars + r] = 1.0;
        row[width - 1] = if r < na {
            inst.atoms[r].mass
        } else {
            inst.bins[r - na].capacity
        };
    }
    let scale = inst
        .values
        .iter()
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    for (col, v) in inst.values.iter().enumerate() {
        tab[rows][col] = -v;
    }

    let mut basis: Vec<usize> = (vars..vars + rows).collect();
    let eps = 1e-11 * scale.max(1.0);
    let max_pivots = 80 * (rows + 10);
    let mut pivots = 0usize;
    let mut stalled = 0usize;
    let mut last_objective = 0.0f64;
    loop {
        // entering column: Dantzig rule, Bland under stall
        let use_bland = stalled > rows + vars;
        let mut entering = None;
        let mut best = -eps;
        for col in 0..vars + rows {
            let c = tab[rows][col];
            if c < -eps {
                if use_bland {
                    entering = Some(col);
                    break;
                }
                if c < best {
                    best = c;
                    entering = Some(col);
                }
            }
        }
        let Some(col) = entering else { break };
        // ratio test; ties to the smallest row index
        let mut leaving = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..rows {
            let a = tab[r][col];
            if a > eps {
                let ratio = tab[r][width - 1] / a;
                if ratio < best_ratio - 1e-15 {
                    best_ratio = ratio;
                    leaving = Some(r);
                }
            }
        }
        let Some(r) = leaving else {
            return Err(OracleError::Numerical(
                "unbounded direction in a bounded transport program".into(),
            ));
        };
        // pivot
        let pivot = tab[r][col];
        for value in tab[r].iter_mut() {
            *value /= pivot;
        }
        for rr in 0..=rows {
            if rr == r {
                continue;
            }
            let factor = tab[rr][col];
            if factor != 0.0 {
                for c in 0..width {
                    tab[rr][c] -= factor * tab[r][c];
                }
            }
        }
        basis[r] = col;
        pivots += 1;
        let objective = tab[rows][width - 1];
        if objective > last_objective + eps {
            stalled = 0;
            last_objective = objective;
        } else {
            stalled += 1;
        }
        if pivots > max_pivots {
            return Err(OracleError::Numerical(format!(
                "simplex exceeded {max_pivots} pivots"
            )));
        }
    }

    let mut flows = vec![0.0; vars];
    for (r, &col) in basis.iter().enumerate() {
        if col < vars {
            flows[col] = tab[r][width - 1].max(0.0);
        }
    }
    let dual_atoms: Vec<f64> = (0..na).map(|a| tab[rows][vars + a].max(0.0)).collect();
    let dual_bins: Vec<f64> = (0..nb).map(|b| tab[rows][vars + na + b].max(0.0)).collect();

    // independent certificate check, recomputed from the raw data
    let primal: f64 = flows
        .iter()
        .zip(&inst.values)
        .map(|(p, v)| p * v)
        .sum();
    let dual: f64 = inst
        .atoms
        .iter()
        .zip(&dual_atoms)
        .map(|(a, y)| a.mass * y)
        .sum::<f64>()
        + inst
            .bins
            .iter()
            .zip(&dual_bins)
            .map(|(b, y)| b.capacity * y)
            .sum::<f64>();
    let gap = (primal - dual).abs() / primal.abs().max(1.0);
    let feas_tol = 1e-7 * scale.max(1.0);
    for a in 0..na {
        for b in 0..nb {
            let reduced = dual_atoms[a] + dual_bins[b] - inst.values[a * nb + b];
            if reduced < -feas_tol {
                return Err(OracleError::Numerical(format!(
                    "dual certificate infeasible at atom {a}, bin {b}: slack {reduced:.3e}"
                )));
            }
        }
    }
    if gap > 1e-7 {
        return Err(OracleError::Numerical(format!(
            "duality gap {gap:.3e} exceeds 1e-7"
        )));
    }
    Ok(LpSolution {
        value: primal,
        flows,
        dual_atoms,
        dual_bins,
        duality_gap: gap,
    })
}

/// One parity measurement: LP optimum vs solver welfare at a resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityEntry {
    pub nx: usize,
    pub ny: usize,
    pub bins: usize,
    pub lp_value: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub solver_welfare: f64,
    pub entries: Vec<ParityEntry>,
}

/// Solve the scenario once with the dual solver, then measure
/// `|LP - welfare| / max(1, |LP|)` at each discretization.
pub fn oracle_parity(
    sc: &Scenario,
    resolutions: &[(usize, usize, usize)],
    cap: usize,
) -> Result<ParityReport, OracleError> {
    let (eta, report) = solve_stbd(sc, &SolveOptions::default());
    // consistency gate scaled to what the solve actually achieved; the
    // parity gap itself is the quantity under test here
    let plan_tol = report.mass_balance_residual.max(1e-5) * 1.01;
    let plan = extract_plan(sc, &eta, plan_tol)
        .map_err(|e| OracleError::Numerical(format!("plan extraction failed: {e}")))?;
    let welfare = plan.welfare.welfare;
    let mut entries = Vec::new();
    for &(nx, ny, bins) in resolutions {
        let inst = discretize(sc, (nx, ny), bins, cap)?;
        let lp = solve_lp(&inst)?;
        entries.push(ParityEntry {
            nx,
            ny,
            bins,
            lp_value: lp.value,
            gap: (lp.value - welfare).abs() / lp.value.abs().max(1.0),
        });
    }
    Ok(ParityReport {
        solver_welfare: welfare,
        entries,
    })
}
