//! The finite-dimensional convex dual and its minimizer.
//!
//! The objective over weights `eta[(i, j)]` is
//!
//! ```text
//!   sum_i  int_T ( max_j [eta_ij - l_j(t)] )^+ c_i(t) dt
//! + sum_j  int_X ( max_i [r - eta_ij - delta(x, y_i)] )^+ mu_j(x) dx
//! ```
//!
//! The temporal term is integrated exactly by upper-envelope breakpoint
//! enumeration; the spatial term by midpoint quadrature over the demand
//! grid. A subgradient entry is the capacity mass of the temporal cell
//! minus the demand mass of the spatial cell, which is exactly the
//! first-order mass-balance residual: it vanishes at the optimum.
//!
//! Minimization runs in two phases: annealed minimization of the
//! softplus/softmax surrogate (epsilon halved from the cost scale down to
//! 1e-3 of it), then a polish that alternates between freezing the
//! spatial cell masses and re-matching each station's weights so the
//! temporal cells carry exactly those masses. The polish terminates on a
//! label fixed point, where the exact subgradient is zero to inner-solver
//! precision.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::Scenario;
use crate::envelope::TemporalEnvelope;
use crate::gauss::gl16;
use crate::lbfgs::{self, LbfgsOptions};

/// Dual weights, one per (station, type) pair. Row-major `[i * m + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl WeightMatrix {
    pub fn zeros(n: usize, m: usize) -> Self {
        WeightMatrix {
            n,
            m,
            values: vec![0.0; n * m],
        }
    }

    pub fn from_values(n: usize, m: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * m);
        assert!(values.iter().all(|v| v.is_finite()), "weights must be finite");
        WeightMatrix { n, m, values }
    }

    pub fn stations(&self) -> usize {
        self.n
    }

    pub fn types(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.m + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Options for [`solve_stbd`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Relative mass-balance tolerance: max |residual| over
    /// (total demand + total capacity).
    pub tol: f64,
    /// L-BFGS iteration cap per smoothing stage.
    pub stage_iters: usize,
    /// Rounds of the exact polish.
    pub polish_rounds: usize,
    /// Smoothing floor as a fraction of the cost scale.
    pub eps_floor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-5,
            stage_iters: 400,
            polish_rounds: 80,
            eps_floor: 1e-3,
        }
    }
}

/// Convergence record for one solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub final_objective: f64,
    pub gradient_norm_history: Vec<f64>,
    /// max |subgradient| / (total demand mass + total capacity).
    pub mass_balance_residual: f64,
    pub iterations: usize,
    pub smoothing_schedule: Vec<f64>,
    pub converged: bool,
}

/// Precomputed distance costs and cell masses for the spatial term.
pub(crate) struct SpatialContext<'a> {
    sc: &'a Scenario,
    /// `[cell * n + i]`: delta(cell center, station i).
    delta: Vec<f64>,
    /// `[j][cell]`: demand mass of the cell.
    cell_mass: Vec<Vec<f64>>,
    cells: usize,
}

const CHUNK: usize = 2048;

impl<'a> SpatialContext<'a> {
    pub fn new(sc: &'a Scenario) -> Self {
        let grid = sc.demand.grid();
        let n = sc.station_count();
        let cells = grid.cell_count();
        let mut delta = vec![0.0; cells * n];
        for cell in 0..cells {
            let p = grid.cell_center(cell);
            for (i, st) in sc.stations.iter().enumerate() {
                delta[cell * n + i] = sc.spatial_cost.eval(&p, &st.position);
            }
        }
        let area = grid.cell_area();
        let cell_mass = (0..sc.type_count())
            .map(|j| sc.demand.densities(j).iter().map(|d| d * area).collect())
            .collect();
        SpatialContext {
            sc,
            delta,
            cell_mass,
            cells,
        }
    }

    pub fn delta(&self, cell: usize, i: usize) -> f64 {
        self.delta[cell * self.sc.station_count() + i]
    }

    pub fn mass(&self, j: usize, cell: usize) -> f64 {
        self.cell_mass[j][cell]
    }

    /// Exact spatial term: value and per-(i, j) covered cell masses.
    /// A cell counts for type j when `max_i (r - eta_ij - delta) >= 0`,
    /// with argmax ties broken toward the lowest station index.
    pub fn exact(&self, eta: &WeightMatrix) -> (f64, Vec<f64>) {
        let n = self.sc.station_count();
        let m = self.sc.type_count();
        let r = self.sc.reward;
        // fixed-size chunks summed in index order keep the reduction
        // bit-identical across thread counts
        let chunks: Vec<(f64, Vec<f64>)> = (0..self.cells.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk_idx| {
                let lo = chunk_idx * CHUNK;
                let hi = (lo + CHUNK).min(self.cells);
                let mut value = 0.0;
                let mut masses = vec![0.0; n * m];
                for cell in lo..hi {
                    let drow = &self.delta[cell * n..(cell + 1) * n];
                    for j in 0..m {
                        let mass = self.cell_mass[j][cell];
                        if mass <= 0.0 {
                            continue;
                        }
                        let mut best_i = 0usize;
                        let mut best = r - eta.get(0, j) - drow[0];
                        for (i, d) in drow.iter().enumerate().skip(1) {
                            let v = r - eta.get(i, j) - d;
                            if v > best {
                                best = v;
                                best_i = i;
                            }
                        }
                        if best >= 0.0 {
                            value += best * mass;
                            masses[best_i * m + j] += mass;
                        }
                    }
                }
                (value, masses)
            })
            .collect();
        let mut value = 0.0;
        let mut masses = vec![0.0; n * m];
        for (v, ms) in chunks {
            value += v;
            for (acc, x) in masses.iter_mut().zip(ms) {
                *acc += x;
            }
        }
        (value, masses)
    }

    /// Smoothed spatial term and its softmax cell masses (the negated
    /// gradient contribution).
    pub fn smoothed(&self, eta: &WeightMatrix, eps: f64) -> (f64, Vec<f64>) {
        let n = self.sc.station_count();
        let m = self.sc.type_count();
        let r = self.sc.reward;
        let chunks: Vec<(f64, Vec<f64>)> = (0..self.cells.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk_idx| {
                let lo = chunk_idx * CHUNK;
                let hi = (lo + CHUNK).min(self.cells);
                let mut value = 0.0;
                let mut masses = vec![0.0; n * m];
                let mut a = vec![0.0; n];
                for cell in lo..hi {
                    let drow = &self.delta[cell * n..(cell + 1) * n];
                    for j in 0..m {
                        let mass = self.cell_mass[j][cell];
                        if mass <= 0.0 {
                            continue;
                        }
                        let mut amax = 0.0f64;
                        for (i, d) in drow.iter().enumerate() {
                            a[i] = r - eta.get(i, j) - d;
                            amax = amax.max(a[i]);
                        }
                        let mut z = (-amax / eps).exp();
                        for ai in a.iter().take(n) {
                            z += ((ai - amax) / eps).exp();
                        }
                        value += mass * (amax + eps * z.ln());
                        for (i, ai) in a.iter().enumerate().take(n) {
                            let w = ((ai - amax) / eps).exp() / z;
                            masses[i * m + j] += mass * w;
                        }
                    }
                }
                (value, masses)
            })
            .collect();
        let mut value = 0.0;
        let mut masses = vec![0.0; n * m];
        for (v, ms) in chunks {
            value += v;
            for (acc, x) in masses.iter_mut().zip(ms) {
                *acc += x;
            }
        }
        (value, masses)
    }
}

/// Exact temporal term of one station: value and per-type capacity masses.
fn temporal_exact(sc: &Scenario, i: usize, eta_row: &[f64]) -> (f64, Vec<f64>) {
    let cap = &sc.stations[i].capacity;
    let env = TemporalEnvelope::build(&sc.temporal_costs, eta_row, cap.horizon());
    (env.objective_term(cap), env.cell_masses(cap))
}

/// Smoothed temporal term of one station, integrated with fixed
/// Gauss-Legendre panels. The panel layout depends only on the instance
/// and epsilon, never on eta, so the returned gradient is the exact
/// derivative of the returned value.
fn temporal_smoothed(sc: &Scenario, i: usize, eta_row: &[f64], eps: f64) -> (f64, Vec<f64>) {
    let cap = &sc.stations[i].capacity;
    let (t0, t1) = cap.horizon();
    let span = t1 - t0;
    let m = sc.type_count();

    let mut cuts = vec![t0, t1];
    for cost in &sc.temporal_costs {
        cuts.extend(cost.internal_breakpoints(t0, t1));
    }
    cuts.extend(cap.breakpoints().iter().copied().filter(|&t| t > t0 && t < t1));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= span * 1e-13);

    let (nodes, weights) = gl16();
    let target = span / 96.0;
    let mut value = 0.0;
    let mut grad = vec![0.0; m];
    let mut g = vec![0.0; m];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let sub = ((b - a) / target).ceil().max(1.0) as usize;
        let h = (b - a) / sub as f64;
        for k in 0..sub {
            let lo = a + h * k as f64;
            let mid = lo + 0.5 * h;
            let half = 0.5 * h;
            for (&xi, &wi) in nodes.iter().zip(weights) {
                let t = mid + half * xi;
                let c = cap.rate_at(t);
                if c <= 0.0 {
                    continue;
                }
                let mut gmax = 0.0f64;
                for (j, cost) in sc.temporal_costs.iter().enumerate() {
                    g[j] = eta_row[j] - cost.eval(t);
                    gmax = gmax.max(g[j]);
                }
                let mut z = (-gmax / eps).exp();
                for gj in g.iter().take(m) {
                    z += ((gj - gmax) / eps).exp();
                }
                let scale = wi * half * c;
                value += scale * (gmax + eps * z.ln());
                for (j, gj) in g.iter().enumerate().take(m) {
                    grad[j] += scale * ((gj - gmax) / eps).exp() / z;
                }
            }
        }
    }
    (value, grad)
}

/// Exact dual objective and tie-broken subgradient.
pub fn stbd_objective(sc: &Scenario, eta: &WeightMatrix) -> (f64, Vec<f64>) {
    let ctx = SpatialContext::new(sc);
    stbd_objective_with(&ctx, eta)
}

pub(crate) fn stbd_objective_with(ctx: &SpatialContext, eta: &WeightMatrix) -> (f64, Vec<f64>) {
    let sc = ctx.sc;
    let n = sc.station_count();
    let m = sc.type_count();
    let (sp_value, sp_masses) = ctx.exact(eta);
    let mut value = sp_value;
    let mut grad = vec![0.0; n * m];
    for i in 0..n {
        let (tv, masses) = temporal_exact(sc, i, eta.row(i));
        value += tv;
        for j in 0..m {
            grad[i * m + j] = masses[j] - sp_masses[i * m + j];
        }
    }
    (value, grad)
}

/// The two exact objective terms separately: (temporal, spatial).
pub fn stbd_terms(sc: &Scenario, eta: &WeightMatrix) -> (f64, f64) {
    let ctx = SpatialContext::new(sc);
    let (sp_value, _) = ctx.exact(eta);
    let temporal: f64 = (0..sc.station_count())
        .map(|i| temporal_exact(sc, i, eta.row(i)).0)
        .sum();
    (temporal, sp_value)
}

/// Smoothed surrogate value and its exact gradient.
pub fn stbd_smoothed(sc: &Scenario, eta: &WeightMatrix, eps: f64) -> (f64, Vec<f64>) {
    let ctx = SpatialContext::new(sc);
    stbd_smoothed_with(&ctx, eta, eps)
}

pub(crate) fn stbd_smoothed_with(
    ctx: &SpatialContext,
    eta: &WeightMatrix,
    eps: f64,
) -> (f64, Vec<f64>) {
    let sc = ctx.sc;
    let n = sc.station_count();
    let m = sc.type_count();
    let (sp_value, sp_masses) = ctx.smoothed(eta, eps);
    let mut value = sp_value;
    let mut grad = vec![0.0; n * m];
    for i in 0..n {
        let (tv, tg) = temporal_smoothed(sc, i, eta.row(i), eps);
        value += tv;
        for j in 0..m {
            grad[i * m + j] = tg[j] - sp_masses[i * m + j];
        }
    }
    (value, grad)
}

/// Per-(i, j) first-order residuals: temporal cell capacity minus spatial
/// cell demand. All entries vanish at the optimum.
pub fn mass_balance(sc: &Scenario, eta: &WeightMatrix) -> Vec<f64> {
    stbd_objective(sc, eta).1
}

/// max |mass balance entry| / (total demand + total capacity).
pub fn relative_residual(sc: &Scenario, eta: &WeightMatrix) -> f64 {
    let grad = mass_balance(sc, eta);
    grad.iter().fold(0.0f64, |a, g| a.max(g.abs())) / sc.mass_scale()
}

/// Minimize the dual. Returns the best iterate and a convergence report;
/// non-convergence within the budget is flagged in the report, not an
/// error.
pub fn solve_stbd(sc: &Scenario, opts: &SolveOptions) -> (WeightMatrix, SolveReport) {
    let n = sc.station_count();
    let m = sc.type_count();
    let mass_scale = sc.mass_scale();
    let cost_scale = sc.cost_scale();
    let ctx = SpatialContext::new(sc);

    let mut schedule = Vec::new();
    let mut eps = cost_scale;
    let floor = opts.eps_floor * cost_scale;
    while eps > floor * (1.0 + 1e-9) {
        schedule.push(eps);
        eps *= 0.5;
    }
    schedule.push(floor);

    let mut x = vec![0.0; n * m];
    let mut history = Vec::new();
    let mut iterations = 0usize;

    if sc.total_demand_mass() > 0.0 {
        for (k, &eps) in schedule.iter().enumerate() {
            let gtol = if k + 1 == schedule.len() {
                1e-7 * mass_scale
            } else {
                1e-4 * mass_scale
            };
            let result = lbfgs::minimize(
                x,
                &LbfgsOptions {
                    max_iter: opts.stage_iters,
                    grad_tol: gtol,
                    memory: 10,
                },
                |v, grad_out| {
                    let eta = WeightMatrix {
                        n,
                        m,
                        values: v.to_vec(),
                    };
                    let (value, grad) = stbd_smoothed_with(&ctx, &eta, eps);
                    grad_out.copy_from_slice(&grad);
                    value
                },
            );
            x = result.x;
            history.push(result.grad_norm);
            iterations += result.iterations;
        }
    }

    // Exact polish. Each round builds the re-matching point: freeze the
    // spatial cell masses and solve, per station, for the weight row
    // whose temporal cells carry exactly those masses. The displacement
    // toward that point is a temporally preconditioned descent direction
    // for the exact objective; an Armijo backtracking line search on the
    // exact objective damps the step (a full step can overshoot when
    // cells swing between stations), with the raw subgradient as
    // fallback direction.
    let mut eta = WeightMatrix { n, m, values: x };
    let mut best_eta = eta.clone();
    let mut best_res = f64::INFINITY;
    let mut converged = false;
    let (mut f_current, mut grad) = stbd_objective_with(&ctx, &eta);
    for _ in 0..opts.polish_rounds {
        let res = grad.iter().fold(0.0f64, |a, g| a.max(g.abs())) / mass_scale;
        history.push(res * mass_scale);
        if res < best_res {
            best_res = res;
            best_eta = eta.clone();
        }
        if res <= opts.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (_, sp_masses) = ctx.exact(&eta);
        let mut matched = eta.clone();
        for i in 0..n {
            let target: Vec<f64> = (0..m).map(|j| sp_masses[i * m + j]).collect();
            let row = eta.row(i).to_vec();
            let solved = lbfgs::minimize(
                row,
                &LbfgsOptions {
                    max_iter: 400,
                    grad_tol: (0.02 * opts.tol * mass_scale).max(1e-13 * mass_scale),
                    memory: 10,
                },
                |v, grad_out| {
                    let (tv, masses) = temporal_exact(sc, i, v);
                    let mut value = tv;
                    for j in 0..m {
                        grad_out[j] = masses[j] - target[j];
                        value -= target[j] * v[j];
                    }
                    value
                },
            );
            for (j, value) in solved.x.iter().enumerate() {
                matched.set(i, j, *value);
            }
        }

        let direction: Vec<f64> = matched
            .values()
            .iter()
            .zip(eta.values())
            .map(|(a, b)| a - b)
            .collect();
        let try_direction = |dir: &[f64], eta: &WeightMatrix| -> Option<(WeightMatrix, f64, Vec<f64>)> {
            let mut t = 1.0;
            for _ in 0..24 {
                let candidate = WeightMatrix::from_values(
                    n,
                    m,
                    eta.values()
                        .iter()
                        .zip(dir)
                        .map(|(v, d)| v + t * d)
                        .collect(),
                );
                let (f_new, g_new) = stbd_objective_with(&ctx, &candidate);
                if f_new < f_current - 1e-14 * f_current.abs() {
                    return Some((candidate, f_new, g_new));
                }
                t *= 0.5;
            }
            None
        };
        let step = try_direction(&direction, &eta).or_else(|| {
            // subgradient fallback, scaled so the first trial moves the
            // weights by about one cost-scale unit
            let gmax = grad.iter().fold(0.0f64, |a, g| a.max(g.abs())).max(1e-300);
            let fallback: Vec<f64> = grad.iter().map(|g| -g * cost_scale / gmax).collect();
            try_direction(&fallback, &eta)
        });
        match step {
            Some((next, f_new, g_new)) => {
                eta = next;
                f_current = f_new;
                grad = g_new;
            }
            None => break,
        }
    }

    let (final_objective, grad) = stbd_objective_with(&ctx, &best_eta);
    let residual = grad.iter().fold(0.0f64, |a, g| a.max(g.abs())) / mass_scale;
    if residual <= opts.tol {
        converged = true;
    }
    let report = SolveReport {
        final_objective,
        gradient_norm_history: history,
        mass_balance_residual: residual,
        iterations,
        smoothing_schedule: schedule,
        converged,
    };
    (best_eta, report)
}
