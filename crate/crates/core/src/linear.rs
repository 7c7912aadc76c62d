//! Fast path for constant capacity with two-piece linear costs around a
//! common preferred time.
//!
//! In that regime the temporal subproblem has a closed form: serving
//! cumulative masses `Q_j` at rate `c` costs
//! `sum_j beta Q_j^2 (s_j - s_{j+1}) / (4 c)` with `beta = 2bh/(b+h)`,
//! attained by nested bands with boundaries `t_j^+ = b Q_j / (c (b+h))`
//! and `t_j^- = -h Q_j / (c (b+h))`. The dual then collapses to a strictly
//! convex quadratic in each station's weight row plus the usual spatial
//! term, with the quadratic driven by the explicit tridiagonal inverse of
//! the sensitivity matrix `A[i][j] = s_max(i,j)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{AssumptionMode, Scenario};
use crate::partition::{
    spatial_cells, MatchingPlan, SpatialPartition, TemporalPartition, WelfareBreakdown,
};
use crate::solver::{SpatialContext, WeightMatrix};

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("sensitivities must be strictly decreasing and positive: {0}")]
    BadSensitivities(String),
    #[error("degenerate slopes: {0}")]
    BadSlopes(String),
    #[error("fast path needs constant capacities, a common preferred time and decreasing sensitivities")]
    WrongRegime,
    #[error("horizon too short: the {side} side holds {available:.6} but total demand is {needed:.6}")]
    HorizonTooShort {
        side: &'static str,
        available: f64,
        needed: f64,
    },
}

/// Early/late slope pair; an infinite slope (service forbidden on that
/// side) is a dedicated variant rather than a float infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlopePair {
    Both { early: f64, late: f64 },
    /// Late service forbidden (late slope infinite).
    EarlyOnly { early: f64 },
    /// Early service forbidden (early slope infinite).
    LateOnly { late: f64 },
}

impl SlopePair {
    /// The temporal scale `2bh/(b+h)`; `2b` when late service is
    /// forbidden, `2h` when early service is forbidden.
    pub fn beta(&self) -> f64 {
        match *self {
            SlopePair::Both { early, late } => 2.0 * early * late / (early + late),
            SlopePair::EarlyOnly { early } => 2.0 * early,
            SlopePair::LateOnly { late } => 2.0 * late,
        }
    }

    fn validate(&self) -> Result<(), LinearError> {
        let ok = match *self {
            SlopePair::Both { early, late } => early > 0.0 && late > 0.0,
            SlopePair::EarlyOnly { early } => early > 0.0,
            SlopePair::LateOnly { late } => late > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(LinearError::BadSlopes(
                "slopes on available sides must be positive".into(),
            ))
        }
    }

    /// Fractions of each type's duration placed early and late.
    fn split(&self) -> (f64, f64) {
        match *self {
            SlopePair::Both { early, late } => {
                let total = early + late;
                (late / total, early / total)
            }
            SlopePair::EarlyOnly { .. } => (1.0, 0.0),
            SlopePair::LateOnly { .. } => (0.0, 1.0),
        }
    }
}

/// The sensitivity matrix `A[i][j] = s_max(i,j)` with its tridiagonal
/// inverse (convention `s_{m+1} = 0`) and the slope scale beta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityMatrix {
    pub s: Vec<f64>,
    pub beta: f64,
    /// Diagonal of the inverse.
    pub inv_diag: Vec<f64>,
    /// Off-diagonal of the inverse: `inv_off[i]` sits at (i, i+1) and
    /// (i+1, i).
    pub inv_off: Vec<f64>,
}

impl SensitivityMatrix {
    pub fn dim(&self) -> usize {
        self.s.len()
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.s[i.max(j)]
    }

    /// `A v` in O(m^2); m stays small.
    pub fn apply_a(&self, v: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m)
            .map(|i| (0..m).map(|j| self.a(i, j) * v[j]).sum())
            .collect()
    }

    /// `A^{-1} v` via the tridiagonal form, O(m).
    pub fn apply_a_inv(&self, v: &[f64]) -> Vec<f64> {
        let m = self.dim();
        let mut out = vec![0.0; m];
        for i in 0..m {
            let mut acc = self.inv_diag[i] * v[i];
            if i > 0 {
                acc += self.inv_off[i - 1] * v[i - 1];
            }
            if i + 1 < m {
                acc += self.inv_off[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    pub fn a_inv_dense(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        let mut out = vec![vec![0.0; m]; m];
        for i in 0..m {
            out[i][i] = self.inv_diag[i];
            if i + 1 < m {
                out[i][i + 1] = self.inv_off[i];
                out[i + 1][i] = self.inv_off[i];
            }
        }
        out
    }
}

/// Build the sensitivity matrix and its closed-form inverse.
pub fn build_a_inverse(s: &[f64], slopes: &SlopePair) -> Result<SensitivityMatrix, LinearError> {
    if s.is_empty() {
        return Err(LinearError::BadSensitivities("empty".into()));
    }
    if s.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(LinearError::BadSensitivities(
            "all sensitivities must be positive".into(),
        ));
    }
    for w in s.windows(2) {
        if w[1] >= w[0] {
            return Err(LinearError::BadSensitivities(format!(
                "{} followed by {} is not strictly decreasing",
                w[0], w[1]
            )));
        }
    }
    slopes.validate()?;
    let m = s.len();
    // with s_{m+1} = 0: diag_1 = 1/(s_1 - s_2),
    // diag_i = (s_{i-1} - s_{i+1}) / ((s_{i-1} - s_i)(s_i - s_{i+1})),
    // off_i = -1/(s_i - s_{i+1})
    let s_at = |k: usize| if k < m { s[k] } else { 0.0 };
    let mut inv_diag = vec![0.0; m];
    let mut inv_off = vec![0.0; m.saturating_sub(1)];
    for i in 0..m {
        inv_diag[i] = if i == 0 {
            1.0 / (s_at(0) - s_at(1))
        } else {
            (s_at(i - 1) - s_at(i + 1)) / ((s_at(i - 1) - s_at(i)) * (s_at(i) - s_at(i + 1)))
        };
        if i + 1 < m {
            inv_off[i] = -1.0 / (s_at(i) - s_at(i + 1));
        }
    }
    Ok(SensitivityMatrix {
        s: s.to_vec(),
        beta: slopes.beta(),
        inv_diag,
        inv_off,
    })
}

/// A closed-form optimal schedule for one station: nested band boundaries
/// around the preferred time and the exact temporal cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// `t_j^+`, cumulative late boundaries (relative to the preferred time).
    pub late: Vec<f64>,
    /// `t_j^-`, cumulative early boundaries (nonpositive, relative).
    pub early: Vec<f64>,
    pub cost: f64,
}

/// Optimal nested schedule for masses `q` (ordered by decreasing
/// sensitivity `s`) at constant rate `c`.
pub fn closed_form_schedule(
    q: &[f64],
    s: &[f64],
    slopes: &SlopePair,
    c: f64,
) -> Result<Schedule, LinearError> {
    if q.len() != s.len() {
        return Err(LinearError::BadSensitivities(
            "q and s lengths differ".into(),
        ));
    }
    if q.iter().any(|v| *v < 0.0) {
        return Err(LinearError::BadSensitivities("masses must be >= 0".into()));
    }
    slopes.validate()?;
    let m = q.len();
    let beta = slopes.beta();
    let (early_frac, late_frac) = slopes.split();
    let mut late = vec![0.0; m];
    let mut early = vec![0.0; m];
    let mut cost = 0.0;
    let mut cum = 0.0;
    for j in 0..m {
        cum += q[j];
        late[j] = late_frac * cum / c;
        early[j] = -early_frac * cum / c;
        let s_next = if j + 1 < m { s[j + 1] } else { 0.0 };
        cost += beta * cum * cum * (s[j] - s_next) / (4.0 * c);
    }
    Ok(Schedule { late, early, cost })
}

/// How the scenario's horizon constrains the schedule sides.
fn scenario_slopes(sc: &Scenario) -> Result<(SlopePair, Vec<f64>, f64), LinearError> {
    if sc.assumption_mode() != AssumptionMode::HomogeneousPreference {
        return Err(LinearError::WrongRegime);
    }
    let specs: Vec<(f64, f64, f64, f64)> = sc
        .temporal_costs
        .iter()
        .map(|c| c.as_two_piece().ok_or(LinearError::WrongRegime))
        .collect::<Result<_, _>>()?;
    let (_, b, h, tau) = specs[0];
    let s: Vec<f64> = specs.iter().map(|&(s, _, _, _)| s).collect();
    for st in &sc.stations {
        if !st.capacity.is_constant() {
            return Err(LinearError::WrongRegime);
        }
    }
    let (t0, t1) = sc.horizon();
    let total = sc.total_demand_mass();
    let min_rate = sc
        .stations
        .iter()
        .map(|st| st.capacity.rates()[0])
        .fold(f64::INFINITY, f64::min);
    let early_span = tau - t0;
    let late_span = t1 - tau;
    let eps = 1e-12 * (t1 - t0);
    let slopes = if early_span <= eps {
        SlopePair::LateOnly { late: h }
    } else if late_span <= eps {
        SlopePair::EarlyOnly { early: b }
    } else {
        SlopePair::Both { early: b, late: h }
    };
    slopes.validate()?;
    // any single station must be able to hold all demand on each
    // available side
    match slopes {
        SlopePair::LateOnly { .. } => {
            if late_span * min_rate < total {
                return Err(LinearError::HorizonTooShort {
                    side: "late",
                    available: late_span * min_rate,
                    needed: total,
                });
            }
        }
        SlopePair::EarlyOnly { .. } => {
            if early_span * min_rate < total {
                return Err(LinearError::HorizonTooShort {
                    side: "early",
                    available: early_span * min_rate,
                    needed: total,
                });
            }
        }
        SlopePair::Both { .. } => {
            let side = early_span.min(late_span);
            if side * min_rate < total {
                return Err(LinearError::HorizonTooShort {
                    side: "shorter",
                    available: side * min_rate,
                    needed: total,
                });
            }
        }
    }
    Ok((slopes, s, tau))
}

/// Quadratic-plus-spatial dual objective of the fast path with its exact
/// gradient.
pub fn linear_objective(
    sc: &Scenario,
    eta: &WeightMatrix,
) -> Result<(f64, Vec<f64>), LinearError> {
    let (slopes, s, _) = scenario_slopes(sc)?;
    let matrix = build_a_inverse(&s, &slopes)?;
    let ctx = SpatialContext::new(sc);
    Ok(linear_objective_with(sc, &ctx, &matrix, eta))
}

fn linear_objective_with(
    sc: &Scenario,
    ctx: &SpatialContext,
    matrix: &SensitivityMatrix,
    eta: &WeightMatrix,
) -> (f64, Vec<f64>) {
    let n = sc.station_count();
    let m = sc.type_count();
    let (sp_value, sp_masses) = ctx.exact(eta);
    let mut value = sp_value;
    let mut grad = vec![0.0; n * m];
    for (i, st) in sc.stations.iter().enumerate() {
        let c = st.capacity.rates()[0];
        let inv_eta = matrix.apply_a_inv(eta.row(i));
        let quad: f64 = eta.row(i).iter().zip(&inv_eta).map(|(a, b)| a * b).sum();
        value += c / matrix.beta * quad;
        for j in 0..m {
            grad[i * m + j] = 2.0 * c / matrix.beta * inv_eta[j] - sp_masses[i * m + j];
        }
    }
    (value, grad)
}

/// Minimize the fast-path dual and assemble the plan with closed-form
/// schedules. The alternation maps each station's spatial cell masses to
/// the unique weight row matching them (`eta_i = beta/(2 c_i) A q_i`) and
/// repeats until the cell labels stop moving.
pub fn solve_linear(
    sc: &Scenario,
    tol: f64,
    max_rounds: usize,
) -> Result<(WeightMatrix, MatchingPlan), LinearError> {
    let (slopes, s, tau) = scenario_slopes(sc)?;
    let matrix = build_a_inverse(&s, &slopes)?;
    let n = sc.station_count();
    let m = sc.type_count();
    let mass_scale = sc.mass_scale();
    let ctx = SpatialContext::new(sc);

    let mut eta = WeightMatrix::zeros(n, m);
    let mut best = (f64::INFINITY, eta.clone());
    let mut damping = 1.0f64;
    let mut since_improvement = 0usize;
    for _ in 0..max_rounds {
        let (_, masses) = ctx.exact(&eta);
        let mut target = WeightMatrix::zeros(n, m);
        for (i, st) in sc.stations.iter().enumerate() {
            let c = st.capacity.rates()[0];
            let q: Vec<f64> = (0..m).map(|j| masses[i * m + j]).collect();
            let aq = matrix.apply_a(&q);
            for (j, v) in aq.iter().enumerate() {
                target.set(i, j, matrix.beta / (2.0 * c) * v);
            }
        }
        let blended = WeightMatrix::from_values(
            n,
            m,
            eta.values()
                .iter()
                .zip(target.values())
                .map(|(old, new)| old + damping * (new - old))
                .collect(),
        );
        eta = blended;
        let (_, grad) = linear_objective_with(sc, &ctx, &matrix, &eta);
        let res = grad.iter().fold(0.0f64, |a, g| a.max(g.abs())) / mass_scale;
        if res < best.0 {
            best = (res, eta.clone());
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement >= 2 {
                damping = (damping * 0.5).max(1.0 / 64.0);
                since_improvement = 0;
            }
        }
        if res <= tol {
            break;
        }
    }
    let eta = best.1;

    // assemble the plan: spatial labels drive q, closed-form schedules
    // drive the temporal partition
    let spatial = spatial_cells(sc, &eta, sc.reward);
    let mut intervals = vec![vec![Vec::new(); m]; n];
    let mut idle = Vec::with_capacity(n);
    let mut temporal_cost_total = 0.0;
    for (i, st) in sc.stations.iter().enumerate() {
        let c = st.capacity.rates()[0];
        let q: Vec<f64> = (0..m).map(|j| spatial.mass(i, j)).collect();
        let schedule = closed_form_schedule(&q, &s, &slopes, c)?;
        temporal_cost_total += schedule.cost;
        let (t0, t1) = st.capacity.horizon();
        let mut prev_late = 0.0;
        let mut prev_early = 0.0;
        for j in 0..m {
            if schedule.late[j] > prev_late + 1e-15 {
                intervals[i][j].push((tau + prev_late, tau + schedule.late[j]));
            }
            if schedule.early[j] < prev_early - 1e-15 {
                intervals[i][j].push((tau + schedule.early[j], tau + prev_early));
            }
            prev_late = schedule.late[j];
            prev_early = schedule.early[j];
        }
        let mut station_idle = Vec::new();
        if tau + schedule.early[m - 1] > t0 {
            station_idle.push((t0, tau + schedule.early[m - 1]));
        }
        if tau + schedule.late[m - 1] < t1 {
            station_idle.push((tau + schedule.late[m - 1], t1));
        }
        idle.push(station_idle);
    }

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
    let q = spatial.masses.clone();
    let plan = MatchingPlan {
        spatial: SpatialPartition {
            labels: spatial.labels,
            masses: spatial.masses,
            station_count: n,
            type_count: m,
        },
        temporal: TemporalPartition { intervals, idle },
        q,
        welfare: WelfareBreakdown {
            reward_total,
            spatial_cost_total,
            temporal_cost_total,
            welfare: reward_total - spatial_cost_total - temporal_cost_total,
        },
        served_mass,
        uncovered_mass,
        consistency_residual: 0.0,
    };
    Ok((eta, plan))
}
