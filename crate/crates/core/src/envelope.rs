//! Exact upper-envelope machinery on the time axis.
//!
//! For one station with weights `eta_j`, the functions
//! `g_j(t) = eta_j - l_j(t)` are piecewise affine. The horizon splits into
//! elementary intervals on which every `g_j` is affine, the argmax is a
//! fixed type, and the sign of the envelope is constant. All temporal
//! integrals (objective term, cell masses, scheduled costs, prices, slots)
//! reduce to exact trapezoid sums over these intervals.

use crate::domain::{CapacityProfile, TemporalCostSpec};

/// One elementary interval of the classified envelope.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EnvelopePiece {
    pub start: f64,
    pub end: f64,
    /// Argmax type where the envelope is positive; `None` when the
    /// envelope is <= 0 (idle time).
    pub label: Option<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct TemporalEnvelope<'a> {
    costs: &'a [TemporalCostSpec],
    eta: &'a [f64],
    pub horizon: (f64, f64),
    pub pieces: Vec<EnvelopePiece>,
}

impl<'a> TemporalEnvelope<'a> {
    pub fn build(costs: &'a [TemporalCostSpec], eta: &'a [f64], horizon: (f64, f64)) -> Self {
        assert_eq!(costs.len(), eta.len());
        let (t0, t1) = horizon;
        assert!(t1 > t0, "horizon must have positive length");
        let span = t1 - t0;
        let eps = span * 1e-12;

        // Per-type affine segments covering the horizon.
        let mut segments: Vec<Vec<(f64, f64, f64, f64)>> = Vec::with_capacity(costs.len());
        for (j, cost) in costs.iter().enumerate() {
            let mut ts = vec![t0];
            ts.extend(cost.internal_breakpoints(t0, t1));
            ts.push(t1);
            let mut segs = Vec::with_capacity(ts.len() - 1);
            for w in ts.windows(2) {
                let (a, b) = (w[0], w[1]);
                if b <= a {
                    continue;
                }
                let va = eta[j] - cost.eval(a);
                let vb = eta[j] - cost.eval(b);
                let slope = (vb - va) / (b - a);
                segs.push((a, b, va, slope));
            }
            segments.push(segs);
        }

        let mut cuts = vec![t0, t1];
        for segs in &segments {
            for &(a, _, _, _) in segs.iter().skip(1) {
                cuts.push(a);
            }
        }
        // zero crossings per segment
        for segs in &segments {
            for &(a, b, va, slope) in segs {
                if slope != 0.0 {
                    let root = a - va / slope;
                    if root > a && root < b {
                        cuts.push(root);
                    }
                }
            }
        }
        // pairwise crossings on overlapping segments
        for j in 0..segments.len() {
            for k in (j + 1)..segments.len() {
                for &(aj, bj, vj, sj) in &segments[j] {
                    for &(ak, bk, vk, sk) in &segments[k] {
                        let lo = aj.max(ak);
                        let hi = bj.min(bk);
                        if hi <= lo || sj == sk {
                            continue;
                        }
                        // v_j(a_j) + s_j (t - a_j) = v_k(a_k) + s_k (t - a_k)
                        let root = ((vk - sk * ak) - (vj - sj * aj)) / (sj - sk);
                        if root > lo && root < hi {
                            cuts.push(root);
                        }
                    }
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() <= eps);
        if let Some(last) = cuts.last_mut() {
            *last = t1;
        }
        cuts[0] = t0;

        let gap = |j: usize, t: f64| eta[j] - costs[j].eval(t);
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let mid = 0.5 * (a + b);
            let mut best = 0usize;
            let mut best_v = gap(0, mid);
            for j in 1..costs.len() {
                let v = gap(j, mid);
                if v > best_v {
                    best_v = v;
                    best = j;
                }
            }
            let label = if best_v > 0.0 { Some(best) } else { None };
            pieces.push(EnvelopePiece { start: a, end: b, label });
        }

        TemporalEnvelope {
            costs,
            eta,
            horizon,
            pieces,
        }
    }

    /// `eta_j - l_j(t)`.
    pub fn gap(&self, j: usize, t: f64) -> f64 {
        self.eta[j] - self.costs[j].eval(t)
    }

    /// Exact integral of `(max_j g_j)^+ c(t)` over the horizon.
    pub fn objective_term(&self, cap: &CapacityProfile) -> f64 {
        let mut acc = 0.0;
        for p in &self.pieces {
            if let Some(j) = p.label {
                acc += integrate_affine_times_capacity(
                    p.start,
                    p.end,
                    self.gap(j, p.start),
                    self.gap(j, p.end),
                    cap,
                );
            }
        }
        acc
    }

    /// Per-type capacity masses: `integral over T_j of c(t) dt`.
    pub fn cell_masses(&self, cap: &CapacityProfile) -> Vec<f64> {
        let mut masses = vec![0.0; self.costs.len()];
        for p in &self.pieces {
            if let Some(j) = p.label {
                masses[j] += cap.integrate(p.start, p.end);
            }
        }
        masses
    }

    /// Per-type scheduled temporal cost: `integral over T_j of l_j c dt`.
    pub fn cost_masses(&self, cap: &CapacityProfile) -> Vec<f64> {
        let mut acc = vec![0.0; self.costs.len()];
        for p in &self.pieces {
            if let Some(j) = p.label {
                acc[j] += integrate_affine_times_capacity(
                    p.start,
                    p.end,
                    self.costs[j].eval(p.start),
                    self.costs[j].eval(p.end),
                    cap,
                );
            }
        }
        acc
    }

    /// Maximal service intervals per type (adjacent elementary pieces with
    /// the same label merged).
    pub fn merged_intervals(&self) -> Vec<Vec<(f64, f64)>> {
        let mut result = vec![Vec::new(); self.costs.len()];
        let mut runs = self.merged_runs();
        for run in runs.drain(..) {
            if let Some(j) = run.2 {
                result[j].push((run.0, run.1));
            }
        }
        result
    }

    /// Idle intervals where the envelope is nonpositive.
    pub fn idle_intervals(&self) -> Vec<(f64, f64)> {
        self.merged_runs()
            .into_iter()
            .filter(|r| r.2.is_none())
            .map(|r| (r.0, r.1))
            .collect()
    }

    /// Maximal runs `(start, end, label)` in time order.
    pub fn merged_runs(&self) -> Vec<(f64, f64, Option<usize>)> {
        let mut runs: Vec<(f64, f64, Option<usize>)> = Vec::new();
        for p in &self.pieces {
            match runs.last_mut() {
                Some(last) if last.2 == p.label && (last.1 - p.start).abs() <= 0.0 => {
                    last.1 = p.end;
                }
                Some(last) if last.2 == p.label && last.1 == p.start => {
                    last.1 = p.end;
                }
                _ => runs.push((p.start, p.end, p.label)),
            }
        }
        runs
    }

    /// Detects an argmax tie persisting over a positive-length interval:
    /// two types whose gap functions coincide (within `tol`) across a
    /// whole labeled piece.
    pub fn positive_length_tie(&self, tol: f64) -> Option<(usize, usize, f64, f64)> {
        for p in &self.pieces {
            let Some(j) = p.label else { continue };
            for k in 0..self.costs.len() {
                if k == j {
                    continue;
                }
                let d0 = (self.gap(j, p.start) - self.gap(k, p.start)).abs();
                let dm =
                    (self.gap(j, 0.5 * (p.start + p.end)) - self.gap(k, 0.5 * (p.start + p.end))).abs();
                let d1 = (self.gap(j, p.end) - self.gap(k, p.end)).abs();
                if d0 <= tol && dm <= tol && d1 <= tol {
                    return Some((j, k, p.start, p.end));
                }
            }
        }
        None
    }
}

/// Exact integral of an affine function (given endpoint values) times a
/// piecewise-constant capacity over `[a, b]`.
pub(crate) fn integrate_affine_times_capacity(
    a: f64,
    b: f64,
    va: f64,
    vb: f64,
    cap: &CapacityProfile,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let slope = (vb - va) / (b - a);
    let value = |t: f64| va + slope * (t - a);
    let mut acc = 0.0;
    let bps = cap.breakpoints();
    let rates = cap.rates();
    for k in 0..rates.len() {
        let lo = bps[k].max(a);
        let hi = bps[k + 1].min(b);
        if hi > lo {
            acc += rates[k] * 0.5 * (value(lo) + value(hi)) * (hi - lo);
        }
    }
    acc
}

/// Exact integral of a temporal cost times capacity over `[a, b]`.
pub(crate) fn integrate_cost_times_capacity(
    cost: &TemporalCostSpec,
    cap: &CapacityProfile,
    a: f64,
    b: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut ts = vec![a];
    ts.extend(cost.internal_breakpoints(a, b));
    ts.push(b);
    let mut acc = 0.0;
    for w in ts.windows(2) {
        acc += integrate_affine_times_capacity(w[0], w[1], cost.eval(w[0]), cost.eval(w[1]), cap);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TemporalCostSpec as T;

    fn cap1(t0: f64, t1: f64) -> CapacityProfile {
        CapacityProfile::constant(1.0, t0, t1).unwrap()
    }

    #[test]
    fn single_type_interval_matches_hand_solve() {
        // l(t) = 2(-t)^+ + t^+, eta = 2  =>  served on [-1, 2]
        let costs = vec![T::two_piece(1.0, 2.0, 1.0, 0.0)];
        let eta = vec![2.0];
        let env = TemporalEnvelope::build(&costs, &eta, (-5.0, 5.0));
        let intervals = env.merged_intervals();
        assert_eq!(intervals[0].len(), 1);
        let (a, b) = intervals[0][0];
        assert!((a + 1.0).abs() < 1e-9 && (b - 2.0).abs() < 1e-9);
        // objective: int of (2 - l) over [-1,2] = 2*3 - (1 + 2)  = 3
        let cap = cap1(-5.0, 5.0);
        assert!((env.objective_term(&cap) - 3.0).abs() < 1e-9);
        assert!((env.cell_masses(&cap)[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn nonpositive_weights_give_empty_cells() {
        let costs = vec![
            T::two_piece(1.0, 1.0, 1.0, 0.0),
            T::two_piece(0.5, 1.0, 1.0, 0.0),
        ];
        let eta = vec![0.0, -1.0];
        let env = TemporalEnvelope::build(&costs, &eta, (-3.0, 3.0));
        let cap = cap1(-3.0, 3.0);
        assert_eq!(env.objective_term(&cap), 0.0);
        assert!(env.cell_masses(&cap).iter().all(|&m| m == 0.0));
        assert_eq!(env.idle_intervals().len(), 1);
    }

    #[test]
    fn two_types_nest_by_sensitivity() {
        // Common preferred time, s1 > s2: type 1 owns a band around 0,
        // type 2 the flanks.
        let costs = vec![
            T::two_piece(2.0, 1.0, 1.0, 0.0),
            T::two_piece(1.0, 1.0, 1.0, 0.0),
        ];
        let eta = vec![1.0, 0.8];
        let env = TemporalEnvelope::build(&costs, &eta, (-4.0, 4.0));
        let intervals = env.merged_intervals();
        // type 1 beats type 2 while 1 - 2|t| > 0.8 - |t|, i.e. |t| < 0.2
        assert_eq!(intervals[0].len(), 1);
        let (a0, b0) = intervals[0][0];
        assert!((a0 + 0.2).abs() < 1e-9 && (b0 - 0.2).abs() < 1e-9);
        // type 2 active while 0.8 - |t| > 0 outside the band
        assert_eq!(intervals[1].len(), 2);
        let (a1, b1) = intervals[1][0];
        let (a2, b2) = intervals[1][1];
        assert!((a1 + 0.8).abs() < 1e-9 && (b1 + 0.2).abs() < 1e-9);
        assert!((a2 - 0.2).abs() < 1e-9 && (b2 - 0.8).abs() < 1e-9);
    }

    #[test]
    fn masses_respond_continuously_to_eta() {
        let costs = vec![
            T::two_piece(1.5, 2.0, 1.0, 0.0),
            T::two_piece(1.0, 2.0, 1.0, 0.0),
        ];
        let cap = CapacityProfile::new(vec![-2.0, 0.0, 2.0], vec![1.0, 3.0]).unwrap();
        let eta = vec![0.9, 0.6];
        let base = TemporalEnvelope::build(&costs, &eta, (-2.0, 2.0)).cell_masses(&cap);
        let bumped = vec![0.9 + 1e-7, 0.6];
        let moved = TemporalEnvelope::build(&costs, &bumped, (-2.0, 2.0)).cell_masses(&cap);
        for j in 0..2 {
            assert!((base[j] - moved[j]).abs() < 1e-5);
        }
    }

    #[test]
    fn detects_positive_length_tie() {
        // identical costs and weights: g_0 == g_1 everywhere
        let costs = vec![
            T::two_piece(1.0, 1.0, 1.0, 0.0),
            T::two_piece(1.0, 1.0, 1.0, 0.0),
        ];
        let eta = vec![0.5, 0.5];
        let env = TemporalEnvelope::build(&costs, &eta, (-2.0, 2.0));
        assert!(env.positive_length_tie(1e-12).is_some());
    }

    #[test]
    fn cost_integral_closed_form() {
        // int of t over [0, 2] with rate 2 = 4
        let cost = T::waiting(1.0, 0.0);
        let cap = CapacityProfile::constant(2.0, 0.0, 2.0).unwrap();
        assert!((integrate_cost_times_capacity(&cost, &cap, 0.0, 2.0) - 4.0).abs() < 1e-12);
    }
}
