//! Closed-form linear-city oracles used as ground truth for the numerical
//! solver.
//!
//! Demand lives on [0, 1] with two stations at the endpoints, constant
//! capacities `c1`, `c2`, one-sided waiting cost `alpha * w * t`, and
//! reward `r`. With homogeneous sensitivity the optimal partition and
//! welfare are elementary; with sensitivity uniform on [0, 1] the
//! boundaries are hyperbolic-cosine profiles with three regimes (disjoint
//! partial service, adjacent partial service glued at a threshold
//! sensitivity, complete service).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("root finding failed on bracket [{lo}, {hi}]: {detail}")]
    RootFind { lo: f64, hi: f64, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotellingParams {
    pub c1: f64,
    pub c2: f64,
    pub w: f64,
    pub r: f64,
}

impl HotellingParams {
    pub fn new(c1: f64, c2: f64, w: f64, r: f64) -> Result<Self, AnalyticError> {
        if !(c1 > 0.0 && c2 > 0.0) {
            return Err(AnalyticError::BadParams("capacities must be positive".into()));
        }
        if !(w >= 0.0 && r >= 0.0) {
            return Err(AnalyticError::BadParams(
                "waiting cost and reward must be nonnegative".into(),
            ));
        }
        Ok(HotellingParams { c1, c2, w, r })
    }
}

/// cosh(a)/cosh(b) without overflow for large arguments (a, b >= 0).
fn cosh_ratio(a: f64, b: f64) -> f64 {
    (a - b).exp() * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * b).exp())
}

/// sinh(a)/sinh(b) for a >= 0, b > 0.
fn sinh_ratio(a: f64, b: f64) -> f64 {
    (a - b).exp() * (1.0 - (-2.0 * a).exp()) / (1.0 - (-2.0 * b).exp())
}

fn coth(x: f64) -> f64 {
    (1.0 + (-2.0 * x).exp()) / (1.0 - (-2.0 * x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HomRegime {
    Partial,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotellingHomogeneous {
    pub regime: HomRegime,
    /// Right end of station 1's served interval [0, x1].
    pub x1: f64,
    /// Length of station 2's served interval [1 - x2, 1].
    pub x2: f64,
    pub welfare: f64,
}

/// Reward threshold separating partial from complete service in the
/// homogeneous model.
pub fn homogeneous_threshold(c1: f64, c2: f64, w: f64) -> f64 {
    (w + c1) * (w + c2) / (2.0 * c1 * c2 + (c1 + c2) * w)
}

/// Optimal partition and welfare with homogeneous sensitivity.
pub fn hotelling_homogeneous(p: &HotellingParams) -> HotellingHomogeneous {
    let HotellingParams { c1, c2, w, r } = *p;
    let denom = 2.0 * c1 * c2 + (c1 + c2) * w;
    if r < homogeneous_threshold(c1, c2, w) {
        HotellingHomogeneous {
            regime: HomRegime::Partial,
            x1: r * c1 / (c1 + w),
            x2: r * c2 / (c2 + w),
            welfare: c1 * r * r / (2.0 * (c1 + w)) + c2 * r * r / (2.0 * (c2 + w)),
        }
    } else {
        let x1 = 0.5 + (c1 - c2) * w / (2.0 * denom);
        HotellingHomogeneous {
            regime: HomRegime::Complete,
            x1,
            x2: 1.0 - x1,
            welfare: r - (c2 + w) * (c1 + w) / (2.0 * denom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UniformCase {
    PartialDisjoint,
    PartialAdjacent,
    Complete,
}

/// Reward threshold above which complete service is optimal in the
/// uniform-sensitivity model.
pub fn critical_reward(c1: f64, c2: f64, w: f64) -> f64 {
    let lambda = (w * (c1 + c2) / (2.0 * c1 * c2)).sqrt();
    let sum = c1 + c2;
    (c1 * c1 + c2 * c2) / (sum * sum) + w / (2.0 * sum)
        - (c1 - c2) * (c1 - c2) / (2.0 * sum * sum * lambda.cosh())
}

/// Boundary functions of the uniform-sensitivity model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotellingUniform {
    pub params: HotellingParams,
    pub case: UniformCase,
    pub lambda: f64,
    /// Sensitivity threshold where the regions detach (adjacent case).
    pub alpha_hat: Option<f64>,
    /// Boundary value at the threshold (adjacent case).
    pub kappa: Option<f64>,
}

struct CaseTwoTerms {
    a1: f64,
    b1: f64,
    b2: f64,
    lam_over_sinh: f64,
}

fn case_two_terms(c1: f64, c2: f64, w: f64, lambda: f64, alpha: f64) -> CaseTwoTerms {
    CaseTwoTerms {
        a1: coth(lambda * alpha),
        b1: (w / c1).sqrt() * ((w / c1).sqrt() * (1.0 - alpha)).tanh(),
        b2: (w / c2).sqrt() * ((w / c2).sqrt() * (1.0 - alpha)).tanh(),
        lam_over_sinh: lambda * (-lambda * alpha).exp() * 2.0
            / (1.0 - (-2.0 * lambda * alpha).exp()),
    }
}

/// Right-hand side of the threshold equation: equals 1/2 at alpha -> 0
/// and the critical reward at alpha = 1.
fn adjacent_rhs(c1: f64, c2: f64, w: f64, lambda: f64, alpha: f64) -> f64 {
    let sum = c1 + c2;
    let t = case_two_terms(c1, c2, w, lambda, alpha);
    let head = c2 / sum + w * alpha * alpha / (2.0 * sum) - w * alpha * t.a1 / (sum * lambda)
        + (c1 - c2) * w * alpha / (2.0 * c1 * sum) * t.lam_over_sinh / (lambda * lambda);
    let left = t.b2 * sum + 2.0 * t.a1 * c1 * lambda - (c1 - c2) * t.lam_over_sinh;
    let right = c1 - c2 + t.b1 * sum * alpha + 2.0 * t.a1 * c2 * alpha * lambda;
    head + left * right / (sum * sum * (t.b1 + t.b2 + 2.0 * t.a1 * lambda))
}

fn kappa_at(c1: f64, c2: f64, w: f64, lambda: f64, alpha_hat: f64) -> f64 {
    let sum = c1 + c2;
    let t = case_two_terms(c1, c2, w, lambda, alpha_hat);
    let cosh_term = (lambda * alpha_hat).cosh();
    let numerator = if lambda * alpha_hat < 20.0 {
        2.0 * lambda / (lambda * alpha_hat).sinh() * (c1 * cosh_term / sum - (c1 - c2) / (2.0 * sum))
            + t.b2
    } else {
        // large argument: lambda cosh/sinh -> lambda coth, the shift term
        // vanishes
        2.0 * lambda * t.a1 * c1 / sum + t.b2
    };
    numerator / (2.0 * lambda * t.a1 + t.b2 + t.b1)
}

impl HotellingUniform {
    /// Station 1's boundary: type (x, alpha) with x <= f1(alpha) is
    /// served by station 1.
    pub fn f1(&self, alpha: f64) -> f64 {
        let HotellingParams { c1, c2, w, r } = self.params;
        let sum = c1 + c2;
        match self.case {
            UniformCase::PartialDisjoint => {
                let k = (w / c1).sqrt();
                r * cosh_ratio((1.0 - alpha) * k, k)
            }
            UniformCase::Complete => {
                (c2 - c1) / (2.0 * sum) * cosh_ratio(self.lambda * (1.0 - alpha), self.lambda)
                    + c1 / sum
            }
            UniformCase::PartialAdjacent => {
                let alpha_hat = self.alpha_hat.unwrap();
                let kappa = self.kappa.unwrap();
                if alpha >= alpha_hat {
                    let k = (w / c1).sqrt();
                    kappa * cosh_ratio(k * (1.0 - alpha), k * (1.0 - alpha_hat))
                } else {
                    (c2 - c1) / (2.0 * sum)
                        * sinh_ratio(self.lambda * (alpha_hat - alpha), self.lambda * alpha_hat)
                        + (kappa - c1 / sum)
                            * sinh_ratio(self.lambda * alpha, self.lambda * alpha_hat)
                        + c1 / sum
                }
            }
        }
    }

    /// Station 2's boundary: (x, alpha) with x >= 1 - f2(alpha) goes to
    /// station 2.
    pub fn f2(&self, alpha: f64) -> f64 {
        let HotellingParams { c1, c2, w, r } = self.params;
        let sum = c1 + c2;
        match self.case {
            UniformCase::PartialDisjoint => {
                let k = (w / c2).sqrt();
                r * cosh_ratio((1.0 - alpha) * k, k)
            }
            UniformCase::Complete => 1.0 - self.f1(alpha),
            UniformCase::PartialAdjacent => {
                let alpha_hat = self.alpha_hat.unwrap();
                let kappa = self.kappa.unwrap();
                if alpha >= alpha_hat {
                    let k = (w / c2).sqrt();
                    (1.0 - kappa) * cosh_ratio(k * (1.0 - alpha), k * (1.0 - alpha_hat))
                } else {
                    (c1 - c2) / (2.0 * sum)
                        * sinh_ratio(self.lambda * (alpha_hat - alpha), self.lambda * alpha_hat)
                        + (c1 / sum - kappa)
                            * sinh_ratio(self.lambda * alpha, self.lambda * alpha_hat)
                        + c2 / sum
                }
            }
        }
    }
}

/// Solve the uniform-sensitivity model: classify the regime and build the
/// boundary functions; the adjacent case solves the threshold equation by
/// bisection with a sign-scan fallback.
pub fn hotelling_uniform(p: &HotellingParams) -> Result<HotellingUniform, AnalyticError> {
    let HotellingParams { c1, c2, w, r } = *p;
    if w <= 0.0 {
        return Err(AnalyticError::BadParams(
            "uniform model needs a positive waiting cost".into(),
        ));
    }
    let lambda = (w * (c1 + c2) / (2.0 * c1 * c2)).sqrt();
    let r_c = critical_reward(c1, c2, w);
    if r <= 0.5 {
        return Ok(HotellingUniform {
            params: *p,
            case: UniformCase::PartialDisjoint,
            lambda,
            alpha_hat: None,
            kappa: None,
        });
    }
    if r >= r_c {
        return Ok(HotellingUniform {
            params: *p,
            case: UniformCase::Complete,
            lambda,
            alpha_hat: None,
            kappa: None,
        });
    }
    // adjacent case: find alpha_hat with rhs(alpha_hat) = r
    let delta = 1e-8;
    let f = |alpha: f64| adjacent_rhs(c1, c2, w, lambda, alpha) - r;
    let (mut lo, mut hi) = (delta, 1.0 - delta);
    let (flo, fhi) = (f(lo), f(hi));
    if flo * fhi > 0.0 {
        // monotonicity of the threshold equation is not guaranteed; scan
        // for a sign change, then probe geometrically toward the
        // endpoints for roots that sit inside the initial margin
        let mut bracket = None;
        let steps = 10_000;
        let mut prev = (lo, flo);
        for k in 1..=steps {
            let alpha = delta + (1.0 - 2.0 * delta) * k as f64 / steps as f64;
            let value = f(alpha);
            if prev.1 * value <= 0.0 {
                bracket = Some((prev.0, alpha));
                break;
            }
            prev = (alpha, value);
        }
        if bracket.is_none() {
            let mut a = 1e-13;
            while a < delta {
                let b = (a * 2.0).min(delta);
                if f(a) * f(b) <= 0.0 {
                    bracket = Some((a, b));
                    break;
                }
                a = b;
            }
        }
        if bracket.is_none() {
            let mut gap = 1e-13;
            while gap < delta {
                let (a, b) = (1.0 - (gap * 2.0).min(delta), 1.0 - gap);
                if f(a) * f(b) <= 0.0 {
                    bracket = Some((a, b));
                    break;
                }
                gap *= 2.0;
            }
        }
        match bracket {
            Some((a, b)) => {
                lo = a;
                hi = b;
            }
            None => {
                return Err(AnalyticError::RootFind {
                    lo,
                    hi,
                    detail: format!(
                        "no sign change for threshold equation; endpoints {flo:.3e}, {fhi:.3e}"
                    ),
                });
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let alpha_hat = 0.5 * (lo + hi);
    let kappa = kappa_at(c1, c2, w, lambda, alpha_hat);
    Ok(HotellingUniform {
        params: *p,
        case: UniformCase::PartialAdjacent,
        lambda,
        alpha_hat: Some(alpha_hat),
        kappa: Some(kappa),
    })
}

/// Complete-service boundary as a function of the waiting cost, used for
/// the limit sweep.
pub fn complete_boundary(c1: f64, c2: f64, w: f64, alpha: f64) -> f64 {
    if w == 0.0 {
        return 0.5;
    }
    let lambda = (w * (c1 + c2) / (2.0 * c1 * c2)).sqrt();
    let sum = c1 + c2;
    (c2 - c1) / (2.0 * sum) * cosh_ratio(lambda * (1.0 - alpha), lambda) + c1 / sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLimits {
    /// Boundary as the waiting cost vanishes: the midpoint.
    pub at_zero: f64,
    /// Boundary as waiting dominates: capacity-proportional split.
    pub at_infinity: f64,
    /// Numerically verified monotone interpolation over the w grid.
    pub monotone: bool,
}

/// Analytic limits of the complete-service boundary in the waiting cost,
/// verified by a sweep over a geometric w grid at several sensitivities.
pub fn hotelling_boundary_limits(c1: f64, c2: f64) -> BoundaryLimits {
    let at_zero = 0.5;
    let at_infinity = c1 / (c1 + c2);
    let mut monotone = true;
    for &alpha in &[0.25, 0.5, 0.75, 1.0] {
        let mut prev = complete_boundary(c1, c2, 0.0, alpha);
        let mut w = 1e-3;
        while w < 1e6 {
            let b = complete_boundary(c1, c2, w, alpha);
            // boundary drifts from 1/2 toward c1/(c1+c2)
            if (b - prev) * (at_infinity - at_zero) < -1e-12 {
                monotone = false;
            }
            prev = b;
            w *= 2.0;
        }
    }
    BoundaryLimits {
        at_zero,
        at_infinity,
        monotone,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_partial_example() {
        // (1, 1, 1, 0.5): threshold 1 > r, so partial; x = 0.25 each side,
        // welfare 0.0625 per station, 0.125 total
        let p = HotellingParams::new(1.0, 1.0, 1.0, 0.5).unwrap();
        let out = hotelling_homogeneous(&p);
        assert_eq!(out.regime, HomRegime::Partial);
        assert!((out.x1 - 0.25).abs() < 1e-15);
        assert!((out.x2 - 0.25).abs() < 1e-15);
        assert!((out.welfare - 0.125).abs() < 1e-15);
    }

    #[test]
    fn homogeneous_symmetric_complete_splits_at_half() {
        let p = HotellingParams::new(2.0, 2.0, 0.7, 5.0).unwrap();
        let out = hotelling_homogeneous(&p);
        assert_eq!(out.regime, HomRegime::Complete);
        assert!((out.x1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn homogeneous_zero_waiting_complete_welfare() {
        // w = 0 complete: boundary 1/2, welfare r - 1/4 for c1 = c2
        let p = HotellingParams::new(1.0, 1.0, 0.0, 2.0).unwrap();
        let out = hotelling_homogeneous(&p);
        assert_eq!(out.regime, HomRegime::Complete);
        assert!((out.x1 - 0.5).abs() < 1e-15);
        assert!((out.welfare - (2.0 - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn homogeneous_regimes_agree_at_threshold() {
        let (c1, c2, w) = (3.0, 1.0, 2.0);
        let r = homogeneous_threshold(c1, c2, w);
        // partial formulas evaluated at the threshold
        let x1_partial = r * c1 / (c1 + w);
        let x2_partial = r * c2 / (c2 + w);
        let denom = 2.0 * c1 * c2 + (c1 + c2) * w;
        let x1_complete = 0.5 + (c1 - c2) * w / (2.0 * denom);
        assert!((x1_partial - x1_complete).abs() < 1e-10);
        assert!((x1_partial + x2_partial - 1.0).abs() < 1e-10);
        let w_partial = c1 * r * r / (2.0 * (c1 + w)) + c2 * r * r / (2.0 * (c2 + w));
        let w_complete = r - (c2 + w) * (c1 + w) / (2.0 * denom);
        assert!((w_partial - w_complete).abs() < 1e-10);
    }

    #[test]
    fn uniform_case1_boundary_conditions() {
        let p = HotellingParams::new(3.0, 1.0, 10.0, 0.45).unwrap();
        let u = hotelling_uniform(&p).unwrap();
        assert_eq!(u.case, UniformCase::PartialDisjoint);
        // f*(0) = 1, so f1(0) = r
        assert!((u.f1(0.0) - 0.45).abs() < 1e-12);
        assert!(u.f1(1.0) < u.f1(0.0));
    }

    #[test]
    fn uniform_critical_reward_value() {
        // lambda = sqrt(20/3), r_c = 1.8562...
        let r_c = critical_reward(3.0, 1.0, 10.0);
        assert!(
            (1.85..=1.86).contains(&r_c),
            "critical reward {r_c} outside [1.85, 1.86]"
        );
    }

    #[test]
    fn uniform_case3_values() {
        let p = HotellingParams::new(3.0, 1.0, 10.0, 2.0).unwrap();
        let u = hotelling_uniform(&p).unwrap();
        assert_eq!(u.case, UniformCase::Complete);
        let lambda = (10.0f64 * 4.0 / 6.0).sqrt();
        let expected = (1.0 - 3.0) / (2.0 * 4.0) / lambda.cosh() + 0.75;
        assert!((u.f1(1.0) - expected).abs() < 1e-12);
        assert!((expected - 0.7125).abs() < 2e-4);
        // complete service: boundaries partition the strip
        for k in 0..=10 {
            let alpha = k as f64 / 10.0;
            assert!((u.f1(alpha) + u.f2(alpha) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_symmetric_complete_is_half() {
        let p = HotellingParams::new(2.0, 2.0, 5.0, 10.0).unwrap();
        let u = hotelling_uniform(&p).unwrap();
        for k in 0..=8 {
            let alpha = k as f64 / 8.0;
            assert!((u.f1(alpha) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_case2_glues_continuously() {
        let p = HotellingParams::new(3.0, 1.0, 10.0, 0.65).unwrap();
        let u = hotelling_uniform(&p).unwrap();
        assert_eq!(u.case, UniformCase::PartialAdjacent);
        let alpha_hat = u.alpha_hat.unwrap();
        let kappa = u.kappa.unwrap();
        assert!(alpha_hat > 0.0 && alpha_hat < 1.0);
        // the boundary equals kappa at the junction from both sides
        let below = u.f1(alpha_hat - 1e-9);
        let above = u.f1(alpha_hat + 1e-9);
        assert!((below - above).abs() < 1e-6, "f1 jump {below} vs {above}");
        assert!((u.f1(alpha_hat) - kappa).abs() < 1e-9);
        // regions touch below alpha_hat, separate above
        assert!((u.f1(alpha_hat * 0.5) + u.f2(alpha_hat * 0.5) - 1.0).abs() < 1e-9);
        let above_mid = 0.5 * (alpha_hat + 1.0);
        assert!(u.f1(above_mid) + u.f2(above_mid) < 1.0 - 1e-6);
    }

    #[test]
    fn adjacent_rhs_endpoints() {
        // the threshold equation's right side runs from 1/2 to the
        // critical reward
        let (c1, c2, w) = (3.0f64, 1.0f64, 10.0f64);
        let lambda = (w * (c1 + c2) / (2.0 * c1 * c2)).sqrt();
        let near_zero = adjacent_rhs(c1, c2, w, lambda, 1e-7);
        assert!((near_zero - 0.5).abs() < 1e-4, "rhs(0+) = {near_zero}");
        let at_one = adjacent_rhs(c1, c2, w, lambda, 1.0 - 1e-12);
        assert!((at_one - critical_reward(c1, c2, w)).abs() < 1e-6);
    }

    #[test]
    fn uniform_case_junctions_are_continuous() {
        let (c1, c2, w) = (3.0, 1.0, 10.0);
        // case 1 vs case 2 at r just above 0.5
        let r = 0.5 + 5e-9;
        let disjoint = HotellingUniform {
            params: HotellingParams::new(c1, c2, w, 0.5).unwrap(),
            case: UniformCase::PartialDisjoint,
            lambda: (w * (c1 + c2) / (2.0 * c1 * c2)).sqrt(),
            alpha_hat: None,
            kappa: None,
        };
        let adjacent = hotelling_uniform(&HotellingParams::new(c1, c2, w, r).unwrap()).unwrap();
        assert_eq!(adjacent.case, UniformCase::PartialAdjacent);
        for k in 0..=20 {
            let alpha = k as f64 / 20.0;
            assert!(
                (disjoint.f1(alpha) - adjacent.f1(alpha)).abs() < 1e-8,
                "case 1/2 junction gap at alpha {alpha}"
            );
        }
        // case 2 vs case 3 at r just below the critical reward
        let r_c = critical_reward(c1, c2, w);
        let adjacent = hotelling_uniform(&HotellingParams::new(c1, c2, w, r_c - 1e-10).unwrap())
            .unwrap();
        let complete = hotelling_uniform(&HotellingParams::new(c1, c2, w, r_c).unwrap()).unwrap();
        assert_eq!(adjacent.case, UniformCase::PartialAdjacent);
        assert_eq!(complete.case, UniformCase::Complete);
        for k in 0..=20 {
            let alpha = k as f64 / 20.0;
            assert!(
                (adjacent.f1(alpha) - complete.f1(alpha)).abs() < 1e-8,
                "case 2/3 junction gap at alpha {alpha}: {} vs {}",
                adjacent.f1(alpha),
                complete.f1(alpha)
            );
        }
    }

    #[test]
    fn boundary_monotonicity_by_case() {
        // disjoint partial service: each station's reach shrinks with
        // sensitivity
        let p = HotellingParams::new(3.0, 1.0, 10.0, 0.4).unwrap();
        let u = hotelling_uniform(&p).unwrap();
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for k in 0..=50 {
            let alpha = k as f64 / 50.0;
            assert!(u.f1(alpha) <= prev.0 + 1e-12);
            assert!(u.f2(alpha) <= prev.1 + 1e-12);
            prev = (u.f1(alpha), u.f2(alpha));
        }
        // complete service with c1 > c2: the boundary drifts from the
        // midpoint toward the bigger station's capacity share, so f1
        // rises with sensitivity (allocation switching)
        let p = HotellingParams::new(3.0, 1.0, 10.0, 2.0).unwrap();
        let u = hotelling_uniform(&p).unwrap();
        assert!((u.f1(0.0) - 0.5).abs() < 1e-12);
        let mut prev = 0.0;
        for k in 0..=50 {
            let alpha = k as f64 / 50.0;
            let v = u.f1(alpha);
            assert!(v >= prev - 1e-12, "f1 fell at alpha {alpha}");
            prev = v;
        }
    }

    #[test]
    fn boundary_limits_match_and_interpolate() {
        let limits = hotelling_boundary_limits(3.0, 1.0);
        assert_eq!(limits.at_zero, 0.5);
        assert!((limits.at_infinity - 0.75).abs() < 1e-15);
        assert!(limits.monotone);
        // spot: large w boundary approaches the capacity share
        let b = complete_boundary(3.0, 1.0, 1e5, 0.8);
        assert!((b - 0.75).abs() < 1e-3);
    }
}
