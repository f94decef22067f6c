//! Per-angle mapping functions through target points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Target points `(delta, delta_perp)` for one angular dimension on `[0, domain]`.
/// The boundary points `(0, 0)` and `(domain, domain)` are implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AngularTargets<T> {
    pub domain: T,
    /// Interior targets, strictly increasing in both coordinates. Empty means identity.
    pub points: Vec<(T, T)>,
    /// The requested targets could not be ordered consistently; the map is the identity.
    pub identity_fallback: bool,
}

impl<T: Scalar> AngularTargets<T> {
    /// Sorts and validates raw target pairs. Exact duplicates collapse; a set in which every
    /// target is already fixed (`delta == delta_perp`) yields the identity.
    pub fn new(domain: T, raw: &[(T, T)]) -> Self {
        let mut pts: Vec<(T, T)> = raw.to_vec();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal)));
        pts.dedup();
        if pts.iter().all(|(a, b)| a == b) {
            return AngularTargets {
                domain,
                points: Vec::new(),
                identity_fallback: false,
            };
        }
        let ok = Self::margin_of(domain, &pts).is_some();
        AngularTargets {
            domain,
            points: if ok { pts } else { Vec::new() },
            identity_fallback: !ok,
        }
    }

    /// Smallest gap between consecutive knots (boundaries included) in either coordinate,
    /// or `None` when the sorted targets are not strictly increasing inside the domain.
    pub fn margin_of(domain: T, sorted: &[(T, T)]) -> Option<T> {
        let mut prev = (T::zero(), T::zero());
        let mut margin = domain;
        for &p in sorted.iter().chain(std::iter::once(&(domain, domain))) {
            let gap = (p.0 - prev.0).min(p.1 - prev.1);
            if !(gap > T::zero()) {
                return None;
            }
            margin = margin.min(gap);
            prev = p;
        }
        Some(margin)
    }

    pub fn is_identity(&self) -> bool {
        self.points.is_empty()
    }

    /// All knots including the boundary points.
    pub fn knots(&self) -> Vec<(T, T)> {
        let mut k = Vec::with_capacity(self.points.len() + 2);
        k.push((T::zero(), T::zero()));
        k.extend_from_slice(&self.points);
        k.push((self.domain, self.domain));
        k
    }

    /// Region `[gamma_j, eps_j]` around each interior target, bounded by midpoints to the
    /// neighbouring knots, together with the images of those midpoints.
    pub fn regions(&self) -> Vec<Region<T>> {
        let knots = self.knots();
        let half = T::lit(0.5);
        (1..knots.len() - 1)
            .map(|j| {
                let (lo, mid, hi) = (knots[j - 1], knots[j], knots[j + 1]);
                Region {
                    gamma: (lo.0 + mid.0) * half,
                    gamma_perp: (lo.1 + mid.1) * half,
                    delta: mid.0,
                    delta_perp: mid.1,
                    eps: (mid.0 + hi.0) * half,
                    eps_perp: (mid.1 + hi.1) * half,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Region<T> {
    pub gamma: T,
    pub gamma_perp: T,
    pub delta: T,
    pub delta_perp: T,
    pub eps: T,
    pub eps_perp: T,
}

fn clamp_domain<T: Scalar>(x: T, domain: T) -> T {
    let tol = T::lit(1e-9) * domain;
    if x < -tol || x > domain + tol || x.is_nan() {
        log::warn!("angle {x} outside [0, {domain}], clamped");
    }
    if x.is_nan() {
        return T::zero();
    }
    x.max(T::zero()).min(domain)
}

fn lerp<T: Scalar>(a: (T, T), b: (T, T), x: T) -> T {
    if x == a.0 {
        return a.1;
    }
    if x == b.0 {
        return b.1;
    }
    a.1 + (x - a.0) * (b.1 - a.1) / (b.0 - a.0)
}

/// Piecewise-linear interpolation through the knots; exact at every knot.
pub fn eval_piecewise_linear<T: Scalar>(targets: &AngularTargets<T>, x: T) -> T {
    let x = clamp_domain(x, targets.domain);
    if targets.is_identity() {
        return x;
    }
    let knots = targets.knots();
    let idx = knots.partition_point(|k| k.0 <= x);
    if idx == 0 {
        return knots[0].1;
    }
    if idx >= knots.len() {
        return knots[knots.len() - 1].1;
    }
    lerp(knots[idx - 1], knots[idx], x)
}

/// Sharpness and scale parameters of one logit region.
/// `g(x) = K_g (exp(alpha_g (delta - x)) - 1) + delta_perp` on `[gamma, delta]` and
/// `h(x) = K_h (exp(alpha_h (x - delta)) - 1) + delta_perp` on `[delta, eps]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LogitSegmentParams<T> {
    pub alpha_g: T,
    pub alpha_h: T,
    pub k_g: T,
    pub k_h: T,
}

impl<T: Scalar> LogitSegmentParams<T> {
    /// Parameters for given sharpness values, with `K_g`, `K_h` chosen so that the branches
    /// reach `gamma_perp` and `eps_perp`. Slopes at `delta` match only for solved alphas.
    pub fn with_alphas(region: &Region<T>, alpha_g: T, alpha_h: T) -> Self {
        let f = |v: T| v.to_f64_lossy();
        let (ag, ah) = (f(alpha_g), f(alpha_h));
        LogitSegmentParams {
            alpha_g,
            alpha_h,
            k_g: T::lit(logit_scale(ag, f(region.delta) - f(region.gamma), f(region.gamma_perp) - f(region.delta_perp))),
            k_h: T::lit(logit_scale(ah, f(region.eps) - f(region.delta), f(region.eps_perp) - f(region.delta_perp))),
        }
    }

    /// Slopes of `g` and `h` at `delta`.
    pub fn slopes_at_delta(&self) -> (T, T) {
        (-self.alpha_g * self.k_g, self.alpha_h * self.k_h)
    }
}

/// `K = (y_end - delta_perp) / (exp(alpha |x_end - delta|) - 1)`.
pub fn logit_scale(alpha: f64, dx: f64, dy: f64) -> f64 {
    dy / (alpha * dx).exp_m1()
}

/// Slope magnitude at `delta` of a branch with sharpness `alpha` spanning `dx`, `dy`.
fn branch_slope(alpha: f64, dx: f64, dy: f64) -> f64 {
    alpha * dy / (alpha * dx).exp_m1()
}

const ALPHA_LO: f64 = 1e-6;
const ALPHA_HI: f64 = 1e3;
const ALPHA_TOL: f64 = 1e-10;

/// Finds `alpha` in `(1e-6, 1e3)` where the branch slope equals `target`.
/// The slope decreases monotonically in `alpha`.
fn solve_alpha(target: f64, dx: f64, dy: f64) -> Option<f64> {
    let f = |a: f64| branch_slope(a, dx, dy) - target;
    if !(f(ALPHA_LO) > 0.0 && f(ALPHA_HI) < 0.0) {
        return None;
    }
    let (mut lo, mut hi) = (ALPHA_LO.ln(), ALPHA_HI.ln());
    while hi.exp() - lo.exp() > ALPHA_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid.exp()) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Some((0.5 * (lo + hi)).exp())
}

/// Solves the region parameters so that the slopes of `g` and `h` agree at `delta`:
/// `alpha_g |K_g| = alpha_h K_h`. `alpha_h` is found by bisection for the requested
/// `alpha_g`; if that slope is out of reach for `h`, `alpha_h = 1` is fixed and `alpha_g`
/// solved instead.
pub fn solve_logit_params<T: Scalar>(region: &Region<T>, alpha_g: T) -> Result<LogitSegmentParams<T>> {
    let ag = alpha_g.to_f64_lossy();
    if !(ag > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha_g must be positive, got {ag}")));
    }
    let f = |v: T| v.to_f64_lossy();
    let (dxg, dyg) = (f(region.delta) - f(region.gamma), f(region.delta_perp) - f(region.gamma_perp));
    let (dxh, dyh) = (f(region.eps) - f(region.delta), f(region.eps_perp) - f(region.delta_perp));
    if !(dxg > 0.0 && dyg > 0.0 && dxh > 0.0 && dyh > 0.0) {
        return Err(Error::DegenerateGeometry("logit region is not strictly increasing".into()));
    }
    let (ag, ah) = match solve_alpha(branch_slope(ag, dxg, dyg), dxh, dyh) {
        Some(ah) => (ag, ah),
        None => {
            let ag2 = solve_alpha(branch_slope(1.0, dxh, dyh), dxg, dyg).ok_or_else(|| {
                Error::Numeric("no logit sharpness pair matches slopes at the target point".into())
            })?;
            log::debug!("alpha_g {ag} unreachable for the upper branch, using alpha_g={ag2}, alpha_h=1");
            (ag2, 1.0)
        }
    };
    Ok(LogitSegmentParams::with_alphas(region, T::lit(ag), T::lit(ah)))
}

/// Evaluates one region at `x` (clamped to `[gamma, eps]`).
pub fn eval_logit_region<T: Scalar>(r: &Region<T>, p: &LogitSegmentParams<T>, x: T) -> T {
    if x <= r.delta {
        let a = (r.delta - x).max(T::zero());
        p.k_g * (p.alpha_g * a).exp_m1() + r.delta_perp
    } else {
        let a = (x - r.delta).max(T::zero());
        p.k_h * (p.alpha_h * a).exp_m1() + r.delta_perp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    PiecewiseLinear,
    Logit { alpha_g: f64 },
}

/// Monotone map of one angular dimension onto itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AngularMap<T> {
    pub targets: AngularTargets<T>,
    pub kind: MapKind,
    pub regions: Vec<Region<T>>,
    pub params: Vec<LogitSegmentParams<T>>,
}

impl<T: Scalar> AngularMap<T> {
    pub fn identity(domain: T) -> Self {
        AngularMap {
            targets: AngularTargets {
                domain,
                points: Vec::new(),
                identity_fallback: false,
            },
            kind: MapKind::PiecewiseLinear,
            regions: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn new(targets: AngularTargets<T>, kind: MapKind) -> Result<Self> {
        match kind {
            MapKind::PiecewiseLinear => Ok(AngularMap {
                targets,
                kind,
                regions: Vec::new(),
                params: Vec::new(),
            }),
            MapKind::Logit { alpha_g } => {
                let regions = targets.regions();
                let params = regions
                    .iter()
                    .map(|r| solve_logit_params(r, T::lit(alpha_g)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AngularMap {
                    targets,
                    kind,
                    regions,
                    params,
                })
            }
        }
    }

    pub fn domain(&self) -> T {
        self.targets.domain
    }

    pub fn eval(&self, x: T) -> T {
        if self.regions.is_empty() {
            return eval_piecewise_linear(&self.targets, x);
        }
        let x = clamp_domain(x, self.domain());
        let first = &self.regions[0];
        let last = &self.regions[self.regions.len() - 1];
        if x < first.gamma {
            return lerp((T::zero(), T::zero()), (first.gamma, first.gamma_perp), x);
        }
        if x > last.eps {
            return lerp((last.eps, last.eps_perp), (self.domain(), self.domain()), x);
        }
        let j = self.regions.partition_point(|r| r.eps < x).min(self.regions.len() - 1);
        eval_logit_region(&self.regions[j], &self.params[j], x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn midpoint_boundary() {
        let t = AngularTargets::new(PI, &[(1.8, 1.9), (0.6, 0.5)]);
        let r = t.regions();
        assert_eq!(r.len(), 2);
        assert!((r[0].eps - 1.2).abs() < 1e-15);
        assert_eq!(r[0].eps, r[1].gamma);
        assert!((r[0].eps_perp - 1.2).abs() < 1e-15);
    }

    #[test]
    fn crossing_targets_fall_back() {
        let t = AngularTargets::new(PI, &[(0.6, 1.9), (1.8, 0.5)]);
        assert!(t.identity_fallback && t.is_identity());
        let fixed = AngularTargets::new(PI, &[(0.6, 0.6), (1.8, 1.8)]);
        assert!(fixed.is_identity() && !fixed.identity_fallback);
    }

    #[test]
    fn linear_exact_and_midpoint() {
        let t = AngularTargets::new(PI, &[(0.6, 0.5), (1.8, 1.9)]);
        assert_eq!(eval_piecewise_linear(&t, 0.6), 0.5);
        assert_eq!(eval_piecewise_linear(&t, 1.8), 1.9);
        assert!((eval_piecewise_linear(&t, 1.2) - 1.2).abs() < 1e-15);
        assert_eq!(eval_piecewise_linear(&t, PI), PI);
        assert_eq!(eval_piecewise_linear(&t, -1.0), 0.0);
    }

    #[test]
    fn logit_hand_example() {
        let r = Region {
            gamma: 0.0,
            gamma_perp: 0.0,
            delta: 1.0,
            delta_perp: 1.5,
            eps: 2.0,
            eps_perp: 2.0,
        };
        let p = LogitSegmentParams::with_alphas(&r, 1.0_f64, 1.0);
        let kg = (0.0 - 1.5) / (1.0_f64.exp() - 1.0);
        let expect = kg * (0.5_f64.exp() - 1.0) + 1.5;
        assert!((eval_logit_region(&r, &p, 0.5) - expect).abs() < 1e-14);
        assert_eq!(eval_logit_region(&r, &p, 1.0), 1.5);
        assert!(eval_logit_region(&r, &p, 0.0).abs() < 1e-12);
        assert!((eval_logit_region(&r, &p, 2.0) - 2.0).abs() < 1e-12);

        let solved = solve_logit_params(&r, 1.0_f64).unwrap();
        let (gs, hs) = solved.slopes_at_delta();
        assert!((gs - hs).abs() < 1e-9);
        assert!(eval_logit_region(&r, &solved, 0.0).abs() < 1e-12);
        assert!((eval_logit_region(&r, &solved, 2.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_g_kept_when_reachable() {
        let r = Region {
            gamma: 0.0,
            gamma_perp: 0.0,
            delta: 1.0,
            delta_perp: 0.8,
            eps: 2.0,
            eps_perp: 2.0,
        };
        let p = solve_logit_params(&r, 1.0_f64).unwrap();
        assert_eq!(p.alpha_g, 1.0);
        let (gs, hs) = p.slopes_at_delta();
        assert!((gs - hs).abs() < 1e-9);
    }

    #[test]
    fn steep_lower_branch_switches_to_alpha_g() {
        // lower branch slope 3 exceeds the upper branch secant 0.5
        let r = Region {
            gamma: 0.0,
            gamma_perp: 0.0,
            delta: 0.5,
            delta_perp: 1.5,
            eps: 2.5,
            eps_perp: 2.5,
        };
        let p = solve_logit_params(&r, 1.0_f64).unwrap();
        assert_eq!(p.alpha_h, 1.0);
        assert!((p.alpha_g * p.k_g.abs() - p.alpha_h * p.k_h).abs() < 1e-9);
    }

    #[test]
    fn bad_alpha() {
        let r = Region {
            gamma: 0.0,
            gamma_perp: 0.0,
            delta: 1.0,
            delta_perp: 1.0,
            eps: 2.0,
            eps_perp: 2.0,
        };
        assert!(matches!(solve_logit_params(&r, 0.0), Err(Error::InvalidParameter(_))));
    }
}
