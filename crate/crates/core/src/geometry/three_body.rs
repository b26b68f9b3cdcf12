//! Planar three-body depletion term: area shared by three depletion discs.

use std::f64::consts::{PI, TAU};

use super::overlap::overlap_closed_2d;
use crate::error::GeometryError;

fn check_point(p: &[f64]) -> Result<[f64; 2], GeometryError> {
    if p.len() != 2 {
        return Err(GeometryError::ThreeBodyUnsupported(p.len()));
    }
    if !p.iter().all(|c| c.is_finite()) {
        return Err(GeometryError::Degenerate("non-finite coordinate".into()));
    }
    Ok([p[0], p[1]])
}

fn d2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Closed-form triple intersection area of three equal discs whose common
/// region is bounded by one arc of each circle:
/// `½ (Σ 𝓥(|x_i − x_j| / 2r⊙) − π r⊙² + ½ √(4 a² b² − (a² + b² − c²)²))`
/// with `a = |x₁ − x₂|`, `b = |x₁ − x₃|`, `c = |x₂ − x₃|`.
pub fn three_body_formula(x1: [f64; 2], x2: [f64; 2], x3: [f64; 2], r_dep: f64) -> f64 {
    let (a2, b2, c2) = (d2(x1, x2), d2(x1, x3), d2(x2, x3));
    let lens = |r2: f64| overlap_closed_2d(r2.sqrt() / (2.0 * r_dep), r_dep);
    let heron = (4.0 * a2 * b2 - (a2 + b2 - c2).powi(2)).max(0.0).sqrt();
    0.5 * (lens(a2) + lens(b2) + lens(c2) - PI * r_dep * r_dep + 0.5 * heron)
}

/// Three-body term φ₃ for three depletion discs of radius `r_dep`.
///
/// When the common region is bounded by one arc of each circle the closed
/// form [`three_body_formula`] is used. Otherwise (empty region, a lens lying
/// inside the third disc, coincident centers) the area is integrated exactly
/// along its boundary arcs.
pub fn three_body_2d(x1: &[f64], x2: &[f64], x3: &[f64], r_dep: f64) -> Result<f64, GeometryError> {
    let pts = [check_point(x1)?, check_point(x2)?, check_point(x3)?];
    if !(r_dep > 0.0) {
        return Err(GeometryError::Degenerate("non-positive radius".into()));
    }
    let r2 = r_dep * r_dep;
    if (0..3).any(|i| (i + 1..3).any(|j| d2(pts[i], pts[j]) >= 4.0 * r2)) {
        return Ok(0.0);
    }
    if three_arc_regime(&pts, r_dep) {
        return Ok(three_body_formula(pts[0], pts[1], pts[2], r_dep));
    }
    Ok(intersection_area(&pts, r_dep))
}

/// Both intersection points of two circles of radius `r` (centers distinct
/// and closer than `2r`).
fn circle_intersections(a: [f64; 2], b: [f64; 2], r: f64) -> [[f64; 2]; 2] {
    let dist = d2(a, b).sqrt();
    let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let h = (r * r - dist * dist / 4.0).max(0.0).sqrt();
    let nx = -(b[1] - a[1]) / dist;
    let ny = (b[0] - a[0]) / dist;
    [[mid[0] + h * nx, mid[1] + h * ny], [mid[0] - h * nx, mid[1] - h * ny]]
}

/// Exactly one intersection point of every circle pair lies inside the third
/// disc.
fn three_arc_regime(pts: &[[f64; 2]; 3], r: f64) -> bool {
    let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    pairs.iter().all(|&(i, j, k)| {
        if d2(pts[i], pts[j]) == 0.0 {
            return false;
        }
        let inside = circle_intersections(pts[i], pts[j], r)
            .iter()
            .filter(|p| d2(**p, pts[k]) <= r * r)
            .count();
        inside == 1
    })
}

/// Area of the intersection of equal discs, from Green's theorem applied to
/// the boundary arcs: each circle contributes the arcs lying inside all other
/// discs.
pub fn intersection_area(centers: &[[f64; 2]], r: f64) -> f64 {
    // Coincident centers describe the same disc.
    let mut uniq: Vec<[f64; 2]> = Vec::new();
    for c in centers {
        if !uniq.iter().any(|u| d2(*u, *c) == 0.0) {
            uniq.push(*c);
        }
    }
    let mut area = 0.0;
    for (i, ci) in uniq.iter().enumerate() {
        // Arc intervals of circle i inside every other disc.
        let mut arcs: Vec<(f64, f64)> = vec![(0.0, TAU)];
        for (j, cj) in uniq.iter().enumerate() {
            if i == j {
                continue;
            }
            let dist = d2(*ci, *cj).sqrt();
            if dist >= 2.0 * r {
                return 0.0;
            }
            let phi = (cj[1] - ci[1]).atan2(cj[0] - ci[0]);
            let half = (dist / (2.0 * r)).acos();
            arcs = intersect_arcs(&arcs, phi - half, phi + half);
        }
        for (t1, t2) in arcs {
            area += 0.5
                * (r * r * (t2 - t1) + r * (ci[0] * (t2.sin() - t1.sin()) - ci[1] * (t2.cos() - t1.cos())));
        }
    }
    area
}

/// Intersect a union of angle intervals (within `[0, 2π)`) with the arc
/// `[lo, hi]` taken modulo `2π`.
fn intersect_arcs(arcs: &[(f64, f64)], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let width = (hi - lo).clamp(0.0, TAU);
    let lo = lo.rem_euclid(TAU);
    let pieces: Vec<(f64, f64)> = if lo + width <= TAU {
        vec![(lo, lo + width)]
    } else {
        vec![(lo, TAU), (0.0, lo + width - TAU)]
    };
    let mut out = Vec::new();
    for &(a, b) in arcs {
        for &(c, e) in &pieces {
            let s = a.max(c);
            let t = b.min(e);
            if t > s {
                out.push((s, t));
            }
        }
    }
    out
}
