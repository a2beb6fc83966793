use std::collections::HashSet;

use super::{angle_diff, sequence_theta, ClaimMap, Ser, SerThresholds, StableDds};
use crate::cis::Dds;
use crate::imaging::{Axis, EdgeMap, EdgePixel, GradientField, ImageBuffer};

/// Relative mean `m / (max − min)`; `None` for a flat sequence.
fn relative_mean(dds: &Dds) -> Option<f64> {
    let g = dds.intensities();
    let (lo, hi) = g.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    (range > 0.0).then(|| dds.mean() / range)
}

struct Front {
    dir: isize,
    prev: EdgePixel,
    theta: f64,
    r: f64,
    open: bool,
    members: Vec<Dds>,
}

/// Expand a stable sequence along the tangent without claim checks.
pub fn expand_tangent(
    img: &ImageBuffer,
    grad: &GradientField,
    edges: &EdgeMap,
    seed: &StableDds,
    th: &SerThresholds,
) -> Ser {
    expand_tangent_claimed(img, grad, edges, seed, th, None)
}

/// Expand a stable sequence one pixel at a time, alternating between the two
/// tangent directions.
///
/// Each new sequence keeps the seed's offsets `(k_d, k_u)` and is centred on
/// whichever of the three next pixels on that side is an edge pixel and
/// closest in intensity to the previous centre. Intensity alone drifts off a
/// curved edge: the straight neighbour nearly always wins. A side closes when
/// no candidate is an edge pixel, when the combined drift of derivative
/// direction and relative mean exceeds 1, when the sequence is flat, when the
/// candidate's own DD differs from the region axis, at the margin, or on a
/// pixel already claimed by an earlier region.
pub fn expand_tangent_claimed(
    img: &ImageBuffer,
    grad: &GradientField,
    edges: &EdgeMap,
    seed: &StableDds,
    th: &SerThresholds,
    claims: Option<&ClaimMap>,
) -> Ser {
    let r0 = relative_mean(&seed.dds);
    let mut visited = HashSet::new();
    visited.insert((seed.dds.anchor.x, seed.dds.anchor.y));
    let mut fronts: Vec<Front> = [-1, 1]
        .into_iter()
        .map(|dir| Front {
            dir,
            prev: seed.dds.anchor,
            theta: seed.theta,
            r: r0.unwrap_or(0.0),
            open: r0.is_some(),
            members: Vec::new(),
        })
        .collect();

    while fronts.iter().any(|f| f.open) {
        for f in fronts.iter_mut().filter(|f| f.open) {
            match step(img, grad, edges, seed, th, claims, &visited, f) {
                Some((dds, theta, r)) => {
                    visited.insert((dds.anchor.x, dds.anchor.y));
                    f.prev = dds.anchor;
                    f.theta = theta;
                    f.r = r;
                    f.members.push(dds);
                }
                None => f.open = false,
            }
        }
    }

    let [low, high]: [Front; 2] = fronts.try_into().ok().expect("two fronts");
    let mut members: Vec<Dds> = low.members.into_iter().rev().collect();
    members.push(seed.dds.clone());
    members.extend(high.members);
    Ser::new(members, seed.theta).expect("members share axis and length")
}

#[allow(clippy::too_many_arguments)]
fn step(
    img: &ImageBuffer,
    grad: &GradientField,
    edges: &EdgeMap,
    seed: &StableDds,
    th: &SerThresholds,
    claims: Option<&ClaimMap>,
    visited: &HashSet<(usize, usize)>,
    f: &Front,
) -> Option<(Dds, f64, f64)> {
    let axis = seed.dds.axis;
    let (tx, ty) = axis.other().step();
    let (ax, ay) = axis.step();
    let (px, py) = (f.prev.x as isize, f.prev.y as isize);
    let reference = img.get(f.prev.x, f.prev.y);

    let mut best: Option<(isize, isize, f64)> = None;
    for off in [0isize, -1, 1] {
        let (cx, cy) = (px + f.dir * tx + off * ax, py + f.dir * ty + off * ay);
        if !edges.contains(cx, cy) {
            continue;
        }
        let d = (img.get(cx as usize, cy as usize) - reference).abs();
        if best.is_none_or(|(_, _, bd)| d < bd) {
            best = Some((cx, cy, d));
        }
    }
    let (cx, cy, _) = best?;

    let tangent_coord = match axis {
        Axis::Horizontal => cy,
        Axis::Vertical => cx,
    };
    let tangent_limit = match axis {
        Axis::Horizontal => img.height(),
        Axis::Vertical => img.width(),
    } as isize;
    let margin = th.margin as isize;
    if tangent_coord < margin || tangent_coord >= tangent_limit - margin {
        return None;
    }
    if claims.is_some_and(|c| c.is_claimed(cx, cy)) || visited.contains(&(cx as usize, cy as usize)) {
        return None;
    }
    let anchor = EdgePixel::from_gradient(grad, cx as usize, cy as usize);
    if anchor.dd != axis {
        return None;
    }
    let dds = Dds::from_image(img, anchor, axis, seed.dds.k_d, seed.dds.k_u).ok()?;
    let r = relative_mean(&dds)?;
    let theta = sequence_theta(grad, &dds);
    let score = th.combine.apply(angle_diff(theta, f.theta) / th.th_theta, (r - f.r).abs() / th.th_r);
    (score <= 1.0).then_some((dds, theta, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{detect_edges, sobel_gradients};
    use crate::ser::grow_stable_dds;
    use crate::synth;

    #[test]
    fn straight_edge_members_share_relative_mean() {
        let img = synth::gaussian_blur(&synth::render_area(40, 50, 16, |x, _| if x < 20.3 { 200.0 } else { 50.0 }), 5);
        let grad = sobel_gradients(&img).unwrap();
        let edges = detect_edges(&grad, 80.0, 100.0);
        let p = EdgePixel::from_gradient(&grad, 20, 25);
        let th = SerThresholds::default();
        let seed = grow_stable_dds(&img, &grad, &p, &th).unwrap();
        let ser = expand_tangent(&img, &grad, &edges, &seed, &th);
        assert_eq!(ser.len(), 50 - 2 * th.margin);
        let r: Vec<f64> = ser.members().iter().map(|m| relative_mean(m).unwrap()).collect();
        for v in &r {
            assert!((v - r[0]).abs() < 1e-9);
        }
        let (a, b) = ser.endpoints();
        assert_eq!((a.y, b.y), (th.margin, 50 - 1 - th.margin));
    }

    #[test]
    fn corner_stops_expansion() {
        // Bright quadrant x < 30, y < 30 on a dark background: the vertical
        // border turns 90 degrees at (30, 30).
        let img = synth::gaussian_blur(
            &synth::render_area(60, 60, 16, |x, y| if x < 30.0 && y < 30.0 { 200.0 } else { 50.0 }),
            3,
        );
        let grad = sobel_gradients(&img).unwrap();
        let edges = detect_edges(&grad, 80.0, 100.0);
        let p = EdgePixel::from_gradient(&grad, 30, 15);
        let th = SerThresholds::default();
        let seed = grow_stable_dds(&img, &grad, &p, &th).unwrap();
        let ser = expand_tangent(&img, &grad, &edges, &seed, &th);
        let (a, b) = ser.endpoints();
        assert_eq!(a.y, th.margin);
        // The summed-gradient direction swings towards the corner normal; the
        // end stays short of the corner row.
        assert!(b.y < 30, "end at y = {}", b.y);
        assert!(b.y > 20);
    }

    #[test]
    fn centres_follow_a_curved_edge() {
        // Top arc of a disc: every centre stays an edge pixel near the arc.
        let img = synth::gaussian_blur(
            &synth::render_area(120, 80, 8, |x, y| if (x - 60.0).hypot(y - 70.0) < 50.0 { 200.0 } else { 50.0 }),
            5,
        );
        let grad = sobel_gradients(&img).unwrap();
        let edges = detect_edges(&grad, 80.0, 100.0);
        let p = edges.pixels().iter().find(|p| p.x == 60 && p.y < 40).copied().unwrap();
        let th = SerThresholds::default();
        let seed = grow_stable_dds(&img, &grad, &p, &th).unwrap();
        let ser = expand_tangent(&img, &grad, &edges, &seed, &th);
        assert!(ser.len() > 20);
        for m in ser.members() {
            assert!(edges.contains(m.anchor.x as isize, m.anchor.y as isize));
            let true_y = 70.0 - (2500.0 - (m.anchor.x as f64 - 60.0).powi(2)).sqrt();
            assert!((m.anchor.y as f64 - true_y).abs() < 1.5, "x {} y {} vs {true_y}", m.anchor.x, m.anchor.y);
        }
    }

    #[test]
    fn flat_candidate_closes_side() {
        // A hard step that ends at y = 20; past it the region is flat.
        let img = synth::render_area(40, 40, 16, |x, y| if x < 20.0 && y < 20.0 { 200.0 } else { 50.0 });
        let grad = sobel_gradients(&img).unwrap();
        let edges = detect_edges(&grad, 80.0, 100.0);
        let p = EdgePixel::from_gradient(&grad, 20, 10);
        let th = SerThresholds::default();
        let seed = grow_stable_dds(&img, &grad, &p, &th).unwrap();
        let ser = expand_tangent(&img, &grad, &edges, &seed, &th);
        assert!(ser.endpoints().1.y < 20);
    }
}
