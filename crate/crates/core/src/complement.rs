//! Edge complement by extension and adjustment: chains of leftover edge
//! pixels are traced out from region endpoints, then each traced pixel is
//! localized with either the region's sides or its own.

use crate::cis::{localize_cis, to_subpixel_point, Dds, SidePair, Source, SubpixelPoint};
use crate::imaging::{EdgeMap, EdgePixel, ImageBuffer};
use crate::ser::{orient, ClaimMap, Ser, SerSet, SerSides};

/// The eight chain directions, each a quarter turn apart from its second
/// neighbour.
pub const DIRECTIONS: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

fn dir_index(d: (isize, isize)) -> usize {
    DIRECTIONS.iter().position(|&v| v == d).expect("unit chain step")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementParams {
    /// Mean-shift threshold beyond which a traced pixel is discarded.
    pub th_c: f64,
}

impl Default for ComplementParams {
    fn default() -> Self {
        Self { th_c: 10.0 }
    }
}

/// Edge pixels not claimed by any stable region.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    width: usize,
    height: usize,
    free: Vec<bool>,
    count: usize,
}

impl CandidateSet {
    pub fn contains(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.free[y as usize * self.width + x as usize]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Remaining candidates in row-major order.
    pub fn pixels(&self) -> Vec<(usize, usize)> {
        (0..self.free.len()).filter(|&i| self.free[i]).map(|i| (i % self.width, i / self.width)).collect()
    }

    fn take(&mut self, x: isize, y: isize) {
        let i = y as usize * self.width + x as usize;
        if self.free[i] {
            self.free[i] = false;
            self.count -= 1;
        }
    }
}

pub fn collect_candidates(edges: &EdgeMap, claims: &ClaimMap) -> CandidateSet {
    let (width, height) = (edges.width(), edges.height());
    let mut free = vec![false; width * height];
    let mut count = 0;
    for p in edges.pixels() {
        if !claims.is_claimed(p.x as isize, p.y as isize) {
            free[p.y * width + p.x] = true;
            count += 1;
        }
    }
    CandidateSet { width, height, free, count }
}

/// Five pixels fanned across the extension side of `center`, labelled A..E.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GuideSequence {
    pub center: (isize, isize),
    pub direction: usize,
    pub cells: [(isize, isize); 5],
}

impl GuideSequence {
    pub fn new(center: (isize, isize), direction: usize) -> Self {
        let (ox, oy) = center;
        let at = |(dx, dy): (isize, isize), k: isize| (ox + k * dx, oy + k * dy);
        let prev = DIRECTIONS[(direction + 7) % 8];
        let next = DIRECTIONS[(direction + 1) % 8];
        let d = DIRECTIONS[direction];
        let cells = if direction % 2 == 0 {
            // Axis step: a straight row one pixel ahead.
            let p = (-d.1, d.0);
            let cell = |t: isize| (ox + d.0 + t * p.0, oy + d.1 + t * p.1);
            [cell(-2), cell(-1), cell(0), cell(1), cell(2)]
        } else {
            [at(prev, 2), at(prev, 1), at(d, 1), at(next, 1), at(next, 2)]
        };
        Self { center, direction, cells }
    }
}

/// Which guide cell was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pick {
    B,
    C,
    D,
}

/// Selection rule on a guide sequence; `None` ends the chain.
pub fn select(guide: &GuideSequence, is_candidate: impl Fn((isize, isize)) -> bool) -> Option<Pick> {
    let [a, b, c, d, e] = guide.cells.map(&is_candidate);
    if a && b {
        Some(Pick::B)
    } else if d && e {
        Some(Pick::D)
    } else if c {
        Some(Pick::C)
    } else if b {
        Some(Pick::B)
    } else if d {
        Some(Pick::D)
    } else {
        None
    }
}

/// Trace a chain from `start` heading `direction` through unclaimed
/// candidates. Stops when no guide cell qualifies, or once the chain touches
/// a pixel of a region other than `origin`.
pub fn trace_chain(
    cands: &mut CandidateSet,
    claims: &ClaimMap,
    origin: usize,
    start: (isize, isize),
    direction: (isize, isize),
) -> Vec<(usize, usize)> {
    let mut chain = Vec::new();
    let mut here = start;
    let mut dir = dir_index(direction);
    loop {
        let guide = GuideSequence::new(here, dir);
        let Some(pick) = select(&guide, |(x, y)| cands.contains(x, y)) else { break };
        let (cell, turn) = match pick {
            Pick::B => (guide.cells[1], 7),
            Pick::C => (guide.cells[2], 0),
            Pick::D => (guide.cells[3], 1),
        };
        // After a turn the step actually taken is the new heading.
        dir = (dir + turn) % 8;
        cands.take(cell.0, cell.1);
        chain.push((cell.0 as usize, cell.1 as usize));
        here = cell;
        let reconnected =
            DIRECTIONS.iter().any(|&(dx, dy)| claims.owner(here.0 + dx, here.1 + dy).is_some_and(|id| id != origin));
        if reconnected {
            break;
        }
    }
    chain
}

/// Heading out of each end of a region: the last member step, or ± the
/// tangent for a single member.
fn end_directions(ser: &Ser) -> [(isize, isize); 2] {
    let m = ser.members();
    if m.len() < 2 {
        let (tx, ty) = ser.axis().other().step();
        return [(-tx, -ty), (tx, ty)];
    }
    let step =
        |a: &EdgePixel, b: &EdgePixel| ((a.x as isize - b.x as isize).signum(), (a.y as isize - b.y as isize).signum());
    let n = m.len();
    [step(&m[0].anchor, &m[1].anchor), step(&m[n - 1].anchor, &m[n - 2].anchor)]
}

/// Chains grown from both ends of region `id`.
pub fn extend_from_ser(cands: &mut CandidateSet, claims: &ClaimMap, ser: &Ser, id: usize) -> Vec<Vec<(usize, usize)>> {
    let (first, last) = ser.endpoints();
    let [d0, d1] = end_directions(ser);
    [(first, d0), (last, d1)]
        .into_iter()
        .map(|(p, d)| trace_chain(cands, claims, id, (p.x as isize, p.y as isize), d))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Independent,
    InheritSer,
    Discarded,
}

/// Region sides `s` against candidate sides `c`, both oriented by window end.
pub fn classify(s: SidePair, c: SidePair, th_c: f64) -> Mode {
    let d_c = (s.g_a - c.g_a).abs().max((s.g_b - c.g_b).abs());
    let m_c = ((s.g_a + s.g_b) - (c.g_a + c.g_b)).abs() / 2.0;
    if m_c > th_c {
        Mode::Discarded
    } else if d_c > m_c {
        Mode::Independent
    } else {
        Mode::InheritSer
    }
}

/// Value on one half of a window where neighbouring pixels differ least;
/// ties go to the outermost pair.
fn smoothest(g: &[f64], low: bool) -> f64 {
    let n = g.len();
    let h = n / 2;
    if h < 2 {
        return if low { g[0] } else { g[n - 1] };
    }
    if low {
        let i = (0..h - 1)
            .min_by(|&i, &j| (g[i + 1] - g[i]).abs().total_cmp(&(g[j + 1] - g[j]).abs()).then(i.cmp(&j)))
            .unwrap();
        g[i]
    } else {
        let j = (n - h..n - 1)
            .min_by(|&i, &j| (g[i + 1] - g[i]).abs().total_cmp(&(g[j + 1] - g[j]).abs()).then(j.cmp(&i)))
            .unwrap();
        g[j + 1]
    }
}

/// Candidate side estimate of a window, oriented by end.
pub fn candidate_sides(dds: &Dds) -> SidePair {
    SidePair::new(smoothest(dds.intensities(), true), smoothest(dds.intensities(), false))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedSequence {
    pub center: (usize, usize),
    /// `None` when the window does not fit.
    pub dds: Option<Dds>,
    pub sides: SidePair,
    pub mode: Mode,
}

/// Window a traced pixel along the region's DD with the region's offsets and
/// decide which sides to localize it with.
pub fn adjust_candidate(
    img: &ImageBuffer,
    pixel: EdgePixel,
    ser: &Ser,
    ser_sides: &SerSides,
    th_c: f64,
) -> AdjustedSequence {
    let m = &ser.members()[0];
    let center = (pixel.x, pixel.y);
    let Ok(dds) = Dds::from_image(img, pixel, ser.axis(), m.k_d, m.k_u) else {
        return AdjustedSequence {
            center,
            dds: None,
            sides: SidePair::new(ser_sides.g_a, ser_sides.g_b),
            mode: Mode::Discarded,
        };
    };
    let s = orient(&dds, ser_sides.g_a, ser_sides.g_b);
    let c = candidate_sides(&dds);
    let mode = classify(s, c, th_c);
    let sides = if mode == Mode::Independent { c } else { s };
    AdjustedSequence { center, dds: Some(dds), sides, mode }
}

/// Extend every region with usable sides (longest first, then row-major by
/// first endpoint), adjust each traced pixel and localize the survivors.
/// `sides[i]` belongs to `set.sers[i]`.
pub fn complement_edges(
    img: &ImageBuffer,
    edges: &EdgeMap,
    set: &SerSet,
    sides: &[Option<SerSides>],
    params: &ComplementParams,
) -> Vec<SubpixelPoint> {
    let mut cands = collect_candidates(edges, &set.claims);
    let mut order: Vec<usize> = (0..set.sers.len()).collect();
    let key = |i: usize| {
        let p = set.sers[i].endpoints().0;
        (std::cmp::Reverse(set.sers[i].len()), p.y, p.x)
    };
    order.sort_by_key(|&i| key(i));

    let mut out = Vec::new();
    for id in order {
        if cands.is_empty() {
            break;
        }
        let ser = &set.sers[id];
        let Some(sides) = sides.get(id).copied().flatten() else { continue };
        for chain in extend_from_ser(&mut cands, &set.claims, ser, id) {
            for (x, y) in chain {
                let Some(&pixel) = edges.get(x as isize, y as isize) else { continue };
                let adj = adjust_candidate(img, pixel, ser, &sides, params.th_c);
                let Some(dds) = adj.dds.filter(|_| adj.mode != Mode::Discarded) else { continue };
                if let Ok(off) = localize_cis(&dds, adj.sides) {
                    out.push(to_subpixel_point(&dds, off, Source::Complement));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Axis;

    fn pixel(x: usize, y: usize) -> EdgePixel {
        EdgePixel { x, y, dd: Axis::Horizontal, gx: 1.0, gy: 0.0 }
    }

    fn edge_map(w: usize, h: usize, pts: &[(usize, usize)]) -> EdgeMap {
        EdgeMap::new(w, h, pts.iter().map(|&(x, y)| pixel(x, y)).collect())
    }

    /// Region of `n` vertical members starting at `(x, y0)`, stepping down.
    fn column_ser(img: &ImageBuffer, x: usize, y0: usize, n: usize) -> Ser {
        let members =
            (y0..y0 + n).map(|y| Dds::from_image(img, pixel(x, y), Axis::Horizontal, 3, 3).unwrap()).collect();
        Ser::new(members, 0.0).unwrap()
    }

    fn step_image(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, |x, _| match x.cmp(&10) {
            std::cmp::Ordering::Less => 200.0,
            std::cmp::Ordering::Equal => 125.0,
            std::cmp::Ordering::Greater => 50.0,
        })
    }

    #[test]
    fn classification_cases() {
        let s = SidePair::new(200.0, 50.0);
        assert_eq!(classify(s, s, 10.0), Mode::InheritSer);
        assert_eq!(classify(s, SidePair::new(210.0, 60.0), 10.0), Mode::InheritSer);
        assert_eq!(classify(s, SidePair::new(230.0, 20.0), 10.0), Mode::Independent);
        assert_eq!(classify(s, SidePair::new(240.0, 130.0), 10.0), Mode::Discarded);
    }

    #[test]
    fn candidates_are_unclaimed_edges() {
        let img = step_image(21, 30);
        let pts: Vec<_> = (4..26).map(|y| (10, y)).collect();
        let edges = edge_map(21, 30, &pts);
        let none = ClaimMap::new(21, 30);
        assert_eq!(collect_candidates(&edges, &none).len(), pts.len());
        let all = ClaimMap::from_sers(&edges, &[column_ser(&img, 10, 4, 22)]);
        assert!(collect_candidates(&edges, &all).is_empty());
        // Only the unclaimed tail remains.
        let part = ClaimMap::from_sers(&edges, &[column_ser(&img, 10, 4, 10)]);
        let c = collect_candidates(&edges, &part);
        assert_eq!(c.pixels(), (14..26).map(|y| (10, y)).collect::<Vec<_>>());
    }

    #[test]
    fn straight_gap_between_two_regions() {
        let img = step_image(21, 30);
        let pts: Vec<_> = (4..26).map(|y| (10, y)).collect();
        let edges = edge_map(21, 30, &pts);
        let sers = [column_ser(&img, 10, 4, 8), column_ser(&img, 10, 17, 9)];
        let claims = ClaimMap::from_sers(&edges, &sers);
        let mut cands = collect_candidates(&edges, &claims);
        assert_eq!(cands.len(), 5);
        let chains = extend_from_ser(&mut cands, &claims, &sers[0], 0);
        // Upward end hits the edge's top; downward end fills the gap.
        assert!(chains[0].is_empty());
        assert_eq!(chains[1], (12..17).map(|y| (10, y)).collect::<Vec<_>>());
        assert!(cands.is_empty());
    }

    #[test]
    fn chain_follows_staircase() {
        let stair = [(5, 5), (6, 5), (7, 6), (8, 6), (9, 7), (10, 7), (11, 8), (12, 8), (13, 9)];
        let edges = edge_map(20, 20, &stair);
        let claims = ClaimMap::new(20, 20);
        let mut cands = collect_candidates(&edges, &claims);
        cands.take(5, 5);
        let chain = trace_chain(&mut cands, &claims, 0, (5, 5), (1, 0));
        assert_eq!(chain, stair[1..].to_vec());
    }

    #[test]
    fn chain_stops_without_continuation() {
        let edges = edge_map(20, 20, &[(5, 5), (6, 5), (7, 5)]);
        let claims = ClaimMap::new(20, 20);
        let mut cands = collect_candidates(&edges, &claims);
        let chain = trace_chain(&mut cands, &claims, 0, (4, 5), (1, 0));
        assert_eq!(chain, vec![(5, 5), (6, 5), (7, 5)]);
    }

    #[test]
    fn guide_cells() {
        let g = GuideSequence::new((0, 0), 0);
        assert_eq!(g.cells, [(1, -2), (1, -1), (1, 0), (1, 1), (1, 2)]);
        let g = GuideSequence::new((0, 0), 1);
        assert_eq!(g.cells, [(2, 0), (1, 0), (1, 1), (0, 1), (0, 2)]);
        let both = |c: (isize, isize)| c == (1, -2) || c == (1, -1) || c == (1, 0);
        assert_eq!(select(&GuideSequence::new((0, 0), 0), both), Some(Pick::B));
    }

    #[test]
    fn inherited_point_matches_cis_with_region_sides() {
        let img = step_image(21, 30);
        let ser = column_ser(&img, 10, 4, 8);
        let sides = SerSides { g_a: 200.0, g_b: 50.0, d0: 150.0 };
        let adj = adjust_candidate(&img, pixel(10, 20), &ser, &sides, 10.0);
        assert_eq!(adj.mode, Mode::InheritSer);
        let dds = adj.dds.unwrap();
        assert_eq!(localize_cis(&dds, adj.sides).unwrap(), localize_cis(&dds, SidePair::new(200.0, 50.0)).unwrap());
    }

    #[test]
    fn window_overrun_is_discarded() {
        let img = step_image(21, 30);
        let ser = column_ser(&img, 10, 4, 8);
        let sides = SerSides { g_a: 200.0, g_b: 50.0, d0: 150.0 };
        assert_eq!(adjust_candidate(&img, pixel(1, 20), &ser, &sides, 10.0).mode, Mode::Discarded);
    }

    #[test]
    fn reversed_polarity_is_reoriented() {
        let img = ImageBuffer::from_fn(21, 30, |x, _| {
            if x < 10 {
                50.0
            } else if x > 10 {
                200.0
            } else {
                125.0
            }
        });
        let ser = column_ser(&step_image(21, 30), 10, 4, 8);
        let sides = SerSides { g_a: 200.0, g_b: 50.0, d0: 150.0 };
        let adj = adjust_candidate(&img, pixel(10, 20), &ser, &sides, 10.0);
        assert_eq!(adj.mode, Mode::InheritSer);
        assert_eq!(adj.sides, SidePair::new(50.0, 200.0));
    }

    #[test]
    fn no_candidates_no_points() {
        let img = step_image(21, 30);
        let pts: Vec<_> = (4..26).map(|y| (10, y)).collect();
        let edges = edge_map(21, 30, &pts);
        let sers = vec![column_ser(&img, 10, 4, 22)];
        let claims = ClaimMap::from_sers(&edges, &sers);
        let set = SerSet { sers, claims };
        assert!(complement_edges(&img, &edges, &set, &[None], &ComplementParams::default()).is_empty());
    }
}
