//! Consistency of tangentially adjacent sequences in small windows: in a
//! region near a simple edge, neighbouring sequences along the DD look alike.

use std::fmt::Write as _;

use crate::imaging::{Axis, EdgeMap, ImageBuffer};

const WINDOW: usize = 7;
const COSINE_MIN: f64 = 0.9;
const PASS_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    pub total_edge_pixels: usize,
    pub regions_examined: usize,
    pub regions_passing: usize,
}

impl ConsistencyReport {
    /// `None` when no window contained an edge.
    pub fn pass_ratio(&self) -> Option<f64> {
        (self.regions_examined > 0).then(|| self.regions_passing as f64 / self.regions_examined as f64)
    }

    pub fn no_regions(&self) -> bool {
        self.regions_examined == 0
    }

    pub const CSV_HEADER: &'static str = "edge_class,total_edge_pixels,regions,passing,ratio";

    /// One CSV row; the ratio column reads `no regions` for an empty report.
    pub fn csv_row(&self, edge_class: &str) -> String {
        let mut s = String::new();
        let _ =
            write!(s, "{edge_class},{},{},{},", self.total_edge_pixels, self.regions_examined, self.regions_passing);
        match self.pass_ratio() {
            Some(r) => {
                let _ = write!(s, "{r:.6}");
            }
            None => s.push_str("no regions"),
        }
        s
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        // All-zero sequences: identical only to each other.
        return if na == nb { 1.0 } else { 0.0 };
    }
    dot / (na * nb)
}

/// Tile the image into non-overlapping 7×7 windows; every window holding an
/// edge pixel contributes seven 7-pixel sequences along its majority DD. A
/// window passes when more than 95% of its sequence pairs have cosine
/// similarity above 0.9.
pub fn consistency_stats(img: &ImageBuffer, edges: &EdgeMap) -> ConsistencyReport {
    let mut report = ConsistencyReport { total_edge_pixels: edges.len(), regions_examined: 0, regions_passing: 0 };
    for by in 0..img.height() / WINDOW {
        for bx in 0..img.width() / WINDOW {
            let (x0, y0) = (bx * WINDOW, by * WINDOW);
            let (mut horizontal, mut vertical) = (0usize, 0usize);
            for y in y0..y0 + WINDOW {
                for x in x0..x0 + WINDOW {
                    if let Some(p) = edges.get(x as isize, y as isize) {
                        match p.dd {
                            Axis::Horizontal => horizontal += 1,
                            Axis::Vertical => vertical += 1,
                        }
                    }
                }
            }
            if horizontal + vertical == 0 {
                continue;
            }
            let axis = if horizontal > vertical { Axis::Horizontal } else { Axis::Vertical };
            let seqs: Vec<Vec<f64>> = (0..WINDOW)
                .map(|j| {
                    (0..WINDOW)
                        .map(|i| match axis {
                            Axis::Horizontal => img.get(x0 + i, y0 + j),
                            Axis::Vertical => img.get(x0 + j, y0 + i),
                        })
                        .collect()
                })
                .collect();
            let mut pairs = 0usize;
            let mut similar = 0usize;
            for i in 0..WINDOW {
                for j in i + 1..WINDOW {
                    pairs += 1;
                    if cosine(&seqs[i], &seqs[j]) > COSINE_MIN {
                        similar += 1;
                    }
                }
            }
            report.regions_examined += 1;
            if similar as f64 / pairs as f64 > PASS_FRACTION {
                report.regions_passing += 1;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{detect_edges, sobel_gradients};
    use crate::synth;

    fn stats(img: &ImageBuffer) -> ConsistencyReport {
        let edges = detect_edges(&sobel_gradients(img).unwrap(), 80.0, 100.0);
        consistency_stats(img, &edges)
    }

    #[test]
    fn straight_edge_passes_everywhere() {
        let img = synth::gaussian_blur(&synth::render_area(70, 70, 16, |x, _| if x < 33.4 { 200.0 } else { 50.0 }), 5);
        let r = stats(&img);
        assert!(r.regions_examined > 0);
        assert_eq!(r.pass_ratio(), Some(1.0));
    }

    #[test]
    fn crossing_fails_somewhere() {
        let img = synth::gaussian_blur(
            &synth::render_area(70, 70, 16, |x, y| if (x < 38.3) == (y < 38.3) { 200.0 } else { 50.0 }),
            3,
        );
        let r = stats(&img);
        assert!(r.pass_ratio().unwrap() < 1.0);
    }

    #[test]
    fn empty_image_reports_no_regions() {
        let r = stats(&ImageBuffer::filled(30, 30, 90.0));
        assert!(r.no_regions());
        assert_eq!(r.pass_ratio(), None);
        assert_eq!(r.csv_row("flat"), "flat,0,0,0,no regions");
    }

    #[test]
    fn cosine_of_shifted_step() {
        let a = [200.0, 200.0, 200.0, 125.0, 50.0, 50.0, 50.0];
        let b = [200.0, 200.0, 125.0, 50.0, 50.0, 50.0, 50.0];
        assert!(cosine(&a, &b) > 0.9);
        let mut r = a;
        r.reverse();
        assert!(cosine(&a, &r) < 0.6);
    }
}
