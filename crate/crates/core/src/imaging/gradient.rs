use super::ImageBuffer;
use crate::error::{Error, Result};

/// Per-pixel Sobel derivatives and their Euclidean magnitude.
#[derive(Debug, Clone)]
pub struct GradientField {
    width: usize,
    height: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
    magnitude: Vec<f64>,
}

impl GradientField {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn gx(&self, x: usize, y: usize) -> f64 {
        self.gx[y * self.width + x]
    }

    #[inline]
    pub fn gy(&self, x: usize, y: usize) -> f64 {
        self.gy[y * self.width + x]
    }

    #[inline]
    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        self.magnitude[y * self.width + x]
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitude
    }
}

/// 3×3 Sobel derivatives with replicate-edge padding.
///
/// `gx` is positive where intensity increases with x, `gy` where it
/// increases with y (downwards).
pub fn sobel_gradients(img: &ImageBuffer) -> Result<GradientField> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall { width: w, height: h, min: 3 });
    }
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut magnitude = vec![0.0; w * h];
    for y in 0..h {
        let yi = y as isize;
        for x in 0..w {
            let xi = x as isize;
            let p = |dx: isize, dy: isize| img.get_clamped(xi + dx, yi + dy);
            let dx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let dy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let i = y * w + x;
            gx[i] = dx;
            gy[i] = dy;
            magnitude[i] = dx.hypot(dy);
        }
    }
    Ok(GradientField { width: w, height: h, gx, gy, magnitude })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_zero_gradient() {
        let img = ImageBuffer::filled(9, 7, 128.0);
        let g = sobel_gradients(&img).unwrap();
        for y in 0..7 {
            for x in 0..9 {
                assert_eq!(g.gx(x, y), 0.0);
                assert_eq!(g.gy(x, y), 0.0);
                assert_eq!(g.magnitude(x, y), 0.0);
            }
        }
    }

    #[test]
    fn vertical_step_column() {
        // Columns 0..=4 are 50, 5.. are 200: kernel weights 1+2+1 times the step.
        let img = ImageBuffer::from_fn(10, 6, |x, _| if x < 5 { 50.0 } else { 200.0 });
        let g = sobel_gradients(&img).unwrap();
        for y in 1..5 {
            assert_eq!(g.gx(4, y), 600.0);
            assert_eq!(g.gx(5, y), 600.0);
            assert_eq!(g.gx(3, y), 0.0);
            assert_eq!(g.gx(6, y), 0.0);
            for x in 0..10 {
                assert_eq!(g.gy(x, y), 0.0);
            }
        }
    }

    #[test]
    fn diagonal_step_is_symmetric() {
        let img = ImageBuffer::from_fn(12, 12, |x, y| if x + y < 12 { 50.0 } else { 200.0 });
        let g = sobel_gradients(&img).unwrap();
        for y in 1..11 {
            for x in 1..11 {
                assert_eq!(g.gx(x, y).abs(), g.gy(x, y).abs(), "at ({x},{y})");
            }
        }
    }

    #[test]
    fn magnitude_dominates_components() {
        let img = ImageBuffer::from_fn(8, 8, |x, y| ((x * 37 + y * 11) % 23) as f64 * 9.0);
        let g = sobel_gradients(&img).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let m = g.magnitude(x, y);
                assert!(m >= g.gx(x, y).abs() && m >= g.gy(x, y).abs());
            }
        }
    }

    #[test]
    fn too_small() {
        let img = ImageBuffer::filled(2, 5, 1.0);
        assert!(matches!(sobel_gradients(&img), Err(Error::ImageTooSmall { .. })));
    }
}
