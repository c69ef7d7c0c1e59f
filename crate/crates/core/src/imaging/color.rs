//! Scaled RGB/YUV conversion.

use crate::error::{Error, Result};
use crate::imaging::grid::ImageGrid;

/// RGB to YUV, row-wise.
pub const YUV_MATRIX: [[f64; 3]; 3] = [
    [0.299, 0.587, 0.114],
    [-0.14713, -0.28886, 0.436],
    [0.615, -0.51498, -0.10001],
];

type Mat3 = [[f64; 3]; 3];

fn mul(a: &Mat3, x: &[f64]) -> [f64; 3] {
    [0, 1, 2].map(|i| a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2])
}

/// Inverse by cofactors followed by one step of Newton refinement.
fn invert(a: &Mat3) -> Mat3 {
    let c = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]
    };
    let det = a[0][0] * c(0, 0) + a[0][1] * c(0, 1) + a[0][2] * c(0, 2);
    let x: Mat3 = [0, 1, 2].map(|i| [0, 1, 2].map(|j| c(j, i) / det));
    // X ← X(2I − AX)
    let ax: Mat3 = [0, 1, 2].map(|i| [0, 1, 2].map(|j| (0..3).map(|k| a[i][k] * x[k][j]).sum()));
    let r: Mat3 = [0, 1, 2].map(|i| [0, 1, 2].map(|j| if i == j { 2.0 } else { 0.0 } - ax[i][j]));
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| (0..3).map(|k| x[i][k] * r[k][j]).sum()))
}

/// `y = scale · A · rgb` with its exact inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorTransform {
    matrix: Mat3,
    inverse: Mat3,
    scale: f64,
}

impl ColorTransform {
    pub fn yuv(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("YUV scale must be positive, got {scale}")));
        }
        Ok(ColorTransform {
            matrix: YUV_MATRIX,
            inverse: invert(&YUV_MATRIX),
            scale,
        })
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.matrix
    }

    pub fn inverse(&self) -> &Mat3 {
        &self.inverse
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn forward(&self, rgb: &[f64]) -> [f64; 3] {
        mul(&self.matrix, rgb).map(|v| v * self.scale)
    }

    pub fn backward(&self, yuv: &[f64]) -> [f64; 3] {
        let y = [yuv[0] / self.scale, yuv[1] / self.scale, yuv[2] / self.scale];
        mul(&self.inverse, &y)
    }

    fn apply(&self, img: &ImageGrid, f: impl Fn(&[f64]) -> [f64; 3]) -> Result<ImageGrid> {
        if img.channels() != 3 {
            return Err(Error::InvalidImage(format!(
                "color conversion needs 3 channels, got {}",
                img.channels()
            )));
        }
        let pixels = img.pixels().chunks_exact(3).flat_map(f).collect();
        img.with_pixels(pixels)
    }
}

pub fn rgb_to_yuv(img: &ImageGrid, scale: f64) -> Result<ImageGrid> {
    let t = ColorTransform::yuv(scale)?;
    t.apply(img, |p| t.forward(p))
}

pub fn yuv_to_rgb(img: &ImageGrid, scale: f64) -> Result<ImageGrid> {
    let t = ColorTransform::yuv(scale)?;
    t.apply(img, |p| t.backward(p))
}
