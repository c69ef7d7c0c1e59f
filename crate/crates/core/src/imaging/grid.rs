//! Raster images with a missing-pixel mask, and their file I/O.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};

use crate::error::{Error, Result};

/// Sample depth used when writing an image back to disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitDepth {
    #[default]
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max_value(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

/// `height × width × channels` samples in row-major, interleaved order and a
/// mask with `true` marking missing pixels.
///
/// Samples decoded from files lie in `[0, 1]`; working copies in another
/// color space may leave that range and are clamped when written.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<f64>,
    mask: Vec<bool>,
    depth: BitDepth,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("image must be non-empty, got {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!("expected 1 or 3 channels, got {channels}")));
        }
        let n = width * height;
        if pixels.len() != n * channels {
            return Err(Error::DimensionMismatch {
                expected: n * channels,
                found: pixels.len(),
            });
        }
        if mask.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mask.len(),
            });
        }
        if let Some(at) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidImage(format!("sample {at} is not finite")));
        }
        if mask.iter().all(|&m| m) {
            return Err(Error::NoKnownPixels);
        }
        Ok(ImageGrid {
            width,
            height,
            channels,
            pixels,
            mask,
            depth: BitDepth::Eight,
        })
    }

    /// An image with no missing pixels.
    pub fn known(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        ImageGrid::new(width, height, channels, pixels, vec![false; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn depth(&self) -> BitDepth {
        self.depth
    }

    pub fn with_depth(mut self, depth: BitDepth) -> Self {
        self.depth = depth;
        self
    }

    /// Row-major pixel index of `(x, y)`.
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn coords(&self, i: usize) -> (usize, usize) {
        (i % self.width, i / self.width)
    }

    pub fn pixel(&self, i: usize) -> &[f64] {
        &self.pixels[i * self.channels..(i + 1) * self.channels]
    }

    pub fn pixel_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.pixels[i * self.channels..(i + 1) * self.channels]
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn missing_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Same samples under a different mask.
    pub fn with_mask(&self, mask: Vec<bool>) -> Result<Self> {
        let depth = self.depth;
        Ok(ImageGrid::new(self.width, self.height, self.channels, self.pixels.clone(), mask)?.with_depth(depth))
    }

    /// Same geometry and mask with new samples.
    pub fn with_pixels(&self, pixels: Vec<f64>) -> Result<Self> {
        let depth = self.depth;
        Ok(ImageGrid::new(self.width, self.height, self.channels, pixels, self.mask.clone())?.with_depth(depth))
    }
}

fn read_err(path: &Path, message: impl Into<String>) -> Error {
    Error::ImageRead {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|e| read_err(path, e.to_string()))
}

/// Reads an 8- or 16-bit grayscale or RGB raster file with an empty mask.
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, depth, pixels): (usize, BitDepth, Vec<f64>) = match img {
        DynamicImage::ImageLuma8(b) => (1, BitDepth::Eight, b.into_raw().into_iter().map(|v| v as f64 / 255.0).collect()),
        DynamicImage::ImageRgb8(b) => (3, BitDepth::Eight, b.into_raw().into_iter().map(|v| v as f64 / 255.0).collect()),
        DynamicImage::ImageLuma16(b) => (1, BitDepth::Sixteen, b.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect()),
        DynamicImage::ImageRgb16(b) => (3, BitDepth::Sixteen, b.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect()),
        other => {
            return Err(read_err(
                path,
                format!("unsupported color type {:?}; expected 8/16-bit grayscale or RGB", other.color()),
            ))
        }
    };
    Ok(ImageGrid::known(w, h, channels, pixels)?.with_depth(depth))
}

/// Reads an 8-bit grayscale mask: 255 marks a missing pixel, 0 a known one.
pub fn read_mask(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<bool>)> {
    let path = path.as_ref();
    let DynamicImage::ImageLuma8(buf) = open(path)? else {
        return Err(read_err(path, "mask must be an 8-bit grayscale image"));
    };
    let (w, h) = buf.dimensions();
    let mut mask = Vec::with_capacity((w * h) as usize);
    for (x, y, p) in buf.enumerate_pixels() {
        mask.push(match p.0[0] {
            0 => false,
            255 => true,
            value => {
                return Err(Error::MaskValue {
                    x,
                    y,
                    value: value as u16,
                })
            }
        });
    }
    Ok((w as usize, h as usize, mask))
}

/// Reads an image and its mask, checking that their sizes agree.
pub fn read_masked(image: impl AsRef<Path>, mask: impl AsRef<Path>) -> Result<ImageGrid> {
    let img = read_image(image)?;
    let (mw, mh, mask) = read_mask(mask)?;
    if (mw, mh) != (img.width(), img.height()) {
        return Err(Error::MaskSize {
            width: img.width() as u32,
            height: img.height() as u32,
            mask_width: mw as u32,
            mask_height: mh as u32,
        });
    }
    img.with_mask(mask)
}

fn quantize<T: TryFrom<u32>>(v: f64, max: f64) -> T
where
    T::Error: std::fmt::Debug,
{
    T::try_from((v.clamp(0.0, 1.0) * max).round() as u32).expect("sample within range")
}

/// Writes the samples at the image's bit depth; the format follows the
/// file extension.
pub fn write_image(path: impl AsRef<Path>, img: &ImageGrid) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let max = img.depth().max_value();
    let werr = |e: image::ImageError| Error::ImageWrite {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    match (img.depth(), img.channels()) {
        (BitDepth::Eight, c) => {
            let raw: Vec<u8> = img.pixels().iter().map(|&v| quantize(v, max)).collect();
            if c == 1 {
                ImageBuffer::<Luma<u8>, _>::from_raw(w, h, raw).expect("buffer size").save(path).map_err(werr)
            } else {
                ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, raw).expect("buffer size").save(path).map_err(werr)
            }
        }
        (BitDepth::Sixteen, c) => {
            let raw: Vec<u16> = img.pixels().iter().map(|&v| quantize(v, max)).collect();
            if c == 1 {
                ImageBuffer::<Luma<u16>, _>::from_raw(w, h, raw).expect("buffer size").save(path).map_err(werr)
            } else {
                ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, raw).expect("buffer size").save(path).map_err(werr)
            }
        }
    }
}

/// Writes `mask` as an 8-bit grayscale file (255 = missing).
pub fn write_mask(path: impl AsRef<Path>, width: usize, height: usize, mask: &[bool]) -> Result<()> {
    let path = path.as_ref();
    if mask.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            found: mask.len(),
        });
    }
    let raw: Vec<u8> = mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
    ImageBuffer::<Luma<u8>, _>::from_raw(width as u32, height as u32, raw)
        .expect("buffer size")
        .save(path)
        .map_err(|e| Error::ImageWrite {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks_shapes() {
        assert!(ImageGrid::known(2, 2, 2, vec![0.0; 8]).is_err());
        assert!(ImageGrid::known(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(matches!(
            ImageGrid::new(1, 2, 1, vec![0.0; 2], vec![true, true]),
            Err(Error::NoKnownPixels)
        ));
        let img = ImageGrid::known(3, 2, 3, (0..18).map(|v| v as f64 / 17.0).collect()).unwrap();
        assert_eq!(img.index(2, 1), 5);
        assert_eq!(img.coords(5), (2, 1));
        assert_eq!(img.pixel(1), &[3.0 / 17.0, 4.0 / 17.0, 5.0 / 17.0]);
    }

    #[test]
    fn eight_bit_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        let img = ImageGrid::known(4, 3, 3, (0..36).map(|v| (v * 7 % 256) as f64 / 255.0).collect()).unwrap();
        write_image(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn sixteen_bit_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["g.png", "g.pgm"] {
            let path = dir.path().join(name);
            let img = ImageGrid::known(5, 2, 1, (0..10).map(|v| (v * 6007) as f64 / 65535.0).collect())
                .unwrap()
                .with_depth(BitDepth::Sixteen);
            write_image(&path, &img).unwrap();
            assert_eq!(read_image(&path).unwrap(), img);
        }
    }

    #[test]
    fn mask_values_are_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        ImageBuffer::<Luma<u8>, _>::from_raw(2, 1, vec![0u8, 7]).unwrap().save(&path).unwrap();
        assert!(matches!(read_mask(&path), Err(Error::MaskValue { x: 1, y: 0, value: 7 })));
        write_mask(&path, 2, 1, &[false, true]).unwrap();
        assert_eq!(read_mask(&path).unwrap(), (2, 1, vec![false, true]));
    }
}
