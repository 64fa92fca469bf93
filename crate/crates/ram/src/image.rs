//! Row-major grayscale images with intensities in `[0, 1]`.

/// A grayscale raster. `data[y * width + x]` is the pixel at column `x`,
/// row `y`, with `(0, 0)` the top-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn zeros(width: usize, height: usize) -> Self {
        Image {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    /// Builds an image from row-major data. Panics if the length is wrong;
    /// callers construct these from data they sized themselves.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            width * height,
            "image data length {} does not match {}x{}",
            data.len(),
            width,
            height
        );
        Image {
            width,
            height,
            data,
        }
    }

    /// Builds an image from bytes, scaling intensities to `[0, 1]`.
    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Self {
        let data = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        Image::from_vec(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Pixel lookup with signed coordinates; anything outside the raster
    /// reads as zero.
    #[inline]
    pub fn get_or_zero(&self, x: i64, y: i64) -> f64 {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            0.0
        } else {
            self.data[y as usize * self.width + x as usize]
        }
    }

    pub fn pixel_sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_bounds_reads_zero() {
        let mut img = Image::zeros(2, 2);
        img.set(1, 1, 0.5);
        assert_eq!(img.get_or_zero(1, 1), 0.5);
        assert_eq!(img.get_or_zero(-1, 0), 0.0);
        assert_eq!(img.get_or_zero(2, 0), 0.0);
        assert_eq!(img.get_or_zero(0, 2), 0.0);
    }

    #[test]
    fn byte_images_are_normalized() {
        let img = Image::from_bytes(2, 1, &[0, 255]);
        assert_eq!(img.get(0, 0), 0.0);
        assert_eq!(img.get(1, 0), 1.0);
    }
}
