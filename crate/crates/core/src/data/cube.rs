use std::collections::BTreeSet;

use super::{DataError, Result};
use crate::Scalar;

/// A `width × height × bands` radiance cube. Values are stored pixel-major:
/// the spectrum of `(x, y)` is contiguous at `((y · width) + x) · bands`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube<T> {
    width: usize,
    height: usize,
    bands: usize,
    data: Vec<T>,
    wavelengths: Option<Vec<f64>>,
}

impl<T: Scalar> HyperCube<T> {
    pub fn new(width: usize, height: usize, bands: usize, data: Vec<T>, wavelengths: Option<Vec<f64>>) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(DataError::Shape(format!("empty cube {width}x{height}x{bands}")));
        }
        if data.len() != width * height * bands {
            return Err(DataError::Shape(format!(
                "{width}x{height}x{bands} cube needs {} values, got {}",
                width * height * bands,
                data.len()
            )));
        }
        if let Some(w) = &wavelengths {
            if w.len() != bands {
                return Err(DataError::Shape(format!("{} wavelengths for {bands} bands", w.len())));
            }
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            let (x, y) = ((i / bands) % width, i / bands / width);
            return Err(DataError::NonFinite { x, y, band: i % bands });
        }
        Ok(Self {
            width,
            height,
            bands,
            data,
            wavelengths,
        })
    }

    /// Builds a cube from `f(x, y, band)`.
    pub fn from_fn(width: usize, height: usize, bands: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * bands);
        for y in 0..height {
            for x in 0..width {
                for b in 0..bands {
                    data.push(f(x, y, b));
                }
            }
        }
        Self::new(width, height, bands, data, None)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn wavelengths(&self) -> Option<&[f64]> {
        self.wavelengths.as_deref()
    }

    /// Raw values in pixel-major order.
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, band: usize) -> T {
        self.data[(y * self.width + x) * self.bands + band]
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[T] {
        let start = (y * self.width + x) * self.bands;
        &self.data[start..start + self.bands]
    }

    /// Removes the listed bands; the rest keep their order.
    pub fn remove_bands(&self, drop: &BTreeSet<usize>) -> Result<Self> {
        if let Some(&bad) = drop.range(self.bands..).next() {
            return Err(DataError::BandOutOfRange { band: bad, bands: self.bands });
        }
        let keep: Vec<usize> = (0..self.bands).filter(|b| !drop.contains(b)).collect();
        if keep.is_empty() {
            return Err(DataError::Shape("cannot drop every band".into()));
        }
        let mut data = Vec::with_capacity(self.width * self.height * keep.len());
        for px in self.data.chunks(self.bands) {
            data.extend(keep.iter().map(|&b| px[b]));
        }
        let wavelengths = self
            .wavelengths
            .as_ref()
            .map(|w| keep.iter().map(|&b| w[b]).collect());
        Ok(Self {
            width: self.width,
            height: self.height,
            bands: keep.len(),
            data,
            wavelengths,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> HyperCube<f64> {
        HyperCube::from_fn(3, 2, 4, |x, y, b| (100 * y + 10 * x + b) as f64).unwrap()
    }

    #[test]
    fn indexing_is_x_y_band() {
        let c = cube();
        assert_eq!(c.get(2, 1, 3), 123.0);
        assert_eq!(c.pixel(1, 0), [10.0, 11.0, 12.0, 13.0]);
    }

    #[test]
    fn remove_bands_reindexes() {
        let c = cube();
        assert_eq!(c.remove_bands(&BTreeSet::new()).unwrap(), c);
        let d = c.remove_bands(&[0].into()).unwrap();
        assert_eq!(d.bands(), 3);
        assert_eq!(d.get(2, 1, 0), c.get(2, 1, 1));
        assert!(matches!(
            c.remove_bands(&[4].into()),
            Err(DataError::BandOutOfRange { band: 4, bands: 4 })
        ));
        assert!(c.remove_bands(&(0..4).collect()).is_err());
    }

    #[test]
    fn wavelengths_follow_bands() {
        let c = HyperCube::new(1, 1, 3, vec![1.0f32, 2.0, 3.0], Some(vec![400.0, 500.0, 600.0])).unwrap();
        let d = c.remove_bands(&[1].into()).unwrap();
        assert_eq!(d.wavelengths().unwrap(), [400.0, 600.0]);
        assert_eq!(d.as_slice(), [1.0, 3.0]);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(HyperCube::new(2, 2, 2, vec![0.0f64; 7], None).is_err());
        assert!(matches!(
            HyperCube::new(2, 1, 1, vec![0.0f64, f64::NAN], None),
            Err(DataError::NonFinite { x: 1, y: 0, band: 0 })
        ));
        assert!(HyperCube::new(1, 1, 2, vec![0.0f64; 2], Some(vec![1.0])).is_err());
    }
}
