use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{PipelineError, Result};
use crate::data::{save_indexed_png, GroundTruth};

/// Leading bytes of a label raster file.
pub const SEGM_MAGIC: &[u8; 4] = b"SEGM";
/// Magic, width, height and a reserved word.
pub const SEGM_HEADER_LEN: usize = 16;

const BUNDLED_PALETTE: &str = include_str!("../../data/palette.toml");

/// Label colors. Entry 0 paints the background; label `l > 0` takes entry
/// `1 + (l - 1) mod (len - 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Palette {
    pub colors: Vec<[u8; 3]>,
}

impl Palette {
    pub fn parse(text: &str) -> Result<Self> {
        let p: Self = toml::from_str(text)?;
        if p.colors.len() < 2 {
            return Err(PipelineError::Raster("palette needs a background and at least one color".into()));
        }
        Ok(p)
    }

    /// The fixed 8-color table shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_PALETTE).expect("bundled palette parses")
    }

    pub fn color(&self, label: u8) -> [u8; 3] {
        match label {
            0 => self.colors[0],
            l => self.colors[1 + (l as usize - 1) % (self.colors.len() - 1)],
        }
    }
}

/// Per-pixel segment ids, row-major. Label 0 marks masked background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u8>,
}

impl SegmentationMap {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(PipelineError::Raster(format!(
                "{width}x{height} map needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(Self { width, height, labels })
    }

    /// Builds a map from wide labels, which must fit in a byte.
    pub fn from_labels(width: usize, height: usize, labels: &[u32]) -> Result<Self> {
        let narrow = labels
            .iter()
            .map(|&l| {
                u8::try_from(l).map_err(|_| {
                    PipelineError::Raster(format!("label {l} does not fit the 8-bit raster (at most 255 segments)"))
                })
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(width, height, narrow)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SEGM_HEADER_LEN + self.labels.len());
        out.extend_from_slice(SEGM_MAGIC);
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        out.extend_from_slice(&self.labels);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < SEGM_HEADER_LEN || &bytes[..4] != SEGM_MAGIC {
            return Err(PipelineError::Raster("not a SEGM label raster".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
        let (w, h) = (word(4), word(8));
        let body = &bytes[SEGM_HEADER_LEN..];
        if body.len() != w * h {
            return Err(PipelineError::Raster(format!(
                "{w}x{h} raster needs {} label bytes, file has {}",
                w * h,
                body.len()
            )));
        }
        Self::new(w, h, body.to_vec())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Writes an indexed PNG colored by `palette`.
    pub fn render_png(&self, path: &Path, palette: &Palette) -> Result<()> {
        let top = self.labels.iter().copied().max().unwrap_or(0);
        let table: Vec<[u8; 3]> = (0..=top).map(|l| palette.color(l)).collect();
        let wide: Vec<u32> = self.labels.iter().map(|&l| l as u32).collect();
        save_indexed_png(path, self.width, self.height, &wide, &table)?;
        Ok(())
    }

    /// Sorted distinct non-background labels.
    pub fn segments(&self) -> Vec<u8> {
        let mut s: Vec<u8> = self.labels.iter().copied().filter(|&l| l != 0).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Checks that the labeled pixels are exactly the foreground of `gt`.
    /// Disjointness is structural: each pixel carries one label.
    pub fn check_partition(&self, gt: &GroundTruth) -> Result<()> {
        if (self.width, self.height) != (gt.width(), gt.height()) {
            return Err(PipelineError::Raster(format!(
                "map is {}x{} but ground truth is {}x{}",
                self.width,
                self.height,
                gt.width(),
                gt.height()
            )));
        }
        let bad = self.labels.iter().zip(gt.labels()).position(|(&m, &g)| (m == 0) != (g == 0));
        match bad {
            Some(i) => Err(PipelineError::Raster(format!(
                "pixel ({}, {}) is {} in the map but {} in the ground truth",
                i % self.width,
                i / self.width,
                if self.labels[i] == 0 { "background" } else { "labeled" },
                if gt.labels()[i] == 0 { "background" } else { "foreground" },
            ))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::load_ground_truth;

    #[test]
    fn header_layout() {
        let m = SegmentationMap::new(3, 1, vec![0, 2, 9]).unwrap();
        let b = m.to_bytes();
        assert_eq!(&b[..4], b"SEGM");
        assert_eq!(b[4..8], [3, 0, 0, 0]);
        assert_eq!(b[8..12], [1, 0, 0, 0]);
        assert_eq!(b[12..16], [0, 0, 0, 0]);
        assert_eq!(b[16..], [0, 2, 9]);
        assert_eq!(SegmentationMap::from_bytes(&b).unwrap(), m);
        assert!(SegmentationMap::from_bytes(&b[..18]).is_err());
        assert!(SegmentationMap::from_bytes(b"SEGN").is_err());
    }

    #[test]
    fn wide_labels_are_rejected() {
        assert!(SegmentationMap::from_labels(2, 1, &[0, 255]).is_ok());
        assert!(SegmentationMap::from_labels(2, 1, &[0, 256]).is_err());
    }

    #[test]
    fn palette_cycles_after_seven() {
        let p = Palette::bundled();
        assert_eq!(p.colors.len(), 8);
        assert_eq!(p.color(0), [0, 0, 0]);
        assert_eq!(p.color(8), p.color(1));
        assert_eq!(p.color(14), p.color(7));
        assert!(Palette::parse("colors = [[0, 0, 0]]").is_err());
    }

    #[test]
    fn png_indices_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = SegmentationMap::new(2, 2, vec![0, 1, 12, 0]).unwrap();
        let path = dir.path().join("m.png");
        m.render_png(&path, &Palette::bundled()).unwrap();
        assert_eq!(load_ground_truth(&path).unwrap().labels(), [0, 1, 12, 0]);
    }

    #[test]
    fn partition_check() {
        let gt = GroundTruth::new(2, 2, vec![0, 3, 1, 0]).unwrap();
        SegmentationMap::new(2, 2, vec![0, 1, 1, 0]).unwrap().check_partition(&gt).unwrap();
        let err = SegmentationMap::new(2, 2, vec![1, 1, 1, 0]).unwrap().check_partition(&gt).unwrap_err();
        assert!(err.to_string().contains("(0, 0)"), "{err}");
        assert!(SegmentationMap::new(2, 2, vec![0, 1, 0, 0]).unwrap().check_partition(&gt).is_err());
    }
}
