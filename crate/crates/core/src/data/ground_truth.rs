use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use super::envi::{decode_payload, find_payload, EnviHeader};
use super::{DataError, Result};

/// Per-pixel class ids, row-major (`y · width + x`). Class 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl GroundTruth {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(DataError::Shape(format!(
                "{width}x{height} ground truth needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(Self { width, height, labels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Sorted distinct non-background ids.
    pub fn classes(&self) -> Vec<u32> {
        let mut c: Vec<u32> = self.labels.iter().copied().filter(|&l| l != 0).collect();
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Loads a ground-truth raster from a PNG (palette index or gray level =
/// class id) or a single-band ENVI header (`.hdr`).
pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => load_png(path),
        Some("hdr") => load_envi_labels(path),
        _ => Err(DataError::Format(format!(
            "{}: ground truth must be a .png or an ENVI .hdr",
            path.display()
        ))),
    }
}

fn load_envi_labels(path: &Path) -> Result<GroundTruth> {
    let header = EnviHeader::parse(&fs::read_to_string(path)?)?;
    if header.bands != 1 {
        return Err(DataError::Format(format!("ground truth has {} bands, expected 1", header.bands)));
    }
    let values = decode_payload(&header, &fs::read(find_payload(path)?)?)?;
    let labels = values
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(DataError::Format(format!("ground-truth value {v} is not a class id")))
            }
        })
        .collect::<Result<_>>()?;
    GroundTruth::new(header.samples, header.lines, labels)
}

fn load_png(path: &Path) -> Result<GroundTruth> {
    let decoder = png::Decoder::new(BufReader::new(File::open(path)?));
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or_else(|| DataError::Format("PNG too large".into()))?];
    let frame = reader.next_frame(&mut buf)?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let depth = frame.bit_depth as usize;
    let labels = match frame.color_type {
        png::ColorType::Indexed | png::ColorType::Grayscale if depth <= 8 => {
            let per_byte = 8 / depth;
            let mask = ((1u16 << depth) - 1) as u8;
            let mut out = Vec::with_capacity(w * h);
            for row in buf.chunks(frame.line_size).take(h) {
                for x in 0..w {
                    let byte = row[x / per_byte];
                    let shift = 8 - depth * (x % per_byte + 1);
                    out.push(((byte >> shift) & mask) as u32);
                }
            }
            out
        }
        png::ColorType::Grayscale => buf
            .chunks(frame.line_size)
            .take(h)
            .flat_map(|row| row[..2 * w].chunks(2).map(|p| u16::from_be_bytes([p[0], p[1]]) as u32))
            .collect(),
        other => {
            return Err(DataError::Format(format!(
                "ground-truth PNG must be indexed or grayscale, got {other:?}"
            )))
        }
    };
    GroundTruth::new(w, h, labels)
}

/// Writes labels as an 8-bit indexed PNG with the given RGB palette
/// (one entry per class id; ids beyond the palette are an error).
pub fn save_indexed_png(path: &Path, width: usize, height: usize, labels: &[u32], palette: &[[u8; 3]]) -> Result<()> {
    if labels.len() != width * height {
        return Err(DataError::Shape(format!("{} labels for {width}x{height}", labels.len())));
    }
    if palette.is_empty() || palette.len() > 256 {
        return Err(DataError::Format(format!("palette must have 1..=256 entries, got {}", palette.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= palette.len()) {
        return Err(DataError::Format(format!("label {bad} has no palette entry")));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let file = std::io::BufWriter::new(File::create(path)?);
    let mut enc = png::Encoder::new(file, width as u32, height as u32);
    enc.set_color(png::ColorType::Indexed);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_palette(palette.iter().flatten().copied().collect::<Vec<u8>>());
    let mut writer = enc.write_header()?;
    let bytes: Vec<u8> = labels.iter().map(|&l| l as u8).collect();
    writer.write_image_data(&bytes)?;
    writer.finish()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("gt.png");
        let labels = vec![0, 1, 2, 0, 7, 3];
        let palette: Vec<[u8; 3]> = (0..8).map(|i| [i * 30, 0, 255 - i * 30]).collect();
        save_indexed_png(&p, 3, 2, &labels, &palette).unwrap();
        let gt = load_ground_truth(&p).unwrap();
        assert_eq!((gt.width(), gt.height()), (3, 2));
        assert_eq!(gt.labels(), labels);
        assert_eq!(gt.get(1, 1), 7);
        assert_eq!(gt.classes(), [1, 2, 3, 7]);
    }

    #[test]
    fn packed_low_depth_png() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("gt2.png");
        let file = File::create(&p).unwrap();
        let mut enc = png::Encoder::new(file, 5, 1);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Two);
        let mut w = enc.write_header().unwrap();
        // 0,1,2,3 | 2 packed MSB first
        w.write_image_data(&[0b00_01_10_11, 0b10_00_00_00]).unwrap();
        w.finish().unwrap();
        assert_eq!(load_ground_truth(&p).unwrap().labels(), [0, 1, 2, 3, 2]);
    }

    #[test]
    fn envi_labels() {
        let dir = tempfile::tempdir().unwrap();
        let hdr = dir.path().join("gt.hdr");
        fs::write(&hdr, "ENVI\nsamples = 2\nlines = 2\nbands = 1\ndata type = 1\ninterleave = bsq\n").unwrap();
        fs::write(dir.path().join("gt.img"), [0u8, 1, 2, 0]).unwrap();
        let gt = load_ground_truth(&hdr).unwrap();
        assert_eq!(gt.labels(), [0, 1, 2, 0]);

        fs::write(&hdr, "ENVI\nsamples = 2\nlines = 1\nbands = 1\ndata type = 4\ninterleave = bsq\n").unwrap();
        let mut bytes = 1.5f32.to_le_bytes().to_vec();
        bytes.extend_from_slice(&2.0f32.to_le_bytes());
        fs::write(dir.path().join("gt.img"), bytes).unwrap();
        assert!(matches!(load_ground_truth(&hdr), Err(DataError::Format(_))));
    }

    #[test]
    fn palette_must_cover_labels() {
        let dir = tempfile::tempdir().unwrap();
        assert!(save_indexed_png(&dir.path().join("x.png"), 1, 1, &[3], &[[0, 0, 0]]).is_err());
        assert!(load_ground_truth(&dir.path().join("x.tif")).is_err());
    }
}
