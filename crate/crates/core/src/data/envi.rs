use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{DataError, HyperCube, Result};
use crate::Scalar;

/// Sample layout of an ENVI payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interleave {
    /// band sequential: `[band][line][sample]`
    Bsq,
    /// band interleaved by line: `[line][band][sample]`
    Bil,
    /// band interleaved by pixel: `[line][sample][band]`
    Bip,
}

impl FromStr for Interleave {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bsq" => Ok(Self::Bsq),
            "bil" => Ok(Self::Bil),
            "bip" => Ok(Self::Bip),
            other => Err(DataError::Header(format!("unknown interleave `{other}`"))),
        }
    }
}

impl fmt::Display for Interleave {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bsq => "bsq",
            Self::Bil => "bil",
            Self::Bip => "bip",
        })
    }
}

/// ENVI `data type` codes this reader understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnviType {
    U8,
    I16,
    I32,
    F32,
    F64,
    U16,
}

impl EnviType {
    pub fn from_code(code: u32) -> Result<Self> {
        Ok(match code {
            1 => Self::U8,
            2 => Self::I16,
            3 => Self::I32,
            4 => Self::F32,
            5 => Self::F64,
            12 => Self::U16,
            other => return Err(DataError::UnsupportedType(other)),
        })
    }

    pub fn code(self) -> u32 {
        match self {
            Self::U8 => 1,
            Self::I16 => 2,
            Self::I32 => 3,
            Self::F32 => 4,
            Self::F64 => 5,
            Self::U16 => 12,
        }
    }

    pub fn size(self) -> usize {
        match self {
            Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn decode(self, b: &[u8], big_endian: bool) -> f64 {
        macro_rules! num {
            ($t:ty) => {{
                let a = b.try_into().expect("slice sized by type");
                (if big_endian { <$t>::from_be_bytes(a) } else { <$t>::from_le_bytes(a) }) as f64
            }};
        }
        match self {
            Self::U8 => b[0] as f64,
            Self::I16 => num!(i16),
            Self::I32 => num!(i32),
            Self::F32 => num!(f32),
            Self::F64 => num!(f64),
            Self::U16 => num!(u16),
        }
    }
}

/// The fields of an ENVI header this crate uses.
#[derive(Debug, Clone, PartialEq)]
pub struct EnviHeader {
    pub samples: usize,
    pub lines: usize,
    pub bands: usize,
    pub header_offset: usize,
    pub data_type: EnviType,
    pub interleave: Interleave,
    pub big_endian: bool,
    pub wavelengths: Option<Vec<f64>>,
}

/// Splits a header into lowercase keys and raw values; `{…}` values may
/// span lines.
fn header_fields(text: &str) -> Result<BTreeMap<String, String>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(first) if first.trim() == "ENVI" => {}
        _ => return Err(DataError::Header("header does not start with `ENVI`".into())),
    }
    let mut fields = BTreeMap::new();
    let mut pending: Option<(String, String)> = None;
    for line in lines {
        if let Some((key, mut value)) = pending.take() {
            value.push(' ');
            value.push_str(line.trim());
            if value.contains('}') {
                fields.insert(key, value);
            } else {
                pending = Some((key, value));
            }
            continue;
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(DataError::Header(format!("malformed header line `{line}`")));
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if value.starts_with('{') && !value.contains('}') {
            pending = Some((key, value));
        } else {
            fields.insert(key, value);
        }
    }
    if let Some((key, _)) = pending {
        return Err(DataError::Header(format!("unterminated `{{` in `{key}`")));
    }
    Ok(fields)
}

fn parse_field<V: FromStr>(fields: &BTreeMap<String, String>, key: &str) -> Result<Option<V>> {
    fields
        .get(key)
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| DataError::Header(format!("cannot parse `{key} = {v}`")))
        })
        .transpose()
}

fn required<V: FromStr>(fields: &BTreeMap<String, String>, key: &str) -> Result<V> {
    parse_field(fields, key)?.ok_or_else(|| DataError::Header(format!("missing `{key}`")))
}

impl EnviHeader {
    pub fn parse(text: &str) -> Result<Self> {
        let fields = header_fields(text)?;
        let samples = required(&fields, "samples")?;
        let lines = required(&fields, "lines")?;
        let bands = required(&fields, "bands")?;
        if samples == 0 || lines == 0 || bands == 0 {
            return Err(DataError::Header(format!("zero dimension in {samples}x{lines}x{bands}")));
        }
        let data_type = EnviType::from_code(required(&fields, "data type")?)?;
        let interleave = fields
            .get("interleave")
            .ok_or_else(|| DataError::Header("missing `interleave`".into()))?
            .parse()?;
        let big_endian = match parse_field::<u8>(&fields, "byte order")?.unwrap_or(0) {
            0 => false,
            1 => true,
            other => return Err(DataError::Header(format!("byte order must be 0 or 1, got {other}"))),
        };
        let wavelengths = match fields.get("wavelength") {
            None => None,
            Some(v) => {
                let list: std::result::Result<Vec<f64>, _> = v
                    .trim_matches(|c: char| c == '{' || c == '}' || c.is_whitespace())
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect();
                let list = list.map_err(|_| DataError::Header("unparseable wavelength list".into()))?;
                if list.len() != bands {
                    return Err(DataError::Header(format!(
                        "{} wavelengths listed for {bands} bands",
                        list.len()
                    )));
                }
                Some(list)
            }
        };
        Ok(Self {
            samples,
            lines,
            bands,
            header_offset: parse_field(&fields, "header offset")?.unwrap_or(0),
            data_type,
            interleave,
            big_endian,
            wavelengths,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "ENVI\nsamples = {}\nlines = {}\nbands = {}\nheader offset = {}\nfile type = ENVI Standard\ndata type = {}\ninterleave = {}\nbyte order = {}\n",
            self.samples,
            self.lines,
            self.bands,
            self.header_offset,
            self.data_type.code(),
            self.interleave,
            u8::from(self.big_endian)
        );
        if let Some(w) = &self.wavelengths {
            let list: Vec<String> = w.iter().map(f64::to_string).collect();
            s.push_str(&format!("wavelength = {{{}}}\n", list.join(", ")));
        }
        s
    }

    fn value_count(&self) -> usize {
        self.samples * self.lines * self.bands
    }

    /// Position in the payload of the value at `(x, y, band)`.
    fn file_index(&self, x: usize, y: usize, b: usize) -> usize {
        let (w, h, nb) = (self.samples, self.lines, self.bands);
        match self.interleave {
            Interleave::Bsq => (b * h + y) * w + x,
            Interleave::Bil => (y * nb + b) * w + x,
            Interleave::Bip => (y * w + x) * nb + b,
        }
    }
}

/// Candidate payload paths for a header: the header path without its
/// extension, then with the usual raster extensions.
fn payload_candidates(header_path: &Path) -> Vec<PathBuf> {
    let stem = header_path.with_extension("");
    let mut out = vec![stem.clone()];
    for ext in ["img", "raw", "dat", "float", "bsq", "bil", "bip"] {
        out.push(stem.with_extension(ext));
    }
    out
}

pub fn find_payload(header_path: &Path) -> Result<PathBuf> {
    payload_candidates(header_path)
        .into_iter()
        .find(|p| p != header_path && p.is_file())
        .ok_or_else(|| DataError::MissingPayload(header_path.to_path_buf()))
}

/// Decodes a payload into pixel-major `f64` values.
pub fn decode_payload(header: &EnviHeader, bytes: &[u8]) -> Result<Vec<f64>> {
    let size = header.data_type.size();
    let needed = header.header_offset + header.value_count() * size;
    if bytes.len() < needed {
        return Err(DataError::Truncated {
            expected: needed,
            got: bytes.len(),
        });
    }
    if bytes.len() > needed {
        log::warn!("ENVI payload has {} trailing bytes", bytes.len() - needed);
    }
    let body = &bytes[header.header_offset..needed];
    let mut out = Vec::with_capacity(header.value_count());
    for y in 0..header.lines {
        for x in 0..header.samples {
            for b in 0..header.bands {
                let at = header.file_index(x, y, b) * size;
                out.push(header.data_type.decode(&body[at..at + size], header.big_endian));
            }
        }
    }
    Ok(out)
}

/// Reads an ENVI header and its payload into a cube.
pub fn load_envi<T: Scalar>(header_path: &Path) -> Result<HyperCube<T>> {
    let header = EnviHeader::parse(&fs::read_to_string(header_path)?)?;
    let payload = find_payload(header_path)?;
    let values = decode_payload(&header, &fs::read(&payload)?)?;
    HyperCube::new(
        header.samples,
        header.lines,
        header.bands,
        values.into_iter().map(T::lit).collect(),
        header.wavelengths,
    )
}

/// Writes `cube` as a little-endian float payload next to `header_path`
/// (same path with the `img` extension). Returns the payload path.
pub fn save_envi<T: Scalar>(header_path: &Path, cube: &HyperCube<T>, interleave: Interleave, data_type: EnviType) -> Result<PathBuf> {
    if !matches!(data_type, EnviType::F32 | EnviType::F64) {
        return Err(DataError::UnsupportedType(data_type.code()));
    }
    let header = EnviHeader {
        samples: cube.width(),
        lines: cube.height(),
        bands: cube.bands(),
        header_offset: 0,
        data_type,
        interleave,
        big_endian: false,
        wavelengths: cube.wavelengths().map(<[f64]>::to_vec),
    };
    let mut order = vec![(0, 0, 0); header.value_count()];
    for y in 0..header.lines {
        for x in 0..header.samples {
            for b in 0..header.bands {
                order[header.file_index(x, y, b)] = (x, y, b);
            }
        }
    }
    let mut bytes = Vec::with_capacity(header.value_count() * data_type.size());
    for (x, y, b) in order {
        let v = cube.get(x, y, b).as_f64();
        match data_type {
            EnviType::F32 => bytes.extend_from_slice(&(v as f32).to_le_bytes()),
            _ => bytes.extend_from_slice(&v.to_le_bytes()),
        }
    }
    let payload = header_path.with_extension("img");
    if let Some(parent) = header_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(header_path, header.to_text())?;
    fs::write(&payload, bytes)?;
    Ok(payload)
}
