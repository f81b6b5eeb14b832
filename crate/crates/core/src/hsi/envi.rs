//! ENVI-style raster ingestion: ASCII header plus raw BSQ binary.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// A hyperspectral data cube in band-sequential order.
///
/// `data[b * lines * samples + l * samples + s]` is the reflectance of
/// pixel `(x = s, y = l)` in band `b`. Values are held as f64 regardless
/// of the on-disk width.
#[derive(Debug, Clone)]
pub struct HsiCube {
    pub samples: usize,
    pub lines: usize,
    pub bands: usize,
    pub wavelengths_nm: Option<Vec<f64>>,
    data: Vec<f64>,
}

impl HsiCube {
    pub fn new(
        samples: usize,
        lines: usize,
        bands: usize,
        wavelengths_nm: Option<Vec<f64>>,
        data: Vec<f64>,
    ) -> Result<Self> {
        if samples == 0 || lines == 0 || bands == 0 {
            return Err(Error::InvalidParameter(
                "cube dimensions must be positive".into(),
            ));
        }
        if data.len() != samples * lines * bands {
            return Err(Error::DimensionMismatch(format!(
                "cube data length {} != {samples} x {lines} x {bands}",
                data.len()
            )));
        }
        if let Some(w) = &wavelengths_nm {
            if w.len() != bands {
                return Err(Error::Parse(format!(
                    "wavelength list has {} entries for {bands} bands",
                    w.len()
                )));
            }
            if w.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::Parse("wavelengths not strictly increasing".into()));
            }
        }
        Ok(HsiCube {
            samples,
            lines,
            bands,
            wavelengths_nm,
            data,
        })
    }

    pub fn value(&self, band: usize, line: usize, sample: usize) -> f64 {
        self.data[band * self.lines * self.samples + line * self.samples + sample]
    }

    /// The spectrum of pixel `(x, y)` across all bands.
    pub fn pixel_spectrum(&self, x: usize, y: usize) -> Vec<f64> {
        (0..self.bands).map(|b| self.value(b, y, x)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Parse an ENVI ASCII header and load the companion binary.
///
/// Supported: `data type` 4 (float32) or 5 (float64), `interleave` bsq,
/// `byte order` 0 (little-endian, the default) or 1 (big-endian). The data
/// file is looked up as the header path minus its `.hdr` extension, then
/// with `.img`, `.dat`, or `.bsq` appended.
pub fn read_envi(header_path: &Path) -> Result<HsiCube> {
    let text = std::fs::read_to_string(header_path)?;
    let fields = parse_header_fields(&text)?;

    let get = |key: &str| -> Result<&String> {
        fields.get(key).ok_or_else(|| Error::MissingKey(key.into()))
    };
    let get_usize = |key: &str| -> Result<usize> {
        get(key)?
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad value for '{key}': {e}")))
    };

    let samples = get_usize("samples")?;
    let lines = get_usize("lines")?;
    let bands = get_usize("bands")?;

    let interleave = get("interleave")?.trim().to_ascii_lowercase();
    if interleave != "bsq" {
        return Err(Error::UnsupportedInterleave(interleave));
    }

    let data_type: u32 = get("data type")?
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad data type: {e}")))?;
    let width = match data_type {
        4 => 4usize,
        5 => 8usize,
        other => return Err(Error::UnsupportedDataType(other)),
    };

    let big_endian = match fields.get("byte order").map(|s| s.trim()) {
        None | Some("0") => false,
        Some("1") => true,
        Some(other) => return Err(Error::Parse(format!("bad byte order '{other}'"))),
    };

    let wavelengths_nm = match fields.get("wavelength") {
        Some(list) => Some(parse_float_list(list)?),
        None => None,
    };

    let data_path = locate_data_file(header_path)?;
    let expected = (samples * lines * bands * width) as u64;
    let actual = std::fs::metadata(&data_path)?.len();
    if actual != expected {
        return Err(Error::SizeMismatch { expected, actual });
    }

    let bytes = std::fs::read(&data_path)?;
    let mut data = Vec::with_capacity(samples * lines * bands);
    match (width, big_endian) {
        (4, false) => {
            for c in bytes.chunks_exact(4) {
                data.push(f32::from_le_bytes(c.try_into().unwrap()) as f64);
            }
        }
        (4, true) => {
            for c in bytes.chunks_exact(4) {
                data.push(f32::from_be_bytes(c.try_into().unwrap()) as f64);
            }
        }
        (8, false) => {
            for c in bytes.chunks_exact(8) {
                data.push(f64::from_le_bytes(c.try_into().unwrap()));
            }
        }
        (8, true) => {
            for c in bytes.chunks_exact(8) {
                data.push(f64::from_be_bytes(c.try_into().unwrap()));
            }
        }
        _ => unreachable!(),
    }

    HsiCube::new(samples, lines, bands, wavelengths_nm, data)
}

/// Write a cube as a canonical ENVI header plus little-endian BSQ binary.
///
/// `data_type` must be 4 (float32) or 5 (float64). Reading the result back
/// and writing it again reproduces both files byte for byte.
pub fn write_envi(cube: &HsiCube, header_path: &Path, data_type: u32) -> Result<()> {
    let width = match data_type {
        4 => 4usize,
        5 => 8usize,
        other => return Err(Error::UnsupportedDataType(other)),
    };

    let mut header = String::new();
    header.push_str("ENVI\n");
    header.push_str(&format!("samples = {}\n", cube.samples));
    header.push_str(&format!("lines = {}\n", cube.lines));
    header.push_str(&format!("bands = {}\n", cube.bands));
    header.push_str("header offset = 0\n");
    header.push_str("file type = ENVI Standard\n");
    header.push_str(&format!("data type = {data_type}\n"));
    header.push_str("interleave = bsq\n");
    header.push_str("byte order = 0\n");
    if let Some(w) = &cube.wavelengths_nm {
        let items: Vec<String> = w.iter().map(|x| format!("{x:?}")).collect();
        header.push_str(&format!("wavelength = {{ {} }}\n", items.join(", ")));
    }
    std::fs::write(header_path, header)?;

    let data_path = strip_hdr(header_path);
    let mut f = std::io::BufWriter::new(std::fs::File::create(&data_path)?);
    match width {
        4 => {
            for &x in cube.data() {
                f.write_all(&(x as f32).to_le_bytes())?;
            }
        }
        8 => {
            for &x in cube.data() {
                f.write_all(&x.to_le_bytes())?;
            }
        }
        _ => unreachable!(),
    }
    f.flush()?;
    Ok(())
}

fn strip_hdr(header_path: &Path) -> PathBuf {
    if header_path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("hdr"))
    {
        header_path.with_extension("")
    } else {
        header_path.with_extension("img")
    }
}

fn locate_data_file(header_path: &Path) -> Result<PathBuf> {
    let base = strip_hdr(header_path);
    let mut candidates = vec![base.clone()];
    for ext in ["img", "dat", "bsq"] {
        candidates.push(base.with_extension(ext));
    }
    candidates
        .into_iter()
        .find(|p| p.is_file())
        .ok_or_else(|| Error::MissingDataFile(header_path.display().to_string()))
}

/// Split header text into lowercase key / raw value pairs. Brace-enclosed
/// values may span lines.
fn parse_header_fields(text: &str) -> Result<HashMap<String, String>> {
    let mut fields = HashMap::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.next() {
        let line = line.trim();
        if line.is_empty() || line.eq_ignore_ascii_case("envi") || line.starts_with(';') {
            continue;
        }
        let Some(eq) = line.find('=') else { continue };
        let key = line[..eq].trim().to_ascii_lowercase();
        let mut value = line[eq + 1..].trim().to_string();
        if value.starts_with('{') && !value.contains('}') {
            for cont in lines.by_ref() {
                value.push(' ');
                value.push_str(cont.trim());
                if cont.contains('}') {
                    break;
                }
            }
            if !value.contains('}') {
                return Err(Error::Parse(format!("unterminated brace list for '{key}'")));
            }
        }
        fields.insert(key, value);
    }
    Ok(fields)
}

fn parse_float_list(raw: &str) -> Result<Vec<f64>> {
    let inner = raw
        .trim()
        .trim_start_matches('{')
        .trim_end_matches('}')
        .trim();
    inner
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad float '{}': {e}", t.trim())))
        })
        .collect()
}
