//! Loading spectra from ENVI cubes or CSV exports, with optional band
//! exclusion.

use hscs_core::error::{Error, Result};
use hscs_core::hsi::{read_envi, to_spectra, SpectraSet};
use hscs_core::numerics::Matrix;
use std::io::BufReader;
use std::path::Path;

/// Read a scene from an `.hdr` ENVI header or a spectra CSV, normalizing
/// every pixel to unit norm. `drop_bands` removes the listed band indices
/// before normalization (e.g. known corrupted water-absorption bands).
pub fn load_scene(path: &Path, drop_bands: &[usize]) -> Result<SpectraSet> {
    let is_hdr = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("hdr"));
    let raw = if is_hdr {
        let cube = read_envi(path)?;
        to_spectra(&cube, false)?
    } else {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        SpectraSet::read_csv(&mut r, false)?
    };
    let filtered = drop_band_rows(&raw, drop_bands)?;
    SpectraSet::from_matrix_with_scene(
        filtered.matrix().clone(),
        filtered.pixel_ids().to_vec(),
        true,
        format!("{}", path.display()),
    )
}

fn drop_band_rows(s: &SpectraSet, drop: &[usize]) -> Result<SpectraSet> {
    if drop.is_empty() {
        return Ok(s.clone());
    }
    let d = s.band_count();
    for &b in drop {
        if b >= d {
            return Err(Error::InvalidParameter(format!(
                "band {b} out of range for {d} bands"
            )));
        }
    }
    let keep: Vec<usize> = (0..d).filter(|b| !drop.contains(b)).collect();
    if keep.is_empty() {
        return Err(Error::InvalidParameter("all bands dropped".into()));
    }
    let data = Matrix::from_fn(keep.len(), s.pixel_count(), |i, j| s.matrix()[(keep[i], j)]);
    SpectraSet::from_matrix(data, s.pixel_ids().to_vec(), false)
}

/// Parse a comma-separated list of usize values.
pub fn parse_usize_list(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidParameter(format!("bad count '{t}': {e}")))
        })
        .collect()
}
