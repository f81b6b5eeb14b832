//! Per-pixel spectra as matrix columns, and train/test splitting.

use super::envi::HsiCube;
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::seeded_rng;
use rand::seq::SliceRandom;
use std::io::{BufRead, Write};

/// Original spatial position of a spectrum, `(x, y)`.
pub type PixelId = (u32, u32);

/// A column-major collection of spectra: one pixel per column.
///
/// The `scene_id` names the dataset the pixels came from and survives
/// splitting, so pixel ids from unrelated scenes are never compared.
#[derive(Debug, Clone)]
pub struct SpectraSet {
    data: Matrix,
    pixel_ids: Vec<PixelId>,
    normalized: bool,
    dropped_ids: Vec<PixelId>,
    scene_id: String,
}

impl SpectraSet {
    /// Wrap a d x p matrix of spectra, optionally normalizing each column
    /// to unit l2 norm. Zero-norm columns are dropped and their ids
    /// recorded in [`SpectraSet::dropped_ids`]. The scene id defaults to
    /// a content hash.
    pub fn from_matrix(data: Matrix, pixel_ids: Vec<PixelId>, normalize: bool) -> Result<Self> {
        let scene_id = format!("data-{:016x}", crate::rng::content_hash(data.data()));
        Self::from_matrix_with_scene(data, pixel_ids, normalize, scene_id)
    }

    pub fn from_matrix_with_scene(
        data: Matrix,
        pixel_ids: Vec<PixelId>,
        normalize: bool,
        scene_id: String,
    ) -> Result<Self> {
        if pixel_ids.len() != data.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} pixel ids for {} columns",
                pixel_ids.len(),
                data.cols()
            )));
        }
        if !normalize {
            return Ok(SpectraSet {
                data,
                pixel_ids,
                normalized: false,
                dropped_ids: Vec::new(),
                scene_id,
            });
        }

        let mut kept = Vec::new();
        let mut kept_ids = Vec::new();
        let mut dropped_ids = Vec::new();
        for j in 0..data.cols() {
            let col = data.col(j);
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                dropped_ids.push(pixel_ids[j]);
                continue;
            }
            kept.push(col.iter().map(|x| x / norm).collect::<Vec<f64>>());
            kept_ids.push(pixel_ids[j]);
        }
        if kept.is_empty() {
            return Err(Error::DegenerateInput(
                "all pixels have zero norm".into(),
            ));
        }
        Ok(SpectraSet {
            data: Matrix::from_columns(&kept)?,
            pixel_ids: kept_ids,
            normalized: true,
            dropped_ids,
            scene_id,
        })
    }

    pub fn band_count(&self) -> usize {
        self.data.rows()
    }

    pub fn pixel_count(&self) -> usize {
        self.data.cols()
    }

    /// Spectrum of the `i`-th kept pixel.
    pub fn spectrum(&self, i: usize) -> &[f64] {
        self.data.col(i)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn pixel_ids(&self) -> &[PixelId] {
        &self.pixel_ids
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    /// Pixels discarded during normalization for having zero norm.
    pub fn dropped_ids(&self) -> &[PixelId] {
        &self.dropped_ids
    }

    /// Identity of the source dataset; shared by splits of one scene.
    pub fn scene_id(&self) -> &str {
        &self.scene_id
    }

    /// CSV export: band per row, pixel per column, 17 significant digits.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        for i in 0..self.band_count() {
            let row: Vec<String> = (0..self.pixel_count())
                .map(|j| format!("{:.16e}", self.data[(i, j)]))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Read a CSV written by [`SpectraSet::write_csv`]. Pixel ids are
    /// synthesized as `(column, 0)`.
    pub fn read_csv(r: &mut impl BufRead, normalize: bool) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad float '{t}': {e}")))
                })
                .collect::<Result<_>>()?;
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(Error::Parse("ragged CSV rows".into()));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty spectra CSV".into()));
        }
        let d = rows.len();
        let p = rows[0].len();
        let data = Matrix::from_fn(d, p, |i, j| rows[i][j]);
        let ids: Vec<PixelId> = (0..p).map(|j| (j as u32, 0)).collect();
        SpectraSet::from_matrix(data, ids, normalize)
    }

    fn take(&self, indices: &[usize]) -> SpectraSet {
        SpectraSet {
            data: self.data.select_columns(indices),
            pixel_ids: indices.iter().map(|&i| self.pixel_ids[i]).collect(),
            normalized: self.normalized,
            dropped_ids: Vec::new(),
            scene_id: self.scene_id.clone(),
        }
    }
}

/// Flatten a cube into per-pixel spectra columns.
///
/// Pixels are ordered line by line (`y` outer, `x` inner). With
/// `normalize`, each column is divided by its l2 norm and zero pixels are
/// dropped (their ids are retained on the result).
pub fn to_spectra(cube: &HsiCube, normalize: bool) -> Result<SpectraSet> {
    let d = cube.bands;
    let p = cube.samples * cube.lines;
    let mut data = Matrix::zeros(d, p);
    let mut ids = Vec::with_capacity(p);
    let mut j = 0;
    for y in 0..cube.lines {
        for x in 0..cube.samples {
            for b in 0..d {
                data[(b, j)] = cube.value(b, y, x);
            }
            ids.push((x as u32, y as u32));
            j += 1;
        }
    }
    SpectraSet::from_matrix(data, ids, normalize)
}

/// Disjoint random split into `(train, test)` by pixel.
///
/// `|train| = round(train_fraction * p)`; the same seed always produces
/// the same partition.
pub fn split_train_test(
    s: &SpectraSet,
    train_fraction: f64,
    seed: u64,
) -> Result<(SpectraSet, SpectraSet)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let p = s.pixel_count();
    let n_train = (train_fraction * p as f64).round() as usize;
    if n_train == 0 || n_train == p {
        return Err(Error::DegenerateInput(format!(
            "split of {p} pixels at fraction {train_fraction} leaves one side empty"
        )));
    }

    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut seeded_rng(seed));
    let mut train_idx = order[..n_train].to_vec();
    let mut test_idx = order[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((s.take(&train_idx), s.take(&test_idx)))
}
