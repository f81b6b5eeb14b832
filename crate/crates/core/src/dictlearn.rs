//! Dictionary learning: alternating sparse coding and block-coordinate
//! dictionary updates with unit-ball atom projection.

use crate::error::{Error, Result};
use crate::hsi::{PixelId, SpectraSet};
use crate::io;
use crate::numerics::Matrix;
use crate::rng::{content_hash, seeded_rng};
use crate::solvers::{lasso_cd, LassoProblem, SolveReport};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter};
use std::path::Path;

/// Where a dictionary came from: enough to reproduce it and to enforce
/// train/test hygiene downstream.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DictionaryProvenance {
    pub dataset_id: String,
    /// Scene the training pixels belong to; pixel-id disjointness is only
    /// meaningful against test sets from the same scene.
    pub scene_id: String,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub training_pixel_ids: Vec<PixelId>,
}

/// A learned sparsifying dictionary, `band_count x atom_count`, all atom
/// norms at most 1 and no all-zero atoms.
#[derive(Debug, Clone)]
pub struct Dictionary {
    matrix: Matrix,
    provenance: DictionaryProvenance,
}

impl Dictionary {
    pub fn new(matrix: Matrix, provenance: DictionaryProvenance) -> Result<Self> {
        for j in 0..matrix.cols() {
            let norm = matrix.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1.0 + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "atom {j} has norm {norm} > 1"
                )));
            }
            if norm == 0.0 {
                return Err(Error::ZeroColumn(j));
            }
        }
        Ok(Dictionary { matrix, provenance })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn band_count(&self) -> usize {
        self.matrix.rows()
    }

    pub fn atom_count(&self) -> usize {
        self.matrix.cols()
    }

    pub fn provenance(&self) -> &DictionaryProvenance {
        &self.provenance
    }

    /// Serialize into the flat binary dictionary format.
    pub fn write_to(&self, w: &mut impl std::io::Write) -> Result<()> {
        io::write_magic(w, io::MAGIC_DICTIONARY)?;
        io::write_u32(w, self.band_count() as u32)?;
        io::write_u32(w, self.atom_count() as u32)?;
        io::write_f64_slice(w, self.matrix.data())?;
        let blob = serde_json::to_string(&self.provenance)
            .map_err(|e| Error::Parse(format!("provenance serialization: {e}")))?;
        io::write_blob(w, &blob)
    }

    pub fn read_from(r: &mut impl std::io::Read) -> Result<Self> {
        io::read_magic(r, io::MAGIC_DICTIONARY)?;
        let d = io::read_u32(r)? as usize;
        let n = io::read_u32(r)? as usize;
        let data = io::read_f64_vec(r, d * n)?;
        let matrix = Matrix::from_vec(d, n, data)?;
        let blob = io::read_blob(r)?;
        let provenance: DictionaryProvenance = serde_json::from_str(&blob)
            .map_err(|e| Error::Parse(format!("provenance deserialization: {e}")))?;
        Dictionary::new(matrix, provenance)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut r)
    }
}

/// Full-data or minibatch training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Batch {
    Full,
    Minibatch(usize),
}

/// Training knobs. `lambda` defaults to `1.2 / sqrt(band_count)`.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub atom_count: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub tol: f64,
    pub batch: Batch,
}

impl TrainConfig {
    pub fn new(atom_count: usize, band_count: usize) -> Self {
        TrainConfig {
            atom_count,
            lambda: 1.2 / (band_count as f64).sqrt(),
            epochs: 30,
            seed: 0,
            tol: 1e-6,
            batch: Batch::Full,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.atom_count < 1 {
            return Err(Error::InvalidParameter("atom_count must be >= 1".into()));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidParameter("epochs must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be > 0".into()));
        }
        if let Batch::Minibatch(b) = self.batch {
            if b == 0 {
                return Err(Error::InvalidParameter("minibatch size must be > 0".into()));
            }
        }
        Ok(())
    }
}

const CODING_MAX_SWEEPS: usize = 2000;
const UPDATE_MAX_CYCLES: usize = 100;
const DEAD_ATOM_THRESHOLD: f64 = 1e-10;

/// Sparse codes for a set of spectra, one column per pixel, plus the
/// per-column solver convergence flags.
#[derive(Debug, Clone)]
pub struct SparseCodes {
    pub coefficients: Matrix,
    pub converged: Vec<bool>,
}

/// Code every column of `x` against the dictionary at penalty `lambda`.
pub fn sparse_code(dict: &Dictionary, x: &SpectraSet, lambda: f64) -> Result<SparseCodes> {
    if dict.band_count() != x.band_count() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary has {} bands, spectra have {}",
            dict.band_count(),
            x.band_count()
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    let reports = code_columns(dict.matrix(), x, lambda, None, 1e-8);
    let columns: Vec<Vec<f64>> = reports.iter().map(|r| r.solution.clone()).collect();
    Ok(SparseCodes {
        coefficients: Matrix::from_columns(&columns)?,
        converged: reports.iter().map(|r| r.converged).collect(),
    })
}

fn code_columns(
    dict_matrix: &Matrix,
    x: &SpectraSet,
    lambda: f64,
    warm: Option<&[Vec<f64>]>,
    tol: f64,
) -> Vec<SolveReport> {
    (0..x.pixel_count())
        .into_par_iter()
        .map(|i| {
            let problem = LassoProblem::new(dict_matrix, x.spectrum(i), lambda)
                .expect("dimensions checked by caller");
            lasso_cd(&problem, warm.map(|w| w[i].as_slice()), CODING_MAX_SWEEPS, tol)
        })
        .collect()
}

/// The training objective: summed per-column penalized coding cost.
pub fn coding_objective(dict_matrix: &Matrix, x: &SpectraSet, codes: &[Vec<f64>], lambda: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..x.pixel_count() {
        let recon = dict_matrix.matvec(&codes[i]);
        let fit: f64 = x
            .spectrum(i)
            .iter()
            .zip(&recon)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let l1: f64 = codes[i].iter().map(|v| v.abs()).sum();
        total += 0.5 * fit + lambda * l1;
    }
    total
}

/// Learn a dictionary from training spectra.
///
/// Alternates (a) sparse-coding every column by warm-started coordinate
/// descent and (b) cycling block-coordinate updates of the atoms against
/// the accumulated statistics `A = sum s sᵀ`, `B = sum x sᵀ`, projecting
/// each atom onto the unit ball. Atoms that fall out of use are re-seeded
/// with the worst-reconstructed training column. Bit-reproducible for a
/// given config.
pub fn learn_dictionary(x: &SpectraSet, cfg: &TrainConfig) -> Result<Dictionary> {
    Ok(learn_dictionary_traced(x, cfg)?.0)
}

/// As [`learn_dictionary`], also returning the objective after each epoch.
pub fn learn_dictionary_traced(
    x: &SpectraSet,
    cfg: &TrainConfig,
) -> Result<(Dictionary, Vec<f64>)> {
    cfg.validate()?;
    let d = x.band_count();
    let n = cfg.atom_count;
    let p = x.pixel_count();
    if p < n {
        return Err(Error::DegenerateInput(format!(
            "{p} training columns cannot seed {n} atoms"
        )));
    }

    let mut rng = seeded_rng(cfg.seed);
    let init_cols = sample(&mut rng, p, n).into_vec();
    let mut dict = Matrix::zeros(d, n);
    for (j, &src) in init_cols.iter().enumerate() {
        let col = x.spectrum(src);
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = if norm > 1.0 { 1.0 / norm } else { 1.0 };
        for (dst, &v) in dict.col_mut(j).iter_mut().zip(col) {
            *dst = v * scale;
        }
    }

    let mut codes: Vec<Vec<f64>> = vec![vec![0.0; n]; p];
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut prev_obj = f64::INFINITY;

    // Online statistics persist across epochs in minibatch mode.
    let mut a_stat = Matrix::zeros(n, n);
    let mut b_stat = Matrix::zeros(d, n);

    for _epoch in 0..cfg.epochs {
        let batches: Vec<Vec<usize>> = match cfg.batch {
            Batch::Full => vec![(0..p).collect()],
            Batch::Minibatch(size) => {
                let mut order: Vec<usize> = (0..p).collect();
                use rand::seq::SliceRandom;
                order.shuffle(&mut rng);
                order.chunks(size.max(1)).map(|c| c.to_vec()).collect()
            }
        };

        for batch in &batches {
            // (a) sparse-code the batch against the current dictionary.
            let reports: Vec<(usize, SolveReport)> = batch
                .par_iter()
                .map(|&i| {
                    let problem = LassoProblem::new(&dict, x.spectrum(i), cfg.lambda)
                        .expect("dimensions validated");
                    (
                        i,
                        lasso_cd(&problem, Some(&codes[i]), CODING_MAX_SWEEPS, cfg.tol),
                    )
                })
                .collect();
            for (i, rep) in reports {
                codes[i] = rep.solution;
            }

            // (b) refresh statistics. Full mode rebuilds them; minibatch
            // mode accumulates online.
            if cfg.batch == Batch::Full {
                a_stat = Matrix::zeros(n, n);
                b_stat = Matrix::zeros(d, n);
            }
            for &i in batch {
                let s = &codes[i];
                for j in 0..n {
                    let sj = s[j];
                    if sj == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        a_stat[(k, j)] += s[k] * sj;
                    }
                    for (row, &xv) in b_stat.col_mut(j).iter_mut().zip(x.spectrum(i)) {
                        *row += xv * sj;
                    }
                }
            }

            // (c) cycle atom updates until the dictionary settles.
            update_dictionary(&mut dict, &mut a_stat, &mut b_stat, &mut codes, x, cfg)?;
        }

        let obj = coding_objective(&dict, x, &codes, cfg.lambda);
        if cfg.batch == Batch::Full {
            debug_assert!(
                obj <= prev_obj + 1e-8 * (1.0 + prev_obj.abs()),
                "objective rose from {prev_obj} to {obj}"
            );
        }
        prev_obj = obj;
        trace.push(obj);
    }

    let provenance = DictionaryProvenance {
        dataset_id: format!("spectra-{:016x}", content_hash(x.matrix().data())),
        scene_id: x.scene_id().to_string(),
        lambda: cfg.lambda,
        epochs: cfg.epochs,
        seed: cfg.seed,
        training_pixel_ids: x.pixel_ids().to_vec(),
    };
    Ok((Dictionary::new(dict, provenance)?, trace))
}

fn update_dictionary(
    dict: &mut Matrix,
    a_stat: &mut Matrix,
    b_stat: &mut Matrix,
    codes: &mut [Vec<f64>],
    x: &SpectraSet,
    cfg: &TrainConfig,
) -> Result<()> {
    let d = dict.rows();
    let n = dict.cols();
    let mut reseeded_targets: Vec<usize> = Vec::new();

    for _cycle in 0..UPDATE_MAX_CYCLES {
        let mut max_shift = 0.0f64;
        for j in 0..n {
            if a_stat[(j, j)] < DEAD_ATOM_THRESHOLD {
                reseed_atom(dict, a_stat, b_stat, codes, x, j, &mut reseeded_targets)?;
                continue;
            }
            // Exact minimizer of the quadratic in atom j over the unit ball.
            let ajj = a_stat[(j, j)];
            let da = dict.matvec(a_stat.col(j));
            let mut u = vec![0.0; d];
            let dj = dict.col(j);
            for i in 0..d {
                u[i] = dj[i] + (b_stat[(i, j)] - da[i]) / ajj;
            }
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1.0 {
                for v in &mut u {
                    *v /= norm;
                }
            }
            let shift = dict
                .col(j)
                .iter()
                .zip(&u)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            max_shift = max_shift.max(shift);
            dict.col_mut(j).copy_from_slice(&u);
        }
        if max_shift <= cfg.tol {
            break;
        }
    }
    Ok(())
}

/// Replace a dead atom with the worst-reconstructed training column and
/// clear its code row (the row is already numerically zero, so the
/// objective is unaffected; clearing keeps the statistics consistent).
fn reseed_atom(
    dict: &mut Matrix,
    a_stat: &mut Matrix,
    b_stat: &mut Matrix,
    codes: &mut [Vec<f64>],
    x: &SpectraSet,
    j: usize,
    already_used: &mut Vec<usize>,
) -> Result<()> {
    let n = dict.cols();
    let mut worst = None;
    let mut worst_resid = -1.0;
    for i in 0..x.pixel_count() {
        if already_used.contains(&i) {
            continue;
        }
        let recon = dict.matvec(&codes[i]);
        let resid: f64 = x
            .spectrum(i)
            .iter()
            .zip(&recon)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if resid > worst_resid {
            worst_resid = resid;
            worst = Some(i);
        }
    }
    let src = worst.ok_or_else(|| Error::DegenerateInput("no column left to reseed from".into()))?;
    already_used.push(src);

    let col = x.spectrum(src);
    let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroColumn(src));
    }
    let scale = if norm > 1.0 { 1.0 / norm } else { 1.0 };
    for (dst, &v) in dict.col_mut(j).iter_mut().zip(col) {
        *dst = v * scale;
    }
    for code in codes.iter_mut() {
        code[j] = 0.0;
    }
    for k in 0..n {
        a_stat[(k, j)] = 0.0;
        a_stat[(j, k)] = 0.0;
    }
    for v in b_stat.col_mut(j) {
        *v = 0.0;
    }
    Ok(())
}
