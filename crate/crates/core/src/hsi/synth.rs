//! Planted-model scene generator: known dictionary, known sparse codes,
//! reproducible noise.

use super::spectra::SpectraSet;
use crate::dictlearn::{Dictionary, DictionaryProvenance};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::seeded_rng;
use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};

/// A scene drawn from a known generative model, for oracle-checked tests.
#[derive(Debug, Clone)]
pub struct SynthScene {
    pub true_dictionary: Dictionary,
    /// Sparse coefficients, one k-sparse column per pixel.
    pub true_codes: Matrix,
    pub spectra: SpectraSet,
    pub noise_sigma: f64,
    pub seed: u64,
}

/// Generate a scene of `p` pixels over `d` bands from a random
/// `d x n_atoms` dictionary with k-sparse codes.
///
/// Codes are scaled so each clean spectrum has unit norm before noise is
/// added; spectra are then re-normalized, so a fixed BPDN epsilon means
/// the same thing across scenes. Fully determined by `seed`.
pub fn synth_scene(
    d: usize,
    n_atoms: usize,
    k: usize,
    p: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<SynthScene> {
    if d < 1 || n_atoms < 1 || p < 1 {
        return Err(Error::InvalidParameter(
            "d, n_atoms, and p must all be >= 1".into(),
        ));
    }
    if k < 1 || k > n_atoms {
        return Err(Error::InvalidParameter(format!(
            "k must be in 1..={n_atoms}, got {k}"
        )));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise_sigma must be >= 0, got {noise_sigma}"
        )));
    }

    let mut rng = seeded_rng(seed);
    let normal = StandardNormal;

    let mut dict = Matrix::from_fn(d, n_atoms, |_, _| normal.sample(&mut rng));
    for j in 0..n_atoms {
        let norm = dict.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in dict.col_mut(j) {
            *x /= norm;
        }
    }

    let mut codes = Matrix::zeros(n_atoms, p);
    let mut spectra_cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    for i in 0..p {
        // Redraw on the measure-zero degenerate combinations.
        loop {
            let support = sample(&mut rng, n_atoms, k).into_vec();
            let mut s = vec![0.0; n_atoms];
            for &j in &support {
                s[j] = normal.sample(&mut rng);
            }
            let clean = dict.matvec(&s);
            let clean_norm = clean.iter().map(|x| x * x).sum::<f64>().sqrt();
            if clean_norm < 1e-9 {
                continue;
            }
            let mut spectrum: Vec<f64> = clean.iter().map(|x| x / clean_norm).collect();
            for x in spectrum.iter_mut() {
                let g: f64 = normal.sample(&mut rng);
                *x += noise_sigma * g;
            }
            let norm = spectrum.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-9 {
                continue;
            }
            for j in 0..n_atoms {
                codes[(j, i)] = s[j] / clean_norm;
            }
            for x in spectrum.iter_mut() {
                *x /= norm;
            }
            spectra_cols.push(spectrum);
            break;
        }
    }

    let scene_id =
        format!("synth(d={d},atoms={n_atoms},k={k},p={p},sigma={noise_sigma},seed={seed})");
    let ids: Vec<(u32, u32)> = (0..p).map(|i| (i as u32, 0)).collect();
    // Columns are unit-norm by construction; mark the set accordingly.
    let spectra = SpectraSet::from_matrix_with_scene(
        Matrix::from_columns(&spectra_cols)?,
        ids,
        true,
        scene_id.clone(),
    )?;

    let provenance = DictionaryProvenance {
        dataset_id: scene_id.clone(),
        scene_id,
        lambda: 0.0,
        epochs: 0,
        seed,
        training_pixel_ids: Vec::new(),
    };
    Ok(SynthScene {
        true_dictionary: Dictionary::new(dict, provenance)?,
        true_codes: codes,
        spectra,
        noise_sigma,
        seed,
    })
}
