//! The experiment harness: pipeline comparison, condition-number curves,
//! the cross-scene robustness study, and CSV/manifest emission.

mod report;

pub use report::{
    fmt17, write_condition_curve_csv, write_error_curve_csv, write_spectrum_trace_csv,
    ManifestInput, RunManifest,
};

use crate::dictlearn::{learn_dictionary, Dictionary, TrainConfig};
use crate::error::{Error, Result};
use crate::hsi::SpectraSet;
use crate::numerics::{condition_number, dct_basis, Matrix};
use crate::rng::derive_seed;
use crate::sensing::{
    balance, balanced_bpdn, gaussian_measurement, sensing_matrix, subsample_measurement,
    svd_measurement, BalancedDecomposition, MeasurementMatrix, SvdSource,
};
use crate::solvers::{solve_bpdn, BpdnProblem};
use rayon::prelude::*;

/// Default residual bound for reconstruction.
pub const DEFAULT_EPSILON: f64 = 0.01;
/// Balancing iteration budget used by balanced pipelines.
pub const BALANCE_ITERATIONS: usize = 10;
/// Projected-gradient tolerance for pipeline reconstructions.
pub const PIPELINE_SOLVER_TOL: f64 = 1e-6;
/// Total solver iteration budget per pixel reconstruction.
pub const PIPELINE_SOLVER_BUDGET: usize = 500;

/// Which matrix sparsifies the spectra.
#[derive(Debug, Clone)]
pub enum SparsifierSpec {
    Dct,
    Learned(Dictionary),
}

/// How measurements are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerSpec {
    Gaussian { seed: u64 },
    Subsample { seed: u64 },
    Svd,
}

/// One reconstruction pipeline: sparsifier, sampler, optional balancing,
/// residual bound, and the measurement counts to sweep.
#[derive(Debug, Clone)]
pub struct PipelineSpec {
    pub sparsifier: SparsifierSpec,
    pub sampler: SamplerSpec,
    pub balanced: bool,
    pub epsilon: f64,
    pub m_list: Vec<usize>,
}

impl PipelineSpec {
    /// Conventional name: dsvd, dgaussian, dsub, dctsvd, dctgaussian,
    /// dctsub; `-bal` appended for balanced variants.
    pub fn id(&self) -> String {
        let sparsifier = match &self.sparsifier {
            SparsifierSpec::Dct => "dct",
            SparsifierSpec::Learned(_) => "d",
        };
        let sampler = match self.sampler {
            SamplerSpec::Gaussian { .. } => "gaussian",
            SamplerSpec::Subsample { .. } => "sub",
            SamplerSpec::Svd => "svd",
        };
        let mut id = format!("{sparsifier}{sampler}");
        if self.balanced {
            id.push_str("-bal");
        }
        id
    }

    fn validate(&self, band_count: usize) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if self.m_list.is_empty() {
            return Err(Error::InvalidParameter("empty m_list".into()));
        }
        for &m in &self.m_list {
            if m < 1 || m > band_count {
                return Err(Error::InvalidParameter(format!(
                    "measurement count {m} outside 1..={band_count}"
                )));
            }
        }
        if self.m_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "m_list must be strictly increasing".into(),
            ));
        }
        if let SparsifierSpec::Learned(d) = &self.sparsifier {
            if d.band_count() != band_count {
                return Err(Error::DimensionMismatch(format!(
                    "dictionary has {} bands, data has {band_count}",
                    d.band_count()
                )));
            }
        }
        Ok(())
    }
}

/// Mean and spread of relative reconstruction error per measurement count.
#[derive(Debug, Clone)]
pub struct ErrorCurve {
    pub m_values: Vec<usize>,
    pub mean_rel_error: Vec<f64>,
    pub std_rel_error: Vec<f64>,
    pub n_pixels: Vec<usize>,
    pub n_failed: Vec<usize>,
    /// Row per m value, entry per test pixel; failures recorded as NaN.
    pub per_pixel: Option<Vec<Vec<f64>>>,
    pub pipeline: String,
    pub dataset: String,
}

/// Cross-scene transfer versus native training, over the same test set.
#[derive(Debug, Clone)]
pub struct RobustnessReport {
    pub cross_curve: ErrorCurve,
    pub native_curve: ErrorCurve,
    pub rmse_between_curves: f64,
}

/// `||x_star - x||_2 / ||x||_2`.
pub fn relative_error(x_star: &[f64], x: &[f64]) -> Result<f64> {
    if x_star.len() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "reconstruction length {} vs reference {}",
            x_star.len(),
            x.len()
        )));
    }
    let ref_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ref_norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff = x_star
        .iter()
        .zip(x)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / ref_norm)
}

/// Run one pipeline over a test set, sweeping the measurement counts.
///
/// For every m: build the measurement matrix (random kinds draw a fresh
/// seeded matrix per m), compose the sensing matrix (SVD sampling takes
/// the reduced-system fast path), optionally balance it, then reconstruct
/// every test pixel by BPDN at the spec's epsilon and record its relative
/// error. Pixel-level solver failures are flagged (NaN in the per-pixel
/// table, counted in `n_failed`), never silently dropped. Reconstructions
/// across pixels run in parallel; results are identical to serial
/// execution. Fully deterministic for fixed seeds.
pub fn run_pipeline(
    spec: &PipelineSpec,
    train: &SpectraSet,
    test: &SpectraSet,
    seed: u64,
) -> Result<ErrorCurve> {
    if train.band_count() != test.band_count() {
        return Err(Error::DimensionMismatch(format!(
            "train has {} bands, test has {}",
            train.band_count(),
            test.band_count()
        )));
    }
    let d = test.band_count();
    spec.validate(d)?;

    // Train/test hygiene: a learned dictionary must not have seen any
    // test pixel of the same scene.
    let (sparsifier, sparsifier_id): (Matrix, String) = match &spec.sparsifier {
        SparsifierSpec::Dct => (dct_basis(d), "dct".to_string()),
        SparsifierSpec::Learned(dict) => {
            let prov = dict.provenance();
            if prov.scene_id == test.scene_id() && !prov.training_pixel_ids.is_empty() {
                let train_ids: std::collections::HashSet<_> =
                    prov.training_pixel_ids.iter().collect();
                let overlap = test
                    .pixel_ids()
                    .iter()
                    .filter(|id| train_ids.contains(id))
                    .count();
                if overlap > 0 {
                    return Err(Error::TrainTestOverlap(overlap));
                }
            }
            (dict.matrix().clone(), prov.dataset_id.clone())
        }
    };

    let p = test.pixel_count();
    let mut curve = ErrorCurve {
        m_values: spec.m_list.clone(),
        mean_rel_error: Vec::new(),
        std_rel_error: Vec::new(),
        n_pixels: Vec::new(),
        n_failed: Vec::new(),
        per_pixel: Some(Vec::new()),
        pipeline: spec.id(),
        dataset: test.scene_id().to_string(),
    };

    // Per-pixel warm starts carried across consecutive m values.
    let mut warm: Vec<Option<Vec<f64>>> = vec![None; p];

    for &m in &spec.m_list {
        let phi = build_measurement(spec, &sparsifier, m, d, seed)?;
        let sensing = sensing_matrix(&phi, &sparsifier, &sparsifier_id)?;
        let decomposition: Option<BalancedDecomposition> = if spec.balanced {
            Some(balance(sensing.a(), BALANCE_ITERATIONS)?)
        } else {
            None
        };

        let pixel_results: Vec<(f64, Option<Vec<f64>>)> = (0..p)
            .into_par_iter()
            .map(|i| {
                let x = test.spectrum(i);
                let y = phi.measure(x);
                let solved = match &decomposition {
                    Some(dec) => {
                        balanced_bpdn(dec, &y, spec.epsilon, PIPELINE_SOLVER_TOL, PIPELINE_SOLVER_BUDGET)
                    }
                    None => BpdnProblem::new(sensing.a(), &y, spec.epsilon).and_then(|pb| {
                        solve_bpdn(&pb, PIPELINE_SOLVER_TOL, PIPELINE_SOLVER_BUDGET, warm[i].as_deref())
                    }),
                };
                match solved {
                    Ok(rep) => {
                        let x_star = sparsifier.matvec(&rep.solution);
                        match relative_error(&x_star, x) {
                            Ok(e) => (e, Some(rep.solution)),
                            Err(_) => (f64::NAN, None),
                        }
                    }
                    Err(_) => (f64::NAN, None),
                }
            })
            .collect();

        let mut errors = Vec::with_capacity(p);
        let mut failed = 0usize;
        for (i, (err, solution)) in pixel_results.into_iter().enumerate() {
            if err.is_nan() {
                failed += 1;
            }
            errors.push(err);
            warm[i] = solution;
        }

        let ok: Vec<f64> = errors.iter().cloned().filter(|e| !e.is_nan()).collect();
        let mean = if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().sum::<f64>() / ok.len() as f64
        };
        let std = if ok.len() > 1 {
            let mu = mean;
            (ok.iter().map(|e| (e - mu) * (e - mu)).sum::<f64>() / (ok.len() - 1) as f64).sqrt()
        } else {
            0.0
        };

        curve.mean_rel_error.push(mean);
        curve.std_rel_error.push(std);
        curve.n_pixels.push(ok.len());
        curve.n_failed.push(failed);
        curve.per_pixel.as_mut().unwrap().push(errors);
    }

    Ok(curve)
}

fn build_measurement(
    spec: &PipelineSpec,
    sparsifier: &Matrix,
    m: usize,
    d: usize,
    run_seed: u64,
) -> Result<MeasurementMatrix> {
    match spec.sampler {
        SamplerSpec::Gaussian { seed } => {
            gaussian_measurement(m, d, derive_seed(derive_seed(run_seed, seed), m as u64))
        }
        SamplerSpec::Subsample { seed } => {
            subsample_measurement(m, d, derive_seed(derive_seed(run_seed, seed), m as u64))
        }
        SamplerSpec::Svd => {
            let source = match spec.sparsifier {
                SparsifierSpec::Dct => SvdSource::Dct,
                SparsifierSpec::Learned(_) => SvdSource::Dictionary,
            };
            svd_measurement(sparsifier, m, source)
        }
    }
}

/// Condition number of the truncated-SVD sensing matrix per m, raw or
/// after balancing.
pub fn condition_curve(
    dict: &Dictionary,
    m_list: &[usize],
    balanced: bool,
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let phi = svd_measurement(dict.matrix(), m, SvdSource::Dictionary)?;
        let sensing = sensing_matrix(&phi, dict.matrix(), &dict.provenance().dataset_id)?;
        let cond = if balanced {
            condition_number(balance(sensing.a(), BALANCE_ITERATIONS)?.b())?
        } else {
            condition_number(sensing.a())?
        };
        out.push((m, cond));
    }
    Ok(out)
}

/// Train on scene A, reconstruct scene B's test split, and compare with
/// scene B's own dictionary on the same pixels.
pub fn robustness_experiment(
    scene_a_train: &SpectraSet,
    scene_b_train: &SpectraSet,
    scene_b_test: &SpectraSet,
    cfg: &TrainConfig,
    spec: &PipelineSpec,
) -> Result<RobustnessReport> {
    if scene_a_train.band_count() != scene_b_train.band_count()
        || scene_b_train.band_count() != scene_b_test.band_count()
    {
        return Err(Error::DimensionMismatch(
            "robustness scenes must share a band count".into(),
        ));
    }
    let dict_cross = learn_dictionary(scene_a_train, cfg)?;
    let dict_native = learn_dictionary(scene_b_train, cfg)?;

    let mut spec_cross = spec.clone();
    spec_cross.sparsifier = SparsifierSpec::Learned(dict_cross);
    spec_cross.sampler = SamplerSpec::Svd;
    let mut spec_native = spec.clone();
    spec_native.sparsifier = SparsifierSpec::Learned(dict_native);
    spec_native.sampler = SamplerSpec::Svd;

    let cross_curve = run_pipeline(&spec_cross, scene_a_train, scene_b_test, 0)?;
    let native_curve = run_pipeline(&spec_native, scene_b_train, scene_b_test, 0)?;

    let k = cross_curve.m_values.len();
    let rmse = (cross_curve
        .mean_rel_error
        .iter()
        .zip(&native_curve.mean_rel_error)
        .map(|(c, n)| (c - n) * (c - n))
        .sum::<f64>()
        / k as f64)
        .sqrt();

    Ok(RobustnessReport {
        cross_curve,
        native_curve,
        rmse_between_curves: rmse,
    })
}
