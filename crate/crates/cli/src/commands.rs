//! Subcommand implementations. Each writes its outputs plus a JSON run
//! manifest beside the primary output.

use crate::scene::{load_scene, parse_usize_list};
use clap::{Args, Subcommand};
use hscs_core::dictlearn::{learn_dictionary, Dictionary, TrainConfig};
use hscs_core::error::{Error, Result};
use hscs_core::experiments::{
    condition_curve, relative_error, robustness_experiment, run_pipeline, write_condition_curve_csv,
    write_error_curve_csv, PipelineSpec, RunManifest, SamplerSpec, SparsifierSpec,
    BALANCE_ITERATIONS, DEFAULT_EPSILON, PIPELINE_SOLVER_BUDGET, PIPELINE_SOLVER_TOL,
};
use hscs_core::hsi::{split_train_test, synth_scene, SpectraSet};
use hscs_core::io::{read_matrix_csv, write_matrix_csv};
use hscs_core::numerics::{dct_basis, Matrix};
use hscs_core::rng::derive_seed;
use hscs_core::sensing::{
    balance, balanced_bpdn, gaussian_measurement, sensing_matrix, subsample_measurement,
    svd_measurement, MeasurementMatrix, SvdSource,
};
use hscs_core::solvers::{solve_bpdn, BpdnProblem};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};



#[derive(Subcommand)]
pub enum Command {
    /// Generate a synthetic scene from a planted dictionary.
    Synth(SynthArgs),
    /// Learn a sparsifying dictionary from a cube or spectra CSV.
    Learn(LearnArgs),
    /// Emit a measurement matrix.
    Sample(SampleArgs),
    /// Balance the truncated-SVD sensing matrix of a dictionary.
    Balance(BalanceArgs),
    /// Reconstruct spectra from measurements.
    Reconstruct(ReconstructArgs),
    /// Run a set of pipelines and emit one error-curve CSV per method.
    Compare(CompareArgs),
    /// Condition numbers of the sensing matrix before and after balancing.
    Condcurve(CondcurveArgs),
    /// Cross-scene dictionary transfer study.
    Robustness(RobustnessArgs),
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Learn(a) => learn(a),
        Command::Sample(a) => sample(a),
        Command::Balance(a) => balance_cmd(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Compare(a) => compare(a),
        Command::Condcurve(a) => condcurve(a),
        Command::Robustness(a) => robustness(a),
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn open_out(path: &Path) -> Result<BufWriter<std::fs::File>> {
    Ok(BufWriter::new(std::fs::File::create(path)?))
}

// ---------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------

#[derive(Args)]
pub struct SynthArgs {
    /// Number of spectral bands.
    #[arg(long)]
    d: usize,
    /// Number of dictionary atoms.
    #[arg(long)]
    atoms: usize,
    /// Nonzeros per code column.
    #[arg(long)]
    k: usize,
    /// Number of pixels.
    #[arg(long)]
    p: usize,
    /// Additive noise level before renormalization.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "synth-out")]
    out_dir: PathBuf,
}

fn synth(a: SynthArgs) -> Result<()> {
    create_dir(&a.out_dir)?;
    let scene = synth_scene(a.d, a.atoms, a.k, a.p, a.sigma, a.seed)?;

    let spectra_path = a.out_dir.join("spectra.csv");
    scene.spectra.write_csv(&mut open_out(&spectra_path)?)?;
    let dict_path = a.out_dir.join("true_dictionary.hsdict");
    scene.true_dictionary.save(&dict_path)?;
    let codes_path = a.out_dir.join("true_codes.csv");
    write_matrix_csv(&scene.true_codes, &mut open_out(&codes_path)?)?;

    RunManifest::new("synth")
        .parameter("d", a.d)
        .parameter("atoms", a.atoms)
        .parameter("k", a.k)
        .parameter("p", a.p)
        .parameter("sigma", a.sigma)
        .seed("scene", a.seed)
        .output(&spectra_path)
        .output(&dict_path)
        .output(&codes_path)
        .write_beside(&spectra_path)?;
    println!("wrote {}", a.out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------
// learn
// ---------------------------------------------------------------------

#[derive(Args)]
pub struct LearnArgs {
    /// Scene input: ENVI header (.hdr) or spectra CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    atoms: usize,
    /// Penalty weight; defaults to 1.2 / sqrt(bands).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Train on a random fraction of the pixels instead of all of them.
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Comma-separated band indices to exclude before normalization.
    #[arg(long, default_value = "")]
    drop_bands: String,
    #[arg(long)]
    out: PathBuf,
}

fn learn(a: LearnArgs) -> Result<()> {
    let drop = parse_usize_list(&a.drop_bands)?;
    let scene = load_scene(&a.input, &drop)?;
    let train = match a.train_fraction {
        Some(f) => split_train_test(&scene, f, a.split_seed)?.0,
        None => scene,
    };
    let mut cfg = TrainConfig::new(a.atoms, train.band_count());
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    cfg.epochs = a.epochs;
    cfg.seed = a.seed;
    cfg.tol = a.tol;

    let dict = learn_dictionary(&train, &cfg)?;
    dict.save(&a.out)?;

    RunManifest::new("learn")
        .parameter("atoms", a.atoms)
        .parameter("lambda", cfg.lambda)
        .parameter("epochs", a.epochs)
        .parameter("tol", a.tol)
        .parameter(
            "train_fraction",
            a.train_fraction.map_or("all".into(), |f| f.to_string()),
        )
        .seed("train", a.seed)
        .seed("split", a.split_seed)
        .input_file(&a.input)?
        .output(&a.out)
        .write_beside(&a.out)?;
    println!(
        "learned {} atoms over {} bands -> {}",
        dict.atom_count(),
        dict.band_count(),
        a.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------

#[derive(Args)]
pub struct SampleArgs {
    /// gaussian | subsample | dsvd | dctsvd
    #[arg(long)]
    kind: String,
    #[arg(long)]
    m: usize,
    /// Band count (gaussian, subsample, dctsvd).
    #[arg(long)]
    d: Option<usize>,
    /// Dictionary file (dsvd).
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn sample(a: SampleArgs) -> Result<()> {
    let need_d = || {
        a.d.ok_or_else(|| Error::InvalidParameter("--d is required for this kind".into()))
    };
    let phi = match a.kind.as_str() {
        "gaussian" => gaussian_measurement(a.m, need_d()?, a.seed)?,
        "subsample" => subsample_measurement(a.m, need_d()?, a.seed)?,
        "dsvd" => {
            let path = a
                .dict
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("--dict is required for dsvd".into()))?;
            let dict = Dictionary::load(path)?;
            svd_measurement(dict.matrix(), a.m, SvdSource::Dictionary)?
        }
        "dctsvd" => svd_measurement(&dct_basis(need_d()?), a.m, SvdSource::Dct)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown measurement kind '{other}'"
            )))
        }
    };
    phi.save(&a.out)?;

    let ratio = 100.0 * a.m as f64 / phi.d() as f64;
    println!(
        "{} measurement {}x{} (sampling ratio {:.2}%) -> {}",
        a.kind,
        phi.m(),
        phi.d(),
        ratio,
        a.out.display()
    );

    let mut manifest = RunManifest::new("sample")
        .parameter("kind", &a.kind)
        .parameter("m", a.m)
        .parameter("sampling_ratio_percent", format!("{ratio:.2}"))
        .seed("measurement", a.seed);
    if let Some(path) = &a.dict {
        manifest = manifest.input_file(path)?;
    }
    manifest.output(&a.out).write_beside(&a.out)?;
    Ok(())
}

// ---------------------------------------------------------------------
// balance
// ---------------------------------------------------------------------

#[derive(Args)]
pub struct BalanceArgs {
    /// Dictionary whose truncated-SVD sensing matrix gets balanced.
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = BALANCE_ITERATIONS)]
    t_max: usize,
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration imbalance log CSV.
    #[arg(long)]
    log: Option<PathBuf>,
}

fn balance_cmd(a: BalanceArgs) -> Result<()> {
    let dict = Dictionary::load(&a.dict)?;
    let phi = svd_measurement(dict.matrix(), a.m, SvdSource::Dictionary)?;
    let sensing = sensing_matrix(&phi, dict.matrix(), &dict.provenance().dataset_id)?;
    let dec = balance(sensing.a(), a.t_max)?;

    let provenance = format!(
        "{{\"source\":\"dsvd\",\"dict\":\"{}\",\"m\":{},\"t_max\":{}}}",
        a.dict.display(),
        a.m,
        a.t_max
    );
    dec.write_to(&mut open_out(&a.out)?, &provenance)?;

    if let Some(log) = &a.log {
        let mut w = open_out(log)?;
        writeln!(w, "iteration,imbalance")?;
        for (t, r) in dec.imbalance_history().iter().enumerate() {
            writeln!(w, "{t},{}", hscs_core::experiments::fmt17(*r))?;
        }
    }

    RunManifest::new("balance")
        .parameter("m", a.m)
        .parameter("t_max", a.t_max)
        .parameter("iterations_run", dec.iterations_run())
        .parameter("imbalance", hscs_core::experiments::fmt17(dec.imbalance()))
        .input_file(&a.dict)?
        .output(&a.out)
        .write_beside(&a.out)?;
    println!(
        "balanced after {} iterations, imbalance {:.3e} -> {}",
        dec.iterations_run(),
        dec.imbalance(),
        a.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------

#[derive(Args)]
pub struct ReconstructArgs {
    /// Measurement matrix file.
    #[arg(long)]
    measurement: PathBuf,
    /// Sparsifying dictionary file; omit to use the DCT basis.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Ground-truth spectra CSV; measurements are formed as phi * x and
    /// per-pixel relative errors are reported.
    #[arg(long)]
    spectra: Option<PathBuf>,
    /// Pre-computed measurement CSV (m rows, pixel per column).
    #[arg(long)]
    measurements: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Reconstruct through the balanced sensing matrix.
    #[arg(long, default_value_t = false)]
    balanced: bool,
    /// Also write a per-band truth/reconstruction trace CSV for this
    /// pixel (requires --spectra).
    #[arg(long)]
    trace_pixel: Option<usize>,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn reconstruct(a: ReconstructArgs) -> Result<()> {
    let phi = MeasurementMatrix::load(&a.measurement)?;
    let (sparsifier, sparsifier_id) = match &a.dict {
        Some(path) => {
            let dict = Dictionary::load(path)?;
            (dict.matrix().clone(), dict.provenance().dataset_id.clone())
        }
        None => (dct_basis(phi.d()), "dct".to_string()),
    };
    let sensing = sensing_matrix(&phi, &sparsifier, &sparsifier_id)?;

    let (measurements, truth): (Matrix, Option<SpectraSet>) =
        match (&a.spectra, &a.measurements) {
            (Some(path), None) => {
                let mut r = BufReader::new(std::fs::File::open(path)?);
                let scene = SpectraSet::read_csv(&mut r, false)?;
                if scene.band_count() != phi.d() {
                    return Err(Error::DimensionMismatch(format!(
                        "spectra have {} bands, measurement expects {}",
                        scene.band_count(),
                        phi.d()
                    )));
                }
                let y = phi.phi().matmul(scene.matrix());
                (y, Some(scene))
            }
            (None, Some(path)) => {
                let r = BufReader::new(std::fs::File::open(path)?);
                let y = read_matrix_csv(r)?;
                if y.rows() != phi.m() {
                    return Err(Error::DimensionMismatch(format!(
                        "measurement CSV has {} rows, expected m = {}",
                        y.rows(),
                        phi.m()
                    )));
                }
                (y, None)
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "exactly one of --spectra or --measurements is required".into(),
                ))
            }
        };

    let decomposition = if a.balanced {
        Some(balance(sensing.a(), BALANCE_ITERATIONS)?)
    } else {
        None
    };

    let p = measurements.cols();
    let mut recon_cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut errors: Vec<f64> = Vec::new();
    let mut failed = 0usize;
    for j in 0..p {
        let y = measurements.col(j);
        let solved = match &decomposition {
            Some(dec) => balanced_bpdn(dec, y, a.epsilon, PIPELINE_SOLVER_TOL, PIPELINE_SOLVER_BUDGET),
            None => BpdnProblem::new(sensing.a(), y, a.epsilon)
                .and_then(|pb| solve_bpdn(&pb, PIPELINE_SOLVER_TOL, PIPELINE_SOLVER_BUDGET, None)),
        };
        match solved {
            Ok(rep) => {
                let x_star = sparsifier.matvec(&rep.solution);
                if let Some(t) = &truth {
                    errors.push(relative_error(&x_star, t.spectrum(j))?);
                }
                recon_cols.push(x_star);
            }
            Err(_) => {
                failed += 1;
                recon_cols.push(vec![0.0; sparsifier.rows()]);
                if truth.is_some() {
                    errors.push(f64::NAN);
                }
            }
        }
    }

    let recon = Matrix::from_columns(&recon_cols)?;
    write_matrix_csv(&recon, &mut open_out(&a.out)?)?;

    if let Some(pixel) = a.trace_pixel {
        let truth = truth.as_ref().ok_or_else(|| {
            Error::InvalidParameter("--trace-pixel requires --spectra".into())
        })?;
        if pixel >= p {
            return Err(Error::InvalidParameter(format!(
                "trace pixel {pixel} out of range for {p} pixels"
            )));
        }
        let trace_path = a
            .trace_out
            .clone()
            .unwrap_or_else(|| a.out.with_extension("trace.csv"));
        hscs_core::experiments::write_spectrum_trace_csv(
            truth.spectrum(pixel),
            recon.col(pixel),
            None,
            &mut open_out(&trace_path)?,
        )?;
        println!("trace for pixel {pixel} -> {}", trace_path.display());
    }

    let mut manifest = RunManifest::new("reconstruct")
        .parameter("epsilon", a.epsilon)
        .parameter("balanced", a.balanced)
        .parameter("n_pixels", p)
        .parameter("n_failed", failed)
        .input_file(&a.measurement)?;
    if let Some(path) = &a.dict {
        manifest = manifest.input_file(path)?;
    }
    if truth.is_some() {
        let ok: Vec<f64> = errors.iter().cloned().filter(|e| !e.is_nan()).collect();
        let mean = ok.iter().sum::<f64>() / ok.len().max(1) as f64;
        println!("mean_rel_err={}", hscs_core::experiments::fmt17(mean));
        manifest = manifest.parameter("mean_rel_err", hscs_core::experiments::fmt17(mean));
    }
    manifest.output(&a.out).write_beside(&a.out)?;
    Ok(())
}

// ---------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------

#[derive(Args)]
pub struct CompareArgs {
    /// Scene input: ENVI header (.hdr) or spectra CSV.
    #[arg(long)]
    scene: PathBuf,
    /// Comma-separated pipeline names: dsvd, dgaussian, dsub, dctsvd,
    /// dctgaussian, dctsub; append -bal for balanced variants.
    #[arg(long, default_value = "dsvd,dgaussian,dsub,dctgaussian,dctsvd")]
    methods: String,
    /// Comma-separated measurement counts.
    #[arg(long)]
    m: String,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dictionary atoms; defaults to 1.5x the band count.
    #[arg(long)]
    atoms: Option<usize>,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value = "")]
    drop_bands: String,
    #[arg(long, default_value = "compare-out")]
    out_dir: PathBuf,
}

fn compare(a: CompareArgs) -> Result<()> {
    let drop = parse_usize_list(&a.drop_bands)?;
    let scene = load_scene(&a.scene, &drop)?;
    let m_list = parse_usize_list(&a.m)?;
    if m_list.is_empty() {
        return Err(Error::InvalidParameter("--m must list counts".into()));
    }
    let methods: Vec<String> = a
        .methods
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if methods.is_empty() {
        return Err(Error::InvalidParameter("--methods is empty".into()));
    }

    let (train, test) = split_train_test(&scene, a.train_fraction, a.seed)?;

    // One dictionary shared by all learned-sparsifier pipelines.
    let needs_dict = methods.iter().any(|m| m.starts_with('d') && !m.starts_with("dct"));
    let dict = if needs_dict {
        let mut cfg = TrainConfig::new(
            a.atoms.unwrap_or(train.band_count() * 3 / 2),
            train.band_count(),
        );
        if let Some(l) = a.lambda {
            cfg.lambda = l;
        }
        cfg.epochs = a.epochs;
        cfg.seed = derive_seed(a.seed, 0x7261696e);
        Some(learn_dictionary(&train, &cfg)?)
    } else {
        None
    };

    create_dir(&a.out_dir)?;
    let mut outputs = Vec::new();
    for method in &methods {
        let spec = parse_method(method, &dict, a.epsilon, &m_list, a.seed)?;
        let curve = run_pipeline(&spec, &train, &test, a.seed)?;
        let path = a.out_dir.join(format!("{method}.csv"));
        write_error_curve_csv(&curve, &mut open_out(&path)?)?;
        println!(
            "{method}: mean error {:?}",
            curve
                .mean_rel_error
                .iter()
                .map(|e| format!("{e:.4}"))
                .collect::<Vec<_>>()
        );
        outputs.push(path);
    }

    let mut manifest = RunManifest::new("compare")
        .parameter("methods", &a.methods)
        .parameter("m", &a.m)
        .parameter("epsilon", a.epsilon)
        .parameter("train_fraction", a.train_fraction)
        .parameter("epochs", a.epochs)
        .seed("run", a.seed)
        .input_file(&a.scene)?;
    for path in &outputs {
        manifest = manifest.output(path);
    }
    manifest.write_beside(&a.out_dir.join("compare"))?;
    Ok(())
}

fn parse_method(
    name: &str,
    dict: &Option<Dictionary>,
    epsilon: f64,
    m_list: &[usize],
    seed: u64,
) -> Result<PipelineSpec> {
    let (base, balanced) = match name.strip_suffix("-bal") {
        Some(b) => (b, true),
        None => (name, false),
    };
    let (sparsifier, sampler) = match base {
        "dsvd" => (learned(dict)?, SamplerSpec::Svd),
        "dgaussian" => (
            learned(dict)?,
            SamplerSpec::Gaussian {
                seed: derive_seed(seed, 0x67),
            },
        ),
        "dsub" => (
            learned(dict)?,
            SamplerSpec::Subsample {
                seed: derive_seed(seed, 0x73),
            },
        ),
        "dctsvd" => (SparsifierSpec::Dct, SamplerSpec::Svd),
        "dctgaussian" => (
            SparsifierSpec::Dct,
            SamplerSpec::Gaussian {
                seed: derive_seed(seed, 0x67),
            },
        ),
        "dctsub" => (
            SparsifierSpec::Dct,
            SamplerSpec::Subsample {
                seed: derive_seed(seed, 0x73),
            },
        ),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown method '{other}'"
            )))
        }
    };
    Ok(PipelineSpec {
        sparsifier,
        sampler,
        balanced,
        epsilon,
        m_list: m_list.to_vec(),
    })
}

fn learned(dict: &Option<Dictionary>) -> Result<SparsifierSpec> {
    dict.clone()
        .map(SparsifierSpec::Learned)
        .ok_or_else(|| Error::InvalidParameter("method needs a learned dictionary".into()))
}

// ---------------------------------------------------------------------
// condcurve
// ---------------------------------------------------------------------

#[derive(Args)]
pub struct CondcurveArgs {
    #[arg(long)]
    dict: PathBuf,
    /// Comma-separated measurement counts.
    #[arg(long)]
    m: String,
    #[arg(long)]
    out: PathBuf,
}

fn condcurve(a: CondcurveArgs) -> Result<()> {
    let dict = Dictionary::load(&a.dict)?;
    let m_list = parse_usize_list(&a.m)?;
    let raw = condition_curve(&dict, &m_list, false)?;
    let bal = condition_curve(&dict, &m_list, true)?;
    write_condition_curve_csv(&raw, &bal, &mut open_out(&a.out)?)?;

    RunManifest::new("condcurve")
        .parameter("m", &a.m)
        .input_file(&a.dict)?
        .output(&a.out)
        .write_beside(&a.out)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

// ---------------------------------------------------------------------
// robustness
// ---------------------------------------------------------------------

#[derive(Args)]
pub struct RobustnessArgs {
    /// Scene providing the transferred dictionary.
    #[arg(long)]
    scene_a: PathBuf,
    /// Scene providing the native dictionary and the test pixels.
    #[arg(long)]
    scene_b: PathBuf,
    /// Comma-separated measurement counts.
    #[arg(long)]
    m: String,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    atoms: Option<usize>,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value = "robustness-out")]
    out_dir: PathBuf,
}

fn robustness(a: RobustnessArgs) -> Result<()> {
    let scene_a = load_scene(&a.scene_a, &[])?;
    let scene_b = load_scene(&a.scene_b, &[])?;
    let (a_train, _) = split_train_test(&scene_a, a.train_fraction, a.seed)?;
    let (b_train, b_test) = split_train_test(&scene_b, a.train_fraction, a.seed)?;

    let mut cfg = TrainConfig::new(
        a.atoms.unwrap_or(scene_a.band_count() * 3 / 2),
        scene_a.band_count(),
    );
    cfg.epochs = a.epochs;
    cfg.seed = derive_seed(a.seed, 0x7261696e);

    let m_list = parse_usize_list(&a.m)?;
    let spec = PipelineSpec {
        sparsifier: SparsifierSpec::Dct, // replaced by learned dictionaries
        sampler: SamplerSpec::Svd,
        balanced: false,
        epsilon: a.epsilon,
        m_list,
    };
    let report = robustness_experiment(&a_train, &b_train, &b_test, &cfg, &spec)?;

    create_dir(&a.out_dir)?;
    let cross_path = a.out_dir.join("cross.csv");
    write_error_curve_csv(&report.cross_curve, &mut open_out(&cross_path)?)?;
    let native_path = a.out_dir.join("native.csv");
    write_error_curve_csv(&report.native_curve, &mut open_out(&native_path)?)?;
    println!(
        "rmse_between_curves={}",
        hscs_core::experiments::fmt17(report.rmse_between_curves)
    );

    RunManifest::new("robustness")
        .parameter("m", &a.m)
        .parameter("epsilon", a.epsilon)
        .parameter("train_fraction", a.train_fraction)
        .parameter("epochs", a.epochs)
        .parameter(
            "rmse_between_curves",
            hscs_core::experiments::fmt17(report.rmse_between_curves),
        )
        .seed("run", a.seed)
        .input_file(&a.scene_a)?
        .input_file(&a.scene_b)?
        .output(&cross_path)
        .output(&native_path)
        .write_beside(&a.out_dir.join("robustness"))?;
    Ok(())
}
