//! Measurement matrices, sensing matrices with the truncated-SVD fast
//! path, and the rectangular matrix-balancing decomposition.

mod balance;

pub use balance::{balance, balanced_bpdn, balanced_residual, BalancedDecomposition};

use crate::error::{Error, Result};
use crate::io;
use crate::numerics::{svd, Matrix};
use crate::rng::{content_hash, seeded_rng};
use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// What the SVD measurement was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SvdSource {
    Dictionary,
    Dct,
}

/// How a measurement matrix was constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasurementKind {
    Gaussian { seed: u64 },
    Subsample { seed: u64, indices: Vec<usize> },
    SvdOf { source: SvdSource, source_hash: u64 },
}

/// The m x d operator applied to a physical spectrum, `y = phi * x`.
#[derive(Debug, Clone)]
pub struct MeasurementMatrix {
    phi: Matrix,
    kind: MeasurementKind,
    /// For SVD-derived measurements: the matching top-m singular values
    /// and right singular vectors (n x m) of the source matrix.
    svd_payload: Option<(Vec<f64>, Matrix)>,
}

impl MeasurementMatrix {
    pub fn phi(&self) -> &Matrix {
        &self.phi
    }

    pub fn kind(&self) -> &MeasurementKind {
        &self.kind
    }

    pub fn m(&self) -> usize {
        self.phi.rows()
    }

    pub fn d(&self) -> usize {
        self.phi.cols()
    }

    /// Apply to a spectrum: `y = phi * x`.
    pub fn measure(&self, x: &[f64]) -> Vec<f64> {
        self.phi.matvec(x)
    }

    /// Serialize as magic, phi, optional binary SVD payload, kind JSON.
    pub fn write_to(&self, w: &mut impl std::io::Write) -> Result<()> {
        io::write_magic(w, io::MAGIC_MEASUREMENT)?;
        io::write_matrix(w, &self.phi)?;
        match &self.svd_payload {
            Some((sigma, v_m)) => {
                io::write_u32(w, 1)?;
                io::write_u32(w, sigma.len() as u32)?;
                io::write_f64_slice(w, sigma)?;
                io::write_matrix(w, v_m)?;
            }
            None => io::write_u32(w, 0)?,
        }
        let blob = serde_json::to_string(&self.kind)
            .map_err(|e| Error::Parse(format!("kind serialization: {e}")))?;
        io::write_blob(w, &blob)
    }

    pub fn read_from(r: &mut impl std::io::Read) -> Result<Self> {
        io::read_magic(r, io::MAGIC_MEASUREMENT)?;
        let phi = io::read_matrix(r)?;
        let svd_payload = match io::read_u32(r)? {
            0 => None,
            1 => {
                let len = io::read_u32(r)? as usize;
                let sigma = io::read_f64_vec(r, len)?;
                let v_m = io::read_matrix(r)?;
                Some((sigma, v_m))
            }
            other => return Err(Error::Parse(format!("bad payload flag {other}"))),
        };
        let blob = io::read_blob(r)?;
        let kind: MeasurementKind = serde_json::from_str(&blob)
            .map_err(|e| Error::Parse(format!("kind deserialization: {e}")))?;
        Ok(MeasurementMatrix {
            phi,
            kind,
            svd_payload,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut r)
    }
}

fn check_m_d(m: usize, d: usize) -> Result<()> {
    if m < 1 || m > d {
        return Err(Error::InvalidParameter(format!(
            "measurement count m = {m} outside 1..={d}"
        )));
    }
    Ok(())
}

/// Random Gaussian measurements, entries iid N(0, 1/m).
///
/// The 1/m variance makes `phi` approximately norm-preserving, so a fixed
/// BPDN epsilon keeps its meaning as m varies.
pub fn gaussian_measurement(m: usize, d: usize, seed: u64) -> Result<MeasurementMatrix> {
    check_m_d(m, d)?;
    let mut rng = seeded_rng(seed);
    let scale = (1.0 / m as f64).sqrt();
    let normal = StandardNormal;
    let phi = Matrix::from_fn(m, d, |_, _| {
        let g: f64 = normal.sample(&mut rng);
        g * scale
    });
    Ok(MeasurementMatrix {
        phi,
        kind: MeasurementKind::Gaussian { seed },
        svd_payload: None,
    })
}

/// Uniform random band subsampling without replacement; row i is the
/// standard basis vector of the i-th drawn band.
pub fn subsample_measurement(m: usize, d: usize, seed: u64) -> Result<MeasurementMatrix> {
    check_m_d(m, d)?;
    let mut rng = seeded_rng(seed);
    let indices = sample(&mut rng, d, m).into_vec();
    let mut phi = Matrix::zeros(m, d);
    for (i, &band) in indices.iter().enumerate() {
        phi[(i, band)] = 1.0;
    }
    Ok(MeasurementMatrix {
        phi,
        kind: MeasurementKind::Subsample { seed, indices },
        svd_payload: None,
    })
}

/// Adaptive measurements: the transposed first m left singular vectors of
/// a sparsifying matrix, rows orthonormal by construction.
pub fn svd_measurement(
    source_matrix: &Matrix,
    m: usize,
    source: SvdSource,
) -> Result<MeasurementMatrix> {
    let r = source_matrix.rows().min(source_matrix.cols());
    if m < 1 || m > r {
        return Err(Error::InvalidParameter(format!(
            "measurement count m = {m} outside 1..={r} for a {}x{} source",
            source_matrix.rows(),
            source_matrix.cols()
        )));
    }
    let dec = svd(source_matrix)?;
    let cols: Vec<usize> = (0..m).collect();
    let u_m = dec.u.select_columns(&cols);
    let v_m = dec.v.select_columns(&cols);
    let sigma_m = dec.sigma[..m].to_vec();
    Ok(MeasurementMatrix {
        phi: u_m.transpose(),
        kind: MeasurementKind::SvdOf {
            source,
            source_hash: content_hash(source_matrix.data()),
        },
        svd_payload: Some((sigma_m, v_m)),
    })
}

/// The reduced system for an SVD-derived sensing matrix.
#[derive(Debug, Clone)]
pub struct FastPath {
    pub sigma_m: Vec<f64>,
    pub v_m: Matrix,
}

/// The composed operator `A = phi * D` that BPDN inverts.
#[derive(Debug, Clone)]
pub struct SensingMatrix {
    a: Matrix,
    fast_path: Option<FastPath>,
    source: String,
}

impl SensingMatrix {
    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn fast_path(&self) -> Option<&FastPath> {
        self.fast_path.as_ref()
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// Compose a sensing matrix from a measurement matrix and a sparsifier.
///
/// When `phi` was derived by SVD from this very sparsifier (verified by
/// content hash), the product is formed directly as
/// `diag(sigma_m) * v_mᵀ` instead of an explicit multiplication.
pub fn sensing_matrix(
    phi: &MeasurementMatrix,
    sparsifier: &Matrix,
    sparsifier_id: &str,
) -> Result<SensingMatrix> {
    if phi.d() != sparsifier.rows() {
        return Err(Error::DimensionMismatch(format!(
            "measurement matrix expects {} bands, sparsifier has {}",
            phi.d(),
            sparsifier.rows()
        )));
    }
    if let (
        MeasurementKind::SvdOf { source_hash, .. },
        Some((sigma_m, v_m)),
    ) = (&phi.kind, &phi.svd_payload)
    {
        if *source_hash == content_hash(sparsifier.data()) {
            let m = sigma_m.len();
            let n = v_m.rows();
            let mut a = Matrix::zeros(m, n);
            for i in 0..m {
                let s = sigma_m[i];
                for j in 0..n {
                    a[(i, j)] = s * v_m[(j, i)];
                }
            }
            return Ok(SensingMatrix {
                a,
                fast_path: Some(FastPath {
                    sigma_m: sigma_m.clone(),
                    v_m: v_m.clone(),
                }),
                source: format!("svd({sparsifier_id})"),
            });
        }
    }
    Ok(SensingMatrix {
        a: phi.phi.matmul(sparsifier),
        fast_path: None,
        source: format!("{:?} * {sparsifier_id}", kind_tag(&phi.kind)),
    })
}

fn kind_tag(kind: &MeasurementKind) -> &'static str {
    match kind {
        MeasurementKind::Gaussian { .. } => "gaussian",
        MeasurementKind::Subsample { .. } => "subsample",
        MeasurementKind::SvdOf { .. } => "svd",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dct_basis;
    use rand::Rng;

    #[test]
    fn gaussian_is_seeded_and_finite() {
        let a = gaussian_measurement(1, 1, 9).unwrap();
        assert!(a.phi()[(0, 0)].is_finite());

        let b = gaussian_measurement(50, 148, 4).unwrap();
        let c = gaussian_measurement(50, 148, 4).unwrap();
        assert_eq!(b.phi().data(), c.phi().data());
        let e = gaussian_measurement(50, 148, 5).unwrap();
        assert_ne!(b.phi().data(), e.phi().data());
    }

    #[test]
    fn gaussian_columns_have_near_unit_norm() {
        let phi = gaussian_measurement(200, 400, 11).unwrap();
        let mut mean = 0.0;
        for j in 0..400 {
            mean += phi
                .phi()
                .col(j)
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
        }
        mean /= 400.0;
        assert!((mean - 1.0).abs() <= 0.05, "mean column norm {mean}");
    }

    #[test]
    fn subsample_full_is_permuted_identity() {
        let phi = subsample_measurement(6, 6, 3).unwrap();
        let mut seen = [false; 6];
        for i in 0..6 {
            let row = phi.phi().row(i);
            let ones: Vec<usize> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, _)| j)
                .collect();
            assert_eq!(ones.len(), 1);
            assert_eq!(row[ones[0]], 1.0);
            assert!(!seen[ones[0]], "band chosen twice");
            seen[ones[0]] = true;
        }
    }

    #[test]
    fn subsample_band_choice_uniform_over_seeds() {
        let mut counts = [0usize; 3];
        let seeds = 10_000;
        for seed in 0..seeds {
            let phi = subsample_measurement(1, 3, seed).unwrap();
            match &phi.kind {
                MeasurementKind::Subsample { indices, .. } => counts[indices[0]] += 1,
                _ => unreachable!(),
            }
        }
        for (band, &c) in counts.iter().enumerate() {
            let freq = c as f64 / seeds as f64;
            assert!(
                (freq - 1.0 / 3.0).abs() <= 0.05,
                "band {band} frequency {freq}"
            );
        }
    }

    #[test]
    fn subsample_measure_gathers_exactly() {
        let phi = subsample_measurement(3, 8, 2).unwrap();
        let x: Vec<f64> = (0..8).map(|i| (i as f64) * 1.5 - 2.0).collect();
        let y = phi.measure(&x);
        match &phi.kind {
            MeasurementKind::Subsample { indices, .. } => {
                for (i, &band) in indices.iter().enumerate() {
                    assert_eq!(y[i], x[band]);
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn svd_measurement_rows_orthonormal() {
        let mut rng = crate::rng::seeded_rng(31);
        let dict = Matrix::from_fn(12, 20, |_, _| rng.random_range(-1.0..1.0));
        for m in 1..=12 {
            let phi = svd_measurement(&dict, m, SvdSource::Dictionary).unwrap();
            let gram = phi.phi().matmul(&phi.phi().transpose());
            assert!(
                gram.max_dist_from_identity() <= 1e-10,
                "m = {m}: rows not orthonormal"
            );
        }
    }

    #[test]
    fn svd_measurement_square_orthogonal_at_full_m() {
        let psi = dct_basis(9);
        let phi = svd_measurement(&psi, 9, SvdSource::Dct).unwrap();
        let gram = phi.phi().transpose().matmul(phi.phi());
        assert!(gram.max_dist_from_identity() <= 1e-10);
    }

    #[test]
    fn sampling_ratio_report_matches_band_count_148() {
        // 148 bands: 1 measurement is 0.68%, 5 measurements are 3.38%.
        let ratio = |m: usize| format!("{:.2}%", 100.0 * m as f64 / 148.0);
        assert_eq!(ratio(1), "0.68%");
        assert_eq!(ratio(5), "3.38%");
    }

    #[test]
    fn identity_subsample_reproduces_sparsifier() {
        // A subsample of all bands in order makes phi the identity.
        let d = 7;
        let phi = MeasurementMatrix {
            phi: Matrix::identity(d),
            kind: MeasurementKind::Subsample {
                seed: 0,
                indices: (0..d).collect(),
            },
            svd_payload: None,
        };
        let mut rng = crate::rng::seeded_rng(8);
        let dict = Matrix::from_fn(d, 10, |_, _| rng.random_range(-1.0..1.0));
        let a = sensing_matrix(&phi, &dict, "dict").unwrap();
        assert_eq!(a.a().data(), dict.data());
    }

    #[test]
    fn dsvd_fast_path_matches_algebraic_identity() {
        let mut rng = crate::rng::seeded_rng(12);
        let dict = Matrix::from_fn(10, 16, |_, _| rng.random_range(-1.0..1.0));
        for m in 1..=10 {
            let phi = svd_measurement(&dict, m, SvdSource::Dictionary).unwrap();
            let a = sensing_matrix(&phi, &dict, "dict").unwrap();
            assert!(a.fast_path().is_some(), "m = {m}: fast path not taken");
            let direct = phi.phi().matmul(&dict);
            let gap = direct.sub(a.a()).max_abs();
            assert!(gap <= 1e-10, "m = {m}: |U_m' D - S_m V_m'| = {gap}");
        }
    }

    #[test]
    fn foreign_sparsifier_skips_fast_path() {
        let mut rng = crate::rng::seeded_rng(13);
        let dict = Matrix::from_fn(8, 12, |_, _| rng.random_range(-1.0..1.0));
        let other = Matrix::from_fn(8, 12, |_, _| rng.random_range(-1.0..1.0));
        let phi = svd_measurement(&dict, 4, SvdSource::Dictionary).unwrap();
        let a = sensing_matrix(&phi, &other, "other").unwrap();
        assert!(a.fast_path().is_none());
        let direct = phi.phi().matmul(&other);
        assert_eq!(a.a().data(), direct.data());
    }

    #[test]
    fn product_matches_naive_triple_loop() {
        let mut rng = crate::rng::seeded_rng(14);
        let phi = gaussian_measurement(5, 9, 3).unwrap();
        let dict = Matrix::from_fn(9, 13, |_, _| rng.random_range(-1.0..1.0));
        let a = sensing_matrix(&phi, &dict, "dict").unwrap();
        for i in 0..5 {
            for j in 0..13 {
                let mut acc = 0.0;
                for k in 0..9 {
                    acc += phi.phi()[(i, k)] * dict[(k, j)];
                }
                assert!((a.a()[(i, j)] - acc).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn measurement_serialization_roundtrip() {
        let mut rng = crate::rng::seeded_rng(15);
        let dict = Matrix::from_fn(9, 14, |_, _| rng.random_range(-1.0..1.0));
        for phi in [
            gaussian_measurement(4, 9, 2).unwrap(),
            subsample_measurement(4, 9, 2).unwrap(),
            svd_measurement(&dict, 4, SvdSource::Dictionary).unwrap(),
        ] {
            let mut buf = Vec::new();
            phi.write_to(&mut buf).unwrap();
            let back = MeasurementMatrix::read_from(&mut buf.as_slice()).unwrap();
            assert_eq!(back.phi().data(), phi.phi().data());
            assert_eq!(back.kind(), phi.kind());
            let mut buf2 = Vec::new();
            back.write_to(&mut buf2).unwrap();
            assert_eq!(buf, buf2);
        }
    }
}
