//! CSV schemas and the machine-readable run manifest.
//!
//! Every float is serialized with 17 significant digits so values
//! round-trip f64 exactly and repeated runs are byte-comparable.

use super::ErrorCurve;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// 17-significant-digit decimal rendering.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `m,mean_rel_err,std_rel_err,n_pixels,n_failed` per measurement count.
pub fn write_error_curve_csv(curve: &ErrorCurve, w: &mut impl Write) -> Result<()> {
    writeln!(w, "m,mean_rel_err,std_rel_err,n_pixels,n_failed")?;
    for (i, &m) in curve.m_values.iter().enumerate() {
        writeln!(
            w,
            "{m},{},{},{},{}",
            fmt17(curve.mean_rel_error[i]),
            fmt17(curve.std_rel_error[i]),
            curve.n_pixels[i],
            curve.n_failed[i]
        )?;
    }
    Ok(())
}

/// `m,cond_unbalanced,cond_balanced` from two paired condition curves.
pub fn write_condition_curve_csv(
    raw: &[(usize, f64)],
    balanced: &[(usize, f64)],
    w: &mut impl Write,
) -> Result<()> {
    if raw.len() != balanced.len() {
        return Err(Error::DimensionMismatch(
            "condition curves must share m values".into(),
        ));
    }
    writeln!(w, "m,cond_unbalanced,cond_balanced")?;
    for ((m_r, c_r), (m_b, c_b)) in raw.iter().zip(balanced) {
        if m_r != m_b {
            return Err(Error::DimensionMismatch(
                "condition curves must share m values".into(),
            ));
        }
        writeln!(w, "{m_r},{},{}", fmt17(*c_r), fmt17(*c_b))?;
    }
    Ok(())
}

/// `band,wavelength_nm,truth,reconstruction` for a single pixel; the
/// wavelength column is left empty when unknown.
pub fn write_spectrum_trace_csv(
    truth: &[f64],
    reconstruction: &[f64],
    wavelengths_nm: Option<&[f64]>,
    w: &mut impl Write,
) -> Result<()> {
    if truth.len() != reconstruction.len() {
        return Err(Error::DimensionMismatch(
            "truth and reconstruction lengths differ".into(),
        ));
    }
    writeln!(w, "band,wavelength_nm,truth,reconstruction")?;
    for (i, (t, r)) in truth.iter().zip(reconstruction).enumerate() {
        let wl = wavelengths_nm
            .and_then(|ws| ws.get(i))
            .map(|x| fmt17(*x))
            .unwrap_or_default();
        writeln!(w, "{i},{wl},{},{}", fmt17(*t), fmt17(*r))?;
    }
    Ok(())
}

/// One input named by a run manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestInput {
    pub path: String,
    pub content_hash: String,
}

/// Machine-readable record written beside every output: what ran, on
/// which inputs, with which seeds and parameters. Contains no timestamps,
/// so identical runs write identical manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub parameters: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<ManifestInput>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            parameters: BTreeMap::new(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn parameter(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn seed(mut self, key: &str, value: u64) -> Self {
        self.seeds.insert(key.into(), value);
        self
    }

    pub fn input_file(mut self, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let words: Vec<f64> = bytes.iter().map(|&b| b as f64).collect();
        self.inputs.push(ManifestInput {
            path: path.display().to_string(),
            content_hash: format!("{:016x}", crate::rng::content_hash(&words)),
        });
        Ok(self)
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// Write `<basename>.manifest.json` beside the given output path.
    pub fn write_beside(&self, output: &Path) -> Result<()> {
        let file_name = output
            .file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_else(|| "run".to_string());
        let path = output.with_file_name(format!("{file_name}.manifest.json"));
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("manifest serialization: {e}")))?;
        std::fs::write(path, json)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_roundtrips_f64() {
        for &x in &[0.1, 1.0 / 3.0, 2.5e-300, -7.1e12, 0.0] {
            let back: f64 = fmt17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {}", fmt17(x));
        }
    }

    #[test]
    fn error_curve_schema() {
        let curve = ErrorCurve {
            m_values: vec![2, 4],
            mean_rel_error: vec![0.5, 0.25],
            std_rel_error: vec![0.1, 0.05],
            n_pixels: vec![10, 10],
            n_failed: vec![0, 1],
            per_pixel: None,
            pipeline: "dsvd".into(),
            dataset: "test".into(),
        };
        let mut buf = Vec::new();
        write_error_curve_csv(&curve, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "m,mean_rel_err,std_rel_err,n_pixels,n_failed");
        let first = lines.next().unwrap();
        assert!(first.starts_with("2,5.0000000000000000e-1,"));
        assert!(first.ends_with(",10,0"));
    }

    #[test]
    fn manifest_is_deterministic() {
        let m1 = RunManifest::new("compare")
            .parameter("epsilon", 0.01)
            .seed("split", 7);
        let m2 = RunManifest::new("compare")
            .parameter("epsilon", 0.01)
            .seed("split", 7);
        assert_eq!(
            serde_json::to_string(&m1).unwrap(),
            serde_json::to_string(&m2).unwrap()
        );
    }
}
