//! Hyperspectral cube ingestion, per-pixel spectra, train/test splitting,
//! and the synthetic-scene generator used for desk-scale verification.

mod envi;
mod spectra;
mod synth;

pub use envi::{read_envi, write_envi, HsiCube};
pub use spectra::{split_train_test, to_spectra, PixelId, SpectraSet};
pub use synth::{synth_scene, SynthScene};
