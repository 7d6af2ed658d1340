//! Synthetic FTIR-like spectra with a water-dependent absorbance band.
//!
//! Every sample is a single Gaussian band plus independent Gaussian noise per
//! wavelength. The band height grows linearly with the water fraction of the
//! sample's class, so class means are ordered by water content.

use rand_distr::{Distribution, Normal};

use crate::data::{label_table, seeded_rng, SpectralDataset, WavelengthAxis, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthClass<T> {
    pub name: String,
    /// In `[0, 1]`.
    pub water_fraction: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec<T> {
    pub n_per_class: usize,
    pub classes: Vec<SynthClass<T>>,
    pub axis: WavelengthAxis<T>,
    pub peak_center_nm: T,
    /// Standard deviation of the band in nm.
    pub peak_width_nm: T,
    pub base_amplitude: T,
    pub water_gain: T,
    pub noise_sd: T,
    pub seed: u64,
}

impl<T: Scalar> Default for SynthSpec<T> {
    /// Three classes at 0, 10 and 20 % water, 14 samples each, 729 bands
    /// between 2500 and 4000 nm.
    fn default() -> Self {
        let class = |name: &str, w: f64| SynthClass {
            name: name.to_string(),
            water_fraction: T::of(w),
        };
        Self {
            n_per_class: 14,
            classes: vec![
                class("authentic", 0.0),
                class("adulterated10", 0.1),
                class("adulterated20", 0.2),
            ],
            axis: WavelengthAxis::linspace(T::of(2500.0), T::of(4000.0), 729).expect("valid default axis"),
            peak_center_nm: T::of(3450.0),
            peak_width_nm: T::of(150.0),
            base_amplitude: T::one(),
            water_gain: T::of(2.0),
            noise_sd: T::of(0.01),
            seed: DEFAULT_SEED,
        }
    }
}

impl<T: Scalar> SynthSpec<T> {
    fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 || self.classes.is_empty() {
            return Err(Error::invalid("synthetic spec needs at least one class and one sample per class"));
        }
        for (i, a) in self.classes.iter().enumerate() {
            if !(a.water_fraction >= T::zero() && a.water_fraction <= T::one()) {
                return Err(Error::invalid(format!(
                    "water fraction of `{}` must lie in [0, 1]",
                    a.name
                )));
            }
            if self.classes[..i].iter().any(|b| b.water_fraction == a.water_fraction) {
                return Err(Error::invalid("water fractions must be distinct across classes"));
            }
        }
        if !(self.noise_sd >= T::zero()) || !self.noise_sd.is_finite() {
            return Err(Error::invalid("noise_sd must be finite and non-negative"));
        }
        if !(self.peak_width_nm > T::zero()) {
            return Err(Error::invalid("peak_width_nm must be positive"));
        }
        Ok(())
    }

    /// Noise-free absorbance at wavelength `w` for a given water fraction.
    pub fn clean_absorbance(&self, w: T, water_fraction: T) -> T {
        let z = (w - self.peak_center_nm) / self.peak_width_nm;
        self.base_amplitude * (T::one() + self.water_gain * water_fraction) * (-T::of(0.5) * z * z).exp()
    }
}

/// Samples are grouped by class in the order the classes are listed.
pub fn generate<T: Scalar>(spec: &SynthSpec<T>) -> Result<SpectralDataset<T>> {
    spec.validate()?;
    let d = spec.axis.len();
    let n = spec.n_per_class * spec.classes.len();
    let mut rng = seeded_rng(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd.to_f64_lossy()).map_err(|e| Error::invalid(e.to_string()))?;
    let mut data = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for (id, class) in spec.classes.iter().enumerate() {
        let clean: Vec<T> = spec
            .axis
            .values()
            .iter()
            .map(|&w| spec.clean_absorbance(w, class.water_fraction))
            .collect();
        for _ in 0..spec.n_per_class {
            data.extend(clean.iter().map(|&a| a + T::of(noise.sample(&mut rng))));
            y.push(id);
        }
    }
    let names: Vec<&str> = spec.classes.iter().map(|c| c.name.as_str()).collect();
    SpectralDataset::new(Matrix::from_vec(n, d, data)?, y, spec.axis.clone(), label_table(&names)?)
}
