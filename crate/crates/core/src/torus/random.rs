//! Seeded random band-limited fields, used for calibration and property tests.

use num_complex::Complex;
use rand::Rng;

use super::fft::SpectralPlan;
use super::field::{Field, Spectrum};
use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape of a random band-limited field family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandLimited {
    /// Largest `|n_k|` per axis that may be populated.
    pub k_max: i64,
    /// Coefficient envelope `(1 + |n|²)^{-decay/2}`.
    pub decay: f64,
    pub zero_mean: bool,
}

impl BandLimited {
    pub fn new(k_max: i64, decay: f64) -> Self {
        Self {
            k_max,
            decay,
            zero_mean: false,
        }
    }

    pub fn zero_mean(mut self) -> Self {
        self.zero_mean = true;
        self
    }

    /// Draw a real spectrum with conjugate symmetry and no Nyquist content.
    pub fn spectrum<T: Real, R: Rng + ?Sized>(&self, grid: GridSpec, rng: &mut R) -> Result<Spectrum<T>> {
        if self.k_max < 0 || 2 * self.k_max >= grid.n() as i64 {
            return Err(Error::Grid(format!(
                "k_max = {} does not fit below the Nyquist band of a {}^3 grid",
                self.k_max,
                grid.n()
            )));
        }
        let mut s = Spectrum::zeros(grid);
        let k = self.k_max;
        for n1 in -k..=k {
            for n2 in -k..=k {
                for n3 in -k..=k {
                    let n = [n1, n2, n3];
                    // visit each ± pair once
                    if n <= [-n1, -n2, -n3] && n != [0, 0, 0] {
                        continue;
                    }
                    if n == [0, 0, 0] && self.zero_mean {
                        continue;
                    }
                    let r2 = (n1 * n1 + n2 * n2 + n3 * n3) as f64;
                    let env = (1.0 + r2).powf(-self.decay / 2.0);
                    let re = rng.gen_range(-1.0..1.0) * env;
                    let im = if n == [0, 0, 0] { 0.0 } else { rng.gen_range(-1.0..1.0) * env };
                    s.set_real_pair(n, Complex::new(T::lit(re), T::lit(im)))?;
                }
            }
        }
        Ok(s)
    }

    pub fn field<T: Real, R: Rng + ?Sized>(&self, grid: GridSpec, rng: &mut R) -> Result<Field<T>> {
        SpectralPlan::new(grid).inverse(&self.spectrum(grid, rng)?)
    }

    /// Draw a field and rescale it so that its grid sup-norm equals `sup`.
    pub fn field_with_sup<T: Real, R: Rng + ?Sized>(
        &self,
        grid: GridSpec,
        sup: T,
        rng: &mut R,
    ) -> Result<Field<T>> {
        let f = self.field::<T, R>(grid, rng)?;
        let cur = super::norms::sup_norm(&f);
        if cur == T::zero() {
            return Ok(f);
        }
        Ok(f.scaled(sup / cur))
    }
}
