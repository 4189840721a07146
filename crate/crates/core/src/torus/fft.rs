use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::field::{check_finite, Field, Spectrum};
use super::grid::GridSpec;
use crate::error::Result;
use crate::scalar::Real;

/// Reusable forward/inverse 3-D transform for one grid size.
///
/// Forward output is normalised so that `û_0` is the grid mean; the inverse
/// is the plain trigonometric sum `u(x) = Σ û_n e^{i n·x}`.
#[derive(Clone)]
pub struct SpectralPlan<T: Real> {
    grid: GridSpec,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for SpectralPlan<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan").field("grid", &self.grid).finish()
    }
}

impl<T: Real> SpectralPlan<T> {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.n()),
            inverse: planner.plan_fft_inverse(grid.n()),
        }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn forward(&self, field: &Field<T>) -> Result<Spectrum<T>> {
        self.grid.ensure_same(&field.grid())?;
        check_finite(&self.grid, field.values())?;
        Ok(self.forward_unchecked(field.values()))
    }

    pub(crate) fn forward_unchecked(&self, values: &[T]) -> Spectrum<T> {
        let mut buf: Vec<Complex<T>> = values
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        self.transform_3d(&mut buf, &self.forward);
        let norm = T::one() / T::lit(self.grid.len() as f64);
        for c in buf.iter_mut() {
            *c = c.scale(norm);
        }
        Spectrum::from_coeffs(self.grid, buf).expect("buffer sized from grid")
    }

    /// Complex samples of the trigonometric sum.
    pub fn inverse_complex(&self, spectrum: &Spectrum<T>) -> Vec<Complex<T>> {
        let mut buf = spectrum.coeffs().to_vec();
        self.transform_3d(&mut buf, &self.inverse);
        buf
    }

    /// Real part of the trigonometric sum. Exact for conjugate-symmetric input.
    pub fn inverse(&self, spectrum: &Spectrum<T>) -> Result<Field<T>> {
        self.grid.ensure_same(&spectrum.grid())?;
        let values = self
            .inverse_complex(spectrum)
            .into_iter()
            .map(|c| c.re)
            .collect();
        Field::new(self.grid, values)
    }

    fn transform_3d(&self, buf: &mut [Complex<T>], fft: &Arc<dyn Fft<T>>) {
        let n = self.grid.n();
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];

        // last axis is contiguous
        fft.process_with_scratch(buf, &mut scratch);

        let mut line = vec![Complex::new(T::zero(), T::zero()); n];
        // middle axis
        for i in 0..n {
            for k in 0..n {
                for (j, l) in line.iter_mut().enumerate() {
                    *l = buf[(i * n + j) * n + k];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, l) in line.iter().enumerate() {
                    buf[(i * n + j) * n + k] = *l;
                }
            }
        }
        // first axis
        for j in 0..n {
            for k in 0..n {
                for (i, l) in line.iter_mut().enumerate() {
                    *l = buf[(i * n + j) * n + k];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, l) in line.iter().enumerate() {
                    buf[(i * n + j) * n + k] = *l;
                }
            }
        }
    }
}

/// Forward transform with a one-off plan.
pub fn transform<T: Real>(field: &Field<T>) -> Result<Spectrum<T>> {
    SpectralPlan::new(field.grid()).forward(field)
}

/// Inverse transform with a one-off plan.
pub fn inverse_transform<T: Real>(spectrum: &Spectrum<T>) -> Result<Field<T>> {
    SpectralPlan::new(spectrum.grid()).inverse(spectrum)
}
