use num_complex::Complex;

use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Real scalar samples on a [`GridSpec`]. Values are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: GridSpec,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn new(grid: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        check_finite(&grid, &values)?;
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: GridSpec, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: GridSpec, c: T) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Sample `f` at every grid point `x = 2π (i, j, k) / n`.
    pub fn from_fn(grid: GridSpec, f: impl Fn([T; 3]) -> T) -> Result<Self> {
        let values = (0..grid.len()).map(|idx| f(grid.point(idx))).collect();
        Self::new(grid, values)
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Field<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.grid, values)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::from_values_unchecked(self.grid, self.values.iter().map(|&v| v * c).collect())
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

pub(crate) fn check_finite<T: Real>(grid: &GridSpec, values: &[T]) -> Result<()> {
    if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        let (i, j, k) = grid.coords(index);
        return Err(Error::NonFinite {
            index,
            i,
            j,
            k,
            value: v.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Fourier coefficients `û_n = (2π)^{-3} ∫ u e^{-i n·x} dx`, stored in the
/// same index order as [`GridSpec`] with signed wavenumbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    grid: GridSpec,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Grid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Coefficient at a wave vector; zero when it is not representable.
    pub fn get(&self, wavevector: [i64; 3]) -> Complex<T> {
        self.grid
            .mode_index(wavevector)
            .map(|idx| self.coeffs[idx])
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn set(&mut self, wavevector: [i64; 3], value: Complex<T>) -> Result<()> {
        let idx = self.grid.mode_index(wavevector).ok_or_else(|| {
            Error::Grid(format!(
                "wave vector {wavevector:?} is outside the {}^3 grid band",
                self.grid.n()
            ))
        })?;
        self.coeffs[idx] = value;
        Ok(())
    }

    /// Set `û_n = c` and `û_{-n} = conj(c)`, keeping the spectrum real.
    pub fn set_real_pair(&mut self, wavevector: [i64; 3], value: Complex<T>) -> Result<()> {
        let neg = [-wavevector[0], -wavevector[1], -wavevector[2]];
        if neg == wavevector {
            return self.set(wavevector, Complex::new(value.re, T::zero()));
        }
        self.set(wavevector, value)?;
        self.set(neg, value.conj())
    }

    /// `max |û_{-n} - conj(û_n)|` over modes whose mirror is representable.
    pub fn conjugate_symmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for (idx, c) in self.coeffs.iter().enumerate() {
            let n = self.grid.wavevector(idx);
            if let Some(j) = self.grid.mode_index([-n[0], -n[1], -n[2]]) {
                worst = worst.max((self.coeffs[j] - c.conj()).norm());
            }
        }
        worst
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|z| z.scale(c)).collect(),
        }
    }

    /// Zero every mode removed by the two-thirds rule.
    pub fn dealias(&mut self) {
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if !self.grid.dealias_keeps(self.grid.wavevector(idx)) {
                *c = Complex::new(T::zero(), T::zero());
            }
        }
    }

    /// Embed into a finer grid, dropping the Nyquist planes of the source.
    pub fn zero_pad(&self, target: GridSpec) -> Result<Self> {
        if target.n() < self.grid.n() {
            return Err(Error::Grid(format!(
                "cannot pad a {}^3 spectrum onto a {}^3 grid",
                self.grid.n(),
                target.n()
            )));
        }
        let mut out = Self::zeros(target);
        let half = (self.grid.n() / 2) as i64;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let n = self.grid.wavevector(idx);
            if n.iter().any(|&w| w == -half) {
                continue;
            }
            out.set(n, *c)?;
        }
        Ok(out)
    }
}

/// Decomposition `u = ū + u_h` with `ū` the spatial mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSplit<T> {
    pub mean: T,
    pub oscillatory: Field<T>,
}
