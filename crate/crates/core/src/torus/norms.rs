//! Spectral calculus on the torus: derivatives, Sobolev norms, means.
//!
//! Every integral is evaluated through Parseval,
//! `∫ u v̄ dx = (2π)³ Σ_n û_n conj(v̂_n)`, which is exact for trigonometric
//! polynomials resolved by the grid.

use num_complex::Complex;

use super::fft::SpectralPlan;
use super::field::{Field, MeanSplit, Spectrum};
use super::grid::GridSpec;
use crate::error::Result;
use crate::scalar::Real;

/// All multi-indices `α ∈ N³` with `|α| <= m`, in graded lexicographic order.
pub fn multi_indices(m: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for total in 0..=m {
        for a1 in (0..=total).rev() {
            for a2 in (0..=total - a1).rev() {
                out.push([a1, a2, total - a1 - a2]);
            }
        }
    }
    out
}

/// `W_m(n) = Σ_{|α|<=m} Π_k n_k^{2 α_k}`, the symbol of the `H^m` norm.
pub fn sobolev_weight<T: Real>(wavevector: [i64; 3], m: u32) -> T {
    let sq: [T; 3] = wavevector.map(|w| T::lit((w * w) as f64));
    let mut total = T::zero();
    let mut p1 = T::one();
    for a1 in 0..=m {
        let mut p2 = T::one();
        for a2 in 0..=(m - a1) {
            let mut p3 = T::one();
            for _a3 in 0..=(m - a1 - a2) {
                total += p1 * p2 * p3;
                p3 *= sq[2];
            }
            p2 *= sq[1];
        }
        p1 *= sq[0];
    }
    total
}

/// Precomputed `W_m(n)` and `|n|²` for every mode of a grid.
#[derive(Debug, Clone)]
pub struct SobolevWeights<T> {
    grid: GridSpec,
    m: u32,
    weights: Vec<T>,
    n_sq: Vec<T>,
}

impl<T: Real> SobolevWeights<T> {
    pub fn new(grid: GridSpec, m: u32) -> Self {
        let mut weights = Vec::with_capacity(grid.len());
        let mut n_sq = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let n = grid.wavevector(idx);
            weights.push(sobolev_weight(n, m));
            n_sq.push(T::lit((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64));
        }
        Self {
            grid,
            m,
            weights,
            n_sq,
        }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    #[inline]
    pub fn n_sq(&self) -> &[T] {
        &self.n_sq
    }

    /// `‖u‖²_{H^m}` from a spectrum.
    pub fn norm_sq(&self, s: &Spectrum<T>) -> T {
        let sum: T = s
            .coeffs()
            .iter()
            .zip(&self.weights)
            .map(|(c, &w)| w * c.norm_sqr())
            .sum();
        T::torus_volume() * sum
    }

    /// `‖∇u‖²_{H^m} = Σ_{|α|<=m} ‖∇∂_α u‖²_{L²}`.
    pub fn grad_norm_sq(&self, s: &Spectrum<T>) -> T {
        let sum: T = s
            .coeffs()
            .iter()
            .zip(self.weights.iter().zip(&self.n_sq))
            .map(|(c, (&w, &k2))| w * k2 * c.norm_sqr())
            .sum();
        T::torus_volume() * sum
    }

    /// `Σ_{|α|<=m} ∫ ∂_α u ∂_α v dx` for real fields given by their spectra.
    pub fn inner(&self, a: &Spectrum<T>, b: &Spectrum<T>) -> T {
        let sum: T = a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .zip(&self.weights)
            .map(|((x, y), &w)| w * (x * y.conj()).re)
            .sum();
        T::torus_volume() * sum
    }
}

/// Multiply each coefficient by `Π_k (i n_k)^{a_k}`.
///
/// For an odd derivative order along an axis the Nyquist plane of that axis
/// is zeroed, since its sign is ambiguous on an even grid.
pub fn spectral_derivative<T: Real>(spectrum: &Spectrum<T>, multi_index: [u32; 3]) -> Spectrum<T> {
    let grid = spectrum.grid();
    let total: u32 = multi_index.iter().sum();
    // i^total
    let unit = match total % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    };
    let mut out = spectrum.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (i, j, k) = grid.coords(idx);
        let pos = [i, j, k];
        let n = grid.wavevector(idx);
        let mut factor = T::one();
        let mut zero = false;
        for axis in 0..3 {
            let a = multi_index[axis];
            if a == 0 {
                continue;
            }
            if a % 2 == 1 && grid.is_nyquist(pos[axis]) {
                zero = true;
                break;
            }
            factor *= T::lit(n[axis] as f64).powi(a as i32);
        }
        *c = if zero {
            Complex::new(T::zero(), T::zero())
        } else {
            (*c * unit).scale(factor)
        };
    }
    out
}

/// `‖u‖_{H^m} = (Σ_{|α|<=m} ‖∂_α u‖²_{L²})^{1/2}`; `m = 0` is the L² norm.
pub fn sobolev_norm<T: Real>(field: &Field<T>, m: u32) -> Result<T> {
    let s = SpectralPlan::new(field.grid()).forward(field)?;
    Ok(sobolev_norm_spectrum(&s, m))
}

pub fn sobolev_norm_spectrum<T: Real>(spectrum: &Spectrum<T>, m: u32) -> T {
    let sum: T = spectrum
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| sobolev_weight::<T>(spectrum.grid().wavevector(idx), m) * c.norm_sqr())
        .sum();
    (T::torus_volume() * sum).sqrt()
}

/// `‖∇u‖_{L²}` via Parseval.
pub fn gradient_l2_norm<T: Real>(spectrum: &Spectrum<T>) -> T {
    let grid = spectrum.grid();
    let sum: T = spectrum
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let n = grid.wavevector(idx);
            T::lit((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64) * c.norm_sqr()
        })
        .sum();
    (T::torus_volume() * sum).sqrt()
}

/// Grid maximum of `|u|`, used as the `L^∞` norm.
pub fn sup_norm<T: Real>(field: &Field<T>) -> T {
    field
        .values()
        .iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Split off the spatial mean `ū = (2π)^{-3} ∫ u dx` (the grid average).
pub fn mean_decompose<T: Real>(field: &Field<T>) -> MeanSplit<T> {
    let n = T::lit(field.values().len() as f64);
    let mean = field.values().iter().copied().sum::<T>() / n;
    let oscillatory = Field::from_values_unchecked(
        field.grid(),
        field.values().iter().map(|&v| v - mean).collect(),
    );
    MeanSplit { mean, oscillatory }
}

/// `∫ u v dx` over the torus for real fields (grid quadrature, which is the
/// discrete Parseval sum).
pub fn l2_inner<T: Real>(u: &Field<T>, v: &Field<T>) -> Result<T> {
    u.grid().ensure_same(&v.grid())?;
    let s: T = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(&a, &b)| a * b)
        .sum();
    Ok(s * T::torus_volume() / T::lit(u.values().len() as f64))
}

/// Product `u v` evaluated on the grid of twice the resolution, so that band
/// limited inputs produce an unaliased product spectrum.
pub fn dealiased_product<T: Real>(u: &Field<T>, v: &Field<T>) -> Result<Spectrum<T>> {
    u.grid().ensure_same(&v.grid())?;
    let coarse = SpectralPlan::new(u.grid());
    let fine_grid = GridSpec::new(2 * u.grid().n())?;
    let fine = SpectralPlan::new(fine_grid);
    let uf = fine.inverse(&coarse.forward(u)?.zero_pad(fine_grid)?)?;
    let vf = fine.inverse(&coarse.forward(v)?.zero_pad(fine_grid)?)?;
    fine.forward(&uf.zip_with(&vf, |a, b| a * b)?)
}
