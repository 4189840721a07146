use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform `n × n × n` grid on `[0, 2π)³`.
///
/// Storage order is row-major with the third axis fastest:
/// `index = (i * n + j) * n + k` for the point `2π (i, j, k) / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n_per_axis: usize) -> Result<Self> {
        if n_per_axis < 4 || !n_per_axis.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "points per axis must be even and at least 4, got {n_per_axis}"
            )));
        }
        Ok(Self { n: n_per_axis })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `n³`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let k = index % self.n;
        let j = (index / self.n) % self.n;
        let i = index / (self.n * self.n);
        (i, j, k)
    }

    /// Signed wavenumber stored at position `i` along one axis, in `[-n/2, n/2)`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let half = self.n / 2;
        if i < half {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn wavevector(&self, index: usize) -> [i64; 3] {
        let (i, j, k) = self.coords(index);
        [self.wavenumber(i), self.wavenumber(j), self.wavenumber(k)]
    }

    /// Storage index of a wave vector, if it is representable on this grid.
    pub fn mode_index(&self, wavevector: [i64; 3]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut pos = [0usize; 3];
        for (p, &w) in pos.iter_mut().zip(wavevector.iter()) {
            if w < -half || w >= half {
                return None;
            }
            *p = if w >= 0 { w as usize } else { (w + self.n as i64) as usize };
        }
        Some(self.index(pos[0], pos[1], pos[2]))
    }

    /// Whether axis position `i` holds the Nyquist wavenumber `-n/2`.
    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Two-thirds rule: keep modes with `3 |n_k| <= n` on every axis.
    #[inline]
    pub fn dealias_keeps(&self, wavevector: [i64; 3]) -> bool {
        wavevector
            .iter()
            .all(|w| 3 * w.unsigned_abs() as usize <= self.n)
    }

    #[inline]
    pub fn spacing<T: Real>(&self) -> T {
        T::TAU() / T::lit(self.n as f64)
    }

    /// Physical coordinates of a grid point.
    pub fn point<T: Real>(&self, index: usize) -> [T; 3] {
        let (i, j, k) = self.coords(index);
        let h = self.spacing::<T>();
        [
            h * T::lit(i as f64),
            h * T::lit(j as f64),
            h * T::lit(k as f64),
        ]
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small_grids() {
        assert!(GridSpec::new(3).is_err());
        assert!(GridSpec::new(2).is_err());
        assert!(GridSpec::new(7).is_err());
        assert!(GridSpec::new(4).is_ok());
    }

    #[test]
    fn index_round_trip() {
        let g = GridSpec::new(6).unwrap();
        for idx in 0..g.len() {
            let (i, j, k) = g.coords(idx);
            assert_eq!(g.index(i, j, k), idx);
            assert_eq!(g.mode_index(g.wavevector(idx)), Some(idx));
        }
    }

    #[test]
    fn wavenumbers_cover_half_open_band() {
        let g = GridSpec::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!(g.is_nyquist(4));
        assert_eq!(g.mode_index([4, 0, 0]), None);
    }

    #[test]
    fn dealias_cutoff() {
        let g = GridSpec::new(16).unwrap();
        assert!(g.dealias_keeps([5, -5, 0]));
        assert!(!g.dealias_keeps([6, 0, 0]));
        let g4 = GridSpec::new(4).unwrap();
        assert!(g4.dealias_keeps([1, -1, 1]));
        assert!(!g4.dealias_keeps([-2, 0, 0]));
    }
}
