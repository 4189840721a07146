//! Empirical constants for the Sobolev embedding, the algebra property and
//! the Moser composition estimate.
//!
//! None of these constants has a usable closed form at the precision the
//! verifier needs, so each one is measured as the largest observed ratio
//! over a seeded family of random band-limited fields and multiplied by a
//! safety factor. Products and compositions are evaluated on a grid of
//! twice the resolution.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::random::BandLimited;
use crate::torus::{multi_indices, GridSpec, SobolevWeights, SpectralPlan, Spectrum};

pub const FORMAT_VERSION: i64 = 1;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SAMPLES: usize = 128;
pub const SAFETY_FACTOR: f64 = 1.5;
/// Environment variable naming a constants file to load instead of calibrating.
pub const CONSTANTS_ENV: &str = "DAMPWAVE_CONSTANTS";

const EXPONENTS: [f64; 6] = [-1.5, -0.5, 0.5, 1.5, 2.5, 3.5];
const SUP_LEVELS: [f64; 4] = [0.1, 0.3, 0.5, 0.7];

#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    pub version: i64,
    pub grid: usize,
    pub m: u32,
    pub seed: u64,
    pub samples: usize,
    pub safety_factor: f64,
    /// `‖u‖_{L^∞} <= c_sobolev ‖u‖_{H^m}`
    pub c_sobolev: f64,
    /// `‖uv‖_{H^m} <= c_algebra ‖u‖_{H^m} ‖v‖_{H^m}`
    pub c_algebra: f64,
    /// `moser[k-1]` bounds the order-`k` composition estimate.
    pub moser: Vec<f64>,
}

/// Where a set of constants came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    File(String),
    Calibrated,
}

/// `Σ_{|α|=k} Π n_i^{2α_i}` for every mode of `grid`.
fn homogeneous_weights(grid: GridSpec, k: u32) -> Vec<f64> {
    let alphas: Vec<[u32; 3]> = multi_indices(k)
        .into_iter()
        .filter(|a| a.iter().sum::<u32>() == k)
        .collect();
    (0..grid.len())
        .map(|idx| {
            let n = grid.wavevector(idx).map(|w| (w * w) as f64);
            alphas
                .iter()
                .map(|a| (0..3).map(|i| n[i].powi(a[i] as i32)).product::<f64>())
                .sum()
        })
        .collect()
}

fn weighted_norm(s: &Spectrum<f64>, w: &[f64]) -> f64 {
    let sum: f64 = s.coeffs().iter().zip(w).map(|(c, w)| w * c.norm_sqr()).sum();
    (f64::torus_volume() * sum).sqrt()
}

fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

impl Constants {
    /// Constants given directly, e.g. for tests.
    pub fn fixed(grid: usize, m: u32, c_sobolev: f64, c_algebra: f64, moser: Vec<f64>) -> Self {
        Self {
            version: FORMAT_VERSION,
            grid,
            m,
            seed: 0,
            samples: 0,
            safety_factor: 1.0,
            c_sobolev,
            c_algebra,
            moser,
        }
    }

    /// Measure the constants on `samples` seeded random fields.
    pub fn calibrate(grid: GridSpec, m: u32, seed: u64, samples: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Constants("calibration needs m >= 1".into()));
        }
        if samples == 0 {
            return Err(Error::Constants("calibration needs at least one sample".into()));
        }
        let fine = GridSpec::new(2 * grid.n())?;
        let fine_plan = SpectralPlan::<f64>::new(fine);
        let weights = SobolevWeights::<f64>::new(fine, m);
        let coarse_k: Vec<Vec<f64>> = (1..=m).map(|k| homogeneous_weights(grid, k)).collect();
        let fine_k: Vec<Vec<f64>> = (1..=m).map(|k| homogeneous_weights(fine, k)).collect();
        let k_top = (grid.n() as i64 / 2 - 1).clamp(1, 5);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sob = 0.0f64;
        let mut alg = 0.0f64;
        let mut moser = vec![0.0f64; m as usize];
        let draw = |rng: &mut ChaCha8Rng| -> Result<(Spectrum<f64>, Vec<f64>)> {
            let family = BandLimited::new(rng.gen_range(1..=k_top), rng.gen_range(0.0..3.0));
            let s: Spectrum<f64> = family.spectrum(grid, rng)?;
            let level = SUP_LEVELS[rng.gen_range(0..SUP_LEVELS.len())];
            let fine_vals = fine_plan.inverse(&s.zero_pad(fine)?)?.into_values();
            let scale = level / sup_abs(&fine_vals).max(f64::MIN_POSITIVE);
            Ok((s.scaled(scale), fine_vals.into_iter().map(|v| v * scale).collect()))
        };
        for _ in 0..samples {
            let (su, u) = draw(&mut rng)?;
            let (sv, v) = draw(&mut rng)?;
            let su_fine = su.zero_pad(fine)?;
            let sv_fine = sv.zero_pad(fine)?;
            let u_hm = weights.norm_sq(&su_fine).sqrt();
            let v_hm = weights.norm_sq(&sv_fine).sqrt();
            let u_sup = sup_abs(&u);
            sob = sob.max(u_sup / u_hm);

            let uv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a * b).collect();
            let s_uv = fine_plan.forward_unchecked(&uv);
            alg = alg.max(weights.norm_sq(&s_uv).sqrt() / (u_hm * v_hm));

            let mu = EXPONENTS[rng.gen_range(0..EXPONENTS.len())];
            let fu: Vec<f64> = u.iter().map(|x| (1.0 + x).powf(mu)).collect();
            let s_fu = fine_plan.forward_unchecked(&fu);
            let (lo, hi) = u
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(1.0 + x), b.max(1.0 + x)));
            for k in 1..=m as usize {
                // sup_{1<=l<=k} sup_x |F^{(l)}(u)| ‖u‖_∞^{l−1}
                let deriv_scale = (1..=k)
                    .map(|l| {
                        let falling: f64 = (0..l).map(|j| mu - j as f64).product();
                        let p = mu - l as f64;
                        falling.abs() * lo.powf(p).max(hi.powf(p)) * u_sup.powi(l as i32 - 1)
                    })
                    .fold(0.0, f64::max);
                let du = weighted_norm(&su, &coarse_k[k - 1]);
                if deriv_scale * du > 0.0 {
                    let ratio = weighted_norm(&s_fu, &fine_k[k - 1]) / (deriv_scale * du);
                    moser[k - 1] = moser[k - 1].max(ratio);
                }
            }
        }
        Ok(Self {
            version: FORMAT_VERSION,
            grid: grid.n(),
            m,
            seed,
            samples,
            safety_factor: SAFETY_FACTOR,
            c_sobolev: SAFETY_FACTOR * sob,
            c_algebra: SAFETY_FACTOR * alg,
            moser: moser.into_iter().map(|c| SAFETY_FACTOR * c).collect(),
        })
    }

    /// Default calibration for a grid and order.
    pub fn default_for(grid: GridSpec, m: u32) -> Result<Self> {
        Self::calibrate(grid, m, DEFAULT_SEED, DEFAULT_SAMPLES)
    }

    /// Load from the file named by [`CONSTANTS_ENV`] if set, otherwise calibrate.
    pub fn from_env_or_calibrate(grid: GridSpec, m: u32) -> Result<(Self, Origin)> {
        match std::env::var_os(CONSTANTS_ENV) {
            Some(path) => {
                let c = Self::load(Path::new(&path))?;
                c.ensure_matches(grid, m)?;
                Ok((c, Origin::File(path.to_string_lossy().into_owned())))
            }
            None => Ok((Self::default_for(grid, m)?, Origin::Calibrated)),
        }
    }

    pub fn ensure_matches(&self, grid: GridSpec, m: u32) -> Result<()> {
        if self.grid != grid.n() {
            return Err(Error::Constants(format!(
                "constants were calibrated on a {}^3 grid but the scenario uses {}^3",
                self.grid,
                grid.n()
            )));
        }
        if self.m != m || self.moser.len() < m as usize {
            return Err(Error::Constants(format!(
                "constants were calibrated for m = {} but the scenario uses m = {m}",
                self.m
            )));
        }
        Ok(())
    }

    /// Key-value text, one `key = value` per line.
    pub fn to_file_string(&self) -> String {
        let mut s = String::from("# calibrated constants: max observed ratio times safety_factor\n");
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "grid = {}", self.grid);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "safety_factor = {:.16e}", self.safety_factor);
        let _ = writeln!(s, "c_sobolev = {:.16e}", self.c_sobolev);
        let _ = writeln!(s, "c_algebra = {:.16e}", self.c_algebra);
        for (k, c) in self.moser.iter().enumerate() {
            let _ = writeln!(s, "moser_c{} = {:.16e}", k + 1, c);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Constants(e.to_string()))?;
        let int = |key: &str| -> Result<i64> {
            table
                .get(key)
                .and_then(toml::Value::as_integer)
                .ok_or_else(|| Error::Constants(format!("missing integer `{key}`")))
        };
        let float = |key: &str| -> Result<f64> {
            match table.get(key) {
                Some(toml::Value::Float(f)) => Ok(*f),
                Some(toml::Value::Integer(i)) => Ok(*i as f64),
                _ => Err(Error::Constants(format!("missing number `{key}`"))),
            }
        };
        let version = int("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::Constants(format!(
                "unsupported constants version {version}, expected {FORMAT_VERSION}"
            )));
        }
        let m = u32::try_from(int("m")?).map_err(|_| Error::Constants("m out of range".into()))?;
        let moser = (1..=m)
            .map(|k| float(&format!("moser_c{k}")))
            .collect::<Result<Vec<_>>>()?;
        let non_negative = |key: &str| -> Result<u64> {
            u64::try_from(int(key)?).map_err(|_| Error::Constants(format!("`{key}` must be >= 0")))
        };
        Ok(Self {
            version,
            grid: non_negative("grid")? as usize,
            m,
            seed: non_negative("seed")?,
            samples: non_negative("samples")? as usize,
            safety_factor: float("safety_factor")?,
            c_sobolev: float("c_sobolev")?,
            c_algebra: float("c_algebra")?,
            moser,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Constants(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string())
            .map_err(|e| Error::Constants(format!("cannot write {}: {e}", path.display())))
    }

    /// `C_k` as the scalar type of a computation.
    pub fn moser_as<T: Real>(&self) -> Vec<T> {
        self.moser.iter().map(|&c| T::lit(c)).collect()
    }
}
