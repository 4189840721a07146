//! Exact propagator of `v'' + 2Ω v' + n² v = f` over one step.

use crate::scalar::Real;

/// `(v, v')(t+dt) = L (v, v')(t) + W f` for `f` constant on the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePropagator<T> {
    pub l: [[T; 2]; 2],
    pub w: [T; 2],
}

impl<T: Real> ModePropagator<T> {
    #[inline]
    pub fn apply(&self, v: T, vt: T, f: T) -> (T, T) {
        (
            self.l[0][0] * v + self.l[0][1] * vt + self.w[0] * f,
            self.l[1][0] * v + self.l[1][1] * vt + self.w[1] * f,
        )
    }
}

/// Build the propagator for one wave number.
///
/// With `C`, `S` the even and odd fundamental solutions of
/// `y'' = (Ω² − n²) y` (so `C = cos ωt`, `S = sin(ωt)/ω` when underdamped),
/// every mode with `n² > 0` obeys
///
/// ```text
/// v(t)  = e^{−Ωt} [v₀ C + (v₁ + Ω v₀) S] + f (1 − e^{−Ωt}(C + ΩS)) / n²
/// v'(t) = e^{−Ωt} [v₁ C − (n² v₀ + Ω v₁) S] + f e^{−Ωt} S
/// ```
///
/// The mean mode has roots `{0, −2Ω}` and is handled separately.
pub fn mode_propagator<T: Real>(n_sq: T, omega: T, dt: T) -> ModePropagator<T> {
    let two_omega = omega + omega;
    if n_sq == T::zero() {
        // (1 − e^{−2Ωdt}) / 2Ω, written to keep precision for small steps
        let r = -(-two_omega * dt).exp_m1() / two_omega;
        return ModePropagator {
            l: [[T::one(), r], [T::zero(), (-two_omega * dt).exp()]],
            w: [(dt - r) / two_omega, r],
        };
    }
    let disc = n_sq - omega * omega;
    let (c, s) = if disc > T::zero() {
        let w = disc.sqrt();
        ((w * dt).cos(), (w * dt).sin() / w)
    } else if disc < T::zero() {
        let w = (-disc).sqrt();
        ((w * dt).cosh(), (w * dt).sinh() / w)
    } else {
        (T::one(), dt)
    };
    let e = (-omega * dt).exp();
    ModePropagator {
        l: [
            [e * (c + omega * s), e * s],
            [-e * n_sq * s, e * (c - omega * s)],
        ],
        w: [(T::one() - e * (c + omega * s)) / n_sq, e * s],
    }
}
