//! Closed-form response of the infinite impurity chain.
//!
//! The free-lattice Green's function G₀(z)_{mn} = ζ^{|m-n|} / √(z²-4) with
//! ζ = (z - √(z²-4))/2 and the branch √(z²-4) := √(z-2)·√(z+2) (principal
//! square roots), which keeps |ζ| < 1 in the upper half plane. A rank-one
//! update adds the impurity, and the bound state enters through its closed
//! form: E₀ = -√(V²+4), ψ₀(n) = c ζ₀^{|n|} with ζ₀ = (E₀-V)/2 and
//! c² = (1-ζ₀²)/(1+ζ₀²). Evaluating on the real axis yields the boundary
//! values from above; the reflected term is conjugated accordingly. Every
//! ingredient is validated against large-box numerics in the test suite.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Boundary-value evaluations must keep |ω| away from the band thresholds
/// and from zero by at least this margin.
pub const THRESHOLD_MARGIN: f64 = 1e-3;

/// Bound state of the infinite chain with impurity v < 0 on site 0.
#[derive(Debug, Clone, Copy)]
pub struct ImpurityBoundState {
    /// E₀ = -√(v² + 4).
    pub energy: f64,
    /// Decay factor: ψ₀(n) ∝ ζ₀^|n|, ζ₀ = (E₀ - v)/2 ∈ (-1, 0).
    pub zeta: f64,
    /// ψ₀(0) > 0 for the normalized state.
    pub amplitude0: f64,
}

impl ImpurityBoundState {
    /// ψ₀(n) of the normalized bound state.
    pub fn psi(&self, n: i64) -> f64 {
        self.amplitude0 * self.zeta.powi(n.unsigned_abs() as i32)
    }
}

/// Closed-form bound state; requires an attractive impurity.
pub fn impurity_bound_state(v: f64) -> Result<ImpurityBoundState> {
    if !v.is_finite() || v >= 0.0 {
        return Err(Error::InvalidModel(format!(
            "impurity strength must be negative to bind below the band, got {v}"
        )));
    }
    let energy = -(v * v + 4.0).sqrt();
    let zeta = (energy - v) / 2.0;
    let c2 = (1.0 - zeta * zeta) / (1.0 + zeta * zeta);
    Ok(ImpurityBoundState {
        energy,
        zeta,
        amplitude0: c2.sqrt(),
    })
}

/// √(z²-4) as the product of principal square roots of (z-2) and (z+2).
///
/// On the real axis the +0 imaginary part selects the limit from above.
fn sqrt_band(z: Complex64) -> Complex64 {
    (z - 2.0).sqrt() * (z + 2.0).sqrt()
}

/// ζ(z) = (z - √(z²-4))/2, the |ζ| ≤ 1 root of ζ + 1/ζ = z.
pub fn lattice_zeta(z: Complex64) -> Complex64 {
    (z - sqrt_band(z)) / 2.0
}

/// Free-lattice Green's function entry (z - H₀)⁻¹_{mn} = ζ^{|m-n|}/√(z²-4).
pub fn free_greens(z: Complex64, m: i64, n: i64) -> Complex64 {
    let s = sqrt_band(z);
    lattice_zeta(z).powi((m - n).unsigned_abs() as i32) / s
}

/// Diagonal element of the impurity resolvent at site 0, by the rank-one
/// update: G₀₀ = g₀ / (1 - v g₀).
pub fn impurity_g00(z: Complex64, v: f64) -> Complex64 {
    let g0 = 1.0 / sqrt_band(z);
    g0 / (1.0 - v * g0)
}

/// General entry of the impurity resolvent:
/// G_{mn} = G₀_{mn} + v G₀_{m0} G₀_{0n} / (1 - v G₀₀).
pub fn impurity_greens(z: Complex64, v: f64, m: i64, n: i64) -> Complex64 {
    let g0mn = free_greens(z, m, n);
    let g0m0 = free_greens(z, m, 0);
    let g00n = free_greens(z, 0, n);
    let g000 = free_greens(z, 0, 0);
    g0mn + v * g0m0 * g00n / (1.0 - v * g000)
}

/// Infinite-lattice frequency response K̂(ω+iη) for the δ₀ observable pair,
/// η ≥ 0. At η = 0 the boundary value from above is returned; ω must then
/// stay [`THRESHOLD_MARGIN`] away from the band thresholds ±(2-E₀),
/// ±(-2-E₀) and from 0.
pub fn exact_lattice_response(v: f64, omega: f64, eta: f64) -> Result<Complex64> {
    if !(eta >= 0.0) {
        return Err(Error::Domain(format!("eta must be nonnegative, got {eta}")));
    }
    let bs = impurity_bound_state(v)?;
    let e0 = bs.energy;
    if eta == 0.0 {
        let thresholds = [2.0 - e0, -2.0 - e0, -(2.0 - e0), -(-2.0 - e0), 0.0];
        for t in thresholds {
            if (omega - t).abs() < THRESHOLD_MARGIN {
                return Err(Error::Threshold {
                    omega,
                    margin: THRESHOLD_MARGIN,
                });
            }
        }
    }
    let amp2 = bs.amplitude0 * bs.amplitude0;
    // first term approaches the real axis from above, the reflected term
    // from below: conjugate the upper-branch evaluation
    let t1 = impurity_g00(Complex64::new(e0 + omega, eta), v);
    let t2 = impurity_g00(Complex64::new(e0 - omega, eta), v).conj();
    Ok(amp2 * (t1 + t2))
}

/// Boundary density of the first (positive-frequency) term:
/// -Im⟨u, G(E₀+ω+i0⁺) u⟩/π. This is the smooth function that kernel
/// smoothing of the discrete spectral weights converges to.
pub fn exact_spectral_density(v: f64, omega: f64) -> Result<f64> {
    let bs = impurity_bound_state(v)?;
    let amp2 = bs.amplitude0 * bs.amplitude0;
    let g = impurity_g00(Complex64::new(bs.energy + omega, 0.0), v);
    Ok(-amp2 * g.im / std::f64::consts::PI)
}
