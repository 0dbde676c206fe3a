//! Response functions of a truncated Hamiltonian for a pair of localized
//! observables.
//!
//! The time response K_L(τ) and the frequency response K̂_L(ω+iη) are both
//! evaluated from the same ground-state data, the latter by two independent
//! routes: a sum over states in the eigenbasis and a pair of shifted
//! resolvent solves. The two must agree to ~1e-10 relative; their agreement
//! is one of the main internal cross-checks. η = 0 is rejected for finite
//! boxes, where the frequency response is a sum of poles; boundary values
//! exist only for the infinite-lattice reference in [`exact`].

pub mod exact;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::TruncatedHamiltonian;
use crate::spectral::{self, EigenDecomposition};

/// The applied observable vectors u_O = V_O ψ₀ and u_P = V_P ψ₀.
#[derive(Debug, Clone)]
pub struct ObservablePair {
    pub u_o: Vec<f64>,
    pub u_p: Vec<f64>,
    pub description: String,
}

impl ObservablePair {
    /// Both observables equal to the potential localized on the center site:
    /// u = ψ₀(0) e_center.
    pub fn delta0(psi0: &[f64]) -> Self {
        let n = psi0.len();
        let center = (n - 1) / 2;
        let mut u = vec![0.0; n];
        u[center] = psi0[center];
        ObservablePair {
            u_o: u.clone(),
            u_p: u,
            description: "delta potential on the center site".into(),
        }
    }

    /// Generic diagonal multiplication operators applied to ψ₀.
    pub fn diagonal(v_o: &[f64], v_p: &[f64], psi0: &[f64]) -> Result<Self> {
        if v_o.len() != psi0.len() || v_p.len() != psi0.len() {
            return Err(Error::Dimension {
                expected: psi0.len(),
                got: v_o.len().max(v_p.len()),
            });
        }
        let u_o: Vec<f64> = v_o.iter().zip(psi0).map(|(a, b)| a * b).collect();
        let u_p: Vec<f64> = v_p.iter().zip(psi0).map(|(a, b)| a * b).collect();
        if u_o.iter().chain(&u_p).any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("observable vectors must be finite".into()));
        }
        Ok(ObservablePair {
            u_o,
            u_p,
            description: "diagonal multiplication pair".into(),
        })
    }
}

/// One sample of the time response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSample {
    pub tau: f64,
    pub value: f64,
}

/// One sample of the frequency response at ω + iη.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseSample {
    pub omega: f64,
    pub eta: f64,
    pub value: Complex64,
}

/// Spectral weights w_k = ⟨u_O, ψ_k⟩⟨ψ_k, u_P⟩ and excitation frequencies
/// f_k = E_k - E₀. These drive both response routes and the smoothing module.
#[derive(Debug, Clone)]
pub struct SpectralWeights {
    pub weights: Vec<f64>,
    pub frequencies: Vec<f64>,
}

impl SpectralWeights {
    /// One tagged evaluation of the frequency response.
    pub fn sample(&self, omega: f64, eta: f64) -> Result<ResponseSample> {
        Ok(ResponseSample {
            omega,
            eta,
            value: self.eval(omega, eta)?,
        })
    }

    /// Frequency response at ω + iη by the sum over states.
    pub fn eval(&self, omega: f64, eta: f64) -> Result<Complex64> {
        if !(eta > 0.0) {
            return Err(Error::Domain(
                "eta must be positive for a finite box; the response at eta = 0 \
                 is a sum of poles"
                    .into(),
            ));
        }
        let z = Complex64::new(omega, eta);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&w, &f) in self.weights.iter().zip(&self.frequencies) {
            acc += w / (z - f) - w / (z + f);
        }
        Ok(acc)
    }
}

/// Weights and frequencies of the eigen-expansion, relative to the lowest
/// eigenvalue of `eig`.
pub fn spectral_weight(eig: &EigenDecomposition, obs: &ObservablePair) -> SpectralWeights {
    let n = eig.n();
    let e0 = eig.ground_energy();
    let mut weights = Vec::with_capacity(n);
    let mut frequencies = Vec::with_capacity(n);
    for k in 0..n {
        let psi = eig.vector(k);
        let a: f64 = obs.u_o.iter().zip(psi).map(|(x, y)| x * y).sum();
        let b: f64 = obs.u_p.iter().zip(psi).map(|(x, y)| x * y).sum();
        weights.push(a * b);
        frequencies.push(eig.values()[k] - e0);
    }
    SpectralWeights {
        weights,
        frequencies,
    }
}

/// Time response K_L(τ) = -2 Σ_k w_k sin(f_k τ) for τ > 0, zero for τ < 0.
pub fn time_response(
    eig: &EigenDecomposition,
    obs: &ObservablePair,
    taus: &[f64],
) -> Vec<TimeSample> {
    let sw = spectral_weight(eig, obs);
    time_response_from_weights(&sw, taus)
}

pub fn time_response_from_weights(sw: &SpectralWeights, taus: &[f64]) -> Vec<TimeSample> {
    taus.iter()
        .map(|&tau| {
            let value = if tau > 0.0 {
                -2.0 * sw
                    .weights
                    .iter()
                    .zip(&sw.frequencies)
                    .map(|(&w, &f)| w * (f * tau).sin())
                    .sum::<f64>()
            } else {
                0.0
            };
            TimeSample { tau, value }
        })
        .collect()
}

/// Frequency response by the sum over states, with the reference energy `e0`
/// passed explicitly.
pub fn freq_response_sos(
    eig: &EigenDecomposition,
    obs: &ObservablePair,
    omega: f64,
    eta: f64,
    e0: f64,
) -> Result<Complex64> {
    if !(eta > 0.0) {
        return Err(Error::Domain(
            "eta must be positive for a finite box; the response at eta = 0 \
             is a sum of poles"
                .into(),
        ));
    }
    let z = Complex64::new(omega, eta);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..eig.n() {
        let psi = eig.vector(k);
        let a: f64 = obs.u_o.iter().zip(psi).map(|(x, y)| x * y).sum();
        let b: f64 = obs.u_p.iter().zip(psi).map(|(x, y)| x * y).sum();
        let f = eig.values()[k] - e0;
        acc += (a * b) / (z - f) - (b * a) / (z + f);
    }
    Ok(acc)
}

/// Frequency response by two shifted resolvent solves:
/// ⟨u_O, (ω+iη-(H-E₀))⁻¹ u_P⟩ - ⟨u_P, (ω+iη+(H-E₀))⁻¹ u_O⟩.
///
/// Mathematically identical to [`freq_response_sos`]; numerically an
/// independent route.
pub fn freq_response_resolvent(
    h: &TruncatedHamiltonian,
    e0: f64,
    obs: &ObservablePair,
    omega: f64,
    eta: f64,
) -> Result<Complex64> {
    if !(eta > 0.0) {
        return Err(Error::Domain(
            "eta must be positive for a finite box; the response at eta = 0 \
             is a sum of poles"
                .into(),
        ));
    }
    let up: Vec<Complex64> = obs.u_p.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let uo: Vec<Complex64> = obs.u_o.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    // (omega + i eta - (H - e0))^-1 u_P = (z1 - H)^-1 u_P
    let z1 = Complex64::new(omega + e0, eta);
    // (omega + i eta + (H - e0))^-1 u_O = -(z2 - H)^-1 u_O, z2 = e0 - omega - i eta
    let z2 = Complex64::new(e0 - omega, -eta);
    let x1 = spectral::resolvent_solve(h, z1, &up)?;
    let x2 = spectral::resolvent_solve(h, z2, &uo)?;
    let t1: Complex64 = obs.u_o.iter().zip(&x1).map(|(&a, b)| a * b).sum();
    let t2: Complex64 = obs.u_p.iter().zip(&x2).map(|(&a, b)| a * b).sum();
    Ok(t1 + t2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TruncatedHamiltonian;
    use crate::spectral::eigendecompose;

    fn impurity_setup(l: usize) -> (TruncatedHamiltonian, EigenDecomposition, ObservablePair) {
        let h = TruncatedHamiltonian::build_lattice(-4.0, l).unwrap();
        let eig = eigendecompose(&h).unwrap();
        let obs = ObservablePair::delta0(&eig.ground_state(None));
        (h, eig, obs)
    }

    #[test]
    fn delta0_structure() {
        let (h, eig, obs) = impurity_setup(2);
        let psi0 = eig.ground_state(None);
        for (i, &x) in obs.u_o.iter().enumerate() {
            if i == h.center() {
                assert_eq!(x, psi0[h.center()]);
            } else {
                assert_eq!(x, 0.0);
            }
        }
        let norm: f64 = obs.u_o.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - psi0[h.center()].abs()).abs() < 1e-15);
    }

    #[test]
    fn time_response_is_causal_and_vanishes_at_zero() {
        let (_, eig, obs) = impurity_setup(20);
        let out = time_response(&eig, &obs, &[-3.0, -0.5, 0.0, 0.5]);
        assert_eq!(out[0].value, 0.0);
        assert_eq!(out[1].value, 0.0);
        assert_eq!(out[2].value, 0.0);
        assert!(out[3].value.abs() > 0.0);
    }

    #[test]
    fn sos_rejects_eta_zero() {
        let (_, eig, obs) = impurity_setup(10);
        let e0 = eig.ground_energy();
        assert!(matches!(
            freq_response_sos(&eig, &obs, 3.0, 0.0, e0),
            Err(Error::Domain(_))
        ));
        let h = TruncatedHamiltonian::build_lattice(-4.0, 10).unwrap();
        assert!(freq_response_resolvent(&h, e0, &obs, 3.0, 0.0).is_err());
    }

    #[test]
    fn sos_decays_at_large_eta() {
        let (_, eig, obs) = impurity_setup(20);
        let e0 = eig.ground_energy();
        let unorm2: f64 = obs.u_o.iter().map(|x| x * x).sum();
        for &eta in &[1e3, 1e6] {
            let v = freq_response_sos(&eig, &obs, 1.0, eta, e0).unwrap();
            assert!(v.norm() <= 2.1 * unorm2 / eta);
        }
    }

    #[test]
    fn sos_reflection_symmetry() {
        // K(tau) is real, so K(-omega + i eta) = conj(K(omega + i eta));
        // term by term: -conj(w/(z-f)) = w/((-omega+i eta)+f), the reflected
        // second term, and vice versa
        let (_, eig, obs) = impurity_setup(30);
        let e0 = eig.ground_energy();
        for &(omega, eta) in &[(0.7, 0.3), (3.0, 0.05), (5.5, 1.2)] {
            let a = freq_response_sos(&eig, &obs, omega, eta, e0).unwrap();
            let b = freq_response_sos(&eig, &obs, -omega, eta, e0).unwrap();
            assert!((b - a.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn cross_method_agreement() {
        let (h, eig, obs) = impurity_setup(60);
        let e0 = eig.ground_energy();
        for &omega in &[0.0, 1.3, 3.0, 4.47, 6.2] {
            for &eta in &[0.02, 0.5] {
                let a = freq_response_sos(&eig, &obs, omega, eta, e0).unwrap();
                let b = freq_response_resolvent(&h, e0, &obs, omega, eta).unwrap();
                assert!(
                    (a - b).norm() <= 1e-10 * a.norm(),
                    "disagree at ({omega},{eta}): {}",
                    (a - b).norm() / a.norm()
                );
            }
        }
    }

    #[test]
    fn tagged_sample_carries_its_coordinates() {
        let (_, eig, obs) = impurity_setup(15);
        let sw = spectral_weight(&eig, &obs);
        let s = sw.sample(2.0, 0.3).unwrap();
        assert_eq!((s.omega, s.eta), (2.0, 0.3));
        assert_eq!(s.value, sw.eval(2.0, 0.3).unwrap());
        assert!(s.value.is_finite());
        assert!(sw.sample(2.0, 0.0).is_err());
    }

    #[test]
    fn weights_sum_to_overlap_and_are_nonnegative() {
        let (_, eig, obs) = impurity_setup(40);
        let sw = spectral_weight(&eig, &obs);
        let total: f64 = sw.weights.iter().sum();
        let overlap: f64 = obs.u_o.iter().zip(&obs.u_p).map(|(a, b)| a * b).sum();
        assert!((total - overlap).abs() <= 1e-12 * overlap.abs().max(1.0));
        assert!(sw.weights.iter().all(|&w| w >= -1e-16));
        // ground-state weight strictly positive for the impurity pair
        assert!(sw.weights[0] > 1e-3);
        assert_eq!(sw.frequencies[0], 0.0);
    }

    #[test]
    fn boundary_reflections_separate_small_and_large_boxes() {
        // small box: reflections keep |K| alive at late times; large box: decay
        let taus: Vec<f64> = (0..=1200).map(|i| i as f64 * 0.05).collect();
        let (_, eig30, obs30) = impurity_setup(30);
        let k30 = time_response(&eig30, &obs30, &taus);
        let (_, eig400, obs400) = impurity_setup(400);
        let k400 = time_response(&eig400, &obs400, &taus);
        let late = |k: &[TimeSample]| {
            k.iter()
                .filter(|s| s.tau >= 40.0 && s.tau <= 60.0)
                .map(|s| s.value.abs())
                .fold(0.0, f64::max)
        };
        let early = |k: &[TimeSample]| {
            k.iter()
                .filter(|s| s.tau <= 20.0)
                .map(|s| s.value.abs())
                .fold(0.0, f64::max)
        };
        let r30 = late(&k30) / early(&k30);
        let r400 = late(&k400) / early(&k400);
        assert!(r30 > 0.1, "r30 = {r30}");
        assert!(r400 < 0.02, "r400 = {r400}");
    }
}
