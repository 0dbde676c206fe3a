//! Validation of the closed-form infinite-lattice response against large
//! boxes, and of the identities tying the time, frequency and smoothed views
//! of the same response together.

use linres_core::response::{self, exact, ObservablePair};
use linres_core::smoothing::{smoothed_density, KernelFamily, KernelSpec};
use linres_core::spectral;
use linres_core::{Complex64, TruncatedHamiltonian};

fn box4000() -> (TruncatedHamiltonian, spectral::GroundState) {
    let h = TruncatedHamiltonian::build_lattice(-4.0, 4000).unwrap();
    let gs = spectral::ground_state(&h, None).unwrap();
    (h, gs)
}

#[test]
fn closed_form_response_matches_large_box() {
    // every closed-form ingredient is only trusted as a reference after this
    let (h, gs) = box4000();
    let obs = ObservablePair::delta0(&gs.vector);
    for &(omega, eta, tol) in &[
        (3.0, 0.1, 1e-8),
        (3.0, 0.5, 1e-10),
        (0.7, 0.3, 1e-10),
        (5.9, 0.05, 1e-8),
        (4.47, 1.0, 1e-10),
    ] {
        let reference = exact::exact_lattice_response(-4.0, omega, eta).unwrap();
        let boxed = response::freq_response_resolvent(&h, gs.energy, &obs, omega, eta).unwrap();
        let err = (boxed - reference).norm();
        assert!(
            err <= tol,
            "closed form off by {err:e} at (omega={omega}, eta={eta})"
        );
    }
}

#[test]
fn bound_state_amplitude_matches_large_box_limit() {
    let (h, gs) = box4000();
    let amp2 = gs.vector[h.center()].powi(2);
    let closed = 4.0 / 20.0f64.sqrt();
    assert!(
        (amp2 - closed).abs() < 1e-10,
        "psi0(0)^2 = {amp2} vs closed form {closed}"
    );
    let e0_closed = -(20.0f64).sqrt();
    assert!((gs.energy - e0_closed).abs() < 1e-12);
}

#[test]
fn damped_fourier_transform_of_time_response_matches_frequency_route() {
    // int_0^T K(tau) e^{i (omega + i eta) tau} d tau converges to the
    // frequency response as T grows; tail is bounded by e^{-eta T}
    let l = 30usize;
    let h = TruncatedHamiltonian::build_lattice(-4.0, l).unwrap();
    let eig = spectral::eigendecompose(&h).unwrap();
    let obs = ObservablePair::delta0(&eig.ground_state(None));
    let sw = response::spectral_weight(&eig, &obs);

    let omega = 1.7;
    let eta = 0.2;
    let t_max = 140.0;
    let dt = 0.002;
    let n = (t_max / dt) as usize;
    let n = if n.is_multiple_of(2) { n } else { n + 1 };
    let taus: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let k_tau = response::time_response_from_weights(&sw, &taus);

    // composite Simpson of K(tau) e^{i z tau}
    let z = Complex64::new(omega, eta);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, s) in k_tau.iter().enumerate() {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * s.value * (Complex64::i() * z * s.tau).exp();
    }
    let quad = acc * dt / 3.0;

    let direct = sw.eval(omega, eta).unwrap();
    let err = (quad - direct).norm();
    // tail bound ~ sum|w| e^{-eta T} / eta plus O(dt^4) quadrature error
    assert!(err < 1e-6, "Fourier route off by {err:e}");
}

#[test]
fn lorentzian_smoothing_is_the_imaginary_part_of_the_response() {
    // -Im K(omega + i eta)/pi equals the Lorentzian-smoothed weights minus
    // their mirror, exactly
    let h = TruncatedHamiltonian::build_lattice(-4.0, 150).unwrap();
    let eig = spectral::eigendecompose(&h).unwrap();
    let e0 = eig.ground_energy();
    let obs = ObservablePair::delta0(&eig.ground_state(None));
    let sw = response::spectral_weight(&eig, &obs);
    for &(omega, eta) in &[(3.0, 0.05), (1.0, 0.3), (6.0, 0.02)] {
        let k = response::freq_response_sos(&eig, &obs, omega, eta, e0).unwrap();
        let lhs = -k.im / std::f64::consts::PI;
        let spec = KernelSpec::new(KernelFamily::Lorentzian, eta).unwrap();
        let plus = smoothed_density(&sw.weights, &sw.frequencies, &spec, &[omega])[0];
        let minus = smoothed_density(&sw.weights, &sw.frequencies, &spec, &[-omega])[0];
        let rhs = plus - minus;
        assert!(
            (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0),
            "identity off by {} at ({omega}, {eta})",
            (lhs - rhs).abs()
        );
    }
}

#[test]
fn smoothed_weights_converge_to_boundary_density() {
    // gaussian smoothing at shrinking width approaches the closed-form
    // boundary density quadratically
    let l = 1000usize;
    let h = TruncatedHamiltonian::build_lattice(-4.0, l).unwrap();
    let eig = spectral::eigendecompose(&h).unwrap();
    let obs = ObservablePair::delta0(&eig.ground_state(None));
    let sw = response::spectral_weight(&eig, &obs);
    let rho = exact::exact_spectral_density(-4.0, 3.0).unwrap();

    let err_at = |eta: f64| {
        let spec = KernelSpec::new(KernelFamily::Gaussian, eta).unwrap();
        (smoothed_density(&sw.weights, &sw.frequencies, &spec, &[3.0])[0] - rho).abs()
    };
    let e1 = err_at(0.1);
    let e2 = err_at(0.05);
    let ratio = e1 / e2;
    assert!(
        (3.0..5.0).contains(&ratio),
        "halving the width should quarter the error: {e1:e} / {e2:e} = {ratio}"
    );
}

#[test]
fn boundary_density_is_consistent_with_full_response() {
    // at omega inside the positive ionization window the reflected term is
    // real, so the density is carried by Im K alone
    let k = exact::exact_lattice_response(-4.0, 3.0, 0.0).unwrap();
    let rho = exact::exact_spectral_density(-4.0, 3.0).unwrap();
    assert!((rho + k.im / std::f64::consts::PI).abs() < 1e-14);
    // frozen value from the study backing this suite
    assert!((rho - 0.0216139728004404).abs() < 1e-13);
}

#[test]
fn response_magnitude_shrinks_with_eta() {
    let hi = exact::exact_lattice_response(-4.0, 3.0, 10.0).unwrap();
    let lo = exact::exact_lattice_response(-4.0, 3.0, 0.1).unwrap();
    assert!(hi.norm() < lo.norm());
    assert!(hi.norm() < 2.0 / 10.0);
}
