//! Direct checks of the driven dynamics against quadrature of the
//! first-order expansion, plus the step-size refinement contract.

use linres_core::dynamics::{self, Drive};
use linres_core::response::{self, ObservablePair};
use linres_core::spectral;
use linres_core::{Complex64, TruncatedHamiltonian};

fn delta_center(h: &TruncatedHamiltonian) -> Vec<f64> {
    let mut d = vec![0.0; h.n()];
    d[h.center()] = 1.0;
    d
}

/// First-order correction by explicit time-ordered quadrature in the
/// eigenbasis: psi1(t) = -i ∫_0^t f(s) e^{-iH(t-s)} u e^{-iE0 s} ds,
/// u = V_P psi0, via composite Simpson per mode.
fn dyson_first_order_observable(
    eig: &spectral::EigenDecomposition,
    u: &[f64],
    v_o: &[f64],
    psi0: &[f64],
    drive: Drive,
    t: f64,
    steps: usize,
) -> f64 {
    let n = eig.n();
    let e0 = eig.ground_energy();
    let steps = if steps.is_multiple_of(2) { steps } else { steps + 1 };
    let ds = t / steps as f64;
    // mode coefficients of u
    let coeffs: Vec<f64> = (0..n)
        .map(|k| eig.vector(k).iter().zip(u).map(|(a, b)| a * b).sum())
        .collect();
    // psi1(t) = -i sum_k psi_k c_k I_k, I_k = ∫ f(s) e^{-iE_k (t-s)} e^{-iE0 s} ds
    let mut psi1 = vec![Complex64::new(0.0, 0.0); n];
    for (k, &ck) in coeffs.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let ek = eig.values()[k];
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=steps {
            let s = i as f64 * ds;
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let phase = Complex64::from_polar(1.0, -(ek * (t - s) + e0 * s));
            acc += w * drive.eval(s) * phase;
        }
        let integral = acc * ds / 3.0;
        let amp = Complex64::new(0.0, -1.0) * ck * integral;
        for (p, &v) in psi1.iter_mut().zip(eig.vector(k)) {
            *p += amp * v;
        }
    }
    // first-order observable change: 2 Re <psi0(t), V_O psi1(t)>
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let zero_order = Complex64::from_polar(psi0[i], -e0 * t);
        acc += zero_order.conj() * v_o[i] * psi1[i];
    }
    2.0 * acc.re
}

#[test]
fn dyson_quadrature_reproduces_response_convolution() {
    // the time-ordered integral and the convolution K ∗ f are two routes to
    // the same first-order term
    let h = TruncatedHamiltonian::build_lattice(-4.0, 40).unwrap();
    let eig = spectral::eigendecompose(&h).unwrap();
    let psi0 = eig.ground_state(None);
    let obs = ObservablePair::delta0(&psi0);
    let sw = response::spectral_weight(&eig, &obs);
    let d = delta_center(&h);

    for &t in &[1.5, 3.0, 5.0] {
        let direct = dyson_first_order_observable(&eig, &obs.u_p, &d, &psi0, Drive::Ramp, t, 3000);
        // (K ∗ f)(t) by composite Simpson on the same interval
        let m = 6000usize;
        let dt = t / m as f64;
        let taus: Vec<f64> = (0..=m).map(|i| i as f64 * dt).collect();
        let k = response::time_response_from_weights(&sw, &taus);
        let mut conv = 0.0;
        for i in 0..=m {
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            conv += w * k[m - i].value * Drive::Ramp.eval(taus[i]);
        }
        conv *= dt / 3.0;
        assert!(
            (direct - conv).abs() < 1e-6 * conv.abs().max(1e-3),
            "t = {t}: dyson {direct} vs convolution {conv}"
        );
    }
}

#[test]
fn propagated_response_approaches_first_order_term_as_epsilon_shrinks() {
    let h = TruncatedHamiltonian::build_lattice(-4.0, 40).unwrap();
    let eig = spectral::eigendecompose(&h).unwrap();
    let psi0 = eig.ground_state(None);
    let d = delta_center(&h);
    let t = 4.0;
    let dt = 0.005;
    let first_order =
        dyson_first_order_observable(&eig, &ObservablePair::delta0(&psi0).u_p, &d, &psi0, Drive::Ramp, t, 4000);

    let gap_at = |eps: f64| {
        let traj =
            dynamics::propagate_perturbed(&h, &psi0, &d, eps, Drive::Ramp, dt, t).unwrap();
        let obs_t = traj.observable(&d);
        let scaled = (obs_t.last().unwrap() - obs_t[0]) / eps;
        (scaled - first_order).abs()
    };
    let g1 = gap_at(0.04);
    let g2 = gap_at(0.01);
    // the gap to the first-order term is itself O(eps)
    let ratio = g1 / g2;
    assert!(
        (2.5..6.0).contains(&ratio),
        "gaps {g1:e}, {g2:e} should shrink ~4x when eps does"
    );
}

#[test]
fn remainder_is_insensitive_to_step_halving() {
    let h = TruncatedHamiltonian::build_lattice(-4.0, 100).unwrap();
    let eig = spectral::eigendecompose(&h).unwrap();
    let d = delta_center(&h);
    let run = |dt: f64| {
        dynamics::kubo_remainder(&h, &eig, &d, &d, &[0.01], Drive::Ramp, 10.0, dt).unwrap()[0]
            .sup_remainder
    };
    let coarse = run(0.01);
    let fine = run(0.005);
    let rel = (coarse - fine).abs() / fine;
    assert!(
        rel < 0.15,
        "halving dt moved sup|R| by {rel:.3} ({coarse:e} vs {fine:e})"
    );
}
