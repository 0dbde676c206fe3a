//! Unitary time propagation and direct checks of the first-order response.
//!
//! Free propagation expands in the eigenbasis. Driven propagation uses
//! Crank-Nicolson with the drive sampled at midpoints; the Cayley step is
//! exactly unitary for any step size, so norm drift only measures round-off
//! accumulation. The remainder of the first-order (Kubo) expansion,
//! R_ε(t) = ⟨ψ(t), V_O ψ(t)⟩ - ⟨ψ₀, V_O ψ₀⟩ - ε (K_L ∗ f)(t),
//! must shrink like ε².

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::TruncatedHamiltonian;
use crate::response::{self, ObservablePair};
use crate::spectral::EigenDecomposition;
use crate::tridiag;

/// Bounded causal drives f(t), |f| ≤ 1, f(t) = 0 for t < 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Drive {
    /// f(t) = 1 - e^{-t}.
    Ramp,
    /// f(t) = sin²(t).
    Sin2,
}

impl Drive {
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self {
            Drive::Ramp => 1.0 - (-t).exp(),
            Drive::Sin2 => t.sin().powi(2),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Drive::Ramp => "ramp",
            Drive::Sin2 => "sin2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ramp" => Ok(Drive::Ramp),
            "sin2" => Ok(Drive::Sin2),
            _ => Err(Error::Config(format!("unknown drive '{s}'"))),
        }
    }
}

/// Default step: dt = min(0.01, 0.1 / (‖H‖ + ε)).
pub fn default_dt(h: &TruncatedHamiltonian, epsilon: f64) -> f64 {
    (0.1 / (h.op_norm_bound() + epsilon)).min(0.01)
}

/// States of one driven propagation, stored at every step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub dt: f64,
    pub epsilon: f64,
}

impl Trajectory {
    /// ⟨ψ(t), diag · ψ(t)⟩ along the trajectory.
    pub fn observable(&self, diag: &[f64]) -> Vec<f64> {
        self.states
            .iter()
            .map(|psi| {
                psi.iter()
                    .zip(diag)
                    .map(|(c, &d)| d * c.norm_sqr())
                    .sum()
            })
            .collect()
    }

    pub fn final_state(&self) -> &[Complex64] {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

/// e^{-iHt} v by eigenbasis expansion.
pub fn propagate_free(eig: &EigenDecomposition, v: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let n = eig.n();
    if v.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: v.len(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let psi = eig.vector(k);
        let c: Complex64 = psi.iter().zip(v).map(|(&p, &x)| p * x).sum();
        let phase = Complex64::from_polar(1.0, -eig.values()[k] * t);
        let cp = c * phase;
        for (o, &p) in out.iter_mut().zip(psi) {
            *o += cp * p;
        }
    }
    Ok(out)
}

/// Crank-Nicolson propagation of i ∂ψ/∂t = (H + ε f(t) V_P) ψ from the given
/// real initial state, storing every step up to t_final.
pub fn propagate_perturbed(
    h: &TruncatedHamiltonian,
    psi0: &[f64],
    v_p_diag: &[f64],
    epsilon: f64,
    drive: Drive,
    dt: f64,
    t_final: f64,
) -> Result<Trajectory> {
    let n = h.n();
    if psi0.len() != n || v_p_diag.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: psi0.len().min(v_p_diag.len()),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Domain(format!(
            "perturbation strength must lie in [0, 1), got {epsilon}"
        )));
    }
    let steps = (t_final / dt).round() as usize;
    let mut psi: Vec<Complex64> = psi0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(psi.clone());

    let off = h.offdiag();
    let half = Complex64::new(0.0, 0.5 * dt);
    let sub: Vec<Complex64> = off.iter().map(|&e| half * e).collect();

    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        let f = drive.eval(t_mid);
        let diag_mid: Vec<f64> = h
            .diag()
            .iter()
            .zip(v_p_diag)
            .map(|(&a, &vp)| a + epsilon * f * vp)
            .collect();
        // rhs = (I - i dt/2 H_mid) psi
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = diag_mid[i] * psi[i];
            if i > 0 {
                acc += off[i - 1] * psi[i - 1];
            }
            if i + 1 < n {
                acc += off[i] * psi[i + 1];
            }
            rhs[i] = psi[i] - half * acc;
        }
        // (I + i dt/2 H_mid) psi' = rhs
        let d: Vec<Complex64> = diag_mid
            .iter()
            .map(|&a| Complex64::new(1.0, 0.0) + half * a)
            .collect();
        let lu = tridiag::factor(sub.clone(), d, sub.clone(), 0.0);
        lu.solve(&mut rhs);
        psi = rhs;
        times.push((step + 1) as f64 * dt);
        states.push(psi.clone());
    }

    // Cayley steps are unitary; drift beyond round-off accumulation means the
    // step went numerically wrong.
    let drift = states
        .iter()
        .map(|s| (tridiag::norm2_c(s) - 1.0).abs())
        .fold(0.0, f64::max);
    if drift > 1e-9 {
        return Err(Error::StepSize(format!(
            "norm drift {drift:e} exceeds 1e-9 over [0, {t_final}]; reduce dt"
        )));
    }

    Ok(Trajectory {
        times,
        states,
        dt,
        epsilon,
    })
}

/// One row of the remainder table.
#[derive(Debug, Clone, Copy)]
pub struct RemainderSample {
    pub epsilon: f64,
    pub sup_remainder: f64,
}

/// Trapezoid convolution (k ∗ f)(t_n) on a shared uniform grid.
fn convolve_trapezoid(k: &[f64], f: &[f64], dt: f64) -> Vec<f64> {
    let n = k.len();
    let mut out = vec![0.0; n];
    for i in 1..n {
        let mut acc = 0.0;
        for m in 0..=i {
            let term = k[i - m] * f[m];
            if m == 0 || m == i {
                acc += 0.5 * term;
            } else {
                acc += term;
            }
        }
        out[i] = dt * acc;
    }
    out
}

/// sup_t |R_ε(t)| over [0, t_final] for each ε, with the first-order term
/// from the eigenbasis response and the propagation from Crank-Nicolson.
#[allow(clippy::too_many_arguments)]
pub fn kubo_remainder(
    h: &TruncatedHamiltonian,
    eig: &EigenDecomposition,
    v_o_diag: &[f64],
    v_p_diag: &[f64],
    epsilons: &[f64],
    drive: Drive,
    t_final: f64,
    dt: f64,
) -> Result<Vec<RemainderSample>> {
    let psi0 = eig.ground_state(None);
    let obs = ObservablePair::diagonal(v_o_diag, v_p_diag, &psi0)?;
    let sw = response::spectral_weight(eig, &obs);

    let steps = (t_final / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let k_l: Vec<f64> = response::time_response_from_weights(&sw, &times)
        .into_iter()
        .map(|s| s.value)
        .collect();
    let f_vals: Vec<f64> = times.iter().map(|&t| drive.eval(t)).collect();
    let conv = convolve_trapezoid(&k_l, &f_vals, dt);

    let base: f64 = psi0
        .iter()
        .zip(v_o_diag)
        .map(|(&p, &v)| v * p * p)
        .sum();

    epsilons
        .par_iter()
        .map(|&eps| {
            let traj = propagate_perturbed(h, &psi0, v_p_diag, eps, drive, dt, t_final)?;
            let obs_t = traj.observable(v_o_diag);
            let sup = obs_t
                .iter()
                .zip(&conv)
                .map(|(&o, &c)| (o - base - eps * c).abs())
                .fold(0.0, f64::max);
            Ok(RemainderSample {
                epsilon: eps,
                sup_remainder: sup,
            })
        })
        .collect()
}

/// First moments along a freely evolving state: ‖x ψ(t)‖ and ‖D ψ(t)‖ for
/// the centered position operator and the forward difference.
#[derive(Debug, Clone, Copy)]
pub struct MomentSample {
    pub t: f64,
    pub x_norm: f64,
    pub d_norm: f64,
}

pub fn moment_growth(
    eig: &EigenDecomposition,
    h: &TruncatedHamiltonian,
    v: &[Complex64],
    ts: &[f64],
) -> Result<Vec<MomentSample>> {
    let n = h.n();
    if v.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: v.len(),
        });
    }
    let spacing = h.spacing();
    ts.iter()
        .map(|&t| {
            let psi = propagate_free(eig, v, t)?;
            let x_norm = psi
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let x = h.coordinate(i);
                    x * x * c.norm_sqr()
                })
                .sum::<f64>()
                .sqrt();
            let d_norm = psi
                .windows(2)
                .map(|w| ((w[1] - w[0]) / spacing).norm_sqr())
                .sum::<f64>()
                .sqrt();
            Ok(MomentSample { t, x_norm, d_norm })
        })
        .collect()
}
