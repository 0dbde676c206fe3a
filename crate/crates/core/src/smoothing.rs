//! Smoothing kernels of prescribed moment order applied to discrete
//! spectral measures.
//!
//! A kernel of order p (unit mass, moments 1..p vanishing) convolved at
//! width η against a C^{p+1} density reproduces it to O(η^{p+1}). The
//! Lorentzian is the special case built into the resolvent at finite η; its
//! heavy 1/x² tails spoil the even-moment cancellation and leave an O(η)
//! error, so it carries no formal order here. Higher orders come from the
//! classical even-polynomial-times-Gaussian construction.

use crate::error::{Error, Result};
use crate::fit::{self, FloorFit};

const SQRT_TWO_PI: f64 = 2.5066282746310002;

/// Kernel family. `Hermite(p)` is the Gaussian multiplied by the even
/// polynomial cancelling moments 2..p; p must be odd and at least 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Lorentzian,
    Gaussian,
    Hermite(u32),
}

impl KernelFamily {
    /// Moment order: smallest p such that moments 1..p vanish. The
    /// Lorentzian has no finite even moments and gets none.
    pub fn order(&self) -> Option<u32> {
        match self {
            KernelFamily::Lorentzian => None,
            KernelFamily::Gaussian => Some(1),
            KernelFamily::Hermite(p) => Some(*p),
        }
    }

    pub fn label(&self) -> String {
        match self {
            KernelFamily::Lorentzian => "lorentzian".into(),
            KernelFamily::Gaussian => "gaussian".into(),
            KernelFamily::Hermite(p) => format!("hermite{p}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lorentzian" => Ok(KernelFamily::Lorentzian),
            "gaussian" => Ok(KernelFamily::Gaussian),
            _ => {
                if let Some(rest) = s.strip_prefix("hermite") {
                    let p: u32 = rest
                        .parse()
                        .map_err(|_| Error::Config(format!("unknown kernel family '{s}'")))?;
                    validate_hermite_order(p)?;
                    Ok(KernelFamily::Hermite(p))
                } else {
                    Err(Error::Config(format!("unknown kernel family '{s}'")))
                }
            }
        }
    }
}

fn validate_hermite_order(p: u32) -> Result<()> {
    if p.is_multiple_of(2) || !(3..=9).contains(&p) {
        return Err(Error::Domain(format!(
            "hermite order must be odd and within 3..=9, got {p}"
        )));
    }
    Ok(())
}

/// A kernel family at width η: φ_η(x) = φ(x/η)/η.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    family: KernelFamily,
    eta: f64,
    /// Coefficients of the even polynomial for the Hermite family
    /// (c[j] multiplies x^{2j}).
    poly: Vec<f64>,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::Domain(format!("kernel width must be positive, got {eta}")));
        }
        let poly = match family {
            KernelFamily::Hermite(p) => {
                validate_hermite_order(p)?;
                hermite_coefficients(p)
            }
            _ => Vec::new(),
        };
        Ok(KernelSpec { family, eta, poly })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Unit-mass base profile φ(x).
    pub fn base_eval(&self, x: f64) -> f64 {
        match self.family {
            KernelFamily::Lorentzian => std::f64::consts::FRAC_1_PI / (1.0 + x * x),
            KernelFamily::Gaussian => (-0.5 * x * x).exp() / SQRT_TWO_PI,
            KernelFamily::Hermite(_) => {
                let x2 = x * x;
                let mut poly = 0.0;
                for &c in self.poly.iter().rev() {
                    poly = poly * x2 + c;
                }
                poly * (-0.5 * x2).exp() / SQRT_TWO_PI
            }
        }
    }

    /// φ_η(x) = φ(x/η)/η.
    pub fn eval(&self, x: f64) -> f64 {
        self.base_eval(x / self.eta) / self.eta
    }

    /// Beyond this distance the Gaussian-type kernels are numerically zero;
    /// the Lorentzian tails never truncate.
    fn cutoff(&self) -> f64 {
        match self.family {
            KernelFamily::Lorentzian => f64::INFINITY,
            _ => 16.0 * self.eta,
        }
    }
}

/// Coefficients c_j of Σ c_j x^{2j} such that the polynomial-times-Gaussian
/// kernel has unit mass and vanishing moments 2..p, via the Gaussian moment
/// table M_{2k} = (2k-1)!!.
fn hermite_coefficients(p: u32) -> Vec<f64> {
    let m = ((p - 1) / 2) as usize;
    // double factorials (2k-1)!! for k = 0.. (M_0 = 1)
    let mut moments = vec![1.0f64; 2 * m + 1];
    for k in 1..=2 * m {
        moments[k] = moments[k - 1] * (2 * k - 1) as f64;
    }
    // A[i][j] = M_{2(i+j)}, rhs = e_0
    let dim = m + 1;
    let mut a = vec![vec![0.0f64; dim]; dim];
    for i in 0..dim {
        a[i].copy_from_slice(&moments[i..i + dim]);
    }
    let mut rhs = vec![0.0f64; dim];
    rhs[0] = 1.0;
    // Gaussian elimination with partial pivoting on the tiny system
    for col in 0..dim {
        let piv = (col..dim)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..dim {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, &p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut c = vec![0.0f64; dim];
    for row in (0..dim).rev() {
        let mut acc = rhs[row];
        for k in row + 1..dim {
            acc -= a[row][k] * c[k];
        }
        c[row] = acc / a[row][row];
    }
    c
}

/// Smoothed spectral density A_η(ω) = Σ_k w_k φ_η(ω - f_k) on a grid of ω.
pub fn smoothed_density(
    weights: &[f64],
    frequencies: &[f64],
    spec: &KernelSpec,
    omegas: &[f64],
) -> Vec<f64> {
    let cutoff = spec.cutoff();
    omegas
        .iter()
        .map(|&om| {
            weights
                .iter()
                .zip(frequencies)
                .filter(|(_, &f)| (om - f).abs() <= cutoff)
                .map(|(&w, &f)| w * spec.eval(om - f))
                .sum()
        })
        .collect()
}

/// Measured convergence order of a kernel family at one frequency.
#[derive(Debug, Clone)]
pub struct OrderSlope {
    pub family: KernelFamily,
    pub omega: f64,
    /// (eta, |A_eta(omega) - exact|) rows, in input order.
    pub rows: Vec<(f64, f64)>,
    pub fit: FloorFit,
}

impl OrderSlope {
    pub fn slope(&self) -> f64 {
        self.fit.fit.slope
    }
}

/// Least-squares slope of log|A_η(ω) - exact| against log η. Points on a
/// detected noise floor (finite box or round-off) are excluded and reported
/// through the fit.
pub fn order_slope(
    family: KernelFamily,
    omega: f64,
    etas: &[f64],
    exact: f64,
    weights: &[f64],
    frequencies: &[f64],
) -> Result<OrderSlope> {
    if etas.len() < 2 {
        return Err(Error::Domain("need at least two widths".into()));
    }
    let (lo, hi) = etas
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if hi / lo < 10.0 - 1e-9 {
        return Err(Error::Domain(format!(
            "widths must span at least a decade, got [{lo}, {hi}]"
        )));
    }
    let mut rows = Vec::with_capacity(etas.len());
    for &eta in etas {
        let spec = KernelSpec::new(family, eta)?;
        let a = smoothed_density(weights, frequencies, &spec, &[omega])[0];
        rows.push((eta, (a - exact).abs()));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let fit = fit::fit_log_log(&xs, &errs)?;
    Ok(OrderSlope {
        family,
        omega,
        rows,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson quadrature of f over [a, b].
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = if n.is_multiple_of(2) { n } else { n + 1 };
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn lorentzian_peak_value() {
        let k = KernelSpec::new(KernelFamily::Lorentzian, 1.0).unwrap();
        assert!((k.eval(0.0) - std::f64::consts::FRAC_1_PI).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_width_rejected() {
        assert!(KernelSpec::new(KernelFamily::Gaussian, 0.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Gaussian, -0.2).is_err());
    }

    #[test]
    fn unit_mass_by_quadrature() {
        for family in [
            KernelFamily::Gaussian,
            KernelFamily::Hermite(3),
            KernelFamily::Hermite(5),
        ] {
            let k = KernelSpec::new(family, 0.7).unwrap();
            let mass = simpson(|x| k.eval(x), -20.0, 20.0, 40_000);
            assert!((mass - 1.0).abs() < 1e-10, "{family:?}: mass {mass}");
        }
        // Lorentzian tails need a wide window and converge like 1/X
        let k = KernelSpec::new(KernelFamily::Lorentzian, 1.0).unwrap();
        let mass = simpson(|x| k.eval(x), -4e4, 4e4, 4_000_000);
        assert!((mass - 1.0).abs() < 1e-4);
    }

    #[test]
    fn hermite3_cancels_second_moment() {
        // independent quadrature check of the constructed coefficients
        let k = KernelSpec::new(KernelFamily::Hermite(3), 1.0).unwrap();
        let m2 = simpson(|x| x * x * k.base_eval(x), -25.0, 25.0, 100_000);
        assert!(m2.abs() < 1e-8, "m2 = {m2}");
        // closed form of the coefficients: 3/2 - x^2/2
        assert!((k.poly[0] - 1.5).abs() < 1e-12);
        assert!((k.poly[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn moment_table_up_to_order() {
        for p in [3u32, 5, 7] {
            let k = KernelSpec::new(KernelFamily::Hermite(p), 1.0).unwrap();
            for q in 1..=p {
                let m = simpson(|x| x.powi(q as i32) * k.base_eval(x), -30.0, 30.0, 200_000);
                assert!(m.abs() < 1e-8, "hermite({p}): moment {q} = {m}");
            }
            let m_next = simpson(
                |x| x.powi(p as i32 + 1) * k.base_eval(x),
                -30.0,
                30.0,
                200_000,
            );
            assert!(m_next.abs() > 1e-3, "hermite({p}): moment {} vanished", p + 1);
        }
        // Gaussian: first moment zero, second not
        let g = KernelSpec::new(KernelFamily::Gaussian, 1.0).unwrap();
        let m1 = simpson(|x| x * g.base_eval(x), -20.0, 20.0, 50_000);
        let m2 = simpson(|x| x * x * g.base_eval(x), -20.0, 20.0, 50_000);
        assert!(m1.abs() < 1e-12);
        assert!((m2 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn pointwise_positivity_where_promised() {
        let lor = KernelSpec::new(KernelFamily::Lorentzian, 0.3).unwrap();
        let gau = KernelSpec::new(KernelFamily::Gaussian, 0.3).unwrap();
        for i in -300..=300 {
            let x = i as f64 * 0.05;
            assert!(lor.eval(x) > 0.0);
            assert!(gau.eval(x) >= 0.0);
        }
    }

    #[test]
    fn single_weight_reproduces_kernel() {
        let spec = KernelSpec::new(KernelFamily::Gaussian, 0.2).unwrap();
        let omegas: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.05).collect();
        let a = smoothed_density(&[1.0], &[0.0], &spec, &omegas);
        for (i, &om) in omegas.iter().enumerate() {
            assert!((a[i] - spec.eval(om)).abs() < 1e-14);
        }
    }

    #[test]
    fn parse_family_labels() {
        assert_eq!(KernelFamily::parse("lorentzian").unwrap(), KernelFamily::Lorentzian);
        assert_eq!(KernelFamily::parse("gaussian").unwrap(), KernelFamily::Gaussian);
        assert_eq!(KernelFamily::parse("hermite3").unwrap(), KernelFamily::Hermite(3));
        assert!(KernelFamily::parse("hermite4").is_err());
        assert!(KernelFamily::parse("boxcar").is_err());
    }

    #[test]
    fn order_slope_requires_a_decade() {
        let err = order_slope(
            KernelFamily::Gaussian,
            0.0,
            &[0.1, 0.2],
            0.0,
            &[1.0],
            &[0.0],
        );
        assert!(err.is_err());
    }
}
