//! Hamiltonians truncated to a finite box with Dirichlet boundary conditions.
//!
//! Two families are supported: the one-dimensional tight-binding chain with
//! unit hopping (optionally carrying an impurity on site 0 or an arbitrary
//! on-site vector), and a three-point finite-difference discretisation of
//! -d²/dx² + V(x) on the open interval (-L, L). Both are real symmetric
//! tridiagonal and immutable after construction.

use crate::error::{Error, Result};

/// Declarative description of a truncated model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Tight-binding chain on sites {-L, ..., L}, impurity `v` on site 0.
    LatticeImpurity { v: f64, l: usize },
    /// Tight-binding chain with an explicit on-site vector (odd length,
    /// centered on site 0).
    LatticeOnsite { values: Vec<f64> },
    /// Finite differences for -d²/dx² + V on (-l, l) with grid spacing `h`.
    Continuum1d {
        potential: PotentialPreset,
        l: f64,
        h: f64,
    },
}

/// Named continuum potentials with known or easily verified ground states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialPreset {
    /// V(x) = -depth / cosh²(x). depth = 2 binds a single state at E = -1.
    PoschlTeller { depth: f64 },
    /// V(x) = -depth exp(-x² / (2 width²)).
    GaussianWell { depth: f64, width: f64 },
}

impl PotentialPreset {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            PotentialPreset::PoschlTeller { depth } => -depth / x.cosh().powi(2),
            PotentialPreset::GaussianWell { depth, width } => {
                -depth * (-x * x / (2.0 * width * width)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    Lattice,
    Continuum,
}

/// Real symmetric tridiagonal operator for a box of half-width L.
#[derive(Debug, Clone)]
pub struct TruncatedHamiltonian {
    kind: HamiltonianKind,
    half_width: f64,
    spacing: f64,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TruncatedHamiltonian {
    /// Chain of 2L+1 sites with unit hopping and impurity `v` on the center
    /// site, Dirichlet ends.
    pub fn build_lattice(v: f64, l: usize) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidModel(format!("impurity strength {v} is not finite")));
        }
        if l < 1 {
            return Err(Error::InvalidModel("box half-width must be at least 1".into()));
        }
        let n = 2 * l + 1;
        let mut diag = vec![0.0; n];
        diag[l] = v;
        Ok(Self {
            kind: HamiltonianKind::Lattice,
            half_width: l as f64,
            spacing: 1.0,
            diag,
            offdiag: vec![1.0; n - 1],
        })
    }

    /// Chain with an explicit on-site vector; length must be odd so the
    /// center entry sits on site 0.
    pub fn build_lattice_onsite(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 || values.len().is_multiple_of(2) {
            return Err(Error::InvalidModel(format!(
                "on-site vector length {} must be odd and at least 3",
                values.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("on-site vector has non-finite entries".into()));
        }
        let n = values.len();
        Ok(Self {
            kind: HamiltonianKind::Lattice,
            half_width: ((n - 1) / 2) as f64,
            spacing: 1.0,
            diag: values,
            offdiag: vec![1.0; n - 1],
        })
    }

    /// Three-point finite differences for -d²/dx² + V on (-l, l) with
    /// Dirichlet ends: diag_i = 2/h² + V(x_i), offdiag = -1/h².
    ///
    /// The requested spacing is rounded so that an integer number of grid
    /// cells fits the box exactly.
    pub fn build_continuum(potential: PotentialPreset, l: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidModel(format!("grid spacing {h} must be positive")));
        }
        if !(l > 0.0) || !l.is_finite() || l / h < 2.0 {
            return Err(Error::InvalidModel(format!(
                "degenerate interval: half-width {l} with spacing {h}"
            )));
        }
        let cells = (2.0 * l / h).round() as usize;
        let n = cells - 1;
        let spacing = 2.0 * l / cells as f64;
        let inv_h2 = 1.0 / (spacing * spacing);
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let x = -l + (i + 1) as f64 * spacing;
                2.0 * inv_h2 + potential.eval(x)
            })
            .collect();
        if diag.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("potential produced non-finite entries".into()));
        }
        Ok(Self {
            kind: HamiltonianKind::Continuum,
            half_width: l,
            spacing,
            diag,
            offdiag: vec![-inv_h2; n - 1],
        })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::LatticeImpurity { v, l } => Self::build_lattice(*v, *l),
            ModelSpec::LatticeOnsite { values } => Self::build_lattice_onsite(values.clone()),
            ModelSpec::Continuum1d { potential, l, h } => Self::build_continuum(*potential, *l, *h),
        }
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }

    /// Matrix dimension.
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Box half-width (site count for the lattice, length for the continuum).
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Grid spacing (1 for the lattice).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Index of the site closest to x = 0.
    pub fn center(&self) -> usize {
        (self.n() - 1) / 2
    }

    /// Position coordinate of grid index i, centered on the box.
    pub fn coordinate(&self, i: usize) -> f64 {
        match self.kind {
            HamiltonianKind::Lattice => i as f64 - self.half_width,
            HamiltonianKind::Continuum => -self.half_width + (i + 1) as f64 * self.spacing,
        }
    }

    /// Tridiagonal matrix-vector product. Works for real and complex vectors.
    pub fn apply<T>(&self, v: &[T]) -> Result<Vec<T>>
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let n = self.n();
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: v.len(),
            });
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = v[i] * self.diag[i];
            if i > 0 {
                acc = acc + v[i - 1] * self.offdiag[i - 1];
            }
            if i + 1 < n {
                acc = acc + v[i + 1] * self.offdiag[i];
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Gershgorin bound on the operator norm.
    pub fn op_norm_bound(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut r = self.diag[i].abs();
                if i > 0 {
                    r += self.offdiag[i - 1].abs();
                }
                if i + 1 < n {
                    r += self.offdiag[i].abs();
                }
                r
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }
}
