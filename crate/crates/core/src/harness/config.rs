//! Declarative experiment configuration.
//!
//! One TOML file describes every experiment; all fields have defaults, so an
//! empty (or missing) file runs the standard impurity-chain study. CLI flags
//! override individual fields after loading.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TruncatedHamiltonian;

/// A real grid, either an explicit list or an inclusive range.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Grid {
    Range { min: f64, max: f64, step: f64 },
    List(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            Grid::List(v) => {
                if v.is_empty() {
                    return Err(Error::Config("empty grid".into()));
                }
                if v.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Config("grid list must be sorted ascending".into()));
                }
                Ok(v.clone())
            }
            Grid::Range { min, max, step } => {
                if !(*step > 0.0) || max < min {
                    return Err(Error::Config(format!(
                        "bad grid range: min {min}, max {max}, step {step}"
                    )));
                }
                let n = ((max - min) / step).round() as usize;
                Ok((0..=n).map(|i| min + i as f64 * step).collect())
            }
        }
    }
}

/// A logarithmically spaced grid.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum LogGrid {
    Count { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl LogGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            LogGrid::List(v) => {
                if v.is_empty() || v.iter().any(|&x| !(x > 0.0)) {
                    return Err(Error::Config("log grid values must be positive".into()));
                }
                if v.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Config("log grid list must be sorted ascending".into()));
                }
                Ok(v.clone())
            }
            LogGrid::Count { min, max, count } => {
                if !(*min > 0.0) || max < min || *count < 2 {
                    return Err(Error::Config(format!(
                        "bad log grid: min {min}, max {max}, count {count}"
                    )));
                }
                let lmin = min.ln();
                let lmax = max.ln();
                Ok((0..*count)
                    .map(|i| (lmin + (lmax - lmin) * i as f64 / (*count - 1) as f64).exp())
                    .collect())
            }
        }
    }
}

/// Model selection. Box half-widths come from the per-experiment L lists.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    LatticeImpurity {
        v: f64,
    },
    LatticeOnsite {
        values: Vec<f64>,
    },
    Continuum {
        preset: String,
        depth: f64,
        #[serde(default)]
        width: f64,
        l: f64,
        h: f64,
    },
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::LatticeImpurity { v: -4.0 }
    }
}

impl ModelConfig {
    /// Build the Hamiltonian at box half-width `l` (the lattice-onsite and
    /// continuum variants carry their own size and ignore it).
    pub fn build(&self, l: usize) -> Result<TruncatedHamiltonian> {
        match self {
            ModelConfig::LatticeImpurity { v } => TruncatedHamiltonian::build_lattice(*v, l),
            ModelConfig::LatticeOnsite { values } => {
                TruncatedHamiltonian::build_lattice_onsite(values.clone())
            }
            ModelConfig::Continuum {
                preset,
                depth,
                width,
                l,
                h,
            } => {
                let p = match preset.as_str() {
                    "poschl-teller" => crate::model::PotentialPreset::PoschlTeller { depth: *depth },
                    "gaussian-well" => crate::model::PotentialPreset::GaussianWell {
                        depth: *depth,
                        width: if *width > 0.0 { *width } else { 1.0 },
                    },
                    other => {
                        return Err(Error::Config(format!("unknown potential preset '{other}'")))
                    }
                };
                TruncatedHamiltonian::build_continuum(p, *l, *h)
            }
        }
    }

    /// Impurity strength, required by every experiment that compares against
    /// the infinite-lattice reference.
    pub fn impurity_v(&self) -> Result<f64> {
        match self {
            ModelConfig::LatticeImpurity { v } => Ok(*v),
            _ => Err(Error::Config(
                "this experiment needs the lattice-impurity model (the exact reference \
                 exists only there)"
                    .into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridsConfig {
    pub l_values: Vec<usize>,
    pub etas: Vec<f64>,
    pub omegas: Grid,
    pub taus: Grid,
}

impl Default for GridsConfig {
    fn default() -> Self {
        GridsConfig {
            l_values: vec![30, 100, 1000],
            etas: vec![0.02, 0.5],
            omegas: Grid::Range {
                min: 0.0,
                max: 9.0,
                step: 0.01,
            },
            taus: Grid::Range {
                min: 0.0,
                max: 100.0,
                step: 0.05,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub omegas: Vec<f64>,
    pub etas: Vec<f64>,
    pub l_values: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            omegas: vec![3.0],
            etas: vec![0.05, 0.1, 0.2],
            l_values: vec![50, 71, 100, 141, 200, 283, 400, 566, 800, 1131, 1600],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LapRateConfig {
    pub omega: f64,
    pub etas: LogGrid,
}

impl Default for LapRateConfig {
    fn default() -> Self {
        LapRateConfig {
            omega: 3.0,
            etas: LogGrid::Count {
                min: 1e-3,
                max: 1e-1,
                count: 13,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LocalityConfig {
    pub omega: f64,
    pub etas: Vec<f64>,
    pub l: usize,
}

impl Default for LocalityConfig {
    fn default() -> Self {
        LocalityConfig {
            omega: 3.0,
            etas: vec![0.05, 0.1, 0.2, 0.4],
            l: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OptimalEtaConfig {
    pub omega: f64,
    pub l_values: Vec<usize>,
    pub scan: LogGrid,
}

impl Default for OptimalEtaConfig {
    fn default() -> Self {
        OptimalEtaConfig {
            omega: 3.0,
            l_values: vec![250, 500, 1000, 2000],
            scan: LogGrid::Count {
                min: 1e-3,
                max: 0.5,
                count: 68,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DistconvConfig {
    pub l_values: Vec<usize>,
    pub l_ref: usize,
    pub g_center: f64,
    pub g_width: f64,
    pub tau_max: f64,
    pub tau_step: f64,
}

impl Default for DistconvConfig {
    fn default() -> Self {
        DistconvConfig {
            l_values: vec![100, 200, 400],
            l_ref: 1600,
            g_center: 10.0,
            g_width: 5.0,
            tau_max: 50.0,
            tau_step: 0.02,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct KuboConfig {
    pub drive: String,
    pub epsilons: Vec<f64>,
    pub t_final: f64,
    /// Step size; when absent, dt = min(0.01, 0.1/(‖H‖+ε)).
    pub dt: Option<f64>,
    pub l: usize,
}

impl Default for KuboConfig {
    fn default() -> Self {
        KuboConfig {
            drive: "ramp".into(),
            epsilons: vec![0.01, 0.02, 0.04, 0.08],
            t_final: 10.0,
            dt: None,
            l: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct KernelsConfig {
    pub families: Vec<String>,
    pub omega: f64,
    /// Widths for the Lorentzian and Gaussian families.
    pub etas: LogGrid,
    /// Widths for the higher-order families (their signal sits higher).
    pub hermite_etas: LogGrid,
    /// Box half-width for the spectral weights; must keep the finite-size
    /// error below the smallest-width signal.
    pub l: usize,
}

impl Default for KernelsConfig {
    fn default() -> Self {
        KernelsConfig {
            families: vec!["lorentzian".into(), "gaussian".into(), "hermite3".into()],
            omega: 3.0,
            etas: LogGrid::Count {
                min: 0.01,
                max: 0.1,
                count: 9,
            },
            hermite_etas: LogGrid::Count {
                min: 0.0125,
                max: 0.125,
                count: 9,
            },
            l: 1600,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FiguresConfig {
    pub fig1_l: Vec<usize>,
    pub fig1_taus: Grid,
    pub fig2_l: Vec<usize>,
    pub fig2_etas: Vec<f64>,
    pub fig2_omegas: Grid,
}

impl Default for FiguresConfig {
    fn default() -> Self {
        FiguresConfig {
            fig1_l: vec![30, 100, 1000],
            fig1_taus: Grid::Range {
                min: 0.0,
                max: 100.0,
                step: 0.05,
            },
            fig2_l: vec![30, 1000],
            fig2_etas: vec![0.02, 0.5],
            fig2_omegas: Grid::Range {
                min: 0.0,
                max: 9.0,
                step: 0.005,
            },
        }
    }
}

/// Everything a run needs; serialized verbatim into the manifest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub model: ModelConfig,
    pub grids: GridsConfig,
    pub sweep: SweepConfig,
    pub lap_rate: LapRateConfig,
    pub locality: LocalityConfig,
    pub optimal_eta: OptimalEtaConfig,
    pub distconv: DistconvConfig,
    pub kubo: KuboConfig,
    pub kernels: KernelsConfig,
    pub figures: FiguresConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            out_dir: PathBuf::from("out"),
            model: ModelConfig::default(),
            grids: GridsConfig::default(),
            sweep: SweepConfig::default(),
            lap_rate: LapRateConfig::default(),
            locality: LocalityConfig::default(),
            optimal_eta: OptimalEtaConfig::default(),
            distconv: DistconvConfig::default(),
            kubo: KuboConfig::default(),
            kernels: KernelsConfig::default(),
            figures: FiguresConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("cannot parse {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grids.l_values.is_empty()
            || self.sweep.l_values.is_empty()
            || self.sweep.omegas.is_empty()
            || self.sweep.etas.is_empty()
        {
            return Err(Error::Config("sweep lists must be non-empty".into()));
        }
        for &eta in self.grids.etas.iter().chain(&self.sweep.etas) {
            if !(eta > 0.0) {
                return Err(Error::Config(format!("eta values must be positive, got {eta}")));
            }
        }
        if self.sweep.omegas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("sweep omegas must be sorted ascending".into()));
        }
        self.grids.omegas.points()?;
        self.grids.taus.points()?;
        self.lap_rate.etas.points()?;
        self.optimal_eta.scan.points()?;
        self.kernels.etas.points()?;
        self.kernels.hermite_etas.points()?;
        for f in &self.kernels.families {
            crate::smoothing::KernelFamily::parse(f)?;
        }
        crate::dynamics::Drive::parse(&self.kubo.drive)?;
        if self.distconv.l_ref < 4 * self.distconv.l_values.iter().copied().max().unwrap_or(0) {
            return Err(Error::Config(
                "distconv reference box must be at least 4x the largest probed box".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            seed = 7
            [model]
            kind = "lattice-impurity"
            v = -2.5
            [sweep]
            omegas = [3.0]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.model.impurity_v().unwrap(), -2.5);
        assert_eq!(cfg.sweep.etas, SweepConfig::default().etas);
    }

    #[test]
    fn unknown_keys_rejected() {
        let r: std::result::Result<ExperimentConfig, _> = toml::from_str("banana = 3");
        assert!(r.is_err());
    }

    #[test]
    fn grid_points() {
        let g = Grid::Range {
            min: 0.0,
            max: 1.0,
            step: 0.25,
        };
        assert_eq!(g.points().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let l = LogGrid::Count {
            min: 1e-2,
            max: 1.0,
            count: 3,
        };
        let p = l.points().unwrap();
        assert!((p[1] - 0.1).abs() < 1e-12);
        assert!(Grid::List(vec![]).points().is_err());
        assert!(Grid::List(vec![2.0, 1.0]).points().is_err());
        assert!(LogGrid::List(vec![0.2, 0.1]).points().is_err());
        assert!(LogGrid::List(vec![0.0, 0.1]).points().is_err());
    }
}
