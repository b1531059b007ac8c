use serde::{Deserialize, Serialize};

use crate::calculus::ChiSpec;
use crate::error::{Error, Result};
use crate::geometry::ModelGeometry;

/// Geometric default sweep; every level keeps dense dimensions well below 2048.
pub const DEFAULT_N_LIST: [usize; 7] = [32, 48, 64, 96, 128, 192, 256];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Composition,
    Commutator,
    Trace,
    Funcalc,
    Parametrix,
    Kernel,
    SymbolClass,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Composition => "composition",
            Self::Commutator => "commutator",
            Self::Trace => "trace",
            Self::Funcalc => "funcalc",
            Self::Parametrix => "parametrix",
            Self::Kernel => "kernel",
            Self::SymbolClass => "symbol-class",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Input of [`run_experiment`](super::run_experiment). Missing fields take
/// per-experiment defaults; [`SweepConfig::resolved`] fills them in so the
/// echoed configuration reproduces the run exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub geometry: Option<String>,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub f: Option<String>,
    #[serde(default)]
    pub g: Option<String>,
    /// Order function for certification; `1` when absent.
    #[serde(default)]
    pub m: Option<String>,
    #[serde(default)]
    pub chi: Option<ChiSpec>,
    #[serde(default)]
    pub delta: Option<f64>,
    /// Star-product, parametrix or kernel-expansion order `J`.
    #[serde(default)]
    pub order: Option<u32>,
    /// Spectral parameter `[re, im]`.
    #[serde(default)]
    pub z: Option<[f64; 2]>,
    /// Evaluation point `[re, im]` for kernel expansions.
    #[serde(default)]
    pub point: Option<[f64; 2]>,
    /// Bargmann truncation radius at `δ = 0`; scaled by `N^{-δ}`.
    #[serde(default)]
    pub basis_radius: Option<f64>,
    /// Strip floor for Helffer–Sjöstrand; `N^{-2}` when absent.
    #[serde(default)]
    pub floor: Option<f64>,
    /// Target ∂̄-decay order of the almost-analytic extension.
    #[serde(default)]
    pub decay_order: Option<u32>,
    /// Strip half-width `Y`.
    #[serde(default)]
    pub strip: Option<f64>,
    /// Level at which the Helffer–Sjöstrand matrix is checked against the eigen oracle.
    #[serde(default)]
    pub hs_level: Option<usize>,
    #[serde(default)]
    pub hs_tolerance: Option<f64>,
    /// Overrides the slope tolerance of every fit.
    #[serde(default)]
    pub slope_tolerance: Option<f64>,
    #[serde(default)]
    pub max_alpha: Option<u32>,
    #[serde(default)]
    pub pairs: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

/// Gaussian-damped compactly supported symbols: the damping keeps the
/// edge of the bump out of the asymptotic window at these levels.
pub const DAMPED_F: &str = "bump(0, 1.2)*exp(-5*z*conj(z))";
pub const DAMPED_G: &str = "bump(0.2, 1)*exp(-5*(z - 0.2)*(conj(z) - 0.2))";
pub const DAMPED_SHIFTED: &str = "bump(0, 1.2)*exp(-5*z*conj(z)) + 2";
pub const HEIGHT_PLUS_TWO: &str = "(1 - z*conj(z))/(1 + z*conj(z)) + 2";

impl SweepConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            geometry: None,
            n_list: None,
            f: None,
            g: None,
            m: None,
            chi: None,
            delta: None,
            order: None,
            z: None,
            point: None,
            basis_radius: None,
            floor: None,
            decay_order: None,
            strip: None,
            hs_level: None,
            hs_tolerance: None,
            slope_tolerance: None,
            max_alpha: None,
            pairs: None,
            seed: None,
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// All defaults filled in.
    pub fn resolved(&self) -> Self {
        use Experiment::*;
        let e = self.experiment;
        let mut c = self.clone();
        let geometry = match e {
            Trace | Funcalc => "cp1",
            _ => "bargmann",
        };
        c.geometry.get_or_insert_with(|| geometry.into());
        c.n_list.get_or_insert_with(|| DEFAULT_N_LIST.to_vec());
        let cp1 = c.geometry.as_deref() == Some("cp1");
        if c.f.is_none() {
            c.f = Some(
                match e {
                    Composition | Commutator => DAMPED_F,
                    Funcalc => HEIGHT_PLUS_TWO,
                    Parametrix if cp1 => HEIGHT_PLUS_TWO,
                    Parametrix => DAMPED_SHIFTED,
                    Trace | Kernel | SymbolClass => "bump(0, 1)",
                }
                .into(),
            );
        }
        if c.g.is_none() && matches!(e, Composition | Commutator) {
            c.g = Some(DAMPED_G.into());
        }
        c.m.get_or_insert_with(|| "1".into());
        if e == Funcalc {
            c.chi.get_or_insert(ChiSpec::bump(2.0, 1.0));
            c.decay_order.get_or_insert(4);
            c.strip.get_or_insert(0.5);
            c.hs_level.get_or_insert(64);
            c.hs_tolerance.get_or_insert(1e-6);
        }
        c.delta.get_or_insert(0.0);
        let order = match e {
            Kernel if cp1 => 1,
            Kernel => 2,
            _ => 1,
        };
        c.order.get_or_insert(order);
        if e == Parametrix {
            c.z.get_or_insert([0.0, 0.0]);
            if !cp1 && c.f.as_deref() == Some(DAMPED_SHIFTED) {
                c.basis_radius.get_or_insert(1.2);
            }
        }
        if e == Kernel {
            c.point.get_or_insert([0.3, 0.1]);
            c.pairs.get_or_insert(32);
        }
        if e == SymbolClass {
            c.max_alpha.get_or_insert(2);
        }
        c.seed.get_or_insert(0);
        c
    }

    pub fn geometry(&self) -> Result<ModelGeometry> {
        match self.geometry.as_deref().unwrap_or("bargmann") {
            "bargmann" => Ok(ModelGeometry::bargmann()),
            "cp1" => Ok(ModelGeometry::projective_line()),
            other => Err(Error::Config(format!(
                "unknown geometry `{other}` (expected bargmann or cp1)"
            ))),
        }
    }

    pub fn levels(&self) -> &[usize] {
        self.n_list.as_deref().unwrap_or(&DEFAULT_N_LIST)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        let levels = self.levels();
        if levels.is_empty() {
            return Err(Error::Config("N list is empty".into()));
        }
        if levels[0] == 0 || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "N list must be positive and strictly increasing: {levels:?}"
            )));
        }
        let fits_slope = !matches!(self.experiment, Experiment::SymbolClass);
        if fits_slope && levels.len() < 3 {
            return Err(Error::Config(format!(
                "a slope assertion needs at least 3 levels, got {}",
                levels.len()
            )));
        }
        let delta = self.delta.unwrap_or(0.0);
        if !(0.0..0.5).contains(&delta) {
            return Err(Error::DeltaOutOfRange(delta));
        }
        if let Some(t) = self.slope_tolerance {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("slope tolerance {t} must be >= 0")));
            }
        }
        if let Some(r) = self.basis_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("basis radius {r} must be positive")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in [
            Experiment::Composition,
            Experiment::Commutator,
            Experiment::Trace,
            Experiment::Funcalc,
            Experiment::Parametrix,
            Experiment::Kernel,
            Experiment::SymbolClass,
        ] {
            assert_eq!(Experiment::parse(e.name()).unwrap(), e);
        }
        assert!(Experiment::parse("nope").is_err());
    }

    #[test]
    fn validation() {
        let mut c = SweepConfig::new(Experiment::Commutator);
        assert!(c.validate().is_ok());
        c.n_list = Some(vec![32, 32, 64]);
        assert!(c.validate().is_err());
        c.n_list = Some(vec![32, 64]);
        assert!(c.validate().is_err());
        c.n_list = Some(vec![32, 64, 128]);
        c.delta = Some(0.5);
        assert!(matches!(c.validate(), Err(Error::DeltaOutOfRange(_))));
        c.delta = Some(0.25);
        c.geometry = Some("torus".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn resolved_is_a_fixed_point() {
        let c = SweepConfig::new(Experiment::Funcalc).resolved();
        assert_eq!(c.resolved(), c);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(SweepConfig::from_json(&text).unwrap(), c);
        assert!(SweepConfig::from_json(r#"{"experiment":"trace","bogus":1}"#).is_err());
    }
}
