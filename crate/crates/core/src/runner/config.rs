use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attack::Averaging;
use crate::channel_sim::{Geometry, LargeScaleParams, RadioParams, ScenarioKind, ScenarioSpec};
use crate::error::{Error, Result};
use crate::randomness::RandomnessParams;

/// Scenario analogues: environment (indoor `I`, outdoor `O`) and channel
/// dynamics (`a` static … `d` moving Bob among moving scatterers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioLabel {
    Ia,
    Ib,
    Ic,
    Id,
    Ob,
    Od,
}

impl ScenarioLabel {
    pub const ALL: [ScenarioLabel; 6] = [
        ScenarioLabel::Ia,
        ScenarioLabel::Ib,
        ScenarioLabel::Ic,
        ScenarioLabel::Id,
        ScenarioLabel::Ob,
        ScenarioLabel::Od,
    ];

    pub fn kind(self) -> ScenarioKind {
        match self {
            ScenarioLabel::Ia => ScenarioKind::Static,
            ScenarioLabel::Ib | ScenarioLabel::Ob => ScenarioKind::MovingScatterers,
            ScenarioLabel::Ic => ScenarioKind::MovingBob,
            ScenarioLabel::Id | ScenarioLabel::Od => ScenarioKind::MovingBobAndScatterers,
        }
    }

    pub fn is_outdoor(self) -> bool {
        matches!(self, ScenarioLabel::Ob | ScenarioLabel::Od)
    }
}

impl fmt::Display for ScenarioLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for ScenarioLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioLabel::ALL
            .into_iter()
            .find(|l| l.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("scenarios", format!("unknown scenario `{s}` (expected Ia, Ib, Ic, Id, Ob or Od)")))
    }
}

/// Propagation and radio settings of one environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub large_scale: LargeScaleParams,
    pub radio: RadioParams,
    pub small_scale_sigma_db: f64,
    pub coherence_time: f64,
    pub probe_interval: f64,
    pub bob_speed: f64,
    pub arena_half_width: f64,
    pub heading_sigma: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Environment::indoor()
    }
}

impl Environment {
    pub fn indoor() -> Self {
        let base = ScenarioSpec::new(ScenarioKind::Static, 0);
        Environment {
            large_scale: LargeScaleParams::default(),
            radio: RadioParams::default(),
            small_scale_sigma_db: base.small_scale_sigma_db,
            coherence_time: base.coherence_time,
            probe_interval: base.probe_interval,
            bob_speed: base.bob_speed,
            arena_half_width: base.arena_half_width,
            heading_sigma: base.heading_sigma,
        }
    }

    /// Line of sight most of the time: weaker path-loss exponent, coarser
    /// shadowing, milder multipath.
    pub fn outdoor() -> Self {
        Environment {
            large_scale: LargeScaleParams {
                gamma: 2.7,
                sigma_chi: 4.0,
                shadow_decorr_dist: 200.0,
                ..LargeScaleParams::default()
            },
            small_scale_sigma_db: 3.5,
            ..Environment::indoor()
        }
    }

    pub fn scenario(&self, kind: ScenarioKind, n_rounds: usize, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            kind,
            bob_speed: self.bob_speed,
            probe_interval: self.probe_interval,
            n_rounds,
            coherence_time: self.coherence_time,
            small_scale_sigma_db: self.small_scale_sigma_db,
            arena_half_width: self.arena_half_width,
            heading_sigma: self.heading_sigma,
            seed,
        }
    }
}

/// A sweep over scenarios, ring radii and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenarios: Vec<ScenarioLabel>,
    /// Eve-ring radii in carrier wavelengths.
    pub r_wavelengths: Vec<f64>,
    pub mwa_windows: Vec<usize>,
    pub key_length: usize,
    pub z_max: usize,
    pub bin_db: f64,
    pub seeds: Vec<u64>,
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub n_rounds: usize,
    pub eves: usize,
    /// Alice–Bob distance at the start of a run, m.
    pub distance_m: f64,
    /// Bearing of the first eavesdropper, rad.
    pub alpha: f64,
    pub carrier_hz: f64,
    pub averaging: Averaging,
    /// Cells whose `I(A;B)` falls below this are flagged unsuitable.
    pub feasibility_floor_bits: f64,
    /// Largest suppressed-component count in the capacity curves; 0 disables.
    pub curve_z_max: usize,
    pub randomness: RandomnessParams,
    pub indoor: Environment,
    pub outdoor: Environment,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenarios: ScenarioLabel::ALL.to_vec(),
            r_wavelengths: vec![2.0, 3.0, 4.0, 5.0],
            mwa_windows: vec![0, 5, 15, 25, 35, 45],
            key_length: 256,
            z_max: 100,
            bin_db: 1.0,
            seeds: vec![1],
            output_dir: PathBuf::from("out"),
            n_rounds: 10_000,
            eves: 4,
            distance_m: 100.0,
            alpha: 0.3,
            carrier_hz: 915e6,
            averaging: Averaging::LinearAverage,
            feasibility_floor_bits: 0.1,
            curve_z_max: 30,
            randomness: RandomnessParams::default(),
            indoor: Environment::indoor(),
            outdoor: Environment::outdoor(),
        }
    }
}

impl ExperimentConfig {
    /// Reads a TOML file; absent keys keep their defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config { field, reason } => Error::config(field, format!("{}: {reason}", path.display())),
            other => other,
        })
    }

    /// Parses TOML on top of the defaults. Nested tables override key by
    /// key, so `[outdoor.large_scale] sigma_chi = 2` keeps the outdoor
    /// path-loss exponent.
    pub fn from_toml(text: &str) -> Result<Self> {
        let user: toml::Table = toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        let mut base = toml::Table::try_from(Self::default()).expect("defaults serialize");
        merge(&mut base, user);
        base.try_into().map_err(|e: toml::de::Error| Error::config("config", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::config("scenarios", "must not be empty"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "must not be empty"));
        }
        if self.r_wavelengths.is_empty() {
            return Err(Error::config("r_wavelengths", "must not be empty"));
        }
        if let Some(r) = self.r_wavelengths.iter().find(|&&r| !(r >= 0.5)) {
            return Err(Error::config("r_wavelengths", format!("{r} is below half a wavelength")));
        }
        if let Some(w) = self.mwa_windows.iter().find(|&&w| w > 1 && w % 2 == 0) {
            return Err(Error::config("mwa_windows", format!("window {w} is even")));
        }
        if self.key_length < 128 || self.key_length > self.n_rounds {
            return Err(Error::config(
                "key_length",
                format!("{} must lie in 128..={}", self.key_length, self.n_rounds),
            ));
        }
        if self.z_max < 2 || self.z_max >= self.n_rounds {
            return Err(Error::config("z_max", format!("{} must lie in 2..{}", self.z_max, self.n_rounds)));
        }
        if self.curve_z_max >= self.n_rounds {
            return Err(Error::config("curve_z_max", "must be below n_rounds"));
        }
        if !(self.bin_db > 0.0) {
            return Err(Error::config("bin_db", "must be positive"));
        }
        if self.eves == 0 {
            return Err(Error::config("eves", "needs at least one eavesdropper"));
        }
        for env in [&self.indoor, &self.outdoor] {
            env.large_scale.validate()?;
            env.radio.validate()?;
            env.scenario(ScenarioKind::MovingBobAndScatterers, self.n_rounds, 0).validate()?;
        }
        for &r in &self.r_wavelengths {
            self.geometry(r)?;
        }
        Ok(())
    }

    pub fn environment(&self, label: ScenarioLabel) -> &Environment {
        if label.is_outdoor() {
            &self.outdoor
        } else {
            &self.indoor
        }
    }

    pub fn geometry(&self, r_wavelengths: f64) -> Result<Geometry> {
        Geometry::with_carrier(self.distance_m, r_wavelengths, self.alpha, self.eves, self.carrier_hz)
    }

    /// SHA-256 of the canonical JSON form (output directory excluded).
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_overrides() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            scenarios = ["Od"]
            seeds = [3, 4]
            key_length = 128
            [outdoor.large_scale]
            sigma_chi = 2.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.scenarios, vec![ScenarioLabel::Od]);
        assert_eq!(cfg.outdoor.large_scale.sigma_chi, 2.0);
        assert_eq!(cfg.outdoor.large_scale.gamma, Environment::outdoor().large_scale.gamma);
        assert_eq!(cfg.z_max, 100);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("sedes = [1]").is_err());
        assert!(ExperimentConfig::from_toml("[indoor.radio]\npt = 3").is_err());
    }

    #[test]
    fn invalid_fields_named() {
        let mut cfg = ExperimentConfig::default();
        cfg.seeds.clear();
        assert!(matches!(cfg.validate(), Err(Error::Config { field: "seeds", .. })));
        let mut cfg = ExperimentConfig::default();
        cfg.r_wavelengths = vec![0.2];
        assert!(matches!(cfg.validate(), Err(Error::Config { field: "r_wavelengths", .. })));
    }

    #[test]
    fn digest_ignores_output_dir() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        assert_eq!(a.digest(), b.digest());
        b.seeds.push(9);
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn labels_parse() {
        assert_eq!("od".parse::<ScenarioLabel>().unwrap(), ScenarioLabel::Od);
        assert!("Oc".parse::<ScenarioLabel>().is_err());
    }
}
