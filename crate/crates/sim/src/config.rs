//! Simulation configuration and its flat `key = value` file format.
//!
//! Every key has a default; a config file only lists what it changes. Lines
//! starting with `#` and blank lines are ignored, unknown keys are errors.
//! Lists are comma separated. Powers in the RIS section are in microwatts.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `scheme` | `tim` | `tim` (indexed slots) or `benchmark` (first `L` slots carry data) |
//! | `slots` | `8` | block length `K` |
//! | `info_slots` | `2` | information slots `L` |
//! | `modulation_order` | `4` | constellation size `M` |
//! | `constellation` | `qam` | `qam` or `psk` |
//! | `rx_antennas` | `4` | PRx antennas `M_R` |
//! | `ris_elements` | `256` | RIS unit cells `N` |
//! | `assist_cells` | `60` | `N₁` |
//! | `absorb_cells` | `35` | `N₂` (`N₃ = N − N₁ − N₂`) |
//! | `cells_per_controller` | `4` | `N_cb` |
//! | `cell_technology` | `rf-switch` | `rf-switch` or `varactor` |
//! | `controller_power_uw` | `50` | `P_cb` |
//! | `drive_power_uw` | `40` | `P_drv` |
//! | `switch_power_uw` | `1` | `P_switch` |
//! | `varactor_power_uw` | `0` | `P_varactor` |
//! | `ris_efficiency`, `ris_turn_on_uw`, `ris_saturation_uw` | `0.75`, `150`, `70000` | RIS rectenna |
//! | `eh_efficiency`, `eh_turn_on_uw`, `eh_saturation_uw` | `0.75`, `50`, `100` | EH rectenna |
//! | `p_low_dbm`, `p_high_dbm` | `30`, `34` | `P_L`, `P_H` |
//! | `omega_phase_rad` | `0` | phase of the power waveform |
//! | `carrier_ghz` | `2` | carrier frequency |
//! | `dist_ptx_prx`, `dist_ptx_ris`, `dist_ris_prx`, `dist_ptx_eh`, `dist_ris_eh` | `14`, `5`, `10`, `14`, `10` | link distances in meters |
//! | `kappa_ptx_prx`, `kappa_ptx_ris`, `kappa_ris_prx`, `kappa_ptx_eh`, `kappa_ris_eh` | `5` each | Rician factors |
//! | `los_phase` | `aligned` | `aligned` or `random` (one draw per run) |
//! | `phase_assignment` | `0,1,2` | level indices of `φ₁, φ₂, φ_p` |
//! | `snr_db` | `0,5,10,15,20,25,30` | direct-link SNR grid |
//! | `n2_grid` | `0,10,…,190` | absorber counts for the harvest sweep |
//! | `trials` | `2000` | blocks per grid point |
//! | `seed` | `1` | base seed |
//! | `codebook` | `lexicographic` | `lexicographic` or `curated` |
//! | `detector` | `llr` | `ml` or `llr` |
//! | `paper_compat` | `false` | alternative detector variants (unscaled power LLR, information-slot-only ML) |

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;
use timris_core::channel::{ChannelConfig, GroupSizes, LinkSpec, LosPhasePolicy};
use timris_core::ris::UnitCellTechnology;
use timris_core::rx::{CompatFlags, DetectorKind};
use timris_core::txphy::{CodebookStrategy, ConstellationKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("{0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Tim,
    Benchmark,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Tim => "tim",
            Self::Benchmark => "benchmark",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub slots: usize,
    pub info_slots: usize,
    pub modulation_order: usize,
    pub constellation: ConstellationKind,
    pub rx_antennas: usize,
    pub ris_elements: usize,
    pub assist_cells: usize,
    pub absorb_cells: usize,
    pub cells_per_controller: usize,
    pub cell_technology: UnitCellTechnology,
    pub controller_power_uw: f64,
    pub drive_power_uw: f64,
    pub switch_power_uw: f64,
    pub varactor_power_uw: f64,
    pub ris_efficiency: f64,
    pub ris_turn_on_uw: f64,
    pub ris_saturation_uw: f64,
    pub eh_efficiency: f64,
    pub eh_turn_on_uw: f64,
    pub eh_saturation_uw: f64,
    pub p_low_dbm: f64,
    pub p_high_dbm: f64,
    pub omega_phase_rad: f64,
    pub carrier_ghz: f64,
    pub dist_ptx_prx: f64,
    pub dist_ptx_ris: f64,
    pub dist_ris_prx: f64,
    pub dist_ptx_eh: f64,
    pub dist_ris_eh: f64,
    pub kappa_ptx_prx: f64,
    pub kappa_ptx_ris: f64,
    pub kappa_ris_prx: f64,
    pub kappa_ptx_eh: f64,
    pub kappa_ris_eh: f64,
    pub los_phase: LosPhasePolicy,
    pub phase_assignment: [usize; 3],
    pub snr_db: Vec<f64>,
    pub n2_grid: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub codebook: CodebookStrategy,
    pub detector: DetectorKind,
    pub paper_compat: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Tim,
            slots: 8,
            info_slots: 2,
            modulation_order: 4,
            constellation: ConstellationKind::Qam,
            rx_antennas: 4,
            ris_elements: 256,
            assist_cells: 60,
            absorb_cells: 35,
            cells_per_controller: 4,
            cell_technology: UnitCellTechnology::RfSwitch,
            controller_power_uw: 50.0,
            drive_power_uw: 40.0,
            switch_power_uw: 1.0,
            varactor_power_uw: 0.0,
            ris_efficiency: 0.75,
            ris_turn_on_uw: 150.0,
            ris_saturation_uw: 70_000.0,
            eh_efficiency: 0.75,
            eh_turn_on_uw: 50.0,
            eh_saturation_uw: 100.0,
            p_low_dbm: 30.0,
            p_high_dbm: 34.0,
            omega_phase_rad: 0.0,
            carrier_ghz: 2.0,
            dist_ptx_prx: 14.0,
            dist_ptx_ris: 5.0,
            dist_ris_prx: 10.0,
            dist_ptx_eh: 14.0,
            dist_ris_eh: 10.0,
            kappa_ptx_prx: 5.0,
            kappa_ptx_ris: 5.0,
            kappa_ris_prx: 5.0,
            kappa_ptx_eh: 5.0,
            kappa_ris_eh: 5.0,
            los_phase: LosPhasePolicy::Aligned,
            phase_assignment: [0, 1, 2],
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            n2_grid: (0..20).map(|i| i * 10).collect(),
            trials: 2000,
            seed: 1,
            codebook: CodebookStrategy::Lexicographic,
            detector: DetectorKind::Llr,
            paper_compat: false,
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Option<Vec<T>> {
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().ok())
        .collect()
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn technology_name(t: UnitCellTechnology) -> &'static str {
    t.name()
}

fn los_name(p: LosPhasePolicy) -> &'static str {
    match p {
        LosPhasePolicy::Aligned => "aligned",
        LosPhasePolicy::RandomPerRun => "random",
    }
}

fn codebook_name(c: CodebookStrategy) -> &'static str {
    match c {
        CodebookStrategy::Lexicographic => "lexicographic",
        CodebookStrategy::Curated => "curated",
        CodebookStrategy::Fixed => "fixed",
    }
}

fn constellation_name(c: ConstellationKind) -> &'static str {
    match c {
        ConstellationKind::Qam => "qam",
        ConstellationKind::Psk => "psk",
    }
}

pub fn parse_detector(s: &str) -> Option<DetectorKind> {
    match s {
        "ml" => Some(DetectorKind::Ml),
        "llr" => Some(DetectorKind::Llr),
        _ => None,
    }
}

impl SimConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.set_at(0, key, value)
    }

    fn set_at(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        };
        macro_rules! num {
            ($field:expr) => {
                $field = value.parse().map_err(|_| bad())?
            };
        }
        match key {
            "scheme" => {
                self.scheme = match value {
                    "tim" => Scheme::Tim,
                    "benchmark" => Scheme::Benchmark,
                    _ => return Err(bad()),
                }
            }
            "slots" => num!(self.slots),
            "info_slots" => num!(self.info_slots),
            "modulation_order" => num!(self.modulation_order),
            "constellation" => {
                self.constellation = match value {
                    "qam" => ConstellationKind::Qam,
                    "psk" => ConstellationKind::Psk,
                    _ => return Err(bad()),
                }
            }
            "rx_antennas" => num!(self.rx_antennas),
            "ris_elements" => num!(self.ris_elements),
            "assist_cells" => num!(self.assist_cells),
            "absorb_cells" => num!(self.absorb_cells),
            "cells_per_controller" => num!(self.cells_per_controller),
            "cell_technology" => {
                self.cell_technology = match value {
                    "rf-switch" => UnitCellTechnology::RfSwitch,
                    "varactor" => UnitCellTechnology::Varactor,
                    _ => return Err(bad()),
                }
            }
            "controller_power_uw" => num!(self.controller_power_uw),
            "drive_power_uw" => num!(self.drive_power_uw),
            "switch_power_uw" => num!(self.switch_power_uw),
            "varactor_power_uw" => num!(self.varactor_power_uw),
            "ris_efficiency" => num!(self.ris_efficiency),
            "ris_turn_on_uw" => num!(self.ris_turn_on_uw),
            "ris_saturation_uw" => num!(self.ris_saturation_uw),
            "eh_efficiency" => num!(self.eh_efficiency),
            "eh_turn_on_uw" => num!(self.eh_turn_on_uw),
            "eh_saturation_uw" => num!(self.eh_saturation_uw),
            "p_low_dbm" => num!(self.p_low_dbm),
            "p_high_dbm" => num!(self.p_high_dbm),
            "omega_phase_rad" => num!(self.omega_phase_rad),
            "carrier_ghz" => num!(self.carrier_ghz),
            "dist_ptx_prx" => num!(self.dist_ptx_prx),
            "dist_ptx_ris" => num!(self.dist_ptx_ris),
            "dist_ris_prx" => num!(self.dist_ris_prx),
            "dist_ptx_eh" => num!(self.dist_ptx_eh),
            "dist_ris_eh" => num!(self.dist_ris_eh),
            "kappa_ptx_prx" => num!(self.kappa_ptx_prx),
            "kappa_ptx_ris" => num!(self.kappa_ptx_ris),
            "kappa_ris_prx" => num!(self.kappa_ris_prx),
            "kappa_ptx_eh" => num!(self.kappa_ptx_eh),
            "kappa_ris_eh" => num!(self.kappa_ris_eh),
            "los_phase" => {
                self.los_phase = match value {
                    "aligned" => LosPhasePolicy::Aligned,
                    "random" => LosPhasePolicy::RandomPerRun,
                    _ => return Err(bad()),
                }
            }
            "phase_assignment" => {
                let v: Vec<usize> = parse_list(value).ok_or_else(bad)?;
                self.phase_assignment = v.try_into().map_err(|_| bad())?;
            }
            "snr_db" => self.snr_db = parse_list(value).ok_or_else(bad)?,
            "n2_grid" => self.n2_grid = parse_list(value).ok_or_else(bad)?,
            "trials" => num!(self.trials),
            "seed" => num!(self.seed),
            "codebook" => {
                self.codebook = match value {
                    "lexicographic" => CodebookStrategy::Lexicographic,
                    "curated" => CodebookStrategy::Curated,
                    _ => return Err(bad()),
                }
            }
            "detector" => self.detector = parse_detector(value).ok_or_else(bad)?,
            "paper_compat" => num!(self.paper_compat),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            cfg.set_at(i + 1, key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Every key in a fixed order; feeding the output back to [`parse`](Self::parse)
    /// reproduces the config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("scheme", self.scheme.name().into());
        kv("slots", self.slots.to_string());
        kv("info_slots", self.info_slots.to_string());
        kv("modulation_order", self.modulation_order.to_string());
        kv(
            "constellation",
            constellation_name(self.constellation).into(),
        );
        kv("rx_antennas", self.rx_antennas.to_string());
        kv("ris_elements", self.ris_elements.to_string());
        kv("assist_cells", self.assist_cells.to_string());
        kv("absorb_cells", self.absorb_cells.to_string());
        kv(
            "cells_per_controller",
            self.cells_per_controller.to_string(),
        );
        kv(
            "cell_technology",
            technology_name(self.cell_technology).into(),
        );
        kv("controller_power_uw", self.controller_power_uw.to_string());
        kv("drive_power_uw", self.drive_power_uw.to_string());
        kv("switch_power_uw", self.switch_power_uw.to_string());
        kv("varactor_power_uw", self.varactor_power_uw.to_string());
        kv("ris_efficiency", self.ris_efficiency.to_string());
        kv("ris_turn_on_uw", self.ris_turn_on_uw.to_string());
        kv("ris_saturation_uw", self.ris_saturation_uw.to_string());
        kv("eh_efficiency", self.eh_efficiency.to_string());
        kv("eh_turn_on_uw", self.eh_turn_on_uw.to_string());
        kv("eh_saturation_uw", self.eh_saturation_uw.to_string());
        kv("p_low_dbm", self.p_low_dbm.to_string());
        kv("p_high_dbm", self.p_high_dbm.to_string());
        kv("omega_phase_rad", self.omega_phase_rad.to_string());
        kv("carrier_ghz", self.carrier_ghz.to_string());
        kv("dist_ptx_prx", self.dist_ptx_prx.to_string());
        kv("dist_ptx_ris", self.dist_ptx_ris.to_string());
        kv("dist_ris_prx", self.dist_ris_prx.to_string());
        kv("dist_ptx_eh", self.dist_ptx_eh.to_string());
        kv("dist_ris_eh", self.dist_ris_eh.to_string());
        kv("kappa_ptx_prx", self.kappa_ptx_prx.to_string());
        kv("kappa_ptx_ris", self.kappa_ptx_ris.to_string());
        kv("kappa_ris_prx", self.kappa_ris_prx.to_string());
        kv("kappa_ptx_eh", self.kappa_ptx_eh.to_string());
        kv("kappa_ris_eh", self.kappa_ris_eh.to_string());
        kv("los_phase", los_name(self.los_phase).into());
        kv("phase_assignment", join(&self.phase_assignment));
        kv("snr_db", join(&self.snr_db));
        kv("n2_grid", join(&self.n2_grid));
        kv("trials", self.trials.to_string());
        kv("seed", self.seed.to_string());
        kv("codebook", codebook_name(self.codebook).into());
        kv("detector", self.detector.name().into());
        kv("paper_compat", self.paper_compat.to_string());
        s
    }

    /// First 16 hex digits of the SHA-256 of [`to_text`](Self::to_text).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        hex::encode(&digest[..8])
    }

    /// `N₃ = N − N₁ − N₂`.
    pub fn inform_cells(&self) -> Result<usize, ConfigError> {
        self.ris_elements
            .checked_sub(self.assist_cells + self.absorb_cells)
            .ok_or_else(|| {
                ConfigError::Inconsistent(format!(
                    "assist_cells + absorb_cells = {} exceeds ris_elements = {}",
                    self.assist_cells + self.absorb_cells,
                    self.ris_elements
                ))
            })
    }

    pub fn groups(&self) -> Result<GroupSizes, ConfigError> {
        Ok(GroupSizes::new(
            self.assist_cells,
            self.absorb_cells,
            self.inform_cells()?,
        ))
    }

    pub fn channel_config(&self) -> Result<ChannelConfig, ConfigError> {
        Ok(ChannelConfig {
            rx_antennas: self.rx_antennas,
            elements: self.ris_elements,
            groups: self.groups()?,
            carrier_ghz: self.carrier_ghz,
            direct: LinkSpec::new(self.dist_ptx_prx, self.kappa_ptx_prx),
            ptx_ris: LinkSpec::new(self.dist_ptx_ris, self.kappa_ptx_ris),
            ris_prx: LinkSpec::new(self.dist_ris_prx, self.kappa_ris_prx),
            ptx_eh: LinkSpec::new(self.dist_ptx_eh, self.kappa_ptx_eh),
            ris_eh: LinkSpec::new(self.dist_ris_eh, self.kappa_ris_eh),
            los_policy: self.los_phase,
        })
    }

    pub fn codebook_strategy(&self) -> CodebookStrategy {
        match self.scheme {
            Scheme::Tim => self.codebook,
            Scheme::Benchmark => CodebookStrategy::Fixed,
        }
    }

    pub fn compat_flags(&self) -> CompatFlags {
        if self.paper_compat {
            CompatFlags::literal()
        } else {
            CompatFlags::default()
        }
    }

    /// Checks the cross-field constraints that the core types cannot see.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.inform_cells()?;
        if self.trials == 0 {
            return Err(ConfigError::Inconsistent(
                "trials must be at least 1".into(),
            ));
        }
        if self.assist_cells == 0 {
            return Err(ConfigError::Inconsistent(
                "assist_cells must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_text() {
        let cfg = SimConfig::default();
        assert_eq!(SimConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(cfg.inform_cells().unwrap(), 161);
    }

    #[test]
    fn overrides_and_comments() {
        let cfg = SimConfig::parse(
            "# comment\n\nslots = 4\ninfo_slots=2\ncodebook = curated\nsnr_db = 0, 10\npaper_compat = true\n",
        )
        .unwrap();
        assert_eq!((cfg.slots, cfg.info_slots), (4, 2));
        assert_eq!(cfg.codebook, CodebookStrategy::Curated);
        assert_eq!(cfg.snr_db, vec![0.0, 10.0]);
        assert!(cfg.paper_compat);
        assert_ne!(cfg.hash(), SimConfig::default().hash());
    }

    #[test]
    fn errors_carry_line_numbers() {
        match SimConfig::parse("slots = 8\nfoo = 1\n") {
            Err(ConfigError::UnknownKey { line: 2, key }) => assert_eq!(key, "foo"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            SimConfig::parse("slots = eight"),
            Err(ConfigError::BadValue { line: 1, .. })
        ));
        assert!(matches!(
            SimConfig::parse("slots 8"),
            Err(ConfigError::Syntax { line: 1 })
        ));
        assert!(SimConfig::parse("phase_assignment = 0,1").is_err());
    }

    #[test]
    fn inconsistent_groups() {
        let cfg = SimConfig {
            absorb_cells: 250,
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
