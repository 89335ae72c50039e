//! INI run configuration: `[physics]`, `[numerics]`, `[heating]`.
//!
//! Unknown keys in those sections are rejected. Manifests add `[run]`,
//! `[constants]` and `[derived]`, which are read as informational and
//! ignored, so a manifest is itself a valid config.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;
use rabi_sense::dynamics::{IntegratorSettings, DEFAULT_SAMPLE_COUNT};
use rabi_sense::model::{HeatingParams, ProtocolConfig, ProtocolParams};
use rabi_sense::units::AngularConvention;

use crate::CliError;

const PHYSICS_KEYS: &[&str] = &[
    "g_khz",
    "omega_khz",
    "omega_y0_khz",
    "gamma_khz",
    "force_yN",
    "ion_mass_amu",
    "trap_freq_mhz",
    "angular_convention",
];
const NUMERICS_KEYS: &[&str] = &[
    "fock_dim",
    "rel_tol",
    "abs_tol",
    "max_step_ms",
    "method_order",
    "sample_count",
    "t_final_factor",
    "spectrum_levels",
    "reference_level",
    "overhead_ms",
];
const HEATING_KEYS: &[&str] = &["rate_per_ms", "nbar", "enabled"];
const INFORMATIONAL: &[&str] = &["run", "constants", "derived"];

#[derive(Debug, Clone, PartialEq)]
pub struct HeatingSection {
    pub rate_per_ms: f64,
    pub nbar: f64,
    pub enabled: bool,
}

impl Default for HeatingSection {
    fn default() -> Self {
        Self { rate_per_ms: 0.0, nbar: HeatingParams::DEFAULT_NBAR, enabled: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub physics: ProtocolParams,
    pub integrator: IntegratorSettings,
    pub sample_count: usize,
    pub spectrum_levels: usize,
    pub reference_level: usize,
    pub overhead_ms: f64,
    pub heating: HeatingSection,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            physics: ProtocolParams::default(),
            integrator: IntegratorSettings::default(),
            sample_count: DEFAULT_SAMPLE_COUNT,
            spectrum_levels: rabi_sense::spectrum::DEFAULT_LEVEL_COUNT,
            reference_level: rabi_sense::spectrum::DEFAULT_REFERENCE_LEVEL,
            overhead_ms: 0.0,
            heating: HeatingSection::default(),
        }
    }
}

fn parse_value<T: FromStr>(section: &str, key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim().parse().map_err(|_| CliError::Config(format!("[{section}] {key}: cannot parse {raw:?}")))
}

fn parse_bool(section: &str, key: &str, raw: &str) -> Result<bool, CliError> {
    match raw.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("[{section}] {key}: expected a boolean, got {raw:?}"))),
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc = Ini::load_from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut cfg = Self::default();
        for (section, props) in doc.iter() {
            let Some(section) = section else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(CliError::Config(format!("key {key:?} appears before any section")));
                }
                continue;
            };
            if INFORMATIONAL.contains(&section) {
                continue;
            }
            let known = match section {
                "physics" => PHYSICS_KEYS,
                "numerics" => NUMERICS_KEYS,
                "heating" => HEATING_KEYS,
                other => return Err(CliError::Config(format!("unknown section [{other}]"))),
            };
            for (key, raw) in props.iter() {
                if !known.contains(&key) {
                    return Err(CliError::Config(format!("unknown key {key:?} in [{section}]")));
                }
                cfg.set(section, key, raw)?;
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, raw: &str) -> Result<(), CliError> {
        let p = &mut self.physics;
        let n = &mut self.integrator;
        match (section, key) {
            ("physics", "g_khz") => p.g_khz = parse_value(section, key, raw)?,
            ("physics", "omega_khz") => p.omega_khz = parse_value(section, key, raw)?,
            ("physics", "omega_y0_khz") => p.omega_y0_khz = parse_value(section, key, raw)?,
            ("physics", "gamma_khz") => p.gamma_khz = parse_value(section, key, raw)?,
            ("physics", "force_yN") => p.force_yn = parse_value(section, key, raw)?,
            ("physics", "ion_mass_amu") => p.ion_mass_amu = parse_value(section, key, raw)?,
            ("physics", "trap_freq_mhz") => p.trap_freq_mhz = parse_value(section, key, raw)?,
            ("physics", "angular_convention") => {
                p.convention = AngularConvention::parse(raw.trim()).ok_or_else(|| {
                    CliError::Config(format!("[physics] angular_convention: expected two_pi or plain, got {raw:?}"))
                })?
            }
            ("numerics", "fock_dim") => p.fock_dim = parse_value(section, key, raw)?,
            ("numerics", "rel_tol") => n.rel_tol = parse_value(section, key, raw)?,
            ("numerics", "abs_tol") => n.abs_tol = parse_value(section, key, raw)?,
            ("numerics", "max_step_ms") => n.max_step = parse_value(section, key, raw)?,
            ("numerics", "method_order") => n.method_order = parse_value(section, key, raw)?,
            ("numerics", "sample_count") => self.sample_count = parse_value(section, key, raw)?,
            ("numerics", "t_final_factor") => p.t_final_factor = parse_value(section, key, raw)?,
            ("numerics", "spectrum_levels") => self.spectrum_levels = parse_value(section, key, raw)?,
            ("numerics", "reference_level") => self.reference_level = parse_value(section, key, raw)?,
            ("numerics", "overhead_ms") => self.overhead_ms = parse_value(section, key, raw)?,
            ("heating", "rate_per_ms") => self.heating.rate_per_ms = parse_value(section, key, raw)?,
            ("heating", "nbar") => self.heating.nbar = parse_value(section, key, raw)?,
            ("heating", "enabled") => self.heating.enabled = parse_bool(section, key, raw)?,
            _ => unreachable!("key lists and setters disagree on [{section}] {key}"),
        }
        Ok(())
    }

    /// Validation beyond what building the protocol checks.
    fn check(&self) -> Result<(), CliError> {
        let p = &self.physics;
        for (name, v) in [
            ("g_khz", p.g_khz),
            ("ion_mass_amu", p.ion_mass_amu),
            ("trap_freq_mhz", p.trap_freq_mhz),
            ("omega_khz", p.omega_khz),
            ("omega_y0_khz", p.omega_y0_khz),
            ("gamma_khz", p.gamma_khz),
            ("t_final_factor", p.t_final_factor),
        ] {
            let ok = if name == "g_khz" { v >= 0.0 } else { v > 0.0 };
            if !(ok && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be {}, got {v}", if name == "g_khz" { "non-negative" } else { "positive" })));
            }
        }
        if self.sample_count < 2 {
            return Err(CliError::Config(format!("sample_count must be at least 2, got {}", self.sample_count)));
        }
        if !(self.overhead_ms >= 0.0 && self.overhead_ms.is_finite()) {
            return Err(CliError::Config(format!("overhead_ms must be non-negative, got {}", self.overhead_ms)));
        }
        self.integrator.validate()?;
        self.heating_params()?;
        Ok(())
    }

    pub fn heating_params(&self) -> Result<Option<HeatingParams>, CliError> {
        if !self.heating.enabled {
            return Ok(None);
        }
        Ok(Some(HeatingParams::new(self.heating.rate_per_ms, self.heating.nbar)?))
    }

    pub fn protocol(&self) -> Result<ProtocolConfig, CliError> {
        let params = ProtocolParams { heating: self.heating_params()?, ..self.physics.clone() };
        Ok(params.build()?)
    }

    /// The three config sections; numbers use the shortest exact form.
    pub fn to_ini(&self) -> String {
        let p = &self.physics;
        let n = &self.integrator;
        let mut s = String::new();
        let _ = writeln!(s, "[physics]");
        let _ = writeln!(s, "g_khz = {}", p.g_khz);
        let _ = writeln!(s, "omega_khz = {}", p.omega_khz);
        let _ = writeln!(s, "omega_y0_khz = {}", p.omega_y0_khz);
        let _ = writeln!(s, "gamma_khz = {}", p.gamma_khz);
        let _ = writeln!(s, "force_yN = {}", p.force_yn);
        let _ = writeln!(s, "ion_mass_amu = {}", p.ion_mass_amu);
        let _ = writeln!(s, "trap_freq_mhz = {}", p.trap_freq_mhz);
        let _ = writeln!(s, "angular_convention = {}", p.convention.name());
        let _ = writeln!(s, "\n[numerics]");
        let _ = writeln!(s, "fock_dim = {}", p.fock_dim);
        let _ = writeln!(s, "rel_tol = {}", n.rel_tol);
        let _ = writeln!(s, "abs_tol = {}", n.abs_tol);
        let _ = writeln!(s, "max_step_ms = {}", n.max_step);
        let _ = writeln!(s, "method_order = {}", n.method_order);
        let _ = writeln!(s, "sample_count = {}", self.sample_count);
        let _ = writeln!(s, "t_final_factor = {}", p.t_final_factor);
        let _ = writeln!(s, "spectrum_levels = {}", self.spectrum_levels);
        let _ = writeln!(s, "reference_level = {}", self.reference_level);
        let _ = writeln!(s, "overhead_ms = {}", self.overhead_ms);
        let _ = writeln!(s, "\n[heating]");
        let _ = writeln!(s, "rate_per_ms = {}", self.heating.rate_per_ms);
        let _ = writeln!(s, "nbar = {}", self.heating.nbar);
        let _ = writeln!(s, "enabled = {}", self.heating.enabled);
        s
    }
}
