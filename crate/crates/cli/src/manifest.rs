//! Run manifests: the resolved configuration plus the invocation, constants
//! and derived quantities. A manifest parses as a config.

use std::fmt::Write as _;

use rabi_sense::demkov;
use rabi_sense::units::{AMU, HBAR, MU_B, YOCTONEWTON};

use crate::config::ConfigFile;
use crate::{CliError, VERSION};

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub command: String,
    /// Further invocation details (engine, sweep range, ...), in order.
    pub run: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), run: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.run.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self, cfg: &ConfigFile) -> Result<String, CliError> {
        let protocol = cfg.protocol()?;
        let mut s = String::new();
        let _ = writeln!(s, "# rabi-sense run manifest");
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "version = {VERSION}");
        for (k, v) in &self.run {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s);
        s.push_str(&cfg.to_ini());
        let _ = writeln!(s, "\n[constants]");
        let _ = writeln!(s, "hbar_J_s = {HBAR:e}");
        let _ = writeln!(s, "mu_B_J_per_T = {MU_B:e}");
        let _ = writeln!(s, "amu_kg = {AMU:e}");
        let _ = writeln!(s, "yN_N = {YOCTONEWTON:e}");
        let _ = writeln!(s, "\n[derived]");
        let _ = writeln!(s, "z0_m = {:e}", protocol.trap.z0());
        let _ = writeln!(s, "trap_freq_rad_per_s = {:e}", protocol.trap.trap_freq());
        let _ = writeln!(s, "g_rad_per_ms = {:e}", protocol.g);
        let _ = writeln!(s, "omega_rad_per_ms = {:e}", protocol.omega);
        let _ = writeln!(s, "omega_y0_rad_per_ms = {:e}", protocol.schedule.omega_y0());
        let _ = writeln!(s, "gamma_per_ms = {:e}", protocol.schedule.gamma());
        let _ = writeln!(s, "t_final_ms = {:e}", protocol.t_final());
        let _ = writeln!(s, "force_coefficient_rad_per_ms = {:e}", protocol.force_coefficient());
        let _ = writeln!(s, "bias_rad_per_ms = {:e}", protocol.bias());
        let _ = writeln!(s, "kappa = {:e}", protocol.kappa());
        if let Ok(f) = demkov::min_force_sigma_x(&protocol) {
            let _ = writeln!(s, "fmin_sigma_x_yN = {f:e}");
        }
        for w in protocol.warnings() {
            let _ = writeln!(s, "# warning: {w}");
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_is_a_config() {
        let cfg = ConfigFile::default();
        let text = Manifest::new("evolve").with("engine", "pure").render(&cfg).unwrap();
        assert!(text.contains("angular_convention = two_pi"));
        assert!(text.contains("z0_m = 5.78"));
        assert_eq!(ConfigFile::parse(&text).unwrap(), cfg);
    }
}
