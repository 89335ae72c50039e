//! Subcommand drivers. Each builds its table in memory; nothing reaches the
//! output until the command has succeeded (or, for sweeps, finished).

use std::io::Write;
use std::path::{Path, PathBuf};

use rabi_sense::demkov::{self, DemkovParams, QuadratureBound};
use rabi_sense::dynamics::sample_times;
use rabi_sense::metrology::{self, Engine, SweepAxis, SweepSpec};
use rabi_sense::model::{map_spin_force, SpinForceInput};
use rabi_sense::spectrum;
use rabi_sense::units::AMU;

use crate::config::ConfigFile;
use crate::manifest::Manifest;
use crate::output::{self, Table};
use crate::CliError;

/// A finished command: CSV bytes, the manifest describing them, and an
/// error to report after both have been written (partial sweeps).
#[derive(Debug)]
pub struct Report {
    pub data: Vec<u8>,
    pub manifest: Manifest,
    pub deferred: Option<CliError>,
}

impl Report {
    fn done(data: Vec<u8>, manifest: Manifest) -> Self {
        Self { data, manifest, deferred: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(CliError::Usage("--from and --to must be finite".into()));
        }
        match self.points {
            0 => Err(CliError::Usage("--points must be at least 1".into())),
            1 => Ok(vec![self.from]),
            n => {
                let last = n - 1;
                let step = (self.to - self.from) / last as f64;
                Ok((0..n).map(|k| if k == last { self.to } else { self.from + step * k as f64 }).collect())
            }
        }
    }
}

pub fn spectrum(cfg: &ConfigFile) -> Result<Report, CliError> {
    let protocol = cfg.protocol()?;
    let times = sample_times(protocol.t_final(), cfg.sample_count);
    let slices = spectrum::spectrum_with_reference(&protocol, cfg.spectrum_levels, &times, cfg.reference_level)?;
    let mut data = Vec::new();
    output::write_spectrum(&mut data, &slices)?;
    Ok(Report::done(data, Manifest::new("spectrum")))
}

pub fn evolve(cfg: &ConfigFile, engine: Option<Engine>) -> Result<Report, CliError> {
    let protocol = cfg.protocol()?;
    let engine = engine.unwrap_or_else(|| Engine::for_config(&protocol));
    if engine == Engine::Pure && protocol.heating.is_some() {
        return Err(CliError::Usage("heating is enabled; the pure engine cannot model it".into()));
    }
    let traj = metrology::evolve_with_engine(&protocol, &cfg.integrator, cfg.sample_count, engine)?;
    let mut data = Vec::new();
    output::write_trajectory(&mut data, &traj)?;
    let mut manifest = Manifest::new("evolve")
        .with("engine", engine.name())
        .with("steps_accepted", traj.meta.stats.accepted)
        .with("steps_rejected", traj.meta.stats.rejected)
        .with("max_norm_drift", format!("{:e}", traj.meta.max_norm_drift))
        .with("max_fock_tail", format!("{:e}", traj.meta.max_fock_tail));
    if let Some(e) = traj.meta.min_eigenvalue {
        manifest = manifest.with("min_eigenvalue", format!("{e:e}"));
    }
    Ok(Report::done(data, manifest))
}

pub fn sweep(cfg: &ConfigFile, axis: SweepAxis, range: Range, engine: Option<Engine>) -> Result<Report, CliError> {
    let base = cfg.protocol()?;
    let engine = match (axis, engine) {
        (SweepAxis::HeatingRate, Some(Engine::Pure)) => {
            return Err(CliError::Usage("a heating sweep needs the lindblad engine".into()))
        }
        (SweepAxis::HeatingRate, _) => Engine::Lindblad,
        (_, Some(e)) => e,
        (_, None) => Engine::for_config(&base),
    };
    if engine == Engine::Pure && base.heating.is_some() {
        return Err(CliError::Usage("heating is enabled; the pure engine cannot model it".into()));
    }
    let spec = SweepSpec { axis, values: range.values()?, base, engine, overhead_ms: cfg.overhead_ms };
    let result = metrology::sweep(&spec, &cfg.integrator)?;
    let mut data = Vec::new();
    output::write_sweep(&mut data, &result)?;
    let manifest = Manifest::new(&format!("sweep-{}", axis.name().replace('_', "-")))
        .with("engine", engine.name())
        .with("axis", axis.name())
        .with("from", range.from)
        .with("to", range.to)
        .with("points", range.points)
        .with("failed_points", result.failures());
    let failed = result.failures();
    let deferred = (failed > 0).then_some(CliError::PartialSweep { failed, total: result.points.len() });
    Ok(Report { data, manifest, deferred })
}

pub fn demkov(cfg: &ConfigFile) -> Result<Report, CliError> {
    let protocol = cfg.protocol()?;
    let p = DemkovParams::from_config(&protocol)?;
    let horizon = protocol.t_final().max(20.0 / p.gamma);
    let (c_plus, _) = demkov::integrate_demkov(&p, horizon, demkov::DEFAULT_TOL)?;
    let (sx, sx_var) = demkov::signal_sigma_x(&p);
    let (z, z_var) = demkov::signal_quadrature(&p, protocol.g, protocol.omega);
    let (fmin, fmin_z, sens) = if protocol.g > 0.0 {
        let fz = match demkov::min_force_quadrature(&protocol)? {
            QuadratureBound::Force(f) => f,
            QuadratureBound::Unmeasurable => f64::NAN,
        };
        (
            demkov::min_force_sigma_x(&protocol)?,
            fz,
            demkov::sensitivity_with_overhead(&protocol, cfg.overhead_ms)?,
        )
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    let mut data = Vec::new();
    let mut t = Table::new(&mut data, &output::DEMKOV_HEADER)?;
    t.row(&[
        p.kappa,
        p.delta_i,
        p.bias,
        p.gamma,
        demkov::asymptotic_population(&p),
        c_plus.norm_sqr(),
        sx,
        sx_var,
        z,
        z_var,
        metrology::snr(sx, sx_var)?,
        metrology::snr(z, z_var)?,
        fmin,
        fmin_z,
        sens,
    ])?;
    t.finish()?;
    Ok(Report::done(data, Manifest::new("demkov").with("integration_horizon_ms", horizon)))
}

fn sensitivity_row(
    t: &mut Table<&mut Vec<u8>>,
    protocol: &rabi_sense::model::ProtocolConfig,
    gamma_khz: f64,
    overhead_ms: f64,
) -> Result<(), CliError> {
    let fz = demkov::min_force_quadrature(protocol)?.force().unwrap_or(f64::NAN);
    t.row(&[
        gamma_khz,
        protocol.t_final(),
        demkov::min_force_sigma_x(protocol)?,
        fz,
        demkov::sensitivity_with_overhead(protocol, overhead_ms)?,
    ])
}

pub fn sensitivity(cfg: &ConfigFile, range: Option<Range>) -> Result<Report, CliError> {
    let protocol = cfg.protocol()?;
    let mut data = Vec::new();
    let mut t = Table::new(&mut data, &output::SENSITIVITY_HEADER)?;
    let mut manifest = Manifest::new("sensitivity");
    match range {
        None => sensitivity_row(&mut t, &protocol, cfg.physics.gamma_khz, cfg.overhead_ms)?,
        Some(r) => {
            for gamma_khz in r.values()? {
                let at = protocol.with_gamma(protocol.convention.khz_to_rad_per_ms(gamma_khz))?;
                sensitivity_row(&mut t, &at, gamma_khz, cfg.overhead_ms)?;
            }
            manifest = manifest.with("axis", "gamma").with("from", r.from).with("to", r.to).with("points", r.points);
        }
    }
    t.finish()?;
    Ok(Report::done(data, manifest))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinForceArgs {
    pub gradient_t_per_m: f64,
    pub lande_g: f64,
    /// Defaults to the config's trap frequency.
    pub com_freq_mhz: Option<f64>,
    /// Defaults to the config's ion mass.
    pub mass_amu: Option<f64>,
}

pub fn spin_force(cfg: &ConfigFile, args: SpinForceArgs) -> Result<Report, CliError> {
    let conv = cfg.physics.convention;
    let com_mhz = args.com_freq_mhz.unwrap_or(cfg.physics.trap_freq_mhz);
    let mass_amu = args.mass_amu.unwrap_or(cfg.physics.ion_mass_amu);
    let sf = map_spin_force(&SpinForceInput {
        gradient_t_per_m: args.gradient_t_per_m,
        lande_g: args.lande_g,
        com_freq: conv.mhz_to_rad_per_s(com_mhz),
        ion_mass: mass_amu * AMU,
    })?;
    let mut data = Vec::new();
    let mut t = Table::new(&mut data, &output::SPIN_FORCE_HEADER)?;
    t.row(&[args.gradient_t_per_m, args.lande_g, sf.force_yn, sf.z_cm, sf.coefficient, sf.equivalent_force_yn])?;
    t.finish()?;
    let manifest = Manifest::new("spin-force").with("com_freq_mhz", com_mhz).with("mass_amu", mass_amu);
    Ok(Report::done(data, manifest))
}

/// Where the table goes; `-` is stdout.
#[derive(Debug, Clone, PartialEq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

impl Destination {
    pub fn parse(s: &str) -> Self {
        if s == "-" {
            Destination::Stdout
        } else {
            Destination::File(PathBuf::from(s))
        }
    }

    /// Explicit path, else `<out>.manifest` next to a file output.
    pub fn manifest_path(&self, explicit: Option<&Path>) -> Option<PathBuf> {
        match (explicit, self) {
            (Some(p), _) => Some(p.to_path_buf()),
            (None, Destination::File(p)) => {
                let mut s = p.clone().into_os_string();
                s.push(".manifest");
                Some(PathBuf::from(s))
            }
            (None, Destination::Stdout) => None,
        }
    }
}

/// Write table and manifest, then surface any deferred error.
pub fn emit(
    report: Report,
    cfg: &ConfigFile,
    out: &Destination,
    manifest: Option<&Path>,
) -> Result<(), CliError> {
    let text = report.manifest.render(cfg)?;
    match out {
        Destination::Stdout => {
            let mut so = std::io::stdout().lock();
            so.write_all(&report.data)?;
            so.flush()?;
        }
        Destination::File(p) => {
            std::fs::write(p, &report.data).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?
        }
    }
    if let Some(path) = out.manifest_path(manifest) {
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    match report.deferred {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_both_ends() {
        let v = Range { from: 0.5, to: 1.5, points: 3 }.values().unwrap();
        assert_eq!(v, vec![0.5, 1.0, 1.5]);
        assert_eq!(Range { from: 2.0, to: 9.0, points: 1 }.values().unwrap(), vec![2.0]);
        assert!(Range { from: 0.0, to: 1.0, points: 0 }.values().is_err());
    }

    #[test]
    fn manifest_next_to_output() {
        let d = Destination::parse("run/a.csv");
        assert_eq!(d.manifest_path(None), Some(PathBuf::from("run/a.csv.manifest")));
        assert_eq!(Destination::parse("-").manifest_path(None), None);
        assert_eq!(Destination::Stdout.manifest_path(Some(Path::new("m"))), Some(PathBuf::from("m")));
    }

    #[test]
    fn spin_force_reference_gradient() {
        let r = spin_force(
            &ConfigFile::default(),
            SpinForceArgs { gradient_t_per_m: 1.0, lande_g: 2.0, com_freq_mhz: None, mass_amu: None },
        )
        .unwrap();
        let text = String::from_utf8(r.data).unwrap();
        let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert!((row[2] - 9.274).abs() < 1e-3);
    }

    #[test]
    fn demkov_without_force_is_balanced() {
        let mut cfg = ConfigFile::default();
        cfg.physics.force_yn = 0.0;
        let r = demkov(&cfg).unwrap();
        let text = String::from_utf8(r.data).unwrap();
        let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row[6], 0.0);
        assert!((row[4] - 0.5).abs() < 1e-15);
        assert!((row[5] - 0.5).abs() < 1e-3);
    }
}
