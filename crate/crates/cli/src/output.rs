//! CSV tables. Every float is written with 17 significant digits.

use std::io::Write;

use rabi_sense::dynamics::Trajectory;
use rabi_sense::metrology::SweepResult;
use rabi_sense::spectrum::SpectrumSlice;

use crate::CliError;

pub const TRAJECTORY_HEADER: [&str; 9] = ["t_ms", "sx", "sy", "sz", "Z", "nbar_phonon", "norm", "p_plus", "p_minus"];
pub const SPECTRUM_HEADER: [&str; 8] = ["t_ms", "E0", "E1", "E2", "E3", "delta_gap", "delta_ge", "epsilon"];
pub const SWEEP_HEADER: [&str; 11] = [
    "axis_value",
    "sx_mean",
    "sx_var",
    "Z_mean",
    "Z_var",
    "snr_sx",
    "snr_Z",
    "snr_analytic",
    "fmin_yN",
    "sensitivity_yN_rtHz",
    "error",
];
pub const DEMKOV_HEADER: [&str; 15] = [
    "kappa",
    "delta_i",
    "bias",
    "gamma",
    "p_plus_asymptotic",
    "p_plus_integrated",
    "sx_mean",
    "sx_var",
    "Z_mean",
    "Z_var",
    "snr_sx",
    "snr_Z",
    "fmin_yN",
    "fmin_Z_yN",
    "sensitivity_yN_rtHz",
];
pub const SENSITIVITY_HEADER: [&str; 5] = ["gamma_khz", "t_final_ms", "fmin_yN", "fmin_Z_yN", "sensitivity_yN_rtHz"];
pub const SPIN_FORCE_HEADER: [&str; 6] =
    ["gradient_T_per_m", "lande_g", "force_yN", "z_cm_m", "coefficient_rad_per_ms", "equivalent_force_yN"];

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> Table<W> {
    pub fn new(sink: W, header: &[&str]) -> Result<Self, CliError> {
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(header)?;
        Ok(Self { inner })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<(), CliError> {
        self.inner.write_record(values.iter().map(|&v| num(v)))?;
        Ok(())
    }

    pub fn row_with_note(&mut self, values: &[f64], note: &str) -> Result<(), CliError> {
        let mut fields: Vec<String> = values.iter().map(|&v| num(v)).collect();
        fields.push(note.to_string());
        self.inner.write_record(&fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn write_trajectory<W: Write>(sink: W, traj: &Trajectory) -> Result<(), CliError> {
    let mut t = Table::new(sink, &TRAJECTORY_HEADER)?;
    for (time, r) in traj.times.iter().zip(&traj.records) {
        t.row(&[*time, r.sx, r.sy, r.sz, r.z, r.nbar, r.norm, r.p_plus, r.p_minus])?;
    }
    t.finish()
}

pub fn write_spectrum<W: Write>(sink: W, slices: &[SpectrumSlice]) -> Result<(), CliError> {
    let mut t = Table::new(sink, &SPECTRUM_HEADER)?;
    for s in slices {
        let e = &s.eigenvalues;
        t.row(&[s.t, e[0], e[1], e[2], e[3], s.delta_gap, s.delta_ge, s.epsilon])?;
    }
    t.finish()
}

pub fn write_sweep<W: Write>(sink: W, sweep: &SweepResult) -> Result<(), CliError> {
    let mut t = Table::new(sink, &SWEEP_HEADER)?;
    for p in &sweep.points {
        match &p.outcome {
            Ok(r) => {
                let fmin = r.min_force_estimate();
                t.row_with_note(
                    &[
                        p.axis_value,
                        r.sx_mean,
                        r.sx_var,
                        r.z_mean,
                        r.z_var,
                        r.snr_sx,
                        r.snr_z,
                        r.analytic.snr_sx,
                        fmin,
                        r.sensitivity_estimate(sweep.overhead_ms),
                    ],
                    "",
                )?;
            }
            Err(e) => {
                let mut values = [f64::NAN; 10];
                values[0] = p.axis_value;
                t.row_with_note(&values, &e.to_string())?;
            }
        }
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.5), "-2.5000000000000000e0");
        assert_eq!(num(f64::NAN), "NaN");
        let x = 0.123_456_789_012_345_67;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn notes_are_quoted() {
        let mut buf = Vec::new();
        let mut t = Table::new(&mut buf, &["a", "error"]).unwrap();
        t.row_with_note(&[1.0], "x, y").unwrap();
        t.finish().unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,error\n1.0000000000000000e0,\"x, y\"\n");
    }
}
