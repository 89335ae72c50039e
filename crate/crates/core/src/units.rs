//! Physical constants and unit conversions.
//!
//! Internally every frequency is an angular frequency in rad/ms and every time
//! is in ms. Forces are carried in yoctonewtons.

/// Reduced Planck constant [J·s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Bohr magneton [J/T].
pub const MU_B: f64 = 9.274_010_078_3e-24;
/// Atomic mass unit [kg].
pub const AMU: f64 = 1.660_539_066_60e-27;
/// One yoctonewton [N].
pub const YOCTONEWTON: f64 = 1e-24;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// How a quoted "kHz"/"MHz" figure maps to an angular frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngularConvention {
    /// ω = 2π·ν.
    #[default]
    TwoPi,
    /// ω = ν numerically (the figure is already angular).
    Plain,
}

impl AngularConvention {
    pub fn factor(self) -> f64 {
        match self {
            AngularConvention::TwoPi => TWO_PI,
            AngularConvention::Plain => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AngularConvention::TwoPi => "two_pi",
            AngularConvention::Plain => "plain",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "two_pi" => Some(AngularConvention::TwoPi),
            "plain" => Some(AngularConvention::Plain),
            _ => None,
        }
    }

    /// kHz figure → rad/ms.
    pub fn khz_to_rad_per_ms(self, khz: f64) -> f64 {
        khz * self.factor()
    }

    /// rad/ms → kHz figure.
    pub fn rad_per_ms_to_khz(self, rad_per_ms: f64) -> f64 {
        rad_per_ms / self.factor()
    }

    /// MHz figure → rad/s.
    pub fn mhz_to_rad_per_s(self, mhz: f64) -> f64 {
        mhz * 1e6 * self.factor()
    }
}

/// rad/s → rad/ms.
pub fn per_s_to_per_ms(x: f64) -> f64 {
    x * 1e-3
}

/// rad/ms → rad/s.
pub fn per_ms_to_per_s(x: f64) -> f64 {
    x * 1e3
}
