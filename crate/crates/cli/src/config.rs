use std::path::PathBuf;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Direct,
    Inverse,
    Roundtrip,
    Stargraph,
    Selftest,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Inverse => "inverse",
            Mode::Roundtrip => "roundtrip",
            Mode::Stargraph => "stargraph",
            Mode::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub potential: Option<PathBuf>,
    pub boundary: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub k_max: f64,
    pub n_k: usize,
    pub x_max: f64,
    pub n_x: usize,
    pub unitarity_tolerance: f64,
    pub marchenko_tolerance: f64,
    /// Relative L² bound on the recovered potential in `roundtrip`.
    pub q_tolerance: f64,
    /// Frobenius bound on `U_rec − U` in `roundtrip`.
    pub u_tolerance: f64,
    pub force: bool,
    pub json_summary: bool,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            potential: None,
            boundary: None,
            data: None,
            out: None,
            k_max: 40.0,
            n_k: 800,
            x_max: 15.0,
            n_x: 600,
            unitarity_tolerance: 1e-6,
            marchenko_tolerance: 1e-8,
            q_tolerance: 0.05,
            u_tolerance: 1e-2,
            force: false,
            json_summary: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.n_k < 16 {
            return bad(format!("n_k = {} must be at least 16", self.n_k));
        }
        if self.n_x < 16 {
            return bad(format!("n_x = {} must be at least 16", self.n_x));
        }
        for (name, v) in [("k_max", self.k_max), ("x_max", self.x_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        for (name, v) in [
            ("unitarity tolerance", self.unitarity_tolerance),
            ("Marchenko tolerance", self.marchenko_tolerance),
            ("Q tolerance", self.q_tolerance),
            ("U tolerance", self.u_tolerance),
        ] {
            if v.is_nan() || v <= 0.0 {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        let need = |p: &Option<PathBuf>, flag: &str| {
            if p.is_none() {
                Err(CliError::Usage(format!("{} requires {flag}", self.mode.name())))
            } else {
                Ok(())
            }
        };
        match self.mode {
            Mode::Direct | Mode::Roundtrip => {
                need(&self.potential, "--potential")?;
                need(&self.boundary, "--boundary")
            }
            Mode::Inverse | Mode::Stargraph => need(&self.data, "--data"),
            Mode::Selftest => Ok(()),
        }
    }
}
