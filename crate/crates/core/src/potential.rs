//! Hermitian matrix potentials `Q(x)` on the half-line.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_norm, hermiticity_residual, CMat, C64};
use crate::quadrature::trapezoid_weights;

pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

/// Smooth compactly supported bump `amplitude · cos⁴(π(x − center)/(2·half_width))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub amplitude: CMat,
    pub center: f64,
    pub half_width: f64,
}

impl Bump {
    fn profile(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.half_width;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (0.5 * PI * u).cos().powi(4)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialForm {
    Zero,
    /// `Q = depth · I` on `[0, width)`.
    SquareWell { depth: f64, width: f64 },
    /// `Q = diag(depth_i · 1[0, width_i))`, one scalar well per channel.
    DiagonalWells { depths: Vec<f64>, widths: Vec<f64> },
    /// Sum of smooth bumps with hermitian amplitudes.
    Bumps(Vec<Bump>),
    /// Piecewise-linear interpolation of samples; zero outside the grid.
    Sampled { grid: Vec<f64>, values: Vec<CMat> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    n: usize,
    form: PotentialForm,
    support_bound: f64,
}

impl PotentialSpec {
    pub fn zero(n: usize) -> Self {
        Self { n, form: PotentialForm::Zero, support_bound: 0.0 }
    }

    pub fn square_well(n: usize, depth: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !depth.is_finite() {
            return Err(Error::InvalidPotential(format!("square well depth {depth}, width {width}")));
        }
        Ok(Self { n, form: PotentialForm::SquareWell { depth, width }, support_bound: width })
    }

    pub fn diagonal_wells(depths: Vec<f64>, widths: Vec<f64>) -> Result<Self> {
        if depths.len() != widths.len() || depths.is_empty() {
            return Err(Error::InvalidPotential("depths and widths must have equal nonzero length".into()));
        }
        if widths.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidPotential("negative well width".into()));
        }
        let support = widths.iter().cloned().fold(0.0, f64::max);
        Ok(Self { n: depths.len(), form: PotentialForm::DiagonalWells { depths, widths }, support_bound: support })
    }

    pub fn bumps(bumps: Vec<Bump>) -> Result<Self> {
        let n = bumps
            .first()
            .map(|b| b.amplitude.nrows())
            .ok_or_else(|| Error::InvalidPotential("no bumps".into()))?;
        let mut support: f64 = 0.0;
        for b in &bumps {
            if b.amplitude.nrows() != n || b.amplitude.ncols() != n {
                return Err(Error::InvalidPotential("bump amplitudes differ in size".into()));
            }
            if !(b.half_width > 0.0) || b.center - b.half_width < 0.0 {
                return Err(Error::InvalidPotential("bump must lie in [0, ∞)".into()));
            }
            support = support.max(b.center + b.half_width);
        }
        Ok(Self { n, form: PotentialForm::Bumps(bumps), support_bound: support })
    }

    /// Samples must lie on an ascending grid starting at or after 0.
    pub fn sampled(grid: Vec<f64>, values: Vec<CMat>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidPotential("sampled potential needs ≥ 2 matching samples".into()));
        }
        if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential("grid must be ascending and nonnegative".into()));
        }
        let n = values[0].nrows();
        if values.iter().any(|v| v.nrows() != n || v.ncols() != n) {
            return Err(Error::InvalidPotential("sample matrices differ in size".into()));
        }
        let support = *grid.last().unwrap();
        Ok(Self { n, form: PotentialForm::Sampled { grid, values }, support_bound: support })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn form(&self) -> &PotentialForm {
        &self.form
    }

    /// `Q(x) = 0` for `x ≥ support_bound`.
    pub fn support_bound(&self) -> f64 {
        self.support_bound
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.form, PotentialForm::Zero)
    }

    /// Points where `Q` or one of its low derivatives jumps; the integrator
    /// never steps across them.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match &self.form {
            PotentialForm::Zero => vec![],
            PotentialForm::SquareWell { width, .. } => vec![*width],
            PotentialForm::DiagonalWells { widths, .. } => widths.clone(),
            PotentialForm::Bumps(bs) => bs
                .iter()
                .flat_map(|b| [b.center - b.half_width, b.center + b.half_width])
                .collect(),
            PotentialForm::Sampled { grid, .. } => grid.clone(),
        };
        pts.retain(|x| *x > 0.0);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        pts
    }

    /// Writes `Q(x)` column-major into `out` (length n²).
    pub fn eval_into(&self, x: f64, out: &mut [C64]) {
        let n = self.n;
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        match &self.form {
            PotentialForm::Zero => {}
            PotentialForm::SquareWell { depth, width } => {
                if x < *width {
                    for i in 0..n {
                        out[i * n + i] = C64::new(*depth, 0.0);
                    }
                }
            }
            PotentialForm::DiagonalWells { depths, widths } => {
                for i in 0..n {
                    if x < widths[i] {
                        out[i * n + i] = C64::new(depths[i], 0.0);
                    }
                }
            }
            PotentialForm::Bumps(bs) => {
                for b in bs {
                    let p = b.profile(x);
                    if p != 0.0 {
                        for (o, a) in out.iter_mut().zip(b.amplitude.iter()) {
                            *o += a * p;
                        }
                    }
                }
            }
            PotentialForm::Sampled { grid, values } => {
                if x < grid[0] || x > *grid.last().unwrap() {
                    return;
                }
                let j = match grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
                    Ok(j) => j.min(grid.len() - 2),
                    Err(j) => j - 1,
                };
                let t = (x - grid[j]) / (grid[j + 1] - grid[j]);
                for (o, (a, b)) in out.iter_mut().zip(values[j].iter().zip(values[j + 1].iter())) {
                    *o = a * (1.0 - t) + b * t;
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> CMat {
        let mut buf = vec![C64::new(0.0, 0.0); self.n * self.n];
        self.eval_into(x, &mut buf);
        CMat::from_column_slice(self.n, self.n, &buf)
    }

    /// Dense sample grid over the support used for diagnostics.
    pub fn diagnostic_grid(&self) -> Vec<f64> {
        match &self.form {
            PotentialForm::Sampled { grid, .. } => grid.clone(),
            _ => {
                let m = 2000;
                let end = self.support_bound.max(1e-12);
                let mut g: Vec<f64> = (0..=m).map(|i| end * i as f64 / m as f64).collect();
                // sample both sides of each jump
                for b in self.breakpoints() {
                    g.push((b - 1e-12).max(0.0));
                }
                g.sort_by(|a, b| a.partial_cmp(b).unwrap());
                g
            }
        }
    }

    /// `max_x |Q(x)|` with `|·|` the largest eigenvalue magnitude.
    pub fn max_norm(&self) -> f64 {
        self.diagnostic_grid()
            .iter()
            .map(|&x| hermitian_norm(&self.eval(x)))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub hermiticity_residual: f64,
    /// Trapezoid estimate of `∫(1+t)|Q(t)| dt`.
    pub weighted_integral: f64,
    pub support_consistent: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn validate_potential(p: &PotentialSpec) -> ValidationReport {
    let mut failures = Vec::new();
    let mut herm = 0.0_f64;
    let mut support_consistent = true;

    let (weighted_integral, grid) = match p.form() {
        PotentialForm::Zero => (0.0, vec![]),
        PotentialForm::SquareWell { depth, width } => ((width + 0.5 * width * width) * depth.abs(), vec![0.0]),
        PotentialForm::DiagonalWells { depths, widths } => {
            // |Q| is the max over channels of the active wells; integrate piecewise.
            let mut edges: Vec<f64> = std::iter::once(0.0).chain(widths.iter().cloned()).collect();
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut total = 0.0;
            for w in edges.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let level = depths
                    .iter()
                    .zip(widths)
                    .filter(|(_, &wd)| mid < wd)
                    .map(|(d, _)| d.abs())
                    .fold(0.0, f64::max);
                let (a, b) = (w[0], w[1]);
                total += level * ((b - a) + 0.5 * (b * b - a * a));
            }
            (total, vec![0.0])
        }
        _ => {
            let grid = p.diagnostic_grid();
            let w = trapezoid_weights(&grid);
            let total = grid
                .iter()
                .zip(&w)
                .map(|(&x, &wt)| wt * (1.0 + x) * hermitian_norm(&p.eval(x)))
                .sum();
            (total, grid)
        }
    };

    match p.form() {
        PotentialForm::Bumps(bs) => {
            for b in bs {
                herm = herm.max(hermiticity_residual(&b.amplitude));
            }
        }
        PotentialForm::Sampled { grid: g, values } => {
            for v in values {
                herm = herm.max(hermiticity_residual(v));
            }
            if *g.last().unwrap() > p.support_bound() + 1e-12 {
                support_consistent = false;
            }
        }
        _ => {
            for &x in &grid {
                herm = herm.max(hermiticity_residual(&p.eval(x)));
            }
        }
    }

    if herm > HERMITICITY_TOLERANCE {
        failures.push(format!("Q is not hermitian (residual {herm:e})"));
    }
    if !weighted_integral.is_finite() {
        failures.push("weighted integral of |Q| is not finite".into());
    }
    if !support_consistent {
        failures.push("samples extend past the support bound".into());
    }
    ValidationReport { hermiticity_residual: herm, weighted_integral, support_consistent, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn zero_potential_passes() {
        let r = validate_potential(&PotentialSpec::zero(2));
        assert!(r.passed());
        assert_eq!(r.weighted_integral, 0.0);
    }

    #[test]
    fn square_well_weighted_integral() {
        let r = validate_potential(&PotentialSpec::square_well(1, -4.0, 1.0).unwrap());
        assert!(r.passed());
        assert!((r.weighted_integral - 6.0).abs() < 1e-14);
    }

    #[test]
    fn sampled_square_well_integral_close_to_closed_form() {
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 1e-3).collect();
        let values = grid.iter().map(|_| CMat::from_element(1, 1, c(-4.0, 0.0))).collect();
        let r = validate_potential(&PotentialSpec::sampled(grid, values).unwrap());
        assert!((r.weighted_integral - 6.0).abs() < 1e-10);
    }

    #[test]
    fn non_hermitian_sample_is_reported() {
        let grid = vec![0.0, 0.5, 1.0];
        let mut values: Vec<CMat> = grid.iter().map(|_| CMat::zeros(2, 2)).collect();
        values[1][(0, 1)] = c(1.0, 0.0);
        let r = validate_potential(&PotentialSpec::sampled(grid, values).unwrap());
        assert!(!r.passed());
        assert!((r.hermiticity_residual - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sampled_interpolates_linearly_and_vanishes_outside() {
        let grid = vec![0.0, 1.0, 2.0];
        let values = vec![
            CMat::from_element(1, 1, c(0.0, 0.0)),
            CMat::from_element(1, 1, c(2.0, 0.0)),
            CMat::from_element(1, 1, c(0.0, 0.0)),
        ];
        let p = PotentialSpec::sampled(grid, values).unwrap();
        assert!((p.eval(0.25)[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((p.eval(1.5)[(0, 0)].re - 1.0).abs() < 1e-15);
        assert_eq!(p.eval(2.5)[(0, 0)].re, 0.0);
    }

    #[test]
    fn bump_is_compact_and_hermitian() {
        let amp = CMat::from_row_slice(2, 2, &[c(-1.0, 0.0), c(0.5, 0.3), c(0.5, -0.3), c(0.7, 0.0)]);
        let p = PotentialSpec::bumps(vec![Bump { amplitude: amp.clone(), center: 1.5, half_width: 1.0 }]).unwrap();
        assert_eq!(p.support_bound(), 2.5);
        assert!(p.eval(0.4).norm() == 0.0 && p.eval(2.6).norm() == 0.0);
        assert!((p.eval(1.5) - amp).norm() < 1e-15);
        assert!(validate_potential(&p).passed());
    }
}
