//! Adaptive Dormand–Prince 5(4) integration of `Y'' = (Q(x) − k²) Y`.
//!
//! The state is `[Y, Y']`, each an `n × m` block stored column-major.

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::potential::PotentialSpec;

pub const DEFAULT_RTOL: f64 = 1e-10;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

/// Propagator for one fixed spectral parameter `k²`.
pub struct Propagator<'a> {
    pot: &'a PotentialSpec,
    k2: C64,
    n: usize,
    cols: usize,
    rtol: f64,
    q: Vec<C64>,
    stages: [Vec<C64>; 7],
    tmp: Vec<C64>,
    ynew: Vec<C64>,
    breakpoints: Vec<f64>,
    /// Step size carried between calls.
    h_hint: f64,
}

impl<'a> Propagator<'a> {
    pub fn new(pot: &'a PotentialSpec, k: C64, cols: usize, rtol: f64) -> Self {
        let n = pot.n();
        let len = 2 * n * cols;
        Self {
            pot,
            k2: k * k,
            n,
            cols,
            rtol,
            q: vec![C64::new(0.0, 0.0); n * n],
            stages: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); len]),
            tmp: vec![C64::new(0.0, 0.0); len],
            ynew: vec![C64::new(0.0, 0.0); len],
            breakpoints: pot.breakpoints(),
            h_hint: 0.05 / (1.0 + k.norm()),
        }
    }

    pub fn state_len(&self) -> usize {
        2 * self.n * self.cols
    }

    #[allow(clippy::too_many_arguments)]
    fn rhs(pot: &PotentialSpec, q: &mut [C64], k2: C64, n: usize, cols: usize, x: f64, y: &[C64], dy: &mut [C64]) {
        let blk = n * cols;
        let (yv, yd) = y.split_at(blk);
        let (dv, dd) = dy.split_at_mut(blk);
        dv.copy_from_slice(yd);
        pot.eval_into(x, q);
        for c in 0..cols {
            for r in 0..n {
                let mut acc = -k2 * yv[c * n + r];
                for s in 0..n {
                    let qrs = q[s * n + r];
                    if qrs.re != 0.0 || qrs.im != 0.0 {
                        acc += qrs * yv[c * n + s];
                    }
                }
                dd[c * n + r] = acc;
            }
        }
    }

    /// Integrates the state from `x0` to `x1`, never stepping across a breakpoint.
    pub fn propagate(&mut self, x0: f64, y: &mut [C64], x1: f64) -> Result<()> {
        assert_eq!(y.len(), self.state_len());
        if x0 == x1 {
            return Ok(());
        }
        let forward = x1 > x0;
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|&b| if forward { b > x0 && b < x1 } else { b < x0 && b > x1 })
            .collect();
        if !forward {
            cuts.reverse();
        }
        cuts.push(x1);
        let mut a = x0;
        for b in cuts {
            self.smooth_segment(a, y, b)?;
            a = b;
        }
        Ok(())
    }

    fn smooth_segment(&mut self, x0: f64, y: &mut [C64], x1: f64) -> Result<()> {
        let dir = if x1 > x0 { 1.0 } else { -1.0 };
        let span = (x1 - x0).abs();
        if span == 0.0 {
            return Ok(());
        }
        let blk = self.n * self.cols;
        // Segment interiors are smooth; evaluate Q slightly inside so one-sided
        // limits at jumps come from the correct side.
        let inner = |x: f64| -> f64 {
            let lo = x0.min(x1);
            let hi = x0.max(x1);
            x.clamp(lo + 1e-13 * (1.0 + lo.abs()), hi - 1e-13 * (1.0 + hi.abs()))
        };
        let mut x = x0;
        let mut h = self.h_hint.min(span);
        let pot = self.pot;
        let (k2, n, cols, rtol) = (self.k2, self.n, self.cols, self.rtol);
        Self::rhs(pot, &mut self.q, k2, n, cols, inner(x), y, &mut self.stages[0]);
        let mut steps = 0usize;
        let mut last_accept_factor = 1.0;
        loop {
            let remaining = (x1 - x) * dir;
            if remaining <= 1e-14 * (1.0 + x1.abs()) {
                break;
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = h * dir;
            let len = y.len();
            {
                let [k1, k2s, k3, k4, k5, k6, k7] = &mut self.stages;
                let tmp = &mut self.tmp;
                for i in 0..len {
                    tmp[i] = y[i] + k1[i] * (hs * A21);
                }
                Self::rhs(pot, &mut self.q, k2, n, cols, inner(x + C2 * hs), tmp, k2s);
                for i in 0..len {
                    tmp[i] = y[i] + (k1[i] * A31 + k2s[i] * A32) * hs;
                }
                Self::rhs(pot, &mut self.q, k2, n, cols, inner(x + C3 * hs), tmp, k3);
                for i in 0..len {
                    tmp[i] = y[i] + (k1[i] * A41 + k2s[i] * A42 + k3[i] * A43) * hs;
                }
                Self::rhs(pot, &mut self.q, k2, n, cols, inner(x + C4 * hs), tmp, k4);
                for i in 0..len {
                    tmp[i] = y[i] + (k1[i] * A51 + k2s[i] * A52 + k3[i] * A53 + k4[i] * A54) * hs;
                }
                Self::rhs(pot, &mut self.q, k2, n, cols, inner(x + C5 * hs), tmp, k5);
                for i in 0..len {
                    tmp[i] = y[i] + (k1[i] * A61 + k2s[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * hs;
                }
                Self::rhs(pot, &mut self.q, k2, n, cols, inner(x + hs), tmp, k6);
                let ynew = &mut self.ynew;
                for i in 0..len {
                    ynew[i] = y[i] + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * hs;
                }
                Self::rhs(pot, &mut self.q, k2, n, cols, inner(x + hs), ynew, k7);
                // error estimate, scaled blockwise (value block and derivative block)
                let mut scale = [0.0_f64; 2];
                for i in 0..len {
                    let b = usize::from(i >= blk);
                    scale[b] = scale[b].max(y[i].norm()).max(ynew[i].norm());
                }
                let sc = [rtol * scale[0] + 1e-300, rtol * scale[1] + 1e-300];
                let mut err2 = 0.0;
                for i in 0..len {
                    let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
                    let b = usize::from(i >= blk);
                    err2 += (e.norm() / sc[b]).powi(2);
                }
                let err = (err2 / len as f64).sqrt();
                if !err.is_finite() {
                    return Err(Error::IntegrationFailure { x, reason: "non-finite state".into() });
                }
                if err <= 1.0 {
                    x += hs;
                    if last {
                        x = x1;
                    }
                    y.copy_from_slice(ynew);
                    k1.copy_from_slice(k7);
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    let fac = if last_accept_factor < 1.0 { fac.min(1.0) } else { fac };
                    last_accept_factor = 1.0;
                    if !last {
                        h *= fac;
                        self.h_hint = h;
                    }
                } else {
                    let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                    h *= fac;
                    last_accept_factor = fac;
                }
            }
            steps += 1;
            if steps > MAX_STEPS || h < 1e-14 * (1.0 + x.abs()) {
                return Err(Error::IntegrationFailure { x, reason: "step size underflow".into() });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_oscillator_matches_closed_form() {
        let pot = PotentialSpec::zero(1);
        let k = C64::new(7.0, 0.0);
        let mut p = Propagator::new(&pot, k, 1, DEFAULT_RTOL);
        // y = e^{ikx} from x = 3 back to 0
        let x0: f64 = 3.0;
        let e = (C64::new(0.0, 1.0) * k * x0).exp();
        let mut y = vec![e, C64::new(0.0, 1.0) * k * e];
        p.propagate(x0, &mut y, 0.0).unwrap();
        assert!((y[0] - 1.0).norm() < 1e-8, "{:?}", y);
        assert!((y[1] - C64::new(0.0, 7.0)).norm() < 1e-7);
    }

    #[test]
    fn square_well_cosine() {
        // -y'' - 4 y = -0·y on [0,1): y = cos(2x) with y(0)=1, y'(0)=0
        let pot = PotentialSpec::square_well(1, -4.0, 1.0).unwrap();
        let mut p = Propagator::new(&pot, C64::new(0.0, 0.0), 1, DEFAULT_RTOL);
        let mut y = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        p.propagate(0.0, &mut y, 1.0).unwrap();
        assert!((y[0].re - 2f64.cos()).abs() < 1e-9);
        assert!((y[1].re + 2.0 * 2f64.sin()).abs() < 1e-9);
        // free continuation beyond the wall: y linear
        let (v, d) = (y[0], y[1]);
        p.propagate(1.0, &mut y, 2.0).unwrap();
        assert!((y[0] - (v + d)).norm() < 1e-9);
    }
}
