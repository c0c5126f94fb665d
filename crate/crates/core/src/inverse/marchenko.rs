//! Solvers for `K(x,y) + G(x+y) + ∫ₓ^T K(x,t) G(t+y) dt = 0`, `x ≤ y ≤ T`.
//!
//! Both solvers work with the adjoint unknown `Y(t) = K(x,t)†`, for which the
//! symmetrized Nyström matrix `I + W^{1/2} H W^{1/2}` is hermitian.

use log::debug;

use crate::error::{Error, Result};
use crate::inverse::fourier::GFunction;
use crate::linalg::{identity, CMat, LowerCholesky, C64};
use crate::quadrature::GaussLegendre;

/// Condition estimate beyond which a Nyström system is rejected.
pub const MAX_CONDITION: f64 = 1e10;
/// Lower bound on the truncation length `T`.
pub const MIN_TRUNCATION: f64 = 15.0;

/// `T = max(support, 10/κ_min, 15)`.
pub fn truncation_length(g: &GFunction, support: f64) -> f64 {
    let kappa_min = g.bound_states().iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let from_bound = if kappa_min.is_finite() { 10.0 / kappa_min } else { 0.0 };
    support.max(from_bound).max(MIN_TRUNCATION)
}

/// Composite Gauss–Legendre rule used by [`marchenko_solve`].
#[derive(Debug, Clone)]
pub struct NystromRule {
    gl: GaussLegendre,
    panel_length: f64,
}

impl NystromRule {
    pub fn new(order: usize, panel_length: f64) -> Self {
        Self { gl: GaussLegendre::new(order), panel_length }
    }

    fn nodes(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let panels = ((b - a) / self.panel_length).ceil().max(1.0) as usize;
        self.gl.composite(a, b, panels)
    }
}

impl Default for NystromRule {
    fn default() -> Self {
        Self::new(16, 1.0)
    }
}

/// `K(x, ·)` at the quadrature nodes of `[x, T]`.
#[derive(Debug, Clone)]
pub struct KernelRow {
    pub x: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<CMat>,
    /// Discrete residual relative to `max ‖G‖`.
    pub residual: f64,
    pub condition: f64,
}

impl KernelRow {
    /// Nyström interpolation `K(x,y) = −G(x+y) − Σ w_i K(x,t_i) G(t_i+y)`.
    pub fn eval(&self, g: &GFunction, y: f64) -> CMat {
        let mut k = -g.eval(self.x + y);
        for ((t, w), kv) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            k -= kv * g.eval(t + y) * C64::new(*w, 0.0);
        }
        k
    }
}

fn block_index(n: usize, i: usize, a: usize) -> usize {
    i * n + a
}

/// Solves the Marchenko equation at a single `x` on `[x, t_max]`.
pub fn marchenko_solve(g: &GFunction, x: f64, t_max: f64, rule: &NystromRule) -> Result<KernelRow> {
    if !(t_max > x) || x < 0.0 {
        return Err(Error::InvalidGrid(format!("x = {x}, T = {t_max}")));
    }
    let n = g.n();
    let (nodes, weights) = rule.nodes(x, t_max);
    let p = nodes.len();
    let dim = p * n;
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut hmat = vec![CMat::zeros(n, n); p * p];
    let mut gmax = 0.0_f64;
    for i in 0..p {
        for j in 0..=i {
            let v = g.eval(nodes[i] + nodes[j]);
            gmax = gmax.max(v.norm());
            hmat[i * p + j] = v.adjoint();
            hmat[j * p + i] = v;
        }
    }
    let mut a = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..p {
        for j in 0..=i {
            let h = &hmat[i * p + j];
            for r in 0..n {
                for c in 0..n {
                    let row = block_index(n, i, r);
                    let col = block_index(n, j, c);
                    if col <= row {
                        a[row * dim + col] = h[(r, c)] * (sw[i] * sw[j]);
                    }
                }
            }
        }
    }
    for d in 0..dim {
        a[d * dim + d] += C64::new(1.0, 0.0);
    }
    let chol = LowerCholesky::factor(a, dim)?;
    let condition = chol.condition_estimate(dim);
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    // right-hand side −W^{1/2} G(t_j + x), one column per channel
    let gx: Vec<CMat> = nodes.iter().map(|t| g.eval(t + x)).collect();
    let mut y = vec![CMat::zeros(n, n); p];
    for c in 0..n {
        let mut b: Vec<C64> = (0..dim).map(|q| -gx[q / n][(q % n, c)] * sw[q / n]).collect();
        chol.solve_leading(dim, &mut b);
        for (q, v) in b.into_iter().enumerate() {
            y[q / n][(q % n, c)] = v / sw[q / n];
        }
    }
    let values: Vec<CMat> = y.iter().map(|m| m.adjoint()).collect();
    let mut res = 0.0_f64;
    for j in 0..p {
        let mut r = &values[j] + gx[j].adjoint();
        for i in 0..p {
            r += &values[i] * &hmat[i * p + j] * C64::new(weights[i], 0.0);
        }
        res = res.max(r.norm());
    }
    let residual = if gmax > 0.0 { res / gmax } else { res };
    Ok(KernelRow { x, nodes, weights, values, residual, condition })
}

/// Kernel samples `K(x, y)` for every `x` of a grid, with `G` tabulated on `[0, 2T]`.
#[derive(Debug, Clone)]
pub struct MarchenkoKernel {
    pub tgrid: Vec<f64>,
    pub g: Vec<CMat>,
    pub xgrid: Vec<f64>,
    pub rows: Vec<KernelRow>,
}

impl MarchenkoKernel {
    pub fn solve(g: &GFunction, xgrid: &[f64], t_max: f64, rule: &NystromRule) -> Result<Self> {
        let rows = xgrid.iter().map(|&x| marchenko_solve(g, x, t_max, rule)).collect::<Result<Vec<_>>>()?;
        let samples = 4 * xgrid.len().max(2);
        let tgrid: Vec<f64> = (0..=samples).map(|i| 2.0 * t_max * i as f64 / samples as f64).collect();
        let gs = tgrid.iter().map(|&t| g.eval(t)).collect();
        Ok(Self { tgrid, g: gs, xgrid: xgrid.to_vec(), rows })
    }

    /// `K(x, x)` along the grid, interpolated from each row.
    pub fn diagonal(&self, g: &GFunction) -> Vec<CMat> {
        self.rows.iter().map(|r| r.eval(g, r.x)).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Output of [`nested_solve`] on the nodes `z_i = i h`, `i = 0..=M`.
#[derive(Debug, Clone)]
pub struct NestedSolution {
    pub h: f64,
    pub nodes: Vec<f64>,
    /// `K(z_m, z_m)`.
    pub diagonal: Vec<CMat>,
    /// `K(0, z_j)`.
    pub row0: Vec<CMat>,
    /// `∂ₓK(0, z_j)`.
    pub row0_x: Vec<CMat>,
    /// Discrete residual of the `x = 0` row relative to `max ‖G‖`.
    pub residual: f64,
    pub condition: f64,
}

/// Trapezoid Nyström solution for every `x = z_m` from a single factorization.
///
/// With weights `h` everywhere except `h/2` at `T`, the system for `x = z_m`
/// is the trailing block `B_m` of one hermitian matrix `B`, and the
/// half-weight at the left end becomes a rank-`n` correction. Only the
/// corner block `X_m = (B_m⁻¹)₀₀` is needed for the diagonal:
/// `K(z_m, z_m) = −(2/h)(I − X_m)(I + X_m)⁻¹`. Factoring `B` in reversed
/// order turns trailing blocks into leading ones, so `X_m` follows from the
/// diagonal blocks of the Cholesky factor.
pub fn nested_solve(g: &GFunction, h: f64, m: usize) -> Result<NestedSolution> {
    if !(h > 0.0) || m < 2 {
        return Err(Error::InvalidGrid(format!("h = {h}, M = {m}")));
    }
    let n = g.n();
    let nodes: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
    let hank: Vec<CMat> = (0..=2 * m).map(|l| g.eval(l as f64 * h)).collect();
    let gmax = hank.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let gder: Vec<CMat> = nodes.iter().map(|&t| g.eval_derivative(t)).collect();
    let d: Vec<f64> = (0..=m).map(|i| if i == m { 0.5 * h } else { h }).collect();
    let sd: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let dim = (m + 1) * n;
    let rev = |p: usize| dim - 1 - p;

    let mut a = vec![C64::new(0.0, 0.0); dim * dim];
    for p in 0..dim {
        let (i, r) = (p / n, p % n);
        for q in 0..dim {
            let (j, c) = (q / n, q % n);
            // lower triangle in reversed order
            if rev(q) > rev(p) {
                continue;
            }
            let mut v = hank[i + j][(r, c)] * (sd[i] * sd[j]);
            if p == q {
                v += 1.0;
            }
            a[rev(p) * dim + rev(q)] = v;
        }
    }
    let chol = LowerCholesky::factor(a, dim)?;
    let condition = chol.condition_estimate(dim);
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    debug!("nested_solve: dim {dim}, condition estimate {condition:e}");

    // corner blocks X_m; reversed block position of node i is M − i
    let corner = |i: usize| -> CMat {
        let q = (m - i) * n;
        let l = CMat::from_fn(n, n, |r, c| chol.get(q + r, q + c));
        let xr = (&l * l.adjoint()).try_inverse().expect("positive pivots");
        CMat::from_fn(n, n, |r, c| xr[(n - 1 - r, n - 1 - c)])
    };
    let eye = identity(n);
    let mut diagonal = Vec::with_capacity(m + 1);
    let mut x0 = CMat::zeros(n, n);
    for i in 0..=m {
        if i == m {
            diagonal.push(-&hank[2 * m]);
            continue;
        }
        let x = corner(i);
        let inv = (&eye + &x).try_inverse().ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
        let k = (&eye - &x) * inv * C64::new(-2.0 / h, 0.0);
        diagonal.push((&k + k.adjoint()).scale(0.5));
        if i == 0 {
            x0 = x;
        }
    }

    // B⁻¹ on an N×n block vector in original ordering
    let solve = |f: &[CMat]| -> Vec<CMat> {
        let mut out = vec![CMat::zeros(n, n); m + 1];
        for c in 0..n {
            let mut b: Vec<C64> = (0..dim).map(|p| f[rev(p) / n][(rev(p) % n, c)]).collect();
            chol.solve_leading(dim, &mut b);
            for (p, v) in b.into_iter().enumerate() {
                let q = rev(p);
                out[q / n][(q % n, c)] = v;
            }
        }
        out
    };
    let mut e0 = vec![CMat::zeros(n, n); m + 1];
    e0[0] = eye.clone();
    let binv_e = solve(&e0);
    let inv_ix = (&eye + &x0).try_inverse().ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    // B u − ½(B − I)E u₀ = f  ⇒  u = B⁻¹f + ½(E − B⁻¹E) u₀,  u₀ = 2(I + X₀)⁻¹(B⁻¹f)₀
    let corrected = |f: &[CMat]| -> Vec<CMat> {
        let bf = solve(f);
        let u0 = &inv_ix * &bf[0] * C64::new(2.0, 0.0);
        (0..=m)
            .map(|j| {
                let mut u = bf[j].clone();
                let mut col = -&binv_e[j];
                if j == 0 {
                    col += &eye;
                }
                u += col * &u0 * C64::new(0.5, 0.0);
                (u / C64::new(sd[j], 0.0)).adjoint()
            })
            .collect()
    };

    let f: Vec<CMat> = (0..=m).map(|j| -&hank[j] * C64::new(sd[j], 0.0)).collect();
    let row0 = corrected(&f);
    let k00 = row0[0].clone();
    let f: Vec<CMat> = (0..=m)
        .map(|j| (&hank[j] * k00.adjoint() - &gder[j]) * C64::new(sd[j], 0.0))
        .collect();
    let row0_x = corrected(&f);

    let w: Vec<f64> = (0..=m).map(|j| if j == 0 || j == m { 0.5 * h } else { h }).collect();
    let mut res = 0.0_f64;
    for j in 0..=m {
        let mut r = &row0[j] + &hank[j];
        for l in 0..=m {
            r += &row0[l] * &hank[l + j] * C64::new(w[l], 0.0);
        }
        res = res.max(r.norm());
    }
    let residual = if gmax > 0.0 { res / gmax } else { res };
    Ok(NestedSolution { h, nodes, diagonal, row0, row0_x, residual, condition })
}
