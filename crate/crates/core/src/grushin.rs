//! Bi-radial discretisation of the Grushin operator `Δ_G = Δ_x + |x|² Δ_y`
//! and the exponential comparison function Θ.
//!
//! For `u = u(r, s)` with `r = |x|`, `s = |y|`,
//!
//! ```text
//! Δ_G u = r^{1-N} ∂_r(r^{N-1} ∂_r u) + r² s^{1-k} ∂_s(s^{k-1} ∂_s u).
//! ```
//!
//! The grid is cell-centred, so no node sits on the axes `r = 0`, `s = 0`.
//! Each radial factor is discretised in flux form with exact shell volumes,
//! which keeps the operator exact on `1, r², s², r²s²`, gives an M-matrix
//! for every `(N, k)` and makes `W·L` symmetric for the diagonal weight `W`
//! of shell volumes.

use crate::error::{contract, domain, Result};
use crate::quad::{integrate_pieces, Tolerance};
use crate::special::{unit_sphere_area, Halton2};
use serde::{Deserialize, Serialize};

/// Dimensions of `ℝ^N × ℝ^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u32; 2]", into = "[u32; 2]")]
pub struct GrushinDims {
    n: u32,
    k: u32,
}

impl GrushinDims {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(domain(format!("dimensions must be at least 1, got N={n}, k={k}")));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Homogeneous dimension `Q = N + 2k`.
    pub fn homogeneous_dimension(&self) -> u32 {
        self.n + 2 * self.k
    }

    /// `2(N+2) + k`, the constant in the lower bound `Δ_G Θ ≥ -ε(2(N+2)+k) Θ`.
    pub fn theta_rate(&self) -> f64 {
        (2 * (self.n + 2) + self.k) as f64
    }
}

impl TryFrom<[u32; 2]> for GrushinDims {
    type Error = crate::Error;

    fn try_from(v: [u32; 2]) -> Result<Self> {
        Self::new(v[0], v[1])
    }
}

impl From<GrushinDims> for [u32; 2] {
    fn from(d: GrushinDims) -> Self {
        [d.n, d.k]
    }
}

/// Cell-centred tensor grid on `[0, r_max] × [0, s_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiRadialGrid {
    dims: GrushinDims,
    r_max: f64,
    s_max: f64,
    n_r: usize,
    n_s: usize,
}

impl BiRadialGrid {
    pub const MIN_NODES: usize = 8;
    pub const MIN_RADIUS: f64 = 4.0;

    pub fn new(dims: GrushinDims, r_max: f64, s_max: f64, n_r: usize, n_s: usize) -> Result<Self> {
        if n_r < Self::MIN_NODES || n_s < Self::MIN_NODES {
            return Err(domain(format!("grid needs at least {} nodes per axis, got {n_r}×{n_s}", Self::MIN_NODES)));
        }
        if !(r_max >= Self::MIN_RADIUS && s_max >= Self::MIN_RADIUS) || !r_max.is_finite() || !s_max.is_finite() {
            return Err(domain(format!("truncation radii must be at least {}, got r_max={r_max}, s_max={s_max}", Self::MIN_RADIUS)));
        }
        Ok(Self { dims, r_max, s_max, n_r, n_s })
    }

    pub fn dims(&self) -> GrushinDims {
        self.dims
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_s
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h_r(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    pub fn h_s(&self) -> f64 {
        self.s_max / self.n_s as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h_r()
    }

    pub fn s(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h_s()
    }

    /// Flat index; `s` varies fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_s + j
    }

    /// `(i, j, r_i, s_j)` for every node in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.n_r).flat_map(move |i| (0..self.n_s).map(move |j| (i, j, self.r(i), self.s(j))))
    }

    /// True for nodes whose stencil does not reach the outer Dirichlet ghosts.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i + 1 < self.n_r && j + 1 < self.n_s
    }

    /// Same grid with both node counts multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self { n_r: self.n_r * factor, n_s: self.n_s * factor, ..*self }
    }
}

/// Nodal values on a [`BiRadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: BiRadialGrid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &BiRadialGrid) -> Self {
        Self { grid: *grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &BiRadialGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid.nodes().map(|(_, _, r, s)| f(r, s)).collect();
        Self { grid: *grid, values }
    }

    pub fn from_values(grid: &BiRadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(contract(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("field values must be finite"));
        }
        Ok(Self { grid: *grid, values })
    }

    pub fn grid(&self) -> &BiRadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * factor).collect() }
    }
}

/// Exact volume of the shell `[(i)h, (i+1)h]` in `ℝ^d`, divided by `ω_{d-1} h`.
fn shell_weight(i: usize, h: f64, d: u32) -> f64 {
    let lo = i as f64 * h;
    let hi = lo + h;
    (hi.powi(d as i32) - lo.powi(d as i32)) / (d as f64 * h)
}

/// Five-point discrete Grushin operator with reflection at the axes and
/// homogeneous Dirichlet ghosts just beyond `r_max`, `s_max`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    grid: BiRadialGrid,
    diag: Vec<f64>,
    r_lo: Vec<f64>,
    r_hi: Vec<f64>,
    s_lo: Vec<f64>,
    s_hi: Vec<f64>,
    weights: Vec<f64>,
}

/// Assembles the discrete operator on `grid`.
pub fn assemble(grid: &BiRadialGrid) -> OperatorMatrix {
    let (n, k) = (grid.dims.n, grid.dims.k);
    let (hr, hs) = (grid.h_r(), grid.h_s());
    let vol_r: Vec<f64> = (0..grid.n_r).map(|i| shell_weight(i, hr, n)).collect();
    let vol_s: Vec<f64> = (0..grid.n_s).map(|j| shell_weight(j, hs, k)).collect();
    // Face area factors r^{N-1} at r = (i+1) h; the face at r = 0 carries no flux.
    let face_r: Vec<f64> = (0..grid.n_r).map(|i| ((i + 1) as f64 * hr).powi(n as i32 - 1)).collect();
    let face_s: Vec<f64> = (0..grid.n_s).map(|j| ((j + 1) as f64 * hs).powi(k as i32 - 1)).collect();

    let len = grid.len();
    let mut op = OperatorMatrix {
        grid: *grid,
        diag: vec![0.0; len],
        r_lo: vec![0.0; len],
        r_hi: vec![0.0; len],
        s_lo: vec![0.0; len],
        s_hi: vec![0.0; len],
        weights: vec![0.0; len],
    };
    for i in 0..grid.n_r {
        let ri = grid.r(i);
        let up_r = face_r[i] / (hr * hr * vol_r[i]);
        let down_r = if i == 0 { 0.0 } else { face_r[i - 1] / (hr * hr * vol_r[i]) };
        for j in 0..grid.n_s {
            let idx = grid.index(i, j);
            let up_s = ri * ri * face_s[j] / (hs * hs * vol_s[j]);
            let down_s = if j == 0 { 0.0 } else { ri * ri * face_s[j - 1] / (hs * hs * vol_s[j]) };
            op.diag[idx] = -(up_r + down_r + up_s + down_s);
            op.r_lo[idx] = down_r;
            op.r_hi[idx] = if i + 1 < grid.n_r { up_r } else { 0.0 };
            op.s_lo[idx] = down_s;
            op.s_hi[idx] = if j + 1 < grid.n_s { up_s } else { 0.0 };
            op.weights[idx] = vol_r[i] * vol_s[j];
        }
    }
    op
}

impl OperatorMatrix {
    pub fn grid(&self) -> &BiRadialGrid {
        &self.grid
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Diagonal `W` such that `W·L` is symmetric.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `out = L u` on raw slices in storage order.
    pub fn apply_slice(&self, u: &[f64], out: &mut [f64]) {
        let n_s = self.grid.n_s;
        let n_r = self.grid.n_r;
        for i in 0..n_r {
            for j in 0..n_s {
                let idx = i * n_s + j;
                let mut acc = self.diag[idx] * u[idx];
                if i > 0 {
                    acc += self.r_lo[idx] * u[idx - n_s];
                }
                if i + 1 < n_r {
                    acc += self.r_hi[idx] * u[idx + n_s];
                }
                if j > 0 {
                    acc += self.s_lo[idx] * u[idx - 1];
                }
                if j + 1 < n_s {
                    acc += self.s_hi[idx] * u[idx + 1];
                }
                out[idx] = acc;
            }
        }
    }

    pub fn apply(&self, u: &Field) -> Result<Field> {
        apply(self, u)
    }
}

/// Matrix-vector product `L u`.
pub fn apply(op: &OperatorMatrix, u: &Field) -> Result<Field> {
    if u.grid != op.grid {
        return Err(contract("field and operator live on different grids"));
    }
    let mut out = Field::zeros(&op.grid);
    op.apply_slice(&u.values, &mut out.values);
    Ok(out)
}

/// Bi-radial integral `ω_{N-1} ω_{k-1} Σ u(r_i, s_j) r_i^{N-1} s_j^{k-1} h_r h_s`.
pub fn biradial_integral(u: &Field) -> f64 {
    let g = &u.grid;
    let (n, k) = (g.dims.n as i32, g.dims.k as i32);
    let s_weights: Vec<f64> = (0..g.n_s).map(|j| g.s(j).powi(k - 1)).collect();
    let mut total = 0.0;
    for i in 0..g.n_r {
        let row = &u.values[i * g.n_s..(i + 1) * g.n_s];
        let inner: f64 = row.iter().zip(&s_weights).map(|(v, w)| v * w).sum();
        total += g.r(i).powi(n - 1) * inner;
    }
    total * g.h_r() * g.h_s() * unit_sphere_area(g.dims.n) * unit_sphere_area(g.dims.k)
}

/// Parameters of `Θ(x, y) = c · exp(-ε √(A + |x|⁴ + |y|²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaParams {
    pub epsilon: f64,
    pub a: f64,
    pub c: f64,
}

impl ThetaParams {
    pub fn new(epsilon: f64, a: f64, c: f64) -> Result<Self> {
        if !(epsilon > 0.0 && a > 0.0 && c > 0.0) || !(epsilon.is_finite() && a.is_finite() && c.is_finite()) {
            return Err(domain(format!("Θ parameters must be positive, got ε={epsilon}, A={a}, c={c}")));
        }
        Ok(Self { epsilon, a, c })
    }

    /// `ε = 1/(2(N+2)+k)`, `A = 1`, `c = 1`.
    pub fn for_dims(dims: GrushinDims) -> Self {
        Self { epsilon: 1.0 / dims.theta_rate(), a: 1.0, c: 1.0 }
    }

    /// Same ε and A with `c` chosen so that `∫_{ℝ^{N+k}} Θ = 1`.
    pub fn normalized(self, dims: GrushinDims) -> Result<Self> {
        let mass = theta_mass(Self { c: 1.0, ..self }, dims)?;
        Ok(Self { c: 1.0 / mass, ..self })
    }
}

/// `∫_{ℝ^{N+k}} Θ` by nested adaptive quadrature in the bi-radial measure.
pub fn theta_mass(params: ThetaParams, dims: GrushinDims) -> Result<f64> {
    let (n, k) = (dims.n as i32, dims.k as i32);
    let eps = params.epsilon;
    // Beyond these cut-offs the integrand is below e^{-60} times its peak.
    let s_cut = (60.0 + 10.0 * (k - 1) as f64) / eps;
    let r_cut = ((60.0 + 10.0 * (n - 1) as f64) / eps).sqrt();
    let tol = Tolerance::new(0.0, 1e-11);
    let s_pieces = [0.0, s_cut / 64.0, s_cut / 16.0, s_cut / 4.0, s_cut];
    let r_pieces = [0.0, r_cut / 8.0, r_cut / 4.0, r_cut / 2.0, r_cut];
    let mut failure = None;
    let outer = integrate_pieces(
        |r| {
            let r4 = r.powi(4);
            let inner = integrate_pieces(
                |s| (-eps * (params.a + r4 + s * s).sqrt()).exp() * s.powi(k - 1),
                &s_pieces,
                tol,
            );
            match inner {
                Ok(v) => v * r.powi(n - 1),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &r_pieces,
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(params.c * outer * unit_sphere_area(dims.n) * unit_sphere_area(dims.k))
}

/// `Θ(r, s) = c · exp(-ε √(A + r⁴ + s²))`.
pub fn theta_eval(params: &ThetaParams, r: f64, s: f64) -> f64 {
    params.c * (-params.epsilon * (params.a + r.powi(4) + s * s).sqrt()).exp()
}

/// Exact `Δ_G Θ` at `(|x|, |y|) = (r, s)`: with `ρ = A + r⁴ + s²`,
///
/// ```text
/// Δ_G Θ = ¼ (ε ρ^{-3/2} + ε² ρ^{-1}) (16 r⁶ + 4 r² s²) Θ - ε (2(N+2)+k) r² ρ^{-1/2} Θ.
/// ```
pub fn grushin_theta_analytic(params: &ThetaParams, dims: GrushinDims, r: f64, s: f64) -> f64 {
    let eps = params.epsilon;
    let r2 = r * r;
    let rho = params.a + r2 * r2 + s * s;
    let theta = params.c * (-eps * rho.sqrt()).exp();
    let grad_sq = 16.0 * r2 * r2 * r2 + 4.0 * r2 * s * s;
    0.25 * (eps * rho.powf(-1.5) + eps * eps / rho) * grad_sq * theta
        - eps * dims.theta_rate() * r2 / rho.sqrt() * theta
}

/// Minimum over `samples` Halton points in `[0, 20]²` of
/// `Δ_G Θ + ε(2(N+2)+k) Θ`; nonnegative up to rounding when the lower bound holds.
pub fn theta_inequality_margin(params: &ThetaParams, dims: GrushinDims, samples: usize) -> Result<f64> {
    if samples == 0 {
        return Err(domain("at least one sample is required"));
    }
    let rate = params.epsilon * dims.theta_rate();
    Ok(Halton2::new()
        .take(samples)
        .map(|(u, v)| {
            let (r, s) = (20.0 * u, 20.0 * v);
            grushin_theta_analytic(params, dims, r, s) + rate * theta_eval(params, r, s)
        })
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dims(n: u32, k: u32) -> GrushinDims {
        GrushinDims::new(n, k).unwrap()
    }

    fn grid(n: u32, k: u32, nodes: usize) -> BiRadialGrid {
        BiRadialGrid::new(dims(n, k), 6.0, 8.0, nodes, nodes).unwrap()
    }

    #[test]
    fn validation() {
        assert!(GrushinDims::new(0, 1).is_err());
        assert_eq!(dims(2, 3).homogeneous_dimension(), 8);
        assert!(BiRadialGrid::new(dims(1, 1), 3.0, 8.0, 16, 16).is_err());
        assert!(BiRadialGrid::new(dims(1, 1), 8.0, 8.0, 7, 16).is_err());
        assert!(ThetaParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn polynomials_are_reproduced_exactly() {
        for (n, k) in [(1, 1), (2, 1), (3, 2)] {
            let g = grid(n, k, 24);
            let op = assemble(&g);
            let cases: [(Box<dyn Fn(f64, f64) -> f64>, Box<dyn Fn(f64, f64) -> f64>); 4] = [
                (Box::new(|_, _| 1.0), Box::new(|_, _| 0.0)),
                (Box::new(|r, _| r * r), Box::new(move |_, _| 2.0 * n as f64)),
                (Box::new(|_, s| s * s), Box::new(move |r, _| 2.0 * k as f64 * r * r)),
                (
                    Box::new(|r, s| r * r * s * s),
                    Box::new(move |r, s| 2.0 * n as f64 * s * s + 2.0 * k as f64 * r.powi(4)),
                ),
            ];
            for (u, lu) in cases.iter() {
                let out = apply(&op, &Field::from_fn(&g, u)).unwrap();
                for (i, j, r, s) in g.nodes() {
                    if g.is_interior(i, j) {
                        let want = lu(r, s);
                        assert!((out.at(i, j) - want).abs() <= 1e-9 * (1.0 + want.abs()), "N={n} k={k} node ({i},{j}): {} vs {want}", out.at(i, j));
                    }
                }
            }
        }
    }

    #[test]
    fn apply_zero_and_mismatch() {
        let g = grid(1, 1, 16);
        let op = assemble(&g);
        assert_eq!(apply(&op, &Field::zeros(&g)).unwrap().sup_norm(), 0.0);
        let other = grid(1, 1, 32);
        assert!(apply(&op, &Field::zeros(&other)).is_err());
    }

    #[test]
    fn weighted_operator_is_symmetric() {
        let g = grid(2, 2, 12);
        let op = assemble(&g);
        let w = op.weights();
        let mut e_a = vec![0.0; g.len()];
        let mut e_b = vec![0.0; g.len()];
        let mut out = vec![0.0; g.len()];
        for (a, b) in [(0usize, 1usize), (0, 12), (25, 37), (50, 51)] {
            e_a.fill(0.0);
            e_b.fill(0.0);
            e_a[a] = 1.0;
            e_b[b] = 1.0;
            op.apply_slice(&e_b, &mut out);
            let ab = w[a] * out[a];
            op.apply_slice(&e_a, &mut out);
            let ba = w[b] * out[b];
            assert_relative_eq!(ab, ba, max_relative = 1e-12);
        }
    }

    #[test]
    fn theta_examples() {
        let p = ThetaParams::new(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(theta_eval(&p, 1.0, 0.0), (-(2.0f64).sqrt()).exp(), max_relative = 1e-15);
        assert_relative_eq!(theta_eval(&p, 1.0, 0.0), 0.243_116_734_434_154_7, max_relative = 1e-12);
        assert_relative_eq!(theta_eval(&p, 0.0, 0.0), (-1.0f64).exp());
        for s in [0.0, 1.0, 7.5] {
            assert_eq!(grushin_theta_analytic(&p, dims(2, 1), 0.0, s), 0.0);
        }
    }

    #[test]
    fn analytic_laplacian_matches_finite_differences() {
        // Independent route: differentiate Θ(|x|,|y|) in Cartesian coordinates.
        let d = dims(2, 1);
        let p = ThetaParams::for_dims(d);
        let theta = |x: [f64; 2], y: f64| theta_eval(&p, (x[0] * x[0] + x[1] * x[1]).sqrt(), y.abs());
        let h = 1e-3;
        for &(x0, x1, y) in &[(0.7, 0.2, 0.4), (1.3, -0.4, 2.0), (0.1, 0.1, -3.0)] {
            let c = theta([x0, x1], y);
            let dxx = (theta([x0 + h, x1], y) - 2.0 * c + theta([x0 - h, x1], y)) / (h * h);
            let dyy_x = (theta([x0, x1 + h], y) - 2.0 * c + theta([x0, x1 - h], y)) / (h * h);
            let dyy = (theta([x0, x1], y + h) - 2.0 * c + theta([x0, x1], y - h)) / (h * h);
            let fd = dxx + dyy_x + (x0 * x0 + x1 * x1) * dyy;
            let r = (x0 * x0 + x1 * x1).sqrt();
            let exact = grushin_theta_analytic(&p, d, r, y.abs());
            assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
        }
    }

    #[test]
    fn margin_examples() {
        for (n, k, eps) in [(1, 1, 1.0 / 7.0), (3, 2, 1.0 / 12.0)] {
            let p = ThetaParams::new(eps, 1.0, 1.0).unwrap();
            assert!(theta_inequality_margin(&p, dims(n, k), 100_000).unwrap() >= -1e-12);
        }
        let d = dims(1, 1);
        let p = ThetaParams::for_dims(d);
        for s in [0.0, 2.0, 9.0] {
            let at_axis = grushin_theta_analytic(&p, d, 0.0, s) + p.epsilon * d.theta_rate() * theta_eval(&p, 0.0, s);
            assert_relative_eq!(at_axis, p.epsilon * 7.0 * theta_eval(&p, 0.0, s));
            assert!(at_axis > 0.0);
        }
        assert!(theta_inequality_margin(&p, d, 0).is_err());
    }

    #[test]
    fn biradial_integral_unit_square() {
        let g = BiRadialGrid::new(dims(1, 1), 4.0, 4.0, 16, 16).unwrap();
        let bump = Field::from_fn(&g, |r, s| if r < 1.0 && s < 1.0 { 1.0 } else { 0.0 });
        assert_relative_eq!(biradial_integral(&bump), 4.0, max_relative = 1e-14);
        assert_eq!(biradial_integral(&Field::zeros(&g)), 0.0);
    }

    #[test]
    fn normalized_theta_has_unit_mass() {
        let d = dims(1, 1);
        let p = ThetaParams::for_dims(d).normalized(d).unwrap();
        assert_relative_eq!(theta_mass(p, d).unwrap(), 1.0, max_relative = 1e-9);
        let extent = 40.0 / p.epsilon;
        let g = BiRadialGrid::new(d, extent, extent, 2000, 2000).unwrap();
        let field = Field::from_fn(&g, |r, s| theta_eval(&p, r, s));
        assert!((biradial_integral(&field) - 1.0).abs() <= 1e-3);
    }

    proptest! {
        #[test]
        fn linearity(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
            let g = grid(2, 1, 10);
            let op = assemble(&g);
            let u = Field::from_fn(&g, |r, s| ((seed as f64 + r) * 1.3).sin() * s.cos());
            let v = Field::from_fn(&g, |r, s| (r * s + seed as f64).cos());
            let combo = Field::from_fn(&g, |r, s| a * ((seed as f64 + r) * 1.3).sin() * s.cos() + b * (r * s + seed as f64).cos());
            let lhs = apply(&op, &combo).unwrap();
            let lu = apply(&op, &u).unwrap();
            let lv = apply(&op, &v).unwrap();
            for idx in 0..g.len() {
                let rhs = a * lu.values()[idx] + b * lv.values()[idx];
                prop_assert!((lhs.values()[idx] - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn quadratic_form_is_nonpositive(seed in proptest::collection::vec(-1.0f64..1.0, 144)) {
            let g = BiRadialGrid::new(dims(1, 2), 5.0, 5.0, 12, 12).unwrap();
            let op = assemble(&g);
            let u = Field::from_values(&g, seed).unwrap();
            let lu = apply(&op, &u).unwrap();
            let form: f64 = u.values().iter().zip(lu.values()).zip(op.weights()).map(|((a, b), w)| a * b * w).sum();
            prop_assert!(form <= 1e-12);
        }

        #[test]
        fn theta_monotone(r in 0.0f64..20.0, s in 0.0f64..20.0, dr in 0.0f64..2.0, ds in 0.0f64..2.0) {
            let p = ThetaParams::for_dims(dims(1, 1));
            prop_assert!(theta_eval(&p, r + dr, s) <= theta_eval(&p, r, s));
            prop_assert!(theta_eval(&p, r, s + ds) <= theta_eval(&p, r, s));
        }
    }
}
