//! Riemann–Liouville fractional integrals and derivatives on sampled data,
//! plus closed forms for the power weight `w₁(t) = (1 - t/T)₊^σ`.
//!
//! Sampled functions are treated as piecewise linear between nodes and the
//! kernel `|t - s|^{β-1}` is integrated exactly against each linear piece
//! (product integration), so the weak endpoint singularity needs no special
//! handling.

use crate::error::{contract, domain, Result};
use crate::special::{gamma, gamma_ratio};

/// Fractional order α, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(domain(format!("fractional order must lie in (0,1), got {alpha}")))
        }
    }

    /// The order α = 1 - γ attached to a memory kernel `(t-s)^{-γ}`.
    pub fn from_memory_exponent(gamma: f64) -> Result<Self> {
        Self::new(1.0 - gamma)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// 1 - α, which is again a valid order.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

/// Strictly increasing nodes `c = t₀ < t₁ < … < t_n = d` with at least three entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(domain(format!("time grid needs at least 3 nodes, got {}", nodes.len())));
        }
        if nodes.iter().any(|t| !t.is_finite()) {
            return Err(domain("time grid nodes must be finite"));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("time grid nodes must be strictly increasing"));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(c: f64, d: f64, count: usize) -> Result<Self> {
        if !(d > c) || count < 3 {
            return Err(domain(format!("uniform grid needs c < d and count >= 3 (c={c}, d={d}, count={count})")));
        }
        let h = (d - c) / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|i| c + i as f64 * h).collect();
        nodes[count - 1] = d;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Step used by the central-difference derivatives.
    pub fn derivative_step(&self) -> f64 {
        (1e-4 * (self.end() - self.start())).max(1e-6)
    }
}

/// Values of a function at the nodes of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(contract(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("sampled values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Samples `I^α_{c|t} self` at every node (the value at `c` is 0).
    pub fn left_integral(&self, alpha: FracOrder) -> SampledFunction {
        let nodes = self.grid.nodes();
        let mut values = Vec::with_capacity(nodes.len());
        values.push(0.0);
        for &t in &nodes[1..] {
            values.push(left_product_integral(nodes, &self.values, alpha.value(), t));
        }
        SampledFunction { grid: self.grid.clone(), values }
    }
}

/// ∫ over the linear piece `f(s) = f0 + slope (s - s0)`, `s ∈ [s0, s1]`, of
/// `|t - s|^{β-1}`, with `t` outside the open piece.
fn piece_moment(s0: f64, s1: f64, f0: f64, slope: f64, t: f64, beta: f64) -> f64 {
    if t >= s1 {
        let (lo, hi) = (t - s1, t - s0);
        let m0 = (hi.powf(beta) - lo.powf(beta)) / beta;
        let m1 = (hi.powf(beta + 1.0) - lo.powf(beta + 1.0)) / (beta + 1.0);
        f0 * m0 + slope * (hi * m0 - m1)
    } else {
        let (lo, hi) = (s0 - t, s1 - t);
        let m0 = (hi.powf(beta) - lo.powf(beta)) / beta;
        let m1 = (hi.powf(beta + 1.0) - lo.powf(beta + 1.0)) / (beta + 1.0);
        f0 * m0 + slope * (m1 - lo * m0)
    }
}

/// `(1/Γ(β)) ∫_c^t (t-s)^{β-1} f(s) ds` for the piecewise-linear interpolant.
fn left_product_integral(nodes: &[f64], values: &[f64], beta: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..nodes.len() - 1 {
        let (s0, s1) = (nodes[i], nodes[i + 1]);
        if s0 >= t {
            break;
        }
        let slope = (values[i + 1] - values[i]) / (s1 - s0);
        acc += piece_moment(s0, s1.min(t), values[i], slope, t, beta);
    }
    acc / gamma(beta)
}

/// `(1/Γ(β)) ∫_t^d (s-t)^{β-1} f(s) ds` for the piecewise-linear interpolant.
fn right_product_integral(nodes: &[f64], values: &[f64], beta: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    for i in (0..nodes.len() - 1).rev() {
        let (s0, s1) = (nodes[i], nodes[i + 1]);
        if s1 <= t {
            break;
        }
        let slope = (values[i + 1] - values[i]) / (s1 - s0);
        let start = s0.max(t);
        let f_start = values[i] + slope * (start - s0);
        acc += piece_moment(start, s1, f_start, slope, t, beta);
    }
    acc / gamma(beta)
}

/// Left-sided Riemann–Liouville integral `I^α_{c|t} f(t)`.
pub fn rl_left_integral(f: &SampledFunction, alpha: FracOrder, t: f64) -> Result<f64> {
    let (c, d) = (f.grid.start(), f.grid.end());
    if !(t > c && t <= d) {
        return Err(domain(format!("t = {t} outside ({c}, {d}]")));
    }
    Ok(left_product_integral(f.grid.nodes(), &f.values, alpha.value(), t))
}

/// Right-sided Riemann–Liouville integral `I^α_{t|d} f(t)`.
pub fn rl_right_integral(f: &SampledFunction, alpha: FracOrder, t: f64) -> Result<f64> {
    let (c, d) = (f.grid.start(), f.grid.end());
    if !(t >= c && t < d) {
        return Err(domain(format!("t = {t} outside [{c}, {d})")));
    }
    Ok(right_product_integral(f.grid.nodes(), &f.values, alpha.value(), t))
}

/// Left Riemann–Liouville derivative `D^α_{c|t} f = d/dt I^{1-α}_{c|t} f`,
/// by a central difference of the product-integrated `I^{1-α} f`.
///
/// The caller is responsible for `I^{1-α} f` being differentiable at `t`.
pub fn rl_left_derivative(f: &SampledFunction, alpha: FracOrder, t: f64) -> Result<f64> {
    let (c, d) = (f.grid.start(), f.grid.end());
    let h = f.grid.derivative_step();
    if !(t - h > c && t + h <= d) {
        return Err(domain(format!("t = {t} too close to the ends of [{c}, {d}] for step {h}")));
    }
    let beta = alpha.complement().value();
    let nodes = f.grid.nodes();
    let ahead = left_product_integral(nodes, &f.values, beta, t + h);
    let behind = left_product_integral(nodes, &f.values, beta, t - h);
    Ok((ahead - behind) / (2.0 * h))
}

/// Right Riemann–Liouville derivative `D^α_{t|d} f = -d/dt I^{1-α}_{t|d} f`.
pub fn rl_right_derivative(f: &SampledFunction, alpha: FracOrder, t: f64) -> Result<f64> {
    let (c, d) = (f.grid.start(), f.grid.end());
    let h = f.grid.derivative_step();
    if !(t - h >= c && t + h < d) {
        return Err(domain(format!("t = {t} too close to the ends of [{c}, {d}] for step {h}")));
    }
    let beta = alpha.complement().value();
    let nodes = f.grid.nodes();
    let ahead = right_product_integral(nodes, &f.values, beta, t + h);
    let behind = right_product_integral(nodes, &f.values, beta, t - h);
    Ok(-(ahead - behind) / (2.0 * h))
}

/// The weight `w₁(t) = (1 - t/T)₊^σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightW1 {
    horizon: f64,
    sigma: f64,
}

impl WeightW1 {
    pub fn new(horizon: f64, sigma: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain(format!("weight horizon T must be positive, got {horizon}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain(format!("weight exponent σ must be positive, got {sigma}")));
        }
        Ok(Self { horizon, sigma })
    }

    /// Weight with the default exponent for a given `(m, α, p)`.
    pub fn with_default_sigma(horizon: f64, m: u32, alpha: FracOrder, p: f64) -> Result<Self> {
        Self::new(horizon, default_sigma(m, alpha, p))
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eval(&self, t: f64) -> f64 {
        (1.0 - t / self.horizon).max(0.0).powf(self.sigma)
    }
}

/// `max(12, ⌈2(m+α)p/(p-1) + 2⌉)`: every exponent in the weight identities
/// then exceeds -1 with margin at least 1.
pub fn default_sigma(m: u32, alpha: FracOrder, p: f64) -> f64 {
    let order = m as f64 + alpha.value();
    let dual = p / (p - 1.0);
    (2.0 * order * dual + 2.0).ceil().max(12.0)
}

/// Closed form `D^{m+α}_{t|T} w₁(t) = Γ(σ+1)/Γ(σ+1-m-α) T^{-(m+α)} (1 - t/T)^{σ-α-m}`.
pub fn rl_right_derivative_w1(t: f64, w: &WeightW1, m: u32, alpha: FracOrder) -> Result<f64> {
    let order = m as f64 + alpha.value();
    let exponent = w.sigma - order;
    if exponent <= -1.0 {
        return Err(domain(format!("σ - m - α = {exponent} must exceed -1")));
    }
    if !(0.0..=w.horizon).contains(&t) {
        return Err(domain(format!("t = {t} outside [0, {}]", w.horizon)));
    }
    let ratio = gamma_ratio(w.sigma + 1.0, w.sigma + 1.0 - order);
    Ok(ratio * w.horizon.powf(-order) * (1.0 - t / w.horizon).powf(exponent))
}

/// A closed-form integral `value = constant · T^{exponent}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub value: f64,
    pub constant: f64,
    pub exponent: f64,
}

/// `∫₀ᵀ w₁^{-1/(p-1)} |D^{m+α}_{t|T} w₁|^{p/(p-1)} dt = C T^{1-(m+α)p/(p-1)}`,
/// with `C = [Γ(σ+1)/Γ(σ+1-m-α)]^{p'} / (σ - (m+α)p' + 1)`.
///
/// This is the time factor that appears after Young's inequality is applied
/// against the weight.
pub fn w1_dual_power_integral(w: &WeightW1, m: u32, alpha: FracOrder, p: f64) -> Result<ClosedForm> {
    if !(p > 1.0) {
        return Err(domain(format!("p must exceed 1, got {p}")));
    }
    let order = m as f64 + alpha.value();
    let dual = p / (p - 1.0);
    let lower = (p * (order - 1.0) + 1.0) / (p - 1.0);
    if w.sigma <= lower {
        return Err(domain(format!("σ = {} must exceed (p(α+m-1)+1)/(p-1) = {lower}", w.sigma)));
    }
    let tail = w.sigma - order * dual;
    if tail <= -1.0 {
        return Err(domain(format!("σ - (m+α)p' = {tail} must exceed -1")));
    }
    let constant = gamma_ratio(w.sigma + 1.0, w.sigma + 1.0 - order).powf(dual) / (tail + 1.0);
    let exponent = 1.0 - order * dual;
    Ok(ClosedForm { value: constant * w.horizon.powf(exponent), constant, exponent })
}

/// `∫₀ᵀ D^{m+α}_{t|T} w₁(t) dt = Γ(σ+1)/Γ(σ+2-m-α) · T^{1-(m+α)}`.
///
/// Integrating the closed-form derivative over `[0, T]` contributes one
/// power of T, so the exponent is `1 - (m+α)`.
pub fn w1_derivative_integral(w: &WeightW1, m: u32, alpha: FracOrder) -> Result<ClosedForm> {
    let order = m as f64 + alpha.value();
    if w.sigma - order <= -1.0 {
        return Err(domain(format!("σ - m - α = {} must exceed -1", w.sigma - order)));
    }
    let constant = gamma_ratio(w.sigma + 1.0, w.sigma + 2.0 - order);
    let exponent = 1.0 - order;
    Ok(ClosedForm { value: constant * w.horizon.powf(exponent), constant, exponent })
}

/// `|∫ f D^α_{c|t} g dt - ∫ g D^α_{t|d} f dt|` over the shared grid.
///
/// Both sides are Stieltjes sums against the product-integrated
/// `I^{1-α} g` and `I^{1-α}_{t|d} f`, which stay continuous at the ends
/// where the derivatives themselves may be singular.
pub fn ibp_residual(f: &SampledFunction, g: &SampledFunction, alpha: FracOrder) -> Result<f64> {
    if f.grid != g.grid {
        return Err(contract("integration by parts needs both functions on the same grid"));
    }
    let nodes = f.grid.nodes();
    let beta = alpha.complement().value();
    let n = nodes.len();
    let left: Vec<f64> = (0..n)
        .map(|i| if i == 0 { 0.0 } else { left_product_integral(nodes, &g.values, beta, nodes[i]) })
        .collect();
    let right: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { 0.0 } else { right_product_integral(nodes, &f.values, beta, nodes[i]) })
        .collect();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..n - 1 {
        lhs += 0.5 * (f.values[i] + f.values[i + 1]) * (left[i + 1] - left[i]);
        rhs -= 0.5 * (g.values[i] + g.values[i + 1]) * (right[i + 1] - right[i]);
    }
    Ok((lhs - rhs).abs())
}

/// Largest residual of `-d/dt D^α_{t|T} w₁ = D^{1+α}_{t|T} w₁` over the
/// interior nodes of `grid`, both sides from the closed forms and `d/dt`
/// from a three-point (possibly nonuniform) central difference.
pub fn derivative_shift_residual(w: &WeightW1, alpha: FracOrder, grid: &TimeGrid) -> Result<f64> {
    if grid.start() < 0.0 || grid.end() > w.horizon {
        return Err(domain(format!("grid must lie inside [0, {}]", w.horizon)));
    }
    let nodes = grid.nodes();
    let first = nodes
        .iter()
        .map(|&t| rl_right_derivative_w1(t, w, 0, alpha))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for i in 1..nodes.len() - 1 {
        let (hm, hp) = (nodes[i] - nodes[i - 1], nodes[i + 1] - nodes[i]);
        let slope = -hp / (hm * (hm + hp)) * first[i - 1]
            + (hp - hm) / (hm * hp) * first[i]
            + hm / (hp * (hm + hp)) * first[i + 1];
        let shifted = rl_right_derivative_w1(nodes[i], w, 1, alpha)?;
        worst = worst.max((-slope - shifted).abs());
    }
    Ok(worst)
}
