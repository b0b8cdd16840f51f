//! Jacobi-preconditioned conjugate gradients for `(I - dt L) u = b`.
//!
//! With `W` the shell-volume weights, `W - dt·W L` is symmetric positive
//! definite, so CG runs on `(W - dt·W L) u = W b`. Reductions are plain
//! sequential sums in node order, which keeps results bit-reproducible.

use crate::error::{Error, Result};
use crate::grushin::OperatorMatrix;

pub const RELATIVE_TOLERANCE: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves in place, starting from the current contents of `u`.
/// Returns the iteration count.
pub fn solve_implicit(op: &OperatorMatrix, dt: f64, rhs: &[f64], u: &mut [f64]) -> Result<usize> {
    let n = rhs.len();
    let w = op.weights();
    let diag = op.diagonal();
    let precond: Vec<f64> = (0..n).map(|i| 1.0 / (w[i] * (1.0 - dt * diag[i]))).collect();

    let mut lu = vec![0.0; n];
    let apply = |x: &[f64], lx: &mut Vec<f64>, out: &mut Vec<f64>| {
        op.apply_slice(x, lx);
        for i in 0..n {
            out[i] = w[i] * (x[i] - dt * lx[i]);
        }
    };

    let b: Vec<f64> = (0..n).map(|i| w[i] * rhs[i]).collect();
    let b_norm = dot(&b, &b).sqrt();
    if b_norm == 0.0 {
        u.fill(0.0);
        return Ok(0);
    }
    let mut r = vec![0.0; n];
    apply(u, &mut lu, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&precond).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let max_iter = 10 * n;
    let mut residual = dot(&r, &r).sqrt() / b_norm;
    for iter in 0..max_iter {
        if residual <= RELATIVE_TOLERANCE {
            return Ok(iter);
        }
        apply(&p, &mut lu, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            u[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        residual = dot(&r, &r).sqrt() / b_norm;
        if !residual.is_finite() {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * precond[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if residual <= RELATIVE_TOLERANCE {
        return Ok(max_iter);
    }
    Err(Error::Solver { iterations: max_iter, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grushin::{assemble, BiRadialGrid, GrushinDims};

    #[test]
    fn residual_meets_tolerance() {
        let g = BiRadialGrid::new(GrushinDims::new(2, 1).unwrap(), 8.0, 12.0, 24, 36).unwrap();
        let op = assemble(&g);
        let rhs: Vec<f64> = g.nodes().map(|(_, _, r, s)| (-(r * r + s)).exp()).collect();
        let mut u = vec![0.0; g.len()];
        let dt = 0.3;
        solve_implicit(&op, dt, &rhs, &mut u).unwrap();
        let mut lu = vec![0.0; g.len()];
        op.apply_slice(&u, &mut lu);
        let worst = u.iter().zip(&lu).zip(&rhs).map(|((x, l), b)| (x - dt * l - b).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst:e}");
    }

    #[test]
    fn zero_rhs() {
        let g = BiRadialGrid::new(GrushinDims::new(1, 1).unwrap(), 4.0, 4.0, 8, 8).unwrap();
        let op = assemble(&g);
        let mut u = vec![1.0; g.len()];
        assert_eq!(solve_implicit(&op, 0.1, &vec![0.0; g.len()], &mut u).unwrap(), 0);
        assert!(u.iter().all(|&v| v == 0.0));
    }
}
