//! Backward-Euler factor `(1 + dt·decay - dt·diffusion·Δ_N) x = rhs`.
//!
//! One-dimensional grids are solved directly by tridiagonal elimination.
//! Two-dimensional grids use Jacobi-preconditioned conjugate gradients; the
//! converged iterate is shifted by a constant so that its total mass matches
//! the exact relation `(1 + dt·decay) Σx = Σrhs`.

use thiserror::Error;

use crate::grid::{laplacian_neumann, Field};

pub const CG_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("linear solve stalled after {iterations} iterations at relative residual {residual:e}")]
pub struct SolverDiverged {
    pub iterations: usize,
    pub residual: f64,
}

/// Thomas algorithm for a diagonally dominant tridiagonal system.
/// `lower[i]` couples row `i + 1` to column `i`, `upper[i]` couples row `i`
/// to column `i + 1`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(lower.len() + 1 == n && upper.len() + 1 == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / m;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

pub fn implicit_helmholtz_solve(
    rhs: &Field,
    diffusion: f64,
    decay: f64,
    dt: f64,
) -> Result<Field, SolverDiverged> {
    debug_assert!(diffusion >= 0.0 && decay >= 0.0 && dt > 0.0);
    let grid = *rhs.grid();
    if grid.dim() == 1 {
        let n = grid.cells(0);
        let h = grid.spacing(0);
        let c = dt * diffusion / (h * h);
        let base = 1.0 + dt * decay;
        let off = vec![-c; n - 1];
        let mut diag = vec![base + 2.0 * c; n];
        diag[0] = base + c;
        diag[n - 1] = base + c;
        let x = solve_tridiagonal(&off, &diag, &off, rhs.values());
        return Ok(Field::from_raw(grid, x));
    }
    conjugate_gradient(rhs, diffusion, decay, dt)
}

fn conjugate_gradient(
    rhs: &Field,
    diffusion: f64,
    decay: f64,
    dt: f64,
) -> Result<Field, SolverDiverged> {
    let grid = *rhs.grid();
    let n = grid.cell_count();
    let base = 1.0 + dt * decay;
    let apply = |x: &Field| -> Vec<f64> {
        let lap = laplacian_neumann(x);
        x.values()
            .iter()
            .zip(lap.values())
            .map(|(xi, li)| base * xi - dt * diffusion * li)
            .collect()
    };
    // Diagonal of the operator: each interior face adds dt·d/h² to both cells.
    let mut diag = vec![base; n];
    grid.for_each_face(|a, b, h| {
        let c = dt * diffusion / (h * h);
        diag[a] += c;
        diag[b] += c;
    });

    let b = rhs.values();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Ok(Field::constant(grid, 0.0));
    }
    let mut x = Field::from_raw(grid, b.iter().map(|v| v / base).collect());
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    let mut p = Field::from_raw(grid, z.clone());
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let max_iter = 10 * n + 100;
    let mut res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
    let mut iterations = 0;
    while res > CG_RTOL {
        if iterations >= max_iter || !res.is_finite() {
            return Err(SolverDiverged {
                iterations,
                residual: res,
            });
        }
        let ap = apply(&p);
        let pap: f64 = p.values().iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for ((xi, pi), (ri, api)) in x
            .values_mut()
            .iter_mut()
            .zip(p.values())
            .zip(r.iter_mut().zip(&ap))
        {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&diag) {
            *zi = ri / di;
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.values_mut().iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
        iterations += 1;
    }

    let shift = (b.iter().sum::<f64>() / base - x.values().iter().sum::<f64>()) / n as f64;
    for xi in x.values_mut() {
        *xi += shift;
    }
    Ok(x)
}
