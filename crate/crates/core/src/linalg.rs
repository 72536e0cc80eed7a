//! Symmetric tridiagonal kernels: linear solves, Sylvester inertia and the generalized
//! eigenproblem `A x = μ M x` with diagonal positive `M`.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Contract(format!(
                "tridiagonal shape mismatch: diag {} off {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(SymTridiag { diag, off })
    }

    /// Stiffness matrix `K` restricted to the grid's unknowns.
    pub fn stiffness(grid: &RadialGrid) -> Self {
        let range = grid.unknowns();
        let full = grid.stiffness_diag();
        let edges = grid.edges();
        let diag = full[range.clone()].to_vec();
        let off = (range.start..range.end - 1).map(|i| -edges[i]).collect();
        SymTridiag { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A + c·diag(m)`.
    pub fn shifted(&self, c: f64, m: &[f64]) -> Self {
        SymTridiag {
            diag: self.diag.iter().zip(m).map(|(d, w)| d + c * w).collect(),
            off: self.off.clone(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// Solve `A x = rhs` by symmetric elimination without pivoting. Tiny pivots are
    /// nudged rather than rejected so the routine doubles as an inverse-iteration kernel.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::Contract("right-hand side length mismatch".into()));
        }
        let scale = self
            .diag
            .iter()
            .chain(&self.off)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let tiny = scale * f64::EPSILON * 1e-2;
        let mut piv = vec![0.0; n];
        let mut y = vec![0.0; n];
        piv[0] = nudge(self.diag[0], tiny);
        y[0] = rhs[0];
        for i in 1..n {
            let l = self.off[i - 1] / piv[i - 1];
            piv[i] = nudge(self.diag[i] - l * self.off[i - 1], tiny);
            y[i] = rhs[i] - l * y[i - 1];
        }
        let mut x = vec![0.0; n];
        x[n - 1] = y[n - 1] / piv[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (y[i] - self.off[i] * x[i + 1]) / piv[i];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("tridiagonal solve produced non-finite values".into()));
        }
        Ok(x)
    }

    /// Number of eigenvalues of `A x = μ M x` strictly below `sigma`, by Sylvester's law
    /// applied to the `LDLᵀ` pivots of `A − σM`.
    pub fn count_below(&self, sigma: f64, m: &[f64]) -> usize {
        let n = self.len();
        let mut count = 0;
        let mut d = self.diag[0] - sigma * m[0];
        for i in 0..n {
            if i > 0 {
                let prev = if d == 0.0 { f64::EPSILON * self.off[i - 1].abs().max(1e-300) } else { d };
                d = self.diag[i] - sigma * m[i] - self.off[i - 1] * self.off[i - 1] / prev;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }
}

fn nudge(p: f64, tiny: f64) -> f64 {
    if p.abs() < tiny {
        if p < 0.0 {
            -tiny
        } else {
            tiny
        }
    } else {
        p
    }
}

/// Eigenpairs of `A x = μ M x`, ascending, with `xᵢᵀ M xⱼ = δᵢⱼ`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// The `k` smallest eigenpairs of the symmetric-definite pencil `(A, diag(m))`.
///
/// Eigenvalues are isolated by inertia bisection, vectors come from shifted inverse
/// iteration with `M`-orthogonal deflation, and the reported value is the final Rayleigh
/// quotient.
pub fn generalized_eigen(a: &SymTridiag, m: &[f64], k: usize) -> Result<EigenPairs> {
    let n = a.len();
    if m.len() != n {
        return Err(Error::Contract("mass length mismatch".into()));
    }
    if let Some(i) = m.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::Contract(format!("mass must be positive; entry {i} is {}", m[i])));
    }
    if k == 0 || k > n {
        return Err(Error::Contract(format!("requested {k} eigenpairs of a size-{n} problem")));
    }

    let (lo, hi) = gershgorin(a, m);
    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let estimate = bisect_eigenvalue(a, m, j, lo, hi);
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i * 7919 + j * 104_729) % 97) as f64 / 97.0)
            .collect();
        m_orthonormalize(&mut x, &vectors, m)?;
        let shifted = a.shifted(-estimate, m);
        let mut rq = estimate;
        for _ in 0..6 {
            let rhs: Vec<f64> = x.iter().zip(m).map(|(v, w)| v * w).collect();
            let mut y = shifted.solve(&rhs)?;
            m_orthonormalize(&mut y, &vectors, m)?;
            let ay = a.apply(&y);
            let next: f64 = ay.iter().zip(&y).map(|(p, q)| p * q).sum();
            let converged = (next - rq).abs() <= 1e-15 * next.abs().max(1.0);
            x = y;
            rq = next;
            if converged {
                break;
            }
        }
        if !rq.is_finite() {
            return Err(Error::Numerical(format!("eigenpair {j} did not converge")));
        }
        values.push(rq);
        vectors.push(x);
    }
    Ok(EigenPairs { values, vectors })
}

fn gershgorin(a: &SymTridiag, m: &[f64]) -> (f64, f64) {
    let n = a.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let c = a.diag[i] / m[i];
        let mut radius = 0.0;
        if i > 0 {
            radius += a.off[i - 1].abs() / (m[i] * m[i - 1]).sqrt();
        }
        if i + 1 < n {
            radius += a.off[i].abs() / (m[i] * m[i + 1]).sqrt();
        }
        lo = lo.min(c - radius);
        hi = hi.max(c + radius);
    }
    let pad = 1e-12 * (hi.abs() + lo.abs()) + 1e-300;
    (lo - pad, hi + pad)
}

/// The `j`-th (0-based) eigenvalue as the point where the inertia count steps past `j`.
fn bisect_eigenvalue(a: &SymTridiag, m: &[f64], j: usize, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if a.count_below(mid, m) > j {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * mid.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn m_orthonormalize(x: &mut [f64], basis: &[Vec<f64>], m: &[f64]) -> Result<()> {
    for _ in 0..2 {
        for b in basis {
            let c: f64 = x.iter().zip(b).zip(m).map(|((p, q), w)| p * q * w).sum();
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= c * bi;
            }
        }
    }
    let norm: f64 = x.iter().zip(m).map(|(v, w)| v * v * w).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Numerical("eigenvector collapsed during deflation".into()));
    }
    let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    for v in x.iter_mut() {
        *v *= sign / norm;
    }
    Ok(())
}

/// Ordinary least-squares line `y ≈ a + s·x`; returns `(a, s, r²)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Fit(format!("need at least two paired samples, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - intercept - slope * a;
            e * e
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok((intercept, slope, r2))
}
