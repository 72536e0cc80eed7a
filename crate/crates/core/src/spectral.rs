//! Discrete Dirichlet spectrum, the weighted spectrum linearized at a stationary state,
//! the kernel test and the projection `Π`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, FieldKind, RadialGrid};
use crate::linalg::{generalized_eigen, SymTridiag};

/// Default number of weighted eigenpairs.
pub const DEFAULT_MODES: usize = 12;

/// Smallest eigenvalue of the discrete Dirichlet Laplacian `K x = λ W x`.
pub fn dirichlet_lambda1(grid: &RadialGrid) -> Result<f64> {
    let k = SymTridiag::stiffness(grid);
    let w = grid.weights()[grid.unknowns()].to_vec();
    Ok(generalized_eigen(&k, &w, 1)?.values[0])
}

/// First Dirichlet eigenpair with the eigenfield positive and scaled to unit sup.
pub fn dirichlet_mode1(grid: &std::sync::Arc<RadialGrid>) -> Result<(f64, Field)> {
    let k = SymTridiag::stiffness(grid);
    let w = grid.weights()[grid.unknowns()].to_vec();
    let pairs = generalized_eigen(&k, &w, 1)?;
    let mut values = vec![0.0; grid.len()];
    for (slot, x) in values[grid.unknowns()].iter_mut().zip(&pairs.vectors[0]) {
        *slot = *x;
    }
    let peak = values.iter().copied().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
    for x in values.iter_mut() {
        *x /= peak;
    }
    Ok((pairs.values[0], Field::new(grid.clone(), values, FieldKind::Generic)?))
}

/// Eigenpairs of `−Δφ − bφ = μ v^{p−1} φ` with weighted-orthonormal eigenfields.
#[derive(Debug, Clone)]
pub struct WeightedSpectrum {
    pub mu: Vec<f64>,
    pub phi: Vec<Field>,
    /// Number of eigenvalues `≤ p_lin`.
    pub l_count: usize,
    /// `v^{p−1}` on the grid.
    pub weight: Field,
    pub p_lin: f64,
}

impl WeightedSpectrum {
    /// `∫ weight·f·g`.
    pub fn weighted_dot(&self, f: &[f64], g: &[f64]) -> f64 {
        let grid = self.weight.grid();
        let wv = self.weight.values();
        grid.weights()
            .iter()
            .enumerate()
            .map(|(i, w)| w * wv[i] * f[i] * g[i])
            .sum()
    }

    /// Largest `|⟨φ_i, φ_j⟩_weight − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.phi.iter().enumerate() {
            for (j, b) in self.phi.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.weighted_dot(a.values(), b.values()) - target).abs());
            }
        }
        worst
    }

    /// Weighted cosine similarity between `φ_1` and `f`.
    pub fn cosine_with_first(&self, f: &Field) -> f64 {
        let phi = self.phi[0].values();
        let fv = f.values();
        let num = self.weighted_dot(phi, fv);
        num / (self.weighted_dot(phi, phi) * self.weighted_dot(fv, fv)).sqrt()
    }

    pub fn kernel_condition(&self, tol: f64) -> KernelVerdict {
        kernel_condition(&self.mu, self.p_lin, tol)
    }
}

/// Weighted spectrum at the stationary state `v_inf` for `Δv + bv + v^p = 0`.
pub fn weighted_spectrum(v_inf: &Field, p: f64, b: f64, modes: usize) -> Result<WeightedSpectrum> {
    let grid = v_inf.grid().clone();
    let unknowns = grid.unknowns();
    let vals = v_inf.values();
    if let Some(i) = unknowns.clone().find(|&i| !(vals[i] > 0.0)) {
        return Err(Error::Contract(format!(
            "weight v^(p-1) must be positive at interior node {i} (v = {})",
            vals[i]
        )));
    }
    let lambda1 = dirichlet_lambda1(&grid)?;
    if !(b < lambda1) {
        return Err(Error::Domain(format!("b = {b} is not below lambda_1 = {lambda1}")));
    }
    let weight_vals: Vec<f64> = vals.iter().map(|v| v.max(0.0).powf(p - 1.0)).collect();
    let w = grid.weights();
    let mass: Vec<f64> = unknowns.clone().map(|i| w[i] * weight_vals[i]).collect();
    let w_int: Vec<f64> = w[unknowns.clone()].to_vec();
    let a = SymTridiag::stiffness(&grid).shifted(-b, &w_int);
    let modes = modes.min(unknowns.len());
    let pairs = generalized_eigen(&a, &mass, modes)?;

    let mut phi = Vec::with_capacity(modes);
    for vec in pairs.vectors {
        let mut full = vec![0.0; grid.len()];
        full[unknowns.clone()].copy_from_slice(&vec);
        phi.push(Field::new(grid.clone(), full, FieldKind::Generic)?);
    }
    let l_count = pairs.values.iter().filter(|m| **m <= p).count();
    Ok(WeightedSpectrum {
        mu: pairs.values,
        phi,
        l_count,
        weight: Field::new(grid, weight_vals, FieldKind::Generic)?,
        p_lin: p,
    })
}

/// `Π f = f − Σ_{i≤L} (∫ f φ_i) v^{p−1} φ_i`.
pub fn project_pi(f: &Field, spec: &WeightedSpectrum) -> Result<Field> {
    if !f.same_grid(&spec.weight) {
        return Err(Error::Contract("field and spectrum live on different grids".into()));
    }
    let grid = f.grid();
    let wv = spec.weight.values();
    let mut out = f.values().to_vec();
    for phi in spec.phi.iter().take(spec.l_count) {
        let c = grid.dot(f.values(), phi.values());
        for (i, o) in out.iter_mut().enumerate() {
            *o -= c * wv[i] * phi.values()[i];
        }
    }
    Field::new(grid.clone(), out, FieldKind::Generic)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Nondegenerate,
    DegenerateSuspect,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelVerdict {
    pub verdict: Verdict,
    /// `min_l |μ_l − p_lin|`.
    pub gap: f64,
    pub p_lin: f64,
    pub tol: f64,
}

/// Classify a computed spectrum against the linearization exponent `p_lin`.
pub fn kernel_condition(mu: &[f64], p_lin: f64, tol: f64) -> KernelVerdict {
    let gap = mu.iter().map(|m| (m - p_lin).abs()).fold(f64::INFINITY, f64::min);
    let resolved = mu.iter().any(|m| *m > p_lin + tol);
    let verdict = if gap <= tol {
        Verdict::DegenerateSuspect
    } else if !resolved {
        Verdict::Inconclusive
    } else {
        Verdict::Nondegenerate
    };
    KernelVerdict { verdict, gap, p_lin, tol }
}

/// Default kernel tolerance `0.02·p_lin`.
pub fn default_kernel_tol(p_lin: f64) -> f64 {
    0.02 * p_lin
}
