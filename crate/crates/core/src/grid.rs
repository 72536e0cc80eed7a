//! Radial discretization of the ball `B_R ⊂ R^n` (or the interval `(0, R)` when `n = 1`).
//!
//! Nodes run from `r_0 = 0` to `r_N = R`. Quadrature weights are the integrals of the
//! piecewise-linear hat functions against the radial measure `ω_{n-1} r^{n-1} dr`, so
//! `Σ w_i f(r_i)` is exact for every piecewise-linear `f`.
//!
//! The discrete Laplacian is `Δ_h = -W^{-1} K` with `W = diag(w)` and `K` a symmetric
//! tridiagonal stiffness matrix. For `n ≥ 2` the edge conductances are chosen so that
//! `Δ_h r² = 2n` holds exactly at every non-Dirichlet node; at the center this is the
//! symmetric limit `n·f''(0)`. For `n = 1` both interval ends carry Dirichlet data and
//! `K` is the usual three-point stencil.

use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of intervals accepted by [`RadialGrid::build`].
pub const MIN_INTERVALS: usize = 16;

/// Surface area `|S^{m}|` of the unit sphere in `R^{m+1}`.
pub fn sphere_area(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * sphere_area(m - 2),
    }
}

/// Volume of the ball of radius `radius` in `R^dim` (interval length when `dim = 1`).
pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    if dim == 1 {
        radius
    } else {
        sphere_area(dim - 1) * radius.powi(dim as i32) / dim as f64
    }
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    dim: usize,
    radius: f64,
    stretch: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Conductance of edge `(i, i+1)`.
    edges: Vec<f64>,
}

impl RadialGrid {
    /// Build a grid with `intervals + 1` nodes. `stretch > 0` grades the nodes toward the
    /// Dirichlet boundary (both ends for `n = 1`); `stretch = 0` is uniform.
    pub fn build(dim: usize, radius: f64, intervals: usize, stretch: f64) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::config("n", "dimension must be at least 1"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::config("R", format!("radius must be positive, got {radius}")));
        }
        if intervals < MIN_INTERVALS {
            return Err(Error::config(
                "N",
                format!("need at least {MIN_INTERVALS} intervals, got {intervals}"),
            ));
        }
        if !(stretch >= 0.0) || !stretch.is_finite() {
            return Err(Error::config("stretch", format!("must be finite and >= 0, got {stretch}")));
        }

        let nodes = graded_nodes(dim, radius, intervals, stretch);
        let weights = hat_weights(dim, &nodes);
        let edges = edge_conductances(dim, &nodes, &weights);
        Ok(Arc::new(RadialGrid {
            dim,
            radius,
            stretch,
            nodes,
            weights,
            edges,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Edge conductances `a_{i+1/2}`; `K_{i,i+1} = -a_{i+1/2}`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Number of nodes (`intervals + 1`).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Nodes that are solved for; Dirichlet nodes are excluded.
    pub fn unknowns(&self) -> Range<usize> {
        let last = self.nodes.len() - 1;
        if self.dim == 1 {
            1..last
        } else {
            0..last
        }
    }

    pub fn is_dirichlet(&self, i: usize) -> bool {
        i == self.nodes.len() - 1 || (self.dim == 1 && i == 0)
    }

    /// `d(x) = dist(x, ∂Ω)` at node `i`.
    pub fn distance_to_boundary(&self, i: usize) -> f64 {
        let r = self.nodes[i];
        if self.dim == 1 {
            r.min(self.radius - r)
        } else {
            self.radius - r
        }
    }

    /// Quadrature `Σ w_i f_i`, summed in node order.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Weighted inner product `Σ w_i f_i g_i`.
    pub fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// `f^T K f`, the discrete Dirichlet integral `∫ |∇f|²`.
    pub fn dirichlet_energy(&self, f: &[f64]) -> f64 {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let d = f[i + 1] - f[i];
                a * d * d
            })
            .sum()
    }

    /// `f^T K g`.
    pub fn dirichlet_form(&self, f: &[f64], g: &[f64]) -> f64 {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, a)| a * (f[i + 1] - f[i]) * (g[i + 1] - g[i]))
            .sum()
    }

    /// `K f` over all nodes (rows at Dirichlet nodes included for completeness).
    pub fn stiffness_apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, a) in self.edges.iter().enumerate() {
            let flux = a * (f[i + 1] - f[i]);
            out[i] -= flux;
            out[i + 1] += flux;
        }
        out
    }

    /// Diagonal of `K`.
    pub fn stiffness_diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.len()];
        for (i, a) in self.edges.iter().enumerate() {
            d[i] += a;
            d[i + 1] += a;
        }
        d
    }

    /// Discrete Laplacian. Non-Dirichlet rows use `-(K f)_i / w_i`; Dirichlet nodes use a
    /// one-sided quadratic fit and are meant for display only.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let kf = self.stiffness_apply(f);
        let mut out: Vec<f64> = kf
            .iter()
            .zip(&self.weights)
            .map(|(k, w)| -k / w)
            .collect();
        let last = self.len() - 1;
        out[last] = self.one_sided_laplacian(f, last);
        if self.dim == 1 {
            out[0] = self.one_sided_laplacian(f, 0);
        }
        out
    }

    fn one_sided_laplacian(&self, f: &[f64], at: usize) -> f64 {
        let idx: [usize; 3] = if at == 0 { [0, 1, 2] } else { [at, at - 1, at - 2] };
        let x = idx.map(|i| self.nodes[i]);
        let y = idx.map(|i| f[i]);
        let (x0, x1, x2) = (x[0], x[1], x[2]);
        let d0 = (x0 - x1) * (x0 - x2);
        let d1 = (x1 - x0) * (x1 - x2);
        let d2 = (x2 - x0) * (x2 - x1);
        let second = 2.0 * (y[0] / d0 + y[1] / d1 + y[2] / d2);
        if self.dim == 1 {
            return second;
        }
        let first = y[0] * ((x0 - x1) + (x0 - x2)) / d0
            + y[1] * (x0 - x2) / d1
            + y[2] * (x0 - x1) / d2;
        second + (self.dim as f64 - 1.0) / x0 * first
    }
}

fn grading(s: f64, stretch: f64) -> f64 {
    if stretch == 0.0 {
        s
    } else {
        1.0 - (stretch * (1.0 - s)).exp_m1() / stretch.exp_m1()
    }
}

fn graded_nodes(dim: usize, radius: f64, intervals: usize, stretch: f64) -> Vec<f64> {
    let n = intervals as f64;
    let mut nodes: Vec<f64> = (0..=intervals)
        .map(|i| {
            let s = i as f64 / n;
            if dim == 1 {
                let x = 2.0 * s - 1.0;
                let g = x.signum() * grading(x.abs(), stretch);
                0.5 * radius * (1.0 + g)
            } else {
                radius * grading(s, stretch)
            }
        })
        .collect();
    nodes[0] = 0.0;
    nodes[intervals] = radius;
    nodes
}

/// Integrals of the hat functions against `ω r^{n-1} dr`, expanded about the left node
/// of each element so every term is positive.
fn hat_weights(dim: usize, nodes: &[f64]) -> Vec<f64> {
    let omega = if dim == 1 { 1.0 } else { sphere_area(dim - 1) };
    let m = dim - 1;
    let mut binom = vec![1.0; m + 1];
    for k in 1..=m {
        binom[k] = binom[k - 1] * (m - k + 1) as f64 / k as f64;
    }
    let mut w = vec![0.0; nodes.len()];
    for e in 0..nodes.len() - 1 {
        let a = nodes[e];
        let h = nodes[e + 1] - a;
        let mut left = 0.0;
        let mut right = 0.0;
        for (k, c) in binom.iter().enumerate() {
            let base = c * a.powi((m - k) as i32) * h.powi(k as i32 + 1);
            left += base / ((k + 1) * (k + 2)) as f64;
            right += base / (k + 2) as f64;
        }
        w[e] += omega * left;
        w[e + 1] += omega * right;
    }
    w
}

fn edge_conductances(dim: usize, nodes: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut edges = Vec::with_capacity(nodes.len() - 1);
    if dim == 1 {
        for e in 0..nodes.len() - 1 {
            edges.push(1.0 / (nodes[e + 1] - nodes[e]));
        }
        return edges;
    }
    let two_n = 2.0 * dim as f64;
    let mut enclosed = 0.0;
    for e in 0..nodes.len() - 1 {
        enclosed += weights[e];
        let gap = (nodes[e + 1] - nodes[e]) * (nodes[e + 1] + nodes[e]);
        edges.push(two_n * enclosed / gap);
    }
    edges
}

/// What a field represents; controls the boundary check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    OriginalU,
    RescaledV,
    Stationary,
    Generic,
}

impl FieldKind {
    fn requires_dirichlet(self) -> bool {
        !matches!(self, FieldKind::Generic)
    }
}

/// Nodal values on a shared grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    kind: FieldKind,
}

impl Field {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, kind: FieldKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Contract(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Contract(format!("non-finite value at node {i}")));
        }
        if kind.requires_dirichlet() {
            for i in 0..grid.len() {
                if grid.is_dirichlet(i) && values[i] != 0.0 {
                    return Err(Error::Contract(format!(
                        "{kind:?} field must vanish on the boundary (node {i} = {})",
                        values[i]
                    )));
                }
            }
        }
        Ok(Field { grid, values, kind })
    }

    /// Sample `f(r)` at every node; Dirichlet nodes are set to zero unless `kind` is generic.
    pub fn from_fn(grid: Arc<RadialGrid>, kind: FieldKind, f: impl Fn(f64) -> f64) -> Self {
        let values = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                if kind.requires_dirichlet() && grid.is_dirichlet(i) {
                    0.0
                } else {
                    f(r)
                }
            })
            .collect();
        Field { grid, values, kind }
    }

    pub fn zeros(grid: Arc<RadialGrid>, kind: FieldKind) -> Self {
        let values = vec![0.0; grid.len()];
        Field { grid, values, kind }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn with_kind(mut self, kind: FieldKind) -> Result<Self> {
        self.kind = kind;
        Field::new(self.grid, self.values, kind)
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            kind: self.kind,
        }
    }

    /// Largest absolute value.
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn integrate(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// `∫ |f|^q`.
    pub fn lq_power(&self, q: f64) -> f64 {
        let pow: Vec<f64> = self.values.iter().map(|v| v.abs().powf(q)).collect();
        self.grid.integrate(&pow)
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.nodes() == other.grid.nodes()
    }
}

/// `Σ w_i f_i`.
pub fn integrate(f: &Field) -> f64 {
    f.integrate()
}

/// Discrete radial Laplacian `f'' + (n-1)/r f'` as a generic field.
pub fn laplacian_radial(f: &Field) -> Result<Field> {
    if f.grid.len() < 3 {
        return Err(Error::Contract("laplacian needs at least 3 nodes".into()));
    }
    let values = f.grid.laplacian(&f.values);
    Field::new(f.grid.clone(), values, FieldKind::Generic)
}
