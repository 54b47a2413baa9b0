//! Floquet matrices of periodic graph operators.
//!
//! For a quasimomentum `k`, a Bloch function on the periodic graph is fixed
//! by its values on one cell, and the adjacency operator restricts to the
//! `n×n` Hermitian matrix `Δ(k)`: an edge `(u, v, s)` contributes
//! `e^{ik·s}` at `(u, v)` and the conjugate at `(v, u)`. The normalized
//! operator is `L(k) = S⁻¹Δ(k)S⁻¹` with `S = diag(√d_v)`.

use crate::eigen::{self, EigenError, EigenResult};
use crate::graph::PeriodicGraph;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Maps an angle into `(-π, π]`.
pub fn fold_angle(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Point of the Brillouin zone `[-π, π]²`, stored as given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quasimomentum {
    pub k1: f64,
    pub k2: f64,
}

impl Quasimomentum {
    pub const ZERO: Quasimomentum = Quasimomentum { k1: 0.0, k2: 0.0 };

    pub fn new(k1: f64, k2: f64) -> Self {
        Quasimomentum { k1, k2 }
    }

    /// Representative in `(-π, π]²`.
    pub fn folded(self) -> Self {
        Quasimomentum::new(fold_angle(self.k1), fold_angle(self.k2))
    }

    pub fn offset(self, d1: f64, d2: f64) -> Self {
        Quasimomentum::new(self.k1 + d1, self.k2 + d2)
    }

    /// Euclidean distance on the torus `ℝ²/2πℤ²`.
    pub fn distance(self, other: Quasimomentum) -> f64 {
        fold_angle(self.k1 - other.k1).hypot(fold_angle(self.k2 - other.k2))
    }

    /// Distance to the nearer of `other` and `-other`; band functions are
    /// even, so extrema come in such pairs.
    pub fn distance_mod_inversion(self, other: Quasimomentum) -> f64 {
        self.distance(other).min(self.distance(-other))
    }

    pub fn phase(self, shift: [i64; 2]) -> Complex64 {
        let arg = self.k1 * shift[0] as f64 + self.k2 * shift[1] as f64;
        Complex64::from_polar(1.0, arg)
    }
}

impl std::ops::Neg for Quasimomentum {
    type Output = Self;

    fn neg(self) -> Self {
        Quasimomentum::new(-self.k1, -self.k2)
    }
}

impl fmt::Display for Quasimomentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.k1, self.k2)
    }
}

/// Which periodic operator a Floquet matrix restricts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    /// `(Δf)(v) = Σ_{u~v} f(u)`
    #[serde(rename = "delta")]
    Adjacency,
    /// `(Lf)(v) = d_v^{-1/2} Σ_{u~v} d_u^{-1/2} f(u)`
    #[serde(rename = "laplace")]
    NormalizedLaplacian,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Adjacency => "delta",
            OperatorKind::NormalizedLaplacian => "laplace",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense Hermitian matrix at a fixed quasimomentum, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    kind: OperatorKind,
}

impl FloquetMatrix {
    pub fn from_entries(dim: usize, entries: Vec<Complex64>, kind: OperatorKind) -> Self {
        assert_eq!(entries.len(), dim * dim, "entry count must be dim²");
        FloquetMatrix { dim, entries, kind }
    }

    pub fn zeros(dim: usize, kind: OperatorKind) -> Self {
        FloquetMatrix::from_entries(dim, vec![Complex64::new(0.0, 0.0); dim * dim], kind)
    }

    pub fn identity(dim: usize, kind: OperatorKind) -> Self {
        let mut m = FloquetMatrix::zeros(dim, kind);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// Adds a real diagonal; Hermiticity is preserved exactly.
    pub fn add_diagonal(&mut self, diag: &[f64]) {
        assert_eq!(diag.len(), self.dim);
        for (i, d) in diag.iter().enumerate() {
            self.entries[i * self.dim + i].re += d;
        }
    }

    /// `D M D` for a real diagonal `D`.
    pub fn scaled(&self, diag: &[f64]) -> FloquetMatrix {
        let n = self.dim;
        let entries = (0..n * n)
            .map(|idx| self.entries[idx] * diag[idx / n] * diag[idx % n])
            .collect();
        FloquetMatrix::from_entries(n, entries, self.kind)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `‖Mx − λx‖₂`.
    pub fn residual(&self, lambda: f64, x: &[Complex64]) -> f64 {
        self.mul_vec(x)
            .iter()
            .zip(x)
            .map(|(mx, xi)| (mx - xi * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `det(M − λI)` by LU factorization with partial pivoting.
    pub fn shifted_determinant(&self, lambda: f64) -> Complex64 {
        let n = self.dim;
        let mut a = self.entries.clone();
        for i in 0..n {
            a[i * n + i] -= lambda;
        }
        lu_determinant(&mut a, n)
    }
}

/// Determinant of a dense complex matrix, destroying its contents.
pub fn lu_determinant(a: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
            .expect("non-empty range");
        if a[pivot * n + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in (col + 1)..n {
            let factor = a[row * n + col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[row * n + j] -= factor * v;
            }
        }
    }
    det
}

/// `S⁻¹ = diag(1/√d_v)`.
pub fn inverse_sqrt_degrees(graph: &PeriodicGraph) -> Vec<f64> {
    graph.degrees().iter().map(|&d| 1.0 / (d as f64).sqrt()).collect()
}

/// Builds `Δ(k)` or `L(k)` for `graph`.
pub fn assemble(graph: &PeriodicGraph, k: Quasimomentum, kind: OperatorKind) -> FloquetMatrix {
    let n = graph.n_vertices();
    let mut m = FloquetMatrix::zeros(n, kind);
    for e in graph.edges() {
        let (u, v) = (e.u.index(), e.v.index());
        let z = k.phase(e.shift);
        m.entries[u * n + v] += z;
        m.entries[v * n + u] += z.conj();
    }
    if kind == OperatorKind::NormalizedLaplacian {
        let deg = graph.degrees();
        for u in 0..n {
            for v in 0..n {
                let s = ((deg[u] * deg[v]) as f64).sqrt();
                m.entries[u * n + v] /= s;
            }
        }
    }
    m
}

/// A band problem: a graph operator plus an optional real on-site potential.
///
/// The potential is added to the diagonal of the Floquet matrix, giving
/// `Δ(k) + diag(V)` or `L(k) + diag(V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandOperator {
    graph: PeriodicGraph,
    kind: OperatorKind,
    potential: Option<Vec<f64>>,
}

impl BandOperator {
    pub fn new(graph: PeriodicGraph, kind: OperatorKind) -> Self {
        BandOperator {
            graph,
            kind,
            potential: None,
        }
    }

    /// # Panics
    /// If `potential` does not have one entry per vertex.
    pub fn with_potential(mut self, potential: Vec<f64>) -> Self {
        assert_eq!(potential.len(), self.graph.n_vertices());
        self.potential = Some(potential);
        self
    }

    pub fn graph(&self) -> &PeriodicGraph {
        &self.graph
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn potential(&self) -> Option<&[f64]> {
        self.potential.as_deref()
    }

    pub fn n_bands(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn matrix(&self, k: Quasimomentum) -> FloquetMatrix {
        let mut m = assemble(&self.graph, k, self.kind);
        if let Some(v) = &self.potential {
            m.add_diagonal(v);
        }
        m
    }

    /// Sorted eigenvalues at `k` (fast route, used for sweeps and searches).
    pub fn bands(&self, k: Quasimomentum) -> Result<Vec<f64>, EigenError> {
        eigen::eigenvalues_fast(&self.matrix(k))
    }

    /// Sorted eigenvalues at `k` through the Jacobi route.
    pub fn bands_jacobi(&self, k: Quasimomentum) -> Result<Vec<f64>, EigenError> {
        eigen::eigenvalues(&self.matrix(k))
    }

    pub fn eigen(&self, k: Quasimomentum) -> Result<EigenResult, EigenError> {
        eigen::eigensolve(&self.matrix(k), true)
    }

    /// Band `j` (1-based) at `k`.
    pub fn band(&self, k: Quasimomentum, j: usize) -> Result<f64, EigenError> {
        Ok(self.bands(k)?[j - 1])
    }
}

/// Closed-form characteristic polynomial `det(λI − M(k))` of graph Γ.
///
/// Independent of [`assemble`] and the eigensolver, so it can serve as an
/// oracle for both.
pub fn char_poly_gamma(lambda: f64, k: Quasimomentum, kind: OperatorKind) -> f64 {
    let (c1, c2) = (k.k1.cos(), k.k2.cos());
    let cp = (k.k1 + k.k2).cos();
    let cm = (k.k1 - k.k2).cos();
    let l = lambda;
    match kind {
        OperatorKind::Adjacency => {
            l.powi(5) - 8.0 * l.powi(3) - (2.0 * c1 + 4.0 * c2 + 2.0) * l * l
                + (8.0 - 2.0 * cp - 4.0 * c1 - 2.0 * c2) * l
                - 2.0 * cp
                - 2.0 * cm
                + 4.0 * c2
        }
        OperatorKind::NormalizedLaplacian => {
            l.powi(5) - 7.0 / 9.0 * l.powi(3) - (1.0 / 18.0 + c2 / 9.0 + c1 / 18.0) * l * l
                + (13.0 / 162.0 - 7.0 / 162.0 * c1 - c2 / 54.0 - cp / 54.0) * l
                + c2 / 81.0
                - cm / 162.0
                - cp / 162.0
        }
    }
}
