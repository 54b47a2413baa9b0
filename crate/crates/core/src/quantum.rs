//! Quantum graph with unit edge lengths and Kirchhoff conditions.
//!
//! A Bloch eigenfunction of `-d²/dx²` with eigenvalue `ω²`, `sin ω ≠ 0`, is
//! fixed by its vertex values `φ`, and Kirchhoff's condition at each vertex
//! reads `(1/d_v) Σ_{u~v} φ(u) = cos ω φ(v)`. So `ω²` is in the spectrum iff
//! `cos ω` is an eigenvalue of the normalized operator `L(k)` for some `k`.

use crate::dispersion::BandInterval;
use crate::floquet::{inverse_sqrt_degrees, Quasimomentum};
use crate::graph::PeriodicGraph;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// `|sin ω|` at or below this is treated as a Dirichlet resonance.
pub const RESONANCE_TOL: f64 = 1e-9;
/// Endpoints this close to `πℤ` are flagged.
pub const DIRICHLET_TOL: f64 = 1e-12;
/// Slack allowed on `|μ| ≤ 1` for discrete bands.
pub const RANGE_TOL: f64 = 1e-9;
pub const DEFAULT_OMEGA_MAX: f64 = 3.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("band {band} interval [{lo}, {hi}] is not inside [-1, 1]")]
    OutOfRange { band: usize, lo: f64, hi: f64 },
    #[error("omega_max must be positive and finite, got {0}")]
    BadOmegaMax(f64),
    #[error("sin(omega) vanishes at omega = {0} (Dirichlet resonance)")]
    DirichletResonance(f64),
    #[error("edge coordinate {0} is outside [0, 1]")]
    CoordinateOutOfRange(f64),
    #[error("vector has length {got}, graph has {expected} vertices")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Preimage of a discrete band on one branch of `arccos`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaBand {
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub energy_lo: f64,
    pub energy_hi: f64,
    /// `ω ∈ [mπ, (m+1)π]`.
    pub branch: usize,
    /// 1-based index of the discrete band.
    pub parent_band: usize,
    /// An endpoint lies on `πℤ`.
    pub dirichlet_flag: bool,
}

fn near_multiple_of_pi(x: f64) -> bool {
    let r = x / PI;
    (r - r.round()).abs() * PI <= DIRICHLET_TOL
}

/// Maps discrete bands of `L` to `ω`-bands, branch by branch, up to
/// `omega_max`. Output is ordered by branch, then by discrete band.
pub fn omega_bands(discrete: &[BandInterval], omega_max: f64) -> Result<Vec<OmegaBand>, QuantumError> {
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(QuantumError::BadOmegaMax(omega_max));
    }
    for b in discrete {
        if b.lo < -1.0 - RANGE_TOL || b.hi > 1.0 + RANGE_TOL || b.lo > b.hi {
            return Err(QuantumError::OutOfRange {
                band: b.band,
                lo: b.lo,
                hi: b.hi,
            });
        }
    }
    let mut out = Vec::new();
    let mut m = 0usize;
    while (m as f64) * PI < omega_max {
        let base = m as f64 * PI;
        for b in discrete {
            let (lo, hi) = (b.lo.clamp(-1.0, 1.0), b.hi.clamp(-1.0, 1.0));
            // cos is decreasing on even branches and increasing on odd ones.
            let (w_lo, w_hi) = if m.is_multiple_of(2) {
                (base + hi.acos(), base + lo.acos())
            } else {
                (base + (-lo).acos(), base + (-hi).acos())
            };
            if w_lo > omega_max {
                continue;
            }
            let w_hi_clipped = w_hi.min(omega_max);
            out.push(OmegaBand {
                omega_lo: w_lo,
                omega_hi: w_hi_clipped,
                energy_lo: w_lo * w_lo,
                energy_hi: w_hi_clipped * w_hi_clipped,
                branch: m,
                parent_band: b.band,
                dirichlet_flag: near_multiple_of_pi(w_lo) || near_multiple_of_pi(w_hi),
            });
        }
        m += 1;
    }
    Ok(out)
}

fn check_resonance(omega: f64) -> Result<f64, QuantumError> {
    let s = omega.sin();
    if s.abs() <= RESONANCE_TOL {
        return Err(QuantumError::DirichletResonance(omega));
    }
    Ok(s)
}

/// Eigenfunction on an edge with value `phi_v` at `x = 0` and `phi_u` at
/// `x = 1`.
pub fn edge_eigenfunction(phi_u: Complex64, phi_v: Complex64, omega: f64, x: f64) -> Result<Complex64, QuantumError> {
    let s = check_resonance(omega)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(QuantumError::CoordinateOutOfRange(x));
    }
    let (sx, cx) = (omega * x).sin_cos();
    Ok(phi_v * cx + (phi_u - phi_v * omega.cos()) * (sx / s))
}

/// Outgoing derivative at the `x = 0` endpoint:
/// `ω (φ(u) − cos ω φ(v)) / sin ω`.
pub fn edge_derivative_at_start(phi_u: Complex64, phi_v: Complex64, omega: f64) -> Result<Complex64, QuantumError> {
    let s = check_resonance(omega)?;
    Ok((phi_u - phi_v * omega.cos()) * (omega / s))
}

/// Largest Kirchhoff defect over the vertices of one cell, with the size of
/// the terms it was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KirchhoffResidual {
    pub residual: f64,
    pub scale: f64,
}

impl KirchhoffResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual
        } else {
            self.residual / self.scale
        }
    }
}

/// Kirchhoff defect `max_v |Σ_{e~v} ψ'_e(v)|` of the Bloch function built
/// from an eigenvector `psi` of `L(k)`.
///
/// Vertex values are `φ = S⁻¹ψ`; a neighbour reached through shift `s`
/// carries the Bloch factor `e^{ik·s}`.
pub fn kirchhoff_residual(
    graph: &PeriodicGraph,
    k: Quasimomentum,
    omega: f64,
    psi: &[Complex64],
) -> Result<KirchhoffResidual, QuantumError> {
    let n = graph.n_vertices();
    if psi.len() != n {
        return Err(QuantumError::DimensionMismatch {
            expected: n,
            got: psi.len(),
        });
    }
    check_resonance(omega)?;
    let inv = inverse_sqrt_degrees(graph);
    let phi: Vec<Complex64> = psi.iter().zip(&inv).map(|(p, s)| p * s).collect();
    let mut sums = vec![Complex64::new(0.0, 0.0); n];
    let mut scale: f64 = 0.0;
    for e in graph.edges() {
        let (u, v) = (e.u.index(), e.v.index());
        let ph = k.phase(e.shift);
        let at_u = edge_derivative_at_start(ph * phi[v], phi[u], omega)?;
        let at_v = edge_derivative_at_start(ph.conj() * phi[u], phi[v], omega)?;
        scale = scale.max(at_u.norm()).max(at_v.norm());
        sums[u] += at_u;
        sums[v] += at_v;
    }
    let residual = sums.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(KirchhoffResidual { residual, scale })
}
