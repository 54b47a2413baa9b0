//! Brillouin-zone sweeps, band intervals and spectral gaps.

use crate::edges::BandEdges;
use crate::eigen::EigenError;
use crate::floquet::{BandOperator, OperatorKind, Quasimomentum};
use crate::quantum::OmegaBand;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

/// Default grid resolution for band sweeps.
pub const DEFAULT_RESOLUTION: usize = 64;
/// Intervals closer than this are treated as touching.
pub const GAP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid resolution must be at least 2, got {0}")]
    TooCoarse(usize),
}

/// The `N×N` lattice `k = (-π + 2πa/N, -π + 2πb/N)`, `a, b ∈ [0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneGrid {
    resolution: usize,
}

impl ZoneGrid {
    pub fn new(resolution: usize) -> Result<Self, GridError> {
        if resolution < 2 {
            return Err(GridError::TooCoarse(resolution));
        }
        Ok(ZoneGrid { resolution })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coordinate(&self, a: usize) -> f64 {
        -PI + 2.0 * PI * a as f64 / self.resolution as f64
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.resolution as f64
    }

    pub fn point(&self, a: usize, b: usize) -> Quasimomentum {
        Quasimomentum::new(self.coordinate(a), self.coordinate(b))
    }

    /// Grid index of `-k` for the point at `(a, b)`.
    pub fn negated(&self, a: usize, b: usize) -> (usize, usize) {
        let n = self.resolution;
        ((n - a) % n, (n - b) % n)
    }

    /// Row-major iterator over `(a, b, k)`.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize, Quasimomentum)> + '_ {
        let n = self.resolution;
        (0..n * n).map(move |i| (i / n, i % n, self.point(i / n, i % n)))
    }
}

/// Band function `λ_j` sampled on a [`ZoneGrid`]; `values[a * N + b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSurface {
    /// 1-based band index.
    pub band: usize,
    pub grid: ZoneGrid,
    pub values: Vec<f64>,
}

impl BandSurface {
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.grid.resolution() + b]
    }

    /// Raw `[min, max]` of the samples.
    pub fn sampled_interval(&self) -> BandInterval {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        BandInterval {
            band: self.band,
            lo,
            hi,
        }
    }

    /// Grid points that are no larger (`minima`) or no smaller than their
    /// eight periodic neighbours, sorted best first.
    pub fn local_extrema(&self, minima: bool) -> Vec<(usize, usize, f64)> {
        let n = self.grid.resolution();
        let sign = if minima { 1.0 } else { -1.0 };
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let v = sign * self.at(a, b);
                let mut is_ext = true;
                'nb: for da in [n - 1, 0, 1] {
                    for db in [n - 1, 0, 1] {
                        if da == 0 && db == 0 {
                            continue;
                        }
                        if sign * self.at((a + da) % n, (b + db) % n) < v {
                            is_ext = false;
                            break 'nb;
                        }
                    }
                }
                if is_ext {
                    out.push((a, b, self.at(a, b)));
                }
            }
        }
        out.sort_by(|x, y| (sign * x.2).total_cmp(&(sign * y.2)));
        out
    }

    /// CSV with header `k1,k2,band,value`, row-major, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k1,k2,band,value\n");
        for (a, b, k) in self.grid.points() {
            writeln!(s, "{:.16e},{:.16e},{},{:.16e}", k.k1, k.k2, self.band, self.at(a, b))
                .expect("writing to a String cannot fail");
        }
        s
    }
}

/// Evaluates every band at every grid point. One surface per band.
pub fn sweep(op: &BandOperator, grid: ZoneGrid) -> Result<Vec<BandSurface>, EigenError> {
    let n_bands = op.n_bands();
    let mut surfaces: Vec<BandSurface> = (1..=n_bands)
        .map(|band| BandSurface {
            band,
            grid,
            values: Vec::with_capacity(grid.len()),
        })
        .collect();
    for (_, _, k) in grid.points() {
        let values = op.bands(k)?;
        for (s, v) in surfaces.iter_mut().zip(values) {
            s.values.push(v);
        }
    }
    Ok(surfaces)
}

/// `[lo, hi]` range of one band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandInterval {
    pub band: usize,
    pub lo: f64,
    pub hi: f64,
}

impl BandInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &BandInterval, tol: f64) -> bool {
        self.lo <= other.lo + tol && other.hi <= self.hi + tol
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

/// How far boundary-only and corner-only band edges fall short of the
/// full-zone edges. Relative values are taken against the restricted value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeDiscrepancy {
    pub band: usize,
    pub lower_vs_boundary: f64,
    pub upper_vs_boundary: f64,
    pub lower_vs_boundary_relative: f64,
    pub upper_vs_boundary_relative: f64,
    pub lower_vs_corner: f64,
    pub upper_vs_corner: f64,
}

/// Band intervals over the full zone and over its restrictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub kind: OperatorKind,
    pub bands: Vec<BandInterval>,
    pub gaps: Vec<OpenInterval>,
    /// Quasimomentum restricted to the symmetry lines `k_i ∈ {0, π}`.
    pub boundary_only_intervals: Vec<BandInterval>,
    /// Quasimomentum restricted to `X = {0, π}²`.
    pub corner_only_intervals: Vec<BandInterval>,
    pub discrepancies: Vec<EdgeDiscrepancy>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub quantum_bands: Option<Vec<OmegaBand>>,
}

fn relative(diff: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / reference.abs()
    }
}

/// Combines raw surfaces with refined band edges.
///
/// Reported full-zone intervals are the refined extrema, widened if any raw
/// sample lies outside them, so every sampled eigenvalue is covered.
pub fn spectrum_report(kind: OperatorKind, surfaces: &[BandSurface], edges: &[BandEdges]) -> SpectrumReport {
    let mut bands = Vec::with_capacity(edges.len());
    let mut boundary = Vec::with_capacity(edges.len());
    let mut corner = Vec::with_capacity(edges.len());
    let mut discrepancies = Vec::with_capacity(edges.len());
    for e in edges {
        let mut full = BandInterval {
            band: e.band,
            lo: e.full.min.value,
            hi: e.full.max.value,
        };
        if let Some(s) = surfaces.iter().find(|s| s.band == e.band) {
            let raw = s.sampled_interval();
            full.lo = full.lo.min(raw.lo);
            full.hi = full.hi.max(raw.hi);
        }
        let bnd = BandInterval {
            band: e.band,
            lo: e.boundary.min.value,
            hi: e.boundary.max.value,
        };
        let cor = BandInterval {
            band: e.band,
            lo: e.corner.min.value,
            hi: e.corner.max.value,
        };
        let lower_b = bnd.lo - full.lo;
        let upper_b = full.hi - bnd.hi;
        discrepancies.push(EdgeDiscrepancy {
            band: e.band,
            lower_vs_boundary: lower_b,
            upper_vs_boundary: upper_b,
            lower_vs_boundary_relative: relative(lower_b, bnd.lo),
            upper_vs_boundary_relative: relative(upper_b, bnd.hi),
            lower_vs_corner: cor.lo - full.lo,
            upper_vs_corner: full.hi - cor.hi,
        });
        bands.push(full);
        boundary.push(bnd);
        corner.push(cor);
    }
    let gaps = gaps_between(&bands);
    SpectrumReport {
        kind,
        bands,
        gaps,
        boundary_only_intervals: boundary,
        corner_only_intervals: corner,
        discrepancies,
        quantum_bands: None,
    }
}

/// Maximal open intervals between `min(lo)` and `max(hi)` covered by no band.
pub fn gap_list(report: &SpectrumReport) -> Vec<OpenInterval> {
    gaps_between(&report.bands)
}

pub fn gaps_between(bands: &[BandInterval]) -> Vec<OpenInterval> {
    let mut sorted: Vec<&BandInterval> = bands.iter().collect();
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut gaps = Vec::new();
    let mut reach = match sorted.first() {
        Some(b) => b.hi,
        None => return gaps,
    };
    for b in sorted.iter().skip(1) {
        if b.lo - reach >= GAP_TOL {
            gaps.push(OpenInterval { lo: reach, hi: b.lo });
        }
        reach = reach.max(b.hi);
    }
    gaps
}
