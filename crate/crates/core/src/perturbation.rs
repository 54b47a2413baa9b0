//! Simplicity and genericity of band edges, their stability under a
//! periodic potential `H_g = H_0 + g·diag(V)`, and smoothness of eigenvalue
//! clusters through band crossings.

use crate::dispersion::{sweep, BandSurface, GridError, ZoneGrid};
use crate::edges::{
    band_edges, refine_with, BandEdges, BandExtremum, EdgeError, LocationClass, Which, CLASSIFY_RESOLUTION, TOL_LOC,
};
use crate::eigen::EigenError;
use crate::floquet::{BandOperator, OperatorKind, Quasimomentum};
use crate::graph::PeriodicGraph;
use crate::optimize::NelderMead;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bands closer than this at a witness count as coincident.
pub const COINCIDENCE_GAP: f64 = 1e-6;
/// Smallest accepted `|Hessian eigenvalue|`.
pub const HESS_TOL: f64 = 1e-6;
/// Finite-difference step for Hessians.
pub const HESS_STEP: f64 = 1e-3;
/// Eigenvalues outside a cluster interval must clear it by this much.
pub const CLUSTER_MARGIN: f64 = 1e-6;
/// Refined witnesses must reach the edge value to this accuracy.
const WITNESS_VALUE_TOL: f64 = 1e-7;
/// Grid candidates this far from the edge value are not refined.
const WITNESS_SEED_TOL: f64 = 5e-3;
/// More witnesses than this means the extremum set is not finite.
const MAX_WITNESSES: usize = 16;
const PROBE_RADIUS: f64 = 1e-2;
const PROBE_DIRECTIONS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbationError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Edge(#[from] EdgeError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("potential has {got} entries, graph has {expected} vertices")]
    PotentialLength { expected: usize, got: usize },
    #[error("eigenvalue {eigenvalue} lies within {CLUSTER_MARGIN:e} of the cluster interval [{lo}, {hi}] without being inside it")]
    ClusterMargin { eigenvalue: f64, lo: f64, hi: f64 },
    #[error("interval [{lo}, {hi}] is empty")]
    EmptyInterval { lo: f64, hi: f64 },
}

/// Base operator plus a periodic on-site potential and a coupling ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationFamily {
    pub graph: PeriodicGraph,
    pub kind: OperatorKind,
    pub potential: Vec<f64>,
    pub g_values: Vec<f64>,
}

impl PerturbationFamily {
    pub fn new(
        graph: PeriodicGraph,
        kind: OperatorKind,
        potential: Vec<f64>,
        g_values: Vec<f64>,
    ) -> Result<Self, PerturbationError> {
        if potential.len() != graph.n_vertices() {
            return Err(PerturbationError::PotentialLength {
                expected: graph.n_vertices(),
                got: potential.len(),
            });
        }
        Ok(PerturbationFamily {
            graph,
            kind,
            potential,
            g_values,
        })
    }

    /// `H_0 + g·diag(V)`.
    pub fn operator(&self, g: f64) -> BandOperator {
        let v = self.potential.iter().map(|x| g * x).collect();
        BandOperator::new(self.graph.clone(), self.kind).with_potential(v)
    }

    pub fn max_abs_potential(&self) -> f64 {
        self.potential.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Whether one band edge sits on the corner set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplicityVerdict {
    pub band: usize,
    pub which: Which,
    pub value: f64,
    pub location: Quasimomentum,
    pub location_class: LocationClass,
    pub simple: bool,
}

fn inside(x: f64, interval: (f64, f64)) -> bool {
    interval.0 < x && x < interval.1
}

/// Verdicts for every band edge strictly inside `interval`.
pub fn simplicity_verdicts(edges: &[BandEdges], interval: (f64, f64)) -> Vec<SimplicityVerdict> {
    let mut out = Vec::new();
    for e in edges {
        for which in [Which::Min, Which::Max] {
            let f = e.full.get(which);
            if inside(f.value, interval) {
                out.push(SimplicityVerdict {
                    band: e.band,
                    which,
                    value: f.value,
                    location: f.location,
                    location_class: f.location_class,
                    simple: f.location_class == LocationClass::CornerX,
                });
            }
        }
    }
    out
}

/// Classifies band edges at the default resolution and reports which ones
/// inside `interval` are simple.
pub fn check_simple(op: &BandOperator, interval: (f64, f64)) -> Result<Vec<SimplicityVerdict>, PerturbationError> {
    let edges = crate::edges::classify_band_edges(op, CLASSIFY_RESOLUTION)?;
    Ok(simplicity_verdicts(&edges, interval))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenericityCase {
    SingleEdge,
    TouchingBands,
    Fails,
}

/// Local analysis at one point where the band attains its edge value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub location: Quasimomentum,
    pub case: GenericityCase,
    /// Bands (1-based) within [`COINCIDENCE_GAP`] of the edge value.
    pub coincident_bands: Vec<usize>,
    /// Hessian of the band, or of `D(k)` when two bands touch.
    pub hessian: [[f64; 2]; 2],
    pub hessian_eigenvalues: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityCertificate {
    pub band: usize,
    pub which: Which,
    pub value: f64,
    pub case: GenericityCase,
    /// Hessian at the reported edge location.
    pub hessian: [[f64; 2]; 2],
    pub min_abs_hessian_eigenvalue: f64,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    /// Isolation of witnesses is checked at grid resolution plus a ring of
    /// local probes, not globally.
    pub isolation_checked_to: f64,
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn symmetric_eigenvalues_2x2(h: [[f64; 2]; 2]) -> [f64; 2] {
    let m = 0.5 * (h[0][0] + h[1][1]);
    let r = (0.5 * (h[0][0] - h[1][1])).hypot(h[0][1]);
    [m - r, m + r]
}

/// Fourth-order central-difference Hessian of `f` at `k` with step `h`.
pub fn hessian<E, F>(k: Quasimomentum, h: f64, mut f: F) -> Result<[[f64; 2]; 2], E>
where
    F: FnMut(Quasimomentum) -> Result<f64, E>,
{
    let mut at = |i: i32, j: i32| f(k.offset(i as f64 * h, j as f64 * h));
    let f0 = at(0, 0)?;
    let axis = |p2: f64, p1: f64, m1: f64, m2: f64| (-p2 + 16.0 * p1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h);
    let hxx = axis(at(2, 0)?, at(1, 0)?, at(-1, 0)?, at(-2, 0)?);
    let hyy = axis(at(0, 2)?, at(0, 1)?, at(0, -1)?, at(0, -2)?);
    let near = at(1, 1)? + at(-1, -1)? - at(1, -1)? - at(-1, 1)?;
    let far = at(2, 2)? + at(-2, -2)? - at(2, -2)? - at(-2, 2)?;
    let hxy = (16.0 * near - far) / (48.0 * h * h);
    Ok([[hxx, hxy], [hxy, hyy]])
}

fn coincident(values: &[f64], j: usize) -> Vec<usize> {
    let v = values[j - 1];
    (1..=values.len())
        .filter(|&i| (values[i - 1] - v).abs() < COINCIDENCE_GAP)
        .collect()
}

fn analyse_witness(
    op: &BandOperator,
    j: usize,
    which: Which,
    value: f64,
    k: Quasimomentum,
) -> Result<Witness, EigenError> {
    let values = op.bands(k)?;
    let bands = coincident(&values, j);
    let fail = |hessian, eig, reason: String| Witness {
        location: k,
        case: GenericityCase::Fails,
        coincident_bands: bands.clone(),
        hessian,
        hessian_eigenvalues: eig,
        reason: Some(reason),
    };
    let zero = [[0.0; 2]; 2];
    let s = which.sign();
    match bands.len() {
        1 => {
            let h = hessian(k, HESS_STEP, |q| op.band(q, j))?;
            let eig = symmetric_eigenvalues_2x2(h);
            if eig[0].abs().min(eig[1].abs()) <= HESS_TOL {
                return Ok(fail(h, eig, "degenerate Hessian".into()));
            }
            // A minimum needs a positive definite Hessian, a maximum a negative one.
            if s * eig[0] <= 0.0 || s * eig[1] <= 0.0 {
                return Ok(fail(h, eig, "Hessian is not definite with the sign of the edge".into()));
            }
            for p in 0..PROBE_DIRECTIONS {
                let t = std::f64::consts::TAU * p as f64 / PROBE_DIRECTIONS as f64;
                let q = k.offset(PROBE_RADIUS * t.cos(), PROBE_RADIUS * t.sin());
                if s * (op.band(q, j)? - value) <= 1e-12 {
                    return Ok(fail(h, eig, "band is flat along a ridge through the witness".into()));
                }
            }
            Ok(Witness {
                location: k,
                case: GenericityCase::SingleEdge,
                coincident_bands: bands,
                hessian: h,
                hessian_eigenvalues: eig,
                reason: None,
            })
        }
        2 => {
            let (lo, hi) = (bands[0], bands[1]);
            let product = |q: Quasimomentum| -> Result<f64, EigenError> {
                let b = op.bands(q)?;
                Ok((b[hi - 1] - value) * (b[lo - 1] - value))
            };
            let h = hessian(k, HESS_STEP, product)?;
            let eig = symmetric_eigenvalues_2x2(h);
            for p in 0..PROBE_DIRECTIONS {
                let t = std::f64::consts::TAU * p as f64 / PROBE_DIRECTIONS as f64;
                let b = op.bands(k.offset(PROBE_RADIUS * t.cos(), PROBE_RADIUS * t.sin()))?;
                if b[hi - 1] - b[lo - 1] <= COINCIDENCE_GAP {
                    return Ok(fail(h, eig, "touching bands coincide away from the witness".into()));
                }
            }
            if eig[1] >= -HESS_TOL {
                return Ok(fail(h, eig, "product D(k) has no non-degenerate maximum".into()));
            }
            Ok(Witness {
                location: k,
                case: GenericityCase::TouchingBands,
                coincident_bands: bands,
                hessian: h,
                hessian_eigenvalues: eig,
                reason: None,
            })
        }
        n => Ok(fail(zero, [0.0; 2], format!("{n} bands meet at the witness"))),
    }
}

/// Finds every point where band `edge.band` attains the edge value (up to
/// grid resolution) and certifies each one.
pub fn check_generic(
    op: &BandOperator,
    surface: &BandSurface,
    edge: &BandExtremum,
) -> Result<GenericityCertificate, PerturbationError> {
    let (j, which, value) = (edge.band, edge.which, edge.value);
    let s = which.sign();
    let grid = surface.grid;
    let mut points = vec![edge.location];
    for &(a, b, v) in &surface.local_extrema(which == Which::Min) {
        if s * (v - value) > WITNESS_SEED_TOL {
            break;
        }
        let refined = match refine_with(op, j, grid.point(a, b), which, 0.5 * grid.spacing()) {
            Ok(e) => e,
            Err(EdgeError::NotStationary { extremum, .. }) => *extremum,
            Err(e) => return Err(e.into()),
        };
        if (refined.value - value).abs() > WITNESS_VALUE_TOL {
            continue;
        }
        if points.iter().all(|p| p.distance(refined.location) > TOL_LOC) {
            points.push(refined.location);
        }
        if points.len() > MAX_WITNESSES {
            break;
        }
    }
    let witnesses = points
        .iter()
        .map(|&k| analyse_witness(op, j, which, value, k))
        .collect::<Result<Vec<_>, _>>()?;
    let first = &witnesses[0];
    let mut case = first.case;
    let mut reason = first.reason.clone();
    if points.len() > MAX_WITNESSES {
        case = GenericityCase::Fails;
        reason = Some(format!(
            "more than {MAX_WITNESSES} witnesses: extremum set is not finite"
        ));
    } else if let Some(w) = witnesses.iter().find(|w| w.case == GenericityCase::Fails) {
        case = GenericityCase::Fails;
        reason = w.reason.clone();
    }
    let e = first.hessian_eigenvalues;
    Ok(GenericityCertificate {
        band: j,
        which,
        value,
        case,
        hessian: first.hessian,
        min_abs_hessian_eigenvalue: e[0].abs().min(e[1].abs()),
        witnesses,
        reason,
        isolation_checked_to: grid.spacing(),
    })
}

/// Sweeps at classification resolution and certifies one edge of `edges`.
pub fn check_generic_edge(op: &BandOperator, edge: &BandExtremum) -> Result<GenericityCertificate, PerturbationError> {
    let surfaces = sweep(op, ZoneGrid::new(CLASSIFY_RESOLUTION).expect("resolution is valid"))?;
    check_generic(op, &surfaces[edge.band - 1], edge)
}

/// One edge of the base operator followed to coupling `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeAtCoupling {
    pub band: usize,
    pub which: Which,
    pub value: f64,
    pub location: Quasimomentum,
    pub location_class: LocationClass,
    pub simple: bool,
    pub genericity: GenericityCase,
    /// Every point found where the band attains this edge value.
    pub witnesses: Vec<Quasimomentum>,
    /// Distance between the witness sets at `g` and at the base, up to
    /// `k ↦ -k`.
    pub location_drift: f64,
    pub value_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub g: f64,
    pub edges: Vec<EdgeAtCoupling>,
    pub all_simple: bool,
    pub all_generic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Applicability {
    Applicable,
    /// The base operator is not simple and generic on the interval; the
    /// table is still computed but carries no stability claim.
    Inapplicable {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub interval: (f64, f64),
    pub potential: Vec<f64>,
    pub applicability: Applicability,
    pub base: CouplingReport,
    pub couplings: Vec<CouplingReport>,
    /// First coupling at which a base edge on the corner set leaves it.
    pub simplicity_lost_at: Option<f64>,
}

fn set_distance(a: &[Quasimomentum], b: &[Quasimomentum]) -> f64 {
    a.iter()
        .flat_map(|p| b.iter().map(move |q| p.distance_mod_inversion(*q)))
        .fold(f64::INFINITY, f64::min)
}

fn coupling_report(
    family: &PerturbationFamily,
    g: f64,
    interval: (f64, f64),
    base: Option<&CouplingReport>,
    resolution: usize,
) -> Result<CouplingReport, PerturbationError> {
    let op = family.operator(g);
    let surfaces = sweep(&op, ZoneGrid::new(resolution.max(CLASSIFY_RESOLUTION))?)?;
    let edges = band_edges(&op, &surfaces)?;
    let wanted: Vec<(usize, Which)> = match base {
        Some(b) => b.edges.iter().map(|e| (e.band, e.which)).collect(),
        None => simplicity_verdicts(&edges, interval)
            .iter()
            .map(|v| (v.band, v.which))
            .collect(),
    };
    let mut out = Vec::with_capacity(wanted.len());
    for (band, which) in wanted {
        let f = edges[band - 1].full.get(which);
        let cert = check_generic(&op, &surfaces[band - 1], f)?;
        let witnesses: Vec<Quasimomentum> = cert.witnesses.iter().map(|w| w.location).collect();
        let (location_drift, value_drift) =
            match base.and_then(|b| b.edges.iter().find(|e| e.band == band && e.which == which)) {
                Some(e0) => (set_distance(&witnesses, &e0.witnesses), f.value - e0.value),
                None => (0.0, 0.0),
            };
        out.push(EdgeAtCoupling {
            band,
            which,
            value: f.value,
            location: f.location,
            location_class: f.location_class,
            simple: f.location_class == LocationClass::CornerX,
            genericity: cert.case,
            witnesses,
            location_drift,
            value_drift,
        });
    }
    Ok(CouplingReport {
        g,
        all_simple: out.iter().all(|e| e.simple),
        all_generic: out.iter().all(|e| e.genericity != GenericityCase::Fails),
        edges: out,
    })
}

/// Follows the band edges of the base operator inside `interval` through
/// the coupling ladder of `family`.
pub fn stability_experiment(
    family: &PerturbationFamily,
    interval: (f64, f64),
    resolution: usize,
) -> Result<StabilityReport, PerturbationError> {
    // Written negated so NaN endpoints are rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(interval.0 < interval.1) {
        return Err(PerturbationError::EmptyInterval {
            lo: interval.0,
            hi: interval.1,
        });
    }
    let base = coupling_report(family, 0.0, interval, None, resolution)?;
    let applicability = if !base.all_simple {
        Applicability::Inapplicable {
            reason: "base operator has band edges off the corner set".into(),
        }
    } else if !base.all_generic {
        Applicability::Inapplicable {
            reason: "base operator has non-generic band edges".into(),
        }
    } else {
        Applicability::Applicable
    };
    let mut couplings = Vec::with_capacity(family.g_values.len());
    let mut simplicity_lost_at = None;
    for &g in &family.g_values {
        let r = coupling_report(family, g, interval, Some(&base), resolution)?;
        let lost = r.edges.iter().zip(&base.edges).any(|(e, e0)| e0.simple && !e.simple);
        if lost && simplicity_lost_at.is_none() {
            simplicity_lost_at = Some(g);
        }
        couplings.push(r);
    }
    Ok(StabilityReport {
        interval,
        potential: family.potential.clone(),
        applicability,
        base,
        couplings,
        simplicity_lost_at,
    })
}

/// Sum and product of the eigenvalues at `k` inside the open interval.
pub fn cluster_trace_det(
    op: &BandOperator,
    k: Quasimomentum,
    interval: (f64, f64),
) -> Result<(f64, f64), PerturbationError> {
    cluster_of(&op.bands(k)?, interval)
}

/// Sum and product of the entries of `values` inside the open interval.
/// Entries outside must clear the closed interval by [`CLUSTER_MARGIN`].
pub fn cluster_of(values: &[f64], interval: (f64, f64)) -> Result<(f64, f64), PerturbationError> {
    let (lo, hi) = interval;
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(lo < hi) {
        return Err(PerturbationError::EmptyInterval { lo, hi });
    }
    let mut inner: Vec<f64> = Vec::new();
    for &x in values {
        if lo < x && x < hi {
            inner.push(x);
        } else if x > lo - CLUSTER_MARGIN && x < hi + CLUSTER_MARGIN {
            return Err(PerturbationError::ClusterMargin { eigenvalue: x, lo, hi });
        }
    }
    inner.sort_by(f64::total_cmp);
    Ok((inner.iter().sum(), inner.iter().product()))
}

/// Second differences along a path through a crossing, one row per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingProbeRow {
    pub step: f64,
    pub sum: f64,
    pub product: f64,
    pub lower_branch: f64,
}

/// Point where bands `j` and `j + 1` come closest, searched from `seed`.
pub fn locate_crossing(op: &BandOperator, j: usize, seed: Quasimomentum) -> Result<(Quasimomentum, f64), EigenError> {
    let nm = NelderMead {
        initial_step: 0.05,
        xtol: 1e-12,
        ..NelderMead::default()
    };
    let m = nm.minimize([seed.k1, seed.k2], |x| {
        let b = op.bands(Quasimomentum::new(x[0], x[1]))?;
        Ok(b[j] - b[j - 1])
    })?;
    Ok((Quasimomentum::new(m.x[0], m.x[1]), m.value))
}

/// Second differences `(f(t+h) − 2f(t) + f(t−h)) / h²` along `center + t·dir`
/// for the cluster sum and product and for band `j` alone, with
/// `h = h0 / 2^i`.
pub fn crossing_probe(
    op: &BandOperator,
    j: usize,
    center: Quasimomentum,
    dir: (f64, f64),
    interval: (f64, f64),
    h0: f64,
    halvings: usize,
) -> Result<Vec<CrossingProbeRow>, PerturbationError> {
    let at = |t: f64| -> Result<(f64, f64, f64), PerturbationError> {
        let b = op.bands(center.offset(t * dir.0, t * dir.1))?;
        let (s, p) = cluster_of(&b, interval)?;
        Ok((s, p, b[j - 1]))
    };
    let c = at(0.0)?;
    (0..=halvings)
        .map(|i| {
            let h = h0 / f64::powi(2.0, i as i32);
            let (p, m) = (at(h)?, at(-h)?);
            let d2 = |a: f64, b: f64, c: f64| (a - 2.0 * b + c) / (h * h);
            Ok(CrossingProbeRow {
                step: h,
                sum: d2(p.0, c.0, m.0),
                product: d2(p.1, c.1, m.1),
                lower_branch: d2(p.2, c.2, m.2),
            })
        })
        .collect()
}
