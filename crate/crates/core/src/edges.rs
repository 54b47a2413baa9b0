//! Band edges: extrema of band functions over the full zone, the symmetry
//! lines and the corner set, with their location class.
//!
//! The symmetry lines are `k₁ ∈ {0, π}` and `k₂ ∈ {0, π}`. They are the
//! boundary of the reduced zone `[0, π]²`, which by evenness carries every
//! value of every band. The corner set `X = {0, π}²` is the set of points
//! fixed by `k ↦ -k`.

use crate::dispersion::{sweep, BandSurface, GridError, ZoneGrid};
use crate::eigen::EigenError;
use crate::floquet::{fold_angle, BandOperator, Quasimomentum};
use crate::optimize::{golden_section, NelderMead};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use thiserror::Error;

/// Distance below which a location counts as lying on a line or corner.
pub const TOL_LOC: f64 = 1e-4;
/// Samples per symmetry line.
pub const LINE_SAMPLES: usize = 4096;
/// Minimum grid resolution used for classification.
pub const CLASSIFY_RESOLUTION: usize = 256;
/// Candidates whose values differ by less than this are ties.
pub const TIE_TOL: f64 = 1e-10;
/// Neighbouring bands closer than this mark a crossing.
pub const CROSSING_GAP: f64 = 1e-8;
/// Gradient norm accepted as stationary.
pub const GRADIENT_TOL: f64 = 1e-6;
const GRADIENT_STEP: f64 = 1e-6;
const SEEDS_PER_EDGE: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdgeError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("band {band} out of range 1..={n_bands}")]
    BandOutOfRange { band: usize, n_bands: usize },
    #[error("refined {} of band {} at {} is not stationary (|grad| = {gradient_norm:.3e})", .extremum.which, .extremum.band, .extremum.location)]
    NotStationary {
        extremum: Box<BandExtremum>,
        gradient_norm: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LocationClass {
    CornerX,
    BoundaryXiOnly,
    Interior,
}

impl fmt::Display for LocationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocationClass::CornerX => "corner",
            LocationClass::BoundaryXiOnly => "boundary",
            LocationClass::Interior => "interior",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Min,
    Max,
}

impl Which {
    /// `+1` for minima, `-1` for maxima.
    pub fn sign(self) -> f64 {
        match self {
            Which::Min => 1.0,
            Which::Max => -1.0,
        }
    }
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::Min => "min",
            Which::Max => "max",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    FullZone,
    Boundary,
    CornerSet,
}

/// Per-coordinate distance to the nearest of `{0, π}` on the circle.
fn line_distances(k: Quasimomentum) -> (f64, f64) {
    let d = |x: f64| {
        let a = fold_angle(x).abs();
        a.min(PI - a)
    };
    (d(k.k1), d(k.k2))
}

/// Distance from `k` to the corner set `X`.
pub fn distance_to_corners(k: Quasimomentum) -> f64 {
    let (a, b) = line_distances(k);
    a.hypot(b)
}

/// Distance from `k` to the union of symmetry lines.
pub fn distance_to_lines(k: Quasimomentum) -> f64 {
    let (a, b) = line_distances(k);
    a.min(b)
}

pub fn classify_location(k: Quasimomentum) -> LocationClass {
    if distance_to_corners(k) < TOL_LOC {
        LocationClass::CornerX
    } else if distance_to_lines(k) < TOL_LOC {
        LocationClass::BoundaryXiOnly
    } else {
        LocationClass::Interior
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandExtremum {
    /// 1-based band index.
    pub band: usize,
    pub which: Which,
    pub value: f64,
    /// Folded into `(-π, π]²`.
    pub location: Quasimomentum,
    pub location_class: LocationClass,
    pub domain: Domain,
    /// A neighbouring band comes within [`CROSSING_GAP`] at the location.
    pub at_crossing: bool,
}

impl BandExtremum {
    fn new(band: usize, which: Which, value: f64, k: Quasimomentum, domain: Domain) -> Self {
        let location = k.folded();
        BandExtremum {
            band,
            which,
            value,
            location,
            location_class: classify_location(location),
            domain,
            at_crossing: false,
        }
    }

    /// Whether `self` is a strictly better representative than `other`.
    /// Near-equal values prefer corners, then lines, then the point nearer
    /// its corner or line, then the lexicographically smaller location.
    fn beats(&self, other: &BandExtremum) -> bool {
        let s = self.which.sign();
        let d = s * (self.value - other.value);
        if d.abs() > TIE_TOL {
            return d < 0.0;
        }
        let key = |e: &BandExtremum| {
            let off = match e.location_class {
                LocationClass::CornerX => distance_to_corners(e.location),
                LocationClass::BoundaryXiOnly => distance_to_lines(e.location),
                LocationClass::Interior => 0.0,
            };
            (e.location_class, off, e.location.k1, e.location.k2)
        };
        let (a, b) = (key(self), key(other));
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
            .is_lt()
    }
}

/// Picks the preferred candidate and reports the extreme value over all of
/// them, so restricted domains never overshoot the full one.
fn select(candidates: &[BandExtremum], domain: Domain) -> Option<BandExtremum> {
    let mut best = *candidates.first()?;
    for c in &candidates[1..] {
        if c.beats(&best) {
            best = *c;
        }
    }
    let s = best.which.sign();
    for c in candidates {
        if s * c.value < s * best.value {
            best.value = c.value;
        }
    }
    best.domain = domain;
    Some(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremumPair {
    pub min: BandExtremum,
    pub max: BandExtremum,
}

impl ExtremumPair {
    pub fn get(&self, which: Which) -> &BandExtremum {
        match which {
            Which::Min => &self.min,
            Which::Max => &self.max,
        }
    }
}

/// Extrema of one band over the three nested domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    pub band: usize,
    pub full: ExtremumPair,
    pub boundary: ExtremumPair,
    pub corner: ExtremumPair,
}

fn check_band(op: &BandOperator, j: usize) -> Result<(), EdgeError> {
    if j == 0 || j > op.n_bands() {
        return Err(EdgeError::BandOutOfRange {
            band: j,
            n_bands: op.n_bands(),
        });
    }
    Ok(())
}

fn neighbour_gap(values: &[f64], j: usize) -> f64 {
    let i = j - 1;
    let below = if i > 0 {
        values[i] - values[i - 1]
    } else {
        f64::INFINITY
    };
    let above = values.get(i + 1).map_or(f64::INFINITY, |v| v - values[i]);
    below.min(above)
}

/// Central-difference gradient of band `j` at `k`.
pub fn band_gradient(op: &BandOperator, j: usize, k: Quasimomentum) -> Result<[f64; 2], EigenError> {
    let h = GRADIENT_STEP;
    let g1 = (op.band(k.offset(h, 0.0), j)? - op.band(k.offset(-h, 0.0), j)?) / (2.0 * h);
    let g2 = (op.band(k.offset(0.0, h), j)? - op.band(k.offset(0.0, -h), j)?) / (2.0 * h);
    Ok([g1, g2])
}

pub(crate) fn refine_with(
    op: &BandOperator,
    j: usize,
    seed: Quasimomentum,
    which: Which,
    step: f64,
) -> Result<BandExtremum, EdgeError> {
    check_band(op, j)?;
    let s = which.sign();
    let nm = NelderMead {
        initial_step: step,
        ..NelderMead::default()
    };
    let m = nm.minimize([seed.k1, seed.k2], |x| {
        op.band(Quasimomentum::new(x[0], x[1]), j).map(|v| s * v)
    })?;
    let k = Quasimomentum::new(m.x[0], m.x[1]);
    let mut ext = BandExtremum::new(j, which, s * m.value, k, Domain::FullZone);
    if neighbour_gap(&op.bands(k)?, j) < CROSSING_GAP {
        ext.at_crossing = true;
        return Ok(ext);
    }
    let g = band_gradient(op, j, k)?;
    let gradient_norm = g[0].hypot(g[1]);
    if gradient_norm >= GRADIENT_TOL {
        return Err(EdgeError::NotStationary {
            extremum: Box::new(ext),
            gradient_norm,
        });
    }
    Ok(ext)
}

/// Polishes a grid candidate of band `j` (1-based) by Nelder–Mead.
///
/// The result is never worse than the value at `seed`. Away from band
/// crossings it is checked to be stationary; a failed check returns
/// [`EdgeError::NotStationary`] carrying the polished point.
pub fn refine_extremum(
    op: &BandOperator,
    j: usize,
    seed: Quasimomentum,
    which: Which,
) -> Result<BandExtremum, EdgeError> {
    refine_with(op, j, seed, which, 0.02)
}

/// Line `i` of the four symmetry lines at parameter `t`.
fn line_point(line: usize, t: f64) -> Quasimomentum {
    match line {
        0 => Quasimomentum::new(0.0, t),
        1 => Quasimomentum::new(PI, t),
        2 => Quasimomentum::new(t, 0.0),
        _ => Quasimomentum::new(t, PI),
    }
}

const CORNERS: [(f64, f64); 4] = [(0.0, 0.0), (0.0, PI), (PI, 0.0), (PI, PI)];

/// All bands sampled along the four symmetry lines.
#[derive(Debug, Clone)]
pub struct LineScan {
    samples: usize,
    /// `values[line][i][band - 1]`
    values: Vec<Vec<Vec<f64>>>,
}

impl LineScan {
    pub fn new(op: &BandOperator, samples: usize) -> Result<Self, EigenError> {
        let mut values = Vec::with_capacity(4);
        for line in 0..4 {
            let row = (0..samples)
                .map(|i| op.bands(line_point(line, Self::param(samples, i))))
                .collect::<Result<Vec<_>, _>>()?;
            values.push(row);
        }
        Ok(LineScan { samples, values })
    }

    fn param(samples: usize, i: usize) -> f64 {
        -PI + 2.0 * PI * i as f64 / samples as f64
    }

    /// Golden-section-refined local extrema of band `j` on every line, plus
    /// the corner points.
    fn candidates(&self, op: &BandOperator, j: usize, which: Which) -> Result<Vec<BandExtremum>, EigenError> {
        let s = which.sign();
        let n = self.samples;
        let h = 2.0 * PI / n as f64;
        let mut out = corner_candidates(op, j, which)?;
        for (line, row) in self.values.iter().enumerate() {
            let v = |i: usize| s * row[i % n][j - 1];
            for i in 0..n {
                let (prev, here, next) = (v(i + n - 1), v(i), v(i + 1));
                let is_ext = here <= prev && here <= next;
                // Skip plateaus: rounding noise there has no extremum to find.
                let flat = (prev - here).abs().max((next - here).abs()) <= 1e-13;
                if !is_ext || flat {
                    continue;
                }
                let t = Self::param(n, i);
                let (t_best, f_best) =
                    golden_section(t - h, t + h, 1e-12, |t| op.band(line_point(line, t), j).map(|x| s * x))?;
                let (t, f) = if f_best <= here { (t_best, f_best) } else { (t, here) };
                let mut e = BandExtremum::new(j, which, s * f, line_point(line, t), Domain::Boundary);
                // Points on a line are on the boundary by construction.
                if e.location_class == LocationClass::Interior {
                    e.location_class = LocationClass::BoundaryXiOnly;
                }
                out.push(e);
            }
            // Plateaus and monotone rows still contribute their best sample.
            let (i, &best) = row
                .iter()
                .map(|b| &b[j - 1])
                .enumerate()
                .min_by(|a, b| (s * a.1).total_cmp(&(s * b.1)))
                .expect("scan rows are non-empty");
            out.push(BandExtremum::new(
                j,
                which,
                best,
                line_point(line, Self::param(n, i)),
                Domain::Boundary,
            ));
        }
        Ok(out)
    }

    fn pair(&self, op: &BandOperator, j: usize) -> Result<ExtremumPair, EigenError> {
        let lo = self.candidates(op, j, Which::Min)?;
        let hi = self.candidates(op, j, Which::Max)?;
        Ok(ExtremumPair {
            min: select(&lo, Domain::Boundary).expect("candidates include corners"),
            max: select(&hi, Domain::Boundary).expect("candidates include corners"),
        })
    }
}

fn corner_candidates(op: &BandOperator, j: usize, which: Which) -> Result<Vec<BandExtremum>, EigenError> {
    CORNERS
        .iter()
        .map(|&(a, b)| {
            let k = Quasimomentum::new(a, b);
            Ok(BandExtremum::new(j, which, op.band(k, j)?, k, Domain::CornerSet))
        })
        .collect()
}

fn corner_pair(op: &BandOperator, j: usize) -> Result<ExtremumPair, EigenError> {
    Ok(ExtremumPair {
        min: select(&corner_candidates(op, j, Which::Min)?, Domain::CornerSet).expect("four corners"),
        max: select(&corner_candidates(op, j, Which::Max)?, Domain::CornerSet).expect("four corners"),
    })
}

/// Minimum and maximum of band `j` over the symmetry lines.
pub fn boundary_extrema(op: &BandOperator, j: usize) -> Result<ExtremumPair, EdgeError> {
    check_band(op, j)?;
    Ok(LineScan::new(op, LINE_SAMPLES)?.pair(op, j)?)
}

/// Minimum and maximum of band `j` over `X = {0, π}²`.
pub fn corner_extrema(op: &BandOperator, j: usize) -> Result<ExtremumPair, EdgeError> {
    check_band(op, j)?;
    Ok(corner_pair(op, j)?)
}

fn full_extremum(
    op: &BandOperator,
    surface: &BandSurface,
    which: Which,
    restricted: &BandExtremum,
) -> Result<BandExtremum, EdgeError> {
    let j = surface.band;
    let grid = surface.grid;
    let step = 0.5 * grid.spacing();
    let mut candidates = vec![*restricted];
    for &(a, b, v) in surface.local_extrema(which == Which::Min).iter().take(SEEDS_PER_EDGE) {
        let seed = grid.point(a, b);
        let refined = match refine_with(op, j, seed, which, step) {
            Ok(e) => e,
            Err(EdgeError::NotStationary { extremum, .. }) => *extremum,
            Err(e) => return Err(e),
        };
        candidates.push(refined);
        candidates.push(BandExtremum::new(j, which, v, seed, Domain::FullZone));
    }
    Ok(select(&candidates, Domain::FullZone).expect("restricted candidate present"))
}

/// Band edges of every band, seeded from a sweep.
pub fn band_edges(op: &BandOperator, surfaces: &[BandSurface]) -> Result<Vec<BandEdges>, EdgeError> {
    let scan = LineScan::new(op, LINE_SAMPLES)?;
    surfaces
        .iter()
        .map(|surface| {
            let j = surface.band;
            check_band(op, j)?;
            let boundary = scan.pair(op, j)?;
            let corner = corner_pair(op, j)?;
            let full = ExtremumPair {
                min: full_extremum(op, surface, Which::Min, &boundary.min)?,
                max: full_extremum(op, surface, Which::Max, &boundary.max)?,
            };
            Ok(BandEdges {
                band: j,
                full,
                boundary,
                corner,
            })
        })
        .collect()
}

/// Sweeps at `max(resolution, 256)` and returns all band edges.
pub fn classify_band_edges(op: &BandOperator, resolution: usize) -> Result<Vec<BandEdges>, EdgeError> {
    let grid = ZoneGrid::new(resolution.max(CLASSIFY_RESOLUTION))?;
    let surfaces = sweep(op, grid)?;
    band_edges(op, &surfaces)
}

/// Table with columns `band,edge,value,k1,k2,class,gap_to_boundary,gap_to_corner`.
pub fn edge_table(edges: &[BandEdges]) -> String {
    let mut s = String::from("band,edge,value,k1,k2,class,gap_to_boundary,gap_to_corner\n");
    for e in edges {
        for which in [Which::Min, Which::Max] {
            let f = e.full.get(which);
            writeln!(
                s,
                "{},{},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e}",
                e.band,
                which,
                f.value,
                f.location.k1,
                f.location.k2,
                f.location_class,
                (f.value - e.boundary.get(which).value).abs(),
                (f.value - e.corner.get(which).value).abs(),
            )
            .expect("writing to a String cannot fail");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::OperatorKind;
    use crate::graph::{graph_gamma, square_lattice};

    fn gamma(kind: OperatorKind) -> BandOperator {
        BandOperator::new(graph_gamma(), kind)
    }

    #[test]
    fn location_classes() {
        assert_eq!(classify_location(Quasimomentum::new(PI, -PI)), LocationClass::CornerX);
        assert_eq!(
            classify_location(Quasimomentum::new(-PI + 1e-6, 0.0)),
            LocationClass::CornerX
        );
        assert_eq!(
            classify_location(Quasimomentum::new(1.97, 0.0)),
            LocationClass::BoundaryXiOnly
        );
        assert_eq!(
            classify_location(Quasimomentum::new(0.3, -PI)),
            LocationClass::BoundaryXiOnly
        );
        assert_eq!(
            classify_location(Quasimomentum::new(1.4, 1.78)),
            LocationClass::Interior
        );
    }

    #[test]
    fn ties_prefer_corners() {
        let a = BandExtremum::new(1, Which::Min, -1.0, Quasimomentum::new(0.5, 0.0), Domain::Boundary);
        let b = BandExtremum::new(
            1,
            Which::Min,
            -1.0 + 1e-12,
            Quasimomentum::new(PI, 0.0),
            Domain::Boundary,
        );
        let best = select(&[a, b], Domain::Boundary).unwrap();
        assert_eq!(best.location_class, LocationClass::CornerX);
        assert_eq!(best.value, -1.0);
    }

    #[test]
    fn refine_gamma_band2_max() {
        let e = refine_extremum(
            &gamma(OperatorKind::Adjacency),
            2,
            Quasimomentum::new(1.0, -1.1),
            Which::Max,
        )
        .unwrap();
        assert!((e.value + 1.0).abs() < 1e-9, "{e:?}");
        assert!(
            e.location
                .distance_mod_inversion(Quasimomentum::new(PI / 3.0, -PI / 3.0))
                < 1e-4
        );
        assert_eq!(e.location_class, LocationClass::Interior);
        assert!(!e.at_crossing);
    }

    #[test]
    fn refine_rejects_band_zero() {
        let err = refine_extremum(&gamma(OperatorKind::Adjacency), 0, Quasimomentum::ZERO, Which::Min);
        assert!(matches!(err, Err(EdgeError::BandOutOfRange { band: 0, .. })));
    }

    #[test]
    fn square_lattice_edges_at_corners() {
        let op = BandOperator::new(square_lattice(), OperatorKind::Adjacency);
        let edges = classify_band_edges(&op, 16).unwrap();
        let e = &edges[0];
        assert_eq!(e.full.min.value, -4.0);
        assert_eq!(e.full.max.value, 4.0);
        assert_eq!(e.full.min.location_class, LocationClass::CornerX);
        assert_eq!(e.full.max.location, Quasimomentum::ZERO);
    }

    #[test]
    fn corner_values_match_direct_solve() {
        let op = gamma(OperatorKind::NormalizedLaplacian);
        for j in 1..=5 {
            let c = corner_extrema(&op, j).unwrap();
            let at0 = op.bands_jacobi(Quasimomentum::ZERO).unwrap()[j - 1];
            assert!(c.min.value <= at0 + 1e-12 && at0 <= c.max.value + 1e-12);
        }
    }

    #[test]
    fn table_has_two_rows_per_band() {
        let op = BandOperator::new(square_lattice(), OperatorKind::Adjacency);
        let edges = classify_band_edges(&op, 8).unwrap();
        let t = edge_table(&edges);
        assert_eq!(t.lines().count(), 3);
        assert!(t.lines().nth(1).unwrap().starts_with("1,min,"));
    }
}
