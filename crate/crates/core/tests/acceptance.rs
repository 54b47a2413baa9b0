//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! The report goes to stdout even when test output is captured.

use bandedge::dispersion::{gap_list, spectrum_report, sweep, SpectrumReport, ZoneGrid};
use bandedge::edges::{band_edges, boundary_extrema, classify_band_edges, BandEdges, LocationClass, Which};
use bandedge::floquet::{assemble, char_poly_gamma, inverse_sqrt_degrees, BandOperator, OperatorKind, Quasimomentum};
use bandedge::graph::{graph_gamma, graph_lambda, square_lattice, PeriodicGraph};
use bandedge::perturbation::{crossing_probe, locate_crossing, stability_experiment, PerturbationFamily};
use bandedge::quantum::{edge_eigenfunction, kirchhoff_residual, omega_bands};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

const DELTA: OperatorKind = OperatorKind::Adjacency;
const LAPLACE: OperatorKind = OperatorKind::NormalizedLaplacian;

/// Collects failed sub-checks of one criterion.
#[derive(Default)]
struct Checks(Vec<String>);

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.0.push(what());
        }
    }

    fn close(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, || {
            format!("{name}: got {got:.10}, want {want:.10} ± {tol:e}")
        });
    }
}

fn random_k(rng: &mut StdRng) -> Quasimomentum {
    Quasimomentum::new(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI))
}

fn report(graph: PeriodicGraph, kind: OperatorKind, res: usize) -> (BandOperator, SpectrumReport, Vec<BandEdges>) {
    let op = BandOperator::new(graph, kind);
    let surfaces = sweep(&op, ZoneGrid::new(res).unwrap()).unwrap();
    let edges = band_edges(&op, &surfaces).unwrap();
    let r = spectrum_report(kind, &surfaces, &edges);
    (op, r, edges)
}

fn criterion_1(c: &mut Checks) {
    let start = Instant::now();
    let (_, r, _) = report(graph_gamma(), DELTA, 64);
    let elapsed = start.elapsed().as_secs_f64();
    let want = [(-2.73, -1.90), (-1.63, -1.00), (-0.73, 0.73), (0.0, 1.46), (2.00, 3.23)];
    for (b, (lo, hi)) in r.bands.iter().zip(want) {
        c.close(&format!("band {} lo", b.band), b.lo, lo, 0.01);
        c.close(&format!("band {} hi", b.band), b.hi, hi, 0.01);
    }
    let gaps = gap_list(&r);
    let between = |i: usize, j: usize| {
        gaps.iter()
            .any(|g| (g.lo - r.bands[i - 1].hi).abs() < 1e-12 && (g.hi - r.bands[j - 1].lo).abs() < 1e-12)
    };
    c.check(gaps.len() == 3, || format!("expected 3 gaps, got {gaps:?}"));
    for (i, j) in [(1, 2), (2, 3), (4, 5)] {
        c.check(between(i, j), || format!("missing gap between bands {i} and {j}"));
    }
    c.check(!between(3, 4), || "unexpected gap between bands 3 and 4".into());
    c.check(elapsed < 5.0, || format!("runtime {elapsed:.2} s"));
}

fn criterion_2(c: &mut Checks) {
    let op = BandOperator::new(graph_gamma(), DELTA);
    let edges = classify_band_edges(&op, 256).unwrap();
    let (lo, hi) = (edges[1].full.min, edges[1].full.max);
    c.close("band 2 max", hi.value, -1.0, 1e-6);
    let exact = Quasimomentum::new(PI / 3.0, 5.0 * PI / 3.0).folded();
    let d = hi.location.distance_mod_inversion(exact);
    c.check(d < 1e-4, || {
        format!("max location {} is {d:e} from ±{exact}", hi.location)
    });
    c.check(char_poly_gamma(hi.value, hi.location, DELTA).abs() < 1e-10, || {
        "char poly does not vanish at the refined max".into()
    });
    c.close("band 2 min", lo.value, -1.630, 5e-3);
    let seed = Quasimomentum::new(1.865, 0.785);
    let d = lo.location.distance_mod_inversion(seed);
    c.check(d < 0.05, || {
        format!("min location {} is {d:.3} from ±{seed}", lo.location)
    });
    for e in [lo, hi] {
        c.check(e.location_class == LocationClass::Interior, || {
            format!("band 2 {} classified {}", e.which, e.location_class)
        });
    }
}

fn criterion_3(c: &mut Checks) {
    let at_any =
        |k: Quasimomentum, pts: &[(f64, f64)]| pts.iter().any(|&(a, b)| k.distance(Quasimomentum::new(a, b)) < 1e-9);
    let cases = [
        (
            DELTA,
            -(2f64.sqrt()),
            -(4.0 - 8f64.sqrt()).sqrt(),
            [(PI, 0.0), (PI, PI)],
            [(0.0, PI), (0.0, PI)],
        ),
        (
            LAPLACE,
            -(2f64.sqrt()) / 3.0,
            -1.0 / 3.0,
            [(PI, 0.0), (PI, PI)],
            [(0.0, 0.0), (0.0, PI)],
        ),
    ];
    for (kind, min, max, min_at, max_at) in cases {
        let op = BandOperator::new(graph_gamma(), kind);
        let b = boundary_extrema(&op, 2).unwrap();
        c.close(&format!("{kind} boundary min"), b.min.value, min, 1e-9);
        c.close(&format!("{kind} boundary max"), b.max.value, max, 1e-9);
        c.check(at_any(b.min.location, &min_at), || {
            format!("{kind} min at {}", b.min.location)
        });
        c.check(at_any(b.max.location, &max_at), || {
            format!("{kind} max at {}", b.max.location)
        });
    }
}

fn criterion_4(c: &mut Checks) {
    for (kind, upper, lower) in [(DELTA, 8.0, 15.0), (LAPLACE, 10.8, 9.5)] {
        let (_, r, _) = report(graph_gamma(), kind, 64);
        let d = r.discrepancies[1];
        c.close(
            &format!("{kind} upper %"),
            100.0 * d.upper_vs_boundary_relative,
            upper,
            1.0,
        );
        c.close(
            &format!("{kind} lower %"),
            100.0 * d.lower_vs_boundary_relative,
            lower,
            1.0,
        );
    }
}

fn criterion_5(c: &mut Checks) {
    let (_, r, edges) = report(graph_lambda(), DELTA, 64);
    let want = [
        (-3.840, -2.265),
        (-2.943, -1.834),
        (-1.865, -1.113),
        (-1.536, -0.333),
        (-0.803, 0.377),
    ];
    for (b, (lo, hi)) in r.bands.iter().zip(want) {
        c.close(&format!("band {} lo", b.band), b.lo, lo, 0.01);
        c.close(&format!("band {} hi", b.band), b.hi, hi, 0.01);
    }
    let n = r.bands.len();
    for j in 0..n {
        let (a, b) = (r.bands[j], r.bands[n - 1 - j]);
        c.close(&format!("symmetry band {}", a.band), a.lo, -b.hi, 0.01);
    }
    let gaps = gap_list(&r);
    for g in &gaps {
        let mirrored = gaps
            .iter()
            .any(|h| (h.lo + g.hi).abs() < 0.01 && (h.hi + g.lo).abs() < 0.01);
        c.check(mirrored, || format!("gap ({}, {}) has no mirror", g.lo, g.hi));
    }
    let b3 = &edges[2];
    c.close("band 3 interior min", b3.full.min.value, -1.865, 5e-3);
    c.close("band 3 boundary min", b3.boundary.min.value, -1.830, 5e-3);
    c.close("band 3 corner min", b3.corner.min.value, -1.568, 5e-3);

    let op = BandOperator::new(graph_lambda(), DELTA);
    let classified = classify_band_edges(&op, 256).unwrap();
    let interior: Vec<(usize, Which)> = classified
        .iter()
        .flat_map(|e| [e.full.min, e.full.max])
        .filter(|x| x.location_class == LocationClass::Interior)
        .map(|x| (x.band, x.which))
        .collect();
    c.check(interior == vec![(3, Which::Min), (8, Which::Max)], || {
        format!("interior edges {interior:?}")
    });

    let op = BandOperator::new(graph_lambda(), LAPLACE);
    let e = classify_band_edges(&op, 256).unwrap();
    c.close("L band 3 interior min", e[2].full.min.value, -0.5486, 1e-3);
    c.close("L band 3 boundary min", e[2].boundary.min.value, -0.5380, 1e-3);
}

fn criterion_6(c: &mut Checks) {
    let mut rng = StdRng::seed_from_u64(6);
    for kind in [DELTA, LAPLACE] {
        let op = BandOperator::new(graph_gamma(), kind);
        for _ in 0..100 {
            let k = random_k(&mut rng);
            let values = op.eigen(k).unwrap().values;
            let scale = (1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()))).powi(5);
            for &v in &values {
                let p = char_poly_gamma(v, k, kind);
                c.check(p.abs() <= 1e-8 * scale, || format!("char poly {p:e} at {k}, λ = {v}"));
            }
        }
    }
    for graph in [graph_gamma(), graph_lambda()] {
        for kind in [DELTA, LAPLACE] {
            let op = BandOperator::new(graph.clone(), kind);
            let inv = inverse_sqrt_degrees(&graph);
            for _ in 0..1000 {
                let k = random_k(&mut rng);
                let (a, b) = (op.bands(k).unwrap(), op.bands(-k).unwrap());
                let even = a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12);
                c.check(even, || format!("evenness fails at {k}"));
                if kind == LAPLACE {
                    let inside = a.iter().all(|v| (-1.0 - 1e-12..=1.0 + 1e-12).contains(v));
                    c.check(inside, || format!("L spectrum {a:?} leaves [-1, 1] at {k}"));
                    let l = assemble(&graph, k, LAPLACE);
                    let d = assemble(&graph, k, DELTA);
                    let n = graph.n_vertices();
                    let ok =
                        (0..n).all(|i| (0..n).all(|j| (l.get(i, j) - d.get(i, j) * inv[i] * inv[j]).norm() <= 1e-15));
                    c.check(ok, || format!("S-conjugation identity fails at {k}"));
                }
            }
        }
    }
}

fn criterion_7(c: &mut Checks) {
    let (op, r, _) = report(graph_gamma(), LAPLACE, 64);
    let band2 = r.bands[1];
    let omegas = omega_bands(&[band2], 3.0 * PI).unwrap();
    c.check(omegas.len() == 3, || {
        format!("expected 3 branches, got {}", omegas.len())
    });
    for w in &omegas {
        let base = w.branch as f64 * PI;
        let (lo_src, hi_src) = if w.branch % 2 == 0 {
            (band2.hi, band2.lo)
        } else {
            (band2.lo, band2.hi)
        };
        let expect_lo = if w.branch % 2 == 0 {
            base + lo_src.acos()
        } else {
            base + (-lo_src).acos()
        };
        c.close(&format!("branch {} omega_lo", w.branch), w.omega_lo, expect_lo, 1e-12);
        c.close(&format!("branch {} cos(lo)", w.branch), w.omega_lo.cos(), lo_src, 1e-12);
        c.close(&format!("branch {} cos(hi)", w.branch), w.omega_hi.cos(), hi_src, 1e-12);
    }
    let mut rng = StdRng::seed_from_u64(7);
    let mut tested = 0;
    while tested < 20 {
        let k = random_k(&mut rng);
        let eig = op.eigen(k).unwrap();
        for (j, &mu) in eig.values.iter().enumerate() {
            let omega = mu.clamp(-1.0, 1.0).acos();
            if omega.sin().abs() <= 1e-3 {
                continue;
            }
            let res = kirchhoff_residual(op.graph(), k, omega, eig.vector(j).unwrap()).unwrap();
            c.check(res.residual <= 1e-8, || {
                format!("Kirchhoff residual {:e} at {k}, band {}", res.residual, j + 1)
            });
        }
        tested += 1;
    }
    for _ in 0..20 {
        let pu = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let pv = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let omega = rng.gen_range(0.1..3.0);
        let at0 = edge_eigenfunction(pu, pv, omega, 0.0).unwrap();
        let at1 = edge_eigenfunction(pu, pv, omega, 1.0).unwrap();
        c.check((at0 - pv).norm() <= 1e-12 && (at1 - pu).norm() <= 1e-12, || {
            format!("endpoint mismatch at omega {omega}")
        });
    }
}

fn criterion_8(c: &mut Checks) {
    let mut e1 = vec![0.0; 10];
    e1[0] = 1.0;
    let families = [
        (
            "square",
            PerturbationFamily::new(square_lattice(), DELTA, vec![1.0], vec![0.001, 0.01]).unwrap(),
        ),
        (
            "lambda",
            PerturbationFamily::new(graph_lambda(), DELTA, e1, vec![0.001, 0.01]).unwrap(),
        ),
    ];
    let mut rng = StdRng::seed_from_u64(8);
    for (name, fam) in &families {
        let r = stability_experiment(fam, (-10.0, 10.0), 256).unwrap();
        for cg in &r.couplings {
            for (e, e0) in cg.edges.iter().zip(&r.base.edges) {
                if e0.location_class != LocationClass::CornerX {
                    continue;
                }
                c.check(e.simple == e0.simple && e.genericity == e0.genericity, || {
                    format!("{name} g={}: band {} {} verdict changed", cg.g, e.band, e.which)
                });
                c.check(e.location_drift <= 10.0 * cg.g, || {
                    format!(
                        "{name} g={}: band {} {} drift {:e}",
                        cg.g, e.band, e.which, e.location_drift
                    )
                });
            }
        }
        let base = fam.operator(0.0);
        let bound_ok = fam.g_values.iter().all(|&g| {
            let op = fam.operator(g);
            let grid = ZoneGrid::new(32).unwrap();
            let mut ks: Vec<Quasimomentum> = grid.points().map(|(_, _, k)| k).collect();
            ks.extend((0..200).map(|_| random_k(&mut rng)));
            ks.iter().all(|&k| {
                let (a, b) = (op.bands(k).unwrap(), base.bands(k).unwrap());
                a.iter()
                    .zip(&b)
                    .all(|(x, y)| (x - y).abs() <= g * fam.max_abs_potential() + 1e-12)
            })
        });
        c.check(bound_ok, || format!("{name}: operator-norm bound violated"));
    }
}

fn criterion_9(c: &mut Checks) {
    let op = BandOperator::new(graph_gamma(), DELTA);
    let (k, gap) = locate_crossing(&op, 3, Quasimomentum::new(0.3, 0.2)).unwrap();
    c.check(gap < 1e-8, || format!("bands 3 and 4 do not meet (gap {gap:e})"));
    let b = op.bands(k).unwrap();
    let interval = (0.5 * (b[1] + b[2]), 0.5 * (b[3] + b[4]));
    let dir = (2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt());
    let rows = crossing_probe(&op, 3, k, dir, interval, 1e-2, 7).unwrap();
    for w in rows.windows(2) {
        let (rs, rp) = (w[1].sum / w[0].sum, w[1].product / w[0].product);
        c.check((rs - 1.0).abs() <= 0.1, || {
            format!("sum ratio {rs} at h = {:e}", w[1].step)
        });
        c.check((rp - 1.0).abs() <= 0.1, || {
            format!("product ratio {rp} at h = {:e}", w[1].step)
        });
    }
    let growth = (rows.last().unwrap().lower_branch / rows[0].lower_branch).abs();
    c.check(growth >= 100.0, || format!("single-branch growth only {growth:.1}x"));
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, fn(&mut Checks));
    let criteria: [Criterion; 9] = [
        ("band regression on Γ (adjacency)", criterion_1),
        ("interior band edges of Γ band 2", criterion_2),
        ("boundary closed forms on Γ", criterion_3),
        ("boundary vs full discrepancy percentages", criterion_4),
        ("regression and edge classes on Λ", criterion_5),
        ("oracle suites", criterion_6),
        ("quantum-graph transfer", criterion_7),
        ("stability under small potentials", criterion_8),
        ("smoothness of clusters through a crossing", criterion_9),
    ];
    // Written to the real stdout so the summary shows without --nocapture.
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let mut c = Checks::default();
        f(&mut c);
        let status = if c.0.is_empty() { "PASS" } else { "FAIL" };
        writeln!(out, "criterion {}: {status}  {name}", i + 1).unwrap();
        for msg in &c.0 {
            writeln!(out, "    {msg}").unwrap();
        }
        if !c.0.is_empty() {
            failed.push(i + 1);
        }
    }
    out.flush().unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
