use crate::config::{io_err, load_graph, CliError, Format, RunConfig};
use bandedge::dispersion::{spectrum_report, sweep, BandSurface, ZoneGrid};
use bandedge::edges::{band_edges, classify_band_edges, edge_table, BandEdges, Which};
use bandedge::floquet::{BandOperator, OperatorKind};
use bandedge::perturbation::{stability_experiment, Applicability, PerturbationFamily};
use bandedge::quantum::omega_bands;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_err(&path))
}

fn write_document<T: Serialize>(config: &RunConfig, name: &str, body: T) -> Result<(), CliError> {
    let doc = Document { config, body };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    write_file(&config.out, name, &text)
}

fn prepare(config: &RunConfig) -> Result<BandOperator, CliError> {
    let graph = load_graph(&config.graph)?;
    if let Some(b) = config.band {
        if b == 0 || b > graph.n_vertices() {
            return Err(CliError::Config(format!(
                "--band {b} out of range 1..={}",
                graph.n_vertices()
            )));
        }
    }
    fs::create_dir_all(&config.out).map_err(io_err(&config.out))?;
    Ok(BandOperator::new(graph, config.op.into()))
}

fn selected(config: &RunConfig, band: usize) -> bool {
    config.band.is_none_or(|b| b == band)
}

#[derive(Serialize)]
struct SurfaceJson<'a> {
    band: usize,
    resolution: usize,
    /// Grid coordinates along each axis; `values[a][b]` sits at `(k[a], k[b])`.
    k: Vec<f64>,
    values: Vec<&'a [f64]>,
}

fn write_surfaces(config: &RunConfig, surfaces: &[BandSurface]) -> Result<(), CliError> {
    for s in surfaces.iter().filter(|s| selected(config, s.band)) {
        match config.format {
            Format::Csv => write_file(&config.out, &format!("surface_band{}.csv", s.band), &s.to_csv())?,
            Format::JsonLike => {
                let n = s.grid.resolution();
                let body = SurfaceJson {
                    band: s.band,
                    resolution: n,
                    k: (0..n).map(|a| s.grid.coordinate(a)).collect(),
                    values: s.values.chunks(n).collect(),
                };
                write_document(config, &format!("surface_band{}.json", s.band), body)?;
            }
        }
    }
    Ok(())
}

fn bands_and_edges(op: &BandOperator, resolution: usize) -> Result<(Vec<BandSurface>, Vec<BandEdges>), CliError> {
    let grid = ZoneGrid::new(resolution).map_err(bandedge::Error::from)?;
    let surfaces = sweep(op, grid).map_err(bandedge::Error::from)?;
    let edges = band_edges(op, &surfaces).map_err(bandedge::Error::from)?;
    Ok((surfaces, edges))
}

#[derive(Serialize)]
struct ReportBody<T: Serialize> {
    report: T,
}

pub fn cmd_sweep(config: &RunConfig) -> Result<String, CliError> {
    let op = prepare(config)?;
    let (surfaces, edges) = bands_and_edges(&op, config.resolution)?;
    write_surfaces(config, &surfaces)?;
    let report = spectrum_report(op.kind(), &surfaces, &edges);
    let mut out = String::new();
    for b in report.bands.iter().filter(|b| selected(config, b.band)) {
        writeln!(out, "band {}: [{:.6}, {:.6}]", b.band, b.lo, b.hi).unwrap();
    }
    for g in &report.gaps {
        writeln!(out, "gap: ({:.6}, {:.6})", g.lo, g.hi).unwrap();
    }
    write_document(config, "spectrum_report.json", ReportBody { report })?;
    Ok(out)
}

#[derive(Serialize)]
struct EdgesBody<'a> {
    edges: &'a [BandEdges],
}

pub fn cmd_edges(config: &RunConfig) -> Result<String, CliError> {
    let op = prepare(config)?;
    let edges: Vec<BandEdges> = classify_band_edges(&op, config.resolution)
        .map_err(bandedge::Error::from)?
        .into_iter()
        .filter(|e| selected(config, e.band))
        .collect();
    match config.format {
        Format::Csv => write_file(&config.out, "edges.csv", &edge_table(&edges))?,
        Format::JsonLike => write_document(config, "edges.json", EdgesBody { edges: &edges })?,
    }
    let mut out = String::new();
    for e in &edges {
        let (lo, hi) = (e.full.get(Which::Min), e.full.get(Which::Max));
        writeln!(
            out,
            "band {}: min {:.6} at {} {}; max {:.6} at {} {}",
            e.band, lo.value, lo.location, lo.location_class, hi.value, hi.location, hi.location_class
        )
        .unwrap();
    }
    Ok(out)
}

pub fn cmd_quantum(config: &RunConfig) -> Result<String, CliError> {
    let op = prepare(config)?;
    debug_assert_eq!(op.kind(), OperatorKind::NormalizedLaplacian);
    let omega_max = config.omega_max.expect("quantum config carries omega_max");
    let (surfaces, edges) = bands_and_edges(&op, config.resolution)?;
    let mut report = spectrum_report(op.kind(), &surfaces, &edges);
    let discrete: Vec<_> = report
        .bands
        .iter()
        .copied()
        .filter(|b| selected(config, b.band))
        .collect();
    let bands = omega_bands(&discrete, omega_max).map_err(bandedge::Error::from)?;
    let mut csv = String::from("omega_lo,omega_hi,energy_lo,energy_hi,branch,parent_band,dirichlet_flag\n");
    for b in &bands {
        writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
            b.omega_lo, b.omega_hi, b.energy_lo, b.energy_hi, b.branch, b.parent_band, b.dirichlet_flag
        )
        .unwrap();
    }
    let branches = bands.iter().map(|b| b.branch).max().map_or(0, |m| m + 1);
    let mut out = format!("{} omega-bands on {} branches\n", bands.len(), branches);
    for b in &bands {
        writeln!(
            out,
            "branch {} band {}: omega [{:.6}, {:.6}]{}",
            b.branch,
            b.parent_band,
            b.omega_lo,
            b.omega_hi,
            if b.dirichlet_flag {
                " (touches Dirichlet point)"
            } else {
                ""
            }
        )
        .unwrap();
    }
    report.quantum_bands = Some(bands);
    if config.format == Format::Csv {
        write_file(&config.out, "omega_bands.csv", &csv)?;
    }
    write_document(config, "quantum_report.json", ReportBody { report })?;
    Ok(out)
}

/// Bound on the spectrum of `H_0 + g·V` over the whole ladder, padded by 1.
pub fn default_interval(op: &BandOperator, family: &PerturbationFamily) -> (f64, f64) {
    let norm = match op.kind() {
        OperatorKind::Adjacency => op.graph().max_degree() as f64,
        OperatorKind::NormalizedLaplacian => 1.0,
    };
    let g = family.g_values.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let r = norm + g * family.max_abs_potential() + 1.0;
    (-r, r)
}

pub fn cmd_perturb(config: &mut RunConfig) -> Result<String, CliError> {
    let op = prepare(config)?;
    let n = op.n_bands();
    let potential = config.potential.clone().unwrap_or_else(|| {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        v
    });
    let family = PerturbationFamily::new(op.graph().clone(), op.kind(), potential.clone(), config.g.clone())
        .map_err(bandedge::Error::from)?;
    let interval = config.interval.unwrap_or_else(|| default_interval(&op, &family));
    config.potential = Some(potential);
    config.interval = Some(interval);
    let report = stability_experiment(&family, interval, config.resolution).map_err(bandedge::Error::from)?;
    let mut out = String::new();
    match &report.applicability {
        Applicability::Applicable => out.push_str("base operator is simple and generic on the interval\n"),
        Applicability::Inapplicable { reason } => writeln!(out, "Inapplicable: {reason}").unwrap(),
    }
    for c in std::iter::once(&report.base).chain(&report.couplings) {
        writeln!(out, "g = {}", c.g).unwrap();
        for e in &c.edges {
            writeln!(
                out,
                "  band {} {}: {:.6} at {} {} {} {:?} drift {:.3e}",
                e.band,
                e.which,
                e.value,
                e.location,
                e.location_class,
                if e.simple { "simple" } else { "not-simple" },
                e.genericity,
                e.location_drift
            )
            .unwrap();
        }
    }
    if let Some(g) = report.simplicity_lost_at {
        writeln!(out, "simplicity first lost at g = {g}").unwrap();
    }
    write_document(config, "stability_report.json", ReportBody { report })?;
    Ok(out)
}
