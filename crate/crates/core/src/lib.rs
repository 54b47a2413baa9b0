//! Band structure of periodic graph operators.
//!
//! Periodic graphs in the plane are described by one cell of vertices and a
//! list of edges with lattice shifts ([`graph`]). For each quasimomentum the
//! adjacency operator and the normalized Laplacian reduce to small Hermitian
//! Floquet matrices ([`floquet`]), whose eigenvalues ([`eigen`]) sampled over
//! the Brillouin zone give the band functions ([`dispersion`]). Band edges
//! are located and classified by where they occur ([`edges`]), mapped to a
//! quantum graph ([`quantum`]), and tested for stability under periodic
//! potentials ([`perturbation`]).

pub mod dispersion;
pub mod edges;
pub mod eigen;
pub mod floquet;
pub mod graph;
pub mod optimize;
pub mod perturbation;
pub mod quantum;

use thiserror::Error;

/// Any failure raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Grid(#[from] dispersion::GridError),
    #[error(transparent)]
    Eigen(#[from] eigen::EigenError),
    #[error(transparent)]
    Edge(#[from] edges::EdgeError),
    #[error(transparent)]
    Quantum(#[from] quantum::QuantumError),
    #[error(transparent)]
    Perturbation(#[from] perturbation::PerturbationError),
}

impl Error {
    /// Whether the failure comes from bad input rather than from a numerical
    /// routine.
    pub fn is_input_error(&self) -> bool {
        use edges::EdgeError as E;
        use perturbation::PerturbationError as P;
        use quantum::QuantumError as Q;
        match self {
            Error::Graph(_) | Error::Grid(_) => true,
            Error::Eigen(_) => false,
            Error::Edge(e) => matches!(e, E::BandOutOfRange { .. } | E::Grid(_)),
            Error::Quantum(e) => matches!(
                e,
                Q::BadOmegaMax(_) | Q::CoordinateOutOfRange(_) | Q::DimensionMismatch { .. }
            ),
            Error::Perturbation(e) => match e {
                P::PotentialLength { .. } | P::EmptyInterval { .. } | P::Grid(_) => true,
                P::Edge(inner) => matches!(inner, E::BandOutOfRange { .. } | E::Grid(_)),
                _ => false,
            },
        }
    }
}
