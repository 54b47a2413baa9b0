//! ℤ²-periodic graphs described by a finite fundamental domain.
//!
//! A periodic graph is stored as `n` vertices of one cell plus a list of
//! edges. An edge `(u, v, s)` joins vertex `u` of cell `0` to vertex `v` of
//! cell `s ∈ ℤ²`. The same edge can be written as `(v, u, -s)`; only the
//! lexicographically smaller of the two forms is ever stored, and the edge
//! list is kept sorted, so two graphs with the same edge set compare equal.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Lattice translation carried by an edge.
pub type Shift = [i64; 2];

/// Zero-based index of a fundamental-domain vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An edge between `u` in cell `0` and `v` in cell `shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeSpec {
    pub u: VertexId,
    pub v: VertexId,
    pub shift: Shift,
}

impl EdgeSpec {
    pub fn new(u: usize, v: usize, shift: Shift) -> Self {
        EdgeSpec {
            u: VertexId(u),
            v: VertexId(v),
            shift,
        }
    }

    /// The same edge seen from the other endpoint.
    pub fn reversed(&self) -> Self {
        EdgeSpec {
            u: self.v,
            v: self.u,
            shift: [-self.shift[0], -self.shift[1]],
        }
    }

    /// Representative with `(u, s) <= (v, -s)`.
    pub fn canonical(&self) -> Self {
        let rev = self.reversed();
        if (self.u, self.shift) <= (rev.u, rev.shift) {
            *self
        } else {
            rev
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical() == *self
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v && self.shift == [0, 0]
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph document could not be parsed: {0}")]
    Parse(String),
    #[error("edge #{index} ({u}, {v}, {shift:?}): vertex index out of range for {n_vertices} vertices")]
    VertexOutOfRange {
        index: usize,
        u: usize,
        v: usize,
        shift: Shift,
        n_vertices: usize,
    },
    #[error("edge #{index} joins vertex {vertex} to itself in the same cell")]
    LoopEdge { index: usize, vertex: usize },
    #[error("edge #{index} ({u}, {v}, {shift:?}) duplicates edge #{first}")]
    DuplicateEdge {
        index: usize,
        first: usize,
        u: usize,
        v: usize,
        shift: Shift,
    },
    #[error("vertex {vertex} has no incident edges")]
    IsolatedVertex { vertex: usize },
    #[error("graph must have at least one vertex")]
    Empty,
}

/// An immutable ℤ²-periodic graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicGraph {
    n_vertices: usize,
    edges: Vec<EdgeSpec>,
    degrees: Vec<usize>,
}

impl PeriodicGraph {
    /// Validates and canonicalizes an edge list. Errors name the position
    /// of the offending edge in `edges`.
    pub fn new(n_vertices: usize, edges: &[EdgeSpec]) -> Result<Self, GraphError> {
        if n_vertices == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen: Vec<(EdgeSpec, usize)> = Vec::with_capacity(edges.len());
        for (index, e) in edges.iter().enumerate() {
            if e.u.0 >= n_vertices || e.v.0 >= n_vertices {
                return Err(GraphError::VertexOutOfRange {
                    index,
                    u: e.u.0,
                    v: e.v.0,
                    shift: e.shift,
                    n_vertices,
                });
            }
            if e.is_loop() {
                return Err(GraphError::LoopEdge { index, vertex: e.u.0 });
            }
            let c = e.canonical();
            if let Some(&(_, first)) = seen.iter().find(|(s, _)| *s == c) {
                return Err(GraphError::DuplicateEdge {
                    index,
                    first,
                    u: e.u.0,
                    v: e.v.0,
                    shift: e.shift,
                });
            }
            seen.push((c, index));
        }
        let mut canon: Vec<EdgeSpec> = seen.into_iter().map(|(e, _)| e).collect();
        canon.sort();

        let mut degrees = vec![0usize; n_vertices];
        for e in &canon {
            // A self-edge to a translated copy has two incidences at the same vertex.
            degrees[e.u.0] += 1;
            degrees[e.v.0] += 1;
        }
        if let Some(vertex) = degrees.iter().position(|&d| d == 0) {
            return Err(GraphError::IsolatedVertex { vertex });
        }
        Ok(PeriodicGraph {
            n_vertices,
            edges: canon,
            degrees,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Parses the JSON graph format:
    /// `{"n_vertices": n, "edges": [{"u": 0, "v": 1, "shift": [0, 0]}, ...]}`.
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        doc.into_graph()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&GraphDocument::from(self)).expect("graph document serializes");
        s.push('\n');
        s
    }
}

/// On-disk form of a [`PeriodicGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub n_vertices: usize,
    pub edges: Vec<EdgeDocument>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub u: usize,
    pub v: usize,
    pub shift: Shift,
}

impl GraphDocument {
    pub fn into_graph(self) -> Result<PeriodicGraph, GraphError> {
        let edges: Vec<EdgeSpec> = self.edges.iter().map(|e| EdgeSpec::new(e.u, e.v, e.shift)).collect();
        PeriodicGraph::new(self.n_vertices, &edges)
    }
}

impl From<&PeriodicGraph> for GraphDocument {
    fn from(g: &PeriodicGraph) -> Self {
        GraphDocument {
            n_vertices: g.n_vertices,
            edges: g
                .edges
                .iter()
                .map(|e| EdgeDocument {
                    u: e.u.0,
                    v: e.v.0,
                    shift: e.shift,
                })
                .collect(),
        }
    }
}

/// Converts 1-based figure labels to an edge.
fn labeled(u: usize, v: usize, shift: Shift) -> EdgeSpec {
    EdgeSpec::new(u - 1, v - 1, shift)
}

/// The five-vertex graph Γ with no point symmetries.
///
/// Its adjacency Floquet matrix has `e^{ik₁}` at entry (1,3) and `e^{ik₂}`
/// at entry (2,4) (1-based), all other nonzero entries equal to 1.
pub fn graph_gamma() -> PeriodicGraph {
    let edges = [
        labeled(1, 3, [1, 0]),
        labeled(1, 4, [0, 0]),
        labeled(1, 5, [0, 0]),
        labeled(2, 3, [0, 0]),
        labeled(2, 4, [0, 1]),
        labeled(2, 5, [0, 0]),
        labeled(3, 4, [0, 0]),
        labeled(4, 5, [0, 0]),
    ];
    PeriodicGraph::new(5, &edges).expect("built-in graph is valid")
}

/// The ten-vertex graph Λ made of two mirror halves.
///
/// Each half carries the 5×5 block `A(k)`; the halves are coupled by the
/// diagonal block `B(k) = diag(1, 0, e^{ik₂}, e^{ik₂}, 1)`.
pub fn graph_lambda() -> PeriodicGraph {
    let half = |o: usize| {
        [
            labeled(o + 1, o + 2, [0, 0]),
            labeled(o + 1, o + 3, [-1, 0]),
            labeled(o + 1, o + 4, [0, 0]),
            labeled(o + 2, o + 3, [0, 0]),
            labeled(o + 3, o + 4, [0, 0]),
            labeled(o + 3, o + 5, [0, 0]),
            labeled(o + 4, o + 5, [1, 0]),
        ]
    };
    let mut edges = Vec::with_capacity(19);
    edges.extend(half(0));
    edges.extend(half(5));
    edges.extend([
        labeled(1, 6, [0, 0]),
        labeled(3, 8, [0, 1]),
        labeled(4, 9, [0, 1]),
        labeled(5, 10, [0, 0]),
    ]);
    PeriodicGraph::new(10, &edges).expect("built-in graph is valid")
}

/// One vertex per cell joined to its horizontal and vertical translates.
/// The Floquet symbol is `2cos k₁ + 2cos k₂`.
pub fn square_lattice() -> PeriodicGraph {
    PeriodicGraph::new(1, &[EdgeSpec::new(0, 0, [1, 0]), EdgeSpec::new(0, 0, [0, 1])]).expect("built-in graph is valid")
}

/// Two disconnected copies of [`square_lattice`]; every band is doubly degenerate.
pub fn square_lattice_pair() -> PeriodicGraph {
    PeriodicGraph::new(
        2,
        &[
            EdgeSpec::new(0, 0, [1, 0]),
            EdgeSpec::new(0, 0, [0, 1]),
            EdgeSpec::new(1, 1, [1, 0]),
            EdgeSpec::new(1, 1, [0, 1]),
        ],
    )
    .expect("built-in graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_shape() {
        let g = graph_gamma();
        assert_eq!(g.n_vertices(), 5);
        assert_eq!(g.edges().len(), 8);
        assert_eq!(g.degrees(), &[3, 3, 3, 4, 3]);
        assert!(g.edges().iter().all(EdgeSpec::is_canonical));
    }

    #[test]
    fn lambda_shape() {
        let g = graph_lambda();
        assert_eq!(g.n_vertices(), 10);
        assert_eq!(g.degrees(), &[4, 2, 5, 4, 3, 4, 2, 5, 4, 3]);
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edges().len());
    }

    #[test]
    fn self_translate_edges_count_twice() {
        let g = square_lattice();
        assert_eq!(g.degrees(), &[4]);
        assert_eq!(g.edges()[0].shift, [-1, 0]);
    }

    #[test]
    fn canonical_form_prefers_smaller_pair() {
        let e = EdgeSpec::new(3, 1, [1, -1]);
        assert_eq!(e.canonical(), EdgeSpec::new(1, 3, [-1, 1]));
        let e = EdgeSpec::new(0, 0, [1, 0]);
        assert_eq!(e.canonical(), EdgeSpec::new(0, 0, [-1, 0]));
    }

    #[test]
    fn loop_is_rejected() {
        let err = PeriodicGraph::new(2, &[EdgeSpec::new(0, 1, [0, 0]), EdgeSpec::new(0, 0, [0, 0])]).unwrap_err();
        assert_eq!(err, GraphError::LoopEdge { index: 1, vertex: 0 });
    }

    #[test]
    fn reversed_duplicate_is_rejected() {
        let err = PeriodicGraph::new(2, &[EdgeSpec::new(0, 1, [1, 0]), EdgeSpec::new(1, 0, [-1, 0])]).unwrap_err();
        assert!(matches!(err, GraphError::DuplicateEdge { index: 1, first: 0, .. }));
    }

    #[test]
    fn out_of_range_and_isolated() {
        let err = PeriodicGraph::new(2, &[EdgeSpec::new(0, 2, [0, 0])]).unwrap_err();
        assert!(matches!(err, GraphError::VertexOutOfRange { index: 0, .. }));
        let err = PeriodicGraph::new(3, &[EdgeSpec::new(0, 1, [0, 0])]).unwrap_err();
        assert_eq!(err, GraphError::IsolatedVertex { vertex: 2 });
    }

    #[test]
    fn large_shifts_are_allowed() {
        let g = PeriodicGraph::new(1, &[EdgeSpec::new(0, 0, [3, -2])]).unwrap();
        assert_eq!(g.degrees(), &[2]);
    }

    #[test]
    fn json_rejects_unknown_fields_and_garbage() {
        let err = PeriodicGraph::from_json(r#"{"n_vertices": 1, "edges": [], "name": "x"}"#).unwrap_err();
        assert!(matches!(err, GraphError::Parse(_)));
        let err = PeriodicGraph::from_json("{ not json").unwrap_err();
        match err {
            GraphError::Parse(msg) => assert!(msg.contains("line 1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_loads_gamma_edge_list() {
        let text = r#"{"n_vertices": 5, "edges": [
            {"u": 0, "v": 2, "shift": [1, 0]}, {"u": 0, "v": 3, "shift": [0, 0]},
            {"u": 0, "v": 4, "shift": [0, 0]}, {"u": 1, "v": 2, "shift": [0, 0]},
            {"u": 1, "v": 3, "shift": [0, 1]}, {"u": 1, "v": 4, "shift": [0, 0]},
            {"u": 2, "v": 3, "shift": [0, 0]}, {"u": 3, "v": 4, "shift": [0, 0]}]}"#;
        assert_eq!(PeriodicGraph::from_json(text).unwrap(), graph_gamma());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        for g in [graph_gamma(), graph_lambda(), square_lattice()] {
            let text = g.to_json();
            let back = PeriodicGraph::from_json(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(back.to_json(), text);
        }
    }
}
