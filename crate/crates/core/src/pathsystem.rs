//! Graphs, paths and path systems, plus the consistency checks that every
//! other module relies on.
//!
//! A path system stores exactly one path per unordered vertex pair. Paths are
//! stored oriented from the smaller endpoint to the larger one; callers that
//! want the other orientation use [`PathSystem::oriented`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

pub type Vertex = usize;

/// Canonical unordered pair `{u, v}` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair(Vertex, Vertex);

impl Pair {
    /// Panics if `u == v`.
    pub fn new(u: Vertex, v: Vertex) -> Self {
        assert_ne!(u, v, "a pair needs two distinct vertices");
        if u < v {
            Pair(u, v)
        } else {
            Pair(v, u)
        }
    }

    pub fn try_new(u: Vertex, v: Vertex) -> Option<Self> {
        (u != v).then(|| Self::new(u, v))
    }

    pub fn lo(self) -> Vertex {
        self.0
    }

    pub fn hi(self) -> Vertex {
        self.1
    }

    /// Index of this pair in the lexicographic enumeration of all pairs of `0..n`.
    pub fn index(self, n: usize) -> usize {
        let (u, v) = (self.0, self.1);
        u * n - u * (u + 1) / 2 + (v - u - 1)
    }

    /// All pairs of `0..n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Pair> {
        (0..n).flat_map(move |u| (u + 1..n).map(move |v| Pair(u, v)))
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("vertex {0} is not on the path")]
    VertexNotOnPath(Vertex),
    #[error("path is empty")]
    EmptyPath,
    #[error("no weight for pair {0}")]
    MissingWeight(Pair),
    #[error("weight for pair {0} is not positive")]
    NonPositiveWeight(Pair),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("pair {0} given more than once")]
    DuplicatePair(Pair),
    #[error("format error: {0}")]
    Format(String),
}

/// Simple undirected graph on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<Pair>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self, PathError> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(PathError::VertexOutOfRange { vertex: x, n });
                }
            }
            let pair = Pair::try_new(u, v).ok_or(PathError::SelfLoop(u))?;
            set.insert(pair);
        }
        Ok(Graph { n, edges: set })
    }

    pub fn complete(n: usize) -> Self {
        Graph {
            n,
            edges: Pair::all(n).collect(),
        }
    }

    pub fn path_graph(n: usize) -> Self {
        Graph {
            n,
            edges: (1..n).map(|v| Pair::new(v - 1, v)).collect(),
        }
    }

    pub fn cycle(n: usize) -> Self {
        Graph {
            n,
            edges: (0..n).map(|v| Pair::new(v, (v + 1) % n)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = Pair> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        Pair::try_new(u, v).is_some_and(|p| self.edges.contains(&p))
    }

    pub fn neighbors(&self, v: Vertex) -> Vec<Vertex> {
        (0..self.n).filter(|&u| self.has_edge(u, v)).collect()
    }
}

/// Ordered vertex sequence. Simplicity is checked by [`validate_system`], not
/// at construction, so that malformed input can be reported as data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(Vec<Vertex>);

impl Path {
    pub fn new(seq: Vec<Vertex>) -> Result<Self, PathError> {
        if seq.is_empty() {
            return Err(PathError::EmptyPath);
        }
        Ok(Path(seq))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn first(&self) -> Vertex {
        self.0[0]
    }

    pub fn last(&self) -> Vertex {
        *self.0.last().unwrap()
    }

    /// Number of edges.
    pub fn hops(&self) -> usize {
        self.0.len() - 1
    }

    pub fn reversed(&self) -> Path {
        Path(self.0.iter().rev().copied().collect())
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.0.iter().position(|&x| x == v)
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.iter().all(|v| seen.insert(*v))
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The contiguous segment of `p` from `a` to `b`, reversed if `b` precedes `a`.
pub fn subpath(p: &Path, a: Vertex, b: Vertex) -> Result<Path, PathError> {
    let i = p.position(a).ok_or(PathError::VertexNotOnPath(a))?;
    let j = p.position(b).ok_or(PathError::VertexNotOnPath(b))?;
    let seq = if i <= j {
        p.0[i..=j].to_vec()
    } else {
        p.0[j..=i].iter().rev().copied().collect()
    };
    Ok(Path(seq))
}

/// Positive rational weight per unordered pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairWeights {
    w: BTreeMap<Pair, Rational>,
}

impl PairWeights {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn uniform(n: usize, value: Rational) -> Self {
        PairWeights {
            w: Pair::all(n).map(|p| (p, value.clone())).collect(),
        }
    }

    pub fn insert(&mut self, u: Vertex, v: Vertex, value: Rational) -> Result<(), PathError> {
        let pair = Pair::try_new(u, v).ok_or(PathError::SelfLoop(u))?;
        if !value.is_positive() {
            return Err(PathError::NonPositiveWeight(pair));
        }
        self.w.insert(pair, value);
        Ok(())
    }

    pub fn get(&self, u: Vertex, v: Vertex) -> Option<&Rational> {
        Pair::try_new(u, v).and_then(|p| self.w.get(&p))
    }

    pub fn weight(&self, u: Vertex, v: Vertex) -> Result<&Rational, PathError> {
        let pair = Pair::try_new(u, v).ok_or(PathError::SelfLoop(u))?;
        self.w.get(&pair).ok_or(PathError::MissingWeight(pair))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pair, &Rational)> {
        self.w.iter().map(|(p, r)| (*p, r))
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Sum of consecutive-pair weights along `p`.
pub fn path_cost(p: &Path, w: &PairWeights) -> Result<Rational, PathError> {
    let mut total = Rational::zero();
    for (a, b) in p.edges() {
        total += w.weight(a, b)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Constructed,
    Loaded,
    InvariantExpanded,
}

/// One path per unordered pair of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSystem {
    n: usize,
    paths: BTreeMap<Pair, Path>,
    graph: Option<Graph>,
    origin: Origin,
}

impl PathSystem {
    /// Builds a system from `(u, v, path)` entries. A path given from `v` to
    /// `u` is reoriented; a path whose endpoints do not match its pair is kept
    /// verbatim so that [`validate_system`] can report it.
    pub fn from_entries(
        n: usize,
        entries: impl IntoIterator<Item = (Vertex, Vertex, Path)>,
    ) -> Result<Self, PathError> {
        let mut paths = BTreeMap::new();
        for (u, v, path) in entries {
            for &x in [u, v].iter().chain(path.vertices()) {
                if x >= n {
                    return Err(PathError::VertexOutOfRange { vertex: x, n });
                }
            }
            let pair = Pair::try_new(u, v).ok_or(PathError::SelfLoop(u))?;
            let path = if path.first() == pair.hi() && path.last() == pair.lo() {
                path.reversed()
            } else {
                path
            };
            if paths.insert(pair, path).is_some() {
                return Err(PathError::DuplicatePair(pair));
            }
        }
        Ok(PathSystem {
            n,
            paths,
            graph: None,
            origin: Origin::Constructed,
        })
    }

    /// Builds a system from paths alone, keyed by their endpoints.
    pub fn from_paths(n: usize, paths: impl IntoIterator<Item = Path>) -> Result<Self, PathError> {
        Self::from_entries(
            n,
            paths.into_iter().map(|p| (p.first(), p.last(), p)),
        )
    }

    pub fn with_graph(mut self, graph: Graph) -> Result<Self, PathError> {
        if graph.n() != self.n {
            return Err(PathError::Format(format!(
                "graph has {} vertices, system has {}",
                graph.n(),
                self.n
            )));
        }
        self.graph = Some(graph);
        Ok(self)
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn explicit_graph(&self) -> Option<&Graph> {
        self.graph.as_ref()
    }

    /// The explicit graph if one was given, otherwise the induced graph.
    pub fn ambient_graph(&self) -> Graph {
        self.graph.clone().unwrap_or_else(|| self.induced_graph())
    }

    /// Union of all path edges.
    pub fn induced_graph(&self) -> Graph {
        let edges = self
            .paths
            .values()
            .flat_map(|p| p.edges().filter_map(|(a, b)| Pair::try_new(a, b)))
            .collect();
        Graph { n: self.n, edges }
    }

    pub fn path(&self, u: Vertex, v: Vertex) -> Option<&Path> {
        Pair::try_new(u, v).and_then(|p| self.paths.get(&p))
    }

    /// Stored path for `{u, v}` oriented from `u` to `v`.
    pub fn oriented(&self, u: Vertex, v: Vertex) -> Option<Path> {
        let p = self.path(u, v)?;
        Some(if p.first() == u { p.clone() } else { p.reversed() })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pair, &Path)> {
        self.paths.iter().map(|(k, p)| (*k, p))
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.paths.len() == self.n * self.n.saturating_sub(1) / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    SubpathMismatch,
    NotSimple,
    EndpointMismatch,
    MissingPair,
    EdgeNotInGraph,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// The offending pair, and for subpath mismatches the pair of the path
    /// that contains the witness.
    pub pairs: Vec<(Vertex, Vertex)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vertex>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub neighborly: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub violations: Vec<Violation>,
}

/// Checks simplicity, endpoints, completeness and subpath closure; with a
/// graph, also that paths follow graph edges. `neighborly` holds when every
/// edge of the graph (explicit, given, or induced) is the path of its
/// endpoints.
pub fn validate_system(ps: &PathSystem, g: Option<&Graph>) -> ConsistencyReport {
    let mut violations = Vec::new();
    let pair_of = |p: Pair| (p.lo(), p.hi());

    for pair in Pair::all(ps.n()) {
        if ps.path(pair.lo(), pair.hi()).is_none() {
            violations.push(Violation {
                kind: ViolationKind::MissingPair,
                pairs: vec![pair_of(pair)],
                witness: None,
            });
        }
    }

    let mut well_formed = BTreeSet::new();
    for (pair, path) in ps.iter() {
        if path.first() != pair.lo() || path.last() != pair.hi() {
            violations.push(Violation {
                kind: ViolationKind::EndpointMismatch,
                pairs: vec![pair_of(pair)],
                witness: Some(path.vertices().to_vec()),
            });
        } else if !path.is_simple() {
            violations.push(Violation {
                kind: ViolationKind::NotSimple,
                pairs: vec![pair_of(pair)],
                witness: Some(path.vertices().to_vec()),
            });
        } else {
            well_formed.insert(pair);
        }
    }

    // subpath closure over every vertex pair of every well-formed path
    let mut reported = BTreeSet::new();
    for (pair, path) in ps.iter().filter(|(p, _)| well_formed.contains(p)) {
        let seq = path.vertices();
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                if i == 0 && j == seq.len() - 1 {
                    continue;
                }
                let sub = Pair::new(seq[i], seq[j]);
                let Some(stored) = ps.path(sub.lo(), sub.hi()) else {
                    continue;
                };
                let segment = &seq[i..=j];
                let matches = if seq[i] == stored.first() {
                    segment == stored.vertices()
                } else {
                    segment.iter().rev().eq(stored.vertices().iter())
                };
                if !matches && reported.insert((sub, pair)) {
                    violations.push(Violation {
                        kind: ViolationKind::SubpathMismatch,
                        pairs: vec![pair_of(sub), pair_of(pair)],
                        witness: Some(segment.to_vec()),
                    });
                }
            }
        }
    }

    let graph = g.cloned().or_else(|| ps.explicit_graph().cloned());
    if let Some(graph) = &graph {
        for (pair, path) in ps.iter() {
            if let Some((a, b)) = path.edges().find(|&(a, b)| !graph.has_edge(a, b)) {
                violations.push(Violation {
                    kind: ViolationKind::EdgeNotInGraph,
                    pairs: vec![pair_of(pair)],
                    witness: Some(vec![a, b]),
                });
            }
        }
    }
    let graph = graph.unwrap_or_else(|| ps.induced_graph());
    let neighborly = graph
        .edges()
        .all(|e| ps.path(e.lo(), e.hi()).is_some_and(|p| p.hops() == 1));

    ConsistencyReport {
        consistent: violations.is_empty(),
        neighborly,
        violations,
    }
}

// ---------------------------------------------------------------------------
// pathsys/v1

pub const PATHSYS_FORMAT: &str = "pathsys/v1";

#[derive(Debug, Serialize, Deserialize)]
struct PathEntryJson {
    u: Vertex,
    v: Vertex,
    seq: Vec<Vertex>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PathSystemJson {
    format: String,
    n: usize,
    paths: Vec<PathEntryJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    graph_edges: Option<Vec<(Vertex, Vertex)>>,
}

impl PathSystem {
    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = PathSystemJson {
            format: PATHSYS_FORMAT.to_string(),
            n: self.n,
            paths: self
                .iter()
                .map(|(pair, p)| PathEntryJson {
                    u: pair.lo(),
                    v: pair.hi(),
                    seq: p.vertices().to_vec(),
                })
                .collect(),
            graph_edges: self
                .graph
                .as_ref()
                .map(|g| g.edges().map(|e| (e.lo(), e.hi())).collect()),
        };
        serde_json::to_value(doc).expect("path system serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("path system serializes")
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self, PathError> {
        let doc: PathSystemJson =
            serde_json::from_value(value).map_err(|e| PathError::Format(e.to_string()))?;
        if doc.format != PATHSYS_FORMAT {
            return Err(PathError::Format(format!(
                "expected format {PATHSYS_FORMAT}, found {}",
                doc.format
            )));
        }
        let mut entries = Vec::with_capacity(doc.paths.len());
        for e in doc.paths {
            entries.push((e.u, e.v, Path::new(e.seq)?));
        }
        let ps = PathSystem::from_entries(doc.n, entries)?.with_origin(Origin::Loaded);
        match doc.graph_edges {
            Some(edges) => ps.with_graph(Graph::new(doc.n, edges)?),
            None => Ok(ps),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, PathError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PathError::Format(e.to_string()))?;
        Self::from_json_value(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn p(seq: &[Vertex]) -> Path {
        Path::new(seq.to_vec()).unwrap()
    }

    fn tree_system(n: usize) -> PathSystem {
        let paths = Pair::all(n).map(|pair| p(&(pair.lo()..=pair.hi()).collect::<Vec<_>>()));
        PathSystem::from_paths(n, paths).unwrap()
    }

    #[test]
    fn pair_index_is_lexicographic() {
        for (i, pair) in Pair::all(7).enumerate() {
            assert_eq!(pair.index(7), i);
        }
    }

    #[test]
    fn subpath_examples() {
        assert_eq!(subpath(&p(&[2, 1, 6, 8]), 1, 8).unwrap(), p(&[1, 6, 8]));
        assert_eq!(subpath(&p(&[0, 1, 2, 3]), 3, 1).unwrap(), p(&[3, 2, 1]));
        assert_eq!(subpath(&p(&[0, 1, 2, 3]), 2, 2).unwrap(), p(&[2]));
        assert_eq!(
            subpath(&p(&[0, 1, 2]), 0, 5),
            Err(PathError::VertexNotOnPath(5))
        );
    }

    #[test]
    fn path_cost_examples() {
        let w = PairWeights::uniform(5, int(1));
        assert_eq!(path_cost(&p(&[0, 1, 2, 3]), &w).unwrap(), int(3));
        assert_eq!(path_cost(&p(&[4]), &w).unwrap(), int(0));
        let mut partial = PairWeights::new();
        partial.insert(0, 1, int(2)).unwrap();
        assert_eq!(
            path_cost(&p(&[0, 1, 2]), &partial),
            Err(PathError::MissingWeight(Pair::new(1, 2)))
        );
        assert_eq!(
            partial.insert(1, 2, int(0)),
            Err(PathError::NonPositiveWeight(Pair::new(1, 2)))
        );
    }

    #[test]
    fn path_graph_system_is_consistent_and_neighborly() {
        let ps = tree_system(5).with_graph(Graph::path_graph(5)).unwrap();
        let report = validate_system(&ps, None);
        assert!(report.consistent, "{:?}", report.violations);
        assert!(report.neighborly);
    }

    #[test]
    fn triangle_detour_conflict() {
        let ps = PathSystem::from_paths(3, [p(&[0, 1, 2]), p(&[0, 2, 1]), p(&[1, 2])]).unwrap();
        let report = validate_system(&ps, None);
        assert!(!report.consistent);
        assert!(report.violations.iter().any(|v| v.kind == ViolationKind::SubpathMismatch
            && v.pairs[0] == (0, 1)));
    }

    #[test]
    fn malformed_entries_are_reported() {
        let ps = PathSystem::from_entries(
            4,
            [
                (0, 1, p(&[0, 1])),
                (0, 2, p(&[0, 1, 0, 2])),
                (0, 3, p(&[1, 3])),
                (1, 2, p(&[1, 2])),
                (1, 3, p(&[1, 3])),
            ],
        )
        .unwrap();
        let kinds: BTreeSet<_> = validate_system(&ps, None)
            .violations
            .iter()
            .map(|v| format!("{:?}", v.kind))
            .collect();
        assert!(kinds.contains("NotSimple"));
        assert!(kinds.contains("EndpointMismatch"));
        assert!(kinds.contains("MissingPair"));
    }

    #[test]
    fn graph_membership_and_neighborliness() {
        // 0-1-2 path with the detour system on a triangle graph
        let ps = tree_system(3);
        let report = validate_system(&ps, Some(&Graph::complete(3)));
        assert!(report.consistent);
        assert!(!report.neighborly);
        let report = validate_system(&ps, Some(&Graph::new(3, [(0, 1)]).unwrap()));
        assert!(!report.consistent);
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::EdgeNotInGraph));
    }

    #[test]
    fn reversed_input_is_reoriented() {
        let ps = PathSystem::from_entries(3, [(2, 0, p(&[2, 1, 0])), (0, 1, p(&[0, 1])), (1, 2, p(&[2, 1]))])
            .unwrap();
        assert_eq!(ps.path(0, 2).unwrap(), &p(&[0, 1, 2]));
        assert_eq!(ps.oriented(2, 0).unwrap(), p(&[2, 1, 0]));
        assert!(validate_system(&ps, None).consistent);
    }

    #[test]
    fn json_round_trip() {
        let ps = tree_system(4).with_graph(Graph::path_graph(4)).unwrap();
        let back = PathSystem::from_json(&ps.to_json()).unwrap();
        assert_eq!(back.with_origin(Origin::Constructed), ps);
        assert!(PathSystem::from_json(r#"{"format":"other","n":1,"paths":[]}"#).is_err());
    }
}
