//! Brute-force references: shortest-path systems, exhaustive enumeration of
//! consistent systems on small complete graphs, and direct stretch
//! evaluation.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::pathsystem::{path_cost, subpath, Graph, Pair, PairWeights, Path, PathError, PathSystem, Vertex};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("shortest path between {0} is not unique")]
    AmbiguousShortestPath(Pair),
    #[error("no path between {0}")]
    Disconnected(Pair),
    #[error("weights are not a metric: {0}")]
    NotAMetric(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// All-pairs distances under positive edge weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Vec<Rational>>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: Vertex, v: Vertex) -> &Rational {
        &self.d[u][v]
    }

    pub fn to_pair_weights(&self) -> PairWeights {
        let mut w = PairWeights::new();
        for p in Pair::all(self.n) {
            w.insert(p.lo(), p.hi(), self.d[p.lo()][p.hi()].clone())
                .expect("distances between distinct vertices are positive");
        }
        w
    }

    /// Restricts the distances to the edges of `g`.
    pub fn edge_weights(&self, g: &Graph) -> PairWeights {
        let mut w = PairWeights::new();
        for e in g.edges() {
            w.insert(e.lo(), e.hi(), self.d[e.lo()][e.hi()].clone())
                .expect("distances between distinct vertices are positive");
        }
        w
    }
}

/// The system of unique weighted shortest paths of a connected graph.
///
/// Uniqueness is decided exactly by counting shortest routes from every
/// source; any pair reached by two routes is an error, never a tie-break.
pub fn shortest_path_system(g: &Graph, w: &PairWeights) -> Result<(PathSystem, DistanceMatrix), OracleError> {
    let n = g.n();
    let mut adj: Vec<Vec<(Vertex, Rational)>> = vec![Vec::new(); n];
    for e in g.edges() {
        let c = w.weight(e.lo(), e.hi())?.clone();
        if !c.is_positive() {
            return Err(PathError::NonPositiveWeight(e).into());
        }
        adj[e.lo()].push((e.hi(), c.clone()));
        adj[e.hi()].push((e.lo(), c));
    }
    let mut dist = vec![vec![Rational::zero(); n]; n];
    let mut entries = Vec::new();
    for s in 0..n {
        let (d, pred) = dijkstra(&adj, s)?;
        for v in s + 1..n {
            let pair = Pair::new(s, v);
            let dv = d[v].clone().ok_or(OracleError::Disconnected(pair))?;
            if pred[v].len() != 1 {
                return Err(OracleError::AmbiguousShortestPath(pair));
            }
            let mut seq = vec![v];
            let mut x = v;
            while x != s {
                x = pred[x][0];
                seq.push(x);
            }
            seq.reverse();
            entries.push((s, v, Path::new(seq)?));
            dist[s][v] = dv.clone();
            dist[v][s] = dv;
        }
    }
    let ps = PathSystem::from_entries(n, entries)?.with_graph(g.clone())?;
    Ok((ps, DistanceMatrix { n, d: dist }))
}

type Preds = Vec<Vec<Vertex>>;

/// Distances from `s` and, per vertex, every predecessor on a shortest
/// route; a vertex is uniquely reached iff it and all its ancestors have
/// exactly one predecessor, which is what the caller needs since the
/// ambiguity of an ancestor propagates to the first pair that hits it.
fn dijkstra(adj: &[Vec<(Vertex, Rational)>], s: Vertex) -> Result<(Vec<Option<Rational>>, Preds), OracleError> {
    let n = adj.len();
    let mut d: Vec<Option<Rational>> = vec![None; n];
    let mut pred: Preds = vec![Vec::new(); n];
    let mut done = vec![false; n];
    // routes[v] = number of shortest routes, capped at 2
    let mut routes = vec![0u8; n];
    d[s] = Some(Rational::zero());
    routes[s] = 1;
    loop {
        let next = (0..n)
            .filter(|&v| !done[v] && d[v].is_some())
            .min_by(|&a, &b| d[a].cmp(&d[b]));
        let Some(u) = next else { break };
        done[u] = true;
        let du = d[u].clone().expect("selected vertex has a distance");
        for (v, c) in &adj[u] {
            let alt = &du + c;
            match d[*v].as_ref().map(|dv| alt.cmp(dv)) {
                None | Some(Ordering::Less) => {
                    d[*v] = Some(alt);
                    pred[*v] = vec![u];
                    routes[*v] = routes[u];
                }
                Some(Ordering::Equal) => {
                    pred[*v].push(u);
                    routes[*v] = (routes[*v] + routes[u]).min(2);
                }
                Some(Ordering::Greater) => {}
            }
        }
    }
    for v in 0..n {
        if routes[v] > 1 && pred[v].len() == 1 {
            // ambiguity inherited from an ancestor: mark it so the caller sees it
            let first = pred[v][0];
            pred[v].push(first);
        }
    }
    Ok((d, pred))
}

/// Seeded integer weights in `1..=10^6` on the edges of `g`; ties among
/// path sums are unlikely but not excluded.
pub fn random_weights(g: &Graph, seed: u64) -> PairWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = PairWeights::new();
    for e in g.edges() {
        let c: i64 = rng.gen_range(1..=1_000_000);
        w.insert(e.lo(), e.hi(), Rational::from_integer(c.into())).expect("positive weight");
    }
    w
}

/// Every simple path from `a` to `b` in `K_n`, by (hops, sequence).
pub fn complete_graph_paths(n: usize, a: Vertex, b: Vertex) -> Vec<Path> {
    fn extend(n: usize, b: Vertex, seq: &mut Vec<Vertex>, used: &mut [bool], out: &mut Vec<Vec<Vertex>>) {
        let last = *seq.last().expect("nonempty");
        if last == b {
            out.push(seq.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                seq.push(v);
                extend(n, b, seq, used, out);
                seq.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; n];
    used[a] = true;
    extend(n, b, &mut vec![a], &mut used, &mut out);
    out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    out.into_iter().map(|s| Path::new(s).expect("nonempty sequence")).collect()
}

/// Lazy enumeration of the consistent path systems on `K_n`.
///
/// Pairs are assigned in lexicographic order, candidates per pair in
/// (hops, sequence) order, so the stream order is deterministic. Partial
/// assignments are pruned as soon as two chosen paths disagree on a shared
/// subpath; complete ones are re-checked with the full validator.
pub struct ConsistentSystems {
    n: usize,
    cands: Vec<Vec<Path>>,
    chosen: Vec<usize>,
    cursor: Vec<usize>,
    depth: usize,
    done: bool,
}

pub fn enumerate_consistent_systems(n: usize) -> Result<ConsistentSystems, OracleError> {
    if !(2..=5).contains(&n) {
        return Err(OracleError::InvalidParameter(format!("enumeration needs 2 <= n <= 5, got {n}")));
    }
    let cands: Vec<Vec<Path>> = Pair::all(n).map(|p| complete_graph_paths(n, p.lo(), p.hi())).collect();
    let len = cands.len();
    Ok(ConsistentSystems {
        n,
        cands,
        chosen: vec![0; len],
        cursor: vec![0; len],
        depth: 0,
        done: false,
    })
}

/// Whether `a` and `b` agree wherever one contains both ends of the other.
fn agree(a: &Path, b: &Path) -> bool {
    let inside = |small: &Path, big: &Path| {
        if big.position(small.first()).is_none() || big.position(small.last()).is_none() {
            return true;
        }
        subpath(big, small.first(), small.last()).is_ok_and(|s| s == *small)
    };
    inside(a, b) && inside(b, a)
}

impl ConsistentSystems {
    fn build(&self) -> PathSystem {
        let entries = Pair::all(self.n)
            .zip(&self.chosen)
            .zip(&self.cands)
            .map(|((p, &c), cands)| (p.lo(), p.hi(), cands[c].clone()));
        PathSystem::from_entries(self.n, entries)
            .and_then(|ps| ps.with_graph(Graph::complete(self.n)))
            .expect("candidates are valid paths of K_n")
    }
}

impl Iterator for ConsistentSystems {
    type Item = PathSystem;

    fn next(&mut self) -> Option<PathSystem> {
        let len = self.cands.len();
        if self.done {
            return None;
        }
        if self.depth == len {
            self.depth = len - 1;
        }
        loop {
            let d = self.depth;
            let mut found = false;
            while self.cursor[d] < self.cands[d].len() {
                let c = self.cursor[d];
                self.cursor[d] += 1;
                let path = &self.cands[d][c];
                if (0..d).all(|e| agree(path, &self.cands[e][self.chosen[e]])) {
                    self.chosen[d] = c;
                    found = true;
                    break;
                }
            }
            if found {
                if d + 1 == len {
                    self.depth = len;
                    let ps = self.build();
                    if crate::pathsystem::validate_system(&ps, None).consistent {
                        return Some(ps);
                    }
                    self.depth = len - 1;
                } else {
                    self.depth = d + 1;
                    self.cursor[d + 1] = 0;
                }
            } else if d == 0 {
                self.done = true;
                return None;
            } else {
                self.depth = d - 1;
            }
        }
    }
}

/// `max path_cost(P_{u,v}) / w(u,v)`: the stretch achieved by this
/// particular metric, an upper bound on `Δ(P)`.
pub fn naive_stretch(ps: &PathSystem, w: &PairWeights) -> Result<Rational, OracleError> {
    let n = ps.n();
    let get = |u: Vertex, v: Vertex| -> Result<Rational, OracleError> {
        let x = w
            .get(u, v)
            .ok_or_else(|| OracleError::NotAMetric(format!("no weight for {}", Pair::new(u, v))))?;
        if !x.is_positive() {
            return Err(OracleError::NotAMetric(format!("nonpositive weight on {}", Pair::new(u, v))));
        }
        Ok(x.clone())
    };
    for p in Pair::all(n) {
        let (a, b) = (p.lo(), p.hi());
        let ab = get(a, b)?;
        for c in (0..n).filter(|&c| c != a && c != b) {
            if ab > get(a, c)? + get(c, b)? {
                return Err(OracleError::NotAMetric(format!("triangle {a},{b} via {c}")));
            }
        }
    }
    let mut best = Rational::from_integer(1.into());
    for (p, path) in ps.iter() {
        let s = path_cost(path, w)? / get(p.lo(), p.hi())?;
        if s > best {
            best = s;
        }
    }
    Ok(best)
}
