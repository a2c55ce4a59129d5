//! Path systems invariant under the cyclic group `Z_n`.
//!
//! An invariant system is described by a [`WordTable`]: for each nonzero
//! `x` a word of generators summing to `x`. The path from `a` to `a + x` is
//! the walk of prefix sums of `word(x)` started at `a`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_integer::Integer;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::pathsystem::{Graph, Origin, Path, PathError, PathSystem};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(usize),
    #[error("word table violates closure at {x}: {detail}")]
    WordClosureViolation { x: usize, detail: String },
    #[error("generator {g} has order {order}, which does not exceed 2m = {}", 2 * m)]
    ConditionOrder { g: usize, order: usize, m: usize },
    #[error("collision {i}*{g} = {j}*{h}")]
    ConditionCollision { g: usize, i: usize, h: usize, j: usize },
    #[error("generator set is not symmetric: {0} present without its inverse")]
    NotSymmetric(usize),
    #[error("generator set contains the identity")]
    IdentityGenerator,
    #[error("no admissible generator set after {attempts} attempts")]
    SamplingExhausted { attempts: usize },
    #[error("{p} is not admissible: {reason}")]
    InvalidPrime { p: usize, reason: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CyclicGroup {
    n: usize,
}

impl CyclicGroup {
    pub fn new(n: usize) -> Result<Self, GroupError> {
        if n < 2 {
            return Err(GroupError::InvalidModulus(n));
        }
        Ok(CyclicGroup { n })
    }

    pub fn n(self) -> usize {
        self.n
    }

    pub fn reduce(self, x: i64) -> usize {
        x.rem_euclid(self.n as i64) as usize
    }

    pub fn add(self, a: usize, b: usize) -> usize {
        (a + b) % self.n
    }

    pub fn neg(self, a: usize) -> usize {
        (self.n - a % self.n) % self.n
    }

    pub fn mul(self, k: usize, a: usize) -> usize {
        ((k as u128 * a as u128) % self.n as u128) as usize
    }

    pub fn order(self, g: usize) -> usize {
        self.n / self.n.gcd(&(g % self.n))
    }

    /// Class id of `{a, -a}`, in `1..=n/2` for `a != 0`.
    pub fn class(self, a: usize) -> usize {
        let a = a % self.n;
        a.min(self.n - a)
    }

    /// Signed representative in `(-n/2, n/2]`.
    pub fn signed(self, a: usize) -> i64 {
        let a = a % self.n;
        if 2 * a > self.n {
            a as i64 - self.n as i64
        } else {
            a as i64
        }
    }
}

/// Words `word(x)` for every nonzero `x` of `Z_n`, letters stored as residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordTable {
    group: CyclicGroup,
    words: BTreeMap<usize, Vec<usize>>,
}

impl WordTable {
    /// Letters are reduced mod `n`; no closure checks are performed here.
    pub fn new(n: usize, words: impl IntoIterator<Item = (i64, Vec<i64>)>) -> Result<Self, GroupError> {
        let group = CyclicGroup::new(n)?;
        let words = words
            .into_iter()
            .map(|(x, w)| (group.reduce(x), w.into_iter().map(|l| group.reduce(l)).collect()))
            .collect();
        Ok(WordTable { group, words })
    }

    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn n(&self) -> usize {
        self.group.n
    }

    pub fn word(&self, x: usize) -> Option<&[usize]> {
        self.words.get(&(x % self.n())).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.words.iter().map(|(x, w)| (*x, w.as_slice()))
    }

    /// Distinct letters, ascending.
    pub fn generators(&self) -> BTreeSet<usize> {
        self.words.values().flatten().copied().collect()
    }

    /// Checks that every word sums to its element, the inversion rule
    /// `word(-x) = -reverse(word(x))`, and that every contiguous subword is
    /// the word of its sum.
    pub fn validate(&self) -> Result<(), GroupError> {
        let g = self.group;
        let n = g.n;
        let violation = |x: usize, detail: String| GroupError::WordClosureViolation { x, detail };
        if let Some(&x) = self.words.keys().find(|&&x| x == 0) {
            return Err(violation(x, "the identity has no word".into()));
        }
        for x in 1..n {
            let Some(w) = self.words.get(&x) else {
                return Err(violation(x, "missing word".into()));
            };
            if w.is_empty() {
                return Err(violation(x, "empty word".into()));
            }
            let sum = w.iter().fold(0, |acc, &l| g.add(acc, l));
            if sum != x {
                return Err(violation(x, format!("letters sum to {sum}")));
            }
        }
        for (&x, w) in &self.words {
            let inverse: Vec<usize> = w.iter().rev().map(|&l| g.neg(l)).collect();
            if self.words[&g.neg(x)] != inverse {
                return Err(violation(
                    g.neg(x),
                    format!("inversion of word({}) requires {:?}", g.signed(x), signed_word(g, &inverse)),
                ));
            }
            for start in 0..w.len() {
                let mut sum = 0;
                for end in start..w.len() {
                    sum = g.add(sum, w[end]);
                    let sub = &w[start..=end];
                    if sum == 0 {
                        return Err(violation(x, format!("subword {:?} returns to the start", signed_word(g, sub))));
                    }
                    if sub.len() < w.len() && self.words[&sum] != sub {
                        return Err(violation(
                            sum,
                            format!(
                                "subword {:?} of word({}) must equal word({})",
                                signed_word(g, sub),
                                g.signed(x),
                                g.signed(sum)
                            ),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Vertex walk from 0 following `word(x)`.
    pub fn walk(&self, x: usize) -> Option<Vec<usize>> {
        let w = self.word(x)?;
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut at = 0;
        out.push(0);
        for &l in w {
            at = self.group.add(at, l);
            out.push(at);
        }
        Some(out)
    }

    pub fn to_json_value(&self) -> Value {
        let g = self.group;
        let words: serde_json::Map<String, Value> = self
            .words
            .iter()
            .map(|(x, w)| (x.to_string(), json!(signed_word(g, w))))
            .collect();
        json!({
            "format": "pathsys-invariant/v1",
            "group": {"type": "cyclic", "n": g.n},
            "words": words,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("json value serializes")
    }

    pub fn from_json_value(v: Value) -> Result<Self, GroupError> {
        let bad = |m: &str| GroupError::Format(m.to_string());
        if v.get("format").and_then(Value::as_str) != Some("pathsys-invariant/v1") {
            return Err(bad("expected format pathsys-invariant/v1"));
        }
        let group = v.get("group").ok_or_else(|| bad("missing group"))?;
        if group.get("type").and_then(Value::as_str) != Some("cyclic") {
            return Err(bad("only cyclic groups are supported"));
        }
        let n = group
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("group.n must be a nonnegative integer"))? as usize;
        let words = v.get("words").and_then(Value::as_object).ok_or_else(|| bad("missing words"))?;
        let mut entries = Vec::new();
        for (k, w) in words {
            let x: i64 = k.trim().parse().map_err(|_| bad(&format!("bad element key {k:?}")))?;
            let letters = w
                .as_array()
                .ok_or_else(|| bad(&format!("word for {k} is not a list")))?
                .iter()
                .map(|l| l.as_i64().ok_or_else(|| bad(&format!("bad letter in word {k}"))))
                .collect::<Result<Vec<_>, _>>()?;
            entries.push((x, letters));
        }
        let table = WordTable::new(n, entries)?;
        if table.words.len() != words.len() {
            return Err(bad("two keys name the same element"));
        }
        Ok(table)
    }

    pub fn from_json(text: &str) -> Result<Self, GroupError> {
        let v: Value = serde_json::from_str(text).map_err(|e| GroupError::Format(e.to_string()))?;
        Self::from_json_value(v)
    }
}

fn signed_word(g: CyclicGroup, w: &[usize]) -> Vec<i64> {
    w.iter().map(|&l| g.signed(l)).collect()
}

/// Expands a valid word table to the full system `P_{x,y} = x + P_{0,y-x}`.
pub fn build_from_words(wt: &WordTable) -> Result<PathSystem, GroupError> {
    wt.validate()?;
    let g = wt.group;
    let n = g.n;
    let walks: Vec<Vec<usize>> = (0..n).map(|x| if x == 0 { vec![0] } else { wt.walk(x).expect("validated") }).collect();
    let mut entries = Vec::with_capacity(n * (n - 1) / 2);
    for x in 0..n {
        for y in x + 1..n {
            let seq = walks[g.add(y, g.neg(x))].iter().map(|&v| g.add(v, x)).collect();
            entries.push((x, y, Path::new(seq)?));
        }
    }
    Ok(PathSystem::from_entries(n, entries)?.with_origin(Origin::InvariantExpanded))
}

/// Breadth-first distances from 0 in the Cayley graph `Γ(Z_n, X)`.
pub fn bfs_all(n: usize, x: &[usize]) -> Vec<Option<usize>> {
    let mut dist = vec![None; n];
    if n == 0 {
        return dist;
    }
    dist[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].expect("queued vertices are labelled");
        for &g in x {
            let w = (v + g % n) % n;
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn bfs_distance(n: usize, x: &[usize], target: usize) -> Option<usize> {
    bfs_all(n, x)[target % n]
}

/// Largest BFS distance from 0; `None` if some element is unreachable.
pub fn cayley_diameter(n: usize, x: &[usize]) -> Option<usize> {
    bfs_all(n, x).into_iter().try_fold(0, |acc, d| d.map(|d| acc.max(d)))
}

/// First `(g, i, h, j)` with `i·g = j·h`, `g != ±h`, `1 <= i, j <= m`.
/// `x` is assumed symmetric, so signed multiples are covered.
pub fn find_collision(n: usize, x: &[usize], m: usize) -> Option<(usize, usize, usize, usize)> {
    let g = CyclicGroup { n };
    let mut seen: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut hits = Vec::new();
    let mut sorted = x.to_vec();
    sorted.sort_unstable();
    for &a in &sorted {
        for i in 1..=m {
            let v = g.mul(i, a);
            match seen.get(&v) {
                Some(&(b, j)) if b != a && b != g.neg(a) => hits.push((b, j, a, i)),
                Some(_) => {}
                None => {
                    seen.insert(v, (a, i));
                }
            }
        }
    }
    // report the witness with the smallest generator, then smallest multiple
    hits.into_iter().min_by_key(|&(b, j, a, i)| (b, j, a, i)).map(|(b, j, a, i)| (b, j, a, i))
}

/// `(n, X, m, d, bound, S)` of the Cayley lower-bound construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyParams {
    pub n: usize,
    /// Symmetric generator set, ascending residues.
    pub x: Vec<usize>,
    pub m: usize,
    pub d: usize,
    pub bound: Rational,
    /// Connection set: `X` plus every element that is not a multiple
    /// `i·g` with `g ∈ X`, `1 <= i <= m`.
    pub s: Vec<usize>,
}

impl CayleyParams {
    pub fn to_json_value(&self) -> Value {
        let g = CyclicGroup { n: self.n };
        json!({
            "n": self.n,
            "x": self.x.iter().map(|&a| g.signed(a)).collect::<Vec<_>>(),
            "m": self.m,
            "d": self.d,
            "bound": crate::rational::to_string(&self.bound),
            "bound_decimal": crate::rational::to_decimal(&self.bound, 8),
            "s_size": self.s.len(),
        })
    }
}

/// Reduces and symmetrizes a generator list given with signs.
pub fn symmetric_set(n: usize, gens: &[i64]) -> Vec<usize> {
    let g = CyclicGroup { n };
    let mut out: BTreeSet<usize> = BTreeSet::new();
    for &a in gens {
        let r = g.reduce(a);
        out.insert(r);
        out.insert(g.neg(r));
    }
    out.into_iter().collect()
}

/// Checks the three construction conditions and emits the word table:
/// `word(i·c) = (c; i times)` for the class representative `c` of each
/// generator pair, and `word(y) = (y)` for every other nonzero `y`.
pub fn cayley_construction(n: usize, x: &[i64], m: usize) -> Result<(CayleyParams, WordTable), GroupError> {
    let g = CyclicGroup::new(n)?;
    if m == 0 {
        return Err(GroupError::InvalidParameter("m must be at least 1".into()));
    }
    let xs: BTreeSet<usize> = x.iter().map(|&a| g.reduce(a)).collect();
    if xs.is_empty() {
        return Err(GroupError::InvalidParameter("empty generator set".into()));
    }
    if xs.contains(&0) {
        return Err(GroupError::IdentityGenerator);
    }
    if let Some(&a) = xs.iter().find(|&&a| !xs.contains(&g.neg(a))) {
        return Err(GroupError::NotSymmetric(a));
    }
    let xs: Vec<usize> = xs.into_iter().collect();
    for &a in &xs {
        let order = g.order(a);
        if order <= 2 * m {
            return Err(GroupError::ConditionOrder { g: a, order, m });
        }
    }
    if let Some((a, i, b, j)) = find_collision(n, &xs, m) {
        return Err(GroupError::ConditionCollision { g: a, i, h: b, j });
    }
    let mut words: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &a in &xs {
        for i in 1..=m {
            words.insert(g.mul(i, a), vec![a; i]);
        }
    }
    let s: Vec<usize> = (1..n).filter(|y| xs.contains(y) || !words.contains_key(y)).collect();
    for &y in &s {
        words.entry(y).or_insert_with(|| vec![y]);
    }
    let table = WordTable { group: g, words };
    table.validate()?;
    let dist = bfs_all(n, &xs);
    let mut d = 0;
    for &a in &xs {
        match dist[g.mul(m, a)] {
            Some(k) => d = d.max(k),
            None => return Err(GroupError::InvalidParameter(format!("{} unreachable from 0", g.mul(m, a)))),
        }
    }
    let bound = Rational::new(m.into(), (d * xs.len()).into());
    Ok((
        CayleyParams {
            n,
            x: xs,
            m,
            d,
            bound,
            s,
        },
        table,
    ))
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `m = ⌊√n / ⌈log₂ n⌉²⌋`, the horizon suggested by the asymptotic argument.
pub fn default_horizon(n: usize) -> usize {
    if n < 2 {
        return 0;
    }
    let log = (usize::BITS - (n - 1).leading_zeros()) as usize;
    ((n as f64).sqrt() / (log * log) as f64).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleOutcome {
    /// Symmetrized generator set, ascending residues.
    pub x: Vec<usize>,
    pub attempts: usize,
    pub diameter: Option<usize>,
}

/// Draws `k` random classes `{a, -a}` of `Z_n` until the symmetrized set has
/// no forbidden pair and every element has order above `2m`.
pub fn sample_x(n: usize, k: usize, m: usize, seed: u64, max_attempts: usize) -> Result<SampleOutcome, GroupError> {
    if !is_prime(n) {
        return Err(GroupError::InvalidPrime {
            p: n,
            reason: "modulus is not prime".into(),
        });
    }
    if k < 2 || m < 1 {
        return Err(GroupError::InvalidParameter("need k >= 2 and m >= 1".into()));
    }
    if k > (n - 1) / 2 {
        return Err(GroupError::InvalidParameter(format!("k = {k} exceeds the {} classes of Z_{n}", (n - 1) / 2)));
    }
    let g = CyclicGroup { n };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=max_attempts {
        let mut classes = BTreeSet::new();
        while classes.len() < k {
            let a = rng.gen_range(1..n);
            classes.insert(g.class(a));
        }
        let x: Vec<usize> = symmetric_set(n, &classes.iter().map(|&c| c as i64).collect::<Vec<_>>());
        if x.iter().any(|&a| g.order(a) <= 2 * m) || find_collision(n, &x, m).is_some() {
            continue;
        }
        let diameter = cayley_diameter(n, &x);
        return Ok(SampleOutcome {
            x,
            attempts: attempt,
            diameter,
        });
    }
    Err(GroupError::SamplingExhausted { attempts: max_attempts })
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

pub fn is_quadratic_residue(x: usize, p: usize) -> bool {
    !x.is_multiple_of(p) && pow_mod(x as u64, (p as u64 - 1) / 2, p as u64) == 1
}

/// Paley words: a residue is its own letter, `±3` goes in unit steps, any
/// other non-residue is split into two equal halves.
pub fn paley_system(p: usize) -> Result<WordTable, GroupError> {
    let fail = |reason: &str| GroupError::InvalidPrime { p, reason: reason.to_string() };
    if !is_prime(p) {
        return Err(fail("not prime"));
    }
    if p % 4 != 1 {
        return Err(fail("p is not 1 mod 4"));
    }
    if is_quadratic_residue(2, p) {
        return Err(fail("2 is a quadratic residue"));
    }
    if is_quadratic_residue(3, p) {
        return Err(fail("3 is a quadratic residue"));
    }
    let g = CyclicGroup { n: p };
    let half = p.div_ceil(2);
    let mut words = BTreeMap::new();
    for x in 1..p {
        let w = if is_quadratic_residue(x, p) {
            vec![x]
        } else if x == 3 {
            vec![1, 1, 1]
        } else if x == p - 3 {
            vec![p - 1; 3]
        } else {
            vec![g.mul(half, x); 2]
        };
        words.insert(x, w);
    }
    let table = WordTable { group: g, words };
    // small primes where 3 = -2 (p = 5) break the rules
    table.validate().map_err(|e| fail(&format!("rules are ill-formed: {e}")))?;
    Ok(table)
}

/// The ten-vertex Petersen system: outer cycle 0..4, inner pentagram 5..9
/// with spokes `i - (i+5)`, five 3-hop paths and all other pairs on their
/// unique shortest path.
pub fn petersen_system() -> PathSystem {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    let graph = Graph::new(10, edges).expect("valid edges");
    let long = [
        vec![1, 0, 5, 7],
        vec![2, 1, 6, 8],
        vec![3, 2, 7, 9],
        vec![4, 3, 8, 5],
        vec![0, 4, 9, 6],
    ];
    let mut entries = Vec::new();
    for u in 0..10 {
        for v in u + 1..10 {
            let seq = if graph.has_edge(u, v) {
                vec![u, v]
            } else if let Some(p) = long.iter().find(|p| {
                (p[0] == u && p[3] == v) || (p[0] == v && p[3] == u)
            }) {
                p.clone()
            } else {
                let nu = graph.neighbors(u);
                let mid = graph
                    .neighbors(v)
                    .into_iter()
                    .find(|w| nu.contains(w))
                    .expect("Petersen graph has diameter 2");
                vec![u, mid, v]
            };
            entries.push((u, v, Path::new(seq).expect("nonempty")));
        }
    }
    PathSystem::from_entries(10, entries)
        .and_then(|ps| ps.with_graph(graph))
        .expect("hard-coded system is well formed")
        .with_origin(Origin::Constructed)
}
