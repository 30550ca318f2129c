//! d-uniform hypergraphs with exact labeled-copy counting.
//!
//! Vertices are `0..n`. Edges are stored as strictly ascending tuples; for
//! `d = 2` a symmetric adjacency bit matrix is kept alongside the edge set
//! and drives the fast counting paths. Counting is *labeled*: a copy of a
//! motif is an arbitrary map from motif labels into vertices whose edge
//! images all lie in the graph, and an edge image only counts when its
//! vertices are pairwise distinct.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use itertools::Itertools;
use num::bigint::BigUint;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;

/// Per-edge labeled-copy participation counts, sorted by edge.
pub(crate) type EdgeCopyCounts = Vec<(Vec<usize>, u128)>;

/// Symmetric adjacency bit matrix for `d = 2` graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            bits: vec![0u64; n * words],
        }
    }

    fn set(&mut self, u: usize, v: usize, on: bool) {
        let (wu, bu) = (u * self.words + v / 64, v % 64);
        let (wv, bv) = (v * self.words + u / 64, u % 64);
        if on {
            self.bits[wu] |= 1 << bu;
            self.bits[wv] |= 1 << bv;
        } else {
            self.bits[wu] &= !(1 << bu);
            self.bits[wv] &= !(1 << bv);
        }
    }

    fn get(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    fn common_neighbors(&self, u: usize, v: usize) -> u64 {
        self.row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }
}

/// Finite d-uniform hypergraph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    d: usize,
    n: usize,
    edges: BTreeSet<Vec<usize>>,
    adj: Option<BitMatrix>,
}

impl Hypergraph {
    /// Builds a normalized hypergraph. Edges may arrive in any vertex
    /// order and with duplicates; vertices inside one edge must be
    /// distinct and in range.
    pub fn build<I, E>(n: usize, d: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[usize]>,
    {
        if n == 0 {
            return Err(Error::input("vertex count must be at least 1"));
        }
        if d == 0 {
            return Err(Error::input("uniformity must be at least 1"));
        }
        let mut set = BTreeSet::new();
        for raw in edges {
            let raw = raw.as_ref();
            if raw.len() != d {
                return Err(Error::input(format!(
                    "edge {:?} has {} vertices, expected {}",
                    raw,
                    raw.len(),
                    d
                )));
            }
            let mut e = raw.to_vec();
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::input(format!("edge {raw:?} repeats a vertex")));
            }
            if *e.last().unwrap() >= n {
                return Err(Error::input(format!(
                    "edge {raw:?} references a vertex outside 0..{n}"
                )));
            }
            set.insert(e);
        }
        let adj = if d == 2 {
            let mut m = BitMatrix::new(n);
            for e in &set {
                m.set(e[0], e[1], true);
            }
            Some(m)
        } else {
            None
        };
        Ok(Hypergraph {
            d,
            n,
            edges: set,
            adj,
        })
    }

    /// Complete d-uniform hypergraph on `n` vertices.
    pub fn complete(n: usize, d: usize) -> Result<Self> {
        if d > n {
            return Err(Error::input(format!(
                "complete hypergraph needs d <= n, got d={d} n={n}"
            )));
        }
        Self::build(n, d, (0..n).combinations(d))
    }

    /// Each d-subset included independently with probability `p`;
    /// deterministic given `seed`.
    pub fn random(n: usize, d: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::input(format!("edge probability {p} not in [0,1]")));
        }
        if n == 0 || d == 0 || d > n {
            return Err(Error::input(format!(
                "random hypergraph needs 1 <= d <= n, got d={d} n={n}"
            )));
        }
        let mut rng = rng::stream(seed, 0);
        let edges = (0..n)
            .combinations(d)
            .filter(|_| rng.random::<f64>() < p)
            .collect::<Vec<_>>();
        Self::build(n, d, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.edges.iter()
    }

    /// Membership for a sorted, distinct candidate edge.
    pub fn has_sorted_edge(&self, e: &[usize]) -> bool {
        if self.d == 2 {
            return self.has_pair(e[0], e[1]);
        }
        self.edges.contains(e)
    }

    /// Adjacency probe, `d = 2` only.
    pub fn has_pair(&self, u: usize, v: usize) -> bool {
        match &self.adj {
            Some(m) => u != v && m.get(u, v),
            None => false,
        }
    }

    /// Tests whether the (unsorted, possibly colliding) image of a motif
    /// edge is an edge of the graph: vertices must be pairwise distinct
    /// and the sorted tuple present.
    pub fn image_is_edge(&self, image: &mut [usize]) -> bool {
        if self.d == 2 {
            return self.has_pair(image[0], image[1]);
        }
        image.sort_unstable();
        if image.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        self.edges.contains(image)
    }

    /// Removes one edge (given in any vertex order); returns whether it
    /// was present. Used by removal algorithms before the result is shared.
    pub fn remove_edge(&mut self, edge: &[usize]) -> bool {
        let mut e = edge.to_vec();
        e.sort_unstable();
        let removed = self.edges.remove(&e);
        if removed && self.d == 2 {
            if let Some(m) = &mut self.adj {
                m.set(e[0], e[1], false);
            }
        }
        removed
    }

    /// Relabels vertices by `perm` (a permutation of `0..n`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::input("permutation length must equal vertex count"));
        }
        let mut seen = vec![false; self.n];
        for &v in perm {
            if v >= self.n || seen[v] {
                return Err(Error::input("not a permutation of the vertex set"));
            }
            seen[v] = true;
        }
        let edges: Vec<Vec<usize>> = self
            .edges
            .iter()
            .map(|e| e.iter().map(|&v| perm[v]).collect())
            .collect();
        Self::build(self.n, self.d, edges)
    }

    /// Exact number of labeled copies of `motif`: maps from motif labels
    /// into vertices under which every motif edge lands on an edge.
    pub fn count_labeled_copies(&self, motif: &MotifSpec) -> Result<BigUint> {
        if motif.d != self.d {
            return Err(Error::input(format!(
                "uniformity mismatch: graph d={} motif d={}",
                self.d, motif.d
            )));
        }
        let mut per_edge = None;
        let total = self.enumerate_copies(motif, &mut per_edge);
        Ok(BigUint::from(total))
    }

    /// Labeled copies per graph edge: `counts[e]` is the number of copy
    /// tuples whose edge images include `e`. Shares the enumeration with
    /// [`count_labeled_copies`]; used by greedy removal.
    pub(crate) fn copies_per_edge(&self, motif: &MotifSpec) -> Result<(u128, EdgeCopyCounts)> {
        if motif.d != self.d {
            return Err(Error::input("uniformity mismatch"));
        }
        let mut per_edge = Some(std::collections::HashMap::new());
        let total = self.enumerate_copies(motif, &mut per_edge);
        let mut list: Vec<(Vec<usize>, u128)> = per_edge.unwrap().into_iter().collect();
        list.sort();
        Ok((total, list))
    }

    fn enumerate_copies(
        &self,
        motif: &MotifSpec,
        per_edge: &mut Option<std::collections::HashMap<Vec<usize>, u128>>,
    ) -> u128 {
        if motif.edges.is_empty() {
            // Every assignment qualifies vacuously.
            let mut total = 1u128;
            for _ in 0..motif.v0 {
                total *= self.n as u128;
            }
            return total;
        }
        // Edges become checkable once their largest label is assigned.
        let mut ready_at: Vec<Vec<&Vec<usize>>> = vec![Vec::new(); motif.v0 + 1];
        for e in &motif.edges {
            ready_at[*e.last().unwrap()].push(e);
        }
        match per_edge {
            None => {
                // Pure count: parallel over the first label.
                (0..self.n)
                    .into_par_iter()
                    .map(|x0| {
                        let mut assign = vec![0usize; motif.v0];
                        assign[0] = x0;
                        let mut scratch = vec![0usize; self.d];
                        self.count_rec(motif, &ready_at, &mut assign, 1, &mut scratch, &mut None)
                    })
                    .sum()
            }
            Some(map) => {
                let mut assign = vec![0usize; motif.v0];
                let mut scratch = vec![0usize; self.d];
                let mut collector = Some(map);
                let mut total = 0u128;
                for x0 in 0..self.n {
                    assign[0] = x0;
                    total += self.count_rec(
                        motif,
                        &ready_at,
                        &mut assign,
                        1,
                        &mut scratch,
                        &mut collector,
                    );
                }
                total
            }
        }
    }

    fn count_rec(
        &self,
        motif: &MotifSpec,
        ready_at: &[Vec<&Vec<usize>>],
        assign: &mut [usize],
        depth: usize,
        scratch: &mut [usize],
        collect: &mut Option<&mut std::collections::HashMap<Vec<usize>, u128>>,
    ) -> u128 {
        // Check edges completed by the label just assigned (depth-1, 1-based depth).
        for e in &ready_at[depth] {
            for (slot, &lbl) in scratch.iter_mut().zip(e.iter()) {
                *slot = assign[lbl - 1];
            }
            if !self.image_is_edge(scratch) {
                return 0;
            }
        }
        if depth == motif.v0 {
            if let Some(map) = collect {
                let mut images: BTreeSet<Vec<usize>> = BTreeSet::new();
                for e in &motif.edges {
                    let mut img: Vec<usize> = e.iter().map(|&lbl| assign[lbl - 1]).collect();
                    img.sort_unstable();
                    images.insert(img);
                }
                for img in images {
                    *map.entry(img).or_insert(0) += 1;
                }
            }
            return 1;
        }
        let mut total = 0u128;
        for v in 0..self.n {
            assign[depth] = v;
            total += self.count_rec(motif, ready_at, assign, depth + 1, scratch, collect);
        }
        total
    }

    /// Ordered triangle triples, `d = 2` only. Agrees exactly with
    /// `count_labeled_copies(triangle)` but runs on bit-row intersections.
    pub fn triangle_count(&self) -> Result<BigUint> {
        if self.d != 2 {
            return Err(Error::input(format!(
                "triangle_count needs d=2, got d={}",
                self.d
            )));
        }
        // Each unordered triangle is counted once per edge (its third
        // vertex is a common neighbor), i.e. 3 times; ordered count is 6x.
        let per_edge: u64 = self
            .edges
            .par_iter()
            .map(|e| self.adj.as_ref().unwrap().common_neighbors(e[0], e[1]))
            .sum();
        Ok(BigUint::from(2u64) * BigUint::from(per_edge))
    }

    /// Parses the hypergraph text format: first non-comment line `d n`,
    /// then one edge per line as vertex ids separated by whitespace.
    /// `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges: Vec<Vec<usize>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<usize> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| {
                        Error::input(format!("line {}: invalid integer '{t}'", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            match header {
                None => {
                    if fields.len() != 2 {
                        return Err(Error::input(format!(
                            "line {}: header must be 'd n'",
                            lineno + 1
                        )));
                    }
                    header = Some((fields[0], fields[1]));
                }
                Some(_) => edges.push(fields),
            }
        }
        let (d, n) = header.ok_or_else(|| Error::input("empty hypergraph file"))?;
        Self::build(n, d, edges)
    }

    /// Canonical text form; `from_text(to_text(g)) == g` and re-rendering
    /// is byte-identical.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.d, self.n).unwrap();
        for e in &self.edges {
            let line = e.iter().map(|v| v.to_string()).join(" ");
            writeln!(out, "{line}").unwrap();
        }
        out
    }
}

/// Motif (pattern) hypergraph with labels `1..=v0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotifSpec {
    d: usize,
    v0: usize,
    edges: BTreeSet<Vec<usize>>,
}

impl MotifSpec {
    /// Builds a motif; `edges` use 1-based labels in `1..=v0`. An empty
    /// edge set is rejected unless `trivial` is set.
    pub fn new<I, E>(d: usize, v0: usize, edges: I, trivial: bool) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[usize]>,
    {
        if d == 0 || v0 == 0 {
            return Err(Error::input("motif needs d >= 1 and v0 >= 1"));
        }
        let mut set = BTreeSet::new();
        for raw in edges {
            let raw = raw.as_ref();
            if raw.len() != d {
                return Err(Error::input(format!(
                    "motif edge {raw:?} has arity {}, expected {d}",
                    raw.len()
                )));
            }
            let mut e = raw.to_vec();
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::input(format!("motif edge {raw:?} repeats a label")));
            }
            if e[0] == 0 || *e.last().unwrap() > v0 {
                return Err(Error::input(format!(
                    "motif edge {raw:?} outside labels 1..={v0}"
                )));
            }
            set.insert(e);
        }
        if set.is_empty() && !trivial {
            return Err(Error::input(
                "motif has no edges; pass trivial=true to allow",
            ));
        }
        Ok(MotifSpec { d, v0, edges: set })
    }

    pub fn single_edge(d: usize) -> Self {
        MotifSpec::new(d, d, [(1..=d).collect::<Vec<_>>()], false).unwrap()
    }

    pub fn triangle() -> Self {
        MotifSpec::new(2, 3, [[1, 2], [2, 3], [1, 3]], false).unwrap()
    }

    pub fn path2() -> Self {
        MotifSpec::new(2, 3, [[1, 2], [2, 3]], false).unwrap()
    }

    pub fn k4() -> Self {
        MotifSpec::new(
            2,
            4,
            [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]],
            false,
        )
        .unwrap()
    }

    /// Reinterprets a hypergraph as a motif: vertex `v` becomes label `v+1`.
    pub fn from_hypergraph(g: &Hypergraph) -> Result<Self> {
        let edges: Vec<Vec<usize>> = g
            .edges()
            .map(|e| e.iter().map(|&v| v + 1).collect())
            .collect();
        let trivial = edges.is_empty();
        MotifSpec::new(g.d(), g.n(), edges, trivial)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn v0(&self) -> usize {
        self.v0
    }

    pub fn edges(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_triangle(&self) -> bool {
        *self == MotifSpec::triangle()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    fn count_u64(g: &Hypergraph, m: &MotifSpec) -> u64 {
        g.count_labeled_copies(m).unwrap().to_u64().unwrap()
    }

    /// Independent oracle: count labeled triangle tuples by a plain triple
    /// loop over all of V^3.
    fn triangle_oracle(g: &Hypergraph) -> u64 {
        let mut count = 0;
        for x1 in 0..g.n() {
            for x2 in 0..g.n() {
                for x3 in 0..g.n() {
                    if g.has_pair(x1, x2) && g.has_pair(x2, x3) && g.has_pair(x3, x1) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn build_k3() {
        let g = Hypergraph::build(3, 2, [[0, 1], [1, 2], [0, 2]]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g, Hypergraph::complete(3, 2).unwrap());
    }

    #[test]
    fn build_empty_graph() {
        let g = Hypergraph::build(4, 2, Vec::<Vec<usize>>::new()).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.n(), 4);
    }

    #[test]
    fn build_dedups_reordered_edges() {
        let g = Hypergraph::build(3, 2, [[0, 1], [1, 0]]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn build_rejects_bad_edges() {
        assert!(Hypergraph::build(3, 2, [[0, 3]]).is_err());
        assert!(Hypergraph::build(3, 2, [[0, 1, 2]]).is_err());
        assert!(Hypergraph::build(3, 2, [[1, 1]]).is_err());
        assert!(Hypergraph::build(0, 2, Vec::<Vec<usize>>::new()).is_err());
    }

    #[test]
    fn single_edge_copies_is_d_factorial_times_edges() {
        let g = Hypergraph::complete(3, 2).unwrap();
        assert_eq!(count_u64(&g, &MotifSpec::single_edge(2)), 6); // 2! * 3

        let h = Hypergraph::build(5, 3, [[0, 1, 2], [1, 2, 3]]).unwrap();
        assert_eq!(count_u64(&h, &MotifSpec::single_edge(3)), 12); // 3! * 2
    }

    #[test]
    fn k4_triangle_copies_match_exhaustive_oracle() {
        let g = Hypergraph::complete(4, 2).unwrap();
        let oracle = triangle_oracle(&g);
        assert_eq!(oracle, 24);
        assert_eq!(count_u64(&g, &MotifSpec::triangle()), oracle);
    }

    #[test]
    fn empty_graph_has_no_copies() {
        let g = Hypergraph::build(4, 2, Vec::<Vec<usize>>::new()).unwrap();
        assert_eq!(count_u64(&g, &MotifSpec::triangle()), 0);
    }

    #[test]
    fn uniformity_mismatch_rejected() {
        let g = Hypergraph::build(4, 3, [[0, 1, 2]]).unwrap();
        assert!(g.count_labeled_copies(&MotifSpec::triangle()).is_err());
        assert!(g.triangle_count().is_err());
    }

    #[test]
    fn triangle_count_examples() {
        let k3 = Hypergraph::complete(3, 2).unwrap();
        assert_eq!(triangle_oracle(&k3), 6);
        assert_eq!(k3.triangle_count().unwrap(), BigUint::from(6u32));

        let path = Hypergraph::build(3, 2, [[0, 1], [1, 2]]).unwrap();
        assert_eq!(path.triangle_count().unwrap(), BigUint::from(0u32));

        let k4 = Hypergraph::complete(4, 2).unwrap();
        assert_eq!(
            k4.triangle_count().unwrap(),
            k4.count_labeled_copies(&MotifSpec::triangle()).unwrap()
        );
    }

    #[test]
    fn triangle_count_agrees_with_generic_on_random_graphs() {
        for seed in 0..200u64 {
            let n = 3 + (seed % 10) as usize; // n <= 12
            let g = Hypergraph::random(n, 2, 0.5, seed).unwrap();
            assert_eq!(
                g.triangle_count().unwrap(),
                g.count_labeled_copies(&MotifSpec::triangle()).unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn random_extremes() {
        let empty = Hypergraph::random(5, 2, 0.0, 7).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let full = Hypergraph::random(5, 2, 1.0, 7).unwrap();
        assert_eq!(full, Hypergraph::complete(5, 2).unwrap());
        assert!(Hypergraph::random(5, 2, 1.5, 7).is_err());
    }

    #[test]
    fn random_is_reproducible() {
        let a = Hypergraph::random(6, 3, 0.5, 42).unwrap();
        let b = Hypergraph::random(6, 3, 0.5, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_deletion_is_monotone() {
        for seed in 0..40u64 {
            let g = Hypergraph::random(7, 2, 0.6, seed).unwrap();
            let motif = MotifSpec::triangle();
            let base = g.count_labeled_copies(&motif).unwrap();
            for e in g.edges() {
                let mut h = g.clone();
                h.remove_edge(e);
                assert!(h.count_labeled_copies(&motif).unwrap() <= base);
            }
        }
    }

    #[test]
    fn motif_counts_are_isomorphism_invariant() {
        use rand::seq::SliceRandom;
        for seed in 0..30u64 {
            let g = Hypergraph::random(8, 2, 0.5, seed).unwrap();
            let mut perm: Vec<usize> = (0..8).collect();
            perm.shuffle(&mut rng::stream(seed, 1));
            let h = g.permuted(&perm).unwrap();
            for motif in [MotifSpec::triangle(), MotifSpec::path2(), MotifSpec::k4()] {
                assert_eq!(
                    g.count_labeled_copies(&motif).unwrap(),
                    h.count_labeled_copies(&motif).unwrap()
                );
            }
        }
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let g = Hypergraph::random(9, 3, 0.4, 3).unwrap();
        let text = g.to_text();
        let back = Hypergraph::from_text(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn text_parser_handles_comments_and_errors() {
        let g =
            Hypergraph::from_text("# a graph\n2 3 # header\n0 1\n1 2 # edge\n\n").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(Hypergraph::from_text("").is_err());
        assert!(Hypergraph::from_text("2\n0 1\n").is_err());
        assert!(Hypergraph::from_text("2 3\n0 x\n").is_err());
        assert!(Hypergraph::from_text("2 3\n0 5\n").is_err());
    }

    #[test]
    fn trivial_motif_flag() {
        assert!(MotifSpec::new(2, 3, Vec::<Vec<usize>>::new(), false).is_err());
        let m = MotifSpec::new(2, 3, Vec::<Vec<usize>>::new(), true).unwrap();
        assert!(m.is_trivial());
        let g = Hypergraph::complete(3, 2).unwrap();
        // Vacuous membership: every labeled tuple qualifies.
        assert_eq!(count_u64(&g, &m), 27);
    }
}
