//! Removal algorithms: make a (hyper)graph motif-free by deleting few
//! edges, with the freeness contract certified by an exact recount.
//!
//! The deletion-count quality is measured, never promised: the greedy
//! method deletes the edge participating in the most remaining labeled
//! copies (ties broken lexicographically), and the partition methods
//! cluster vertices by their adjacency signature to a sampled poll set,
//! drop sparse blocks, and fall back to greedy on any residue so that
//! the output is always certified free.

use std::collections::BTreeMap;

use num::bigint::BigUint;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, MotifSpec};
use crate::rng;

/// Which algorithm produced a removal result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RemovalMethod {
    Greedy,
    Partition,
    StrongPartition,
}

impl RemovalMethod {
    pub fn name(&self) -> &'static str {
        match self {
            RemovalMethod::Greedy => "greedy",
            RemovalMethod::Partition => "partition",
            RemovalMethod::StrongPartition => "strong-partition",
        }
    }
}

/// Verification record attached to every removal result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    /// Exact recount of motif copies in the survivor; must be zero.
    Free { residual: BigUint },
    /// The motif has no edges, so freeness is vacuous.
    TrivialMotif,
}

impl Verification {
    pub fn is_free(&self) -> bool {
        match self {
            Verification::Free { residual } => residual == &BigUint::from(0u32),
            Verification::TrivialMotif => true,
        }
    }
}

/// Deletion counts of the two partition-method phases.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhaseBreakdown {
    /// Edges dropped because their block density fell below the threshold.
    pub density_deletions: usize,
    /// Edges dropped by the greedy fallback on residual copies.
    pub fallback_deletions: usize,
}

/// Outcome of a removal run.
#[derive(Clone, Debug)]
pub struct RemovalResult {
    pub method: RemovalMethod,
    /// Deleted edges in deletion order (each sorted ascending).
    pub deleted: Vec<Vec<usize>>,
    pub survivor: Hypergraph,
    pub verification: Verification,
    pub phase: Option<PhaseBreakdown>,
    /// Proof-side budget split factor `2^d * d! * |E_0|`, reported as
    /// metadata only.
    pub budget_split_factor: BigUint,
}

fn budget_split_factor(motif: &MotifSpec) -> BigUint {
    let d = motif.d() as u32;
    let mut factorial = BigUint::from(1u32);
    for i in 2..=d {
        factorial *= BigUint::from(i);
    }
    (BigUint::from(2u32).pow(d)) * factorial * BigUint::from(motif.edge_count())
}

/// Exact recount: `(count == 0, count)`.
pub fn verify_free(graph: &Hypergraph, motif: &MotifSpec) -> Result<(bool, BigUint)> {
    let count = graph.count_labeled_copies(motif)?;
    Ok((count == BigUint::from(0u32), count))
}

/// Repeatedly deletes the edge contained in the most remaining labeled
/// copies (ties: lexicographically smallest) until the motif count is 0.
/// The result is verified by an exact recount. A trivial (edge-free)
/// motif returns the graph unchanged.
pub fn remove_copies_greedy(graph: &Hypergraph, motif: &MotifSpec) -> Result<RemovalResult> {
    if motif.d() != graph.d() {
        return Err(Error::input("uniformity mismatch between graph and motif"));
    }
    let mut current = graph.clone();
    let mut deleted = Vec::new();
    if !motif.is_trivial() {
        greedy_loop(&mut current, motif, &mut deleted)?;
    }
    finish(current, motif, deleted, RemovalMethod::Greedy, None)
}

fn greedy_loop(
    current: &mut Hypergraph,
    motif: &MotifSpec,
    deleted: &mut Vec<Vec<usize>>,
) -> Result<()> {
    let triangle_fast = motif.is_triangle() && current.d() == 2;
    loop {
        let victim = if triangle_fast {
            pick_triangle_victim(current)
        } else {
            pick_generic_victim(current, motif)?
        };
        match victim {
            Some(edge) => {
                current.remove_edge(&edge);
                deleted.push(edge);
            }
            None => return Ok(()),
        }
    }
}

/// Max-participation edge via common-neighbor counts; `None` when the
/// graph is triangle-free.
fn pick_triangle_victim(graph: &Hypergraph) -> Option<Vec<usize>> {
    let mut best: Option<(u64, Vec<usize>)> = None;
    for e in graph.edges() {
        let mut common = 0u64;
        for v in 0..graph.n() {
            if graph.has_pair(e[0], v) && graph.has_pair(e[1], v) {
                common += 1;
            }
        }
        if common == 0 {
            continue;
        }
        match &best {
            Some((c, _)) if *c >= common => {}
            _ => best = Some((common, e.clone())),
        }
    }
    best.map(|(_, e)| e)
}

fn pick_generic_victim(graph: &Hypergraph, motif: &MotifSpec) -> Result<Option<Vec<usize>>> {
    let (total, per_edge) = graph.copies_per_edge(motif)?;
    if total == 0 {
        return Ok(None);
    }
    // per_edge is sorted lexicographically; keep the first maximum.
    let mut best: Option<(u128, &Vec<usize>)> = None;
    for (edge, count) in &per_edge {
        match &best {
            Some((c, _)) if *c >= *count => {}
            _ => best = Some((*count, edge)),
        }
    }
    Ok(best.map(|(_, e)| e.clone()))
}

fn finish(
    survivor: Hypergraph,
    motif: &MotifSpec,
    deleted: Vec<Vec<usize>>,
    method: RemovalMethod,
    phase: Option<PhaseBreakdown>,
) -> Result<RemovalResult> {
    let verification = if motif.is_trivial() {
        Verification::TrivialMotif
    } else {
        let (free, residual) = verify_free(&survivor, motif)?;
        if !free {
            return Err(Error::verification(format!(
                "removal left {residual} motif copies"
            )));
        }
        Verification::Free { residual }
    };
    Ok(RemovalResult {
        method,
        deleted,
        survivor,
        verification,
        phase,
        budget_split_factor: budget_split_factor(motif),
    })
}

/// Vertex clusters by adjacency signature to a sampled poll set.
/// Cluster ids are assigned by first vertex of occurrence.
fn poll_clusters(graph: &Hypergraph, poll_size: usize, seed: u64) -> (Vec<usize>, usize) {
    let mut rng = rng::stream(seed, 0);
    let polls: Vec<usize> = (0..poll_size)
        .map(|_| rng.random_range(0..graph.n()))
        .collect();
    let mut ids: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    let mut cluster_of = Vec::with_capacity(graph.n());
    for v in 0..graph.n() {
        let sig: Vec<bool> = polls.iter().map(|&p| graph.has_pair(v, p)).collect();
        let next = ids.len();
        cluster_of.push(*ids.entry(sig).or_insert(next));
    }
    let count = ids.len();
    (cluster_of, count)
}

/// Graph-density bookkeeping for unordered cluster pairs.
struct BlockStats {
    cluster_of: Vec<usize>,
    sizes: Vec<usize>,
    edge_counts: BTreeMap<(usize, usize), usize>,
}

impl BlockStats {
    fn new(graph: &Hypergraph, cluster_of: Vec<usize>, clusters: usize) -> BlockStats {
        let mut sizes = vec![0usize; clusters];
        for &c in &cluster_of {
            sizes[c] += 1;
        }
        let mut edge_counts = BTreeMap::new();
        for e in graph.edges() {
            let (a, b) = (cluster_of[e[0]], cluster_of[e[1]]);
            let key = (a.min(b), a.max(b));
            *edge_counts.entry(key).or_insert(0) += 1;
        }
        BlockStats {
            cluster_of,
            sizes,
            edge_counts,
        }
    }

    /// Edge density of the block: within a cluster the denominator is
    /// `C(size, 2)`, across clusters it is `size_a * size_b`.
    fn density(&self, a: usize, b: usize) -> f64 {
        let key = (a.min(b), a.max(b));
        let edges = *self.edge_counts.get(&key).unwrap_or(&0) as f64;
        let pairs = if a == b {
            (self.sizes[a] * self.sizes[a].saturating_sub(1)) as f64 / 2.0
        } else {
            (self.sizes[a] * self.sizes[b]) as f64
        };
        if pairs == 0.0 {
            0.0
        } else {
            edges / pairs
        }
    }
}

/// Partition-based triangle removal: poll `poll_size` vertices, cluster
/// every vertex by its adjacency signature to the poll set, delete every
/// edge whose cluster pair has density below `tau`, then fall back to
/// greedy on any residual triangles. The freeness contract always holds;
/// both phase deletion counts are reported.
pub fn remove_triangles_partition(
    graph: &Hypergraph,
    poll_size: usize,
    tau: f64,
    seed: u64,
) -> Result<RemovalResult> {
    if graph.d() != 2 {
        return Err(Error::input("partition removal requires d = 2"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::input(format!("threshold {tau} not in (0,1)")));
    }
    let motif = MotifSpec::triangle();
    let (cluster_of, clusters) = poll_clusters(graph, poll_size, seed);
    let stats = BlockStats::new(graph, cluster_of, clusters);

    let mut current = graph.clone();
    let mut deleted = Vec::new();
    for e in graph.edges() {
        let (a, b) = (stats.cluster_of[e[0]], stats.cluster_of[e[1]]);
        if stats.density(a, b) < tau {
            deleted.push(e.clone());
        }
    }
    for e in &deleted {
        current.remove_edge(e);
    }
    let density_deletions = deleted.len();

    greedy_loop(&mut current, &motif, &mut deleted)?;
    let fallback_deletions = deleted.len() - density_deletions;
    finish(
        current,
        &motif,
        deleted,
        RemovalMethod::Partition,
        Some(PhaseBreakdown {
            density_deletions,
            fallback_deletions,
        }),
    )
}

/// Block verdict of the strong variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockVerdict {
    Complete,
    Empty,
}

/// Bounded-complexity description: a vertex partition plus one verdict
/// per unordered part pair. The graph it describes is the blow-up with
/// complete blocks filled and empty blocks void.
#[derive(Clone, Debug)]
pub struct PartitionDescription {
    pub parts: Vec<Vec<usize>>,
    pub verdicts: BTreeMap<(usize, usize), BlockVerdict>,
}

impl PartitionDescription {
    /// The graph defined by the description.
    pub fn blowup_graph(&self, n: usize) -> Result<Hypergraph> {
        let mut part_of = vec![usize::MAX; n];
        for (i, part) in self.parts.iter().enumerate() {
            for &v in part {
                part_of[v] = i;
            }
        }
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let key = (part_of[u].min(part_of[v]), part_of[u].max(part_of[v]));
                if self.verdicts.get(&key) == Some(&BlockVerdict::Complete) {
                    edges.push([u, v]);
                }
            }
        }
        Hypergraph::build(n, 2, edges)
    }

    /// Unordered triangle count of the blow-up, by block triple.
    fn blowup_triangles(&self) -> BTreeMap<(usize, usize), u128> {
        let k = self.parts.len();
        let complete =
            |a: usize, b: usize| self.verdicts.get(&(a.min(b), a.max(b))) == Some(&BlockVerdict::Complete);
        let size = |a: usize| self.parts[a].len() as u128;
        let mut per_pair: BTreeMap<(usize, usize), u128> = BTreeMap::new();
        let mut add = |a: usize, b: usize, t: u128| {
            *per_pair.entry((a.min(b), a.max(b))).or_insert(0) += t;
        };
        for a in 0..k {
            for b in a..k {
                for c in b..k {
                    if !(complete(a, b) && complete(b, c) && complete(a, c)) {
                        continue;
                    }
                    let t = if a == b && b == c {
                        let s = size(a);
                        s * s.saturating_sub(1) * s.saturating_sub(2) / 6
                    } else if a == b {
                        size(a) * size(a).saturating_sub(1) / 2 * size(c)
                    } else if b == c {
                        size(b) * size(b).saturating_sub(1) / 2 * size(a)
                    } else {
                        size(a) * size(b) * size(c)
                    };
                    if t == 0 {
                        continue;
                    }
                    add(a, b, t);
                    add(b, c, t);
                    add(a, c, t);
                }
            }
        }
        per_pair
    }
}

/// Report of the strong removal variant.
#[derive(Clone, Debug)]
pub struct StrongRemovalReport {
    pub description: PartitionDescription,
    /// The blow-up graph, certified triangle-free.
    pub survivor: Hypergraph,
    /// `|E(G) Δ E(G')|`.
    pub diff_size: usize,
    /// Complete blocks demoted to empty to reach triangle-freeness.
    pub demotions: usize,
    pub verification: Verification,
}

/// Strong removal: clusters as in the partition method, block verdict
/// `Complete` iff density >= tau, then demote the complete block pair in
/// the most blow-up triangles until the blow-up is triangle-free. The
/// result is not a subgraph; its distance to the input is reported.
pub fn strong_removal_partition(
    graph: &Hypergraph,
    poll_size: usize,
    tau: f64,
    seed: u64,
) -> Result<StrongRemovalReport> {
    if graph.d() != 2 {
        return Err(Error::input("partition removal requires d = 2"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::input(format!("threshold {tau} not in (0,1)")));
    }
    let (cluster_of, clusters) = poll_clusters(graph, poll_size, seed);
    let stats = BlockStats::new(graph, cluster_of.clone(), clusters);
    let parts: Vec<Vec<usize>> = (0..clusters)
        .map(|c| (0..graph.n()).filter(|&v| cluster_of[v] == c).collect())
        .collect();
    let mut verdicts = BTreeMap::new();
    for a in 0..clusters {
        for b in a..clusters {
            let verdict = if stats.density(a, b) >= tau {
                BlockVerdict::Complete
            } else {
                BlockVerdict::Empty
            };
            verdicts.insert((a, b), verdict);
        }
    }
    let mut description = PartitionDescription { parts, verdicts };

    // Demote until the blow-up has no triangles; terminates because each
    // step turns one Complete verdict to Empty.
    let mut demotions = 0usize;
    loop {
        let per_pair = description.blowup_triangles();
        match per_pair.into_iter().max_by_key(|&(pair, t)| (t, std::cmp::Reverse(pair))) {
            None => break,
            Some((pair, _)) => {
                description.verdicts.insert(pair, BlockVerdict::Empty);
                demotions += 1;
            }
        }
    }

    let survivor = description.blowup_graph(graph.n())?;
    let (free, residual) = verify_free(&survivor, &MotifSpec::triangle())?;
    if !free {
        return Err(Error::verification(format!(
            "blow-up graph still has {residual} triangles"
        )));
    }

    // Symmetric difference against the input edge set.
    let mut diff = 0usize;
    for e in graph.edges() {
        if !survivor.has_pair(e[0], e[1]) {
            diff += 1;
        }
    }
    for e in survivor.edges() {
        if !graph.has_pair(e[0], e[1]) {
            diff += 1;
        }
    }

    Ok(StrongRemovalReport {
        description,
        survivor,
        diff_size: diff,
        demotions,
        verification: Verification::Free { residual },
    })
}

/// Exhaustive minimum deletion count (test oracle for tiny graphs):
/// smallest `k` such that some `k`-subset of edges removes every copy.
pub fn optimal_deletions_exhaustive(graph: &Hypergraph, motif: &MotifSpec) -> Result<usize> {
    let edges: Vec<Vec<usize>> = graph.edges().cloned().collect();
    if verify_free(graph, motif)?.0 {
        return Ok(0);
    }
    for k in 1..=edges.len() {
        let mut chosen = vec![0usize; k];
        if try_subsets(graph, motif, &edges, &mut chosen, 0, 0)? {
            return Ok(k);
        }
    }
    Ok(edges.len())
}

fn try_subsets(
    graph: &Hypergraph,
    motif: &MotifSpec,
    edges: &[Vec<usize>],
    chosen: &mut [usize],
    depth: usize,
    start: usize,
) -> Result<bool> {
    if depth == chosen.len() {
        let mut candidate = graph.clone();
        for &i in chosen.iter() {
            candidate.remove_edge(&edges[i]);
        }
        return Ok(verify_free(&candidate, motif)?.0);
    }
    for i in start..edges.len() {
        chosen[depth] = i;
        if try_subsets(graph, motif, edges, chosen, depth + 1, i + 1)? {
            return Ok(true);
        }
    }
    Ok(false)
}
