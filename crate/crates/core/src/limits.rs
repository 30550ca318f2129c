//! Weak-convergence diagnostics: density tables over regular events,
//! deterministic diagonal-subsequence extraction, and the empirical
//! polling (regularity) defect curve.

use std::fmt::Write as _;

use num::bigint::BigInt;
use num::rational::BigRational;
use rand::Rng;

use crate::embedding::{embed_prob_exact, embed_prob_mc, ExactOptions, RegularEvent};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::probspace::{
    independence_defect, Factor, Mode, ProbSpace, Scalar, SpaceRef,
};
use crate::rng;

/// How a density row is evaluated.
#[derive(Clone, Copy, Debug)]
pub enum DensityMode {
    Exact(ExactOptions),
    MonteCarlo { samples: u64, seed: u64 },
}

/// One probability per event; exact rationals in exact mode, floats in
/// Monte-Carlo mode.
pub fn density_vector(
    graph: &Hypergraph,
    events: &[RegularEvent],
    mode: DensityMode,
) -> Result<Vec<Scalar>> {
    events
        .iter()
        .enumerate()
        .map(|(column, event)| match mode {
            DensityMode::Exact(opts) => {
                Ok(Scalar::Rat(embed_prob_exact(graph, event, opts)?))
            }
            DensityMode::MonteCarlo { samples, seed } => {
                let est = embed_prob_mc(graph, event, samples, rng::mix(seed, column as u64))?;
                Ok(Scalar::F64(est.estimate))
            }
        })
        .collect()
}

/// Rows of event densities across a sequence of graphs.
#[derive(Clone, Debug)]
pub struct DensityTable {
    /// Event labels in the mini-language.
    pub events: Vec<String>,
    pub rows: Vec<Vec<Scalar>>,
}

impl DensityTable {
    pub fn new(events: Vec<String>, rows: Vec<Vec<Scalar>>) -> Result<DensityTable> {
        for row in &rows {
            if row.len() != events.len() {
                return Err(Error::input("row width must match the event list"));
            }
        }
        Ok(DensityTable { events, rows })
    }

    /// CSV rendering: header row of event strings, one row per graph;
    /// exact values as `num/den`, floats in their shortest form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.events.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Scalar::Rat(r) => format!("{}/{}", r.numer(), r.denom()),
                    Scalar::F64(x) => format!("{x}"),
                })
                .collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

/// Result of [`diagonal_subsequence`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subsequence {
    /// Surviving row indices, in original order.
    pub indices: Vec<usize>,
    /// Fewer than two rows survived.
    pub degenerate: bool,
}

/// Column-by-column refinement: for each column in order, keep the rows
/// whose value lies in the most-populated window `[v, v + tol]` anchored
/// at a surviving value `v` (ties: smallest anchor). The survivors are
/// pairwise within `tol` in every column, and re-applying the rule
/// returns them unchanged.
pub fn diagonal_subsequence(table: &DensityTable, tol: &Scalar) -> Result<Subsequence> {
    if table.rows.is_empty() {
        return Err(Error::input("table must have at least one row"));
    }
    if tol.cmp_total(&Scalar::zero(tol.mode())) != std::cmp::Ordering::Greater {
        return Err(Error::input("tolerance must be positive"));
    }
    let mut survivors: Vec<usize> = (0..table.rows.len()).collect();
    for column in 0..table.events.len() {
        let mut best: Option<(usize, &Scalar)> = None; // (count, anchor)
        for &candidate in &survivors {
            let anchor = &table.rows[candidate][column];
            let upper = anchor.add(tol);
            let count = survivors
                .iter()
                .filter(|&&r| {
                    let v = &table.rows[r][column];
                    anchor.le(v) && v.le(&upper)
                })
                .count();
            let better = match &best {
                None => true,
                Some((c, a)) => {
                    count > *c
                        || (count == *c
                            && anchor.cmp_total(a) == std::cmp::Ordering::Less)
                }
            };
            if better {
                best = Some((count, anchor));
            }
        }
        let (_, anchor) = best.expect("survivors nonempty");
        let anchor = anchor.clone();
        let upper = anchor.add(tol);
        survivors.retain(|&r| {
            let v = &table.rows[r][column];
            anchor.le(v) && v.le(&upper)
        });
    }
    let degenerate = survivors.len() < 2;
    Ok(Subsequence {
        indices: survivors,
        degenerate,
    })
}

/// Empirical joint sample of the two edge events `(A(1,3), A(2,3))`
/// against the polled-signature cluster of the third vertex, packaged as
/// a finite probability space with its three factors.
#[derive(Clone, Debug)]
pub struct PolledPairSample {
    pub space: SpaceRef,
    /// Signature-cluster factor of the third vertex.
    pub signature: Factor,
    /// Factor of the first edge bit.
    pub first_edge: Factor,
    /// Factor of the second edge bit.
    pub second_edge: Factor,
}

impl PolledPairSample {
    /// The conditional-independence defect of the two edge bits over the
    /// signature factor, on the empirical measure.
    pub fn defect(&self) -> Result<Scalar> {
        independence_defect(&self.first_edge, &self.second_edge, &self.signature)
    }
}

fn poll_cluster_assignment(graph: &Hypergraph, poll_size: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed, 0);
    let polls: Vec<usize> = (0..poll_size)
        .map(|_| rng.random_range(0..graph.n()))
        .collect();
    let mut clusters: std::collections::BTreeMap<Vec<bool>, usize> = Default::default();
    (0..graph.n())
        .map(|v| {
            let sig: Vec<bool> = polls.iter().map(|&p| graph.has_pair(v, p)).collect();
            let next = clusters.len();
            *clusters.entry(sig).or_insert(next)
        })
        .collect()
}

fn pair_space_from_law(
    law: std::collections::BTreeMap<(bool, bool, usize), BigRational>,
) -> Result<PolledPairSample> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut keys = Vec::new();
    for (key, mass) in law {
        points.push(format!("{}{}.c{}", key.0 as u8, key.1 as u8, key.2));
        weights.push(Scalar::Rat(mass));
        keys.push(key);
    }
    let space = ProbSpace::new(points, weights, Mode::Rational)?;
    let by = |f: &dyn Fn(&(bool, bool, usize)) -> usize| -> Factor {
        let assignment: Vec<u32> = keys.iter().map(|k| f(k) as u32).collect();
        Factor::from_assignment(&space, &assignment).unwrap()
    };
    Ok(PolledPairSample {
        signature: by(&|k| k.2),
        first_edge: by(&|k| k.0 as usize),
        second_edge: by(&|k| k.1 as usize),
        space,
    })
}

/// Draws `samples` triples `(x1, x2, x3)` of vertices, records the edge
/// bits `(x1~x3, x2~x3)` and the signature cluster of `x3` against a
/// poll set of `poll_size` vertices, and builds the empirical
/// distribution as an exact-rational space.
pub fn polled_pair_sample(
    graph: &Hypergraph,
    poll_size: usize,
    samples: u64,
    seed: u64,
) -> Result<PolledPairSample> {
    if graph.d() != 2 {
        return Err(Error::input("polling requires d = 2"));
    }
    if samples == 0 {
        return Err(Error::input("at least one sample required"));
    }
    let cluster_of = poll_cluster_assignment(graph, poll_size, seed);
    let mut rng = rng::stream(seed, 1);
    let mut counts: std::collections::BTreeMap<(bool, bool, usize), u64> = Default::default();
    for _ in 0..samples {
        let x1 = rng.random_range(0..graph.n());
        let x2 = rng.random_range(0..graph.n());
        let x3 = rng.random_range(0..graph.n());
        let key = (
            graph.has_pair(x1, x3),
            graph.has_pair(x2, x3),
            cluster_of[x3],
        );
        *counts.entry(key).or_insert(0) += 1;
    }
    let law = counts
        .into_iter()
        .map(|(key, count)| (key, BigRational::new(count.into(), samples.into())))
        .collect();
    pair_space_from_law(law)
}

/// The infinite-sample limit of [`polled_pair_sample`]: the exact joint
/// law of the edge bits and the signature cluster for a poll set sampled
/// from `(seed)`. Only the poll set is random; given the clusters, the
/// law is integrated exactly over uniform `(x1, x2, x3)`.
pub fn polled_pair_exact(
    graph: &Hypergraph,
    poll_size: usize,
    seed: u64,
) -> Result<PolledPairSample> {
    if graph.d() != 2 {
        return Err(Error::input("polling requires d = 2"));
    }
    let cluster_of = poll_cluster_assignment(graph, poll_size, seed);
    let n = graph.n();
    let nn = BigInt::from(n);
    let mut law: std::collections::BTreeMap<(bool, bool, usize), BigRational> = Default::default();
    for (x3, &c) in cluster_of.iter().enumerate() {
        // Given x3, the two bits are independent with success probability
        // deg(x3)/n (the collision x_i = x3 never yields an edge).
        let deg = (0..n).filter(|&v| graph.has_pair(v, x3)).count();
        let p = BigRational::new(deg.into(), nn.clone());
        let q = BigRational::from_integer(1.into()) - p.clone();
        let base = BigRational::new(1.into(), nn.clone());
        for (b1, f1) in [(true, p.clone()), (false, q.clone())] {
            for (b2, f2) in [(true, p.clone()), (false, q.clone())] {
                let mass = base.clone() * f1.clone() * f2;
                if !num::Zero::is_zero(&mass) {
                    *law.entry((b1, b2, c))
                        .or_insert_with(|| BigRational::from_integer(0.into())) += mass;
                }
            }
        }
    }
    pair_space_from_law(law)
}

/// How a trial's conditional law is obtained.
#[derive(Clone, Copy, Debug)]
pub enum DefectEstimator {
    /// Empirical joint distribution from this many sampled triples.
    Empirical { samples: u64 },
    /// Exact joint law given the sampled poll set (the infinite-sample
    /// limit of the empirical estimator; only the poll set is random).
    ExactGivenPolls,
}

/// One point of the defect curve.
#[derive(Clone, Debug)]
pub struct DefectCurvePoint {
    pub poll_size: usize,
    pub mean_defect: f64,
    pub per_trial: Vec<f64>,
}

/// For each poll size: `trials` independent polled trials, each reduced
/// to its conditional-independence defect; reports the mean. Trials are
/// keyed by `(seed, poll size, trial)` so the curve is deterministic and
/// independent of evaluation order.
pub fn regularity_defect_curve(
    graph: &Hypergraph,
    poll_sizes: &[usize],
    trials: usize,
    estimator: DefectEstimator,
    seed: u64,
) -> Result<Vec<DefectCurvePoint>> {
    if graph.d() != 2 {
        return Err(Error::input("the defect curve requires d = 2"));
    }
    if trials == 0 {
        return Err(Error::input("at least one trial required"));
    }
    poll_sizes
        .iter()
        .map(|&poll_size| {
            let per_trial: Vec<f64> = (0..trials)
                .map(|trial| {
                    let stream_seed = rng::mix(seed, rng::mix(poll_size as u64, trial as u64));
                    let sample = match estimator {
                        DefectEstimator::Empirical { samples } => {
                            polled_pair_sample(graph, poll_size, samples, stream_seed)?
                        }
                        DefectEstimator::ExactGivenPolls => {
                            polled_pair_exact(graph, poll_size, stream_seed)?
                        }
                    };
                    Ok(sample.defect()?.to_f64())
                })
                .collect::<Result<_>>()?;
            let mean = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
            Ok(DefectCurvePoint {
                poll_size,
                mean_defect: mean,
                per_trial,
            })
        })
        .collect()
}
