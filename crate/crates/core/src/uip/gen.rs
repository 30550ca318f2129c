//! Generator for certified UIP problem instances.
//!
//! Instances are product spaces (one independent coordinate per ground
//! element) so the nesting and independence hypotheses hold exactly by
//! construction. Zero-weight coordinate points are planted so that null
//! joint intersections need not be empty — without them the finite
//! statement is vacuous.

use std::collections::BTreeMap;

use num::rational::BigRational;
use rand::Rng;

use crate::error::Result;
use crate::probspace::{Event, Factor, Mode, ProbSpace, Scalar, SpaceRef};
use crate::rng;

use super::construct::UipProblem;
use super::downset::Downset;
use super::system::FactorSystem;

/// Shape knobs for [`generate_certified_problem`].
#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    /// Ground-set size (coordinates), 2 or 3 for desk-scale instances.
    pub ground: usize,
    /// Maximum downset height.
    pub max_height: u32,
    pub epsilon: BigRational,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            ground: 2,
            max_height: 2,
            epsilon: BigRational::new(1.into(), 10.into()),
        }
    }
}

/// Builds a certified problem: product space with planted zero weights,
/// coordinate factors indexed by a random downset, and events repaired
/// until their joint intersection is null (preferring null-but-nonempty).
pub fn generate_certified_problem(seed: u64, config: &GeneratorConfig) -> Result<UipProblem> {
    let mut rng = rng::stream(seed, 0);
    let ground = config.ground.clamp(1, 3);

    // Coordinate sizes 2..=3, keeping the product of sizes modest.
    let sizes: Vec<usize> = (0..ground)
        .map(|_| 2 + rng.random_range(0..2usize))
        .collect();
    let total: usize = sizes.iter().product();

    // Rational weights per coordinate, one zero planted somewhere.
    let mut coord_weights: Vec<Vec<BigRational>> = Vec::new();
    for &sz in &sizes {
        loop {
            let raw: Vec<i64> = (0..sz)
                .map(|_| {
                    if rng.random::<f64>() < 0.35 {
                        0
                    } else {
                        rng.random_range(1..5)
                    }
                })
                .collect();
            let sum: i64 = raw.iter().sum();
            if sum == 0 {
                continue;
            }
            coord_weights.push(
                raw.iter()
                    .map(|&w| BigRational::new(w.into(), sum.into()))
                    .collect(),
            );
            break;
        }
    }
    if coord_weights
        .iter()
        .all(|ws| ws.iter().all(|w| !num::Zero::is_zero(w)))
    {
        // Force at least one zero-weight coordinate point.
        let j = rng.random_range(0..ground);
        let sz = sizes[j];
        let keep: Vec<i64> = (0..sz).map(|i| if i == sz - 1 { 0 } else { 1 }).collect();
        let sum: i64 = keep.iter().sum();
        coord_weights[j] = keep
            .iter()
            .map(|&w| BigRational::new(w.into(), sum.into()))
            .collect();
    }

    let digits = |point: usize| -> Vec<usize> {
        let mut rest = point;
        let mut out = vec![0usize; ground];
        for (j, &sz) in sizes.iter().enumerate().rev() {
            out[j] = rest % sz;
            rest /= sz;
        }
        out
    };
    let points: Vec<String> = (0..total)
        .map(|p| {
            digits(p)
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect();
    let weights: Vec<Scalar> = (0..total)
        .map(|p| {
            let ds = digits(p);
            let mut w = BigRational::from_integer(1.into());
            for (j, &d) in ds.iter().enumerate() {
                w *= coord_weights[j][d].clone();
            }
            Scalar::Rat(w)
        })
        .collect();
    let space = ProbSpace::new(points, weights, Mode::Rational)?;

    // Random downset: union of principal ideals of random sets with
    // cardinality up to max_height; always contains the empty set.
    let full = (1u32 << ground) - 1;
    let mut i_max = Downset::new(ground, [0u32])?;
    let generators = 1 + rng.random_range(0..ground as u32 + 1);
    for _ in 0..generators {
        let mask = rng.random_range(0..=full);
        let trimmed = trim_to_height(mask, config.max_height, &mut rng);
        i_max = i_max.union(&Downset::principal(ground, trimmed)?)?;
    }

    let mut factors = BTreeMap::new();
    for e in i_max.members() {
        factors.insert(e, coordinate_factor(&space, &sizes, e, &digits));
    }
    let system = FactorSystem::new(space.clone(), i_max.clone(), factors)?;

    // Random measurable events, then repair to a null joint intersection
    // by deleting atoms that contain positive-weight joint points.
    let mut events: BTreeMap<u32, Event> = BTreeMap::new();
    for e in i_max.members() {
        let factor = system.factor(e)?;
        let mut ev = Event::empty(&space);
        for atom in 0..factor.atom_count() {
            if rng.random::<f64>() < 0.75 {
                ev = ev.or(&factor.atom_event(atom))?;
            }
        }
        events.insert(e, ev);
    }
    let members: Vec<u32> = i_max.members().collect();
    loop {
        let mut joint = Event::full(&space);
        for e in &members {
            joint = joint.and(&events[e])?;
        }
        if joint.prob().is_zero() {
            break;
        }
        // A positive-weight witness to destroy.
        let witness = joint
            .indices()
            .into_iter()
            .find(|&i| !space.weight(i).is_zero())
            .expect("positive joint probability implies a positive-weight point");
        let e = members[rng.random_range(0..members.len())];
        let factor = system.factor(e)?;
        let atom = factor.atom_of(witness);
        events.insert(e, events[&e].minus(&factor.atom_event(atom))?);
    }

    UipProblem::new(system, events, config.epsilon.clone())
}

fn trim_to_height(mask: u32, max_height: u32, rng: &mut impl Rng) -> u32 {
    let mut m = mask;
    while m.count_ones() > max_height {
        // Clear a random set bit.
        let bits: Vec<u32> = (0..32).filter(|b| m >> b & 1 == 1).collect();
        m &= !(1 << bits[rng.random_range(0..bits.len())]);
    }
    m
}

fn coordinate_factor(
    space: &SpaceRef,
    sizes: &[usize],
    mask: u32,
    digits: &impl Fn(usize) -> Vec<usize>,
) -> Factor {
    let assignment: Vec<u32> = (0..space.len())
        .map(|p| {
            let ds = digits(p);
            let mut key = 0u32;
            for (j, &d) in ds.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    key = key * sizes[j] as u32 + d as u32;
                }
            }
            key
        })
        .collect();
    Factor::from_assignment(space, &assignment).unwrap()
}
