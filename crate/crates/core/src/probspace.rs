//! Finite probability spaces, factors-as-partitions, conditional
//! expectation, and relative-independence measurement.
//!
//! A space is a finite list of weighted points; weights are exact
//! rationals by default, with an optional floating-point mode for bulk
//! empirical pipelines. Numeric mode is a property of the space and all
//! attached objects; mixing modes is an input error.
//!
//! Factors are partitions of the point set into atoms — on a finite space
//! every sub-sigma-algebra is of this form. Conditional expectation is the
//! atom-wise weighted average, defined as 0 on atoms of total weight 0 so
//! that all identities below are deterministic. Zero-weight points are the
//! finite stand-in for null-but-nonempty events and are deliberately
//! allowed.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numeric mode of a space: exact rational or binary floating point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "rational")]
    Rational,
    #[serde(rename = "float")]
    Float,
}

/// A numeric value living in one of the two modes.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rat(BigRational),
    F64(f64),
}

impl Scalar {
    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Rational => Scalar::Rat(BigRational::zero()),
            Mode::Float => Scalar::F64(0.0),
        }
    }

    pub fn one(mode: Mode) -> Self {
        Scalar::from_int(1, mode)
    }

    pub fn from_int(v: i64, mode: Mode) -> Self {
        match mode {
            Mode::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
            Mode::Float => Scalar::F64(v as f64),
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Rat(_) => Mode::Rational,
            Scalar::F64(_) => Mode::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::F64(x) => *x == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rat(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::F64(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::F64(_) => None,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(r.abs()),
            Scalar::F64(x) => Scalar::F64(x.abs()),
        }
    }

    fn binop(
        &self,
        other: &Scalar,
        fr: impl Fn(&BigRational, &BigRational) -> BigRational,
        ff: impl Fn(f64, f64) -> f64,
    ) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(fr(a, b)),
            (Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(ff(*a, *b)),
            _ => panic!("numeric mode mismatch in scalar arithmetic"),
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        self.binop(other, |a, b| a + b, |a, b| a + b)
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.binop(other, |a, b| a - b, |a, b| a - b)
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        self.binop(other, |a, b| a * b, |a, b| a * b)
    }

    /// Division; division by zero yields 0 (used only for the null-atom
    /// conditional-expectation convention).
    pub fn div_or_zero(&self, other: &Scalar) -> Scalar {
        if other.is_zero() {
            return Scalar::zero(self.mode());
        }
        self.binop(other, |a, b| a / b, |a, b| a / b)
    }

    pub fn cmp_total(&self, other: &Scalar) -> std::cmp::Ordering {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a.cmp(b),
            (Scalar::F64(a), Scalar::F64(b)) => a.total_cmp(b),
            _ => panic!("numeric mode mismatch in scalar comparison"),
        }
    }

    pub fn le(&self, other: &Scalar) -> bool {
        self.cmp_total(other) != std::cmp::Ordering::Greater
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if self.cmp_total(&other) == std::cmp::Ordering::Less {
            other
        } else {
            self
        }
    }
}

/// Weighted finite sample space. Construct through [`ProbSpace::new`] and
/// share via [`SpaceRef`]; operations require their arguments to reference
/// the same space allocation.
#[derive(Debug)]
pub struct ProbSpace {
    points: Vec<String>,
    weights: Vec<Scalar>,
    mode: Mode,
}

pub type SpaceRef = Arc<ProbSpace>;

impl ProbSpace {
    /// Validates that weights are nonnegative, match `mode`, and sum to 1
    /// (exactly in rational mode, within 1e-9 in float mode).
    pub fn new(points: Vec<String>, weights: Vec<Scalar>, mode: Mode) -> Result<SpaceRef> {
        if points.is_empty() {
            return Err(Error::input("sample space must have at least one point"));
        }
        if points.len() != weights.len() {
            return Err(Error::input("one weight per point required"));
        }
        let mut sum = Scalar::zero(mode);
        for w in &weights {
            if w.mode() != mode {
                return Err(Error::input("weight numeric mode differs from space mode"));
            }
            if w.cmp_total(&Scalar::zero(mode)) == std::cmp::Ordering::Less {
                return Err(Error::input("weights must be nonnegative"));
            }
            sum = sum.add(w);
        }
        let ok = match &sum {
            Scalar::Rat(r) => *r == BigRational::from_integer(BigInt::from(1)),
            Scalar::F64(x) => (x - 1.0).abs() <= 1e-9,
        };
        if !ok {
            return Err(Error::input("weights must sum to 1"));
        }
        Ok(Arc::new(ProbSpace {
            points,
            weights,
            mode,
        }))
    }

    /// Uniform rational space over the given point labels.
    pub fn uniform(points: Vec<String>) -> Result<SpaceRef> {
        let n = points.len() as i64;
        if n == 0 {
            return Err(Error::input("sample space must have at least one point"));
        }
        let w = Scalar::ratio(1, n);
        let weights = vec![w; points.len()];
        ProbSpace::new(points, weights, Mode::Rational)
    }

    /// Uniform rational space with generated labels `p0..p{n-1}`.
    pub fn uniform_n(n: usize) -> Result<SpaceRef> {
        ProbSpace::uniform((0..n).map(|i| format!("p{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn point_id(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn point_ids(&self) -> &[String] {
        &self.points
    }

    pub fn weight(&self, i: usize) -> &Scalar {
        &self.weights[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.points.iter().position(|p| p == id)
    }
}

fn same_space(a: &SpaceRef, b: &SpaceRef) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        Ok(())
    } else {
        Err(Error::input("objects belong to different sample spaces"))
    }
}

/// Measurable event, stored as a point bitset.
#[derive(Clone, Debug)]
pub struct Event {
    space: SpaceRef,
    bits: Vec<u64>,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) && self.bits == other.bits
    }
}

impl Event {
    pub fn empty(space: &SpaceRef) -> Event {
        let words = space.len().div_ceil(64);
        Event {
            space: space.clone(),
            bits: vec![0; words],
        }
    }

    pub fn full(space: &SpaceRef) -> Event {
        let mut e = Event::empty(space);
        for i in 0..space.len() {
            e.insert(i);
        }
        e
    }

    pub fn from_indices(space: &SpaceRef, indices: &[usize]) -> Result<Event> {
        let mut e = Event::empty(space);
        for &i in indices {
            if i >= space.len() {
                return Err(Error::input(format!("point index {i} out of range")));
            }
            e.insert(i);
        }
        Ok(e)
    }

    fn insert(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.space.len())
            .filter(|&i| self.contains(i))
            .collect()
    }

    pub fn card(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Literal set emptiness (not merely null).
    pub fn is_empty_set(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn and(&self, other: &Event) -> Result<Event> {
        same_space(&self.space, &other.space)?;
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| a & b)
            .collect();
        Ok(Event {
            space: self.space.clone(),
            bits,
        })
    }

    pub fn or(&self, other: &Event) -> Result<Event> {
        same_space(&self.space, &other.space)?;
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| a | b)
            .collect();
        Ok(Event {
            space: self.space.clone(),
            bits,
        })
    }

    pub fn minus(&self, other: &Event) -> Result<Event> {
        same_space(&self.space, &other.space)?;
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| a & !b)
            .collect();
        Ok(Event {
            space: self.space.clone(),
            bits,
        })
    }

    pub fn complement(&self) -> Event {
        Event::full(&self.space).minus(self).unwrap()
    }

    pub fn prob(&self) -> Scalar {
        let mut p = Scalar::zero(self.space.mode());
        for i in 0..self.space.len() {
            if self.contains(i) {
                p = p.add(self.space.weight(i));
            }
        }
        p
    }

    /// P(self Δ other).
    pub fn symm_diff_prob(&self, other: &Event) -> Result<Scalar> {
        Ok(self.minus(other)?.prob().add(&other.minus(self)?.prob()))
    }

    pub fn is_measurable_in(&self, factor: &Factor) -> bool {
        if !Arc::ptr_eq(&self.space, &factor.space) {
            return false;
        }
        // Must be a union of atoms: no atom may be split.
        let mut atom_state: Vec<Option<bool>> = vec![None; factor.atom_count];
        for i in 0..self.space.len() {
            let a = factor.atom_of[i] as usize;
            let inside = self.contains(i);
            match atom_state[a] {
                None => atom_state[a] = Some(inside),
                Some(s) if s != inside => return false,
                _ => {}
            }
        }
        true
    }
}

/// Factor (finite sub-sigma-algebra) stored as a partition into atoms.
/// Atom numbering is canonical: atoms are numbered by first point of
/// occurrence, so structurally equal partitions compare equal.
#[derive(Clone, Debug)]
pub struct Factor {
    space: SpaceRef,
    atom_of: Vec<u32>,
    atom_count: usize,
    tags: Option<Vec<String>>,
}

impl PartialEq for Factor {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) && self.atom_of == other.atom_of
    }
}

impl Factor {
    /// From an arbitrary atom assignment; ids are renumbered canonically.
    pub fn from_assignment(space: &SpaceRef, assignment: &[u32]) -> Result<Factor> {
        if assignment.len() != space.len() {
            return Err(Error::input("assignment must cover every point"));
        }
        let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
        let mut atom_of = Vec::with_capacity(assignment.len());
        for &raw in assignment {
            let next = remap.len() as u32;
            let id = *remap.entry(raw).or_insert(next);
            atom_of.push(id);
        }
        Ok(Factor {
            space: space.clone(),
            atom_of,
            atom_count: remap.len(),
            tags: None,
        })
    }

    /// From explicit atom blocks, which must partition the point set.
    pub fn from_blocks(space: &SpaceRef, blocks: &[Vec<usize>]) -> Result<Factor> {
        let mut assignment = vec![u32::MAX; space.len()];
        for (a, block) in blocks.iter().enumerate() {
            for &i in block {
                if i >= space.len() {
                    return Err(Error::input(format!("point index {i} out of range")));
                }
                if assignment[i] != u32::MAX {
                    return Err(Error::input(format!("point {i} assigned to two atoms")));
                }
                assignment[i] = a as u32;
            }
        }
        if assignment.contains(&u32::MAX) {
            return Err(Error::input("blocks do not cover every point"));
        }
        Factor::from_assignment(space, &assignment)
    }

    /// The trivial factor: one atom.
    pub fn trivial(space: &SpaceRef) -> Factor {
        Factor::from_assignment(space, &vec![0; space.len()]).unwrap()
    }

    /// The discrete factor: singleton atoms.
    pub fn discrete(space: &SpaceRef) -> Factor {
        let assignment: Vec<u32> = (0..space.len() as u32).collect();
        Factor::from_assignment(space, &assignment).unwrap()
    }

    /// Factor generated by a list of events: atoms are the classes of the
    /// membership-signature relation.
    pub fn generated_by(space: &SpaceRef, events: &[Event]) -> Result<Factor> {
        for e in events {
            same_space(space, &e.space)?;
        }
        let mut signature_ids: BTreeMap<Vec<bool>, u32> = BTreeMap::new();
        let mut assignment = Vec::with_capacity(space.len());
        for i in 0..space.len() {
            let sig: Vec<bool> = events.iter().map(|e| e.contains(i)).collect();
            let next = signature_ids.len() as u32;
            let id = *signature_ids.entry(sig).or_insert(next);
            assignment.push(id);
        }
        Factor::from_assignment(space, &assignment)
    }

    pub fn with_tags(mut self, tags: Vec<String>) -> Factor {
        self.tags = Some(tags);
        self
    }

    pub fn tags(&self) -> Option<&[String]> {
        self.tags.as_deref()
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn atom_of(&self, point: usize) -> usize {
        self.atom_of[point] as usize
    }

    pub fn atom_points(&self, atom: usize) -> Vec<usize> {
        (0..self.space.len())
            .filter(|&i| self.atom_of[i] as usize == atom)
            .collect()
    }

    pub fn atom_event(&self, atom: usize) -> Event {
        let mut e = Event::empty(&self.space);
        for i in 0..self.space.len() {
            if self.atom_of[i] as usize == atom {
                e.insert(i);
            }
        }
        e
    }

    pub fn atom_blocks(&self) -> Vec<Vec<usize>> {
        (0..self.atom_count).map(|a| self.atom_points(a)).collect()
    }

    pub fn atom_weight(&self, atom: usize) -> Scalar {
        let mut w = Scalar::zero(self.space.mode());
        for i in 0..self.space.len() {
            if self.atom_of[i] as usize == atom {
                w = w.add(self.space.weight(i));
            }
        }
        w
    }

    /// Least common extension: atoms are the nonempty pairwise
    /// intersections of the two partitions.
    pub fn join(&self, other: &Factor) -> Result<Factor> {
        same_space(&self.space, &other.space)?;
        let mut ids: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut assignment = Vec::with_capacity(self.space.len());
        for i in 0..self.space.len() {
            let key = (self.atom_of[i], other.atom_of[i]);
            let next = ids.len() as u32;
            assignment.push(*ids.entry(key).or_insert(next));
        }
        Factor::from_assignment(&self.space, &assignment)
    }

    /// True when `self` is a factor of `finer` (every atom of `finer`
    /// sits inside one atom of `self`).
    pub fn is_factor_of(&self, finer: &Factor) -> bool {
        if !Arc::ptr_eq(&self.space, &finer.space) {
            return false;
        }
        let mut image: Vec<Option<u32>> = vec![None; finer.atom_count];
        for i in 0..self.space.len() {
            let fa = finer.atom_of[i] as usize;
            let coarse = self.atom_of[i];
            match image[fa] {
                None => image[fa] = Some(coarse),
                Some(c) if c != coarse => return false,
                _ => {}
            }
        }
        true
    }
}

/// Joins a list of factors; the empty list gives the trivial factor.
pub fn join_all(space: &SpaceRef, factors: &[&Factor]) -> Result<Factor> {
    let mut acc = Factor::trivial(space);
    for f in factors {
        acc = acc.join(f)?;
    }
    Ok(acc)
}

/// Random variable: one value per point, in the space's numeric mode.
#[derive(Clone, Debug)]
pub struct RandomVar {
    space: SpaceRef,
    values: Vec<Scalar>,
}

impl PartialEq for RandomVar {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) && self.values == other.values
    }
}

impl RandomVar {
    pub fn new(space: &SpaceRef, values: Vec<Scalar>) -> Result<RandomVar> {
        if values.len() != space.len() {
            return Err(Error::input("random variable must be defined everywhere"));
        }
        if values.iter().any(|v| v.mode() != space.mode()) {
            return Err(Error::input("value numeric mode differs from space mode"));
        }
        Ok(RandomVar {
            space: space.clone(),
            values,
        })
    }

    pub fn constant(space: &SpaceRef, value: Scalar) -> Result<RandomVar> {
        let values = vec![value; space.len()];
        RandomVar::new(space, values)
    }

    pub fn indicator(event: &Event) -> RandomVar {
        let mode = event.space.mode();
        let values = (0..event.space.len())
            .map(|i| {
                if event.contains(i) {
                    Scalar::one(mode)
                } else {
                    Scalar::zero(mode)
                }
            })
            .collect();
        RandomVar {
            space: event.space.clone(),
            values,
        }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &Scalar {
        &self.values[i]
    }

    pub fn expectation(&self) -> Scalar {
        let mut sum = Scalar::zero(self.space.mode());
        for (i, v) in self.values.iter().enumerate() {
            sum = sum.add(&v.mul(self.space.weight(i)));
        }
        sum
    }

    pub fn pointwise_mul(&self, other: &RandomVar) -> Result<RandomVar> {
        same_space(&self.space, &other.space)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.mul(b))
            .collect();
        RandomVar::new(&self.space, values)
    }

    pub fn pointwise_sub(&self, other: &RandomVar) -> Result<RandomVar> {
        same_space(&self.space, &other.space)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.sub(b))
            .collect();
        RandomVar::new(&self.space, values)
    }

    /// True if the variable is constant on every atom of `factor`.
    pub fn is_measurable_in(&self, factor: &Factor) -> bool {
        if !Arc::ptr_eq(&self.space, &factor.space) {
            return false;
        }
        let mut seen: Vec<Option<&Scalar>> = vec![None; factor.atom_count];
        for i in 0..self.space.len() {
            let a = factor.atom_of[i] as usize;
            match seen[a] {
                None => seen[a] = Some(&self.values[i]),
                Some(v) if v != &self.values[i] => return false,
                _ => {}
            }
        }
        true
    }
}

/// Conditional expectation: constant on each atom, equal to the weighted
/// average of `f` there; 0 on atoms of total weight 0.
pub fn cond_expect(f: &RandomVar, factor: &Factor) -> Result<RandomVar> {
    same_space(&f.space, &factor.space)?;
    let mode = f.space.mode();
    let mut num = vec![Scalar::zero(mode); factor.atom_count];
    let mut den = vec![Scalar::zero(mode); factor.atom_count];
    for i in 0..f.space.len() {
        let a = factor.atom_of[i] as usize;
        num[a] = num[a].add(&f.values[i].mul(f.space.weight(i)));
        den[a] = den[a].add(f.space.weight(i));
    }
    let atom_value: Vec<Scalar> = num
        .iter()
        .zip(&den)
        .map(|(n, d)| n.div_or_zero(d))
        .collect();
    let values = (0..f.space.len())
        .map(|i| atom_value[factor.atom_of[i] as usize].clone())
        .collect();
    RandomVar::new(&f.space, values)
}

/// Conditional probability of an event: `cond_expect` of its indicator.
pub fn cond_prob(event: &Event, factor: &Factor) -> Result<RandomVar> {
    cond_expect(&RandomVar::indicator(event), factor)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    /// The squared L2 norm, kept squared so rational mode stays exact.
    L2Squared,
    /// Essential supremum: maximum over positive-weight points.
    LInf,
}

pub fn lp_norm(f: &RandomVar, norm: Norm) -> Scalar {
    let mode = f.space.mode();
    match norm {
        Norm::L1 => {
            let mut sum = Scalar::zero(mode);
            for i in 0..f.space.len() {
                sum = sum.add(&f.values[i].abs().mul(f.space.weight(i)));
            }
            sum
        }
        Norm::L2Squared => {
            let mut sum = Scalar::zero(mode);
            for i in 0..f.space.len() {
                sum = sum.add(&f.values[i].mul(&f.values[i]).mul(f.space.weight(i)));
            }
            sum
        }
        Norm::LInf => {
            let mut best = Scalar::zero(mode);
            for i in 0..f.space.len() {
                if !f.space.weight(i).is_zero() {
                    best = best.max(f.values[i].abs());
                }
            }
            best
        }
    }
}

/// Relative-independence defect of `b1` and `b2` conditioning on `b`:
/// the maximum over pairs of atom indicators `(I(E1), I(E2))` of
/// `|| E(I1 I2 | b) - E(I1 | b) E(I2 | b) ||_L1`.
///
/// Zero iff the defining identity holds for all indicator pairs, and then
/// by bilinearity for all bounded variables.
pub fn independence_defect(b1: &Factor, b2: &Factor, b: &Factor) -> Result<Scalar> {
    same_space(&b1.space, &b2.space)?;
    same_space(&b1.space, &b.space)?;
    let space = &b1.space;
    let mode = space.mode();
    // Precompute conditional expectations of every atom indicator.
    let cond1: Vec<RandomVar> = (0..b1.atom_count)
        .map(|a| cond_prob(&b1.atom_event(a), b))
        .collect::<Result<_>>()?;
    let cond2: Vec<RandomVar> = (0..b2.atom_count)
        .map(|a| cond_prob(&b2.atom_event(a), b))
        .collect::<Result<_>>()?;
    let mut worst = Scalar::zero(mode);
    for (a1, c1) in cond1.iter().enumerate() {
        let e1 = b1.atom_event(a1);
        for (a2, c2) in cond2.iter().enumerate() {
            let joint = cond_prob(&e1.and(&b2.atom_event(a2))?, b)?;
            let product = c1.pointwise_mul(c2)?;
            let defect = lp_norm(&joint.pointwise_sub(&product)?, Norm::L1);
            worst = worst.max(defect);
        }
    }
    Ok(worst)
}

/// Result of [`best_regular_approx`].
#[derive(Clone, Debug)]
pub struct RegularApprox {
    pub event: Event,
    /// Achieved distance P(E Δ F).
    pub distance: Scalar,
    /// Whether the distance met the requested bound.
    pub within: bool,
}

/// Best approximation of `event` by a boolean combination of `generators`:
/// the union of generated-factor atoms on which the conditional density of
/// `event` exceeds 1/2. Failure to meet `epsilon` is reported, not thrown.
pub fn best_regular_approx(
    event: &Event,
    generators: &[Event],
    epsilon: &Scalar,
) -> Result<RegularApprox> {
    if generators.is_empty() {
        return Err(Error::input("at least one generator event required"));
    }
    let space = event.space.clone();
    let factor = Factor::generated_by(&space, generators)?;
    let half = match space.mode() {
        Mode::Rational => Scalar::ratio(1, 2),
        Mode::Float => Scalar::F64(0.5),
    };
    let density = cond_prob(event, &factor)?;
    let mut approx = Event::empty(&space);
    for atom in 0..factor.atom_count() {
        let rep = factor.atom_points(atom)[0];
        if half.cmp_total(density.value(rep)) == std::cmp::Ordering::Less {
            approx = approx.or(&factor.atom_event(atom))?;
        }
    }
    let distance = event.symm_diff_prob(&approx)?;
    let within = distance.le(epsilon);
    Ok(RegularApprox {
        event: approx,
        distance,
        within,
    })
}

/// Verdicts of the equivalent formulations of relative independence:
/// (i) vanishing defect, (iii) L2-norm match for atom indicators,
/// (iv) L2-norm match for all measurable events.
#[derive(Clone, Debug)]
pub struct EquivIndependenceReport {
    pub defect: Scalar,
    pub defect_zero: bool,
    pub atoms_match: bool,
    pub events_match: bool,
}

impl EquivIndependenceReport {
    pub fn independent(&self) -> bool {
        self.defect_zero
    }
}

/// Evaluates conditions (i), (iii), (iv) and verifies the verdicts agree;
/// disagreement is a verification failure.
pub fn equiv_independence_check(
    b1: &Factor,
    b2: &Factor,
    b: &Factor,
) -> Result<EquivIndependenceReport> {
    same_space(&b1.space, &b2.space)?;
    same_space(&b1.space, &b.space)?;
    let defect = independence_defect(b1, b2, b)?;
    let defect_zero = defect.is_zero();

    let joined = b.join(b2)?;
    let with_join: Vec<RandomVar> = (0..b1.atom_count)
        .map(|a| cond_prob(&b1.atom_event(a), &joined))
        .collect::<Result<_>>()?;
    let with_base: Vec<RandomVar> = (0..b1.atom_count)
        .map(|a| cond_prob(&b1.atom_event(a), b))
        .collect::<Result<_>>()?;

    // (iii): atom indicators of b1.
    let mut atoms_match = true;
    for a in 0..b1.atom_count {
        if lp_norm(&with_join[a], Norm::L2Squared) != lp_norm(&with_base[a], Norm::L2Squared) {
            atoms_match = false;
        }
    }

    // (iv): all unions of b1-atoms, assembled by linearity of conditional
    // expectation from the per-atom conditionals.
    let mut events_match = true;
    if b1.atom_count <= 20 {
        let space = &b1.space;
        let mode = space.mode();
        for mask in 1u32..(1u32 << b1.atom_count) {
            let mut fj = RandomVar::constant(space, Scalar::zero(mode))?;
            let mut fb = fj.clone();
            for a in 0..b1.atom_count {
                if mask >> a & 1 == 1 {
                    fj = sum_vars(&fj, &with_join[a])?;
                    fb = sum_vars(&fb, &with_base[a])?;
                }
            }
            if lp_norm(&fj, Norm::L2Squared) != lp_norm(&fb, Norm::L2Squared) {
                events_match = false;
                break;
            }
        }
    } else {
        // Too many atoms to sweep every union; the atom verdict is
        // equivalent by linearity.
        events_match = atoms_match;
    }

    if defect_zero != atoms_match || defect_zero != events_match {
        return Err(Error::verification(format!(
            "independence verdicts disagree: defect_zero={defect_zero} atoms={atoms_match} events={events_match}"
        )));
    }
    Ok(EquivIndependenceReport {
        defect,
        defect_zero,
        atoms_match,
        events_match,
    })
}

fn sum_vars(a: &RandomVar, b: &RandomVar) -> Result<RandomVar> {
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x.add(y))
        .collect();
    RandomVar::new(&a.space, values)
}

// ---------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------

/// `{num, den}` pair; values are JSON integers when they fit in 64 bits
/// and decimal strings otherwise.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatJson {
    pub num: IntJson,
    pub den: IntJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntJson {
    Small(i64),
    Big(String),
}

impl IntJson {
    fn to_bigint(&self) -> Result<BigInt> {
        match self {
            IntJson::Small(v) => Ok(BigInt::from(*v)),
            IntJson::Big(s) => s
                .parse::<BigInt>()
                .map_err(|_| Error::input(format!("invalid integer literal '{s}'"))),
        }
    }

    fn from_bigint(v: &BigInt) -> IntJson {
        match v.to_i64() {
            Some(small) => IntJson::Small(small),
            None => IntJson::Big(v.to_string()),
        }
    }
}

impl RatJson {
    pub fn to_rational(&self) -> Result<BigRational> {
        let den = self.den.to_bigint()?;
        if den.is_zero() {
            return Err(Error::input("zero denominator"));
        }
        Ok(BigRational::new(self.num.to_bigint()?, den))
    }

    pub fn from_rational(r: &BigRational) -> RatJson {
        RatJson {
            num: IntJson::from_bigint(r.numer()),
            den: IntJson::from_bigint(r.denom()),
        }
    }
}

/// Serialized weight: exact pair in rational mode, plain float otherwise.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightJson {
    Exact(RatJson),
    Float(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceJson {
    pub mode: Mode,
    pub points: Vec<String>,
    pub weights: Vec<WeightJson>,
}

impl SpaceJson {
    pub fn from_space(space: &ProbSpace) -> SpaceJson {
        let weights = space
            .weights
            .iter()
            .map(|w| match w {
                Scalar::Rat(r) => WeightJson::Exact(RatJson::from_rational(r)),
                Scalar::F64(x) => WeightJson::Float(*x),
            })
            .collect();
        SpaceJson {
            mode: space.mode,
            points: space.points.clone(),
            weights,
        }
    }

    pub fn to_space(&self) -> Result<SpaceRef> {
        let weights = self
            .weights
            .iter()
            .map(|w| match (w, self.mode) {
                (WeightJson::Exact(r), Mode::Rational) => Ok(Scalar::Rat(r.to_rational()?)),
                (WeightJson::Float(x), Mode::Float) => Ok(Scalar::F64(*x)),
                _ => Err(Error::input("weight representation does not match mode")),
            })
            .collect::<Result<Vec<_>>>()?;
        ProbSpace::new(self.points.clone(), weights, self.mode)
    }
}

/// Factor as a list of atoms, each an array of point indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorJson {
    pub atoms: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<Vec<String>>,
}

impl FactorJson {
    pub fn from_factor(f: &Factor) -> FactorJson {
        FactorJson {
            atoms: f.atom_blocks(),
            tags: f.tags.clone(),
        }
    }

    pub fn to_factor(&self, space: &SpaceRef) -> Result<Factor> {
        let mut f = Factor::from_blocks(space, &self.atoms)?;
        if let Some(tags) = &self.tags {
            f = f.with_tags(tags.clone());
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rat(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn uniform4() -> SpaceRef {
        ProbSpace::uniform_n(4).unwrap()
    }

    /// Random rational space with occasional zero weights.
    fn random_space(points: usize, rng: &mut impl Rng) -> SpaceRef {
        loop {
            let raw: Vec<i64> = (0..points)
                .map(|_| {
                    if rng.random::<f64>() < 0.2 {
                        0
                    } else {
                        rng.random_range(1..6)
                    }
                })
                .collect();
            let total: i64 = raw.iter().sum();
            if total == 0 {
                continue;
            }
            let weights: Vec<Scalar> = raw.iter().map(|&w| rat(w, total)).collect();
            return ProbSpace::new(
                (0..points).map(|i| format!("p{i}")).collect(),
                weights,
                Mode::Rational,
            )
            .unwrap();
        }
    }

    fn random_factor(space: &SpaceRef, max_atoms: usize, rng: &mut impl Rng) -> Factor {
        let assignment: Vec<u32> = (0..space.len())
            .map(|_| rng.random_range(0..max_atoms as u32))
            .collect();
        Factor::from_assignment(space, &assignment).unwrap()
    }

    /// Refines `coarse` by splitting each atom into up to two halves.
    fn random_refinement(coarse: &Factor, rng: &mut impl Rng) -> Factor {
        let space = coarse.space().clone();
        let assignment: Vec<u32> = (0..space.len())
            .map(|i| 2 * coarse.atom_of(i) as u32 + rng.random_range(0..2u32))
            .collect();
        Factor::from_assignment(&space, &assignment).unwrap()
    }

    fn random_var(space: &SpaceRef, rng: &mut impl Rng) -> RandomVar {
        let values = (0..space.len())
            .map(|_| rat(rng.random_range(-4..5), rng.random_range(1..4)))
            .collect();
        RandomVar::new(space, values).unwrap()
    }

    #[test]
    fn space_validation() {
        assert!(ProbSpace::new(vec![], vec![], Mode::Rational).is_err());
        assert!(ProbSpace::new(
            vec!["a".into(), "b".into()],
            vec![rat(1, 2), rat(1, 3)],
            Mode::Rational
        )
        .is_err());
        assert!(ProbSpace::new(vec!["a".into()], vec![Scalar::F64(1.0)], Mode::Rational).is_err());
        // Zero weights are allowed.
        let s = ProbSpace::new(
            vec!["a".into(), "b".into()],
            vec![rat(1, 1), rat(0, 1)],
            Mode::Rational,
        )
        .unwrap();
        assert!(s.weight(1).is_zero());
    }

    #[test]
    fn join_examples() {
        let s = uniform4();
        let b = Factor::from_blocks(&s, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(Factor::trivial(&s).join(&b).unwrap(), b);
        assert_eq!(b.join(&b).unwrap(), b);
        let c = Factor::from_blocks(&s, &[vec![0, 2], vec![1, 3]]).unwrap();
        let joined = b.join(&c).unwrap();
        assert_eq!(joined, Factor::discrete(&s));
    }

    #[test]
    fn cond_expect_examples() {
        let s = uniform4();
        let f = RandomVar::new(&s, vec![rat(1, 1), rat(2, 1), rat(3, 1), rat(4, 1)]).unwrap();
        let trivial = cond_expect(&f, &Factor::trivial(&s)).unwrap();
        assert!(trivial.values().iter().all(|v| v == &rat(5, 2)));

        let discrete = cond_expect(&f, &Factor::discrete(&s)).unwrap();
        assert_eq!(discrete, f);

        let b = Factor::from_blocks(&s, &[vec![0, 1], vec![2, 3]]).unwrap();
        let halves = cond_expect(&f, &b).unwrap();
        assert_eq!(
            halves.values(),
            &[rat(3, 2), rat(3, 2), rat(7, 2), rat(7, 2)]
        );
    }

    #[test]
    fn cond_expect_zero_weight_atom_is_zero() {
        let s = ProbSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![rat(1, 2), rat(1, 2), rat(0, 1)],
            Mode::Rational,
        )
        .unwrap();
        let b = Factor::from_blocks(&s, &[vec![0, 1], vec![2]]).unwrap();
        let f = RandomVar::constant(&s, rat(7, 1)).unwrap();
        let g = cond_expect(&f, &b).unwrap();
        assert_eq!(g.value(2), &rat(0, 1));
    }

    #[test]
    fn lp_norm_examples() {
        let s = ProbSpace::uniform_n(2).unwrap();
        let zero = RandomVar::constant(&s, rat(0, 1)).unwrap();
        assert!(lp_norm(&zero, Norm::L1).is_zero());

        let c = RandomVar::constant(&s, rat(-3, 1)).unwrap();
        assert_eq!(lp_norm(&c, Norm::L1), rat(3, 1));
        assert_eq!(lp_norm(&c, Norm::L2Squared), rat(9, 1));
        assert_eq!(lp_norm(&c, Norm::LInf), rat(3, 1));

        let pm = RandomVar::new(&s, vec![rat(1, 1), rat(-1, 1)]).unwrap();
        assert_eq!(lp_norm(&pm, Norm::L1), rat(1, 1));
        assert_eq!(lp_norm(&pm, Norm::L2Squared), rat(1, 1));
    }

    /// Product of two uniform coordinate spaces, coordinate factors.
    fn product_2x2() -> (SpaceRef, Factor, Factor) {
        let s =
            ProbSpace::uniform(vec!["00".into(), "01".into(), "10".into(), "11".into()]).unwrap();
        let first = Factor::from_blocks(&s, &[vec![0, 1], vec![2, 3]]).unwrap();
        let second = Factor::from_blocks(&s, &[vec![0, 2], vec![1, 3]]).unwrap();
        (s, first, second)
    }

    #[test]
    fn defect_examples() {
        let (s, first, second) = product_2x2();
        let trivial = Factor::trivial(&s);
        assert!(independence_defect(&first, &second, &trivial)
            .unwrap()
            .is_zero());

        let two = ProbSpace::uniform_n(2).unwrap();
        let d = Factor::discrete(&two);
        let defect = independence_defect(&d, &d, &Factor::trivial(&two)).unwrap();
        assert_eq!(defect, rat(1, 4));

        // B1 a factor of B: the module property makes the identity exact.
        let b = first.join(&second).unwrap();
        assert!(independence_defect(&first, &second, &b).unwrap().is_zero());
        assert!(independence_defect(&first, &first, &first)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn best_regular_approx_examples() {
        let s = uniform4();
        let g1 = Event::from_indices(&s, &[0, 1]).unwrap();
        let g2 = Event::from_indices(&s, &[0, 2]).unwrap();

        // E itself a boolean combination of the generators.
        let e = Event::from_indices(&s, &[0]).unwrap();
        let r = best_regular_approx(&e, &[g1.clone(), g2.clone()], &rat(0, 1)).unwrap();
        assert!(r.distance.is_zero());
        assert!(r.within);
        assert_eq!(r.event, e);

        // One point of weight w inside a generator atom of weight 3w:
        // majority excludes it.
        let s3 =
            ProbSpace::uniform(vec!["a".into(), "b".into(), "c".into(), "d".into()]).unwrap();
        let gen = Event::from_indices(&s3, &[0, 1, 2]).unwrap();
        let e = Event::from_indices(&s3, &[0]).unwrap();
        let r = best_regular_approx(&e, &[gen], &rat(1, 10)).unwrap();
        assert_eq!(r.distance, rat(1, 4));
        assert!(!r.within);

        // Generators = {Omega}: F is empty or full.
        let omega = Event::full(&s);
        let e = Event::from_indices(&s, &[0]).unwrap();
        let r = best_regular_approx(&e, &[omega], &rat(1, 1)).unwrap();
        assert_eq!(r.distance, rat(1, 4)); // min(P(E), 1 - P(E))
    }

    #[test]
    fn equiv_check_examples() {
        let (s, first, second) = product_2x2();
        let trivial = Factor::trivial(&s);
        let rep = equiv_independence_check(&first, &second, &trivial).unwrap();
        assert!(rep.independent() && rep.atoms_match && rep.events_match);

        let two = ProbSpace::uniform_n(2).unwrap();
        let d = Factor::discrete(&two);
        let rep = equiv_independence_check(&d, &d, &Factor::trivial(&two)).unwrap();
        assert!(!rep.independent() && !rep.atoms_match && !rep.events_match);

        // B1 a factor of B.
        let b = first.join(&second).unwrap();
        let rep = equiv_independence_check(&first, &second, &b).unwrap();
        assert!(rep.independent());
    }

    #[test]
    fn pythagoras_tower_module_contraction_hold_exactly() {
        let mut rng = crate::rng::stream(11, 0);
        for _ in 0..120 {
            let s = random_space(2 + rng.random_range(0..9), &mut rng);
            let coarse = random_factor(&s, 3, &mut rng);
            let fine = random_refinement(&coarse, &mut rng);
            let f = random_var(&s, &mut rng);

            // Pythagoras.
            let ef = cond_expect(&f, &fine).unwrap();
            let ec = cond_expect(&f, &coarse).unwrap();
            let lhs = lp_norm(&ef, Norm::L2Squared);
            let rhs = lp_norm(&ec, Norm::L2Squared)
                .add(&lp_norm(&ef.pointwise_sub(&ec).unwrap(), Norm::L2Squared));
            assert_eq!(lhs, rhs);

            // Tower.
            let tower = cond_expect(&ef, &coarse).unwrap();
            assert_eq!(tower, ec);

            // Module property: g coarse-measurable.
            let g = cond_expect(&random_var(&s, &mut rng), &coarse).unwrap();
            let lhs = cond_expect(&f.pointwise_mul(&g).unwrap(), &coarse).unwrap();
            let rhs = g.pointwise_mul(&ec).unwrap();
            assert_eq!(lhs, rhs);

            // Contraction in L1.
            assert!(lp_norm(&ec, Norm::L1).le(&lp_norm(&f, Norm::L1)));
        }
    }

    #[test]
    fn gluing_on_product_spaces() {
        // Three independent coordinates; B the trivial factor.
        let mut rng = crate::rng::stream(12, 0);
        for _ in 0..20 {
            let sizes = [2, 2, rng.random_range(2..4usize)];
            let total: usize = sizes.iter().product();
            let s = ProbSpace::uniform_n(total).unwrap();
            let coord = |k: usize| {
                let mut assign = vec![0u32; total];
                for (i, a) in assign.iter_mut().enumerate() {
                    let mut rest = i;
                    let mut digits = [0usize; 3];
                    for (j, &sz) in sizes.iter().enumerate().rev() {
                        digits[j] = rest % sz;
                        rest /= sz;
                    }
                    *a = digits[k] as u32;
                }
                Factor::from_assignment(&s, &assign).unwrap()
            };
            let (b1, b2, b3) = (coord(0), coord(1), coord(2));
            let b = Factor::trivial(&s);
            let b12 = b1.join(&b2).unwrap();
            assert!(independence_defect(&b3, &b12, &b).unwrap().is_zero());
            assert!(independence_defect(&b1, &b2, &b).unwrap().is_zero());
            // Gluing conclusion.
            let b23 = b2.join(&b3).unwrap();
            assert!(independence_defect(&b1, &b23, &b).unwrap().is_zero());
        }
    }

    #[test]
    fn stability_under_adjoined_factors() {
        // defect(B1,B2,B) = 0 stays 0 after conditioning on factors of B1, B2.
        let (s, first, second) = product_2x2();
        let b = Factor::trivial(&s);
        assert!(independence_defect(&first, &second, &b).unwrap().is_zero());
        let sub1 = Factor::trivial(&s); // coarsening of first
        let sub2 = second.clone(); // (improper) factor of second
        let enlarged = b.join(&sub1).unwrap().join(&sub2).unwrap();
        assert!(independence_defect(&first, &second, &enlarged)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn equiv_verdicts_agree_on_random_spaces() {
        let mut rng = crate::rng::stream(13, 0);
        for _ in 0..60 {
            let s = random_space(2 + rng.random_range(0..7), &mut rng);
            let b1 = random_factor(&s, 3, &mut rng);
            let b2 = random_factor(&s, 3, &mut rng);
            let b = random_factor(&s, 2, &mut rng);
            // The check itself errors if the three verdicts disagree.
            equiv_independence_check(&b1, &b2, &b).unwrap();
        }
    }

    #[test]
    fn float_mode_operations_work() {
        let s = ProbSpace::new(
            (0..4).map(|i| format!("p{i}")).collect(),
            vec![Scalar::F64(0.25); 4],
            Mode::Float,
        )
        .unwrap();
        let f = RandomVar::new(
            &s,
            vec![
                Scalar::F64(1.0),
                Scalar::F64(2.0),
                Scalar::F64(3.0),
                Scalar::F64(4.0),
            ],
        )
        .unwrap();
        let b = Factor::from_blocks(&s, &[vec![0, 1], vec![2, 3]]).unwrap();
        let e = cond_expect(&f, &b).unwrap();
        assert_eq!(e.value(0), &Scalar::F64(1.5));
        assert_eq!(e.value(3), &Scalar::F64(3.5));
        assert_eq!(lp_norm(&f, Norm::LInf), Scalar::F64(4.0));

        // Independent coordinate factors stay exactly independent even
        // in float mode (the arithmetic here is exact in binary).
        let c = Factor::from_blocks(&s, &[vec![0, 2], vec![1, 3]]).unwrap();
        let defect = independence_defect(&b, &c, &Factor::trivial(&s)).unwrap();
        assert_eq!(defect, Scalar::F64(0.0));
    }

    #[test]
    fn mode_mixing_is_rejected() {
        let r = ProbSpace::uniform_n(2).unwrap();
        assert!(RandomVar::new(&r, vec![Scalar::F64(0.0), Scalar::F64(1.0)]).is_err());
        let f = ProbSpace::new(
            vec!["a".into(), "b".into()],
            vec![Scalar::F64(0.5), Scalar::F64(0.5)],
            Mode::Float,
        )
        .unwrap();
        assert!(RandomVar::new(&f, vec![rat(0, 1), rat(1, 1)]).is_err());
    }

    #[test]
    fn different_spaces_are_rejected() {
        let a = ProbSpace::uniform_n(2).unwrap();
        let b = ProbSpace::uniform_n(2).unwrap();
        let fa = Factor::trivial(&a);
        let fb = Factor::discrete(&b);
        assert!(fa.join(&fb).is_err());
        assert!(independence_defect(&fa, &fa, &fb).is_err());
    }

    #[test]
    fn space_json_round_trip() {
        let s = ProbSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![rat(1, 2), rat(1, 2), rat(0, 1)],
            Mode::Rational,
        )
        .unwrap();
        let text = serde_json::to_string(&SpaceJson::from_space(&s)).unwrap();
        let parsed: SpaceJson = serde_json::from_str(&text).unwrap();
        let back = parsed.to_space().unwrap();
        assert_eq!(back.point_ids(), s.point_ids());
        assert_eq!(back.weight(2), s.weight(2));
    }

    #[test]
    fn factor_json_round_trip() {
        let s = uniform4();
        let f = Factor::from_blocks(&s, &[vec![0, 3], vec![1, 2]]).unwrap();
        let text = serde_json::to_string(&FactorJson::from_factor(&f)).unwrap();
        let parsed: FactorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.to_factor(&s).unwrap(), f);
    }
}
