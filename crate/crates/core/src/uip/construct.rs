//! The executable uniform-intersection-property constructor.
//!
//! Given a certified factor system, events `E_e` (one per downset member)
//! with null joint intersection, and a budget `epsilon`, the constructor
//! produces events `F_e`, measurable in the same factors, whose joint
//! intersection is *literally empty* as a point set, with
//! `P(E_e \ F_e) <= epsilon` for every member.
//!
//! The recursion works on tuples of (sub-ideal, event) slots and follows
//! an induction on the maximum ideal height:
//!
//! * duplicate ideals are merged by intersecting their events, and the
//!   merged answer is expanded back with exact set differences;
//! * a top-height ideal that is non-principal is split over its top
//!   elements via [`finite_rank_decompose`], producing one sub-problem
//!   per decomposition term;
//! * a top-height principal ideal is reduced to its boundary via the
//!   support step [`weak_mixing_step`], which is justified by the
//!   crop relative-independence properties of the system (checked as it
//!   is used);
//! * the base cases are literal-emptiness shortcuts and the singleton
//!   tuple, which takes `F = empty`.
//!
//! A returned solution always passes the independent validator; with
//! exactly-certified hypotheses the achieved bounds are all 0, so any
//! positive `epsilon` is met. In best-effort mode hypothesis slack is
//! tolerated, emptiness stays mandatory, and the achieved bounds are
//! reported instead of promised.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::Zero;

use crate::error::{Error, Result};
use crate::probspace::{independence_defect, join_all, Event, Factor, Mode, Scalar};

use super::downset::{mask_label, Downset};
use super::steps::{finite_rank_decompose, weak_mixing_step};
use super::system::FactorSystem;

/// A UIP instance: a factor system, one event per member, and a budget.
#[derive(Clone, Debug)]
pub struct UipProblem {
    system: FactorSystem,
    events: BTreeMap<u32, Event>,
    epsilon: BigRational,
}

impl UipProblem {
    pub fn new(
        system: FactorSystem,
        events: BTreeMap<u32, Event>,
        epsilon: BigRational,
    ) -> Result<UipProblem> {
        if epsilon <= BigRational::zero() {
            return Err(Error::input("epsilon must be positive"));
        }
        for e in system.index_set().members() {
            let event = events
                .get(&e)
                .ok_or_else(|| Error::input(format!("missing event for {}", mask_label(e))))?;
            if !event.is_measurable_in(system.factor(e)?) {
                return Err(Error::input(format!(
                    "event for {} is not measurable in its factor",
                    mask_label(e)
                )));
            }
        }
        if events.keys().any(|e| !system.index_set().contains(*e)) {
            return Err(Error::input("event indexed outside the downset"));
        }
        Ok(UipProblem {
            system,
            events,
            epsilon,
        })
    }

    pub fn system(&self) -> &FactorSystem {
        &self.system
    }

    pub fn event(&self, e: u32) -> &Event {
        &self.events[&e]
    }

    pub fn epsilon(&self) -> &BigRational {
        &self.epsilon
    }

    /// Probability of the joint intersection of the input events.
    pub fn joint_prob(&self) -> Result<Scalar> {
        let mut joint = Event::full(self.system.space());
        for e in self.system.index_set().members() {
            joint = joint.and(&self.events[&e])?;
        }
        Ok(joint.prob())
    }
}

/// How strictly the constructor treats its hypotheses.
#[derive(Clone, Debug)]
pub enum SolveMode {
    /// Hypotheses must hold exactly; any slack is a precondition error.
    Certified,
    /// Hypothesis defects up to the tolerance are admitted; emptiness is
    /// still mandatory and the achieved bounds are reported.
    BestEffort { tolerance: Scalar },
}

/// A solution with its certificate.
#[derive(Clone, Debug)]
pub struct UipSolution {
    pub events: BTreeMap<u32, Event>,
    pub certificate: Certificate,
}

/// Independent validation record for a solution.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// The joint intersection of the `F_e` is literally empty.
    pub empty_intersection: bool,
    /// Exact `P(E_e \ F_e)` per member.
    pub bounds: BTreeMap<u32, Scalar>,
    /// Largest of the bounds.
    pub achieved: Scalar,
    /// Whether every bound is within the problem's epsilon.
    pub within_epsilon: bool,
    /// Largest hypothesis defect the constructor relied on (0 in
    /// certified runs).
    pub hypothesis_slack: Scalar,
    /// Finite-rank splits the construction performed.
    pub finite_rank_splits: u64,
}

/// Validates a candidate solution against a problem: measurability,
/// literal emptiness, exact bounds. Pure and independent of the
/// construction path.
pub fn validate_solution(
    problem: &UipProblem,
    events: &BTreeMap<u32, Event>,
    hypothesis_slack: Scalar,
) -> Result<Certificate> {
    let space = problem.system.space();
    let mode = space.mode();
    let mut joint = Event::full(space);
    let mut bounds = BTreeMap::new();
    let mut achieved = Scalar::zero(mode);
    for e in problem.system.index_set().members() {
        let f = events
            .get(&e)
            .ok_or_else(|| Error::verification(format!("missing F for {}", mask_label(e))))?;
        if !f.is_measurable_in(problem.system.factor(e)?) {
            return Err(Error::verification(format!(
                "F for {} is not measurable in its factor",
                mask_label(e)
            )));
        }
        joint = joint.and(f)?;
        let bound = problem.events[&e].minus(f)?.prob();
        achieved = achieved.clone().max(bound.clone());
        bounds.insert(e, bound);
    }
    let empty_intersection = joint.is_empty_set();
    let eps = Scalar::Rat(problem.epsilon.clone());
    let within_epsilon = match mode {
        Mode::Rational => achieved.le(&eps),
        Mode::Float => achieved.to_f64() <= eps.to_f64(),
    };
    Ok(Certificate {
        empty_intersection,
        bounds,
        achieved,
        within_epsilon,
        hypothesis_slack,
        finite_rank_splits: 0,
    })
}

/// Runs the constructor. Preconditions: the joint intersection of the
/// events is null, and the system hypotheses pass at tolerance 0
/// (certified) or at the given tolerance (best effort). The returned
/// solution has passed [`validate_solution`]; an invalid construction is
/// reported as a verification failure, never returned silently.
pub fn uip_construct(problem: &UipProblem, mode: &SolveMode) -> Result<UipSolution> {
    let space = problem.system.space();
    if space.mode() != Mode::Rational {
        return Err(Error::input("the constructor requires rational mode"));
    }
    let tolerance = match mode {
        SolveMode::Certified => Scalar::zero(space.mode()),
        SolveMode::BestEffort { tolerance } => tolerance.clone(),
    };
    let report = problem.system.check_hypotheses(&tolerance, 2)?;
    if !report.ok {
        return Err(Error::input(format!(
            "system hypotheses fail at the requested tolerance: nesting_ok={} max_defect={:?}",
            report.nesting_ok, report.max_defect
        )));
    }
    let joint = problem.joint_prob()?;
    if matches!(mode, SolveMode::Certified) && !joint.is_zero() {
        return Err(Error::input(
            "joint intersection of the input events is not null",
        ));
    }

    let mut ctx = Ctx {
        problem,
        strict: matches!(mode, SolveMode::Certified),
        slack: Scalar::zero(space.mode()),
        fuel: 100_000,
        splits: 0,
    };
    let ground = problem.system.index_set().ground();
    let slots: Vec<Slot> = problem
        .system
        .index_set()
        .members()
        .map(|e| {
            Ok(Slot {
                ideal: Downset::principal(ground, e)?,
                event: problem.events[&e].clone(),
            })
        })
        .collect::<Result<_>>()?;
    let raw = ctx.solve(slots, problem.epsilon.clone())?;

    // Tighten: intersecting each F_e with E_e preserves emptiness and the
    // bounds, and returns the input events themselves whenever possible.
    let members: Vec<u32> = problem.system.index_set().members().collect();
    let mut events = BTreeMap::new();
    for (e, f) in members.iter().zip(raw) {
        events.insert(*e, f.and(&problem.events[e])?);
    }

    let mut certificate = validate_solution(problem, &events, ctx.slack.clone())?;
    certificate.finite_rank_splits = ctx.splits;
    if !certificate.empty_intersection {
        return Err(Error::verification(
            "constructed events do not have literally empty intersection",
        ));
    }
    if ctx.strict && !certificate.within_epsilon {
        return Err(Error::verification(
            "constructed events exceed the epsilon budget in certified mode",
        ));
    }
    Ok(UipSolution {
        events,
        certificate,
    })
}

#[derive(Clone, Debug)]
struct Slot {
    ideal: Downset,
    event: Event,
}

struct Ctx<'a> {
    problem: &'a UipProblem,
    strict: bool,
    slack: Scalar,
    fuel: u64,
    splits: u64,
}

impl Ctx<'_> {
    fn space(&self) -> &crate::probspace::SpaceRef {
        self.problem.system.space()
    }

    fn factor_of(&self, ideal: &Downset) -> Result<Factor> {
        self.problem.system.ideal_factor(ideal)
    }

    /// Core recursion; returns one event per slot, aligned with input
    /// order. Invariant: the joint intersection of the slot events is
    /// null (exactly, in certified mode).
    fn solve(&mut self, slots: Vec<Slot>, eps: BigRational) -> Result<Vec<Event>> {
        self.fuel = self
            .fuel
            .checked_sub(1)
            .ok_or_else(|| Error::verification("constructor recursion exceeded its budget"))?;
        let space = self.space().clone();

        if slots.is_empty() {
            return Err(Error::verification(
                "empty tuple reached: joint probability cannot be null",
            ));
        }

        // Shortcut: a literally empty event solves the tuple.
        if let Some(i0) = slots.iter().position(|s| s.event.is_empty_set()) {
            return Ok((0..slots.len())
                .map(|i| {
                    if i == i0 {
                        Event::empty(&space)
                    } else {
                        Event::full(&space)
                    }
                })
                .collect());
        }

        // Shortcut: literally empty joint intersection keeps the events.
        let mut joint = Event::full(&space);
        for s in &slots {
            joint = joint.and(&s.event)?;
        }
        if joint.is_empty_set() {
            return Ok(slots.into_iter().map(|s| s.event).collect());
        }
        if self.strict && !joint.prob().is_zero() {
            return Err(Error::verification(
                "sub-problem joint intersection is not null",
            ));
        }

        // Drop slots whose event is the full space (they impose nothing).
        // A single remaining slot is kept: in best-effort mode events can
        // degrade to the full space, and the singleton base below still
        // produces the mandatory empty intersection (F = empty).
        if slots.len() > 1 {
            if let Some(i0) = slots.iter().position(|s| s.event == Event::full(&space)) {
                let mut reduced = slots.clone();
                reduced.remove(i0);
                let mut sub = self.solve(reduced, eps)?;
                sub.insert(i0, Event::full(&space));
                return Ok(sub);
            }
        }

        // Merge duplicate ideals: solve with the intersected event, then
        // expand with exact set differences.
        for i in 0..slots.len() {
            let dup: Vec<usize> = (0..slots.len())
                .filter(|&j| slots[j].ideal == slots[i].ideal)
                .collect();
            if dup.len() > 1 {
                let mut merged_event = slots[dup[0]].event.clone();
                for &j in &dup[1..] {
                    merged_event = merged_event.and(&slots[j].event)?;
                }
                let mut reduced: Vec<Slot> = Vec::new();
                let mut merged_pos = 0usize;
                for (j, s) in slots.iter().enumerate() {
                    if j == dup[0] {
                        merged_pos = reduced.len();
                        reduced.push(Slot {
                            ideal: s.ideal.clone(),
                            event: merged_event.clone(),
                        });
                    } else if !dup.contains(&j) {
                        reduced.push(s.clone());
                    }
                }
                let sub = self.solve(reduced, eps)?;
                let f_merged = sub[merged_pos].clone();
                let mut out: Vec<Option<Event>> = vec![None; slots.len()];
                // Non-duplicate slots keep their sub-answers in order.
                let mut it = sub.into_iter();
                let mut sub_iter_pos = 0usize;
                for (j, _) in slots.iter().enumerate() {
                    if dup.contains(&j) {
                        continue;
                    }
                    // Advance to the next sub slot, skipping the merged one.
                    loop {
                        let candidate = it.next().ok_or_else(|| {
                            Error::verification("slot alignment lost in dedup expansion")
                        })?;
                        let was_merged = sub_iter_pos == merged_pos;
                        sub_iter_pos += 1;
                        if !was_merged {
                            out[j] = Some(candidate);
                            break;
                        }
                    }
                }
                // Duplicates: F_t = (E_t \ intersection of the others) or F_merged.
                for &t in &dup {
                    let mut others = Event::full(&space);
                    for &s in &dup {
                        if s != t {
                            others = others.and(&slots[s].event)?;
                        }
                    }
                    let f = slots[t].event.minus(&others)?.or(&f_merged)?;
                    out[t] = Some(f);
                }
                return Ok(out.into_iter().map(Option::unwrap).collect());
            }
        }

        // All ideals distinct and all events proper subsets of the space.
        let heights: Vec<u32> = slots
            .iter()
            .map(|s| s.ideal.height().map_or(0, |h| h))
            .collect();
        // Empty-ideal slots carry the trivial factor; their events are
        // full or empty, both handled above. Reaching here with one is a
        // measurability violation.
        for (s, h) in slots.iter().zip(&heights) {
            if s.ideal.is_empty() && *h == 0 {
                return Err(Error::verification(
                    "empty-ideal slot with a nontrivial event",
                ));
            }
        }
        let d = *heights.iter().max().unwrap();
        if d == 0 {
            // All ideals are {empty-set}; dedup has merged them into one.
            if slots.len() == 1 {
                if self.strict && !slots[0].event.prob().is_zero() {
                    return Err(Error::verification("singleton slot event is not null"));
                }
                return Ok(vec![Event::empty(&space)]);
            }
            return Err(Error::verification("distinct height-0 ideals after dedup"));
        }

        // Prefer a non-principal ideal of height d: finite-rank split.
        let pick_nonprincipal = slots.iter().position(|s| {
            s.ideal.height() == Some(d) && s.ideal.as_principal().is_none()
        });
        if let Some(i0) = pick_nonprincipal {
            return self.finite_rank_split(slots, i0, d, eps);
        }

        // All height-d ideals principal: support-reduce the first one.
        let i0 = slots
            .iter()
            .position(|s| s.ideal.height() == Some(d))
            .expect("a height-d ideal exists");
        self.weak_mixing_reduce(slots, i0, d, eps)
    }

    /// Splits slot `i0` (non-principal ideal of height `d`) over its top
    /// elements and recurses per decomposition term.
    fn finite_rank_split(
        &mut self,
        slots: Vec<Slot>,
        i0: usize,
        d: u32,
        eps: BigRational,
    ) -> Result<Vec<Event>> {
        let space = self.space().clone();
        let ideal = slots[i0].ideal.clone();
        let tops = ideal.elements_of_order(d);
        let boundary = ideal.lower_part(d);
        let base = self.factor_of(&boundary)?;
        let parts: Vec<Factor> = tops
            .iter()
            .map(|&t| Ok(self.problem.system.factor(t)?.clone()))
            .collect::<Result<_>>()?;
        let terms = finite_rank_decompose(&slots[i0].event, &base, &parts)?;
        self.splits += 1;
        let m = terms.len().max(1);
        let l = tops.len();
        let sub_eps = eps / BigRational::from_integer((m * (l + 1)).into());

        let ground = ideal.ground();
        let mut f_main = Event::empty(&space);
        let mut f_others: Vec<Event> = slots
            .iter()
            .map(|_| Event::full(&space))
            .collect();
        for term in &terms {
            let mut sub_slots: Vec<Slot> = Vec::new();
            for (j, s) in slots.iter().enumerate() {
                if j != i0 {
                    sub_slots.push(s.clone());
                }
            }
            let first_extra = sub_slots.len();
            for (t, atom) in tops.iter().zip(&term.part_atoms) {
                sub_slots.push(Slot {
                    ideal: Downset::principal(ground, *t)?,
                    event: atom.clone(),
                });
            }
            sub_slots.push(Slot {
                ideal: boundary.clone(),
                event: term.base.clone(),
            });
            let sub = self.solve(sub_slots, sub_eps.clone())?;

            // Combine: the split slot gets the union over terms of the
            // conjunction of its parts; every other slot intersects.
            let mut conj = sub[first_extra + l].clone();
            for j in 0..l {
                conj = conj.and(&sub[first_extra + j])?;
            }
            f_main = f_main.or(&conj)?;
            let mut k = 0;
            for (j, fo) in f_others.iter_mut().enumerate() {
                if j == i0 {
                    continue;
                }
                *fo = fo.and(&sub[k])?;
                k += 1;
            }
        }
        f_others[i0] = f_main;
        Ok(f_others)
    }

    /// Replaces slot `i0` (principal ideal of height `d`) by its boundary
    /// with the support event, checking the relative independence the
    /// step relies on.
    fn weak_mixing_reduce(
        &mut self,
        slots: Vec<Slot>,
        i0: usize,
        d: u32,
        eps: BigRational,
    ) -> Result<Vec<Event>> {
        let ideal = slots[i0].ideal.clone();
        let boundary = ideal.lower_part(d);
        let cond = self.factor_of(&boundary)?;

        // The step is valid when B(ideal) is relatively independent of
        // the join of the other slots over B(boundary).
        let this_factor = self.factor_of(&ideal)?;
        let other_factors: Vec<Factor> = slots
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i0)
            .map(|(_, s)| self.factor_of(&s.ideal))
            .collect::<Result<_>>()?;
        let refs: Vec<&Factor> = other_factors.iter().collect();
        let joined = join_all(self.space(), &refs)?;
        let defect = independence_defect(&this_factor, &joined, &cond)?;
        if !defect.is_zero() {
            if self.strict {
                return Err(Error::verification(format!(
                    "support step needs exact relative independence; defect {:?}",
                    defect
                )));
            }
            self.slack = self.slack.clone().max(defect);
        }

        let support = weak_mixing_step(&slots[i0].event, &cond)?;
        let mut reduced = slots.clone();
        reduced[i0] = Slot {
            ideal: boundary,
            event: support,
        };
        // F for the original slot is exactly the reduced slot's answer
        // (it is measurable in the smaller factor, hence in the original).
        self.solve(reduced, eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probspace::ProbSpace;

    fn rat(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// The worked 3-point instance: weights (1/2, 1/2, 0), J = 2,
    /// i_max = { {}, {0}, {1} }.
    fn three_point_problem() -> UipProblem {
        let space = ProbSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![rat(1, 2), rat(1, 2), rat(0, 1)],
            Mode::Rational,
        )
        .unwrap();
        let i_max = Downset::new(2, [0b00, 0b01, 0b10]).unwrap();
        let b0 = Factor::from_blocks(&space, &[vec![0], vec![1, 2]]).unwrap();
        let b1 = Factor::from_blocks(&space, &[vec![0, 1], vec![2]]).unwrap();
        let mut factors = BTreeMap::new();
        factors.insert(0b00, Factor::trivial(&space));
        factors.insert(0b01, b0);
        factors.insert(0b10, b1);
        let system = FactorSystem::new(space.clone(), i_max, factors).unwrap();
        let mut events = BTreeMap::new();
        events.insert(0b00, Event::full(&space));
        events.insert(0b01, Event::from_indices(&space, &[1, 2]).unwrap());
        events.insert(0b10, Event::from_indices(&space, &[2]).unwrap());
        UipProblem::new(system, events, ratio(1, 10)).unwrap()
    }

    #[test]
    fn three_point_worked_example() {
        let problem = three_point_problem();
        assert!(problem.joint_prob().unwrap().is_zero());
        let solution = uip_construct(&problem, &SolveMode::Certified).unwrap();
        let space = problem.system().space();

        // Expected: F_{} = Omega, F_{0} = E_{0} = {b,c}, F_{1} = empty.
        assert_eq!(solution.events[&0b00], Event::full(space));
        assert_eq!(
            solution.events[&0b01],
            Event::from_indices(space, &[1, 2]).unwrap()
        );
        assert!(solution.events[&0b10].is_empty_set());

        let cert = &solution.certificate;
        assert!(cert.empty_intersection);
        assert!(cert.within_epsilon);
        assert!(cert.achieved.is_zero());

        // Exhaustive search confirms the returned triple is valid: every
        // factor-measurable alternative either fails emptiness or the
        // epsilon bound, or matches a valid candidate set that contains
        // the returned one.
        let b0 = problem.system().factor(0b01).unwrap();
        let b1 = problem.system().factor(0b10).unwrap();
        let mut valid = Vec::new();
        for m0 in 0u32..4 {
            for m1 in 0u32..4 {
                for mt in 0u32..2 {
                    let f0 = union_of_atoms(b0, m0);
                    let f1 = union_of_atoms(b1, m1);
                    let ft = if mt == 0 {
                        Event::empty(space)
                    } else {
                        Event::full(space)
                    };
                    let mut candidate = BTreeMap::new();
                    candidate.insert(0b00u32, ft);
                    candidate.insert(0b01u32, f0);
                    candidate.insert(0b10u32, f1);
                    if let Ok(cert) = validate_solution(&problem, &candidate, rat(0, 1)) {
                        if cert.empty_intersection && cert.within_epsilon {
                            valid.push(candidate);
                        }
                    }
                }
            }
        }
        assert!(valid.contains(&solution.events));
    }

    fn union_of_atoms(factor: &Factor, mask: u32) -> Event {
        let mut e = Event::empty(factor.space());
        for a in 0..factor.atom_count() {
            if mask >> a & 1 == 1 {
                e = e.or(&factor.atom_event(a)).unwrap();
            }
        }
        e
    }

    #[test]
    fn independent_factors_with_one_null_event() {
        // Jointly independent coordinate factors; one event null (and
        // nonempty), the rest full: F is empty there and full elsewhere.
        // Weights make the bit2=1 half null but nonempty.
        let space = ProbSpace::new(
            (0..8).map(|i| format!("p{i}")).collect(),
            vec![
                rat(1, 4),
                rat(1, 4),
                rat(1, 4),
                rat(1, 4),
                rat(0, 1),
                rat(0, 1),
                rat(0, 1),
                rat(0, 1),
            ],
            Mode::Rational,
        )
        .unwrap();
        // Coordinates: bit k of the point index.
        let coord = |k: usize| {
            let assignment: Vec<u32> = (0..8).map(|p| (p >> k & 1) as u32).collect();
            Factor::from_assignment(&space, &assignment).unwrap()
        };
        let i_max = Downset::new(3, [0b000, 0b001, 0b010, 0b100]).unwrap();
        let mut factors = BTreeMap::new();
        factors.insert(0b000, Factor::trivial(&space));
        factors.insert(0b001, coord(0));
        factors.insert(0b010, coord(1));
        factors.insert(0b100, coord(2));
        let system = FactorSystem::new(space.clone(), i_max, factors).unwrap();

        let null_half = Event::from_indices(&space, &[4, 5, 6, 7]).unwrap();
        assert!(null_half.prob().is_zero());
        assert!(!null_half.is_empty_set());
        let mut events = BTreeMap::new();
        events.insert(0b000, Event::full(&space));
        events.insert(0b001, Event::full(&space));
        events.insert(0b010, Event::full(&space));
        events.insert(0b100, null_half);
        let problem = UipProblem::new(system, events, ratio(1, 100)).unwrap();
        let solution = uip_construct(&problem, &SolveMode::Certified).unwrap();
        assert!(solution.events[&0b100].is_empty_set());
        assert_eq!(solution.events[&0b000], Event::full(&space));
        assert_eq!(solution.events[&0b001], Event::full(&space));
        assert_eq!(solution.events[&0b010], Event::full(&space));
    }

    #[test]
    fn all_empty_events_solve_trivially() {
        let problem = {
            let base = three_point_problem();
            let space = base.system().space().clone();
            let mut events = BTreeMap::new();
            for e in base.system().index_set().members() {
                events.insert(e, Event::empty(&space));
            }
            UipProblem::new(base.system().clone(), events, ratio(1, 10)).unwrap()
        };
        let solution = uip_construct(&problem, &SolveMode::Certified).unwrap();
        for f in solution.events.values() {
            assert!(f.is_empty_set());
        }
        assert!(solution.certificate.achieved.is_zero());
    }

    #[test]
    fn positive_weights_return_the_events_themselves() {
        // With all-positive weights a null joint intersection is literally
        // empty (here one event is itself empty, as joint independence
        // forces), and F_e = E_e is returned with achieved bound 0.
        let space = ProbSpace::uniform_n(4).unwrap();
        let first = Factor::from_blocks(&space, &[vec![0, 1], vec![2, 3]]).unwrap();
        let second = Factor::from_blocks(&space, &[vec![0, 2], vec![1, 3]]).unwrap();
        let i_max = Downset::new(2, [0b00, 0b01, 0b10]).unwrap();
        let mut factors = BTreeMap::new();
        factors.insert(0b00, Factor::trivial(&space));
        factors.insert(0b01, first.clone());
        factors.insert(0b10, second.clone());
        let system = FactorSystem::new(space.clone(), i_max, factors).unwrap();
        let mut events = BTreeMap::new();
        events.insert(0b00, Event::full(&space));
        events.insert(0b01, first.atom_event(0));
        events.insert(0b10, Event::empty(&space));
        let problem = UipProblem::new(system, events.clone(), ratio(1, 10)).unwrap();
        assert!(problem.joint_prob().unwrap().is_zero());
        let solution = uip_construct(&problem, &SolveMode::Certified).unwrap();
        assert_eq!(solution.events, events);
        assert!(solution.certificate.achieved.is_zero());
    }

    #[test]
    fn monotone_in_epsilon() {
        let problem = three_point_problem();
        let solution = uip_construct(&problem, &SolveMode::Certified).unwrap();
        // The same solution validates at any larger epsilon.
        let events: BTreeMap<u32, Event> = problem
            .system()
            .index_set()
            .members()
            .map(|e| (e, problem.event(e).clone()))
            .collect();
        let bigger = UipProblem::new(problem.system().clone(), events, ratio(1, 2)).unwrap();
        let cert = validate_solution(&bigger, &solution.events, rat(0, 1)).unwrap();
        assert!(cert.empty_intersection && cert.within_epsilon);
    }

    #[test]
    fn duplicated_slots_are_handled() {
        // Tuple-level dedup: duplicate the same (ideal, event) slot.
        let problem = three_point_problem();
        let space = problem.system().space().clone();
        let mut ctx = Ctx {
            problem: &problem,
            strict: true,
            slack: Scalar::zero(Mode::Rational),
            fuel: 10_000,
            splits: 0,
        };
        let ground = 2;
        let slot = |mask: u32, idx: &[usize]| Slot {
            ideal: Downset::principal(ground, mask).unwrap(),
            event: Event::from_indices(&space, idx).unwrap(),
        };
        let slots = vec![
            slot(0b01, &[1, 2]),
            slot(0b01, &[1, 2]),
            slot(0b10, &[2]),
        ];
        let solved = ctx.solve(slots, ratio(1, 10)).unwrap();
        assert_eq!(solved.len(), 3);
        // Intersection of all three answers must be empty.
        let mut joint = Event::full(&space);
        for f in &solved {
            joint = joint.and(f).unwrap();
        }
        assert!(joint.is_empty_set());
        // And the duplicated slots received identical answers.
        assert_eq!(solved[0], solved[1]);
    }

    #[test]
    fn best_effort_tolerates_small_hypothesis_slack() {
        // Perturbed 3-point instance: weights (1/2, 49/100, 1/100) break
        // exact independence and make the joint intersection {c} carry
        // positive mass. Certified mode refuses; best-effort still
        // produces a literally empty intersection and reports the
        // achieved bound P(E_1 \ F_1) = 1/100.
        let space = ProbSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![rat(1, 2), rat(49, 100), rat(1, 100)],
            Mode::Rational,
        )
        .unwrap();
        let i_max = Downset::new(2, [0b00, 0b01, 0b10]).unwrap();
        let mut factors = BTreeMap::new();
        factors.insert(0b00, Factor::trivial(&space));
        factors.insert(
            0b01,
            Factor::from_blocks(&space, &[vec![0], vec![1, 2]]).unwrap(),
        );
        factors.insert(
            0b10,
            Factor::from_blocks(&space, &[vec![0, 1], vec![2]]).unwrap(),
        );
        let system = FactorSystem::new(space.clone(), i_max, factors).unwrap();
        let mut events = BTreeMap::new();
        events.insert(0b00, Event::full(&space));
        events.insert(0b01, Event::from_indices(&space, &[1, 2]).unwrap());
        events.insert(0b10, Event::from_indices(&space, &[2]).unwrap());
        let problem = UipProblem::new(system, events, ratio(1, 10)).unwrap();

        assert!(uip_construct(&problem, &SolveMode::Certified).is_err());

        let solution = uip_construct(
            &problem,
            &SolveMode::BestEffort {
                tolerance: rat(1, 50),
            },
        )
        .unwrap();
        let cert = &solution.certificate;
        assert!(cert.empty_intersection);
        assert_eq!(cert.bounds[&0b10], rat(1, 100));
        assert!(cert.within_epsilon); // 1/100 <= 1/10
        assert!(!cert.hypothesis_slack.is_zero());
        // Tighter tolerance than the actual defects: precondition error.
        assert!(uip_construct(
            &problem,
            &SolveMode::BestEffort {
                tolerance: rat(1, 100_000),
            },
        )
        .is_err());
    }

    #[test]
    fn rejects_nonnull_joint_in_certified_mode() {
        let base = three_point_problem();
        let space = base.system().space().clone();
        let mut events = BTreeMap::new();
        for e in base.system().index_set().members() {
            events.insert(e, Event::full(&space));
        }
        let problem = UipProblem::new(base.system().clone(), events, ratio(1, 10)).unwrap();
        assert!(uip_construct(&problem, &SolveMode::Certified).is_err());
    }
}
