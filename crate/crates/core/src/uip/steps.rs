//! The three extension mechanisms that propagate the uniform
//! intersection property: support-of-conditional-probability, atom
//! decomposition over finite factors, and conditional-probability
//! thresholding along a filtration.

use num::bigint::BigInt;
use num::rational::BigRational;

use crate::error::{Error, Result};
use crate::probspace::{
    cond_prob, independence_defect, join_all, Event, Factor, Mode, Scalar,
};

/// Support step: the union of positive-weight atoms of `factor` on which
/// the conditional probability of `event` is positive. The result `E`
/// satisfies `P(event \ E) = 0`.
pub fn weak_mixing_step(event: &Event, factor: &Factor) -> Result<Event> {
    let space = event.space().clone();
    if !std::sync::Arc::ptr_eq(&space, factor.space()) {
        return Err(Error::input("event and factor live on different spaces"));
    }
    let mut support = Event::empty(&space);
    for atom in 0..factor.atom_count() {
        if factor.atom_weight(atom).is_zero() {
            continue;
        }
        let atom_event = factor.atom_event(atom);
        if !event.and(&atom_event)?.prob().is_zero() {
            support = support.or(&atom_event)?;
        }
    }
    Ok(support)
}

/// One term of a finite-rank decomposition: the event equals the union
/// over terms of `base ∧ part_atoms[0] ∧ ... ∧ part_atoms[l-1]`.
#[derive(Clone, Debug)]
pub struct DecompTerm {
    /// Component measurable in the base factor.
    pub base: Event,
    /// One atom per finite part factor.
    pub part_atoms: Vec<Event>,
}

/// Writes an event measurable in `base ∨ parts[0] ∨ ... ∨ parts[l-1]` as
/// a finite union of conjunctions with one atom from each part and a
/// base-measurable component. Terms whose conjunction is empty are
/// dropped; the term count is at most the product of the part atom
/// counts.
pub fn finite_rank_decompose(
    event: &Event,
    base: &Factor,
    parts: &[Factor],
) -> Result<Vec<DecompTerm>> {
    let space = event.space().clone();
    let mut all = vec![base.clone()];
    all.extend(parts.iter().cloned());
    let refs: Vec<&Factor> = all.iter().collect();
    let join = join_all(&space, &refs)?;
    if !event.is_measurable_in(&join) {
        return Err(Error::input(
            "event is not measurable in the join of base and parts",
        ));
    }

    let mut terms = Vec::new();
    let mut combo = vec![0usize; parts.len()];
    loop {
        // Intersection of the chosen part atoms.
        let mut cell = Event::full(&space);
        for (j, part) in parts.iter().enumerate() {
            cell = cell.and(&part.atom_event(combo[j]))?;
        }
        // Base atoms whose trace inside the cell is contained in the event.
        let mut base_part = Event::empty(&space);
        for atom in 0..base.atom_count() {
            let b = base.atom_event(atom);
            let trace = b.and(&cell)?;
            if trace.minus(event)?.is_empty_set() {
                base_part = base_part.or(&b)?;
            }
        }
        if !base_part.and(&cell)?.is_empty_set() {
            terms.push(DecompTerm {
                base: base_part,
                part_atoms: (0..parts.len())
                    .map(|j| parts[j].atom_event(combo[j]))
                    .collect(),
            });
        }
        // Next combination.
        let mut j = 0;
        loop {
            if j == parts.len() {
                // Reassembly check: the union of terms must equal the event.
                let mut union = Event::empty(&space);
                for t in &terms {
                    let mut conj = t.base.clone();
                    for a in &t.part_atoms {
                        conj = conj.and(a)?;
                    }
                    union = union.or(&conj)?;
                }
                if &union != event {
                    return Err(Error::verification(
                        "finite-rank decomposition failed to reassemble the event",
                    ));
                }
                return Ok(terms);
            }
            combo[j] += 1;
            if combo[j] < parts[j].atom_count() {
                break;
            }
            combo[j] = 0;
            j += 1;
        }
    }
}

/// A tuple slot for the chain (filtration) step.
#[derive(Clone, Debug)]
pub struct ChainSlot {
    pub factor: Factor,
    pub event: Event,
    /// Ascending chain whose last element generates `factor`.
    pub filtration: Vec<Factor>,
}

/// Report of one thresholding step at a filtration level.
#[derive(Clone, Debug)]
pub struct ChainStepReport {
    /// The thresholded events, one per slot.
    pub thresholded: Vec<Event>,
    /// The threshold used: `|I| / (|I| + 1)`.
    pub threshold: BigRational,
    /// Largest relative-independence defect among the step's hypotheses.
    pub hypothesis_defect: Scalar,
    /// Probability of the joint intersection of the thresholded events.
    pub joint_prob: Scalar,
    /// True when the hypotheses held exactly and the joint intersection
    /// is certified null.
    pub certified: bool,
}

/// Thresholding step: replaces each event by
/// `{ P(E_i | B_{alpha,i}) > |I|/(|I|+1) }` at filtration level `alpha`.
/// When the joint intersection of the original events is null and the
/// slots' relative-independence hypotheses hold exactly, the thresholded
/// events are certified to have null joint intersection; otherwise the
/// achieved joint probability is reported.
pub fn chain_limit_step(slots: &[ChainSlot], alpha: usize) -> Result<ChainStepReport> {
    if slots.is_empty() {
        return Err(Error::input("chain step needs at least one slot"));
    }
    let space = slots[0].factor.space().clone();
    if space.mode() != Mode::Rational {
        return Err(Error::input("chain step requires rational mode"));
    }
    for slot in slots {
        if slot.filtration.is_empty() {
            return Err(Error::input("every slot needs a filtration"));
        }
        if alpha >= slot.filtration.len() {
            return Err(Error::input(format!(
                "filtration level {alpha} out of range (chain length {})",
                slot.filtration.len()
            )));
        }
    }
    let count = slots.len();
    let threshold = BigRational::new(BigInt::from(count), BigInt::from(count + 1));
    let threshold_scalar = Scalar::Rat(threshold.clone());

    let mut thresholded = Vec::with_capacity(count);
    for slot in slots {
        let level = &slot.filtration[alpha];
        let density = cond_prob(&slot.event, level)?;
        let mut e = Event::empty(&space);
        for atom in 0..level.atom_count() {
            let rep = level.atom_points(atom)[0];
            if threshold_scalar.cmp_total(density.value(rep)) == std::cmp::Ordering::Less {
                e = e.or(&level.atom_event(atom))?;
            }
        }
        thresholded.push(e);
    }

    // Hypotheses: B_i and the join of the other slots' level factors are
    // relatively independent over B_{alpha,i}.
    let mut hypothesis_defect = Scalar::zero(space.mode());
    for (i, slot) in slots.iter().enumerate() {
        let others: Vec<&Factor> = slots
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, s)| &s.filtration[alpha])
            .collect();
        let joined = join_all(&space, &others)?;
        let defect = independence_defect(&slot.factor, &joined, &slot.filtration[alpha])?;
        hypothesis_defect = hypothesis_defect.max(defect);
    }

    let mut joint = Event::full(&space);
    for e in &thresholded {
        joint = joint.and(e)?;
    }
    let mut original_joint = Event::full(&space);
    for slot in slots {
        original_joint = original_joint.and(&slot.event)?;
    }
    let joint_prob = joint.prob();
    let certified = hypothesis_defect.is_zero()
        && original_joint.prob().is_zero()
        && joint_prob.is_zero();
    Ok(ChainStepReport {
        thresholded,
        threshold,
        hypothesis_defect,
        joint_prob,
        certified,
    })
}
