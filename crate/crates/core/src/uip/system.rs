//! Downset-indexed factor systems and their hypothesis checks.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::probspace::{independence_defect, join_all, Factor, Scalar, SpaceRef};

use super::downset::{mask_label, Downset};

/// A family of factors indexed by the members of a downset, with optional
/// ascending filtrations on the top-height members.
#[derive(Clone, Debug)]
pub struct FactorSystem {
    space: SpaceRef,
    i_max: Downset,
    factors: BTreeMap<u32, Factor>,
    filtrations: BTreeMap<u32, Vec<Factor>>,
}

impl FactorSystem {
    /// Requires one factor per member, all over `space`.
    pub fn new(
        space: SpaceRef,
        i_max: Downset,
        factors: BTreeMap<u32, Factor>,
    ) -> Result<FactorSystem> {
        if i_max.is_empty() {
            return Err(Error::input("the index downset must be nonempty"));
        }
        for e in i_max.members() {
            let f = factors
                .get(&e)
                .ok_or_else(|| Error::input(format!("missing factor for {}", mask_label(e))))?;
            if !std::sync::Arc::ptr_eq(f.space(), &space) {
                return Err(Error::input(format!(
                    "factor for {} lives on a different space",
                    mask_label(e)
                )));
            }
        }
        if factors.keys().any(|e| !i_max.contains(*e)) {
            return Err(Error::input("factor indexed outside the downset"));
        }
        Ok(FactorSystem {
            space,
            i_max,
            factors,
            filtrations: BTreeMap::new(),
        })
    }

    /// Attaches an ascending chain for a top-height member; the chain's
    /// last element must generate (equal) the member's factor.
    pub fn with_filtration(mut self, e: u32, chain: Vec<Factor>) -> Result<FactorSystem> {
        let height = self.i_max.height().unwrap_or(0);
        if e.count_ones() != height || !self.i_max.contains(e) {
            return Err(Error::input(
                "filtrations attach to top-height members only",
            ));
        }
        if chain.is_empty() {
            return Err(Error::input("filtration chain must be nonempty"));
        }
        for w in chain.windows(2) {
            if !w[0].is_factor_of(&w[1]) {
                return Err(Error::input("filtration chain must be ascending"));
            }
        }
        if chain.last().unwrap() != &self.factors[&e] {
            return Err(Error::input(
                "filtration chain must reach the member's factor",
            ));
        }
        self.filtrations.insert(e, chain);
        Ok(self)
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn index_set(&self) -> &Downset {
        &self.i_max
    }

    pub fn factor(&self, e: u32) -> Result<&Factor> {
        self.factors
            .get(&e)
            .ok_or_else(|| Error::input(format!("no factor for {}", mask_label(e))))
    }

    pub fn filtration(&self, e: u32) -> Option<&[Factor]> {
        self.filtrations.get(&e).map(|c| c.as_slice())
    }

    /// `B(i)`: the join of the member factors of a sub-ideal; trivial for
    /// the empty ideal.
    pub fn ideal_factor(&self, ideal: &Downset) -> Result<Factor> {
        let mut parts: Vec<&Factor> = Vec::new();
        for e in ideal.members() {
            parts.push(self.factor(e)?);
        }
        join_all(&self.space, &parts)
    }

    /// Verifies nesting exactly and measures independence and crop
    /// defects; see [`HypothesisReport`].
    pub fn check_hypotheses(&self, tolerance: &Scalar, max_join: usize) -> Result<HypothesisReport> {
        let members: Vec<u32> = self.i_max.members().collect();

        // Nesting: e subset of e' means B_e is a factor of B_{e'}.
        let mut nesting_ok = true;
        let mut nesting_witness = None;
        'outer: for &e in &members {
            for &e2 in &members {
                if e != e2 && e & e2 == e && !self.factors[&e].is_factor_of(&self.factors[&e2]) {
                    nesting_ok = false;
                    nesting_witness = Some((e, e2));
                    break 'outer;
                }
            }
        }

        // Independence: defect(B_e, join B_{e_i}, join B_{e & e_i}) over
        // all members e and subsets {e_1..e_l} with l <= max_join.
        let mut max_defect = Scalar::zero(self.space.mode());
        let mut defect_witness: Option<(u32, Vec<u32>)> = None;
        let subsets = bounded_subsets(&members, max_join);
        for &e in &members {
            let be = &self.factors[&e];
            for combo in &subsets {
                let others: Vec<&Factor> = combo.iter().map(|e2| &self.factors[e2]).collect();
                let joined = join_all(&self.space, &others)?;
                let meets: Vec<&Factor> = combo.iter().map(|e2| &self.factors[&(e & e2)]).collect();
                let cond = join_all(&self.space, &meets)?;
                let defect = independence_defect(be, &joined, &cond)?;
                if max_defect.cmp_total(&defect) == std::cmp::Ordering::Less {
                    max_defect = defect.clone();
                    defect_witness = Some((e, combo.clone()));
                }
            }
        }

        // Crop: for sub-ideal pairs without common top-order elements,
        // B(i) and B(i') are relatively independent over B(lower part of i).
        let mut crop_max = Scalar::zero(self.space.mode());
        let mut crop_checks = 0usize;
        let ideals = self.sample_sub_ideals();
        for i in &ideals {
            for i2 in &ideals {
                let d = match i.height().into_iter().chain(i2.height()).max() {
                    Some(d) => d,
                    None => continue,
                };
                let tops_i: Vec<u32> = i.elements_of_order(d);
                if tops_i.iter().any(|e| i2.contains(*e)) {
                    continue;
                }
                crop_checks += 1;
                let bi = self.ideal_factor(i)?;
                let bi2 = self.ideal_factor(i2)?;
                let lower = self.ideal_factor(&i.lower_part(d))?;
                let defect = independence_defect(&bi, &bi2, &lower)?;
                crop_max = crop_max.max(defect);
            }
        }

        let ok = nesting_ok
            && max_defect.le(tolerance)
            && crop_max.le(tolerance);
        Ok(HypothesisReport {
            nesting_ok,
            nesting_witness,
            max_defect,
            defect_witness,
            crop_max_defect: crop_max,
            crop_checks,
            ok,
        })
    }

    /// Principal ideals of members plus pairwise unions: the sub-ideal
    /// shapes the induction actually visits.
    fn sample_sub_ideals(&self) -> Vec<Downset> {
        let ground = self.i_max.ground();
        let mut out: Vec<Downset> = Vec::new();
        let members: Vec<u32> = self.i_max.members().collect();
        for &e in &members {
            if let Ok(p) = Downset::principal(ground, e) {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        let principals = out.clone();
        for a in &principals {
            for b in &principals {
                if let Ok(u) = a.union(b) {
                    if !out.contains(&u) {
                        out.push(u);
                    }
                }
            }
        }
        out.truncate(24);
        out
    }
}

/// Nonempty subsets of `members` with at most `max_len` elements.
fn bounded_subsets(members: &[u32], max_len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let n = members.len();
    for mask in 1u32..(1u32 << n) {
        if (mask.count_ones() as usize) <= max_len {
            out.push(
                (0..n)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| members[i])
                    .collect(),
            );
        }
    }
    out
}

/// Outcome of [`FactorSystem::check_hypotheses`]; failures carry
/// witnesses instead of being thrown.
#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub nesting_ok: bool,
    pub nesting_witness: Option<(u32, u32)>,
    pub max_defect: Scalar,
    pub defect_witness: Option<(u32, Vec<u32>)>,
    pub crop_max_defect: Scalar,
    pub crop_checks: usize,
    pub ok: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probspace::{Mode, ProbSpace};

    /// Product space over coordinate sizes with the coordinate factors
    /// indexed by element masks.
    pub(crate) fn product_system(sizes: &[usize], i_max: Downset) -> FactorSystem {
        let total: usize = sizes.iter().product();
        let space = ProbSpace::uniform_n(total).unwrap();
        let digits = |point: usize| {
            let mut rest = point;
            let mut out = vec![0usize; sizes.len()];
            for (j, &sz) in sizes.iter().enumerate().rev() {
                out[j] = rest % sz;
                rest /= sz;
            }
            out
        };
        let mut factors = BTreeMap::new();
        for e in i_max.members() {
            let assignment: Vec<u32> = (0..total)
                .map(|p| {
                    let ds = digits(p);
                    let mut key = 0u32;
                    for (j, &d) in ds.iter().enumerate() {
                        if e >> j & 1 == 1 {
                            key = key * sizes[j] as u32 + d as u32;
                        }
                    }
                    key
                })
                .collect();
            factors.insert(e, Factor::from_assignment(&space, &assignment).unwrap());
        }
        FactorSystem::new(space, i_max, factors).unwrap()
    }

    #[test]
    fn product_system_passes_all_checks() {
        let i_max = Downset::full_of_height(3, 2).unwrap();
        let sys = product_system(&[2, 2, 2], i_max);
        let report = sys
            .check_hypotheses(&Scalar::zero(Mode::Rational), 2)
            .unwrap();
        assert!(report.ok, "{report:?}");
        assert!(report.nesting_ok);
        assert!(report.max_defect.is_zero());
        assert!(report.crop_max_defect.is_zero());
        assert!(report.crop_checks > 0);
    }

    #[test]
    fn planted_nesting_violation_is_reported() {
        let i_max = Downset::full_of_height(2, 1).unwrap();
        let mut sys = product_system(&[2, 2], i_max.clone());
        // Replace the factor for {0} by something finer than B_{0} but
        // sabotage nesting by making B_empty nontrivial and incomparable.
        let space = sys.space.clone();
        let bad = Factor::from_blocks(&space, &[vec![0, 3], vec![1, 2]]).unwrap();
        sys.factors.insert(0b00, bad);
        let report = sys
            .check_hypotheses(&Scalar::zero(Mode::Rational), 2)
            .unwrap();
        assert!(!report.nesting_ok);
        let (e, e2) = report.nesting_witness.unwrap();
        assert_eq!(e, 0b00);
        assert!(e2 == 0b01 || e2 == 0b10);
        assert!(!report.ok);
    }

    #[test]
    fn filtration_validation() {
        let i_max = Downset::full_of_height(2, 1).unwrap();
        let sys = product_system(&[2, 3], i_max);
        let space = sys.space().clone();
        let top = sys.factor(0b01).unwrap().clone();
        let trivial = Factor::trivial(&space);
        let sys = sys
            .with_filtration(0b01, vec![trivial.clone(), top.clone()])
            .unwrap();
        assert_eq!(sys.filtration(0b01).unwrap().len(), 2);
        // Non-ascending chain rejected.
        assert!(sys
            .clone()
            .with_filtration(0b10, vec![top, trivial])
            .is_err());
    }
}
