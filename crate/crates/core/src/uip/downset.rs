//! Downsets (ideals) of subsets of a finite ground set, stored as bit
//! masks.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A family of subsets of `{0..ground}` closed under taking subsets.
/// Members are bit masks over the ground elements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Downset {
    ground: usize,
    members: BTreeSet<u32>,
}

impl Downset {
    /// Validates closure under subsets (equivalently: under removal of
    /// single elements).
    pub fn new(ground: usize, members: impl IntoIterator<Item = u32>) -> Result<Downset> {
        if ground > 16 {
            return Err(Error::input("ground sets larger than 16 are unsupported"));
        }
        let members: BTreeSet<u32> = members.into_iter().collect();
        let full = (1u32 << ground) - 1;
        for &m in &members {
            if m & !full != 0 {
                return Err(Error::input(format!(
                    "member {m:#b} uses elements outside the ground set"
                )));
            }
            let mut bits = m;
            while bits != 0 {
                let low = bits & bits.wrapping_neg();
                if !members.contains(&(m & !low)) {
                    return Err(Error::input(format!(
                        "not a downset: contains {m:#b} but not {:#b}",
                        m & !low
                    )));
                }
                bits &= bits - 1;
            }
        }
        Ok(Downset { ground, members })
    }

    /// The empty downset (no members at all).
    pub fn empty(ground: usize) -> Downset {
        Downset {
            ground,
            members: BTreeSet::new(),
        }
    }

    /// `{ e : |e| <= h }`.
    pub fn full_of_height(ground: usize, h: u32) -> Result<Downset> {
        let full = (1u32 << ground) - 1;
        Downset::new(
            ground,
            (0..=full).filter(|m| m.count_ones() <= h),
        )
    }

    /// Principal ideal: all subsets of `top`.
    pub fn principal(ground: usize, top: u32) -> Result<Downset> {
        if ground > 16 {
            return Err(Error::input("ground sets larger than 16 are unsupported"));
        }
        // Enumerate submasks of `top`.
        let mut members = BTreeSet::new();
        let mut sub = top;
        loop {
            members.insert(sub);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & top;
        }
        Downset::new(ground, members)
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn members(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, e: u32) -> bool {
        self.members.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Maximum member cardinality; `None` for the empty downset.
    pub fn height(&self) -> Option<u32> {
        self.members.iter().map(|m| m.count_ones()).max()
    }

    /// `{ e in self : |e| < d }`.
    pub fn lower_part(&self, d: u32) -> Downset {
        Downset {
            ground: self.ground,
            members: self
                .members
                .iter()
                .copied()
                .filter(|m| m.count_ones() < d)
                .collect(),
        }
    }

    /// Members of cardinality exactly `d`.
    pub fn elements_of_order(&self, d: u32) -> Vec<u32> {
        self.members
            .iter()
            .copied()
            .filter(|m| m.count_ones() == d)
            .collect()
    }

    /// `Some(top)` when the downset is the principal ideal of `top`.
    pub fn as_principal(&self) -> Option<u32> {
        let top = self.members.iter().copied().max()?;
        let expected = Downset::principal(self.ground, top).ok()?;
        // The maximum under mask ordering must dominate every member.
        if self.members.iter().all(|&m| m & !top == 0) && *self == expected {
            Some(top)
        } else {
            None
        }
    }

    pub fn union(&self, other: &Downset) -> Result<Downset> {
        if self.ground != other.ground {
            return Err(Error::input("downsets over different ground sets"));
        }
        Ok(Downset {
            ground: self.ground,
            members: self.members.union(&other.members).copied().collect(),
        })
    }

    /// Removes one member; the result must still be a downset.
    pub fn without(&self, e: u32) -> Result<Downset> {
        let members: BTreeSet<u32> = self.members.iter().copied().filter(|&m| m != e).collect();
        Downset::new(self.ground, members)
    }
}

/// Renders a mask as an element list, e.g. `{0,2}`.
pub fn mask_label(mask: u32) -> String {
    let elems: Vec<String> = (0..32)
        .filter(|&b| mask >> b & 1 == 1)
        .map(|b| b.to_string())
        .collect();
    format!("{{{}}}", elems.join(","))
}
