//! Arithmetic-combinatorics counters and the finite commuting-shift
//! system.
//!
//! Progressions and corners are counted over all `(x, r)` resp.
//! `(x, y, r)` including the degenerate `r = 0` case (a flag excludes
//! it for exploratory use). The shift system lives on the torus
//! `Z_M x Z_M` with the uniform measure and the two coordinate
//! translations, which commute and preserve the measure by construction,
//! so the tripartite-sampling identity below is a genuine theorem about
//! two independent code paths rather than an artifact of one.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// Subset of the cyclic group `Z_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZnSet {
    modulus: u64,
    members: Vec<bool>,
}

impl ZnSet {
    pub fn new(modulus: u64, members: &[u64]) -> Result<ZnSet> {
        if modulus == 0 {
            return Err(Error::input("modulus must be positive"));
        }
        let mut set = vec![false; modulus as usize];
        for &x in members {
            if x >= modulus {
                return Err(Error::input(format!("element {x} outside Z_{modulus}")));
            }
            set[x as usize] = true;
        }
        Ok(ZnSet {
            modulus,
            members: set,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn len(&self) -> u64 {
        self.members.iter().filter(|&&b| b).count() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: i64) -> bool {
        self.members[x.rem_euclid(self.modulus as i64) as usize]
    }

    pub fn elements(&self) -> Vec<u64> {
        (0..self.modulus)
            .filter(|&x| self.members[x as usize])
            .collect()
    }

    /// Text format: first non-comment line `N`, one element per line;
    /// `#` starts a comment.
    pub fn from_text(text: &str) -> Result<ZnSet> {
        let mut modulus: Option<u64> = None;
        let mut members = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let value: u64 = line.parse().map_err(|_| {
                Error::input(format!("line {}: invalid integer '{line}'", lineno + 1))
            })?;
            match modulus {
                None => modulus = Some(value),
                Some(_) => members.push(value),
            }
        }
        let modulus = modulus.ok_or_else(|| Error::input("empty Z_N set file"))?;
        ZnSet::new(modulus, &members)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.modulus).unwrap();
        for x in self.elements() {
            writeln!(out, "{x}").unwrap();
        }
        out
    }
}

/// Exact number of pairs `(x, r) in Z_N^2` whose length-`k` progression
/// `x, x+r, ..., x+(k-1)r` stays inside the set. `include_degenerate`
/// keeps the `r = 0` pairs (the default convention).
pub fn count_aps(set: &ZnSet, k: usize, include_degenerate: bool) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::input("progression length must be at least 1"));
    }
    let n = set.modulus as i64;
    let mut count: u128 = 0;
    for x in 0..n {
        for r in 0..n {
            if r == 0 && !include_degenerate {
                continue;
            }
            if (0..k as i64).all(|j| set.contains(x + j * r)) {
                count += 1;
            }
        }
    }
    Ok(BigUint::from(count))
}

/// Subset of the grid `Z_M x Z_M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSet {
    side: u64,
    members: BTreeSet<(u64, u64)>,
}

impl GridSet {
    pub fn new(side: u64, members: &[(u64, u64)]) -> Result<GridSet> {
        if side == 0 {
            return Err(Error::input("grid side must be positive"));
        }
        let mut set = BTreeSet::new();
        for &(x, y) in members {
            if x >= side || y >= side {
                return Err(Error::input(format!(
                    "point ({x},{y}) outside Z_{side} x Z_{side}"
                )));
            }
            set.insert((x, y));
        }
        Ok(GridSet { side, members: set })
    }

    pub fn side(&self) -> u64 {
        self.side
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        let m = self.side as i64;
        self.members
            .contains(&(x.rem_euclid(m) as u64, y.rem_euclid(m) as u64))
    }

    pub fn points(&self) -> impl Iterator<Item = &(u64, u64)> {
        self.members.iter()
    }

    /// Text format: first non-comment line `M`, then `x y` per line;
    /// `#` starts a comment.
    pub fn from_text(text: &str) -> Result<GridSet> {
        let mut side: Option<u64> = None;
        let mut members = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<u64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<u64>().map_err(|_| {
                        Error::input(format!("line {}: invalid integer '{t}'", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            match side {
                None => {
                    if fields.len() != 1 {
                        return Err(Error::input(format!(
                            "line {}: header must be a single integer M",
                            lineno + 1
                        )));
                    }
                    side = Some(fields[0]);
                }
                Some(_) => {
                    if fields.len() != 2 {
                        return Err(Error::input(format!("line {}: expected 'x y'", lineno + 1)));
                    }
                    members.push((fields[0], fields[1]));
                }
            }
        }
        let side = side.ok_or_else(|| Error::input("empty grid set file"))?;
        GridSet::new(side, &members)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.side).unwrap();
        for (x, y) in &self.members {
            writeln!(out, "{x} {y}").unwrap();
        }
        out
    }
}

/// Exact number of triples `(x, y, r) in Z_M^3` with `(x,y)`, `(x+r,y)`,
/// `(x,y+r)` all in the set (`r = 0` included unless excluded).
pub fn count_corners(set: &GridSet, include_degenerate: bool) -> BigUint {
    let m = set.side as i64;
    let mut count: u128 = 0;
    for x in 0..m {
        for y in 0..m {
            if !set.contains(x, y) {
                continue;
            }
            for r in 0..m {
                if r == 0 && !include_degenerate {
                    continue;
                }
                if set.contains(x + r, y) && set.contains(x, y + r) {
                    count += 1;
                }
            }
        }
    }
    BigUint::from(count)
}

/// Finite commuting-shift system: the uniform torus `Z_M x Z_M` with the
/// row shift `T: (a,b) -> (a+1,b)`, the column shift `S: (a,b) -> (a,b+1)`
/// and a marked subset.
#[derive(Clone, Debug)]
pub struct FiniteShiftSystem {
    set: GridSet,
}

impl FiniteShiftSystem {
    pub fn new(set: GridSet) -> FiniteShiftSystem {
        FiniteShiftSystem { set }
    }

    pub fn side(&self) -> u64 {
        self.set.side()
    }

    pub fn set(&self) -> &GridSet {
        &self.set
    }

    /// Membership of `T^a S^b x` for a torus point `x = (p, q)`.
    fn shifted_member(&self, p: i64, q: i64, a: i64, b: i64) -> bool {
        self.set.contains(p + a, q + b)
    }

    /// `P(A and T^n A and S^n A)` where `u in T^n A` means `T^n u in A`:
    /// the fraction of points `u` with `u`, `T^n u`, `S^n u` all marked.
    pub fn recurrence_prob(&self, n: i64) -> BigRational {
        let m = self.side() as i64;
        let mut count: u64 = 0;
        for p in 0..m {
            for q in 0..m {
                if self.shifted_member(p, q, 0, 0)
                    && self.shifted_member(p, q, n, 0)
                    && self.shifted_member(p, q, 0, n)
                {
                    count += 1;
                }
            }
        }
        BigRational::new(BigInt::from(count), BigInt::from(m) * BigInt::from(m))
    }

    /// Symmetric window average `(1/(2N+1)) sum_{n=-N..N} recurrence_prob(n)`.
    pub fn recurrence_window_average(&self, window: u64) -> BigRational {
        let n = window as i64;
        let mut sum = BigRational::from_integer(BigInt::from(0));
        for k in -n..=n {
            sum += self.recurrence_prob(k);
        }
        sum / BigRational::from_integer(BigInt::from(2 * n + 1))
    }

    /// Probability that the three base-entry events of the tripartite
    /// sampling all hold: averaging over torus points `x` and exponents
    /// `(n1, n2, n3) in [N]^3` of
    /// `T^{n1}S^{n2}x in A  and  T^{n3-n2}S^{n2}x in A  and  T^{n1}S^{n3-n1}x in A`.
    ///
    /// The exponent pattern is the one under which the event triple
    /// depends on the coordinate pairs `(n1,n2)`, `(n2,n3)`, `(n3,n1)`
    /// respectively; it matches the corners reduction
    /// (see [`corners_to_tripartite`]).
    pub fn tripartite_embed_prob(&self, n_max: u64) -> Result<BigRational> {
        if n_max == 0 {
            return Err(Error::input("exponent bound N must be at least 1"));
        }
        let m = self.side() as i64;
        let n = n_max as i64;
        let mut count: u128 = 0;
        for p in 0..m {
            for q in 0..m {
                for n1 in 1..=n {
                    for n2 in 1..=n {
                        for n3 in 1..=n {
                            if self.shifted_member(p, q, n1, n2)
                                && self.shifted_member(p, q, n3 - n2, n2)
                                && self.shifted_member(p, q, n1, n3 - n1)
                            {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        let denom = BigInt::from(m) * BigInt::from(m) * BigInt::from(n).pow(3);
        Ok(BigRational::new(BigInt::from(count), denom))
    }

    /// The independent right-hand side of the sampling identity:
    /// `(1/N^3) sum_{n1,n2,n3 in [N]} P(A and T^{n3-n2-n1} A and S^{n3-n2-n1} A)`.
    pub fn tripartite_identity_rhs(&self, n_max: u64) -> Result<BigRational> {
        if n_max == 0 {
            return Err(Error::input("exponent bound N must be at least 1"));
        }
        let n = n_max as i64;
        let mut sum = BigRational::from_integer(BigInt::from(0));
        for n1 in 1..=n {
            for n2 in 1..=n {
                for n3 in 1..=n {
                    sum += self.recurrence_prob(n3 - n2 - n1);
                }
            }
        }
        Ok(sum / BigRational::from_integer(BigInt::from(n).pow(3)))
    }

    /// The asymmetric window bound `(1/N) sum_{n=-2N..N} P(A and T^n A and S^n A)`;
    /// always at least [`Self::tripartite_embed_prob`].
    pub fn tripartite_inequality_rhs(&self, n_max: u64) -> Result<BigRational> {
        if n_max == 0 {
            return Err(Error::input("exponent bound N must be at least 1"));
        }
        let n = n_max as i64;
        let mut sum = BigRational::from_integer(BigInt::from(0));
        for k in -2 * n..=n {
            sum += self.recurrence_prob(k);
        }
        Ok(sum / BigRational::from_integer(BigInt::from(n)))
    }
}

/// The standard reduction from corners to a tripartite graph on `3M`
/// vertices: rows `x` (labels `0..M`), columns `y` (labels `M..2M`) and
/// diagonals `z` (labels `2M..3M`), with
///
/// * `{x, y}` an edge iff `(x, y)` is marked,
/// * `{y, z}` an edge iff `(z - y, y)` is marked,
/// * `{x, z}` an edge iff `(x, z - x)` is marked (all mod `M`).
///
/// Triangles `(x, y, z)` of the result correspond bijectively to corner
/// triples `(x, y, r)` with `r = z - x - y`, so the ordered triangle
/// count equals `6 *` the corner count.
pub fn corners_to_tripartite(set: &GridSet) -> Result<Hypergraph> {
    let m = set.side();
    let mi = m as i64;
    let mut edges: Vec<[usize; 2]> = Vec::new();
    for x in 0..mi {
        for y in 0..mi {
            if set.contains(x, y) {
                edges.push([x as usize, (m + y as u64) as usize]);
            }
        }
    }
    for y in 0..mi {
        for z in 0..mi {
            if set.contains(z - y, y) {
                edges.push([(m + y as u64) as usize, (2 * m + z as u64) as usize]);
            }
        }
    }
    for x in 0..mi {
        for z in 0..mi {
            if set.contains(x, z - x) {
                edges.push([x as usize, (2 * m + z as u64) as usize]);
            }
        }
    }
    Hypergraph::build(3 * m as usize, 2, edges)
}
