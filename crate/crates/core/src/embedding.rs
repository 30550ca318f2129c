//! Universal-embedding samplers: exact and Monte-Carlo probabilities of
//! regular events under the random lifting of a finite (hyper)graph, and
//! the cyclic-group (dilation) embedding.
//!
//! A regular event is a finite boolean formula over generator leaves.
//! Graph/hypergraph leaves `A(i,j,...)` name a d-subset of sampled indices
//! (1-based, matching the usual labeling); the leaf holds when the sampled
//! image vertices are pairwise distinct and form an edge — colliding
//! samples never satisfy a leaf. Cyclic leaves `A[n]` carry an arbitrary
//! integer offset.
//!
//! Events are parsed from a mini-language with operators `&`, `|`, `!`
//! and parentheses; see [`parse_event`].

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng;

/// Generator leaf of a regular event.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Leaf {
    /// Edge membership of the sampled vertices at these 1-based indices.
    /// Canonical form: strictly ascending.
    Edge(Vec<usize>),
    /// Cyclic-embedding generator with integer offset.
    Offset(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Node {
    Leaf(usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
}

/// Which embedding a formula's leaves belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafKind {
    /// `A(i,j,...)` leaves of a fixed arity.
    Edge { arity: usize },
    /// `A[n]` leaves.
    Offset,
}

/// Boolean formula over generator leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularEvent {
    leaves: Vec<Leaf>,
    root: Node,
    kind: LeafKind,
    max_index: usize,
}

impl RegularEvent {
    /// Single edge leaf `A(indices...)`; indices are 1-based, must be
    /// distinct, and are canonically sorted.
    pub fn edge_leaf(indices: &[usize]) -> Result<RegularEvent> {
        let leaf = canonical_edge_leaf(indices)?;
        let max_index = *match &leaf {
            Leaf::Edge(v) => v.last().unwrap(),
            _ => unreachable!(),
        };
        Ok(RegularEvent {
            kind: LeafKind::Edge {
                arity: indices.len(),
            },
            leaves: vec![leaf],
            root: Node::Leaf(0),
            max_index,
        })
    }

    /// Single offset leaf `A[n]`.
    pub fn offset_leaf(n: i64) -> RegularEvent {
        RegularEvent {
            kind: LeafKind::Offset,
            leaves: vec![Leaf::Offset(n)],
            root: Node::Leaf(0),
            max_index: 0,
        }
    }

    pub fn negate(event: RegularEvent) -> RegularEvent {
        RegularEvent {
            root: Node::Not(Box::new(event.root)),
            ..event
        }
    }

    pub fn and(a: RegularEvent, b: RegularEvent) -> Result<RegularEvent> {
        RegularEvent::combine(a, b, |x, y| Node::And(Box::new(x), Box::new(y)))
    }

    pub fn or(a: RegularEvent, b: RegularEvent) -> Result<RegularEvent> {
        RegularEvent::combine(a, b, |x, y| Node::Or(Box::new(x), Box::new(y)))
    }

    /// Conjunction of a nonempty list.
    pub fn all(events: Vec<RegularEvent>) -> Result<RegularEvent> {
        let mut it = events.into_iter();
        let first = it.next().ok_or_else(|| Error::input("empty conjunction"))?;
        it.try_fold(first, RegularEvent::and)
    }

    fn combine(
        a: RegularEvent,
        b: RegularEvent,
        op: impl Fn(Node, Node) -> Node,
    ) -> Result<RegularEvent> {
        if a.kind != b.kind {
            return Err(Error::input(
                "cannot combine events over different generator kinds",
            ));
        }
        let mut leaves = a.leaves;
        let b_root = remap_leaves(b.root, &b.leaves, &mut leaves);
        Ok(RegularEvent {
            kind: a.kind,
            max_index: a.max_index.max(b.max_index),
            root: op(a.root, b_root),
            leaves,
        })
    }

    pub fn kind(&self) -> LeafKind {
        self.kind
    }

    /// Largest sampled index used (0 for offset events).
    pub fn arity(&self) -> usize {
        self.max_index
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    fn eval(&self, leaf_values: &[bool]) -> bool {
        fn go(node: &Node, vals: &[bool]) -> bool {
            match node {
                Node::Leaf(i) => vals[*i],
                Node::Not(x) => !go(x, vals),
                Node::And(a, b) => go(a, vals) && go(b, vals),
                Node::Or(a, b) => go(a, vals) || go(b, vals),
            }
        }
        go(&self.root, leaf_values)
    }

    /// Evaluates the formula for a vertex assignment (edge kind).
    pub fn holds_for_assignment(&self, graph: &Hypergraph, assignment: &[usize]) -> bool {
        let mut scratch: Vec<usize> = Vec::new();
        let vals: Vec<bool> = self
            .leaves
            .iter()
            .map(|leaf| match leaf {
                Leaf::Edge(indices) => {
                    scratch.clear();
                    scratch.extend(indices.iter().map(|&i| assignment[i - 1]));
                    graph.image_is_edge(&mut scratch)
                }
                Leaf::Offset(_) => unreachable!("offset leaf in edge evaluation"),
            })
            .collect();
        self.eval(&vals)
    }

    /// Relabels edge-leaf indices by a finitely supported permutation.
    pub fn permute(&self, perm: &IndexPermutation) -> Result<RegularEvent> {
        match self.kind {
            LeafKind::Edge { .. } => {}
            LeafKind::Offset => return Err(Error::input("permutation acts on edge events only")),
        }
        let mut leaves = Vec::with_capacity(self.leaves.len());
        let mut max_index = 0;
        for leaf in &self.leaves {
            match leaf {
                Leaf::Edge(indices) => {
                    let mapped: Vec<usize> = indices.iter().map(|&i| perm.apply(i)).collect();
                    let canon = canonical_edge_leaf(&mapped)?;
                    if let Leaf::Edge(v) = &canon {
                        max_index = max_index.max(*v.last().unwrap());
                    }
                    leaves.push(canon);
                }
                Leaf::Offset(_) => unreachable!(),
            }
        }
        Ok(RegularEvent {
            leaves,
            root: self.root.clone(),
            kind: self.kind,
            max_index,
        })
    }

    /// Shifts every offset leaf `A[k]` to `A[k+n]`.
    pub fn shift(&self, n: i64) -> Result<RegularEvent> {
        if self.kind != LeafKind::Offset {
            return Err(Error::input("shift acts on offset events only"));
        }
        let leaves = self
            .leaves
            .iter()
            .map(|leaf| match leaf {
                Leaf::Offset(k) => Leaf::Offset(k + n),
                Leaf::Edge(_) => unreachable!(),
            })
            .collect();
        Ok(RegularEvent {
            leaves,
            root: self.root.clone(),
            kind: self.kind,
            max_index: 0,
        })
    }
}

fn canonical_edge_leaf(indices: &[usize]) -> Result<Leaf> {
    if indices.is_empty() {
        return Err(Error::input("edge leaf needs at least one index"));
    }
    let mut v = indices.to_vec();
    v.sort_unstable();
    if v[0] == 0 {
        return Err(Error::input("edge leaf indices are 1-based"));
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::input(format!(
            "edge leaf {indices:?} repeats an index"
        )));
    }
    Ok(Leaf::Edge(v))
}

/// Appends `src_leaves` into `dst` (deduplicating) and rewrites leaf ids.
fn remap_leaves(node: Node, src_leaves: &[Leaf], dst: &mut Vec<Leaf>) -> Node {
    match node {
        Node::Leaf(i) => {
            let leaf = &src_leaves[i];
            let id = match dst.iter().position(|l| l == leaf) {
                Some(p) => p,
                None => {
                    dst.push(leaf.clone());
                    dst.len() - 1
                }
            };
            Node::Leaf(id)
        }
        Node::Not(x) => Node::Not(Box::new(remap_leaves(*x, src_leaves, dst))),
        Node::And(a, b) => Node::And(
            Box::new(remap_leaves(*a, src_leaves, dst)),
            Box::new(remap_leaves(*b, src_leaves, dst)),
        ),
        Node::Or(a, b) => Node::Or(
            Box::new(remap_leaves(*a, src_leaves, dst)),
            Box::new(remap_leaves(*b, src_leaves, dst)),
        ),
    }
}

impl fmt::Display for RegularEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence-aware rendering: `|` < `&` < `!`.
        fn go(node: &Node, leaves: &[Leaf], prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
            let own = match node {
                Node::Or(..) => 0,
                Node::And(..) => 1,
                Node::Not(_) => 2,
                Node::Leaf(_) => 3,
            };
            let parens = own < prec;
            if parens {
                write!(out, "(")?;
            }
            match node {
                Node::Leaf(i) => match &leaves[*i] {
                    Leaf::Edge(v) => {
                        let body = v
                            .iter()
                            .map(|x| x.to_string())
                            .collect::<Vec<_>>()
                            .join(",");
                        write!(out, "A({body})")?;
                    }
                    Leaf::Offset(n) => write!(out, "A[{n}]")?,
                },
                Node::Not(x) => {
                    write!(out, "!")?;
                    go(x, leaves, 2, out)?;
                }
                Node::And(a, b) => {
                    go(a, leaves, 1, out)?;
                    write!(out, " & ")?;
                    go(b, leaves, 2, out)?;
                }
                Node::Or(a, b) => {
                    go(a, leaves, 0, out)?;
                    write!(out, " | ")?;
                    go(b, leaves, 1, out)?;
                }
            }
            if parens {
                write!(out, ")")?;
            }
            Ok(())
        }
        go(&self.root, &self.leaves, 0, f)
    }
}

// ---------------------------------------------------------------------
// Mini-language parser
// ---------------------------------------------------------------------

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(self.err(format!(
                "expected '{}', found '{}'",
                c as char, got as char
            ))),
            None => Err(self.err(format!("expected '{}', found end of input", c as char))),
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.text.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.text.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start || (self.pos == start + 1 && self.text[start] == b'-') {
            return Err(self.err("expected an integer"));
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|_| self.err("integer out of range"))
    }

    fn or_expr(&mut self) -> Result<RegularEvent> {
        let mut acc = self.and_expr()?;
        while self.peek() == Some(b'|') {
            self.pos += 1;
            let rhs = self.and_expr()?;
            acc = RegularEvent::or(acc, rhs)?;
        }
        Ok(acc)
    }

    fn and_expr(&mut self) -> Result<RegularEvent> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'&') {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = RegularEvent::and(acc, rhs)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RegularEvent> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(RegularEvent::negate(self.unary()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.or_expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b'A') => self.leaf(),
            Some(c) => Err(self.err(format!("unexpected '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn leaf(&mut self) -> Result<RegularEvent> {
        self.expect(b'A')?;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let mut indices = Vec::new();
                loop {
                    let v = self.integer()?;
                    if v < 1 {
                        return Err(self.err("edge indices are 1-based positive integers"));
                    }
                    indices.push(v as usize);
                    match self.bump() {
                        Some(b',') => continue,
                        Some(b')') => break,
                        Some(c) => {
                            self.pos -= 1;
                            return Err(
                                self.err(format!("expected ',' or ')', found '{}'", c as char))
                            );
                        }
                        None => return Err(self.err("unterminated leaf")),
                    }
                }
                RegularEvent::edge_leaf(&indices).map_err(|e| match e {
                    Error::Input(msg) => self.err(msg),
                    other => other,
                })
            }
            Some(b'[') => {
                self.pos += 1;
                let n = self.integer()?;
                self.expect(b']')?;
                Ok(RegularEvent::offset_leaf(n))
            }
            _ => Err(self.err("expected '(' or '[' after 'A'")),
        }
    }
}

/// Parses the event mini-language.
///
/// Grammar (whitespace-insensitive):
/// ```text
/// event := or
/// or    := and ('|' and)*
/// and   := unary ('&' unary)*
/// unary := '!' unary | 'A' '(' int (',' int)* ')' | 'A' '[' int ']' | '(' or ')'
/// ```
/// Edge indices are 1-based; offsets may be any integer. Parse errors
/// carry the byte position of the offending character.
pub fn parse_event(text: &str) -> Result<RegularEvent> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
    };
    let event = p.or_expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input after event"));
    }
    Ok(event)
}

// ---------------------------------------------------------------------
// Index permutations
// ---------------------------------------------------------------------

/// Finitely supported permutation of the sampled indices `1, 2, ...`.
#[derive(Clone, Debug, Default)]
pub struct IndexPermutation {
    map: BTreeMap<usize, usize>,
}

impl IndexPermutation {
    /// From explicit `(from, to)` pairs; must be injective and map the
    /// support onto itself. Indices outside the support are fixed.
    pub fn new(pairs: &[(usize, usize)]) -> Result<IndexPermutation> {
        let mut map = BTreeMap::new();
        for &(from, to) in pairs {
            if from == 0 || to == 0 {
                return Err(Error::input("permutation indices are 1-based"));
            }
            if map.insert(from, to).is_some() {
                return Err(Error::input(format!("index {from} mapped twice")));
            }
        }
        let support: std::collections::BTreeSet<usize> = map.keys().copied().collect();
        let image: std::collections::BTreeSet<usize> = map.values().copied().collect();
        if support != image {
            return Err(Error::input("permutation must map its support onto itself"));
        }
        Ok(IndexPermutation { map })
    }

    pub fn identity() -> IndexPermutation {
        IndexPermutation::default()
    }

    pub fn transposition(a: usize, b: usize) -> Result<IndexPermutation> {
        if a == b {
            return IndexPermutation::new(&[]);
        }
        IndexPermutation::new(&[(a, b), (b, a)])
    }

    pub fn apply(&self, i: usize) -> usize {
        *self.map.get(&i).unwrap_or(&i)
    }
}

/// Relabels the sampled indices of an edge event; leaf index sets are
/// re-sorted into canonical form.
pub fn permute_event(event: &RegularEvent, perm: &IndexPermutation) -> Result<RegularEvent> {
    event.permute(perm)
}

/// Shifts every offset leaf by `n`.
pub fn shift_event(event: &RegularEvent, n: i64) -> Result<RegularEvent> {
    event.shift(n)
}

// ---------------------------------------------------------------------
// Exact and Monte-Carlo evaluation
// ---------------------------------------------------------------------

/// Options for exact enumeration.
#[derive(Clone, Copy, Debug)]
pub struct ExactOptions {
    /// Largest admitted event arity; assignments grow as n^K.
    pub max_arity: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { max_arity: 6 }
    }
}

fn check_edge_event(graph: &Hypergraph, event: &RegularEvent) -> Result<()> {
    match event.kind() {
        LeafKind::Edge { arity } if arity == graph.d() => Ok(()),
        LeafKind::Edge { arity } => Err(Error::input(format!(
            "event leaves have arity {arity} but the graph is {}-uniform",
            graph.d()
        ))),
        LeafKind::Offset => Err(Error::input(
            "offset events evaluate under the cyclic embedding, not a graph",
        )),
    }
}

/// Exact probability of `event` under the universal embedding of `graph`:
/// the fraction of assignments `(x_1..x_K) in V^K` satisfying the formula,
/// as an exact rational with denominator `n^K`.
pub fn embed_prob_exact(
    graph: &Hypergraph,
    event: &RegularEvent,
    opts: ExactOptions,
) -> Result<BigRational> {
    check_edge_event(graph, event)?;
    let k = event.arity();
    if k > opts.max_arity {
        return Err(Error::input(format!(
            "event arity {k} exceeds the enumeration cap {}; raise the cap or use Monte Carlo",
            opts.max_arity
        )));
    }
    let n = graph.n();
    let count: u128 = (0..n)
        .into_par_iter()
        .map(|x0| {
            let mut assignment = vec![0usize; k.max(1)];
            assignment[0] = x0;
            count_assignments(graph, event, &mut assignment[..k.max(1)], 1, n)
        })
        .sum::<u128>();
    let denom = BigInt::from(n).pow(k.max(1) as u32);
    Ok(BigRational::new(BigInt::from(count), denom))
}

fn count_assignments(
    graph: &Hypergraph,
    event: &RegularEvent,
    assignment: &mut [usize],
    depth: usize,
    n: usize,
) -> u128 {
    if depth >= assignment.len() {
        return event.holds_for_assignment(graph, assignment) as u128;
    }
    let mut total = 0;
    for v in 0..n {
        assignment[depth] = v;
        total += count_assignments(graph, event, assignment, depth + 1, n);
    }
    total
}

/// Monte-Carlo estimate with standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub successes: u64,
    pub samples: u64,
}

/// Unbiased Monte-Carlo estimator of [`embed_prob_exact`]. Sample `i`
/// draws its vertices from the stream keyed by `(seed, i)`, so the result
/// is identical for any partition of samples across workers.
pub fn embed_prob_mc(
    graph: &Hypergraph,
    event: &RegularEvent,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_edge_event(graph, event)?;
    if samples == 0 {
        return Err(Error::input("at least one sample required"));
    }
    let k = event.arity();
    let n = graph.n();
    let successes: u64 = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i);
            let assignment: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
            event.holds_for_assignment(graph, &assignment) as u64
        })
        .sum();
    let p = successes as f64 / samples as f64;
    Ok(McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        successes,
        samples,
    })
}

// ---------------------------------------------------------------------
// Cyclic-group (dilation) embedding
// ---------------------------------------------------------------------

/// A subset of `Z_N` together with the dilation scale `m`; the embedding
/// samples a base point `x` uniformly from `Z_N` and a dilation `lambda`
/// uniformly from `1..=L` where `L = floor(N/m)`.
#[derive(Clone, Debug)]
pub struct FurstenbergInstance {
    modulus: u64,
    set: Vec<bool>,
    scale: u64,
    dilation_bound: u64,
}

impl FurstenbergInstance {
    pub fn new(modulus: u64, members: &[u64], scale: u64) -> Result<FurstenbergInstance> {
        if modulus == 0 {
            return Err(Error::input("modulus must be positive"));
        }
        if scale == 0 || scale > modulus {
            return Err(Error::input(format!(
                "scale must satisfy 1 <= m <= N, got m={scale} N={modulus}"
            )));
        }
        let mut set = vec![false; modulus as usize];
        for &x in members {
            if x >= modulus {
                return Err(Error::input(format!("element {x} outside Z_{modulus}")));
            }
            set[x as usize] = true;
        }
        Ok(FurstenbergInstance {
            modulus,
            set,
            scale,
            dilation_bound: modulus / scale,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// `L = floor(N/m)`.
    pub fn dilation_bound(&self) -> u64 {
        self.dilation_bound
    }

    pub fn set_size(&self) -> u64 {
        self.set.iter().filter(|&&b| b).count() as u64
    }

    pub fn contains(&self, x: i64) -> bool {
        let n = self.modulus as i64;
        self.set[x.rem_euclid(n) as usize]
    }
}

/// Exact probability of an offset event under the dilation embedding:
/// leaf `A[k]` holds for `(x, lambda)` iff `x + k*lambda mod N` lies in
/// the set; the result has denominator `N * L`.
pub fn furstenberg_prob(inst: &FurstenbergInstance, event: &RegularEvent) -> Result<BigRational> {
    if event.kind() != LeafKind::Offset {
        return Err(Error::input("cyclic embedding evaluates offset events only"));
    }
    let n = inst.modulus as i64;
    let l = inst.dilation_bound as i64;
    let mut count: u64 = 0;
    for x in 0..n {
        for lambda in 1..=l {
            let vals: Vec<bool> = event
                .leaves
                .iter()
                .map(|leaf| match leaf {
                    Leaf::Offset(k) => inst.contains(x + k * lambda),
                    Leaf::Edge(_) => unreachable!(),
                })
                .collect();
            if event.eval(&vals) {
                count += 1;
            }
        }
    }
    Ok(BigRational::new(
        BigInt::from(count),
        BigInt::from(n) * BigInt::from(l),
    ))
}

/// The arithmetic-progression event `A[0] & A[n] & ... & A[(k-1)n]`.
pub fn ap_event(step: i64, k: usize) -> Result<RegularEvent> {
    let terms: Vec<RegularEvent> = (0..k as i64)
        .map(|j| RegularEvent::offset_leaf(j * step))
        .collect();
    RegularEvent::all(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;
    use num::Zero;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn exact(g: &Hypergraph, text: &str) -> BigRational {
        embed_prob_exact(g, &parse_event(text).unwrap(), ExactOptions::default()).unwrap()
    }

    #[test]
    fn parser_round_trips() {
        for text in [
            "A(1,2)",
            "A(1,2) & A(2,3) & A(1,3)",
            "!A(1,2) | A(2,3) & !(A(1,3) | A(1,4))",
            "A[-3] & !A[0] | A[7]",
        ] {
            let e = parse_event(text).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_event(&printed).unwrap(), e, "{text} -> {printed}");
        }
    }

    #[test]
    fn parser_canonicalizes_leaf_order() {
        assert_eq!(
            parse_event("A(2,1)").unwrap(),
            parse_event("A(1,2)").unwrap()
        );
    }

    #[test]
    fn parser_reports_positions() {
        match parse_event("A(1,2) &") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_event("A(1,x)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_event("A(1,1)").is_err()); // repeated index
        assert!(parse_event("A(0,1)").is_err()); // 1-based
        assert!(parse_event("A(1,2) & A[0]").is_err()); // mixed kinds
    }

    #[test]
    fn exact_examples() {
        let k3 = Hypergraph::complete(3, 2).unwrap();
        assert_eq!(exact(&k3, "A(1,2)"), ratio(2, 3));
        assert_eq!(exact(&k3, "A(1,2) & A(2,3) & A(3,1)"), ratio(2, 9));

        let empty = Hypergraph::build(3, 2, Vec::<Vec<usize>>::new()).unwrap();
        assert!(exact(&empty, "A(1,2)").is_zero());
    }

    #[test]
    fn distinctness_guard_on_complete_graphs() {
        for n in 2..7usize {
            let g = Hypergraph::complete(n, 2).unwrap();
            assert_eq!(exact(&g, "A(1,2)"), ratio(n as i64 - 1, n as i64));
        }
    }

    #[test]
    fn exact_rejects_bad_inputs() {
        let k3 = Hypergraph::complete(3, 2).unwrap();
        let e3 = parse_event("A(1,2,3)").unwrap();
        assert!(embed_prob_exact(&k3, &e3, ExactOptions::default()).is_err());
        let wide = parse_event("A(1,7)").unwrap();
        let err = embed_prob_exact(&k3, &wide, ExactOptions::default()).unwrap_err();
        assert!(err.to_string().contains("Monte Carlo"));
        let off = parse_event("A[0]").unwrap();
        assert!(embed_prob_exact(&k3, &off, ExactOptions::default()).is_err());
    }

    #[test]
    fn mc_tautology_is_exactly_one() {
        let k3 = Hypergraph::complete(3, 2).unwrap();
        let e = parse_event("A(1,2) | !A(1,2)").unwrap();
        let est = embed_prob_mc(&k3, &e, 500, 1).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.successes, 500);
    }

    #[test]
    fn mc_is_deterministic_and_close_to_exact() {
        let k3 = Hypergraph::complete(3, 2).unwrap();
        let e = parse_event("A(1,2) & A(2,3) & A(3,1)").unwrap();
        let a = embed_prob_mc(&k3, &e, 100_000, 7).unwrap();
        let b = embed_prob_mc(&k3, &e, 100_000, 7).unwrap();
        assert_eq!(a, b);
        let p = ratio(2, 9).to_f64().unwrap();
        let se = (p * (1.0 - p) / 100_000.0).sqrt();
        assert!((a.estimate - p).abs() <= 4.0 * se, "{} vs {}", a.estimate, p);
    }

    #[test]
    fn permutation_examples() {
        let e = parse_event("A(1,3)").unwrap();
        let id = IndexPermutation::identity();
        assert_eq!(permute_event(&e, &id).unwrap(), e);

        let swap12 = IndexPermutation::transposition(1, 2).unwrap();
        assert_eq!(
            permute_event(&e, &swap12).unwrap(),
            parse_event("A(2,3)").unwrap()
        );
        // Unordered leaf: swapping both members fixes the leaf.
        let e12 = parse_event("A(1,2)").unwrap();
        assert_eq!(permute_event(&e12, &swap12).unwrap(), e12);
    }

    #[test]
    fn permutation_invariance_is_exact() {
        let mut rng = crate::rng::stream(5, 0);
        use rand::seq::SliceRandom;
        use rand::Rng;
        for trial in 0..40 {
            let n = 3 + (trial % 4) as usize;
            let g = Hypergraph::random(n, 2, 0.5, trial).unwrap();
            let e = parse_event("A(1,2) & !A(2,3) | A(1,4)").unwrap();
            let k = 4 + rng.random_range(0..2usize);
            let mut targets: Vec<usize> = (1..=k).collect();
            targets.shuffle(&mut rng);
            let pairs: Vec<(usize, usize)> = (1..=k).zip(targets.iter().copied()).collect();
            let sigma = IndexPermutation::new(&pairs).unwrap();
            let lhs = embed_prob_exact(&g, &e, ExactOptions::default()).unwrap();
            let rhs = embed_prob_exact(
                &g,
                &permute_event(&e, &sigma).unwrap(),
                ExactOptions::default(),
            )
            .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn shift_examples() {
        let a0 = parse_event("A[0]").unwrap();
        assert_eq!(shift_event(&a0, 3).unwrap(), parse_event("A[3]").unwrap());
        let e = parse_event("A[0] & A[2]").unwrap();
        assert_eq!(
            shift_event(&e, -2).unwrap(),
            parse_event("A[-2] & A[0]").unwrap()
        );
        assert_eq!(shift_event(&shift_event(&e, 5).unwrap(), -5).unwrap(), e);
    }

    #[test]
    fn furstenberg_examples() {
        // Full set: any positive formula holds surely.
        let full = FurstenbergInstance::new(7, &[0, 1, 2, 3, 4, 5, 6], 3).unwrap();
        let e = parse_event("A[0] & A[5] & A[-2]").unwrap();
        assert_eq!(furstenberg_prob(&full, &e).unwrap(), ratio(1, 1));

        // P(A[0]) = |A|/N for every scale.
        for m in 1..=6u64 {
            let inst = FurstenbergInstance::new(6, &[0, 1], m).unwrap();
            assert_eq!(
                furstenberg_prob(&inst, &parse_event("A[0]").unwrap()).unwrap(),
                ratio(2, 6)
            );
        }

        // N=6, A={0,1}, m=3 (so L=2), E = A[0] & A[1]: enumerate 12 pairs.
        let inst = FurstenbergInstance::new(6, &[0, 1], 3).unwrap();
        assert_eq!(inst.dilation_bound(), 2);
        let e = parse_event("A[0] & A[1]").unwrap();
        let mut oracle = 0u32;
        for x in 0..6i64 {
            for lambda in 1..=2i64 {
                let member = |v: i64| v.rem_euclid(6) <= 1;
                if member(x) && member(x + lambda) {
                    oracle += 1;
                }
            }
        }
        assert_eq!(oracle, 1);
        assert_eq!(furstenberg_prob(&inst, &e).unwrap(), ratio(1, 12));
    }

    #[test]
    fn furstenberg_rejects_bad_scale() {
        assert!(FurstenbergInstance::new(5, &[0], 6).is_err());
        assert!(FurstenbergInstance::new(5, &[0], 0).is_err());
        assert!(FurstenbergInstance::new(5, &[7], 1).is_err());
    }

    #[test]
    fn shift_invariance_is_exact() {
        use rand::Rng;
        let mut rng = crate::rng::stream(6, 0);
        for trial in 0..40u64 {
            let n = 4 + rng.random_range(0..30u64);
            let members: Vec<u64> = (0..n).filter(|_| rng.random::<f64>() < 0.4).collect();
            let m = 1 + rng.random_range(0..n);
            let inst = FurstenbergInstance::new(n, &members, m).unwrap();
            let e = ap_event(1 + rng.random_range(0..3i64), 3).unwrap();
            let s = rng.random_range(-5..6i64);
            let lhs = furstenberg_prob(&inst, &e).unwrap();
            let rhs = furstenberg_prob(&inst, &shift_event(&e, s).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "trial {trial}");
        }
    }

    #[test]
    fn ap_probability_matches_direct_pair_count() {
        use rand::Rng;
        let mut rng = crate::rng::stream(7, 0);
        for _ in 0..30 {
            let n = 5 + rng.random_range(0..20i64);
            let members: Vec<u64> = (0..n as u64).filter(|_| rng.random::<f64>() < 0.5).collect();
            let m = 1 + rng.random_range(0..n as u64);
            let inst = FurstenbergInstance::new(n as u64, &members, m).unwrap();
            let k = 2 + rng.random_range(0..3usize);
            let step = 1 + rng.random_range(0..4i64);
            let event = ap_event(step, k).unwrap();

            // Independent (x, lambda) loop.
            let l = inst.dilation_bound() as i64;
            let mut count = 0u64;
            for x in 0..n {
                for lambda in 1..=l {
                    if (0..k as i64).all(|j| inst.contains(x + j * step * lambda)) {
                        count += 1;
                    }
                }
            }
            let expected = BigRational::new(BigInt::from(count), BigInt::from(n * l));
            assert_eq!(furstenberg_prob(&inst, &event).unwrap(), expected);
        }
    }
}
