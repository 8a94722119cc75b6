//! Strata of meromorphic quadratic differentials and the partition class
//! swept by the large-genus scans.
//!
//! A stratum is identified by the unordered multiset of its singularity
//! orders `d_i >= -1` (`-1` a simple pole, `0` a marked point), with
//! `sum d_i = 4g - 4`. The enumerator walks all such partitions of `4g - 4`
//! whose number of poles stays below a genus-dependent bound, in decreasing
//! lexicographic order of the canonical (non-increasing) representation.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StrataError {
    #[error("singularity order {0} is below -1")]
    OrderBelowMinusOne(i64),
    #[error("orders sum to {0}, which is not divisible by 4")]
    SumNotDivisibleBy4(i64),
    #[error("orders sum to {0} < -4 (negative genus)")]
    NegativeGenus(i64),
    #[error("a stratum needs at least one singularity or marked point")]
    Empty,
    #[error("Q_{{g,n}} with g={g}, n={n} would have {zeros} simple zeros", zeros = 4 * (*g as i64) - 4 + (*n as i64))]
    InvalidFamilyMember { g: u32, n: u32 },
    #[error("enumeration is defined for genus >= 2, got {0}")]
    EnumerationGenus(u32),
    #[error("invalid partition literal: {0}")]
    Literal(String),
}

/// A stratum `Q(d_1, ..., d_n)`, orders stored in non-increasing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StratumPartition {
    orders: Vec<i64>,
}

impl StratumPartition {
    /// Canonicalizes and validates a list of singularity orders.
    pub fn from_orders(orders: impl Into<Vec<i64>>) -> Result<Self, StrataError> {
        let mut orders = orders.into();
        if orders.is_empty() {
            return Err(StrataError::Empty);
        }
        if let Some(&bad) = orders.iter().find(|&&d| d < -1) {
            return Err(StrataError::OrderBelowMinusOne(bad));
        }
        let sum: i64 = orders.iter().sum();
        if sum.rem_euclid(4) != 0 {
            return Err(StrataError::SumNotDivisibleBy4(sum));
        }
        if sum < -4 {
            return Err(StrataError::NegativeGenus(sum));
        }
        orders.sort_unstable_by_key(|&d| Reverse(d));
        Ok(Self { orders })
    }

    /// The member `Q_{g,n} = Q(1^{4g-4+n}, -1^n)` of the principal family.
    pub fn qgn(g: u32, n: u32) -> Result<Self, StrataError> {
        let member = QgnFamily::new(g, n)?;
        Ok(member.partition())
    }

    pub fn orders(&self) -> &[i64] {
        &self.orders
    }

    /// Number of labeled singularities / marked points.
    pub fn n(&self) -> usize {
        self.orders.len()
    }

    pub fn order_sum(&self) -> i64 {
        self.orders.iter().sum()
    }

    pub fn genus(&self) -> u32 {
        ((self.order_sum() + 4) / 4) as u32
    }

    /// Complex dimension `2g - 2 + n` of the stratum.
    pub fn dimension(&self) -> u64 {
        let d = 2 * self.genus() as i64 - 2 + self.n() as i64;
        debug_assert!(d >= 1);
        d as u64
    }

    pub fn multiplicities(&self) -> MultiplicityProfile {
        let mut mu = BTreeMap::new();
        for &d in &self.orders {
            *mu.entry(d).or_insert(0usize) += 1;
        }
        MultiplicityProfile { mu }
    }

    /// Number of odd orders (simple poles included); always even.
    pub fn odd_count(&self) -> usize {
        self.orders.iter().filter(|&&d| d.rem_euclid(2) == 1).count()
    }

    pub fn pole_count(&self) -> usize {
        self.orders.iter().filter(|&&d| d == -1).count()
    }

    pub fn zero_order_count(&self) -> usize {
        self.orders.iter().filter(|&&d| d == 0).count()
    }

    /// Effective genus `g - 1 + odd_count/2`: genus of the orientation double
    /// cover (ramified over odd-order singularities) minus the base genus.
    pub fn effective_genus(&self) -> u64 {
        let v = self.genus() as i64 - 1 + (self.odd_count() / 2) as i64;
        debug_assert!(v >= 0);
        v as u64
    }

    /// Same stratum with one extra marked point.
    pub fn with_marked_point(&self) -> Self {
        let mut orders = self.orders.clone();
        orders.push(0);
        Self::from_orders(orders).expect("appending a marked point preserves validity")
    }

    /// New partition with the orders at the given canonical indices shifted.
    pub(crate) fn with_shifted(&self, shifts: &[(usize, i64)]) -> Result<Self, StrataError> {
        let mut orders = self.orders.clone();
        for &(i, delta) in shifts {
            orders[i] += delta;
        }
        Self::from_orders(orders)
    }

    /// Pole bound defining the partition class at this genus: `floor(ln g)`.
    pub fn default_pole_bound(g: u32) -> usize {
        if g < 2 {
            return 0;
        }
        (g as f64).ln().floor() as usize
    }

    /// Whether the partition lies in the scanned class for its genus:
    /// `sum d_i = 4g - 4` with `g >= 2` and at most `floor(ln g)` poles.
    pub fn is_in_pihat(&self) -> bool {
        let g = self.genus();
        g >= 2 && self.pole_count() <= Self::default_pole_bound(g)
    }

    /// Parses `[d1,d2,...]` with optional `*m` repetition, e.g. `[1]*96`.
    pub fn parse_literal(s: &str) -> Result<Self, StrataError> {
        let s = s.trim();
        let (list, reps) = match s.split_once("]*") {
            Some((head, count)) => {
                let reps: usize = count
                    .trim()
                    .parse()
                    .map_err(|_| StrataError::Literal(format!("bad repeat count `{count}`")))?;
                (format!("{head}]"), reps)
            }
            None => (s.to_string(), 1),
        };
        let inner = list
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| StrataError::Literal(format!("expected `[...]`, got `{s}`")))?;
        let mut base = Vec::new();
        for piece in inner.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                return Err(StrataError::Literal("empty order entry".into()));
            }
            let d: i64 = piece
                .parse()
                .map_err(|_| StrataError::Literal(format!("bad order `{piece}`")))?;
            base.push(d);
        }
        if reps == 0 {
            return Err(StrataError::Literal("repeat count must be positive".into()));
        }
        let mut orders = Vec::with_capacity(base.len() * reps);
        for _ in 0..reps {
            orders.extend_from_slice(&base);
        }
        Self::from_orders(orders)
    }
}

impl fmt::Display for StratumPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.orders.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for StratumPartition {
    type Err = StrataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_literal(s)
    }
}

impl Serialize for StratumPartition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.orders.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StratumPartition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let orders = Vec::<i64>::deserialize(deserializer)?;
        Self::from_orders(orders).map_err(serde::de::Error::custom)
    }
}

/// Multiplicity `mu_k` of each order value `k` occurring in a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityProfile {
    mu: BTreeMap<i64, usize>,
}

impl MultiplicityProfile {
    pub fn mu(&self, order: i64) -> usize {
        self.mu.get(&order).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, usize)> + '_ {
        self.mu.iter().map(|(&k, &m)| (k, m))
    }

    pub fn total(&self) -> usize {
        self.mu.values().sum()
    }

    pub fn weighted_sum(&self) -> i64 {
        self.mu.iter().map(|(&k, &m)| k * m as i64).sum()
    }
}

/// A member of the principal family `Q_{g,n}` (simple zeros, n simple poles).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QgnFamily {
    g: u32,
    n: u32,
}

impl QgnFamily {
    pub fn new(g: u32, n: u32) -> Result<Self, StrataError> {
        if 4 * g as i64 - 4 + n as i64 < 0 {
            return Err(StrataError::InvalidFamilyMember { g, n });
        }
        Ok(Self { g, n })
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of simple zeros, `4g - 4 + n`.
    pub fn ell(&self) -> u64 {
        (4 * self.g as i64 - 4 + self.n as i64) as u64
    }

    /// Complex dimension `6g - 6 + 2n`.
    pub fn dimension(&self) -> u64 {
        2 * self.ell() - 2 * self.g as u64 + 2 * self.n as u64
    }

    pub fn partition(&self) -> StratumPartition {
        let zeros = self.ell() as usize;
        let mut orders = vec![1i64; zeros];
        orders.extend(std::iter::repeat(-1).take(self.n as usize));
        StratumPartition::from_orders(orders).expect("family member is a valid partition")
    }
}

impl fmt::Display for QgnFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q_{{{},{}}}", self.g, self.n)
    }
}

/// Options controlling the partition enumeration.
#[derive(Clone, Debug)]
pub struct PihatOptions {
    /// Include partitions containing marked points (order 0).
    pub allow_zero_parts: bool,
    /// Maximum number of marked points per partition (ignored unless
    /// `allow_zero_parts`).
    pub max_zero_parts: usize,
    /// Replace the `floor(ln g)` pole bound.
    pub pole_bound_override: Option<usize>,
}

impl Default for PihatOptions {
    fn default() -> Self {
        Self {
            allow_zero_parts: false,
            max_zero_parts: 0,
            pole_bound_override: None,
        }
    }
}

/// All partitions of `4g - 4` with parts `>= -1`, at most `floor(ln g)` poles
/// (or the override), and marked points only when allowed; decreasing
/// lexicographic order, each exactly once.
pub fn enumerate_pihat(
    g: u32,
    options: &PihatOptions,
) -> Result<PihatEnumerator, StrataError> {
    if g < 2 {
        return Err(StrataError::EnumerationGenus(g));
    }
    let pole_bound = options
        .pole_bound_override
        .unwrap_or_else(|| StratumPartition::default_pole_bound(g));
    let max_zeros = if options.allow_zero_parts {
        options.max_zero_parts
    } else {
        0
    };
    let target = 4 * g as i64 - 4;

    let mut streams = Vec::new();
    for poles in 0..=pole_bound {
        for zeros in 0..=max_zeros {
            // positive parts must sum to target + poles (> 0 since g >= 2)
            let positive_sum = target + poles as i64;
            streams.push(SuffixedStream::new(positive_sum as u64, zeros, poles));
        }
    }
    let mut heap = BinaryHeap::with_capacity(streams.len());
    for (id, stream) in streams.iter_mut().enumerate() {
        if let Some(p) = stream.next_partition() {
            heap.push(HeapEntry { orders: p, id });
        }
    }
    Ok(PihatEnumerator { streams, heap })
}

/// Positive partitions of a fixed sum in decreasing lexicographic order,
/// each suffixed with a fixed number of zeros and poles.
struct SuffixedStream {
    state: Option<Vec<u64>>,
    started: bool,
    zeros: usize,
    poles: usize,
}

impl SuffixedStream {
    fn new(sum: u64, zeros: usize, poles: usize) -> Self {
        debug_assert!(sum > 0);
        Self {
            state: Some(vec![sum]),
            started: false,
            zeros,
            poles,
        }
    }

    fn next_partition(&mut self) -> Option<Vec<i64>> {
        if self.started {
            self.advance();
        }
        self.started = true;
        let parts = self.state.as_ref()?;
        let mut orders: Vec<i64> = parts.iter().map(|&p| p as i64).collect();
        orders.extend(std::iter::repeat(0).take(self.zeros));
        orders.extend(std::iter::repeat(-1).take(self.poles));
        Some(orders)
    }

    /// Steps the positive partition to its successor in decreasing lex order:
    /// decrement the rightmost part larger than 1 and repack the tail.
    fn advance(&mut self) {
        let parts = match &mut self.state {
            Some(p) => p,
            None => return,
        };
        let pivot = match parts.iter().rposition(|&p| p > 1) {
            Some(i) => i,
            None => {
                self.state = None;
                return;
            }
        };
        let tail_sum: u64 = parts[pivot..].iter().sum();
        let unit = parts[pivot] - 1;
        parts.truncate(pivot);
        let mut rest = tail_sum;
        while rest > 0 {
            let part = unit.min(rest);
            parts.push(part);
            rest -= part;
        }
    }
}

struct HeapEntry {
    orders: Vec<i64>,
    id: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.orders == other.orders
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.orders.cmp(&other.orders)
    }
}

/// Stream over the partition class; see [`enumerate_pihat`].
pub struct PihatEnumerator {
    streams: Vec<SuffixedStream>,
    heap: BinaryHeap<HeapEntry>,
}

impl Iterator for PihatEnumerator {
    type Item = StratumPartition;

    fn next(&mut self) -> Option<Self::Item> {
        let top = self.heap.pop()?;
        if let Some(p) = self.streams[top.id].next_partition() {
            self.heap.push(HeapEntry {
                orders: p,
                id: top.id,
            });
        }
        Some(StratumPartition { orders: top.orders })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(orders: &[i64]) -> StratumPartition {
        StratumPartition::from_orders(orders.to_vec()).unwrap()
    }

    #[test]
    fn from_orders_basics() {
        let q = p(&[1, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(q.genus(), 3);
        assert_eq!(q.n(), 8);
        assert_eq!(q.dimension(), 12);

        let pillow = p(&[-1, -1, -1, -1]);
        assert_eq!(pillow.genus(), 0);
        assert_eq!(pillow.n(), 4);
        assert_eq!(pillow.dimension(), 2);

        assert_eq!(
            StratumPartition::from_orders(vec![3, -2]),
            Err(StrataError::OrderBelowMinusOne(-2))
        );
        assert_eq!(
            StratumPartition::from_orders(vec![3]),
            Err(StrataError::SumNotDivisibleBy4(3))
        );
        assert_eq!(
            StratumPartition::from_orders(vec![-1; 8]),
            Err(StrataError::NegativeGenus(-8))
        );
        assert_eq!(StratumPartition::from_orders(vec![]), Err(StrataError::Empty));
    }

    #[test]
    fn canonical_order_is_non_increasing() {
        let q = p(&[-1, 4, 1, 2]);
        assert_eq!(q.orders(), &[4, 2, 1, -1]);
        assert_eq!(q, p(&[4, 1, 2, -1]));
    }

    #[test]
    fn qgn_members() {
        let q30 = StratumPartition::qgn(3, 0).unwrap();
        assert_eq!(q30.orders(), &[1; 8]);
        assert_eq!(q30.dimension(), 12);

        let q04 = StratumPartition::qgn(0, 4).unwrap();
        assert_eq!(q04.orders(), &[-1, -1, -1, -1]);
        assert_eq!(q04.dimension(), 2);

        assert!(StratumPartition::qgn(0, 3).is_err());

        let fam = QgnFamily::new(3, 0).unwrap();
        assert_eq!(fam.ell(), 8);
        assert_eq!(fam.dimension(), 12);
        assert_eq!(fam.to_string(), "Q_{3,0}");
    }

    #[test]
    fn invariants_and_counts() {
        assert_eq!(p(&[1; 8]).odd_count(), 8);
        let pillow = p(&[-1, -1, -1, -1]);
        assert_eq!(pillow.odd_count(), 4);
        assert_eq!(pillow.multiplicities().mu(-1), 4);
        let q44 = p(&[4, 4]);
        assert_eq!(q44.genus(), 3);
        assert_eq!(q44.dimension(), 6);
        assert_eq!(q44.odd_count(), 0);
    }

    #[test]
    fn effective_genus_cases() {
        assert_eq!(p(&[-1, -1, -1, -1]).effective_genus(), 1);
        assert_eq!(p(&[4, 4]).effective_genus(), 2);
        assert_eq!(p(&[1; 8]).effective_genus(), 6);
    }

    #[test]
    fn pihat_membership() {
        // n <= floor(ln g) exactly
        for g in 2..=12u32 {
            let bound = StratumPartition::default_pole_bound(g);
            for n in 0..=4u32 {
                let q = StratumPartition::qgn(g, n).unwrap();
                assert_eq!(q.is_in_pihat(), (n as usize) <= bound, "g={g} n={n}");
            }
        }
        assert!(!p(&[0]).is_in_pihat()); // genus 1
    }

    #[test]
    fn enumerate_genus_two_default() {
        let got: Vec<_> = enumerate_pihat(2, &PihatOptions::default())
            .unwrap()
            .collect();
        let expect = [
            vec![4],
            vec![3, 1],
            vec![2, 2],
            vec![2, 1, 1],
            vec![1, 1, 1, 1],
        ];
        assert_eq!(got.len(), 5);
        for (a, b) in got.iter().zip(expect.iter()) {
            assert_eq!(a.orders(), b.as_slice());
        }
    }

    #[test]
    fn enumerate_with_pole_override() {
        let opts = PihatOptions {
            pole_bound_override: Some(2),
            ..Default::default()
        };
        let got: Vec<_> = enumerate_pihat(2, &opts).unwrap().collect();
        // p(4) + p(5) + p(6) partitions of the positive load
        assert_eq!(got.len(), 5 + 7 + 11);
        for q in &got {
            assert_eq!(q.order_sum(), 4);
            assert!(q.pole_count() <= 2);
        }
        for want in [&[4i64, 1, -1][..], &[1, 1, 1, 1, 1, -1], &[2, 2, 1, -1]] {
            assert!(got.iter().any(|q| q.orders() == want), "missing {want:?}");
        }
        // strictly decreasing lexicographic order, hence duplicate-free
        for w in got.windows(2) {
            assert!(w[0].orders() > w[1].orders());
        }
    }

    #[test]
    fn enumerate_with_marked_points() {
        let opts = PihatOptions {
            allow_zero_parts: true,
            max_zero_parts: 1,
            ..Default::default()
        };
        let got: Vec<_> = enumerate_pihat(2, &opts).unwrap().collect();
        assert_eq!(got.len(), 10);
        let plain: Vec<_> = enumerate_pihat(2, &PihatOptions::default())
            .unwrap()
            .collect();
        for q in &plain {
            assert!(got.contains(q));
            assert!(got.contains(&q.with_marked_point()));
        }
    }

    #[test]
    fn enumerate_rejects_low_genus() {
        assert!(matches!(
            enumerate_pihat(1, &PihatOptions::default()),
            Err(StrataError::EnumerationGenus(1))
        ));
    }

    #[test]
    fn literal_parsing() {
        assert_eq!(
            StratumPartition::parse_literal("[4,1,-1]").unwrap().orders(),
            &[4, 1, -1]
        );
        assert_eq!(
            StratumPartition::parse_literal("[1]*96").unwrap(),
            StratumPartition::qgn(25, 0).unwrap()
        );
        assert_eq!(
            StratumPartition::parse_literal(" [ 2 , 1 , 1 ] ").unwrap().orders(),
            &[2, 1, 1]
        );
        assert!(StratumPartition::parse_literal("[1,2").is_err());
        assert!(StratumPartition::parse_literal("[]").is_err());
        assert!(StratumPartition::parse_literal("[1]*x").is_err());
        assert!(StratumPartition::parse_literal("[3,-2]").is_err());
    }

    #[test]
    fn display_round_trip() {
        let q = p(&[4, 2, 1, -1]);
        assert_eq!(q.to_string(), "[4,2,1,-1]");
        assert_eq!(q.to_string().parse::<StratumPartition>().unwrap(), q);
    }
}
