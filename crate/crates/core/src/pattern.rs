//! Binary beam-allocation patterns.
//!
//! A pattern is an `N x K` 0/1 matrix `B`; `b_nk = 1` puts user `k` on beam
//! `n`. Columns are stored as bitmasks (bit `n` set iff `b_nk = 1`), which
//! caps `N` at 64 beams; every operation here is exponential in `N` anyway.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{max_users, SystemDims};
use crate::error::{PdmaError, Result};

const MAX_BEAMS: usize = 64;
/// Largest reduced search space `2^(N (K - N))` that will be enumerated.
pub const MAX_SEARCH_BITS: usize = 32;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct Pattern {
    n_beams: usize,
    columns: Vec<u64>,
}

impl Pattern {
    /// Builds a pattern from its columns given as bitmasks.
    pub fn from_columns(n_beams: usize, columns: Vec<u64>) -> Result<Self> {
        if n_beams == 0 || n_beams > MAX_BEAMS {
            return Err(PdmaError::Dimension(format!(
                "pattern needs 1..={MAX_BEAMS} beams, got {n_beams}"
            )));
        }
        let mask = beam_mask(n_beams);
        if let Some(c) = columns.iter().find(|&&c| c & !mask != 0) {
            return Err(PdmaError::Dimension(format!(
                "column {c:#b} has bits beyond beam {n_beams}"
            )));
        }
        Ok(Pattern { n_beams, columns })
    }

    /// Row-major 0/1 matrix, one inner vector per beam.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(PdmaError::Dimension("pattern rows differ in length".into()));
        }
        let mut columns = vec![0u64; k];
        for (bn, row) in rows.iter().enumerate() {
            for (col, &v) in columns.iter_mut().zip(row) {
                match v {
                    0 => {}
                    1 => *col |= 1 << bn,
                    other => return Err(PdmaError::Domain(format!("pattern entry {other} is not 0/1"))),
                }
            }
        }
        Pattern::from_columns(n, columns)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Pattern::from_columns(n, (0..n).map(|i| 1u64 << i).collect())
    }

    pub fn n_beams(&self) -> usize {
        self.n_beams
    }

    pub fn n_users(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, beam: usize, user: usize) -> bool {
        self.columns[user] >> beam & 1 == 1
    }

    pub fn column(&self, user: usize) -> u64 {
        self.columns[user]
    }

    pub fn columns(&self) -> &[u64] {
        &self.columns
    }

    /// Column as `[b_1k, ..., b_Nk]`.
    pub fn column_bits(&self, user: usize) -> Vec<u8> {
        column_bits(self.columns[user], self.n_beams)
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.n_beams)
            .map(|n| self.columns.iter().map(|c| (c >> n & 1) as u8).collect())
            .collect()
    }

    /// Users covered by `beam`, in index order.
    pub fn users_on_beam(&self, beam: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_users()).filter(move |&k| self.get(beam, k))
    }

    pub fn diversity(&self, user: usize) -> usize {
        self.columns[user].count_ones() as usize
    }

    pub fn inner(&self, a: usize, b: usize) -> usize {
        (self.columns[a] & self.columns[b]).count_ones() as usize
    }

    /// `B` as a real matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(
            self.n_beams,
            self.n_users(),
            |n, k| {
                if self.get(n, k) {
                    1.0
                } else {
                    0.0
                }
            },
        )
    }

    /// Every violated PDMA pattern invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let k = self.n_users();
        if k < self.n_beams || k > max_users(self.n_beams) {
            out.push(Violation::UserCountOutOfRange {
                n_users: k,
                n_beams: self.n_beams,
            });
        }
        for (user, &c) in self.columns.iter().enumerate() {
            if c == 0 {
                out.push(Violation::UncoveredUser { user });
            }
        }
        for a in 0..k {
            for b in a + 1..k {
                if self.columns[a] == self.columns[b] && self.columns[a] != 0 {
                    out.push(Violation::DuplicateColumn { first: a, second: b });
                }
            }
        }
        out
    }

    pub fn metrics(&self) -> PatternMetrics {
        let k = self.n_users();
        let diversity: Vec<usize> = (0..k).map(|u| self.diversity(u)).collect();
        let overlap: Vec<usize> = (0..self.n_beams).map(|n| self.users_on_beam(n).count()).collect();
        let mut max_inner = 0;
        for a in 0..k {
            for b in a + 1..k {
                max_inner = max_inner.max(self.inner(a, b));
            }
        }
        PatternMetrics {
            diversity,
            overlap,
            overload_ratio: OverloadRatio {
                users: k,
                beams: self.n_beams,
            },
            max_inner,
        }
    }

    /// Returns a copy with column `k` of the result taken from column
    /// `perm[k]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Pattern> {
        if perm.len() != self.n_users() {
            return Err(PdmaError::Dimension("permutation length mismatch".into()));
        }
        Pattern::from_columns(self.n_beams, perm.iter().map(|&i| self.columns[i]).collect())
    }
}

impl From<Pattern> for Vec<Vec<u8>> {
    fn from(p: Pattern) -> Self {
        p.rows()
    }
}

impl TryFrom<Vec<Vec<u8>>> for Pattern {
    type Error = PdmaError;

    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        Pattern::from_rows(&rows)
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern{:?}", self.rows())
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UncoveredUser { user: usize },
    DuplicateColumn { first: usize, second: usize },
    UserCountOutOfRange { n_users: usize, n_beams: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UncoveredUser { user } => write!(f, "uncovered user {user}"),
            Violation::DuplicateColumn { first, second } => {
                write!(f, "duplicate column: users {first} and {second}")
            }
            Violation::UserCountOutOfRange { n_users, n_beams } => {
                write!(f, "K = {n_users} outside N <= K <= 2^N - 1 for N = {n_beams}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverloadRatio {
    pub users: usize,
    pub beams: usize,
}

impl OverloadRatio {
    pub fn value(&self) -> f64 {
        self.users as f64 / self.beams as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternMetrics {
    /// Column sums (transmit diversity order per user).
    pub diversity: Vec<usize>,
    /// Row sums (users sharing each beam).
    pub overlap: Vec<usize>,
    pub overload_ratio: OverloadRatio,
    /// Largest pairwise column inner product.
    pub max_inner: usize,
}

fn beam_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn column_bits(c: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| (c >> i & 1) as u8).collect()
}

/// Orders columns by diversity, then lexicographically on `[b_1, ..., b_N]`.
fn column_order(a: u64, b: u64, n: usize) -> Ordering {
    a.count_ones()
        .cmp(&b.count_ones())
        .then_with(|| column_bits(a, n).cmp(&column_bits(b, n)))
}

fn check_order(user_order: &[usize], k: usize) -> Result<()> {
    if user_order.len() != k {
        return Err(PdmaError::Dimension(format!(
            "user order has {} entries, expected {k}",
            user_order.len()
        )));
    }
    let mut seen = vec![false; k];
    for &u in user_order {
        if u >= k || std::mem::replace(&mut seen[u], true) {
            return Err(PdmaError::Dimension(format!(
                "user order is not a permutation of 0..{k}"
            )));
        }
    }
    Ok(())
}

/// Picks, from `pool`, the column that keeps the largest beam overlap
/// smallest, breaking ties lexicographically.
fn pick_balanced(pool: &mut Vec<u64>, overlap: &mut [usize], n: usize) -> Option<u64> {
    let (idx, _) = pool.iter().enumerate().min_by(|(_, &a), (_, &b)| {
        let peak = |c: u64| (0..n).map(|i| overlap[i] + (c >> i & 1) as usize).max().unwrap_or(0);
        peak(a)
            .cmp(&peak(b))
            .then_with(|| column_bits(a, n).cmp(&column_bits(b, n)))
    })?;
    let c = pool.remove(idx);
    for (i, o) in overlap.iter_mut().enumerate() {
        *o += (c >> i & 1) as usize;
    }
    Some(c)
}

/// The simple beam policy: weaker users get larger diversity orders.
///
/// `user_order` lists users from weakest to strongest. The weakest user gets
/// the all-ones column; the `min(N - 1, K - 1)` strongest users get
/// weight-1 columns; the users in between take the heaviest remaining
/// columns (weight `N - 1` first). Any shortfall is filled with the
/// remaining weight-1 columns. Within a weight, columns are picked to keep
/// beam overlaps balanced.
///
/// With `oma` and `K = N` the identity pattern is returned instead.
pub fn simple_beam_allocation(dims: SystemDims, user_order: &[usize], oma: bool) -> Result<Pattern> {
    dims.check_user_range()?;
    let (n, k) = (dims.n_beams, dims.n_users);
    check_order(user_order, k)?;
    if n > MAX_BEAMS {
        return Err(PdmaError::Dimension(format!("at most {MAX_BEAMS} beams supported")));
    }
    if oma && k == n {
        return assign_columns_to_users(&Pattern::identity(n)?, user_order);
    }

    let all = beam_mask(n);
    let singles: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    let mut heavy: Vec<Vec<u64>> = Vec::new(); // heavy[w] = columns of weight w, 2 <= w < n
    if n >= 3 {
        heavy = vec![Vec::new(); n];
        for c in 1..all {
            let w = c.count_ones() as usize;
            if (2..n).contains(&w) {
                heavy[w].push(c);
            }
        }
    }

    let n_low = (n - 1).min(k - 1);
    let n_mid = k - 1 - n_low;
    let mut overlap = vec![0usize; n];
    for (i, o) in overlap.iter_mut().enumerate() {
        *o += (all >> i & 1) as usize;
    }

    let mut mid = Vec::with_capacity(n_mid);
    let mut single_pool = singles.clone();
    for w in (2..n).rev() {
        while mid.len() < n_mid {
            match pick_balanced(&mut heavy[w], &mut overlap, n) {
                Some(c) => mid.push(c),
                None => break,
            }
        }
    }
    // reserve the weight-1 columns needed by the strongest users
    let mut low = Vec::with_capacity(n_low);
    while mid.len() < n_mid {
        // only reachable when every heavier column is used
        let c = pick_balanced(&mut single_pool, &mut overlap, n)
            .ok_or_else(|| PdmaError::Dimension("ran out of distinct columns".into()))?;
        mid.push(c);
    }
    while low.len() < n_low {
        let c = pick_balanced(&mut single_pool, &mut overlap, n)
            .ok_or_else(|| PdmaError::Dimension("ran out of distinct columns".into()))?;
        low.push(c);
    }

    let mut columns = vec![0u64; k];
    let ranked: Vec<u64> = std::iter::once(all).chain(mid).chain(low).collect();
    for (rank, &user) in user_order.iter().enumerate() {
        columns[user] = ranked[rank];
    }
    Pattern::from_columns(n, columns)
}

/// Outcome of the reduced min-max beam search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BeamSearch {
    /// `[I | B~]`, with `B~` in ascending diversity order.
    pub pattern: Pattern,
    /// Minimized maximum pairwise inner product.
    pub objective: usize,
    pub pairs_at_max: usize,
    pub inner_sum: usize,
    /// Masks in the reduced space satisfying all constraints.
    pub feasible_candidates: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct SearchKey {
    max_inner: usize,
    pairs_at_max: usize,
    inner_sum: usize,
    bits: u64,
    mask: u64,
}

fn score_reduced(mask: u64, n: usize, m: usize) -> Option<SearchKey> {
    let col_mask = beam_mask(n);
    let mut cols = [0u64; 64];
    let mut prev_w = 0;
    for j in 0..m {
        let c = (mask >> (j * n)) & col_mask;
        let w = c.count_ones();
        // nonzero and distinct from every identity column
        if w < 2 || w < prev_w {
            return None;
        }
        if cols[..j].contains(&c) {
            return None;
        }
        prev_w = w;
        cols[j] = c;
    }
    let mut max_inner = 0;
    let mut pairs_at_max = 0;
    let mut inner_sum = 0;
    let mut tally = |v: usize| {
        inner_sum += v;
        match v.cmp(&max_inner) {
            Ordering::Greater => {
                max_inner = v;
                pairs_at_max = 1;
            }
            Ordering::Equal => pairs_at_max += 1,
            Ordering::Less => {}
        }
    };
    // identity block: pairwise 0 among themselves
    for _ in 0..n * n.saturating_sub(1) / 2 {
        tally(0);
    }
    for (j, &c) in cols[..m].iter().enumerate() {
        for i in 0..n {
            tally((c >> i & 1) as usize);
        }
        for &d in &cols[..j] {
            tally((c & d).count_ones() as usize);
        }
    }
    let mut bits = 0u64;
    for &c in &cols[..m] {
        for i in 0..n {
            bits = bits << 1 | (c >> i & 1);
        }
    }
    Some(SearchKey {
        max_inner,
        pairs_at_max,
        inner_sum,
        bits,
        mask,
    })
}

/// Optimal beam allocation by exhaustive search over the reduced space.
///
/// The target block is fixed to the identity; the remaining `K - N` columns
/// range over all `2^(N (K - N))` binary matrices, restricted to distinct
/// columns of weight at least two in ascending diversity order. The winner
/// minimizes the maximum pairwise inner product over all `K` columns; ties go
/// to fewer pairs at the maximum, then the smaller sum of inner products,
/// then the lexicographically smallest bit string of `B~`.
pub fn optimize_beam_allocation(dims: SystemDims) -> Result<BeamSearch> {
    dims.check_user_range()?;
    let (n, k) = (dims.n_beams, dims.n_users);
    let m = k - n;
    let bits = n * m;
    if bits > MAX_SEARCH_BITS {
        return Err(PdmaError::SearchTooLarge { bits });
    }
    let total = 1u64 << bits;
    let (best, count) = (0..total)
        .into_par_iter()
        .filter_map(|mask| score_reduced(mask, n, m))
        .fold(
            || (None::<SearchKey>, 0u64),
            |(best, cnt), key| (Some(best.map_or(key, |b| b.min(key))), cnt + 1),
        )
        .reduce(
            || (None, 0),
            |(a, ca), (b, cb)| {
                let best = match (a, b) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, None) => x,
                    (None, y) => y,
                };
                (best, ca + cb)
            },
        );
    let best = best.ok_or_else(|| PdmaError::Dimension(format!("no feasible reduced pattern for N = {n}, K = {k}")))?;
    let col_mask = beam_mask(n);
    let columns: Vec<u64> = (0..n)
        .map(|i| 1u64 << i)
        .chain((0..m).map(|j| (best.mask >> (j * n)) & col_mask))
        .collect();
    Ok(BeamSearch {
        pattern: Pattern::from_columns(n, columns)?,
        objective: best.max_inner,
        pairs_at_max: best.pairs_at_max,
        inner_sum: best.inner_sum,
        feasible_candidates: count,
    })
}

/// Places columns onto concrete users: lowest diversity to the strongest
/// user. `user_order` runs weakest to strongest. Equal-diversity columns
/// are taken in lexicographic order of `[b_1, ..., b_N]`.
pub fn assign_columns_to_users(pattern: &Pattern, user_order: &[usize]) -> Result<Pattern> {
    let k = pattern.n_users();
    check_order(user_order, k)?;
    let n = pattern.n_beams();
    let mut sorted: Vec<u64> = pattern.columns().to_vec();
    sorted.sort_by(|&a, &b| column_order(a, b, n));
    let mut columns = vec![0u64; k];
    for (j, &c) in sorted.iter().enumerate() {
        columns[user_order[k - 1 - j]] = c;
    }
    Pattern::from_columns(n, columns)
}

/// Bipartite beam/user factor graph in Graphviz DOT.
pub fn factor_graph_dot(pattern: &Pattern) -> String {
    let mut s = String::from("graph pdma_pattern {\n  rankdir=TB;\n");
    s.push_str("  subgraph beams {\n    rank=same;\n    node [shape=box];\n");
    for n in 0..pattern.n_beams() {
        s.push_str(&format!("    beam{};\n", n + 1));
    }
    s.push_str("  }\n  subgraph users {\n    rank=same;\n    node [shape=circle];\n");
    for k in 0..pattern.n_users() {
        s.push_str(&format!("    user{};\n", k + 1));
    }
    s.push_str("  }\n");
    for n in 0..pattern.n_beams() {
        for k in pattern.users_on_beam(n) {
            s.push_str(&format!("  beam{} -- user{};\n", n + 1, k + 1));
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn three_by_five() -> Pattern {
        Pattern::from_rows(&[vec![1, 1, 0, 1, 0], vec![1, 1, 1, 0, 0], vec![1, 0, 1, 0, 1]]).unwrap()
    }

    fn dims(n: usize, k: usize) -> SystemDims {
        SystemDims::new(16, 4, n, k)
    }

    #[test]
    fn three_by_five_is_valid_with_expected_metrics() {
        let p = three_by_five();
        assert!(p.validate().is_empty());
        let m = p.metrics();
        assert_eq!(m.diversity, vec![3, 2, 2, 1, 1]);
        assert_eq!(m.overlap, vec![3, 3, 3]);
        assert_eq!(m.overload_ratio, OverloadRatio { users: 5, beams: 3 });
        assert_eq!(m.max_inner, 2);
        assert_eq!(p.inner(0, 1), 2);
        assert_eq!(m.diversity.iter().sum::<usize>(), m.overlap.iter().sum::<usize>());
    }

    #[test]
    fn violations_are_reported() {
        let zero = Pattern::from_rows(&[vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        let v = zero.validate();
        assert!(v.contains(&Violation::UncoveredUser { user: 2 }));
        assert!(v.iter().any(|x| x.to_string().contains("uncovered user")));

        let dup = Pattern::from_rows(&[vec![1, 1, 0], vec![0, 0, 1]]).unwrap();
        let v = dup.validate();
        assert_eq!(v, vec![Violation::DuplicateColumn { first: 0, second: 1 }]);
        assert!(v[0].to_string().contains("duplicate column"));

        let too_many = Pattern::from_rows(&[vec![1, 0, 1, 1], vec![0, 1, 1, 1]]).unwrap();
        assert!(too_many
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::UserCountOutOfRange { .. })));
    }

    #[test]
    fn identity_metrics() {
        let m = Pattern::identity(3).unwrap().metrics();
        assert_eq!(m.diversity, vec![1, 1, 1]);
        assert_eq!(m.max_inner, 0);
    }

    #[test]
    fn rejects_non_binary_entries() {
        assert!(Pattern::from_rows(&[vec![0, 2]]).is_err());
        assert!(Pattern::from_rows(&[vec![0, 1], vec![1]]).is_err());
    }

    #[test]
    fn json_roundtrip_is_row_major() {
        let p = three_by_five();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[1,1,0,1,0],[1,1,1,0,0],[1,0,1,0,1]]");
        let back: Pattern = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn simple_policy_k3_gives_all_ones_to_weakest() {
        let order = [2, 0, 1];
        let p = simple_beam_allocation(dims(3, 3), &order, false).unwrap();
        assert_eq!(p.column(2), 0b111);
        assert_eq!(p.diversity(0), 1);
        assert_eq!(p.diversity(1), 1);
        assert!(p.validate().is_empty());
        let oma = simple_beam_allocation(dims(3, 3), &order, true).unwrap();
        assert_eq!(oma.metrics().max_inner, 0);
    }

    #[test]
    fn simple_policy_k5_matches_reference_structure() {
        let order = [0, 1, 2, 3, 4];
        let p = simple_beam_allocation(dims(3, 5), &order, false).unwrap();
        let m = p.metrics();
        assert_eq!(m.diversity, vec![3, 2, 2, 1, 1]);
        assert_eq!(m.overlap, vec![3, 3, 3]);
        assert!(p.validate().is_empty());
    }

    #[test]
    fn simple_policy_k7_uses_every_column_once() {
        let order: Vec<usize> = (0..7).rev().collect();
        let p = simple_beam_allocation(dims(3, 7), &order, false).unwrap();
        let mut cols = p.columns().to_vec();
        cols.sort_unstable();
        assert_eq!(cols, (1..8).collect::<Vec<u64>>());
    }

    #[test]
    fn simple_policy_diversity_non_increasing_in_rank() {
        for k in 3..=7 {
            let order: Vec<usize> = (0..k).collect();
            let p = simple_beam_allocation(dims(3, k), &order, false).unwrap();
            let d: Vec<usize> = order.iter().map(|&u| p.diversity(u)).collect();
            assert!(d.windows(2).all(|w| w[0] >= w[1]), "K={k}: {d:?}");
            assert!(p.validate().is_empty(), "K={k}");
        }
    }

    #[test]
    fn simple_policy_rejects_bad_k() {
        let order: Vec<usize> = (0..8).collect();
        assert!(simple_beam_allocation(dims(3, 8), &order, false).is_err());
        assert!(simple_beam_allocation(dims(3, 2), &[0, 1], false).is_err());
    }

    #[test]
    fn optimized_k3_is_identity() {
        let r = optimize_beam_allocation(dims(3, 3)).unwrap();
        assert_eq!(r.pattern, Pattern::identity(3).unwrap());
        assert_eq!(r.objective, 0);
    }

    #[test]
    fn optimized_k5_objective_one() {
        let r = optimize_beam_allocation(dims(3, 5)).unwrap();
        assert_eq!(r.objective, 1);
        assert_eq!(r.pattern.metrics().max_inner, 1);
        assert!(r.pattern.validate().is_empty());
        // identity block first, then ascending diversity
        for i in 0..3 {
            assert_eq!(r.pattern.column(i), 1 << i);
        }
        assert!(r.pattern.diversity(3) <= r.pattern.diversity(4));
    }

    #[test]
    fn optimized_k7_objective_two() {
        let r = optimize_beam_allocation(dims(3, 7)).unwrap();
        assert_eq!(r.objective, 2);
        assert!(r.pattern.validate().is_empty());
    }

    #[test]
    fn optimized_never_worse_than_simple() {
        for k in 3..=7 {
            let order: Vec<usize> = (0..k).collect();
            let simple = simple_beam_allocation(dims(3, k), &order, false).unwrap();
            let opt = optimize_beam_allocation(dims(3, k)).unwrap();
            assert!(opt.objective <= simple.metrics().max_inner, "K={k}");
        }
    }

    #[test]
    fn search_too_large_is_reported() {
        let err = optimize_beam_allocation(dims(6, 40)).unwrap_err();
        assert!(matches!(err, PdmaError::SearchTooLarge { .. }));
    }

    #[test]
    fn assignment_gives_all_ones_to_weakest() {
        let order = [4, 3, 2, 1, 0]; // user 4 weakest
        let p = assign_columns_to_users(&three_by_five(), &order).unwrap();
        assert_eq!(p.column(4), 0b111);
        assert_eq!(p.diversity(0), 1);
        assert_eq!(p.diversity(1), 1);
    }

    #[test]
    fn assignment_identity_to_strongest() {
        let opt = optimize_beam_allocation(dims(3, 5)).unwrap().pattern;
        let order = [1, 3, 0, 4, 2];
        let p = assign_columns_to_users(&opt, &order).unwrap();
        for &u in &order[2..] {
            assert_eq!(p.diversity(u), 1);
        }
        // equal-diversity ties: lexicographic [b1,b2,b3] ascending -> e3 first
        assert_eq!(p.column(2), 0b100);
        assert_eq!(p.column(4), 0b010);
        assert_eq!(p.column(0), 0b001);
    }

    #[test]
    fn assignment_length_mismatch() {
        assert!(assign_columns_to_users(&three_by_five(), &[0, 1]).is_err());
        assert!(assign_columns_to_users(&three_by_five(), &[0, 1, 2, 3, 3]).is_err());
    }

    #[test]
    fn dot_export_edge_counts() {
        let count = |s: &str| s.matches(" -- ").count();
        let dot = factor_graph_dot(&three_by_five());
        assert_eq!(count(&dot), 9);
        assert_eq!(dot.matches("shape=box").count(), 1);
        assert_eq!((0..3).filter(|n| dot.contains(&format!("beam{};", n + 1))).count(), 3);
        assert_eq!((0..5).filter(|k| dot.contains(&format!("user{};", k + 1))).count(), 5);
        assert_eq!(count(&factor_graph_dot(&Pattern::identity(3).unwrap())), 3);
        let star = Pattern::from_columns(3, vec![0b111]).unwrap();
        let dot = factor_graph_dot(&star);
        assert_eq!(count(&dot), 3);
        assert!(dot.contains("beam3 -- user1"));
    }
}
