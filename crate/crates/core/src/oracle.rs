//! Brute-force censuses.
//!
//! Every count here comes from visiting each edge or each ordered vertex pair
//! once. Two distance routes exist, the overlap formula and breadth-first
//! search, and they are expected to agree exactly.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{self, Count};
use crate::words::{self, EnumerationCap, GraphParams, WordGraph, WordSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Rho,
    Sigma,
    Delta,
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumKind::Rho => "rho",
            SpectrumKind::Sigma => "sigma",
            SpectrumKind::Delta => "delta",
        })
    }
}

/// Exact counts indexed by `k = 1..=D`, zeros explicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum<T> {
    params: GraphParams,
    kind: SpectrumKind,
    counts: BTreeMap<usize, T>,
}

/// `Δ_k(d, D) = ρ_k(d, D) - ρ_k(d, D - 1)`, with `ρ_D(d, D - 1) := 0`.
pub type DeltaRow<T> = Spectrum<T>;

impl<T: Count> Spectrum<T> {
    /// Builds a spectrum from counts for `k = 1, 2, ...`; missing trailing
    /// indices up to `D` are zero.
    pub fn from_counts(params: GraphParams, kind: SpectrumKind, counts: Vec<T>) -> Result<Self> {
        let top = params.diameter();
        if counts.len() > top {
            return Err(Error::Domain(format!(
                "{} counts for a row with D = {top}",
                counts.len()
            )));
        }
        let mut map: BTreeMap<usize, T> = (1..=top).map(|k| (k, T::zero())).collect();
        for (i, c) in counts.into_iter().enumerate() {
            map.insert(i + 1, c);
        }
        Ok(Spectrum {
            params,
            kind,
            counts: map,
        })
    }

    pub fn params(&self) -> GraphParams {
        self.params
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn counts(&self) -> &BTreeMap<usize, T> {
        &self.counts
    }

    /// Count at `k`; zero outside `1..=D`.
    pub fn get(&self, k: usize) -> T {
        self.counts.get(&k).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, k: usize, value: T) -> Result<()> {
        match self.counts.get_mut(&k) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(Error::Domain(format!(
                "index k = {k} outside 1..={}",
                self.params.diameter()
            ))),
        }
    }

    pub fn total(&self) -> Result<T> {
        num::sum(self.counts.values())
    }

    pub fn to_decimal_map(&self) -> BTreeMap<usize, String> {
        self.counts
            .iter()
            .map(|(k, v)| (*k, v.to_string()))
            .collect()
    }
}

/// How census work is split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Index ranges of `chunk` items are processed by the rayon pool and
    /// merged in index order.
    Parallel {
        chunk: usize,
    },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { chunk: 4096 }
    }
}

fn merge(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

fn chunked<F>(len: usize, width: usize, exec: Execution, work: F) -> Vec<u64>
where
    F: Fn(std::ops::Range<usize>) -> Vec<u64> + Sync,
{
    match exec {
        Execution::Sequential => work(0..len),
        Execution::Parallel { chunk } => {
            let chunk = chunk.max(1);
            let ranges: Vec<_> = (0..len)
                .step_by(chunk)
                .map(|s| s..(s + chunk).min(len))
                .collect();
            let parts: Vec<Vec<u64>> = ranges.into_par_iter().map(&work).collect();
            parts.into_iter().fold(vec![0; width], merge)
        }
    }
}

fn to_spectrum<T: Count>(
    params: GraphParams,
    kind: SpectrumKind,
    raw: &[u64],
) -> Result<Spectrum<T>> {
    let counts = raw[1..]
        .iter()
        .map(|&c| num::from_u64(c))
        .collect::<Result<Vec<T>>>()?;
    Spectrum::from_counts(params, kind, counts)
}

/// `ρ_k`: number of edges whose shortest cycle has length `k + 1`.
pub fn rho_census<T: Count>(params: &GraphParams, cap: &EnumerationCap) -> Result<Spectrum<T>> {
    rho_census_with(params, cap, Execution::default())
}

pub fn rho_census_with<T: Count>(
    params: &GraphParams,
    cap: &EnumerationCap,
    exec: Execution,
) -> Result<Spectrum<T>> {
    params.check_edges(cap)?;
    let m = params.word_len();
    // Edges of the row are exactly the vertex words of the next row.
    let images = WordSpace::new(params.next_row());
    let raw = chunked(images.len(), m + 1, exec, |range| {
        let mut counts = vec![0u64; m + 1];
        let mut buf = vec![0u8; m + 1];
        for i in range {
            images.unrank_into(i, &mut buf);
            counts[words::image_cycle_index(&buf)] += 1;
        }
        counts
    });
    to_spectrum(*params, SpectrumKind::Rho, &raw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMethod {
    Overlap,
    Bfs,
}

/// `σ_k`: number of ordered pairs of distinct vertices at distance `k`.
pub fn sigma_census<T: Count>(
    params: &GraphParams,
    method: DistanceMethod,
    cap: &EnumerationCap,
) -> Result<Spectrum<T>> {
    sigma_census_with(params, method, cap, Execution::default())
}

pub fn sigma_census_with<T: Count>(
    params: &GraphParams,
    method: DistanceMethod,
    cap: &EnumerationCap,
    exec: Execution,
) -> Result<Spectrum<T>> {
    params.check_edges(cap)?;
    params.check_pairs(cap)?;
    let m = params.word_len();
    let raw = match method {
        DistanceMethod::Overlap => {
            let space = WordSpace::new(*params);
            let n = space.len();
            let mut flat = vec![0u8; n * m];
            for (i, slot) in flat.chunks_mut(m).enumerate() {
                space.unrank_into(i, slot);
            }
            let flat = &flat;
            chunked(n, m + 1, exec, |range| {
                let mut counts = vec![0u64; m + 1];
                for u in range {
                    let uw = &flat[u * m..(u + 1) * m];
                    for (v, vw) in flat.chunks(m).enumerate() {
                        if u != v {
                            counts[m - words::overlap_len(uw, vw)] += 1;
                        }
                    }
                }
                counts
            })
        }
        DistanceMethod::Bfs => {
            let graph = WordGraph::build(params, cap)?;
            let graph = &graph;
            chunked(graph.vertex_count(), m + 1, exec, |range| {
                let mut counts = vec![0u64; m + 1];
                let mut dist = vec![u32::MAX; graph.vertex_count()];
                let mut queue = VecDeque::new();
                for src in range {
                    bfs_into(graph, src, &mut dist, &mut queue);
                    for (v, &dv) in dist.iter().enumerate() {
                        if v != src {
                            // The diameter is m, so every vertex is reached.
                            counts[dv as usize] += 1;
                        }
                    }
                }
                counts
            })
        }
    };
    to_spectrum(*params, SpectrumKind::Sigma, &raw)
}

fn bfs_into(graph: &WordGraph, src: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) {
    dist.fill(u32::MAX);
    dist[src] = 0;
    queue.clear();
    queue.push_back(src);
    while let Some(x) = queue.pop_front() {
        let next = dist[x] + 1;
        for &y in graph.successors(x) {
            let y = y as usize;
            if dist[y] == u32::MAX {
                dist[y] = next;
                queue.push_back(y);
            }
        }
    }
}

/// Single-source BFS distances; `u32::MAX` marks unreachable vertices.
pub fn bfs_distances(graph: &WordGraph, src: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; graph.vertex_count()];
    bfs_into(graph, src, &mut dist, &mut VecDeque::new());
    dist
}

/// Pointwise difference of two consecutive `ρ` rows.
pub fn delta_from_rows<T: Count>(
    current: &Spectrum<T>,
    previous: Option<&Spectrum<T>>,
) -> Result<DeltaRow<T>> {
    let params = current.params();
    let mut counts = Vec::with_capacity(params.diameter());
    for k in 1..=params.diameter() {
        let now = current.get(k);
        let before = match previous {
            Some(prev) if k < params.diameter() => prev.get(k),
            _ => T::zero(),
        };
        let diff = num::sub(&now, &before).ok_or_else(|| {
            Error::NegativeResult(format!(
                "ρ_{k} fell from {before} to {now} at D = {}",
                params.diameter()
            ))
        })?;
        counts.push(diff);
    }
    Spectrum::from_counts(params, SpectrumKind::Delta, counts)
}

/// `Δ_k(d, D)` for `k = 1..=D` by two censuses. For `D = 1` the row is the
/// `ρ` row itself.
pub fn delta_census<T: Count>(
    d: u32,
    diameter: usize,
    cap: &EnumerationCap,
) -> Result<DeltaRow<T>> {
    let params = GraphParams::new(d, diameter)?;
    let current = rho_census::<T>(&params, cap)?;
    let previous = match diameter {
        1 => None,
        _ => Some(rho_census::<T>(&GraphParams::new(d, diameter - 1)?, cap)?),
    };
    delta_from_rows(&current, previous.as_ref())
}

/// First index of the window in which new shortest cycles appear at row `D`.
pub fn window_start(diameter: usize) -> usize {
    diameter / 2 + 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `Σ_k ρ_k = |E|`.
    EdgePartition,
    /// `Σ_k σ_k = |V| (|V| - 1)`.
    PairPartition,
    /// Overlap distances agree with BFS distances.
    DistanceOracles,
    /// `σ_{k+1}(D + 1) = d² σ_k(D) - ρ_k(D)`.
    SigmaRecursion,
    /// `ρ_k(D) ≥ ρ_k(D - 1)` for `k ≤ D - 1`.
    Persistence,
    /// `Δ_k(D) = 0` for `k < ⌊D/2⌋ + 2`, `k ≤ D - 1`.
    VanishingWindow,
    /// `Δ_k(D) > 0` for `⌊D/2⌋ + 2 ≤ k ≤ D - 1`.
    Positivity,
    /// Top `ρ_D` from the partition closure equals the necklace closed form.
    NecklaceTop,
    /// `ρ_k(D) = ρ_k(D - 1) + Δ_k(D)` for `k ≤ D - 1`.
    DeltaDecomposition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    AtLeast,
    Exceeds,
}

/// One checked cell. `expected` and `actual` are decimal strings; `actual`
/// must stand in `relation` to `expected`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub identity: Identity,
    pub d: u32,
    #[serde(rename = "D")]
    pub row: usize,
    pub k: Option<usize>,
    pub relation: Relation,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

impl IdentityRecord {
    pub fn compare<T: Count>(
        identity: Identity,
        d: u32,
        row: usize,
        k: Option<usize>,
        relation: Relation,
        expected: &T,
        actual: &T,
    ) -> Self {
        let pass = match relation {
            Relation::Equal => actual == expected,
            Relation::AtLeast => actual >= expected,
            Relation::Exceeds => actual > expected,
        };
        IdentityRecord {
            identity,
            d,
            row,
            k,
            relation,
            expected: expected.to_string(),
            actual: actual.to_string(),
            pass,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub records: Vec<IdentityRecord>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn of(&self, identity: Identity) -> impl Iterator<Item = &IdentityRecord> {
        self.records.iter().filter(move |r| r.identity == identity)
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Census rows `D = 1..=d_max` and every identity that relates them.
pub fn verify_identities(d: u32, d_max: usize, cap: &EnumerationCap) -> Result<IdentityReport> {
    type N = num_bigint::BigUint;
    let mut rho: Vec<Spectrum<N>> = Vec::new();
    let mut sigma: Vec<Spectrum<N>> = Vec::new();
    let mut report = IdentityReport::default();
    let dd: N = num::from_u64(u64::from(d) * u64::from(d))?;

    for row in 1..=d_max {
        let params = GraphParams::new(d, row)?;
        let r = rho_census::<N>(&params, cap)?;
        let s = sigma_census::<N>(&params, DistanceMethod::Overlap, cap)?;
        let s_bfs = sigma_census::<N>(&params, DistanceMethod::Bfs, cap)?;

        report.records.push(IdentityRecord::compare(
            Identity::EdgePartition,
            d,
            row,
            None,
            Relation::Equal,
            &params.edge_count::<N>()?,
            &r.total()?,
        ));
        report.records.push(IdentityRecord::compare(
            Identity::PairPartition,
            d,
            row,
            None,
            Relation::Equal,
            &params.ordered_pair_count::<N>()?,
            &s.total()?,
        ));
        for k in 1..=row {
            report.records.push(IdentityRecord::compare(
                Identity::DistanceOracles,
                d,
                row,
                Some(k),
                Relation::Equal,
                &s_bfs.get(k),
                &s.get(k),
            ));
        }

        if let (Some(prev_r), Some(prev_s)) = (rho.last(), sigma.last()) {
            // σ_{k+1}(row) against d² σ_k(row - 1) - ρ_k(row - 1); compared
            // as σ_{k+1} + ρ_k = d² σ_k so that no subtraction can underflow.
            for k in 1..row {
                let lhs = num::add(&s.get(k + 1), &prev_r.get(k))?;
                let rhs = num::mul(&dd, &prev_s.get(k))?;
                let expected = num::sub(&rhs, &prev_r.get(k))
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "negative".into());
                report.records.push(IdentityRecord {
                    identity: Identity::SigmaRecursion,
                    d,
                    row,
                    k: Some(k + 1),
                    relation: Relation::Equal,
                    expected,
                    actual: s.get(k + 1).to_string(),
                    pass: lhs == rhs,
                });
            }
            let delta = delta_from_rows(&r, Some(prev_r));
            for k in 1..row {
                report.records.push(IdentityRecord::compare(
                    Identity::Persistence,
                    d,
                    row,
                    Some(k),
                    Relation::AtLeast,
                    &prev_r.get(k),
                    &r.get(k),
                ));
            }
            if let Ok(delta) = delta {
                for k in 1..row {
                    let relation = if k < window_start(row) {
                        (Identity::VanishingWindow, Relation::Equal)
                    } else {
                        (Identity::Positivity, Relation::Exceeds)
                    };
                    report.records.push(IdentityRecord::compare(
                        relation.0,
                        d,
                        row,
                        Some(k),
                        relation.1,
                        &N::from(0u32),
                        &delta.get(k),
                    ));
                }
            }
        }
        rho.push(r);
        sigma.push(s);
    }
    Ok(report)
}
