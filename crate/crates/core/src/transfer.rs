//! Masked transfer-matrix evaluation of `Δ_k(d, D)`.
//!
//! States are ordered pairs `[l, r]` of distinct letters (the last two
//! letters of a word), `n = q (q - 1)` of them in lexicographic order. The
//! one-letter transfer matrix moves `[l, r]` to `[r, y]` for every `y != r`.
//! The masked product
//!
//! ```text
//! Δ_k = n · e^T ( Π_{j=1}^{k-1} S Λ(s_j) ) S (I - Λ(0)) 1
//! ```
//!
//! leaves several readings open (offset formula, traversal order, where the
//! mask sits, row labelling). [`MaskSchedule`] pins one reading down and
//! [`calibrate_schedule`] tests all of them against the census.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{self, Count};
use crate::oracle::{self, DeltaRow};
use crate::words::EnumerationCap;

/// `(D, k, per-start count, Δ_k(2, D))` reference values for `d = 2`.
pub const KNOWN_DELTAS_D2: [(usize, usize, u64, u64); 8] = [
    (10, 7, 2, 12),
    (10, 8, 6, 36),
    (10, 9, 27, 162),
    (11, 7, 1, 6),
    (11, 8, 3, 18),
    (11, 9, 16, 96),
    (11, 10, 64, 384),
    (15, 12, 60, 360),
];

/// A 0/1 diagonal matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<u8>", try_from = "Vec<u8>")]
pub struct Mask(Vec<bool>);

impl Mask {
    pub fn identity(n: usize) -> Self {
        Mask(vec![true; n])
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Parse(format!("mask entry {other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Mask)
    }

    /// Diagonal whose entry `i` is bit `i` of `bits`.
    pub fn from_word(bits: u32, n: usize) -> Self {
        Mask((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn entries(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Mask(self.0.iter().map(|b| !b).collect())
    }

    pub fn bits(&self) -> Vec<u8> {
        self.0.iter().map(|&b| u8::from(b)).collect()
    }

    fn apply<T: Count>(&self, v: &mut [T]) {
        for (x, &keep) in v.iter_mut().zip(&self.0) {
            if !keep {
                *x = T::zero();
            }
        }
    }
}

impl From<Mask> for Vec<u8> {
    fn from(m: Mask) -> Self {
        m.bits()
    }
}

impl TryFrom<Vec<u8>> for Mask {
    type Error = Error;
    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Mask::from_bits(&bits)
    }
}

/// Small dense square matrix over an exact scalar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Count> SquareMatrix<T> {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let data = (0..n * n).map(|i| f(i / n, i % n)).collect();
        SquareMatrix { n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diagonal(mask: &Mask) -> Self {
        Self::from_fn(mask.len(), |i, j| {
            if i == j && mask.0[i] {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = T::zero();
                for l in 0..n {
                    let a = self.get(i, l);
                    if a.is_zero() {
                        continue;
                    }
                    acc = num::add(&acc, &num::mul(a, other.get(l, j))?)?;
                }
                data.push(acc);
            }
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .try_fold(T::zero(), |acc, (a, x)| {
                        if a.is_zero() {
                            Ok(acc)
                        } else {
                            num::add(&acc, &num::mul(a, x)?)
                        }
                    })
            })
            .collect()
    }

    pub fn row_sums(&self) -> Result<Vec<T>> {
        (0..self.n).map(|i| num::sum(self.row(i))).collect()
    }

    pub fn column_sums(&self) -> Result<Vec<T>> {
        (0..self.n)
            .map(|j| num::sum((0..self.n).map(|i| self.get(i, j))))
            .collect()
    }
}

/// Terminal-pair states, the one-letter transfer matrix, and boundary masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferSystem<T> {
    q: u32,
    states: Vec<(u8, u8)>,
    transfer: SquareMatrix<T>,
    masks: BTreeMap<usize, Mask>,
}

/// The three nontrivial masks for `q = 3`, in state order
/// `[01], [02], [10], [12], [20], [21]`. Every other offset is the identity.
pub fn masks_d2() -> BTreeMap<usize, Mask> {
    let m = |bits: [u8; 6]| Mask::from_bits(&bits).expect("0/1 literal");
    BTreeMap::from([
        (0, m([0, 0, 1, 0, 1, 0])),
        (1, m([1, 0, 1, 1, 0, 1])),
        (2, m([1, 1, 0, 1, 0, 1])),
    ])
}

/// Lexicographically ordered pairs `[l, r]`, `l != r`, over `q` letters.
pub fn terminal_states(q: u32) -> Vec<(u8, u8)> {
    let q = q as u8;
    (0..q)
        .flat_map(|l| (0..q).filter(move |&r| r != l).map(move |r| (l, r)))
        .collect()
}

/// Builds the system for alphabet size `q`; for `q = 3` the fixed masks are
/// installed, otherwise the system has no masks until [`TransferSystem::with_masks`].
pub fn build_transfer<T: Count>(q: u32) -> Result<TransferSystem<T>> {
    if q < 3 {
        return Err(Error::Domain(format!("q must be ≥ 3 (got {q})")));
    }
    if q > 255 {
        return Err(Error::Domain(format!("q must be ≤ 255 (got {q})")));
    }
    let states = terminal_states(q);
    let transfer = SquareMatrix::from_fn(states.len(), |i, j| {
        let (_, r) = states[i];
        let (x, y) = states[j];
        if x == r && y != r {
            T::one()
        } else {
            T::zero()
        }
    });
    let masks = if q == 3 { masks_d2() } else { BTreeMap::new() };
    Ok(TransferSystem {
        q,
        states,
        transfer,
        masks,
    })
}

impl<T: Count> TransferSystem<T> {
    pub fn q(&self) -> u32 {
        self.q
    }

    /// `n = q (q - 1)`.
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[(u8, u8)] {
        &self.states
    }

    pub fn transfer(&self) -> &SquareMatrix<T> {
        &self.transfer
    }

    pub fn masks(&self) -> &BTreeMap<usize, Mask> {
        &self.masks
    }

    pub fn has_masks(&self) -> bool {
        self.masks.contains_key(&0)
    }

    /// Replaces the masks. Offsets not present are the identity; offset 0
    /// is required.
    pub fn with_masks(mut self, masks: BTreeMap<usize, Mask>) -> Result<Self> {
        if let Some((s, m)) = masks.iter().find(|(_, m)| m.len() != self.states.len()) {
            return Err(Error::Domain(format!(
                "mask at offset {s} has {} entries, expected {}",
                m.len(),
                self.states.len()
            )));
        }
        if !masks.contains_key(&0) {
            return Err(Error::Domain("a mask at offset 0 is required".into()));
        }
        self.masks = masks;
        Ok(self)
    }

    fn mask_at(&self, s: usize) -> Option<&Mask> {
        self.masks.get(&s)
    }

    fn apply_transfer(&self, v: &[T]) -> Result<Vec<T>> {
        // Row [l, r] of S has ones exactly at the states [r, y], y != r.
        self.transfer.mul_vec(v)
    }

    /// The masked product `P` under `schedule`; its row sums are the
    /// per-start counts.
    pub fn product(
        &self,
        schedule: &MaskSchedule,
        diameter: usize,
        k: usize,
    ) -> Result<SquareMatrix<T>> {
        self.check_args(diameter, k)?;
        let n = self.state_count();
        let mut acc = SquareMatrix::identity(n);
        for s in schedule.offsets(diameter, k) {
            let mask = self
                .mask_at(s)
                .cloned()
                .unwrap_or_else(|| Mask::identity(n));
            let lam = SquareMatrix::diagonal(&mask);
            let step = match schedule.placement {
                Placement::MaskAfterTransfer => self.transfer.mul(&lam)?,
                Placement::MaskBeforeTransfer => lam.mul(&self.transfer)?,
            };
            acc = acc.mul(&step)?;
        }
        let closing = SquareMatrix::diagonal(&self.required_mask(0)?.complement());
        acc.mul(&self.transfer)?.mul(&closing)
    }

    fn required_mask(&self, s: usize) -> Result<&Mask> {
        self.mask_at(s).ok_or(Error::MasksUndefined(self.q))
    }

    fn check_args(&self, diameter: usize, k: usize) -> Result<()> {
        if !self.has_masks() {
            return Err(Error::MasksUndefined(self.q));
        }
        if k < 1 || k > diameter {
            return Err(Error::Domain(format!(
                "need 1 ≤ k ≤ D (got k = {k}, D = {diameter})"
            )));
        }
        Ok(())
    }

    /// `P 1` computed right to left, one factor at a time.
    fn per_start(&self, schedule: &MaskSchedule, diameter: usize, k: usize) -> Result<Vec<T>> {
        self.check_args(diameter, k)?;
        let n = self.state_count();
        let mut v = vec![T::one(); n];
        self.required_mask(0)?.complement().apply(&mut v);
        v = self.apply_transfer(&v)?;
        for s in schedule.offsets(diameter, k).into_iter().rev() {
            let mask = self.mask_at(s);
            match schedule.placement {
                Placement::MaskAfterTransfer => {
                    if let Some(m) = mask {
                        m.apply(&mut v);
                    }
                    v = self.apply_transfer(&v)?;
                }
                Placement::MaskBeforeTransfer => {
                    v = self.apply_transfer(&v)?;
                    if let Some(m) = mask {
                        m.apply(&mut v);
                    }
                }
            }
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetFormula {
    /// `s_j = (D - 1) - k + j`
    BoundaryMinusOne,
    /// `s_j = D - k + j`
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    /// Factors for `j = 1, ..., k - 1` from left to right.
    AsWritten,
    Reversed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Factor `S Λ(s_j)`.
    MaskAfterTransfer,
    /// Factor `Λ(s_j) S`.
    MaskBeforeTransfer,
}

/// One reading of the masked product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MaskSchedule {
    pub offset_formula: OffsetFormula,
    pub order: Order,
    pub placement: Placement,
    /// Added to the canonical `D` before evaluating the offset formula.
    pub row_offset: u8,
}

impl Default for MaskSchedule {
    /// Offsets `D - k + j`, factors `S Λ` left to right, canonical rows.
    fn default() -> Self {
        MaskSchedule {
            offset_formula: OffsetFormula::Boundary,
            order: Order::AsWritten,
            placement: Placement::MaskAfterTransfer,
            row_offset: 0,
        }
    }
}

impl MaskSchedule {
    /// All sixteen readings, in a fixed order.
    pub fn candidates() -> Vec<MaskSchedule> {
        let mut out = Vec::with_capacity(16);
        for offset_formula in [OffsetFormula::BoundaryMinusOne, OffsetFormula::Boundary] {
            for order in [Order::AsWritten, Order::Reversed] {
                for placement in [Placement::MaskAfterTransfer, Placement::MaskBeforeTransfer] {
                    for row_offset in [0, 1] {
                        out.push(MaskSchedule {
                            offset_formula,
                            order,
                            placement,
                            row_offset,
                        });
                    }
                }
            }
        }
        out
    }

    /// Mask offsets of the `k - 1` inner factors, in product order.
    pub fn offsets(&self, diameter: usize, k: usize) -> Vec<usize> {
        let row = diameter + usize::from(self.row_offset);
        // j ≥ 1 and k ≤ row keep both formulas non-negative.
        let mut s: Vec<usize> = match self.offset_formula {
            OffsetFormula::BoundaryMinusOne => (1..k).map(|j| row + j - 1 - k).collect(),
            OffsetFormula::Boundary => (1..k).map(|j| row + j - k).collect(),
        };
        if self.order == Order::Reversed {
            s.reverse();
        }
        s
    }

    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MaskSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let formula = match self.offset_formula {
            OffsetFormula::BoundaryMinusOne => "s=(D-1)-k+j",
            OffsetFormula::Boundary => "s=D-k+j",
        };
        let order = match self.order {
            Order::AsWritten => "as-written",
            Order::Reversed => "reversed",
        };
        let placement = match self.placement {
            Placement::MaskAfterTransfer => "mask-after",
            Placement::MaskBeforeTransfer => "mask-before",
        };
        write!(f, "{formula};{order};{placement};row+{}", self.row_offset)
    }
}

/// Per-start counts `e_i^T P 1` for every start state `i`.
pub fn per_start_counts<T: Count>(
    sys: &TransferSystem<T>,
    schedule: &MaskSchedule,
    d: u32,
    diameter: usize,
    k: usize,
) -> Result<Vec<T>> {
    check_degree(sys, d)?;
    sys.per_start(schedule, diameter, k)
}

/// `n · e^T P 1` with the canonical start state `[0, 1]`.
pub fn delta_by_transfer<T: Count>(
    sys: &TransferSystem<T>,
    schedule: &MaskSchedule,
    d: u32,
    diameter: usize,
    k: usize,
) -> Result<T> {
    let per_start = per_start_counts(sys, schedule, d, diameter, k)?;
    num::mul(&num::from_u64(sys.state_count() as u64)?, &per_start[0])
}

/// A full `Δ` row (`k = 1..=D`) from the transfer route.
pub fn delta_row_by_transfer<T: Count>(
    sys: &TransferSystem<T>,
    schedule: &MaskSchedule,
    d: u32,
    diameter: usize,
) -> Result<DeltaRow<T>> {
    let params = crate::words::GraphParams::new(d, diameter)?;
    let counts = (1..=diameter)
        .map(|k| delta_by_transfer(sys, schedule, d, diameter, k))
        .collect::<Result<Vec<T>>>()?;
    oracle::Spectrum::from_counts(params, oracle::SpectrumKind::Delta, counts)
}

fn check_degree<T: Count>(sys: &TransferSystem<T>, d: u32) -> Result<()> {
    if sys.q != d + 1 {
        return Err(Error::Domain(format!(
            "system has q = {}, but d = {d}",
            sys.q
        )));
    }
    Ok(())
}

/// Result of evaluating one candidate schedule over a row range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub descriptor: String,
    pub schedule: MaskSchedule,
    pub tested_range: [usize; 2],
    /// Cells `(D, k)` where the transfer value differs from the census.
    pub mismatches: usize,
    pub cells: usize,
    /// Cells where the per-start counts are not all equal.
    pub nonuniform_starts: usize,
    /// How many of [`KNOWN_DELTAS_D2`] this candidate reproduces (`d = 2`).
    pub known_values_matched: usize,
    pub chosen: bool,
}

/// Candidate-by-candidate calibration outcome; doubles as the frozen
/// schedule file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub d: u32,
    pub tested_range: [usize; 2],
    pub candidates: Vec<CandidateReport>,
}

impl CalibrationReport {
    pub fn matching(&self) -> impl Iterator<Item = &CandidateReport> {
        self.candidates.iter().filter(|c| c.mismatches == 0)
    }

    pub fn chosen(&self) -> Option<&CandidateReport> {
        self.candidates.iter().find(|c| c.chosen)
    }

    /// The unique matching schedule, or `NoMatch` / `Ambiguous`.
    pub fn resolve(&self) -> Result<MaskSchedule> {
        let matching: Vec<_> = self.matching().collect();
        match matching.as_slice() {
            [one] => Ok(one.schedule),
            [] => Err(Error::NoMatch(self.candidates.len())),
            many => Err(Error::Ambiguous(
                many.iter().map(|c| c.descriptor.clone()).collect(),
            )),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&serde_json::to_value(self)?)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Evaluates every candidate schedule against census `Δ` rows for
/// `D ∈ rows`, all `1 ≤ k ≤ D`.
pub fn calibrate_schedule(
    d: u32,
    rows: RangeInclusive<usize>,
    cap: &EnumerationCap,
) -> Result<CalibrationReport> {
    type N = num_bigint::BigUint;
    let sys = build_transfer::<N>(d + 1)?;
    let oracle_rows = rows
        .clone()
        .map(|row| oracle::delta_census::<N>(d, row, cap))
        .collect::<Result<Vec<_>>>()?;
    calibrate_against(&sys, d, &oracle_rows)
}

/// Calibration against precomputed `Δ` rows.
pub fn calibrate_against<T: Count>(
    sys: &TransferSystem<T>,
    d: u32,
    oracle_rows: &[DeltaRow<T>],
) -> Result<CalibrationReport> {
    check_degree(sys, d)?;
    if !sys.has_masks() {
        return Err(Error::MasksUndefined(sys.q));
    }
    let lo = oracle_rows
        .iter()
        .map(|r| r.params().diameter())
        .min()
        .unwrap_or(0);
    let hi = oracle_rows
        .iter()
        .map(|r| r.params().diameter())
        .max()
        .unwrap_or(0);
    let n: T = num::from_u64(sys.state_count() as u64)?;

    let mut candidates = Vec::new();
    for schedule in MaskSchedule::candidates() {
        let mut mismatches = 0;
        let mut cells = 0;
        let mut nonuniform_starts = 0;
        for row in oracle_rows {
            let diameter = row.params().diameter();
            for k in 1..=diameter {
                let starts = sys.per_start(&schedule, diameter, k)?;
                if starts.iter().any(|x| *x != starts[0]) {
                    nonuniform_starts += 1;
                }
                if num::mul(&n, &starts[0])? != row.get(k) {
                    mismatches += 1;
                }
                cells += 1;
            }
        }
        let known_values_matched = if d == 2 {
            KNOWN_DELTAS_D2
                .iter()
                .map(|&(row, k, _, expect)| {
                    let got = num::mul(&n, &sys.per_start(&schedule, row, k)?[0])?;
                    Ok(usize::from(got == num::from_u64::<T>(expect)?))
                })
                .sum::<Result<usize>>()?
        } else {
            0
        };
        candidates.push(CandidateReport {
            descriptor: schedule.descriptor(),
            schedule,
            tested_range: [lo, hi],
            mismatches,
            cells,
            nonuniform_starts,
            known_values_matched,
            chosen: false,
        });
    }
    let matching: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.mismatches == 0)
        .map(|(i, _)| i)
        .collect();
    if let [only] = matching.as_slice() {
        candidates[*only].chosen = true;
    }
    Ok(CalibrationReport {
        d,
        tested_range: [lo, hi],
        candidates,
    })
}

/// Outcome of an exhaustive mask search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskSearchReport {
    pub d: u32,
    pub tested_range: [usize; 2],
    pub schedule: MaskSchedule,
    /// Offsets `0..nontrivial_offsets` were searched; all others are fixed
    /// to the identity.
    pub nontrivial_offsets: usize,
    pub nodes: u64,
    /// Deepest offset for which some assignment survived every check.
    pub deepest_consistent_offset: Option<usize>,
    pub masks: Option<BTreeMap<usize, Mask>>,
}

impl MaskSearchReport {
    pub fn into_masks(self) -> Result<BTreeMap<usize, Mask>> {
        let detail = format!(
            "d = {}, D = {}..={}, schedule {}, {} searched offsets",
            self.d,
            self.tested_range[0],
            self.tested_range[1],
            self.schedule,
            self.nontrivial_offsets
        );
        self.masks.ok_or(Error::NoFit(detail))
    }
}

/// Largest `q (q - 1)` for which [`search_masks`] enumerates diagonals.
pub const MAX_SEARCH_STATES: usize = 20;

/// Exhaustive backtracking search for 0/1 diagonals at offsets
/// `0..nontrivial_offsets` reproducing the census `Δ` rows under `schedule`.
///
/// A cell `(D, k)` is checked as soon as every searched offset it uses has
/// been assigned, so inconsistent prefixes are cut early. `budget` bounds
/// the number of assignments tried.
pub fn search_masks(
    d: u32,
    oracle_rows: &[DeltaRow<num_bigint::BigUint>],
    schedule: &MaskSchedule,
    nontrivial_offsets: usize,
    budget: u64,
) -> Result<MaskSearchReport> {
    type N = num_bigint::BigUint;
    let base = build_transfer::<N>(d + 1)?;
    let n = base.state_count();
    if n > MAX_SEARCH_STATES {
        return Err(Error::Domain(format!(
            "mask search needs q (q - 1) ≤ {MAX_SEARCH_STATES} (got {n})"
        )));
    }
    if nontrivial_offsets == 0 {
        return Err(Error::Domain("at least offset 0 must be searched".into()));
    }
    let lo = oracle_rows
        .iter()
        .map(|r| r.params().diameter())
        .min()
        .unwrap_or(0);
    let hi = oracle_rows
        .iter()
        .map(|r| r.params().diameter())
        .max()
        .unwrap_or(0);

    // Bucket each cell by the largest searched offset it depends on.
    let mut buckets: Vec<Vec<(usize, usize, N)>> = vec![Vec::new(); nontrivial_offsets];
    for row in oracle_rows {
        let diameter = row.params().diameter();
        for k in 1..=diameter {
            let level = schedule
                .offsets(diameter, k)
                .into_iter()
                .filter(|&s| s < nontrivial_offsets)
                .max()
                .unwrap_or(0);
            buckets[level].push((diameter, k, row.get(k)));
        }
    }

    struct Search<'a> {
        sys: TransferSystem<N>,
        schedule: &'a MaskSchedule,
        buckets: Vec<Vec<(usize, usize, N)>>,
        n: usize,
        n_big: N,
        nodes: u64,
        budget: u64,
        deepest: Option<usize>,
    }

    impl Search<'_> {
        fn fits(&self, level: usize) -> Result<bool> {
            for (diameter, k, expect) in &self.buckets[level] {
                let starts = self.sys.per_start(self.schedule, *diameter, *k)?;
                if &(&self.n_big * &starts[0]) != expect {
                    return Ok(false);
                }
            }
            Ok(true)
        }

        fn run(&mut self, level: usize) -> Result<bool> {
            if level == self.buckets.len() {
                return Ok(true);
            }
            for bits in 0..(1u32 << self.n) {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(Error::SearchBudget(self.budget));
                }
                self.sys.masks.insert(level, Mask::from_word(bits, self.n));
                if self.fits(level)? {
                    self.deepest = Some(self.deepest.map_or(level, |x| x.max(level)));
                    if self.run(level + 1)? {
                        return Ok(true);
                    }
                }
            }
            self.sys.masks.remove(&level);
            Ok(false)
        }
    }

    let mut search = Search {
        sys: base.with_masks(BTreeMap::from([(0, Mask::identity(n))]))?,
        schedule,
        buckets,
        n,
        n_big: N::from(n),
        nodes: 0,
        budget,
        deepest: None,
    };
    let found = search.run(0)?;
    Ok(MaskSearchReport {
        d,
        tested_range: [lo, hi],
        schedule: *schedule,
        nontrivial_offsets,
        nodes: search.nodes,
        deepest_consistent_offset: search.deepest,
        masks: found.then(|| search.sys.masks.clone()),
    })
}
