//! Row-by-row propagation of `ρ`, `σ` and `Δ` tables.
//!
//! Starting from one census row, each new row `D` is assembled from the
//! previous one: `ρ_k(D) = ρ_k(D-1) + Δ_k(D)` below the top, the top `ρ_D`
//! from the edge partition, and `σ` from `σ_{k+1}(D) = d² σ_k(D-1) - ρ_k(D-1)`
//! with `σ_1(D) = |E|`. Only the window cells of `Δ` need an external source.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::necklace;
use crate::num::{self, Count};
use crate::oracle::{
    self, window_start, DeltaRow, DistanceMethod, Identity, IdentityRecord, IdentityReport,
    Relation, Spectrum, SpectrumKind,
};
use crate::transfer::{self, MaskSchedule, TransferSystem};
use crate::words::{EnumerationCap, GraphParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Oracle,
    Transfer,
    Recursion,
    ClosedForm,
    Closure,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Oracle => "oracle",
            Provenance::Transfer => "transfer",
            Provenance::Recursion => "recursion",
            Provenance::ClosedForm => "closed_form",
            Provenance::Closure => "closure",
        })
    }
}

/// `d² σ_k - ρ_k`.
pub fn sigma_step<T: Count>(sigma_k: &T, rho_k: &T, d: u32) -> Result<T> {
    let dd: T = num::from_u64(u64::from(d) * u64::from(d))?;
    let scaled = num::mul(&dd, sigma_k)?;
    num::sub(&scaled, rho_k)
        .ok_or_else(|| Error::NegativeResult(format!("ρ_k = {rho_k} exceeds d² σ_k = {scaled}")))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row<T> {
    pub rho: Spectrum<T>,
    pub sigma: Spectrum<T>,
    pub delta: DeltaRow<T>,
}

/// Where the window cells of `Δ` come from during [`TableSet::extend`].
#[derive(Clone, Debug)]
pub enum DeltaSource<T> {
    Oracle(EnumerationCap),
    Transfer {
        system: TransferSystem<T>,
        schedule: MaskSchedule,
    },
}

/// What to do when the closure top value disagrees with the necklace
/// closed form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TopCheck {
    /// Halt with [`Error::Consistency`].
    Strict,
    /// Keep the closure value and note the disagreement on the row.
    #[default]
    Record,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSet<T> {
    d: u32,
    rows: BTreeMap<usize, Row<T>>,
    provenance: BTreeMap<(usize, usize, SpectrumKind), Provenance>,
    notes: BTreeMap<usize, Vec<String>>,
}

impl<T: Count> TableSet<T> {
    pub fn empty(d: u32) -> Self {
        TableSet {
            d,
            rows: BTreeMap::new(),
            provenance: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }

    /// Every cell of every row by direct census. `σ` uses BFS.
    pub fn census(d: u32, rows: RangeInclusive<usize>, cap: &EnumerationCap) -> Result<Self> {
        Self::census_with(d, rows, DistanceMethod::Bfs, cap)
    }

    pub fn census_with(
        d: u32,
        rows: RangeInclusive<usize>,
        method: DistanceMethod,
        cap: &EnumerationCap,
    ) -> Result<Self> {
        let mut set = Self::empty(d);
        let mut previous: Option<Spectrum<T>> = match *rows.start() {
            0 | 1 => None,
            first => Some(oracle::rho_census(&GraphParams::new(d, first - 1)?, cap)?),
        };
        for row in rows {
            let params = GraphParams::new(d, row)?;
            let rho = oracle::rho_census::<T>(&params, cap)?;
            let sigma = oracle::sigma_census::<T>(&params, method, cap)?;
            let delta = oracle::delta_from_rows(&rho, previous.as_ref())?;
            for k in 1..=row {
                for kind in [SpectrumKind::Rho, SpectrumKind::Sigma, SpectrumKind::Delta] {
                    set.provenance.insert((row, k, kind), Provenance::Oracle);
                }
            }
            previous = Some(rho.clone());
            set.rows.insert(row, Row { rho, sigma, delta });
        }
        Ok(set)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn rows(&self) -> &BTreeMap<usize, Row<T>> {
        &self.rows
    }

    pub fn row(&self, diameter: usize) -> Option<&Row<T>> {
        self.rows.get(&diameter)
    }

    pub fn provenance(&self, diameter: usize, k: usize, kind: SpectrumKind) -> Option<Provenance> {
        self.provenance.get(&(diameter, k, kind)).copied()
    }

    pub fn notes(&self, diameter: usize) -> &[String] {
        self.notes.get(&diameter).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Cell-for-cell equality of the counts, ignoring provenance.
    pub fn same_cells(&self, other: &Self) -> bool {
        self.d == other.d && self.rows == other.rows
    }

    /// Mutable access for perturbation experiments.
    pub fn row_mut(&mut self, diameter: usize) -> Option<&mut Row<T>> {
        self.rows.get_mut(&diameter)
    }

    /// Inserts (or replaces) a row loaded from elsewhere, tagging cell
    /// `(k, kind)` with `provenance(k, kind)`. Only shape is checked; use
    /// [`cross_check`] for the identities.
    pub fn insert_row(
        &mut self,
        row: Row<T>,
        provenance: impl Fn(usize, SpectrumKind) -> Provenance,
    ) -> Result<()> {
        let params = row.rho.params();
        let diameter = params.diameter();
        for (spectrum, kind) in [
            (&row.rho, SpectrumKind::Rho),
            (&row.sigma, SpectrumKind::Sigma),
            (&row.delta, SpectrumKind::Delta),
        ] {
            if spectrum.params() != params || spectrum.kind() != kind || params.d() != self.d {
                return Err(Error::Domain(format!(
                    "row {diameter}: {kind} spectrum does not belong to K({}, {diameter})",
                    self.d
                )));
            }
            for k in 1..=diameter {
                self.provenance
                    .insert((diameter, k, kind), provenance(k, kind));
            }
        }
        self.rows.insert(diameter, row);
        Ok(())
    }

    pub fn push_note(&mut self, diameter: usize, note: String) {
        self.notes.entry(diameter).or_default().push(note);
    }

    /// Appends rows up to `to_row`, one at a time from the last row present.
    pub fn extend(&self, to_row: usize, source: &DeltaSource<T>, check: TopCheck) -> Result<Self> {
        let mut set = self.clone();
        let last = *set
            .rows
            .keys()
            .next_back()
            .ok_or_else(|| Error::Domain("cannot extend an empty table".into()))?;
        for row in last + 1..=to_row {
            set.push_row(row, source, check)?;
        }
        Ok(set)
    }

    fn push_row(&mut self, row: usize, source: &DeltaSource<T>, check: TopCheck) -> Result<()> {
        let d = self.d;
        let params = GraphParams::new(d, row)?;
        let prev = self
            .rows
            .get(&(row - 1))
            .ok_or_else(|| Error::Domain(format!("row {} missing", row - 1)))?;

        let window = window_start(row);
        let (sourced, tag): (Option<Vec<T>>, Provenance) = match source {
            DeltaSource::Oracle(cap) => {
                let delta = oracle::delta_census::<T>(d, row, cap)?;
                (
                    Some((1..row).map(|k| delta.get(k)).collect()),
                    Provenance::Oracle,
                )
            }
            DeltaSource::Transfer { system, schedule } => {
                let cells = (1..row)
                    .map(|k| {
                        if k < window {
                            Ok(T::zero())
                        } else {
                            transfer::delta_by_transfer(system, schedule, d, row, k)
                        }
                    })
                    .collect::<Result<Vec<T>>>()?;
                (Some(cells), Provenance::Transfer)
            }
        };

        let mut delta = Vec::with_capacity(row);
        let mut rho = Vec::with_capacity(row);
        let mut marks = Vec::new();
        for k in 1..row {
            let (dk, tag) = if k < window {
                (T::zero(), Provenance::Recursion)
            } else {
                (
                    sourced.as_ref().expect("window cells sourced")[k - 1].clone(),
                    tag,
                )
            };
            marks.push(((row, k, SpectrumKind::Delta), tag));
            marks.push(((row, k, SpectrumKind::Rho), Provenance::Recursion));
            rho.push(num::add(&prev.rho.get(k), &dk)?);
            delta.push(dk);
        }

        let edges: T = params.edge_count()?;
        let below = num::sum(&rho)?;
        let top = num::sub(&edges, &below).ok_or_else(|| {
            Error::NegativeResult(format!(
                "rows below the top already hold {below} edges, more than |E| = {edges} at D = {row}"
            ))
        })?;
        if row >= 2 {
            let closed: T = necklace::rho_top_closed_form(d, row)?;
            if closed != top {
                match check {
                    TopCheck::Strict => {
                        return Err(Error::Consistency {
                            row,
                            closure: top.to_string(),
                            closed_form: closed.to_string(),
                        })
                    }
                    TopCheck::Record => self.notes.entry(row).or_default().push(format!(
                        "top ρ_{row}: closure {top}, necklace closed form {closed}"
                    )),
                }
            }
        }
        marks.push(((row, row, SpectrumKind::Rho), Provenance::Closure));
        marks.push(((row, row, SpectrumKind::Delta), Provenance::Closure));
        rho.push(top.clone());
        delta.push(top);

        let mut sigma = Vec::with_capacity(row);
        sigma.push(edges);
        marks.push(((row, 1, SpectrumKind::Sigma), Provenance::ClosedForm));
        for k in 1..row {
            sigma.push(sigma_step(&prev.sigma.get(k), &prev.rho.get(k), d)?);
            marks.push(((row, k + 1, SpectrumKind::Sigma), Provenance::Recursion));
        }

        let new_row = Row {
            rho: Spectrum::from_counts(params, SpectrumKind::Rho, rho)?,
            sigma: Spectrum::from_counts(params, SpectrumKind::Sigma, sigma)?,
            delta: Spectrum::from_counts(params, SpectrumKind::Delta, delta)?,
        };
        self.rows.insert(row, new_row);
        self.provenance.extend(marks);
        Ok(())
    }
}

impl Identity {
    /// Advisory identities are reported but do not decide pass/fail of a
    /// verification run.
    pub fn is_advisory(&self) -> bool {
        matches!(self, Identity::NecklaceTop)
    }
}

impl IdentityReport {
    pub fn blocking_failures(&self) -> impl Iterator<Item = &IdentityRecord> {
        self.failures().filter(|r| !r.identity.is_advisory())
    }

    pub fn passes_blocking(&self) -> bool {
        self.blocking_failures().next().is_none()
    }
}

/// Evaluates every table invariant, cell by cell.
pub fn cross_check<T: Count>(tables: &TableSet<T>) -> Result<IdentityReport> {
    let d = tables.d;
    let dd: T = num::from_u64(u64::from(d) * u64::from(d))?;
    let zero = T::zero();
    let mut report = IdentityReport::default();
    for (&row, cells) in &tables.rows {
        let params = GraphParams::new(d, row)?;
        report.records.push(IdentityRecord::compare(
            Identity::EdgePartition,
            d,
            row,
            None,
            Relation::Equal,
            &params.edge_count::<T>()?,
            &cells.rho.total()?,
        ));
        report.records.push(IdentityRecord::compare(
            Identity::PairPartition,
            d,
            row,
            None,
            Relation::Equal,
            &params.ordered_pair_count::<T>()?,
            &cells.sigma.total()?,
        ));
        if row >= 2 {
            report.records.push(IdentityRecord::compare(
                Identity::NecklaceTop,
                d,
                row,
                Some(row),
                Relation::Equal,
                &necklace::rho_top_closed_form::<T>(d, row)?,
                &cells.rho.get(row),
            ));
        }
        let Some(prev) = tables.rows.get(&(row - 1)) else {
            continue;
        };
        for k in 1..row {
            report.records.push(IdentityRecord::compare(
                Identity::DeltaDecomposition,
                d,
                row,
                Some(k),
                Relation::Equal,
                &num::add(&prev.rho.get(k), &cells.delta.get(k))?,
                &cells.rho.get(k),
            ));
            report.records.push(IdentityRecord::compare(
                Identity::Persistence,
                d,
                row,
                Some(k),
                Relation::AtLeast,
                &prev.rho.get(k),
                &cells.rho.get(k),
            ));
            let (identity, relation) = if k < window_start(row) {
                (Identity::VanishingWindow, Relation::Equal)
            } else {
                (Identity::Positivity, Relation::Exceeds)
            };
            report.records.push(IdentityRecord::compare(
                identity,
                d,
                row,
                Some(k),
                relation,
                &zero,
                &cells.delta.get(k),
            ));
            // σ_{k+1} + ρ_k = d² σ_k keeps the comparison in unsigned arithmetic.
            let lhs = num::add(&cells.sigma.get(k + 1), &prev.rho.get(k))?;
            let rhs = num::mul(&dd, &prev.sigma.get(k))?;
            report.records.push(IdentityRecord {
                identity: Identity::SigmaRecursion,
                d,
                row,
                k: Some(k + 1),
                relation: Relation::Equal,
                expected: num::sub(&rhs, &prev.rho.get(k))
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "negative".into()),
                actual: cells.sigma.get(k + 1).to_string(),
                pass: lhs == rhs,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cap() -> EnumerationCap {
        EnumerationCap::default()
    }

    #[test]
    fn sigma_step_examples() {
        assert_eq!(sigma_step(&12u64, &6, 2).unwrap(), 42);
        assert_eq!(sigma_step(&0u64, &0, 2).unwrap(), 0);
        assert_eq!(sigma_step(&24u64, &6, 2).unwrap(), 90);
        assert!(matches!(
            sigma_step(&1u64, &5, 2),
            Err(Error::NegativeResult(_))
        ));
    }

    #[test]
    fn extend_one_row_with_oracle_delta() {
        let base = TableSet::<u64>::census(2, 2..=2, &cap()).unwrap();
        let ext = base
            .extend(3, &DeltaSource::Oracle(cap()), TopCheck::Strict)
            .unwrap();
        let row = ext.row(3).unwrap();
        assert_eq!(
            row.rho.counts().values().copied().collect::<Vec<_>>(),
            [6, 6, 12]
        );
        assert_eq!(
            row.sigma.counts().values().copied().collect::<Vec<_>>(),
            [24, 42, 66]
        );
        assert_eq!(
            row.delta.counts().values().copied().collect::<Vec<_>>(),
            [0, 0, 12]
        );
        assert_eq!(
            ext.provenance(3, 3, SpectrumKind::Rho),
            Some(Provenance::Closure)
        );
        assert_eq!(
            ext.provenance(3, 1, SpectrumKind::Delta),
            Some(Provenance::Recursion)
        );
        assert_eq!(
            ext.provenance(3, 1, SpectrumKind::Sigma),
            Some(Provenance::ClosedForm)
        );
        assert_eq!(
            ext.provenance(3, 2, SpectrumKind::Sigma),
            Some(Provenance::Recursion)
        );
        assert_eq!(
            ext.provenance(2, 1, SpectrumKind::Rho),
            Some(Provenance::Oracle)
        );
        assert!(ext.same_cells(&TableSet::census(2, 2..=3, &cap()).unwrap()));
    }

    #[test]
    fn strict_top_check_halts_where_closed_form_disagrees() {
        let base = TableSet::<u64>::census(2, 3..=3, &cap()).unwrap();
        match base.extend(4, &DeltaSource::Oracle(cap()), TopCheck::Strict) {
            Err(Error::Consistency {
                row: 4,
                closure,
                closed_form,
            }) => {
                assert_eq!(closure, "24");
                assert_eq!(closed_form, "30");
            }
            other => panic!("expected a consistency error, got {other:?}"),
        }
        let ext = base
            .extend(4, &DeltaSource::Oracle(cap()), TopCheck::Record)
            .unwrap();
        assert_eq!(ext.notes(4).len(), 1);
        assert_eq!(ext.row(4).unwrap().rho.get(4), 24);
    }

    #[test]
    fn extending_empty_table_fails() {
        assert!(TableSet::<u64>::empty(2)
            .extend(3, &DeltaSource::Oracle(cap()), TopCheck::Record)
            .is_err());
    }

    #[test]
    fn cross_check_empty_table() {
        assert!(cross_check(&TableSet::<u64>::empty(2)).unwrap().is_empty());
    }

    #[test]
    fn cross_check_flags_exactly_the_perturbed_identities() {
        let mut set = TableSet::<u64>::census(2, 2..=6, &cap()).unwrap();
        let before: Vec<_> = cross_check(&set).unwrap().failures().cloned().collect();
        assert!(before.iter().all(|r| r.identity == Identity::NecklaceTop));

        let row = set.row_mut(4).unwrap();
        let v = row.rho.get(2);
        row.rho.set(2, v + 1).unwrap();
        let after = cross_check(&set).unwrap();
        let mut new: Vec<_> = after
            .blocking_failures()
            .map(|r| (r.identity, r.row, r.k))
            .collect();
        new.sort();
        let mut expect = vec![
            (Identity::EdgePartition, 4, None),
            (Identity::DeltaDecomposition, 4, Some(2)),
            (Identity::DeltaDecomposition, 5, Some(2)),
            (Identity::Persistence, 5, Some(2)),
            (Identity::SigmaRecursion, 5, Some(3)),
        ];
        expect.sort();
        assert_eq!(new, expect);
    }
}
