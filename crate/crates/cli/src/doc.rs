//! Output documents: JSON with sorted keys and decimal-string counts, and
//! the flat `d,D,k,kind,count` CSV.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use kautz_core::oracle::{IdentityRecord, SpectrumKind};
use kautz_core::tables::{Provenance, Row};
use kautz_core::{BigCount, GraphParams, Spectrum, TableSet};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// How canonical rows map to word lengths.
pub const CONVENTION: &str = "vertex words of length D, edge words of length D+1";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Serializes through `serde_json::Value`, whose maps are ordered, so the
/// bytes depend only on the content.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(&serde_json::to_value(value)?)?;
    text.push('\n');
    Ok(text)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub d: u32,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<usize>,
    #[serde(rename = "D_range", default, skip_serializing_if = "Option::is_none")]
    pub diameter_range: Option<[usize; 2]>,
    pub method: String,
    pub convention: String,
    pub schedule: Option<String>,
    pub version: String,
}

impl Meta {
    pub fn row(d: u32, diameter: usize, method: &str) -> Self {
        Meta {
            d,
            diameter: Some(diameter),
            diameter_range: None,
            method: method.into(),
            convention: CONVENTION.into(),
            schedule: None,
            version: VERSION.into(),
        }
    }

    pub fn range(d: u32, lo: usize, hi: usize, method: &str) -> Self {
        Meta {
            diameter: None,
            diameter_range: Some([lo, hi]),
            ..Meta::row(d, 0, method)
        }
    }
}

type Counts = BTreeMap<usize, String>;

fn decimal_map(spectrum: &Spectrum) -> Counts {
    spectrum.to_decimal_map()
}

fn parse_spectrum(
    d: u32,
    diameter: usize,
    kind: SpectrumKind,
    counts: &Counts,
) -> Result<Spectrum, CliError> {
    let params = GraphParams::new(d, diameter)?;
    if counts.keys().copied().ne(1..=diameter) {
        return Err(CliError::usage(format!(
            "{kind} row D = {diameter} must list every k = 1..={diameter}"
        )));
    }
    let values = counts
        .values()
        .map(|c| {
            c.parse::<BigCount>()
                .map_err(|_| CliError::usage(format!("count {c:?} is not a decimal integer")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Spectrum::from_counts(params, kind, values)?)
}

/// One spectrum row; `Δ` rows from the transfer route also carry the
/// per-start vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumDocument {
    pub meta: Meta,
    pub kind: SpectrumKind,
    pub counts: Counts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_start: Option<BTreeMap<usize, Vec<String>>>,
}

impl SpectrumDocument {
    pub fn new(meta: Meta, spectrum: &Spectrum) -> Self {
        SpectrumDocument {
            meta,
            kind: spectrum.kind(),
            counts: decimal_map(spectrum),
            per_start: None,
        }
    }

    pub fn spectrum(&self) -> Result<Spectrum, CliError> {
        let diameter = self
            .meta
            .diameter
            .ok_or_else(|| CliError::usage("spectrum document without meta.D"))?;
        parse_spectrum(self.meta.d, diameter, self.kind, &self.counts)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRowDocument {
    pub rho: Counts,
    pub sigma: Counts,
    pub delta: Counts,
    pub provenance: BTreeMap<SpectrumKind, BTreeMap<usize, Provenance>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A full table: every row's `ρ`, `σ`, `Δ` with per-cell provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TablesDocument {
    pub meta: Meta,
    pub rows: BTreeMap<usize, TableRowDocument>,
}

impl TablesDocument {
    pub fn new(meta: Meta, set: &TableSet) -> Self {
        let rows = set
            .rows()
            .iter()
            .map(|(&diameter, row)| {
                let provenance = [SpectrumKind::Rho, SpectrumKind::Sigma, SpectrumKind::Delta]
                    .into_iter()
                    .map(|kind| {
                        let tags = (1..=diameter)
                            .filter_map(|k| set.provenance(diameter, k, kind).map(|p| (k, p)))
                            .collect();
                        (kind, tags)
                    })
                    .collect();
                let doc = TableRowDocument {
                    rho: decimal_map(&row.rho),
                    sigma: decimal_map(&row.sigma),
                    delta: decimal_map(&row.delta),
                    provenance,
                    notes: set.notes(diameter).to_vec(),
                };
                (diameter, doc)
            })
            .collect();
        TablesDocument { meta, rows }
    }

    pub fn table_set(&self) -> Result<TableSet, CliError> {
        let d = self.meta.d;
        let mut set = TableSet::empty(d);
        for (&diameter, doc) in &self.rows {
            let row = Row {
                rho: parse_spectrum(d, diameter, SpectrumKind::Rho, &doc.rho)?,
                sigma: parse_spectrum(d, diameter, SpectrumKind::Sigma, &doc.sigma)?,
                delta: parse_spectrum(d, diameter, SpectrumKind::Delta, &doc.delta)?,
            };
            set.insert_row(row, |k, kind| {
                doc.provenance
                    .get(&kind)
                    .and_then(|tags| tags.get(&k))
                    .copied()
                    .unwrap_or(Provenance::Oracle)
            })?;
            for note in &doc.notes {
                set.push_note(diameter, note.clone());
            }
        }
        Ok(set)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecklaceMeta {
    pub n: u64,
    pub q: u64,
    pub method: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecklaceDocument {
    pub meta: NecklaceMeta,
    pub primitive_count: String,
    pub oriented_edge_count: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub meta: Meta,
    pub pass: bool,
    pub checked: usize,
    /// Failing checks that decide the exit status.
    pub failures: Vec<IdentityRecord>,
    /// Failing checks that are reported only.
    pub advisory: Vec<IdentityRecord>,
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub d: u32,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub k: usize,
    pub kind: SpectrumKind,
    pub count: String,
}

pub fn csv_records(spectrum: &Spectrum) -> Vec<CsvRecord> {
    let params = spectrum.params();
    spectrum
        .counts()
        .iter()
        .map(|(&k, count)| CsvRecord {
            d: params.d(),
            diameter: params.diameter(),
            k,
            kind: spectrum.kind(),
            count: count.to_string(),
        })
        .collect()
}

pub fn write_csv<W: Write>(records: &[CsvRecord], out: W) -> Result<(), CliError> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer.write_record(["d", "D", "k", "kind", "count"])?;
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn to_csv(records: &[CsvRecord]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    String::from_utf8(buf).map_err(CliError::usage)
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRecord>, CliError> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != ["d", "D", "k", "kind", "count"] {
        return Err(CliError::usage(format!("unexpected CSV header {header:?}")));
    }
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

/// Groups CSV records back into spectra, one per `(d, D, kind)`.
pub fn spectra_from_csv(records: &[CsvRecord]) -> Result<Vec<Spectrum>, CliError> {
    let mut groups: BTreeMap<(u32, usize, SpectrumKind), Counts> = BTreeMap::new();
    for r in records {
        let slot = groups.entry((r.d, r.diameter, r.kind)).or_default();
        if slot.insert(r.k, r.count.clone()).is_some() {
            return Err(CliError::usage(format!(
                "duplicate CSV cell d={} D={} k={}",
                r.d, r.diameter, r.k
            )));
        }
    }
    groups
        .iter()
        .map(|(&(d, diameter, kind), counts)| parse_spectrum(d, diameter, kind, counts))
        .collect()
}
