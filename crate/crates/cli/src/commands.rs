use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use kautz_core::necklace::{enumerate_primitive_colorings, primitive_count_formula, NecklaceCount};
use kautz_core::oracle::{self, DistanceMethod, SpectrumKind};
use kautz_core::tables::{cross_check, DeltaSource, TopCheck};
use kautz_core::transfer::{self, CalibrationReport, Mask, MaskSchedule};
use kautz_core::{
    BigCount, EnumerationCap, Error, GraphParams, Spectrum, TableSet, TransferSystem,
};

use crate::args::*;
use crate::doc::{
    self, Meta, NecklaceDocument, NecklaceMeta, SpectrumDocument, TablesDocument, VerifyDocument,
};
use crate::error::{CliError, ExitStatus};

/// What a command produced: text for stdout, the exit status, and an
/// optional diagnostic for stderr.
#[derive(Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub status: ExitStatus,
    pub message: Option<String>,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            status: ExitStatus::Pass,
            message: None,
        }
    }
}

impl From<CliError> for Outcome {
    fn from(e: CliError) -> Self {
        Outcome {
            stdout: String::new(),
            status: e.status,
            message: Some(e.message),
        }
    }
}

/// Enumeration caps: the defaults, `KAUTZ_EDGE_CAP` for the edge cap, or
/// none at all with `--override-cap`.
pub fn caps(edge_cap_env: Option<&str>, override_cap: bool) -> Result<EnumerationCap, CliError> {
    if override_cap {
        return Ok(EnumerationCap::unlimited());
    }
    let cap = EnumerationCap::default();
    match edge_cap_env {
        None => Ok(cap),
        Some(text) => text
            .trim()
            .parse::<u128>()
            .map(|edges| cap.with_edges(edges))
            .map_err(|_| {
                CliError::usage(format!(
                    "KAUTZ_EDGE_CAP must be a non-negative integer (got {text:?})"
                ))
            }),
    }
}

pub fn run(command: &Command, cap: &EnumerationCap) -> Outcome {
    let result = match command {
        Command::Spectrum(a) => spectrum(a, cap),
        Command::Delta(a) => delta(a, cap),
        Command::Tables(a) => tables(a, cap),
        Command::Verify(a) => verify(a, cap),
        Command::Necklace(a) => necklace(a, cap),
        Command::Calibrate(a) => calibrate(a, cap),
        Command::SearchMasks(a) => search_masks(a, cap),
    };
    result.unwrap_or_else(Outcome::from)
}

fn render(spectrum: &Spectrum, doc: &SpectrumDocument, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => doc::to_json(doc),
        Format::Csv => doc::to_csv(&doc::csv_records(spectrum)),
    }
}

/// Seeds from a census row (at most `D = 3`) and grows by recursion.
fn recursion_table(
    d: u32,
    from: usize,
    to: usize,
    cap: &EnumerationCap,
) -> Result<TableSet, CliError> {
    let seed = TableSet::census(d, from..=from, cap)?;
    Ok(seed.extend(to, &DeltaSource::Oracle(*cap), TopCheck::Record)?)
}

fn spectrum(a: &SpectrumArgs, cap: &EnumerationCap) -> Result<Outcome, CliError> {
    let params = GraphParams::new(a.d, a.diameter)?;
    let (spectrum, method) = match a.method {
        SpectrumMethod::Oracle => {
            let s = match a.kind {
                Kind::Rho => oracle::rho_census(&params, cap)?,
                Kind::Sigma => oracle::sigma_census(&params, DistanceMethod::Bfs, cap)?,
            };
            (s, "oracle")
        }
        SpectrumMethod::Recursion => {
            let set = recursion_table(a.d, a.diameter.min(3), a.diameter, cap)?;
            let row = set.row(a.diameter).expect("row was just built");
            let s = match a.kind {
                Kind::Rho => row.rho.clone(),
                Kind::Sigma => row.sigma.clone(),
            };
            (s, "recursion")
        }
    };
    let doc = SpectrumDocument::new(Meta::row(a.d, a.diameter, method), &spectrum);
    Ok(Outcome::ok(render(&spectrum, &doc, a.format)?))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a sibling temporary file so readers never see a partial
/// document.
fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, text)
        .and_then(|()| std::fs::rename(&tmp, path))
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

/// The chosen schedule of a calibration report.
fn load_schedule(path: &Path, d: u32) -> Result<MaskSchedule, CliError> {
    let report = CalibrationReport::from_json(&read(path)?)
        .map_err(|e| CliError::usage(format!("{} is not a schedule file: {e}", path.display())))?;
    if report.d != d {
        return Err(CliError::usage(format!(
            "{} was calibrated for d = {}, not d = {d}",
            path.display(),
            report.d
        )));
    }
    report.chosen().map(|c| c.schedule).ok_or_else(|| {
        CliError::new(
            ExitStatus::MissingCalibration,
            format!(
                "{} has no chosen schedule: calibration over D = {}..={} did not single one out",
                path.display(),
                report.tested_range[0],
                report.tested_range[1]
            ),
        )
    })
}

fn require_schedule(path: Option<&Path>, d: u32) -> Result<MaskSchedule, CliError> {
    match path {
        Some(p) => load_schedule(p, d),
        None => Err(CliError::new(
            ExitStatus::MissingCalibration,
            "the transfer method needs a frozen schedule: run `kautz calibrate` and pass --schedule",
        )),
    }
}

fn transfer_system(d: u32, masks: Option<&Path>) -> Result<TransferSystem, CliError> {
    let sys = transfer::build_transfer::<BigCount>(d + 1)?;
    match masks {
        None => Ok(sys),
        Some(path) => {
            let masks: BTreeMap<usize, Mask> = doc::from_json(&read(path)?)?;
            Ok(sys.with_masks(masks)?)
        }
    }
}

fn delta(a: &DeltaArgs, cap: &EnumerationCap) -> Result<Outcome, CliError> {
    let params = GraphParams::new(a.d, a.diameter)?;
    let (row, meta, per_start) = match a.method {
        DeltaMethod::Oracle => {
            let row = oracle::delta_census(a.d, a.diameter, cap)?;
            (row, Meta::row(a.d, a.diameter, "oracle"), None)
        }
        DeltaMethod::Transfer => {
            let schedule = require_schedule(a.schedule.as_deref(), a.d)?;
            let sys = transfer_system(a.d, a.masks.as_deref())?;
            let mut counts = Vec::with_capacity(a.diameter);
            let mut starts = BTreeMap::new();
            for k in 1..=a.diameter {
                let v = transfer::per_start_counts(&sys, &schedule, a.d, a.diameter, k)?;
                counts.push(BigCount::from(v.len()) * &v[0]);
                starts.insert(k, v.iter().map(ToString::to_string).collect());
            }
            let row = Spectrum::from_counts(params, SpectrumKind::Delta, counts)?;
            let meta = Meta {
                schedule: Some(schedule.descriptor()),
                ..Meta::row(a.d, a.diameter, "transfer")
            };
            (row, meta, Some(starts))
        }
    };
    let doc = SpectrumDocument {
        per_start,
        ..SpectrumDocument::new(meta, &row)
    };
    Ok(Outcome::ok(render(&row, &doc, a.format)?))
}

fn tables(a: &TablesArgs, cap: &EnumerationCap) -> Result<Outcome, CliError> {
    if a.diameter_min == 0 || a.diameter_min > a.diameter_max {
        return Err(CliError::usage("need 1 ≤ D-min ≤ D-max"));
    }
    let (set, method) = match a.method {
        SpectrumMethod::Oracle => (
            TableSet::census(a.d, a.diameter_min..=a.diameter_max, cap)?,
            "oracle",
        ),
        SpectrumMethod::Recursion => (
            recursion_table(a.d, a.diameter_min, a.diameter_max, cap)?,
            "recursion",
        ),
    };
    let doc = TablesDocument::new(
        Meta::range(a.d, a.diameter_min, a.diameter_max, method),
        &set,
    );
    Ok(Outcome::ok(doc::to_json(&doc)?))
}

fn verify(a: &VerifyArgs, cap: &EnumerationCap) -> Result<Outcome, CliError> {
    let (meta, report) = match (&a.tables, a.d, a.diameter_max) {
        (Some(path), _, _) => {
            let loaded: TablesDocument = doc::from_json(&read(path)?)?;
            let set = loaded.table_set()?;
            let meta = Meta {
                method: "cross-check".into(),
                ..loaded.meta
            };
            (meta, cross_check(&set)?)
        }
        (None, Some(d), Some(d_max)) => {
            if d_max == 0 {
                return Err(CliError::usage("D-max must be ≥ 1"));
            }
            let mut report = oracle::verify_identities(d, d_max, cap)?;
            let census = TableSet::census(d, 1..=d_max, cap)?;
            report.records.extend(cross_check(&census)?.records);
            (Meta::range(d, 1, d_max, "oracle"), report)
        }
        _ => return Err(CliError::usage("verify needs --d and --D-max, or --tables")),
    };
    let failures: Vec<_> = report.blocking_failures().cloned().collect();
    let advisory: Vec<_> = report
        .failures()
        .filter(|r| r.identity.is_advisory())
        .cloned()
        .collect();
    let doc = VerifyDocument {
        meta,
        pass: failures.is_empty(),
        checked: report.records.len(),
        failures,
        advisory,
    };
    let stdout = doc::to_json(&doc)?;
    if doc.pass {
        return Ok(Outcome::ok(stdout));
    }
    let mut message = format!("{} of {} checks failed:", doc.failures.len(), doc.checked);
    for r in &doc.failures {
        let k = r.k.map(|k| format!(" k={k}")).unwrap_or_default();
        let _ = write!(
            message,
            "\n  {:?} D={}{k}: expected {}, got {}",
            r.identity, r.row, r.expected, r.actual
        );
    }
    Ok(Outcome {
        stdout,
        status: ExitStatus::IdentityFailure,
        message: Some(message),
    })
}

fn necklace(a: &NecklaceArgs, cap: &EnumerationCap) -> Result<Outcome, CliError> {
    let (count, method): (BigCount, _) = match a.method {
        NecklaceMethod::Formula => {
            let count = primitive_count_formula(a.n, a.q).map_err(|e| match e {
                Error::NotApplicable(_) => CliError::usage(format!(
                    "the formula does not apply for n = {} ≤ 2; use --method enumerate",
                    a.n
                )),
                other => other.into(),
            })?;
            (count, "formula")
        }
        NecklaceMethod::Enumerate => {
            let q = u8::try_from(a.q).ok().filter(|&q| q >= 2).ok_or_else(|| {
                CliError::usage(format!("enumeration needs 2 ≤ q ≤ 255 (got {})", a.q))
            })?;
            let n = usize::try_from(a.n).map_err(|_| CliError::usage("n is too large"))?;
            (
                enumerate_primitive_colorings(n, q, cap)?.into(),
                "enumerate",
            )
        }
    };
    let result = NecklaceCount::new(a.n, a.q, count)?;
    let doc = NecklaceDocument {
        meta: NecklaceMeta {
            n: a.n,
            q: a.q,
            method: method.into(),
            version: doc::VERSION.into(),
        },
        primitive_count: result.primitive_count.to_string(),
        oriented_edge_count: result.oriented_edge_count.to_string(),
    };
    Ok(Outcome::ok(doc::to_json(&doc)?))
}

fn check_range(lo: usize, hi: usize) -> Result<(), CliError> {
    if lo < 2 || lo > hi {
        return Err(CliError::usage(format!(
            "need 2 ≤ D-min ≤ D-max (got {lo}..={hi})"
        )));
    }
    Ok(())
}

fn calibrate(a: &CalibrateArgs, cap: &EnumerationCap) -> Result<Outcome, CliError> {
    check_range(a.diameter_min, a.diameter_max)?;
    let report = transfer::calibrate_schedule(a.d, a.diameter_min..=a.diameter_max, cap)?;
    write_atomic(&a.out, &report.to_json()?)?;

    let mut table =
        String::from("candidate\tmismatches\tnonuniform_starts\treference_values\tchosen\n");
    for c in &report.candidates {
        let _ = writeln!(
            table,
            "{}\t{}/{}\t{}\t{}/{}\t{}",
            c.descriptor,
            c.mismatches,
            c.cells,
            c.nonuniform_starts,
            c.known_values_matched,
            transfer::KNOWN_DELTAS_D2.len(),
            if c.chosen { "yes" } else { "no" }
        );
    }
    match report.resolve() {
        Ok(_) => Ok(Outcome::ok(table)),
        Err(e) => Ok(Outcome {
            stdout: table,
            status: ExitStatus::CalibrationFailure,
            message: Some(format!("{e}; report written to {}", a.out.display())),
        }),
    }
}

fn search_masks(a: &SearchMasksArgs, cap: &EnumerationCap) -> Result<Outcome, CliError> {
    check_range(a.diameter_min, a.diameter_max)?;
    let schedule = match &a.schedule {
        Some(path) => load_schedule(path, a.d)?,
        None => MaskSchedule::default(),
    };
    let rows = (a.diameter_min..=a.diameter_max)
        .map(|row| oracle::delta_census::<BigCount>(a.d, row, cap))
        .collect::<Result<Vec<_>, _>>()?;
    let report = transfer::search_masks(a.d, &rows, &schedule, a.offsets, a.budget)?;
    let summary = doc::to_json(&report)?;
    match report.into_masks() {
        Ok(masks) => {
            write_atomic(&a.out, &doc::to_json(&masks)?)?;
            Ok(Outcome::ok(summary))
        }
        Err(e) => Ok(Outcome {
            stdout: summary,
            status: ExitStatus::CalibrationFailure,
            message: Some(CliError::from(e).message),
        }),
    }
}
