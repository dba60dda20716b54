use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact distance and shortest-cycle spectra of Kautz digraphs.
#[derive(Debug, Parser)]
#[command(name = "kautz", version)]
pub struct Cli {
    /// Lift every enumeration cap (edges, vertex pairs, words).
    #[arg(long, global = true)]
    pub override_cap: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ρ or σ for one row.
    Spectrum(SpectrumArgs),
    /// Δ_k(D) = ρ_k(D) − ρ_k(D−1) for one row.
    Delta(DeltaArgs),
    /// Full ρ/σ/Δ tables with per-cell provenance (JSON).
    Tables(TablesArgs),
    /// Check every identity over rows 1..=D-max, or over a tables document.
    Verify(VerifyArgs),
    /// Primitive proper necklaces of length n over q symbols.
    Necklace(NecklaceArgs),
    /// Evaluate every mask schedule against the oracle and freeze the result.
    Calibrate(CalibrateArgs),
    /// Search 0/1 mask families that reproduce the oracle Δ rows.
    SearchMasks(SearchMasksArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Rho,
    Sigma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpectrumMethod {
    Oracle,
    Recursion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DeltaMethod {
    Oracle,
    Transfer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NecklaceMethod {
    Formula,
    Enumerate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long = "D")]
    pub diameter: usize,
    #[arg(long, value_enum, default_value = "rho")]
    pub kind: Kind,
    #[arg(long, value_enum, default_value = "oracle")]
    pub method: SpectrumMethod,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long = "D")]
    pub diameter: usize,
    #[arg(long, value_enum, default_value = "oracle")]
    pub method: DeltaMethod,
    /// Frozen schedule file written by `calibrate` (transfer method).
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Masks file: JSON object from offset to a 0/1 array (transfer method).
    #[arg(long)]
    pub masks: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long)]
    pub d: u32,
    /// First row; seeds the recursion.
    #[arg(long = "D-min", default_value_t = 3)]
    pub diameter_min: usize,
    #[arg(long = "D-max")]
    pub diameter_max: usize,
    #[arg(long, value_enum, default_value = "recursion")]
    pub method: SpectrumMethod,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, required_unless_present = "tables")]
    pub d: Option<u32>,
    #[arg(long = "D-max", required_unless_present = "tables")]
    pub diameter_max: Option<usize>,
    /// Cross-check a tables document instead of computing one.
    #[arg(long, conflicts_with_all = ["d", "diameter_max"])]
    pub tables: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NecklaceArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub q: u64,
    #[arg(long, value_enum, default_value = "formula")]
    pub method: NecklaceMethod,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long = "D-min", default_value_t = 2)]
    pub diameter_min: usize,
    #[arg(long = "D-max")]
    pub diameter_max: usize,
    /// Where the report / frozen schedule is written.
    #[arg(long, default_value = "schedule.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchMasksArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long = "D-min", default_value_t = 2)]
    pub diameter_min: usize,
    #[arg(long = "D-max")]
    pub diameter_max: usize,
    /// Frozen schedule file; the default reading is used without one.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Offsets 0..offsets are searched; the rest stay the identity.
    #[arg(long, default_value_t = 3)]
    pub offsets: usize,
    /// Maximum number of partial assignments tried.
    #[arg(long, default_value_t = 1 << 22)]
    pub budget: u64,
    /// Where a fitting masks file is written.
    #[arg(long, default_value = "masks.json")]
    pub out: PathBuf,
}
