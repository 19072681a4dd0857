//! `stdet`: determinant censuses of symmetric tridiagonal matrices over
//! finite chain rings, and checks of the closed-form counts against them.

mod output;
mod store;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use stdet_core::cache::{CensusCache, CensusStore};
use stdet_core::census::{census, zero_count_profile, Budget, CensusError, CensusOptions, Engine};
use stdet_core::formula::{
    self, FieldClass, FormulaError, FormulaName, FormulaVariant, IstMethod, RingUnitClass, ZeroCountProfile,
};
use stdet_core::ring::{Ring, RingError, RingKind, SquareClass};
use stdet_core::verify::{
    default_plan, discrepancy_ledger, reproduce_table1, run_suite, table1_csv, table1_markdown, CheckSpec,
};

use output::Format;
use store::FileStore;

const EXIT_MISMATCH: u8 = 2;
const EXIT_USAGE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "stdet", version, about = "Determinant censuses of symmetric tridiagonal matrices over finite chain rings")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Census cache directory
    #[arg(long, global = true, env = "STDET_CACHE_DIR", value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Neither read nor write the census cache
    #[arg(long, global = true)]
    no_cache: bool,
    /// Work limit replacing the default size caps: tuples for the naive
    /// engine, n·|R|^3 for the dynamic program
    #[arg(long, global = true, value_name = "N")]
    budget: Option<u128>,
    /// Worker threads (results never depend on this)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Ring structure: order, residue field, units, squares, uniformizer
    Ring { desc: String },
    /// Count matrices by determinant
    Census(CensusArgs),
    /// Evaluate a closed-form count
    Formula(FormulaArgs),
    /// Recompute the F_5 reference table and compare with the published values
    Table1 {
        #[arg(long, value_enum, default_value = "md")]
        format: TableFormat,
    },
    /// Run formula-versus-census checks
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum TableFormat {
    Csv,
    Md,
}

#[derive(Args)]
struct CensusArgs {
    desc: String,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value = "dp")]
    engine: Engine,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to a file instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Recompute and compare against the cached entry
    #[arg(long)]
    verify_cache: bool,
}

#[derive(Args)]
struct FormulaArgs {
    name: FormulaName,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, default_value_t = 1)]
    e: u32,
    #[arg(long)]
    n: u32,
    /// Layer index
    #[arg(long)]
    s: Option<u32>,
    /// Determinant class: zero|qr|nqr|unit (fields), qr|nqr|unit-even-q (rings)
    #[arg(long)]
    class: Option<String>,
    #[arg(long, default_value = "recurrence")]
    method: IstMethod,
    #[arg(long, default_value = "paper")]
    variant: FormulaVariant,
    /// Zero counts |ST_n(R/γ^t R, 0)| as t:value pairs
    #[arg(long, value_name = "T:V,...", conflicts_with = "ring")]
    zc: Option<String>,
    /// Take q, e and the zero counts from censuses of this ring
    #[arg(long, value_name = "DESC")]
    ring: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON array of checks; defaults to the built-in grid
    #[arg(long, value_name = "FILE")]
    plan: Option<PathBuf>,
    /// Formula variant (overrides the plan's when given)
    #[arg(long)]
    variant: Option<FormulaVariant>,
    /// Write the full JSON report here
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Errors that map to the usage exit code.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(CensusError::Budget { .. }) = cause.downcast_ref::<CensusError>() {
            return EXIT_BUDGET;
        }
        if cause.is::<Usage>() || cause.is::<RingError>() {
            return EXIT_USAGE;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let global = &cli.global;
    match &cli.command {
        Command::Ring { desc } => cmd_ring(desc),
        Command::Census(args) => cmd_census(global, args),
        Command::Formula(args) => cmd_formula(global, args),
        Command::Table1 { format } => cmd_table1(global, *format),
        Command::Verify(args) => cmd_verify(global, args),
    }
}

fn census_options(global: &Global) -> CensusOptions {
    CensusOptions {
        budget: global.budget.map(Budget::with_work_limit).unwrap_or_default(),
        threads: global.threads,
    }
}

fn file_store(global: &Global) -> Result<Option<FileStore>> {
    if global.no_cache {
        return Ok(None);
    }
    let Some(dir) = global.cache_dir.clone().or_else(store::default_cache_dir) else {
        return Ok(None);
    };
    let store = FileStore::open(dir.clone()).with_context(|| format!("opening cache directory {}", dir.display()))?;
    Ok(Some(store))
}

fn census_cache(global: &Global) -> Result<CensusCache> {
    let cache = CensusCache::new(census_options(global));
    Ok(match file_store(global)? {
        Some(store) => cache.with_store(Arc::new(store)),
        None => cache,
    })
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            let tmp = path.with_extension("partial");
            fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_ring(desc: &str) -> Result<u8> {
    let ring = Ring::parse(desc)?;
    let units = ring.unit_count();
    let squares = ring.units_of_class(SquareClass::QrUnit).len();
    println!("ring      {}", ring.descriptor());
    println!("|R|       {}", ring.size());
    println!("q         {}", ring.q());
    println!("e         {}", ring.e());
    println!("|U|       {units}");
    println!("|Q|       {squares}");
    println!("|N|       {}", ring.size() as u64 - units);
    println!("gamma     {}", ring.display(ring.gamma()));
    println!("modulus   {}", construction(&ring));
    Ok(0)
}

fn construction(ring: &Ring) -> String {
    let d = ring.descriptor();
    let (p, e, f) = (d.p(), d.e(), ring.modulus_string());
    match d.kind() {
        RingKind::PrimeField => format!("Z/{p}Z"),
        RingKind::ExtField => format!("F_{p}[x]/({f})"),
        RingKind::Modular => format!("Z/{}Z", ring.size()),
        RingKind::PolyChain if d.residue_degree() == 1 => format!("F_{p}[u]/(u^{e})"),
        RingKind::PolyChain => format!("F_{p}[x,u]/({f}, u^{e})"),
        RingKind::GaloisRing => format!("Z/{}Z[x]/({f})", p.pow(e)),
    }
}

fn cmd_census(global: &Global, args: &CensusArgs) -> Result<u8> {
    let ring = Ring::parse(&args.desc)?;
    let cache = census_cache(global)?;
    let cv = cache.get(&ring, args.n, args.engine)?;
    if args.verify_cache {
        let store = file_store(global)?.ok_or_else(|| usage("--verify-cache needs a cache directory"))?;
        let fresh = census(&ring, args.n, args.engine, &census_options(global))?;
        let stored = store.load(&ring.descriptor().to_string(), args.n, args.engine);
        match stored {
            Some(entry) if entry == fresh => eprintln!("cache entry verified"),
            Some(_) => {
                eprintln!("cache entry for {} n={} differs from a fresh computation", args.desc, args.n);
                return Ok(EXIT_MISMATCH);
            }
            None => {
                eprintln!("no readable cache entry for {} n={}", args.desc, args.n);
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    let text = output::render(&cv, &ring, args.format)?;
    write_output(args.out.as_deref(), &text)?;
    Ok(0)
}

fn parse_zc(text: &str, n: u32) -> Result<ZeroCountProfile> {
    let mut profile = ZeroCountProfile::new(String::new(), n);
    profile.set_provenance("given".into());
    for pair in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (t, v) = pair
            .split_once(':')
            .ok_or_else(|| usage(format!("--zc entry {pair:?} is not t:value")))?;
        let t = t.trim().parse().map_err(|_| usage(format!("bad layer index in {pair:?}")))?;
        let v = v.trim().parse().map_err(|_| usage(format!("bad count in {pair:?}")))?;
        profile.insert(t, v);
    }
    Ok(profile)
}

fn cmd_formula(global: &Global, args: &FormulaArgs) -> Result<u8> {
    let name = args.name;
    let ring = args.ring.as_deref().map(Ring::parse).transpose()?;
    let (q, e) = match (&ring, args.q) {
        (Some(r), _) => (r.q(), r.e()),
        (None, Some(q)) => (q, args.e),
        (None, None) => return Err(usage("give --q (and --e) or --ring")),
    };
    let n = args.n;
    let v = args.variant;
    let zc = || -> Result<ZeroCountProfile> {
        match (&ring, &args.zc) {
            (Some(r), _) => {
                let cache = census_cache(global)?;
                Ok(zero_count_profile(r, n, |qr| cache.get(qr, n, Engine::Dp))?)
            }
            (None, Some(text)) => parse_zc(text, n),
            (None, None) => Err(usage(format!("{name} needs zero counts: pass --zc t:v,... or --ring"))),
        }
    };
    let s = || args.s.ok_or_else(|| usage(format!("{name} needs --s")));
    let class = || args.class.as_deref().ok_or_else(|| usage(format!("{name} needs --class")));
    let field = || {
        if e == 1 {
            Ok(())
        } else {
            Err(usage(format!("{name} is a field formula; got e = {e}")))
        }
    };
    let value: std::result::Result<BigInt, FormulaError> = match name {
        FormulaName::IstField => {
            field()?;
            formula::ist_field(q, n, args.method)
        }
        FormulaName::StFieldZero => {
            field()?;
            formula::st_field_zero(q, n)
        }
        FormulaName::SField => {
            field()?;
            formula::s_field(q, n, v)
        }
        FormulaName::StFieldPrescribed => {
            field()?;
            let c: FieldClass = class()?.parse().map_err(usage)?;
            formula::st_field_prescribed(q, n, c, v)
        }
        FormulaName::IstRing => formula::ist_ring(q, e, n),
        FormulaName::SRing => formula::s_ring(q, e, n, v),
        FormulaName::StRingUnit => {
            let c: RingUnitClass = class()?.parse().map_err(usage)?;
            formula::st_ring_unit(q, e, n, c, v)
        }
        FormulaName::IdealLayer => formula::ideal_layer(q, e, n, s()?, &zc()?),
        FormulaName::PuncturedLayer => formula::punctured_layer(q, e, n, s()?, &zc()?),
        FormulaName::StRingGammaPower => formula::st_ring_gamma_power(q, e, n, s()?, &zc()?, v),
        FormulaName::StRingGammaPowerNonsquare => formula::st_ring_gamma_power_nonsquare(q, e, n, s()?, &zc()?, v),
        FormulaName::ZeroFiberIdentity => {
            let zc = zc()?;
            let ist = formula::ist_ring(q, e, n)?;
            formula::zero_fiber_identity(q, e, n, &zc, &ist)
        }
    };
    let info = name.info();
    match value {
        Ok(v) => {
            println!("{v}");
            println!("reference: {}", info.reference);
            println!("anchor:    {}", info.anchor);
            Ok(0)
        }
        // the formula itself fails: a finding, not a usage problem
        Err(
            err @ (FormulaError::NotDivisible { .. }
            | FormulaError::NonIntegral(_)
            | FormulaError::Inconsistent { .. }
            | FormulaError::ClaimWithdrawn { .. }),
        ) => {
            eprintln!("{name}: {err}");
            eprintln!("reference: {}", info.reference);
            Ok(EXIT_MISMATCH)
        }
        Err(err) => Err(usage(err.to_string())),
    }
}

fn cmd_table1(global: &Global, format: TableFormat) -> Result<u8> {
    let cache = census_cache(global)?;
    let table = reproduce_table1(&cache)?;
    match format {
        TableFormat::Csv => print!("{}", table1_csv(&table.rows)),
        TableFormat::Md => print!("{}", table1_markdown(&table.rows)),
    }
    println!("matched {}/{} published entries", table.matched, table.total);
    for m in &table.mismatches {
        println!("  n={} {}: published {} computed {}", m.n, m.column, m.published, m.computed);
    }
    Ok(if table.ok() { 0 } else { EXIT_MISMATCH })
}

fn cmd_verify(global: &Global, args: &VerifyArgs) -> Result<u8> {
    let mut plan: Vec<CheckSpec> = match &args.plan {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("plan {}: {e}", path.display())))?
        }
        None => default_plan(args.variant.unwrap_or_default()),
    };
    if let Some(variant) = args.variant {
        for spec in &mut plan {
            if spec.variant != variant {
                spec.variant = variant;
                // expectations were derived for the other variant
                spec.expected = None;
                spec.family = None;
                spec.witness = None;
            }
        }
    }
    if plan.is_empty() {
        bail!(usage("the plan has no checks"));
    }
    let cache = census_cache(global)?;
    let report = run_suite(&plan, &cache);
    let summary = &report.body.summary;
    if let Some(out) = &args.out {
        write_output(Some(out), &(report.to_json() + "\n"))?;
    }
    println!(
        "checks {}  pass {}  discrepant {}  withdrawn {}  error {}  unmet {}",
        summary.checks, summary.pass, summary.discrepant, summary.withdrawn, summary.error, summary.unmet
    );
    for finding in discrepancy_ledger(&report) {
        println!(
            "finding {} ({} checks): {}",
            finding.family,
            finding.checks.len(),
            finding.paper_ref
        );
        println!("  published: {}", finding.published_expression);
        if let Some(fix) = &finding.corrected_expression {
            println!("  corrected: {fix}");
        }
        let w = &finding.witness;
        println!("  witness:   {}  formula {}  census {}", w.id, w.formula_value, w.oracle_value);
    }
    let explored = &report.body.exploratory;
    if !explored.is_empty() {
        let differ: Vec<_> = explored.iter().filter(|c| !c.same_profile).collect();
        println!("exploratory: {} same-(q,e) ring comparisons, {} differ", explored.len(), differ.len());
        for c in differ {
            println!("  {} vs {} n={}: {}", c.left, c.right, c.n, c.detail);
        }
    }
    for c in report.body.checks.iter().filter(|c| !c.met) {
        println!(
            "unmet {}: {} (expected {}) formula {} census {}{}",
            c.id,
            c.classification,
            c.expected,
            c.formula_value,
            c.oracle_value,
            c.detail.as_deref().map(|d| format!(" [{d}]")).unwrap_or_default()
        );
    }
    Ok(if summary.ok() { 0 } else { EXIT_MISMATCH })
}
