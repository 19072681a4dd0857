//! Formula-versus-census checks over a grid of rings, the `F_5` reference
//! table, and a ledger of the discrepancies found.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use crate::cache::CensusCache;
use crate::census::{
    character_sum, check_invariants, layer_histogram, par_map, residue_multiples, unit_and_zero_totals,
    zero_count_profile, CensusError, CountVector, Engine,
};
use crate::formula::{
    self, chi_minus_one, gamma_power_withdrawn, FieldClass, FormulaError, FormulaName, FormulaVariant,
    IstMethod, RingUnitClass, ZeroCountProfile,
};
use crate::ring::{Ring, RingDescriptor, RingElement, SquareClass};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Classification {
    Pass,
    Discrepant,
    Withdrawn,
    Error,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Pass => "PASS",
            Classification::Discrepant => "DISCREPANT",
            Classification::Withdrawn => "WITHDRAWN",
            Classification::Error => "ERROR",
        })
    }
}

/// Structural properties every census must have, independent of any formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    /// `Σ counts = |R|^(2n-1)`.
    CensusTotal,
    /// `counts[a] = counts[r^2 a]` for units `r`; the observed value is the
    /// number of violating pairs.
    Conjugation,
    /// Odd `n`: one count shared by all units; the observed value is the
    /// number of distinct unit counts.
    OddUniformity,
    /// `S_n = q^2(q-1)χ(-1) S_{n-2}` with both sides taken from censuses.
    CharacterRecurrence,
}

impl Invariant {
    fn name(self) -> &'static str {
        match self {
            Invariant::CensusTotal => "census_total",
            Invariant::Conjugation => "conjugation",
            Invariant::OddUniformity => "odd_uniformity",
            Invariant::CharacterRecurrence => "character_recurrence",
        }
    }

    fn reference(self) -> (&'static str, &'static str) {
        match self {
            Invariant::CensusTotal => ("size of ST_n(R)", "|ST_n(R)| = |R|^(2n-1)"),
            Invariant::Conjugation => (
                "conjugation by Diag(1, ..., 1, r)",
                "|ST_n(R, a)| = |ST_n(R, r^2 a)| for r ∈ U(R)",
            ),
            Invariant::OddUniformity => (
                "odd-dimension bijection Diag(a, 1, a, ..., 1, a)",
                "|ST_n(R, a)| = |ST_n(R, 1)| for a ∈ U(R), n odd",
            ),
            Invariant::CharacterRecurrence => (
                "character sum recurrence over F_q",
                "S_n(F_q) = q^2(q-1)χ(-1)·S_{n-2}(F_q)",
            ),
        }
    }
}

/// What a check evaluates: a catalog formula or a structural invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Formula(FormulaName),
    Invariant(Invariant),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Formula(name) => write!(f, "{name}"),
            Target::Invariant(inv) => f.write_str(inv.name()),
        }
    }
}

/// Known ways a published statement fails against the census.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `S_2(F_q)` for `q ≡ 3 (mod 4)`, and everything built on it.
    S2Constant,
    /// Unit uniformity over chain rings with even `q` and `e >= 2`.
    EvenQUnitUniformity,
    /// Per-class share of the punctured layer in the nonsquare formula.
    NonsquareDenominator,
    /// Per-value count at `γ^s` for even `n` and even `s`.
    EvenLayerSplit,
}

impl Family {
    pub fn reference(self) -> &'static str {
        match self {
            Family::S2Constant => "character sum S_2 over F_q, q ≡ 3 (mod 4) branch",
            Family::EvenQUnitUniformity => "unit uniformity over chain rings with even q (Q(R) = U(R))",
            Family::NonsquareDenominator => "determinant γ^s times a nonsquare unit",
            Family::EvenLayerSplit => "determinant equal to a power of γ",
        }
    }

    pub fn published_expression(self) -> &'static str {
        match self {
            Family::S2Constant => "S_2(F_q) = (q-1)((2q-1)χ(-1) - (q-1)) = -(q-1)(3q-2)",
            Family::EvenQUnitUniformity => "|ST_n(R,a)| = |ST_n(R,1)| = |IST_n(R)| / ((q-1)q^(e-1)) for all a ∈ U(R)",
            Family::NonsquareDenominator => {
                "|ST_n(R,uγ^s)| = 2/((q-1)q^(e-1)) · (punctured layer s) - |ST_n(R,γ^s)|"
            }
            Family::EvenLayerSplit => "|ST_n(R,γ^s)| = q^(2(e-s-1)(n-1)) / (q-1) · (q^(2n-1) z_s - z_{s+1})",
        }
    }

    pub fn corrected_expression(self) -> Option<&'static str> {
        match self {
            Family::S2Constant => Some("S_2(F_q) = χ(-1)·q(q-1)"),
            Family::NonsquareDenominator => {
                Some("|ST_n(R,uγ^s)| = 2/((q-1)q^(e-s-1)) · (punctured layer s) - |ST_n(R,γ^s)|")
            }
            Family::EvenQUnitUniformity | Family::EvenLayerSplit => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<IstMethod>,
}

/// Exact values a discrepancy must reproduce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub formula_value: String,
    pub oracle_value: String,
}

/// One comparison. `expected` and `family` are derived when omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub id: String,
    #[serde(rename = "formula")]
    pub target: Target,
    pub ring: String,
    pub n: u32,
    #[serde(default)]
    pub params: CheckParams,
    #[serde(default)]
    pub variant: FormulaVariant,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Classification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

fn default_engine() -> Engine {
    Engine::Dp
}

impl CheckSpec {
    pub fn new(target: Target, ring: &str, n: u32, params: CheckParams, variant: FormulaVariant) -> CheckSpec {
        let mut id = format!("{ring}/n{n}/{target}");
        if let Some(s) = params.s {
            id.push_str(&format!("/s{s}"));
        }
        if let Some(c) = &params.class {
            id.push('/');
            id.push_str(c);
        }
        if let Some(m) = params.method {
            id.push_str(&format!("/{m}"));
        }
        CheckSpec {
            id,
            target,
            ring: ring.to_string(),
            n,
            params,
            variant,
            engine: Engine::Dp,
            expected: None,
            family: None,
            witness: None,
        }
    }

    /// Expected classification and finding family, explicit or derived.
    pub fn expectation(&self) -> (Classification, Option<Family>) {
        let derived = RingDescriptor::parse(&self.ring)
            .map(|d| expectation(self.target, &d, self.n, &self.params, self.variant))
            .unwrap_or((Classification::Error, None));
        (self.expected.unwrap_or(derived.0), self.family.or(derived.1))
    }
}

/// Which cells each known finding family covers.
pub fn expectation(
    target: Target,
    ring: &RingDescriptor,
    n: u32,
    params: &CheckParams,
    variant: FormulaVariant,
) -> (Classification, Option<Family>) {
    use Classification::*;
    let Target::Formula(name) = target else {
        return (Pass, None);
    };
    let (q, e) = (ring.q(), ring.e());
    let paper = variant == FormulaVariant::Paper;
    let class = params.class.as_deref();
    let s = params.s.unwrap_or(0);

    let uses_s2 = match name {
        FormulaName::SField | FormulaName::SRing => true,
        FormulaName::StFieldPrescribed | FormulaName::StRingUnit => matches!(class, Some("qr" | "nqr")),
        _ => false,
    };
    if uses_s2 && q % 4 == 3 && n % 2 == 0 {
        return if paper { (Discrepant, Some(Family::S2Constant)) } else { (Pass, None) };
    }
    match name {
        FormulaName::StRingUnit if class == Some("unit-even-q") && q % 2 == 0 && e >= 2 && n % 2 == 0 => {
            let c = if paper { Discrepant } else { Withdrawn };
            (c, Some(Family::EvenQUnitUniformity))
        }
        FormulaName::StRingGammaPower if s >= 1 && s < e && gamma_power_withdrawn(q, e, n, s) => {
            let c = if paper { Discrepant } else { Withdrawn };
            (c, Some(Family::EvenLayerSplit))
        }
        FormulaName::StRingGammaPowerNonsquare if s >= 1 && s < e => {
            if paper {
                (Discrepant, Some(Family::NonsquareDenominator))
            } else if gamma_power_withdrawn(q, e, n, s) {
                (Withdrawn, Some(Family::EvenLayerSplit))
            } else {
                (Pass, None)
            }
        }
        _ => (Pass, None),
    }
}

/// One row of a report body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub paper_ref: String,
    pub quote: String,
    pub ring: String,
    pub n: u32,
    pub params: ResultParams,
    pub variant: FormulaVariant,
    pub formula_value: String,
    pub oracle_value: String,
    pub classification: Classification,
    pub expected: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    /// Classification (and witness, if any) as expected.
    pub met: bool,
    pub oracle: Engine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultParams {
    pub formula: String,
    #[serde(flatten)]
    pub params: CheckParams,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub pass: usize,
    pub discrepant: usize,
    pub withdrawn: usize,
    pub error: usize,
    /// Checks whose outcome differs from their expectation.
    pub unmet: usize,
}

impl Summary {
    pub fn ok(&self) -> bool {
        self.unmet == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub runtime_ms: u64,
    pub fresh_censuses: usize,
}

/// Everything reproducible lives in the body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportBody {
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
    /// Observations, never pass/fail: see [`compare_rings`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exploratory: Vec<RingComparison>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub header: ReportHeader,
    pub body: ReportBody,
}

impl VerificationReport {
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report body serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// What the census says about a quantity: one exact value, or the distinct
/// values taken over a set of determinants that a formula treats as one.
enum Observed {
    Exact(BigInt),
    Values(BTreeSet<BigUint>),
}

impl Observed {
    fn over(cv: &CountVector, elems: impl IntoIterator<Item = RingElement>) -> Observed {
        Observed::Values(elems.into_iter().map(|a| cv.get(a).clone()).collect())
    }

    fn matches(&self, value: &BigInt) -> bool {
        match self {
            Observed::Exact(v) => v == value,
            Observed::Values(set) => set.len() == 1 && set.iter().all(|v| &BigInt::from(v.clone()) == value),
        }
    }
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observed::Exact(v) => write!(f, "{v}"),
            Observed::Values(set) if set.len() == 1 => write!(f, "{}", set.iter().next().unwrap()),
            Observed::Values(set) => {
                let parts: Vec<String> = set.iter().map(|v| v.to_string()).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

struct Outcome {
    formula_value: String,
    oracle_value: String,
    classification: Classification,
    detail: Option<String>,
}

impl Outcome {
    fn error(detail: impl fmt::Display) -> Outcome {
        Outcome {
            formula_value: String::new(),
            oracle_value: String::new(),
            classification: Classification::Error,
            detail: Some(detail.to_string()),
        }
    }

    fn compare(formula: Result<BigInt, FormulaError>, observed: Observed) -> Outcome {
        let oracle_value = observed.to_string();
        match formula {
            Ok(v) => Outcome {
                classification: if observed.matches(&v) {
                    Classification::Pass
                } else {
                    Classification::Discrepant
                },
                formula_value: v.to_string(),
                oracle_value,
                detail: None,
            },
            Err(err) => {
                let (classification, formula_value) = match &err {
                    FormulaError::NotDivisible {
                        numerator, denominator, ..
                    } => (Classification::Discrepant, format!("{numerator}/{denominator}")),
                    FormulaError::NonIntegral(v) => (Classification::Discrepant, v.clone()),
                    FormulaError::Inconsistent { left, .. } => (Classification::Discrepant, left.to_string()),
                    FormulaError::ClaimWithdrawn { .. } => (Classification::Withdrawn, "withdrawn".into()),
                    _ => (Classification::Error, String::new()),
                };
                Outcome {
                    formula_value,
                    oracle_value,
                    classification,
                    detail: Some(err.to_string()),
                }
            }
        }
    }
}

fn needs_profile(target: Target) -> bool {
    matches!(
        target,
        Target::Formula(
            FormulaName::IdealLayer
                | FormulaName::PuncturedLayer
                | FormulaName::StRingGammaPower
                | FormulaName::StRingGammaPowerNonsquare
                | FormulaName::ZeroFiberIdentity
        )
    )
}

/// Censuses a check reads, as `(descriptor, n)`.
fn dependencies(spec: &CheckSpec, ring: &Ring) -> Vec<(String, u32)> {
    let mut deps = vec![(ring.descriptor().to_string(), spec.n)];
    if needs_profile(spec.target) {
        for t in 1..ring.e() {
            if let Ok(q) = ring.quotient(t) {
                deps.push((q.ring.descriptor().to_string(), spec.n));
            }
        }
    }
    if spec.target == Target::Invariant(Invariant::CharacterRecurrence) && spec.n >= 3 {
        deps.push((ring.descriptor().to_string(), spec.n - 2));
    }
    deps
}

fn parse_class<T: std::str::FromStr<Err = String>>(params: &CheckParams) -> Result<T, String> {
    params
        .class
        .as_deref()
        .ok_or_else(|| "missing class parameter".to_string())?
        .parse()
}

fn layer_param(params: &CheckParams) -> Result<u32, String> {
    params.s.ok_or_else(|| "missing layer parameter s".to_string())
}

fn evaluate(spec: &CheckSpec, cache: &CensusCache) -> Outcome {
    let ring = match cache.ring(&spec.ring) {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let cv = match cache.get(&ring, spec.n, spec.engine) {
        Ok(cv) => cv,
        Err(e) => return Outcome::error(e),
    };
    match spec.target {
        Target::Formula(name) => evaluate_formula(name, spec, &ring, &cv, cache),
        Target::Invariant(inv) => evaluate_invariant(inv, spec, &ring, &cv, cache),
    }
    .unwrap_or_else(Outcome::error)
}

fn evaluate_formula(
    name: FormulaName,
    spec: &CheckSpec,
    ring: &Ring,
    cv: &CountVector,
    cache: &CensusCache,
) -> Result<Outcome, String> {
    let (q, e, n, variant) = (ring.q(), ring.e(), spec.n, spec.variant);
    let err = |e: CensusError| e.to_string();
    let totals = unit_and_zero_totals(cv, ring).map_err(err)?;
    let profile = || -> Result<ZeroCountProfile, String> {
        zero_count_profile(ring, n, |r| cache.get(r, n, spec.engine)).map_err(err)
    };
    let field_only = || {
        if e == 1 {
            Ok(())
        } else {
            Err(format!("{name} applies to fields; {} has e = {e}", spec.ring))
        }
    };
    let units_of = |class: SquareClass| Observed::over(cv, ring.units_of_class(class));
    let all_units = || Observed::over(cv, ring.units());
    let exact = |v: BigUint| Observed::Exact(BigInt::from(v));

    let outcome = match name {
        FormulaName::IstField => {
            field_only()?;
            let method = spec.params.method.unwrap_or_default();
            Outcome::compare(formula::ist_field(q, n, method), exact(totals.ist))
        }
        FormulaName::StFieldZero => {
            field_only()?;
            Outcome::compare(formula::st_field_zero(q, n), exact(totals.zero))
        }
        FormulaName::SField => {
            field_only()?;
            let observed = character_sum(cv, ring).map_err(err)?;
            Outcome::compare(formula::s_field(q, n, variant), Observed::Exact(observed))
        }
        FormulaName::StFieldPrescribed => {
            field_only()?;
            let class: FieldClass = parse_class(&spec.params)?;
            let observed = match class {
                FieldClass::Zero => exact(totals.zero),
                FieldClass::Qr => units_of(SquareClass::QrUnit),
                FieldClass::Nqr => units_of(SquareClass::NqrUnit),
                FieldClass::Unit => all_units(),
            };
            Outcome::compare(formula::st_field_prescribed(q, n, class, variant), observed)
        }
        FormulaName::IstRing => Outcome::compare(formula::ist_ring(q, e, n), exact(totals.ist)),
        FormulaName::SRing => {
            let observed = character_sum(cv, ring).map_err(err)?;
            Outcome::compare(formula::s_ring(q, e, n, variant), Observed::Exact(observed))
        }
        FormulaName::StRingUnit => {
            let class: RingUnitClass = parse_class(&spec.params)?;
            let observed = match class {
                RingUnitClass::Qr => units_of(SquareClass::QrUnit),
                RingUnitClass::Nqr => units_of(SquareClass::NqrUnit),
                RingUnitClass::UnitEvenQ => all_units(),
            };
            Outcome::compare(formula::st_ring_unit(q, e, n, class, variant), observed)
        }
        FormulaName::IdealLayer => {
            let s = layer_param(&spec.params)?;
            let hist = layer_histogram(cv, ring).map_err(err)?;
            let observed: BigUint = hist.iter().skip(s as usize).sum();
            Outcome::compare(formula::ideal_layer(q, e, n, s, &profile()?), exact(observed))
        }
        FormulaName::PuncturedLayer => {
            let s = layer_param(&spec.params)?;
            let hist = layer_histogram(cv, ring).map_err(err)?;
            let observed = hist.get(s as usize).cloned().unwrap_or_default();
            Outcome::compare(formula::punctured_layer(q, e, n, s, &profile()?), exact(observed))
        }
        FormulaName::StRingGammaPower => {
            let s = layer_param(&spec.params)?;
            let layer = ring.layer(s).map_err(|e| e.to_string())?;
            // even q: the value is asserted for every unit multiple of γ^s
            let observed = if q % 2 == 0 {
                Observed::over(cv, layer)
            } else {
                let mask = residue_multiples(ring, s);
                Observed::over(cv, layer.into_iter().filter(|a| mask[a.index()]))
            };
            Outcome::compare(formula::st_ring_gamma_power(q, e, n, s, &profile()?, variant), observed)
        }
        FormulaName::StRingGammaPowerNonsquare => {
            let s = layer_param(&spec.params)?;
            let layer = ring.layer(s).map_err(|e| e.to_string())?;
            let mask = residue_multiples(ring, s);
            let observed = Observed::over(cv, layer.into_iter().filter(|a| !mask[a.index()]));
            Outcome::compare(
                formula::st_ring_gamma_power_nonsquare(q, e, n, s, &profile()?, variant),
                observed,
            )
        }
        FormulaName::ZeroFiberIdentity => {
            let zc = profile()?;
            let ist = BigInt::from(totals.ist);
            let predicted = formula::zero_fiber_identity(q, e, n, &zc, &ist)
                .and_then(|residual| Ok(residual + zc.get(e)?));
            Outcome::compare(predicted, exact(totals.zero))
        }
    };
    Ok(outcome)
}

fn evaluate_invariant(
    inv: Invariant,
    spec: &CheckSpec,
    ring: &Ring,
    cv: &CountVector,
    cache: &CensusCache,
) -> Result<Outcome, String> {
    let err = |e: CensusError| e.to_string();
    let report = check_invariants(cv, ring).map_err(err)?;
    let outcome = match inv {
        Invariant::CensusTotal => {
            let expected: BigUint = Pow::pow(BigUint::from(ring.size()), 2 * spec.n - 1);
            Outcome::compare(Ok(expected.into()), Observed::Exact(cv.total().into()))
        }
        Invariant::Conjugation => {
            let bad = report
                .conjugation_violations
                .ok_or_else(|| format!("{} is too large for the exhaustive check", spec.ring))?;
            Outcome::compare(Ok(BigInt::from(0)), Observed::Exact(bad.into()))
        }
        Invariant::OddUniformity => {
            if spec.n % 2 == 0 {
                return Err("odd_uniformity needs odd n".into());
            }
            let distinct: BTreeSet<&BigUint> = ring.units().into_iter().map(|u| cv.get(u)).collect();
            Outcome::compare(Ok(BigInt::from(1)), Observed::Exact(distinct.len().into()))
        }
        Invariant::CharacterRecurrence => {
            if ring.e() != 1 || ring.q() % 2 == 0 || spec.n < 3 {
                return Err("character_recurrence needs an odd-order field and n >= 3".into());
            }
            let q = ring.q();
            let earlier = cache.get(ring, spec.n - 2, spec.engine).map_err(err)?;
            let factor = BigInt::from(q * q * (q - 1)) * chi_minus_one(q);
            let predicted = factor * character_sum(&earlier, ring).map_err(err)?;
            Outcome::compare(Ok(predicted), Observed::Exact(character_sum(cv, ring).map_err(err)?))
        }
    };
    Ok(outcome)
}

fn reference_of(target: Target) -> (String, String) {
    match target {
        Target::Formula(name) => {
            let info = name.info();
            (info.reference.to_string(), info.anchor.to_string())
        }
        Target::Invariant(inv) => {
            let (r, a) = inv.reference();
            (r.to_string(), a.to_string())
        }
    }
}

/// Fills the cache with every census the plan reads. Done one census at a
/// time, each internally parallel, so that checks evaluated concurrently
/// afterwards never initialize a cache cell themselves.
fn prefetch(plan: &[CheckSpec], cache: &CensusCache) {
    let mut seen = HashSet::new();
    for spec in plan {
        let Ok(ring) = cache.ring(&spec.ring) else { continue };
        for (desc, n) in dependencies(spec, &ring) {
            if seen.insert((desc.clone(), n, spec.engine)) {
                if let Ok(r) = cache.ring(&desc) {
                    let _ = cache.get(&r, n, spec.engine);
                }
            }
        }
    }
}

/// Runs every check; results are ordered by id regardless of scheduling.
pub fn run_suite(plan: &[CheckSpec], cache: &CensusCache) -> VerificationReport {
    let start = Instant::now();
    let fresh_before = cache.fresh_computations();
    prefetch(plan, cache);
    let mut checks = par_map(plan, |spec| {
        let outcome = evaluate(spec, cache);
        let (expected, family) = spec.expectation();
        let witness_ok = spec.witness.as_ref().is_none_or(|w| {
            w.formula_value == outcome.formula_value && w.oracle_value == outcome.oracle_value
        });
        let (paper_ref, quote) = reference_of(spec.target);
        CheckResult {
            id: spec.id.clone(),
            paper_ref,
            quote,
            ring: spec.ring.clone(),
            n: spec.n,
            params: ResultParams {
                formula: spec.target.to_string(),
                params: spec.params.clone(),
            },
            variant: spec.variant,
            met: outcome.classification == expected && witness_ok,
            formula_value: outcome.formula_value,
            oracle_value: outcome.oracle_value,
            classification: outcome.classification,
            expected,
            family: if outcome.classification == Classification::Pass { None } else { family },
            oracle: spec.engine,
            detail: outcome.detail,
        }
    });
    checks.sort_by(|a, b| a.id.cmp(&b.id));

    let mut summary = Summary {
        checks: checks.len(),
        ..Summary::default()
    };
    for c in &checks {
        match c.classification {
            Classification::Pass => summary.pass += 1,
            Classification::Discrepant => summary.discrepant += 1,
            Classification::Withdrawn => summary.withdrawn += 1,
            Classification::Error => summary.error += 1,
        }
        if !c.met {
            summary.unmet += 1;
        }
    }
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    VerificationReport {
        header: ReportHeader {
            tool_version: TOOL_VERSION.to_string(),
            timestamp,
            runtime_ms: start.elapsed().as_millis() as u64,
            fresh_censuses: cache.fresh_computations() - fresh_before,
        },
        body: ReportBody {
            checks,
            summary,
            exploratory: exploratory_comparisons(plan, cache),
        },
    }
}

/// Censuses of two rings with the same `(q, e)`, compared bucket by bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingComparison {
    pub left: String,
    pub right: String,
    pub n: u32,
    /// Same sorted counts in every bucket: valuation and square class for
    /// odd `q`, valuation alone for even `q`, where `|Q(R)|` itself depends
    /// on the ring.
    pub same_profile: bool,
    pub detail: String,
}

/// Non-isomorphic chain rings sharing `(q, e)`.
pub const SAME_INVARIANT_PAIRS: [(&str, &str); 5] = [
    ("Z(2^2)", "FU(2,2)"),
    ("Z(3^2)", "FU(3,2)"),
    ("GR(2^2,2)", "FU(2^2,2)"),
    ("Z(2^3)", "FU(2,3)"),
    ("Z(3^3)", "FU(3,3)"),
];

type Profile = BTreeMap<(u32, Option<SquareClass>), Vec<BigUint>>;

fn bucket_profile(cv: &CountVector, ring: &Ring) -> Profile {
    let mut profile = Profile::new();
    for a in ring.elements() {
        let class = (ring.q() % 2 == 1).then(|| ring.square_class(a));
        profile
            .entry((ring.valuation(a), class))
            .or_default()
            .push(cv.get(a).clone());
    }
    for counts in profile.values_mut() {
        counts.sort();
    }
    profile
}

/// Whether the census sees a difference between two rings with the same
/// residue field size and nilpotency index. Recorded, not asserted.
pub fn compare_rings(left: &str, right: &str, n: u32, cache: &CensusCache) -> Result<RingComparison, CensusError> {
    let (lr, rr) = (cache.ring(left)?, cache.ring(right)?);
    let lp = bucket_profile(&*cache.get(&lr, n, Engine::Dp)?, &lr);
    let rp = bucket_profile(&*cache.get(&rr, n, Engine::Dp)?, &rr);
    let first_diff = lp.iter().find(|(k, v)| rp.get(*k) != Some(*v)).map(|(k, _)| *k);
    let detail = match first_diff {
        None if lp.len() == rp.len() => "identical bucket profiles".to_string(),
        None => "different bucket sets".to_string(),
        Some((v, class)) => {
            let show = |p: &Profile| {
                let set: BTreeSet<&BigUint> = p.get(&(v, class)).into_iter().flatten().collect();
                set.into_iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
            };
            let class = class.map(|c| format!(" {}", serde_json::to_value(c).unwrap().as_str().unwrap()));
            format!("valuation {v}{}: {{{}}} vs {{{}}}", class.unwrap_or_default(), show(&lp), show(&rp))
        }
    };
    Ok(RingComparison {
        left: lr.descriptor().to_string(),
        right: rr.descriptor().to_string(),
        n,
        same_profile: first_diff.is_none() && lp.len() == rp.len(),
        detail,
    })
}

fn exploratory_comparisons(plan: &[CheckSpec], cache: &CensusCache) -> Vec<RingComparison> {
    let cells: BTreeSet<(String, u32)> = plan
        .iter()
        .filter_map(|s| Some((cache.ring(&s.ring).ok()?.descriptor().to_string(), s.n)))
        .collect();
    let mut out = Vec::new();
    for (left, right) in SAME_INVARIANT_PAIRS {
        for (ring, n) in cells.iter().filter(|(r, _)| r == left) {
            if cells.contains(&(right.to_string(), *n)) {
                if let Ok(c) = compare_rings(ring, right, *n, cache) {
                    out.push(c);
                }
            }
        }
    }
    out
}

pub const FIELD_GRID: [&str; 7] = ["F(2)", "F(3)", "F(2^2)", "F(5)", "F(7)", "F(2^3)", "F(3^2)"];
pub const FIELD_MAX_N: u32 = 7;
pub const RING_GRID: [&str; 9] = [
    "Z(2^2)",
    "Z(2^3)",
    "Z(3^2)",
    "Z(3^3)",
    "Z(5^2)",
    "FU(2,2)",
    "FU(3,2)",
    "FU(2^2,2)",
    "GR(2^2,2)",
];
pub const RING_MAX_N: u32 = 5;

fn with_s(s: u32) -> CheckParams {
    CheckParams {
        s: Some(s),
        ..CheckParams::default()
    }
}

fn with_class(class: &str) -> CheckParams {
    CheckParams {
        class: Some(class.to_string()),
        ..CheckParams::default()
    }
}

/// Checks for one field census.
pub fn field_checks(desc: &RingDescriptor, n: u32, variant: FormulaVariant) -> Vec<CheckSpec> {
    let ring = desc.to_string();
    let q = desc.q();
    let f = |name: FormulaName, params: CheckParams| CheckSpec::new(Target::Formula(name), &ring, n, params, variant);
    let mut out = Vec::new();
    for method in [IstMethod::Recurrence, IstMethod::Closed] {
        let params = CheckParams {
            method: Some(method),
            ..CheckParams::default()
        };
        out.push(f(FormulaName::IstField, params));
    }
    out.push(f(FormulaName::StFieldZero, CheckParams::default()));
    out.push(f(FormulaName::StFieldPrescribed, with_class("zero")));
    if q % 2 == 1 {
        out.push(f(FormulaName::SField, CheckParams::default()));
        out.push(f(FormulaName::StFieldPrescribed, with_class("qr")));
        out.push(f(FormulaName::StFieldPrescribed, with_class("nqr")));
    }
    if q % 2 == 0 || n % 2 == 1 {
        out.push(f(FormulaName::StFieldPrescribed, with_class("unit")));
    }
    out.extend(invariant_checks(desc, n, variant));
    out
}

/// Checks for one chain-ring census.
pub fn ring_checks(desc: &RingDescriptor, n: u32, variant: FormulaVariant) -> Vec<CheckSpec> {
    let ring = desc.to_string();
    let (q, e) = (desc.q(), desc.e());
    let f = |name: FormulaName, params: CheckParams| CheckSpec::new(Target::Formula(name), &ring, n, params, variant);
    let mut out = vec![f(FormulaName::IstRing, CheckParams::default())];
    if q % 2 == 1 {
        out.push(f(FormulaName::SRing, CheckParams::default()));
        out.push(f(FormulaName::StRingUnit, with_class("qr")));
        out.push(f(FormulaName::StRingUnit, with_class("nqr")));
    } else {
        out.push(f(FormulaName::StRingUnit, with_class("unit-even-q")));
    }
    for s in 0..=e {
        out.push(f(FormulaName::IdealLayer, with_s(s)));
    }
    for s in 0..e {
        out.push(f(FormulaName::PuncturedLayer, with_s(s)));
    }
    for s in 1..e {
        out.push(f(FormulaName::StRingGammaPower, with_s(s)));
        if q % 2 == 1 {
            out.push(f(FormulaName::StRingGammaPowerNonsquare, with_s(s)));
        }
    }
    out.push(f(FormulaName::ZeroFiberIdentity, CheckParams::default()));
    out.extend(invariant_checks(desc, n, variant));
    out
}

fn invariant_checks(desc: &RingDescriptor, n: u32, variant: FormulaVariant) -> Vec<CheckSpec> {
    let ring = desc.to_string();
    let inv = |i: Invariant| CheckSpec::new(Target::Invariant(i), &ring, n, CheckParams::default(), variant);
    let mut out = vec![inv(Invariant::CensusTotal)];
    if desc.size() <= crate::census::CONJUGATION_CHECK_LIMIT as u64 {
        out.push(inv(Invariant::Conjugation));
    }
    if n % 2 == 1 {
        out.push(inv(Invariant::OddUniformity));
    }
    if desc.is_field() && desc.q() % 2 == 1 && n >= 3 {
        out.push(inv(Invariant::CharacterRecurrence));
    }
    out
}

/// Checks for every `n` in `1..=max_n` over the given descriptors, fields and
/// chain rings alike.
pub fn grid_plan(rings: &[&str], max_n: u32, variant: FormulaVariant) -> Vec<CheckSpec> {
    let mut plan = Vec::new();
    for text in rings {
        let desc = RingDescriptor::parse(text).expect("grid descriptors are valid");
        for n in 1..=max_n {
            if desc.is_field() {
                plan.extend(field_checks(&desc, n, variant));
            } else {
                plan.extend(ring_checks(&desc, n, variant));
            }
        }
    }
    attach_witnesses(&mut plan);
    plan
}

/// Pins the exact values of the two smallest known discrepancies, so that a
/// change in either side shows up as an unmet check.
fn attach_witnesses(plan: &mut [CheckSpec]) {
    for spec in plan.iter_mut().filter(|s| s.variant == FormulaVariant::Paper) {
        let witness = match spec.id.as_str() {
            "F(3)/n2/s_field" => Some(("-14", "-6")),
            "FU(2,2)/n2/st_ring_unit/unit-even-q" => Some(("16", "{12,20}")),
            _ => None,
        };
        spec.witness = witness.map(|(f, o)| Witness {
            formula_value: f.into(),
            oracle_value: o.into(),
        });
    }
}

/// The standard grid: small fields up to `n = 7`, chain rings up to `n = 5`.
pub fn default_plan(variant: FormulaVariant) -> Vec<CheckSpec> {
    let mut plan = grid_plan(&FIELD_GRID, FIELD_MAX_N, variant);
    plan.extend(grid_plan(&RING_GRID, RING_MAX_N, variant));
    plan
}

/// Smallest reproduction of a finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingWitness {
    pub id: String,
    pub ring: String,
    pub n: u32,
    pub formula_value: String,
    pub oracle_value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    /// Known family, or `unexplained:<formula>` for anything else.
    pub family: String,
    pub paper_ref: String,
    pub published_expression: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected_expression: Option<String>,
    pub checks: Vec<String>,
    pub witness: FindingWitness,
}

/// Groups DISCREPANT results by the statement they refute.
pub fn discrepancy_ledger(report: &VerificationReport) -> Vec<Finding> {
    let mut groups: BTreeMap<String, Vec<&CheckResult>> = BTreeMap::new();
    for c in &report.body.checks {
        if c.classification != Classification::Discrepant {
            continue;
        }
        let key = match c.family {
            Some(f) => serde_json::to_value(f).unwrap().as_str().unwrap().to_string(),
            None => format!("unexplained:{}", c.params.formula),
        };
        groups.entry(key).or_default().push(c);
    }
    groups
        .into_iter()
        .map(|(family, members)| {
            let size = |c: &CheckResult| RingDescriptor::parse(&c.ring).map(|d| d.size()).unwrap_or(u64::MAX);
            let smallest = members
                .iter()
                .min_by(|a, b| (size(a), a.n, &a.id).cmp(&(size(b), b.n, &b.id)))
                .unwrap();
            let known = smallest.family;
            Finding {
                family,
                paper_ref: known.map_or(smallest.paper_ref.clone(), |f| f.reference().to_string()),
                published_expression: known.map_or(smallest.quote.clone(), |f| f.published_expression().to_string()),
                corrected_expression: known.and_then(|f| f.corrected_expression()).map(str::to_string),
                checks: members.iter().map(|c| c.id.clone()).collect(),
                witness: FindingWitness {
                    id: smallest.id.clone(),
                    ring: smallest.ring.clone(),
                    n: smallest.n,
                    formula_value: smallest.formula_value.clone(),
                    oracle_value: smallest.oracle_value.clone(),
                },
            }
        })
        .collect()
}

/// One row of the `F_5` table: counts at `a = 0..4` and `|IST_n(F_5)|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Row {
    pub n: u32,
    pub counts: Vec<BigUint>,
    pub ist: BigUint,
}

impl Table1Row {
    fn cells(&self) -> impl Iterator<Item = &BigUint> {
        self.counts.iter().chain(std::iter::once(&self.ist))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Mismatch {
    pub n: u32,
    pub column: String,
    pub published: BigUint,
    pub computed: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
    pub matched: usize,
    pub total: usize,
    pub mismatches: Vec<Table1Mismatch>,
}

impl Table1 {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub const TABLE1_COLUMNS: [&str; 6] = ["a0", "a1", "a2", "a3", "a4", "ist"];
const TABLE1_CSV: &str = include_str!("../fixtures/table1.csv");

/// The published table, `n = 1..10`.
pub fn golden_table1() -> Vec<Table1Row> {
    TABLE1_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let cells: Vec<&str> = line.trim().split(',').collect();
            let num = |s: &str| s.parse::<BigUint>().expect("fixture cells are integers");
            Table1Row {
                n: cells[0].parse().expect("fixture n"),
                counts: cells[1..6].iter().map(|c| num(c)).collect(),
                ist: num(cells[6]),
            }
        })
        .collect()
}

/// Recomputes every row with the transfer DP and compares against the
/// published values.
pub fn reproduce_table1(cache: &CensusCache) -> Result<Table1, CensusError> {
    let golden = golden_table1();
    let ring = cache.ring("F(5)")?;
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    let mut total = 0;
    for g in &golden {
        let cv = cache.get(&ring, g.n, Engine::Dp)?;
        let row = Table1Row {
            n: g.n,
            counts: cv.counts().to_vec(),
            ist: unit_and_zero_totals(&cv, &ring)?.ist,
        };
        for ((published, computed), column) in g.cells().zip(row.cells()).zip(TABLE1_COLUMNS) {
            total += 1;
            if published != computed {
                mismatches.push(Table1Mismatch {
                    n: g.n,
                    column: column.to_string(),
                    published: published.clone(),
                    computed: computed.clone(),
                });
            }
        }
        rows.push(row);
    }
    Ok(Table1 {
        rows,
        matched: total - mismatches.len(),
        total,
        mismatches,
    })
}

/// CSV with the fixture's header.
pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = format!("n,{}\n", TABLE1_COLUMNS.join(","));
    for r in rows {
        let cells: Vec<String> = r.cells().map(|c| c.to_string()).collect();
        out.push_str(&format!("{},{}\n", r.n, cells.join(",")));
    }
    out
}

pub fn table1_markdown(rows: &[Table1Row]) -> String {
    let mut out = String::from("| n | a=0 | a=1 | a=2 | a=3 | a=4 | IST |\n|---|---:|---:|---:|---:|---:|---:|\n");
    for r in rows {
        let cells: Vec<String> = r.cells().map(|c| c.to_string()).collect();
        out.push_str(&format!("| {} | {} |\n", r.n, cells.join(" | ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(plan: &[CheckSpec]) -> VerificationReport {
        run_suite(plan, &CensusCache::default())
    }

    fn find<'a>(report: &'a VerificationReport, id: &str) -> &'a CheckResult {
        report.body.checks.iter().find(|c| c.id == id).unwrap_or_else(|| panic!("no check {id}"))
    }

    #[test]
    fn f5_rows_pass() {
        let report = run(&grid_plan(&["F(5)"], 6, FormulaVariant::Paper));
        assert_eq!(report.body.summary.pass, report.body.summary.checks);
    }

    #[test]
    fn s2_witness() {
        let report = run(&grid_plan(&["F(3)"], 2, FormulaVariant::Paper));
        let c = find(&report, "F(3)/n2/s_field");
        assert_eq!((c.formula_value.as_str(), c.oracle_value.as_str()), ("-14", "-6"));
        assert_eq!(c.classification, Classification::Discrepant);
        assert!(c.met);
        assert!(report.body.summary.ok());
    }

    #[test]
    fn even_q_witness() {
        let report = run(&grid_plan(&["FU(2,2)"], 2, FormulaVariant::Paper));
        let c = find(&report, "FU(2,2)/n2/st_ring_unit/unit-even-q");
        assert_eq!((c.formula_value.as_str(), c.oracle_value.as_str()), ("16", "{12,20}"));
        assert!(c.met);
        let errata = run(&grid_plan(&["FU(2,2)"], 2, FormulaVariant::Errata));
        assert_eq!(
            find(&errata, "FU(2,2)/n2/st_ring_unit/unit-even-q").classification,
            Classification::Withdrawn
        );
    }

    #[test]
    fn missing_discrepancy_is_unmet() {
        let mut plan = grid_plan(&["F(5)"], 2, FormulaVariant::Paper);
        plan[0].expected = Some(Classification::Discrepant);
        let report = run(&plan);
        assert_eq!(report.body.summary.unmet, 1);
    }

    #[test]
    fn budget_failures_become_errors() {
        let mut spec = CheckSpec::new(
            Target::Formula(FormulaName::IstField),
            "F(5)",
            8,
            CheckParams::default(),
            FormulaVariant::Paper,
        );
        spec.engine = Engine::Naive;
        let report = run(&[spec]);
        assert_eq!(report.body.checks[0].classification, Classification::Error);
        assert_eq!(report.body.summary.error, 1);
    }

    #[test]
    fn plan_round_trips_through_json() {
        let plan = grid_plan(&["Z(3^2)"], 2, FormulaVariant::Errata);
        let text = serde_json::to_string(&plan).unwrap();
        let back: Vec<CheckSpec> = serde_json::from_str(&text).unwrap();
        assert_eq!(plan, back);
        let minimal: Vec<CheckSpec> =
            serde_json::from_str(r#"[{"id": "x", "formula": "ist_ring", "ring": "Z(3^2)", "n": 2}]"#).unwrap();
        assert_eq!(run(&minimal).body.checks[0].classification, Classification::Pass);
    }

    #[test]
    fn z4_and_fu22_are_compared() {
        let cache = CensusCache::default();
        let c = compare_rings("Z(4)", "FU(2,2)", 2, &cache).unwrap();
        assert_eq!((c.left.as_str(), c.right.as_str()), ("Z(2^2)", "FU(2,2)"));
        let mut plan = grid_plan(&["Z(2^2)", "FU(2,2)"], 2, FormulaVariant::Paper);
        plan.retain(|s| s.target == Target::Formula(FormulaName::IstRing));
        let report = run_suite(&plan, &cache);
        assert_eq!(report.body.exploratory.len(), 2);
        assert_eq!(report.body.exploratory[1], c);
    }

    #[test]
    fn z8_and_fu23_differ_at_even_n() {
        let cache = CensusCache::default();
        let c = compare_rings("Z(8)", "FU(2,3)", 2, &cache).unwrap();
        assert!(!c.same_profile);
        assert_eq!(c.detail, "valuation 0: {48,64,96} vs {48,80}");
        assert!(compare_rings("Z(8)", "FU(2,3)", 3, &cache).unwrap().same_profile);
        assert!(compare_rings("Z(27)", "FU(3,3)", 2, &cache).unwrap().same_profile);
    }

    #[test]
    fn golden_fixture_shape() {
        let rows = golden_table1();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows[5].counts[0], BigUint::from(15_028_125u32));
        assert_eq!(rows[0].ist, BigUint::from(4u32));
        assert!(table1_csv(&rows).starts_with("n,a0,a1,a2,a3,a4,ist\n1,1,1,1,1,1,4\n"));
    }
}
