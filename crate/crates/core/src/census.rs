//! Determinant census `a -> |ST_n(R, a)|`.
//!
//! The transfer dynamic program tracks the pair of consecutive leading
//! principal minors `(det A_{k-1}, det A_k)`, with `det A_0 = 1`, and steps it
//! through `det A_{k+1} = x det A_k - r^2 det A_{k-1}`. The naive engine
//! enumerates every `(2n-1)`-tuple of entries and serves as its oracle.

use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::ZeroCountProfile;
use crate::ring::{Ring, RingElement, RingError, SquareClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Dp,
    Naive,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Dp => "dp",
            Engine::Naive => "naive",
        })
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dp" => Ok(Engine::Dp),
            "naive" => Ok(Engine::Naive),
            other => Err(format!("unknown engine {other:?} (expected dp or naive)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("budget exceeded for {engine} census of {ring} at n = {n}: {reason}")]
    Budget {
        engine: Engine,
        ring: String,
        n: u32,
        reason: String,
    },
    #[error("matrix dimension must be at least 1")]
    ZeroDimension,
    #[error("census of {census} does not belong to ring {ring}")]
    RingMismatch { census: String, ring: String },
    #[error("census invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Exact census of `ST_n(R, .)`, indexed by canonical element index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    ring: String,
    n: u32,
    engine: Engine,
    counts: Vec<BigUint>,
}

impl CountVector {
    /// Assembles a census from raw parts, checking only the total.
    pub fn from_parts(
        ring: &Ring,
        n: u32,
        engine: Engine,
        counts: Vec<BigUint>,
    ) -> Result<CountVector, CensusError> {
        if counts.len() != ring.size() as usize {
            return Err(CensusError::Invariant(format!(
                "{} counts for a ring of order {}",
                counts.len(),
                ring.size()
            )));
        }
        let cv = CountVector {
            ring: ring.descriptor().to_string(),
            n,
            engine,
            counts,
        };
        let total: BigUint = cv.counts.iter().sum();
        if total != matrix_count(ring, n) {
            return Err(CensusError::Invariant(format!(
                "total {total} differs from |R|^(2n-1) for {} at n = {n}",
                cv.ring
            )));
        }
        Ok(cv)
    }

    pub fn ring(&self) -> &str {
        &self.ring
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn get(&self, a: RingElement) -> &BigUint {
        &self.counts[a.index()]
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Same census under a different engine tag; used when comparing engines.
    pub fn with_engine(mut self, engine: Engine) -> CountVector {
        self.engine = engine;
        self
    }

    fn belongs_to(&self, ring: &Ring) -> Result<(), CensusError> {
        let name = ring.descriptor().to_string();
        if self.ring == name && self.counts.len() == ring.size() as usize {
            Ok(())
        } else {
            Err(CensusError::RingMismatch {
                census: self.ring.clone(),
                ring: name,
            })
        }
    }
}

/// `|ST_n(R)| = |R|^(2n-1)`.
pub fn matrix_count(ring: &Ring, n: u32) -> BigUint {
    Pow::pow(BigUint::from(ring.size()), 2 * n - 1)
}

/// Limits on census work. Exceeding a limit is an error, never an approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest tuple count `|R|^(2n-1)` the naive engine will enumerate.
    pub naive_max_tuples: u128,
    /// Largest ring order for the dynamic program when `e >= 2`.
    pub dp_max_size_chain: u32,
    /// Largest ring order for the dynamic program when `n > 12`.
    pub dp_max_size_long: u32,
    /// Largest field order for the dynamic program.
    pub dp_max_size_field: u32,
    /// When set, replaces all of the above with a single work limit: tuples
    /// for the naive engine, `n |R|^3` for the dynamic program.
    pub work_limit: Option<u128>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            naive_max_tuples: 10_000_000,
            dp_max_size_chain: 128,
            dp_max_size_long: 64,
            dp_max_size_field: 256,
            work_limit: None,
        }
    }
}

impl Budget {
    pub fn with_work_limit(limit: u128) -> Budget {
        Budget {
            work_limit: Some(limit),
            ..Budget::default()
        }
    }

    fn check(&self, ring: &Ring, n: u32, engine: Engine) -> Result<(), CensusError> {
        let size = ring.size();
        let fail = |reason: String| CensusError::Budget {
            engine,
            ring: ring.descriptor().to_string(),
            n,
            reason,
        };
        let tuples = (size as u128).checked_pow(2 * n - 1);
        let dp_work = (size as u128).pow(3) * n as u128;
        match (engine, self.work_limit) {
            (Engine::Naive, limit) => {
                let cap = limit.unwrap_or(self.naive_max_tuples);
                match tuples {
                    Some(t) if t <= cap => Ok(()),
                    _ => Err(fail(format!("|R|^(2n-1) tuples exceed {cap}"))),
                }
            }
            (Engine::Dp, Some(limit)) if dp_work > limit => {
                Err(fail(format!("dp work {dp_work} exceeds {limit}")))
            }
            (Engine::Dp, Some(_)) => Ok(()),
            (Engine::Dp, None) => {
                let cap = if n > 12 {
                    self.dp_max_size_long
                } else if ring.e() >= 2 {
                    self.dp_max_size_chain
                } else {
                    self.dp_max_size_field
                };
                if size > cap {
                    Err(fail(format!("ring order {size} exceeds {cap}")))
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CensusOptions {
    pub budget: Budget,
    /// Worker threads; `None` uses the global pool. Results never depend on it.
    pub threads: Option<usize>,
}

/// Accumulator for path weights. Picked per run so that the final total
/// `|R|^(2n-1)`, which bounds every intermediate value, fits.
trait Weight: Clone + Send + Sync {
    fn nothing() -> Self;
    fn single() -> Self;
    fn is_nothing(&self) -> bool;
    fn add_scaled(&mut self, other: &Self, factor: u64);
    fn into_big(self) -> BigUint;
}

impl Weight for u64 {
    fn nothing() -> Self {
        0
    }
    fn single() -> Self {
        1
    }
    fn is_nothing(&self) -> bool {
        *self == 0
    }
    fn add_scaled(&mut self, other: &Self, factor: u64) {
        *self += other * factor;
    }
    fn into_big(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Weight for u128 {
    fn nothing() -> Self {
        0
    }
    fn single() -> Self {
        1
    }
    fn is_nothing(&self) -> bool {
        *self == 0
    }
    fn add_scaled(&mut self, other: &Self, factor: u64) {
        *self += other * factor as u128;
    }
    fn into_big(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Weight for BigUint {
    fn nothing() -> Self {
        Zero::zero()
    }
    fn single() -> Self {
        One::one()
    }
    fn is_nothing(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_scaled(&mut self, other: &Self, factor: u64) {
        *self += other * factor;
    }
    fn into_big(self) -> BigUint {
        self
    }
}

/// Sparse `(value, multiplicity)` list from an iterator of values.
fn aggregate(size: usize, values: impl Iterator<Item = (u32, u64)>) -> Vec<(u32, u64)> {
    let mut dense = vec![0u64; size];
    for (v, m) in values {
        dense[v as usize] += m;
    }
    dense
        .into_iter()
        .enumerate()
        .filter(|&(_, m)| m > 0)
        .map(|(v, m)| (v as u32, m))
        .collect()
}

fn map_rows<T: Send, F>(size: usize, parallel: bool, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..size).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..size).map(f).collect()
}

/// Order-preserving map, parallel when the `parallel` feature is on.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Send + Sync) -> Vec<R> {
    map_rows(items.len(), true, |i| f(&items[i]))
}

fn dp_counts<W: Weight>(ring: &Ring, n: u32, parallel: bool) -> Vec<BigUint> {
    let size = ring.size() as usize;
    if n == 1 {
        return vec![BigUint::one(); size];
    }
    let squares = ring.square_multiplicities();
    // (-s u, multiplicity of s) for each previous minor u
    let neg_su: Vec<Vec<(u32, u64)>> = (0..size as u32)
        .map(|u| {
            aggregate(
                size,
                squares
                    .iter()
                    .map(|&(s, m)| (ring.neg_idx(ring.mul_idx(s.0, u)), m)),
            )
        })
        .collect();
    // distribution of x v over x, for each current minor v
    let x_times: Vec<Vec<(u32, u64)>> = (0..size as u32)
        .map(|v| aggregate(size, (0..size as u32).map(|x| (ring.mul_idx(x, v), 1))))
        .collect();

    // weights[u * size + v] for the state (det A_{k-1}, det A_k) = (u, v)
    let mut weights = vec![W::nothing(); size * size];
    for w in &mut weights[size..2 * size] {
        *w = W::single();
    }
    for _ in 2..=n {
        let step = |v: usize| -> Vec<W> {
            // shift[b] = total weight of reaching -s u = b with det A_k = v
            let mut shift = vec![W::nothing(); size];
            for (u, terms) in neg_su.iter().enumerate() {
                let w = &weights[u * size + v];
                if w.is_nothing() {
                    continue;
                }
                for &(b, m) in terms {
                    shift[b as usize].add_scaled(w, m);
                }
            }
            let mut row = vec![W::nothing(); size];
            for (b, w) in shift.iter().enumerate() {
                if w.is_nothing() {
                    continue;
                }
                for &(a, m) in &x_times[v] {
                    row[ring.add_idx(a, b as u32) as usize].add_scaled(w, m);
                }
            }
            row
        };
        weights = map_rows(size, parallel, step).concat();
    }

    let mut counts = vec![W::nothing(); size];
    for row in weights.chunks(size) {
        for (c, w) in row.iter().enumerate() {
            counts[c].add_scaled(w, 1);
        }
    }
    counts.into_iter().map(Weight::into_big).collect()
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    f()
}

pub fn census_dp(ring: &Ring, n: u32) -> Result<CountVector, CensusError> {
    census_dp_with(ring, n, &CensusOptions::default())
}

pub fn census_dp_with(ring: &Ring, n: u32, opts: &CensusOptions) -> Result<CountVector, CensusError> {
    if n == 0 {
        return Err(CensusError::ZeroDimension);
    }
    opts.budget.check(ring, n, Engine::Dp)?;
    let bound = matrix_count(ring, n);
    let parallel = opts.threads != Some(1);
    let counts = with_threads(opts.threads, || {
        if bound <= BigUint::from(u64::MAX) {
            dp_counts::<u64>(ring, n, parallel)
        } else if bound <= BigUint::from(u128::MAX) {
            dp_counts::<u128>(ring, n, parallel)
        } else {
            dp_counts::<BigUint>(ring, n, parallel)
        }
    });
    CountVector::from_parts(ring, n, Engine::Dp, counts)
}

fn naive_walk(ring: &Ring, n: u32, depth: u32, prev: u32, cur: u32, counts: &mut [u64]) {
    if depth == n {
        counts[cur as usize] += 1;
        return;
    }
    for r in 0..ring.size() {
        let shift = ring.neg_idx(ring.mul_idx(ring.mul_idx(r, r), prev));
        for x in 0..ring.size() {
            let next = ring.add_idx(ring.mul_idx(x, cur), shift);
            naive_walk(ring, n, depth + 1, cur, next, counts);
        }
    }
}

pub fn census_naive(ring: &Ring, n: u32) -> Result<CountVector, CensusError> {
    census_naive_with(ring, n, &CensusOptions::default())
}

/// Enumerates all `(x_1..x_n, r_1..r_{n-1})` and evaluates each determinant.
pub fn census_naive_with(
    ring: &Ring,
    n: u32,
    opts: &CensusOptions,
) -> Result<CountVector, CensusError> {
    if n == 0 {
        return Err(CensusError::ZeroDimension);
    }
    opts.budget.check(ring, n, Engine::Naive)?;
    let size = ring.size() as usize;
    let parallel = opts.threads != Some(1);
    let partials = with_threads(opts.threads, || {
        map_rows(size, parallel, |x1| {
            let mut counts = vec![0u64; size];
            naive_walk(ring, n, 1, 1, x1 as u32, &mut counts);
            counts
        })
    });
    let mut counts = vec![0u64; size];
    for part in partials {
        for (c, v) in counts.iter_mut().zip(part) {
            *c += v;
        }
    }
    let counts = counts.into_iter().map(BigUint::from).collect();
    CountVector::from_parts(ring, n, Engine::Naive, counts)
}

pub fn census(ring: &Ring, n: u32, engine: Engine, opts: &CensusOptions) -> Result<CountVector, CensusError> {
    match engine {
        Engine::Dp => census_dp_with(ring, n, opts),
        Engine::Naive => census_naive_with(ring, n, opts),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitZeroTotals {
    /// `|IST_n(R)|`, the number of matrices with unit determinant.
    pub ist: BigUint,
    /// `|ST_n(R, 0)|`.
    pub zero: BigUint,
}

pub fn unit_and_zero_totals(cv: &CountVector, ring: &Ring) -> Result<UnitZeroTotals, CensusError> {
    cv.belongs_to(ring)?;
    let ist = ring
        .elements()
        .filter(|&a| ring.is_unit(a))
        .map(|a| cv.get(a))
        .sum();
    Ok(UnitZeroTotals {
        ist,
        zero: cv.get(RingElement::ZERO).clone(),
    })
}

/// Entry `s` totals the counts over elements of valuation exactly `s`.
pub fn layer_histogram(cv: &CountVector, ring: &Ring) -> Result<Vec<BigUint>, CensusError> {
    cv.belongs_to(ring)?;
    let mut hist = vec![BigUint::zero(); ring.e() as usize + 1];
    for a in ring.elements() {
        hist[ring.valuation(a) as usize] += cv.get(a);
    }
    Ok(hist)
}

/// `sum_a eta(a) |ST_n(R, a)|`; rejects even residue characteristic.
pub fn character_sum(cv: &CountVector, ring: &Ring) -> Result<BigInt, CensusError> {
    cv.belongs_to(ring)?;
    let mut sum = BigInt::zero();
    for a in ring.elements() {
        match ring.quadratic_character(a)? {
            1 => sum += BigInt::from(cv.get(a).clone()),
            -1 => sum -= BigInt::from(cv.get(a).clone()),
            _ => {}
        }
    }
    Ok(sum)
}

/// Per-layer split of determinant counts by the square class of the unit factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerClassTotals {
    pub s: u32,
    /// Total over `γ^s Q(R)`.
    pub qr_total: BigUint,
    /// Total over the rest of the layer `γ^s U(R)`.
    pub nqr_total: BigUint,
    /// Count at `γ^s` itself.
    pub qr_value: BigUint,
    /// Least element of the layer outside `γ^s Q(R)`, if any.
    pub nqr_representative: Option<RingElement>,
    pub nqr_value: Option<BigUint>,
}

/// Elements of `γ^s Q(R)`, as a membership mask.
pub fn residue_multiples(ring: &Ring, s: u32) -> Vec<bool> {
    let g = ring.gamma_power(s);
    let mut mask = vec![false; ring.size() as usize];
    for b in ring.units_of_class(SquareClass::QrUnit) {
        mask[ring.mul(g, b).index()] = true;
    }
    mask
}

pub fn class_totals(cv: &CountVector, ring: &Ring) -> Result<Vec<LayerClassTotals>, CensusError> {
    cv.belongs_to(ring)?;
    (0..ring.e())
        .map(|s| {
            let mask = residue_multiples(ring, s);
            let (mut qr_total, mut nqr_total) = (BigUint::zero(), BigUint::zero());
            let mut nqr_representative = None;
            for a in ring.layer(s)? {
                if mask[a.index()] {
                    qr_total += cv.get(a);
                } else {
                    nqr_total += cv.get(a);
                    nqr_representative.get_or_insert(a);
                }
            }
            Ok(LayerClassTotals {
                s,
                qr_total,
                nqr_total,
                qr_value: cv.get(ring.gamma_power(s)).clone(),
                nqr_representative,
                nqr_value: nqr_representative.map(|b| cv.get(b).clone()),
            })
        })
        .collect()
}

/// Outcome of the structural checks every census must satisfy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub total_ok: bool,
    /// Number of `(r, a)` with `r` a unit and `counts[a] != counts[r^2 a]`;
    /// `None` when the ring is too large for the exhaustive check.
    pub conjugation_violations: Option<u64>,
    /// Whether all unit determinants have the same count; `None` for even `n`.
    pub odd_n_uniform: Option<bool>,
}

impl InvariantReport {
    pub fn holds(&self) -> bool {
        self.total_ok && self.conjugation_violations.unwrap_or(0) == 0 && self.odd_n_uniform != Some(false)
    }
}

/// Largest ring on which [`check_invariants`] runs the conjugation check.
pub const CONJUGATION_CHECK_LIMIT: u32 = 4096;

pub fn check_invariants(cv: &CountVector, ring: &Ring) -> Result<InvariantReport, CensusError> {
    cv.belongs_to(ring)?;
    let total_ok = cv.total() == matrix_count(ring, cv.n());
    let units = ring.units();
    let conjugation_violations = (ring.size() <= CONJUGATION_CHECK_LIMIT).then(|| {
        let mut bad = 0u64;
        for &r in &units {
            let r2 = ring.mul(r, r);
            for a in ring.elements() {
                if cv.get(a) != cv.get(ring.mul(r2, a)) {
                    bad += 1;
                }
            }
        }
        bad
    });
    let odd_n_uniform = (cv.n() % 2 == 1).then(|| {
        let first = cv.get(RingElement::ONE);
        units.iter().all(|&u| cv.get(u) == first)
    });
    Ok(InvariantReport {
        total_ok,
        conjugation_violations,
        odd_n_uniform,
    })
}

/// Zero-determinant counts `|ST_n(R / γ^t R, 0)|` for `t = 1..=e`, each taken
/// from a census of the quotient ring (`t = e` is `R` itself).
pub fn zero_count_profile<F, C>(ring: &Ring, n: u32, mut census_of: F) -> Result<ZeroCountProfile, CensusError>
where
    F: FnMut(&Ring) -> Result<C, CensusError>,
    C: Borrow<CountVector>,
{
    let mut profile = ZeroCountProfile::new(ring.descriptor().to_string(), n);
    let mut engines = Vec::new();
    for t in 1..=ring.e() {
        let cv = if t == ring.e() {
            census_of(ring)?
        } else {
            census_of(&ring.quotient(t)?.ring)?
        };
        let cv = cv.borrow();
        engines.push(cv.engine().to_string());
        profile.insert(t, cv.get(RingElement::ZERO).clone());
    }
    engines.dedup();
    profile.set_provenance(format!("census:{}", engines.join("+")));
    Ok(profile)
}

/// Count as a `u64`, for tests and small displays.
pub fn small(count: &BigUint) -> Option<u64> {
    count.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(s: &str) -> Ring {
        Ring::parse(s).unwrap()
    }

    fn counts(cv: &CountVector) -> Vec<u64> {
        cv.counts().iter().map(|c| c.to_u64().unwrap()).collect()
    }

    #[test]
    fn table_row_two_and_three() {
        let f5 = ring("F(5)");
        assert_eq!(counts(&census_dp(&f5, 2).unwrap()), vec![25, 30, 20, 20, 30]);
        assert_eq!(counts(&census_dp(&f5, 3).unwrap()), vec![725, 600, 600, 600, 600]);
    }

    #[test]
    fn dimension_one_is_uniform() {
        for d in ["F(7)", "Z(2^3)", "FU(2^2,2)"] {
            let r = ring(d);
            for engine in [Engine::Dp, Engine::Naive] {
                let cv = census(&r, 1, engine, &CensusOptions::default()).unwrap();
                assert!(cv.counts().iter().all(|c| c.is_one()), "{d} {engine}");
            }
        }
    }

    #[test]
    fn small_fixtures() {
        // fixed from exhaustive enumeration of all (x1, x2, r) triples
        let f3 = ring("F(3)");
        assert_eq!(counts(&census_dp(&f3, 2).unwrap()), vec![9, 6, 12]);
        let fu = ring("FU(2,2)");
        assert_eq!(counts(&census_dp(&fu, 2).unwrap()), vec![20, 20, 12, 12]);
        let f2 = ring("F(2)");
        assert_eq!(counts(&census_naive(&f2, 2).unwrap()), vec![4, 4]);
        let z4 = ring("Z(2^2)");
        assert_eq!(census_naive(&z4, 2).unwrap().total(), BigUint::from(64u32));
    }

    #[test]
    fn zero_dimension_rejected() {
        let f3 = ring("F(3)");
        assert_eq!(census_dp(&f3, 0), Err(CensusError::ZeroDimension));
        assert_eq!(census_naive(&f3, 0), Err(CensusError::ZeroDimension));
    }

    #[test]
    fn budgets() {
        let f5 = ring("F(5)");
        // 5^11 tuples is above the default naive limit
        assert!(matches!(census_naive(&f5, 6), Err(CensusError::Budget { .. })));
        let tight = CensusOptions {
            budget: Budget::with_work_limit(100),
            ..CensusOptions::default()
        };
        assert!(matches!(census_dp_with(&f5, 2, &tight), Err(CensusError::Budget { .. })));
        let z = ring("Z(3^5)");
        assert!(matches!(census_dp(&z, 2), Err(CensusError::Budget { .. })));
        let f67 = ring("F(67)");
        assert!(matches!(census_dp(&f67, 13), Err(CensusError::Budget { .. })));
        assert!(census_dp(&f67, 2).is_ok());
    }

    #[test]
    fn aggregates_f5() {
        let f5 = ring("F(5)");
        let cv = census_dp(&f5, 4).unwrap();
        let t = unit_and_zero_totals(&cv, &f5).unwrap();
        assert_eq!((t.ist, t.zero), (BigUint::from(58_000u32), BigUint::from(20_125u32)));
        let cv2 = census_dp(&f5, 2).unwrap();
        assert_eq!(character_sum(&cv2, &f5).unwrap(), BigInt::from(20));
        let classes = class_totals(&cv2, &f5).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].qr_value, BigUint::from(30u32));
        assert_eq!(classes[0].nqr_value, Some(BigUint::from(20u32)));
        assert_eq!(layer_histogram(&cv2, &f5).unwrap(), vec![BigUint::from(100u32), BigUint::from(25u32)]);
    }

    #[test]
    fn aggregates_small_rings() {
        let f3 = ring("F(3)");
        let cv = census_dp(&f3, 2).unwrap();
        assert_eq!(character_sum(&cv, &f3).unwrap(), BigInt::from(-6));
        let c = &class_totals(&cv, &f3).unwrap()[0];
        assert_eq!((c.qr_value.to_u64(), c.nqr_value.as_ref().and_then(|v| v.to_u64())), (Some(6), Some(12)));

        let fu = ring("FU(2,2)");
        let cv = census_dp(&fu, 2).unwrap();
        assert_eq!(layer_histogram(&cv, &fu).unwrap()[1], BigUint::from(12u32));
        assert!(character_sum(&cv, &fu).is_err());

        let z9 = ring("Z(3^2)");
        let cv = census_dp(&z9, 2).unwrap();
        let hist = layer_histogram(&cv, &z9).unwrap();
        assert_eq!(hist.iter().sum::<BigUint>(), BigUint::from(729u32));
        for q in [1u32, 4, 7] {
            assert_eq!(cv.get(RingElement(q)), cv.get(RingElement::ONE));
        }
    }

    #[test]
    fn mismatched_ring_is_rejected() {
        let cv = census_dp(&ring("F(3)"), 2).unwrap();
        assert!(matches!(
            unit_and_zero_totals(&cv, &ring("F(5)")),
            Err(CensusError::RingMismatch { .. })
        ));
    }

    #[test]
    fn weight_widths_agree() {
        let r = ring("Z(3^2)");
        let a = dp_counts::<u64>(&r, 4, false);
        let b = dp_counts::<u128>(&r, 4, true);
        let c = dp_counts::<BigUint>(&r, 4, true);
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn big_weights_for_large_totals() {
        // 5^39 overflows u64 and u128 holds it; 5^59 needs the bignum path
        let f5 = ring("F(5)");
        let cv = census_dp(&f5, 30).unwrap();
        assert_eq!(cv.total(), Pow::pow(BigUint::from(5u32), 59u32));
        assert!(check_invariants(&cv, &f5).unwrap().holds());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let r = ring("GR(2^2,2)");
        let one = census_dp_with(&r, 4, &CensusOptions { threads: Some(1), ..Default::default() }).unwrap();
        let four = census_dp_with(&r, 4, &CensusOptions { threads: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one, four);
    }
}
