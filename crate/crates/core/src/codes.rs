//! Stabilizer codes, lookup-table decoding and Monte Carlo sampling.
//!
//! Syndromes are computed algebraically: bit `i` is set when the error
//! anticommutes with generator `i`. One perfect measurement round is assumed.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::pauli::{independent, Pauli, PauliString, SymplecticBasis};

/// Largest generator count accepted by [`build_lookup`].
pub const MAX_LOOKUP_GENERATORS: usize = 24;
/// Shots per independently seeded Monte Carlo shard.
pub const SHARD_SHOTS: u64 = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizerCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub distance: usize,
    pub generators: Vec<PauliString>,
    pub logical_x: Vec<PauliString>,
    pub logical_z: Vec<PauliString>,
}

impl StabilizerCode {
    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }
}

/// Outcome of each structural rule checked by [`validate_code`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Every operator is a Hermitian Pauli string on `n` qubits.
    pub pauli_strings: bool,
    pub generators_commute: bool,
    pub generators_independent: bool,
    /// `m == n − k` with `k` logical pairs.
    pub counts_consistent: bool,
    /// Every logical operator commutes with every generator.
    pub logicals_commute_with_stabilizers: bool,
    /// `X̄_i` anticommutes with `Z̄_i` and commutes with the other logicals.
    pub logical_pairs: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.pauli_strings
            && self.generators_commute
            && self.generators_independent
            && self.counts_consistent
            && self.logicals_commute_with_stabilizers
            && self.logical_pairs
    }
}

pub fn validate_code(c: &StabilizerCode) -> ValidationReport {
    let all = || c.generators.iter().chain(&c.logical_x).chain(&c.logical_z);
    let pauli_strings = all().all(|p| p.num_qubits() == c.n && p.is_hermitian());
    if !pauli_strings {
        return ValidationReport {
            pauli_strings,
            generators_commute: false,
            generators_independent: false,
            counts_consistent: false,
            logicals_commute_with_stabilizers: false,
            logical_pairs: false,
        };
    }
    let comm = |a: &PauliString, b: &PauliString| a.commutes_unchecked(b);
    let gens = &c.generators;
    let generators_commute = gens
        .iter()
        .enumerate()
        .all(|(i, a)| gens[i + 1..].iter().all(|b| comm(a, b)));
    let generators_independent = independent(gens).unwrap_or(false);
    let counts_consistent = c.logical_x.len() == c.k
        && c.logical_z.len() == c.k
        && c.k <= c.n
        && gens.len() == c.n - c.k;
    let logicals_commute_with_stabilizers = c
        .logical_x
        .iter()
        .chain(&c.logical_z)
        .all(|l| gens.iter().all(|g| comm(l, g)));
    let logical_pairs = c.logical_x.len() == c.logical_z.len()
        && (0..c.logical_x.len()).all(|i| {
            (0..c.logical_x.len()).all(|j| {
                comm(&c.logical_x[i], &c.logical_z[j]) == (i != j)
                    && comm(&c.logical_x[i], &c.logical_x[j])
                    && comm(&c.logical_z[i], &c.logical_z[j])
            })
        });
    ValidationReport {
        pauli_strings,
        generators_commute,
        generators_independent,
        counts_consistent,
        logicals_commute_with_stabilizers,
        logical_pairs,
    }
}

fn check_odd_size(what: &str, v: usize) -> Result<()> {
    if v < 3 || v.is_multiple_of(2) {
        Err(Error::InvalidCode(format!("{what} must be odd and at least 3, got {v}")))
    } else {
        Ok(())
    }
}

fn on_qubits(n: usize, qubits: &[usize], letter: Pauli) -> PauliString {
    let mut p = PauliString::identity(n);
    for &q in qubits {
        p.set(q, letter);
    }
    p
}

/// Bit-flip repetition code with checks `Z_i Z_{i+1}`.
pub fn repetition_code(n: usize) -> Result<StabilizerCode> {
    check_odd_size("repetition code length", n)?;
    Ok(StabilizerCode {
        name: format!("rep{n}"),
        n,
        k: 1,
        distance: n,
        generators: (0..n - 1).map(|i| on_qubits(n, &[i, i + 1], Pauli::Z)).collect(),
        logical_x: vec![on_qubits(n, &(0..n).collect::<Vec<_>>(), Pauli::X)],
        logical_z: vec![PauliString::single(n, 0, Pauli::Z)],
    })
}

/// Rotated surface code on a `d × d` grid, data qubit `(r, c)` at index `r·d + c`.
///
/// Face `(i, j)` for `0 ≤ i, j ≤ d` touches the data qubits `(i−1..=i, j−1..=j)`
/// inside the grid and is X-type when `i + j` is even. Bulk faces are all
/// kept; weight-2 faces are kept on the top and bottom edges when X-type and on
/// the left and right edges when Z-type. `X̄` runs down column 0 and `Z̄`
/// along row 0.
pub fn rotated_surface_code(d: usize) -> Result<StabilizerCode> {
    check_odd_size("surface code distance", d)?;
    let n = d * d;
    let mut x_checks = Vec::new();
    let mut z_checks = Vec::new();
    for i in 0..=d {
        for j in 0..=d {
            let x_type = (i + j) % 2 == 0;
            let bulk = (1..d).contains(&i) && (1..d).contains(&j);
            let keep = if bulk {
                true
            } else if (i == 0 || i == d) && (1..d).contains(&j) {
                x_type
            } else if (j == 0 || j == d) && (1..d).contains(&i) {
                !x_type
            } else {
                false
            };
            if !keep {
                continue;
            }
            let qubits: Vec<usize> = [(i.wrapping_sub(1), j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j.wrapping_sub(1)), (i, j)]
                .into_iter()
                .filter(|&(r, c)| r < d && c < d)
                .map(|(r, c)| r * d + c)
                .collect();
            if x_type {
                x_checks.push(on_qubits(n, &qubits, Pauli::X));
            } else {
                z_checks.push(on_qubits(n, &qubits, Pauli::Z));
            }
        }
    }
    x_checks.extend(z_checks);
    Ok(StabilizerCode {
        name: format!("surface{d}"),
        n,
        k: 1,
        distance: d,
        generators: x_checks,
        logical_x: vec![on_qubits(n, &(0..d).map(|r| r * d).collect::<Vec<_>>(), Pauli::X)],
        logical_z: vec![on_qubits(n, &(0..d).collect::<Vec<_>>(), Pauli::Z)],
    })
}

/// Named constructors: `rep<n>` and `surface<d>`.
pub fn code_by_name(name: &str) -> Result<StabilizerCode> {
    let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::InvalidCode(format!("unknown code `{name}`")));
    if let Some(n) = name.strip_prefix("rep") {
        repetition_code(parse(n)?)
    } else if let Some(d) = name.strip_prefix("surface") {
        rotated_surface_code(parse(d)?)
    } else {
        Err(Error::InvalidCode(format!("unknown code `{name}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome {
    pub bits: Vec<bool>,
}

impl Syndrome {
    pub fn zeros(m: usize) -> Self {
        Self { bits: vec![false; m] }
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|b| !b)
    }

    fn key(&self) -> u64 {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| 1u64 << i).sum()
    }
}

impl std::fmt::Display for Syndrome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.bits.iter().try_for_each(|&b| write!(f, "{}", u8::from(b)))
    }
}

pub fn syndrome(c: &StabilizerCode, e: &PauliString) -> Result<Syndrome> {
    check_dim(c.n, e.num_qubits())?;
    Ok(Syndrome {
        bits: c.generators.iter().map(|g| !g.commutes_unchecked(e)).collect(),
    })
}

/// Syndrome packed as bits of an integer, bit `i` for generator `i`.
fn syndrome_key(c: &StabilizerCode, e: &PauliString) -> u64 {
    c.generators
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.commutes_unchecked(e))
        .map(|(i, _)| 1u64 << i)
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookupDecoder {
    m: usize,
    n: usize,
    max_weight: usize,
    table: HashMap<u64, PauliString>,
}

impl LookupDecoder {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    /// Entries sorted by syndrome bits, generator 0 first.
    pub fn entries(&self) -> Vec<(Syndrome, PauliString)> {
        let mut out: Vec<(Syndrome, PauliString)> = self
            .table
            .iter()
            .map(|(&key, corr)| {
                let bits = (0..self.m).map(|i| key >> i & 1 == 1).collect();
                (Syndrome { bits }, corr.clone())
            })
            .collect();
        out.sort_by(|a, b| a.0.bits.cmp(&b.0.bits));
        out
    }
}

/// Calls `visit` on every Pauli error of weight `w`: supports in lexicographic
/// order and, on each support, letters in lexicographic order with `X < Y < Z`.
fn for_each_error_of_weight(n: usize, w: usize, visit: &mut impl FnMut(&PauliString)) {
    fn rec(n: usize, w: usize, start: usize, p: &mut PauliString, visit: &mut impl FnMut(&PauliString)) {
        if w == 0 {
            visit(p);
            return;
        }
        for q in start..=n - w {
            for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
                p.set(q, letter);
                rec(n, w - 1, q + 1, p, visit);
            }
            p.set(q, Pauli::I);
        }
    }
    if w <= n {
        rec(n, w, 0, &mut PauliString::identity(n), visit);
    }
}

/// Minimum-weight lookup table: the first error found for each syndrome, in
/// order of increasing weight, becomes its correction.
pub fn build_lookup(c: &StabilizerCode, max_weight: usize) -> Result<LookupDecoder> {
    let m = c.num_generators();
    if m > MAX_LOOKUP_GENERATORS {
        return Err(Error::Guard(format!(
            "lookup tables limited to {MAX_LOOKUP_GENERATORS} generators, code has {m}"
        )));
    }
    let mut table = HashMap::new();
    table.insert(0, PauliString::identity(c.n));
    for w in 1..=max_weight.min(c.n) {
        if table.len() == 1 << m {
            break;
        }
        for_each_error_of_weight(c.n, w, &mut |e| {
            table.entry(syndrome_key(c, e)).or_insert_with(|| e.clone());
        });
    }
    Ok(LookupDecoder {
        m,
        n: c.n,
        max_weight,
        table,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoded {
    Correction(PauliString),
    Uncorrectable,
}

pub fn decode(dec: &LookupDecoder, s: &Syndrome) -> Result<Decoded> {
    check_dim(dec.m, s.bits.len())?;
    Ok(dec
        .table
        .get(&s.key())
        .map_or(Decoded::Uncorrectable, |c| Decoded::Correction(c.clone())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualClass {
    Success,
    LogicalError,
    Uncorrected,
}

/// Classifier with the stabilizer group precomputed.
pub struct Classifier<'a> {
    code: &'a StabilizerCode,
    span: SymplecticBasis,
}

impl<'a> Classifier<'a> {
    pub fn new(code: &'a StabilizerCode) -> Result<Self> {
        Ok(Self {
            code,
            span: SymplecticBasis::from_generators(&code.generators)?,
        })
    }

    pub fn classify(&self, e: &PauliString, corr: &PauliString) -> Result<ResidualClass> {
        check_dim(self.code.n, e.num_qubits())?;
        check_dim(self.code.n, corr.num_qubits())?;
        let r = corr.mul_unchecked(e);
        Ok(if syndrome_key(self.code, &r) != 0 {
            ResidualClass::Uncorrected
        } else if self.span.contains(&r)? {
            ResidualClass::Success
        } else {
            ResidualClass::LogicalError
        })
    }
}

pub fn residual_class(c: &StabilizerCode, e: &PauliString, corr: &PauliString) -> Result<ResidualClass> {
    Classifier::new(c)?.classify(e, corr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "p")]
pub enum NoiseModel {
    /// `X` on each qubit with probability `p`.
    Bitflip(f64),
    /// `X`, `Y`, `Z` on each qubit with probability `p/3` each.
    Depolarizing(f64),
}

impl NoiseModel {
    pub fn p(self) -> f64 {
        match self {
            NoiseModel::Bitflip(p) | NoiseModel::Depolarizing(p) => p,
        }
    }

    fn validate(self) -> Result<()> {
        let p = self.p();
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(Error::Domain(format!("noise probability {p} outside [0, 1]")))
        }
    }

    fn sample<R: Rng>(self, n: usize, rng: &mut R) -> PauliString {
        let mut e = PauliString::identity(n);
        for q in 0..n {
            match self {
                NoiseModel::Bitflip(p) => {
                    if rng.gen::<f64>() < p {
                        e.set(q, Pauli::X);
                    }
                }
                NoiseModel::Depolarizing(p) => {
                    if rng.gen::<f64>() < p {
                        e.set(q, [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)]);
                    }
                }
            }
        }
        e
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub success: u64,
    pub logical_error: u64,
    /// Syndrome missing from the table.
    pub uncorrectable: u64,
    /// Correction left a nonzero syndrome.
    pub uncorrected: u64,
}

impl ClassCounts {
    fn add(self, o: Self) -> Self {
        Self {
            success: self.success + o.success,
            logical_error: self.logical_error + o.logical_error,
            uncorrectable: self.uncorrectable + o.uncorrectable,
            uncorrected: self.uncorrected + o.uncorrected,
        }
    }

    pub fn failures(&self) -> u64 {
        self.logical_error + self.uncorrectable + self.uncorrected
    }

    pub fn total(&self) -> u64 {
        self.success + self.failures()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub shots: u64,
    pub seed: u64,
    pub counts: ClassCounts,
    pub p_logical: f64,
    /// 95% Wilson score interval.
    pub wilson_95: (f64, f64),
}

/// Wilson score interval for `k` successes in `n` trials at `z` standard errors.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let phat = k / n;
    let z2 = z * z;
    let centre = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn run_shard(
    classifier: &Classifier<'_>,
    dec: &LookupDecoder,
    noise: NoiseModel,
    shots: u64,
    seed: u64,
    shard: u64,
) -> ClassCounts {
    let code = classifier.code;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut counts = ClassCounts::default();
    for _ in 0..shots {
        let e = noise.sample(code.n, &mut rng);
        match dec.table.get(&syndrome_key(code, &e)) {
            None => counts.uncorrectable += 1,
            Some(corr) => match classifier.classify(&e, corr).expect("dimensions match") {
                ResidualClass::Success => counts.success += 1,
                ResidualClass::LogicalError => counts.logical_error += 1,
                ResidualClass::Uncorrected => counts.uncorrected += 1,
            },
        }
    }
    counts
}

/// Monte Carlo estimate of the logical failure rate on the current rayon pool.
///
/// Shots are split into shards of [`SHARD_SHOTS`]; shard `i` draws from
/// ChaCha stream `i` of `seed`, so counts do not depend on the worker count.
pub fn monte_carlo(
    c: &StabilizerCode,
    dec: &LookupDecoder,
    noise: NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<MonteCarloResult> {
    noise.validate()?;
    check_dim(c.n, dec.n)?;
    check_dim(c.num_generators(), dec.m)?;
    if shots == 0 {
        return Err(Error::Domain("at least one shot is required".into()));
    }
    let classifier = Classifier::new(c)?;
    let shards = shots.div_ceil(SHARD_SHOTS);
    let counts = (0..shards)
        .into_par_iter()
        .map(|s| {
            let n = SHARD_SHOTS.min(shots - s * SHARD_SHOTS);
            run_shard(&classifier, dec, noise, n, seed, s)
        })
        .reduce(ClassCounts::default, ClassCounts::add);
    let failures = counts.failures();
    Ok(MonteCarloResult {
        shots,
        seed,
        counts,
        p_logical: failures as f64 / shots as f64,
        wilson_95: wilson_interval(failures, shots, 1.96),
    })
}

/// [`monte_carlo`] on a dedicated pool of `workers` threads.
pub fn monte_carlo_with_workers(
    c: &StabilizerCode,
    dec: &LookupDecoder,
    noise: NoiseModel,
    shots: u64,
    seed: u64,
    workers: usize,
) -> Result<MonteCarloResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| monte_carlo(c, dec, noise, shots, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn constructors_validate() {
        let rep3 = repetition_code(3).unwrap();
        assert_eq!(rep3.generators, vec![ps("ZZI"), ps("IZZ")]);
        assert_eq!(repetition_code(5).unwrap().num_generators(), 4);
        assert!(repetition_code(2).is_err());
        assert!(repetition_code(4).is_err());
        for d in [3, 5, 7] {
            let c = rotated_surface_code(d).unwrap();
            assert_eq!(c.n, d * d);
            assert_eq!(c.num_generators(), d * d - 1);
            let x = c.generators.iter().filter(|g| g.letters().any(|l| l == Pauli::X)).count();
            assert_eq!(x, (d * d - 1) / 2);
            assert!(validate_code(&c).passed(), "d={d}: {:?}", validate_code(&c));
        }
        assert!(validate_code(&rep3).passed());
        assert!(rotated_surface_code(4).is_err());
    }

    #[test]
    fn validation_failures() {
        let bad = StabilizerCode {
            name: "xz".into(),
            n: 1,
            k: 0,
            distance: 1,
            generators: vec![ps("X"), ps("Z")],
            logical_x: vec![],
            logical_z: vec![],
        };
        assert!(!validate_code(&bad).generators_commute);
        let mut dup = repetition_code(3).unwrap();
        dup.generators[1] = dup.generators[0].clone();
        let r = validate_code(&dup);
        assert!(r.generators_commute && !r.generators_independent);
    }

    #[test]
    fn rep3_table() {
        let c = repetition_code(3).unwrap();
        let dec = build_lookup(&c, 1).unwrap();
        let entries: Vec<(String, String)> = dec.entries().into_iter().map(|(s, p)| (s.to_string(), p.to_string())).collect();
        assert_eq!(
            entries,
            vec![
                ("00".into(), "+III".into()),
                ("01".into(), "+IIX".into()),
                ("10".into(), "+XII".into()),
                ("11".into(), "+IXI".into()),
            ]
        );
        assert_eq!(syndrome(&c, &ps("IXI")).unwrap().to_string(), "11");
        let s = Syndrome { bits: vec![false, true] };
        assert_eq!(decode(&dec, &s).unwrap(), Decoded::Correction(ps("IIX")));
        assert!(decode(&dec, &Syndrome::zeros(3)).is_err());
        assert_eq!(build_lookup(&c, 0).unwrap().len(), 1);
    }

    #[test]
    fn residual_classes() {
        let c = repetition_code(3).unwrap();
        assert_eq!(residual_class(&c, &ps("XII"), &ps("XII")).unwrap(), ResidualClass::Success);
        assert_eq!(residual_class(&c, &ps("XXX"), &ps("III")).unwrap(), ResidualClass::LogicalError);
        assert_eq!(residual_class(&c, &ps("XII"), &ps("III")).unwrap(), ResidualClass::Uncorrected);
        assert!(residual_class(&c, &ps("XI"), &ps("III")).is_err());
    }

    #[test]
    fn surface3_uncorrectable_syndrome() {
        let c = rotated_surface_code(3).unwrap();
        let dec = build_lookup(&c, 1).unwrap();
        let mut missing = None;
        for_each_error_of_weight(9, 2, &mut |e| {
            let s = syndrome(&c, e).unwrap();
            if missing.is_none() && decode(&dec, &s).unwrap() == Decoded::Uncorrectable {
                missing = Some(s);
            }
        });
        assert!(missing.is_some());
    }

    #[test]
    fn wilson_sanity() {
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5 && lo > 0.39 && hi < 0.61);
        assert_eq!(wilson_interval(0, 10, 1.96).0, 0.0);
    }

    #[test]
    fn zero_noise_and_guard() {
        let c = repetition_code(3).unwrap();
        let dec = build_lookup(&c, 1).unwrap();
        let r = monte_carlo(&c, &dec, NoiseModel::Bitflip(0.0), 1000, 1).unwrap();
        assert_eq!(r.p_logical, 0.0);
        assert_eq!(r.counts.success, 1000);
        assert!(monte_carlo(&c, &dec, NoiseModel::Bitflip(1.5), 10, 1).is_err());
        assert!(build_lookup(&rotated_surface_code(7).unwrap(), 1).is_err());
        assert!(code_by_name("surface3").is_ok());
        assert!(code_by_name("steane").is_err());
    }
}
