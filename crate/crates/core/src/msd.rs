//! Magic-state distillation scheduling.
//!
//! A schedule is a list of rounds run one after another on a single factory.
//! Its tile-time is `Σ D_p·S_p` and its expected latency is `Σ S_p / P_s`,
//! where `P_s = (1 − p_raw)^{N_p}` is the round success probability.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit on `|catalog|^L` for exhaustive enumeration.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

const DEFAULT_CATALOG: &str = include_str!("../data/catalog.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Protocol {
    pub name: String,
    pub tiles: u64,
    pub steps: u64,
    pub outputs: u64,
    pub raw_inputs: u32,
    pub error_coeff: f64,
    pub error_exp: u32,
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Config("protocol name is empty".into()));
        }
        if self.tiles == 0 || self.steps == 0 || self.outputs == 0 || self.raw_inputs == 0 {
            return Err(Error::Config(format!("protocol {}: counts must be positive", self.name)));
        }
        if self.error_exp < 1 || !(self.error_coeff > 0.0 && self.error_coeff.is_finite()) {
            return Err(Error::Config(format!(
                "protocol {}: need error_exp >= 1 and a positive error_coeff",
                self.name
            )));
        }
        Ok(())
    }

    pub fn tile_time(&self) -> u64 {
        self.tiles * self.steps
    }

    pub fn output_error(&self, p: f64) -> f64 {
        self.error_coeff * p.powi(self.error_exp as i32)
    }
}

fn check_p_raw(p_raw: f64) -> Result<()> {
    if (0.0..1.0).contains(&p_raw) {
        Ok(())
    } else {
        Err(Error::Domain(format!("raw error rate {p_raw} outside [0, 1)")))
    }
}

pub fn success_probability(pr: &Protocol, p_raw: f64) -> Result<f64> {
    check_p_raw(p_raw)?;
    Ok((1.0 - p_raw).powi(pr.raw_inputs as i32))
}

/// Expected steps per delivered state.
pub fn effective_latency(pr: &Protocol, p_raw: f64) -> Result<f64> {
    Ok(pr.steps as f64 / (pr.outputs as f64 * success_probability(pr, p_raw)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(rename = "protocol")]
    protocols: Vec<Protocol>,
}

impl Catalog {
    pub fn new(protocols: Vec<Protocol>) -> Result<Self> {
        for (i, p) in protocols.iter().enumerate() {
            p.validate()?;
            if protocols[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::Config(format!("duplicate protocol {}", p.name)));
            }
        }
        Ok(Self { protocols })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            #[serde(default)]
            protocol: Vec<Protocol>,
        }
        let doc: Doc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::new(doc.protocol)
    }

    pub fn builtin() -> Self {
        Self::from_toml(DEFAULT_CATALOG).expect("bundled catalog is valid")
    }

    pub fn protocols(&self) -> &[Protocol] {
        &self.protocols
    }

    pub fn len(&self) -> usize {
        self.protocols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.protocols.is_empty()
    }

    pub fn get(&self, name: &str) -> Result<&Protocol> {
        self.index_of(name).map(|i| &self.protocols[i])
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.protocols
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::UnknownProtocol(name.to_string()))
    }

    /// Sub-catalog with the named protocols, in the given order.
    pub fn subset(&self, names: &[&str]) -> Result<Self> {
        let picked = names.iter().map(|n| self.get(n).cloned()).collect::<Result<_>>()?;
        Self::new(picked)
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::Config("protocol catalog is empty".into()))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Demand {
    states_required: u64,
    p_raw: f64,
}

impl Demand {
    pub fn new(states_required: u64, p_raw: f64) -> Result<Self> {
        if states_required == 0 {
            return Err(Error::Domain("at least one magic state must be requested".into()));
        }
        check_p_raw(p_raw)?;
        Ok(Self {
            states_required,
            p_raw,
        })
    }

    pub fn states_required(&self) -> u64 {
        self.states_required
    }

    pub fn p_raw(&self) -> f64 {
        self.p_raw
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMetrics {
    pub peak_tiles: u64,
    pub total_steps: u64,
    pub tile_time: u64,
    pub expected_latency: f64,
    pub states_delivered: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub rounds: Vec<String>,
    pub metrics: ScheduleMetrics,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "weight")]
pub enum Objective {
    Tiles,
    Latency,
    /// `w·tile_time/min_tile_time + (1−w)·latency/min_latency`, minima taken
    /// over the feasible schedules being compared.
    Balanced(f64),
}

impl Objective {
    fn validate(self) -> Result<()> {
        match self {
            Objective::Balanced(w) if !(0.0..=1.0).contains(&w) => {
                Err(Error::Domain(format!("balance weight {w} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

/// Per-protocol data in index form for the inner loops.
struct Table {
    tiles: Vec<u64>,
    steps: Vec<u64>,
    outputs: Vec<u64>,
    latency: Vec<f64>,
    names: Vec<String>,
}

impl Table {
    fn new(catalog: &Catalog, p_raw: f64) -> Result<Self> {
        let ps = catalog.protocols();
        Ok(Self {
            tiles: ps.iter().map(|p| p.tiles).collect(),
            steps: ps.iter().map(|p| p.steps).collect(),
            outputs: ps.iter().map(|p| p.outputs).collect(),
            latency: ps
                .iter()
                .map(|p| Ok(p.steps as f64 / success_probability(p, p_raw)?))
                .collect::<Result<_>>()?,
            names: ps.iter().map(|p| p.name.clone()).collect(),
        })
    }

    fn metrics(&self, rounds: &[usize]) -> ScheduleMetrics {
        let mut m = ScheduleMetrics {
            peak_tiles: 0,
            total_steps: 0,
            tile_time: 0,
            expected_latency: 0.0,
            states_delivered: 0,
        };
        for &r in rounds {
            m.peak_tiles = m.peak_tiles.max(self.tiles[r]);
            m.total_steps += self.steps[r];
            m.tile_time += self.tiles[r] * self.steps[r];
            m.expected_latency += self.latency[r];
            m.states_delivered += self.outputs[r];
        }
        m
    }

    fn schedule(&self, rounds: &[usize], demand: &Demand) -> Schedule {
        let metrics = self.metrics(rounds);
        Schedule {
            rounds: rounds.iter().map(|&r| self.names[r].clone()).collect(),
            feasible: metrics.states_delivered >= demand.states_required,
            metrics,
        }
    }
}

pub fn evaluate(catalog: &Catalog, rounds: &[&str], demand: &Demand) -> Result<Schedule> {
    let idx = rounds.iter().map(|n| catalog.index_of(n)).collect::<Result<Vec<_>>>()?;
    Ok(Table::new(catalog, demand.p_raw)?.schedule(&idx, demand))
}

/// Re-evaluates a schedule's round list.
pub fn reevaluate(catalog: &Catalog, schedule: &Schedule, demand: &Demand) -> Result<Schedule> {
    let names: Vec<&str> = schedule.rounds.iter().map(String::as_str).collect();
    evaluate(catalog, &names, demand)
}

struct Candidate {
    rounds: Vec<usize>,
    metrics: ScheduleMetrics,
}

fn lex(table: &Table, a: &[usize], b: &[usize]) -> Ordering {
    a.iter().map(|&r| &table.names[r]).cmp(b.iter().map(|&r| &table.names[r]))
}

/// Total order used by every exhaustive search; smaller is better.
fn compare(table: &Table, objective: Objective, norm: (f64, f64), a: &Candidate, b: &Candidate) -> Ordering {
    let (ma, mb) = (&a.metrics, &b.metrics);
    let primary = match objective {
        Objective::Tiles => ma.tile_time.cmp(&mb.tile_time).then(ma.total_steps.cmp(&mb.total_steps)),
        Objective::Latency => ma
            .expected_latency
            .total_cmp(&mb.expected_latency)
            .then(ma.tile_time.cmp(&mb.tile_time)),
        Objective::Balanced(w) => {
            let score = |m: &ScheduleMetrics| w * m.tile_time as f64 / norm.0 + (1.0 - w) * m.expected_latency / norm.1;
            score(ma).total_cmp(&score(mb)).then(ma.tile_time.cmp(&mb.tile_time))
        }
    };
    primary.then_with(|| lex(table, &a.rounds, &b.rounds))
}

fn decode_sequence(mut index: u64, base: usize, len: usize) -> Vec<usize> {
    let mut rounds = vec![0; len];
    for slot in rounds.iter_mut().rev() {
        *slot = (index % base as u64) as usize;
        index /= base as u64;
    }
    rounds
}

fn feasible_sequences<'a>(
    table: &'a Table,
    demand: &'a Demand,
    max_rounds: usize,
) -> impl ParallelIterator<Item = Candidate> + 'a {
    let base = table.names.len();
    (1..=max_rounds).into_par_iter().flat_map(move |len| {
        let total = (base as u64).pow(len as u32);
        (0..total).into_par_iter().filter_map(move |index| {
            let rounds = decode_sequence(index, base, len);
            let metrics = table.metrics(&rounds);
            (metrics.states_delivered >= demand.states_required).then_some(Candidate { rounds, metrics })
        })
    })
}

/// Exhaustive search over all round sequences of length `1..=max_rounds`.
pub fn brute_force(catalog: &Catalog, demand: &Demand, max_rounds: usize, objective: Objective) -> Result<Schedule> {
    catalog.require_nonempty()?;
    objective.validate()?;
    let size = (catalog.len() as u64).checked_pow(max_rounds as u32);
    if size.is_none_or(|s| s > BRUTE_FORCE_LIMIT) {
        return Err(Error::Guard(format!(
            "{} protocols over {max_rounds} rounds exceeds the enumeration limit of {BRUTE_FORCE_LIMIT}",
            catalog.len()
        )));
    }
    let table = Table::new(catalog, demand.p_raw)?;

    let norm = match objective {
        Objective::Balanced(_) => feasible_sequences(&table, demand, max_rounds)
            .map(|c| (c.metrics.tile_time as f64, c.metrics.expected_latency))
            .reduce(|| (f64::INFINITY, f64::INFINITY), |a, b| (a.0.min(b.0), a.1.min(b.1))),
        _ => (1.0, 1.0),
    };
    let best = feasible_sequences(&table, demand, max_rounds).min_by(|a, b| compare(&table, objective, norm, a, b));
    best.map(|c| table.schedule(&c.rounds, demand)).ok_or_else(|| infeasible(demand, max_rounds))
}

fn infeasible(demand: &Demand, max_rounds: usize) -> Error {
    Error::Infeasible(format!(
        "no schedule of at most {max_rounds} rounds delivers {} states",
        demand.states_required
    ))
}

#[derive(Clone, Copy)]
struct Cell {
    cost: f64,
    steps: u64,
    parent: (usize, usize),
}

/// Dynamic program over (rounds used, states delivered capped at M).
///
/// `C(i, s) = min_p C(i−1, s') + c_p` where `s = min(M, s' + k_p)`. Per-round
/// costs are additive for all three objectives; the balanced objective first
/// solves the tiles and latency programs to obtain its normalisers. Rounds
/// are returned in lexicographic order, which leaves every metric unchanged.
pub fn dp_schedule(catalog: &Catalog, demand: &Demand, max_rounds: usize, objective: Objective) -> Result<Schedule> {
    catalog.require_nonempty()?;
    objective.validate()?;
    let table = Table::new(catalog, demand.p_raw)?;
    let tiles: Vec<f64> = table.tiles.iter().zip(&table.steps).map(|(d, s)| (d * s) as f64).collect();
    let rounds = match objective {
        Objective::Tiles => dp_solve(&table, demand, max_rounds, &tiles),
        Objective::Latency => dp_solve(&table, demand, max_rounds, &table.latency),
        Objective::Balanced(w) => {
            let t_min = dp_solve(&table, demand, max_rounds, &tiles).map(|r| table.metrics(&r).tile_time as f64);
            let l_min = dp_solve(&table, demand, max_rounds, &table.latency).map(|r| table.metrics(&r).expected_latency);
            match (t_min, l_min) {
                (Some(t), Some(l)) => {
                    let cost: Vec<f64> = tiles
                        .iter()
                        .zip(&table.latency)
                        .map(|(tt, lat)| w * tt / t + (1.0 - w) * lat / l)
                        .collect();
                    dp_solve(&table, demand, max_rounds, &cost)
                }
                _ => None,
            }
        }
    };
    let mut rounds = rounds.ok_or_else(|| infeasible(demand, max_rounds))?;
    rounds.sort_by(|a, b| table.names[*a].cmp(&table.names[*b]));
    Ok(table.schedule(&rounds, demand))
}

fn dp_solve(table: &Table, demand: &Demand, max_rounds: usize, cost: &[f64]) -> Option<Vec<usize>> {
    let m = demand.states_required as usize;
    let mut rows: Vec<Vec<Option<Cell>>> = vec![vec![None; m + 1]];
    rows[0][0] = Some(Cell {
        cost: 0.0,
        steps: 0,
        parent: (0, 0),
    });
    let better = |new: &Cell, old: &Option<Cell>| match old {
        None => true,
        Some(o) => new.cost.total_cmp(&o.cost).then(new.steps.cmp(&o.steps)) == Ordering::Less,
    };
    for _ in 0..max_rounds {
        let prev = rows.last().expect("row 0 exists");
        let mut next: Vec<Option<Cell>> = vec![None; m + 1];
        for (s, cell) in prev.iter().enumerate().take(m) {
            let Some(cell) = *cell else { continue };
            for (p, &c) in cost.iter().enumerate() {
                let t = (s + table.outputs[p] as usize).min(m);
                let cand = Cell {
                    cost: cell.cost + c,
                    steps: cell.steps + table.steps[p],
                    parent: (s, p),
                };
                if better(&cand, &next[t]) {
                    next[t] = Some(cand);
                }
            }
        }
        rows.push(next);
    }

    let mut end: Option<(usize, Cell)> = None;
    for (i, row) in rows.iter().enumerate().skip(1) {
        if let Some(cell) = row[m] {
            if end.is_none_or(|(_, e)| better(&cell, &Some(e))) {
                end = Some((i, cell));
            }
        }
    }
    let (mut i, mut cell) = end?;
    let mut rounds = Vec::with_capacity(i);
    loop {
        let (s, p) = cell.parent;
        rounds.push(p);
        i -= 1;
        if i == 0 {
            break;
        }
        cell = rows[i][s].expect("parent cell is populated");
    }
    rounds.reverse();
    Some(rounds)
}

/// Repeats `argmin_p (D_p/k_p + S_p)` (ties by name) until the demand is met.
pub fn greedy_schedule(catalog: &Catalog, demand: &Demand) -> Result<Schedule> {
    catalog.require_nonempty()?;
    let table = Table::new(catalog, demand.p_raw)?;
    let criterion = |p: &Protocol| p.tiles as f64 / p.outputs as f64 + p.steps as f64;
    let best = (0..catalog.len())
        .min_by(|&a, &b| {
            let (pa, pb) = (&catalog.protocols[a], &catalog.protocols[b]);
            criterion(pa).total_cmp(&criterion(pb)).then_with(|| pa.name.cmp(&pb.name))
        })
        .expect("catalog is non-empty");
    Ok(table.schedule(&repeat_until_met(&table, best, demand), demand))
}

/// Picks one protocol uniformly at random and repeats it until the demand is met.
pub fn random_baseline(catalog: &Catalog, demand: &Demand, seed: u64) -> Result<Schedule> {
    catalog.require_nonempty()?;
    let table = Table::new(catalog, demand.p_raw)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = rng.gen_range(0..catalog.len());
    Ok(table.schedule(&repeat_until_met(&table, pick, demand), demand))
}

fn repeat_until_met(table: &Table, p: usize, demand: &Demand) -> Vec<usize> {
    let k = table.outputs[p];
    vec![p; demand.states_required.div_ceil(k) as usize]
}
