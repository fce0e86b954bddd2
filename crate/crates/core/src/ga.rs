//! Genetic search over disjoint merge sets for one merging round.
//!
//! Chromosomes are sorted lists of candidate ranks (rank 0 is the best-scored
//! mergeable pair). Every individual draws from its own ChaCha stream keyed by
//! `(seed, round, generation, index)`, so offspring can be produced on any
//! number of worker threads with identical results.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::layers::{Candidates, GaConfig};

pub(crate) struct Outcome {
    pub best: Vec<usize>,
    pub greedy_size: usize,
    pub history: Vec<usize>,
}

fn stream_rng(seed: u64, round: u64, generation: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix(splitmix(splitmix(round) ^ generation) ^ index));
    rng
}

pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Ops<'a> {
    c: &'a Candidates,
}

impl Ops<'_> {
    fn random_matching(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.c.len()).collect();
        order.shuffle(rng);
        self.complete(Vec::new(), order)
    }

    /// Adds ranks from `order` whose endpoints are still free.
    fn complete(&self, kept: Vec<usize>, order: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut used = vec![false; self.c.depth];
        for &rank in &kept {
            let (i, j) = self.c.pair(rank);
            used[i] = true;
            used[j] = true;
        }
        let mut chosen = kept;
        self.c.fill(&mut used, &mut chosen, order);
        chosen.sort_unstable();
        chosen
    }

    /// Union of both parents; conflicts resolved in favour of higher scores.
    fn crossover(&self, a: &[usize], b: &[usize]) -> Vec<usize> {
        let mut union: Vec<usize> = a.iter().chain(b).copied().collect();
        union.sort_unstable();
        union.dedup();
        self.complete(Vec::new(), union)
    }

    /// Drops a random subset of pairs and refills the freed layers.
    fn mutate(&self, genes: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
        let kept: Vec<usize> = genes.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let mut order: Vec<usize> = (0..self.c.len()).collect();
        order.shuffle(rng);
        self.complete(kept, order)
    }
}

fn tournament<'p>(pop: &'p [Vec<usize>], rng: &mut ChaCha8Rng) -> &'p Vec<usize> {
    // `pop` is sorted best-first, so the smaller index wins.
    let a = rng.gen_range(0..pop.len());
    let b = rng.gen_range(0..pop.len());
    &pop[a.min(b)]
}

fn rank_population(pop: &mut [Vec<usize>]) {
    pop.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
}

pub(crate) fn evolve(c: &Candidates, cfg: &GaConfig, round: u64) -> Outcome {
    let ops = Ops { c };
    let greedy = c.greedy_ranks();
    let greedy_size = greedy.len();

    let mut touched = vec![false; c.depth];
    for rank in 0..c.len() {
        let (i, j) = c.pair(rank);
        touched[i] = true;
        touched[j] = true;
    }
    let upper_bound = touched.iter().filter(|&&t| t).count() / 2;

    let mut population: Vec<Vec<usize>> = std::iter::once(greedy)
        .chain((1..cfg.population_size).into_par_iter().map(|idx| {
            let mut rng = stream_rng(cfg.seed, round, 0, idx as u64);
            ops.random_matching(&mut rng)
        }).collect::<Vec<_>>())
        .collect();
    rank_population(&mut population);

    let mut best = population[0].clone();
    let mut history = vec![best.len()];
    let mut stale = 0;
    for generation in 1..=cfg.max_generations as u64 {
        if best.len() >= upper_bound || stale >= cfg.stagnation_limit {
            break;
        }
        let elites = cfg.elite_k.min(population.len());
        let offspring: Vec<Vec<usize>> = (elites..cfg.population_size)
            .into_par_iter()
            .map(|idx| {
                let mut rng = stream_rng(cfg.seed, round, generation, idx as u64);
                let first = tournament(&population, &mut rng);
                let mut child = if rng.gen_bool(cfg.crossover_rate) {
                    let second = tournament(&population, &mut rng);
                    ops.crossover(first, second)
                } else {
                    first.clone()
                };
                if rng.gen_bool(cfg.mutation_rate) {
                    child = ops.mutate(&child, &mut rng);
                }
                child
            })
            .collect();
        let mut next: Vec<Vec<usize>> = population[..elites].to_vec();
        next.extend(offspring);
        rank_population(&mut next);
        population = next;

        if population[0].len() > best.len() {
            best = population[0].clone();
            stale = 0;
        } else {
            stale += 1;
        }
        history.push(best.len());
    }
    Outcome {
        best,
        greedy_size,
        history,
    }
}
