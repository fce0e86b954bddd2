//! Commuting-layer partitions of pi/8 rotations and layer merging.
//!
//! A [`Layering`] lists layers in time order; rotations inside a layer commute
//! pairwise. Layer `j` may be merged into an earlier layer `i` when every
//! rotation of `j` commutes with every rotation in layers `i..j`, which lets it
//! slide back across the intermediate layers without changing the unitary.

use serde::{Deserialize, Serialize};

use crate::circuit::PauliRotation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LayeringRepr", into = "LayeringRepr")]
pub struct Layering {
    n: usize,
    rotations: Vec<PauliRotation>,
    layers: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayeringRepr {
    n: usize,
    layers: Vec<Vec<PauliRotation>>,
}

impl TryFrom<LayeringRepr> for Layering {
    type Error = Error;

    fn try_from(r: LayeringRepr) -> Result<Self> {
        Layering::from_layers(r.n, r.layers)
    }
}

impl From<Layering> for LayeringRepr {
    fn from(l: Layering) -> Self {
        LayeringRepr {
            n: l.n,
            layers: (0..l.depth()).map(|i| l.layer_rotations(i).cloned().collect()).collect(),
        }
    }
}

impl Layering {
    pub fn new(n: usize, rotations: Vec<PauliRotation>, layers: Vec<Vec<usize>>) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidLayering(m));
        for r in &rotations {
            if r.num_qubits() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: r.num_qubits(),
                });
            }
            if !r.is_pi8() {
                return Err(Error::NotPi8);
            }
        }
        let mut seen = vec![false; rotations.len()];
        for layer in &layers {
            if layer.is_empty() {
                return invalid("empty layer".into());
            }
            for &idx in layer {
                match seen.get_mut(idx) {
                    Some(s) if !*s => *s = true,
                    Some(_) => return invalid(format!("rotation {idx} appears twice")),
                    None => return invalid(format!("rotation index {idx} out of range")),
                }
            }
            for (a, &ia) in layer.iter().enumerate() {
                for &ib in &layer[a + 1..] {
                    if !rotations[ia].commutes_with(&rotations[ib]) {
                        return invalid(format!("rotations {ia} and {ib} share a layer but anticommute"));
                    }
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return invalid(format!("rotation {missing} is not in any layer"));
        }
        Ok(Self {
            n,
            rotations,
            layers,
        })
    }

    /// Layers given explicitly as rotation groups.
    pub fn from_layers(n: usize, groups: Vec<Vec<PauliRotation>>) -> Result<Self> {
        let mut rotations = Vec::new();
        let mut layers = Vec::new();
        for g in groups {
            let start = rotations.len();
            rotations.extend(g);
            layers.push((start..rotations.len()).collect());
        }
        Self::new(n, rotations, layers)
    }

    /// One rotation per layer.
    pub fn sequential(n: usize, rotations: Vec<PauliRotation>) -> Result<Self> {
        let layers = (0..rotations.len()).map(|i| vec![i]).collect();
        Self::new(n, rotations, layers)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rotations(&self) -> &[PauliRotation] {
        &self.rotations
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    /// T-depth of this layering.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_size(&self, i: usize) -> usize {
        self.layers[i].len()
    }

    pub fn density(&self, i: usize) -> f64 {
        self.layers[i].len() as f64 / self.n as f64
    }

    /// Rotations in time order, layer by layer.
    pub fn ordered_rotations(&self) -> Vec<PauliRotation> {
        self.layers
            .iter()
            .flatten()
            .map(|&i| self.rotations[i].clone())
            .collect()
    }

    pub fn layer_rotations(&self, i: usize) -> impl Iterator<Item = &PauliRotation> {
        self.layers[i].iter().map(move |&r| &self.rotations[r])
    }

    fn layers_commute(&self, a: usize, b: usize) -> bool {
        self.layer_rotations(a)
            .all(|ra| self.layer_rotations(b).all(|rb| ra.commutes_with(rb)))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.layers.len() {
            Ok(())
        } else {
            Err(Error::LayerIndex {
                index: i,
                len: self.layers.len(),
            })
        }
    }
}

/// ASAP layering: each rotation joins the earliest layer after the last layer
/// holding a rotation it anticommutes with.
pub fn build_layers(n: usize, rotations: Vec<PauliRotation>) -> Result<Layering> {
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for (idx, r) in rotations.iter().enumerate() {
        if r.num_qubits() != n {
            return Err(Error::Dimension {
                expected: n,
                found: r.num_qubits(),
            });
        }
        if !r.is_pi8() {
            return Err(Error::NotPi8);
        }
        let blocker = layers
            .iter()
            .rposition(|layer| layer.iter().any(|&o| !rotations[o].commutes_with(r)));
        let target = blocker.map_or(0, |b| b + 1);
        if target == layers.len() {
            layers.push(vec![idx]);
        } else {
            layers[target].push(idx);
        }
    }
    Layering::new(n, rotations, layers)
}

pub fn mergeable(l: &Layering, i: usize, j: usize) -> Result<bool> {
    l.check_index(i)?;
    l.check_index(j)?;
    if i >= j {
        return Err(Error::InvalidMerge(format!("pair ({i}, {j}) needs i < j")));
    }
    Ok((i..j).all(|k| l.layers_commute(j, k)))
}

fn score_with(l: &Layering, i: usize, j: usize, beta: f64, t_max: usize) -> f64 {
    let (ti, tj) = (l.layer_size(i), l.layer_size(j));
    1.0 - (l.density(i) - l.density(j)).abs() + beta * (t_max as f64 - (ti + tj) as f64)
}

fn max_layer_size(l: &Layering) -> usize {
    l.layers.iter().map(Vec::len).max().unwrap_or(0)
}

/// `1 - |D_i - D_j| + beta·(T_max - (T_i + T_j))` for a mergeable pair.
pub fn score_pair(l: &Layering, i: usize, j: usize, beta: f64) -> Result<f64> {
    if !mergeable(l, i, j)? {
        return Err(Error::InvalidMerge(format!("layers {i} and {j} are not mergeable")));
    }
    Ok(score_with(l, i, j, beta, max_layer_size(l)))
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MergeSet {
    pairs: Vec<(usize, usize)>,
}

impl MergeSet {
    /// Pairs must satisfy `i < j` and be disjoint over endpoints.
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        let mut used = std::collections::HashSet::new();
        for &(i, j) in &pairs {
            if i >= j {
                return Err(Error::InvalidMerge(format!("pair ({i}, {j}) needs i < j")));
            }
            if !used.insert(i) || !used.insert(j) {
                return Err(Error::InvalidMerge(format!("pair ({i}, {j}) reuses a layer")));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Every mergeable pair of a layering, best score first.
#[derive(Debug, Clone)]
pub struct Candidates {
    pub(crate) depth: usize,
    pairs: Vec<(usize, usize)>,
    scores: Vec<f64>,
}

impl Candidates {
    pub fn new(l: &Layering, beta: f64) -> Self {
        let t_max = max_layer_size(l);
        let mut scored = Vec::new();
        for j in 1..l.depth() {
            for i in (0..j).rev() {
                if !l.layers_commute(j, i) {
                    break;
                }
                scored.push(((i, j), score_with(l, i, j, beta, t_max)));
            }
        }
        scored.sort_by(|(pa, sa), (pb, sb)| sb.total_cmp(sa).then(pa.cmp(pb)));
        let (pairs, scores) = scored.into_iter().unzip();
        Self {
            depth: l.depth(),
            pairs,
            scores,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair(&self, rank: usize) -> (usize, usize) {
        self.pairs[rank]
    }

    pub fn score(&self, rank: usize) -> f64 {
        self.scores[rank]
    }

    /// Accepts candidate ranks in the given order when both endpoints are free.
    pub(crate) fn fill(&self, used: &mut [bool], chosen: &mut Vec<usize>, order: impl IntoIterator<Item = usize>) {
        for rank in order {
            let (i, j) = self.pairs[rank];
            if !used[i] && !used[j] {
                used[i] = true;
                used[j] = true;
                chosen.push(rank);
            }
        }
    }

    pub(crate) fn greedy_ranks(&self) -> Vec<usize> {
        let mut used = vec![false; self.depth];
        let mut chosen = Vec::new();
        self.fill(&mut used, &mut chosen, 0..self.len());
        chosen
    }

    pub(crate) fn to_merge_set(&self, ranks: &[usize]) -> MergeSet {
        MergeSet::new(ranks.iter().map(|&r| self.pairs[r]).collect())
            .expect("chromosomes are disjoint by construction")
    }
}

/// Highest-score-first maximal matching; ties by smaller `i`, then `j`.
pub fn greedy_matching(l: &Layering, beta: f64) -> MergeSet {
    let c = Candidates::new(l, beta);
    c.to_merge_set(&c.greedy_ranks())
}

pub fn apply_merges(l: &Layering, ms: &MergeSet) -> Result<Layering> {
    let mut absorbed = vec![None; l.depth()];
    for &(i, j) in ms.pairs() {
        if !mergeable(l, i, j)? {
            return Err(Error::InvalidMerge(format!("layers {i} and {j} are not mergeable")));
        }
        absorbed[i] = Some(j);
        absorbed[j] = Some(usize::MAX);
    }
    let mut layers = Vec::with_capacity(l.depth() - ms.len());
    for (i, layer) in l.layers.iter().enumerate() {
        match absorbed[i] {
            Some(usize::MAX) => {}
            Some(j) => {
                let mut merged = layer.clone();
                merged.extend_from_slice(&l.layers[j]);
                layers.push(merged);
            }
            None => layers.push(layer.clone()),
        }
    }
    Ok(Layering {
        n: l.n,
        rotations: l.rotations.clone(),
        layers,
    })
}

/// Splits layers denser than `threshold` into support-connected groups.
pub fn split_dense_layers(l: &Layering, threshold: f64) -> Result<Layering> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Domain(format!("split threshold {threshold} not in (0, 1]")));
    }
    let mut layers = Vec::new();
    for (i, layer) in l.layers.iter().enumerate() {
        if l.density(i) <= threshold {
            layers.push(layer.clone());
            continue;
        }
        let supports: Vec<Vec<usize>> = layer
            .iter()
            .map(|&r| l.rotations[r].axis().support().collect())
            .collect();
        let mut group: Vec<usize> = (0..layer.len()).collect();
        fn root(group: &mut [usize], mut a: usize) -> usize {
            while group[a] != a {
                group[a] = group[group[a]];
                a = group[a];
            }
            a
        }
        let mut owner = vec![None; l.n];
        for (a, support) in supports.iter().enumerate() {
            for &q in support {
                match owner[q] {
                    None => owner[q] = Some(a),
                    Some(b) => {
                        let (ra, rb) = (root(&mut group, a), root(&mut group, b));
                        group[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut parts: Vec<(usize, Vec<usize>)> = Vec::new();
        for (a, &r) in layer.iter().enumerate() {
            let g = root(&mut group, a);
            match parts.iter_mut().find(|(k, _)| *k == g) {
                Some((_, members)) => members.push(r),
                None => parts.push((g, vec![r])),
            }
        }
        layers.extend(parts.into_iter().map(|(_, members)| members));
    }
    Ok(Layering {
        n: l.n,
        rotations: l.rotations.clone(),
        layers,
    })
}

/// Repeats greedy matching until no pair is mergeable.
pub fn greedy_optimize(l: &Layering, beta: f64) -> (Layering, Vec<usize>) {
    let mut current = l.clone();
    let mut merges = Vec::new();
    loop {
        let ms = greedy_matching(&current, beta);
        if ms.is_empty() {
            return (current, merges);
        }
        merges.push(ms.len());
        current = apply_merges(&current, &ms).expect("greedy pairs are mergeable");
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_k: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub beta: f64,
    pub max_generations: usize,
    pub stagnation_limit: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 64,
            elite_k: 4,
            crossover_rate: 0.8,
            mutation_rate: 0.1,
            beta: 0.5,
            max_generations: 200,
            stagnation_limit: 20,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.population_size == 0 {
            return bad("population_size must be positive");
        }
        if self.elite_k >= self.population_size {
            return bad("elite_k must be smaller than population_size");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover_rate must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.beta) {
            return bad("beta must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub initial_t_depth: usize,
    pub final_t_depth: usize,
    pub rounds: usize,
    pub merges_per_round: Vec<usize>,
    /// Size of the greedy seed matching in each GA round.
    pub greedy_merges_per_round: Vec<usize>,
    /// Best fitness after each generation, per round.
    pub best_fitness_history: Vec<Vec<usize>>,
    pub seed: u64,
}

pub fn ga_optimize(l: &Layering, cfg: &GaConfig) -> Result<(Layering, OptimizeReport)> {
    cfg.validate()?;
    let mut current = l.clone();
    let mut report = OptimizeReport {
        initial_t_depth: l.depth(),
        final_t_depth: l.depth(),
        rounds: 0,
        merges_per_round: Vec::new(),
        greedy_merges_per_round: Vec::new(),
        best_fitness_history: Vec::new(),
        seed: cfg.seed,
    };
    // Each productive round removes at least one layer.
    for round in 0..l.depth() {
        let candidates = Candidates::new(&current, cfg.beta);
        if candidates.is_empty() {
            break;
        }
        let outcome = crate::ga::evolve(&candidates, cfg, round as u64);
        if outcome.best.is_empty() {
            break;
        }
        let ms = candidates.to_merge_set(&outcome.best);
        current = apply_merges(&current, &ms)?;
        report.rounds += 1;
        report.merges_per_round.push(ms.len());
        report.greedy_merges_per_round.push(outcome.greedy_size);
        report.best_fitness_history.push(outcome.history);
    }
    report.final_t_depth = current.depth();
    Ok((current, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> PauliRotation {
        PauliRotation::pi8(s.parse().unwrap()).unwrap()
    }

    fn layered(n: usize, groups: &[&[&str]]) -> Layering {
        Layering::from_layers(
            n,
            groups.iter().map(|g| g.iter().map(|s| r(s)).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn asap_layers() {
        assert_eq!(build_layers(2, vec![r("ZI"), r("IZ")]).unwrap().depth(), 1);
        assert_eq!(build_layers(1, vec![r("X"), r("Z")]).unwrap().depth(), 2);
        let l = build_layers(2, vec![r("ZI"), r("IX"), r("ZZ")]).unwrap();
        assert_eq!(l.layers(), &[vec![0, 1], vec![2]]);
        // Z on q0 slides back past an anticommuting-free later layer.
        let l = build_layers(2, vec![r("XI"), r("ZI"), r("IZ")]).unwrap();
        assert_eq!(l.layers(), &[vec![0, 2], vec![1]]);
    }

    #[test]
    fn build_rejects_cliffords() {
        let s = PauliRotation::new("Z".parse().unwrap(), crate::circuit::Angle::PI_4).unwrap();
        assert_eq!(build_layers(1, vec![s]), Err(Error::NotPi8));
    }

    #[test]
    fn layering_validation() {
        assert!(Layering::new(1, vec![r("X"), r("Z")], vec![vec![0, 1]]).is_err());
        assert!(Layering::new(1, vec![r("X"), r("X")], vec![vec![0]]).is_err());
        assert!(Layering::new(1, vec![r("X")], vec![vec![0], vec![0]]).is_err());
        assert!(Layering::new(1, vec![r("X")], vec![vec![], vec![0]]).is_err());
    }

    #[test]
    fn mergeability() {
        let l = layered(2, &[&["ZI"], &["IZ"]]);
        assert!(mergeable(&l, 0, 1).unwrap());
        let l = layered(1, &[&["X"], &["Z"]]);
        assert!(!mergeable(&l, 0, 1).unwrap());
        let l = layered(2, &[&["ZI"], &["IX"], &["ZZ"]]);
        assert!(!mergeable(&l, 0, 2).unwrap());
        assert!(mergeable(&l, 0, 1).unwrap());
        assert!(matches!(mergeable(&l, 0, 3), Err(Error::LayerIndex { index: 3, len: 3 })));
        assert!(mergeable(&l, 1, 1).is_err());
    }

    #[test]
    fn scores() {
        // n = 2, T_i = T_j = 1, T_max = 2
        let l = layered(2, &[&["ZI"], &["IZ"], &["ZI", "IZ"]]);
        assert_eq!(score_pair(&l, 0, 1, 0.5).unwrap(), 1.0);
        // n = 4, T_i = 1, T_j = 3, T_max = 3
        let l = layered(4, &[&["ZIII"], &["IZII", "IIZI", "IIIZ"]]);
        assert_eq!(score_pair(&l, 0, 1, 0.0).unwrap(), 0.5);
        // n = 4, T_i = T_j = 1, T_max = 4
        let l = layered(4, &[&["ZIII"], &["IZII"], &["XIII", "IXII", "IIXI", "IIIX"]]);
        assert_eq!(score_pair(&l, 0, 1, 0.5).unwrap(), 2.0);
        let l = layered(1, &[&["X"], &["Z"]]);
        assert!(score_pair(&l, 0, 1, 0.5).is_err());
    }

    #[test]
    fn greedy_examples() {
        let l = layered(4, &[&["ZIII"], &["IZII"], &["IIZI"], &["IIIZ"]]);
        let ms = greedy_matching(&l, 0.5);
        assert_eq!(ms.len(), 2);
        assert_eq!(apply_merges(&l, &ms).unwrap().depth(), 2);

        let l = layered(1, &[&["X"], &["Z"], &["X"]]);
        assert!(greedy_matching(&l, 0.5).is_empty());

        let l = layered(3, &[&["ZII"], &["IZI"], &["IIZ"]]);
        assert_eq!(greedy_matching(&l, 0.5).pairs(), &[(0, 1)]);
    }

    #[test]
    fn merges_apply() {
        let l = layered(2, &[&["ZI"], &["IZ"]]);
        let merged = apply_merges(&l, &MergeSet::new(vec![(0, 1)]).unwrap()).unwrap();
        assert_eq!(merged.layers(), &[vec![0, 1]]);
        assert_eq!(apply_merges(&l, &MergeSet::default()).unwrap(), l);

        let l = layered(1, &[&["X"], &["Z"]]);
        assert!(apply_merges(&l, &MergeSet::new(vec![(0, 1)]).unwrap()).is_err());
        assert!(MergeSet::new(vec![(0, 1), (1, 2)]).is_err());
        assert!(MergeSet::new(vec![(2, 1)]).is_err());
    }

    #[test]
    fn splitting() {
        let l = layered(2, &[&["ZI", "IZ"]]);
        assert_eq!(split_dense_layers(&l, 0.4).unwrap().layers(), &[vec![0], vec![1]]);
        assert_eq!(split_dense_layers(&l, 1.0).unwrap(), l);
        let l = layered(3, &[&["ZZI", "IZZ"]]);
        assert_eq!(split_dense_layers(&l, 0.1).unwrap().depth(), 1);
        assert!(split_dense_layers(&l, 0.0).is_err());
    }

    #[test]
    fn ga_examples() {
        let l = Layering::sequential(
            4,
            vec![r("ZIII"), r("IXII"), r("IIYI"), r("IIIZ")],
        )
        .unwrap();
        let (out, report) = ga_optimize(&l, &GaConfig::default()).unwrap();
        assert_eq!(out.depth(), 1);
        assert_eq!(report.initial_t_depth, 4);
        assert_eq!(report.final_t_depth, 1);

        let chain: Vec<_> = (0..8).map(|i| r(if i % 2 == 0 { "X" } else { "Z" })).collect();
        let l = Layering::sequential(1, chain).unwrap();
        let (out, report) = ga_optimize(&l, &GaConfig::default()).unwrap();
        assert_eq!(out.depth(), 8);
        assert_eq!(report.rounds, 0);
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let bad = [
            GaConfig { elite_k: 64, ..Default::default() },
            GaConfig { crossover_rate: 1.5, ..Default::default() },
            GaConfig { mutation_rate: -0.1, ..Default::default() },
            GaConfig { beta: 1.0, ..Default::default() },
            GaConfig { population_size: 0, elite_k: 0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
