//! Beam-selection search: the Queen-based genetic algorithm and the
//! exhaustive and random baselines it is measured against.
//!
//! All searches score selections through a [`SelectionEvaluator`], which
//! tabulates `|H W|^2` for the whole codebook once per channel. Scoring a
//! selection is then a gather over that table instead of a fresh `H V`
//! product; the result is identical to
//! `channel_gain(H, codebook.materialize(sel))`.

use rand::Rng;

use crate::codebook::{build_dft_codebook, Codebook};
use crate::error::{Error, Result};
use crate::metrics::{
    delay_factor, pa_output_power, rate_threshold, sinr_from_row, Objective, Score,
};
use crate::model::{BeamSelection, ComplexMatrix, SystemConfig};

/// Scores beam selections for one channel realization.
#[derive(Clone, Debug)]
pub struct SelectionEvaluator {
    objective: Objective,
    users: usize,
    codebook_size: usize,
    snr_per_beam: f64,
    threshold: f64,
    /// Row-major `N x N_vec` table of `|(H W)(i, u)|^2`.
    gains: Vec<f64>,
}

/// Score and per-user rates of one selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub score: Score,
    pub rates: Vec<f64>,
}

impl SelectionEvaluator {
    /// The transmit power is the PA output for the configured consumed budget.
    pub fn new(
        cfg: &SystemConfig,
        codebook: &Codebook,
        h: &ComplexMatrix,
        objective: Objective,
    ) -> Result<Self> {
        if h.shape() != (cfg.users, cfg.antennas) {
            return Err(Error::DimensionMismatch {
                context: "channel must be N x M",
                left: format!("{:?}", h.shape()),
                right: format!("({}, {})", cfg.users, cfg.antennas),
            });
        }
        if codebook.antennas() != cfg.antennas || codebook.size() != cfg.codebook_size {
            return Err(Error::DimensionMismatch {
                context: "codebook must be M x N_vec",
                left: format!("{}x{}", codebook.antennas(), codebook.size()),
                right: format!("{}x{}", cfg.antennas, cfg.codebook_size),
            });
        }
        let power = pa_output_power(cfg.power_linear(), &cfg.pa)?;
        let hw = h.matmul(codebook.matrix())?;
        Ok(Self {
            objective,
            users: cfg.users,
            codebook_size: cfg.codebook_size,
            snr_per_beam: power / cfg.antennas as f64,
            threshold: rate_threshold(objective.theta_db),
            gains: hw.as_slice().iter().map(|z| z.norm_sqr()).collect(),
        })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn codebook_size(&self) -> usize {
        self.codebook_size
    }

    /// `P/M` after the PA mapping.
    pub fn snr_per_beam(&self) -> f64 {
        self.snr_per_beam
    }

    #[inline]
    fn gain(&self, user: usize, column: usize) -> f64 {
        self.gains[user * self.codebook_size + column]
    }

    pub fn rates(&self, sel: &BeamSelection) -> Vec<f64> {
        (0..self.users)
            .map(|i| {
                let row = (0..self.users).map(|j| self.gain(i, sel.column(j)));
                let s = sinr_from_row(row, i, self.snr_per_beam);
                s.ln_1p() / std::f64::consts::LN_2
            })
            .collect()
    }

    pub fn evaluate(&self, sel: &BeamSelection) -> Evaluation {
        let rates = self.rates(sel);
        Evaluation {
            score: self.objective.raw_score(&rates, self.threshold),
            rates,
        }
    }

    pub fn score(&self, sel: &BeamSelection) -> Score {
        self.evaluate(sel).score
    }

    pub fn served(&self, rates: &[f64]) -> usize {
        rates.iter().filter(|&&r| r >= self.threshold).count()
    }
}

/// Uniform ordered draw of `users` distinct 1-based indices from `1..=codebook_size`.
pub fn random_selection<R: Rng + ?Sized>(
    users: usize,
    codebook_size: usize,
    rng: &mut R,
) -> BeamSelection {
    assert!(users <= codebook_size, "cannot draw {} distinct beams from {}", users, codebook_size);
    let mut indices = Vec::with_capacity(users);
    while indices.len() < users {
        let u = rng.random_range(1..=codebook_size);
        if !indices.contains(&u) {
            indices.push(u);
        }
    }
    BeamSelection::from_raw(indices)
}

pub fn init_population<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Vec<BeamSelection> {
    (0..cfg.population)
        .map(|_| random_selection(cfg.users, cfg.codebook_size, rng))
        .collect()
}

/// Replaces `cfg.mutation_count()` positions of the Queen with beams it does
/// not already use. When the codebook is exhausted (`N == N_vec`) two
/// positions are swapped instead.
pub fn mutate<R: Rng + ?Sized>(
    queen: &BeamSelection,
    cfg: &SystemConfig,
    rng: &mut R,
) -> BeamSelection {
    let mut indices = queen.indices().to_vec();
    let n = indices.len();
    if n >= cfg.codebook_size {
        if n >= 2 {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            indices.swap(a, b);
        }
        return BeamSelection::from_raw(indices);
    }

    let count = cfg.mutation_count().min(n);
    let mut positions: Vec<usize> = Vec::with_capacity(count);
    while positions.len() < count {
        let p = rng.random_range(0..n);
        if !positions.contains(&p) {
            positions.push(p);
        }
    }
    for p in positions {
        let replacement = loop {
            let u = rng.random_range(1..=cfg.codebook_size);
            if !indices.contains(&u) {
                break u;
            }
        };
        indices[p] = replacement;
    }
    BeamSelection::from_raw(indices)
}

/// State after one GA iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct GaRecord {
    /// 1-based iteration index `K`.
    pub iteration: usize,
    pub queen: BeamSelection,
    /// Objective value of the Queen without the delay factor.
    pub raw_score: Score,
    /// Throughput reported by the objective for the Queen, undelayed.
    pub raw_throughput: f64,
    /// `(1 - alpha K) * raw_throughput`.
    pub weighted_throughput: f64,
    pub served: usize,
    pub evaluations_used: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaTrajectory {
    pub alpha: f64,
    pub records: Vec<GaRecord>,
}

impl GaTrajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record for iteration `K` (1-based).
    pub fn at(&self, iteration: usize) -> &GaRecord {
        &self.records[iteration - 1]
    }

    pub fn last(&self) -> &GaRecord {
        self.records.last().expect("trajectory is never empty")
    }

    /// The selection returned by the search.
    pub fn final_queen(&self) -> &BeamSelection {
        &self.last().queen
    }
}

/// Runs the genetic search on channel `h` with the DFT codebook from `cfg`.
pub fn ga_run<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    h: &ComplexMatrix,
    objective: &Objective,
    rng: &mut R,
) -> Result<GaTrajectory> {
    cfg.validate()?;
    let codebook = build_dft_codebook(cfg.antennas, cfg.codebook_size)?;
    let evaluator = SelectionEvaluator::new(cfg, &codebook, h, *objective)?;
    ga_run_with(cfg, &evaluator, rng)
}

/// Genetic search with a prepared evaluator.
///
/// Each iteration scores all `L` members, keeps the best as Queen (ties go to
/// the lowest population index, so the Queen at slot 0 survives ties), and
/// rebuilds the population as Queen, `S` mutants of the Queen and
/// `L - S - 1` fresh random selections.
pub fn ga_run_with<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    evaluator: &SelectionEvaluator,
    rng: &mut R,
) -> Result<GaTrajectory> {
    cfg.validate()?;
    let objective = *evaluator.objective();
    let mut population = init_population(cfg, rng);
    let mut records = Vec::with_capacity(cfg.max_iterations);

    for iteration in 1..=cfg.max_iterations {
        let mut best: Option<(usize, Evaluation)> = None;
        for (idx, member) in population.iter().enumerate() {
            let eval = evaluator.evaluate(member);
            let better = match &best {
                None => true,
                Some((_, b)) => eval.score.better_than(&b.score),
            };
            if better {
                best = Some((idx, eval));
            }
        }
        let (queen_idx, queen_eval) = best.expect("population is non-empty");
        let queen = population[queen_idx].clone();

        let raw_throughput = objective.reported_throughput(&queen_eval.rates);
        records.push(GaRecord {
            iteration,
            queen: queen.clone(),
            raw_score: queen_eval.score,
            raw_throughput,
            weighted_throughput: delay_factor(cfg.alpha, iteration)? * raw_throughput,
            served: evaluator.served(&queen_eval.rates),
            evaluations_used: cfg.population * iteration,
        });

        if iteration < cfg.max_iterations {
            let mut next = Vec::with_capacity(cfg.population);
            for _ in 0..cfg.mutants {
                next.push(mutate(&queen, cfg, rng));
            }
            for _ in 0..cfg.immigrants() {
                next.push(random_selection(cfg.users, cfg.codebook_size, rng));
            }
            next.insert(0, queen);
            population = next;
        }
    }

    Ok(GaTrajectory {
        alpha: cfg.alpha,
        records,
    })
}

pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 1_000_000;

/// Number of ordered selections of `users` distinct beams, `N_vec!/(N_vec-N)!`.
pub fn ordered_selection_count(users: usize, codebook_size: usize) -> f64 {
    if users > codebook_size {
        return 0.0;
    }
    ((codebook_size - users + 1)..=codebook_size)
        .map(|x| x as f64)
        .product()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub selection: BeamSelection,
    pub score: Score,
    pub evaluations: usize,
}

/// Global optimum of the raw objective over every ordered distinct selection.
/// Ties resolve to the lexicographically smallest selection.
pub fn exhaustive_search(evaluator: &SelectionEvaluator, cap: u64) -> Result<SearchOutcome> {
    let (users, size) = (evaluator.users(), evaluator.codebook_size());
    let count = ordered_selection_count(users, size);
    if count > cap as f64 {
        return Err(Error::SearchSpaceTooLarge { size: count, cap });
    }

    struct Walk<'a> {
        evaluator: &'a SelectionEvaluator,
        current: Vec<usize>,
        used: Vec<bool>,
        best: Option<(Vec<usize>, Score)>,
        evaluations: usize,
    }

    impl Walk<'_> {
        fn descend(&mut self, users: usize) {
            if self.current.len() == users {
                let sel = BeamSelection::from_raw(self.current.clone());
                let score = self.evaluator.score(&sel);
                self.evaluations += 1;
                let better = match &self.best {
                    None => true,
                    Some((_, b)) => score.better_than(b),
                };
                if better {
                    self.best = Some((self.current.clone(), score));
                }
                return;
            }
            for u in 0..self.used.len() {
                if !self.used[u] {
                    self.used[u] = true;
                    self.current.push(u + 1);
                    self.descend(users);
                    self.current.pop();
                    self.used[u] = false;
                }
            }
        }
    }

    let mut walk = Walk {
        evaluator,
        current: Vec::with_capacity(users),
        used: vec![false; size],
        best: None,
        evaluations: 0,
    };
    walk.descend(users);
    let (indices, score) = walk
        .best
        .ok_or_else(|| Error::InvalidArgument("empty search space".into()))?;
    Ok(SearchOutcome {
        selection: BeamSelection::from_raw(indices),
        score,
        evaluations: walk.evaluations,
    })
}

/// Best of `budget` independent uniform selections; earliest draw wins ties.
pub fn random_search<R: Rng + ?Sized>(
    evaluator: &SelectionEvaluator,
    budget: usize,
    rng: &mut R,
) -> Result<SearchOutcome> {
    if budget == 0 {
        return Err(Error::InvalidArgument("random search budget must be at least 1".into()));
    }
    let mut best: Option<(BeamSelection, Score)> = None;
    for _ in 0..budget {
        let sel = random_selection(evaluator.users(), evaluator.codebook_size(), rng);
        let score = evaluator.score(&sel);
        if best.as_ref().is_none_or(|(_, b)| score.better_than(b)) {
            best = Some((sel, score));
        }
    }
    let (selection, score) = best.expect("budget >= 1");
    Ok(SearchOutcome {
        selection,
        score,
        evaluations: budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelRealization;
    use crate::metrics::{channel_gain, rates, sinr, ObjectiveKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_cfg() -> SystemConfig {
        let mut cfg = SystemConfig::with_dimensions(4, 2, 8);
        cfg.max_iterations = 50;
        cfg.alpha = 0.0;
        cfg
    }

    fn throughput_obj(cfg: &SystemConfig) -> Objective {
        Objective::new(ObjectiveKind::Throughput, cfg.alpha, cfg.theta_db)
    }

    fn evaluator(cfg: &SystemConfig, realization: u64) -> SelectionEvaluator {
        let ch = ChannelRealization::generate(cfg, 99, realization).unwrap();
        let cb = build_dft_codebook(cfg.antennas, cfg.codebook_size).unwrap();
        SelectionEvaluator::new(cfg, &cb, &ch.h, throughput_obj(cfg)).unwrap()
    }

    #[test]
    fn evaluator_matches_materialized_route() {
        let cfg = SystemConfig::with_dimensions(8, 4, 16);
        let ch = ChannelRealization::generate(&cfg, 5, 0).unwrap();
        let cb = build_dft_codebook(8, 16).unwrap();
        let ev = SelectionEvaluator::new(&cfg, &cb, &ch.h, throughput_obj(&cfg)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let sel = random_selection(4, 16, &mut rng);
            let g = channel_gain(&ch.h, &cb.materialize(&sel).unwrap()).unwrap();
            let direct = rates(&sinr(&g, cfg.power_linear(), cfg.antennas));
            for (a, b) in ev.rates(&sel).iter().zip(direct.as_slice()) {
                assert!((a - b).abs() <= 1e-12 * b.max(1.0));
            }
        }
    }

    #[test]
    fn full_codebook_population_is_permutations() {
        let mut cfg = SystemConfig::with_dimensions(5, 5, 5);
        cfg.population = 10;
        let pop = init_population(&cfg, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(pop.len(), 10);
        for sel in pop {
            let mut s = sel.indices().to_vec();
            s.sort_unstable();
            assert_eq!(s, vec![1, 2, 3, 4, 5]);
        }
    }

    #[test]
    fn population_is_valid_and_reproducible() {
        let cfg = SystemConfig::with_dimensions(32, 8, 128);
        let a = init_population(&cfg, &mut ChaCha8Rng::seed_from_u64(7));
        let b = init_population(&cfg, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        for sel in &a {
            sel.check_against(&cfg).unwrap();
        }
    }

    #[test]
    fn mutation_replaces_exact_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (users, expected) in [(8usize, 1usize), (20, 2)] {
            let cfg = SystemConfig::with_dimensions(32, users, 128);
            for _ in 0..200 {
                let queen = random_selection(users, 128, &mut rng);
                let child = mutate(&queen, &cfg, &mut rng);
                child.check_against(&cfg).unwrap();
                let changed = queen
                    .indices()
                    .iter()
                    .zip(child.indices())
                    .filter(|(a, b)| a != b)
                    .count();
                assert_eq!(changed, expected);
                for idx in child.indices() {
                    let pos = child.indices().iter().position(|x| x == idx).unwrap();
                    if queen.indices()[pos] != *idx {
                        assert!(!queen.contains(*idx));
                    }
                }
            }
        }
    }

    #[test]
    fn mutation_swaps_when_codebook_exhausted() {
        let cfg = SystemConfig::with_dimensions(4, 4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let queen = BeamSelection::new(vec![1, 2, 3, 4], 4).unwrap();
        let child = mutate(&queen, &cfg, &mut rng);
        assert_ne!(child, queen);
        let mut s = child.indices().to_vec();
        s.sort_unstable();
        assert_eq!(s, vec![1, 2, 3, 4]);
    }

    #[test]
    fn ga_elitism_and_accounting() {
        let cfg = small_cfg();
        for r in 0..20 {
            let ev = evaluator(&cfg, r);
            let traj = ga_run_with(&cfg, &ev, &mut ChaCha8Rng::seed_from_u64(r)).unwrap();
            assert_eq!(traj.len(), cfg.max_iterations);
            for w in traj.records.windows(2) {
                assert!(w[1].raw_score >= w[0].raw_score);
            }
            for rec in &traj.records {
                assert_eq!(rec.evaluations_used, cfg.population * rec.iteration);
                rec.queen.check_against(&cfg).unwrap();
            }
            let oracle = exhaustive_search(&ev, DEFAULT_EXHAUSTIVE_CAP).unwrap();
            assert!(oracle.score >= traj.last().raw_score);
        }
    }

    #[test]
    fn ga_weighted_score_uses_delay_factor() {
        let mut cfg = SystemConfig::with_dimensions(8, 4, 16);
        cfg.alpha = 0.001;
        cfg.max_iterations = 100;
        let ev = evaluator(&cfg, 0);
        let traj = ga_run_with(&cfg, &ev, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for rec in &traj.records {
            let expect = (1.0 - 0.001 * rec.iteration as f64) * rec.raw_throughput;
            assert!((rec.weighted_throughput - expect).abs() < 1e-12);
            assert_eq!(rec.raw_throughput, rec.raw_score.primary);
        }
    }

    #[test]
    fn ga_is_deterministic() {
        let cfg = small_cfg();
        let ev = evaluator(&cfg, 3);
        let a = ga_run_with(&cfg, &ev, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = ga_run_with(&cfg, &ev, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ga_rejects_invalid_config() {
        let mut cfg = small_cfg();
        cfg.mutants = 9;
        let ch = ChannelRealization::generate(&cfg, 1, 0).unwrap();
        let obj = throughput_obj(&cfg);
        assert!(matches!(
            ga_run(&cfg, &ch.h, &obj, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn exhaustive_counts() {
        let cfg = SystemConfig::with_dimensions(2, 2, 2);
        assert_eq!(exhaustive_search(&evaluator(&cfg, 0), 10).unwrap().evaluations, 2);
        let cfg = small_cfg();
        assert_eq!(exhaustive_search(&evaluator(&cfg, 0), 1000).unwrap().evaluations, 56);
    }

    #[test]
    fn exhaustive_refuses_large_space() {
        let cfg = SystemConfig::with_dimensions(32, 8, 128);
        let err = exhaustive_search(&evaluator(&cfg, 0), DEFAULT_EXHAUSTIVE_CAP).unwrap_err();
        match err {
            Error::SearchSpaceTooLarge { size, .. } => assert_eq!(size, 57_645_610_944_768_000.0),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn exhaustive_tie_break_is_lexicographic() {
        // Zero channel: every selection scores zero, the first one wins.
        let cfg = small_cfg();
        let cb = build_dft_codebook(4, 8).unwrap();
        let ev = SelectionEvaluator::new(&cfg, &cb, &ComplexMatrix::zeros(2, 4), throughput_obj(&cfg))
            .unwrap();
        let out = exhaustive_search(&ev, 1000).unwrap();
        assert_eq!(out.selection.indices(), &[1, 2]);
    }

    #[test]
    fn random_search_budget_one_is_single_draw() {
        let cfg = small_cfg();
        let ev = evaluator(&cfg, 1);
        let out = random_search(&ev, 1, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let draw = random_selection(2, 8, &mut ChaCha8Rng::seed_from_u64(8));
        assert_eq!(out.selection, draw);
        assert_eq!(out.score, ev.score(&draw));
        assert!(random_search(&ev, 0, &mut ChaCha8Rng::seed_from_u64(8)).is_err());
        let again = random_search(&ev, 25, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(again, random_search(&ev, 25, &mut ChaCha8Rng::seed_from_u64(8)).unwrap());
    }
}
