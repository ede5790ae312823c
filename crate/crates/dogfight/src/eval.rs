//! Monte Carlo tournaments between two policies, the stacking-vs-noise
//! sweep, and training-curve aggregation.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{EnvConfig, Environment, Status};
use crate::learner::{self, TrainConfig};
use crate::net::QNet;
use crate::policy::{Policy, RandomPolicy};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchResult {
    AgentWin,
    EnemyWin,
    Tie,
}

impl MatchResult {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatchResult::AgentWin => "win",
            MatchResult::EnemyWin => "lose",
            MatchResult::Tie => "tie",
        }
    }
}

/// Outcome of a single tournament episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRecord {
    pub episode: u64,
    pub result: MatchResult,
    pub steps: u32,
    pub agent_score: f64,
    pub enemy_score: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TournamentSummary {
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
}

impl TournamentSummary {
    /// `wins / (wins + losses)`; undefined when every episode tied.
    pub fn win_probability(&self) -> Option<f64> {
        let decided = self.wins + self.losses;
        (decided > 0).then(|| self.wins as f64 / decided as f64)
    }

    pub fn total(&self) -> u64 {
        self.wins + self.losses + self.ties
    }

    pub fn from_counts(wins: u64, losses: u64, ties: u64) -> Self {
        Self { wins, losses, ties }
    }
}

/// splitmix64, used to derive independent per-episode seeds.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Play one evaluation episode. With `swap_roles`, `policy_a` controls the
/// environment's enemy side and the result is reported from that side.
fn run_match<PA: Policy, PB: Policy>(
    policy_a: &PA,
    policy_b: &PB,
    cfg: &EnvConfig,
    episode: u64,
    seed: u64,
    swap_roles: bool,
) -> Result<MatchRecord> {
    let mut env = Environment::new(EnvConfig { rng_seed: seed, ..*cfg })?;
    let mut rng_side_a = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_0F0F_3C3C_9696);
    let mut rng_side_e = ChaCha8Rng::seed_from_u64(seed ^ 0x5A5A_F0F0_C3C3_6969);
    let (mut obs_a, mut obs_e) = env.reset()?;
    let mut score_a = 0.0;
    let mut score_e = 0.0;
    let status = loop {
        let (act_a, act_e) = if swap_roles {
            (
                policy_b.select(&obs_a, &mut rng_side_a)?,
                policy_a.select(&obs_e, &mut rng_side_e)?,
            )
        } else {
            (
                policy_a.select(&obs_a, &mut rng_side_a)?,
                policy_b.select(&obs_e, &mut rng_side_e)?,
            )
        };
        let r = env.step(act_a, act_e)?;
        score_a += r.reward_agent;
        score_e += r.reward_enemy;
        if r.done {
            break r.status;
        }
        obs_a = r.obs_agent;
        obs_e = r.obs_enemy;
    };
    let side_a_result = match status {
        Status::AgentWin => MatchResult::AgentWin,
        Status::EnemyWin => MatchResult::EnemyWin,
        // Crash and timeout both count as ties: nobody achieved the strike
        // geometry.
        Status::Crash | Status::Timeout => MatchResult::Tie,
        Status::Running => unreachable!("episode ended while running"),
    };
    let (result, agent_score, enemy_score) = if swap_roles {
        let flipped = match side_a_result {
            MatchResult::AgentWin => MatchResult::EnemyWin,
            MatchResult::EnemyWin => MatchResult::AgentWin,
            MatchResult::Tie => MatchResult::Tie,
        };
        (flipped, score_e, score_a)
    } else {
        (side_a_result, score_a, score_e)
    };
    Ok(MatchRecord {
        episode,
        result,
        steps: env.step_count(),
        agent_score,
        enemy_score,
        seed,
    })
}

/// Monte Carlo tournament over independently seeded episodes.
///
/// The environment config must terminate on advantage, otherwise no episode
/// can produce a win.
pub fn run_tournament<PA: Policy, PB: Policy>(
    policy_a: &PA,
    policy_b: &PB,
    cfg: &EnvConfig,
    episodes: u64,
    base_seed: u64,
    swap_roles: bool,
) -> Result<(TournamentSummary, Vec<MatchRecord>)> {
    if episodes == 0 {
        return Err(Error::Contract("tournament needs at least one episode".into()));
    }
    if !cfg.terminate_on_advantage {
        return Err(Error::Config(
            "tournament config must set terminate_on_advantage".into(),
        ));
    }
    let mut records = Vec::with_capacity(episodes as usize);
    let mut summary = TournamentSummary::default();
    for i in 0..episodes {
        let rec = run_match(policy_a, policy_b, cfg, i, derive_seed(base_seed, i), swap_roles)?;
        match rec.result {
            MatchResult::AgentWin => summary.wins += 1,
            MatchResult::EnemyWin => summary.losses += 1,
            MatchResult::Tie => summary.ties += 1,
        }
        records.push(rec);
    }
    Ok((summary, records))
}

/// One greedy training-mode episode of `net` against the given enemy policy;
/// returns the agent-side episode score.
pub fn greedy_rollout_score<PE: Policy>(
    net: &QNet,
    enemy: &PE,
    cfg: &EnvConfig,
    seed: u64,
) -> Result<f64> {
    let mut env = Environment::new(EnvConfig { rng_seed: seed, ..*cfg })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x17E4_99AA_D00D_F157);
    let (mut obs_a, mut obs_e) = env.reset()?;
    let mut score = 0.0;
    loop {
        let a = net.greedy_action(&obs_a)?;
        let e = enemy.select(&obs_e, &mut rng)?;
        let r = env.step(a, e)?;
        score += r.reward_agent;
        if r.done {
            return Ok(score);
        }
        obs_a = r.obs_agent;
        obs_e = r.obs_enemy;
    }
}

/// Trailing moving average; the first `window - 1` entries average what is
/// available so the output has the input's length.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "window must be >= 1");
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for i in 0..xs.len() {
        sum += xs[i];
        if i >= window {
            sum -= xs[i - window];
        }
        out.push(sum / (i.min(window - 1) + 1) as f64);
    }
    out
}

/// One cell of the stacking-vs-noise sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub var_xy: f64,
    pub stack_n: usize,
    pub seed: u64,
    /// Mean greedy-rollout score of the trained agent against the random
    /// opponent; `None` when the run diverged.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub noise_variances: Vec<f64>,
    pub stack_ns: Vec<usize>,
    /// Greedy evaluation episodes behind each cell score.
    pub eval_episodes: u64,
}

impl SweepResult {
    /// Mean score over seeds for one (variance, stack) cell; `None`
    /// when every seed diverged.
    pub fn mean_score(&self, var_xy: f64, stack_n: usize) -> Option<f64> {
        let scores: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.var_xy == var_xy && c.stack_n == stack_n)
            .filter_map(|c| c.score)
            .collect();
        (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
    }

    /// Normalized stacking score for one noise row:
    /// `100 * best-stacking-score / stack-1-score`.
    pub fn normalized_score(&self, var_xy: f64) -> Option<f64> {
        let base = self.mean_score(var_xy, 1)?;
        let best = self
            .stack_ns
            .iter()
            .filter(|&&n| n > 1)
            .filter_map(|&n| self.mean_score(var_xy, n))
            .fold(f64::NEG_INFINITY, f64::max);
        if best == f64::NEG_INFINITY {
            // Only stack=1 in the grid: the row is its own reference.
            return Some(100.0);
        }
        Some(100.0 * best / base)
    }
}

/// Train one agent per (variance, stack, seed) cell without self-play and
/// score it with greedy rollouts against the random opponent. Diverged
/// cells are kept and marked rather than dropped.
pub fn stacking_sweep(
    noise_variances: &[f64],
    stack_ns: &[usize],
    base_env: &EnvConfig,
    train_cfg: &TrainConfig,
    seeds: &[u64],
    eval_episodes: u64,
    mut progress: Option<&mut dyn FnMut(&SweepCell)>,
) -> Result<SweepResult> {
    if noise_variances.is_empty() || stack_ns.is_empty() || seeds.is_empty() {
        return Err(Error::Contract("sweep grids must be non-empty".into()));
    }
    let mut cells = Vec::new();
    for &var in noise_variances {
        for &n in stack_ns {
            for &seed in seeds {
                let cell = run_sweep_cell(var, n, seed, base_env, train_cfg, eval_episodes)?;
                if let Some(p) = progress.as_mut() {
                    p(&cell);
                }
                cells.push(cell);
            }
        }
    }
    Ok(SweepResult {
        cells,
        noise_variances: noise_variances.to_vec(),
        stack_ns: stack_ns.to_vec(),
        eval_episodes,
    })
}

/// Seed salt separating greedy evaluation episodes from training streams.
const SWEEP_EVAL_SALT: u64 = 0x5EED_0E7A_11AB_1E00;
/// Model-selection cadence and smoothing window for sweep cells.
const SWEEP_SELECT_EVERY: u64 = 5_000;
const SWEEP_SELECT_WINDOW: usize = 100;

/// Train a single sweep cell and evaluate the result greedily. The cell
/// metric is the evaluation score of the best-so-far model (highest
/// trailing smoothed training score), not the noisy training curve of the
/// final parameters: it measures the learned policy without exploration
/// actions, the early transient, or late Q-learning policy churn.
/// Divergence is recorded, not propagated.
pub fn run_sweep_cell(
    var_xy: f64,
    stack_n: usize,
    seed: u64,
    base_env: &EnvConfig,
    train_cfg: &TrainConfig,
    eval_episodes: u64,
) -> Result<SweepCell> {
    if eval_episodes == 0 {
        return Err(Error::Contract("eval_episodes must be >= 1".into()));
    }
    let env_cfg = EnvConfig {
        stack_n,
        noise: crate::observation::NoiseModel { var_xy, ..base_env.noise },
        rng_seed: seed,
        ..*base_env
    };
    let cfg = TrainConfig { seed, checkpoint_every: SWEEP_SELECT_EVERY, ..*train_cfg };
    let mut best: Option<(f64, QNet)> = None;
    let mut sink = |_step: u64, net: &QNet, log: &crate::learner::TrainLog| -> Result<()> {
        let scores = log.scores();
        if scores.is_empty() {
            return Ok(());
        }
        let tail = &scores[scores.len().saturating_sub(SWEEP_SELECT_WINDOW)..];
        let smoothed = tail.iter().sum::<f64>() / tail.len() as f64;
        if best.as_ref().map_or(true, |(b, _)| smoothed > *b) {
            best = Some((smoothed, net.clone()));
        }
        Ok(())
    };
    match learner::train(&env_cfg, &cfg, None, Some(&mut sink), None) {
        Ok(out) => {
            let net = match &best {
                Some((_, snapshot)) => snapshot,
                None => &out.net,
            };
            let mut sum = 0.0;
            for i in 0..eval_episodes {
                let ep_seed = derive_seed(seed ^ SWEEP_EVAL_SALT, i);
                sum += greedy_rollout_score(net, &RandomPolicy, &env_cfg, ep_seed)?;
            }
            Ok(SweepCell {
                var_xy,
                stack_n,
                seed,
                score: Some(sum / eval_episodes as f64),
            })
        }
        Err(Error::Divergence { .. }) => {
            Ok(SweepCell { var_xy, stack_n, seed, score: None })
        }
        Err(e) => Err(e),
    }
}

/// A single x-position of the aggregated training curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub index: usize,
    pub mean: f64,
    /// Sample standard deviation across seeds; 0 for a single log.
    pub spread: f64,
}

/// Smooth each per-seed score log, then aggregate mean and spread per
/// episode index over the shortest common length.
pub fn training_curves(logs: &[Vec<f64>], window: usize) -> Result<Vec<CurvePoint>> {
    if window == 0 {
        return Err(Error::Contract("smoothing window must be >= 1".into()));
    }
    if logs.is_empty() {
        return Ok(Vec::new());
    }
    let smoothed: Vec<Vec<f64>> = logs.iter().map(|l| moving_average(l, window)).collect();
    let len = smoothed.iter().map(Vec::len).min().unwrap_or(0);
    let k = smoothed.len() as f64;
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let vals: Vec<f64> = smoothed.iter().map(|s| s[i]).collect();
        let mean = vals.iter().sum::<f64>() / k;
        let spread = if vals.len() > 1 {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        out.push(CurvePoint { index: i, mean, spread });
    }
    Ok(out)
}

/// Per-match records as comma-separated text.
pub fn write_match_records_csv<W: Write>(w: &mut W, records: &[MatchRecord]) -> Result<()> {
    writeln!(w, "episode,result,steps,agent_score,enemy_score,seed")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.episode,
            r.result.as_str(),
            r.steps,
            r.agent_score,
            r.enemy_score,
            r.seed
        )?;
    }
    Ok(())
}

/// Human-readable tournament report with the win/(win+lose) column.
pub fn write_summary_report<W: Write>(w: &mut W, summary: &TournamentSummary) -> Result<()> {
    writeln!(w, "episodes,{}", summary.total())?;
    writeln!(w, "wins,{}", summary.wins)?;
    writeln!(w, "losses,{}", summary.losses)?;
    writeln!(w, "ties,{}", summary.ties)?;
    match summary.win_probability() {
        Some(p) => writeln!(w, "win_probability,{p:.2}")?,
        None => writeln!(w, "win_probability,undefined")?,
    }
    Ok(())
}

/// Sweep matrix laid out with one row per noise variance, one column per
/// stack count, plus the normalized stacking column.
pub fn write_sweep_report<W: Write>(w: &mut W, sweep: &SweepResult) -> Result<()> {
    let mut header = vec!["noise_var_xy".to_string()];
    header.extend(sweep.stack_ns.iter().map(|n| format!("stack_{n}")));
    header.push("normalized_stacking_score".into());
    writeln!(w, "{}", header.join(","))?;
    for &var in &sweep.noise_variances {
        let mut row = vec![format!("{var}")];
        for &n in &sweep.stack_ns {
            row.push(match sweep.mean_score(var, n) {
                Some(s) => format!("{s:.2}"),
                None => "diverged".into(),
            });
        }
        row.push(match sweep.normalized_score(var) {
            Some(s) if s.is_finite() => format!("{s:.2}"),
            Some(_) => "undefined".into(),
            None => "diverged".into(),
        });
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{GreedyPolicy, RandomPolicy};
    use crate::sim::Arena;

    fn eval_cfg(seed: u64) -> EnvConfig {
        EnvConfig {
            arena: Arena::centered(100.0, 100.0),
            terminate_on_advantage: true,
            rng_seed: seed,
            ..EnvConfig::default()
        }
    }

    #[test]
    fn table_arithmetic_fixture() {
        let s = TournamentSummary::from_counts(726, 99, 175);
        assert_eq!(s.total(), 1000);
        let p = s.win_probability().unwrap();
        assert!((p - 0.88).abs() < 0.005, "win probability {p}");
        assert_eq!(format!("{:.2}", p), "0.88");
        assert_eq!(TournamentSummary::from_counts(0, 0, 10).win_probability(), None);
    }

    #[test]
    fn tournament_requires_advantage_termination() {
        let cfg = EnvConfig { terminate_on_advantage: false, ..eval_cfg(0) };
        assert!(run_tournament(&RandomPolicy, &RandomPolicy, &cfg, 1, 0, false).is_err());
    }

    #[test]
    fn tournament_determinism_and_count_conservation() {
        let cfg = eval_cfg(0);
        let (s1, r1) = run_tournament(&RandomPolicy, &RandomPolicy, &cfg, 50, 7, false).unwrap();
        let (s2, r2) = run_tournament(&RandomPolicy, &RandomPolicy, &cfg, 50, 7, false).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(r1, r2);
        assert_eq!(s1.total(), 50);
    }

    #[test]
    fn mirror_fairness_swaps_wins_and_losses() {
        let net = QNet::new(7, 16, 3);
        let a = GreedyPolicy { net: &net };
        let cfg = eval_cfg(0);
        let (fwd, _) = run_tournament(&a, &RandomPolicy, &cfg, 60, 11, false).unwrap();
        let (rev, _) = run_tournament(&RandomPolicy, &a, &cfg, 60, 11, true).unwrap();
        assert_eq!(fwd.wins, rev.losses);
        assert_eq!(fwd.losses, rev.wins);
        assert_eq!(fwd.ties, rev.ties);
    }

    #[test]
    fn self_vs_self_is_balanced() {
        let net = QNet::new(7, 16, 5);
        let p = GreedyPolicy { net: &net };
        // Role-swapped seed pairing: each seed played from both sides.
        let (fwd, _) = run_tournament(&p, &p, &eval_cfg(0), 100, 3, false).unwrap();
        let (rev, _) = run_tournament(&p, &p, &eval_cfg(0), 100, 3, true).unwrap();
        let wins = fwd.wins + rev.wins;
        let losses = fwd.losses + rev.losses;
        // Identical policies from both sides of the same seeds: exact balance.
        assert_eq!(wins, losses);
    }

    #[test]
    fn constructed_immediate_advantage_counts_as_win() {
        // Tiny arena forces close spawns, so wins happen quickly for a
        // policy that simply flies; run until the first decided episode.
        let cfg = EnvConfig { arena: Arena::centered(60.0, 60.0), ..eval_cfg(0) };
        let (s, records) = run_tournament(&RandomPolicy, &RandomPolicy, &cfg, 200, 5, false).unwrap();
        assert!(s.wins + s.losses > 0, "no decided episode in 200");
        assert!(records
            .iter()
            .all(|r| r.steps >= 1 && r.steps <= cfg.episode_length));
    }

    #[test]
    fn moving_average_behaviour() {
        assert_eq!(moving_average(&[2.0; 5], 3), vec![2.0; 5]);
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(moving_average(&xs, 1), xs.to_vec());
        assert_eq!(moving_average(&xs, 2), vec![1.0, 1.5, 2.5, 3.5]);
    }

    #[test]
    fn training_curves_aggregation() {
        let logs = vec![vec![1.0, 3.0, 5.0], vec![3.0, 5.0, 7.0], vec![2.0, 4.0, 6.0]];
        let curve = training_curves(&logs, 1).unwrap();
        assert_eq!(curve.len(), 3);
        assert_eq!(curve[0].mean, 2.0);
        assert_eq!(curve[2].mean, 6.0);
        assert!((curve[1].spread - 1.0).abs() < 1e-12);
        // window=1 is the identity transform per log.
        let single = training_curves(&[vec![4.0, 4.0]], 1).unwrap();
        assert!(single.iter().all(|p| p.mean == 4.0 && p.spread == 0.0));
    }

    #[test]
    fn single_cell_sweep_normalizes_to_100() {
        let base = EnvConfig { arena: Arena::centered(80.0, 80.0), ..EnvConfig::default() };
        let cfg = TrainConfig {
            total_timesteps: 1_500,
            eps_anneal_steps: 1_000,
            hidden_dim: 8,
            ..TrainConfig::default()
        };
        let sweep = stacking_sweep(&[5.0], &[1], &base, &cfg, &[0], 10, None).unwrap();
        assert_eq!(sweep.cells.len(), 1);
        assert_eq!(sweep.normalized_score(5.0), Some(100.0));
        let mut buf = Vec::new();
        write_sweep_report(&mut buf, &sweep).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("normalized_stacking_score"));
        assert!(text.contains("100.00"));
    }
}
