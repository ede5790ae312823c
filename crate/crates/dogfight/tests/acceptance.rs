//! Acceptance suite: ten criteria covering the reward oracle, kinematics
//! invariants, noise statistics, gradients, learning targets, the scaled
//! stacking and self-play trend experiments, summary arithmetic, and CLI
//! determinism. Each criterion prints one PASS line; a failed assertion
//! fails the criterion.
//!
//! The trend criteria (06-08) run a scaled protocol: 100 m x 100 m arena,
//! hidden width 32, learning rate 5e-4, 300k environment steps. Tolerances
//! are pinned in the constants below.

use std::process::Command;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dogfight::env::{EnvConfig, Environment, Transition};
use dogfight::eval::{self, SweepResult, TournamentSummary};
use dogfight::learner::{self, double_dqn_target, TrainConfig};
use dogfight::net::QNet;
use dogfight::observation::{self, NoiseModel};
use dogfight::policy::GreedyPolicy;
use dogfight::reward::{compute_reward, RewardParams};
use dogfight::sim::{self, AircraftState, Arena, KinematicsParams, NUM_ACTIONS};

fn pass(n: usize, what: &str) {
    println!("ACCEPTANCE {n:02}: PASS - {what}");
}

/// Wrap-aware absolute angle difference in degrees.
fn ang_diff(a: f64, b: f64) -> f64 {
    ((a - b + 180.0).rem_euclid(360.0) - 180.0).abs()
}

// ---------------------------------------------------------------- criterion 1

/// Directly transcribed reference of the reward rule: crash band [0, 10)
/// gives -1; in the engagement band [10, 100] the agent's gate (|ATA| <= 30,
/// |AA| < 60) pays 1 - |ATA_a|/30, the enemy's mirrored gate pays
/// |ATA_e|/30 - 1, agent gate checked first; everything else is 0.
#[allow(clippy::if_same_then_else)]
fn reference_reward(r: f64, ata_a: f64, aa_a: f64, ata_e: f64, aa_e: f64) -> f64 {
    if (0.0..10.0).contains(&r) {
        -1.0
    } else if (10.0..=100.0).contains(&r) {
        if ata_a.abs() <= 30.0 && aa_a.abs() < 60.0 {
            1.0 - ata_a.abs() / 30.0
        } else if ata_e.abs() <= 30.0 && aa_e.abs() < 60.0 {
            ata_e.abs() / 30.0 - 1.0
        } else {
            0.0
        }
    } else {
        0.0
    }
}

#[test]
fn criterion_01_reward_oracle_grid() {
    let p = RewardParams::default();
    let rs = [0.0, 5.0, 9.99, 10.0, 50.0, 100.0, 100.01, 150.0];
    let atas = [-45.0, -30.0, 0.0, 15.0, 30.0, 45.0];
    let aas = [0.0, 59.0, 60.0, 90.0];
    let mut cases = 0usize;
    for r in rs {
        for ata_a in atas {
            for ata_e in atas {
                for aa_a in aas {
                    for aa_e in aas {
                        let g = sim::CombatGeometry { r, ata_a, ata_e, aa_a, aa_e };
                        let got = compute_reward(&g, &p);
                        let want = reference_reward(r, ata_a, aa_a, ata_e, aa_e);
                        // Exact: both sides evaluate the same closed-form
                        // arithmetic, so zero tolerance.
                        assert_eq!(got, want, "r={r} ata_a={ata_a} ata_e={ata_e} aa_a={aa_a} aa_e={aa_e}");
                        cases += 1;
                    }
                }
            }
        }
    }
    assert_eq!(cases, 8 * 6 * 6 * 4 * 4);
    pass(1, "reward matches transcribed reference on the full gate grid (exact)");
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn criterion_02_kinematics_invariants() {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let params = KinematicsParams::default();
    let huge = Arena::centered(1e9, 1e9);
    let plane = |rng: &mut ChaCha8Rng| AircraftState {
        x: rng.gen_range(-200.0..200.0),
        y: rng.gen_range(-200.0..200.0),
        psi: rng.gen_range(-180.0..180.0),
        v: rng.gen_range(4.0..8.0),
    };
    for _ in 0..10_000 {
        let a = plane(&mut rng);
        let mut e = plane(&mut rng);
        // Keep the pair non-degenerate.
        if (a.x - e.x).abs() < 1e-3 && (a.y - e.y).abs() < 1e-3 {
            e.x += 1.0;
        }
        let g = sim::compute_geometry(&a, &e).unwrap();

        // Rotation invariance of r/ATA/AA under a rigid rotation of the scene.
        let theta: f64 = rng.gen_range(-180.0..180.0);
        let (s, c) = theta.to_radians().sin_cos();
        let rot = |p: &AircraftState| AircraftState {
            x: c * p.x - s * p.y,
            y: s * p.x + c * p.y,
            psi: sim::wrap_angle(p.psi + theta).unwrap(),
            v: p.v,
        };
        let gr = sim::compute_geometry(&rot(&a), &rot(&e)).unwrap();
        assert!((gr.r - g.r).abs() < TOL);
        assert!(ang_diff(gr.ata_a, g.ata_a) < TOL);
        assert!(ang_diff(gr.ata_e, g.ata_e) < TOL);
        assert!(ang_diff(gr.aa_a, g.aa_a) < TOL);
        assert!(ang_diff(gr.aa_e, g.aa_e) < TOL);

        // Translation invariance.
        let (dx, dy) = (rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3));
        let tr = |p: &AircraftState| AircraftState { x: p.x + dx, y: p.y + dy, ..*p };
        let gt = sim::compute_geometry(&tr(&a), &tr(&e)).unwrap();
        assert!((gt.r - g.r).abs() < TOL);
        assert!(ang_diff(gt.ata_a, g.ata_a) < TOL);
        assert!(ang_diff(gt.aa_e, g.aa_e) < TOL);

        // Straight-line consistency: the no-op action advances along the
        // heading by v per step.
        let noop = sim::action_from_index(4).unwrap();
        let mut s_now = a;
        for k in 1..=5u32 {
            s_now = sim::step_aircraft(s_now, noop, &params, &huge);
            let rad = a.psi.to_radians();
            assert!((s_now.x - (a.x + f64::from(k) * a.v * rad.cos())).abs() < TOL);
            assert!((s_now.y - (a.y + f64::from(k) * a.v * rad.sin())).abs() < TOL);
            assert!((s_now.v - a.v).abs() < TOL);
        }

        // Speed clipping under a random action sequence.
        let mut s_now = a;
        for _ in 0..30 {
            let act = sim::action_from_index(rng.gen_range(0..NUM_ACTIONS)).unwrap();
            s_now = sim::step_aircraft(s_now, act, &params, &huge);
            assert!((4.0..=8.0).contains(&s_now.v), "v={}", s_now.v);
        }
    }

    // Saturation at both speed limits.
    let accel = sim::action_from_index(2).unwrap(); // dpsi 1, dv +1
    assert_eq!(accel.dv_sign, 1);
    let top = AircraftState::new(0.0, 0.0, 0.0, 8.0);
    assert_eq!(sim::step_aircraft(top, accel, &params, &huge).v, 8.0);
    let brake = sim::action_from_index(6).unwrap(); // dpsi -1, dv -1
    assert_eq!(brake.dv_sign, -1);
    let bottom = AircraftState::new(0.0, 0.0, 0.0, 4.0);
    assert_eq!(sim::step_aircraft(bottom, brake, &params, &huge).v, 4.0);

    pass(2, "geometry rotation/translation invariance, straight lines, speed clipping (1e-9, 10^4 cases)");
}

// ---------------------------------------------------------------- criterion 3

#[test]
fn criterion_03_noise_statistics() {
    let n = 100_000;
    let enemy = AircraftState::new(3.0, -4.0, 20.0, 5.0);
    for (i, var) in [1.0, 5.0, 10.0, 20.0, 40.0].into_iter().enumerate() {
        let nm = NoiseModel { mu: 0.0, var_xy: var, var_psi: var };
        let mut rng = ChaCha8Rng::seed_from_u64(0x30 + i as u64);
        let mut xs = Vec::with_capacity(n);
        let mut psis = Vec::with_capacity(n);
        for _ in 0..n {
            let c = observation::corrupt_enemy(&enemy, &nm, &mut rng);
            xs.push(c.x - enemy.x);
            psis.push(c.psi - enemy.psi);
        }
        for (label, d) in [("x", &xs), ("psi", &psis)] {
            let mean = d.iter().sum::<f64>() / n as f64;
            let v = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!(
                (v - var).abs() < 0.05 * var,
                "{label} sample variance {v} vs nominal {var}"
            );
        }
    }

    // Zero noise is exactly transparent, end to end.
    let nm = NoiseModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let agent = AircraftState::new(-20.0, 11.0, -45.0, 6.0);
    let corrupted = observation::corrupt_enemy(&enemy, &nm, &mut rng);
    assert_eq!(corrupted, enemy);
    let arena = Arena::default();
    let kin = KinematicsParams::default();
    let via_noise = observation::normalize(
        &observation::make_raw_observation(&agent, &corrupted, enemy.v).unwrap(),
        &arena,
        &kin,
    );
    let direct = observation::normalize(
        &observation::make_raw_observation(&agent, &enemy, enemy.v).unwrap(),
        &arena,
        &kin,
    );
    assert_eq!(via_noise, direct);

    // And through the environment: the perceived pose is the true pose.
    let cfg = EnvConfig { rng_seed: 5, ..EnvConfig::default() };
    let mut env = Environment::new(cfg).unwrap();
    env.step(4, 4).unwrap();
    assert_eq!(env.perceived_by_agent(), env.enemy_state());

    pass(3, "injected noise variance within 5% for {1,5,10,20,40}; zero-noise pipeline exact");
}

// ---------------------------------------------------------------- criterion 4

#[test]
fn criterion_04_gradient_check() {
    const TOL: f64 = 1e-4;
    const EPS: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(0x04);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let input = if trial % 2 == 0 { 7 } else { 14 };
        let hidden = 4 + trial % 4;
        let net = QNet::new(input, hidden, 1000 + trial as u64);
        let b = 3;
        let states: Vec<Vec<f64>> = (0..b)
            .map(|_| (0..input).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let batch: Vec<(&[f64], usize)> = states
            .iter()
            .map(|s| (s.as_slice(), rng.gen_range(0..NUM_ACTIONS)))
            .collect();
        let targets: Vec<f64> = (0..b).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (_, grads) = net.loss_and_gradients(&batch, &targets).unwrap();

        let loss_at = |n: &QNet| n.loss_and_gradients(&batch, &targets).unwrap().0;
        for layer in 0..4 {
            for bias in [false, true] {
                let len = if bias { grads.layers()[layer].b.len() } else { grads.layers()[layer].w.len() };
                for k in 0..len {
                    let mut plus = net.clone();
                    let mut minus = net.clone();
                    {
                        let ls = plus.layers_mut();
                        if bias { ls[layer].b[k] += EPS } else { ls[layer].w[k] += EPS }
                    }
                    {
                        let ls = minus.layers_mut();
                        if bias { ls[layer].b[k] -= EPS } else { ls[layer].w[k] -= EPS }
                    }
                    let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * EPS);
                    let analytic = if bias { grads.layers()[layer].b[k] } else { grads.layers()[layer].w[k] };
                    let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
                    worst = worst.max(rel);
                    assert!(rel < TOL, "layer {layer} bias={bias} k={k}: analytic {analytic} numeric {numeric}");
                }
            }
        }
    }
    pass(4, &format!("analytic vs central-difference gradients on 20 nets, max rel err {worst:.2e} < 1e-4"));
}

// ---------------------------------------------------------------- criterion 5

/// Build a Q-network whose output is exactly computable by hand: identity
/// first layers on one-hot 2-dimensional states, all Q structure in the
/// value/advantage heads. Actions 3..8 share advantage 0 with actions
/// whose advantage rows are given for the two basis states.
fn fixture_net(value_w: [f64; 2], value_b: f64, adv_s1: [f64; 9], adv_s2: [f64; 9]) -> QNet {
    let mut net = QNet::new(2, 2, 0);
    {
        let [l1, l2, value, advantage] = net.layers_mut();
        l1.w.copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        l1.b.copy_from_slice(&[0.0, 0.0]);
        l2.w.copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        l2.b.copy_from_slice(&[0.0, 0.0]);
        value.w.copy_from_slice(&value_w);
        value.b[0] = value_b;
        for j in 0..9 {
            advantage.w[2 * j] = adv_s1[j];
            advantage.w[2 * j + 1] = adv_s2[j];
            advantage.b[j] = 0.0;
        }
    }
    net
}

#[test]
fn criterion_05_double_dqn_target_oracle() {
    const TOL: f64 = 1e-12;
    // Online: V(s1)=0.6, V(s2)=-0.15; advantages select action 0 in s1 and
    // action 2 in s2.
    let online = fixture_net(
        [0.5, -0.25],
        0.1,
        [3.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    );
    // Target: V(s1)=0.25, V(s2)=0.35 with its own advantage rows.
    let target = fixture_net(
        [0.2, 0.3],
        0.05,
        [1.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    );
    let s1 = vec![1.0, 0.0];
    let s2 = vec![0.0, 1.0];

    // Hand check of the fixture's Q values: Q(s,a) = V(s) + A(s,a) - mean_a A.
    let q1 = online.forward(&s1).unwrap();
    assert!((q1[0] - (0.6 + 3.0 - 6.0 / 9.0)).abs() < TOL);
    assert_eq!(online.greedy_action(&s1).unwrap(), 0);
    assert_eq!(online.greedy_action(&s2).unwrap(), 2);

    let t = |s_next: &[f64], r: f64, done: bool| Transition {
        s: vec![0.0, 0.0],
        a: 0,
        r,
        s_next: s_next.to_vec(),
        done,
    };
    // y = r + gamma * Q_target(s', argmax_a Q_online(s', a)).
    // s1: a* = 0, Q_target(s1, 0) = 0.25 + 1 - 6/9 = 7/12.
    let y = double_dqn_target(&online, &target, &t(&s1, 0.5, false), 0.9).unwrap();
    assert!((y - 1.025).abs() < TOL, "y = {y}");
    // s2: a* = 2, Q_target(s2, 2) = 0.35 + 0 - 3/9 = 1/60.
    let y = double_dqn_target(&online, &target, &t(&s2, -0.25, false), 0.9).unwrap();
    assert!((y - (-0.25 + 0.9 * (0.35 - 1.0 / 3.0))).abs() < TOL, "y = {y}");
    assert!((y - (-0.235)).abs() < TOL, "y = {y}");
    // Terminal transitions bootstrap nothing.
    let y = double_dqn_target(&online, &target, &t(&s1, 0.7, true), 0.9).unwrap();
    assert!((y - 0.7).abs() < TOL);

    // Dueling head: a constant shift of every advantage leaves Q unchanged.
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for trial in 0..10 {
        let net = QNet::new(14, 8, 500 + trial);
        let s: Vec<f64> = (0..14).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q = net.forward(&s).unwrap();
        let mut shifted = net.clone();
        let c = rng.gen_range(-5.0..5.0);
        for b in shifted.layers_mut()[3].b.iter_mut() {
            *b += c;
        }
        let q2 = shifted.forward(&s).unwrap();
        for a in 0..NUM_ACTIONS {
            assert!((q[a] - q2[a]).abs() < TOL);
        }
    }

    pass(5, "double-DQN targets match hand-computed fixture values; dueling shift invariance (1e-12)");
}

// ------------------------------------------------------- criteria 6-8 shared

/// Scaled trend protocol: small arena and network so 300k-step runs fit a
/// desktop-CPU budget; everything else keeps the reference defaults.
fn scaled_env(var_xy: f64, var_psi: f64, stack_n: usize, seed: u64) -> EnvConfig {
    EnvConfig {
        arena: Arena::centered(60.0, 60.0),
        noise: NoiseModel { mu: 0.0, var_xy, var_psi },
        stack_n,
        rng_seed: seed,
        ..EnvConfig::default()
    }
}

fn scaled_train(seed: u64) -> TrainConfig {
    TrainConfig {
        hidden_dim: 64,
        learning_rate: 1e-3,
        total_timesteps: 300_000,
        seed,
        ..TrainConfig::default()
    }
}

const TREND_SEEDS: [u64; 3] = [0, 1, 2];
const TREND_EVAL_EPISODES: u64 = 300;

static ROW_V1: OnceLock<SweepResult> = OnceLock::new();
static ROW_V5: OnceLock<SweepResult> = OnceLock::new();
static ROW_V20: OnceLock<SweepResult> = OnceLock::new();

/// One variance row of the stack-1-vs-8 grid shared by criteria 6 and 7,
/// computed on first use so each criterion trains only the rows it reads.
fn trend_row(cell: &'static OnceLock<SweepResult>, var: f64) -> &'static SweepResult {
    cell.get_or_init(|| {
        eval::stacking_sweep(
            &[var],
            &[1, 8],
            &scaled_env(0.0, 1.0, 1, 0),
            &scaled_train(0),
            &TREND_SEEDS,
            TREND_EVAL_EPISODES,
            None,
        )
        .unwrap()
    })
}

#[test]
fn criterion_06_stacking_trend_at_high_noise() {
    let grid = trend_row(&ROW_V20, 20.0);
    let base = grid.mean_score(20.0, 1).expect("stack-1 cells complete");
    let stacked = grid.mean_score(20.0, 8).expect("stack-8 cells complete");
    assert!(base > 0.0, "stack-1 baseline must be positive, got {base}");
    assert!(
        stacked >= 1.2 * base,
        "stack=8 mean evaluation score {stacked:.2} is not >= 120% of stack=1 {base:.2}"
    );
    pass(6, &format!("at variance 20, stack=8 scores {stacked:.2} vs stack=1 {base:.2} (>= +20%)"));
}

#[test]
fn criterion_07_stacking_monotonic_in_noise() {
    let rows = [(&ROW_V1, 1.0), (&ROW_V5, 5.0), (&ROW_V20, 20.0)];
    let n: Vec<f64> = rows
        .iter()
        .map(|&(cell, v)| trend_row(cell, v).normalized_score(v).expect("row complete"))
        .collect();
    assert!(
        n[0] <= n[1] && n[1] <= n[2],
        "normalized stacking scores not non-decreasing: {n:?}"
    );
    pass(7, &format!("normalized stacking score non-decreasing over variances 1/5/20: {:.2} <= {:.2} <= {:.2}", n[0], n[1], n[2]));
}

#[test]
fn criterion_08_selfplay_benefit() {
    let stack = 4;
    let seed = 7;
    let env = scaled_env(10.0, 1.0, stack, seed);
    let cfg = scaled_train(seed);
    let selfplay = dogfight::selfplay::SelfPlayConfig { swap_every: 50_000, lambda: 0.2 };
    let with_sp = learner::train(&env, &cfg, Some(selfplay), None, None).unwrap();
    let without = learner::train(&env, &cfg, None, None, None).unwrap();

    let tourney_env = EnvConfig { terminate_on_advantage: true, ..env };
    let (summary, _) = eval::run_tournament(
        &GreedyPolicy { net: &with_sp.net },
        &GreedyPolicy { net: &without.net },
        &tourney_env,
        200,
        0xD06F,
        false,
    )
    .unwrap();
    let decided = summary.wins + summary.losses;
    assert!(decided >= 100, "only {decided} of 200 episodes were decided");
    let p = summary.win_probability().unwrap();
    assert!(
        p > 0.55,
        "self-play win probability {p:.3} not > 0.55 (wins {} losses {} ties {})",
        summary.wins,
        summary.losses,
        summary.ties
    );
    pass(8, &format!("self-play beats equal-budget baseline: win probability {p:.2} over {decided} decided episodes"));
}

// ---------------------------------------------------------------- criterion 9

#[test]
fn criterion_09_summary_arithmetic() {
    let s = TournamentSummary::from_counts(726, 99, 175);
    let p = s.win_probability().unwrap();
    assert_eq!(format!("{p:.2}"), "0.88");
    assert_eq!(s.total(), 1000);

    let mut buf = Vec::new();
    eval::write_summary_report(&mut buf, &s).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains("win_probability,0.88"), "{text}");

    // Recomputation from counts for a spread of fixtures.
    for (w, l, t) in [(1u64, 0u64, 0u64), (0, 1, 0), (10, 30, 60), (500, 500, 0)] {
        let s = TournamentSummary::from_counts(w, l, t);
        let p = s.win_probability().unwrap();
        assert!((p - w as f64 / (w + l) as f64).abs() < 1e-15);
    }
    assert!(TournamentSummary::from_counts(0, 0, 10).win_probability().is_none());

    pass(9, "win/(win+lose) recomputation exact; fixture (726, 99, 175) -> 0.88");
}

// --------------------------------------------------------------- criterion 10

fn run_cli(dir: &std::path::Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dogfight"))
        .args(args)
        .current_dir(dir)
        .env_remove("DOGFIGHT_OUT")
        .output()
        .expect("spawn dogfight binary")
}

fn assert_same_bytes(a: &std::path::Path, b: &std::path::Path) {
    let ba = std::fs::read(a).unwrap();
    let bb = std::fs::read(b).unwrap();
    assert_eq!(ba, bb, "{} differs from {}", a.display(), b.display());
}

#[test]
fn criterion_10_cli_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let small_arena = [
        "--set", "env.arena.x_min=-50",
        "--set", "env.arena.x_max=50",
        "--set", "env.arena.y_min=-50",
        "--set", "env.arena.y_max=50",
        "--set", "train.hidden_dim=16",
    ];

    // train twice with one seed: identical score log and checkpoint bytes.
    for name in ["a", "b"] {
        let mut args = vec!["train", "--steps", "4000", "--seed", "11", "--noise-var-xy", "5",
                            "--out", "runs", "--name", name];
        args.extend_from_slice(&small_arena);
        let out = run_cli(dir, &args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_same_bytes(&dir.join("runs/a/score_log.csv"), &dir.join("runs/b/score_log.csv"));
    assert_same_bytes(&dir.join("runs/a/final.ckpt"), &dir.join("runs/b/final.ckpt"));

    // evaluate twice: identical match records and summary.
    for name in ["ea", "eb"] {
        let mut args = vec!["evaluate",
            "--checkpoint-a", "runs/a/final.ckpt",
            "--checkpoint-b", "runs/b/final.ckpt",
            "--episodes", "40", "--noise-var-xy", "5",
            "--out", "runs", "--name", name];
        args.extend_from_slice(&small_arena);
        let out = run_cli(dir, &args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_same_bytes(&dir.join("runs/ea/matches.csv"), &dir.join("runs/eb/matches.csv"));
    assert_same_bytes(&dir.join("runs/ea/summary.csv"), &dir.join("runs/eb/summary.csv"));

    // sweep twice: identical cell table and report.
    for name in ["sa", "sb"] {
        let mut args = vec!["sweep", "--variances", "5", "--stacks", "1,2", "--seeds", "3",
            "--set", "train.total_timesteps=2000",
            "--out", "runs", "--name", name];
        args.extend_from_slice(&small_arena);
        let out = run_cli(dir, &args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_same_bytes(&dir.join("runs/sa/cells.csv"), &dir.join("runs/sb/cells.csv"));
    assert_same_bytes(&dir.join("runs/sa/report.csv"), &dir.join("runs/sb/report.csv"));

    pass(10, "repeated train/evaluate/sweep invocations are byte-identical under one seed");
}
