//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use depthrl_core::agent::{rollout_greedy, train};
use depthrl_core::comfort::{comfort_score, fit_model, ComfortModel, FeatureExtractor, LabeledSample};
use depthrl_core::disparity::{generate_scene, DisparityStats};
use depthrl_core::env::{reset, step};
use depthrl_core::oracle::{grid_search, regret, value_iteration, RatioGridMDP};
use depthrl_core::{
    Action, AgentConfig, DisparityMap, EnvConfig, FeatureParams, FeatureVector, QNetwork, SceneSpec, Transition,
    ViewingGeometry,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rollout(scene: &DisparityMap, cfg: &EnvConfig, actions: impl IntoIterator<Item = Action>) -> Vec<Transition> {
    let mut state = reset(scene, cfg).unwrap();
    let mut out = Vec::new();
    for a in actions {
        let tr = step(scene, &state, a, cfg).unwrap();
        state = tr.next_state.clone();
        let done = tr.done;
        out.push(tr);
        if done {
            break;
        }
    }
    out
}

fn gradient_oracle() -> Outcome {
    let start = Instant::now();
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut worst_abs) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let mut net = QNetwork::new(&[7, 5, 4, 3], &mut rng).unwrap();
        // Random biases too: with zero biases a dead layer leaves the next
        // pre-activation exactly on the ReLU kink.
        let params: Vec<f64> = (0..net.num_params()).map(|_| rng.random_range(-1.0..1.0)).collect();
        net.set_params(&params).unwrap();
        let x: Vec<f64> = (0..7).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a = rng.random_range(0..3);
        let y = rng.random_range(-3.0..3.0);
        let loss = |n: &QNetwork| {
            let q = n.forward(&x).unwrap()[a];
            (q - y) * (q - y)
        };
        let analytic = net.backward(&x, a, y).unwrap().flat();
        let params = net.params();
        let mut probe = net.clone();
        for (k, g) in analytic.iter().enumerate() {
            let mut p = params.clone();
            p[k] += h;
            probe.set_params(&p).unwrap();
            let up = loss(&probe);
            p[k] = params[k] - h;
            probe.set_params(&p).unwrap();
            let fd = (up - loss(&probe)) / (2.0 * h);
            let err = (g - fd).abs();
            worst_abs = worst_abs.max(err);
            if err > 1e-7 {
                worst = worst.max(err / g.abs().max(fd.abs()));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-4 && secs < 5.0,
        format!("max relative error {worst:.3e} (< 1e-4, abs floor 1e-7; max abs diff {worst_abs:.3e}), {secs:.3} s (< 5 s)"),
    )
}

fn value_iteration_vs_enumeration() -> Outcome {
    let cfg = EnvConfig {
        delta: 0.1,
        r_min: 0.8,
        r_max: 1.2,
        t_max: 3,
        beta: 0.5,
        tau: 1.0,
        ..EnvConfig::default()
    };
    let gamma = AgentConfig::default().gamma;
    let scenes: Vec<_> = (0..10)
        .map(|s| generate_scene(&SceneSpec::default(), 500 + s).unwrap())
        .collect();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut grid_ok = true;
    for scene in &scenes {
        let mdp = RatioGridMDP::build(scene, &cfg).unwrap();
        grid_ok &= mdp.len() == 5;
        let v = value_iteration(&mdp, gamma).value(mdp.identity, 0);
        let mut best = f64::NEG_INFINITY;
        for code in 0..27 {
            let seq = [code % 3, code / 3 % 3, code / 9].map(|i| Action::from_index(i).unwrap());
            let ret: f64 = rollout(scene, &cfg, seq)
                .iter()
                .enumerate()
                .map(|(t, tr)| gamma.powi(t as i32) * tr.reward)
                .sum();
            best = best.max(ret);
        }
        worst = worst.max((v - best).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        grid_ok && worst <= 1e-12 && secs < 1.0,
        format!("max |V* - brute force| {worst:.3e} (<= 1e-12) over 10 scenes, {secs:.3} s (< 1 s)"),
    )
}

fn telescoping() -> Outcome {
    let cfg = EnvConfig {
        beta: 0.0,
        tau: 0.0,
        ..EnvConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let scene = generate_scene(&SceneSpec::default(), 300 + seed).unwrap();
        for _ in 0..100 {
            let actions: Vec<Action> = (0..=cfg.t_max)
                .map(|_| Action::from_index(rng.random_range(0..3)).unwrap())
                .collect();
            let ep = rollout(&scene, &cfg, actions);
            let ret: f64 = ep.iter().map(|t| t.reward).sum();
            let gain = ep.last().unwrap().next_state.score.vc - ep[0].state.score.vc;
            worst = worst.max((ret - gain).abs());
        }
    }
    outcome(
        worst < 1e-9,
        format!("max |return - dVC| {worst:.3e} (< 1e-9) over 500 episodes"),
    )
}

fn agent_vs_oracle() -> Outcome {
    let spec = SceneSpec::default();
    let train_scenes: Vec<_> = (0..40).map(|s| generate_scene(&spec, s).unwrap()).collect();
    let held_out: Vec<_> = (1000..1010).map(|s| generate_scene(&spec, s).unwrap()).collect();
    let env = EnvConfig::default();
    let agent = AgentConfig::default();
    let start = Instant::now();
    let (net, _) = train(&train_scenes, &env, &agent).unwrap();
    let mut hits = 0;
    let mut regrets = Vec::new();
    for scene in &held_out {
        let (traj, _) = rollout_greedy(&net, scene, &env).unwrap();
        let r = regret(&traj, &grid_search(scene, &env).unwrap()).unwrap();
        hits += usize::from(r <= 0.05);
        regrets.push(format!("{r:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        hits * 10 >= 9 * held_out.len() && secs < 300.0,
        format!(
            "{hits}/10 held-out scenes within 0.05 MOS (>= 9), {secs:.1} s (< 300 s); regrets [{}]",
            regrets.join(", ")
        ),
    )
}

fn fields(s: &DisparityStats) -> [f64; 7] {
    [s.min, s.max, s.mean, s.p5, s.p50, s.p95, s.range_p]
}

fn scaling_linearity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_comp, mut worst_stat) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (w, h) = (rng.random_range(1..16), rng.random_range(1..16));
        let mag = 10f64.powf(rng.random_range(-2.0..3.0));
        let values: Vec<f64> = (0..w * h).map(|_| rng.random_range(-mag..mag)).collect();
        let mut valid: Vec<bool> = (0..w * h).map(|_| rng.random_bool(0.9)).collect();
        valid[0] = true;
        let m = DisparityMap::new(w, h, values, valid).unwrap();
        let r1 = 10f64.powf(rng.random_range(-2.0..2.0));
        let r2 = 10f64.powf(rng.random_range(-2.0..2.0));

        let twice = m.scale_disparity(r1).unwrap().scale_disparity(r2).unwrap();
        let once = m.scale_disparity(r1 * r2).unwrap();
        for (a, b) in twice.valid_values().zip(once.valid_values()) {
            if a != b {
                worst_comp = worst_comp.max((a - b).abs() / b.abs());
            }
        }

        let base = m.stats();
        let scaled = m.scale_disparity(r1).unwrap().stats();
        let peak = m.valid_values().fold(0.0f64, |acc, v| acc.max(v.abs())) * r1;
        for (got, want) in fields(&scaled).iter().zip(fields(&base)) {
            let want = want * r1;
            let denom = want.abs().max(peak);
            if denom > 0.0 {
                worst_stat = worst_stat.max((got - want).abs() / denom);
            }
        }
    }
    outcome(
        worst_comp <= 1e-12 && worst_stat <= 1e-12,
        format!("1000 triples: composition {worst_comp:.3e}, percentile equivariance {worst_stat:.3e} (<= 1e-12)"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_depthrl");
    let dir = tempfile::tempdir().unwrap();
    let scenes = dir.path().join("scenes");
    let run = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .status()
            .map(|s| s.success())
            .unwrap_or(false)
    };
    let p = |path: &Path| path.to_str().unwrap().to_string();
    if !run(&[
        "--quiet",
        "generate",
        "--count",
        "40",
        "--seed",
        "0",
        "--out",
        &p(&scenes),
    ]) {
        return outcome(false, "scene generation failed".into());
    }
    let start = Instant::now();
    let outs = [dir.path().join("a"), dir.path().join("b")];
    for out in &outs {
        if !run(&["--quiet", "--seed", "0", "train", &p(&scenes), "--out", &p(out)]) {
            return outcome(false, "train command failed".into());
        }
    }
    let files = ["model.json", "episodes.csv", "losses.csv"];
    let same = files
        .iter()
        .all(|f| fs::read(outs[0].join(f)).ok() == fs::read(outs[1].join(f)).ok() && outs[0].join(f).exists());
    outcome(
        same,
        format!(
            "two default train runs, byte-identical {}: {same} ({:.1} s)",
            files.join("/"),
            start.elapsed().as_secs_f64()
        ),
    )
}

/// Independent oracle: Gauss-Jordan inverse of the augmented normal matrix.
fn ridge_by_inverse(xs: &[Vec<f64>], ys: &[f64], lambda: f64) -> Vec<f64> {
    let n = xs[0].len() + 1;
    let mut a = vec![vec![0.0; 2 * n]; n];
    let mut rhs = vec![0.0; n];
    for (x, &y) in xs.iter().zip(ys) {
        let z: Vec<f64> = x.iter().copied().chain([1.0]).collect();
        for i in 0..n {
            rhs[i] += z[i] * y;
            for j in 0..n {
                a[i][j] += z[i] * z[j];
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        if i + 1 < n {
            row[i] += lambda;
        }
        row[n + i] = 1.0;
    }
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        let d = a[c][c];
        a[c].iter_mut().for_each(|v| *v /= d);
        let pivot_row = a[c].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != c {
                let f = row[c];
                row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
            }
        }
    }
    (0..n).map(|i| (0..n).map(|j| a[i][n + j] * rhs[j]).sum()).collect()
}

fn ridge_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = FeatureParams::default().len();
    let design = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect()
    };
    let samples = |xs: &[Vec<f64>], ys: &[f64]| -> Vec<LabeledSample> {
        xs.iter()
            .zip(ys)
            .map(|(x, &y)| LabeledSample::new(FeatureVector::new(x.clone()), y).unwrap())
            .collect()
    };

    let xs = design(&mut rng, 100);
    let w: Vec<f64> = (0..p).map(|_| rng.random_range(-0.09..0.09)).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| 3.0 + x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let model = fit_model(&samples(&xs, &ys), 0.0).unwrap();
    let recovery = model
        .weights
        .iter()
        .zip(&w)
        .map(|(a, b)| (a - b).abs())
        .fold((model.bias - 3.0).abs(), f64::max);

    let xs = design(&mut rng, 100);
    let ys: Vec<f64> = xs.iter().map(|_| rng.random_range(1.0..5.0)).collect();
    let model = fit_model(&samples(&xs, &ys), 0.1).unwrap();
    let oracle = ridge_by_inverse(&xs, &ys, 0.1);
    let agreement = model
        .weights
        .iter()
        .chain([&model.bias])
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(
        recovery <= 1e-6 && agreement <= 1e-9,
        format!("recovery error {recovery:.3e} (<= 1e-6), dense-solve agreement {agreement:.3e} (<= 1e-9)"),
    )
}

fn comfort_range() -> Outcome {
    let params = FeatureParams::default();
    let model = ComfortModel::default_for(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut in_range = 0;
    for i in 0..10_000 {
        let spread = if i % 2 == 0 { 5.0 } else { 1e3 };
        let f: Vec<f64> = (0..params.len()).map(|_| rng.random_range(-spread..spread)).collect();
        let vc = comfort_score(&FeatureVector::new(f), &model).unwrap();
        in_range += usize::from((1.0..=5.0).contains(&vc));
    }
    let ex = FeatureExtractor::new(ViewingGeometry::default(), params).unwrap();
    let flat = comfort_score(
        &ex.compute(&DisparityMap::constant(64, 48, 0.0).unwrap()).unwrap(),
        &model,
    )
    .unwrap();
    outcome(
        in_range == 10_000 && flat == 5.0,
        format!("{in_range}/10000 scores in [1, 5]; flat scene scores {flat}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("gradient oracle", gradient_oracle),
        ("value iteration vs enumeration", value_iteration_vs_enumeration),
        ("telescoping return", telescoping),
        ("agent vs oracle regret", agent_vs_oracle),
        ("scaling linearity", scaling_linearity),
        ("training determinism", determinism),
        ("ridge recovery", ridge_recovery),
        ("comfort range and flat ceiling", comfort_range),
    ];
    let mut failures = 0;
    let start = Instant::now();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failures += usize::from(!o.pass);
        println!(
            "{} [{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    let total: Duration = start.elapsed();
    println!("{}/8 criteria passed in {:.1} s", 8 - failures, total.as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
