//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. The training criteria take about an hour on
//! one core.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};
use svrt_core::dataset::{directory_hash, generate_dataset, materialize, per_image_seed, DatasetConfig, Split};
use svrt_core::harness::{
    audit_leakage, human_accuracy, run_benchmark, Flag, HumanCohortStats, SessionParams, SessionRegistry,
    SessionStatus, TrialSession,
};
use svrt_core::nn::{checkpoint, gradient_check, to_batch, train, Network, TrainingConfig};
use svrt_core::problems::{verify_scene, ClassLabel, LeakKind, ProblemId, ProblemSpec, VariantKind};

mod common;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn pid(p: u32) -> ProblemId {
    ProblemId::new(p).unwrap()
}

fn minutes(d: Duration) -> f64 {
    d.as_secs_f64() / 60.0
}

fn gradient_correctness() -> (bool, String) {
    let cfg = DatasetConfig {
        n_train: 1,
        n_test: 1,
        ..DatasetConfig::new(pid(1), VariantKind::Original)
    };
    let images = materialize(&cfg, Split::Train).unwrap();
    let refs: Vec<_> = images.iter().map(|(b, _)| b).collect();
    let batch = to_batch::<f64>(&refs).unwrap();
    let labels: Vec<usize> = images.iter().map(|(_, l)| l.index()).collect();
    let mut net = Network::<f64>::lenet64(64, 3).unwrap();
    let report = gradient_check(&mut net, &batch, &labels, 1e-6, 200, 0).unwrap();
    let layers: Vec<String> = report
        .layers
        .iter()
        .map(|l| format!("{} {:.1e} ({})", l.layer, l.max_relative_error, l.checked))
        .collect();
    let pass = report.max_relative_error < 1e-4 && report.layers.len() == 4 && report.layers.iter().all(|l| l.checked >= 200);
    (pass, format!("max relative error {:.2e}; {}", report.max_relative_error, layers.join(", ")))
}

fn generator_soundness() -> (bool, String) {
    let mut checked = 0;
    let mut failures = Vec::new();
    for id in ProblemId::all() {
        let spec = ProblemSpec::original(id);
        for label in ClassLabel::both() {
            for i in 0..1000 {
                let mut rng = ChaCha8Rng::seed_from_u64(per_image_seed(99, Split::Train, label, i));
                checked += 1;
                match spec.sample(label, &mut rng, 64) {
                    Ok(scene) if verify_scene(&scene) => {}
                    Ok(_) => failures.push(format!("p{} label {} #{i}: verifier rejected", id.get(), label.get())),
                    Err(e) => failures.push(format!("p{} label {} #{i}: {e}", id.get(), label.get())),
                }
            }
        }
    }
    let mut detail = format!("{checked} scenes, {} failures", failures.len());
    if let Some(first) = failures.first() {
        detail.push_str(&format!(" (first: {first})"));
    }
    (failures.is_empty() && checked == 40_000, detail)
}

fn determinism() -> (bool, String) {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let hashes: Vec<String> = dirs
        .iter()
        .map(|d| {
            let cfg = DatasetConfig {
                n_train: 40,
                n_test: 20,
                master_seed: 17,
                output_path: d.path().to_path_buf(),
                ..DatasetConfig::new(pid(6), VariantKind::Original)
            };
            generate_dataset(&cfg).unwrap();
            directory_hash(&cfg.dataset_dir()).unwrap()
        })
        .collect();
    let generate_ok = hashes[0] == hashes[1];

    let cfg = DatasetConfig {
        n_train: 40,
        n_test: 1,
        ..DatasetConfig::new(pid(2), VariantKind::Original)
    };
    let data = materialize(&cfg, Split::Train).unwrap();
    let tc = TrainingConfig {
        iterations: 40,
        seed: 5,
        ..TrainingConfig::default()
    };
    let ckpts: Vec<Vec<u8>> = dirs
        .iter()
        .map(|d| {
            let (net, _) = train::<f32>(&tc, &data).unwrap();
            let path = d.path().join("model.ckpt");
            checkpoint::save(&net, &path).unwrap();
            std::fs::read(path).unwrap()
        })
        .collect();
    let train_ok = ckpts[0] == ckpts[1];
    (
        generate_ok && train_ok,
        format!(
            "generate: {} ({}...), train: {} ({} bytes)",
            if generate_ok { "identical" } else { "DIFFERENT" },
            &hashes[0][..12],
            if train_ok { "identical checkpoints" } else { "DIFFERENT checkpoints" },
            ckpts[0].len()
        ),
    )
}

fn cohort_exactness() -> (bool, String) {
    let mut checked = 0u64;
    let mut bad = Vec::new();
    for n in 1..=10_000u64 {
        for p_a in 0..=n {
            let a = human_accuracy(&HumanCohortStats::new(p_a, n - p_a)).unwrap();
            checked += 1;
            if !common::is_correctly_rounded(a, n + p_a, 2 * n) && bad.len() < 3 {
                bad.push(format!("p_a={p_a} n={n} -> {a}"));
            }
        }
    }
    (bad.is_empty(), format!("{checked} (p_a, n) pairs against 0.5 + p_a/2n; mismatches: {bad:?}"))
}

fn stopping_rule() -> (bool, String) {
    let params = SessionParams::default();
    let play = |correct: bool, seed| {
        let mut s = TrialSession::new("s".into(), pid(1), params, seed).unwrap();
        loop {
            let t = s.next_trial().unwrap();
            let out = s.answer(if correct { t.true_label } else { t.true_label.flipped() }).unwrap();
            if out.status != SessionStatus::Active {
                return (out.status, out.trials);
            }
        }
    };
    let right = play(true, 1);
    let wrong = play(false, 2);

    let reg = SessionRegistry::new(vec![pid(1)], params, 0).unwrap();
    for correct in [true, true, true, false] {
        let id = reg.create(pid(1)).unwrap();
        loop {
            let truth = reg.with_session(&id, |s| s.next_trial()).unwrap().true_label;
            let out = reg.answer(&id, if correct { truth } else { truth.flipped() }).unwrap();
            if out.status != SessionStatus::Active {
                break;
            }
        }
    }
    let stats = reg.cohort(pid(1));
    let accuracy = human_accuracy(&stats).unwrap();
    let pass = right == (SessionStatus::Solved, params.k_consecutive)
        && wrong == (SessionStatus::Failed, params.max_trials)
        && accuracy == 0.875;
    (
        pass,
        format!(
            "always-correct {:?} after {} (k={}), always-wrong {:?} after {} (max={}), cohort {}/{} -> {accuracy}",
            right.0, right.1, params.k_consecutive, wrong.0, wrong.1, params.max_trials, stats.p_a, stats.n
        ),
    )
}

fn desk_scale(problem: u32, variant: VariantKind) -> DatasetConfig {
    DatasetConfig {
        n_train: 2000,
        n_test: 1000,
        image_size: 64,
        ..DatasetConfig::new(pid(problem), variant)
    }
}

/// Run a quick criterion; `limit` is its runtime budget.
fn timed(name: &'static str, limit: Option<Duration>, f: fn() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    let elapsed = start.elapsed();
    let o = Outcome {
        name,
        pass: pass && limit.is_none_or(|l| elapsed <= l),
        detail,
        elapsed,
    };
    report(&o);
    o
}

fn main() {
    let mut outcomes = vec![
        timed("gradient correctness", Some(Duration::from_secs(120)), gradient_correctness),
        timed("generator soundness", Some(Duration::from_secs(300)), generator_soundness),
        timed("determinism", None, determinism),
        timed("cohort accuracy exactness", None, cohort_exactness),
        timed("session stopping rule", None, stopping_rule),
    ];

    let training = TrainingConfig {
        iterations: 5000,
        ..TrainingConfig::default()
    };

    // The identical-shape control of P1 serves both as the null calibration
    // dataset and as the clean arm of the leak audit.
    eprintln!("training P1 control and P1 size_bias (2 runs)...");
    let start = Instant::now();
    let audit = audit_leakage(
        pid(1),
        &[VariantKind::IdenticalControl, VariantKind::Leak(LeakKind::SizeBias)],
        &desk_scale(1, VariantKind::Original),
        &training,
        |e| eprintln!("  {} accuracy {:.4} [{:?}]", e.variant, e.accuracy, e.flag),
    );
    let audit_time = start.elapsed();
    match audit {
        Ok(audit) => {
            let control = audit.entry(VariantKind::IdenticalControl).unwrap();
            let control_time = Duration::from_secs_f64(audit.rows[0].wall_time_s);
            let leak = audit.entry(VariantKind::Leak(LeakKind::SizeBias)).unwrap();
            outcomes.push(Outcome {
                name: "null calibration",
                pass: (0.45..=0.55).contains(&control.accuracy) && control_time <= Duration::from_secs(3600),
                detail: format!("P1 identical control test accuracy {:.4} (want [0.45, 0.55])", control.accuracy),
                elapsed: control_time,
            });
            report(outcomes.last().unwrap());
            outcomes.push(Outcome {
                name: "leak auditor sensitivity",
                pass: leak.accuracy >= 0.70
                    && leak.flag == Flag::Leak
                    && control.accuracy <= 0.60
                    && control.flag == Flag::Clean
                    && audit_time <= Duration::from_secs(7200),
                detail: format!(
                    "size_bias {:.4} [{:?}], control {:.4} [{:?}]",
                    leak.accuracy, leak.flag, control.accuracy, control.flag
                ),
                elapsed: audit_time,
            });
            report(outcomes.last().unwrap());
        }
        Err(e) => {
            for name in ["null calibration", "leak auditor sensitivity"] {
                outcomes.push(Outcome {
                    name,
                    pass: false,
                    detail: format!("audit failed: {e}"),
                    elapsed: audit_time,
                });
                report(outcomes.last().unwrap());
            }
        }
    }

    eprintln!("training P1 and P2 originals (2 runs)...");
    let start = Instant::now();
    let bench = run_benchmark(&[pid(1), pid(2)], &desk_scale(1, VariantKind::Original), &training, |r| match r {
        Ok(row) => eprintln!("  P{} accuracy {:.4} in {:.1} min", row.problem.get(), row.accuracy, row.wall_time_s / 60.0),
        Err(f) => eprintln!("  P{} failed: {}", f.problem.get(), f.error),
    });
    let bench_time = start.elapsed();
    let acc = |p: u32| bench.rows.iter().find(|r| r.problem == pid(p)).map(|r| r.accuracy);
    let (p1, p2) = (acc(1), acc(2));
    outcomes.push(Outcome {
        name: "dichotomy reproduction",
        pass: match (p1, p2) {
            (Some(p1), Some(p2)) => {
                p2 >= 0.90 && p1 <= 0.65 && p2 - p1 >= 0.25 && bench_time <= Duration::from_secs(7200)
            }
            _ => false,
        },
        detail: format!(
            "P2 {} (want >= 0.90), P1 {} (want <= 0.65), gap {}",
            p2.map_or("failed".into(), |a| format!("{a:.4}")),
            p1.map_or("failed".into(), |a| format!("{a:.4}")),
            p1.zip(p2).map_or("-".into(), |(a, b)| format!("{:.4}", b - a)),
        ),
        elapsed: bench_time,
    });
    report(outcomes.last().unwrap());

    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn report(o: &Outcome) {
    println!(
        "{} {}: {} [{:.1} min]",
        if o.pass { "PASS" } else { "FAIL" },
        o.name,
        o.detail,
        minutes(o.elapsed)
    );
}
