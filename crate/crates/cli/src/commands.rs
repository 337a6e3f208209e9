use serde_json::json;
use std::path::Path;
use svrt_core::dataset::{directory_hash, generate_dataset, load_dataset, Split};
use svrt_core::harness::{
    audit_leakage, default_audit_variants, from_csv, human_accuracy, load_or_generate, render_table,
    resolution_ablation, run_benchmark, sample_efficiency, to_csv, HumanCohortStats, ResultRow, SessionParams,
    SessionRegistry,
};
use svrt_core::nn::{checkpoint, evaluate, train_observed, write_log, Network};
use svrt_core::problems::ProblemId;
use svrt_core::{Error, Result};

use crate::args::*;

fn emit(value: serde_json::Value) {
    println!("{value}");
}

fn write_csv(path: Option<&Path>, rows: &[ResultRow]) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, to_csv(rows)?)?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
        Command::Audit(a) => audit(a),
        Command::Ablate(a) => ablate(a),
        Command::Sweep(a) => sweep(a),
        Command::HumanAccuracy(a) => human(a),
        Command::Serve(a) => serve(a),
        Command::Report(a) => report(a),
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let cfg = a.data.config(a.problem, a.seed);
    let records = generate_dataset(&cfg)?;
    let dir = cfg.dataset_dir();
    emit(json!({
        "dataset_dir": dir,
        "images": records.len(),
        "sha256": directory_hash(&dir)?,
    }));
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let dataset = a.data.config(a.problem, a.seed);
    let training = a.training.config(a.seed);
    let (train_set, test_set) = load_or_generate(&dataset)?;
    let every = (training.iterations / 20).max(1);
    let (net, log) = train_observed::<f32>(&training, &train_set, |e| {
        if e.iteration % every == 0 {
            eprintln!("iteration {} loss {:.4}", e.iteration, e.loss);
        }
    })?;
    checkpoint::save(&net, &a.checkpoint)?;
    if let Some(path) = &a.log {
        write_log(path, &log)?;
    }
    emit(json!({
        "checkpoint": a.checkpoint,
        "iterations": log.len(),
        "final_loss": log.last().map(|e| e.loss),
        "test_accuracy": evaluate(&net, &test_set)?,
    }));
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let net: Network<f32> = checkpoint::load(&a.checkpoint)?;
    let test_set = match (&a.dataset_dir, a.problem) {
        (Some(dir), _) => load_dataset(dir, Some(Split::Test))?,
        (None, Some(problem)) => load_or_generate(&a.data.config(problem, a.seed))?.1,
        (None, None) => return Err(Error::InvalidArgument("give --problem or --dataset-dir".into())),
    };
    emit(json!({
        "checkpoint": a.checkpoint,
        "images": test_set.len(),
        "accuracy": evaluate(&net, &test_set)?,
    }));
    Ok(())
}

fn all_if_empty(problems: Vec<ProblemId>) -> Vec<ProblemId> {
    if problems.is_empty() {
        ProblemId::all().collect()
    } else {
        problems
    }
}

fn bench(a: BenchArgs) -> Result<()> {
    let problems = all_if_empty(a.problems);
    // The template problem is replaced per run.
    let template = a.data.config(problems[0], a.seed);
    let out = run_benchmark(&problems, &template, &a.training.config(a.seed), |r| match r {
        Ok(row) => eprintln!("problem {} accuracy {:.4} ({:.0} s)", row.problem, row.accuracy, row.wall_time_s),
        Err(f) => eprintln!("problem {} failed: {}", f.problem, f.error),
    });
    write_csv(a.csv.as_deref(), &out.rows)?;
    print!("{}", render_table(&out.rows));
    for f in &out.failures {
        emit(json!({ "error": "run_failed", "problem": f.problem, "variant": f.variant, "message": f.error }));
    }
    if out.rows.is_empty() && !out.failures.is_empty() {
        return Err(Error::InvalidArgument("every benchmark run failed".into()));
    }
    Ok(())
}

fn audit(a: AuditArgs) -> Result<()> {
    let variants = if a.variants.is_empty() {
        default_audit_variants(a.problem)
    } else {
        a.variants
    };
    let template = a.data.config(a.problem, a.seed);
    let report = audit_leakage(a.problem, &variants, &template, &a.training.config(a.seed), |e| {
        eprintln!("{} accuracy {:.4} [{:?}]", e.variant, e.accuracy, e.flag)
    })?;
    write_csv(a.csv.as_deref(), &report.rows)?;
    emit(json!({
        "problem": report.problem,
        "threshold": report.threshold,
        "entries": report.entries,
        "generator_leaks": report.generator_leaks(),
        "sensitive": report.sensitive(),
    }));
    Ok(())
}

fn ablate(a: AblateArgs) -> Result<()> {
    let template = a.data.config(a.problem, a.seed);
    let rows = resolution_ablation(a.problem, &a.sizes, &template, &a.training.config(a.seed))?;
    write_csv(a.csv.as_deref(), &rows)?;
    for r in &rows {
        emit(json!({ "problem": r.problem, "image_size": r.image_size, "accuracy": r.accuracy }));
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let template = a.data.config(a.problem, a.seed);
    let report = sample_efficiency(a.problem, &a.grid, a.threshold, &template, &a.training.config(a.seed), |n, acc| {
        eprintln!("n_train {n} accuracy {acc:.4}")
    })?;
    emit(serde_json::to_value(&report)?);
    Ok(())
}

fn human(a: HumanArgs) -> Result<()> {
    let stats = HumanCohortStats::new(a.solved, a.unsolved);
    emit(json!({
        "p_a": stats.p_a,
        "p_n": stats.p_n,
        "n": stats.n,
        "accuracy": human_accuracy(&stats)?,
    }));
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let params = SessionParams {
        k_consecutive: a.k,
        max_trials: a.max_trials,
        image_size: a.image_size,
    };
    let mut registry = SessionRegistry::new(all_if_empty(a.problems), params, a.seed)?;
    if let Some(path) = &a.log {
        registry = registry.with_log(path)?;
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(a.addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, crate::server::router(registry.into())).await?;
        Ok(())
    })
}

fn report(a: ReportArgs) -> Result<()> {
    let mut rows = Vec::new();
    for path in &a.inputs {
        rows.extend(from_csv(&std::fs::read_to_string(path)?)?);
    }
    write_csv(a.csv.as_deref(), &rows)?;
    print!("{}", render_table(&rows));
    Ok(())
}
