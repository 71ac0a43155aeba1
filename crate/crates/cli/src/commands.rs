//! Subcommand bodies.
//!
//! Randomness comes from the config seed. `gen` draws rows from substream 1
//! and injected noise from substream 2; `train` hands the seed to
//! `train_model`; `cuts`, `grade` and `oversample` use the seed's stream with
//! the library's own stage tags, so `grade` reproduces the grades an
//! `oversample` run with the same settings selects from.

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use tmfusion::booleanize::{fit_percentile_bins, mean_threshold_binarize, NumericTable, PopulationStats};
use tmfusion::fusion::{compatibility_report, description_overlap, detect_change, localize_inconsistencies, render_compatibility};
use tmfusion::metrics::Confusion;
use tmfusion::par::Execution;
use tmfusion::sampling::{
    grade_splits, informed_oversample, oversample_stage, stratified_kfold, GradeProtocol, OversampleStrategy, SplitGrade,
};
use tmfusion::synthgen::*;
use tmfusion::tm::{persist, train_model};
use tmfusion::{BinaryDataset, Stream};

use crate::config::RunConfig;
use crate::output::*;
use crate::*;

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Gen(a) => {
            if let Some(seed) = a.seed {
                cfg.model.seed = seed;
            }
            cfg.validate()?;
            gen(&cfg, &a)
        }
        Command::Binarize(a) => {
            cfg.validate()?;
            binarize(&cfg, &a)
        }
        Command::Train(a) => {
            apply_model(&mut cfg, &a.model);
            cfg.validate()?;
            train(&cfg, &a)
        }
        Command::Eval(a) => {
            cfg.validate()?;
            eval(&cfg, &a)
        }
        Command::Trace(a) => {
            cfg.validate()?;
            trace(&cfg, &a)
        }
        Command::Compare(a) => {
            if let Some(t) = a.theta {
                cfg.change.theta = t;
            }
            if let Some(t) = a.match_threshold {
                cfg.change.match_threshold = t;
            }
            cfg.validate()?;
            compare(&cfg, &a)
        }
        Command::Cuts(a) => {
            apply_model(&mut cfg, &a.model);
            if let Some(n) = a.cuts {
                cfg.cuts.count = n;
            }
            if let Some(f) = a.fraction {
                cfg.cuts.fraction = f;
            }
            if let Some(r) = a.remove {
                cfg.cuts.remove = r;
            }
            cfg.validate()?;
            cuts(&cfg, &a)
        }
        Command::Oversample(a) => {
            apply_model(&mut cfg, &a.model);
            apply_split(&mut cfg, &a.split);
            if let Some(s) = a.strategy {
                cfg.oversample.strategy = s;
            }
            if let Some(r) = a.ratio {
                cfg.oversample.ratio = r;
            }
            if let Some(k) = a.neighbors {
                cfg.oversample.k_neighbors = k;
            }
            cfg.validate()?;
            oversample(&cfg, &a)
        }
        Command::Grade(a) => {
            apply_model(&mut cfg, &a.model);
            apply_split(&mut cfg, &a.split);
            cfg.validate()?;
            grade(&cfg, &a)
        }
    }
}

fn apply_model(cfg: &mut RunConfig, m: &ModelArgs) {
    let c = &mut cfg.model;
    if let Some(v) = m.clauses {
        c.clauses = v;
    }
    if let Some(v) = m.threshold {
        c.threshold = v;
    }
    if let Some(v) = m.specificity {
        c.specificity = v;
    }
    if let Some(v) = m.ta_states {
        c.ta_states = v;
    }
    if m.boost {
        c.boost = true;
    }
    if let Some(v) = m.epochs {
        c.epochs = v;
    }
    if let Some(v) = m.seed {
        c.seed = v;
    }
}

fn apply_split(cfg: &mut RunConfig, s: &SplitArgs) {
    if let Some(k) = s.folds {
        cfg.oversample.folds = k;
    }
    if let Some(r) = s.repeats {
        cfg.oversample.repeats = r;
    }
}

fn value_name(v: &impl clap::ValueEnum) -> String {
    v.to_possible_value().map(|p| p.get_name().to_owned()).unwrap_or_default()
}

fn path_str(p: &std::path::Path) -> String {
    p.display().to_string()
}

fn gen(cfg: &RunConfig, a: &GenArgs) -> Result<()> {
    let root = Stream::new(cfg.model.seed);
    let (data, details) = match a.task {
        Task::Hat => {
            let clean = gen_hat_data(a.count, a.persons, a.steps, &mut root.substream(1))?;
            let (examples, modified) = if a.inject_rate > 0.0 {
                inject_nontargeted(&clean, a.persons, a.inject_rate, &mut root.substream(2))?
            } else {
                (clean, Vec::new())
            };
            (hat_dataset(&examples, a.persons, a.steps)?, json!({ "injected_rows": modified }))
        }
        Task::Query => {
            let kind = match a.query_kind {
                QueryKindArg::Neighbour => QueryKind::NeighbourQuery,
                QueryKindArg::ValidPass => QueryKind::ValidPassQuery,
            };
            let qc = QueryTaskConfig::new(kind, a.persons, a.count, a.contradiction_rate);
            let examples = gen_query_tasks(&qc, &mut root.substream(1))?;
            let contradictions: Vec<usize> = (0..examples.len()).filter(|&i| examples[i].contradiction).collect();
            (query_dataset(&examples, kind, a.persons)?, json!({ "contradiction_rows": contradictions }))
        }
        Task::Prototype => {
            let world =
                PrototypeWorld { features: a.features, counts: a.counts.clone(), flip: a.flip, label_noise: a.label_noise };
            let s = gen_prototype_data(&world, &mut root.substream(1))?;
            (s.data, json!({ "prototypes": s.prototypes, "relabelled_rows": s.noisy_rows }))
        }
    };
    let options = json!({
        "task": value_name(&a.task),
        "count": a.count,
        "persons": a.persons,
        "steps": a.steps,
        "inject_rate": a.inject_rate,
        "query_kind": value_name(&a.query_kind),
        "contradiction_rate": a.contradiction_rate,
        "features": a.features,
        "counts": a.counts,
        "flip": a.flip,
        "label_noise": a.label_noise,
    });
    write_dataset(&a.out, &data, provenance("gen", cfg, options), details)?;
    println!("wrote {} rows x {} features to {}", data.len(), data.num_features(), a.out.display());
    Ok(())
}

fn binarize(cfg: &RunConfig, a: &BinarizeArgs) -> Result<()> {
    let load = |p: &std::path::Path| NumericTable::load(p).with_context(|| format!("reading {}", p.display()));
    let raw = load(&a.input)?;
    let fit = match &a.fit_on {
        Some(p) => load(p)?,
        None => raw.clone(),
    };
    let (data, fitted) = match a.method {
        BinarizeMethod::Percentile => {
            let spec = fit_percentile_bins(&fit, a.bins)?;
            (spec.apply(&raw)?, serde_json::to_value(&spec)?)
        }
        BinarizeMethod::Mean => {
            let stats = PopulationStats::fit(&fit)?;
            (mean_threshold_binarize(&raw, &stats)?, serde_json::to_value(&stats)?)
        }
    };
    let options = json!({
        "input": path_str(&a.input),
        "method": value_name(&a.method),
        "bins": a.bins,
        "fit_on": a.fit_on.as_deref().map(path_str),
    });
    write_dataset(&a.out, &data, provenance("binarize", cfg, options), json!({ "fitted": fitted }))?;
    println!("wrote {} rows x {} binary features to {}", data.len(), data.num_features(), a.out.display());
    Ok(())
}

fn train(cfg: &RunConfig, a: &TrainArgs) -> Result<()> {
    let data = load_dataset(&a.data)?;
    let params = cfg.model.params();
    let tm = train_model(&params, &data, None, &Stream::new(params.seed))?;
    let accuracy = tm.accuracy(&data)?;
    let prov = provenance("train", cfg, json!({ "data": path_str(&a.data), "train_accuracy": accuracy }));
    persist::save(&tm, Some(prov), &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    println!("training accuracy {accuracy:.4}; model written to {}", a.out.display());
    Ok(())
}

fn eval(cfg: &RunConfig, a: &EvalArgs) -> Result<()> {
    let tm = load_model(&a.model)?;
    let data = load_dataset(&a.data)?;
    let predicted = tm.predict_batch(&data, Execution::default())?;
    let confusion = Confusion::new(data.labels(), &predicted)?;
    let s = confusion.scores();
    println!("accuracy  {:.4}\nprecision {:.4}\nrecall    {:.4}\nf-score   {:.4}", s.accuracy, s.precision, s.recall, s.f1);
    if let Some(out) = &a.out {
        let prov = provenance("eval", cfg, json!({ "model": path_str(&a.model), "data": path_str(&a.data) }));
        write_report(out, prov, &json!({ "scores": s, "confusion": confusion }))?;
    }
    Ok(())
}

fn trace(cfg: &RunConfig, a: &TraceArgs) -> Result<()> {
    let tm = load_model(&a.model)?;
    let data = load_dataset(&a.data)?;
    let traces = tm.trace_batch(&data, Execution::default())?;
    let mut header = vec!["row".to_string(), "label".into(), "predicted".into()];
    for c in tm.classes() {
        header.extend([format!("clause_cnt_{c}"), format!("positive_cnt_{c}"), format!("clause_sum_{c}")]);
    }
    header.push("asd".into());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for (i, t) in traces.iter().enumerate() {
        let mut rec = vec![i.to_string(), data.label(i).to_string(), t.predicted.to_string()];
        for c in &t.classes {
            rec.extend([c.clause_cnt.to_string(), c.positive_cnt.to_string(), c.clause_sum.to_string()]);
        }
        rec.push(t.asd.map(|v| v.to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    tmfusion::io::write_atomic(&a.out, &bytes).with_context(|| format!("writing {}", a.out.display()))?;

    let mut details = json!({});
    if tm.classes().len() == 2 {
        let groups = compatibility_report(&tm, &data, Execution::default())?;
        print!("{}", render_compatibility(&groups));
        details = json!({ "compatibility": groups });
    } else {
        println!("{} rows traced; ASD needs a two-class model", traces.len());
    }
    let prov = provenance("trace", cfg, json!({ "model": path_str(&a.model), "data": path_str(&a.data) }));
    write_json(&meta_path(&a.out), &json!({ "provenance": prov, "details": details }))
}

fn compare(cfg: &RunConfig, a: &CompareArgs) -> Result<()> {
    let ga = load_model(&a.model_a)?.global_description();
    let gb = load_model(&a.model_b)?.global_description();
    let change = detect_change(&ga, &gb, cfg.change.change())?;
    let similarity = description_overlap(&ga, &gb)?;
    print!("{}", change.render(&gb));
    if let Some(out) = &a.out {
        let prov = provenance("compare", cfg, json!({ "model_a": path_str(&a.model_a), "model_b": path_str(&a.model_b) }));
        write_report(out, prov, &json!({ "change": change, "similarity": similarity }))?;
    }
    Ok(())
}

fn cuts(cfg: &RunConfig, a: &CutsArgs) -> Result<()> {
    let baseline = load_model(&a.baseline)?.global_description();
    let data = load_dataset(&a.data)?;
    let params = cfg.model.params();
    let report = localize_inconsistencies(
        &baseline,
        &data,
        cfg.cuts.localize(),
        &params,
        &Stream::new(params.seed),
        Execution::default(),
    )?;
    print!("{}", report.render());
    if let Some(out) = &a.out {
        let prov = provenance("cuts", cfg, json!({ "baseline": path_str(&a.baseline), "data": path_str(&a.data) }));
        write_report(out, prov, &report)?;
    }
    Ok(())
}

fn load_holdout(split: &SplitArgs) -> Result<Option<BinaryDataset>> {
    split.holdout.as_deref().map(load_dataset).transpose()
}

fn protocol(holdout: &Option<BinaryDataset>) -> GradeProtocol<'_> {
    match holdout {
        Some(h) => GradeProtocol::Holdout(h),
        None => GradeProtocol::Complement,
    }
}

fn render_grades(grades: &[SplitGrade], folds: usize) -> String {
    let mut s = format!("{:>5} {:>6} {:>4} {:>12}\n", "rank", "subset", "rep", "mean_asd");
    for (rank, g) in grades.iter().enumerate() {
        s += &format!("{:>5} {:>6} {:>4} {:>12.4}\n", rank + 1, g.id, g.id / folds, g.asd);
    }
    s
}

fn split_options(a: &SplitArgs, data: &std::path::Path) -> Value {
    json!({ "data": path_str(data), "holdout": a.holdout.as_deref().map(path_str) })
}

fn oversample(cfg: &RunConfig, a: &OversampleArgs) -> Result<()> {
    let data = load_dataset(&a.data)?;
    let holdout = load_holdout(&a.split)?;
    let o = &cfg.oversample;
    let params = cfg.model.params();
    let strategy = OversampleStrategy { kind: o.strategy, ratio: o.ratio, k_neighbors: o.k_neighbors };
    let out = informed_oversample(
        &data,
        &params,
        strategy,
        o.folds,
        o.repeats,
        protocol(&holdout),
        &Stream::new(params.seed),
        Execution::default(),
    )?;
    if let Some(grades) = &out.grades {
        print!("{}", render_grades(grades, o.folds));
    }
    let details = json!({
        "grades": out.grades,
        "donor_subsets": out.donor_subsets,
        "synthetic_rows": out.synthetic,
    });
    write_dataset(&a.out, &out.data, provenance("oversample", cfg, split_options(&a.split, &a.data)), details)?;
    println!(
        "{}: added {} synthetic rows; class counts {:?}; written to {}",
        o.strategy,
        out.synthetic.len(),
        out.data.class_counts(),
        a.out.display()
    );
    Ok(())
}

fn grade(cfg: &RunConfig, a: &GradeArgs) -> Result<()> {
    let data = load_dataset(&a.data)?;
    let holdout = load_holdout(&a.split)?;
    let o = &cfg.oversample;
    let params = cfg.model.params();
    let root = Stream::new(params.seed);
    if data.classes().len() != 2 {
        bail!("grading needs a two-class dataset, found classes {:?}", data.classes());
    }
    let plan = stratified_kfold(&data, o.folds, o.repeats, &mut root.substream(oversample_stage::SPLITS))?;
    let grades = grade_splits(
        &plan,
        &data,
        &params,
        protocol(&holdout),
        &root.substream(oversample_stage::GRADE),
        Execution::default(),
    )?;
    print!("{}", render_grades(&grades, o.folds));
    if let Some(out) = &a.out {
        write_report(out, provenance("grade", cfg, split_options(&a.split, &a.data)), &json!({ "grades": grades }))?;
    }
    Ok(())
}
