use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use genmean::experiments::{run_bench, run_scaling, BenchConfig, BenchReport};
use genmean::io::{
    load_labels, load_multilayer, read_label_records, write_labels, write_multilayer,
    write_node_classes, EdgeListOptions,
};
use genmean::pipeline::{run, FoldRun, Selection};
use genmean::synth::generate;
use genmean::{Error, LabelMatrix, Method, MethodResult, Result, Setting, SynthSpec, Theta};
use serde::Serialize;

use crate::config::{provenance_line, Config};

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Opens `path` and writes the provenance comment as its first line.
fn create_with_header(path: &Path, header: &str) -> Result<BufWriter<File>> {
    let mut w = create(path)?;
    writeln!(w, "{header}").map_err(|e| Error::io(path, e))?;
    Ok(w)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

#[derive(Serialize)]
struct SynthManifest<'a> {
    seed: u64,
    synth: &'a SynthSpec,
    config: &'a Config,
    n: usize,
    layers: usize,
    known_labels: usize,
    files: [&'static str; 3],
}

pub fn cmd_synth(setting: Setting, std: f64, seed: u64, out: &Path, config: &Config) -> Result<()> {
    let spec = SynthSpec {
        setting,
        std,
        rng_seed: seed,
        ..config.synth.clone()
    };
    let inst = generate::<f64>(&spec)?;
    ensure_dir(out)?;
    let resolved = Config {
        synth: spec.clone(),
        ..config.clone()
    };
    let header = provenance_line("synth", seed, &resolved);

    let path = out.join("edges.tsv");
    let mut w = create_with_header(&path, &header)?;
    write_multilayer(&inst.graph, &mut w).map_err(|e| Error::io(&path, e))?;

    let path = out.join("labels_known.tsv");
    let mut w = create_with_header(&path, &header)?;
    write_labels(&inst.known, &mut w).map_err(|e| Error::io(&path, e))?;

    let path = out.join("labels_truth.tsv");
    let mut w = create_with_header(&path, &header)?;
    write_node_classes(
        inst.truth.iter().copied().enumerate(),
        inst.class_names(),
        &mut w,
    )
    .map_err(|e| Error::io(&path, e))?;

    write_json(
        &out.join("spec.json"),
        &SynthManifest {
            seed,
            synth: &spec,
            config: &resolved,
            n: inst.graph.n(),
            layers: inst.graph.k(),
            known_labels: inst.known.labeled().len(),
            files: ["edges.tsv", "labels_known.tsv", "labels_truth.tsv"],
        },
    )
}

/// Ground truth indexed like `known`'s classes; names unseen among the
/// known labels get fresh indices past `known.m()`.
fn load_truth(path: &Path, known: &LabelMatrix) -> Result<Vec<usize>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let records = read_label_records(file)?;
    let n = known.n();
    let mut extra: HashMap<String, usize> = HashMap::new();
    let mut truth = vec![None; n];
    for (node, name) in records {
        if node >= n {
            return Err(Error::Range { index: node, n });
        }
        let next = known.m() + extra.len();
        let c = match known.class_index(&name) {
            Some(c) => c,
            None => *extra.entry(name).or_insert(next),
        };
        if truth[node].is_some_and(|prev| prev != c) {
            return Err(Error::domain(format!(
                "{}: node {node} has two classes",
                path.display()
            )));
        }
        truth[node] = Some(c);
    }
    truth
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| Error::domain(format!("{}: node {i} has no class", path.display())))
        })
        .collect()
}

pub struct RunArgs {
    pub method: Option<Method>,
    pub graph: PathBuf,
    pub labels: PathBuf,
    pub truth: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Inputs<'a> {
    graph: &'a Path,
    labels: &'a Path,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth: Option<&'a Path>,
}

#[derive(Serialize)]
struct Timings {
    load_secs: f64,
    method_secs: f64,
}

#[derive(Serialize)]
struct RunOutput<'a> {
    method: Method,
    seed: u64,
    config: &'a Config,
    inputs: Inputs<'a>,
    classes: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<&'a Theta<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    thetas: Option<&'a [Theta<f64>]>,
    selected: &'a [Selection<f64>],
    fold_losses: &'a [Vec<Option<f64>>],
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
    held_out: usize,
    unreached: usize,
    evaluations: usize,
    terminations: BTreeMap<String, usize>,
    failures: &'a [String],
    timings: Timings,
}

pub fn cmd_run(args: &RunArgs, config: &Config) -> Result<()> {
    let mut config = config.clone();
    if let Some(m) = args.method {
        config.experiment.method = m;
    }
    if let Some(s) = args.seed {
        config.experiment.rng_seed = s;
    }
    let spec = &config.experiment;

    let start = Instant::now();
    let graph = load_multilayer::<f64>(&args.graph, EdgeListOptions::default())?;
    let known = load_labels(&args.labels, graph.n())?;
    let truth = args
        .truth
        .as_deref()
        .map(|p| load_truth(p, &known))
        .transpose()?;
    let load_secs = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let result = run(&graph, &known, spec, truth.as_deref())?;
    let method_secs = start.elapsed().as_secs_f64();

    ensure_dir(&args.out)?;
    let header = provenance_line("run", spec.rng_seed, &config);
    let path = args.out.join("predictions.tsv");
    let mut w = create_with_header(&path, &header)?;
    write_node_classes(result.held_out_predictions(), known.classes(), &mut w)
        .map_err(|e| Error::io(&path, e))?;

    if spec.method.is_learned() {
        write_trace(&args.out.join("trace.csv"), &header, &result.runs)?;
    }

    let mut terminations = BTreeMap::new();
    for r in &result.runs {
        *terminations
            .entry(r.trace.termination.to_string())
            .or_insert(0) += 1;
    }
    let per_class = spec.method == Method::Binom;
    let output = RunOutput {
        method: spec.method,
        seed: spec.rng_seed,
        config: &config,
        inputs: Inputs {
            graph: &args.graph,
            labels: &args.labels,
            truth: args.truth.as_deref(),
        },
        classes: known.classes(),
        theta: (!per_class).then(|| &result.thetas[0]),
        thetas: per_class.then_some(result.thetas.as_slice()),
        selected: &result.selected,
        fold_losses: &result.fold_losses,
        accuracy: result.accuracy,
        held_out: result.held_out.len(),
        unreached: result.unreached,
        evaluations: result.evaluations,
        terminations,
        failures: &result.failures,
        timings: Timings {
            load_secs,
            method_secs,
        },
    };
    write_json(&args.out.join("result.json"), &output)?;
    print_summary(&result);
    Ok(())
}

fn print_summary(result: &MethodResult<f64>) {
    match result.accuracy {
        Some(a) => println!(
            "{}: accuracy {a:.4} on {} held-out nodes",
            result.method,
            result.held_out.len()
        ),
        None => println!(
            "{}: classified {} held-out nodes",
            result.method,
            result.held_out.len()
        ),
    }
}

/// One row per outer iteration of every Frank-Wolfe run.
fn write_trace(path: &Path, header: &str, runs: &[FoldRun<f64>]) -> Result<()> {
    let k = runs.first().map_or(0, |r| r.theta_star.k());
    let w = create_with_header(path, header)?;
    let mut csv = csv::Writer::from_writer(w);
    let mut cols: Vec<String> = [
        "class",
        "fold",
        "start",
        "n",
        "f",
        "g_tilde",
        "eta",
        "h",
        "backtracks",
        "alpha",
    ]
    .map(String::from)
    .to_vec();
    cols.extend((1..=k).map(|l| format!("beta_{l}")));
    cols.push("lambda".into());
    cols.push("termination".into());
    csv.write_record(&cols).map_err(|e| csv_err(path, e))?;
    for run in runs {
        for rec in &run.trace.records {
            let mut row = vec![
                run.class.map_or(String::new(), |c| c.to_string()),
                run.fold.to_string(),
                run.start_id.to_string(),
                rec.n.to_string(),
                rec.f.to_string(),
                rec.g_tilde.to_string(),
                rec.eta.map_or(String::new(), |e| e.to_string()),
                rec.h.to_string(),
                rec.backtracks.to_string(),
                rec.theta.alpha.to_string(),
            ];
            row.extend(rec.theta.beta.iter().map(|b| b.to_string()));
            row.push(rec.theta.lambda.to_string());
            row.push(if rec.eta.is_none() {
                run.trace.termination.to_string()
            } else {
                String::new()
            });
            csv.write_record(&row).map_err(|e| csv_err(path, e))?;
        }
    }
    csv.flush().map_err(|e| Error::io(path, e))
}

pub fn cmd_bench(samples: usize, seed: u64, out: &Path, config: &Config) -> Result<()> {
    let cfg = BenchConfig {
        samples,
        seed,
        synth: config.synth.clone(),
        experiment: config.experiment.clone(),
        ..BenchConfig::default()
    };
    let report = run_bench(&cfg, |setting, std, cell| {
        log::info!(
            "{setting} std={std} {}: {:.3} ± {:.3} ({} failures)",
            cell.method,
            cell.mean,
            cell.stdev,
            cell.failures.len()
        );
    })?;
    let header = provenance_line("bench", seed, &cfg);
    write_bench_csv(out, &header, &cfg, &report)
}

/// Grid rows `setting, std, <method>_mean, <method>_std, ...` followed by the
/// APR and AR rows of the ranked methods.
fn write_bench_csv(
    path: &Path,
    header: &str,
    cfg: &BenchConfig,
    report: &BenchReport,
) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let methods = cfg.all_methods();
    let w = create_with_header(path, header)?;
    let mut csv = csv::Writer::from_writer(w);
    let mut cols = vec!["setting".to_string(), "std".to_string()];
    for m in &methods {
        cols.push(format!("{m}_mean"));
        cols.push(format!("{m}_std"));
    }
    csv.write_record(&cols).map_err(|e| csv_err(path, e))?;
    for row in &report.rows {
        let mut rec = vec![row.setting.to_string(), row.std.to_string()];
        for m in &methods {
            let cell = row
                .cells
                .iter()
                .find(|c| c.method == *m)
                .expect("cell per method");
            rec.push(format!("{:.4}", cell.mean));
            rec.push(format!("{:.4}", cell.stdev));
        }
        csv.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    for (label, values) in [("APR", &report.apr), ("AR", &report.avg_rank)] {
        let mut rec = vec![label.to_string(), String::new()];
        for m in &methods {
            let v = report.ranked.iter().position(|r| r == m).map(|i| values[i]);
            rec.push(v.map_or(String::new(), |v| format!("{v:.4}")));
            rec.push(String::new());
        }
        csv.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    csv.flush().map_err(|e| Error::io(path, e))
}

pub fn cmd_scaling(
    sizes: Vec<usize>,
    method: Method,
    seed: u64,
    repeats: Option<usize>,
    out: &Path,
    config: &Config,
) -> Result<()> {
    let mut cfg = config.scaling(sizes, method, seed);
    if let Some(r) = repeats {
        cfg.repeats = r;
    }
    let rows = run_scaling(&cfg)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let header = provenance_line("scaling", seed, &cfg);
    let w = create_with_header(out, &header)?;
    let mut csv = csv::Writer::from_writer(w);
    let mut cols = vec![
        "n".to_string(),
        "method".to_string(),
        "mean_seconds".to_string(),
    ];
    cols.extend((1..=cfg.repeats).map(|r| format!("run_{r}")));
    csv.write_record(&cols).map_err(|e| csv_err(out, e))?;
    for row in &rows {
        log::info!("N={} {}: {:.3}s", row.n, row.method, row.mean_seconds);
        let mut rec = vec![
            row.n.to_string(),
            row.method.to_string(),
            format!("{:.6}", row.mean_seconds),
        ];
        rec.extend(row.seconds.iter().map(|s| format!("{s:.6}")));
        csv.write_record(&rec).map_err(|e| csv_err(out, e))?;
    }
    csv.flush().map_err(|e| Error::io(out, e))
}
