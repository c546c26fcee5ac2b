//! Benchmark drivers: the synthetic accuracy grid and the runtime scaling
//! sweep.

use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{apr, avg_rank, mean_std};
use crate::pipeline::{run, ExperimentSpec, Method, MethodResult};
use crate::synth::{generate, Setting, SynthSpec};

/// `(setting, std)` pairs of the synthetic grid.
pub fn synthetic_grid() -> Vec<(Setting, f64)> {
    let mut grid = Vec::with_capacity(12);
    grid.extend([5.0, 6.0, 7.0, 8.0].map(|s| (Setting::Informative, s)));
    grid.extend([2.0, 3.0, 4.0, 5.0].map(|s| (Setting::Noisy, s)));
    grid.extend([2.0, 3.0, 4.0, 5.0].map(|s| (Setting::Complementary, s)));
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub samples: usize,
    pub seed: u64,
    /// Methods ranked by APR/AR. Single layers are reported but not ranked.
    pub methods: Vec<Method>,
    pub include_single_layers: bool,
    pub synth: SynthSpec,
    pub experiment: ExperimentSpec,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            samples: 5,
            seed: 0,
            methods: Method::MULTILAYER.to_vec(),
            include_single_layers: true,
            synth: SynthSpec::default(),
            experiment: ExperimentSpec::default(),
        }
    }
}

impl BenchConfig {
    /// All reported methods: single layers first, then the ranked ones.
    pub fn all_methods(&self) -> Vec<Method> {
        let mut out = Vec::new();
        if self.include_single_layers {
            out.extend((0..self.synth.n_layers).map(Method::Layer));
        }
        out.extend(self.methods.iter().copied());
        out
    }

    /// Seed of sample `s`; used both for the instance and the experiment.
    pub fn sample_seed(&self, s: usize) -> u64 {
        self.seed.wrapping_add(s as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStats {
    pub method: Method,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub stdev: f64,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub setting: Setting,
    pub std: f64,
    pub cells: Vec<CellStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<GridRow>,
    /// Ranked methods, in the order of `apr` and `avg_rank`.
    pub ranked: Vec<Method>,
    pub apr: Vec<f64>,
    pub avg_rank: Vec<f64>,
}

/// Runs one method on one sample and returns its held-out accuracy, plus the
/// full result for callers that inspect parameters or traces.
pub fn run_sample(
    synth: &SynthSpec,
    experiment: &ExperimentSpec,
    method: Method,
    seed: u64,
) -> Result<MethodResult<f64>> {
    let inst = generate::<f64>(&SynthSpec {
        rng_seed: seed,
        ..synth.clone()
    })?;
    let spec = ExperimentSpec {
        method,
        rng_seed: seed,
        ..experiment.clone()
    };
    run(&inst.graph, &inst.known, &spec, Some(&inst.truth))
}

/// Full grid over `synthetic_grid()`. `on_cell` is called after each
/// `(setting, std, method)` cell completes.
pub fn run_bench(
    cfg: &BenchConfig,
    mut on_cell: impl FnMut(Setting, f64, &CellStats),
) -> Result<BenchReport> {
    if cfg.samples == 0 {
        return Err(Error::domain("samples must be at least 1"));
    }
    let methods = cfg.all_methods();
    let mut rows = Vec::new();
    for (setting, std) in synthetic_grid() {
        let synth = SynthSpec {
            setting,
            std,
            ..cfg.synth.clone()
        };
        let instances = (0..cfg.samples)
            .map(|s| {
                generate::<f64>(&SynthSpec {
                    rng_seed: cfg.sample_seed(s),
                    ..synth.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cells = Vec::with_capacity(methods.len());
        for &method in &methods {
            let mut accuracies = Vec::new();
            let mut failures = Vec::new();
            for (s, inst) in instances.iter().enumerate() {
                let spec = ExperimentSpec {
                    method,
                    rng_seed: cfg.sample_seed(s),
                    ..cfg.experiment.clone()
                };
                match run(&inst.graph, &inst.known, &spec, Some(&inst.truth)) {
                    Ok(r) => accuracies.push(r.accuracy.unwrap_or(f64::NAN)),
                    Err(e) => {
                        log::warn!("{setting} std={std} {method} sample {s}: {e}");
                        failures.push(format!("sample {s}: {e}"));
                    }
                }
            }
            let (mean, stdev) = mean_std(&accuracies);
            let cell = CellStats {
                method,
                accuracies,
                mean,
                stdev,
                failures,
            };
            on_cell(setting, std, &cell);
            cells.push(cell);
        }
        rows.push(GridRow {
            setting,
            std,
            cells,
        });
    }

    let ranked = cfg.methods.clone();
    let mut acc = Array2::zeros((ranked.len(), rows.len()));
    for (d, row) in rows.iter().enumerate() {
        for (a, m) in ranked.iter().enumerate() {
            let cell = row
                .cells
                .iter()
                .find(|c| c.method == *m)
                .expect("method present");
            acc[[a, d]] = if cell.mean.is_finite() {
                cell.mean
            } else {
                0.0
            };
        }
    }
    let (apr, avg_rank) = if ranked.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        (apr(acc.view())?, avg_rank(acc.view())?)
    };
    Ok(BenchReport {
        rows,
        ranked,
        apr,
        avg_rank,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub method: Method,
    pub seconds: Vec<f64>,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub method: Method,
    pub seed: u64,
    pub repeats: usize,
    pub setting: Setting,
    pub std: f64,
    pub experiment: ExperimentSpec,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            sizes: vec![1200, 2400, 4800],
            method: Method::Binom,
            seed: 0,
            repeats: 3,
            setting: Setting::Noisy,
            std: 2.0,
            experiment: ExperimentSpec::default(),
        }
    }
}

/// Wall-clock time of the method call on 3-community, 3-layer instances of
/// each size. Instance generation is not timed.
pub fn run_scaling(cfg: &ScalingConfig) -> Result<Vec<ScalingRow>> {
    if cfg.repeats == 0 {
        return Err(Error::domain("repeats must be at least 1"));
    }
    if cfg.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("sizes must be strictly ascending"));
    }
    let mut out = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        let synth = SynthSpec {
            n_per_community: n / 3,
            setting: cfg.setting,
            std: cfg.std,
            rng_seed: cfg.seed,
            ..SynthSpec::default()
        };
        if synth.n() != n {
            return Err(Error::domain(format!(
                "size {n} is not divisible into 3 communities"
            )));
        }
        let inst = generate::<f64>(&synth)?;
        let spec = ExperimentSpec {
            method: cfg.method,
            rng_seed: cfg.seed,
            ..cfg.experiment.clone()
        };
        let mut seconds = Vec::with_capacity(cfg.repeats);
        for _ in 0..cfg.repeats {
            let t = Instant::now();
            run(&inst.graph, &inst.known, &spec, None)?;
            seconds.push(t.elapsed().as_secs_f64());
        }
        let mean_seconds = seconds.iter().sum::<f64>() / seconds.len() as f64;
        out.push(ScalingRow {
            n,
            method: cfg.method,
            seconds,
            mean_seconds,
        });
    }
    Ok(out)
}
