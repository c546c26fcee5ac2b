//! Synthetic multiplex benchmarks built from Gaussian blobs and k-NN graphs.
//!
//! Three settings are supported: every layer informative, one informative
//! layer plus node-shuffled noise layers, and complementary layers that each
//! resolve a single community.

use ndarray::Array2;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DuplicateRule, MultilayerGraph, SparseSym};
use crate::labels::LabelMatrix;
use crate::scalar::Scalar;

/// Distance between the origin and each community center.
pub const CENTER_SCALE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Informative,
    Noisy,
    Complementary,
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Setting::Informative => "informative",
            Setting::Noisy => "noisy",
            Setting::Complementary => "complementary",
        })
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "informative" | "info" => Ok(Setting::Informative),
            "noisy" => Ok(Setting::Noisy),
            "complementary" | "compl" => Ok(Setting::Complementary),
            other => Err(Error::domain(format!("unknown setting `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    pub n_per_community: usize,
    pub n_communities: usize,
    pub n_layers: usize,
    pub dim: usize,
    /// Standard deviation of each isotropic blob.
    pub std: f64,
    pub setting: Setting,
    pub knn_k: usize,
    /// Neighbors per node in the sparse noise part of complementary layers.
    pub noise_knn_k: usize,
    /// Fraction of each community whose label is known.
    pub label_fraction: f64,
    pub rng_seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_per_community: 400,
            n_communities: 3,
            n_layers: 3,
            dim: 5,
            std: 5.0,
            setting: Setting::Informative,
            knn_k: 5,
            noise_knn_k: 1,
            label_fraction: 0.2,
            rng_seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn new(setting: Setting, std: f64, rng_seed: u64) -> Self {
        Self {
            setting,
            std,
            rng_seed,
            ..Self::default()
        }
    }

    pub fn n(&self) -> usize {
        self.n_per_community * self.n_communities
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.std > 0.0) || !self.std.is_finite() {
            return Err(Error::domain(format!(
                "std must be positive, got {}",
                self.std
            )));
        }
        if self.knn_k == 0 || self.noise_knn_k == 0 {
            return Err(Error::domain("knn_k must be at least 1"));
        }
        if !(self.label_fraction > 0.0 && self.label_fraction <= 1.0) {
            return Err(Error::domain(format!(
                "label_fraction must lie in (0, 1], got {}",
                self.label_fraction
            )));
        }
        if self.n_communities == 0 || self.n_layers == 0 || self.dim == 0 {
            return Err(Error::domain(
                "communities, layers and dim must be positive",
            ));
        }
        if self.n_per_community < self.knn_k + 1 {
            return Err(Error::domain("each community needs more than knn_k points"));
        }
        if self.setting == Setting::Complementary {
            if self.n_layers != self.n_communities {
                return Err(Error::domain(
                    "complementary setting needs one layer per community",
                ));
            }
            if self.n_communities < 2 || self.n() - self.n_per_community < self.noise_knn_k + 1 {
                return Err(Error::domain(
                    "complementary noise needs at least two communities",
                ));
            }
        }
        Ok(())
    }
}

/// A generated benchmark instance.
#[derive(Debug, Clone)]
pub struct SynthInstance<T> {
    pub graph: MultilayerGraph<T>,
    /// Community of every node.
    pub truth: Vec<usize>,
    /// The sampled known labels.
    pub known: LabelMatrix,
}

impl<T: Scalar> SynthInstance<T> {
    pub fn class_names(&self) -> &[String] {
        self.known.classes()
    }
}

/// Symmetrized k-NN graph with weights `exp(-|p_i - p_j| + d_min)`, where
/// `d_min` is the smallest pairwise distance in the point set. Neighbor ties
/// go to the lower index.
pub fn gen_blob_layer<T: Scalar>(points: &Array2<f64>, knn_k: usize) -> Result<SparseSym<T>> {
    let n = points.nrows();
    if knn_k == 0 || n < knn_k + 1 {
        return Err(Error::domain(format!(
            "k-NN with k={knn_k} needs more than {knn_k} points, got {n}"
        )));
    }
    let mut d_min = f64::INFINITY;
    let mut neighbors: Vec<Vec<(f64, usize)>> = Vec::with_capacity(n);
    let mut row = vec![(0.0, 0usize); n - 1];
    for i in 0..n {
        let pi = points.row(i);
        let mut pos = 0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let d2: f64 = pi
                .iter()
                .zip(points.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let d = d2.sqrt();
            if j > i {
                d_min = d_min.min(d);
            }
            row[pos] = (d, j);
            pos += 1;
        }
        let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        row.select_nth_unstable_by(knn_k - 1, by_key);
        let mut best = row[..knn_k].to_vec();
        best.sort_by(by_key);
        neighbors.push(best);
    }
    let triplets = neighbors.into_iter().enumerate().flat_map(|(i, nb)| {
        nb.into_iter()
            .map(move |(d, j)| (i, j, T::lit((-d + d_min).exp())))
    });
    SparseSym::from_triplets(n, triplets, DuplicateRule::Max, false)
}

fn center(c: usize, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[c % dim] = CENTER_SCALE;
    v
}

/// One fresh draw of all blobs, nodes ordered by community.
fn sample_points(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut pts = Array2::zeros((spec.n(), spec.dim));
    for c in 0..spec.n_communities {
        let mu = center(c, spec.dim);
        for r in 0..spec.n_per_community {
            let i = c * spec.n_per_community + r;
            for (d, m) in mu.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                pts[[i, d]] = m + spec.std * z;
            }
        }
    }
    pts
}

fn informative_layer<T: Scalar>(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<SparseSym<T>> {
    gen_blob_layer(&sample_points(spec, rng), spec.knn_k)
}

fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// k-NN graph over a subset of nodes, mapped back to global indices.
fn subset_layer<T: Scalar>(
    points: &Array2<f64>,
    nodes: &[usize],
    k: usize,
) -> Result<Vec<(usize, usize, T)>> {
    let sub = points.select(ndarray::Axis(0), nodes);
    let local = gen_blob_layer::<T>(&sub, k)?;
    Ok(local
        .entries()
        .iter()
        .map(|&(i, j, w)| (nodes[i], nodes[j], w))
        .collect())
}

fn finish<T: Scalar>(
    spec: &SynthSpec,
    layers: Vec<SparseSym<T>>,
    rng: &mut ChaCha8Rng,
) -> Result<SynthInstance<T>> {
    let truth: Vec<usize> = (0..spec.n()).map(|i| i / spec.n_per_community).collect();
    let per = ((spec.label_fraction * spec.n_per_community as f64).round() as usize)
        .clamp(1, spec.n_per_community);
    let mut assignment = vec![None; spec.n()];
    for c in 0..spec.n_communities {
        let block: Vec<usize> =
            (c * spec.n_per_community..(c + 1) * spec.n_per_community).collect();
        for &i in block.choose_multiple(rng, per) {
            assignment[i] = Some(c);
        }
    }
    let classes = (0..spec.n_communities).map(|c| c.to_string()).collect();
    Ok(SynthInstance {
        graph: MultilayerGraph::from_layers(layers)?,
        truth,
        known: LabelMatrix::from_assignment(assignment, classes)?,
    })
}

/// Every layer is a fresh draw of the same blobs.
pub fn gen_informative<T: Scalar>(spec: &SynthSpec) -> Result<SynthInstance<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let layers = (0..spec.n_layers)
        .map(|_| informative_layer(spec, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    finish(spec, layers, &mut rng)
}

/// Layer 0 is informative; the others are informative layers conjugated by a
/// uniformly random node permutation.
pub fn gen_noisy<T: Scalar>(spec: &SynthSpec) -> Result<SynthInstance<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut layers = vec![informative_layer(spec, &mut rng)?];
    for _ in 1..spec.n_layers {
        let layer = informative_layer::<T>(spec, &mut rng)?;
        let perm = random_permutation(spec.n(), &mut rng);
        layers.push(layer.permuted(&perm));
    }
    finish(spec, layers, &mut rng)
}

/// Layer `l` holds the k-NN graph of community `l` plus a sparse k-NN graph
/// over the remaining nodes whose node indices are shuffled among themselves.
pub fn gen_complementary<T: Scalar>(spec: &SynthSpec) -> Result<SynthInstance<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let n = spec.n();
    let mut layers = Vec::with_capacity(spec.n_layers);
    for l in 0..spec.n_layers {
        let points = sample_points(spec, &mut rng);
        let own: Vec<usize> = (l * spec.n_per_community..(l + 1) * spec.n_per_community).collect();
        let rest: Vec<usize> = (0..n).filter(|i| i / spec.n_per_community != l).collect();
        let mut triplets = subset_layer::<T>(&points, &own, spec.knn_k)?;
        let noise = subset_layer::<T>(&points, &rest, spec.noise_knn_k)?;
        let mut shuffled = rest.clone();
        shuffled.shuffle(&mut rng);
        let remap: std::collections::HashMap<usize, usize> =
            rest.iter().copied().zip(shuffled).collect();
        triplets.extend(noise.into_iter().map(|(i, j, w)| (remap[&i], remap[&j], w)));
        layers.push(SparseSym::from_triplets(
            n,
            triplets,
            DuplicateRule::Max,
            false,
        )?);
    }
    finish(spec, layers, &mut rng)
}

pub fn generate<T: Scalar>(spec: &SynthSpec) -> Result<SynthInstance<T>> {
    match spec.setting {
        Setting::Informative => gen_informative(spec),
        Setting::Noisy => gen_noisy(spec),
        Setting::Complementary => gen_complementary(spec),
    }
}
