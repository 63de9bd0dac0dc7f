//! Labeled synthetic EHR-like corpora: several datasets with a small share
//! of identifier columns written in heterogeneous formats.

mod generators;
mod pools;

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::category::PhiCategory;
use crate::error::{Error, Result};
use crate::ingest::{save_dataset, save_labels, Column, Dataset, LabelRecord};

pub use generators::{generate_column, Generator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub n_datasets: usize,
    pub total_columns: usize,
    pub rows: usize,
    pub phi_fraction: f64,
    pub seed: u64,
    /// Reserve one format per generator for the last dataset only.
    pub held_out_formats: bool,
    /// Upper bound of the per-column null rate; about half the columns
    /// have no nulls at all.
    pub max_null_rate: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_datasets: 8,
            total_columns: 889,
            rows: 1000,
            phi_fraction: 0.075,
            seed: 42,
            held_out_formats: true,
            max_null_rate: 0.15,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.into()));
        if !(self.phi_fraction > 0.0 && self.phi_fraction <= 0.5) {
            return bad("phi_fraction must be in (0, 0.5]");
        }
        if self.n_datasets == 0 {
            return bad("n_datasets must be positive");
        }
        if self.total_columns < self.n_datasets {
            return bad("need at least one column per dataset");
        }
        if self.rows == 0 {
            return bad("rows must be positive");
        }
        if !(0.0..1.0).contains(&self.max_null_rate) {
            return bad("max_null_rate must be in [0, 1)");
        }
        Ok(())
    }

    pub fn phi_columns(&self) -> usize {
        ((self.total_columns as f64 * self.phi_fraction).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnManifest {
    pub name: String,
    pub generator: Generator,
    pub format: String,
    pub label: u8,
    pub category: Option<PhiCategory>,
    pub held_out_format: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub dataset: Dataset,
    pub columns: Vec<ColumnManifest>,
    pub held_out: bool,
}

impl GeneratedDataset {
    pub fn labels(&self) -> Vec<LabelRecord> {
        self.columns
            .iter()
            .map(|c| LabelRecord {
                column_name: c.name.clone(),
                label: c.label,
                category: c.category,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub spec: CorpusSpec,
    pub datasets: Vec<GeneratedDataset>,
}

impl Corpus {
    pub fn column_count(&self) -> usize {
        self.datasets.iter().map(|d| d.columns.len()).sum()
    }

    pub fn phi_count(&self) -> usize {
        self.datasets
            .iter()
            .flat_map(|d| &d.columns)
            .filter(|c| c.label == 1)
            .count()
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            spec: self.spec.clone(),
            datasets: self
                .datasets
                .iter()
                .map(|d| DatasetManifest {
                    name: d.dataset.name.clone(),
                    file: format!("{}.csv", d.dataset.name),
                    labels_file: format!("{}.labels.csv", d.dataset.name),
                    held_out: d.held_out,
                    columns: d.columns.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub file: String,
    pub labels_file: String,
    pub held_out: bool,
    pub columns: Vec<ColumnManifest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: CorpusSpec,
    pub datasets: Vec<DatasetManifest>,
}

/// Split `total` into `parts` near-equal shares, larger shares first.
fn even_split(total: usize, parts: usize) -> Vec<usize> {
    (0..parts)
        .map(|i| total / parts + usize::from(i < total % parts))
        .collect()
}

/// Largest-remainder allocation of `n` items over generators by weight.
fn allocate(gens: &[Generator], n: usize) -> Vec<Generator> {
    let total: f64 = gens.iter().map(|g| g.weight()).sum();
    let quotas: Vec<f64> = gens.iter().map(|g| g.weight() / total * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..gens.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let missing = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    gens.iter()
        .zip(counts)
        .flat_map(|(&g, c)| std::iter::repeat_n(g, c))
        .collect()
}

struct ColumnPlan {
    generator: Generator,
    format: &'static str,
    held_out_format: bool,
}

fn dataset_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Generate a corpus. Identical specs give identical corpora regardless of
/// thread count.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_phi = spec.phi_columns().min(spec.total_columns);

    let mut phi = allocate(&Generator::PHI, n_phi);
    let mut non_phi = allocate(&Generator::NON_PHI, spec.total_columns - n_phi);
    phi.shuffle(&mut rng);
    non_phi.shuffle(&mut rng);

    let widths = even_split(spec.total_columns, spec.n_datasets);
    let phi_per = even_split(n_phi, spec.n_datasets);
    let held_out_index = (spec.held_out_formats && spec.n_datasets > 1).then(|| spec.n_datasets - 1);

    let mut plans: Vec<Vec<ColumnPlan>> = Vec::with_capacity(spec.n_datasets);
    let (mut phi_iter, mut non_iter) = (phi.into_iter(), non_phi.into_iter());
    for (d, (&width, &n_p)) in widths.iter().zip(&phi_per).enumerate() {
        let n_p = n_p.min(width);
        let held_out = held_out_index == Some(d);
        let mut plan: Vec<ColumnPlan> = Vec::with_capacity(width);
        for g in phi_iter.by_ref().take(n_p) {
            let (format, held) = match g.held_out_format() {
                Some(f) if held_out => (f, true),
                _ => (choose_format(g.formats(), &mut rng), false),
            };
            plan.push(ColumnPlan {
                generator: g,
                format,
                held_out_format: held,
            });
        }
        for g in non_iter.by_ref().take(width - n_p) {
            plan.push(ColumnPlan {
                generator: g,
                format: choose_format(g.formats(), &mut rng),
                held_out_format: false,
            });
        }
        plan.shuffle(&mut rng);
        plans.push(plan);
    }

    let datasets = plans
        .into_par_iter()
        .enumerate()
        .map(|(d, plan)| build_dataset(spec, d, plan, held_out_index == Some(d)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus {
        spec: spec.clone(),
        datasets,
    })
}

fn choose_format<R: Rng>(formats: &'static [&'static str], rng: &mut R) -> &'static str {
    formats[rng.random_range(0..formats.len())]
}

fn build_dataset(spec: &CorpusSpec, d: usize, plan: Vec<ColumnPlan>, held_out: bool) -> Result<GeneratedDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(dataset_seed(spec.seed, d));
    let mut counters = std::collections::BTreeMap::<&str, usize>::new();
    let mut columns = Vec::with_capacity(plan.len());
    let mut manifest = Vec::with_capacity(plan.len());
    for p in plan {
        let slug = p.generator.slug();
        let n = counters.entry(slug).or_insert(0);
        *n += 1;
        let name = format!("{slug}_{n}");
        let null_rate = if spec.max_null_rate > 0.0 && rng.random_bool(0.5) {
            rng.random_range(0.0..spec.max_null_rate)
        } else {
            0.0
        };
        let cells = generate_column(p.generator, p.format, spec.rows, null_rate, &mut rng);
        let category = p.generator.category();
        let label = u8::from(category.is_some());
        let mut col = Column::new(&name, cells);
        col.label = Some(label);
        col.category = category;
        columns.push(col);
        manifest.push(ColumnManifest {
            name,
            generator: p.generator,
            format: p.format.to_string(),
            label,
            category,
            held_out_format: p.held_out_format,
        });
    }
    Ok(GeneratedDataset {
        dataset: Dataset::new(format!("ehr_{:02}", d + 1), columns)?,
        columns: manifest,
        held_out,
    })
}

/// Write every dataset as CSV with a label sidecar, plus `manifest.json`.
pub fn write_corpus(corpus: &Corpus, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for d in &corpus.datasets {
        save_dataset(&d.dataset, dir.join(format!("{}.csv", d.dataset.name)))?;
        save_labels(&d.labels(), dir.join(format!("{}.labels.csv", d.dataset.name)))?;
    }
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&corpus.manifest())?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}
