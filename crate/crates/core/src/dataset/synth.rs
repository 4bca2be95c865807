use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed;

/// Half-width of the empty band around the decision boundary, in units of
/// the standard deviation of the informative score.
const MARGIN: f64 = 0.2;
/// Jitter of redundant copies, relative to the parent's spread.
const REDUNDANT_JITTER: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_rows: usize,
    pub n_informative: usize,
    pub n_noise: usize,
    pub n_redundant: usize,
    pub flip_prob: f64,
    pub seed: u64,
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_informative == 0 {
            return Err(Error::invalid("n_informative must be >= 1"));
        }
        if !(0.0..0.5).contains(&self.flip_prob) {
            return Err(Error::invalid(format!(
                "flip_prob must lie in [0, 0.5), got {}",
                self.flip_prob
            )));
        }
        if self.n_rows < 4 {
            return Err(Error::invalid("n_rows must be >= 4"));
        }
        Ok(())
    }

    pub fn provenance(&self, part: &str) -> String {
        format!(
            "synth:seed={},rows={},informative={},noise={},redundant={},flip={}:{part}",
            self.seed, self.n_rows, self.n_informative, self.n_noise, self.n_redundant, self.flip_prob
        )
    }
}

/// Per-column affine maps and weights shared by the train and test draws.
struct Structure {
    weights: Vec<f64>,
    informative: Vec<(f64, f64)>,
    noise: Vec<(f64, f64)>,
    /// (parent informative index, slope, intercept)
    redundant: Vec<(usize, f64, f64)>,
}

impl Structure {
    fn draw(p: &SynthParams, rng: &mut ChaCha8Rng) -> Self {
        let weights: Vec<f64> = (0..p.n_informative)
            .map(|i| {
                let w = rng.random_range(0.6..1.0);
                if i % 2 == 0 { w } else { -w }
            })
            .collect();
        let affine = |rng: &mut ChaCha8Rng| (rng.random_range(-2.0..2.0), rng.random_range(0.5..2.0));
        let informative = (0..p.n_informative).map(|_| affine(rng)).collect();
        let noise = (0..p.n_noise).map(|_| affine(rng)).collect();
        let redundant = (0..p.n_redundant)
            .map(|r| {
                let slope = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (r % p.n_informative, slope, rng.random_range(-1.0..1.0))
            })
            .collect();
        Structure {
            weights,
            informative,
            noise,
            redundant,
        }
    }
}

/// Generates a (train, test) pair with planted structure.
///
/// Columns are laid out as `inf_*` (informative), `noise_*`, then `red_*`
/// (affine copies of informative columns with small jitter). The label is
/// the sign of a weighted sum of the standardized informative values; rows
/// falling inside a margin band around zero are rejected and each class is
/// filled to exactly half of the rows, so zero is an empirical median of the
/// score. Labels are then flipped independently with `flip_prob`.
///
/// Both splits have `n_rows` rows and use disjoint sub-seeds of `seed`.
pub fn synth_generate(p: &SynthParams) -> Result<(Dataset, Dataset)> {
    p.validate()?;
    let structure = Structure::draw(p, &mut seed::rng(seed::derive_str(p.seed, "structure")));
    let train = draw_split(p, &structure, "train")?;
    let test = draw_split(p, &structure, "test")?;
    Ok((train, test))
}

fn draw_split(p: &SynthParams, s: &Structure, part: &str) -> Result<Dataset> {
    let mut rng = seed::rng(seed::derive_str(p.seed, part));
    let norm = s.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    let want_pos = p.n_rows / 2;
    let want_neg = p.n_rows - want_pos;
    let (mut pos, mut neg) = (0, 0);
    let mut rows = Vec::with_capacity(p.n_rows);
    let mut labels = Vec::with_capacity(p.n_rows);
    while rows.len() < p.n_rows {
        let z: Vec<f64> = (0..p.n_informative)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let score = z.iter().zip(&s.weights).map(|(a, w)| a * w).sum::<f64>() / norm;
        if score.abs() < MARGIN {
            continue;
        }
        let class = u8::from(score > 0.0);
        if class == 1 && pos == want_pos || class == 0 && neg == want_neg {
            continue;
        }
        if class == 1 {
            pos += 1;
        } else {
            neg += 1;
        }
        let mut row = Vec::with_capacity(p.n_informative + p.n_noise + p.n_redundant);
        row.extend(z.iter().zip(&s.informative).map(|(v, (mu, sd))| mu + sd * v));
        for (mu, sd) in &s.noise {
            row.push(mu + sd * rng.sample::<f64, _>(StandardNormal));
        }
        for &(parent, slope, icpt) in &s.redundant {
            let sd = s.informative[parent].1;
            let jitter = REDUNDANT_JITTER * sd * rng.sample::<f64, _>(StandardNormal);
            row.push(slope * row[parent] + icpt + jitter);
        }
        let flipped = p.flip_prob > 0.0 && rng.random_bool(p.flip_prob);
        labels.push(if flipped { 1 - class } else { class });
        rows.push(row);
    }
    let names = (0..p.n_informative)
        .map(|i| format!("inf_{i}"))
        .chain((0..p.n_noise).map(|i| format!("noise_{i}")))
        .chain((0..p.n_redundant).map(|i| format!("red_{i}")))
        .collect();
    Dataset::from_rows(names, rows, labels, p.provenance(part))
}
