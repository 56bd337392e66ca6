use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{generate_cpt, generate_rotated, generate_synthetic, CptConfig};
use crate::sketch::{to_json_line, validate, SketchGraph};

/// Lines processed together before results are written out in order.
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Cpt,
    Rotate,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentOptions {
    pub strategy: Strategy,
    /// Augmentations attempted per input sketch.
    pub k: usize,
    pub seed: u64,
    /// CPT settings; the seed field is replaced per augmentation.
    pub cpt: CptConfig,
    /// Worker threads. Output does not depend on this.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::Cpt,
            k: 1,
            seed: 0,
            cpt: CptConfig::default(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SketchCounts {
    pub line: usize,
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineError {
    pub line: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: AugmentOptions,
    pub total_in: usize,
    pub total_out: usize,
    pub rejects_by_reason: BTreeMap<String, usize>,
    pub per_sketch: Vec<SketchCounts>,
    pub line_errors: Vec<LineError>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream seed for augmentation `j` of the sketch on `line`.
pub fn derive_seed(seed: u64, line: usize, j: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ line as u64) ^ j as u64)
}

/// Outcome of augmenting one sketch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SketchOutcome {
    pub outputs: Vec<SketchGraph>,
    pub rejects: BTreeMap<String, usize>,
}

/// Augment the sketch read from input line `line`.
pub fn augment_sketch(sketch: &SketchGraph, line: usize, opts: &AugmentOptions) -> Result<SketchOutcome, String> {
    if let Some(v) = validate(sketch).first() {
        return Err(format!("invalid sketch: {v}"));
    }
    let mut out = SketchOutcome::default();
    for j in 0..opts.k {
        let seed = derive_seed(opts.seed, line, j);
        match opts.strategy {
            Strategy::Cpt => {
                let cfg = CptConfig { seed, ..opts.cpt };
                let r = generate_cpt(sketch, &cfg).map_err(|e| e.to_string())?;
                if r.accepted {
                    out.outputs.push(r.sketch);
                } else {
                    *out.rejects.entry(r.reason.as_str().to_string()).or_default() += 1;
                }
            }
            Strategy::Rotate => {
                let angle = ChaCha8Rng::seed_from_u64(seed).random_range(0.0..std::f64::consts::TAU);
                out.outputs.push(generate_rotated(sketch, angle).sketch);
            }
            Strategy::Synthetic => {
                out.outputs.push(generate_synthetic(seed, sketch.primitives.len()));
            }
        }
    }
    Ok(out)
}

type LineResult = (usize, Result<SketchOutcome, String>);

fn process_batch(batch: &[(usize, Result<SketchGraph, String>)], opts: &AugmentOptions) -> Vec<LineResult> {
    let run = |(line, parsed): &(usize, Result<SketchGraph, String>)| {
        let res = parsed.clone().and_then(|s| augment_sketch(&s, *line, opts));
        (*line, res)
    };
    let jobs = opts.jobs.max(1).min(batch.len().max(1));
    if jobs == 1 {
        return batch.iter().map(run).collect();
    }
    let mut slots: Vec<Option<LineResult>> = vec![None; batch.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                scope.spawn(move || {
                    (w..batch.len())
                        .step_by(jobs)
                        .map(|i| (i, run(&batch[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("augmentation worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every slot filled")).collect()
}

/// Stream `input` JSONL through the chosen augmentation and write accepted
/// sketches to `output`, in input order. Bad lines are recorded and skipped.
pub fn augment_corpus<R: BufRead, W: Write>(input: R, mut output: W, opts: &AugmentOptions) -> io::Result<Manifest> {
    let mut manifest = Manifest {
        config: *opts,
        total_in: 0,
        total_out: 0,
        rejects_by_reason: BTreeMap::new(),
        per_sketch: Vec::new(),
        line_errors: Vec::new(),
    };
    let mut reader = crate::sketch::read_sketches(input).peekable();
    while reader.peek().is_some() {
        let batch: Vec<_> = reader
            .by_ref()
            .take(BATCH)
            .map(|(line, r)| (line, r.map_err(|e| e.to_string())))
            .collect();
        for (line, res) in process_batch(&batch, opts) {
            manifest.total_in += 1;
            match res {
                Ok(outcome) => {
                    for s in &outcome.outputs {
                        writeln!(output, "{}", to_json_line(s))?;
                    }
                    let rejected = outcome.rejects.values().sum();
                    for (reason, n) in outcome.rejects {
                        *manifest.rejects_by_reason.entry(reason).or_default() += n;
                    }
                    manifest.total_out += outcome.outputs.len();
                    manifest.per_sketch.push(SketchCounts {
                        line,
                        accepted: outcome.outputs.len(),
                        rejected,
                    });
                }
                Err(error) => manifest.line_errors.push(LineError { line, error }),
            }
        }
    }
    output.flush()?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpt::fixtures::rectangle;

    fn corpus() -> String {
        let mut text = String::new();
        for k in 0..5 {
            let s = rectangle(0.1 + 0.02 * k as f64, 0.2, 0.4, 0.3);
            text.push_str(&to_json_line(&s));
            text.push('\n');
        }
        text.push_str("{broken\n");
        text
    }

    #[test]
    fn k_zero_writes_nothing() {
        let mut out = Vec::new();
        let opts = AugmentOptions { k: 0, ..Default::default() };
        let m = augment_corpus(corpus().as_bytes(), &mut out, &opts).unwrap();
        assert!(out.is_empty());
        assert_eq!(m.total_out, 0);
        assert_eq!(m.line_errors.len(), 1);
        assert_eq!(m.line_errors[0].line, 6);
    }

    #[test]
    fn output_is_independent_of_jobs() {
        let run = |jobs| {
            let mut out = Vec::new();
            let opts = AugmentOptions { k: 3, seed: 5, jobs, ..Default::default() };
            let m = augment_corpus(corpus().as_bytes(), &mut out, &opts).unwrap();
            (out, m.total_out)
        };
        let (a, n) = run(1);
        assert!(n > 0);
        assert_eq!(a, run(4).0);
        assert_eq!(a, run(1).0);
    }

    #[test]
    fn seeds_differ_per_line_and_index() {
        assert_ne!(derive_seed(1, 1, 0), derive_seed(1, 2, 0));
        assert_ne!(derive_seed(1, 1, 0), derive_seed(1, 1, 1));
        assert_ne!(derive_seed(1, 1, 0), derive_seed(2, 1, 0));
    }
}
