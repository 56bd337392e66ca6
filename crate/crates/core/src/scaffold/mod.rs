//! Model-free reference for the set-prediction objective.
//!
//! Given output probabilities from any model (a [`PredictionBundle`]), this
//! computes the cross-entropy loss against a ground-truth token sequence and
//! constraint set, either under a supplied row matching or under the optimal
//! one. Constraint classification runs only over the valid subreference pairs
//! `S` implied by primitive types, enumerated without materializing all
//! `4n(4n−1)/2` pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{hungarian, Matching};
use crate::sketch::{Constraint, ConstraintKind, PrimitiveKind, TokenRow, TokenSequence, NO_PRIMITIVE, N_BINS};

pub const N_TYPES: usize = 5;
pub const N_PARAMS: usize = 6;
/// Constraint classes: every kind plus the "no constraint" class.
pub const N_CONSTRAINT_CLASSES: usize = ConstraintKind::ALL.len() + 1;
pub const NO_CONSTRAINT_CLASS: usize = ConstraintKind::ALL.len();
pub const PROB_CLAMP: f64 = 1e-12;
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaffoldError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("bad shape: {0}")]
    Shape(String),
    #[error("{what} row {row} is not a probability distribution (sum {sum})")]
    NotSimplex { what: &'static str, row: usize, sum: f64 },
    #[error("no constraint prediction for pair {0:?}")]
    MissingPair(PairKey),
    #[error("matching is not a bijection over {0} rows")]
    BadMatching(usize),
    #[error("ground-truth token out of range in row {0}")]
    BadToken(usize),
}

/// A subreference pair `(i, s_i, j, s_j)` with `(i, s_i) ≤ (j, s_j)`.
/// Primitive indices are 0-based, subreferences 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairKey {
    pub i: usize,
    pub si: u8,
    pub j: usize,
    pub sj: u8,
}

impl PairKey {
    pub fn new(a: (usize, u8), b: (usize, u8)) -> Self {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Self {
            i: lo.0,
            si: lo.1,
            j: hi.0,
            sj: hi.1,
        }
    }

    pub fn of(c: &Constraint) -> Self {
        Self::new((c.i, c.si.0), (c.j, c.sj.0))
    }
}

/// Valid pairs for a list of type tokens; no-primitive slots contribute
/// nothing.
pub fn valid_pairs(types: &[u8]) -> Vec<PairKey> {
    let slots: Vec<(usize, u8)> = types
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| PrimitiveKind::from_token(t).map(|k| (i, k)))
        .flat_map(|(i, k)| k.valid_subrefs().iter().map(move |&s| (i, s)))
        .collect();
    let mut out = Vec::new();
    for (x, &a) in slots.iter().enumerate() {
        for &b in &slots[x..] {
            out.push(PairKey::new(a, b));
        }
    }
    out
}

/// Valid pairs conditioned on predicted types (argmax of each type row).
pub fn valid_pairs_inferred(bundle: &PredictionBundle) -> Vec<PairKey> {
    let types: Vec<u8> = bundle.type_probs.iter().map(|row| argmax(row) as u8 + 1).collect();
    valid_pairs(&types)
}

fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map_or(0, |(k, _)| k)
}

/// `[a + b, |a − b|]`, identical for swapped inputs.
pub fn pair_feature(a: &[f64], b: &[f64]) -> Result<Vec<f64>, ScaffoldError> {
    pair_feature_with(a, b, false)
}

/// With `signed`, the second half is `a − b` and swapping negates it.
pub fn pair_feature_with(a: &[f64], b: &[f64], signed: bool) -> Result<Vec<f64>, ScaffoldError> {
    if a.len() != b.len() {
        return Err(ScaffoldError::DimensionMismatch(a.len(), b.len()));
    }
    let sum = a.iter().zip(b).map(|(x, y)| x + y);
    let diff = a.iter().zip(b).map(|(x, y)| if signed { x - y } else { (x - y).abs() });
    Ok(sum.chain(diff).collect())
}

/// Per-slot embeddings: 8 primitive-token embeddings and 4 subreference
/// embeddings per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSet {
    pub dim: usize,
    pub prim: Vec<Vec<f64>>,
    pub constr: Vec<Vec<f64>>,
}

impl EmbeddingSet {
    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            dim,
            prim: vec![vec![0.0; dim]; 8 * n],
            constr: vec![vec![0.0; dim]; 4 * n],
        }
    }

    pub fn new(dim: usize, prim: Vec<Vec<f64>>, constr: Vec<Vec<f64>>) -> Result<Self, ScaffoldError> {
        let n = constr.len() / 4;
        if constr.len() != 4 * n || prim.len() != 8 * n {
            return Err(ScaffoldError::Shape(format!(
                "{} primitive and {} constraint embeddings do not fit 8n and 4n",
                prim.len(),
                constr.len()
            )));
        }
        for v in prim.iter().chain(&constr) {
            if v.len() != dim {
                return Err(ScaffoldError::DimensionMismatch(v.len(), dim));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ScaffoldError::Shape("non-finite embedding".into()));
            }
        }
        Ok(Self { dim, prim, constr })
    }

    pub fn slots(&self) -> usize {
        self.constr.len() / 4
    }

    /// Embedding of subreference `s` (1..=4) of slot `i`.
    pub fn subref(&self, i: usize, s: u8) -> &[f64] {
        &self.constr[4 * i + usize::from(s) - 1]
    }

    /// Pair features for exactly the pairs in `S` built from `types`.
    pub fn pair_features(&self, types: &[u8], signed: bool) -> Result<Vec<(PairKey, Vec<f64>)>, ScaffoldError> {
        if types.len() != self.slots() {
            return Err(ScaffoldError::DimensionMismatch(types.len(), self.slots()));
        }
        valid_pairs(types)
            .into_iter()
            .map(|k| Ok((k, pair_feature_with(self.subref(k.i, k.si), self.subref(k.j, k.sj), signed)?)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairProbs {
    #[serde(flatten)]
    pub key: PairKey,
    pub probs: Vec<f64>,
}

/// Output distributions of a model for `n` slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionBundle {
    /// `n × 5`, type tokens 1..=5.
    pub type_probs: Vec<Vec<f64>>,
    /// `n × 6 × 64`, parameter bins 1..=64.
    pub param_probs: Vec<Vec<Vec<f64>>>,
    /// `n × 2`, construction flag 0/1.
    pub constr_flag_probs: Vec<Vec<f64>>,
    /// One 14-way distribution per predicted pair, indexed by predicted rows.
    pub constraint_probs: Vec<PairProbs>,
}

fn check_simplex(what: &'static str, row: usize, p: &[f64], len: usize) -> Result<(), ScaffoldError> {
    if p.len() != len {
        return Err(ScaffoldError::Shape(format!("{what} row {row} has {} entries, expected {len}", p.len())));
    }
    let sum: f64 = p.iter().sum();
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(ScaffoldError::NotSimplex { what, row, sum });
    }
    Ok(())
}

impl PredictionBundle {
    pub fn rows(&self) -> usize {
        self.type_probs.len()
    }

    /// Uniform distributions over `n` slots with entries for every pair in `pairs`.
    pub fn uniform(n: usize, pairs: &[PairKey]) -> Self {
        let u = |k: usize| vec![1.0 / k as f64; k];
        Self {
            type_probs: vec![u(N_TYPES); n],
            param_probs: vec![vec![u(usize::from(N_BINS)); N_PARAMS]; n],
            constr_flag_probs: vec![u(2); n],
            constraint_probs: pairs
                .iter()
                .map(|&key| PairProbs {
                    key,
                    probs: u(N_CONSTRAINT_CLASSES),
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ScaffoldError> {
        let n = self.rows();
        if self.param_probs.len() != n || self.constr_flag_probs.len() != n {
            return Err(ScaffoldError::Shape("head row counts differ".into()));
        }
        for r in 0..n {
            check_simplex("type", r, &self.type_probs[r], N_TYPES)?;
            check_simplex("flag", r, &self.constr_flag_probs[r], 2)?;
            if self.param_probs[r].len() != N_PARAMS {
                return Err(ScaffoldError::Shape(format!("param row {r} needs {N_PARAMS} slots")));
            }
            for p in &self.param_probs[r] {
                check_simplex("param", r, p, usize::from(N_BINS))?;
            }
        }
        for (r, pp) in self.constraint_probs.iter().enumerate() {
            check_simplex("constraint", r, &pp.probs, N_CONSTRAINT_CLASSES)?;
        }
        Ok(())
    }

    fn constraint_row(&self, key: PairKey) -> Option<&[f64]> {
        self.constraint_probs.iter().find(|p| p.key == key).map(|p| p.probs.as_slice())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossOptions {
    /// Also score the pad tokens and flag of no-primitive ground-truth rows.
    pub include_padding: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub total: f64,
    pub token: f64,
    pub constraint: f64,
    /// Set when some target probability fell below the clamp.
    pub clamped: bool,
}

struct Nll {
    clamped: bool,
}

impl Nll {
    fn of(&mut self, p: f64) -> f64 {
        if p < PROB_CLAMP {
            self.clamped = true;
        }
        -p.max(PROB_CLAMP).ln()
    }
}

fn check_gt_row(r: usize, row: &TokenRow) -> Result<(), ScaffoldError> {
    let ok = (1..=5).contains(&row[0]) && row[1..7].iter().all(|t| (1..=N_BINS).contains(t)) && row[7] <= 1;
    if ok {
        Ok(())
    } else {
        Err(ScaffoldError::BadToken(r))
    }
}

/// Cross-entropy of predicted row `i` against ground-truth row `g`.
fn row_loss(pred: &PredictionBundle, i: usize, g: &TokenRow, opts: &LossOptions, nll: &mut Nll) -> f64 {
    let mut loss = nll.of(pred.type_probs[i][usize::from(g[0]) - 1]);
    let empty = g[0] == NO_PRIMITIVE;
    if empty && !opts.include_padding {
        return loss;
    }
    let used = if empty { N_PARAMS } else { TokenSequence::used_params(g) };
    for k in 0..used {
        loss += nll.of(pred.param_probs[i][k][usize::from(g[k + 1]) - 1]);
    }
    loss + nll.of(pred.constr_flag_probs[i][usize::from(g[7])])
}

/// Loss under a given matching (`perm[i]` = ground-truth row of predicted
/// row `i`). The constraint term runs over `S` from ground-truth types; a
/// pair's target is the kind of the first ground-truth constraint on it, or
/// the "no constraint" class.
pub fn total_loss(
    pred: &PredictionBundle,
    gt: &TokenSequence,
    gt_constraints: &[Constraint],
    matching: &Matching,
    opts: &LossOptions,
) -> Result<LossReport, ScaffoldError> {
    pred.validate()?;
    let n = pred.rows();
    if gt.rows.len() != n {
        return Err(ScaffoldError::DimensionMismatch(gt.rows.len(), n));
    }
    let mut seen = vec![false; n];
    if matching.perm.len() != n || matching.perm.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
        return Err(ScaffoldError::BadMatching(n));
    }
    for (r, row) in gt.rows.iter().enumerate() {
        check_gt_row(r, row)?;
    }

    let mut nll = Nll { clamped: false };
    let token: f64 = matching
        .perm
        .iter()
        .enumerate()
        .map(|(i, &j)| row_loss(pred, i, &gt.rows[j], opts, &mut nll))
        .sum();

    let inv = matching.inverse();
    let types: Vec<u8> = gt.rows.iter().map(|r| r[0]).collect();
    let mut constraint = 0.0;
    for key in valid_pairs(&types) {
        let target = gt_constraints
            .iter()
            .find(|c| PairKey::of(c) == key)
            .map_or(NO_CONSTRAINT_CLASS, |c| c.kind.class_index());
        let pred_key = PairKey::new((inv[key.i], key.si), (inv[key.j], key.sj));
        let probs = pred.constraint_row(pred_key).ok_or(ScaffoldError::MissingPair(pred_key))?;
        constraint += nll.of(probs[target]);
    }
    Ok(LossReport {
        total: token + constraint,
        token,
        constraint,
        clamped: nll.clamped,
    })
}

/// Loss under the matching that minimizes the token term.
pub fn matched_loss(
    pred: &PredictionBundle,
    gt: &TokenSequence,
    gt_constraints: &[Constraint],
    opts: &LossOptions,
) -> Result<(LossReport, Matching), ScaffoldError> {
    pred.validate()?;
    let n = pred.rows();
    if gt.rows.len() != n {
        return Err(ScaffoldError::DimensionMismatch(gt.rows.len(), n));
    }
    for (r, row) in gt.rows.iter().enumerate() {
        check_gt_row(r, row)?;
    }
    let mut nll = Nll { clamped: false };
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| gt.rows.iter().map(|g| row_loss(pred, i, g, opts, &mut nll)).collect())
        .collect();
    let m = hungarian(&cost).map_err(|e| ScaffoldError::Shape(e.to_string()))?;
    let report = total_loss(pred, gt, gt_constraints, &m, opts)?;
    Ok((report, m))
}
