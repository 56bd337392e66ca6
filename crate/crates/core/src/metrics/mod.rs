//! Evaluation of predicted sketches against ground truth.
//!
//! Predicted rows are first put in correspondence with ground-truth rows by
//! a minimum token-mismatch assignment; token accuracy, primitive F1 and
//! constraint F1 are computed under that correspondence. Chamfer distance
//! works on sampled geometry and needs no matching.

mod chamfer;
mod hungarian;

use serde::{Deserialize, Serialize};

use crate::sketch::{tokenize, Constraint, SketchGraph, TokenRow, TokenSequence, NO_PRIMITIVE};
use crate::SketchError;

pub use chamfer::{chamfer, chamfer_sides, sample_primitive, CHAMFER_GRID, MIN_SAMPLES};
pub use hungarian::{hungarian, AssignmentError, Matching, MAX_ASSIGNMENT};

/// Cost of pairing rows of different type.
pub const TYPE_MISMATCH_COST: f64 = 8.0;

/// Row-pair cost: mismatches among the type token, the parameters the
/// ground-truth type uses, and the construction flag.
pub fn row_cost(pred: &TokenRow, gt: &TokenRow) -> f64 {
    if pred[0] != gt[0] {
        return TYPE_MISMATCH_COST;
    }
    let used = TokenSequence::used_params(gt);
    let params = (1..=used).filter(|&k| pred[k] != gt[k]).count();
    (params + usize::from(pred[7] != gt[7])) as f64
}

pub fn match_primitives(pred: &TokenSequence, gt: &TokenSequence) -> Matching {
    let cost: Vec<Vec<f64>> = pred
        .rows
        .iter()
        .map(|p| gt.rows.iter().map(|g| row_cost(p, g)).collect())
        .collect();
    hungarian(&cost).expect("token costs are finite and square")
}

fn is_empty(row: &TokenRow) -> bool {
    row[0] == NO_PRIMITIVE
}

/// Fraction of equal tokens over matched rows. By default rows empty on
/// both sides are skipped and only the parameter slots the ground-truth
/// type uses are compared; `include_padding` compares all eight tokens of
/// every row. A type mismatch makes every compared parameter wrong.
pub fn token_accuracy(pred: &TokenSequence, gt: &TokenSequence, m: &Matching, include_padding: bool) -> f64 {
    let (mut hit, mut total) = (0usize, 0usize);
    for (i, &j) in m.perm.iter().enumerate() {
        let (p, g) = (&pred.rows[i], &gt.rows[j]);
        if !include_padding && is_empty(p) && is_empty(g) {
            continue;
        }
        let used = if include_padding { 6 } else { TokenSequence::used_params(g) };
        let same_type = p[0] == g[0];
        hit += usize::from(same_type) + usize::from(p[7] == g[7]);
        hit += (1..=used).filter(|&k| same_type && p[k] == g[k]).count();
        total += 2 + used;
    }
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct F1Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl F1Counts {
    /// `2·tp / (2·tp + fp + fn)`, with 1 when there is nothing to find.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pf1Options {
    /// Largest parameter-token difference still counted as correct.
    pub bins: u8,
    /// Whether a difference of exactly `bins` counts.
    pub inclusive: bool,
}

impl Default for Pf1Options {
    fn default() -> Self {
        Self { bins: 5, inclusive: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pf1Result {
    pub f1: f64,
    pub counts: F1Counts,
    /// `tp[i]` is true when predicted row `i` is a true positive.
    pub tp: Vec<bool>,
}

pub fn pf1(pred: &TokenSequence, gt: &TokenSequence, m: &Matching, opts: &Pf1Options) -> Pf1Result {
    let close = |a: u8, b: u8| {
        let d = a.abs_diff(b);
        if opts.inclusive {
            d <= opts.bins
        } else {
            d < opts.bins
        }
    };
    let tp: Vec<bool> = m
        .perm
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let (p, g) = (&pred.rows[i], &gt.rows[j]);
            !is_empty(g) && p[0] == g[0] && (1..=TokenSequence::used_params(g)).all(|k| close(p[k], g[k]))
        })
        .collect();
    let n_tp = tp.iter().filter(|&&t| t).count();
    let counts = F1Counts {
        tp: n_tp,
        fp: pred.rows.iter().filter(|r| !is_empty(r)).count() - n_tp,
        fn_: gt.rows.iter().filter(|r| !is_empty(r)).count() - n_tp,
    };
    Pf1Result {
        f1: counts.f1(),
        counts,
        tp,
    }
}

/// Constraint F1. A predicted constraint is a true positive when both its
/// primitives are primitive true positives and an unused ground-truth
/// constraint has the same kind and the matched endpoints (subreferences
/// included only with `use_subrefs`).
pub fn cf1(pred: &SketchGraph, gt: &SketchGraph, m: &Matching, primitive_tp: &[bool], use_subrefs: bool) -> F1Counts {
    let key = |c: &Constraint, map: &dyn Fn(usize) -> usize| {
        let (si, sj) = if use_subrefs { (c.si.0, c.sj.0) } else { (0, 0) };
        let (a, b) = ((map(c.i), si), (map(c.j), sj));
        (c.kind, a.min(b), a.max(b))
    };
    let mut available: Vec<_> = gt.constraints.iter().map(|c| Some(key(c, &|k| k))).collect();
    let mut tp = 0;
    for c in &pred.constraints {
        let endpoints_ok = [c.i, c.j]
            .iter()
            .all(|&k| primitive_tp.get(k).copied().unwrap_or(false) && k < m.perm.len());
        if !endpoints_ok {
            continue;
        }
        let want = key(c, &|k| m.perm[k]);
        if let Some(slot) = available.iter_mut().find(|s| s.as_ref() == Some(&want)) {
            *slot = None;
            tp += 1;
        }
    }
    F1Counts {
        tp,
        fp: pred.constraints.len() - tp,
        fn_: gt.constraints.len() - tp,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub include_padding: bool,
    pub pf1: Pf1Options,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub acc: f64,
    /// Chamfer distance in 64-grid units; `None` when exactly one side has
    /// no primitives.
    pub cd: Option<f64>,
    pub pf1: f64,
    pub cf1: f64,
    pub cf1_no_subref: f64,
    pub pf1_counts: F1Counts,
    pub cf1_counts: F1Counts,
    pub cf1_no_subref_counts: F1Counts,
    pub matching: Matching,
}

pub fn evaluate(pred: &SketchGraph, gt: &SketchGraph, opts: &EvalOptions) -> Result<EvalReport, SketchError> {
    let (tp_seq, tg_seq) = (tokenize(pred)?, tokenize(gt)?);
    let m = match_primitives(&tp_seq, &tg_seq);
    let acc = token_accuracy(&tp_seq, &tg_seq, &m, opts.include_padding);
    let p = pf1(&tp_seq, &tg_seq, &m, &opts.pf1);
    let c = cf1(pred, gt, &m, &p.tp, true);
    let c_loose = cf1(pred, gt, &m, &p.tp, false);
    let cd = chamfer(pred, gt);
    Ok(EvalReport {
        acc,
        cd: cd.is_finite().then_some(cd),
        pf1: p.f1,
        cf1: c.f1(),
        cf1_no_subref: c_loose.f1(),
        pf1_counts: p.counts,
        cf1_counts: c,
        cf1_no_subref_counts: c_loose,
        matching: m,
    })
}

/// Means over a batch of reports. Chamfer is averaged over finite values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub n: usize,
    pub acc: f64,
    pub cd: Option<f64>,
    pub cd_undefined: usize,
    pub pf1: f64,
    pub cf1: f64,
    pub cf1_no_subref: f64,
}

pub fn summarize(reports: &[EvalReport]) -> EvalSummary {
    let n = reports.len();
    if n == 0 {
        return EvalSummary::default();
    }
    let mean = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n as f64;
    let cds: Vec<f64> = reports.iter().filter_map(|r| r.cd).collect();
    EvalSummary {
        n,
        acc: mean(&|r| r.acc),
        cd: (!cds.is_empty()).then(|| cds.iter().sum::<f64>() / cds.len() as f64),
        cd_undefined: n - cds.len(),
        pf1: mean(&|r| r.pf1),
        cf1: mean(&|r| r.cf1),
        cf1_no_subref: mean(&|r| r.cf1_no_subref),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;
    use crate::sketch::{ConstraintKind, Primitive};

    fn pair() -> SketchGraph {
        SketchGraph::new(vec![
            Primitive::line(Point2::new(0.1, 0.1), Point2::new(0.6, 0.1)),
            Primitive::line(Point2::new(0.6, 0.1), Point2::new(0.6, 0.7)),
            Primitive::circle(Point2::new(0.3, 0.5), 0.15),
        ])
        .with(Constraint::new(ConstraintKind::Coincident, (0, 2), (1, 1)))
        .with(Constraint::new(ConstraintKind::Perpendicular, (0, 4), (1, 4)))
        .with(Constraint::new(ConstraintKind::Horizontal, (0, 4), (0, 4)))
    }

    #[test]
    fn exact_reproduction_scores_perfectly() {
        let s = pair();
        let r = evaluate(&s, &s, &EvalOptions::default()).unwrap();
        assert_eq!((r.acc, r.pf1, r.cf1, r.cf1_no_subref, r.cd), (1.0, 1.0, 1.0, 1.0, Some(0.0)));
    }

    #[test]
    fn shuffled_prediction_is_recovered() {
        let gt = pair();
        let pred = SketchGraph::new(vec![gt.primitives[2].clone(), gt.primitives[0].clone(), gt.primitives[1].clone()])
            .with(Constraint::new(ConstraintKind::Coincident, (1, 2), (2, 1)))
            .with(Constraint::new(ConstraintKind::Perpendicular, (1, 4), (2, 4)))
            .with(Constraint::new(ConstraintKind::Horizontal, (1, 4), (1, 4)));
        let r = evaluate(&pred, &gt, &EvalOptions::default()).unwrap();
        assert_eq!(r.matching.cost, 0.0);
        assert_eq!(&r.matching.perm[..3], &[2, 0, 1]);
        assert_eq!((r.acc, r.pf1, r.cf1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn missing_primitive_costs_eight() {
        let gt = pair();
        let pred = SketchGraph::new(gt.primitives[..2].to_vec());
        let m = match_primitives(&tokenize(&pred).unwrap(), &tokenize(&gt).unwrap());
        assert_eq!(m.cost, 8.0);
        // The empty row takes the circle's slot.
        assert_eq!(m.perm, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn empty_against_empty() {
        let e = TokenSequence::empty();
        let m = match_primitives(&e, &e);
        assert_eq!(m, Matching::identity(16));
        assert_eq!(token_accuracy(&e, &e, &m, false), 1.0);
        assert_eq!(token_accuracy(&e, &e, &m, true), 1.0);
    }

    #[test]
    fn wrong_types_score_low() {
        let lines: Vec<Primitive> = (0..16)
            .map(|k| Primitive::line(Point2::new(0.05 * k as f64, 0.1), Point2::new(0.05 * k as f64, 0.9)))
            .collect();
        let points: Vec<Primitive> = (0..16).map(|k| Primitive::point(Point2::new(0.05 * k as f64, 0.1))).collect();
        let (p, g) = (tokenize(&SketchGraph::new(points)).unwrap(), tokenize(&SketchGraph::new(lines)).unwrap());
        let m = match_primitives(&p, &g);
        assert!(token_accuracy(&p, &g, &m, false) < 0.3);
    }

    #[test]
    fn pf1_threshold_is_inclusive() {
        let gt = tokenize(&SketchGraph::new(vec![Primitive::line(Point2::new(0.1, 0.1), Point2::new(0.6, 0.1))])).unwrap();
        let mut off5 = gt.clone();
        off5.rows[0][1] += 5;
        let mut off6 = gt.clone();
        off6.rows[0][1] += 6;
        let score = |p: &TokenSequence, o: &Pf1Options| pf1(p, &gt, &match_primitives(p, &gt), o).f1;
        assert_eq!(score(&off5, &Pf1Options::default()), 1.0);
        assert_eq!(score(&off6, &Pf1Options::default()), 0.0);
        assert_eq!(score(&off5, &Pf1Options { inclusive: false, ..Default::default() }), 0.0);
    }

    #[test]
    fn constraint_on_failed_primitive_is_not_a_tp() {
        let gt = pair();
        let mut pred = gt.clone();
        pred.primitives[1].params[3] = 0.2;
        let r = evaluate(&pred, &gt, &EvalOptions::default()).unwrap();
        assert_eq!(r.pf1_counts, F1Counts { tp: 2, fp: 1, fn_: 1 });
        // Coincident and perpendicular touch primitive 1.
        assert_eq!(r.cf1_counts, F1Counts { tp: 1, fp: 2, fn_: 2 });
    }

    #[test]
    fn wrong_subref_only_counts_without_subrefs() {
        let gt = pair();
        let mut pred = gt.clone();
        pred.constraints[0] = Constraint::new(ConstraintKind::Coincident, (0, 1), (1, 1));
        let r = evaluate(&pred, &gt, &EvalOptions::default()).unwrap();
        assert_eq!(r.cf1_counts, F1Counts { tp: 2, fp: 1, fn_: 1 });
        assert_eq!(r.cf1_no_subref_counts, F1Counts { tp: 3, fp: 0, fn_: 0 });
    }
}
