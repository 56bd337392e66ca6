mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sketchgraph::cpt::generate_synthetic;
use sketchgraph::metrics::Matching;
use sketchgraph::scaffold::{
    matched_loss, pair_feature, total_loss, valid_pairs, LossOptions, PairKey, PairProbs, PredictionBundle, N_CONSTRAINT_CLASSES,
    N_PARAMS, N_TYPES,
};
use sketchgraph::sketch::{tokenize, TokenRow, TokenSequence, N_BINS};
use sketchgraph::Constraint;

fn simplex(r: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.01..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|x| x / sum).collect()
}

/// Every pair over `n` rows and all four subreferences.
fn all_pairs(n: usize) -> Vec<PairKey> {
    let slots: Vec<(usize, u8)> = (0..n).flat_map(|i| (1..=4).map(move |s| (i, s))).collect();
    let mut out = Vec::new();
    for (x, &a) in slots.iter().enumerate() {
        for &b in &slots[x..] {
            out.push(PairKey::new(a, b));
        }
    }
    out
}

/// Random token heads; `shared` gives every pair the same constraint row.
fn random_bundle(r: &mut ChaCha8Rng, n: usize, shared: bool) -> PredictionBundle {
    let common = simplex(r, N_CONSTRAINT_CLASSES);
    PredictionBundle {
        type_probs: (0..n).map(|_| simplex(r, N_TYPES)).collect(),
        param_probs: (0..n).map(|_| (0..N_PARAMS).map(|_| simplex(r, usize::from(N_BINS))).collect()).collect(),
        constr_flag_probs: (0..n).map(|_| simplex(r, 2)).collect(),
        constraint_probs: all_pairs(n)
            .into_iter()
            .map(|key| PairProbs {
                key,
                probs: if shared { common.clone() } else { simplex(r, N_CONSTRAINT_CLASSES) },
            })
            .collect(),
    }
}

/// First `n` rows of a random sketch's tokens with its constraints on those rows.
fn random_target(r: &mut ChaCha8Rng, n: usize) -> (TokenSequence, Vec<Constraint>) {
    let s = generate_synthetic(r.random(), r.random_range(1..=n));
    let rows: Vec<TokenRow> = tokenize(&s).unwrap().rows[..n].to_vec();
    let cs = s.constraints.into_iter().filter(|c| c.j < n).collect();
    (TokenSequence { rows }, cs)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn matched_loss_is_minimal_over_all_permutations() {
    let mut r = rng(11);
    let opts = LossOptions::default();
    for case in 0..200 {
        let n = r.random_range(1..=5);
        let bundle = random_bundle(&mut r, n, true);
        let (gt, cs) = random_target(&mut r, n);
        let (best, m) = matched_loss(&bundle, &gt, &cs, &opts).unwrap();
        assert_eq!(best.total, total_loss(&bundle, &gt, &cs, &m, &opts).unwrap().total);
        for perm in permutations(n) {
            let other = total_loss(&bundle, &gt, &cs, &Matching { perm, cost: 0.0 }, &opts).unwrap();
            assert!(best.total <= other.total + 1e-9, "case {case}: {} > {}", best.total, other.total);
        }
    }
}

#[test]
fn loss_is_invariant_to_relabeling_predicted_rows() {
    let mut r = rng(12);
    let opts = LossOptions::default();
    for _ in 0..200 {
        let n = r.random_range(1..=6);
        let bundle = random_bundle(&mut r, n, false);
        let (gt, cs) = random_target(&mut r, n);
        let (base, m) = matched_loss(&bundle, &gt, &cs, &opts).unwrap();

        // Row k of the relabeled bundle is row order[k] of the original.
        let mut order: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut r);
        let mut pos = vec![0; n];
        for (k, &o) in order.iter().enumerate() {
            pos[o] = k;
        }
        let pick = |v: &Vec<Vec<f64>>| order.iter().map(|&o| v[o].clone()).collect::<Vec<_>>();
        let relabeled = PredictionBundle {
            type_probs: pick(&bundle.type_probs),
            param_probs: order.iter().map(|&o| bundle.param_probs[o].clone()).collect(),
            constr_flag_probs: pick(&bundle.constr_flag_probs),
            constraint_probs: bundle
                .constraint_probs
                .iter()
                .map(|p| PairProbs {
                    key: PairKey::new((pos[p.key.i], p.key.si), (pos[p.key.j], p.key.sj)),
                    probs: p.probs.clone(),
                })
                .collect(),
        };
        let perm: Vec<usize> = order.iter().map(|&o| m.perm[o]).collect();
        let moved = total_loss(&relabeled, &gt, &cs, &Matching { perm, cost: 0.0 }, &opts).unwrap();
        assert!((moved.total - base.total).abs() <= 1e-9 * base.total.max(1.0));
        let (again, _) = matched_loss(&relabeled, &gt, &cs, &opts).unwrap();
        assert!((again.token - base.token).abs() <= 1e-9 * base.token.max(1.0));
    }
}

#[test]
fn pair_feature_swap_invariance_on_ten_thousand_pairs() {
    let mut r = rng(13);
    for _ in 0..10_000 {
        let d = r.random_range(1..=32);
        let a: Vec<f64> = (0..d).map(|_| r.random_range(-1e3..1e3)).collect();
        let b: Vec<f64> = (0..d).map(|_| r.random_range(-1e3..1e3)).collect();
        assert_eq!(pair_feature(&a, &b).unwrap(), pair_feature(&b, &a).unwrap());
    }
}

#[test]
fn every_corpus_constraint_lies_in_the_valid_set() {
    for seed in 0..500 {
        let s = generate_synthetic(seed, 1 + seed as usize % 16);
        let types: Vec<u8> = tokenize(&s).unwrap().rows.iter().map(|r| r[0]).collect();
        let valid = valid_pairs(&types);
        for c in &s.constraints {
            assert!(valid.contains(&PairKey::of(c)), "seed {seed}: {c:?}");
        }
    }
}

#[test]
fn valid_set_counts_for_uniform_types() {
    // Arcs use all four subreferences, so every slot pair including the diagonal is valid.
    for n in 1..=16 {
        let m = 4 * n;
        assert_eq!(valid_pairs(&vec![1; n]).len(), m * (m + 1) / 2);
    }
    // Points keep a single slot.
    assert_eq!(valid_pairs(&[4; 16]).len(), 16 * 17 / 2);
}

proptest! {
    #[test]
    fn pair_feature_is_symmetric(v in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..64)) {
        let (a, b): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        prop_assert_eq!(pair_feature(&a, &b).unwrap(), pair_feature(&b, &a).unwrap());
    }
}
