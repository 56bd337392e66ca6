//! Eight-token-per-primitive encoding.
//!
//! Row layout: `[type, p1, p2, p3, p4, p5, p6, construction]` with type in
//! 1..=5 (5 = no primitive), parameters quantized to 64 bins (1..=64) and
//! unused parameter slots set to [`PAD_TOKEN`].

use serde::{Deserialize, Serialize};

use crate::SketchError;

use super::{Primitive, PrimitiveKind, SketchGraph, MAX_PRIMITIVES};

pub const N_BINS: u8 = 64;
pub const PAD_TOKEN: u8 = 1;
pub const NO_PRIMITIVE: u8 = 5;

pub type TokenRow = [u8; 8];

/// Map `x ∈ [0, 1]` to its bin in 1..=64. Values outside are clamped.
pub fn quantize(x: f64) -> u8 {
    let clamped = if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
    if clamped != x {
        log::warn!("quantize: {x} outside [0, 1], clamped");
    }
    ((clamped * N_BINS as f64).floor() as u8 + 1).min(N_BINS)
}

/// Bin center of token `b`.
pub fn dequantize(b: u8) -> f64 {
    (b as f64 - 0.5) / N_BINS as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub rows: Vec<TokenRow>,
}

impl TokenSequence {
    pub const EMPTY_ROW: TokenRow = [NO_PRIMITIVE, 1, 1, 1, 1, 1, 1, 0];

    pub fn empty() -> Self {
        Self {
            rows: vec![Self::EMPTY_ROW; MAX_PRIMITIVES],
        }
    }

    /// Number of parameter tokens in use for a row, from its type token.
    pub fn used_params(row: &TokenRow) -> usize {
        PrimitiveKind::from_token(row[0]).map_or(0, |k| k.param_count())
    }

    pub fn non_empty(&self) -> impl Iterator<Item = (usize, &TokenRow)> {
        self.rows.iter().enumerate().filter(|(_, r)| r[0] != NO_PRIMITIVE)
    }
}

fn encode_row(p: &Primitive) -> Result<TokenRow, SketchError> {
    let n = p.kind.param_count();
    if p.params.len() != n {
        return Err(SketchError::ParamCount {
            kind: p.kind,
            got: p.params.len(),
        });
    }
    let mut row = [PAD_TOKEN; 8];
    row[0] = p.kind.token();
    for (slot, &v) in row[1..=n].iter_mut().zip(&p.params) {
        *slot = quantize(v);
    }
    row[7] = p.construction as u8;
    Ok(row)
}

pub fn tokenize(sketch: &SketchGraph) -> Result<TokenSequence, SketchError> {
    if sketch.primitives.len() > MAX_PRIMITIVES {
        return Err(SketchError::TooManyPrimitives(sketch.primitives.len()));
    }
    let mut seq = TokenSequence::empty();
    for (row, p) in seq.rows.iter_mut().zip(&sketch.primitives) {
        *row = encode_row(p)?;
    }
    Ok(seq)
}

/// Rebuild primitives from tokens; constraints are not part of the encoding.
pub fn detokenize(tokens: &TokenSequence) -> Result<SketchGraph, SketchError> {
    if tokens.rows.len() != MAX_PRIMITIVES {
        return Err(SketchError::RowCount(tokens.rows.len()));
    }
    let mut primitives = Vec::new();
    for (r, row) in tokens.rows.iter().enumerate() {
        let bad = |detail: &str| SketchError::BadToken {
            row: r,
            detail: detail.to_string(),
        };
        if row[1..7].iter().any(|&t| !(1..=N_BINS).contains(&t)) {
            return Err(bad("parameter token outside 1..=64"));
        }
        if row[7] > 1 {
            return Err(bad("construction flag must be 0 or 1"));
        }
        if row[0] == NO_PRIMITIVE {
            if row[1..7].iter().any(|&t| t != PAD_TOKEN) || row[7] != 0 {
                return Err(bad("no-primitive row carries non-pad tokens"));
            }
            continue;
        }
        let kind = PrimitiveKind::from_token(row[0]).ok_or_else(|| bad("type token outside 1..=5"))?;
        let params = row[1..=kind.param_count()].iter().map(|&b| dequantize(b)).collect();
        primitives.push(Primitive::new(kind, params).with_construction(row[7] == 1));
    }
    Ok(SketchGraph::new(primitives))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;
    use proptest::prelude::*;

    #[test]
    fn boundary_bins() {
        assert_eq!(quantize(0.0), 1);
        assert_eq!(quantize(1.0), 64);
        assert_eq!(quantize(-0.5), 1);
        assert_eq!(quantize(0.5), 33);
        assert_eq!(dequantize(32), 0.4921875);
    }

    #[test]
    fn point_row() {
        let s = SketchGraph::new(vec![Primitive::point(Point2::new(0.5, 0.5))]);
        let t = tokenize(&s).unwrap();
        assert_eq!(t.rows[0], [4, 33, 33, 1, 1, 1, 1, 0]);
        assert!(t.rows[1..].iter().all(|r| *r == TokenSequence::EMPTY_ROW));
    }

    #[test]
    fn empty_sketch_is_all_pad() {
        let t = tokenize(&SketchGraph::default()).unwrap();
        assert_eq!(t.rows, vec![[5, 1, 1, 1, 1, 1, 1, 0]; 16]);
        assert!(detokenize(&t).unwrap().primitives.is_empty());
    }

    #[test]
    fn detokenize_rejects_bad_rows() {
        let mut t = TokenSequence::empty();
        t.rows[3] = [5, 2, 1, 1, 1, 1, 1, 0];
        assert!(matches!(detokenize(&t), Err(SketchError::BadToken { row: 3, .. })));
        let mut t = TokenSequence::empty();
        t.rows[0] = [3, 0, 1, 1, 1, 1, 1, 0];
        assert!(detokenize(&t).is_err());
        let mut t = TokenSequence::empty();
        t.rows[0] = [6, 1, 1, 1, 1, 1, 1, 0];
        assert!(detokenize(&t).is_err());
        let mut t = TokenSequence::empty();
        t.rows.pop();
        assert!(matches!(detokenize(&t), Err(SketchError::RowCount(15))));
    }

    #[test]
    fn detokenize_ignores_unused_slots() {
        let mut t = TokenSequence::empty();
        t.rows[0] = [4, 10, 20, 64, 64, 64, 64, 1];
        let s = detokenize(&t).unwrap();
        assert_eq!(s.primitives[0].params, vec![dequantize(10), dequantize(20)]);
        assert!(s.primitives[0].construction);
    }

    proptest! {
        #[test]
        fn half_bin_bound(x in 0.0f64..=1.0) {
            prop_assert!((dequantize(quantize(x)) - x).abs() <= 1.0 / 128.0);
        }

        #[test]
        fn monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(quantize(lo) <= quantize(hi));
        }
    }
}
