//! Boxes, embeddings and the similarity primitives shared by every stage.
//!
//! Boxes are stored center + size. The MOT file convention (left, top, w, h)
//! is handled in [`crate::io_mot`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Norm below which an embedding is considered the zero vector.
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-positive box size: w={w}, h={h}")]
    NonPositiveBox { w: f64, h: f64 },
    #[error("invalid state: scale={s}, aspect={r}")]
    InvalidState { s: f64, r: f64 },
    #[error("degenerate embedding (norm below {DEGENERATE_NORM})")]
    DegenerateEmbedding,
    #[error("embedding dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Axis-aligned box in center form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(u: f64, v: f64, w: f64, h: f64) -> Result<Self, GeometryError> {
        if !(w > 0.0 && h > 0.0) || !w.is_finite() || !h.is_finite() {
            return Err(GeometryError::NonPositiveBox { w, h });
        }
        Ok(Self { u, v, w, h })
    }

    /// Builds a box from the top-left corner convention used by MOT files.
    pub fn from_ltwh(left: f64, top: f64, w: f64, h: f64) -> Result<Self, GeometryError> {
        Self::new(left + w / 2.0, top + h / 2.0, w, h)
    }

    pub fn left(&self) -> f64 {
        self.u - self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.v - self.h / 2.0
    }

    pub fn right(&self) -> f64 {
        self.u + self.w / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.v + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.u, self.v)
    }

    /// `(u, v, s, r)` with `s = w·h` and `r = w/h`.
    pub fn to_xysr(&self) -> [f64; 4] {
        [self.u, self.v, self.w * self.h, self.w / self.h]
    }

    /// Inverse of [`BBox::to_xysr`]: `w = √(s·r)`, `h = √(s/r)`.
    pub fn from_xysr(u: f64, v: f64, s: f64, r: f64) -> Result<Self, GeometryError> {
        if !(s > 0.0 && r > 0.0) || !s.is_finite() || !r.is_finite() {
            return Err(GeometryError::InvalidState { s, r });
        }
        Ok(Self { u, v, w: (s * r).sqrt(), h: (s / r).sqrt() })
    }
}

/// Intersection over union. Zero-area intersections give exactly 0.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = a.right().min(b.right()) - a.left().max(b.left());
    let ih = a.bottom().min(b.bottom()) - a.top().max(b.top());
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Fixed-length appearance feature.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Embedding(pub Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Embedding) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_degenerate(&self) -> bool {
        self.norm() < DEGENERATE_NORM
    }

    /// Unit-length copy; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Embedding {
        let n = self.norm();
        if n < DEGENERATE_NORM {
            return self.clone();
        }
        Embedding(self.0.iter().map(|x| x / n).collect())
    }

    pub fn scaled(&self, k: f64) -> Embedding {
        Embedding(self.0.iter().map(|x| x * k).collect())
    }
}

impl From<Vec<f64>> for Embedding {
    fn from(v: Vec<f64>) -> Self {
        Embedding(v)
    }
}

/// `x1·x2 / (‖x1‖‖x2‖)`.
pub fn cosine_similarity(x1: &Embedding, x2: &Embedding) -> Result<f64, GeometryError> {
    if x1.dim() != x2.dim() {
        return Err(GeometryError::DimensionMismatch(x1.dim(), x2.dim()));
    }
    let n1 = x1.norm();
    let n2 = x2.norm();
    if n1 < DEGENERATE_NORM || n2 < DEGENERATE_NORM {
        return Err(GeometryError::DegenerateEmbedding);
    }
    Ok((x1.dot(x2) / (n1 * n2)).clamp(-1.0, 1.0))
}

/// Cosine similarity with the degenerate case mapped to 0.
pub fn cosine_or_zero(x1: &Embedding, x2: &Embedding) -> Result<f64, GeometryError> {
    match cosine_similarity(x1, x2) {
        Err(GeometryError::DegenerateEmbedding) => Ok(0.0),
        other => other,
    }
}

/// One detected box for a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame: u32,
    pub bbox: BBox,
    pub confidence: f64,
    pub embedding: Embedding,
}

impl Detection {
    pub fn new(frame: u32, bbox: BBox, confidence: f64, embedding: Embedding) -> Self {
        debug_assert!((0.0..=1.0).contains(&confidence));
        Self { frame, bbox, confidence, embedding }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(u: f64, v: f64, w: f64, h: f64) -> BBox {
        BBox::new(u, v, w, h).unwrap()
    }

    #[test]
    fn iou_examples() {
        let a = b(10.0, 10.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &b(100.0, 100.0, 10.0, 10.0)), 0.0);
        // intersection 5x10 = 50, union 150
        let half = iou(&a, &b(15.0, 10.0, 10.0, 10.0));
        assert!((half - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn touching_edges_have_zero_iou() {
        let a = b(5.0, 5.0, 10.0, 10.0);
        let c = b(15.0, 5.0, 10.0, 10.0);
        assert_eq!(iou(&a, &c), 0.0);
    }

    #[test]
    fn cosine_examples() {
        let e = Embedding::new(vec![1.0, 0.0, 0.0]);
        assert_eq!(cosine_similarity(&e, &e).unwrap(), 1.0);
        let x = Embedding::new(vec![1.0, 0.0]);
        let y = Embedding::new(vec![0.0, 1.0]);
        assert_eq!(cosine_similarity(&x, &y).unwrap(), 0.0);
        let d = Embedding::new(vec![1.0, 1.0]);
        assert!((cosine_similarity(&d, &x).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn cosine_errors() {
        let z = Embedding::zeros(3);
        let e = Embedding::new(vec![1.0, 0.0, 0.0]);
        assert_eq!(cosine_similarity(&z, &e), Err(GeometryError::DegenerateEmbedding));
        assert_eq!(cosine_or_zero(&z, &e), Ok(0.0));
        assert_eq!(
            cosine_similarity(&e, &Embedding::zeros(2)),
            Err(GeometryError::DimensionMismatch(3, 2))
        );
    }

    #[test]
    fn xysr_examples() {
        assert_eq!(b(0.0, 0.0, 10.0, 10.0).to_xysr(), [0.0, 0.0, 100.0, 1.0]);
        assert_eq!(b(0.0, 0.0, 20.0, 10.0).to_xysr(), [0.0, 0.0, 200.0, 2.0]);
        let orig = b(3.0, 4.0, 5.0, 6.0);
        let [u, v, s, r] = orig.to_xysr();
        let back = BBox::from_xysr(u, v, s, r).unwrap();
        assert!((back.w - 5.0).abs() < 1e-12 && (back.h - 6.0).abs() < 1e-12);
        assert!(matches!(BBox::from_xysr(0.0, 0.0, -1.0, 1.0), Err(GeometryError::InvalidState { .. })));
        assert!(matches!(BBox::from_xysr(0.0, 0.0, 1.0, 0.0), Err(GeometryError::InvalidState { .. })));
    }

    #[test]
    fn rejects_non_positive_boxes() {
        assert!(BBox::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BBox::new(0.0, 0.0, 1.0, -2.0).is_err());
    }

    fn arb_box() -> impl Strategy<Value = BBox> {
        (-500.0..500.0f64, -500.0..500.0f64, 0.5..300.0f64, 0.5..300.0f64)
            .prop_map(|(u, v, w, h)| BBox { u, v, w, h })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn xysr_round_trip(bx in arb_box()) {
            let [u, v, s, r] = bx.to_xysr();
            let back = BBox::from_xysr(u, v, s, r).unwrap();
            prop_assert!(((back.w - bx.w) / bx.w).abs() < 1e-9);
            prop_assert!(((back.h - bx.h) / bx.h).abs() < 1e-9);
            prop_assert_eq!(back.u, bx.u);
            prop_assert_eq!(back.v, bx.v);
        }
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(), c in arb_box()) {
            let x = iou(&a, &c);
            prop_assert_eq!(x, iou(&c, &a));
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn cosine_scale_behaviour(v in prop::collection::vec(-1.0..1.0f64, 1..16), k in 0.01..100.0f64) {
            let x = Embedding::new(v);
            prop_assume!(!x.is_degenerate());
            let unit = x.normalized();
            prop_assert!((cosine_similarity(&unit, &unit).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((cosine_similarity(&unit, &unit.scaled(k)).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((cosine_similarity(&unit, &unit.scaled(-k)).unwrap() + 1.0).abs() < 1e-12);
        }
    }
}
