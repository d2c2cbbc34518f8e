//! Piecewise-linear convex envelopes: a finite max of affine functions.

use super::{dot, GeometryError, PolyhedralDomain, Tolerance};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// One affine piece `x -> gradient . x + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    #[serde(rename = "a")]
    pub gradient: Vec<f64>,
    #[serde(rename = "b")]
    pub offset: f64,
}

impl AffinePiece {
    pub fn new(gradient: Vec<f64>, offset: f64) -> Result<Self, GeometryError> {
        if gradient.iter().any(|g| !g.is_finite()) || !offset.is_finite() {
            return Err(GeometryError::InvalidInput(
                "affine piece must have finite entries".into(),
            ));
        }
        Ok(AffinePiece { gradient, offset })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.gradient, x) + self.offset
    }
}

/// The convex estimator: `phi(x) = max_k (a_k . x + b_k)`.
///
/// Convex on all of `R^d` by construction. Built by [`super::lower_hull`]
/// from sampled values, in which case `phi` is the largest convex function
/// dominated by the samples on their support.
#[derive(Debug, Clone)]
pub struct ConvexEnvelope {
    pieces: Vec<AffinePiece>,
    domain: PolyhedralDomain,
    support: Vec<Vec<f64>>,
}

impl ConvexEnvelope {
    /// Envelope from explicit pieces. `support` records the points it was
    /// built from (the grid or sample sites); it may be empty for envelopes
    /// assembled by hand or read back from disk.
    pub fn new(
        pieces: Vec<AffinePiece>,
        domain: PolyhedralDomain,
        support: Vec<Vec<f64>>,
    ) -> Result<Self, GeometryError> {
        if pieces.is_empty() {
            return Err(GeometryError::InvalidInput(
                "an envelope needs at least one piece".into(),
            ));
        }
        let dim = domain.dim();
        if pieces.iter().any(|p| p.gradient.len() != dim) {
            return Err(GeometryError::InvalidInput(format!(
                "piece gradient dimension differs from domain dimension {dim}"
            )));
        }
        Ok(ConvexEnvelope {
            pieces,
            domain,
            support,
        })
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn domain(&self) -> &PolyhedralDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// The grid / sample sites the envelope was built from.
    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    /// Max over pieces at `x`. With `extend = false`, `x` must lie in the
    /// domain (within the default tolerance); with `extend = true` the same
    /// max-of-planes formula applies anywhere, staying globally convex. The
    /// extension is how a fitted surface is continued past the hull of its
    /// support onto a larger rectangle.
    pub fn evaluate(&self, x: &[f64], extend: bool) -> Result<f64, GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::InvalidInput(format!(
                "point dimension {} does not match domain dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if !extend && !self.domain.contains(x, Tolerance::default()) {
            return Err(GeometryError::OutOfDomain { point: x.to_vec() });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Max over pieces with no domain check.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The same max of planes declared on a larger domain, e.g. continuing a
    /// surface fitted on the hull of scattered sites onto a rectangle.
    pub fn extend_to(&self, domain: PolyhedralDomain) -> Result<Self, GeometryError> {
        if domain.dim() != self.dim() {
            return Err(GeometryError::InvalidInput(format!(
                "extension domain dimension {} does not match envelope dimension {}",
                domain.dim(),
                self.dim()
            )));
        }
        Ok(ConvexEnvelope {
            pieces: self.pieces.clone(),
            domain,
            support: self.support.clone(),
        })
    }

    /// Serialize to the fixed JSON schema:
    /// `{"dim": d, "pieces": [{"a": [...], "b": ...}], "domain": {"vertices": [...]}}`
    /// with floats written to 17 significant digits, so parsing the output
    /// recovers every f64 bit-exactly.
    pub fn to_json(&self) -> String {
        envelope_json(self, None)
    }

    /// Read an envelope back from [`ConvexEnvelope::to_json`] output.
    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let parsed: EnvelopeJson = serde_json::from_str(text)
            .map_err(|e| GeometryError::InvalidInput(format!("envelope JSON: {e}")))?;
        parsed.into_envelope()
    }
}

#[derive(Deserialize)]
pub(crate) struct EnvelopeJson {
    pub dim: usize,
    pub pieces: Vec<AffinePiece>,
    pub domain: DomainJson,
    #[serde(default)]
    pub shape: Option<String>,
}

#[derive(Deserialize)]
pub(crate) struct DomainJson {
    pub vertices: Vec<Vec<f64>>,
}

impl EnvelopeJson {
    pub(crate) fn into_envelope(self) -> Result<ConvexEnvelope, GeometryError> {
        if self.pieces.iter().any(|p| p.gradient.len() != self.dim) {
            return Err(GeometryError::InvalidInput(
                "piece dimension differs from declared dim".into(),
            ));
        }
        let domain = PolyhedralDomain::from_vertices(self.domain.vertices)?;
        ConvexEnvelope::new(self.pieces, domain, Vec::new())
    }
}

/// Render the fixed-field-order envelope JSON. `shape` is appended after the
/// schema fields when the envelope represents the negated (concave) problem.
pub(crate) fn envelope_json(env: &ConvexEnvelope, shape: Option<&str>) -> String {
    let mut out = Vec::with_capacity(64 * env.pieces.len() + 128);
    write!(out, "{{\"dim\":{},\"pieces\":[", env.dim()).unwrap();
    for (i, piece) in env.pieces.iter().enumerate() {
        if i > 0 {
            out.push(b',');
        }
        out.extend_from_slice(b"{\"a\":[");
        write_floats(&mut out, &piece.gradient);
        out.extend_from_slice(b"],\"b\":");
        write_float(&mut out, piece.offset);
        out.push(b'}');
    }
    out.extend_from_slice(b"],\"domain\":{\"vertices\":[");
    for (i, v) in env.domain.vertices().iter().enumerate() {
        if i > 0 {
            out.push(b',');
        }
        out.push(b'[');
        write_floats(&mut out, v);
        out.push(b']');
    }
    out.extend_from_slice(b"]}");
    if let Some(s) = shape {
        write!(out, ",\"shape\":\"{s}\"").unwrap();
    }
    out.push(b'}');
    String::from_utf8(out).unwrap()
}

fn write_floats(out: &mut Vec<u8>, values: &[f64]) {
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            out.push(b',');
        }
        write_float(out, v);
    }
}

// 17 significant digits: enough to round-trip any f64 exactly.
fn write_float(out: &mut Vec<u8>, v: f64) {
    write!(out, "{:.16e}", v).unwrap();
}

#[cfg(test)]
mod tests {
    use super::super::make_box_domain;
    use super::*;

    fn interval() -> PolyhedralDomain {
        make_box_domain(&[0.0], &[1.0]).unwrap()
    }

    #[test]
    fn constant_piece() {
        let env = ConvexEnvelope::new(
            vec![AffinePiece::new(vec![0.0], 0.0).unwrap()],
            interval(),
            vec![],
        )
        .unwrap();
        assert_eq!(env.evaluate(&[0.3], false).unwrap(), 0.0);
    }

    #[test]
    fn max_of_two_lines() {
        let env = ConvexEnvelope::new(
            vec![
                AffinePiece::new(vec![-2.0], 1.0).unwrap(),
                AffinePiece::new(vec![2.0], -1.0).unwrap(),
            ],
            interval(),
            vec![],
        )
        .unwrap();
        assert_eq!(env.evaluate(&[0.0], false).unwrap(), 1.0);
    }

    #[test]
    fn out_of_domain_unless_extended() {
        let env = ConvexEnvelope::new(
            vec![AffinePiece::new(vec![1.0], 0.0).unwrap()],
            interval(),
            vec![],
        )
        .unwrap();
        assert!(matches!(
            env.evaluate(&[2.0], false),
            Err(GeometryError::OutOfDomain { .. })
        ));
        assert_eq!(env.evaluate(&[2.0], true).unwrap(), 2.0);
    }

    #[test]
    fn json_round_trip_bit_exact() {
        let env = ConvexEnvelope::new(
            vec![
                AffinePiece::new(vec![0.1, -0.3], 1.0 / 3.0).unwrap(),
                AffinePiece::new(vec![2.0f64.sqrt(), 0.0], -0.125).unwrap(),
            ],
            make_box_domain(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            vec![],
        )
        .unwrap();
        let text = env.to_json();
        assert!(text.starts_with("{\"dim\":2,\"pieces\":[{\"a\":["));
        let back = ConvexEnvelope::from_json(&text).unwrap();
        for (p, q) in env.pieces().iter().zip(back.pieces()) {
            assert_eq!(p.gradient, q.gradient);
            assert!(p.offset.to_bits() == q.offset.to_bits());
        }
        let x = [0.37, 0.91];
        assert_eq!(
            env.eval_unchecked(&x).to_bits(),
            back.eval_unchecked(&x).to_bits()
        );
    }

    #[test]
    fn non_finite_piece_rejected() {
        assert!(AffinePiece::new(vec![f64::NAN], 0.0).is_err());
        assert!(AffinePiece::new(vec![1.0], f64::INFINITY).is_err());
    }
}
