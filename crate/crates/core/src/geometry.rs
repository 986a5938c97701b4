//! Transversal lines and plane incidence in the affine geometry AG(3, q).
//!
//! Points are triples (y0, y1, y2) over F_q. The planes P_i: y0 = i form a
//! parallel class of q planes with q² points each. The items of a pooling
//! design are the q⁴ lines transversal to that class — lines that meet every
//! plane in exactly one point — parameterized as
//!
//! ```text
//!     (a, b, c, d)  ↦  { (t, c + a·t, d + b·t) : t ∈ F_q }.
//! ```
//!
//! Any two distinct transversal lines share at most one point, which is what
//! makes the stacked pool matrices free of 4-cycles.

use crate::error::{Error, Result};
use crate::field::{is_prime, FieldElement};
use crate::matrix::IncidenceMatrix;

/// A point (y0, y1, y2) of AG(3, q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AffinePoint {
    pub y0: FieldElement,
    pub y1: FieldElement,
    pub y2: FieldElement,
}

/// A line transversal to the planes y0 = const, with slopes (a, b) and
/// intercepts (c, d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransversalLine {
    a: FieldElement,
    b: FieldElement,
    c: FieldElement,
    d: FieldElement,
}

impl TransversalLine {
    pub fn new(
        a: FieldElement,
        b: FieldElement,
        c: FieldElement,
        d: FieldElement,
    ) -> Result<Self> {
        let q = a.modulus();
        for e in [b, c, d] {
            if e.modulus() != q {
                return Err(Error::ModulusMismatch(q, e.modulus()));
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// The line with lexicographic index `index` in (a, b, c, d) order;
    /// the inverse of [`index`](Self::index). There are q⁴ lines.
    pub fn from_index(q: u32, index: usize) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let n = (q as usize).pow(4);
        if index >= n {
            return Err(Error::InvalidParameter(format!(
                "line index {index} out of range for q = {q} ({n} lines)"
            )));
        }
        let qu = q as usize;
        let digits = [
            index / (qu * qu * qu),
            index / (qu * qu) % qu,
            index / qu % qu,
            index % qu,
        ];
        let el = |v: usize| FieldElement::new(v as u32, q);
        Self::new(el(digits[0])?, el(digits[1])?, el(digits[2])?, el(digits[3])?)
    }

    /// Lexicographic index of (a, b, c, d).
    pub fn index(&self) -> usize {
        let q = self.a.modulus() as usize;
        ((self.a.value() as usize * q + self.b.value() as usize) * q
            + self.c.value() as usize)
            * q
            + self.d.value() as usize
    }

    /// The unique intersection with plane P_i, namely (i, c + a·i, d + b·i).
    pub fn point_on_plane(&self, plane: u32) -> Result<AffinePoint> {
        let q = self.a.modulus();
        if plane >= q {
            return Err(Error::PlaneIndexOutOfRange { index: plane, q });
        }
        let t = FieldElement::new(plane, q)?;
        Ok(AffinePoint {
            y0: t,
            y1: self.c.add(self.a.mul(t)?)?,
            y2: self.d.add(self.b.mul(t)?)?,
        })
    }

    /// All q points of the line, one per plane.
    pub fn points(&self) -> Vec<AffinePoint> {
        (0..self.a.modulus())
            .map(|i| self.point_on_plane(i).expect("plane index in range"))
            .collect()
    }
}

/// The q² × q⁴ incidence matrix of the points of plane P_i against all
/// transversal lines. Row (y1, y2) and column (a, b, c, d) orderings are
/// lexicographic, so the matrix is reproducible bit for bit.
///
/// Every row has weight q² and every column weight 1.
pub fn plane_incidence(q: u32, plane: u32) -> Result<IncidenceMatrix> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if plane >= q {
        return Err(Error::PlaneIndexOutOfRange { index: plane, q });
    }
    let qu = q as usize;
    let n_rows = qu * qu;
    let n_cols = n_rows * n_rows;
    let i = plane as u64;
    let qd = q as u64;
    let mut rows: Vec<Vec<u32>> = vec![Vec::with_capacity(n_rows); n_rows];
    for col in 0..n_cols {
        let a = (col / (qu * qu * qu)) as u64;
        let b = (col / (qu * qu) % qu) as u64;
        let c = (col / qu % qu) as u64;
        let d = (col % qu) as u64;
        let y1 = (c + a * i) % qd;
        let y2 = (d + b * i) % qd;
        let row = (y1 * qd + y2) as usize;
        rows[row].push(col as u32);
    }
    IncidenceMatrix::from_rows(n_cols, rows)
}
