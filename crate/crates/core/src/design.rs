//! Two-type pooling designs: assembly from plane matrices and file I/O.
//!
//! A design is a triple of incidence matrices (M_A, M_B, M_AB) over a common
//! item set. The geometric construction stacks plane matrices of AG(3, q):
//! each item is tested |K_A| times against A, |K_B| times against B and
//! |K_AB| times against AB, where the AB plane set must be disjoint from
//! each individual set (the same pool cannot serve as both an A test and an
//! AB test).

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::plane_incidence;
use crate::matrix::IncidenceMatrix;

/// Plane-set provenance of a geometrically constructed design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneProvenance {
    pub q: u32,
    pub k_a: Vec<u32>,
    pub k_b: Vec<u32>,
    pub k_ab: Vec<u32>,
}

/// A two-type pooling design.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingDesign {
    m_a: IncidenceMatrix,
    m_b: IncidenceMatrix,
    m_ab: IncidenceMatrix,
    provenance: Option<PlaneProvenance>,
}

impl PoolingDesign {
    /// Wraps three matrices over a common item set. Imported designs carry
    /// no plane provenance, so provenance-dependent validation is skipped.
    pub fn new(
        m_a: IncidenceMatrix,
        m_b: IncidenceMatrix,
        m_ab: IncidenceMatrix,
    ) -> Result<Self> {
        if m_a.n_cols() != m_b.n_cols() || m_a.n_cols() != m_ab.n_cols() {
            return Err(Error::DimensionMismatch(format!(
                "matrices cover {} / {} / {} items",
                m_a.n_cols(),
                m_b.n_cols(),
                m_ab.n_cols()
            )));
        }
        Ok(Self {
            m_a,
            m_b,
            m_ab,
            provenance: None,
        })
    }

    pub fn m_a(&self) -> &IncidenceMatrix {
        &self.m_a
    }

    pub fn m_b(&self) -> &IncidenceMatrix {
        &self.m_b
    }

    pub fn m_ab(&self) -> &IncidenceMatrix {
        &self.m_ab
    }

    pub fn provenance(&self) -> Option<&PlaneProvenance> {
        self.provenance.as_ref()
    }

    pub fn n_items(&self) -> usize {
        self.m_a.n_cols()
    }

    pub fn n_pools(&self) -> usize {
        self.m_a.n_rows() + self.m_b.n_rows() + self.m_ab.n_rows()
    }

    /// The stacked matrix [M_A; M_AB]: all pools that react to an A defect.
    pub fn stacked_a(&self) -> Result<IncidenceMatrix> {
        IncidenceMatrix::vstack(&[&self.m_a, &self.m_ab])
    }

    /// The stacked matrix [M_B; M_AB].
    pub fn stacked_b(&self) -> Result<IncidenceMatrix> {
        IncidenceMatrix::vstack(&[&self.m_b, &self.m_ab])
    }

    /// The design with items relabeled: item `perm[c]` of the result is item
    /// `c` of `self`. Provenance is preserved (the plane sets are unchanged).
    pub fn permute_items(&self, perm: &[u32]) -> Result<Self> {
        Ok(Self {
            m_a: self.m_a.permute_columns(perm)?,
            m_b: self.m_b.permute_columns(perm)?,
            m_ab: self.m_ab.permute_columns(perm)?,
            provenance: self.provenance.clone(),
        })
    }

    /// Writes the design file format: `#A`, `#B`, `#AB` headers, each
    /// followed by one matrix block in the textual matrix format.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "#A")?;
        self.m_a.write_text(w)?;
        writeln!(w, "#B")?;
        self.m_b.write_text(w)?;
        writeln!(w, "#AB")?;
        self.m_ab.write_text(w)?;
        Ok(())
    }

    pub fn read_text<B: BufRead>(r: &mut B) -> Result<Self> {
        fn expect_header<I>(lines: &mut I, tag: &str) -> Result<()>
        where
            I: Iterator<Item = (usize, std::io::Result<String>)>,
        {
            for (i, line) in lines.by_ref() {
                let line = line?;
                let t = line.trim();
                if t.is_empty() {
                    continue;
                }
                if t == tag {
                    return Ok(());
                }
                return Err(Error::parse(i + 1, format!("expected {tag:?}, found {t:?}")));
            }
            Err(Error::parse(0, format!("missing {tag:?} section")))
        }
        let mut lines = r.lines().enumerate();
        expect_header(&mut lines, "#A")?;
        let m_a = IncidenceMatrix::parse_block(&mut lines)?;
        expect_header(&mut lines, "#B")?;
        let m_b = IncidenceMatrix::parse_block(&mut lines)?;
        expect_header(&mut lines, "#AB")?;
        let m_ab = IncidenceMatrix::parse_block(&mut lines)?;
        Self::new(m_a, m_b, m_ab)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_text(&mut f)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_text(&mut f)
    }
}

/// Normalizes a plane-index set: sorted ascending, duplicates removed,
/// every index below q, nonempty.
fn check_planes(q: u32, planes: &[u32]) -> Result<Vec<u32>> {
    let mut k = planes.to_vec();
    k.sort_unstable();
    k.dedup();
    if k.is_empty() {
        return Err(Error::EmptyPlaneSet);
    }
    if let Some(&i) = k.last() {
        if i >= q {
            return Err(Error::PlaneIndexOutOfRange { index: i, q });
        }
    }
    Ok(k)
}

/// Stacks the plane matrices M_i for i in `planes` (ascending) into a
/// |K|q² × q⁴ matrix. Every column then has weight |K|, which makes the
/// stack (|K|−1)-disjunct.
pub fn stack_planes(q: u32, planes: &[u32]) -> Result<IncidenceMatrix> {
    let k = check_planes(q, planes)?;
    let parts: Vec<IncidenceMatrix> = k
        .iter()
        .map(|&i| plane_incidence(q, i))
        .collect::<Result<_>>()?;
    let refs: Vec<&IncidenceMatrix> = parts.iter().collect();
    IncidenceMatrix::vstack(&refs)
}

/// Builds the design (M_A, M_B, M_AB) from plane sets. K_A and K_B may
/// overlap each other, but each must be disjoint from K_AB. An empty K_AB is
/// allowed (no combined tests) and yields a 0-row M_AB.
pub fn build_design(q: u32, k_a: &[u32], k_b: &[u32], k_ab: &[u32]) -> Result<PoolingDesign> {
    let k_a = check_planes(q, k_a)?;
    let k_b = check_planes(q, k_b)?;
    let k_ab = if k_ab.is_empty() {
        Vec::new()
    } else {
        check_planes(q, k_ab)?
    };
    for &i in &k_ab {
        if k_a.contains(&i) {
            return Err(Error::OverlappingPlaneSets { family: 'A', index: i });
        }
        if k_b.contains(&i) {
            return Err(Error::OverlappingPlaneSets { family: 'B', index: i });
        }
    }
    let n = (q as usize).pow(4);
    let m_a = stack_planes(q, &k_a)?;
    let m_b = stack_planes(q, &k_b)?;
    let m_ab = if k_ab.is_empty() {
        IncidenceMatrix::zero(0, n)
    } else {
        stack_planes(q, &k_ab)?
    };
    let mut design = PoolingDesign::new(m_a, m_b, m_ab)?;
    design.provenance = Some(PlaneProvenance { q, k_a, k_b, k_ab });
    Ok(design)
}

/// The paper-style design family for a given q: K_A = K_B = {0, …, k−1},
/// K_AB = {k, …, q−1}.
pub fn split_design(q: u32, k: u32) -> Result<PoolingDesign> {
    if k == 0 || k > q {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must be in 1..={q}"
        )));
    }
    let ka: Vec<u32> = (0..k).collect();
    let kab: Vec<u32> = (k..q).collect();
    build_design(q, &ka, &ka, &kab)
}
