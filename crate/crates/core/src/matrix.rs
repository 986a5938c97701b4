//! Sparse binary pools×items incidence matrices.
//!
//! Rows are pools, columns are items. Both orientations are kept: per-row
//! column lists and per-column row lists (the column list is the *support*
//! of that item). The two views are maintained together and stay consistent.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A binary incidence matrix stored sparsely in both orientations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
}

impl IncidenceMatrix {
    /// An all-zero matrix of the given shape.
    pub fn zero(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            rows: vec![Vec::new(); n_rows],
            cols: vec![Vec::new(); n_cols],
        }
    }

    /// Builds a matrix from per-row column lists. Column indices are sorted
    /// and de-duplicated; out-of-range indices are an error.
    pub fn from_rows(n_cols: usize, row_lists: Vec<Vec<u32>>) -> Result<Self> {
        let n_rows = row_lists.len();
        let mut rows = row_lists;
        let mut cols = vec![Vec::new(); n_cols];
        for (r, list) in rows.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(&c) = list.last() {
                if c as usize >= n_cols {
                    return Err(Error::DimensionMismatch(format!(
                        "row {r} references column {c}, but the matrix has {n_cols} columns"
                    )));
                }
            }
            for &c in list.iter() {
                cols[c as usize].push(r as u32);
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            rows,
            cols,
        })
    }

    /// Builds a matrix from a dense row-major 0/1 buffer.
    pub fn from_dense(n_rows: usize, n_cols: usize, data: &[u8]) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "dense data has {} entries, expected {}",
                data.len(),
                n_rows * n_cols
            )));
        }
        let rows = (0..n_rows)
            .map(|r| {
                (0..n_cols)
                    .filter(|&c| data[r * n_cols + c] != 0)
                    .map(|c| c as u32)
                    .collect()
            })
            .collect();
        Self::from_rows(n_cols, rows)
    }

    /// Vertically concatenates matrices that share a column count.
    pub fn vstack(parts: &[&IncidenceMatrix]) -> Result<Self> {
        let n_cols = match parts.first() {
            Some(m) => m.n_cols,
            None => return Err(Error::DimensionMismatch("vstack of no matrices".into())),
        };
        let mut rows = Vec::new();
        for m in parts {
            if m.n_cols != n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "vstack parts have {} and {} columns",
                    n_cols, m.n_cols
                )));
            }
            rows.extend(m.rows.iter().cloned());
        }
        Self::from_rows(n_cols, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Column indices with a 1 in row `r`, ascending.
    pub fn row_support(&self, r: usize) -> &[u32] {
        &self.rows[r]
    }

    /// Row indices with a 1 in column `c`, ascending (the support of item `c`).
    pub fn col_support(&self, c: usize) -> &[u32] {
        &self.cols[c]
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.rows[r].len()
    }

    pub fn col_weight(&self, c: usize) -> usize {
        self.cols[c].len()
    }

    pub fn entry(&self, r: usize, c: usize) -> bool {
        self.rows[r].binary_search(&(c as u32)).is_ok()
    }

    /// Total number of 1-entries.
    pub fn n_entries(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// The matrix with columns permuted: column `perm[c]` of the result is
    /// column `c` of `self`. `perm` must be a permutation of `0..n_cols`.
    pub fn permute_columns(&self, perm: &[u32]) -> Result<Self> {
        if perm.len() != self.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "permutation has {} entries for {} columns",
                perm.len(),
                self.n_cols
            )));
        }
        let mut seen = vec![false; self.n_cols];
        for &p in perm {
            if (p as usize) >= self.n_cols || seen[p as usize] {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            seen[p as usize] = true;
        }
        let rows = self
            .rows
            .iter()
            .map(|list| list.iter().map(|&c| perm[c as usize]).collect())
            .collect();
        Self::from_rows(self.n_cols, rows)
    }

    /// Writes the textual format: a `n_rows n_cols` header line, then one
    /// line of space-separated 0/1 tokens per row.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{} {}", self.n_rows, self.n_cols)?;
        let mut line = String::with_capacity(2 * self.n_cols);
        for r in 0..self.n_rows {
            line.clear();
            let mut support = self.rows[r].iter().copied().peekable();
            for c in 0..self.n_cols as u32 {
                if c > 0 {
                    line.push(' ');
                }
                if support.peek() == Some(&c) {
                    support.next();
                    line.push('1');
                } else {
                    line.push('0');
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("matrix text is ASCII")
    }

    /// Parses the textual format produced by [`write_text`](Self::write_text).
    pub fn read_text<B: BufRead>(r: &mut B) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        Self::parse_block(&mut lines)
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        Self::read_text(&mut text.as_bytes())
    }

    /// Parses one matrix block from a line iterator, skipping leading blank
    /// lines. Used directly by the design-file parser, which interleaves
    /// blocks with `#A`/`#B`/`#AB` headers.
    pub(crate) fn parse_block<I>(lines: &mut I) -> Result<Self>
    where
        I: Iterator<Item = (usize, std::io::Result<String>)>,
    {
        let (line_no, header) = loop {
            match lines.next() {
                Some((i, line)) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break (i + 1, line);
                    }
                }
                None => return Err(Error::parse(0, "missing matrix header line")),
            }
        };
        let mut dims = header.split_whitespace();
        let n_rows: usize = dims
            .next()
            .ok_or_else(|| Error::parse(line_no, "empty header line"))?
            .parse()
            .map_err(|_| Error::parse(line_no, "header row count is not an integer"))?;
        let n_cols: usize = dims
            .next()
            .ok_or_else(|| Error::parse(line_no, "header is missing the column count"))?
            .parse()
            .map_err(|_| Error::parse(line_no, "header column count is not an integer"))?;
        if dims.next().is_some() {
            return Err(Error::parse(line_no, "header has trailing tokens"));
        }

        let mut rows = Vec::with_capacity(n_rows);
        while rows.len() < n_rows {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::parse(line_no, format!("expected {n_rows} rows")))?;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut support = Vec::new();
            let mut count = 0usize;
            for tok in line.split_whitespace() {
                match tok {
                    "0" => {}
                    "1" => support.push(count as u32),
                    other => {
                        return Err(Error::parse(
                            i + 1,
                            format!("expected a 0/1 token, found {other:?}"),
                        ))
                    }
                }
                count += 1;
            }
            if count != n_cols {
                return Err(Error::parse(
                    i + 1,
                    format!("row has {count} entries, expected {n_cols}"),
                ));
            }
            rows.push(support);
        }
        Self::from_rows(n_cols, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn from_rows_maintains_both_views() {
        let m = IncidenceMatrix::from_rows(4, vec![vec![2, 0], vec![1], vec![]]).unwrap();
        assert_eq!(m.row_support(0), &[0, 2]);
        assert_eq!(m.col_support(0), &[0]);
        assert_eq!(m.col_support(2), &[0]);
        assert_eq!(m.col_support(3), &[] as &[u32]);
        assert!(m.entry(0, 2));
        assert!(!m.entry(2, 0));
    }

    #[test]
    fn from_rows_rejects_out_of_range() {
        let err = IncidenceMatrix::from_rows(2, vec![vec![2]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn vstack_concatenates_rows() {
        let a = IncidenceMatrix::from_rows(3, vec![vec![0]]).unwrap();
        let b = IncidenceMatrix::from_rows(3, vec![vec![1], vec![2]]).unwrap();
        let s = IncidenceMatrix::vstack(&[&a, &b]).unwrap();
        assert_eq!(s.n_rows(), 3);
        assert_eq!(s.col_support(1), &[1]);
        assert_eq!(s.col_support(2), &[2]);
    }

    #[test]
    fn text_round_trip() {
        let m = IncidenceMatrix::from_rows(4, vec![vec![0, 3], vec![1, 2]]).unwrap();
        let text = m.to_text();
        assert_eq!(text, "2 4\n1 0 0 1\n0 1 1 0\n");
        let back = IncidenceMatrix::parse_text(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn non_binary_token_rejected() {
        let err = IncidenceMatrix::parse_text("1 2\n0 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn wrong_row_length_rejected() {
        let err = IncidenceMatrix::parse_text("1 3\n0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn permute_columns_moves_supports() {
        let m = IncidenceMatrix::from_rows(3, vec![vec![0], vec![1, 2]]).unwrap();
        let p = m.permute_columns(&[2, 0, 1]).unwrap();
        assert_eq!(p.row_support(0), &[2]);
        assert_eq!(p.row_support(1), &[0, 1]);
        assert!(m.permute_columns(&[0, 0, 1]).is_err());
    }

    prop_compose! {
        fn arb_matrix()(n_cols in 1usize..8, n_rows in 0usize..8)
            (n_cols in Just(n_cols),
             rows in prop::collection::vec(
                 prop::collection::vec(0u32..n_cols as u32, 0..=n_cols),
                 0..=n_rows))
            -> IncidenceMatrix
        {
            IncidenceMatrix::from_rows(n_cols, rows).unwrap()
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(m in arb_matrix()) {
            let back = IncidenceMatrix::parse_text(&m.to_text()).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn views_are_transposes(m in arb_matrix()) {
            for r in 0..m.n_rows() {
                for &c in m.row_support(r) {
                    prop_assert!(m.col_support(c as usize).contains(&(r as u32)));
                }
            }
            for c in 0..m.n_cols() {
                for &r in m.col_support(c) {
                    prop_assert!(m.row_support(r as usize).contains(&(c as u32)));
                }
            }
            let total: usize = (0..m.n_cols()).map(|c| m.col_weight(c)).sum();
            prop_assert_eq!(total, m.n_entries());
        }
    }
}
