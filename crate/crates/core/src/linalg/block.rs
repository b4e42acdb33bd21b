use nalgebra::DMatrix;

use super::CsrMatrix;

/// One diagonal block of a [`BlockDiagonal`] matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum DiagBlock {
    Dense(DMatrix<f64>),
    Identity(usize),
    Zero(usize),
}

impl DiagBlock {
    pub fn dim(&self) -> usize {
        match self {
            DiagBlock::Dense(m) => m.nrows(),
            DiagBlock::Identity(k) | DiagBlock::Zero(k) => *k,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            DiagBlock::Dense(m) => m.clone(),
            DiagBlock::Identity(k) => DMatrix::identity(*k, *k),
            DiagBlock::Zero(k) => DMatrix::zeros(*k, *k),
        }
    }

    fn transpose(&self) -> DiagBlock {
        match self {
            DiagBlock::Dense(m) => DiagBlock::Dense(m.transpose()),
            other => other.clone(),
        }
    }
}

/// Square block-diagonal matrix with square diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    blocks: Vec<DiagBlock>,
    offsets: Vec<usize>,
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<DiagBlock>) -> Self {
        for b in &blocks {
            if let DiagBlock::Dense(m) = b {
                assert!(m.is_square(), "diagonal blocks must be square");
            }
        }
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for b in &blocks {
            offsets.push(offsets.last().unwrap() + b.dim());
        }
        Self { blocks, offsets }
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn blocks(&self) -> &[DiagBlock] {
        &self.blocks
    }

    /// Start offsets of the blocks, with the total dimension appended.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// True when both matrices split the index range identically.
    pub fn same_partition(&self, other: &BlockDiagonal) -> bool {
        self.offsets == other.offsets
    }

    pub fn transpose(&self) -> BlockDiagonal {
        BlockDiagonal {
            blocks: self.blocks.iter().map(DiagBlock::transpose).collect(),
            offsets: self.offsets.clone(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (b, &off) in self.blocks.iter().zip(&self.offsets) {
            let k = b.dim();
            m.view_mut((off, off), (k, k)).copy_from(&b.to_dense());
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let mut y = vec![0.0; x.len()];
        for (b, &off) in self.blocks.iter().zip(&self.offsets) {
            let k = b.dim();
            match b {
                DiagBlock::Identity(_) => y[off..off + k].copy_from_slice(&x[off..off + k]),
                DiagBlock::Zero(_) => {}
                DiagBlock::Dense(m) => {
                    for i in 0..k {
                        let mut acc = 0.0;
                        for j in 0..k {
                            acc += m[(i, j)] * x[off + j];
                        }
                        y[off + i] = acc;
                    }
                }
            }
        }
        y
    }

    /// Structural CSR copy; dense blocks keep their zero entries.
    pub fn to_csr(&self) -> CsrMatrix {
        let mut triplets = Vec::new();
        for (b, &off) in self.blocks.iter().zip(&self.offsets) {
            match b {
                DiagBlock::Identity(k) => triplets.extend((0..*k).map(|i| (off + i, off + i, 1.0))),
                DiagBlock::Zero(_) => {}
                DiagBlock::Dense(m) => {
                    for i in 0..m.nrows() {
                        for j in 0..m.ncols() {
                            triplets.push((off + i, off + j, m[(i, j)]));
                        }
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.dim(), self.dim(), triplets)
    }

    /// `self * rhs` for a sparse `rhs` with as many rows as `self` has columns.
    ///
    /// Each output row of a dense block is a combination of the rows of `rhs`
    /// in that block; the result keeps the union of those rows' patterns.
    pub fn left_mul_csr(&self, rhs: &CsrMatrix) -> CsrMatrix {
        assert_eq!(rhs.nrows(), self.dim());
        let ncols = rhs.ncols();
        let mut acc = vec![0.0f64; ncols];
        let mut marked = vec![false; ncols];
        let mut used: Vec<usize> = Vec::new();

        let mut row_offsets = Vec::with_capacity(rhs.nrows() + 1);
        let mut col_indices = Vec::with_capacity(rhs.nnz());
        let mut values = Vec::with_capacity(rhs.nnz());
        row_offsets.push(0);
        for (b, &off) in self.blocks.iter().zip(&self.offsets) {
            let k = b.dim();
            match b {
                DiagBlock::Identity(_) => {
                    for i in off..off + k {
                        for (j, v) in rhs.row(i) {
                            col_indices.push(j);
                            values.push(v);
                        }
                        row_offsets.push(col_indices.len());
                    }
                }
                DiagBlock::Zero(_) => {
                    for _ in 0..k {
                        row_offsets.push(col_indices.len());
                    }
                }
                DiagBlock::Dense(m) => {
                    used.clear();
                    for r in off..off + k {
                        for (j, _) in rhs.row(r) {
                            if !marked[j] {
                                marked[j] = true;
                                used.push(j);
                            }
                        }
                    }
                    used.sort_unstable();
                    for i in 0..k {
                        for r in 0..k {
                            let c = m[(i, r)];
                            if c == 0.0 {
                                continue;
                            }
                            for (j, v) in rhs.row(off + r) {
                                acc[j] += c * v;
                            }
                        }
                        for &j in &used {
                            col_indices.push(j);
                            values.push(acc[j]);
                            acc[j] = 0.0;
                        }
                        row_offsets.push(col_indices.len());
                    }
                    for &j in &used {
                        marked[j] = false;
                    }
                }
            }
        }
        CsrMatrix::from_raw(self.dim(), ncols, row_offsets, col_indices, values)
            .expect("block product keeps CSR invariants")
    }
}
