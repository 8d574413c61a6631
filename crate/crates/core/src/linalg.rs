//! Compressed sparse column storage and a reusable sparse LU solver.

use std::fmt::Write as _;
use std::sync::Arc;

use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, LuRef, LuSymbolicParams, NumericLu, SymbolicLu};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, Mat};

use crate::error::SolveError;

/// Fixed structure of a square CSC matrix; rows sorted within each column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityPattern {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Builds the pattern from `(row, col)` pairs; duplicates are merged.
    pub fn from_entries(n: usize, mut keys: Vec<u64>) -> Self {
        keys.sort_unstable();
        keys.dedup();
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(keys.len());
        for &k in &keys {
            let (col, row) = ((k / n as u64) as usize, (k % n as u64) as usize);
            col_ptr[col + 1] += 1;
            row_idx.push(row);
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        Self { n, col_ptr, row_idx }
    }

    /// Key for [`Self::from_entries`].
    pub fn key(n: usize, row: usize, col: usize) -> u64 {
        col as u64 * n as u64 + row as u64
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (a, b) = (self.col_ptr[col], self.col_ptr[col + 1]);
        self.row_idx[a..b].binary_search(&row).ok().map(|p| a + p)
    }
}

#[derive(Debug, Clone)]
pub struct CscMatrix {
    pub pattern: Arc<SparsityPattern>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        Self { pattern, values }
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pattern.position(row, col).map_or(0.0, |p| self.values[p])
    }

    /// Adds to a structural entry.
    ///
    /// # Panics
    /// If `(row, col)` is outside the pattern.
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let p = self
            .pattern
            .position(row, col)
            .unwrap_or_else(|| panic!("entry ({row}, {col}) outside the sparsity pattern"));
        self.values[p] += v;
    }

    /// Scatter-adds `local[(i, j)]` into `(rows[i], cols[j])`.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], local: &nalgebra::DMatrix<f64>, transpose: bool) {
        let pat = &*self.pattern;
        for (j, &col) in cols.iter().enumerate() {
            let (a, b) = (pat.col_ptr[col], pat.col_ptr[col + 1]);
            let slice = &pat.row_idx[a..b];
            for (i, &row) in rows.iter().enumerate() {
                let v = if transpose { local[(j, i)] } else { local[(i, j)] };
                if v == 0.0 {
                    continue;
                }
                let p = slice
                    .binary_search(&row)
                    .unwrap_or_else(|_| panic!("entry ({row}, {col}) outside the sparsity pattern"));
                self.values[a + p] += v;
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let pat = &*self.pattern;
        let mut y = vec![0.0; pat.n];
        for j in 0..pat.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for p in pat.col_ptr[j]..pat.col_ptr[j + 1] {
                y[pat.row_idx[p]] += self.values[p] * xj;
            }
        }
        y
    }

    /// Iterates `(row, col, value)` over structural entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let pat = &*self.pattern;
        (0..pat.n).flat_map(move |j| (pat.col_ptr[j]..pat.col_ptr[j + 1]).map(move |p| (pat.row_idx[p], j, self.values[p])))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n(), self.n());
        for (i, j, v) in self.entries() {
            m[(i, j)] += v;
        }
        m
    }

    /// MatrixMarket coordinate format with 1-based indices; explicit zeros are skipped.
    pub fn to_matrix_market(&self) -> String {
        let nz: Vec<_> = self.entries().filter(|e| e.2 != 0.0).collect();
        let mut s = String::new();
        writeln!(s, "%%MatrixMarket matrix coordinate real general").unwrap();
        writeln!(s, "{} {} {}", self.n(), self.n(), nz.len()).unwrap();
        for (i, j, v) in nz {
            writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v).unwrap();
        }
        s
    }

    fn as_faer(&self) -> SparseColMatRef<'_, usize, f64> {
        let pat = &*self.pattern;
        let sym = SymbolicSparseColMatRef::new_checked(pat.n, pat.n, &pat.col_ptr, None, &pat.row_idx);
        SparseColMatRef::new(sym, &self.values)
    }
}

pub fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Numeric factorisation flavour of the sparse LU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LuKind {
    /// Chosen by faer from the estimated flop density.
    #[default]
    Auto,
    /// Left-looking; stores only the actual fill.
    Simplicial,
    /// Dense supernodes; faster on large problems at higher memory cost.
    Supernodal,
}

/// Sparse LU with the symbolic analysis cached per pattern.
#[derive(Debug, Default, Clone)]
pub struct DirectSolver {
    symbolic: Option<(Arc<SparsityPattern>, Arc<SymbolicLu<usize>>)>,
    pub kind: LuKind,
    /// Relative residual required after the solve.
    pub tolerance: Option<f64>,
    pub last_residual: f64,
}

/// Names and index ranges of the blocks, for diagnostics.
pub type BlockRanges<'a> = &'a [(&'a str, std::ops::Range<usize>)];

impl DirectSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_kind(kind: LuKind) -> Self {
        Self { kind, ..Self::default() }
    }

    fn symbolic_for(&mut self, a: &CscMatrix) -> Result<Arc<SymbolicLu<usize>>, SolveError> {
        if let Some((pat, sym)) = &self.symbolic {
            if Arc::ptr_eq(pat, &a.pattern) || **pat == *a.pattern {
                return Ok(sym.clone());
            }
        }
        let threshold = match self.kind {
            LuKind::Auto => SupernodalThreshold::AUTO,
            LuKind::Simplicial => SupernodalThreshold::FORCE_SIMPLICIAL,
            LuKind::Supernodal => SupernodalThreshold::FORCE_SUPERNODAL,
        };
        let params = LuSymbolicParams { supernodal_flop_ratio_threshold: threshold, ..Default::default() };
        let sym = factorize_symbolic_lu(a.as_faer().symbolic(), params)
            .map_err(|e| SolveError::Singular { reason: format!("symbolic analysis: {e:?}"), diagnostics: String::new() })?;
        let sym = Arc::new(sym);
        self.symbolic = Some((a.pattern.clone(), sym.clone()));
        Ok(sym)
    }

    /// Numeric LU of `a`, reusing the cached symbolic analysis.
    pub fn factor(&mut self, a: &CscMatrix, blocks: BlockRanges) -> Result<Factorization, SolveError> {
        if let Some(reason) = structurally_singular(a) {
            return Err(SolveError::Singular { reason, diagnostics: block_diagnostics(a, None, blocks) });
        }
        let symbolic = self.symbolic_for(a)?;
        let singular = |reason: String| SolveError::Singular { reason, diagnostics: block_diagnostics(a, None, blocks) };
        let mut numeric = NumericLu::new();
        // faer panics on an exactly zero pivot instead of returning an error.
        std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            let req = symbolic.factorize_numeric_lu_scratch::<f64>(faer::get_global_parallelism(), Default::default());
            let mut mem = MemBuffer::try_new(req).map_err(|e| format!("workspace: {e:?}"))?;
            symbolic
                .factorize_numeric_lu(&mut numeric, a.as_faer(), faer::get_global_parallelism(), MemStack::new(&mut mem), Default::default())
                .map(|_| ())
                .map_err(|e| format!("numeric factorisation: {e:?}"))
        }))
        .map_err(|_| singular("zero pivot in numeric factorisation".into()))?
        .map_err(singular)?;
        Ok(Factorization { symbolic, numeric, n: a.n() })
    }

    /// Solves `A x = b`, refining iteratively until the relative residual
    /// `‖Ax - b‖∞ / ‖b‖∞` meets the tolerance (default `1e-10`).
    pub fn solve(&mut self, a: &CscMatrix, b: &[f64], blocks: BlockRanges) -> Result<Vec<f64>, SolveError> {
        let f = self.factor(a, blocks)?;
        let (x, rel) = refine(a, b, self.tolerance.unwrap_or(1e-10), blocks, |r| f.apply(r))?;
        self.last_residual = rel;
        Ok(x)
    }
}

/// A numeric LU factorisation.
pub struct Factorization {
    symbolic: Arc<SymbolicLu<usize>>,
    numeric: NumericLu<usize, f64>,
    n: usize,
}

impl Factorization {
    pub fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        // SAFETY: `numeric` was produced by `symbolic.factorize_numeric_lu` in `DirectSolver::factor`.
        let lu = unsafe { LuRef::new_unchecked(&self.symbolic, &self.numeric) };
        let mut mem = MemBuffer::new(symbolic_solve_scratch(&self.symbolic));
        lu.solve_in_place_with_conj(Conj::No, m.as_mut(), faer::get_global_parallelism(), MemStack::new(&mut mem));
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }
}

fn symbolic_solve_scratch(s: &SymbolicLu<usize>) -> StackReq {
    s.solve_in_place_scratch::<f64>(1, faer::get_global_parallelism())
}

/// Iterative refinement of `A x = b` with an approximate inverse `apply`.
/// Returns the solution and its relative residual `‖Ax - b‖∞ / ‖b‖∞`.
pub fn refine(
    a: &CscMatrix,
    b: &[f64],
    tol: f64,
    blocks: BlockRanges,
    apply: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<(Vec<f64>, f64), SolveError> {
    let mut x = apply(b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::Singular {
            reason: "non-finite solution".into(),
            diagnostics: block_diagnostics(a, Some(&x), blocks),
        });
    }
    let bnorm = linf(b);
    if bnorm == 0.0 {
        return Ok((x, 0.0));
    }
    let mut rel = f64::INFINITY;
    for pass in 0..5 {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
        rel = linf(&r) / bnorm;
        if rel <= tol || pass == 4 {
            break;
        }
        for (x, d) in x.iter_mut().zip(apply(&r)) {
            *x += d;
        }
    }
    if rel > tol {
        return Err(SolveError::InaccurateSolve { residual: rel });
    }
    Ok((x, rel))
}

fn structurally_singular(a: &CscMatrix) -> Option<String> {
    let n = a.n();
    let mut row_nz = vec![false; n];
    let mut col_nz = vec![false; n];
    for (i, j, v) in a.entries() {
        if v != 0.0 {
            row_nz[i] = true;
            col_nz[j] = true;
        }
    }
    let rows = row_nz.iter().filter(|x| !**x).count();
    let cols = col_nz.iter().filter(|x| !**x).count();
    (rows + cols > 0).then(|| format!("{rows} zero rows and {cols} zero columns"))
}

/// Per-block summary: empty rows, zero diagonals and non-finite solution entries.
fn block_diagnostics(a: &CscMatrix, x: Option<&[f64]>, blocks: BlockRanges) -> String {
    let n = a.n();
    let mut row_nnz = vec![0usize; n];
    let mut diag = vec![0.0; n];
    for (i, j, v) in a.entries() {
        if v != 0.0 {
            row_nnz[i] += 1;
        }
        if i == j {
            diag[i] = v;
        }
    }
    let mut s = String::new();
    for (name, range) in blocks {
        let empty = range.clone().filter(|&i| row_nnz[i] == 0).count();
        let zero_diag = range.clone().filter(|&i| diag[i] == 0.0).count();
        let bad = x.map_or(0, |x| range.clone().filter(|&i| !x[i].is_finite()).count());
        let _ = write!(s, "[{name}: {} dofs, {empty} empty rows, {zero_diag} zero diagonals, {bad} non-finite] ", range.len());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CscMatrix {
        // [[4, 1, 0], [1, 0, 2], [0, 2, 3]]
        let n = 3;
        let keys = [(0, 0), (0, 1), (1, 0), (1, 2), (2, 1), (2, 2), (1, 1)]
            .iter()
            .map(|&(i, j)| SparsityPattern::key(n, i, j))
            .collect();
        let mut a = CscMatrix::zeros(Arc::new(SparsityPattern::from_entries(n, keys)));
        for (i, j, v) in [(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 2, 2.0), (2, 1, 2.0), (2, 2, 3.0)] {
            a.add(i, j, v);
        }
        a
    }

    #[test]
    fn solves_indefinite_system() {
        let a = small();
        let x_true = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let mut s = DirectSolver::new();
        let x = s.solve(&a, &b, &[]).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-14);
        }
        assert!(s.last_residual < 1e-15);
    }

    #[test]
    fn reports_singular_matrix() {
        let mut a = small();
        a.values.iter_mut().for_each(|v| *v = 0.0);
        let mut s = DirectSolver::new();
        let err = s.solve(&a, &[1.0, 1.0, 1.0], &[("all", 0..3)]).unwrap_err();
        match err {
            SolveError::Singular { diagnostics, .. } => assert!(diagnostics.contains("3 empty rows")),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn matrix_market_is_one_based() {
        let mm = small().to_matrix_market();
        let lines: Vec<&str> = mm.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix coordinate real general");
        assert_eq!(lines[1], "3 3 6");
        assert!(lines[2].starts_with("1 1 "));
    }
}
