//! Static condensation of cell-local unknowns before the global sparse solve.
//!
//! Each group holds unknowns that couple only to themselves and to a set of
//! retained unknowns. The group block is factored densely and its Schur
//! complement is added to the retained system.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, LU};
use rayon::prelude::*;

use crate::error::SolveError;
use crate::linalg::{refine, BlockRanges, CscMatrix, DirectSolver, SparsityPattern};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Group {
    local: Vec<usize>,
    /// Retained unknowns coupled to `local`, as reduced indices.
    coupled: Vec<usize>,
    coupled_global: Vec<usize>,
}

/// Index bookkeeping for one sparsity pattern.
#[derive(Debug, Clone)]
pub struct StaticCondensation {
    n: usize,
    reduced_of: Vec<usize>,
    kept: Vec<usize>,
    groups: Vec<Group>,
    pattern: Arc<SparsityPattern>,
    /// Position in the reduced values of each original entry, or `NONE`.
    entry_map: Vec<usize>,
}

struct LocalFactor {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    /// `A_LL⁻¹ A_LX`.
    y: DMatrix<f64>,
    /// `A_XL`.
    a_xl: DMatrix<f64>,
}

/// A matrix after condensation, ready for right-hand sides.
pub struct CondensedMatrix<'a> {
    sc: &'a StaticCondensation,
    pub reduced: CscMatrix,
    factors: Vec<LocalFactor>,
}

impl StaticCondensation {
    /// `groups` must be disjoint, and every unknown coupled to a group must be retained.
    pub fn new(pattern: &SparsityPattern, groups: Vec<Vec<usize>>) -> Result<Self, SolveError> {
        let n = pattern.n;
        let mut owner = vec![NONE; n];
        for (g, dofs) in groups.iter().enumerate() {
            for &d in dofs {
                if d >= n || owner[d] != NONE {
                    return Err(SolveError::Config(format!("condensation group {g} repeats or exceeds dof {d}")));
                }
                owner[d] = g;
            }
        }
        let kept: Vec<usize> = (0..n).filter(|&i| owner[i] == NONE).collect();
        let mut reduced_of = vec![NONE; n];
        for (r, &i) in kept.iter().enumerate() {
            reduced_of[i] = r;
        }

        // Row and column neighbours of every condensed unknown.
        let mut coupled: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
        for col in 0..n {
            for &row in &pattern.row_idx[pattern.col_ptr[col]..pattern.col_ptr[col + 1]] {
                for (a, b) in [(row, col), (col, row)] {
                    let g = owner[a];
                    if g == NONE {
                        continue;
                    }
                    match owner[b] {
                        NONE => coupled[g].push(b),
                        h if h != g => {
                            return Err(SolveError::Config(format!("condensed dofs {a} and {b} of different groups couple")))
                        }
                        _ => {}
                    }
                }
            }
        }
        let groups: Vec<Group> = groups
            .into_iter()
            .zip(coupled)
            .map(|(local, mut c)| {
                c.sort_unstable();
                c.dedup();
                Group { local, coupled: c.iter().map(|&i| reduced_of[i]).collect(), coupled_global: c }
            })
            .collect();

        let m = kept.len();
        let mut keys: Vec<u64> = Vec::with_capacity(pattern.row_idx.len());
        for col in 0..n {
            if reduced_of[col] == NONE {
                continue;
            }
            for &row in &pattern.row_idx[pattern.col_ptr[col]..pattern.col_ptr[col + 1]] {
                if reduced_of[row] != NONE {
                    keys.push(SparsityPattern::key(m, reduced_of[row], reduced_of[col]));
                }
            }
        }
        for g in &groups {
            for &c in &g.coupled {
                for &r in &g.coupled {
                    keys.push(SparsityPattern::key(m, r, c));
                }
            }
        }
        let reduced = SparsityPattern::from_entries(m, keys);
        let mut entry_map = vec![NONE; pattern.row_idx.len()];
        for col in 0..n {
            for k in pattern.col_ptr[col]..pattern.col_ptr[col + 1] {
                let row = pattern.row_idx[k];
                if reduced_of[row] != NONE && reduced_of[col] != NONE {
                    entry_map[k] = reduced.position(reduced_of[row], reduced_of[col]).expect("entry in reduced pattern");
                }
            }
        }
        Ok(Self { n, reduced_of, kept, groups, pattern: Arc::new(reduced), entry_map })
    }

    pub fn reduced_size(&self) -> usize {
        self.kept.len()
    }

    /// Reduced index of a global unknown, `None` when it is condensed.
    pub fn reduced_index(&self, global: usize) -> Option<usize> {
        (self.reduced_of[global] != NONE).then_some(self.reduced_of[global])
    }

    /// Factors every group block and forms the Schur complement.
    pub fn condense<'a>(&'a self, a: &CscMatrix) -> Result<CondensedMatrix<'a>, SolveError> {
        if a.n() != self.n || a.pattern.row_idx.len() != self.entry_map.len() {
            return Err(SolveError::Config("matrix does not match the condensation pattern".into()));
        }
        let mut reduced = CscMatrix::zeros(self.pattern.clone());
        for (k, &pos) in self.entry_map.iter().enumerate() {
            if pos != NONE {
                reduced.values[pos] += a.values[k];
            }
        }
        let mut factors = Vec::with_capacity(self.groups.len());
        for chunk in self.groups.chunks(512) {
            let local: Vec<Result<(LocalFactor, DMatrix<f64>), SolveError>> = chunk
                .par_iter()
                .map(|g| {
                    let (nl, nx) = (g.local.len(), g.coupled_global.len());
                    let a_ll = DMatrix::from_fn(nl, nl, |i, j| a.get(g.local[i], g.local[j]));
                    let a_lx = DMatrix::from_fn(nl, nx, |i, j| a.get(g.local[i], g.coupled_global[j]));
                    let a_xl = DMatrix::from_fn(nx, nl, |i, j| a.get(g.coupled_global[i], g.local[j]));
                    let lu = a_ll.lu();
                    let y = lu.solve(&a_lx).ok_or_else(|| SolveError::Singular {
                        reason: format!("singular local block at dof {}", g.local[0]),
                        diagnostics: String::new(),
                    })?;
                    let schur = &a_xl * &y;
                    Ok((LocalFactor { lu, y, a_xl }, schur))
                })
                .collect();
            for (g, res) in chunk.iter().zip(local) {
                let (f, schur) = res?;
                for (j, &c) in g.coupled.iter().enumerate() {
                    for (i, &r) in g.coupled.iter().enumerate() {
                        let v = schur[(i, j)];
                        if v != 0.0 {
                            reduced.add(r, c, -v);
                        }
                    }
                }
                factors.push(f);
            }
        }
        Ok(CondensedMatrix { sc: self, reduced, factors })
    }
}

impl CondensedMatrix<'_> {
    /// `b_X - A_XL A_LL⁻¹ b_L`.
    pub fn reduce_rhs(&self, b: &[f64]) -> Vec<f64> {
        let mut rb: Vec<f64> = self.sc.kept.iter().map(|&i| b[i]).collect();
        for (g, f) in self.sc.groups.iter().zip(&self.factors) {
            let bl = DVector::from_iterator(g.local.len(), g.local.iter().map(|&i| b[i]));
            let z = f.lu.solve(&bl).expect("factor checked during condensation");
            let t = &f.a_xl * z;
            for (k, &r) in g.coupled.iter().enumerate() {
                rb[r] -= t[k];
            }
        }
        rb
    }

    /// Full solution from the retained part: `x_L = A_LL⁻¹ b_L - Y x_X`.
    pub fn recover(&self, x_reduced: &[f64], b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.sc.n];
        for (r, &i) in self.sc.kept.iter().enumerate() {
            x[i] = x_reduced[r];
        }
        for (g, f) in self.sc.groups.iter().zip(&self.factors) {
            let bl = DVector::from_iterator(g.local.len(), g.local.iter().map(|&i| b[i]));
            let xx = DVector::from_iterator(g.coupled.len(), g.coupled.iter().map(|&r| x_reduced[r]));
            let xl = f.lu.solve(&bl).expect("factor checked during condensation") - &f.y * xx;
            for (k, &i) in g.local.iter().enumerate() {
                x[i] = xl[k];
            }
        }
        x
    }
}

/// Direct solver that condenses cell-local unknowns first.
pub struct CondensedSolver {
    sc: StaticCondensation,
    inner: DirectSolver,
    pub tolerance: f64,
    pub last_residual: f64,
}

impl CondensedSolver {
    pub fn new(sc: StaticCondensation, tolerance: f64) -> Self {
        Self { sc, inner: DirectSolver::new(), tolerance, last_residual: 0.0 }
    }

    pub fn condensation(&self) -> &StaticCondensation {
        &self.sc
    }

    /// Solves `A x = b` through the reduced system, refining against the full matrix.
    pub fn solve(&mut self, a: &CscMatrix, b: &[f64], blocks: BlockRanges) -> Result<Vec<f64>, SolveError> {
        let cm = self.sc.condense(a)?;
        let reduced_blocks: Vec<(&str, std::ops::Range<usize>)> = blocks
            .iter()
            .map(|(name, r)| {
                let kept: Vec<usize> = r.clone().filter_map(|i| self.sc.reduced_index(i)).collect();
                let range = match (kept.first(), kept.last()) {
                    (Some(&lo), Some(&hi)) => lo..hi + 1,
                    _ => 0..0,
                };
                (*name, range)
            })
            .collect();
        let fac = self.inner.factor(&cm.reduced, &reduced_blocks)?;
        let (x, rel) = refine(a, b, self.tolerance, blocks, |r| cm.recover(&fac.apply(&cm.reduce_rhs(r)), r))?;
        self.last_residual = rel;
        Ok(x)
    }
}
