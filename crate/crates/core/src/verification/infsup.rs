//! Dense discrete inf-sup constants of the two coupling forms.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::elements::SpaceSet;
use crate::error::VerificationError;
use crate::forms::Forms;
use crate::mesh::Mesh;

/// Largest stress dimension accepted by the dense path.
pub const MAX_DENSE_DIM: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSupReport {
    pub h: f64,
    pub stress_dofs: usize,
    /// `inf_v sup_τ b₂(τ, v) / (‖τ‖_div ‖v‖₀)`.
    pub beta_b2: f64,
    /// `inf_τ sup_e b₁(e, τ) / (‖e‖₀ ‖τ‖_div)` over the discrete kernel of `b₂`.
    pub beta_b1_kernel: f64,
    pub kernel_dim: usize,
}

struct DenseBlocks {
    b2: DMatrix<f64>,
    m_tau: DMatrix<f64>,
    m_v: DMatrix<f64>,
    /// `B₁ᵀ M_e⁻¹ B₁`, assembled cell by cell since the strain is discontinuous.
    b1_gram: DMatrix<f64>,
}

fn dense_blocks(forms: &Forms) -> DenseBlocks {
    let s = forms.spaces;
    let (nb, nl, nps) = (s.stress_element.dim(), s.low_element.dim(), s.strain_element.dim());
    let nu = s.displacement.num_dofs();
    let (ns, nv) = (s.stress.num_dofs(), nu + s.rotation.num_dofs());
    let mut b2 = DMatrix::zeros(nv, ns);
    let mut m_tau = DMatrix::zeros(ns, ns);
    let mut m_v = DMatrix::zeros(nv, nv);
    let mut b1_gram = DMatrix::zeros(ns, ns);
    for c in 0..forms.mesh.num_cells() {
        let cb = forms.cell_basis(c);
        let sd = s.stress.cell_dofs(c);
        let mut low: Vec<usize> = s.displacement.cell_dofs(c).to_vec();
        low.extend(s.rotation.cell_dofs(c).iter().map(|d| d + nu));
        let lb2 = forms.local_b2_with(&cb);
        for (i, &gi) in sd.iter().enumerate() {
            for (j, &gj) in low.iter().enumerate() {
                b2[(gj, gi)] += lb2[(i, j)];
            }
        }
        let mut row_gram = DMatrix::<f64>::zeros(nb, nb);
        let mut low_mass = DMatrix::<f64>::zeros(nl, nl);
        let mut strain_mass = DMatrix::<f64>::zeros(nps, nps);
        for (q, &w) in forms.quadrature.weights.iter().enumerate() {
            let w = w * cb.geometry.det;
            for i in 0..nb {
                for j in 0..nb {
                    let (a, b) = (cb.stress[q][i], cb.stress[q][j]);
                    row_gram[(i, j)] += w * (a[0] * b[0] + a[1] * b[1] + cb.stress_div[q][i] * cb.stress_div[q][j]);
                }
            }
            let chi = &forms.tab.low[q];
            for i in 0..nl {
                for j in 0..nl {
                    low_mass[(i, j)] += w * chi[i] * chi[j];
                }
            }
            let phi = &forms.tab.strain[q];
            for i in 0..nps {
                for j in 0..nps {
                    strain_mass[(i, j)] += w * phi[i] * phi[j];
                }
            }
        }
        for row in 0..2 {
            for i in 0..nb {
                for j in 0..nb {
                    m_tau[(sd[row * nb + i], sd[row * nb + j])] += row_gram[(i, j)];
                }
            }
        }
        // Two displacement components, then the skew rotation whose tensor norm doubles the entry.
        for (block, scale) in [(0, 1.0), (1, 1.0), (2, 2.0)] {
            for i in 0..nl {
                for j in 0..nl {
                    m_v[(low[block * nl + i], low[block * nl + j])] += scale * low_mass[(i, j)];
                }
            }
        }
        // b₁ couples strain component (a,b) with row a of τ; the strain mass is the same per component.
        let lb1 = forms.local_b1_with(&cb);
        let minv = strain_mass.try_inverse().expect("strain mass is invertible");
        let mut cols = DMatrix::zeros(4 * nps, 2 * nb);
        for comp in 0..4 {
            let blk = lb1.view((comp * nps, 0), (nps, 2 * nb)).into_owned();
            cols.view_mut((comp * nps, 0), (nps, 2 * nb)).copy_from(&(&minv * blk));
        }
        let local = lb1.rows(0, 4 * nps).transpose() * cols;
        for i in 0..2 * nb {
            for j in 0..2 * nb {
                b1_gram[(sd[i], sd[j])] += local[(i, j)];
            }
        }
    }
    DenseBlocks { b2, m_tau, m_v, b1_gram }
}

/// Smallest `λ` of `A x = λ M x` for symmetric `A` and SPD `M`.
fn min_generalized_eigenvalue(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<f64, VerificationError> {
    let l = Cholesky::new(m.clone()).ok_or_else(|| VerificationError::Eigen("Gram matrix not SPD".into()))?.l();
    let li_a = l.solve_lower_triangular(a).ok_or_else(|| VerificationError::Eigen("triangular solve".into()))?;
    let c = l
        .solve_lower_triangular(&li_a.transpose())
        .ok_or_else(|| VerificationError::Eigen("triangular solve".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    Ok(SymmetricEigen::new(c).eigenvalues.min())
}

/// Both inf-sup constants on one mesh.
pub fn infsup_constants(mesh: &Mesh, spaces: &SpaceSet) -> Result<InfSupReport, VerificationError> {
    let ns = spaces.stress.num_dofs();
    if ns > MAX_DENSE_DIM {
        return Err(VerificationError::TooLarge { dim: ns, max: MAX_DENSE_DIM });
    }
    let forms = Forms::new(mesh, spaces).map_err(|e| VerificationError::Eigen(e.to_string()))?;
    let DenseBlocks { b2, m_tau, m_v, b1_gram } = dense_blocks(&forms);

    // inf-sup of b₂: smallest eigenvalue of B₂ M_τ⁻¹ B₂ᵀ relative to M_v.
    let chol_tau = Cholesky::new(m_tau.clone()).ok_or_else(|| VerificationError::Eigen("stress Gram not SPD".into()))?;
    let schur = &b2 * chol_tau.solve(&b2.transpose());
    let beta_b2 = min_generalized_eigenvalue(&((&schur + schur.transpose()) * 0.5), &m_v)?.max(0.0).sqrt();

    // Kernel of B₂: stress vectors annihilated by every displacement and rotation test.
    let gram = b2.transpose() * &b2;
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.amax();
    let kernel: Vec<usize> = (0..ns).filter(|&i| eig.eigenvalues[i] <= 1e-11 * top).collect();
    let mut z = DMatrix::zeros(ns, kernel.len());
    for (k, &i) in kernel.iter().enumerate() {
        z.set_column(k, &eig.eigenvectors.column(i));
    }
    let num = z.transpose() * &b1_gram * &z;
    let den = z.transpose() * &m_tau * &z;
    let beta_b1_kernel = if kernel.is_empty() { f64::INFINITY } else { min_generalized_eigenvalue(&num, &den)?.max(0.0).sqrt() };

    Ok(InfSupReport { h: mesh.mesh_size(), stress_dofs: ns, beta_b2, beta_b1_kernel, kernel_dim: kernel.len() })
}

/// Inf-sup constants over a mesh sequence.
pub fn infsup_diagnostic(meshes: &[(Mesh, SpaceSet)]) -> Result<Vec<InfSupReport>, VerificationError> {
    meshes.iter().map(|(m, s)| infsup_constants(m, s)).collect()
}

/// Largest relative deviation of `values` from their mean.
pub fn relative_variation(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).abs() / mean).fold(0.0, f64::max)
}
