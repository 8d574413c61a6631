//! Convergence study for the manufactured case on uniformly refined unit squares.

use std::fmt::Write as _;
use std::time::Instant;

use super::eoc::eoc;
use super::errors::{compute_errors, ErrorReport};
use super::invariants::{structural_checks, StructuralReport};
use super::manufactured::ManufacturedCase;
use crate::elements::make_space_set;
use crate::error::{SolveError, VerificationError};
use crate::forms::Forms;
use crate::mesh::{build_structured_mesh, SideTags};
use crate::solver::{NonlinearSolver, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// 1-based; level `l` uses a `2^l × 2^l` square mesh.
    pub level: usize,
    pub errors: ErrorReport,
    /// Rates against the previous level (absent on the first).
    pub rates: Option<[f64; 5]>,
    pub structural: StructuralReport,
    pub iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub degree: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    /// Table with columns `level,h,dofs,e0_d,rate_d,e1_p,rate_p,ediv_sigma,rate_sigma,e0_u,rate_u,e0_gamma,rate_gamma`.
    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("level,h,dofs,e0_d,rate_d,e1_p,rate_p,ediv_sigma,rate_sigma,e0_u,rate_u,e0_gamma,rate_gamma\n");
        for r in &self.rows {
            write!(s, "{},{:.5e},{}", r.level, r.errors.h, r.errors.dofs).unwrap();
            for (i, e) in r.errors.values().iter().enumerate() {
                match r.rates {
                    Some(rates) => write!(s, ",{:.5e},{:.5e}", e, rates[i]).unwrap(),
                    None => write!(s, ",{e:.5e},").unwrap(),
                }
            }
            s.push('\n');
        }
        s
    }

    /// Human-readable rate table.
    pub fn table(&self) -> String {
        let mut s = format!("{:>5} {:>10} {:>8}", "level", "h", "dofs");
        for n in ErrorReport::NAMES {
            write!(s, " {n:>11} {:>5}", "rate").unwrap();
        }
        s.push('\n');
        for r in &self.rows {
            write!(s, "{:>5} {:>10.4e} {:>8}", r.level, r.errors.h, r.errors.dofs).unwrap();
            for (i, e) in r.errors.values().iter().enumerate() {
                match r.rates {
                    Some(rates) => write!(s, " {e:>11.3e} {:>5.2}", rates[i]).unwrap(),
                    None => write!(s, " {e:>11.3e} {:>5}", "-").unwrap(),
                }
            }
            s.push('\n');
        }
        s
    }

    /// Rates of the last `n` levels.
    pub fn last_rates(&self, n: usize) -> Vec<[f64; 5]> {
        self.rows.iter().rev().take(n).filter_map(|r| r.rates).collect()
    }

    /// True when every rate of the last `n` levels lies in `[lo, hi]`.
    pub fn rates_within(&self, n: usize, lo: f64, hi: f64) -> bool {
        let last = self.last_rates(n);
        last.len() == n && last.iter().flatten().all(|r| (lo..=hi).contains(r))
    }
}

/// Solves `case` on levels `1..=levels` with polynomial degree `k`.
pub fn convergence_study(
    case: &ManufacturedCase,
    k: usize,
    levels: usize,
    config: SolverConfig,
) -> Result<ConvergenceStudy, VerificationError> {
    if levels < 2 {
        return Err(VerificationError::TooFewLevels { needed: 2, got: levels });
    }
    let data = case.problem_data();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for level in 1..=levels {
        let start = Instant::now();
        let n = 1 << level;
        let mesh = build_structured_mesh(n, n, 1.0, 1.0, &SideTags::per_side())
            .map_err(|e| SolveError::Config(e.to_string()))?;
        let spaces = make_space_set(&mesh, k).map_err(|e| SolveError::Config(e.to_string()))?;
        let mut solver = NonlinearSolver::new(&mesh, &spaces, case.params, case.law, &data, config)?;
        let (state, trace) = solver.solve_stationary().map_err(|e| match e {
            SolveError::NotConverged { .. } | SolveError::Singular { .. } => {
                SolveError::Config(format!("level {level}: {e}"))
            }
            other => other,
        })?;
        let errors = compute_errors(&mesh, &spaces, &state, case);
        let forms = Forms::new(&mesh, &spaces).map_err(|e| SolveError::Config(e.to_string()))?;
        let structural = structural_checks(&forms, &state, &data);
        let rates = match rows.last() {
            Some(prev) => {
                let mut r = [0.0; 5];
                for (i, (a, b)) in prev.errors.values().iter().zip(errors.values()).enumerate() {
                    r[i] = eoc(&[(prev.errors.h, *a), (errors.h, b)])?[0];
                }
                Some(r)
            }
            None => None,
        };
        rows.push(ConvergenceRow {
            level,
            errors,
            rates,
            structural,
            iterations: trace.iterations(),
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(ConvergenceStudy { degree: k, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let study = convergence_study(&ManufacturedCase::default(), 0, 2, SolverConfig::default()).unwrap();
        let csv = study.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), 13);
        assert!(lines[1].ends_with(','));
        assert!(study.rows[1].structural.max_defect() < 1e-10);
    }
}
