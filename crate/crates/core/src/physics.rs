//! Material parameters, Hooke's law and permeability closures.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::PhysicsError;

pub type Tensor = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub lambda: f64,
    pub mu: f64,
    pub c0: f64,
    pub alpha: f64,
    pub mu_f: f64,
}

impl MaterialParams {
    /// Lamé parameters from Young's modulus and Poisson's ratio.
    pub fn from_young_poisson(e: f64, nu: f64, c0: f64, alpha: f64, mu_f: f64) -> Self {
        Self {
            lambda: e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
            mu: e / (2.0 * (1.0 + nu)),
            c0,
            alpha,
            mu_f,
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let bad = |name, value, reason| Err(PhysicsError::InvalidParameter { name, value, reason });
        if !(self.lambda >= 0.0) {
            return bad("lambda", self.lambda, "must be >= 0");
        }
        if !(self.mu > 0.0) {
            return bad("mu", self.mu, "must be > 0");
        }
        if !(self.c0 > 0.0) {
            return bad("c0", self.c0, "must be > 0");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha", self.alpha, "must lie in [0, 1]");
        }
        if !(self.mu_f > 0.0) {
            return bad("mu_f", self.mu_f, "must be > 0");
        }
        Ok(())
    }
}

/// Isotropic permeability `κ(ζ) 𝕀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PermeabilityLaw {
    Constant { kappa0: f64 },
    /// `k0/μ_f + k1/μ_f exp(k2 ζ)`
    Exponential { k0: f64, k1: f64, k2: f64 },
    /// `k0/μ_f + k1 ζ³ / (μ_f (1 - ζ)²)`
    KozenyCarman { k0: f64, k1: f64 },
    /// `k0 κ0 exp(k1 ζ)`
    ScaledExponential { k0: f64, k1: f64, kappa0: f64 },
    /// `k0/μ_f + k1/μ_f exp(k2 ζ)` with the porosity-weighted fluid content
    /// `ζ = φ0 + (1 - φ0)(c0 p + α tr d)` and a uniform initial porosity `φ0`.
    PorosityExponential { k0: f64, k1: f64, k2: f64, phi0: f64 },
}

/// Largest fluid content admitted by Kozeny-Carman during assembly.
pub const KOZENY_ZETA_MAX: f64 = 0.99;

impl PermeabilityLaw {
    pub fn is_constant(&self) -> bool {
        matches!(self, PermeabilityLaw::Constant { .. })
    }

    /// `∂ζ/∂(c0 p + α tr d)`.
    pub fn zeta_scale(&self) -> f64 {
        match self {
            PermeabilityLaw::PorosityExponential { phi0, .. } => 1.0 - phi0,
            _ => 1.0,
        }
    }
}

/// `ζ = c0 p + α tr d`.
pub fn fluid_content(params: &MaterialParams, tr_d: f64, p: f64) -> f64 {
    params.c0 * p + params.alpha * tr_d
}

/// Fluid content as seen by `law` (porosity-weighted for [`PermeabilityLaw::PorosityExponential`]).
pub fn law_fluid_content(law: &PermeabilityLaw, params: &MaterialParams, tr_d: f64, p: f64) -> f64 {
    let z = fluid_content(params, tr_d, p);
    match law {
        PermeabilityLaw::PorosityExponential { phi0, .. } => phi0 + (1.0 - phi0) * z,
        _ => z,
    }
}

pub fn eval_permeability(law: &PermeabilityLaw, params: &MaterialParams, zeta: f64) -> Result<f64, PhysicsError> {
    let mf = params.mu_f;
    let k = match *law {
        PermeabilityLaw::Constant { kappa0 } => kappa0,
        PermeabilityLaw::Exponential { k0, k1, k2 } => k0 / mf + k1 / mf * (k2 * zeta).exp(),
        PermeabilityLaw::KozenyCarman { k0, k1 } => {
            if zeta == 1.0 {
                return Err(PhysicsError::Pole(zeta));
            }
            k0 / mf + k1 * zeta.powi(3) / (mf * (1.0 - zeta).powi(2))
        }
        PermeabilityLaw::ScaledExponential { k0, k1, kappa0 } => k0 * kappa0 * (k1 * zeta).exp(),
        PermeabilityLaw::PorosityExponential { k0, k1, k2, .. } => k0 / mf + k1 / mf * (k2 * zeta).exp(),
    };
    if !(k > 0.0) || !k.is_finite() {
        return Err(PhysicsError::NonPositive { zeta, value: k });
    }
    Ok(k)
}

pub fn eval_permeability_derivative(
    law: &PermeabilityLaw,
    params: &MaterialParams,
    zeta: f64,
) -> Result<f64, PhysicsError> {
    let mf = params.mu_f;
    Ok(match *law {
        PermeabilityLaw::Constant { .. } => 0.0,
        PermeabilityLaw::Exponential { k1, k2, .. } => k1 * k2 / mf * (k2 * zeta).exp(),
        PermeabilityLaw::KozenyCarman { k1, .. } => {
            if zeta == 1.0 {
                return Err(PhysicsError::Pole(zeta));
            }
            // d/dζ ζ³(1-ζ)^-2 = ζ²(3 - ζ)/(1-ζ)³
            k1 / mf * zeta * zeta * (3.0 - zeta) / (1.0 - zeta).powi(3)
        }
        PermeabilityLaw::ScaledExponential { k0, k1, kappa0 } => k0 * kappa0 * k1 * (k1 * zeta).exp(),
        PermeabilityLaw::PorosityExponential { k1, k2, .. } => k1 * k2 / mf * (k2 * zeta).exp(),
    })
}

/// Counts Kozeny-Carman evaluations clamped at [`KOZENY_ZETA_MAX`].
#[derive(Debug, Default, Clone)]
pub struct ClampCounter(Arc<AtomicUsize>);

impl ClampCounter {
    pub fn get(&self) -> usize {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}

/// `(κ, dκ/dζ)` at a quadrature point, with the Kozeny-Carman guard applied.
/// The derivative vanishes where the clamp is active.
pub fn guarded_permeability(
    law: &PermeabilityLaw,
    params: &MaterialParams,
    zeta: f64,
    clamps: &ClampCounter,
) -> Result<(f64, f64), PhysicsError> {
    if matches!(law, PermeabilityLaw::KozenyCarman { .. }) && zeta > KOZENY_ZETA_MAX {
        clamps.0.fetch_add(1, Ordering::Relaxed);
        return Ok((eval_permeability(law, params, KOZENY_ZETA_MAX)?, 0.0));
    }
    Ok((eval_permeability(law, params, zeta)?, eval_permeability_derivative(law, params, zeta)?))
}

/// `𝒞d = λ tr(d) 𝕀 + 2μ d`.
pub fn hooke(params: &MaterialParams, d: &Tensor) -> Result<Tensor, PhysicsError> {
    let defect = (d[0][1] - d[1][0]).abs();
    let scale = d.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if defect > 1e-12 * scale {
        return Err(PhysicsError::NotSymmetric(defect));
    }
    Ok(hooke_unchecked(params, d))
}

pub fn hooke_unchecked(params: &MaterialParams, d: &Tensor) -> Tensor {
    let tr = d[0][0] + d[1][1];
    let (l, m2) = (params.lambda, 2.0 * params.mu);
    [[l * tr + m2 * d[0][0], m2 * d[0][1]], [m2 * d[1][0], l * tr + m2 * d[1][1]]]
}

pub fn ddot(a: &Tensor, b: &Tensor) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}
