//! Remaining power Γ = |E{β(φ+Δ̄)e^{−jΔ}}|²: a Monte Carlo estimator, a
//! quadrature oracle, and the closed-form approximations for each
//! combination of error family and correlation.

mod closed_form;
mod monte_carlo;
mod oracle;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circular_noise::{NoiseFamily, NoiseSpec};
use crate::error::{usage, Result};
use crate::pda::PdaParams;

pub use closed_form::{closed_form_phi_upper, error_order, gamma_closed_form};
pub use monte_carlo::{gamma_convergence_study, gamma_mc, ConvergenceRow, McReport, PhaseSet};
pub use oracle::{
    expected_coefficient, gamma_oracle, gamma_oracle_with, phase_average_coefficient,
};

/// Which parts of the reflection coefficient carry errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ReflectionCase {
    /// Constant amplitude β with a noisy phase: β·e^{−jΔ}.
    CaseI { beta: f64 },
    /// Phase-dependent amplitude without error: β(φ)·e^{−jΔ}.
    CaseII,
    /// Single-family error in both terms: β(φ+Δ̄)·e^{−jΔ}.
    CaseIII,
    /// Uniform plus von Mises error in both terms.
    CaseIV,
}

impl ReflectionCase {
    /// The case implied by a noise specification (never Case I).
    pub fn from_noise(noise: &NoiseSpec) -> Self {
        match (noise.pda_has_error, noise.family) {
            (false, _) => ReflectionCase::CaseII,
            (true, NoiseFamily::Composite { .. }) => ReflectionCase::CaseIV,
            (true, _) => ReflectionCase::CaseIII,
        }
    }

    /// Rejects combinations the case cannot describe.
    pub fn check(&self, noise: &NoiseSpec) -> Result<()> {
        noise.validate()?;
        let composite = matches!(noise.family, NoiseFamily::Composite { .. });
        match *self {
            ReflectionCase::CaseI { beta } => {
                if !(beta > 0.0 && beta <= 1.0) {
                    return Err(usage(format!(
                        "constant amplitude must lie in (0, 1], got {beta}"
                    )));
                }
                if noise.pda_has_error {
                    return Err(usage("case I has no amplitude error"));
                }
            }
            ReflectionCase::CaseII => {
                if noise.pda_has_error {
                    return Err(usage("case II requires an error-free amplitude"));
                }
            }
            ReflectionCase::CaseIII => {
                if !noise.pda_has_error || composite {
                    return Err(usage("case III requires a single-family amplitude error"));
                }
            }
            ReflectionCase::CaseIV => {
                if !noise.pda_has_error || !composite {
                    return Err(usage("case IV requires composite noise in both terms"));
                }
            }
        }
        Ok(())
    }

    /// Amplitude seen by a pixel with designed phase `phi` and amplitude-side
    /// error `amp_err`.
    #[inline]
    pub(crate) fn amplitude(&self, pda: &PdaParams, phi: f64, amp_err: f64) -> f64 {
        match *self {
            ReflectionCase::CaseI { beta } => beta,
            ReflectionCase::CaseII => pda.beta(phi),
            ReflectionCase::CaseIII | ReflectionCase::CaseIV => pda.beta(phi + amp_err),
        }
    }

    fn same_kind(&self, other: &ReflectionCase) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

/// Closed-form approximations, one per combination of case, family and ι.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PropId {
    P3_1,
    P3_2,
    P3_3,
    P3_4,
    P3_5,
    P3_6,
    P3_7,
    P3_8,
    P3_9,
    P3_10,
}

/// Error family a closed form is derived for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Uniform,
    VonMises,
    Composite,
}

impl FamilyKind {
    pub fn of(f: &NoiseFamily) -> Self {
        match f {
            NoiseFamily::Uniform { .. } => FamilyKind::Uniform,
            NoiseFamily::VonMises { .. } => FamilyKind::VonMises,
            NoiseFamily::Composite { .. } => FamilyKind::Composite,
        }
    }
}

impl PropId {
    pub const ALL: [PropId; 10] = [
        PropId::P3_1,
        PropId::P3_2,
        PropId::P3_3,
        PropId::P3_4,
        PropId::P3_5,
        PropId::P3_6,
        PropId::P3_7,
        PropId::P3_8,
        PropId::P3_9,
        PropId::P3_10,
    ];

    /// The case this closed form applies to; Case I carries a placeholder β.
    pub fn case(&self) -> ReflectionCase {
        use PropId::*;
        match self {
            P3_1 | P3_2 => ReflectionCase::CaseI { beta: 1.0 },
            P3_3 | P3_4 => ReflectionCase::CaseII,
            P3_5 | P3_6 | P3_7 | P3_8 => ReflectionCase::CaseIII,
            P3_9 | P3_10 => ReflectionCase::CaseIV,
        }
    }

    pub fn family(&self) -> FamilyKind {
        use PropId::*;
        match self {
            P3_1 | P3_3 | P3_5 | P3_7 => FamilyKind::Uniform,
            P3_2 | P3_4 | P3_6 | P3_8 => FamilyKind::VonMises,
            P3_9 | P3_10 => FamilyKind::Composite,
        }
    }

    /// Required correlation, if the amplitude carries an error.
    pub fn iota(&self) -> Option<f64> {
        use PropId::*;
        match self {
            P3_1 | P3_2 | P3_3 | P3_4 => None,
            P3_5 | P3_6 | P3_9 => Some(1.0),
            P3_7 | P3_8 | P3_10 => Some(0.0),
        }
    }

    /// Smallest κ for which the closed form is stated.
    pub fn kappa_min(&self) -> Option<f64> {
        match self.family() {
            FamilyKind::Uniform => None,
            _ if *self == PropId::P3_9 => Some(1.6),
            _ => Some(1.0),
        }
    }

    /// The noise specification this closed form is derived for.
    pub fn noise_for(&self, tau: f64, kappa: f64) -> Result<NoiseSpec> {
        let family = match self.family() {
            FamilyKind::Uniform => NoiseFamily::Uniform { tau },
            FamilyKind::VonMises => NoiseFamily::VonMises { kappa },
            FamilyKind::Composite => NoiseFamily::Composite { tau, kappa },
        };
        match self.iota() {
            None => NoiseSpec::new(family, 1.0, false),
            Some(iota) => NoiseSpec::new(family, iota, true),
        }
    }

    /// Checks that `case` and `noise` satisfy the closed form's assumptions.
    pub fn check(&self, case: &ReflectionCase, noise: &NoiseSpec) -> Result<()> {
        case.check(noise)?;
        if !case.same_kind(&self.case()) {
            return Err(usage(format!("prop {self} does not describe {case:?}")));
        }
        if FamilyKind::of(&noise.family) != self.family() {
            return Err(usage(format!(
                "prop {self} requires {:?} noise, got {:?}",
                self.family(),
                noise.family
            )));
        }
        if let Some(iota) = self.iota() {
            if noise.iota != iota {
                return Err(usage(format!(
                    "prop {self} requires iota = {iota}, got {}",
                    noise.iota
                )));
            }
        }
        if let (Some(min), Some(kappa)) = (self.kappa_min(), noise.family.kappa()) {
            if kappa < min {
                return Err(usage(format!(
                    "prop {self} is stated for kappa >= {min}, got {kappa}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PropId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx = PropId::ALL.iter().position(|p| p == self).expect("listed") + 1;
        write!(f, "3.{idx}")
    }
}

impl FromStr for PropId {
    type Err = crate::error::RisError;

    fn from_str(s: &str) -> Result<Self> {
        PropId::ALL
            .iter()
            .copied()
            .find(|p| p.to_string() == s.trim())
            .ok_or_else(|| usage(format!("unknown closed-form id {s:?}")))
    }
}

/// How a Γ value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    MonteCarlo { pixels: usize, realizations: usize },
    ClosedForm { prop: PropId },
    NumericOracle { evaluations: usize },
}

/// A remaining-power value with its provenance and error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RpResult {
    pub gamma: f64,
    pub method: Method,
    pub error_estimate: f64,
}

/// Squared modulus with first-order error propagation.
pub(crate) fn squared_modulus(mu: Complex64, err: f64) -> (f64, f64) {
    (mu.norm_sqr(), 2.0 * mu.norm() * err + err * err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prop_ids_round_trip() {
        for p in PropId::ALL {
            assert_eq!(p.to_string().parse::<PropId>().unwrap(), p);
        }
        assert_eq!(PropId::P3_10.to_string(), "3.10");
        assert!("3.11".parse::<PropId>().is_err());
    }

    #[test]
    fn case_checks() {
        let u = NoiseFamily::Uniform { tau: 0.3 };
        let phase_only = NoiseSpec::new(u, 1.0, false).unwrap();
        let both = NoiseSpec::new(u, 1.0, true).unwrap();
        let comp = NoiseSpec::new(
            NoiseFamily::Composite {
                tau: 0.3,
                kappa: 2.0,
            },
            0.0,
            true,
        )
        .unwrap();
        assert!(ReflectionCase::CaseII.check(&phase_only).is_ok());
        assert!(ReflectionCase::CaseII.check(&both).is_err());
        assert!(ReflectionCase::CaseIII.check(&both).is_ok());
        assert!(ReflectionCase::CaseIII.check(&comp).is_err());
        assert!(ReflectionCase::CaseIV.check(&comp).is_ok());
        assert!(ReflectionCase::CaseI { beta: 1.5 }
            .check(&phase_only)
            .is_err());
        assert_eq!(ReflectionCase::from_noise(&comp), ReflectionCase::CaseIV);
    }

    #[test]
    fn prop_assumptions() {
        for p in PropId::ALL {
            let noise = p.noise_for(0.3, 2.0).unwrap();
            let case = ReflectionCase::from_noise(&noise);
            let case = if p.case().same_kind(&ReflectionCase::CaseI { beta: 1.0 }) {
                p.case()
            } else {
                case
            };
            p.check(&case, &noise).unwrap();
        }
        let low = PropId::P3_9.noise_for(0.3, 1.2).unwrap();
        assert!(PropId::P3_9.check(&ReflectionCase::CaseIV, &low).is_err());
        let low = PropId::P3_8.noise_for(0.3, 0.5).unwrap();
        assert!(PropId::P3_8.check(&ReflectionCase::CaseIII, &low).is_err());
        let wrong_iota = PropId::P3_5
            .noise_for(0.3, 0.0)
            .map(|n| NoiseSpec { iota: 0.5, ..n })
            .unwrap();
        assert!(PropId::P3_5
            .check(&ReflectionCase::CaseIII, &wrong_iota)
            .is_err());
    }
}
