//! The catalog of identities and their Monte Carlo realizations.
//!
//! Deterministic identities are checked exactly by [`checks`]. Each
//! distributional identity is a pair of independent samplers whose outputs go
//! through the same functional battery; each weighted identity compares a
//! plain mean with an importance-weighted one.

pub mod battery;
pub mod checks;
mod run;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::params::RunParams;
pub use battery::{functional_battery, Functional};
pub use run::{
    run_identity, run_weighted_identity, Calibration, ExactCheck, IdentityError, PairedFunctionalSamples,
    WeightedComparison, WeightedFunctional,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityId {
    #[serde(rename = "THM_PITMAN_3D")]
    ThmPitman3d,
    #[serde(rename = "COR_PITMAN_BRIDGE")]
    CorPitmanBridge,
    #[serde(rename = "COR_MEANDER_COND")]
    CorMeanderCond,
    #[serde(rename = "THM_LEVY_3D")]
    ThmLevy3d,
    #[serde(rename = "COR_LEVY_BRIDGE")]
    CorLevyBridge,
    #[serde(rename = "COR_LEVY_BRIDGE_T")]
    CorLevyBridgeT,
    #[serde(rename = "LEM_GLOBAL_INF")]
    LemGlobalInf,
    #[serde(rename = "LEM_RADIAL_TERMINAL")]
    LemRadialTerminal,
    #[serde(rename = "TAU_GAMMA")]
    TauGamma,
    #[serde(rename = "SPHERE_DIRECTION")]
    SphereDirection,
    #[serde(rename = "ABSV")]
    Absv,
    #[serde(rename = "IMHOF")]
    Imhof,
    #[serde(rename = "RCE")]
    Rce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    TwoSample,
    Weighted,
    ScalarTwoSample,
}

impl IdentityId {
    pub const ALL: [IdentityId; 13] = [
        IdentityId::ThmPitman3d,
        IdentityId::CorPitmanBridge,
        IdentityId::CorMeanderCond,
        IdentityId::ThmLevy3d,
        IdentityId::CorLevyBridge,
        IdentityId::CorLevyBridgeT,
        IdentityId::LemGlobalInf,
        IdentityId::LemRadialTerminal,
        IdentityId::TauGamma,
        IdentityId::SphereDirection,
        IdentityId::Absv,
        IdentityId::Imhof,
        IdentityId::Rce,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::ThmPitman3d => "THM_PITMAN_3D",
            IdentityId::CorPitmanBridge => "COR_PITMAN_BRIDGE",
            IdentityId::CorMeanderCond => "COR_MEANDER_COND",
            IdentityId::ThmLevy3d => "THM_LEVY_3D",
            IdentityId::CorLevyBridge => "COR_LEVY_BRIDGE",
            IdentityId::CorLevyBridgeT => "COR_LEVY_BRIDGE_T",
            IdentityId::LemGlobalInf => "LEM_GLOBAL_INF",
            IdentityId::LemRadialTerminal => "LEM_RADIAL_TERMINAL",
            IdentityId::TauGamma => "TAU_GAMMA",
            IdentityId::SphereDirection => "SPHERE_DIRECTION",
            IdentityId::Absv => "ABSV",
            IdentityId::Imhof => "IMHOF",
            IdentityId::Rce => "RCE",
        }
    }

    pub fn kind(self) -> CaseKind {
        match self {
            IdentityId::Imhof | IdentityId::Rce => CaseKind::Weighted,
            IdentityId::TauGamma | IdentityId::SphereDirection | IdentityId::Absv => CaseKind::ScalarTwoSample,
            _ => CaseKind::TwoSample,
        }
    }

    /// Whether the bridge endpoint `x` enters the case.
    pub fn uses_endpoint(self) -> bool {
        matches!(
            self,
            IdentityId::CorPitmanBridge
                | IdentityId::CorMeanderCond
                | IdentityId::CorLevyBridge
                | IdentityId::CorLevyBridgeT
                | IdentityId::TauGamma
                | IdentityId::Rce
        )
    }

    /// One-line statement of the identity being tested.
    pub fn anchor(self) -> &'static str {
        match self {
            IdentityId::ThmPitman3d => {
                "(P(B)_s, B_s) ≡ (|B3_s|, −|B3_s| + min{2 min_[s,t] |B3|, |B3_t| + B¹_t}) on [0,t]"
            }
            IdentityId::CorPitmanBridge => "(P(β^x)_s, β^x_s) ≡ (M^x_s, L_x(M^x)_s)",
            IdentityId::CorMeanderCond => "M^x ≡ M^0 conditioned on M^0_t ≥ |x|",
            IdentityId::ThmLevy3d => "(|B_s| + L_s, |B_s|) ≡ (|B3_s|, |B3_s| − min{min_[s,t] |B3|, |B3_t| − |B¹_t|})",
            IdentityId::CorLevyBridge => {
                "(|β^x_s| + λ_s(β^x), |β^x_s|) ≡ (M^x_s, M^x_s − min{min_[s,t] M^x, M^x_t − |x|})"
            }
            IdentityId::CorLevyBridgeT => {
                "(|β^x| + λ(β^x), |β^x|) ≡ (P(β^−|x|), min{max_[0,s] β^−|x|, (max_[s,t] β^−|x|)₊} − β^−|x|_s)"
            }
            IdentityId::LemGlobalInf => "(R on [0,t], inf_{u≥t} R_u) ≡ (R on [0,t], U·R_t)",
            IdentityId::LemRadialTerminal => "(R on [0,t], V·R_t) ≡ (|B3| on [0,t], B¹_t)",
            IdentityId::TauGamma => "(τ^x, γ(β^x)) ≡ (σ(β^−|x|), γ(β^−|x|))",
            IdentityId::SphereDirection => "N1 / |(N1, N2, N3)| ≡ V, uniform on [−1, 1]",
            IdentityId::Absv => "|V| ≡ U",
            IdentityId::Imhof => "E[F(M^0)] = E[F(R)·√(πt/2)/R_t]",
            IdentityId::Rce => "E[F(P(β^x))]·exp(−x²/2t)/√(2πt) = E[F(R)/(2R_t); R_t ≥ |x|]",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IdentityId::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| format!("unknown identity {s:?}"))
    }
}

/// Deliberate corruptions of one side, used to check that the harness detects
/// a false identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeControl {
    /// COR_PITMAN_BRIDGE: the left bridge ends at `x + shift` instead of `x`.
    ShiftBridgeEndpoint(f64),
    /// THM_PITMAN_3D: drop the `|B3_t| + B¹_t` term from the right side.
    DropTerminalCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCase {
    pub id: IdentityId,
    pub params: RunParams,
    /// Battery used by path-valued cases; ignored by scalar cases.
    pub functionals: Vec<Functional>,
    pub control: Option<NegativeControl>,
    /// Rejection budget per replicate for COR_MEANDER_COND.
    pub max_tries: usize,
    /// Insert sampled segment extrema into every sampled path before
    /// transforming it (see [`crate::samplers::with_bridge_extremes`]).
    pub bridge_extremes: bool,
    pub local_time: LocalTimeMethod,
}

/// How the Lévy-type cases obtain the local time at 0 of a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalTimeMethod {
    /// Per-segment draws from the exact conditional law
    /// ([`crate::samplers::sample_local_time`]).
    Exact,
    /// `(1/2ε)·` time spent in `(−ε, ε)` with `ε = band_eps`
    /// ([`crate::occupation::occupation_band`]). Biased low by about `ε/2`
    /// once the path has left the band.
    Band,
}

impl FromStr for LocalTimeMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(LocalTimeMethod::Exact),
            "band" => Ok(LocalTimeMethod::Band),
            _ => Err(format!("unknown local time method {s:?} (expected exact or band)")),
        }
    }
}

impl IdentityCase {
    pub fn new(id: IdentityId, params: RunParams) -> Self {
        Self {
            id,
            params,
            functionals: Functional::ALL.to_vec(),
            control: None,
            max_tries: 10_000,
            bridge_extremes: true,
            local_time: LocalTimeMethod::Exact,
        }
    }

    pub fn with_control(mut self, control: NegativeControl) -> Self {
        self.control = Some(control);
        self
    }

    pub fn kind(&self) -> CaseKind {
        self.id.kind()
    }
}
