//! Communication admission and resource-regime classification.
//!
//! Admission fixes `chi_i = min(theta_i, W)` with private requests served
//! first. The public demand left to place, `Pu`, is then compared against the
//! aggregate public compute capacity `m * floor((1 - alpha) K)`. Together with
//! whether any AP exceeds W, that selects one of four regimes, each of which
//! reduces to a linear integer program.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ScenarioInstance;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("AP {ap}: private demand {private} exceeds communication capacity W = {capacity}")]
    PrivateExceedsCommunication { ap: usize, private: u64, capacity: u64 },
}

/// Sufficient/insufficient computation (K) by sufficient/insufficient communication (W).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "SKSW")]
    Sksw,
    #[serde(rename = "IKSW")]
    Iksw,
    #[serde(rename = "SKIW")]
    Skiw,
    #[serde(rename = "IKIW")]
    Ikiw,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::Sksw, Regime::Iksw, Regime::Skiw, Regime::Ikiw];

    pub fn from_flags(communication_short: bool, cloud_required: bool) -> Self {
        match (communication_short, cloud_required) {
            (false, false) => Regime::Sksw,
            (false, true) => Regime::Iksw,
            (true, false) => Regime::Skiw,
            (true, true) => Regime::Ikiw,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::Sksw => "SKSW",
            Regime::Iksw => "IKSW",
            Regime::Skiw => "SKIW",
            Regime::Ikiw => "IKIW",
        }
    }

    /// Whether requests overflow to the cloud in this regime.
    pub fn uses_cloud(self) -> bool {
        matches!(self, Regime::Iksw | Regime::Ikiw)
    }

    /// Whether some AP blocks requests in this regime.
    pub fn blocks(self) -> bool {
        matches!(self, Regime::Skiw | Regime::Ikiw)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Regime::ALL
            .into_iter()
            .find(|r| r.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown regime {s:?}"))
    }
}

/// Per-AP communication admission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Admission {
    pub chi: Vec<u64>,
    pub blocked: Vec<u64>,
    pub private_admitted: Vec<u64>,
    pub public_admitted: Vec<u64>,
}

/// Admits requests against W, private requests first.
pub fn admit(instance: &ScenarioInstance) -> Result<Admission, PartitionError> {
    let n = instance.len();
    let capacity = instance.profile.communication_capacity();
    let mut admission = Admission {
        chi: Vec::with_capacity(n),
        blocked: Vec::with_capacity(n),
        private_admitted: Vec::with_capacity(n),
        public_admitted: Vec::with_capacity(n),
    };
    for i in 0..n {
        let private = instance.private_requests(i);
        if private > capacity {
            return Err(PartitionError::PrivateExceedsCommunication { ap: i + 1, private, capacity });
        }
        let chi = instance.theta[i].min(capacity);
        admission.chi.push(chi);
        admission.blocked.push(instance.theta[i] - chi);
        admission.private_admitted.push(private);
        admission.public_admitted.push(chi - private);
    }
    Ok(admission)
}

/// Total public flow to place on servers or the cloud.
pub fn compute_pu(instance: &ScenarioInstance, chi: &[u64]) -> u64 {
    let beta = instance.profile.beta;
    chi.iter()
        .enumerate()
        .map(|(i, &c)| {
            if instance.placement[i] {
                crate::model::floor_count(c as f64 - beta * instance.theta[i] as f64).max(0) as u64
            } else {
                c
            }
        })
        .sum()
}

/// Fully determined sub-problem description produced by [`classify`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegimeDescriptor {
    pub regime: Regime,
    pub chi: Vec<u64>,
    pub blocked: Vec<u64>,
    /// Requests each AP must route (right-hand sides of the demand rows).
    pub public_demand: Vec<u64>,
    pub pu: u64,
    pub total_public_capacity: u64,
    pub cloud_required: bool,
}

impl RegimeDescriptor {
    /// Requests that must leave the edge: `pu - m * floor((1-alpha)K)` or zero.
    pub fn required_offload(&self) -> u64 {
        self.pu.saturating_sub(self.total_public_capacity)
    }
}

pub fn classify(instance: &ScenarioInstance) -> Result<RegimeDescriptor, PartitionError> {
    let admission = admit(instance)?;
    let public_demand: Vec<u64> = (0..instance.len()).map(|i| instance.public_demand(i)).collect();
    let pu = compute_pu(instance, &admission.chi);
    debug_assert_eq!(pu, public_demand.iter().sum::<u64>());

    let servers = instance.placement.iter().filter(|&&x| x).count() as u64;
    let total_public_capacity = servers * instance.profile.public_capacity();
    let communication_short = admission.blocked.iter().any(|&b| b > 0);
    let cloud_required = pu > total_public_capacity;
    Ok(RegimeDescriptor {
        regime: Regime::from_flags(communication_short, cloud_required),
        chi: admission.chi,
        blocked: admission.blocked,
        public_demand,
        pu,
        total_public_capacity,
        cloud_required,
    })
}
