//! Epidemic rates, model variants and per-node compartments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Sirs,
    /// SIRS plus S -> R vaccination; simultaneous infection and vaccination
    /// resolves to infection.
    SivInfectionDominant,
    /// As above, but vaccination wins.
    SivVaccinationDominant,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::Sirs,
        Variant::SivInfectionDominant,
        Variant::SivVaccinationDominant,
    ];

    pub fn is_siv(self) -> bool {
        !matches!(self, Variant::Sirs)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Sirs => "sirs",
            Variant::SivInfectionDominant => "siv_infection_dominant",
            Variant::SivVaccinationDominant => "siv_vaccination_dominant",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "sirs" => Ok(Variant::Sirs),
            "siv_infection_dominant" | "infection_dominant" | "siv_id" | "id" => {
                Ok(Variant::SivInfectionDominant)
            }
            "siv_vaccination_dominant" | "vaccination_dominant" | "siv_vd" | "vd" => {
                Ok(Variant::SivVaccinationDominant)
            }
            _ => Err(ParamError::UnknownVariant(s.to_string())),
        }
    }
}

/// Compartment of a single node. The discriminant is the base-3 digit used
/// by the exact chain's state codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum NodeState {
    S = 0,
    I = 1,
    R = 2,
}

impl NodeState {
    pub const ALL: [NodeState; 3] = [NodeState::S, NodeState::I, NodeState::R];

    pub fn from_digit(d: u8) -> Self {
        match d {
            0 => NodeState::S,
            1 => NodeState::I,
            2 => NodeState::R,
            _ => panic!("invalid node state digit {d}"),
        }
    }

    pub fn digit(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("SIRS requires theta = 0 (got {0})")]
    ThetaWithoutVaccination(f64),
    #[error("gamma = 1 and theta = 1 make the S/R node chain periodic")]
    Periodic,
    #[error("unknown model variant `{0}`")]
    UnknownVariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicParams {
    /// Per-link infection probability.
    pub beta: f64,
    /// Healing probability.
    pub delta: f64,
    /// Immunity-loss probability.
    pub gamma: f64,
    /// Direct vaccination probability (zero for SIRS).
    #[serde(default)]
    pub theta: f64,
    pub variant: Variant,
}

impl EpidemicParams {
    pub fn new(variant: Variant, beta: f64, delta: f64, gamma: f64, theta: f64) -> Result<Self, ParamError> {
        let p = Self {
            beta,
            delta,
            gamma,
            theta,
            variant,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sirs(beta: f64, delta: f64, gamma: f64) -> Result<Self, ParamError> {
        Self::new(Variant::Sirs, beta, delta, gamma, 0.0)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [
            ("beta", self.beta),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("theta", self.theta),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::OutOfRange { name, value });
            }
        }
        match self.variant {
            Variant::Sirs if self.theta != 0.0 => Err(ParamError::ThetaWithoutVaccination(self.theta)),
            Variant::SivInfectionDominant | Variant::SivVaccinationDominant
                if self.gamma == 1.0 && self.theta == 1.0 =>
            {
                Err(ParamError::Periodic)
            }
            _ => Ok(()),
        }
    }

    /// Same rates under another variant (theta is dropped for SIRS).
    pub fn with_variant(&self, variant: Variant) -> Result<Self, ParamError> {
        let theta = if variant == Variant::Sirs { 0.0 } else { self.theta };
        Self::new(variant, self.beta, self.delta, self.gamma, theta)
    }

    /// Disease-free stationary probability of S for a single node:
    /// `gamma / (gamma + theta)`, and 1 when there is no vaccination.
    pub fn susceptible_star(&self) -> f64 {
        if self.theta == 0.0 {
            1.0
        } else {
            self.gamma / (self.gamma + self.theta)
        }
    }

    /// Disease-free stationary probability of R: `theta / (gamma + theta)`.
    pub fn recovered_star(&self) -> f64 {
        if self.theta == 0.0 {
            0.0
        } else {
            self.theta / (self.gamma + self.theta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(EpidemicParams::sirs(0.1, 0.5, 0.3).is_ok());
        assert_eq!(
            EpidemicParams::sirs(1.2, 0.5, 0.3),
            Err(ParamError::OutOfRange { name: "beta", value: 1.2 })
        );
        assert_eq!(
            EpidemicParams::new(Variant::Sirs, 0.1, 0.5, 0.3, 0.1),
            Err(ParamError::ThetaWithoutVaccination(0.1))
        );
        assert_eq!(
            EpidemicParams::new(Variant::SivInfectionDominant, 0.1, 0.5, 1.0, 1.0),
            Err(ParamError::Periodic)
        );
        assert!(EpidemicParams::new(Variant::SivVaccinationDominant, 0.1, 0.5, 1.0, 0.9).is_ok());
        assert!(EpidemicParams::new(Variant::Sirs, f64::NAN, 0.5, 0.3, 0.0).is_err());
    }

    #[test]
    fn stationary_split() {
        let p = EpidemicParams::new(Variant::SivInfectionDominant, 0.1, 0.5, 0.3, 0.1).unwrap();
        assert!((p.susceptible_star() - 0.75).abs() < 1e-15);
        assert!((p.recovered_star() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
    }
}
