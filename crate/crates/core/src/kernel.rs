//! Model parameters, coherent-state conventions and the derived timescales.
//!
//! Natural units are fixed: mass and oscillator frequency are both 1. The
//! quantum Hamiltonian is `gamma * hbar^2 * (n + 1/2)^2` in the lab frame and
//! `gamma * hbar^2 * (n - n0)^2` in the interaction picture that removes the
//! mean rotation. Their classical counterparts are `gamma * I^2` and
//! `gamma * (I - I_pivot)^2` with `I_pivot = hbar * (n0 + 1/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MASS: f64 = 1.0;
pub const OMEGA: f64 = 1.0;

/// Below this mean photon number the semiclassical formulas are outside
/// their regime of validity (but still evaluable).
pub const SEMICLASSICAL_NU: f64 = 10.0;

/// Frame in which the Kerr evolution is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    #[default]
    Lab,
    Interaction,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    SmallPhotonNumber { nu: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::SmallPhotonNumber { nu } => write!(
                f,
                "mean photon number nu = {nu:.3} < {SEMICLASSICAL_NU}: outside the semiclassical regime"
            ),
        }
    }
}

/// Unvalidated parameter record, as read from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub gamma: f64,
    pub hbar: f64,
    #[serde(default)]
    pub q0: f64,
    pub p0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

/// Physical constants and the initial coherent state centroid.
///
/// Immutable after construction; `gamma > 0` and `hbar > 0` are guaranteed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    gamma: f64,
    hbar: f64,
    q0: f64,
    p0: f64,
    n0: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        for (name, value) in [("mass", raw.mass), ("omega", raw.omega)] {
            if let Some(v) = value {
                if v != 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "{name} = {v}: only natural units ({name} = 1) are supported"
                    )));
                }
            }
        }
        let params = ModelParams::new(raw.gamma, raw.hbar, raw.q0, raw.p0)?;
        match raw.n0 {
            Some(n0) => params.with_n0(n0),
            None => Ok(params),
        }
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            gamma: p.gamma,
            hbar: p.hbar,
            q0: p.q0,
            p0: p.p0,
            n0: Some(p.n0),
            mass: None,
            omega: None,
        }
    }
}

impl ModelParams {
    /// The interaction-picture pivot defaults to `I0 / hbar - 1/2`, which puts
    /// the classical pivot action on the centroid.
    pub fn new(gamma: f64, hbar: f64, q0: f64, p0: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be > 0, got {hbar}")));
        }
        if !(q0.is_finite() && p0.is_finite()) {
            return Err(Error::InvalidParameter("centroid must be finite".into()));
        }
        let i0 = 0.5 * (q0 * q0 + p0 * p0);
        if i0 == 0.0 {
            return Err(Error::InvalidParameter(
                "centroid at the origin has no classical period".into(),
            ));
        }
        Ok(Self { gamma, hbar, q0, p0, n0: i0 / hbar - 0.5 })
    }

    /// The parameters used throughout the reference figures:
    /// `gamma = hbar = 1`, `(q0, p0) = (0, 14)`.
    pub fn reference() -> Self {
        Self::new(1.0, 1.0, 0.0, 14.0).expect("reference parameters are valid")
    }

    pub fn with_n0(mut self, n0: f64) -> Result<Self> {
        if !n0.is_finite() || n0 < -0.5 {
            return Err(Error::InvalidParameter(format!("n0 must be >= -1/2, got {n0}")));
        }
        self.n0 = n0;
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// Action of the centroid, `(q0^2 + p0^2) / 2`.
    pub fn i0(&self) -> f64 {
        0.5 * (self.q0 * self.q0 + self.p0 * self.p0)
    }

    /// Mean photon number `|alpha0|^2`.
    pub fn nu(&self) -> f64 {
        self.i0() / self.hbar
    }

    /// Classical pivot of the interaction picture, `hbar * (n0 + 1/2)`.
    pub fn pivot_action(&self) -> f64 {
        self.hbar * (self.n0 + 0.5)
    }

    pub fn coherent_state(&self) -> CoherentState {
        CoherentState::from_centroid(self.q0, self.p0, self.hbar)
    }

    pub fn times(&self) -> Timescales {
        derive_times(self)
    }

    pub fn warnings(&self) -> Vec<Warning> {
        let nu = self.nu();
        if nu < SEMICLASSICAL_NU {
            vec![Warning::SmallPhotonNumber { nu }]
        } else {
            Vec::new()
        }
    }
}

/// Classical period of the centroid and the quantum revival time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timescales {
    pub t1: f64,
    pub t2: f64,
}

pub fn derive_times(params: &ModelParams) -> Timescales {
    Timescales {
        t1: PI / (params.gamma * params.i0()),
        t2: PI / (params.gamma * params.hbar),
    }
}

pub fn action(q: f64, p: f64) -> f64 {
    0.5 * (q * q + p * p)
}

/// `gamma I^2` in the lab frame, `gamma (I - I_pivot)^2` in the interaction picture.
pub fn classical_hamiltonian(q: f64, p: f64, params: &ModelParams, picture: Picture) -> f64 {
    let i = action(q, p);
    match picture {
        Picture::Lab => params.gamma * i * i,
        Picture::Interaction => {
            let d = i - params.pivot_action();
            params.gamma * d * d
        }
    }
}

/// Angular frequency `dH/dI` of a torus with action `i`.
pub fn frequency(i: f64, params: &ModelParams, picture: Picture) -> f64 {
    match picture {
        Picture::Lab => 2.0 * params.gamma * i,
        Picture::Interaction => 2.0 * params.gamma * (i - params.pivot_action()),
    }
}

/// Exact classical flow. Points move clockwise in the (q, p) plane for
/// positive frequency: `q = r sin(beta + w t)`, `p = r cos(beta + w t)`.
pub fn flow(q: f64, p: f64, t: f64, params: &ModelParams, picture: Picture) -> (f64, f64) {
    let w = frequency(action(q, p), params, picture);
    let (s, c) = (w * t).sin_cos();
    (q * c + p * s, p * c - q * s)
}

/// Eigenstate of the annihilation operator `a = (q + i p) / sqrt(2 hbar)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentState {
    pub alpha: Complex64,
    pub hbar: f64,
}

impl CoherentState {
    pub fn from_centroid(q0: f64, p0: f64, hbar: f64) -> Self {
        Self { alpha: Complex64::new(q0, p0) / (2.0 * hbar).sqrt(), hbar }
    }

    pub fn centroid(&self) -> (f64, f64) {
        let scale = (2.0 * self.hbar).sqrt();
        (self.alpha.re * scale, self.alpha.im * scale)
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    /// Closed-form position wavefunction, phase fixed by the Fock expansion
    /// `exp(-|alpha|^2/2) sum alpha^n / sqrt(n!) |n>`.
    pub fn wavefunction(&self, q: f64) -> Complex64 {
        let (q0, p0) = self.centroid();
        let h = self.hbar;
        let norm = (PI * h).powf(-0.25);
        let dq = q - q0;
        let arg = Complex64::new(-dq * dq / (2.0 * h), (p0 * q - 0.5 * p0 * q0) / h);
        norm * arg.exp()
    }
}
