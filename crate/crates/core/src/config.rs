//! Scenario description, unit conversion and validation.
//!
//! [`NetworkParams`] carries the values the way they are usually written down
//! (dB, dBm, BS/km², degrees). [`validate`] checks every invariant and
//! produces [`ValidatedParams`], which holds linear SI quantities and is the
//! only thing the analytical and simulation engines accept.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::OnceLock;

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// dBm to watts.
pub fn dbm_to_watts(x_dbm: f64) -> f64 {
    10f64.powf((x_dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Per-km² to per-m².
pub fn per_km2_to_per_m2(x: f64) -> f64 {
    x * 1e-6
}

/// The three serving/interfering tiers: LoS terrestrial, NLoS terrestrial,
/// aerial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TierLabel {
    L,
    N,
    A,
}

impl TierLabel {
    /// Also the tie-break priority order used by the simulator.
    pub const ALL: [TierLabel; 3] = [TierLabel::L, TierLabel::N, TierLabel::A];

    pub fn index(self) -> usize {
        match self {
            TierLabel::L => 0,
            TierLabel::N => 1,
            TierLabel::A => 2,
        }
    }

    pub fn is_terrestrial(self) -> bool {
        !matches!(self, TierLabel::A)
    }
}

impl fmt::Display for TierLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TierLabel::L => "L",
            TierLabel::N => "N",
            TierLabel::A => "A",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumPolicy {
    /// Orthogonal: terrestrial and aerial tiers on different channels.
    #[serde(alias = "OSS")]
    Oss,
    /// Non-orthogonal: all tiers share the channel.
    #[serde(alias = "NOSS", alias = "n-oss", alias = "N-OSS")]
    Noss,
}

impl fmt::Display for SpectrumPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumPolicy::Oss => "oss",
            SpectrumPolicy::Noss => "noss",
        })
    }
}

/// Unit of the elevation angle fed to the fitted LoS curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    #[default]
    Degrees,
    Radians,
}

/// How terrestrial links pick their LoS/NLoS state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LosModel {
    /// `c − a·exp(−b·θ)` with the environment's fit.
    #[default]
    Fitted,
    /// Every terrestrial link is LoS.
    AlwaysLos,
    /// Fixed LoS probability regardless of geometry.
    Constant(f64),
}

/// Raw ITU building statistics: built-up ratio, buildings per km², Rayleigh
/// height scale in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItuEnvironment {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl ItuEnvironment {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("itu.alpha", self.alpha),
            ("itu.beta", self.beta),
            ("itu.delta", self.delta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Fitted LoS curve `c − a·exp(−b·θ)` (b per degree) and the terrestrial
/// BS height the fit was made for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvironmentRepr")]
pub struct Environment {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub h_t: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EnvironmentRepr {
    Named(String),
    Full {
        #[serde(default)]
        name: Option<String>,
        a: f64,
        b: f64,
        c: f64,
        h_t: f64,
    },
}

impl TryFrom<EnvironmentRepr> for Environment {
    type Error = String;
    fn try_from(r: EnvironmentRepr) -> std::result::Result<Self, String> {
        match r {
            EnvironmentRepr::Named(n) => {
                Environment::by_name(&n).ok_or_else(|| format!("unknown environment `{n}`"))
            }
            EnvironmentRepr::Full { name, a, b, c, h_t } => Ok(Environment {
                name: name.unwrap_or_else(|| "custom".into()),
                a,
                b,
                c,
                h_t,
            }),
        }
    }
}

/// Built-in environment classes.
pub const ENVIRONMENT_NAMES: [&str; 4] = ["suburban", "urban", "dense_urban", "highrise"];

impl Environment {
    pub fn suburban() -> Self {
        Self::named("suburban", 1.0, 6.581, 1.0, 30.0)
    }
    pub fn urban() -> Self {
        Self::named("urban", 1.0, 0.151, 1.0, 19.0)
    }
    pub fn dense_urban() -> Self {
        Self::named("dense_urban", 1.0, 0.106, 1.0, 25.0)
    }
    pub fn highrise() -> Self {
        Self::named("highrise", 1.124, 0.049, 1.024, 62.0)
    }

    fn named(name: &str, a: f64, b: f64, c: f64, h_t: f64) -> Self {
        Environment {
            name: name.into(),
            a,
            b,
            c,
            h_t,
        }
    }

    /// Accepts the built-in names plus a few spellings ("dense-urban",
    /// "highrise_urban", ...).
    pub fn by_name(name: &str) -> Option<Self> {
        let key: String = name
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        match key.as_str() {
            "suburban" => Some(Self::suburban()),
            "urban" => Some(Self::urban()),
            "denseurban" | "dense" => Some(Self::dense_urban()),
            "highrise" | "highriseurban" => Some(Self::highrise()),
            _ => None,
        }
    }

    /// ITU building statistics for the built-in classes.
    pub fn itu(&self) -> Option<ItuEnvironment> {
        let (alpha, beta, delta) = match self.name.as_str() {
            "suburban" => (0.1, 750.0, 8.0),
            "urban" => (0.3, 500.0, 15.0),
            "dense_urban" => (0.5, 300.0, 20.0),
            "highrise" => (0.5, 300.0, 50.0),
            _ => return None,
        };
        Some(ItuEnvironment { alpha, beta, delta })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.c.is_finite()) {
            return Err(invalid("environment", "a, b, c must be finite"));
        }
        if self.a < 0.0 {
            return Err(invalid("environment.a", format!("must be ≥ 0, got {}", self.a)));
        }
        if self.a > 0.0 && self.b <= 0.0 {
            return Err(invalid("environment.b", format!("must be > 0, got {}", self.b)));
        }
        if !(self.h_t >= 0.0 && self.h_t.is_finite()) {
            return Err(invalid("environment.h_t", format!("must be ≥ 0, got {}", self.h_t)));
        }
        Ok(())
    }
}

/// Scenario as written in a configuration file: powers in dBm, gains and
/// losses in dB, density per km², lengths in meters, angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    pub p_t_dbm: f64,
    pub p_a_dbm: f64,
    pub lambda_t_per_km2: f64,
    pub n: u32,
    pub r_d: f64,
    pub h_a: f64,
    pub h_u: f64,
    /// Terrestrial BS height; `None` takes the environment's value.
    pub h_t: Option<f64>,
    pub alpha_l: f64,
    pub alpha_n: f64,
    pub alpha_a: f64,
    // kept as reals so a fractional value is caught by validation rather
    // than by the parser
    pub m_l: f64,
    pub m_n: f64,
    pub m_a: f64,
    pub eta_l_db: f64,
    pub eta_n_db: f64,
    pub eta_a_db: f64,
    pub g_m_a_db: f64,
    pub g_s_a_db: f64,
    pub g_m_t_db: f64,
    pub g_s_t_db: f64,
    pub theta_b_a_deg: f64,
    pub sigma2_dbm: f64,
    pub policy: SpectrumPolicy,
    pub environment: Environment,
    pub los_model: LosModel,
    pub angle_unit: AngleUnit,
}

impl Default for NetworkParams {
    /// The reference parameter set (urban, N-OSS, h_U = 50 m, h_A = 300 m).
    fn default() -> Self {
        NetworkParams {
            p_t_dbm: 43.0,
            p_a_dbm: 30.0,
            lambda_t_per_km2: 5.0,
            n: 10,
            r_d: 2000.0,
            h_a: 300.0,
            h_u: 50.0,
            h_t: Some(20.0),
            alpha_l: 2.5,
            alpha_n: 3.5,
            alpha_a: 2.0,
            m_l: 2.0,
            m_n: 1.0,
            m_a: 2.0,
            eta_l_db: -3.0,
            eta_n_db: -20.0,
            eta_a_db: -1.0,
            g_m_a_db: 0.0,
            g_s_a_db: -20.0,
            g_m_t_db: 0.0,
            g_s_t_db: -15.0,
            theta_b_a_deg: 18.0,
            sigma2_dbm: -113.0,
            policy: SpectrumPolicy::Noss,
            environment: Environment::urban(),
            los_model: LosModel::Fitted,
            angle_unit: AngleUnit::Degrees,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<ValidatedParams> {
        validate(self)
    }
}

/// Immutable, checked scenario in linear SI units. Obtain one through
/// [`validate`]; derived tables are built lazily and shared.
#[derive(Debug)]
pub struct ValidatedParams {
    raw: NetworkParams,
    p_t: f64,
    p_a: f64,
    lambda_t: f64,
    h_t: f64,
    alpha: [f64; 3],
    m: [u32; 3],
    eta: [f64; 3],
    mu: [f64; 3],
    g_m_a: f64,
    g_s_a: f64,
    g_m_t: f64,
    g_s_t: f64,
    q_a: f64,
    sigma2: f64,
    h_ut: f64,
    h_ua: f64,
    d: f64,
    pub(crate) intensity: OnceLock<crate::distributions::IntensityTables>,
}

impl Clone for ValidatedParams {
    fn clone(&self) -> Self {
        ValidatedParams {
            raw: self.raw.clone(),
            intensity: OnceLock::new(),
            ..*self
        }
    }
}

fn check_finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn check_integer_m(field: &'static str, v: f64) -> Result<u32> {
    if !(v.is_finite() && v >= 1.0 && v == v.round() && v <= 64.0) {
        return Err(invalid(
            field,
            format!("Nakagami parameter must be an integer in [1, 64], got {v}"),
        ));
    }
    Ok(v as u32)
}

/// Checks every invariant and derives the linear quantities.
pub fn validate(raw: &NetworkParams) -> Result<ValidatedParams> {
    for (field, v) in [
        ("p_t_dbm", raw.p_t_dbm),
        ("p_a_dbm", raw.p_a_dbm),
        ("eta_l_db", raw.eta_l_db),
        ("eta_n_db", raw.eta_n_db),
        ("eta_a_db", raw.eta_a_db),
        ("g_m_a_db", raw.g_m_a_db),
        ("g_s_a_db", raw.g_s_a_db),
        ("g_m_t_db", raw.g_m_t_db),
        ("g_s_t_db", raw.g_s_t_db),
        ("sigma2_dbm", raw.sigma2_dbm),
    ] {
        check_finite(field, v)?;
    }
    if !(raw.lambda_t_per_km2 >= 0.0 && raw.lambda_t_per_km2.is_finite()) {
        return Err(invalid(
            "lambda_t_per_km2",
            format!("density must be finite and non-negative, got {}", raw.lambda_t_per_km2),
        ));
    }
    if raw.n < 1 {
        return Err(invalid("n", "at least one aerial BS is required"));
    }
    if !(raw.r_d > 0.0 && raw.r_d.is_finite()) {
        return Err(invalid("r_d", format!("disc radius must be > 0, got {}", raw.r_d)));
    }
    raw.environment.validate()?;
    let h_t = raw.h_t.unwrap_or(raw.environment.h_t);
    for (field, v) in [("h_t", h_t), ("h_u", raw.h_u), ("h_a", raw.h_a)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(invalid(field, format!("height must be finite and ≥ 0, got {v}")));
        }
    }
    if raw.h_u <= h_t {
        return Err(invalid(
            "h_u",
            format!("user must fly above terrestrial BSs (h_T < h_U), got h_U = {} ≤ h_T = {h_t}", raw.h_u),
        ));
    }
    if raw.h_u >= raw.h_a {
        return Err(invalid(
            "h_a",
            format!("user must fly below aerial BSs (h_U < h_A), got h_U = {} ≥ h_A = {}", raw.h_u, raw.h_a),
        ));
    }
    let m = [
        check_integer_m("m_l", raw.m_l)?,
        check_integer_m("m_n", raw.m_n)?,
        check_integer_m("m_a", raw.m_a)?,
    ];
    for (field, v) in [("alpha_l", raw.alpha_l), ("alpha_n", raw.alpha_n)] {
        // the infinite terrestrial field only has finite interference for α > 2
        if !(v > 2.0 && v.is_finite()) {
            return Err(invalid(field, format!("terrestrial path-loss exponent must exceed 2, got {v}")));
        }
    }
    if !(raw.alpha_a > 0.0 && raw.alpha_a.is_finite()) {
        return Err(invalid("alpha_a", format!("must be > 0, got {}", raw.alpha_a)));
    }
    if !(raw.theta_b_a_deg > 0.0 && raw.theta_b_a_deg <= 180.0) {
        return Err(invalid(
            "theta_b_a_deg",
            format!("beamwidth must lie in (0, 180] degrees, got {}", raw.theta_b_a_deg),
        ));
    }
    if raw.g_s_a_db > raw.g_m_a_db {
        return Err(invalid("g_s_a_db", "aerial sidelobe gain exceeds the mainlobe gain"));
    }
    if raw.g_s_t_db > raw.g_m_t_db {
        return Err(invalid("g_s_t_db", "terrestrial sidelobe gain exceeds the mainlobe gain"));
    }
    if let LosModel::Constant(p) = raw.los_model {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("los_model", format!("constant LoS probability must be in [0, 1], got {p}")));
        }
    }

    let p_t = dbm_to_watts(raw.p_t_dbm);
    let p_a = dbm_to_watts(raw.p_a_dbm);
    let eta = [
        db_to_linear(raw.eta_l_db),
        db_to_linear(raw.eta_n_db),
        db_to_linear(raw.eta_a_db),
    ];
    let g_m_a = db_to_linear(raw.g_m_a_db);
    let g_s_a = db_to_linear(raw.g_s_a_db);
    let g_m_t = db_to_linear(raw.g_m_t_db);
    let g_s_t = db_to_linear(raw.g_s_t_db);
    let mu = [p_t * eta[0] * g_s_t, p_t * eta[1] * g_s_t, p_a * g_m_a * eta[2]];
    let h_ut = raw.h_u - h_t;
    let h_ua = raw.h_a - raw.h_u;
    Ok(ValidatedParams {
        raw: raw.clone(),
        p_t,
        p_a,
        lambda_t: per_km2_to_per_m2(raw.lambda_t_per_km2),
        h_t,
        alpha: [raw.alpha_l, raw.alpha_n, raw.alpha_a],
        m,
        eta,
        mu,
        g_m_a,
        g_s_a,
        g_m_t,
        g_s_t,
        q_a: raw.theta_b_a_deg / 180.0,
        sigma2: dbm_to_watts(raw.sigma2_dbm),
        h_ut,
        h_ua,
        d: raw.r_d.hypot(h_ua),
        intensity: OnceLock::new(),
    })
}

impl ValidatedParams {
    /// Re-validates a modified copy of the raw parameters.
    pub fn with(&self, edit: impl FnOnce(&mut NetworkParams)) -> Result<ValidatedParams> {
        let mut raw = self.raw.clone();
        edit(&mut raw);
        validate(&raw)
    }

    pub fn raw(&self) -> &NetworkParams {
        &self.raw
    }
    pub fn p_t(&self) -> f64 {
        self.p_t
    }
    pub fn p_a(&self) -> f64 {
        self.p_a
    }
    /// Terrestrial density in BS per m².
    pub fn lambda_t(&self) -> f64 {
        self.lambda_t
    }
    pub fn n(&self) -> u32 {
        self.raw.n
    }
    pub fn r_d(&self) -> f64 {
        self.raw.r_d
    }
    pub fn h_a(&self) -> f64 {
        self.raw.h_a
    }
    pub fn h_u(&self) -> f64 {
        self.raw.h_u
    }
    pub fn h_t(&self) -> f64 {
        self.h_t
    }
    pub fn h_ut(&self) -> f64 {
        self.h_ut
    }
    pub fn h_ua(&self) -> f64 {
        self.h_ua
    }
    /// Largest user-to-aerial-BS distance, `sqrt(r_D² + h_UA²)`.
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn alpha(&self, t: TierLabel) -> f64 {
        self.alpha[t.index()]
    }
    pub fn m(&self, t: TierLabel) -> u32 {
        self.m[t.index()]
    }
    pub fn eta(&self, t: TierLabel) -> f64 {
        self.eta[t.index()]
    }
    /// Average-power constant: `P_T·η·g_s` for terrestrial tiers,
    /// `P_A·G_m·η_A` for the aerial tier.
    pub fn mu(&self, t: TierLabel) -> f64 {
        self.mu[t.index()]
    }
    pub fn g_m_a(&self) -> f64 {
        self.g_m_a
    }
    pub fn g_s_a(&self) -> f64 {
        self.g_s_a
    }
    pub fn g_m_t(&self) -> f64 {
        self.g_m_t
    }
    pub fn g_s_t(&self) -> f64 {
        self.g_s_t
    }
    /// Probability that an interfering aerial BS points its mainlobe at the user.
    pub fn q_a(&self) -> f64 {
        self.q_a
    }
    pub fn theta_b_a_deg(&self) -> f64 {
        self.raw.theta_b_a_deg
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
    pub fn policy(&self) -> SpectrumPolicy {
        self.raw.policy
    }
    pub fn environment(&self) -> &Environment {
        &self.raw.environment
    }
    pub fn los_model(&self) -> LosModel {
        self.raw.los_model
    }
    pub fn angle_unit(&self) -> AngleUnit {
        self.raw.angle_unit
    }
}
