//! Material and thermodynamic constants, the gas-mass / liquid-volume pair,
//! and their validation.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{BubbleError, Result};

/// Relative tolerance for the adiabatic relation γ = 1 + 𝔎/c_g when γ is
/// supplied explicitly (decimal inputs cannot represent e.g. 5/3 exactly).
pub const GAMMA_REL_TOL: f64 = 1e-12;

/// All material and thermodynamic constants of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Surface tension σ at the gas–liquid interface (> 0).
    pub sigma: f64,
    /// Surface tension σ̄ at the external free surface (≥ 0).
    pub sigma_bar: f64,
    /// Liquid dynamic viscosity μ_l (> 0).
    pub mu_l: f64,
    /// Liquid density ρ_l (> 0).
    pub rho_l: f64,
    /// Gas thermal conductivity κ (> 0).
    pub kappa: f64,
    /// Gas specific heat c_g (> 0).
    pub c_g: f64,
    /// Ratio 𝔎 of the gas constant to the molar mass (> 0).
    #[serde(rename = "R_spec")]
    pub r_spec: f64,
    /// External temperature T∞ (> 0).
    #[serde(rename = "T_inf")]
    pub t_inf: f64,
    /// Adiabatic constant γ = 1 + 𝔎/c_g.
    pub gamma: f64,
}

impl PhysicalParams {
    /// Builds a parameter record with γ derived from 𝔎 and c_g, validating it.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sigma: f64,
        sigma_bar: f64,
        mu_l: f64,
        rho_l: f64,
        kappa: f64,
        c_g: f64,
        r_spec: f64,
        t_inf: f64,
    ) -> Result<Self> {
        validate_params(PhysicalParams {
            sigma,
            sigma_bar,
            mu_l,
            rho_l,
            kappa,
            c_g,
            r_spec,
            t_inf,
            gamma: 1.0 + r_spec / c_g,
        })
    }

    /// The reference parameter set σ=σ̄=μ_l=ρ_l=κ=1, c_g=3, 𝔎=2, T∞=1 (γ=5/3).
    pub fn reference() -> Self {
        PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 3.0, 2.0, 1.0)
            .expect("reference parameters are admissible")
    }

    /// Product 𝔎T∞ that converts density to pressure.
    pub fn rt(&self) -> f64 {
        self.r_spec * self.t_inf
    }

    /// Surface-tension ratio β = σ̄/σ.
    pub fn beta(&self) -> f64 {
        self.sigma_bar / self.sigma
    }

    /// Copy with a different external temperature.
    pub fn with_t_inf(mut self, t_inf: f64) -> Result<Self> {
        self.t_inf = t_inf;
        validate_params(self)
    }

    /// Copy with a different external surface tension.
    pub fn with_sigma_bar(mut self, sigma_bar: f64) -> Result<Self> {
        self.sigma_bar = sigma_bar;
        validate_params(self)
    }
}

/// Checks every invariant of [`PhysicalParams`] and returns it unchanged
/// (with γ normalised to 1 + 𝔎/c_g) or reports the first violated one.
pub fn validate_params(p: PhysicalParams) -> Result<PhysicalParams> {
    let positive = [
        ("sigma", p.sigma),
        ("mu_l", p.mu_l),
        ("rho_l", p.rho_l),
        ("kappa", p.kappa),
        ("c_g", p.c_g),
        ("R_spec", p.r_spec),
        ("T_inf", p.t_inf),
    ];
    for (name, value) in positive {
        if !value.is_finite() {
            return Err(BubbleError::field(name, format!("{name} must be finite")));
        }
        if value <= 0.0 {
            return Err(BubbleError::field(name, format!("{name} must be positive")));
        }
    }
    if !p.sigma_bar.is_finite() || p.sigma_bar < 0.0 {
        return Err(BubbleError::field(
            "sigma_bar",
            "sigma_bar must be non-negative and finite",
        ));
    }
    let derived = 1.0 + p.r_spec / p.c_g;
    if !p.gamma.is_finite() || (p.gamma - derived).abs() > GAMMA_REL_TOL * derived {
        return Err(BubbleError::field(
            "gamma",
            format!("gamma must equal 1 + R_spec/c_g = {derived}, got {}", p.gamma),
        ));
    }
    Ok(PhysicalParams {
        gamma: derived,
        ..p
    })
}

/// Liquid volume: finite, or the infinite-volume sentinel used for limit
/// checks (all V̄-dependent quantities then take their analytic limits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Volume {
    Finite(f64),
    Infinite,
}

impl Volume {
    /// Modified volume V̄ = 3V/(4π), `None` for the infinite sentinel.
    pub fn v_bar(&self) -> Option<f64> {
        match self {
            Volume::Finite(v) => Some(3.0 * v / (4.0 * std::f64::consts::PI)),
            Volume::Infinite => None,
        }
    }

    /// Volume as a float (`+∞` for the sentinel).
    pub fn value(&self) -> f64 {
        match self {
            Volume::Finite(v) => *v,
            Volume::Infinite => f64::INFINITY,
        }
    }

    /// Volume whose modified volume is `v_bar`.
    pub fn from_v_bar(v_bar: f64) -> Self {
        Volume::Finite(4.0 * std::f64::consts::PI * v_bar / 3.0)
    }
}

impl Serialize for Volume {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Volume::Finite(v) => s.serialize_f64(*v),
            Volume::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Volume {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        volume_from_value(&v).map_err(serde::de::Error::custom)
    }
}

fn volume_from_value(v: &Value) -> Result<Volume> {
    match v {
        Value::Number(n) => Ok(Volume::Finite(n.as_f64().unwrap_or(f64::NAN))),
        Value::String(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => {
            Ok(Volume::Infinite)
        }
        _ => Err(BubbleError::field("V", "V must be a number or \"inf\"")),
    }
}

/// Gas mass and liquid volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassVolumePair {
    /// Total gas mass (> 0).
    #[serde(rename = "M")]
    pub m: f64,
    /// Liquid volume (> 0, or infinite).
    #[serde(rename = "V")]
    pub v: Volume,
}

impl MassVolumePair {
    /// Validated constructor.
    pub fn new(m: f64, v: Volume) -> Result<Self> {
        if !m.is_finite() || m <= 0.0 {
            return Err(BubbleError::field("M", "M must be positive"));
        }
        if let Volume::Finite(vol) = v {
            if !vol.is_finite() || vol <= 0.0 {
                return Err(BubbleError::field("V", "V must be positive"));
            }
        }
        Ok(MassVolumePair { m, v })
    }

    /// Modified volume V̄ = 3V/(4π).
    pub fn v_bar(&self) -> Option<f64> {
        self.v.v_bar()
    }
}

const PARAM_KEYS: [&str; 11] = [
    "sigma", "sigma_bar", "mu_l", "rho_l", "kappa", "c_g", "R_spec", "T_inf", "gamma", "M", "V",
];

/// Parses the JSON parameter block with keys exactly
/// `sigma, sigma_bar, mu_l, rho_l, kappa, c_g, R_spec, T_inf, gamma, M, V`
/// (`gamma` optional). Unknown keys are rejected; missing keys are named.
pub fn params_from_json(block: &Value) -> Result<(PhysicalParams, MassVolumePair)> {
    let map: &Map<String, Value> = block
        .as_object()
        .ok_or_else(|| BubbleError::Parse("parameter block must be a JSON object".into()))?;
    for key in map.keys() {
        if !PARAM_KEYS.contains(&key.as_str()) {
            return Err(BubbleError::field(key, format!("unknown key \"{key}\"")));
        }
    }
    let num = |key: &str| -> Result<f64> {
        let v = map
            .get(key)
            .ok_or_else(|| BubbleError::MissingKey(key.to_string()))?;
        v.as_f64()
            .ok_or_else(|| BubbleError::field(key, format!("{key} must be a number")))
    };
    let sigma = num("sigma")?;
    let sigma_bar = num("sigma_bar")?;
    let mu_l = num("mu_l")?;
    let rho_l = num("rho_l")?;
    let kappa = num("kappa")?;
    let c_g = num("c_g")?;
    let r_spec = num("R_spec")?;
    let t_inf = num("T_inf")?;
    let gamma = match map.get("gamma") {
        None | Some(Value::Null) => 1.0 + r_spec / c_g,
        Some(_) => num("gamma")?,
    };
    let m = num("M")?;
    let v = volume_from_value(
        map.get("V")
            .ok_or_else(|| BubbleError::MissingKey("V".to_string()))?,
    )?;
    let params = validate_params(PhysicalParams {
        sigma,
        sigma_bar,
        mu_l,
        rho_l,
        kappa,
        c_g,
        r_spec,
        t_inf,
        gamma,
    })?;
    Ok((params, MassVolumePair::new(m, v)?))
}

/// Serialises parameters and the mass-volume pair back into the flat block.
pub fn params_to_json(p: &PhysicalParams, mv: &MassVolumePair) -> Value {
    serde_json::json!({
        "sigma": p.sigma,
        "sigma_bar": p.sigma_bar,
        "mu_l": p.mu_l,
        "rho_l": p.rho_l,
        "kappa": p.kappa,
        "c_g": p.c_g,
        "R_spec": p.r_spec,
        "T_inf": p.t_inf,
        "gamma": p.gamma,
        "M": mv.m,
        "V": serde_json::to_value(mv.v).expect("volume serialises"),
    })
}
