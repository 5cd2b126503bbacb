//! Flat JSON run configuration and command-line overrides.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qwalk::coins::{Coin2, Coin4};
use qwalk::evolution::{Boundary, DefectMap, WalkCoin, WalkSpec};
use qwalk::statespace::{CoinState, Dimensionality, Position};
use serde_json::{json, Map, Value};

/// A configuration or argument problem; maps to exit code 1.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(key: &str, msg: impl fmt::Display) -> anyhow::Error {
    Invalid(format!("invalid `{key}`: {msg}")).into()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoinChoice {
    Hadamard,
    Identity,
    /// `A(θ, ψ, φ)` on each axis.
    Su2 { theta: f64, psi: f64, phi: f64 },
    FractionalSwap { tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectKind {
    None,
    LineY,
    CrossXY,
    Point,
}

impl DefectKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(DefectKind::None),
            "line_y" => Ok(DefectKind::LineY),
            "cross_xy" => Ok(DefectKind::CrossXY),
            "point" => Ok(DefectKind::Point),
            other => Err(invalid(
                "defect",
                format!("{other:?} (expected none, line_y, cross_xy or point)"),
            )),
        }
    }

    fn name(self) -> &'static str {
        match self {
            DefectKind::None => "none",
            DefectKind::LineY => "line_y",
            DefectKind::CrossXY => "cross_xy",
            DefectKind::Point => "point",
        }
    }

    pub fn with_phase(self, phi: f64) -> DefectMap {
        match self {
            DefectKind::None => DefectMap::None,
            DefectKind::LineY => DefectMap::LineY(phi),
            DefectKind::CrossXY => DefectMap::CrossXY(phi),
            DefectKind::Point => DefectMap::Point(phi),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: Dimensionality,
    pub steps: usize,
    /// Hard cap on `steps`.
    pub max_steps: usize,
    pub halfwidth: Option<usize>,
    pub coin: CoinChoice,
    pub defect: DefectKind,
    pub phi: f64,
    /// Sweep grid.
    pub phis: Vec<f64>,
    pub initial_coin: String,
    pub origin: (i64, i64),
    pub boundary: Boundary,
    pub per_step: bool,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub reference: Option<PathBuf>,
    pub l: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: Dimensionality::Two,
            steps: 10,
            max_steps: 2000,
            halfwidth: None,
            coin: CoinChoice::Hadamard,
            defect: DefectKind::None,
            phi: 0.0,
            phis: Vec::new(),
            initial_coin: "symmetric".into(),
            origin: (0, 0),
            boundary: Boundary::Open,
            per_step: false,
            out: PathBuf::from("qwalk-out"),
            threads: None,
            reference: None,
            l: 2,
            trials: 50,
            seed: 7,
        }
    }
}

/// Angle in radians: a number, or a string holding a number or `pi:<k>` for `kπ`.
pub fn parse_angle(key: &str, v: &Value) -> Result<f64> {
    let phi = match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| invalid(key, "not a number"))?,
        Value::String(s) => parse_angle_str(key, s)?,
        other => return Err(invalid(key, format!("expected an angle, got {other}"))),
    };
    if !phi.is_finite() {
        return Err(invalid(key, format!("angle {phi} is not finite")));
    }
    Ok(phi)
}

pub fn parse_angle_str(key: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    let phi = if s == "pi" {
        PI
    } else if let Some(k) = s.strip_prefix("pi:") {
        k.trim()
            .parse::<f64>()
            .map_err(|_| invalid(key, format!("bad multiple of pi {s:?}")))?
            * PI
    } else {
        s.parse::<f64>().map_err(|_| invalid(key, format!("bad angle {s:?}")))?
    };
    if !phi.is_finite() {
        return Err(invalid(key, format!("angle {s:?} is not finite")));
    }
    Ok(phi)
}

fn uint(key: &str, v: &Value) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| invalid(key, format!("expected a nonnegative integer, got {v}")))
}

fn int(key: &str, v: &Value) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| invalid(key, format!("expected an integer, got {v}")))
}

fn string<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| invalid(key, format!("expected a string, got {v}")))
}

fn number(key: &str, v: &Value) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| invalid(key, format!("expected a number, got {v}")))?;
    if !x.is_finite() {
        return Err(invalid(key, "not finite"));
    }
    Ok(x)
}

pub fn parse_dim(s: &str) -> Result<Dimensionality> {
    match s {
        "1D" | "1d" | "1" => Ok(Dimensionality::One),
        "2D" | "2d" | "2" => Ok(Dimensionality::Two),
        other => Err(invalid("dim", format!("{other:?} (expected 1D or 2D)"))),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| Invalid(format!("config is not valid JSON: {e}")))?;
        let Value::Object(map) = root else {
            return Err(Invalid("config must be a JSON object".into()).into());
        };
        let mut cfg = RunConfig::default();
        let (mut coin_name, mut theta, mut psi, mut coin_phi, mut tau) =
            ("hadamard".to_string(), 0.0, 0.0, 0.0, 0.5);
        let mut origin_y_set = false;
        for (key, v) in &map {
            let k = key.as_str();
            match k {
                "dim" => cfg.dim = parse_dim(string(k, v)?)?,
                "steps" => cfg.steps = uint(k, v)? as usize,
                "max_steps" => cfg.max_steps = uint(k, v)? as usize,
                "halfwidth" => {
                    cfg.halfwidth = if v.is_null() { None } else { Some(uint(k, v)? as usize) }
                }
                "coin" => coin_name = string(k, v)?.to_string(),
                "coin_theta" => theta = parse_angle(k, v)?,
                "coin_psi" => psi = parse_angle(k, v)?,
                "coin_phi" => coin_phi = parse_angle(k, v)?,
                "tau" => tau = number(k, v)?,
                "defect" => cfg.defect = DefectKind::parse(string(k, v)?)?,
                "phi" => cfg.phi = parse_angle(k, v)?,
                "phis" => {
                    let items = v
                        .as_array()
                        .ok_or_else(|| invalid(k, "expected a list of angles"))?;
                    cfg.phis = items
                        .iter()
                        .map(|a| parse_angle(k, a))
                        .collect::<Result<_>>()?;
                }
                "initial_coin" => cfg.initial_coin = string(k, v)?.to_string(),
                "origin_x" => cfg.origin.0 = int(k, v)?,
                "origin_y" => {
                    cfg.origin.1 = int(k, v)?;
                    origin_y_set = true;
                }
                "boundary" => {
                    cfg.boundary = match string(k, v)? {
                        "open" => Boundary::Open,
                        "periodic" => Boundary::Periodic,
                        other => {
                            return Err(invalid(k, format!("{other:?} (expected open or periodic)")))
                        }
                    }
                }
                "per_step" => {
                    cfg.per_step = v
                        .as_bool()
                        .ok_or_else(|| invalid(k, format!("expected true or false, got {v}")))?
                }
                "out" => cfg.out = PathBuf::from(string(k, v)?),
                "threads" => cfg.threads = Some(uint(k, v)? as usize),
                "reference" => cfg.reference = Some(PathBuf::from(string(k, v)?)),
                "l" => cfg.l = uint(k, v)? as usize,
                "trials" => cfg.trials = uint(k, v)? as usize,
                "seed" => cfg.seed = uint(k, v)?,
                other => return Err(Invalid(format!("unknown config key `{other}`")).into()),
            }
        }
        cfg.coin = match coin_name.as_str() {
            "hadamard" => CoinChoice::Hadamard,
            "identity" => CoinChoice::Identity,
            "su2" => CoinChoice::Su2 { theta, psi, phi: coin_phi },
            "fractional_swap" => CoinChoice::FractionalSwap { tau },
            other => {
                return Err(invalid(
                    "coin",
                    format!("{other:?} (expected hadamard, identity, su2 or fractional_swap)"),
                ))
            }
        };
        if cfg.dim == Dimensionality::One && origin_y_set && cfg.origin.1 != 0 {
            return Err(invalid("origin_y", "a 1D walk has no y axis"));
        }
        Ok(cfg)
    }

    pub fn set_steps(&mut self, steps: i64) -> Result<()> {
        if steps < 0 {
            return Err(invalid("steps", format!("must be nonnegative, got {steps}")));
        }
        self.steps = steps as usize;
        Ok(())
    }

    pub fn check(&self) -> Result<()> {
        if self.steps > self.max_steps {
            return Err(invalid(
                "steps",
                format!("{} exceeds the cap of {} (raise `max_steps`)", self.steps, self.max_steps),
            ));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        Ok(())
    }

    fn walk_coin(&self) -> Result<WalkCoin> {
        let two = self.dim == Dimensionality::Two;
        Ok(match self.coin {
            CoinChoice::Hadamard => WalkCoin::hadamard(self.dim),
            CoinChoice::Identity if two => WalkCoin::Two(Coin4::identity().into()),
            CoinChoice::Identity => WalkCoin::One(Coin2::identity().into()),
            CoinChoice::Su2 { theta, psi, phi } => {
                let a = Coin2::su2_from_angles(theta, psi, phi);
                if two {
                    WalkCoin::Two(Coin4::tensor(&a, &a).into())
                } else {
                    WalkCoin::One(a.into())
                }
            }
            CoinChoice::FractionalSwap { tau } if two => {
                WalkCoin::Two(Coin4::fractional_swap(tau).into())
            }
            CoinChoice::FractionalSwap { .. } => {
                return Err(invalid("coin", "fractional_swap needs a 2D walk"))
            }
        })
    }

    fn coin_state(&self) -> Result<CoinState> {
        let s = self.initial_coin.as_str();
        if s == "symmetric" {
            return Ok(match self.dim {
                Dimensionality::One => CoinState::symmetric_1d(),
                Dimensionality::Two => CoinState::symmetric_2d(),
            });
        }
        let bits = self.dim.axes();
        if s.len() != bits || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(invalid(
                "initial_coin",
                format!("{s:?} (expected symmetric or a {bits}-bit basis label)"),
            ));
        }
        let k = usize::from_str_radix(s, 2).expect("checked binary");
        Ok(CoinState::basis(self.dim, k)?)
    }

    /// Walk specification with defect phase `phi`.
    pub fn walk_spec(&self, phi: f64) -> Result<WalkSpec> {
        let origin = match self.dim {
            Dimensionality::One => Position::One(self.origin.0),
            Dimensionality::Two => Position::Two(self.origin.0, self.origin.1),
        };
        let spec = WalkSpec {
            steps: self.steps,
            halfwidth: self.halfwidth,
            coin: self.walk_coin()?,
            defect: self.defect.with_phase(phi),
            origin,
            initial_coin: self.coin_state()?,
            boundary: self.boundary,
        };
        spec.validate()?;
        spec.lattice()
            .site_index(origin)
            .map_err(|e| invalid("origin_x/origin_y", e))?;
        Ok(spec)
    }

    /// Settings that determine the numbers, for echoing into summaries.
    /// Paths and the thread count are left out so re-runs compare equal.
    pub fn echo(&self, phi: Option<f64>) -> Value {
        let mut m = Map::new();
        m.insert("dim".into(), json!(if self.dim == Dimensionality::One { "1D" } else { "2D" }));
        m.insert("steps".into(), json!(self.steps));
        m.insert("max_steps".into(), json!(self.max_steps));
        m.insert("halfwidth".into(), json!(self.halfwidth));
        match self.coin {
            CoinChoice::Hadamard => {
                m.insert("coin".into(), json!("hadamard"));
            }
            CoinChoice::Identity => {
                m.insert("coin".into(), json!("identity"));
            }
            CoinChoice::Su2 { theta, psi, phi } => {
                m.insert("coin".into(), json!("su2"));
                m.insert("coin_theta".into(), json!(theta));
                m.insert("coin_psi".into(), json!(psi));
                m.insert("coin_phi".into(), json!(phi));
            }
            CoinChoice::FractionalSwap { tau } => {
                m.insert("coin".into(), json!("fractional_swap"));
                m.insert("tau".into(), json!(tau));
            }
        }
        m.insert("defect".into(), json!(self.defect.name()));
        match phi {
            Some(p) => m.insert("phi".into(), json!(p)),
            None => m.insert("phis".into(), json!(self.phis)),
        };
        m.insert("initial_coin".into(), json!(self.initial_coin));
        m.insert("origin_x".into(), json!(self.origin.0));
        if self.dim == Dimensionality::Two {
            m.insert("origin_y".into(), json!(self.origin.1));
        }
        m.insert(
            "boundary".into(),
            json!(if self.boundary == Boundary::Open { "open" } else { "periodic" }),
        );
        Value::Object(m)
    }
}
