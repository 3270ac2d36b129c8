//! Registered problems, addressable by name with JSON parameter overrides.
//!
//! | name | N | m | field | surfaces |
//! |---|---|---|---|---|
//! | `trust-funds` | 2 | 1 | `[-6|y1|, 6|y1|] x [-6|y2|, 6|y2|]` | `arccot(y1 + y2) / pi` |
//! | `linear-fixed` | 1 | 1 | `{-y}` | `t = 0.5`, `I = 1` |
//! | `tanh-two-surface` | 1 | 2 | `[-1, 1]` | `0.25 + 0.1 tanh y`, `0.6 + 0.1 tanh y` |
//! | `singleton-linear` | 2 | 1 | `{(y2, -y1)}` | `0.5 + 0.05 tanh y1` |
//! | `broken-transversality` | 2 | 1 | `ball(0, 2)` | `y1 / 2 + 1 / 2` |
//! | `fixed-time-m3` | 2 | 3 | `ball(-y / 2, 1)` | `t = 0.25, 0.5, 0.75` |

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{contract, Result};
use crate::fields::{ConvexSet, SetField};
use crate::problem::{ImpulseSurface, InclusionProblem, StateBox};

/// Catalog entry name plus overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<StateBox>,
    #[serde(default)]
    pub seed: u64,
}

impl ProblemSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params: Map::new(),
            region: None,
            seed: 0,
        }
    }

    pub fn with_param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Parses `key=<json>`; a bare word that is not JSON is taken as a string.
    pub fn set_param(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| contract(format!("parameter `{assignment}` is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        self.params.insert(key.trim().to_string(), value);
        Ok(())
    }

    pub fn build(&self) -> Result<InclusionProblem> {
        build(self)
    }
}

pub const NAMES: [&str; 6] = [
    "trust-funds",
    "linear-fixed",
    "tanh-two-surface",
    "singleton-linear",
    "broken-transversality",
    "fixed-time-m3",
];

pub fn is_registered(name: &str) -> bool {
    NAMES.contains(&name)
}

/// Typed view of the overrides; every key must be consumed.
struct Params<'a> {
    map: &'a Map<String, Value>,
    allowed: &'static [&'static str],
}

impl<'a> Params<'a> {
    fn new(map: &'a Map<String, Value>, allowed: &'static [&'static str]) -> Result<Self> {
        if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(contract(format!(
                "unknown parameter `{key}` (allowed: {})",
                allowed.join(", ")
            )));
        }
        Ok(Self { map, allowed })
    }

    fn number(&self, key: &str, default: f64) -> Result<f64> {
        debug_assert!(self.allowed.contains(&key));
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| contract(format!("parameter `{key}` must be a finite number"))),
        }
    }

    fn vector(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Number(n)) if default.len() == 1 => {
                Ok(vec![n.as_f64().unwrap_or(f64::NAN)])
            }
            Some(Value::Array(items)) if items.len() == default.len() => items
                .iter()
                .map(|v| v.as_f64().filter(|x| x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| contract(format!("parameter `{key}` must hold finite numbers"))),
            Some(_) => Err(contract(format!(
                "parameter `{key}` must be an array of {} numbers",
                default.len()
            ))),
        }
        .and_then(|v| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(v)
            } else {
                Err(contract(format!(
                    "parameter `{key}` must hold finite numbers"
                )))
            }
        })
    }
}

pub fn build(spec: &ProblemSpec) -> Result<InclusionProblem> {
    let problem = match spec.name.as_str() {
        "trust-funds" => trust_funds(&spec.params)?,
        "linear-fixed" => linear_fixed(&spec.params)?,
        "tanh-two-surface" => tanh_two_surface(&spec.params)?,
        "singleton-linear" => singleton_linear(&spec.params)?,
        "broken-transversality" => broken_transversality(&spec.params)?,
        "fixed-time-m3" => fixed_time_m3(&spec.params)?,
        other => {
            return Err(contract(format!(
                "unknown problem `{other}` (known: {})",
                NAMES.join(", ")
            )))
        }
    };
    match &spec.region {
        Some(r) => problem.with_region(r.clone()),
        None => Ok(problem),
    }
}

fn horizon(p: &Params) -> Result<f64> {
    let a = p.number("horizon", 1.0)?;
    if a <= 0.0 {
        return Err(contract("horizon must be positive"));
    }
    Ok(a)
}

/// Transfer rule between the two funds, preserving `y1 + y2`.
pub fn trust_funds_impulse(rho: f64, y: &[f64]) -> Vec<f64> {
    let (y1, y2) = (y[0], y[1]);
    let k = 1.0 + 1.0 / rho;
    if y1 < 0.0 || y2 < 0.0 {
        vec![0.0, 0.0]
    } else if k * y1 < y2 {
        vec![-y1, y1]
    } else if k * y2 < y1 {
        vec![y2, -y2]
    } else {
        vec![rho * (y1 - y2), rho * (y2 - y1)]
    }
}

fn trust_funds(map: &Map<String, Value>) -> Result<InclusionProblem> {
    let p = Params::new(map, &["y0", "rho", "horizon"])?;
    let a = horizon(&p)?;
    let y0 = p.vector("y0", &[0.5, 0.5])?;
    let rho = p.number("rho", 0.5)?;
    if rho <= 0.0 {
        return Err(contract("rho must be positive"));
    }
    let field = SetField::new(
        2,
        |_, y: &[f64]| {
            let (b1, b2) = (6.0 * y[0].abs(), 6.0 * y[1].abs());
            ConvexSet::Box {
                lower: vec![-b1, -b2],
                upper: vec![b1, b2],
            }
        },
        |_| 6.0,
    );
    let surface = ImpulseSurface::new(
        |y| (0.5 * PI - (y[0] + y[1]).atan()) / PI,
        |y| {
            let s = y[0] + y[1];
            let g = -1.0 / (PI * (1.0 + s * s));
            vec![g, g]
        },
        move |y| trust_funds_impulse(rho, y),
    );
    InclusionProblem::new("trust-funds", a, y0, field, vec![surface])?
        .with_domain(StateBox {
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY, f64::INFINITY],
        })?
        .with_region(StateBox {
            lower: vec![0.0, 0.0],
            upper: vec![3.0, 3.0],
        })
}

fn linear_fixed(map: &Map<String, Value>) -> Result<InclusionProblem> {
    let p = Params::new(map, &["y0", "horizon"])?;
    let field = SetField::new(1, |_, y: &[f64]| ConvexSet::singleton(vec![-y[0]]), |_| 1.0);
    let surface = ImpulseSurface::fixed_time(0.5, |_| vec![1.0]);
    InclusionProblem::new(
        "linear-fixed",
        horizon(&p)?,
        p.vector("y0", &[1.0])?,
        field,
        vec![surface],
    )
}

fn tanh_two_surface(map: &Map<String, Value>) -> Result<InclusionProblem> {
    let p = Params::new(map, &["y0", "horizon"])?;
    let field = SetField::constant(ConvexSet::boxed(vec![-1.0], vec![1.0])?, 1.0);
    let surface = |c: f64| {
        ImpulseSurface::new(
            move |y| c + 0.1 * y[0].tanh(),
            |y| vec![0.1 / y[0].cosh().powi(2)],
            |_| vec![-0.5],
        )
    };
    InclusionProblem::new(
        "tanh-two-surface",
        horizon(&p)?,
        p.vector("y0", &[0.0])?,
        field,
        vec![surface(0.25), surface(0.6)],
    )
}

fn singleton_linear(map: &Map<String, Value>) -> Result<InclusionProblem> {
    let p = Params::new(map, &["y0", "horizon"])?;
    let field = SetField::new(
        2,
        |_, y: &[f64]| ConvexSet::singleton(vec![y[1], -y[0]]),
        |_| 1.0,
    );
    let surface = ImpulseSurface::new(
        |y| 0.5 + 0.05 * y[0].tanh(),
        |y| vec![0.05 / y[0].cosh().powi(2), 0.0],
        |_| vec![0.0, -0.5],
    );
    InclusionProblem::new(
        "singleton-linear",
        horizon(&p)?,
        p.vector("y0", &[1.0, 0.0])?,
        field,
        vec![surface],
    )
}

fn broken_transversality(map: &Map<String, Value>) -> Result<InclusionProblem> {
    let p = Params::new(map, &["y0", "horizon"])?;
    let field = SetField::constant(ConvexSet::ball(vec![0.0, 0.0], 2.0)?, 2.0);
    let surface = ImpulseSurface::new(
        |y| 0.5 * y[0] + 0.5,
        |_| vec![0.5, 0.0],
        |_| vec![-0.2, 0.0],
    );
    InclusionProblem::new(
        "broken-transversality",
        horizon(&p)?,
        p.vector("y0", &[0.0, 0.0])?,
        field,
        vec![surface],
    )?
    .with_region(StateBox {
        lower: vec![-0.9, -0.9],
        upper: vec![0.9, 0.9],
    })
}

fn fixed_time_m3(map: &Map<String, Value>) -> Result<InclusionProblem> {
    let p = Params::new(map, &["y0", "horizon"])?;
    let field = SetField::new(
        2,
        |_, y: &[f64]| ConvexSet::Ball {
            center: vec![-0.5 * y[0], -0.5 * y[1]],
            radius: 1.0,
        },
        |_| 1.0,
    );
    let surfaces = [0.25, 0.5, 0.75]
        .into_iter()
        .map(|t| ImpulseSurface::fixed_time(t, |y| vec![-0.3 * y[0], -0.3 * y[1]]))
        .collect();
    InclusionProblem::new(
        "fixed-time-m3",
        horizon(&p)?,
        p.vector("y0", &[1.0, 0.0])?,
        field,
        surfaces,
    )
}
