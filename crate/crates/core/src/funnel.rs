//! Finite samples of the solution funnel and set-level diagnostics.
//!
//! A [`FunnelSample`] holds solved trajectories together with their pairwise
//! distances in the jump space. Diagnostics include one-sided and symmetric
//! Hausdorff distances between samples, greedy k-center covering radii, the
//! cascade over mollification levels, and a probe of the contraction
//! homotopy `h(r, ybar)`.
//!
//! Every parallel map collects in index order and derives per-task seeds from
//! `(master_seed, index)`, so results do not depend on the worker count.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Error, Result};
use crate::fields::{
    select_center, select_extreme, select_mollified, select_mollified_bangbang, select_random,
    select_zero, Selection,
};
use crate::integrator::{solve, solve_from, StepControl};
use crate::jumpspace::{JumpEvent, JumpFunction, Trajectory};
use crate::problem::{gronwall_bounds, InclusionProblem};

/// A rule for turning `(problem, seed)` into a selection.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    Zero,
    Center,
    Extreme(Vec<f64>),
    BangBang { switches: usize },
    Mollified { level: usize },
    MollifiedBangBang { level: usize, switches: usize },
}

impl FromStr for Strategy {
    type Err = Error;

    /// `zero`, `center`, `extreme:<d1,d2,..>`, `bangbang:<k>`, `mollified:<n>`,
    /// `mollified-bangbang:<n>:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = s.split_once(':').map_or((s, None), |(h, a)| (h, Some(a)));
        let count = |a: Option<&str>| -> Result<usize> {
            a.and_then(|x| x.trim().parse().ok())
                .ok_or_else(|| contract(format!("selection `{s}` needs an integer argument")))
        };
        match head {
            "zero" if arg.is_none() => Ok(Strategy::Zero),
            "center" if arg.is_none() => Ok(Strategy::Center),
            "extreme" => {
                let d = arg
                    .ok_or_else(|| contract("extreme needs a direction"))?
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| contract(format!("bad direction in `{s}`")))?;
                Ok(Strategy::Extreme(d))
            }
            "bangbang" => Ok(Strategy::BangBang {
                switches: count(arg)?,
            }),
            "mollified" => match count(arg)? {
                0 => Err(contract("mollification level must be >= 1")),
                level => Ok(Strategy::Mollified { level }),
            },
            "mollified-bangbang" => {
                let (n, k) = arg
                    .and_then(|a| a.split_once(':'))
                    .ok_or_else(|| contract(format!("selection `{s}` needs `<n>:<k>`")))?;
                match (count(Some(n))?, count(Some(k))?) {
                    (0, _) => Err(contract("mollification level must be >= 1")),
                    (level, switches) => Ok(Strategy::MollifiedBangBang { level, switches }),
                }
            }
            _ => Err(contract(format!("unknown selection `{s}`"))),
        }
    }
}

/// `[-R, R]^N` with `R = K_bar + 1`, the box mollified fields live on.
pub fn mollification_box(p: &InclusionProblem) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = gronwall_bounds(p)?.k_bar + 1.0;
    Ok((vec![-r; p.dim()], vec![r; p.dim()]))
}

impl Strategy {
    /// Builds the selection; `bounds` is the mollification box.
    pub fn selection(
        &self,
        p: &InclusionProblem,
        seed: u64,
        bounds: &(Vec<f64>, Vec<f64>),
    ) -> Result<Selection> {
        let (lo, hi) = bounds;
        match self {
            Strategy::Zero => Ok(select_zero(p.dim())),
            Strategy::Center => Ok(select_center(&p.field)),
            Strategy::Extreme(d) => select_extreme(&p.field, d),
            Strategy::BangBang { switches } => {
                Ok(select_random(&p.field, p.horizon, seed, *switches))
            }
            Strategy::Mollified { level } => select_mollified(&p.field, p.horizon, *level, lo, hi),
            Strategy::MollifiedBangBang { level, switches } => {
                select_mollified_bangbang(&p.field, p.horizon, *level, lo, hi, seed, *switches)
            }
        }
    }

    /// Whether the selection depends on the seed.
    pub fn is_random(&self) -> bool {
        matches!(
            self,
            Strategy::BangBang { .. } | Strategy::MollifiedBangBang { .. }
        )
    }
}

/// SplitMix64 finalizer applied to `(master, index)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Where a sample member came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub strategy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
}

/// Solved trajectories with their pairwise distance matrix.
#[derive(Debug, Clone)]
pub struct FunnelSample {
    pub problem: String,
    members: Vec<Trajectory>,
    provenance: Vec<Provenance>,
    distances: Vec<f64>,
}

impl FunnelSample {
    pub fn new(
        problem: impl Into<String>,
        members: Vec<Trajectory>,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        if members.len() != provenance.len() {
            return Err(contract("one provenance record per member"));
        }
        let n = members.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let values: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| members[i].base().distance(members[j].base()))
            .collect::<Result<_>>()?;
        let mut distances = vec![0.0; n * n];
        for (&(i, j), d) in pairs.iter().zip(values) {
            distances[i * n + j] = d;
            distances[j * n + i] = d;
        }
        Ok(Self {
            problem: problem.into(),
            members,
            provenance,
            distances,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Trajectory] {
        &self.members
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.len() + j]
    }

    pub fn max_pairwise(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }

    fn bases(&self) -> Vec<&JumpFunction> {
        self.members.iter().map(Trajectory::base).collect()
    }

    /// Serializable summary: provenance, events and reduced paths per member,
    /// plus the distance matrix.
    pub fn manifest(&self) -> Manifest {
        let n = self.len();
        Manifest {
            problem: self.problem.clone(),
            count: n,
            members: self
                .members
                .iter()
                .zip(&self.provenance)
                .enumerate()
                .map(|(index, (m, prov))| ManifestEntry {
                    index,
                    provenance: prov.clone(),
                    incomplete: m.incomplete(),
                    events: m.events().to_vec(),
                    base: m.base().clone(),
                })
                .collect(),
            distances: (0..n)
                .map(|i| self.distances[i * n..(i + 1) * n].to_vec())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub provenance: Provenance,
    pub incomplete: bool,
    pub events: Vec<JumpEvent>,
    pub base: JumpFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub problem: String,
    pub count: usize,
    pub members: Vec<ManifestEntry>,
    pub distances: Vec<Vec<f64>>,
}

/// Solves `count` members; member `i` uses `strategies[i % len]` with seed
/// `derive_seed(master_seed, i)`.
pub fn sample_funnel(
    p: &InclusionProblem,
    strategies: &[Strategy],
    count: usize,
    master_seed: u64,
    ctl: &StepControl,
) -> Result<FunnelSample> {
    if count == 0 || strategies.is_empty() {
        return Err(contract("need count >= 1 and at least one strategy"));
    }
    let bounds = mollification_box(p)?;
    let solved: Vec<Result<(Trajectory, Provenance)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let strategy = &strategies[i % strategies.len()];
            let seed = derive_seed(master_seed, i as u64);
            let sel = strategy.selection(p, seed, &bounds)?;
            let traj = solve(p, &sel, ctl)?;
            let prov = Provenance {
                strategy: sel.label.strategy.clone(),
                seed: strategy.is_random().then_some(seed),
                level: sel.label.level,
            };
            Ok((traj, prov))
        })
        .collect();
    let mut members = Vec::with_capacity(count);
    let mut provenance = Vec::with_capacity(count);
    for (index, r) in solved.into_iter().enumerate() {
        let (t, prov) = r.map_err(|e| Error::Sample {
            index,
            source: Box::new(e),
        })?;
        members.push(t);
        provenance.push(prov);
    }
    FunnelSample::new(p.name.clone(), members, provenance)
}

fn one_sided(a: &[&JumpFunction], b: &[&JumpFunction]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(domain("Hausdorff distance of an empty sample"));
    }
    let per: Vec<f64> = a
        .par_iter()
        .map(|x| {
            b.iter()
                .map(|y| x.distance(y))
                .try_fold(f64::INFINITY, |m, d| d.map(|d| m.min(d)))
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// `sup_{x in a} d(x, b)`.
pub fn hausdorff_one_sided(a: &FunnelSample, b: &FunnelSample) -> Result<f64> {
    one_sided(&a.bases(), &b.bases())
}

/// `max(d(a -> b), d(b -> a))`.
pub fn hausdorff(a: &FunnelSample, b: &FunnelSample) -> Result<f64> {
    Ok(hausdorff_one_sided(a, b)?.max(hausdorff_one_sided(b, a)?))
}

/// Covering radius of the greedy farthest-point k-center rule, starting from
/// member 0; ties go to the lowest index.
pub fn kcenter_radius(sample: &FunnelSample, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(contract("k must be >= 1"));
    }
    if sample.is_empty() {
        return Err(domain("k-center of an empty sample"));
    }
    let n = sample.len();
    let mut nearest: Vec<f64> = (0..n).map(|i| sample.distance(i, 0)).collect();
    for _ in 1..k.min(n) {
        let (far, &radius) =
            nearest
                .iter()
                .enumerate()
                .fold((0, &f64::NEG_INFINITY), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                });
        if radius <= 0.0 {
            break;
        }
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sample.distance(i, far));
        }
    }
    Ok(nearest.into_iter().fold(0.0, f64::max))
}

/// Settings for [`approximation_cascade`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub count: usize,
    pub seed: u64,
    /// Switch times per bang-bang member.
    pub switches: usize,
    /// `k` for the covering radii.
    pub kcenter_k: usize,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            count: 32,
            seed: 7,
            switches: 3,
            kcenter_k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeReport {
    pub problem: String,
    pub levels: Vec<usize>,
    pub config: CascadeConfig,
    /// One-sided Hausdorff distance from each level's sample to the finest.
    pub distances_to_finest: Vec<f64>,
    pub kcenter_radii: Vec<f64>,
    pub max_pairwise: Vec<f64>,
}

pub struct Cascade {
    pub report: CascadeReport,
    pub samples: Vec<FunnelSample>,
}

/// Per level `n`: member 0 follows `g_n`, members `1..count` follow
/// mollified bang-bang selections whose seeds are shared across levels.
pub fn approximation_cascade(
    p: &InclusionProblem,
    levels: &[usize],
    config: CascadeConfig,
    ctl: &StepControl,
) -> Result<Cascade> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) || levels[0] == 0 {
        return Err(contract("levels must be positive and strictly ascending"));
    }
    if config.count == 0 {
        return Err(contract("count must be >= 1"));
    }
    let bounds = mollification_box(p)?;
    let tasks: Vec<(usize, usize)> = levels
        .iter()
        .flat_map(|&n| (0..config.count).map(move |i| (n, i)))
        .collect();
    let solved: Vec<Result<(Trajectory, Provenance)>> = tasks
        .par_iter()
        .map(|&(level, i)| {
            let seed = derive_seed(config.seed, i as u64);
            let strategy = if i == 0 {
                Strategy::Mollified { level }
            } else {
                Strategy::MollifiedBangBang {
                    level,
                    switches: config.switches,
                }
            };
            let sel = strategy.selection(p, seed, &bounds)?;
            let traj = solve(p, &sel, ctl)?;
            Ok((
                traj,
                Provenance {
                    strategy: sel.label.strategy.clone(),
                    seed: strategy.is_random().then_some(seed),
                    level: Some(level),
                },
            ))
        })
        .collect();
    let mut solved = solved.into_iter();
    let mut samples = Vec::with_capacity(levels.len());
    for _ in levels {
        let mut members = Vec::with_capacity(config.count);
        let mut provenance = Vec::with_capacity(config.count);
        for index in 0..config.count {
            let (t, prov) =
                solved
                    .next()
                    .expect("one result per task")
                    .map_err(|e| Error::Sample {
                        index,
                        source: Box::new(e),
                    })?;
            members.push(t);
            provenance.push(prov);
        }
        samples.push(FunnelSample::new(p.name.clone(), members, provenance)?);
    }
    let finest = samples.last().expect("levels is non-empty");
    let distances_to_finest = samples
        .iter()
        .map(|s| hausdorff_one_sided(s, finest))
        .collect::<Result<Vec<_>>>()?;
    let kcenter_radii = samples
        .iter()
        .map(|s| kcenter_radius(s, config.kcenter_k))
        .collect::<Result<Vec<_>>>()?;
    let report = CascadeReport {
        problem: p.name.clone(),
        levels: levels.to_vec(),
        config,
        distances_to_finest,
        kcenter_radii,
        max_pairwise: samples.iter().map(FunnelSample::max_pairwise).collect(),
    };
    Ok(Cascade { report, samples })
}

/// The `g_n` selection the homotopy switches to.
pub fn homotopy_selection(p: &InclusionProblem, level: usize) -> Result<Selection> {
    let (lo, hi) = mollification_box(p)?;
    select_mollified(&p.field, p.horizon, level, &lo, &hi)
}

/// Switch time of `h(r, ybar)` for first jump time `t_bar`.
pub fn switch_time(horizon: f64, t_bar: f64, r: f64) -> f64 {
    if r <= 0.5 {
        horizon - 2.0 * r * (horizon - t_bar)
    } else {
        t_bar - 2.0 * (r - 0.5) * t_bar
    }
}

/// `h(r, ybar)`: `ybar` up to the switch time, then the `g_n` flow with
/// impulses active. The switch time moves from `a` (at `r = 0`) to the first
/// jump time (at `r = 1/2`) and on to `0` (at `r = 1`); trajectories without
/// a jump use `a` as their jump time.
pub fn contract_homotopy(
    p: &InclusionProblem,
    g_n: &Selection,
    ybar: &Trajectory,
    r: f64,
    ctl: &StepControl,
) -> Result<Trajectory> {
    if !(0.0..=1.0).contains(&r) {
        return Err(domain(format!("homotopy parameter r = {r} outside [0, 1]")));
    }
    let t_bar = ybar.first_jump_time().unwrap_or(p.horizon);
    let s = switch_time(p.horizon, t_bar, r).clamp(0.0, p.horizon);
    solve_from(p, g_n, ctl, ybar, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub level: usize,
    pub samples: usize,
    pub r_steps: usize,
    /// `max d(h(0, ybar), ybar)`.
    pub start_identity: f64,
    /// `max d(h(1, ybar), h(1, ybar_0))`.
    pub endpoint_identity: f64,
    /// Per r-interval, the largest `d(h(r_i, .), h(r_{i+1}, .))` over the sample.
    pub continuity_increments: Vec<f64>,
    pub continuity_modulus: f64,
    /// Largest increment on an interval touching `r = 1/2`.
    pub increment_at_half: f64,
    /// `max` over intermediates of the distance to the sample, if computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub containment: Option<f64>,
    /// Intermediates that fired fewer or more surfaces than declared.
    pub irregular_intermediates: usize,
}

/// Runs `h(r, ybar)` for `r = i / r_steps` and every member of `sample`.
pub fn contractibility_probe(
    p: &InclusionProblem,
    level: usize,
    sample: &FunnelSample,
    r_steps: usize,
    with_containment: bool,
    ctl: &StepControl,
) -> Result<ProbeReport> {
    if sample.is_empty() {
        return Err(domain("probe needs a non-empty sample"));
    }
    if r_steps == 0 {
        return Err(contract("r_steps must be >= 1"));
    }
    let g_n = homotopy_selection(p, level)?;
    let rs: Vec<f64> = (0..=r_steps).map(|i| i as f64 / r_steps as f64).collect();
    let paths: Vec<Vec<Trajectory>> = sample
        .members()
        .par_iter()
        .enumerate()
        .map(|(index, ybar)| {
            rs.iter()
                .map(|&r| contract_homotopy(p, &g_n, ybar, r, ctl))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Sample {
                    index,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    let mut start_identity: f64 = 0.0;
    let mut endpoint_identity: f64 = 0.0;
    let mut increments = vec![0.0f64; r_steps];
    let anchor = paths[0][r_steps].base();
    for (ybar, path) in sample.members().iter().zip(&paths) {
        start_identity = start_identity.max(path[0].base().distance(ybar.base())?);
        endpoint_identity = endpoint_identity.max(path[r_steps].base().distance(anchor)?);
        for (i, w) in path.windows(2).enumerate() {
            increments[i] = increments[i].max(w[0].base().distance(w[1].base())?);
        }
    }
    let half: Vec<usize> = (0..r_steps)
        .filter(|&i| rs[i] <= 0.5 && rs[i + 1] >= 0.5)
        .collect();
    let increment_at_half = half.iter().map(|&i| increments[i]).fold(0.0, f64::max);
    let m = p.surface_count();
    let irregular_intermediates = paths
        .iter()
        .flatten()
        .filter(|h| h.events().len() != m)
        .count();
    let containment = if with_containment {
        let members = sample.bases();
        let all: Vec<&JumpFunction> = paths.iter().flatten().map(Trajectory::base).collect();
        Some(one_sided(&all, &members)?)
    } else {
        None
    };
    Ok(ProbeReport {
        level,
        samples: sample.len(),
        r_steps,
        start_identity,
        endpoint_identity,
        continuity_modulus: increments.iter().copied().fold(0.0, f64::max),
        continuity_increments: increments,
        increment_at_half,
        containment,
        irregular_intermediates,
    })
}
