//! Continuous-time random walk on the embedded graph with jump rates
//! c / mu(v), the normalization under which |X_t|^2 - t is a martingale.
//! Monte-Carlo estimators for ellipticity, arc crossings, and
//! occupation-time Green's functions.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::embedding::HarmonicEmbedding;
use crate::geom::{Cx, Region};
use crate::harmonic::DomainSlice;
use crate::rng::trajectory_rng;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("start vertex {0} is on the boundary")]
    StartOnBoundary(usize),
    #[error("start is within {dist:.3e} of the boundary, need at least {need:.3e}")]
    TooCloseToBoundary { dist: f64, need: f64 },
    #[error("walk budget {0} too small for a meaningful confidence interval")]
    BudgetTooSmall(u64),
}

/// Precomputed jump rates q(v -> v') = c / mu(v) with cumulative neighbor
/// distributions for O(log deg) sampling.
pub struct WalkEngine<'a> {
    pub emb: &'a HarmonicEmbedding,
    /// Total rate out of each vertex: sum c / mu(v).
    pub total_rate: Vec<f64>,
    /// Per vertex: (neighbor, cumulative probability).
    cum: Vec<Vec<(usize, f64)>>,
    pub master_seed: u64,
}

#[derive(Debug, Clone)]
pub enum StopRule {
    /// Stop when the walk first sits at a vertex outside the region.
    ExitRegion(Region),
    /// Stop when the ball around the start position is left.
    ExitBall { center: Cx, r: f64 },
    /// Stop at a fixed time (last holding interval truncated).
    FixedTime(f64),
    /// Stop upon arrival at a vertex.
    HitVertex(usize),
}

/// (vertex, holding time) pairs; the last entry's holding time is the time
/// spent before the stop fired (zero when stopped on arrival).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<(usize, f64)>,
}

impl Trajectory {
    pub fn last_vertex(&self) -> usize {
        self.states.last().unwrap().0
    }

    pub fn total_time(&self) -> f64 {
        self.states.iter().map(|&(_, t)| t).sum()
    }
}

impl<'a> WalkEngine<'a> {
    pub fn new(emb: &'a HarmonicEmbedding, master_seed: u64) -> WalkEngine<'a> {
        let m = &*emb.map;
        let n = m.n_vertices;
        let mut total_rate = vec![0.0; n];
        let mut cum = vec![Vec::new(); n];
        for v in 0..n {
            let mu = emb.mu(v);
            let total_c: f64 = m.total_conductance(v);
            total_rate[v] = total_c / mu;
            let mut acc = 0.0;
            let mut row = Vec::with_capacity(m.adjacency[v].len());
            for &(w, ei) in &m.adjacency[v] {
                acc += m.edges[ei].c / total_c;
                row.push((w, acc));
            }
            if let Some(last) = row.last_mut() {
                last.1 = 1.0;
            }
            cum[v] = row;
        }
        WalkEngine { emb, total_rate, cum, master_seed }
    }

    fn jump(&self, v: usize, u: f64) -> usize {
        let row = &self.cum[v];
        let k = row.partition_point(|&(_, p)| p < u);
        row[k.min(row.len() - 1)].0
    }

    /// One trajectory, deterministically seeded by its index. The walk is
    /// absorbed at outer-face vertices regardless of the stop rule.
    pub fn simulate(
        &self,
        start: usize,
        rule: &StopRule,
        idx: u64,
    ) -> Result<Trajectory, WalkError> {
        if self.emb.map.boundary[start] {
            return Err(WalkError::StartOnBoundary(start));
        }
        let mut rng = trajectory_rng(self.master_seed, idx);
        let mut states = Vec::new();
        let mut v = start;
        let mut elapsed = 0.0;
        loop {
            let stopped_here = match rule {
                StopRule::ExitRegion(u) => !u.contains(self.emb.pos[v]),
                StopRule::ExitBall { center, r } => {
                    (self.emb.pos[v] - center).norm() >= *r
                }
                StopRule::FixedTime(_) => false,
                StopRule::HitVertex(target) => v == *target && !states.is_empty(),
            };
            if stopped_here || self.emb.map.boundary[v] {
                states.push((v, 0.0));
                return Ok(Trajectory { states });
            }
            let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            let hold = -u.ln() / self.total_rate[v];
            if let StopRule::FixedTime(t) = rule {
                if elapsed + hold >= *t {
                    states.push((v, t - elapsed));
                    return Ok(Trajectory { states });
                }
            }
            states.push((v, hold));
            elapsed += hold;
            v = self.jump(v, rng.gen());
        }
    }
}

/// Point estimate with a normal-approximation 95% confidence half-width.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimatorResult {
    pub estimate: f64,
    pub half_width: f64,
    pub n: u64,
    pub seed: u64,
}

impl EstimatorResult {
    pub fn contains(&self, x: f64) -> bool {
        (self.estimate - x).abs() <= self.half_width
    }
}

/// Welford accumulator; merges associatively.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64,
        }
    }

    pub fn mean_result(&self, seed: u64) -> EstimatorResult {
        EstimatorResult {
            estimate: self.mean,
            half_width: 1.96 * (self.variance() / self.n.max(1) as f64).sqrt(),
            n: self.n,
            seed,
        }
    }

    /// CI for the variance itself (normal approximation: sd of the sample
    /// variance is about Var sqrt(2/(n-1)) for light-tailed data).
    pub fn variance_result(&self, seed: u64) -> EstimatorResult {
        let var = self.variance();
        EstimatorResult {
            estimate: var,
            half_width: 1.96 * var * (2.0 / (self.n.max(2) - 1) as f64).sqrt(),
            n: self.n,
            seed,
        }
    }
}

fn distance_to_boundary(emb: &HarmonicEmbedding, p: Cx) -> f64 {
    (0..emb.map.n_vertices)
        .filter(|&v| emb.map.boundary[v])
        .map(|v| (emb.pos[v] - p).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Empirical Var(Re(conj(alpha) X_t)) per direction on a theta grid.
pub fn variance_ellipticity(
    engine: &WalkEngine,
    v: usize,
    t: f64,
    theta_grid: &[f64],
    n_samples: u64,
) -> Result<Vec<EstimatorResult>, WalkError> {
    if n_samples < 10 {
        return Err(WalkError::BudgetTooSmall(n_samples));
    }
    let p0 = engine.emb.pos[v];
    let dist = distance_to_boundary(engine.emb, p0);
    if dist < t.sqrt() {
        return Err(WalkError::TooCloseToBoundary { dist, need: t.sqrt() });
    }
    let mut accs = vec![Welford::default(); theta_grid.len()];
    let rule = StopRule::FixedTime(t);
    for idx in 0..n_samples {
        let traj = engine.simulate(v, &rule, idx)?;
        let x = engine.emb.pos[traj.last_vertex()];
        for (k, &theta) in theta_grid.iter().enumerate() {
            let proj = (Cx::from_polar(1.0, -theta) * x).re;
            accs[k].push(proj);
        }
    }
    Ok(accs.iter().map(|a| a.variance_result(engine.master_seed)).collect())
}

/// Probability of exiting the ball B(H(v), r) through the arc
/// {H(v) + r e^{i theta}, |theta - theta0| <= pi/4}.
pub fn crossing_probability(
    engine: &WalkEngine,
    v: usize,
    r: f64,
    theta0: f64,
    n_samples: u64,
) -> Result<EstimatorResult, WalkError> {
    if n_samples < 10 {
        return Err(WalkError::BudgetTooSmall(n_samples));
    }
    let p0 = engine.emb.pos[v];
    let dist = distance_to_boundary(engine.emb, p0);
    if dist < 2.0 * r {
        return Err(WalkError::TooCloseToBoundary { dist, need: 2.0 * r });
    }
    let rule = StopRule::ExitBall { center: p0, r };
    let mut acc = Welford::default();
    for idx in 0..n_samples {
        let traj = engine.simulate(v, &rule, idx)?;
        let x = engine.emb.pos[traj.last_vertex()] - p0;
        let mut dtheta = (x.arg() - theta0).rem_euclid(2.0 * std::f64::consts::PI);
        if dtheta > std::f64::consts::PI {
            dtheta -= 2.0 * std::f64::consts::PI;
        }
        // Half-open membership so quarter arcs partition the circle exactly.
        let hit = dtheta > -std::f64::consts::FRAC_PI_4
            && dtheta <= std::f64::consts::FRAC_PI_4;
        acc.push(if hit { 1.0 } else { 0.0 });
    }
    Ok(acc.mean_result(engine.master_seed))
}

/// Occupation-time estimate of the Green's function G(v1, v2) of a slice:
/// expected time spent at v2 before leaving the interior, divided by mu(v2).
pub fn occupation_green(
    engine: &WalkEngine,
    slice: &DomainSlice,
    v1: usize,
    v2: usize,
    n_samples: u64,
) -> Result<EstimatorResult, WalkError> {
    if n_samples == 0 {
        return Err(WalkError::BudgetTooSmall(0));
    }
    if !slice.is_interior(v1) {
        return Err(WalkError::StartOnBoundary(v1));
    }
    let mu2 = engine.emb.mu(v2);
    let mut acc = Welford::default();
    for idx in 0..n_samples {
        // Absorb on first arrival outside the interior of the slice.
        let mut rng_traj = engine.simulate_slice(slice, v1, idx)?;
        let time_at: f64 = rng_traj
            .states
            .drain(..)
            .filter(|&(v, _)| v == v2)
            .map(|(_, t)| t)
            .sum();
        acc.push(time_at / mu2);
    }
    Ok(acc.mean_result(engine.master_seed))
}

impl<'a> WalkEngine<'a> {
    /// Walk absorbed at the first vertex that is not interior to the slice.
    pub fn simulate_slice(
        &self,
        slice: &DomainSlice,
        start: usize,
        idx: u64,
    ) -> Result<Trajectory, WalkError> {
        if !slice.is_interior(start) {
            return Err(WalkError::StartOnBoundary(start));
        }
        let mut rng = trajectory_rng(self.master_seed, idx);
        let mut states = Vec::new();
        let mut v = start;
        loop {
            if !slice.is_interior(v) {
                states.push((v, 0.0));
                return Ok(Trajectory { states });
            }
            let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            let hold = -u.ln() / self.total_rate[v];
            states.push((v, hold));
            v = self.jump(v, rng.gen());
        }
    }
}
