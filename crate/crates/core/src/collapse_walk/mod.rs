//! First-passage random walk on the probability simplex.
//!
//! Born weights are discretized onto a resolution-`M` lattice (counts
//! summing to `M`). Each step picks an unordered pair of active coordinates
//! uniformly and transfers one quantum in a uniformly random direction, so
//! every coordinate's count is a martingale. A coordinate that reaches zero
//! is frozen out permanently (face absorption); the walk ends when a single
//! coordinate holds all `M` quanta. By optional stopping, the probability of
//! ending at vertex `i` is exactly `counts_i / M`; [`absorption_oracle`]
//! verifies this against the exact linear system instead of assuming it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod oracle;
pub use oracle::absorption_oracle;

/// Maximum lattice states the oracle will enumerate.
pub const ORACLE_STATE_LIMIT: u64 = 2_000_000;

/// A point on the probability simplex: non-negative coordinates summing
/// to one.
///
/// Construction accepts a total within `1e-9` of one and rescales, so the
/// stored coordinates always sum to one at machine precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidSimplexPoint {
                reason: format!("need at least 2 coordinates, got {}", coords.len()),
            });
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidSimplexPoint {
                reason: format!("coordinate {bad} is negative or non-finite"),
            });
        }
        let total: f64 = coords.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSimplexPoint {
                reason: format!("coordinates sum to {total}, not 1"),
            });
        }
        let coords = coords.into_iter().map(|c| c / total).collect();
        Ok(SimplexPoint { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// How fractional lattice coordinates are rounded to integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rounding {
    /// Floor every coordinate, then hand the leftover quanta to the largest
    /// remainders, ties broken by lowest index. Deterministic.
    LargestRemainder,
    /// Floor every coordinate, then place the leftover quanta by systematic
    /// proportional-to-remainder sampling without replacement, so that
    /// `E[counts / M]` equals the input point.
    Stochastic,
}

/// Lattice resolution and safety bounds for one collapse walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Total quanta on the lattice (`M`).
    pub resolution: u64,
    /// Abort bound; expected duration scales like `M^2`.
    pub max_steps: u64,
    pub rounding: Rounding,
}

impl WalkConfig {
    /// Config with the default `max_steps = 100 * M^2` headroom and
    /// deterministic rounding.
    pub fn new(resolution: u64) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidConfig {
                reason: format!("lattice resolution must be >= 2, got {resolution}"),
            });
        }
        Ok(WalkConfig {
            resolution,
            max_steps: 100u64.saturating_mul(resolution).saturating_mul(resolution),
            rounding: Rounding::LargestRemainder,
        })
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_rounding(mut self, rounding: Rounding) -> Self {
        self.rounding = rounding;
        self
    }
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig::new(100).expect("default resolution is valid")
    }
}

/// Integer occupation vector on the simplex lattice, with the set of
/// still-active (positive-count) coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeWalkState {
    counts: Vec<u64>,
    resolution: u64,
    active: Vec<usize>,
}

impl LatticeWalkState {
    /// Build from raw counts; the resolution is their sum.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidConfig {
                reason: format!("lattice needs >= 2 coordinates, got {}", counts.len()),
            });
        }
        let resolution: u64 = counts.iter().sum();
        if resolution == 0 {
            return Err(Error::InvalidConfig {
                reason: "lattice counts sum to zero".into(),
            });
        }
        let active = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
        Ok(LatticeWalkState {
            counts,
            resolution,
            active,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Total quanta (`M`).
    pub fn resolution(&self) -> u64 {
        self.resolution
    }

    /// Indices with positive counts, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_absorbed(&self) -> bool {
        self.active.len() == 1
    }

    pub fn absorbed_vertex(&self) -> Option<usize> {
        if self.is_absorbed() {
            Some(self.active[0])
        } else {
            None
        }
    }

    /// One transfer step: an unordered pair of active coordinates is chosen
    /// uniformly and one quantum moves between them in a uniformly random
    /// direction. Returns the index eliminated by this step, if any.
    pub fn step(&mut self, rng: &mut impl Rng) -> Result<Option<usize>> {
        let a = self.active.len();
        if a < 2 {
            return Err(Error::AlreadyAbsorbed {
                vertex: self.active[0],
            });
        }
        let pairs = a * (a - 1) / 2;
        let mut k = rng.random_range(0..pairs);
        let mut row = 0;
        while k >= a - 1 - row {
            k -= a - 1 - row;
            row += 1;
        }
        let (mut give, mut take) = (row, row + 1 + k);
        if rng.random_bool(0.5) {
            std::mem::swap(&mut give, &mut take);
        }
        let giver = self.active[give];
        let taker = self.active[take];
        self.counts[giver] -= 1;
        self.counts[taker] += 1;
        if self.counts[giver] == 0 {
            self.active.remove(give);
            Ok(Some(giver))
        } else {
            Ok(None)
        }
    }

    /// The exact one-step distribution: every reachable successor count
    /// vector with its probability. Useful for testing drift properties
    /// without sampling.
    pub fn one_step_distribution(&self) -> Result<Vec<(Vec<u64>, f64)>> {
        let a = self.active.len();
        if a < 2 {
            return Err(Error::AlreadyAbsorbed {
                vertex: self.active[0],
            });
        }
        let prob = 1.0 / (a * (a - 1)) as f64;
        let mut out = Vec::with_capacity(a * (a - 1));
        for &give in &self.active {
            for &take in &self.active {
                if give == take {
                    continue;
                }
                let mut counts = self.counts.clone();
                counts[give] -= 1;
                counts[take] += 1;
                out.push((counts, prob));
            }
        }
        Ok(out)
    }
}

/// Round a simplex point onto the resolution-`M` lattice.
///
/// Both modes floor first and then place the `K = M - sum(floors)` leftover
/// quanta: deterministically by largest remainder (ties to the lowest
/// index), or by systematic sampling with inclusion probabilities equal to
/// the remainders. The counts always sum to `M`.
pub fn discretize(p: &SimplexPoint, config: &WalkConfig, rng: &mut impl Rng) -> LatticeWalkState {
    let m = config.resolution;
    let d = p.dim();
    let mut counts: Vec<u64> = Vec::with_capacity(d);
    let mut remainders: Vec<f64> = Vec::with_capacity(d);
    for &c in p.coords() {
        let raw = c * m as f64;
        let fl = raw.floor().min(m as f64);
        counts.push(fl as u64);
        remainders.push(raw - fl);
    }
    let assigned: u64 = counts.iter().sum();
    let leftover = m.saturating_sub(assigned) as usize;
    if leftover > 0 {
        match config.rounding {
            Rounding::LargestRemainder => {
                let mut order: Vec<usize> = (0..d).collect();
                order.sort_by(|&i, &j| {
                    remainders[j]
                        .partial_cmp(&remainders[i])
                        .expect("remainders are finite")
                        .then(i.cmp(&j))
                });
                for &i in order.iter().take(leftover) {
                    counts[i] += 1;
                }
            }
            Rounding::Stochastic => {
                let total: f64 = remainders.iter().sum();
                if total > 0.0 {
                    // systematic sampling: points u, u+1, ..., u+K-1 on the
                    // cumulative remainder scale rescaled to total K
                    let scale = leftover as f64 / total;
                    let u: f64 = rng.random::<f64>();
                    let mut cum = 0.0;
                    let mut placed = 0usize;
                    for i in 0..d {
                        cum += remainders[i] * scale;
                        while placed < leftover && (u + placed as f64) < cum {
                            counts[i] += 1;
                            placed += 1;
                        }
                    }
                    // numeric slack: park any unplaced quantum on the tail
                    while placed < leftover {
                        counts[d - 1] += 1;
                        placed += 1;
                    }
                }
            }
        }
    }
    LatticeWalkState::from_counts(counts).expect("discretization preserves the total")
}

/// Result of one collapse: the absorbing vertex, the number of steps, and
/// the ordered trace of coordinate eliminations as `(step, index)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseOutcome {
    pub vertex: usize,
    pub steps: u64,
    pub reductions: Vec<(u64, usize)>,
}

/// Discretize `p` and walk until one coordinate absorbs everything.
///
/// Coordinates that discretize to zero are recorded as step-0 reductions,
/// so the trace always holds `d - 1` entries. Exceeding `max_steps` is a
/// runaway diagnostic, not an expected outcome.
pub fn run_collapse(
    p: &SimplexPoint,
    config: &WalkConfig,
    rng: &mut impl Rng,
) -> Result<CollapseOutcome> {
    let mut state = discretize(p, config, rng);
    let mut reductions: Vec<(u64, usize)> = (0..state.dim())
        .filter(|&i| state.counts()[i] == 0)
        .map(|i| (0, i))
        .collect();
    let mut steps = 0u64;
    while !state.is_absorbed() {
        if steps >= config.max_steps {
            return Err(Error::RunawayWalk {
                max_steps: config.max_steps,
            });
        }
        steps += 1;
        if let Some(eliminated) = state.step(rng)? {
            reductions.push((steps, eliminated));
        }
    }
    Ok(CollapseOutcome {
        vertex: state.absorbed_vertex().expect("walk just absorbed"),
        steps,
        reductions,
    })
}
