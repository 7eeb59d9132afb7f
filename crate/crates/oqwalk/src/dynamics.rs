//! State propagation: quantum trajectories, threshold crossing, classical
//! reference dynamics, and Monte Carlo hitting samples.
//!
//! The quantum engine iterates the compiled one-step superoperator on the
//! vectorised density matrix. The classical engine propagates only the
//! population vector under the per-step stochastic matrix obtained by
//! replacing each channel with its action on populations: damping edges
//! become probability transfer, a coherent edge becomes a symmetric exchange
//! with the one-step transition probability, dephasing does nothing. When
//! every coherent pair is fully dephased (`mu = 1`) the quantum step maps
//! diagonal states to diagonal states and the two engines agree exactly;
//! that equivalence is pinned down in the tests and drives the Monte Carlo
//! sampler, which runs the same stochastic matrix as a jump process.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::transition_probability;
use crate::linalg::{vec_trace, CVector, DensityMatrix, C64};
use crate::reaction::{EdgeRef, ReactionGraph, StepMap};
use crate::{Error, Result};

/// Complex coherence series for one node pair along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceSeries {
    /// First node of the pair (0-based).
    pub j: usize,
    /// Second node of the pair (0-based).
    pub k: usize,
    /// `rho[j, k]` at each recorded step.
    pub values: Vec<C64>,
}

/// Recorded time series of an evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Time step of the underlying evolution, in seconds.
    pub dt: f64,
    /// Recorded step indices (step 0 always included; the final step is
    /// recorded even when it is not a stride multiple).
    pub steps: Vec<u64>,
    /// Per-node occupation series, indexed `[node][sample]`.
    pub populations: Vec<Vec<f64>>,
    /// Coherence series for each coherently coupled pair (absent in
    /// classical trajectories).
    pub coherences: Vec<CoherenceSeries>,
}

impl Trajectory {
    /// Recorded times in seconds.
    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|&n| n as f64 * self.dt).collect()
    }

    /// Occupation series of one node.
    pub fn population(&self, node: usize) -> &[f64] {
        &self.populations[node]
    }

    /// Number of recorded samples.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// True when nothing was recorded (never the case for [`evolve`]).
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Propagate `n_steps` steps, recording every `stride`-th state.
///
/// Step 0 (the initial state) is always recorded, as is the final step even
/// when `n_steps` is not a multiple of `stride`. Coherences are recorded
/// for every pair carrying a unitary channel.
pub fn evolve(
    map: &StepMap,
    rho0: &DensityMatrix,
    n_steps: u64,
    stride: u64,
) -> Result<Trajectory> {
    assert!(stride >= 1, "evolve: stride must be >= 1");
    let dim = map.dim();
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho0.dim(),
        });
    }
    let pairs: Vec<(usize, usize)> = {
        let mut pairs = Vec::new();
        for ch in map.channels() {
            if ch.kind() == crate::channels::ChannelKind::Unitary
                && !pairs.contains(&ch.node_pair())
            {
                pairs.push(ch.node_pair());
            }
        }
        pairs
    };

    let n_samples = (n_steps / stride) as usize + 1 + usize::from(n_steps % stride != 0);
    let mut traj = Trajectory {
        dt: map.dt(),
        steps: Vec::with_capacity(n_samples),
        populations: vec![Vec::with_capacity(n_samples); dim],
        coherences: pairs
            .iter()
            .map(|&(j, k)| CoherenceSeries {
                j,
                k,
                values: Vec::with_capacity(n_samples),
            })
            .collect(),
    };

    let mut v: Vec<C64> = rho0.to_vec().as_slice().to_vec();
    let mut scratch = vec![C64::new(0.0, 0.0); dim * dim];
    let record = |step: u64, v: &[C64], traj: &mut Trajectory| {
        traj.steps.push(step);
        for node in 0..dim {
            traj.populations[node].push(v[node + dim * node].re);
        }
        for series in traj.coherences.iter_mut() {
            series.values.push(v[series.j + dim * series.k]);
        }
    };

    record(0, &v, &mut traj);
    let superop = map.superoperator();
    for step in 1..=n_steps {
        superop.apply_vec_into(&v, &mut scratch);
        std::mem::swap(&mut v, &mut scratch);
        if step % stride == 0 || step == n_steps {
            record(step, &v, &mut traj);
        }
    }
    Ok(traj)
}

/// Result of a threshold-crossing search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingResult {
    /// The threshold that was crossed.
    pub eta: f64,
    /// The node whose occupation was watched (0-based).
    pub target: usize,
    /// Last step with occupation below `eta`.
    pub step_before: u64,
    /// First step with occupation at or above `eta`.
    pub step_after: u64,
    /// Occupation at `step_before`.
    pub occupation_before: f64,
    /// Occupation at `step_after`.
    pub occupation_after: f64,
    /// Crossing time in seconds, linearly interpolated between the two steps.
    pub t_c: f64,
}

/// First time the target occupation reaches `eta`, checked after every step.
///
/// Linear interpolation between the bracketing steps refines the estimate
/// inside the step. Errors with [`Error::ThresholdNotReached`] if `eta` is
/// not reached within `max_steps`.
pub fn crossing_time(
    map: &StepMap,
    rho0: &DensityMatrix,
    target: usize,
    eta: f64,
    max_steps: u64,
) -> Result<CrossingResult> {
    assert!(
        (0.0..1.0).contains(&eta) && eta > 0.0,
        "eta must be in (0, 1)"
    );
    let dim = map.dim();
    if rho0.dim() != dim || target >= dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho0.dim().max(target + 1),
        });
    }
    let diag = target + dim * target;
    let mut v: Vec<C64> = rho0.to_vec().as_slice().to_vec();
    let mut scratch = vec![C64::new(0.0, 0.0); dim * dim];
    let mut prev = v[diag].re;
    if prev >= eta {
        return Ok(CrossingResult {
            eta,
            target,
            step_before: 0,
            step_after: 0,
            occupation_before: prev,
            occupation_after: prev,
            t_c: 0.0,
        });
    }
    let superop = map.superoperator();
    for step in 1..=max_steps {
        superop.apply_vec_into(&v, &mut scratch);
        std::mem::swap(&mut v, &mut scratch);
        let now = v[diag].re;
        if now >= eta {
            let frac = if now > prev {
                (eta - prev) / (now - prev)
            } else {
                1.0
            };
            return Ok(CrossingResult {
                eta,
                target,
                step_before: step - 1,
                step_after: step,
                occupation_before: prev,
                occupation_after: now,
                t_c: map.dt() * ((step - 1) as f64 + frac),
            });
        }
        prev = now;
    }
    Err(Error::ThresholdNotReached {
        target,
        eta,
        max_steps,
        reached: prev,
    })
}

/// The per-step stochastic matrix of the classical (fully dephased) walk.
///
/// Column-stochastic: entry `(i, j)` is the probability of moving `j -> i`
/// in one step. Edges compose in the same canonical order as the quantum
/// channels; a coherent edge contributes a symmetric exchange with its
/// one-step transition probability and dephasing contributes nothing.
pub fn classical_step_matrix(g: &ReactionGraph) -> Result<nalgebra::DMatrix<f64>> {
    g.validate()?;
    let n = g.n_nodes;
    let mut t = nalgebra::DMatrix::<f64>::identity(n, n);
    for edge in g.canonical_edge_order() {
        let mut m = nalgebra::DMatrix::<f64>::identity(n, n);
        match edge {
            EdgeRef::Damping(p) => {
                let gamma = p.rate * g.dt;
                m[(p.source, p.source)] = 1.0 - gamma;
                m[(p.target, p.source)] = gamma;
            }
            EdgeRef::Coherent(p) => {
                let alpha = transition_probability(p, g.dt);
                m[(p.j, p.j)] = 1.0 - alpha;
                m[(p.k, p.k)] = 1.0 - alpha;
                m[(p.j, p.k)] = alpha;
                m[(p.k, p.j)] = alpha;
            }
            EdgeRef::Dephasing(_) => continue,
        }
        t = m * t;
    }
    Ok(t)
}

/// Propagate only the population vector under the classical step matrix.
///
/// This is the rate-equation reference: it coincides with the quantum
/// engine exactly when every coherent pair is fully dephased, and serves as
/// the classical baseline otherwise. The returned trajectory carries no
/// coherence series.
pub fn classical_evolve(g: &ReactionGraph, n_steps: u64, stride: u64) -> Result<Trajectory> {
    assert!(stride >= 1, "classical_evolve: stride must be >= 1");
    let t = classical_step_matrix(g)?;
    let n = g.n_nodes;
    let mut p = nalgebra::DVector::<f64>::zeros(n);
    p[g.initial_node] = 1.0;

    let mut traj = Trajectory {
        dt: g.dt,
        steps: Vec::new(),
        populations: vec![Vec::new(); n],
        coherences: Vec::new(),
    };
    let record = |step: u64, p: &nalgebra::DVector<f64>, traj: &mut Trajectory| {
        traj.steps.push(step);
        for node in 0..n {
            traj.populations[node].push(p[node]);
        }
    };
    record(0, &p, &mut traj);
    for step in 1..=n_steps {
        p = &t * p;
        if step % stride == 0 || step == n_steps {
            record(step, &p, &mut traj);
        }
    }
    Ok(traj)
}

/// Require that every coherent pair with live coupling is fully dephased
/// (`mu = rate * dt = 1`), i.e. the model genuinely is a classical chain.
fn require_classical(g: &ReactionGraph) -> Result<()> {
    for p in &g.coherent {
        if p.coupling == 0.0 {
            continue;
        }
        let mu = g.dephasing_mu(p.j, p.k).unwrap_or(0.0);
        if (mu - 1.0).abs() > 1e-12 {
            return Err(Error::NotClassical(format!(
                "coherent pair {}={} has mu = {mu}, need exactly 1",
                p.j + 1,
                p.k + 1
            )));
        }
    }
    Ok(())
}

/// Derive a per-chunk RNG seed from the master seed (splitmix64 step).
fn chunk_seed(master: u64, chunk: u64) -> u64 {
    let mut z = master.wrapping_add(chunk.wrapping_add(1).wrapping_mul(0x9e3779b97f4a7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Trials per RNG chunk. Fixed, so results are independent of worker count.
const MC_CHUNK: usize = 4096;

/// Sample first-hitting step counts of `target` by direct Monte Carlo on
/// the classical chain.
///
/// Only valid in the classical limit (`mu = 1` on every live coherent
/// pair); anything else is rejected with [`Error::NotClassical`]. Dwell
/// times are sampled geometrically, so runtime scales with the number of
/// jumps rather than steps. The walk is deterministic given `seed`
/// regardless of the worker count: trials are split into fixed-size chunks
/// with per-chunk derived seeds and merged in chunk order.
pub fn mc_sample_hitting(
    g: &ReactionGraph,
    target: usize,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    require_classical(g)?;
    let t = classical_step_matrix(g)?;
    let n = g.n_nodes;
    if target >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: target + 1,
        });
    }
    // Every node the walker can visit must be able to reach the target,
    // otherwise a trial could wander forever.
    let reachable = g.reachable_from(g.initial_node);
    if !reachable[target] {
        return Err(Error::TargetUnreachable {
            target: target + 1,
            initial: g.initial_node + 1,
        });
    }
    for node in 0..n {
        if reachable[node] && !g.reachable_from(node)[target] {
            return Err(Error::TargetUnreachable {
                target: target + 1,
                initial: node + 1,
            });
        }
    }

    // Per-node leave probability and normalised jump distribution.
    let mut leave = vec![0.0f64; n];
    let mut jumps: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..n {
        let stay = t[(j, j)];
        leave[j] = (1.0 - stay).max(0.0);
        if leave[j] > 0.0 {
            for i in 0..n {
                if i != j && t[(i, j)] > 0.0 {
                    jumps[j].push((i, t[(i, j)] / leave[j]));
                }
            }
        }
    }

    let n_chunks = n_trials.div_ceil(MC_CHUNK);
    let mut result: Vec<Vec<u64>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(chunk_seed(seed, chunk as u64));
            let count = MC_CHUNK.min(n_trials - chunk * MC_CHUNK);
            let mut hits = Vec::with_capacity(count);
            for _ in 0..count {
                let mut node = g.initial_node;
                let mut steps: u64 = 0;
                while node != target {
                    let p = leave[node];
                    // Geometric dwell: number of steps until the walker
                    // leaves, inclusive of the leaving step.
                    let dwell = if p >= 1.0 {
                        1
                    } else {
                        let u: f64 = rng.random();
                        let m = ((1.0 - u).ln() / (1.0 - p).ln()).ceil();
                        (m as u64).max(1)
                    };
                    steps += dwell;
                    let mut pick: f64 = rng.random();
                    let mut dest = jumps[node].last().expect("leaving node has jumps").0;
                    for &(cand, prob) in &jumps[node] {
                        if pick < prob {
                            dest = cand;
                            break;
                        }
                        pick -= prob;
                    }
                    node = dest;
                }
                hits.push(steps);
            }
            hits
        })
        .collect();
    Ok(result.drain(..).flatten().collect())
}

/// Count strict local maxima of a series: samples larger than both
/// neighbours. Endpoints never count.
pub fn strict_local_maxima(series: &[f64]) -> usize {
    series
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .count()
}

/// Count local maxima whose topographic prominence exceeds `prominence`:
/// the peak must rise at least that far above the valley floor separating
/// it from higher ground on both sides.
///
/// Used to tell genuine oscillation from a monotone hump or floating-point
/// wiggle: a single smooth rise-and-decay has one prominent maximum, an
/// oscillating series has many.
pub fn prominent_local_maxima(series: &[f64], prominence: f64) -> usize {
    let mut count = 0;
    for i in 1..series.len().saturating_sub(1) {
        if !(series[i] > series[i - 1] && series[i] > series[i + 1]) {
            continue;
        }
        let peak = series[i];
        // Walk outwards to the nearest strictly higher sample on each side
        // (or the series border), tracking the lowest point on the way;
        // prominence is the smaller of the two drops.
        let mut left_min = peak;
        for &x in series[..i].iter().rev() {
            if x > peak {
                break;
            }
            left_min = left_min.min(x);
        }
        let mut right_min = peak;
        for &x in &series[i + 1..] {
            if x > peak {
                break;
            }
            right_min = right_min.min(x);
        }
        let drop = (peak - left_min).min(peak - right_min);
        if drop > prominence {
            count += 1;
        }
    }
    count
}

/// Total trace of a vectorised state (diagnostic helper for callers that
/// track conservation along a propagation loop).
pub fn state_trace(v: &CVector, dim: usize) -> f64 {
    vec_trace(v.as_slice(), dim).re
}
