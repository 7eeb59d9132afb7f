//! First-hitting statistics for a target node.
//!
//! The hitting protocol is measure-after-every-step: propagate one step,
//! check whether the walker is at the target, and if not project it back
//! onto the complement and continue. Nothing is measured at step zero, so
//! `f(0) = 0` by definition. Because the projection is a diagonal cut
//! (zero the target row and column of the density matrix), the survivor
//! branch can be propagated unnormalised and everything of interest read
//! off directly:
//!
//! * the hitting distribution `f(n)` — probability of first arrival at
//!   step `n` — is the target population right after each step,
//! * the survival tail after `n` steps is the trace of the survivor state,
//! * the exact mean hitting step count is a resolvent expression in the
//!   survival map `M` (one step followed by the cut): two linear solves
//!   against `1 - M`, no iteration and no truncation error,
//! * the probability generating function `F(z) = sum_n f(n) z^n` is one
//!   linear solve against `1 - zM`.

use num_complex::Complex64;

use crate::linalg::{
    complement_projector, projector, vec_trace, CMatrix, CVector, DensityMatrix, Superoperator,
    C64, SINGULAR_FLOOR,
};
use crate::reaction::StepMap;
use crate::{Error, Result};

/// Slack on `|z| <= 1`: inside the closed unit disc the hitting series
/// converges because the distribution is sub-stochastic, so those points
/// are accepted without estimating the spectral radius.
const UNIT_DISC_SLACK: f64 = 1e-12;

/// The two conditioning maps of the null-measurement protocol for one
/// target node.
///
/// `p_map` is the null-result update `rho -> P rho P` with `P` the
/// projector onto "anywhere but the target"; `q_map` is the hit extraction
/// `rho -> Q rho Q` with `Q` the target projector. Neither preserves trace
/// on its own, but together they preserve it exactly: the cross blocks
/// they discard are traceless.
#[derive(Debug, Clone)]
pub struct MeasurementMaps {
    target: usize,
    p_map: Superoperator,
    q_map: Superoperator,
}

impl MeasurementMaps {
    /// Build the pair of maps for `target` in an `dim`-node system.
    pub fn new(dim: usize, target: usize) -> Result<Self> {
        check_target(dim, target)?;
        let q = projector(dim, target);
        let p = complement_projector(dim, target);
        Ok(MeasurementMaps {
            target,
            p_map: Superoperator::sandwich(&p, &p)?,
            q_map: Superoperator::sandwich(&q, &q)?,
        })
    }

    /// The watched node (0-based).
    pub fn target(&self) -> usize {
        self.target
    }

    /// Survival branch `rho -> P rho P`.
    pub fn p_map(&self) -> &Superoperator {
        &self.p_map
    }

    /// Hit branch `rho -> Q rho Q`.
    pub fn q_map(&self) -> &Superoperator {
        &self.q_map
    }
}

/// First-hitting distribution of a target node.
///
/// `f[n]` is the probability that the walker is found at the target for
/// the first time at the measurement after step `n`; `f[0]` is always zero
/// (no measurement happens before the first step). The entries plus
/// `tail_mass` sum to one; `tail_mass` is the probability of still being
/// unabsorbed after the last computed step.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingResult {
    /// Target node (0-based).
    pub target: usize,
    /// Time step of the underlying evolution, in seconds.
    pub dt: f64,
    /// `f[n]` for `n = 0..=n_max`, with `f[0] == 0`.
    pub f: Vec<f64>,
    /// Survival probability after the last computed step.
    pub tail_mass: f64,
}

impl HittingResult {
    /// Largest computed step index.
    pub fn n_max(&self) -> u64 {
        (self.f.len() - 1) as u64
    }

    /// Total hitting probability captured so far, `sum_n f(n)`.
    pub fn total(&self) -> f64 {
        self.f.iter().sum()
    }

    /// Truncated mean step count `sum_n n f(n)`.
    ///
    /// Underestimates the exact mean by at most roughly `tail_mass` times
    /// the residual lifetime past `n_max`; use [`mean_from_distribution`]
    /// for the tail-checked version or [`mean_hitting_steps`] for the
    /// exact one.
    pub fn mean_steps(&self) -> f64 {
        self.f.iter().enumerate().map(|(n, &p)| n as f64 * p).sum()
    }

    /// Truncated mean hitting time in seconds.
    pub fn mean_time(&self) -> f64 {
        self.mean_steps() * self.dt
    }

    /// Most probable step count: the smallest `n` maximising `f(n)`.
    pub fn most_probable_step(&self) -> u64 {
        let mut best = 0usize;
        for (n, &p) in self.f.iter().enumerate() {
            if p > self.f[best] {
                best = n;
            }
        }
        best as u64
    }
}

/// Tail-checked truncated mean: `(steps, seconds)`.
///
/// Errors with [`Error::TailTooHeavy`] when `tail_mass` exceeds
/// `tail_bound`, i.e. the distribution is not effectively normalised and
/// the truncated sum would silently underestimate the mean.
pub fn mean_from_distribution(d: &HittingResult, tail_bound: f64) -> Result<(f64, f64)> {
    if d.tail_mass > tail_bound {
        return Err(Error::TailTooHeavy {
            tail_mass: d.tail_mass,
            bound: tail_bound,
            n_max: d.n_max(),
        });
    }
    Ok((d.mean_steps(), d.mean_time()))
}

/// Zero the target row and column of a vectorised state: the null-result
/// measurement update, exact because the projector is diagonal.
fn project_out(v: &mut [C64], dim: usize, target: usize) {
    for j in 0..dim {
        v[target + dim * j] = C64::new(0.0, 0.0);
        v[j + dim * target] = C64::new(0.0, 0.0);
    }
}

/// The survival map `M`: one evolution step followed by projection onto
/// "not at the target". Iterating `M` propagates the unnormalised
/// not-yet-absorbed branch.
pub fn survival_map(map: &StepMap, target: usize) -> Result<Superoperator> {
    let maps = MeasurementMaps::new(map.dim(), target)?;
    maps.p_map().compose(map.superoperator())
}

fn check_target(dim: usize, target: usize) -> Result<()> {
    if target >= dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: target + 1,
        });
    }
    Ok(())
}

fn initial_vector(rho0: &DensityMatrix, dim: usize) -> Result<Vec<C64>> {
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho0.dim(),
        });
    }
    Ok(rho0.to_vec().as_slice().to_vec())
}

/// Compute the hitting distribution out to exactly `n_max` steps.
///
/// Always returns the full range; an unreachable target simply yields an
/// all-zero distribution with `tail_mass = 1`.
pub fn hitting_distribution(
    map: &StepMap,
    rho0: &DensityMatrix,
    target: usize,
    n_max: u64,
) -> Result<HittingResult> {
    assert!(n_max >= 1, "n_max must be at least 1");
    let dim = map.dim();
    check_target(dim, target)?;
    let mut v = initial_vector(rho0, dim)?;
    let diag = target + dim * target;
    let mut f = Vec::with_capacity(n_max as usize + 1);
    f.push(0.0);
    let superop = map.superoperator();
    let mut scratch = vec![C64::new(0.0, 0.0); dim * dim];
    for _ in 1..=n_max {
        superop.apply_vec_into(&v, &mut scratch);
        std::mem::swap(&mut v, &mut scratch);
        f.push(v[diag].re);
        project_out(&mut v, dim, target);
    }
    let tail_mass = vec_trace(&v, dim).re;
    Ok(HittingResult {
        target,
        dt: map.dt(),
        f,
        tail_mass,
    })
}

/// Compute the hitting distribution until the survival tail drops to
/// `tail_bound`.
///
/// Errors with [`Error::TailTooHeavy`] if the tail is still above the
/// bound after `max_steps` steps (an unreachable target always ends up
/// here).
pub fn hitting_distribution_auto(
    map: &StepMap,
    rho0: &DensityMatrix,
    target: usize,
    tail_bound: f64,
    max_steps: u64,
) -> Result<HittingResult> {
    assert!(tail_bound > 0.0, "tail_bound must be positive");
    let dim = map.dim();
    check_target(dim, target)?;
    let mut v = initial_vector(rho0, dim)?;
    let diag = target + dim * target;
    let mut f = vec![0.0];
    let superop = map.superoperator();
    let mut scratch = vec![C64::new(0.0, 0.0); dim * dim];
    let mut tail = vec_trace(&v, dim).re;
    for _ in 1..=max_steps {
        superop.apply_vec_into(&v, &mut scratch);
        std::mem::swap(&mut v, &mut scratch);
        f.push(v[diag].re);
        project_out(&mut v, dim, target);
        // The trace only changes at the cut, so this stays cheap relative
        // to the step itself; checking every step keeps n_max minimal.
        tail = vec_trace(&v, dim).re;
        if tail <= tail_bound {
            return Ok(HittingResult {
                target,
                dt: map.dt(),
                f,
                tail_mass: tail,
            });
        }
    }
    Err(Error::TailTooHeavy {
        tail_mass: tail,
        bound: tail_bound,
        n_max: max_steps,
    })
}

/// Check `1 - zM` is safely invertible and return its LU factorisation.
fn resolvent_lu(
    m: &Superoperator,
    z: C64,
) -> Result<nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>> {
    let d2 = m.state_dim() * m.state_dim();
    let mut a = CMatrix::identity(d2, d2);
    a -= m.matrix() * z;
    let sv = a.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if smax == 0.0 { 0.0 } else { smin / smax };
    if ratio < SINGULAR_FLOOR {
        return Err(Error::SingularOperator {
            ratio,
            floor: SINGULAR_FLOOR,
        });
    }
    Ok(a.lu())
}

fn lu_solve(lu: &nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>, b: &CVector) -> Result<CVector> {
    lu.solve(b).ok_or(Error::SingularOperator {
        ratio: 0.0,
        floor: SINGULAR_FLOOR,
    })
}

/// Exact mean number of steps to first hit the target.
///
/// Evaluates `sum_n n f(n)` in closed form through the resolvent of the
/// survival map `M`: the mean is the hit probability extracted from
/// `(1 - M)^{-2}` applied to the initial state — two linear solves, no
/// step iteration, no truncation.
///
/// A walk that never fully absorbs (unreachable target, or survivors
/// trapped elsewhere) makes `1 - M` singular; that surfaces as
/// [`Error::SingularOperator`] and means the expected hitting time is
/// infinite.
pub fn mean_hitting_steps(map: &StepMap, rho0: &DensityMatrix, target: usize) -> Result<f64> {
    let dim = map.dim();
    let m = survival_map(map, target)?;
    let w0 = CVector::from_column_slice(&initial_vector(rho0, dim)?);
    let lu = resolvent_lu(&m, C64::new(1.0, 0.0))?;
    let x = lu_solve(&lu, &w0)?;
    let y = lu_solve(&lu, &x)?;
    let hit = map.superoperator().apply_vec(&y);
    Ok(hit[target + dim * target].re)
}

/// Exact mean hitting time in seconds, `mean_hitting_steps * dt`.
pub fn mean_hitting_time(map: &StepMap, rho0: &DensityMatrix, target: usize) -> Result<f64> {
    Ok(mean_hitting_steps(map, rho0, target)? * map.dt())
}

/// Probability generating function `F(z) = sum_n f(n) z^n` of the hitting
/// distribution, evaluated in closed form via one resolvent solve.
///
/// `F(0) = 0` (nothing is measured at step zero), `F(1)` is the total
/// hitting probability and `F'(1)` the mean step count. Convergence: the
/// closed unit disc is always accepted (the series is dominated by a
/// probability distribution there); outside it the series only converges
/// while `|z|` stays below the reciprocal spectral radius of the survival
/// map, so points violating that estimate are rejected with
/// [`Error::OutsideConvergence`].
pub fn generating_function(
    map: &StepMap,
    rho0: &DensityMatrix,
    target: usize,
    z: Complex64,
) -> Result<Complex64> {
    let dim = map.dim();
    let m = survival_map(map, target)?;
    let z_abs = z.norm();
    if z_abs > 1.0 + UNIT_DISC_SLACK {
        let radius = m.spectral_radius_estimate();
        if z_abs * radius >= 1.0 {
            return Err(Error::OutsideConvergence {
                z_abs,
                spectral_radius: radius,
            });
        }
    }
    let w0 = CVector::from_column_slice(&initial_vector(rho0, dim)?);
    let lu = resolvent_lu(&m, z)?;
    let x = lu_solve(&lu, &w0)?;
    let hit = map.superoperator().apply_vec(&x);
    Ok(z * hit[target + dim * target])
}
