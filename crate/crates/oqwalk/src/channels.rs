//! Kraus channels for the three edge types of a reaction graph.
//!
//! Each constructor turns edge parameters plus a time step `dt` into a CPTP
//! channel given by explicit Kraus operators:
//!
//! * [`make_damping`] — one-way population transfer `source -> target` with
//!   per-step probability `gamma = rate * dt`;
//! * [`make_dephasing`] — decay of every coherence attached to one node by
//!   `sqrt(1 - mu)` per step, `mu = rate * dt`, populations untouched;
//! * [`make_unitary`] — coherent evolution of a two-node subspace under a
//!   detuned Rabi Hamiltonian, taken over the whole step in closed form.
//!
//! Rates and `dt` are in reciprocal seconds and seconds; the products
//! `rate * dt` must be valid probabilities, which is what
//! [`Error::TimeStepTooLarge`] polices.

use crate::linalg::{
    basis_matrix, complement_projector, max_abs, projector, CMatrix, Superoperator, C64,
};
use crate::{Error, Result};

/// One-way damping edge: population flows `source -> target` at `rate` (1/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingParams {
    /// Node receiving population (0-based index).
    pub target: usize,
    /// Node losing population (0-based index).
    pub source: usize,
    /// Transfer rate in 1/s; `rate * dt` is the per-step probability.
    pub rate: f64,
}

/// Dephasing edge on the ordered node pair `(j, k)`.
///
/// The channel is built on node `k`: every coherence `rho[a, k]`, `rho[k, b]`
/// with `a, b != k` shrinks by `sqrt(1 - mu)` per step, which in particular
/// damps the pair coherence `rho[j, k]`. Populations are exactly preserved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    /// First node of the labelled pair (0-based index).
    pub j: usize,
    /// Node the Kraus operators project on (0-based index).
    pub k: usize,
    /// Dephasing rate in 1/s; `mu = rate * dt` is the per-step strength.
    pub rate: f64,
}

/// Coherent edge between nodes `j` and `k`: a detuned Rabi problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    /// First node (0-based index), carrying level `omega_j`.
    pub j: usize,
    /// Second node (0-based index), carrying level `omega_k`.
    pub k: usize,
    /// On-site level of node `j` (1/s, hbar = 1).
    pub omega_j: f64,
    /// On-site level of node `k` (1/s).
    pub omega_k: f64,
    /// Symmetric coupling strength between the two nodes (1/s).
    pub coupling: f64,
}

impl CoherentParams {
    /// Half the level splitting, `delta = (omega_k - omega_j) / 2`.
    pub fn half_detuning(&self) -> f64 {
        0.5 * (self.omega_k - self.omega_j)
    }

    /// Mean level, `sigma = (omega_k + omega_j) / 2`.
    pub fn mean_level(&self) -> f64 {
        0.5 * (self.omega_k + self.omega_j)
    }

    /// Generalised Rabi rate `zeta = sqrt(delta^2 + coupling^2)`.
    ///
    /// The two-node populations oscillate at angular frequency `2 * zeta`.
    pub fn rabi_rate(&self) -> f64 {
        self.half_detuning().hypot(self.coupling)
    }
}

/// Which physical process a [`Channel`] implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Damping,
    Dephasing,
    Unitary,
}

/// A CPTP map over one time step, stored as explicit Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    kind: ChannelKind,
    label: String,
    pair: (usize, usize),
    kraus: Vec<CMatrix>,
    dim: usize,
    dt: f64,
}

impl Channel {
    /// The physical process this channel implements.
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// The node pair the channel acts on: `(target, source)` for damping,
    /// `(j, k)` for dephasing and coherent channels.
    pub fn node_pair(&self) -> (usize, usize) {
        self.pair
    }

    /// Human-readable edge label (1-based node numbers), e.g. `damping 2<-1`.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// The Kraus operators.
    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Hilbert-space dimension the channel acts on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Time step the channel was built for, in seconds.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Apply the channel directly: `rho -> sum_m K_m rho K_m^dagger`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.nrows(),
            });
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }

    /// The channel as a matrix on vectorised states.
    pub fn superoperator(&self) -> Superoperator {
        Superoperator::from_kraus(self.dim, &self.kraus)
            .expect("channel Kraus operators have consistent dimensions")
    }

    /// `max |sum_m K_m^dagger K_m - 1|`; zero for an exactly CPTP channel.
    pub fn cptp_defect(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        max_abs(&(sum - CMatrix::identity(self.dim, self.dim)))
    }
}

/// Check that `rate * dt` is a probability; shared by the two noise channels.
fn step_probability(rate: f64, dt: f64, label: &str) -> Result<f64> {
    if !(rate.is_finite() && dt.is_finite()) {
        return Err(Error::NonFinite {
            context: "channel rate or dt",
        });
    }
    let p = rate * dt;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::TimeStepTooLarge {
            label: label.to_string(),
            rate,
            dt,
            probability: p,
        });
    }
    Ok(p)
}

fn check_node(idx: usize, dim: usize, label: &str) -> Result<()> {
    if idx >= dim {
        return Err(Error::InvalidGraph(format!(
            "{label}: node {} out of range 1..={dim}",
            idx + 1
        )));
    }
    Ok(())
}

/// Build the amplitude-damping channel for one directed edge.
///
/// Kraus operators, with `gamma = rate * dt`, `t = target`, `s = source`:
///
/// ```text
/// K1 = sqrt(gamma) |t><s|
/// K2 = (1 - |s><s|) + sqrt(1 - gamma) |s><s|
/// ```
///
/// One application moves a `gamma` fraction of the source population to the
/// target and shrinks every coherence attached to the source by
/// `sqrt(1 - gamma)`.
pub fn make_damping(p: &DampingParams, dim: usize, dt: f64) -> Result<Channel> {
    let label = format!("damping {}<-{}", p.target + 1, p.source + 1);
    check_node(p.target, dim, &label)?;
    check_node(p.source, dim, &label)?;
    if p.target == p.source {
        return Err(Error::InvalidGraph(format!(
            "{label}: source and target must differ"
        )));
    }
    let gamma = step_probability(p.rate, dt, &label)?;
    let k1 = basis_matrix(dim, p.target, p.source) * C64::new(gamma.sqrt(), 0.0);
    let k2 = complement_projector(dim, p.source)
        + projector(dim, p.source) * C64::new((1.0 - gamma).sqrt(), 0.0);
    Ok(Channel {
        kind: ChannelKind::Damping,
        label,
        pair: (p.target, p.source),
        kraus: vec![k1, k2],
        dim,
        dt,
    })
}

/// Build the pure-dephasing channel for one node pair.
///
/// Kraus operators, with `mu = rate * dt` and `k` the projected node:
///
/// ```text
/// V1 = sqrt(mu) |k><k|
/// V2 = (1 - |k><k|) + sqrt(1 - mu) |k><k|
/// ```
///
/// Populations are fixed exactly; every coherence attached to node `k`
/// shrinks by `sqrt(1 - mu)` per application. `mu = 1` kills those
/// coherences in a single step (the classical limit), `mu = 0` is the
/// identity.
pub fn make_dephasing(p: &DephasingParams, dim: usize, dt: f64) -> Result<Channel> {
    let label = format!("dephasing {}~{}", p.j + 1, p.k + 1);
    check_node(p.j, dim, &label)?;
    check_node(p.k, dim, &label)?;
    if p.j == p.k {
        return Err(Error::InvalidGraph(format!(
            "{label}: the two nodes must differ"
        )));
    }
    let mu = step_probability(p.rate, dt, &label)?;
    let v1 = projector(dim, p.k) * C64::new(mu.sqrt(), 0.0);
    let v2 =
        complement_projector(dim, p.k) + projector(dim, p.k) * C64::new((1.0 - mu).sqrt(), 0.0);
    Ok(Channel {
        kind: ChannelKind::Dephasing,
        label,
        pair: (p.j, p.k),
        kraus: vec![v1, v2],
        dim,
        dt,
    })
}

/// The two-node Hamiltonian of a coherent edge embedded in `dim` dimensions:
///
/// ```text
/// H = omega_j |j><j| + omega_k |k><k| + coupling (|j><k| + |k><j|)
/// ```
pub fn hamiltonian(p: &CoherentParams, dim: usize) -> CMatrix {
    let mut h = CMatrix::zeros(dim, dim);
    h[(p.j, p.j)] = C64::new(p.omega_j, 0.0);
    h[(p.k, p.k)] = C64::new(p.omega_k, 0.0);
    h[(p.j, p.k)] = C64::new(p.coupling, 0.0);
    h[(p.k, p.j)] = C64::new(p.coupling, 0.0);
    h
}

/// `exp(-i H t)` for the two-node Hamiltonian, in closed form.
///
/// With `delta` the half-detuning, `sigma` the mean level, `zeta` the
/// generalised Rabi rate and `e∓ = exp(-i (sigma ∓ zeta) t)`:
///
/// ```text
/// U = (1 - |j><j| - |k><k|)
///   + 1/2 [ (1 + delta/zeta) e- + (1 - delta/zeta) e+ ] |j><j|
///   + 1/2 [ (1 - delta/zeta) e- + (1 + delta/zeta) e+ ] |k><k|
///   - coupling/(2 zeta) [ e- - e+ ] (|j><k| + |k><j|)
/// ```
///
/// The degenerate uncoupled case `zeta = 0` reduces to equal phases
/// `exp(-i sigma t)` on both nodes. Everything outside the pair is left
/// untouched, so the full-space operator is unitary whenever the block is.
pub fn closed_form_unitary(p: &CoherentParams, dim: usize, t: f64) -> CMatrix {
    let delta = p.half_detuning();
    let sigma = p.mean_level();
    let zeta = p.rabi_rate();
    let mut u = CMatrix::identity(dim, dim);
    let phase = |w: f64| -> C64 {
        let phi = -w * t;
        C64::new(phi.cos(), phi.sin())
    };
    if zeta == 0.0 {
        let e = phase(sigma);
        u[(p.j, p.j)] = e;
        u[(p.k, p.k)] = e;
        return u;
    }
    let em = phase(sigma - zeta);
    let ep = phase(sigma + zeta);
    let r = delta / zeta;
    u[(p.j, p.j)] = 0.5 * ((1.0 + r) * em + (1.0 - r) * ep);
    u[(p.k, p.k)] = 0.5 * ((1.0 - r) * em + (1.0 + r) * ep);
    let off = -(p.coupling / (2.0 * zeta)) * (em - ep);
    u[(p.j, p.k)] = off;
    u[(p.k, p.j)] = off;
    u
}

/// Build the one-step unitary channel of a coherent edge.
///
/// The single Kraus operator is [`closed_form_unitary`] evaluated at `dt`,
/// i.e. the exact propagator over the whole step rather than a first-order
/// expansion, so the channel stays exactly unitary for any step size.
pub fn make_unitary(p: &CoherentParams, dim: usize, dt: f64) -> Result<Channel> {
    let label = format!("coherent {}={}", p.j + 1, p.k + 1);
    check_node(p.j, dim, &label)?;
    check_node(p.k, dim, &label)?;
    if p.j == p.k {
        return Err(Error::InvalidGraph(format!(
            "{label}: the two nodes must differ"
        )));
    }
    if !(p.omega_j.is_finite() && p.omega_k.is_finite() && p.coupling.is_finite() && dt.is_finite())
    {
        return Err(Error::NonFinite {
            context: "coherent edge parameters",
        });
    }
    let u = closed_form_unitary(p, dim, dt);
    Ok(Channel {
        kind: ChannelKind::Unitary,
        label,
        pair: (p.j, p.k),
        kraus: vec![u],
        dim,
        dt,
    })
}

/// Probability that the coherent edge has moved a particle across after
/// evolving for time `t`, starting from one of the two nodes:
///
/// ```text
/// alpha(t) = coupling^2 / zeta^2 * sin^2(zeta t)
///          = coupling^2 / (2 zeta^2) * (1 - cos(2 zeta t))
/// ```
///
/// Zero coupling gives identically zero, including the degenerate
/// `zeta = 0` case.
pub fn transition_probability(p: &CoherentParams, t: f64) -> f64 {
    if p.coupling == 0.0 {
        return 0.0;
    }
    let zeta = p.rabi_rate();
    let s = (zeta * t).sin();
    (p.coupling / zeta).powi(2) * s * s
}

/// Deviation of the closed-form power law for the traceless block operator.
///
/// The operator `A = delta (|k><k| - |j><j|) + coupling (|j><k| + |k><j|)`
/// satisfies, after scaling by `zeta^n`:
///
/// ```text
/// (A/zeta)^n = A/zeta   for odd n,
/// (A/zeta)^n = identity for even n (on the two-node block).
/// ```
///
/// This function computes the left side by repeated matrix multiplication
/// and returns the largest entrywise deviation from the closed form. It is a
/// diagnostic used by the test suite; `n` must lie in `1..=64`.
pub fn power_identity_check(p: &CoherentParams, n: u32) -> f64 {
    assert!(
        (1..=64).contains(&n),
        "power_identity_check: n must be 1..=64"
    );
    let delta = p.half_detuning();
    let zeta = p.rabi_rate();
    if zeta == 0.0 {
        // A vanishes identically; both sides are zero.
        return 0.0;
    }
    let b = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(-delta / zeta, 0.0),
            C64::new(p.coupling / zeta, 0.0),
            C64::new(p.coupling / zeta, 0.0),
            C64::new(delta / zeta, 0.0),
        ],
    );
    let mut lhs = CMatrix::identity(2, 2);
    for _ in 0..n {
        lhs = &lhs * &b;
    }
    let rhs = if n % 2 == 1 {
        b
    } else {
        CMatrix::identity(2, 2)
    };
    crate::linalg::max_abs_diff(&lhs, &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_defect, mat_exp, max_abs_diff};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// A dense Hermitian test state with unit trace (not necessarily
    /// positive, which none of the channel algebra relies on).
    fn hermitian_state(dim: usize, seed: u64) -> CMatrix {
        let mut state = seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(7);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = CMatrix::from_fn(dim, dim, |_, _| c(next(), next()));
        let mut h = (&a + a.adjoint()) * c(0.5, 0.0);
        let tr = crate::linalg::trace(&h);
        let shift = (C64::new(1.0, 0.0) - tr) / (dim as f64);
        for i in 0..dim {
            h[(i, i)] += shift;
        }
        h
    }

    #[test]
    fn damping_moves_the_stated_fraction() {
        // rate * dt = 0.3 on a 2-node graph: |source> loses 0.3 of its
        // population to |target| in one application.
        let p = DampingParams {
            target: 0,
            source: 1,
            rate: 0.3,
        };
        let ch = make_damping(&p, 2, 1.0).unwrap();
        let rho = projector(2, 1);
        let out = ch.apply(&rho).unwrap();
        assert!((out[(0, 0)] - c(0.3, 0.0)).norm() < 1e-15);
        assert!((out[(1, 1)] - c(0.7, 0.0)).norm() < 1e-15);
        assert!(ch.cptp_defect() < 1e-15);
    }

    #[test]
    fn damping_boundary_probabilities_are_exact() {
        let full = make_damping(
            &DampingParams {
                target: 0,
                source: 1,
                rate: 1.0,
            },
            2,
            1.0,
        )
        .unwrap();
        let out = full.apply(&projector(2, 1)).unwrap();
        assert!((out[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(out[(1, 1)].norm() < 1e-15);

        let none = make_damping(
            &DampingParams {
                target: 0,
                source: 1,
                rate: 0.0,
            },
            2,
            1.0,
        )
        .unwrap();
        let rho = hermitian_state(2, 3);
        assert!(max_abs_diff(&none.apply(&rho).unwrap(), &rho) < 1e-15);
    }

    #[test]
    fn damping_rejects_oversized_steps_naming_the_edge() {
        let p = DampingParams {
            target: 1,
            source: 0,
            rate: 1e8,
        };
        let err = make_damping(&p, 4, 1e-6).unwrap_err();
        match err {
            Error::TimeStepTooLarge {
                label, probability, ..
            } => {
                assert_eq!(label, "damping 2<-1");
                assert!((probability - 100.0).abs() < 1e-9);
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn damping_rejects_bad_nodes() {
        assert!(matches!(
            make_damping(
                &DampingParams {
                    target: 4,
                    source: 0,
                    rate: 1.0
                },
                4,
                1e-3
            ),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            make_damping(
                &DampingParams {
                    target: 1,
                    source: 1,
                    rate: 1.0
                },
                4,
                1e-3
            ),
            Err(Error::InvalidGraph(_))
        ));
    }

    #[test]
    fn dephasing_fixes_populations_and_scales_coherences() {
        let dim = 4;
        let p = DephasingParams {
            j: 2,
            k: 1,
            rate: 0.4,
        };
        let ch = make_dephasing(&p, dim, 1.0).unwrap();
        let rho = hermitian_state(dim, 11);
        let out = ch.apply(&rho).unwrap();
        let shrink = (1.0_f64 - 0.4).sqrt();
        for a in 0..dim {
            for b in 0..dim {
                let expected = if a == b {
                    rho[(a, b)] // populations bit-exact
                } else if a == p.k || b == p.k {
                    rho[(a, b)] * c(shrink, 0.0)
                } else {
                    rho[(a, b)]
                };
                assert!(
                    (out[(a, b)] - expected).norm() < 1e-15,
                    "entry ({a},{b}) wrong"
                );
            }
        }
        // Populations must match *exactly*, not merely to rounding.
        for a in 0..dim {
            assert_eq!(out[(a, a)], rho[(a, a)]);
        }
    }

    #[test]
    fn repeated_dephasing_follows_the_half_power_decay_law() {
        // n applications of strength mu shrink a coherence by (1-mu)^(n/2).
        let dim = 3;
        let mu = 1e-6;
        let ch = make_dephasing(
            &DephasingParams {
                j: 2,
                k: 1,
                rate: mu,
            },
            dim,
            1.0,
        )
        .unwrap();
        let mut rho = hermitian_state(dim, 23);
        let c0 = rho[(2, 1)];
        let n = 40;
        for _ in 0..n {
            rho = ch.apply(&rho).unwrap();
        }
        let expected = c0 * c((1.0 - mu).powf(n as f64 / 2.0), 0.0);
        assert!(
            (rho[(2, 1)] - expected).norm() < 1e-12 * c0.norm(),
            "decay law violated: {} vs {}",
            rho[(2, 1)],
            expected
        );
    }

    #[test]
    fn full_dephasing_kills_pair_coherence_in_one_step() {
        let dim = 4;
        let ch = make_dephasing(
            &DephasingParams {
                j: 2,
                k: 1,
                rate: 1.0,
            },
            dim,
            1.0,
        )
        .unwrap();
        let rho = hermitian_state(dim, 31);
        let out = ch.apply(&rho).unwrap();
        assert!(out[(2, 1)].norm() < 1e-16);
        assert!(out[(0, 1)].norm() < 1e-16);
        // Coherences not touching node k survive.
        assert!((out[(0, 2)] - rho[(0, 2)]).norm() < 1e-16);
    }

    #[test]
    fn closed_form_unitary_matches_matrix_exponential() {
        let mut state = 0xdeadbeefu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..200 {
            let p = CoherentParams {
                j: 2,
                k: 1,
                omega_j: 2e8 * next(),
                omega_k: 2e8 * next(),
                coupling: 2e8 * next(),
            };
            let t = 1e-7 * (next() + 0.5);
            let dim = 4;
            let u_closed = closed_form_unitary(&p, dim, t);
            let u_exp = mat_exp(&hamiltonian(&p, dim), t).unwrap();
            assert!(
                max_abs_diff(&u_closed, &u_exp) < 1e-12,
                "closed form disagrees with exponential"
            );
        }
    }

    #[test]
    fn closed_form_unitary_handles_the_degenerate_edge() {
        let p = CoherentParams {
            j: 0,
            k: 1,
            omega_j: 5.0,
            omega_k: 5.0,
            coupling: 0.0,
        };
        let u = closed_form_unitary(&p, 3, 0.2);
        let expected = mat_exp(&hamiltonian(&p, 3), 0.2).unwrap();
        assert!(max_abs_diff(&u, &expected) < 1e-14);
    }

    #[test]
    fn transition_probability_matches_the_propagator_entry() {
        let p = CoherentParams {
            j: 2,
            k: 1,
            omega_j: 1.76e7,
            omega_k: 0.0,
            coupling: 4.06e7,
        };
        for i in 0..100 {
            let t = 1e-9 * i as f64;
            let u = closed_form_unitary(&p, 4, t);
            let alpha = transition_probability(&p, t);
            assert!(
                (u[(p.j, p.k)].norm_sqr() - alpha).abs() < 1e-12,
                "alpha mismatch at t = {t}"
            );
        }
    }

    #[test]
    fn transition_probability_is_periodic_with_the_rabi_period() {
        let p = CoherentParams {
            j: 0,
            k: 1,
            omega_j: 3e7,
            omega_k: -1e7,
            coupling: 2e7,
        };
        let period = std::f64::consts::PI / p.rabi_rate();
        for i in 1..20 {
            let t = 3.7e-9 * i as f64;
            let diff =
                (transition_probability(&p, t) - transition_probability(&p, t + period)).abs();
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn power_identity_holds_for_small_orders() {
        let p = CoherentParams {
            j: 0,
            k: 1,
            omega_j: 1.76e7,
            omega_k: 0.0,
            coupling: 4.06e7,
        };
        for n in 1..=20 {
            assert!(power_identity_check(&p, n) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn unitary_channel_is_exactly_unitary() {
        let p = CoherentParams {
            j: 2,
            k: 1,
            omega_j: 1.76e7,
            omega_k: 0.0,
            coupling: 4.06e7,
        };
        let ch = make_unitary(&p, 4, 1e-14).unwrap();
        assert!(ch.cptp_defect() < 1e-14);
        // Channel application preserves hermiticity and trace.
        let rho = hermitian_state(4, 47);
        let out = ch.apply(&rho).unwrap();
        assert!(hermiticity_defect(&out) < 1e-14);
        assert!((crate::linalg::trace(&out) - crate::linalg::trace(&rho)).norm() < 1e-13);
    }

    proptest! {
        /// Every constructible channel is CPTP to near machine precision.
        #[test]
        fn all_channels_are_cptp(
            gamma in 0.0f64..=1.0,
            mu in 0.0f64..=1.0,
            wj in -1e8f64..1e8,
            wk in -1e8f64..1e8,
            omega in -1e8f64..1e8,
        ) {
            let dim = 4;
            let d = make_damping(&DampingParams { target: 3, source: 1, rate: gamma }, dim, 1.0).unwrap();
            prop_assert!(d.cptp_defect() < 1e-12);
            let v = make_dephasing(&DephasingParams { j: 2, k: 1, rate: mu }, dim, 1.0).unwrap();
            prop_assert!(v.cptp_defect() < 1e-12);
            let u = make_unitary(
                &CoherentParams { j: 2, k: 1, omega_j: wj, omega_k: wk, coupling: omega },
                dim,
                1e-8,
            ).unwrap();
            prop_assert!(u.cptp_defect() < 1e-12);
        }

        /// Superoperator action agrees with direct Kraus application.
        #[test]
        fn superoperator_matches_direct_application(seed in 0u64..300, gamma in 0.0f64..=1.0) {
            let dim = 4;
            let ch = make_damping(
                &DampingParams { target: 0, source: 2, rate: gamma },
                dim,
                1.0,
            ).unwrap();
            let rho = hermitian_state(dim, seed);
            let direct = ch.apply(&rho).unwrap();
            let via_superop = ch.superoperator().apply(&rho).unwrap();
            prop_assert!(max_abs_diff(&direct, &via_superop) < 1e-12);
        }
    }
}
