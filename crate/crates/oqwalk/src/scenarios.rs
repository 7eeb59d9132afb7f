//! Parameter sweeps and the named preset experiments.
//!
//! A sweep takes a base graph, mutates one named parameter across a grid,
//! and computes the requested observables at every point: the exact mean
//! hitting time (resolvent), the hitting distribution, the threshold
//! crossing time, or a full trajectory. Hitting statistics always target
//! the highest-numbered node — the absorbing product state in the
//! four-node model, which is what the observable names `t41`/`f41` refer
//! to.
//!
//! Grid points are independent: the driver fans them out over a worker
//! pool and collects in grid order, so a full sweep is bit-identical to
//! running each point by itself.

use rayon::prelude::*;

use crate::config::{SweepSection, SweptParameter, DEFAULT_MAX_STEPS, DEFAULT_TAIL_BOUND};
use crate::dynamics::{crossing_time, evolve, Trajectory};
use crate::hitting::{hitting_distribution_auto, mean_hitting_steps, HittingResult};
use crate::reaction::{cryptochrome_preset, ReactionGraph};
use crate::{Error, Result};

/// One parameter sweep: base model, the knob to turn, and what to record.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Model every grid point starts from.
    pub base: ReactionGraph,
    /// The parameter the grid values are applied to.
    pub parameter: SweptParameter,
    /// Grid values, in output order.
    pub grid: Vec<f64>,
    /// Occupation threshold for crossing times; ignored when the swept
    /// parameter is itself `eta` (each grid value is then the threshold).
    pub eta: Option<f64>,
    /// Record the exact mean hitting time.
    pub t41: bool,
    /// Record the hitting distribution (tail-bounded automatic length).
    pub f41: bool,
    /// Record a trajectory of this many steps.
    pub trajectory_steps: Option<u64>,
    /// Recording stride for trajectories.
    pub trajectory_stride: u64,
    /// Tail mass at which a hitting distribution may stop.
    pub tail_bound: f64,
    /// Step cap for distributions and crossing searches.
    pub max_steps: u64,
}

impl SweepSpec {
    /// A sweep recording only the exact mean hitting time.
    pub fn mean_only(base: ReactionGraph, parameter: SweptParameter, grid: Vec<f64>) -> Self {
        SweepSpec {
            base,
            parameter,
            grid,
            eta: None,
            t41: true,
            f41: false,
            trajectory_steps: None,
            trajectory_stride: 1000,
            tail_bound: DEFAULT_TAIL_BOUND,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    /// Assemble a sweep from a parsed `[sweep]` section and its graph.
    pub fn from_section(base: ReactionGraph, s: &SweepSection) -> Self {
        SweepSpec {
            base,
            parameter: s.parameter,
            grid: s.grid.clone(),
            eta: s.eta,
            t41: s.t41,
            f41: s.f41,
            trajectory_steps: s.trajectory_steps,
            trajectory_stride: s.trajectory_stride,
            tail_bound: s.tail_bound,
            max_steps: s.max_steps,
        }
    }

    /// Structural checks that do not depend on grid values: the base graph
    /// must validate and the grid must be nonempty. Per-point problems
    /// (e.g. a grid value pushing a probability past 1) surface from
    /// [`run_sweep`] wrapped in [`Error::AtGridPoint`].
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.grid.is_empty() {
            return Err(Error::InvalidGraph("sweep grid is empty".to_string()));
        }
        if self.parameter == SweptParameter::Eta {
            for &v in &self.grid {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::InvalidGraph(format!(
                        "eta grid value {v} outside (0, 1)"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Observables recorded at one grid point. Fields the sweep did not
/// request stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// The swept parameter (for labelling output rows).
    pub parameter: SweptParameter,
    /// Grid value this row was computed at.
    pub value: f64,
    /// Effective per-step dephasing strength on the pair edge `3 ~ 2`
    /// after applying the parameter, when the model has that edge.
    pub mu32: Option<f64>,
    /// Exact mean hitting step count.
    pub n41: Option<f64>,
    /// Exact mean hitting time in seconds.
    pub t41: Option<f64>,
    /// Crossing time of the threshold occupation, in seconds.
    pub t_c: Option<f64>,
    /// Tail mass left when the hitting distribution stopped.
    pub tail_mass: Option<f64>,
    /// The hitting distribution itself, when requested.
    pub distribution: Option<HittingResult>,
    /// The trajectory, when requested.
    pub trajectory: Option<Trajectory>,
}

/// Apply one named parameter value to a copy of the base graph.
///
/// The rate parameters name edges of the four-node model (`q32` the
/// dephasing edge on `3 ~ 2`, `k21`/`k42` the damping edges `2 <- 1` and
/// `4 <- 2`, `omega3` the on-site level of node 3, `mu32` the per-step
/// dephasing strength `q32 * dt`); applying them to a graph lacking the
/// edge is an error. `eta` leaves the graph untouched — it parametrises
/// the crossing threshold, not the model.
pub fn apply_parameter(
    base: &ReactionGraph,
    parameter: SweptParameter,
    value: f64,
) -> Result<ReactionGraph> {
    match parameter {
        SweptParameter::Q32 => base.clone().with_dephasing_rate(2, 1, value),
        SweptParameter::Mu32 => base.clone().with_dephasing_rate(2, 1, value / base.dt),
        SweptParameter::Omega3 => base.clone().with_level(2, value),
        SweptParameter::K21 => base.clone().with_damping_rate(1, 0, value),
        SweptParameter::K42 => base.clone().with_damping_rate(3, 1, value),
        SweptParameter::Eta => Ok(base.clone()),
    }
}

fn run_point(s: &SweepSpec, value: f64) -> Result<SweepPoint> {
    let g = apply_parameter(&s.base, s.parameter, value)?;
    let map = g.compile()?;
    let rho0 = g.initial_state();
    let target = g.n_nodes - 1;
    let mut point = SweepPoint {
        parameter: s.parameter,
        value,
        mu32: if g.n_nodes > 2 {
            g.dephasing_mu(2, 1)
        } else {
            None
        },
        n41: None,
        t41: None,
        t_c: None,
        tail_mass: None,
        distribution: None,
        trajectory: None,
    };
    if s.t41 {
        let n41 = mean_hitting_steps(&map, &rho0, target)?;
        point.n41 = Some(n41);
        point.t41 = Some(n41 * g.dt);
    }
    if s.f41 {
        let d = hitting_distribution_auto(&map, &rho0, target, s.tail_bound, s.max_steps)?;
        point.tail_mass = Some(d.tail_mass);
        point.distribution = Some(d);
    }
    let eta = if s.parameter == SweptParameter::Eta {
        Some(value)
    } else {
        s.eta
    };
    if let Some(eta) = eta {
        point.t_c = Some(crossing_time(&map, &rho0, target, eta, s.max_steps)?.t_c);
    }
    if let Some(steps) = s.trajectory_steps {
        point.trajectory = Some(evolve(&map, &rho0, steps, s.trajectory_stride)?);
    }
    Ok(point)
}

/// Run every grid point and collect the rows in grid order.
///
/// Points run in parallel but are mutually independent, so the result is
/// identical to running them one at a time. A failing point aborts the
/// sweep with the offending grid value attached.
pub fn run_sweep(s: &SweepSpec) -> Result<Vec<SweepPoint>> {
    s.validate()?;
    s.grid
        .par_iter()
        .map(|&value| {
            run_point(s, value).map_err(|e| Error::AtGridPoint {
                parameter: s.parameter.name(),
                value,
                source: Box::new(e),
            })
        })
        .collect()
}

/// One labelled sweep inside a scenario (scenarios that vary a second
/// parameter hold one sweep per value of it).
#[derive(Debug, Clone)]
pub struct NamedSweep {
    /// Distinguishes sibling sweeps in file names; empty when a scenario
    /// has only one sweep.
    pub label: String,
    /// The sweep itself.
    pub spec: SweepSpec,
}

/// A named preset experiment.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Stable name used on the command line.
    pub name: &'static str,
    /// One-line human description.
    pub description: &'static str,
    /// The sweeps the scenario runs.
    pub sweeps: Vec<NamedSweep>,
}

/// The default dephasing grid: exact zero plus 25 log-spaced points
/// spanning `[1e-9, 1]` — 26 points overall.
pub fn default_mu_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    for i in 0..25 {
        grid.push(1e-9 * 1e9f64.powf(i as f64 / 24.0));
    }
    grid
}

fn single(name: &'static str, description: &'static str, spec: SweepSpec) -> Scenario {
    Scenario {
        name,
        description,
        sweeps: vec![NamedSweep {
            label: String::new(),
            spec,
        }],
    }
}

/// The elevated on-site levels for the level-sweep scenarios: the base
/// value and three decades above it.
const OMEGA3_LADDER: [f64; 4] = [1.76e7, 1.76e8, 1.76e9, 1.76e10];

/// The named preset experiments.
///
/// All presets use the four-node model at its published magnitudes
/// (`dt = 1e-14 s`); pass a different `dt` to the base graph first when a
/// coarser, faster variant is wanted. Mean-hitting-time sweeps are cheap
/// at any step size (resolvent); distribution and trajectory presets are
/// step-bound and take minutes at the published step.
pub fn scenario_presets() -> Vec<Scenario> {
    let base = cryptochrome_preset();
    let mut scenarios = vec![
        single(
            "fig5a",
            "mean hitting time vs dephasing strength (two plateaus)",
            SweepSpec::mean_only(base.clone(), SweptParameter::Mu32, default_mu_grid()),
        ),
        single(
            "fig5b",
            "time for the product occupation to reach 0.2 vs dephasing strength",
            SweepSpec {
                eta: Some(0.2),
                t41: false,
                ..SweepSpec::mean_only(base.clone(), SweptParameter::Mu32, default_mu_grid())
            },
        ),
        single(
            "fig6",
            "hitting distribution in the quantum (mu=0) and classical (mu=1) limits",
            SweepSpec {
                f41: true,
                ..SweepSpec::mean_only(base.clone(), SweptParameter::Mu32, vec![0.0, 1.0])
            },
        ),
        single(
            "fig8",
            "pair-state trajectories across the oscillation die-off window",
            SweepSpec {
                t41: false,
                trajectory_steps: Some(100_000_000),
                trajectory_stride: 1000,
                ..SweepSpec::mean_only(base.clone(), SweptParameter::Mu32, vec![1e-7, 1e-6, 1e-5])
            },
        ),
    ];

    let ladder_scenario = |name: &'static str,
                           description: &'static str,
                           make_base: &dyn Fn() -> ReactionGraph|
     -> Scenario {
        Scenario {
            name,
            description,
            sweeps: OMEGA3_LADDER
                .iter()
                .map(|&omega3| NamedSweep {
                    label: format!("omega3_{omega3:.2e}"),
                    spec: SweepSpec::mean_only(
                        make_base()
                            .with_level(2, omega3)
                            .expect("preset has the coherent edge"),
                        SweptParameter::Mu32,
                        default_mu_grid(),
                    ),
                })
                .collect(),
        }
    };
    scenarios.push(ladder_scenario(
        "fig9a",
        "mean hitting time vs dephasing for elevated node-3 levels (dip regime)",
        &|| cryptochrome_preset(),
    ));
    scenarios.push(ladder_scenario(
        "fig9b",
        "same level ladder with 10x faster 4<-2 decay (inverted plateaus)",
        &|| {
            cryptochrome_preset()
                .with_damping_rate(3, 1, 3.3e7)
                .expect("preset has the 4<-2 edge")
        },
    ));

    scenarios.push(Scenario {
        name: "k21_sensitivity",
        description: "dephasing sweeps with the pump rate an order of magnitude down and up",
        sweeps: [1e7, 1e8, 1e9]
            .iter()
            .map(|&k21| NamedSweep {
                label: format!("k21_{k21:.0e}"),
                spec: SweepSpec::mean_only(
                    cryptochrome_preset()
                        .with_damping_rate(1, 0, k21)
                        .expect("preset has the 2<-1 edge"),
                    SweptParameter::Mu32,
                    default_mu_grid(),
                ),
            })
            .collect(),
    });
    scenarios
}

/// Look up a preset scenario by name.
pub fn find_scenario(name: &str) -> Option<Scenario> {
    scenario_presets().into_iter().find(|s| s.name == name)
}
