//! Acceptance gate: one test per release criterion, each printing a
//! `[PASS]`/`[FAIL]` line per sub-check before asserting that every
//! sub-check held. Run `cargo test --test acceptance -- --nocapture`
//! to see the checklist even when everything passes.
//!
//! Two criteria record genuine, reproducible failures of their stated
//! requirements; they are asserted as written rather than loosened:
//!
//! * criterion 6 demands a monotone nondecreasing t41(mu) curve, but the
//!   model develops a shallow dip (relative depth ~2e-4 near mu ~ 2e-7)
//!   that survives time-step refinement — a little dephasing genuinely
//!   speeds up arrival before the classical slowdown takes over;
//! * criterion 8 counts pair-oscillation maxima inside the first 3e6
//!   steps, i.e. 30 ns ~ 0.4 oscillation periods at the model's 75.6 ns
//!   period — too short to hold five maxima, and at strong dephasing the
//!   single kinetic rise-and-decay peak still counts as one maximum, not
//!   zero. The same phenomenology checked over a window covering several
//!   periods passes; see `fig8_oscillations_over_a_multi_period_window`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oqwalk::channels::{
    closed_form_unitary, hamiltonian, make_damping, make_dephasing, make_unitary,
    power_identity_check, transition_probability, CoherentParams, DampingParams, DephasingParams,
};
use oqwalk::config::SweptParameter;
use oqwalk::dynamics::{classical_evolve, evolve, mc_sample_hitting, prominent_local_maxima};
use oqwalk::hitting::{hitting_distribution_auto, mean_from_distribution, mean_hitting_steps};
use oqwalk::linalg::{mat_exp, max_abs_diff};
use oqwalk::reaction::{cryptochrome_preset, ChannelOrder, ReactionGraph};
use oqwalk::scenarios::{default_mu_grid, find_scenario, run_sweep, SweepSpec};

/// The absorbing product node of the four-node model, 0-based.
const PRODUCT: usize = 3;

/// Collects `[PASS]`/`[FAIL]` lines and fails the test at the end if any
/// sub-check missed, so a red criterion still shows its full checklist.
struct Checklist {
    name: &'static str,
    failures: usize,
}

impl Checklist {
    fn new(name: &'static str) -> Self {
        println!("== {name} ==");
        Checklist { name, failures: 0 }
    }

    fn check(&mut self, label: &str, ok: bool, detail: String) {
        if ok {
            println!("[PASS] {}: {label}: {detail}", self.name);
        } else {
            println!("[FAIL] {}: {label}: {detail}", self.name);
            self.failures += 1;
        }
    }

    fn finish(self) {
        assert_eq!(
            self.failures, 0,
            "{}: {} sub-check(s) failed (see [FAIL] lines above)",
            self.name, self.failures
        );
    }
}

/// The published four-node model with the pair-edge dephasing strength
/// set as a per-step probability `mu` (rate = mu / dt).
fn model_with_mu(dt: f64, mu: f64) -> ReactionGraph {
    cryptochrome_preset()
        .with_dt(dt)
        .with_dephasing_rate(2, 1, mu / dt)
        .expect("preset has the 3 ~ 2 dephasing edge")
}

fn exact_n41(g: &ReactionGraph) -> f64 {
    let map = g.compile().expect("compile");
    mean_hitting_steps(&map, &g.initial_state(), PRODUCT).expect("resolvent mean")
}

#[test]
fn criterion_01_cptp_and_trace_conservation() {
    let mut c = Checklist::new("criterion 01");
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0afe_c401);

    let mut worst = 0.0f64;
    for draw in 0..1000u32 {
        let dim = rng.random_range(2..=6usize);
        let a = rng.random_range(0..dim);
        let b = loop {
            let b = rng.random_range(0..dim);
            if b != a {
                break b;
            }
        };
        let dt = 10f64.powf(rng.random_range(-14.0..=-10.0));
        let defect = match draw % 3 {
            0 => {
                let rate = rng.random_range(0.0..=1.0) / dt;
                let p = DampingParams {
                    target: a,
                    source: b,
                    rate,
                };
                make_damping(&p, dim, dt).unwrap().cptp_defect()
            }
            1 => {
                let rate = rng.random_range(0.0..=1.0) / dt;
                let p = DephasingParams { j: a, k: b, rate };
                make_dephasing(&p, dim, dt).unwrap().cptp_defect()
            }
            _ => {
                let p = CoherentParams {
                    j: a,
                    k: b,
                    omega_j: rng.random_range(-1e9..=1e9),
                    omega_k: rng.random_range(-1e9..=1e9),
                    coupling: rng.random_range(-1e9..=1e9),
                };
                make_unitary(&p, dim, dt).unwrap().cptp_defect()
            }
        };
        worst = worst.max(defect);
    }
    c.check(
        "Kraus completeness over 1000 draws",
        worst < 1e-12,
        format!("max |sum K'K - 1| = {worst:.3e} (tol 1e-12)"),
    );

    let g = cryptochrome_preset();
    let map = g.compile().unwrap();
    let traj = evolve(&map, &g.initial_state(), 1_000_000, 10_000).unwrap();
    let mut drift = 0.0f64;
    for s in 0..traj.len() {
        let total: f64 = (0..g.n_nodes).map(|n| traj.populations[n][s]).sum();
        drift = drift.max((total - 1.0).abs());
    }
    c.check(
        "trace conservation over 1e6 steps",
        drift < 1e-9,
        format!("max |tr - 1| = {drift:.3e} (tol 1e-9)"),
    );

    let elapsed = started.elapsed().as_secs_f64();
    c.check(
        "runtime",
        elapsed < 10.0,
        format!("{elapsed:.2} s (budget 10 s)"),
    );
    c.finish();
}

#[test]
fn criterion_02_closed_form_propagator() {
    let mut c = Checklist::new("criterion 02");
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0afe_c402);

    let dim = 4;
    let (mut worst_u, mut worst_alpha) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let p = CoherentParams {
            j: 2,
            k: 1,
            omega_j: rng.random_range(-1e8..=1e8),
            omega_k: rng.random_range(-1e8..=1e8),
            coupling: rng.random_range(-1e8..=1e8),
        };
        let t = rng.random_range(1e-12..=1e-6);
        let u = closed_form_unitary(&p, dim, t);
        let u_ref = mat_exp(&hamiltonian(&p, dim), t).unwrap();
        worst_u = worst_u.max(max_abs_diff(&u, &u_ref));
        let alpha = transition_probability(&p, t);
        worst_alpha = worst_alpha.max((alpha - u[(p.j, p.k)].norm_sqr()).abs());
    }
    c.check(
        "closed form vs matrix exponential (1000 draws)",
        worst_u < 1e-10,
        format!("max entrywise diff = {worst_u:.3e} (tol 1e-10)"),
    );
    c.check(
        "transition probability vs |U_jk|^2",
        worst_alpha < 1e-12,
        format!("max diff = {worst_alpha:.3e} (tol 1e-12)"),
    );

    let elapsed = started.elapsed().as_secs_f64();
    c.check(
        "runtime",
        elapsed < 5.0,
        format!("{elapsed:.2} s (budget 5 s)"),
    );
    c.finish();
}

#[test]
fn criterion_03_power_identity() {
    let mut c = Checklist::new("criterion 03");
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0afe_c403);

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = CoherentParams {
            j: 2,
            k: 1,
            omega_j: rng.random_range(-1e8..=1e8),
            omega_k: rng.random_range(-1e8..=1e8),
            coupling: rng.random_range(-1e8..=1e8),
        };
        for n in 1..=20 {
            worst = worst.max(power_identity_check(&p, n));
        }
    }
    c.check(
        "scaled block power law, n = 1..20, 100 draws",
        worst < 1e-9,
        format!("max deviation = {worst:.3e} (tol 1e-9)"),
    );

    let elapsed = started.elapsed().as_secs_f64();
    c.check(
        "runtime",
        elapsed < 5.0,
        format!("{elapsed:.2} s (budget 5 s)"),
    );
    c.finish();
}

#[test]
fn criterion_04_resolvent_mean_vs_summed_distribution() {
    let mut c = Checklist::new("criterion 04");
    let started = Instant::now();

    for &mu in &[0.0, 1e-6, 1e-3, 1.0] {
        let fine = model_with_mu(1e-14, mu);
        let coarse = model_with_mu(1e-12, mu);
        let n_fine = exact_n41(&fine);
        let n_coarse = exact_n41(&coarse);
        let t_fine = n_fine * fine.dt;
        let t_coarse = n_coarse * coarse.dt;
        let coarse_rel = (t_coarse / t_fine - 1.0).abs();
        // The cheap coarse-step variant is allowed only while it stays
        // within 1% of the fine-step mean; otherwise the distribution is
        // iterated at the fine step.
        let coarse_ok = coarse_rel < 1e-2;
        println!(
            "  mu = {mu:.1e}: coarse-step t41 off by {coarse_rel:.3e} -> iterating at dt = {}",
            if coarse_ok {
                "1e-12 (coarse permitted)"
            } else {
                "1e-14 (coarse rejected)"
            }
        );
        let (g, n_ref) = if coarse_ok {
            (coarse, n_coarse)
        } else {
            (fine, n_fine)
        };

        let map = g.compile().unwrap();
        let d = hitting_distribution_auto(&map, &g.initial_state(), PRODUCT, 1e-6, 1 << 31)
            .expect("distribution to the tail bound");
        let (n_sum, _) = mean_from_distribution(&d, 1e-6).expect("tail bounded");
        let rel = (n_sum / n_ref - 1.0).abs();
        c.check(
            &format!("truncated sum vs resolvent at mu = {mu:.1e}"),
            rel < 1e-4,
            format!("rel diff = {rel:.3e} over {} terms (tol 1e-4)", d.n_max()),
        );
        c.check(
            &format!("tail mass at mu = {mu:.1e}"),
            d.tail_mass < 1e-6,
            format!("tail = {:.3e} (bound 1e-6)", d.tail_mass),
        );
    }

    println!(
        "  criterion 04 runtime: {:.1} s (budget: minutes)",
        started.elapsed().as_secs_f64()
    );
    c.finish();
}

#[test]
fn criterion_05_classical_limit() {
    let mut c = Checklist::new("criterion 05");
    let started = Instant::now();

    // Full dephasing at a coarse step: mu = 1 exactly.
    let g = model_with_mu(1e-12, 1.0);
    let map = g.compile().unwrap();
    let steps = 2_000_000;
    let quantum = evolve(&map, &g.initial_state(), steps, 100).unwrap();
    let classical = classical_evolve(&g, steps, 100).unwrap();
    let mut worst = 0.0f64;
    for s in 0..quantum.len() {
        for node in 0..g.n_nodes {
            worst =
                worst.max((quantum.populations[node][s] - classical.populations[node][s]).abs());
        }
    }
    c.check(
        "quantum at mu = 1 vs classical rate equations",
        worst < 1e-6,
        format!(
            "max population diff = {worst:.3e} over {} samples (tol 1e-6)",
            quantum.len()
        ),
    );

    let exact = exact_n41(&g);
    let samples = mc_sample_hitting(&g, PRODUCT, 100_000, 0x0afe_c405).unwrap();
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&s| s as f64).sum::<f64>() / n;
    let var = samples
        .iter()
        .map(|&s| (s as f64 - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let std_err = (var / n).sqrt();
    let sigmas = (mean - exact).abs() / std_err;
    c.check(
        "Monte Carlo mean (1e5 trials) vs resolvent",
        sigmas < 3.0,
        format!("{mean:.6e} vs {exact:.6e} = {sigmas:.2} standard errors (tol 3)"),
    );

    let elapsed = started.elapsed().as_secs_f64();
    c.check(
        "runtime",
        elapsed < 120.0,
        format!("{elapsed:.1} s (budget 120 s)"),
    );
    c.finish();
}

#[test]
fn criterion_06_dephasing_sweep_shape() {
    let mut c = Checklist::new("criterion 06");
    let started = Instant::now();

    let scenario = find_scenario("fig5a").expect("fig5a preset");
    let rows = run_sweep(&scenario.sweeps[0].spec).expect("fig5a sweep");
    let mu: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let t41: Vec<f64> = rows.iter().map(|r| r.t41.expect("t41 recorded")).collect();
    assert_eq!(t41.len(), 26, "the default grid has 26 points");

    let mut violations = Vec::new();
    for i in 0..t41.len() - 1 {
        if t41[i + 1] < t41[i] {
            violations.push(format!(
                "t41({:.3e}) = {:.8e} > t41({:.3e}) = {:.8e}",
                mu[i],
                t41[i],
                mu[i + 1],
                t41[i + 1]
            ));
        }
    }
    // Known honest failure: a shallow dephasing-assisted dip (~2e-4 deep
    // near mu ~ 2e-7) persists across dt refinement, so the literal
    // monotonicity demand is not satisfiable by a faithful simulator.
    c.check(
        "monotone nondecreasing over the 26-point grid",
        violations.is_empty(),
        if violations.is_empty() {
            "no decreasing pair".to_string()
        } else {
            format!(
                "{} decreasing pair(s): {}",
                violations.len(),
                violations.join("; ")
            )
        },
    );

    let flatness = |pred: &dyn Fn(f64) -> bool| -> (f64, usize) {
        let sel: Vec<f64> = mu
            .iter()
            .zip(&t41)
            .filter(|(m, _)| pred(**m))
            .map(|(_, t)| *t)
            .collect();
        let lo = sel.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sel.iter().cloned().fold(0.0f64, f64::max);
        (hi / lo - 1.0, sel.len())
    };
    let (quantum_flat, nq) = flatness(&|m| m <= 1e-8);
    c.check(
        "quantum plateau flat (mu <= 1e-8)",
        quantum_flat < 1e-3,
        format!("max/min - 1 = {quantum_flat:.3e} over {nq} points (tol 1e-3)"),
    );
    let (classical_flat, nc) = flatness(&|m| m >= 1e-2);
    c.check(
        "classical plateau flat (mu >= 1e-2)",
        classical_flat < 1e-3,
        format!("max/min - 1 = {classical_flat:.3e} over {nc} points (tol 1e-3)"),
    );

    let gap = (t41[t41.len() - 1] - t41[0]) / t41[t41.len() - 1];
    c.check(
        "plateau gap in 2..6%",
        (0.02..=0.06).contains(&gap),
        format!("(t41(1) - t41(0)) / t41(1) = {gap:.4}"),
    );

    let floor = 0.303e-6;
    let min_t41 = t41.iter().cloned().fold(f64::INFINITY, f64::min);
    c.check(
        "every t41 above 0.303 us",
        min_t41 > floor,
        format!("min t41 = {min_t41:.6e} s"),
    );

    let elapsed = started.elapsed().as_secs_f64();
    c.check(
        "runtime",
        elapsed < 60.0,
        format!("{elapsed:.1} s (budget 60 s)"),
    );
    c.finish();
}

#[test]
fn criterion_07_time_step_convergence() {
    let mut c = Checklist::new("criterion 07");

    for &(label, q32) in &[("no dephasing", 0.0), ("strong dephasing (1e10/s)", 1e10)] {
        let t41: Vec<f64> = [1e-13, 5e-14, 1e-14]
            .iter()
            .map(|&dt| {
                let g = cryptochrome_preset()
                    .with_dt(dt)
                    .with_dephasing_rate(2, 1, q32)
                    .unwrap();
                exact_n41(&g) * dt
            })
            .collect();
        let lo = t41.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = t41.iter().cloned().fold(0.0f64, f64::max);
        let spread = hi / lo - 1.0;
        c.check(
            &format!("t41 spread across dt set, {label}"),
            spread < 1e-2,
            format!("max/min - 1 = {spread:.3e} (tol 1e-2)"),
        );
    }
    c.finish();
}

/// Pair-state occupation and coherence series for the first `steps` steps
/// of the published model at per-step dephasing `mu`.
fn pair_series(mu: f64, steps: u64) -> (Vec<f64>, Vec<f64>) {
    let g = model_with_mu(1e-14, mu);
    let map = g.compile().unwrap();
    let traj = evolve(&map, &g.initial_state(), steps, 100).unwrap();
    let rho22 = traj.populations[1].clone();
    let coh = traj.coherences.first().expect("one coherent pair");
    let abs32: Vec<f64> = coh.values.iter().map(|v| v.norm()).collect();
    (rho22, abs32)
}

/// Peaks are counted with a small prominence floor (1e-4, two orders
/// below the oscillation amplitude) so float-level ripples on plateaus
/// cannot register as maxima.
const PEAK_PROMINENCE: f64 = 1e-4;

#[test]
fn criterion_08_oscillation_phenomenology() {
    let mut c = Checklist::new("criterion 08");
    let window = 3_000_000;

    // Known honest failure: the window is 30 ns ~ 0.4 oscillation
    // periods, so five maxima cannot fit into it.
    let (rho22, _) = pair_series(1e-7, window);
    let peaks_weak = prominent_local_maxima(&rho22, PEAK_PROMINENCE);
    c.check(
        "rho22 maxima at mu = 1e-7 >= 5",
        peaks_weak >= 5,
        format!("{peaks_weak} maxima in the first {window} steps"),
    );

    // Known honest failure: strong dephasing kills the oscillation but
    // the kinetic pump-up/decay still produces exactly one maximum.
    let (rho22, abs32) = pair_series(1e-5, window);
    let peaks_strong = prominent_local_maxima(&rho22, PEAK_PROMINENCE);
    c.check(
        "rho22 maxima at mu = 1e-5 == 0",
        peaks_strong == 0,
        format!("{peaks_strong} maxima in the first {window} steps"),
    );

    let max_coh = abs32.iter().cloned().fold(0.0f64, f64::max);
    c.check(
        "|rho32| transiently nonzero at mu = 1e-5",
        max_coh > 1e-6,
        format!("max |rho32| = {max_coh:.4e}"),
    );
    c.finish();
}

/// The same oscillation phenomenology over a window that actually spans
/// several oscillation periods (3.5e7 steps = 350 ns ~ 4.6 periods).
/// This is the physically meaningful version of criterion 8, and it
/// passes: many maxima survive weak dephasing, at most the single
/// kinetic peak survives strong dephasing.
#[test]
fn fig8_oscillations_over_a_multi_period_window() {
    let window = 35_000_000;
    let (rho22_weak, _) = pair_series(1e-7, window);
    let weak = prominent_local_maxima(&rho22_weak, PEAK_PROMINENCE);
    assert!(weak >= 5, "expected >= 5 maxima at mu = 1e-7, found {weak}");

    let (rho22_strong, abs32) = pair_series(1e-5, window);
    let strong = prominent_local_maxima(&rho22_strong, PEAK_PROMINENCE);
    assert!(
        strong <= 1,
        "expected <= 1 maximum at mu = 1e-5, found {strong}"
    );

    let max_coh = abs32.iter().cloned().fold(0.0f64, f64::max);
    assert!(max_coh > 1e-6, "pair coherence never rose at mu = 1e-5");

    let (rho22_mid, _) = pair_series(1e-6, window);
    let mid = prominent_local_maxima(&rho22_mid, PEAK_PROMINENCE);
    assert!(
        (1..weak).contains(&mid),
        "intermediate dephasing should damp the oscillation: {mid} vs {weak}"
    );
}

#[test]
fn criterion_09_level_detuning_scenarios() {
    let mut c = Checklist::new("criterion 09");

    let run_rows = |name: &str| -> Vec<(String, Vec<f64>)> {
        let scenario = find_scenario(name).expect("scenario preset");
        scenario
            .sweeps
            .iter()
            .map(|ns| {
                let rows = run_sweep(&ns.spec).expect("sweep");
                (
                    ns.label.clone(),
                    rows.iter().map(|r| r.t41.unwrap()).collect(),
                )
            })
            .collect()
    };
    fn interior(t: &[f64]) -> &[f64] {
        &t[1..t.len() - 1]
    }

    // fig9a: for at least one elevated level the curve dips below both
    // plateaus at an interior dephasing value.
    let fig9a = run_rows("fig9a");
    let baseline_label = &fig9a[0].0;
    let mut dips = Vec::new();
    for (label, t) in &fig9a[1..] {
        let edge_min = t[0].min(*t.last().unwrap());
        let int_min = interior(t).iter().cloned().fold(f64::INFINITY, f64::min);
        if int_min < edge_min * (1.0 - 1e-3) {
            dips.push(format!(
                "{label} (depth {:.2}%)",
                (1.0 - int_min / edge_min) * 100.0
            ));
        }
    }
    c.check(
        "fig9a: interior minimum for an elevated level",
        !dips.is_empty(),
        format!(
            "rows above {baseline_label} with a dip: [{}]",
            dips.join(", ")
        ),
    );

    // fig9b (fast product decay from the pair state): the plateau order
    // inverts for the small-level row, and an intermediate level turns
    // the dip into an interior maximum.
    let fig9b = run_rows("fig9b");
    let (small_label, small) = &fig9b[0];
    let (q, cl) = (small[0], *small.last().unwrap());
    c.check(
        "fig9b: quantum plateau above classical for the small-level row",
        q > cl * (1.0 + 1e-3),
        format!("{small_label}: t41(mu=0) = {q:.4e} vs t41(mu=1) = {cl:.4e}"),
    );

    let mut bumps = Vec::new();
    for (label, t) in &fig9b[1..fig9b.len() - 1] {
        let edge_max = t[0].max(*t.last().unwrap());
        let int_max = interior(t).iter().cloned().fold(0.0f64, f64::max);
        if int_max > edge_max * (1.0 + 1e-3) {
            bumps.push(format!(
                "{label} (height {:.2}%)",
                (int_max / edge_max - 1.0) * 100.0
            ));
        }
    }
    c.check(
        "fig9b: interior maximum for an intermediate level",
        !bumps.is_empty(),
        format!("rows with an interior maximum: [{}]", bumps.join(", ")),
    );

    // Far-detuned limit: at omega3 = 1e3 * coupling both variants
    // flatten out — the pair edge effectively drops out of the walk.
    for (name, base) in [
        ("fig9a", cryptochrome_preset()),
        (
            "fig9b",
            find_scenario("fig9b").unwrap().sweeps[0].spec.base.clone(),
        ),
    ] {
        let far = base.with_level(2, 4.06e10).unwrap();
        let spec = SweepSpec::mean_only(far, SweptParameter::Mu32, default_mu_grid());
        let rows = run_sweep(&spec).unwrap();
        let t: Vec<f64> = rows.iter().map(|r| r.t41.unwrap()).collect();
        let lo = t.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = t.iter().cloned().fold(0.0f64, f64::max);
        let ratio = hi / lo;
        c.check(
            &format!("{name} base flattens at omega3 = 1e3 * coupling"),
            ratio < 1.01,
            format!("max/min over the mu grid = {ratio:.5} (tol 1.01)"),
        );
    }
    c.finish();
}

#[test]
fn criterion_10_composition_order_insensitivity() {
    let mut c = Checklist::new("criterion 10");

    let g = cryptochrome_preset();
    let rho0 = g.initial_state();
    let canonical = g.compile_with_order(ChannelOrder::Canonical).unwrap();
    let reversed = g.compile_with_order(ChannelOrder::Reversed).unwrap();
    let n_can = mean_hitting_steps(&canonical, &rho0, PRODUCT).unwrap();
    let n_rev = mean_hitting_steps(&reversed, &rho0, PRODUCT).unwrap();
    let rel = (n_rev / n_can - 1.0).abs();
    c.check(
        "reversed vs canonical channel order",
        rel < 1e-3,
        format!("t41 rel diff = {rel:.3e} at dt = 1e-14 (tol 1e-3)"),
    );
    c.finish();
}
