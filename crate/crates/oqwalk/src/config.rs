//! Text format for describing reaction graphs and parameter sweeps.
//!
//! # Grammar
//!
//! A config file is a sequence of sections. `#` starts a comment that runs
//! to the end of the line; blank lines are ignored. Whitespace around the
//! `<-`, `~`, `=` and `,` separators is optional. A section's content may
//! start on the header line itself (`[graph] nodes=4 dt=1e-14 initial=1`)
//! or on the following lines. Node labels are 1-based integers.
//!
//! ```text
//! [graph]                 # required, must come first
//! nodes   = 4             # node count, 1..=16
//! dt      = 1e-14         # time step in seconds, > 0
//! initial = 1             # starting node
//!
//! [damping]               # any number of lines: TARGET <- SOURCE rate = R
//! 2 <- 1 rate = 1e8       # population flows 1 -> 2 at 1e8 /s
//!
//! [dephasing]             # lines: J ~ K rate = R  (coherences on K decay)
//! 3 ~ 2 rate = 0
//!
//! [coherent]              # lines: J = K  plus the three edge parameters
//! 3 = 2 omega_j = 1.76e7 omega_k = 0 coupling = 4.06e7
//!
//! [sweep]                 # only consumed by sweep runs; see below
//! parameter = mu32
//! logspace  = 1e-9, 1, 25
//! prepend   = 0
//! ```
//!
//! Damping and dephasing rates must be finite and non-negative;
//! `omega_j`, `omega_k` and `coupling` may carry either sign. Unknown
//! sections, unknown keys, duplicate keys and duplicate edges are errors —
//! the parser is strict so that a typo cannot silently change a model.
//!
//! # The `[sweep]` section
//!
//! | key                 | meaning                                                      |
//! |---------------------|--------------------------------------------------------------|
//! | `parameter`         | `q32`, `mu32`, `omega3`, `k21`, `k42` or `eta` (required)    |
//! | `values`            | explicit comma-separated grid                                |
//! | `logspace`          | `start, stop, count`: logarithmically spaced grid            |
//! | `linspace`          | `start, stop, count`: linearly spaced grid                   |
//! | `prepend`           | extra values placed before the grid (e.g. an exact `0`)      |
//! | `eta`               | also compute the threshold-crossing time at this occupation  |
//! | `t41`               | `true`/`false`: compute the mean hitting time (default true) |
//! | `f41`               | `true`/`false`: emit per-point hitting distributions         |
//! | `trajectory_steps`  | emit per-point trajectories of this many steps               |
//! | `trajectory_stride` | recording stride for those trajectories (default 1000)       |
//! | `tail_bound`        | tail mass at which distributions stop (default 1e-6)         |
//! | `max_steps`         | step cap for distributions and crossings (default 2^31)      |
//!
//! Exactly one of `values`, `logspace`, `linspace` must be present. Grids
//! are capped at 10000 points. The swept parameter names refer to the
//! four-node preset layout: `q32`/`mu32` drive the dephasing edge between
//! nodes 3 and 2 (as a rate in 1/s, or directly as the per-step strength
//! `mu = rate * dt`), `omega3` the on-site level of node 3, `k21`/`k42`
//! the corresponding damping rates, and `eta` sweeps the crossing
//! threshold itself.

use thiserror::Error;

use crate::channels::{CoherentParams, DampingParams, DephasingParams};
use crate::reaction::{ReactionGraph, MAX_NODES};

/// Config parse/validation failure, tagged with its 1-based line number.
#[derive(Debug, Clone, Error)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            message: message.into(),
        }
    }
}

/// Which model knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptParameter {
    /// Dephasing rate of the `3 ~ 2` edge, in 1/s.
    Q32,
    /// Per-step dephasing strength `mu = q32 * dt` of the `3 ~ 2` edge.
    Mu32,
    /// On-site level of node 3 on the coherent edge, in 1/s.
    Omega3,
    /// Rate of the `2 <- 1` damping edge, in 1/s.
    K21,
    /// Rate of the `4 <- 2` damping edge, in 1/s.
    K42,
    /// Threshold occupation for crossing-time sweeps.
    Eta,
}

impl SweptParameter {
    /// The name used in config files and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            SweptParameter::Q32 => "q32",
            SweptParameter::Mu32 => "mu32",
            SweptParameter::Omega3 => "omega3",
            SweptParameter::K21 => "k21",
            SweptParameter::K42 => "k42",
            SweptParameter::Eta => "eta",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "q32" => Some(SweptParameter::Q32),
            "mu32" => Some(SweptParameter::Mu32),
            "omega3" => Some(SweptParameter::Omega3),
            "k21" => Some(SweptParameter::K21),
            "k42" => Some(SweptParameter::K42),
            "eta" => Some(SweptParameter::Eta),
            _ => None,
        }
    }
}

/// Parsed `[sweep]` section, grid fully realised.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub parameter: SweptParameter,
    pub grid: Vec<f64>,
    pub eta: Option<f64>,
    pub t41: bool,
    pub f41: bool,
    pub trajectory_steps: Option<u64>,
    pub trajectory_stride: u64,
    pub tail_bound: f64,
    pub max_steps: u64,
}

/// Default step cap for distributions and crossing searches.
pub const DEFAULT_MAX_STEPS: u64 = 1 << 31;
/// Default tail mass at which a hitting distribution may stop.
pub const DEFAULT_TAIL_BOUND: f64 = 1e-6;
/// Largest accepted sweep grid.
pub const MAX_GRID_POINTS: usize = 10_000;

/// Parse a config file into a reaction graph.
///
/// A well-formed `[sweep]` section is accepted and ignored, so the same
/// file can drive both single runs and sweeps.
pub fn parse_reaction_config(text: &str) -> Result<ReactionGraph, ConfigError> {
    let doc = parse_document(text)?;
    Ok(doc.graph)
}

/// Parse a config file that must also carry a `[sweep]` section.
pub fn parse_sweep_config(text: &str) -> Result<(ReactionGraph, SweepSection), ConfigError> {
    let doc = parse_document(text)?;
    match doc.sweep {
        Some(sweep) => Ok((doc.graph, sweep)),
        None => Err(ConfigError::new(
            doc.last_line,
            "missing [sweep] section".to_string(),
        )),
    }
}

struct Document {
    graph: ReactionGraph,
    sweep: Option<SweepSection>,
    last_line: usize,
}

#[derive(PartialEq, Clone, Copy, Debug)]
enum Section {
    Graph,
    Damping,
    Dephasing,
    Coherent,
    Sweep,
}

/// Split a logical line into tokens, treating `<-`, `~`, `=`, `,` as
/// standalone separators regardless of surrounding whitespace.
fn tokenize(line: &str) -> Vec<String> {
    line.replace("<-", " <- ")
        .replace('~', " ~ ")
        .replace('=', " = ")
        .replace(',', " , ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn parse_finite(tok: &str, line: usize, what: &str) -> Result<f64, ConfigError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| ConfigError::new(line, format!("{what}: `{tok}` is not a number")))?;
    if !v.is_finite() {
        return Err(ConfigError::new(
            line,
            format!("{what}: `{tok}` is not finite"),
        ));
    }
    Ok(v)
}

fn parse_node_label(tok: &str, nodes: usize, line: usize) -> Result<usize, ConfigError> {
    let label: usize = tok
        .parse()
        .map_err(|_| ConfigError::new(line, format!("`{tok}` is not a node label")))?;
    if label == 0 || label > nodes {
        return Err(ConfigError::new(
            line,
            format!("node label {label} out of range 1..={nodes}"),
        ));
    }
    Ok(label - 1)
}

fn parse_bool(tok: &str, line: usize, key: &str) -> Result<bool, ConfigError> {
    match tok {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError::new(
            line,
            format!("{key}: expected true or false, got `{tok}`"),
        )),
    }
}

/// Raw key/value state for the `[graph]` section while it accumulates.
#[derive(Default)]
struct GraphKeys {
    nodes: Option<usize>,
    dt: Option<f64>,
    initial: Option<usize>, // still 1-based here
    header_line: usize,
}

/// Raw state for the `[sweep]` section.
#[derive(Default)]
struct SweepKeys {
    parameter: Option<SweptParameter>,
    values: Option<Vec<f64>>,
    logspace: Option<Vec<f64>>,
    linspace: Option<Vec<f64>>,
    prepend: Option<Vec<f64>>,
    eta: Option<f64>,
    t41: Option<bool>,
    f41: Option<bool>,
    trajectory_steps: Option<u64>,
    trajectory_stride: Option<u64>,
    tail_bound: Option<f64>,
    max_steps: Option<u64>,
    header_line: usize,
}

fn parse_document(text: &str) -> Result<Document, ConfigError> {
    let mut section: Option<Section> = None;
    let mut graph_keys = GraphKeys::default();
    let mut graph_done = false;
    let mut sweep_keys: Option<SweepKeys> = None;
    let mut damping: Vec<DampingParams> = Vec::new();
    let mut dephasing: Vec<DephasingParams> = Vec::new();
    let mut coherent: Vec<CoherentParams> = Vec::new();
    let mut nodes_for_edges: usize = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }

        let content = if let Some(rest) = line.strip_prefix('[') {
            let end = rest.find(']').ok_or_else(|| {
                ConfigError::new(lineno, "unterminated section header".to_string())
            })?;
            let name = rest[..end].trim();
            let new_section = match name {
                "graph" => Section::Graph,
                "damping" => Section::Damping,
                "dephasing" => Section::Dephasing,
                "coherent" => Section::Coherent,
                "sweep" => Section::Sweep,
                other => {
                    return Err(ConfigError::new(
                        lineno,
                        format!("unknown section [{other}]"),
                    ))
                }
            };
            // Leaving [graph] freezes it: edge sections need the node count.
            if section == Some(Section::Graph) && new_section != Section::Graph {
                nodes_for_edges = finalize_graph_keys(&graph_keys)?.0;
                graph_done = true;
            }
            match new_section {
                Section::Graph => {
                    if graph_done || graph_keys.header_line != 0 {
                        return Err(ConfigError::new(
                            lineno,
                            "duplicate [graph] section".to_string(),
                        ));
                    }
                    graph_keys.header_line = lineno;
                }
                Section::Sweep => {
                    if sweep_keys.is_some() {
                        return Err(ConfigError::new(
                            lineno,
                            "duplicate [sweep] section".to_string(),
                        ));
                    }
                    sweep_keys = Some(SweepKeys {
                        header_line: lineno,
                        ..SweepKeys::default()
                    });
                }
                _ => {
                    if !graph_done {
                        return Err(ConfigError::new(
                            lineno,
                            "[graph] must appear (and be complete) before edge sections"
                                .to_string(),
                        ));
                    }
                }
            }
            section = Some(new_section);
            rest[end + 1..].trim()
        } else {
            line
        };
        if content.is_empty() {
            continue;
        }

        let tokens = tokenize(content);
        match section {
            None => {
                return Err(ConfigError::new(
                    lineno,
                    "content before any section header".to_string(),
                ))
            }
            Some(Section::Graph) => parse_graph_line(&tokens, lineno, &mut graph_keys)?,
            Some(Section::Damping) => {
                damping.push(parse_damping_line(&tokens, lineno, nodes_for_edges)?)
            }
            Some(Section::Dephasing) => {
                dephasing.push(parse_dephasing_line(&tokens, lineno, nodes_for_edges)?)
            }
            Some(Section::Coherent) => {
                coherent.push(parse_coherent_line(&tokens, lineno, nodes_for_edges)?)
            }
            Some(Section::Sweep) => {
                let keys = sweep_keys.as_mut().expect("sweep section started");
                parse_sweep_line(&tokens, lineno, keys)?;
            }
        }
    }

    if graph_keys.header_line == 0 {
        return Err(ConfigError::new(
            last_line.max(1),
            "missing [graph] section".to_string(),
        ));
    }
    let (nodes, dt, initial) = finalize_graph_keys(&graph_keys)?;

    let graph = ReactionGraph {
        n_nodes: nodes,
        dt,
        initial_node: initial,
        damping,
        dephasing,
        coherent,
    };
    graph
        .validate()
        .map_err(|e| ConfigError::new(graph_keys.header_line, e.to_string()))?;

    let sweep = match sweep_keys {
        Some(keys) => Some(finalize_sweep_keys(keys)?),
        None => None,
    };

    Ok(Document {
        graph,
        sweep,
        last_line,
    })
}

fn finalize_graph_keys(keys: &GraphKeys) -> Result<(usize, f64, usize), ConfigError> {
    let line = keys.header_line;
    let nodes = keys
        .nodes
        .ok_or_else(|| ConfigError::new(line, "[graph] is missing `nodes`".to_string()))?;
    let dt = keys
        .dt
        .ok_or_else(|| ConfigError::new(line, "[graph] is missing `dt`".to_string()))?;
    let initial = keys
        .initial
        .ok_or_else(|| ConfigError::new(line, "[graph] is missing `initial`".to_string()))?;
    if initial == 0 || initial > nodes {
        return Err(ConfigError::new(
            line,
            format!("initial node {initial} out of range 1..={nodes}"),
        ));
    }
    Ok((nodes, dt, initial - 1))
}

fn parse_graph_line(
    tokens: &[String],
    line: usize,
    keys: &mut GraphKeys,
) -> Result<(), ConfigError> {
    // One or more `key = value` pairs.
    let mut i = 0;
    while i < tokens.len() {
        if tokens.len() - i < 3 || tokens[i + 1] != "=" {
            return Err(ConfigError::new(
                line,
                format!("expected `key = value`, got `{}`", tokens[i..].join(" ")),
            ));
        }
        let key = tokens[i].as_str();
        let value = tokens[i + 2].as_str();
        match key {
            "nodes" => {
                if keys.nodes.is_some() {
                    return Err(ConfigError::new(line, "duplicate key `nodes`".to_string()));
                }
                let n: usize = value.parse().map_err(|_| {
                    ConfigError::new(line, format!("nodes: `{value}` is not a count"))
                })?;
                if n == 0 || n > MAX_NODES {
                    return Err(ConfigError::new(
                        line,
                        format!("nodes: {n} outside 1..={MAX_NODES}"),
                    ));
                }
                keys.nodes = Some(n);
            }
            "dt" => {
                if keys.dt.is_some() {
                    return Err(ConfigError::new(line, "duplicate key `dt`".to_string()));
                }
                let dt = parse_finite(value, line, "dt")?;
                if dt <= 0.0 {
                    return Err(ConfigError::new(line, format!("dt: {dt} must be > 0")));
                }
                keys.dt = Some(dt);
            }
            "initial" => {
                if keys.initial.is_some() {
                    return Err(ConfigError::new(
                        line,
                        "duplicate key `initial`".to_string(),
                    ));
                }
                let label: usize = value.parse().map_err(|_| {
                    ConfigError::new(line, format!("initial: `{value}` is not a node label"))
                })?;
                keys.initial = Some(label);
            }
            other => {
                return Err(ConfigError::new(
                    line,
                    format!("unknown [graph] key `{other}`"),
                ))
            }
        }
        i += 3;
    }
    Ok(())
}

fn parse_damping_line(
    tokens: &[String],
    line: usize,
    nodes: usize,
) -> Result<DampingParams, ConfigError> {
    // TARGET <- SOURCE rate = R
    if tokens.len() != 6 || tokens[1] != "<-" || tokens[3] != "rate" || tokens[4] != "=" {
        return Err(ConfigError::new(
            line,
            "expected `TARGET <- SOURCE rate = R`".to_string(),
        ));
    }
    let target = parse_node_label(&tokens[0], nodes, line)?;
    let source = parse_node_label(&tokens[2], nodes, line)?;
    let rate = parse_finite(&tokens[5], line, "rate")?;
    if rate < 0.0 {
        return Err(ConfigError::new(
            line,
            format!("rate: {rate} must be non-negative"),
        ));
    }
    Ok(DampingParams {
        target,
        source,
        rate,
    })
}

fn parse_dephasing_line(
    tokens: &[String],
    line: usize,
    nodes: usize,
) -> Result<DephasingParams, ConfigError> {
    // J ~ K rate = R
    if tokens.len() != 6 || tokens[1] != "~" || tokens[3] != "rate" || tokens[4] != "=" {
        return Err(ConfigError::new(
            line,
            "expected `J ~ K rate = R`".to_string(),
        ));
    }
    let j = parse_node_label(&tokens[0], nodes, line)?;
    let k = parse_node_label(&tokens[2], nodes, line)?;
    let rate = parse_finite(&tokens[5], line, "rate")?;
    if rate < 0.0 {
        return Err(ConfigError::new(
            line,
            format!("rate: {rate} must be non-negative"),
        ));
    }
    Ok(DephasingParams { j, k, rate })
}

fn parse_coherent_line(
    tokens: &[String],
    line: usize,
    nodes: usize,
) -> Result<CoherentParams, ConfigError> {
    // J = K omega_j = A omega_k = B coupling = C   (the three pairs in any order)
    if tokens.len() != 12 || tokens[1] != "=" {
        return Err(ConfigError::new(
            line,
            "expected `J = K omega_j = A omega_k = B coupling = C`".to_string(),
        ));
    }
    let j = parse_node_label(&tokens[0], nodes, line)?;
    let k = parse_node_label(&tokens[2], nodes, line)?;
    let mut omega_j: Option<f64> = None;
    let mut omega_k: Option<f64> = None;
    let mut coupling: Option<f64> = None;
    let mut i = 3;
    while i < tokens.len() {
        if tokens[i + 1] != "=" {
            return Err(ConfigError::new(
                line,
                format!("expected `key = value`, got `{}`", tokens[i..].join(" ")),
            ));
        }
        let value = parse_finite(&tokens[i + 2], line, &tokens[i])?;
        let slot = match tokens[i].as_str() {
            "omega_j" => &mut omega_j,
            "omega_k" => &mut omega_k,
            "coupling" => &mut coupling,
            other => {
                return Err(ConfigError::new(
                    line,
                    format!("unknown coherent-edge key `{other}`"),
                ))
            }
        };
        if slot.is_some() {
            return Err(ConfigError::new(
                line,
                format!("duplicate key `{}`", tokens[i]),
            ));
        }
        *slot = Some(value);
        i += 3;
    }
    match (omega_j, omega_k, coupling) {
        (Some(omega_j), Some(omega_k), Some(coupling)) => Ok(CoherentParams {
            j,
            k,
            omega_j,
            omega_k,
            coupling,
        }),
        _ => Err(ConfigError::new(
            line,
            "coherent edge needs omega_j, omega_k and coupling".to_string(),
        )),
    }
}

/// Split a token payload `a , b , c` into floats.
fn parse_float_list(tokens: &[String], line: usize, key: &str) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    let mut expect_value = true;
    for tok in tokens {
        if expect_value {
            if tok == "," {
                return Err(ConfigError::new(line, format!("{key}: empty list entry")));
            }
            out.push(parse_finite(tok, line, key)?);
            expect_value = false;
        } else {
            if tok != "," {
                return Err(ConfigError::new(
                    line,
                    format!("{key}: expected `,` between values, got `{tok}`"),
                ));
            }
            expect_value = true;
        }
    }
    if expect_value {
        return Err(ConfigError::new(
            line,
            format!("{key}: empty or trailing-comma list"),
        ));
    }
    if out.len() > MAX_GRID_POINTS {
        return Err(ConfigError::new(
            line,
            format!("{key}: more than {MAX_GRID_POINTS} values"),
        ));
    }
    Ok(out)
}

fn parse_sweep_line(
    tokens: &[String],
    line: usize,
    keys: &mut SweepKeys,
) -> Result<(), ConfigError> {
    if tokens.len() < 3 || tokens[1] != "=" {
        return Err(ConfigError::new(line, "expected `key = value`".to_string()));
    }
    let key = tokens[0].as_str();
    let payload = &tokens[2..];
    let scalar = |payload: &[String]| -> Result<String, ConfigError> {
        if payload.len() != 1 {
            return Err(ConfigError::new(
                line,
                format!("{key}: expected a single value"),
            ));
        }
        Ok(payload[0].clone())
    };
    macro_rules! set_once {
        ($slot:expr, $value:expr) => {{
            if $slot.is_some() {
                return Err(ConfigError::new(line, format!("duplicate key `{key}`")));
            }
            $slot = Some($value);
        }};
    }
    match key {
        "parameter" => {
            let v = scalar(payload)?;
            let p = SweptParameter::parse(&v).ok_or_else(|| {
                ConfigError::new(
                    line,
                    format!("unknown parameter `{v}` (q32, mu32, omega3, k21, k42, eta)"),
                )
            })?;
            set_once!(keys.parameter, p);
        }
        "values" => set_once!(keys.values, parse_float_list(payload, line, key)?),
        "logspace" => set_once!(keys.logspace, parse_float_list(payload, line, key)?),
        "linspace" => set_once!(keys.linspace, parse_float_list(payload, line, key)?),
        "prepend" => set_once!(keys.prepend, parse_float_list(payload, line, key)?),
        "eta" => {
            let v = parse_finite(&scalar(payload)?, line, key)?;
            if !(0.0 < v && v < 1.0) {
                return Err(ConfigError::new(
                    line,
                    format!("eta: {v} outside the open interval (0, 1)"),
                ));
            }
            set_once!(keys.eta, v);
        }
        "t41" => set_once!(keys.t41, parse_bool(&scalar(payload)?, line, key)?),
        "f41" => set_once!(keys.f41, parse_bool(&scalar(payload)?, line, key)?),
        "trajectory_steps" => {
            let v: u64 = scalar(payload)?
                .parse()
                .map_err(|_| ConfigError::new(line, format!("{key}: not a step count")))?;
            set_once!(keys.trajectory_steps, v);
        }
        "trajectory_stride" => {
            let v: u64 = scalar(payload)?
                .parse()
                .map_err(|_| ConfigError::new(line, format!("{key}: not a stride")))?;
            if v == 0 {
                return Err(ConfigError::new(
                    line,
                    "trajectory_stride: must be >= 1".to_string(),
                ));
            }
            set_once!(keys.trajectory_stride, v);
        }
        "tail_bound" => {
            let v = parse_finite(&scalar(payload)?, line, key)?;
            if !(0.0 < v && v < 1.0) {
                return Err(ConfigError::new(
                    line,
                    format!("tail_bound: {v} outside (0, 1)"),
                ));
            }
            set_once!(keys.tail_bound, v);
        }
        "max_steps" => {
            let v: u64 = scalar(payload)?
                .parse()
                .map_err(|_| ConfigError::new(line, format!("{key}: not a step count")))?;
            if v == 0 || v > DEFAULT_MAX_STEPS {
                return Err(ConfigError::new(
                    line,
                    format!("max_steps: {v} outside 1..={DEFAULT_MAX_STEPS}"),
                ));
            }
            set_once!(keys.max_steps, v);
        }
        other => {
            return Err(ConfigError::new(
                line,
                format!("unknown [sweep] key `{other}`"),
            ))
        }
    }
    Ok(())
}

fn realize_spaced_grid(
    spec: &[f64],
    line: usize,
    key: &str,
    log: bool,
) -> Result<Vec<f64>, ConfigError> {
    if spec.len() != 3 {
        return Err(ConfigError::new(
            line,
            format!("{key}: expected `start, stop, count`"),
        ));
    }
    let (start, stop) = (spec[0], spec[1]);
    let count = spec[2];
    if count.fract() != 0.0 || count < 1.0 || count > MAX_GRID_POINTS as f64 {
        return Err(ConfigError::new(
            line,
            format!("{key}: count {count} outside 1..={MAX_GRID_POINTS}"),
        ));
    }
    let count = count as usize;
    if log && (start <= 0.0 || stop <= 0.0) {
        return Err(ConfigError::new(
            line,
            format!("{key}: endpoints must be positive"),
        ));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let points = (0..count)
        .map(|i| {
            let s = i as f64 / (count - 1) as f64;
            if log {
                start * (stop / start).powf(s)
            } else {
                start + (stop - start) * s
            }
        })
        .collect();
    Ok(points)
}

fn finalize_sweep_keys(keys: SweepKeys) -> Result<SweepSection, ConfigError> {
    let line = keys.header_line;
    let parameter = keys
        .parameter
        .ok_or_else(|| ConfigError::new(line, "[sweep] is missing `parameter`".to_string()))?;
    let sources = [
        keys.values.is_some(),
        keys.logspace.is_some(),
        keys.linspace.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count();
    if sources != 1 {
        return Err(ConfigError::new(
            line,
            "[sweep] needs exactly one of `values`, `logspace`, `linspace`".to_string(),
        ));
    }
    let mut grid = Vec::new();
    if let Some(pre) = keys.prepend {
        grid.extend(pre);
    }
    if let Some(values) = keys.values {
        grid.extend(values);
    } else if let Some(spec) = keys.logspace {
        grid.extend(realize_spaced_grid(&spec, line, "logspace", true)?);
    } else if let Some(spec) = keys.linspace {
        grid.extend(realize_spaced_grid(&spec, line, "linspace", false)?);
    }
    if grid.is_empty() {
        return Err(ConfigError::new(line, "[sweep] grid is empty".to_string()));
    }
    if grid.len() > MAX_GRID_POINTS {
        return Err(ConfigError::new(
            line,
            format!("[sweep] grid exceeds {MAX_GRID_POINTS} points"),
        ));
    }
    Ok(SweepSection {
        parameter,
        grid,
        eta: keys.eta,
        t41: keys.t41.unwrap_or(true),
        f41: keys.f41.unwrap_or(false),
        trajectory_steps: keys.trajectory_steps,
        trajectory_stride: keys.trajectory_stride.unwrap_or(1000),
        tail_bound: keys.tail_bound.unwrap_or(DEFAULT_TAIL_BOUND),
        max_steps: keys.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
    })
}
