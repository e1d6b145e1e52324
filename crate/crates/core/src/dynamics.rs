//! Synchronous discrete-time SIS busy-beaver imitation game.
//!
//! Each step reads only the time-`t` snapshot:
//!
//! * (a) a susceptible node with `n` infected neighbours becomes infected
//!   with probability `1 - (1 - nu)^n` and then displays the largest value
//!   among its own and its neighbours' displayed values;
//! * (b) an infected node is cured with probability `delta` and goes back
//!   to displaying its own fitness;
//! * (c) with reimitation on, a node that stays infected re-imitates its
//!   fittest neighbour with probability `nu`.
//!
//! Coins are drawn per node in id order, and within a node in rule order.
//! A node draws only for the rules that can fire for it.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::machines::{fitness, run, Machine};

/// Which neighbours a newly infected node imitates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImitationSource {
    #[default]
    AllNeighbors,
    InfectedNeighbors,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpidemicParams {
    /// Infection probability per infected neighbour per step.
    pub nu: f64,
    /// Cure probability per step.
    pub delta: f64,
    /// Initially infected fraction.
    pub rho0: f64,
    pub reimitation: bool,
    pub source: ImitationSource,
}

impl EpidemicParams {
    pub fn new(nu: f64, delta: f64, rho0: f64) -> Self {
        EpidemicParams {
            nu,
            delta,
            rho0,
            reimitation: false,
            source: ImitationSource::AllNeighbors,
        }
    }

    pub fn with_reimitation(mut self, on: bool) -> Self {
        self.reimitation = on;
        self
    }

    pub fn with_source(mut self, source: ImitationSource) -> Self {
        self.source = source;
        self
    }

    /// `delta = 0` is accepted for the no-cure limit; `lambda` is then
    /// infinite (or zero when `nu` is zero too).
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.nu) {
            return Err(Error::Param("nu must be in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::Param("delta must be in [0, 1]"));
        }
        if !(self.rho0 > 0.0 && self.rho0 <= 1.0) {
            return Err(Error::Param("rho0 must be in (0, 1]"));
        }
        Ok(())
    }

    /// Effective spreading rate `nu / delta`.
    pub fn lambda(&self) -> f64 {
        if self.nu == 0.0 {
            0.0
        } else {
            self.nu / self.delta
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Susceptible,
    Infected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeState {
    pub status: Status,
    pub own_fitness: u64,
    pub carried_fitness: u64,
}

impl NodeState {
    pub fn susceptible(own_fitness: u64) -> Self {
        NodeState {
            status: Status::Susceptible,
            own_fitness,
            carried_fitness: own_fitness,
        }
    }

    pub fn infected(own_fitness: u64, carried_fitness: u64) -> Self {
        NodeState {
            status: Status::Infected,
            own_fitness,
            carried_fitness,
        }
    }

    pub fn is_infected(&self) -> bool {
        self.status == Status::Infected
    }

    /// The integer a node shows its neighbours.
    pub fn displayed(&self) -> u64 {
        match self.status {
            Status::Infected => self.carried_fitness,
            Status::Susceptible => self.own_fitness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimState {
    pub t: u64,
    nodes: Vec<NodeState>,
    infected_count: usize,
}

impl SimState {
    pub fn from_nodes(nodes: Vec<NodeState>) -> SimState {
        let infected_count = nodes.iter().filter(|s| s.is_infected()).count();
        SimState {
            t: 0,
            nodes,
            infected_count,
        }
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeState {
        &self.nodes[i]
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn infected_count(&self) -> usize {
        self.infected_count
    }

    pub fn infected_density(&self) -> f64 {
        self.infected_count as f64 / self.nodes.len() as f64
    }

    pub fn max_displayed(&self) -> u64 {
        self.nodes.iter().map(NodeState::displayed).max().unwrap_or(0)
    }

    pub fn max_own_fitness(&self) -> u64 {
        self.nodes.iter().map(|s| s.own_fitness).max().unwrap_or(0)
    }

    /// Checks the cached infected count and the susceptible-carries-own rule.
    pub fn check_invariants(&self) -> bool {
        let counted = self.nodes.iter().filter(|s| s.is_infected()).count();
        counted == self.infected_count
            && self
                .nodes
                .iter()
                .all(|s| s.is_infected() || s.carried_fitness == s.own_fitness)
    }
}

/// Population fitness: each machine run once on `input` within `t_max`.
pub fn population_fitness(programs: &[Machine], input: &[bool], t_max: u64) -> Vec<u64> {
    programs.iter().map(|m| fitness(&run(m, input, t_max))).collect()
}

pub fn initial_infected(n: usize, rho0: f64) -> usize {
    let k = libm::round(rho0 * n as f64) as usize;
    k.clamp(1, n.max(1))
}

/// Runs every program to get its fitness, then infects
/// `max(1, round(rho0 * N))` nodes chosen uniformly at random.
pub fn init_state<R: Rng + ?Sized>(
    g: &Graph,
    programs: &[Machine],
    params: &EpidemicParams,
    input: &[bool],
    t_max: u64,
    rng: &mut R,
) -> Result<SimState> {
    if programs.len() != g.n() {
        return Err(Error::Param("need exactly one program per node"));
    }
    let own = population_fitness(programs, input, t_max);
    init_state_from_fitness(g, own, params, rng)
}

/// [`init_state`] for fitness values that were computed elsewhere.
pub fn init_state_from_fitness<R: Rng + ?Sized>(
    g: &Graph,
    own_fitness: Vec<u64>,
    params: &EpidemicParams,
    rng: &mut R,
) -> Result<SimState> {
    params.validate()?;
    let n = g.n();
    if n == 0 {
        return Err(Error::Param("graph has no nodes"));
    }
    if own_fitness.len() != n {
        return Err(Error::Param("need exactly one fitness value per node"));
    }
    let mut nodes: Vec<NodeState> = own_fitness.into_iter().map(NodeState::susceptible).collect();
    let count = initial_infected(n, params.rho0);
    for i in index::sample(rng, n, count) {
        nodes[i].status = Status::Infected;
    }
    Ok(SimState {
        t: 0,
        nodes,
        infected_count: count,
    })
}

/// `table[n] = 1 - (1 - nu)^n` for `n` in `0..=max_degree`.
pub fn infection_probabilities(nu: f64, max_degree: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(max_degree + 1);
    let mut escape = 1.0;
    for _ in 0..=max_degree {
        table.push(1.0 - escape);
        escape *= 1.0 - nu;
    }
    table
}

/// Lowest-id neighbour with the largest displayed value, restricted to
/// infected neighbours if `infected_only`.
pub fn fittest_neighbor(snapshot: &SimState, g: &Graph, i: usize, infected_only: bool) -> Option<(usize, u64)> {
    let mut best: Option<(usize, u64)> = None;
    for &j in g.neighbors(i) {
        let s = &snapshot.nodes[j as usize];
        if infected_only && !s.is_infected() {
            continue;
        }
        let v = s.displayed();
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((j as usize, v));
        }
    }
    best
}

/// Value a node adopts when it imitates: the fittest neighbour's displayed
/// value, never below what the node already displays.
fn imitate(snapshot: &SimState, g: &Graph, i: usize, source: ImitationSource) -> u64 {
    let current = snapshot.nodes[i].displayed();
    let infected_only = source == ImitationSource::InfectedNeighbors;
    match fittest_neighbor(snapshot, g, i, infected_only) {
        Some((_, v)) => v.max(current),
        None => current,
    }
}

/// Time-`t+1` state of node `i`, drawing uniforms in `[0, 1)` from `coin`
/// in rule order. `infection` is the table from
/// [`infection_probabilities`].
pub fn update_node<F: FnMut() -> f64>(
    snapshot: &SimState,
    g: &Graph,
    params: &EpidemicParams,
    infection: &[f64],
    i: usize,
    mut coin: F,
) -> NodeState {
    let s = snapshot.nodes[i];
    match s.status {
        Status::Susceptible => {
            let n_inf = g
                .neighbors(i)
                .iter()
                .filter(|&&j| snapshot.nodes[j as usize].is_infected())
                .count();
            if n_inf > 0 && coin() < infection[n_inf] {
                NodeState::infected(s.own_fitness, imitate(snapshot, g, i, params.source))
            } else {
                s
            }
        }
        Status::Infected => {
            if coin() < params.delta {
                return NodeState::susceptible(s.own_fitness);
            }
            if params.reimitation && coin() < params.nu {
                return NodeState::infected(s.own_fitness, imitate(snapshot, g, i, params.source));
            }
            s
        }
    }
}

/// Writes the successor of `state` into `next`, reusing its buffer.
pub fn step_into<R: Rng + ?Sized>(
    state: &SimState,
    next: &mut SimState,
    g: &Graph,
    params: &EpidemicParams,
    infection: &[f64],
    rng: &mut R,
) {
    next.nodes.clear();
    let mut infected = 0;
    for i in 0..state.nodes.len() {
        let s = update_node(state, g, params, infection, i, || rng.random::<f64>());
        infected += s.is_infected() as usize;
        next.nodes.push(s);
    }
    next.infected_count = infected;
    next.t = state.t + 1;
}

pub fn step<R: Rng + ?Sized>(state: &SimState, g: &Graph, params: &EpidemicParams, rng: &mut R) -> SimState {
    let infection = infection_probabilities(params.nu, g.max_degree());
    let mut next = SimState::from_nodes(Vec::with_capacity(state.n()));
    step_into(state, &mut next, g, params, &infection, rng);
    next
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: u64,
    pub infected_density: f64,
    /// Fraction of nodes displaying the population's best own fitness.
    pub best_carrier_density: f64,
    pub max_displayed: u64,
}

/// Per-step observables; entry `t` describes the state after `t` steps,
/// entry 0 being the initial state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Last recorded step.
    pub fn last_step(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn infected_series(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.infected_density).collect()
    }

    pub fn best_carrier_series(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.best_carrier_density).collect()
    }
}

fn observe(state: &SimState, best: u64) -> TrajectoryPoint {
    let n = state.n() as f64;
    let carriers = state.nodes.iter().filter(|s| s.displayed() == best).count();
    TrajectoryPoint {
        t: state.t,
        infected_density: state.infected_count as f64 / n,
        best_carrier_density: carriers as f64 / n,
        max_displayed: state.max_displayed(),
    }
}

/// Advances `state` by `steps` steps, recording the initial state and every
/// step after it. Returns the trajectory and the final state.
pub fn run_from_state<R: Rng + ?Sized>(
    state: SimState,
    g: &Graph,
    params: &EpidemicParams,
    steps: u64,
    rng: &mut R,
) -> (Trajectory, SimState) {
    let best = state.max_own_fitness();
    let infection = infection_probabilities(params.nu, g.max_degree());
    let mut points = Vec::with_capacity(steps as usize + 1);
    points.push(observe(&state, best));
    let mut cur = state;
    let mut next = SimState::from_nodes(vec![]);
    for _ in 0..steps {
        step_into(&cur, &mut next, g, params, &infection, rng);
        core::mem::swap(&mut cur, &mut next);
        points.push(observe(&cur, best));
    }
    (Trajectory { points }, cur)
}

/// Initializes the population and runs `steps` synchronous steps.
#[allow(clippy::too_many_arguments)]
pub fn run_sim<R: Rng + ?Sized>(
    g: &Graph,
    programs: &[Machine],
    params: &EpidemicParams,
    input: &[bool],
    t_max: u64,
    steps: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::Param("need at least one simulation step"));
    }
    let state = init_state(g, programs, params, input, t_max, rng)?;
    Ok(run_from_state(state, g, params, steps, rng).0)
}
