//! Stochastic token semantics of an SFD (Gillespie's direct method).
//!
//! Stocks hold integer token counts and each flow fires as a Poisson process
//! whose hazard is the current value of its rate variable. A firing moves one
//! token out of every stock the flow drains and into every stock it fills.
//! A flow whose firing would empty a stock below zero has hazard 0.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cset::CSetInstance;
use crate::error::{Error, Result};
use crate::formula::VarValues;
use crate::ode::{compile_odes, fmt_real, time_grid, OdeSystem, Scenario, Trajectory};

/// Identifier of the random stream recorded in every event log.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState {
    pub counts: Vec<i64>,
    pub params: Vec<f64>,
    pub time: f64,
}

impl DiscreteState {
    /// Initial counts and parameters from a scenario; stock values must be
    /// non-negative integers.
    pub fn from_scenario(sys: &OdeSystem, scen: &Scenario) -> Result<DiscreteState> {
        let (stocks, params) = scen.resolve(sys)?;
        let counts = stocks
            .iter()
            .zip(&sys.stock_names)
            .map(|(&x, name)| {
                if x >= 0.0 && x.fract() == 0.0 && x < 9.0e15 {
                    Ok(x as i64)
                } else {
                    Err(Error::Scenario(format!("stock `{name}` needs a non-negative integer count, got {x}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscreteState {
            counts,
            params,
            time: scen.t0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub flow: usize,
    /// Counts after the firing.
    pub state: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub rng: &'static str,
    pub seed: u64,
    pub stock_names: Vec<String>,
    pub flow_names: Vec<String>,
    pub initial: Vec<i64>,
    pub t0: f64,
    pub tmax: f64,
    pub events: Vec<Event>,
}

impl EventLog {
    /// Counts after the last event at or before `t`.
    pub fn state_at(&self, t: f64) -> &[i64] {
        let k = self.events.partition_point(|e| e.time <= t);
        if k == 0 {
            &self.initial
        } else {
            &self.events[k - 1].state
        }
    }

    pub fn final_state(&self) -> &[i64] {
        self.events.last().map_or(&self.initial, |e| &e.state)
    }

    /// CSV with columns `t`, `flow_name`, then one count column per stock.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec!["t".to_string(), "flow_name".to_string()];
        header.extend(self.stock_names.iter().cloned());
        w.write_record(&header)?;
        for e in &self.events {
            let mut rec = vec![fmt_real(e.time), self.flow_names[e.flow].clone()];
            rec.extend(e.state.iter().map(|c| c.to_string()));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Per-flow stoichiometry: stocks drained and filled, one entry per row.
struct Wiring {
    drains: Vec<Vec<usize>>,
    fills: Vec<Vec<usize>>,
}

fn wiring(sfd: &CSetInstance) -> Wiring {
    let nf = sfd.nparts("F");
    let mut drains = vec![Vec::new(); nf];
    let mut fills = vec![Vec::new(); nf];
    for row in 0..sfd.nparts("O") {
        drains[sfd.subpart(row, "ofn")].push(sfd.subpart(row, "os"));
    }
    for row in 0..sfd.nparts("I") {
        fills[sfd.subpart(row, "ifn")].push(sfd.subpart(row, "is"));
    }
    Wiring { drains, fills }
}

pub fn simulate_ssa(sfd: &CSetInstance, init: &DiscreteState, tmax: f64, seed: u64) -> Result<EventLog> {
    let sys = compile_odes(sfd)?;
    let wires = wiring(sfd);
    let nf = sys.flow_names.len();
    if init.counts.len() != sys.nstocks() || init.params.len() != sys.param_names.len() {
        return Err(Error::Scenario("initial state does not match the diagram".into()));
    }
    if init.counts.iter().any(|&c| c < 0) {
        return Err(Error::Scenario("token counts must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = init.counts.clone();
    let mut t = init.time;
    let mut x = vec![0.0; counts.len()];
    let mut vars = VarValues::default();
    let mut hazards = vec![0.0; nf];
    let mut events = Vec::new();
    loop {
        for (xi, &c) in x.iter_mut().zip(&counts) {
            *xi = c as f64;
        }
        sys.evaluator.eval_into(&x, &init.params, &mut vars)?;
        let mut total = 0.0;
        for f in 0..nf {
            let h = vars.aux[sys.flow_vars[f]];
            if !h.is_finite() {
                return Err(Error::NonFinite {
                    time: t,
                    what: format!("hazard of flow `{}` = {h}", sys.flow_names[f]),
                });
            }
            if h < 0.0 {
                return Err(Error::NegativeHazard {
                    flow: sys.flow_names[f].clone(),
                    value: h,
                    time: t,
                });
            }
            let blocked = wires.drains[f]
                .iter()
                .any(|&s| counts[s] < wires.drains[f].iter().filter(|&&u| u == s).count() as i64);
            hazards[f] = if blocked { 0.0 } else { h };
            total += hazards[f];
        }
        if total <= 0.0 {
            break;
        }
        let u: f64 = rng.sample(Open01);
        t += -u.ln() / total;
        if t > tmax {
            break;
        }
        let pick = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (f, &h) in hazards.iter().enumerate() {
            if h > 0.0 {
                acc += h;
                chosen = Some(f);
                if pick < acc {
                    break;
                }
            }
        }
        let f = chosen.expect("positive total hazard");
        for &s in &wires.drains[f] {
            counts[s] -= 1;
        }
        for &s in &wires.fills[f] {
            counts[s] += 1;
        }
        events.push(Event {
            time: t,
            flow: f,
            state: counts.clone(),
        });
    }
    Ok(EventLog {
        rng: RNG_ALGORITHM,
        seed,
        stock_names: sys.stock_names.clone(),
        flow_names: sys.flow_names.clone(),
        initial: init.counts.clone(),
        t0: init.time,
        tmax,
        events,
    })
}

/// Counts sampled every `sample_dt` from `t0` to `tmax`, right-continuous:
/// a sample at `t` includes every event at or before `t`.
pub fn ssa_to_trajectory(log: &EventLog, sample_dt: f64) -> Result<Trajectory> {
    if !(sample_dt > 0.0) {
        return Err(Error::Scenario(format!("sample step must be positive, got {sample_dt}")));
    }
    let mut traj = Trajectory::new(log.stock_names.clone());
    if log.tmax <= log.t0 {
        traj.push(log.t0, log.initial.iter().map(|&c| c as f64));
        return Ok(traj);
    }
    for t in time_grid(log.t0, log.tmax, sample_dt) {
        traj.push(t, log.state_at(t).iter().map(|&c| c as f64));
    }
    Ok(traj)
}
