//! Compilation of an SFD to an ODE system and fixed-step integration.
//!
//! Every stock's derivative is the sum of its inflow rates minus the sum of
//! its outflow rates, where a flow's rate is the value of its `fv` variable.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cset::CSetInstance;
use crate::error::{Error, Result};
use crate::formula::{Evaluator, VarValues};

/// Numeric binding of an SFD: initial stocks, parameters and time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub t0: f64,
    pub tf: f64,
    pub dt: f64,
    pub stocks: serde_json::Map<String, serde_json::Value>,
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl Scenario {
    pub fn new(t0: f64, tf: f64, dt: f64) -> Scenario {
        Scenario {
            t0,
            tf,
            dt,
            stocks: Default::default(),
            params: Default::default(),
        }
    }

    pub fn stock(mut self, name: &str, value: f64) -> Self {
        self.stocks.insert(name.into(), value.into());
        self
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.into(), value.into());
        self
    }

    pub fn set_stock(&mut self, name: &str, value: f64) {
        self.stocks.insert(name.into(), value.into());
    }

    pub fn set_param(&mut self, name: &str, value: f64) {
        self.params.insert(name.into(), value.into());
    }

    fn lookup(map: &serde_json::Map<String, serde_json::Value>, what: &str, names: &[String]) -> Result<Vec<f64>> {
        for key in map.keys() {
            if !names.contains(key) {
                return Err(Error::Scenario(format!("unknown {what} `{key}`")));
            }
        }
        names
            .iter()
            .map(|n| {
                map.get(n)
                    .and_then(serde_json::Value::as_f64)
                    .ok_or_else(|| Error::Scenario(format!("no numeric value for {what} `{n}`")))
            })
            .collect()
    }

    /// Initial stock values and parameter values in declaration order.
    pub fn resolve(&self, sys: &OdeSystem) -> Result<(Vec<f64>, Vec<f64>)> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Scenario(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tf > self.t0) {
            return Err(Error::Scenario(format!("tf ({}) must exceed t0 ({})", self.tf, self.t0)));
        }
        Ok((
            Scenario::lookup(&self.stocks, "stock", &sys.stock_names)?,
            Scenario::lookup(&self.params, "parameter", &sys.param_names)?,
        ))
    }
}

/// Stock derivatives of an SFD, ready for integration.
#[derive(Debug, Clone)]
pub struct OdeSystem {
    pub evaluator: Evaluator,
    pub stock_names: Vec<String>,
    pub sum_names: Vec<String>,
    pub aux_names: Vec<String>,
    pub param_names: Vec<String>,
    pub flow_names: Vec<String>,
    /// Rate variable of each flow.
    pub flow_vars: Vec<usize>,
    /// Per stock, the flows filling it (one entry per `I` row).
    pub inflows: Vec<Vec<usize>>,
    /// Per stock, the flows draining it (one entry per `O` row).
    pub outflows: Vec<Vec<usize>>,
    /// Per stock, each flow's net multiplicity (inflow rows minus outflow
    /// rows), with zero entries dropped so a flow looping on a stock
    /// contributes nothing.
    pub net: Vec<Vec<(usize, f64)>>,
    pub warnings: Vec<String>,
}

fn net_coefficients(inflows: &[usize], outflows: &[usize]) -> Vec<(usize, f64)> {
    let mut net: BTreeMap<usize, i64> = BTreeMap::new();
    for &f in inflows {
        *net.entry(f).or_default() += 1;
    }
    for &f in outflows {
        *net.entry(f).or_default() -= 1;
    }
    net.into_iter().filter(|&(_, c)| c != 0).map(|(f, c)| (f, c as f64)).collect()
}

fn names(sfd: &CSetInstance, object: &str, attr: &str) -> Vec<String> {
    (0..sfd.nparts(object)).map(|i| sfd.name_of(i, attr).to_string()).collect()
}

pub fn compile_odes(sfd: &CSetInstance) -> Result<OdeSystem> {
    sfd.ensure_valid()?;
    let evaluator = Evaluator::new(sfd)?;
    let ns = sfd.nparts("S");
    let mut inflows = vec![Vec::new(); ns];
    let mut outflows = vec![Vec::new(); ns];
    for row in 0..sfd.nparts("I") {
        inflows[sfd.subpart(row, "is")].push(sfd.subpart(row, "ifn"));
    }
    for row in 0..sfd.nparts("O") {
        outflows[sfd.subpart(row, "os")].push(sfd.subpart(row, "ofn"));
    }
    inflows.iter_mut().for_each(|v| v.sort_unstable());
    outflows.iter_mut().for_each(|v| v.sort_unstable());
    let flow_names = names(sfd, "F", "fname");
    let mut warnings = Vec::new();
    for (f, name) in flow_names.iter().enumerate() {
        if sfd.incident("ifn", f).is_empty() && sfd.incident("ofn", f).is_empty() {
            warnings.push(format!("flow `{name}` is not connected to any stock"));
        }
    }
    Ok(OdeSystem {
        evaluator,
        stock_names: names(sfd, "S", "sname"),
        sum_names: names(sfd, "SV", "svname"),
        aux_names: names(sfd, "V", "vname"),
        param_names: names(sfd, "P", "pname"),
        flow_vars: (0..sfd.nparts("F")).map(|f| sfd.subpart(f, "fv")).collect(),
        flow_names,
        net: inflows.iter().zip(&outflows).map(|(i, o)| net_coefficients(i, o)).collect(),
        inflows,
        outflows,
        warnings,
    })
}

impl OdeSystem {
    pub fn nstocks(&self) -> usize {
        self.stock_names.len()
    }

    /// Right-hand side as text, e.g. `v_newInfections - v_newRecovery`.
    pub fn render_derivative(&self, stock: usize) -> String {
        let mut out = String::new();
        for &f in &self.inflows[stock] {
            if !out.is_empty() {
                out.push_str(" + ");
            }
            out.push_str(&self.aux_names[self.flow_vars[f]]);
        }
        for &f in &self.outflows[stock] {
            if out.is_empty() {
                out.push('-');
            } else {
                out.push_str(" - ");
            }
            out.push_str(&self.aux_names[self.flow_vars[f]]);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Flow rates at a state.
    pub fn flow_rates(&self, vars: &VarValues) -> Vec<f64> {
        self.flow_vars.iter().map(|&v| vars.aux[v]).collect()
    }

    /// Writes the derivative of every stock into `dy`, using `vars` as scratch.
    pub fn derivative_into(&self, y: &[f64], params: &[f64], vars: &mut VarValues, dy: &mut [f64]) -> Result<()> {
        self.evaluator.eval_into(y, params, vars)?;
        for (s, d) in dy.iter_mut().enumerate() {
            *d = self.net[s].iter().map(|&(f, c)| c * vars.aux[self.flow_vars[f]]).sum();
        }
        Ok(())
    }

    pub fn derivative(&self, y: &[f64], params: &[f64]) -> Result<Vec<f64>> {
        let mut vars = VarValues::default();
        let mut dy = vec![0.0; y.len()];
        self.derivative_into(y, params, &mut vars, &mut dy)?;
        Ok(dy)
    }
}

/// Sampled solution: column 0 holds stocks, then sum variables, then
/// auxiliary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(names: Vec<String>) -> Trajectory {
        Trajectory {
            times: Vec::new(),
            columns: vec![Vec::new(); names.len()],
            names,
        }
    }

    pub fn push(&mut self, t: f64, values: impl IntoIterator<Item = f64>) {
        self.times.push(t);
        let mut n = 0;
        for (col, v) in self.columns.iter_mut().zip(values) {
            col.push(v);
            n += 1;
        }
        debug_assert_eq!(n, self.columns.len());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    /// Values of every column at sample `k`.
    pub fn row(&self, k: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[k]).collect()
    }

    /// CSV with a `t` column followed by one column per series, every
    /// number printed with 17 significant digits.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        let mut cell = String::new();
        for k in 0..self.times.len() {
            let mut rec = Vec::with_capacity(self.columns.len() + 1);
            for x in std::iter::once(self.times[k]).chain(self.columns.iter().map(|c| c[k])) {
                cell.clear();
                write!(cell, "{}", fmt_real(x)).expect("write to string");
                rec.push(cell.clone());
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sample times `t0, t0 + dt, ...` with a shortened final step landing on `tf`.
pub fn time_grid(t0: f64, tf: f64, dt: f64) -> Vec<f64> {
    let span = tf - t0;
    let n = (span / dt * (1.0 + 1e-12)).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * dt).collect();
    let last = *times.last().unwrap();
    if (tf - last).abs() <= 1e-9 * dt {
        *times.last_mut().unwrap() = tf;
    } else if last < tf {
        times.push(tf);
    } else {
        times.pop();
        times.push(tf);
    }
    times
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Euler,
}

fn series_names(sys: &OdeSystem) -> Vec<String> {
    sys.stock_names
        .iter()
        .chain(&sys.sum_names)
        .chain(&sys.aux_names)
        .cloned()
        .collect()
}

fn check_finite(sys: &OdeSystem, t: f64, y: &[f64]) -> Result<()> {
    if let Some(i) = y.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            time: t,
            what: format!("stock `{}` = {}", sys.stock_names[i], y[i]),
        });
    }
    Ok(())
}

pub fn integrate(sys: &OdeSystem, scen: &Scenario, method: Method) -> Result<Trajectory> {
    let (mut y, params) = scen.resolve(sys)?;
    let times = time_grid(scen.t0, scen.tf, scen.dt);
    let n = y.len();
    let mut traj = Trajectory::new(series_names(sys));
    let mut vars = VarValues::default();
    let record = |traj: &mut Trajectory, t: f64, y: &[f64], vars: &mut VarValues| -> Result<()> {
        sys.evaluator.eval_into(y, &params, vars)?;
        traj.push(t, y.iter().chain(&vars.sums).chain(&vars.aux).copied());
        Ok(())
    };
    check_finite(sys, times[0], &y)?;
    record(&mut traj, times[0], &y, &mut vars)?;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for w in times.windows(2) {
        let h = w[1] - w[0];
        match method {
            Method::Euler => {
                sys.derivative_into(&y, &params, &mut vars, &mut k1)?;
                for i in 0..n {
                    y[i] += h * k1[i];
                }
            }
            Method::Rk4 => {
                sys.derivative_into(&y, &params, &mut vars, &mut k1)?;
                for i in 0..n {
                    tmp[i] = y[i] + 0.5 * h * k1[i];
                }
                sys.derivative_into(&tmp, &params, &mut vars, &mut k2)?;
                for i in 0..n {
                    tmp[i] = y[i] + 0.5 * h * k2[i];
                }
                sys.derivative_into(&tmp, &params, &mut vars, &mut k3)?;
                for i in 0..n {
                    tmp[i] = y[i] + h * k3[i];
                }
                sys.derivative_into(&tmp, &params, &mut vars, &mut k4)?;
                for i in 0..n {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        check_finite(sys, w[1], &y)?;
        record(&mut traj, w[1], &y, &mut vars)?;
    }
    Ok(traj)
}

/// Classic fourth-order Runge–Kutta with fixed step `dt`.
pub fn integrate_rk4(sys: &OdeSystem, scen: &Scenario) -> Result<Trajectory> {
    integrate(sys, scen, Method::Rk4)
}

/// Forward Euler with fixed step `dt`.
pub fn integrate_euler(sys: &OdeSystem, scen: &Scenario) -> Result<Trajectory> {
    integrate(sys, scen, Method::Euler)
}
