//! Formula trees recovered from an SFD's `vop` and link-position attributes.
//!
//! A variable's formula is its operator applied to the sources of every
//! `LV`, `LSV`, `LPV` and `LVV` row pointing at it, ordered by the row's
//! position attribute. Sum variables are the sum of their linked stocks.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::cset::{AttrValue, CSetInstance, Operator, PartId};
use crate::error::{Error, Result};
use crate::schemas::VAR_LINK_TABLES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RefKind {
    Stock,
    SumVar,
    Param,
    Aux,
}

impl RefKind {
    pub fn object(self) -> &'static str {
        match self {
            RefKind::Stock => "S",
            RefKind::SumVar => "SV",
            RefKind::Param => "P",
            RefKind::Aux => "V",
        }
    }

    pub fn name_attr(self) -> &'static str {
        match self {
            RefKind::Stock => "sname",
            RefKind::SumVar => "svname",
            RefKind::Param => "pname",
            RefKind::Aux => "vname",
        }
    }

    fn of_link_table(table: &str) -> RefKind {
        match table {
            "LV" => RefKind::Stock,
            "LSV" => RefKind::SumVar,
            "LPV" => RefKind::Param,
            _ => RefKind::Aux,
        }
    }
}

/// A stock, sum variable, parameter or auxiliary variable, by 0-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef {
    pub kind: RefKind,
    pub index: usize,
}

impl VarRef {
    pub fn new(kind: RefKind, index: usize) -> VarRef {
        VarRef { kind, index }
    }

    pub fn part(self) -> PartId {
        PartId::new(self.kind.object(), self.index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FormulaExpr {
    Ref { var: VarRef, name: String },
    Literal(f64),
    Apply { op: Operator, args: Vec<FormulaExpr> },
}

impl FormulaExpr {
    fn reference(sfd: &CSetInstance, var: VarRef) -> FormulaExpr {
        FormulaExpr::Ref {
            var,
            name: sfd.name_of(var.index, var.kind.name_attr()).to_string(),
        }
    }

    /// Every reference leaf, left to right.
    pub fn refs(&self) -> Vec<VarRef> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs(&self, out: &mut Vec<VarRef>) {
        match self {
            FormulaExpr::Ref { var, .. } => out.push(*var),
            FormulaExpr::Literal(_) => {}
            FormulaExpr::Apply { args, .. } => args.iter().for_each(|a| a.collect_refs(out)),
        }
    }

    /// Evaluates with `lookup` supplying every reference leaf.
    pub fn eval_with<F>(&self, lookup: &F) -> Result<f64>
    where
        F: Fn(VarRef) -> Option<f64>,
    {
        match self {
            FormulaExpr::Ref { var, name } => lookup(*var).ok_or_else(|| Error::MissingBinding(name.clone())),
            FormulaExpr::Literal(x) => Ok(*x),
            FormulaExpr::Apply { op, args } => {
                let vals = args.iter().map(|a| a.eval_with(lookup)).collect::<Result<Vec<f64>>>()?;
                match op {
                    Operator::Add => Ok(vals.iter().sum()),
                    Operator::Mul => Ok(vals.iter().product()),
                    Operator::Sub if vals.len() == 2 => Ok(vals[0] - vals[1]),
                    Operator::Div if vals.len() == 2 => {
                        if vals[1] == 0.0 {
                            Err(Error::DivisionByZero(self.to_string()))
                        } else {
                            Ok(vals[0] / vals[1])
                        }
                    }
                    Operator::Literal(x) if vals.is_empty() => Ok(*x),
                    _ => Err(Error::Unsupported(format!("{} with {} argument(s)", op.symbol(), vals.len()))),
                }
            }
        }
    }

    /// Replaces each auxiliary reference by `expand(index)`.
    fn substitute(&self, expand: &dyn Fn(usize) -> FormulaExpr) -> FormulaExpr {
        match self {
            FormulaExpr::Ref { var, .. } if var.kind == RefKind::Aux => expand(var.index),
            FormulaExpr::Apply { op, args } => FormulaExpr::Apply {
                op: *op,
                args: args.iter().map(|a| a.substitute(expand)).collect(),
            },
            other => other.clone(),
        }
    }
}

impl fmt::Display for FormulaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaExpr::Ref { name, .. } => f.write_str(name),
            FormulaExpr::Literal(x) => write!(f, "{x}"),
            FormulaExpr::Apply { op, args } => {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, " {} ", op.symbol())?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Values for reference leaves.
#[derive(Debug, Clone, Default)]
pub struct NumericEnv {
    values: HashMap<VarRef, f64>,
}

impl NumericEnv {
    pub fn new() -> NumericEnv {
        NumericEnv::default()
    }

    pub fn set(&mut self, var: VarRef, value: f64) -> &mut Self {
        self.values.insert(var, value);
        self
    }

    pub fn get(&self, var: VarRef) -> Option<f64> {
        self.values.get(&var).copied()
    }
}

pub fn evaluate(expr: &FormulaExpr, env: &NumericEnv) -> Result<f64> {
    expr.eval_with(&|v| env.get(v))
}

fn formula_error(sfd: &CSetInstance, v: usize, reason: String) -> Error {
    Error::Formula {
        var: sfd.name_of(v, "vname").to_string(),
        reason,
    }
}

/// One-level formula of auxiliary variable `v` (0-based). Auxiliary
/// arguments stay as references; see [`reconstruct_closure`].
pub fn reconstruct_formula(sfd: &CSetInstance, v: usize) -> Result<FormulaExpr> {
    sfd.ensure_valid()?;
    if v >= sfd.try_nparts("V")? {
        return Err(Error::NoSuchPart(PartId::new("V", v).to_string()));
    }
    let op = sfd
        .attr(v, "vop")
        .and_then(AttrValue::as_op)
        .ok_or_else(|| formula_error(sfd, v, "no operator".into()))?;
    let mut slots: Vec<(i64, VarRef)> = Vec::new();
    for (table, src, tgt, pos) in VAR_LINK_TABLES {
        let kind = RefKind::of_link_table(table);
        for row in sfd.incident(tgt, v) {
            let p = sfd
                .attr(row, pos)
                .and_then(AttrValue::as_int)
                .ok_or_else(|| formula_error(sfd, v, format!("{table} row {} has no position", row + 1)))?;
            slots.push((p, VarRef::new(kind, sfd.subpart(row, src))));
        }
    }
    slots.sort_by_key(|(p, _)| *p);
    for w in slots.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(formula_error(sfd, v, format!("duplicate argument position {}", w[0].0)));
        }
    }
    for (i, (p, _)) in slots.iter().enumerate() {
        if *p != i as i64 + 1 {
            return Err(formula_error(sfd, v, format!("missing argument position {}", i + 1)));
        }
    }
    if !op.accepts_arity(slots.len()) {
        return Err(Error::Arity {
            var: sfd.name_of(v, "vname").to_string(),
            op: op.symbol(),
            got: slots.len(),
        });
    }
    Ok(match op {
        Operator::Literal(x) => FormulaExpr::Literal(x),
        _ => FormulaExpr::Apply {
            op,
            args: slots.into_iter().map(|(_, r)| FormulaExpr::reference(sfd, r)).collect(),
        },
    })
}

/// Auxiliary variables in dependency order (smallest index first among
/// ready variables). Fails on a cycle through `LVV` links.
pub fn aux_order(sfd: &CSetInstance) -> Result<Vec<usize>> {
    let n = sfd.try_nparts("V")?;
    let mut indegree = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for row in 0..sfd.try_nparts("LVV")? {
        let (s, t) = (sfd.subpart(row, "lvsrc"), sfd.subpart(row, "lvtgt"));
        succ[s].push(t);
        indegree[t] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &t in &succ[v] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.insert(t);
            }
        }
    }
    if order.len() < n {
        let stuck: Vec<&str> = (0..n)
            .filter(|&v| indegree[v] > 0)
            .map(|v| sfd.name_of(v, "vname"))
            .collect();
        let first = (0..n).find(|&v| indegree[v] > 0).unwrap_or(0);
        return Err(formula_error(
            sfd,
            first,
            format!("cyclic dependency among {}", stuck.join(", ")),
        ));
    }
    Ok(order)
}

/// Formula of `v` with every auxiliary reference expanded, leaving only
/// stocks, sum variables, parameters and literals.
pub fn reconstruct_closure(sfd: &CSetInstance, v: usize) -> Result<FormulaExpr> {
    let order = aux_order(sfd)?;
    let mut done: HashMap<usize, FormulaExpr> = HashMap::new();
    for u in order {
        let one = reconstruct_formula(sfd, u)?;
        let expanded = one.substitute(&|i| done[&i].clone());
        done.insert(u, expanded);
        if u == v {
            break;
        }
    }
    done.remove(&v)
        .ok_or_else(|| Error::NoSuchPart(PartId::new("V", v).to_string()))
}

/// Sum of the stocks linked to sum variable `sv`, ordered by stock index.
pub fn sum_var_formula(sfd: &CSetInstance, sv: usize) -> Result<FormulaExpr> {
    if sv >= sfd.try_nparts("SV")? {
        return Err(Error::NoSuchPart(PartId::new("SV", sv).to_string()));
    }
    let mut stocks: Vec<usize> = sfd
        .incident("lssv", sv)
        .into_iter()
        .filter_map(|row| sfd.try_subpart(row, "lss").ok().flatten())
        .collect();
    stocks.sort_unstable();
    if stocks.is_empty() {
        return Ok(FormulaExpr::Literal(0.0));
    }
    Ok(FormulaExpr::Apply {
        op: Operator::Add,
        args: stocks
            .into_iter()
            .map(|s| FormulaExpr::reference(sfd, VarRef::new(RefKind::Stock, s)))
            .collect(),
    })
}

/// All formulas of an SFD prepared for repeated evaluation: sum variables
/// first, then auxiliary variables in dependency order, each evaluated once
/// per pass.
#[derive(Debug, Clone)]
pub struct Evaluator {
    sums: Vec<FormulaExpr>,
    aux: Vec<FormulaExpr>,
    order: Vec<usize>,
    nstocks: usize,
    nparams: usize,
}

/// Values of every variable at one state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarValues {
    pub sums: Vec<f64>,
    pub aux: Vec<f64>,
}

impl Evaluator {
    pub fn new(sfd: &CSetInstance) -> Result<Evaluator> {
        let order = aux_order(sfd)?;
        let aux = (0..sfd.nparts("V"))
            .map(|v| reconstruct_formula(sfd, v))
            .collect::<Result<Vec<_>>>()?;
        let sums = (0..sfd.nparts("SV"))
            .map(|s| sum_var_formula(sfd, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Evaluator {
            sums,
            aux,
            order,
            nstocks: sfd.nparts("S"),
            nparams: sfd.nparts("P"),
        })
    }

    pub fn aux_formula(&self, v: usize) -> &FormulaExpr {
        &self.aux[v]
    }

    pub fn sum_formula(&self, sv: usize) -> &FormulaExpr {
        &self.sums[sv]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Evaluates all sum and auxiliary variables into `out`.
    pub fn eval_into(&self, stocks: &[f64], params: &[f64], out: &mut VarValues) -> Result<()> {
        debug_assert_eq!(stocks.len(), self.nstocks);
        debug_assert_eq!(params.len(), self.nparams);
        out.sums.clear();
        for e in &self.sums {
            let x = e.eval_with(&|r| match r.kind {
                RefKind::Stock => stocks.get(r.index).copied(),
                _ => None,
            })?;
            out.sums.push(x);
        }
        out.aux.clear();
        out.aux.resize(self.aux.len(), f64::NAN);
        for &v in &self.order {
            let sums = &out.sums;
            let aux = &out.aux;
            let x = self.aux[v].eval_with(&|r| match r.kind {
                RefKind::Stock => stocks.get(r.index).copied(),
                RefKind::SumVar => sums.get(r.index).copied(),
                RefKind::Param => params.get(r.index).copied(),
                RefKind::Aux => aux.get(r.index).copied(),
            })?;
            out.aux[v] = x;
        }
        Ok(())
    }

    pub fn eval(&self, stocks: &[f64], params: &[f64]) -> Result<VarValues> {
        let mut out = VarValues::default();
        self.eval_into(stocks, params, &mut out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemas::SfdSpec;

    fn prevalence() -> CSetInstance {
        SfdSpec::new()
            .stocks(&["S", "I", "R"])
            .sum_var("N", &["S", "I", "R"])
            .params(&["c"])
            .aux("v_prevalence", Operator::Div, &["I", "N"])
            .aux("v_contacts", Operator::Mul, &["c", "v_prevalence"])
            .aux("one", Operator::Literal(1.0), &[])
            .build()
            .unwrap()
    }

    #[test]
    fn renders_one_level_and_closure() {
        let sfd = prevalence();
        assert_eq!(reconstruct_formula(&sfd, 0).unwrap().to_string(), "(I / N)");
        assert_eq!(reconstruct_formula(&sfd, 1).unwrap().to_string(), "(c * v_prevalence)");
        assert_eq!(reconstruct_closure(&sfd, 1).unwrap().to_string(), "(c * (I / N))");
        assert_eq!(reconstruct_formula(&sfd, 2).unwrap(), FormulaExpr::Literal(1.0));
        assert_eq!(sum_var_formula(&sfd, 0).unwrap().to_string(), "(S + I + R)");
    }

    #[test]
    fn empty_and_single_sums() {
        let sfd = SfdSpec::new().stocks(&["X"]).sum_var("E", &[]).sum_var("O", &["X"]).build().unwrap();
        assert_eq!(sum_var_formula(&sfd, 0).unwrap(), FormulaExpr::Literal(0.0));
        assert_eq!(sum_var_formula(&sfd, 1).unwrap().to_string(), "(X)");
    }

    #[test]
    fn evaluation() {
        let sfd = prevalence();
        let mut env = NumericEnv::new();
        env.set(VarRef::new(RefKind::Stock, 1), 10.0)
            .set(VarRef::new(RefKind::SumVar, 0), 1000.0);
        assert_eq!(evaluate(&reconstruct_formula(&sfd, 0).unwrap(), &env).unwrap(), 0.01);
        let n = sum_var_formula(&sfd, 0).unwrap();
        let mut env = NumericEnv::new();
        for (i, x) in [990.0, 10.0, 0.0].into_iter().enumerate() {
            env.set(VarRef::new(RefKind::Stock, i), x);
        }
        assert_eq!(evaluate(&n, &env).unwrap(), 1000.0);
        assert!(matches!(
            evaluate(&reconstruct_formula(&sfd, 0).unwrap(), &NumericEnv::new()),
            Err(Error::MissingBinding(_))
        ));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let sfd = prevalence();
        let ev = Evaluator::new(&sfd).unwrap();
        assert!(matches!(ev.eval(&[0.0, 0.0, 0.0], &[1.0]), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn duplicate_position_rejected() {
        let mut sfd = SfdSpec::new()
            .stocks(&["X", "Y"])
            .aux("v", Operator::Div, &["X", "Y"])
            .build()
            .unwrap();
        sfd.set_attr(&PartId::new("LV", 1), "lvposition", AttrValue::Int(1)).unwrap();
        let err = reconstruct_formula(&sfd, 0).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn cycles_detected() {
        let mut sfd = SfdSpec::new()
            .stocks(&["X"])
            .aux("a", Operator::Add, &["X"])
            .aux("b", Operator::Add, &["a"])
            .build()
            .unwrap();
        let row = sfd.add_part("LVV").unwrap();
        sfd.set_subpart(&row, "lvsrc", &PartId::new("V", 1)).unwrap();
        sfd.set_subpart(&row, "lvtgt", &PartId::new("V", 0)).unwrap();
        sfd.set_attr(&row, "lvvposition", AttrValue::Int(2)).unwrap();
        let err = aux_order(&sfd).unwrap_err();
        assert!(err.to_string().contains("cyclic"), "{err}");
    }
}
