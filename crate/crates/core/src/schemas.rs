//! The three diagram schemas, their composition interfaces, and builders.
//!
//! | schema | objects |
//! |--------|---------|
//! | CLD | `V`, `L`, `A` |
//! | SSD | `S F I O V SV P A LV LS LSV LPV LVV` |
//! | SFD | as SSD without `A` and the polarity morphisms, plus `vop` and link positions |

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, LazyLock};

use crate::cset::{AttrValue, CSetInstance, Operator, PartId, Schema, Sign, ValueKind};
use crate::error::{Error, Result};

static SCH_CLD: LazyLock<Arc<Schema>> = LazyLock::new(|| {
    Arc::new(
        Schema::new(
            "SchCLD",
            &["V", "L", "A"],
            &[("src", "L", "V"), ("tgt", "L", "V"), ("polarity", "L", "A")],
            &[("Name", ValueKind::Text), ("Polarity", ValueKind::Sign)],
            &[("vname", "V", "Name"), ("sgn", "A", "Polarity")],
        )
        .expect("CLD schema"),
    )
});

const STOCK_FLOW_OBJECTS: [&str; 12] = ["S", "F", "I", "O", "V", "SV", "P", "LV", "LS", "LSV", "LPV", "LVV"];

const STOCK_FLOW_HOMS: [(&str, &str, &str); 15] = [
    ("is", "I", "S"),
    ("ifn", "I", "F"),
    ("os", "O", "S"),
    ("ofn", "O", "F"),
    ("fv", "F", "V"),
    ("lvs", "LV", "S"),
    ("lvv", "LV", "V"),
    ("lss", "LS", "S"),
    ("lssv", "LS", "SV"),
    ("lsvsv", "LSV", "SV"),
    ("lsvv", "LSV", "V"),
    ("lpvp", "LPV", "P"),
    ("lpvv", "LPV", "V"),
    ("lvsrc", "LVV", "V"),
    ("lvtgt", "LVV", "V"),
];

const STOCK_FLOW_NAMES: [(&str, &str, &str); 5] = [
    ("sname", "S", "Name"),
    ("fname", "F", "Name"),
    ("vname", "V", "Name"),
    ("svname", "SV", "Name"),
    ("pname", "P", "Name"),
];

static SCH_SSD: LazyLock<Arc<Schema>> = LazyLock::new(|| {
    let mut objects = STOCK_FLOW_OBJECTS.to_vec();
    objects.insert(7, "A");
    let mut homs = STOCK_FLOW_HOMS.to_vec();
    homs.extend([
        ("polarityLV", "LV", "A"),
        ("positiveLS", "LS", "A"),
        ("polarityLSV", "LSV", "A"),
        ("polarityLPV", "LPV", "A"),
        ("polarityLVV", "LVV", "A"),
        ("positiveI", "I", "A"),
        ("negativeO", "O", "A"),
    ]);
    let mut attrs = STOCK_FLOW_NAMES.to_vec();
    attrs.push(("sgn", "A", "Polarity"));
    Arc::new(
        Schema::new(
            "SchSSD",
            &objects,
            &homs,
            &[("Name", ValueKind::Text), ("Polarity", ValueKind::Sign)],
            &attrs,
        )
        .expect("SSD schema"),
    )
});

static SCH_SFD: LazyLock<Arc<Schema>> = LazyLock::new(|| {
    let mut attrs = STOCK_FLOW_NAMES.to_vec();
    attrs.extend([
        ("vop", "V", "Op"),
        ("lvposition", "LV", "Position"),
        ("lsvposition", "LSV", "Position"),
        ("lvvposition", "LVV", "Position"),
        ("lpvposition", "LPV", "Position"),
    ]);
    Arc::new(
        Schema::new(
            "SchSFD",
            &STOCK_FLOW_OBJECTS,
            &STOCK_FLOW_HOMS,
            &[
                ("Name", ValueKind::Text),
                ("Op", ValueKind::Op),
                ("Position", ValueKind::Int),
            ],
            &attrs,
        )
        .expect("SFD schema"),
    )
});

static IFACE_SFD: LazyLock<Arc<Schema>> = LazyLock::new(|| {
    Arc::new(
        Schema::new(
            "InterfaceSFD",
            &["S", "SV", "LS"],
            &[("lss", "LS", "S"), ("lssv", "LS", "SV")],
            &[("Name", ValueKind::Text)],
            &[("sname", "S", "Name"), ("svname", "SV", "Name")],
        )
        .expect("SFD interface schema"),
    )
});

static IFACE_SSD: LazyLock<Arc<Schema>> = LazyLock::new(|| {
    Arc::new(
        Schema::new(
            "InterfaceSSD",
            &["S", "SV", "LS", "A"],
            &[("lss", "LS", "S"), ("lssv", "LS", "SV"), ("positiveLS", "LS", "A")],
            &[("Name", ValueKind::Text), ("Polarity", ValueKind::Sign)],
            &[("sname", "S", "Name"), ("svname", "SV", "Name"), ("sgn", "A", "Polarity")],
        )
        .expect("SSD interface schema"),
    )
});

pub fn sch_cld() -> Arc<Schema> {
    SCH_CLD.clone()
}

pub fn sch_ssd() -> Arc<Schema> {
    SCH_SSD.clone()
}

pub fn sch_sfd() -> Arc<Schema> {
    SCH_SFD.clone()
}

/// CLDs glue along arbitrary sub-diagrams, so their interface is the full schema.
pub fn interface_cld() -> Arc<Schema> {
    SCH_CLD.clone()
}

pub fn interface_ssd() -> Arc<Schema> {
    IFACE_SSD.clone()
}

pub fn interface_sfd() -> Arc<Schema> {
    IFACE_SFD.clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagramKind {
    Cld,
    Ssd,
    Sfd,
}

impl DiagramKind {
    pub fn schema(self) -> Arc<Schema> {
        match self {
            DiagramKind::Cld => sch_cld(),
            DiagramKind::Ssd => sch_ssd(),
            DiagramKind::Sfd => sch_sfd(),
        }
    }

    pub fn interface_schema(self) -> Arc<Schema> {
        match self {
            DiagramKind::Cld => interface_cld(),
            DiagramKind::Ssd => interface_ssd(),
            DiagramKind::Sfd => interface_sfd(),
        }
    }

    /// Kind of a full diagram schema, by schema name.
    pub fn of_schema(schema: &Schema) -> Option<DiagramKind> {
        match schema.name() {
            "SchCLD" => Some(DiagramKind::Cld),
            "SchSSD" => Some(DiagramKind::Ssd),
            "SchSFD" => Some(DiagramKind::Sfd),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiagramKind::Cld => "cld",
            DiagramKind::Ssd => "ssd",
            DiagramKind::Sfd => "sfd",
        }
    }
}

impl fmt::Display for DiagramKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DiagramKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cld" => Ok(DiagramKind::Cld),
            "ssd" => Ok(DiagramKind::Ssd),
            "sfd" => Ok(DiagramKind::Sfd),
            _ => Err(Error::Parse(format!("unknown diagram kind `{s}`"))),
        }
    }
}

/// The name attribute of an object in the shipped schemas, if it has one.
pub fn name_attr(object: &str) -> Option<&'static str> {
    match object {
        "S" => Some("sname"),
        "F" => Some("fname"),
        "V" => Some("vname"),
        "SV" => Some("svname"),
        "P" => Some("pname"),
        _ => None,
    }
}

/// Adds the two polarity parts `A#1 = +`, `A#2 = -`.
pub(crate) fn add_sign_parts(inst: &mut CSetInstance) -> Result<()> {
    for s in [Sign::Pos, Sign::Neg] {
        let a = inst.add_part("A")?;
        inst.set_attr(&a, "sgn", AttrValue::Sign(s))?;
    }
    Ok(())
}

/// Part of `A` carrying `sign` (0 for `+`, 1 for `-` in built diagrams).
pub fn sign_part(inst: &CSetInstance, sign: Sign) -> Option<usize> {
    (0..inst.try_nparts("A").ok()?).find(|&i| inst.attr(i, "sgn").and_then(AttrValue::as_sign) == Some(sign))
}

/// Sign of the polarity morphism `column` at `row`.
pub fn sign_at(inst: &CSetInstance, row: usize, column: &str) -> Option<Sign> {
    let a = inst.try_subpart(row, column).ok()??;
    inst.attr(a, "sgn").and_then(AttrValue::as_sign)
}

/// Builds a CLD from variable names and signed links between them.
pub fn build_cld(variables: &[&str], links: &[(&str, &str, Sign)]) -> Result<CSetInstance> {
    let mut cld = CSetInstance::new(sch_cld());
    let mut index = HashMap::new();
    for name in variables {
        let v = cld.add_part("V")?;
        if index.insert(*name, v.clone()).is_some() {
            return Err(Error::DuplicateName(name.to_string()));
        }
        cld.set_attr(&v, "vname", AttrValue::text(*name))?;
    }
    add_sign_parts(&mut cld)?;
    for (src, tgt, sign) in links {
        let lookup = |n: &str| index.get(n).cloned().ok_or_else(|| Error::UnknownName(n.to_string()));
        let (s, t) = (lookup(src)?, lookup(tgt)?);
        let l = cld.add_part("L")?;
        cld.set_subpart(&l, "src", &s)?;
        cld.set_subpart(&l, "tgt", &t)?;
        let a = match sign {
            Sign::Pos => 0,
            Sign::Neg => 1,
        };
        cld.set_subpart(&l, "polarity", &PartId::new("A", a))?;
    }
    Ok(cld)
}

/// A flow: its name, the auxiliary variable carrying its rate, and the stock
/// it drains (`from`) and fills (`to`). A missing side is a cloud.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub name: String,
    pub var: String,
    pub from: Option<String>,
    pub to: Option<String>,
}

impl FlowSpec {
    pub fn new(name: &str, var: &str, from: Option<&str>, to: Option<&str>) -> FlowSpec {
        FlowSpec {
            name: name.into(),
            var: var.into(),
            from: from.map(Into::into),
            to: to.map(Into::into),
        }
    }
}

/// Declarative description of a stock & flow diagram.
///
/// Auxiliary variable arguments are given in formula order; their positions
/// become the `*position` attributes of the generated link rows. Link rows are
/// emitted in variable order, then argument order.
#[derive(Debug, Clone, Default)]
pub struct SfdSpec {
    pub stocks: Vec<String>,
    /// Sum variable name and the stocks it sums.
    pub sum_vars: Vec<(String, Vec<String>)>,
    pub params: Vec<String>,
    pub aux_vars: Vec<(String, Operator, Vec<String>)>,
    pub flows: Vec<FlowSpec>,
}

impl SfdSpec {
    pub fn new() -> SfdSpec {
        SfdSpec::default()
    }

    pub fn stocks(mut self, names: &[&str]) -> Self {
        self.stocks.extend(names.iter().map(|s| s.to_string()));
        self
    }

    pub fn sum_var(mut self, name: &str, stocks: &[&str]) -> Self {
        self.sum_vars
            .push((name.into(), stocks.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn params(mut self, names: &[&str]) -> Self {
        self.params.extend(names.iter().map(|s| s.to_string()));
        self
    }

    pub fn aux(mut self, name: &str, op: Operator, args: &[&str]) -> Self {
        self.aux_vars
            .push((name.into(), op, args.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn flow(mut self, name: &str, var: &str, from: Option<&str>, to: Option<&str>) -> Self {
        self.flows.push(FlowSpec::new(name, var, from, to));
        self
    }

    pub fn build(&self) -> Result<CSetInstance> {
        build_sfd(self)
    }
}

#[derive(Clone, Copy)]
enum Ref {
    Stock(usize),
    Sum(usize),
    Param(usize),
    Aux(usize),
}

/// Builds a valid SFD instance from a [`SfdSpec`].
pub fn build_sfd<'a>(spec: &'a SfdSpec) -> Result<CSetInstance> {
    let mut sfd = CSetInstance::new(sch_sfd());
    let mut names: HashMap<&str, Ref> = HashMap::new();
    let mut declare = |name: &'a str, r: Ref| -> Result<()> {
        if names.insert(name, r).is_some() {
            return Err(Error::DuplicateName(name.to_string()));
        }
        Ok(())
    };
    for (i, s) in spec.stocks.iter().enumerate() {
        declare(s, Ref::Stock(i))?;
    }
    for (i, (s, _)) in spec.sum_vars.iter().enumerate() {
        declare(s, Ref::Sum(i))?;
    }
    for (i, p) in spec.params.iter().enumerate() {
        declare(p, Ref::Param(i))?;
    }
    for (i, (v, _, _)) in spec.aux_vars.iter().enumerate() {
        declare(v, Ref::Aux(i))?;
    }
    let lookup = |n: &str| names.get(n).copied().ok_or_else(|| Error::UnknownName(n.to_string()));
    let stock = |n: &str| match lookup(n)? {
        Ref::Stock(i) => Ok(i),
        _ => Err(Error::UnknownName(format!("{n} (not a stock)"))),
    };

    for s in &spec.stocks {
        let p = sfd.add_part("S")?;
        sfd.set_attr(&p, "sname", AttrValue::text(s))?;
    }
    for (sv, _) in &spec.sum_vars {
        let p = sfd.add_part("SV")?;
        sfd.set_attr(&p, "svname", AttrValue::text(sv))?;
    }
    for pn in &spec.params {
        let p = sfd.add_part("P")?;
        sfd.set_attr(&p, "pname", AttrValue::text(pn))?;
    }
    for (v, op, _) in &spec.aux_vars {
        let p = sfd.add_part("V")?;
        sfd.set_attr(&p, "vname", AttrValue::text(v))?;
        sfd.set_attr(&p, "vop", AttrValue::Op(*op))?;
    }
    let mut flow_names = HashMap::new();
    for f in &spec.flows {
        if flow_names.insert(f.name.as_str(), ()).is_some() {
            return Err(Error::DuplicateName(f.name.clone()));
        }
        let var = match lookup(&f.var)? {
            Ref::Aux(i) => i,
            _ => return Err(Error::UnknownName(format!("{} (flow variable must be auxiliary)", f.var))),
        };
        let p = sfd.add_part("F")?;
        sfd.set_attr(&p, "fname", AttrValue::text(&f.name))?;
        sfd.set_subpart(&p, "fv", &PartId::new("V", var))?;
    }
    for (j, f) in spec.flows.iter().enumerate() {
        if let Some(to) = &f.to {
            let row = sfd.add_part("I")?;
            sfd.set_subpart(&row, "is", &PartId::new("S", stock(to)?))?;
            sfd.set_subpart(&row, "ifn", &PartId::new("F", j))?;
        }
    }
    for (j, f) in spec.flows.iter().enumerate() {
        if let Some(from) = &f.from {
            let row = sfd.add_part("O")?;
            sfd.set_subpart(&row, "os", &PartId::new("S", stock(from)?))?;
            sfd.set_subpart(&row, "ofn", &PartId::new("F", j))?;
        }
    }
    for (i, (_, stocks)) in spec.sum_vars.iter().enumerate() {
        for s in stocks {
            let row = sfd.add_part("LS")?;
            sfd.set_subpart(&row, "lss", &PartId::new("S", stock(s)?))?;
            sfd.set_subpart(&row, "lssv", &PartId::new("SV", i))?;
        }
    }
    for (i, (v, op, args)) in spec.aux_vars.iter().enumerate() {
        if !op.accepts_arity(args.len()) {
            return Err(Error::Arity {
                var: v.clone(),
                op: op.symbol(),
                got: args.len(),
            });
        }
        let target = PartId::new("V", i);
        for (k, arg) in args.iter().enumerate() {
            let (table, src_hom, src_ob, src_idx, tgt_hom, pos) = match lookup(arg)? {
                Ref::Stock(s) => ("LV", "lvs", "S", s, "lvv", "lvposition"),
                Ref::Sum(s) => ("LSV", "lsvsv", "SV", s, "lsvv", "lsvposition"),
                Ref::Param(s) => ("LPV", "lpvp", "P", s, "lpvv", "lpvposition"),
                Ref::Aux(s) => ("LVV", "lvsrc", "V", s, "lvtgt", "lvvposition"),
            };
            let row = sfd.add_part(table)?;
            sfd.set_subpart(&row, src_hom, &PartId::new(src_ob, src_idx))?;
            sfd.set_subpart(&row, tgt_hom, &target)?;
            sfd.set_attr(&row, pos, AttrValue::Int(k as i64 + 1))?;
        }
    }
    debug_assert!(sfd.validate().is_empty());
    Ok(sfd)
}

/// The four link tables into auxiliary variables of an SFD/SSD:
/// `(table, source morphism, target morphism, position attribute)`.
pub const VAR_LINK_TABLES: [(&str, &str, &str, &str); 4] = [
    ("LV", "lvs", "lvv", "lvposition"),
    ("LSV", "lsvsv", "lsvv", "lsvposition"),
    ("LPV", "lpvp", "lpvv", "lpvposition"),
    ("LVV", "lvsrc", "lvtgt", "lvvposition"),
];

/// Diagram-level rules beyond totality and range:
///
/// - CLD/SSD: `A` is exactly `{+, -}`; in an SSD `positiveLS`/`positiveI`
///   point at `+` and `negativeO` at `-`.
/// - SFD: for every auxiliary variable the link positions are exactly
///   `1..=n` and the operator accepts `n` arguments.
pub fn diagram_violations(kind: DiagramKind, inst: &CSetInstance) -> Vec<String> {
    let mut out = Vec::new();
    if !inst.validate().is_empty() {
        return out;
    }
    match kind {
        DiagramKind::Cld | DiagramKind::Ssd => {
            let signs: Vec<_> = (0..inst.nparts("A"))
                .map(|i| inst.attr(i, "sgn").and_then(AttrValue::as_sign))
                .collect();
            let mut sorted = signs.clone();
            sorted.sort();
            if sorted != [Some(Sign::Pos), Some(Sign::Neg)] {
                out.push(format!("A must hold exactly the signs + and -, found {}", signs.len()));
            }
            if kind == DiagramKind::Ssd {
                for (col, table, want) in [
                    ("positiveLS", "LS", Sign::Pos),
                    ("positiveI", "I", Sign::Pos),
                    ("negativeO", "O", Sign::Neg),
                ] {
                    for row in 0..inst.nparts(table) {
                        if sign_at(inst, row, col) != Some(want) {
                            out.push(format!("{table}.{col} row {}: must be {want}", row + 1));
                        }
                    }
                }
            }
        }
        DiagramKind::Sfd => {
            for v in 0..inst.nparts("V") {
                let mut positions: Vec<i64> = Vec::new();
                for (_, _, tgt, pos) in VAR_LINK_TABLES {
                    for row in inst.incident(tgt, v) {
                        positions.push(inst.attr(row, pos).and_then(AttrValue::as_int).unwrap_or(0));
                    }
                }
                positions.sort();
                let name = inst.name_of(v, "vname");
                if positions.iter().enumerate().any(|(i, &p)| p != i as i64 + 1) {
                    out.push(format!("V row {} ({name}): argument positions {positions:?} are not 1..{}", v + 1, positions.len()));
                }
                if let Some(op) = inst.attr(v, "vop").and_then(AttrValue::as_op) {
                    if !op.accepts_arity(positions.len()) {
                        out.push(format!(
                            "V row {} ({name}): operator {} cannot take {} argument(s)",
                            v + 1,
                            op.symbol(),
                            positions.len()
                        ));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schemas_are_well_formed() {
        assert_eq!(sch_cld().objects().len(), 3);
        assert_eq!(sch_ssd().objects().len(), 13);
        assert_eq!(sch_sfd().objects().len(), 12);
        assert_eq!(sch_ssd().homs().len(), 22);
        assert!(sch_sfd().ob_index("A").is_none());
    }

    #[test]
    fn interfaces_are_subschemas() {
        assert!(interface_sfd().is_subschema_of(&sch_sfd()));
        assert!(interface_ssd().is_subschema_of(&sch_ssd()));
        assert!(interface_cld().is_subschema_of(&sch_cld()));
        assert!(!interface_ssd().is_subschema_of(&sch_sfd()));
    }

    #[test]
    fn empty_cld_has_two_signs() {
        let cld = build_cld(&[], &[]).unwrap();
        assert_eq!(cld.nparts("A"), 2);
        assert_eq!(cld.nparts("V"), 0);
        assert!(diagram_violations(DiagramKind::Cld, &cld).is_empty());
    }

    #[test]
    fn cld_rejects_duplicates_and_unknown_endpoints() {
        assert!(matches!(build_cld(&["a", "a"], &[]), Err(Error::DuplicateName(_))));
        assert!(matches!(
            build_cld(&["a"], &[("a", "b", Sign::Pos)]),
            Err(Error::UnknownName(_))
        ));
    }

    #[test]
    fn sfd_positions_from_argument_order() {
        let sfd = SfdSpec::new()
            .stocks(&["I"])
            .sum_var("N", &["I"])
            .aux("v_prevalence", Operator::Div, &["I", "N"])
            .build()
            .unwrap();
        assert_eq!(sfd.nparts("LV"), 1);
        assert_eq!(sfd.nparts("LSV"), 1);
        assert_eq!(sfd.attr(0, "lvposition"), Some(&AttrValue::Int(1)));
        assert_eq!(sfd.attr(0, "lsvposition"), Some(&AttrValue::Int(2)));
        assert!(diagram_violations(DiagramKind::Sfd, &sfd).is_empty());
    }

    #[test]
    fn sfd_errors() {
        let missing_var = SfdSpec::new().stocks(&["X"]).flow("f", "nope", Some("X"), None);
        assert!(matches!(missing_var.build(), Err(Error::UnknownName(_))));
        let arity = SfdSpec::new().stocks(&["X"]).aux("v", Operator::Div, &["X"]);
        assert!(matches!(arity.build(), Err(Error::Arity { .. })));
        let literal_with_args = SfdSpec::new().stocks(&["X"]).aux("v", Operator::Literal(1.0), &["X"]);
        assert!(matches!(literal_with_args.build(), Err(Error::Arity { .. })));
    }

    #[test]
    fn duplicate_positions_are_reported() {
        let mut sfd = SfdSpec::new()
            .stocks(&["X", "Y"])
            .aux("v", Operator::Div, &["X", "Y"])
            .build()
            .unwrap();
        sfd.set_attr(&PartId::new("LV", 1), "lvposition", AttrValue::Int(1)).unwrap();
        assert_eq!(diagram_violations(DiagramKind::Sfd, &sfd).len(), 1);
    }
}
