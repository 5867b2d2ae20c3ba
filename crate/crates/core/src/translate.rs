//! Translations between diagram kinds: SFD → SSD (polarities from formulas),
//! SSD → CLD (data migration), and the direct SFD → CLD map.

use crate::cset::{AttrValue, CSetInstance, Operator, PartId, Sign};
use crate::error::{Error, Result};
use crate::schemas::{add_sign_parts, sch_cld, sch_ssd, sign_at, VAR_LINK_TABLES};

/// Link polarities by operator and argument position, assuming every
/// argument is positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarityRuleTable {
    pub add: Sign,
    pub mul: Sign,
    pub sub: [Sign; 2],
    pub div: [Sign; 2],
    pub stock_to_sum: Sign,
    pub inflow: Sign,
    pub outflow: Sign,
}

impl Default for PolarityRuleTable {
    fn default() -> Self {
        PolarityRuleTable {
            add: Sign::Pos,
            mul: Sign::Pos,
            sub: [Sign::Pos, Sign::Neg],
            div: [Sign::Pos, Sign::Neg],
            stock_to_sum: Sign::Pos,
            inflow: Sign::Pos,
            outflow: Sign::Neg,
        }
    }
}

impl PolarityRuleTable {
    /// Sign of the link in argument `position` (1-based) of an `op` formula.
    pub fn sign(&self, op: Operator, position: i64) -> Result<Sign> {
        match (op, position) {
            (Operator::Add, p) if p >= 1 => Ok(self.add),
            (Operator::Mul, p) if p >= 1 => Ok(self.mul),
            (Operator::Sub, 1 | 2) => Ok(self.sub[position as usize - 1]),
            (Operator::Div, 1 | 2) => Ok(self.div[position as usize - 1]),
            (Operator::Literal(_), _) => Err(Error::Unsupported(format!(
                "link into a literal constant ({})",
                op.symbol()
            ))),
            _ => Err(Error::Unsupported(format!("position {position} under `{}`", op.symbol()))),
        }
    }
}

/// Sign of one link row into an auxiliary variable.
fn var_link_sign(sfd: &CSetInstance, rules: &PolarityRuleTable, table: &str, tgt: &str, pos: &str, row: usize) -> Result<Sign> {
    let v = sfd.subpart(row, tgt);
    let op = sfd
        .attr(v, "vop")
        .and_then(AttrValue::as_op)
        .ok_or_else(|| Error::Unsupported(format!("variable {} has no operator", v + 1)))?;
    let p = sfd
        .attr(row, pos)
        .and_then(AttrValue::as_int)
        .ok_or_else(|| Error::Unsupported(format!("{table} row {} has no position", row + 1)))?;
    rules.sign(op, p)
}

fn polarity_column(table: &str) -> &'static str {
    match table {
        "LV" => "polarityLV",
        "LSV" => "polarityLSV",
        "LPV" => "polarityLPV",
        _ => "polarityLVV",
    }
}

fn sign_index(s: Sign) -> usize {
    match s {
        Sign::Pos => 0,
        Sign::Neg => 1,
    }
}

pub fn sfd_to_ssd(sfd: &CSetInstance) -> Result<CSetInstance> {
    sfd_to_ssd_with(sfd, &PolarityRuleTable::default())
}

/// Copies all structure and names, adds `A = {+, -}` and fills every
/// polarity column.
pub fn sfd_to_ssd_with(sfd: &CSetInstance, rules: &PolarityRuleTable) -> Result<CSetInstance> {
    sfd.ensure_valid()?;
    let mut ssd = CSetInstance::from_subschema(sch_ssd(), sfd);
    add_sign_parts(&mut ssd)?;
    let a = |s: Sign| PartId::new("A", sign_index(s));
    for (table, col, sign) in [
        ("LS", "positiveLS", rules.stock_to_sum),
        ("I", "positiveI", rules.inflow),
        ("O", "negativeO", rules.outflow),
    ] {
        for row in 0..sfd.nparts(table) {
            ssd.set_subpart(&PartId::new(table, row), col, &a(sign))?;
        }
    }
    for (table, _, tgt, pos) in VAR_LINK_TABLES {
        for row in 0..sfd.nparts(table) {
            let s = var_link_sign(sfd, rules, table, tgt, pos, row)?;
            ssd.set_subpart(&PartId::new(table, row), polarity_column(table), &a(s))?;
        }
    }
    Ok(ssd)
}

/// Where a CLD part came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub table: &'static str,
    /// 0-based row in `table`.
    pub row: usize,
}

/// Provenance of a translated CLD.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MigrationWitness {
    pub vertices: Vec<Origin>,
    pub links: Vec<Origin>,
    /// For each flow, the CLD vertex of its rate variable.
    pub flow_vertices: Vec<usize>,
}

const VERTEX_BLOCKS: [(&str, &str); 4] = [("S", "sname"), ("SV", "svname"), ("V", "vname"), ("P", "pname")];

/// `(table, source, target)` for each CLD link block, where a source or
/// target is a path of morphisms ending in a vertex block.
const LINK_BLOCKS: [(&str, &[&str], &[&str]); 7] = [
    ("LV", &["lvs"], &["lvv"]),
    ("LS", &["lss"], &["lssv"]),
    ("LSV", &["lsvsv"], &["lsvv"]),
    ("LPV", &["lpvp"], &["lpvv"]),
    ("LVV", &["lvsrc"], &["lvtgt"]),
    ("I", &["ifn", "fv"], &["is"]),
    ("O", &["ofn", "fv"], &["os"]),
];

fn block_of(last_hom: &str) -> usize {
    match last_hom {
        "lvs" | "lss" | "is" | "os" => 0,
        "lssv" | "lsvsv" => 1,
        "lpvp" => 3,
        _ => 2,
    }
}

struct CldSkeleton {
    cld: CSetInstance,
    witness: MigrationWitness,
    /// For every link: source table and row.
    link_rows: Vec<(&'static str, usize)>,
}

/// Vertices and link endpoints shared by both routes to a CLD; polarities
/// are left for the caller.
fn cld_skeleton(src: &CSetInstance) -> Result<CldSkeleton> {
    let mut cld = CSetInstance::new(sch_cld());
    let mut witness = MigrationWitness::default();
    let mut offsets = [0usize; 4];
    for (b, (table, name)) in VERTEX_BLOCKS.iter().enumerate() {
        offsets[b] = cld.nparts("V");
        for row in 0..src.nparts(table) {
            let v = cld.add_part("V")?;
            cld.set_attr(&v, "vname", AttrValue::text(src.name_of(row, name)))?;
            witness.vertices.push(Origin { table, row });
        }
    }
    add_sign_parts(&mut cld)?;
    let follow = |path: &[&str], row: usize| -> usize {
        let end = path.iter().fold(row, |x, h| src.subpart(x, h));
        offsets[block_of(path[path.len() - 1])] + end
    };
    let mut link_rows = Vec::new();
    for (table, s, t) in LINK_BLOCKS {
        for row in 0..src.nparts(table) {
            let l = cld.add_part("L")?;
            cld.set_subpart(&l, "src", &PartId::new("V", follow(s, row)))?;
            cld.set_subpart(&l, "tgt", &PartId::new("V", follow(t, row)))?;
            witness.links.push(Origin { table, row });
            link_rows.push((table, row));
        }
    }
    witness.flow_vertices = (0..src.nparts("F")).map(|f| offsets[2] + src.subpart(f, "fv")).collect();
    Ok(CldSkeleton {
        cld,
        witness,
        link_rows,
    })
}

fn ssd_polarity_column(table: &str) -> &'static str {
    match table {
        "LS" => "positiveLS",
        "I" => "positiveI",
        "O" => "negativeO",
        t => polarity_column(t),
    }
}

/// Data migration from an SSD: vertices are stocks, sum variables,
/// auxiliary variables and parameters (in that order); links are the seven
/// link and flow tables, flows attaching through their rate variable.
pub fn ssd_to_cld(ssd: &CSetInstance) -> Result<(CSetInstance, MigrationWitness)> {
    ssd.ensure_valid()?;
    ssd.same_schema(&CSetInstance::new(sch_ssd()))?;
    let mut sk = cld_skeleton(ssd)?;
    let signs: Vec<Sign> = (0..ssd.nparts("A"))
        .map(|a| ssd.attr(a, "sgn").and_then(AttrValue::as_sign).unwrap_or(Sign::Pos))
        .collect();
    if signs.len() != 2 {
        return Err(Error::Unsupported(format!("SSD has {} sign parts, expected 2", signs.len())));
    }
    for (i, s) in signs.iter().enumerate() {
        sk.cld.set_attr(&PartId::new("A", i), "sgn", AttrValue::Sign(*s))?;
    }
    for (l, (table, row)) in sk.link_rows.iter().enumerate() {
        let a = ssd.subpart(*row, ssd_polarity_column(table));
        sk.cld.set_subpart(&PartId::new("L", l), "polarity", &PartId::new("A", a))?;
    }
    Ok((sk.cld, sk.witness))
}

/// Direct SFD → CLD map, computing polarities without building an SSD.
pub fn sfd_to_cld(sfd: &CSetInstance) -> Result<(CSetInstance, MigrationWitness)> {
    sfd_to_cld_with(sfd, &PolarityRuleTable::default())
}

pub fn sfd_to_cld_with(sfd: &CSetInstance, rules: &PolarityRuleTable) -> Result<(CSetInstance, MigrationWitness)> {
    sfd.ensure_valid()?;
    let mut sk = cld_skeleton(sfd)?;
    for (l, (table, row)) in sk.link_rows.iter().enumerate() {
        let sign = match *table {
            "LS" => rules.stock_to_sum,
            "I" => rules.inflow,
            "O" => rules.outflow,
            t => {
                let (_, _, tgt, pos) = VAR_LINK_TABLES.iter().find(|x| x.0 == t).expect("link table");
                var_link_sign(sfd, rules, t, tgt, pos, *row)?
            }
        };
        sk.cld
            .set_subpart(&PartId::new("L", l), "polarity", &PartId::new("A", sign_index(sign)))?;
    }
    Ok((sk.cld, sk.witness))
}

/// Sign of CLD link `l`.
pub fn link_sign(cld: &CSetInstance, l: usize) -> Option<Sign> {
    sign_at(cld, l, "polarity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemas::SfdSpec;

    fn tiny() -> CSetInstance {
        SfdSpec::new()
            .stocks(&["X", "Y"])
            .params(&["k"])
            .aux("v", Operator::Div, &["X", "k"])
            .flow("f", "v", Some("X"), Some("Y"))
            .build()
            .unwrap()
    }

    #[test]
    fn rule_table() {
        let r = PolarityRuleTable::default();
        assert_eq!(r.sign(Operator::Div, 2).unwrap(), Sign::Neg);
        assert_eq!(r.sign(Operator::Sub, 1).unwrap(), Sign::Pos);
        assert_eq!(r.sign(Operator::Add, 7).unwrap(), Sign::Pos);
        assert!(r.sign(Operator::Div, 3).is_err());
        assert!(r.sign(Operator::Literal(2.0), 1).is_err());
    }

    #[test]
    fn tiny_translation() {
        let ssd = sfd_to_ssd(&tiny()).unwrap();
        assert_eq!(sign_at(&ssd, 0, "polarityLPV"), Some(Sign::Neg));
        assert_eq!(sign_at(&ssd, 0, "negativeO"), Some(Sign::Neg));
        let (cld, w) = ssd_to_cld(&ssd).unwrap();
        assert_eq!(cld.nparts("V"), 4);
        assert_eq!(cld.nparts("L"), 4);
        assert_eq!(w.flow_vertices, vec![2]);
        // inflow: v → Y
        let l = w.links.iter().position(|o| o.table == "I").unwrap();
        assert_eq!(cld.subpart(l, "src"), 2);
        assert_eq!(cld.subpart(l, "tgt"), 1);
        let (direct, w2) = sfd_to_cld(&tiny()).unwrap();
        assert_eq!(direct, cld);
        assert_eq!(w, w2);
    }

    #[test]
    fn empty_translations() {
        let sfd = CSetInstance::new(crate::schemas::sch_sfd());
        let (cld, _) = sfd_to_cld(&sfd).unwrap();
        assert_eq!(cld.nparts("V"), 0);
        assert_eq!(cld.nparts("A"), 2);
        let (two, _) = ssd_to_cld(&sfd_to_ssd(&sfd).unwrap()).unwrap();
        assert_eq!(two, cld);
    }
}
