//! Generic attributed C-set engine.
//!
//! A [`Schema`] is a finite presentation: objects, morphisms between objects,
//! attribute types and attributes from objects into attribute types. A
//! [`CSetInstance`] assigns each object a finite set `{0, .., n-1}` of parts
//! and each morphism/attribute a column indexed by the parts of its domain.
//!
//! Part indices are 0-based in the API and 1-based wherever they are shown to
//! people or written to files (tables, JSON, diagnostics).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hom::Homomorphism;

/// Link polarity. Encoded in diagrams as the parts of the object `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Pos => "+",
            Sign::Neg => "-",
        }
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s {
            "+" => Some(Sign::Pos),
            "-" | "−" => Some(Sign::Neg),
            _ => None,
        }
    }

    /// Product in the group `{+1, -1}`.
    pub fn mul(self, other: Sign) -> Sign {
        if self == other {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Operator of an auxiliary variable's formula.
///
/// `+` and `*` are n-ary (at least one argument), `-` and `/` are binary and
/// `Literal` takes no arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    Add,
    Sub,
    Mul,
    Div,
    Literal(f64),
}

impl Operator {
    pub fn symbol(&self) -> String {
        match self {
            Operator::Add => "+".into(),
            Operator::Sub => "-".into(),
            Operator::Mul => "*".into(),
            Operator::Div => "/".into(),
            Operator::Literal(x) => format!("{x}"),
        }
    }

    /// Parses a symbol, or a decimal number for a literal constant.
    pub fn parse(s: &str) -> Option<Operator> {
        match s {
            "+" => Some(Operator::Add),
            "-" | "−" => Some(Operator::Sub),
            "*" => Some(Operator::Mul),
            "/" => Some(Operator::Div),
            _ => s.parse::<f64>().ok().map(Operator::Literal),
        }
    }

    pub fn accepts_arity(&self, n: usize) -> bool {
        match self {
            Operator::Add | Operator::Mul => n >= 1,
            Operator::Sub | Operator::Div => n == 2,
            Operator::Literal(_) => n == 0,
        }
    }
}

/// Kind of values an attribute type holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Text,
    Sign,
    Op,
    Int,
    Real,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Text => "text",
            ValueKind::Sign => "sign",
            ValueKind::Op => "operator",
            ValueKind::Int => "integer",
            ValueKind::Real => "real",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Text(String),
    Sign(Sign),
    Op(Operator),
    Int(i64),
    Real(f64),
}

impl AttrValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            AttrValue::Text(_) => ValueKind::Text,
            AttrValue::Sign(_) => ValueKind::Sign,
            AttrValue::Op(_) => ValueKind::Op,
            AttrValue::Int(_) => ValueKind::Int,
            AttrValue::Real(_) => ValueKind::Real,
        }
    }

    pub fn text(s: impl Into<String>) -> AttrValue {
        AttrValue::Text(s.into())
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_sign(&self) -> Option<Sign> {
        match self {
            AttrValue::Sign(s) => Some(*s),
            _ => None,
        }
    }

    pub fn as_op(&self) -> Option<Operator> {
        match self {
            AttrValue::Op(o) => Some(*o),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            AttrValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// Parses the textual cell form used by table export.
    pub fn parse(kind: ValueKind, s: &str) -> Option<AttrValue> {
        match kind {
            ValueKind::Text => Some(AttrValue::Text(s.to_string())),
            ValueKind::Sign => Sign::parse(s).map(AttrValue::Sign),
            ValueKind::Op => Operator::parse(s).map(AttrValue::Op),
            ValueKind::Int => s.parse().ok().map(AttrValue::Int),
            ValueKind::Real => s.parse().ok().map(AttrValue::Real),
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Text(s) => f.write_str(s),
            AttrValue::Sign(s) => f.write_str(s.symbol()),
            AttrValue::Op(o) => f.write_str(&o.symbol()),
            AttrValue::Int(i) => write!(f, "{i}"),
            AttrValue::Real(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hom {
    pub name: String,
    pub dom: usize,
    pub cod: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrType {
    pub name: String,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attr {
    pub name: String,
    pub dom: usize,
    pub ty: usize,
}

/// Finite presentation of a free schema category with attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    name: String,
    objects: Vec<String>,
    homs: Vec<Hom>,
    attrtypes: Vec<AttrType>,
    attrs: Vec<Attr>,
}

impl Schema {
    /// Builds a schema from names. Morphisms are `(name, dom, cod)` and
    /// attributes `(name, dom, attrtype)`.
    pub fn new(
        name: &str,
        objects: &[&str],
        homs: &[(&str, &str, &str)],
        attrtypes: &[(&str, ValueKind)],
        attrs: &[(&str, &str, &str)],
    ) -> Result<Schema> {
        fn unique<'a>(kind: &str, names: impl Iterator<Item = &'a str>) -> Result<()> {
            let mut seen = std::collections::HashSet::new();
            for n in names {
                if !seen.insert(n) {
                    return Err(Error::Schema(format!("duplicate {kind} name `{n}`")));
                }
            }
            Ok(())
        }
        unique("object", objects.iter().copied())?;
        unique("attribute type", attrtypes.iter().map(|a| a.0))?;
        // Morphisms and attributes share the column namespace of their tables.
        unique("column", homs.iter().map(|h| h.0).chain(attrs.iter().map(|a| a.0)))?;

        let ob = |n: &str| {
            objects
                .iter()
                .position(|o| *o == n)
                .ok_or_else(|| Error::Schema(format!("undeclared object `{n}`")))
        };
        let homs = homs
            .iter()
            .map(|(n, d, c)| {
                Ok(Hom {
                    name: n.to_string(),
                    dom: ob(d)?,
                    cod: ob(c)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let attrs = attrs
            .iter()
            .map(|(n, d, t)| {
                let ty = attrtypes
                    .iter()
                    .position(|a| a.0 == *t)
                    .ok_or_else(|| Error::Schema(format!("undeclared attribute type `{t}`")))?;
                Ok(Attr {
                    name: n.to_string(),
                    dom: ob(d)?,
                    ty,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Schema {
            name: name.to_string(),
            objects: objects.iter().map(|s| s.to_string()).collect(),
            homs,
            attrtypes: attrtypes
                .iter()
                .map(|(n, k)| AttrType {
                    name: n.to_string(),
                    kind: *k,
                })
                .collect(),
            attrs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn homs(&self) -> &[Hom] {
        &self.homs
    }

    pub fn attrtypes(&self) -> &[AttrType] {
        &self.attrtypes
    }

    pub fn attrs(&self) -> &[Attr] {
        &self.attrs
    }

    pub fn ob_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn hom_index(&self, name: &str) -> Option<usize> {
        self.homs.iter().position(|h| h.name == name)
    }

    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a.name == name)
    }

    pub fn attr_kind(&self, attr: usize) -> ValueKind {
        self.attrtypes[self.attrs[attr].ty].kind
    }

    pub(crate) fn ob(&self, name: &str) -> Result<usize> {
        self.ob_index(name)
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    pub(crate) fn hom(&self, name: &str) -> Result<usize> {
        self.hom_index(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub(crate) fn attr(&self, name: &str) -> Result<usize> {
        self.attr_index(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Indices of morphisms out of `ob`, in declaration order.
    pub fn homs_from(&self, ob: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.homs.len()).filter(move |&h| self.homs[h].dom == ob)
    }

    /// Indices of attributes on `ob`, in declaration order.
    pub fn attrs_on(&self, ob: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.attrs.len()).filter(move |&a| self.attrs[a].dom == ob)
    }

    /// Objects ordered so that every morphism's codomain precedes its domain
    /// when the schema has no cycles; falls back to declaration order for
    /// objects on a cycle.
    pub fn codomain_first_order(&self) -> Vec<usize> {
        let n = self.objects.len();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n).find(|&o| {
                !placed[o]
                    && self
                        .homs_from(o)
                        .all(|h| placed[self.homs[h].cod] || self.homs[h].cod == o)
            });
            let o = next.unwrap_or_else(|| (0..n).find(|&o| !placed[o]).unwrap());
            placed[o] = true;
            order.push(o);
        }
        order
    }

    /// Whether `self` is a sub-presentation of `other`: every object,
    /// morphism (with dom/cod) and attribute (with dom/type) of `self` occurs
    /// in `other` under the same names.
    pub fn is_subschema_of(&self, other: &Schema) -> bool {
        self.objects.iter().all(|o| other.ob_index(o).is_some())
            && self.homs.iter().all(|h| {
                other.hom_index(&h.name).is_some_and(|j| {
                    let g = &other.homs[j];
                    other.objects[g.dom] == self.objects[h.dom]
                        && other.objects[g.cod] == self.objects[h.cod]
                })
            })
            && self.attrs.iter().all(|a| {
                other.attr_index(&a.name).is_some_and(|j| {
                    let b = &other.attrs[j];
                    other.objects[b.dom] == self.objects[a.dom]
                        && other.attrtypes[b.ty] == self.attrtypes[a.ty]
                })
            })
    }
}

/// A part of an instance: object name and 0-based index. Displays 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartId {
    pub object: String,
    pub index: usize,
}

impl PartId {
    pub fn new(object: impl Into<String>, index: usize) -> PartId {
        PartId {
            object: object.into(),
            index,
        }
    }

    /// 1-based row number as used in tables.
    pub fn number(&self) -> usize {
        self.index + 1
    }
}

impl fmt::Display for PartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.object, self.index + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    Unset,
    /// 1-based entry and the codomain's part count.
    OutOfRange { value: usize, max: usize },
}

/// One failed totality or range check. `row` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub table: String,
    pub column: String,
    pub row: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::Unset => {
                write!(f, "{}.{} row {}: unset", self.table, self.column, self.row)
            }
            ViolationKind::OutOfRange { value, max } => write!(
                f,
                "{}.{} row {}: entry {} out of range 1..{}",
                self.table, self.column, self.row, value, max
            ),
        }
    }
}

/// An instance of a schema, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct CSetInstance {
    schema: Arc<Schema>,
    nparts: Vec<usize>,
    subparts: Vec<Vec<Option<usize>>>,
    attrvals: Vec<Vec<Option<AttrValue>>>,
}

impl CSetInstance {
    pub fn new(schema: Arc<Schema>) -> CSetInstance {
        let nparts = vec![0; schema.objects.len()];
        let subparts = vec![Vec::new(); schema.homs.len()];
        let attrvals = vec![Vec::new(); schema.attrs.len()];
        CSetInstance {
            schema,
            nparts,
            subparts,
            attrvals,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<Schema> {
        &self.schema
    }

    /// Number of parts of the named object.
    ///
    /// Panics if the object is not in the schema; use [`Self::try_nparts`] for
    /// names that come from input.
    pub fn nparts(&self, object: &str) -> usize {
        self.try_nparts(object)
            .unwrap_or_else(|e| panic!("{e} in schema {}", self.schema.name))
    }

    pub fn try_nparts(&self, object: &str) -> Result<usize> {
        Ok(self.nparts[self.schema.ob(object)?])
    }

    /// Part count by object index.
    pub fn count(&self, ob: usize) -> usize {
        self.nparts[ob]
    }

    pub fn counts(&self) -> &[usize] {
        &self.nparts
    }

    pub fn is_empty(&self) -> bool {
        self.nparts.iter().all(|&n| n == 0)
    }

    /// Adds `n` parts to `object`, leaving their cells unset.
    pub fn add_parts(&mut self, object: &str, n: usize) -> Result<Vec<PartId>> {
        let ob = self.schema.ob(object)?;
        let start = self.add_parts_raw(ob, n);
        Ok((start..start + n).map(|i| PartId::new(object, i)).collect())
    }

    pub fn add_part(&mut self, object: &str) -> Result<PartId> {
        Ok(self.add_parts(object, 1)?.remove(0))
    }

    /// Index-based variant of [`Self::add_parts`]; returns the first new index.
    pub fn add_parts_raw(&mut self, ob: usize, n: usize) -> usize {
        let start = self.nparts[ob];
        self.nparts[ob] += n;
        for h in self.schema.homs_from(ob).collect::<Vec<_>>() {
            self.subparts[h].resize(start + n, None);
        }
        for a in self.schema.attrs_on(ob).collect::<Vec<_>>() {
            self.attrvals[a].resize(start + n, None);
        }
        start
    }

    fn check_part(&self, part: &PartId) -> Result<usize> {
        let ob = self.schema.ob(&part.object)?;
        if part.index >= self.nparts[ob] {
            return Err(Error::NoSuchPart(part.to_string()));
        }
        Ok(ob)
    }

    /// Sets the morphism cell `morphism(part) = value`.
    pub fn set_subpart(&mut self, part: &PartId, morphism: &str, value: &PartId) -> Result<()> {
        let h = self.schema.hom(morphism)?;
        let ob = self.check_part(part)?;
        let hom = &self.schema.homs[h];
        if hom.dom != ob {
            return Err(Error::DomainMismatch {
                column: morphism.to_string(),
                expected: self.schema.objects[hom.dom].clone(),
                found: part.object.clone(),
            });
        }
        if self.schema.objects[hom.cod] != value.object {
            return Err(Error::CodomainMismatch {
                column: morphism.to_string(),
                expected: self.schema.objects[hom.cod].clone(),
                found: value.object.clone(),
            });
        }
        self.check_part(value)?;
        self.subparts[h][part.index] = Some(value.index);
        Ok(())
    }

    /// Sets the attribute cell `attr(part) = value`.
    pub fn set_attr(&mut self, part: &PartId, attr: &str, value: AttrValue) -> Result<()> {
        let a = self.schema.attr(attr)?;
        let ob = self.check_part(part)?;
        let at = &self.schema.attrs[a];
        if at.dom != ob {
            return Err(Error::DomainMismatch {
                column: attr.to_string(),
                expected: self.schema.objects[at.dom].clone(),
                found: part.object.clone(),
            });
        }
        let kind = self.schema.attr_kind(a);
        if value.kind() != kind {
            return Err(Error::AttrTypeMismatch {
                attr: attr.to_string(),
                expected: kind.to_string(),
            });
        }
        self.attrvals[a][part.index] = Some(value);
        Ok(())
    }

    /// Raw cell write; no range check so that invalid instances can be
    /// represented (e.g. when loading untrusted files).
    pub fn set_subpart_raw(&mut self, hom: usize, row: usize, value: Option<usize>) {
        self.subparts[hom][row] = value;
    }

    pub fn set_attr_raw(&mut self, attr: usize, row: usize, value: Option<AttrValue>) {
        self.attrvals[attr][row] = value;
    }

    /// Morphism column by index.
    pub fn column(&self, hom: usize) -> &[Option<usize>] {
        &self.subparts[hom]
    }

    pub fn attr_column(&self, attr: usize) -> &[Option<AttrValue>] {
        &self.attrvals[attr]
    }

    /// Value of a morphism at a 0-based row of its domain. Panics on unknown
    /// names or unset cells; intended for validated instances.
    pub fn subpart(&self, row: usize, morphism: &str) -> usize {
        let h = self
            .schema
            .hom(morphism)
            .unwrap_or_else(|e| panic!("{e}"));
        self.subparts[h][row].unwrap_or_else(|| panic!("{morphism} row {} unset", row + 1))
    }

    pub fn try_subpart(&self, row: usize, morphism: &str) -> Result<Option<usize>> {
        let h = self.schema.hom(morphism)?;
        Ok(self.subparts[h].get(row).copied().flatten())
    }

    pub fn attr(&self, row: usize, attr: &str) -> Option<&AttrValue> {
        let a = self.schema.attr_index(attr)?;
        self.attrvals[a].get(row)?.as_ref()
    }

    /// Text attribute value, or `""` when absent.
    pub fn name_of(&self, row: usize, attr: &str) -> &str {
        self.attr(row, attr).and_then(AttrValue::as_text).unwrap_or("")
    }

    /// Rows of the domain of `morphism` that map to `target`.
    pub fn incident(&self, morphism: &str, target: usize) -> Vec<usize> {
        match self.schema.hom_index(morphism) {
            Some(h) => self.subparts[h]
                .iter()
                .enumerate()
                .filter(|(_, v)| **v == Some(target))
                .map(|(i, _)| i)
                .collect(),
            None => Vec::new(),
        }
    }

    /// First row of `object` whose text attribute `attr` equals `name`.
    pub fn find_by_name(&self, attr: &str, name: &str) -> Option<usize> {
        let a = self.schema.attr_index(attr)?;
        self.attrvals[a]
            .iter()
            .position(|v| v.as_ref().and_then(AttrValue::as_text) == Some(name))
    }

    /// Totality and range checks over every column.
    pub fn validate(&self) -> Vec<Violation> {
        let s = &self.schema;
        let mut out = Vec::new();
        for (h, hom) in s.homs.iter().enumerate() {
            let max = self.nparts[hom.cod];
            for (row, v) in self.subparts[h].iter().enumerate() {
                let kind = match v {
                    None => Some(ViolationKind::Unset),
                    Some(x) if *x >= max => Some(ViolationKind::OutOfRange {
                        value: x + 1,
                        max,
                    }),
                    _ => None,
                };
                if let Some(kind) = kind {
                    out.push(Violation {
                        table: s.objects[hom.dom].clone(),
                        column: hom.name.clone(),
                        row: row + 1,
                        kind,
                    });
                }
            }
        }
        for (a, attr) in s.attrs.iter().enumerate() {
            for (row, v) in self.attrvals[a].iter().enumerate() {
                if v.is_none() {
                    out.push(Violation {
                        table: s.objects[attr.dom].clone(),
                        column: attr.name.clone(),
                        row: row + 1,
                        kind: ViolationKind::Unset,
                    });
                }
            }
        }
        out
    }

    /// Errors with the first violation when the instance is not valid.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        match v.first() {
            None => Ok(()),
            Some(first) => Err(Error::Invalid {
                count: v.len(),
                first: first.to_string(),
            }),
        }
    }

    pub(crate) fn same_schema(&self, other: &CSetInstance) -> Result<()> {
        if Arc::ptr_eq(&self.schema, &other.schema) || *self.schema == *other.schema {
            Ok(())
        } else {
            Err(Error::SchemaMismatch {
                left: self.schema.name.clone(),
                right: other.schema.name.clone(),
            })
        }
    }

    /// Appends every part of `other` (same schema) to `self`, shifting its
    /// morphism entries. Returns the per-object offsets.
    pub(crate) fn append(&mut self, other: &CSetInstance) -> Vec<usize> {
        let offsets = self.nparts.clone();
        for ob in 0..self.nparts.len() {
            self.nparts[ob] += other.nparts[ob];
        }
        for (h, hom) in self.schema.homs.iter().enumerate() {
            let shift = offsets[hom.cod];
            self.subparts[h].extend(other.subparts[h].iter().map(|v| v.map(|x| x + shift)));
        }
        for a in 0..self.attrvals.len() {
            self.attrvals[a].extend(other.attrvals[a].iter().cloned());
        }
        offsets
    }

    /// Copies `other`'s parts and columns for objects/morphisms/attributes
    /// whose names occur in `self`'s schema. Used for schema inclusions.
    pub(crate) fn from_subschema(schema: Arc<Schema>, other: &CSetInstance) -> CSetInstance {
        let mut out = CSetInstance::new(schema);
        let sub = other.schema();
        for (ob, name) in sub.objects.iter().enumerate() {
            if let Some(o) = out.schema.ob_index(name) {
                out.add_parts_raw(o, other.nparts[ob]);
            }
        }
        for (h, hom) in sub.homs.iter().enumerate() {
            if let Some(j) = out.schema.hom_index(&hom.name) {
                out.subparts[j] = other.subparts[h].clone();
            }
        }
        for (a, attr) in sub.attrs.iter().enumerate() {
            if let Some(j) = out.schema.attr_index(&attr.name) {
                out.attrvals[j] = other.attrvals[a].clone();
            }
        }
        out
    }

    /// Restriction along a schema inclusion: keeps only objects/columns that
    /// `schema` declares.
    pub fn restrict(&self, schema: Arc<Schema>) -> CSetInstance {
        CSetInstance::from_subschema(schema, self)
    }

    /// Disjoint union with the two inclusion maps.
    pub fn coproduct(a: &CSetInstance, b: &CSetInstance) -> Result<(CSetInstance, Homomorphism, Homomorphism)> {
        a.same_schema(b)?;
        let mut sum = a.clone();
        let offsets = sum.append(b);
        let inj_a = Homomorphism::new((0..a.nparts.len()).map(|ob| (0..a.nparts[ob]).collect()).collect());
        let inj_b = Homomorphism::new(
            (0..b.nparts.len())
                .map(|ob| (0..b.nparts[ob]).map(|i| i + offsets[ob]).collect())
                .collect(),
        );
        Ok((sum, inj_a, inj_b))
    }

    /// Image of an instance under per-object index maps onto `counts` parts,
    /// where every target part has at least one preimage. Morphism and
    /// attribute cells of a target part are taken from its first preimage.
    pub(crate) fn quotient(&self, maps: &[Vec<usize>], counts: &[usize]) -> CSetInstance {
        let mut out = CSetInstance::new(self.schema.clone());
        for (ob, &n) in counts.iter().enumerate() {
            out.add_parts_raw(ob, n);
        }
        for (h, hom) in self.schema.homs.iter().enumerate() {
            for row in (0..self.nparts[hom.dom]).rev() {
                let v = self.subparts[h][row].map(|x| maps[hom.cod][x]);
                out.subparts[h][maps[hom.dom][row]] = v;
            }
        }
        for (a, attr) in self.schema.attrs.iter().enumerate() {
            for row in (0..self.nparts[attr.dom]).rev() {
                out.attrvals[a][maps[attr.dom][row]] = self.attrvals[a][row].clone();
            }
        }
        out
    }

    /// One table per object, columns in schema declaration order (outgoing
    /// morphisms, then attributes). Requires a valid instance.
    pub fn export_tables(&self) -> Result<Vec<Table>> {
        self.ensure_valid()?;
        let s = &self.schema;
        Ok((0..s.objects.len())
            .map(|ob| {
                let homs: Vec<usize> = s.homs_from(ob).collect();
                let attrs: Vec<usize> = s.attrs_on(ob).collect();
                let columns = homs
                    .iter()
                    .map(|&h| s.homs[h].name.clone())
                    .chain(attrs.iter().map(|&a| s.attrs[a].name.clone()))
                    .collect();
                let rows = (0..self.nparts[ob])
                    .map(|row| {
                        homs.iter()
                            .map(|&h| (self.subparts[h][row].unwrap() + 1).to_string())
                            .chain(
                                attrs
                                    .iter()
                                    .map(|&a| self.attrvals[a][row].as_ref().unwrap().to_string()),
                            )
                            .collect()
                    })
                    .collect();
                Table {
                    object: s.objects[ob].clone(),
                    columns,
                    rows,
                }
            })
            .collect())
    }

    /// Inverse of [`Self::export_tables`]. Tables may come in any order;
    /// objects without a table are empty. Columns are matched by name.
    pub fn import_tables(schema: Arc<Schema>, tables: &[Table]) -> Result<CSetInstance> {
        let mut inst = CSetInstance::new(schema.clone());
        for t in tables {
            let ob = schema.ob(&t.object)?;
            inst.add_parts_raw(ob, t.rows.len());
        }
        for t in tables {
            let ob = schema.ob(&t.object)?;
            for (c, col) in t.columns.iter().enumerate() {
                let cell = |row: &Vec<String>| -> Result<String> {
                    row.get(c)
                        .cloned()
                        .ok_or_else(|| Error::Parse(format!("{}: short row", t.object)))
                };
                if let Some(h) = schema.hom_index(col).filter(|&h| schema.homs[h].dom == ob) {
                    for (r, row) in t.rows.iter().enumerate() {
                        let v = cell(row)?;
                        let n: usize = v
                            .parse()
                            .map_err(|_| Error::Parse(format!("{}.{col}: `{v}` is not an index", t.object)))?;
                        if n == 0 {
                            return Err(Error::Parse(format!("{}.{col}: indices are 1-based", t.object)));
                        }
                        inst.subparts[h][r] = Some(n - 1);
                    }
                } else if let Some(a) = schema.attr_index(col).filter(|&a| schema.attrs[a].dom == ob) {
                    let kind = schema.attr_kind(a);
                    for (r, row) in t.rows.iter().enumerate() {
                        let v = cell(row)?;
                        let val = AttrValue::parse(kind, &v)
                            .ok_or_else(|| Error::Parse(format!("{}.{col}: `{v}` is not a {kind}", t.object)))?;
                        inst.attrvals[a][r] = Some(val);
                    }
                } else {
                    return Err(Error::Parse(format!("{}: unknown column `{col}`", t.object)));
                }
            }
        }
        Ok(inst)
    }
}

/// A structured table: the rows of one object with its outgoing columns.
/// Indices are rendered 1-based, signs as `+`/`-`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub object: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        if self.columns.is_empty() {
            // Column-less table: blank header, one blank line per row.
            return Ok("\n".repeat(self.rows.len() + 1));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_csv(object: &str, text: &str) -> Result<Table> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header.is_empty() {
            // Column-less table: one blank line per row.
            return Ok(Table {
                object: object.to_string(),
                columns: Vec::new(),
                rows: lines.map(|_| Vec::new()).collect(),
            });
        }
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Table {
            object: object.to_string(),
            columns,
            rows,
        })
    }
}

/// Writes `<object>.csv` for every object of the instance into `dir`.
pub fn write_tables_csv(inst: &CSetInstance, dir: &std::path::Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in inst.export_tables()? {
        let path = dir.join(format!("{}.csv", t.object));
        std::fs::write(&path, t.to_csv()?)?;
        written.push(path);
    }
    Ok(written)
}

/// Reads `<object>.csv` files from `dir`; missing files mean empty objects.
pub fn read_tables_csv(schema: Arc<Schema>, dir: &std::path::Path) -> Result<CSetInstance> {
    let mut tables = Vec::new();
    for ob in schema.objects() {
        let path = dir.join(format!("{ob}.csv"));
        if path.exists() {
            tables.push(Table::from_csv(ob, &std::fs::read_to_string(&path)?)?);
        }
    }
    CSetInstance::import_tables(schema, &tables)
}
