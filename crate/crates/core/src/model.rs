//! The JSON model file format.
//!
//! ```json
//! { "format_version": 1, "kind": "sfd", "body": { "S": [{"sname": "S"}], ... } }
//! ```
//!
//! A diagram body maps every object to an array of rows; each row maps the
//! object's outgoing morphisms (1-based indices) and attributes to values.
//! Open diagrams nest an `apex`, their `feet` and `legs`; a typing lists
//! per-object components; a scenario holds the numeric binding.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Number, Value};

use crate::compose::OpenDiagram;
use crate::cset::{AttrValue, CSetInstance, Operator, Schema, Sign, ValueKind};
use crate::error::{Error, Result};
use crate::hom::Homomorphism;
use crate::ode::Scenario;
use crate::schemas::DiagramKind;
use crate::translate::MigrationWitness;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Cld,
    Ssd,
    Sfd,
    OpenCld,
    OpenSsd,
    OpenSfd,
    Typing,
    Scenario,
}

impl ModelKind {
    pub fn diagram(kind: DiagramKind) -> ModelKind {
        match kind {
            DiagramKind::Cld => ModelKind::Cld,
            DiagramKind::Ssd => ModelKind::Ssd,
            DiagramKind::Sfd => ModelKind::Sfd,
        }
    }

    pub fn open(kind: DiagramKind) -> ModelKind {
        match kind {
            DiagramKind::Cld => ModelKind::OpenCld,
            DiagramKind::Ssd => ModelKind::OpenSsd,
            DiagramKind::Sfd => ModelKind::OpenSfd,
        }
    }

    /// Diagram kind of a closed or open diagram model.
    pub fn diagram_kind(self) -> Option<DiagramKind> {
        match self {
            ModelKind::Cld | ModelKind::OpenCld => Some(DiagramKind::Cld),
            ModelKind::Ssd | ModelKind::OpenSsd => Some(DiagramKind::Ssd),
            ModelKind::Sfd | ModelKind::OpenSfd => Some(DiagramKind::Sfd),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Cld => "cld",
            ModelKind::Ssd => "ssd",
            ModelKind::Sfd => "sfd",
            ModelKind::OpenCld => "open-cld",
            ModelKind::OpenSsd => "open-ssd",
            ModelKind::OpenSfd => "open-sfd",
            ModelKind::Typing => "typing",
            ModelKind::Scenario => "scenario",
        }
    }
}

/// The on-disk envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u64,
    pub kind: ModelKind,
    pub body: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Value>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<ModelFile> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<ModelFile> {
        let text = std::fs::read_to_string(path)?;
        ModelFile::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model files serialize");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// Per-object index maps keyed by object name, as stored in typing files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedComponents(pub Vec<(String, Vec<usize>)>);

impl NamedComponents {
    pub fn of(h: &Homomorphism, schema: &Schema) -> NamedComponents {
        NamedComponents(
            schema
                .objects()
                .iter()
                .zip(h.components())
                .map(|(o, c)| (o.clone(), c.clone()))
                .collect(),
        )
    }

    /// Homomorphism on `schema`; objects not listed get empty components.
    pub fn to_hom(&self, schema: &Schema) -> Result<Homomorphism> {
        let mut comps = vec![Vec::new(); schema.objects().len()];
        for (o, c) in &self.0 {
            comps[schema.ob(o)?] = c.clone();
        }
        Ok(Homomorphism::new(comps))
    }
}

/// A decoded model file.
#[derive(Debug, Clone)]
pub enum Model {
    Diagram(DiagramKind, CSetInstance),
    Open(DiagramKind, OpenDiagram),
    Typing(NamedComponents),
    Scenario(Scenario),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Diagram(k, _) => ModelKind::diagram(*k),
            Model::Open(k, _) => ModelKind::open(*k),
            Model::Typing(_) => ModelKind::Typing,
            Model::Scenario(_) => ModelKind::Scenario,
        }
    }

    pub fn from_file(file: &ModelFile) -> Result<Model> {
        match file.kind {
            ModelKind::Typing => Ok(Model::Typing(components_from_json(&file.body)?)),
            ModelKind::Scenario => Ok(Model::Scenario(serde_json::from_value(file.body.clone())?)),
            k if matches!(k, ModelKind::Cld | ModelKind::Ssd | ModelKind::Sfd) => {
                let dk = k.diagram_kind().unwrap();
                Ok(Model::Diagram(dk, instance_from_json(dk.schema(), &file.body)?))
            }
            k => {
                let dk = k.diagram_kind().unwrap();
                Ok(Model::Open(dk, open_from_json(dk, &file.body)?))
            }
        }
    }

    pub fn to_file(&self, provenance: Option<Value>) -> Result<ModelFile> {
        let body = match self {
            Model::Diagram(_, inst) => instance_to_json(inst),
            Model::Open(_, open) => open_to_json(open),
            Model::Typing(c) => components_to_json(c),
            Model::Scenario(s) => serde_json::to_value(s)?,
        };
        Ok(ModelFile {
            format_version: FORMAT_VERSION,
            kind: self.kind(),
            body,
            provenance,
        })
    }

    pub fn load(path: &Path) -> Result<Model> {
        Model::from_file(&ModelFile::load(path)?)
    }

    /// The closed diagram, or the apex of an open one.
    pub fn diagram(&self) -> Option<(DiagramKind, &CSetInstance)> {
        match self {
            Model::Diagram(k, d) => Some((*k, d)),
            Model::Open(k, o) => Some((*k, &o.apex)),
            _ => None,
        }
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn value_to_json(v: &AttrValue) -> Value {
    match v {
        AttrValue::Text(s) => Value::String(s.clone()),
        AttrValue::Sign(s) => Value::String(s.symbol().into()),
        AttrValue::Op(Operator::Literal(x)) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
        AttrValue::Op(op) => Value::String(op.symbol()),
        AttrValue::Int(i) => Value::from(*i),
        AttrValue::Real(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
    }
}

fn value_from_json(kind: ValueKind, v: &Value) -> Option<AttrValue> {
    match (kind, v) {
        (ValueKind::Text, Value::String(s)) => Some(AttrValue::Text(s.clone())),
        (ValueKind::Sign, Value::String(s)) => Sign::parse(s).map(AttrValue::Sign),
        (ValueKind::Op, Value::String(s)) => match s.as_str() {
            "+" | "-" | "*" | "/" => Operator::parse(s).map(AttrValue::Op),
            _ => None,
        },
        (ValueKind::Op, Value::Number(n)) => n.as_f64().map(|x| AttrValue::Op(Operator::Literal(x))),
        (ValueKind::Int, Value::Number(n)) => n.as_i64().map(AttrValue::Int),
        (ValueKind::Real, Value::Number(n)) => n.as_f64().map(AttrValue::Real),
        _ => None,
    }
}

/// Table encoding of an instance. Unset cells are omitted.
pub fn instance_to_json(inst: &CSetInstance) -> Value {
    let s = inst.schema();
    let mut body = Map::new();
    for (ob, name) in s.objects().iter().enumerate() {
        let homs: Vec<usize> = s.homs_from(ob).collect();
        let attrs: Vec<usize> = s.attrs_on(ob).collect();
        let rows = (0..inst.count(ob))
            .map(|r| {
                let mut row = Map::new();
                for &h in &homs {
                    if let Some(x) = inst.column(h)[r] {
                        row.insert(s.homs()[h].name.clone(), Value::from(x + 1));
                    }
                }
                for &a in &attrs {
                    if let Some(v) = &inst.attr_column(a)[r] {
                        row.insert(s.attrs()[a].name.clone(), value_to_json(v));
                    }
                }
                Value::Object(row)
            })
            .collect();
        body.insert(name.clone(), Value::Array(rows));
    }
    Value::Object(body)
}

/// Inverse of [`instance_to_json`]. Missing objects are empty and missing
/// cells stay unset (reported by validation); unknown objects or columns and
/// zero indices are parse errors.
pub fn instance_from_json(schema: Arc<Schema>, body: &Value) -> Result<CSetInstance> {
    let obj = body.as_object().ok_or_else(|| parse_err("diagram body must be an object"))?;
    let mut inst = CSetInstance::new(schema.clone());
    for (name, rows) in obj {
        let ob = schema
            .ob_index(name)
            .ok_or_else(|| parse_err(format!("unknown object `{name}` for {}", schema.name())))?;
        let rows = rows.as_array().ok_or_else(|| parse_err(format!("`{name}` must be an array")))?;
        inst.add_parts_raw(ob, rows.len());
    }
    for (name, rows) in obj {
        let ob = schema.ob_index(name).unwrap();
        for (r, row) in rows.as_array().unwrap().iter().enumerate() {
            let row = row
                .as_object()
                .ok_or_else(|| parse_err(format!("{name} row {}: must be an object", r + 1)))?;
            for (col, v) in row {
                let at = format!("{name} row {}, `{col}`", r + 1);
                if let Some(h) = schema.hom_index(col).filter(|&h| schema.homs()[h].dom == ob) {
                    let n = v
                        .as_u64()
                        .ok_or_else(|| parse_err(format!("{at}: expected a positive index")))?;
                    if n == 0 {
                        return Err(parse_err(format!("{at}: indices are 1-based")));
                    }
                    inst.set_subpart_raw(h, r, Some(n as usize - 1));
                } else if let Some(a) = schema.attr_index(col).filter(|&a| schema.attrs()[a].dom == ob) {
                    let kind = schema.attr_kind(a);
                    let val =
                        value_from_json(kind, v).ok_or_else(|| parse_err(format!("{at}: expected a {kind} value")))?;
                    inst.set_attr_raw(a, r, Some(val));
                } else {
                    return Err(parse_err(format!("{at}: unknown column")));
                }
            }
        }
    }
    Ok(inst)
}

fn components_to_json(c: &NamedComponents) -> Value {
    let mut m = Map::new();
    for (o, comp) in &c.0 {
        m.insert(o.clone(), comp.iter().map(|&x| Value::from(x + 1)).collect());
    }
    json!({ "components": Value::Object(m) })
}

fn indices_from_json(v: &Value, what: &str) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| parse_err(format!("{what}: expected an array of indices")))?
        .iter()
        .map(|x| match x.as_u64() {
            Some(n) if n >= 1 => Ok(n as usize - 1),
            _ => Err(parse_err(format!("{what}: indices are positive integers"))),
        })
        .collect()
}

fn components_from_json(body: &Value) -> Result<NamedComponents> {
    let obj = body.as_object().ok_or_else(|| parse_err("typing body must be an object"))?;
    if let Some(k) = obj.keys().find(|k| *k != "components") {
        return Err(parse_err(format!("typing: unknown key `{k}`")));
    }
    let comps = obj
        .get("components")
        .and_then(Value::as_object)
        .ok_or_else(|| parse_err("typing: missing `components` object"))?;
    Ok(NamedComponents(
        comps
            .iter()
            .map(|(o, v)| Ok((o.clone(), indices_from_json(v, o)?)))
            .collect::<Result<_>>()?,
    ))
}

fn leg_to_json(leg: &Homomorphism, open: &OpenDiagram) -> Value {
    let full = open.apex.schema();
    let mut m = Map::new();
    for o in open.interface.objects() {
        let ob = full.ob_index(o).expect("interface objects exist in the apex schema");
        m.insert(o.clone(), leg.component(ob).iter().map(|&x| Value::from(x + 1)).collect());
    }
    Value::Object(m)
}

fn open_to_json(open: &OpenDiagram) -> Value {
    json!({
        "apex": instance_to_json(&open.apex),
        "feet": open.feet.iter().map(instance_to_json).collect::<Vec<_>>(),
        "legs": open.legs.iter().map(|l| leg_to_json(l, open)).collect::<Vec<_>>(),
    })
}

fn open_from_json(kind: DiagramKind, body: &Value) -> Result<OpenDiagram> {
    let obj = body.as_object().ok_or_else(|| parse_err("open diagram body must be an object"))?;
    if let Some(k) = obj.keys().find(|k| !matches!(k.as_str(), "apex" | "feet" | "legs")) {
        return Err(parse_err(format!("open diagram: unknown key `{k}`")));
    }
    let full = kind.schema();
    let iface = kind.interface_schema();
    let apex = instance_from_json(full.clone(), obj.get("apex").ok_or_else(|| parse_err("missing `apex`"))?)?;
    let empty = Value::Array(Vec::new());
    let feet = obj
        .get("feet")
        .unwrap_or(&empty)
        .as_array()
        .ok_or_else(|| parse_err("`feet` must be an array"))?
        .iter()
        .map(|f| instance_from_json(iface.clone(), f))
        .collect::<Result<Vec<_>>>()?;
    let legs = obj
        .get("legs")
        .unwrap_or(&empty)
        .as_array()
        .ok_or_else(|| parse_err("`legs` must be an array"))?
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let m = l.as_object().ok_or_else(|| parse_err(format!("leg {} must be an object", i + 1)))?;
            let mut comps = vec![Vec::new(); full.objects().len()];
            for (o, v) in m {
                if iface.ob_index(o).is_none() {
                    return Err(parse_err(format!("leg {}: `{o}` is not an interface object", i + 1)));
                }
                comps[full.ob(o)?] = indices_from_json(v, o)?;
            }
            Ok(Homomorphism::new(comps))
        })
        .collect::<Result<Vec<_>>>()?;
    for (i, (f, l)) in feet.iter().zip(&legs).enumerate() {
        for o in iface.objects() {
            let (fo, ob) = (iface.ob(o)?, full.ob(o)?);
            if l.component(ob).len() != f.count(fo) {
                return Err(parse_err(format!(
                    "leg {}: `{o}` lists {} indices for {} foot parts",
                    i + 1,
                    l.component(ob).len(),
                    f.count(fo)
                )));
            }
        }
    }
    if feet.iter().chain(std::iter::once(&apex)).any(|i| !i.validate().is_empty()) {
        // Structural problems are domain errors reported by validation.
        let bad = std::iter::once(&apex).chain(&feet).find(|i| !i.validate().is_empty()).unwrap();
        bad.ensure_valid()?;
    }
    OpenDiagram::new(apex, iface, feet, legs)
}

/// Provenance block describing where each translated CLD part came from
/// (1-based rows).
pub fn witness_to_json(w: &MigrationWitness) -> Value {
    let origin = |o: &crate::translate::Origin| json!({ "table": o.table, "row": o.row + 1 });
    json!({
        "vertices": w.vertices.iter().map(origin).collect::<Vec<_>>(),
        "links": w.links.iter().map(origin).collect::<Vec<_>>(),
        "flow_vertices": w.flow_vertices.iter().map(|v| v + 1).collect::<Vec<_>>(),
    })
}
