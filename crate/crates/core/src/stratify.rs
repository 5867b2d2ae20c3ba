//! Stratification: the pullback of two diagrams typed over a common type diagram.

use std::collections::HashMap;

use crate::cset::{AttrValue, CSetInstance};
use crate::error::{Error, Result};
use crate::hom::{assign_types, is_homomorphism, name_attrs, Homomorphism, SearchOptions, NAME_ATTRS};

/// A diagram with a typing homomorphism into a type diagram (names ignored).
#[derive(Debug, Clone)]
pub struct TypedDiagram {
    pub diagram: CSetInstance,
    pub type_diagram: CSetInstance,
    pub typing: Homomorphism,
}

impl TypedDiagram {
    pub fn new(diagram: CSetInstance, type_diagram: CSetInstance, typing: Homomorphism) -> Result<TypedDiagram> {
        if !is_homomorphism(&typing, &diagram, &type_diagram, &name_attrs())? {
            return Err(Error::NotHomomorphism("typing does not commute with the type diagram".into()));
        }
        Ok(TypedDiagram {
            diagram,
            type_diagram,
            typing,
        })
    }

    /// Types `diagram` by search. Fails when there is no typing or more than one.
    pub fn auto(diagram: CSetInstance, type_diagram: CSetInstance) -> Result<TypedDiagram> {
        let t = assign_types(&diagram, &type_diagram, &SearchOptions::typing())?;
        if !t.is_unique() {
            return Err(Error::AmbiguousTyping(t.candidates));
        }
        Ok(TypedDiagram {
            diagram,
            type_diagram,
            typing: t.typing,
        })
    }

    /// A type diagram typed over itself by the identity.
    pub fn identity(type_diagram: CSetInstance) -> Result<TypedDiagram> {
        let id = Homomorphism::identity(&type_diagram);
        TypedDiagram::new(type_diagram.clone(), type_diagram, id)
    }
}

#[derive(Debug, Clone)]
pub struct PullbackResult {
    pub stratified: CSetInstance,
    /// Projection onto the aggregate diagram.
    pub p1: Homomorphism,
    /// Projection onto the strata diagram.
    pub p2: Homomorphism,
}

/// Fiber product of two typed diagrams.
///
/// Parts of object `X` are the pairs `(a, s)` with equal types, ordered by
/// `a` then `s`. Name attributes are joined as `a_s`; every other attribute
/// must agree between the coordinates.
pub fn pullback(agg: &TypedDiagram, strata: &TypedDiagram) -> Result<PullbackResult> {
    if agg.type_diagram != strata.type_diagram {
        return Err(Error::SchemaMismatch {
            left: "aggregate type diagram".into(),
            right: "strata type diagram".into(),
        });
    }
    for t in [agg, strata] {
        if !is_homomorphism(&t.typing, &t.diagram, &t.type_diagram, &name_attrs())? {
            return Err(Error::NotHomomorphism("typing does not commute with the type diagram".into()));
        }
    }
    let (a, s) = (&agg.diagram, &strata.diagram);
    let schema = a.schema_arc().clone();
    let nobs = schema.objects().len();

    let mut pairs: Vec<Vec<(usize, usize)>> = Vec::with_capacity(nobs);
    let mut index: Vec<HashMap<(usize, usize), usize>> = Vec::with_capacity(nobs);
    for ob in 0..nobs {
        let mut by_type: HashMap<usize, Vec<usize>> = HashMap::new();
        for j in 0..s.count(ob) {
            by_type.entry(strata.typing.apply(ob, j)).or_default().push(j);
        }
        let mut ps = Vec::new();
        for i in 0..a.count(ob) {
            if let Some(js) = by_type.get(&agg.typing.apply(ob, i)) {
                ps.extend(js.iter().map(|&j| (i, j)));
            }
        }
        index.push(ps.iter().enumerate().map(|(k, &p)| (p, k)).collect());
        pairs.push(ps);
    }

    let mut out = CSetInstance::new(schema.clone());
    for (ob, ps) in pairs.iter().enumerate() {
        out.add_parts_raw(ob, ps.len());
    }
    for (h, hom) in schema.homs().iter().enumerate() {
        for (k, &(i, j)) in pairs[hom.dom].iter().enumerate() {
            let key = (a.column(h)[i].unwrap(), s.column(h)[j].unwrap());
            out.set_subpart_raw(h, k, Some(index[hom.cod][&key]));
        }
    }
    for (at, attr) in schema.attrs().iter().enumerate() {
        let is_name = NAME_ATTRS.contains(&attr.name.as_str());
        for (k, &(i, j)) in pairs[attr.dom].iter().enumerate() {
            let (x, y) = (&a.attr_column(at)[i], &s.attr_column(at)[j]);
            let v = if is_name {
                let text = |v: &Option<AttrValue>| v.as_ref().and_then(AttrValue::as_text).unwrap_or("").to_string();
                Some(AttrValue::Text(format!("{}_{}", text(x), text(y))))
            } else if x == y {
                x.clone()
            } else {
                let show = |v: &Option<AttrValue>| v.as_ref().map(|v| v.to_string()).unwrap_or_default();
                return Err(Error::AttrConflict {
                    part: format!("{}#{}", schema.objects()[attr.dom], k + 1),
                    attr: attr.name.clone(),
                    left: show(x),
                    right: show(y),
                });
            };
            out.set_attr_raw(at, k, v);
        }
    }
    let p1 = Homomorphism::new(pairs.iter().map(|ps| ps.iter().map(|p| p.0).collect()).collect());
    let p2 = Homomorphism::new(pairs.iter().map(|ps| ps.iter().map(|p| p.1).collect()).collect());
    Ok(PullbackResult {
        stratified: out,
        p1,
        p2,
    })
}

/// Whether both projections are homomorphisms (names ignored) and the square
/// `t_agg ∘ p1 = t_strata ∘ p2` commutes.
pub fn check_square(result: &PullbackResult, agg: &TypedDiagram, strata: &TypedDiagram) -> bool {
    let ignore = name_attrs();
    let homs_ok = matches!(is_homomorphism(&result.p1, &result.stratified, &agg.diagram, &ignore), Ok(true))
        && matches!(is_homomorphism(&result.p2, &result.stratified, &strata.diagram, &ignore), Ok(true));
    homs_ok && result.p1.then(&agg.typing) == result.p2.then(&strata.typing)
}
