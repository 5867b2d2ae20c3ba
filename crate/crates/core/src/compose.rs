//! Open diagrams (structured cospans) and composition by pushout.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::cset::{CSetInstance, PartId, Schema};
use crate::error::{Error, Result};
use crate::hom::{find_homomorphisms, is_homomorphism, name_attrs, Homomorphism, Monic, SearchOptions, NAME_ATTRS};

/// An apex diagram with interface feet and injective legs `promote(foot) → apex`.
///
/// Legs are stored on the full schema: component `ob` of a leg is indexed by
/// the promoted foot's parts, and is empty for objects outside the interface.
#[derive(Debug, Clone)]
pub struct OpenDiagram {
    pub apex: CSetInstance,
    pub interface: Arc<Schema>,
    pub feet: Vec<CSetInstance>,
    pub legs: Vec<Homomorphism>,
}

/// Instance on the full schema with the foot's parts and columns; objects
/// outside the interface are empty.
pub fn promote(foot: &CSetInstance, full: Arc<Schema>) -> CSetInstance {
    CSetInstance::from_subschema(full, foot)
}

/// Carries a homomorphism between interface instances to the full schema.
pub fn promote_hom(h: &Homomorphism, interface: &Schema, full: &Schema) -> Homomorphism {
    Homomorphism::new(
        full.objects()
            .iter()
            .map(|o| match interface.ob_index(o) {
                Some(i) => h.component(i).to_vec(),
                None => Vec::new(),
            })
            .collect(),
    )
}

fn check_leg(foot: &CSetInstance, interface: &Arc<Schema>, apex: &CSetInstance, leg: &Homomorphism) -> Result<()> {
    if foot.schema() != interface.as_ref() {
        return Err(Error::SchemaMismatch {
            left: foot.schema().name().into(),
            right: interface.name().into(),
        });
    }
    foot.ensure_valid()?;
    let promoted = promote(foot, apex.schema_arc().clone());
    if !is_homomorphism(leg, &promoted, apex, &name_attrs())? {
        return Err(Error::NotHomomorphism("leg does not commute with the apex".into()));
    }
    if !leg.is_injective() {
        return Err(Error::NotHomomorphism("leg is not injective".into()));
    }
    Ok(())
}

impl OpenDiagram {
    pub fn new(
        apex: CSetInstance,
        interface: Arc<Schema>,
        feet: Vec<CSetInstance>,
        legs: Vec<Homomorphism>,
    ) -> Result<OpenDiagram> {
        if !interface.is_subschema_of(apex.schema()) {
            return Err(Error::SchemaMismatch {
                left: interface.name().into(),
                right: apex.schema().name().into(),
            });
        }
        if feet.len() != legs.len() {
            return Err(Error::NotHomomorphism(format!("{} feet but {} legs", feet.len(), legs.len())));
        }
        apex.ensure_valid()?;
        for (foot, leg) in feet.iter().zip(&legs) {
            check_leg(foot, &interface, &apex, leg)?;
        }
        Ok(OpenDiagram {
            apex,
            interface,
            feet,
            legs,
        })
    }

    /// A closed diagram: no feet.
    pub fn closed(apex: CSetInstance, interface: Arc<Schema>) -> Result<OpenDiagram> {
        OpenDiagram::new(apex, interface, Vec::new(), Vec::new())
    }

    /// The unit for composition along `foot`: apex `promote(foot)`, two
    /// copies of `foot` with identity legs.
    pub fn identity(foot: CSetInstance, full: Arc<Schema>) -> Result<OpenDiagram> {
        let interface = foot.schema_arc().clone();
        let apex = promote(&foot, full);
        let id = Homomorphism::identity(&apex);
        OpenDiagram::new(apex, interface, vec![foot.clone(), foot], vec![id.clone(), id])
    }

    /// Adds a foot cut out of the apex: the `seeds`, everything they reach
    /// through interface morphisms, and every interface part all of whose
    /// interface morphisms land in that selection.
    pub fn add_induced_foot(&mut self, seeds: &[PartId]) -> Result<usize> {
        let (foot, leg) = induced_foot(&self.apex, self.interface.clone(), seeds)?;
        self.feet.push(foot);
        self.legs.push(leg);
        Ok(self.feet.len() - 1)
    }
}

/// Foot selected from `apex` (see [`OpenDiagram::add_induced_foot`]) and its leg.
pub fn induced_foot(apex: &CSetInstance, interface: Arc<Schema>, seeds: &[PartId]) -> Result<(CSetInstance, Homomorphism)> {
    apex.ensure_valid()?;
    let full = apex.schema();
    let iface_obs: Vec<usize> = interface
        .objects()
        .iter()
        .map(|o| full.ob(o))
        .collect::<Result<_>>()?;
    let iface_homs: Vec<usize> = interface
        .homs()
        .iter()
        .map(|h| full.hom(&h.name))
        .collect::<Result<_>>()?;
    let mut selected: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); full.objects().len()];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for s in seeds {
        let ob = full.ob(&s.object)?;
        if !iface_obs.contains(&ob) {
            return Err(Error::UnknownObject(format!("{} (not in the interface)", s.object)));
        }
        if s.index >= apex.count(ob) {
            return Err(Error::NoSuchPart(s.to_string()));
        }
        stack.push((ob, s.index));
    }
    loop {
        while let Some((ob, x)) = stack.pop() {
            if !selected[ob].insert(x) {
                continue;
            }
            for &h in &iface_homs {
                let hom = &full.homs()[h];
                if hom.dom == ob {
                    stack.push((hom.cod, apex.column(h)[x].unwrap()));
                }
            }
        }
        for &ob in &iface_obs {
            let out: Vec<usize> = iface_homs.iter().copied().filter(|&h| full.homs()[h].dom == ob).collect();
            if out.is_empty() {
                continue;
            }
            for x in 0..apex.count(ob) {
                if !selected[ob].contains(&x)
                    && out.iter().all(|&h| selected[full.homs()[h].cod].contains(&apex.column(h)[x].unwrap()))
                {
                    stack.push((ob, x));
                }
            }
        }
        if stack.is_empty() {
            break;
        }
    }
    let maps: Vec<Vec<usize>> = selected.iter().map(|s| s.iter().copied().collect()).collect();
    let mut foot = CSetInstance::new(interface.clone());
    for (i, o) in interface.objects().iter().enumerate() {
        foot.add_parts_raw(i, maps[full.ob(o)?].len());
    }
    for (i, h) in interface.homs().iter().enumerate() {
        let fh = full.hom(&h.name)?;
        let (dom, cod) = (full.homs()[fh].dom, full.homs()[fh].cod);
        for (row, &x) in maps[dom].iter().enumerate() {
            let y = apex.column(fh)[x].unwrap();
            let pos = maps[cod].binary_search(&y).expect("closed under interface morphisms");
            foot.set_subpart_raw(i, row, Some(pos));
        }
    }
    for (i, a) in interface.attrs().iter().enumerate() {
        let fa = full.attr(&a.name)?;
        let dom = full.attrs()[fa].dom;
        for (row, &x) in maps[dom].iter().enumerate() {
            foot.set_attr_raw(i, row, apex.attr_column(fa)[x].clone());
        }
    }
    let leg = Homomorphism::new(
        full.objects()
            .iter()
            .enumerate()
            .map(|(ob, o)| if interface.ob_index(o).is_some() { maps[ob].clone() } else { Vec::new() })
            .collect(),
    );
    Ok((foot, leg))
}

/// Identity-by-index correspondence, if it is an isomorphism of the feet.
pub fn correspondence_by_index(left: &CSetInstance, right: &CSetInstance) -> Result<Homomorphism> {
    left.same_schema(right)?;
    let id = Homomorphism::identity(left);
    if left.counts() != right.counts() || !is_homomorphism(&id, left, right, &name_attrs())? {
        return Err(Error::NotHomomorphism("feet are not identical up to names".into()));
    }
    Ok(id)
}

/// Correspondence preserving every attribute including names: the first
/// isomorphism in search order.
pub fn correspondence_by_name(left: &CSetInstance, right: &CSetInstance) -> Result<Homomorphism> {
    left.same_schema(right)?;
    if left.counts() != right.counts() {
        return Err(Error::NotHomomorphism("feet have different part counts".into()));
    }
    let opts = SearchOptions {
        monic: Monic::All,
        ignore_attrs: BTreeSet::new(),
        pins: Vec::new(),
        max_matches: 1,
    };
    find_homomorphisms(left, right, &opts)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::NotHomomorphism("no name-preserving isomorphism between the feet".into()))
}

/// Two open diagrams, the feet to glue, and an isomorphism between those feet.
#[derive(Debug, Clone, Copy)]
pub struct GluingSpec<'a> {
    pub left: &'a OpenDiagram,
    pub left_foot: usize,
    pub right: &'a OpenDiagram,
    pub right_foot: usize,
    /// Interface-schema isomorphism from the left foot to the right foot.
    pub correspondence: &'a Homomorphism,
}

#[derive(Debug, Clone)]
pub struct PushoutResult {
    pub composite: CSetInstance,
    pub inj_left: Homomorphism,
    pub inj_right: Homomorphism,
    pub warnings: Vec<String>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Roots are always the smallest member of their class.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn check_gluing<'a>(spec: &GluingSpec<'a>) -> Result<(&'a CSetInstance, &'a CSetInstance)> {
    let (l, r) = (spec.left, spec.right);
    l.apex.same_schema(&r.apex)?;
    if l.interface != r.interface {
        return Err(Error::SchemaMismatch {
            left: l.interface.name().into(),
            right: r.interface.name().into(),
        });
    }
    let lf = l
        .feet
        .get(spec.left_foot)
        .ok_or_else(|| Error::NoSuchPart(format!("left foot {}", spec.left_foot + 1)))?;
    let rf = r
        .feet
        .get(spec.right_foot)
        .ok_or_else(|| Error::NoSuchPart(format!("right foot {}", spec.right_foot + 1)))?;
    let c = spec.correspondence;
    if !is_homomorphism(c, lf, rf, &name_attrs())? || !c.is_injective() || !c.is_surjective_onto(rf) {
        return Err(Error::NotHomomorphism("correspondence is not an isomorphism of the feet".into()));
    }
    Ok((lf, rf))
}

/// Glues the two apexes along the chosen feet.
///
/// Parts of the composite are the classes of the coproduct under the
/// identification `leg_left(b) ~ leg_right(c(b))`, numbered in order of their
/// smallest member. A merged part keeps the left name; discarded right names
/// are reported as warnings. Other attributes must agree.
pub fn pushout(spec: &GluingSpec) -> Result<PushoutResult> {
    let (lf, _) = check_gluing(spec)?;
    let (x, y) = (&spec.left.apex, &spec.right.apex);
    let schema = x.schema();
    let iface = &spec.left.interface;
    let (sum, inj_x, inj_y) = CSetInstance::coproduct(x, y)?;

    let mut uf: Vec<UnionFind> = sum.counts().iter().map(|&n| UnionFind::new(n)).collect();
    let leg_l = &spec.left.legs[spec.left_foot];
    let leg_r = &spec.right.legs[spec.right_foot];
    for (fi, o) in iface.objects().iter().enumerate() {
        let ob = schema.ob(o)?;
        for b in 0..lf.count(fi) {
            let xl = inj_x.apply(ob, leg_l.apply(ob, b));
            let yr = inj_y.apply(ob, leg_r.apply(ob, spec.correspondence.apply(fi, b)));
            uf[ob].union(xl, yr);
        }
    }

    let mut maps: Vec<Vec<usize>> = Vec::with_capacity(uf.len());
    let mut counts = Vec::with_capacity(uf.len());
    for (ob, u) in uf.iter_mut().enumerate() {
        let n = sum.count(ob);
        let mut class_of_root = vec![usize::MAX; n];
        let mut map = vec![0; n];
        let mut next = 0;
        for p in 0..n {
            let r = u.find(p);
            if class_of_root[r] == usize::MAX {
                class_of_root[r] = next;
                next += 1;
            }
            map[p] = class_of_root[r];
        }
        maps.push(map);
        counts.push(next);
    }

    for (h, hom) in schema.homs().iter().enumerate() {
        let mut image = vec![None; counts[hom.dom]];
        for p in 0..sum.count(hom.dom) {
            let t = maps[hom.cod][sum.column(h)[p].unwrap()];
            match image[maps[hom.dom][p]] {
                None => image[maps[hom.dom][p]] = Some(t),
                Some(prev) if prev != t => {
                    return Err(Error::NotHomomorphism(format!(
                        "gluing identifies parts with different `{}`",
                        hom.name
                    )))
                }
                _ => {}
            }
        }
    }

    let mut warnings = Vec::new();
    for (a, attr) in schema.attrs().iter().enumerate() {
        let is_name = NAME_ATTRS.contains(&attr.name.as_str());
        let mut first: Vec<Option<usize>> = vec![None; counts[attr.dom]];
        for p in 0..sum.count(attr.dom) {
            let class = maps[attr.dom][p];
            let Some(q) = first[class] else {
                first[class] = Some(p);
                continue;
            };
            let (kept, other) = (&sum.attr_column(a)[q], &sum.attr_column(a)[p]);
            if kept == other {
                continue;
            }
            let show = |v: &Option<crate::cset::AttrValue>| v.as_ref().map(|v| v.to_string()).unwrap_or_default();
            let part = PartId::new(schema.objects()[attr.dom].clone(), class).to_string();
            if is_name {
                warnings.push(format!(
                    "merged part {part}: {} `{}` kept, `{}` discarded",
                    attr.name,
                    show(kept),
                    show(other)
                ));
            } else {
                return Err(Error::AttrConflict {
                    part,
                    attr: attr.name.clone(),
                    left: show(kept),
                    right: show(other),
                });
            }
        }
    }

    let composite = sum.quotient(&maps, &counts);
    let inj_left = inj_x.then(&Homomorphism::new(maps.clone()));
    let inj_right = inj_y.then(&Homomorphism::new(maps));
    Ok(PushoutResult {
        composite,
        inj_left,
        inj_right,
        warnings,
    })
}

/// Composes two open diagrams along one foot each. The remaining feet of the
/// left operand come first, then those of the right, with legs post-composed
/// by the pushout injections.
pub fn compose_open(
    left: &OpenDiagram,
    right: &OpenDiagram,
    left_foot: usize,
    right_foot: usize,
    correspondence: &Homomorphism,
) -> Result<(OpenDiagram, Vec<String>)> {
    let spec = GluingSpec {
        left,
        left_foot,
        right,
        right_foot,
        correspondence,
    };
    let po = pushout(&spec)?;
    let mut feet = Vec::new();
    let mut legs = Vec::new();
    for (i, (f, l)) in left.feet.iter().zip(&left.legs).enumerate() {
        if i != left_foot {
            feet.push(f.clone());
            legs.push(l.then(&po.inj_left));
        }
    }
    for (i, (f, l)) in right.feet.iter().zip(&right.legs).enumerate() {
        if i != right_foot {
            feet.push(f.clone());
            legs.push(l.then(&po.inj_right));
        }
    }
    let open = OpenDiagram::new(po.composite, left.interface.clone(), feet, legs)?;
    Ok((open, po.warnings))
}
