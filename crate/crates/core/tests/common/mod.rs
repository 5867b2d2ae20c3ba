#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use catflow::cset::{AttrValue, CSetInstance, Operator, Schema, Sign, ValueKind};
use catflow::hom::{is_homomorphism, Homomorphism, NAME_ATTRS};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn names() -> BTreeSet<String> {
    NAME_ATTRS.iter().map(|s| s.to_string()).collect()
}

pub fn random_value<R: Rng>(kind: ValueKind, rng: &mut R) -> AttrValue {
    match kind {
        ValueKind::Text => AttrValue::text(*["a", "b", "c"].choose(rng).unwrap()),
        ValueKind::Sign => AttrValue::Sign(if rng.random_bool(0.5) { Sign::Pos } else { Sign::Neg }),
        ValueKind::Op => AttrValue::Op(*[Operator::Add, Operator::Mul, Operator::Div].choose(rng).unwrap()),
        ValueKind::Int => AttrValue::Int(rng.random_range(1..=2)),
        ValueKind::Real => AttrValue::Real(*[0.5, 1.0].choose(rng).unwrap()),
    }
}

/// Random valid instance with at most `max_parts` parts per object. Objects
/// are filled codomains first so every morphism column has a target; an
/// object whose codomain came out empty gets no parts.
pub fn random_instance<R: Rng>(schema: Arc<Schema>, max_parts: usize, rng: &mut R) -> CSetInstance {
    random_instance_with(schema, max_parts, false, rng)
}

/// Like [`random_instance`]; with `uniform`, every non-name attribute takes
/// one fixed value per type so that maps between instances are plentiful.
pub fn random_instance_with<R: Rng>(schema: Arc<Schema>, max_parts: usize, uniform: bool, rng: &mut R) -> CSetInstance {
    let names = names();
    let mut inst = CSetInstance::new(schema.clone());
    for ob in schema.codomain_first_order() {
        let blocked = schema.homs_from(ob).any(|h| inst.count(schema.homs()[h].cod) == 0);
        let n = if blocked { 0 } else { rng.random_range(0..=max_parts) };
        inst.add_parts_raw(ob, n);
        for h in schema.homs_from(ob) {
            let cod = inst.count(schema.homs()[h].cod);
            for r in 0..n {
                inst.set_subpart_raw(h, r, Some(rng.random_range(0..cod)));
            }
        }
        for a in schema.attrs_on(ob) {
            for r in 0..n {
                inst.set_attr_raw(a, r, Some(attr_value(&schema, a, uniform, &names, rng)));
            }
        }
    }
    inst
}

pub fn attr_value<R: Rng>(schema: &Schema, a: usize, uniform: bool, names: &BTreeSet<String>, rng: &mut R) -> AttrValue {
    let kind = schema.attr_kind(a);
    if uniform && !names.contains(&schema.attrs()[a].name) {
        match kind {
            ValueKind::Text => AttrValue::text("a"),
            ValueKind::Sign => AttrValue::Sign(Sign::Pos),
            ValueKind::Op => AttrValue::Op(Operator::Mul),
            ValueKind::Int => AttrValue::Int(1),
            ValueKind::Real => AttrValue::Real(1.0),
        }
    } else {
        random_value(kind, rng)
    }
}

/// Random instance typed over `ty`: every part picks a type, morphisms land
/// in the fiber over the type's image, non-name attributes copy the type's.
pub fn random_typed<R: Rng>(ty: &CSetInstance, max_parts: usize, rng: &mut R) -> (CSetInstance, Homomorphism) {
    let schema = ty.schema_arc().clone();
    let ignore = names();
    let mut inst = CSetInstance::new(schema.clone());
    let mut types: Vec<Vec<usize>> = vec![Vec::new(); schema.objects().len()];
    for ob in schema.codomain_first_order() {
        let feasible: Vec<usize> = (0..ty.count(ob))
            .filter(|&t| {
                schema.homs_from(ob).all(|h| {
                    let hom = &schema.homs()[h];
                    let img = ty.column(h)[t].unwrap();
                    types[hom.cod].contains(&img)
                })
            })
            .collect();
        let n = if feasible.is_empty() { 0 } else { rng.random_range(0..=max_parts) };
        let start = inst.add_parts_raw(ob, n);
        for r in start..start + n {
            let t = *feasible.choose(rng).unwrap();
            types[ob].push(t);
            for h in schema.homs_from(ob) {
                let hom = &schema.homs()[h];
                let img = ty.column(h)[t].unwrap();
                let fiber: Vec<usize> = (0..types[hom.cod].len()).filter(|&x| types[hom.cod][x] == img).collect();
                inst.set_subpart_raw(h, r, Some(*fiber.choose(rng).unwrap()));
            }
            for a in schema.attrs_on(ob) {
                let attr = &schema.attrs()[a];
                let v = if ignore.contains(&attr.name) {
                    random_value(schema.attr_kind(a), rng)
                } else {
                    ty.attr_column(a)[t].clone().unwrap()
                };
                inst.set_attr_raw(a, r, Some(v));
            }
        }
    }
    (inst, Homomorphism::new(types))
}

/// Enumerates every homomorphism by assigning parts one at a time in
/// declaration order, rejecting an assignment as soon as a morphism or
/// attribute constraint between already assigned parts fails. `allowed`
/// can veto individual images. Returns `None` once more than `budget`
/// partial assignments have been tried.
pub fn brute_homs(
    src: &CSetInstance,
    tgt: &CSetInstance,
    ignore: &BTreeSet<String>,
    injective: &dyn Fn(usize) -> bool,
    allowed: &dyn Fn(usize, usize, usize) -> bool,
    budget: usize,
) -> Option<Vec<Homomorphism>> {
    let s = src.schema();
    let slots: Vec<(usize, usize)> = (0..s.objects().len())
        .flat_map(|ob| (0..src.count(ob)).map(move |r| (ob, r)))
        .collect();
    let mut comps: Vec<Vec<Option<usize>>> = (0..s.objects().len()).map(|ob| vec![None; src.count(ob)]).collect();
    let mut out = Vec::new();
    let mut tried = 0usize;

    fn ok(src: &CSetInstance, tgt: &CSetInstance, ignore: &BTreeSet<String>, comps: &[Vec<Option<usize>>], ob: usize, r: usize) -> bool {
        let s = src.schema();
        let img = comps[ob][r].unwrap();
        for (h, hom) in s.homs().iter().enumerate() {
            if hom.dom == ob {
                let y = src.column(h)[r].unwrap();
                if let Some(fy) = comps[hom.cod][y] {
                    if tgt.column(h)[img] != Some(fy) {
                        return false;
                    }
                }
            }
            if hom.cod == ob {
                for x in 0..src.count(hom.dom) {
                    if src.column(h)[x] == Some(r) {
                        if let Some(fx) = comps[hom.dom][x] {
                            if tgt.column(h)[fx] != Some(img) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        for (a, attr) in s.attrs().iter().enumerate() {
            if attr.dom == ob && !ignore.contains(&attr.name) && src.attr_column(a)[r] != tgt.attr_column(a)[img] {
                return false;
            }
        }
        true
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        k: usize,
        slots: &[(usize, usize)],
        src: &CSetInstance,
        tgt: &CSetInstance,
        ignore: &BTreeSet<String>,
        injective: &dyn Fn(usize) -> bool,
        allowed: &dyn Fn(usize, usize, usize) -> bool,
        comps: &mut Vec<Vec<Option<usize>>>,
        out: &mut Vec<Homomorphism>,
        tried: &mut usize,
        budget: usize,
    ) -> bool {
        if k == slots.len() {
            out.push(Homomorphism::new(
                comps.iter().map(|c| c.iter().map(|x| x.unwrap()).collect()).collect(),
            ));
            return true;
        }
        let (ob, r) = slots[k];
        for t in 0..tgt.count(ob) {
            *tried += 1;
            if *tried > budget {
                return false;
            }
            if !allowed(ob, r, t) || (injective(ob) && comps[ob].contains(&Some(t))) {
                continue;
            }
            comps[ob][r] = Some(t);
            if ok(src, tgt, ignore, comps, ob, r)
                && !go(k + 1, slots, src, tgt, ignore, injective, allowed, comps, out, tried, budget)
            {
                return false;
            }
            comps[ob][r] = None;
        }
        true
    }

    let done = go(0, &slots, src, tgt, ignore, injective, allowed, &mut comps, &mut out, &mut tried, budget);
    if !done {
        return None;
    }
    debug_assert!(out.iter().all(|h| is_homomorphism(h, src, tgt, ignore).unwrap()));
    out.sort();
    Some(out)
}

pub fn all_homs(src: &CSetInstance, tgt: &CSetInstance, budget: usize) -> Option<Vec<Homomorphism>> {
    brute_homs(src, tgt, &names(), &|_| false, &|_, _, _| true, budget)
}

/// `a ∘ b` as maps: first `b`, then `a`.
pub fn compose(first: &Homomorphism, then: &Homomorphism) -> Homomorphism {
    Homomorphism::new(
        first
            .components()
            .iter()
            .zip(then.components())
            .map(|(f, g)| f.iter().map(|&x| g[x]).collect())
            .collect(),
    )
}

/// Restriction of `h` along an interface leg: `leg` then `h`.
pub fn along(leg: &Homomorphism, h: &Homomorphism) -> Homomorphism {
    compose(leg, h)
}

/// Pass/fail line written to the process's real stdout, bypassing the test
/// harness's output capture.
pub fn report(id: &str, ok: bool, detail: &str) {
    let line = format!("\n[{}] criterion {id}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    write_uncaptured(&line);
}

#[cfg(unix)]
fn write_uncaptured(line: &str) {
    use std::io::Write;
    use std::mem::ManuallyDrop;
    use std::os::fd::FromRawFd;
    // SAFETY: fd 1 stays open for the life of the process and is not closed
    // here because the File is never dropped.
    let mut out = ManuallyDrop::new(unsafe { std::fs::File::from_raw_fd(1) });
    let _ = out.write_all(line.as_bytes());
}

#[cfg(not(unix))]
fn write_uncaptured(line: &str) {
    print!("{line}");
}
