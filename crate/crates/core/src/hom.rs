//! Homomorphisms of attributed C-sets and backtracking search for them.
//!
//! The search is a constraint satisfaction problem over the parts of the
//! source instance. Variables are picked most-constrained-first; every
//! assignment is propagated along the outgoing morphisms of its object, which
//! fixes the images of all parts reachable from it.

use std::collections::BTreeSet;

use crate::cset::{CSetInstance, PartId};
use crate::error::{Error, Result};

/// Name attributes of the shipped diagram schemas.
pub const NAME_ATTRS: [&str; 5] = ["sname", "fname", "vname", "svname", "pname"];

pub fn name_attrs() -> BTreeSet<String> {
    NAME_ATTRS.iter().map(|s| s.to_string()).collect()
}

/// Per-object index maps between two instances of one schema.
///
/// Component `ob` sends the `i`-th part of object `ob` in the source to
/// `components[ob][i]` in the target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Homomorphism {
    components: Vec<Vec<usize>>,
}

impl Homomorphism {
    pub fn new(components: Vec<Vec<usize>>) -> Homomorphism {
        Homomorphism { components }
    }

    pub fn identity(inst: &CSetInstance) -> Homomorphism {
        Homomorphism::new(inst.counts().iter().map(|&n| (0..n).collect()).collect())
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component(&self, ob: usize) -> &[usize] {
        &self.components[ob]
    }

    pub fn into_components(self) -> Vec<Vec<usize>> {
        self.components
    }

    pub fn apply(&self, ob: usize, part: usize) -> usize {
        self.components[ob][part]
    }

    /// Image of a named part.
    pub fn image(&self, source: &CSetInstance, part: &PartId) -> Result<PartId> {
        let ob = source.schema().ob(&part.object)?;
        let idx = *self.components[ob]
            .get(part.index)
            .ok_or_else(|| Error::NoSuchPart(part.to_string()))?;
        Ok(PartId::new(part.object.clone(), idx))
    }

    /// `self` followed by `then`.
    pub fn then(&self, then: &Homomorphism) -> Homomorphism {
        Homomorphism::new(
            self.components
                .iter()
                .zip(&then.components)
                .map(|(f, g)| f.iter().map(|&x| g[x]).collect())
                .collect(),
        )
    }

    pub fn is_injective_at(&self, ob: usize) -> bool {
        let c = &self.components[ob];
        c.iter().collect::<BTreeSet<_>>().len() == c.len()
    }

    pub fn is_injective(&self) -> bool {
        (0..self.components.len()).all(|ob| self.is_injective_at(ob))
    }

    pub fn is_surjective_onto(&self, target: &CSetInstance) -> bool {
        self.components
            .iter()
            .enumerate()
            .all(|(ob, c)| c.iter().collect::<BTreeSet<_>>().len() == target.count(ob))
    }
}

/// Checks naturality on every morphism and equality on every attribute not in
/// `ignore_attrs`.
pub fn is_homomorphism(
    h: &Homomorphism,
    source: &CSetInstance,
    target: &CSetInstance,
    ignore_attrs: &BTreeSet<String>,
) -> Result<bool> {
    source.same_schema(target)?;
    source.ensure_valid()?;
    target.ensure_valid()?;
    let schema = source.schema();
    if h.components.len() != schema.objects().len()
        || h.components
            .iter()
            .enumerate()
            .any(|(ob, c)| c.len() != source.count(ob))
    {
        return Err(Error::NotHomomorphism("component shapes do not match the source".into()));
    }
    for (ob, c) in h.components.iter().enumerate() {
        if c.iter().any(|&t| t >= target.count(ob)) {
            return Ok(false);
        }
    }
    for (m, hom) in schema.homs().iter().enumerate() {
        let (sc, tc) = (source.column(m), target.column(m));
        for x in 0..source.count(hom.dom) {
            let lhs = h.components[hom.cod][sc[x].unwrap()];
            let rhs = tc[h.components[hom.dom][x]].unwrap();
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    for (a, attr) in schema.attrs().iter().enumerate() {
        if ignore_attrs.contains(&attr.name) {
            continue;
        }
        let (sc, tc) = (source.attr_column(a), target.attr_column(a));
        for x in 0..source.count(attr.dom) {
            if sc[x] != tc[h.components[attr.dom][x]] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Monic {
    #[default]
    None,
    All,
    Objects(BTreeSet<String>),
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub monic: Monic,
    pub ignore_attrs: BTreeSet<String>,
    /// Fixed images for some source parts.
    pub pins: Vec<(PartId, PartId)>,
    /// Stop after this many matches.
    pub max_matches: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            monic: Monic::None,
            ignore_attrs: name_attrs(),
            pins: Vec::new(),
            max_matches: 10_000,
        }
    }
}

impl SearchOptions {
    /// Monic matching with names ignored, the default for pattern finding.
    pub fn pattern() -> SearchOptions {
        SearchOptions {
            monic: Monic::All,
            ..Default::default()
        }
    }

    /// Non-monic matching with names ignored, the default for typing.
    pub fn typing() -> SearchOptions {
        SearchOptions::default()
    }

    pub fn monic(mut self, monic: Monic) -> Self {
        self.monic = monic;
        self
    }

    pub fn pin(mut self, from: PartId, to: PartId) -> Self {
        self.pins.push((from, to));
        self
    }

    fn monic_flags(&self, source: &CSetInstance) -> Vec<bool> {
        let obs = source.schema().objects();
        match &self.monic {
            Monic::None => vec![false; obs.len()],
            Monic::All => vec![true; obs.len()],
            Monic::Objects(set) => obs.iter().map(|o| set.contains(o)).collect(),
        }
    }
}

struct Search<'a> {
    source: &'a CSetInstance,
    target: &'a CSetInstance,
    homs_out: Vec<Vec<usize>>,
    /// allowed[ob][x][t]: attributes of x and t agree.
    allowed: Vec<Vec<Vec<bool>>>,
    monic: Vec<bool>,
    assign: Vec<Vec<Option<usize>>>,
    used: Vec<Vec<u32>>,
    trail: Vec<(usize, usize)>,
    unassigned: usize,
    results: Vec<Homomorphism>,
    cap: usize,
}

impl<'a> Search<'a> {
    fn new(source: &'a CSetInstance, target: &'a CSetInstance, opts: &SearchOptions) -> Search<'a> {
        let schema = source.schema();
        let nobs = schema.objects().len();
        let homs_out = (0..nobs).map(|ob| schema.homs_from(ob).collect()).collect();
        let attrs: Vec<Vec<usize>> = (0..nobs)
            .map(|ob| {
                schema
                    .attrs_on(ob)
                    .filter(|&a| !opts.ignore_attrs.contains(&schema.attrs()[a].name))
                    .collect()
            })
            .collect();
        let allowed = (0..nobs)
            .map(|ob| {
                (0..source.count(ob))
                    .map(|x| {
                        (0..target.count(ob))
                            .map(|t| {
                                attrs[ob].iter().all(|&a| {
                                    source.attr_column(a)[x] == target.attr_column(a)[t]
                                })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Search {
            source,
            target,
            homs_out,
            allowed,
            monic: opts.monic_flags(source),
            assign: source.counts().iter().map(|&n| vec![None; n]).collect(),
            used: target.counts().iter().map(|&n| vec![0; n]).collect(),
            trail: Vec::new(),
            unassigned: source.counts().iter().sum(),
            results: Vec::new(),
            cap: opts.max_matches,
        }
    }

    fn viable(&self, ob: usize, x: usize, t: usize) -> bool {
        if !self.allowed[ob][x][t] || (self.monic[ob] && self.used[ob][t] > 0) {
            return false;
        }
        let schema = self.source.schema();
        self.homs_out[ob].iter().all(|&h| {
            let cod = schema.homs()[h].cod;
            let y = self.source.column(h)[x].unwrap();
            match self.assign[cod][y] {
                Some(s) => self.target.column(h)[t] == Some(s),
                None => true,
            }
        })
    }

    /// Assigns x ↦ t and propagates along outgoing morphisms. On failure the
    /// caller must undo to its trail mark.
    fn assign(&mut self, ob: usize, x: usize, t: usize) -> bool {
        if let Some(s) = self.assign[ob][x] {
            return s == t;
        }
        if !self.allowed[ob][x][t] || (self.monic[ob] && self.used[ob][t] > 0) {
            return false;
        }
        self.assign[ob][x] = Some(t);
        self.used[ob][t] += 1;
        self.unassigned -= 1;
        self.trail.push((ob, x));
        let schema = self.source.schema();
        for i in 0..self.homs_out[ob].len() {
            let h = self.homs_out[ob][i];
            let cod = schema.homs()[h].cod;
            let y = self.source.column(h)[x].unwrap();
            let ty = self.target.column(h)[t].unwrap();
            if !self.assign(cod, y, ty) {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (ob, x) = self.trail.pop().unwrap();
            let t = self.assign[ob][x].take().unwrap();
            self.used[ob][t] -= 1;
            self.unassigned += 1;
        }
    }

    fn run(&mut self) {
        if self.results.len() >= self.cap {
            return;
        }
        if self.unassigned == 0 {
            let comps = self
                .assign
                .iter()
                .map(|c| c.iter().map(|t| t.unwrap()).collect())
                .collect();
            self.results.push(Homomorphism::new(comps));
            return;
        }
        // Most constrained unassigned part first.
        let mut best: Option<(usize, usize, Vec<usize>)> = None;
        for ob in 0..self.assign.len() {
            for x in 0..self.assign[ob].len() {
                if self.assign[ob][x].is_some() {
                    continue;
                }
                let cands: Vec<usize> = (0..self.target.count(ob))
                    .filter(|&t| self.viable(ob, x, t))
                    .collect();
                if best.as_ref().is_none_or(|b| cands.len() < b.2.len()) {
                    let empty = cands.is_empty();
                    best = Some((ob, x, cands));
                    if empty {
                        return;
                    }
                }
            }
        }
        let (ob, x, cands) = best.unwrap();
        for t in cands {
            let mark = self.trail.len();
            if self.assign(ob, x, t) {
                self.run();
            }
            self.undo_to(mark);
            if self.results.len() >= self.cap {
                return;
            }
        }
    }
}

/// All homomorphisms `pattern → target` satisfying `opts`, sorted
/// lexicographically by component (object declaration order, then part).
///
/// At most `opts.max_matches` maps are returned.
pub fn find_homomorphisms(
    pattern: &CSetInstance,
    target: &CSetInstance,
    opts: &SearchOptions,
) -> Result<Vec<Homomorphism>> {
    pattern.same_schema(target)?;
    pattern.ensure_valid()?;
    target.ensure_valid()?;
    let schema = pattern.schema();
    let mut search = Search::new(pattern, target, opts);
    for (from, to) in &opts.pins {
        if from.object != to.object {
            return Err(Error::CodomainMismatch {
                column: "pin".into(),
                expected: from.object.clone(),
                found: to.object.clone(),
            });
        }
        let ob = schema.ob(&from.object)?;
        if from.index >= pattern.count(ob) {
            return Err(Error::NoSuchPart(from.to_string()));
        }
        if to.index >= target.count(ob) {
            return Err(Error::NoSuchPart(to.to_string()));
        }
        if !search.assign(ob, from.index, to.index) {
            return Ok(Vec::new());
        }
    }
    search.run();
    let mut out = search.results;
    out.sort();
    Ok(out)
}

/// Whether a bijective homomorphism exists between the two instances.
pub fn is_isomorphic(a: &CSetInstance, b: &CSetInstance, ignore_attrs: &BTreeSet<String>) -> Result<bool> {
    a.same_schema(b)?;
    if a.counts() != b.counts() {
        return Ok(false);
    }
    let opts = SearchOptions {
        monic: Monic::All,
        ignore_attrs: ignore_attrs.clone(),
        pins: Vec::new(),
        max_matches: 1,
    };
    Ok(!find_homomorphisms(a, b, &opts)?.is_empty())
}

/// Result of automatic type assignment.
#[derive(Debug, Clone)]
pub struct Typing {
    /// First typing in the deterministic search order.
    pub typing: Homomorphism,
    /// Number of typings found (capped by the search options).
    pub candidates: usize,
}

impl Typing {
    pub fn is_unique(&self) -> bool {
        self.candidates == 1
    }
}

/// Maps a diagram onto a type diagram. Fails when no typing exists.
pub fn assign_types(source: &CSetInstance, type_diagram: &CSetInstance, opts: &SearchOptions) -> Result<Typing> {
    let all = find_homomorphisms(source, type_diagram, opts)?;
    let candidates = all.len();
    let typing = all.into_iter().next().ok_or(Error::NoTyping)?;
    Ok(Typing { typing, candidates })
}
