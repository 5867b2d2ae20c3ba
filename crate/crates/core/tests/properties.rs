mod common;

use std::collections::BTreeSet;

use catflow::compose::{induced_foot, promote, pushout, GluingSpec, OpenDiagram};
use catflow::cset::{CSetInstance, Operator, PartId, Sign, Table};
use catflow::formula::{reconstruct_closure, Evaluator};
use catflow::hom::{find_homomorphisms, is_homomorphism, Homomorphism, Monic, SearchOptions};
use catflow::model::{instance_from_json, instance_to_json};
use catflow::ode::{compile_odes, integrate_rk4, Scenario};
use catflow::schemas::{
    diagram_violations, interface_cld, interface_sfd, interface_ssd, sch_cld, sch_sfd, sch_ssd, sign_at, DiagramKind, SfdSpec,
};
use catflow::signed::{
    find_feedback_loops, path_sign, sign_product, simple_cycles, simple_cycles_dfs, simple_cycles_johnson, SignedGraph,
    SignedPath,
};
use catflow::ssa::{simulate_ssa, DiscreteState};
use catflow::stratify::{pullback, TypedDiagram};
use catflow::translate::{sfd_to_cld, sfd_to_ssd, ssd_to_cld};
use common::{names, random_instance, random_typed};
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [DiagramKind; 3] = [DiagramKind::Cld, DiagramKind::Ssd, DiagramKind::Sfd];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn kind_strategy() -> impl Strategy<Value = DiagramKind> {
    prop::sample::select(KINDS.to_vec())
}

/// Random well-formed SFD. With `closed`, every flow drains one stock and
/// fills one stock; `safe` restricts operators to + and * so rates stay
/// finite on short horizons.
fn random_sfd<R: Rng>(rng: &mut R, closed: bool, safe: bool) -> CSetInstance {
    let ns = rng.random_range(1..=4);
    let stocks: Vec<String> = (0..ns).map(|i| format!("s{i}")).collect();
    let stock_refs: Vec<&str> = stocks.iter().map(String::as_str).collect();
    let mut spec = SfdSpec::new().stocks(&stock_refs);
    let mut pool: Vec<String> = stocks.clone();
    if rng.random_bool(0.6) {
        let members: Vec<&str> = stock_refs.iter().copied().filter(|_| rng.random_bool(0.7)).collect();
        spec = spec.sum_var("total", &members);
        pool.push("total".into());
    }
    let np = rng.random_range(1..=3);
    let params: Vec<String> = (0..np).map(|i| format!("p{i}")).collect();
    spec = spec.params(&params.iter().map(String::as_str).collect::<Vec<_>>());
    pool.extend(params.iter().cloned());
    let nv = rng.random_range(1..=4);
    let mut vars = Vec::new();
    for i in 0..nv {
        let name = format!("v{i}");
        let ops: &[Operator] = if safe {
            &[Operator::Add, Operator::Mul]
        } else {
            &[Operator::Add, Operator::Mul, Operator::Sub, Operator::Div, Operator::Literal(0.5)]
        };
        let op = *ops.choose(rng).unwrap();
        let arity = match op {
            Operator::Add | Operator::Mul => rng.random_range(1..=3),
            Operator::Sub | Operator::Div => 2,
            Operator::Literal(_) => 0,
        };
        let args: Vec<String> = (0..arity).map(|_| pool.choose(rng).unwrap().clone()).collect();
        spec = spec.aux(&name, op, &args.iter().map(String::as_str).collect::<Vec<_>>());
        pool.push(name.clone());
        vars.push(name);
    }
    let nf = rng.random_range(1..=3);
    for i in 0..nf {
        let var = vars.choose(rng).unwrap();
        let pick = |rng: &mut R| stocks.choose(rng).unwrap().clone();
        let (from, to) = if closed {
            (Some(pick(rng)), Some(pick(rng)))
        } else {
            (
                rng.random_bool(0.7).then(|| pick(rng)),
                rng.random_bool(0.7).then(|| pick(rng)),
            )
        };
        spec = spec.flow(&format!("f{i}"), var, from.as_deref(), to.as_deref());
    }
    spec.build().expect("generated spec is well formed")
}

/// Closed mass-action system: each flow's rate is its source stock times a
/// parameter, sometimes times a second stock. Token totals stay fixed, so
/// rates stay bounded during stochastic runs.
fn mass_action_sfd<R: Rng>(rng: &mut R) -> CSetInstance {
    let ns = rng.random_range(1..=4);
    let stocks: Vec<String> = (0..ns).map(|i| format!("s{i}")).collect();
    let nf = rng.random_range(1..=4);
    let params: Vec<String> = (0..nf).map(|i| format!("k{i}")).collect();
    let mut spec = SfdSpec::new()
        .stocks(&stocks.iter().map(String::as_str).collect::<Vec<_>>())
        .params(&params.iter().map(String::as_str).collect::<Vec<_>>());
    for (i, k) in params.iter().enumerate() {
        let from = stocks.choose(rng).unwrap();
        let to = stocks.choose(rng).unwrap();
        let mut args = vec![from.as_str(), k.as_str()];
        if rng.random_bool(0.4) {
            args.push(stocks.choose(rng).unwrap());
        }
        let var = format!("v{i}");
        spec = spec.aux(&var, Operator::Mul, &args).flow(&format!("f{i}"), &var, Some(from), Some(to));
    }
    spec.build().expect("generated spec is well formed")
}

/// Same instance with the rows of `tables` shuffled (references into them
/// are remapped).
fn shuffle_rows<R: Rng>(inst: &CSetInstance, tables: &[&str], rng: &mut R) -> CSetInstance {
    let mut t: Vec<Table> = inst.export_tables().unwrap();
    for table in t.iter_mut().filter(|t| tables.contains(&t.object.as_str())) {
        table.rows.shuffle(rng);
    }
    CSetInstance::import_tables(inst.schema_arc().clone(), &t).unwrap()
}

fn scenario_for(sfd: &CSetInstance, rng: &mut ChaCha8Rng, integer: bool) -> Scenario {
    let mut s = Scenario::new(0.0, 1.0, 0.1);
    for i in 0..sfd.nparts("S") {
        let v = if integer { rng.random_range(0..20) as f64 } else { rng.random_range(0.0..10.0) };
        s.set_stock(sfd.name_of(i, "sname"), v);
    }
    for i in 0..sfd.nparts("P") {
        s.set_param(sfd.name_of(i, "pname"), rng.random_range(0.0..0.5));
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, .. ProptestConfig::default() })]

    #[test]
    fn valid_instances_have_in_range_columns(kind in kind_strategy(), seed in any::<u64>()) {
        let inst = random_instance(kind.schema(), 5, &mut rng(seed));
        prop_assert!(inst.validate().is_empty());
        let s = inst.schema();
        for (h, hom) in s.homs().iter().enumerate() {
            for v in inst.column(h) {
                prop_assert!(v.is_some_and(|x| x < inst.count(hom.cod)));
            }
        }
    }

    #[test]
    fn coproduct_injections(kind in kind_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_instance(kind.schema(), 4, &mut r);
        let b = random_instance(kind.schema(), 4, &mut r);
        let (sum, ia, ib) = CSetInstance::coproduct(&a, &b).unwrap();
        prop_assert!(sum.validate().is_empty());
        prop_assert!(ia.is_injective() && ib.is_injective());
        prop_assert!(is_homomorphism(&ia, &a, &sum, &BTreeSet::new()).unwrap());
        prop_assert!(is_homomorphism(&ib, &b, &sum, &BTreeSet::new()).unwrap());
        for ob in 0..sum.schema().objects().len() {
            let image: BTreeSet<usize> = ia.component(ob).iter().chain(ib.component(ob)).copied().collect();
            prop_assert_eq!(image.len(), sum.count(ob));
        }
    }

    #[test]
    fn table_round_trip(kind in kind_strategy(), seed in any::<u64>()) {
        let inst = random_instance(kind.schema(), 5, &mut rng(seed));
        let tables = inst.export_tables().unwrap();
        let back = CSetInstance::import_tables(kind.schema(), &tables).unwrap();
        prop_assert_eq!(&back, &inst);
        let csv: Vec<String> = tables.iter().map(|t| t.to_csv().unwrap()).collect();
        let reread: Vec<Table> = tables
            .iter()
            .zip(&csv)
            .map(|(t, c)| Table::from_csv(&t.object, c).unwrap())
            .collect();
        prop_assert_eq!(CSetInstance::import_tables(kind.schema(), &reread).unwrap(), inst.clone());
        let json = instance_to_json(&inst);
        prop_assert_eq!(instance_from_json(kind.schema(), &json).unwrap(), inst);
    }

    #[test]
    fn built_sfds_satisfy_position_invariant(seed in any::<u64>()) {
        let sfd = random_sfd(&mut rng(seed), false, false);
        prop_assert!(sfd.validate().is_empty());
        prop_assert_eq!(diagram_violations(DiagramKind::Sfd, &sfd), Vec::<String>::new());
    }

    #[test]
    fn composite_of_homomorphisms_is_a_homomorphism(kind in kind_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_instance(kind.schema(), 3, &mut r);
        let (b, _) = random_typed(&c, 3, &mut r);
        let (a, _) = random_typed(&b, 3, &mut r);
        let opts = SearchOptions { max_matches: 20, ..SearchOptions::default() };
        let f = find_homomorphisms(&a, &b, &opts).unwrap();
        let g = find_homomorphisms(&b, &c, &opts).unwrap();
        prop_assert!(!f.is_empty() && !g.is_empty());
        for x in &f {
            for y in &g {
                prop_assert!(is_homomorphism(&x.then(y), &a, &c, &names()).unwrap());
            }
        }
    }

    #[test]
    fn monic_flags_are_respected(kind in kind_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_instance(kind.schema(), 4, &mut r);
        let (p, _) = random_typed(&t, 3, &mut r);
        let objects = kind.schema().objects().to_vec();
        let flagged: BTreeSet<String> = objects.iter().filter(|_| r.random_bool(0.5)).cloned().collect();
        let opts = SearchOptions {
            monic: Monic::Objects(flagged.clone()),
            max_matches: 500,
            ..SearchOptions::default()
        };
        for h in find_homomorphisms(&p, &t, &opts).unwrap() {
            for (ob, name) in objects.iter().enumerate() {
                if flagged.contains(name) {
                    prop_assert!(h.is_injective_at(ob));
                }
            }
        }
    }

    #[test]
    fn pushout_counts_and_injections(kind in kind_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let full = kind.schema();
        let iface = kind.interface_schema();
        let l = random_instance(full.clone(), 4, &mut r);
        let m = random_instance(full.clone(), 4, &mut r);
        let seeds_l: Vec<PartId> = iface
            .objects()
            .iter()
            .flat_map(|o| (0..l.nparts(o)).map(move |i| PartId::new(o.clone(), i)))
            .filter(|_| r.random_bool(0.5))
            .collect();
        let (foot, leg) = induced_foot(&l, iface.clone(), &seeds_l).unwrap();
        // Right side: the foot plus a random instance, disjointly.
        let (right, into_right, _) = CSetInstance::coproduct(&promote(&foot, full.clone()), &m).unwrap();
        let left = OpenDiagram::new(l.clone(), iface.clone(), vec![foot.clone()], vec![leg]).unwrap();
        let right_open = OpenDiagram::new(right.clone(), iface, vec![foot.clone()], vec![into_right]).unwrap();
        let corr = Homomorphism::identity(&foot);
        let po = pushout(&GluingSpec {
            left: &left,
            left_foot: 0,
            right: &right_open,
            right_foot: 0,
            correspondence: &corr,
        })
        .unwrap();
        for (ob, o) in full.objects().iter().enumerate() {
            let shared = foot.try_nparts(o).unwrap_or(0);
            prop_assert_eq!(po.composite.count(ob), l.count(ob) + right.count(ob) - shared);
        }
        prop_assert!(is_homomorphism(&po.inj_left, &l, &po.composite, &names()).unwrap());
        prop_assert!(is_homomorphism(&po.inj_right, &right, &po.composite, &names()).unwrap());
    }

    #[test]
    fn pullback_is_symmetric(kind in kind_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_instance(kind.schema(), 2, &mut r);
        let (a, ta) = random_typed(&t, 2, &mut r);
        let (s, ts) = random_typed(&t, 2, &mut r);
        let a = TypedDiagram::new(a, t.clone(), ta).unwrap();
        let s = TypedDiagram::new(s, t, ts).unwrap();
        let ab = pullback(&a, &s).unwrap();
        let ba = pullback(&s, &a).unwrap();
        let opts = SearchOptions { monic: Monic::All, max_matches: 100_000, ..SearchOptions::default() };
        let isos = find_homomorphisms(&ab.stratified, &ba.stratified, &opts).unwrap();
        let same_size = ab.stratified.counts() == ba.stratified.counts();
        prop_assert!(same_size && isos.iter().any(|phi| phi.then(&ba.p2) == ab.p1 && phi.then(&ba.p1) == ab.p2));
    }

    #[test]
    fn formulas_ignore_link_row_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sfd = random_sfd(&mut r, false, false);
        let shuffled = shuffle_rows(&sfd, &["LV", "LSV", "LPV", "LVV"], &mut r);
        let stocks: Vec<f64> = (0..sfd.nparts("S")).map(|_| r.random_range(0.5..5.0)).collect();
        let params: Vec<f64> = (0..sfd.nparts("P")).map(|_| r.random_range(0.5..5.0)).collect();
        let a = Evaluator::new(&sfd).unwrap();
        let b = Evaluator::new(&shuffled).unwrap();
        for v in 0..sfd.nparts("V") {
            prop_assert_eq!(a.aux_formula(v).to_string(), b.aux_formula(v).to_string());
        }
        let (x, y) = (a.eval(&stocks, &params), b.eval(&stocks, &params));
        match (x, y) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(x.aux.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), y.aux.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "evaluation outcome depends on row order"),
        }
        for f in 0..sfd.nparts("F") {
            prop_assert!(reconstruct_closure(&sfd, sfd.subpart(f, "fv")).is_ok());
        }
    }

    #[test]
    fn translation_laws(seed in any::<u64>()) {
        let sfd = random_sfd(&mut rng(seed), false, true);
        let ssd = sfd_to_ssd(&sfd).unwrap();
        let (staged, w) = ssd_to_cld(&ssd).unwrap();
        let (direct, w2) = sfd_to_cld(&sfd).unwrap();
        prop_assert_eq!(&staged, &direct);
        prop_assert_eq!(&w, &w2);
        let nv = ["S", "SV", "V", "P"].iter().map(|o| sfd.nparts(o)).sum::<usize>();
        prop_assert_eq!(direct.nparts("V"), nv);
        let rows = ["LV", "LS", "LSV", "LPV", "LVV", "I", "O"].iter().map(|o| sfd.nparts(o)).sum::<usize>();
        prop_assert_eq!(direct.nparts("L"), rows);
        let pol = |table: &str| match table {
            "LV" => "polarityLV",
            "LS" => "positiveLS",
            "LSV" => "polarityLSV",
            "LPV" => "polarityLPV",
            "LVV" => "polarityLVV",
            "I" => "positiveI",
            _ => "negativeO",
        };
        for (l, o) in w.links.iter().enumerate() {
            prop_assert_eq!(sign_at(&direct, l, "polarity"), sign_at(&ssd, o.row, pol(o.table)));
        }
        let nstock_sum = sfd.nparts("S") + sfd.nparts("SV");
        for f in 0..sfd.nparts("F") {
            prop_assert_eq!(w.flow_vertices[f], nstock_sum + sfd.subpart(f, "fv"));
        }
    }

    #[test]
    fn closed_systems_conserve_stock_total(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sfd = random_sfd(&mut r, true, true);
        let sys = compile_odes(&sfd).unwrap();
        let scen = scenario_for(&sfd, &mut r, false);
        let tr = integrate_rk4(&sys, &scen);
        prop_assume!(tr.is_ok());
        let tr = tr.unwrap();
        let n = sys.nstocks();
        let totals: Vec<f64> = (0..tr.len()).map(|k| tr.row(k)[..n].iter().sum()).collect();
        prop_assume!(totals.iter().all(|t| t.is_finite()));
        for (k, t) in totals.iter().enumerate() {
            let magnitude: f64 = tr.row(k)[..n].iter().map(|x| x.abs()).sum();
            let scale = magnitude.max(totals[0].abs()).max(1.0);
            prop_assert!((t - totals[0]).abs() <= 1e-9 * scale, "{} vs {} at row {}", t, totals[0], k);
        }
    }

    #[test]
    fn compilation_ignores_flow_row_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sfd = random_sfd(&mut r, false, true);
        let shuffled = shuffle_rows(&sfd, &["I", "O"], &mut r);
        let a = compile_odes(&sfd).unwrap();
        let b = compile_odes(&shuffled).unwrap();
        let y: Vec<f64> = (0..a.nstocks()).map(|_| r.random_range(0.0..5.0)).collect();
        let p: Vec<f64> = (0..sfd.nparts("P")).map(|_| r.random_range(0.0..1.0)).collect();
        let (da, db) = (a.derivative(&y, &p).unwrap(), b.derivative(&y, &p).unwrap());
        prop_assert_eq!(da.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), db.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn ssa_conserves_tokens_and_replays(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sfd = mass_action_sfd(&mut r);
        let sys = compile_odes(&sfd).unwrap();
        let scen = scenario_for(&sfd, &mut r, true);
        let init = DiscreteState::from_scenario(&sys, &scen).unwrap();
        let total: i64 = init.counts.iter().sum();
        let a = simulate_ssa(&sfd, &init, 5.0, seed).unwrap();
        prop_assert!(a.events.iter().all(|e| e.state.iter().sum::<i64>() == total && e.state.iter().all(|&c| c >= 0)));
        prop_assert_eq!(simulate_ssa(&sfd, &init, 5.0, seed).unwrap(), a);
    }
}

fn random_graph(r: &mut ChaCha8Rng, nv: usize, ne: usize) -> SignedGraph {
    let edges = (0..ne)
        .map(|_| {
            let s = if r.random_bool(0.5) { Sign::Pos } else { Sign::Neg };
            (r.random_range(0..nv), r.random_range(0..nv), s)
        })
        .collect();
    SignedGraph::new((0..nv).map(|i| format!("x{i}")).collect(), edges)
}

fn random_walk(g: &SignedGraph, start: usize, len: usize, r: &mut ChaCha8Rng) -> SignedPath {
    let mut p = SignedPath::empty(start);
    let mut at = start;
    for _ in 0..len {
        let out: Vec<usize> = (0..g.edges.len()).filter(|&e| g.edges[e].0 == at).collect();
        let Some(&e) = out.choose(r) else { break };
        p.edges.push(e);
        at = g.edges[e].1;
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, .. ProptestConfig::default() })]

    #[test]
    fn path_sign_is_multiplicative(seed in any::<u64>(), nv in 1usize..6, ne in 0usize..12) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, nv, ne);
        let p = random_walk(&g, r.random_range(0..nv), 4, &mut r);
        let q = random_walk(&g, p.end(&g), 4, &mut r);
        let pq = p.then(&g, &q).unwrap();
        let (sp, sq, spq) = (path_sign(&g, &p).unwrap(), path_sign(&g, &q).unwrap(), path_sign(&g, &pq).unwrap());
        prop_assert_eq!(spq, sp.mul(sq));
        prop_assert_eq!(spq, sign_product(pq.edges.iter().map(|&e| g.edges[e].2)));
    }

    #[test]
    fn loops_partition_cycles(seed in any::<u64>(), nv in 1usize..6, ne in 0usize..10, max_len in 1usize..7) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, nv, ne);
        let all: BTreeSet<Vec<usize>> = simple_cycles(&g, max_len).into_iter().map(|c| c.edges).collect();
        let pos: BTreeSet<Vec<usize>> = find_feedback_loops(&g, Sign::Pos, max_len).into_iter().map(|l| l.path.edges).collect();
        let neg: BTreeSet<Vec<usize>> = find_feedback_loops(&g, Sign::Neg, max_len).into_iter().map(|l| l.path.edges).collect();
        prop_assert!(pos.is_disjoint(&neg));
        prop_assert_eq!(pos.union(&neg).cloned().collect::<BTreeSet<_>>(), all);
    }

    #[test]
    fn johnson_agrees_with_bounded_search(seed in any::<u64>(), nv in 1usize..6, ne in 0usize..10) {
        let g = random_graph(&mut rng(seed), nv, ne);
        prop_assert_eq!(simple_cycles_johnson(&g), simple_cycles_dfs(&g, nv));
    }
}

#[test]
fn interface_schemas_embed_in_full_schemas() {
    for (iface, full) in [(interface_cld(), sch_cld()), (interface_ssd(), sch_ssd()), (interface_sfd(), sch_sfd())] {
        assert!(iface.is_subschema_of(&full), "{} in {}", iface.name(), full.name());
    }
    for kind in KINDS {
        assert_eq!(kind.interface_schema().as_ref(), kind.interface_schema().as_ref());
    }
}
