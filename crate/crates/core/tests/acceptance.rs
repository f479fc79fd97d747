//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! then fails if any criterion failed.
//!
//! `cargo test -p cmspress-core --test acceptance -- --nocapture`

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmspress::boundary::{
    boundary_entropy, build_boundary_model, check_lemmas, BoundaryOptions, BoundarySource, CompactifiedShift,
};
use cmspress::diff::{
    check_pressure_axioms, gateaux_derivative, kink_scan, parse_grid, pressure_curve, random_mixing_sft,
    random_potential,
};
use cmspress::gallery::{instantiate, CATALOGUE};
use cmspress::metric::{classify, shift_distance, ShiftMetric, Verdict, VertexMetric};
use cmspress::potential::{Formula, Potential};
use cmspress::pressure::{
    boundary_equidistribution, compactified_pressure, equilibrium_measure, gurevich_pressure, interior_pressure,
    loop_entropy, measure_free_energy, variational_witness_check,
};
use cmspress::sectors::{boundary_chains, decompose, verify, SectorVerdict};
use cmspress::shift::{truncate, Generator, LoopCounts, ShiftSpec, TruncatedSFT, VertexId, Word};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn timed(limit: Duration, start: Instant) -> Result<Duration, String> {
    let el = start.elapsed();
    ensure(el < limit, format!("took {el:.2?}, limit {limit:?}"))?;
    Ok(el)
}

fn full2() -> TruncatedSFT {
    truncate(&ShiftSpec::full_shift(2), 2)
}

fn renewal() -> ShiftSpec {
    ShiftSpec::Generator(Generator::Renewal)
}

fn c1_renewal_entropy() -> Outcome {
    let start = Instant::now();
    let r = interior_pressure(&renewal(), &Potential::zero(), &[8, 16, 32, 64, 128]).map_err(e)?;
    let el = timed(Duration::from_secs(5), start)?;
    ensure(r.trace.windows(2).all(|w| w[1].value >= w[0].value), "trace not monotone")?;
    ensure(r.value <= LN_2 + 1e-12 && r.value >= LN_2 - 1e-3, format!("final value {}", r.value))?;
    Ok(format!("P = {:.12}, |P - log 2| = {:.1e}, {el:.2?}", r.value, (LN_2 - r.value).abs()))
}

fn c2_compactified_matches_interior() -> Outcome {
    let schedule = [16, 32, 64, 128];
    let mut worst = 0.0f64;
    let cases: [(Generator, VertexMetric); 2] = [
        (Generator::Renewal, VertexMetric::Zargaryan),
        (Generator::DoubleRenewal, VertexMetric::DoubleRenewal),
    ];
    for (g, vm) in cases {
        let spec = ShiftSpec::Generator(g);
        let dec = decompose(&spec, &vm, &[8, 16, 32], 512).map_err(e)?;
        let model = build_boundary_model(&spec, &vm, BoundarySource::Sectors(&dec), &BoundaryOptions::default())
            .map_err(e)?;
        let limits: BTreeMap<String, f64> = model.symbol_ids().map(|s| (s.to_string(), 0.0)).collect();
        let cs = CompactifiedShift::new(truncate(&spec, 128), model).map_err(e)?;
        for p in [Potential::zero(), Potential::formula(Formula::Reciprocal, limits.clone())] {
            let c = compactified_pressure(&cs, &p).map_err(e)?.value;
            let i = interior_pressure(&spec, &p, &schedule).map_err(e)?.value;
            ensure((c - i).abs() <= 1e-2, format!("{}: compactified {c} vs interior {i}", spec.describe()))?;
            worst = worst.max((c - i).abs());
        }
    }
    Ok(format!("max |P_compact - P_int| = {worst:.2e} at N = 128"))
}

fn c3_boundary_lemmas() -> Outcome {
    let mut entries = Vec::new();
    for name in CATALOGUE {
        let g = instantiate(name).map_err(e)?;
        let dec = decompose(&g.spec, &g.metric, &g.cutoffs, g.n_max).map_err(e)?;
        let sectorial = verify(&dec).is_sectorial();
        entries.push((g, sectorial));
    }
    let start = Instant::now();
    let mut identity_checked = 0;
    for (g, sectorial) in &entries {
        let cs = CompactifiedShift::new(truncate(&g.spec, 64), g.boundary.clone()).map_err(e)?;
        let r = check_lemmas(&cs, *sectorial).map_err(e)?;
        ensure(r.no_excursion.passed, format!("{}: excursion {:?}", g.name, r.no_excursion.witness))?;
        ensure(r.within_nonempty, format!("{}: empty within-boundary relation", g.name))?;
        ensure(!sectorial || r.within_identity, format!("{}: sectorial but not identity", g.name))?;
        identity_checked += *sectorial as usize;
    }
    let el = timed(Duration::from_secs(1), start)?;
    Ok(format!(
        "{} entries, identity asserted on {identity_checked} sectorial ones, {el:.2?}",
        entries.len()
    ))
}

fn c4_sector_verdicts() -> Outcome {
    let mut summary = Vec::new();
    for (name, want) in [
        ("renewal", true),
        ("double_renewal", true),
        ("dyadic_tree", true),
        ("zigzag_2", false),
        ("birth_death_parity", false),
    ] {
        let g = instantiate(name).map_err(e)?;
        let dec = decompose(&g.spec, &g.metric, &g.cutoffs, g.n_max).map_err(e)?;
        let c = verify(&dec);
        if want {
            ensure(c.is_sectorial(), format!("{name}: {:?} ({:?})", c.verdict, c.reason))?;
        } else {
            ensure(
                c.verdict == SectorVerdict::NotSectorial && c.witness.is_some(),
                format!("{name}: {:?} ({:?})", c.verdict, c.reason),
            )?;
        }
        summary.push(format!("{name}={:?}", c.verdict));
    }
    Ok(summary.join(", "))
}

fn c5_boundary_entropy() -> Outcome {
    let bd = instantiate("birth_death_parity").map_err(e)?;
    let cs = CompactifiedShift::new(truncate(&bd.spec, 64), bd.boundary.clone()).map_err(e)?;
    let h = boundary_entropy(&cs).map_err(e)?;
    ensure((h - LN_2).abs() < 1e-12, format!("birth_death_parity: {h}"))?;
    let mut zero = Vec::new();
    for name in CATALOGUE {
        let g = instantiate(name).map_err(e)?;
        let dec = decompose(&g.spec, &g.metric, &g.cutoffs, g.n_max).map_err(e)?;
        if !verify(&dec).is_sectorial() {
            continue;
        }
        let cs = CompactifiedShift::new(truncate(&g.spec, 64), g.boundary.clone()).map_err(e)?;
        let h = boundary_entropy(&cs).map_err(e)?;
        ensure(h.abs() < 1e-12, format!("{name}: {h}"))?;
        zero.push(name);
    }
    Ok(format!("birth_death_parity = log 2; 0 on {}", zero.join(", ")))
}

fn c6_equidistribution() -> Outcome {
    let spec = renewal();
    let dec = decompose(&spec, &VertexMetric::Zargaryan, &[8, 16, 32], 512).map_err(e)?;
    let chains = boundary_chains(&dec).map_err(e)?;
    ensure(chains.len() == 1, "renewal has one chain")?;
    let recip = Potential::formula_with_limit(Formula::Reciprocal, "inf", 0.0);
    let mut last = f64::INFINITY;
    let mut row = Vec::new();
    for n in [50, 100, 200] {
        let r = boundary_equidistribution(&spec, &dec, 0, 0, n, &recip).map_err(e)?;
        ensure(r.bound_holds, format!("n={n}: deviation {} > bound {}", r.deviation, r.bound))?;
        ensure(r.integral.abs() < last, format!("n={n}: |integral| {} not decreasing", r.integral))?;
        last = r.integral.abs();
        row.push(format!("n={n}: {:.4} <= {:.4}", r.integral, r.bound));
    }
    Ok(row.join("; "))
}

fn c7_axioms() -> Outcome {
    let start = Instant::now();
    let a = check_pressure_axioms(&full2(), 500, 1e-9, 7).map_err(e)?;
    ensure(a.passed(), format!("full 2-shift: {a:?}"))?;
    let t = random_mixing_sft(4, 7).map_err(e)?;
    let b = check_pressure_axioms(&t, 500, 1e-9, 8).map_err(e)?;
    ensure(b.passed(), format!("random SFT: {b:?}"))?;
    let el = timed(Duration::from_secs(10), start)?;
    let worst = [&a, &b]
        .iter()
        .flat_map(|r| [&r.translation, &r.monotonicity, &r.lipschitz, &r.convexity])
        .map(|t| t.max_violation)
        .fold(0.0, f64::max);
    Ok(format!("2 x 500 trials, worst violation {worst:.1e}, {el:.2?}"))
}

fn c8_variational() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let systems = [full2(), random_mixing_sft(4, 8).map_err(e)?];
    let (mut excess, mut gap) = (f64::NEG_INFINITY, 0.0f64);
    for t in &systems {
        for p in [Potential::zero(), random_potential(t, 1.0, &mut rng).map_err(e)?] {
            let r = variational_witness_check(t, &p, 200, rng.random()).map_err(e)?;
            ensure(r.max_excess <= 1e-9, format!("sampled measure exceeds P by {}", r.max_excess))?;
            ensure(r.equilibrium_gap.abs() <= 1e-8, format!("equilibrium gap {}", r.equilibrium_gap))?;
            excess = excess.max(r.max_excess);
            gap = gap.max(r.equilibrium_gap.abs());
        }
    }
    Ok(format!("max excess {excess:.2e}, equilibrium gap {gap:.1e}"))
}

fn c9_derivatives() -> Outcome {
    let t = full2();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = 1e-4;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let phi = random_potential(&t, 1.0, &mut rng).map_err(e)?;
        let psi = random_potential(&t, 1.0, &mut rng).map_err(e)?;
        let eq = equilibrium_measure(&t, &phi).map_err(e)?;
        let integral = measure_free_energy(&eq.measure, &psi).map_err(e)?.1;
        let (l, r) = gateaux_derivative(&t, &phi, &psi, h).map_err(e)?;
        worst = worst.max((l - integral).abs()).max((r - integral).abs());
    }
    ensure(worst <= 1e-3, format!("derivative off by {worst}"))?;
    let loops = TruncatedSFT::from_edges(2, &[(1, 1), (2, 2)]).map_err(e)?;
    let ind = Potential::depth_one(&[(1, 1.0)], 0.0).map_err(e)?;
    let grid = parse_grid("-1:1:0.01").map_err(e)?;
    let c = pressure_curve(&loops, &Potential::zero(), &ind, &grid).map_err(e)?;
    let k = kink_scan(&c, 1e-6).map_err(e)?;
    ensure(k.locations.len() == 1, format!("kinks at {:?}", k.locations))?;
    let (sl, sr) = k.slopes[0];
    ensure(
        k.locations[0].abs() < 1e-9 && sl.abs() < 1e-6 && (sr - 1.0).abs() < 1e-6,
        format!("kink {} slopes ({sl}, {sr})", k.locations[0]),
    )?;
    Ok(format!("50 pairs within {worst:.1e}; one kink at t = 0 with slopes ({sl:.1e}, {sr:.6})"))
}

fn c10_loop_entropy() -> Outcome {
    let counts = LoopCounts::Constant { value: 1 };
    let h = loop_entropy(&counts.sequence(60), 60).map_err(e)?;
    ensure((h - LN_2).abs() <= 1e-9, format!("loop_entropy {h}"))?;
    let spec = ShiftSpec::Generator(Generator::LoopSystem { counts });
    let base = spec.vertex_of(&cmspress::shift::Label::Text("v".into())).map_err(e)?;
    let g = gurevich_pressure(&spec, &Potential::zero(), base, 20, 256).map_err(e)?;
    ensure((g.value - h).abs() <= 5e-2, format!("gurevich {} vs {h}", g.value))?;
    Ok(format!("loop_entropy = {h:.12}, gurevich(n_max=20) = {:.4}", g.value))
}

fn c11_metric_layer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let families: Vec<(VertexMetric, Box<dyn Fn(&mut ChaCha8Rng) -> u64>)> = vec![
        (VertexMetric::Zargaryan, Box::new(|r: &mut ChaCha8Rng| r.random_range(1..10_000))),
        (VertexMetric::Discrete, Box::new(|r: &mut ChaCha8Rng| r.random_range(1..50))),
        (VertexMetric::TreeBackward, Box::new(|r: &mut ChaCha8Rng| r.random_range(1..4096))),
        (VertexMetric::DoubleRenewal, Box::new(|r: &mut ChaCha8Rng| r.random_range(1..10_000))),
        (VertexMetric::BirthDeathParity, Box::new(|r: &mut ChaCha8Rng| r.random_range(1..10_000))),
        (VertexMetric::ZigZag2, Box::new(|r: &mut ChaCha8Rng| r.random_range(1..10_000))),
        (VertexMetric::ZigZag3, Box::new(|r: &mut ChaCha8Rng| r.random_range(1..10_000))),
        (
            VertexMetric::Circle {
                counts: LoopCounts::Linear,
                radii: None,
            },
            Box::new(|r: &mut ChaCha8Rng| r.random_range(1..2_000)),
        ),
        (
            VertexMetric::Embedding {
                points: vec![[0.0, 0.0], [0.3, 0.4], [2.0, 0.0], [0.1, 0.9], [0.5, 0.5]],
            },
            Box::new(|r: &mut ChaCha8Rng| r.random_range(1..=5)),
        ),
    ];
    for (vm, draw) in &families {
        for _ in 0..10_000 {
            let [a, b, c] = [draw(&mut rng), draw(&mut rng), draw(&mut rng)].map(VertexId::from_index);
            let ab = vm.rho(a, b).map_err(e)?;
            let ba = vm.rho(b, a).map_err(e)?;
            let bc = vm.rho(b, c).map_err(e)?;
            let ac = vm.rho(a, c).map_err(e)?;
            let name = vm.name();
            ensure(vm.rho(a, a).map_err(e)? == 0.0, format!("{name}: rho(a,a) != 0"))?;
            ensure(ab == ba, format!("{name}: asymmetric at {a:?},{b:?}"))?;
            ensure((0.0..=1.0).contains(&ab), format!("{name}: rho = {ab}"))?;
            ensure(a == b || ab > 0.0, format!("{name}: rho({a:?},{b:?}) = 0"))?;
            ensure(ac <= ab + bc + 1e-12, format!("{name}: triangle fails at {a:?},{b:?},{c:?}"))?;
        }
    }
    let want = [
        (VertexMetric::Zargaryan, Verdict::Yes),
        (VertexMetric::Discrete, Verdict::No),
        (VertexMetric::TreeBackward, Verdict::No),
    ];
    for (vm, v) in want {
        let c = classify(&vm, 1024, &[0.5, 0.25, 0.125]).map_err(e)?;
        ensure(c.vanishing.verdict == v, format!("{}: vanishing {:?}", vm.name(), c.vanishing.verdict))?;
    }
    let sm = ShiftMetric::new(VertexMetric::Zargaryan, 0.5).map_err(e)?;
    for _ in 0..1000 {
        let len = 40;
        let x = Word::from_indices(&(0..len).map(|_| rng.random_range(1..100)).collect::<Vec<_>>());
        let y = Word::from_indices(&(0..len).map(|_| rng.random_range(1..100)).collect::<Vec<_>>());
        let n = rng.random_range(1..20);
        let (value, tail) = shift_distance(&sm, &x, &y, n).map_err(e)?;
        let (full, _) = shift_distance(&sm, &x, &y, len).map_err(e)?;
        ensure(value <= full + 1e-15 && full <= value + tail + 1e-15, "tail bound violated")?;
    }
    Ok(format!("{} families x 10^4 triples, 3 classifications, 10^3 tail pairs", families.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("renewal entropy via interior pressure", c1_renewal_entropy),
        ("compactified pressure equals interior pressure", c2_compactified_matches_interior),
        ("boundary lemmas on every gallery entry", c3_boundary_lemmas),
        ("sector verdicts", c4_sector_verdicts),
        ("boundary entropy", c5_boundary_entropy),
        ("equidistribution bound", c6_equidistribution),
        ("pressure axioms", c7_axioms),
        ("variational principle", c8_variational),
        ("derivative duality and kink", c9_derivatives),
        ("loop entropy", c10_loop_entropy),
        ("metric layer", c11_metric_layer),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("[{:>2}] PASS {name}: {detail}", i + 1),
            Err(why) => {
                println!("[{:>2}] FAIL {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
