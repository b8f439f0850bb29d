//! Acceptance harness: one PASS or FAIL line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use clap::Parser;
use common::hyperbolic::{chord_crossings, chords, Polygon};
use common::tables::{element, generators, monomial, rng, table};
use sft_lab::algebra::{apply_d, apply_d_exact, AlgebraElement, CountDocument, Monomial, TorsionOrder, Truncation};
use sft_lab::building::{classify, classify_all, pair_cancellation, sporadic_signature, twin_count_document, Case, Convention, Hypersurface};
use sft_lab::cli::{execute, render, Cli, CobracketResult, EnumerateResult, Manifest, RigidityResult, TorsionResult};
use sft_lab::covers::{enumerate_branch_profiles, super_rigidity_verdict, total_branching, BranchProfile, Verdict};
use sft_lab::index::{automatic_transversality, cz_in_model, kernel_bound, normal_index, obstruction_rank, CritLabel, OrbitSymbol, PunctureProfile, Side};
use sft_lab::model::{reference, Half, Model};
use sft_lab::ratio;
use sft_lab::surface::{classes_of_length, CyclicWord, SurfaceGroup};
use sft_lab::topology::{cobracket, self_intersection_pairs, sporadic_count, sporadic_count_direct, Registry, TensorSum};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn classification_counts(model: &Model) -> Outcome {
    let start = Instant::now();
    let plane = classify(model, 0, 1, Convention::Mixed).map_err(|e| e.to_string())?;
    let cyl = classify(model, 0, 2, Convention::Mixed).map_err(|e| e.to_string())?;
    let tor = classify(model, 1, 1, Convention::Mixed).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let left = cyl.iter().filter(|e| e.side == Half::Left).count();
    let got = (plane.len(), cyl.len(), left, cyl.len() - left, tor.len());
    ensure(got == (0, 6, 1, 5, 29), || format!("counts {got:?}"))?;
    ensure(plane.len() + cyl.len() + tor.len() == 35, || "total is not 35".into())?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("0 / 6 (1 + 5) / 29, total 35 in {elapsed:.2?}"))
}

fn twin_cancellation(model: &Model) -> Outcome {
    let all = classify_all(model, Convention::Mixed);
    let c = pair_cancellation(&all).map_err(|e| e.to_string())?;
    ensure(c.unpaired.len() == 1, || format!("{} unpaired", c.unpaired.len()))?;
    let lone = all.iter().find(|e| e.id == c.unpaired[0]).unwrap();
    let signature = sporadic_signature(model).map_err(|e| e.to_string())?;
    ensure(lone.building == signature, || format!("unpaired {} differs from the sporadic signature", lone.id))?;
    let comp = &signature.floors[0].components[0];
    ensure(signature.arithmetic_genus == 1 && signature.positive_end_count == 1, || "signature shape".into())?;
    ensure(matches!(&comp.hypersurface, Hypersurface::Cylindrical { crit } if model.crit_by_id(crit).index == 0), || "signature leaf".into())?;
    let cyl: Vec<_> = all.iter().filter(|e| e.case == Case::CylinderTwoPositive).cloned().collect();
    let cc = pair_cancellation(&cyl).map_err(|e| e.to_string())?;
    ensure(cc.unpaired.is_empty(), || format!("{} cylinders unpaired", cc.unpaired.len()))?;
    Ok(format!("{} pairs, lone survivor {}; cylinders fully paired", c.pairs.len(), lone.id))
}

fn orbit(index: u8, cz_base: i64) -> OrbitSymbol {
    OrbitSymbol {
        id: "probe".into(),
        side: Side::Left,
        crit_sigma: CritLabel::new("p", index),
        crit_base: None,
        cover: 1,
        action: ratio::one(),
        cz_base,
        good: true,
        contractible: false,
    }
}

fn index_suite(model: &Model) -> Outcome {
    let start = Instant::now();
    for cz in -5..=5 {
        for (index, shift) in [(0u8, 1i64), (1, 0), (2, 1)] {
            let got = cz_in_model(&orbit(index, cz), 1).map_err(|e| e.to_string())?;
            ensure(got == cz + shift, || format!("CZ of index {index} over {cz}: {got}"))?;
        }
    }
    let sporadic = PunctureProfile::new(1, [1, 0, 0], [0, 0, 0]);
    ensure(normal_index(&sporadic) == 0, || "sporadic normal index".into())?;
    let mut profiles = 0;
    for g in 0..=3u32 {
        for code in 0..4u32.pow(6) {
            let c: Vec<u32> = (0..6).map(|k| (code / 4u32.pow(k)) % 4).collect();
            let p = PunctureProfile::new(g, [c[0], c[1], c[2]], [c[3], c[4], c[5]]);
            let (gi, c): (i64, Vec<i64>) = (g as i64, c.iter().map(|&x| x as i64).collect());
            let first = 2 - 2 * gi - 2 * c[3] - 2 * c[5] - c[1] - c[4];
            // Euler characteristic form: χ minus the even negative ends plus the even positive ones.
            let second = 2 - 2 * gi - c.iter().sum::<i64>() + c[0] + c[2] - c[3] - c[5];
            ensure(first == second && normal_index(&p) == first, || format!("normal index forms disagree on {p:?}"))?;
            profiles += 1;
            if g >= 1 && c.iter().all(|&x| x <= 4) {
                ensure(!automatic_transversality(&p, first), || format!("transversality holds on {p:?}"))?;
            }
        }
    }
    ensure(obstruction_rank(0, 0, 1) == Ok(1), || "obstruction_rank(0, 0, 1)".into())?;
    let all = classify_all(model, Convention::Mixed);
    for e in all.iter().filter(|e| e.case == Case::CylinderTwoPositive) {
        let o = &e.obstruction;
        let r = obstruction_rank(o.rank_in_leaf, o.normal_index, o.kernel_dim).map_err(|e| e.to_string())?;
        ensure(r == 1, || format!("{} has obstruction rank {r}", e.id))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("{profiles} profiles, CZ shifts on [-5, 5], rank 1 on all cylinders"))
}

fn truncation() -> Truncation {
    Truncation::new(3, 3, ratio::parse("5/2").unwrap()).unwrap()
}

fn torsion_of(doc: &CountDocument) -> Result<(TorsionOrder, AlgebraElement), String> {
    let (gens, counts) = doc.resolve().map_err(|e| e.to_string())?;
    let order = sft_lab::algebra::torsion_order(&gens, &counts, &truncation()).map_err(|e| e.to_string())?;
    let image = match &order {
        TorsionOrder::Certified { certificate, .. } => apply_d(&gens, &counts, certificate, &truncation()),
        TorsionOrder::Unknown => AlgebraElement::zero(),
    };
    Ok((order, image))
}

fn torsion_engine(model: &Model) -> Outcome {
    let start = Instant::now();
    let entries = classify_all(model, Convention::Mixed);
    let without = twin_count_document(model, &entries, false).map_err(|e| e.to_string())?;
    let sporadic_key = sporadic_signature(model).map_err(|e| e.to_string())?.floors[0].components[0].positive_ends[0].clone();
    let derived = twin_count_document(model, &entries, true).map_err(|e| e.to_string())?;
    ensure(matches!(torsion_of(&derived)?.0, TorsionOrder::Certified { order: 1, .. }), || "derived table has no order-one certificate".into())?;
    for scale in [1i64, 2, -3] {
        let mut doc = without.clone();
        doc.counts.push(sft_lab::algebra::CountEntry { genus: 1, positive: vec![sporadic_key.clone()], negative: vec![], count: ratio::int(scale) });
        let (order, image) = torsion_of(&doc)?;
        let TorsionOrder::Certified { order: 1, certificate } = order else { return Err(format!("count {scale}: no order-one certificate")) };
        ensure(image == AlgebraElement::monomial(Monomial::hbar_power(1), ratio::one()), || "D of the certificate is not ħ".into())?;
        let (gens, _) = doc.resolve().map_err(|e| e.to_string())?;
        let k = gens.index(&sporadic_key).map_err(|e| e.to_string())?;
        let lead = certificate.coefficient(&Monomial::var(k));
        ensure(lead == ratio::int(1) / ratio::int(scale), || format!("leading coefficient {lead} for count {scale}"))?;
    }
    ensure(torsion_of(&without)?.0 == TorsionOrder::Unknown, || "order without the sporadic count".into())?;
    let mut plane = without.clone();
    plane.counts.push(sft_lab::algebra::CountEntry { genus: 0, positive: vec![sporadic_key.clone()], negative: vec![], count: ratio::int(5) });
    ensure(matches!(torsion_of(&plane)?.0, TorsionOrder::Certified { order: 0, .. }), || "plane count does not give order 0".into())?;
    for seed in 0..100 {
        let mut r = rng(seed);
        let g = generators(&mut r, 4);
        let t = table(&mut r, &g, 5);
        ensure(apply_d_exact(&g, &t, &AlgebraElement::one()).is_zero(), || format!("D(1) != 0 at seed {seed}"))?;
        for _ in 0..20 {
            let Some(m) = monomial(&mut r, &g, 3) else { continue };
            let p = m.parity(&g);
            let d = apply_d_exact(&g, &t, &element(m));
            ensure(d.is_zero() || d.parity(&g) == Some(p.flip()), || format!("D is not odd at seed {seed}"))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("order 1 with counts 1, 2, -3; unknown without; 0 with a plane; 100 seeds in {elapsed:.2?}"))
}

/// Nonincreasing sequences of positive integers summing to n.
fn oracle_partitions(n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut stack = vec![(Vec::<u32>::new(), n, n)];
    while let Some((prefix, left, cap)) = stack.pop() {
        if left == 0 {
            out.push(prefix);
            continue;
        }
        for part in 1..=left.min(cap) {
            let mut next = prefix.clone();
            next.push(part);
            stack.push((next, left - part, part));
        }
    }
    out
}

/// Degree-d covers of a twice-punctured torus-like base with χ = 0, z interior
/// branch points, closing up to a surface of non-negative genus.
fn oracle_profiles(d: u32) -> BTreeSet<(u32, Vec<u32>)> {
    let mut out = BTreeSet::new();
    for first in oracle_partitions(d) {
        for second in oracle_partitions(d) {
            let mut fiber: Vec<u32> = first.iter().chain(&second).copied().collect();
            fiber.sort_unstable_by(|a, b| b.cmp(a));
            let n = fiber.len() as i64;
            for z in 0..=6u32 {
                let branching = z as i64 + 2 * d as i64 - n;
                let closed_euler = -(z as i64) + n;
                if (1..=6).contains(&branching) && closed_euler <= 2 && closed_euler % 2 == 0 {
                    out.insert((z, fiber.clone()));
                }
            }
        }
    }
    out
}

fn rigidity_sweep() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for d in 2..=5u32 {
        let profiles: Vec<BranchProfile> = enumerate_branch_profiles(d, 0, 2, 6).into_iter().filter(|bp| (1..=6).contains(&total_branching(bp))).collect();
        let ours: BTreeSet<(u32, Vec<u32>)> = profiles.iter().map(|bp| (bp.interior_vanishing, bp.puncture_multiplicities.clone())).collect();
        let oracle = oracle_profiles(d);
        ensure(ours == oracle, || format!("degree {d}: {} profiles, oracle {}", ours.len(), oracle.len()))?;
        for bp in &profiles {
            let r = super_rigidity_verdict(bp);
            ensure(r.budget < ratio::int(0) && r.verdict == Verdict::InjectiveForced, || format!("{bp:?}: {r:?}"))?;
            checked += 1;
        }
        for bp in enumerate_branch_profiles(d, 0, 2, 0).into_iter().filter(|bp| total_branching(bp) == 0) {
            let r = super_rigidity_verdict(&bp);
            ensure(r.note.is_some() && r.verdict == Verdict::Inconclusive, || format!("unbranched {bp:?}: {r:?}"))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("{checked} branched profiles injective_forced, matching the oracle"))
}

fn kernel_bound_brute_force() -> Outcome {
    let start = Instant::now();
    for c in -3..=3i64 {
        for g in 0..=4u32 {
            let brute = (0..=20i64.min(g as i64))
                .flat_map(|k| (0..=20i64).step_by(2).map(move |l| (k, l)))
                .filter(|(k, l)| 2 * k + l > 2 * c)
                .map(|(k, l)| k + l)
                .min()
                .unwrap();
            ensure(kernel_bound(c, g) == brute, || format!("c = {c}, G = {g}: {} vs {brute}", kernel_bound(c, g)))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok("35 cases match".into())
}

struct Memo(HashMap<CyclicWord, TensorSum>);

impl Memo {
    fn delta(&mut self, w: &CyclicWord) -> &TensorSum {
        self.0.entry(w.clone()).or_insert_with(|| cobracket(w))
    }
}

fn co_jacobi_holds(memo: &mut Memo, w: &CyclicWord) -> bool {
    let outer: Vec<_> = memo.delta(w).pairs().iter().map(|((x, y), c)| (x.clone(), y.clone(), *c)).collect();
    let mut sum: BTreeMap<(CyclicWord, CyclicWord, CyclicWord), i64> = BTreeMap::new();
    for (x, y, c) in outer {
        for ((u, v), e) in memo.delta(&x).pairs() {
            for t in [(u.clone(), v.clone(), y.clone()), (y.clone(), u.clone(), v.clone()), (v.clone(), y.clone(), u.clone())] {
                *sum.entry(t).or_insert(0) += c * e;
            }
        }
    }
    sum.values().all(|&v| v == 0)
}

fn string_topology() -> Outcome {
    let start = Instant::now();
    let g = SurfaceGroup::new(2).map_err(|e| e.to_string())?;
    let a1 = g.canonicalize_str("a1").map_err(|e| e.to_string())?;
    ensure(cobracket(&a1).is_zero(), || "Δ(a1) is not zero".into())?;
    let classes: Vec<CyclicWord> = (1..=6).flat_map(|n| classes_of_length(g, n)).collect();
    let mut memo = Memo(HashMap::new());
    let mut registry = Registry::default();
    for w in &classes {
        let d = memo.delta(w).clone();
        ensure(d.swapped() == d.negated(), || format!("co-antisymmetry fails on {w}"))?;
        ensure(co_jacobi_holds(&mut memo, w), || format!("co-Jacobi fails on {w}"))?;
        let rel = sporadic_count(w, &mut registry);
        ensure(rel == sporadic_count_direct(w), || format!("sporadic counts disagree on {w}"))?;
    }
    let poly = Polygon::new(g);
    let (mut sampled, mut with_crossings) = (0, 0);
    let mut min_margin = f64::INFINITY;
    for w in classes.iter().filter(|w| w.power_exponent() == 1).step_by(53) {
        let Some(cs) = chords(&poly, w.letters()) else { continue };
        let xs = chord_crossings(&cs);
        let margin = xs.iter().map(|x| x.margin).fold(f64::INFINITY, f64::min);
        if margin < 1e-9 {
            continue;
        }
        min_margin = min_margin.min(margin);
        ensure(self_intersection_pairs(w).len() == xs.len(), || format!("{w}: {} crossings, geodesic has {}", self_intersection_pairs(w).len(), xs.len()))?;
        sampled += 1;
        with_crossings += (!xs.is_empty()) as usize;
    }
    ensure(sampled >= 20, || format!("only {sampled} classes sampled"))?;
    let witness = (1..=8).flat_map(|n| classes_of_length(g, n)).find(|w| sporadic_count_direct(w) != 0);
    let witness = witness.ok_or("no class with nonzero sporadic count up to length 8")?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!(
        "{} classes; {sampled} geodesics ({with_crossings} self-crossing, margin ≥ {min_margin:.1e}); d = {} on {witness}; {elapsed:.2?}",
        classes.len(),
        sporadic_count_direct(&witness)
    ))
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let cli = Cli::try_parse_from(std::iter::once("sft-lab").chain(args.iter().copied())).map_err(|e| e.to_string())?;
    execute(&cli).map_err(|e| e.to_string())
}

fn round_trip<T: serde::de::DeserializeOwned + serde::Serialize + PartialEq>(text: &str) -> Result<(), String> {
    let parsed: T = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let again: T = serde_json::from_str(&render(&parsed)).map_err(|e| e.to_string())?;
    ensure(parsed == again && render(&parsed) == text, || "document does not round-trip".into())
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["enumerate"],
        &["torsion"],
        &["cobracket", "--word", "a1b2A1B2"],
        &["--seed", "3", "cobracket", "--sample", "8"],
        &["rigidity", "--sweep"],
    ];
    for args in runs {
        let (a, b) = (run_cli(args)?, run_cli(args)?);
        ensure(a == b, || format!("{args:?} differs between runs"))?;
    }
    round_trip::<Manifest<EnumerateResult>>(&run_cli(&["enumerate"])?)?;
    round_trip::<Manifest<TorsionResult>>(&run_cli(&["torsion"])?)?;
    round_trip::<Manifest<CobracketResult>>(&run_cli(&["cobracket", "--word", "a1b2A1B2"])?)?;
    round_trip::<Manifest<RigidityResult>>(&run_cli(&["rigidity", "--sweep"])?)?;
    round_trip::<Manifest<serde_json::Value>>(&run_cli(&["index", "normal", "--genus", "1", "--positive", "1,0,0"])?)?;
    Ok("five commands byte-identical, four document types round-trip".into())
}

fn main() {
    let model = reference();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("classification counts", Box::new(|| classification_counts(&model))),
        ("twin cancellation", Box::new(|| twin_cancellation(&model))),
        ("index suite", Box::new(|| index_suite(&model))),
        ("torsion engine", Box::new(|| torsion_engine(&model))),
        ("super-rigidity sweep", Box::new(rigidity_sweep)),
        ("kernel bound", Box::new(kernel_bound_brute_force)),
        ("string topology", Box::new(string_topology)),
        ("determinism and round-trip", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {}: {name} ({detail})", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name} ({why})", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
