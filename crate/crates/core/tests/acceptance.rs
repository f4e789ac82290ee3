//! Acceptance criteria 1-9, one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symmaxent::action::{orbit_count_formula, GroupAction, OrbitCounts};
use symmaxent::builder::{greedy_build, stepwise_build, verify_halting, BuilderConfig, PoolChoice, TermSpace};
use symmaxent::distribution::Distribution;
use symmaxent::features::{orbit_indicator_from_signatures, orbit_signature, PoolTag, Term};
use symmaxent::generators::{check_invariance, GeneratorSet};
use symmaxent::group::GroupSpec;
use symmaxent::imagery::{aggregate, extract_counts, preprocess, ImageGray, PreprocessConfig};
use symmaxent::lattice::LatticeSpace;
use symmaxent::maxent::{
    density_from_coefficients, entropy, kl, loglik_gradient_check, solve_maxent, ConstraintSet, SolverOptions,
};
use symmaxent::order::MonomialOrder;
use symmaxent::span::vector_mod;

type Outcome = Result<String, String>;

fn micro_action(levels: usize) -> GroupAction {
    GroupAction::new(GroupSpec::microimage(), LatticeSpace::microimages(levels, 2).unwrap()).unwrap()
}

fn micro_terms() -> TermSpace {
    TermSpace::new(micro_action(4), GeneratorSet::microimage()).unwrap()
}

fn random_positive(rng: &mut ChaCha8Rng, k: usize) -> Distribution {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    Distribution::from_weights(&w).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for levels in [2, 4, 6] {
        let action = micro_action(levels);
        let got = OrbitCounts::from_histogram(&action.orbits().size_histogram());
        let want = orbit_count_formula(levels).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("L={levels}: enumerated {got:?}, formula {want:?}"))?;
        lines.push(format!("L={levels}: M={}", got.total));
    }
    let c4 = OrbitCounts::from_histogram(&micro_action(4).orbits().size_histogram());
    ensure(
        (c4.total, c4.size2, c4.size4, c4.size8, c4.size16) == (31, 4, 4, 17, 6),
        || format!("L=4 gives {c4:?}"),
    )?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("{}; sizes at L=4 (2:4, 4:4, 8:17, 16:6); {elapsed:.2?}", lines.join(", ")))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let gens = GeneratorSet::microimage();
    let group = GroupSpec::microimage();
    ensure(group.order() == 16, || format!("group order {}", group.order()))?;
    for (i, f) in gens.polys().iter().enumerate() {
        for g in group.elements() {
            // p(g x) expanded symbolically equals p
            ensure(f.linear_substitute(&g.matrix) == *f, || format!("f{} not fixed by {}", i + 1, g.label.as_deref().unwrap_or("?")))?;
        }
        ensure(check_invariance(f, &group).unwrap(), || format!("f{} fails the generator check", i + 1))?;
    }
    let q = gens.relation_composed().ok_or("no relation")?;
    ensure(q.is_zero(), || format!("q(f) has {} surviving terms", q.num_terms()))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("5 generators fixed by all 16 elements, q(f1..f5) = 0 over Q; {elapsed:.2?}"))
}

fn criterion_3() -> Outcome {
    let invariant = "1,f1,f2,f3,f4,f5,f1^2,f1*f2,f2^2,f1*f3,f2*f3,f3^2,f1*f4,f2*f4,f3*f4";
    let ordinary = "1,x1,x2,x3,x4,x1^2,x1*x2,x2^2,x1*x3,x2*x3,x3^2,x1*x4,x2*x4,x3*x4,x4^2";
    for (n, symbol, want) in [(5, "f", invariant), (4, "x", ordinary)] {
        let got: Vec<String> = MonomialOrder::graded_lex(n)
            .enumerate(None, 15)
            .unwrap()
            .iter()
            .map(|a| a.pretty(symbol))
            .collect();
        ensure(got.join(",") == want, || format!("{symbol}: got {}", got.join(",")))?;
    }
    Ok("first 15 invariant and ordinary monomials match".into())
}

fn criterion_4() -> Outcome {
    let action = micro_action(4);
    let gens = GeneratorSet::microimage();
    let sigs = orbit_signature(&gens, &action).map_err(|e| e.to_string())?;
    ensure(sigs.len() == 31, || format!("{} signatures", sigs.len()))?;
    for o in 0..sigs.len() {
        let ind = orbit_indicator_from_signatures(o, &sigs, &action).map_err(|e| e.to_string())?;
        for (k, v) in ind.iter().enumerate() {
            let on = action.orbits().orbit_of(k) == o;
            ensure((on && v.is_one()) || (!on && v.is_zero()), || {
                format!("indicator {o} is {v} at point {k}")
            })?;
        }
    }
    Ok("31 distinct signatures; indicators exactly 1 on-orbit, 0 off-orbit".into())
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let space = micro_terms();
    let action = space.action();
    let order = space.order(PoolTag::Invariant);
    let pool: Vec<Term> = (1..60)
        .map(|r| Term::new(PoolTag::Invariant, order.unrank(r)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = SolverOptions::default();
    let (mut worst_sup, mut worst_res, mut worst_rey) = (0.0f64, 0.0f64, 0.0f64);
    for trial in 0..50 {
        let size = rng.random_range(1..10usize);
        let mut terms = vec![space.constant(PoolTag::Invariant)];
        let mut span = space.span_of(&[]).unwrap();
        while terms.len() <= size {
            let t = &pool[rng.random_range(0..pool.len())];
            let v = vector_mod(&space.column(t).unwrap().exact);
            if span.push(&v) {
                terms.push(t.clone());
            }
        }
        let columns: Vec<Vec<f64>> = terms.iter().map(|t| space.column(t).unwrap().values.clone()).collect();
        // coefficients in units of each column's spread
        let coef: Vec<f64> = columns[1..]
            .iter()
            .map(|c| {
                let m = c.iter().sum::<f64>() / c.len() as f64;
                let sd = (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / c.len() as f64).sqrt();
                rng.random_range(-1.0..1.0) / (sd * size as f64)
            })
            .collect();
        let truth = density_from_coefficients(&columns, &coef);
        let cs = ConstraintSet::from_target(terms, columns, &truth).map_err(|e| e.to_string())?;
        let (model, _) = solve_maxent(&cs, &opts).map_err(|e| format!("trial {trial}: {e}"))?;
        let sup = model.density.sup_distance(&truth);
        let rey = action.reynolds_apply(model.density.probs()).unwrap();
        let rey_err = rey
            .iter()
            .zip(model.density.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst_sup = worst_sup.max(sup);
        worst_res = worst_res.max(model.residual_inf);
        worst_rey = worst_rey.max(rey_err);
    }
    ensure(worst_sup <= 1e-8, || format!("sup error {worst_sup:.3e}"))?;
    ensure(worst_res <= 1e-10, || format!("residual {worst_res:.3e}"))?;
    ensure(worst_rey <= 1e-9, || format!("Reynolds defect {worst_rey:.3e}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "50 targets: sup {worst_sup:.1e}, residual {worst_res:.1e}, ‖Rp−p‖ {worst_rey:.1e}; {elapsed:.2?}"
    ))
}

fn criterion_6() -> Outcome {
    let action = micro_action(4);
    let log_g = (action.group().order() as f64).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        // sparse draws exercise the zero-probability conventions too
        let w: Vec<f64> = (0..256)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
            .collect();
        let p = Distribution::from_weights(&w).unwrap();
        let rp = action.symmetrize_distribution(&p).unwrap();
        let (h, hr) = (entropy(&p), entropy(&rp));
        ensure(h <= hr + 1e-9 && hr <= h + log_g + 1e-9, || {
            format!("trial {trial}: H(P)={h}, H(R*P)={hr}")
        })?;
        let q = action
            .symmetrize_distribution(&random_positive(&mut rng, 256))
            .unwrap();
        let lhs = kl(&p, &q).unwrap();
        let rhs = kl(&p, &rp).unwrap() + kl(&rp, &q).unwrap();
        worst = worst.max((lhs - rhs).abs());
        ensure((lhs - rhs).abs() <= 1e-9, || format!("trial {trial}: {lhs} vs {rhs}"))?;
    }
    Ok(format!("100 distributions; max decomposition gap {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let space = micro_terms();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let config = BuilderConfig {
        lookahead: 3,
        ..Default::default()
    };
    let (mut max_steps, mut worst_sup) = (0, 0.0f64);
    for trial in 0..20 {
        let target = random_positive(&mut rng, 256);
        let path = greedy_build(&space, &target, &config).map_err(|e| format!("trial {trial}: {e}"))?;
        let report = verify_halting(&path, space.action(), &target).map_err(|e| e.to_string())?;
        ensure(report.passed && report.sup_error.is_some(), || format!("trial {trial}: {report:?}"))?;
        for w in path.steps.windows(2) {
            ensure(w[1].kl < w[0].kl && w[1].entropy < w[0].entropy, || {
                format!("trial {trial}: step {} is not a strict decrease", w[1].l)
            })?;
        }
        max_steps = max_steps.max(path.len());
        worst_sup = worst_sup.max(report.sup_error.unwrap());
    }
    ensure(max_steps <= 30, || format!("{max_steps} steps"))?;
    Ok(format!(
        "20 targets reach R*(P) within {worst_sup:.1e} in ≤ {max_steps} steps, D and H strictly decreasing; {:.2?}",
        start.elapsed()
    ))
}

fn criterion_8() -> Outcome {
    let space = micro_terms();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let order = space.order(PoolTag::Invariant);
    let mut worst = 0.0f64;
    for trial in 0..10 {
        let truth = random_positive(&mut rng, 256);
        let cdf: Vec<f64> = truth
            .probs()
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let mut counts = vec![0u64; 256];
        for _ in 0..20_000 {
            let u: f64 = rng.random();
            counts[cdf.partition_point(|&c| c < u).min(255)] += 1;
        }
        let emp = Distribution::from_counts(&counts).unwrap();
        let mut terms = vec![space.constant(PoolTag::Invariant)];
        let mut span = space.span_of(&[]).unwrap();
        let mut r = 1;
        while terms.len() < 3 + trial {
            let t = Term::new(PoolTag::Invariant, order.unrank(r));
            r += 1;
            if span.push(&vector_mod(&space.column(&t).unwrap().exact)) {
                terms.push(t);
            }
        }
        let cs = space.constraints(&terms, &emp).map_err(|e| e.to_string())?;
        let (model, _) = solve_maxent(&cs, &SolverOptions::default()).map_err(|e| e.to_string())?;
        let check = loglik_gradient_check(&model, cs.columns(), &counts).map_err(|e| e.to_string())?;
        worst = worst.max(check.relative);
    }
    ensure(worst <= 1e-8, || format!("relative gradient {worst:.3e}"))?;
    Ok(format!("10 sampled fits, relative ‖∇ℓ‖∞ ≤ {worst:.1e}"))
}

/// A smooth random field plus noise, as 16-bit intensities.
fn synthetic_image(rng: &mut ChaCha8Rng, side: usize) -> ImageGray {
    let noise: Vec<f64> = (0..side * side).map(|_| rng.random::<f64>()).collect();
    let mut px = Vec::with_capacity(side * side);
    for r in 0..side {
        for c in 0..side {
            let mut acc = 0.0;
            for dr in [-1i64, 0, 1] {
                for dc in [-1i64, 0, 1] {
                    let rr = (r as i64 + dr).clamp(0, side as i64 - 1) as usize;
                    let cc = (c as i64 + dc).clamp(0, side as i64 - 1) as usize;
                    acc += noise[rr * side + cc];
                }
            }
            let v = acc / 9.0 * 0.5 + noise[r * side + c] * 0.5;
            px.push((v * 60000.0) as u16);
        }
    }
    ImageGray::new(side, side, px).unwrap()
}

const BASE_IMAGES: usize = 8;

fn criterion_9() -> Outcome {
    let space = micro_terms();
    let lattice = space.action().space();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = PreprocessConfig::default();
    let mut counts = Vec::new();
    for _ in 0..BASE_IMAGES {
        let q = preprocess(&synthetic_image(&mut rng, 32), &cfg).map_err(|e| e.to_string())?;
        for v in q.symmetric_variants() {
            counts.push(extract_counts(&v, 2, lattice).map_err(|e| e.to_string())?);
        }
    }
    let target = aggregate(&counts).map_err(|e| e.to_string())?.probs;
    let missing = target.probs().iter().filter(|&&p| p == 0.0).count();
    ensure(missing == 0, || format!("corpus misses {missing} microimages"))?;
    let sym = space.action().symmetrize_distribution(&target).unwrap();
    ensure(sym.sup_distance(&target) <= 1e-15, || "corpus is not G-invariant".into())?;

    let stop = 1e-6;
    let invariant = stepwise_build(
        &space,
        &sym,
        &BuilderConfig {
            pool: PoolChoice::Invariant,
            kl_stop: stop,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let inv_steps = invariant.len();
    ensure(invariant.final_step().kl <= stop, || {
        format!("invariant pool stopped at kl {:.3e}", invariant.final_step().kl)
    })?;
    let ordinary = stepwise_build(
        &space,
        &sym,
        &BuilderConfig {
            pool: PoolChoice::Ordinary,
            kl_stop: stop,
            max_terms: Some(inv_steps),
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let ord_kl = ordinary.final_step().kl;
    ensure(ord_kl > stop, || format!("ordinary pool reached kl {ord_kl:.3e} within {inv_steps} steps"))?;
    Ok(format!(
        "{}-image corpus: invariant pool reaches kl ≤ 1e-6 in {inv_steps} steps; ordinary pool at {inv_steps} steps has kl {ord_kl:.3e}",
        counts.len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("orbit counts", criterion_1),
        ("generator certification", criterion_2),
        ("monomial order conformance", criterion_3),
        ("orbit separation", criterion_4),
        ("maxent recovery", criterion_5),
        ("entropy and KL identities", criterion_6),
        ("halting", criterion_7),
        ("likelihood equivalence", criterion_8),
        ("invariant vs ordinary pool", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
