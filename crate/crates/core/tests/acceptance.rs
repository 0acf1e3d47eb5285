//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qrf_core::catalysis::{
    pairwise_fixture, pairwise_report, controlled_unitary, correlation_balance, finite_group_check,
    generate_admissible_scenario, run_suite, suite_parameters,
};
use qrf_core::channel::{diamond_distance, Channel};
use qrf_core::linalg::{
    diag_real, fidelity, haar_unitary, identity, max_abs_diff, partial_trace, projector, random_density,
    random_density_rank, random_pure_state, random_pure_vector, tensor, trace_distance,
};
use qrf_core::par::Exec;
use qrf_core::refframe::{catalytic_channel, phase_reference_scenario, FrameConfig};
use qrf_core::repr::{symmetric_defining_representation, FiniteGroup, FiniteGroupRep};
use qrf_core::words::{
    f_w, find_simultaneous_unitary, word_trace, UnitarySearchConfig, WiegmannConfig, WiegmannVerdict, Word,
};
use qrf_core::{CMat, Result};

type Outcome = Result<(Vec<String>, String)>;

fn run(n: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (mut failures, summary) = match result {
        Ok(r) => r,
        Err(e) => (vec![format!("error: {e}")], String::new()),
    };
    if elapsed > limit {
        failures.push(format!("took {elapsed:.1?}, limit {limit:?}"));
    }
    let ok = failures.is_empty();
    println!(
        "criterion {n} [{name}]: {} ({summary}; {:.2?})",
        if ok { "PASS" } else { "FAIL" },
        elapsed
    );
    for f in failures.iter().take(10) {
        println!("    {f}");
    }
    ok
}

fn check(failures: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        failures.push(msg());
    }
}

fn residual(u: &CMat, a: &[CMat], b: &[CMat]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| max_abs_diff(&(u * x * u.adjoint()), y))
        .fold(0.0, f64::max)
}

fn pairwise_triple() -> Outcome {
    let mut fail = Vec::new();
    let f = pairwise_fixture();
    let tr = |t: &[CMat; 3]| (&t[0] * &t[1] * &t[2]).trace();
    let gap = (tr(&f.b) - tr(&f.a)).norm();
    check(&mut fail, (gap - 2.0 * 3f64.sqrt()).abs() <= 1e-9, || format!("gap {gap}"));

    let ucfg = UnitarySearchConfig::default();
    let mut worst_pair: f64 = 0.0;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let a = [f.a[i].clone(), f.a[j].clone()];
        let b = [f.b[i].clone(), f.b[j].clone()];
        let s = find_simultaneous_unitary(&a, &b, &ucfg, Exec::default())?;
        let r = residual(&s.unitary, &a, &b);
        worst_pair = worst_pair.max(r);
        check(&mut fail, s.success && r < 1e-6, || format!("pair ({i},{j}) residual {r:e}"));
    }

    let rep = pairwise_report(&WiegmannConfig::default(), &ucfg, Exec::default())?;
    match &rep.triple {
        WiegmannVerdict::Distinguished { word, .. } => {
            check(&mut fail, word.to_string() == "x0 x1 x2", || format!("triple separated by `{word}`"))
        }
        v => fail.push(format!("triple not distinguished: {v:?}")),
    }
    let (ta, tb) = f.tensored();
    let s = find_simultaneous_unitary(&ta, &tb, &ucfg, Exec::default())?;
    let r9 = residual(&s.unitary, &ta, &tb);
    check(&mut fail, s.success && r9 < 1e-6, || format!("tensored residual {r9:e}"));
    check(&mut fail, rep.passed(1e-6), || "pairwise report does not pass".into());
    Ok((fail, format!("gap {gap:.12}, worst pair residual {worst_pair:.1e}, 9x9 residual {r9:.1e}")))
}

fn exact_catalysis_suite() -> Outcome {
    let mut fail = Vec::new();
    let entries = run_suite(100, 0, &UnitarySearchConfig::default(), Exec::default());
    let (mut worst_v, mut worst_i): (f64, f64) = (0.0, 0.0);
    let mut shapes = std::collections::BTreeSet::new();
    for (k, e) in entries.iter().enumerate() {
        shapes.insert((e.d_s, e.d_c, e.m));
        check(&mut fail, (e.d_s, e.d_c, e.m) == suite_parameters(k), || format!("entry {k} has unexpected shape"));
        let v = e.scenario.generator_residuals.iter().copied().fold(e.scenario.state_residual, f64::max);
        worst_v = worst_v.max(v);
        check(&mut fail, v <= 1e-10, || format!("seed {}: scenario residual {v:e}", e.seed));
        let Some(it) = &e.intertwiner else {
            fail.push(format!("seed {}: {:?}", e.seed, e.error));
            continue;
        };
        // recompute the intertwiner residuals from the regenerated scenario
        let sc = generate_admissible_scenario(e.d_s, e.d_c, e.m, e.seed)?;
        let v = &it.v;
        let mut r = max_abs_diff(&(v * &sc.rho_s * v.adjoint()), &sc.rho_s_prime);
        for (x, y) in sc.symmetry.generators("S")?.iter().zip(sc.symmetry.generators("S'")?) {
            r = r.max(max_abs_diff(&(v * x), &(y * v)));
        }
        r = r.max(max_abs_diff(&(v.adjoint() * v), &identity(e.d_s)));
        worst_i = worst_i.max(r);
        check(&mut fail, it.success && r <= 1e-7, || format!("seed {}: intertwiner residual {r:e}", e.seed));
    }
    check(&mut fail, shapes.len() == 12, || format!("only {} shapes covered", shapes.len()));
    let passed = entries.iter().filter(|e| e.passed()).count();
    Ok((fail, format!("{passed}/100, worst scenario residual {worst_v:.1e}, worst intertwiner residual {worst_i:.1e}")))
}

fn random_word(rng: &mut ChaCha8Rng, nvars: usize, max_len: usize, max_exp: u32) -> Word {
    // one variable admits only single-letter canonical words
    let len = if nvars == 1 { 1 } else { rng.random_range(1..=max_len) };
    let mut letters: Vec<(usize, u32)> = Vec::new();
    while letters.len() < len {
        let v = rng.random_range(0..nvars);
        if letters.last().is_some_and(|l| l.0 == v) {
            continue;
        }
        letters.push((v, rng.random_range(0..=max_exp)));
    }
    Word::new(&letters, nvars).expect("no repeated neighbours")
}

fn word_functions() -> Outcome {
    let mut fail = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_fact: f64 = 0.0;
    for k in 0..200 {
        let nvars = rng.random_range(2..=3);
        let (d1, d2) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let a: Vec<CMat> = (0..nvars)
            .map(|_| random_density_rank(d1, rng.random_range(1..=d1), &mut rng))
            .collect();
        let c: Vec<CMat> = (0..nvars)
            .map(|_| random_density_rank(d2, rng.random_range(1..=d2), &mut rng))
            .collect();
        let ac: Vec<CMat> = a.iter().zip(&c).map(|(x, y)| tensor(x, y)).collect();
        let w = random_word(&mut rng, nvars, 5, 3);
        let s: Vec<f64> = (0..w.len()).map(|_| rng.random_range(0.0..3.0)).collect();
        let lhs = f_w(&w, &s, &ac)?;
        let rhs = f_w(&w, &s, &a)? * f_w(&w, &s, &c)?;
        let e = (lhs - rhs).norm();
        worst_fact = worst_fact.max(e);
        check(&mut fail, e <= 1e-9, || format!("tuple {k}: factorization off by {e:e} on `{w}`"));
    }

    let mut rank_cases = 0;
    for k in 0..100 {
        let d = rng.random_range(2..=4);
        let nvars = rng.random_range(2..=3);
        let r0 = rng.random_range(1..=d);
        let mut tuple = vec![random_density_rank(d, r0, &mut rng)];
        tuple.extend((1..nvars).map(|_| random_density(d, &mut rng)));
        let w = random_word(&mut rng, nvars, 5, 3);
        let value = f_w(&w, &vec![0.0; w.len()], &tuple)?;
        let expect = if w.uses(0) { r0 } else { d };
        let rounded = value.re.round();
        let ok = (value.re - rounded).abs() <= 1e-8 && value.im.abs() <= 1e-8 && rounded as usize == expect;
        check(&mut fail, ok, || format!("case {k}: f_w(0|…) = {value} on `{w}`, expected {expect}"));
        rank_cases += 1;
    }

    let mut worst_int: f64 = 0.0;
    for k in 0..100 {
        let d = rng.random_range(2..=4);
        let nvars = rng.random_range(1..=3);
        let tuple: Vec<CMat> = (0..nvars)
            .map(|_| random_density_rank(d, rng.random_range(1..=d), &mut rng).scale(rng.random_range(0.5..3.0)))
            .collect();
        let w = random_word(&mut rng, nvars, 6, 3);
        let e = (f_w(&w, &w.exponents(), &tuple)? - word_trace(&w, &tuple)?).norm();
        worst_int = worst_int.max(e);
        check(&mut fail, e <= 1e-9, || format!("case {k}: integer point off by {e:e} on `{w}`"));
    }
    Ok((
        fail,
        format!("factorization {worst_fact:.1e} on 200 tuples, {rank_cases} rank cases, integer points {worst_int:.1e}"),
    ))
}

fn back_action() -> Outcome {
    let mut fail = Vec::new();
    let mut last = f64::INFINITY;
    let mut notes = Vec::new();
    for n in [2usize, 4, 8, 16] {
        let sc = phase_reference_scenario(n, FRAC_PI_2)?;
        let out = catalytic_channel(&sc, &FrameConfig::default(), Exec::default())?;
        let r = &out.report;
        let eps = r.epsilon;
        let bound = 2.0 * (2.0 * eps).sqrt();
        check(&mut fail, r.diamond.converged(), || format!("N={n}: diamond norm not converged"));
        check(&mut fail, r.samples.len() == 100, || format!("N={n}: {} samples", r.samples.len()));
        for (k, s) in r.samples.iter().enumerate() {
            check(&mut fail, s.distance <= bound + 1e-5, || format!("N={n} sample {k}: D {} > {bound}", s.distance));
            check(&mut fail, s.fidelity >= 1.0 - eps - 1e-6, || format!("N={n} sample {k}: F {}", s.fidelity));
            check(&mut fail, s.drift_distance <= (2.0 * eps).sqrt() + 1e-6, || {
                format!("N={n} sample {k}: drift distance {}", s.drift_distance)
            });
        }
        // the returned channel on fresh inputs
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + n as u64);
        let mut worst: f64 = 0.0;
        for k in 0..100 {
            let rho = if k < 64 { projector(&random_pure_vector(2, &mut rng)) } else { random_density(2, &mut rng) };
            let fin = out.channel.apply(&tensor(&rho, &sc.sigma_c))?;
            let c_part = partial_trace(&fin, &[2, n], &[1])?;
            let d = trace_distance(&c_part, &sc.sigma_c)?;
            worst = worst.max(d);
            check(&mut fail, d <= bound + 1e-5, || format!("N={n} fresh input {k}: D {d} > {bound}"));
        }
        check(&mut fail, eps <= last, || format!("epsilon increases at N={n}"));
        last = eps;
        notes.push(format!("N={n}: eps {eps:.4}, worst {worst:.3} <= {bound:.3}"));
    }
    Ok((fail, notes.join(", ")))
}

/// `‖U·U† − V·V†‖⋄ = 2√(1 − r²)`, `r` the distance from the origin to the
/// convex hull of the spectrum of `U†V`.
fn unitary_oracle(u: &CMat, v: &CMat) -> f64 {
    let w = u.adjoint() * v;
    let eig = w.schur().eigenvalues().expect("complex Schur form is triangular");
    let mut angles: Vec<f64> = eig.iter().map(|z| z.arg()).collect();
    angles.sort_by(f64::total_cmp);
    let mut gap: f64 = angles[0] + 2.0 * PI - angles[angles.len() - 1];
    for p in angles.windows(2) {
        gap = gap.max(p[1] - p[0]);
    }
    let r = (-(gap / 2.0).cos()).max(0.0);
    2.0 * (1.0 - r * r).max(0.0).sqrt()
}

fn diamond_oracle() -> Outcome {
    let mut fail = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut worst_same): (f64, f64) = (0.0, 0.0);
    for k in 0..20 {
        let d = if k < 10 { 2 } else { 3 };
        let (u, v) = (haar_unitary(d, &mut rng), haar_unitary(d, &mut rng));
        let (tu, tv) = (Channel::unitary(&u)?, Channel::unitary(&v)?);
        let got = diamond_distance(&tu, &tv)?;
        let e = (got.value - unitary_oracle(&u, &v)).abs();
        worst = worst.max(e);
        check(&mut fail, e <= 5e-6, || format!("pair {k}: error {e:e} ({:?})", got.status));
        let same = diamond_distance(&tu, &tu)?.value;
        worst_same = worst_same.max(same);
        check(&mut fail, same <= 1e-8, || format!("pair {k}: identical channels at {same:e}"));
    }
    Ok((fail, format!("worst error {worst:.1e}, identical {worst_same:.1e}")))
}

fn finite_groups() -> Outcome {
    let mut fail = Vec::new();
    let z2 = FiniteGroupRep::new(FiniteGroup::cyclic(2), vec![identity(2), diag_real(&[1.0, -1.0])])?;
    let s3 = symmetric_defining_representation(3);
    let mut notes = Vec::new();
    for (name, rep) in [("Z2", &z2), ("S3", &s3)] {
        let c = finite_group_check(name, rep, 20, 6, 1e-9)?;
        check(&mut fail, c.targets == 20, || format!("{name}: {} targets", c.targets));
        check(&mut fail, c.identity_deviation <= 1e-10, || format!("{name}: pointer {:e}", c.identity_deviation));
        check(&mut fail, c.covariance_violation <= 1e-9, || format!("{name}: covariance {:e}", c.covariance_violation));
        check(&mut fail, c.swap_deviation <= 1e-10, || format!("{name}: swap {:e}", c.swap_deviation));
        check(&mut fail, c.tp_defect <= 1e-10, || format!("{name}: tp {:e}", c.tp_defect));
        notes.push(format!(
            "{name}: pointer {:.0e}, covariance {:.0e}, swap {:.0e}",
            c.identity_deviation, c.covariance_violation, c.swap_deviation
        ));
    }
    Ok((fail, notes.join(", ")))
}

fn correlation() -> Outcome {
    let mut fail = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut max_i: f64 = 0.0;
    for k in 0..60 {
        let (d_se, d_c) = (rng.random_range(2..=4), rng.random_range(2..=3));
        let rho = match k % 3 {
            0 => random_pure_state(d_se, &mut rng),
            1 => random_density_rank(d_se, 1 + rng.random_range(0..d_se), &mut rng),
            _ => random_density(d_se, &mut rng),
        };
        let p: Vec<f64> = (0..d_c).map(|_| rng.random_range(0.05..1.0)).collect();
        let t: f64 = p.iter().sum();
        let sigma = diag_real(&p.iter().map(|x| x / t).collect::<Vec<_>>());
        let blocks: Vec<CMat> = (0..d_c).map(|_| haar_unitary(d_se, &mut rng)).collect();
        let u = controlled_unitary(&blocks)?;
        let r = correlation_balance(&u, &rho, &sigma, 1e-10)?;
        worst = worst.max(r.balance_residual);
        max_i = max_i.max(r.mutual_information);
        check(&mut fail, r.marginal_preserved, || format!("case {k}: marginal moved {:e}", r.marginal_deviation));
        check(&mut fail, r.balance_residual <= 1e-8, || format!("case {k}: |I − ΔH| = {:e}", r.balance_residual));
        check(&mut fail, r.rank_after >= r.rank_before, || format!("case {k}: rank fell"));
    }
    check(&mut fail, max_i > 0.1, || format!("constructed unitaries barely correlate (I ≤ {max_i})"));

    let mut worst_exact: f64 = 0.0;
    for e in run_suite(100, 0, &UnitarySearchConfig::default(), Exec::default()) {
        let Some(r) = &e.correlation else {
            fail.push(format!("seed {}: {:?}", e.seed, e.error));
            continue;
        };
        let m = r.mutual_information.abs().max(r.entropy_change.abs());
        worst_exact = worst_exact.max(m);
        check(&mut fail, m <= 1e-9, || format!("seed {}: I = {:e}, ΔH = {:e}", e.seed, r.mutual_information, r.entropy_change));
        check(&mut fail, r.rank_after >= r.rank_before, || format!("seed {}: rank fell", e.seed));
    }
    Ok((fail, format!("balance {worst:.1e} (max I {max_i:.2}), exact scenarios {worst_exact:.1e}")))
}

fn metrics() -> Outcome {
    let mut fail = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut pairs = 0;
    let mut worst_dp: f64 = f64::NEG_INFINITY;
    for block in 0..50 {
        let (d1, d2) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let d = d1 * d2;
        let d_out = rng.random_range(2..=4);
        // an isometry into d_out ⊗ r needs d_out · r ≥ d
        let t = Channel::random(d, d_out, rng.random_range(d.div_ceil(d_out)..=d), &mut rng)?;
        for k in 0..10 {
            let state = |rng: &mut ChaCha8Rng| match (block + k) % 3 {
                0 => random_pure_state(d, rng),
                1 => random_density_rank(d, 2, rng),
                _ => random_density(d, rng),
            };
            let (rho, sigma) = (state(&mut rng), state(&mut rng));
            let dist = trace_distance(&rho, &sigma)?;
            let f = fidelity(&rho, &sigma)?;
            let id = format!("pair {}", block * 10 + k);
            check(&mut fail, dist <= (1.0 - f * f).max(0.0).sqrt() + 1e-10, || format!("{id}: D {dist} F {f}"));
            check(&mut fail, 1.0 - f <= dist + 1e-10, || format!("{id}: 1 − F {} > D {dist}", 1.0 - f));
            let fr = fidelity(&partial_trace(&rho, &[d1, d2], &[0])?, &partial_trace(&sigma, &[d1, d2], &[0])?)?;
            check(&mut fail, fr >= f - 1e-10, || format!("{id}: reduced fidelity {fr} < {f}"));
            let dt = trace_distance(&t.apply(&rho)?, &t.apply(&sigma)?)?;
            worst_dp = worst_dp.max(dt - dist);
            check(&mut fail, dt <= dist + 1e-10, || format!("{id}: D grows {dist} -> {dt}"));
            pairs += 1;
        }
    }
    Ok((fail, format!("{pairs} pairs, 50 channels, max D(Tρ,Tσ) − D(ρ,σ) = {worst_dp:.2e}")))
}

fn main() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let results = [
        run(1, "pairwise-equivalent triple", Duration::from_secs(30), pairwise_triple),
        run(2, "exact catalysis suite", min(5), exact_catalysis_suite),
        run(3, "word functions", min(5), word_functions),
        run(4, "back-action bound", min(10), back_action),
        run(5, "diamond norm oracle", min(5), diamond_oracle),
        run(6, "finite groups", min(5), finite_groups),
        run(7, "correlation balance", min(5), correlation),
        run(8, "state metrics", min(5), metrics),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
