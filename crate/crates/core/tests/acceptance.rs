//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::time::Instant;

use ergokit::chain::{
    delta_bd, gap_bounds_bd, representative_w, truncated_gap_oracle, variational_lower_bd, verify_test_sequence,
    ChainAnalysis, HittingTime, TestSequence,
};
use ergokit::diffusion::{
    delta_diff, fd_gap_oracle, gap_bounds_diff, representative_f, variational_lower_diff, DiffusionAnalysis,
    TestFunction, FD_STEPS,
};
use ergokit::eigen::TridiagonalMatrix;
use ergokit::lattice::{classify_chain, classify_diffusion, implies, ClassifyError, Property};
use ergokit::{BirthDeathModel, Boundary, Budget, DiffusionModel, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn gamma_thresholds() -> Check {
    let start = Instant::now();
    let mut wrong = Vec::new();
    let expected = [
        (0.5, Some(Outcome::Fails), None),
        (1.0, Some(Outcome::Fails), Some(Outcome::Fails)),
        (1.5, Some(Outcome::Fails), None),
        (2.0, Some(Outcome::Holds), Some(Outcome::Fails)),
        (2.5, Some(Outcome::Holds), Some(Outcome::Holds)),
        (3.0, Some(Outcome::Holds), Some(Outcome::Holds)),
    ];
    for (gamma, exponential, strong) in expected {
        let model = BirthDeathModel::gamma_family(gamma);
        let analysis = ChainAnalysis::new(&model, Budget::default()).map_err(|e| e.to_string())?;
        let report = classify_chain(&analysis, None).map_err(|e| e.to_string())?;
        for (property, want) in [(Property::Exponential, exponential), (Property::Strong, strong)] {
            let got = report.outcome(property);
            if want.is_some() && got != want {
                wrong.push(format!("γ={gamma} {property:?} {got:?}"));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if !wrong.is_empty() {
        return Err(wrong.join(", "));
    }
    if elapsed >= 10.0 {
        return Err(format!("{elapsed:.2} s ≥ 10 s"));
    }
    Ok(format!("6 models in {elapsed:.2} s"))
}

fn mm1_bracket() -> Check {
    let start = Instant::now();
    let model = BirthDeathModel::from_strs(1.0, "1", "2").map_err(|e| e.to_string())?;
    let analysis = ChainAnalysis::new(&model, Budget::default()).map_err(|e| e.to_string())?;
    let oracle = truncated_gap_oracle(&model, 4096, Boundary::Reflecting).map_err(|e| e.to_string())?;
    let delta = delta_bd(&analysis).value().ok_or("δ not finite")?;
    let elapsed = start.elapsed().as_secs_f64();
    let exact = (2f64.sqrt() - 1.0).powi(2);
    let (lower, upper) = (1.0 / (4.0 * delta), 1.0 / delta);
    let line = format!(
        "oracle {:.6} vs {exact:.6}, bracket [{lower:.4}, {upper:.4}], {elapsed:.2} s",
        oracle.value
    );
    if within(oracle.value, exact, 0.01) && lower <= oracle.value && oracle.value <= upper && elapsed < 5.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn drifted_brownian_motion() -> Check {
    let model = DiffusionModel::from_strs("1", "-2").map_err(|e| e.to_string())?;
    let analysis = DiffusionAnalysis::new(&model, Budget::default()).map_err(|e| e.to_string())?;
    let delta = delta_diff(&analysis)
        .map_err(|e| e.to_string())?
        .value()
        .ok_or("δ not finite")?;
    let oracle = fd_gap_oracle(&analysis, None, FD_STEPS, Boundary::Reflecting).map_err(|e| e.to_string())?;
    let lower = 1.0 / (4.0 * delta);
    let line = format!("δ {delta:.6}, λ₁ {:.5}, (4δ)⁻¹ {lower:.5}", oracle.value);
    if within(delta, 0.25, 0.005) && within(oracle.value, 1.0, 0.02) && within(oracle.value, lower, 0.02) {
        Ok(line)
    } else {
        Err(line)
    }
}

fn ornstein_uhlenbeck() -> Check {
    let model = DiffusionModel::from_strs("1", "-x").map_err(|e| e.to_string())?;
    let analysis = DiffusionAnalysis::new(&model, Budget::default()).map_err(|e| e.to_string())?;
    let estimate = gap_bounds_diff(&analysis, Boundary::Absorbing).map_err(|e| e.to_string())?;
    let oracle = fd_gap_oracle(&analysis, Some(8.0), 4096, Boundary::Absorbing).map_err(|e| e.to_string())?;
    let linear = |x: f64| x;
    let bound = variational_lower_diff(&analysis, &linear).map_err(|e| e.to_string())?;
    let line = format!(
        "λ₀ {:.5} in [{:.4}, {:.4}], variational(f=x) {:.6}",
        oracle.value, estimate.lower, estimate.upper, bound.value
    );
    if within(oracle.value, 1.0, 0.02) && estimate.brackets(oracle.value, 0.0) && within(bound.value, 1.0, 0.01) {
        Ok(line)
    } else {
        Err(line)
    }
}

fn chain_sequences(model: &BirthDeathModel) -> Vec<(&'static str, Option<TestSequence>)> {
    vec![
        ("representative", representative_w(model, 1024).ok()),
        ("i", TestSequence::from_fn(1024, |i| i as f64).ok()),
        ("sqrt i", TestSequence::from_fn(1024, |i| (i as f64).sqrt()).ok()),
        ("ln(1+i)", TestSequence::from_fn(1024, |i| (i as f64).ln_1p()).ok()),
        ("1-0.9^i", TestSequence::from_fn(256, |i| 1.0 - 0.9f64.powi(i as i32)).ok()),
    ]
}

type BoxedFn = Box<dyn Fn(f64) -> f64>;

fn diffusion_functions() -> Vec<(&'static str, BoxedFn)> {
    vec![
        ("x", Box::new(|x| x)),
        ("sqrt x", Box::new(f64::sqrt)),
        ("1-e^-x", Box::new(|x: f64| -(-x).exp_m1())),
        ("ln(1+x)", Box::new(f64::ln_1p)),
        ("x/(1+x)", Box::new(|x| x / (1.0 + x))),
    ]
}

/// `λ₀` (killed at 0) of every corpus model: the eigenvalue δ brackets and
/// a lower bound for the gap `λ₁`, so variational bounds stay below it too.
struct CorpusOracles {
    chains: Vec<(BirthDeathModel, f64, f64)>,
    diffusions: Vec<(DiffusionModel, f64, f64)>,
}

fn corpus_oracles() -> Result<CorpusOracles, String> {
    let mut chains = Vec::new();
    for i in 0..common::CHAINS.len() {
        let model = common::chain(i);
        let o = truncated_gap_oracle(&model, 4096, Boundary::Absorbing).map_err(|e| format!("chain {i}: {e}"))?;
        chains.push((model, o.value, o.error_estimate));
    }
    let mut diffusions = Vec::new();
    for i in 0..common::DIFFUSIONS.len() {
        let model = common::diffusion(i);
        let analysis = DiffusionAnalysis::new(&model, Budget::default()).map_err(|e| e.to_string())?;
        let o = fd_gap_oracle(&analysis, None, FD_STEPS, Boundary::Absorbing)
            .map_err(|e| format!("diffusion {i}: {e}"))?;
        diffusions.push((model, o.value, o.error_estimate));
    }
    Ok(CorpusOracles { chains, diffusions })
}

fn variational_soundness(corpus: &CorpusOracles) -> Check {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (i, (model, oracle, err)) in corpus.chains.iter().enumerate() {
        for (name, w) in chain_sequences(model) {
            let Some(w) = w else { continue };
            let Ok(bound) = variational_lower_bd(model, &w) else {
                continue;
            };
            checked += 1;
            if bound.value > oracle * 1.03 + err {
                bad.push(format!("chain {i} w={name}: {} > {oracle}", bound.value));
            }
        }
    }
    for (i, (model, oracle, err)) in corpus.diffusions.iter().enumerate() {
        let analysis = DiffusionAnalysis::new(model, Budget::default()).map_err(|e| e.to_string())?;
        let representative = representative_f(&analysis).map_err(|e| e.to_string())?;
        let mut functions: Vec<(&str, &dyn TestFunction)> = vec![("representative", &representative)];
        let plain = diffusion_functions();
        for (name, f) in &plain {
            functions.push((name, f));
        }
        for (name, f) in functions {
            let Ok(bound) = variational_lower_diff(&analysis, f) else {
                continue;
            };
            checked += 1;
            if bound.value > oracle * 1.03 + err {
                bad.push(format!("diffusion {i} f={name}: {} > {oracle}", bound.value));
            }
        }
    }
    if bad.is_empty() && checked >= 20 {
        Ok(format!("{checked} test functions over 20 models"))
    } else {
        Err(format!("{checked} checked; {}", bad.join("; ")))
    }
}

fn skipped_note(skipped: &[String]) -> String {
    if skipped.is_empty() {
        String::new()
    } else {
        format!(" (skipped: {})", skipped.join(", "))
    }
}

fn bracketing(corpus: &CorpusOracles) -> Check {
    let mut skipped = Vec::new();
    let mut checked = 0;
    let mut bad = Vec::new();
    for (i, (model, oracle, _)) in corpus.chains.iter().enumerate() {
        let analysis = ChainAnalysis::new(model, Budget::default()).map_err(|e| e.to_string())?;
        let estimate = gap_bounds_bd(&analysis);
        if estimate.delta.value().is_none() {
            skipped.push(format!("chain {i} δ {}", estimate.delta.status()));
        } else {
            checked += 1;
            if !estimate.brackets(*oracle, 0.05) {
                bad.push(format!("chain {i}: {oracle} not in [{}, {}]", estimate.lower, estimate.upper));
            }
        }
    }
    for (i, (model, oracle, _)) in corpus.diffusions.iter().enumerate() {
        let analysis = DiffusionAnalysis::new(model, Budget::default()).map_err(|e| e.to_string())?;
        let estimate = gap_bounds_diff(&analysis, Boundary::Absorbing).map_err(|e| e.to_string())?;
        if estimate.delta.value().is_none() {
            skipped.push(format!("diffusion {i} δ {}", estimate.delta.status()));
        } else {
            checked += 1;
            if !estimate.brackets(*oracle, 0.05) {
                bad.push(format!("diffusion {i}: {oracle} not in [{}, {}]", estimate.lower, estimate.upper));
            }
        }
    }
    if bad.is_empty() && checked > 0 {
        Ok(format!("{checked} models with finite δ{}", skipped_note(&skipped)))
    } else {
        Err(format!("{checked} checked; {}", bad.join("; ")))
    }
}

fn lattice_consistency() -> Check {
    if implies(Property::LogSobolev, Property::Strong) || implies(Property::Strong, Property::LogSobolev) {
        return Err("log-Sobolev and strong ergodicity are ordered".into());
    }
    let mut chains: Vec<BirthDeathModel> = (0..common::CHAINS.len()).map(common::chain).collect();
    let mut diffusions: Vec<DiffusionModel> = (0..common::DIFFUSIONS.len()).map(common::diffusion).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..50 {
        chains.push(common::random_chain(&mut rng));
        diffusions.push(common::random_diffusion(&mut rng));
    }
    for gamma in [0.5, 1.0, 1.5, 2.0] {
        chains.push(BirthDeathModel::gamma_family(gamma));
    }
    let mut contradictions = Vec::new();
    let mut errors = 0;
    let classify = |r: Result<_, ClassifyError>, label: String, contradictions: &mut Vec<String>, errors: &mut usize| {
        match r {
            Ok(_) => {}
            Err(ClassifyError::Contradiction { weaker, stronger, .. }) => {
                contradictions.push(format!("{label}: {stronger:?} ⟹ {weaker:?}"))
            }
            Err(_) => *errors += 1,
        }
    };
    for m in &chains {
        let a = ChainAnalysis::new(m, Budget::default()).map_err(|e| e.to_string())?;
        classify(classify_chain(&a, Some(4.0)), format!("{m:?}"), &mut contradictions, &mut errors);
    }
    for m in &diffusions {
        let a = DiffusionAnalysis::new(m, Budget::default()).map_err(|e| e.to_string())?;
        classify(classify_diffusion(&a, Some(4.0)), format!("{m:?}"), &mut contradictions, &mut errors);
    }
    let mut exit_codes = 0;
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/models");
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    files.sort();
    for path in &files {
        let code = ergokit::cli::run(
            ["ergokit", "classify", path.to_str().unwrap(), "--nu", "4"],
            &mut Vec::new(),
            &mut Vec::new(),
        );
        if code == 2 {
            contradictions.push(path.display().to_string());
        }
        exit_codes += 1;
    }
    let total = chains.len() + diffusions.len();
    if contradictions.is_empty() {
        Ok(format!("{total} models, {exit_codes} model files, {errors} evaluation errors, 0 contradictions"))
    } else {
        Err(contradictions.join("; "))
    }
}

/// Eigenvalues of a symmetric 3×3 matrix by the trigonometric cubic solution.
fn symmetric_3x3(d: [f64; 3], e: [f64; 2]) -> [f64; 3] {
    let q = (d[0] + d[1] + d[2]) / 3.0;
    let p1 = e[0] * e[0] + e[1] * e[1];
    let p2 = (d[0] - q).powi(2) + (d[1] - q).powi(2) + (d[2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q; 3];
    }
    let (b0, b1, b2) = ((d[0] - q) / p, (d[1] - q) / p, (d[2] - q) / p);
    let (c0, c1) = (e[0] / p, e[1] / p);
    let det = b0 * (b1 * b2 - c1 * c1) - c0 * (c0 * b2);
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [smallest, 3.0 * q - largest - smallest, largest]
}

fn eigensolver() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_trace = 0.0f64;
    let mut worst_small = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=60);
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let off: Vec<f64> = (1..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let m = TridiagonalMatrix::new(diag.clone(), off).map_err(|e| e.to_string())?;
        let sum: f64 = m.eigenvalues(1e-13).iter().sum();
        let scale = diag.iter().map(|d| d.abs()).sum::<f64>().max(1.0);
        worst_trace = worst_trace.max((sum - m.trace()).abs() / scale);

        let (a, b, c) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-5.0..5.0));
        let mid = (a + b) / 2.0;
        let radius = (((a - b) / 2.0f64).powi(2) + c * c).sqrt();
        let got = TridiagonalMatrix::new(vec![a, b], vec![c]).map_err(|e| e.to_string())?.eigenvalues(1e-13);
        worst_small = worst_small
            .max((got[0] - (mid - radius)).abs())
            .max((got[1] - (mid + radius)).abs());

        let d = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        let e = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let exact = symmetric_3x3(d, e);
        let got = TridiagonalMatrix::new(d.to_vec(), e.to_vec())
            .map_err(|e| e.to_string())?
            .eigenvalues(1e-13);
        for k in 0..3 {
            worst_small = worst_small.max((got[k] - exact[k]).abs());
        }
    }
    let line = format!("1000 instances, trace rel. err {worst_trace:.1e}, 2×2/3×3 abs. err {worst_small:.1e}");
    if worst_trace <= 1e-8 && worst_small <= 1e-9 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn hitting_times() -> Check {
    let model = BirthDeathModel::from_strs(1.0, "1", "2").map_err(|e| e.to_string())?;
    let analysis = ChainAnalysis::new(&model, Budget::default()).map_err(|e| e.to_string())?;
    let first = analysis.mean_hitting_time(1).map_err(|e| e.to_string())?;
    if first != HittingTime::Finite(1.0) {
        return Err(format!("E₁σ₀ = {first:?}"));
    }
    let times = analysis.mean_hitting_times(1001).ok_or("hitting times not finite")?;
    let check = verify_test_sequence(&model, |i| times[i], 0.0, &[0], 1000, 1e-9).map_err(|e| e.to_string())?;
    let line = format!(
        "E₁σ₀ = 1, {} up to N = {}, equality residual {:.1e}",
        check.verdict.outcome.as_str(),
        check.horizon,
        check.max_equality_residual
    );
    if check.verdict.holds() && check.horizon == 1000 && check.max_equality_residual <= 1e-9 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn timed(f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let result = f();
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(s) => Ok(format!("{s} [{secs:.1} s]")),
        Err(s) => Err(format!("{s} [{secs:.1} s]")),
    }
}

fn main() {
    let corpus = corpus_oracles();
    let mut results: Vec<(&str, Check)> = vec![
        ("1 γ-threshold reproduction", timed(gamma_thresholds)),
        ("2 M/M/1 gap bracket", timed(mm1_bracket)),
        ("3 drifted Brownian motion", timed(drifted_brownian_motion)),
        ("4 Ornstein-Uhlenbeck Dirichlet eigenvalue", timed(ornstein_uhlenbeck)),
    ];
    match &corpus {
        Ok(c) => {
            results.push(("5 variational soundness", timed(|| variational_soundness(c))));
            results.push(("6 bracketing", timed(|| bracketing(c))));
        }
        Err(e) => {
            results.push(("5 variational soundness", Err(e.clone())));
            results.push(("6 bracketing", Err(e.clone())));
        }
    }
    results.push(("7 lattice consistency", timed(lattice_consistency)));
    results.push(("8 eigensolver", timed(eigensolver)));
    results.push(("9 hitting-time cross-check", timed(hitting_times)));

    let mut failed = 0;
    for (name, result) in &results {
        match result {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
