//! The bracket (4δ)⁻¹ ≤ λ₀ ≤ δ⁻¹ against brute-force eigenvalues. `λ₀` is the
//! eigenvalue killed at 0; the gap `λ₁` is at least `λ₀`.

use ergokit::chain::{gap_bounds_bd, truncated_gap_oracle, ChainAnalysis};
use ergokit::diffusion::{fd_gap_oracle, gap_bounds_diff, DiffusionAnalysis, FD_STEPS};
use ergokit::{BirthDeathModel, Boundary, Budget, DiffusionModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mm1 = BirthDeathModel::from_strs(1.0, "1", "2")?;
    let analysis = ChainAnalysis::new(&mm1, Budget::default())?;
    let bounds = gap_bounds_bd(&analysis);
    let oracle = truncated_gap_oracle(&mm1, 4096, Boundary::Absorbing)?;
    println!("M/M/1 (arrival 1, service 2)");
    println!("  bracket [{:.6}, {:.6}], truncated lambda_0 {:.6}", bounds.lower, bounds.upper, oracle.value);
    println!("  exact (sqrt 2 - 1)^2 = {:.6}", (2f64.sqrt() - 1.0).powi(2));

    let mminf = BirthDeathModel::from_strs(1.0, "1", "n")?;
    let bounds = gap_bounds_bd(&ChainAnalysis::new(&mminf, Budget::default())?);
    let l0 = truncated_gap_oracle(&mminf, 1024, Boundary::Absorbing)?;
    let l1 = truncated_gap_oracle(&mminf, 1024, Boundary::Reflecting)?;
    println!("M/M/infinity (arrival 1, unit service)");
    println!(
        "  bracket [{:.6}, {:.6}], lambda_0 {:.6}, gap lambda_1 {:.6}",
        bounds.lower, bounds.upper, l0.value, l1.value
    );

    for (name, b) in [("drifted BM", "-2"), ("OU", "-x")] {
        let model = DiffusionModel::from_strs("1", b)?;
        let analysis = DiffusionAnalysis::new(&model, Budget::default())?;
        let bounds = gap_bounds_diff(&analysis, Boundary::Absorbing)?;
        let oracle = fd_gap_oracle(&analysis, None, FD_STEPS, Boundary::Absorbing)?;
        println!("{name}: delta = {:?}", bounds.delta);
        println!(
            "  bracket [{:.6}, {:.6}], finite-difference lambda_0 {:.6} ± {:.1e}",
            bounds.lower, bounds.upper, oracle.value, oracle.error_estimate
        );
    }
    Ok(())
}
