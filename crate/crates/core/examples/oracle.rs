//! Truncated-operator eigenvalues and their convergence in the truncation size.

use ergokit::chain::truncated_gap_oracle;
use ergokit::diffusion::{default_cutoff, fd_gap_oracle, DiffusionAnalysis};
use ergokit::{BirthDeathModel, Boundary, Budget, DiffusionModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mm1 = BirthDeathModel::from_strs(1.0, "1", "2")?;
    for n in [64, 256, 1024, 4096] {
        let o = truncated_gap_oracle(&mm1, n, Boundary::Reflecting)?;
        println!("M/M/1 N = {n:>5}: gap {:.8} ± {:.1e}", o.value, o.error_estimate);
    }

    let ou = DiffusionModel::from_strs("1", "-x")?;
    let analysis = DiffusionAnalysis::new(&ou, Budget::default())?;
    println!("OU default cutoff {}", default_cutoff(&analysis)?);
    for steps in [256, 1024, 4096] {
        let l0 = fd_gap_oracle(&analysis, Some(8.0), steps, Boundary::Absorbing)?;
        let l1 = fd_gap_oracle(&analysis, None, steps, Boundary::Reflecting)?;
        println!("OU N = {steps:>5}: lambda_0 {:.8}, lambda_1 {:.8}", l0.value, l1.value);
    }
    Ok(())
}
