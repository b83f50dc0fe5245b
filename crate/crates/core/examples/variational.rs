//! Lower bounds from single test functions, the representative choice and a
//! Rayleigh-quotient upper bound.

use ergokit::chain::{representative_w, variational_lower_bd, TestSequence};
use ergokit::diffusion::{rayleigh_quotient, representative_f, variational_lower_diff, DiffusionAnalysis};
use ergokit::{BirthDeathModel, Budget, DiffusionModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ou = DiffusionModel::from_strs("1", "-x")?;
    let analysis = DiffusionAnalysis::new(&ou, Budget::default())?;
    let linear = |x: f64| x;
    let bound = variational_lower_diff(&analysis, &linear)?;
    println!("OU, f(x) = x: lower bound on lambda_0 = {:.6}", bound.value);
    let representative = representative_f(&analysis)?;
    let bound = variational_lower_diff(&analysis, &representative)?;
    println!("OU, representative f: lower bound on lambda_1 = {:.6} (argmin {:.3})", bound.value, bound.argmin);
    let odd = |x: f64| x - (2.0 / std::f64::consts::PI).sqrt();
    println!("OU, centred f(x) = x: Rayleigh quotient = {:.6}", rayleigh_quotient(&analysis, &odd, 20.0)?);

    let mm1 = BirthDeathModel::from_strs(1.0, "1", "2")?;
    let w = representative_w(&mm1, 1024)?;
    println!("M/M/1, representative w: {:.6}", variational_lower_bd(&mm1, &w)?.value);
    let linear = TestSequence::from_fn(1024, |i| i as f64)?;
    println!("M/M/1, w_i = i:          {:.6}", variational_lower_bd(&mm1, &linear)?.value);
    Ok(())
}
