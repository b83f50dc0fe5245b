//! Checks candidate solutions of the drift inequalities on a finite horizon.

use ergokit::chain::{verify_test_sequence, ChainAnalysis};
use ergokit::{BirthDeathModel, Budget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mm1 = BirthDeathModel::from_strs(1.0, "1", "2")?;
    let analysis = ChainAnalysis::new(&mm1, Budget::default())?;
    println!("mean hitting time of 0 from 1: {:?}", analysis.mean_hitting_time(1)?);
    let times = analysis.mean_hitting_times(1001).ok_or("hitting times not finite")?;
    let check = verify_test_sequence(&mm1, |i| times[i], 0.0, &[0], 1000, 1e-9)?;
    println!(
        "hitting times: {} (equality residual {:.1e})",
        check.verdict.outcome.as_str(),
        check.max_equality_residual
    );

    let gamma1 = BirthDeathModel::gamma_family(1.0);
    let check = verify_test_sequence(&gamma1, |i| i as f64, 0.5, &[0], 1000, 1e-9)?;
    println!(
        "y = n, lambda = 0.5 on a_n = b_n = n: {} (first violation at {:?})",
        check.verdict.outcome.as_str(),
        check.first_violation
    );
    Ok(())
}
