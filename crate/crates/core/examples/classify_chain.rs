//! Classifies the family b₀ = 1, aₙ = bₙ = n^γ across the γ = 2 threshold.

use ergokit::chain::ChainAnalysis;
use ergokit::lattice::classify_chain;
use ergokit::{BirthDeathModel, Budget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for gamma in [1.0, 1.5, 2.0, 2.5, 3.0] {
        let model = BirthDeathModel::gamma_family(gamma);
        let analysis = ChainAnalysis::new(&model, Budget::default())?;
        let report = classify_chain(&analysis, None)?;
        println!("gamma = {gamma}");
        for row in &report.rows {
            println!("  {:<24} {}", row.name, row.verdict.outcome.as_str());
        }
    }
    Ok(())
}
