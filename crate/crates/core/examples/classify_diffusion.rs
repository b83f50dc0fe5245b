//! Full classification table for a few diffusions, including the Nash row.

use ergokit::diffusion::DiffusionAnalysis;
use ergokit::lattice::classify_diffusion;
use ergokit::{Budget, DiffusionModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let models = [
        ("Ornstein-Uhlenbeck", "1", "-x"),
        ("drifted Brownian motion", "1", "-2"),
        ("cubic drift", "1", "-x^3"),
        ("(1+x)^4 diffusion", "(1 + x)^4", "0"),
    ];
    for (name, a, b) in models {
        let model = DiffusionModel::from_strs(a, b)?;
        let analysis = DiffusionAnalysis::new(&model, Budget::default())?;
        let report = classify_diffusion(&analysis, Some(4.0))?;
        println!("{name}: a = {a}, b = {b}");
        for row in &report.rows {
            let quantity = row.verdict.quantity.map(|q| format!("{q:.6}")).unwrap_or_default();
            let flags: Vec<_> = row.flags.iter().map(|f| f.caveat()).collect();
            println!("  {:<20} {:<13} {quantity:<12} {}", row.name, row.verdict.outcome.as_str(), flags.join("; "));
        }
    }
    Ok(())
}
