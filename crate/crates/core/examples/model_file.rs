//! Parsing a model file and evaluating its rates.

use ergokit::model::parse_model;
use ergokit::Model;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = "\
# M/M/1 with a faster server at state 3
kind = birth-death
b0 = 1
b = \"1\"
a = \"2\"
a[3] = 5
";
    let Model::BirthDeath(m) = parse_model(text)? else {
        unreachable!()
    };
    for i in 0..5 {
        println!("state {i}: birth {}, death {}", m.birth(i)?, m.death(i)?);
    }
    match parse_model("kind = diffusion\na = \"1\"\nb = \"-y\"\n") {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
