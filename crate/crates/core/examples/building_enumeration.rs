//! Enumerates the index-1 buildings of the bundled model under each counting convention.

use sft_lab::building::{classify, Convention};
use sft_lab::model::{reference, Half};

fn main() {
    let model = reference();
    for conv in [Convention::Mixed, Convention::TwinsIdentified, Convention::TwinsDistinct] {
        println!("{:?}: {}", conv, conv.description());
        for (g, r) in [(0, 1), (0, 2), (1, 1)] {
            let found = classify(&model, g, r, conv).unwrap();
            let left = found.iter().filter(|e| e.side == Half::Left).count();
            println!("  genus {g}, {r} positive end(s): {} ({left} left, {} right)", found.len(), found.len() - left);
        }
    }
    let tori = classify(&model, 1, 1, Convention::Mixed).unwrap();
    let e = &tori[0];
    println!("first torus {}: {} floor(s), profile {:?}", e.id, e.building.floors.len(), e.profile);
}
