//! Cobracket, labelled coefficients and the sporadic count of a few genus-2 classes.

use sft_lab::surface::SurfaceGroup;
use sft_lab::topology::{cobracket, self_intersection_pairs, sporadic_count, sporadic_count_direct, Registry};

fn main() {
    let g = SurfaceGroup::new(2).unwrap();
    let mut registry = Registry::default();
    for s in std::env::args().skip(1).chain(["a1", "a1b1", "a1b2A1B2", "a1a1b1"].map(String::from)) {
        let w = g.canonicalize_str(&s).unwrap();
        println!("{s} -> {w}: {} self-crossings", self_intersection_pairs(&w).len());
        for ((a, b), c) in cobracket(&w).pairs() {
            println!("    {c:+} {a} ⊗ {b}");
        }
        println!("    sporadic count {} (direct {})", sporadic_count(&w, &mut registry), sporadic_count_direct(&w));
    }
}
