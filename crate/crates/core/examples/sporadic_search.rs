//! Searches short genus-2 classes for a nonzero sporadic count.

use sft_lab::surface::{classes_of_length, SurfaceGroup};
use sft_lab::topology::sporadic_count_direct;

fn main() {
    let g = SurfaceGroup::new(2).unwrap();
    for n in 1..=6 {
        let classes = classes_of_length(g, n);
        let hits: Vec<_> = classes.iter().filter(|w| sporadic_count_direct(w) != 0).collect();
        println!("length {n}: {} classes, {} with nonzero count", classes.len(), hits.len());
        if let Some(w) = hits.first() {
            println!("    e.g. {w} with count {}", sporadic_count_direct(w));
        }
    }
}
