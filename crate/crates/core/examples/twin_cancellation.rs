//! Pairs every building with its twin and shows the lone survivor.

use sft_lab::building::{classify_all, pair_cancellation, sporadic_signature, Convention};
use sft_lab::model::reference;

fn main() {
    let model = reference();
    let entries = classify_all(&model, Convention::Mixed);
    let c = pair_cancellation(&entries).unwrap();
    for p in &c.pairs {
        let tag = if p.internal { " (internal)" } else { "" };
        println!("{} <-> {}{tag}", p.members[0], p.members[1]);
    }
    println!("unpaired: {:?}", c.unpaired);
    let lone = entries.iter().find(|e| e.id == c.unpaired[0]).unwrap();
    println!("matches the sporadic signature: {}", lone.building == sporadic_signature(&model).unwrap());
}
