//! Torsion order of count tables: the model's derived table and two small ones.

use sft_lab::algebra::{torsion_order, CountKey, CurveCountTable, Generator, Generators, Parity, TorsionOrder, Truncation};
use sft_lab::building::{classify_all, twin_count_document, Convention};
use sft_lab::model::reference;
use sft_lab::ratio;

fn report(name: &str, gens: &Generators, table: &CurveCountTable, trunc: &Truncation) {
    match torsion_order(gens, table, trunc).unwrap() {
        TorsionOrder::Certified { order, certificate } => println!("{name}: order {order}, certificate {:?}", certificate.render(gens)),
        TorsionOrder::Unknown => println!("{name}: unknown"),
    }
}

fn main() {
    let model = reference();
    let trunc = Truncation::new(3, 3, model.config.action_threshold.clone()).unwrap();
    let entries = classify_all(&model, Convention::Mixed);
    for include in [true, false] {
        let (gens, table) = twin_count_document(&model, &entries, include).unwrap().resolve().unwrap();
        report(if include { "derived table" } else { "derived table without the sporadic count" }, &gens, &table, &trunc);
    }

    let gens = Generators::new(vec![Generator { id: "c".into(), parity: Parity::Odd, multiplicity: 1, action: ratio::one(), good: true }]).unwrap();
    let mut plane = CurveCountTable::new();
    plane.insert(CountKey { genus: 0, positive: vec![0], negative: vec![] }, ratio::int(1)).unwrap();
    report("one plane", &gens, &plane, &trunc);
    let mut torus = CurveCountTable::new();
    torus.insert(CountKey { genus: 1, positive: vec![0], negative: vec![] }, ratio::int(3)).unwrap();
    report("one torus counted three times", &gens, &torus, &trunc);
}
