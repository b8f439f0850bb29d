//! CZ shifts, Fredholm and normal indices, transversality and obstruction ranks.

use sft_lab::index::{automatic_transversality, fredholm_index, gluing_base_dim, kernel_bound, normal_index, obstruction_rank, CurveIndexData, PunctureProfile};
use sft_lab::model::reference;

fn main() {
    let model = reference();
    for o in model.orbits.iter().take(6) {
        println!("{:<14} CZ in model {:>2}, in filling {:>2}", o.id(), model.cz_m(o), model.cz_w0(o));
    }

    let cylinder = CurveIndexData { half_dim: 2, euler_char: 0, rel_chern: 0, positive_cz: vec![1], negative_cz: vec![0] };
    println!("Fredholm index of a cylinder from CZ 1 to CZ 0: {}", fredholm_index(&cylinder));

    let torus = PunctureProfile::new(1, [1, 0, 0], [0, 0, 0]);
    let ind = normal_index(&torus);
    println!("genus-1 curve with one end over the minimum: normal index {ind}, automatic transversality {}", automatic_transversality(&torus, ind));

    let rank = obstruction_rank(0, 0, 1).unwrap();
    println!("obstruction rank {rank}, gluing base dimension {}", gluing_base_dim(1, rank));
    for c in -1..=2 {
        println!("kernel bound with c1 = {c}, two even ends: {}", kernel_bound(c, 2));
    }
}
