//! Random count tables whose differential is odd.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sft_lab::algebra::{AlgebraElement, CountKey, CurveCountTable, Generator, Generators, Monomial, Parity};
use sft_lab::ratio;

/// The first generator is odd so that odd keys exist.
pub fn generators(rng: &mut ChaCha8Rng, n: usize) -> Generators {
    let gens = (0..n)
        .map(|k| Generator {
            id: format!("g{k}"),
            parity: if k == 0 || rng.gen_bool(0.5) { Parity::Odd } else { Parity::Even },
            multiplicity: rng.gen_range(1..=2),
            action: ratio::int(rng.gen_range(1..=3)),
            good: true,
        })
        .collect();
    Generators::new(gens).unwrap()
}

/// Keys whose ends have odd total parity, so each term of D is odd.
pub fn table(rng: &mut ChaCha8Rng, gens: &Generators, entries: usize) -> CurveCountTable {
    let mut t = CurveCountTable::new();
    let n = gens.len();
    let mut made = 0;
    while made < entries {
        let positive: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..n)).collect();
        let negative: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..n)).collect();
        let odd = positive.iter().chain(&negative).filter(|&&k| gens.get(k).parity.is_odd()).count();
        if odd % 2 == 0 {
            continue;
        }
        let key = CountKey { genus: rng.gen_range(0..=1), positive, negative };
        let count = ratio::int(rng.gen_range(-3..=3));
        t.insert(key, count).unwrap();
        made += 1;
    }
    t
}

/// A monomial in generator order, None when an odd generator repeats.
pub fn monomial(rng: &mut ChaCha8Rng, gens: &Generators, max_len: usize) -> Option<Monomial> {
    let vars: Vec<usize> = (0..rng.gen_range(0..=max_len)).map(|_| rng.gen_range(0..gens.len())).collect();
    Monomial::from_ordered(gens, rng.gen_range(0..=1), &vars).map(|(_, m)| m)
}

pub fn element(m: Monomial) -> AlgebraElement {
    AlgebraElement::monomial(m, ratio::one())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
