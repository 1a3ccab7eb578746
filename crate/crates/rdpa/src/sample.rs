//! Seeded generators for small automata.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{Condition, DataTransition, Rdpa, StateKind, WordTransition};

fn atom(rng: &mut impl Rng, registers: usize, data: u64) -> Condition {
    let v = rng.gen_range(0..data);
    let kinds = if registers == 0 { 2 } else { 4 };
    match rng.gen_range(0..kinds) {
        0 => Condition::ValEq(v),
        1 => Condition::ValNe(v),
        2 => Condition::RegEq(rng.gen_range(1..=registers)),
        _ => Condition::RegNe(rng.gen_range(1..=registers)),
    }
}

fn condition(rng: &mut impl Rng, registers: usize, data: u64, depth: u32) -> Condition {
    if depth == 0 || rng.gen_bool(0.5) {
        return atom(rng, registers, data);
    }
    let sub = |rng: &mut _| condition(rng, registers, data, depth - 1);
    match rng.gen_range(0..3) {
        0 => Condition::and(sub(rng), sub(rng)),
        1 => Condition::or(sub(rng), sub(rng)),
        _ => Condition::not(sub(rng)),
    }
}

/// An automaton with at most four data and four word states, at most two
/// registers, conditions over constants below `data`, and word symbols
/// from `alphabet`.
pub fn random_rdpa(seed: u64, alphabet: &[&str], data: u64) -> Rdpa {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nd = rng.gen_range(1..=4);
    let nw = rng.gen_range(1..=4);
    let registers = rng.gen_range(0..=2);
    let mut states = Vec::new();
    for i in 0..nd {
        states.push((format!("d{i}"), StateKind::Data));
    }
    for i in 0..nw {
        states.push((format!("w{i}"), StateKind::Word));
    }
    let word_states: Vec<usize> = (nd..nd + nw).collect();
    let mut finals: BTreeSet<usize> = word_states.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
    if finals.is_empty() {
        finals.insert(*word_states.choose(&mut rng).expect("word states"));
    }
    let mut data_transitions = Vec::new();
    for from in 0..nd {
        for _ in 0..rng.gen_range(1..=3) {
            let update = (1..=registers).filter(|_| rng.gen_bool(0.4)).collect();
            data_transitions.push(DataTransition {
                from,
                condition: condition(&mut rng, registers, data, 2),
                update,
                to: *word_states.choose(&mut rng).expect("word states"),
            });
        }
    }
    let mut word_transitions = Vec::new();
    for &from in &word_states {
        for e in alphabet {
            for to in 0..nd {
                if rng.gen_bool(0.45) {
                    word_transitions.push(WordTransition {
                        from,
                        symbol: e.to_string(),
                        to,
                    });
                }
            }
        }
    }
    let tau0 = (0..registers)
        .map(|_| if rng.gen_bool(0.3) { None } else { Some(rng.gen_range(0..data)) })
        .collect();
    let a = Rdpa {
        states,
        initial: 0,
        finals,
        registers,
        tau0,
        word_transitions,
        data_transitions,
    };
    debug_assert!(a.validate().is_ok());
    a
}
