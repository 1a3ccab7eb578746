//! Automaton semantics, branch sets, translation and the witness language.

use std::collections::BTreeMap;

use pathprop::constraint::{Filter, Key, Subject};
use pathprop::syntax::parse_filters;
use pathprop::Value;
use rdpa::def::{suffix_key, ground_phi};
use rdpa::sample::random_rdpa;
use rdpa::{
    a_eq, check_translation, data_constr, recognized, recognized_paths, translate, witness_def, witness_phi,
    DataPath, DataPathDef, Symbol,
};

fn path(s: &str) -> DataPath {
    s.parse().unwrap()
}

fn entailed(s: &pathprop::constraint::ConstraintStore, i: usize, k: &str) -> Option<Value> {
    s.entailed_value(&Key::Prop(Subject::Path(suffix_key(i)), k.to_string()))
}

#[test]
fn witness_branch_set_entails_length_and_last() {
    let def = witness_def();
    let branches = data_constr(&def, &path("0·e·0·e·3")).unwrap();
    assert_eq!(branches.len(), 1);
    assert_eq!(entailed(&branches[0], 0, "length"), Some(Value::Int(3)));
    assert_eq!(entailed(&branches[0], 0, "last"), Some(Value::Int(3)));
}

#[test]
fn singleton_uses_the_single_symbol_case_only() {
    let def = witness_def();
    let branches = data_constr(&def, &[Symbol::Data(4)]).unwrap();
    assert_eq!(branches.len(), def.single.len());
    assert_eq!(entailed(&branches[0], 0, "last"), Some(Value::Int(4)));
    assert!(data_constr(&def, &[]).is_err());
}

#[test]
fn exclusive_disjuncts_can_leave_no_branch() {
    let def = DataPathDef::parse(
        &["k"],
        &["k"],
        &["p.k == 0, x == 1", "p.k == 1, x == 2"],
        &["p.k == p'.k, x == 0"],
    )
    .unwrap();
    assert!(data_constr(&def, &path("0·a·3")).unwrap().is_empty());
    assert!(data_constr(&def, &path("5·a·1")).unwrap().is_empty());
    assert_eq!(data_constr(&def, &[Symbol::Data(2)]).unwrap().len(), 1);
}

#[test]
fn witness_recognition_examples() {
    let def = witness_def();
    let phi = witness_phi();
    assert!(recognized(&def, &phi, &path("0·e·0·e·3")));
    assert!(!recognized(&def, &phi, &path("0·e·0·e·4")));
    assert!(!recognized(&def, &phi, &path("0·e·1·e·3")));
    assert!(recognized(&def, &phi, &path("0·e·2")));
    let never = parse_filters("false").unwrap();
    assert!(!recognized(&def, &never, &path("0·e·2")));
}

#[test]
fn a_eq_translation_agrees_on_examples() {
    let a = a_eq(&["a", "b"]);
    let (def, phi) = translate(&a);
    def.validate().unwrap();
    def.validate_phi(&phi).unwrap();
    for (w, want) in [("5·a·5", true), ("5·a·6", false), ("5·b·2·a·5", true), ("5·b·2·a·2", false)] {
        assert_eq!(a.accepts(&path(w)), want, "{w}");
        assert_eq!(recognized(&def, &phi, &path(w)), want, "{w}");
    }
}

#[test]
fn no_final_states_recognize_nothing() {
    let mut a = a_eq(&["a"]);
    a.finals.clear();
    let (def, phi) = translate(&a);
    assert!(def.single.is_empty());
    assert!(!recognized(&def, &phi, &path("5·a·5")));
}

#[test]
fn translation_agrees_on_small_random_automata() {
    for seed in 0..8 {
        let a = random_rdpa(seed, &["a", "b"], 3);
        let n = check_translation(&a, &["a", "b"], &[0, 1, 2], 5).unwrap_or_else(|d| panic!("seed {seed}: {d:?}"));
        assert_eq!(n, 18 + 108);
    }
}

#[test]
fn witness_language_up_to_nine_positions() {
    let got = recognized_paths(&witness_def(), &witness_phi(), &["e", "f"], &[0, 1, 2, 3, 4, 5], 9);
    for p in &got {
        let data: Vec<u64> = p.iter().filter_map(|s| match s { Symbol::Data(d) => Some(*d), _ => None }).collect();
        let (last, rest) = data.split_last().unwrap();
        assert!(rest.iter().all(|d| *d == 0), "{p}");
        assert_eq!(*last as usize, p.word_count() + 1, "{p}");
    }
    // Word counts 1..=4 with two symbols each: 2 + 4 + 8 + 16.
    assert_eq!(got.len(), 30);
}

/// Direct search over the values of every suffix property, evaluating the
/// disjunctive constraints of each position without branching.
fn direct_satisfiable(def: &DataPathDef, phi: &[Filter], w: &[Symbol], domain: &BTreeMap<String, Vec<Value>>) -> bool {
    let n = w.len();
    let cons: Vec<Vec<Vec<Filter>>> = (0..n).map(|i| def.position_constraints(&w[i], i, i + 1 == n)).collect();
    let phi = ground_phi(phi);
    let props: Vec<&String> = def.properties.iter().collect();
    let mut env: BTreeMap<Key, Value> = BTreeMap::new();

    fn holds(fs: &[Filter], env: &BTreeMap<Key, Value>) -> bool {
        let look = |k: &Key| env.get(k).cloned();
        fs.iter().all(|f| f.eval(&look) == Some(true))
    }

    // Assign suffix `i`'s properties, then check position `i - 1`, whose
    // constraints mention suffixes `i - 1` and `i` only.
    fn go(
        i: usize,
        n: usize,
        props: &[&String],
        domain: &BTreeMap<String, Vec<Value>>,
        cons: &[Vec<Vec<Filter>>],
        phi: &[Filter],
        env: &mut BTreeMap<Key, Value>,
    ) -> bool {
        if i == n {
            return cons[n - 1].iter().any(|c| holds(c, env));
        }
        let mut choice = vec![0usize; props.len()];
        loop {
            for (j, k) in props.iter().enumerate() {
                env.insert(Key::Prop(Subject::Path(suffix_key(i)), k.to_string()), domain[*k][choice[j]].clone());
            }
            let ok = if i == 0 { holds(phi, env) } else { cons[i - 1].iter().any(|c| holds(c, env)) };
            if ok && go(i + 1, n, props, domain, cons, phi, env) {
                return true;
            }
            let mut j = 0;
            while j < choice.len() {
                choice[j] += 1;
                if choice[j] < domain[props[j].as_str()].len() {
                    break;
                }
                choice[j] = 0;
                j += 1;
            }
            if j == choice.len() {
                return false;
            }
        }
    }
    go(0, n, &props, domain, &cons, &phi, &mut env)
}

#[test]
fn branch_sets_match_direct_search() {
    let alphabet = ["a", "b"];
    let data = [0u64, 1, 2];
    let mut checked = 0;
    for seed in 0..6 {
        let a = random_rdpa(100 + seed, &alphabet, 3);
        let (def, phi) = translate(&a);
        let mut domain: BTreeMap<String, Vec<Value>> = BTreeMap::new();
        domain.insert("state".into(), (0..a.states.len() as i64).map(Value::Int).collect());
        for j in 1..=a.registers {
            let mut vs: Vec<Value> = data.iter().map(|d| Value::Int(*d as i64)).collect();
            vs.push(Value::text(rdpa::BOTTOM));
            domain.insert(format!("r{j}"), vs);
        }
        for w in DataPath::all(&alphabet, &data, 5) {
            let flat = data_constr(&def, &w)
                .unwrap()
                .iter()
                .any(|s| s.add_all(&ground_phi(&phi)).unwrap().is_consistent());
            assert_eq!(flat, direct_satisfiable(&def, &phi, &w, &domain), "seed {seed} on {w}");
            assert_eq!(flat, recognized(&def, &phi, &w), "seed {seed} on {w}");
            checked += 1;
        }
    }
    assert_eq!(checked, 6 * (18 + 108));
}
