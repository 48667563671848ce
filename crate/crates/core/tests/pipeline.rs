use num_rational::Ratio;
use permqubo::encodings::EncodingSpec;
use permqubo::format::{self, Ising};
use permqubo::networks::Topology;
use permqubo::pbf::{bit_width, Assignment, VarId};
use permqubo::solve::{exhaustive_min, sample_instance, SaParams};
use permqubo::stats::instance_stats;

#[test]
fn annealed_ground_states_decode_to_permutations() {
    let inst = EncodingSpec::perm(3).build().unwrap();
    let params = SaParams {
        reads: 32,
        sweeps: 400,
        seed: 3,
        ..SaParams::default()
    };
    let (samples, stats) = sample_instance(&inst, &params, Some(6)).unwrap();
    assert_eq!(samples.len(), 32);
    assert!(stats.ground > 0);
    assert_eq!(stats.solutions.values().sum::<usize>(), stats.ground);
    assert!(stats.solutions.len() <= 6);
    assert!(samples.iter().all(|s| s.energy >= 0));
}

#[test]
fn exhaustive_minimum_of_small_instance() {
    let inst = EncodingSpec::perm(2).build().unwrap();
    let vars: Vec<VarId> = inst.registry.ids().collect();
    let (min, points) = exhaustive_min(&inst.poly, &vars, 24).unwrap();
    assert_eq!(min, 0);
    assert_eq!(points.len(), 2);
    for p in points {
        let asg = Assignment::from_pairs(vars.iter().copied().zip(p));
        let pi = inst.decode.permutation("pi", &asg).unwrap();
        assert_eq!(pi.len(), 2);
    }
}

#[test]
fn ising_export_of_an_instance_matches_on_random_points() {
    use rand::{Rng, SeedableRng};
    let inst = EncodingSpec::perm(3)
        .with("even".parse().unwrap())
        .build()
        .unwrap();
    let ising = Ising::from_qubo(&inst.poly);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let x: Vec<bool> = (0..inst.num_vars()).map(|_| rng.gen()).collect();
        let asg = Assignment::from_pairs(x.iter().enumerate().map(|(i, &b)| (VarId(i as u32), b)));
        let e = ising.energy(|v| if x[v.index()] { 1 } else { -1 });
        assert_eq!(e, Ratio::from_integer(inst.poly.eval(&asg).unwrap()));
    }
}

#[test]
fn stats_account_for_every_variable() {
    for t in Topology::ALL {
        for n in 2..=9 {
            let inst = EncodingSpec::perm(n).with_topology(t).build().unwrap();
            let s = instance_stats(&inst);
            assert_eq!(s.inputs, n * bit_width(n));
            assert_eq!(s.inputs + s.aux + s.controls, s.vars);
            assert_eq!(s.controls, inst.meta.gates.len());
        }
    }
}

#[test]
fn qubo_text_lists_every_term() {
    let inst = EncodingSpec::matrix(3).build().unwrap();
    let text = format::to_qubo(&inst.poly, inst.num_vars());
    let header = text.lines().find(|l| l.starts_with("p qubo")).unwrap();
    let fields: Vec<usize> = header
        .split_whitespace()
        .skip(2)
        .map(|f| f.parse().unwrap())
        .collect();
    assert_eq!(fields[1], 9);
    let body = text
        .lines()
        .filter(|l| !l.starts_with('c') && !l.starts_with('p'))
        .count();
    assert_eq!(body, fields[2] + fields[3]);
    for line in text
        .lines()
        .filter(|l| !l.starts_with('c') && !l.starts_with('p'))
    {
        let f: Vec<i64> = line
            .split_whitespace()
            .map(|v| v.parse().unwrap())
            .collect();
        assert!(f[0] <= f[1]);
    }
}
