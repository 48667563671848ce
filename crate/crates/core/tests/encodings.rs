use permqubo::encodings::{Constraint, EncodingSpec};
use permqubo::networks::Topology;
use permqubo::oracle::oracle_solutions;
use permqubo::perm::Permutation;
use permqubo::verify::{uniformity_check, zero_set_exhaustive, VerifyOptions};

fn agrees(spec: EncodingSpec) {
    let inst = spec.build().unwrap();
    let report = uniformity_check(&inst, &VerifyOptions::default()).unwrap();
    let oracle = oracle_solutions(&spec).unwrap();
    assert_eq!(report.solutions, oracle, "{spec:?}");
}

#[test]
fn perm_n2_full_space() {
    let inst = EncodingSpec::perm(2).build().unwrap();
    assert_eq!(inst.num_vars(), 16);
    let vars: Vec<_> = inst.registry.ids().collect();
    let z = zero_set_exhaustive(&inst.poly, &vars, 24).unwrap();
    assert_eq!(z.minimum, 0);
    assert_eq!(z.zeros.len(), 2);
}

#[test]
fn plain_perm_all_topologies() {
    for t in Topology::ALL {
        for n in 1..=4 {
            agrees(EncodingSpec::perm(n).with_topology(t));
        }
    }
}

#[test]
fn constraints_match_oracle() {
    let cs = [
        "fix:1=2",
        "forbid:2=1",
        "fixed-point:3",
        "derangement",
        "forbid-perm:2,3,1",
        "even",
        "odd",
        "involution",
        "power:3",
        "order:2",
        "order:3",
        "compose",
        "commute",
        "conjugate",
    ];
    for n in [3] {
        for c in cs {
            let c: Constraint = c.parse().unwrap();
            agrees(EncodingSpec::perm(n).with(c.clone()));
        }
    }
}

#[test]
fn matrix_matches_oracle() {
    for c in [
        "fix:1=2",
        "forbid:2=1",
        "derangement",
        "forbid-perm:2,3,1",
        "even",
        "odd",
        "compose",
    ] {
        let c: Constraint = c.parse().unwrap();
        agrees(EncodingSpec::matrix(3).with(c));
    }
}

#[test]
fn match_matches_oracle() {
    for pat in ["2,1", "1,2,3", "1,2"] {
        let p: Permutation = pat.parse().unwrap();
        agrees(EncodingSpec::pattern_match(3, p));
    }
}
