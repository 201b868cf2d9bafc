use hexweb::invariants::{signature, standard_branch_loops, gamma_periods};
use hexweb::parser::parse_ode;
use hexweb::symmetry::EulerField;
use hexweb::algebra::rat;

#[test]
fn probe_periods() {
    for src in ["p^3 + x*p - y", "p^3 + x*p + y"] {
        let ode = parse_ode(src).unwrap();
        let e = EulerField::new(rat(2), rat(3)).unwrap();
        let loops = standard_branch_loops(&ode, &e).unwrap();
        let red = ode.as_reduced().unwrap();
        let vals = gamma_periods(&red, &loops).unwrap();
        for (lp, v) in loops.iter().zip(&vals) {
            println!("{src}: loop {} -> {v}", lp.label);
        }
        let sig = signature(&ode, Some(&e));
        println!("{src}: sig mu={:?} weights={:?} kind={:?} sing={:?} cr={:?}",
            sig.mu, sig.weights.as_ref().map(|w| w.to_string()),
            sig.euler_kind, sig.sing_type, sig.cross_ratio.as_ref().map(|c| c.to_string()));
        println!("{src}: periods={:?}", sig.periods);
    }
}
