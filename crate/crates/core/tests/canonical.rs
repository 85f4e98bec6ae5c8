mod common;

use common::{add_circulations, no_flow_into_inlet, stream_units, units};
use fppflow::capacity::{sample, LawSpec};
use fppflow::discretization::discretize;
use fppflow::geometry::shapes;
use fppflow::maxflow::{canonicalize_stream, max_flow, verify_stream, StreamFunction};
use fppflow::stream::{boundary_flux, flow_value, integrate};
use fppflow::Error;
use proptest::prelude::*;

fn perturbed(seed: u64, n: i64, law: &LawSpec) -> (fppflow::lattice::LatticeGraph, fppflow::capacity::CapacityField, StreamFunction) {
    let disc = discretize(&shapes::hourglass(), n).unwrap();
    let g = disc.graph;
    let caps = sample(law, &g, seed, 0).unwrap();
    let (s, _) = max_flow(&g, &caps).unwrap();
    let (scale, t) = units(&caps);
    let (_, f) = stream_units(&s);
    let mut f = f.to_vec();
    add_circulations(&g, t, &mut f, seed);
    let s = StreamFunction::from_units(&g, scale, f);
    (g, caps, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn canonical_form_contract(seed in 0u64..10_000, n in 4i64..9, bern in any::<bool>()) {
        let law = if bern { LawSpec::bernoulli("0.7", 3) } else { LawSpec::uniform(2) };
        let (g, caps, s) = perturbed(seed, n, &law);
        prop_assert!(verify_stream(&g, &caps, &s).is_admissible(0.0));
        let c = canonicalize_stream(&g, &caps, &s).unwrap();
        prop_assert_eq!(c.flow_q(&g), s.flow_q(&g));
        prop_assert!(verify_stream(&g, &caps, &c).is_admissible(0.0));
        prop_assert!(no_flow_into_inlet(&g, &c));
        prop_assert_eq!(canonicalize_stream(&g, &caps, &c).unwrap(), c.clone());
        prop_assert_eq!(flow_value(&g, &c), flow_value(&g, &s));
    }

    #[test]
    fn global_balance_and_total_variation(seed in 0u64..10_000, n in 4i64..9) {
        let (g, caps, s) = perturbed(seed, n, &LawSpec::uniform(1));
        let total: f64 = g.sources.iter().chain(&g.sinks).map(|&x| boundary_flux(&g, &s, x).unwrap()).sum();
        prop_assert!(total.abs() < 1e-9);
        // |∫ h dμ_n| <= ‖h‖∞ Σ|f| / n^d <= ‖h‖∞ M |Π_n| / n^d
        let bound = caps.max_f64() * g.edge_count() as f64 / (n * n) as f64;
        for v in integrate(&g, &s, |x| (x[0] * 7.0).sin()) {
            prop_assert!(v.abs() <= bound);
        }
    }
}

#[test]
fn backflow_into_inlet_is_removed() {
    let (g, caps, s) = perturbed(3, 8, &LawSpec::constant(2));
    // circulations on squares touching the inlet column create inlet-to-inlet flow
    let into_inlet = !no_flow_into_inlet(&g, &s);
    let c = canonicalize_stream(&g, &caps, &s).unwrap();
    assert!(into_inlet);
    assert!(no_flow_into_inlet(&g, &c));
}

#[test]
fn non_conservative_input_is_rejected() {
    let disc = discretize(&shapes::unit_square(), 4).unwrap();
    let g = &disc.graph;
    let caps = sample(&LawSpec::constant(1), g, 0, 0).unwrap();
    let mut f = vec![0; g.edge_count()];
    let interior = (0..g.vertex_count() as u32).find(|&v| !g.sources.contains(&v) && !g.sinks.contains(&v)).unwrap();
    let (e, _) = g.incident(interior).next().unwrap();
    f[e as usize] = 1;
    let s = StreamFunction::from_units(g, 1, f);
    assert!(matches!(canonicalize_stream(g, &caps, &s), Err(Error::NotConservative { .. })));
}
