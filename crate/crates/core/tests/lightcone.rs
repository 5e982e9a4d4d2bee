use pecshadow::lightcone::light_cone;
use pecshadow::noise::{GateNoise, NoiseSpec};
use pecshadow::sim::{exact_density_with_channels, exact_expectation, RecoveryPolicy, StateVector};
use pecshadow::{Circuit, GateKind, PauliAxis, PauliString};
use proptest::prelude::*;

fn arb_circuit() -> impl Strategy<Value = Circuit> {
    proptest::collection::vec((0usize..4, 0usize..4, 0u8..4, -3.0f64..3.0), 1..14).prop_map(|ops| {
        let mut c = Circuit::new(4);
        for (a, b, k, angle) in ops {
            let kind = match k {
                0 if a != b => GateKind::Cnot,
                1 if a != b => GateKind::Exchange(angle),
                2 => GateKind::Ry(angle),
                _ => GateKind::Rx(angle),
            };
            let targets: Vec<usize> = if kind.arity() == 2 { vec![a, b] } else { vec![a] };
            c.push(kind, &targets).unwrap();
        }
        c
    })
}

fn arb_pauli() -> impl Strategy<Value = PauliString> {
    proptest::collection::vec(0usize..4, 4).prop_map(|axes| {
        let axes: Vec<PauliAxis> = axes.into_iter().map(|a| PauliAxis::from_index(a).unwrap()).collect();
        PauliString::from_axes(&axes)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Noise on gates outside the backward light cone never changes ⟨P⟩.
    #[test]
    fn out_of_cone_noise_is_invisible(c in arb_circuit(), p in arb_pauli()) {
        let cone = light_cone(&c, &p).unwrap();
        let all = NoiseSpec::uniform(&c, GateNoise::depolarizing(0.2), false).resolve(&c).unwrap();
        let outside: Vec<_> = c
            .gates()
            .iter()
            .zip(all)
            .map(|(g, ch)| if cone.contains(&g.id) { None } else { ch })
            .collect();
        let rho = exact_density_with_channels(&c, &outside, RecoveryPolicy::None).unwrap();
        let ideal = StateVector::from_circuit(&c).unwrap().expectation(&p).unwrap();
        prop_assert!((exact_expectation(&rho, &p).unwrap() - ideal).abs() < 1e-10);
    }
}
