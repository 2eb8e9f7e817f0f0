//! Property tests over arbitrary inputs, complementing the seeded sweeps in
//! the unit tests.

use proptest::prelude::*;

use sillsim_core::bridge::decode;
use sillsim_core::*;

proptest! {
    #[test]
    fn step_rh_never_leaves_the_unit_range(
        rh in 0.0f64..=100.0,
        ext in 0.0f64..=100.0,
        exchange in 0.0f64..=0.2,
        plant in 0.0f64..=5.0,
        human in 0.0f64..=5.0,
        wind in -5.0f64..=5.0,
        dt in 0.001f64..=300.0,
    ) {
        let state = MicroclimateState {
            rh_percent: rh,
            rh_exterior: ext,
            air_exchange_per_s: exchange,
        };
        let fluxes = FluxSet { plant, human, wind };
        let out = step_rh(&state, &fluxes, dt);
        prop_assert!((0.0..=100.0).contains(&out.rh_percent));
    }

    #[test]
    fn decode_never_panics_on_arbitrary_lines(line in proptest::collection::vec(any::<u8>(), 0..=80)) {
        let _ = decode(&line);
    }

    #[test]
    fn decode_encode_round_trips_valid_set_and_ok(pct in 0i64..=100) {
        use sillsim_core::bridge::{encode, ProtocolMessage};
        for msg in [ProtocolMessage::Set(pct), ProtocolMessage::Ok(pct)] {
            prop_assert_eq!(decode(encode(&msg).as_bytes()).unwrap(), msg);
        }
    }

    #[test]
    fn negotiation_partition_always_sums_to_one(
        values in proptest::collection::vec(0.0f64..=100.0, 1..60),
        step in 1.0f64..=120.0,
    ) {
        let series: Vec<(f64, f64)> = values
            .iter()
            .enumerate()
            .map(|(i, &rh)| (i as f64 * step, rh))
            .collect();
        let r = negotiation_report(&series, HUMAN_COMFORT_BAND, PLANT_COMFORT_LO).unwrap();
        let sum = r.occupancy_human + r.occupancy_plant + r.contested_time;
        prop_assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn controller_targets_stay_in_the_table(
        readings in proptest::collection::vec(0.0f64..=100.0, 1..200),
    ) {
        let cfg = ControllerConfig::default();
        let table = instruction_table(&cfg).unwrap();
        let mut state = ControllerState::new(&cfg);
        for reading in readings {
            let quantized = (reading * 100.0).round() / 100.0;
            let (cmd, next) = decide(&state, quantized, &cfg);
            if let Command::SetOpening(t) = cmd {
                prop_assert!(table.contains(&t));
            }
            prop_assert!(table.contains(&next.current_target));
            state = next;
        }
    }

    #[test]
    fn apparent_period_scales_inversely_with_speed(
        period in 1.0f64..=1_000_000.0,
        speed in 1u32..=64,
    ) {
        let base = apparent_period(period, &PlaybackSpec::at_speed(1));
        let scaled = apparent_period(period, &PlaybackSpec::at_speed(speed));
        prop_assert!((base / scaled - f64::from(speed)).abs() < 1e-9);
    }
}
