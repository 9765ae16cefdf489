mod common;

use balstag_core::delay::DelaySpec;
use balstag_core::schedule::{
    check_feasibility, construct_schedule, evaluate, trip_cost, ObjectiveScope, Solution,
};
use balstag_core::TripId;
use common::{crowded, one_arc, recount_flows, starts_on_route0, unit_slope};
use proptest::prelude::*;

#[test]
fn second_entrant_sees_the_first() {
    // tau = 10, unit slope. A enters at 0 and leaves at 10; B enters at 5
    // with A still on the arc: flow 1, arrival 5 + 10 + 1.
    let inst = one_arc(10.0, &[(0.0, 0.0, 100.0), (5.0, 0.0, 100.0)], unit_slope());
    let sched = construct_schedule(&inst, &starts_on_route0(&[0.0, 5.0]));
    let a = &sched.trip(TripId(0)).unwrap().legs[0];
    let b = &sched.trip(TripId(1)).unwrap().legs[0];
    assert_eq!((a.flow, a.arrival_s), (0, 10.0));
    assert_eq!((b.flow, b.arrival_s), (1, 16.0));
    let cost = evaluate(&inst, &sched, 10.0, ObjectiveScope::System);
    assert_eq!(cost.total_delay_s, 1.0);
    assert_eq!(cost.congestion_delay_s, 1.0);
    assert_eq!(cost.cost, 1.0);
}

#[test]
fn late_entrant_is_reported() {
    let inst = one_arc(10.0, &[(0.0, 0.0, 100.0), (5.0, 0.0, 15.0)], unit_slope());
    let sched = construct_schedule(&inst, &starts_on_route0(&[0.0, 5.0]));
    assert_eq!(check_feasibility(&inst, &sched), vec![TripId(1)]);
    let cost = evaluate(&inst, &sched, 10.0, ObjectiveScope::System);
    assert_eq!(cost.infeasibility_s, 1.0);
    assert_eq!(cost.cost, 1.0 + 10.0 * 1.0);
}

#[test]
fn touching_intervals_do_not_conflict() {
    let inst = one_arc(10.0, &[(0.0, 0.0, 100.0), (10.0, 0.0, 100.0)], unit_slope());
    let sched = construct_schedule(&inst, &starts_on_route0(&[0.0, 10.0]));
    assert_eq!(sched.trip(TripId(1)).unwrap().legs[0].flow, 0);
}

#[test]
fn simultaneous_entry_breaks_ties_by_trip_id() {
    let inst = one_arc(
        10.0,
        &[(3.0, 0.0, 100.0), (3.0, 0.0, 100.0), (3.0, 0.0, 100.0)],
        unit_slope(),
    );
    let sched = construct_schedule(&inst, &starts_on_route0(&[3.0, 3.0, 3.0]));
    let flows: Vec<u32> = (0..3)
        .map(|i| sched.trip(TripId(i)).unwrap().legs[0].flow)
        .collect();
    assert_eq!(flows, vec![0, 1, 2]);
}

#[test]
fn fleet_scope_skips_baseload() {
    let inst = one_arc(10.0, &[(0.0, 0.0, 100.0), (5.0, 0.0, 100.0)], unit_slope())
        .with_control(&[true, false])
        .unwrap();
    let sched = construct_schedule(&inst, &starts_on_route0(&[0.0, 5.0]));
    assert_eq!(
        evaluate(&inst, &sched, 10.0, ObjectiveScope::Fleet).cost,
        0.0
    );
    assert_eq!(
        evaluate(&inst, &sched, 10.0, ObjectiveScope::System).cost,
        1.0
    );
}

#[test]
fn empty_solution_costs_nothing() {
    let inst = crowded(2, 10, 30.0, DelaySpec::default());
    let sched = construct_schedule(&inst, &Solution::empty(inst.trip_count()));
    assert_eq!(sched.iter().count(), 0);
    assert_eq!(
        evaluate(&inst, &sched, 10.0, ObjectiveScope::System).cost,
        0.0
    );
}

#[test]
fn crowded_instances_are_congested() {
    let inst = crowded(4, 30, 20.0, unit_slope());
    let sched = construct_schedule(&inst, &Solution::earliest_shortest(&inst));
    let max_flow = sched
        .iter()
        .flat_map(|(_, ts)| ts.legs.iter().map(|l| l.flow))
        .max()
        .unwrap();
    assert!(max_flow >= 2, "{max_flow}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sweep_flows_match_pairwise_recount(seed in 0u64..10_000, n in 2usize..40, horizon in 5.0f64..120.0) {
        let inst = crowded(seed, n, horizon, unit_slope());
        let sched = construct_schedule(&inst, &Solution::earliest_shortest(&inst));
        for (r, pos, f) in recount_flows(&sched) {
            prop_assert_eq!(sched.trip(r).unwrap().legs[pos].flow, f);
        }
    }

    #[test]
    fn legs_chain_and_costs_add_up(seed in 0u64..10_000, n in 1usize..30, alpha in 0.01f64..1000.0) {
        let inst = crowded(seed, n, 40.0, DelaySpec::default());
        let sched = construct_schedule(&inst, &Solution::earliest_shortest(&inst));
        let (mut delay, mut late) = (0.0, 0.0);
        for (id, ts) in sched.iter() {
            let trip = inst.trip(id);
            prop_assert_eq!(ts.start_s(), trip.earliest_departure_s);
            for w in ts.legs.windows(2) {
                prop_assert_eq!(w[0].arrival_s, w[1].departure_s);
            }
            for leg in &ts.legs {
                let nominal = inst.network().arc(leg.arc).nominal_s;
                prop_assert_eq!(leg.arrival_s, leg.departure_s + nominal + leg.delay_s);
                prop_assert_eq!(leg.delay_s, inst.delay_fn(leg.arc).delay(leg.flow));
            }
            let c = trip_cost(&inst, id, ts);
            prop_assert!(c.congestion_s >= 0.0 && c.detour_s >= 0.0 && c.lateness_s >= 0.0);
            delay += c.delay_s();
            late += c.lateness_s;
        }
        let cost = evaluate(&inst, &sched, alpha, ObjectiveScope::System);
        prop_assert!((cost.total_delay_s - delay).abs() < 1e-9);
        prop_assert!((cost.cost - (delay + alpha * late)).abs() < 1e-6 * (1.0 + cost.cost));
        prop_assert_eq!(cost.is_feasible(), check_feasibility(&inst, &sched).is_empty());
    }

    #[test]
    fn construction_is_deterministic(seed in 0u64..10_000, n in 2usize..25) {
        let inst = crowded(seed, n, 60.0, unit_slope());
        let sol = Solution::earliest_shortest(&inst);
        let a = construct_schedule(&inst, &sol);
        let b = construct_schedule(&inst, &sol);
        prop_assert_eq!(a, b);
    }
}
