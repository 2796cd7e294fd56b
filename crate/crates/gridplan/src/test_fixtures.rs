//! Shared in-crate test fixtures.

use crate::model::{
    AssetStatus, EconomicParams, Line, NetworkTopology, Node, StorageDevice, TypicalDay,
};

/// Five-bus radial toy: sub - n1 - n2 - n3 - n4 over existing lines, one
/// candidate tie sub - n3, storage at n2 (existing) and n4 (candidate),
/// two typical days of six 4-hour periods.
pub(crate) fn toy_topology() -> NetworkTopology {
    let nodes = vec![
        Node {
            id: "sub".into(),
            is_substation: true,
            peak_demand_kw: 0.0,
            customers: 0,
            injection_limit_kw: Some(10_000.0),
        },
        Node {
            id: "n1".into(),
            is_substation: false,
            peak_demand_kw: 80.0,
            customers: 40,
            injection_limit_kw: None,
        },
        Node {
            id: "n2".into(),
            is_substation: false,
            peak_demand_kw: 100.0,
            customers: 55,
            injection_limit_kw: None,
        },
        Node {
            id: "n3".into(),
            is_substation: false,
            peak_demand_kw: 60.0,
            customers: 25,
            injection_limit_kw: None,
        },
        Node {
            id: "n4".into(),
            is_substation: false,
            peak_demand_kw: 40.0,
            customers: 12,
            injection_limit_kw: None,
        },
    ];
    let mk_line = |id: &str, from: &str, to: &str, status: AssetStatus, cost: Option<f64>| Line {
        id: id.into(),
        from_node: from.into(),
        to_node: to.into(),
        impedance_per_len: 1e-5,
        length_mi: 1.0,
        capacity_kw: 5000.0,
        status,
        fixed_cost_usd: cost,
    };
    let lines = vec![
        mk_line("l1", "sub", "n1", AssetStatus::Existing, None),
        mk_line("l2", "n1", "n2", AssetStatus::Existing, None),
        mk_line("l3", "n2", "n3", AssetStatus::Existing, None),
        mk_line("l4", "n3", "n4", AssetStatus::Existing, None),
        mk_line("c1", "sub", "n3", AssetStatus::Candidate, Some(158_000.0)),
    ];
    let storage = vec![
        StorageDevice {
            id: "b1".into(),
            node: "n2".into(),
            status: AssetStatus::Existing,
            p_in_max_kw: 25.0,
            p_out_max_kw: 25.0,
            round_trip_eff: 0.9,
            hours_to_full: 4.0,
            fixed_cost_usd: None,
            var_cost_usd_per_kwh: None,
            size_cap: None,
        },
        StorageDevice {
            id: "b2".into(),
            node: "n4".into(),
            status: AssetStatus::Candidate,
            p_in_max_kw: 50.0,
            p_out_max_kw: 50.0,
            round_trip_eff: 0.95,
            hours_to_full: 4.0,
            fixed_cost_usd: Some(20_000.0),
            var_cost_usd_per_kwh: Some(660.0),
            size_cap: Some(2.0),
        },
    ];
    let day = |id: &str, w: f64, peak_t: usize| {
        let mut load = vec![0.0, 0.5, 0.8, 1.0, 0.7, 0.4];
        load.rotate_right(peak_t % 6);
        TypicalDay {
            id: id.into(),
            weight_days_per_year: w,
            hours_per_period: 4.0,
            load_factor: load,
            price_usd_per_kwh: vec![0.02, 0.03, 0.06, 0.09, 0.07, 0.03],
        }
    };
    let typical_days = vec![day("winter", 182.0, 0), day("summer", 183.0, 1)];
    let economic = EconomicParams {
        voll_usd_per_kwh: 1.5,
        power_factor: 0.95,
        lambda_risk: 0.5,
        cvar_alpha: 0.95,
        v_min: 0.95,
        v_max: 1.05,
    };
    NetworkTopology::new(nodes, lines, storage, typical_days, economic).unwrap()
}
