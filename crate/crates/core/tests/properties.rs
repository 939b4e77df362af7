use macrokin_core::equilibrium::total_variation;
use macrokin_core::meanfield::{gw_rhs, ConcVector};
use macrokin_core::network::{
    conservation_laws, format_network, invariant_values, parse_network, stoichiometric_rank, Reaction,
    ReactionNetwork, SpeciesTable,
};
use macrokin_core::ssa::{propensities, simulate, IntensityConvention, SimConfig};
use macrokin_core::stats::{concentration_threshold, fit_exponential, fit_power_law, ExpFitOptions, PowerFitOptions};
use proptest::prelude::*;

fn network_strategy() -> impl Strategy<Value = ReactionNetwork> {
    (1usize..=4).prop_flat_map(|m| {
        let side = prop::collection::vec(0u32..=2, m);
        let reaction = (side.clone(), side, prop::sample::select(vec![0.5, 1.0, 2.0, 3.25, 1e-3, 7.0]));
        prop::collection::vec(reaction, 1..=5).prop_filter_map("no usable reactions", move |rs| {
            let reactions: Vec<Reaction> = rs
                .into_iter()
                .filter(|(a, b, _)| a != b)
                .map(|(a, b, k)| Reaction::new(a, b, k))
                .collect();
            if reactions.is_empty() {
                return None;
            }
            let species = SpeciesTable::new((0..m).map(|i| format!("S{i}"))).unwrap();
            ReactionNetwork::new(species, reactions).ok()
        })
    })
}

/// Rank over the rationals by Bareiss fraction-free elimination.
fn bareiss_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let (n, m) = (a.len(), a.first().map_or(0, Vec::len));
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..m {
        let Some(p) = (rank..n).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..n {
            for j in col + 1..m {
                a[i][j] = (a[rank][col] * a[i][j] - a[i][col] * a[rank][j]) / prev;
            }
            a[i][col] = 0;
        }
        prev = a[rank][col];
        rank += 1;
        if rank == n {
            break;
        }
    }
    rank
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn format_then_parse_is_identity(net in network_strategy()) {
        let text = format_network(&net);
        let back = parse_network(&text).unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn conservation_dimension_matches_rank(net in network_strategy()) {
        let basis = conservation_laws(&net);
        let rows: Vec<Vec<i64>> = net.reactions().iter().map(Reaction::stoichiometry).collect();
        prop_assert_eq!(basis.len(), net.species_count() - bareiss_rank(&rows));
        prop_assert_eq!(stoichiometric_rank(&net), bareiss_rank(&rows));
        prop_assert!(basis.is_conserved_by(&net));
        let mut stacked = basis.vectors.clone();
        prop_assert_eq!(bareiss_rank(&stacked), basis.len());
        stacked.extend(rows);
        // Laws and reaction vectors are orthogonal complements.
        prop_assert_eq!(bareiss_rank(&stacked), net.species_count());
    }

    #[test]
    fn invariants_hold_along_paths(net in network_strategy(), seed in any::<u64>(), n0 in prop::collection::vec(0u64..30, 4)) {
        let m = net.species_count();
        let n0 = &n0[..m];
        let basis = conservation_laws(&net);
        let start = invariant_values(&basis, n0).unwrap();
        let mut cfg = SimConfig::new(seed, 2.0, 0.25);
        cfg.max_events = 2_000;
        let traj = simulate(&net, n0, 10, &cfg).unwrap();
        for (_, counts) in traj.samples() {
            prop_assert_eq!(&invariant_values(&basis, counts).unwrap(), &start);
        }
    }

    #[test]
    fn mean_field_flow_stays_on_slice(net in network_strategy(), c in prop::collection::vec(0.0f64..3.0, 4)) {
        let m = net.species_count();
        let rhs = gw_rhs(&net, &ConcVector::new(c[..m].to_vec()).unwrap()).unwrap();
        let scale = rhs.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        for mu in &conservation_laws(&net).vectors {
            let d: f64 = mu.iter().zip(&rhs).map(|(&a, b)| a as f64 * b).sum();
            prop_assert!(d.abs() <= 1e-12 * scale * mu.iter().map(|x| x.abs() as f64).sum::<f64>());
        }
    }

    #[test]
    fn mean_field_is_limit_of_propensities(net in network_strategy(), c in prop::collection::vec(0.05f64..2.0, 4)) {
        let m = net.species_count();
        let n = 1_000_000u64;
        let counts: Vec<u64> = c[..m].iter().map(|x| (x * n as f64).round() as u64).collect();
        let conc: Vec<f64> = counts.iter().map(|&k| k as f64 / n as f64).collect();
        let rhs = gw_rhs(&net, &ConcVector::new(conc).unwrap()).unwrap();
        let a = propensities(&net, &counts, n, IntensityConvention::Kurtz).unwrap();
        let mut drift = vec![0.0; m];
        for (r, rate) in net.reactions().iter().zip(&a) {
            for (d, s) in drift.iter_mut().zip(r.stoichiometry()) {
                *d += s as f64 * rate / n as f64;
            }
        }
        let scale: f64 = net.reactions().iter().zip(&a).map(|(r, x)| x / n as f64 * r.order().max(1) as f64).sum::<f64>().max(1e-300);
        for (x, y) in rhs.iter().zip(&drift) {
            prop_assert!((x - y).abs() <= 1e-4 * scale, "{} vs {}", x, y);
        }
    }

    #[test]
    fn threshold_decreases_in_sigma_and_n(s1 in 1e-6f64..0.5, s2 in 1e-6f64..0.5, n1 in 1u64..1_000_000, n2 in 1u64..1_000_000) {
        let (slo, shi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        let (nlo, nhi) = if n1 < n2 { (n1, n2) } else { (n2, n1) };
        prop_assert!(concentration_threshold(nlo, shi) <= concentration_threshold(nlo, slo));
        prop_assert!(concentration_threshold(nhi, slo) <= concentration_threshold(nlo, slo));
    }

    #[test]
    fn total_variation_is_a_metric(raw in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 6), 3)) {
        let laws: Vec<Vec<f64>> = raw
            .iter()
            .map(|v| {
                let s: f64 = v.iter().sum::<f64>() + 1e-9;
                v.iter().map(|x| (x + 1e-9 / 6.0) / s).collect()
            })
            .collect();
        let (p, q, r) = (&laws[0], &laws[1], &laws[2]);
        prop_assert!(total_variation(p, p).abs() < 1e-15);
        prop_assert!((total_variation(p, q) - total_variation(q, p)).abs() < 1e-15);
        prop_assert!(total_variation(p, r) <= total_variation(p, q) + total_variation(q, r) + 1e-12);
        prop_assert!(total_variation(p, q) <= 1.0 + 1e-12);
    }

    #[test]
    fn fits_recover_planted_parameters(rate in 0.01f64..1.0, exponent in 0.5f64..4.0, amp in 1e3f64..1e9) {
        let h: Vec<f64> = (0..40).map(|s| amp * (-(s as f64) * rate).exp()).collect();
        let opts = ExpFitOptions { min_count: 0.0 };
        let f = fit_exponential(&h, &opts).unwrap();
        prop_assert!((f.parameter - rate).abs() <= 1e-10 * rate.max(1.0));
        let xs: Vec<f64> = (1..=60).map(|x| x as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| amp * x.powf(-exponent)).collect();
        let popts = PowerFitOptions { skip_head: 0, min_count: 0.0, log_bin: 0.0 };
        let g = fit_power_law(&xs, &ys, &popts).unwrap();
        prop_assert!((g.parameter - exponent).abs() <= 1e-10 * exponent);
    }
}
