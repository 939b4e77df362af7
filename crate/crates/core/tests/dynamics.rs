use macrokin_core::equilibrium::{
    entropy_project, exact_chain, first_passage_return_time, mean_return_time, product_form_law, solve_unitarity,
    DEFAULT_MAX_STATES,
};
use macrokin_core::meanfield::{gw_rhs, integrate, lv_first_integral, lyapunov_kl, ConcVector, OdeConfig};
use macrokin_core::models;
use macrokin_core::network::{conservation_laws, invariant_values, parse_network};
use macrokin_core::rng::{split, SplitMix64};
use macrokin_core::ssa::{simulate_replica, SimConfig};
use macrokin_core::stats::{empirical_tv, return_time_mc};

fn ehrenfest_error(step: f64) -> f64 {
    let (net, _) = models::ehrenfest(1, 1.0).unwrap();
    let path = integrate(&net, &ConcVector::new(vec![1.0, 0.0]).unwrap(), 5.0, &OdeConfig::new(step)).unwrap();
    path.times
        .iter()
        .zip(&path.states)
        .map(|(&t, c)| (c[0] - 0.5 - 0.5 * (-2.0 * t).exp()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn rk4_error_shrinks_with_fourth_order() {
    let coarse = ehrenfest_error(0.1);
    let fine = ehrenfest_error(0.05);
    assert!(coarse / fine >= 8.0, "{coarse} / {fine}");
}

#[test]
fn lotka_volterra_first_integral_and_period() {
    let (mu3, mu6, k) = (1.0, 0.5, 1.0);
    let (net, _) = models::lotka_volterra(mu3, mu6, k, 100).unwrap();
    let center = [mu6 / k, mu3 / k];
    let c0 = vec![center[0] * 1.01, center[1]];
    let path = integrate(&net, &ConcVector::new(c0.clone()).unwrap(), 20.0, &OdeConfig::new(1e-3)).unwrap();
    let h0 = lv_first_integral(&c0, mu3, mu6, k).unwrap();
    let drift = path
        .states
        .iter()
        .map(|c| (lv_first_integral(c, mu3, mu6, k).unwrap() - h0).abs() / h0.abs())
        .fold(0.0, f64::max);
    assert!(drift <= 1e-5, "{drift}");

    // Successive upward crossings of the prey center line.
    let mut crossings = Vec::new();
    for w in path.times.windows(2).zip(path.states.windows(2)) {
        let ((t0, t1), (a, b)) = ((w.0[0], w.0[1]), (&w.1[0], &w.1[1]));
        let (y0, y1) = (a[1] - center[1], b[1] - center[1]);
        if y0 < 0.0 && y1 >= 0.0 {
            crossings.push(t0 + (t1 - t0) * (-y0) / (y1 - y0));
        }
    }
    assert!(crossings.len() >= 2);
    let period = (crossings.last().unwrap() - crossings[0]) / (crossings.len() - 1) as f64;
    let expected = 2.0 * std::f64::consts::PI / (mu3 * mu6).sqrt();
    assert!((period - expected).abs() <= 0.02 * expected, "{period} vs {expected}");
}

#[test]
fn kl_decreases_for_complex_balanced_networks() {
    let (wealth, _) = models::wealth_exchange_kinetic(10, 2, 8, 1.0).unwrap();
    let rates = vec![
        vec![-1.0, 1.0, 0.0],
        vec![0.0, -2.0, 2.0],
        vec![0.5, 0.0, -0.5],
    ];
    let (pagerank, _) = models::pagerank_surfers(&rates, 10).unwrap();
    let (ehrenfest, _) = models::ehrenfest(10, 1.0).unwrap();
    let mut rng = SplitMix64::new(11);
    for net in [ehrenfest, wealth, pagerank] {
        let xi = solve_unitarity(&net, None, 1e-10).unwrap();
        assert!(xi.feasible);
        for _ in 0..5 {
            let c0: Vec<f64> = (0..net.species_count()).map(|_| rng.next_f64() + 0.01).collect();
            let path = integrate(&net, &ConcVector::new(c0).unwrap(), 3.0, &OdeConfig::new(1e-2)).unwrap();
            let kl: Vec<f64> = path.states.iter().map(|c| lyapunov_kl(c, &xi.xi).unwrap()).collect();
            assert!(kl.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        }
    }
}

#[test]
fn projection_is_a_fixed_point_and_ignores_the_choice_of_xi() {
    let net = parse_network("A + B -> C @ 2\nC -> A + B @ 1\nA -> D @ 1\nD -> A @ 3").unwrap();
    let basis = conservation_laws(&net);
    let xi1 = solve_unitarity(&net, None, 1e-12).unwrap();
    assert!(xi1.feasible);
    let xi2 = solve_unitarity(&net, Some(&[3.0, 0.2, 1.0, 0.1]), 1e-12).unwrap();
    // Shift along a conservation direction to get a genuinely different solution.
    let shifted: Vec<f64> = xi1
        .xi
        .iter()
        .zip(&basis.vectors[0])
        .map(|(x, &m)| x * (0.7f64).powi(m as i32))
        .collect();
    let b: Vec<f64> = invariant_values(&basis, &[30, 20, 5, 10])
        .unwrap()
        .into_iter()
        .map(|v| v as f64 / 50.0)
        .collect();
    let p1 = entropy_project(&xi1.xi, &basis, &b).unwrap();
    let p2 = entropy_project(&shifted, &basis, &b).unwrap();
    let p3 = entropy_project(&xi2.xi, &basis, &b).unwrap();
    for (x, y) in p1.c_star.iter().zip(&p2.c_star).chain(p1.c_star.iter().zip(&p3.c_star)) {
        assert!((x - y).abs() <= 1e-8);
    }
    let rhs = gw_rhs(&net, &ConcVector::new(p1.c_star.clone()).unwrap()).unwrap();
    assert!(rhs.iter().all(|x| x.abs() <= 1e-8), "{rhs:?}");
}

#[test]
fn product_form_matches_exact_chains() {
    let (e, _) = models::ehrenfest(12, 1.0).unwrap();
    let (w, _) = models::wealth_exchange_kinetic(4, 2, 8, 1.0).unwrap();
    let rates = vec![
        vec![-1.0, 1.0, 0.0, 0.0],
        vec![0.0, -1.0, 0.5, 0.5],
        vec![0.0, 0.0, -2.0, 2.0],
        vec![3.0, 0.0, 0.0, -3.0],
    ];
    let (p, _) = models::pagerank_surfers(&rates, 6).unwrap();
    let cases = [(e, vec![12, 0], 12), (w, vec![0, 0, 4, 0, 0, 0, 0, 0, 0], 4), (p, vec![6, 0, 0, 0], 6)];
    for (net, n0, scale) in cases {
        let xi = solve_unitarity(&net, None, 1e-12).unwrap();
        assert!(xi.feasible);
        let chain = exact_chain(&net, &n0, scale, DEFAULT_MAX_STATES).unwrap();
        let law = product_form_law(&chain, &xi.xi).unwrap();
        let err = law.iter().zip(&chain.stationary).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-10, "{err}");
    }
}

#[test]
fn return_time_methods_agree() {
    let (net, n0) = models::ehrenfest(8, 1.0).unwrap();
    let chain = exact_chain(&net, &n0, 8, DEFAULT_MAX_STATES).unwrap();
    let s = chain.index_of(&n0).unwrap();
    let a = mean_return_time(&chain, s).unwrap();
    let b = first_passage_return_time(&chain, s).unwrap();
    assert!((a.jump_steps - 256.0).abs() < 1e-9);
    assert!((a.continuous_time - b.continuous_time).abs() <= 1e-8 * a.continuous_time);

    let mc = return_time_mc(&net, &n0, 8, 2000, 5, 1_000_000).unwrap();
    assert_eq!(mc.truncated, 0);
    assert!((mc.mean - a.jump_steps).abs() <= 3.0 * mc.std_error, "{mc:?}");
}

#[test]
fn long_run_ensemble_is_close_to_binomial() {
    let (net, n0) = models::ehrenfest(10, 1.0).unwrap();
    let chain = exact_chain(&net, &n0, 10, DEFAULT_MAX_STATES).unwrap();
    let cfg = SimConfig::new(21, 10.0, 10.0);
    let ends: Vec<Vec<u64>> = (0..10_000)
        .map(|r| simulate_replica(&net, &n0, 10, &cfg, r).unwrap().terminal().to_vec())
        .collect();
    let refs: Vec<&[u64]> = ends.iter().map(Vec::as_slice).collect();
    let tv = empirical_tv(&refs, &chain.states, &chain.stationary).unwrap();
    assert!(tv <= 0.05, "{tv}");
}

#[test]
fn predators_die_out_at_small_population() {
    let (net, n0) = models::lotka_volterra(1.0, 1.0, 1.0, 50).unwrap();
    let mut cfg = SimConfig::new(0, 1e4, 1.0);
    cfg.max_events = 10_000_000;
    let runs = 200;
    let extinct = (0..runs)
        .filter(|&r| {
            cfg.seed = split(8, r);
            models::extinction_time(&net, &n0, 50, 1, &cfg).unwrap().is_some()
        })
        .count();
    assert!(extinct as f64 >= 0.95 * runs as f64, "{extinct}");
}
