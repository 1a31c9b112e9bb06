mod common;

use std::fs;

use common::{dense_marginals, dense_step, dense_transition_matrix, tv};
use sirsnet_core::experiments::{
    run_experiment, run_layer_comparison, run_mixing_scaling, run_threshold_sweep, ExperimentSpec, MixingStatus,
};
use sirsnet_core::meanfield::Regime;
use sirsnet_core::{generate, spectral_radius_default, EpidemicParams, GraphKind, Variant};

fn spec(json: serde_json::Value) -> ExperimentSpec {
    ExperimentSpec::from_json(&json.to_string()).unwrap()
}

#[test]
fn zero_beta_decays_at_healing_rate() {
    let s = spec(serde_json::json!({
        "name": "decay", "kind": "threshold_sweep", "graph": "er:80:0.1", "graph_seed": 1,
        "grid": {"beta": [0.0], "delta": [0.1, 0.3], "gamma": [0.2]},
        "layers": ["meanfield", "linear"], "horizon": 120
    }));
    let out = run_threshold_sweep(&s, 2).unwrap();
    for row in &out.rows {
        let expected = (1.0 - row.delta).ln();
        assert!((row.decay_rate_fit.unwrap() - expected).abs() < 1e-6);
        assert!((row.decay_rate_fit_linear.unwrap() - expected).abs() < 1e-6);
        assert_eq!(row.regime, Regime::Subcritical);
    }
}

#[test]
fn subcritical_fit_respects_norm_bound() {
    let g = generate(GraphKind::ErdosRenyi { n: 200, p: 0.05 }, 3).unwrap();
    let lambda = spectral_radius_default(&g).unwrap().lambda_max;
    let delta = 0.4;
    let s = spec(serde_json::json!({
        "name": "fit", "kind": "threshold_sweep", "graph": "er:200:0.05", "graph_seed": 3,
        "grid": {"beta": [0.8 * delta / lambda], "delta": [delta], "gamma": [0.3, 0.9]},
        "layers": ["meanfield"], "horizon": 100
    }));
    for row in run_threshold_sweep(&s, 1).unwrap().rows {
        assert!((row.ratio_global - 0.8).abs() < 1e-9);
        assert!(row.decay_rate_fit.unwrap() <= row.log_norm_bound + 0.05);
        assert!(row.endemic_level_mf.is_none());
    }
}

#[test]
fn vaccination_dominant_flip_tracks_one_minus_theta() {
    let g = generate(GraphKind::ErdosRenyi { n: 100, p: 0.08 }, 5).unwrap();
    let lambda = spectral_radius_default(&g).unwrap().lambda_max;
    let (delta, ratio) = (0.5, 1.7);
    let thetas: Vec<f64> = (0..=20).map(|k| k as f64 * 0.025).collect();
    let s = spec(serde_json::json!({
        "name": "flip", "kind": "threshold_sweep", "graph": "er:100:0.08", "graph_seed": 5,
        "grid": {"variant": ["siv_vaccination_dominant"], "beta": [ratio * delta / lambda],
                 "delta": [delta], "gamma": [0.4], "theta": thetas},
        "layers": []
    }));
    let rows = run_threshold_sweep(&s, 4).unwrap().rows;
    for row in &rows {
        let expected = if (1.0 - row.theta) * ratio < 1.0 { Regime::Subcritical } else { Regime::Supercritical };
        assert_eq!(row.regime, expected, "theta {}", row.theta);
    }
    let flips = rows.windows(2).filter(|w| w[0].regime != w[1].regime).count();
    assert_eq!(flips, 1);
}

#[test]
fn layers_agree_at_start_and_without_transmission() {
    for variant in ["sirs", "siv_infection_dominant", "siv_vaccination_dominant"] {
        let theta = if variant == "sirs" { 0.0 } else { 0.2 };
        let s = spec(serde_json::json!({
            "name": "layers", "kind": "layer_comparison", "graph": "cycle:5",
            "grid": {"variant": [variant], "beta": [0.0, 0.6], "delta": [0.3], "gamma": [0.4], "theta": [theta]},
            "layers": ["exact", "meanfield", "linear"], "horizon": 15, "init": "fraction:0.4", "seed": 2
        }));
        let rows = run_layer_comparison(&s, 2).unwrap();
        for r in &rows {
            if r.t == 0 {
                assert_eq!(r.max_abs_diff_infected, 0.0);
                assert_eq!(r.linear_max_abs_diff_infected, Some(0.0));
            }
            if r.beta == 0.0 {
                assert!(r.max_abs_diff_infected < 1e-15 && r.max_abs_diff_recovered < 1e-15);
            }
        }
        assert!(rows.iter().any(|r| r.beta > 0.0 && r.max_abs_diff_infected > 1e-3));
    }
}

#[test]
fn triangle_discrepancy_matches_dense_pipeline() {
    let s = spec(serde_json::json!({
        "name": "tri", "kind": "layer_comparison", "graph": "complete:3",
        "grid": {"beta": [0.7], "delta": [0.2], "gamma": [0.3]},
        "layers": ["exact", "meanfield"], "horizon": 20, "init": "one", "seed": 4
    }));
    let rows = run_layer_comparison(&s, 1).unwrap();
    let g = generate(GraphKind::Complete(3), 0).unwrap();
    let p = EpidemicParams::sirs(0.7, 0.2, 0.3).unwrap();
    let m = dense_transition_matrix(&g, &p);
    // recover the start from the t = 0 row: exactly one node is infected
    let start_infected = (0..3)
        .find(|&k| {
            let mut mu = vec![0.0; 27];
            mu[3usize.pow(k as u32)] = 1.0;
            let (_, i) = dense_marginals(3, &dense_step(&m, &mu));
            let first = rows.iter().find(|r| r.t == 1).unwrap();
            (i.iter().sum::<f64>() / 3.0 - first.exact_mean_infected).abs() < 1e-15
        })
        .unwrap();
    let mut mu = vec![0.0; 27];
    mu[3usize.pow(start_infected as u32)] = 1.0;
    let mut pr = vec![0.0; 3];
    let mut pi = vec![0.0; 3];
    pi[start_infected] = 1.0;
    for _ in 0..20 {
        mu = dense_step(&m, &mu);
        let (r, i) = (pr.clone(), pi.clone());
        for k in 0..3 {
            let escape: f64 = (0..3).filter(|&j| j != k).map(|j| 1.0 - 0.7 * i[j]).product();
            pr[k] = 0.7 * r[k] + 0.2 * i[k];
            pi[k] = 0.8 * i[k] + (1.0 - escape) * (1.0 - r[k] - i[k]);
        }
    }
    let (_, exact_i) = dense_marginals(3, &mu);
    let expected = exact_i.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let got = rows.iter().find(|r| r.t == 20).unwrap().max_abs_diff_infected;
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}

#[test]
fn mixing_scaling_stays_under_bound() {
    let s = spec(serde_json::json!({
        "name": "mix", "kind": "mixing_scaling", "graph": "path:{n}",
        "node_counts": [2, 3, 4, 5, 6, 7, 8], "layers": ["exact"],
        "grid": {"beta": [0.05], "delta": [0.5], "gamma": [0.9]}
    }));
    let rows = run_mixing_scaling(&s, 4).unwrap();
    assert_eq!(rows.len(), 7);
    for r in &rows {
        assert_eq!(r.status, MixingStatus::Ok);
        assert!(r.t_mix.unwrap() as f64 <= r.bound_steps.unwrap(), "n={}", r.n);
    }
    let loose = spec(serde_json::json!({
        "name": "mix", "kind": "mixing_scaling", "graph": "path:{n}", "epsilon": 0.99,
        "node_counts": [2, 3, 4, 5, 6, 7, 8], "layers": ["exact"],
        "grid": {"beta": [0.05], "delta": [0.5], "gamma": [0.9]}
    }));
    for (a, b) in run_mixing_scaling(&loose, 4).unwrap().iter().zip(&rows) {
        assert!(a.t_mix.unwrap() <= b.t_mix.unwrap());
    }
}

#[test]
fn single_node_mixing_matches_dense_oracle() {
    let s = spec(serde_json::json!({
        "name": "one", "kind": "mixing_scaling", "graph": "path:{n}",
        "node_counts": [1], "layers": ["exact"],
        "grid": {"beta": [0.3], "delta": [0.35], "gamma": [0.2]}
    }));
    let row = &run_mixing_scaling(&s, 1).unwrap()[0];
    let g = generate(GraphKind::Path(1), 0).unwrap();
    let m = dense_transition_matrix(&g, &EpidemicParams::sirs(0.3, 0.35, 0.2).unwrap());
    let pi = [1.0, 0.0, 0.0];
    let mut mu = vec![0.0, 1.0, 0.0];
    let mut t = 0;
    while tv(&mu, &pi) > 0.25 {
        mu = dense_step(&m, &mu);
        t += 1;
    }
    assert_eq!(row.t_mix, Some(t));
}

#[test]
fn supercritical_budget_exhaustion_is_reported() {
    let s = spec(serde_json::json!({
        "name": "slow", "kind": "mixing_scaling", "graph": "complete:{n}",
        "node_counts": [6], "layers": ["exact"], "max_steps": 50,
        "grid": {"beta": [0.9], "delta": [0.05], "gamma": [0.05]}
    }));
    let row = &run_mixing_scaling(&s, 1).unwrap()[0];
    assert_eq!(row.status, MixingStatus::SlowMixingSuspected);
    assert_eq!(row.bound_steps, None);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let make = |sub: &str| {
        spec(serde_json::json!({
            "name": "det", "kind": "threshold_sweep", "graph": "er:120:0.05", "graph_seed": 9,
            "grid": {"variant": ["sirs"], "beta": [0.05, 0.2], "delta": [0.4], "gamma": [0.3]},
            "layers": ["meanfield", "linear", "montecarlo"], "horizon": 150, "replicas": 6, "seed": 3,
            "output_dir": dir.path().join(sub)
        }))
    };
    let a = run_experiment(&make("a"), 1).unwrap();
    let b = run_experiment(&make("b"), 4).unwrap();
    let c = run_experiment(&make("a"), 1).unwrap();
    assert_eq!(a.metadata.outputs, b.metadata.outputs);
    assert!(a.metadata.outputs.iter().any(|f| f.ends_with(".svg")));
    for (fa, fb) in a.files.iter().zip(&b.files) {
        let name = fa.file_name().unwrap();
        if name == "det_metadata.json" {
            continue;
        }
        assert_eq!(fs::read(fa).unwrap(), fs::read(fb).unwrap(), "{name:?}");
    }
    for (fa, fc) in a.files.iter().zip(&c.files) {
        assert_eq!(fs::read(fa).unwrap(), fs::read(fc).unwrap());
    }
    let sweep = fs::read_to_string(dir.path().join("a/det_sweep.csv")).unwrap();
    assert!(sweep.starts_with("point,variant,beta,delta,gamma,theta,"));
    assert_eq!(sweep.lines().count(), 3);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/det_metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["spec_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(meta["decay_fit_window"], serde_json::json!([10, 100]));
    assert!(meta.get("wall_time").is_none());
}

#[test]
fn variant_names_in_rows() {
    let s = spec(serde_json::json!({
        "name": "v", "kind": "threshold_sweep", "graph": "star:6",
        "grid": {"variant": ["siv_infection_dominant"], "beta": [0.3], "delta": [0.5], "gamma": [0.5], "theta": [0.5]},
        "layers": ["meanfield"], "horizon": 100
    }));
    let row = &run_threshold_sweep(&s, 1).unwrap().rows[0];
    assert_eq!(row.variant, Variant::SivInfectionDominant);
    assert!((row.ratio_local - 0.5 * row.ratio_global).abs() < 1e-15);
}
