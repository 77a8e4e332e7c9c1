use nogaps_cli::config::{ExperimentConfig, ExperimentKind};
use nogaps_cli::experiment::run_experiment;
use nogaps_core::ensembles::EntryLaw;
use nogaps_core::nets::smin_tail_experiment;

#[test]
#[ignore]
fn probe_criterion6_slopes() {
    let mut c = ExperimentConfig::new(ExperimentKind::NullVectorTail, 20_000, 424242);
    c.n = Some(48);
    c.k_list = Some(vec![1, 2, 3]);
    c.t_grid = Some(vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
    let s = run_experiment(&c).unwrap();
    for sl in &s.slopes {
        println!("spec-grid  k={} slope={:.3} +- {:.3}", sl.i_or_k, sl.slope, sl.ci_halfwidth);
    }
    // small-t diagnostic grid
    let mut c2 = c.clone();
    c2.t_grid = Some(vec![0.04, 0.06, 0.09, 0.13, 0.2, 0.3]);
    c2.trials = 200_000;
    let s2 = run_experiment(&c2).unwrap();
    for sl in &s2.slopes {
        println!("small-grid k={} slope={:.3} +- {:.3}", sl.i_or_k, sl.slope, sl.ci_halfwidth);
    }
}

#[test]
#[ignore]
fn probe_criterion9_smin_slope() {
    for grid in [vec![0.05, 0.08, 0.12, 0.18, 0.24, 0.3], vec![0.08, 0.12, 0.17, 0.23, 0.3, 0.38]] {
        let rep = smin_tail_experiment(8, 4, &EntryLaw::Gaussian, None, &grid, 100_000, 31337).unwrap();
        println!("grid {:?}", grid);
        println!("probs {:?}", rep.probs);
        println!("slope {:?}", rep.slope);
    }
}
