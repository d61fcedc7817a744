use biot_geneo::block_precond::PrecondVariant;
use biot_geneo::geneo::{GeneoPencil, Selection};
use biot_geneo::harness::{Experiment, ExperimentConfig, MaterialPattern};
use biot_geneo::Error;
use proptest::prelude::*;

proptest! {
    #[test]
    fn text_round_trip(
        k in 1usize..5,
        cells in 1usize..6,
        overlap in 1usize..4,
        nu in 0.0..0.4999f64,
        kappa_exp in -9i32..1,
        deflation in 0usize..30,
        variant in prop::sample::select(PrecondVariant::ALL.to_vec()),
        experiment in prop::sample::select(Experiment::ALL.to_vec()),
        pattern in prop::sample::select(vec![MaterialPattern::Uniform, MaterialPattern::Across, MaterialPattern::Along]),
        underscores in any::<bool>(),
    ) {
        let kappa = 10f64.powi(kappa_exp);
        let n = k * cells;
        let t_end = if underscores { "t_end" } else { "t-end" };
        let text = format!(
            "# generated\nexperiment = {experiment}\nn = {n}\nkx = {k}\nky = {k}\noverlap = {overlap}\n\
             nu = {nu:?}\nkappa = {kappa:e}  # trailing comment\ndeflation = {deflation}\nprecond = {variant}\n\
             pattern = {pattern}\n{t_end} = 0.5\n"
        );
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(&text).unwrap();
        prop_assert_eq!(cfg.experiment, experiment);
        prop_assert_eq!((cfg.n, cfg.kx, cfg.ky, cfg.overlap), (n, k, k, overlap));
        prop_assert_eq!(cfg.nu, nu);
        prop_assert_eq!(cfg.kappa, kappa);
        prop_assert_eq!(cfg.selection(), Selection::Fixed(deflation));
        prop_assert_eq!(cfg.precond, variant);
        prop_assert_eq!(cfg.pattern, pattern);
        prop_assert_eq!(cfg.t_end, 0.5);
        prop_assert!(cfg.validate().is_ok());
    }

    #[test]
    fn later_lines_win(first in 1usize..100, second in 1usize..100) {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(&format!("restart = {first}\nrestart = {second}\n")).unwrap();
        prop_assert_eq!(cfg.restart, second);
    }

    #[test]
    fn bad_line_is_reported_by_number(blank in 0usize..5) {
        let text = format!("{}n = 8\nnu = soft\n", "\n".repeat(blank));
        let err = ExperimentConfig::default().apply_text(&text).unwrap_err();
        match err {
            Error::Config { line, .. } => prop_assert_eq!(line, blank + 2),
            other => prop_assert!(false, "unexpected error {other}"),
        }
    }
}

#[test]
fn optional_keys() {
    let mut cfg = ExperimentConfig::default();
    cfg.apply_text("tau = 0.25\npencil = dirichlet\nprolongation = restricted\nscale-down = true\ndstab = 0.5\n")
        .unwrap();
    assert_eq!(cfg.selection(), Selection::Threshold(0.25));
    assert_eq!(cfg.pencil, GeneoPencil::Dirichlet);
    assert!(!cfg.symmetric && cfg.scale_down);
    assert_eq!(cfg.stab, 0.5);
    assert!(cfg.clone().apply_text("prolongation = sideways").is_err());
    assert!(cfg.apply_text("colour = blue").is_err());
}

#[test]
fn file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "n = 24\nkx = 3\nky = 3\n").unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.apply_file(&path).unwrap();
    assert_eq!(cfg.num_subdomains(), 9);
    assert_eq!(cfg.h_ratio(), 8.0);
    assert!(cfg.apply_file(&dir.path().join("missing.cfg")).is_err());
}

#[test]
fn incompatible_meshes_are_rejected() {
    for text in [
        "n = 10\nkx = 3\n",
        "overlap = 0\n",
        "nu = 0.5\n",
        "rtol = 0\n",
    ] {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text).unwrap();
        assert!(cfg.validate().is_err(), "{text:?} accepted");
    }
}
