use proptest::prelude::*;
use threephase::config::{Lambda0Expr, RunConfig};
use threephase::output::{format_value, write_csv};
use threephase::parallel::{par_grid_eval, par_kpi_residual};
use threephase::presets::preset;
use threephase::solve_config;
use threephase_core::solution::{grid_eval, Axis};
use threephase_core::verify::{kpi_residual_steps, tuned_steps, SampleGrid, StencilOrder};

fn small(cfg: &mut RunConfig) {
    cfg.grid.x = threephase::config::AxisConfig { min: -3.0, max: 3.0, count: 31 };
    cfg.grid.y = threephase::config::AxisConfig { min: -1.0, max: 1.0, count: 11 };
}

#[test]
fn parallel_grid_matches_sequential_bitwise() {
    let mut cfg = preset("fig8").unwrap();
    small(&mut cfg);
    let r = solve_config(&cfg).unwrap();
    let s = &r.solution;
    let spec = cfg.grid.spec();
    let seq = grid_eval(cfg.field.kind(), &spec, &s.params, &s.wave, 1e-15).unwrap();
    let par = par_grid_eval(cfg.field.kind(), &spec, &s.params, &s.wave, 1e-15).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&seq.values), bits(&par.values));
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_csv(&seq, &mut a).unwrap();
    write_csv(&par, &mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn parallel_residual_matches_sequential() {
    let r = solve_config(&RunConfig::default()).unwrap();
    let w = r.solution.wave;
    let grid = SampleGrid {
        x: Axis { min: -1.0, max: 1.0, count: 4 },
        z: Axis { min: -0.5, max: 0.5, count: 3 },
        t: Axis { min: 0.0, max: 0.1, count: 2 },
    };
    let h = tuned_steps(&w, StencilOrder::Six);
    let seq = kpi_residual_steps(&w, &grid, h, StencilOrder::Six, 1e-15).unwrap();
    let par = par_kpi_residual(&w, &grid, h, StencilOrder::Six, 1e-15).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn shifted_spectral_parameter_changes_the_field() {
    let mut a = preset("fig6").unwrap();
    let mut b = preset("fig10").unwrap();
    small(&mut a);
    small(&mut b);
    let ra = solve_config(&a).unwrap();
    let rb = solve_config(&b).unwrap();
    let ga = par_grid_eval(a.field.kind(), &a.grid.spec(), &ra.solution.params, &ra.solution.wave, 1e-15).unwrap();
    let gb = par_grid_eval(b.field.kind(), &b.grid.spec(), &rb.solution.params, &rb.solution.wave, 1e-15).unwrap();
    assert!(ga.values.iter().all(|v| *v > 0.0));
    let diff = ga.values.iter().zip(&gb.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff > 1e-3, "{diff}");
    assert!(rb.k_change <= 1e-12);
    assert_eq!(b.lambda0, Lambda0Expr::K2Over4K1);
}

proptest! {
    #[test]
    fn csv_numbers_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(format_value(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn config_json_round_trips(a in 0.1f64..1.0, db in 0.01f64..2.0, phi in 0.8f64..1.5, l0 in -5.0f64..5.0) {
        let mut cfg = RunConfig::default();
        cfg.params.a = a;
        cfg.params.b = a + db;
        cfg.params.phi = phi;
        cfg.lambda0 = Lambda0Expr::Value(l0);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(cfg, back);
    }
}
