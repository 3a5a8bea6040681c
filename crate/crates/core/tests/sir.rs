use std::sync::Arc;

use varfrac::mittag_leffler::ml_scalar;
use varfrac::sir::{simulate_sir, sir_rhs, CouplingMode, SirParams, SirState};
use varfrac::solver::{SemilinearConfig, Status};
use varfrac::{Field, OrderField, SpatialGrid, TimeGrid};

fn grid(n: usize) -> Arc<SpatialGrid> {
    SpatialGrid::uniform(0.0, 1.0, n).unwrap()
}

fn state(g: &Arc<SpatialGrid>) -> SirState {
    SirState::new(
        Field::from_fn(g.clone(), |x| 0.9 - 0.2 * x).unwrap(),
        Field::from_fn(g.clone(), |x| 0.05 + 0.1 * x).unwrap(),
        Field::from_fn(g.clone(), |x| 0.05 + 0.1 * x).unwrap(),
    )
    .unwrap()
}

#[test]
fn rhs_examples() {
    let g = grid(6);
    let s = state(&g);
    let healthy = SirState::new(s.s.clone(), Field::zeros(g.clone()), s.r.clone()).unwrap();
    let d = sir_rhs(0.0, &healthy, &SirParams::default()).unwrap();
    for c in [&d.s, &d.i, &d.r] {
        assert!(c.values().iter().all(|v| *v == 0.0));
    }

    let params = SirParams { beta: 0.0, gamma: 0.3, ..SirParams::default() };
    let d = sir_rhs(0.0, &s, &params).unwrap();
    for j in 0..6 {
        let i = s.i.values()[j];
        assert_eq!((d.s.values()[j], d.i.values()[j], d.r.values()[j]), (0.0, -0.3 * i, 0.3 * i));
    }

    let local = SirParams { coupling: CouplingMode::LocalClassical, ..SirParams::default() };
    let d = sir_rhs(0.0, &s, &local).unwrap();
    for j in 0..6 {
        assert!((d.s.values()[j] + d.i.values()[j] + d.r.values()[j]).abs() < 1e-16);
    }

    // The nonlocal pressure uses ∫₀^x I, which vanishes at the first node.
    let d = sir_rhs(0.0, &s, &SirParams::default()).unwrap();
    assert_eq!(d.i.values()[0], -0.2 * s.i.values()[0]);

    assert!(sir_rhs(0.0, &s, &SirParams { beta: -1.0, ..SirParams::default() }).is_err());
}

#[test]
fn no_transmission_decays_like_mittag_leffler() {
    let g = grid(10);
    let initial = state(&g);
    let alpha = OrderField::from_fn(g.clone(), |x| 0.5 + 0.4 * x).unwrap();
    let params = SirParams { beta: 0.0, gamma: 0.4, ..SirParams::default() };
    let time = TimeGrid::new(4.0, 1024).unwrap();
    let run = simulate_sir(&initial, &params, &alpha, time, &SemilinearConfig::default()).unwrap();
    assert_eq!(run.report.status, Status::Completed);
    for k in 0..time.nodes() {
        assert_eq!(run.s.slice(k), initial.s.values());
        for j in 0..g.len() {
            let a = alpha.values()[j];
            let e = ml_scalar(a, 1.0, -0.4 * time.t(k).powf(a)).unwrap();
            assert!((run.i.slice(k)[j] - initial.i.values()[j] * e).abs() <= 1e-3);
        }
    }
}

#[test]
fn classical_order_matches_euler() {
    let g = grid(4);
    let initial = state(&g);
    let alpha = OrderField::constant(g.clone(), 1.0).unwrap();
    let params = SirParams { beta: 0.8, gamma: 0.25, coupling: CouplingMode::LocalClassical };
    let time = TimeGrid::new(5.0, 1000).unwrap();
    let run = simulate_sir(&initial, &params, &alpha, time, &SemilinearConfig::default()).unwrap();

    let substeps = 200;
    let h = time.dt() / substeps as f64;
    for j in 0..g.len() {
        let (mut s, mut i, mut r) = (initial.s.values()[j], initial.i.values()[j], initial.r.values()[j]);
        let mut worst = 0.0f64;
        for k in 1..time.nodes() {
            for _ in 0..substeps {
                let (ds, di) = (-params.beta * s * i, params.beta * s * i - params.gamma * i);
                let dr = params.gamma * i;
                (s, i, r) = (s + h * ds, i + h * di, r + h * dr);
            }
            worst = worst
                .max((run.s.slice(k)[j] - s).abs())
                .max((run.i.slice(k)[j] - i).abs())
                .max((run.r.slice(k)[j] - r).abs());
        }
        assert!(worst <= 1e-2, "point {j}: {worst:e}");
    }
}

#[test]
fn local_coupling_conserves_population() {
    let g = grid(16);
    let initial = state(&g);
    let alpha = OrderField::from_fn(g.clone(), |x| 0.6 + 0.3 * x).unwrap();
    let params = SirParams { coupling: CouplingMode::LocalClassical, ..SirParams::default() };
    let time = TimeGrid::new(10.0, 512).unwrap();
    let run = simulate_sir(&initial, &params, &alpha, time, &SemilinearConfig::default()).unwrap();
    for k in 0..time.nodes() {
        for j in 0..g.len() {
            let total = run.s.slice(k)[j] + run.i.slice(k)[j] + run.r.slice(k)[j];
            let start = initial.s.values()[j] + initial.i.values()[j] + initial.r.values()[j];
            assert!((total - start).abs() <= 1e-12);
        }
    }
}

#[test]
fn nonlocal_coupling_is_monotone_in_s_and_r() {
    let g = grid(20);
    let initial = state(&g);
    let alpha = OrderField::from_fn(g.clone(), |x| 0.6 + 0.3 * x).unwrap();
    let time = TimeGrid::new(10.0, 512).unwrap();
    let run = simulate_sir(&initial, &SirParams::default(), &alpha, time, &SemilinearConfig::default()).unwrap();
    for k in 0..time.nodes() {
        for j in 0..g.len() {
            assert!(run.s.slice(k)[j] <= initial.s.values()[j]);
            assert!(run.r.slice(k)[j] >= initial.r.values()[j]);
        }
    }
    assert_eq!(run.diagnostics.len(), time.nodes());
    assert!(run.diagnostics.iter().all(|d| d.defect_norm >= 0.0 && d.total_norm > 0.0));
    assert!(run.diagnostics[0].defect_norm > 0.0);
}

#[test]
fn invalid_inputs_are_rejected() {
    let g = grid(4);
    let mut bad = state(&g);
    bad.i = Field::constant(g.clone(), -0.1).unwrap();
    let alpha = OrderField::constant(g.clone(), 0.5).unwrap();
    let time = TimeGrid::new(1.0, 8).unwrap();
    assert!(simulate_sir(&bad, &SirParams::default(), &alpha, time, &SemilinearConfig::default()).is_err());

    let other = OrderField::constant(grid(5), 0.5).unwrap();
    assert!(simulate_sir(&state(&g), &SirParams::default(), &other, time, &SemilinearConfig::default()).is_err());
    assert!(SirState::new(Field::zeros(g.clone()), Field::zeros(grid(5)), Field::zeros(g)).is_err());
}
