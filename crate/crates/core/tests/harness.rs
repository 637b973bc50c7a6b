use structural::harness::{
    convergence_order, drift_series, run, run_problem, sci, sweep, trend, write_coeffs_csv, write_drift_csv,
    write_sweep_csv, EnergyNorm, HarnessError, PositionMode, Quantity, RunConfig, Sampling, Scheme, SWEEP_HEADER,
};
use structural::problems::{Hamiltonian, InvariantKind, MassSpring};
use structural::secoeff::Formulation;

fn spring(scheme: Scheme, r: usize, n: usize) -> RunConfig {
    RunConfig::new("mass_spring", scheme, r, n, 100.0)
}

fn csv_bytes(base: &RunConfig, ns: &[usize]) -> Vec<u8> {
    let rows = sweep(base, ns).unwrap();
    let mut buf = Vec::new();
    write_sweep_csv(base, &rows, &mut buf).unwrap();
    buf
}

fn parse(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rd = csv::Reader::from_reader(bytes);
    let header = rd.headers().unwrap().iter().map(String::from).collect();
    let rows = rd.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn convergence_order_examples() {
    assert!((convergence_order(1e-2, 1e-4, 0.1, 0.01).unwrap() - 2.0).abs() < 1e-14);
    assert!((convergence_order(8.0, 1.0, 2.0, 1.0).unwrap() - 3.0).abs() < 1e-14);
    assert_eq!(convergence_order(0.0, 1e-3, 0.1, 0.05), None);
    assert_eq!(convergence_order(1e-3, f64::NAN, 0.1, 0.05), None);
    assert_eq!(convergence_order(1e-3, 1e-4, 0.1, 0.1), None);
}

#[test]
fn sweeps_are_deterministic() {
    let base = spring(Scheme::Zds, 2, 0);
    let ns = [120, 240, 480];
    assert_eq!(csv_bytes(&base, &ns), csv_bytes(&base, &ns));
    let sv = spring(Scheme::Sv(4), 1, 0);
    assert_eq!(csv_bytes(&sv, &ns), csv_bytes(&sv, &ns));
}

#[test]
fn csv_layout_and_orders_recomputed_from_the_file() {
    let base = spring(Scheme::Zd, 2, 0);
    let ns = [120, 240, 480, 960];
    let (header, rows) = parse(&csv_bytes(&base, &ns));
    assert_eq!(header, SWEEP_HEADER);
    assert_eq!(rows.len(), 4);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for (row, n) in rows.iter().zip(ns) {
        assert_eq!(row.len(), SWEEP_HEADER.len());
        assert_eq!((row[col("problem")].as_str(), row[col("scheme")].as_str()), ("mass_spring", "zd"));
        assert_eq!(row[col("N")], n.to_string());
        assert_eq!(row[col("status")], "ok");
        assert_eq!(row[col("eA")], "");
    }
    assert_eq!(rows[0][col("ordx")], "");
    for w in rows.windows(2) {
        let f = |r: &Vec<String>, c: &str| r[col(c)].parse::<f64>().unwrap();
        for (e, o) in [("ex", "ordx"), ("eH", "ordH")] {
            let external = convergence_order(f(&w[0], e), f(&w[1], e), f(&w[0], "dt"), f(&w[1], "dt")).unwrap();
            // the file rounds errors to six digits
            assert!((external - f(&w[1], o)).abs() < 1e-4, "{e}");
        }
    }
    let ordx: Vec<f64> = rows[1..].iter().map(|r| r[col("ordx")].parse().unwrap()).collect();
    for (got, want) in ordx.iter().zip([3.7, 3.9, 4.0]) {
        assert!((got - want).abs() <= 0.4, "{ordx:?}");
    }
}

#[test]
fn call_accounting_identity() {
    for (scheme, r) in [(Scheme::Zd, 2), (Scheme::Zds, 3), (Scheme::Sv(2), 5)] {
        let cfg = RunConfig::new("pendulum", scheme, r, 600, 100.0);
        let rep = run(&cfg).unwrap();
        let block = if matches!(scheme, Scheme::Sv(_)) { 1.0 } else { r as f64 };
        assert_eq!(rep.nb_call_avg, block * rep.nb_iter_avg);
        assert_eq!(rep.nb_iter_avg, rep.total_iter as f64 / 600.0);
        if scheme.formulation().is_some() {
            // R calls per sweep plus R for each block's predictor, plus the anchor
            assert_eq!(rep.pe1_calls, r * rep.total_iter + 600 + 1);
        }
    }
}

#[test]
fn single_element_sweep_has_no_orders() {
    let rows = sweep(&spring(Scheme::Zds, 1, 0), &[960]).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(Quantity::ALL.iter().all(|&q| rows[0].order(q).is_none()));
    let ex = rows[0].outcome.as_ref().unwrap().ex.unwrap();
    assert!(ex / 1.41e-5 < 3.0 && 1.41e-5 / ex < 3.0, "{ex:e}");
}

#[test]
fn failed_rows_are_kept() {
    let base = spring(Scheme::Zds, 8, 0);
    let rows = sweep(&base, &[8, 960]).unwrap();
    assert!(rows[0].outcome.is_err());
    assert!(rows[1].outcome.is_ok());
    assert!(rows[1].orders.iter().all(Option::is_none));
    let mut buf = Vec::new();
    write_sweep_csv(&base, &rows, &mut buf).unwrap();
    let (header, parsed) = parse(&buf);
    let status = header.iter().position(|h| h == "status").unwrap();
    assert!(parsed[0][status].starts_with("error: "));
    assert_eq!(parsed[0].len(), header.len());
}

#[test]
fn configuration_errors() {
    let cfg_err = |e: HarnessError| e.is_config();
    assert!(cfg_err(run(&spring(Scheme::Zd, 2, 0)).unwrap_err()));
    assert!(cfg_err(run(&spring(Scheme::Zd, 13, 26)).unwrap_err()));
    assert!(cfg_err(run(&spring(Scheme::Zd, 4, 2)).unwrap_err()));
    assert!(cfg_err(run(&spring(Scheme::Sv(3), 1, 10)).unwrap_err()));
    assert!(cfg_err(run(&RunConfig::new("nope", Scheme::Zd, 2, 10, 1.0)).unwrap_err()));
    assert!(cfg_err(run(&RunConfig { project_lrl: true, ..spring(Scheme::Zds, 1, 10) }).unwrap_err()));
    assert!(cfg_err(run(&RunConfig { tol: Some(0.0), ..spring(Scheme::Zds, 1, 10) }).unwrap_err()));
    assert!(cfg_err(sweep(&spring(Scheme::Zd, 2, 0), &[]).unwrap_err()));
    assert!(cfg_err(sweep(&spring(Scheme::Zd, 2, 0), &[240, 120]).unwrap_err()));
    assert!(cfg_err(sweep(&spring(Scheme::Zd, 2, 0), &[0, 120]).unwrap_err()));

    let err = run(&RunConfig { max_iter: 2, ..spring(Scheme::Zds, 2, 240) }).unwrap_err();
    assert!(!err.is_config() && matches!(err, HarnessError::Solver { .. }), "{err}");
}

#[test]
fn endpoint_reference_and_energy_scale() {
    let rep = run(&RunConfig::new("pendulum", Scheme::Zds, 2, 960, 100.0)).unwrap();
    assert_eq!(rep.position_mode, Some(PositionMode::Endpoint));
    let ex = rep.ex.unwrap();
    assert!(ex / 6.93e-9 < 3.0 && 6.93e-9 / ex < 3.0, "{ex:e}");
    assert!((rep.x_final[0] + 0.2633498226088722).abs() == ex);
    // no tabulated endpoint at T=50
    assert_eq!(run(&RunConfig::new("pendulum", Scheme::Zds, 2, 480, 50.0)).unwrap().ex, None);

    let abs = run(&RunConfig::new("kepler", Scheme::Zds, 1, 2400, 100.0)).unwrap();
    let rel = run(&RunConfig { energy_norm: EnergyNorm::Relative, ..abs.config.clone() }).unwrap();
    assert!((rel.e_h.unwrap() - abs.e_h.unwrap() / 0.5).abs() <= 1e-15 * abs.e_h.unwrap());
    assert_eq!(rel.e_l, abs.e_l);
}

#[test]
fn block_end_sampling_never_exceeds_all_nodes() {
    let all = run(&spring(Scheme::Zd, 4, 480)).unwrap();
    let ends = run(&RunConfig { sampling: Sampling::BlockEnds, ..all.config.clone() }).unwrap();
    assert!(ends.ex.unwrap() <= all.ex.unwrap() && ends.e_h.unwrap() <= all.e_h.unwrap());
    assert_eq!(ends.x_final, all.x_final);
}

#[test]
fn decimation_does_not_change_maxima() {
    let a = run(&spring(Scheme::Zds, 2, 480)).unwrap();
    let b = run(&RunConfig { decimation: Some(7), ..a.config.clone() }).unwrap();
    assert_eq!((a.ex, a.e_h), (b.ex, b.e_h));
}

#[test]
fn double_double_backend_runs() {
    let mut cfg = spring(Scheme::Zds, 2, 480);
    cfg.precision = structural::numerics::Precision::DoubleDouble;
    let dd = run(&cfg).unwrap();
    let d = run(&spring(Scheme::Zds, 2, 480)).unwrap();
    let (a, b) = (dd.ex.unwrap(), d.ex.unwrap());
    assert!((a - b).abs() <= 1e-3 * b, "{a:e} vs {b:e}");
    // truncation dominates at this step size, so the energy errors agree too
    assert!((dd.e_h.unwrap() - d.e_h.unwrap()).abs() <= 1e-3 * d.e_h.unwrap());
}

#[test]
fn custom_problem_runs() {
    let ms = MassSpring::new(2.0, 8.0, 0.5, 0.0).unwrap();
    let cfg = RunConfig::new("stiff_spring", Scheme::Zds, 2, 200, 10.0);
    let rep = run_problem(&cfg, &ms).unwrap();
    // omega = 2
    let h0 = ms.energy(&ms.initial_state().0, &ms.initial_state().1).unwrap();
    assert!((h0 - 1.0).abs() < 1e-15);
    assert!(rep.ex.unwrap() < 1e-6 && rep.e_h.unwrap() < 1e-9);
    assert!((rep.x_final[0] - 0.5 * 20f64.cos()).abs() < 1e-6);
}

#[test]
fn drift_series_shape() {
    let cfg = RunConfig::new("pendulum", Scheme::Zds, 2, 3000, 1000.0);
    let s = drift_series(&cfg, InvariantKind::H, 11).unwrap();
    assert_eq!(s.len(), 11);
    assert_eq!(s[0], (0.0, 0.0));
    assert!((s[10].0 - 1000.0).abs() < 1e-9);
    assert!(s.windows(2).all(|w| w[0].0 < w[1].0));
    let max = s.iter().map(|v| v.1).fold(0.0, f64::max);
    assert!(trend(&s).abs() * 1000.0 < max);

    assert!(drift_series(&cfg, InvariantKind::Lrl, 5).unwrap_err().is_config());
    assert!(drift_series(&cfg, InvariantKind::H, 0).unwrap_err().is_config());

    let mut buf = Vec::new();
    write_drift_csv(&s[..2], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("t,deviation\n0.00000e+00,0.00000e+00\n{},{}\n", sci(s[1].0), sci(s[1].1)));
}

#[test]
fn trend_examples() {
    assert_eq!(trend(&[]), 0.0);
    assert_eq!(trend(&[(1.0, 5.0)]), 0.0);
    assert!((trend(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]) - 2.0).abs() < 1e-15);
}

#[test]
fn coefficient_dump() {
    let mut buf = Vec::new();
    write_coeffs_csv(&[(Formulation::Zds, 1), (Formulation::Zd, 3)], &mut buf).unwrap();
    let (header, rows) = parse(&buf);
    assert_eq!(header, ["formulation", "R", "m", "r", "s", "value"]);
    assert_eq!(rows.len(), 6 + 3 * 2 * 4);
    let v: Vec<f64> = rows[..6].iter().map(|r| r[5].parse().unwrap()).collect();
    // columns ordered (s, r): Z0 Z1 D0 D1 S0 S1
    let norm = (12f64 * 12.0 * 2.0 + 36.0 * 2.0 + 2.0).sqrt();
    for (got, want) in v.iter().zip([12.0, -12.0, 6.0, 6.0, 1.0, -1.0]) {
        assert!((got - want / norm).abs() < 1e-15, "{v:?}");
    }
}
