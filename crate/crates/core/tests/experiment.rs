use beamforming::experiment::{
    render, run_sweep, run_trial, trial_seed, Axis, Format, Outcome, Scenario, SweepConfig,
    SweepResult,
};
use beamforming::robust::Mode;

fn small(axis: Axis, values: Vec<f64>, trials: usize) -> SweepConfig {
    let mut cfg = SweepConfig::new(axis, values);
    cfg.seed = 11;
    cfg.trials = trials;
    cfg.grid_n = 2;
    cfg.audit_samples = 4;
    cfg
}

const HEADER: &str = "axis_value,mode,mean_power_dbm,std_power_dbm,infeasible,mean_iters,mean_rsec";

#[test]
fn one_trial_sweeps_render_identical_bytes() {
    let cfg = small(Axis::AodRatioAlice, vec![0.02], 1);
    let a = render(&run_sweep(&cfg).unwrap(), Format::Csv).unwrap();
    let b = render(&run_sweep(&cfg).unwrap(), Format::Csv).unwrap();
    assert_eq!(a, b);
}

#[test]
fn csv_has_one_row_per_value_and_mode() {
    let cfg = small(Axis::AodRatioEve, vec![0.0, 0.04], 1);
    let text = render(&run_sweep(&cfg).unwrap(), Format::Csv).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        reader
            .headers()
            .unwrap()
            .iter()
            .collect::<Vec<_>>()
            .join(","),
        HEADER
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert_eq!(row.len(), 7);
        assert!(row[0].parse::<f64>().is_ok());
        assert!(matches!(&row[1], "active" | "passive"));
        assert!(row[4].parse::<usize>().is_ok());
    }
}

#[test]
fn empty_result_is_header_only() {
    let text = render(&SweepResult::empty(Axis::M, 0, 1), Format::Csv).unwrap();
    assert_eq!(text.trim_end(), HEADER);
}

#[test]
fn json_round_trip_is_stable() {
    let mut cfg = small(Axis::AodRatioAlice, vec![0.02], 1);
    cfg.modes = vec![Mode::Active];
    let first = render(&run_sweep(&cfg).unwrap(), Format::Json).unwrap();
    let parsed: SweepResult = serde_json::from_str(&first).unwrap();
    assert_eq!(render(&parsed, Format::Json).unwrap(), first);
}

#[test]
fn infeasible_rows_survive_json() {
    let text = r#"{"axis":"M","seed":0,"trials":1,"rows":[{"axis_value":5.0,"mode":"passive","mean_power_dbm":null,
        "std_power_dbm":null,"infeasible":1,"mean_iters":null,"mean_rsec":null}],"details":[]}"#;
    let r: SweepResult = serde_json::from_str(text).unwrap();
    assert_eq!(r.rows.len(), 1);
    assert!(r.rows[0].mean_power_dbm.is_nan());
    assert!(render(&r, Format::Csv).unwrap().contains("NaN"));
}

#[test]
fn counts_add_up_to_trials() {
    let cfg = small(Axis::AodRatioAlice, vec![0.0, 0.3], 2);
    let result = run_sweep(&cfg).unwrap();
    for (row, d) in result.rows.iter().zip(&result.details) {
        assert_eq!(d.solved + d.infeasible + d.solver_failures, cfg.trials);
        assert_eq!(row.infeasible, d.infeasible);
        assert_eq!(d.trials.len(), cfg.trials);
    }
}

#[test]
fn trial_channels_ignore_sweep_order() {
    // Trial t of a sweep reproduces a standalone run with the derived seed,
    // whatever values come before it.
    let forward = run_sweep(&small(Axis::AodRatioAlice, vec![0.0, 0.02], 2)).unwrap();
    let backward = run_sweep(&small(Axis::AodRatioAlice, vec![0.02, 0.0], 2)).unwrap();
    let pick = |r: &SweepResult, v: f64| {
        let i = r
            .rows
            .iter()
            .position(|row| row.axis_value == v && row.mode == Mode::Active)
            .unwrap();
        r.details[i]
            .trials
            .iter()
            .map(|t| t.power_dbm)
            .collect::<Vec<_>>()
    };
    assert_eq!(pick(&forward, 0.02), pick(&backward, 0.02));

    let scenario = Axis::AodRatioAlice
        .apply(&Scenario::default(), 0.02)
        .unwrap();
    let (trace, rep) = run_trial(&scenario, Mode::Active, trial_seed(11, 1), 2, 4).unwrap();
    assert_eq!(Some(rep.power_dbm), pick(&forward, 0.02)[1]);
    assert!(trace.final_power() > 0.0);
}

#[test]
fn infeasible_trials_are_reported_not_dropped() {
    // A secrecy gap no beamformer can meet under this much jitter.
    let mut cfg = small(Axis::AsrThreshold, vec![12.0], 1);
    cfg.modes = vec![Mode::Passive];
    let result = run_sweep(&cfg).unwrap();
    assert_eq!(result.rows[0].infeasible, 1);
    assert!(result.rows[0].mean_power_dbm.is_nan());
    assert_eq!(result.details[0].trials[0].outcome, Outcome::Infeasible);
}
