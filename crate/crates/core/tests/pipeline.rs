use std::fs;
use std::path::Path;
use std::process::Command as Process;

use spectroscopy::pipeline::{
    build_bundle, execute, Command, PipelineConfig, RunOptions, CONFIG_TEMPLATE,
};
use spectroscopy::Error;

const BIN: &str = env!("CARGO_BIN_EXE_spectroscopy");

const GOLDEN_ORDERS: &str = "\
trader_id,class,stock,side,kind,price,size,cancel_target,timestamp,order_id
T1,ind,000001,buy,limit,10.00,500,,2003-03-03 09:20:00.00,1
T2,inst,000001,sell,limit,9.98,300,,2003-03-03 09:21:10.50,2
T3,ind,000001,sell,limit,10.02,400,,2003-03-03 09:45:00.00,3
T4,ind,000001,buy,market,,300,,2003-03-03 10:02:13.07,4
T1,ind,000001,sell,limit,10.05,200,,2003-03-03 13:30:00.00,5
T5,inst,000001,buy,limit,10.06,200,,2003-03-03 14:10:00.00,6
";

const GOLDEN_FILLS: &str = "\
stock,price,size,time,buyer,seller,maker_side
000001,10.00,300,2003-03-03 09:25:00.00,T1,T2,buy
000001,10.02,300,2003-03-03 10:02:13.07,T4,T3,sell
000001,10.02,100,2003-03-03 14:10:00.00,T5,T3,sell
000001,10.05,100,2003-03-03 14:10:00.00,T5,T1,sell
";

fn write_inputs(dir: &Path, orders: &str, fees: &str) -> std::path::PathBuf {
    fs::write(dir.join("orders.csv"), orders).unwrap();
    fs::write(
        dir.join("stocks.csv"),
        "stock,market,reference_price,period_end_price\n000001,A,10.00,\n",
    )
    .unwrap();
    fs::write(dir.join("calendar.csv"), "date\n2003-03-03\n").unwrap();
    let cfg = format!(
        "[input]\norders = \"orders.csv\"\nstock_meta = \"stocks.csv\"\ncalendar = \"calendar.csv\"\n\n\
         {fees}\n[counterfactual]\nreplicas = 20\nseed = 3\n\n[output]\ndir = \"out\"\n"
    );
    let path = dir.join("spectroscopy.toml");
    fs::write(&path, cfg).unwrap();
    path
}

const ZERO_FEES: &str = "\
[fees.a]\nbrokerage = 0.0\nexchange = 0.0\nsupervision = 0.0\nstamp_duty = 0.0\nmin_fee = 0.0\n\n\
[fees.b]\nbrokerage = 0.0\nexchange = 0.0\nsupervision = 0.0\nstamp_duty = 0.0\nmin_fee = 0.0\n";

fn small_synth_config(out: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::from_toml(CONFIG_TEMPLATE).unwrap();
    let pop = &mut c.synth.as_mut().unwrap().population;
    pop.investors.a_individual = 120;
    pop.investors.a_institution = 30;
    pop.investors.b_individual = 60;
    pop.investors.b_institution = 20;
    pop.stocks.a_stocks = 5;
    pop.stocks.b_stocks = 3;
    pop.days = 4;
    c.counterfactual.replicas = 30;
    c.output.dir = out.to_path_buf();
    c
}

#[test]
fn golden_fixture_replays_to_known_fills() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig::load(&write_inputs(dir.path(), GOLDEN_ORDERS, "")).unwrap();
    let files = build_bundle(&cfg, Command::Replay).unwrap();
    assert_eq!(files["fills.csv"], GOLDEN_FILLS);
    assert!(files["daily_close.csv"].contains("000001,2003-03-03,10.05"));

    let files = build_bundle(&cfg, Command::Analyze).unwrap();
    let perf = &files["performance.csv"];
    assert!(perf.starts_with("investor,class,market,R,J,dt_days,label\n"));
    // T1 bought 300 in the call and sold 100 at 10.05; the rest closes out
    // at the last price. T2 sold shares it never held, so it has no activity.
    assert!(perf.lines().any(|l| l.starts_with("T1,")));
    assert!(!perf.lines().any(|l| l.starts_with("T2,")));
}

#[test]
fn bundles_are_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in [1, 3] {
        let out = dir.path().join(format!("w{workers}"));
        let cfg = small_synth_config(&out);
        let summary = execute(
            &cfg,
            Command::Run,
            &RunOptions {
                workers: Some(workers),
            },
        )
        .unwrap();
        let mut files: Vec<(String, Vec<u8>)> = summary
            .files
            .iter()
            .map(|f| (f.clone(), fs::read(out.join(f)).unwrap()))
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "fills.csv",
        "performance.csv",
        "fits.csv",
        "consistency.csv",
        "manifest.json",
        "one_over_n.csv",
    ] {
        assert!(names.contains(&expected), "missing {expected}");
    }
}

#[test]
fn zero_fees_on_a_constant_tape_give_flat_investors() {
    let dir = tempfile::tempdir().unwrap();
    let mut orders = String::from(
        "trader_id,class,stock,side,kind,price,size,cancel_target,timestamp,order_id\n",
    );
    for i in 0..40 {
        let side = if i % 2 == 0 { "buy" } else { "sell" };
        orders.push_str(&format!(
            "T{},ind,000001,{side},limit,10.00,{},,2003-03-03 10:{:02}:00.00,{i}\n",
            i % 6,
            100 * (1 + i % 3),
            i
        ));
    }
    let cfg = write_inputs(dir.path(), &orders, ZERO_FEES);
    let status = Process::new(BIN)
        .args(["run", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert!(status.success());

    let out = dir.path().join("out");
    let perf = fs::read_to_string(out.join("performance.csv")).unwrap();
    let mut rows = 0;
    for line in perf.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[3].parse::<f64>().unwrap(), 0.0, "{line}");
        assert_eq!(cols[6], "flat");
        rows += 1;
    }
    assert!(rows > 0);
    let pools = fs::read_to_string(out.join("pools.csv")).unwrap();
    let cell = pools
        .lines()
        .find(|l| l.starts_with("A,individual,"))
        .unwrap();
    assert!(
        cell.starts_with(&format!("A,individual,0,0,{rows},{rows},")),
        "{cell}"
    );
    let replicas = fs::read_to_string(out.join("investor_replicas.csv")).unwrap();
    assert!(replicas.lines().count() > 1);
}

#[test]
fn both_sources_are_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_inputs(dir.path(), GOLDEN_ORDERS, "");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("\n[synth]\nstart_date = \"2003-01-02\"\n");
    fs::write(&path, &text).unwrap();

    let err = PipelineConfig::load(&path)
        .and_then(|c| c.validate())
        .unwrap_err();
    assert!(err.to_string().contains("not both"), "{err}");

    let out = Process::new(BIN)
        .args(["run", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn invalid_fee_cap_is_rejected_at_load() {
    let dir = tempfile::tempdir().unwrap();
    let fees = "[fees.a]\nbrokerage = 0.003\n";
    let path = write_inputs(dir.path(), GOLDEN_ORDERS, fees);
    let err = PipelineConfig::load(&path)
        .and_then(|c| c.validate())
        .unwrap_err();
    assert!(
        matches!(err, Error::FeeSchedule(_) | Error::Config(_)),
        "{err}"
    );
}

#[test]
fn a_foreign_directory_is_never_overwritten() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_inputs(dir.path(), GOLDEN_ORDERS, "");
    let out = dir.path().join("out");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("notes.txt"), "keep me").unwrap();
    let cfg = PipelineConfig::load(&path).unwrap();
    assert!(execute(&cfg, Command::Replay, &RunOptions::default()).is_err());
    assert_eq!(
        fs::read_to_string(out.join("notes.txt")).unwrap(),
        "keep me"
    );

    // a previous bundle is replaced whole
    fs::remove_dir_all(&out).unwrap();
    execute(&cfg, Command::Run, &RunOptions::default()).unwrap();
    execute(&cfg, Command::Replay, &RunOptions::default()).unwrap();
    assert!(out.join("fills.csv").exists());
    assert!(!out.join("fits.csv").exists());
}

#[test]
fn cli_init_synth_and_rerun_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spectroscopy.toml");
    let run = |args: &[&str]| {
        let out = Process::new(BIN)
            .current_dir(dir.path())
            .args(args)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&["init"]);
    assert!(cfg.exists());
    // shrink the template so the test stays fast
    let text = fs::read_to_string(&cfg)
        .unwrap()
        .replace("a_individual = 600", "a_individual = 80")
        .replace("b_individual = 250", "b_individual = 40")
        .replace("days = 20", "days = 3")
        .replace("replicas = 2000", "replicas = 10");
    fs::write(&cfg, text).unwrap();
    run(&["--seed", "5", "--out", "direct", "analyze"]);
    run(&["--seed", "5", "--out", "corpus", "synth"]);
    run(&[
        "--config",
        "corpus/config.toml",
        "--out",
        "replayed",
        "analyze",
    ]);
    let a = fs::read(dir.path().join("direct/performance.csv")).unwrap();
    let b = fs::read(dir.path().join("replayed/performance.csv")).unwrap();
    assert_eq!(a, b);
}
