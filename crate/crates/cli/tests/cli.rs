use std::path::Path;
use std::process::{Command, Output};

use approx::assert_relative_eq;

fn twinfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twinfield"))
        .args(args)
        .env_remove("TWINFIELD_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn default_config_text() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.toml")).unwrap()
}

#[test]
fn bounds_at_half_transmittance() {
    let o = twinfield(&["bounds", "--eta", "0.5", "--bounds", "plob"]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "plob");
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn bounds_from_length() {
    let o = twinfield(&["bounds", "--length", "50", "--alpha", "0.2", "--bounds", "plob,srb,tgw"]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&stdout(&o));
    let eta = 0.1f64;
    let expected = [-(1.0 - eta).log2(), -(1.0 - eta.sqrt()).log2(), ((1.0 + eta) / (1.0 - eta)).log2()];
    assert_eq!(rows.len(), 3);
    for (row, want) in rows.iter().zip(expected) {
        assert_relative_eq!(row[2].parse::<f64>().unwrap(), want, max_relative = 1e-5);
    }
}

#[test]
fn bounds_reject_bad_input() {
    let o = twinfield(&["bounds", "--eta", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("domain"), "{}", stderr(&o));
    let o = twinfield(&["bounds", "--eta", "0.5", "--length", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = twinfield(&["bounds"]);
    assert_eq!(o.status.code(), Some(2));
    let o = twinfield(&["bounds", "--eta", "0.5", "--bounds", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_length_bounds_are_unbounded() {
    let o = twinfield(&["bounds", "--length", "0", "--bounds", "plob"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",inf"));
}

#[test]
fn default_curve_crosses_plob() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = twinfield(&["rate-curve", "--start", "0", "--stop", "600", "--step", "10", "--pulses", "0", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let (header, rows) = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(
        header.join(","),
        "distance_km,eta,plob,srb,tgw,tf_gllp,pm,pmmdi,npp_mc,sns_mc,opt_mu_tf_gllp,opt_mu_pm,opt_mu_pmmdi"
    );
    assert_eq!(rows.len(), 61);
    let (pm, plob) = (column(&header, "pm"), column(&header, "plob"));
    let above: Vec<bool> =
        rows.iter().map(|r| r[pm].parse::<f64>().unwrap() > r[plob].parse::<f64>().unwrap()).collect();
    assert!(!above[0]);
    assert!(*above.last().unwrap());
}

#[test]
fn empty_range_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty.csv");
    let o = twinfield(&["rate-curve", "--start", "100", "--stop", "50", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("distance_km,"));
}

#[test]
fn monte_carlo_columns_are_filled() {
    let o = twinfield(&["rate-curve", "--distances", "50", "--pulses", "200000", "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    for name in ["npp_mc", "sns_mc"] {
        let v: f64 = rows[0][column(&header, name)].parse().unwrap();
        assert!(v.is_finite() && v >= 0.0, "{name} = {v}");
    }
}

#[test]
fn missing_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, default_config_text().replace("dark_count_prob = 1e-7\n", "")).unwrap();
    let o = twinfield(&["rate-curve", "--distances", "10", "--pulses", "0", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dark_count_prob"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, default_config_text().replace("[channel]\n", "[channel]\nfiber_loss = 0.2\n")).unwrap();
    let o = twinfield(&["rate-curve", "--distances", "10", "--pulses", "0", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fiber_loss"), "{}", stderr(&o));
}

#[test]
fn io_failures_exit_with_one() {
    let o = twinfield(&["rate-curve", "--distances", "10", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(1));
    let o = twinfield(&["table1", "--output", "/nonexistent/dir/table.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

fn report(o: &Output) -> toml::Table {
    assert!(o.status.success(), "{}", stderr(o));
    stdout(o).parse().unwrap()
}

#[test]
fn zero_pulses_give_an_empty_report() {
    let r = report(&twinfield(&["simulate", "--protocol", "tf", "--pulses", "0"]));
    assert_eq!(r["rate"].as_float(), Some(0.0));
    assert!(r["tallies"].as_array().unwrap().is_empty());
    assert!(r.get("stats").is_none());
}

#[test]
fn simulate_report_has_tallies_and_errors() {
    let r = report(&twinfield(&["simulate", "--protocol", "npp", "--pulses", "200000", "--length", "50", "--seed", "11"]));
    let tallies = r["tallies"].as_array().unwrap();
    let total: i64 = tallies.iter().map(|t| t["count"].as_integer().unwrap()).sum();
    assert_eq!(total, 200_000);
    let gain = &r["stats"]["gain"];
    assert!(gain["std_err"].as_float().unwrap() > 0.0);
    assert_eq!(r["run"]["protocol"].as_str(), Some("npp"));
}

#[test]
fn invalid_protocol_exits_with_two() {
    let o = twinfield(&["simulate", "--protocol", "bb84"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_precedence_is_flag_then_environment_then_file() {
    let seed_of = |o: &Output| report(o)["run"]["seed"].as_integer().unwrap();
    let base = ["simulate", "--protocol", "sns", "--pulses", "2048"];
    assert_eq!(seed_of(&twinfield(&base)), 2020);
    let with_env = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_twinfield"))
            .args(base)
            .args(extra)
            .env("TWINFIELD_SEED", "77")
            .output()
            .unwrap()
    };
    assert_eq!(seed_of(&with_env(&[])), 77);
    assert_eq!(seed_of(&with_env(&["--seed", "5"])), 5);
}

#[test]
fn npp_at_300_km_has_a_positive_rate() {
    let r = report(&twinfield(&["simulate", "--protocol", "npp", "--length", "300", "--pulses", "100000000", "--seed", "300"]));
    let rate = r["rate"].as_float().unwrap();
    assert!(rate > 0.0, "{rate}");
    // frozen output of this seed
    assert_relative_eq!(rate, 2.158_497_497_292_949_4e-5, max_relative = 1e-9);
}

#[test]
fn table1_lists_the_seven_experiments() {
    let o = twinfield(&["table1"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 7);
    let loss = column(&header, "loss_db");
    let minder = &rows[0];
    assert_eq!(minder[0], "Minder 2019");
    assert_eq!(minder[loss], "90.8000");
    assert!(minder[column(&header, "length_km")].is_empty());
    let wang = &rows[1];
    assert_eq!(wang[loss], "60.0000");
    assert_eq!(wang[column(&header, "beats_absolute")], "true");
}

#[test]
fn phase_demo_reports_both_modes() {
    let eps = |drift: &str| -> Vec<f64> {
        let r = report(&twinfield(&["phase-demo", "--drift-rate", drift, "--duration-ms", "300", "--seed", "3"]));
        r["modes"].as_array().unwrap().iter().map(|m| m["epsilon"].as_float().unwrap()).collect()
    };
    assert_eq!(eps("0"), vec![0.0, 0.0]);
    let slow = eps("6");
    let fast = eps("15.7");
    assert!((0.015..=0.03).contains(&slow[0]), "{slow:?}");
    assert!(fast[0] > slow[0] && fast[1] > slow[1]);
}

#[test]
fn phase_demo_histogram_counts_every_residual() {
    let r = report(&twinfield(&["phase-demo", "--mode", "active", "--bins", "8", "--duration-ms", "50"]));
    let modes = r["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 1);
    let counts: i64 = modes[0]["histogram_counts"].as_array().unwrap().iter().map(|c| c.as_integer().unwrap()).sum();
    let blocks = modes[0]["blocks"].as_integer().unwrap();
    assert_eq!(counts, blocks * 50);
}

#[test]
fn phase_demo_rejects_unknown_mode() {
    let o = twinfield(&["phase-demo", "--mode", "passive"]);
    assert_eq!(o.status.code(), Some(2));
}
