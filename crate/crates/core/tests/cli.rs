use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use zeno_register::io::table::read_csv;

fn zeno(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeno"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const PAPER_CFG: &str = "\
# rubidium register
lattice_wavelength = 785e-9
scattering_length = 5.6e-9
depth_parallel = 22
depth_transverse = 38.5
trap_frequency = 8
atomic_rabi = 25
atomic_linewidth = 6.065e6
catalysis_detuning = -6.85e4
franck_condon = 5e-7
atom_number = 551
register_size = 501
";

#[test]
fn params_report_keys() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("paper.cfg"), PAPER_CFG).unwrap();
    let out = zeno(dir.path(), &["params", "--config", "paper.cfg"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&dir.path().join("params.json"));
    for key in [
        "u_hz",
        "j_over_u",
        "delta_over_u",
        "kappa_over_u",
        "omega_m_over_u",
        "gamma_m_over_u",
        "vc_over_u",
        "s_a",
        "strength",
        "p_h",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!((v["kappa_over_u"].as_f64().unwrap() - 0.133).abs() < 0.005);
    assert!((v["vc_over_u"].as_f64().unwrap() - 15.5).abs() < 0.2);
    assert!((v["strength"].as_f64().unwrap() - 1.5).abs() < 0.1);
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["subcommand"], "params");
    assert_eq!(manifest["outputs"][0], "params.json");
}

#[test]
fn config_errors_exit_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.cfg"),
        "atom_number = 551\nscatering_length = 5e-9\n",
    )
    .unwrap();
    let out = zeno(dir.path(), &["params", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scatering_length"));

    let out = zeno(dir.path(), &["params", "--config", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(2));

    let out = zeno(dir.path(), &["params", "--n", "five"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("register_size"));
}

#[test]
fn regime_violation_warns_unless_strict() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeno(dir.path(), &["params", "--u-over-j", "10"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: regime violation"));
    let out = zeno(dir.path(), &["params", "--u-over-j", "10", "--strict"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn trajectory_example() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("paper.cfg"), PAPER_CFG).unwrap();
    let out = zeno(
        dir.path(),
        &[
            "trajectory",
            "--config",
            "paper.cfg",
            "--t-end",
            "30",
            "--model",
            "eliminated",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = read_csv(&dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(table.headers, ["t_over_U", "fidelity", "norm_sq"]);
    assert!(*table.column("fidelity").unwrap().last().unwrap() >= 0.999);
    let side = json(&dir.path().join("trajectory.json"));
    let t_sat = side["t_sat"].as_f64().unwrap();
    assert!((4.0..=16.0).contains(&t_sat), "{t_sat}");
    assert_eq!(
        side["provenance"].as_str().unwrap(),
        zeno_register::io::TOOL_VERSION
    );
    assert!(side["params"]["kappa_over_u"].is_number());
}

#[test]
fn free_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeno(
        dir.path(),
        &["free", "--n", "5", "--u-over-j", "500", "--t-end", "0.5/J"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = read_csv(&dir.path().join("free.csv")).unwrap();
    assert_eq!(
        table.headers,
        ["t_over_U", "closed_form", "restricted", "oracle"]
    );
    assert!((table.columns[0].last().unwrap() - 250.0).abs() < 1e-9);
    assert_eq!(json(&dir.path().join("free.json"))["basis_dim"], 126);

    let out = zeno(dir.path(), &["plot", "free.csv"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = std::fs::read_to_string(dir.path().join("free.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert!(svg.contains(">closed_form</text>") && svg.contains(">oracle</text>"));
}

#[test]
fn plot_rejects_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeno(dir.path(), &["plot", "nothing.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn efficiency_plateaus_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeno(dir.path(), &["efficiency", "--t-end", "40"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = read_csv(&dir.path().join("efficiency.csv")).unwrap();
    let last = |h: &str| *table.column(h).unwrap().last().unwrap();
    assert!(last("fidelity_eta_1.00") > last("fidelity_eta_0.90"));
    assert!(last("fidelity_eta_0.90") > last("fidelity_eta_0.80"));
    let out = zeno(dir.path(), &["plot", "efficiency.csv"]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("efficiency.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 6);
}

#[test]
fn hz_switches_time_unit() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeno(
        dir.path(),
        &["trajectory", "--n", "11", "--t-end", "5", "--hz"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = read_csv(&dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(table.headers[0], "t_s");
    let side = json(&dir.path().join("trajectory.json"));
    assert_eq!(side["time_unit"], "s");
    let u_hz = side["params"]["u_hz"].as_f64().unwrap();
    let t_end = table.columns[0].last().unwrap();
    assert!((t_end * 2.0 * std::f64::consts::PI * u_hz / 5.0 - 1.0).abs() < 1e-9);
}

#[test]
fn oracle_periodic_trimer() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeno(
        dir.path(),
        &[
            "oracle",
            "--n",
            "3",
            "--u-over-j",
            "100",
            "--boundary",
            "periodic",
            "--t-end",
            "20",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&dir.path().join("oracle.json"));
    assert_eq!(v["basis_dim"], 10);
    let e = v["ground_energy"].as_f64().unwrap();
    assert!((e / -1.2e-3 - 1.0).abs() < 0.1, "{e}");
    assert!(e <= v["variational_energy"].as_f64().unwrap());
    let table = read_csv(&dir.path().join("oracle.csv")).unwrap();
    assert_eq!(table.headers, ["t_over_U", "fidelity", "norm_sq"]);
}

#[test]
fn ensemble_and_nonselective_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeno(
        dir.path(),
        &[
            "ensemble",
            "--n",
            "5",
            "--u-over-j",
            "50",
            "--traj",
            "300",
            "--t-end",
            "10",
            "--seed",
            "3",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = read_csv(&dir.path().join("ensemble.csv")).unwrap();
    assert_eq!(
        table.headers,
        [
            "t_over_U",
            "survival",
            "conditional_fidelity",
            "target_population"
        ]
    );
    assert_eq!(json(&dir.path().join("manifest.json"))["seed"], 3);

    let out = zeno(
        dir.path(),
        &[
            "nonselective",
            "--n",
            "5",
            "--u-over-j",
            "50",
            "--t-end",
            "50",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = read_csv(&dir.path().join("nonselective.csv")).unwrap();
    assert_eq!(
        table.headers,
        ["t_over_U", "rho_tt_master", "rho_tt_bloch", "rho_tt_closed"]
    );
}

#[test]
fn manifest_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeno(dir.path(), &["ground", "--n", "9", "--u-over-j", "100"]);
    assert!(out.status.success());
    let manifest = zeno_register::io::RunManifest::read(&dir.path().join("manifest.json")).unwrap();
    let p = zeno_register::cli::resolve_params(&manifest.settings).unwrap();
    let basis =
        zeno_register::register::build_basis(manifest.settings.physical.register_size).unwrap();
    let ground = zeno_register::register::perturbative_ground_state(&basis, &p).unwrap();
    let f = zeno_register::register::fidelity(&ground).unwrap();
    let side = json(&dir.path().join("ground.json"));
    assert_eq!(side["fidelity"].as_f64().unwrap(), f);
}
