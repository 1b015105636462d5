use chainlab_cli::config::{
    ChiKind, DispersionKind, EstimatorKind, InterpolationKind, KernelKind, PinningKind,
    PotentialKind,
};
use chainlab_cli::{emit_config, load_config, parse_config, run, ExperimentConfig, Kind};
use chainlab_cli::{Overrides, Status, MANIFEST_FILE};
use proptest::prelude::*;
use std::path::Path;
use std::process::Command;

fn config(text: &str, out: &Path) -> ExperimentConfig {
    let overrides = Overrides {
        out: Some(out.display().to_string()),
        ..Default::default()
    };
    load_config(Some(text), None, &overrides).unwrap()
}

const SMALL_GREEN_KUBO: &str = "kind = green-kubo
[chain]
n_sites = 16
t_max = 40
sample_every = 2
mcmc_sweeps = 20
[green_kubo]
lag_max = 4
n_trajectories = 3
blocks = 2
";

const SMALL_PHONON: &str = "kind = phonon-mc
[kinetics]
horizons = 4, 16
bootstrap = 20
";

fn finite() -> impl Strategy<Value = f64> {
    // Values with long decimal expansions exercise the float round trip.
    (0.001f64..100.0).prop_map(|x| x * 1.000_000_1)
}

fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
    (
        prop::sample::select(Kind::ALL.to_vec()),
        any::<u64>(),
        1usize..8,
        (finite(), finite(), finite(), finite(), finite()),
        (
            prop::bool::ANY,
            prop::sample::select(vec![
                PinningKind::None,
                PinningKind::Quadratic,
                PinningKind::Quartic,
            ]),
        ),
        (3usize..500, finite(), 1usize..50),
        prop::collection::vec(finite(), 1..5),
        (prop::bool::ANY, prop::bool::ANY, 0usize..3, prop::bool::ANY),
    )
        .prop_map(
            |(
                kind,
                seed,
                workers,
                (a, c, nu, beta, dt),
                (fpu, pinning),
                (n, len, k),
                hs,
                flags,
            )| {
                let mut cfg = ExperimentConfig::defaults(kind);
                cfg.seed = seed;
                cfg.workers = workers;
                cfg.out = format!("runs/{seed}");
                cfg.model.potential = if fpu {
                    PotentialKind::Fpu
                } else {
                    PotentialKind::Harmonic
                };
                cfg.model.a = a;
                cfg.model.c = c;
                cfg.model.pinning = pinning;
                cfg.model.nu = nu;
                cfg.model.beta = beta;
                cfg.chain.n_sites = n;
                cfg.chain.dt = dt / 1000.0;
                cfg.chain.t_max = cfg.green_kubo.lag_max + len;
                cfg.chain.sample_every = k;
                let mut acc = 0.0;
                cfg.kinetics.horizons = hs
                    .iter()
                    .map(|h| {
                        acc += h;
                        acc
                    })
                    .collect();
                let (pinned, quantile, kernel, cubic) = flags;
                if pinned {
                    cfg.kinetics.dispersion = DispersionKind::Pinned;
                }
                if quantile && cfg.kinetics.horizons.len() >= 2 {
                    cfg.kinetics.method = EstimatorKind::Quantile;
                }
                cfg.kinetics.kernel = [
                    KernelKind::Product,
                    KernelKind::Constant,
                    KernelKind::Exchange,
                ][kernel];
                if !cubic {
                    cfg.table.interpolation = InterpolationKind::Linear;
                }
                cfg.green_kubo.chi = if pinned {
                    ChiKind::Susceptibility
                } else {
                    ChiKind::TemperatureSquared
                };
                cfg.frac.alpha = 2.0 * a / (a + 1.0);
                cfg.transport.origin = -len;
                cfg.euler.e0 = beta;
                cfg
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emitted_config_parses_back_to_itself(cfg in arb_config()) {
        let text = emit_config(&cfg);
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn same_seed_gives_identical_outputs_for_any_worker_count() {
    for text in [SMALL_GREEN_KUBO, SMALL_PHONON] {
        let dir = tempfile::tempdir().unwrap();
        let mut manifests = Vec::new();
        for (i, workers) in [1, 1, 2].into_iter().enumerate() {
            let mut cfg = config(text, &dir.path().join(i.to_string()));
            cfg.seed = 42;
            cfg.workers = workers;
            let m = run(&cfg);
            assert_eq!(m.status, Status::Ok, "{:?}", m.error);
            manifests.push(m);
        }
        assert!(!manifests[0].outputs.is_empty());
        assert_eq!(manifests[0].outputs, manifests[1].outputs);
        assert_eq!(manifests[0].outputs, manifests[2].outputs);
        assert_eq!(manifests[0].summary, manifests[2].summary);
        for (name, sha) in &manifests[0].outputs {
            let bytes = std::fs::read(dir.path().join("0").join(name)).unwrap();
            assert_eq!(&chainlab_cli::runner::sha256_hex(&bytes), sha);
        }
    }
}

#[test]
fn different_seeds_give_different_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = config(SMALL_PHONON, &dir.path().join("a"));
    let mut b = a.clone();
    a.seed = 1;
    b.seed = 2;
    b.out = dir.path().join("b").display().to_string();
    let (ma, mb) = (run(&a), run(&b));
    assert!(ma.checksum("spread.csv").is_some());
    assert_ne!(ma.checksum("spread.csv"), mb.checksum("spread.csv"));
}

#[test]
fn pinned_phonon_run_reports_diffusive_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let text = "kind = phonon-mc
seed = 3
[kinetics]
dispersion = pinned
omega_c = 1
omega_nu = 1
horizons = 64, 256, 1024, 4096
";
    let m = run(&config(text, dir.path()));
    assert_eq!(m.status, Status::Ok);
    let alpha: f64 = m.summary_value("alpha").unwrap().parse().unwrap();
    assert!((alpha - 2.0).abs() < 0.1, "alpha {alpha}");
    let manifest = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(manifest.contains("exponent.txt = sha256:"));
    assert!(manifest.contains("| dispersion = pinned"));
}

#[test]
fn every_kind_runs_with_its_defaults_and_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cheap = |kind: Kind| {
        let mut cfg = ExperimentConfig::defaults(kind);
        cfg.out = dir.path().join(kind.name()).display().to_string();
        cfg.chain.t_max = 20.0;
        cfg.green_kubo.lag_max = 2.0;
        cfg.kinetics.horizons = vec![4.0, 8.0];
        cfg
    };
    for kind in Kind::ALL {
        let m = run(&cheap(kind));
        assert_eq!(m.status, Status::Ok, "{kind}: {:?}", m.error);
        assert!(!m.outputs.is_empty());
        for (name, _) in &m.outputs {
            assert!(Path::new(&cheap(kind).out).join(name).exists());
        }
    }
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chainlab"))
}

#[test]
fn invalid_config_exits_with_code_2_and_still_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "kind = green-kubo\n[model]\nbeta = -1\nbogus = 3\n").unwrap();
    let out = dir.path().join("out");
    let status = binary()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&status.stderr);
    assert!(stderr.contains("line 3: model.beta"), "{stderr}");
    assert!(stderr.contains("line 4: model.bogus"), "{stderr}");
    let manifest = std::fs::read_to_string(out.join(MANIFEST_FILE)).unwrap();
    assert!(manifest.contains("status = validation-error"));
    assert!(manifest.contains("| beta = -1"));
}

#[test]
fn numerical_failure_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("euler.cfg");
    // Initial stretch outside the tabulated range.
    std::fs::write(&cfg, "kind = euler\n[euler]\nr_amp = 1.0\n").unwrap();
    let out = dir.path().join("out");
    let status = binary()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
    let manifest = std::fs::read_to_string(out.join(MANIFEST_FILE)).unwrap();
    assert!(manifest.contains("status = numerical-failure"));
    assert!(manifest.contains("error = "));
}

#[test]
fn subcommand_must_match_the_config_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "kind = euler\n").unwrap();
    let status = binary()
        .args(["frac-heat", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn check_prints_the_completed_config_and_cli_seed_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "kind = frac-heat\nseed = 5\n").unwrap();
    let output = binary()
        .args(["check", "--seed", "9", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let parsed = parse_config(&text).unwrap();
    assert_eq!(parsed.seed, 9);
    assert_eq!(parsed.kind, Kind::FracHeat);
}

#[test]
fn subcommand_without_config_runs_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = binary()
        .args(["thermo-table", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stdout).contains("concavity_violation = 0"));
    assert!(out.join("table.csv").exists());
    assert!(out.join(MANIFEST_FILE).exists());
}
