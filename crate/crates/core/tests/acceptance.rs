//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run everything with `cargo test --release --test acceptance`, or a subset
//! with `cargo test --release --test acceptance -- 1 5 9`.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rcbo::consensus::consensus_point;
use rcbo::diagnostics::{contraction_probe, dist_to_set, invariant_mean_probe, tail_window};
use rcbo::harness::probe::{contraction_seeds, moment_envelope, seed_list};
use rcbo::harness::{run_experiment, run_sweep, ExperimentConfig, ProbeConfig, SweepAxes, SweepSpec};
use rcbo::objectives::MinimizerSet;
use rcbo::paramcheck::{
    compute_b_constants, compute_gamma_c2, validate_all, validate_contraction, validate_existence,
    validate_moment_bound, GrowthConstants, Status, CHECK_MOMENT,
};
use rcbo::{CboParams, Ensemble, GrowthBounds};

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let mut cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{e}"));
    cfg.output = None;
    cfg
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Rescaled dynamics succeed on the 1-D Rastrigin function; standard ones do not.
fn rastrigin_1d_success() -> Outcome {
    let rescaled = run_experiment(&config("rastrigin1d_rescaled.toml")).map_err(err)?.summary;
    let standard = run_experiment(&config("rastrigin1d_standard.toml")).map_err(err)?.summary;
    let ok = rescaled.success_rate >= 0.9 && standard.success_rate <= 0.1;
    Ok((
        ok,
        format!(
            "rescaled {}/{} = {:.2} (need >= 0.90), standard {}/{} = {:.2} (need <= 0.10)",
            rescaled.successes,
            rescaled.runs,
            rescaled.success_rate,
            standard.successes,
            standard.runs,
            standard.success_rate
        ),
    ))
}

fn grid_cells(name: &str, delta: Vec<f64>, kappa: Vec<f64>) -> Result<rcbo::harness::SweepTable, String> {
    let mut cfg = config(name);
    cfg.sweep = Some(SweepAxes {
        kappa,
        delta,
        particles: None,
        runs: Some(30),
    });
    run_sweep(&SweepSpec::from_config(&cfg).map_err(err)?).map_err(err)
}

/// Spot cells of the kappa x delta success grids on the shifted 2-D Rastrigin function.
fn rastrigin_2d_grid() -> Outcome {
    let small = grid_cells("rastrigin2d_grid_n100.toml", vec![0.5], vec![0.9, 0.1])?;
    let large = grid_cells("rastrigin2d_grid_n500.toml", vec![1.0], vec![0.5])?;
    let hi = small.get(0.5, 0.9).unwrap().rate();
    let lo = small.get(0.5, 0.1).unwrap().rate();
    let mid = large.get(1.0, 0.5).unwrap().rate();
    let ok = hi >= 0.85 && lo <= 0.15 && (0.3..=0.9).contains(&mid);
    Ok((
        ok,
        format!(
            "N=100 (0.5, 0.9) {hi:.2} (need >= 0.85), (0.5, 0.1) {lo:.2} (need <= 0.15); N=500 (1.0, 0.5) {mid:.2} (need 0.30..0.90)"
        ),
    ))
}

/// The two-minimizer function converges to the minimizer nearer the start.
fn biminimizer_targets() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, target) in [
        ("biminimizer_from_upper_left.toml", [1.0, 1.0]),
        ("biminimizer_from_left.toml", [-1.0, -1.0]),
    ] {
        let mut cfg = config(name);
        cfg.record = Default::default();
        let out = run_experiment(&cfg).map_err(err)?;
        let set = MinimizerSet::point(target.to_vec());
        let hits = out
            .records
            .iter()
            .filter(|r| r.final_consensus.as_ref().is_some_and(|m| dist_to_set(m, &set) < 0.1))
            .count();
        let need = (0.8 * out.records.len() as f64).ceil() as usize;
        ok &= hits >= need;
        parts.push(format!("{target:?}: {hits}/{} within 0.1 (need {need})", out.records.len()));
    }
    Ok((ok, parts.join(", ")))
}

/// 20-D Ackley: rescaled final log-error below standard in most seed pairs.
fn ackley_log_error() -> Outcome {
    let mut rescaled = config("ackley20_rescaled.toml");
    let mut standard = config("ackley20_standard.toml");
    rescaled.record = Default::default();
    standard.record = Default::default();
    let a = run_experiment(&rescaled).map_err(err)?;
    let b = run_experiment(&standard).map_err(err)?;
    let log_err = |d: Option<f64>| d.map(f64::ln).unwrap_or(f64::INFINITY);
    let mut wins = 0;
    let mut pairs = Vec::new();
    for (ra, rb) in a.records.iter().zip(&b.records) {
        assert_eq!(ra.seed, rb.seed);
        let (la, lb) = (log_err(ra.final_distance), log_err(rb.final_distance));
        wins += (la < lb) as usize;
        pairs.push(format!("{la:.2}/{lb:.2}"));
    }
    let need = (0.8 * a.records.len() as f64).ceil() as usize;
    Ok((
        wins >= need,
        format!("rescaled better in {wins}/{} pairs (need {need}); log-errors {}", a.records.len(), pairs.join(" ")),
    ))
}

/// Laplace limit, zero-temperature mean and shift invariance of the consensus point.
fn laplace_suite() -> Outcome {
    let mut failures = Vec::new();
    let (n, d) = (64usize, 3usize);
    let positions: Vec<f64> = (0..n * d).map(|k| ((k * 7919) % 1000) as f64 / 37.0 - 13.0).collect();
    let order: Vec<usize> = (0..n).map(|i| (i * 37 + 11) % n).collect();

    for gap in [1.5e-12, 1e-9, 1e-3, 1.0] {
        let mut ens = Ensemble::from_positions(n, d, positions.clone()).map_err(err)?;
        ens.set_fvalues(order.iter().map(|&r| 0.25 + r as f64 * gap).collect()).map_err(err)?;
        let best = order.iter().position(|&r| r == 0).unwrap();
        let m = consensus_point(&ens, 1e15).map_err(err)?;
        if m.point.iter().zip(ens.position(best)).any(|(a, b)| a.to_bits() != b.to_bits()) {
            failures.push(format!("alpha=1e15 gap {gap:e}: {:?} != {:?}", m.point, ens.position(best)));
        }
    }

    let mut ens = Ensemble::from_positions(n, d, positions.clone()).map_err(err)?;
    ens.set_fvalues((0..n).map(|i| (i as f64).sin()).collect()).map_err(err)?;
    let m = consensus_point(&ens, 0.0).map_err(err)?;
    for k in 0..d {
        let col: Vec<f64> = (0..n).map(|i| positions[i * d + k]).collect();
        // exact rational mean: every coordinate is an integer over 37
        let numerators: i64 = col.iter().map(|x| ((x + 13.0) * 37.0).round() as i64).sum();
        let exact = numerators as f64 / (37.0 * n as f64) - 13.0;
        if (m.point[k] - exact).abs() > 4.0 * f64::EPSILON * exact.abs().max(1.0) {
            failures.push(format!("alpha=0 axis {k}: {} vs mean {exact}", m.point[k]));
        }
    }

    let dyadic: Vec<f64> = (0..n).map(|i| ((i * 13) % n) as f64 / 64.0).collect();
    for alpha in [0.5, 1.0, 10.0, 1e15] {
        for shift in [-3.0, 1.0, 1024.0] {
            let mut a = Ensemble::from_positions(n, d, positions.clone()).map_err(err)?;
            let mut b = a.clone();
            a.set_fvalues(dyadic.clone()).map_err(err)?;
            b.set_fvalues(dyadic.iter().map(|f| f + shift).collect()).map_err(err)?;
            let (ma, mb) = (consensus_point(&a, alpha).map_err(err)?, consensus_point(&b, alpha).map_err(err)?);
            if ma.point.iter().zip(&mb.point).any(|(x, y)| x.to_bits() != y.to_bits()) {
                failures.push(format!("shift {shift} at alpha {alpha} changed the point"));
            }
        }
    }
    let ok = failures.is_empty();
    Ok((
        ok,
        if ok {
            "argmin exact for gaps >= 1.5e-12, alpha=0 mean within 4 ulp, shifts bit-exact".into()
        } else {
            failures.join("; ")
        },
    ))
}

/// Seed-averaged second moment stays below initial + C2 + 4 SE.
fn moment_bound() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["moments_quadratic.toml", "moments_rastrigin.toml"] {
        let cfg = config(name);
        let obj = cfg.validate().map_err(err)?;
        let g = GrowthConstants::new(obj.growth().ok_or("no growth constants")?, cfg.params.alpha);
        let verdict = validate_moment_bound(&cfg.params, &g, obj.dim());
        let Some(ProbeConfig::Moments { seeds }) = cfg.probe.clone() else {
            return Err(format!("{name}: expected a moments probe"));
        };
        let env = moment_envelope(&cfg, &seed_list(cfg.seed, seeds)).map_err(err)?;
        let excess = env.worst_excess(4.0).ok_or("no C2")?;
        let pass = verdict.status == Status::Pass && seeds >= 50 && excess <= 0.0;
        ok &= pass;
        parts.push(format!(
            "{}: gamma {:.3}, initial {:.3}, C2 {:.3}, max(mean - bound - 4se) {:.3}",
            obj.name(),
            verdict.gamma,
            env.initial(),
            verdict.c2,
            excess
        ));
    }
    Ok((ok, parts.join("; ")))
}

/// Tail mean of the particles against kappa times the tail consensus.
fn invariant_mean() -> Outcome {
    let cfg = config("invariant_quadratic.toml");
    let obj = cfg.validate().map_err(err)?;
    let g = GrowthConstants::new(obj.growth().ok_or("no growth constants")?, cfg.params.alpha);
    let valid = validate_all(&cfg.params, &g, 1, None).overall == Status::Pass;
    let Some(ProbeConfig::InvariantMean { seeds, tail_fraction }) = cfg.probe.clone() else {
        return Err("expected an invariant-mean probe".into());
    };
    let tail = tail_window(cfg.params.n_steps, tail_fraction);
    let q = invariant_mean_probe(&cfg.params, &obj, &cfg.init, cfg.particles, &seed_list(cfg.seed, seeds), tail)
        .map_err(err)?;
    let quad_ok = valid && seeds >= 20 && q.residual[0].abs() < 5.0 * q.residual_se[0];

    let rcfg = config("rastrigin1d_rescaled.toml");
    let robj = rcfg.validate().map_err(err)?;
    let rtail = tail_window(rcfg.params.n_steps, 0.2);
    let r = invariant_mean_probe(&rcfg.params, &robj, &rcfg.init, rcfg.particles, &seed_list(rcfg.seed, 20), rtail)
        .map_err(err)?;
    let rescaled = r.rescaled_mean[0];
    let rast_ok = (rescaled - 1.0).abs() < 0.1;
    Ok((
        quad_ok && rast_ok,
        format!(
            "quadratic residual {:.2e} vs 5 se {:.2e}; rastrigin mean/kappa {:.3} +- {:.3} (need within 0.1 of 1)",
            q.residual[0],
            5.0 * q.residual_se[0],
            rescaled,
            r.mean_se[0] / rcfg.params.kappa
        ),
    ))
}

/// W2 between two runs decays on a quadratic.
fn contraction() -> Outcome {
    let cfg = config("contraction_quadratic.toml");
    let obj = cfg.validate().map_err(err)?;
    let Some(ProbeConfig::Contraction {
        init_b,
        seeds,
        checkpoints,
        shared_noise,
    }) = cfg.probe.clone()
    else {
        return Err("expected a contraction probe".into());
    };
    let l_m = cfg.check.as_ref().and_then(|c| c.l_m).ok_or("no l_m")?;
    let g = GrowthConstants::new(obj.growth().ok_or("no growth constants")?, cfg.params.alpha);
    let report = validate_all(&cfg.params, &g, 1, Some(l_m));
    let pairs = contraction_seeds(cfg.seed, seeds, shared_noise);
    let w2 = contraction_probe(&cfg.params, &obj, &cfg.init, &init_b, cfg.particles, &pairs, &checkpoints)
        .map_err(err)?
        .scalars();
    let (first, last) = (w2[0], *w2.last().unwrap());
    let ok = report.overall == Status::Pass && seeds >= 20 && last < 0.5 * first;
    Ok((
        ok,
        format!("params {}, W2 {:?} over {seeds} seeds, last/first {:.4}", report.overall, w2, last / first),
    ))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

/// Parameter-checker verdicts on hand-computed tuples.
fn paramcheck_regression() -> Outcome {
    let p = |lambda: f64, sigma: f64, kappa: f64, delta: f64| CboParams {
        lambda,
        sigma,
        alpha: 1e15,
        kappa,
        delta,
        dt: 0.01,
        n_steps: 1,
    };
    let unit = |alpha: f64| GrowthConstants::new(GrowthBounds { c_ell: 1.0, c_u: 1.0, m: 1.0 }, alpha);
    let mut fails: Vec<&str> = Vec::new();
    let mut check = |ok: bool, what: &'static str| {
        if !ok {
            fails.push(what);
        }
    };

    let b = compute_b_constants(&unit(1e15));
    check(b.b2 == 2.0 * (1.0 + 1e-15) && close(b.b1, 3.0), "b constants at alpha=1e15");
    let b = compute_b_constants(&unit(1.0));
    check(b.b2 == 4.0 && b.b1 == 5.0, "b constants at alpha=1");

    let (gamma, c2) = compute_gamma_c2(&p(1.3, 0.4, 0.0, 0.0), 3.0, 2.0, 2);
    check(close(gamma, 1.3 - 0.16) && c2 == 0.0, "kappa=0, delta=0 limit");
    let (gamma, _) = compute_gamma_c2(&p(1.0, 0.5, 0.1, 1.0), 3.0, 2.0, 1);
    check(close(gamma, 0.34), "gamma = 0.34");

    let b2 = compute_b_constants(&unit(1e15)).b2;
    let eps = 1e-3;
    let r22 = validate_moment_bound(&p(16.0 * 0.25 + eps, 0.5, 1.0 / (2.0 * (1.0 + b2)) - eps, 1.0), &unit(1e15), 1);
    check(r22.status == Status::Pass && r22.simple_config, "simple moment configuration");
    let (gamma, _) = compute_gamma_c2(&p(1.0, 0.5, 1.0, 0.0), 5.0, 4.0, 1);
    check(close(gamma, -2.75), "standard dynamics gamma = -2.75");
    let (gamma, _) = compute_gamma_c2(&p(0.7, 0.0, 0.1, 0.5), 3.0, 2.0, 1);
    check(gamma > 0.0 && close(gamma, 0.7 * 0.95 - 2.0 * 0.035), "noiseless gamma");

    let e = validate_existence(&p(5.0, 0.5, 0.05, 1.0), 2.0);
    check(e.status == Status::Pass && e.lhs == 6.0 && close(e.rhs, 0.77), "existence 6 > 0.77");
    for kappa in [1e-6, 0.1, 0.5, 1.0] {
        check(validate_existence(&p(2.0, 0.5, kappa, 1.0), 2.0).status == Status::Fail, "lambda=2 fails");
    }
    let e = validate_existence(&p(4.1, 0.5, 0.1, 1.0), 2.0);
    check(e.status == Status::Pass && e.simple_pair, "kappa < 1/6, lambda > 4 pair");

    let c = validate_contraction(&p(1.0, 0.1, 0.01, 1.0), 1.0);
    check(
        c.status == Status::Pass && close(c.theta, 1.97) && close(c.a, 0.010002) && close(c.rate, 1.959998),
        "contraction 1.97 / 0.010002",
    );
    check(validate_contraction(&p(1.0, 0.5, 0.0, 1.0), 3.0).status == Status::Pass, "kappa=0 contraction");
    check(validate_contraction(&p(1.0, 1.1, 0.99, 1.0), 1.0).status == Status::Fail, "sigma^2 > lambda contraction");

    let combined = config("check_combined.toml");
    let cobj = combined.validate().map_err(err)?;
    let g = GrowthConstants::new(cobj.growth().unwrap(), combined.params.alpha);
    let l_m = combined.check.as_ref().and_then(|c| c.l_m);
    let rep = validate_all(&combined.params, &g, 1, l_m);
    check(
        rep.overall == Status::Pass && rep.entries.iter().all(|e| e.status == Status::Pass),
        "combined configuration",
    );
    let std_cfg = config("rastrigin1d_standard.toml");
    let sobj = std_cfg.validate().map_err(err)?;
    let g = GrowthConstants::new(sobj.growth().unwrap(), std_cfg.params.alpha);
    let rep = validate_all(&std_cfg.params, &g, 1, None);
    check(rep.entry(CHECK_MOMENT).unwrap().status == Status::Fail, "standard dynamics moment check");
    check(
        rep.entries.iter().filter(|e| e.status == Status::Skipped).count() == 1,
        "one skipped entry",
    );

    let ok = fails.is_empty();
    Ok((ok, if ok { "all hand-computed verdicts reproduced".into() } else { format!("mismatch: {}", fails.join(", ")) }))
}

/// `sweep --threads 1` and `--threads 8` write identical bytes.
fn sweep_determinism() -> Outcome {
    let cfg = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/sweep_quadratic.toml");
    let dir = std::env::temp_dir().join(format!("rcbo-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(err)?;
    let mut files = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.join(format!("t{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_rcbo"))
            .arg("sweep")
            .arg(&cfg)
            .args(["--threads", threads, "--out"])
            .arg(&out)
            .output()
            .map_err(err)?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        files.push(std::fs::read(&out).map_err(err)?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    let rows = String::from_utf8_lossy(&files[0]).lines().count() - 1;
    Ok((files[0] == files[1] && rows == 4, format!("{rows} rows, identical: {}", files[0] == files[1])))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("rastrigin-1d success rates", rastrigin_1d_success),
        ("rastrigin-2d grid cells", rastrigin_2d_grid),
        ("two-minimizer targets", biminimizer_targets),
        ("ackley-20d log-error", ackley_log_error),
        ("laplace limit suite", laplace_suite),
        ("second-moment bound", moment_bound),
        ("invariant-mean identity", invariant_mean),
        ("w2 contraction", contraction),
        ("parameter-checker regression", paramcheck_regression),
        ("sweep determinism", sweep_determinism),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += !ok as usize;
        println!(
            "criterion {id:>2} {:<30} {} ({:.1}s) {detail}",
            name,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
