//! Subcommand implementations. Each is a thin delegate into `lqgame-core`
//! plus CSV/JSON output; no numerics live here.

use std::path::Path;

use num_complex::Complex64;
use serde_json::json;

use lqgame_core::catalan::{
    asymptotic_variance_chain, bessel_k_half, catalan_generator, kernel_entry, kernel_row, rho,
    stationary_chain_coeffs, variance_chain, variance_chain_windowed,
};
use lqgame_core::oracle::{dense_expm, finite_difference, DenseMatrix};
use lqgame_core::riccati::{
    eval_generating_function_chain, eval_generating_function_twosided, series_value,
    solve_chain_riccati, solve_twosided_riccati, RiccatiSolution,
};
use lqgame_core::sim::{BoundaryPolicy, PathRunner, SimConfig, SimModel, Strategy};
use lqgame_core::tree::{
    chain_consistency_check, deterministic_limit_check, solve_tree_riccati, verify_depth_invariance,
};
use lqgame_core::twosided::{stationary_twosided_coeffs, twosided_kernel_weight};
use lqgame_core::{ChainParams, TreeParams, TwoSidedParams};

use crate::args::*;
use crate::mc;
use crate::output::{base_meta, write_sidecar, CsvSink};
use crate::{CliError, CliResult};

fn pick<T: Copy>(flag: Option<T>, cfg: Option<T>, default: T) -> T {
    flag.or(cfg).unwrap_or(default)
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let out = cli.out.as_deref();
    let seed = cli.seed.or(cfg.seed);
    let quiet = cli.quiet;
    match &cli.command {
        Command::Coeffs(a) => cmd_coeffs(a, &cfg, out, quiet),
        Command::Riccati(a) => cmd_riccati(a, &cfg, out, quiet),
        Command::Kernel(a) => cmd_kernel(a, &cfg, out, quiet),
        Command::Simulate(a) => cmd_simulate(a, &cfg, out, seed, quiet),
        Command::Variance(a) => cmd_variance(a, &cfg, out, seed, quiet),
        Command::Verify(a) => cmd_verify(a, &cfg, quiet),
        Command::Tree(a) => cmd_tree(a, &cfg, out, quiet),
    }
}

fn cmd_coeffs(
    a: &CoeffsArgs,
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    quiet: bool,
) -> CliResult<()> {
    let model = pick(a.model, cfg.model, ModelArg::Chain);
    let eps = pick(a.eps, cfg.eps, 1.0);
    let trunc = pick(a.trunc, cfg.trunc, 32);
    let mut sink = CsvSink::create(out, quiet)?;
    sink.line("k,phi");
    let meta;
    match model {
        ModelArg::Chain => {
            let p = pick(a.p, cfg.p, 1.0);
            let coeffs = stationary_chain_coeffs(p, eps, trunc)?;
            for (k, v) in coeffs.values().iter().enumerate() {
                sink.line(&format!("{k},{v}"));
            }
            let mut m = base_meta("chain", None);
            m["params"] = json!({"p": p, "eps": eps});
            m["truncation"] = json!(trunc);
            m["provenance"] = json!(coeffs.provenance().as_str());
            m["tail-residual"] = json!(coeffs.tail_sum().abs());
            meta = m;
        }
        ModelArg::Twosided => {
            let p = pick(a.p, cfg.p, 0.5);
            let p1 = pick(a.p1, cfg.p1, 1.0);
            let q1 = pick(a.q1, cfg.q1, 1.0);
            let params = TwoSidedParams::new(eps, 0.0, p, p1, q1, 1.0, 1.0)?;
            let coeffs = stationary_twosided_coeffs(&params, trunc)?;
            for j in -(trunc as i64)..=(trunc as i64) {
                sink.line(&format!("{j},{}", coeffs.coeff(j)));
            }
            let mut m = base_meta("twosided", None);
            m["params"] = json!({"p": p, "p1": p1, "q1": q1, "eps": eps,
                "w": params.w(), "v": params.v(), "B": params.b()});
            m["truncation"] = json!(trunc);
            m["provenance"] = json!(coeffs.provenance().as_str());
            m["tail-residual"] = json!(coeffs.tail_sum().abs());
            meta = m;
        }
        ModelArg::Tree => {
            return Err(validation(
                "coeffs supports chain|twosided; tree has no stationary closed form here",
            ))
        }
    }
    sink.finish()?;
    write_sidecar(out, &meta)
}

fn riccati_csv(sink: &mut CsvSink, sol: &RiccatiSolution) {
    sink.line("t,k,phi");
    for (ti, &t) in sol.grid().iter().enumerate() {
        for k in sol.min_index()..=sol.max_index() {
            sink.line(&format!("{t},{k},{}", sol.coeff(ti, k)));
        }
    }
}

fn cmd_riccati(
    a: &RiccatiArgs,
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    quiet: bool,
) -> CliResult<()> {
    let model = pick(a.model, cfg.model, ModelArg::Chain);
    let eps = pick(a.eps, cfg.eps, 1.0);
    let c = pick(a.c, cfg.c, 1.0);
    let horizon = pick(a.horizon, cfg.horizon, 2.0);
    let steps = pick(a.steps, cfg.steps, ((200.0 * horizon) as usize).clamp(200, 8000));
    let mut sink = CsvSink::create(out, quiet)?;
    let meta;
    match model {
        ModelArg::Chain => {
            let p = pick(a.p, cfg.p, 1.0);
            let trunc = pick(a.trunc, cfg.trunc, 32);
            let params = ChainParams::new(eps, c, p, 1.0, horizon)?;
            let sol = solve_chain_riccati(&params, trunc, steps)?;
            riccati_csv(&mut sink, &sol);
            let mut m = base_meta("chain", None);
            m["params"] = json!({"p": p, "eps": eps, "c": c, "T": horizon});
            m["truncation"] = json!(trunc);
            m["grid"] = json!({"steps": steps});
            m["residual"] = json!(sol.residual());
            m["sum-residual"] = json!(sol.sum_residual());
            meta = m;
        }
        ModelArg::Twosided => {
            let p = pick(a.p, cfg.p, 0.5);
            let p1 = pick(a.p1, cfg.p1, 1.0);
            let q1 = pick(a.q1, cfg.q1, 1.0);
            let trunc = pick(a.trunc, cfg.trunc, 32);
            let params = TwoSidedParams::new(eps, c, p, p1, q1, 1.0, horizon)?;
            let sol = solve_twosided_riccati(&params, trunc, steps)?;
            riccati_csv(&mut sink, &sol);
            let mut m = base_meta("twosided", None);
            m["params"] = json!({"p": p, "p1": p1, "q1": q1, "eps": eps, "c": c, "T": horizon});
            m["truncation"] = json!(trunc);
            m["grid"] = json!({"steps": steps});
            m["residual"] = json!(sol.residual());
            m["sum-residual"] = json!(sol.sum_residual());
            meta = m;
        }
        ModelArg::Tree => {
            let p = pick(a.p, cfg.p, 1.0);
            let branching = pick(a.branching, cfg.branching, 2);
            let depth = pick(a.depth, cfg.depth, 8);
            let params = TreeParams::new(branching, p, eps, c, 1.0, horizon)?;
            let sol = solve_tree_riccati(&params, depth, steps)?;
            sink.line("t,k,phi");
            for (ti, &t) in sol.grid().iter().enumerate() {
                for m in 0..=sol.depth() {
                    sink.line(&format!("{t},{m},{}", sol.coeff(ti, m)));
                }
            }
            let mut m = base_meta("tree", None);
            m["params"] =
                json!({"M": branching, "p": p, "eps": eps, "c": c, "T": horizon, "p0": params.p0()});
            m["truncation"] = json!(depth);
            m["grid"] = json!({"steps": steps});
            m["residual"] = json!(sol.residual());
            meta = m;
        }
    }
    sink.finish()?;
    write_sidecar(out, &meta)
}

fn cmd_kernel(
    a: &KernelArgs,
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    quiet: bool,
) -> CliResult<()> {
    let model = pick(a.model, cfg.model, ModelArg::Chain);
    let t = pick(a.t, cfg.t, 1.0);
    let window = pick(a.window, cfg.window, 60);
    let mut sink = CsvSink::create(out, quiet)?;
    sink.line("gap,value");
    let meta;
    match model {
        ModelArg::Chain => {
            let p = pick(a.p, cfg.p, 1.0);
            let row = kernel_row(window, t, p)?;
            for (gap, v) in row.iter().enumerate() {
                sink.line(&format!("{gap},{v}"));
            }
            let mut m = base_meta("chain", None);
            m["params"] = json!({"p": p, "t": t});
            m["window"] = json!(window);
            meta = m;
        }
        ModelArg::Twosided => {
            let p = pick(a.p, cfg.p, 0.3);
            for off in -(window as i64)..=(window as i64) {
                let v = twosided_kernel_weight(off, t, p)?;
                sink.line(&format!("{off},{v}"));
            }
            let mut m = base_meta("twosided", None);
            m["params"] = json!({"p": p, "t": t});
            m["window"] = json!(window);
            meta = m;
        }
        ModelArg::Tree => return Err(validation("kernel supports chain|twosided")),
    }
    sink.finish()?;
    write_sidecar(out, &meta)
}

struct SimSetup {
    model: SimModel,
    config: SimConfig,
    duration: f64,
    strategy_desc: &'static str,
}

fn cmd_simulate(
    a: &SimulateArgs,
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    seed: Option<u64>,
    quiet: bool,
) -> CliResult<()> {
    let model_arg = pick(a.model, cfg.model, ModelArg::Chain);
    let eps = pick(a.eps, cfg.eps, 1.0);
    let c = pick(a.c, cfg.c, 0.0);
    let sigma = pick(a.sigma, cfg.sigma, 1.0);
    let horizon = pick(a.horizon, cfg.horizon, 2.0);
    let dt = pick(a.dt, cfg.dt, 0.01);
    let paths = pick(a.paths, cfg.paths, 1000);
    let seed = seed.unwrap_or(0);
    let boundary = match pick(a.boundary, cfg.boundary, BoundaryArg::Periodic) {
        BoundaryArg::Periodic => BoundaryPolicy::Periodic,
        BoundaryArg::ZeroTail => BoundaryPolicy::ZeroTail,
    };
    let track = pick(a.track_player, cfg.track_player, 0);

    // model-specific strategy construction; σ enters through the override so
    // σ = 0 diagnostics remain possible
    let setup: SimSetup;
    let chain_sol;
    let two_sol;
    let tree_sol;
    let chain_stat;
    let two_stat;
    let strategy: Strategy<'_>;
    match model_arg {
        ModelArg::Chain => {
            let p = pick(a.p, cfg.p, 1.0);
            let players = pick(a.players, cfg.players, 32);
            let default_k = match boundary {
                BoundaryPolicy::Periodic => players / 2,
                BoundaryPolicy::ZeroTail => players - 1,
            };
            let trunc = pick(a.trunc, cfg.trunc, default_k).max(2);
            let params = ChainParams::new(eps, c, p, 1.0, horizon)?;
            let config = SimConfig {
                size: players,
                paths,
                dt,
                seed,
                boundary,
                track_player: track,
                sigma_override: Some(sigma),
            };
            match pick(a.strategy, cfg.strategy, StrategyArg::Stationary) {
                StrategyArg::Stationary => {
                    chain_stat = stationary_chain_coeffs(p, eps, trunc)?;
                    strategy = Strategy::Stationary(&chain_stat);
                    setup = SimSetup {
                        model: SimModel::Chain(params),
                        config,
                        duration: horizon,
                        strategy_desc: "stationary",
                    };
                }
                StrategyArg::Riccati => {
                    let steps = ((horizon / dt) as usize).clamp(200, 20_000);
                    chain_sol = solve_chain_riccati(&params, trunc, steps)?;
                    strategy = Strategy::Riccati(&chain_sol);
                    setup = SimSetup {
                        model: SimModel::Chain(params),
                        config,
                        duration: horizon,
                        strategy_desc: "riccati",
                    };
                }
            }
        }
        ModelArg::Twosided => {
            let p = pick(a.p, cfg.p, 0.5);
            let p1 = pick(a.p1, cfg.p1, 1.0);
            let q1 = pick(a.q1, cfg.q1, 1.0);
            let players = pick(a.players, cfg.players, 32);
            let default_k = match boundary {
                BoundaryPolicy::Periodic => players / 4,
                BoundaryPolicy::ZeroTail => players / 2,
            };
            let trunc = pick(a.trunc, cfg.trunc, default_k).max(2);
            let params = TwoSidedParams::new(eps, c, p, p1, q1, 1.0, horizon)?;
            let config = SimConfig {
                size: players,
                paths,
                dt,
                seed,
                boundary,
                track_player: track,
                sigma_override: Some(sigma),
            };
            match pick(a.strategy, cfg.strategy, StrategyArg::Stationary) {
                StrategyArg::Stationary => {
                    two_stat = stationary_twosided_coeffs(&params, trunc)?;
                    strategy = Strategy::TwoSidedStationary(&two_stat);
                    setup = SimSetup {
                        model: SimModel::TwoSided(params),
                        config,
                        duration: horizon,
                        strategy_desc: "stationary",
                    };
                }
                StrategyArg::Riccati => {
                    let steps = ((horizon / dt) as usize).clamp(200, 20_000);
                    two_sol = solve_twosided_riccati(&params, trunc, steps)?;
                    strategy = Strategy::Riccati(&two_sol);
                    setup = SimSetup {
                        model: SimModel::TwoSided(params),
                        config,
                        duration: horizon,
                        strategy_desc: "riccati",
                    };
                }
            }
        }
        ModelArg::Tree => {
            let p = pick(a.p, cfg.p, 1.0);
            let branching = pick(a.branching, cfg.branching, 2);
            let generations = pick(a.generations, cfg.generations, 3);
            let depth = pick(a.depth, cfg.depth, generations.max(2) - 1).max(1);
            let params = TreeParams::new(branching, p, eps, c, 1.0, horizon)?;
            let steps = ((horizon / dt) as usize).clamp(200, 20_000);
            tree_sol = solve_tree_riccati(&params, depth, steps)?;
            strategy = Strategy::Tree(&tree_sol);
            setup = SimSetup {
                model: SimModel::Tree(params),
                config: SimConfig {
                    size: generations,
                    paths,
                    dt,
                    seed,
                    boundary: BoundaryPolicy::ZeroTail,
                    track_player: track,
                    sigma_override: Some(sigma),
                },
                duration: horizon,
                strategy_desc: "riccati",
            };
        }
    }

    let mut meta = base_meta(
        match model_arg {
            ModelArg::Chain => "chain",
            ModelArg::Twosided => "twosided",
            ModelArg::Tree => "tree",
        },
        Some(seed),
    );
    meta["boundary"] = json!(setup.config.boundary.as_str());
    meta["strategy"] = json!(setup.strategy_desc);
    meta["paths"] = json!(paths);
    meta["dt"] = json!(dt);
    meta["duration"] = json!(setup.duration);
    meta["sigma"] = json!(sigma);
    meta["size"] = json!(setup.config.size);
    meta["track-player"] = json!(track);

    let mut sink = CsvSink::create(out, quiet)?;
    let runner = PathRunner::new(&setup.model, setup.config, strategy, setup.duration)?;
    if a.store {
        let ens = lqgame_core::sim::simulate(&setup.model, setup.config, strategy, setup.duration)?;
        sink.line("path,player,t,x");
        for path in 0..ens.paths() {
            for step in 0..=ens.steps {
                let t = ens.time(step);
                for player in 0..ens.players {
                    sink.line(&format!("{path},{player},{t},{}", ens.state(path, step, player)));
                }
            }
        }
        meta["stored"] = json!("trajectories");
        meta["path-seeds"] = json!(ens.path_seeds);
    } else {
        let terminals = mc::parallel_terminals(&runner, paths)?;
        sink.line("path,x");
        for (p, v) in terminals.iter().enumerate() {
            sink.line(&format!("{p},{v}"));
        }
        meta["stored"] = json!("terminal-tracked");
        let (mean, se_mean) = lqgame_core::sim::mean_and_se(&terminals);
        let (var, se_var) = lqgame_core::sim::variance_and_se(&terminals);
        meta["terminal-mean"] = json!(mean);
        meta["terminal-variance"] = json!(var);
        if a.track_var || !quiet {
            println!(
                "player {track}: terminal mean {mean:.6} +- {se_mean:.6}, var {var:.6} +- {se_var:.6} ({paths} paths)"
            );
        }
    }
    sink.finish()?;
    write_sidecar(out, &meta)
}

fn cmd_variance(
    a: &VarianceArgs,
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    seed: Option<u64>,
    quiet: bool,
) -> CliResult<()> {
    let p = pick(a.p, cfg.p, 1.0);
    let t = pick(a.t, cfg.t, 50.0);
    let panels = pick(a.panels, cfg.panels, 32);
    let est = variance_chain(t, p, panels)?;
    let limit = asymptotic_variance_chain(p)?;
    let mut sink = CsvSink::create(out, quiet)?;
    sink.line("quantity,value");
    sink.line(&format!("analytic,{}", est.value));
    sink.line(&format!("limit,{limit}"));
    sink.line(&format!("achieved-rel-change,{}", est.achieved));
    if !quiet {
        println!("Var(X_t) at t={t}, p={p}: {:.8} (limit 1/sqrt(2p) = {limit:.8})", est.value);
    }
    let mut meta = base_meta("chain", seed);
    meta["params"] = json!({"p": p, "t": t, "panels": est.panels});
    if a.mc {
        let players = pick(a.players, cfg.players, 64);
        let paths = pick(a.paths, cfg.paths, 4000);
        let dt = pick(a.dt, cfg.dt, 0.01);
        let params = ChainParams::new(1.0, 0.0, p, 1.0, t)?;
        let config = SimConfig::new(players, paths, dt, seed.unwrap_or(0))
            .with_boundary(BoundaryPolicy::ZeroTail);
        let r = mc::parallel_crosscheck(&params, t, config)?;
        sink.line(&format!("analytic-windowed,{}", r.analytic_windowed));
        sink.line(&format!("simulated,{}", r.simulated));
        sink.line(&format!("std-error,{}", r.std_error));
        sink.line(&format!("z-windowed,{}", r.z_windowed));
        sink.line(&format!("z-full,{}", r.z_full));
        if !quiet {
            println!(
                "MC (N={players}, {paths} paths, dt={dt}): {:.6} +- {:.6}; z_window={:.2} z_full={:.2}",
                r.simulated, r.std_error, r.z_windowed, r.z_full
            );
        }
        meta["mc"] = json!({"players": players, "paths": paths, "dt": dt,
            "boundary": "zero-tail", "z-windowed": r.z_windowed, "z-full": r.z_full});
    }
    sink.finish()?;
    write_sidecar(out, &meta)
}

struct Suite {
    quiet: bool,
    failures: usize,
}

impl Suite {
    fn new(quiet: bool) -> Self {
        Self { quiet, failures: 0 }
    }

    fn check(&mut self, name: &str, value: f64, tol: f64) {
        let ok = value.is_finite() && value <= tol;
        if !ok {
            self.failures += 1;
        }
        if !self.quiet || !ok {
            println!("{} {name}: {value:.3e} (tol {tol:.1e})", if ok { "ok  " } else { "FAIL" });
        }
    }

    fn finish(self) -> CliResult<()> {
        if self.failures == 0 {
            Ok(())
        } else {
            Err(CliError::VerificationFailed)
        }
    }
}

fn cmd_verify(a: &VerifyArgs, cfg: &ExperimentConfig, quiet: bool) -> CliResult<()> {
    let suite = pick(a.suite, cfg.suite, SuiteArg::All);
    let mut s = Suite::new(quiet);
    let all = suite == SuiteArg::All;

    if all || suite == SuiteArg::Convolution {
        let trunc = pick(a.trunc, cfg.trunc, 200);
        let coeffs = stationary_chain_coeffs(pick(a.p, cfg.p, 1.0), 1.0, trunc)?;
        let mut worst = 0.0f64;
        for n in 2..=trunc {
            let conv: f64 = (0..=n).map(|j| coeffs.coeff(j) * coeffs.coeff(n - j)).sum();
            worst = worst.max(conv.abs());
        }
        s.check("chain stationary convolution", worst, 1e-12);

        let params = TwoSidedParams::new(1.0, 0.0, 0.3, 1.0, 1.0, 1.0, 1.0)?;
        let st = stationary_twosided_coeffs(&params, 220)?;
        let eb = st.epsilon_b();
        let mut worst = 0.0f64;
        for j in -2i64..=2 {
            let conv: f64 = (-220i64..=220).map(|k| st.coeff(k) * st.coeff(j - k)).sum();
            let target = match j {
                0 => eb,
                1 => -eb * st.w(),
                -1 => -eb * st.v(),
                _ => 0.0,
            };
            worst = worst.max((conv - target).abs());
        }
        s.check("two-sided stationary convolution", worst, 1e-12);
    }

    if all || suite == SuiteArg::Kernel {
        let t = pick(a.t, cfg.t, 1.0);
        let dim = pick(a.dim, cfg.dim, 60);
        for p in [pick(a.p, cfg.p, 1.0), 0.7] {
            let gen = catalan_generator(p, dim)?;
            let dense = DenseMatrix::from_fn(dim + 1, |i, j| {
                if j >= i {
                    gen.coeff(j - i) * p.sqrt()
                } else {
                    0.0
                }
            });
            let e = dense_expm(&dense, t)?;
            let row = kernel_row(dim, t, p)?;
            let mut worst = 0.0f64;
            for gap in 0..=dim {
                worst = worst.max((e.get(0, gap) - row[gap]).abs());
            }
            s.check(&format!("one-sided kernel vs expm (p={p})"), worst, 1e-8);
        }
        // deterministic two-sided weights vs a dense exponential of the
        // Toeplitz generator built from the stationary coefficients
        let p = 0.3;
        let params = TwoSidedParams::new(1.0, 0.0, p, 1.0, 1.0, 1.0, 1.0)?;
        let st = stationary_twosided_coeffs(&params, 200)?;
        let w = 200usize;
        let n = 2 * w + 1;
        let q = DenseMatrix::from_fn(n, |i, j| {
            let d = j as i64 - i as i64;
            -st.coeff(d)
        });
        let e = dense_expm(&q, t)?;
        let mut worst = 0.0f64;
        for off in -12i64..=12 {
            let got = twosided_kernel_weight(off, t, p)?;
            worst = worst.max((e.get(w, (w as i64 + off) as usize) - got).abs());
        }
        s.check("two-sided kernel vs expm", worst, 1e-8);
    }

    if all || suite == SuiteArg::GeneratingFunction {
        let params = ChainParams::new(1.0, 1.0, 0.8, 1.0, 2.0)?;
        let sol = solve_chain_riccati(&params, 64, 1000)?;
        let steps = sol.grid().len() - 1;
        let mut worst = 0.0f64;
        for frac in 0..=4usize {
            let ti = frac * steps / 4;
            for &zr in &[0.0, 0.3, 0.6] {
                let z = Complex64::new(zr, 0.0);
                let series = series_value(sol.row(ti), sol.min_index(), z);
                let closed = eval_generating_function_chain(&params, z, sol.grid()[ti])?;
                worst = worst.max((series - closed).norm());
            }
        }
        s.check("chain series vs closed form", worst, 1e-6);

        let params = TwoSidedParams::new(1.0, 0.5, 0.8, 1.0, 0.5, 1.0, 2.0)?;
        let sol = solve_twosided_riccati(&params, 64, 1000)?;
        let steps = sol.grid().len() - 1;
        let mut worst = 0.0f64;
        for frac in 0..=4usize {
            let ti = frac * steps / 4;
            for &zr in &[0.3, 0.6] {
                let z = Complex64::new(zr, 0.0);
                let series = series_value(sol.row(ti), sol.min_index(), z);
                let closed = eval_generating_function_twosided(&params, z, sol.grid()[ti])?;
                worst = worst.max((series - closed).norm());
            }
        }
        s.check("two-sided series vs closed form", worst, 1e-6);
    }

    if all || suite == SuiteArg::TreeDepth {
        let m = pick(a.branching, cfg.branching, 2);
        let g = pick(a.generations, cfg.generations, 3);
        let p = pick(a.p, cfg.p, 0.5);
        let params = TreeParams::new(m, p, 1.0, 1.0, 1.0, 2.0)?;
        let r = verify_depth_invariance(&params, g, 800)?;
        s.check("tree same-depth discrepancy", r.same_depth_discrepancy, 1e-9);
        s.check("tree reduced vs brute force", r.reduced_vs_brute, 1e-9);
        let det = TreeParams::new(m, 1.0, 1.0, 1.0, 1.0, 1.0)?;
        s.check("tree deterministic limit", deterministic_limit_check(&det, 8, 400)?, 1e-10);
        s.check("tree M=1 chain consistency", chain_consistency_check(1.0, 1.0, 2.0, 8, 400)?, 1e-9);
    }

    if all || suite == SuiteArg::Rho {
        let mut worst = 0.0f64;
        for k in 0..=10usize {
            for &x in &[-9.0, -4.0, -1.0, -0.25] {
                let f = move |y: f64| rho(k, y);
                let (deriv, _) = finite_difference(&f, x)?;
                let lhs = rho(k + 1, x)?;
                let rhs = deriv + rho(k, x)? / (2.0 * (-x).sqrt());
                worst = worst.max((lhs - rhs).abs());
            }
        }
        s.check("rho recursion (finite differences)", worst, 1e-8);

        let mut worst = 0.0f64;
        for j in 1..=8usize {
            for &nu in &[0.5, 1.0, 2.0] {
                let lhs = rho(j, -nu * nu)?;
                let rhs = (2.0 * nu / std::f64::consts::PI).sqrt() * nu.exp()
                    * bessel_k_half(j as u32 - 1, nu)?
                    / (2.0 * nu).powi(j as i32);
                worst = worst.max((lhs - rhs).abs());
            }
        }
        s.check("rho Bessel-K identity", worst, 1e-10);
    }

    if all || suite == SuiteArg::Variance {
        let p = pick(a.p, cfg.p, 1.0);
        s.check("variance at t=0", variance_chain(0.0, p, 8)?.value, 0.0);
        let long = variance_chain(400.0, p, 64)?;
        s.check(
            "long-horizon variance vs asymptotic limit",
            (long.value - asymptotic_variance_chain(p)?).abs(),
            1e-3,
        );
        s.check("variance quadrature convergence", long.achieved, 1e-6);
        let t = pick(a.t, cfg.t, 50.0);
        let full = variance_chain(t, p, 32)?.value;
        let windowed = variance_chain_windowed(t, p, 32, 64)?.value;
        let ordered = windowed <= full && full <= asymptotic_variance_chain(p)?;
        s.check(
            "windowed <= full <= limit ordering",
            if ordered { 0.0 } else { 1.0 },
            0.0,
        );
        // one-sided kernel entry spot values
        let e = (kernel_entry(0, 0, 1.0, 1.0)? - (-1.0f64).exp()).abs();
        s.check("kernel diagonal value", e, 1e-14);
    }

    if s.failures == 0 && !quiet {
        println!("all checks passed");
    }
    s.finish()
}

fn cmd_tree(
    a: &TreeArgs,
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    quiet: bool,
) -> CliResult<()> {
    let m = pick(a.branching, cfg.branching, 2);
    let p = pick(a.p, cfg.p, 0.5);
    let g = pick(a.generations, cfg.generations, 3);
    let depth = pick(a.depth, cfg.depth, 8);
    let steps = pick(a.steps, cfg.steps, 800);
    let eps = pick(a.eps, cfg.eps, 1.0);
    let c = pick(a.c, cfg.c, 1.0);
    let horizon = pick(a.horizon, cfg.horizon, 2.0);
    let params = TreeParams::new(m, p, eps, c, 1.0, horizon)?;

    let report = verify_depth_invariance(&params, g, steps)?;
    if !quiet {
        println!(
            "depth invariance (M={m}, G={g}, p={p}): same-depth {:.3e}, reduced-vs-brute {:.3e}",
            report.same_depth_discrepancy, report.reduced_vs_brute
        );
    }
    let det = if p == 1.0 {
        let d = deterministic_limit_check(&params, depth, steps)?;
        if !quiet {
            println!("deterministic-limit discrepancy: {d:.3e}");
        }
        Some(d)
    } else {
        None
    };

    let sol = solve_tree_riccati(&params, depth, steps)?;
    let mut sink = CsvSink::create(out, quiet)?;
    sink.line("t,k,phi");
    for (ti, &t) in sol.grid().iter().enumerate() {
        for d in 0..=sol.depth() {
            sink.line(&format!("{t},{d},{}", sol.coeff(ti, d)));
        }
    }
    sink.finish()?;
    let mut meta = base_meta("tree", None);
    meta["params"] = json!({"M": m, "p": p, "eps": eps, "c": c, "T": horizon, "p0": params.p0()});
    meta["generations"] = json!(g);
    meta["depth"] = json!(depth);
    meta["same-depth-discrepancy"] = json!(report.same_depth_discrepancy);
    meta["reduced-vs-brute"] = json!(report.reduced_vs_brute);
    if let Some(d) = det {
        meta["deterministic-limit"] = json!(d);
    }
    write_sidecar(out, &meta)?;
    if report.same_depth_discrepancy > 1e-9 || report.reduced_vs_brute > 1e-9 {
        return Err(CliError::VerificationFailed);
    }
    Ok(())
}
