// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! ```text
//! ctoqw <command> <coin.json> [--t R] [--horizon R] [--delta R] [--n INT]
//!       [--paths INT] [--seed INT] [--site INT] [--trunc INT]
//!       [--out PATH] [--format json|csv]
//! ```
//!
//! Exit status is 0 on success, 1 for invalid input (including usage
//! errors and failed `verify` checks) and 2 when a computation hit a
//! numerical degeneracy.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use crate::auxiliary;
use crate::classifier::{self, ClassificationResult, Rule, Verdict};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::lattice::{self, BlockGenerator, Site};
use crate::model::{density_from_pure, Coin, CoinFile, DensityMatrix};
use crate::numkernel::{self, c64, ZERO};
use crate::output::{fmt_real, json_matrix, json_real};
use crate::trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Stationary states of the auxiliary generator.
    Stationary,
    /// Drift and drift-operator residual.
    Drift,
    /// Recurrence verdict with the rule that produced it.
    Classify,
    /// Site probabilities over time on the truncated lattice.
    Evolve,
    /// Partial sums of the δ-skeleton return series.
    Skeleton,
    /// Finite-horizon return-probability integral.
    Integral,
    /// Monte Carlo drift estimate (csv: one sampled path).
    Simulate,
    /// Built-in reference suite.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Parsed invocation. Unset options fall back to the defaults documented
/// on each flag.
#[derive(Debug, Clone, Parser)]
#[command(name = "ctoqw", version, about = "Continuous-time open quantum walks on the integer line")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Coin file (not needed for `verify`).
    pub coin_path: Option<PathBuf>,
    /// Final time for `evolve` [default: 1].
    #[arg(long)]
    pub t: Option<f64>,
    /// Horizon for `integral` and `simulate` [default: 100].
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Skeleton step for `skeleton` [default: 1]; quadrature step for `integral` [default: 0.05].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Output intervals for `evolve`, number of skeleton terms for `skeleton` [default: 100].
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of sampled paths for `simulate` [default: 400].
    #[arg(long)]
    pub paths: Option<usize>,
    /// Random seed for `simulate` [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Target site; `evolve` without it emits the full profile [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub site: Option<Site>,
    /// Truncation radius; fitted automatically when absent.
    #[arg(long)]
    pub trunc: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: csv for `evolve`, json otherwise].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Rendered command output and whether it counts as success.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub text: String,
    pub success: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, success: true }
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

/// Parses `args` (program name first), runs and reports. Returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&config).and_then(|o| emit(&config, &o).map(|_| o)) {
        Ok(outcome) => {
            if outcome.success {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(config: &RunConfig, outcome: &Outcome) -> Result<()> {
    match &config.out {
        Some(path) => fs::write(path, &outcome.text)?,
        None => print!("{}", outcome.text),
    }
    Ok(())
}

struct Loaded {
    coin: Coin,
    rho0: DensityMatrix,
}

fn load(config: &RunConfig) -> Result<Loaded> {
    let path = config
        .coin_path
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("{:?} needs a coin file", config.command)))?;
    let file = CoinFile::from_json(&fs::read_to_string(path)?)?;
    Ok(Loaded { coin: file.coin()?, rho0: file.initial_state()? })
}

fn positive(name: &str, v: Option<f64>, default: f64) -> Result<f64> {
    let v = v.unwrap_or(default);
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidArgument(format!("--{name} must be positive, got {v}")));
    }
    Ok(v)
}

fn json_text(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

/// Executes one command.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    if config.command == Command::Verify {
        let checks = verify_suite();
        let mut text = String::new();
        for c in &checks {
            text.push_str(&format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        let failed = checks.iter().filter(|c| !c.pass).count();
        text.push_str(&format!("{} of {} checks passed\n", checks.len() - failed, checks.len()));
        return Ok(Outcome { text, success: failed == 0 });
    }
    let Loaded { coin, rho0 } = load(config)?;
    let format = config.format.unwrap_or(if config.command == Command::Evolve { Format::Csv } else { Format::Json });
    let needs_json = |what: &str| -> Result<()> {
        if format == Format::Csv {
            return Err(Error::InvalidArgument(format!("{what} output is only available as json")));
        }
        Ok(())
    };
    match config.command {
        Command::Stationary => {
            needs_json("stationary")?;
            let st = auxiliary::stationary_states(&coin)?;
            Ok(Outcome::ok(json_text(json!({
                "kernel_dim": st.kernel_dim,
                "h1": st.h1_holds,
                "rho_inv": st.rho_inv.as_ref().map(|r| json_matrix(r.matrix())),
                "residual": st.residual.map(json_real),
                "stationary_basis": st.stationary_basis.iter().map(json_matrix).collect::<Vec<_>>(),
            }))))
        }
        Command::Drift => {
            needs_json("drift")?;
            let st = auxiliary::stationary_states(&coin)?;
            let rho_inv = st.rho_inv.ok_or(Error::NoStationaryState)?;
            let d = auxiliary::drift(&coin, &rho_inv)?;
            let j = auxiliary::solve_drift_operator(&coin, d.m)?;
            Ok(Outcome::ok(json_text(json!({
                "m": json_real(d.m),
                "right_rate": json_real(d.right_rate),
                "left_rate": json_real(d.left_rate),
                "drift_operator_residual": json_real(j.residual),
                "drift_operator": json_matrix(&j.j),
            }))))
        }
        Command::Classify => {
            needs_json("classify")?;
            Ok(Outcome::ok(json_text(classification_json(&classifier::classify(&coin)?))))
        }
        Command::Evolve => run_evolve(config, format, &coin, &rho0),
        Command::Skeleton => run_skeleton(config, format, &coin, &rho0),
        Command::Integral => run_integral(config, format, &coin, &rho0),
        Command::Simulate => run_simulate(config, format, &coin, &rho0),
        Command::Verify => unreachable!("handled above"),
    }
}

pub fn classification_json(r: &ClassificationResult) -> Value {
    json!({
        "verdict": r.verdict.as_str(),
        "rule": r.rule.tag(),
        "m": r.m.map(json_real),
        "h1": r.h1,
        "kernel_dim": r.kernel_dim,
        "transient_state": r.transient_state.as_ref().map(|s| json_matrix(s.matrix())),
        "candidate_subspaces": r.candidate_subspaces,
        "diagnostic": r.diagnostic,
    })
}

fn generator(config: &RunConfig, coin: &Coin, rho0: &DensityMatrix, horizon: f64) -> Result<BlockGenerator> {
    match config.trunc {
        Some(m) => lattice::build_block_generator(coin, m),
        None => lattice::fit_radius(coin, rho0, 0, horizon),
    }
}

fn run_evolve(config: &RunConfig, format: Format, coin: &Coin, rho0: &DensityMatrix) -> Result<Outcome> {
    let t = positive("t", config.t, 1.0)?;
    let n = config.n.unwrap_or(100).max(1);
    let gen = generator(config, coin, rho0, t)?;
    let series = lattice::profile_series(&gen, rho0, 0, t, n)?;
    let leaked = series.last().map_or(0.0, |s| s.leaked_mass);
    let text = match (config.site, format) {
        (Some(j), Format::Csv) => {
            let mut s = String::from("t,p\n");
            for st in &series {
                s.push_str(&format!("{},{}\n", fmt_real(st.time), fmt_real(st.site_probability(j))));
            }
            s
        }
        (None, Format::Csv) => {
            let mut s = String::from("t,site,trace\n");
            for st in &series {
                for site in st.sites() {
                    s.push_str(&format!("{},{},{}\n", fmt_real(st.time), site, fmt_real(st.site_probability(site))));
                }
            }
            s
        }
        (site, Format::Json) => {
            let j = site.unwrap_or(0);
            json_text(json!({
                "site": j,
                "t": series.iter().map(|s| json_real(s.time)).collect::<Vec<_>>(),
                "p": series.iter().map(|s| json_real(s.site_probability(j))).collect::<Vec<_>>(),
                "radius": gen.radius(),
                "leaked_mass": json_real(leaked),
            }))
        }
    };
    Ok(Outcome::ok(text))
}

fn run_skeleton(config: &RunConfig, format: Format, coin: &Coin, rho0: &DensityMatrix) -> Result<Outcome> {
    let delta = positive("delta", config.delta, 1.0)?;
    let n = config.n.unwrap_or(100);
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be at least 1".into()));
    }
    let j = config.site.unwrap_or(0);
    let gen = generator(config, coin, rho0, delta * n as f64)?;
    let s = lattice::skeleton_sum(&gen, rho0, 0, j, delta, n)?;
    let text = match format {
        Format::Csv => {
            let mut out = String::from("n,t,partial_sum\n");
            for (k, v) in s.partial_sums.iter().enumerate() {
                out.push_str(&format!("{k},{},{}\n", fmt_real(k as f64 * delta), fmt_real(*v)));
            }
            out
        }
        Format::Json => json_text(json!({
            "delta": json_real(delta),
            "site": j,
            "value": json_real(s.value()),
            "partial_sums": s.partial_sums.iter().map(|v| json_real(*v)).collect::<Vec<_>>(),
            "radius": gen.radius(),
            "leaked_mass": json_real(s.leaked_mass),
        })),
    };
    Ok(Outcome::ok(text))
}

fn run_integral(config: &RunConfig, format: Format, coin: &Coin, rho0: &DensityMatrix) -> Result<Outcome> {
    let horizon = positive("horizon", config.horizon, 100.0)?;
    let step = positive("delta", config.delta, 0.05)?;
    let gen = generator(config, coin, rho0, horizon)?;
    let r = lattice::return_integral(&gen, rho0, 0, horizon, step)?;
    let text = match format {
        Format::Csv => format!(
            "horizon,value\n{},{}\n{},{}\n{},{}\n",
            fmt_real(horizon / 4.0),
            fmt_real(r.quarter),
            fmt_real(horizon / 2.0),
            fmt_real(r.half),
            fmt_real(horizon),
            fmt_real(r.value)
        ),
        Format::Json => json_text(json!({
            "horizon": json_real(horizon),
            "value": json_real(r.value),
            "value_quarter": json_real(r.quarter),
            "value_half": json_real(r.half),
            "growth_quarter_to_full": json_real(r.value / r.quarter),
            "growth_half_to_full": json_real(r.value / r.half),
            "intervals": r.intervals,
            "radius": gen.radius(),
            "leaked_mass": json_real(r.leaked_mass),
        })),
    };
    Ok(Outcome::ok(text))
}

fn run_simulate(config: &RunConfig, format: Format, coin: &Coin, rho0: &DensityMatrix) -> Result<Outcome> {
    let horizon = positive("horizon", config.horizon, 100.0)?;
    let seed = config.seed.unwrap_or(0);
    let text = match format {
        Format::Csv => {
            let path = trajectory::simulate_path(coin, 0, rho0, horizon, &mut trajectory::path_rng(seed, 0))?;
            path.to_csv()
        }
        Format::Json => {
            let est = trajectory::estimate_drift(coin, rho0, horizon, config.paths.unwrap_or(400), seed)?;
            json_text(est.to_json())
        }
    };
    Ok(Outcome::ok(text))
}

/// One line of the `verify` report.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, detail: detail.into() }
}

fn verdict_check(name: &str, coin: Result<Coin>, expected: Verdict, rule: Option<Rule>) -> Check {
    match coin.and_then(|c| classifier::classify(&c)) {
        Ok(r) => {
            let ok = r.verdict == expected && rule.map_or(true, |x| x == r.rule);
            check(name, ok, format!("verdict {} rule {}", r.verdict, r.rule))
        }
        Err(e) => check(name, false, format!("error: {e}")),
    }
}

fn stationary_check(name: &str, coin: &Coin, expected: &numkernel::CMatrix, m_expected: f64) -> Check {
    let result = auxiliary::stationary_states(coin).and_then(|st| {
        let rho = st.rho_inv.ok_or(Error::NoStationaryState)?;
        let m = auxiliary::drift(coin, &rho)?.m;
        Ok((numkernel::max_abs(&(rho.matrix() - expected)), m))
    });
    match result {
        Ok((dev, m)) => check(
            name,
            dev <= 1e-9 && (m - m_expected).abs() <= 1e-9,
            format!("max entry deviation {dev:.2e}, m = {m:.12}"),
        ),
        Err(e) => check(name, false, format!("error: {e}")),
    }
}

/// `e^{−2t} I₀(2t)` by its power series.
pub fn scalar_return_probability(t: f64) -> f64 {
    let mut term = (-2.0 * t).exp();
    let mut sum = term;
    for k in 1..400 {
        term *= t * t / (k as f64 * k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Reference checks run by `verify`.
pub fn verify_suite() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(stationary_check(
        "example 4 (c=0) stationary state and drift",
        &fixtures::example4(0.0),
        &fixtures::example4_rho_inv_c0(),
        -6.0 / 53.0,
    ));
    out.push(stationary_check(
        "example 4 (c=1) stationary state and drift",
        &fixtures::example4(1.0),
        &fixtures::example4_rho_inv_c1(),
        0.0,
    ));

    for h in [0.0, 0.5, 1.0, 4.0 / 3.0, 2.0] {
        let coin = fixtures::example3(0.0, h);
        let m = auxiliary::stationary_states(&coin)
            .and_then(|st| st.rho_inv.ok_or(Error::NoStationaryState))
            .and_then(|r| auxiliary::drift(&coin, &r))
            .map(|d| d.m);
        let expected = fixtures::example3_drift_y0(h);
        out.push(match m {
            Ok(m) => {
                check(format!("example 3 (y=0, h={h:.4}) drift"), (m - expected).abs() <= 1e-9, format!("m = {m:.12}"))
            }
            Err(e) => check(format!("example 3 (y=0, h={h:.4}) drift"), false, format!("error: {e}")),
        });
    }
    for h in fixtures::example3_boundary_y_half() {
        out.push(verdict_check(
            &format!("example 3 (y=1/2, h={h:.6})"),
            Ok(fixtures::example3(0.5, h)),
            Verdict::Recurrent,
            None,
        ));
        for off in [-0.1, 0.1] {
            out.push(verdict_check(
                &format!("example 3 (y=1/2, h={:.6})", h + off),
                Ok(fixtures::example3(0.5, h + off)),
                Verdict::Transient,
                None,
            ));
        }
    }

    let root8 = 8f64.sqrt();
    out.push(verdict_check(
        "example 1 (|a|=2√2)",
        Ok(fixtures::example1(root8)),
        Verdict::Recurrent,
        Some(Rule::UniqueStateZeroDrift),
    ));
    out.push(verdict_check(
        "example 1 (a=2√2·i)",
        Ok(fixtures::example1_complex(c64(0.0, root8))),
        Verdict::Recurrent,
        Some(Rule::UniqueStateZeroDrift),
    ));
    out.push(verdict_check(
        "example 1 (a=3)",
        Ok(fixtures::example1(3.0)),
        Verdict::Transient,
        Some(Rule::UniqueStateNonzeroDrift),
    ));

    let h_diag = fixtures::example2_hamiltonian_in_eigenbasis(0.7, ZERO, -0.3);
    let ex2 = |a: f64, c: num_complex::Complex64| fixtures::example2(c64(a, 0.0), c, h_diag.clone());
    out.push(verdict_check(
        "example 2a (|a|≠1, |c|≠2)",
        Ok(ex2(0.5, c64(1.0, 0.0))),
        Verdict::Transient,
        Some(Rule::DiagonalBothUnbalanced),
    ));
    out.push(verdict_check(
        "example 2b (|a|=1, |c|=2)",
        Ok(ex2(1.0, c64(0.0, 2.0))),
        Verdict::Recurrent,
        Some(Rule::DiagonalBothBalanced),
    ));
    let basis = fixtures::example2_basis();
    for (name, coin, k) in [
        ("example 2c (|a|≠1, |c|=2)", ex2(0.5, c64(0.0, 2.0)), 0),
        ("example 2d (|a|=1, |c|≠2)", ex2(-1.0, c64(3.0, 0.0)), 1),
    ] {
        let expected = density_from_pure(&basis.column(k).into_owned()).expect("unit vector");
        out.push(match classifier::classify(&coin) {
            Ok(r) => {
                let dev = r
                    .transient_state
                    .as_ref()
                    .map_or(f64::INFINITY, |s| numkernel::max_abs(&(s.matrix() - expected.matrix())));
                check(
                    name,
                    r.verdict == Verdict::PartiallyRecurrent && r.rule == Rule::DiagonalOneBalanced && dev <= 1e-9,
                    format!("verdict {} rule {}, transient state u{} deviation {dev:.2e}", r.verdict, r.rule, k + 1),
                )
            }
            Err(e) => check(name, false, format!("error: {e}")),
        });
    }
    let h_coupled = fixtures::example2_hamiltonian_in_eigenbasis(0.7, c64(0.4, 0.3), -0.3);
    out.push(verdict_check(
        "example 2 coupled H (|c|²−|a|²=3)",
        Ok(fixtures::example2(c64(1.0, 0.0), c64(2.0, 0.0), h_coupled.clone())),
        Verdict::Recurrent,
        Some(Rule::UniqueStateZeroDrift),
    ));
    out.push(verdict_check(
        "example 2 coupled H (|c|²−|a|²≠3)",
        Ok(fixtures::example2(c64(1.0, 0.0), c64(2.5, 0.0), h_coupled)),
        Verdict::Transient,
        Some(Rule::UniqueStateNonzeroDrift),
    ));

    out.push(verdict_check("example 4 (c=0)", Ok(fixtures::example4(0.0)), Verdict::Transient, None));
    out.push(verdict_check("example 4 (c=1)", Ok(fixtures::example4(1.0)), Verdict::Recurrent, None));
    out.push(verdict_check("scalar symmetric walk", Ok(fixtures::scalar_coin(1.0, 1.0)), Verdict::Recurrent, None));

    let scalar = fixtures::scalar_coin(1.0, 1.0);
    let p = lattice::build_block_generator(&scalar, 40)
        .and_then(|g| lattice::transition_probability(&g, &DensityMatrix::maximally_mixed(1), 0, 0, 1.0));
    let expected = scalar_return_probability(1.0);
    out.push(match p {
        Ok(p) => check("scalar p00(1) = e^-2 I0(2)", (p - expected).abs() <= 1e-6, format!("p = {p:.12}")),
        Err(e) => check("scalar p00(1) = e^-2 I0(2)", false, format!("error: {e}")),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("ctoqw").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn grammar() {
        let c = parse(&["evolve", "coin.json", "--t", "2.5", "--site", "-3", "--trunc", "40", "--format", "json"]);
        assert_eq!(c.command, Command::Evolve);
        assert_eq!(c.t, Some(2.5));
        assert_eq!(c.site, Some(-3));
        assert_eq!(c.trunc, Some(40));
        assert_eq!(c.format, Some(Format::Json));
        assert!(RunConfig::try_parse_from(["ctoqw", "frobnicate", "x.json"]).is_err());
        assert!(RunConfig::try_parse_from(["ctoqw", "verify"]).is_ok());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["ctoqw", "frobnicate"]), 1);
        assert_eq!(main_with_args(["ctoqw", "classify", "/nonexistent/coin.json"]), 1);
        assert_eq!(main_with_args(["ctoqw", "classify"]), 1);
    }

    #[test]
    fn bessel_series() {
        assert!((scalar_return_probability(1.0) - 0.308508322553671).abs() < 1e-15);
        assert_eq!(scalar_return_probability(0.0), 1.0);
    }

    #[test]
    fn verify_suite_passes() {
        let checks = verify_suite();
        for c in &checks {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
        assert!(checks.len() >= 20);
    }
}
