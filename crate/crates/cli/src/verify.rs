//! Built-in verification sweeps over seeded random states.
//!
//! Each suite prints one line per check with the measured worst deviation
//! and its threshold, and reports overall success so the caller can map
//! failures to the exit code.

use anyhow::{bail, Result};

use qtangle::concurrence::{
    convex_roof_sample, mixed_concurrence_sq, pure_concurrence_sq, tilde_overlap_sums,
    wootters_concurrence,
};
use qtangle::optimize::OptimizerConfig;
use qtangle::state::{random_density, random_pure, Bipartition, DensityMatrix, State};
use qtangle::tangle::{ckw_three_tangle, residual_entanglement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Tripartite overlap identity on random pure states.
    Identities,
    /// Monogamy slack of every focus on random pure states.
    Monogamy,
    /// Three-qubit residual against the epsilon-contraction tangle.
    Reduction,
    /// Wootters and convex-roof oracles against the mixed-state bound.
    Oracle,
}

pub struct SuiteRun {
    pub passed: bool,
}

fn line(label: &str, value: f64, threshold: f64, upper: bool) -> bool {
    let ok = if upper {
        value <= threshold
    } else {
        value >= threshold
    };
    println!(
        "  {label}: {value:.3e} ({} {threshold:.0e}) ... {}",
        if upper { "<=" } else { ">=" },
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

pub fn run(suite: Suite, trials: usize, dims: Option<Vec<usize>>, seed: u64) -> Result<SuiteRun> {
    let cfg = OptimizerConfig::default().with_seed(seed);
    let passed = match suite {
        Suite::Identities => {
            let dims = dims.unwrap_or_else(|| vec![2, 2, 2]);
            if dims.len() != 3 {
                bail!("the identities suite needs exactly 3 parties, got dims {dims:?}");
            }
            println!("identities: {trials} random pure states on {dims:?}");
            let mut worst: f64 = 0.0;
            for t in 0..trials as u64 {
                let psi = random_pure(&dims, seed.wrapping_add(t))?;
                worst = worst.max(tilde_overlap_sums(&psi)?.deviation());
            }
            line("max |lhs_AB + lhs_AC - rhs|", worst, 1e-9, true)
        }
        Suite::Monogamy => {
            let dims = dims.unwrap_or_else(|| vec![2, 2, 2, 2]);
            if dims.len() < 3 {
                bail!("the monogamy suite needs at least 3 parties, got dims {dims:?}");
            }
            println!("monogamy: {trials} random pure states on {dims:?}, all foci");
            let mut min_slack = f64::INFINITY;
            for t in 0..trials as u64 {
                let psi = random_pure(&dims, seed.wrapping_add(t))?;
                let report = residual_entanglement(&State::Pure(psi), &cfg)?;
                for focus in &report.foci {
                    min_slack = min_slack.min(focus.tau);
                }
            }
            line("min slack", min_slack, -1e-6, false)
        }
        Suite::Reduction => {
            if let Some(d) = &dims {
                if d != &[2, 2, 2] {
                    bail!("the reduction suite runs on three qubits, got dims {d:?}");
                }
            }
            println!("reduction: {trials} random three-qubit pure states");
            let mut worst_residual: f64 = 0.0;
            let mut worst_paths: f64 = 0.0;
            for t in 0..trials as u64 {
                let psi = random_pure(&[2, 2, 2], seed.wrapping_add(t))?;
                let tangle = ckw_three_tangle(&psi)?;
                let report = residual_entanglement(&State::Pure(psi.clone()), &cfg)?;
                worst_residual = worst_residual.max((report.residual_raw - tangle).abs());

                let bip = Bipartition::new(&[0], psi.dims())?;
                let total = pure_concurrence_sq(&psi, &bip)?;
                let rho = DensityMatrix::from_pure(&psi);
                let c_ab = wootters_concurrence(&rho.partial_trace(&[2])?)?;
                let c_ac = wootters_concurrence(&rho.partial_trace(&[1])?)?;
                worst_paths = worst_paths.max((total - c_ab.powi(2) - c_ac.powi(2) - tangle).abs());
            }
            let a = line("max |residual - tangle|", worst_residual, 1e-6, true);
            let b = line("max dual-path disagreement", worst_paths, 1e-10, true);
            a && b
        }
        Suite::Oracle => {
            let dims = dims.unwrap_or_else(|| vec![2, 2]);
            if dims.len() != 2 {
                bail!("the oracle suite needs exactly 2 parties, got dims {dims:?}");
            }
            println!("oracle: {trials} random mixed states on {dims:?}");
            let mut ok = true;
            if dims == [2, 2] {
                let mut worst: f64 = 0.0;
                for t in 0..trials as u64 {
                    let rho = random_density(&dims, 4, seed.wrapping_add(t))?;
                    let bound = mixed_concurrence_sq(&rho, &cfg)?.value;
                    let wootters_sq = wootters_concurrence(&rho)?.powi(2);
                    worst = worst.max((bound - wootters_sq).abs());
                }
                ok &= line("max |bound - Wootters^2|", worst, 1e-9, true);
            }
            let mut worst_gap = f64::NEG_INFINITY;
            let roof_trials = 500;
            for t in 0..trials as u64 {
                let env = 2 + (t as usize % 3);
                let rho = random_density(&dims, env, seed.wrapping_add(1000 + t))?;
                let bound = mixed_concurrence_sq(&rho, &cfg)?.value;
                let roof = convex_roof_sample(&rho, roof_trials, seed.wrapping_add(t))?;
                worst_gap = worst_gap.max(bound - roof);
            }
            ok &= line("max (bound - sampled roof)", worst_gap, 1e-6, true);
            ok
        }
    };
    println!("suite result: {}", if passed { "PASS" } else { "FAIL" });
    Ok(SuiteRun { passed })
}
