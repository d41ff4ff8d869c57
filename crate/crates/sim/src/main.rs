use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use timris::config::SimConfig;
use timris::sweep::{benchmark_mode, ber_sweep, harvest_sweep, power_budget_report, RunOptions};
use timris::validate::run_checks;
use timris_core::rx::DetectorKind;

#[derive(Parser)]
#[command(
    name = "timris",
    version,
    about = "TIM symbiotic-radio RIS link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Key-value config file; unspecified keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Blocks per grid point.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    detector: Option<Detector>,
    /// Block length and information slots, e.g. `8,2`.
    #[arg(long, global = true, value_name = "K,L")]
    scheme: Option<String>,
    /// Literal detector variants (unscaled power LLR, information-slot-only ML).
    #[arg(long, global = true)]
    paper_compat: bool,
    /// Worker threads; 0 uses all cores. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// BER versus direct-link SNR.
    BerSweep,
    /// Harvested DC power at the RIS and the EH versus absorbing cells.
    HarvestSweep,
    /// RIS power consumption and the standalone margin.
    PowerBudget,
    /// BER sweep with the fixed first-L-slots layout.
    Benchmark,
    /// Run the invariant suite.
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Detector {
    Ml,
    Llr,
}

impl From<Detector> for DetectorKind {
    fn from(d: Detector) -> Self {
        match d {
            Detector::Ml => DetectorKind::Ml,
            Detector::Llr => DetectorKind::Llr,
        }
    }
}

fn parse_scheme(s: &str) -> Result<(usize, usize)> {
    let (k, l) = s.split_once(',').context("--scheme expects K,L")?;
    Ok((k.trim().parse()?, l.trim().parse()?))
}

fn load_config(cli: &Cli) -> Result<SimConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            SimConfig::load(path).with_context(|| format!("reading {}", path.display()))?
        }
        None => SimConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(d) = cli.detector {
        cfg.detector = d.into();
    }
    if let Some(s) = &cli.scheme {
        (cfg.slots, cfg.info_slots) = parse_scheme(s)?;
    }
    cfg.paper_compat |= cli.paper_compat;
    cfg.validate()?;
    Ok(cfg)
}

fn output(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let opts = RunOptions {
        workers: cli.workers,
    };
    let mut out = output(cli)?;
    match cli.command {
        Command::BerSweep => ber_sweep(&cfg, &[cfg.detector], opts)?.write_csv(&mut out)?,
        Command::Benchmark => benchmark_mode(&cfg, &[cfg.detector], opts)?.write_csv(&mut out)?,
        Command::HarvestSweep => {
            let report = harvest_sweep(&cfg, opts)?;
            report.table.write_csv(&mut out)?;
            for (name, (p, n2)) in ["rf-switch", "varactor"]
                .iter()
                .zip(report.p_ris_w.iter().zip(report.min_n2))
            {
                let n2 = n2.map_or_else(|| "none in grid".to_string(), |n| n.to_string());
                eprintln!("{name}: P_RIS = {:.3} mW, min N2 = {n2}", p * 1e3);
            }
            if let (Some(rf), Some(var)) = (report.min_n2[0], report.min_n2[1]) {
                if rf > 0 {
                    eprintln!(
                        "min N2 ratio varactor/rf-switch = {:.2}",
                        var as f64 / rf as f64
                    );
                }
            }
            match report.saturation_n2 {
                Some(n) => eprintln!(
                    "saturation (within 1% of {:.4} mW) from N2 = {n}",
                    report.cap_w * 1e3
                ),
                None => eprintln!("no saturation in grid (cap {:.4} mW)", report.cap_w * 1e3),
            }
        }
        Command::PowerBudget => {
            let r = power_budget_report(&cfg, opts)?;
            writeln!(out, "# config={} seed={}", cfg.hash(), cfg.seed)?;
            writeln!(
                out,
                "p_ris_rf_switch_mw = {:.3}",
                r.budget.rf_switch_w * 1e3
            )?;
            writeln!(out, "p_ris_varactor_mw = {:.3}", r.budget.varactor_w * 1e3)?;
            writeln!(out, "ratio_db = {:.2}", r.budget.ratio_db)?;
            writeln!(out, "n2 = {}", r.n2)?;
            writeln!(
                out,
                "avg_dc_ris_mw = {:.4} +- {:.4}",
                r.avg_dc_uw.mean * 1e-3,
                r.avg_dc_uw.se * 1e-3
            )?;
            writeln!(out, "margin_rf_switch_mw = {:.4}", r.margin_w[0] * 1e3)?;
            writeln!(out, "margin_varactor_mw = {:.4}", r.margin_w[1] * 1e3)?;
            writeln!(out, "standalone_ok_rf_switch = {}", r.standalone_ok[0])?;
            writeln!(out, "standalone_ok_varactor = {}", r.standalone_ok[1])?;
        }
        Command::Validate => {
            let checks = run_checks(&cfg, opts)?;
            let mut ok = true;
            for c in &checks {
                writeln!(
                    out,
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                )?;
                ok &= c.passed;
            }
            out.flush()?;
            return Ok(ok);
        }
    }
    out.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn scheme_flag() {
        assert_eq!(parse_scheme("8, 4").unwrap(), (8, 4));
        assert!(parse_scheme("8").is_err());
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::parse_from([
            "timris",
            "ber-sweep",
            "--seed",
            "9",
            "--scheme",
            "4,2",
            "--detector",
            "ml",
        ]);
        let cfg = load_config(&cli).unwrap();
        assert_eq!((cfg.seed, cfg.slots, cfg.info_slots), (9, 4, 2));
        assert_eq!(cfg.detector, DetectorKind::Ml);
    }
}
