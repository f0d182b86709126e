//! Command-line laboratory.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a certification verdict failed,
//! 4 inconclusive. Reports go to standard output; logs to standard error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use outerlab::contracting::{axis_quality, contracting_certify};
use outerlab::error::Error;
use outerlab::graph::{barbell, rational_from_string, rational_to_string, rose, theta, MarkedGraph};
use outerlab::lab::{
    axis_csv, catalog_pair, orbit_csv, orbit_qi_experiment, render_orbit_report, schottky_build,
    ExperimentConfig, FreenessVerdict,
};
use outerlab::laminations::{iwip_laminations, IwipAxisSpec, RationalLamination};
use outerlab::minima::{line_of_minima, min_search, LineOfMinima};
use outerlab::words::ConjClass;
use outerlab::{Rational, Result};

#[derive(Parser)]
#[command(name = "outerlab", version, about = "Lipschitz geometry of Outer space")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Symmetrized Lipschitz distance between two marked graphs
    Dist {
        /// source: JSON file, or rose:L1,L2[,L3] / theta:... / barbell:...
        s: String,
        /// target, same formats
        t: String,
    },
    /// Candidate loops of a marked graph with exact lengths
    Candidates { t: String },
    /// Minimize a weighted length function over Outer space
    Min {
        /// weighted classes, e.g. "a:1,b:1" or "abAB:2"
        classes: String,
        #[arg(long, default_value = "1/20")]
        eps: String,
        #[arg(long, default_value_t = 2)]
        rank: u8,
    },
    /// Compute a line of minima from a catalog config
    Axis {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Certify the B-contracting conditions and axis quality
    ContractTest { config: PathBuf },
    /// Synthetic Morse test on the configured axis
    MorseTest {
        config: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        #[arg(long, default_value_t = 100)]
        budget: usize,
    },
    /// Shadow of a tree in the free factor graph
    Shadow { t: String },
    /// Primitivity certificate for a conjugacy class
    Primitive {
        word: String,
        #[arg(long, default_value_t = 2)]
        rank: u8,
    },
    /// Common proper free factor of a collection of classes
    CommonFactor {
        words: Vec<String>,
        #[arg(long, default_value_t = 2)]
        rank: u8,
    },
    /// Build the catalog Schottky spec and report the freeness verdict
    Schottky { config: PathBuf },
    /// Orbit quasi-isometry experiment for the catalog Schottky spec
    Orbit {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_graph(arg: &str) -> Result<MarkedGraph> {
    if let Some(spec) = arg.strip_prefix("rose:") {
        return rose(parse_lengths(spec)?.len() as u8, parse_lengths(spec)?);
    }
    if let Some(spec) = arg.strip_prefix("theta:") {
        return theta(three(parse_lengths(spec)?)?);
    }
    if let Some(spec) = arg.strip_prefix("barbell:") {
        return barbell(three(parse_lengths(spec)?)?);
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| Error::invalid(format!("cannot read {arg}: {e}")))?;
    MarkedGraph::from_json(&text)
}

fn parse_lengths(spec: &str) -> Result<Vec<Rational>> {
    spec.split(',').map(|s| rational_from_string(s.trim())).collect()
}

fn three(v: Vec<Rational>) -> Result<[Rational; 3]> {
    v.try_into()
        .map_err(|_| Error::invalid("expected exactly three lengths"))
}

fn parse_lamination(spec: &str, rank: u8) -> Result<RationalLamination> {
    let mut support = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let (word, weight) = match part.split_once(':') {
            Some((w, c)) => (w, rational_from_string(c)?),
            None => (part, outerlab::ratio(1, 1)),
        };
        support.push((ConjClass::parse(word, rank)?, weight));
    }
    RationalLamination::new(support, rank)
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_text(&text)
}

/// The configured axis: catalog automorphism pair at the config's rank,
/// seeded at `a`, approximated at the config depth.
fn build_axis(cfg: &ExperimentConfig) -> Result<(RationalLamination, RationalLamination, LineOfMinima)> {
    let (phi, _) = catalog_pair(cfg.rank)?;
    let spec = IwipAxisSpec::new(phi, ConjClass::parse("a", cfg.rank)?, cfg.depth)?;
    let (mu, nu) = iwip_laminations(&spec)?;
    eprintln!("axis: depth {} support lengths {:?}", cfg.depth, (mu.support()[0].0.len(), nu.support()[0].0.len()));
    let gamma = line_of_minima(&mu, &nu, &cfg.eps, &cfg.grid)?;
    Ok((mu, nu, gamma))
}

fn write_out(path: &Option<PathBuf>, content: &str) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, content).map_err(|e| Error::invalid(format!("write {}: {e}", p.display())))?;
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Dist { s, t } => {
            let (s, t) = (parse_graph(&s)?, parse_graph(&t)?);
            let d = outerlab::lipschitz::sym_distance(&s, &t)?;
            println!("forward = {}", rational_to_string(&d.forward.value));
            println!("forward_witness = {}", d.forward.witness);
            println!("backward = {}", rational_to_string(&d.backward.value));
            println!("backward_witness = {}", d.backward.witness);
            println!("exp_d = {}", rational_to_string(&d.exp_value()));
            println!("d = {}", d.log());
            Ok(0)
        }
        Cmd::Candidates { t } => {
            let t = parse_graph(&t)?;
            let cands = outerlab::candidates::candidates(&t);
            for (c, tag) in &cands.loops {
                println!(
                    "{c}\t{:?}\tlength = {}",
                    tag,
                    rational_to_string(&t.translation_length(c)?)
                );
            }
            Ok(0)
        }
        Cmd::Min { classes, eps, rank } => {
            let mu = parse_lamination(&classes, rank)?;
            let eps = rational_from_string(&eps)?;
            let (g, v) = min_search(&mu, &eps, &outerlab::graph::standard_rose(rank))?;
            println!("min_value = {}", rational_to_string(&v));
            println!("{}", g.to_json());
            Ok(0)
        }
        Cmd::Axis { config, csv } => {
            let cfg = load_config(&config)?;
            let (_, _, gamma) = build_axis(&cfg)?;
            println!("# line of minima");
            println!("config_hash = {}", cfg.hash());
            print!("{}", cfg.to_text());
            println!("kappa_emp = {:.6}", gamma.kappa_emp);
            println!("positivity_warning = {}", gamma.positivity_warning);
            write_out(&csv, &axis_csv(&gamma))?;
            if csv.is_none() {
                print!("{}", axis_csv(&gamma));
            }
            Ok(0)
        }
        Cmd::ContractTest { config } => {
            let cfg = load_config(&config)?;
            let (mu, nu, gamma) = build_axis(&cfg)?;
            let rep = contracting_certify(&mu, &nu, &cfg.b, &cfg.eps, cfg.samples, cfg.seed)?;
            let quality = axis_quality(&gamma, cfg.samples, cfg.seed)?;
            println!("# contracting certification");
            println!("config_hash = {}", cfg.hash());
            print!("{}", cfg.to_text());
            for (name, item) in [("item1", &rep.item1), ("item2", &rep.item2), ("item3", &rep.item3)] {
                println!(
                    "{name}: passed = {} checked = {} min_margin = {:?}",
                    item.passed, item.checked,
                    item.min_margin.as_ref().map(rational_to_string)
                );
                if let Some(w) = &item.witness {
                    println!("{name}_witness = {w}");
                }
            }
            println!("kappa_emp = {:.6}", quality.kappa_emp);
            println!("kappa_required = {:.6}", quality.kappa_required);
            println!(
                "violations = {}/{}/{} over {} checked pairs",
                quality.item1_violations, quality.item2_violations, quality.item3_violations,
                quality.pairs_checked
            );
            Ok(if rep.all_passed() && quality.violation_free() { 0 } else { 3 })
        }
        Cmd::MorseTest { config, k, budget } => {
            let cfg = load_config(&config)?;
            let (_, _, gamma) = build_axis(&cfg)?;
            let rep = outerlab::morse::morse_test(&gamma, k, budget, cfg.seed)?;
            println!("# morse test");
            println!("config_hash = {}", cfg.hash());
            println!("K = {k}");
            println!("chains = {}/{} certified", rep.chains_certified, rep.chains_generated);
            println!("M_emp = {:.6}", rep.m_emp);
            Ok(match rep.verdict {
                outerlab::morse::MorseVerdict::Measured => 0,
                outerlab::morse::MorseVerdict::Inconclusive => 4,
            })
        }
        Cmd::Shadow { t } => {
            let t = parse_graph(&t)?;
            let s = outerlab::factorgraph::upsilon(&t)?;
            println!("class = {}", s.class);
            println!("factor = <{}>", s.vertex.generators[0]);
            println!("truncated = {}", s.truncated);
            for (c, prim) in &s.trace {
                println!("skipped = {c} (primitive = {prim})");
            }
            Ok(0)
        }
        Cmd::Primitive { word, rank } => {
            let c = ConjClass::parse(&word, rank)?;
            match outerlab::whitehead::is_primitive(&c)? {
                Some(cert) => {
                    let basis: Vec<String> =
                        cert.basis().iter().map(|w| w.to_string()).collect();
                    println!("primitive = true");
                    println!("basis = {{{}}}", basis.join(", "));
                    Ok(0)
                }
                None => {
                    println!("primitive = false");
                    Ok(3)
                }
            }
        }
        Cmd::CommonFactor { words, rank } => {
            if words.is_empty() {
                return Err(Error::invalid("at least one word required"));
            }
            let classes: Vec<ConjClass> = words
                .iter()
                .map(|w| ConjClass::parse(w, rank))
                .collect::<Result<_>>()?;
            match outerlab::whitehead::common_proper_factor(&classes)? {
                outerlab::whitehead::FactorVerdict::Contained { factor } => {
                    let basis: Vec<String> = factor.iter().map(|w| w.to_string()).collect();
                    println!("verdict = contained");
                    println!("factor = <{}>", basis.join(", "));
                    Ok(0)
                }
                outerlab::whitehead::FactorVerdict::Fills => {
                    println!("verdict = fills");
                    Ok(0)
                }
                outerlab::whitehead::FactorVerdict::Inconclusive => {
                    println!("verdict = inconclusive");
                    Ok(4)
                }
            }
        }
        Cmd::Schottky { config } => {
            let cfg = load_config(&config)?;
            let (phi, psi) = catalog_pair(cfg.rank)?;
            let spec = schottky_build(&phi, &psi, cfg.k, cfg.l_free)?;
            println!("# schottky build");
            println!("config_hash = {}", cfg.hash());
            print!("{}", cfg.to_text());
            match &spec.freeness {
                FreenessVerdict::FreeUpTo { bound } => {
                    println!("freeness = free-at-(k={}, L={bound})", spec.k);
                    Ok(0)
                }
                FreenessVerdict::Relation { word } => {
                    println!(
                        "freeness = relation {}",
                        outerlab::lab::gen_word_to_string(word)
                    );
                    Ok(3)
                }
            }
        }
        Cmd::Orbit { config, csv } => {
            let cfg = load_config(&config)?;
            let (phi, psi) = catalog_pair(cfg.rank)?;
            let spec = schottky_build(&phi, &psi, cfg.k, cfg.l_free)?;
            let t = outerlab::graph::standard_rose(cfg.rank);
            let rep = orbit_qi_experiment(&spec, &t, cfg.l_orbit, 3)?;
            print!("{}", render_orbit_report(&cfg, &spec, &rep));
            write_out(&csv, &orbit_csv(&rep))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Inconclusive(_) => 4,
                _ => 2,
            })
        }
    }
}
