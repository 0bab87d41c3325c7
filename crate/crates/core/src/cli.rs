//! The `kdemand` command-line tool.
//!
//! Exit codes: 0 on success (an equilibrium, a feasible pricing, an accepted
//! verification), 2 on a negative answer, 1 on any error. Errors are a
//! single `error: ` line on stderr.

use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::format::{
    format_allocation, format_prices, format_value, parse_3dm3, parse_3partition,
    parse_allocation, parse_instance, parse_prices, serialize_3dm3, serialize_3partition,
    serialize_instance, serialize_market, InstanceFile, PrngHeader, FORMAT_VERSION,
};
use crate::market::{Market, Pricing};
use crate::pricing::{
    price_allocation, solve_walrasian, verify_we, Constraint, EquilibriumResult,
    FeasibilityResult, LinearSystem, Origin, Rejection, WeVerdict,
};
use crate::reductions::{
    from_3dm3, from_3partition, random_3dm3, random_3partition, random_market, MarketClass,
    ThreeDmReduction, PRNG_TAG,
};
use crate::wd::{dispatch, few_agents_enum, has_applicable_algorithm, solve_with, Algorithm};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "kdemand", version, about = "Exact Walrasian equilibria for k-demand markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find an optimal allocation and prices supporting it, if any exist.
    Solve {
        /// Market file, or `-` for stdin.
        file: PathBuf,
        /// Also print decimal approximations of the prices.
        #[arg(long)]
        decimal: bool,
    },
    /// Find an optimal allocation only.
    Winner {
        file: PathBuf,
        /// Force a specific solver.
        #[arg(long, value_parser = parse_algorithm)]
        algo: Option<Algorithm>,
        /// k for the few-agents enumeration (default: the market's bound).
        #[arg(long, requires = "algo")]
        k: Option<usize>,
    },
    /// Look for prices supporting a given allocation.
    Price {
        file: PathBuf,
        /// `agent:item,item;agent:item`, 1-indexed.
        #[arg(long)]
        allocation: String,
    },
    /// Check whether an allocation and prices form an equilibrium.
    Verify {
        file: PathBuf,
        #[arg(long)]
        allocation: String,
        /// `p1,p2,...` as integers or `num/den`.
        #[arg(long)]
        prices: String,
    },
    /// Write a seeded random instance to stdout.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Turn a raw hardness instance into a market.
    Reduce {
        kind: ReduceKind,
        file: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    seed: u64,
    /// Emit the instance even if no solver fits the default budgets.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct MarketShape {
    #[arg(long)]
    agents: usize,
    #[arg(long)]
    items: usize,
    #[arg(long, default_value_t = 10)]
    max_value: u64,
}

#[derive(Subcommand, Debug)]
enum Family {
    /// Unit-demand agents.
    RandomUd {
        #[command(flatten)]
        shape: MarketShape,
        #[command(flatten)]
        common: Common,
    },
    /// Monotone k-demand tables.
    RandomKdemand {
        #[command(flatten)]
        shape: MarketShape,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// XOS agents.
    RandomXos {
        #[command(flatten)]
        shape: MarketShape,
        #[arg(long, default_value_t = 2)]
        rows: usize,
        #[command(flatten)]
        common: Common,
    },
    /// A 3-bounded 3-dimensional matching instance.
    #[command(name = "3dm3")]
    ThreeDm3 {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        triples: usize,
        /// Plant a perfect matching.
        #[arg(long)]
        planted: bool,
        #[command(flatten)]
        common: Common,
    },
    /// A 3-partition instance.
    #[command(name = "3partition")]
    ThreePartition {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        max_value: u64,
        /// Plant a valid partition.
        #[arg(long)]
        planted: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ReduceKind {
    #[value(name = "3dm3")]
    ThreeDm3,
    #[value(name = "3partition")]
    ThreePartition,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read_input(path: &PathBuf) -> Result<String> {
    let mut text = String::new();
    let read = if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::File::open(path).and_then(|mut f| f.read_to_string(&mut text).map(|_| ()))
    };
    read.map_err(|e| Error::InvalidInstance(format!("cannot read {}: {e}", path.display())))?;
    Ok(text)
}

fn load_market(path: &PathBuf) -> Result<Market> {
    Ok(parse_instance(&read_input(path)?)?.market)
}

/// 1-indexed `{1,3}`.
fn bundle_1(bundle: crate::bundle::ItemSet) -> String {
    let items: Vec<String> = bundle.iter().map(|j| (j + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn describe(c: &Constraint) -> String {
    let origin = match c.origin {
        Origin::AgentBundle { agent, bundle } => {
            format!("agent {} vs bundle {}", agent + 1, bundle_1(bundle))
        }
        Origin::PriceNonNegative { item } => format!("item {} price nonnegative", item + 1),
        Origin::PriceZero { item } => format!("item {} unallocated", item + 1),
        Origin::Other => "other".into(),
    };
    format!("  {c}  # {origin}")
}

fn write_system(out: &mut dyn Write, name: &str, system: &LinearSystem) -> io::Result<()> {
    writeln!(out, "{name} {}", system.len())?;
    for c in system.constraints() {
        writeln!(out, "{}", describe(c))?;
    }
    Ok(())
}

fn write_decimal(out: &mut dyn Write, pricing: &Pricing) -> io::Result<()> {
    let approx: Vec<String> = pricing
        .prices()
        .iter()
        .map(|p| format!("{:.6}", p.to_f64().unwrap_or(f64::NAN)))
        .collect();
    writeln!(out, "prices-decimal {} (approximate)", approx.join(","))
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let message = first.strip_prefix("error: ").unwrap_or(first);
            let _ = writeln!(stderr, "error: {message}");
            return EXIT_ERROR;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(Failure::Domain(e)) => {
            let _ = writeln!(stderr, "error: {}", e.to_string().replace('\n', " "));
            EXIT_ERROR
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: output failed: {e}");
            EXIT_ERROR
        }
    }
}

enum Failure {
    Domain(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn execute(command: Command, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let budgets = Budgets::default();
    match command {
        Command::Solve { file, decimal } => {
            let market = load_market(&file)?;
            let result = solve_walrasian(&market, &budgets)?;
            match &result {
                EquilibriumResult::Equilibrium {
                    allocation,
                    pricing,
                    welfare,
                    algorithm,
                } => {
                    writeln!(out, "algorithm {algorithm}")?;
                    writeln!(out, "allocation {}", format_allocation(allocation))?;
                    writeln!(out, "welfare {welfare}")?;
                    writeln!(out, "prices {}", format_prices(pricing))?;
                    if decimal {
                        write_decimal(out, pricing)?;
                    }
                    writeln!(out, "WE")?;
                    Ok(EXIT_OK)
                }
                EquilibriumResult::NoEquilibrium {
                    allocation,
                    welfare,
                    algorithm,
                    system,
                    witness,
                } => {
                    writeln!(out, "algorithm {algorithm}")?;
                    writeln!(out, "allocation {}", format_allocation(allocation))?;
                    writeln!(out, "welfare {welfare}")?;
                    write_system(out, "system", system)?;
                    write_system(out, "witness", witness)?;
                    writeln!(out, "NO-WE")?;
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Command::Winner { file, algo, k } => {
            let market = load_market(&file)?;
            let result = match (algo, k) {
                (Some(Algorithm::FewAgentsEnum), Some(k)) => few_agents_enum(&market, k, &budgets)?,
                (Some(_), Some(_)) => {
                    return Err(Error::InvalidInstance(
                        "--k only applies to few-agents-enum".into(),
                    )
                    .into())
                }
                (Some(a), None) => solve_with(&market, a, &budgets)?,
                (None, _) => dispatch(&market, &budgets)?,
            };
            writeln!(out, "algorithm {}", result.algorithm)?;
            writeln!(out, "allocation {}", format_allocation(&result.allocation))?;
            writeln!(out, "welfare {}", result.welfare)?;
            Ok(EXIT_OK)
        }
        Command::Price { file, allocation } => {
            let market = load_market(&file)?;
            let allocation =
                parse_allocation(&allocation, market.agent_count(), market.item_count())?;
            let (system, result) = price_allocation(&market, &allocation, &budgets)?;
            writeln!(out, "allocation {}", format_allocation(&allocation))?;
            write_system(out, "system", &system)?;
            match result {
                FeasibilityResult::Feasible(point) => {
                    writeln!(out, "prices {}", format_prices(&Pricing::new(point)?))?;
                    writeln!(out, "feasible")?;
                    Ok(EXIT_OK)
                }
                FeasibilityResult::Infeasible { witness } => {
                    write_system(out, "witness", &witness)?;
                    writeln!(out, "infeasible")?;
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Command::Verify {
            file,
            allocation,
            prices,
        } => {
            let market = load_market(&file)?;
            let allocation =
                parse_allocation(&allocation, market.agent_count(), market.item_count())?;
            let pricing = parse_prices(&prices, market.item_count())?;
            match verify_we(&market, &allocation, &pricing, &budgets)? {
                WeVerdict::Accept => {
                    writeln!(out, "accept")?;
                    Ok(EXIT_OK)
                }
                WeVerdict::Reject(Rejection::UnallocatedPriced { item, price }) => {
                    writeln!(
                        out,
                        "reject item {} unallocated at price {}",
                        item + 1,
                        format_value(&price)
                    )?;
                    Ok(EXIT_NEGATIVE)
                }
                WeVerdict::Reject(Rejection::Envy {
                    agent,
                    bundle,
                    held_utility,
                    better_utility,
                }) => {
                    writeln!(
                        out,
                        "reject agent {} bundle {} utility {} above held {}",
                        agent + 1,
                        bundle_1(bundle),
                        format_value(&better_utility),
                        format_value(&held_utility)
                    )?;
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Command::Generate { family } => generate(family, &budgets, out),
        Command::Reduce { kind, file } => {
            let text = read_input(&file)?;
            let market = match kind {
                ReduceKind::ThreeDm3 => match from_3dm3(&parse_3dm3(&text)?.0)? {
                    ThreeDmReduction::Market(m) => m,
                    ThreeDmReduction::TriviallyUnsatisfiable { element } => {
                        writeln!(out, "unsatisfiable x{} is in no triple", element + 1)?;
                        return Ok(EXIT_NEGATIVE);
                    }
                },
                ReduceKind::ThreePartition => {
                    from_3partition(&parse_3partition(&text)?.0, budgets.bundles)?
                }
            };
            write!(out, "{}", serialize_market(&market))?;
            Ok(EXIT_OK)
        }
    }
}

fn ensure_solvable(market: &Market, force: bool, budgets: &Budgets) -> Result<()> {
    if force || has_applicable_algorithm(market, budgets) {
        Ok(())
    } else {
        Err(Error::InvalidInstance(
            "no solver fits the default budgets for this instance (use --force)".into(),
        ))
    }
}

fn generate(family: Family, budgets: &Budgets, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let header = |seed| {
        Some(PrngHeader {
            tag: PRNG_TAG.to_string(),
            seed,
        })
    };
    let (class, shape, k, common) = match family {
        Family::RandomUd { shape, common } => (MarketClass::UnitDemand, shape, 1, common),
        Family::RandomKdemand { shape, k, common } => (MarketClass::KDemandTable, shape, k, common),
        Family::RandomXos {
            shape,
            rows,
            common,
        } => (MarketClass::Xos, shape, rows, common),
        Family::ThreeDm3 {
            q,
            triples,
            planted,
            common,
        } => {
            let instance = random_3dm3(q, triples, planted, common.seed)?;
            if let ThreeDmReduction::Market(m) = from_3dm3(&instance)? {
                ensure_solvable(&m, common.force, budgets)?;
            }
            write!(out, "{}", serialize_3dm3(&instance, &header(common.seed)))?;
            return Ok(EXIT_OK);
        }
        Family::ThreePartition {
            n,
            max_value,
            planted,
            common,
        } => {
            let instance = random_3partition(n, max_value, planted, common.seed)?;
            if !common.force {
                ensure_solvable(&from_3partition(&instance, budgets.bundles)?, false, budgets)?;
            }
            write!(out, "{}", serialize_3partition(&instance, &header(common.seed)))?;
            return Ok(EXIT_OK);
        }
    };
    let market = random_market(class, shape.agents, shape.items, shape.max_value, k, common.seed)?;
    ensure_solvable(&market, common.force, budgets)?;
    let file = InstanceFile {
        version: FORMAT_VERSION,
        prng: header(common.seed),
        market,
    };
    write!(out, "{}", serialize_instance(&file))?;
    Ok(EXIT_OK)
}
