use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use archcalc::category::compose;
use archcalc::encodings::{torch_fixture, wilkinson_base, wilkinson_star};
use archcalc::format::{self, Document, FormatError, Payload};
use archcalc::graphbridge::{bnc_to_graph, graph_to_bnc, parse_dot_subset, to_dot};
use archcalc::model::{empty_architecture, trivial_architecture};
use archcalc::morphism::{check_homomorphism, find_homomorphism, find_isomorphism, HomFlags, SearchConfig, DEFAULT_NODE_BUDGET};
use archcalc::tiers::{check_tier_partition, elementary_tier, find_max_tiers, max_tiers_by_enumeration, TierConfig, TierError};
use archcalc::views::{is_sub_architecture, restrict_with_notes};
use archcalc::{Architecture, ElementId, MorphismError};

const BUDGET_VAR: &str = "ARCHCALC_SEARCH_BUDGET";

/// Work with formal architecture models stored as .archc files.
#[derive(Parser)]
#[command(name = "archcalc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a document; architectures are checked for every structural code.
    Validate {
        file: PathBuf,
        /// Also write a B&C architecture with one relation as DOT.
        #[arg(long, value_name = "OUT")]
        emit_dot: Option<PathBuf>,
    },
    /// Restrict an architecture to a subset of its elements.
    Restrict {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        elements: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether A is a sub-architecture of B.
    Subarch { a: PathBuf, b: PathBuf },
    /// Check a tier partition or find the maximal tier count.
    Tiers {
        file: PathBuf,
        /// Partition document to check.
        #[arg(long, value_name = "PARTITION")]
        check: Option<PathBuf>,
        /// Report the maximal tier count (the default).
        #[arg(long)]
        max: bool,
        /// Use exhaustive partition enumeration instead of homomorphism search.
        #[arg(long)]
        oracle: bool,
        /// Write the witness partition.
        #[arg(long, value_name = "OUT")]
        witness: Option<PathBuf>,
    },
    /// Search for a homomorphism from A to B.
    Hom {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        kind: HomKind,
        #[arg(long, value_name = "OUT")]
        witness: Option<PathBuf>,
    },
    /// Compose two homomorphisms: H1 first, then H2.
    Compose {
        h1: PathBuf,
        h2: PathBuf,
        #[arg(long, required = true)]
        out: PathBuf,
    },
    /// Convert a DOT digraph into a B&C architecture.
    ImportDot {
        file: PathBuf,
        #[arg(long, required = true)]
        out: PathBuf,
    },
    /// Write a built-in architecture: t0, t1, tn:N, wilkinson, wilkinson-star, torch.
    Fixture {
        name: String,
        #[arg(long, required = true)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct HomKind {
    #[arg(long)]
    surjective: bool,
    #[arg(long)]
    injective: bool,
    #[arg(long)]
    iso: bool,
}

/// Reasons to stop, by exit code.
enum Failure {
    /// The property asked about does not hold.
    Fails(String),
    Usage(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Fails(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Budget(_) => 3,
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<MorphismError> for Failure {
    fn from(e: MorphismError) -> Self {
        match e {
            MorphismError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            MorphismError::NotComposable => Failure::Fails(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<TierError> for Failure {
    fn from(e: TierError) -> Self {
        match e {
            TierError::Search(m) => m.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_doc(path: &Path, doc: &Document) -> Outcome {
    write(path, &format::serialize(doc)?)
}

/// Document name derived from a file name.
fn doc_name(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let name: String = stem.chars().map(|c| if format::is_token(&c.to_string()) { c } else { '_' }).collect();
    if name.is_empty() {
        "out".into()
    } else {
        name
    }
}

fn load_arch(path: &Path) -> Result<Architecture, Failure> {
    Ok(format::parse_architecture(&read(path)?)?.1)
}

fn search_config() -> Result<SearchConfig, Failure> {
    match std::env::var(BUDGET_VAR) {
        Err(_) => Ok(SearchConfig::with_budget(DEFAULT_NODE_BUDGET)),
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(n) if n > 0 => Ok(SearchConfig::with_budget(n)),
            _ => Err(Failure::Usage(format!("{BUDGET_VAR} must be a positive integer, got {v:?}"))),
        },
    }
}

fn validate(file: &Path, emit_dot: Option<&Path>) -> Outcome {
    let text = read(file)?;
    let is_arch = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l == "arch" || l.starts_with("arch "));
    if !is_arch {
        let doc = format::parse(&text)?;
        if let Payload::Homomorphism(h) = &doc.payload {
            let report = check_homomorphism(h);
            if !report.is_empty() {
                println!("{report}");
                return Err(Failure::Fails(format!("{} is not a homomorphism", doc.name)));
            }
        }
        println!("valid {}", doc.kind().keyword());
        return Ok(());
    }
    let (name, arch) = format::parse_architecture_unchecked(&text)?;
    let report = arch.validate();
    if !report.is_empty() {
        println!("{report}");
        return Err(Failure::Fails(format!("{name}: {} violation(s)", report.len())));
    }
    println!("valid");
    if let Some(out) = emit_dot {
        let graph = bnc_to_graph(&arch).map_err(|e| Failure::Fails(e.to_string()))?;
        write(out, &to_dot(&graph, &name))?;
    }
    Ok(())
}

fn restrict_cmd(file: &Path, elements: &[String], out: Option<&Path>) -> Outcome {
    let arch = load_arch(file)?;
    let subset = elements
        .iter()
        .map(|e| ElementId::new(e.trim()).map_err(|err| Failure::Usage(err.to_string())))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let (sub, notes) = restrict_with_notes(&arch, &subset).map_err(|e| Failure::Usage(e.to_string()))?;
    println!(
        "restricted to {} elements, {} relations, {} functions",
        sub.len(),
        sub.relations.len(),
        sub.functions.len()
    );
    for n in &notes {
        println!("note: {n}");
    }
    if let Some(out) = out {
        write_doc(out, &Document::architecture(doc_name(out), sub))?;
    }
    Ok(())
}

fn subarch(a: &Path, b: &Path) -> Outcome {
    let (x, y) = (load_arch(a)?, load_arch(b)?);
    if is_sub_architecture(&x, &y) {
        println!("{} is a sub-architecture of {}", a.display(), b.display());
        Ok(())
    } else {
        Err(Failure::Fails(format!("{} is not a sub-architecture of {}", a.display(), b.display())))
    }
}

fn tiers(file: &Path, check: Option<&Path>, max: bool, oracle: bool, witness: Option<&Path>) -> Outcome {
    let arch = load_arch(file)?;
    if let Some(p) = check {
        let partition = format::parse(&read(p)?)?
            .into_partition()
            .ok_or_else(|| Failure::Usage(format!("{} is not a partition document", p.display())))?;
        if !check_tier_partition(&arch, &partition)? {
            return Err(Failure::Fails(format!("not a {}-tier partition", partition.len())));
        }
        println!("valid {}-tier partition", partition.len());
        if !max && !oracle {
            return Ok(());
        }
    }
    let config = TierConfig { search: search_config()?, ..TierConfig::default() };
    let found = if oracle { max_tiers_by_enumeration(&arch, &config)? } else { find_max_tiers(&arch, &config)? };
    println!("max tiers: {}", found.tiers);
    print!("{}", found.witness);
    if let Some(out) = witness {
        write_doc(out, &Document::new(doc_name(out), Payload::Partition(found.witness)))?;
    }
    Ok(())
}

fn hom(a: &Path, b: &Path, kind: &HomKind, witness: Option<&Path>) -> Outcome {
    let (x, y) = (load_arch(a)?, load_arch(b)?);
    let config = search_config()?;
    let (label, found) = if kind.iso {
        ("isomorphism", find_isomorphism(&x, &y, &config)?)
    } else if kind.surjective {
        ("surjective homomorphism", find_homomorphism(&x, &y, HomFlags::SURJECTIVE, &config)?)
    } else if kind.injective {
        ("injective homomorphism", find_homomorphism(&x, &y, HomFlags::INJECTIVE, &config)?)
    } else {
        ("homomorphism", find_homomorphism(&x, &y, HomFlags::ANY, &config)?)
    };
    let Some(h) = found else {
        return Err(Failure::Fails(format!("no {label}")));
    };
    println!("found {label}");
    print!("{h}");
    if let Some(out) = witness {
        write_doc(out, &Document::new(doc_name(out), Payload::Homomorphism(h)))?;
    }
    Ok(())
}

fn load_hom(path: &Path) -> Result<archcalc::Homomorphism, Failure> {
    format::parse(&read(path)?)?
        .into_homomorphism()
        .ok_or_else(|| Failure::Usage(format!("{} is not a homomorphism document", path.display())))
}

fn compose_cmd(h1: &Path, h2: &Path, out: &Path) -> Outcome {
    let (f, g) = (load_hom(h1)?, load_hom(h2)?);
    let gf = compose(&g, &f)?;
    let report = check_homomorphism(&gf);
    if report.is_empty() {
        println!("composite is a homomorphism");
    } else {
        println!("{report}");
    }
    write_doc(out, &Document::new(doc_name(out), Payload::Homomorphism(gf)))?;
    if report.is_empty() {
        Ok(())
    } else {
        Err(Failure::Fails("composite is not a homomorphism".into()))
    }
}

fn import_dot(file: &Path, out: &Path) -> Outcome {
    let graph = parse_dot_subset(&read(file)?).map_err(|e| Failure::Usage(e.to_string()))?;
    let arch = graph_to_bnc(&graph);
    println!("imported {} vertices, {} edges", graph.vertices().len(), graph.edges().len());
    write_doc(out, &Document::architecture(doc_name(out), arch))
}

fn fixture(name: &str, out: &Path) -> Outcome {
    let arch = match name {
        "t0" => empty_architecture(),
        "t1" => trivial_architecture(),
        "wilkinson" => wilkinson_base(),
        "wilkinson-star" => wilkinson_star(),
        "torch" => torch_fixture(),
        other => match other.strip_prefix("tn:").map(str::parse::<usize>) {
            Some(Ok(n)) if n > 0 => elementary_tier(n),
            _ => return Err(Failure::Usage(format!("unknown fixture {other:?}"))),
        },
    };
    let doc_name = name.replace(':', "");
    write_doc(out, &Document::architecture(doc_name, arch))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { file, emit_dot } => validate(&file, emit_dot.as_deref()),
        Command::Restrict { file, elements, out } => restrict_cmd(&file, &elements, out.as_deref()),
        Command::Subarch { a, b } => subarch(&a, &b),
        Command::Tiers { file, check, max, oracle, witness } => {
            tiers(&file, check.as_deref(), max, oracle, witness.as_deref())
        }
        Command::Hom { a, b, kind, witness } => hom(&a, &b, &kind, witness.as_deref()),
        Command::Compose { h1, h2, out } => compose_cmd(&h1, &h2, &out),
        Command::ImportDot { file, out } => import_dot(&file, &out),
        Command::Fixture { name, out } => fixture(&name, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Fails(msg) => println!("{msg}"),
                Failure::Usage(msg) | Failure::Budget(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}
