//! `mep`: construct, verify, catalog and analyze main effect plans.
//!
//! Exit codes: 0 on success, 1 when a plan, dataset or verification step
//! fails, 2 on usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mep::analysis;
use mep::catalog;
use mep::construct;
use mep::ortho;
use mep::plan::MainEffectPlan;

#[derive(Parser)]
#[command(name = "mep", version, about = "main effect plan toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Browse the embedded plan catalog.
    Catalog {
        #[command(subcommand)]
        what: CatalogCommand,
    },
    /// Check a plan document and report all pairwise orthogonality
    /// relations and the induced classes.
    Verify {
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit the orthogonality graph of a plan (DOT by default: solid =
    /// orthogonal, dashed = mutually partial, non-orthogonal pairs unjoined).
    Graph {
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build a plan from a recipe document and write the plan document.
    Construct {
        #[arg(long)]
        recipe: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ANOVA of a dataset against a plan.
    Analyze {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Search for the 16-run ternary seven-factor orthogonal plan and write
    /// it with its verification certificate.
    SearchStark {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for interface stability; the search is canonical and
        /// seed-independent.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// List entries with their tags.
    List {
        /// Comma-separated tag filters: saturated=BOOL,
        /// equal-frequency=BOOL, class-size=N.
        #[arg(long)]
        filter: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print one entry (text shows the array and its graph).
    Show {
        name: String,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn emit(output: &OutputArgs, text: String) -> anyhow::Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Catalog { what } => match what {
            CatalogCommand::List { filter, output } => {
                let filter = parse_filter(filter.as_deref())?;
                let entries = catalog::list(&filter);
                if output.format == Format::Json {
                    let doc: Vec<serde_json::Value> = entries
                        .iter()
                        .map(|e| {
                            serde_json::json!({
                                "name": e.name,
                                "aliases": e.aliases,
                                "signature": e.tags.signature,
                                "runs": e.plan.n(),
                                "factors": e.plan.m(),
                                "saturated": e.tags.saturated,
                                "equal_frequency": e.tags.equal_frequency,
                                "class_size": e.tags.class_size,
                            })
                        })
                        .collect();
                    emit(&output, serde_json::to_string_pretty(&doc)? + "\n")?;
                } else {
                    let mut text = String::new();
                    for e in entries {
                        text.push_str(&format!(
                            "{:16} {:26} {:2} runs, {} factors{}{}\n",
                            e.name,
                            e.tags.signature,
                            e.plan.n(),
                            e.plan.m(),
                            if e.tags.saturated { ", saturated" } else { "" },
                            if e.tags.equal_frequency {
                                ", equal frequency"
                            } else {
                                ""
                            },
                        ));
                    }
                    emit(&output, text)?;
                }
            }
            CatalogCommand::Show { name, output } => {
                let entry = catalog::get(&name)?;
                match output.format {
                    Format::Json => emit(&output, entry.plan.to_json()? + "\n")?,
                    Format::Dot => {
                        let graph = ortho::orthogonality_graph(&entry.plan)?;
                        emit(&output, ortho::graph_to_dot(&entry.plan, &graph))?;
                    }
                    Format::Text => {
                        let mut text = format!("{}", entry.plan);
                        text.push_str(&format!("signature: {}\n", entry.tags.signature));
                        if !entry.notes.is_empty() {
                            text.push_str(&format!("notes: {}\n", entry.notes));
                        }
                        text.push_str(&verify_report(&entry.plan)?);
                        emit(&output, text)?;
                    }
                }
            }
        },
        Command::Verify { plan, output } => {
            let plan = MainEffectPlan::load(&plan)?;
            match output.format {
                Format::Json => {
                    let graph = ortho::orthogonality_graph(&plan)?;
                    let doc = ortho::graph_document(&plan, &graph);
                    emit(&output, serde_json::to_string_pretty(&doc)? + "\n")?;
                }
                _ => emit(&output, verify_report(&plan)?)?,
            }
        }
        Command::Graph { plan, output } => {
            let plan = MainEffectPlan::load(&plan)?;
            let graph = ortho::orthogonality_graph(&plan)?;
            match output.format {
                Format::Json => {
                    let doc = ortho::graph_document(&plan, &graph);
                    emit(&output, serde_json::to_string_pretty(&doc)? + "\n")?;
                }
                _ => emit(&output, ortho::graph_to_dot(&plan, &graph))?,
            }
        }
        Command::Construct { recipe, out } => {
            let text = std::fs::read_to_string(&recipe)?;
            let doc: construct::RecipeDocument = serde_json::from_str(&text)?;
            let dir = recipe
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            let plan = construct::build_from_recipe(&doc, &dir)?;
            match out {
                Some(path) => plan.save(path)?,
                None => println!("{}", plan.to_json()?),
            }
        }
        Command::Analyze { plan, data, output } => {
            let plan = MainEffectPlan::load(&plan)?;
            let text = std::fs::read_to_string(&data)?;
            let y = analysis::parse_dataset(&text, &plan)?;
            let table = analysis::anova(&plan, &y)?;
            match output.format {
                Format::Json => emit(&output, serde_json::to_string_pretty(&table)? + "\n")?,
                _ => emit(&output, table.render_text())?,
            }
        }
        Command::SearchStark { out, seed } => {
            let _ = seed;
            let plan = construct::search_stark()?;
            let asset = construct::certify_stark(&plan)?;
            let text = serde_json::to_string_pretty(&asset)? + "\n";
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn verify_report(plan: &MainEffectPlan) -> anyhow::Result<String> {
    plan.validate()?;
    let graph = ortho::orthogonality_graph(plan)?;
    let mut text = format!(
        "plan {}: {} factors on {} runs{}\n",
        plan.name,
        plan.m(),
        plan.n(),
        if plan.is_saturated() {
            ", saturated"
        } else {
            ""
        }
    );
    for (&(a, b), rel) in &graph.relations {
        let mut line = format!(
            "  {} ~ {}: {}",
            plan.factors[a].name, plan.factors[b].name, rel.kind
        );
        let mut witness = Vec::new();
        for (dir, name_a, name_b) in [
            (
                &rel.a_toward_b,
                &plan.factors[a].name,
                &plan.factors[b].name,
            ),
            (
                &rel.b_toward_a,
                &plan.factors[b].name,
                &plan.factors[a].name,
            ),
        ] {
            if rel.kind == ortho::RelationKind::Orthogonal {
                continue;
            }
            for lv in &dir.level_witnesses {
                witness.push(format!("level {lv} of {name_a} vs {name_b}"));
            }
            for (i, k) in &dir.pair_witnesses {
                witness.push(format!("levels {{{i},{k}}} of {name_a} vs {name_b}"));
            }
        }
        if !witness.is_empty() {
            line.push_str(&format!(" [{}]", witness.join("; ")));
        }
        text.push_str(&line);
        text.push('\n');
    }
    let classes: Vec<String> = graph
        .partition
        .classes
        .iter()
        .map(|c| {
            let names: Vec<&str> = c.iter().map(|&i| plan.factors[i].name.as_str()).collect();
            format!("{{{}}}", names.join(","))
        })
        .collect();
    text.push_str(&format!("classes: {}\n", classes.join(" ")));
    text.push_str(&format!(
        "inter-class({}) orthogonal\n",
        graph.max_class_size
    ));
    Ok(text)
}

fn parse_filter(spec: Option<&str>) -> anyhow::Result<catalog::ListFilter> {
    let mut filter = catalog::ListFilter::default();
    let Some(spec) = spec else {
        return Ok(filter);
    };
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("bad filter clause {part:?}; expected key=value"))?;
        match key.trim() {
            "saturated" => filter.saturated = Some(value.trim().parse()?),
            "equal-frequency" => filter.equal_frequency = Some(value.trim().parse()?),
            "class-size" => filter.class_size = Some(value.trim().parse()?),
            other => anyhow::bail!("unknown filter key {other:?}"),
        }
    }
    Ok(filter)
}
