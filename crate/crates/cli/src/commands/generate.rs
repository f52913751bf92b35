use std::path::PathBuf;

use clap::{Args, ValueEnum};
use halp::irrigation::{generate, BenchmarkSpec, Network, Topology};
use serde_json::json;

use crate::error::Result;
use crate::io::{read_json, write_json};
use crate::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Ring,
    RingOfRings,
    Custom,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "ring")]
    pub topology: Family,
    /// Channels for a ring, inner rings for a ring of rings.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Network JSON for `--topology custom`.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Full benchmark spec JSON; replaces the topology flags.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

pub fn family_spec(family: Family, n: usize) -> BenchmarkSpec {
    match family {
        Family::RingOfRings => BenchmarkSpec::ring_of_rings(n),
        _ => BenchmarkSpec::ring(n),
    }
}

pub fn run(args: &GenerateArgs) -> Result<()> {
    let mut spec = match (&args.spec, args.topology) {
        (Some(path), _) => read_json(path)?,
        (None, Family::Custom) => {
            let Some(path) = &args.network else {
                return Err(crate::error::CliError::Misuse("--topology custom needs --network".into()));
            };
            let network: Network = read_json(path)?;
            BenchmarkSpec {
                topology: Topology::Custom { network },
                ..BenchmarkSpec::default()
            }
        }
        (None, family) => family_spec(family, args.n),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let (model, basis) = generate(&spec)?;
    write_json(&args.out_dir.join("model.json"), &model)?;
    write_json(&args.out_dir.join("basis.json"), &basis)?;
    let summary = json!({
        "model": "model.json",
        "basis": "basis.json",
        "state_vars": model.state_vars.len(),
        "action_vars": model.action_vars.len(),
        "basis_functions": basis.basis.len(),
        "basis_ref": basis.fingerprint(),
    });
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&summary).expect("json")),
        Format::Text => println!(
            "wrote {} ({} state, {} action variables) and {} ({} functions)",
            args.out_dir.join("model.json").display(),
            model.state_vars.len(),
            model.action_vars.len(),
            args.out_dir.join("basis.json").display(),
            basis.basis.len()
        ),
    }
    Ok(())
}
