//! Building a sampler config the way the CLI does: defaults, then a JSON
//! document, then dotted overrides. Writes a run directory.

use mixdiff::cli::config::{layered, parse_value};
use mixdiff::cli::{cmd_sample, SamplerConfig};
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let file = json!({"chains": 4, "policy": "res-256", "smoothing": {"threshold": 2.0}});
    let overrides = [("entropy.gamma".to_string(), parse_value("0.5")), ("dims.0".to_string(), parse_value("6"))];
    let cfg: SamplerConfig = layered(Some(file), &overrides)?;
    let out = std::env::temp_dir().join("mixdiff-example-run");
    let manifest = cmd_sample(&cfg, &out)?;
    println!("{} chains written to {}", manifest.outputs.len(), out.display());
    println!("resolved policy: {:?}", manifest.resolved_policy);
    Ok(())
}
