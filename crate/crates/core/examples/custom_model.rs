//! Loads a model from JSON, edits it, and re-runs the enumeration through the CLI layer.

use clap::Parser;
use sft_lab::cli::{execute, Cli};
use sft_lab::model::{load, reference};

fn main() {
    let mut config = reference().config;
    config.name = "edited copy".into();
    let text = serde_json::to_string_pretty(&config).unwrap();
    let model = load(&text).unwrap();
    println!("loaded {} with {} orbits", model.config.name, model.orbits.len());

    let path = std::env::temp_dir().join("sft-lab-custom-model.json");
    std::fs::write(&path, text).unwrap();
    let cli = Cli::parse_from(["sft-lab", "--config", path.to_str().unwrap(), "enumerate", "--genus", "0", "--ends", "2"]);
    let doc: serde_json::Value = serde_json::from_str(&execute(&cli).unwrap()).unwrap();
    println!("{}", doc["summary"]);
    println!("config digest {}", doc["config_digest"]);
}
