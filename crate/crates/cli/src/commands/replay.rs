use std::path::PathBuf;

use clap::Args;

use crate::output::RunManifest;
use crate::{command_from_manifest, run_command, CliError, CliResult, Outcome};

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    /// A `manifest.json` written by an earlier run.
    pub manifest: PathBuf,
    /// Directory for the regenerated outputs.
    #[arg(long)]
    pub out: PathBuf,
}

/// Re-runs the recorded command and passes iff every output digest,
/// the manifest itself included, matches.
pub fn run(args: &ReplayArgs, workers: Option<usize>) -> CliResult<Outcome> {
    let recorded = RunManifest::load(&args.manifest)?;
    let command = command_from_manifest(&recorded, args.out.clone())?;
    let inner = run_command(command, workers)?;
    let fresh = inner
        .manifest
        .clone()
        .ok_or_else(|| CliError::Usage("replayed command wrote no manifest".into()))?;

    let mut mismatched: Vec<String> = recorded
        .outputs
        .iter()
        .filter(|(name, digest)| fresh.outputs.get(*name) != Some(digest))
        .map(|(name, _)| name.clone())
        .collect();
    mismatched.extend(fresh.outputs.keys().filter(|k| !recorded.outputs.contains_key(*k)).cloned());
    if fresh != recorded {
        mismatched.push(crate::MANIFEST_FILE.to_string());
    }
    mismatched.sort();
    mismatched.dedup();

    let passed = mismatched.is_empty();
    let mut lines = inner.lines;
    lines.push(if passed {
        format!("replay: {} outputs byte-identical to {}", fresh.outputs.len(), args.manifest.display())
    } else {
        format!("replay: outputs differ from {}: {}", args.manifest.display(), mismatched.join(", "))
    });
    Ok(Outcome {
        passed,
        lines,
        manifest: Some(fresh),
    })
}
