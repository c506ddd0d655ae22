use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use schemars::schema::RootSchema;
use schemars::schema_for;
use slabroker_core::monitoring::ComplianceReport;
use slabroker_core::sla::{Sla, SlaRequestDoc};

use crate::output;
use crate::select::SelectionReport;

#[derive(clap::Args)]
pub struct SchemaArgs {
    /// Write one `<name>.schema.json` per document into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn schemas() -> BTreeMap<&'static str, RootSchema> {
    BTreeMap::from([
        ("sla-request", schema_for!(SlaRequestDoc)),
        ("sla", schema_for!(Sla)),
        ("compliance-report", schema_for!(ComplianceReport)),
        ("selection-report", schema_for!(SelectionReport)),
    ])
}

pub fn run(args: SchemaArgs) -> Result<()> {
    let all = schemas();
    match args.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, schema) in &all {
                let path = dir.join(format!("{name}.schema.json"));
                std::fs::write(&path, output::json(schema)?).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
        None => output::emit(None, &output::json(&all)?),
    }
}
