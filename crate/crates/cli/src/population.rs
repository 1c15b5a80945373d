//! Reading populations for `solve`.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fairalloc::PopulationF64;

pub struct PopulationFile {
    pub ids: Vec<String>,
    pub services: Vec<String>,
    pub population: PopulationF64,
    /// Group columns in file order.
    pub group_columns: Vec<String>,
}

/// Parses a CSV with an optional `id` column, `u_<service>` utility columns
/// and 0/1 group columns.
pub fn read_population(path: &Path) -> Result<PopulationFile> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let services: Vec<String> =
        header.iter().filter_map(|h| h.strip_prefix("u_")).map(str::to_string).collect();
    if services.is_empty() {
        bail!(fairalloc::Error::SchemaMismatch("no u_<service> columns".into()));
    }
    let id_col = header.iter().position(|h| h == "id");
    let group_columns: Vec<String> =
        header.iter().filter(|h| *h != "id" && !h.starts_with("u_")).cloned().collect();

    let mut ids = Vec::new();
    let mut utilities = Vec::new();
    let mut groups: Vec<Vec<bool>> = vec![Vec::new(); group_columns.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(row + 2, |p| p.line() as usize);
        ids.push(id_col.map_or_else(|| (row + 1).to_string(), |c| record[c].to_string()));
        let mut g = 0;
        for (h, field) in header.iter().zip(record.iter()) {
            if h.starts_with("u_") {
                let u: f64 = field.parse().with_context(|| format!("line {line}: `{field}` in {h} is not a number"))?;
                utilities.push(u);
            } else if h != "id" {
                groups[g].push(match field {
                    "0" => false,
                    "1" => true,
                    other => bail!("line {line}: group column {h} = `{other}` must be 0 or 1"),
                });
                g += 1;
            }
        }
    }
    if ids.is_empty() {
        bail!(fairalloc::Error::SchemaMismatch("no data rows".into()));
    }
    let map: BTreeMap<String, Vec<bool>> = group_columns.iter().cloned().zip(groups).collect();
    let population = PopulationF64::new(ids.len(), services.len(), utilities, map)?;
    Ok(PopulationFile { ids, services, population, group_columns })
}
