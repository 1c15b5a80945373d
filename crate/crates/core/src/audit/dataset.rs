use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use super::config::{AuditConfig, Comparison};
use crate::error::{Error, Result, RowError, RowErrorKind};
use crate::model::{Allocation, Population};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Id,
    Service(usize),
    Observed,
    Group(usize),
    /// Column not used by the audit, kept verbatim for export.
    Passthrough(usize),
}

/// Validated household records: re-entry probabilities per service, the
/// observed service and binary group columns.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditDataset {
    services: Vec<String>,
    ids: Vec<String>,
    /// Row-major `n x k`.
    probabilities: Vec<f64>,
    observed: Allocation,
    /// Observed values as written in the source (name or 1-based index).
    observed_tokens: Vec<String>,
    group_names: Vec<String>,
    group_values: Vec<Vec<bool>>,
    passthrough: Vec<Vec<String>>,
    header: Vec<String>,
    roles: Vec<Role>,
    delimiter: u8,
}

fn row_error(line: usize, kind: RowErrorKind, message: String) -> RowError {
    RowError { line, kind, message }
}

impl AuditDataset {
    /// Builds a dataset in the canonical column layout
    /// `id, p_<service>..., observed, <groups>...` described by `config`.
    pub fn new(
        config: &AuditConfig,
        ids: Vec<String>,
        probabilities: Vec<f64>,
        observed: Allocation,
        groups: Vec<(String, Vec<bool>)>,
    ) -> Result<Self> {
        let services = config.service_names();
        let (n, k) = (ids.len(), services.len());
        if probabilities.len() != n * k || observed.len() != n {
            return Err(Error::InvalidPopulation("dataset columns have inconsistent lengths".into()));
        }
        if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidPopulation(format!("probability {p} outside [0, 1]")));
        }
        if observed.as_slice().iter().any(|&s| s >= k) {
            return Err(Error::InvalidAllocation("observed service out of range".into()));
        }
        let mut header = vec![config.id_column.clone()];
        let mut roles = vec![Role::Id];
        for (j, s) in config.services.iter().enumerate() {
            header.push(s.column_name());
            roles.push(Role::Service(j));
        }
        header.push(config.observed_column.clone());
        roles.push(Role::Observed);
        let mut group_names = Vec::new();
        let mut group_values = Vec::new();
        for (j, (name, values)) in groups.into_iter().enumerate() {
            if values.len() != n {
                return Err(Error::InvalidPopulation(format!("group column `{name}` has wrong length")));
            }
            header.push(name.clone());
            roles.push(Role::Group(j));
            group_names.push(name);
            group_values.push(values);
        }
        let observed_tokens = observed.as_slice().iter().map(|&s| services[s].clone()).collect();
        Ok(Self {
            services,
            ids,
            probabilities,
            observed,
            observed_tokens,
            group_names,
            group_values,
            passthrough: Vec::new(),
            header,
            roles,
            delimiter: config.delimiter as u8,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn services(&self) -> &[String] {
        &self.services
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Re-entry probability of household `i` under service `k`.
    pub fn probability(&self, i: usize, k: usize) -> f64 {
        self.probabilities[i * self.services.len() + k]
    }

    pub fn observed(&self) -> &Allocation {
        &self.observed
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn group(&self, name: &str) -> Result<&[bool]> {
        self.group_names
            .iter()
            .position(|g| g == name)
            .map(|j| self.group_values[j].as_slice())
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    /// Utilities `u = 1 - p` with every group column as an attribute.
    pub fn population(&self) -> Result<Population<f64>> {
        let groups = self.group_names.iter().cloned().zip(self.group_values.iter().cloned()).collect();
        let utilities = self.probabilities.iter().map(|p| 1.0 - p).collect();
        Population::new(self.len(), self.services.len(), utilities, groups)
    }

    /// Households in either group of `comparison`, with a single attribute
    /// named after the comparison (`true` for group 1), and their observed
    /// services.
    pub fn comparison(&self, comparison: &Comparison) -> Result<(Population<f64>, Allocation)> {
        let (g1, g0) = comparison.parsed()?;
        for column in g1.columns().into_iter().chain(g0.columns()) {
            self.group(column)?;
        }
        let mut indices = Vec::new();
        let mut labels = Vec::new();
        for i in 0..self.len() {
            let lookup = |name: &str| self.group(name).map(|v| v[i]).unwrap_or(false);
            match (g1.eval(&lookup), g0.eval(&lookup)) {
                (true, true) => {
                    return Err(Error::InvalidParameters(format!(
                        "comparison `{}`: household `{}` matches both groups",
                        comparison.name, self.ids[i]
                    )))
                }
                (true, false) | (false, true) => {
                    indices.push(i);
                    labels.push(g1.eval(&lookup));
                }
                (false, false) => {}
            }
        }
        for value in [false, true] {
            if !labels.contains(&value) {
                return Err(Error::EmptyGroup { attribute: comparison.name.clone(), value: value as u8 });
            }
        }
        let base = self.population()?.subset(&indices)?;
        let groups = BTreeMap::from([(comparison.name.clone(), labels)]);
        let pop = Population::new(base.n(), base.k(), base.utilities().to_vec(), groups)?;
        let alloc = Allocation::new(indices.iter().map(|&i| self.observed.service(i)).collect());
        Ok((pop, alloc))
    }

    /// Writes the records back out with the column order and delimiter they
    /// were read with.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::WriterBuilder::new().delimiter(self.delimiter).from_writer(Vec::new());
        writer.write_record(&self.header)?;
        let k = self.services.len();
        for i in 0..self.len() {
            let record = self.roles.iter().map(|role| match *role {
                Role::Id => self.ids[i].clone(),
                Role::Service(j) => self.probabilities[i * k + j].to_string(),
                Role::Observed => self.observed_tokens[i].clone(),
                Role::Group(j) => (self.group_values[j][i] as u8).to_string(),
                Role::Passthrough(j) => self.passthrough[j][i].clone(),
            });
            writer.write_record(record)?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::io("<memory>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Reads and validates `path` against `config`. All row-level problems are
/// collected and returned together.
pub fn ingest_csv(path: &Path, config: &AuditConfig) -> Result<AuditDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, config)
}

pub fn ingest_reader(reader: impl Read, config: &AuditConfig) -> Result<AuditDataset> {
    config.validate()?;
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(config.delimiter as u8)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    if header.iter().all(String::is_empty) {
        return Err(Error::SchemaMismatch("missing header row".into()));
    }
    let mut seen = BTreeSet::new();
    if let Some(dup) = header.iter().find(|h| !seen.insert(h.as_str())) {
        return Err(Error::SchemaMismatch(format!("duplicate column `{dup}`")));
    }
    let position = |name: &str| header.iter().position(|h| h == name);

    let services = config.service_names();
    let service_columns: Vec<String> = config.services.iter().map(|s| s.column_name()).collect();
    let mut required: Vec<String> = vec![config.id_column.clone()];
    required.extend(service_columns.iter().cloned());
    required.push(config.observed_column.clone());
    if let Some(groups) = &config.group_columns {
        required.extend(groups.iter().cloned());
    }
    let missing: Vec<&str> = required.iter().filter(|c| position(c).is_none()).map(String::as_str).collect();
    if !missing.is_empty() {
        return Err(Error::SchemaMismatch(format!("missing column(s): {}", missing.join(", "))));
    }

    let mut roles = Vec::with_capacity(header.len());
    let mut group_names = Vec::new();
    let mut passthrough_count = 0;
    for name in &header {
        let role = if *name == config.id_column {
            Role::Id
        } else if *name == config.observed_column {
            Role::Observed
        } else if let Some(j) = service_columns.iter().position(|c| c == name) {
            Role::Service(j)
        } else if config.group_columns.as_ref().is_none_or(|g| g.contains(name)) {
            group_names.push(name.clone());
            Role::Group(group_names.len() - 1)
        } else {
            passthrough_count += 1;
            Role::Passthrough(passthrough_count - 1)
        };
        roles.push(role);
    }

    let k = services.len();
    let mut ids = Vec::new();
    let mut probabilities = Vec::new();
    let mut observed = Vec::new();
    let mut observed_tokens = Vec::new();
    let mut group_values = vec![Vec::new(); group_names.len()];
    let mut passthrough = vec![Vec::new(); passthrough_count];
    let mut errors = Vec::new();

    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            errors.push(row_error(
                line,
                RowErrorKind::Malformed,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
            continue;
        }
        let mut row_p = vec![0.0; k];
        let mut row_ok = true;
        for (field, role) in record.iter().zip(&roles) {
            match *role {
                Role::Id => ids.push(field.to_string()),
                Role::Service(j) => match field.parse::<f64>() {
                    Ok(p) if (0.0..=1.0).contains(&p) => row_p[j] = p,
                    Ok(p) => {
                        row_ok = false;
                        errors.push(row_error(
                            line,
                            RowErrorKind::RangeViolation,
                            format!("{} = {p} is outside [0, 1]", service_columns[j]),
                        ));
                    }
                    Err(_) => {
                        row_ok = false;
                        errors.push(row_error(
                            line,
                            RowErrorKind::Malformed,
                            format!("{} = `{field}` is not a number", service_columns[j]),
                        ));
                    }
                },
                Role::Observed => {
                    let index = services.iter().position(|s| s == field).or_else(|| {
                        field.parse::<usize>().ok().filter(|&v| (1..=k).contains(&v)).map(|v| v - 1)
                    });
                    match index {
                        Some(s) => observed.push(s),
                        None => {
                            row_ok = false;
                            errors.push(row_error(
                                line,
                                RowErrorKind::LabelViolation,
                                format!("observed service `{field}` is not one of {}", services.join(", ")),
                            ));
                        }
                    }
                    observed_tokens.push(field.to_string());
                }
                Role::Group(j) => match field {
                    "0" => group_values[j].push(false),
                    "1" => group_values[j].push(true),
                    other => {
                        row_ok = false;
                        group_values[j].push(false);
                        errors.push(row_error(
                            line,
                            RowErrorKind::RangeViolation,
                            format!("group column `{}` = `{other}` must be 0 or 1", group_names[j]),
                        ));
                    }
                },
                Role::Passthrough(j) => passthrough[j].push(field.to_string()),
            }
        }
        if row_ok {
            probabilities.extend(row_p);
        }
    }
    if !errors.is_empty() {
        return Err(Error::Rows(errors));
    }
    if ids.is_empty() {
        return Err(Error::SchemaMismatch("no data rows".into()));
    }
    Ok(AuditDataset {
        services,
        ids,
        probabilities,
        observed: Allocation::new(observed),
        observed_tokens,
        group_names,
        group_values,
        passthrough,
        header,
        roles,
        delimiter: config.delimiter as u8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::config::ServiceColumn;

    fn config() -> AuditConfig {
        AuditConfig {
            services: ["TH", "RRH", "ES"].map(|n| ServiceColumn { name: n.into(), column: None }).to_vec(),
            id_column: "id".into(),
            observed_column: "observed".into(),
            delimiter: ',',
            group_columns: None,
            comparisons: vec![Comparison { name: "kids".into(), group1: "children".into(), group0: "!children".into() }],
            fairness_tolerance: None,
        }
    }

    const THREE_ROWS: &str = "id,p_TH,p_RRH,p_ES,observed,children,disability\n\
                              a,0.2,0.3,0.4,TH,0,1\n\
                              b,0.5,0.1,0.6,RRH,1,0\n\
                              c,0.3,0.3,0.2,3,1,1\n";

    #[test]
    fn three_row_fixture() {
        let ds = ingest_reader(THREE_ROWS.as_bytes(), &config()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.observed().as_slice(), &[0, 1, 2]);
        assert_eq!(ds.group_names(), &["children".to_string(), "disability".to_string()]);
        let pop = ds.population().unwrap();
        assert!((pop.utility(1, 1) - 0.9).abs() < 1e-15);
        assert_eq!(ds.to_csv().unwrap(), THREE_ROWS);
    }

    #[test]
    fn range_violation_names_the_line() {
        let text = "id,p_TH,p_RRH,p_ES,observed,children\na,0.2,0.3,0.4,TH,0\nb,1.2,0.1,0.6,RRH,1\n";
        match ingest_reader(text.as_bytes(), &config()) {
            Err(Error::Rows(rows)) => {
                assert_eq!(rows.len(), 1);
                assert_eq!(rows[0].line, 3);
                assert_eq!(rows[0].kind, RowErrorKind::RangeViolation);
                assert!(rows[0].to_string().starts_with("range-violation(line 3)"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn label_and_schema_errors() {
        let text = "id,p_TH,p_RRH,p_ES,observed,children\na,0.2,0.3,0.4,XX,0\nb,0.2,0.3,0.4,4,1\n";
        match ingest_reader(text.as_bytes(), &config()) {
            Err(Error::Rows(rows)) => {
                assert_eq!(rows.iter().map(|r| r.line).collect::<Vec<_>>(), vec![2, 3]);
                assert!(rows.iter().all(|r| r.kind == RowErrorKind::LabelViolation));
            }
            other => panic!("{other:?}"),
        }
        let text = "id,p_TH,p_ES,observed\na,0.2,0.4,TH\n";
        assert!(matches!(ingest_reader(text.as_bytes(), &config()), Err(Error::SchemaMismatch(m)) if m.contains("p_RRH")));
    }

    #[test]
    fn comparison_subsets() {
        let ds = ingest_reader(THREE_ROWS.as_bytes(), &config()).unwrap();
        let (pop, alloc) = ds.comparison(&config().comparisons[0]).unwrap();
        assert_eq!(pop.attribute("kids").unwrap(), &[false, true, true]);
        assert_eq!(alloc.as_slice(), &[0, 1, 2]);
        let narrow = Comparison { name: "x".into(), group1: "children & disability".into(), group0: "!children".into() };
        let (pop, alloc) = ds.comparison(&narrow).unwrap();
        assert_eq!(pop.n(), 2);
        assert_eq!(alloc.as_slice(), &[0, 2]);
        let empty = Comparison { name: "e".into(), group1: "children & !children".into(), group0: "disability".into() };
        assert!(matches!(ds.comparison(&empty), Err(Error::EmptyGroup { value: 1, .. })));
        let both = Comparison { name: "b".into(), group1: "children".into(), group0: "disability".into() };
        assert!(ds.comparison(&both).is_err());
        let unknown = Comparison { name: "u".into(), group1: "veteran".into(), group0: "!veteran".into() };
        assert!(matches!(ds.comparison(&unknown), Err(Error::UnknownAttribute(_))));
    }

    #[test]
    fn semicolon_delimiter_round_trip() {
        let mut cfg = config();
        cfg.delimiter = ';';
        let text = "id;p_TH;p_RRH;p_ES;observed;children\nz;0.25;0.5;1;ES;1\n";
        let ds = ingest_reader(text.as_bytes(), &cfg).unwrap();
        assert_eq!(ds.to_csv().unwrap(), text);
    }
}
