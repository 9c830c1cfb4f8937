//! CSV ingestion and writing.
//!
//! Dialect: comma separated, UTF-8, first row is the header, no quoting.
//! Fields are trimmed of surrounding whitespace; embedded commas are
//! rejected by construction (they change the field count).

use std::path::Path;

use super::CliError;
use crate::balance::{Dataset, Sample};
use crate::matchbal::DistanceMatrix;

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text.lines().map(str::to_string).collect())
}

fn split_row(line: &str) -> Vec<String> {
    line.split(',').map(|f| f.trim().to_string()).collect()
}

fn column(header: &[String], name: &str) -> Result<usize, CliError> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::MissingColumn {
            name: name.to_string(),
        })
}

/// Reads a dataset CSV with `id`, `group`, and the named covariate columns.
/// Row order is preserved; row numbers in errors are 1-based including the
/// header.
pub fn ingest_csv(path: &Path, covariates: &[String]) -> Result<Dataset, CliError> {
    let lines = read_lines(path)?;
    let header = split_row(lines.first().map(String::as_str).unwrap_or(""));
    let id_col = column(&header, "id")?;
    let group_col = column(&header, "group")?;
    let covariate_cols = covariates
        .iter()
        .map(|name| column(&header, name))
        .collect::<Result<Vec<_>, _>>()?;

    let mut treatment: Vec<Sample> = Vec::new();
    let mut control: Vec<Sample> = Vec::new();
    for (offset, line) in lines.iter().enumerate().skip(1) {
        let row = offset + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_row(line);
        if fields.len() != header.len() {
            return Err(CliError::WrongFieldCount {
                row,
                expected: header.len(),
                found: fields.len(),
            });
        }
        let id = fields[id_col].clone();
        let labels: Vec<String> = covariate_cols.iter().map(|&c| fields[c].clone()).collect();
        let bucket = match fields[group_col].as_str() {
            "treatment" => &mut treatment,
            "control" => &mut control,
            other => {
                return Err(CliError::BadGroupValue {
                    row,
                    value: other.to_string(),
                })
            }
        };
        if bucket.iter().any(|s| s.id == id) {
            return Err(CliError::DuplicateId { row, id });
        }
        bucket.push(Sample::new(id, labels));
    }
    if treatment.is_empty() {
        return Err(CliError::EmptyTreatment);
    }
    Ok(Dataset::new(covariates.len(), treatment, control)?)
}

/// Writes a dataset as CSV with covariate columns named c1..cP.
pub fn write_dataset_csv(path: &Path, dataset: &Dataset) -> Result<(), CliError> {
    let mut out = String::from("id,group");
    for p in 1..=dataset.covariate_count() {
        out.push_str(&format!(",c{p}"));
    }
    out.push('\n');
    for (group, samples) in [("treatment", dataset.treatment()), ("control", dataset.control())] {
        for sample in samples {
            out.push_str(&sample.id);
            out.push(',');
            out.push_str(group);
            for label in &sample.labels {
                out.push(',');
                out.push_str(label);
            }
            out.push('\n');
        }
    }
    std::fs::write(path, out).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a distance CSV: header row of control ids, then one row per
/// treatment id. Ids must cover the dataset exactly; the returned matrix is
/// aligned to dataset row order.
pub fn read_distance_csv(path: &Path, dataset: &Dataset) -> Result<DistanceMatrix, CliError> {
    let lines = read_lines(path)?;
    let header = split_row(lines.first().map(String::as_str).unwrap_or(""));
    if header.len() != dataset.control().len() + 1 {
        return Err(CliError::BadDistanceMatrix(format!(
            "header has {} control column(s), expected {}",
            header.len().saturating_sub(1),
            dataset.control().len()
        )));
    }
    let mut control_slot = vec![usize::MAX; header.len() - 1];
    for (pos, id) in header.iter().skip(1).enumerate() {
        match dataset.control().iter().position(|s| &s.id == id) {
            Some(j) => control_slot[pos] = j,
            None => {
                return Err(CliError::BadDistanceMatrix(format!(
                    "unknown control id {id:?} in header"
                )))
            }
        }
    }
    {
        let mut sorted = control_slot.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != dataset.control().len() {
            return Err(CliError::BadDistanceMatrix(
                "control ids in header are not distinct".to_string(),
            ));
        }
    }

    let n = dataset.treatment().len();
    let n_prime = dataset.control().len();
    let mut values = vec![0i64; n * n_prime];
    let mut row_seen = vec![false; n];
    let mut seen_rows = 0;
    for (offset, line) in lines.iter().enumerate().skip(1) {
        let row = offset + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_row(line);
        if fields.len() != header.len() {
            return Err(CliError::WrongFieldCount {
                row,
                expected: header.len(),
                found: fields.len(),
            });
        }
        let t = dataset
            .treatment()
            .iter()
            .position(|s| s.id == fields[0])
            .ok_or_else(|| {
                CliError::BadDistanceMatrix(format!(
                    "row {row}: unknown treatment id {:?}",
                    fields[0]
                ))
            })?;
        if row_seen[t] {
            return Err(CliError::BadDistanceMatrix(format!(
                "row {row}: treatment id {:?} listed twice",
                fields[0]
            )));
        }
        row_seen[t] = true;
        for (pos, field) in fields.iter().skip(1).enumerate() {
            let value: i64 = field.parse().map_err(|_| CliError::BadValue {
                row,
                message: format!("bad distance {field:?}"),
            })?;
            values[t * n_prime + control_slot[pos]] = value;
        }
        seen_rows += 1;
    }
    if seen_rows != n {
        return Err(CliError::BadDistanceMatrix(format!(
            "found {seen_rows} treatment row(s), expected {n}"
        )));
    }
    Ok(DistanceMatrix::new(n, n_prime, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    const INSTANCE_A: &str = "\
id,group,c1,c2
t1,treatment,a,x
t2,treatment,a,y
t3,treatment,b,y
c1,control,a,x
c2,control,a,y
c3,control,b,x
c4,control,b,y
";

    fn cov() -> Vec<String> {
        vec!["c1".to_string(), "c2".to_string()]
    }

    #[test]
    fn ingests_instance_a_fixture() {
        let file = write_temp(INSTANCE_A);
        let ds = ingest_csv(file.path(), &cov()).unwrap();
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.n_prime(), 4);
        assert_eq!(ds.treatment()[0].labels, vec!["a", "x"]);
    }

    #[test]
    fn rejects_wrong_case_group() {
        let file = write_temp("id,group,c1,c2\nt1,treatment,a,x\nc9,Control,a,x\n");
        let err = ingest_csv(file.path(), &cov()).unwrap_err();
        assert!(matches!(err, CliError::BadGroupValue { row: 3, .. }));
    }

    #[test]
    fn rejects_duplicate_control_id() {
        let file =
            write_temp("id,group,c1,c2\nt1,treatment,a,x\nc1,control,a,x\nc1,control,b,y\n");
        let err = ingest_csv(file.path(), &cov()).unwrap_err();
        assert!(matches!(err, CliError::DuplicateId { row: 4, .. }));
    }

    #[test]
    fn rejects_missing_column_and_embedded_commas() {
        let file = write_temp("id,group,c1\nt1,treatment,a\n");
        assert!(matches!(
            ingest_csv(file.path(), &cov()),
            Err(CliError::MissingColumn { .. })
        ));
        let file = write_temp("id,group,c1,c2\nt1,treatment,a,x,extra\n");
        assert!(matches!(
            ingest_csv(file.path(), &cov()),
            Err(CliError::WrongFieldCount { row: 2, .. })
        ));
    }

    #[test]
    fn trims_whitespace() {
        let file = write_temp("id,group,c1,c2\n t1 , treatment , a , x \nc1,control,a,x\n");
        let ds = ingest_csv(file.path(), &cov()).unwrap();
        assert_eq!(ds.treatment()[0].id, "t1");
        assert_eq!(ds.treatment()[0].labels, vec!["a", "x"]);
    }

    #[test]
    fn dataset_csv_round_trips() {
        let file = write_temp(INSTANCE_A);
        let ds = ingest_csv(file.path(), &cov()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_dataset_csv(out.path(), &ds).unwrap();
        let back = ingest_csv(out.path(), &cov()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn reads_distance_matrix_in_any_column_order() {
        let data = write_temp(
            "id,group,c1,c2\nt1,treatment,a,x\nt2,treatment,b,y\nc1,control,a,x\nc2,control,b,y\n",
        );
        let ds = ingest_csv(data.path(), &cov()).unwrap();
        let csv = write_temp("id,c2,c1\nt2,4,3\nt1,2,1\n");
        let matrix = read_distance_csv(csv.path(), &ds).unwrap();
        assert_eq!(matrix.get(0, 0), 1);
        assert_eq!(matrix.get(0, 1), 2);
        assert_eq!(matrix.get(1, 0), 3);
        assert_eq!(matrix.get(1, 1), 4);
    }

    #[test]
    fn distance_matrix_requires_full_cover() {
        let data = write_temp(
            "id,group,c1,c2\nt1,treatment,a,x\nc1,control,a,x\nc2,control,b,y\n",
        );
        let ds = ingest_csv(data.path(), &cov()).unwrap();
        let missing = write_temp("id,c1\nt1,1\n");
        assert!(matches!(
            read_distance_csv(missing.path(), &ds),
            Err(CliError::BadDistanceMatrix(_))
        ));
        let unknown = write_temp("id,c1,c9\nt1,1,2\n");
        assert!(matches!(
            read_distance_csv(unknown.path(), &ds),
            Err(CliError::BadDistanceMatrix(_))
        ));
    }
}
