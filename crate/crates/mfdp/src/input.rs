//! Reading a p-value column from CSV or TSV text.

use std::path::Path;

use crate::CliError;

/// Which column holds the p-values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum ColumnSpec {
    /// A column named `p`, `pvalue`, `p_value`, `pval` or `p.value` when a
    /// header is present, else the first column; without a header, the
    /// first numeric column.
    #[default]
    Auto,
    /// 1-based position.
    Index(usize),
    /// Header name.
    Name(String),
}

impl ColumnSpec {
    /// Digits select by position, anything else by name.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.parse::<usize>() {
            Ok(0) => Err(CliError::Validation("column index is 1-based".into())),
            Ok(i) => Ok(ColumnSpec::Index(i)),
            Err(_) => Ok(ColumnSpec::Name(s.to_string())),
        }
    }
}

const AUTO_NAMES: [&str; 5] = ["p", "pvalue", "p_value", "pval", "p.value"];

fn delimiter_for(text: &str, path: Option<&Path>) -> u8 {
    let by_ext = path
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("tsv") || e.eq_ignore_ascii_case("tab"));
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if by_ext || (first.contains('\t') && !first.contains(',')) {
        b'\t'
    } else {
        b','
    }
}

fn numeric(field: &str) -> bool {
    field.parse::<f64>().is_ok()
}

/// Names always mean a header; an index checks that field; otherwise a first
/// row without any number is a header.
fn is_header(record: &csv::StringRecord, column: &ColumnSpec) -> bool {
    match column {
        ColumnSpec::Name(_) => true,
        ColumnSpec::Index(i) => record.get(i - 1).is_some_and(|f| !numeric(f)),
        ColumnSpec::Auto => !record.iter().any(numeric),
    }
}

/// Parses p-values from delimited text. Line numbers in errors are 1-based
/// lines of `text`.
pub fn parse_pvalues(text: &str, column: &ColumnSpec, path: Option<&Path>) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter_for(text, path))
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut col: Option<usize> = match column {
        ColumnSpec::Index(i) => Some(i - 1),
        _ => None,
    };
    let mut out = Vec::new();
    let mut first = true;
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Validation(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if first {
            first = false;
            if is_header(&rec, column) {
                col = Some(header_column(&rec, column, line)?);
                continue;
            }
            if col.is_none() {
                col = rec.iter().position(numeric);
            }
        }
        let c = *col.get_or_insert(0);
        let field = rec.get(c).ok_or_else(|| {
            CliError::Validation(format!("line {line}: missing column {}", c + 1))
        })?;
        let v: f64 = field
            .parse()
            .map_err(|_| CliError::Validation(format!("line {line}: cannot parse '{field}' as a number")))?;
        if !(v > 0.0 && v <= 1.0) {
            return Err(CliError::Validation(format!(
                "line {line}: p-value {field} outside (0,1]"
            )));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::Validation("no p-values found".into()));
    }
    Ok(out)
}

fn header_column(rec: &csv::StringRecord, column: &ColumnSpec, line: u64) -> Result<usize, CliError> {
    let find = |name: &str| rec.iter().position(|f| f.eq_ignore_ascii_case(name));
    match column {
        ColumnSpec::Index(i) => {
            if *i > rec.len() {
                Err(CliError::Validation(format!("line {line}: header has no column {i}")))
            } else {
                Ok(i - 1)
            }
        }
        ColumnSpec::Name(n) => {
            find(n).ok_or_else(|| CliError::Validation(format!("line {line}: no column named '{n}'")))
        }
        ColumnSpec::Auto => Ok(AUTO_NAMES.iter().find_map(|n| find(n)).unwrap_or(0)),
    }
}

/// Reads and parses a file.
pub fn read_pvalues(path: &Path, column: &ColumnSpec) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_pvalues(&text, column, Some(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headerless_single_column() {
        let v = parse_pvalues("0.1\n0.2\n\n0.9\n", &ColumnSpec::Auto, None).unwrap();
        assert_eq!(v, vec![0.1, 0.2, 0.9]);
    }

    #[test]
    fn header_detection_and_names() {
        let text = "gene,pvalue\na,0.5\nb,0.01\n";
        assert_eq!(parse_pvalues(text, &ColumnSpec::Auto, None).unwrap(), vec![0.5, 0.01]);
        let v = parse_pvalues(text, &ColumnSpec::Name("PValue".into()), None).unwrap();
        assert_eq!(v, vec![0.5, 0.01]);
        let ids = "g1,0.3\ng2,0.4\n";
        assert_eq!(parse_pvalues(ids, &ColumnSpec::Auto, None).unwrap(), vec![0.3, 0.4]);
        let tsv = "id\tscore\tp\n1\t3\t0.2\n";
        assert_eq!(parse_pvalues(tsv, &ColumnSpec::Index(3), None).unwrap(), vec![0.2]);
        assert_eq!(parse_pvalues(tsv, &ColumnSpec::Auto, None).unwrap(), vec![0.2]);
    }

    #[test]
    fn line_numbered_errors() {
        let e = parse_pvalues("p\n0.1\nabc\n", &ColumnSpec::Auto, None).unwrap_err();
        assert_eq!(e.to_string(), "line 3: cannot parse 'abc' as a number");
        let e = parse_pvalues("0.1\n1.5\n", &ColumnSpec::Auto, None).unwrap_err();
        assert!(e.to_string().starts_with("line 2:"), "{e}");
        let e = parse_pvalues("0.1,0.2\n0.3\n", &ColumnSpec::Index(2), None).unwrap_err();
        assert_eq!(e.to_string(), "line 2: missing column 2");
        assert!(parse_pvalues("p\n", &ColumnSpec::Auto, None).is_err());
        assert!(ColumnSpec::parse("0").is_err());
    }
}
