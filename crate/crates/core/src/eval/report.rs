use std::fmt::Write as _;

use super::cv::EvaluationReport;
use super::metrics::Prf;
use crate::corpus::Category;
use crate::{Error, Result};

/// A published result row. Cells follow [`Category::REPORT_ORDER`] and keep
/// their printed text, `"P/R/F"` or `None` where nothing was reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PublishedRow {
    pub name: &'static str,
    pub cells: [Option<&'static str>; 7],
    /// Comparison rows (prior system, cueword matcher, baseline) computed on
    /// differently prepared data.
    pub reference: bool,
}

const fn row(
    name: &'static str,
    cells: [Option<&'static str>; 7],
    reference: bool,
) -> PublishedRow {
    PublishedRow {
        name,
        cells,
        reference,
    }
}

const PUBLISHED: [PublishedRow; 9] = [
    row(
        "AVGWVEC ACL+AZ 300",
        [
            Some("0.29/0.82/0.43"),
            Some("0.34/0.75/0.47"),
            Some("0.36/0.72/0.48"),
            Some("0.10/0.72/0.17"),
            Some("0.51/0.87/0.64"),
            Some("0.61/0.71/0.65"),
            Some("0.49/0.65/0.56"),
        ],
        false,
    ),
    row(
        "AVGWVEC ACL+AZ 100",
        [
            Some("0.29/0.85/0.43"),
            Some("0.29/0.80/0.42"),
            Some("0.36/0.68/0.47"),
            Some("0.11/0.87/0.20"),
            Some("0.47/0.88/0.61"),
            Some("0.59/0.68/0.63"),
            Some("0.49/0.69/0.57"),
        ],
        false,
    ),
    row(
        "PARAVEC ACL+AZ 100",
        [
            Some("0.60/0.03/0.06"),
            Some("0.20/0.004/0.009"),
            Some("0.39/0.02/0.04"),
            Some("0.00/0.00/0.00"),
            Some("0.52/0.11/0.18"),
            Some("0.62/0.98/0.76"),
            Some("0.35/0.004/0.009"),
        ],
        false,
    ),
    row(
        "AVGWVEC MixedAbs 100",
        [
            Some("0.11/0.73/0.19"),
            Some("0.11/0.71/0.20"),
            Some("0.14/0.62/0.23"),
            Some("0.04/0.65/0.08"),
            Some("0.15/0.75/0.25"),
            Some("0.72/0.56/0.63"),
            Some("0.21/0.61/0.31"),
        ],
        false,
    ),
    row(
        "AVGWVEC Brown model 100",
        [
            Some("0.19/0.73/0.30"),
            Some("0.38/0.56/0.45"),
            Some("0.19/0.55/0.28"),
            Some("0.05/0.72/0.10"),
            Some("0.30/0.72/0.42"),
            Some("0.56/0.52/0.54"),
            Some("0.42/0.66/0.51"),
        ],
        false,
    ),
    row(
        "AVGWVEC BSWE 100",
        [None, None, None, Some("0.14/0.63/0.23"), None, None, None],
        false,
    ),
    row(
        "Cuewords",
        [
            Some("0.13/0.55/0.21"),
            Some("0.33/0.20/0.25"),
            None,
            Some("0.08/0.36/0.13"),
            None,
            None,
            None,
        ],
        true,
    ),
    row(
        "Teufel 2002",
        [
            Some("0.44/0.65/0.52"),
            Some("0.34/0.20/0.26"),
            Some("0.40/0.50/0.45"),
            Some("0.37/0.40/0.38"),
            Some("0.57/0.66/0.61"),
            Some("0.84/0.88/0.86"),
            Some("0.52/0.39/0.44"),
        ],
        true,
    ),
    row(
        "Baseline",
        [
            Some("0.30/0.07/0.11"),
            Some("0.31/0.12/0.17"),
            Some("0.32/0.17/0.22"),
            Some("0.15/0.05/0.07"),
            Some("0.56/0.15/0.23"),
            Some("0.78/0.90/0.83"),
            Some("0.47/0.42/0.44"),
        ],
        true,
    ),
];

/// Every published row, method rows first.
pub fn published_rows() -> &'static [PublishedRow] {
    &PUBLISHED
}

/// The comparison rows shown beside evaluated configurations.
pub fn reference_rows() -> Vec<PublishedRow> {
    PUBLISHED.iter().copied().filter(|r| r.reference).collect()
}

const CAVEAT_MARK: &str = " †";
const CAVEAT: &str =
    "† reported on a differently segmented corpus; for orientation, not a like-for-like comparison";

fn cell(p: Option<Prf>) -> String {
    match p {
        Some(p) => format!("{:.2}/{:.2}/{:.2}", p.precision, p.recall, p.f1),
        None => "-".into(),
    }
}

/// Pipe-delimited table: one row per report, then the reference rows
/// (marked and footnoted) when given.
pub fn report_tables(reports: &[EvaluationReport], reference: &[PublishedRow]) -> String {
    let mut out = String::from("| Method |");
    for c in Category::REPORT_ORDER {
        let _ = write!(out, " {c} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(7));
    out.push('\n');
    for r in reports {
        let _ = write!(out, "| {} |", r.config.label);
        for c in Category::REPORT_ORDER {
            let _ = write!(out, " {} |", cell(r.metric(c)));
        }
        out.push('\n');
    }
    for r in reference {
        let mark = if r.reference { CAVEAT_MARK } else { "" };
        let _ = write!(out, "| {}{mark} |", r.name);
        for c in r.cells {
            let _ = write!(out, " {} |", c.unwrap_or("-"));
        }
        out.push('\n');
    }
    if reference.iter().any(|r| r.reference) {
        out.push('\n');
        out.push_str(CAVEAT);
        out.push('\n');
    }
    out
}

/// A table row read back from [`report_tables`] output; cells follow
/// [`Category::REPORT_ORDER`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedRow {
    pub name: String,
    pub reference: bool,
    pub cells: [Option<Prf>; 7],
}

/// Parses `"P/R/F"`; `"-"` is `None`.
pub fn parse_cell(text: &str) -> Result<Option<Prf>> {
    let text = text.trim();
    if text == "-" {
        return Ok(None);
    }
    let nums: Vec<f64> = text
        .split('/')
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: 0,
            message: format!("bad cell {text:?}: {e}"),
        })?;
    match nums[..] {
        [precision, recall, f1] => Ok(Some(Prf {
            precision,
            recall,
            f1,
        })),
        _ => Err(Error::Parse {
            line: 0,
            message: format!("bad cell {text:?}"),
        }),
    }
}

pub fn parse_report_table(text: &str) -> Result<Vec<ParsedRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if !line.starts_with('|') || line.starts_with("|---") || line.starts_with("| Method |") {
            continue;
        }
        let fields: Vec<&str> = line.trim_matches('|').split('|').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 8 columns, found {}", fields.len()),
            });
        }
        let (name, reference) = match fields[0].strip_suffix(CAVEAT_MARK.trim()) {
            Some(n) => (n.trim_end().to_owned(), true),
            None => (fields[0].to_owned(), false),
        };
        let mut cells = [None; 7];
        for (c, f) in cells.iter_mut().zip(&fields[1..]) {
            *c = parse_cell(f).map_err(|e| match e {
                Error::Parse { message, .. } => Error::Parse {
                    line: i + 1,
                    message,
                },
                e => e,
            })?;
        }
        rows.push(ParsedRow {
            name,
            reference,
            cells,
        });
    }
    Ok(rows)
}

/// `config<TAB>category<TAB>precision<TAB>recall<TAB>f1` with a header line;
/// categories absent from a report are omitted.
pub fn report_tsv(reports: &[EvaluationReport]) -> String {
    let mut out = String::from("config\tcategory\tprecision\trecall\tf1\n");
    for r in reports {
        for c in Category::REPORT_ORDER {
            if let Some(p) = r.metric(c) {
                let _ = writeln!(
                    out,
                    "{}\t{c}\t{:.4}\t{:.4}\t{:.4}",
                    r.config.label, p.precision, p.recall, p.f1
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::ReportConfig;

    fn perfect() -> EvaluationReport {
        let one = Prf {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        };
        EvaluationReport {
            config: ReportConfig {
                label: "ideal".into(),
                ..Default::default()
            },
            folds: vec![],
            present: Category::ALL.to_vec(),
            per_fold_mean: vec![one; 7],
            pooled: vec![one; 7],
        }
    }

    #[test]
    fn reference_only_table() {
        let t = report_tables(&[], &reference_rows());
        let rows = parse_report_table(&t).unwrap();
        let teufel = rows.iter().find(|r| r.name == "Teufel 2002").unwrap();
        assert!(teufel.reference);
        assert!(t.contains("| Teufel 2002 † | 0.44/0.65/0.52 |"));
        assert!(t.contains(CAVEAT));
    }

    #[test]
    fn perfect_cells() {
        let t = report_tables(&[perfect()], &[]);
        assert!(t.contains("| ideal | 1.00/1.00/1.00 |"));
        assert!(!t.contains('†'));
    }

    #[test]
    fn tsv_lines() {
        let t = report_tsv(&[perfect()]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 8);
        assert_eq!(lines[1], "ideal\tAIM\t1.0000\t1.0000\t1.0000");
    }

    #[test]
    fn published_cells_parse() {
        for r in published_rows() {
            for c in r.cells.iter().flatten() {
                assert!(parse_cell(c).unwrap().is_some());
            }
        }
        assert_eq!(reference_rows().len(), 3);
    }
}
