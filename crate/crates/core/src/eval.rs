//! Corpus metrics over per-file repair outcomes, in the layout of the
//! identified / correctly identified / fixed table.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedDecl {
    pub name: String,
    pub expected_type: String,
    #[serde(default)]
    pub expected_array_size: Option<u64>,
}

/// Ground truth for one corpus file, stored as `<stem>.truth.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthAnnotation {
    pub file: String,
    pub expected: Vec<ExpectedDecl>,
}

/// What the tool reported for one variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flagged {
    pub name: String,
    #[serde(rename = "type")]
    pub ctype: String,
    pub array_size: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileResult {
    pub file: String,
    pub flagged: Vec<Flagged>,
    /// Number of function definitions in the file.
    pub functions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    VariablesMain,
    VariablesMultiple,
    ArraysMain,
    ArraysMultiple,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::VariablesMain,
        Category::VariablesMultiple,
        Category::ArraysMain,
        Category::ArraysMultiple,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::VariablesMain => "Undeclared variables - main function",
            Category::VariablesMultiple => "Undeclared variables - multiple functions",
            Category::ArraysMain => "Undeclared arrays - main function",
            Category::ArraysMultiple => "Undeclared arrays - multiple functions",
        }
    }

    fn of(truth: &TruthAnnotation, functions: usize) -> Category {
        let arrays = truth.expected.iter().any(|e| e.expected_array_size.is_some());
        match (arrays, functions > 1) {
            (false, false) => Category::VariablesMain,
            (false, true) => Category::VariablesMultiple,
            (true, false) => Category::ArraysMain,
            (true, true) => Category::ArraysMultiple,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileOutcome {
    pub file: String,
    pub category: Category,
    pub flagged: Vec<String>,
    pub expected: Vec<String>,
    pub identified: bool,
    pub correctly_identified: bool,
    pub fixed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub identified: usize,
    pub not_identified: usize,
    pub correctly_identified: usize,
    /// Files not correctly identified, so that this plus
    /// `correctly_identified` is the total.
    pub wrongly_identified: usize,
    pub fixed: usize,
    pub not_fixed: usize,
    pub total: usize,
}

impl Counts {
    fn add(&mut self, o: &FileOutcome) {
        self.total += 1;
        if o.identified {
            self.identified += 1;
        } else {
            self.not_identified += 1;
        }
        if o.correctly_identified {
            self.correctly_identified += 1;
        } else {
            self.wrongly_identified += 1;
        }
        if o.fixed {
            self.fixed += 1;
        } else {
            self.not_fixed += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: Category,
    pub label: String,
    #[serde(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: String,
    #[serde(flatten)]
    pub totals: Counts,
    pub categories: Vec<CategoryRow>,
    pub files: Vec<FileOutcome>,
}

fn names(items: impl Iterator<Item = String>) -> BTreeSet<String> {
    items.collect()
}

/// Scores one file against its truth.
pub fn score(truth: &TruthAnnotation, result: &FileResult) -> FileOutcome {
    let flagged = names(result.flagged.iter().map(|f| f.name.clone()));
    let expected = names(truth.expected.iter().map(|e| e.name.clone()));
    let identified = !flagged.is_empty();
    let correctly_identified = identified && flagged == expected;
    let fixed = correctly_identified
        && truth.expected.iter().all(|e| {
            result.flagged.iter().any(|f| {
                f.name == e.name && f.ctype == e.expected_type && f.array_size == e.expected_array_size
            })
        });
    FileOutcome {
        file: result.file.clone(),
        category: Category::of(truth, result.functions),
        flagged: flagged.into_iter().collect(),
        expected: expected.into_iter().collect(),
        identified,
        correctly_identified,
        fixed,
    }
}

pub fn evaluate(mode: &str, items: &[(TruthAnnotation, FileResult)]) -> EvalReport {
    let files: Vec<FileOutcome> = items.iter().map(|(t, r)| score(t, r)).collect();
    let mut totals = Counts::default();
    let mut rows: Vec<CategoryRow> = Category::ALL
        .iter()
        .map(|&c| CategoryRow {
            category: c,
            label: c.label().to_string(),
            counts: Counts::default(),
        })
        .collect();
    for o in &files {
        totals.add(o);
        if let Some(row) = rows.iter_mut().find(|r| r.category == o.category) {
            row.counts.add(o);
        }
    }
    EvalReport {
        mode: mode.to_string(),
        totals,
        categories: rows,
        files,
    }
}

fn with_percent(count: usize, total: usize) -> String {
    if total == 0 {
        format!("{count}")
    } else {
        format!("{count} ({:.1}%)", 100.0 * count as f64 / total as f64)
    }
}

impl EvalReport {
    /// Aligned text table; the first row covers the whole corpus.
    pub fn table(&self) -> String {
        let header = [
            "",
            "Identified",
            "Not identified",
            "Correct (TP)",
            "Wrong (FP)",
            "Fixed",
            "Not fixed",
            "Total",
        ];
        let row = |label: &str, c: &Counts, show_identified: bool| -> Vec<String> {
            let (id, not_id) = if show_identified {
                (with_percent(c.identified, c.total), c.not_identified.to_string())
            } else {
                ("N/A".into(), "N/A".into())
            };
            vec![
                label.to_string(),
                id,
                not_id,
                with_percent(c.correctly_identified, c.total),
                c.wrongly_identified.to_string(),
                with_percent(c.fixed, c.total),
                c.not_fixed.to_string(),
                c.total.to_string(),
            ]
        };
        let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        rows.push(row("Undeclared variables and arrays", &self.totals, true));
        for r in &self.categories {
            rows.push(row(&r.label, &r.counts, false));
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let cells: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(i, cell)| {
                    if i == 0 {
                        format!("{cell:<w$}", w = widths[i])
                    } else {
                        format!("{cell:>w$}", w = widths[i])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(file: &str, items: &[(&str, &str, Option<u64>)]) -> TruthAnnotation {
        TruthAnnotation {
            file: file.into(),
            expected: items
                .iter()
                .map(|(n, t, s)| ExpectedDecl {
                    name: n.to_string(),
                    expected_type: t.to_string(),
                    expected_array_size: *s,
                })
                .collect(),
        }
    }

    fn result(file: &str, items: &[(&str, &str, Option<u64>)], functions: usize) -> FileResult {
        FileResult {
            file: file.into(),
            flagged: items
                .iter()
                .map(|(n, t, s)| Flagged {
                    name: n.to_string(),
                    ctype: t.to_string(),
                    array_size: *s,
                })
                .collect(),
            functions,
        }
    }

    #[test]
    fn empty_corpus_is_all_zero() {
        let report = evaluate("oracle", &[]);
        assert_eq!(report.totals, Counts::default());
        assert!(report.table().contains("Undeclared variables and arrays"));
    }

    #[test]
    fn file_level_definitions() {
        let items = vec![
            (truth("a.c", &[("i", "int", None)]), result("a.c", &[("i", "int", None)], 1)),
            (truth("b.c", &[("l", "double", None)]), result("b.c", &[("l", "int", None)], 1)),
            (truth("c.c", &[("x", "int", None)]), result("c.c", &[("x", "int", None), ("y", "int", None)], 2)),
            (truth("d.c", &[("b", "int", Some(1000))]), result("d.c", &[], 1)),
        ];
        let r = evaluate("oracle", &items);
        let t = &r.totals;
        assert_eq!((t.identified, t.not_identified), (3, 1));
        assert_eq!((t.correctly_identified, t.wrongly_identified), (2, 2));
        assert_eq!((t.fixed, t.not_fixed), (1, 3));
        assert_eq!(t.total, 4);
        let arrays = r.categories.iter().find(|c| c.category == Category::ArraysMain).unwrap();
        assert_eq!(arrays.counts.total, 1);
        let multi = r.categories.iter().find(|c| c.category == Category::VariablesMultiple).unwrap();
        assert_eq!(multi.counts.wrongly_identified, 1);
    }

    #[test]
    fn table_shows_counts_with_percentages() {
        let items = vec![(truth("a.c", &[("i", "int", None)]), result("a.c", &[("i", "int", None)], 1))];
        let table = evaluate("oracle", &items).table();
        assert!(table.contains("1 (100.0%)"), "{table}");
        assert!(table.contains("N/A"));
        let widths: BTreeSet<usize> = table.lines().map(|l| l.find(" | ").unwrap()).collect();
        assert_eq!(widths.len(), 1);
    }
}
