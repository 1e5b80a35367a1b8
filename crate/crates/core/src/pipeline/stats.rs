//! Per-stage yield accounting and its text/CSV renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::lang::LanguageCode;

pub const STAGE_CAPTIONS: &str = "Captions";
pub const STAGE_ENGLISH: &str = "English QAs";
pub const STAGE_VALIDATED_ENGLISH: &str = "Validated English QAs";
pub const STAGE_VALIDATED_MULTILINGUAL: &str = "Validated Multilingual QAs";
pub const STAGE_DIRECTQG: &str = "DirectQG QAs";

/// `100 * part / whole` in tenths of a percent, half away from zero;
/// `None` when `whole` is zero.
pub fn percent_tenths(part: usize, whole: usize) -> Option<u64> {
    if whole == 0 {
        return None;
    }
    let (k, n) = (part as u128, whole as u128);
    Some(((2000 * k + n) / (2 * n)) as u64)
}

/// `715` renders as `"71.5"`.
pub fn format_tenths(tenths: u64) -> String {
    format!("{}.{}", tenths / 10, tenths % 10)
}

/// One stage. Source stages (captions, generated pairs) have no input count
/// and no percentage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub count_in: Option<usize>,
    pub count_out: usize,
}

impl StageRecord {
    pub fn source(stage: &str, count: usize) -> Self {
        StageRecord {
            stage: stage.to_string(),
            count_in: None,
            count_out: count,
        }
    }

    /// Panics if `count_out > count_in`.
    pub fn filter(stage: &str, count_in: usize, count_out: usize) -> Self {
        assert!(count_out <= count_in, "{stage}: {count_out} out of {count_in}");
        StageRecord {
            stage: stage.to_string(),
            count_in: Some(count_in),
            count_out,
        }
    }

    /// Share of the previous stage in tenths of a percent, half away from
    /// zero; `None` for source stages and empty inputs.
    pub fn pct_tenths(&self) -> Option<u64> {
        percent_tenths(self.count_out, self.count_in?)
    }

    pub fn pct_of_previous(&self) -> Option<String> {
        self.pct_tenths().map(format_tenths)
    }

    /// `"264930 (71.0%)"`, or the bare count without a percentage.
    pub fn cell(&self) -> String {
        match self.pct_of_previous() {
            Some(p) => format!("{} ({p}%)", self.count_out),
            None => self.count_out.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStats {
    pub lang: LanguageCode,
    pub stages: Vec<StageRecord>,
}

impl StageStats {
    pub fn get(&self, stage: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
}

/// Stage names in first-seen order over all columns.
fn row_names(columns: &[StageStats]) -> Vec<&str> {
    let mut rows: Vec<&str> = Vec::new();
    for c in columns {
        for s in &c.stages {
            if !rows.contains(&s.stage.as_str()) {
                rows.push(&s.stage);
            }
        }
    }
    rows
}

/// One column per language, one row per stage. Missing cells are empty.
pub fn render_stage_table(columns: &[StageStats], format: TableFormat) -> String {
    let rows = row_names(columns);
    let cell = |c: &StageStats, row: &str| c.get(row).map(StageRecord::cell).unwrap_or_default();
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["stage".to_string()];
            header.extend(columns.iter().map(|c| c.lang.to_string()));
            w.write_record(&header).expect("in-memory csv");
            for row in rows {
                let mut rec = vec![row.to_string()];
                rec.extend(columns.iter().map(|c| cell(c, row)));
                w.write_record(&rec).expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
        }
        TableFormat::Text => {
            let label_w = rows.iter().map(|r| r.len()).max().unwrap_or(0).max(5);
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| columns.iter().map(|c| cell(c, r)).collect())
                .collect();
            let col_w: Vec<usize> = (0..columns.len())
                .map(|j| cells.iter().map(|r| r[j].len()).max().unwrap_or(0).max(2))
                .collect();
            let mut out = String::new();
            let _ = write!(out, "{:<label_w$}", "");
            for (c, w) in columns.iter().zip(&col_w) {
                let _ = write!(out, "  {:>w$}", c.lang.as_str());
            }
            out.push('\n');
            for (row, cells) in rows.iter().zip(&cells) {
                let _ = write!(out, "{row:<label_w$}");
                for (v, w) in cells.iter().zip(&col_w) {
                    let _ = write!(out, "  {v:>w$}");
                }
                out.push('\n');
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_one_cells() {
        assert_eq!(
            StageRecord::filter(STAGE_VALIDATED_ENGLISH, 373248, 264930).cell(),
            "264930 (71.0%)"
        );
        assert_eq!(
            StageRecord::filter(STAGE_VALIDATED_ENGLISH, 499900, 343621).cell(),
            "343621 (68.7%)"
        );
        assert_eq!(StageRecord::filter("x", 10, 7).cell(), "7 (70.0%)");
        assert_eq!(StageRecord::filter("x", 0, 0).cell(), "0");
        assert_eq!(StageRecord::source(STAGE_CAPTIONS, 7200).cell(), "7200");
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        // 1/8 = 12.5% exactly; 1/16 = 6.25% -> 6.3
        assert_eq!(StageRecord::filter("x", 8, 1).pct_of_previous().unwrap(), "12.5");
        assert_eq!(StageRecord::filter("x", 16, 1).pct_of_previous().unwrap(), "6.3");
        assert_eq!(StageRecord::filter("x", 3, 3).pct_of_previous().unwrap(), "100.0");
    }

    #[test]
    #[should_panic]
    fn filter_cannot_grow() {
        StageRecord::filter("x", 1, 2);
    }

    #[test]
    fn merged_grid_layout_and_csv() {
        let col = |lang, caps, qas, val| StageStats {
            lang,
            stages: vec![
                StageRecord::source(STAGE_CAPTIONS, caps),
                StageRecord::source(STAGE_ENGLISH, qas),
                StageRecord::filter(STAGE_VALIDATED_ENGLISH, qas, val),
            ],
        };
        let cols = [
            col(LanguageCode::En, 7200, 373248, 264930),
            col(LanguageCode::Fr, 8562, 499900, 343621),
        ];
        let text = render_stage_table(&cols, TableFormat::Text);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].trim_start().starts_with("en"));
        assert!(lines[3].starts_with("Validated English QAs"));
        assert!(lines[3].contains("264930 (71.0%)") && lines[3].contains("343621 (68.7%)"));
        let csv = render_stage_table(&cols, TableFormat::Csv);
        let mut r = csv::Reader::from_reader(csv.as_bytes());
        assert_eq!(r.headers().unwrap(), vec!["stage", "en", "fr"]);
        let rows: Vec<_> = r.records().map(|r| r.unwrap()).collect();
        assert_eq!(&rows[2][2], "343621 (68.7%)");
    }
}
