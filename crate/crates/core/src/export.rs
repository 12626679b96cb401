//! JSON and CSV page output.
//!
//! `(i, j, k)` are integers for every variant (`i` is twice the Alexander
//! grading); the `(M, A)` offsets and the Alexander window are written doubled.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homfly::LaurentAQ;
use crate::spectral::{Page, Stage, Variant};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub variant: Variant,
    pub i: i64,
    pub j: i64,
    pub k: i64,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Offsets {
    pub maslov: i64,
    pub alexander: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Window {
    pub alexander_lo: i64,
    pub alexander_hi: i64,
    /// Entries with smaller `i` are cut off by the window.
    pub exact_from_i: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub euler: LaurentAQ,
    pub expected: LaurentAQ,
    #[serde(rename = "match")]
    pub matched: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PageExport {
    pub schema: u32,
    pub doubled: bool,
    pub word: String,
    pub strands: usize,
    pub variant: Variant,
    pub stage: Stage,
    pub offsets: Offsets,
    pub window: Window,
    pub total_dim: usize,
    pub entries: Vec<Entry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

impl PageExport {
    pub fn new(word: &str, strands: usize, page: &Page, comparison: Option<Comparison>) -> Self {
        let entries = page
            .collapsed()
            .into_iter()
            .map(|((i, j, k), dim)| Entry { variant: page.variant, i, j, k, dim })
            .collect();
        PageExport {
            schema: SCHEMA,
            doubled: true,
            word: word.to_string(),
            strands,
            variant: page.variant,
            stage: page.stage,
            offsets: Offsets { maslov: page.offset_doubled.0, alexander: page.offset_doubled.1 },
            window: Window {
                alexander_lo: 2 * page.window.0 + page.offset_doubled.1,
                alexander_hi: 2 * page.window.1 + page.offset_doubled.1,
                exact_from_i: page.exact_from_i(),
            },
            total_dim: page.total_dim(),
            entries,
            comparison,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per entry: `variant,i,j,k,dim`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            w.serialize(e).map_err(|e| Error::InternalError(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InternalError(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InternalError(e.to_string()))
    }
}
