//! CSV rows. Timed out cells carry `*` in `results` and `seconds`; a
//! failed cell carries `!` in `results`.

use serde::Serialize;

pub const CSV_HEADER: &str = "variant,instance,query_id,results,seconds,timed_out";
pub const TIMEOUT_MARK: &str = "*";
pub const ERROR_MARK: &str = "!";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Row {
    pub variant: String,
    pub instance: String,
    pub query_id: usize,
    pub results: String,
    pub seconds: String,
    pub timed_out: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("rows serialize");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 rows");
        format!("{CSV_HEADER}\n{body}")
    }
}
