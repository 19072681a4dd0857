//! Census writers: CSV for interchange, JSON for machines, markdown for people.

use clap::ValueEnum;
use serde_json::{json, Value};
use stdet_core::census::{
    character_sum, class_totals, layer_histogram, unit_and_zero_totals, CensusError, CountVector,
};
use stdet_core::ring::{Ring, RingElement};

use crate::store::{counts_csv, csv_field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Md,
}

/// Named aggregates in a fixed order, all exact decimal strings.
pub fn aggregates(cv: &CountVector, ring: &Ring) -> Result<Vec<(String, String)>, CensusError> {
    let totals = unit_and_zero_totals(cv, ring)?;
    let mut out = vec![
        ("ring".to_string(), cv.ring().to_string()),
        ("n".to_string(), cv.n().to_string()),
        ("engine".to_string(), cv.engine().to_string()),
        ("total".to_string(), cv.total().to_string()),
        ("ist".to_string(), totals.ist.to_string()),
        ("zero".to_string(), totals.zero.to_string()),
    ];
    for (s, count) in layer_histogram(cv, ring)?.iter().enumerate() {
        out.push((format!("layer_{s}"), count.to_string()));
    }
    for c in class_totals(cv, ring)? {
        out.push((format!("layer_{}_qr_total", c.s), c.qr_total.to_string()));
        out.push((format!("layer_{}_nqr_total", c.s), c.nqr_total.to_string()));
    }
    if ring.q() % 2 == 1 {
        out.push(("character_sum".to_string(), character_sum(cv, ring)?.to_string()));
    }
    Ok(out)
}

pub fn render(cv: &CountVector, ring: &Ring, format: Format) -> Result<String, CensusError> {
    let aggs = aggregates(cv, ring)?;
    Ok(match format {
        Format::Csv => {
            let mut out = String::new();
            for (k, v) in &aggs {
                out.push_str(&format!("# {k},{}\n", csv_field(v)));
            }
            out.push_str(&counts_csv(cv, ring));
            out
        }
        Format::Json => {
            let counts: Vec<Value> = cv
                .counts()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    json!({
                        "det_index": i,
                        "det_display": ring.display(RingElement(i as u32)),
                        "count": c.to_string(),
                    })
                })
                .collect();
            let aggregates: serde_json::Map<String, Value> =
                aggs.into_iter().map(|(k, v)| (k, Value::String(v))).collect();
            let doc = json!({ "aggregates": aggregates, "counts": counts });
            serde_json::to_string_pretty(&doc).expect("census serializes") + "\n"
        }
        Format::Md => {
            let mut out = format!("## ST_{}({}) determinant census\n\n", cv.n(), cv.ring());
            out.push_str("| aggregate | value |\n|---|---:|\n");
            for (k, v) in aggs.iter().skip(3) {
                out.push_str(&format!("| {k} | {v} |\n"));
            }
            out.push_str("\n| det_index | det_display | count |\n|---:|---|---:|\n");
            for (i, c) in cv.counts().iter().enumerate() {
                out.push_str(&format!("| {i} | {} | {c} |\n", ring.display(RingElement(i as u32))));
            }
            out
        }
    })
}
