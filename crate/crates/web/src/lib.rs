//! wasm-bindgen bindings for the browser demo in `www/`. Every export
//! returns a JSON string; counts are decimal strings so nothing is rounded
//! through a JS number.

use num_bigint::BigInt;
use serde_json::{json, Value};
use stdet_core::census::{census_dp, character_sum, layer_histogram, unit_and_zero_totals};
use stdet_core::formula::{self, FieldClass, FormulaVariant, IstMethod, RingUnitClass};
use stdet_core::ring::{Ring, RingElement, SquareClass};
use wasm_bindgen::prelude::*;

/// Censuses past this many matrices are refused, to keep the page responsive.
const MAX_WORK: u64 = 50_000_000;

fn ring_json(desc: &str) -> Result<Value, String> {
    let ring = Ring::parse(desc).map_err(|e| e.to_string())?;
    let units = ring.unit_count();
    Ok(json!({
        "ring": ring.descriptor().to_string(),
        "size": ring.size(),
        "q": ring.q(),
        "e": ring.e(),
        "units": units,
        "squares": ring.units_of_class(SquareClass::QrUnit).len(),
        "nonunits": ring.size() as u64 - units,
        "gamma": ring.display(ring.gamma()),
    }))
}

fn census_json(desc: &str, n: u32) -> Result<Value, String> {
    let ring = Ring::parse(desc).map_err(|e| e.to_string())?;
    let size = ring.size() as u64;
    if n == 0 || size.saturating_pow(3).saturating_mul(n as u64) > MAX_WORK {
        return Err(format!("{desc} at n = {n} is outside the demo's limits"));
    }
    let cv = census_dp(&ring, n).map_err(|e| e.to_string())?;
    let totals = unit_and_zero_totals(&cv, &ring).map_err(|e| e.to_string())?;
    let layers = layer_histogram(&cv, &ring).map_err(|e| e.to_string())?;
    let counts: Vec<Value> = cv
        .counts()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let a = RingElement(i as u32);
            json!({
                "det": ring.display(a),
                "valuation": ring.valuation(a),
                "class": ring.square_class(a),
                "count": c.to_string(),
            })
        })
        .collect();
    let charsum = (ring.q() % 2 == 1)
        .then(|| character_sum(&cv, &ring).map(|s| s.to_string()))
        .transpose()
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "ring": cv.ring(),
        "n": n,
        "total": cv.total().to_string(),
        "ist": totals.ist.to_string(),
        "zero": totals.zero.to_string(),
        "layers": layers.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "character_sum": charsum,
        "counts": counts,
    }))
}

/// The unit-class formulas next to what the census says, for one ring.
fn compare_json(desc: &str, n: u32, variant: &str) -> Result<Value, String> {
    let variant: FormulaVariant = variant.parse()?;
    let ring = Ring::parse(desc).map_err(|e| e.to_string())?;
    let census = census_json(desc, n)?;
    let (q, e) = (ring.q(), ring.e());
    let show = |r: Result<BigInt, formula::FormulaError>| match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("({e})"),
    };
    let mut rows = vec![json!({
        "quantity": "units total",
        "formula": show(formula::ist_ring(q, e, n)),
        "census": census["ist"],
    })];
    let classes: Vec<(&str, SquareClass, Result<_, _>)> = if q % 2 == 1 {
        let f = |fc, rc| {
            if e == 1 {
                formula::st_field_prescribed(q, n, fc, variant)
            } else {
                formula::st_ring_unit(q, e, n, rc, variant)
            }
        };
        vec![
            ("square unit", SquareClass::QrUnit, f(FieldClass::Qr, RingUnitClass::Qr)),
            ("nonsquare unit", SquareClass::NqrUnit, f(FieldClass::Nqr, RingUnitClass::Nqr)),
        ]
    } else if e == 1 {
        vec![("any unit", SquareClass::QrUnit, formula::st_field_prescribed(q, n, FieldClass::Unit, variant))]
    } else {
        vec![("any unit", SquareClass::QrUnit, formula::st_ring_unit(q, e, n, RingUnitClass::UnitEvenQ, variant))]
    };
    let counts = census["counts"].as_array().cloned().unwrap_or_default();
    for (label, class, value) in classes {
        let mut seen: Vec<String> = counts
            .iter()
            .filter(|c| {
                let cls = c["class"].as_str().unwrap_or("");
                if label == "any unit" {
                    c["valuation"] == 0
                } else {
                    cls == serde_json::to_value(class).unwrap()
                }
            })
            .map(|c| c["count"].as_str().unwrap_or("").to_string())
            .collect();
        seen.sort_by_key(|s| (s.len(), s.clone()));
        seen.dedup();
        rows.push(json!({ "quantity": label, "formula": show(value), "census": seen.join(" / ") }));
    }
    if e == 1 {
        rows.push(json!({
            "quantity": "closed form (surd)",
            "formula": show(formula::ist_field(q, n, IstMethod::Closed)),
            "census": census["ist"],
        }));
    }
    Ok(json!({ "ring": ring.descriptor().to_string(), "n": n, "variant": variant.to_string(), "rows": rows }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn ring_summary(desc: &str) -> Result<String, JsValue> {
    to_js(ring_json(desc))
}

#[wasm_bindgen]
pub fn census(desc: &str, n: u32) -> Result<String, JsValue> {
    to_js(census_json(desc, n))
}

#[wasm_bindgen]
pub fn compare(desc: &str, n: u32, variant: &str) -> Result<String, JsValue> {
    to_js(compare_json(desc, n, variant))
}
