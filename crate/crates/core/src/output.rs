// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

//! Round-trip-safe number formatting shared by the CSV and JSON exporters.
//!
//! Every real is written with 17 significant digits, so parsing the text
//! back yields the identical `f64`.

use std::str::FromStr;

use serde_json::{Number, Value};

use crate::numkernel::CMatrix;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// JSON number carrying exactly the digits of [`fmt_real`]; non-finite
/// values become `null`.
pub fn json_real(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&fmt_real(x)).expect("formatted float is valid JSON"))
}

/// Row-major nested arrays of `[re, im]` pairs, the coin-file layout.
pub fn json_matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| Value::Array(vec![json_real(m[(i, j)].re), json_real(m[(i, j)].im)]))
                        .collect(),
                )
            })
            .collect(),
    )
}
