// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").expect("set by cargo"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let config = cbindgen::Config::from_file(dir.join("cbindgen.toml")).expect("cbindgen.toml parses");
    let bindings =
        cbindgen::Builder::new().with_crate(&dir).with_config(config).generate().expect("C header generation");
    // write_to_file leaves the file untouched when the contents match.
    bindings.write_to_file(dir.join("include").join("ctoqw.h"));
}
