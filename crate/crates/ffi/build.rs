use std::env;
use std::path::PathBuf;

use cbindgen::{Config, EnumConfig, Language, RenameRule};

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");

    let cfg = Config {
        language: Language::C,
        include_guard: Some("NEMESYS_H".into()),
        cpp_compat: true,
        documentation: true,
        enumeration: EnumConfig { prefix_with_name: true, rename_variants: RenameRule::ScreamingSnakeCase, ..Default::default() },
        ..Default::default()
    };

    let out = crate_dir.join("include").join("nemesys.h");
    std::fs::create_dir_all(out.parent().unwrap()).unwrap();
    cbindgen::Builder::new()
        .with_config(cfg)
        .with_crate(&crate_dir)
        .generate()
        .expect("cbindgen failed to generate the header")
        .write_to_file(out);
}
