mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_trace_matches_model(seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let result = common::catalog_trace(seed, 150, &dir.path().join("catalog.db"));
        prop_assert!(result.is_ok(), "{}", result.unwrap_err());
    }
}

#[test]
fn reopen_preserves_rows_and_options() {
    use signcol::catalog::{Catalog, OPTION_OUTPUT_ROOT};
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("nested/catalog.db");
    let mut c = Catalog::open(&db).unwrap();
    let f = common::fixture(&mut c);
    c.set_option(OPTION_OUTPUT_ROOT, "/data").unwrap();
    let before = c.snapshot().unwrap();
    drop(c);
    let c = Catalog::open(&db).unwrap();
    assert_eq!(c.snapshot().unwrap(), before);
    assert_eq!(c.item(f.items[3]).unwrap().name, "sign 4");
    assert_eq!(c.schema_version().unwrap(), 1);
}
