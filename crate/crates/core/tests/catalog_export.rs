use libdex_core::{builtin_catalog, Catalog};

const EXPORTED: &str = include_str!("../data/catalog.json");

#[test]
fn export_is_byte_stable() {
    assert_eq!(builtin_catalog().to_json(), EXPORTED);
}

#[test]
fn export_round_trips() {
    let parsed = Catalog::from_json(EXPORTED).unwrap();
    assert_eq!(parsed, builtin_catalog());
    assert_eq!(parsed.criterion("12b").unwrap().attribute_id.0, 12);
}
