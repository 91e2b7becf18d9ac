#![no_main]

use libfuzzer_sys::fuzz_target;
use uptime_core::broker::BrokerCatalog;

fuzz_target!(|data: &[u8]| {
    if let Ok(catalog) = BrokerCatalog::from_slice(data, "fuzz") {
        let text = catalog.to_json();
        let again = BrokerCatalog::from_slice(text.as_bytes(), "fuzz").expect("emitted catalog parses");
        assert_eq!(again, catalog);
    }
});
