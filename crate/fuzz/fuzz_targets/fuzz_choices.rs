#![no_main]

use libfuzzer_sys::fuzz_target;
use uptime_core::optimizer::ChoiceMap;

fuzz_target!(|data: &[u8]| {
    if let Ok(input) = std::str::from_utf8(data) {
        if let Ok(choices) = ChoiceMap::parse(input) {
            assert_eq!(ChoiceMap::parse(&choices.to_string()).unwrap(), choices);
        }
    }
});
