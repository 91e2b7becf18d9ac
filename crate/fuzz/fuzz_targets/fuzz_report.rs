#![no_main]

use libfuzzer_sys::fuzz_target;
use uptime_core::report::Report;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = Report::from_json(input) {
        let text = report.to_json();
        assert_eq!(Report::from_json(&text).unwrap(), report);
        let _ = report.to_table();
    }
});
