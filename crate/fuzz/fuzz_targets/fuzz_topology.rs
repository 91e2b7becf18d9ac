#![no_main]

use libfuzzer_sys::fuzz_target;
use uptime_core::topology::TopologyFile;

fuzz_target!(|data: &[u8]| {
    let Ok(file) = TopologyFile::from_slice(data, "fuzz") else {
        return;
    };
    if let Ok(topology) = file.resolve(None) {
        if let Some(as_is) = &topology.as_is {
            let _ = topology.catalog.assemble_choices(as_is);
        }
        let _ = topology.catalog.candidate_count();
    }
});
