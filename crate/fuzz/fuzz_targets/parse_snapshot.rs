#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cells) = kakeya::snapshot::parse_snapshot(s) {
            // Accepted input must survive a write/parse round trip.
            let text = kakeya::snapshot::write_snapshot(&cells);
            assert_eq!(kakeya::snapshot::parse_snapshot(&text).unwrap(), cells);
        }
    }
});
