#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(sched) = kakeya::schedule::parse_schedule(s) {
            // Accepted input must survive a text round trip; validation may
            // still reject it, it just must not panic.
            let text = sched.to_text();
            assert_eq!(
                kakeya::schedule::parse_schedule(&text).unwrap().to_text(),
                text
            );
            // Validation cost grows with the block sizes; keep executions fast.
            if sched.blocks.iter().all(|b| b.n.bits() <= 16 && b.m.bits() <= 16) {
                let _ = sched.validate();
            }
        }
    }
});
