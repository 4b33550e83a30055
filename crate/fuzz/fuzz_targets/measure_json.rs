#![no_main]

use libfuzzer_sys::fuzz_target;
use phsub::measure::PersistenceMeasure;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = PersistenceMeasure::from_json(text) else { return };
    let again = PersistenceMeasure::from_json(&m.to_json()).expect("written JSON must parse");
    assert_eq!(again, m);
});
