#![no_main]

use libfuzzer_sys::fuzz_target;
use phsub::vr::PersistenceDiagram;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = PersistenceDiagram::from_json(text) {
        let again = PersistenceDiagram::from_json(&d.to_json()).expect("written JSON must parse");
        assert_eq!(again, d);
    }
    let _ = PersistenceDiagram::list_from_json(text);
});
