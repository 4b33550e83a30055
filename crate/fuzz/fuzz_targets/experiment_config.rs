#![no_main]

use libfuzzer_sys::fuzz_target;
use phsub::pipeline::{DatasetSpec, ExperimentConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = text.parse::<DatasetSpec>();
    if let Ok(cfg) = ExperimentConfig::from_json(text) {
        let _ = cfg.validate(1000);
        let _ = cfg.config_hash();
    }
});
