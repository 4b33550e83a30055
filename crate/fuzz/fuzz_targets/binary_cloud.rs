#![no_main]

use libfuzzer_sys::fuzz_target;
use phsub::pointcloud::{parse_binary, write_binary};

fuzz_target!(|data: &[u8]| {
    let Ok(cloud) = parse_binary(data) else { return };
    let mut out = Vec::new();
    write_binary(&cloud, &mut out).unwrap();
    assert_eq!(out, data);
});
