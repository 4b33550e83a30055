#![no_main]

use libfuzzer_sys::fuzz_target;
use phsub::pointcloud::{parse_distance_csv, write_distance_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(space) = parse_distance_csv(text) else { return };
    let mut out = Vec::new();
    write_distance_csv(space.len(), |i, j| space.distance(i, j), &mut out).unwrap();
    let again = parse_distance_csv(std::str::from_utf8(&out).unwrap()).expect("written CSV must parse");
    assert_eq!(again, space);
});
