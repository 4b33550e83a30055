#![no_main]

use libfuzzer_sys::fuzz_target;
use phsub::pointcloud::{parse_point_csv, write_point_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cloud) = parse_point_csv(text) else { return };
    let mut out = Vec::new();
    write_point_csv(&cloud, &mut out).unwrap();
    let again = parse_point_csv(std::str::from_utf8(&out).unwrap()).expect("written CSV must parse");
    assert_eq!(again, cloud);
});
