//! Splits a file into fragment files, loses two, repairs one by pair
//! repair, and decodes the original from what is left.

use std::fs;

use hsrc::store::{decode_file, encode_file, plan_slices, repair_file};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let input = dir.path().join("object.bin");
    let data: Vec<u8> = (0..20_000u32).map(|i| (i.wrapping_mul(2654435761) >> 24) as u8).collect();
    fs::write(&input, &data)?;

    let plan = plan_slices(data.len() as u64, 2, 3, 48, 15)?;
    println!("{} slices of {} symbols, {} payload bytes per fragment", plan.slice_count, plan.slice_symbols(), plan.payload_length());
    let mut paths = encode_file(&input, &plan, &dir.path().join("frags"))?;

    let lost = paths.remove(6);
    paths.remove(0);
    fs::remove_file(&lost)?;
    let outcome = repair_file(6, &paths, &lost)?;
    println!("fragment 6 rebuilt from {} and {} ({} downloads)", outcome.pair.beta, outcome.pair.gamma, outcome.downloads);

    paths.push(lost);
    let restored = dir.path().join("restored.bin");
    let written = decode_file(&paths, &restored)?;
    assert_eq!(fs::read(&restored)?, data);
    println!("decoded {written} bytes, identical to the input");
    Ok(())
}
