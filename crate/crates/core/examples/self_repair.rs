//! Encodes a small object with HSRC(7,3), lists the repair pairs of every
//! point, and rebuilds one lost fragment from two others.

use hsrc::codec::CodeParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let code = CodeParams::new(2, 3, 9, 7)?;
    let symbols = [1, 0, 1, 1, 1, 0, 0, 1, 0];
    let frags = code.encode_symbols(&symbols)?;
    let all: Vec<usize> = (0..code.n()).collect();

    for target in 0..code.n() {
        let others: Vec<usize> = all.iter().copied().filter(|&i| i != target).collect();
        let pairs = code.repair_pairs(target, &others)?;
        let listed: Vec<String> = pairs.iter().map(|p| format!("({},{})", p.beta, p.gamma)).collect();
        println!(
            "point {target}: diversity {} pairs {}",
            code.diversity_among(target, &others)?,
            listed.join(" ")
        );
    }

    let lost = 4;
    let live: Vec<_> = frags.iter().copied().filter(|f| f.index != lost).collect();
    let rebuilt = code.repair(lost, &live)?;
    assert_eq!(rebuilt, frags[lost]);
    println!("fragment {lost} rebuilt from two downloads: {:?}", rebuilt.value);

    // Points 0, 1 and 3 have independent coordinate words 1, 2 and 4.
    let decoded = code.decode(&[frags[0], frags[1], frags[3]])?;
    println!("decoded from fragments 0, 1, 3: {:?}", decoded.to_symbols(&code));
    Ok(())
}
