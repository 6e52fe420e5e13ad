//! Prints F16 as powers of its generator, then checks Frobenius on a
//! larger field.

use hsrc::galois::{Elem, Field};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = Field::new(1, 4)?;
    println!("F_{} with modulus {:#x}", f.order(), f.modulus());
    println!("{:>4} {:>6} {:>6}", "i", "w^i", "coords");
    for i in 0..f.order() - 1 {
        let w = f.gen_pow(i);
        println!("{i:>4} {:>6} {:>6?}", w.0, f.coords(w));
    }

    // Squaring is additive in characteristic two.
    let big = Field::new(2, 8)?;
    let (a, b) = (Elem(0xbeef), Elem(0x1234));
    let lhs = big.frobenius_q(big.add(a, b), 3);
    let rhs = big.add(big.frobenius_q(a, 3), big.frobenius_q(b, 3));
    println!("F_{}: (a+b)^(q^3) = {:#x} = a^(q^3)+b^(q^3) = {:#x}", big.order(), lhs.0, rhs.0);
    assert_eq!(lhs, rhs);
    Ok(())
}
