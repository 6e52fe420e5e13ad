//! Repair traffic of HSRC(15,3) against eager, lazy and regenerating-code
//! strategies as the repair threshold varies.

use hsrc::bandwidth::{diversity, expected_downloads, strategy_totals, traffic_table};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, k) = (15, 3);
    println!("diversity with all nodes live: {}", diversity(n)?);
    for x in [4, 6, 8, 14] {
        let est = expected_downloads(x, n, k)?;
        println!("x={x:>2}: expected downloads per repair {:.4}{}", est.value, if est.exact { "" } else { " (bound)" });
    }

    for x_th in [k, 8, n - 1] {
        let t = strategy_totals(n, k, x_th)?;
        println!(
            "x_th={x_th:>2}: eager {} lazy {} break-even {} -> eager wins: {}",
            t.eager,
            t.ec_lazy,
            t.critical,
            t.eager_wins()
        );
    }

    print!("\n{}", traffic_table(n, k, &[3, 5])?.to_csv());
    Ok(())
}
