//! Compares object availability of HSRC(15,3) with an MDS code of the same
//! shape, exactly and by simulation.

use hsrc::resilience::{p_obj_hsrc, p_obj_mds, retrieval_profile, simulate_p_obj, AvailabilityModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, k) = (15, 3);
    println!("p_node,hsrc,mds,monte_carlo,stderr");
    for p in [0.3, 0.5, 0.7, 0.9] {
        let model = AvailabilityModel::new(n, k, 2, p)?;
        let mc = simulate_p_obj(&model, 50_000, 7)?;
        println!(
            "{p},{:.6},{:.6},{:.6},{:.6}",
            p_obj_hsrc(&model)?,
            p_obj_mds(n, k, p)?,
            mc.estimate,
            mc.stderr
        );
    }

    let profile = retrieval_profile(31, 5, 2)?;
    println!("\nHSRC(31,5): chance that x random live nodes can decode");
    for row in profile.rows.iter().filter(|r| (5..=17).contains(&r.x)) {
        println!("x={:>2} rho={:.6} 1-rho={:.3e}", row.x, row.rho_x_f64(), row.one_minus_rho_x());
    }
    println!("decodable 5-subsets: {}", profile.decodable_k_subsets);
    Ok(())
}
