//! Schedules seven simultaneous repairs on HSRC(15,3) under one upload and
//! one download per node per slot.

use hsrc::codec::CodeParams;
use hsrc::scheduler::{baselines, makespan_lower_bound, schedule_repairs, verify_schedule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let code = CodeParams::new(2, 3, 12, 15)?;
    let missing: Vec<usize> = (0..7).filter_map(|i| code.index_of_power(i)).collect();
    let live: Vec<usize> = (0..code.n()).filter(|i| !missing.contains(i)).collect();

    let s = schedule_repairs(&code, &missing, &live)?;
    assert!(verify_schedule(&s, &code).is_empty());
    for task in &s.tasks {
        let p = task.pair.expect("feasible task has a pair");
        println!("repair {:>2} from {:>2} and {:>2}, done in slot {:?}", task.target, p.beta, p.gamma, task.completed_at());
    }
    let b = baselines(code.k(), missing.len());
    println!(
        "makespan {} (lower bound {}), hybrid {} slots, erasure {} slots",
        s.makespan,
        makespan_lower_bound(s.tasks.len(), live.len()),
        b.hybrid,
        b.erasure
    );
    print!("{}", s.to_csv());
    Ok(())
}
