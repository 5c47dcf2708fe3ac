//! Sensitivities with infinitely many prescribed zeros: the two convergent
//! families and the divergent one.

use bodefrac::weier::{demonstrate_divergence, verify_theorem_limit, verify_theorem_no_limit, PoleSequenceFamily};

fn main() -> bodefrac::Result<()> {
    let a = verify_theorem_no_limit(PoleSequenceFamily::A, &[10, 25, 50], 5e-3)?;
    for c in &a.cases {
        println!("A  N={:<3} numeric {:.8}  4π Σ {:.8}", c.n, c.numeric, c.theoretical);
    }
    let b = verify_theorem_limit(PoleSequenceFamily::B, &[10, 25, 50], 5e-3, &[1e-2, 1e-3, 1e-4])?;
    for c in &b.cases {
        println!("B  N={:<3} numeric {:.8}  4π Σ {:.8}", c.n, c.numeric, c.theoretical);
    }
    let d = demonstrate_divergence(PoleSequenceFamily::C, &[10, 20, 40])?;
    for c in &d.cases {
        println!("C  N={:<3} corridor sum {:.4}  bound {:.4}", c.n, c.sum, c.lower_bound);
    }
    println!("C  growth ratios {:?} -> {:?}", d.ratios, d.verdict);
    Ok(())
}
