//! A Blaschke product is all-pass, so its Bode integral is zero; the outer
//! arc absorbs the whole 4π Σ Re p.

use bodefrac::weier::{reconcile_pure_blaschke, PoleSequenceFamily};

fn main() -> bodefrac::Result<()> {
    let r = reconcile_pure_blaschke(PoleSequenceFamily::A, 50, &[1e3, 1e4, 1e5], 1e-2, 1e-2)?;
    println!("numeric {:.3e}", r.numeric);
    println!("4π Σ    {:.8}", r.theoretical);
    println!("arc     {:.8}i", r.residual.im);
    println!("sum     {:.3e}", r.predicted);
    Ok(())
}
