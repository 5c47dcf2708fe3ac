//! Sweeps PID gains and orders around one plant; every stable point should
//! give the same integral.

use bodefrac::tuner::{invariance_spread, sweep, SweepGrid};
use bodefrac::{Polynomial, RationalPlant};

fn main() -> bodefrac::Result<()> {
    let plant = RationalPlant::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[-20.0, 8.0, 11.0, 1.0]))?;
    let grid = SweepGrid {
        k1: vec![1.0, 10.0],
        k0: vec![25.0, 50.0],
        km1: vec![0.0, 1.0],
        alpha: vec![0.25, 0.5, 0.75, 1.0],
        beta: vec![0.5, 1.0],
    };
    let points = sweep(&plant, &grid)?;
    for p in points.iter().filter(|p| p.is_stable()).take(8) {
        let r = p.report.as_ref().unwrap();
        println!(
            "k=({}, {}, {}) α={} β={}  I = {:.8}",
            p.k1, p.k0, p.km1, p.alpha, p.beta, r.numeric_value
        );
    }
    let stable = points.iter().filter(|p| p.is_stable()).count();
    println!("{stable}/{} stable, relative spread {:?}", points.len(), invariance_spread(&plant, &points)?);
    Ok(())
}
