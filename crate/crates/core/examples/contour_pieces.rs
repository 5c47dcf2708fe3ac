//! Checks each piece of the branch-cut contour separately and then the
//! closed loop as a whole.

use bodefrac::contour::{
    closure_check, verify_corridor_pair, verify_lemma_arc, verify_lemma_origin, verify_lemma_pole_circle,
    ContourSpec,
};
use bodefrac::{Complex64, FractionalPID, LoopModel, PoleRecord, Polynomial, RationalPlant};

fn main() -> bodefrac::Result<()> {
    let plant = RationalPlant::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[-20.0, 8.0, 11.0, 1.0]))?;
    let model = LoopModel::rational(plant, FractionalPID::new(10.0, 50.0, 1.0, 0.5, 0.5)?);
    let pole = PoleRecord::new(Complex64::new(1.0, 0.0), 1.0)?;
    let eps = [1e-2, 1e-3, 1e-4];

    let reports = [
        verify_lemma_arc(&model, &[1e2, 1e3, 1e4])?,
        verify_lemma_pole_circle(&model, &pole, &eps)?,
        verify_lemma_origin(&model, &eps)?,
        verify_corridor_pair(&model, &pole, &[1e-5, 2e-5, 4e-5])?,
    ];
    for r in &reports {
        println!("{:<12} fitted {:>9.4} expected {:>9.4}  {}", r.name, r.fitted, r.expected, if r.pass { "ok" } else { "off" });
    }

    let closure = closure_check(&model, &ContourSpec::for_model(&model, 1e3, 1e-4, 1e-5))?;
    println!("closure |Σ| / max segment = {:.2e} over {} segments", closure.relative_closure(), closure.segments.len());
    Ok(())
}
