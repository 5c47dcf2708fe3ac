//! Bode integral of a loop with one unstable plant pole, compared with
//! 4π Σ Re p and reconciled through the outer-arc residual.

use bodefrac::bodeint::{bode_integral, residual_term};
use bodefrac::contour::gamma_r_residual;
use bodefrac::{FractionalPID, LoopModel, Polynomial, RationalPlant};

fn main() -> bodefrac::Result<()> {
    // L = 3/(s − 1): relative degree one, so the arc does not vanish
    let plant = RationalPlant::new(Polynomial::from_real(&[3.0]), Polynomial::from_real(&[-1.0, 1.0]))?;
    let model = LoopModel::rational(plant, FractionalPID::new(0.0, 1.0, 0.0, 0.5, 0.5)?);

    let report = bode_integral(&model, 1e-8)?;
    let res = gamma_r_residual(&model, &[1e4, 1e5, 1e6])?;
    println!("numeric      {:.10}", report.numeric_value);
    println!("4π Σ Re p    {:.10}", report.theoretical_value);
    println!("arc limit    {:.10}i", res.value.im);
    println!("predicted    {:.10}", report.theoretical_value + residual_term(res.value));
    Ok(())
}
