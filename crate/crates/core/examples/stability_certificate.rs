//! Open-loop RHP poles and a closed-loop stability certificate for a
//! fractional PID wrapped around a three-pole plant.

use bodefrac::rootfind::{certify_stability_default, rhp_open_loop_poles};
use bodefrac::{FractionalPID, LoopModel, Polynomial, RationalPlant};

fn main() -> bodefrac::Result<()> {
    // (s − 1)(s + 2)(s + 10)
    let plant = RationalPlant::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[-20.0, 8.0, 11.0, 1.0]))?;
    for p in rhp_open_loop_poles(&plant)?.poles {
        println!("open-loop RHP pole {:.6} (order {})", p.location, p.order);
    }
    for gains in [(10.0, 50.0, 1.0), (0.0, 200.0, 50.0)] {
        let pid = FractionalPID::new(gains.0, gains.1, gains.2, 0.5, 0.5)?;
        let cert = certify_stability_default(&LoopModel::rational(plant.clone(), pid))?;
        println!(
            "gains {:?}: {:?}, {} zeros in [0, {:.1}] x [±{:.1}], min |chi| on boundary {:.3e}",
            gains, cert.verdict, cert.zero_count, cert.region.re_max, cert.region.im_max, cert.boundary_min_modulus
        );
    }
    Ok(())
}
