//! Two-chart points, the Fubini–Study metric and Φ.
use holo_lab::sphere::{fs_form, fs_inner, phi_coefficient, phi_inverse, phi_map, Chart, SpherePoint, TangentVector};
use num_complex::Complex64;

fn main() -> holo_lab::error::Result<()> {
    let c = Complex64::new;
    for z in [c(0.3, -0.1), c(1.5, 1.0), c(40.0, 3.0)] {
        let p = SpherePoint::from_z(z).normalized();
        let back = p.chart_switch()?.chart_switch()?;
        println!(
            "z = {z:>12.4}  stored in {:?}  unit sphere {:?}  round trip {:.1e}",
            p.chart,
            p.to_unit_sphere().map(|x| (x * 1e4).round() / 1e4),
            p.chordal_distance(&back)
        );
    }

    // ω(x, ix) = |x|², and Φ(x, ·) is recovered from its coefficient.
    let p = SpherePoint::from_z(c(0.7, 0.2));
    let x = TangentVector::new(p, c(0.4, -1.1));
    let ix = TangentVector::new(p, c(0.0, 1.0) * x.value);
    println!("ω(x, ix) = {:.6}  |x|² = {:.6}", fs_form(&p, &x, &ix)?, fs_inner(&p, &x, &x)?);
    let y = TangentVector::new(p, c(-0.3, 0.5));
    let a = phi_coefficient(&p, x.value);
    println!("Φ(x)(y) = {:.6}  from coefficient {:.6}", phi_map(&p, &x, &y)?, a * y.value);
    println!("Φ⁻¹ round trip error {:.1e}", (phi_inverse(&p, a) - x.value).norm());

    // The same tangent vector seen from the other chart has the same length.
    let in_w = x.in_chart(Chart::W)?;
    println!("|x| in Z: {:.9}  in W: {:.9}", fs_inner(&p, &x, &x)?.sqrt(), fs_inner(&in_w.base, &in_w, &in_w)?.sqrt());
    Ok(())
}
