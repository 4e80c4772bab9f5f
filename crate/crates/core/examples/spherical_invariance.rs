//! Scaling a color leaves its spherical angles unchanged; changing the
//! illuminant temperature does not.
//!
//! cargo run --example spherical_invariance

use hdsc::color_model::{render_lambertian, rgb_to_spherical, spherical_to_rgb, Exposure, RgbPixel, SyntheticSceneSpec};

fn main() -> hdsc::Result<()> {
    let red = RgbPixel::new(0.8, 0.1, 0.1);
    println!("scale      l        theta     phi");
    for s in [1.0, 0.5, 0.25, 0.1] {
        let c = rgb_to_spherical(red.scale(s));
        println!("{s:<6} {:8.5} {:9.6} {:9.6}", c.l, c.theta, c.phi);
    }
    let back = spherical_to_rgb(rgb_to_spherical(red))?;
    println!("round trip: ({:.6}, {:.6}, {:.6})", back.r, back.g, back.b);

    println!("\nLambertian red surface, shading x intensity vs temperature");
    for t in [3000.0, 6500.0, 10000.0] {
        let mut row = format!("T = {t:>5} K:");
        for (sigma, i) in [(1.0, 1.0), (0.5, 0.6), (0.3, 0.4)] {
            let spec = SyntheticSceneSpec {
                sigma,
                intensity: i,
                temperature: t,
                surface_reflectance: [0.9, 0.08, 0.08],
                ..Default::default()
            };
            let exposure = 1.0 / SyntheticSceneSpec { sigma: 1.0, intensity: 1.0, ..spec }
                .raw_response()?
                .into_iter()
                .fold(0.0, f64::max);
            let c = rgb_to_spherical(render_lambertian(&spec, Exposure::Fixed(exposure))?.pixel);
            row += &format!("  ({:.4}, {:.4})", c.theta, c.phi);
        }
        println!("{row}");
    }
    Ok(())
}
