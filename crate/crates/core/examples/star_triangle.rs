//! Electric networks on the octahedron: the star-triangle transformation,
//! the black-triangle factorization of the Laplacian and the transport of
//! harmonic voltages to the triangles.

use discrete_sl2::complex::octahedron;
use discrete_sl2::electric::{
    black_factorization, dirichlet_solve, laplace_image, star_triangle_network, star_triangle_single, total_current,
    ElectricNetwork,
};
use discrete_sl2::random;

pub fn run() -> anyhow::Result<()> {
    println!("star of (1, 2, 3): {:?}", star_triangle_single([1.0, 2.0, 3.0])?);

    let mut rng = random::rng(7);
    let c = octahedron()?;
    let net = ElectricNetwork::from_black_triangles(&c, random::positive_vec(&mut rng, c.n_edges(), 1.0))?;

    let u = [0.3, -0.2, 0.9, 0.1, -0.5, 0.4];
    let (star, u_star) = star_triangle_network(&net, &u)?;
    let before = total_current(&net, &u)?;
    let after = total_current(&star, &u_star)?;
    println!("currents at the original vertices before {:.4?}", before);
    println!("                                  after  {:.4?}", &after[..6]);

    let f = black_factorization(&net)?;
    println!("W = {:.4?}, factorization residual {:.2e}", f.w, f.residual);

    // +x and +y fixed, LU = 0 at the other four vertices
    let harmonic = dirichlet_solve(&net, &[(0, 1.0), (2, -1.0)])?;
    let image = laplace_image(&net, &harmonic, &[1, 3, 4, 5], 1e-10)?;
    println!(
        "{} is a kernel vector on triangles {:?} (residual {:.2e}; the other choice gives {:.2e})",
        image.verified, image.window, image.kernel_residual, image.rejected_residual
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
