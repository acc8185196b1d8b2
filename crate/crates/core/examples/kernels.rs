//! Built-in kernels, the registry, and a user-defined kernel.

use gkl::{KernelModel, KernelRegistry, Smoothness};

fn main() -> gkl::Result<()> {
    let reg = KernelRegistry::with_builtins();
    for name in reg.names() {
        let k = reg.get(name)?;
        println!(
            "{name}: smoothness {:?}, dim {:?}, k(0, 0.5) = {:.6}",
            k.smoothness(),
            k.dim(),
            k.eval(&[0.0], &[0.5])?
        );
    }

    // Matern 1/2 on R^2, length scale 0.3; Fourier decay exponent (d + 1) / 2
    let ell = 0.3;
    let matern = KernelModel::custom(
        "matern_half",
        Smoothness::Finite(1.5),
        Some(2),
        move |x, y| {
            let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            (-r2.sqrt() / ell).exp()
        },
    )
    .with_param("length_scale", ell);
    let mut reg = reg;
    reg.register(matern);
    let m = reg.get("matern_half")?;
    println!(
        "matern_half: k(x, y) = {:.6}",
        m.eval(&[0.1, 0.2], &[0.4, 0.6])?
    );

    // the Wendland kernel is one-dimensional
    println!("{}", KernelModel::wendland_k0().check_dim(2).unwrap_err());
    Ok(())
}
