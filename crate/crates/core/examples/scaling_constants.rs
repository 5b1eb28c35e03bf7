//! Scaling exponents, the diffusion constant Γ_R, the jump kernel Φ and the
//! Lévy symbol ψ.

use slfv::scaling::{gamma_r, levy_symbol, phi_kernel, scaling_params, ScalingCase};

fn main() -> slfv::Result<()> {
    println!("case           n        beta    gamma   delta   u_n       s_n");
    let cases = [
        ("fixed", ScalingCase::FixedRadius),
        ("stable 1.5", ScalingCase::StableRadii { alpha: 1.5 }),
    ];
    for (name, case) in cases {
        for n in [100, 10_000] {
            let p = scaling_params(n, case, 0.5, 1.0)?;
            println!(
                "{name:<14} {n:<8} {:.4}  {:.4}  {:.4}  {:.6}  {:.6}",
                p.beta, p.gamma, p.delta, p.u_n, p.s_n
            );
        }
    }
    for d in 1..=3 {
        println!("Γ_1 in d={d}: {:.10}", gamma_r(d, 1.0)?);
    }
    for m in [0.5, 1.0, 2.0] {
        println!("Φ(m={m}) for d=2, α=1.5: {:.6}", phi_kernel(2, 1.5, m)?);
    }
    for theta in [0.5, 1.0, 2.0] {
        let limit = levy_symbol(&[theta], 1, 1.5, None)?;
        let truncated = levy_symbol(&[theta], 1, 1.5, Some(1000))?;
        println!("ψ({theta}) = {limit:.6}, with n=1000 cut-off {truncated:.6}");
    }
    Ok(())
}
