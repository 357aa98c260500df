//! Density of the pricing measure: unit mean under both measures, and the
//! same discounted price from either side.

use shortfall_hedge::mc::estimate;
use shortfall_hedge::{derive_constants, MarketParams, McConfig, Measure};

fn main() -> shortfall_hedge::Result<()> {
    let m = MarketParams {
        s0: [100.0, 80.0],
        alpha: [0.08, 0.05],
        sigma: [0.2, 0.3],
        rho: 0.3,
        r: 0.02,
        maturity: 1.0,
    };
    let k = derive_constants(&m, 100.0)?;
    println!("A = ({:.6}, {:.6}), B = {:.6}", k.a1, k.a2, k.b_cap);

    let cfg = McConfig::new(1_000_000, 7);
    let z = estimate(&m, Measure::Physical, &cfg, 0, |s| Ok(s.z))?;
    let inv = estimate(&m, Measure::RiskNeutral, &cfg, 1, |s| Ok(1.0 / s.z))?;
    println!("E[Z]      = {:.6} ± {:.6}", z.mean, z.std_error);
    println!("E~[1/Z]   = {:.6} ± {:.6}", inv.mean, inv.std_error);

    let d = m.discount();
    let direct = estimate(&m, Measure::RiskNeutral, &cfg, 2, |s| Ok(d * s.s[1]))?;
    let weighted = estimate(&m, Measure::Physical, &cfg, 3, |s| Ok(d * s.z * s.s[1]))?;
    println!(
        "S2(0) = {:.4}; under P~ {:.4} ± {:.4}; under P with Z {:.4} ± {:.4}",
        m.s0[1], direct.mean, direct.std_error, weighted.mean, weighted.std_error
    );
    Ok(())
}
