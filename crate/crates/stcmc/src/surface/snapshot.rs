use std::io::Write;

use super::{GraphSurface, SurfaceGeometry};
use crate::error::{Result, StcmcError};
use crate::sphere::Deriv;

/// Nodal snapshot: comment header with the base sphere, then
/// `theta,phi,f,H,P,stcmc` per geometry node.
pub fn write_surface_csv<W: Write>(out: &mut W, surface: &GraphSurface, geometry: &SurfaceGeometry) -> Result<()> {
    let io = |e: std::io::Error| StcmcError::InvalidConfig(format!("write failed: {e}"));
    let f = geometry.grid.synthesize_kind(&surface.coeffs, Deriv::Value)?;
    writeln!(
        out,
        "# z0={:.17e},{:.17e},{:.17e} r0={:.17e} L_max={}",
        surface.center[0],
        surface.center[1],
        surface.center[2],
        surface.radius,
        surface.band()
    )
    .map_err(io)?;
    writeln!(out, "theta,phi,f,H,P,stcmc").map_err(io)?;
    for (n, g) in geometry.nodes.iter().enumerate() {
        let (t, p) = geometry.grid.angles(n);
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            t, p, f[n], g.mean_curvature, g.momentum_trace, g.stcmc
        )
        .map_err(io)?;
    }
    Ok(())
}
