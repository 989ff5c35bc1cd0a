//! `ω*` sweep with the `T` rows evaluated in parallel when the `parallel`
//! feature is on. Rows are reassembled in grid order, so the result does not
//! depend on scheduling.

use stabcert_core::stabilizer::{sweep_row, validate_sweep_grids, OmegaStarEstimate, SweepOptions};
use stabcert_core::{LinearSystem, Result};

pub fn sweep(
    sys: &LinearSystem,
    alphas: &[f64],
    horizons: &[f64],
    opts: &SweepOptions,
) -> Result<OmegaStarEstimate> {
    validate_sweep_grids(alphas, horizons)?;
    #[cfg(feature = "parallel")]
    let rows: Vec<_> = {
        use rayon::prelude::*;
        horizons
            .par_iter()
            .map(|&t| sweep_row(sys, t, alphas, &opts.weak))
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<_> = horizons
        .iter()
        .map(|&t| sweep_row(sys, t, alphas, &opts.weak))
        .collect::<Result<Vec<_>>>()?;
    let null = rows.iter().any(|(_, nc)| *nc);
    let cells = rows.into_iter().flat_map(|(c, _)| c).collect();
    Ok(OmegaStarEstimate::from_cells(cells, null, opts.floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use stabcert_core::model::integrator;
    use stabcert_core::sweep_omega_star;

    #[test]
    fn matches_sequential_sweep() {
        let sys = integrator();
        let a = [0.2, 0.5, 0.8];
        let t = [0.5, 1.0, 2.0];
        let par = sweep(&sys, &a, &t, &SweepOptions::default()).unwrap();
        let seq = sweep_omega_star(&sys, &a, &t).unwrap();
        assert_eq!(par.grid, seq.grid);
        assert_eq!(par.argmin, seq.argmin);
    }
}
