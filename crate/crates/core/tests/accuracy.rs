//! The limiters must not cost accuracy on smooth data: on the smooth
//! advection preset every limited variant stays within 5% of the plain
//! scheme's error.

use idp_pampa::driver::convergence::errors;
use idp_pampa::driver::run::{run, RunOptions};
use idp_pampa::driver::{preset, RunConfig};
use idp_pampa::limiters::{MpParams, OscillationControl};

fn avg_error(cfg: &RunConfig) -> f64 {
    let outcome = run(cfg, &RunOptions::default()).unwrap();
    errors(cfg, &outcome).unwrap().0
}

#[test]
fn limited_variants_match_plain_scheme_on_smooth_advection() {
    for n in [160, 320] {
        let base = preset("advection_smooth").unwrap().with_cells(n);
        let mut plain = base.clone();
        plain.limiter.idp = false;
        let reference = avg_error(&plain);

        for (label, idp, osc) in [
            ("idp", true, OscillationControl::None),
            ("idp+oe", true, OscillationControl::Oe),
            ("idp+mp", true, OscillationControl::Mp(MpParams::default())),
        ] {
            let mut cfg = base.clone();
            cfg.limiter.idp = idp;
            cfg.limiter.oscillation = osc;
            let e = avg_error(&cfg);
            let change = (e - reference).abs() / reference;
            assert!(change < 0.05, "N = {n}, {label}: error {e:.4e} vs plain {reference:.4e}");
        }
    }
}
