//! Landscape construction by name.

use focal_core::landscape::{
    Ellipse, EllipseSpec, RankDeficientQuadratic, RankDeficientSpec, Sphere,
};
use focal_core::pulse::{PulseSpec, Shg};
use focal_core::Landscape;

use crate::config::LandscapeConfig;
use crate::{config_error, Result};

pub const LANDSCAPES: [&str; 4] = ["ellipse", "rankdef", "shg", "sphere"];

pub type DynLandscape = Box<dyn Landscape + Send + Sync>;

pub fn build(cfg: &LandscapeConfig) -> Result<DynLandscape> {
    Ok(match cfg {
        &LandscapeConfig::Ellipse {
            n,
            condition,
            noise,
        } => Box::new(Ellipse::new(EllipseSpec {
            n,
            condition,
            noise,
        })?),
        LandscapeConfig::Rankdef {
            n,
            rank,
            spectrum,
            span_decades,
            rotation_seed,
            noise,
        } => {
            let spectrum = LandscapeConfig::rankdef_spectrum(*rank, spectrum, *span_decades);
            if spectrum.len() != *rank {
                return Err(config_error(format!(
                    "rankdef spectrum has {} entries but rank is {rank}",
                    spectrum.len()
                )));
            }
            Box::new(RankDeficientQuadratic::new(RankDeficientSpec {
                n: *n,
                spectrum,
                rotation_seed: Some(*rotation_seed),
                noise: *noise,
            })?)
        }
        &LandscapeConfig::Shg {
            pixels,
            fwhm,
            group,
            oversampling,
            padding,
            noise,
        } => Box::new(Shg::new(
            PulseSpec {
                pixels,
                fwhm,
                group,
                oversampling,
                padding,
            },
            noise,
        )?),
        &LandscapeConfig::Sphere { n, noise } => Box::new(Sphere::new(n, noise)?),
    })
}

/// Default parameters for `name`; `n` overrides the dimension (pixel count
/// for `shg`).
pub fn default_config(name: &str, n: Option<usize>) -> Result<LandscapeConfig> {
    let dim = n.unwrap_or(80);
    Ok(match name {
        "ellipse" => LandscapeConfig::Ellipse {
            n: dim,
            condition: 1e4,
            noise: 0.025,
        },
        "rankdef" => LandscapeConfig::Rankdef {
            n: dim,
            rank: 6,
            spectrum: None,
            span_decades: 0.5,
            rotation_seed: 7,
            noise: 0.005,
        },
        "shg" => {
            let p = PulseSpec::default();
            LandscapeConfig::Shg {
                pixels: dim,
                fwhm: p.fwhm,
                group: p.group,
                oversampling: p.oversampling,
                padding: p.padding,
                noise: 0.0,
            }
        }
        "sphere" => LandscapeConfig::Sphere { n: dim, noise: 0.0 },
        other => {
            return Err(config_error(format!(
                "unknown landscape `{other}` (known: {})",
                LANDSCAPES.join(", ")
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_registered_name_builds() {
        for name in LANDSCAPES {
            let cfg = default_config(name, Some(12)).unwrap();
            let l = build(&cfg).unwrap();
            assert_eq!(l.name(), name);
            assert_eq!(l.dim(), cfg.dim());
        }
        assert!(default_config("rosenbrock", None).is_err());
    }
}
