use std::fmt;
use std::str::FromStr;

use crate::assembly::MaterialProperties;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tissue {
    Agar,
    Chicken,
}

impl Tissue {
    pub fn name(self) -> &'static str {
        match self {
            Tissue::Agar => "agar",
            Tissue::Chicken => "chicken",
        }
    }
}

impl fmt::Display for Tissue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tissue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "agar" => Ok(Tissue::Agar),
            "chicken" => Ok(Tissue::Chicken),
            other => Err(Error::validation(
                "material.preset",
                format!("unknown tissue `{other}` (expected `agar` or `chicken`)"),
            )),
        }
    }
}

/// Bench-top tissue parameters.
pub fn preset(tissue: Tissue) -> MaterialProperties {
    match tissue {
        Tissue::Agar => MaterialProperties {
            mu_a: 31.0,
            c_v: 4.3,
            kappa: 0.0062,
            h: 0.022,
            t_inf: 24.0,
        },
        Tissue::Chicken => MaterialProperties {
            mu_a: 26.0,
            c_v: 3.73,
            kappa: 0.0049,
            h: 0.029,
            t_inf: 24.0,
        },
    }
}

/// Empirical heat capacity and conductivity of a water-based tissue with
/// water mass fraction `w` and density `rho` (g/cm³). Returns
/// `(c_v [J/(cm³·°C)], kappa [W/(cm·°C)])`.
pub fn material_from_water_content(w: f64, rho: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::validation(
            "material.water_content",
            format!("must lie in [0, 1], got {w}"),
        ));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::validation(
            "material.density",
            format!("must be > 0, got {rho}"),
        ));
    }
    Ok(((1.55 + 2.8 * w) * rho, 0.0006 + 0.0057 * w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let a = preset("agar".parse().unwrap());
        assert_eq!((a.mu_a, a.c_v, a.kappa, a.h, a.t_inf), (31.0, 4.3, 0.0062, 0.022, 24.0));
        let c = preset("Chicken".parse().unwrap());
        assert_eq!((c.mu_a, c.c_v, c.kappa, c.h, c.t_inf), (26.0, 3.73, 0.0049, 0.029, 24.0));
        assert!("pork".parse::<Tissue>().is_err());
    }

    #[test]
    fn water_content_formulas() {
        let (cv, k) = material_from_water_content(0.98, 1.0).unwrap();
        assert!((cv - 4.294).abs() < 1e-12);
        assert!((k - 0.006186).abs() < 1e-15);
        assert_eq!(material_from_water_content(0.0, 2.0).unwrap(), (3.1, 0.0006));
        let (c0, _) = material_from_water_content(0.0, 1.0).unwrap();
        let (c1, _) = material_from_water_content(1.0, 1.0).unwrap();
        let (ch, _) = material_from_water_content(0.5, 1.0).unwrap();
        assert!((ch - 0.5 * (c0 + c1)).abs() < 1e-15);
        assert!(material_from_water_content(1.1, 1.0).is_err());
        assert!(material_from_water_content(0.5, 0.0).is_err());
    }
}
