//! Named parameter sets and axes for the standard figures.
//!
//! Every preset is a config text, so `figure --print-config` output can be
//! edited and fed to `sweep`. All use κ = −π/4 and 101 axis points. The
//! mixing-angle family can be changed through the `thetas` key.

use std::fmt;

use crate::config::{parse_config, SweepSpec};

pub const PRESETS: [&str; 8] = ["fig1a", "fig1b", "fig2", "fig3a", "fig3b", "fig4a", "fig4b", "fig5"];

const FAMILY: &str = "thetas = 0, pi/16, pi/8, pi/4\n";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPreset(pub String);

impl fmt::Display for UnknownPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown figure `{}`; available presets: {}", self.0, PRESETS.join(", "))
    }
}

impl std::error::Error for UnknownPreset {}

/// Config text of a preset.
pub fn preset_config(name: &str) -> Result<String, UnknownPreset> {
    let text = match name {
        "fig1a" | "fig1b" => {
            let gamma = if name == "fig1a" { "0.1" } else { "10" };
            format!(
                "# Coherence against the mixing angle.\n\
                 omega1 = 1\nomega2 = 1\nGamma = 1\ngamma = {gamma}\nomega0 = 1\ntemperature = 1\nkappa = -pi/4\n\
                 axis = theta\naxis_range = 0, pi/2\naxis_points = 101\naxis_scale = linear\n"
            )
        }
        "fig2" => format!(
            "# Coherence against the spectral width.\n\
             omega1 = 1\nomega2 = 1\nGamma = 1\nomega0 = 1\ntemperature = 1\nkappa = -pi/4\n\
             axis = gamma\naxis_range = 1e-10, 1e4\naxis_points = 101\naxis_scale = log\n{FAMILY}"
        ),
        "fig3a" | "fig3b" => {
            let ratio = if name == "fig3a" { "0.1" } else { "10" };
            format!(
                "# Coherence against the coupling strength at fixed gamma/Gamma.\n\
                 omega1 = 1\nomega2 = 1\ngamma_ratio = {ratio}\nomega0 = 1\ntemperature = 1\nkappa = -pi/4\n\
                 axis = Gamma\naxis_range = 1e-3, 1e3\naxis_points = 101\naxis_scale = log\n{FAMILY}"
            )
        }
        "fig4a" => format!(
            "# Coherence against the reservoir center frequency.\n\
             omega1 = 1\nomega2 = 1\nGamma = 1\ngamma = 1\ntemperature = 1\nkappa = -pi/4\n\
             axis = omega0\naxis_range = 0.01, 10\naxis_points = 101\naxis_scale = linear\n{FAMILY}"
        ),
        "fig4b" => format!(
            "# Coherence against the temperature with omega0 = gamma.\n\
             omega1 = 1\nomega2 = 1\nGamma = 1\ngamma = 1\nomega0 = 1\nkappa = -pi/4\n\
             axis = temperature\naxis_range = 0, 5\naxis_points = 101\naxis_scale = linear\n{FAMILY}"
        ),
        "fig5" => format!(
            "# Coherence against the detuning delta = omega1 - omega2 about a mean of 100.\n\
             omega1 = 100\nomega2 = 100\nGamma = 1\ngamma = 0.1\nomega0 = 100\ntemperature = 100\nkappa = -pi/4\n\
             axis = delta\naxis_range = 0, 100\naxis_points = 101\naxis_scale = linear\n{FAMILY}"
        ),
        other => return Err(UnknownPreset(other.to_string())),
    };
    Ok(text)
}

pub fn figure_preset(name: &str) -> Result<SweepSpec, UnknownPreset> {
    let text = preset_config(name)?;
    Ok(parse_config(&text).expect("preset configs are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Axis, Scale};
    use oscbath_core::ModelParams;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn every_preset_parses() {
        for name in PRESETS {
            let spec = figure_preset(name).unwrap();
            assert_eq!(spec.kappa, -FRAC_PI_4, "{name}");
            assert_eq!(spec.values.values().len(), 101, "{name}");
        }
    }

    #[test]
    fn fig1a_matches_caption() {
        let spec = figure_preset("fig1a").unwrap();
        assert_eq!(spec.base, ModelParams::symmetric(1.0, 0.0, 1.0, 0.1, 1.0, 1.0));
        assert_eq!(spec.axis, Axis::Theta);
        let v = spec.values.values();
        assert_eq!((v[0], v[100]), (0.0, FRAC_PI_2));
    }

    #[test]
    fn captions_of_the_other_figures() {
        let fig2 = figure_preset("fig2").unwrap();
        assert_eq!(fig2.axis, Axis::Gamma);
        assert_eq!(fig2.values.scale(), Scale::Log);
        let b = fig2.base;
        assert_eq!((b.omega1, b.omega2, b.omega0, b.coupling, b.temperature), (1.0, 1.0, 1.0, 1.0, 1.0));
        let fig4b = figure_preset("fig4b").unwrap();
        assert_eq!(fig4b.axis, Axis::Temperature);
        assert_eq!(fig4b.base.omega0, fig4b.base.width);
        let fig5 = figure_preset("fig5").unwrap();
        assert_eq!(fig5.axis, Axis::Delta);
        let b = fig5.base;
        assert_eq!((b.coupling, b.width, b.omega1, b.omega0, b.temperature), (1.0, 0.1, 100.0, 100.0, 100.0));
        let fig3b = figure_preset("fig3b").unwrap();
        assert_eq!(fig3b.point(7.0, 0.0).width, 70.0);
    }

    #[test]
    fn unknown_name_lists_presets() {
        let e = figure_preset("fig9").unwrap_err();
        let msg = e.to_string();
        assert!(PRESETS.iter().all(|p| msg.contains(p)));
    }
}
