use std::path::Path;

use crate::error::{Error, Result};
use crate::types::Calibration;

/// Contents of a Middlebury `calib.txt` that the pipeline cares about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibInfo {
    pub calibration: Calibration,
    pub ndisp: Option<usize>,
}

pub fn read_calibration(path: impl AsRef<Path>) -> Result<CalibInfo> {
    parse_calibration(&std::fs::read_to_string(path)?)
}

/// Parses `key=value` lines. `cam0` supplies the focal length (first matrix
/// entry), `baseline` is given in millimeters and converted to meters,
/// `doffs` becomes the disparity offset.
pub fn parse_calibration(text: &str) -> Result<CalibInfo> {
    let mut focal = None;
    let mut baseline_mm = None;
    let mut doffs = 0.0;
    let mut ndisp = None;

    let number = |key: &str, v: &str| -> Result<f64> {
        v.trim()
            .parse::<f64>()
            .map_err(|_| Error::Format(format!("calib key {key}: bad number {v:?}")))
    };

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Format(format!("calib line without '=': {line:?}")));
        };
        let key = key.trim();
        match key {
            "cam0" => {
                let first = value
                    .trim()
                    .trim_start_matches('[')
                    .split(|c: char| c.is_whitespace() || c == ';' || c == ']')
                    .find(|s| !s.is_empty())
                    .ok_or_else(|| Error::Format("empty cam0 matrix".into()))?;
                focal = Some(number(key, first)?);
            }
            "baseline" => baseline_mm = Some(number(key, value)?),
            "doffs" => doffs = number(key, value)?,
            "ndisp" => ndisp = Some(number(key, value)? as usize),
            _ => {}
        }
    }

    let focal = focal.ok_or_else(|| Error::Format("calib missing cam0".into()))?;
    let baseline_mm = baseline_mm.ok_or_else(|| Error::Format("calib missing baseline".into()))?;
    Ok(CalibInfo {
        calibration: Calibration::new(focal, baseline_mm / 1000.0, doffs)?,
        ndisp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ADIRONDACK: &str = "cam0=[4161.221 0 1445.577; 0 4161.221 984.686; 0 0 1]
cam1=[4161.221 0 1654.636; 0 4161.221 984.686; 0 0 1]
doffs=209.059
baseline=176.252
width=2880
height=1988
ndisp=290
isint=0
vmin=33
vmax=218
dyavg=0
dymax=0
";

    #[test]
    fn parses_middlebury_file() {
        let c = parse_calibration(ADIRONDACK).unwrap();
        assert_eq!(c.calibration.focal_length_px, 4161.221);
        assert!((c.calibration.baseline - 0.176252).abs() < 1e-12);
        assert_eq!(c.calibration.disparity_offset, 209.059);
        assert_eq!(c.ndisp, Some(290));
    }

    #[test]
    fn missing_keys() {
        assert!(parse_calibration("baseline=1").is_err());
        assert!(parse_calibration("cam0=[1 0 0; 0 1 0; 0 0 1]").is_err());
        assert!(parse_calibration("nonsense").is_err());
    }
}
