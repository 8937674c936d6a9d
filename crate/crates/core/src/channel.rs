//! Serializable channel descriptions.

use crate::error::{Error, Result};
use crate::matfun::{self, Matrix};
use crate::medist::MeDist;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtFactor {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

/// A raw triple in JSON form: `{"x": [...], "Y": [[...]], "z": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeTriple {
    pub x: Vec<f64>,
    #[serde(rename = "Y")]
    pub y: Vec<Vec<f64>>,
    pub z: Vec<f64>,
}

impl MeTriple {
    pub fn to_dist(&self) -> Result<MeDist> {
        MeDist::from_real(&self.x, &self.y, &self.z)
    }

    pub fn from_dist(d: &MeDist) -> Result<Self> {
        if !d.is_real() {
            return Err(Error::Domain("complex triple has no real JSON form".into()));
        }
        Ok(MeTriple {
            x: d.x().iter().map(|v| v.re).collect(),
            y: matfun::to_real(d.y()),
            z: d.z().iter().map(|v| v.re).collect(),
        })
    }
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    matfun::to_real(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ChannelSpec {
    RationalLt {
        num: Vec<f64>,
        den: Vec<f64>,
    },
    ProductForm {
        factors: Vec<LtFactor>,
    },
    Rayleigh {
        #[serde(rename = "S")]
        s: f64,
    },
    Nakagami {
        m: u32,
        #[serde(rename = "S")]
        s: f64,
    },
    Sdc {
        #[serde(rename = "N")]
        n: u32,
        #[serde(rename = "S")]
        s: f64,
    },
    OstbcMrc {
        #[serde(rename = "N_tx")]
        n_tx: u32,
        #[serde(rename = "N_rx")]
        n_rx: u32,
        #[serde(rename = "R_stc", default = "one")]
        r_stc: f64,
        #[serde(rename = "S")]
        s: f64,
    },
    ZfMimo {
        #[serde(rename = "N_tx")]
        n_tx: u32,
        #[serde(rename = "N_rx")]
        n_rx: u32,
        #[serde(rename = "S")]
        s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent: Option<u32>,
    },
    MrcList {
        branches: Vec<ChannelSpec>,
    },
    SumInterference {
        components: Vec<ChannelSpec>,
    },
    OscillatoryEx2,
    Me(MeTriple),
}

fn one() -> f64 {
    1.0
}

impl ChannelSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Construction(format!("channel spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel spec serializes")
    }

    /// Replaces the mean-SNR parameter wherever the kind has one.
    pub fn with_snr(&self, snr: f64) -> Option<ChannelSpec> {
        use ChannelSpec as K;
        let mut out = self.clone();
        match &mut out {
            K::Rayleigh { s }
            | K::Nakagami { s, .. }
            | K::Sdc { s, .. }
            | K::OstbcMrc { s, .. }
            | K::ZfMimo { s, .. } => *s = snr,
            K::MrcList { branches } | K::SumInterference { components: branches } => {
                for b in branches.iter_mut() {
                    *b = b.with_snr(snr)?;
                }
            }
            _ => return None,
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_kinds() {
        let specs = vec![
            ChannelSpec::RationalLt { num: vec![50.0], den: vec![50.0, 52.0, 3.0] },
            ChannelSpec::ProductForm { factors: vec![LtFactor { num: vec![2.0], den: vec![2.0] }] },
            ChannelSpec::Rayleigh { s: 1.0 },
            ChannelSpec::Nakagami { m: 2, s: 1.5 },
            ChannelSpec::Sdc { n: 3, s: 2.0 },
            ChannelSpec::OstbcMrc { n_tx: 2, n_rx: 2, r_stc: 1.0, s: 1.0 },
            ChannelSpec::ZfMimo { n_tx: 2, n_rx: 4, s: 1.0, exponent: None },
            ChannelSpec::MrcList { branches: vec![ChannelSpec::Rayleigh { s: 1.0 }] },
            ChannelSpec::SumInterference { components: vec![ChannelSpec::Rayleigh { s: 0.5 }] },
            ChannelSpec::OscillatoryEx2,
            ChannelSpec::Me(MeTriple { x: vec![1.0], y: vec![vec![-1.0]], z: vec![1.0] }),
        ];
        for s in specs {
            let j = s.to_json();
            assert_eq!(ChannelSpec::from_json(&j).unwrap(), s, "{j}");
        }
    }

    #[test]
    fn documented_layout() {
        let s = ChannelSpec::from_json(r#"{"kind":"rayleigh","params":{"S":2.5}}"#).unwrap();
        assert_eq!(s, ChannelSpec::Rayleigh { s: 2.5 });
        let s = ChannelSpec::from_json(r#"{"kind":"oscillatory_ex2"}"#).unwrap();
        assert_eq!(s, ChannelSpec::OscillatoryEx2);
        let t = ChannelSpec::from_json(r#"{"kind":"me","params":{"x":[2],"Y":[[-2]],"z":[1]}}"#).unwrap();
        assert!(matches!(t, ChannelSpec::Me(_)));
        assert!(ChannelSpec::from_json(r#"{"kind":"warp_drive","params":{}}"#).is_err());
    }

    #[test]
    fn triple_round_trip() {
        let d = crate::medist::oscillatory_example();
        let t = MeTriple::from_dist(&d).unwrap();
        let j = serde_json::to_string(&t).unwrap();
        assert!(j.contains("\"Y\""));
        let back: MeTriple = serde_json::from_str(&j).unwrap();
        assert_eq!(back.to_dist().unwrap(), d);
    }
}
