//! Closed-form surface-code resource and error estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest distance scanned by [`min_distance_for`].
pub const MAX_DISTANCE: u32 = 10_001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Standard,
    AncillaReuse,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Variant::Standard),
            "ancilla_reuse" | "ancilla-reuse" | "reuse" => Ok(Variant::AncillaReuse),
            _ => Err(Error::Domain(format!("unknown code variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    distance: u32,
    variant: Variant,
}

impl CodeParams {
    pub fn new(distance: u32, variant: Variant) -> Result<Self> {
        check_distance(distance)?;
        Ok(Self { distance, variant })
    }

    pub fn distance(&self) -> u32 {
        self.distance
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }
}

fn check_distance(d: u32) -> Result<()> {
    if d < 3 || d.is_multiple_of(2) {
        Err(Error::Domain(format!("code distance must be odd and at least 3, got {d}")))
    } else {
        Ok(())
    }
}

/// Rotated surface code: `d²` data qubits plus `d²−1` measurement ancillas,
/// halved when X and Z checks share ancillas.
pub fn physical_qubits(cp: &CodeParams) -> u64 {
    let d2 = u64::from(cp.distance).pow(2);
    match cp.variant {
        Variant::Standard => d2 + (d2 - 1),
        Variant::AncillaReuse => d2 + (d2 - 1) / 2,
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 0.01 {
        Ok(())
    } else {
        Err(Error::Domain(format!("physical error rate {p} outside (0, 0.01]")))
    }
}

/// `0.03 · (p / 0.01)^((d+1)/2)` per code cycle.
pub fn logical_error_rate(d: u32, p: f64) -> Result<f64> {
    check_p(p)?;
    if d.is_multiple_of(2) {
        return Err(Error::Domain(format!("code distance must be odd, got {d}")));
    }
    Ok(0.03 * (p / 0.01).powi(d.div_ceil(2) as i32))
}

/// Smallest odd `d ≥ 3` whose logical error rate is at most `target`.
///
/// Comparisons allow a relative slack of `1e-12` so that targets written as
/// exact formula values are met by the corresponding distance.
pub fn min_distance_for(target: f64, p: f64) -> Result<u32> {
    check_p(p)?;
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!("target {target} outside (0, 1)")));
    }
    let meets = |d: u32| -> Result<bool> { Ok(logical_error_rate(d, p)? <= target * (1.0 + 1e-12)) };
    let mut d = 3;
    while d <= MAX_DISTANCE {
        if meets(d)? {
            return Ok(d);
        }
        d += 2;
    }
    Err(Error::Infeasible(format!(
        "no distance up to {MAX_DISTANCE} reaches logical error {target} at p = {p}"
    )))
}

pub fn correctable_weight(d: u32) -> u32 {
    d.saturating_sub(1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistillationVolume {
    /// Footprint in `d × d` tiles.
    pub area_tiles: u64,
    /// Code cycles for one round.
    pub cycles: u64,
    /// Physical space-time volume `area_tiles · d² · cycles`.
    pub volume: u64,
}

pub const FIFTEEN_TO_ONE: &str = "15-to-1";
pub const TWENTY_TO_FOUR: &str = "20-to-4";
/// Two cascaded 15-to-1 levels.
pub const TWO_LEVEL_FIFTEEN_TO_ONE: &str = "15-to-1x2";

pub fn distillation_volume(protocol: &str, d: u32) -> Result<DistillationVolume> {
    let (area_tiles, cycles_per_d) = match protocol {
        FIFTEEN_TO_ONE => (11 * 5, 12),
        TWENTY_TO_FOUR => (14, 4),
        _ => return Err(Error::UnknownProtocol(protocol.to_string())),
    };
    let d = u64::from(d);
    let cycles = cycles_per_d * d;
    Ok(DistillationVolume {
        area_tiles,
        cycles,
        volume: area_tiles * d * d * cycles,
    })
}

/// Output error of one distillation block fed with states of error `p`.
pub fn distilled_error(protocol: &str, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("input error rate {p} outside [0, 1)")));
    }
    match protocol {
        FIFTEEN_TO_ONE => Ok(35.0 * p.powi(3)),
        TWENTY_TO_FOUR => Ok(p.powi(2)),
        TWO_LEVEL_FIFTEEN_TO_ONE => distilled_error(FIFTEEN_TO_ONE, distilled_error(FIFTEEN_TO_ONE, p)?),
        _ => Err(Error::UnknownProtocol(protocol.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadProfile {
    pub t_count: u64,
    pub t_depth: u64,
    pub p_phys: f64,
    /// Error budget per distilled magic state.
    pub target_logical_error: f64,
}

impl WorkloadProfile {
    pub fn validate(&self) -> Result<()> {
        if self.t_depth == 0 || self.t_count < self.t_depth {
            return Err(Error::Domain(format!(
                "need t_count >= t_depth >= 1, got {} and {}",
                self.t_count, self.t_depth
            )));
        }
        for (name, v) in [("p_phys", self.p_phys), ("target_logical_error", self.target_logical_error)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("{name} = {v} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeThresholds {
    /// Minimum `t_count / t_depth` treated as high-rate streaming.
    pub streaming_ratio: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { streaming_ratio: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub regime: String,
    pub protocol: String,
    /// Space-time cost per output state in units of `d³`.
    pub cost_per_state_d3: f64,
}

/// Workload regime classification.
///
/// A target at or below single-level 15-to-1 output error needs two levels
/// whatever the parallelism, so that test runs first; then high
/// `t_count / t_depth` selects the multi-output block.
pub fn recommend_protocol(w: &WorkloadProfile, thresholds: &RegimeThresholds) -> Result<Recommendation> {
    w.validate()?;
    let rec = |regime: &str, protocol: &str, cost: f64| Recommendation {
        regime: regime.to_string(),
        protocol: protocol.to_string(),
        cost_per_state_d3: cost,
    };
    let ratio = w.t_count as f64 / w.t_depth as f64;
    Ok(if w.target_logical_error <= distilled_error(FIFTEEN_TO_ONE, w.p_phys)? {
        rec("ultra_low_error", TWO_LEVEL_FIFTEEN_TO_ONE, 25.9)
    } else if ratio >= thresholds.streaming_ratio {
        rec("high_rate_streaming", TWENTY_TO_FOUR, 27.0)
    } else {
        rec("resource_constrained", FIFTEEN_TO_ONE, 6.3)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub distance: u32,
    pub variant: Variant,
    pub physical_qubits: u64,
    pub logical_error_per_round: f64,
    /// Smallest distance meeting the workload target.
    pub recommended_distance: u32,
    pub recommendation: Recommendation,
    /// Volume of one block of the recommended protocol's base stage.
    pub distillation_volume: DistillationVolume,
    pub distilled_output_error: f64,
}

/// Full estimate; `distance` defaults to the recommended one.
pub fn estimate(
    distance: Option<u32>,
    variant: Variant,
    w: &WorkloadProfile,
    thresholds: &RegimeThresholds,
) -> Result<ResourceReport> {
    let recommendation = recommend_protocol(w, thresholds)?;
    let recommended_distance = min_distance_for(w.target_logical_error, w.p_phys)?;
    let cp = CodeParams::new(distance.unwrap_or(recommended_distance), variant)?;
    let base = if recommendation.protocol == TWENTY_TO_FOUR {
        TWENTY_TO_FOUR
    } else {
        FIFTEEN_TO_ONE
    };
    Ok(ResourceReport {
        distance: cp.distance,
        variant,
        physical_qubits: physical_qubits(&cp),
        logical_error_per_round: logical_error_rate(cp.distance, w.p_phys)?,
        recommended_distance,
        distillation_volume: distillation_volume(base, cp.distance)?,
        distilled_output_error: distilled_error(&recommendation.protocol, w.p_phys)?,
        recommendation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs()
    }

    #[test]
    fn qubit_counts() {
        let q = |d, v| physical_qubits(&CodeParams::new(d, v).unwrap());
        assert_eq!(q(27, Variant::Standard), 1457);
        assert_eq!(q(31, Variant::AncillaReuse), 1441);
        assert_eq!(q(3, Variant::Standard), 17);
        assert!(CodeParams::new(4, Variant::Standard).is_err());
        assert!(CodeParams::new(1, Variant::Standard).is_err());
    }

    #[test]
    fn logical_rates() {
        for d in [3, 5, 11] {
            assert_eq!(logical_error_rate(d, 0.01).unwrap(), 0.03);
        }
        assert!(close(logical_error_rate(3, 0.001).unwrap(), 3e-4));
        assert!(close(logical_error_rate(11, 0.001).unwrap(), 3e-8));
        assert!(logical_error_rate(3, 0.02).is_err());
        assert!(logical_error_rate(3, 0.0).is_err());
        assert!(logical_error_rate(4, 0.001).is_err());
    }

    #[test]
    fn distance_search() {
        assert_eq!(min_distance_for(3e-4, 0.001).unwrap(), 3);
        assert_eq!(min_distance_for(1e-8, 0.001).unwrap(), 13);
        assert_eq!(min_distance_for(0.03, 0.01).unwrap(), 3);
        assert!(matches!(min_distance_for(0.0299, 0.01), Err(Error::Infeasible(_))));
    }

    #[test]
    fn distillation() {
        assert_eq!(correctable_weight(3), 1);
        assert_eq!(correctable_weight(5), 2);
        assert_eq!(correctable_weight(1), 0);
        assert_eq!(distillation_volume("15-to-1", 1).unwrap().volume, 660);
        assert_eq!(distillation_volume("15-to-1", 3).unwrap().volume, 660 * 27);
        assert_eq!(distillation_volume("20-to-4", 5).unwrap().volume, 56 * 125);
        assert!(distillation_volume("7-to-1", 3).is_err());
        assert!(close(distilled_error("15-to-1", 1e-4).unwrap(), 3.5e-11));
        assert_eq!(distilled_error("15-to-1", 0.0).unwrap(), 0.0);
        let two = distilled_error(TWO_LEVEL_FIFTEEN_TO_ONE, 1e-4).unwrap();
        assert!(close(two, 35.0 * 3.5e-11f64.powi(3)));
    }

    #[test]
    fn workload_rows() {
        let row = |t_count: u64, t_depth: u64| WorkloadProfile {
            t_count,
            t_depth,
            p_phys: 1e-4,
            target_logical_error: 0.01 / t_count as f64,
        };
        let th = RegimeThresholds::default();
        let r = recommend_protocol(&row(100_000_000, 1_000_000), &th).unwrap();
        assert_eq!((r.protocol.as_str(), r.cost_per_state_d3), ("20-to-4", 27.0));
        let r = recommend_protocol(&row(10_000_000_000, 10_000), &th).unwrap();
        assert_eq!((r.protocol.as_str(), r.cost_per_state_d3), ("15-to-1x2", 25.9));
        let r = recommend_protocol(&row(1_000_000, 1_000_000), &th).unwrap();
        assert_eq!((r.protocol.as_str(), r.cost_per_state_d3), ("15-to-1", 6.3));
        assert!(recommend_protocol(&row(10, 100), &th).is_err());
    }

    #[test]
    fn full_estimate() {
        let w = WorkloadProfile {
            t_count: 1_000_000,
            t_depth: 1_000_000,
            p_phys: 1e-4,
            target_logical_error: 1e-8,
        };
        let r = estimate(None, Variant::Standard, &w, &RegimeThresholds::default()).unwrap();
        assert_eq!(r.recommended_distance, r.distance);
        assert!(r.logical_error_per_round <= 1e-8);
        assert_eq!(r.physical_qubits, 2 * u64::from(r.distance).pow(2) - 1);
        let r = estimate(Some(27), Variant::AncillaReuse, &w, &RegimeThresholds::default()).unwrap();
        assert_eq!(r.distance, 27);
    }
}
