use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temperatures by replica slot; slot 0 is the untempered posterior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureLadder {
    temperatures: Vec<f64>,
    t_max: f64,
}

impl TemperatureLadder {
    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn len(&self) -> usize {
        self.temperatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temperatures.is_empty()
    }

    pub fn get(&self, slot: usize) -> f64 {
        self.temperatures[slot]
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn is_flat(&self) -> bool {
        self.temperatures.iter().all(|&t| t == 1.0)
    }
}

/// Geometric spacing `T_i = T_max^((i-1)/(M-1))` for `i = 1..=M`.
pub fn build_ladder(replicas: usize, t_max: f64) -> Result<TemperatureLadder> {
    if replicas < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 replicas, got {replicas}")));
    }
    if !(t_max >= 1.0) || !t_max.is_finite() {
        return Err(Error::InvalidConfig(format!("maximum temperature must be >= 1, got {t_max}")));
    }
    let span = (replicas - 1) as f64;
    let temperatures = (0..replicas).map(|i| t_max.powf(i as f64 / span)).collect();
    Ok(TemperatureLadder { temperatures, t_max })
}

/// Second sampling stage: from `stage2_start` on, every replica samples the posterior itself.
pub fn stage_transition(ladder: &TemperatureLadder, progress: usize, stage2_start: usize) -> TemperatureLadder {
    if progress < stage2_start {
        return ladder.clone();
    }
    TemperatureLadder { temperatures: vec![1.0; ladder.len()], t_max: ladder.t_max }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_interior() {
        let l = build_ladder(8, 2.0).unwrap();
        assert_eq!(l.get(0), 1.0);
        assert_eq!(l.get(7), 2.0);
        assert!((l.get(4) - 1.48599).abs() < 1e-5);
        assert!(l.temperatures().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn unit_maximum_is_flat() {
        assert!(build_ladder(5, 1.0).unwrap().is_flat());
    }

    #[test]
    fn rejects_bad_ladders() {
        assert!(build_ladder(1, 2.0).is_err());
        assert!(build_ladder(4, 0.5).is_err());
        assert!(build_ladder(4, f64::NAN).is_err());
    }

    #[test]
    fn transition_flattens_only_after_start() {
        let l = build_ladder(4, 3.0).unwrap();
        assert_eq!(stage_transition(&l, 99, 100), l);
        let flat = stage_transition(&l, 100, 100);
        assert!(flat.is_flat());
        assert_eq!(flat.len(), 4);
    }
}
