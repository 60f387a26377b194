//! The seven architectural layers every attack and defense lives in.

use serde::{Deserialize, Serialize};

/// One of the seven architectural layers, ordered from hardware up to the
/// human-facing interface. The ordinal fixes matrix row/column order and
/// radar axis order everywhere in the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LayerId {
    #[serde(rename = "P")]
    Physical,
    #[serde(rename = "SP")]
    SensingPerception,
    #[serde(rename = "DP")]
    DataProcessing,
    #[serde(rename = "MW")]
    Middleware,
    #[serde(rename = "DM")]
    DecisionMaking,
    #[serde(rename = "AP")]
    Application,
    #[serde(rename = "SI")]
    SocialInterface,
}

pub const LAYER_COUNT: usize = 7;

impl LayerId {
    /// All layers in ordinal order.
    pub const ALL: [LayerId; LAYER_COUNT] = [
        LayerId::Physical,
        LayerId::SensingPerception,
        LayerId::DataProcessing,
        LayerId::Middleware,
        LayerId::DecisionMaking,
        LayerId::Application,
        LayerId::SocialInterface,
    ];

    pub fn code(self) -> &'static str {
        match self {
            LayerId::Physical => "P",
            LayerId::SensingPerception => "SP",
            LayerId::DataProcessing => "DP",
            LayerId::Middleware => "MW",
            LayerId::DecisionMaking => "DM",
            LayerId::Application => "AP",
            LayerId::SocialInterface => "SI",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            LayerId::Physical => "Physical",
            LayerId::SensingPerception => "Sensing and Perception",
            LayerId::DataProcessing => "Data Processing",
            LayerId::Middleware => "Middleware",
            LayerId::DecisionMaking => "Decision-Making",
            LayerId::Application => "Application",
            LayerId::SocialInterface => "Social Interface",
        }
    }

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_code(code: &str) -> Option<LayerId> {
        LayerId::ALL.iter().copied().find(|l| l.code() == code)
    }

    pub fn from_ordinal(ordinal: usize) -> Option<LayerId> {
        LayerId::ALL.get(ordinal).copied()
    }
}

impl std::fmt::Display for LayerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinals_are_a_bijection_onto_0_to_6() {
        let mut seen = [false; LAYER_COUNT];
        for layer in LayerId::ALL {
            let o = layer.ordinal();
            assert!(o < LAYER_COUNT);
            assert!(!seen[o], "duplicate ordinal {o}");
            seen[o] = true;
            assert_eq!(LayerId::from_ordinal(o), Some(layer));
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn codes_round_trip() {
        for layer in LayerId::ALL {
            assert_eq!(LayerId::from_code(layer.code()), Some(layer));
        }
        assert_eq!(LayerId::from_code("XX"), None);
    }

    #[test]
    fn serde_uses_codes() {
        let json = serde_json::to_string(&LayerId::SensingPerception).unwrap();
        assert_eq!(json, "\"SP\"");
        let back: LayerId = serde_json::from_str("\"DM\"").unwrap();
        assert_eq!(back, LayerId::DecisionMaking);
    }
}
