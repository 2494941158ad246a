//! Deterministic geometric backend: the insertability sweep stands in for
//! the VLM's judgment, with the boundary margin mapped to a generation
//! probability through a logistic squash.

use crate::geometry::{
    best_margin_at_yaw, insertability_with_grid, min_area_rect, InsertabilityGrid,
};

use super::{
    Fidelity, GeometryQuery, InputStrategy, MatchError, MatchQuery, MatchResponse, MatchVerdict,
    MatcherBackend,
};

/// Margin-to-probability scale in millimeters.
const LOGISTIC_SCALE_MM: f64 = 0.25;
/// Matches the slack tolerance of the insertability sweep.
const FIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct OracleBackend {
    pub grid: InsertabilityGrid,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl OracleBackend {
    pub fn new() -> Self {
        Self {
            grid: InsertabilityGrid::default(),
        }
    }

    /// Minimum-rectangle silhouette test: what a single view supports once
    /// keying and concavity information is gone. The angled view keeps only
    /// the long dimension (foreshortening makes the short one unreliable).
    fn silhouette_margin(&self, g: &GeometryQuery, long_only: bool) -> Result<f64, MatchError> {
        let peg = min_area_rect(&g.peg)?;
        let hole = min_area_rect(&g.hole)?;
        let long = hole.half_extents.0 - peg.half_extents.0;
        let short = hole.half_extents.1 - peg.half_extents.1;
        Ok(if long_only { long } else { long.min(short) })
    }

    fn margin_and_verdict(
        &self,
        q: &MatchQuery,
        g: &GeometryQuery,
    ) -> Result<(f64, bool), MatchError> {
        if g.orientation_locked {
            let margin = best_margin_at_yaw(&g.peg, &g.hole, 0.0, &self.grid);
            return Ok((margin, margin >= g.clearance_mm - FIT_TOL));
        }
        match q.prompt.strategy {
            InputStrategy::CrossSectionalOnly => {
                let m = self.silhouette_margin(g, false)?;
                Ok((m, m >= g.clearance_mm - FIT_TOL))
            }
            InputStrategy::AngledOnly => {
                let m = self.silhouette_margin(g, true)?;
                Ok((m, m >= g.clearance_mm - FIT_TOL))
            }
            _ => {
                let report = insertability_with_grid(&g.peg, &g.hole, g.clearance_mm, &self.grid)?;
                Ok((report.margin_mm, report.fits))
            }
        }
    }
}

impl MatcherBackend for OracleBackend {
    fn returns_logprobs(&self) -> bool {
        true
    }

    fn answer(&self, query: &MatchQuery) -> Result<MatchResponse, MatchError> {
        let g = query.geometry.as_ref().ok_or(MatchError::MissingGeometry)?;

        if query.prompt.strategy == InputStrategy::Name {
            let matched = g.peg_label.eq_ignore_ascii_case(&g.hole_label);
            return Ok(MatchResponse {
                verdict: if matched {
                    MatchVerdict::Yes
                } else {
                    MatchVerdict::No
                },
                probability: 1.0,
                raw_text: format!("{}, {}", g.peg_label, g.hole_label),
                fidelity: Fidelity::Degraded,
            });
        }

        let (margin, fits) = self.margin_and_verdict(query, g)?;
        let verdict = if fits {
            MatchVerdict::Yes
        } else {
            MatchVerdict::No
        };

        if query.prompt.strategy == InputStrategy::NoProbability {
            return Ok(MatchResponse {
                verdict,
                probability: 1.0,
                raw_text: if fits { "Yes".into() } else { "No".into() },
                fidelity: Fidelity::Degraded,
            });
        }

        let p_yes = logistic(margin / LOGISTIC_SCALE_MM);
        let probability = match verdict {
            MatchVerdict::Yes => p_yes,
            MatchVerdict::No => 1.0 - p_yes,
        }
        .clamp(1e-9, 1.0 - 1e-9);

        Ok(MatchResponse {
            verdict,
            probability,
            raw_text: if fits { "Yes".into() } else { "No".into() },
            fidelity: Fidelity::Logprob,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::build_prompt;
    use crate::worldgen::{make_hole_polygon, make_shape, ShapeSpec};

    fn png() -> Vec<u8> {
        vec![0; 8]
    }

    fn query(
        peg: &ShapeSpec,
        hole: &ShapeSpec,
        clearance: f64,
        strategy: InputStrategy,
        locked: bool,
    ) -> MatchQuery {
        let (np, nh) = strategy.image_arity();
        MatchQuery {
            prompt: build_prompt(&vec![png(); np], &vec![png(); nh], strategy).unwrap(),
            geometry: Some(GeometryQuery {
                peg: make_shape(peg).unwrap(),
                hole: make_hole_polygon(hole, clearance).unwrap(),
                clearance_mm: clearance,
                peg_label: peg.label().to_string(),
                hole_label: hole.label().to_string(),
                orientation_locked: locked,
            }),
        }
    }

    #[test]
    fn mating_pair_is_yes_above_half() {
        let spec = ShapeSpec::Rectangle {
            width_mm: 20.0,
            height_mm: 10.0,
        };
        let oracle = OracleBackend::new();
        let r = oracle
            .answer(&query(&spec, &spec, 0.5, InputStrategy::TwoView, false))
            .unwrap();
        assert_eq!(r.verdict, MatchVerdict::Yes);
        assert!(r.probability > 0.5, "p = {}", r.probability);
    }

    #[test]
    fn oversize_peg_is_no_above_half() {
        let peg = ShapeSpec::Rectangle {
            width_mm: 24.0,
            height_mm: 18.0,
        };
        let hole = ShapeSpec::Rectangle {
            width_mm: 12.0,
            height_mm: 8.0,
        };
        let oracle = OracleBackend::new();
        let r = oracle
            .answer(&query(&peg, &hole, 0.5, InputStrategy::TwoView, false))
            .unwrap();
        assert_eq!(r.verdict, MatchVerdict::No);
        assert!(r.probability > 0.5, "No-side p = {}", r.probability);
    }

    #[test]
    fn oracle_is_deterministic() {
        let peg = ShapeSpec::DShape { diameter_mm: 18.0 };
        let oracle = OracleBackend::new();
        let q = query(&peg, &peg, 0.5, InputStrategy::TwoView, false);
        let a = oracle.answer(&q).unwrap();
        let b = oracle.answer(&q).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_geometry_is_an_error() {
        let oracle = OracleBackend::new();
        let q = MatchQuery {
            prompt: build_prompt(&[png(), png()], &[png(), png()], InputStrategy::TwoView).unwrap(),
            geometry: None,
        };
        assert!(matches!(
            oracle.answer(&q),
            Err(MatchError::MissingGeometry)
        ));
    }

    #[test]
    fn name_strategy_matches_labels_only() {
        let a = ShapeSpec::Rectangle {
            width_mm: 20.0,
            height_mm: 10.0,
        };
        let b = ShapeSpec::Rectangle {
            width_mm: 28.0,
            height_mm: 9.0,
        };
        let c = ShapeSpec::DShape { diameter_mm: 18.0 };
        let oracle = OracleBackend::new();
        // Different rectangles share a label: false positive by design.
        let r = oracle
            .answer(&query(&a, &b, 0.5, InputStrategy::Name, false))
            .unwrap();
        assert_eq!(r.verdict, MatchVerdict::Yes);
        let r = oracle
            .answer(&query(&a, &c, 0.5, InputStrategy::Name, false))
            .unwrap();
        assert_eq!(r.verdict, MatchVerdict::No);
    }

    #[test]
    fn no_probability_pins_degraded_one() {
        let spec = ShapeSpec::Trapezoid {
            base_mm: 22.0,
            top_mm: 12.0,
            height_mm: 12.0,
        };
        let oracle = OracleBackend::new();
        let r = oracle
            .answer(&query(
                &spec,
                &spec,
                0.5,
                InputStrategy::NoProbability,
                false,
            ))
            .unwrap();
        assert_eq!(r.verdict, MatchVerdict::Yes);
        assert_eq!(r.probability, 1.0);
        assert_eq!(r.fidelity, Fidelity::Degraded);
    }

    #[test]
    fn locked_orientation_rejects_rotated_hole() {
        let spec = ShapeSpec::Trapezoid {
            base_mm: 22.0,
            top_mm: 12.0,
            height_mm: 12.0,
        };
        let oracle = OracleBackend::new();
        // Hole shown rotated 180 degrees: silhouette mismatch as displayed.
        let mut q = query(&spec, &spec, 0.5, InputStrategy::TwoView, true);
        if let Some(g) = q.geometry.as_mut() {
            g.hole = g.hole.rotated(180.0);
        }
        let r = oracle.answer(&q).unwrap();
        assert_eq!(r.verdict, MatchVerdict::No);
        // Aligned version passes.
        let q = query(&spec, &spec, 0.5, InputStrategy::TwoView, true);
        let r = oracle.answer(&q).unwrap();
        assert_eq!(r.verdict, MatchVerdict::Yes);
    }
}
