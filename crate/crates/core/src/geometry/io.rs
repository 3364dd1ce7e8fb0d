use serde::{Deserialize, Serialize};

use super::{AggregatePolygon, GeometryConfig, GeometryError, Mesostructure, Point};
use crate::rng::RNG_NAME;

/// Format tag written into every mesostructure file.
pub const MESOSTRUCTURE_FORMAT: &str = "mesofrac-mesostructure/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MesostructureFile {
    format: String,
    rng: String,
    domain_length_mm: f64,
    itz_thickness_mm: f64,
    seed: u64,
    generator: GeneratorSettings,
    achieved_vf: f64,
    aggregates: Vec<RingPair>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorSettings {
    target_volume_fraction: f64,
    vf_tolerance: f64,
    min_gap_mm: f64,
    semi_axis_range_mm: (f64, f64),
    points_per_ellipse: usize,
    max_placement_attempts: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RingPair {
    outer: Vec<Point>,
    inner: Vec<Point>,
}

/// Serialize to pretty-printed JSON. Doubles are written in shortest
/// round-trip form, so parsing restores every field bit for bit.
pub fn serialize_mesostructure(meso: &Mesostructure) -> String {
    let c = &meso.config;
    let file = MesostructureFile {
        format: MESOSTRUCTURE_FORMAT.to_string(),
        rng: RNG_NAME.to_string(),
        domain_length_mm: c.domain_length,
        itz_thickness_mm: c.itz_thickness,
        seed: c.seed,
        generator: GeneratorSettings {
            target_volume_fraction: c.target_volume_fraction,
            vf_tolerance: c.vf_tolerance,
            min_gap_mm: c.min_gap,
            semi_axis_range_mm: c.semi_axis_range,
            points_per_ellipse: c.points_per_ellipse,
            max_placement_attempts: c.max_placement_attempts,
        },
        achieved_vf: meso.achieved_volume_fraction,
        aggregates: meso
            .aggregates
            .iter()
            .map(|a| RingPair { outer: a.outer.clone(), inner: a.inner.clone() })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("mesostructure serializes");
    s.push('\n');
    s
}

pub fn parse_mesostructure(text: &str) -> Result<Mesostructure, GeometryError> {
    let file: MesostructureFile = serde_json::from_str(text).map_err(|e| GeometryError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let field_error = |message: String| GeometryError::Parse { line: 0, column: 0, message };
    if file.format != MESOSTRUCTURE_FORMAT {
        return Err(field_error(format!("format: expected `{MESOSTRUCTURE_FORMAT}`, found `{}`", file.format)));
    }
    if file.rng != RNG_NAME {
        return Err(field_error(format!("rng: unsupported generator `{}`", file.rng)));
    }
    let g = file.generator;
    let config = GeometryConfig {
        domain_length: file.domain_length_mm,
        target_volume_fraction: g.target_volume_fraction,
        vf_tolerance: g.vf_tolerance,
        itz_thickness: file.itz_thickness_mm,
        min_gap: g.min_gap_mm,
        semi_axis_range: g.semi_axis_range_mm,
        points_per_ellipse: g.points_per_ellipse,
        max_placement_attempts: g.max_placement_attempts,
        seed: file.seed,
    };
    let aggregates = file
        .aggregates
        .into_iter()
        .enumerate()
        .map(|(i, pair)| {
            for (name, ring) in [("outer", &pair.outer), ("inner", &pair.inner)] {
                if ring.len() < 3 {
                    return Err(field_error(format!(
                        "aggregates[{i}].{name}: ring needs at least 3 vertices, found {}",
                        ring.len()
                    )));
                }
            }
            AggregatePolygon::from_rings(pair.outer, pair.inner)
                .map_err(|e| field_error(format!("aggregates[{i}]: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Mesostructure { config, aggregates, achieved_volume_fraction: file.achieved_vf })
}
