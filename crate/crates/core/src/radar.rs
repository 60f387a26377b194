//! Seven-axis radar chart of layer scores as a self-contained SVG.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::layer::{LayerId, LAYER_COUNT};

const SIZE: f64 = 800.0;
const CENTER: f64 = SIZE / 2.0;
const RADIUS: f64 = 300.0;
const MAX_SCORE: f64 = 5.0;

fn axis_point(ordinal: usize, value: f64) -> (f64, f64) {
    // Axis 0 points straight up; the rest proceed clockwise in ordinal order.
    let angle = -std::f64::consts::FRAC_PI_2
        + ordinal as f64 * (2.0 * std::f64::consts::PI / LAYER_COUNT as f64);
    let r = value / MAX_SCORE * RADIUS;
    (CENTER + r * angle.cos(), CENTER + r * angle.sin())
}

fn polygon_points(scores: &BTreeMap<LayerId, f64>) -> String {
    LayerId::ALL
        .iter()
        .map(|&layer| {
            let (x, y) = axis_point(layer.ordinal(), scores[&layer]);
            format!("{x:.2},{y:.2}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn validate(scores: &BTreeMap<LayerId, f64>) -> Result<()> {
    for layer in LayerId::ALL {
        match scores.get(&layer) {
            None => {
                return Err(Error::Domain(format!(
                    "radar needs a score for layer {}",
                    layer.code()
                )))
            }
            Some(&s) if !(0.0..=MAX_SCORE).contains(&s) => {
                return Err(Error::Domain(format!(
                    "layer {} score {} outside [0, 5]",
                    layer.code(),
                    s
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Render layer scores (0–5) on seven axes in ordinal order, gridlines at
/// the integers. Output is deterministic for identical input. The optional
/// overlay draws a second platform on the same axes.
pub fn emit_radar_svg(
    scores: &BTreeMap<LayerId, f64>,
    overlay: Option<&BTreeMap<LayerId, f64>>,
) -> Result<Vec<u8>> {
    validate(scores)?;
    if let Some(second) = overlay {
        validate(second)?;
    }

    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SIZE} {SIZE}\" \
         width=\"{SIZE}\" height=\"{SIZE}\">"
    )
    .expect("string write");
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");

    // Integer gridline rings.
    for ring in 1..=5 {
        let fake: BTreeMap<LayerId, f64> =
            LayerId::ALL.iter().map(|&l| (l, ring as f64)).collect();
        write!(
            svg,
            "<polygon points=\"{}\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>",
            polygon_points(&fake)
        )
        .expect("string write");
    }

    // Axes and labels.
    for layer in LayerId::ALL {
        let (x, y) = axis_point(layer.ordinal(), MAX_SCORE);
        write!(
            svg,
            "<line x1=\"{CENTER:.2}\" y1=\"{CENTER:.2}\" x2=\"{x:.2}\" y2=\"{y:.2}\" \
             stroke=\"#999999\" stroke-width=\"1\"/>"
        )
        .expect("string write");
        let (lx, ly) = axis_point(layer.ordinal(), MAX_SCORE * 1.12);
        write!(
            svg,
            "<text x=\"{lx:.2}\" y=\"{ly:.2}\" font-family=\"sans-serif\" font-size=\"20\" \
             text-anchor=\"middle\" dominant-baseline=\"middle\">{}</text>",
            layer.code()
        )
        .expect("string write");
    }

    write!(
        svg,
        "<polygon points=\"{}\" fill=\"#1f77b4\" fill-opacity=\"0.35\" \
         stroke=\"#1f77b4\" stroke-width=\"2\"/>",
        polygon_points(scores)
    )
    .expect("string write");
    if let Some(second) = overlay {
        write!(
            svg,
            "<polygon points=\"{}\" fill=\"#d62728\" fill-opacity=\"0.25\" \
             stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>",
            polygon_points(second)
        )
        .expect("string write");
    }
    svg.push_str("</svg>");
    Ok(svg.into_bytes())
}
