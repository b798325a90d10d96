//! Scenario-file parsing, material dataset loading, and bit-stable
//! CSV/JSON emission of traces, switch-point summaries, loss curves, and
//! contour data.
//!
//! Serialization is pinned to `f64`: trace CSV uses 17 significant decimal
//! digits (lossless double round-trip) and JSON uses the shortest exact
//! representation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::{Contour, LossPoint, MaterialRecord, SwitchPointResult};
use crate::error::{Error, Result};
use crate::optics::{ApertureSpec, GratingSpec};
use crate::resonator::{IntensityTrace, ScenarioConfig, TraceRow};

/// Bundled MIP/MFP rows, back-derived from the headline grating
/// amplitudes (the survey figure is plotted, not tabulated).
pub const BUILTIN_MATERIALS_CSV: &str = include_str!("../data/materials.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Scenario(format!(
                "unknown output format \"{other}\" (expected \"csv\" or \"json\")"
            ))),
        }
    }
}

/// Output request carried by a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub format: Option<OutputFormat>,
    pub path: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    grating: GratingSection,
    aperture: Option<ApertureSection>,
    run: RunSection,
    output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GratingSection {
    kind: String,
    a_over_pi: Option<f64>,
    t_over_xi: Option<f64>,
    thickness_nm: Option<f64>,
    mfp_nm: Option<f64>,
    pitch_nm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApertureSection {
    passed_orders: Vec<i32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    m: Option<usize>,
    n_max: usize,
    attenuation: Option<bool>,
    tracked_orders: Option<Vec<i32>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    format: Option<String>,
    path: Option<String>,
}

/// Parses a TOML scenario document into a fully validated config.
///
/// Unknown keys are rejected with the offending key named; units live in
/// the key names (`a_over_pi`, `thickness_nm`) so there is nothing to
/// guess.
pub fn parse_scenario(document: &str) -> Result<(ScenarioConfig<f64>, Option<OutputSpec>)> {
    let file: ScenarioFile =
        toml::from_str(document).map_err(|e| Error::Scenario(e.to_string()))?;

    let mut grating = match file.grating.kind.as_str() {
        "crystal_two_beam" => {
            if file.grating.a_over_pi.is_some() {
                return Err(Error::Scenario(
                    "grating.a_over_pi does not apply to kind = \"crystal_two_beam\"".into(),
                ));
            }
            let r = file.grating.t_over_xi.ok_or_else(|| {
                Error::Scenario("grating.t_over_xi is required for crystal_two_beam".into())
            })?;
            GratingSpec::crystal_two_beam(r)
        }
        "sinusoidal" | "fork_hologram" => {
            if file.grating.t_over_xi.is_some() {
                return Err(Error::Scenario(format!(
                    "grating.t_over_xi does not apply to kind = \"{}\"",
                    file.grating.kind
                )));
            }
            let a_over_pi = file.grating.a_over_pi.ok_or_else(|| {
                Error::Scenario(format!(
                    "grating.a_over_pi is required for {}",
                    file.grating.kind
                ))
            })?;
            let a = a_over_pi * std::f64::consts::PI;
            if file.grating.kind == "sinusoidal" {
                GratingSpec::sinusoidal(a)
            } else {
                GratingSpec::fork_hologram(a)
            }
        }
        other => {
            return Err(Error::Scenario(format!(
                "unknown grating.kind \"{other}\" (expected crystal_two_beam, sinusoidal, or fork_hologram)"
            )))
        }
    };
    if let Some(t) = file.grating.thickness_nm {
        grating = grating.with_thickness_nm(t);
    }
    if let Some(mfp) = file.grating.mfp_nm {
        grating = grating.with_mfp_nm(mfp);
    }
    if let Some(p) = file.grating.pitch_nm {
        grating = grating.with_pitch_nm(p);
    }

    let mut config = ScenarioConfig::new(grating, file.run.n_max);
    if let Some(m) = file.run.m {
        config = config.with_truncation(m);
    }
    if let Some(tracked) = file.run.tracked_orders {
        config = config.with_tracked_orders(tracked);
    }
    config = config.with_attenuation(file.run.attenuation.unwrap_or(false));
    if let Some(aperture) = file.aperture {
        config = config.with_aperture(
            ApertureSpec::new(aperture.passed_orders)
                .map_err(|e| Error::Scenario(format!("aperture.passed_orders: {e}")))?,
        );
    }
    config
        .validate()
        .map_err(|e| Error::Scenario(e.to_string()))?;

    let output = match file.output {
        Some(section) => Some(OutputSpec {
            format: section.format.as_deref().map(OutputFormat::parse).transpose()?,
            path: section.path,
        }),
        None => None,
    };
    Ok((config, output))
}

/// 17 significant decimal digits: enough to reconstruct any f64 exactly.
fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Trace as CSV: header `N,I_<order>...,total,loss`, one row per pass
/// starting at N = 0.
pub fn emit_trace_csv(trace: &IntensityTrace<f64>) -> String {
    let mut out = String::from("N");
    for k in &trace.tracked_orders {
        out.push_str(&format!(",I_{k}"));
    }
    out.push_str(",total,loss\n");
    for row in &trace.rows {
        out.push_str(&row.pass.to_string());
        for v in &row.intensities {
            out.push(',');
            out.push_str(&format_f64(*v));
        }
        out.push(',');
        out.push_str(&format_f64(row.total_in_ports));
        out.push(',');
        out.push_str(&format_f64(row.loss));
        out.push('\n');
    }
    out
}

/// Inverse of [`emit_trace_csv`]; the round trip is bit-exact.
pub fn parse_trace_csv(text: &str) -> Result<IntensityTrace<f64>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Scenario("empty trace CSV".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 4 || columns[0] != "N" {
        return Err(Error::Scenario(format!("malformed trace header: {header}")));
    }
    let order_count = columns.len() - 3;
    let mut tracked_orders = Vec::with_capacity(order_count);
    for c in &columns[1..=order_count] {
        let k = c
            .strip_prefix("I_")
            .and_then(|s| s.parse::<i32>().ok())
            .ok_or_else(|| Error::Scenario(format!("malformed intensity column \"{c}\"")))?;
        tracked_orders.push(k);
    }
    if columns[order_count + 1] != "total" || columns[order_count + 2] != "loss" {
        return Err(Error::Scenario(format!("malformed trace header: {header}")));
    }

    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::Scenario(format!(
                "row {i}: expected {} fields, got {}",
                columns.len(),
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Scenario(format!("row {i}: bad number \"{s}\"")))
        };
        let pass: usize = fields[0]
            .parse()
            .map_err(|_| Error::Scenario(format!("row {i}: bad pass index \"{}\"", fields[0])))?;
        let intensities = fields[1..=order_count]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(TraceRow {
            pass,
            intensities,
            total_in_ports: parse(fields[order_count + 1])?,
            loss: parse(fields[order_count + 2])?,
        });
    }
    Ok(IntensityTrace {
        tracked_orders,
        rows,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct SwitchPointJson {
    switch_point: usize,
    #[serde(rename = "I_direct")]
    i_direct: f64,
    #[serde(rename = "I_diffracted")]
    i_diffracted: f64,
    loss_at_switch: f64,
    efficiency: f64,
}

#[derive(Debug, Serialize)]
struct LossCurveJson {
    curve: Vec<LossPointJson>,
}

#[derive(Debug, Serialize)]
struct LossPointJson {
    #[serde(rename = "N_s")]
    n_s: usize,
    loss: f64,
}

#[derive(Debug, Serialize)]
struct ContoursJson {
    contours: Vec<ContourJson>,
}

#[derive(Debug, Serialize)]
struct ContourJson {
    product: f64,
    points: Vec<ContourPointJson>,
}

#[derive(Debug, Serialize)]
struct ContourPointJson {
    v_mip: f64,
    mfp: f64,
}

#[derive(Debug, Serialize)]
struct MaterialsJson {
    materials: Vec<MaterialRecord>,
    contours: Vec<ContourJson>,
}

#[derive(Debug, Serialize)]
struct TraceJson<'a> {
    tracked_orders: &'a [i32],
    rows: Vec<TraceRowJson>,
}

#[derive(Debug, Serialize)]
struct TraceRowJson {
    #[serde(rename = "N")]
    pass: usize,
    intensities: Vec<f64>,
    total: f64,
    loss: f64,
}

fn to_json_text<S: Serialize>(value: &S) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("infallible serialization");
    text.push('\n');
    text
}

/// Switch-point summary with stable key names and deterministic order.
pub fn emit_switch_point_json(result: &SwitchPointResult<f64>) -> String {
    to_json_text(&SwitchPointJson {
        switch_point: result.switch_point,
        i_direct: result.i_direct,
        i_diffracted: result.i_diffracted,
        loss_at_switch: result.loss_at_switch,
        efficiency: result.efficiency,
    })
}

/// Loss curve as JSON, sorted ascending by switch point.
pub fn emit_loss_curve_json(curve: &[LossPoint<f64>]) -> String {
    let mut sorted: Vec<&LossPoint<f64>> = curve.iter().collect();
    sorted.sort_by_key(|p| p.switch_point);
    to_json_text(&LossCurveJson {
        curve: sorted
            .into_iter()
            .map(|p| LossPointJson {
                n_s: p.switch_point,
                loss: p.loss,
            })
            .collect(),
    })
}

fn contour_json(c: &Contour<f64>) -> ContourJson {
    ContourJson {
        product: c.product,
        points: c
            .points
            .iter()
            .map(|&(v_mip, mfp)| ContourPointJson { v_mip, mfp })
            .collect(),
    }
}

pub fn emit_contours_json(contours: &[Contour<f64>]) -> String {
    to_json_text(&ContoursJson {
        contours: contours.iter().map(contour_json).collect(),
    })
}

/// Material survey plus constant-product contours.
pub fn emit_materials_json(materials: &[MaterialRecord], contours: &[Contour<f64>]) -> String {
    to_json_text(&MaterialsJson {
        materials: materials.to_vec(),
        contours: contours.iter().map(contour_json).collect(),
    })
}

/// Trace as JSON for consumers that prefer structure over CSV.
pub fn emit_trace_json(trace: &IntensityTrace<f64>) -> String {
    to_json_text(&TraceJson {
        tracked_orders: &trace.tracked_orders,
        rows: trace
            .rows
            .iter()
            .map(|r| TraceRowJson {
                pass: r.pass,
                intensities: r.intensities.clone(),
                total: r.total_in_ports,
                loss: r.loss,
            })
            .collect(),
    })
}

/// Loads a material dataset (columns `name,V_MIP_volts,mfp_nm,source`).
/// Names must be unique and all numeric fields positive.
pub fn parse_materials(text: &str) -> Result<Vec<MaterialRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Dataset(e.to_string()))?
        .clone();
    let expected = ["name", "V_MIP_volts", "mfp_nm", "source"];
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Dataset(format!(
            "expected columns {expected:?}, got {got:?}"
        )));
    }

    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Dataset(format!("row {i}: {e}")))?;
        let parse_num = |field: usize, label: &str| -> Result<f64> {
            row[field]
                .parse()
                .map_err(|_| Error::Dataset(format!("row {i}: bad {label} \"{}\"", &row[field])))
        };
        let record = MaterialRecord {
            name: row[0].to_string(),
            v_mip_volts: parse_num(1, "V_MIP")?,
            mfp_nm: parse_num(2, "mfp")?,
            source: row[3].to_string(),
        };
        record.validate()?;
        if !seen.insert(record.name.clone()) {
            return Err(Error::Dataset(format!(
                "duplicate material name \"{}\"",
                record.name
            )));
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::GratingKind;
    use crate::resonator::propagate;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const TWO_BEAM_DOC: &str = r#"
        [grating]
        kind = "crystal_two_beam"
        t_over_xi = 0.01

        [run]
        n_max = 100
    "#;

    const FIG3B_DOC: &str = r#"
        [grating]
        kind = "sinusoidal"
        a_over_pi = 0.02

        [aperture]
        passed_orders = [0, 1]

        [run]
        m = 100
        n_max = 150

        [output]
        format = "csv"
    "#;

    #[test]
    fn minimal_two_beam_document_parses() {
        let (config, output) = parse_scenario(TWO_BEAM_DOC).unwrap();
        assert_eq!(config.grating.kind, GratingKind::CrystalTwoBeam);
        assert_eq!(config.grating.t_over_xi, Some(0.01));
        assert_eq!(config.n_max, 100);
        assert!(output.is_none());
    }

    #[test]
    fn amplitude_is_specified_in_units_of_pi() {
        let (config, output) = parse_scenario(FIG3B_DOC).unwrap();
        assert_eq!(config.grating.phase_amplitude, Some(0.02 * PI));
        assert_eq!(output.unwrap().format, Some(OutputFormat::Csv));
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let doc = TWO_BEAM_DOC.replace("t_over_xi", "t_over_xi_typo");
        let err = parse_scenario(&doc).unwrap_err().to_string();
        assert!(err.contains("t_over_xi_typo"), "message: {err}");
    }

    #[test]
    fn tracked_orders_outside_aperture_fail_validation() {
        let doc = FIG3B_DOC.replace("n_max = 150", "n_max = 150\ntracked_orders = [0, 2]");
        let err = parse_scenario(&doc).unwrap_err().to_string();
        assert!(err.contains("subset"), "message: {err}");
    }

    #[test]
    fn fig3b_scenario_reproduces_the_golden_switch_row() {
        let (config, _) = parse_scenario(FIG3B_DOC).unwrap();
        let trace = propagate(&config).unwrap();
        let row = &trace.rows[99];
        assert!((row.total_in_ports - 0.975_868_660_434_368_6).abs() < 1e-9);
    }

    #[test]
    fn trace_csv_round_trips_bit_exactly() {
        let (config, _) = parse_scenario(TWO_BEAM_DOC).unwrap();
        let trace = propagate(&config).unwrap();
        let text = emit_trace_csv(&trace);
        let back = parse_trace_csv(&text).unwrap();
        assert_eq!(back.tracked_orders, trace.tracked_orders);
        assert_eq!(back.rows.len(), trace.rows.len());
        for (a, b) in back.rows.iter().zip(&trace.rows) {
            assert_eq!(a.pass, b.pass);
            for (x, y) in a.intensities.iter().zip(&b.intensities) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            assert_eq!(a.total_in_ports.to_bits(), b.total_in_ports.to_bits());
            assert_eq!(a.loss.to_bits(), b.loss.to_bits());
        }
    }

    #[test]
    fn two_beam_csv_has_unity_transfer_at_fifty() {
        let (config, _) = parse_scenario(TWO_BEAM_DOC).unwrap();
        let trace = propagate(&config).unwrap();
        let text = emit_trace_csv(&trace);
        let row50 = text.lines().nth(51).unwrap();
        let i1: f64 = row50.split(',').nth(2).unwrap().parse().unwrap();
        assert!((i1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn emission_is_deterministic() {
        let (config, _) = parse_scenario(FIG3B_DOC).unwrap();
        let a = emit_trace_csv(&propagate(&config).unwrap());
        let b = emit_trace_csv(&propagate(&config).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn switch_point_json_uses_stable_keys() {
        let result = SwitchPointResult {
            switch_point: 99,
            i_direct: 1e-4,
            i_diffracted: 0.52,
            loss_at_switch: 0.013,
            efficiency: 0.5201,
        };
        let text = emit_switch_point_json(&result);
        for key in [
            "switch_point",
            "I_direct",
            "I_diffracted",
            "loss_at_switch",
            "efficiency",
        ] {
            assert!(text.contains(key), "missing {key} in {text}");
        }
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["switch_point"], 99);
        assert_eq!(value["efficiency"].as_f64().unwrap(), 0.5201);
    }

    #[test]
    fn loss_curve_json_is_sorted_by_switch_point() {
        let curve = vec![
            LossPoint {
                switch_point: 199,
                loss: 0.0122,
            },
            LossPoint {
                switch_point: 49,
                loss: 0.0472,
            },
        ];
        let text = emit_loss_curve_json(&curve);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["curve"][0]["N_s"], 49);
        assert_eq!(value["curve"][1]["N_s"], 199);
    }

    #[test]
    fn builtin_materials_load() {
        let materials = parse_materials(BUILTIN_MATERIALS_CSV).unwrap();
        assert_eq!(materials.len(), 2);
        let gold = materials.iter().find(|m| m.name == "gold").unwrap();
        assert!((gold.mfp_nm - 84.0).abs() < 1e-12);
    }

    #[test]
    fn material_dataset_rejects_duplicates_and_bad_values() {
        let duplicated = "name,V_MIP_volts,mfp_nm,source\na,1.0,2.0,x\na,3.0,4.0,y\n";
        assert!(parse_materials(duplicated).is_err());
        let negative = "name,V_MIP_volts,mfp_nm,source\na,-1.0,2.0,x\n";
        assert!(parse_materials(negative).is_err());
        let wrong_header = "name,mip,mfp_nm,source\na,1.0,2.0,x\n";
        assert!(parse_materials(wrong_header).is_err());
    }

    proptest! {
        #[test]
        fn csv_number_format_round_trips(v in 0.0f64..=1.0) {
            let text = format_f64(v);
            let back: f64 = text.parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
